"""Creole-subset narratives with ``$math$`` and antiquotations.

Supported: ``=`` headings, ``**bold**``, ``//italic//``, ``[[target|label]]``,
bare URLs, ``*``/``#`` lists, ``----``, ``{{{ }}}`` (block and inline),
``\\\\`` line breaks and the ``~`` escape. Antiquotations are recognized
everywhere except inside nowiki and math. Spans are offsets into the
LF-normalized source.
"""

from __future__ import annotations

import enum
import html
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from agora import antiquotation as aq
from agora.antiquotation import Antiquotation, IssueKind, ParseIssue, PrefixDecl, Span


@dataclass
class Text:
    text: str


@dataclass
class Bold:
    children: list[Inline]


@dataclass
class Italic:
    children: list[Inline]


@dataclass
class Link:
    target: str
    label: str


@dataclass
class Math:
    source: str


@dataclass
class Code:
    source: str


@dataclass
class LineBreak:
    pass


@dataclass
class AntiquotationNode:
    antiquotation: Antiquotation

    @property
    def span(self) -> Span:
        assert self.antiquotation.span is not None
        return self.antiquotation.span


Inline = Union[Text, Bold, Italic, Link, Math, Code, LineBreak, AntiquotationNode]


@dataclass
class Heading:
    level: int
    inlines: list[Inline]


@dataclass
class Paragraph:
    inlines: list[Inline]


@dataclass
class ListItem:
    inlines: list[Inline]
    sublists: list[ListBlock] = field(default_factory=list)


@dataclass
class ListBlock:
    ordered: bool
    items: list[ListItem] = field(default_factory=list)


@dataclass
class Preformatted:
    text: str


@dataclass
class HorizontalRule:
    pass


Block = Union[Heading, Paragraph, ListBlock, Preformatted, HorizontalRule]


@dataclass
class NarrativeDoc:
    blocks: list[Block] = field(default_factory=list)
    prefix_decls: list[PrefixDecl] = field(default_factory=list)
    issues: list[ParseIssue] = field(default_factory=list)

    def antiquotations(self) -> list[AntiquotationNode]:
        return list(_iter_nodes(self.blocks))

    @property
    def title(self) -> str | None:
        for b in self.blocks:
            if isinstance(b, Heading):
                return plain_text(b.inlines).strip()
        return None


def _iter_inlines(inlines: list[Inline]) -> Iterator[AntiquotationNode]:
    for n in inlines:
        if isinstance(n, AntiquotationNode):
            yield n
        elif isinstance(n, (Bold, Italic)):
            yield from _iter_inlines(n.children)


def _iter_nodes(blocks: list[Block] | list[ListBlock]) -> Iterator[AntiquotationNode]:
    for b in blocks:
        if isinstance(b, (Heading, Paragraph)):
            yield from _iter_inlines(b.inlines)
        elif isinstance(b, ListBlock):
            for item in b.items:
                yield from _iter_inlines(item.inlines)
                yield from _iter_nodes(item.sublists)


def plain_text(inlines: list[Inline]) -> str:
    out = []
    for n in inlines:
        if isinstance(n, Text):
            out.append(n.text)
        elif isinstance(n, (Bold, Italic)):
            out.append(plain_text(n.children))
        elif isinstance(n, Link):
            out.append(n.label)
        elif isinstance(n, (Math, Code)):
            out.append(n.source)
    return "".join(out)


# -- inline parsing -------------------------------------------------------

_ATOM_RE = re.compile(r"~.|\\@\{|\{\{\{|@\{|\$", re.S)
_MARKUP_RE = re.compile(
    r"""(?P<esc>~(?P<escch>[^\s]))
      | (?P<aesc>\\@\{)
      | (?P<br>\\\\)
      | (?P<link>\[\[(?P<ltarget>[^\]|]*?)(?:\|(?P<llabel>.*?))?\]\])
      | (?P<url>(?<![\w/])[A-Za-z][A-Za-z0-9+.\-]*://[^\s<>"'\[\]|]*[^\s<>"'\[\]|.,;:!?)])
      | (?P<bold>\*\*)
      | (?P<ital>//)""",
    re.X | re.S,
)


class _InlineParser:
    def __init__(self, doc: NarrativeDoc):
        self.doc = doc

    def parse(self, text: str, offset: int) -> list[Inline]:
        items = self._atoms(text, offset)
        return _merge(self._markup(items))

    def _issue(self, span: Span, kind: IssueKind, message: str) -> None:
        self.doc.issues.append(ParseIssue(span, kind, message))

    def _atoms(self, text: str, offset: int) -> list[tuple[str, int] | Inline]:
        """Split off nowiki, math and antiquotations; the rest stays raw text."""
        items: list[tuple[str, int] | Inline] = []
        pos = 0
        chunk_start = 0
        n = len(text)
        while True:
            m = _ATOM_RE.search(text, pos)
            if m is None:
                break
            tok = m.group()
            start = m.start()
            if tok.startswith("~") or tok == "\\@{":
                pos = m.end()
                continue
            atom: Inline | None = None
            end: int
            if tok == "{{{":
                close = text.find("}}}", start + 3)
                if close == -1:
                    self._issue((offset + start, offset + n), IssueKind.Malformed, "unclosed '{{{'")
                    pos = start + 3
                    continue
                while close + 3 < n and text[close + 3] == "}":
                    close += 1
                atom, end = Code(text[start + 3 : close]), close + 3
            elif tok == "$":
                close = text.find("$", start + 1)
                if close == -1 or close == start + 1:
                    if close == -1:
                        self._issue((offset + start, offset + start + 1), IssueKind.Malformed, "unclosed '$'")
                    pos = start + 1 if close == -1 else start + 2
                    continue
                atom, end = Math(text[start + 1 : close]), close + 1
            else:
                found = aq.scan(text[start:], offset + start)
                first = found[0]
                if isinstance(first, ParseIssue):
                    self.doc.issues.append(first)
                    pos = start + 2
                    continue
                end = first.span[1] - offset
                parsed = aq.parse(first.body, first.span)
                if isinstance(parsed, ParseIssue):
                    self.doc.issues.append(parsed)
                    pos = end
                    continue
                if isinstance(parsed, PrefixDecl):
                    self.doc.prefix_decls.append(parsed)
                else:
                    atom = AntiquotationNode(parsed)
            if start > chunk_start:
                items.append((text[chunk_start:start], offset + chunk_start))
            if atom is not None:
                items.append(atom)
            pos = chunk_start = end
        if chunk_start < n:
            items.append((text[chunk_start:], offset + chunk_start))
        return items

    def _markup(self, items: list[tuple[str, int] | Inline]) -> list[Inline]:
        # frame: [kind, children, marker, offset]
        stack: list[list] = [[None, [], "", 0]]

        def degrade(frame: list) -> None:
            self._issue((frame[3], frame[3] + len(frame[2])), IssueKind.Malformed, f"unclosed {frame[2]!r}")
            stack[-1][1].append(Text(frame[2]))
            stack[-1][1].extend(frame[1])

        for item in items:
            if not isinstance(item, tuple):
                stack[-1][1].append(item)
                continue
            chunk, base = item
            pos = 0
            for m in _MARKUP_RE.finditer(chunk):
                if m.start() > pos:
                    stack[-1][1].append(Text(chunk[pos : m.start()]))
                pos = m.end()
                if m.group("esc"):
                    stack[-1][1].append(Text(m.group("escch")))
                elif m.group("aesc"):
                    stack[-1][1].append(Text("@{"))
                elif m.group("br"):
                    stack[-1][1].append(LineBreak())
                elif m.group("link"):
                    target = m.group("ltarget").strip()
                    label = m.group("llabel")
                    stack[-1][1].append(Link(target, (label if label is not None else target).strip()))
                elif m.group("url"):
                    stack[-1][1].append(Link(m.group("url"), m.group("url")))
                else:
                    kind = Bold if m.group("bold") else Italic
                    depth = next((i for i in range(len(stack) - 1, 0, -1) if stack[i][0] is kind), None)
                    if depth is None:
                        stack.append([kind, [], m.group(), base + m.start()])
                        continue
                    while len(stack) - 1 > depth:
                        degrade(stack.pop())
                    frame = stack.pop()
                    stack[-1][1].append(kind(_merge(frame[1])))
            if pos < len(chunk):
                stack[-1][1].append(Text(chunk[pos:]))
        while len(stack) > 1:
            degrade(stack.pop())
        return stack[0][1]


def _merge(inlines: list[Inline]) -> list[Inline]:
    out: list[Inline] = []
    for n in inlines:
        if isinstance(n, Text) and out and isinstance(out[-1], Text):
            out[-1] = Text(out[-1].text + n.text)
        elif isinstance(n, Text) and not n.text:
            continue
        else:
            out.append(n)
    return out


# -- block parsing --------------------------------------------------------

_HEADING_RE = re.compile(r"^[ \t]*(={1,6})(?!=)[ \t]*(.*?)[ \t]*=*[ \t]*$")
_HR_RE = re.compile(r"^[ \t]*-{4,}[ \t]*$")
_LIST_RE = re.compile(r"^[ \t]*([*#]+)[ \t]*(.*)$")


def parse_narrative(text: str) -> NarrativeDoc:
    """Parse narrative markup; malformed markup degrades to text plus an issue."""
    text = text.replace("\r\n", "\n")
    doc = NarrativeDoc()
    inline = _InlineParser(doc)
    lines: list[tuple[str, int]] = []
    off = 0
    for line in text.split("\n"):
        lines.append((line, off))
        off += len(line) + 1

    para: list[tuple[str, int]] = []
    list_stack: list[ListBlock] = []

    def flush_para() -> None:
        if not para:
            return
        start = para[0][1]
        end = para[-1][1] + len(para[-1][0])
        inlines = inline.parse(text[start:end], start)
        if not _blank(inlines):
            doc.blocks.append(Paragraph(inlines))
        para.clear()

    def end_list() -> None:
        list_stack.clear()

    i = 0
    while i < len(lines):
        line, loff = lines[i]
        stripped = line.strip()
        if stripped == "{{{":
            close = next((j for j in range(i + 1, len(lines)) if lines[j][0].strip() == "}}}"), None)
            if close is not None:
                flush_para()
                end_list()
                body = "\n".join(l for l, _ in lines[i + 1 : close])
                doc.blocks.append(Preformatted(body))
                i = close + 1
                continue
        if not para and stripped.startswith("{{{") and stripped.endswith("}}}") and len(stripped) >= 6 \
                and "}}}" not in stripped[3:-3]:
            end_list()
            doc.blocks.append(Preformatted(stripped[3:-3]))
            i += 1
            continue
        if not stripped:
            flush_para()
            end_list()
            i += 1
            continue
        m = _HEADING_RE.match(line)
        if m:
            flush_para()
            end_list()
            inlines = inline.parse(m.group(2), loff + m.start(2))
            doc.blocks.append(Heading(len(m.group(1)), inlines))
            i += 1
            continue
        if _HR_RE.match(line):
            flush_para()
            end_list()
            doc.blocks.append(HorizontalRule())
            i += 1
            continue
        m = _LIST_RE.match(line)
        if m and not para and (list_stack or len(m.group(1)) == 1):
            marker = m.group(1)
            depth = len(marker)
            ordered = marker[-1] == "#"
            if depth > len(list_stack) + 1:
                depth = len(list_stack) + 1
            item = ListItem(inline.parse(m.group(2), loff + m.start(2)))
            del list_stack[depth:]
            if len(list_stack) == depth and list_stack[-1].ordered != ordered:
                list_stack.pop()
            if len(list_stack) < depth:
                new = ListBlock(ordered)
                if list_stack and list_stack[-1].items:
                    list_stack[-1].items[-1].sublists.append(new)
                else:
                    doc.blocks.append(new)
                list_stack.append(new)
            list_stack[-1].items.append(item)
            i += 1
            continue
        if list_stack:
            end_list()
        para.append((line, loff))
        i += 1
    flush_para()
    doc.issues.sort(key=lambda p: p.span or (0, 0))
    return doc


def _blank(inlines: list[Inline]) -> bool:
    return all(isinstance(n, Text) and not n.text.strip() for n in inlines)


# -- rendering ------------------------------------------------------------


class Mode(enum.Enum):
    Inline = "inline"
    Placeholder = "placeholder"


class MissingInclusion(KeyError):
    def __init__(self, span: Span):
        super().__init__(span)
        self.span = span


def _esc(s: str) -> str:
    return html.escape(s, quote=False)


def _attr(s: str) -> str:
    return html.escape(s, quote=True)


def placeholder(a: Antiquotation) -> str:
    return (
        f'<div class="agora-placeholder" data-type="{_attr(str(a.ty))}" '
        f'data-ref="{_attr(a.reference)}" data-options="{_attr(",".join(a.options))}"></div>'
    )


def inclusion(a: Antiquotation, fragment_html: str) -> str:
    return f'<div class="agora-include" data-ref="{_attr(a.reference)}">{fragment_html}</div>'


class _Renderer:
    def __init__(self, inclusions: Mapping[Span, str], mode: Mode, link_prefix: str):
        self.inclusions = inclusions
        self.mode = mode
        self.link_prefix = link_prefix

    def href(self, target: str) -> str:
        if re.match(r"^[A-Za-z][A-Za-z0-9+.\-]*:", target) or target.startswith(("#", "/")):
            return target
        page, sep, frag = target.partition("#")
        return f"{self.link_prefix}{page}.html{sep}{frag}"

    def inlines(self, nodes: list[Inline]) -> str:
        return "".join(self.inline(n) for n in nodes)

    def inline(self, n: Inline) -> str:
        if isinstance(n, Text):
            return _esc(n.text)
        if isinstance(n, Bold):
            return f"<strong>{self.inlines(n.children)}</strong>"
        if isinstance(n, Italic):
            return f"<em>{self.inlines(n.children)}</em>"
        if isinstance(n, Link):
            return f'<a href="{_attr(self.href(n.target))}">{_esc(n.label)}</a>'
        if isinstance(n, Math):
            return f'<span class="math">{_esc(n.source)}</span>'
        if isinstance(n, Code):
            return f"<code>{_esc(n.source)}</code>"
        if isinstance(n, LineBreak):
            return "<br>"
        a = n.antiquotation
        if self.mode is Mode.Placeholder:
            return placeholder(a)
        try:
            return inclusion(a, self.inclusions[n.span])
        except KeyError:
            raise MissingInclusion(n.span) from None

    def block(self, b: Block | ListBlock) -> str:
        if isinstance(b, Heading):
            return f"<h{b.level}>{self.inlines(b.inlines)}</h{b.level}>"
        if isinstance(b, Paragraph):
            if any(True for _ in _iter_inlines(b.inlines)):
                return f'<div class="paragraph">{self.inlines(b.inlines)}</div>'
            return f"<p>{self.inlines(b.inlines)}</p>"
        if isinstance(b, ListBlock):
            tag = "ol" if b.ordered else "ul"
            items = "".join(
                f"<li>{self.inlines(it.inlines)}{''.join(self.block(s) for s in it.sublists)}</li>"
                for it in b.items
            )
            return f"<{tag}>{items}</{tag}>"
        if isinstance(b, Preformatted):
            return f"<pre>{_esc(b.text)}</pre>"
        return "<hr>"


def render_narrative(
    doc: NarrativeDoc,
    inclusions: Mapping[Span, str] | None = None,
    mode: Mode | str = Mode.Inline,
    link_prefix: str = "",
) -> str:
    """Render to an HTML body fragment.

    In inline mode ``inclusions`` must map every antiquotation span to its
    HTML; in placeholder mode each antiquotation becomes an empty
    ``agora-placeholder`` div for client-side substitution.
    """
    r = _Renderer(inclusions or {}, Mode(mode), link_prefix)
    return "".join(r.block(b) + "\n" for b in doc.blocks)
