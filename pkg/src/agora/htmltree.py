"""A lossless HTML tree.

Every node keeps the exact source text it was parsed from, so serializing
an unmodified tree reproduces the input byte for byte. Attribute edits
rewrite only the affected attribute inside the original start tag.
"""

from __future__ import annotations

import html
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Iterator, Union

VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)
BLOCK_ELEMENTS = frozenset(
    """address article aside blockquote dd details dialog div dl dt fieldset
    figcaption figure footer form h1 h2 h3 h4 h5 h6 header hr li main nav ol p
    pre section table tbody thead tfoot tr td th ul""".split()
)

_ATTR_RE = re.compile(
    r"""(?P<name>[^\s/>"'=]+)(?:(?P<eq>\s*=\s*)(?P<value>"[^"]*"|'[^']*'|[^\s"'>]+))?"""
)
_TAG_NAME_RE = re.compile(r"<\s*[^\s/>]+")


@dataclass(eq=False)
class Text:
    raw: str

    @property
    def text(self) -> str:
        return html.unescape(self.raw)

    def serialize(self) -> str:
        return self.raw

    def clone(self) -> Text:
        return Text(self.raw)


@dataclass(eq=False)
class Raw:
    """Markup that is not element structure: comments, doctypes, stray end tags."""

    raw: str

    def serialize(self) -> str:
        return self.raw

    def clone(self) -> Raw:
        return Raw(self.raw)


@dataclass(eq=False)
class Element:
    tag: str
    attrs: list[tuple[str, str | None]] = field(default_factory=list)
    children: list[Node] = field(default_factory=list)
    start_raw: str = ""
    end_raw: str = ""
    self_closing: bool = False

    @classmethod
    def new(cls, tag: str, attrs: dict[str, str] | None = None, children: list[Node] | None = None) -> Element:
        attrs = dict(attrs or {})
        start = "<" + tag + "".join(f' {k}="{html.escape(v, quote=True)}"' for k, v in attrs.items()) + ">"
        end = "" if tag in VOID_ELEMENTS else f"</{tag}>"
        return cls(tag, list(attrs.items()), list(children or []), start, end)

    def clone(self) -> Element:
        """Deep copy; far cheaper than ``copy.deepcopy`` on large trees."""
        return Element(self.tag, list(self.attrs), [c.clone() for c in self.children],
                       self.start_raw, self.end_raw, self.self_closing)

    def get(self, name: str, default: str | None = None) -> str | None:
        for k, v in self.attrs:
            if k == name:
                return v if v is not None else ""
        return default

    def has(self, name: str) -> bool:
        return any(k == name for k, _ in self.attrs)

    def set(self, name: str, value: str) -> None:
        """Set an attribute, editing the original start tag in place."""
        quoted = '"' + html.escape(value, quote=True) + '"'
        for idx, (k, _) in enumerate(self.attrs):
            if k == name:
                self.attrs[idx] = (k, value)
                break
        else:
            self.attrs.append((name, value))
            self.start_raw = _append_attr(self.start_raw, f"{name}={quoted}")
            return
        m = _find_attr(self.start_raw, name)
        if m is None:
            self.start_raw = _append_attr(self.start_raw, f"{name}={quoted}")
            return
        if m.group("value") is not None and m.group("value")[:1] == "'":
            quoted = "'" + html.escape(value, quote=True) + "'"
        s, e = m.span()
        self.start_raw = self.start_raw[:s] + f"{m.group('name')}={quoted}" + self.start_raw[e:]

    @property
    def classes(self) -> list[str]:
        return (self.get("class") or "").split()

    def iter(self) -> Iterator[Element]:
        """This element and all descendant elements, in document order."""
        yield self
        for c in self.children:
            if isinstance(c, Element):
                yield from c.iter()

    def text_nodes(self) -> Iterator[Text]:
        for c in self.children:
            if isinstance(c, Text):
                yield c
            elif isinstance(c, Element):
                yield from c.text_nodes()

    def text_content(self) -> str:
        return "".join(t.text for t in self.text_nodes())

    def serialize(self) -> str:
        return self.start_raw + "".join(c.serialize() for c in self.children) + self.end_raw

    def inner_html(self) -> str:
        return "".join(c.serialize() for c in self.children)

    def contains_block(self) -> bool:
        return any(e.tag in BLOCK_ELEMENTS for e in self.iter() if e is not self)


Node = Union[Element, Text, Raw]


def _find_attr(start_raw: str, name: str) -> re.Match[str] | None:
    head = _TAG_NAME_RE.match(start_raw)
    pos = head.end() if head else 1
    for m in _ATTR_RE.finditer(start_raw, pos):
        if m.group("name").lower() == name:
            return m
    return None


def _append_attr(start_raw: str, text: str) -> str:
    if start_raw.endswith("/>"):
        body = start_raw[:-2].rstrip()
        return f"{body} {text}/>"
    body = start_raw[:-1] if start_raw.endswith(">") else start_raw
    return f"{body} {text}>"


@dataclass(eq=False)
class HtmlDoc:
    """Parsed document: a synthetic root element holding the top-level nodes."""

    root: Element

    def serialize(self) -> str:
        return self.root.inner_html()

    def clone(self) -> HtmlDoc:
        return HtmlDoc(self.root.clone())

    def iter(self) -> Iterator[Element]:
        for c in self.root.children:
            if isinstance(c, Element):
                yield from c.iter()

    def text_content(self) -> str:
        return self.root.text_content()

    def find_first(self, tag: str) -> Element | None:
        return next((e for e in self.iter() if e.tag == tag), None)


class _EventParser(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.events: list[tuple[str, int, object]] = []
        self._line_starts: list[int] = [0]

    def feed_all(self, source: str) -> None:
        self._line_starts = [0] + [m.end() for m in re.finditer(r"\n", source)]
        self.feed(source)
        self.close()

    def _pos(self) -> int:
        line, col = self.getpos()
        return self._line_starts[line - 1] + col

    def handle_starttag(self, tag, attrs):
        self.events.append(("start", self._pos(), (tag, attrs, self.get_starttag_text())))

    def handle_startendtag(self, tag, attrs):
        self.events.append(("startend", self._pos(), (tag, attrs, self.get_starttag_text())))

    def handle_endtag(self, tag):
        self.events.append(("end", self._pos(), tag))

    def handle_data(self, data):
        self.events.append(("data", self._pos(), None))

    def handle_comment(self, data):
        self.events.append(("raw", self._pos(), None))

    def handle_decl(self, decl):
        self.events.append(("raw", self._pos(), None))

    def handle_pi(self, data):
        self.events.append(("raw", self._pos(), None))

    def unknown_decl(self, data):
        self.events.append(("raw", self._pos(), None))


def parse_html(source: str) -> HtmlDoc:
    parser = _EventParser()
    parser.feed_all(source)
    events = parser.events
    root = Element("#root")
    stack: list[Element] = [root]

    def append(node: Node) -> None:
        stack[-1].children.append(node)

    def append_text(raw: str) -> None:
        if not raw:
            return
        last = stack[-1].children[-1] if stack[-1].children else None
        if isinstance(last, Text):
            last.raw += raw
        else:
            append(Text(raw))

    # Events carry their start offsets; each event's raw source runs to the
    # next event. Anything the parser skipped stays attached as text/raw.
    covered = 0
    for idx, (kind, start, payload) in enumerate(events):
        end = events[idx + 1][1] if idx + 1 < len(events) else len(source)
        if start > covered:
            append_text(source[covered:start])
        start = max(start, covered)
        chunk = source[start:end]
        covered = max(covered, end)
        if kind == "data":
            append_text(chunk)
        elif kind == "raw":
            append(Raw(chunk))
        elif kind in ("start", "startend"):
            tag, attrs, tag_text = payload  # type: ignore[misc]
            tag_text = tag_text or chunk
            rest = chunk[len(tag_text):] if chunk.startswith(tag_text) else ""
            if not chunk.startswith(tag_text):
                tag_text = chunk
            el = Element(tag, list(attrs), [], tag_text, "", kind == "startend")
            append(el)
            if kind == "start" and tag not in VOID_ELEMENTS:
                stack.append(el)
            append_text(rest)
        else:
            tag = payload
            close = chunk.find(">")
            tag_text = chunk[: close + 1] if close != -1 else chunk
            rest = chunk[len(tag_text):]
            match = next((i for i in range(len(stack) - 1, 0, -1) if stack[i].tag == tag), None)
            if match is None:
                append(Raw(tag_text))
            else:
                stack[match].end_raw = tag_text
                del stack[match:]
            append_text(rest)
    if covered < len(source):
        append_text(source[covered:])
    return HtmlDoc(root)


def parse_fragment(source: str) -> list[Node]:
    return parse_html(source).root.children


def serialize_nodes(nodes: list[Node]) -> str:
    return "".join(n.serialize() for n in nodes)


def iter_with_ancestors(root: Element) -> Iterator[tuple[Element, tuple[Element, ...]]]:
    """Pre-order walk of ``root``'s descendants with their ancestor chains."""

    def walk(el: Element, chain: tuple[Element, ...]) -> Iterator[tuple[Element, tuple[Element, ...]]]:
        for c in el.children:
            if isinstance(c, Element):
                yield c, chain
                yield from walk(c, chain + (c,))

    yield from walk(root, ())

