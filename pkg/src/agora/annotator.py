"""Turn Coqdoc HTML into HTML+RDFa.

Coqdoc emits a flat run of token ``span``/``a`` elements per command. The
pipeline groups each command under a wrapper, copies the source token type
into ``typeof``, reuses the name anchor as ``about``, and wraps proof
scripts with an ``oo:Proof`` element pointing at the statement it proves.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from agora.htmltree import Element, HtmlDoc, Node, Text
from agora.vocabulary import OmdocType, subsumes

log = logging.getLogger(__name__)

DEFAULT_TYPE_MAPPING: Mapping[str, OmdocType] = {
    "lemma": OmdocType.Lemma,
    "thm": OmdocType.Theorem,
    "theorem": OmdocType.Theorem,
    "definition": OmdocType.Definition,
    "def": OmdocType.Definition,
    "axiom": OmdocType.Axiom,
    "corollary": OmdocType.Corollary,
    "proposition": OmdocType.Proposition,
    "example": OmdocType.Example,
}

# Coqdoc token classes that never denote a statement; no warning for these.
KNOWN_UNMAPPED = frozenset(
    """keyword var binder notation tactic library module constructor inductive
    record projection method class instance abbreviation section variable
    parameter field""".split()
)

PROOF_START = "Proof"
PROOF_END = frozenset({"Qed", "Defined", "Admitted", "Abort"})
COMMAND_CLASS = "command"

# Containers searched for command runs; token elements are never split.
_CONTAINERS = frozenset(
    "#root html body div section article main pre td li blockquote p center".split()
)
_TERMINATOR_RE = re.compile(
    r"(?<!\.)\.(?!\.)(?=\s|$|&(?:nbsp|#160|#x[aA]0|#32|#x20|#9|#10|#13);)"
)
_FIRST_WORD_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_']*)")


@dataclass(frozen=True)
class AnnotationWarning:
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


class TypeMapping:
    """Source type token to OMDoc type, compared case-insensitively."""

    def __init__(self, overrides: Mapping[str, OmdocType] | None = None):
        self._map = {k.lower(): v for k, v in DEFAULT_TYPE_MAPPING.items()}
        for k, v in (overrides or {}).items():
            self._map[k.lower()] = v

    def get(self, token: str) -> OmdocType | None:
        return self._map.get(token.strip().lower())

    def __contains__(self, token: str) -> bool:
        return token.strip().lower() in self._map


def source_type(el: Element) -> str | None:
    """The Coqdoc token type: ``@type`` (invalid HTML, kept) or ``@title``."""
    return el.get("type") or el.get("title")


def _warn(warnings: list[AnnotationWarning] | None, kind: str, message: str) -> None:
    w = AnnotationWarning(kind, message)
    log.debug("%s", w)
    if warnings is not None:
        warnings.append(w)


def _is_command(node: Node) -> bool:
    return isinstance(node, Element) and COMMAND_CLASS in node.classes


def _is_proof_wrapper(node: Node) -> bool:
    return isinstance(node, Element) and node.get("typeof") == "oo:Proof" and COMMAND_CLASS not in node.classes


def _starts_command(node: Node) -> bool:
    if not isinstance(node, Element) or node.tag not in ("span", "a"):
        return False
    if (source_type(node) or "").lower() != "keyword":
        return False
    word = node.text_content().strip()
    return word[:1].isupper()


def _wrapper(children: list[Node], attrs: dict[str, str]) -> Element:
    probe = Element("span", children=children)
    tag = "div" if probe.contains_block() else "span"
    return Element.new(tag, attrs, children)


def _split_at_terminator(text: Text) -> tuple[Text, Text | None] | None:
    m = _TERMINATOR_RE.search(text.raw)
    if m is None:
        return None
    cut = m.end()
    head, tail = text.raw[:cut], text.raw[cut:]
    return Text(head), (Text(tail) if tail else None)


def _group_children(children: list[Node]) -> list[Node]:
    out: list[Node] = []
    i = 0
    n = len(children)
    while i < n:
        node = children[i]
        if not _starts_command(node):
            out.append(node)
            i += 1
            continue
        group: list[Node] = [node]
        i += 1
        while i < n:
            nxt = children[i]
            if isinstance(nxt, Text):
                split = _split_at_terminator(nxt)
                if split is not None:
                    head, tail = split
                    group.append(head)
                    if tail is not None:
                        children = children[: i + 1] + [tail] + children[i + 1 :]
                        n += 1
                    i += 1
                    break
            elif isinstance(nxt, Element) and (_is_command(nxt) or nxt.tag in _CONTAINERS and nxt.tag != "p"):
                break
            group.append(nxt)
            i += 1
        out.append(_wrapper(group, {"class": COMMAND_CLASS}))
    return out


def _walk_containers(el: Element, fn) -> None:
    el.children = fn(el.children)
    for c in el.children:
        if isinstance(c, Element) and c.tag in _CONTAINERS and not _is_command(c) and not c.has("typeof"):
            _walk_containers(c, fn)


def group_commands(doc: HtmlDoc, warnings: list[AnnotationWarning] | None = None) -> HtmlDoc:
    """Re-parent each command's token run under one ``class="command"`` wrapper.

    A command starts at a capitalized keyword token and runs through the
    first text node holding a terminating period; that text node is split
    right after the period.
    """
    doc = doc.clone()
    _walk_containers(doc.root, _group_children)
    return doc


def commands(doc: HtmlDoc) -> list[Element]:
    return [e for e in doc.iter() if _is_command(e)]


def _type_token(cmd: Element, m: TypeMapping) -> tuple[OmdocType | None, list[str]]:
    named: OmdocType | None = None
    first: OmdocType | None = None
    unknown: list[str] = []

    def visit(el: Element, in_anchor: bool) -> None:
        nonlocal named, first
        for c in el.children:
            if not isinstance(c, Element):
                continue
            anchored = in_anchor or (c.tag == "a" and c.has("name"))
            tok = source_type(c)
            if tok is not None:
                t = m.get(tok)
                if t is not None:
                    first = first or t
                    if anchored and named is None:
                        named = t
                elif tok.strip().lower() not in KNOWN_UNMAPPED:
                    unknown.append(tok)
            visit(c, anchored)

    visit(cmd, False)
    return named or first, unknown


def export_types(
    doc: HtmlDoc, m: TypeMapping | None = None, warnings: list[AnnotationWarning] | None = None
) -> HtmlDoc:
    """Set ``typeof="oo:<Type>"`` on commands carrying a mapped token.

    The token inside the name anchor wins over earlier mapped tokens, so a
    lemma whose statement mentions a definition is still typed Lemma.
    """
    m = m or TypeMapping()
    doc = doc.clone()
    for cmd in commands(doc):
        if cmd.has("typeof"):
            continue
        t, unknown = _type_token(cmd, m)
        if t is not None:
            cmd.set("typeof", f"oo:{t.value}")
        elif unknown:
            _warn(warnings, "UnknownType", f"unmapped source type {unknown[0]!r} in {cmd.text_content().strip()[:40]!r}")
    return doc


def identify_subjects(doc: HtmlDoc, warnings: list[AnnotationWarning] | None = None) -> HtmlDoc:
    doc = doc.clone()
    seen: set[str] = {e.get("about") for e in doc.iter() if e.has("about")}  # type: ignore[misc]
    for cmd in commands(doc):
        if not cmd.has("typeof") or cmd.has("about"):
            continue
        anchor = next((e for e in cmd.iter() if e.tag == "a" and e.get("name")), None)
        if anchor is None:
            _warn(warnings, "MissingName", f"typed command without a name anchor: {cmd.text_content().strip()[:40]!r}")
            continue
        about = "#" + (anchor.get("name") or "")
        if about in seen:
            _warn(warnings, "DuplicateSubject", f"subject {about} assigned more than once")
        seen.add(about)
        cmd.set("about", about)
    return doc


def _first_word(el: Element) -> str:
    m = _FIRST_WORD_RE.match(el.text_content())
    return m.group(1) if m else ""


def _wrap_proofs_in(children: list[Node], warnings: list[AnnotationWarning] | None) -> list[Node]:
    out: list[Node] = []
    i = 0
    n = len(children)
    while i < n:
        node = children[i]
        if not (_is_command(node) and _first_word(node) == PROOF_START):  # type: ignore[arg-type]
            out.append(node)
            i += 1
            continue
        j = i + 1
        while j < n and not (_is_command(children[j]) and _first_word(children[j]) in PROOF_END):  # type: ignore[arg-type]
            j += 1
        if j >= n:
            _warn(warnings, "UnclosedProof", "input ends inside a proof")
            j = n - 1
        region = children[i : j + 1]
        statement = _proved_statement(out)
        head: list[Node] = []
        if statement is None:
            _warn(warnings, "NoStatement", "proof without a preceding typed, named assertion")
        else:
            head.append(Element.new("span", {"rel": "oo:proves", "resource": statement}))
        out.append(_wrapper(head + region, {"typeof": "oo:Proof"}))
        i = j + 1
    return out


def _proved_statement(preceding: list[Node]) -> str | None:
    """``about`` of the nearest typed command before a proof, if an assertion."""
    for node in reversed(preceding):
        if _is_proof_wrapper(node):
            return None
        if _is_command(node) and node.has("typeof"):  # type: ignore[union-attr]
            ty = (node.get("typeof") or "").removeprefix("oo:")  # type: ignore[union-attr]
            try:
                t = OmdocType(ty)
            except ValueError:
                return None
            if not subsumes(OmdocType.Assertion, t):
                return None
            return node.get("about")  # type: ignore[union-attr]
    return None


def wrap_proofs(doc: HtmlDoc, warnings: list[AnnotationWarning] | None = None) -> HtmlDoc:
    doc = doc.clone()
    _walk_containers(doc.root, lambda ch: _wrap_proofs_in(ch, warnings))
    return doc


def annotate(doc: HtmlDoc, m: TypeMapping | None = None) -> tuple[HtmlDoc, list[AnnotationWarning]]:
    warnings: list[AnnotationWarning] = []
    doc = group_commands(doc, warnings)
    doc = export_types(doc, m, warnings)
    doc = identify_subjects(doc, warnings)
    doc = wrap_proofs(doc, warnings)
    return doc, warnings


def typed_wrappers(doc: HtmlDoc) -> Iterable[Element]:
    return (e for e in doc.iter() if e.has("typeof"))
