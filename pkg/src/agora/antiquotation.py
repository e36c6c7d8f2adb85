"""Scanning and parsing of ``@{type reference [options]}`` antiquotations.

The grammar, whitespace separated::

    @{prefix NAME=IRI}
    @{TYPE LOCATION[#FRAGMENT] [OPT, OPT=VALUE ...]}

``TYPE`` is a CURIE. ``LOCATION`` is an absolute IRI when it contains
``://``, a CURIE when a ``:`` occurs before any ``/`` or ``#``, and a
wiki-relative page path otherwise. ``\\@{`` is a literal ``@{``; the first
unescaped ``}`` closes the body (no nesting).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Union

from agora.vocabulary import Curie, Iri, VocabularyError, is_absolute_iri

Span = tuple[int, int]

_OPEN = "@{"
_OPTION_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*(?:=[^\s,\[\]=]+)?$")
_FRAGMENT_RE = re.compile(r"^[^\s#}]+$")
_PREFIX_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


class IssueKind(enum.Enum):
    Malformed = "Malformed"
    EmptyBody = "EmptyBody"
    BadIri = "BadIri"
    BadOptions = "BadOptions"
    Unterminated = "Unterminated"


@dataclass(frozen=True)
class ParseIssue:
    span: Span | None
    kind: IssueKind
    message: str

    def at(self, span: Span) -> ParseIssue:
        return ParseIssue(span, self.kind, self.message)


@dataclass(frozen=True)
class Occurrence:
    span: Span
    body: str


@dataclass(frozen=True)
class WikiPath:
    path: str

    def __str__(self) -> str:
        return self.path


Location = Union[Curie, WikiPath, Iri]


@dataclass(frozen=True)
class RefTarget:
    location: Location
    fragment: str | None = None

    def __str__(self) -> str:
        if self.fragment is None:
            return str(self.location)
        return f"{self.location}#{self.fragment}"


@dataclass(frozen=True)
class Antiquotation:
    ty: Curie
    target: RefTarget
    options: tuple[str, ...] = ()
    span: Span | None = field(default=None, compare=False)

    @property
    def reference(self) -> str:
        return str(self.target)

    def option_keys(self) -> list[str]:
        return [o.split("=", 1)[0] for o in self.options]

    def has_option(self, key: str) -> bool:
        return key in self.option_keys()

    def to_source(self) -> str:
        opts = f" [{','.join(self.options)}]" if self.options else ""
        return f"@{{{self.ty} {self.target}{opts}}}"


@dataclass(frozen=True)
class PrefixDecl:
    name: str
    base: Iri
    span: Span | None = field(default=None, compare=False)

    def to_source(self) -> str:
        return f"@{{prefix {self.name}={self.base}}}"


def scan(text: str, offset: int = 0) -> list[Occurrence | ParseIssue]:
    """Find antiquotation bodies in document order.

    Spans cover ``@{`` through ``}`` inclusive and are shifted by ``offset``.
    An opener without a closing brace yields a single ``Unterminated``
    issue running to the end of the input.
    """
    found: list[Occurrence | ParseIssue] = []
    i = 0
    n = len(text)
    while True:
        start = text.find(_OPEN, i)
        if start == -1:
            return found
        if start > 0 and text[start - 1] == "\\":
            i = start + len(_OPEN)
            continue
        j = start + len(_OPEN)
        while j < n:
            ch = text[j]
            if ch == "\\" and j + 1 < n and text[j + 1] == "}":
                j += 2
                continue
            if ch == "}":
                break
            j += 1
        if j >= n:
            found.append(
                ParseIssue(
                    (start + offset, n + offset),
                    IssueKind.Unterminated,
                    "antiquotation opened with '@{' is never closed",
                )
            )
            return found
        found.append(Occurrence((start + offset, j + 1 + offset), text[start + 2 : j]))
        i = j + 1


def classify_location(text: str) -> Location:
    """Raise ``ValueError`` when ``text`` fits none of the three forms."""
    if not text:
        raise ValueError("empty location")
    if "://" in text:
        if not is_absolute_iri(text):
            raise ValueError(f"bad IRI {text!r}")
        return Iri(text)
    colon = text.find(":")
    if colon != -1 and all(colon < p for p in (text.find("/"), text.find("#")) if p != -1):
        try:
            return Curie.parse(text)
        except VocabularyError as exc:
            raise ValueError(str(exc)) from None
    if any(c.isspace() for c in text) or "}" in text:
        raise ValueError(f"bad page path {text!r}")
    return WikiPath(text)


def parse_target(text: str) -> RefTarget:
    location, sep, fragment = text.partition("#")
    if sep and not _FRAGMENT_RE.match(fragment):
        raise ValueError(f"bad fragment {fragment!r}")
    return RefTarget(classify_location(location), fragment if sep else None)


def parse_options(text: str) -> tuple[str, ...]:
    """Parse ``[a, b=c]``; raises ``ValueError`` on a bad token."""
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError("options must be enclosed in [ ]")
    inner = text[1:-1]
    if "[" in inner or "]" in inner:
        raise ValueError("nested brackets in options")
    tokens = [t for t in re.split(r"[\s,]+", inner) if t]
    for t in tokens:
        if not _OPTION_RE.match(t):
            raise ValueError(f"bad option token {t!r}")
    return tuple(tokens)


def parse(body: str, span: Span | None = None) -> Antiquotation | PrefixDecl | ParseIssue:
    text = body.strip()
    if not text:
        return ParseIssue(span, IssueKind.EmptyBody, "empty antiquotation")
    head, *tail = text.split(None, 1)
    rest = tail[0] if tail else ""
    if head == "prefix":
        return _parse_prefix(rest, span)

    parts = rest.split(None, 1)
    if not parts:
        return ParseIssue(span, IssueKind.Malformed, "expected 'TYPE REFERENCE [OPTIONS]'")
    ref_text = parts[0]
    opt_text = parts[1].strip() if len(parts) > 1 else ""
    # "[" glued to the reference: page#T[noproof]
    if "[" in ref_text and not opt_text:
        k = ref_text.index("[")
        ref_text, opt_text = ref_text[:k], ref_text[k:]
    try:
        ty = Curie.parse(head)
    except VocabularyError as exc:
        return ParseIssue(span, IssueKind.Malformed, f"type must be a CURIE: {exc}")
    try:
        target = parse_target(ref_text)
    except ValueError as exc:
        return ParseIssue(span, IssueKind.Malformed, f"bad reference: {exc}")
    options: tuple[str, ...] = ()
    if opt_text:
        if not opt_text.startswith("["):
            return ParseIssue(span, IssueKind.Malformed, f"unexpected text after reference: {opt_text!r}")
        try:
            options = parse_options(opt_text)
        except ValueError as exc:
            return ParseIssue(span, IssueKind.BadOptions, str(exc))
    return Antiquotation(ty, target, options, span)


def _parse_prefix(rest: str, span: Span | None) -> PrefixDecl | ParseIssue:
    name, sep, base = rest.partition("=")
    name, base = name.strip(), base.strip()
    if not sep or not _PREFIX_NAME_RE.match(name) or not base or any(c.isspace() for c in base):
        return ParseIssue(span, IssueKind.Malformed, "expected 'prefix NAME=IRI'")
    if not is_absolute_iri(base):
        return ParseIssue(span, IssueKind.BadIri, f"prefix base is not an absolute IRI: {base!r}")
    return PrefixDecl(name, Iri(base), span)


def parse_all(text: str, offset: int = 0) -> list[Antiquotation | PrefixDecl | ParseIssue]:
    """``scan`` followed by ``parse`` of every occurrence."""
    out: list[Antiquotation | PrefixDecl | ParseIssue] = []
    for item in scan(text, offset):
        if isinstance(item, ParseIssue):
            out.append(item)
        else:
            out.append(parse(item.body, item.span))
    return out


def parse_one(text: str) -> Antiquotation | PrefixDecl | ParseIssue:
    """Parse a single antiquotation given with or without its ``@{ }``."""
    s = text.strip()
    if s.startswith(_OPEN) and s.endswith("}"):
        s = s[2:-1]
    return parse(s)
