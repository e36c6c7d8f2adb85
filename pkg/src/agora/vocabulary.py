"""Ontology subset, CURIE expansion and IRI reference resolution."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

OMDOC = "http://omdoc.org/ontology#"
OWL = "http://www.w3.org/2002/07/owl#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDF_TYPE = RDF + "type"

BUILTIN_PREFIXES: Mapping[str, str] = MappingProxyType(
    {"oo": OMDOC, "owl": OWL, "rdfs": RDFS, "rdf": RDF}
)

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_PREFIX_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
_LOCAL_RE = re.compile(r"^[^\s}]+$")


class VocabularyError(ValueError):
    pass


class UnknownPrefix(VocabularyError):
    def __init__(self, prefix: str):
        super().__init__(f"unknown prefix {prefix!r}")
        self.prefix = prefix


class BuiltinShadowing(VocabularyError):
    def __init__(self, prefix: str):
        super().__init__(f"prefix {prefix!r} is built in and cannot be rebound")
        self.prefix = prefix


def is_absolute_iri(value: str) -> bool:
    return bool(value) and bool(_SCHEME_RE.match(value)) and not any(c.isspace() for c in value)


@dataclass(frozen=True)
class Iri:
    value: str

    def __post_init__(self) -> None:
        if not is_absolute_iri(self.value):
            raise VocabularyError(f"not an absolute IRI: {self.value!r}")

    def __str__(self) -> str:
        return self.value

    @property
    def fragment(self) -> str | None:
        _, sep, frag = self.value.partition("#")
        return frag if sep else None


@dataclass(frozen=True)
class Curie:
    prefix: str
    local: str

    def __post_init__(self) -> None:
        if not _PREFIX_RE.match(self.prefix):
            raise VocabularyError(f"bad CURIE prefix: {self.prefix!r}")
        if not _LOCAL_RE.match(self.local):
            raise VocabularyError(f"bad CURIE local part: {self.local!r}")

    @classmethod
    def parse(cls, text: str) -> Curie:
        prefix, sep, local = text.partition(":")
        if not sep:
            raise VocabularyError(f"not a CURIE: {text!r}")
        return cls(prefix, local)

    def __str__(self) -> str:
        return f"{self.prefix}:{self.local}"


@dataclass(frozen=True)
class PrefixEnv:
    """Prefix bindings; the built-ins are always present and cannot be shadowed."""

    bindings: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        merged = dict(BUILTIN_PREFIXES)
        for name, base in self.bindings.items():
            if name in BUILTIN_PREFIXES and base != BUILTIN_PREFIXES[name]:
                raise BuiltinShadowing(name)
            if not _PREFIX_RE.match(name):
                raise VocabularyError(f"bad prefix name: {name!r}")
            if not is_absolute_iri(base):
                raise VocabularyError(f"prefix {name!r} bound to non-absolute IRI {base!r}")
            merged[name] = base
        object.__setattr__(self, "bindings", MappingProxyType(merged))

    def bind(self, name: str, base: str) -> PrefixEnv:
        return PrefixEnv({**self.bindings, name: base})

    def __contains__(self, name: str) -> bool:
        return name in self.bindings


BUILTINS = PrefixEnv()


def expand_curie(c: Curie, env: PrefixEnv = BUILTINS) -> Iri:
    """Concatenate the bound base and the local part, verbatim."""
    try:
        base = env.bindings[c.prefix]
    except KeyError:
        raise UnknownPrefix(c.prefix) from None
    return Iri(base + c.local)


def normalize_prefix_base(base: str) -> str:
    """Append ``/`` to a declared base ending in a bare path segment.

    Bases ending in ``/``, ``#``, ``:``, ``?``, ``=`` or carrying a query
    or fragment are left alone.
    """
    if base.endswith(("/", "#", ":", "?", "=", "&")):
        return base
    if "#" in base or "?" in base or "://" not in base:
        return base
    return base + "/"


class OmdocType(enum.Enum):
    Theory = "Theory"
    Symbol = "Symbol"
    Definition = "Definition"
    Axiom = "Axiom"
    Assertion = "Assertion"
    Theorem = "Theorem"
    Lemma = "Lemma"
    Corollary = "Corollary"
    Proposition = "Proposition"
    Example = "Example"
    Proof = "Proof"

    @property
    def parent(self) -> OmdocType | None:
        return _PARENT.get(self)

    def __str__(self) -> str:
        return self.value


_PARENT = {
    OmdocType.Theorem: OmdocType.Assertion,
    OmdocType.Lemma: OmdocType.Assertion,
    OmdocType.Corollary: OmdocType.Assertion,
    OmdocType.Proposition: OmdocType.Assertion,
}


def subsumes(general: OmdocType, specific: OmdocType) -> bool:
    t: OmdocType | None = specific
    while t is not None:
        if t is general:
            return True
        t = t.parent
    return False


def ancestors(t: OmdocType) -> list[OmdocType]:
    """``t`` followed by its supertypes, most specific first."""
    out = []
    cur: OmdocType | None = t
    while cur is not None:
        out.append(cur)
        cur = cur.parent
    return out


def type_iri(t: OmdocType, env: PrefixEnv = BUILTINS) -> Iri:
    return expand_curie(Curie("oo", t.value), env)


def parse_type_iri(i: Iri | str) -> OmdocType | None:
    value = str(i)
    if not value.startswith(OMDOC):
        return None
    try:
        return OmdocType(value[len(OMDOC):])
    except ValueError:
        return None


class RelationType(enum.Enum):
    homeTheoryOf = "homeTheoryOf"
    hasDefinition = "hasDefinition"
    proves = "proves"
    formalizes = "formalizes"
    verbalizes = "verbalizes"
    sameAs = "sameAs"
    seeAlso = "seeAlso"

    @property
    def iri(self) -> Iri:
        if self is RelationType.sameAs:
            return Iri(OWL + self.value)
        if self is RelationType.seeAlso:
            return Iri(RDFS + self.value)
        return Iri(OMDOC + self.value)

    def __str__(self) -> str:
        return self.value


_RELATIONS_BY_IRI = {r.iri.value: r for r in RelationType}


def parse_relation_iri(i: Iri | str) -> RelationType | None:
    return _RELATIONS_BY_IRI.get(str(i))


# RFC 3986 section 5.2 reference resolution. urllib.parse.urljoin is
# non-strict ("http:g") and ignores schemes outside its whitelist.
_URI_RE = re.compile(r"^(?:([^:/?#]+):)?(?://([^/?#]*))?([^?#]*)(?:\?([^#]*))?(?:#(.*))?$", re.S)


def _split(ref: str) -> tuple[str | None, str | None, str, str | None, str | None]:
    m = _URI_RE.match(ref)
    assert m is not None
    return m.group(1), m.group(2), m.group(3), m.group(4), m.group(5)


def remove_dot_segments(path: str) -> str:
    out: list[str] = []
    while path:
        if path.startswith("../"):
            path = path[3:]
        elif path.startswith("./"):
            path = path[2:]
        elif path.startswith("/./"):
            path = path[2:]
        elif path == "/.":
            path = "/"
        elif path.startswith("/../"):
            path = path[3:]
            if out:
                out.pop()
        elif path == "/..":
            path = "/"
            if out:
                out.pop()
        elif path in (".", ".."):
            path = ""
        else:
            start = 1 if path.startswith("/") else 0
            end = path.find("/", start)
            if end == -1:
                end = len(path)
            out.append(path[:end])
            path = path[end:]
    return "".join(out)


def resolve_reference(base: str, ref: str) -> str:
    """Resolve ``ref`` against the absolute ``base`` (strict RFC 3986)."""
    bs, ba, bp, bq, _ = _split(base)
    rs, ra, rp, rq, rf = _split(ref)
    if rs is not None:
        ts, ta, tp, tq = rs, ra, remove_dot_segments(rp), rq
    else:
        if ra is not None:
            ta, tp, tq = ra, remove_dot_segments(rp), rq
        else:
            if rp == "":
                tp = bp
                tq = rq if rq is not None else bq
            else:
                if rp.startswith("/"):
                    tp = remove_dot_segments(rp)
                else:
                    if ba is not None and bp == "":
                        merged = "/" + rp
                    else:
                        merged = bp[: bp.rfind("/") + 1] + rp
                    tp = remove_dot_segments(merged)
                tq = rq
            ta = ba
        ts = bs
    out = ""
    if ts is not None:
        out += ts + ":"
    if ta is not None:
        out += "//" + ta
    out += tp
    if tq is not None:
        out += "?" + tq
    if rf is not None:
        out += "#" + rf
    return out


def strip_fragment(iri: str) -> str:
    return iri.split("#", 1)[0]
