"""Harvest addressable fragments and triples from HTML+RDFa.

Only ``@about``, ``@typeof``, ``@rel`` and ``@resource`` are interpreted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Union

from agora.htmltree import Element, HtmlDoc, iter_with_ancestors
from agora.vocabulary import (
    BUILTINS,
    RDF_TYPE,
    Curie,
    Iri,
    OmdocType,
    PrefixEnv,
    RelationType,
    UnknownPrefix,
    VocabularyError,
    expand_curie,
    is_absolute_iri,
    parse_relation_iri,
    parse_type_iri,
    resolve_reference,
    strip_fragment,
    subsumes,
    type_iri,
)

log = logging.getLogger(__name__)

FragmentType = Union[OmdocType, Iri]
Predicate = Union[RelationType, Iri]


@dataclass(eq=False)
class AnnotatedFragment:
    subject: Iri
    ty: FragmentType
    html: str
    relations: list[tuple[Predicate, Iri]] = field(default_factory=list)
    source_order: int = 0
    element: Element | None = field(default=None, repr=False)

    @property
    def fragment_id(self) -> str | None:
        return self.subject.fragment

    @property
    def type_name(self) -> str:
        return self.ty.value if isinstance(self.ty, OmdocType) else str(self.ty)

    @property
    def type_iri(self) -> Iri:
        return type_iri(self.ty) if isinstance(self.ty, OmdocType) else self.ty


@dataclass(frozen=True)
class Triple:
    s: Iri
    p: Iri
    o: Iri

    def ntriples(self) -> str:
        return f"<{self.s}> <{self.p}> <{self.o}> ."

    def tsv(self) -> str:
        return f"{self.s}\t{self.p}\t{self.o}"


def _expand_term(token: str, env: PrefixEnv, warnings: list[str] | None, what: str) -> Iri | None:
    """Expand a CURIE or absolute IRI; unbound prefixes fall back to the raw token."""
    if is_absolute_iri(token) and "://" in token:
        return Iri(token)
    try:
        return expand_curie(Curie.parse(token), env)
    except UnknownPrefix as exc:
        _note(warnings, f"{what} {token!r}: {exc}; kept as a raw IRI")
        return Iri(token) if is_absolute_iri(token) else None
    except VocabularyError:
        _note(warnings, f"{what} {token!r} is not a CURIE or absolute IRI; ignored")
        return None


def _note(warnings: list[str] | None, message: str) -> None:
    log.debug(message)
    if warnings is not None:
        warnings.append(message)


def _fragment_type(typeof: str, env: PrefixEnv, warnings: list[str] | None) -> FragmentType | None:
    raw: Iri | None = None
    for token in typeof.split():
        iri = _expand_term(token, env, warnings, "typeof")
        if iri is None:
            continue
        t = parse_type_iri(iri)
        if t is not None:
            return t
        raw = raw or iri
    return raw


def page_base(doc: HtmlDoc, base: str) -> str:
    """The document base: ``<base href>`` when present, resolved against ``base``."""
    el = doc.find_first("base")
    if el is not None and el.get("href"):
        return resolve_reference(base, el.get("href") or "")
    return base


def harvest(
    doc: HtmlDoc,
    base: Iri | str,
    env: PrefixEnv = BUILTINS,
    warnings: list[str] | None = None,
) -> list[AnnotatedFragment]:
    """Every element with ``@about`` or ``@typeof`` becomes a fragment.

    Nested fragments are reported independently; the outer fragment's html
    still contains the inner one. ``@rel``/``@resource`` pairs attach to
    the element itself when it is a fragment, else to the nearest fragment
    ancestor. A ``typeof`` without ``about`` gets the subject
    ``<base>#_gen<N>`` where N is the fragment's source order.
    """
    base_s = page_base(doc, str(base))
    doc_iri = strip_fragment(base_s)
    frags: list[AnnotatedFragment] = []
    by_element: dict[int, AnnotatedFragment] = {}

    for el, ancestors in iter_with_ancestors(doc.root):
        if el.has("about") or el.has("typeof"):
            order = len(frags)
            if el.has("about"):
                subject = Iri(resolve_reference(base_s, el.get("about") or ""))
            else:
                subject = Iri(f"{doc_iri}#_gen{order}")
            ty = _fragment_type(el.get("typeof") or "", env, warnings) if el.has("typeof") else None
            if ty is None:
                # about without a usable typeof: untyped, addressable by raw IRI
                ty = Iri("http://www.w3.org/2000/01/rdf-schema#Resource")
            frag = AnnotatedFragment(subject, ty, el.serialize(), [], order, el)
            frags.append(frag)
            by_element[id(el)] = frag
        if el.has("rel") and el.has("resource"):
            owner = by_element.get(id(el))
            if owner is None:
                owner = next((by_element[id(a)] for a in reversed(ancestors) if id(a) in by_element), None)
            if owner is None:
                _note(warnings, f"rel {el.get('rel')!r} outside any annotated fragment; ignored")
                continue
            obj = Iri(resolve_reference(base_s, el.get("resource") or ""))
            for token in (el.get("rel") or "").split():
                pred = _expand_term(token, env, warnings, "rel")
                if pred is None:
                    continue
                owner.relations.append((parse_relation_iri(pred) or pred, obj))
    return frags


def predicate_iri(p: Predicate) -> Iri:
    return p.iri if isinstance(p, RelationType) else p


def triples(frags: Iterable[AnnotatedFragment]) -> list[Triple]:
    out: list[Triple] = []
    rdf_type = Iri(RDF_TYPE)
    for f in sorted(frags, key=lambda f: f.source_order):
        out.append(Triple(f.subject, rdf_type, f.type_iri))
        for p, o in f.relations:
            out.append(Triple(f.subject, predicate_iri(p), o))
    return out


@dataclass(frozen=True)
class NotFound:
    fragment_id: str


@dataclass(frozen=True)
class TypeMismatch:
    fragment_id: str
    actual: FragmentType


def find_fragment(
    frags: Iterable[AnnotatedFragment], fragment_id: str, wanted: OmdocType
) -> AnnotatedFragment | NotFound | TypeMismatch:
    matches = [f for f in frags if f.fragment_id == fragment_id]
    if not matches:
        return NotFound(fragment_id)
    for f in sorted(matches, key=lambda f: f.source_order):
        if isinstance(f.ty, OmdocType) and subsumes(wanted, f.ty):
            return f
    return TypeMismatch(fragment_id, matches[0].ty)


def duplicate_subjects(frags: Iterable[AnnotatedFragment]) -> list[Iri]:
    seen: dict[str, int] = {}
    for f in frags:
        seen[f.subject.value] = seen.get(f.subject.value, 0) + 1
    return [Iri(s) for s, n in seen.items() if n > 1]
