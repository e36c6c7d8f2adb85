"""Randomized properties. COUNTS tracks executed cases per property."""

from __future__ import annotations

from collections import Counter

from hypothesis import given
from hypothesis import strategies as st

import strategies as S
from agora.annotator import annotate, typed_wrappers
from agora.antiquotation import Antiquotation, RefTarget, WikiPath, parse_one, scan
from agora.harvester import harvest
from agora.htmltree import parse_fragment, parse_html
from agora.resolver import Corpus, Resolved, resolve, rewrite_links
from agora.vocabulary import Curie, ancestors

COUNTS: Counter[str] = Counter()
BASE = "http://agora.example/site/Page.html"


@given(S.antiquotations())
def test_antiquotation_round_trip(a: Antiquotation):
    COUNTS["round_trip"] += 1
    again = parse_one(a.to_source())
    assert again == a
    # and through the scanner, with surrounding prose
    text = f"see {a.to_source()} here"
    (occ,) = scan(text)
    assert text[occ.span[0]:occ.span[1]] == a.to_source()


@given(st.text(alphabet="ab@{}\\ x", max_size=40))
def test_scan_spans_increase(text: str):
    prev = -1
    for item in scan(text):
        assert item.span is not None
        start, end = item.span
        assert prev <= start < end <= len(text)
        prev = end


@given(S.coq_documents)
def test_annotator_preserves_text(source: str):
    COUNTS["text_preservation"] += 1
    before = parse_html(source)
    after, _ = annotate(parse_html(source))
    assert after.text_content() == before.text_content()
    # re-parsing the output sees the same text as well
    assert parse_html(after.serialize()).text_content() == before.text_content()


def _rdfa_attrs(doc) -> Counter:
    return Counter((a, el.get(a)) for el in doc.iter() for a in ("about", "typeof") if el.has(a))


@given(S.coq_documents | S.theorem_proof_documents())
def test_annotator_idempotent(source: str):
    COUNTS["idempotence"] += 1
    once, _ = annotate(parse_html(source))
    twice, _ = annotate(parse_html(once.serialize()))
    assert _rdfa_attrs(twice) == _rdfa_attrs(once)
    assert twice.serialize() == once.serialize()


@given(S.coq_documents | S.theorem_proof_documents())
def test_harvest_annotate_fragment_count(source: str):
    COUNTS["harvest_annotate"] += 1
    doc, _ = annotate(parse_html(source))
    wrappers = list(typed_wrappers(doc))
    frags = harvest(doc, BASE)
    assert len(frags) == len(wrappers)
    assert [f.element for f in frags] == wrappers


@given(S.link_fragments(), S.bases)
def test_rewrite_links_idempotent(fragment: str, base: str):
    COUNTS["rewrite_idempotence"] += 1
    once = rewrite_links(fragment, base)
    assert rewrite_links(once, base) == once
    # absolute references survive untouched and nothing else moves
    for el_in, el_out in zip(_elements(fragment), _elements(once)):
        for name in ("href", "src"):
            v = el_in.get(name)
            if v is not None and ":" in v.split("/")[0]:
                assert el_out.get(name) == v


def _elements(fragment: str):
    out = []
    for n in parse_fragment(fragment):
        if hasattr(n, "iter"):
            out.extend(n.iter())
    return out


@given(S.typed_pages(), st.sampled_from(["A", "B", "C", "T14", "D22", "Z"]), S.omdoc_types)
def test_resolve_subsumption_monotone(page, frag_id, wanted):
    COUNTS["subsumption"] += 1
    source, entries = page
    corpus = Corpus(local={"Page": (parse_html(source), BASE)})
    a = Antiquotation(Curie("oo", wanted.value), RefTarget(WikiPath("Page"), frag_id))
    result = resolve(a, c=corpus)
    if not isinstance(result, Resolved):
        return
    unique = sum(1 for i, _ in entries if i == frag_id) == 1
    for general in ancestors(wanted):
        b = Antiquotation(Curie("oo", general.value), a.target)
        widened = resolve(b, c=corpus)
        assert isinstance(widened, Resolved)
        # with duplicate ids a wider type may pick an earlier duplicate
        if unique:
            assert widened == result


PROPERTIES = {
    "round_trip": test_antiquotation_round_trip,
    "text_preservation": test_annotator_preserves_text,
    "idempotence": test_annotator_idempotent,
    "harvest_annotate": test_harvest_annotate_fragment_count,
    "rewrite_idempotence": test_rewrite_links_idempotent,
    "subsumption": test_resolve_subsumption_monotone,
}
