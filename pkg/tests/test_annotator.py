import re

import pytest

from agora.annotator import (
    DEFAULT_TYPE_MAPPING,
    TypeMapping,
    annotate,
    commands,
    export_types,
    group_commands,
    identify_subjects,
    wrap_proofs,
)
from agora.harvester import harvest
from agora.htmltree import parse_html
from agora.vocabulary import OmdocType, RelationType, subsumes
from conftest import read_fixture

BASE = "http://agora.example/site/Page.html"


def kw(word, attr="title"):
    return f'<span class="id" {attr}="keyword">{word}</span>'


def name(n, ty="lemma"):
    return f'<a name="{n}"><span class="id" title="{ty}">{n}</span></a>'


def test_poly_id_grouped_typed_and_named():
    src = read_fixture("coq_poly_id.html")
    doc, warnings = annotate(parse_html(src))
    (cmd,) = commands(doc)
    assert cmd.get("typeof") == "oo:Lemma"
    assert cmd.get("about") == "#poly_id"
    assert cmd.tag == "span"  # no block content inside
    assert doc.text_content() == parse_html(src).text_content()
    assert warnings == []


def test_no_keyword_spans_is_identity():
    src = '<p>just <span class="id" title="var">x</span> text.</p>'
    assert group_commands(parse_html(src)).serialize() == src
    doc, warnings = annotate(parse_html(src))
    assert doc.serialize() == src and warnings == []


def _terminators(text):
    # oracle: independent re-tokenization of the visible text
    return [m.end() for m in re.finditer(r"(?<!\.)\.(?!\.)(?=\s|$)", text)]


def test_back_to_back_commands_split_at_first_terminator():
    src = (kw("Definition") + " " + name("a", "definition") + " := 1.. 2. "
           + kw("Lemma") + " " + name("b") + " : a = a.")
    doc = group_commands(parse_html(src))
    cmds = commands(doc)
    assert len(cmds) == 2
    assert cmds[0].text_content().strip() == "Definition a := 1.. 2."
    assert cmds[1].text_content() == "Lemma b : a = a."
    full = parse_html(src).text_content()
    assert len(cmds) == len(_terminators(full))
    assert len(cmds[0].text_content()) == _terminators(full)[0]


def test_unterminated_trailing_command_extends_to_end():
    src = kw("Lemma") + " " + name("x") + " : True"
    (cmd,) = commands(group_commands(parse_html(src)))
    assert cmd.text_content() == "Lemma x : True"


def test_export_types():
    src = (kw("Require") + " " + kw("Import") + " Arith. "
           + kw("Theorem") + " " + name("t", "thm") + " : True. "
           + kw("Gadget") + " " + name("g", "gadget") + ".")
    warnings = []
    doc = export_types(group_commands(parse_html(src)), TypeMapping(), warnings)
    c0, c1, c2 = commands(doc)
    assert not c0.has("typeof")
    assert c1.get("typeof") == "oo:Theorem"
    assert not c2.has("typeof")
    assert [w.kind for w in warnings] == ["UnknownType"]


def test_type_mapping_case_insensitive_and_overridable():
    m = TypeMapping({"gadget": OmdocType.Example})
    assert m.get("LEMMA") is OmdocType.Lemma
    assert m.get("Gadget") is OmdocType.Example
    for token, t in DEFAULT_TYPE_MAPPING.items():
        assert TypeMapping().get(token) is t


def test_source_type_via_type_attribute():
    src = kw("Lemma", "type") + " " + '<a name="p"><span class="id" type="lemma">p</span></a>.'
    doc, _ = annotate(parse_html(src))
    assert commands(doc)[0].get("typeof") == "oo:Lemma"


def test_missing_name_and_first_anchor_wins():
    warnings = []
    src = kw("Lemma") + ' <span class="id" title="lemma">anon</span> : True. ' \
        + kw("Lemma") + " " + name("first") + " " + name("second") + "."
    doc = identify_subjects(export_types(group_commands(parse_html(src))), warnings)
    c0, c1 = commands(doc)
    assert c0.get("typeof") == "oo:Lemma" and not c0.has("about")
    assert c1.get("about") == "#first"
    assert [w.kind for w in warnings] == ["MissingName"]


def test_duplicate_subject_warns():
    src = (kw("Lemma") + " " + name("x") + ". ") * 2
    _, warnings = annotate(parse_html(src))
    assert "DuplicateSubject" in [w.kind for w in warnings]


def proof(*steps, end="Qed"):
    body = "".join(f' <span class="id" title="tactic">{s}</span>.' for s in steps)
    return kw("Proof") + "." + body + " " + kw(end) + ". "


def test_proof_wrapped_with_proves_link():
    src = kw("Lemma") + " " + name("poly_id") + " : True. " + proof("trivial")
    doc, warnings = annotate(parse_html(src))
    out = doc.serialize()
    assert '<span typeof="oo:Proof"><span rel="oo:proves" resource="#poly_id"></span>' in out
    assert warnings == []


def _keyword_scan(src):
    """Oracle: linear scan over the keyword sequence counting closed proof regions."""
    words = re.findall(r'title="keyword">(\w+)<', src)
    regions, open_ = 0, False
    for w in words:
        if w == "Proof":
            open_ = True
        elif w in ("Qed", "Defined", "Admitted", "Abort") and open_:
            regions, open_ = regions + 1, False
    return regions


@pytest.mark.parametrize("end", ["Qed", "Defined", "Admitted", "Abort"])
def test_proof_terminators(end):
    src = kw("Theorem") + " " + name("t", "thm") + " : True. " + proof("auto", end=end)
    doc, _ = annotate(parse_html(src))
    proofs = [e for e in doc.iter() if e.get("typeof") == "oo:Proof"]
    assert len(proofs) == _keyword_scan(src) == 1
    assert proofs[0].text_content().strip().endswith(f"{end}.")


def test_proof_after_definition_has_no_proves():
    src = kw("Definition") + " " + name("d", "definition") + " : nat. " + proof("exact 0", end="Defined")
    doc, warnings = annotate(parse_html(src))
    (p,) = [e for e in doc.iter() if e.get("typeof") == "oo:Proof"]
    assert not any(e.has("rel") for e in p.iter())
    assert [w.kind for w in warnings] == ["NoStatement"]


def test_unclosed_proof():
    src = kw("Lemma") + " " + name("u") + " : True. " + kw("Proof") + ". " + '<span class="id" title="tactic">auto</span>.'
    doc, warnings = annotate(parse_html(src))
    assert "UnclosedProof" in [w.kind for w in warnings]
    assert any(e.get("typeof") == "oo:Proof" for e in doc.iter())


def test_no_proof_keyword_leaves_wrap_identity():
    src = kw("Lemma") + " " + name("x") + " : True."
    typed = identify_subjects(export_types(group_commands(parse_html(src))))
    assert wrap_proofs(typed).serialize() == typed.serialize()


def test_block_content_gets_div_wrapper():
    src = ('<div class="code">' + kw("Lemma") + " " + name("x") + " :<br/>\n<table><tr><td>True</td></tr></table>. "
           + kw("Proof") + ". <table><tr><td>auto</td></tr></table>. " + kw("Qed") + ".</div>")
    doc, _ = annotate(parse_html(src))
    stmt, start, end = commands(doc)
    assert stmt.tag == "div" and start.tag == "span"
    (p,) = [e for e in doc.iter() if e.get("typeof") == "oo:Proof"]
    assert p.tag == "div"


def test_three_lemma_fixture():
    src = read_fixture("coq_three_lemmas.html")
    # hand count of the fixture: Lemma plus_0_r, Theorem plus_comm, Corollary plus_n_0, each with a proof
    expected_statements = {"plus_0_r", "plus_comm", "plus_n_0"}
    doc, warnings = annotate(parse_html(src))
    assert warnings == []
    frags = harvest(doc, BASE)
    assertions = [f for f in frags if f.ty is not OmdocType.Proof]
    proofs = [f for f in frags if f.ty is OmdocType.Proof]
    assert len(assertions) == 3 and len(proofs) == 3
    assert all(subsumes(OmdocType.Assertion, f.ty) for f in assertions)
    assert {f.fragment_id for f in assertions} == expected_statements
    proved = [o.fragment for p in proofs for r, o in p.relations if r is RelationType.proves]
    assert proved == ["plus_0_r", "plus_comm", "plus_n_0"]
    assert doc.text_content() == parse_html(src).text_content()


def test_empty_doc():
    doc, warnings = annotate(parse_html(""))
    assert doc.serialize() == "" and warnings == []


def test_annotate_does_not_mutate_input():
    src = read_fixture("coq_three_lemmas.html")
    original = parse_html(src)
    annotate(original)
    assert original.serialize() == src
