"""Hypothesis strategies for antiquotations, Coqdoc-like HTML and link soup."""

from __future__ import annotations

import html

from hypothesis import strategies as st

from agora.antiquotation import Antiquotation, RefTarget, WikiPath
from agora.vocabulary import Curie, Iri, OmdocType

_ALNUM = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"

_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _ident(first: str, rest: str, max_rest: int):
    return st.builds(lambda a, b: a + b, st.sampled_from(first), st.text(alphabet=rest, max_size=max_rest))


prefix_names = _ident(_LETTERS, _ALNUM + "_", 6)
local_parts = st.text(alphabet=_ALNUM + "_-.", min_size=1, max_size=12)
path_segments = st.text(alphabet=_ALNUM + "_-.", min_size=1, max_size=8)
fragments = st.text(alphabet=_ALNUM + "_-.:/", min_size=1, max_size=10)
option_tokens = st.builds(
    lambda k, v: k if v is None else f"{k}={v}",
    _ident(_LETTERS + "_", _ALNUM + "_-", 6),
    st.none() | st.text(alphabet=_ALNUM + "_.:/-", min_size=1, max_size=6),
)

curies = st.builds(Curie, prefix_names, local_parts)
wiki_paths = st.builds(lambda segs: WikiPath("/".join(segs)), st.lists(path_segments, min_size=1, max_size=3))
iris = st.builds(
    lambda host, segs: Iri(f"http://{host}.example/" + "/".join(segs)),
    st.text(alphabet="abcdefghij", min_size=1, max_size=6),
    st.lists(path_segments, max_size=3),
)
locations = st.one_of(curies, wiki_paths, iris)


@st.composite
def antiquotations(draw) -> Antiquotation:
    loc = draw(locations)
    frag = draw(st.none() | fragments)
    # a Curie-looking wiki path would be reclassified; those never get generated
    # because path segments carry no ':'
    return Antiquotation(
        draw(curies),
        RefTarget(loc, frag),
        tuple(draw(st.lists(option_tokens, max_size=3))),
    )


# --- Coqdoc-style HTML -------------------------------------------------------

KEYWORDS = ["Lemma", "Theorem", "Definition", "Corollary", "Require", "Import", "Proof", "Qed",
            "Defined", "Admitted", "Abort", "forall", "Fixpoint", "Example", "Axiom"]
TYPE_TOKENS = ["lemma", "definition", "thm", "axiom", "corollary", "var", "binder", "keyword",
               "notation", "gadget", "inductive"]
TEXT_BITS = [" ", ". ", ".", "..", " : ", ", ", "\n", "&nbsp;", "(", ")", " := ", "x", "1.5", " -&gt; ", ".\n"]


def _span(ty: str, text: str, attr: str) -> str:
    return f'<span class="id" {attr}="{ty}">{html.escape(text)}</span>'


@st.composite
def coq_tokens(draw) -> str:
    attr = draw(st.sampled_from(["type", "title"]))
    kind = draw(st.integers(0, 5))
    if kind == 0:
        return _span("keyword", draw(st.sampled_from(KEYWORDS)), attr)
    if kind == 1:
        name = draw(st.sampled_from(["poly_id", "C", "plus_comm", "x1", "n_0", "T14"]))
        inner = _span(draw(st.sampled_from(TYPE_TOKENS)), name, attr)
        return f'<a name="{name}">{inner}</a>'
    if kind == 2:
        return _span(draw(st.sampled_from(TYPE_TOKENS)), draw(st.sampled_from(["n", "a", "nat", "+"])), attr)
    if kind == 3:
        return '<a class="idref" href="Coq.Init.html#nat">' + _span("inductive", "nat", attr) + "</a>"
    if kind == 4:
        return "<br/>"
    return draw(st.sampled_from(TEXT_BITS))


@st.composite
def coq_sentences(draw) -> str:
    """A keyword-led command ending with a terminator, or a bare proof step."""
    attr = draw(st.sampled_from(["type", "title"]))
    head = draw(st.sampled_from(KEYWORDS))
    body = "".join(draw(st.lists(coq_tokens(), max_size=6)))
    end = draw(st.sampled_from([".", ". ", ".<br/>\n", ".\n"]))
    return _span("keyword", head, attr) + " " + body + end


coq_documents = st.builds(
    lambda parts, wrap: f'<div class="code">{"".join(parts)}</div>' if wrap else "".join(parts),
    st.lists(st.one_of(coq_sentences(), coq_tokens()), max_size=14),
    st.booleans(),
)


@st.composite
def theorem_proof_documents(draw) -> str:
    """Structured scripts: statements optionally followed by proofs."""
    out = []
    for i in range(draw(st.integers(0, 5))):
        kw, tok = draw(st.sampled_from([("Lemma", "lemma"), ("Theorem", "thm"), ("Definition", "definition"),
                                         ("Example", "example"), ("Require", "keyword")]))
        name = f"n{i}"
        out.append(f'<span class="id" title="keyword">{kw}</span> <a name="{name}">'
                   f'<span class="id" title="{tok}">{name}</span></a> : True.<br/>\n')
        if draw(st.booleans()):
            end = draw(st.sampled_from(["Qed", "Defined", "Admitted", "Abort"]))
            out.append('<span class="id" title="keyword">Proof</span>.<br/>\n'
                       '&nbsp;&nbsp;<span class="id" title="tactic">trivial</span>.<br/>\n'
                       f'<span class="id" title="keyword">{end}</span>.<br/>\n')
    return "".join(out)


# --- link soup -----------------------------------------------------------------

ref_pieces = st.sampled_from(["g", ".", "..", "a", "b;x", "%41", "x=1", ""])
relative_refs = st.builds(
    lambda lead, segs, q, f: lead + "/".join(segs) + q + f,
    st.sampled_from(["", "/", "./", "../", "//h.example/", "../../"]),
    st.lists(ref_pieces, max_size=4),
    st.sampled_from(["", "?y", "?a=b&c=d"]),
    st.sampled_from(["", "#s", "#T14"]),
)
any_refs = relative_refs | st.sampled_from(
    ["http://dbpedia.org/resource/X", "mailto:x@example.org", "g:h", "#frag", "", "urn:isbn:1"]
)
bases = st.sampled_from([
    "http://a/b/c/d;p?q",
    "http://mizar.example/html/binom.html",
    "https://h.example/",
    "file:///srv/site/page.html",
    "http://x.example/a/b/",
])


@st.composite
def link_fragments(draw) -> str:
    parts = []
    for _ in range(draw(st.integers(1, 5))):
        ref = html.escape(draw(any_refs))
        tag = draw(st.sampled_from(["a href", "img src", "link href", "script src"]))
        name, attr = tag.split()
        if name == "img":
            parts.append(f'<img {attr}="{ref}" alt="x"/>')
        elif name == "link":
            parts.append(f'<link rel="stylesheet" {attr}="{ref}">')
        else:
            parts.append(f'<{name} {attr}="{ref}">t</{name}>')
    return f'<div about="#D" typeof="oo:Definition">{" ".join(parts)}</div>'


# --- typed corpora for subsumption ---------------------------------------------

omdoc_types = st.sampled_from(list(OmdocType))


@st.composite
def typed_pages(draw) -> tuple[str, list[tuple[str, OmdocType]]]:
    entries = draw(st.lists(st.tuples(st.sampled_from(["A", "B", "C", "T14", "D22"]), omdoc_types),
                            min_size=1, max_size=6))
    body = "".join(f'<div about="#{i}" typeof="oo:{t.value}"><a href="x.html#{i}">{i}</a></div>\n'
                   for i, t in entries)
    return f"<html><body>{body}</body></html>", entries
