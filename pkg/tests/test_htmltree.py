import pytest

from agora.htmltree import Element, Text, parse_fragment, parse_html, serialize_nodes

SAMPLES = [
    "",
    "plain text only",
    '<!DOCTYPE html>\n<html><head><meta charset="utf-8"></head><body><p>x</p></body></html>',
    "<span class='id' type=\"lemma\">poly_id</span>\n<a name=poly_id>x</a>",
    "<div><br/><br><img src=a.png alt=''/></div>",
    "<p>unclosed <b>bold<p>next",
    "stray </span> end tag &amp; &nbsp; &#160; entity",
    "<!-- comment --><?pi x?><![CDATA[x]]>",
    "<script>if (a < b) { x = '</p>'; }</script>",
    "<DIV CLASS=Upper>Mixed</div>",
    "a\r\nb\rc\n",
]


@pytest.mark.parametrize("src", SAMPLES)
def test_lossless_round_trip(src):
    assert parse_html(src).serialize() == src


def test_text_is_unescaped():
    doc = parse_html("<span>a &lt; b&nbsp;c</span>")
    assert doc.text_content() == "a < b\xa0c"


def test_set_attribute_edits_start_tag():
    (el,) = parse_fragment("<span class='id'   type=lemma>x</span>")
    el.set("about", "#poly_id")
    el.set("class", "command")
    assert el.serialize() == "<span class='command'   type=lemma about=\"#poly_id\">x</span>"
    assert el.get("about") == "#poly_id"


def test_set_on_self_closing():
    (el,) = parse_fragment('<span rel="oo:proves"/>')
    el.set("resource", "#T")
    assert el.serialize() == '<span rel="oo:proves" resource="#T"/>'


def test_new_element_escapes_attributes():
    el = Element.new("div", {"data-ref": 'a"b'}, [Text("x")])
    assert el.serialize() == '<div data-ref="a&quot;b">x</div>'
    assert Element.new("br").serialize() == "<br>"


def test_contains_block():
    (span,) = parse_fragment("<span><b>x</b></span>")
    (div,) = parse_fragment("<span><b><br/></b><div>y</div></span>")
    assert not span.contains_block()
    assert div.contains_block()


def test_serialize_nodes_round_trip():
    src = 'a<span about="#x">b<i>c</i></span>d'
    assert serialize_nodes(parse_fragment(src)) == src


def test_clone_is_deep():
    doc = parse_html('<div about="#a"><span>x</span></div>')
    copy = doc.clone()
    next(copy.iter()).set("about", "#b")
    assert doc.serialize() == '<div about="#a"><span>x</span></div>'
