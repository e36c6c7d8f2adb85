"""Antiquotation-driven transclusion of annotated formal mathematics."""

from agora.annotator import TypeMapping, annotate
from agora.antiquotation import Antiquotation, PrefixDecl, parse, scan
from agora.harvester import AnnotatedFragment, Triple, find_fragment, harvest, triples
from agora.htmltree import HtmlDoc, parse_html
from agora.narrative import Mode, NarrativeDoc, parse_narrative, render_narrative
from agora.resolver import Corpus, NotFound, Resolved, render_not_found, resolve, rewrite_links
from agora.vocabulary import Curie, Iri, OmdocType, PrefixEnv, RelationType, expand_curie, subsumes

__version__ = "0.1.0"

__all__ = [
    "AnnotatedFragment",
    "Antiquotation",
    "Corpus",
    "Curie",
    "HtmlDoc",
    "Iri",
    "Mode",
    "NarrativeDoc",
    "NotFound",
    "OmdocType",
    "PrefixDecl",
    "PrefixEnv",
    "RelationType",
    "Resolved",
    "Triple",
    "TypeMapping",
    "annotate",
    "expand_curie",
    "find_fragment",
    "harvest",
    "parse",
    "parse_html",
    "parse_narrative",
    "render_narrative",
    "render_not_found",
    "resolve",
    "rewrite_links",
    "scan",
    "subsumes",
    "triples",
]
