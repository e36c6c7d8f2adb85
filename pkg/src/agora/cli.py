"""Command line driver.

Exit codes: 0 success, 1 unresolved references, 2 usage or config error,
3 I/O error. Reports go to stdout, warnings to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from agora.annotator import TypeMapping, annotate
from agora.antiquotation import Antiquotation, ParseIssue, PrefixDecl, WikiPath, classify_location, parse_one
from agora.harvester import harvest, triples
from agora.htmltree import parse_html
from agora.narrative import Mode
from agora.project import ConfigError, Project, Report, load_config
from agora.resolver import FetchError, Resolved, render_result, resolve
from agora.vocabulary import Curie, PrefixEnv, UnknownPrefix, expand_curie

EXIT_OK = 0
EXIT_UNRESOLVED = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _common(defaults: bool) -> argparse.ArgumentParser:
    d = {} if defaults else {"default": argparse.SUPPRESS}
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="project config file (default: ./agora.conf)", **d)
    p.add_argument("--refresh", action="store_true", help="bypass the fetch cache", **d)
    p.add_argument("--mode", choices=[m.value for m in Mode], help="antiquotation output mode", **d)
    p.add_argument("--allow-unresolved", action="store_true", help="exit 0 despite unresolved references", **d)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agora", description="Annotate formal HTML and render narratives with antiquotations.",
        parents=[_common(True)],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(False)

    sub.add_parser("build", parents=[common], help="render every narrative to the output site")
    sub.add_parser("check", parents=[common], help="resolve every antiquotation without writing output")

    p = sub.add_parser("list", parents=[common], help="list the addressable fragments of a page")
    p.add_argument("page", help="wiki path, CURIE, absolute IRI or local HTML file")

    p = sub.add_parser("annotate", parents=[common], help="annotate a Coqdoc HTML file with RDFa")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path)

    p = sub.add_parser("harvest", parents=[common], help="extract triples from an HTML+RDFa file")
    p.add_argument("input", type=Path)
    p.add_argument("--base", help="absolute IRI of the page (default: the file URI)")
    p.add_argument("--format", choices=["ntriples", "tsv"], default="ntriples")

    p = sub.add_parser("resolve", parents=[common], help="resolve one antiquotation and print its HTML")
    p.add_argument("antiquotation", help="e.g. '@{oo:Theorem Foo#A}'")
    return parser


def _warn(msg: str) -> None:
    print(f"warning\t{msg}", file=sys.stderr)


def _print_report(report: Report) -> None:
    for f in report.sorted():
        if f.kind == "warning":
            print(f.line(), file=sys.stderr)
        else:
            print(f.line())
    print(report.summary())


def _project(args: argparse.Namespace) -> Project:
    config = load_config(args.config)
    return Project(config, refresh=args.refresh)


def cmd_build(args: argparse.Namespace) -> int:
    project = _project(args)
    mode = Mode(args.mode) if args.mode else None
    report = project.build(mode)
    _print_report(report)
    return EXIT_UNRESOLVED if report.unresolved and not args.allow_unresolved else EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    report = _project(args).check()
    _print_report(report)
    return EXIT_UNRESOLVED if report.unresolved else EXIT_OK


def cmd_list(args: argparse.Namespace) -> int:
    file = Path(args.page)
    if file.is_file():
        frags = harvest(parse_html(file.read_text(encoding="utf-8")), file.resolve().as_uri())
    else:
        project = _project(args)
        try:
            loc = classify_location(args.page)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if isinstance(loc, WikiPath):
            page = project.corpus.local_page(loc.path)
            if page is None:
                print(f"NoPage\t{args.page}", file=sys.stderr)
                return EXIT_UNRESOLVED
            key = "local:" + loc.path
        else:
            try:
                iri = expand_curie(loc, PrefixEnv(project.config.prefixes)).value if isinstance(loc, Curie) else str(loc)
            except UnknownPrefix:
                print(f"UnknownPrefix\t{args.page}", file=sys.stderr)
                return EXIT_UNRESOLVED
            try:
                page = project.corpus.remote_page(iri)
            except FetchError as exc:
                print(f"{type(exc).__name__}\t{exc}", file=sys.stderr)
                return EXIT_UNRESOLVED
            key = iri
        frags = project.corpus.fragments(key, *page)
    for f in frags:
        print(f"{f.fragment_id or ''}\t{f.type_name}\t{f.subject}")
    return EXIT_OK


def cmd_annotate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    doc, warnings = annotate(parse_html(args.input.read_text(encoding="utf-8")), TypeMapping(config.type_mapping))
    for w in warnings:
        _warn(str(w))
    text = doc.serialize()
    if args.output:
        args.output.write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_harvest(args: argparse.Namespace) -> int:
    base = args.base or args.input.resolve().as_uri()
    warnings: list[str] = []
    frags = harvest(parse_html(args.input.read_text(encoding="utf-8")), base, warnings=warnings)
    for w in warnings:
        _warn(w)
    for t in triples(frags):
        print(t.ntriples() if args.format == "ntriples" else t.tsv())
    return EXIT_OK


def cmd_resolve(args: argparse.Namespace) -> int:
    parsed = parse_one(args.antiquotation)
    if isinstance(parsed, ParseIssue):
        print(f"error: {parsed.kind.value}: {parsed.message}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(parsed, PrefixDecl):
        print("error: a prefix declaration is not a reference", file=sys.stderr)
        return EXIT_USAGE
    assert isinstance(parsed, Antiquotation)
    project = _project(args)
    result = resolve(parsed, PrefixEnv(project.config.prefixes), project.corpus)
    for w in result.warnings:
        _warn(w)
    print(render_result(parsed, result))
    if isinstance(result, Resolved):
        return EXIT_OK
    print(f"{result.reason.value}\t{result.detail}", file=sys.stderr)
    return EXIT_UNRESOLVED


COMMANDS = {
    "build": cmd_build,
    "check": cmd_check,
    "list": cmd_list,
    "annotate": cmd_annotate,
    "harvest": cmd_harvest,
    "resolve": cmd_resolve,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
