"""Project configuration, corpus assembly and site builds."""

from __future__ import annotations

import html
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from agora.annotator import AnnotationWarning, TypeMapping, annotate
from agora.antiquotation import Antiquotation
from agora.harvester import duplicate_subjects
from agora.htmltree import HtmlDoc, parse_html
from agora.narrative import Mode, NarrativeDoc, parse_narrative, render_narrative
from agora.resolver import (
    DEFAULT_TIMEOUT,
    Corpus,
    NotFound,
    PageCache,
    ResolutionResult,
    http_fetcher,
    local_page_base,
    render_result,
    resolve,
)
from agora.vocabulary import (
    BUILTIN_PREFIXES,
    OmdocType,
    PrefixEnv,
    VocabularyError,
    is_absolute_iri,
    normalize_prefix_base,
)

log = logging.getLogger(__name__)

CONFIG_NAME = "agora.conf"
NARRATIVE_SUFFIX = ".creole"
HTML_SUFFIXES = (".html", ".htm")
BUNDLED_CSS = "agora.css"
SCOPED_CSS = "agora-includes.css"
INCLUDE_SCOPE = ".agora-include"


class ConfigError(Exception):
    pass


@dataclass
class ProjectConfig:
    root: Path
    narratives: list[Path] = field(default_factory=list)
    pages: list[Path] = field(default_factory=list)
    annotate: list[Path] = field(default_factory=list)
    out_dir: Path = Path("site")
    cache_dir: Path = Path(".agora-cache")
    prefixes: dict[str, str] = field(default_factory=dict)
    mode: Mode = Mode.Inline
    type_mapping: dict[str, OmdocType] = field(default_factory=dict)
    timeout: float = DEFAULT_TIMEOUT
    site_url: str | None = None

    @property
    def base_url(self) -> str:
        return self.site_url or self.out_dir.resolve().as_uri() + "/"


def _dirs(root: Path, value: str) -> list[Path]:
    return [root / v.strip() for v in value.split(",") if v.strip()]


def parse_config(text: str, root: Path) -> ProjectConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment line."""
    cfg = ProjectConfig(root=root, narratives=[root], out_dir=root / "site", cache_dir=root / ".agora-cache")
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key == "narratives":
            cfg.narratives = _dirs(root, value)
        elif key == "pages":
            cfg.pages = _dirs(root, value)
        elif key == "annotate":
            cfg.annotate = _dirs(root, value)
        elif key == "out":
            cfg.out_dir = root / value
        elif key == "cache":
            cfg.cache_dir = root / value
        elif key == "mode":
            try:
                cfg.mode = Mode(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: mode must be inline or placeholder") from None
        elif key == "timeout":
            try:
                cfg.timeout = float(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: bad timeout {value!r}") from None
        elif key == "site_url":
            if not is_absolute_iri(value):
                raise ConfigError(f"line {lineno}: site_url must be an absolute IRI")
            cfg.site_url = value if value.endswith("/") else value + "/"
        elif key.startswith("prefix."):
            name = key[len("prefix."):]
            if name in BUILTIN_PREFIXES:
                raise ConfigError(f"line {lineno}: prefix {name!r} is built in")
            if not is_absolute_iri(value):
                raise ConfigError(f"line {lineno}: prefix {name!r} needs an absolute IRI")
            cfg.prefixes[name] = normalize_prefix_base(value)
        elif key.startswith("type."):
            try:
                cfg.type_mapping[key[len("type."):]] = OmdocType(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: unknown OMDoc type {value!r}") from None
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    try:
        PrefixEnv(cfg.prefixes)
    except VocabularyError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: Path | None = None, cwd: Path | None = None) -> ProjectConfig:
    """Load ``path``; without one, ``agora.conf`` in ``cwd`` or the defaults."""
    cwd = cwd or Path.cwd()
    if path is None:
        candidate = cwd / CONFIG_NAME
        if not candidate.exists():
            return parse_config("", cwd)
        path = candidate
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), path.resolve().parent)


@dataclass(frozen=True)
class Finding:
    kind: str  # unresolved | duplicate | warning
    file: str
    span: tuple[int, int] | None
    detail: str

    def line(self) -> str:
        start, end = self.span if self.span else ("", "")
        return f"{self.kind}\t{self.file}\t{start}\t{end}\t{self.detail}"

    def sort_key(self) -> tuple:
        return (self.file, self.span or (-1, -1), self.kind, self.detail)


@dataclass
class Report:
    findings: list[Finding] = field(default_factory=list)
    pages: int = 0
    antiquotations: int = 0

    @property
    def unresolved(self) -> list[Finding]:
        return [f for f in self.findings if f.kind == "unresolved"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.kind == "warning"]

    def sorted(self) -> list[Finding]:
        return sorted(self.findings, key=Finding.sort_key)

    def summary(self) -> str:
        dups = sum(1 for f in self.findings if f.kind == "duplicate")
        return (
            f"# pages={self.pages} antiquotations={self.antiquotations} "
            f"unresolved={len(self.unresolved)} duplicates={dups} warnings={len(self.warnings)}"
        )


@dataclass
class FormalPage:
    path: str  # wiki path, no extension
    source: Path
    doc: HtmlDoc
    annotated: bool
    warnings: list[AnnotationWarning] = field(default_factory=list)


@dataclass
class Narrative:
    path: str
    source: Path
    doc: NarrativeDoc


def _walk(directory: Path, suffixes: tuple[str, ...]) -> list[Path]:
    if not directory.is_dir():
        raise ConfigError(f"directory not found: {directory}")
    return sorted(p for p in directory.rglob("*") if p.is_file() and p.suffix in suffixes)


def _wiki_path(base: Path, file: Path) -> str:
    return file.relative_to(base).with_suffix("").as_posix()


class Project:
    def __init__(self, config: ProjectConfig, refresh: bool = False, fetcher=None):
        self.config = config
        self.refresh = refresh
        self.mapping = TypeMapping(config.type_mapping)
        self.pages = self._load_pages()
        self.narratives = self._load_narratives()
        local = {p.path: (p.doc, local_page_base(config.base_url, p.path)) for p in self.pages}
        self.corpus = Corpus(
            local=local,
            fetcher=fetcher or http_fetcher(config.timeout),
            cache=PageCache(config.cache_dir),
            refresh=refresh,
        )

    def _load_pages(self) -> list[FormalPage]:
        pages: dict[str, FormalPage] = {}
        for directory, run_annotator in [(d, True) for d in self.config.annotate] + [
            (d, False) for d in self.config.pages
        ]:
            for file in _walk(directory, HTML_SUFFIXES):
                path = _wiki_path(directory, file)
                if path in pages:
                    raise ConfigError(f"page {path!r} defined by both {pages[path].source} and {file}")
                doc = parse_html(file.read_text(encoding="utf-8"))
                warnings: list[AnnotationWarning] = []
                if run_annotator:
                    doc, warnings = annotate(doc, self.mapping)
                pages[path] = FormalPage(path, file, doc, run_annotator, warnings)
        return [pages[k] for k in sorted(pages)]

    def _load_narratives(self) -> list[Narrative]:
        out: dict[str, Narrative] = {}
        for directory in self.config.narratives:
            for file in _walk(directory, (NARRATIVE_SUFFIX,)):
                path = _wiki_path(directory, file)
                if path in out:
                    raise ConfigError(f"narrative {path!r} defined twice")
                out[path] = Narrative(path, file, parse_narrative(file.read_text(encoding="utf-8")))
        clash = set(out) & {p.path for p in self.pages}
        if clash:
            raise ConfigError(f"narrative and formal page share a name: {sorted(clash)[0]!r}")
        return [out[k] for k in sorted(out)]

    def prefix_env(self, narrative: Narrative, findings: list[Finding] | None = None) -> PrefixEnv:
        """Project prefixes overlaid by the page's own declarations."""
        bindings = dict(self.config.prefixes)
        for decl in narrative.doc.prefix_decls:
            if decl.name in BUILTIN_PREFIXES:
                if findings is not None:
                    findings.append(
                        Finding("warning", narrative.path, decl.span, f"prefix {decl.name!r} is built in; ignored")
                    )
                continue
            bindings[decl.name] = normalize_prefix_base(str(decl.base))
        return PrefixEnv(bindings)

    def resolve_all(self, report: Report) -> dict[str, dict[tuple[int, int], ResolutionResult]]:
        jobs: list[tuple[Narrative, Antiquotation, PrefixEnv]] = []
        for n in self.narratives:
            env = self.prefix_env(n, report.findings)
            for node in n.doc.antiquotations():
                jobs.append((n, node.antiquotation, env))
        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(lambda job: resolve(job[1], job[2], self.corpus), jobs))
        out: dict[str, dict[tuple[int, int], ResolutionResult]] = {n.path: {} for n in self.narratives}
        for (n, a, _), result in zip(jobs, results):
            assert a.span is not None
            out[n.path][a.span] = result
            for w in result.warnings:
                report.findings.append(Finding("warning", n.path, a.span, w))
            if isinstance(result, NotFound):
                detail = f"{result.reason.value}\t{a.reference}"
                if result.detail:
                    detail += f"\t{result.detail}"
                report.findings.append(Finding("unresolved", n.path, a.span, detail))
        report.antiquotations += len(jobs)
        return out

    def static_findings(self, report: Report) -> None:
        for page in self.pages:
            for w in page.warnings:
                report.findings.append(Finding("warning", page.path, None, str(w)))
            doc, base = self.corpus.local[page.path]
            for subject in duplicate_subjects(self.corpus.fragments("local:" + page.path, doc, base)):
                report.findings.append(Finding("duplicate", page.path, None, str(subject)))
        for n in self.narratives:
            for issue in n.doc.issues:
                report.findings.append(Finding("warning", n.path, issue.span, f"{issue.kind.value}: {issue.message}"))

    def check(self) -> Report:
        report = Report(pages=len(self.narratives))
        self.static_findings(report)
        self.resolve_all(report)
        return report

    def build(self, mode: Mode | None = None) -> Report:
        mode = mode or self.config.mode
        report = Report(pages=len(self.narratives))
        self.static_findings(report)
        out = self.config.out_dir
        out.mkdir(parents=True, exist_ok=True)

        for page in self.pages:
            _write(out / f"{page.path}.html", page.doc.serialize())
        scoped: list[str] = []
        for directory in self.config.annotate + self.config.pages:
            for css in _walk(directory, (".css",)):
                text = css.read_text(encoding="utf-8")
                _write(out / css.relative_to(directory), text)
                scoped.append(f"/* {css.relative_to(directory).as_posix()} */\n{scope_css(text)}")
        _write(out / SCOPED_CSS, "\n".join(scoped))
        _write(out / BUNDLED_CSS, resources.files("agora").joinpath("data", BUNDLED_CSS).read_text(encoding="utf-8"))

        results = self.resolve_all(report) if mode is Mode.Inline else {}
        for n in self.narratives:
            inclusions = {}
            if mode is Mode.Inline:
                for node in n.doc.antiquotations():
                    inclusions[node.span] = render_result(node.antiquotation, results[n.path][node.span])
            depth = n.path.count("/")
            prefix = "../" * depth
            body = render_narrative(n.doc, inclusions, mode, link_prefix=prefix)
            _write(out / f"{n.path}.html", page_template(n.doc.title or n.path.rsplit("/", 1)[-1], body, prefix))
        return report


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def page_template(title: str, body: str, prefix: str = "") -> str:
    return (
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
        f"<title>{html.escape(title)}</title>\n"
        f'<link rel="stylesheet" href="{prefix}{BUNDLED_CSS}">\n'
        f'<link rel="stylesheet" href="{prefix}{SCOPED_CSS}">\n'
        "</head>\n<body>\n"
        f"{body}"
        "</body>\n</html>\n"
    )


def _scope_selector(sel: str, scope: str) -> str:
    m = re.match(r"^(html|body|:root)\b\s*(.*)$", sel)
    if m:
        return f"{scope} {m.group(2)}".strip()
    return f"{scope} {sel}"


def scope_css(css: str, scope: str = INCLUDE_SCOPE) -> str:
    """Prefix every selector with ``scope`` so copied stylesheets only style inclusions."""
    css = re.sub(r"/\*.*?\*/", "", css, flags=re.S)
    out: list[str] = []
    i = 0
    while i < len(css):
        brace = css.find("{", i)
        if brace == -1:
            tail = css[i:].strip()
            if tail:
                out.append(tail)
            break
        prelude = css[i:brace]
        if ";" in prelude:
            stmt, prelude = prelude.rsplit(";", 1)
            out.append(stmt.strip() + ";")
        depth, j = 0, brace
        while j < len(css):
            if css[j] == "{":
                depth += 1
            elif css[j] == "}":
                depth -= 1
                if depth == 0:
                    break
            j += 1
        body = css[brace + 1 : j]
        p = " ".join(prelude.split())
        if p.startswith(("@media", "@supports")):
            out.append(f"{p} {{\n{scope_css(body, scope)}\n}}")
        elif p.startswith("@"):
            out.append(f"{p} {{{body}}}")
        else:
            sels = ", ".join(_scope_selector(s.strip(), scope) for s in p.split(",") if s.strip())
            out.append(f"{sels} {{{body}}}")
        i = j + 1
    return "\n".join(out) + ("\n" if out else "")
