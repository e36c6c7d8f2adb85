"""Dereference antiquotations to HTML inclusions."""

from __future__ import annotations

import enum
import hashlib
import html
import logging
import os
import re
import tempfile
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Union

from agora.antiquotation import Antiquotation, WikiPath
from agora.harvester import (
    AnnotatedFragment,
    NotFound as FragmentNotFound,
    TypeMismatch,
    find_fragment,
    harvest,
    page_base,
)
from agora.htmltree import Element, HtmlDoc, Node, parse_fragment, parse_html, serialize_nodes
from agora.vocabulary import (
    BUILTINS,
    Curie,
    Iri,
    OmdocType,
    PrefixEnv,
    UnknownPrefix,
    VocabularyError,
    expand_curie,
    is_absolute_iri,
    parse_type_iri,
    resolve_reference,
)

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 10.0
LINK_ATTRIBUTES = ("href", "src")
_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")


class Reason(enum.Enum):
    NoPage = "NoPage"
    NoFragment = "NoFragment"
    TypeMismatch = "TypeMismatch"
    UnknownPrefix = "UnknownPrefix"
    TransportError = "TransportError"


class FetchError(Exception):
    pass


class PageNotFound(FetchError):
    pass


class TransportError(FetchError):
    pass


@dataclass(frozen=True)
class Resolved:
    html: str
    subject: Iri
    ty: OmdocType
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class NotFound:
    ref: str
    reason: Reason
    detail: str = ""
    warnings: tuple[str, ...] = ()


ResolutionResult = Union[Resolved, NotFound]
Fetcher = Callable[[str], bytes]


def http_fetcher(timeout: float = DEFAULT_TIMEOUT) -> Fetcher:
    def fetch(iri: str) -> bytes:
        req = urllib.request.Request(iri, headers={"Accept": "text/html"})
        try:
            with urllib.request.urlopen(req, timeout=timeout) as resp:
                return resp.read()
        except urllib.error.HTTPError as exc:
            if exc.code in (404, 410):
                raise PageNotFound(f"{iri}: HTTP {exc.code}") from exc
            raise TransportError(f"{iri}: HTTP {exc.code}") from exc
        except FileNotFoundError as exc:
            raise PageNotFound(f"{iri}: {exc}") from exc
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise TransportError(f"{iri}: {exc}") from exc

    return fetch


class PageCache:
    """On-disk page cache: one file per IRI named by its SHA-256 hex digest,
    with a ``.meta`` sidecar holding ``IRI<TAB>timestamp``.

    Writes are atomic renames serialized per IRI; reads take no lock.
    """

    def __init__(self, directory: str | os.PathLike[str], clock: Callable[[], float] = time.time):
        self.dir = Path(directory)
        self.clock = clock
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    @staticmethod
    def key(iri: str) -> str:
        return hashlib.sha256(iri.encode("utf-8")).hexdigest()

    def path(self, iri: str) -> Path:
        return self.dir / self.key(iri)

    def _lock(self, iri: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(iri, threading.Lock())

    def get(self, iri: str) -> bytes | None:
        try:
            return self.path(iri).read_bytes()
        except FileNotFoundError:
            return None

    def timestamp(self, iri: str) -> float | None:
        try:
            line = self.path(iri).with_suffix(".meta").read_text(encoding="utf-8")
        except FileNotFoundError:
            return None
        return float(line.rstrip("\n").split("\t")[1])

    def put(self, iri: str, data: bytes) -> None:
        with self._lock(iri):
            self.dir.mkdir(parents=True, exist_ok=True)
            target = self.path(iri)
            _atomic_write(target, data)
            _atomic_write(target.with_suffix(".meta"), f"{iri}\t{self.clock():.3f}\n".encode("utf-8"))


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class Corpus:
    """Pages an antiquotation may point into.

    ``local`` maps wiki paths to (document, base IRI). Remote pages go
    through ``cache`` first (unless ``refresh``), then ``fetcher``.
    """

    local: Mapping[str, tuple[HtmlDoc, str]] = field(default_factory=dict)
    fetcher: Fetcher | None = None
    cache: PageCache | None = None
    refresh: bool = False
    _harvested: dict[str, list[AnnotatedFragment]] = field(default_factory=dict, init=False, repr=False)
    _remote: dict[str, tuple[HtmlDoc, str]] = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)
    _iri_locks: dict[str, threading.Lock] = field(default_factory=dict, init=False, repr=False)

    def local_page(self, path: str) -> tuple[HtmlDoc, str] | None:
        if path in self.local:
            return self.local[path]
        for suffix in (".html", ".htm"):
            if path.endswith(suffix) and path[: -len(suffix)] in self.local:
                return self.local[path[: -len(suffix)]]
        return None

    def fetch(self, iri: str) -> bytes:
        cached = None if self.cache is None else self.cache.get(iri)
        if cached is not None and not self.refresh:
            return cached
        if self.fetcher is None:
            raise TransportError(f"no fetcher configured for {iri}")
        try:
            data = self.fetcher(iri)
        except TransportError:
            if cached is not None:
                log.warning("fetch of %s failed; using cached copy", iri)
                return cached
            raise
        if self.cache is not None:
            self.cache.put(iri, data)
        return data

    def remote_page(self, iri: str) -> tuple[HtmlDoc, str]:
        with self._lock:
            lock = self._iri_locks.setdefault(iri, threading.Lock())
        with lock:
            if iri not in self._remote:
                data = self.fetch(iri)
                self._remote[iri] = (parse_html(data.decode("utf-8", errors="replace")), iri)
            return self._remote[iri]

    def fragments(self, key: str, doc: HtmlDoc, base: str) -> list[AnnotatedFragment]:
        with self._lock:
            cached = self._harvested.get(key)
        if cached is None:
            cached = harvest(doc, base)
            with self._lock:
                cached = self._harvested.setdefault(key, cached)
        return cached


def rewrite_links(fragment: str, base: Iri | str, warnings: list[str] | None = None) -> str:
    """Resolve every relative ``href``/``src`` in ``fragment`` against ``base``.

    Absolute references are left alone, which makes the rewrite idempotent.
    """
    base_s = str(base)
    nodes = parse_fragment(fragment)
    changed = False
    for node in nodes:
        if not isinstance(node, Element):
            continue
        for el in node.iter():
            for name in LINK_ATTRIBUTES:
                value = el.get(name)
                if value is None:
                    continue
                stripped = value.strip()
                if any(c.isspace() for c in stripped) or "\\" in stripped:
                    if warnings is not None:
                        warnings.append(f"unresolvable {name}={value!r} left verbatim")
                    continue
                if _SCHEME_RE.match(stripped):
                    continue
                new = resolve_reference(base_s, stripped)
                if new != value:
                    el.set(name, new)
                    changed = True
    return serialize_nodes(nodes) if changed else fragment


def _remove_nested_proofs(el: Element) -> Element:
    def prune(parent: Element) -> None:
        kept: list[Node] = []
        for c in parent.children:
            if isinstance(c, Element):
                ty = c.get("typeof")
                if ty is not None and OmdocType.Proof in {_token_type(t) for t in ty.split()}:
                    continue
                prune(c)
            kept.append(c)
        parent.children = kept

    prune(el)
    return el


def _token_type(token: str) -> OmdocType | None:
    try:
        return parse_type_iri(expand_curie(Curie.parse(token)))
    except VocabularyError:
        return parse_type_iri(token)


def _wanted_type(a: Antiquotation, env: PrefixEnv) -> OmdocType | NotFound:
    try:
        iri = expand_curie(a.ty, env)
    except UnknownPrefix as exc:
        return NotFound(a.reference, Reason.UnknownPrefix, str(exc))
    t = parse_type_iri(iri)
    if t is None:
        return NotFound(a.reference, Reason.TypeMismatch, f"{a.ty} is not a known OMDoc type")
    return t


def _load_page(a: Antiquotation, env: PrefixEnv, c: Corpus) -> tuple[str, HtmlDoc, str] | NotFound:
    loc = a.target.location
    if isinstance(loc, WikiPath):
        page = c.local_page(loc.path)
        if page is None:
            return NotFound(a.reference, Reason.NoPage, f"no local page {loc.path!r}")
        return ("local:" + loc.path, *page)
    if isinstance(loc, Curie):
        try:
            iri = expand_curie(loc, env).value
        except UnknownPrefix as exc:
            return NotFound(a.reference, Reason.UnknownPrefix, str(exc))
    else:
        iri = str(loc)
    try:
        doc, base = c.remote_page(iri)
    except PageNotFound as exc:
        return NotFound(a.reference, Reason.NoPage, str(exc))
    except FetchError as exc:
        return NotFound(a.reference, Reason.TransportError, str(exc))
    return iri, doc, base


def resolve(a: Antiquotation, env: PrefixEnv = BUILTINS, c: Corpus | None = None) -> ResolutionResult:
    c = c if c is not None else Corpus()
    warnings = [f"unknown option {k!r} ignored" for k in a.option_keys() if k != "noproof"]
    wanted = _wanted_type(a, env)
    if isinstance(wanted, NotFound):
        return _with_warnings(wanted, warnings)
    page = _load_page(a, env, c)
    if isinstance(page, NotFound):
        return _with_warnings(page, warnings)
    key, doc, base = page
    if a.target.fragment is None:
        return NotFound(a.reference, Reason.NoFragment, "reference names no fragment", tuple(warnings))
    frags = c.fragments(key, doc, base)
    found = find_fragment(frags, a.target.fragment, wanted)
    if isinstance(found, FragmentNotFound):
        return NotFound(a.reference, Reason.NoFragment, f"no fragment #{a.target.fragment}", tuple(warnings))
    if isinstance(found, TypeMismatch):
        actual = found.actual.value if isinstance(found.actual, OmdocType) else str(found.actual)
        return NotFound(a.reference, Reason.TypeMismatch, f"#{a.target.fragment} is a {actual}", tuple(warnings))
    fragment_html = found.html
    if a.has_option("noproof") and isinstance(found.ty, OmdocType) and found.ty is not OmdocType.Proof:
        el = parse_fragment(found.html)
        root = next(n for n in el if isinstance(n, Element))
        fragment_html = _remove_nested_proofs(root).serialize()
    html_out = rewrite_links(fragment_html, page_base(doc, base), warnings)
    assert isinstance(found.ty, OmdocType)
    return Resolved(html_out, found.subject, found.ty, tuple(warnings))


def _with_warnings(nf: NotFound, warnings: list[str]) -> NotFound:
    return NotFound(nf.ref, nf.reason, nf.detail, tuple(warnings))


def render_not_found(a: Antiquotation, reason: Reason | str = Reason.NoFragment) -> str:
    title = reason.value if isinstance(reason, Reason) else str(reason)
    ref = html.escape(a.reference, quote=False)
    return f'<span class="agora-unresolved" title="{html.escape(title)}">{ref}?</span>'


def render_result(a: Antiquotation, result: ResolutionResult) -> str:
    if isinstance(result, Resolved):
        return result.html
    return render_not_found(a, result.reason)


def local_page_base(site_url: str, path: str) -> str:
    if not is_absolute_iri(site_url):
        raise ValueError(f"site URL must be absolute: {site_url!r}")
    return resolve_reference(site_url, path + ".html")
