"""The focused bilingual crawl loop.

One step: pop the best frontier entry, fetch the document, detect its content
language; documents outside the configured pair are discarded without link
extraction, stored documents have their outlinks scored with
``P(link is in the other language) * P(pair is parallel)`` and pushed with the
max-update rule.  Seeds always download first.

Fetching is pluggable: an offline site-graph fetcher drives deterministic
simulations, a live fetcher does plain HTTP GETs honoring robots exclusion.
"""
from __future__ import annotations

import json
import logging
import re
import time
import urllib.request
import urllib.robotparser
from dataclasses import dataclass
from importlib import resources
from urllib.parse import urljoin

from .errors import (
    BifocalError,
    DetectorUnavailable,
    FetchFailed,
    FrontierEmpty,
    NoSeeds,
    NotAUrl,
    UnknownSeed,
)
from .frontier import SEED, Frontier
from .isodata import UNKNOWN_LANG
from .langid import lang_probability
from .pairscore import pair_probability
from .urls import parse_components

logger = logging.getLogger(__name__)

STORED = "stored"
DISCARDED_LANGUAGE = "discarded_language"
ERROR = "error"


# ---------------------------------------------------------------------------
# Offline site-graph fixture

@dataclass(frozen=True)
class SitePage:
    lang: str
    links: tuple[str, ...]
    parallel_with: frozenset[str]
    size_bytes: int = 0


class SiteGraph:
    """Pages with ground-truth language, outlinks, and parallel partners."""

    def __init__(self, pages: "dict[str, SitePage]"):
        self.pages = pages
        self._validate()

    def _validate(self) -> None:
        for url, page in self.pages.items():
            for partner in page.parallel_with:
                other = self.pages.get(partner)
                if other is None or url not in other.parallel_with:
                    raise ValueError(f"parallel_with is not symmetric for {url} / {partner}")
                if other.lang == page.lang:
                    raise ValueError(f"parallel partners {url} / {partner} share a language")

    @classmethod
    def from_dict(cls, data: dict) -> "SiteGraph":
        pages = {}
        for url, record in data["pages"].items():
            pages[url] = SitePage(
                lang=record["lang"],
                links=tuple(record.get("links", ())),
                parallel_with=frozenset(record.get("parallel_with", ())),
                size_bytes=int(record.get("size_bytes", 0)),
            )
        return cls(pages)

    def to_dict(self) -> dict:
        return {
            "pages": {
                url: {
                    "lang": page.lang,
                    "links": list(page.links),
                    "parallel_with": sorted(page.parallel_with),
                    "size_bytes": page.size_bytes,
                }
                for url, page in self.pages.items()
            }
        }

    @classmethod
    def load(cls, path) -> "SiteGraph":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_dict(), handle, indent=1, sort_keys=True)
            handle.write("\n")


# ---------------------------------------------------------------------------
# Config, events, log

@dataclass
class CrawlConfig:
    lang_a: str
    lang_b: str
    seeds: tuple[str, ...]
    budget: int
    lang_scorer: str = "rule"
    pair_scorer: str = "baseline"
    per_host_delay_ms: int = 1000  # live crawls only; the simulator never waits
    max_depth: int | None = None
    seed: int = 0
    user_agent: str = "bifocal/0.1"
    lang_model_path: str | None = None
    pair_model_path: str | None = None

    def __post_init__(self):
        if self.lang_a == self.lang_b:
            raise ValueError("crawl needs two distinct languages")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        self.seeds = tuple(self.seeds)


@dataclass
class CrawlEvent:
    seq: int
    url: str
    outcome: str  # stored | discarded_language | error
    lang: str
    priority: object  # float or the SEED sentinel
    is_parallel_hit: bool = False


def site_of(url: str) -> str:
    """Website identity of a URL (its host); falls back to the raw string."""
    try:
        return parse_components(url).host
    except NotAUrl:
        return url


class CrawlLog:
    def __init__(self, events: "list[CrawlEvent]"):
        self.events = events

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def outcome_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for event in self.events:
            counts[event.outcome] = counts.get(event.outcome, 0) + 1
        return counts

    def mark_parallel_hits(self, graph: SiteGraph) -> None:
        """Flag events that complete a stored parallel pair.

        A stored document is a hit when one of its partners was stored
        earlier, so each completed pair contributes exactly one hit at the
        moment it becomes usable.
        """
        stored_seq: dict[str, int] = {}
        for event in self.events:
            if event.outcome == STORED:
                stored_seq[event.url] = event.seq
        for event in self.events:
            if event.outcome != STORED:
                event.is_parallel_hit = False
                continue
            page = graph.pages.get(event.url)
            event.is_parallel_hit = page is not None and any(
                stored_seq.get(partner, event.seq) < event.seq
                for partner in page.parallel_with
            )

    def download_events(self) -> "list[tuple[str, bool]]":
        """(site, hit) rows for decile curves; failed fetches downloaded nothing."""
        return [
            (site_of(e.url), e.is_parallel_hit)
            for e in self.events
            if e.outcome in (STORED, DISCARDED_LANGUAGE)
        ]

    def to_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for e in self.events:
                priority = "SEED" if e.priority is SEED else repr(float(e.priority))
                handle.write(f"{e.seq}\t{e.url}\t{e.outcome}\t{e.lang}\t{priority}\n")

    @classmethod
    def from_tsv(cls, path) -> "CrawlLog":
        events = []
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.rstrip("\n")
                if not line:
                    continue
                seq, url, outcome, lang, priority = line.split("\t")
                events.append(
                    CrawlEvent(
                        seq=int(seq),
                        url=url,
                        outcome=outcome,
                        lang=lang,
                        priority=SEED if priority == "SEED" else float(priority),
                    )
                )
        return cls(events)


# ---------------------------------------------------------------------------
# Content-language detection

class GroundTruthDetector:
    """Returns the fixture-provided language; the simulator's detector."""

    def detect(self, content: bytes, hint: str | None = None) -> str:
        return hint if hint else UNKNOWN_LANG


class StopwordLanguageDetector:
    """Counts bundled function words per language; most matches wins."""

    def __init__(self, profiles: "dict[str, list[str]] | None" = None):
        if profiles is None:
            text = resources.files("bifocal").joinpath("data/stopword_profiles.json").read_text("utf-8")
            profiles = json.loads(text)
        self.profiles = {lang: frozenset(words) for lang, words in profiles.items()}

    def detect(self, content: bytes, hint: str | None = None) -> str:
        if not content:
            return UNKNOWN_LANG
        words = re.findall(r"[^\W\d_]+", content.decode("utf-8", "replace").casefold())
        best_lang = UNKNOWN_LANG
        best_score = 0
        for lang in sorted(self.profiles):
            score = sum(1 for w in words if w in self.profiles[lang])
            if score > best_score:
                best_score = score
                best_lang = lang
        return best_lang


class ExternalProcessDetector:
    """Pipes document bytes to a command; expects one language code line."""

    def __init__(self, command: "list[str]", timeout: float = 30.0):
        self.command = command
        self.timeout = timeout

    def detect(self, content: bytes, hint: str | None = None) -> str:
        import subprocess

        try:
            proc = subprocess.run(
                self.command,
                input=content,
                stdout=subprocess.PIPE,
                timeout=self.timeout,
                check=True,
            )
        except (OSError, subprocess.SubprocessError) as exc:
            raise DetectorUnavailable(f"detector {self.command!r} failed: {exc}") from exc
        code = proc.stdout.decode("utf-8", "replace").strip().split("\n")[0].strip()
        return code or UNKNOWN_LANG


def detect_content_language(content: bytes, detector, hint: str | None = None) -> str:
    """Run the pluggable detector on raw document bytes."""
    return detector.detect(content, hint=hint)


# ---------------------------------------------------------------------------
# Fetchers

@dataclass(frozen=True)
class FetchResult:
    content: bytes
    links: tuple[str, ...]
    lang_hint: str | None = None


class GraphFetcher:
    def __init__(self, graph: SiteGraph):
        self.graph = graph

    def fetch(self, url: str) -> FetchResult:
        page = self.graph.pages.get(url)
        if page is None:
            raise FetchFailed(f"{url} is not in the site graph")
        return FetchResult(content=b"", links=page.links, lang_hint=page.lang)


_HREF_RE = re.compile(r"""href\s*=\s*["']([^"'<>\s]+)["']""", re.IGNORECASE)


def extract_links(html_text: str, base_url: str) -> tuple[str, ...]:
    """Absolute http(s) links from href attributes, order-preserving."""
    seen = set()
    links = []
    for target in _HREF_RE.findall(html_text):
        absolute = urljoin(base_url, target)
        if not absolute.startswith(("http://", "https://")):
            continue
        absolute = absolute.split("#", 1)[0]
        if absolute and absolute not in seen:
            seen.add(absolute)
            links.append(absolute)
    return tuple(links)


class PolitenessGate:
    """Enforces a minimum delay between requests to one host."""

    def __init__(self, delay_ms: int, clock=time.monotonic, sleeper=time.sleep):
        self.delay = delay_ms / 1000.0
        self.clock = clock
        self.sleeper = sleeper
        self._last: dict[str, float] = {}

    def wait(self, url: str) -> None:
        if self.delay <= 0:
            return
        host = site_of(url)
        now = self.clock()
        last = self._last.get(host)
        if last is not None and now - last < self.delay:
            self.sleeper(self.delay - (now - last))
            now = self.clock()
        self._last[host] = now


def _default_opener(url: str, headers: dict, timeout: float):
    request = urllib.request.Request(url, headers=headers)
    with urllib.request.urlopen(request, timeout=timeout) as response:
        return response.status, dict(response.headers), response.read()


class LiveFetcher:
    """Plain HTTP GET fetcher with robots exclusion and politeness delays."""

    def __init__(
        self,
        user_agent: str = "bifocal/0.1",
        per_host_delay_ms: int = 1000,
        timeout: float = 20.0,
        opener=_default_opener,
        respect_robots: bool = True,
        clock=time.monotonic,
        sleeper=time.sleep,
    ):
        self.user_agent = user_agent
        self.timeout = timeout
        self.opener = opener
        self.respect_robots = respect_robots
        self.gate = PolitenessGate(per_host_delay_ms, clock=clock, sleeper=sleeper)
        self._robots: dict[str, urllib.robotparser.RobotFileParser] = {}

    def _robots_for(self, url: str) -> urllib.robotparser.RobotFileParser:
        components = parse_components(url)
        host = components.host
        parser = self._robots.get(host)
        if parser is None:
            parser = urllib.robotparser.RobotFileParser()
            robots_url = f"{components.scheme}://{host}/robots.txt"
            try:
                status, _, body = self.opener(
                    robots_url, {"User-Agent": self.user_agent}, self.timeout
                )
                if status == 200:
                    parser.parse(body.decode("utf-8", "replace").splitlines())
                else:
                    parser.allow_all = True
            except OSError:
                parser.allow_all = True
            self._robots[host] = parser
        return parser

    def fetch(self, url: str) -> FetchResult:
        if self.respect_robots and not self._robots_for(url).can_fetch(self.user_agent, url):
            raise FetchFailed(f"robots.txt disallows {url}")
        self.gate.wait(url)
        try:
            status, headers, body = self.opener(
                url, {"User-Agent": self.user_agent}, self.timeout
            )
        except OSError as exc:
            raise FetchFailed(f"GET {url} failed: {exc}") from exc
        if status != 200:
            raise FetchFailed(f"GET {url} returned {status}")
        content_type = str(headers.get("Content-Type", "")).lower()
        links: tuple[str, ...] = ()
        if "html" in content_type or not content_type:
            links = extract_links(body.decode("utf-8", "replace"), url)
        return FetchResult(content=body, links=links)


# ---------------------------------------------------------------------------
# Scorer plumbing

class UniformLanguageScorer:
    """Constant 1.0; with the uniform pair scorer the crawl is breadth-first."""

    def distribution(self, url: str) -> dict[str, float]:
        return {UNKNOWN_LANG: 1.0}

    def probability(self, url: str, target: str) -> float:
        return 1.0


class UniformPairScorer:
    def probability(self, url_a, url_b, lang_a=None, lang_b=None) -> float:
        return 1.0


def build_lang_scorer(cfg: CrawlConfig):
    from .langid import NgramLanguageScorer, RuleLanguageScorer, load_model

    if cfg.lang_scorer == "rule":
        return RuleLanguageScorer()
    if cfg.lang_scorer == "ngram":
        if not cfg.lang_model_path:
            raise ValueError("lang_scorer 'ngram' needs lang_model_path")
        return NgramLanguageScorer(load_model(cfg.lang_model_path))
    if cfg.lang_scorer == "uniform":
        return UniformLanguageScorer()
    if cfg.lang_scorer.startswith("external:"):
        from .external import ExternalLanguageScorer, ScorerClient

        host, _, port = cfg.lang_scorer.removeprefix("external:").partition(":")
        return ExternalLanguageScorer(ScorerClient.connect_tcp(host, int(port)))
    raise ValueError(f"unknown language scorer {cfg.lang_scorer!r}")


def build_pair_scorer(cfg: CrawlConfig):
    from .pairscore import BaselinePairScorer, FeaturePairScorer, load_pair_model

    if cfg.pair_scorer == "baseline":
        return BaselinePairScorer()
    if cfg.pair_scorer == "model":
        if not cfg.pair_model_path:
            raise ValueError("pair_scorer 'model' needs pair_model_path")
        return FeaturePairScorer(load_pair_model(cfg.pair_model_path))
    if cfg.pair_scorer == "uniform":
        return UniformPairScorer()
    if cfg.pair_scorer.startswith("external:"):
        from .external import ExternalPairScorer, ScorerClient

        host, _, port = cfg.pair_scorer.removeprefix("external:").partition(":")
        return ExternalPairScorer(ScorerClient.connect_tcp(host, int(port)))
    raise ValueError(f"unknown pair scorer {cfg.pair_scorer!r}")


def score_links(url: str, lang_u: str, links, cfg: CrawlConfig, lang_scorer, pair_scorer):
    """Priorities for the outlinks of a stored document.

    The language target flips to the other member of the configured pair.  A
    scorer failure zeroes that link's priority and the crawl continues.
    """
    target = cfg.lang_b if lang_u == cfg.lang_a else cfg.lang_a
    scored = []
    for link in links:
        try:
            p_lang = lang_probability(lang_scorer, link, target)
            p_pair = pair_probability(pair_scorer, url, link, lang_u, target)
            priority = p_lang * p_pair
        except BifocalError as exc:
            logger.warning("scoring %s failed (%s); priority 0", link, exc)
            priority = 0.0
        scored.append((link, priority))
    return scored


# ---------------------------------------------------------------------------
# Crawl loop

class CrawlState:
    def __init__(self, cfg: CrawlConfig, fetcher, detector, lang_scorer, pair_scorer,
                 politeness: PolitenessGate | None = None):
        self.cfg = cfg
        self.fetcher = fetcher
        self.detector = detector
        self.lang_scorer = lang_scorer
        self.pair_scorer = pair_scorer
        self.politeness = politeness
        self.frontier = Frontier()
        self.events: list[CrawlEvent] = []
        self.fetches = 0
        self.depths: dict[str, int] = {}
        for seed_url in cfg.seeds:
            self.frontier.push_or_raise(seed_url, SEED)
            self.depths[seed_url] = 0


def crawl_step(state: CrawlState) -> CrawlEvent:
    """One pop-fetch-detect-score-push cycle; returns the logged event.

    Raises:
        FrontierEmpty: nothing left to fetch.
    """
    entry = state.frontier.pop_max()
    state.fetches += 1
    seq = state.fetches
    if state.politeness is not None:
        state.politeness.wait(entry.url)
    try:
        result = state.fetcher.fetch(entry.url)
    except FetchFailed as exc:
        logger.info("fetch failed: %s", exc)
        event = CrawlEvent(seq, entry.url, ERROR, UNKNOWN_LANG, entry.priority)
        state.events.append(event)
        return event

    lang = state.detector.detect(result.content, hint=result.lang_hint)
    pair = (state.cfg.lang_a, state.cfg.lang_b)
    if lang not in pair:
        # Off-language documents end here: no link extraction.
        state.frontier.mark_discarded(entry.url)
        event = CrawlEvent(seq, entry.url, DISCARDED_LANGUAGE, lang, entry.priority)
        state.events.append(event)
        return event

    event = CrawlEvent(seq, entry.url, STORED, lang, entry.priority)
    state.events.append(event)
    depth = state.depths.get(entry.url, 0)
    if state.cfg.max_depth is None or depth < state.cfg.max_depth:
        for link, priority in score_links(
            entry.url, lang, result.links, state.cfg, state.lang_scorer, state.pair_scorer
        ):
            state.depths.setdefault(link, depth + 1)
            state.frontier.push_or_raise(link, priority)
    return event


def run_crawl(state: CrawlState) -> CrawlLog:
    while state.fetches < state.cfg.budget:
        try:
            crawl_step(state)
        except FrontierEmpty:
            break
    return CrawlLog(state.events)


def simulate(graph: SiteGraph, cfg: CrawlConfig, lang_scorer=None, pair_scorer=None) -> CrawlLog:
    """Deterministic offline crawl over a site-graph fixture.

    Content language comes from the fixture's ground truth; parallel hits are
    marked on the log afterwards.

    Raises:
        UnknownSeed: a seed URL is missing from the graph.
    """
    for seed_url in cfg.seeds:
        if seed_url not in graph.pages:
            raise UnknownSeed(f"seed {seed_url} is not in the graph")
    state = CrawlState(
        cfg,
        fetcher=GraphFetcher(graph),
        detector=GroundTruthDetector(),
        lang_scorer=lang_scorer if lang_scorer is not None else build_lang_scorer(cfg),
        pair_scorer=pair_scorer if pair_scorer is not None else build_pair_scorer(cfg),
    )
    log = run_crawl(state)
    log.mark_parallel_hits(graph)
    return log


def crawl_live(cfg: CrawlConfig, detector=None, lang_scorer=None, pair_scorer=None,
               fetcher=None) -> CrawlLog:
    """Live crawl using HTTP fetching; detector defaults to the builtin one."""
    state = CrawlState(
        cfg,
        fetcher=fetcher if fetcher is not None else LiveFetcher(
            user_agent=cfg.user_agent, per_host_delay_ms=cfg.per_host_delay_ms
        ),
        detector=detector if detector is not None else StopwordLanguageDetector(),
        lang_scorer=lang_scorer if lang_scorer is not None else build_lang_scorer(cfg),
        pair_scorer=pair_scorer if pair_scorer is not None else build_pair_scorer(cfg),
    )
    return run_crawl(state)


# ---------------------------------------------------------------------------
# Seed lists

def build_seed_list(url_to_site, n: int = 200, alive=None) -> "list[str]":
    """Home pages of the ``n`` sites with the most unique URLs.

    ``url_to_site`` maps URLs to a website identity.  When ``alive`` flags are
    provided, dead URLs are dropped before counting.  Sites are ranked by
    unique-URL count, ties broken lexicographically; each home page is the
    scheme and host of the site's lexicographically first URL.

    Raises:
        NoSeeds: nothing to rank.
    """
    urls = sorted(set(url_to_site))
    if alive is not None:
        urls = [u for u in urls if alive.get(u, True)]
    if not urls:
        raise NoSeeds("no URLs to build seeds from")
    by_site: dict[str, list[str]] = {}
    for url in urls:
        by_site.setdefault(url_to_site[url], []).append(url)
    ranked = sorted(by_site.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    seeds = []
    for _, site_urls in ranked[:n]:
        components = parse_components(site_urls[0])
        port = f":{components.port}" if components.port is not None else ""
        seeds.append(f"{components.scheme}://{components.host}{port}/")
    return seeds
