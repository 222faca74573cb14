"""Command-line entry point.

One binary, many subcommands: ``normalize``, ``langid {train,predict,eval}``,
``pairscore {train,score,align,eval}``, ``negsample``, ``splits``,
``cv-combos``, ``seeds``, ``crawl``, ``simulate``, ``report``.

Exit codes: 0 success, 1 domain error, 2 usage error.  Every subcommand that
uses randomness accepts ``--seed``; flags override config-file values.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

from . import crawler, datasets, langid, metrics, pairscore
from .errors import BifocalError, ConfigError, UnknownLanguage
from .urls import normalize_url

# ---------------------------------------------------------------------------
# Config file: flat `key = value` lines, '#' comments, typed values.

_PATH_KEYS = {"seeds_file", "lang_model_path", "pair_model_path", "graph"}

_CONFIG_SCHEMA: dict[str, type] = {
    "lang_a": str,
    "lang_b": str,
    "seeds_file": str,
    "graph": str,
    "budget": int,
    "per_host_delay_ms": int,
    "max_depth": int,
    "seed": int,
    "lang_scorer": str,
    "pair_scorer": str,
    "lang_model_path": str,
    "pair_model_path": str,
    "user_agent": str,
}


@dataclass
class ToolConfig:
    lang_a: str | None = None
    lang_b: str | None = None
    seeds_file: str | None = None
    graph: str | None = None
    budget: int | None = None
    per_host_delay_ms: int | None = None
    max_depth: int | None = None
    seed: int | None = None
    lang_scorer: str | None = None
    pair_scorer: str | None = None
    lang_model_path: str | None = None
    pair_model_path: str | None = None
    user_agent: str | None = None

    def override(self, **values) -> "ToolConfig":
        for key, value in values.items():
            if value is not None:
                setattr(self, key, value)
        return self


def _parse_value(key: str, text: str):
    expected = _CONFIG_SCHEMA[key]
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        value = text[1:-1]
    elif text in ("true", "false"):
        value = text == "true"
    else:
        value = text
    if expected is int:
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r} needs an integer, got {text!r}")
    if not isinstance(value, str):
        raise ConfigError(f"key {key!r} needs a string, got {text!r}")
    return value


def load_config(path) -> ToolConfig:
    """Parse a flat typed config file.

    Raises:
        ConfigError: unknown key, wrong type, or a referenced file missing.
    """
    cfg = ToolConfig()
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not sep or not key or not value:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            if key not in _CONFIG_SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            setattr(cfg, key, _parse_value(key, value))
    base = os.path.dirname(os.path.abspath(path))
    for key in _PATH_KEYS:
        value = getattr(cfg, key)
        if value is not None:
            resolved = value if os.path.isabs(value) else os.path.join(base, value)
            if not os.path.exists(resolved):
                raise ConfigError(f"config key {key!r} points to missing file {value!r}")
            setattr(cfg, key, resolved)
    return cfg


def _crawl_config(cfg: ToolConfig) -> crawler.CrawlConfig:
    missing = [k for k in ("lang_a", "lang_b", "seeds_file", "budget") if getattr(cfg, k) is None]
    if missing:
        raise ConfigError(f"config is missing required keys: {', '.join(missing)}")
    with open(cfg.seeds_file, "r", encoding="utf-8") as handle:
        seeds = tuple(line.strip() for line in handle if line.strip())
    kwargs = {}
    for key in ("per_host_delay_ms", "max_depth", "seed", "lang_scorer", "pair_scorer",
                "lang_model_path", "pair_model_path", "user_agent"):
        value = getattr(cfg, key)
        if value is not None:
            kwargs[key] = value
    try:
        return crawler.CrawlConfig(
            lang_a=cfg.lang_a, lang_b=cfg.lang_b, seeds=seeds, budget=cfg.budget, **kwargs
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Report writing

def write_report(log: crawler.CrawlLog, graph: crawler.SiteGraph | None, out_dir) -> None:
    """Decile curves (aggregate and per site) plus a totals summary."""
    os.makedirs(out_dir, exist_ok=True)
    if graph is not None:
        log.mark_parallel_hits(graph)
    events = log.download_events()
    aggregate = metrics.decile_curve(events)
    metrics.write_curve_tsv(aggregate, os.path.join(out_dir, "curve_aggregate.tsv"))

    sites = sorted({site for site, _ in events})
    with open(os.path.join(out_dir, "curve_by_site.tsv"), "w", encoding="utf-8") as handle:
        handle.write("site\tpercent\tparallel_documents\n")
        for site in sites:
            site_curve = metrics.decile_curve([e for e in events if e[0] == site])
            for percent, count in site_curve.points:
                handle.write(f"{site}\t{percent}\t{count}\n")

    counts = log.outcome_counts()
    hits = sum(1 for _, hit in events if hit)
    with open(os.path.join(out_dir, "summary.tsv"), "w", encoding="utf-8") as handle:
        handle.write(f"fetch_events\t{len(log)}\n")
        handle.write(f"stored\t{counts.get(crawler.STORED, 0)}\n")
        handle.write(f"discarded_language\t{counts.get(crawler.DISCARDED_LANGUAGE, 0)}\n")
        handle.write(f"errors\t{counts.get(crawler.ERROR, 0)}\n")
        handle.write(f"downloads\t{len(events)}\n")
        handle.write(f"parallel_hits\t{hits}\n")


# ---------------------------------------------------------------------------
# Subcommand handlers

def _iter_lines(path: str | None, inline: "list[str]"):
    if inline:
        yield from inline
    if path:
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.rstrip("\n")
                if line:
                    yield line
    if not inline and not path:
        for line in sys.stdin:
            line = line.rstrip("\n")
            if line:
                yield line


def _cmd_normalize(args) -> int:
    for url in _iter_lines(args.input, args.urls):
        print(" ".join(normalize_url(url).tokens))
    return 0


def _hyperparams(args) -> langid.NgramHyperparams:
    return langid.NgramHyperparams(
        n_min=args.n_min,
        n_max=args.n_max,
        dim=args.dim,
        bucket_count=args.buckets,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
    )


def _cmd_langid_train(args) -> int:
    data = langid.load_labeled_urls(args.data)
    model = langid.ngram_train(data, _hyperparams(args), seed=args.seed)
    langid.save_model(model, args.model)
    print(f"trained on {len(data)} urls, labels: {' '.join(model.labels)}")
    return 0


def _cmd_langid_predict(args) -> int:
    model = langid.load_model(args.model)
    for url in _iter_lines(args.input, args.urls):
        dist = langid.ngram_predict(model, url)
        if args.full:
            ranked = sorted(dist.items(), key=lambda kv: (-kv[1], kv[0]))
            print(url + "\t" + " ".join(f"{code}\t{prob:.6f}" for code, prob in ranked))
        else:
            best = max(sorted(dist), key=lambda code: dist[code])
            print(f"{url}\t{best}\t{dist[best]:.6f}")
    return 0


def _cmd_langid_eval(args) -> int:
    model = langid.load_model(args.model)
    data = langid.load_labeled_urls(args.data)
    known = set(model.labels)
    for url, lang in data:
        if lang not in known:
            raise UnknownLanguage(
                f"gold label {lang!r} (for {url}) is not among the model labels"
            )
    gold = [lang for _, lang in data]
    predicted = [
        max(sorted(dist := langid.ngram_predict(model, url)), key=lambda c: dist[c])
        for url, _ in data
    ]
    cm = metrics.confusion_matrix(gold, predicted, labels=model.labels)
    print("label\tprecision\trecall\tf1")
    for label in model.labels:
        p, r, f1 = metrics.prf(cm, label)
        print(f"{label}\t{p:.4f}\t{r:.4f}\t{f1:.4f}")
    macro_p, macro_r, macro_f1 = metrics.macro_prf(cm)
    print(f"macro\t{macro_p:.4f}\t{macro_r:.4f}\t{macro_f1:.4f}")
    return 0


def _pair_scorer_from_args(args):
    if args.scorer == "baseline":
        return pairscore.BaselinePairScorer()
    if args.scorer == "model":
        if not args.model:
            raise ConfigError("--scorer model needs --model")
        return pairscore.FeaturePairScorer(pairscore.load_pair_model(args.model))
    raise ConfigError(f"unknown scorer {args.scorer!r}")


def _cmd_pairscore_train(args) -> int:
    data = datasets.read_labeled_pairs(args.data)
    model = pairscore.pair_train(data, seed=args.seed)
    pairscore.save_pair_model(model, args.model)
    print(f"trained on {len(data)} pairs")
    return 0


def _cmd_pairscore_score(args) -> int:
    scorer = _pair_scorer_from_args(args)
    if args.url_a and args.url_b:
        rows = [(args.url_a, args.url_b)]
    else:
        rows = []
        for line in _iter_lines(args.pairs, []):
            parts = line.split("\t")
            rows.append((parts[0], parts[1]))
    for url_a, url_b in rows:
        prob = scorer.probability(url_a, url_b, args.lang_a, args.lang_b)
        print(f"{url_a}\t{url_b}\t{prob:.6f}")
    return 0


def _cmd_pairscore_align(args) -> int:
    scorer = _pair_scorer_from_args(args)
    left = list(_iter_lines(args.left, []))
    right = list(_iter_lines(args.right, []))
    scores = {
        (a, b): scorer.probability(a, b, args.lang_a, args.lang_b)
        for a in left
        for b in right
    }
    for a, b in sorted(pairscore.resolve_one_to_one(scores)):
        print(f"{a}\t{b}")
    return 0


def _cmd_pairscore_eval(args) -> int:
    scorer = _pair_scorer_from_args(args)
    data = datasets.read_labeled_pairs(args.data)
    gold = [rec.label for rec in data]
    predicted = [
        "positive" if scorer.probability(rec.url_a, rec.url_b, rec.lang_a, rec.lang_b) > 0.5
        else "negative"
        for rec in data
    ]
    cm = metrics.confusion_matrix(gold, predicted, labels=("negative", "positive"))
    print("class\tprecision\trecall\tf1")
    for label in cm.labels:
        p, r, f1 = metrics.prf(cm, label)
        print(f"{label}\t{p:.4f}\t{r:.4f}\t{f1:.4f}")
    macro_p, macro_r, macro_f1 = metrics.macro_prf(cm)
    print(f"macro\t{macro_p:.4f}\t{macro_r:.4f}\t{macro_f1:.4f}")
    return 0


def _parse_strategies(text: str):
    strategies = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        method, _, mode = chunk.partition(":")
        if (method, mode) not in datasets.STRATEGIES:
            raise ConfigError(f"unknown strategy {chunk!r}")
        strategies.append((method, mode))
    if not strategies:
        raise ConfigError("no strategies given")
    return tuple(strategies)


def _cmd_negsample(args) -> int:
    positives = [p for p in datasets.read_labeled_pairs(args.pairs) if p.label == "positive"]
    strategies = (
        _parse_strategies(args.strategies) if args.strategies else datasets.DEFAULT_STRATEGIES
    )
    negatives, skipped = datasets.generate_negatives(positives, strategies, seed=args.seed)
    datasets.write_labeled_pairs(negatives, args.out)
    for key, count in sorted(skipped.items()):
        print(f"skipped[{key}]\t{count}", file=sys.stderr)
    print(f"wrote {len(negatives)} negatives to {args.out}")
    return 0


def _cmd_splits(args) -> int:
    corpus = datasets.read_labeled_urls(args.data)
    ratios = tuple(float(r) for r in args.ratios.split(","))
    parts = datasets.split_by_domain(corpus, ratios, seed=args.seed)
    names = {2: ("train", "dev"), 3: ("train", "dev", "test")}.get(
        len(parts), tuple(f"part{i}" for i in range(len(parts)))
    )
    for name, part in zip(names, parts):
        path = f"{args.out_prefix}.{name}.tsv"
        datasets.write_labeled_urls(part, path)
        print(f"{path}\t{len(part)}")
    return 0


def _cmd_cv_combos(args) -> int:
    import json

    positives = [p for p in datasets.read_labeled_pairs(args.pairs) if p.label == "positive"]
    with open(args.links, "r", encoding="utf-8") as handle:
        link_map = {url: tuple(links) for url, links in json.load(handle).items()}
    lang_map = dict(langid.load_labeled_urls(args.url_langs))
    lang_a, _, lang_b = args.langs.partition(",")
    results = datasets.cross_validate_combos(
        positives, link_map, lang_map, {lang_a, lang_b}, k=args.folds, seed=args.seed
    )
    datasets.write_combo_results(results, args.out)
    print(f"wrote {len(results)} combination rows to {args.out}")
    return 0


def _cmd_seeds(args) -> int:
    url_to_site = {}
    alive = {}
    has_flags = False
    for line in _iter_lines(args.urls, []):
        parts = line.split("\t")
        url_to_site[parts[0]] = parts[1] if len(parts) > 1 else crawler.site_of(parts[0])
        if len(parts) > 2:
            has_flags = True
            alive[parts[0]] = parts[2].lower() in ("1", "true", "ok", "yes", "200")
    seeds = crawler.build_seed_list(url_to_site, n=args.top, alive=alive if has_flags else None)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for seed_url in seeds:
            print(seed_url, file=out)
    finally:
        if args.out:
            out.close()
    return 0


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    cfg.override(seed=args.seed, budget=args.budget,
                 lang_scorer=args.lang_scorer, pair_scorer=args.pair_scorer)
    graph_path = args.graph or cfg.graph
    if not graph_path:
        raise ConfigError("simulate needs --graph or a 'graph' config key")
    graph = crawler.SiteGraph.load(graph_path)
    crawl_cfg = _crawl_config(cfg)
    log = crawler.simulate(graph, crawl_cfg)
    log.to_tsv(args.log)
    if args.report:
        write_report(log, graph, args.report)
    counts = log.outcome_counts()
    print(
        f"fetches={len(log)} stored={counts.get(crawler.STORED, 0)} "
        f"discarded={counts.get(crawler.DISCARDED_LANGUAGE, 0)} "
        f"errors={counts.get(crawler.ERROR, 0)}"
    )
    return 0


def _cmd_crawl(args) -> int:
    cfg = load_config(args.config)
    cfg.override(seed=args.seed, budget=args.budget)
    crawl_cfg = _crawl_config(cfg)
    log = crawler.crawl_live(crawl_cfg)
    log.to_tsv(args.log)
    print(f"fetch events: {len(log)}")
    return 0


def _cmd_report(args) -> int:
    log = crawler.CrawlLog.from_tsv(args.log)
    graph = crawler.SiteGraph.load(args.graph) if args.graph else None
    write_report(log, graph, args.out)
    print(f"report written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bifocal",
        description="Focused bilingual crawling toolkit: URL scorers, dataset "
        "builders, and crawl simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="pre-tokenize URLs")
    p.add_argument("urls", nargs="*", help="URLs (default: stdin)")
    p.add_argument("--input", help="file with one URL per line")
    p.set_defaults(func=_cmd_normalize)

    lang = sub.add_parser("langid", help="URL language identification")
    lang_sub = lang.add_subparsers(dest="subcommand", required=True)

    p = lang_sub.add_parser("train", help="train the n-gram classifier")
    p.add_argument("--data", required=True, help="TSV url<TAB>lang")
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--buckets", type=int, default=1 << 20)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.set_defaults(func=_cmd_langid_train)

    p = lang_sub.add_parser("predict", help="predict language from URLs")
    p.add_argument("urls", nargs="*")
    p.add_argument("--input")
    p.add_argument("--model", required=True)
    p.add_argument("--full", action="store_true", help="print the whole distribution")
    p.set_defaults(func=_cmd_langid_predict)

    p = lang_sub.add_parser("eval", help="evaluate a model on labeled URLs")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=_cmd_langid_eval)

    pair = sub.add_parser("pairscore", help="parallel-pair scoring")
    pair_sub = pair.add_subparsers(dest="subcommand", required=True)

    p = pair_sub.add_parser("train", help="train the logistic pair model")
    p.add_argument("--data", required=True, help="labeled pair TSV")
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_pairscore_train)

    p = pair_sub.add_parser("score", help="score URL pairs")
    p.add_argument("--scorer", default="baseline", choices=("baseline", "model"))
    p.add_argument("--model")
    p.add_argument("--pairs", help="TSV url_a<TAB>url_b")
    p.add_argument("--url-a")
    p.add_argument("--url-b")
    p.add_argument("--lang-a")
    p.add_argument("--lang-b")
    p.set_defaults(func=_cmd_pairscore_score)

    p = pair_sub.add_parser("align", help="1-to-1 alignment of two URL lists")
    p.add_argument("--scorer", default="baseline", choices=("baseline", "model"))
    p.add_argument("--model")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--lang-a")
    p.add_argument("--lang-b")
    p.set_defaults(func=_cmd_pairscore_align)

    p = pair_sub.add_parser("eval", help="classification metrics on labeled pairs")
    p.add_argument("--scorer", default="baseline", choices=("baseline", "model"))
    p.add_argument("--model")
    p.add_argument("--data", required=True)
    p.set_defaults(func=_cmd_pairscore_eval)

    p = sub.add_parser("negsample", help="generate synthetic negative pairs")
    p.add_argument("--pairs", required=True, help="positive pair TSV")
    p.add_argument("--strategies", help="comma list like random_match:bi,max_jaccard:mono")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_negsample)

    p = sub.add_parser("splits", help="domain-disjoint corpus splits")
    p.add_argument("--data", required=True, help="labeled URL TSV")
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_splits)

    p = sub.add_parser("cv-combos", help="cross-validate negative strategy combinations")
    p.add_argument("--pairs", required=True, help="positive pair TSV")
    p.add_argument("--links", required=True, help="JSON object: url -> outlinked urls")
    p.add_argument("--url-langs", required=True, help="TSV url<TAB>lang for linked URLs")
    p.add_argument("--langs", required=True, help="two codes, e.g. eng,fra")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cv_combos)

    p = sub.add_parser("seeds", help="build a seed list from a URL inventory")
    p.add_argument("--urls", required=True, help="TSV url<TAB>site[<TAB>alive]")
    p.add_argument("--top", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_seeds)

    p = sub.add_parser("simulate", help="deterministic crawl over a site-graph fixture")
    p.add_argument("--graph", help="site graph JSON (or 'graph' config key)")
    p.add_argument("--config", required=True)
    p.add_argument("--log", required=True, help="output crawl log TSV")
    p.add_argument("--report", help="directory for decile-curve report")
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--lang-scorer", dest="lang_scorer")
    p.add_argument("--pair-scorer", dest="pair_scorer")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("crawl", help="live crawl (HTTP)")
    p.add_argument("--config", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int)
    p.set_defaults(func=_cmd_crawl)

    p = sub.add_parser("report", help="decile curves and summary from a crawl log")
    p.add_argument("--log", required=True)
    p.add_argument("--graph", help="site graph for parallel ground truth")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def dispatch(argv) -> int:
    """Route argv to a subcommand; 0 success, 1 domain error, 2 usage error."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BifocalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
