"""End-to-end pipeline runs composed by the CLI subcommands.

Every artifact-writing run stamps its delimited outputs with a comment
header carrying the configuration hash and SHA-256 checksums of its inputs;
a timestamp line is added unless the run is deterministic. Reruns with
identical inputs and configuration produce byte-identical outputs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import analytics, corpus as corpus_mod, disambig, search, sentiment, taxonomy as tax_mod
from .config import ConfigError, RunConfig
from .protocol import BridgeClient
from .wordnet import WordNetStore, load_wordnet, save_store, synsets_of

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PENDING = 2

MENTION_CSV_COLUMNS = (
    "doc", "imdb_id", "year", "sentence", "start", "end", "title", "surface",
    "plural", "sense", "sense_confidence", "ner", "cast_match", "professional",
    "sentiment", "sentiment_confidence")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()[:16]


def _header_lines(config: RunConfig, inputs: dict[str, Path]) -> list[str]:
    lines = [f"# config: {config.config_hash()}"]
    for name in sorted(inputs):
        lines.append(f"# input {name}: {_sha256(inputs[name])}")
    if not config.deterministic:
        lines.append(f"# generated: {datetime.now(timezone.utc).isoformat()}")
    return lines


def write_csv_report(path: Path, config: RunConfig, inputs: dict[str, Path],
                     columns: tuple[str, ...], rows: list[tuple]) -> None:
    buffer = io.StringIO()
    for line in _header_lines(config, inputs):
        buffer.write(line + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    path.write_text(buffer.getvalue(), "utf-8")


def read_csv_report(path: Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        data_lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(data_lines))


@dataclass
class RunResult:
    exit_code: int
    summary: dict = field(default_factory=dict)
    outputs: list[Path] = field(default_factory=list)


def _load_store(config: RunConfig) -> WordNetStore:
    config.require_paths("wordnet_dir")
    return load_wordnet(config.wordnet_dir, version=config.wordnet_version)


def _curation(config: RunConfig, store: WordNetStore) -> tax_mod.CurationList:
    return tax_mod.load_curation(store, config.curation_removed, config.curation_manual)


# --- build-taxonomy ---------------------------------------------------------------

def _ensure_output(config: RunConfig) -> Path:
    if config.output_dir is None:
        raise ConfigError("config key 'output_dir' is required")
    config.output_dir.mkdir(parents=True, exist_ok=True)
    return config.output_dir


def build_taxonomy_run(config: RunConfig) -> RunResult:
    config.require_paths("soc_csv")
    _ensure_output(config)
    store = _load_store(config)
    curation = _curation(config, store)
    soc_entries = tax_mod.parse_soc(config.soc_csv)

    stoplist = tax_mod.split_stoplist()
    candidates = {entry.title.lower() for entry in soc_entries}
    for entry in soc_entries:
        candidates.update(c.lower() for c in tax_mod.candidate_substrings(entry.title, stoplist))

    title_synsets = tax_mod.professional_synsets(candidates, store, curation)
    taxonomy = tax_mod.synonym_expand(title_synsets, store, soc_entries)

    if config.map_titles:
        top_titles = list(config.map_titles)
    elif config.map_titles_file is not None:
        config.require_paths("map_titles_file")
        top_titles = [line.strip() for line in
                      config.map_titles_file.read_text("utf-8").splitlines()
                      if line.strip() and not line.startswith("#")]
    else:
        top_titles = sorted(taxonomy.title_synsets)
    pending = tax_mod.map_to_soc(taxonomy, soc_entries, curation, top_titles, store)

    out = config.output_dir
    taxonomy_path = out / "taxonomy.json"
    tax_mod.save_taxonomy(taxonomy, store, taxonomy_path)
    store_path = out / "wordnet.snapshot"
    save_store(store, store_path)

    pending_path = out / "pending_curation.csv"
    inputs = {"soc_csv": config.soc_csv, "wordnet_data": config.wordnet_dir / "data.noun"}
    write_csv_report(
        pending_path, config, inputs,
        ("title", "synset", "candidate_groups", "reason"),
        [(p.title, p.synset, "|".join(p.candidate_groups), p.reason) for p in pending])

    unigrams = sum(1 for t in taxonomy.titles if len(t.split()) == 1)
    synsets = {s for sids in taxonomy.title_synsets.values() for s in sids}
    summary = {
        "titles": len(taxonomy.titles),
        "unigram_titles": unigrams,
        "professional_synsets": len(synsets),
        "mapped_synsets": len(taxonomy.synset_soc),
        "pending": len(pending),
        "new_titles": sorted(t for t, p in taxonomy.provenance.items() if p == "synonym"),
    }
    code = EXIT_PENDING if pending else EXIT_OK
    return RunResult(code, summary, [taxonomy_path, store_path, pending_path])


def scale_comparability(titles: int, synsets: int,
                        expected_titles: int = 10952, expected_synsets: int = 1615,
                        tolerance: float = 0.15) -> dict:
    """Full-scale comparability check: counts within +/-15% of the reference."""
    def within(actual: int, expected: int) -> bool:
        return abs(actual - expected) <= tolerance * expected
    return {
        "titles": titles, "expected_titles": expected_titles,
        "synsets": synsets, "expected_synsets": expected_synsets,
        "titles_ok": within(titles, expected_titles),
        "synsets_ok": within(synsets, expected_synsets),
        "ok": within(titles, expected_titles) and within(synsets, expected_synsets),
    }


# --- ingest --------------------------------------------------------------------------

def ingest_run(config: RunConfig) -> RunResult:
    config.require_paths("corpus_dir", "metadata")
    _ensure_output(config)
    corpus = corpus_mod.ingest_corpus(config.corpus_dir, config.metadata)
    snapshot_path = config.output_dir / "corpus.snapshot"
    corpus_mod.save_corpus(corpus, snapshot_path)

    stats = corpus_mod.corpus_stats_rows(corpus)
    inputs = {"metadata": config.metadata}
    outputs = [snapshot_path]
    for name, columns in (("by_year", ("year", "title_type", "documents")),
                          ("by_genre", ("genre", "documents")),
                          ("by_country", ("country", "documents"))):
        path = config.output_dir / f"corpus_stats_{name}.csv"
        write_csv_report(path, config, inputs, columns, stats[name])
        outputs.append(path)
    summary = {
        "documents": len(corpus.documents),
        "sentences": sum(len(d.sentences) for d in corpus.documents.values()),
        "unigrams": sum(corpus.totals.total(y, 1) for y in corpus.totals.years()),
    }
    return RunResult(EXIT_OK, summary, outputs)


# --- mine ----------------------------------------------------------------------------

def _providers(config: RunConfig, store: WordNetStore, cast: disambig.CastList):
    if config.wsd_endpoint:
        wsd = disambig.HttpWsd(BridgeClient(config.wsd_endpoint), store)
    else:
        wsd = disambig.BaselineWsd()
    if config.ner_endpoint:
        ner = disambig.HttpNer(BridgeClient(config.ner_endpoint))
    else:
        ner = disambig.BaselineNer(cast)
    if config.absa_endpoint:
        absa = sentiment.HttpAbsa(BridgeClient(config.absa_endpoint))
    else:
        absa = sentiment.BaselineAbsa(config=sentiment.SrdConfig(config.srd, config.srd_mode))
    return wsd, ner, absa


def mine_run(config: RunConfig) -> RunResult:
    config.require_paths("output_dir")
    store_path = config.output_dir / "wordnet.snapshot"
    taxonomy_path = config.output_dir / "taxonomy.json"
    corpus_path = config.output_dir / "corpus.snapshot"
    for path in (taxonomy_path, corpus_path):
        if not path.exists():
            raise FileNotFoundError(f"missing pipeline artifact: {path} (run earlier stages first)")

    store = _load_store(config)
    taxonomy = tax_mod.load_taxonomy(taxonomy_path, store)
    corpus = corpus_mod.load_corpus(corpus_path)
    cast = disambig.load_cast_list(config.cast_list) if config.cast_list \
        else disambig.CastList({})
    wsd, ner, absa = _providers(config, store, cast)

    index = search.build_index(corpus)
    searcher = search.MentionSearcher(index, corpus, taxonomy.titles)
    raw_mentions = searcher.search_all()

    classified, wsd_undecided = disambig.classify_all(
        raw_mentions, corpus, store, taxonomy, wsd, ner, cast)

    professional = [c for c in classified if c.professional]
    sentences = {(doc_id, s.index): s.tokens
                 for doc_id, doc in corpus.documents.items() for s in doc.sentences}
    labeled, absa_undecided = sentiment.apply_sentiment(professional, sentences, absa)
    sentiments = {id(lm.classified): lm for lm in labeled}

    rows = []
    for cm in classified:
        m = cm.mention
        attrs = corpus.documents[m.doc].attrs
        lm = sentiments.get(id(cm))
        rows.append((
            m.doc, attrs.imdb_id, attrs.year, m.sentence, m.start, m.end, m.title,
            m.surface, int(m.plural),
            store.name_of(cm.sense) if cm.sense is not None else "",
            f"{cm.sense_confidence:.4f}", cm.ner, int(cm.cast_match), int(cm.professional),
            lm.sentiment if lm else "",
            f"{lm.sentiment_confidence:.4f}" if lm else ""))

    mentions_path = config.output_dir / "mentions.csv"
    inputs = {"taxonomy": taxonomy_path, "corpus": corpus_path}
    write_csv_report(mentions_path, config, inputs, MENTION_CSV_COLUMNS, rows)

    summary = {
        "mentions": len(classified),
        "professional": len(professional),
        "professions": len({c.title for c in classified if c.professional}),
        "undecided_wsd": wsd_undecided,
        "undecided_absa": absa_undecided,
    }
    logger.info("mined %d mentions, covering %d professions",
                summary["mentions"], summary["professions"])
    return RunResult(EXIT_OK, summary, [mentions_path])


def load_mention_rows(path: Path, corpus: corpus_mod.Corpus) -> list[analytics.MentionRow]:
    rows = []
    for record in read_csv_report(path):
        rows.append(analytics.MentionRow(
            doc=record["doc"],
            year=int(record["year"]),
            sentence=int(record["sentence"]),
            start=int(record["start"]),
            end=int(record["end"]),
            title=record["title"],
            plural=record["plural"] == "1",
            professional=record["professional"] == "1",
            sentiment=record["sentiment"] or None))
    return rows


# --- analyze ----------------------------------------------------------------------------

def analyze_run(config: RunConfig) -> RunResult:
    config.require_paths("output_dir")
    out = config.output_dir
    mentions_path = out / "mentions.csv"
    corpus_path = out / "corpus.snapshot"
    taxonomy_path = out / "taxonomy.json"
    for path in (mentions_path, corpus_path, taxonomy_path):
        if not path.exists():
            raise FileNotFoundError(f"missing pipeline artifact: {path} (run earlier stages first)")

    store = _load_store(config)
    taxonomy = tax_mod.load_taxonomy(taxonomy_path, store)
    corpus = corpus_mod.load_corpus(corpus_path)
    rows = load_mention_rows(mentions_path, corpus)
    year_range = (config.year_min, config.year_max)

    titles = config.analyze_titles or sorted(
        {t for t in taxonomy.titles if taxonomy.soc_groups_of(t)})
    groups = config.analyze_groups or sorted(set(taxonomy.synset_soc.values()))
    subjects = [(t, "title") for t in titles] + [(g, "group") for g in groups]

    inputs = {"mentions": mentions_path, "taxonomy": taxonomy_path, "corpus": corpus_path}
    skipped: list[tuple] = []

    freq_rows, sent_rows, trend_rows, glm_rows = [], [], [], []
    freq_series_by_group: dict[str, analytics.FrequencySeries] = {}
    for subject, kind in subjects:
        series = analytics.frequency_series(rows, corpus.totals, taxonomy, subject,
                                            year_range=year_range)
        if kind == "group":
            freq_series_by_group[subject] = series
        for p in series.points:
            freq_rows.append((subject, kind, p.year, p.count, p.trials,
                              f"{p.proportion:.10g}"))
        try:
            trend = analytics.trend_of(series, alpha=config.alpha)
            trend_rows.append((subject, kind, "frequency", trend.n,
                               f"{trend.rho:.10g}", f"{trend.p_value:.10g}", trend.direction))
        except analytics.AnalyticsError as err:
            skipped.append(("trend-frequency", subject, str(err)))

        sseries = analytics.sentiment_series(rows, taxonomy, subject, year_range=year_range)
        for p in sseries.points:
            sent_rows.append((subject, kind, p.year, p.positive, p.opinionated,
                              f"{p.proportion:.10g}"))
        try:
            strend = analytics.trend_of(sseries, alpha=config.alpha)
            trend_rows.append((subject, kind, "sentiment", strend.n,
                               f"{strend.rho:.10g}", f"{strend.p_value:.10g}", strend.direction))
        except analytics.AnalyticsError as err:
            skipped.append(("trend-sentiment", subject, str(err)))

        for response in ("frequency", "sentiment"):
            try:
                design = analytics.build_design(
                    corpus, rows, response, subject, taxonomy,
                    min_config_titles=config.min_config_titles)
                model = analytics.glm_fit(design)
            except analytics.AnalyticsError as err:
                skipped.append((f"glm-{response}", subject, str(err)))
                continue
            for i, name in enumerate(model.predictors):
                glm_rows.append((subject, kind, response, name,
                                 f"{model.coefficients[i]:.10g}",
                                 f"{model.standard_errors[i]:.10g}",
                                 f"{model.z_values[i]:.10g}",
                                 f"{model.p_values[i]:.10g}"))

    emp_rows = []
    if config.employment_csv is not None:
        config.require_paths("employment_csv")
        table = analytics.load_employment(config.employment_csv)
        inputs["employment"] = config.employment_csv
        for group in groups:
            series = freq_series_by_group.get(group)
            if series is None:
                continue
            try:
                trend = analytics.employment_correlation(
                    series, table, group, year_range=(max(1999, config.year_min),
                                                      config.year_max),
                    alpha=config.alpha)
            except analytics.AnalyticsError as err:
                skipped.append(("employment", group, str(err)))
                continue
            emp_rows.append((group, trend.n, f"{trend.rho:.10g}",
                             f"{trend.p_value:.10g}", trend.direction))

    outputs = []
    for name, columns, data in (
            ("frequency.csv", ("subject", "kind", "year", "count", "trials", "proportion"),
             freq_rows),
            ("sentiment.csv", ("subject", "kind", "year", "positive", "opinionated",
                               "proportion"), sent_rows),
            ("trends.csv", ("subject", "kind", "measure", "n", "rho", "p_value",
                            "direction"), trend_rows),
            ("glm.csv", ("subject", "kind", "response", "predictor", "coefficient",
                         "std_error", "z", "p_value"), glm_rows),
            ("employment_correlation.csv", ("group", "n", "rho", "p_value", "direction"),
             emp_rows),
            ("analyze_skipped.csv", ("stage", "subject", "detail"), skipped)):
        path = out / name
        write_csv_report(path, config, inputs, columns, data)
        outputs.append(path)

    summary = {"subjects": len(subjects), "trends": len(trend_rows),
               "glm_rows": len(glm_rows), "skipped": len(skipped)}
    return RunResult(EXIT_OK, summary, outputs)


# --- evaluate ------------------------------------------------------------------------------

def evaluate_disambig_run(config: RunConfig, labeled_path: Path) -> RunResult:
    store = _load_store(config)
    config.require_paths("output_dir")
    taxonomy = tax_mod.load_taxonomy(config.output_dir / "taxonomy.json", store)
    cast = disambig.load_cast_list(config.cast_list) if config.cast_list \
        else disambig.CastList({})
    wsd, ner, _ = _providers(config, store, cast)
    pool = disambig.professional_pool(taxonomy)

    pairs = []
    for tokens, start, end, title, gold in disambig.load_labeled_mentions(labeled_path):
        sentence = corpus_mod.Sentence(index=0, tokens=tuple(t.lower() for t in tokens),
                                       orig=tuple(tokens))
        candidates = synsets_of(store, title)
        if not candidates and " " in title:
            candidates = synsets_of(store, title.split()[-1])
        sense, _conf = wsd.disambiguate(sentence.tokens, (start, end), candidates) \
            if candidates else (None, 0.0)
        ner_label = ner.label(sentence, (start, end), "eval")
        cast_match = cast.matches("eval", " ".join(sentence.tokens[start:end]))
        predicted = (sense is not None and sense in pool
                     and ner_label != "organization" and not cast_match)
        pairs.append((predicted, gold))
    metrics = disambig.evaluate(pairs)
    summary = {"accuracy": round(metrics.accuracy, 4),
               "precision": round(metrics.precision, 4),
               "recall": round(metrics.recall, 4),
               "tp": metrics.tp, "fp": metrics.fp, "fn": metrics.fn, "tn": metrics.tn}
    return RunResult(EXIT_OK, summary, [])


def evaluate_sentiment_run(config: RunConfig, dataset_path: Path,
                           split: str = "test") -> RunResult:
    dataset = sentiment.load_dataset_tsv(dataset_path)
    rows = dataset.split_rows(split) if split else dataset.rows
    if not rows:
        raise sentiment.SentimentError(f"no rows in split {split!r}")
    provider = sentiment.BaselineAbsa(config=sentiment.SrdConfig(config.srd, config.srd_mode)) \
        if not config.absa_endpoint else sentiment.HttpAbsa(BridgeClient(config.absa_endpoint))
    predicted = sentiment.predict_rows(rows, provider)
    metrics = sentiment.evaluate_sentiment([r.gold for r in rows], predicted)
    summary = {
        "split": split, "rows": len(rows),
        "accuracy": round(metrics.accuracy, 4),
        "macro_f1": round(metrics.macro_f1, 4),
        "per_class": {label: {"precision": round(c.precision, 4),
                              "recall": round(c.recall, 4),
                              "f1": round(c.f1, 4), "support": c.support}
                      for label, c in metrics.per_class.items()},
    }
    return RunResult(EXIT_OK, summary, [])
