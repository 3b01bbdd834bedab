"""Trend and attribute statistics over the mention corpus.

Frequency series divide professional mention counts by the year's word
n-gram total (n = words in the title); sentiment series divide positive by
opinionated counts. Trends are Spearman rank correlations against time with
exact permutation p-values for tiny samples. Media-attribute effects come
from a binomial-logit GLM with per-row trial counts as prior weights,
fitted by hand-rolled IRLS with step halving.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import special

from .corpus import Corpus, document_ngram_total, NgramTotals
from .taxonomy import ExpandedTaxonomy

DEFAULT_ALPHA = 0.05
MIN_CONFIG_TITLES = 30
YEAR_CENTER = 1950
EXACT_PERMUTATION_MAX_N = 8
SEPARATION_COEF_LIMIT = 30.0


class AnalyticsError(Exception):
    pass


class ConstantSeriesError(AnalyticsError):
    pass


class SeparationError(AnalyticsError):
    pass


class RankDeficientError(AnalyticsError):
    pass


class ConvergenceError(AnalyticsError):
    pass


# --- mention rows -------------------------------------------------------------

@dataclass(frozen=True)
class MentionRow:
    """One classified+labeled mention as it appears in the mined CSV."""
    doc: str
    year: int
    sentence: int
    start: int
    end: int
    title: str
    plural: bool
    professional: bool
    sentiment: str | None = None


# --- frequency and sentiment series --------------------------------------------

@dataclass(frozen=True)
class FreqPoint:
    year: int
    count: int
    trials: int
    proportion: float


@dataclass
class FrequencySeries:
    subject: str
    kind: str                  # "title" or "group"
    points: list[FreqPoint]
    member_bases: dict[str, dict[int, int]] = field(default_factory=dict)

    def years(self) -> list[int]:
        return [p.year for p in self.points]

    def proportions(self) -> list[float]:
        return [p.proportion for p in self.points]


def _title_word_count(title: str) -> int:
    return len(title.split())


def frequency_series(rows: Iterable[MentionRow], totals: NgramTotals,
                     taxonomy: ExpandedTaxonomy, subject: str,
                     year_range: tuple[int, int] | None = None) -> FrequencySeries:
    """Yearly mention frequency of a title or SOC major group.

    Title: professional mentions (singular+plural) over the year's n-gram
    total. Group: the sum of its member titles' proportions, with each
    member's trial base recorded; the group's count column is the plain sum
    of member counts.
    """
    rows = list(rows)
    subject_key = subject.lower()
    if subject_key in taxonomy.titles:
        return _title_frequency(rows, totals, subject_key, year_range)
    group_titles = taxonomy.titles_of_group(subject)
    if not group_titles:
        raise AnalyticsError(f"unknown subject {subject!r} (neither title nor mapped group)")
    members = [_title_frequency(rows, totals, title, year_range) for title in group_titles]
    years = sorted({p.year for series in members for p in series.points})
    points = []
    bases: dict[str, dict[int, int]] = {}
    for series in members:
        bases[series.subject] = {p.year: p.trials for p in series.points}
    for year in years:
        count = sum(p.count for s in members for p in s.points if p.year == year)
        proportion = sum(p.proportion for s in members for p in s.points if p.year == year)
        points.append(FreqPoint(year=year, count=count, trials=0, proportion=proportion))
    return FrequencySeries(subject=subject, kind="group", points=points, member_bases=bases)


def _title_frequency(rows: Iterable[MentionRow], totals: NgramTotals, title: str,
                     year_range: tuple[int, int] | None) -> FrequencySeries:
    n = _title_word_count(title)
    counts: dict[int, int] = {}
    for row in rows:
        if row.professional and row.title == title:
            counts[row.year] = counts.get(row.year, 0) + 1
    points = []
    for year in totals.years():
        if year_range and not year_range[0] <= year <= year_range[1]:
            continue
        trials = totals.total(year, n)
        if trials <= 0:
            continue
        count = counts.get(year, 0)
        points.append(FreqPoint(year=year, count=count, trials=trials,
                                proportion=count / trials))
    return FrequencySeries(subject=title, kind="title", points=points)


@dataclass(frozen=True)
class SentPoint:
    year: int
    positive: int
    opinionated: int
    proportion: float


@dataclass
class SentimentSeries:
    subject: str
    kind: str
    points: list[SentPoint]
    omitted_years: list[int] = field(default_factory=list)

    def years(self) -> list[int]:
        return [p.year for p in self.points]

    def proportions(self) -> list[float]:
        return [p.proportion for p in self.points]


def sentiment_series(rows: Iterable[MentionRow], taxonomy: ExpandedTaxonomy,
                     subject: str,
                     year_range: tuple[int, int] | None = None) -> SentimentSeries:
    """Yearly proportion of positive among opinionated mentions.

    Group subjects pool the counts of their member titles. Years with no
    opinionated mentions are omitted from the series and listed separately.
    """
    subject_key = subject.lower()
    if subject_key in taxonomy.titles:
        titles, kind = {subject_key}, "title"
    else:
        titles = set(taxonomy.titles_of_group(subject))
        if not titles:
            raise AnalyticsError(f"unknown subject {subject!r} (neither title nor mapped group)")
        kind = "group"
    positive: dict[int, int] = {}
    opinionated: dict[int, int] = {}
    seen_years: set[int] = set()
    for row in rows:
        if not row.professional or row.title not in titles or row.sentiment is None:
            continue
        if year_range and not year_range[0] <= row.year <= year_range[1]:
            continue
        seen_years.add(row.year)
        if row.sentiment in ("positive", "negative"):
            opinionated[row.year] = opinionated.get(row.year, 0) + 1
            if row.sentiment == "positive":
                positive[row.year] = positive.get(row.year, 0) + 1
    points, omitted = [], []
    for year in sorted(seen_years):
        op = opinionated.get(year, 0)
        if op == 0:
            omitted.append(year)
            continue
        pos = positive.get(year, 0)
        points.append(SentPoint(year=year, positive=pos, opinionated=op,
                                proportion=pos / op))
    return SentimentSeries(subject=subject, kind=kind, points=points, omitted_years=omitted)


# --- Spearman rank correlation ---------------------------------------------------

@dataclass(frozen=True)
class TrendResult:
    rho: float
    p_value: float
    n: int
    direction: str          # increasing | decreasing | none
    alpha: float = DEFAULT_ALPHA


def average_ranks(values: Sequence[float]) -> list[float]:
    """Midranks: ties share the average of the ranks they would occupy."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        midrank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = midrank
        i = j + 1
    return ranks


def _pearson(x: Sequence[float], y: Sequence[float]) -> float:
    ax, ay = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ax -= ax.mean()
    ay -= ay.mean()
    denom = math.sqrt(float(ax @ ax) * float(ay @ ay))
    if denom == 0.0:
        raise ConstantSeriesError("correlation undefined for a constant series")
    return float(ax @ ay) / denom


def _direction(rho: float, p: float, alpha: float) -> str:
    if p < alpha and rho > 0:
        return "increasing"
    if p < alpha and rho < 0:
        return "decreasing"
    return "none"


def _t_tail_p(rho: float, n: int) -> float:
    # Two-sided p of t = rho*sqrt((n-2)/(1-rho^2)) against Student t(n-2),
    # via the regularized incomplete beta: P(|T| > t) = I(df/(df+t^2); df/2, 1/2).
    if abs(rho) >= 1.0 - 1e-15:
        return 0.0
    df = n - 2
    t2 = rho * rho * df / (1.0 - rho * rho)
    return float(special.betainc(df / 2.0, 0.5, df / (df + t2)))


def spearman(x: Sequence[float], y: Sequence[float],
             alpha: float = DEFAULT_ALPHA) -> TrendResult:
    """Spearman rho with a two-sided p-value and trend direction.

    Rho is the Pearson correlation of midranks. For n <= 8 the p-value is
    exact (all n! permutations of y's ranks); larger samples use the
    Student-t approximation with n-2 degrees of freedom.
    """
    n = len(x)
    if n != len(y):
        raise AnalyticsError("series lengths differ")
    if n < 4:
        raise AnalyticsError(f"need n >= 4 points, got {n}")
    if any(not math.isfinite(float(v)) for v in list(x) + list(y)):
        raise AnalyticsError("series must be finite")
    rx, ry = average_ranks(x), average_ranks(y)
    rho = _pearson(rx, ry)

    if n <= EXACT_PERMUTATION_MAX_N:
        hits = 0
        total = 0
        observed = abs(rho) - 1e-12
        for perm in permutations(ry):
            total += 1
            if abs(_pearson(rx, perm)) >= observed:
                hits += 1
        p = hits / total
    else:
        p = _t_tail_p(rho, n)
    return TrendResult(rho=rho, p_value=p, n=n, direction=_direction(rho, p, alpha),
                       alpha=alpha)


def trend_of(series: FrequencySeries | SentimentSeries,
             alpha: float = DEFAULT_ALPHA) -> TrendResult:
    return spearman(series.years(), series.proportions(), alpha=alpha)


# --- GLM design -------------------------------------------------------------------

@dataclass
class AttributeDesign:
    """Per-IMDb-title design rows for the media-attribute regression."""
    predictors: list[str]
    matrix: np.ndarray            # shape (rows, len(predictors)), no intercept
    successes: np.ndarray
    trials: np.ndarray
    doc_ids: list[str]
    dropped_configs: int          # rows dropped by the rare-configuration rule
    response: str                 # "frequency" or "sentiment"
    subject: str


def _doc_configuration(attrs) -> tuple:
    return (attrs.title_type, tuple(sorted(attrs.genres)), tuple(sorted(attrs.countries)))


def build_design(corpus: Corpus, rows: Iterable[MentionRow], response: str,
                 subject: str, taxonomy: ExpandedTaxonomy,
                 min_config_titles: int = MIN_CONFIG_TITLES,
                 year_center: int = YEAR_CENTER) -> AttributeDesign:
    """One design row per IMDb title: centered year, 0/1 genre and country
    indicators, title-type indicators (movie is the reference level), and
    (successes, trials) for the chosen response.

    Rows whose attribute configuration (title type, genre set, country set)
    covers fewer than ``min_config_titles`` IMDb titles in the corpus are
    dropped, as are rows with zero trials.
    """
    if response not in ("frequency", "sentiment"):
        raise AnalyticsError(f"unknown response kind {response!r}")
    subject_key = subject.lower()
    if subject_key in taxonomy.titles:
        titles = {subject_key}
    else:
        titles = set(taxonomy.titles_of_group(subject))
        if not titles:
            raise AnalyticsError(f"unknown subject {subject!r}")

    config_counts: dict[tuple, int] = {}
    for doc in corpus.documents.values():
        key = _doc_configuration(doc.attrs)
        config_counts[key] = config_counts.get(key, 0) + 1

    per_doc: dict[str, tuple[int, int]] = {}
    mention_stats: dict[str, list[int]] = {}
    for row in rows:
        if not row.professional or row.title not in titles:
            continue
        stats = mention_stats.setdefault(row.doc, [0, 0, 0])
        stats[0] += 1
        if row.sentiment in ("positive", "negative"):
            stats[1] += 1
            if row.sentiment == "positive":
                stats[2] += 1

    genres = sorted({g for d in corpus.documents.values() for g in d.attrs.genres})
    countries = sorted({c for d in corpus.documents.values() for c in d.attrs.countries})
    type_levels = [t for t in ("tv_episode", "other")
                   if any(d.attrs.title_type == t for d in corpus.documents.values())]
    predictors = (["year"] + [f"genre:{g}" for g in genres]
                  + [f"country:{c}" for c in countries]
                  + [f"type:{t}" for t in type_levels])

    ngram_n = min(_title_word_count(t) for t in titles)
    matrix_rows, successes, trials, doc_ids = [], [], [], []
    dropped = 0
    for doc_id in corpus.doc_ids():
        doc = corpus.documents[doc_id]
        if config_counts[_doc_configuration(doc.attrs)] < min_config_titles:
            dropped += 1
            continue
        stats = mention_stats.get(doc_id, [0, 0, 0])
        if response == "frequency":
            s, t = stats[0], document_ngram_total(doc, ngram_n)
        else:
            s, t = stats[2], stats[1]
        if t <= 0:
            dropped += 1
            continue
        vector = [float(doc.attrs.year - year_center)]
        vector += [1.0 if g in doc.attrs.genres else 0.0 for g in genres]
        vector += [1.0 if c in doc.attrs.countries else 0.0 for c in countries]
        vector += [1.0 if doc.attrs.title_type == t_level else 0.0 for t_level in type_levels]
        matrix_rows.append(vector)
        successes.append(s)
        trials.append(t)
        doc_ids.append(doc_id)

    if not matrix_rows:
        raise AnalyticsError("no design rows left after filtering")
    return AttributeDesign(
        predictors=predictors,
        matrix=np.asarray(matrix_rows, dtype=float),
        successes=np.asarray(successes, dtype=float),
        trials=np.asarray(trials, dtype=float),
        doc_ids=doc_ids,
        dropped_configs=dropped,
        response=response,
        subject=subject,
    )


# --- binomial-logit GLM via IRLS ----------------------------------------------------

@dataclass
class GlmModel:
    predictors: list[str]                  # includes "intercept" first
    coefficients: np.ndarray
    standard_errors: np.ndarray
    z_values: np.ndarray
    p_values: np.ndarray
    deviance: float
    deviance_path: list[float]
    iterations: int
    converged: bool
    dropped_predictors: list[str]

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.predictors.index(name)])

    def p_value(self, name: str) -> float:
        return float(self.p_values[self.predictors.index(name)])


def _binomial_deviance(s: np.ndarray, t: np.ndarray, mu: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        term1 = np.where(s > 0, s * np.log(s / (t * mu)), 0.0)
        term2 = np.where(t - s > 0, (t - s) * np.log((t - s) / (t * (1.0 - mu))), 0.0)
    return float(2.0 * np.sum(term1 + term2))


def glm_fit(design: AttributeDesign, tol: float = 1e-8, max_iter: int = 100) -> GlmModel:
    """Binomial GLM with logit link and trial counts as prior weights.

    Iteratively reweighted least squares with step halving, so the deviance
    never increases between iterations. Standard errors come from the
    inverse Fisher information at the optimum; Wald z tests use two-sided
    normal p-values. All-zero predictor columns are dropped (and reported);
    remaining rank deficiency and complete separation raise.
    """
    t = design.trials.astype(float)
    s = design.successes.astype(float)
    if np.any(t <= 0):
        raise AnalyticsError("every design row needs trials > 0")
    if np.any(s < 0) or np.any(s > t):
        raise AnalyticsError("successes must lie in [0, trials]")

    x = np.column_stack([np.ones(len(t)), design.matrix])
    names = ["intercept"] + list(design.predictors)
    keep = [i for i in range(x.shape[1]) if i == 0 or np.any(x[:, i] != 0.0)]
    dropped = [names[i] for i in range(x.shape[1]) if i not in keep]
    x = x[:, keep]
    names = [names[i] for i in keep]
    if np.linalg.matrix_rank(x) < x.shape[1]:
        raise RankDeficientError("design matrix is rank deficient after dropping zero columns")

    y = s / t
    # Empirical-proportion start (not itself a model fit, so the deviance
    # path begins at the first IRLS iterate).
    mu = (s + 0.5) / (t + 1.0)
    eta = np.log(mu / (1.0 - mu))
    beta: np.ndarray | None = None
    deviance = math.inf
    path: list[float] = []
    converged = False
    iterations = 0

    for iteration in range(1, max_iter + 1):
        iterations = iteration
        variance = mu * (1.0 - mu)
        weights = t * variance
        z = eta + (y - mu) / variance
        xtw = x.T * weights
        try:
            new_beta = np.linalg.solve(xtw @ x, xtw @ z)
        except np.linalg.LinAlgError:
            raise RankDeficientError("weighted normal equations are singular")

        if beta is None:
            candidate = new_beta
            eta_c = x @ candidate
            mu_c = np.clip(1.0 / (1.0 + np.exp(-eta_c)), 1e-12, 1.0 - 1e-12)
            dev_c = _binomial_deviance(s, t, mu_c)
        else:
            step = new_beta - beta
            factor = 1.0
            for _ in range(32):
                candidate = beta + factor * step
                eta_c = x @ candidate
                mu_c = np.clip(1.0 / (1.0 + np.exp(-eta_c)), 1e-12, 1.0 - 1e-12)
                dev_c = _binomial_deviance(s, t, mu_c)
                if dev_c <= deviance + 1e-10:
                    break
                factor /= 2.0
            else:
                raise ConvergenceError("step halving failed to decrease deviance")

        delta = math.inf if beta is None else float(np.max(np.abs(candidate - beta)))
        beta, eta, mu, deviance = candidate, eta_c, mu_c, dev_c
        path.append(deviance)
        if np.max(np.abs(beta)) > SEPARATION_COEF_LIMIT:
            raise SeparationError(
                "coefficients diverged (complete separation suspected)")
        if delta < tol:
            converged = True
            break

    if not converged:
        raise ConvergenceError(f"IRLS did not converge in {max_iter} iterations")

    weights = t * mu * (1.0 - mu)
    fisher = (x.T * weights) @ x
    covariance = np.linalg.inv(fisher)
    se = np.sqrt(np.diag(covariance))
    zvals = beta / se
    pvals = 2.0 * special.ndtr(-np.abs(zvals))
    return GlmModel(
        predictors=names,
        coefficients=beta,
        standard_errors=se,
        z_values=zvals,
        p_values=pvals,
        deviance=deviance,
        deviance_path=path,
        iterations=iterations,
        converged=converged,
        dropped_predictors=dropped,
    )


# --- employment correlation -----------------------------------------------------------

def load_employment(path: str | Path) -> dict[tuple[int, str], float]:
    """OES-style CSV (year, soc major code, employment) -> lookup table."""
    table: dict[tuple[int, str], float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        required = {"year", "soc_code", "employment"}
        missing = required - set(reader.fieldnames or [])
        if missing:
            raise AnalyticsError(f"{path}: missing employment columns {sorted(missing)}")
        for raw in reader:
            key = (int(raw["year"]), raw["soc_code"].strip())
            if key in table:
                raise AnalyticsError(f"{path}: duplicate employment row for {key}")
            table[key] = float(raw["employment"])
    return table


def employment_proportions(table: dict[tuple[int, str], float],
                           group: str) -> dict[int, float]:
    years = sorted({year for (year, _) in table})
    result = {}
    for year in years:
        total = sum(v for (y, _), v in table.items() if y == year)
        value = table.get((year, group))
        if value is not None and total > 0:
            result[year] = value / total
    return result


def employment_correlation(freq: FrequencySeries,
                           employment: dict[tuple[int, str], float],
                           group: str,
                           year_range: tuple[int, int] = (1999, 2017),
                           alpha: float = DEFAULT_ALPHA) -> TrendResult:
    """Spearman correlation between a group's media frequency and the share
    of the working population it employs, on the overlapping years."""
    proportions = employment_proportions(employment, group)
    media = {p.year: p.proportion for p in freq.points}
    years = [y for y in sorted(set(proportions) & set(media))
             if year_range[0] <= y <= year_range[1]]
    if len(years) < 4:
        raise AnalyticsError(
            f"insufficient overlapping years for {group}: {len(years)}")
    return spearman([media[y] for y in years], [proportions[y] for y in years],
                    alpha=alpha)
