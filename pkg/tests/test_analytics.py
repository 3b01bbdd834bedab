import itertools
import math
import random

import numpy as np
import pytest
import scipy.stats

from profmedia.analytics import (AnalyticsError, AttributeDesign, ConstantSeriesError,
                                 MentionRow, RankDeficientError, SeparationError,
                                 _direction, average_ranks, build_design,
                                 employment_correlation, frequency_series, glm_fit,
                                 load_employment, sentiment_series, spearman, trend_of)
from profmedia.corpus import NgramTotals

from conftest import make_corpus, make_doc


def mention(title, year, doc="tt1", professional=True, sentiment=None, start=0):
    return MentionRow(doc=doc, year=year, sentence=0, start=start, end=start + 1,
                      title=title, plural=False, professional=professional,
                      sentiment=sentiment)


# --- frequency series ------------------------------------------------------------------

def totals_of(counts: dict[tuple[int, int], int]) -> NgramTotals:
    t = NgramTotals()
    for (year, n), c in counts.items():
        t.add(year, n, c)
    return t


def test_simple_proportion(taxonomy):
    rows = [mention("doctor", 2000), mention("doctor", 2000)]
    totals = totals_of({(2000, 1): 1000})
    series = frequency_series(rows, totals, taxonomy, "doctor")
    assert len(series.points) == 1
    point = series.points[0]
    assert (point.year, point.count, point.trials) == (2000, 2, 1000)
    assert point.proportion == pytest.approx(0.002)


def test_zero_mentions_zero_proportion(taxonomy):
    totals = totals_of({(2000, 1): 500})
    series = frequency_series([], totals, taxonomy, "doctor")
    assert series.points[0].count == 0
    assert series.points[0].proportion == 0.0


def test_nonprofessional_mentions_not_counted(taxonomy):
    rows = [mention("doctor", 2000, professional=False)]
    totals = totals_of({(2000, 1): 100})
    series = frequency_series(rows, totals, taxonomy, "doctor")
    assert series.points[0].count == 0


def test_multiword_title_uses_its_ngram_base(taxonomy):
    rows = [mention("train conductor", 2000)]
    totals = totals_of({(2000, 1): 1000, (2000, 2): 900})
    series = frequency_series(rows, totals, taxonomy, "train conductor")
    assert series.points[0].trials == 900
    assert series.points[0].proportion == pytest.approx(1 / 900)


def test_group_frequency_is_sum_of_member_proportions(taxonomy):
    # 29-0000 members in the fixture taxonomy include doctor (1-gram),
    # surgeon, veterinarian etc.; plant counts giving 0.002 and 0.003
    totals = totals_of({(2000, 1): 1000})
    rows = [mention("doctor", 2000)] * 2 + [mention("surgeon", 2000)] * 3
    series = frequency_series(rows, totals, taxonomy, "29-0000")
    assert series.kind == "group"
    point = series.points[0]
    assert point.proportion == pytest.approx(0.005)
    assert point.count == 5
    assert "doctor" in series.member_bases
    assert series.member_bases["doctor"][2000] == 1000


def test_group_additivity_property(taxonomy):
    rng = random.Random(17)
    totals = totals_of({(y, 1): rng.randint(500, 2000) for y in range(1990, 1996)})
    members = taxonomy.titles_of_group("29-0000")
    rows = []
    for year in range(1990, 1996):
        for title in members:
            if len(title.split()) == 1:
                rows += [mention(title, year)] * rng.randint(0, 4)
    group = frequency_series(rows, totals, taxonomy, "29-0000")
    for point in group.points:
        total = 0.0
        for title in members:
            member = frequency_series(rows, totals, taxonomy, title)
            total += sum(p.proportion for p in member.points if p.year == point.year)
        assert point.proportion == pytest.approx(total, abs=1e-12)


def test_unknown_subject_rejected(taxonomy):
    with pytest.raises(AnalyticsError):
        frequency_series([], totals_of({(2000, 1): 10}), taxonomy, "99-0000")


# --- spearman ----------------------------------------------------------------------------

def test_perfect_increase():
    result = spearman([1, 2, 3, 4, 5], [10, 20, 30, 40, 50])
    assert result.rho == pytest.approx(1.0)
    assert result.direction == "increasing"


def test_perfect_decrease():
    result = spearman([1, 2, 3, 4, 5], [9, 7, 5, 2, 1])
    assert result.rho == pytest.approx(-1.0)
    assert result.direction == "decreasing"


def test_tiny_perfect_trend_is_not_significant():
    # n = 4: even rho = -1 has exact permutation p = 2/24 > 0.05
    result = spearman([1, 2, 3, 4], [9, 7, 5, 1])
    assert result.rho == pytest.approx(-1.0)
    assert result.p_value == pytest.approx(2 / 24, abs=1e-12)
    assert result.direction == "none"


def test_frozen_example_rho_and_permutation_p():
    # oracle (exhaustive 120 permutations, rank-then-Pearson): rho 0.8, p 16/120
    result = spearman([1, 2, 3, 4, 5], [2, 1, 4, 3, 5])
    assert result.rho == pytest.approx(0.8, abs=1e-12)
    assert result.p_value == pytest.approx(16 / 120, abs=1e-12)


def brute_force(x, y):
    rx = scipy.stats.rankdata(x)
    ry = scipy.stats.rankdata(y)
    rho = float(np.corrcoef(rx, ry)[0, 1])
    hits = total = 0
    for perm in itertools.permutations(ry):
        total += 1
        if abs(float(np.corrcoef(rx, perm)[0, 1])) >= abs(rho) - 1e-12:
            hits += 1
    return rho, hits / total


def test_matches_brute_force_oracle_short_series():
    rng = random.Random(2024)
    for n in (4, 5, 6, 7, 8):
        for _ in range(8 if n < 7 else 3):
            x = [rng.randint(0, 9) for _ in range(n)]
            y = [rng.randint(0, 9) for _ in range(n)]
            if len(set(x)) == 1 or len(set(y)) == 1:
                continue
            expected_rho, expected_p = brute_force(x, y)
            result = spearman(x, y)
            assert result.rho == pytest.approx(expected_rho, abs=1e-12)
            assert result.p_value == pytest.approx(expected_p, abs=1e-12)


def test_length_50_with_ties_matches_rank_pearson():
    rng = random.Random(7)
    x = [rng.randint(0, 12) for _ in range(50)]
    y = [rng.randint(0, 12) for _ in range(50)]
    result = spearman(x, y)
    oracle = float(np.corrcoef(scipy.stats.rankdata(x), scipy.stats.rankdata(y))[0, 1])
    assert result.rho == pytest.approx(oracle, abs=1e-12)
    # scipy agrees too
    assert result.rho == pytest.approx(scipy.stats.spearmanr(x, y).statistic, abs=1e-12)


def test_t_approximation_matches_scipy_for_large_n():
    rng = random.Random(11)
    x = [rng.random() for _ in range(40)]
    y = [xi + rng.random() for xi in x]
    result = spearman(x, y)
    expected = scipy.stats.spearmanr(x, y)
    assert result.p_value == pytest.approx(expected.pvalue, rel=1e-9)


def test_rank_invariance_under_monotone_transform():
    x = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
    y = [3, 1, 4, 1.5, 5, 9, 2, 6, 5.5, 3.5]
    base = spearman(x, y)
    transformed = spearman([math.exp(v) for v in x], [v ** 3 for v in y])
    assert transformed.rho == pytest.approx(base.rho, abs=1e-12)


def test_sign_symmetry():
    x = [1, 2, 3, 4, 5, 6]
    y = [2, 5, 3, 8, 7, 9]
    plus = spearman(x, y)
    minus = spearman(x, [-v for v in y])
    assert minus.rho == pytest.approx(-plus.rho, abs=1e-12)
    assert minus.p_value == pytest.approx(plus.p_value, abs=1e-12)


def test_short_series_rejected():
    with pytest.raises(AnalyticsError):
        spearman([1, 2, 3], [1, 2, 3])


def test_constant_series_rejected():
    with pytest.raises(ConstantSeriesError):
        spearman([1, 2, 3, 4], [5, 5, 5, 5])


def test_nonfinite_rejected():
    with pytest.raises(AnalyticsError):
        spearman([1, 2, 3, float("nan")], [1, 2, 3, 4])


DIRECTION_CASES = [
    (0.9, 0.01, "increasing"), (0.9, 0.049, "increasing"), (0.9, 0.05, "none"),
    (0.9, 0.9, "none"), (0.2, 0.001, "increasing"), (-0.9, 0.01, "decreasing"),
    (-0.9, 0.049, "decreasing"), (-0.9, 0.05, "none"), (-0.2, 0.2, "none"),
    (-0.2, 0.0499, "decreasing"), (0.0, 0.0, "none"), (0.0, 1.0, "none"),
]


@pytest.mark.parametrize("rho,p,expected", DIRECTION_CASES)
def test_direction_rule_table(rho, p, expected):
    assert _direction(rho, p, 0.05) == expected


def test_average_ranks_midranks():
    assert average_ranks([10, 20, 20, 30]) == [1.0, 2.5, 2.5, 4.0]
    assert average_ranks([5, 5, 5]) == [2.0, 2.0, 2.0]


# --- sentiment series --------------------------------------------------------------------

def test_sentiment_proportion(taxonomy):
    rows = ([mention("doctor", 2000, sentiment="positive")] * 3
            + [mention("doctor", 2000, sentiment="negative")]
            + [mention("doctor", 2000, sentiment="neutral")] * 10)
    series = sentiment_series(rows, taxonomy, "doctor")
    point = series.points[0]
    assert point.opinionated == 4
    assert point.positive == 3
    assert point.proportion == pytest.approx(0.75)


def test_neutral_only_year_omitted(taxonomy):
    rows = [mention("doctor", 2000, sentiment="neutral"),
            mention("doctor", 2001, sentiment="positive")]
    series = sentiment_series(rows, taxonomy, "doctor")
    assert series.years() == [2001]
    assert series.omitted_years == [2000]


def test_sentiment_hand_tally(taxonomy):
    rows = []
    plan = {1990: (2, 1), 1991: (1, 3), 1992: (4, 0)}
    for year, (pos, neg) in plan.items():
        rows += [mention("lawyer", year, sentiment="positive")] * pos
        rows += [mention("lawyer", year, sentiment="negative")] * neg
    series = sentiment_series(rows, taxonomy, "lawyer")
    assert [(p.year, p.positive, p.opinionated) for p in series.points] == \
        [(1990, 2, 3), (1991, 1, 4), (1992, 4, 4)]
    assert [p.proportion for p in series.points] == \
        pytest.approx([2 / 3, 1 / 4, 1.0])


def test_group_sentiment_pools_member_counts(taxonomy):
    rows = [mention("doctor", 2000, sentiment="positive"),
            mention("surgeon", 2000, sentiment="negative")]
    series = sentiment_series(rows, taxonomy, "29-0000")
    assert series.points[0].opinionated == 2
    assert series.points[0].proportion == pytest.approx(0.5)


# --- design matrix ---------------------------------------------------------------------

def corpus_with_configs(n_per_config=3):
    docs = []
    i = 0
    plans = [
        ("movie", ("Drama",), ("United States",)),
        ("movie", ("Comedy",), ("United States",)),
        ("tv_episode", ("Drama",), ("United Kingdom",)),
    ]
    for title_type, genres, countries in plans:
        for _ in range(n_per_config):
            docs.append(make_doc(f"tt{i:03d}", 1990 + i, ["the doctor spoke plainly today."],
                                 title_type=title_type, genres=genres, countries=countries))
            i += 1
    return make_corpus(docs)


def test_design_row_contents(taxonomy):
    corpus = corpus_with_configs()
    design = build_design(corpus, [], "frequency", "doctor", taxonomy,
                          min_config_titles=1)
    assert design.matrix.shape[0] == 9
    row = design.matrix[0]
    names = design.predictors
    assert names[0] == "year"
    assert row[names.index("genre:Drama")] == 1.0
    assert design.successes[0] == 0
    assert design.trials[0] == 5      # "the doctor spoke plainly today" words
    assert row[0] == corpus.documents[design.doc_ids[0]].attrs.year - 1950


def test_rare_configuration_dropped(taxonomy):
    corpus = corpus_with_configs(n_per_config=29)
    design_loose = build_design(corpus, [], "frequency", "doctor", taxonomy,
                                min_config_titles=29)
    assert design_loose.matrix.shape[0] == 87
    with pytest.raises(AnalyticsError, match="no design rows"):
        build_design(corpus, [], "frequency", "doctor", taxonomy, min_config_titles=30)


def test_retained_rows_match_groupby_oracle(taxonomy):
    rng = random.Random(13)
    docs = []
    for i in range(40):
        genres = tuple(sorted(rng.sample(["Drama", "Comedy", "News"], rng.randint(1, 2))))
        docs.append(make_doc(f"tt{i:03d}", 1980 + i % 10, ["the doctor spoke."],
                             genres=genres))
    corpus = make_corpus(docs)
    threshold = 8
    design = build_design(corpus, [], "frequency", "doctor", taxonomy,
                          min_config_titles=threshold)
    # independent group-by
    from collections import Counter
    config = {d.attrs.imdb_id: (d.attrs.title_type, tuple(sorted(d.attrs.genres)),
                                tuple(sorted(d.attrs.countries)))
              for d in corpus.documents.values()}
    counts = Counter(config.values())
    expected = [doc_id for doc_id in corpus.doc_ids()
                if counts[config[doc_id]] >= threshold]
    assert design.doc_ids == expected


def test_sentiment_response_counts(taxonomy):
    corpus = corpus_with_configs()
    doc_id = corpus.doc_ids()[0]
    rows = [mention("doctor", 1990, doc=doc_id, sentiment="positive"),
            mention("doctor", 1990, doc=doc_id, sentiment="negative"),
            mention("doctor", 1990, doc=doc_id, sentiment="neutral")]
    design = build_design(corpus, rows, "sentiment", "doctor", taxonomy,
                          min_config_titles=1)
    assert design.doc_ids == [doc_id]      # zero-trial rows are dropped
    assert design.successes[0] == 1
    assert design.trials[0] == 2


# --- GLM ----------------------------------------------------------------------------------

def design_of(matrix, successes, trials, predictors=None) -> AttributeDesign:
    matrix = np.asarray(matrix, dtype=float)
    predictors = predictors or [f"x{i + 1}" for i in range(matrix.shape[1])]
    return AttributeDesign(
        predictors=predictors, matrix=matrix,
        successes=np.asarray(successes, dtype=float),
        trials=np.asarray(trials, dtype=float),
        doc_ids=[f"d{i}" for i in range(matrix.shape[0])],
        dropped_configs=0, response="frequency", subject="synthetic")


def test_intercept_only_analytic_solution():
    n = 12
    design = design_of(np.zeros((n, 0)), [75] * n, [100] * n, predictors=[])
    model = glm_fit(design)
    assert model.predictors == ["intercept"]
    assert model.coefficients[0] == pytest.approx(math.log(3.0), abs=1e-10)


def test_all_successes_triggers_separation_error():
    design = design_of(np.zeros((8, 0)), [50] * 8, [50] * 8, predictors=[])
    with pytest.raises(SeparationError):
        glm_fit(design)


def synthetic_design(trial_low=20, trial_high=101, seed=42):
    rng = np.random.default_rng(seed)
    n = 200
    x1 = rng.normal(0, 1, n)
    x2 = rng.binomial(1, 0.4, n).astype(float)
    x3 = rng.uniform(-1, 1, n)
    x = np.column_stack([x1, x2, x3])
    beta = np.array([-0.5, 0.8, -0.6, 0.3])
    mu = 1 / (1 + np.exp(-(beta[0] + x @ beta[1:])))
    trials = rng.integers(trial_low, trial_high, n)
    successes = rng.binomial(trials, mu)
    return design_of(x, successes, trials), beta


# Frozen from the statsmodels binomial-GLM oracle on the same seed-42 data.
ORACLE_COEF = [-0.5324240172812859, 0.8002422049587822,
               -0.5707428072012796, 0.37042312017092205]
ORACLE_SE = [0.02543486654773596, 0.024893690665785582,
             0.042589464566167565, 0.035162304280007065]


def test_synthetic_recovery_matches_irls_oracle():
    design, _ = synthetic_design()
    model = glm_fit(design)
    assert list(model.coefficients) == pytest.approx(ORACLE_COEF, abs=1e-6)
    assert list(model.standard_errors) == pytest.approx(ORACLE_SE, abs=1e-4)
    assert model.converged


def test_live_statsmodels_oracle_agrees():
    statsmodels = pytest.importorskip("statsmodels.api")
    design, _ = synthetic_design()
    exog = statsmodels.add_constant(design.matrix)
    endog = np.column_stack([design.successes, design.trials - design.successes])
    oracle = statsmodels.GLM(endog, exog, family=statsmodels.families.Binomial()).fit()
    model = glm_fit(design)
    assert list(model.coefficients) == pytest.approx(list(oracle.params), abs=1e-6)
    assert list(model.standard_errors) == pytest.approx(list(oracle.bse), abs=1e-4)


def test_deviance_monotone_nonincreasing():
    design, _ = synthetic_design()
    model = glm_fit(design)
    for a, b in zip(model.deviance_path, model.deviance_path[1:]):
        assert b <= a + 1e-10


def test_consistency_error_shrinks_with_trials():
    errors = []
    for low, high in ((20, 41), (200, 401), (2000, 4001)):
        design, beta = synthetic_design(low, high)
        model = glm_fit(design)
        errors.append(float(np.max(np.abs(model.coefficients - beta))))
    assert errors[2] < errors[0]
    assert errors[2] < 0.05


def test_fitted_means_in_unit_interval():
    design, _ = synthetic_design()
    model = glm_fit(design)
    x = np.column_stack([np.ones(len(design.trials)), design.matrix])
    mu = 1 / (1 + np.exp(-(x @ model.coefficients)))
    assert np.all(mu > 0) and np.all(mu < 1)


def test_all_zero_column_dropped_and_reported():
    design, _ = synthetic_design()
    matrix = np.column_stack([design.matrix, np.zeros(len(design.trials))])
    padded = design_of(matrix, design.successes, design.trials,
                       predictors=["x1", "x2", "x3", "dead"])
    model = glm_fit(padded)
    assert model.dropped_predictors == ["dead"]
    assert "dead" not in model.predictors
    assert list(model.coefficients) == pytest.approx(ORACLE_COEF, abs=1e-6)


def test_rank_deficiency_detected():
    design, _ = synthetic_design()
    matrix = np.column_stack([design.matrix, design.matrix[:, 0]])
    dup = design_of(matrix, design.successes, design.trials,
                    predictors=["x1", "x2", "x3", "x1_again"])
    with pytest.raises(RankDeficientError):
        glm_fit(dup)


def test_wald_statistics_consistent():
    design, _ = synthetic_design()
    model = glm_fit(design)
    for i in range(len(model.predictors)):
        assert abs(model.z_values[i]) == pytest.approx(
            abs(model.coefficients[i]) / model.standard_errors[i])
        assert 0.0 <= model.p_values[i] <= 1.0


# --- employment --------------------------------------------------------------------------

def freq_series_stub(taxonomy, values: dict[int, float]):
    from profmedia.analytics import FreqPoint, FrequencySeries
    points = [FreqPoint(year=yr, count=0, trials=0, proportion=v)
              for yr, v in sorted(values.items())]
    return FrequencySeries(subject="29-0000", kind="group", points=points)


def test_monotone_rise_gives_rho_one(taxonomy):
    years = range(1999, 2018)
    freq = freq_series_stub(taxonomy, {y: 0.001 * (y - 1998) for y in years})
    table = {(y, "29-0000"): 100 + (y - 1999) * 10 for y in years}
    table.update({(y, "11-0000"): 500 for y in years})
    result = employment_correlation(freq, table, "29-0000")
    assert result.rho == pytest.approx(1.0)
    assert result.n == 19


def test_constant_employment_rejected(taxonomy):
    years = range(1999, 2018)
    freq = freq_series_stub(taxonomy, {y: 0.001 * (y - 1998) for y in years})
    # group share constant because totals scale with the group
    table = {(y, "29-0000"): 100 for y in years}
    with pytest.raises(ConstantSeriesError):
        employment_correlation(freq, table, "29-0000")


def test_insufficient_overlap_rejected(taxonomy):
    freq = freq_series_stub(taxonomy, {2000: 0.1, 2001: 0.2, 2002: 0.3})
    table = {(y, "29-0000"): 100 + y for y in (2000, 2001, 2002)}
    table.update({(y, "11-0000"): 900 - y for y in (2000, 2001, 2002)})
    with pytest.raises(AnalyticsError, match="insufficient"):
        employment_correlation(freq, table, "29-0000")


def test_fixture_file_matches_direct_spearman(taxonomy, tmp_path):
    path = tmp_path / "employment.csv"
    lines = ["year,soc_code,employment"]
    media = {}
    rng = random.Random(23)
    for i, year in enumerate(range(1999, 2011)):
        lines.append(f"{year},29-0000,{1000 + i * 7}")
        lines.append(f"{year},11-0000,{5000 - i * 3}")
        media[year] = rng.random()
    path.write_text("\n".join(lines) + "\n")
    table = load_employment(path)
    freq = freq_series_stub(taxonomy, media)
    result = employment_correlation(freq, table, "29-0000")
    share = {y: table[(y, "29-0000")] / (table[(y, "29-0000")] + table[(y, "11-0000")])
             for y in media}
    oracle = spearman([media[y] for y in sorted(media)],
                      [share[y] for y in sorted(media)])
    assert result.rho == pytest.approx(oracle.rho, abs=1e-12)
    assert result.p_value == pytest.approx(oracle.p_value, abs=1e-12)


def test_trend_of_frequency_series(taxonomy):
    rows = []
    for i, year in enumerate(range(2000, 2010)):
        rows += [mention("doctor", year)] * (i + 1)
    totals = totals_of({(y, 1): 1000 for y in range(2000, 2010)})
    series = frequency_series(rows, totals, taxonomy, "doctor")
    result = trend_of(series)
    assert result.direction == "increasing"
    assert result.rho == pytest.approx(1.0)
