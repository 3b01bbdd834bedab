"""Figure rendering for the analyze outputs.

Reads the delimited reports produced by the analyze stage and renders
matplotlib figures next to them: trend bar charts (rho per subject, colored
by direction), frequency and sentiment time series, a GLM coefficient
heatmap (significant cells only) and employment-correlation bars.
"""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .config import RunConfig  # noqa: E402
from .runs import read_csv_report  # noqa: E402

logger = logging.getLogger(__name__)

DIRECTION_COLORS = {"increasing": "tab:red", "decreasing": "tab:blue", "none": "0.7"}
MAX_SERIES_PANELS = 12


def _save(fig, path: Path, deterministic: bool) -> None:
    metadata = {"Software": None} if deterministic else None
    fig.savefig(path, dpi=120, metadata=metadata)
    plt.close(fig)


def trend_bars(rows: list[dict], measure: str, path: Path, deterministic: bool) -> bool:
    rows = [r for r in rows if r["measure"] == measure]
    if not rows:
        return False
    rows.sort(key=lambda r: float(r["rho"]), reverse=True)
    labels = [f"{r['subject']}" for r in rows]
    rhos = [float(r["rho"]) for r in rows]
    colors = [DIRECTION_COLORS[r["direction"]] for r in rows]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.32 * len(rows) + 1)))
    ax.barh(range(len(rows)), rhos, color=colors)
    ax.set_yticks(range(len(rows)), labels=labels, fontsize=8)
    ax.invert_yaxis()
    ax.axvline(0, color="0.3", linewidth=0.8)
    ax.set_xlabel("Spearman rho vs. time")
    ax.set_title(f"{measure.capitalize()} trends")
    fig.tight_layout()
    _save(fig, path, deterministic)
    return True


def series_panels(rows: list[dict], value_key: str, title: str, ylabel: str,
                  path: Path, deterministic: bool) -> bool:
    subjects = sorted({r["subject"] for r in rows})[:MAX_SERIES_PANELS]
    if not subjects:
        return False
    cols = min(3, len(subjects))
    nrows = (len(subjects) + cols - 1) // cols
    fig, axes = plt.subplots(nrows, cols, figsize=(4 * cols, 2.6 * nrows),
                             squeeze=False, sharex=False)
    for i, subject in enumerate(subjects):
        ax = axes[i // cols][i % cols]
        pts = sorted((int(r["year"]), float(r[value_key]))
                     for r in rows if r["subject"] == subject)
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                marker="o", markersize=2.5, linewidth=1.0)
        ax.set_title(subject, fontsize=9)
        ax.tick_params(labelsize=7)
    for j in range(len(subjects), nrows * cols):
        axes[j // cols][j % cols].axis("off")
    fig.suptitle(title)
    fig.supylabel(ylabel, fontsize=9)
    fig.tight_layout()
    _save(fig, path, deterministic)
    return True


def glm_heatmap(rows: list[dict], response: str, alpha: float, path: Path,
                deterministic: bool) -> bool:
    rows = [r for r in rows if r["response"] == response and r["predictor"] != "intercept"]
    if not rows:
        return False
    subjects = sorted({r["subject"] for r in rows})
    predictors = sorted({r["predictor"] for r in rows})
    grid = np.full((len(subjects), len(predictors)), np.nan)
    for r in rows:
        if float(r["p_value"]) < alpha:
            grid[subjects.index(r["subject"]), predictors.index(r["predictor"])] = \
                float(r["coefficient"])
    scale = np.nanmax(np.abs(grid)) if np.any(~np.isnan(grid)) else 1.0
    fig, ax = plt.subplots(figsize=(max(5, 0.5 * len(predictors) + 2),
                                    max(3, 0.36 * len(subjects) + 1.5)))
    cmap = plt.get_cmap("coolwarm").copy()
    cmap.set_bad("white")
    im = ax.imshow(grid, cmap=cmap, vmin=-scale, vmax=scale, aspect="auto")
    ax.set_xticks(range(len(predictors)), labels=predictors, rotation=90, fontsize=7)
    ax.set_yticks(range(len(subjects)), labels=subjects, fontsize=8)
    ax.set_title(f"Attribute coefficients, {response} response "
                 f"(blank: not significant at {alpha:g})")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    _save(fig, path, deterministic)
    return True


def employment_bars(rows: list[dict], path: Path, deterministic: bool) -> bool:
    if not rows:
        return False
    rows = sorted(rows, key=lambda r: float(r["rho"]), reverse=True)
    colors = [DIRECTION_COLORS[r["direction"]] for r in rows]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.32 * len(rows) + 1)))
    ax.barh(range(len(rows)), [float(r["rho"]) for r in rows], color=colors)
    ax.set_yticks(range(len(rows)), labels=[r["group"] for r in rows], fontsize=8)
    ax.invert_yaxis()
    ax.axvline(0, color="0.3", linewidth=0.8)
    ax.set_xlabel("Spearman rho, media frequency vs. employment share")
    ax.set_title("Employment correlation by SOC major group")
    fig.tight_layout()
    _save(fig, path, deterministic)
    return True


def report_run(config: RunConfig) -> list[Path]:
    """Render every figure whose source CSV exists; returns written paths."""
    config.require_paths("output_dir")
    out = config.output_dir
    written: list[Path] = []

    def emit(ok: bool, path: Path) -> None:
        if ok:
            written.append(path)
        else:
            logger.info("no data for %s, skipped", path.name)

    trends = out / "trends.csv"
    if trends.exists():
        rows = read_csv_report(trends)
        for measure in ("frequency", "sentiment"):
            path = out / f"trends_{measure}.png"
            emit(trend_bars(rows, measure, path, config.deterministic), path)
    freq = out / "frequency.csv"
    if freq.exists():
        path = out / "frequency_series.png"
        emit(series_panels(read_csv_report(freq), "proportion", "Mention frequency",
                           "mentions / n-grams", path, config.deterministic), path)
    sent = out / "sentiment.csv"
    if sent.exists():
        path = out / "sentiment_series.png"
        emit(series_panels(read_csv_report(sent), "proportion", "Positive sentiment share",
                           "positive / opinionated", path, config.deterministic), path)
    glm = out / "glm.csv"
    if glm.exists():
        rows = read_csv_report(glm)
        for response in ("frequency", "sentiment"):
            path = out / f"glm_{response}.png"
            emit(glm_heatmap(rows, response, config.alpha, path, config.deterministic), path)
    emp = out / "employment_correlation.csv"
    if emp.exists():
        path = out / "employment_correlation.png"
        emit(employment_bars(read_csv_report(emp), path, config.deterministic), path)
    return written
