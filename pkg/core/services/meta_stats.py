"""
Paired comparison of two methods across datasets.

Per dataset: one-sided Wilcoxon signed-rank test and paired standardized mean
difference over subjects. Across datasets: Stouffer combination of p-values
with sqrt(subject count) weights.
"""

from __future__ import annotations

from collections.abc import Sequence
import logging
import math

import numpy as np
import pandas as pd
from scipy import stats

from core.domain.meta import Alternative, DatasetMeta, MetaResult, PairedScores
from core.domain.scores import ScoreTable
from core.utils.constants import (
    RANK_DECIMALS,
    STAR_THRESHOLDS,
    WILCOXON_EXACT_MAX_N,
    ZERO_DIFFERENCE_ATOL,
)
from core.utils.errors import MissingCellError, UndefinedTestError, ValidationError, ZeroVarianceError

logger = logging.getLogger(__name__)


def _nonzero_differences(values: PairedScores | Sequence[float]) -> np.ndarray:
    d = values.differences if isinstance(values, PairedScores) else np.asarray(values, dtype=np.float64)
    d = d[np.abs(d) > ZERO_DIFFERENCE_ATOL]
    if d.size < 2:
        raise UndefinedTestError(
            f"Wilcoxon test needs at least 2 non-zero differences, got {d.size}"
        )
    return d


def signed_ranks(differences: np.ndarray) -> tuple[np.ndarray, float]:
    """Average ranks of |d| (rounded to 12 decimals so float noise does not break ties) and W+."""
    ranks = stats.rankdata(np.round(np.abs(differences), RANK_DECIMALS))
    return ranks, float(ranks[differences > 0].sum())


def _one_sided_ceiling(n: int) -> float:
    # differences all on the losing side; stays below 1 even where 2**-n underflows the spacing
    return 1.0 - max(2.0**-n, float(np.finfo(np.float64).epsneg))


def _exact_tail(ranks: np.ndarray, w_plus: float, alternative: Alternative) -> float:
    # doubled ranks are integers even with averaged ties
    doubled = np.rint(2 * ranks).astype(np.int64)
    counts = np.zeros(int(doubled.sum()) + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: counts.size - r]
        counts = counts + shifted
    total = float(2 ** len(doubled))
    observed = int(round(2 * w_plus))
    upper = counts[observed:].sum() / total
    lower = counts[: observed + 1].sum() / total
    if alternative == "greater":
        return min(float(upper), _one_sided_ceiling(ranks.size))
    if alternative == "less":
        return min(float(lower), _one_sided_ceiling(ranks.size))
    return float(min(1.0, 2.0 * min(upper, lower)))


def _normal_tail(ranks: np.ndarray, w_plus: float, alternative: Alternative) -> float:
    n = ranks.size
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts**3 - tie_counts)) / 48.0
    if var <= 0:
        raise UndefinedTestError("Wilcoxon statistic has zero variance")
    sd = math.sqrt(var)
    if alternative == "greater":
        return min(float(stats.norm.sf((w_plus - mean - 0.5) / sd)), _one_sided_ceiling(n))
    if alternative == "less":
        return min(float(stats.norm.cdf((w_plus - mean + 0.5) / sd)), _one_sided_ceiling(n))
    z = (abs(w_plus - mean) - 0.5) / sd
    return float(min(1.0, 2.0 * stats.norm.sf(z)))


def wilcoxon_signed_rank(
    pairs: PairedScores | Sequence[float],
    alternative: Alternative = "greater",
    *,
    method: str = "auto",
) -> float:
    """Signed-rank p-value for method_a - method_b (or raw differences).

    Zero differences are dropped and tied ranks averaged. ``method="auto"`` uses
    the exact null distribution up to 25 pairs and the tie- and continuity-
    corrected normal approximation above. One-sided p-values never exceed
    1 - 2**-n, the value for differences that all point the wrong way.
    """
    d = _nonzero_differences(pairs)
    ranks, w_plus = signed_ranks(d)
    if method not in ("auto", "exact", "approx"):
        raise ValidationError(f"unknown Wilcoxon method {method!r}")
    exact = method == "exact" or (method == "auto" and d.size <= WILCOXON_EXACT_MAX_N)
    return _exact_tail(ranks, w_plus, alternative) if exact else _normal_tail(ranks, w_plus, alternative)


def standardized_mean_difference(pairs: PairedScores | Sequence[float]) -> float:
    """Paired Cohen's d: mean(d) / sd(d) with the n - 1 denominator."""
    d = pairs.differences if isinstance(pairs, PairedScores) else np.asarray(pairs, dtype=np.float64)
    if d.size < 2:
        raise ValidationError(f"SMD needs at least 2 pairs, got {d.size}")
    sd = float(np.std(d, ddof=1))
    if sd <= ZERO_DIFFERENCE_ATOL:
        raise ZeroVarianceError("paired differences have zero variance; SMD is undefined")
    return float(np.mean(d)) / sd


def stouffer_combine(p_values: Sequence[float], weights: Sequence[float] | None = None) -> float:
    """1 - Phi(sum w_i z_i / sqrt(sum w_i^2)) with z_i = Phi^-1(1 - p_i)."""
    p = np.asarray(p_values, dtype=np.float64)
    w = np.ones_like(p) if weights is None else np.asarray(weights, dtype=np.float64)
    if p.size == 0 or p.shape != w.shape:
        raise ValidationError("p-values and weights must be non-empty and of equal length")
    if np.any((p <= 0) | (p >= 1)):
        raise ValidationError(f"Stouffer combination needs p-values strictly inside (0, 1), got {p.tolist()}")
    if np.any(w <= 0):
        raise ValidationError("Stouffer weights must be positive")
    return float(stats.combine_pvalues(p, method="stouffer", weights=w).pvalue)


def star_grade(p: float) -> str:
    if not 0.0 < p <= 1.0:
        raise ValidationError(f"p-value must lie in (0, 1], got {p}")
    for threshold, stars in STAR_THRESHOLDS:
        if p < threshold:
            return stars
    return ""


def paired_scores(frame: pd.DataFrame, dataset: str, method_a: str, method_b: str) -> PairedScores:
    """Average repetitions per subject and pair the two methods' scores."""
    means = frame.groupby(["subject", "pipeline"], sort=True)["balanced_accuracy"].mean().unstack()
    for method in (method_a, method_b):
        if method not in means.columns:
            raise MissingCellError(f"dataset {dataset!r} has no scores for method {method!r}")
        absent = [str(s) for s in means.index[means[method].isna()]]
        if absent:
            raise MissingCellError(f"dataset {dataset!r}: method {method!r} lacks subjects {absent}")
    subjects = tuple(str(s) for s in means.index)
    return PairedScores(
        dataset=dataset,
        subjects=subjects,
        method_a=tuple(float(means.loc[s, method_a]) for s in subjects),
        method_b=tuple(float(means.loc[s, method_b]) for s in subjects),
    )


def _select_cell(frame: pd.DataFrame, dataset: str, method: str, n_train: int, lam: float) -> pd.DataFrame:
    cell = frame[
        (frame["pipeline"] == method)
        & (frame["n_train"] == n_train)
        & np.isclose(frame["lambda"].to_numpy(dtype=np.float64), lam)
    ]
    if cell.empty:
        raise MissingCellError(
            f"dataset {dataset!r} has no scores for method={method!r}, n={n_train}, lambda={lam:g}"
        )
    return cell


def run_meta_analysis(
    tables: Sequence[ScoreTable],
    method_a: str,
    method_b: str,
    n_train: int,
    lam: float,
    alternative: Alternative = "greater",
) -> MetaResult:
    """Compare method_a against method_b at one (n, lambda) cell across all datasets."""
    if not tables:
        raise ValidationError("meta-analysis needs at least one score table")
    frame = ScoreTable.concat(tables).frame
    per_dataset: list[DatasetMeta] = []
    directional: list[float] = []
    for dataset, rows in frame.groupby("dataset", sort=True):
        name = str(dataset)
        cell = pd.concat(
            [_select_cell(rows, name, m, n_train, lam) for m in (method_a, method_b)], ignore_index=True
        )
        pairs = paired_scores(cell, name, method_a, method_b)
        try:
            smd = standardized_mean_difference(pairs)
            p = wilcoxon_signed_rank(pairs, alternative)
            directional.append(p if alternative != "two-sided" else wilcoxon_signed_rank(pairs, "greater"))
        except (ZeroVarianceError, UndefinedTestError) as e:
            e.add_note(f"dataset {name!r}: {method_a} vs {method_b} at n={n_train}, lambda={lam:g}")
            raise
        logger.info(f"{name}: SMD {smd:.3f}, p {p:.4g} over {len(pairs.subjects)} subjects")
        per_dataset.append(
            DatasetMeta(
                dataset=name,
                n_subjects=len(pairs.subjects),
                smd=smd,
                mean_difference=float(np.mean(pairs.differences)),
                p_value=p,
                stars=star_grade(p),
            )
        )

    weights = np.sqrt([d.n_subjects for d in per_dataset])
    if len(per_dataset) == 1:
        combined_p = per_dataset[0].p_value
    else:
        # two-sided: combine signed evidence, then fold the combined tail
        combined_p = stouffer_combine(directional, weights)
        if alternative == "two-sided":
            combined_p = min(1.0, 2.0 * min(combined_p, 1.0 - combined_p))
    combined_smd = float(np.average([d.smd for d in per_dataset], weights=weights))
    return MetaResult(
        method_a=method_a,
        method_b=method_b,
        n_train=n_train,
        lam=lam,
        alternative=alternative,
        datasets=tuple(per_dataset),
        combined_smd=combined_smd,
        combined_p_value=combined_p,
        stars=star_grade(combined_p),
    )
