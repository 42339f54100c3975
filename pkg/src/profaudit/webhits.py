"""Search-hit analysis: normalized male/female hit differences per
profession and the two logistic models predicting redirect bias.

Hit counts are ingested from a CSV file; the search API the counts once
came from is long gone, so no live client ships. Model 1 predicts
membership in the female-bias group, model 2 in the male-bias group; in
both, the other two groups act as negatives. Predictors are the
normalized difference, the raw male-title hit count, and an intercept.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import stats
from .redirect_bias import BiasGroup

log = logging.getLogger(__name__)


@dataclass
class HitRecord:
    profession_id: str
    hits_male: int
    hits_female: int


@dataclass
class NormalizedDifference:
    profession_id: str
    value: float


def load_hits(path) -> list[HitRecord]:
    """CSV columns: profession_id, hits_male, hits_female."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].startswith("#") or row[0] == "profession_id":
                continue
            if len(row) < 3:
                raise ValueError(f"hits row {row_no}: expected 3 columns")
            try:
                male = int(row[1])
                female = int(row[2])
            except ValueError as exc:
                raise ValueError(f"hits row {row_no}: non-numeric count") from exc
            if male < 0 or female < 0:
                raise ValueError(f"hits row {row_no}: negative count")
            out.append(HitRecord(row[0].strip(), male, female))
    return out


def normalized_difference(record: HitRecord) -> NormalizedDifference:
    """(male - female) / (male + female); undefined for a zero total."""
    total = record.hits_male + record.hits_female
    if total <= 0:
        raise ValueError(
            f"normalized difference undefined for {record.profession_id}: "
            "zero total hits")
    value = (record.hits_male - record.hits_female) / total
    return NormalizedDifference(record.profession_id, value)


def compute_differences(records) -> tuple[list[NormalizedDifference], list[str]]:
    """Batch variant; zero-total records are excluded with a warning."""
    diffs: list[NormalizedDifference] = []
    excluded: list[str] = []
    for rec in records:
        if rec.hits_male + rec.hits_female == 0:
            log.warning("excluding %s: zero total hits", rec.profession_id)
            excluded.append(rec.profession_id)
            continue
        diffs.append(normalized_difference(rec))
    return diffs, excluded


PREDICTOR_NAMES = ("intercept", "normalized_difference", "hits_male")


def fit_bias_models(records: list[HitRecord],
                    groups: dict[str, BiasGroup],
                    standardize: bool = False) -> dict:
    """Fit the female-bias and male-bias logistic models.

    Every profession must appear in ``groups`` with one of the three
    evidence-bearing bias groups; no-evidence professions must be filtered
    out by the caller. ``standardize`` rescales the predictors for
    diagnostics only; reported models keep raw units.
    """
    usable = []
    for rec in records:
        group = groups.get(rec.profession_id)
        if group is None:
            raise ValueError(f"no bias group for {rec.profession_id}")
        if group is BiasGroup.NO_EVIDENCE:
            raise ValueError(
                f"{rec.profession_id}: no-evidence professions cannot enter "
                "the bias models")
        if rec.hits_male + rec.hits_female == 0:
            continue
        usable.append((rec, group))
    if not usable:
        raise ValueError("fit_bias_models: no usable records")

    diff = np.array([normalized_difference(r).value for r, _ in usable])
    male_hits = np.array([float(r.hits_male) for r, _ in usable])
    if standardize:
        diff = (diff - diff.mean()) / (diff.std() or 1.0)
        male_hits = (male_hits - male_hits.mean()) / (male_hits.std() or 1.0)
    X = np.column_stack([np.ones(len(usable)), diff, male_hits])

    report: dict = {"n": len(usable), "standardized": standardize}
    for name, positive in (("model_female_bias", BiasGroup.FEMALE_BIAS),
                           ("model_male_bias", BiasGroup.MALE_BIAS)):
        y = np.array([1.0 if g is positive else 0.0 for _, g in usable])
        if y.min() == y.max():
            report[name] = {"skipped": f"outcome {positive.value} has a "
                                       "single class"}
            continue
        fit = stats.logistic_fit(X, y)
        report[name] = model_report(fit, outcome=positive.value)
    return report


def model_report(fit: stats.LogisticFit, outcome: str) -> dict:
    """Table layout: one row per coefficient with odds-ratio column."""
    rows = []
    for i, name in enumerate(PREDICTOR_NAMES):
        coef = fit.coefficients[i]
        rows.append({
            "predictor": name,
            "coef": coef,
            "std_error": fit.std_errors[i],
            "p": fit.p_values[i],
            "ci95_low": fit.ci95[i][0],
            "ci95_high": fit.ci95[i][1],
            "odds_ratio": math.exp(coef) if abs(coef) < 500 else float("inf"),
        })
    return {
        "outcome": outcome,
        "accuracy": fit.accuracy,
        "pseudo_r2": fit.mcfadden_r2,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "coefficients": rows,
    }


def odds_ratio(coef: float) -> float:
    """Reporting identity: a one-unit predictor increase multiplies the
    odds by exp(coef)."""
    return math.exp(coef)


def write_differences(diffs: list[NormalizedDifference],
                      groups: dict[str, BiasGroup], path) -> None:
    """Figure data: per-profession normalized difference with bias group."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["profession_id", "normalized_difference", "bias_group"])
        for d in sorted(diffs, key=lambda d: d.profession_id):
            group = groups.get(d.profession_id)
            writer.writerow([d.profession_id, f"{d.value:.6f}",
                             group.value if group else ""])
