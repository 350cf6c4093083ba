"""Aggregation of per-example return triples into the three monitor metrics.

Every evaluation scheme in this toolkit reduces one example (an image, a
frame, an episode) to a :class:`ReturnTriple`: the safety and mission
returns of the bare model ``f``, of the monitored pair ``(f, m_f)``, and
the safety return of the ground-truth system ``f*``.  The three metrics
are weighted empirical means of pairwise differences:

* safety gain   SG = mean of (safety_fm - safety_f)
* residual hazard RH = mean of (safety_fstar - safety_fm)
* availability cost AC = mean of (mission_f - mission_fm)

SG + RH telescopes to the mean of (safety_fstar - safety_f), reported as
``hazard_f``; the toolkit checks that identity on every report.

Weights default to 1, which gives the plain 1/n average.  Summation is
fixed input-order accumulation so reports are bit-reproducible; pass
``compensated=True`` for Kahan summation when permutation stability at
the 1e-12 level matters.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence


@dataclass(frozen=True)
class ReturnTriple:
    """Safety/mission returns of one evaluated example under the three systems."""

    safety_f: float
    safety_fm: float
    safety_fstar: float
    mission_f: float
    mission_fm: float
    weight: float = 1.0

    def __post_init__(self) -> None:
        if self.weight < 0:
            raise ValueError(f"weight must be >= 0, got {self.weight}")


@dataclass(frozen=True)
class MetricsReport:
    sg: float
    rh: float
    ac: float
    hazard_f: float
    n: int
    total_weight: float
    scheme_name: str
    params_echo: object = None


def _weighted_mean(
    records: Sequence[ReturnTriple],
    term,
    compensated: bool,
) -> float:
    if not records:
        raise ValueError("cannot aggregate an empty record sequence")
    total_w = 0.0
    acc = 0.0
    if compensated:
        # Kahan compensation on both accumulators.
        cw = 0.0
        cv = 0.0
        for r in records:
            yw = r.weight - cw
            tw = total_w + yw
            cw = (tw - total_w) - yw
            total_w = tw
            yv = r.weight * term(r) - cv
            tv = acc + yv
            cv = (tv - acc) - yv
            acc = tv
    else:
        for r in records:
            total_w += r.weight
            acc += r.weight * term(r)
    if total_w <= 0.0:
        raise ValueError("total weight must be > 0")
    return acc / total_w


def aggregate_sg(records: Sequence[ReturnTriple], *, compensated: bool = False) -> float:
    """Weighted mean safety improvement of the monitored pair over bare f."""
    return _weighted_mean(records, lambda r: r.safety_fm - r.safety_f, compensated)


def aggregate_rh(records: Sequence[ReturnTriple], *, compensated: bool = False) -> float:
    """Weighted mean safety shortfall of the monitored pair versus ground truth."""
    return _weighted_mean(records, lambda r: r.safety_fstar - r.safety_fm, compensated)


def aggregate_ac(records: Sequence[ReturnTriple], *, compensated: bool = False) -> float:
    """Weighted mean mission return lost to the monitor."""
    return _weighted_mean(records, lambda r: r.mission_f - r.mission_fm, compensated)


def aggregate_hazard(records: Sequence[ReturnTriple], *, compensated: bool = False) -> float:
    """Weighted mean safety gap of bare f versus ground truth (equals SG + RH)."""
    return _weighted_mean(records, lambda r: r.safety_fstar - r.safety_f, compensated)


def compute_report(
    records: Sequence[ReturnTriple],
    scheme_name: str,
    params: object = None,
    *,
    compensated: bool = False,
) -> MetricsReport:
    """Aggregate one record set into a full report.

    ``hazard_f`` is computed independently of sg/rh so the decomposition
    identity is a real self-check, not a tautology.
    """
    records = list(records)
    return MetricsReport(
        sg=aggregate_sg(records, compensated=compensated),
        rh=aggregate_rh(records, compensated=compensated),
        ac=aggregate_ac(records, compensated=compensated),
        hazard_f=aggregate_hazard(records, compensated=compensated),
        n=len(records),
        total_weight=sum(r.weight for r in records),
        scheme_name=scheme_name,
        params_echo=params,
    )


def decomposition_residual(report: MetricsReport) -> float:
    """Absolute defect of SG + RH = hazard_f; < 1e-12 for any honest report."""
    return abs(report.sg + report.rh - report.hazard_f)


def normalize_report(report: MetricsReport, r_s_max: float, r_m_max: float) -> MetricsReport:
    """Rescale safety-side metrics by r_s_max and the mission side by r_m_max."""
    if r_s_max <= 0:
        raise ValueError(f"r_s_max must be > 0, got {r_s_max}")
    if r_m_max <= 0:
        raise ValueError(f"r_m_max must be > 0, got {r_m_max}")
    return replace(
        report,
        sg=report.sg / r_s_max,
        rh=report.rh / r_s_max,
        hazard_f=report.hazard_f / r_s_max,
        ac=report.ac / r_m_max,
    )


def to_null_monitor(records: Iterable[ReturnTriple]) -> list[ReturnTriple]:
    """Remap records as if the monitor never fired (fm returns := f returns)."""
    return [
        replace(r, safety_fm=r.safety_f, mission_fm=r.mission_f) for r in records
    ]
