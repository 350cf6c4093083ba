"""Exact-count synthetic classification traces.

These generators place every record deterministically so the aggregated
metrics equal the closed-form count ratios to machine precision; no
sampling is involved.  They back the recall/FNR/FPR correspondence tests
and the published-table consistency reconstructions.
"""

from __future__ import annotations

from .traces import ClassificationRecord

_N_LABELS = 10


def synth_classification(
    n: int, n_errors: int, n_true_alarms: int, n_false_alarms: int
) -> list[ClassificationRecord]:
    """n records: n_errors wrong predictions (the first n_true_alarms of them
    flagged), then correct predictions (the first n_false_alarms flagged)."""
    _check_counts(n, n_errors, n_true_alarms, n_false_alarms, positives="n_errors")
    records = []
    for i in range(n):
        true = i % _N_LABELS
        if i < n_errors:
            predicted = (true + 1) % _N_LABELS
            flag = 1 if i < n_true_alarms else 0
        else:
            predicted = true
            flag = 1 if i - n_errors < n_false_alarms else 0
        records.append(
            ClassificationRecord(
                example_id=f"c{i:05d}",
                true_label=true,
                predicted_label=predicted,
                monitor_flag=flag,
            )
        )
    return records


def table1_reconstruction() -> list[ClassificationRecord]:
    """1000 records whose error-detection metrics land exactly on
    SG=0.184, RH=0.140, AC=0.304 (324 errors, 184 of them flagged; 676
    correct, 304 of them flagged)."""
    return synth_classification(1000, 324, 184, 304)


def synth_threat(
    n: int, n_threats: int, n_detected: int, n_false_alarms: int
) -> list[ClassificationRecord]:
    """n records with threat flags: n_threats threats (the first n_detected
    flagged by the monitor), then benign records (the first n_false_alarms
    flagged)."""
    _check_counts(n, n_threats, n_detected, n_false_alarms, positives="n_threats")
    records = []
    for i in range(n):
        label = i % _N_LABELS
        if i < n_threats:
            threat = 1
            flag = 1 if i < n_detected else 0
        else:
            threat = 0
            flag = 1 if i - n_threats < n_false_alarms else 0
        records.append(
            ClassificationRecord(
                example_id=f"t{i:05d}",
                true_label=label,
                predicted_label=label,
                monitor_flag=flag,
                threat_flag=threat,
            )
        )
    return records


def _check_counts(n: int, n_pos: int, n_hit: int, n_false: int, positives: str) -> None:
    for name, value in (("n", n), (positives, n_pos), ("hits", n_hit), ("false alarms", n_false)):
        if value < 0:
            raise ValueError(f"{name} must be >= 0, got {value}")
    if n_pos > n:
        raise ValueError(f"{positives}={n_pos} exceeds n={n}")
    if n_hit > n_pos:
        raise ValueError(f"hits={n_hit} exceed {positives}={n_pos}")
    if n_false > n - n_pos:
        raise ValueError(f"false alarms={n_false} exceed remaining records={n - n_pos}")
