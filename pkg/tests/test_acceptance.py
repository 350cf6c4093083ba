"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines.
"""

import random
import time

from monitoreval import cli
from monitoreval.core_metrics import (
    ReturnTriple,
    aggregate_ac,
    aggregate_rh,
    aggregate_sg,
    compute_report,
    decomposition_residual,
    to_null_monitor,
)
from monitoreval.generators import synth_classification, synth_threat, table1_reconstruction
from monitoreval.schemes import (
    SchemeParams,
    clf_error_returns,
    clf_threat_returns,
    detection_error_flag,
    landing_candidate_score,
    landing_e2_returns,
    triples_for_scheme,
)
from monitoreval.simulator import desk_suite, run_suite
from monitoreval.traces import (
    SCHEMES,
    Box,
    ClassificationRecord,
    DetectionFrameRecord,
    EpisodeTrace,
    FrameState,
    LandingCandidate,
    LandingImageRecord,
    load_traces,
    save_traces,
)

from oracles import brute_force_error_flag, random_frame

PARAMS = SchemeParams()


def verdict(name: str, ok: bool) -> None:
    print(f"\n[acceptance] {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, name


# ---------------------------------------------------------------------------
# randomized record-set builders, one per scheme


def _random_episode(rng: random.Random, sid: str, variant: str, length: int) -> EpisodeTrace:
    collide_at = None
    brake_at = None
    roll = rng.random()
    if variant != "f_star" and roll < 0.4:
        collide_at = rng.randrange(length)
    elif roll < 0.8:
        brake_at = rng.randrange(length)
    frames = []
    for t in range(length):
        if brake_at is not None and t >= brake_at:
            frames.append(FrameState(t, 0, 0, 0, 1))
        elif collide_at is not None and t >= collide_at:
            frames.append(FrameState(t, 0, 1 if t == collide_at else 0, 0, 0))
        else:
            frames.append(FrameState(t, 1, 0, rng.randrange(2), 0))
    return EpisodeTrace(sid, variant, tuple(frames))


def _random_landing(rng: random.Random, image_id: str) -> LandingImageRecord:
    n = rng.randrange(1, 5)
    candidates = tuple(
        LandingCandidate(f"c{i}", rng.randrange(2), rng.random(), rng.randrange(2))
        for i in range(n)
    )
    choices = [c.candidate_id for c in candidates] + ["default"]
    return LandingImageRecord(
        image_id,
        candidates,
        rng.choice(choices),
        rng.choice(choices),
        rng.choice(choices),
    )


def random_triples(scheme: str, rng: random.Random) -> list[ReturnTriple]:
    n = rng.randrange(1, 16)
    if scheme == "clf-error":
        return [
            clf_error_returns(rng.randrange(5), rng.randrange(5), rng.randrange(2))
            for _ in range(n)
        ]
    if scheme == "clf-threat":
        return [clf_threat_returns(rng.randrange(2), rng.randrange(2)) for _ in range(n)]
    if scheme == "det-error":
        triples = []
        for _ in range(n):
            gt, pred = random_frame(rng)
            triples.append(
                clf_threat_returns(detection_error_flag(gt, pred, PARAMS), rng.randrange(2))
            )
        return triples
    if scheme == "episodic":
        records = []
        length = rng.randrange(4, 16)
        for i in range(n):
            for variant in ("f", "f_with_monitor", "f_star"):
                records.append(_random_episode(rng, f"s{i}", variant, length))
        return triples_for_scheme("episodic", records, PARAMS)
    if scheme == "landing-e1":
        records = [_random_landing(rng, f"img{i}") for i in range(n)]
        return triples_for_scheme("landing-e1", records, PARAMS)
    if scheme == "landing-e2":
        records = [_random_landing(rng, f"img{i}") for i in range(n)]
        return triples_for_scheme("landing-e2", records, PARAMS)
    raise AssertionError(scheme)


# ---------------------------------------------------------------------------
# criteria


def test_criterion_1_decomposition_identity():
    rng = random.Random(20240)
    start = time.monotonic()
    worst = 0.0
    for scheme in SCHEMES:
        for i in range(1000):
            triples = random_triples(scheme, rng)
            if rng.random() < 0.3:
                triples = [
                    ReturnTriple(
                        t.safety_f, t.safety_fm, t.safety_fstar,
                        t.mission_f, t.mission_fm, weight=rng.uniform(0.1, 5.0),
                    )
                    for t in triples
                ]
            report = compute_report(triples, scheme)
            worst = max(worst, decomposition_residual(report))
    elapsed = time.monotonic() - start
    verdict(
        f"criterion 1: |SG+RH-hazard_f| < 1e-12 on 1000 sets x {len(SCHEMES)} schemes "
        f"(worst {worst:.2e}, {elapsed:.2f}s)",
        worst < 1e-12 and elapsed < 5.0,
    )


def test_criterion_2_null_monitor_identities():
    rng = random.Random(20241)
    ok = True
    for scheme in SCHEMES:
        for _ in range(200):
            remapped = to_null_monitor(random_triples(scheme, rng))
            ok = ok and aggregate_sg(remapped) == 0.0 and aggregate_ac(remapped) == 0.0
    verdict("criterion 2: null monitor gives SG = 0 and AC = 0 exactly", ok)


def test_criterion_3_recall_fnr_fpr_correspondences():
    configs = []
    for n in (10, 40, 100, 250, 1000):
        for errors in sorted({1, n // 4, n // 2, n - 1}):
            correct = n - errors
            for ta in sorted({0, errors // 2, errors}):
                for fa in sorted({0, correct // 3, correct}):
                    configs.append((n, errors, ta, fa))
    assert len(configs) >= 50
    worst = 0.0
    for n, errors, ta, fa in configs:
        triples = triples_for_scheme(
            "clf-error", synth_classification(n, errors, ta, fa), PARAMS
        )
        error_fraction = errors / n
        correct_fraction = (n - errors) / n
        worst = max(
            worst,
            abs(aggregate_sg(triples) / error_fraction - ta / errors),
            abs(aggregate_rh(triples) / error_fraction - (errors - ta) / errors),
            abs(aggregate_ac(triples) / correct_fraction - fa / (n - errors)),
        )
    verdict(
        f"criterion 3: SG/RH/AC match recall/FNR/FPR over {len(configs)} configs "
        f"(worst {worst:.2e})",
        worst < 1e-12,
    )


def test_criterion_4_table_reconstruction():
    report = compute_report(
        triples_for_scheme("clf-error", table1_reconstruction(), PARAMS), "clf-error"
    )
    exact = (
        report.sg == 0.184
        and report.rh == 0.140
        and report.ac == 0.304
        and report.hazard_f == 0.324
    )
    monitor_a = compute_report(
        triples_for_scheme("clf-threat", synth_threat(1000, 500, 344, 144), PARAMS), "clf-threat"
    )
    monitor_b = compute_report(
        triples_for_scheme("clf-threat", synth_threat(1000, 500, 86, 142), PARAMS), "clf-threat"
    )
    shared = monitor_a.hazard_f == 0.5 and monitor_b.hazard_f == 0.5
    verdict(
        "criterion 4: table reconstruction exact (0.184/0.140/0.304, hazard 0.324; "
        "threat rows share hazard 0.500)",
        exact and shared,
    )


def test_criterion_5_episodic_desk_suite(tmp_path):
    start = time.monotonic()
    configs, detector, monitor = desk_suite()
    summary = run_suite(configs, detector, monitor, tmp_path)
    records = []
    for variant in ("f", "f_with_monitor", "f_star"):
        records.extend(load_traces(summary.trace_paths[variant], "episodic"))
    report = compute_report(triples_for_scheme("episodic", records, PARAMS), "episodic")
    elapsed = time.monotonic() - start

    expected_ac = ((149 / 220 - 40 / 220) + (149 / 220 - 60 / 220)) / 20
    ok = (
        summary.collisions == {"f": 3, "f_with_monitor": 1, "f_star": 0}
        and report.sg == 2 / 20
        and report.rh == 1 / 20
        and report.ac == expected_ac
        and report.hazard_f == 3 / 20  # accident fraction of f
        and decomposition_residual(report) < 1e-12
        and elapsed < 2.0
    )
    verdict(
        f"criterion 5: desk suite SG=0.10 RH=0.05 AC={expected_ac:.4f} ({elapsed:.2f}s)", ok
    )


def test_criterion_6_matching_oracle_agreement():
    rng = random.Random(20246)
    disagreements = 0
    for _ in range(10_000):
        gt, pred = random_frame(rng)
        if detection_error_flag(gt, pred, PARAMS) != brute_force_error_flag(gt, pred, PARAMS):
            disagreements += 1
    verdict(
        f"criterion 6: matching flag agrees with exhaustive oracle on 10000 frames "
        f"({disagreements} disagreements)",
        disagreements == 0,
    )


def test_criterion_7_landing_score_gap_and_negative_gain():
    rng = random.Random(20247)
    gap_ok = True
    for kappa in (0.0, 0.25, 0.5, 0.9):
        for _ in range(10_000):
            score = landing_candidate_score(rng.randrange(2), rng.random(), kappa)
            gap_ok = gap_ok and (score == 0.0 or kappa <= score <= 1.0)
    rejected_only_safe = landing_e2_returns(
        [("only", 0, 0.1)], "only", "default", "only", SchemeParams(kappa=0.5)
    )
    negative = rejected_only_safe.safety_fm - rejected_only_safe.safety_f < 0.0
    verdict(
        "criterion 7: landing score is 0 or in [kappa, 1]; wrong rejection yields "
        "strictly negative gain",
        gap_ok and negative,
    )


def test_criterion_8_determinism_and_round_trip(tmp_path):
    configs, detector, monitor = desk_suite()
    dir_a = tmp_path / "a"
    dir_b = tmp_path / "b"
    run_suite(configs, detector, monitor, dir_a)
    run_suite(configs, detector, monitor, dir_b)
    sim_identical = all(
        (dir_a / name).read_bytes() == (dir_b / name).read_bytes()
        for name in ("traces_f.jsonl", "traces_f_with_monitor.jsonl", "traces_f_star.jsonl")
    )

    rng = random.Random(20248)
    round_trip = True
    samples = {
        "clf-threat": [
            ClassificationRecord(
                f"r{i}", rng.randrange(10), rng.randrange(10), rng.randrange(2), rng.randrange(2)
            )
            for i in range(30)
        ],
        "det-error": [
            DetectionFrameRecord(
                f"f{i}",
                tuple(Box(0.0, 0.0, float(rng.randrange(1, 9)), 4.0, rng.randrange(3))
                      for _ in range(rng.randrange(0, 4))),
                tuple(Box(1.0, 1.0, float(rng.randrange(2, 9)), 6.0, rng.randrange(3), rng.random())
                      for _ in range(rng.randrange(0, 4))),
                rng.randrange(2),
            )
            for i in range(30)
        ],
        "episodic": [
            _random_episode(rng, f"s{i}", variant, rng.randrange(2, 10))
            for i in range(10)
            for variant in ("f", "f_with_monitor", "f_star")
        ],
        "landing-e2": [_random_landing(rng, f"img{i}") for i in range(30)],
    }
    for scheme, records in samples.items():
        path = tmp_path / f"{scheme}.jsonl"
        save_traces(records, path, scheme)
        round_trip = round_trip and load_traces(path, scheme) == records

    trace = tmp_path / "table1.jsonl"
    cli.main(["generate", "table1", "--out", str(trace)])
    report_a = tmp_path / "ra.json"
    report_b = tmp_path / "rb.json"
    cli.main(["evaluate", str(trace), "--scheme", "clf-error", "--out", str(report_a)])
    cli.main(["evaluate", str(trace), "--scheme", "clf-error", "--out", str(report_b)])
    reports_identical = report_a.read_bytes() == report_b.read_bytes()

    verdict(
        "criterion 8: byte-identical simulation and reports; save/load round-trip on "
        "all record types",
        sim_identical and round_trip and reports_identical,
    )
