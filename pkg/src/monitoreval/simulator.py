"""Deterministic 1D braking scenario simulator.

A car drives down a straight road at a fixed integer speed; a pedestrian
pops up at a fixed position from a given step onward.  An abstract
detector reports the pedestrian per a miss probability driven by the
active perturbation, and may also report ghost pedestrians.  The braking
system stops the car when a reported pedestrian overlaps the critical
region ahead of it; the monitored variant additionally brakes on a
contrast alarm and discards region detections that a plausibility window
flags as ghosts.

Frame convention: trace frame ``t`` records the world state reached after
the decision on image ``t``.  Braking decided on image ``t`` therefore
shows as ``running = 0`` on frame ``t`` (the car stops between one frame
and the next); a collision during the same transition shows as
``collision = 1`` on frame ``t``.  The per-frame ``running`` bit is thus
exactly the next-step mission reward for the prediction at ``t``, and the
running-frame count divided by the episode length is the episode's
mission return.

All kinematics are integers and all randomness comes from per-purpose
streams seeded as ``Random(f"{seed}:miss")`` / ``Random(f"{seed}:ghost")``
(Mersenne Twister, string seeding), so identical inputs give bit-identical
traces on any platform, and the bare and monitored variants see identical
detector noise.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .traces import VARIANTS, EpisodeTrace, FrameState, save_traces

PERTURBATION_KINDS = (
    "smoke",
    "sun_flare",
    "rain",
    "row_add_logic",
    "shifted_pixel",
    "coarse_dropout",
    "grid_dropout",
    "channel_shuffle",
    "channel_dropout",
    "contrast",
    "brightness",
    "gaussian_noise",
)

# Default peak miss probability (at intensity 1) per perturbation kind.
_DEFAULT_PEAKS = {
    "smoke": 0.95,
    "sun_flare": 0.90,
    "rain": 0.70,
    "row_add_logic": 0.60,
    "shifted_pixel": 0.50,
    "coarse_dropout": 0.65,
    "grid_dropout": 0.60,
    "channel_shuffle": 0.55,
    "channel_dropout": 0.50,
    "contrast": 0.45,
    "brightness": 0.40,
    "gaussian_noise": 0.80,
}

DEFAULT_MISS_CURVES = {
    kind: ((0.0, 0.0), (1.0, peak)) for kind, peak in _DEFAULT_PEAKS.items()
}


@dataclass(frozen=True)
class PerturbationProfile:
    kind: str = "brightness"
    intensity: float = 0.0
    onset_step: int = 0

    def __post_init__(self) -> None:
        if self.kind not in PERTURBATION_KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if not 0.0 <= self.intensity <= 1.0:
            raise ValueError(f"intensity must be in [0, 1], got {self.intensity}")
        if self.onset_step < 0:
            raise ValueError(f"onset_step must be >= 0, got {self.onset_step}")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: str = "s000"
    episode_length: int = 220
    car_speed: int = 10
    pedestrian_appear_step: int = 100
    pedestrian_position: int = 1500
    critical_region_length: int = 60
    perturbation: PerturbationProfile = field(default_factory=PerturbationProfile)
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("episode_length", "car_speed", "pedestrian_position", "critical_region_length"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.pedestrian_appear_step, int) or self.pedestrian_appear_step < 0:
            raise ValueError(
                f"pedestrian_appear_step must be a nonnegative integer, got {self.pedestrian_appear_step!r}"
            )
        if self.pedestrian_appear_step >= self.episode_length:
            raise ValueError(
                "pedestrian_appear_step must be < episode_length, got "
                f"{self.pedestrian_appear_step} >= {self.episode_length}"
            )
        # With one decision per frame the region must cover at least one step
        # of travel, or even a perfect detector cannot stop in time.
        if self.critical_region_length < self.car_speed:
            raise ValueError(
                "critical_region_length must be >= car_speed, got "
                f"{self.critical_region_length} < {self.car_speed}"
            )
        if not isinstance(self.seed, int):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")


def _validate_curve(kind: str, points: Sequence[Sequence[float]]) -> tuple[tuple[float, float], ...]:
    if not points:
        raise ValueError(f"miss-rate curve for {kind!r} must have at least one point")
    normalized = tuple((float(x), float(y)) for x, y in points)
    last_x, last_y = -1.0, -1.0
    for x, y in normalized:
        if not 0.0 <= x <= 1.0 or not 0.0 <= y <= 1.0:
            raise ValueError(f"miss-rate curve for {kind!r} has a point outside [0, 1]: {(x, y)}")
        if x < last_x or y < last_y:
            raise ValueError(f"miss-rate curve for {kind!r} must be nondecreasing")
        last_x, last_y = x, y
    return normalized


def _interp(curve: Sequence[tuple[float, float]], x: float) -> float:
    if x <= curve[0][0]:
        return curve[0][1]
    for (x0, y0), (x1, y1) in zip(curve, curve[1:]):
        if x <= x1:
            if x1 == x0:
                return y1
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    return curve[-1][1]


@dataclass(frozen=True)
class DetectorModel:
    """Abstract pedestrian detector: per-step miss probability grows with the
    active perturbation's intensity, plus a flat spurious-detection rate."""

    base_miss_rate: float = 0.0
    ghost_rate: float = 0.0
    miss_rate_curves: Mapping[str, Sequence[tuple[float, float]]] = field(
        default_factory=lambda: DEFAULT_MISS_CURVES
    )

    def __post_init__(self) -> None:
        if not 0.0 <= self.base_miss_rate <= 1.0:
            raise ValueError(f"base_miss_rate must be in [0, 1], got {self.base_miss_rate}")
        if not 0.0 <= self.ghost_rate <= 1.0:
            raise ValueError(f"ghost_rate must be in [0, 1], got {self.ghost_rate}")
        curves = {
            kind: _validate_curve(kind, points) for kind, points in self.miss_rate_curves.items()
        }
        object.__setattr__(self, "miss_rate_curves", curves)

    def miss_rate(self, kind: str, intensity: float) -> float:
        curve = self.miss_rate_curves.get(kind, ((0.0, 0.0), (1.0, 1.0)))
        return min(1.0, max(0.0, self.base_miss_rate + _interp(curve, intensity)))


@dataclass(frozen=True)
class MonitorModel:
    """Contrast alarm above an intensity proxy threshold, plus a plausibility
    window that flags region detections with no detection history as ghosts."""

    contrast_threshold: float = 0.6
    plausibility_window: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.contrast_threshold <= 1.0:
            raise ValueError(f"contrast_threshold must be in [0, 1], got {self.contrast_threshold}")
        if not isinstance(self.plausibility_window, int) or self.plausibility_window < 1:
            raise ValueError(
                f"plausibility_window must be an integer >= 1, got {self.plausibility_window!r}"
            )


def run_episode(
    config: ScenarioConfig,
    detector: DetectorModel,
    monitor: MonitorModel,
    variant: str,
) -> EpisodeTrace:
    """Simulate one episode for one system variant; bit-deterministic."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    t_total = config.episode_length
    perturbation = config.perturbation
    u_miss = _stream(config.seed, "miss", t_total)
    u_ghost = _stream(config.seed, "ghost", t_total)

    pos = 0
    moving = True
    braked = False
    frames: list[FrameState] = []
    raw_detection_history: list[bool] = []

    for t in range(t_total):
        if not moving:
            frames.append(FrameState(t, 0, 0, 0, 1 if braked else 0))
            raw_detection_history.append(False)
            continue

        ped_visible = t >= config.pedestrian_appear_step
        active = t >= perturbation.onset_step
        if variant == "f_star":
            detected = ped_visible
            ghost = False
        else:
            p_miss = (
                detector.miss_rate(perturbation.kind, perturbation.intensity)
                if active
                else detector.base_miss_rate
            )
            detected = ped_visible and u_miss[t] >= p_miss
            ghost = u_ghost[t] < detector.ghost_rate

        in_region = pos < config.pedestrian_position <= pos + config.critical_region_length
        region_detection = (detected and in_region) or ghost

        monitor_alert = 0
        trigger = False
        if variant == "f_with_monitor":
            if active and perturbation.intensity > monitor.contrast_threshold:
                monitor_alert = 1
                trigger = True
            if region_detection:
                window = raw_detection_history[max(0, t - monitor.plausibility_window) : t]
                if not any(window):
                    monitor_alert = 1  # flagged as ghost: detection discarded
                else:
                    trigger = True
        elif variant == "f":
            trigger = region_detection
        else:  # f_star
            trigger = ped_visible and in_region

        raw_detection_history.append(detected or ghost)

        collision = 0
        if trigger:
            moving = False
            braked = True
        else:
            new_pos = pos + config.car_speed
            if ped_visible and pos < config.pedestrian_position <= new_pos:
                collision = 1
                moving = False
            pos = new_pos
        frames.append(
            FrameState(
                t=t,
                running=1 if moving else 0,
                collision=collision,
                monitor_flag=monitor_alert,
                braked=1 if braked else 0,
            )
        )

    return EpisodeTrace(scenario_id=config.scenario_id, variant=variant, frames=tuple(frames))


def _stream(seed: int, purpose: str, length: int) -> list[float]:
    rng = random.Random(f"{seed}:{purpose}")
    return [rng.random() for _ in range(length)]


@dataclass(frozen=True)
class SuiteSummary:
    n_scenarios: int
    trace_paths: dict
    collisions: dict
    brakes: dict


def run_suite(
    configs: Sequence[ScenarioConfig],
    detector: DetectorModel,
    monitor: MonitorModel,
    out_dir: str | Path,
) -> SuiteSummary:
    """Run every scenario under all three variants and write one trace file
    per variant into out_dir."""
    configs = list(configs)
    if not configs:
        raise ValueError("suite has no scenarios")
    ids = [c.scenario_id for c in configs]
    if len(set(ids)) != len(ids):
        raise ValueError("scenario ids must be unique within a suite")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    trace_paths = {}
    collisions = {}
    brakes = {}
    for variant in VARIANTS:
        traces = [run_episode(c, detector, monitor, variant) for c in configs]
        path = out_dir / f"traces_{variant}.jsonl"
        save_traces(traces, path, scheme="episodic")
        trace_paths[variant] = path
        collisions[variant] = sum(1 for tr in traces if tr.collision_frames() > 0)
        brakes[variant] = sum(1 for tr in traces if any(f.braked for f in tr.frames))
    return SuiteSummary(
        n_scenarios=len(configs),
        trace_paths=trace_paths,
        collisions=collisions,
        brakes=brakes,
    )


# ---------------------------------------------------------------------------
# built-in suites


def default_suite(base_seed: int = 0):
    """53 scenarios sweeping all perturbation kinds over intensity levels."""
    configs = []
    index = 0
    for k, kind in enumerate(PERTURBATION_KINDS):
        levels = (0.2, 0.4, 0.6, 0.8, 1.0) if k < 5 else (0.25, 0.5, 0.75, 1.0)
        for intensity in levels:
            configs.append(
                ScenarioConfig(
                    scenario_id=f"sim{index:03d}",
                    perturbation=PerturbationProfile(
                        kind=kind, intensity=intensity, onset_step=40 + 20 * (index % 3)
                    ),
                    seed=base_seed * 1000 + index,
                )
            )
            index += 1
    detector = DetectorModel(base_miss_rate=0.02, ghost_rate=0.001)
    monitor = MonitorModel(contrast_threshold=0.6, plausibility_window=3)
    return configs, detector, monitor


def desk_suite():
    """Fixed 20-scenario suite: 3 scenarios where the bare system crashes, of
    which the monitor averts 2 (contrast alarm) and misses 1 (perturbation
    below the contrast threshold but still blinding the detector)."""
    accidents = {
        2: PerturbationProfile(kind="smoke", intensity=1.0, onset_step=40),
        7: PerturbationProfile(kind="smoke", intensity=1.0, onset_step=60),
        13: PerturbationProfile(kind="gaussian_noise", intensity=0.4, onset_step=40),
    }
    configs = []
    for i in range(20):
        perturbation = accidents.get(i, PerturbationProfile())
        configs.append(
            ScenarioConfig(scenario_id=f"desk{i:02d}", perturbation=perturbation, seed=1000 + i)
        )
    curves = dict(DEFAULT_MISS_CURVES)
    curves["smoke"] = ((0.0, 0.0), (1.0, 1.0))
    curves["gaussian_noise"] = ((0.0, 0.0), (0.3, 1.0), (1.0, 1.0))
    detector = DetectorModel(base_miss_rate=0.0, ghost_rate=0.0, miss_rate_curves=curves)
    monitor = MonitorModel(contrast_threshold=0.5, plausibility_window=3)
    return configs, detector, monitor


# ---------------------------------------------------------------------------
# suite config files


def suite_from_json(path: str | Path):
    """Load (configs, detector, monitor) from a suite config file."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict) or "scenarios" not in obj:
        raise ValueError(f"{path}: suite config must be an object with a scenarios array")

    det_obj = obj.get("detector", {})
    detector = DetectorModel(
        base_miss_rate=det_obj.get("base_miss_rate", 0.0),
        ghost_rate=det_obj.get("ghost_rate", 0.0),
        miss_rate_curves={
            kind: [tuple(p) for p in points]
            for kind, points in det_obj.get("miss_rate_curves", DEFAULT_MISS_CURVES).items()
        },
    )
    mon_obj = obj.get("monitor", {})
    monitor = MonitorModel(
        contrast_threshold=mon_obj.get("contrast_threshold", 0.6),
        plausibility_window=mon_obj.get("plausibility_window", 3),
    )

    configs = []
    for i, s in enumerate(obj["scenarios"]):
        if not isinstance(s, dict):
            raise ValueError(f"{path}: scenario {i} must be an object")
        p = s.get("perturbation", {})
        configs.append(
            ScenarioConfig(
                scenario_id=s.get("scenario_id", f"s{i:03d}"),
                episode_length=s.get("episode_length", 220),
                car_speed=s.get("car_speed", 10),
                pedestrian_appear_step=s.get("pedestrian_appear_step", 100),
                pedestrian_position=s.get("pedestrian_position", 1500),
                critical_region_length=s.get("critical_region_length", 60),
                perturbation=PerturbationProfile(
                    kind=p.get("kind", "brightness"),
                    intensity=p.get("intensity", 0.0),
                    onset_step=p.get("onset_step", 0),
                ),
                seed=s.get("seed", i),
            )
        )
    return configs, detector, monitor


def suite_to_json(
    configs: Sequence[ScenarioConfig],
    detector: DetectorModel,
    monitor: MonitorModel,
    path: str | Path,
) -> None:
    obj = {
        "detector": {
            "base_miss_rate": detector.base_miss_rate,
            "ghost_rate": detector.ghost_rate,
            "miss_rate_curves": {
                kind: [list(p) for p in points]
                for kind, points in detector.miss_rate_curves.items()
            },
        },
        "monitor": {
            "contrast_threshold": monitor.contrast_threshold,
            "plausibility_window": monitor.plausibility_window,
        },
        "scenarios": [
            {
                "scenario_id": c.scenario_id,
                "episode_length": c.episode_length,
                "car_speed": c.car_speed,
                "pedestrian_appear_step": c.pedestrian_appear_step,
                "pedestrian_position": c.pedestrian_position,
                "critical_region_length": c.critical_region_length,
                "perturbation": {
                    "kind": c.perturbation.kind,
                    "intensity": c.perturbation.intensity,
                    "onset_step": c.perturbation.onset_step,
                },
                "seed": c.seed,
            }
            for c in configs
        ],
    }
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
