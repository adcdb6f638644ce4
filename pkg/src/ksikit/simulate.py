"""Synthetic operator: replays measured pointing/typing behavior over a plan.

Draws are lognormal around configured medians (times are positive and
right-skewed), pointer trajectories are minimum-jerk, and the generator
compensates for the extractor's 2 px movement-onset threshold and sample
quantization so that extracted medians reproduce the configured ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import events as ev
from .experiment import MOVE_THRESHOLD_PX, TrialPlan
from .kernels import minjerk_positions, minjerk_tau_scalar

SAMPLE_DT = 0.01            # 100 Hz pointer stream
PRESENT_DELAY = 0.25        # word completion/hit -> next target onset
SESSION_LEAD_IN = 1.0       # quiet time before the first target
TAB_LEAD = 0.015            # tab press precedes movement onset by this much
KEY_HOLD = 0.035


@dataclass(frozen=True)
class LearningCurve:
    """Block multiplier max(n^-exponent, floor), renormalized so the final
    block multiplier is exactly 1; the configured median is the trained,
    final-block value (the block the study reports for novices)."""

    exponent: float = 0.0
    floor: float = 0.0

    def __post_init__(self):
        if self.exponent < 0:
            raise ValueError("learning exponent must be >= 0")
        if not 0.0 <= self.floor <= 1.0:
            raise ValueError("learning floor must lie in [0, 1]")

    def multiplier(self, block_index: int, block_count: int) -> float:
        n = block_index + 1
        raw = max(n ** -self.exponent, self.floor)
        final = max(block_count ** -self.exponent, self.floor)
        return raw / final


@dataclass(frozen=True)
class OperatorProfile:
    device: str
    cohort: str
    homing_median: float        # s, trained value
    homing_spread: float        # lognormal sigma, dimensionless
    fitts_a: float              # s
    fitts_b: float              # s/bit
    movement_noise_sd: float    # s
    return_median: float        # s
    miss_prob: dict[int, float]
    overlap_prob: float
    learning: LearningCurve
    inter_key_interval: float   # s
    discomfort_median: float    # post-minus-baseline target score

    def __post_init__(self):
        for name in ("homing_median", "fitts_a", "return_median", "inter_key_interval"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.overlap_prob <= 1.0:
            raise ValueError("overlap_prob must lie in [0, 1]")
        for id_bits, p in self.miss_prob.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"miss_prob[{id_bits}] must lie in [0, 1]")

    def movement_median(self, id_bits: int) -> float:
        return self.fitts_a + self.fitts_b * id_bits

    def homing_median_for_block(self, block_index: int, block_count: int) -> float:
        return self.homing_median * self.learning.multiplier(block_index, block_count)


def _profile_from_dict(obj: dict) -> OperatorProfile:
    return OperatorProfile(
        device=obj["device"],
        cohort=obj["cohort"],
        homing_median=float(obj["homing_median"]),
        homing_spread=float(obj["homing_spread"]),
        fitts_a=float(obj["fitts_a"]),
        fitts_b=float(obj["fitts_b"]),
        movement_noise_sd=float(obj["movement_noise_sd"]),
        return_median=float(obj["return_median"]),
        miss_prob={int(k): float(v) for k, v in obj["miss_prob"].items()},
        overlap_prob=float(obj["overlap_prob"]),
        learning=LearningCurve(float(obj["learning"]["exponent"]), float(obj["learning"]["floor"])),
        inter_key_interval=float(obj["inter_key_interval"]),
        discomfort_median=float(obj["discomfort_median"]),
    )


def preset(device: str, cohort: str) -> OperatorProfile:
    """Shipped behavioral profile for a device/cohort cell of the study grid."""
    name = f"profiles/{device}_{cohort}.json"
    try:
        text = resources.files("ksikit").joinpath(name).read_text("utf-8")
    except FileNotFoundError:
        raise ValueError(f"no preset profile for ({device}, {cohort})") from None
    return _profile_from_dict(json.loads(text))


def profile_overrides(base: OperatorProfile, overrides: dict) -> OperatorProfile:
    """Profile with selected scalar fields replaced (config-file override hook)."""
    obj = {
        "device": base.device,
        "cohort": base.cohort,
        "homing_median": base.homing_median,
        "homing_spread": base.homing_spread,
        "fitts_a": base.fitts_a,
        "fitts_b": base.fitts_b,
        "movement_noise_sd": base.movement_noise_sd,
        "return_median": base.return_median,
        "miss_prob": {str(k): v for k, v in base.miss_prob.items()},
        "overlap_prob": base.overlap_prob,
        "learning": {"exponent": base.learning.exponent, "floor": base.learning.floor},
        "inter_key_interval": base.inter_key_interval,
        "discomfort_median": base.discomfort_median,
    }
    for key, value in overrides.items():
        if key not in obj:
            raise ValueError(f"unknown profile field {key!r}")
        obj[key] = value
    return _profile_from_dict(obj)


# --- session generation -----------------------------------------------------

def _lognormal(rng: np.random.Generator, median: float, sigma: float) -> float:
    return median * math.exp(sigma * rng.standard_normal())


def _scatter_inside(rng: np.random.Generator, cx: float, cy: float, w: float):
    """Click endpoint around the center, truncated to stay inside the target."""
    sigma = w / 6.0
    limit = 0.49 * w
    for _ in range(16):
        dx = sigma * rng.standard_normal()
        dy = sigma * rng.standard_normal()
        if dx * dx + dy * dy <= limit * limit:
            return cx + dx, cy + dy
    return cx, cy


def _miss_point(rng: np.random.Generator, cx: float, cy: float, w: float):
    """First click of an error trial: just outside the target edge."""
    angle = rng.uniform(0.0, 2.0 * math.pi)
    radius = (w / 2.0) * (1.05 + 0.25 * rng.uniform())
    return cx + radius * math.cos(angle), cy + radius * math.sin(angle)


class _SessionBuilder:
    def __init__(self, meta: ev.SessionMeta):
        self.meta = meta
        self.events: list[ev.InputEvent] = []
        self.fingers = meta.device == "fingers"

    def add(self, e: ev.InputEvent):
        self.events.append(e)

    def emit_trajectory(self, t_start, x0, y0, x1, y1, duration):
        n = int(duration / SAMPLE_DT) + 1
        ts, xs, ys = minjerk_positions(float(x0), float(y0), float(x1), float(y1),
                                       n, float(duration), SAMPLE_DT)
        last_t = ts[n - 1]
        ts = ts.tolist()
        xs = xs.tolist()
        ys = ys.tolist()
        add = self.events.append
        for i in range(n):
            add(ev.InputEvent(t_start + ts[i], ev.POINTER_SAMPLE, x=xs[i], y=ys[i]))
        if last_t < duration:
            add(ev.InputEvent(t_start + duration, ev.POINTER_SAMPLE, x=float(x1), y=float(y1)))

    def emit_click(self, t, x, y):
        if self.fingers:
            self.add(ev.key_down(t, "space", hand="untracked"))
            self.add(ev.key_up(t + KEY_HOLD, "space"))
        self.add(ev.click(t, x, y))

    def emit_mode_switch(self, t, to):
        if self.fingers:
            self.add(ev.key_down(t, "tab", hand="untracked"))
            self.add(ev.mode_switch(t, to))
            self.add(ev.key_up(t + KEY_HOLD, "tab"))

    def finish(self) -> ev.SessionLog:
        self.events.sort(key=lambda e: e.t)
        return ev.SessionLog(meta=self.meta, events=self.events)


def simulate_session(
    profile: OperatorProfile,
    plan: TrialPlan,
    seed: int,
    participant_id: str = "p0",
) -> ev.SessionLog:
    """Deterministic synthetic session for one participant on one device."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed), 7))))
    meta = ev.SessionMeta(
        participant_id=participant_id,
        device=profile.device,
        cohort=profile.cohort,
        block_count=plan.block_count,
        seed=int(seed),
    )
    b = _SessionBuilder(meta)
    pos = (ev.SCREEN_W / 2.0, ev.SCREEN_H / 2.0)
    b.add(ev.pointer_sample(0.0, pos[0], pos[1]))

    shown_t = SESSION_LEAD_IN
    prev_boundary = 0.0  # latest committed event time before the upcoming target
    block_count = plan.block_count

    for block_i, block in enumerate(plan.blocks):
        homing_median = profile.homing_median_for_block(block_i, block_count)
        for id_set in block:
            movement_median = profile.movement_median(id_set.id_bits)
            sigma_m = profile.movement_noise_sd / movement_median
            miss_p = profile.miss_prob.get(id_set.id_bits, 0.0)
            n_targets = len(id_set.targets)
            for t_i, target in enumerate(id_set.targets):
                b.add(ev.target_shown(shown_t, t_i, target.cx, target.cy, target.w))

                holding = _lognormal(rng, homing_median, profile.homing_spread)
                intended = _lognormal(rng, movement_median, sigma_m)
                is_miss = rng.uniform() < miss_p
                if is_miss:
                    first_xy = _miss_point(rng, target.cx, target.cy, target.w)
                else:
                    first_xy = _scatter_inside(rng, target.cx, target.cy, target.w)

                dist = math.hypot(first_xy[0] - pos[0], first_xy[1] - pos[1])
                tau_star = minjerk_tau_scalar(MOVE_THRESHOLD_PX / max(dist, MOVE_THRESHOLD_PX + 1e-9))
                duration = (intended + SAMPLE_DT / 2.0) / max(1.0 - tau_star, 1e-6)

                is_overlap = rng.uniform() < profile.overlap_prob
                if is_overlap:
                    lead_min = tau_star * duration * 1.15 + SAMPLE_DT
                    lead_max = min(0.45 * duration, (shown_t - prev_boundary) - 0.04)
                    if lead_min < lead_max:
                        t_start = shown_t - rng.uniform(lead_min, lead_max)
                    else:
                        is_overlap = False
                if not is_overlap:
                    onset = max(holding, SAMPLE_DT / 2.0 + 1e-6)
                    t_start = shown_t + onset - tau_star * duration - SAMPLE_DT / 2.0
                    t_start = max(t_start, prev_boundary + 1e-4)

                b.emit_mode_switch(max(t_start - TAB_LEAD, prev_boundary + 1e-4), "pointing")
                b.emit_trajectory(t_start, pos[0], pos[1], first_xy[0], first_xy[1], duration)
                click_t = t_start + duration
                b.emit_click(click_t, first_xy[0], first_xy[1])
                pos = first_xy

                if is_miss:
                    final_xy = _scatter_inside(rng, target.cx, target.cy, target.w)
                    correction = max(0.12, 0.2 * duration) * math.exp(0.2 * rng.standard_normal())
                    b.emit_trajectory(click_t, pos[0], pos[1], final_xy[0], final_xy[1], correction)
                    click_t = click_t + correction
                    b.emit_click(click_t, final_xy[0], final_xy[1])
                    pos = final_xy

                hit_t = click_t
                if t_i < n_targets - 1:
                    word = id_set.words[t_i]
                    b.add(ev.word_shown(hit_t, word))
                    ret = _lognormal(rng, profile.return_median, profile.homing_spread)
                    b.emit_mode_switch(hit_t + 0.5 * ret, "typing")
                    t_char = hit_t + ret
                    last_char = t_char
                    for ch in word:
                        b.add(ev.char_typed(t_char, ch))
                        last_char = t_char
                        t_char += profile.inter_key_interval * math.exp(0.15 * rng.standard_normal())
                    prev_boundary = max(last_char, hit_t + 0.5 * ret + KEY_HOLD)
                    shown_t = prev_boundary + PRESENT_DELAY
                else:
                    b.emit_mode_switch(hit_t + 0.08, "typing")
                    prev_boundary = hit_t + 0.08 + KEY_HOLD
                    shown_t = prev_boundary + PRESENT_DELAY

    return b.finish()


# --- discomfort ---------------------------------------------------------------

_DEVICE_CODE = {"fingers": 1, "mouse": 2, "trackpad": 3}


def simulate_discomfort(profile: OperatorProfile, phase: str, seed: int) -> ev.DiscomfortSurvey:
    """Six body-part ratings; the baseline depends only on the seed, so the
    post-minus-baseline score is centered on the profile's target."""
    base_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed), 101))))
    baseline = np.clip(np.abs(base_rng.normal(0.6, 0.25, size=6)), 0.0, 10.0)
    if phase == "baseline":
        return ev.DiscomfortSurvey(tuple(float(r) for r in baseline), "baseline")
    if phase != "post_device":
        raise ValueError(f"unknown survey phase {phase!r}")
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((int(seed), 202, _DEVICE_CODE[profile.device])))
    )
    delta = rng.normal(profile.discomfort_median, 0.30)
    parts = np.clip(baseline + delta + rng.normal(0.0, 0.10, size=6), 0.0, 10.0)
    return ev.DiscomfortSurvey(tuple(float(r) for r in parts), "post_device")
