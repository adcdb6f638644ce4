"""Sensor-to-pointer input pipeline for the keyboard-surface device.

Two mappings: absolute (sensor rectangle scaled onto the screen) and
relative (touchpad-style, depth-gated with clutching). A key-driven state
machine switches between typing and pointing modes; tab toggles the mode
and the spacebar clicks, but only when pressed by the untracked hand.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import events as ev
from .errors import NoDepthError, OutOfRangeError, TrackingGapError
from .geometry import StereoRig, TouchPlane, plane_basis, plane_distance, triangulate
from .kernels import hysteresis_states

SENSOR_W = 570
SENSOR_H = 300

MODE_TOGGLE_KEY = "tab"
CLICK_KEY = "space"

# a 100 Hz sensor should never be silent longer than this
GAP_THRESHOLD_S = 0.050


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError("rectangle extent must be positive")

    def contains(self, px: float, py: float) -> bool:
        return self.x <= px <= self.x + self.w and self.y <= py <= self.y + self.h


SENSOR_RECT = Rect(0, 0, SENSOR_W, SENSOR_H)
SCREEN_RECT = Rect(0, 0, ev.SCREEN_W, ev.SCREEN_H)


def absolute_map(p, sensor: Rect = SENSOR_RECT, screen: Rect = SCREEN_RECT) -> tuple[float, float]:
    """Affine scale+translate sending the sensor corners exactly onto the screen corners.

    Normalizing before scaling keeps the corner images bit-exact.
    """
    px, py = float(p[0]), float(p[1])
    if not sensor.contains(px, py):
        raise OutOfRangeError(f"sensor point ({px!r}, {py!r}) outside {sensor}")
    tx = (px - sensor.x) / sensor.w
    ty = (py - sensor.y) / sensor.h
    return screen.x + tx * screen.w, screen.y + ty * screen.h


def clamp_to_screen(x: float, y: float, screen: Rect = SCREEN_RECT) -> tuple[float, float]:
    return (
        min(max(x, screen.x), screen.x + screen.w),
        min(max(y, screen.y), screen.y + screen.h),
    )


# --- touch detection ------------------------------------------------------

@dataclass
class TouchDetector:
    """Hysteresis gate on signed plane distance: ON at <= t_on, OFF at >= t_off."""

    t_on: float = 2.0
    t_off: float = 4.0
    on: bool = False

    def __post_init__(self):
        if not self.t_on < self.t_off:
            raise ValueError("hysteresis requires t_on < t_off")

    def step(self, dist: float) -> bool | None:
        """Feed one distance sample; returns the new state on a transition, else None."""
        if not self.on and dist <= self.t_on:
            self.on = True
            return True
        if self.on and dist >= self.t_off:
            self.on = False
            return False
        return None


def detect_touch(dists, t_on: float = 2.0, t_off: float = 4.0, start_on: bool = False):
    """Touch state per sample for a whole distance stream (kernel-backed)."""
    if not t_on < t_off:
        raise ValueError("hysteresis requires t_on < t_off")
    d = np.ascontiguousarray(dists, dtype=np.float64)
    return hysteresis_states(d, float(t_on), float(t_off), bool(start_on))


def touch_transitions(dists, t_on: float = 2.0, t_off: float = 4.0, start_on: bool = False):
    """(index, state) pairs at each ON/OFF transition."""
    states = detect_touch(dists, t_on, t_off, start_on)
    out = []
    prev = start_on
    for i, s in enumerate(states):
        s = bool(s)
        if s != prev:
            out.append((i, s))
            prev = s
    return out


def relative_step(delta, gain: float, touch_on: bool, pos, screen: Rect = SCREEN_RECT):
    """Clutched touchpad step: while touching, move by gain*delta, clamped to the screen."""
    if gain <= 0:
        raise ValueError("gain must be positive")
    if not touch_on:
        return pos
    return clamp_to_screen(pos[0] + gain * delta[0], pos[1] + gain * delta[1], screen)


# --- mode state machine ---------------------------------------------------

@dataclass(frozen=True)
class ModeState:
    mode: str = "typing"                       # typing | pointing
    touch: bool = False
    last_pointer: tuple[float, float] = (ev.SCREEN_W / 2, ev.SCREEN_H / 2)


def mode_fsm_step(state: ModeState, event: ev.InputEvent) -> tuple[ModeState, list[ev.InputEvent]]:
    """Advance the typing/pointing state machine by one event.

    Tab toggles the mode. The spacebar clicks at the last pointer position,
    but only in pointing mode and only from the untracked hand; a tracked-hand
    press would be the pointing hand clicking on itself. Unknown inputs are
    ignored.
    """
    emitted: list[ev.InputEvent] = []
    if event.kind == ev.POINTER_SAMPLE:
        return replace(state, last_pointer=(event.x, event.y)), emitted
    if event.kind != ev.KEY_DOWN:
        return state, emitted
    if event.key == MODE_TOGGLE_KEY:
        new_mode = "pointing" if state.mode == "typing" else "typing"
        emitted.append(ev.mode_switch(event.t, new_mode))
        return replace(state, mode=new_mode), emitted
    if event.key == CLICK_KEY and state.mode == "pointing":
        if event.hand == "untracked":
            emitted.append(ev.click(event.t, state.last_pointer[0], state.last_pointer[1]))
        return state, emitted
    return state, emitted


# --- full pipeline --------------------------------------------------------

@dataclass(frozen=True)
class SensorFrame:
    """One 100 Hz sensor frame; marker positions in sensor pixels, None when lost."""

    t: float
    left: tuple[float, float] | None = None
    right: tuple[float, float] | None = None


@dataclass(frozen=True)
class PipelineConfig:
    mapping: str = "absolute"                 # absolute | relative
    gain: float = 1.9                         # screen px per mm of finger travel
    t_on: float = 2.0
    t_off: float = 4.0
    rig: StereoRig = field(default_factory=StereoRig)
    plane: TouchPlane | None = None           # required for relative mapping
    sensor: Rect = SENSOR_RECT
    screen: Rect = SCREEN_RECT

    def __post_init__(self):
        if self.mapping not in ("absolute", "relative"):
            raise ValueError(f"unknown mapping {self.mapping!r}")
        if self.gain <= 0:
            raise ValueError("gain must be positive")
        if not self.t_on < self.t_off:
            raise ValueError("hysteresis requires t_on < t_off")


def pipeline_config_from_dict(obj: dict) -> PipelineConfig:
    """PipelineConfig from a run-config block, e.g.

    {"mapping": "relative", "gain": 1.9, "t_on": 2.0, "t_off": 4.0,
     "rig": {"f": 800.0, "baseline": 60.0},
     "sensor": [0, 0, 570, 300], "screen": [0, 0, 1366, 768]}
    """
    known = {"mapping", "gain", "t_on", "t_off", "rig", "sensor", "screen"}
    unknown = set(obj) - known
    if unknown:
        raise ValueError(f"unknown pipeline config fields: {sorted(unknown)}")
    kwargs = {}
    for key in ("mapping", "gain", "t_on", "t_off"):
        if key in obj:
            kwargs[key] = obj[key]
    if "rig" in obj:
        rig = dict(obj["rig"])
        f = float(rig.pop("f", 800.0))
        baseline = float(rig.pop("baseline", rig.pop("B", 60.0)))  # B is a shorthand alias
        c_left = tuple(rig.pop("c_left", (285.0, 150.0)))
        c_right = tuple(rig.pop("c_right", (285.0, 150.0)))
        if rig:
            raise ValueError(f"unknown rig fields: {sorted(rig)}")
        kwargs["rig"] = StereoRig(f=f, baseline=baseline, c_left=c_left, c_right=c_right)
    for key in ("sensor", "screen"):
        if key in obj:
            kwargs[key] = Rect(*obj[key])
    return PipelineConfig(**kwargs)


@dataclass(frozen=True)
class GapAnnotation:
    t: float
    duration: float
    reason: str


@dataclass
class PipelineResult:
    events: list[ev.InputEvent]
    gaps: list[GapAnnotation]


def pipeline_run(items, config: PipelineConfig) -> PipelineResult:
    """Deterministically turn an interleaved frame/key stream into pointer events.

    `items` mixes SensorFrame objects with key InputEvents, already ordered
    by time. Absolute mapping emits one pointer sample per tracked frame;
    relative mapping gates motion on plane contact and accumulates clutched
    displacement. Typing mode ignores hand movement entirely, so the pointer
    holds and nothing is emitted until the mode toggles. Missing markers
    hold the pointer (never interpolate: a fabricated sample would shift
    movement-onset times) and silent stretches longer than GAP_THRESHOLD_S
    are annotated.
    """
    if config.mapping == "relative" and config.plane is None:
        raise ValueError("relative mapping requires a calibrated touch plane")

    out: list[ev.InputEvent] = []
    gaps: list[GapAnnotation] = []
    state = ModeState()
    detector = TouchDetector(config.t_on, config.t_off)
    prev_frame_t: float | None = None
    prev_point3: np.ndarray | None = None
    if config.plane is not None:
        u_axis, v_axis = plane_basis(config.plane)
    pos = state.last_pointer

    for item in items:
        if isinstance(item, ev.InputEvent):
            state, emitted = mode_fsm_step(state, item)
            out.append(item)
            out.extend(emitted)
            continue

        frame: SensorFrame = item
        if prev_frame_t is not None and frame.t - prev_frame_t > GAP_THRESHOLD_S:
            gaps.append(GapAnnotation(frame.t, frame.t - prev_frame_t, "slow sampling"))
        prev_frame_t = frame.t

        if config.mapping == "absolute":
            if frame.left is None:
                gaps.append(GapAnnotation(frame.t, 0.0, "marker lost"))
                continue
            if state.mode != "pointing":
                continue
            pos = clamp_to_screen(*absolute_map(frame.left, config.sensor, config.screen),
                                  config.screen)
            sample = ev.pointer_sample(frame.t, pos[0], pos[1])
            state, _ = mode_fsm_step(state, sample)
            out.append(sample)
            continue

        # relative mapping: touch state is tracked in every mode, motion only in pointing
        if frame.left is None or frame.right is None:
            gaps.append(GapAnnotation(frame.t, 0.0, "marker lost"))
            prev_point3 = None
            continue
        try:
            p3 = triangulate(frame.left, frame.right, config.rig)
        except (NoDepthError, TrackingGapError) as exc:
            gaps.append(GapAnnotation(frame.t, 0.0, f"no depth: {exc}"))
            prev_point3 = None
            continue
        dist = plane_distance(p3, config.plane)
        transition = detector.step(dist)
        if transition is not None:
            state = replace(state, touch=transition)
            if transition:
                prev_point3 = p3
        if detector.on and state.mode == "pointing" and prev_point3 is not None:
            delta3 = p3 - prev_point3
            delta = (float(delta3 @ u_axis), float(delta3 @ v_axis))
            pos = relative_step(delta, config.gain, True, pos, config.screen)
            sample = ev.pointer_sample(frame.t, pos[0], pos[1])
            state, _ = mode_fsm_step(state, sample)
            out.append(sample)
        prev_point3 = p3 if detector.on else None

    return PipelineResult(events=out, gaps=gaps)
