"""Fitts-task construction, trial sequencing, and per-target metric extraction.

A block presents the three indexes of difficulty in a seeded random order;
each index shows 11 ring targets at a fixed 400 px spacing with a 4-6
letter word typed between consecutive clicks (the mixed typing/pointing
variant of the task).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import events as ev
from .errors import DataError, GeometryError, IncompleteTrialError, LogParseError
from .kernels import first_exceed
from .pipeline import Rect, SCREEN_RECT

DEFAULT_IDS = (3, 4, 5)
DEFAULT_DISTANCE = 400.0
DEFAULT_TARGETS = 11
DEFAULT_WORDS = 10
DEFAULT_BLOCKS = 8
SCREEN_CENTER = (ev.SCREEN_W / 2, ev.SCREEN_H / 2)

# displacement below this is treated as sensor noise, not movement onset
MOVE_THRESHOLD_PX = 2.0

_DEVICE_CODE = {"fingers": 0, "mouse": 1, "trackpad": 2}


def id_width(id_bits: float, d: float) -> float:
    """Target width for a difficulty index under the Shannon formulation.

    log2(d/w + 1) = id  =>  w = d / (2^id - 1).
    """
    if id_bits <= 0 or d <= 0:
        raise DataError(f"id and distance must be positive, got id={id_bits}, d={d}")
    return d / (2.0 ** id_bits - 1.0)


def width_id(w: float, d: float) -> float:
    """Inverse of id_width: difficulty index for a width/distance pair."""
    if w <= 0 or d <= 0:
        raise DataError(f"width and distance must be positive, got w={w}, d={d}")
    return math.log2(d / w + 1.0)


@dataclass(frozen=True)
class TargetSpec:
    index: int          # position in visiting order, 0-based
    cx: float
    cy: float
    w: float            # diameter, px

    def contains(self, x: float, y: float) -> bool:
        """Hit rule: Euclidean distance from the center at most half the diameter."""
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 <= (self.w / 2.0) ** 2


def ring_layout(
    n: int = DEFAULT_TARGETS,
    d: float = DEFAULT_DISTANCE,
    center: tuple[float, float] = SCREEN_CENTER,
    width: float = 50.0,
    screen: Rect = SCREEN_RECT,
) -> list[TargetSpec]:
    """Targets on a circle, ordered so consecutive hops are exactly d apart.

    The visiting order jumps k = ceil(n/2) slots each step, criss-crossing
    the ring; the radius solves the chord equation 2R sin(k*pi/n) = d.
    Requires odd n so the jump visits every slot exactly once.
    """
    if n < 3 or n % 2 == 0:
        raise GeometryError(f"ring needs an odd number of targets >= 3, got {n}")
    if d <= 0 or width <= 0:
        raise GeometryError("distance and width must be positive")
    k = (n + 1) // 2
    radius = d / (2.0 * math.sin(k * math.pi / n))
    cx, cy = center
    reach = radius + width / 2.0
    if (
        cx - reach < screen.x
        or cx + reach > screen.x + screen.w
        or cy - reach < screen.y
        or cy + reach > screen.y + screen.h
    ):
        raise GeometryError(
            f"ring of radius {radius:.1f} px plus width {width:.1f} px leaves the screen"
        )
    targets = []
    for i in range(n):
        slot = (i * k) % n
        angle = -math.pi / 2.0 + 2.0 * math.pi * slot / n
        targets.append(
            TargetSpec(index=i, cx=cx + radius * math.cos(angle), cy=cy + radius * math.sin(angle), w=width)
        )
    return targets


# --- plans ----------------------------------------------------------------

@dataclass(frozen=True)
class IdSet:
    id_bits: int
    width: float
    targets: tuple[TargetSpec, ...]
    words: tuple[str, ...]


@dataclass(frozen=True)
class TrialPlan:
    device: str
    seed: int
    ids: tuple[int, ...]
    distance: float
    blocks: tuple[tuple[IdSet, ...], ...]

    @property
    def block_count(self) -> int:
        return len(self.blocks)


def load_word_pool() -> list[str]:
    """Bundled common-word list, deduplicated and filtered to 4-6 letters."""
    text = resources.files("ksikit").joinpath("data/words.txt").read_text("utf-8")
    seen = set()
    pool = []
    for raw in text.split():
        word = raw.strip().lower()
        if 4 <= len(word) <= 6 and word not in seen:
            seen.add(word)
            pool.append(word)
    return pool


def make_plan(
    device: str,
    ids: tuple[int, ...] = DEFAULT_IDS,
    blocks: int = DEFAULT_BLOCKS,
    seed: int = 0,
    n_targets: int = DEFAULT_TARGETS,
    distance: float = DEFAULT_DISTANCE,
    center: tuple[float, float] = SCREEN_CENTER,
    word_pool: list[str] | None = None,
) -> TrialPlan:
    """Materialize a full trial plan; a pure function of (device, ids, blocks, seed)."""
    if device not in _DEVICE_CODE:
        raise ValueError(f"unknown device {device!r}")
    if blocks < 1:
        raise ValueError("need at least one block")
    pool = word_pool if word_pool is not None else load_word_pool()
    n_words = n_targets - 1
    if len(pool) < n_words:
        raise DataError(f"word pool too small: {len(pool)} < {n_words}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed), _DEVICE_CODE[device]))))
    plan_blocks = []
    for _ in range(blocks):
        order = [ids[i] for i in rng.permutation(len(ids))]
        sets = []
        for id_bits in order:
            w = id_width(id_bits, distance)
            targets = tuple(ring_layout(n_targets, distance, center, w))
            words = tuple(pool[i] for i in rng.choice(len(pool), size=n_words, replace=False))
            sets.append(IdSet(id_bits=id_bits, width=w, targets=targets, words=words))
        plan_blocks.append(tuple(sets))
    return TrialPlan(device=device, seed=seed, ids=tuple(ids), distance=distance, blocks=tuple(plan_blocks))


def encode_plan(plan: TrialPlan):
    """Plan as JSONL: one header record, then one record per ID set."""
    yield json.dumps(
        {
            "k": "plan_meta",
            "device": plan.device,
            "seed": plan.seed,
            "ids": list(plan.ids),
            "distance": plan.distance,
            "block_count": plan.block_count,
        },
        separators=(",", ":"),
    )
    for b, block in enumerate(plan.blocks):
        for s in block:
            yield json.dumps(
                {
                    "k": "id_set",
                    "block": b,
                    "id": s.id_bits,
                    "width": s.width,
                    "targets": [[t.index, t.cx, t.cy, t.w] for t in s.targets],
                    "words": list(s.words),
                },
                separators=(",", ":"),
            )


def decode_plan(lines) -> TrialPlan:
    header = None
    blocks: dict[int, list[IdSet]] = {}
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogParseError(line_no, f"bad plan record: {exc}") from None
        kind = obj.get("k")
        if kind == "plan_meta":
            header = obj
        elif kind == "id_set":
            targets = tuple(TargetSpec(int(i), float(cx), float(cy), float(w)) for i, cx, cy, w in obj["targets"])
            blocks.setdefault(int(obj["block"]), []).append(
                IdSet(int(obj["id"]), float(obj["width"]), targets, tuple(obj["words"]))
            )
        else:
            raise LogParseError(line_no, f"unknown plan record kind {kind!r}")
    if header is None:
        raise LogParseError(1, "plan file missing plan_meta record")
    ordered = tuple(tuple(blocks[b]) for b in sorted(blocks))
    return TrialPlan(
        device=header["device"],
        seed=int(header["seed"]),
        ids=tuple(int(i) for i in header["ids"]),
        distance=float(header["distance"]),
        blocks=ordered,
    )


def write_plan(plan: TrialPlan, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for line in encode_plan(plan):
            f.write(line)
            f.write("\n")


def read_plan(path) -> TrialPlan:
    with open(path, "r", encoding="utf-8") as f:
        return decode_plan(f)


def latin_order(devices=("fingers", "mouse", "trackpad"), participant_index: int = 0):
    """Cyclic Latin-square row for a participant: each device once per row and column."""
    if participant_index < 0:
        raise ValueError("participant_index must be >= 0")
    n = len(devices)
    row = participant_index % n
    return tuple(devices[(row + j) % n] for j in range(n))


# --- trial sequencing -------------------------------------------------------

@dataclass
class TargetOutcome:
    block: int
    id_bits: int
    target_index: int
    shown_t: float
    hit_t: float | None = None
    misses: int = 0
    word: str | None = None
    word_done_t: float | None = None


@dataclass
class TrialRun:
    outcomes: list[TargetOutcome]
    complete: bool


def run_trial(plan: TrialPlan, event_stream) -> TrialRun:
    """Replay a captured event stream against its plan.

    Walks the show-target / click / type-word cycle for every ID set,
    recording misses (the target persists until hit) and word completion.
    Raises IncompleteTrialError if the stream ends mid-trial.
    """
    outcomes: list[TargetOutcome] = []
    it = iter(event_stream)

    for b, block in enumerate(plan.blocks):
        for set_i, id_set in enumerate(block):
            for t_i, target in enumerate(id_set.targets):
                outcome = TargetOutcome(block=b, id_bits=id_set.id_bits, target_index=t_i, shown_t=math.nan)
                # phase 1: the target appears
                for e in it:
                    if e.kind == ev.TARGET_SHOWN:
                        if e.idx != t_i:
                            raise IncompleteTrialError(
                                f"expected target {t_i}, log shows {e.idx} (block {b}, set {set_i})",
                                b, set_i, t_i,
                            )
                        outcome.shown_t = e.t
                        break
                else:
                    raise IncompleteTrialError(
                        f"stream ended before target {t_i} of set {set_i} in block {b} was shown",
                        b, set_i, t_i,
                    )
                # phase 2: clicks until the target is hit
                for e in it:
                    if e.kind == ev.CLICK:
                        if target.contains(e.x, e.y):
                            outcome.hit_t = e.t
                            break
                        outcome.misses += 1
                else:
                    raise IncompleteTrialError(
                        f"stream ended awaiting a hit on target {t_i} (block {b}, set {set_i})",
                        b, set_i, t_i,
                    )
                # phase 3: type the prompted word (not after the set's last target)
                if t_i < len(id_set.targets) - 1:
                    word = id_set.words[t_i]
                    outcome.word = word
                    typed = ""
                    got_prompt = False
                    for e in it:
                        if e.kind == ev.WORD_SHOWN:
                            if e.word != word:
                                raise IncompleteTrialError(
                                    f"expected word {word!r}, log shows {e.word!r}",
                                    b, set_i, t_i,
                                )
                            got_prompt = True
                        elif e.kind == ev.CHAR_TYPED:
                            if e.ch == "\b":
                                typed = typed[:-1]
                            else:
                                typed += e.ch
                            if typed == word:
                                outcome.word_done_t = e.t
                                break
                    else:
                        raise IncompleteTrialError(
                            f"stream ended while typing {word!r} (block {b}, set {set_i})",
                            b, set_i, t_i,
                        )
                    if not got_prompt:
                        raise IncompleteTrialError(
                            f"word {word!r} was typed without a prompt", b, set_i, t_i
                        )
                outcomes.append(outcome)
    return TrialRun(outcomes=outcomes, complete=True)


# --- metric extraction ------------------------------------------------------

@dataclass(frozen=True)
class TrialMetrics:
    block: int
    id_bits: int
    target_index: int
    homing_t: float | None
    movement_t: float | None
    return_t: float | None      # None for the last target of an ID set
    errors: int
    overlap: bool
    gap: str | None = None      # populated when a phase could not be measured


def extract_metrics(
    session: ev.SessionLog,
    ids: tuple[int, ...] = DEFAULT_IDS,
    distance: float = DEFAULT_DISTANCE,
    move_threshold: float = MOVE_THRESHOLD_PX,
    drop_first_target: bool = False,
) -> list[TrialMetrics]:
    """Per-target homing / movement / return times and error counts.

    Homing runs from target onset to the first pointer sample displaced more
    than `move_threshold` px from the pointer's position at onset. If the
    pointer was already in motion when the target appeared (it left its rest
    position beforehand), homing is clamped to zero and the target is flagged
    as an overlap. Movement ends at the successful click; earlier clicks
    outside the target count as errors. Return time runs from the successful
    click to the first typed character of the following word.

    Every target is measured, including the first of each ID set;
    drop_first_target discards that one for protocols that treat it as a
    warm-up.
    """
    pt_list, px_list, py_list = [], [], []
    clicks = []
    chars = []
    shown = []
    for e in session.events:
        k = e.kind
        if k == ev.POINTER_SAMPLE:
            pt_list.append(e.t)
            px_list.append(e.x)
            py_list.append(e.y)
        elif k == ev.CLICK:
            clicks.append((e.t, e.x, e.y))
        elif k == ev.CHAR_TYPED:
            chars.append(e.t)
        elif k == ev.TARGET_SHOWN:
            shown.append((e.t, e.idx, e.cx, e.cy, e.w))

    pt = np.asarray(pt_list)
    px = np.asarray(px_list)
    py = np.asarray(py_list)
    click_t = np.asarray([c[0] for c in clicks])
    char_t = np.asarray(chars)

    sets_per_block = max(1, len(ids))
    set_counter = -1
    metrics: list[TrialMetrics] = []
    prev_hit_t = 0.0
    prev_rest_xy = (px[0], py[0]) if len(pt) else (None, None)

    for j, (t_shown, idx, cx, cy, w) in enumerate(shown):
        if idx == 0:
            set_counter += 1
        block = set_counter // sets_per_block
        id_bits = int(round(width_id(w, distance))) if w > 0 else -1
        next_shown = shown[j + 1][0] if j + 1 < len(shown) else math.inf
        is_last_of_set = (j + 1 < len(shown) and shown[j + 1][1] == 0) or j + 1 == len(shown)

        # clicks belonging to this target; a click at the very instant the
        # next target appears still belongs to this one (the runner stamps
        # the advance with the same clock reading as the hit)
        c_lo = int(np.searchsorted(click_t, t_shown, side="right"))
        if math.isinf(next_shown):
            c_hi = len(click_t)
        else:
            c_hi = int(np.searchsorted(click_t, next_shown, side="right"))
        errors = 0
        hit_t = None
        hit_xy = None
        r2 = (w / 2.0) ** 2
        for ci in range(c_lo, c_hi):
            tc, xc, yc = clicks[ci]
            if (xc - cx) ** 2 + (yc - cy) ** 2 <= r2:
                hit_t = tc
                hit_xy = (xc, yc)
                break
            errors += 1
        if hit_t is None:
            metrics.append(
                TrialMetrics(block, id_bits, idx, None, None, None, errors, False,
                             gap="no successful click")
            )
            continue

        # pointer position at target onset; when the log opens with a target
        # (no samples yet), the first sample after onset is the rest reference
        p_at = int(np.searchsorted(pt, t_shown, side="right")) - 1
        if p_at < 0:
            first_after = int(np.searchsorted(pt, t_shown, side="right"))
            if first_after >= len(pt) or pt[first_after] > hit_t:
                metrics.append(
                    TrialMetrics(block, id_bits, idx, None, None, None, errors, False,
                                 gap="no pointer samples before the hit")
                )
                prev_hit_t, prev_rest_xy = hit_t, hit_xy
                continue
            p_at = first_after
        x0, y0 = px[p_at], py[p_at]

        # did movement begin before the target appeared?
        overlap = False
        if prev_rest_xy[0] is not None:
            w_lo = int(np.searchsorted(pt, prev_hit_t, side="right"))
            if w_lo <= p_at:
                k_rel = first_exceed(
                    px[w_lo:p_at + 1], py[w_lo:p_at + 1],
                    float(prev_rest_xy[0]), float(prev_rest_xy[1]), float(move_threshold),
                )
                overlap = k_rel >= 0

        # first movement after onset
        m_lo = p_at + 1
        m_hi = int(np.searchsorted(pt, hit_t, side="right"))
        k_rel = first_exceed(px[m_lo:m_hi], py[m_lo:m_hi], float(x0), float(y0), float(move_threshold)) \
            if m_hi > m_lo else -1
        if k_rel < 0:
            metrics.append(
                TrialMetrics(block, id_bits, idx, None, None, None, errors, overlap,
                             gap="no pointer movement before the hit")
            )
            prev_hit_t, prev_rest_xy = hit_t, hit_xy
            continue
        t_move = pt[m_lo + k_rel]
        homing = 0.0 if overlap else float(t_move - t_shown)
        movement = float(hit_t - t_move)

        # return time: first typed character after the hit, if a word follows
        return_t = None
        gap = None
        if not is_last_of_set:
            ch_lo = int(np.searchsorted(char_t, hit_t, side="right"))
            if ch_lo < len(char_t) and char_t[ch_lo] < next_shown:
                return_t = float(char_t[ch_lo] - hit_t)
            else:
                gap = "no typed character after the hit"

        metrics.append(
            TrialMetrics(block, id_bits, idx, homing, movement, return_t, errors, overlap, gap)
        )
        prev_hit_t, prev_rest_xy = hit_t, hit_xy

    if drop_first_target:
        metrics = [m for m in metrics if m.target_index != 0]
    return metrics
