import math
from collections import Counter

import numpy as np
import pytest

from ksikit import events as ev
from ksikit.errors import DataError, GeometryError, IncompleteTrialError
from ksikit.experiment import (
    TargetSpec,
    extract_metrics,
    id_width,
    latin_order,
    load_word_pool,
    make_plan,
    read_plan,
    ring_layout,
    run_trial,
    width_id,
    write_plan,
)

from conftest import make_log


class TestIdWidth:
    def test_id1(self):
        assert id_width(1, 400) == pytest.approx(400.0)

    def test_id3(self):
        assert id_width(3, 400) == pytest.approx(400.0 / 7.0)  # 57.1429

    def test_id5(self):
        assert id_width(5, 400) == pytest.approx(400.0 / 31.0)  # 12.9032

    @pytest.mark.parametrize("id_bits", [1, 2, 3, 4, 5, 6.5])
    def test_inverse_to_1e12(self, id_bits):
        assert width_id(id_width(id_bits, 400.0), 400.0) == pytest.approx(id_bits, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DataError):
            id_width(0, 400)
        with pytest.raises(DataError):
            width_id(-1.0, 400)


class TestRingLayout:
    def test_radius_solves_chord_equation(self):
        # independent oracle: bisect 2R sin(6 pi / 11) = 400 for R
        f = lambda r: 2.0 * r * math.sin(6.0 * math.pi / 11.0) - 400.0
        lo, hi = 100.0, 400.0
        for _ in range(200):
            mid = (lo + hi) / 2
            if f(mid) > 0:
                hi = mid
            else:
                lo = mid
        targets = ring_layout(11, 400.0)
        cx = np.mean([t.cx for t in targets])
        cy = np.mean([t.cy for t in targets])
        radius = math.hypot(targets[0].cx - cx, targets[0].cy - cy)
        assert radius == pytest.approx(lo, abs=1e-6)
        assert radius == pytest.approx(202.06, abs=0.01)

    def test_consecutive_distances_exactly_d(self):
        targets = ring_layout(11, 400.0)
        for a, b in zip(targets, targets[1:]):
            assert math.hypot(a.cx - b.cx, a.cy - b.cy) == pytest.approx(400.0, abs=1e-9)

    def test_visiting_order_is_permutation(self):
        targets = ring_layout(11, 400.0)
        assert [t.index for t in targets] == list(range(11))
        # distinct ring positions
        positions = {(round(t.cx, 6), round(t.cy, 6)) for t in targets}
        assert len(positions) == 11

    def test_all_targets_on_screen(self):
        for id_bits in (3, 4, 5):
            targets = ring_layout(11, 400.0, width=id_width(id_bits, 400.0))
            for t in targets:
                assert 0 <= t.cx - t.w / 2 and t.cx + t.w / 2 <= 1366
                assert 0 <= t.cy - t.w / 2 and t.cy + t.w / 2 <= 768

    def test_off_screen_ring_rejected(self):
        with pytest.raises(GeometryError):
            ring_layout(11, 900.0)

    def test_even_n_rejected(self):
        with pytest.raises(GeometryError):
            ring_layout(10, 400.0)


class TestMakePlan:
    def test_deterministic(self):
        assert make_plan("mouse", seed=9) == make_plan("mouse", seed=9)

    def test_block_id_multiset(self):
        plan = make_plan("mouse", seed=4)
        assert plan.block_count == 8
        for block in plan.blocks:
            assert sorted(s.id_bits for s in block) == [3, 4, 5]

    def test_words_length_and_count(self):
        plan = make_plan("fingers", seed=1)
        for block in plan.blocks:
            for s in block:
                assert len(s.words) == 10
                assert len(set(s.words)) == 10
                assert all(4 <= len(w) <= 6 for w in s.words)
                assert len(s.targets) == 11

    def test_permutations_uniform_over_seeds(self):
        counts = Counter()
        for seed in range(1000):
            plan = make_plan("mouse", seed=seed, blocks=1)
            counts[tuple(s.id_bits for s in plan.blocks[0])] += 1
        assert len(counts) == 6
        for perm, c in counts.items():
            assert abs(c / 1000 - 1 / 6) <= 0.05, (perm, c)

    def test_plan_codec_roundtrip(self, tmp_path):
        plan = make_plan("trackpad", seed=77)
        path = tmp_path / "p.plan.jsonl"
        write_plan(plan, path)
        assert read_plan(path) == plan

    def test_word_pool_constraints(self):
        pool = load_word_pool()
        assert len(pool) >= 100
        assert all(4 <= len(w) <= 6 for w in pool)
        assert len(set(pool)) == len(pool)


class TestLatinOrder:
    def test_rows_cover_all_positions(self):
        rows = [latin_order(participant_index=i) for i in range(3)]
        for pos in range(3):
            assert {row[pos] for row in rows} == {"fingers", "mouse", "trackpad"}

    def test_cyclic(self):
        assert latin_order(participant_index=3) == latin_order(participant_index=0)

    def test_near_balance_over_25(self):
        counts = {d: Counter() for d in ("fingers", "mouse", "trackpad")}
        for i in range(25):
            for pos, dev in enumerate(latin_order(participant_index=i)):
                counts[dev][pos] += 1
        for dev, c in counts.items():
            values = [c[p] for p in range(3)]
            assert max(values) - min(values) <= 1


def _clean_set_events(id_set, t0=1.0):
    """Synthetic event stream completing one ID set with no misses."""
    events = []
    t = t0
    prev = (683.0, 384.0)
    for i, target in enumerate(id_set.targets):
        events.append(ev.target_shown(t, i, target.cx, target.cy, target.w))
        t += 0.2
        events.append(ev.pointer_sample(t, prev[0], prev[1]))
        t += 0.4
        events.append(ev.pointer_sample(t, target.cx, target.cy))
        events.append(ev.click(t, target.cx, target.cy))
        prev = (target.cx, target.cy)
        if i < len(id_set.targets) - 1:
            word = id_set.words[i]
            events.append(ev.word_shown(t, word))
            for ch in word:
                t += 0.1
                events.append(ev.char_typed(t, ch))
            t += 0.3
    return events


class TestRunTrial:
    def test_clean_block_completes(self):
        plan = make_plan("mouse", seed=3, blocks=1)
        events = []
        t = 1.0
        for id_set in plan.blocks[0]:
            events.extend(_clean_set_events(id_set, t))
            t = events[-1].t + 0.5
        run = run_trial(plan, events)
        assert run.complete
        assert len(run.outcomes) == 33
        assert all(o.misses == 0 for o in run.outcomes)

    def test_miss_then_hit_counted(self):
        plan = make_plan("mouse", seed=3, blocks=1)
        events = []
        t = 1.0
        for set_i, id_set in enumerate(plan.blocks[0]):
            set_events = _clean_set_events(id_set, t)
            if set_i == 0:
                # a click one diameter off, just before the real hit
                target = id_set.targets[0]
                miss_t = set_events[3].t - 0.05
                set_events.insert(3, ev.click(miss_t, target.cx + target.w, target.cy))
            events.extend(set_events)
            t = events[-1].t + 0.5
        run = run_trial(plan, events)
        assert run.complete
        assert run.outcomes[0].misses == 1
        assert all(o.misses == 0 for o in run.outcomes[1:])

    def test_stream_ending_mid_trial_raises(self):
        plan = make_plan("mouse", seed=3, blocks=1)
        target = plan.blocks[0][0].targets[0]
        events = [
            ev.target_shown(1.0, 0, target.cx, target.cy, target.w),
            ev.click(1.8, target.cx, target.cy),
        ]
        with pytest.raises(IncompleteTrialError) as exc:
            run_trial(plan, events)  # ends while typing the first word
        assert exc.value.block == 0

    def test_boundary_click_is_a_hit(self):
        spec = TargetSpec(0, 100.0, 100.0, 40.0)
        assert spec.contains(120.0, 100.0)          # exactly on the rim
        assert not spec.contains(121.0, 100.0)      # 1 px outside

    def test_incomplete_stream_reports_progress(self):
        plan = make_plan("mouse", seed=3, blocks=1)
        with pytest.raises(IncompleteTrialError) as exc:
            run_trial(plan, [])
        assert exc.value.block == 0 and exc.value.target_index == 0


class TestExtractMetrics:
    def _session(self, meta, events):
        return make_log(meta, events)

    def test_timestamp_differences(self, meta):
        # target at t=0, first movement 0.3, hit 1.0, first char 1.4
        events = [
            ev.pointer_sample(0.0, 100.0, 100.0),
            ev.target_shown(0.0, 0, 500.0, 100.0, 57.0),
            ev.pointer_sample(0.3, 110.0, 100.0),
            ev.pointer_sample(0.9, 490.0, 100.0),
            ev.click(1.0, 500.0, 100.0),
            ev.word_shown(1.0, "tree"),
            ev.char_typed(1.4, "t"),
            ev.target_shown(5.0, 1, 100.0, 100.0, 57.0),
            ev.pointer_sample(5.2, 495.0, 100.0),
            ev.pointer_sample(5.8, 100.0, 100.0),
            ev.click(5.9, 100.0, 100.0),
        ]
        m = extract_metrics(self._session(meta, events))[0]
        assert m.homing_t == pytest.approx(0.3)
        assert m.movement_t == pytest.approx(0.7)
        assert m.return_t == pytest.approx(0.4)
        assert m.errors == 0 and not m.overlap

    def test_overlap_clamps_homing(self, meta):
        # movement begins 0.05 s before the target appears
        events = [
            ev.pointer_sample(0.0, 100.0, 100.0),
            ev.target_shown(0.1, 0, 500.0, 100.0, 57.0),
            ev.click(0.5, 500.0, 100.0),
            ev.word_shown(0.5, "tree"),
            ev.char_typed(0.9, "t"),
            # second target: pointer moves at 1.95, target shown at 2.0
            ev.target_shown(2.0, 1, 100.0, 100.0, 57.0),
            ev.pointer_sample(2.05, 480.0, 100.0),
            ev.pointer_sample(2.4, 100.0, 100.0),
            ev.click(2.5, 100.0, 100.0),
        ]
        # insert the early movement: displaced > 2 px before target_shown
        events.insert(5, ev.pointer_sample(1.95, 495.0, 100.0))
        events.insert(5, ev.pointer_sample(1.90, 500.0, 100.0))
        mets = extract_metrics(self._session(meta, sorted(events, key=lambda e: e.t)))
        second = mets[1]
        assert second.overlap
        assert second.homing_t == 0.0
        assert second.movement_t is not None

    def test_miss_extends_movement(self, meta):
        events = [
            ev.pointer_sample(0.0, 100.0, 100.0),
            ev.target_shown(0.0, 0, 500.0, 100.0, 57.0),
            ev.pointer_sample(0.3, 110.0, 100.0),
            ev.pointer_sample(0.7, 460.0, 100.0),
            ev.click(0.8, 460.0, 100.0),     # 40 px from center > 28.5: miss
            ev.pointer_sample(1.1, 500.0, 100.0),
            ev.click(1.2, 500.0, 100.0),     # hit
        ]
        m = extract_metrics(self._session(meta, events))[0]
        assert m.errors == 1
        assert m.movement_t == pytest.approx(0.9)   # 1.2 - 0.3
        assert m.homing_t == pytest.approx(0.3)

    def test_sum_identity_when_no_overlap(self, meta):
        events = [
            ev.pointer_sample(0.0, 100.0, 100.0),
            ev.target_shown(0.2, 0, 500.0, 100.0, 57.0),
            ev.pointer_sample(0.45, 130.0, 100.0),
            ev.click(1.3, 500.0, 100.0),
        ]
        m = extract_metrics(self._session(meta, events))[0]
        assert m.homing_t + m.movement_t == pytest.approx(1.3 - 0.2)

    def test_no_hit_reports_gap(self, meta):
        events = [
            ev.pointer_sample(0.0, 100.0, 100.0),
            ev.target_shown(0.0, 0, 500.0, 100.0, 57.0),
            ev.click(0.8, 460.0, 100.0),
        ]
        m = extract_metrics(self._session(meta, events))[0]
        assert m.gap == "no successful click"
        assert m.movement_t is None

    def test_drop_first_target_flag(self, meta):
        from ksikit.simulate import preset, simulate_session

        plan = make_plan("mouse", seed=2, blocks=1)
        log = simulate_session(preset("mouse", "novice"), plan, seed=2)
        kept = extract_metrics(log)
        dropped = extract_metrics(log, drop_first_target=True)
        assert len(kept) == 33
        assert len(dropped) == 30
        assert all(m.target_index != 0 for m in dropped)
