"""Command-line entry point.

Subcommands: simulate (synthetic study), analyze (session logs -> report),
validate (schema/invariant check), calibrate-demo (touch-plane fitting on a
synthetic scene), serve (host the browser runner and collect uploads).

Exit codes: 0 success, 1 usage error, 2 data/validation error.
"""

from __future__ import annotations

import argparse
import glob as globlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import events as ev
from .errors import GeometryError, KsiError
from .experiment import latin_order, make_plan, write_plan
from .geometry import fit_touch_plane, plane_distance
from .pipeline import detect_touch, pipeline_config_from_dict
from .report import ReportConfig, build_report, format_summary, write_report
from .simulate import preset, profile_overrides, simulate_discomfort, simulate_session

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_DEVICE_CODE = {"fingers": 0, "mouse": 1, "trackpad": 2}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _child_seed(*entropy) -> int:
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


DEFAULT_CONFIG = {
    "devices": ["fingers", "mouse", "trackpad"],
    "participants": {"expert": 10, "novice": 15},
    "blocks": 8,
    "ids": [3, 4, 5],
    "distance": 400.0,
    "seed": 0,
    "profile_overrides": {},
    "pipeline": {},
}


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    if path:
        with open(path) as f:
            loaded = json.load(f)
        unknown = set(loaded) - set(DEFAULT_CONFIG)
        if unknown:
            raise KsiError(f"unknown config fields: {sorted(unknown)}")
        cfg.update(loaded)
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    if isinstance(cfg["participants"], int):
        cfg["participants"] = {"novice": cfg["participants"]}
    if not cfg["devices"]:
        raise KsiError("config needs at least one device")
    for device in cfg["devices"]:
        if device not in _DEVICE_CODE:
            raise KsiError(f"unknown device {device!r}")
    total = sum(cfg["participants"].values())
    if total < 1:
        raise KsiError("config needs at least one participant")
    if cfg["blocks"] < 1:
        raise KsiError("config needs at least one block")
    try:
        pipeline_config_from_dict(cfg["pipeline"])
    except ValueError as exc:
        raise KsiError(f"bad pipeline config: {exc}") from None
    return cfg


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(args.config, {
            "seed": args.seed,
            "participants": args.participants,
            "devices": args.devices.split(",") if args.devices else None,
            "blocks": args.blocks,
        })
    except (KsiError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA

    out = Path(args.out)
    (out / "sessions").mkdir(parents=True, exist_ok=True)
    (out / "plans").mkdir(parents=True, exist_ok=True)
    seed = int(cfg["seed"])
    ids = tuple(int(i) for i in cfg["ids"])
    blocks = int(cfg["blocks"])
    devices = list(cfg["devices"])

    roster = []
    idx = 0
    for cohort in sorted(cfg["participants"]):
        for _ in range(int(cfg["participants"][cohort])):
            roster.append((f"p{idx:02d}", cohort, idx))
            idx += 1

    manifest = {"config": cfg, "sessions": [], "plans": [], "device_orders": {}}
    for pid, cohort, p_idx in roster:
        order = latin_order(tuple(devices), p_idx)
        manifest["device_orders"][pid] = list(order)
        survey_seed = _child_seed(seed, p_idx, 9)
        for device in order:
            dev_code = _DEVICE_CODE[device]
            plan_seed = _child_seed(seed, p_idx, dev_code, 0)
            session_seed = _child_seed(seed, p_idx, dev_code, 1)
            profile = preset(device, cohort)
            over = cfg["profile_overrides"].get(f"{device}_{cohort}")
            if over:
                profile = profile_overrides(profile, over)
            plan = make_plan(device, ids=ids, blocks=blocks, seed=plan_seed,
                             distance=float(cfg["distance"]))
            log = simulate_session(profile, plan, session_seed, participant_id=pid)
            log.surveys.append(simulate_discomfort(profile, "baseline", survey_seed))
            log.surveys.append(simulate_discomfort(profile, "post_device", survey_seed))

            plan_path = out / "plans" / f"{pid}_{device}.plan.jsonl"
            session_path = out / "sessions" / f"{pid}_{device}.ksi.jsonl"
            write_plan(plan, plan_path)
            ev.write_session(log, session_path)
            manifest["plans"].append(str(plan_path.relative_to(out)))
            manifest["sessions"].append(str(session_path.relative_to(out)))

    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {len(manifest['sessions'])} sessions to {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    paths = sorted(globlib.glob(args.sessions, recursive=True))
    if not paths:
        print(f"error: no sessions found matching {args.sessions!r}", file=sys.stderr)
        return EXIT_DATA
    sessions = []
    bad = []
    for p in paths:
        try:
            log = ev.read_session(p)
        except (KsiError, OSError) as exc:
            bad.append((p, f"parse failure: {exc}"))
            continue
        violations = ev.validate_session(log)
        if violations:
            bad.append((p, f"{len(violations)} violations, first: {violations[0].rule}"))
            continue
        sessions.append(log)
    for p, why in bad:
        print(f"skipping {p}: {why}", file=sys.stderr)
    if args.strict and bad:
        print(f"error: {len(bad)} invalid session file(s) with --strict", file=sys.stderr)
        return EXIT_DATA
    if not sessions:
        print("error: no valid sessions found", file=sys.stderr)
        return EXIT_DATA

    surveys = None
    if args.surveys:
        surveys = _load_survey_file(args.surveys)

    config = ReportConfig(outlier_scope=args.outlier_scope)
    try:
        report = build_report(sessions, surveys=surveys, config=config)
    except KsiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    out = Path(args.out)
    written = write_report(report, out)
    print(format_summary(report))
    print("report files:")
    for p in written:
        print(f"  {p}")
    return EXIT_OK


def _load_survey_file(path):
    """Optional external survey file: JSONL records with participant/device/phase/ratings."""
    surveys = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            s = ev.DiscomfortSurvey(tuple(float(r) for r in obj["ratings"]), obj["phase"])
            surveys[(obj["participant_id"], obj.get("device", ""), obj["phase"])] = s
    return surveys


def cmd_validate(args) -> int:
    worst = EXIT_OK
    for pattern in args.files:
        for p in sorted(globlib.glob(pattern, recursive=True)) or [pattern]:
            try:
                log = ev.read_session(p)
            except (KsiError, OSError) as exc:
                print(f"{p}: PARSE ERROR: {exc}")
                worst = EXIT_DATA
                continue
            violations = ev.validate_session(log)
            if violations:
                worst = EXIT_DATA
                print(f"{p}: {len(violations)} violation(s)")
                for v in violations[:20]:
                    print(f"  [{v.rule}] event {v.index}: {v.message}")
            else:
                print(f"{p}: ok ({len(log.events)} events)")
    return worst


def cmd_calibrate_demo(args) -> int:
    t_on, t_off = args.t_on, args.t_off
    if args.config:
        try:
            cfg = load_config(args.config, {})
            pipe = pipeline_config_from_dict(cfg["pipeline"])
        except (KsiError, OSError, json.JSONDecodeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DATA
        t_on, t_off = pipe.t_on, pipe.t_off
    rng = np.random.default_rng(args.seed)
    n = args.points
    if args.collinear:
        pts = np.stack([np.linspace(-30, 30, max(n, 3)), np.zeros(max(n, 3)), np.full(max(n, 3), 320.0)], axis=1)
    else:
        tilt = math.radians(args.tilt)
        xs = rng.uniform(-60, 60, n)
        ys = rng.uniform(-40, 40, n)
        zs = 320.0 + np.tan(tilt) * ys
        pts = np.stack([xs, ys, zs], axis=1)
        pts += rng.normal(0.0, args.noise, pts.shape) if args.noise > 0 else 0.0
    try:
        plane = fit_touch_plane(pts)
    except GeometryError as exc:
        print(f"error: calibration failed: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"fitted plane normal: ({plane.normal[0]:+.6f}, {plane.normal[1]:+.6f}, {plane.normal[2]:+.6f})")
    print(f"fitted plane offset: {plane.d:.3f} mm")
    print(f"orthogonal fit RMS:  {plane.fit_rms:.4f} mm")

    # descend a synthetic finger onto the plane and show the touch trace
    nvec = np.asarray(plane.normal)
    anchor = np.array([0.0, 0.0, -plane.d / plane.normal[2]])  # plane point at x=y=0
    heights = np.linspace(12.0, 0.0, 25)
    dists = np.array([plane_distance(anchor + h * nvec, plane) for h in heights])
    states = detect_touch(dists, t_on, t_off)
    first_on = int(np.argmax(states)) if states.any() else -1
    print("touch trace (mm -> state):")
    for d, s in zip(dists[::6], states[::6]):
        print(f"  {d:6.2f}  {'ON' if s else 'off'}")
    if first_on >= 0:
        print(f"touch engaged at sample {first_on} (distance {dists[first_on]:.2f} mm)")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .serve import serve

    plan_defaults = {"device": "mouse", "seed": 0, "blocks": args.blocks, "ids": (3, 4, 5)}
    if args.config:
        try:
            cfg = load_config(args.config, {})
        except (KsiError, OSError, json.JSONDecodeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DATA
        plan_defaults.update({"seed": cfg["seed"], "blocks": cfg["blocks"], "ids": cfg["ids"]})
    try:
        server = serve(args.port, args.data_dir, args.static_dir, plan_defaults)
    except OSError as exc:
        print(f"error: cannot bind port {args.port}: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"serving on http://127.0.0.1:{args.port} (data -> {args.data_dir})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="ksikit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic study")
    p.add_argument("--config", help="JSON run config")
    p.add_argument("--out", default="study", help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--participants", type=int, default=None, help="override participant count")
    p.add_argument("--devices", default=None, help="comma-separated device list")
    p.add_argument("--blocks", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="build the report from session logs")
    p.add_argument("sessions", help="glob of .ksi.jsonl files")
    p.add_argument("--surveys", help="optional external survey JSONL")
    p.add_argument("--out", default="report", help="report directory")
    p.add_argument("--strict", action="store_true", help="fail on any invalid session")
    p.add_argument("--outlier-scope", default="group", choices=("group", "global", "off"))
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("validate", help="check session files against the schema")
    p.add_argument("files", nargs="+", help="session files or globs")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("calibrate-demo", help="fit a touch plane on a synthetic scene")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--noise", type=float, default=0.2, help="point noise sigma, mm")
    p.add_argument("--tilt", type=float, default=5.0, help="plane tilt, degrees")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t-on", type=float, default=2.0)
    p.add_argument("--t-off", type=float, default=4.0)
    p.add_argument("--config", help="JSON run config; its pipeline block overrides thresholds")
    p.add_argument("--collinear", action="store_true", help="degenerate scene demo")
    p.set_defaults(func=cmd_calibrate_demo)

    p = sub.add_parser("serve", help="host the web runner and accept uploads")
    p.add_argument("--port", type=int, default=8630)
    p.add_argument("--data-dir", default="data")
    p.add_argument("--static-dir", default=None, help="web runner assets (frontend/dist)")
    p.add_argument("--config", help="JSON run config for plan defaults")
    p.add_argument("--blocks", type=int, default=8)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
