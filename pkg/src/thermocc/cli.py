"""The thermocc command line tool.

Subcommands cover the whole workflow: synthesize a dataset, split it,
run the detector, score predictions, derive occupancy and an HVAC
schedule, or do all of it in one `pipeline` run. Exit codes: 0 on
success, 1 for bad input or usage, 2 for unexpected internal errors.
The THERMOCC_SEED environment variable, when set, overrides any
--seed flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback

from .annot import serialize_predictions
from .detect import (DEFAULT_CONFIG, DetectorConfig, detect_manifest,
                     prediction_filename)
from .errors import ConfigError, ThermoccError
from .manifest import ManifestRecord, read_manifest, resolve, write_manifest
from .metrics import evaluate, load_samples, pr_curve
from .occupancy import (ControlPolicy, compare, detection_timeline,
                        manifest_timeline, simulate_control,
                        write_schedule_csv, write_timeline_csv)
from .plots import emit_plots, timeline_svg
from .split import (DEFAULT_FRACTIONS, SplitFractions, stratified_split,
                    verify_ratio)
from .synth import (DEFAULT_OCCUPIED_FRACTION, FRONTAL_SCENARIOS,
                    MIXED_SCENARIOS, DatasetSpec, generate_dataset)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, not 2."""

    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _apply_env_seed(args) -> None:
    raw = os.environ.get("THERMOCC_SEED")
    if raw is None or not hasattr(args, "seed"):
        return
    try:
        args.seed = int(raw)
    except ValueError:
        raise ConfigError(
            f"THERMOCC_SEED must be an integer, got {raw!r}") from None


def _parse_fractions(text: str) -> SplitFractions:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(
            f"fractions must be three comma-separated numbers, got {text!r}")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"fractions must be numeric, got {text!r}") from None
    return SplitFractions(*values)


def _scenarios(name: str):
    return FRONTAL_SCENARIOS if name == "frontal" else MIXED_SCENARIOS


def _write_split(records, manifest_path: str, assignment, out_dir: str) -> dict:
    """Write per-subset manifests with paths rebased onto out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    out_abs = os.path.abspath(out_dir)
    paths = {}
    for name, indices in assignment.subsets().items():
        subset = []
        for i in indices:
            rec = records[i]
            labels = rec.labels
            if labels is not None:
                labels = os.path.relpath(resolve(manifest_path, labels), out_abs)
            subset.append(ManifestRecord(
                frame=os.path.relpath(resolve(manifest_path, rec.frame), out_abs),
                labels=labels, occupied=rec.occupied, ts=rec.ts))
        paths[name] = os.path.join(out_dir, f"{name}.jsonl")
        write_manifest(paths[name], subset)
    return paths


def _write_predictions(records, manifest_path: str, out_dir: str,
                       config: DetectorConfig, threads: int) -> None:
    names = [prediction_filename(rec.frame) for rec in records]
    if len(set(names)) != len(names):
        raise ConfigError("manifest contains duplicate frame stems")
    detections = detect_manifest(records, manifest_path, config, threads)
    os.makedirs(out_dir, exist_ok=True)
    for name, dets in zip(names, detections):
        with open(os.path.join(out_dir, name), "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write(serialize_predictions(dets))


def _timelines(records, manifest_path: str, preds_dir: str, tau: float):
    """Actual and detected occupancy timelines from a prediction dir."""
    actual = manifest_timeline(records)
    samples = load_samples(records, preds_dir, manifest_path)
    pairs = sorted(zip((r.ts for r in records), (s[0] for s in samples)),
                   key=lambda p: p[0])
    detected = detection_timeline([ts for ts, _ in pairs],
                                  [preds for _, preds in pairs], tau)
    return actual, detected


def cmd_synth(args) -> int:
    spec = DatasetSpec(frames=args.frames,
                       occupied_fraction=args.occupied_fraction,
                       scenarios=_scenarios(args.scenario), seed=args.seed,
                       background_temp=args.background,
                       noise_sigma=args.sigma, start_ts=args.start_ts,
                       period=args.period)
    manifest_path = generate_dataset(spec, args.out)
    records = read_manifest(manifest_path)
    occupied = sum(r.occupied for r in records)
    print(f"wrote {len(records)} frames ({occupied} occupied, "
          f"{len(records) - occupied} empty) under {args.out}")
    return 0


def cmd_split(args) -> int:
    records = read_manifest(args.manifest)
    fractions = _parse_fractions(args.fractions)
    assignment = stratified_split(records, fractions, args.seed)
    _write_split(records, args.manifest, assignment, args.out)
    report = verify_ratio(assignment, records)
    report_path = os.path.join(args.out, "ratio_report.json")
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(report.to_dict(), indent=2) + "\n")
    for name, stats in report.subsets.items():
        ratio = "inf" if stats.ratio == float("inf") else f"{stats.ratio:.3f}"
        print(f"{name}: {stats.total} frames ({stats.occupied} occupied / "
              f"{stats.unoccupied} empty, ratio {ratio}, "
              f"{'consistent' if stats.consistent else 'INCONSISTENT'})")
    return 0


def cmd_detect(args) -> int:
    records = read_manifest(args.manifest)
    config = DetectorConfig(warm_threshold=args.warm_threshold,
                            nms_iou=args.nms_iou)
    _write_predictions(records, args.manifest, args.out, config, args.threads)
    print(f"wrote predictions for {len(records)} frames under {args.out}")
    return 0


def cmd_eval(args) -> int:
    records = read_manifest(args.manifest)
    report = evaluate(records, args.preds, args.manifest,
                      operating_tau=args.tau, width=args.width,
                      height=args.height)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.to_json())
    print(f"precision {report.precision:.3f}  recall {report.recall:.3f}  "
          f"mAP50 {report.map50:.3f}  mAP50-95 {report.map50_95:.3f}  "
          f"(tau {report.operating_tau})")
    return 0


def cmd_occupancy(args) -> int:
    records = read_manifest(args.manifest)
    actual, detected = _timelines(records, args.manifest, args.preds, args.tau)
    confusion = compare(actual, detected)
    policy = ControlPolicy(on_delay=args.on_delay, off_hold=args.off_hold)
    schedule = simulate_control(detected, policy)
    os.makedirs(args.out, exist_ok=True)
    write_timeline_csv(os.path.join(args.out, "timeline.csv"),
                       actual, detected)
    write_schedule_csv(os.path.join(args.out, "schedule.csv"), schedule)
    svg_path = os.path.join(args.out, "occupancy_timeline.svg")
    with open(svg_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(timeline_svg(actual, detected, schedule))
    print(f"{len(actual)} frames: occupancy precision "
          f"{confusion.precision:.3f}, recall {confusion.recall:.3f}, "
          f"missed occupied {confusion.missed_occupied}")
    print(f"hvac on fraction {schedule.on_fraction:.3f} "
          f"(runtime reduction {schedule.runtime_reduction:.3f})")
    return 0


def cmd_pipeline(args) -> int:
    dataset_dir = os.path.join(args.out, "dataset")
    splits_dir = os.path.join(args.out, "splits")
    preds_dir = os.path.join(args.out, "preds")
    occ_dir = os.path.join(args.out, "occupancy")
    plots_dir = os.path.join(args.out, "plots")

    spec = DatasetSpec(frames=args.frames,
                       occupied_fraction=args.occupied_fraction,
                       scenarios=_scenarios(args.scenario), seed=args.seed,
                       noise_sigma=args.sigma)
    manifest_path = generate_dataset(spec, dataset_dir)
    records = read_manifest(manifest_path)
    print(f"dataset: {len(records)} frames under {dataset_dir}")

    fractions = _parse_fractions(args.fractions)
    assignment = stratified_split(records, fractions, args.seed)
    split_paths = _write_split(records, manifest_path, assignment, splits_dir)
    report = verify_ratio(assignment, records)
    with open(os.path.join(splits_dir, "ratio_report.json"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(report.to_dict(), indent=2) + "\n")

    test_manifest = split_paths["test"]
    test_records = read_manifest(test_manifest)
    config = DetectorConfig()
    _write_predictions(test_records, test_manifest, preds_dir, config,
                       args.threads)
    print(f"detector: {len(test_records)} test frames scored")

    eval_report = evaluate(test_records, preds_dir, test_manifest,
                           operating_tau=args.tau)
    with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(eval_report.to_json())
    print(f"eval: precision {eval_report.precision:.3f}  "
          f"recall {eval_report.recall:.3f}  "
          f"mAP50 {eval_report.map50:.3f}  "
          f"mAP50-95 {eval_report.map50_95:.3f}")

    actual, detected = _timelines(test_records, test_manifest, preds_dir,
                                  args.tau)
    confusion = compare(actual, detected)
    policy = ControlPolicy(on_delay=args.on_delay, off_hold=args.off_hold)
    schedule = simulate_control(detected, policy)
    os.makedirs(occ_dir, exist_ok=True)
    write_timeline_csv(os.path.join(occ_dir, "timeline.csv"), actual, detected)
    write_schedule_csv(os.path.join(occ_dir, "schedule.csv"), schedule)
    print(f"occupancy: recall {confusion.recall:.3f}, "
          f"missed occupied {confusion.missed_occupied}, "
          f"hvac on fraction {schedule.on_fraction:.3f}")

    samples = load_samples(test_records, preds_dir, test_manifest)
    curve = pr_curve(samples)
    emit_plots(plots_dir, curve, eval_report.map50, actual, detected, schedule)
    print(f"plots under {plots_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thermocc",
                     description="Thermal-image occupancy detection pipeline")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic thermal dataset")
    p.add_argument("--out", required=True, help="dataset directory to create")
    p.add_argument("--frames", type=int, required=True,
                   help="number of frames to generate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--occupied-fraction", type=float,
                   default=DEFAULT_OCCUPIED_FRACTION, dest="occupied_fraction",
                   help="fraction of frames with an occupant")
    p.add_argument("--scenario", choices=("mixed", "frontal"),
                   default="mixed", help="pose/occlusion mix for occupants")
    p.add_argument("--sigma", type=float, default=0.3,
                   help="pixel noise sigma in Celsius")
    p.add_argument("--background", type=float, default=22.0,
                   help="background temperature in Celsius")
    p.add_argument("--start-ts", type=int, default=0, dest="start_ts")
    p.add_argument("--period", type=int, default=10,
                   help="seconds between frames")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", help="stratified train/val/test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="directory for subset manifests")
    p.add_argument("--fractions", default="0.6,0.2,0.2",
                   help="train,val,test fractions")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("detect", help="run the warm-blob detector")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="prediction directory")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--warm-threshold", type=float,
                   default=DEFAULT_CONFIG.warm_threshold,
                   dest="warm_threshold", help="blob contour in Celsius")
    p.add_argument("--nms-iou", type=float, default=DEFAULT_CONFIG.nms_iou,
                   dest="nms_iou")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score predictions against a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--preds", required=True, help="prediction directory")
    p.add_argument("--out", default=None, help="where to write report JSON")
    p.add_argument("--tau", type=float, default=0.9,
                   help="operating confidence threshold")
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=96)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("occupancy",
                       help="occupancy timeline and HVAC schedule")
    p.add_argument("--manifest", required=True)
    p.add_argument("--preds", required=True, help="prediction directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--tau", type=float, default=0.9)
    p.add_argument("--on-delay", type=float, default=0.0, dest="on_delay",
                   help="seconds of occupancy before hvac turns on")
    p.add_argument("--off-hold", type=float, default=900.0, dest="off_hold",
                   help="seconds of vacancy before hvac turns off")
    p.set_defaults(func=cmd_occupancy)

    p = sub.add_parser("pipeline",
                       help="synth + split + detect + eval + occupancy")
    p.add_argument("--out", required=True, help="run directory")
    p.add_argument("--frames", type=int, default=4836)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--occupied-fraction", type=float,
                   default=DEFAULT_OCCUPIED_FRACTION, dest="occupied_fraction")
    p.add_argument("--scenario", choices=("mixed", "frontal"),
                   default="mixed")
    p.add_argument("--sigma", type=float, default=0.3)
    p.add_argument("--fractions", default="0.6,0.2,0.2")
    p.add_argument("--tau", type=float, default=0.9)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--on-delay", type=float, default=0.0, dest="on_delay")
    p.add_argument("--off-hold", type=float, default=900.0, dest="off_hold")
    p.set_defaults(func=cmd_pipeline)

    return parser


def run(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_env_seed(args)
        return args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return exc.code if isinstance(exc.code, int) else 0
    except ThermoccError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:  # pragma: no cover - unexpected bugs
        traceback.print_exc()
        return 2


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
