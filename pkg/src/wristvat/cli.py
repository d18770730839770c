"""Command-line pipeline: extract features, evaluate ridge models, fuse
prediction files, and generate synthetic cohorts.

All commands are deterministic for a fixed seed and inputs, and every
output file carries a header comment (or JSON meta block) with the package
version, seed, and a hash of the run configuration.  Exit codes: 0 success,
2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .errors import InsufficientFrames, TooFewRows, WeightMismatch, WristvatError
from .features import (
    COVARIATE_NAMES,
    FEATURE_CLASSES,
    GAIT_FEATURE_NAMES,
    SLEEP_FEATURE_NAMES,
    resolve_feature_config,
)
from .gait import extract_gait_frames, gait_summary, total_gait_hours
from .ingest import (
    MIN_GAIT_HOURS,
    RECORDING_FORMATS,
    load_recording,
    load_subjects,
    save_recording,
    save_subjects,
    subject_id_from_path,
    SubjectRecord,
)
from .model import (
    DesignMatrix,
    GENDER_CODE,
    cross_validate,
    fuse_estimates,
    metrics,
)
from .sigproc import magnitude, rolling_msd
from .sleep import extract_sleep_data, sleep_summary
from .synth import SleepSpec, WalkSpec, gen_sleep, gen_walk

logger = logging.getLogger("wristvat")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _file_header(config: dict, seed) -> str:
    return f"wristvat {__version__} seed={seed} config={_config_hash(config)}"


def _write_csv(path: Path, header_comment: str, columns: list[str], rows) -> None:
    with path.open("w") as fh:
        fh.write(f"# {header_comment}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# extract
# ---------------------------------------------------------------------------


def _extract_subject(task: tuple[str, list[str], str]) -> dict:
    """Extract gait and sleep features for one subject (worker-safe)."""
    subject_id, paths, fmt = task
    result: dict = {"subject_id": subject_id, "exclusions": []}
    gait_frames = []
    sleep_bouts = []
    sleep_frames = []
    fs = None
    try:
        bout_offset = 0
        for p in sorted(paths):
            rec = load_recording(p, fmt)
            fs = rec.sample_rate_hz
            msd = rolling_msd(magnitude(rec))
            frames = extract_gait_frames(rec, msd, bout_id_offset=bout_offset)
            bout_offset = max((f.bout_id for f in frames), default=bout_offset - 1) + 1
            gait_frames.extend(frames)
            bouts, sframes = extract_sleep_data(rec, msd)
            sleep_bouts.extend(bouts)
            sleep_frames.extend(sframes)
    except WristvatError as exc:
        result["exclusions"].append(("load", f"LOAD_ERROR: {exc}"))
        return result

    result["gait_hours"] = total_gait_hours(gait_frames)
    if not gait_frames:
        result["exclusions"].append(("gait", "NO_GAIT"))
    else:
        try:
            result["gait"] = gait_summary(gait_frames)
        except InsufficientFrames:
            result["exclusions"].append(("gait", "INSUFFICIENT_GAIT_FRAMES"))
    if not sleep_bouts:
        result["exclusions"].append(("sleep", "NO_SLEEP"))
    else:
        try:
            result["sleep"] = sleep_summary(sleep_frames, sleep_bouts, fs)
        except InsufficientFrames:
            result["exclusions"].append(("sleep", "INSUFFICIENT_SLEEP_FRAMES"))
    return result


def cmd_extract(args: argparse.Namespace) -> int:
    recordings_dir = Path(args.recordings)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    subjects = load_subjects(args.subjects)
    known = {s.subject_id for s in subjects}

    groups: dict[str, list[str]] = {}
    for path in sorted(recordings_dir.glob("*.csv")):
        groups.setdefault(subject_id_from_path(path), []).append(str(path))
    if not groups:
        logger.error("no recordings found in %s", recordings_dir)
        return EXIT_DATA

    tasks = []
    orphan_exclusions = []
    for sid in sorted(groups):
        if sid in known:
            tasks.append((sid, groups[sid], args.format))
        else:
            orphan_exclusions.append((sid, "metadata", "NO_METADATA"))

    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_extract_subject, tasks))
    else:
        results = [_extract_subject(t) for t in tasks]
    results.sort(key=lambda r: r["subject_id"])

    config = {
        "command": "extract",
        "recordings": str(recordings_dir),
        "subjects": str(args.subjects),
        "format": args.format,
    }
    header = _file_header(config, seed="-")

    gait_rows = []
    sleep_rows = []
    exclusion_rows = list(orphan_exclusions)
    for r in results:
        sid = r["subject_id"]
        for stage, reason in r["exclusions"]:
            logger.warning("subject %s: %s", sid, reason)
            exclusion_rows.append((sid, stage, reason))
        if "gait" in r:
            gait_rows.append(
                [sid, r["gait_hours"]] + [r["gait"][c] for c in GAIT_FEATURE_NAMES]
            )
        if "sleep" in r:
            sleep_rows.append([sid] + [r["sleep"][c] for c in SLEEP_FEATURE_NAMES])

    _write_csv(
        out_dir / "gait_features.csv",
        header,
        ["subject_id", "gait_hours"] + GAIT_FEATURE_NAMES,
        gait_rows,
    )
    _write_csv(
        out_dir / "sleep_features.csv",
        header,
        ["subject_id"] + SLEEP_FEATURE_NAMES,
        sleep_rows,
    )
    _write_csv(
        out_dir / "exclusions.csv",
        header,
        ["subject_id", "stage", "reason"],
        exclusion_rows,
    )
    logger.info(
        "extracted %d gait rows, %d sleep rows, %d exclusions",
        len(gait_rows),
        len(sleep_rows),
        len(exclusion_rows),
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def _load_feature_table(features_dir: Path, subjects_path: str) -> pd.DataFrame:
    gait = pd.read_csv(features_dir / "gait_features.csv", comment="#", dtype={"subject_id": str})
    sleep = pd.read_csv(features_dir / "sleep_features.csv", comment="#", dtype={"subject_id": str})
    subjects = load_subjects(subjects_path)
    rows = []
    for s in subjects:
        rows.append(
            {
                "subject_id": s.subject_id,
                "age": s.age_years,
                "gender": None if s.gender is None else GENDER_CODE[s.gender],
                "height_cm": s.height_cm,
                "weight_kg": s.weight_kg,
                "bmi": s.bmi_kg_m2,
                "waist_cm": s.waist_cm,
                "vat_g": s.vat_g,
            }
        )
    meta = pd.DataFrame(rows)
    table = meta.merge(gait, on="subject_id", how="inner").merge(
        sleep, on="subject_id", how="inner"
    )
    return table


def _filter_cohort(table: pd.DataFrame, min_gait_hours: float) -> pd.DataFrame:
    required = COVARIATE_NAMES + ["vat_g"]
    ok = table[required].notna().all(axis=1)
    ok &= (table["age"] >= 20.0) & (table["age"] <= 60.0)
    ok &= table["gait_hours"] >= min_gait_hours
    return table[ok].sort_values("subject_id").reset_index(drop=True)


def cmd_evaluate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    configs = args.features or ["gait+sleep"]
    try:
        resolved = {cfg: resolve_feature_config(cfg) for cfg in configs}
    except ValueError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG

    table = _load_feature_table(Path(args.features_dir), args.subjects)
    n_before = len(table)
    table = _filter_cohort(table, args.min_gait_hours)
    logger.info("cohort: %d subjects (%d before filters)", len(table), n_before)

    run_config = {
        "command": "evaluate",
        "features": configs,
        "ridge_lambda": args.ridge_lambda,
        "lambda_scaling": args.lambda_scaling,
        "repeats": args.repeats,
        "train_frac": args.train_frac,
        "seed": args.seed,
        "min_gait_hours": args.min_gait_hours,
    }
    header = _file_header(run_config, seed=args.seed)

    report = {
        "meta": {
            "version": __version__,
            "seed": args.seed,
            "config_hash": _config_hash(run_config),
            "config": run_config,
            "n_subjects": len(table),
            "n_subjects_before_filters": n_before,
        },
        "configurations": {},
    }
    for cfg, columns in resolved.items():
        design = DesignMatrix(
            table["subject_id"].tolist(),
            columns,
            table[columns].to_numpy(dtype=np.float64),
            table["vat_g"].to_numpy(dtype=np.float64),
        )
        try:
            result = cross_validate(
                design,
                n_repeats=args.repeats,
                train_frac=args.train_frac,
                seed=args.seed,
                ridge_lambda=args.ridge_lambda,
                lambda_scaling=args.lambda_scaling,
                bmi=table["bmi"].to_numpy(dtype=np.float64),
            )
        except TooFewRows as exc:
            logger.error("configuration %s: %s", cfg, exc)
            return EXIT_DATA
        report["configurations"][cfg] = result.to_dict()
        truth = dict(zip(table["subject_id"], table["vat_g"]))
        pred_rows = [
            [sid, truth[sid], pred, cfg]
            for sid, pred in result.mean_test_predictions.items()
        ]
        _write_csv(
            out_dir / f"predictions_{cfg.replace('+', '_')}.csv",
            header,
            ["subject_id", "vat_true", "vat_pred", "configuration"],
            pred_rows,
        )
        logger.info(
            "%s: spearman %.3f +/- %.3f, MAE %.1f g",
            cfg,
            result.spearman_r.mean,
            result.spearman_r.std,
            result.mae_g.mean,
        )

    with (out_dir / "report.json").open("w") as fh:
        json.dump(report, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fuse
# ---------------------------------------------------------------------------


def cmd_fuse(args: argparse.Namespace) -> int:
    try:
        weights = [float(w) for w in args.weights.split(",")]
    except ValueError:
        logger.error("weights must be a comma-separated list of reals")
        return EXIT_CONFIG
    if len(weights) != len(args.predictions):
        logger.error(
            "%d weights for %d prediction files", len(weights), len(args.predictions)
        )
        return EXIT_CONFIG

    tables = []
    for path in args.predictions:
        df = pd.read_csv(path, comment="#", dtype={"subject_id": str})
        tables.append(df.sort_values("subject_id").reset_index(drop=True))
    ids = tables[0]["subject_id"]
    for df in tables[1:]:
        if not ids.equals(df["subject_id"]):
            logger.error("prediction files cover different subject sets")
            return EXIT_DATA
        if not np.allclose(tables[0]["vat_true"], df["vat_true"]):
            logger.error("prediction files disagree on measured VAT")
            return EXIT_DATA

    try:
        fused = fuse_estimates([df["vat_pred"].to_numpy() for df in tables], weights)
    except WeightMismatch as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    y_true = tables[0]["vat_true"].to_numpy()
    m = metrics(y_true, fused)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    run_config = {
        "command": "fuse",
        "predictions": [str(p) for p in args.predictions],
        "weights": weights,
    }
    header = _file_header(run_config, seed="-")
    _write_csv(
        out_dir / "fused_predictions.csv",
        header,
        ["subject_id", "vat_true", "vat_pred", "configuration"],
        [
            [sid, t, p, "fused"]
            for sid, t, p in zip(ids, y_true.tolist(), fused.tolist())
        ],
    )
    result = {
        "meta": {
            "version": __version__,
            "config_hash": _config_hash(run_config),
            "config": run_config,
        },
        "metrics": {
            "spearman_r": m.spearman,
            "pearson_r": m.pearson,
            "mae_g": m.mae,
            "rmse_g": m.rmse,
        },
    }
    with (out_dir / "fusion_metrics.json").open("w") as fh:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    logger.info("fused: spearman %.3f, MAE %.1f g", m.spearman, m.mae)
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------


def cmd_synth(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    rec_dir = out_dir / "recordings"
    rec_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    run_config = {
        "command": "synth",
        "n_subjects": args.n_subjects,
        "seed": args.seed,
        "walk_minutes": args.walk_minutes,
        "sleep_hours": args.sleep_hours,
    }
    header = _file_header(run_config, seed=args.seed)

    subjects = []
    truth: dict = {"seed": args.seed, "subjects": {}}
    for i in range(args.n_subjects):
        sid = f"S{i + 1:03d}"
        period = float(rng.uniform(0.55, 0.85))
        # Below ~0.35 g the magnitude MSD hovers around the 0.1 g bout
        # threshold; stay above it so every synthetic subject has gait.
        amplitude = float(rng.uniform(0.4, 0.6))
        walk = WalkSpec(
            duration_s=args.walk_minutes * 60.0,
            step_period_s=period,
            swing_amplitude_g=amplitude,
        )
        n_moves = int(rng.integers(2, 5))
        schedule = []
        cursor = 600.0
        for _ in range(n_moves):
            dur = float(rng.uniform(15.0, 60.0))
            schedule.append((cursor, dur, 0.1))
            cursor += dur + float(rng.uniform(300.0, 900.0))
        sleep_spec = SleepSpec(
            duration_s=args.sleep_hours * 3600.0,
            movement_schedule=tuple(schedule),
        )
        walk_rec = gen_walk(walk, seed=args.seed * 1000 + i, subject_id=sid)
        sleep_rec = gen_sleep(sleep_spec, seed=args.seed * 1000 + 500 + i, subject_id=sid)
        save_recording(
            walk_rec, rec_dir / f"{sid}__walk.csv", decimals=6, header_comment=header
        )
        save_recording(
            sleep_rec, rec_dir / f"{sid}__sleep.csv", decimals=6, header_comment=header
        )

        # Covariates and a VAT target tied to the gait ground truth: slower,
        # lower-amplitude walkers get more visceral fat.
        gender = "male" if i % 2 == 0 else "female"
        age = float(rng.uniform(22.0, 58.0))
        height = float(rng.normal(175.0 if gender == "male" else 162.0, 6.0))
        weight = float(rng.normal(85.0 if gender == "male" else 75.0, 12.0))
        bmi = weight / (height / 100.0) ** 2
        waist = float(np.clip(rng.normal(2.8 * bmi + 18.0, 4.0), 60.0, 150.0))
        vat = (
            250.0
            + 900.0 * (period - 0.55) / 0.30
            + 700.0 * (0.6 - amplitude) / 0.20
            + float(rng.normal(0.0, 40.0))
        )
        subjects.append(
            SubjectRecord(sid, age, gender, height, weight, bmi, waist, max(vat, 20.0))
        )
        truth["subjects"][sid] = {
            "step_period_s": period,
            "swing_amplitude_g": amplitude,
            "walk_duration_s": walk.duration_s,
            "sleep_duration_s": sleep_spec.duration_s,
            "movement_schedule": schedule,
            "vat_g": subjects[-1].vat_g,
        }

    save_subjects(subjects, out_dir / "subjects.csv")
    with (out_dir / "ground_truth.json").open("w") as fh:
        json.dump({"meta": {"version": __version__, "config": run_config}, **truth}, fh, indent=2)
        fh.write("\n")
    logger.info("wrote %d synthetic subjects to %s", args.n_subjects, out_dir)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wristvat",
        description="Gait/sleep feature extraction and ridge VAT estimation "
        "from wrist accelerometry.",
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract per-subject feature CSVs")
    p.add_argument("--recordings", required=True, help="directory of recording CSVs")
    p.add_argument("--subjects", required=True, help="subject metadata CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", default="csv_txyz", choices=RECORDING_FORMATS)
    p.add_argument("--workers", type=int, default=1, help="subject-level workers")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="cross-validated ridge evaluation")
    p.add_argument("--features-dir", required=True, help="directory from extract")
    p.add_argument("--subjects", required=True, help="subject metadata CSV")
    p.add_argument(
        "--features",
        action="append",
        metavar="CONFIG",
        help="feature configuration, e.g. gait, sleep, gait+sleep+cov, "
        "gait_dynamics (repeatable; default gait+sleep)",
    )
    p.add_argument("--lambda", dest="ridge_lambda", type=float, default=0.1)
    p.add_argument("--lambda-scaling", choices=("n", "raw"), default="n")
    p.add_argument("--repeats", type=int, default=30)
    p.add_argument("--train-frac", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--min-gait-hours",
        type=float,
        default=MIN_GAIT_HOURS,
        help="subject inclusion threshold on detected gait",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("fuse", help="weighted average of prediction CSVs")
    p.add_argument("--predictions", action="append", required=True)
    p.add_argument("--weights", required=True, help="comma-separated, sums to 1")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    p.add_argument("--out", required=True)
    p.add_argument("--n-subjects", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--walk-minutes", type=float, default=12.0)
    p.add_argument("--sleep-hours", type=float, default=2.2)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except WristvatError as exc:
        logger.error("%s", exc)
        return EXIT_DATA
    except FileNotFoundError as exc:
        logger.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
