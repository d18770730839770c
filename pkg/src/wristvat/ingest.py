"""Loading of accelerometry recordings and subject metadata.

Two CSV recording profiles are supported:

* ``csv_txyz`` -- header ``t,x,y,z``, one sample per line, t in seconds
  (strictly increasing, uniform), x/y/z in g.  The sample rate is inferred
  from the median timestamp step and snapped to the nearest integer when
  within 1e-6 relative; individual timestamps are otherwise not trusted.
* ``csv_xyz_with_header_rate`` -- a ``sample_rate_hz=<value>`` line, then a
  ``x,y,z`` header and one sample per line.

Subject metadata is a CSV with header
``subject_id,age,gender,height_cm,weight_kg,bmi,waist_cm,vat_g`` and gender
encoded ``M``/``F``.  Empty fields become missing covariates.

Lines starting with ``#`` are treated as comments in all profiles.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from io import StringIO
from pathlib import Path
from typing import Mapping, Optional

import numpy as np
import pandas as pd

from .errors import EmptyRecording, NonFiniteSample, ParseError

logger = logging.getLogger(__name__)

RECORDING_FORMATS = ("csv_txyz", "csv_xyz_with_header_rate")

MIN_AGE_YEARS = 20.0
MAX_AGE_YEARS = 60.0
MIN_GAIT_HOURS = 3.0

SUBJECT_CSV_COLUMNS = [
    "subject_id",
    "age",
    "gender",
    "height_cm",
    "weight_kg",
    "bmi",
    "waist_cm",
    "vat_g",
]


@dataclass(eq=False)
class TriaxialRecording:
    """One subject-device recording: three acceleration channels in g."""

    subject_id: str
    sample_rate_hz: float
    start_epoch_s: float
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self) -> None:
        xyz = np.column_stack(
            [
                np.asarray(self.x, dtype=np.float64),
                np.asarray(self.y, dtype=np.float64),
                np.asarray(self.z, dtype=np.float64),
            ]
        )
        if len(self.x) != len(self.y) or len(self.x) != len(self.z):
            raise ValueError("x, y, z must have identical length")
        if xyz.shape[0] < 1:
            raise EmptyRecording(f"recording {self.subject_id!r} has no samples")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        if not np.all(np.isfinite(xyz)):
            raise NonFiniteSample(
                f"recording {self.subject_id!r} contains NaN/Inf samples"
            )
        self._xyz = xyz
        self.x = xyz[:, 0]
        self.y = xyz[:, 1]
        self.z = xyz[:, 2]

    def __len__(self) -> int:
        return self._xyz.shape[0]

    @property
    def xyz(self) -> np.ndarray:
        """(n, 3) view of the three channels; do not mutate."""
        return self._xyz

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz


@dataclass(frozen=True)
class SubjectRecord:
    """Identifier, covariates, and measured VAT target (grams)."""

    subject_id: str
    age_years: Optional[float] = None
    gender: Optional[str] = None  # "male" or "female"
    height_cm: Optional[float] = None
    weight_kg: Optional[float] = None
    bmi_kg_m2: Optional[float] = None
    waist_cm: Optional[float] = None
    vat_g: Optional[float] = None


@dataclass
class CohortDataset:
    """Immutable-by-convention container pairing subjects with recordings."""

    subjects: list[SubjectRecord]
    recordings: dict[str, list[TriaxialRecording]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        known = {s.subject_id for s in self.subjects}
        orphans = set(self.recordings) - known
        if orphans:
            raise ValueError(f"recordings without subject metadata: {sorted(orphans)}")


def subject_id_from_path(path: Path | str) -> str:
    """Subject id is the file stem up to the first ``__`` separator."""
    return Path(path).stem.split("__")[0]


def _read_numeric_table(text: str, expected_columns: list[str], path: Path) -> pd.DataFrame:
    try:
        df = pd.read_csv(
            StringIO(text),
            comment="#",
            skip_blank_lines=True,
            float_precision="round_trip",
        )
    except pd.errors.EmptyDataError:
        raise EmptyRecording(f"{path}: no data") from None
    except Exception as exc:
        raise ParseError(f"{path}: {exc}") from exc
    cols = [str(c).strip().lower() for c in df.columns]
    if cols != expected_columns:
        raise ParseError(
            f"{path}: expected header {','.join(expected_columns)!r}, got "
            f"{','.join(cols)!r}"
        )
    df.columns = cols
    if len(df) == 0:
        raise EmptyRecording(f"{path}: header only, no samples")
    try:
        df = df.astype(np.float64)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"{path}: non-numeric sample value ({exc})") from exc
    return df


def _infer_sample_rate(t: np.ndarray, path: Path) -> float:
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise ParseError(f"{path}: timestamps are not strictly increasing")
    fs = 1.0 / float(np.median(dt))
    # Snap to the nominal integer rate; per-sample timestamp jitter is ignored.
    if abs(fs - round(fs)) <= 1e-6 * max(1.0, abs(fs)):
        fs = float(round(fs))
    return fs


def load_recording(path: Path | str, fmt: str = "csv_txyz") -> TriaxialRecording:
    """Load one recording file under the declared CSV profile.

    Raises ``ParseError`` (malformed content), ``EmptyRecording`` (no
    samples), or ``NonFiniteSample`` (NaN/Inf values).
    """
    path = Path(path)
    if fmt not in RECORDING_FORMATS:
        raise ValueError(f"unknown format {fmt!r}; choose from {RECORDING_FORMATS}")
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    sid = subject_id_from_path(path)

    if fmt == "csv_txyz":
        df = _read_numeric_table(text, ["t", "x", "y", "z"], path)
        if len(df) < 2:
            raise ParseError(f"{path}: need >= 2 samples to infer the sample rate")
        t = df["t"].to_numpy()
        if not np.all(np.isfinite(t)):
            raise NonFiniteSample(f"{path}: non-finite timestamp")
        fs = _infer_sample_rate(t, path)
        start = float(t[0])
        xyz = df[["x", "y", "z"]]
    else:  # csv_xyz_with_header_rate
        lines = text.splitlines()
        rate_line_idx = None
        for i, line in enumerate(lines):
            if line.strip() and not line.lstrip().startswith("#"):
                rate_line_idx = i
                break
        if rate_line_idx is None or "=" not in lines[rate_line_idx]:
            raise ParseError(f"{path}: missing 'sample_rate_hz=<value>' line")
        key, _, value = lines[rate_line_idx].partition("=")
        if key.strip().lower() != "sample_rate_hz":
            raise ParseError(f"{path}: first content line must set sample_rate_hz")
        try:
            fs = float(value)
        except ValueError as exc:
            raise ParseError(f"{path}: bad sample rate {value!r}") from exc
        body = "\n".join(lines[rate_line_idx + 1 :])
        xyz = _read_numeric_table(body, ["x", "y", "z"], path)
        start = 0.0

    vals = xyz.to_numpy()
    if not np.all(np.isfinite(vals)):
        raise NonFiniteSample(f"{path}: NaN/Inf acceleration sample")
    return TriaxialRecording(sid, fs, start, vals[:, 0], vals[:, 1], vals[:, 2])


def save_recording(
    recording: TriaxialRecording,
    path: Path | str,
    decimals: int | None = None,
    header_comment: str | None = None,
) -> None:
    """Write a recording under the ``csv_txyz`` profile.

    ``decimals=None`` writes shortest round-tripping floats so that
    load -> save -> load is bit-exact on the samples; an integer writes
    fixed-point values (compact, >= 6 recommended by the profile).
    """
    path = Path(path)
    n = len(recording)
    t = recording.start_epoch_s + np.arange(n) / recording.sample_rate_hz
    with path.open("w") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("t,x,y,z\n")
        if decimals is None:
            rows = (
                f"{ti!r},{xi!r},{yi!r},{zi!r}"
                for ti, xi, yi, zi in zip(
                    t.tolist(),
                    recording.x.tolist(),
                    recording.y.tolist(),
                    recording.z.tolist(),
                )
            )
            fh.write("\n".join(rows))
            fh.write("\n")
        else:
            df = pd.DataFrame(
                {"t": t, "x": recording.x, "y": recording.y, "z": recording.z}
            )
            df.to_csv(fh, index=False, header=False, float_format=f"%.{decimals}f")


def _opt(value) -> Optional[float]:
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return None
    if pd.isna(value):
        return None
    return float(value)


_GENDER_CODES = {"M": "male", "F": "female", "male": "male", "female": "female"}


def load_subjects(path: Path | str) -> list[SubjectRecord]:
    """Load subject metadata; empty fields become missing covariates."""
    path = Path(path)
    try:
        df = pd.read_csv(
            path,
            comment="#",
            dtype={"subject_id": str},
            float_precision="round_trip",
        )
    except Exception as exc:
        raise ParseError(f"{path}: {exc}") from exc
    cols = [str(c).strip().lower() for c in df.columns]
    if cols != SUBJECT_CSV_COLUMNS:
        raise ParseError(
            f"{path}: expected header {','.join(SUBJECT_CSV_COLUMNS)!r}"
        )
    df.columns = cols
    subjects = []
    for row in df.itertuples(index=False):
        gender = None
        if isinstance(row.gender, str) and row.gender.strip():
            code = row.gender.strip()
            if code not in _GENDER_CODES:
                raise ParseError(f"{path}: bad gender code {code!r}")
            gender = _GENDER_CODES[code]
        rec = SubjectRecord(
            subject_id=str(row.subject_id),
            age_years=_opt(row.age),
            gender=gender,
            height_cm=_opt(row.height_cm),
            weight_kg=_opt(row.weight_kg),
            bmi_kg_m2=_opt(row.bmi),
            waist_cm=_opt(row.waist_cm),
            vat_g=_opt(row.vat_g),
        )
        if (
            rec.bmi_kg_m2 is not None
            and rec.height_cm is not None
            and rec.weight_kg is not None
        ):
            implied = rec.weight_kg / (rec.height_cm / 100.0) ** 2
            if abs(implied - rec.bmi_kg_m2) > 0.1:
                # Real metadata rounds BMI; warn rather than reject.
                logger.warning(
                    "subject %s: recorded BMI %.2f vs weight/height^2 %.2f",
                    rec.subject_id,
                    rec.bmi_kg_m2,
                    implied,
                )
        subjects.append(rec)
    return subjects


def save_subjects(subjects: list[SubjectRecord], path: Path | str) -> None:
    rows = []
    for s in subjects:
        rows.append(
            {
                "subject_id": s.subject_id,
                "age": s.age_years,
                "gender": {"male": "M", "female": "F"}.get(s.gender, ""),
                "height_cm": s.height_cm,
                "weight_kg": s.weight_kg,
                "bmi": s.bmi_kg_m2,
                "waist_cm": s.waist_cm,
                "vat_g": s.vat_g,
            }
        )
    pd.DataFrame(rows, columns=SUBJECT_CSV_COLUMNS).to_csv(Path(path), index=False)


def subject_passes_filters(subject: SubjectRecord, gait_hours: float) -> bool:
    """Inclusion rule: age 20-60, all six covariates and VAT present, and at
    least three hours of detected gait."""
    covariates = (
        subject.age_years,
        subject.gender,
        subject.height_cm,
        subject.weight_kg,
        subject.bmi_kg_m2,
        subject.waist_cm,
    )
    if any(v is None for v in covariates) or subject.vat_g is None:
        return False
    if not MIN_AGE_YEARS <= subject.age_years <= MAX_AGE_YEARS:
        return False
    return gait_hours >= MIN_GAIT_HOURS


def apply_subject_filters(
    dataset: CohortDataset, total_gait_hours: Mapping[str, float]
) -> CohortDataset:
    """Retain subjects passing the inclusion rule; idempotent."""
    kept = [
        s
        for s in dataset.subjects
        if subject_passes_filters(s, total_gait_hours.get(s.subject_id, 0.0))
    ]
    kept_ids = {s.subject_id for s in kept}
    recordings = {
        sid: recs for sid, recs in dataset.recordings.items() if sid in kept_ids
    }
    return CohortDataset(kept, recordings)
