"""Ridge-regression VAT estimation and the repeated random-split protocol.

The estimator standardizes each feature column to training mean 0 / std 1
(population std; zero-variance columns are dropped with a warning), centers
the target, and solves the penalized normal equations

    (Z'Z + lambda * n * I) w = Z'y

with an unpenalized intercept equal to the training target mean.  Scaling
the ridge parameter by n keeps the paper's 0.1 consistent across cohort
sizes; ``lambda_scaling="raw"`` switches to a plain lambda * I penalty.

Evaluation repeats a seeded 80/20 shuffle split (default 30 repeats),
reporting fold means and population stds of Spearman r, Pearson r, MAE, and
RMSE, plus Spearman correlations within BMI categories computed on each
subject's mean held-out prediction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.stats import rankdata

from .errors import (
    ConstantInput,
    DegenerateDesign,
    FeatureMismatch,
    MissingCovariate,
    TooFewRows,
    WeightMismatch,
)
from .features import COVARIATE_NAMES
from .ingest import SubjectRecord

logger = logging.getLogger(__name__)

DEFAULT_RIDGE_LAMBDA = 0.1
DEFAULT_N_REPEATS = 30
DEFAULT_TRAIN_FRAC = 0.8

GENDER_CODE = {"male": 0.0, "female": 1.0}

BMI_OVERWEIGHT = 25.0
BMI_OBESE = 30.0
MIN_CATEGORY_SIZE = 3
_ZERO_VARIANCE_STD = 1e-12


def covariate_vector(subject: SubjectRecord) -> np.ndarray:
    """Six covariates (age, gender, height, weight, BMI, waist) as reals,
    gender encoded male=0 / female=1.  Raises ``MissingCovariate``."""
    values = {
        "age": subject.age_years,
        "gender": None if subject.gender is None else GENDER_CODE[subject.gender],
        "height_cm": subject.height_cm,
        "weight_kg": subject.weight_kg,
        "bmi": subject.bmi_kg_m2,
        "waist_cm": subject.waist_cm,
    }
    missing = [name for name in COVARIATE_NAMES if values[name] is None]
    if missing:
        raise MissingCovariate(
            f"subject {subject.subject_id!r} lacks {', '.join(missing)}"
        )
    return np.array([values[name] for name in COVARIATE_NAMES], dtype=np.float64)


@dataclass
class DesignMatrix:
    """Subjects x named-features matrix with the VAT target."""

    subject_ids: list[str]
    columns: list[str]
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        n, p = self.X.shape
        if len(self.subject_ids) != n or len(self.y) != n:
            raise ValueError("row count mismatch")
        if len(self.columns) != p:
            raise ValueError("column name count mismatch")
        if len(set(self.columns)) != p:
            raise ValueError("duplicate column names")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("design matrix contains missing/non-finite values")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def subset(self, rows: np.ndarray) -> "DesignMatrix":
        return DesignMatrix(
            [self.subject_ids[i] for i in rows],
            self.columns,
            self.X[rows],
            self.y[rows],
        )


@dataclass(frozen=True)
class RegressionModel:
    """Standardization parameters plus ridge weights and intercept."""

    input_columns: tuple[str, ...]
    kept_columns: tuple[str, ...]
    column_means: np.ndarray
    column_stds: np.ndarray
    weights: np.ndarray
    intercept: float
    ridge_lambda: float
    lambda_scaling: str

    @property
    def dropped_columns(self) -> tuple[str, ...]:
        kept = set(self.kept_columns)
        return tuple(c for c in self.input_columns if c not in kept)


def ridge_fit(
    design: DesignMatrix,
    ridge_lambda: float = DEFAULT_RIDGE_LAMBDA,
    lambda_scaling: str = "n",
) -> RegressionModel:
    """Fit the standardized ridge model; deterministic SPD solve.

    Raises ``DegenerateDesign`` when every column has zero variance.
    """
    if lambda_scaling not in ("n", "raw"):
        raise ValueError("lambda_scaling must be 'n' or 'raw'")
    if ridge_lambda <= 0:
        raise ValueError("ridge_lambda must be positive")
    X, y = design.X, design.y
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two rows")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    keep = stds > _ZERO_VARIANCE_STD
    if not np.any(keep):
        raise DegenerateDesign("all feature columns have zero variance")
    dropped = [c for c, k in zip(design.columns, keep) if not k]
    if dropped:
        logger.warning("dropping %d zero-variance columns: %s", len(dropped), dropped)
    Z = (X[:, keep] - means[keep]) / stds[keep]
    intercept = float(y.mean())
    yc = y - intercept
    penalty = ridge_lambda * n if lambda_scaling == "n" else ridge_lambda
    A = Z.T @ Z + penalty * np.eye(Z.shape[1])
    w = scipy.linalg.solve(A, Z.T @ yc, assume_a="pos")
    return RegressionModel(
        input_columns=tuple(design.columns),
        kept_columns=tuple(c for c, k in zip(design.columns, keep) if k),
        column_means=means[keep],
        column_stds=stds[keep],
        weights=w,
        intercept=intercept,
        ridge_lambda=ridge_lambda,
        lambda_scaling=lambda_scaling,
    )


def ridge_predict(
    model: RegressionModel, X: np.ndarray, columns: Sequence[str]
) -> np.ndarray:
    """Predict VAT (g): intercept + sum_i w_i (f_i - mu_i) / sigma_i.

    ``columns`` must match the training input columns exactly (order
    included); raises ``FeatureMismatch`` otherwise.
    """
    if tuple(columns) != model.input_columns:
        raise FeatureMismatch("prediction columns differ from training columns")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    keep = [i for i, c in enumerate(model.input_columns) if c in set(model.kept_columns)]
    Z = (X[:, keep] - model.column_means) / model.column_stds
    return model.intercept + Z @ model.weights


def spearman(a: Sequence[float], b: Sequence[float]) -> float:
    """Spearman rank correlation with mean ranks on ties.

    Raises ``ConstantInput`` when either sequence is constant.
    """
    ra = rankdata(np.asarray(a, dtype=np.float64), method="average")
    rb = rankdata(np.asarray(b, dtype=np.float64), method="average")
    return pearson(ra, rb)


def pearson(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size != b.size:
        raise ValueError("length mismatch")
    if a.size < 2:
        raise ConstantInput("need at least two values")
    ac = a - a.mean()
    bc = b - b.mean()
    denom = np.sqrt((ac @ ac) * (bc @ bc))
    if denom <= 0:
        raise ConstantInput("constant input sequence")
    return float(ac @ bc / denom)


class Metrics(NamedTuple):
    spearman: float
    pearson: float
    mae: float
    rmse: float


def metrics(y_true: Sequence[float], y_pred: Sequence[float]) -> Metrics:
    """Spearman r, Pearson r, MAE, RMSE of an estimate (all in target units)."""
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    if yt.shape != yp.shape:
        raise ValueError("length mismatch")
    err = yp - yt
    return Metrics(
        spearman=spearman(yt, yp),
        pearson=pearson(yt, yp),
        mae=float(np.abs(err).mean()),
        rmse=float(np.sqrt(np.mean(err * err))),
    )


def fuse_estimates(
    estimates: Sequence[Sequence[float]], weights: Sequence[float]
) -> np.ndarray:
    """Pointwise weighted average of per-subject prediction vectors.

    Raises ``WeightMismatch`` when counts differ or weights do not sum to 1.
    """
    if len(estimates) != len(weights) or len(estimates) == 0:
        raise WeightMismatch("one weight per estimate vector required")
    w = np.asarray(weights, dtype=np.float64)
    if abs(w.sum() - 1.0) > 1e-9:
        raise WeightMismatch(f"weights sum to {w.sum()!r}, expected 1")
    try:
        mat = np.asarray(estimates, dtype=np.float64)
    except ValueError as exc:
        raise WeightMismatch("estimate vectors have mismatched lengths") from exc
    if mat.ndim != 2:
        raise WeightMismatch("estimate vectors have mismatched lengths")
    return w @ mat


BMI_CATEGORIES = ("all", "normal", "overweight", "obese", "overweight_or_obese")


def stratified_eval(
    y_true: Sequence[float],
    y_pred: Sequence[float],
    bmi: Sequence[float],
) -> dict[str, Optional[float]]:
    """Spearman correlation within BMI categories.

    Categories: normal (BMI < 25), overweight (25 <= BMI < 30), obese
    (BMI >= 30), their union, and all subjects.  Categories with fewer than
    three members (or a constant input) are reported as None.
    """
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    b = np.asarray(bmi, dtype=np.float64)
    if not (yt.size == yp.size == b.size):
        raise ValueError("length mismatch")
    masks = {
        "all": np.ones_like(b, dtype=bool),
        "normal": b < BMI_OVERWEIGHT,
        "overweight": (b >= BMI_OVERWEIGHT) & (b < BMI_OBESE),
        "obese": b >= BMI_OBESE,
        "overweight_or_obese": b >= BMI_OVERWEIGHT,
    }
    out: dict[str, Optional[float]] = {}
    for name in BMI_CATEGORIES:
        mask = masks[name]
        if mask.sum() < MIN_CATEGORY_SIZE:
            out[name] = None
            continue
        try:
            out[name] = spearman(yt[mask], yp[mask])
        except ConstantInput:
            out[name] = None
    return out


@dataclass(frozen=True)
class MeanStd:
    mean: float
    std: float

    def to_dict(self) -> dict[str, float]:
        return {"mean": self.mean, "std": self.std}


@dataclass
class EvalReport:
    """Cross-validation results for one feature configuration."""

    n_subjects: int
    n_features: int
    n_repeats: int
    train_frac: float
    ridge_lambda: float
    lambda_scaling: str
    seed: int
    spearman_r: MeanStd
    pearson_r: MeanStd
    mae_g: MeanStd
    rmse_g: MeanStd
    fold_spearman: list[float]
    fold_pearson: list[float]
    fold_mae: list[float]
    fold_rmse: list[float]
    dropped_columns: dict[str, int] = field(default_factory=dict)
    by_bmi_category: Optional[dict[str, Optional[float]]] = None
    n_subjects_never_tested: int = 0
    mean_test_predictions: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_subjects": self.n_subjects,
            "n_features": self.n_features,
            "n_repeats": self.n_repeats,
            "train_frac": self.train_frac,
            "ridge_lambda": self.ridge_lambda,
            "lambda_scaling": self.lambda_scaling,
            "seed": self.seed,
            "spearman_r": self.spearman_r.to_dict(),
            "pearson_r": self.pearson_r.to_dict(),
            "mae_g": self.mae_g.to_dict(),
            "rmse_g": self.rmse_g.to_dict(),
            "fold_spearman": self.fold_spearman,
            "fold_pearson": self.fold_pearson,
            "fold_mae": self.fold_mae,
            "fold_rmse": self.fold_rmse,
            "dropped_columns": dict(sorted(self.dropped_columns.items())),
            "by_bmi_category": self.by_bmi_category,
            "n_subjects_never_tested": self.n_subjects_never_tested,
        }


def _mean_std(values: list[float]) -> MeanStd:
    a = np.asarray(values)
    return MeanStd(float(a.mean()), float(a.std()))


def cross_validate(
    design: DesignMatrix,
    n_repeats: int = DEFAULT_N_REPEATS,
    train_frac: float = DEFAULT_TRAIN_FRAC,
    seed: int = 0,
    ridge_lambda: float = DEFAULT_RIDGE_LAMBDA,
    lambda_scaling: str = "n",
    bmi: Optional[Sequence[float]] = None,
) -> EvalReport:
    """Repeated random-split evaluation (default 30 repeats of 80/20).

    Split r shuffles the rows with a generator seeded ``seed + r``, so the
    report is bit-identical across runs for a fixed seed.  When ``bmi`` is
    given, BMI-stratified Spearman correlations are computed on each
    subject's mean held-out prediction.

    Raises ``TooFewRows`` for fewer than 10 rows.
    """
    n = design.n_rows
    if n < 10:
        raise TooFewRows(f"{n} rows; need >= 10")
    if not 0 < train_frac < 1:
        raise ValueError("train_frac must be in (0, 1)")
    n_train = min(max(int(round(train_frac * n)), 2), n - 2)

    fold_metrics: list[Metrics] = []
    dropped: dict[str, int] = {}
    pred_sum = np.zeros(n)
    pred_count = np.zeros(n, dtype=int)
    for r in range(n_repeats):
        order = np.random.default_rng(seed + r).permutation(n)
        train_rows, test_rows = order[:n_train], order[n_train:]
        model = ridge_fit(design.subset(train_rows), ridge_lambda, lambda_scaling)
        for col in model.dropped_columns:
            dropped[col] = dropped.get(col, 0) + 1
        preds = ridge_predict(model, design.X[test_rows], design.columns)
        fold_metrics.append(metrics(design.y[test_rows], preds))
        pred_sum[test_rows] += preds
        pred_count[test_rows] += 1

    tested = pred_count > 0
    mean_preds = np.divide(pred_sum, pred_count, where=tested, out=np.zeros(n))
    by_bmi = None
    if bmi is not None:
        b = np.asarray(bmi, dtype=np.float64)
        if b.size != n:
            raise ValueError("bmi length mismatch")
        by_bmi = stratified_eval(design.y[tested], mean_preds[tested], b[tested])

    return EvalReport(
        n_subjects=n,
        n_features=len(design.columns),
        n_repeats=n_repeats,
        train_frac=train_frac,
        ridge_lambda=ridge_lambda,
        lambda_scaling=lambda_scaling,
        seed=seed,
        spearman_r=_mean_std([m.spearman for m in fold_metrics]),
        pearson_r=_mean_std([m.pearson for m in fold_metrics]),
        mae_g=_mean_std([m.mae for m in fold_metrics]),
        rmse_g=_mean_std([m.rmse for m in fold_metrics]),
        fold_spearman=[m.spearman for m in fold_metrics],
        fold_pearson=[m.pearson for m in fold_metrics],
        fold_mae=[m.mae for m in fold_metrics],
        fold_rmse=[m.rmse for m in fold_metrics],
        dropped_columns=dropped,
        by_bmi_category=by_bmi,
        n_subjects_never_tested=int((~tested).sum()),
        mean_test_predictions={
            design.subject_ids[i]: float(mean_preds[i])
            for i in range(n)
            if tested[i]
        },
    )
