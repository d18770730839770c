"""Canonical feature-name registries for the gait (214) and sleep (206) summaries.

Column order is fixed here and mirrored by the summary builders and the CSV
exports.  Modeling configurations ("gait", "sleep_dynamics", "cov", ...) are
resolved to explicit column lists through :data:`FEATURE_CLASSES`.
"""

from __future__ import annotations

AXIS_PAIRS = ("xx", "xy", "xz", "yy", "yz", "zz")
N_TDE_SCALES = 4
N_TDE_EIGENVALUES = 21

COVARIATE_NAMES = ["age", "gender", "height_cm", "weight_kg", "bmi", "waist_cm"]


def _mean_std(names: list[str]) -> list[str]:
    return [f"{n}_{stat}" for n in names for stat in ("mean", "std")]


def _tde_names(stat: str) -> list[str]:
    return [
        f"tde_scale{s}_eig{r:02d}_{stat}"
        for s in range(1, N_TDE_SCALES + 1)
        for r in range(1, N_TDE_EIGENVALUES + 1)
    ]


# Movement-dynamics block shared by gait and sleep: z-scored PL and MAD,
# six axis-pair MADs, then TDE eigenvalue means and stds (4 scales x 21).
_DYNAMICS_BASE = ["dyn_pl", "dyn_mad"] + [f"dyn_mad_{p}" for p in AXIS_PAIRS]
_DYNAMICS_NAMES = _mean_std(_DYNAMICS_BASE) + _tde_names("mean") + _tde_names("std")

_GAIT_CADENCE = _mean_std(["step_duration1", "step_duration2", "step_periodicity"])
_GAIT_INTENSITY = _mean_std(["accel_msd", "accel_pl", "accel_mad"])
_GAIT_PATTERNS = [
    f"intensity_trans_{i}_{j}" for i in range(1, 5) for j in range(1, 5)
] + ["frame_count", "frame_msd_sum"]

GAIT_FEATURE_NAMES = [
    "gait_" + n
    for n in _GAIT_CADENCE + _GAIT_INTENSITY + _GAIT_PATTERNS + _DYNAMICS_NAMES
]

_SLEEP_FRAG = [f"dur_prob_{k}" for k in range(1, 6)] + [
    f"move_dur_prob_{k}" for k in range(1, 6)
]
_SLEEP_INTENSITY = _mean_std(
    ["accel_msd", "accel_pl", "accel_mad", "median_x", "median_y", "median_z"]
)

SLEEP_FEATURE_NAMES = [
    "sleep_" + n for n in _SLEEP_FRAG + _SLEEP_INTENSITY + _DYNAMICS_NAMES
]

# Feature classes mirror the per-class regression configurations: the four
# gait classes, the three sleep classes, their unions, and the covariates.
FEATURE_CLASSES: dict[str, list[str]] = {
    "gait_cadence": GAIT_FEATURE_NAMES[0:6],
    "gait_intensity": GAIT_FEATURE_NAMES[6:12],
    "gait_patterns": GAIT_FEATURE_NAMES[12:30],
    "gait_dynamics": GAIT_FEATURE_NAMES[30:],
    "sleep_frag": SLEEP_FEATURE_NAMES[0:10],
    "sleep_intensity": SLEEP_FEATURE_NAMES[10:22],
    "sleep_dynamics": SLEEP_FEATURE_NAMES[22:],
    "gait": list(GAIT_FEATURE_NAMES),
    "sleep": list(SLEEP_FEATURE_NAMES),
    "cov": list(COVARIATE_NAMES),
}


def resolve_feature_config(config: str) -> list[str]:
    """Expand a '+'-joined configuration such as ``gait+sleep+cov`` into an
    ordered, de-duplicated column list.

    Raises ``ValueError`` for unknown tokens or an empty selection.
    """
    tokens = [t.strip() for t in config.split("+") if t.strip()]
    if not tokens:
        raise ValueError("empty feature configuration")
    columns: list[str] = []
    for tok in tokens:
        if tok not in FEATURE_CLASSES:
            raise ValueError(
                f"unknown feature class {tok!r}; choose from "
                f"{sorted(FEATURE_CLASSES)}"
            )
        for col in FEATURE_CLASSES[tok]:
            if col not in columns:
                columns.append(col)
    return columns
