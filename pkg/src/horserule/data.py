"""CSV loading, one-hot encoding, standardization and fold splitting."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

__all__ = [
    "EncodedColumn",
    "Dataset",
    "ScalingInfo",
    "load_csv",
    "encode_with_schema",
    "standardize",
    "kfold",
]


@dataclass(frozen=True)
class EncodedColumn:
    """One column of the encoded covariate matrix."""

    name: str  # "rm" for numeric, "town=east" for a category indicator
    source: str  # original variable name
    kind: str  # "numeric" or "indicator"
    level: str | None = None


@dataclass
class Dataset:
    """Encoded covariates plus enough schema to re-encode new data."""

    X: np.ndarray  # (n, p) float64 after one-hot encoding
    y: np.ndarray | None  # (n,) float64, None when the file has no target
    columns: list[EncodedColumn]
    target: str | None
    variable_kinds: dict[str, str] = field(default_factory=dict)  # source var -> kind
    levels: dict[str, list[str]] = field(default_factory=dict)  # categorical var -> ordered levels

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def schema(self) -> dict:
        """JSON-serializable description used to re-encode prediction data."""
        return {
            "target": self.target,
            "variables": [
                {"name": v, "kind": k, "levels": self.levels.get(v)}
                for v, k in self.variable_kinds.items()
            ],
        }


def _read_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: file is empty")
    header, data = rows[0], rows[1:]
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names in header")
    width = len(header)
    for i, row in enumerate(data):
        if len(row) != width:
            raise DataError(f"{path}: row {i + 2} has {len(row)} fields, expected {width}")
        for j, cell in enumerate(row):
            if cell.strip() == "":
                raise DataError(
                    f"{path}: missing value at row {i + 2}, column {header[j]!r}"
                )
    if len(data) < 2:
        raise DataError(f"{path}: need at least 2 data rows, found {len(data)}")
    return header, data


def _parses_numeric(cells) -> bool:
    try:
        for c in cells:
            float(c)
    except ValueError:
        return False
    return True


def load_csv(path, target: str | None = None, schema_overrides: dict | None = None) -> Dataset:
    """Load a headed CSV into an encoded Dataset.

    Column kinds are inferred: a column is numeric when every cell parses as
    a float, categorical otherwise. ``schema_overrides`` maps column names to
    "numeric" or "categorical" to force a kind. Categorical columns expand to
    one 0/1 indicator per level (levels sorted lexicographically). The target
    column, when given, must be numeric and is returned separately as ``y``.
    """
    header, data = _read_rows(path)
    overrides = dict(schema_overrides or {})
    for name, kind in overrides.items():
        if name not in header:
            raise DataError(f"schema override names unknown column {name!r}")
        if kind not in ("numeric", "categorical"):
            raise DataError(f"schema override for {name!r}: unknown kind {kind!r}")

    if target is not None and target not in header:
        raise DataError(f"target column {target!r} not found in header")

    raw = {name: [row[j] for row in data] for j, name in enumerate(header)}

    y = None
    if target is not None:
        try:
            y = np.array([float(v) for v in raw[target]], dtype=np.float64)
        except ValueError:
            bad = next(i for i, v in enumerate(raw[target]) if not _parses_numeric([v]))
            raise DataError(
                f"target column {target!r} is not numeric "
                f"(row {bad + 2}: {raw[target][bad]!r})"
            ) from None
        if not np.all(np.isfinite(y)):
            raise DataError(f"target column {target!r} contains non-finite values")

    variable_kinds: dict[str, str] = {}
    levels: dict[str, list[str]] = {}
    columns: list[EncodedColumn] = []
    mats: list[np.ndarray] = []
    n = len(data)

    for name in header:
        if name == target:
            continue
        kind = overrides.get(name) or ("numeric" if _parses_numeric(raw[name]) else "categorical")
        if kind == "numeric":
            try:
                col = np.array([float(v) for v in raw[name]], dtype=np.float64)
            except ValueError:
                bad = next(i for i, v in enumerate(raw[name]) if not _parses_numeric([v]))
                raise DataError(
                    f"column {name!r} declared numeric but row {bad + 2} "
                    f"holds {raw[name][bad]!r}"
                ) from None
            if not np.all(np.isfinite(col)):
                raise DataError(f"column {name!r} contains non-finite values")
            variable_kinds[name] = "numeric"
            columns.append(EncodedColumn(name=name, source=name, kind="numeric"))
            mats.append(col)
        else:
            lv = sorted(set(raw[name]))
            variable_kinds[name] = "categorical"
            levels[name] = lv
            vals = np.array(raw[name])
            for level in lv:
                columns.append(
                    EncodedColumn(name=f"{name}={level}", source=name, kind="indicator", level=level)
                )
                mats.append((vals == level).astype(np.float64))

    if not mats:
        raise DataError("no covariate columns remain after removing the target")
    X = np.column_stack(mats) if mats else np.empty((n, 0))
    return Dataset(
        X=X, y=y, columns=columns, target=target,
        variable_kinds=variable_kinds, levels=levels,
    )


def encode_with_schema(path, schema: dict) -> tuple[np.ndarray, np.ndarray | None]:
    """Re-encode a CSV against a stored schema (used at prediction time).

    Every covariate from the schema must be present; extra columns are
    ignored. Categorical cells with a level unseen at fit time produce an
    all-zero indicator block and a warning. Returns (X, y) where y is None
    when the file lacks the target column.
    """
    header, data = _read_rows(path)
    raw = {name: [row[j] for row in data] for j, name in enumerate(header)}

    target = schema.get("target")
    y = None
    if target is not None and target in header:
        try:
            y = np.array([float(v) for v in raw[target]], dtype=np.float64)
        except ValueError:
            raise DataError(f"target column {target!r} is not numeric") from None

    mats: list[np.ndarray] = []
    for var in schema["variables"]:
        name, kind = var["name"], var["kind"]
        if name not in header:
            raise DataError(f"prediction data is missing column {name!r}")
        if kind == "numeric":
            try:
                mats.append(np.array([float(v) for v in raw[name]], dtype=np.float64))
            except ValueError:
                raise DataError(f"column {name!r} must be numeric") from None
        else:
            vals = np.array(raw[name])
            known = set(var["levels"])
            unseen = sorted(set(raw[name]) - known)
            if unseen:
                warnings.warn(
                    f"column {name!r}: unseen levels {unseen} encode as all-zero indicators",
                    stacklevel=2,
                )
            for level in var["levels"]:
                mats.append((vals == level).astype(np.float64))
    return np.column_stack(mats), y


@dataclass
class ScalingInfo:
    """Standardization statistics captured at fit time."""

    col_means: np.ndarray  # per kept column
    col_sds: np.ndarray  # sample standard deviation (ddof=1), per kept column
    kept: np.ndarray  # indices into the original encoded columns
    dropped: np.ndarray  # indices of zero-variance columns
    y_mean: float
    y_sd: float
    y_transform: str  # "none" or "log"


def standardize(X, y, y_transform: str = "none"):
    """Center/scale columns by sample sd and the target likewise.

    Zero-variance columns are dropped (their indices are recorded in the
    returned ScalingInfo). With ``y_transform="log"`` the target is logged
    before standardizing; it must be strictly positive.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("X must be 2-dimensional")
    if y.shape != (X.shape[0],):
        raise DataError("y length does not match X rows")
    if X.shape[0] < 2:
        raise DataError("need at least 2 rows to standardize")
    if y_transform not in ("none", "log"):
        raise DataError(f"unknown y_transform {y_transform!r}")

    if y_transform == "log":
        if np.any(y <= 0):
            raise DataError("y_transform='log' requires strictly positive targets")
        t = np.log(y)
    else:
        t = y

    means = X.mean(axis=0)
    sds = X.std(axis=0, ddof=1)
    kept = np.flatnonzero(sds > 0)
    dropped = np.flatnonzero(sds == 0)
    Xs = (X[:, kept] - means[kept]) / sds[kept]

    y_mean = float(t.mean())
    y_sd = float(t.std(ddof=1))
    if y_sd == 0:
        raise DataError("target has zero variance")
    ys = (t - y_mean) / y_sd

    info = ScalingInfo(
        col_means=means[kept], col_sds=sds[kept], kept=kept, dropped=dropped,
        y_mean=y_mean, y_sd=y_sd, y_transform=y_transform,
    )
    return Xs, ys, info


def kfold(n: int, k: int, seed: int):
    """Deterministic k-fold split of range(n) into (train, test) index pairs.

    Fold sizes differ by at most one. Indices within each side are sorted.
    """
    if not 2 <= k <= n:
        raise DataError(f"k must be in [2, {n}], got {k}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    perm = rng.permutation(n)
    folds = []
    for test in np.array_split(perm, k):
        test = np.sort(test)
        mask = np.ones(n, dtype=bool)
        mask[test] = False
        folds.append((np.flatnonzero(mask), test))
    return folds
