"""Model file format: one JSON header plus raw float64 draw blocks.

Layout:

    HORSERULE-MODEL 1 <header_bytes>\n
    <header JSON, UTF-8>
    <beta draws, D*P float64 little-endian, C order>
    <sigma2 draws, D float64>
    <tau2 draws, D float64>

Floats in the header use repr-exact JSON encoding and the binary blocks are
raw IEEE doubles, so save -> load -> save is byte-identical.
"""

from __future__ import annotations

import json

import numpy as np

from .data import ScalingInfo
from .errors import DataError
from .inference import FittedModel
from .rules import ColumnMeta, Condition, Rule
from .sampler import PosteriorDraws

__all__ = ["save_model", "load_model", "FORMAT_VERSION"]

FORMAT_VERSION = 1
_MAGIC = b"HORSERULE-MODEL"
_DTYPE = np.dtype("<f8")


def _rule_to_json(r: Rule) -> dict:
    return {
        "conditions": [[c.col, c.op, c.threshold] for c in r.conditions],
        "source": r.source,
        "support": r.support,
    }


def _rule_from_json(d: dict) -> Rule:
    conds = tuple(Condition(int(c[0]), str(c[1]), float(c[2])) for c in d["conditions"])
    return Rule(conditions=conds, source=d["source"], support=d["support"])


def _meta_to_json(m: ColumnMeta) -> dict:
    return {
        "kind": m.kind,
        "name": m.name,
        "mean": m.mean,
        "sd": m.sd,
        "source_col": m.source_col,
        "rule_index": m.rule_index,
        "support": m.support,
        "length": m.length,
    }


def _meta_from_json(d: dict) -> ColumnMeta:
    return ColumnMeta(**d)


def save_model(model: FittedModel, path):
    d = model.draws
    D, P = d.beta.shape
    header = {
        "format_version": FORMAT_VERSION,
        "config": model.config,
        "schema": model.schema,
        "feature_names": model.feature_names,
        "feature_sources": model.feature_sources,
        "scaling": {
            "col_means": model.scaling.col_means.tolist(),
            "col_sds": model.scaling.col_sds.tolist(),
            "kept": model.scaling.kept.tolist(),
            "dropped": model.scaling.dropped.tolist(),
            "y_mean": model.scaling.y_mean,
            "y_sd": model.scaling.y_sd,
            "y_transform": model.scaling.y_transform,
        },
        "columns": [_meta_to_json(m) for m in model.columns],
        "rules": [_rule_to_json(r) for r in model.rules],
        "train_rmse": model.train_rmse,
        "draws": {
            "n_draws": D,
            "n_cols": P,
            "niter": d.niter,
            "burnin": d.burnin,
            "thin": d.thin,
            "seed": d.seed,
            "arrays": ["beta", "sigma2", "tau2"],
            "dtype": _DTYPE.str,
        },
    }
    blob = json.dumps(header, separators=(",", ":"), allow_nan=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC + b" %d %d\n" % (FORMAT_VERSION, len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(d.beta, dtype=_DTYPE).tobytes())
        fh.write(np.ascontiguousarray(d.sigma2, dtype=_DTYPE).tobytes())
        fh.write(np.ascontiguousarray(d.tau2, dtype=_DTYPE).tobytes())


def load_model(path) -> FittedModel:
    try:
        with open(path, "rb") as fh:
            first = fh.readline()
            parts = first.split()
            if len(parts) != 3 or parts[0] != _MAGIC:
                raise DataError(f"{path}: not a horserule model file")
            version, hlen = int(parts[1]), int(parts[2])
            if version > FORMAT_VERSION:
                raise DataError(
                    f"{path}: format version {version} is newer than supported ({FORMAT_VERSION})"
                )
            blob = fh.read(hlen)
            if len(blob) != hlen:
                raise DataError(f"{path}: truncated header")
            header = json.loads(blob.decode("utf-8"))
            dinfo = header["draws"]
            D, P = int(dinfo["n_draws"]), int(dinfo["n_cols"])
            body = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except (ValueError, KeyError) as exc:
        raise DataError(f"{path}: corrupt model header: {exc}") from exc

    expect = (D * P + D + D) * _DTYPE.itemsize
    if len(body) != expect:
        raise DataError(f"{path}: draw block has {len(body)} bytes, expected {expect}")
    beta = np.frombuffer(body, dtype=_DTYPE, count=D * P).reshape(D, P).copy()
    sigma2 = np.frombuffer(body, dtype=_DTYPE, count=D, offset=D * P * 8).copy()
    tau2 = np.frombuffer(body, dtype=_DTYPE, count=D, offset=(D * P + D) * 8).copy()

    sc = header["scaling"]
    scaling = ScalingInfo(
        col_means=np.array(sc["col_means"], dtype=np.float64),
        col_sds=np.array(sc["col_sds"], dtype=np.float64),
        kept=np.array(sc["kept"], dtype=np.int64),
        dropped=np.array(sc["dropped"], dtype=np.int64),
        y_mean=float(sc["y_mean"]),
        y_sd=float(sc["y_sd"]),
        y_transform=sc["y_transform"],
    )
    draws = PosteriorDraws(
        beta=beta, sigma2=sigma2, tau2=tau2, lambda2=None,
        niter=int(dinfo["niter"]), burnin=int(dinfo["burnin"]),
        thin=int(dinfo["thin"]), seed=int(dinfo["seed"]),
    )
    return FittedModel(
        config=header["config"],
        schema=header["schema"],
        feature_names=list(header["feature_names"]),
        feature_sources=list(header["feature_sources"]),
        columns=[_meta_from_json(m) for m in header["columns"]],
        rules=[_rule_from_json(r) for r in header["rules"]],
        scaling=scaling,
        draws=draws,
        train_rmse=header.get("train_rmse"),
    )
