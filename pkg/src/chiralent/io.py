"""JSON / CSV serialization for states, moment rows, datasets and plot tables."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import SchemaMismatchError
from .moments import MomentSet, RealignMomentSet
from .qstate import DensityMatrix, StateLabel


def state_to_dict(rho: DensityMatrix, label: StateLabel | None = None) -> dict:
    # json writes floats with repr(), which round-trips doubles exactly
    d = {"dims": [rho.d_a, rho.d_b], "re": rho.data.real.tolist(), "im": rho.data.imag.tolist()}
    if label is not None:
        d["label"] = label.to_dict()
    return d


def state_from_dict(d: dict) -> tuple[DensityMatrix, StateLabel | None]:
    m = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
    label = StateLabel.from_dict(d["label"]) if "label" in d else None
    return DensityMatrix(m, tuple(d["dims"])), label


def state_to_json(rho: DensityMatrix, label: StateLabel | None = None) -> str:
    return json.dumps(state_to_dict(rho, label))


def state_from_json(text: str) -> tuple[DensityMatrix, StateLabel | None]:
    return state_from_dict(json.loads(text))


def moment_row(ms: MomentSet, rm: RealignMomentSet | None = None) -> dict[str, float]:
    """Flat named columns: mu2.., I2.., C3, C4, then S/G/D/SP/GP columns and ratios."""
    row = {}
    for k in range(2, ms.k_max + 1):
        row[f"mu{k}"] = ms.mu_k(k)
    for k in range(2, ms.k_max + 1):
        row[f"I{k}"] = ms.i_k(k)
    for k in (3, 4):
        if k <= ms.k_max:
            row[f"C{k}"] = ms.c_k(k)
    if rm is not None:
        for prefix, arr in (("S", rm.sigma), ("G", rm.g), ("D", rm.d_gap), ("SP", rm.sp), ("GP", rm.gp), ("DP", rm.dp)):
            for k, v in enumerate(arr, start=1):
                row[f"{prefix}{k}"] = float(v)
        row["dG2"] = rm.delta_g2
        row.update(rm.ratios)
    return row


def write_rows_csv(path, rows: list[dict], columns: list[str] | None = None) -> None:
    columns = columns or list(rows[0]) if rows else (columns or [])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        for r in rows:
            w.writerow({c: _fmt(r.get(c, "")) for c in columns})


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_dataset_csv(path, X, names, y, family, labels=None) -> None:
    """Header = feature names + label + family + param_json."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + ["label", "family", "param_json"])
        for i in range(len(y)):
            params = json.dumps(labels[i].to_dict()["params"]) if labels is not None else "{}"
            w.writerow([repr(float(v)) for v in X[i]] + [int(y[i]), family[i], params])


def read_dataset_csv(path) -> tuple[np.ndarray, tuple, np.ndarray, np.ndarray, list[dict]]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        tail = ["label", "family", "param_json"]
        if header[-3:] != tail:
            raise SchemaMismatchError(f"dataset header must end with {tail}, got {header[-3:]}")
        names = tuple(header[:-3])
        X, y, fam, params = [], [], [], []
        for row in r:
            X.append([float(v) for v in row[:-3]])
            y.append(int(row[-3]))
            fam.append(row[-2])
            params.append(json.loads(row[-1]))
    return np.array(X, dtype=float).reshape(-1, len(names)), names, np.array(y), np.array(fam), params


def write_xy_csv(path, x, y, yerr=None) -> None:
    """Plot-ready table with columns x, y, yerr."""
    yerr = np.zeros(len(x)) if yerr is None else yerr
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "yerr"])
        for a, b, c in zip(x, y, yerr):
            w.writerow([repr(float(a)), repr(float(b)), repr(float(c))])


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(float(x))
    if isinstance(x, (np.integer, np.bool_)):
        return x.item()
    return x


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
