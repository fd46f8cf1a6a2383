"""Lossless text serialization: CSV tables, JSON summaries, problem bundles.

Floats are written with 17 significant digits (``%.16e``) so that every
double round-trips exactly; JSON uses sorted keys so reruns are
byte-identical.
"""

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .problems import NoisyProblem, SyntheticSpec, decay_from_dict, gen_synthetic, make_problem

FLOAT_FMT = "%.16e"


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return FLOAT_FMT % float(value)


def write_csv(path, header, rows):
    """Write ``rows`` under ``header``; booleans become 0/1, ints stay ints."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row of length {len(row)} under {len(header)} columns")
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def read_csv(path):
    """Return ``(header, columns)`` with every column as a float array."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader if row]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return header, {name: arr[:, j] for j, name in enumerate(header)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no inf/nan; encode them as strings
        return x if math.isfinite(x) else str(x)
    return obj


def write_json(path, obj):
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text)
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_vector(path, x):
    np.savetxt(path, np.asarray(x, dtype=float).reshape(-1, 1), fmt=FLOAT_FMT)


def write_matrix(path, A):
    np.savetxt(path, np.asarray(A, dtype=float), fmt=FLOAT_FMT, delimiter=",")


def read_vector(path):
    return np.loadtxt(path, dtype=float, ndmin=1)


def read_matrix(path):
    return np.loadtxt(path, dtype=float, delimiter=",", ndmin=2)


def ensure_dir(path):
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"cannot create output directory {path}: {exc}",
                              "unwritable-directory") from exc
    if not os.access(path, os.W_OK):
        raise ValidationError(f"output directory {path} is not writable", "unwritable-directory")
    return path


def save_bundle(noisy, directory):
    """Write ``A.csv``, ``b_true.csv``, ``x_true.csv``, ``b.csv``, ``e.csv`` and ``meta.json``."""
    d = ensure_dir(directory)
    base = noisy.base if isinstance(noisy, NoisyProblem) else noisy
    write_matrix(d / "A.csv", base.A)
    write_vector(d / "b_true.csv", base.b_true)
    write_vector(d / "x_true.csv", base.x_true)
    meta = dict(base.meta)
    if base.decay is not None:
        meta["decay_model"] = base.decay.to_dict()
    if isinstance(noisy, NoisyProblem):
        write_vector(d / "b.csv", noisy.b)
        write_vector(d / "e.csv", noisy.e)
        meta["noise"] = {"epsilon": noisy.epsilon, "eta": noisy.eta, "seed": noisy.seed}
    write_json(d / "meta.json", meta)
    return d


def load_bundle(directory):
    """Inverse of :func:`save_bundle`.

    Synthetic problems are regenerated from their recorded parameters so that the
    exact SVD factors are available again; the stored matrix must match.
    """
    d = Path(directory)
    meta = read_json(d / "meta.json")
    A = read_matrix(d / "A.csv")
    kind = meta.get("kind")
    if kind == "synthetic":
        spec = SyntheticSpec(m=int(meta["m"]), n=int(meta["n"]), decay=decay_from_dict(meta["decay"]),
                             beta=float(meta["beta"]), seed=int(meta["seed"]))
        base = gen_synthetic(spec)
        if not np.array_equal(base.A, A):
            raise ValidationError("bundle matrix does not match its recorded parameters", "corrupt-bundle")
    elif kind in ("shaw", "deriv2"):
        base = make_problem(kind, int(meta["n"]))
    else:
        raise ValidationError(f"unknown bundle kind {kind!r}", "invalid-kind")
    if "noise" not in meta:
        return base
    e = read_vector(d / "e.csv")
    noise = meta["noise"]
    return NoisyProblem(base=base, e=e, b=read_vector(d / "b.csv"), epsilon=float(noise["epsilon"]),
                        eta=float(noise["eta"]), seed=int(noise["seed"]))
