"""Experiment pipelines behind the command line: one noisy problem per seed,
written to its own ``seed_<s>`` directory, plus a per-run aggregate.

Every function here is a deterministic function of the configuration and
the seed, so reruns produce byte-identical files.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from . import io
from .bidiag import REORTH_POLICIES, diagnostics_rows, lanczos_bidiag, ritz_table
from .errors import ValidationError
from .problems import Geometric, PowerLaw, add_noise, make_problem
from .solvers import (cgls_series, default_kmax, filter_matrix, krylov_series,
                      semi_convergence)
from .subspace import DELTA_DEFAULT, diagnose
from .svdtools import compute_svd, picard_data, transition_index, tsvd_error_curve

KINDS = ("synthetic", "shaw", "deriv2")
METHODS = ("lsqr", "cgls", "cgme", "lsmr")
SCHEMA_VERSION = 1

SEMICONV_FILES = ("picard.csv", "tsvd_curve.csv", "ritz.csv", "bidiag_diag.csv", "filters.csv")
DIAGNOSE_FILES = ("sintheta.csv", "ritz_check.csv", "lagrange.csv")


def parse_decay(text):
    """``geometric:RHO`` or ``power:ZETA:ALPHA``."""
    parts = text.split(":")
    try:
        if parts[0] == "geometric" and len(parts) == 2:
            return Geometric(float(parts[1]))
        if parts[0] == "power" and len(parts) == 3:
            return PowerLaw(float(parts[1]), float(parts[2]))
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad number in decay {text!r}", "invalid-decay") from exc
    raise ValidationError(f"decay must be geometric:RHO or power:ZETA:ALPHA, got {text!r}",
                          "invalid-decay")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n: int
    m: Optional[int] = None
    decay: Optional[object] = None
    beta: float = 1.0
    epsilon: float = 1e-3
    seeds: Tuple[int, ...] = (0,)
    kmax: Optional[int] = None
    reorth: str = "full"
    methods: Tuple[str, ...] = ("lsqr",)
    delta: float = DELTA_DEFAULT
    out: Path = field(default=Path("."))

    def validate(self):
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}", "invalid-kind")
        if self.kind == "synthetic" and self.decay is None:
            raise ValidationError("synthetic problems need --decay", "invalid-decay")
        if self.n < 2:
            raise ValidationError("n must be at least 2", "invalid-dimension")
        if not self.seeds:
            raise ValidationError("at least one seed is required", "invalid-parameter")
        if any(not 0 <= s < 2 ** 64 for s in self.seeds):
            raise ValidationError("seeds must be 64-bit unsigned integers", "invalid-parameter")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValidationError("seeds must be distinct", "invalid-parameter")
        if self.reorth not in REORTH_POLICIES:
            raise ValidationError(f"reorth must be one of {REORTH_POLICIES}", "invalid-parameter")
        if not self.methods:
            raise ValidationError("methods list is empty", "invalid-method")
        bad = [mth for mth in self.methods if mth not in METHODS]
        if bad:
            raise ValidationError(f"unknown methods {bad}; choose from {METHODS}", "invalid-method")
        if not self.delta > 0:
            raise ValidationError("delta must be positive", "invalid-parameter")
        if self.kmax is not None and not 1 <= self.kmax <= self.n:
            raise ValidationError(f"kmax must lie in [1, {self.n}]", "invalid-parameter")
        if not 0 < self.epsilon < 1:
            code = "noise-dominates" if self.epsilon >= 1 else "invalid-parameter"
            raise ValidationError("eps must lie in (0, 1)", code)
        # building the first problem checks the remaining generator preconditions
        make_problem(self.kind, self.n, m=self.m, decay=self.decay, beta=self.beta,
                     seed=self.seeds[0])
        return self

    def to_dict(self):
        return {"kind": self.kind, "n": self.n, "m": self.m,
                "decay": None if self.decay is None else self.decay.to_dict(),
                "beta": self.beta, "epsilon": self.epsilon, "seeds": list(self.seeds),
                "kmax": self.kmax, "reorth": self.reorth, "methods": list(self.methods),
                "delta": self.delta}


def noise_seed(seed):
    """Noise stream seed, decorrelated from the matrix seed of synthetic problems."""
    return int(np.random.SeedSequence([int(seed), 1]).generate_state(1, np.uint64)[0])


def build_problem(config, seed):
    """Noisy problem and its SVD (exact for synthetic, computed otherwise)."""
    base = make_problem(config.kind, config.n, m=config.m, decay=config.decay,
                        beta=config.beta, seed=seed)
    noisy = add_noise(base, config.epsilon, noise_seed(seed))
    svd = base.svd if base.svd is not None else compute_svd(base.A)
    return noisy, svd


def seed_dir(out, seed):
    return io.ensure_dir(Path(out) / f"seed_{seed}")


def _record(directory, command, files):
    path = Path(directory) / "manifest.json"
    manifest = io.read_json(path) if path.exists() else {}
    manifest[command] = sorted(files)
    io.write_json(path, manifest)


def worker_count(jobs):
    cap = os.environ.get("REGDIAG_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = int(cap)
        except ValueError as exc:
            raise ValidationError("REGDIAG_THREADS must be an integer", "invalid-parameter") from exc
        if limit < 1:
            raise ValidationError("REGDIAG_THREADS must be positive", "invalid-parameter")
    return max(1, min(limit, jobs))


def map_seeds(func, config):
    """Run ``func(config, seed)`` for every seed on a bounded thread pool."""
    with ThreadPoolExecutor(max_workers=worker_count(len(config.seeds))) as pool:
        return list(pool.map(lambda s: func(config, s), config.seeds))


def geometric_mean(x):
    x = np.asarray(x, dtype=float)
    x = x[np.isfinite(x) & (x > 0)]
    return float(np.exp(np.mean(np.log(x)))) if x.size else float("nan")


# -- generate ---------------------------------------------------------------

def generate_one(config, seed):
    noisy, _ = build_problem(config, seed)
    d = io.save_bundle(noisy, seed_dir(config.out, seed))
    _record(d, "generate", ["meta.json"])
    return {"seed": seed, "dir": d.name}


def run_generate(config):
    config.validate()
    io.ensure_dir(config.out)
    rows = map_seeds(generate_one, config)
    io.write_json(Path(config.out) / "generate.json", {"config": config.to_dict(), "runs": rows})
    return rows


# -- semiconv ---------------------------------------------------------------

def semiconv_one(config, seed):
    noisy, svd = build_problem(config, seed)
    d = seed_dir(config.out, seed)
    pic = picard_data(svd, noisy.b)
    trans = transition_index(pic, noisy.eta)
    curve = tsvd_error_curve(svd, noisy.b, noisy.x_true)
    n = noisy.A.shape[1]
    kmax = config.kmax if config.kmax is not None else max(2, default_kmax(n, trans.k0))
    state = lanczos_bidiag(noisy.A, noisy.b, kmax, reorth=config.reorth)

    files = list(SEMICONV_FILES)
    io.write_csv(d / "picard.csv", ["i", "sigma_i", "coeff_i", "ratio_i"],
                 [(i + 1, pic.sigma[i], pic.coeff[i], pic.ratio[i]) for i in range(n)])
    io.write_csv(d / "tsvd_curve.csv", ["k", "rel_error", "residual_norm"],
                 zip(curve.k, curve.rel_error, curve.residual_norm))
    io.write_csv(d / "ritz.csv", ["k", "i", "theta_i_k"],
                 [(k, i + 1, th[i]) for k, th in enumerate(ritz_table(state), 1)
                  for i in range(k)])
    io.write_csv(d / "bidiag_diag.csv",
                 ["k", "alpha_k", "beta_kplus1", "orth_defect_P", "orth_defect_Q"],
                 diagnostics_rows(state))
    F = filter_matrix(state, svd.sigma)
    io.write_csv(d / "filters.csv", ["k", "i", "f_i_k"],
                 [(k + 1, i + 1, F[k, i]) for k in range(F.shape[0]) for i in range(n)])

    methods = {}
    for method in config.methods:
        if method == "cgls":
            series = cgls_series(noisy, min(kmax, state.k))
        else:
            series = krylov_series(method, noisy, kmax, config.reorth, state=state)
        name = f"series_{method}.csv"
        io.write_csv(d / name, ["k", "rel_error", "residual_norm", "solution_norm"],
                     zip(series.k, series.rel_error, series.residual_norm, series.solution_norm))
        files.append(name)
        sc = semi_convergence(series) if series.k.size >= 2 else None
        methods[method] = {
            "kstar": None if sc is None else sc.kstar,
            "best_rel_error": series.best_rel_error,
            "flag": None if sc is None else sc.flag,
            "iterations": int(series.k.size),
            "breakdown": series.breakdown,
        }

    summary = {
        "seed": seed, "noise_seed": noisy.seed, "eta": noisy.eta, "kmax": kmax,
        "k0_transition": trans.k0, "k0_rule": trans.rule,
        "k0_best_tsvd": curve.best_k, "best_tsvd_rel_error": curve.best_rel_error,
        "methods": methods,
    }
    if "lsqr" in methods and methods["lsqr"]["kstar"] is not None:
        summary["kstar_le_k0"] = methods["lsqr"]["kstar"] <= curve.best_k
        summary["lsqr_over_tsvd"] = methods["lsqr"]["best_rel_error"] / curve.best_rel_error
    io.write_json(d / "summary.json", summary)
    files.append("summary.json")
    _record(d, "semiconv", files)
    return summary


def run_semiconv(config):
    config.validate()
    io.ensure_dir(config.out)
    runs = map_seeds(semiconv_one, config)
    agg = {"config": config.to_dict(), "schema_version": SCHEMA_VERSION, "runs": runs}
    if all("kstar_le_k0" in r for r in runs):
        agg["kstar_le_k0_all"] = all(r["kstar_le_k0"] for r in runs)
        agg["lsqr_over_tsvd_geomean"] = geometric_mean([r["lsqr_over_tsvd"] for r in runs])
    io.write_json(Path(config.out) / "semiconv_summary.json", agg)
    return agg


# -- diagnose ---------------------------------------------------------------

def diagnose_one(config, seed):
    noisy, svd = build_problem(config, seed)
    decay = noisy.base.decay
    d = seed_dir(config.out, seed)
    diag = diagnose(noisy.A, noisy.b, svd, decay, kmax=config.kmax, reorth=config.reorth,
                    delta=config.delta)
    io.write_csv(d / "sintheta.csv",
                 ["k", "sin_exact", "sin_estimate", "ratio", "tan_theta", "lagrange_max", "k1"],
                 zip(diag.k, diag.sin_theta_exact, diag.sin_theta_estimate, diag.ratio,
                     diag.tan_theta, diag.lagrange_max, diag.k1))
    io.write_csv(d / "ritz_check.csv",
                 ["k", "eps_k", "sigma_ratio", "large_cond", "small_cond", "theta_k",
                  "sigma_kplus1", "theta_gt_sigma"],
                 [(r.k, r.epsilon_k, r.sigma_ratio, r.sufficient_large_holds,
                   r.sufficient_small_holds, r.theta_k, r.sigma_kplus1, r.theta_gt_sigma)
                  for r in diag.ritz_verdict])
    io.write_csv(d / "lagrange.csv", ["k", "j", "L_j_k"],
                 [(k, j + 1, L[j]) for k, L in zip(diag.k, diag.lagrange) for j in range(k)])
    ratio = diag.ratio
    summary = {
        "seed": seed, "regime": diag.regime, "kmax": int(diag.k[-1]),
        "ratio_min": float(np.min(ratio)), "ratio_max": float(np.max(ratio)),
        "ratio_geomean": geometric_mean(ratio),
        "large_cond_prefix": _prefix_length([r.sufficient_large_holds for r in diag.ritz_verdict]),
    }
    io.write_json(d / "diagnose.json", summary)
    _record(d, "diagnose", list(DIAGNOSE_FILES) + ["diagnose.json"])
    return summary, ratio


def _prefix_length(flags):
    n = 0
    for f in flags:
        if not f:
            break
        n += 1
    return n


def run_diagnose(config):
    config.validate()
    io.ensure_dir(config.out)
    results = map_seeds(diagnose_one, config)
    runs = [r[0] for r in results]
    pooled = np.concatenate([r[1] for r in results])
    agg = {"config": config.to_dict(), "schema_version": SCHEMA_VERSION, "runs": runs,
           "ratio_geomean": geometric_mean(pooled),
           "ratio_min": float(np.min(pooled)), "ratio_max": float(np.max(pooled))}
    io.write_json(Path(config.out) / "diagnose_summary.json", agg)
    return agg


# -- report -----------------------------------------------------------------

def _table(path):
    header, cols = io.read_csv(path)
    return {name: cols[name].tolist() for name in header}


def build_report(out):
    """Merge every CSV and summary of a run directory into one JSON document.

    Nothing is recomputed. Files listed in a seed's manifest (or, without a
    manifest, the full set both commands produce) that are missing mark the
    report partial.
    """
    out = Path(out)
    if not out.is_dir():
        raise ValidationError(f"{out} is not a directory", "missing-input")
    report = {"schema_version": SCHEMA_VERSION, "partial": False, "missing": [], "seeds": {}}
    for name in ("generate.json", "semiconv_summary.json", "diagnose_summary.json"):
        if (out / name).exists():
            report[name.replace(".json", "")] = io.read_json(out / name)
    seed_dirs = sorted((p for p in out.iterdir() if p.is_dir() and p.name.startswith("seed_")),
                       key=lambda p: int(p.name.split("_", 1)[1]))
    if not seed_dirs:
        report["partial"] = True
        report["missing"].append("seed_*")
    for sd in seed_dirs:
        manifest_path = sd / "manifest.json"
        if manifest_path.exists():
            expected = sorted({f for files in io.read_json(manifest_path).values() for f in files})
        else:
            expected = list(SEMICONV_FILES) + list(DIAGNOSE_FILES)
        entry = {}
        for fname in expected:
            path = sd / fname
            if not path.exists():
                report["partial"] = True
                report["missing"].append(f"{sd.name}/{fname}")
                continue
            key = fname.rsplit(".", 1)[0]
            entry[key] = _table(path) if fname.endswith(".csv") else io.read_json(path)
        report["seeds"][sd.name] = entry
    io.write_json(out / "report.json", report)
    return report
