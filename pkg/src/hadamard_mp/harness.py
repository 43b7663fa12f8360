"""Monte Carlo studies over the Hadamard-product ensemble.

Every study expands into a deterministic list of trials. Trials run on a
thread pool (numpy releases the GIL inside BLAS/LAPACK) and write into slots
indexed by trial number; reductions then walk the slots in order, so reports
do not depend on ``threads``.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .ensembles import (
    DimensionSchedule,
    DimensionTriple,
    EnsembleSpec,
    dimension_schedule,
    hadamard_covariance,
    realize,
    truncate_center,
)
from .errors import ConfigurationError, ResourceGuardError
from .metrics import StepCDF, ks_distance, levy_distance
from .mp_law import MPLaw, cdf_closed_form, density, finite_n_tree_moment, mp_moment
from .oracle import (
    MAX_TUPLES,
    catalan,
    enumerate_contributing_walks,
    exact_moment_rademacher,
    golden_rows,
    tree_shapes,
)
from .report_io import dumps, write_csv, write_json
from .spectra import EmpiricalCDF, SpectralSample, eigenvalues, empirical_moment, histogram

log = logging.getLogger(__name__)

STUDY_KINDS = ("simulate", "moments", "variance", "truncation", "convergence", "oracle", "mp-eval")

DEFAULT_SEED = 12345
#: Eigenvalues with ``|lambda| <= ZERO_THRESHOLD * b`` count toward the atom at 0.
ZERO_THRESHOLD = 1e-9
#: Trial indices of schedule entry ``i`` start at ``i << TRIAL_STRIDE_BITS``.
TRIAL_STRIDE_BITS = 32
#: Oracle columns are added to moment studies only below this tuple count.
ORACLE_AUTO_LIMIT = 10**6


@dataclass
class StudyConfig:
    kind: str = "simulate"
    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    gamma: float = 0.5
    a: float = 2.0
    n_values: Sequence[int] = (1000,)
    dims: Optional[DimensionTriple] = None
    trials: Optional[int] = None
    k_max: int = 4
    c_values: Sequence[float] = (0.5, 1.0, 2.0, 4.0, 8.0)
    truncate: str = "both"
    master_seed: int = DEFAULT_SEED
    bins: int = 60
    levy_tol: float = 1e-6
    slope_band: tuple = (-2.5, -1.5)
    # execution-only settings; excluded from the report echo
    out_dir: Optional[Path] = None
    fmt: str = "json"
    threads: int = 1
    mem_cap_gb: float = 4.0

    def __post_init__(self):
        if self.kind not in STUDY_KINDS:
            raise ConfigurationError(f"unknown study {self.kind!r}; expected one of {STUDY_KINDS}")
        self.n_values = tuple(int(n) for n in self.n_values)
        self.c_values = tuple(float(c) for c in self.c_values)
        if self.trials is None:
            self.trials = self.default_trials()
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if not 1 <= self.k_max <= 12:
            raise ConfigurationError(f"k_max must lie in [1, 12], got {self.k_max}")
        if self.dims is None:
            if not self.n_values:
                raise ConfigurationError("n_values must be nonempty")
            if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
                raise ConfigurationError(f"n_values must be strictly increasing, got {self.n_values}")
        if any(c <= 0 for c in self.c_values):
            raise ConfigurationError(f"truncation levels must be positive, got {self.c_values}")
        if list(self.c_values) != sorted(self.c_values):
            raise ConfigurationError("truncation levels must be increasing")
        if self.truncate not in ("x-only", "both"):
            raise ConfigurationError(f"truncate must be 'x-only' or 'both', got {self.truncate!r}")
        if self.fmt not in ("csv", "json"):
            raise ConfigurationError(f"format must be csv or json, got {self.fmt!r}")
        if self.bins < 1:
            raise ConfigurationError("bins must be >= 1")
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")
        if not self.mem_cap_gb > 0:
            raise ConfigurationError("mem_cap_gb must be positive")

    def default_trials(self) -> int:
        if self.kind in ("moments", "variance"):
            return 200 if max(self.n_values or (0,)) <= 1000 else 10
        if self.kind in ("truncation", "convergence"):
            return 10
        return 1

    def schedule(self) -> DimensionSchedule:
        if self.dims is not None:
            return DimensionSchedule(self.dims.realized_gamma, self.dims.realized_a, (self.dims,))
        return dimension_schedule(self.gamma, self.a, self.n_values)

    def echo(self) -> dict:
        """Everything that determines the results (no threads, paths or caps)."""
        ens = self.ensemble
        return {
            "kind": self.kind,
            "dist_x": asdict(ens.dist_x),
            "dist_y": asdict(ens.dist_y),
            "normalize": ens.normalize,
            "gamma": self.gamma,
            "a": self.a,
            "n_values": list(self.n_values),
            "dims": None if self.dims is None else self.dims.as_dict(),
            "trials": self.trials,
            "k_max": self.k_max,
            "c_values": list(self.c_values),
            "truncate": self.truncate,
            "master_seed": self.master_seed,
            "bins": self.bins,
            "levy_tol": self.levy_tol,
            "slope_band": list(self.slope_band),
        }


@dataclass
class StudyReport:
    kind: str
    config: dict
    results: dict
    timing: dict
    version: str = __version__
    wall_time: float = 0.0
    # name -> list of row dicts, written as <name>.csv
    tables: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"config": self.config, "results": self.results, "timing": self.timing, "version": self.version}


# -- aggregation ---------------------------------------------------------------


def summarize(values: Sequence[float]) -> dict:
    """Mean, unbiased variance and standard error by a two-pass computation."""
    v = np.asarray(values, dtype=np.float64)
    t = len(v)
    mean = math.fsum(v.tolist()) / t
    var = math.fsum(((v - mean) ** 2).tolist()) / (t - 1) if t > 1 else 0.0
    return {"trials": t, "mean": mean, "variance": var, "stderr": math.sqrt(var / t)}


def fit_loglog(x: Sequence[float], y: Sequence[float]) -> dict:
    """Least-squares line through ``(log x, log y)`` with standard errors."""
    lx = np.log(np.asarray(x, dtype=np.float64))
    ly = np.log(np.asarray(y, dtype=np.float64))
    m = len(lx)
    xm, ym = lx.mean(), ly.mean()
    sxx = float(((lx - xm) ** 2).sum())
    slope = float(((lx - xm) * (ly - ym)).sum() / sxx)
    intercept = float(ym - slope * xm)
    resid = ly - (intercept + slope * lx)
    if m > 2:
        s2 = float((resid**2).sum() / (m - 2))
        slope_se = math.sqrt(s2 / sxx)
        intercept_se = math.sqrt(s2 * (1.0 / m + xm**2 / sxx))
    else:
        slope_se = intercept_se = float("nan")
    return {"slope": slope, "slope_se": slope_se, "intercept": intercept, "intercept_se": intercept_se}


# -- resources and trials --------------------------------------------------------


def estimate_bytes(dims: DimensionTriple, matrices: int = 2) -> int:
    """Peak bytes for one trial: ``matrices`` dense n x n arrays plus X and Y."""
    n = dims.n
    return 8 * (matrices * n * n + n * (dims.d + dims.p) * 2)


def check_memory(schedule: DimensionSchedule, threads: int, cap_gb: float, matrices: int = 2) -> None:
    worst = max(estimate_bytes(t, matrices) for t in schedule)
    need = worst * threads
    cap = cap_gb * 1024**3
    if need > cap:
        raise ResourceGuardError(
            f"study needs about {need / 1024**3:.2f} GiB ({threads} concurrent trials) "
            f"but the cap is {cap_gb:g} GiB",
            estimate=need,
        )


def _map_ordered(fn: Callable, items: list, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def trial_index(schedule_pos: int, t: int) -> int:
    return (schedule_pos << TRIAL_STRIDE_BITS) + t


def _build(spec: EnsembleSpec, dims: DimensionTriple, seed: int, index: int):
    X, Y = realize(spec, dims, seed, index)
    return X, Y, hadamard_covariance(X, Y, spec)


def _sample(spec: EnsembleSpec, dims: DimensionTriple, seed: int, index: int) -> SpectralSample:
    _, _, M = _build(spec, dims, seed, index)
    return eigenvalues(M, dims=dims, seed=index)


def trial_moments(spec: EnsembleSpec, dims: DimensionTriple, seed: int, index: int, k_max: int) -> list[float]:
    """Empirical moments ``m_1 .. m_kmax`` of one realization.

    ``m_1 = Tr M / n`` and ``m_2 = ||M||_F^2 / n`` come from the trace
    identities (exact for the diagonal structure, no eigensolve); higher
    orders come from the eigenvalues.
    """
    _, _, M = _build(spec, dims, seed, index)
    a = M.entries
    n = dims.n
    out = [math.fsum(np.diag(a).tolist()) / n]
    if k_max >= 2:
        out.append(math.fsum(np.einsum("ij,ij->i", a, a).tolist()) / n)
    if k_max >= 3:
        sample = eigenvalues(M, dims=dims, seed=index)
        out.extend(empirical_moment(sample, k) for k in range(3, k_max + 1))
    return out


def _is_degenerate(stats: dict) -> bool:
    return stats["variance"] <= (64 * np.finfo(float).eps * abs(stats["mean"])) ** 2


def _unit_rademacher(spec: EnsembleSpec) -> bool:
    dx, dy = spec.dist_x, spec.dist_y
    return (
        dx.family == dy.family == "rademacher"
        and (spec.normalize or (dx.scale == 1.0 and dy.scale == 1.0))
    )


def _near_zero_fraction(lam: np.ndarray, gamma: float) -> float:
    thr = ZERO_THRESHOLD * MPLaw(gamma).edge_high
    return float(np.count_nonzero(np.abs(lam) <= thr)) / len(lam)


def _timing(**counters) -> dict:
    # wall-clock times go to the run log only, so report files stay byte-identical
    return {"wall_clock": "see run.log", **counters}


# -- studies ---------------------------------------------------------------------------


def run_simulate(config: StudyConfig) -> StudyReport:
    """One realization: eigenvalues, histogram with MP overlay, distances to MP."""
    t0 = time.perf_counter()
    dims = config.schedule()[0]
    check_memory(DimensionSchedule(0, 0, (dims,)), 1, config.mem_cap_gb)
    sample = _sample(config.ensemble, dims, config.master_seed, 0)
    g = dims.realized_gamma
    law = MPLaw(g)
    hist = histogram(sample, config.bins)
    F = EmpiricalCDF(sample.eigenvalues)
    lev = levy_distance(F, law, config.levy_tol)
    ks = ks_distance(F, law)
    lam = sample.eigenvalues
    near_zero = int(np.count_nonzero(np.abs(lam) <= ZERO_THRESHOLD * law.edge_high))
    mids = hist.midpoints
    rows = [
        {
            "bin_left": float(hist.edges[j]),
            "bin_right": float(hist.edges[j + 1]),
            "empirical_density": float(hist.density[j]),
            "mp_density": float(density(mids[j], law)),
        }
        for j in range(len(mids))
    ]
    results = {
        "dims": dims.as_dict(),
        "mp": {"gamma": g, "edge_low": law.edge_low, "edge_high": law.edge_high, "atom_mass": law.atom_mass},
        "levy_distance": lev.value,
        "levy_tolerance": lev.tolerance,
        "ks_distance": ks.value,
        "near_zero_count": near_zero,
        "near_zero_fraction": near_zero / dims.n,
        "negative_count": int(np.count_nonzero(lam < -ZERO_THRESHOLD * law.edge_high)),
        "trace_check": {"sum_eigenvalues": math.fsum(lam.tolist()), "trace": sample.trace},
        "histogram": {"underflow": hist.underflow, "overflow": hist.overflow, "rows": rows},
    }
    wall = time.perf_counter() - t0
    log.info(
        "simulate n=%d d=%d p=%d gamma=%.6f: Levy distance to MP = %.6g (KS %.6g), %.2fs",
        dims.n, dims.d, dims.p, g, lev.value, ks.value, wall,
    )
    tables = {"eigenvalues": [{"eigenvalue": float(x)} for x in lam], "histogram": rows}
    return StudyReport(
        "simulate", config.echo(), results, _timing(eigendecompositions=1), wall_time=wall, tables=tables
    )


def run_moment_study(config: StudyConfig) -> StudyReport:
    """Mean empirical moments per n against the MP limit and the finite-n tree value."""
    t0 = time.perf_counter()
    if config.trials < 30:
        warnings.warn(f"moment study with only {config.trials} trials; at least 30 are recommended")
    schedule = config.schedule()
    check_memory(schedule, config.threads, config.mem_cap_gb, matrices=1)
    spec = config.ensemble
    rows = []
    per_n = []
    eig_count = 0
    for pos, dims in enumerate(schedule):
        idx = [trial_index(pos, t) for t in range(config.trials)]
        moms = _map_ordered(lambda i: trial_moments(spec, dims, config.master_seed, i, config.k_max), idx, config.threads)
        if config.k_max >= 3:
            eig_count += len(idx)
        moms = np.asarray(moms)
        oracle_ok = _unit_rademacher(spec) and (dims.n * dims.d * dims.p) ** config.k_max <= ORACLE_AUTO_LIMIT
        sx = 1.0 if spec.normalize else spec.dist_x.scale
        sy = 1.0 if spec.normalize else spec.dist_y.scale
        for k in range(1, config.k_max + 1):
            st = summarize(moms[:, k - 1])
            mp = mp_moment(k, dims.realized_gamma) * (sx * sy) ** (2 * k)
            tree = finite_n_tree_moment(k, dims.n, dims.d, dims.p, sx, sy)
            se = st["stderr"]
            row = {
                **dims.as_dict(),
                "k": k,
                **st,
                "mp_moment": mp,
                "tree_moment": tree,
                "gap_mp": abs(st["mean"] - mp),
                "gap_tree": abs(st["mean"] - tree),
                "z_mp": (st["mean"] - mp) / se if se > 0 else None,
                "z_tree": (st["mean"] - tree) / se if se > 0 else None,
            }
            if oracle_ok:
                exact = exact_moment_rademacher(k, dims.n, dims.d, dims.p)
                row["oracle_moment"] = str(exact)
                row["z_oracle"] = (st["mean"] - float(exact)) / se if se > 0 else None
            rows.append(row)
        per_n.append({"dims": dims.as_dict(), "per_trial": moms.tolist()})
    wall = time.perf_counter() - t0
    log.info("moment study: %d schedule points x %d trials in %.2fs", len(schedule), config.trials, wall)
    results = {"rows": rows, "per_trial": per_n}
    return StudyReport(
        "moments", config.echo(), results,
        _timing(trials=config.trials * len(schedule), eigendecompositions=eig_count), wall_time=wall,
        tables={"moments": rows},
    )


def run_variance_study(config: StudyConfig) -> StudyReport:
    """Sample variance of each empirical moment per n and its log-log slope."""
    t0 = time.perf_counter()
    schedule = config.schedule()
    if len(schedule) < 4:
        warnings.warn("variance fits need at least 4 values of n")
    if config.trials < 100:
        warnings.warn(f"variance study with only {config.trials} trials; at least 100 are recommended")
    check_memory(schedule, config.threads, config.mem_cap_gb, matrices=1)
    spec = config.ensemble
    stats_by_k: dict[int, list] = {k: [] for k in range(1, config.k_max + 1)}
    for pos, dims in enumerate(schedule):
        idx = [trial_index(pos, t) for t in range(config.trials)]
        moms = np.asarray(
            _map_ordered(lambda i: trial_moments(spec, dims, config.master_seed, i, config.k_max), idx, config.threads)
        )
        for k in stats_by_k:
            stats_by_k[k].append({**dims.as_dict(), "k": k, **summarize(moms[:, k - 1])})
    rows, fits, excluded = [], [], []
    lo, hi = config.slope_band
    for k, per_n in stats_by_k.items():
        for prev, cur in zip([None] + per_n[:-1], per_n):
            ratio = None
            if prev is not None and cur["variance"] > 0:
                ratio = prev["variance"] / cur["variance"]
            rows.append({**cur, "ratio_to_previous": ratio})
        if any(_is_degenerate(s) for s in per_n):
            excluded.append({"k": k, "note": "zero variance across trials (degenerate moment); no fit"})
            continue
        if len(per_n) < 2:
            excluded.append({"k": k, "note": "fewer than two values of n; no fit"})
            continue
        fit = fit_loglog([s["n"] for s in per_n], [s["variance"] for s in per_n])
        fits.append({"k": k, **fit, "band_low": lo, "band_high": hi, "within_band": lo <= fit["slope"] <= hi})
    wall = time.perf_counter() - t0
    for f in fits:
        log.info("variance fit k=%d: slope %.4f +/- %.4f", f["k"], f["slope"], f["slope_se"])
    log.info("variance study done in %.2fs", wall)
    results = {"rows": rows, "fits": fits, "excluded": excluded}
    return StudyReport(
        "variance", config.echo(), results,
        _timing(trials=config.trials * len(schedule)), wall_time=wall,
        tables={"variance": rows, "variance_fit": fits},
    )


def truncated_pair(spec: EnsembleSpec, dims: DimensionTriple, seed: int, index: int, c_values, both: bool):
    """Eigenvalues of ``M`` and of the truncated/centered ``M_hat`` for each c."""
    X, Y, M = _build(spec, dims, seed, index)
    base = eigenvalues(M, dims=dims, seed=index)
    out = []
    for c in c_values:
        Xt = truncate_center(X, c, spec.dist_x)
        Yt = truncate_center(Y, c, spec.dist_y) if both else Y
        if np.array_equal(Xt.entries, X.entries) and np.array_equal(Yt.entries, Y.entries):
            out.append(base)
            continue
        out.append(eigenvalues(hadamard_covariance(Xt, Yt, spec), dims=dims, seed=index))
    return base, out


def run_truncation_study(config: StudyConfig) -> StudyReport:
    """Mean cubed Lévy distance between the spectra of ``M`` and its truncation."""
    t0 = time.perf_counter()
    schedule = config.schedule()
    check_memory(schedule, config.threads, config.mem_cap_gb, matrices=2)
    spec = config.ensemble
    both = config.truncate == "both"
    rows = []
    per_trial = []
    for pos, dims in enumerate(schedule):
        idx = [trial_index(pos, t) for t in range(config.trials)]

        def one(i):
            base, truncs = truncated_pair(spec, dims, config.master_seed, i, config.c_values, both)
            F = EmpiricalCDF(base.eigenvalues)
            return [levy_distance(F, StepCDF(EmpiricalCDF(s.eigenvalues)), config.levy_tol).value for s in truncs]

        L = np.asarray(_map_ordered(one, idx, config.threads))
        for j, c in enumerate(config.c_values):
            st = summarize(L[:, j] ** 3)
            rows.append({**dims.as_dict(), "c": c, **st, "mean_levy": float(L[:, j].mean())})
        per_trial.append({"dims": dims.as_dict(), "levy": L.tolist()})
    wall = time.perf_counter() - t0
    log.info("truncation study done in %.2fs", wall)
    results = {"rows": rows, "per_trial": per_trial, "truncate": config.truncate}
    return StudyReport(
        "truncation", config.echo(), results,
        _timing(trials=config.trials * len(schedule)), wall_time=wall,
        tables={"truncation": rows},
    )


def run_convergence_study(config: StudyConfig) -> StudyReport:
    """Mean Lévy (and KS) distance to MP at the realized gamma, per n."""
    t0 = time.perf_counter()
    schedule = config.schedule()
    check_memory(schedule, config.threads, config.mem_cap_gb, matrices=2)
    spec = config.ensemble
    rows, per_trial = [], []
    for pos, dims in enumerate(schedule):
        g = dims.realized_gamma
        law = MPLaw(g)
        idx = [trial_index(pos, t) for t in range(config.trials)]

        def one(i):
            t1 = time.perf_counter()
            s = _sample(spec, dims, config.master_seed, i)
            F = EmpiricalCDF(s.eigenvalues)
            res = (
                levy_distance(F, law, config.levy_tol).value,
                ks_distance(F, law).value,
                _near_zero_fraction(s.eigenvalues, g),
            )
            log.debug("trial %d (n=%d) %.2fs", i, dims.n, time.perf_counter() - t1)
            return res

        t_n = time.perf_counter()
        vals = np.asarray(_map_ordered(one, idx, config.threads))
        log.info("convergence n=%d: %d trials in %.2fs", dims.n, len(idx), time.perf_counter() - t_n)
        lev = summarize(vals[:, 0])
        rows.append(
            {
                **dims.as_dict(),
                "trials": lev["trials"],
                "levy_mean": lev["mean"],
                "levy_stderr": lev["stderr"],
                "ks_mean": float(vals[:, 1].mean()),
                "near_zero_fraction": float(vals[:, 2].mean()),
                "atom_mass": law.atom_mass,
            }
        )
        per_trial.append({"dims": dims.as_dict(), "levy": vals[:, 0].tolist(), "ks": vals[:, 1].tolist()})
    trend = [
        {"from_n": a["n"], "to_n": b["n"], "decreased": b["levy_mean"] < a["levy_mean"]}
        for a, b in zip(rows, rows[1:])
    ]
    wall = time.perf_counter() - t0
    results = {"rows": rows, "trend": trend, "per_trial": per_trial}
    return StudyReport(
        "convergence", config.echo(), results,
        _timing(trials=config.trials * len(schedule), eigendecompositions=config.trials * len(schedule)),
        wall_time=wall,
        tables={"convergence": rows},
    )


def run_oracle(config: StudyConfig) -> StudyReport:
    """Exact golden tables: Rademacher moments, double-tree masses, shape counts."""
    t0 = time.perf_counter()
    k_max = config.k_max
    if config.dims is not None:
        grid = [(config.dims.n, config.dims.d, config.dims.p)]
    else:
        grid = [(n, d, p) for n in range(1, 4) for d in range(1, 4) for p in range(1, 4)]
    for n, d, p in grid:
        cost = (n * d * p) ** k_max
        if cost > MAX_TUPLES:
            raise ResourceGuardError(
                f"oracle at k={k_max}, dims=({n},{d},{p}) needs {cost:.3e} tuples (guard {MAX_TUPLES:.0e})",
                estimate=float(cost),
            )
    moments = golden_rows(range(1, k_max + 1), grid)
    shapes = []
    for k in range(1, k_max + 1):
        for sc in tree_shapes(k):
            shapes.append({"k": sc.k, "s": sc.s, "count": sc.count})
    catalans = [
        {"k": k, "catalan": catalan(k), "shape_sum": sum(s.count for s in tree_shapes(k))}
        for k in range(1, k_max + 1)
    ]
    classes = []
    for k in range(1, k_max + 1):
        for n, d, p in grid:
            census = enumerate_contributing_walks(k, n, d, p)
            for cls, cnt in census.counts.items():
                classes.append({"k": k, "n": n, "d": d, "p": p, **cls._asdict(), "count": cnt})
    wall = time.perf_counter() - t0
    log.info("oracle tables (k <= %d, %d dimension triples) in %.2fs", k_max, len(grid), wall)
    results = {"moments": moments, "shapes": shapes, "catalan": catalans, "walk_classes": classes}
    tables = {"oracle_moments": moments, "oracle_shapes": shapes, "oracle_walk_classes": classes}
    return StudyReport("oracle", config.echo(), results, _timing(), wall_time=wall, tables=tables)


def mp_grid(law: MPLaw, points: int) -> np.ndarray:
    """Dyadic grid covering the support with ~``points`` nodes; integers are exact nodes."""
    a, b = law.edge_low, law.edge_high
    pad = 0.1 * (b - a)
    lo, hi = min(0.0, a) - pad, b + pad
    h = 2.0 ** math.floor(math.log2((hi - lo) / max(points, 1)))
    j0, j1 = math.floor(lo / h), math.ceil(hi / h)
    return np.arange(j0, j1 + 1) * h


def run_mp_eval(config: StudyConfig) -> StudyReport:
    """Tables of the MP density/CDF on a grid and of the limiting moments."""
    t0 = time.perf_counter()
    g = config.dims.realized_gamma if config.dims is not None else config.gamma
    law = MPLaw(g)
    xs = mp_grid(law, 4 * config.bins)
    cdfs = cdf_closed_form(xs, law)
    dens = density(xs, law)
    grid = [{"x": float(x), "density": float(f), "cdf": float(c)} for x, f, c in zip(xs, dens, cdfs)]
    moments = [{"k": k, "moment": mp_moment(k, g)} for k in range(1, config.k_max + 1)]
    results = {
        "gamma": g,
        "edge_low": law.edge_low,
        "edge_high": law.edge_high,
        "atom_mass": law.atom_mass,
        "grid": grid,
        "moments": moments,
    }
    wall = time.perf_counter() - t0
    tables = {"mp_density": grid, "mp_moments": moments}
    return StudyReport("mp-eval", config.echo(), results, _timing(), wall_time=wall, tables=tables)


RUNNERS = {
    "simulate": run_simulate,
    "moments": run_moment_study,
    "variance": run_variance_study,
    "truncation": run_truncation_study,
    "convergence": run_convergence_study,
    "oracle": run_oracle,
    "mp-eval": run_mp_eval,
}


def run_study(config: StudyConfig) -> StudyReport:
    return RUNNERS[config.kind](config)


def write_report(report: StudyReport, out_dir: Path, fmt: str = "json") -> list[Path]:
    """Persist a report; simulate always emits its eigenvalue/histogram CSVs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    csv_tables = report.tables if fmt == "csv" else {}
    if report.kind == "simulate":
        csv_tables = report.tables
    for name, rows in csv_tables.items():
        header = _header(rows)
        written.append(write_csv(out_dir / f"{name}.csv", header, rows))
    stem = report.kind.replace("-", "_")
    if fmt == "json":
        written.append(write_json(out_dir / f"{stem}.json", report.to_dict()))
    else:
        meta = [
            {"section": sec, "key": key, "value": dumps(val, indent=0).replace("\n", "")}
            for sec in ("config", "timing")
            for key, val in getattr(report, sec).items()
        ]
        meta.append({"section": "version", "key": "version", "value": report.version})
        written.append(write_csv(out_dir / f"{stem}_meta.csv", ["section", "key", "value"], meta))
    return written


def _header(rows: list[dict]) -> list[str]:
    header: list[str] = []
    for r in rows:
        for k in r:
            if k not in header:
                header.append(k)
    return header
