"""Counterexample search and parameter scans for the positivity of mean
matrices and their entrywise inverses."""
from dataclasses import asdict, dataclass, field
import csv
import io
import itertools
import json
import math

import numpy as np

from ._validation import ParameterError, check_spectrum
from .functions import MeanFunction, TX_THRESHOLD, parse_function
from .linalg import derive_rng, inverse_mean_matrix, mean_matrix, psd_check

__all__ = [
    "DEFAULT_SCAN_GRIDS",
    "ScanReport",
    "SearchSpec",
    "Witness",
    "find_negative_T",
    "scan_mean_matrix_positivity",
    "scan_positivity",
    "scan_two_sided",
    "verify_example6_g",
    "verify_lemma2_pointwise",
    "witness_criterion",
]

_CHUNK = 4096


def fmt(x):
    """Full-precision decimal (17 significant digits) for machine output."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


@dataclass
class SearchSpec:
    """Definition of a counterexample search over spectra of size ``n``."""

    fn: MeanFunction
    n: int = 3
    lam_range: tuple = (1e-3, 1.0)
    strategy: str = "hybrid"
    budget: int = 100_000
    seed: int = 0
    criterion: str = "min_eig"

    def __post_init__(self):
        self.fn = parse_function(self.fn)
        lo, hi = map(float, self.lam_range)
        if not 0 < lo < hi:
            raise ParameterError("lam_range must satisfy 0 < lo < hi")
        self.lam_range = (lo, hi)
        if self.n < 2:
            raise ParameterError("n must be >= 2")
        if self.budget < 1:
            raise ParameterError("budget must be >= 1")
        if self.strategy not in ("grid", "random", "hybrid"):
            raise ParameterError(f"unknown strategy {self.strategy!r}")
        if self.criterion not in ("min_eig", "determinant"):
            raise ParameterError(f"unknown criterion {self.criterion!r}")


@dataclass
class Witness:
    """A spectrum at which the inverse mean matrix fails to be PSD.

    ``lam`` is canonicalized to ascending order with largest entry 1 (the
    inverse mean matrix scales as ``T(c lam) = T(lam) / c``).
    """

    fn: str
    lam: np.ndarray
    criterion: str
    criterion_value: float
    vector: np.ndarray | None
    seed_trace: dict = field(default_factory=dict)

    def revalidate(self, rtol=1e-12):
        value = witness_criterion(self.fn, self.lam, self.criterion)
        return value < 0 and abs(value - self.criterion_value) <= rtol * abs(self.criterion_value)

    def to_dict(self):
        return {
            "fn": self.fn,
            "lam": [fmt(v) for v in self.lam],
            "criterion": self.criterion,
            "criterion_value": fmt(self.criterion_value),
            "vector": None if self.vector is None else [fmt(float(np.real(v))) for v in self.vector],
            "seed_trace": self.seed_trace,
        }

    def csv_row(self):
        return [self.fn, self.criterion, fmt(self.criterion_value), " ".join(fmt(v) for v in self.lam)]


def witness_criterion(fn, lam, criterion="min_eig"):
    """Criterion value at ``lam``: the smallest eigenvalue of ``T`` (Jacobi)
    or its determinant."""
    T = inverse_mean_matrix(fn, lam)
    if criterion == "determinant":
        return float(np.linalg.det(T))
    return psd_check(T).min_eig


def _batch_scores(fn, lam, criterion):
    # scale-free screening score; LAPACK batch eigensolver
    T = 1.0 / fn.mean(lam[:, :, None], lam[:, None, :])
    T = 0.5 * (T + np.swapaxes(T, 1, 2))
    if criterion == "determinant":
        diag = np.prod(np.diagonal(T, axis1=1, axis2=2), axis=1)
        return np.linalg.det(T) / diag
    w = np.linalg.eigvalsh(T)[:, 0]
    return w / np.max(np.sum(np.abs(T), axis=2), axis=1)


def _best(scores, pts):
    # lowest score; ties broken by lexicographic spectrum
    keys = tuple(pts[:, j] for j in reversed(range(pts.shape[1]))) + (scores,)
    return int(np.lexsort(keys)[0])


def find_negative_T(spec):
    """Search for a spectrum whose inverse mean matrix is not PSD.

    Spectra are canonicalized to ``(mu_1, ..., mu_(n-1), 1)`` with ``mu`` in
    ``[lo/hi, 1]``. ``grid`` spends the budget on a log-spaced grid,
    ``random`` on log-uniform samples, ``hybrid`` on a half-budget grid and
    then local Gaussian refinement (in log coordinates) around the best point.
    Candidates are screened in batches; the best one is confirmed with
    :func:`psd_check`. Returns a :class:`Witness` or ``None`` when the budget
    is exhausted without a confirmed failure.
    """
    fn, n, budget = spec.fn, spec.n, spec.budget
    log_lo = math.log(spec.lam_range[0] / spec.lam_range[1])
    dim = n - 1
    best_score, best_pt, best_trace = math.inf, None, {}
    used = 0

    def consider(pts, phase, offset):
        nonlocal best_score, best_pt, best_trace
        lam = np.concatenate([np.exp(pts), np.ones((pts.shape[0], 1))], axis=1)
        scores = _batch_scores(fn, lam, spec.criterion)
        i = _best(scores, pts)
        if scores[i] < best_score:
            best_score, best_pt = float(scores[i]), pts[i].copy()
            best_trace = {"phase": phase, "index": offset + i}

    if spec.strategy in ("grid", "hybrid"):
        grid_budget = budget if spec.strategy == "grid" else budget // 2
        per_axis = max(2, int(math.floor(grid_budget ** (1.0 / dim))))
        axis = np.linspace(log_lo, 0.0, per_axis)
        cells = itertools.product(axis, repeat=dim)
        total = min(per_axis**dim, budget)
        while used < total:
            chunk = np.array(list(itertools.islice(cells, min(_CHUNK, total - used))))
            consider(chunk, "grid", used)
            used += len(chunk)
    rng = derive_rng(spec.seed, n, budget)
    if spec.strategy == "random":
        while used < budget:
            m = min(_CHUNK, budget - used)
            consider(rng.uniform(log_lo, 0.0, (m, dim)), "random", used)
            used += m
    elif spec.strategy == "hybrid":
        sigma = abs(log_lo) / 8 or 1.0
        while used < budget:
            m = min(_CHUNK // 4, budget - used)
            pts = np.clip(best_pt + sigma * rng.standard_normal((m, dim)), log_lo, 0.0)
            before = best_score
            consider(pts, "refine", used)
            used += m
            if best_score >= before:
                sigma = max(sigma * 0.5, 1e-9)
    lam = np.sort(np.append(np.exp(best_pt), 1.0))
    rep = psd_check(inverse_mean_matrix(fn, lam))
    if rep.is_psd:
        return None
    value = witness_criterion(fn, lam, spec.criterion)
    if value >= 0:
        return None
    trace = {"seed": spec.seed, "strategy": spec.strategy, "evaluations": used, **best_trace}
    return Witness(str(fn), lam, spec.criterion, value, rep.witness, trace)


@dataclass
class ScanReport:
    """Per-parameter outcome of a positivity scan."""

    family: str
    matrix: str
    n: int
    spectra_per_point: int
    seed: int
    rows: list

    COLUMNS = ("fn", "param", "matrix", "n", "spectra", "worst_min_eig", "norm_inf", "rel_min_eig", "claimed", "psd", "violation", "worst_lam")

    @property
    def violations(self):
        return [r for r in self.rows if r["violation"]]

    @property
    def findings(self):
        """Parameters outside the claimed range where positivity fails."""
        return [r for r in self.rows if not r["claimed"] and not r["psd"]]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for r in self.rows:
            w.writerow([fmt(r[c]) if c != "worst_lam" else " ".join(fmt(v) for v in r[c]) for c in self.COLUMNS])
        return buf.getvalue()

    def to_json(self):
        rows = [{c: (r[c] if c != "worst_lam" else list(r[c])) for c in self.COLUMNS} for r in self.rows]
        return json.dumps({**{k: v for k, v in asdict(self).items() if k != "rows"}, "rows": rows}, default=float)


def _sample_spectra(n, count, seed, lo=1e-2, hi=1e2):
    return [np.exp(derive_rng(seed, n, j).uniform(math.log(lo), math.log(hi), n)) for j in range(count)]


def _X_claimed(fn):
    return fn.family == "geometric" or (fn.family == "hansen" and fn.param >= 0.5)


def _scan_point(fn, spectra, which, rel_tol):
    worst = None
    for lam in spectra:
        M = inverse_mean_matrix(fn, lam) if which == "T" else mean_matrix(fn, lam)
        rep = psd_check(M, rel_tol)
        norm = float(np.max(np.sum(np.abs(M), axis=1)))
        rel = rep.min_eig / max(1.0, norm)
        if worst is None or rel < worst[2]:
            worst = (rep, norm, rel, lam)
    rep, norm, rel, lam = worst
    claimed = fn.positive_T_claimed if which == "T" else _X_claimed(fn)
    psd = bool(rep.is_psd)
    return {
        "fn": str(fn),
        "param": fn.param if fn.param is not None else float("nan"),
        "matrix": which,
        "n": len(lam),
        "spectra": len(spectra),
        "worst_min_eig": rep.min_eig,
        "norm_inf": norm,
        "rel_min_eig": rel,
        "claimed": claimed,
        "psd": psd,
        "violation": bool(claimed and not psd),
        "worst_lam": tuple(float(v) for v in lam),
    }


# default parameter grids over the ranges where positivity of T is asserted
DEFAULT_SCAN_GRIDS = {
    "hansen": np.linspace(0.0, 0.5, 21),
    "wyd_efek": np.linspace(0.0, 1.0, 23)[1:-1],
    "power_difference": np.linspace(0.5, 2.0, 21),
    "stolarsky": np.linspace(-1.0, 2.0, 21),
    "binomial": np.linspace(-1.0, 1.0, 21),
    "heinz": np.linspace(0.0, 1.0, 21),
}


def _scan(which, family, param_grid, n, spectra_per_point, seed, rel_tol, jobs):
    if param_grid is None and family in DEFAULT_SCAN_GRIDS:
        param_grid = DEFAULT_SCAN_GRIDS[family]
    if param_grid is None or len(param_grid) == 0:
        fns = [parse_function(family)]
    else:
        fns = [MeanFunction(family, float(p)) for p in param_grid]
    spectra = _sample_spectra(n, spectra_per_point, seed)
    args = [(fn, spectra, which, rel_tol) for fn in fns]
    if jobs and jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(_scan_point, *zip(*args)))
    else:
        rows = [_scan_point(*a) for a in args]
    return ScanReport(family, which, n, spectra_per_point, seed, rows)


def scan_positivity(family, param_grid=None, n=6, spectra_per_point=50, seed=0, rel_tol=1e-10, jobs=1):
    """Worst relative minimum eigenvalue of the inverse mean matrix ``T`` per
    parameter, over log-uniform spectra on ``[1e-2, 1e2]``.

    A row is a violation when positivity is asserted for that member
    (:attr:`MeanFunction.positive_T_claimed`) and
    ``min_eig < -rel_tol * max(1, ||T||_inf)`` for some sampled spectrum.
    Failures outside the asserted range are recorded, not flagged.
    """
    return _scan("T", family, param_grid, n, spectra_per_point, seed, rel_tol, jobs)


def scan_mean_matrix_positivity(family, param_grid=None, n=6, spectra_per_point=50, seed=0, rel_tol=1e-10, jobs=1):
    """As :func:`scan_positivity`, for the mean matrix ``X`` itself."""
    return _scan("X", family, param_grid, n, spectra_per_point, seed, rel_tol, jobs)


def scan_two_sided(fns, n=4, spectra=20, seed=0, rel_tol=1e-10):
    """For each function: whether ``T`` (so the inverse map) and ``X`` (so
    ``J`` itself) stayed PSD over the sampled spectra."""
    out = []
    samples = _sample_spectra(n, spectra, seed)
    for fn in map(parse_function, fns):
        t_ok = all(psd_check(inverse_mean_matrix(fn, lam), rel_tol).is_psd for lam in samples)
        x_ok = all(psd_check(mean_matrix(fn, lam), rel_tol).is_psd for lam in samples)
        out.append({"fn": str(fn), "beta_cp": t_ok, "J_cp": x_ok})
    return out


def verify_lemma2_pointwise(t_grid, x_grid, tol=1e-12):
    """Check ``f_t(x) >= sqrt(x)`` for ``wyd_efek:t`` together with the
    intermediate bound ``t (x-1)/(x^t-1) >= x^((1-t)/2)`` on a grid.

    Returns a dict with violation counts and the smallest relative slack of
    each inequality.
    """
    from scipy.special import exprel

    x = check_spectrum(x_grid)
    L = np.log(x)
    final_worst, inter_worst = math.inf, math.inf
    final_bad = inter_bad = 0
    for t in t_grid:
        if not 0 < t < 1:
            raise ParameterError("t must lie in (0, 1)")
        f = np.asarray(MeanFunction("wyd_efek", t)(x))
        s = np.sqrt(x)
        slack = (f - s) / s
        lhs = exprel(L) / exprel(t * L)
        rhs = x ** ((1.0 - t) / 2.0)
        islack = (lhs - rhs) / rhs
        final_bad += int(np.sum(slack < -tol))
        inter_bad += int(np.sum(islack < -tol))
        final_worst = min(final_worst, float(slack.min()))
        inter_worst = min(inter_worst, float(islack.min()))
    return {
        "final_violations": final_bad,
        "intermediate_violations": inter_bad,
        "final_min_slack": final_worst,
        "intermediate_min_slack": inter_worst,
    }


def example6_g(lam, t):
    """``g(t) = sinh(lam t) sinh(lam (t-1)) - lam t (t-1) sinh(lam)``."""
    t = np.asarray(t, dtype=float)
    return np.sinh(lam * t) * np.sinh(lam * (t - 1.0)) - lam * t * (t - 1.0) * np.sinh(lam)


def verify_example6_g(lam_grid, t_grid, tol=1e-12):
    """Check ``g >= 0`` on the grid and ``g(0) = g(1) = 0``.

    Tolerances are relative to ``|sinh(lam t) sinh(lam (t-1))| +
    |lam t (t-1) sinh(lam)|``. Also reports ``g(1/2)`` next to its closed
    form ``(lam/4) sinh(lam) - sinh(lam/2)^2``.
    """
    t = np.asarray(t_grid, dtype=float)
    worst, bad, endpoint = math.inf, 0, 0.0
    halves = []
    for lam in lam_grid:
        if lam == 0:
            raise ParameterError("lam must be nonzero")
        g = example6_g(lam, t)
        scale = np.abs(np.sinh(lam * t) * np.sinh(lam * (t - 1.0))) + np.abs(lam * t * (t - 1.0) * np.sinh(lam))
        rel = g / np.maximum(1.0, scale)
        bad += int(np.sum(rel < -tol))
        worst = min(worst, float(rel.min()))
        endpoint = max(endpoint, float(abs(example6_g(lam, 0.0))), float(abs(example6_g(lam, 1.0))))
        halves.append((float(example6_g(lam, 0.5)), float(0.25 * lam * np.sinh(lam) - np.sinh(0.5 * lam) ** 2)))
    return {"violations": bad, "min_rel_value": worst, "endpoint_max": endpoint, "g_half": halves}


TX_SCAN_RANGE = (TX_THRESHOLD, 1.0)
