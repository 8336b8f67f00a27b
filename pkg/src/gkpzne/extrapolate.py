"""Energy schedules and power-law extrapolation to the infinite-energy limit.

The model is y(n) = L + c n^(-p), fit by Levenberg-damped Gauss-Newton with
an analytic Jacobian. Uniform weighting throughout (recorded in exports).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import FitError, ScheduleError

P_BOUNDS = (1e-3, 10.0)
MAX_ITER = 500
STEP_TOL = 1e-12


@dataclass(frozen=True)
class EnergySchedule:
    """Arithmetic ladder n_j = n0 - j * dn, j = 0..K-1."""

    points: tuple
    n0: float
    dn: float
    K: int

    def __iter__(self):
        return iter(self.points)


def build_schedule(n0: float, dn: float, K: int) -> EnergySchedule:
    if dn <= 0:
        raise ScheduleError(f"step must be positive, got {dn}")
    if K < 1:
        raise ScheduleError(f"need at least one point, got K={K}")
    points = tuple(float(n0 - j * dn) for j in range(K))
    if points[-1] < 0.5:
        raise ScheduleError(f"schedule underflows 0.5 (last point {points[-1]})")
    return EnergySchedule(points=points, n0=float(n0), dn=float(dn), K=int(K))


@dataclass
class FitResult:
    L: float
    c: float
    p: float
    rss: float
    converged: bool
    residuals: list = field(default_factory=list)   # (n, y - model)
    se_L: float | None = None
    se_p: float | None = None

    def model(self, n):
        return self.L + self.c * np.asarray(n, dtype=float) ** (-self.p)


def _clamp_p(p: float) -> float:
    return min(max(p, P_BOUNDS[0]), P_BOUNDS[1])


def _initial_guess(ns: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """L0 = y at the largest n; (c0, p0) from a log-log line on |y - L0|."""
    L0 = float(ys[np.argmax(ns)])
    d = ys - L0
    mask = np.abs(d) > 1e-12
    if int(mask.sum()) >= 2:
        sgn = float(np.sign(np.median(d[mask])))
        if sgn == 0.0:
            sgn = 1.0
        slope, icpt = np.polyfit(np.log(ns[mask]), np.log(np.abs(d[mask])), 1)
        return np.array([L0, sgn * float(np.exp(icpt)), _clamp_p(-float(slope))])
    return np.array([L0, float(ys.min() - L0), 1.0])


def fit_power_law(ns, ys) -> FitResult:
    """Least-squares fit of y = L + c n^(-p) by damped Gauss-Newton.

    Needs at least 4 points over at least 4 distinct n values (duplicates
    from bootstrap resampling act as weights). converged is False when the
    iteration cap is hit, the damped step stalls, or p finishes pinned at a
    bound (the clamp blocked the descent direction).
    """
    ns = np.asarray(ns, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if ns.shape != ys.shape or ns.ndim != 1:
        raise FitError("ns and ys must be 1-d arrays of equal length")
    if ns.size < 4 or np.unique(ns).size < 4:
        raise FitError(f"need >= 4 points over distinct n, got {np.unique(ns).size}")
    if np.any(ns <= 0):
        raise FitError("energies must be positive")

    theta = _initial_guess(ns, ys)

    def residual(t):
        return ys - (t[0] + t[1] * ns ** (-t[2]))

    r = residual(theta)
    rss = float(r @ r)
    lam = 1e-3
    converged = False
    for _ in range(MAX_ITER):
        L, c, p = theta
        npw = ns ** (-p)
        J = np.stack([np.ones_like(ns), npw, -c * np.log(ns) * npw], axis=1)
        g = J.T @ r
        A = J.T @ J
        stepped = False
        for _ in range(60):
            M = A + lam * np.diag(np.maximum(np.diag(A), 1e-30))
            try:
                step = np.linalg.solve(M, g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = theta + step
            trial[2] = _clamp_p(trial[2])
            r_trial = residual(trial)
            rss_trial = float(r_trial @ r_trial)
            if rss_trial <= rss * (1.0 + 1e-14) + 1e-300:
                stepped = True
                break
            lam *= 10.0
        if not stepped:
            break
        rel = float(np.max(np.abs(trial - theta) / np.maximum(np.abs(theta), 1e-12)))
        theta, r, rss = trial, r_trial, rss_trial
        lam = max(lam / 3.0, 1e-14)
        if rel < STEP_TOL:
            converged = True
            break
    L, c, p = (float(v) for v in theta)
    pinned = (p <= P_BOUNDS[0] * (1 + 1e-9)) or (p >= P_BOUNDS[1] * (1 - 1e-9))
    res = [(float(n), float(e)) for n, e in zip(ns, residual(theta))]
    return FitResult(L=L, c=c, p=p, rss=float(rss), converged=converged and not pinned,
                     residuals=res)


@dataclass(frozen=True)
class BootstrapResult:
    se_L: float
    se_p: float
    B: int
    seed: int
    failures: int
    unstable: bool


def bootstrap_se(ns, ys, fit: FitResult, B: int = 1000, seed: int = 0) -> BootstrapResult:
    """Nonparametric bootstrap standard errors for (L, p).

    Resample index b uses the generator seeded with seed + b, so resamples
    can be evaluated concurrently and the aggregate is order-independent.
    Failed refits (degenerate resamples, non-convergence) are dropped and
    counted; more than 20% failures flags the result unstable.
    """
    if B < 100:
        raise ValueError(f"need B >= 100 resamples, got {B}")
    if not fit.converged:
        raise FitError("bootstrap requires a converged base fit")
    ns = np.asarray(ns, dtype=float)
    ys = np.asarray(ys, dtype=float)
    Ls, ps = [], []
    failures = 0
    for b in range(B):
        rng = np.random.default_rng(seed + b)
        idx = rng.integers(0, ns.size, ns.size)
        try:
            rb = fit_power_law(ns[idx], ys[idx])
        except FitError:
            failures += 1
            continue
        if not rb.converged:
            failures += 1
            continue
        Ls.append(rb.L)
        ps.append(rb.p)
    if not Ls:
        raise FitError("every bootstrap refit failed")
    return BootstrapResult(
        se_L=float(np.std(Ls)),
        se_p=float(np.std(ps)),
        B=B,
        seed=int(seed),
        failures=failures,
        unstable=failures > 0.2 * B,
    )


@dataclass(frozen=True)
class ResidualDiagnostic:
    points: list          # (log n, log |y - L|)
    slope: float
    r_squared: float
    excluded: int


def residual_diagnostic(ns, ys, fit: FitResult) -> ResidualDiagnostic:
    """log|y - L| against log n; slope should approximate -p for a good fit."""
    if not fit.converged:
        raise FitError("residual diagnostic requires a converged fit")
    ns = np.asarray(ns, dtype=float)
    ys = np.asarray(ys, dtype=float)
    d = np.abs(ys - fit.L)
    mask = d > 1e-15
    excluded = int((~mask).sum())
    if int(mask.sum()) < 2:
        raise FitError("all residuals below the exclusion threshold")
    lx = np.log(ns[mask])
    ly = np.log(d[mask])
    slope, icpt = np.polyfit(lx, ly, 1)
    pred = slope * lx + icpt
    sst = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum((ly - pred) ** 2)) / sst if sst > 0 else 1.0
    pts = list(zip(lx.tolist(), ly.tolist()))
    return ResidualDiagnostic(points=pts, slope=float(slope), r_squared=float(r2),
                              excluded=excluded)


@dataclass(frozen=True)
class ParityResult:
    curve: list                 # (n_cut, L(n_cut))
    parity_point: int | None    # None: parity not reached
    raw_benchmark: float
    mode: str


def parity_analysis(ns, ys, raw_benchmark: float, cutoffs, mode: str = "absolute",
                    ideal: float = 0.0) -> ParityResult:
    """Truncated-ladder extrapolations against the unmitigated benchmark.

    For each cutoff, fit only points with n <= n_cut (skipped when fewer than
    4 distinct points remain). The parity point is the smallest cutoff whose
    extrapolated value matches the benchmark: |L| <= |raw| in "absolute" mode
    (error metrics), |L - ideal| <= |raw - ideal| in "distance" mode.
    """
    if mode not in ("absolute", "distance"):
        raise ValueError(f"unknown comparison mode {mode!r}")
    ns = np.asarray(ns, dtype=float)
    ys = np.asarray(ys, dtype=float)
    curve = []
    parity = None
    for n_cut in sorted(cutoffs):
        m = ns <= n_cut
        if np.unique(ns[m]).size < 4:
            continue
        fit = fit_power_law(ns[m], ys[m])
        curve.append((n_cut, fit.L))
        if mode == "absolute":
            ok = abs(fit.L) <= abs(raw_benchmark)
        else:
            ok = abs(fit.L - ideal) <= abs(raw_benchmark - ideal)
        if ok and parity is None:
            parity = int(n_cut)
    return ParityResult(curve=curve, parity_point=parity,
                        raw_benchmark=float(raw_benchmark), mode=mode)


def asymptotic_infidelity(gamma: float, d_L: int = 2, radius: int = 5):
    """Dual-lattice bound on the infinite-energy infidelity, and its leading term.

    The square-lattice dual has shortest nonzero norm-squared 1/d_L, so the
    bound is (1/4) sum_{v != 0} exp[-pi ((1-gamma)/gamma) |v|^2] over the
    scaled integer lattice, truncated at the given radius; the four shortest
    vectors give the leading term exp[-(pi/d_L)(1-gamma)/gamma].
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    if radius < 3:
        raise ValueError(f"radius must be >= 3, got {radius}")
    coef = np.pi * (1.0 - gamma) / gamma / d_L
    j = np.arange(-radius, radius + 1)
    jj, kk = np.meshgrid(j, j, indexing="ij")
    r2 = (jj * jj + kk * kk).astype(float)
    r2[radius, radius] = np.inf  # exclude the origin
    bound = 0.25 * float(np.sum(np.exp(-coef * r2)))
    leading = float(np.exp(-coef))
    return bound, leading
