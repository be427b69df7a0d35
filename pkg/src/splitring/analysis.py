"""Resonance finding, splitting/asymmetry metrics, coupling-design
optimization, generic parameter sweeps, and least-squares spectrum fitting.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize

from .errors import InvalidParamError, NoResonanceFoundError
from .herald import SfwmParams, heralding_report, herald_arrays, peak_herald_wavelength
from .response import BusInput, default_lambda_grid, sweep_arrays
from .ring import Ordering, RingParams, free_spectral_range, resonance_wavelength
from .search import golden_max, golden_min, worker_count
from .tableio import Table, read_table

FLATNESS_TOL = 1e-6          # spectra varying less than this hold no resonance
RESONANCE_REFINE_TOL = 1e-15  # golden-section wavelength refinement, meters
COUPLING_REFINE_TOL = 1e-6    # golden-section refinement of t
FIT_FREE_PARAMS = ("t", "alpha", "xi", "zeta", "n_e", "tau")
FIT_BOUNDS = {
    "t": (0.0, 1.0), "alpha": (0.0, 1.0), "xi": (0.0, 1.0),
    "zeta": (-math.pi, math.pi), "tau": (-math.pi, math.pi), "n_e": (0.2, 10.0),
}
SWEEP_AXES = ("t", "alpha", "xi", "zeta", "lambda")
SWEEP_METRICS = ("transmission", "eta", "j_herald_reduced", "j_hm_reduced",
                 "m_param", "splitting")


class Objective(Enum):
    HERALD_RATE = "HeraldRate"
    HERALD_MODE = "HeraldMode"
    EFFICIENCY = "Efficiency"


@dataclass(frozen=True)
class ResonanceInfo:
    """One (possibly split) transmission resonance."""

    center_lambda: float
    minima_lambdas: tuple[float, ...]
    splitting: float
    depth_fwd: tuple[float, ...]
    asymmetry: float | None


@dataclass(frozen=True)
class MeasuredSpectrum:
    """Measured (or synthetic) normalized transmission rows."""

    lambdas: NDArray
    powers: NDArray

    def __post_init__(self) -> None:
        lam = np.asarray(self.lambdas, dtype=float)
        pwr = np.asarray(self.powers, dtype=float)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "powers", pwr)
        if lam.ndim != 1 or pwr.shape != lam.shape or lam.size == 0:
            raise InvalidParamError("spectrum needs matching 1-D wavelength/power columns")
        if not (np.isfinite(lam).all() and np.isfinite(pwr).all()):
            raise InvalidParamError("spectrum contains non-finite values")
        if lam.size > 1 and not np.all(np.diff(lam) > 0):
            raise InvalidParamError("spectrum wavelengths must be strictly ascending")

    @classmethod
    def from_csv(cls, path: str | Path) -> "MeasuredSpectrum":
        table = read_table(path)
        for col in ("lambda_m", "power"):
            if col not in table.columns:
                raise InvalidParamError(f"{path}: missing column {col!r}")
        return cls(lambdas=table.column("lambda_m"), powers=table.column("power"))


@dataclass(frozen=True)
class FitResult:
    params: RingParams
    residual: float
    iterations: int
    converged: bool
    start_index: int = 0

    def as_text(self) -> str:
        """Key/value serialization of the fitted parameters and diagnostics."""
        p = self.params
        lines = [
            f"t = {p.t:.17g}", f"phi = {p.phi:.17g}", f"alpha = {p.alpha:.17g}",
            f"xi = {p.xi:.17g}", f"zeta = {p.zeta:.17g}", f"tau = {p.tau:.17g}",
            f"n_e = {p.n_e:.17g}", f"r = {p.r:.17g}",
            f"placement = {p.placement.value}",
            f"residual = {self.residual:.17g}",
            f"iterations = {self.iterations}",
            f"converged = {str(self.converged).lower()}",
        ]
        return "\n".join(lines) + "\n"


def _transmission_at(params: RingParams, ordering: Ordering, lam: float,
                     bus: BusInput) -> float:
    grid = np.array([float(lam)])
    return float(sweep_arrays(params, grid, bus, ordering)["T_fwd"][0])


def find_resonances(params: RingParams, lambda_window: tuple[float, float],
                    ordering: Ordering = Ordering.MID_RING,
                    bus: BusInput = BusInput(), points: int = 4001) -> list[ResonanceInfo]:
    """Locate transmission minima in the window and group them into (possibly
    split) resonances.

    Minima closer than a quarter of the free spectral range belong to one
    split resonance.  Raises NoResonanceFoundError for flat spectra.
    """
    lo, hi = float(lambda_window[0]), float(lambda_window[1])
    if not (0 < lo < hi):
        raise InvalidParamError("lambda window must satisfy 0 < lo < hi")
    if points < 16:
        raise InvalidParamError("resonance search needs at least 16 grid points")
    grid = np.linspace(lo, hi, points)
    t_fwd = sweep_arrays(params, grid, bus, ordering)["T_fwd"]
    finite = t_fwd[np.isfinite(t_fwd)]
    if finite.size == 0 or finite.max() - finite.min() < FLATNESS_TOL:
        raise NoResonanceFoundError(
            f"transmission varies by less than {FLATNESS_TOL:g} over the window"
        )

    minima: list[tuple[float, float]] = []
    for i in range(1, points - 1):
        a, m, b = t_fwd[i - 1], t_fwd[i], t_fwd[i + 1]
        if not (np.isfinite(a) and np.isfinite(m) and np.isfinite(b)):
            continue
        if m <= a and m <= b and (m < a or m < b):
            lam_i, t_i = golden_min(
                lambda x: _transmission_at(params, ordering, x, bus),
                float(grid[i - 1]), float(grid[i + 1]), tol=RESONANCE_REFINE_TOL,
            )
            minima.append((lam_i, t_i))
    if not minima:
        raise NoResonanceFoundError("no interior transmission minima in the window")

    minima.sort()
    step = grid[1] - grid[0]
    deduped: list[tuple[float, float]] = []
    for lam_i, t_i in minima:
        if deduped and abs(lam_i - deduped[-1][0]) < 0.5 * step:
            if t_i < deduped[-1][1]:
                deduped[-1] = (lam_i, t_i)
        else:
            deduped.append((lam_i, t_i))

    group_radius = free_spectral_range(0.5 * (lo + hi), params) / 4.0
    groups: list[list[tuple[float, float]]] = [[deduped[0]]]
    for lam_i, t_i in deduped[1:]:
        if lam_i - groups[-1][-1][0] < group_radius:
            groups[-1].append((lam_i, t_i))
        else:
            groups.append([(lam_i, t_i)])

    out = []
    for grp in groups:
        lams = tuple(g[0] for g in grp)
        depths = tuple(g[1] for g in grp)
        splitting = max(lams) - min(lams) if len(grp) > 1 else 0.0
        asym = None
        if len(grp) == 2:
            d1, d2 = depths
            asym = abs(d1 - d2) / (d1 + d2) if (d1 + d2) > 0 else 0.0
        out.append(ResonanceInfo(
            center_lambda=float(np.mean(lams)), minima_lambdas=lams,
            splitting=splitting, depth_fwd=depths, asymmetry=asym,
        ))
    return out


def _objective_value(params: RingParams, objective: Objective, ordering: Ordering,
                     sfwm: SfwmParams | None, bus: BusInput) -> float:
    lam = peak_herald_wavelength(params, bus, ordering)
    rep = heralding_report(params, lam, bus, sfwm, ordering)
    if objective is Objective.HERALD_RATE:
        return rep.j_herald / rep.beta**2
    if objective is Objective.HERALD_MODE:
        return rep.j_hm / rep.beta**2
    return rep.eta


def optimize_coupling(params: RingParams, objective: Objective,
                      t_range: tuple[float, float],
                      ordering: Ordering = Ordering.MID_RING,
                      sfwm: SfwmParams | None = None, bus: BusInput = BusInput(),
                      coarse_points: int = 201) -> tuple[float, float]:
    """Maximize a pair-generation objective over the coupling coefficient.

    Coarse grid scan plus golden-section refinement; among maxima equal to
    within tolerance the smallest t wins, so flat objectives return the lower
    range end.
    """
    lo, hi = float(t_range[0]), float(t_range[1])
    if not (0.0 < lo < hi <= 1.0):
        raise InvalidParamError("t range must satisfy 0 < lo < hi <= 1")
    if not isinstance(objective, Objective):
        raise InvalidParamError(f"objective must be an Objective, got {objective!r}")
    t_grid = np.linspace(lo, hi, coarse_points)
    last_error: Exception | None = None

    def value(t: float) -> float:
        nonlocal last_error
        try:
            return _objective_value(replace(params, t=float(t)), objective,
                                    ordering, sfwm, bus)
        except Exception as exc:
            last_error = exc
            return -math.inf

    if worker_count() > 1:
        with ThreadPoolExecutor(max_workers=min(worker_count(), 32)) as pool:
            values = np.array(list(pool.map(value, t_grid)))
    else:
        values = np.array([value(t) for t in t_grid])
    if not np.isfinite(values).any():
        raise last_error if last_error is not None else InvalidParamError(
            "objective failed at every grid point"
        )
    v_max = values[np.isfinite(values)].max()
    tie_tol = 1e-12 * max(1.0, abs(v_max))
    candidates = t_grid[values >= v_max - tie_tol]
    t_seed = float(candidates.min())
    step = t_grid[1] - t_grid[0]
    t_star, v_star = golden_max(value, max(lo, t_seed - step), min(hi, t_seed + step),
                                tol=COUPLING_REFINE_TOL)
    # Deterministic tie-break: smallest t whose value matches the best found.
    best_v = max(v_star, v_max)
    final_t, final_v = t_star, v_star
    for t_c in (t_seed, lo):
        v_c = value(t_c)
        if v_c >= best_v - tie_tol and t_c < final_t:
            final_t, final_v = t_c, v_c
    return float(final_t), float(final_v)


def _reflect(x: float, lo: float, hi: float) -> float:
    """Reflect an unconstrained coordinate into [lo, hi] (triangle wave)."""
    if hi == lo:
        return lo
    period = 2.0 * (hi - lo)
    y = (x - lo) % period
    return lo + (y if y <= hi - lo else period - y)


def fit_spectrum(data: MeasuredSpectrum, initial: RingParams, free,
                 ordering: Ordering = Ordering.MID_RING,
                 max_iterations: int = 2000) -> FitResult:
    """Fit model parameters to a measured transmission spectrum.

    Derivative-free simplex descent from 8 deterministic starts (the initial
    guess plus sign-patterned perturbations); bounds are enforced by
    reflection; data and model are normalized to unit maximum before
    residuals.  A start is converged when the relative objective change over
    20 iterations drops below 1e-10; the best start wins, ties going to the
    smallest start index.
    """
    free = tuple(free)
    for name in free:
        if name not in FIT_FREE_PARAMS:
            raise InvalidParamError(
                f"free parameter {name!r} not fittable (choose from {FIT_FREE_PARAMS})"
            )
    if not free:
        raise InvalidParamError("at least one free parameter is required")
    if data.lambdas.size < 50:
        raise InvalidParamError("fitting needs at least 50 spectrum rows")
    p_max = float(data.powers.max())
    if p_max - float(data.powers.min()) < FLATNESS_TOL:
        raise NoResonanceFoundError("spectrum is flat: nothing to fit")
    target = data.powers / p_max
    lams = data.lambdas
    n = lams.size

    def build(x: NDArray) -> RingParams:
        updates = {name: _reflect(float(v), *FIT_BOUNDS[name]) for name, v in zip(free, x)}
        return replace(initial, **updates)

    def objective(x: NDArray) -> float:
        try:
            arrays = sweep_arrays(build(x), lams, BusInput(), ordering)
        except Exception:
            return 1e9
        model = arrays["T_fwd"]
        if not np.isfinite(model).all():
            return 1e9
        peak = model.max()
        if peak <= 0:
            return 1e9
        return float(np.sum((model / peak - target) ** 2))

    x0 = np.array([getattr(initial, name) for name in free], dtype=float)
    scale = {"t": 0.01, "alpha": 0.01, "xi": 0.01, "zeta": 0.05, "tau": 0.05, "n_e": 0.02}
    starts = [x0]
    for k in range(1, 8):
        signs = np.array([1.0 if (k >> i) & 1 else -1.0 for i in range(len(free))])
        starts.append(x0 + signs * np.array([scale[name] for name in free]))

    def run_start(idx_x: tuple[int, NDArray]) -> tuple[float, int, NDArray, int, bool]:
        idx, start = idx_x
        history: list[float] = []
        hit_rule = False

        def callback(intermediate_result) -> None:
            nonlocal hit_rule
            history.append(float(intermediate_result.fun))
            if len(history) > 20:
                drop = history[-21] - history[-1]
                if drop < 1e-10 * max(abs(history[-1]), 1e-300):
                    hit_rule = True
                    raise StopIteration

        res = minimize(objective, start, method="Nelder-Mead", callback=callback,
                       options=dict(maxiter=max_iterations, maxfev=4 * max_iterations,
                                    xatol=1e-13, fatol=0.0))
        converged = hit_rule or bool(res.success)
        return float(res.fun), idx, np.asarray(res.x, dtype=float), int(res.nit), converged

    jobs = list(enumerate(starts))
    if worker_count() > 1:
        with ThreadPoolExecutor(max_workers=min(worker_count(), len(jobs))) as pool:
            results = list(pool.map(run_start, jobs))
    else:
        results = [run_start(j) for j in jobs]
    results.sort(key=lambda r: (r[0], r[1]))
    best_fun, best_idx, best_x, best_nit, best_conv = results[0]
    return FitResult(
        params=build(best_x), residual=math.sqrt(best_fun / n),
        iterations=best_nit, converged=best_conv, start_index=best_idx,
    )


def _splitting_of(params: RingParams, ordering: Ordering, bus: BusInput) -> float:
    center = resonance_wavelength(params)
    half = 0.5 * free_spectral_range(center, params)
    groups = find_resonances(params, (center - half, center + half), ordering, bus)
    deepest = min(groups, key=lambda g: min(g.depth_fwd))
    return deepest.splitting


def sweep_engine(params: RingParams, axis: str, grid, metrics,
                 ordering: Ordering = Ordering.MID_RING,
                 sfwm: SfwmParams | None = None, bus: BusInput = BusInput()) -> Table:
    """Generic one-axis sweep producing one row per grid value.

    ``axis`` is one of t, alpha, xi, zeta, lambda.  Metrics are drawn from
    transmission, eta, j_herald_reduced, j_hm_reduced, m_param, splitting
    (splitting is unavailable on the lambda axis).  Parameter-axis rows are
    evaluated at each configuration's heralding-rate-optimal wavelength;
    failing rows are nan with a comment.
    """
    if axis not in SWEEP_AXES:
        raise InvalidParamError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    metrics = list(metrics)
    for m in metrics:
        if m not in SWEEP_METRICS:
            raise InvalidParamError(f"unknown metric {m!r} (choose from {SWEEP_METRICS})")
    if len(set(metrics)) != len(metrics):
        raise InvalidParamError("duplicate metrics requested")
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise InvalidParamError("sweep grid must be nonempty")
    columns = [("lambda_m" if axis == "lambda" else axis)] + metrics

    if axis == "lambda":
        if "splitting" in metrics:
            raise InvalidParamError("splitting is not a per-wavelength metric")
        base = sweep_arrays(params, grid, bus, ordering)
        per_lam = {"transmission": base["T_fwd"]}
        if {"eta", "j_herald_reduced", "j_hm_reduced"} & set(metrics):
            h = herald_arrays(params, grid, bus, ordering)
            per_lam.update({k: h[k] for k in ("eta", "j_herald_reduced", "j_hm_reduced")})
        if "m_param" in metrics:
            from .herald import m_parameter
            vals = []
            for lam in grid:
                try:
                    vals.append(abs(m_parameter(params, float(lam), ordering)))
                except Exception:
                    vals.append(math.nan)
            per_lam["m_param"] = np.array(vals)
        rows = np.column_stack([grid] + [per_lam[m] for m in metrics])
        return Table(columns=columns, rows=rows)

    def one_row(v: float) -> tuple[list[float], str | None]:
        p = replace(params, **{axis: float(v)})
        row = [float(v)]
        note = None
        rep = None
        try:
            if {"transmission", "eta", "j_herald_reduced", "j_hm_reduced",
                    "m_param"} & set(metrics):
                lam = peak_herald_wavelength(p, bus, ordering)
                rep = heralding_report(p, lam, bus, sfwm, ordering)
            for m in metrics:
                if m == "splitting":
                    row.append(_splitting_of(p, ordering, bus))
                elif m == "transmission":
                    row.append(_transmission_at(p, ordering, lam, bus))
                elif m == "eta":
                    row.append(rep.eta)
                elif m == "j_herald_reduced":
                    row.append(rep.j_herald / rep.beta**2)
                elif m == "j_hm_reduced":
                    row.append(rep.j_hm / rep.beta**2)
                elif m == "m_param":
                    row.append(rep.m_param)
        except Exception as exc:
            row = [float(v)] + [math.nan] * len(metrics)
            note = f"{axis}={v:g}: {exc}"
        return row, note

    values = [float(v) for v in grid]
    if len(values) > 1 and worker_count() > 1:
        with ThreadPoolExecutor(max_workers=min(worker_count(), 32)) as pool:
            results = list(pool.map(one_row, values))
    else:
        results = [one_row(v) for v in values]
    rows = np.array([r for r, _ in results], dtype=float)
    comments = [msg for _, msg in results if msg is not None]
    return Table(columns=columns, rows=rows, comments=comments)
