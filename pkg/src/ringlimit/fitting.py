"""Fit the add-drop microring transfer function to a measured spectrum."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, Tuple

import numpy as np

from .analysis import find_resonances
from .devices import MicroringSpec, Spectrum, ring_drop, ring_through
from .errors import DomainError
from .lsq import covariance, central_jacobian, damped_least_squares

FIT_PARAMETERS = ("kappa", "kappa1", "kappa2", "alpha", "n_eff", "radius")
MAX_ITER = 500
REL_STEP = 1e-6
ILL_CONDITIONED = 1e10

DEFAULT_BOUNDS: Dict[str, Tuple[float, float]] = {
    "kappa": (0.0, 1.0),
    "kappa1": (0.0, 1.0),
    "kappa2": (0.0, 1.0),
    "alpha": (0.0, math.inf),
    "n_eff": (1.0, math.inf),
    "radius": (1e-9, math.inf),
}


class IllConditionedFitWarning(UserWarning):
    """Free parameters are (nearly) degenerate for the supplied data."""


@dataclass(frozen=True)
class FitProblem:
    """What to fit and where to start.

    Parameters not listed in ``free`` are held at their value in ``init``.
    ``"kappa"`` ties both couplers together and excludes ``"kappa1"`` and
    ``"kappa2"``.
    """

    data: Spectrum
    init: MicroringSpec
    free: Tuple[str, ...] = ("kappa", "alpha", "n_eff")
    port: str = "through"
    bounds: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    max_iter: int = MAX_ITER
    prescan: bool = True

    def __post_init__(self):
        free = tuple(self.free)
        object.__setattr__(self, "free", free)
        if not free:
            raise DomainError("at least one free parameter is required")
        unknown = [p for p in free if p not in FIT_PARAMETERS]
        if unknown:
            raise DomainError(f"unknown fit parameter(s): {', '.join(unknown)}")
        if len(set(free)) != len(free):
            raise DomainError("free parameters listed twice")
        if "kappa" in free and ({"kappa1", "kappa2"} & set(free)):
            raise DomainError("'kappa' (symmetric) cannot be combined with 'kappa1'/'kappa2'")
        if "kappa" in free and self.init.kappa1 != self.init.kappa2:
            raise DomainError("symmetric 'kappa' fit needs init.kappa1 == init.kappa2")
        if self.port not in ("through", "drop"):
            raise DomainError(f"port must be 'through' or 'drop', got {self.port!r}")
        for name in self.bounds:
            if name not in FIT_PARAMETERS:
                raise DomainError(f"bounds given for unknown parameter {name!r}")
        for name in free:
            lo, hi = self.bound(name)
            value = _get(self.init, name)
            if not lo <= value <= hi:
                raise DomainError(f"init {name}={value!r} outside bounds [{lo}, {hi}]")

    def bound(self, name: str) -> Tuple[float, float]:
        lo, hi = self.bounds.get(name, DEFAULT_BOUNDS[name])
        if not lo <= hi:
            raise DomainError(f"empty bounds for {name}: [{lo}, {hi}]")
        return float(lo), float(hi)

    def model(self, spec: MicroringSpec) -> np.ndarray:
        port = ring_through if self.port == "through" else ring_drop
        return port(spec, self.data.wavelengths)


@dataclass(frozen=True)
class FitResult:
    params: MicroringSpec
    rms_residual: float
    iterations: int
    converged: bool
    covariance_diag: Dict[str, float]
    ill_conditioned: bool = False
    condition_number: float = float("nan")
    trace: Tuple[float, ...] = ()
    message: str = ""


def _get(spec: MicroringSpec, name: str) -> float:
    return spec.kappa1 if name == "kappa" else getattr(spec, name)


def _set(spec: MicroringSpec, values: Dict[str, float]) -> MicroringSpec:
    changes = dict(values)
    if "kappa" in changes:
        k = changes.pop("kappa")
        changes["kappa1"] = changes["kappa2"] = k
    return replace(spec, **changes)


def _scale(name: str, value: float) -> float:
    floor = {"kappa": 1e-3, "kappa1": 1e-3, "kappa2": 1e-3, "alpha": 1.0}.get(name, 1e-12)
    return max(abs(value), floor)


def _prescan_n_eff(problem: FitProblem, spec: MicroringSpec) -> MicroringSpec:
    """Snap ``n_eff`` to the mode order implied by two adjacent measured lines.

    Adjacent resonances of orders ``m`` and ``m + 1`` at ``l1 > l2`` satisfy
    ``m = l2 / (l1 - l2)``, so the effective index follows as
    ``m * l1 / (2 pi R)``. The init is only replaced when it would
    misplace the measured line by more than a quarter linewidth.
    """
    polarity = "dip" if problem.port == "through" else "peak"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            lines = find_resonances(problem.data, polarity=polarity)
        except DomainError:
            return spec
    if len(lines) < 2:
        return spec
    l2, l1 = lines[0].center, lines[1].center
    order = round(l2 / (l1 - l2))
    if order < 1:
        return spec
    fwhm = float(np.median([f.fwhm for f in lines]))
    opl = spec.n_eff * spec.circumference
    init_order = round(opl / l1)
    if init_order == order and abs(opl / init_order - l1) <= 0.25 * fwhm:
        return spec
    n_eff = order * l1 / spec.circumference
    lo, hi = problem.bound("n_eff")
    if not lo <= n_eff <= hi:
        return spec
    return replace(spec, n_eff=n_eff)


def _count_lines(problem: FitProblem) -> int:
    polarity = "dip" if problem.port == "through" else "peak"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            return len(find_resonances(problem.data, polarity=polarity))
        except DomainError:
            return 0


def fit_microring(problem: FitProblem) -> FitResult:
    """Damped least-squares fit of the selected port model to ``problem.data``.

    Deterministic for a given problem. Coupling and loss are nearly
    degenerate on a lone resonance, so when both are free together with
    ``n_eff`` and fewer than two lines are present, or when the normalised
    normal matrix is worse conditioned than 1e10, an
    :class:`IllConditionedFitWarning` is issued and ``ill_conditioned`` set.
    """
    names = problem.free
    start = problem.init
    if problem.prescan and "n_eff" in names:
        start = _prescan_n_eff(problem, start)

    p0 = np.array([_get(start, n) for n in names])
    bounds = [problem.bound(n) for n in names]
    lower = np.array([b[0] for b in bounds])
    upper = np.array([b[1] for b in bounds])
    scale = np.array([_scale(n, v) for n, v in zip(names, p0)])
    data = problem.data.transmission

    def to_spec(p):
        return _set(start, dict(zip(names, p)))

    def residual(p):
        return problem.model(to_spec(p)) - data

    result = damped_least_squares(
        residual, p0, scale=scale, lower=lower, upper=upper,
        xtol=1e-9, max_iter=problem.max_iter, rel_step=REL_STEP,
    )
    spec = to_spec(result.params)

    jac = central_jacobian(residual, result.params, REL_STEP, scale, lower, upper)
    cov, cond = covariance(jac, result.residual)
    ill = cond > ILL_CONDITIONED
    coupling_free = bool({"kappa", "kappa1", "kappa2"} & set(names))
    if coupling_free and "alpha" in names and "n_eff" in names and _count_lines(problem) < 2:
        ill = True
    if ill:
        warnings.warn(
            f"fit is ill-conditioned (condition number {cond:.3g}); "
            "covariance estimates are unreliable",
            IllConditionedFitWarning, stacklevel=2,
        )
    return FitResult(
        params=spec,
        rms_residual=result.rms,
        iterations=result.iterations,
        converged=result.converged,
        covariance_diag={n: float(v) for n, v in zip(names, np.diag(cov))},
        ill_conditioned=ill,
        condition_number=cond,
        trace=tuple(result.trace),
        message=result.message,
    )


def residual_curve(spec: MicroringSpec, problem: FitProblem) -> Spectrum:
    """Model minus data on the data grid."""
    wl = problem.data.wavelengths
    model = problem.model(spec)
    if model.shape != wl.shape:
        raise DomainError("model and data grids differ")
    return Spectrum(wl, model - problem.data.transmission)


def rms(curve: Spectrum) -> float:
    r = curve.transmission
    return float(np.sqrt(r @ r / r.size))
