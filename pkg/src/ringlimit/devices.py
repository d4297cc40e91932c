"""Device parameter sets, transmission spectra and closed-form metrics.

Conventions used throughout:

* ``kappa1``/``kappa2`` are *power* coupling coefficients; the amplitude
  self-coupling is ``t = sqrt(1 - kappa)``. Couplers are lossless.
* ``alpha`` is the power attenuation coefficient in 1/m and covers every
  loss channel except coupling. The round-trip amplitude is
  ``a = exp(-alpha * 2 pi R / 2)``.
* ``n_eff`` does not depend on wavelength.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DomainError

DB_PER_CM_TO_PER_M = math.log(10.0) / 10.0 * 100.0
MIN_POINTS_PER_FWHM = 20
DEFAULT_RING_MARGIN = 2.5e-6
DEFAULT_FP_APERTURE = 100e-6


class GridResolutionWarning(UserWarning):
    """The wavelength grid samples a resonance with too few points."""


def alpha_from_db_per_cm(db_per_cm: float) -> float:
    """Power attenuation in 1/m from a loss figure in dB/cm."""
    return DB_PER_CM_TO_PER_M * float(db_per_cm)


def alpha_to_db_per_cm(alpha: float) -> float:
    return float(alpha) / DB_PER_CM_TO_PER_M


@dataclass(frozen=True)
class Spectrum:
    """Power transmission sampled on a strictly ascending wavelength grid (metres).

    Measured or noisy data may leave ``[0, 1]``; use :meth:`is_passive` to
    check simulated spectra.
    """

    wavelengths: np.ndarray
    transmission: np.ndarray

    def __post_init__(self):
        wl = np.asarray(self.wavelengths, dtype=float)
        tr = np.asarray(self.transmission, dtype=float)
        if wl.ndim != 1 or tr.shape != wl.shape:
            raise DomainError("wavelengths and transmission must be 1-D arrays of equal length")
        if wl.size < 2:
            raise DomainError(f"a spectrum needs at least 2 points, got {wl.size}")
        if not (np.all(np.isfinite(wl)) and np.all(np.isfinite(tr))):
            raise DomainError("spectrum contains non-finite values")
        if np.any(np.diff(wl) <= 0):
            raise DomainError("wavelengths must be strictly increasing")
        wl.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "wavelengths", wl)
        object.__setattr__(self, "transmission", tr)

    def __len__(self):
        return self.wavelengths.size

    def is_passive(self, slack: float = 1e-12) -> bool:
        return bool(np.all(self.transmission >= 0.0) and np.all(self.transmission <= 1.0 + slack))

    def window(self, lo: float, hi: float) -> "Spectrum":
        mask = (self.wavelengths >= lo) & (self.wavelengths <= hi)
        return Spectrum(self.wavelengths[mask], self.transmission[mask])

    @property
    def step(self) -> float:
        """Median grid spacing."""
        return float(np.median(np.diff(self.wavelengths)))


@dataclass(frozen=True)
class WavelengthGrid:
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.stop)) or self.start <= 0:
            raise DomainError(f"grid start must be positive, got {self.start!r}")
        if not self.start < self.stop:
            raise DomainError(f"grid start {self.start!r} must be below stop {self.stop!r}")
        if int(self.points) != self.points or self.points < 2:
            raise DomainError(f"grid needs at least 2 points, got {self.points!r}")

    @classmethod
    def from_step(cls, start: float, stop: float, step: float) -> "WavelengthGrid":
        if not step > 0:
            raise DomainError(f"grid step must be positive, got {step!r}")
        return cls(start, stop, int(round((stop - start) / step)) + 1)

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.points - 1)

    def wavelengths(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.points))


@dataclass(frozen=True)
class MicroringSpec:
    """Add-drop microring with two bus waveguides."""

    radius: float
    n_eff: float
    kappa1: float
    kappa2: float
    alpha: float = 0.0

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"radius must be positive, got {self.radius!r}")
        if not (self.n_eff >= 1 and math.isfinite(self.n_eff)):
            raise DomainError(f"n_eff must be >= 1, got {self.n_eff!r}")
        for name in ("kappa1", "kappa2"):
            k = getattr(self, name)
            if not 0.0 <= k <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {k!r}")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be non-negative, got {self.alpha!r}")

    @classmethod
    def symmetric(cls, radius: float, n_eff: float, kappa: float, alpha: float = 0.0) -> "MicroringSpec":
        return cls(radius, n_eff, kappa, kappa, alpha)

    @property
    def circumference(self) -> float:
        return 2.0 * math.pi * self.radius

    @property
    def a(self) -> float:
        """Round-trip field amplitude."""
        return math.exp(-self.alpha * self.circumference / 2.0)

    @property
    def t1(self) -> float:
        return math.sqrt(1.0 - self.kappa1)

    @property
    def t2(self) -> float:
        return math.sqrt(1.0 - self.kappa2)

    @property
    def x(self) -> float:
        """Round-trip feedback factor ``t1 * t2 * a``."""
        return self.t1 * self.t2 * self.a

    @property
    def roundtrip_loss(self) -> float:
        return 1.0 - self.a ** 2 * (1.0 - self.kappa1) * (1.0 - self.kappa2)

    def resonances(self, lo: float, hi: float) -> np.ndarray:
        """Exact resonance wavelengths ``n_eff L / m`` inside ``[lo, hi]``."""
        opl = self.n_eff * self.circumference
        m = np.arange(math.ceil(opl / hi), math.floor(opl / lo) + 1)
        return np.sort(opl / m)


@dataclass(frozen=True)
class FabryPerotSpec:
    n: float
    d: float
    mirror_reflectance: float

    def __post_init__(self):
        if not (self.n >= 1 and math.isfinite(self.n)):
            raise DomainError(f"n must be >= 1, got {self.n!r}")
        if not (self.d > 0 and math.isfinite(self.d)):
            raise DomainError(f"d must be positive, got {self.d!r}")
        if not 0.0 < self.mirror_reflectance < 1.0:
            raise DomainError(f"mirror_reflectance must lie in (0, 1), got {self.mirror_reflectance!r}")

    @property
    def coefficient_of_finesse(self) -> float:
        r = self.mirror_reflectance
        return 4.0 * r / (1.0 - r) ** 2


@dataclass(frozen=True)
class GratingSpec:
    order: int
    lines: int
    pitch: Optional[float] = None
    length: Optional[float] = None

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise DomainError(f"order must be an integer >= 1, got {self.order!r}")
        if int(self.lines) != self.lines or self.lines < 1:
            raise DomainError(f"lines must be an integer >= 1, got {self.lines!r}")


@dataclass(frozen=True)
class AwgSpec:
    arms: int
    delta_L: float
    n_eff: float
    pitch: Optional[float] = None
    length: Optional[float] = None

    def __post_init__(self):
        if int(self.arms) != self.arms or self.arms < 2:
            raise DomainError(f"arms must be an integer >= 2, got {self.arms!r}")
        if not self.delta_L > 0:
            raise DomainError(f"delta_L must be positive, got {self.delta_L!r}")
        if not self.n_eff >= 1:
            raise DomainError(f"n_eff must be >= 1, got {self.n_eff!r}")


DeviceSpec = Union[MicroringSpec, FabryPerotSpec, GratingSpec, AwgSpec]


def _ring_terms(spec: MicroringSpec, wavelengths: np.ndarray):
    # Written as squares plus sin^2 so that nothing cancels when x -> 1.
    phi = 2.0 * math.pi * spec.n_eff * spec.circumference / wavelengths
    a = spec.a
    if spec.kappa1 == 1.0 or spec.kappa2 == 1.0:
        x, one_minus_x = 0.0, 1.0
    else:
        log_x = 0.5 * (math.log1p(-spec.kappa1) + math.log1p(-spec.kappa2)) - spec.alpha * spec.circumference / 2.0
        x = math.exp(log_x)
        one_minus_x = -math.expm1(log_x)
    one_minus_a2 = -math.expm1(-spec.alpha * spec.circumference)
    # t2 a - t1 via the difference of squares
    span = spec.t2 * a + spec.t1
    mismatch = (spec.kappa1 - spec.kappa2 * a * a - one_minus_a2) / span if span > 0 else 0.0
    s2 = 4.0 * x * np.sin(0.5 * phi) ** 2
    denom = one_minus_x * one_minus_x + s2
    return a, mismatch, s2, denom


def ring_through(spec: MicroringSpec, wavelengths) -> np.ndarray:
    """Through-port power transmission on an arbitrary wavelength array."""
    wl = np.asarray(wavelengths, dtype=float)
    if spec.x == 1.0:
        # lossless and uncoupled: the ring is invisible
        return np.ones_like(wl)
    a, mismatch, s2, denom = _ring_terms(spec, wl)
    return (mismatch * mismatch + s2) / denom


def ring_drop(spec: MicroringSpec, wavelengths) -> np.ndarray:
    """Drop-port power transmission on an arbitrary wavelength array."""
    wl = np.asarray(wavelengths, dtype=float)
    if spec.x == 1.0:
        return np.zeros_like(wl)
    a, mismatch, s2, denom = _ring_terms(spec, wl)
    return spec.kappa1 * spec.kappa2 * a / denom


def _check_grid(grid: WavelengthGrid, fwhm_estimate: Optional[float]):
    if fwhm_estimate is None or not math.isfinite(fwhm_estimate):
        return
    ratio = fwhm_estimate / grid.step
    if ratio < MIN_POINTS_PER_FWHM:
        warnings.warn(
            f"grid step {grid.step:.3e} m resolves the estimated FWHM "
            f"{fwhm_estimate:.3e} m with only {ratio:.1f} points (< {MIN_POINTS_PER_FWHM})",
            GridResolutionWarning,
            stacklevel=3,
        )


def _ring_fwhm_estimate(spec: MicroringSpec, wavelength: float) -> Optional[float]:
    try:
        return microring_fsr(spec, wavelength) / microring_closed_form_finesse(spec)
    except DomainError:
        return None


def microring_through_spectrum(spec: MicroringSpec, grid: WavelengthGrid) -> Spectrum:
    """Through-port spectrum; resonances appear as dips."""
    _check_grid(grid, _ring_fwhm_estimate(spec, 0.5 * (grid.start + grid.stop)))
    wl = grid.wavelengths()
    return Spectrum(wl, ring_through(spec, wl))


def microring_drop_spectrum(spec: MicroringSpec, grid: WavelengthGrid) -> Spectrum:
    """Drop-port spectrum; resonances appear as peaks."""
    _check_grid(grid, _ring_fwhm_estimate(spec, 0.5 * (grid.start + grid.stop)))
    wl = grid.wavelengths()
    return Spectrum(wl, ring_drop(spec, wl))


def airy_transmission(spec: FabryPerotSpec, wavelengths) -> np.ndarray:
    wl = np.asarray(wavelengths, dtype=float)
    s = np.sin(2.0 * math.pi * spec.n * spec.d / wl)
    return 1.0 / (1.0 + spec.coefficient_of_finesse * s * s)


def fabry_perot_fsr(spec: FabryPerotSpec, wavelength_vac: float) -> float:
    return wavelength_vac ** 2 / (2.0 * spec.n * spec.d)


def fabry_perot_finesse(spec: FabryPerotSpec) -> float:
    """High-finesse Airy approximation ``pi sqrt(R) / (1 - R)``."""
    r = spec.mirror_reflectance
    return math.pi * math.sqrt(r) / (1.0 - r)


def fabry_perot_spectrum(spec: FabryPerotSpec, grid: WavelengthGrid) -> Spectrum:
    """Airy transmission; resonances appear as unit-height peaks."""
    centre = 0.5 * (grid.start + grid.stop)
    _check_grid(grid, fabry_perot_fsr(spec, centre) / fabry_perot_finesse(spec))
    wl = grid.wavelengths()
    return Spectrum(wl, airy_transmission(spec, wl))


def microring_fsr(spec: MicroringSpec, wavelength_vac: float) -> float:
    """Free spectral range ``lambda**2 / (2 pi R n_eff)``."""
    if not wavelength_vac > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength_vac!r}")
    return wavelength_vac ** 2 / (spec.circumference * spec.n_eff)


def finesse_from_feedback(x: float, approximate: bool = False) -> float:
    """Finesse of a ring with round-trip feedback factor ``x = t1 t2 a``.

    The exact form is ``pi / (2 asin((1 - x) / (2 sqrt(x))))``; with
    ``approximate=True`` the high-finesse limit ``pi sqrt(x) / (1 - x)``
    is returned instead.
    """
    x = float(x)
    if not 0.0 < x < 1.0:
        raise DomainError(f"feedback factor must lie in (0, 1), got {x!r}")
    if approximate:
        return math.pi * math.sqrt(x) / (1.0 - x)
    arg = (1.0 - x) / (2.0 * math.sqrt(x))
    if arg >= 1.0:
        raise DomainError(f"feedback factor {x!r} too small for a resolved resonance")
    return math.pi / (2.0 * math.asin(arg))


def feedback_from_finesse(finesse: float) -> float:
    """Inverse of the exact :func:`finesse_from_feedback`."""
    if not finesse > 1.0:
        raise DomainError(f"finesse must exceed 1, got {finesse!r}")
    s = math.sin(math.pi / (2.0 * finesse))
    root = -s + math.sqrt(s * s + 1.0)
    return root * root


def microring_closed_form_finesse(spec: MicroringSpec, approximate: bool = False) -> float:
    return finesse_from_feedback(spec.x, approximate=approximate)


def device_footprint(
    spec: DeviceSpec,
    *,
    margin: float = DEFAULT_RING_MARGIN,
    aperture: float = DEFAULT_FP_APERTURE,
) -> float:
    """Chip area in m^2.

    Microring: square bounding box ``(2R + 2 margin)**2``. Fabry-Perot:
    ``d * aperture``. Grating and AWG: ``count * pitch * length`` and both
    ``pitch`` and ``length`` must be set on the spec.
    """
    if isinstance(spec, MicroringSpec):
        if margin < 0:
            raise DomainError(f"margin must be non-negative, got {margin!r}")
        side = 2.0 * spec.radius + 2.0 * margin
        return side * side
    if isinstance(spec, FabryPerotSpec):
        if not aperture > 0:
            raise DomainError(f"aperture must be positive, got {aperture!r}")
        return spec.d * aperture
    if isinstance(spec, (GratingSpec, AwgSpec)):
        count = spec.lines if isinstance(spec, GratingSpec) else spec.arms
        if spec.pitch is None or spec.length is None:
            raise DomainError(f"{type(spec).__name__} footprint needs explicit pitch and length")
        return count * spec.pitch * spec.length
    raise DomainError(f"unsupported device type {type(spec).__name__}")
