"""Closed-form photon and resolution relations.

Everything here is a pure scalar function in SI units. The two linewidth
bounds differ by exactly a factor of two:

* :func:`hup_min_linewidth` uses the minimal-uncertainty product
  ``dw * dt = 1/2`` and gives ``lambda**2 / (4 pi c dt)``.
* :func:`resonator_linewidth_bound` follows the resonator round-trip
  counting argument and gives ``lambda**2 / (2 pi c dt)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .constants import C, HBAR
from .errors import DomainError


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0 or not math.isfinite(value):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return value


def _nonnegative(name: str, value: float) -> float:
    value = float(value)
    if not value >= 0 or not math.isfinite(value):
        raise DomainError(f"{name} must be non-negative and finite, got {value!r}")
    return value


def _positive_int(name: str, value: int, minimum: int = 1) -> int:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class PhotonState:
    """Vacuum wavelength, angular frequency and energy of one photon."""

    wavelength_vac: float
    angular_frequency: float
    energy: float

    @classmethod
    def from_wavelength(cls, wavelength_vac: float) -> "PhotonState":
        omega = angular_frequency(wavelength_vac)
        return cls(float(wavelength_vac), omega, HBAR * omega)


@dataclass(frozen=True)
class UncertaintyPair:
    """Conjugate uncertainties of a photon in a wavelength-selecting device.

    ``delta_l`` is always ``c * delta_t``; the spectral fields are optional.
    """

    delta_t: float
    delta_lambda: Optional[float] = None
    delta_omega: Optional[float] = None

    def __post_init__(self):
        _nonnegative("delta_t", self.delta_t)
        for name in ("delta_lambda", "delta_omega"):
            value = getattr(self, name)
            if value is not None:
                _nonnegative(name, value)

    @property
    def delta_l(self) -> float:
        return coherence_length(self.delta_t)

    @property
    def delta_energy(self) -> Optional[float]:
        return None if self.delta_omega is None else HBAR * self.delta_omega


def angular_frequency(wavelength_vac: float) -> float:
    """Angular frequency ``2 pi c / lambda`` in rad/s."""
    return 2.0 * math.pi * C / _positive("wavelength_vac", wavelength_vac)


def photon_energy(wavelength_vac: float) -> float:
    """Photon energy ``hbar * omega`` in joules."""
    return HBAR * angular_frequency(wavelength_vac)


def hup_min_linewidth(wavelength_vac: float, delta_t: float) -> float:
    """Smallest wavelength spread compatible with a time uncertainty ``delta_t``.

    Uses the minimal-uncertainty product ``dw * dt = 1/2``:
    ``dlambda = lambda**2 / (4 pi c dt)``.
    """
    lam = _positive("wavelength_vac", wavelength_vac)
    dt = _positive("delta_t", delta_t)
    return lam * lam / (4.0 * math.pi * C * dt)


def resonator_linewidth_bound(wavelength_vac: float, delta_t: float) -> float:
    """Linewidth from the resonator round-trip argument, ``lambda**2 / (2 pi c dt)``.

    Exactly twice :func:`hup_min_linewidth` for the same arguments.
    """
    lam = _positive("wavelength_vac", wavelength_vac)
    dt = _positive("delta_t", delta_t)
    return lam * lam / (2.0 * math.pi * C * dt)


def coherence_length(delta_t: float) -> float:
    """Optical path uncertainty ``c * dt`` in metres."""
    return C * _nonnegative("delta_t", delta_t)


def fp_time_uncertainty(finesse: float, n: float, d: float) -> float:
    """Photon dwell-time uncertainty of a Fabry-Perot cavity, ``F n d / (pi c)``."""
    finesse = _positive("finesse", finesse)
    n = float(n)
    if not n >= 1.0 or not math.isfinite(n):
        raise DomainError(f"refractive index must be >= 1, got {n!r}")
    d = _positive("d", d)
    return finesse * n * d / (math.pi * C)


def roundtrips_from_finesse(finesse: float) -> float:
    """Average number of round trips ``F / (2 pi)``."""
    return _positive("finesse", finesse) / (2.0 * math.pi)


def linewidth_to_angular(wavelength_vac: float, delta_lambda: float) -> float:
    """Map a small wavelength spread to angular frequency via ``|dw/dlambda| = 2 pi c / lambda**2``."""
    lam = _positive("wavelength_vac", wavelength_vac)
    return 2.0 * math.pi * C * _nonnegative("delta_lambda", delta_lambda) / (lam * lam)


def grating_resolvance(order: int, lines: int) -> int:
    """Resolving power ``lambda / dlambda = order * lines`` of a diffraction grating.

    Equals the number of wavelengths in the path difference between the
    extreme diffracted rays.
    """
    return _positive_int("order", order) * _positive_int("lines", lines)


def awg_resolvance(arms: int, delta_L: float, n_eff: float, wavelength_vac: float) -> float:
    """Resolving power of an arrayed-waveguide grating with uniform length increment.

    The maximum optical path spread ``(arms - 1) * delta_L * n_eff``
    expressed in vacuum wavelengths.
    """
    arms = _positive_int("arms", arms, minimum=2)
    delta_L = _positive("delta_L", delta_L)
    n_eff = float(n_eff)
    if not n_eff >= 1.0 or not math.isfinite(n_eff):
        raise DomainError(f"n_eff must be >= 1, got {n_eff!r}")
    lam = _positive("wavelength_vac", wavelength_vac)
    return (arms - 1) * delta_L * n_eff / lam


def awg_path_spread_for_spacing(channel_spacing: float, wavelength_vac: float, n_eff: float = 1.0) -> float:
    """Physical path spread ``(arms - 1) * delta_L`` needed to resolve ``channel_spacing``.

    Inverse of :func:`awg_resolvance`: the required resolvance is
    ``lambda / spacing`` and the optical spread is that many wavelengths.
    """
    spacing = _positive("channel_spacing", channel_spacing)
    lam = _positive("wavelength_vac", wavelength_vac)
    n_eff = float(n_eff)
    if not n_eff >= 1.0:
        raise DomainError(f"n_eff must be >= 1, got {n_eff!r}")
    return (lam / spacing) * lam / n_eff
