"""Resonance detection and line-shape metrics for sampled spectra.

Two linewidth estimators are available and can be compared:

``find_resonances``
    Linear interpolation of the two half-prominence crossings around each
    extremum. Prominence is measured against the higher of the two
    surrounding bases, so partial extinction and sloped baselines are
    handled. A base that sits on the first or last sample may be a trough
    cut off by the grid, so such a line is measured from its interior
    side, or from its deeper side when both bases are grid edges.
``fit_lorentzian``
    Damped least-squares fit of ``baseline + amplitude * (G/2)**2 /
    ((x - c)**2 + (G/2)**2)`` over a window.

``analyze_spectrum`` runs the first and optionally refines every line with
the second. The fit absorbs the tails of neighbouring lines into its
baseline, which the half-prominence rule cannot do on low-finesse
periodic spectra.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import find_peaks

from .devices import Spectrum
from .errors import DomainError
from .lsq import LsqResult, damped_least_squares

DEFAULT_PROMINENCE = 0.1
DEFAULT_FIT_WINDOW = 1.5  # half-width, in FWHM
LORENTZ_MAX_ITER = 200
LORENTZ_XTOL = 1e-9
MIN_WINDOW_POINTS = 8


class ResonanceWarning(UserWarning):
    """Some detected lines could not be measured and were dropped."""


@dataclass(frozen=True)
class ResonanceFeature:
    center: float
    fwhm: float
    extremum_value: float
    extinction: float
    polarity: str  # "dip" or "peak"
    estimator: str = "interpolation"


@dataclass(frozen=True)
class SpectralMetrics:
    """Aggregate metrics over a set of resonances.

    ``fsr`` and ``finesse`` are ``None`` when fewer than two lines were
    found. ``fwhm`` and ``center`` are the medians used for ``q_factor``.
    """

    fsr: Optional[float]
    finesse: Optional[float]
    q_factor: float
    n_features: int
    fwhm: float
    center: float


@dataclass(frozen=True)
class LorentzianParams:
    center: float
    fwhm: float
    amplitude: float
    baseline: float

    def as_array(self) -> np.ndarray:
        return np.array([self.center, self.fwhm, self.amplitude, self.baseline])


@dataclass(frozen=True)
class LorentzianFit:
    params: LorentzianParams
    rms_residual: float
    iterations: int
    converged: bool
    message: str


@dataclass(frozen=True)
class Analysis:
    features: List[ResonanceFeature]
    metrics: Optional[SpectralMetrics]
    dropped: int
    unconverged_fits: int


def lorentzian(wavelengths, params: LorentzianParams) -> np.ndarray:
    x = np.asarray(wavelengths, dtype=float)
    g2 = (0.5 * params.fwhm) ** 2
    return params.baseline + params.amplitude * g2 / ((x - params.center) ** 2 + g2)


def render_lorentzian(params: LorentzianParams, wavelengths) -> Spectrum:
    wl = np.asarray(wavelengths, dtype=float)
    return Spectrum(wl, lorentzian(wl, params))


def detect_polarity(transmission: np.ndarray) -> Optional[str]:
    """``"dip"`` when the bulk of the spectrum sits in its upper half, else ``"peak"``."""
    lo, hi = float(np.min(transmission)), float(np.max(transmission))
    if hi == lo:
        return None
    return "dip" if float(np.median(transmission)) > 0.5 * (lo + hi) else "peak"


def _crossing(wl, y, i0, i1, level):
    # linear interpolation between samples i0 and i1 where y crosses level
    y0, y1 = y[i0], y[i1]
    if y1 == y0:
        return wl[i0]
    return wl[i0] + (level - y0) * (wl[i1] - wl[i0]) / (y1 - y0)


def _scan_resonances(spectrum: Spectrum, prominence_threshold: float, polarity: Optional[str]):
    if len(spectrum) < 3:
        raise DomainError(f"need at least 3 samples to find resonances, got {len(spectrum)}")
    if not 0.0 < prominence_threshold < 1.0:
        raise DomainError(f"prominence threshold must lie in (0, 1), got {prominence_threshold!r}")
    wl = spectrum.wavelengths
    tr = spectrum.transmission
    if polarity is None:
        polarity = detect_polarity(tr)
        if polarity is None:
            return [], 0
    elif polarity not in ("dip", "peak"):
        raise DomainError(f"polarity must be 'dip' or 'peak', got {polarity!r}")
    sign = -1.0 if polarity == "dip" else 1.0
    y = sign * tr

    idx, props = find_peaks(y, prominence=prominence_threshold, plateau_size=1)
    features = []
    dropped = 0
    last = len(y) - 1
    for k in range(idx.size):
        i = int(props["left_edges"][k])
        j = int(props["right_edges"][k])
        prom = float(props["prominences"][k])
        lb, rb = int(props["left_bases"][k]), int(props["right_bases"][k])
        if (lb == 0) != (rb == last):
            prom = float(y[i] - (y[rb] if lb == 0 else y[lb]))
        elif lb == 0 and rb == last:
            prom = float(y[i] - min(y[lb], y[rb]))
        half = y[i] - 0.5 * prom

        left = np.nonzero(y[:i] <= half)[0]
        right = np.nonzero(y[j + 1:] <= half)[0]
        if left.size == 0 or right.size == 0:
            dropped += 1
            continue
        li = int(left[-1])
        ri = j + 1 + int(right[0])
        x_left = _crossing(wl, y, li, li + 1, half)
        x_right = _crossing(wl, y, ri - 1, ri, half)

        centre, peak = wl[i], y[i]
        if 0 < i < len(wl) - 1:
            ym, yp = y[i - 1], y[i + 1]
            curv = ym - 2.0 * y[i] + yp
            if curv < 0:
                shift = 0.5 * (ym - yp) / curv
                shift = min(max(shift, -1.0), 1.0)
                h = wl[i + 1] - wl[i] if shift >= 0 else wl[i] - wl[i - 1]
                centre = wl[i] + shift * h
                peak = y[i] - 0.25 * (ym - yp) * shift
        value = min(max(sign * peak, 0.0), 1.0)
        features.append(ResonanceFeature(
            center=float(centre),
            fwhm=float(x_right - x_left),
            extremum_value=float(value),
            extinction=prom,
            polarity=polarity,
        ))
    features.sort(key=lambda f: f.center)
    return features, dropped


def find_resonances(
    spectrum: Spectrum,
    prominence_threshold: float = DEFAULT_PROMINENCE,
    polarity: Optional[str] = None,
) -> List[ResonanceFeature]:
    """All dips or peaks whose prominence exceeds ``prominence_threshold``.

    The FWHM of each line is the distance between the two half-prominence
    crossings, located by linear interpolation. The centre is refined by a
    parabola through the extremum and its neighbours; on a plateau the
    lowest-index sample is taken as the extremum. Lines whose half-level
    crossings fall off the grid are dropped with a :class:`ResonanceWarning`.
    """
    features, dropped = _scan_resonances(spectrum, prominence_threshold, polarity)
    if dropped:
        warnings.warn(f"{dropped} resonance(s) dropped: half-prominence crossing outside the grid",
                      ResonanceWarning, stacklevel=2)
    return features


def fit_lorentzian(
    spectrum: Spectrum,
    window: Tuple[float, float],
    init: LorentzianParams,
    *,
    max_iter: int = LORENTZ_MAX_ITER,
    xtol: float = LORENTZ_XTOL,
) -> LorentzianFit:
    """Least-squares Lorentzian over ``window = (lo, hi)``.

    Raises :class:`~ringlimit.errors.SingularSystemError` when the normal
    equations cannot be solved; a fit that runs out of iterations is
    returned with ``converged=False`` and its best parameters.
    """
    if not init.fwhm > 0:
        raise DomainError(f"initial fwhm must be positive, got {init.fwhm!r}")
    lo, hi = window
    mask = (spectrum.wavelengths >= lo) & (spectrum.wavelengths <= hi)
    if np.count_nonzero(mask) < MIN_WINDOW_POINTS:
        raise DomainError(f"fit window holds {np.count_nonzero(mask)} points, need {MIN_WINDOW_POINTS}")
    x = spectrum.wavelengths[mask]
    data = spectrum.transmission[mask]

    def unpack(p):
        return LorentzianParams(p[0], p[1], p[2], p[3])

    def residual(p):
        return lorentzian(x, unpack(p)) - data

    def jacobian(p):
        c, w, amp, _ = p
        g = 0.5 * w
        d = x - c
        q = d * d + g * g
        u = g * g / q
        return np.stack([
            amp * 2.0 * g * g * d / (q * q),
            amp * g * d * d / (q * q),
            u,
            np.ones_like(x),
        ], axis=1)

    scale = np.array([init.fwhm, init.fwhm, max(abs(init.amplitude), 1e-3), 1.0])
    lower = np.array([-np.inf, 1e-9 * init.fwhm, -np.inf, -np.inf])
    result: LsqResult = damped_least_squares(
        residual, init.as_array(), jacobian=jacobian, scale=scale, lower=lower,
        xtol=xtol, max_iter=max_iter,
    )
    return LorentzianFit(unpack(result.params), result.rms, result.iterations,
                         result.converged, result.message)


def refine_features(
    spectrum: Spectrum,
    features: Sequence[ResonanceFeature],
    window_fwhm: float = DEFAULT_FIT_WINDOW,
) -> Tuple[List[ResonanceFeature], int]:
    """Replace centre and FWHM of each line by a local Lorentzian fit.

    The window is ``center +/- window_fwhm * fwhm``, clipped halfway to
    the neighbouring lines. Lines whose fit does not converge keep their
    interpolated values and are counted in the second return value.
    """
    refined = []
    failures = 0
    centres = [f.center for f in features]
    for k, feat in enumerate(features):
        lo = feat.center - window_fwhm * feat.fwhm
        hi = feat.center + window_fwhm * feat.fwhm
        if k > 0:
            lo = max(lo, 0.5 * (centres[k - 1] + feat.center))
        if k + 1 < len(features):
            hi = min(hi, 0.5 * (centres[k + 1] + feat.center))
        sign = -1.0 if feat.polarity == "dip" else 1.0
        baseline = feat.extremum_value - sign * feat.extinction
        init = LorentzianParams(feat.center, feat.fwhm, sign * feat.extinction, baseline)
        try:
            fit = fit_lorentzian(spectrum, (lo, hi), init)
        except DomainError:
            fit = None
        if fit is None or not fit.converged or not (lo <= fit.params.center <= hi):
            failures += 1
            refined.append(feat)
            continue
        p = fit.params
        value = min(max(p.baseline + p.amplitude, 0.0), 1.0)
        refined.append(replace(feat, center=p.center, fwhm=abs(p.fwhm), extremum_value=value,
                               estimator="lorentzian"))
    return refined, failures


def q_factor(center: float, fwhm: float) -> float:
    """Quality factor ``center / fwhm``."""
    if not (center > 0 and fwhm > 0):
        raise DomainError(f"center and fwhm must be positive, got {center!r}, {fwhm!r}")
    return center / fwhm


def metrics(features: Sequence[ResonanceFeature]) -> SpectralMetrics:
    """FSR, finesse and Q from a set of lines, aggregated by medians.

    With a single line only Q is available; ``fsr`` and ``finesse`` are
    then ``None``.
    """
    if len(features) == 0:
        raise DomainError("cannot compute metrics from an empty feature list")
    centres = np.sort(np.array([f.center for f in features], dtype=float))
    widths = np.array([f.fwhm for f in features], dtype=float)
    fwhm = float(np.median(widths))
    centre = float(np.median(centres))
    fsr = finesse = None
    if centres.size >= 2:
        fsr = float(np.median(np.diff(centres)))
        finesse = fsr / fwhm
    return SpectralMetrics(fsr=fsr, finesse=finesse, q_factor=q_factor(centre, fwhm),
                           n_features=int(centres.size), fwhm=fwhm, center=centre)


def analyze_spectrum(
    spectrum: Spectrum,
    prominence_threshold: float = DEFAULT_PROMINENCE,
    *,
    polarity: Optional[str] = None,
    refine: bool = True,
    window_fwhm: float = DEFAULT_FIT_WINDOW,
) -> Analysis:
    features, dropped = _scan_resonances(spectrum, prominence_threshold, polarity)
    if dropped:
        warnings.warn(f"{dropped} resonance(s) dropped: half-prominence crossing outside the grid",
                      ResonanceWarning, stacklevel=2)
    failures = 0
    if refine and features:
        features, failures = refine_features(spectrum, features, window_fwhm)
    result = metrics(features) if features else None
    return Analysis(features, result, dropped, failures)


def fwhm_points(spectrum: Spectrum, fwhm: float) -> float:
    """How many grid steps span ``fwhm``."""
    return fwhm / spectrum.step if math.isfinite(fwhm) else 0.0
