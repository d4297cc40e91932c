import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringlimit import devices as dv
from ringlimit.errors import DomainError

from conftest import GOLDEN_A, GOLDEN_ALPHA, NM, PM, UM, golden_grid, golden_spec

ring_specs = st.builds(
    dv.MicroringSpec,
    radius=st.floats(5 * UM, 200 * UM),
    n_eff=st.floats(1.0, 4.0),
    kappa1=st.floats(0.0, 1.0),
    kappa2=st.floats(0.0, 1.0),
    alpha=st.floats(0.0, 500.0),
)


def field_oracle(spec, wl):
    """Complex-amplitude add-drop ring, summed as a geometric series of round trips."""
    phi = 2 * np.pi * spec.n_eff * spec.circumference / wl
    t1, t2, a = spec.t1, spec.t2, spec.a
    k1, k2 = math.sqrt(spec.kappa1), math.sqrt(spec.kappa2)
    loop = t1 * t2 * a * np.exp(1j * phi)
    through = (t1 - t2 * a * np.exp(1j * phi)) / (1 - loop)
    drop = -k1 * k2 * np.sqrt(a) * np.exp(0.5j * phi) / (1 - loop)
    return np.abs(through) ** 2, np.abs(drop) ** 2


class TestUnits:
    def test_db_conversion_round_trip(self):
        assert dv.alpha_to_db_per_cm(dv.alpha_from_db_per_cm(0.5532)) == pytest.approx(0.5532, rel=1e-14)

    def test_three_db_per_cm_halves_power_per_cm(self):
        alpha = dv.alpha_from_db_per_cm(10 * math.log10(2))
        assert math.exp(-alpha * 0.01) == pytest.approx(0.5, rel=1e-13)

    def test_golden_loss_figure(self):
        assert GOLDEN_ALPHA == pytest.approx(12.738765892392776, rel=1e-12)
        assert dv.alpha_to_db_per_cm(GOLDEN_ALPHA) == pytest.approx(0.553237573332, rel=1e-10)


class TestSpectrum:
    def test_arrays_are_read_only(self):
        s = dv.Spectrum([1e-6, 2e-6], [0.5, 0.6])
        with pytest.raises(ValueError):
            s.transmission[0] = 1.0

    @pytest.mark.parametrize("wl,tr", [
        ([1e-6], [0.5]),
        ([1e-6, 2e-6], [0.5]),
        ([2e-6, 1e-6], [0.5, 0.5]),
        ([1e-6, 1e-6], [0.5, 0.5]),
        ([1e-6, 2e-6], [0.5, float("nan")]),
        ([[1e-6, 2e-6]], [[0.5, 0.5]]),
    ])
    def test_invalid(self, wl, tr):
        with pytest.raises(DomainError):
            dv.Spectrum(wl, tr)

    def test_noisy_data_allowed_but_not_passive(self):
        s = dv.Spectrum([1e-6, 2e-6], [1.01, -0.01])
        assert not s.is_passive()

    def test_window_and_step(self):
        s = dv.Spectrum(np.arange(10) * 1e-9 + 1e-6, np.ones(10))
        w = s.window(1.0015e-6, 1.0055e-6)
        assert len(w) == 4
        assert s.step == pytest.approx(1e-9)


class TestGrid:
    def test_from_step(self):
        g = golden_grid()
        assert g.points == 80001
        assert g.step == pytest.approx(0.5 * PM, rel=1e-9)
        wl = g.wavelengths()
        assert wl[0] == g.start and wl[-1] == g.stop

    @pytest.mark.parametrize("args", [(0, 1e-6, 10), (2e-6, 1e-6, 10), (1e-6, 2e-6, 1), (1e-6, 2e-6, 2.5)])
    def test_invalid(self, args):
        with pytest.raises(DomainError):
            dv.WavelengthGrid(*args)

    def test_non_positive_step(self):
        with pytest.raises(DomainError):
            dv.WavelengthGrid.from_step(1e-6, 2e-6, 0)


class TestMicroringSpec:
    def test_golden_feedback(self):
        spec = golden_spec()
        assert spec.a == pytest.approx(GOLDEN_A, rel=1e-14)
        assert spec.x == pytest.approx(0.9827163, rel=1e-12)

    @pytest.mark.parametrize("kw", [
        dict(radius=0), dict(radius=-1e-6), dict(n_eff=0.9), dict(kappa1=-0.1),
        dict(kappa2=1.1), dict(alpha=-1.0), dict(radius=float("inf")),
    ])
    def test_invalid(self, kw):
        base = dict(radius=10 * UM, n_eff=2.0, kappa1=0.1, kappa2=0.1, alpha=0.0)
        base.update(kw)
        with pytest.raises(DomainError):
            dv.MicroringSpec(**base)

    def test_golden_resonances(self):
        res = golden_spec().resonances(1480 * NM, 1535 * NM)
        expected = [1.48407527958643e-6, 1.49184530722824e-6, 1.49969712463471e-6,
                    1.50763203005605e-6, 1.51565134936486e-6, 1.52375643679462e-6,
                    1.53194867570212e-6]
        np.testing.assert_allclose(res, expected, rtol=1e-13)

    def test_resonance_count_in_golden_window(self):
        assert golden_spec().resonances(1490 * NM, 1530 * NM).size == 5
        assert golden_spec().resonances(1500 * NM, 1540 * NM).size == 4

    def test_fsr(self):
        assert dv.microring_fsr(golden_spec(), 1510 * NM) == pytest.approx(8.00196660956627e-9, rel=1e-12)
        with pytest.raises(DomainError):
            dv.microring_fsr(golden_spec(), 0.0)


class TestRingTransfer:
    @settings(max_examples=60)
    @given(ring_specs, st.floats(1.2e-6, 1.7e-6))
    def test_matches_field_oracle(self, spec, lam):
        wl = np.array([lam, lam * (1 + 1e-5), lam * (1 + 3e-4)])
        through, drop = field_oracle(spec, wl)
        np.testing.assert_allclose(dv.ring_through(spec, wl), through, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(dv.ring_drop(spec, wl), drop, rtol=1e-9, atol=1e-12)

    @settings(max_examples=60)
    @given(ring_specs)
    def test_passive(self, spec):
        wl = np.linspace(1.5e-6, 1.51e-6, 2001)
        total = dv.ring_through(spec, wl) + dv.ring_drop(spec, wl)
        assert np.all(dv.ring_through(spec, wl) >= -1e-12)
        assert np.all(dv.ring_drop(spec, wl) >= -1e-12)
        assert np.all(total <= 1 + 1e-12)

    @settings(max_examples=60)
    @given(ring_specs.map(lambda s: dv.MicroringSpec(s.radius, s.n_eff, s.kappa1, s.kappa2, 0.0)))
    def test_lossless_conserves_power(self, spec):
        if spec.x >= 1.0:
            return
        wl = np.linspace(1.5e-6, 1.51e-6, 2001)
        total = dv.ring_through(spec, wl) + dv.ring_drop(spec, wl)
        np.testing.assert_allclose(total, 1.0, atol=1e-12, rtol=0)

    def test_critically_coupled_all_pass_zero_at_resonance(self):
        spec = dv.MicroringSpec(20 * UM, 2.0, 0.05, 0.0, 0.0)
        alpha = -2 * math.log(math.sqrt(1 - 0.05)) / spec.circumference
        spec = dv.MicroringSpec(20 * UM, 2.0, 0.05, 0.0, alpha)
        res = spec.resonances(1.5e-6, 1.6e-6)
        assert dv.ring_through(spec, res) == pytest.approx(np.zeros_like(res), abs=1e-20)

    def test_dips_and_peaks_at_resonance(self):
        spec = golden_spec()
        res = spec.resonances(1500 * NM, 1520 * NM)
        off = res + 0.5 * dv.microring_fsr(spec, 1510 * NM)
        assert np.all(dv.ring_through(spec, res) < dv.ring_through(spec, off))
        assert np.all(dv.ring_drop(spec, res) > dv.ring_drop(spec, off))

    def test_spectrum_generators(self):
        spec, grid = golden_spec(), golden_grid()
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            through = dv.microring_through_spectrum(spec, grid)
            drop = dv.microring_drop_spectrum(spec, grid)
        assert len(through) == grid.points
        assert through.is_passive() and drop.is_passive()

    def test_coarse_grid_warns(self):
        grid = dv.WavelengthGrid.from_step(1500 * NM, 1520 * NM, 10 * PM)
        with pytest.warns(dv.GridResolutionWarning):
            dv.microring_through_spectrum(golden_spec(), grid)


class TestFinesse:
    def test_golden_closed_form(self):
        spec = golden_spec()
        assert dv.microring_closed_form_finesse(spec) == pytest.approx(180.186285362771, rel=1e-11)
        assert dv.microring_closed_form_finesse(spec, approximate=True) == pytest.approx(180.188567651692, rel=1e-11)

    def test_quoted_feedback(self):
        assert dv.finesse_from_feedback(0.9827) == pytest.approx(180.015, abs=5e-4)

    @given(st.floats(1.5, 1e5))
    def test_inverse(self, finesse):
        assert dv.finesse_from_feedback(dv.feedback_from_finesse(finesse)) == pytest.approx(finesse, rel=1e-9)

    @given(st.floats(0.9, 0.999999))
    def test_approximation_converges(self, x):
        exact = dv.finesse_from_feedback(x)
        approx = dv.finesse_from_feedback(x, approximate=True)
        assert abs(approx / exact - 1) < (1 - x) ** 2

    @pytest.mark.parametrize("x", [0.0, 1.0, -0.5, 1.5, 0.1])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            dv.finesse_from_feedback(x)

    def test_inverse_domain(self):
        with pytest.raises(DomainError):
            dv.feedback_from_finesse(1.0)

    def test_finesse_grows_with_x(self):
        values = [dv.finesse_from_feedback(x) for x in (0.5, 0.8, 0.95, 0.99)]
        assert values == sorted(values)


class TestFabryPerot:
    @pytest.mark.parametrize("kw", [dict(n=0.5), dict(d=0), dict(mirror_reflectance=0), dict(mirror_reflectance=1)])
    def test_invalid(self, kw):
        base = dict(n=1.5, d=100 * UM, mirror_reflectance=0.9)
        base.update(kw)
        with pytest.raises(DomainError):
            dv.FabryPerotSpec(**base)

    def test_airy_unit_peaks(self):
        spec = dv.FabryPerotSpec(1.5, 100 * UM, 0.9)
        m = np.arange(190, 196)
        peaks = 2 * spec.n * spec.d / m
        np.testing.assert_allclose(dv.airy_transmission(spec, peaks), 1.0, rtol=1e-12)

    def test_airy_minimum(self):
        spec = dv.FabryPerotSpec(1.5, 100 * UM, 0.9)
        trough = 2 * spec.n * spec.d / 192.5
        assert dv.airy_transmission(spec, trough) == pytest.approx(1 / (1 + spec.coefficient_of_finesse), rel=1e-10)

    def test_finesse_values(self):
        spec = dv.FabryPerotSpec(1.5, 100 * UM, 0.9)
        assert dv.fabry_perot_finesse(spec) == pytest.approx(29.8037647973883, rel=1e-12)
        assert spec.coefficient_of_finesse == pytest.approx(360.0, rel=1e-12)

    def test_fsr(self):
        spec = dv.FabryPerotSpec(1.5, 100 * UM, 0.9)
        assert dv.fabry_perot_fsr(spec, 1550 * NM) == pytest.approx((1550e-9) ** 2 / 3e-4, rel=1e-14)

    def test_spectrum_passive(self):
        spec = dv.FabryPerotSpec(1.5, 100 * UM, 0.9)
        s = dv.fabry_perot_spectrum(spec, dv.WavelengthGrid.from_step(1530 * NM, 1570 * NM, 2 * PM))
        assert s.is_passive()


class TestFootprint:
    def test_golden_ring(self):
        assert dv.device_footprint(golden_spec()) * 1e6 == pytest.approx(0.003025, rel=1e-12)
        assert dv.device_footprint(golden_spec(), margin=0) * 1e6 == pytest.approx(0.0025, rel=1e-12)

    def test_fabry_perot(self):
        assert dv.device_footprint(dv.FabryPerotSpec(1.5, 100 * UM, 0.9)) == pytest.approx(1e-8)

    def test_grating_and_awg(self):
        assert dv.device_footprint(dv.GratingSpec(2, 1000, 1 * UM, 10 * UM)) == pytest.approx(1e-8)
        assert dv.device_footprint(dv.AwgSpec(40, 10 * UM, 1.5, 2 * UM, 100 * UM)) == pytest.approx(8e-9)

    def test_missing_geometry(self):
        with pytest.raises(DomainError):
            dv.device_footprint(dv.GratingSpec(2, 1000))

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            dv.device_footprint(golden_spec(), margin=-1)
        with pytest.raises(DomainError):
            dv.device_footprint(object())

    @pytest.mark.parametrize("kw", [dict(order=0), dict(lines=0), dict(order=1.5)])
    def test_grating_invalid(self, kw):
        base = dict(order=1, lines=10)
        base.update(kw)
        with pytest.raises(DomainError):
            dv.GratingSpec(**base)

    @pytest.mark.parametrize("kw", [dict(arms=1), dict(delta_L=0), dict(n_eff=0.5)])
    def test_awg_invalid(self, kw):
        base = dict(arms=8, delta_L=1e-5, n_eff=1.5)
        base.update(kw)
        with pytest.raises(DomainError):
            dv.AwgSpec(**base)


class TestSpecExamples:
    def test_uncoupled_ring_is_invisible(self):
        spec = dv.MicroringSpec(25 * UM, 1.814, 0.0, 0.0, 0.0)
        wl = np.concatenate([golden_grid().wavelengths()[::100], spec.resonances(1490 * NM, 1530 * NM)])
        assert np.all(dv.ring_through(spec, wl) == 1.0)
        assert np.all(dv.ring_drop(spec, wl) == 0.0)
        lossy = dv.MicroringSpec(25 * UM, 1.814, 0.0, 0.0, 10.0)
        np.testing.assert_allclose(dv.ring_through(lossy, wl), 1.0, atol=1e-12)
        assert np.all(dv.ring_drop(lossy, wl) == 0.0)

    @pytest.mark.parametrize("kappa", [0.01, 0.0163, 0.2, 0.9])
    def test_lossless_symmetric_full_transfer(self, kappa):
        spec = dv.MicroringSpec.symmetric(25 * UM, 1.814, kappa)
        res = spec.resonances(1490 * NM, 1530 * NM)
        assert np.all(dv.ring_through(spec, res) < 1e-10)
        np.testing.assert_allclose(dv.ring_drop(spec, res), 1.0, rtol=1e-10)

    def test_fabry_perot_without_mirrors(self):
        spec = dv.FabryPerotSpec(1.5, 100 * UM, 1e-15)
        np.testing.assert_allclose(dv.airy_transmission(spec, golden_grid().wavelengths()), 1.0, atol=1e-14)

    def test_fsr_halves_with_double_radius(self):
        a = dv.microring_fsr(dv.MicroringSpec(25 * UM, 1.814, 0.1, 0.1), 1510 * NM)
        b = dv.microring_fsr(dv.MicroringSpec(50 * UM, 1.814, 0.1, 0.1), 1510 * NM)
        assert a == 2 * b

    def test_exact_and_approximate_finesse_agree_above_twenty(self):
        for finesse in np.geomspace(20, 1e4, 200):
            x = dv.feedback_from_finesse(finesse)
            assert dv.finesse_from_feedback(x, approximate=True) == pytest.approx(finesse, rel=0.01)

    def test_footprint_scales_as_square(self):
        small = dv.device_footprint(dv.MicroringSpec(25 * UM, 1.8, 0.1, 0.1), margin=2.5 * UM)
        large = dv.device_footprint(dv.MicroringSpec(50 * UM, 1.8, 0.1, 0.1), margin=5 * UM)
        assert large == pytest.approx(4 * small, rel=1e-14)

    def test_roundtrip_loss(self):
        spec = golden_spec()
        assert spec.roundtrip_loss == pytest.approx(1 - spec.x ** 2, rel=1e-14)


class TestSimulatedPeriodicity:
    def test_spacing_matches_fsr(self):
        from ringlimit.analysis import find_resonances

        spec = golden_spec()
        feats = find_resonances(dv.microring_through_spectrum(spec, golden_grid()))
        centres = np.array([f.center for f in feats])
        local = np.array([dv.microring_fsr(spec, c) for c in 0.5 * (centres[1:] + centres[:-1])])
        np.testing.assert_allclose(np.diff(centres), local, rtol=5e-3)
