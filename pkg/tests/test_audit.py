import numpy as np
import pytest

from ringlimit import analysis as an
from ringlimit import devices as dv
from ringlimit.audit import VERDICT_TOLERANCE, audit, build_report, describe_device, device_delta_t
from ringlimit.constants import C
from ringlimit.errors import DomainError

from conftest import NM, PM, UM, golden_grid, golden_spec


def paper_metrics(finesse=181.8, fwhm=44 * PM, centre=1510 * NM):
    return an.SpectralMetrics(fsr=finesse * fwhm, finesse=finesse, q_factor=centre / fwhm,
                              n_features=3, fwhm=fwhm, center=centre)


class TestDeltaT:
    def test_microring_chain(self):
        ring = dv.MicroringSpec.symmetric(25 * UM, 1.814, 0.0163)
        dt = device_delta_t(ring, 1510 * NM, paper_metrics())
        assert dt == pytest.approx(2.7501125461935e-11, rel=1e-12)
        assert dt * C == pytest.approx(8.24463e-3, rel=1e-5)

    def test_single_line_grating(self):
        assert device_delta_t(dv.GratingSpec(1, 1), 1550 * NM) == pytest.approx(5.170243475571362e-15, rel=1e-13)

    def test_fabry_perot(self):
        fp = dv.FabryPerotSpec(1.5, 100 * UM, 0.97)
        assert device_delta_t(fp, 1550 * NM, paper_metrics(finesse=100)) == pytest.approx(1.5926512376628434e-11, rel=1e-13)

    def test_awg(self):
        awg = dv.AwgSpec(41, 10 * UM, 1.5)
        assert device_delta_t(awg, 1550 * NM) == pytest.approx(40 * 10e-6 * 1.5 / C, rel=1e-14)

    def test_resonator_needs_finesse(self):
        single = an.SpectralMetrics(None, None, 1e4, 1, 1e-10, 1.5e-6)
        with pytest.raises(DomainError):
            device_delta_t(golden_spec(), 1510 * NM, single)
        with pytest.raises(DomainError):
            device_delta_t(golden_spec(), 1510 * NM, None)

    def test_bad_wavelength(self):
        with pytest.raises(DomainError):
            device_delta_t(dv.GratingSpec(1, 1), 0.0)

    def test_unsupported_device(self):
        with pytest.raises(DomainError):
            device_delta_t(object(), 1550 * NM)
        with pytest.raises(DomainError):
            describe_device(object())


class TestAudit:
    def test_paper_microring(self):
        ring = dv.MicroringSpec.symmetric(25 * UM, 1.814, 0.0163)
        report = audit(ring, paper_metrics(), 1510 * NM)
        assert report.ratio_eq10 == pytest.approx(0.99965407, rel=1e-6)
        assert report.ratio_eq6 == pytest.approx(2 * report.ratio_eq10, rel=1e-15)
        assert report.bound_eq6 == pytest.approx(2.2007608937201e-11, rel=1e-12)
        assert report.verdict == "pass" and report.passed

    def test_wavelength_defaults_to_median_centre(self):
        ring = dv.MicroringSpec.symmetric(25 * UM, 1.814, 0.0163)
        assert audit(ring, paper_metrics()) == audit(ring, paper_metrics(), 1510 * NM)

    def test_simulated_golden_ring(self):
        spectrum = dv.microring_through_spectrum(golden_spec(), golden_grid())
        report = audit(golden_spec(), an.analyze_spectrum(spectrum).metrics)
        assert report.ratio_eq10 == pytest.approx(1.0, abs=0.01)
        assert report.passed

    def test_injected_violation(self):
        ring = golden_spec()
        honest = audit(ring, paper_metrics())
        report = build_report(ring, honest.wavelength, honest.delta_t, honest.bound_eq6 / 2)
        assert report.verdict == "violation" and not report.passed
        assert report.ratio_eq6 == pytest.approx(0.5)

    def test_tolerance_edge(self):
        ring = golden_spec()
        honest = audit(ring, paper_metrics())
        at_edge = build_report(ring, honest.wavelength, honest.delta_t, honest.bound_eq6 * (1 - 0.5 * VERDICT_TOLERANCE))
        below = build_report(ring, honest.wavelength, honest.delta_t, honest.bound_eq6 * (1 - 2 * VERDICT_TOLERANCE))
        assert at_edge.passed and not below.passed

    def test_report_identities(self):
        report = audit(golden_spec(), paper_metrics())
        assert report.bound_eq10 == 2 * report.bound_eq6
        assert report.delta_l == pytest.approx(C * report.delta_t, rel=1e-15)
        assert report.device["type"] == "microring"
        assert report.device["radius"] == 25 * UM

    def test_non_positive_linewidth(self):
        with pytest.raises(DomainError):
            build_report(golden_spec(), 1510 * NM, 1e-11, 0.0)

    def test_deterministic(self):
        assert audit(golden_spec(), paper_metrics()) == audit(golden_spec(), paper_metrics())


@pytest.mark.filterwarnings("ignore::ringlimit.devices.GridResolutionWarning")
def test_random_lossy_rings_respect_both_bounds():
    rng = np.random.default_rng(77)
    for _ in range(25):
        spec = dv.MicroringSpec(rng.uniform(10, 60) * UM, rng.uniform(1.5, 2.5),
                                rng.uniform(0.005, 0.08), rng.uniform(0.005, 0.08),
                                dv.alpha_from_db_per_cm(rng.uniform(0, 3)))
        fsr = dv.microring_fsr(spec, 1550 * NM)
        fwhm = fsr / dv.microring_closed_form_finesse(spec)
        grid = dv.WavelengthGrid.from_step(1550 * NM - 2.5 * fsr, 1550 * NM + 2.5 * fsr, fwhm / 40)
        metrics = an.analyze_spectrum(dv.microring_through_spectrum(spec, grid)).metrics
        report = audit(spec, metrics)
        assert report.passed
        assert 0.9 <= report.ratio_eq10 <= 1.1
