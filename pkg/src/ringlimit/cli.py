"""Command-line entry point: ``ringlimit {simulate,analyze,fit,audit,sweep}``.

Exit codes: 0 success, 1 invalid input, 2 fit did not converge,
3 a device violates the uncertainty bound.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import devices
from .analysis import Analysis, SpectralMetrics, analyze_spectrum
from .audit import audit
from .config import COMMANDS, PER_NM, PER_PM, PER_UM, RunConfig, build_device, parse_config
from .constants import C
from .devices import FabryPerotSpec, MicroringSpec, Spectrum, alpha_from_db_per_cm
from .errors import ConfigError, DomainError, SingularSystemError, SpectrumFormatError
from .fitting import FitProblem, fit_microring, residual_curve
from .spectrum_io import atomic_write_text, format_columns, format_spectrum, read_spectrum

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2
EXIT_VIOLATION = 3

log = logging.getLogger("ringlimit")


def _num(value):
    if value is None:
        return None
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.12g}")
    return value


def render_report(title: str, sections: List[Tuple[str, Dict[str, object]]], fmt: str) -> str:
    """Text (``key = value`` per line) or structured (JSON) report."""
    if fmt == "structured":
        doc = {"report": title}
        for name, body in sections:
            doc[name] = _jsonable(body)
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    out = [f"# {title}"]
    for name, body in sections:
        out.append(f"[{name}]")
        out.extend(_text_lines(body))
    return "\n".join(out) + "\n"


def _jsonable(body):
    if isinstance(body, dict):
        return {k: _jsonable(v) for k, v in body.items()}
    if isinstance(body, (list, tuple)):
        return [_jsonable(v) for v in body]
    return _num(body)


def _text_lines(body, prefix=""):
    lines = []
    if isinstance(body, dict):
        for k, v in body.items():
            lines.extend(_text_lines(v, f"{prefix}{k}" if not prefix else f"{prefix}.{k}"))
    elif isinstance(body, (list, tuple)) and body and isinstance(body[0], dict):
        for i, item in enumerate(body):
            lines.extend(_text_lines(item, f"{prefix}[{i}]"))
    else:
        value = _num(body)
        if isinstance(value, float):
            value = f"{value:.12g}"
        elif isinstance(value, (list, tuple)):
            value = ", ".join(f"{_num(v):.12g}" if isinstance(v, float) else str(v) for v in value)
        elif value is None:
            value = "n/a"
        lines.append(f"{prefix} = {value}")
    return lines


def metrics_section(m: Optional[SpectralMetrics]) -> Dict[str, object]:
    if m is None:
        return {"n_features": 0}
    return {
        "n_features": m.n_features,
        "fsr_nm": None if m.fsr is None else m.fsr * PER_NM,
        "fwhm_pm": m.fwhm * PER_PM,
        "finesse": m.finesse,
        "q_factor": m.q_factor,
        "center_nm": m.center * PER_NM,
    }


def _simulate(config: RunConfig, device, seed: Optional[int]) -> Spectrum:
    grid = config.grid
    if isinstance(device, MicroringSpec):
        port = config.get("simulate.port")
        fn = devices.microring_through_spectrum if port == "through" else devices.microring_drop_spectrum
        spectrum = fn(device, grid)
    elif isinstance(device, FabryPerotSpec):
        spectrum = devices.fabry_perot_spectrum(device, grid)
    else:
        raise ConfigError(f"cannot simulate a {config.device_type} spectrum", "device.type")
    sigma = config.get("simulate.noise_sigma")
    if sigma:
        rng = np.random.default_rng(0 if seed is None else seed)
        spectrum = Spectrum(spectrum.wavelengths, spectrum.transmission + rng.normal(0.0, sigma, len(spectrum)))
    return spectrum


def _load_or_simulate(config: RunConfig, seed: Optional[int]) -> Spectrum:
    path = config.get("input.spectrum")
    if path is not None:
        return read_spectrum(path)
    return _simulate(config, config.device, seed)


def _analyze(config: RunConfig, spectrum: Spectrum) -> Analysis:
    return analyze_spectrum(
        spectrum,
        config.get("analysis.prominence"),
        refine=config.get("analysis.refine"),
        window_fwhm=config.get("analysis.window_fwhm"),
    )


def _device_section(config: RunConfig) -> Dict[str, object]:
    body = {"type": config.device_type}
    for key, value in config.values.items():
        if key.startswith("device.") and key != "device.type":
            body[key.split(".", 1)[1]] = value
    return body


class Runner:
    def __init__(self, config: RunConfig, out: Path, seed: Optional[int] = None,
                 fmt: Optional[str] = None):
        self.config = config
        self.out = Path(out)
        self.seed = seed
        self.fmt = fmt or config.format
        self.files: Dict[str, str] = {}

    def stage(self, name: str, text: str):
        self.files[name] = text

    def report(self, title, sections):
        ext = "json" if self.fmt == "structured" else "txt"
        self.stage(f"{title}.{ext}", render_report(title, sections, self.fmt))

    def commit(self):
        inp = self.config.get("input.spectrum")
        for name, text in sorted(self.files.items()):
            target = self.out / name
            if inp is not None and Path(inp).resolve() == target.resolve():
                raise ConfigError(f"output file {target} would overwrite the input spectrum", "input.spectrum")
        for name, text in sorted(self.files.items()):
            atomic_write_text(self.out / name, text)

    def run(self) -> int:
        command = self.config.command
        code = getattr(self, f"cmd_{command}")()
        self.stage("provenance.log", "\n".join(self.config.provenance) + "\n" if self.config.provenance else "")
        self.stage("config.explicit", self.config.explicit_text())
        self.commit()
        return code

    def cmd_simulate(self) -> int:
        device = self.config.device
        spectrum = _simulate(self.config, device, self.seed)
        self.stage("spectrum.csv", format_spectrum(spectrum))
        centre = 0.5 * (spectrum.wavelengths[0] + spectrum.wavelengths[-1])
        summary = {"points": len(spectrum)}
        if isinstance(device, MicroringSpec):
            summary["fsr_nm"] = devices.microring_fsr(device, centre) * PER_NM
            try:
                summary["finesse_closed_form"] = devices.microring_closed_form_finesse(device)
            except DomainError:
                summary["finesse_closed_form"] = None
            summary["footprint_mm2"] = devices.device_footprint(
                device, margin=self.config.get("device.margin_um") / PER_UM) * 1e6
        else:
            summary["fsr_nm"] = devices.fabry_perot_fsr(device, centre) * PER_NM
            summary["finesse_closed_form"] = devices.fabry_perot_finesse(device)
        self.report("simulate", [("device", _device_section(self.config)), ("spectrum", summary)])
        return EXIT_OK

    def _analysis(self):
        spectrum = _load_or_simulate(self.config, self.seed)
        return spectrum, _analyze(self.config, spectrum)

    def cmd_analyze(self) -> int:
        spectrum, result = self._analysis()
        features = [
            {"center_nm": f.center * PER_NM, "fwhm_pm": f.fwhm * PER_PM, "extremum": f.extremum_value,
             "extinction": f.extinction, "polarity": f.polarity, "estimator": f.estimator}
            for f in result.features
        ]
        self.report("analyze", [
            ("metrics", metrics_section(result.metrics)),
            ("diagnostics", {"dropped": result.dropped, "unconverged_fits": result.unconverged_fits}),
            ("features", features),
        ])
        self.stage("features.dat", format_columns(
            "center_nm,fwhm_pm", [f.center * PER_NM for f in result.features], [f.fwhm * PER_PM for f in result.features]))
        return EXIT_OK

    def _fit_problem(self, data: Spectrum) -> FitProblem:
        v = self.config.values
        init = self.config.device
        changes = {}
        if v.get("fit.init.kappa") is not None:
            changes["kappa1"] = changes["kappa2"] = v["fit.init.kappa"]
        for name in ("kappa1", "kappa2", "n_eff"):
            if v.get(f"fit.init.{name}") is not None:
                changes[name] = v[f"fit.init.{name}"]
        if v.get("fit.init.alpha_db_per_cm") is not None:
            changes["alpha"] = alpha_from_db_per_cm(v["fit.init.alpha_db_per_cm"])
        if v.get("fit.init.radius_um") is not None:
            changes["radius"] = v["fit.init.radius_um"] / PER_UM
        init = replace(init, **changes)
        bounds = {}
        for name, factor in (("kappa", 1.0), ("kappa1", 1.0), ("kappa2", 1.0), ("n_eff", 1.0)):
            if v.get(f"fit.bounds.{name}") is not None:
                bounds[name] = tuple(b * factor for b in v[f"fit.bounds.{name}"])
        if v.get("fit.bounds.alpha_db_per_cm") is not None:
            bounds["alpha"] = tuple(alpha_from_db_per_cm(b) for b in v["fit.bounds.alpha_db_per_cm"])
        if v.get("fit.bounds.radius_um") is not None:
            bounds["radius"] = tuple(b / PER_UM for b in v["fit.bounds.radius_um"])
        return FitProblem(data=data, init=init, free=v["fit.free"], port=v["simulate.port"],
                          bounds=bounds, max_iter=v["fit.max_iter"])

    def cmd_fit(self) -> int:
        data = _load_or_simulate(self.config, self.seed)
        problem = self._fit_problem(data)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = fit_microring(problem)
        for w in caught:
            log.warning("%s", w.message)
        p = result.params
        params = {
            "radius_um": p.radius * PER_UM, "n_eff": p.n_eff, "kappa1": p.kappa1, "kappa2": p.kappa2,
            "alpha_db_per_cm": devices.alpha_to_db_per_cm(p.alpha), "round_trip_amplitude": p.a,
        }
        fit_body = {
            "converged": result.converged, "iterations": result.iterations,
            "rms_residual": result.rms_residual, "ill_conditioned": result.ill_conditioned,
            "condition_number": result.condition_number, "message": result.message,
        }
        variance = {k: v for k, v in result.covariance_diag.items()}
        model = problem.model(p)
        sections = [("fit", fit_body), ("params", params), ("variance", variance)]
        try:
            centre = float(np.median(data.wavelengths))
            sections.append(("model", {
                "fsr_nm": devices.microring_fsr(p, centre) * PER_NM,
                "finesse_closed_form": devices.microring_closed_form_finesse(p),
            }))
        except DomainError:
            pass
        self.report("fit", sections)
        self.stage("fit_model.csv", format_columns("wavelength_nm,transmission", data.wavelengths * PER_NM, model))
        resid = residual_curve(p, problem)
        self.stage("residual.dat", format_columns("wavelength_nm,residual", resid.wavelengths * PER_NM,
                                                  resid.transmission))
        if not result.converged:
            log.error("fit did not converge: %s", result.message)
            return EXIT_NOT_CONVERGED
        return EXIT_OK

    def cmd_audit(self) -> int:
        v = self.config.values
        device = self.config.device
        linewidth = v.get("audit.linewidth_pm")
        if linewidth is not None:
            wavelength = v["audit.wavelength_nm"] / PER_NM
            finesse = v.get("audit.finesse")
            metrics = SpectralMetrics(fsr=None, finesse=finesse, q_factor=wavelength / (linewidth / PER_PM),
                                      n_features=0, fwhm=linewidth / PER_PM, center=wavelength)
            analysis_section = {"source": "config", "linewidth_pm": linewidth, "finesse": finesse}
            span = (wavelength * 0.99, wavelength * 1.01)
        else:
            spectrum, result = self._analysis()
            metrics = result.metrics
            if metrics is None:
                raise DomainError("no resonances found; nothing to audit")
            wl_cfg = v.get("audit.wavelength_nm")
            wavelength = metrics.center if wl_cfg is None else wl_cfg / PER_NM
            analysis_section = {"source": "spectrum", **metrics_section(metrics)}
            span = (spectrum.wavelengths[0], spectrum.wavelengths[-1])
        report = audit(device, metrics, wavelength)
        body = {
            "verdict": report.verdict,
            "wavelength_nm": report.wavelength * PER_NM,
            "delta_t_s": report.delta_t,
            "delta_l_mm": report.delta_l * 1e3,
            "bound_eq6_pm": report.bound_eq6 * PER_PM,
            "bound_eq10_pm": report.bound_eq10 * PER_PM,
            "measured_linewidth_pm": report.measured_linewidth * PER_PM,
            "ratio_eq6": report.ratio_eq6,
            "ratio_eq10": report.ratio_eq10,
        }
        self.report("audit", [("device", _device_section(self.config)), ("analysis", analysis_section),
                              ("hup", body)])
        wl = np.linspace(span[0], span[1], 101)
        bound = wl * wl / (4.0 * np.pi * C * report.delta_t)
        self.stage("hup_bound.dat", format_columns("wavelength_nm,bound_eq6_pm", wl * PER_NM, bound * PER_PM))
        if not report.passed:
            log.error("linewidth %.6g pm is below the uncertainty bound %.6g pm",
                      report.measured_linewidth * PER_PM, report.bound_eq6 * PER_PM)
            return EXIT_VIOLATION
        return EXIT_OK

    def cmd_sweep(self) -> int:
        v = self.config.values
        name = v["sweep.parameter"]
        key = f"device.{name}"
        values = np.linspace(v["sweep.start"], v["sweep.stop"], v["sweep.points"])
        grid = self.config.grid
        rows = []
        for value in values:
            params = dict(v)
            params[key] = float(value)
            if name == "kappa":
                params.pop("device.kappa1", None)
                params.pop("device.kappa2", None)
            try:
                device = build_device(self.config.device_type, params)
            except DomainError as exc:
                raise ConfigError(f"sweep value {value!r} is invalid: {exc}", "sweep.start") from None
            cfg = RunConfig(self.config.command, self.config.device_type, params, self.config.lines)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                spectrum = _simulate(cfg, device, self.seed)
                result = _analyze(cfg, spectrum)
            centre = 0.5 * (grid.start + grid.stop)
            if isinstance(device, MicroringSpec):
                fsr_model = devices.microring_fsr(device, centre)
            else:
                fsr_model = devices.fabry_perot_fsr(device, centre)
            row = {name: float(value), "fsr_model_nm": fsr_model * PER_NM}
            row.update(metrics_section(result.metrics))
            rows.append(row)
        self.report("sweep", [("sweep", {"parameter": name, "points": len(rows)}), ("rows", rows)])
        self.stage("sweep.dat", format_columns(
            f"{name},fsr_nm", [r[name] for r in rows],
            [r["fsr_nm"] if r.get("fsr_nm") is not None else float("nan") for r in rows]))
        return EXIT_OK


def run(config: RunConfig, out, seed: Optional[int] = None, fmt: Optional[str] = None) -> int:
    """Execute ``config`` and write its artifacts under ``out``.

    Files are staged in memory and only written once the command has
    finished, each through a temporary file and rename; a validation
    error therefore leaves no output behind.
    """
    return Runner(config, out, seed, fmt).run()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringlimit", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="configuration file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="seed for noise fixtures (default 0)")
    parser.add_argument("--format", choices=("text", "structured"), default=None,
                        help="report format (overrides output.format)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
        config = parse_config(text, command=args.command)
        for line in config.provenance:
            log.info("%s", line)
        return run(config, args.out, seed=args.seed, fmt=args.format)
    except (ConfigError, DomainError, SpectrumFormatError, SingularSystemError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
