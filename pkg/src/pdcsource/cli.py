"""Command-line interface.

Every subcommand builds its source from defaults < ``--config`` file (or
``$PDCSOURCE_CONFIG``) < flags, echoes the effective configuration into
each file it writes, and exits 0 on success, 2 on invalid input and 1 on
I/O failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .config import ENV_VAR, ConfigError, SourceConfig, parse_config
from .dispersion import RayKind, factorability_check
from .gridio import GridData, GridFormatError, from_jsa, load_grid, save_grid, to_jsa
from .heatmap import render_heatmap
from .ingest import analyze_measured, load_measured
from .interference import dip_curve, reduce, visibility
from .jsa import marginals
from .schmidt import decompose, k_no_phase
from .sweep import AXIS_PARAMS, SweepAxis, SweepSpec, run_sweep
from .temporal import temporal_correlation, temporal_marginal_duration, to_temporal

EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2

# flag dest -> (section, key)
_OVERRIDES = {
    "crystal": ("crystal", "name"),
    "length_mm": ("crystal", "length_mm"),
    "theta_pm_deg": ("crystal", "theta_pm_deg"),
    "orientation": ("crystal", "orientation_sign"),
    "pump_center_nm": ("pump", "center_nm"),
    "pump_fwhm_nm": ("pump", "fwhm_nm"),
    "pump_angle_fwhm_deg": ("pump", "angular_fwhm_deg"),
    "beam_fwhm_um": ("pump", "beam_fwhm_um"),
    "focal_mm": ("pump", "focal_mm"),
    "chirp_nm_per_fwhm": ("pump", "chirp_nm_per_fwhm"),
    "chirp_sign": ("pump", "chirp_sign"),
    "chirp_scale": ("pump", "chirp_scale"),
    "collection_fwhm_deg": ("collection", "fwhm_deg"),
    "grid_n": ("grid", "n"),
    "grid_span_nm": ("grid", "span_nm"),
    "grid_center_nm": ("grid", "center_nm"),
    "n_angles": ("quadrature", "n_angles"),
    "span_widths": ("quadrature", "span_widths"),
    "mode": ("model", "mode"),
    "shape": ("model", "shape"),
}


def _theta(text):
    return text if text == "auto" else float(text)


def _add_source_flags(p):
    g = p.add_argument_group("source (override the config file)")
    g.add_argument("--config", help=f"TOML config or a grid file whose header is reused (default ${ENV_VAR})")
    g.add_argument("--crystal", help="KDP, BBO, or a Sellmeier TOML/JSON file")
    g.add_argument("--length-mm", type=float)
    g.add_argument("--theta-pm-deg", type=_theta, help="cut angle in degrees, or 'auto'")
    g.add_argument("--orientation", help="optic-axis side: positive or negative")
    g.add_argument("--pump-center-nm", type=float)
    g.add_argument("--pump-fwhm-nm", type=float, help="pump intensity FWHM bandwidth")
    g.add_argument("--pump-angle-fwhm-deg", type=float, help="pump angular intensity FWHM")
    g.add_argument("--beam-fwhm-um", type=float, help="collimated beam FWHM diameter (with --focal-mm)")
    g.add_argument("--focal-mm", type=float, help="focusing lens focal length (with --beam-fwhm-um)")
    g.add_argument("--chirp-nm-per-fwhm", type=float)
    g.add_argument("--chirp-sign", help="positive or negative")
    g.add_argument("--chirp-scale", choices=("fundamental", "pump"))
    g.add_argument("--collection-fwhm-deg", type=float)
    g.add_argument("--grid-n", type=int)
    g.add_argument("--grid-span-nm", type=float)
    g.add_argument("--grid-center-nm", type=float)
    g.add_argument("--n-angles", type=int, help="odd number of quadrature angles per axis")
    g.add_argument("--span-widths", type=float, help="quadrature half-span in amplitude widths")
    g.add_argument("--mode", choices=("paired", "full", "planewave"))
    g.add_argument("--shape", choices=("sinc", "gaussian"), help="phasematching profile")
    g.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")


def _add_output(p, required=False):
    p.add_argument("-o", "--output", required=required, help="output path prefix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdcsource",
        description="Joint spectra, Schmidt analysis and HOM predictions for downconversion sources.",
        epilog=f"Exit codes: 0 success, 1 I/O error, 2 invalid input. Default config file: ${ENV_VAR}.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="group velocities and the factorability condition")
    _add_source_flags(p)

    p = sub.add_parser("jsa", help="compute the joint spectral amplitude")
    _add_source_flags(p)
    _add_output(p)
    p.add_argument("--check-convergence", action="store_true", help="rerun with doubled angular sampling, report dK")
    p.add_argument("--scale", type=int, default=4, help="heatmap pixels per cell")

    p = sub.add_parser("schmidt", help="Schmidt decomposition of a JSA")
    _add_source_flags(p)
    _add_output(p)
    p.add_argument("--input", help="JSA grid file (otherwise computed from the config)")
    p.add_argument("--modes", type=int, default=10, help="number of Schmidt coefficients to print")
    p.add_argument("--check-convergence", action="store_true")

    p = sub.add_parser("temporal", help="joint temporal amplitude")
    _add_source_flags(p)
    _add_output(p)
    p.add_argument("--input", help="JSA grid file")
    p.add_argument("--pad", type=int, default=4, help="zero-padding factor")
    p.add_argument("--scale", type=int, default=1)

    p = sub.add_parser("hom", help="Hong-Ou-Mandel dip between two heralded photons")
    _add_source_flags(p)
    _add_output(p)
    p.add_argument("inputs", nargs="*", help="one or two JSA grid files (one is used twice)")
    p.add_argument("--ray", choices=("e", "o"), default="e", help="which photon interferes")
    p.add_argument("--delay-max-fs", type=float, default=1500.0)
    p.add_argument("--delay-steps", type=int, default=301)

    p = sub.add_parser("sweep", help="purity map over two parameters")
    _add_source_flags(p)
    _add_output(p)
    axes_help = "NAME:MIN:MAX:STEPS or NAME=v1,v2,...; NAME in " + ", ".join(AXIS_PARAMS)
    p.add_argument("--rows", required=True, help=axes_help)
    p.add_argument("--cols", required=True, help=axes_help)
    p.add_argument("--fidelity", choices=("reduced", "full"), default="reduced")
    p.add_argument("--scale", type=int, default=16)

    p = sub.add_parser("analyze", help="analyze a measured joint spectral intensity")
    p.add_argument("input", help="measured data file")
    p.add_argument("--format", choices=("csv_grid", "three_column"), default="csv_grid")
    p.add_argument("--ridge-mode", choices=("gaussian_fit", "argmax"), default="gaussian_fit")
    _add_output(p)
    p.add_argument("--scale", type=int, default=4)
    return parser


def _config(args) -> SourceConfig:
    overrides = {}
    for dest, (section, key) in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides.setdefault(section, {})[key] = value
    return parse_config(args.config, overrides)


def _out(args, suffix) -> Path | None:
    if not getattr(args, "output", None):
        return None
    path = Path(args.output + suffix)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write_text(path, text):
    with open(path, "w") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _fit(cfg, args):
    return cfg.to_estimator(n_jobs=args.threads).fit()


def _jsa_from(args, cfg):
    if getattr(args, "input", None):
        g = load_grid(args.input)
        return to_jsa(g), g.config
    return _fit(cfg, args).jsa_, cfg.to_json()


def cmd_check(args, out):
    cfg = _config(args)
    est = cfg.to_estimator()
    crystal, pump = est.crystal_spec(), est.pump_spec()
    rep = factorability_check(crystal, pump)
    lines = [
        f"crystal {cfg.data['crystal']['name']}, L = {crystal.length * 1e3:g} mm, theta_pm = {math.degrees(crystal.theta_pm):.4f} deg",
        f"v_g pump (e-ray)     {rep.v_pump:.6e} m/s",
        f"v_g daughter e-ray   {rep.v_e:.6e} m/s",
        f"v_g daughter o-ray   {rep.v_o:.6e} m/s",
        f"term 1 (pump/o-ray)  {rep.term1:+.4e}",
        f"term 2 (pump/e-ray)  {rep.term2:+.4e}",
        f"residual             {rep.residual:+.4e}",
        f"e-ray transit delay  {rep.delta_tau_e * 1e15:.1f} fs, pump 1/sigma {rep.inverse_bandwidth * 1e15:.1f} fs",
        f"group-velocity matched: {'yes' if rep.gv_matched else 'no'}; long-crystal regime: {'yes' if rep.long_crystal else 'no'}",
    ]
    out.write("\n".join(lines) + "\n")


def _convergence(est, out):
    dK = est.convergence_check()
    out.write(f"convergence: |dK| = {dK:.3e} going from {est.n_angles} to {2 * est.n_angles - 1} angles\n")


def cmd_jsa(args, out):
    cfg = _config(args)
    est = _fit(cfg, args)
    F = est.jsa_
    m = marginals(F)
    out.write(f"K = {est.schmidt_number_:.6f}\nP = {est.purity_:.6f}\n")
    out.write(f"marginal FWHM: e-ray {m.fwhm_e_nm:.3f} nm, o-ray {m.fwhm_o_nm:.3f} nm\n")
    if args.check_convergence:
        _convergence(est, out)
    path = _out(args, ".grid")
    if path:
        save_grid(from_jsa(F, cfg.to_json(), {"chirp_sign": cfg.data["pump"]["chirp_sign"]}), path)
        le, lo = F.grid.wavelengths_nm()
        render_heatmap(F.intensity, _out(args, ".ppm"), args.scale, ("lambda_e [nm]", le, "lambda_o [nm]", lo))
        out.write(f"wrote {path}\n")


def cmd_schmidt(args, out):
    cfg = _config(args)
    F, config_json = _jsa_from(args, cfg)
    res = decompose(F)
    flat = k_no_phase(F.intensity)
    out.write(res.report(args.modes) + "\n")
    out.write(f"K (flat phase) = {flat.K:.6f}\nP (flat phase) = {flat.purity:.6f}\n")
    if args.check_convergence:
        if args.input:
            raise ValueError("--check-convergence needs a computed JSA, not --input")
        _convergence(_fit(cfg, args), out)
    path = _out(args, ".schmidt.txt")
    if path:
        lines = [f"# config: {config_json}", "# j lambda_j"]
        lines += [f"{j} {lam:.17g}" for j, lam in enumerate(res.lambdas)]
        _write_text(path, "\n".join(lines))
        out.write(f"wrote {path}\n")


def cmd_temporal(args, out):
    cfg = _config(args)
    F, config_json = _jsa_from(args, cfg)
    f = to_temporal(F if F.normalized else F.normalize(), pad=args.pad)
    de, do = temporal_marginal_duration(f)
    r = temporal_correlation(f)
    out.write(f"duration FWHM: e-ray {de * 1e15:.1f} fs, o-ray {do * 1e15:.1f} fs\n")
    out.write(f"temporal correlation (t_e, t_o): {r:+.4f}\n")
    path = _out(args, ".jti.grid")
    if path:
        te, to = f.t_e * 1e15, f.t_o * 1e15
        g = GridData("jta", "t_e", "fs", te, "t_o", "fs", to, f.values, config_json, {"pad": args.pad})
        save_grid(g, path)
        render_heatmap(f.intensity, _out(args, ".jti.ppm"), args.scale, ("t_e [fs]", te, "t_o [fs]", to))
        out.write(f"wrote {path}\n")


def cmd_hom(args, out):
    if len(args.inputs) > 2:
        raise ValueError("hom takes at most two JSA grid files")
    which = RayKind.EXTRAORDINARY if args.ray == "e" else RayKind.ORDINARY
    if args.inputs:
        grids = [load_grid(p) for p in args.inputs]
        amps = [to_jsa(g) for g in grids]
        if len(amps) == 2:
            a, b = amps
            same = a.grid.omega_e.shape == b.grid.omega_e.shape and a.grid.omega_o.shape == b.grid.omega_o.shape
            if not (same and np.array_equal(a.grid.omega_e, b.grid.omega_e) and np.array_equal(a.grid.omega_o, b.grid.omega_o)):
                raise ValueError("input grids have different frequency axes; recompute them on a common grid")
        signs = [json.loads(g.config).get("pump", {}).get("chirp_sign") for g in grids]
        out.write("chirp signs: " + ", ".join(str(s) for s in signs) + "\n")
        config_json = grids[0].config
    else:
        cfg = _config(args)
        amps = [_fit(cfg, args).jsa_]
        config_json = cfg.to_json()
    if len(amps) == 1:
        amps = amps * 2
    r1, r2 = (reduce(F if F.normalized else F.normalize(), which) for F in amps)
    V = visibility(r1, r2)
    if args.delay_steps < 4:
        raise ValueError("--delay-steps must be at least 4")
    delays = np.linspace(-args.delay_max_fs, args.delay_max_fs, args.delay_steps) * 1e-15
    curve = dip_curve(r1, r2, delays)
    out.write(f"visibility Tr(rho1 rho2) = {V:.6f}\n")
    if curve.fit is not None:
        fit = curve.fit
        out.write(
            f"gaussian fit: visibility {fit.visibility:.4f}, FWHM {fit.fwhm * 1e15:.1f} fs, "
            f"centre {fit.center * 1e15:.2f} fs, baseline {fit.baseline:.4f}\n"
        )
        if fit.visibility < V - 0.01:
            out.write("note: the dip is not Gaussian; the fitted visibility understates Tr(rho1 rho2)\n")
    path = _out(args, f".hom_{args.ray}.txt")
    if path:
        lines = [f"# config: {config_json}", f"# ray: {args.ray}", f"# visibility: {V:.17g}", "# delay_fs coincidence"]
        lines += [f"{t * 1e15:.17g} {c:.17g}" for t, c in zip(curve.delays, curve.coincidence)]
        _write_text(path, "\n".join(lines))
        out.write(f"wrote {path}\n")


def _parse_axis(text) -> SweepAxis:
    if "=" in text:
        name, _, vals = text.partition("=")
        try:
            values = [float(v) for v in vals.split(",") if v.strip()]
        except ValueError:
            raise ValueError(f"bad value list in sweep axis {text!r}") from None
        return SweepAxis(name.strip(), values=values)
    parts = text.split(":")
    if len(parts) != 4:
        raise ValueError(f"sweep axis {text!r} is not NAME:MIN:MAX:STEPS or NAME=v1,v2,...")
    try:
        lo, hi, steps = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise ValueError(f"bad numbers in sweep axis {text!r}") from None
    return SweepAxis(parts[0].strip(), lo, hi, steps)


def cmd_sweep(args, out):
    cfg = _config(args)
    spec = SweepSpec(_parse_axis(args.rows), _parse_axis(args.cols), cfg.to_estimator(), args.fidelity)
    res = run_sweep(spec, n_jobs=args.threads)
    out.write(f"{res.row_name} (rows) x {res.col_name} (cols), fidelity {res.meta['fidelity']}\n")
    out.write("purity:\n")
    out.write(f"{'':>10s}" + "".join(f"{v:>10.4g}" for v in res.col_values) + "\n")
    for v, row in zip(res.row_values, res.purity):
        out.write(f"{v:>10.4g}" + "".join(f"{p:>10.4f}" for p in row) + "\n")
    for (i, j), err in sorted(res.errors.items()):
        out.write(f"cell ({i}, {j}) failed: {err}\n")
    path = _out(args, ".purity.grid")
    if path:
        meta = {"fidelity": res.meta["fidelity"], "grid_n": res.meta["grid_n"], "n_angles": res.meta["n_angles"]}
        for kind, values, suffix in (("purity", res.purity, ".purity.grid"), ("schmidt_number", res.K, ".K.grid")):
            g = GridData(
                kind,
                res.row_name,
                _SWEEP_UNITS[res.row_name],
                res.row_values,
                res.col_name,
                _SWEEP_UNITS[res.col_name],
                res.col_values,
                values,
                cfg.to_json(),
                meta,
            )
            save_grid(g, _out(args, suffix))
        finite = np.nan_to_num(res.purity, nan=float(np.nanmin(res.purity)) if np.isfinite(res.purity).any() else 0.0)
        render_heatmap(
            finite,
            _out(args, ".purity.ppm"),
            args.scale,
            (res.row_name, res.row_values, res.col_name, res.col_values),
        )
        out.write(f"wrote {path}\n")


_SWEEP_UNITS = {
    "pump_angle_fwhm": "deg",
    "collection_fwhm": "deg",
    "crystal_length": "mm",
    "theta_pm": "deg",
    "pump_wavelength": "nm",
    "chirp_nm_per_fwhm": "nm",
    "chirp_sign": "1",
}


def cmd_analyze(args, out):
    d = load_measured(args.input, args.format)
    rep = analyze_measured(d, ridge_mode=args.ridge_mode)
    out.write(rep.text() + "\n")
    path = _out(args, ".report.txt")
    if path:
        lines = [
            f"K_no_phase {rep.K_no_phase:.17g}",
            f"P_no_phase {rep.P_no_phase:.17g}",
            f"fwhm_e_nm {rep.fwhm_e_nm:.17g}",
            f"fwhm_o_nm {rep.fwhm_o_nm:.17g}",
            "# ridge: lambda_o_nm lambda_e_centre_nm",
        ]
        lines += [f"{o:.17g} {e:.17g}" for o, e in zip(rep.ridge_o_nm, rep.ridge_e_nm)]
        _write_text(path, "\n".join(lines))
        render_heatmap(d.intensity, _out(args, ".ppm"), args.scale, ("lambda_e [nm]", d.lambda_e, "lambda_o [nm]", d.lambda_o))
        out.write(f"wrote {path}\n")


COMMANDS = {
    "check": cmd_check,
    "jsa": cmd_jsa,
    "schmidt": cmd_schmidt,
    "temporal": cmd_temporal,
    "hom": cmd_hom,
    "sweep": cmd_sweep,
    "analyze": cmd_analyze,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("pdcsource: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        COMMANDS[args.command](args, out)
    except (ConfigError, GridFormatError, ValueError, ArithmeticError) as exc:
        print(f"pdcsource: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"pdcsource: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
