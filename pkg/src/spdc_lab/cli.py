"""Command-line interface.

    spdc-lab <command> --config <path> --out <dir>
             [--grid-resolution N] [--walk-off]
             [--alpha-convention paper|consistent]

Commands: metrics, jsa, sweep-rate, sweep-ratio, optimize,
dispersion-report. All outputs are CSV/JSON; every report embeds the fully
resolved configuration. Exit codes: 0 success, 2 computation/validation
error, 3 I/O error.
"""

import argparse
import json
import os
import sys
from importlib import resources

from .config import load_config
from .dispersion import (
    effective_nonlinearity,
    external_angle,
    inverse_group_velocity,
    walk_off_angle,
    wave_number,
)
from .errors import SpdcLabError
from .jsa import jsa_grid, write_jsa_csv, write_jsa_json
from .metrics import compute_metrics
from .schmidt import schmidt_purity, write_schmidt_csv  # noqa: F401
from .sweep import (
    metrics_vs_waist_ratio,
    optimize,
    rate_vs_pump_waist,
    write_sweep_csv,
)
from .units import rad_to_deg

COMMANDS = (
    "metrics",
    "jsa",
    "sweep-rate",
    "sweep-ratio",
    "optimize",
    "dispersion-report",
)

_ALPHA_MAP = {"paper": "paper_literal", "consistent": "consistent"}


def shipped_config_path(name):
    """Absolute path of a packaged example configuration."""
    fname = name if name.endswith(".json") else name + ".json"
    return str(resources.files("spdc_lab").joinpath("data", "configs", fname))


def _write_json(doc, path):
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _report_to_doc(report, resolved):
    doc = report.to_dict()
    doc["config"] = resolved
    return doc


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spdc-lab",
        description="Pair-source figures of merit for bulk-crystal SPDC",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument(
        "--grid-resolution", type=int, default=None, help="override numerics.grid_resolution"
    )
    parser.add_argument(
        "--walk-off", action="store_true", help="enable the longitudinal walk-off envelope"
    )
    parser.add_argument(
        "--alpha-convention",
        choices=sorted(_ALPHA_MAP),
        default=None,
        help="convention for the Gaussian-model coefficients",
    )
    parser.add_argument("--sweep-min", type=float, default=None, help="sweep lower bound (um or ratio)")
    parser.add_argument("--sweep-max", type=float, default=None, help="sweep upper bound (um or ratio)")
    parser.add_argument("--steps", type=int, default=None, help="number of sweep samples")
    return parser


def _run(args):
    cfg = load_config(args.config)
    numerics = dict(cfg.numerics)
    if args.grid_resolution is not None:
        numerics["grid_resolution"] = args.grid_resolution
    if args.walk_off:
        numerics["walk_off_enabled"] = True
    if args.alpha_convention is not None:
        numerics["alpha_convention"] = _ALPHA_MAP[args.alpha_convention]
    resolved = dict(cfg.resolved)
    resolved["numerics"] = dict(numerics)
    out = args.out
    os.makedirs(out, exist_ok=True)
    common = dict(
        grid_resolution=numerics["grid_resolution"],
        decompose=numerics["decompose"],
        dispersion_mode=numerics["dispersion_mode"],
        walk_off=numerics["walk_off_enabled"],
        truncation=numerics["truncation_max_order"],
        rate_resolution=numerics["rate_resolution"],
        singles_resolution=numerics["singles_resolution"],
    )

    if args.command == "metrics":
        report = compute_metrics(
            cfg.geom, cfg.crystal, cfg.filters, settings_snapshot=resolved, **common
        )
        _write_json(_report_to_doc(report, resolved), os.path.join(out, "metrics_report.json"))
        with open(os.path.join(out, "metrics_summary.csv"), "w") as fh:
            fh.write("R,Rs,Ri,eta,purity\n")
            fh.write(
                "%.9e,%.9e,%.9e,%.9e,%.9e\n"
                % (
                    report.pair_rate_R,
                    report.singles_rate_s,
                    report.singles_rate_i,
                    report.heralding_eta,
                    report.purity_P,
                )
            )

    elif args.command == "jsa":
        grid = jsa_grid(
            numerics["grid_resolution"],
            cfg.geom,
            cfg.crystal,
            cfg.filters.signal,
            cfg.filters.idler,
            dispersion_mode=numerics["dispersion_mode"],
            walk_off=numerics["walk_off_enabled"],
        )
        write_jsa_csv(grid, os.path.join(out, "jsa_grid.csv"))
        write_jsa_json(grid, os.path.join(out, "jsa_grid.json"))
        _write_json({"config": resolved}, os.path.join(out, "resolved_config.json"))

    elif args.command == "sweep-rate":
        lo = (args.sweep_min or 50.0) * 1e-6
        hi = (args.sweep_max or 800.0) * 1e-6
        steps = args.steps or 76
        result = rate_vs_pump_waist(
            (lo, hi),
            steps,
            cfg.geom,
            cfg.crystal,
            cfg.filters,
            rate_resolution=numerics["rate_resolution"],
            grid_resolution=numerics["grid_resolution"],
            decompose=numerics["decompose"],
            dispersion_mode=numerics["dispersion_mode"],
            walk_off=numerics["walk_off_enabled"],
        )
        write_sweep_csv(result.rows, os.path.join(out, "sweep_rate.csv"))
        _write_json(
            {
                "argmax_W0p_um": result.argmax_value * 1e6,
                "argmax_index": result.argmax_index,
                "config": resolved,
            },
            os.path.join(out, "sweep_rate.json"),
        )

    elif args.command == "sweep-ratio":
        lo = args.sweep_min or 0.3
        hi = args.sweep_max or 1.1
        steps = args.steps or 17
        result = metrics_vs_waist_ratio(
            (lo, hi),
            steps,
            cfg.geom.W0p,
            cfg.geom,
            cfg.crystal,
            cfg.filters,
            **common,
        )
        write_sweep_csv(result.rows, os.path.join(out, "sweep_ratio.csv"))
        _write_json({"config": resolved}, os.path.join(out, "sweep_ratio.json"))

    elif args.command == "optimize":
        result = optimize(
            cfg.geom,
            cfg.crystal,
            cfg.filters,
            alpha_convention=numerics["alpha_convention"],
            **common,
        )
        doc = {
            "W0p_star_um": result.W0p_star * 1e6,
            "W0s_closed_form_um": result.W0s_closed_form * 1e6,
            "W0s_purity_star_um": result.W0s_purity_star * 1e6,
            "W0s_intersection_um": (
                None
                if result.W0s_intersection is None
                else result.W0s_intersection * 1e6
            ),
            "intersection_found": result.intersection_found,
            "metrics": {k: v.to_dict() for k, v in result.metrics.items()},
            "config": resolved,
        }
        _write_json(doc, os.path.join(out, "optimization.json"))

    elif args.command == "dispersion-report":
        crystal, geom = cfg.crystal, cfg.geom
        rows = []
        for mode in geom.modes:
            theta = crystal.cut_angle_theta if mode.polarization == "extraordinary" else 0.0
            k0 = float(
                wave_number(mode.central_angular_frequency, mode, theta, crystal)
            )
            N = inverse_group_velocity(mode, theta, crystal)
            rows.append((mode.role, mode.central_wavelength * 1e9, k0, N))
        with open(os.path.join(out, "dispersion_report.csv"), "w") as fh:
            fh.write("role,wavelength_nm,k_rad_per_m,inverse_group_velocity_s_per_m\n")
            for role, lam_nm, k0, N in rows:
                fh.write("%s,%.6f,%.9e,%.9e\n" % (role, lam_nm, k0, N))
        doc = {
            "collinear_cut_angle_deg": resolved["crystal"]["collinear_cut_angle_deg"],
            "cut_angle_deg": resolved["crystal"]["cut_angle_deg"],
            "theta_s_deg": resolved["collection"]["theta_s_deg"],
            "theta_i_deg": resolved["collection"]["theta_i_deg"],
            "external_full_angle_deg": rad_to_deg(
                external_angle(geom.theta_s, geom.signal.central_wavelength, crystal)
                + external_angle(geom.theta_i, geom.idler.central_wavelength, crystal)
            ),
            "pump_walk_off_deg": rad_to_deg(
                walk_off_angle(
                    crystal.cut_angle_theta, geom.pump.central_wavelength, crystal
                )
            ),
            "d_eff_pm_per_V": effective_nonlinearity(
                crystal.cut_angle_theta, crystal.azimuth_phi, crystal
            ),
            "config": resolved,
        }
        _write_json(doc, os.path.join(out, "dispersion_report.json"))

    else:  # pragma: no cover - argparse restricts choices
        raise ValueError("unknown command %r" % (args.command,))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (SpdcLabError, ValueError, ArithmeticError) as exc:
        _emit_error(args, exc)
        return 2
    except OSError as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 3


def _emit_error(args, exc):
    doc = {"error": str(exc), "type": type(exc).__name__}
    print(json.dumps(doc), file=sys.stderr)
    try:
        os.makedirs(args.out, exist_ok=True)
        _write_json(doc, os.path.join(args.out, "error.json"))
    except OSError:
        pass


if __name__ == "__main__":
    sys.exit(main())
