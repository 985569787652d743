"""Command-line interface: parse configs, dispatch subcommands, write artifacts.

Every command writes a CSV artifact plus a JSON metadata sidecar embedding
the resolved raw config, so any output re-runs from its own sidecar.

Exit codes: 0 success, 2 configuration/usage error, 3 steady-state timeout
(diagnostics JSON still written).
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .config import ConfigError, RunConfig
from .constants import from_ns, to_ghz, to_mphi0
from .dynamics import (
    SteadyStateTimeoutError,
    build_dissipators,
    evolve,
    thermal_state,
)
from .models import (
    LabelingError,
    PerturbativeValidityError,
    bs_hamiltonian,
    eigensystem,
    jc_hamiltonian,
    label_dressed,
    rabi_hamiltonian,
)
from .operators import HilbertSpace
from .presets import PRESETS
from .spectroscopy import (
    calibrate,
    excited_probability,
    ground_population,
    line_trace,
    observable_sigma_z,
    sweep,
    transduce,
)

_COMMANDS = ("levels", "elements", "ratio", "trace", "sweep", "evolve",
             "steady", "calibrate")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rabispec",
        description="Driven-dissipative flux-qubit/resonator spectroscopy simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="flat key=value config file")
        p.add_argument("--preset", choices=sorted(PRESETS),
                       help="bundled parameter set (config file keys override it)")
        p.add_argument("--out", type=Path, default=Path("."),
                       help="output directory (default: current)")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--n-fock", type=int, default=None)
        p.add_argument("--allow-nonperturbative", action="store_true",
                       help="skip the lambda < 0.2 dispersive validity guard")
        if name == "calibrate":
            p.add_argument("--measured", type=Path, required=True,
                           help="measured trace CSV: freq_ghz,p_switch")
    return parser


def _load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.preset:
        cfg.update(PRESETS[args.preset])
    if args.config:
        cfg.update(RunConfig.from_file(args.config).raw)
    if args.n_fock is not None:
        cfg.update({"n_fock": args.n_fock})
    if args.threads is not None:
        cfg.update({"threads": args.threads})
    return cfg


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_meta(path: Path, cfg: RunConfig, extra: dict | None = None) -> None:
    meta = {"version": __version__, "config": cfg.to_dict()}
    if extra:
        meta.update(extra)
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _labeled_system(cfg: RunConfig, params, space, enforce: bool):
    model = cfg.get("model")
    if model == "rabi":
        h = rabi_hamiltonian(params, space)
    elif model == "jc":
        h = jc_hamiltonian(params, space)
    elif model == "bs":
        h = bs_hamiltonian(params, space, enforce_validity=enforce)
    else:
        raise ConfigError(f"unknown model {model!r}")
    return label_dressed(eigensystem(h), params, space, n_max=cfg.n_labeled(),
                         variant=cfg.get("mixing_variant"), enforce_validity=enforce)


def _cmd_levels(cfg: RunConfig, args) -> int:
    space = HilbertSpace(n_fock=cfg.n_fock())
    flux_axis = cfg.flux_axis()
    if len(flux_axis) == 1 and "flux_points" not in cfg.raw:
        # level diagrams want a flux span; default to +-3 mPhi0
        cfg.update({"flux_start_mphi0": -3.0, "flux_stop_mphi0": 3.0,
                    "flux_points": 61})
        flux_axis = cfg.flux_axis()
    rows = []
    max_level = min(int(cfg.get("max_level")), space.dim)
    for flux in flux_axis:
        params = cfg.system_params().at_flux(flux)
        es = _labeled_system(cfg, params, space,
                             enforce=not args.allow_nonperturbative)
        for k in range(max_level):
            parity = "" if es.parities is None else int(es.parities[k])
            rows.append([
                f"{to_mphi0(flux):.9g}", k,
                f"{to_ghz(es.energies[k]):.9g}",
                f"{to_ghz(es.energies[k] - es.energies[0]):.9g}",
                es.labels[k] if es.labels else "", parity,
            ])
    out = args.out / "levels.csv"
    _write_csv(out, ("flux_mPhi0", "level", "energy_GHz", "rel_energy_GHz",
                     "label", "parity"), rows)
    _write_meta(args.out / "levels.meta.json", cfg)
    print(f"wrote {out}")
    return 0


def _cmd_elements(cfg: RunConfig, args) -> int:
    from .transitions import transition_table
    space = HilbertSpace(n_fock=cfg.n_fock())
    params = cfg.system_params()
    es = _labeled_system(cfg, params, space, enforce=not args.allow_nonperturbative)
    table = transition_table(es, space, max_level=min(int(cfg.get("max_level")), es.dim))
    rows = [[r.from_label, r.to_label, f"{to_ghz(r.frequency):.9g}",
             f"{r.element_resonator:.9g}", f"{r.element_sigma_x:.9g}",
             f"{r.element_sigma_z:.9g}",
             "" if r.parity_allowed_at_sweet_spot is None
             else str(r.parity_allowed_at_sweet_spot).lower()]
            for r in table.rows]
    out = args.out / "elements.csv"
    _write_csv(out, ("from_label", "to_label", "frequency_GHz",
                     "element_resonator", "element_sigma_x", "element_sigma_z",
                     "parity_allowed"), rows)
    _write_meta(args.out / "elements.meta.json", cfg)
    print(f"wrote {out}")
    return 0


def _cmd_ratio(cfg: RunConfig, args) -> int:
    from .transitions import ratio_curve
    g_over_wr = cfg.get("g_over_wr")
    if not g_over_wr:
        raise ConfigError("ratio needs the g_over_wr config key")
    space = HilbertSpace(n_fock=cfg.n_fock())
    params = cfg.system_params()
    model = cfg.get("model")
    res = ratio_curve(params, g_over_wr, drive="resonator", model=model,
                      space=space, variant=cfg.get("mixing_variant"))
    qub = ratio_curve(params, g_over_wr, drive="qubit", model=model,
                      space=space, variant=cfg.get("mixing_variant"))
    rows = [[f"{x:.9g}", f"{rr:.9g}", f"{rq:.9g}", model]
            for (x, rr), (_, rq) in zip(res, qub)]
    out = args.out / "ratio.csv"
    _write_csv(out, ("g_over_wr", "ratio_resonator", "ratio_qubit", "model"), rows)
    _write_meta(args.out / "ratio.meta.json", cfg)
    print(f"wrote {out}")
    return 0


def _run_sweep(cfg: RunConfig, args, single_flux: bool):
    sweep_cfg = cfg.sweep_config()
    threads = int(cfg.get("threads"))
    if single_flux:
        if len(sweep_cfg.flux_offsets) != 1:
            raise ConfigError("trace needs a single flux point "
                              "(flux_offset_mphi0, not a flux axis)")
        return line_trace(sweep_cfg, threads=threads)
    return sweep(sweep_cfg, threads=threads)


def _cmd_trace(cfg: RunConfig, args) -> int:
    result = _run_sweep(cfg, args, single_flux=True)
    out = args.out / "trace.csv"
    result.to_csv(out)
    result.metadata["config"] = cfg.to_dict()
    result.write_metadata(args.out / "trace.meta.json")
    print(f"wrote {out}")
    return 0


def _cmd_sweep(cfg: RunConfig, args) -> int:
    result = _run_sweep(cfg, args, single_flux=False)
    out = args.out / "sweep.csv"
    result.to_csv(out)
    result.metadata["config"] = cfg.to_dict()
    result.write_metadata(args.out / "sweep.meta.json")
    print(f"wrote {out}")
    return 0


def _initial_state(cfg: RunConfig, es, temperature: float) -> np.ndarray:
    name = str(cfg.get("initial_state"))
    if name == "thermal":
        return thermal_state(es, temperature)
    if name == "ground":
        return thermal_state(es, 0.0)
    idx = es.label_index(name)   # dressed label like '1-'
    rho = np.zeros((es.dim, es.dim), dtype=complex)
    rho[idx, idx] = 1.0
    return rho


def _cmd_evolve(cfg: RunConfig, args) -> int:
    space = HilbertSpace(n_fock=cfg.n_fock())
    params = cfg.system_params()
    es = label_dressed(eigensystem(rabi_hamiltonian(params, space)), params, space,
                       n_max=cfg.n_labeled(), variant=cfg.get("mixing_variant"),
                       enforce_validity=not args.allow_nonperturbative)
    diss = build_dissipators(es, space, cfg.channels())
    drive = cfg.drive()
    drive.warn_if_strong(params)
    temperature = cfg.si("temperature_mk")
    rho0 = _initial_state(cfg, es, temperature)
    dt = None
    if "dt_ps" in cfg.raw:
        dt = float(cfg.raw["dt_ps"]) * 1e-12
    times, rhos = evolve(rho0, drive, diss, es, space,
                         t_end=from_ns(float(cfg.get("t_end_ns"))), dt=dt,
                         n_samples=int(cfg.get("samples")))
    labels = ("ground", "1-", "1+", "2-", "2+")
    idx = {lbl: es.label_index(lbl) for lbl in labels if lbl in (es.labels or [])}
    rows = []
    for t, rho in zip(times, rhos):
        row = [f"{t * 1e9:.9g}"]
        row += [f"{rho[i, i].real:.9g}" for i in idx.values()]
        row += [f"{observable_sigma_z(rho, es, params, space):.9g}",
                f"{excited_probability(rho):.9g}",
                f"{np.trace(rho).real:.12g}"]
        rows.append(row)
    header = ["t_ns"] + [f"pop_{lbl}" for lbl in idx] + ["sigma_z", "excited_prob", "trace"]
    out = args.out / "evolve.csv"
    _write_csv(out, header, rows)
    _write_meta(args.out / "evolve.meta.json", cfg)
    print(f"wrote {out}")
    return 0


def _cmd_steady(cfg: RunConfig, args) -> int:
    drive_axis = np.array([cfg.require("drive_ghz")])
    sweep_cfg = cfg.sweep_config(drive_axis=drive_axis)
    result = line_trace(sweep_cfg)
    record = result.records[0]
    if record.error:
        _write_meta(args.out / "steady.diagnostics.json", cfg,
                    {"error": record.error, "windows": record.windows,
                     "residual": record.residual})
        print(f"steady-state search failed: {record.error}", file=sys.stderr)
        return 3
    out = args.out / "steady.csv"
    result.to_csv(out)
    result.metadata["config"] = cfg.to_dict()
    result.write_metadata(args.out / "steady.meta.json")
    print(f"wrote {out}")
    return 0


def _read_measured(path: Path):
    freqs, values = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                f, v = float(row[0]), float(row[1])
            except ValueError:
                continue   # header line
            freqs.append(f)
            values.append(v)
    if not freqs:
        raise ConfigError(f"no numeric (freq, value) rows in {path}")
    return np.array(freqs), np.array(values)


def _cmd_calibrate(cfg: RunConfig, args) -> int:
    freqs, values = _read_measured(args.measured)
    grids = cfg.calibration_grids()
    sweep_cfg = cfg.sweep_config()
    result = calibrate(sweep_cfg, freqs, values, grids,
                       threads=int(cfg.get("threads")))
    with open(args.out / "calibrate.json", "w") as fh:
        json.dump({"best": result.best, "residual": result.residual,
                   "config": cfg.to_dict()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    rows = [[json.dumps(point, sort_keys=True), f"{residual:.9g}"]
            for point, residual in result.landscape]
    _write_csv(args.out / "calibrate_landscape.csv", ("parameters", "residual"), rows)
    print(f"wrote {args.out / 'calibrate.json'}")
    return 0


_DISPATCH = {
    "levels": _cmd_levels,
    "elements": _cmd_elements,
    "ratio": _cmd_ratio,
    "trace": _cmd_trace,
    "sweep": _cmd_sweep,
    "evolve": _cmd_evolve,
    "steady": _cmd_steady,
    "calibrate": _cmd_calibrate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        args.out.mkdir(parents=True, exist_ok=True)
        return _DISPATCH[args.command](cfg, args)
    except (ConfigError, PerturbativeValidityError, LabelingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SteadyStateTimeoutError as exc:
        diag = exc.diagnostics
        with open(args.out / "timeout.diagnostics.json", "w") as fh:
            json.dump({"error": str(exc), "windows": diag.windows_used,
                       "residual": diag.residual, "periods": diag.periods},
                      fh, indent=2)
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
