"""Command-line interface: subcommand dispatch, sweeps, CSV emission.

Every run prints a provenance header (the resolved config as comment lines)
followed by a fixed-order CSV with 12 significant digits, so identical
configurations produce byte-identical output.  The worker count for sweep
parallelism is taken from ATOMFIELD_WORKERS (default 1, serial).
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import coefficients as co
from . import darkstates as ds
from .asymptotic import asymptotic_from_nullspace, second_order_correction
from .config import ConfigError, parse_config
from .entanglement import concurrence_trajectory, trajectory_band
from .hilbert import ket_to_dm, min_eigenvalue, parse_state_spec
from .kernels import AtomArray
from .liouvillian import (
    build_liouvillian,
    evolve,
    max_decay_rate_vs_N,
    spectrum_numeric,
    spectrum_perturbative,
)

__all__ = ["main"]

_FMT = "%.12g"


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return _FMT % x


def _emit(cfg, header, rows, out):
    for line in cfg.header_lines():
        print(line, file=out)
    print(",".join(header), file=out)
    for row in rows:
        print(",".join(_fmt(x) for x in row), file=out)


def _workers():
    try:
        return max(1, int(os.environ.get("ATOMFIELD_WORKERS", "1")))
    except ValueError:
        return 1


def _map_ordered(func, items):
    n = _workers()
    if n == 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


def _pair_atoms(cfg, r, detuning=0.0):
    mean = float(np.mean([row[0] for row in cfg.atom_rows])) * cfg.omega_ref
    return AtomArray.pair(mean - detuning / 2.0, mean + detuning / 2.0, r)


def cmd_coefficients(cfg):
    atoms = cfg.atoms()
    fieldspec = cfg.fieldspec()
    branch = (co.BRANCH_ZERO_T if fieldspec.temperature == 0.0
              else co.BRANCH_FINITE_T)
    rows = []
    omegas = list(cfg.omega_list)
    times = (cfg.times() if cfg.times_points > 0 else None)
    for n in range(atoms.n_atoms):
        for m in range(atoms.n_atoms):
            targets = [+atoms.omegas[m], -atoms.omegas[m]]
            targets += [w * cfg.omega_ref for w in omegas]
            for w in targets:
                value = co.coeff(fieldspec, atoms, n, m, w)
                rows.append((n, m, w, "inf", value.real, value.imag, branch))
                if times is not None:
                    series = co.coeff_fulltime_series(fieldspec, atoms, n, m, w,
                                                      times)
                    for t, v in zip(times, series):
                        rows.append((n, m, w, _FMT % t, v.real, v.imag,
                                     "FullTime"))
    return ["n", "m", "omega", "t_or_inf", "re", "im", "branch"], rows


def _mode_label(spectrum, k):
    # dominant dyad of the right eigen-operator in the {00, Psi-, Psi+, 11}
    # basis for pairs; plain index elsewhere
    if spectrum.n_atoms != 2:
        return f"mode{k}"
    s2 = 1.0 / np.sqrt(2.0)
    basis = {
        "00": np.array([1, 0, 0, 0], dtype=complex),
        "Psi-": np.array([0, -s2, s2, 0], dtype=complex),
        "Psi+": np.array([0, s2, s2, 0], dtype=complex),
        "11": np.array([0, 0, 0, 1], dtype=complex),
    }
    op = spectrum.right_operator(k)
    best, label = 0.0, f"mode{k}"
    for na, va in basis.items():
        for nb, vb in basis.items():
            overlap = abs(va.conj() @ op @ vb)
            if overlap > best + 1e-12:
                best, label = overlap, f"{na}|{nb}"
    return label


def _rates_point(args):
    cfg, value = args
    if cfg.sweep_var == "r":
        atoms = _pair_atoms(cfg, value)
    else:
        spacing = cfg.spacing / cfg.omega_ref
        atoms = _pair_atoms(cfg, spacing, detuning=value * cfg.omega_ref)
    fieldspec = cfg.fieldspec()
    lsup = build_liouvillian(fieldspec, atoms, renormalize=cfg.renormalize,
                             magnetostatics=cfg.magnetostatics)
    if cfg.method == "numeric":
        spec = spectrum_numeric(lsup)
    else:
        spec = spectrum_perturbative(fieldspec, atoms,
                                     renormalize=cfg.renormalize,
                                     magnetostatics=cfg.magnetostatics)
    rows = []
    for k, f in enumerate(spec.frequencies):
        rows.append((value * cfg.omega_ref, _mode_label(spec, k),
                     f.real, f.imag, spec.provenance))
    return rows


def cmd_rates(cfg):
    if not cfg.sweep_var:
        raise ConfigError("rates requires a sweep (sweep = var,start,stop,points)")
    values = cfg.sweep_values()
    chunks = _map_ordered(_rates_point, [(cfg, v) for v in values])
    rows = [row for chunk in chunks for row in chunk]
    return ["sweep_var", "mode_label", "re_f", "im_f", "provenance"], rows


def cmd_dynamics(cfg, with_pair):
    atoms = cfg.atoms()
    fieldspec = cfg.fieldspec()
    lsup = build_liouvillian(fieldspec, atoms, renormalize=cfg.renormalize,
                             magnetostatics=cfg.magnetostatics)
    rho0 = parse_state_spec(cfg.state, atoms.n_atoms)
    times = cfg.times()
    if with_pair:
        band = trajectory_band(fieldspec, atoms)
        trace = concurrence_trajectory(
            lsup, rho0, times, pair=cfg.pair,
            pos_tol=max(1e-8, 10.0 * band * band), band=band,
        )
        rows = [
            (t * cfg.omega_ref, uc, max(0.0, uc), -band, band)
            for t, uc in zip(trace.times, trace.uc)
        ]
        return ["t", "uC", "C", "band_lo", "band_hi"], rows
    states = evolve(lsup, rho0, times)
    dim = 2**atoms.n_atoms
    header = ["t"]
    for i in range(dim):
        for j in range(dim):
            header += [f"re_{i}{j}", f"im_{i}{j}"]
    header += ["trace", "min_eig"]
    rows = []
    for t, rho in zip(times, states):
        row = [t * cfg.omega_ref]
        for i in range(dim):
            for j in range(dim):
                row += [rho[i, j].real, rho[i, j].imag]
        row += [np.trace(rho).real, min_eigenvalue(rho)]
        rows.append(tuple(row))
    return header, rows


def cmd_dark_states(cfg, n_atoms, csv_path, out):
    report = ds.build_report(n_atoms, cfg.temperature * cfg.omega_ref,
                             gamma0=cfg.gamma0,
                             cutoff=cfg.cutoff / cfg.omega_ref)
    for line in report.lines():
        print(line, file=out)
    if csv_path:
        rows = []
        proper = ds.proper_dark_basis(n_atoms)
        for col in range(proper.shape[1]):
            for idx in range(proper.shape[0]):
                amp = proper[idx, col]
                if abs(amp) > 1e-14:
                    rows.append(("proper", "0", col, idx, amp.real, amp.imag))
        for j, basis in sorted(ds.improper_dark_basis_T0(n_atoms).items()):
            for col in range(basis.shape[1]):
                for idx in range(basis.shape[0]):
                    amp = basis[idx, col]
                    if abs(amp) > 1e-14:
                        rows.append(("improper", f"{j:g}", col, idx,
                                     amp.real, amp.imag))
        with open(csv_path, "w") as fh:
            print("family,j,state,basis_index,re,im", file=fh)
            for row in rows:
                print(",".join(_fmt(x) for x in row), file=fh)
    return report


def cmd_asymptotic(cfg):
    atoms = cfg.atoms()
    fieldspec = cfg.fieldspec()
    state = second_order_correction(fieldspec, atoms,
                                    magnetostatics=cfg.magnetostatics)
    rho = state.rho
    rows = []
    for i in range(rho.shape[0]):
        for j in range(rho.shape[1]):
            rows.append((i, j, rho[i, j].real, rho[i, j].imag,
                         state.branch, state.valid))
    return ["i", "j", "re", "im", "branch", "valid"], rows


def _ent_point(args):
    cfg, r, d = args
    atoms = _pair_atoms(cfg, r, detuning=d)
    fieldspec = cfg.fieldspec()
    state = second_order_correction(fieldspec, atoms,
                                    magnetostatics=cfg.magnetostatics)
    from .entanglement import unmaximized_concurrence

    rho = state.rho
    uc = unmaximized_concurrence((rho + rho.conj().T) / 2.0, pos_tol=1e-2)
    return (r * cfg.omega_ref, d, uc, cfg.magnetostatics, state.valid)


def cmd_ent_map(cfg):
    if not cfg.sweep_var or cfg.sweep_var != "r":
        raise ConfigError("ent-map requires an r sweep")
    if cfg.detuning_points <= 0:
        raise ConfigError("ent-map requires detuning = start,stop,points")
    r_values = cfg.sweep_values()
    d_values = np.linspace(cfg.detuning_start, cfg.detuning_stop,
                           cfg.detuning_points) * cfg.omega_ref
    tasks = [(cfg, r, d) for r in r_values for d in d_values]
    rows = _map_ordered(_ent_point, tasks)
    return ["r", "detuning", "uC", "magnetostatics", "valid"], rows


def cmd_superradiance(cfg):
    if not cfg.n_list:
        raise ConfigError("superradiance requires n_list = 2,3,...")
    spacing = cfg.spacing / cfg.omega_ref
    fieldspec = cfg.fieldspec()
    table = max_decay_rate_vs_N(lambda n: fieldspec, cfg.omega_ref,
                                cfg.n_list, spacing)
    rows = [(n, spacing * cfg.omega_ref, rate) for n, rate in table]
    return ["n_atoms", "spacing", "max_rate"], rows


def _add_common(parser):
    parser.add_argument("--config", help="config file path")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key")
    parser.add_argument("--output", help="output path (default stdout)")


def _load(args, need_atoms=True):
    overrides = []
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set needs KEY=VALUE, got {item!r}")
        overrides.append(tuple(item.split("=", 1)))
    cfg = parse_config(args.config, overrides)
    if args.output:
        cfg = replace(cfg, output=args.output)
    if need_atoms:
        cfg.validate()
    return cfg


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="atomfield",
        description="Open-system dynamics of two-level atoms in a common field",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("coefficients", "rates", "dynamics", "asymptotic", "ent-map",
                 "superradiance"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "dynamics":
            p.add_argument("--pair", help="atom pair n,m for concurrence output")
    p = sub.add_parser("dark-states")
    _add_common(p)
    p.add_argument("--n", type=int, required=True, help="number of atoms")
    p.add_argument("--temp", type=float, default=0.0,
                   help="temperature in omega_ref units")
    p.add_argument("--csv", help="optional CSV path for basis amplitudes")

    args = parser.parse_args(argv)
    try:
        if args.command == "dark-states":
            cfg = _load(args, need_atoms=False)
            cfg = replace(cfg, temperature=args.temp)
            out = open(cfg.output, "w") if cfg.output else sys.stdout
            try:
                cmd_dark_states(cfg, args.n, args.csv, out)
            finally:
                if cfg.output:
                    out.close()
            return 0

        cfg = _load(args)
        if args.command == "coefficients":
            header, rows = cmd_coefficients(cfg)
        elif args.command == "rates":
            header, rows = cmd_rates(cfg)
        elif args.command == "dynamics":
            pair = getattr(args, "pair", None)
            if pair is not None:
                a, b = pair.split(",")
                cfg = replace(cfg, pair=(int(a), int(b)))
            header, rows = cmd_dynamics(cfg, with_pair=pair is not None)
        elif args.command == "asymptotic":
            header, rows = cmd_asymptotic(cfg)
        elif args.command == "ent-map":
            header, rows = cmd_ent_map(cfg)
        elif args.command == "superradiance":
            header, rows = cmd_superradiance(cfg)
        else:  # pragma: no cover
            raise ConfigError(f"unknown command {args.command!r}")
        out = open(cfg.output, "w") if cfg.output else sys.stdout
        try:
            _emit(cfg, header, rows, out)
        finally:
            if cfg.output:
                out.close()
        return 0
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
