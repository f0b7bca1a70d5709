"""Run configuration: flat key = value files with CLI flag overrides.

All frequencies, lengths, times and temperatures in a config are expressed in
units of the declared reference frequency omega_ref (lengths and times in
1/omega_ref).  Atoms are listed as repeated lines

    atom = omega, x, y, z [, dx, dy, dz]

with the dipole direction defaulting to +z.  Unknown keys are rejected with
the offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np

from .kernels import ELECTROMAGNETIC, SCALAR, AtomArray, FieldSpec

__all__ = ["RunConfig", "parse_config", "ConfigError"]


class ConfigError(ValueError):
    pass


_BOOL = {"true": True, "yes": True, "1": True,
         "false": False, "no": False, "0": False}


@dataclass
class RunConfig:
    """Resolved run configuration (all values in omega_ref units)."""

    omega_ref: float = 1.0
    fieldkind: str = SCALAR
    temperature: float = 0.0
    gamma0: float = 1e-3
    cutoff: float = 1e-4
    renormalize: bool = True
    magnetostatics: bool = True
    atom_rows: list = field(default_factory=list)   # (omega, x, y, z, dx, dy, dz)
    state: str = "ground"
    pair: tuple = (0, 1)
    sweep_var: str = ""
    sweep_start: float = 0.0
    sweep_stop: float = 0.0
    sweep_points: int = 0
    sweep_scale: str = "log"
    times_start: float = 0.0
    times_stop: float = 0.0
    times_points: int = 0
    omega_list: list = field(default_factory=list)
    n_list: list = field(default_factory=list)
    spacing: float = 1e-2
    detuning_start: float = 0.0
    detuning_stop: float = 0.0
    detuning_points: int = 0
    method: str = "numeric"
    output: str = ""

    def atoms(self):
        if not self.atom_rows:
            raise ConfigError("no atoms configured (need at least one atom line)")
        rows = np.asarray(self.atom_rows, dtype=float)
        return AtomArray(
            rows[:, 0] * self.omega_ref,
            rows[:, 1:4] / self.omega_ref,
            rows[:, 4:7],
        )

    def fieldspec(self):
        return FieldSpec(
            kind=self.fieldkind,
            temperature=self.temperature * self.omega_ref,
            gamma0=self.gamma0,
            cutoff_length=self.cutoff / self.omega_ref,
        )

    def sweep_values(self):
        if not self.sweep_var:
            return np.array([])
        if self.sweep_scale == "log":
            return np.geomspace(self.sweep_start, self.sweep_stop,
                                self.sweep_points) / self.omega_ref
        return np.linspace(self.sweep_start, self.sweep_stop,
                           self.sweep_points) / self.omega_ref

    def times(self):
        if self.times_points <= 0:
            raise ConfigError("no time grid configured (times = start,stop,points)")
        return np.linspace(self.times_start, self.times_stop,
                           self.times_points) / self.omega_ref

    def validate(self):
        if self.temperature < 0.0:
            raise ConfigError("temperature must be >= 0")
        if self.gamma0 <= 0.0:
            raise ConfigError("gamma0 must be > 0")
        atoms = self.atoms()
        if np.any(atoms.omegas <= 0.0):
            raise ConfigError("all atom frequencies must be > 0")
        rmin = atoms.min_separation()
        if self.cutoff / self.omega_ref >= rmin:
            raise ConfigError(
                f"cutoff must be below separations (r0={self.cutoff:g}, "
                f"min separation={rmin * self.omega_ref:g})"
            )
        return self

    def header_lines(self):
        """Provenance header echoing the resolved configuration."""
        rows = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "atom_rows":
                for a in value:
                    rows.append("# atom = " + ",".join(f"{x:g}" for x in a))
            else:
                rows.append(f"# {f.name} = {value}")
        return rows


def _parse_atom(value, lineno):
    parts = [p.strip() for p in value.split(",")]
    if len(parts) not in (4, 7):
        raise ConfigError(
            f"line {lineno}: atom needs 'omega,x,y,z[,dx,dy,dz]', got {value!r}"
        )
    try:
        nums = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad atom entry {value!r}: {exc}") from exc
    if len(nums) == 4:
        nums += [0.0, 0.0, 1.0]
    return tuple(nums)


def _parse_triplet(value, lineno, key, n_fixed=3):
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != n_fixed:
        raise ConfigError(f"line {lineno}: {key} needs {n_fixed} comma fields")
    return parts


def _apply(cfg, key, value, lineno):
    key = key.strip()
    value = value.strip()
    try:
        if key == "atom":
            cfg.atom_rows.append(_parse_atom(value, lineno))
        elif key == "field":
            if value not in (SCALAR, ELECTROMAGNETIC, "em"):
                raise ConfigError(f"line {lineno}: unknown field kind {value!r}")
            cfg.fieldkind = ELECTROMAGNETIC if value == "em" else value
        elif key in ("omega_ref", "temperature", "gamma0", "cutoff", "spacing"):
            setattr(cfg, key, float(value))
        elif key in ("renormalize", "magnetostatics"):
            if value.lower() not in _BOOL:
                raise ConfigError(f"line {lineno}: {key} must be true/false")
            setattr(cfg, key, _BOOL[value.lower()])
        elif key == "state":
            cfg.state = value
        elif key == "method":
            if value not in ("numeric", "perturbative"):
                raise ConfigError(f"line {lineno}: method must be numeric or "
                                  f"perturbative")
            cfg.method = value
        elif key == "pair":
            a, b = _parse_triplet(value, lineno, key, 2)
            cfg.pair = (int(a), int(b))
        elif key == "sweep":
            parts = [p.strip() for p in value.split(",")]
            if len(parts) not in (4, 5):
                raise ConfigError(
                    f"line {lineno}: sweep needs 'var,start,stop,points[,scale]'"
                )
            cfg.sweep_var = parts[0]
            cfg.sweep_start = float(parts[1])
            cfg.sweep_stop = float(parts[2])
            cfg.sweep_points = int(parts[3])
            cfg.sweep_scale = parts[4] if len(parts) == 5 else "log"
            if cfg.sweep_var not in ("r", "detuning"):
                raise ConfigError(f"line {lineno}: sweep variable must be r or "
                                  f"detuning")
            if cfg.sweep_scale not in ("log", "lin"):
                raise ConfigError(f"line {lineno}: sweep scale must be log or lin")
        elif key == "times":
            a, b, c = _parse_triplet(value, lineno, key)
            cfg.times_start, cfg.times_stop = float(a), float(b)
            cfg.times_points = int(c)
        elif key == "omega_list":
            cfg.omega_list = [float(p) for p in value.split(",") if p.strip()]
        elif key == "n_list":
            cfg.n_list = [int(p) for p in value.split(",") if p.strip()]
        elif key == "detuning":
            a, b, c = _parse_triplet(value, lineno, key)
            cfg.detuning_start, cfg.detuning_stop = float(a), float(b)
            cfg.detuning_points = int(c)
        elif key == "output":
            cfg.output = value
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return cfg


def parse_config(path=None, overrides=()):
    """Parse a config file plus (key, value) overrides into a RunConfig.

    Overrides are applied after the file (line number 0 in error messages).
    """
    cfg = RunConfig()
    if path is not None:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"line {lineno}: expected 'key = value', "
                                      f"got {raw.strip()!r}")
                key, value = line.split("=", 1)
                _apply(cfg, key, value, lineno)
    for key, value in overrides:
        _apply(cfg, key, value, 0)
    return cfg
