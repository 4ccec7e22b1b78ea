"""Command-line orchestration: simulate, rom, reconstruct, vorticity.

Reads a flat ``key = value`` config file, runs the solver and the mode
selection pipeline, and writes KSNP snapshot files plus CSV reports
(spectrum, per-time errors, summary table, field and vorticity grids).

Exit codes: 0 success, 1 selection did not converge (or decomposition
failure), 2 solver failure, 3 I/O or config failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import dmd, rom, snapshots, swe
from .errors import (BadMagic, CflViolation, CorruptHeader, IndexOutOfRange,
                     InvalidValue, NonPositiveDepth, ParseError, RankDeficient,
                     ToolkitError, UnknownKey, UnsupportedVersion)

_FIELDS = ("h", "u", "v")


@dataclass(frozen=True)
class ExperimentConfig:
    nx: int = 129
    ny: int = 65
    constants: swe.PhysicalConstants = swe.PhysicalConstants()
    snapshot_dt: float = 1800.0
    n_snapshots: int = 289
    cfl: float = 0.8
    epsilon: float = 1e-3
    fields: tuple[str, ...] = _FIELDS
    output_dir: str = "."
    nondimensionalize: bool = True


_CONSTANT_KEYS = ("coriolis_f0", "coriolis_beta", "gravity", "orography_amplitude",
                  "mean_depth", "shear_depth", "wave_depth", "channel_length",
                  "channel_width")
_KEYS = ("nx", "ny", "snapshot_dt", "n_snapshots", "cfl", "epsilon", "fields",
         "output_dir", "nondimensionalize") + _CONSTANT_KEYS


def _parse_value(key: str, text: str):
    try:
        if key in ("nx", "ny", "n_snapshots"):
            return int(text)
        if key in ("snapshot_dt", "cfl", "epsilon") or key in _CONSTANT_KEYS:
            return float(text)
        if key == "nondimensionalize":
            low = text.lower()
            if low in ("true", "false"):
                return low == "true"
            raise ValueError("expected true or false")
        if key == "fields":
            names = tuple(p.strip() for p in text.split(",") if p.strip())
            if not names or any(n not in _FIELDS for n in names):
                raise ValueError(f"fields must be a non-empty subset of {_FIELDS}")
            return names
        return text  # output_dir
    except ValueError as exc:
        raise InvalidValue(f"{key} = {text!r}: {exc}") from exc


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if not 0.0 < cfg.epsilon < 1.0:
        raise InvalidValue(f"epsilon = {cfg.epsilon} outside (0, 1)")
    if cfg.n_snapshots < 2:
        raise InvalidValue(f"n_snapshots = {cfg.n_snapshots} < 2")
    if cfg.nx < 4 or cfg.ny < 4:
        raise InvalidValue(f"grid {cfg.nx}x{cfg.ny} below the 4x4 minimum")
    if not cfg.cfl > 0:
        raise InvalidValue(f"cfl = {cfg.cfl} must be positive")
    if not cfg.snapshot_dt > 0:
        raise InvalidValue(f"snapshot_dt = {cfg.snapshot_dt} must be positive")
    for key in _CONSTANT_KEYS:
        val = getattr(cfg.constants, key)
        if not np.isfinite(val):
            raise InvalidValue(f"{key} = {val} is not finite")
    return cfg


def parse_config(path) -> ExperimentConfig:
    """Parse ``key = value`` lines; '#' starts a comment; unknown keys fail."""
    values = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(path, line_no, f"expected 'key = value', got {raw.strip()!r}")
            key, _, text = line.partition("=")
            key = key.strip()
            text = text.strip()
            if key not in _KEYS:
                raise UnknownKey(f"{path}:{line_no}: unknown key {key!r}")
            if not text:
                raise ParseError(path, line_no, f"empty value for {key!r}")
            values[key] = _parse_value(key, text)

    const_kwargs = {k: values.pop(k) for k in list(values) if k in _CONSTANT_KEYS}
    try:
        constants = swe.PhysicalConstants(**const_kwargs)
    except ValueError as exc:
        raise InvalidValue(str(exc)) from exc
    return _validate(ExperimentConfig(constants=constants, **values))


def _load_config(args) -> ExperimentConfig:
    cfg = parse_config(args.config) if args.config else _validate(ExperimentConfig())
    if getattr(args, "out", None):
        cfg = replace(cfg, output_dir=args.out)
    if getattr(args, "eps", None) is not None:
        cfg = _validate(replace(cfg, epsilon=args.eps))
    if getattr(args, "field", None):
        cfg = replace(cfg, fields=(args.field,))
    return cfg


# --- pipeline pieces ---

def _run_simulation(cfg: ExperimentConfig):
    grid = swe.Grid.for_channel(cfg.nx, cfg.ny, cfg.constants)
    states = swe.simulate(cfg.constants, grid, cfg.snapshot_dt, cfg.n_snapshots,
                          cfl=cfg.cfl)
    mass0 = swe.total_mass(states[0], grid)
    mass1 = swe.total_mass(states[-1], grid)
    drift = (mass1 - mass0) / mass0
    print(f"mass: initial {mass0:.10e}, final {mass1:.10e}, relative drift {drift:.3e}")
    dt = cfg.snapshot_dt
    if cfg.nondimensionalize:
        scales = swe.ScaleSet.from_initial_state(states[0], cfg.constants)
        states = swe.nondimensionalize(states, scales)
        grid = grid.scaled(scales.l_ref)
        dt = cfg.snapshot_dt / scales.t_ref
    return states, grid, dt


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    states, grid, dt = _run_simulation(cfg)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name in cfg.fields:
        fields = [getattr(s, name) for s in states]
        matrix = snapshots.assemble(fields, dt, snapshots.FieldTag[name], grid,
                                    nondimensional=cfg.nondimensionalize)
        path = outdir / f"{name}.ksnp"
        snapshots.save(matrix, path)
        print(f"wrote {path} ({matrix.n_snapshots} snapshots of {grid.ny}x{grid.nx})")
    return 0


def _decompose(matrix: snapshots.SnapshotMatrix):
    """Fit, eigendecompose and project amplitudes, truncating the
    snapshot window when the data matrix is rank deficient."""
    try:
        pair = snapshots.split(matrix)
        fit = dmd.fit_companion(pair)
    except RankDeficient as exc:
        keep = exc.rank + 1
        print(f"rank {exc.rank} < {exc.n_columns}: truncating window to the "
              f"first {keep} snapshots")
        matrix = replace(matrix, data=matrix.data[:, :keep])
        pair = snapshots.split(matrix)
        fit = dmd.fit_companion(pair)
    dec = dmd.eigendecompose(fit, pair, matrix.dt)
    dmd.compute_amplitudes(dec, matrix)
    return matrix, dec


@dataclass(frozen=True)
class FieldRomReport:
    field: str
    full_rank: int
    n_dmd: int
    reduction_percent: float
    achieved_error: float
    converged: bool


def _spectrum_rows(dec, model, weights):
    order = rom._selection_order(dec, weights)
    flat = [j for group in order for j in group]
    chosen = set(model.selected)
    rows = []
    for j in flat:
        lam = dec.lambdas[j]
        s = dec.exponents[j]
        rows.append((j, lam.real, lam.imag, s.real, s.imag,
                     weights[j], 1 if j in chosen else 0,
                     abs(dec.amplitudes[j])))
    return rows


def _write_spectrum(path, rows):
    with open(path, "w", newline="") as fh:
        fh.write("index,re_lambda,im_lambda,sigma,omega,weight,selected,amp_abs\n")
        for j, re_l, im_l, sig, om, w, sel, amp in rows:
            fh.write(f"{j},{re_l:.17g},{im_l:.17g},{sig:.17g},{om:.17g},"
                     f"{w:.17g},{sel},{amp:.17g}\n")


def _write_errors(path, matrix, errors):
    with open(path, "w", newline="") as fh:
        fh.write("snapshot,time,rel_error\n")
        for k, err in enumerate(errors):
            fh.write(f"{k},{k * matrix.dt:.17g},{err:.17g}\n")


def cmd_rom(args) -> int:
    cfg = _load_config(args)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    datadir = Path(args.data) if args.data else outdir
    paths = [Path(p) for p in args.paths] if args.paths else \
        [datadir / f"{name}.ksnp" for name in cfg.fields]

    reports = []
    for path in paths:
        matrix = snapshots.load(path)
        name = matrix.field_tag.name
        matrix, dec = _decompose(matrix)
        model = rom.select_leading_modes(matrix, dec, cfg.epsilon)
        weights = np.array([mw.weight for mw in
                            rom.mode_weights(dec, matrix.n_snapshots - 1, dec.dt)])
        _write_spectrum(outdir / f"spectrum_{name}.csv",
                        _spectrum_rows(dec, model, weights))
        _write_errors(outdir / f"errors_{name}.csv", matrix,
                      rom.per_time_errors(matrix, dec, model.selected))
        reports.append(FieldRomReport(
            field=name,
            full_rank=model.full_rank,
            n_dmd=model.n_dmd,
            reduction_percent=rom.reduction_percentage(model),
            achieved_error=model.achieved_error,
            converged=model.converged,
        ))

    with open(outdir / "summary.csv", "w", newline="") as fh:
        fh.write("field,full_rank,n_dmd,reduction_percent,achieved_error,converged\n")
        for r in reports:
            fh.write(f"{r.field},{r.full_rank},{r.n_dmd},{r.reduction_percent:.2f},"
                     f"{r.achieved_error:.17g},{int(r.converged)}\n")
    print(f"{'field':>6} {'rank':>5} {'n_dmd':>6} {'reduction':>10} {'error':>12}")
    for r in reports:
        mark = "" if r.converged else "  (not converged)"
        print(f"{r.field:>6} {r.full_rank:>5} {r.n_dmd:>6} {r.reduction_percent:>9.2f}% "
              f"{r.achieved_error:>12.3e}{mark}")
    return 0 if all(r.converged for r in reports) else 1


def _snapshot_index(args, matrix, cfg) -> int:
    """Map --time (hours, against the dimensional sampling interval) or
    --index to a source snapshot index; echo the mapping."""
    if args.index is not None:
        k = args.index
        print(f"snapshot index {k} (t = {k * matrix.dt:.6g} in data units)")
    else:
        seconds = args.time * 3600.0
        k = int(round(seconds / cfg.snapshot_dt))
        print(f"T = {args.time:g} h -> snapshot {k} "
              f"(nearest multiple of {cfg.snapshot_dt:g} s)")
    if not 0 <= k < matrix.n_snapshots:
        raise IndexOutOfRange(
            f"snapshot {k} outside the sampled range [0, {matrix.n_snapshots})")
    return k


def cmd_reconstruct(args) -> int:
    cfg = _load_config(args)
    name = cfg.fields[0] if args.field is None else args.field
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    datadir = Path(args.data) if args.data else outdir
    matrix = snapshots.load(datadir / f"{name}.ksnp")
    full_matrix = matrix
    k = _snapshot_index(args, matrix, cfg)

    matrix, dec = _decompose(matrix)
    model = rom.select_leading_modes(matrix, dec, cfg.epsilon)
    full = full_matrix.field(k)
    rec = dmd.reconstruct(dec, model.selected, k + 1).reshape(full.shape)
    err = float(np.linalg.norm(full - rec) / np.linalg.norm(full))
    snapshots.write_field_csv(full, outdir / f"full_{name}_{k}.csv")
    snapshots.write_field_csv(rec, outdir / f"rom_{name}_{k}.csv")
    snapshots.write_field_csv(full - rec, outdir / f"diff_{name}_{k}.csv")
    conv = "" if model.converged else " (selection not converged)"
    print(f"field {name}, snapshot {k}: n_dmd = {model.n_dmd}, "
          f"per-time relative error = {err:.6e}{conv}")
    return 0 if model.converged else 1


def cmd_vorticity(args) -> int:
    cfg = _load_config(args)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    datadir = Path(args.data) if args.data else outdir
    mu = snapshots.load(datadir / "u.ksnp")
    mv = snapshots.load(datadir / "v.ksnp")
    if mu.dt != mv.dt or mu.nx != mv.nx or mu.ny != mv.ny:
        raise InvalidValue("u.ksnp and v.ksnp disagree on sampling or grid")
    k = _snapshot_index(args, mu, cfg)
    grid = swe.Grid(nx=mu.nx, ny=mu.ny, dx=mu.dx, dy=mu.dy)

    def vort(ufield, vfield):
        state = swe.SweState(h=np.ones_like(ufield), u=ufield, v=vfield, t=0.0)
        return swe.vorticity(state, grid)

    w_full = vort(mu.field(k), mv.field(k))

    mu_t, dec_u = _decompose(mu)
    model_u = rom.select_leading_modes(mu_t, dec_u, cfg.epsilon)
    mv_t, dec_v = _decompose(mv)
    model_v = rom.select_leading_modes(mv_t, dec_v, cfg.epsilon)
    u_rec = dmd.reconstruct(dec_u, model_u.selected, k + 1).reshape(mu.ny, mu.nx)
    v_rec = dmd.reconstruct(dec_v, model_v.selected, k + 1).reshape(mv.ny, mv.nx)
    w_rom = vort(u_rec, v_rec)

    snapshots.write_field_csv(w_full, outdir / f"vort_full_{k}.csv")
    snapshots.write_field_csv(w_rom, outdir / f"vort_rom_{k}.csv")
    snapshots.write_field_csv(w_full - w_rom, outdir / f"vort_diff_{k}.csv")
    ref = float(np.linalg.norm(w_full))
    diff = float(np.linalg.norm(w_full - w_rom))
    err = diff / ref if ref > 0.0 else (0.0 if diff == 0.0 else float("inf"))
    conv = model_u.converged and model_v.converged
    note = "" if conv else " (selection not converged)"
    print(f"vorticity at snapshot {k}: relative difference = {err:.6e}{note}")
    return 0 if conv else 1


def _add_common(p, with_time=False):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", help="output directory (default from config)")
    p.add_argument("--eps", type=float, help="selection threshold override")
    p.add_argument("--data", help="directory holding .ksnp inputs (default: --out)")
    p.add_argument("--field", choices=_FIELDS, help="field override")
    if with_time:
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--time", type=float, help="instant in hours")
        g.add_argument("--index", type=int, help="snapshot index")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="koopmanrom",
        description="Shallow-water snapshot generation and Koopman-mode "
                    "reduced-order modelling")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("simulate", help="run the solver and write KSNP snapshots")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rom", help="decompose snapshots and select leading modes")
    _add_common(p)
    p.add_argument("paths", nargs="*", help="explicit .ksnp inputs")
    p.set_defaults(func=cmd_rom)

    p = sub.add_parser("reconstruct", help="compare a snapshot with its reduced model")
    _add_common(p, with_time=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("vorticity", help="full versus reduced-order vorticity field")
    _add_common(p, with_time=True)
    p.set_defaults(func=cmd_vorticity)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CflViolation, NonPositiveDepth) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except (OSError, ParseError, UnknownKey, InvalidValue, IndexOutOfRange,
            BadMagic, UnsupportedVersion, CorruptHeader) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
