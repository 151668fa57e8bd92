"""Command-line front end.

Subcommands: spectrum | sweep | density | nnsd | verify | converge.
All outputs are machine-readable CSV files with the resolved configuration
embedded in comment headers, plus a JSON summary sidecar (<output>.json).
Files are written atomically (write-then-rename).  Identical configuration
and seed give byte-identical CSV output.

Exit codes: 0 success, 1 usage/configuration error, 2 non-convergence,
3 verification failure.  The TILTSPEC_WORKERS environment variable sets the
worker-thread count for sweep points (default 1; BLAS releases the GIL, so
threads help on multicore hosts).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .angular import build_angular_scheme
from .config import ConfigError, GridSpec, RunConfig, SolverSpec
from .eigensolver import WindowTooLarge, spectrum_scan
from .hamiltonian import assemble, solve_radial_modes
from .model import hartree_to_mev, preset_system
from .observables import (
    density_field,
    energy_sweep,
    lowest_levels,
    state_norm,
)
from .radial import build_radial_scheme
from .references import (
    ALPHAS_DEG,
    EXCITON_B_TESLA,
    EXCITON_GROUND_MEV,
    TABLES,
    reference_rows,
)
from .stats import cluster_detection, nnsd

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONCONVERGED = 2
EXIT_VERIFY_FAILED = 3

FLOAT_FMT = "{:.12e}"

#: default verification tolerances: relative, with an absolute floor for
#: near-zero entries; the high-field tier is looser (see README)
VERIFY_RTOL_LOW = 1e-4
VERIFY_ATOL_LOW = 1e-5
VERIFY_RTOL_HIGH = 1e-3
HIGH_FIELD_START = 100.0
EXTENDED_FIELDS = (1000.0, 10000.0)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("TILTSPEC_WORKERS", "1")))
    except ValueError:
        return 1


def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tiltspec-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(cfg: RunConfig, grid: tuple | None, extra: dict | None = None) -> str:
    lines = [f"# tiltspec {__version__}"]
    lines.append("# config: " + json.dumps(cfg.to_dict(), sort_keys=True, default=str))
    if grid is not None:
        lines.append(f"# grid: M={grid[0]} N={grid[1]} rho_max={grid[2]:.6g}")
    for k, v in (extra or {}).items():
        lines.append(f"# {k}: {v}")
    return "\n".join(lines) + "\n"


def _write_outputs(path: str, csv_text: str, summary: dict):
    _atomic_write(path, csv_text)
    _atomic_write(path + ".json", json.dumps(summary, indent=1, sort_keys=True,
                                             default=str) + "\n")


def _build_config(args) -> RunConfig:
    if args.config:
        cfg = RunConfig.from_json(args.config)
    else:
        cfg = RunConfig()
    # command-line flags override file fields
    if args.system is not None:
        cfg.system = args.system
    if args.B is not None:
        cfg.B = args.B
    if args.B_unit is not None:
        cfg.B_unit = args.B_unit
    elif args.system == "exciton_gaas":
        cfg.B_unit = "T"
    if args.alpha is not None:
        cfg.alpha_deg = args.alpha
    grid = GridSpec(M=args.M if args.M is not None else cfg.grid.M,
                    N=args.N if args.N is not None else cfg.grid.N,
                    rho_max=args.rho_max if args.rho_max is not None else cfg.grid.rho_max)
    solver = SolverSpec(
        window=tuple(args.window) if args.window else cfg.solver.window,
        count=args.count if args.count is not None else cfg.solver.count,
        tol=args.tol if args.tol is not None else cfg.solver.tol,
        seed=args.seed if args.seed is not None else cfg.solver.seed,
        chunk=cfg.solver.chunk,
    )
    cfg.grid = grid
    cfg.solver = solver
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_spectrum(args) -> int:
    cfg = _build_config(args)
    sys_cfg = cfg.system_config()
    count = cfg.solver.count
    grid = cfg.resolved_grid(n_states=count or 8)
    M, N, rho_max = grid
    ang = build_angular_scheme(M)
    rad = build_radial_scheme(N, rho_max)
    t0 = time.time()
    if cfg.solver.window is not None:
        h = assemble(sys_cfg, ang, rad)
        spec = spectrum_scan(h, cfg.solver.window, target_count=count,
                             tol=cfg.solver.tol, seed=cfg.solver.seed,
                             chunk=cfg.solver.chunk, keep_vectors=False)
    else:
        spec = lowest_levels(sys_cfg, ang, rad, count or 8,
                             tol=cfg.solver.tol, seed=cfg.solver.seed)
    elapsed = time.time() - t0

    rows = ["index,energy,residual,converged"]
    idx = 0
    res_by_energy = {round(p.energy, 12): p.residual_norm for p in spec.pairs}
    for e, mult in zip(spec.energies, spec.multiplicities):
        for _ in range(mult):
            r = res_by_energy.get(round(e, 12), cfg.solver.tol)
            rows.append(f"{idx},{FLOAT_FMT.format(e)},{FLOAT_FMT.format(r)},True")
            idx += 1
    csv_text = _header(cfg, grid) + "\n".join(rows) + "\n"
    summary = {
        "config": cfg.to_dict(), "version": __version__,
        "grid": {"M": M, "N": N, "rho_max": rho_max},
        "count": int(spec.count), "expected_count": int(spec.expected_count),
        "complete": bool(spec.complete), "window": list(spec.window),
        "shifts": [float(s) for s in spec.shifts],
        "elapsed_s": round(elapsed, 3),
    }
    _write_outputs(args.output, csv_text, summary)
    return EXIT_OK if spec.complete else EXIT_NONCONVERGED


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip() != ""]


def cmd_sweep(args) -> int:
    cfg = _build_config(args)
    states = [int(s) for s in args.states.split(",")]
    b_values = _parse_floats(args.B_list) if args.B_list else [cfg.B]
    alphas = _parse_floats(args.alpha_list) if args.alpha_list else [cfg.alpha_deg]
    points = [(b, a) for b in b_values for a in alphas]
    preset = cfg.system if isinstance(cfg.system, str) else None

    def system(b_au, alpha):
        if preset:
            return preset_system(preset, B=b_au, alpha=alpha)
        return cfg.system_config().__class__(
            m1=cfg.system["m1"], m2=cfg.system["m2"],
            epsilon=cfg.system.get("epsilon", 1.0), B=b_au, alpha=alpha)

    grid = None
    if cfg.grid.M is not None and cfg.grid.N is not None and cfg.grid.rho_max is not None:
        grid = (cfg.grid.M, cfg.grid.N, cfg.grid.rho_max)
    t0 = time.time()
    workers = _workers()
    if workers > 1 and len(b_values) > 1:
        tables = {}
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futs = {
                b: ex.submit(energy_sweep, system, states, [(b, a) for a in alphas],
                             cfg.B_unit, grid, cfg.solver.tol, cfg.solver.seed,
                             args.track)
                for b in b_values
            }
            for b in b_values:
                tables[b] = futs[b].result()
        rows_src = [r for b in b_values for r in tables[b].rows]
    else:
        table = energy_sweep(system, states, points, b_unit=cfg.B_unit, grid=grid,
                             tol=cfg.solver.tol, seed=cfg.solver.seed, track=args.track)
        rows_src = table.rows
    elapsed = time.time() - t0

    rows = ["state,B,B_unit,alpha_deg,energy,energy_unit,error_flag"]
    rows_src = sorted(rows_src, key=lambda r: (r.B, r.alpha_deg, r.state))
    n_err = 0
    for r in rows_src:
        e_txt = FLOAT_FMT.format(r.energy) if math.isfinite(r.energy) else "nan"
        if r.error_flag:
            n_err += 1
        rows.append(f"{r.state},{r.B:.6g},{r.B_unit},{r.alpha_deg:.6g},"
                    f"{e_txt},{r.energy_unit},{r.error_flag}")
    csv_text = _header(cfg, None, {"states": args.states}) + "\n".join(rows) + "\n"
    summary = {
        "config": cfg.to_dict(), "version": __version__,
        "points": len(points), "states": states, "rows": len(rows_src),
        "error_rows": n_err, "elapsed_s": round(elapsed, 3), "track": bool(args.track),
    }
    _write_outputs(args.output, csv_text, summary)
    return EXIT_OK if n_err == 0 else EXIT_NONCONVERGED


def cmd_density(args) -> int:
    cfg = _build_config(args)
    sys_cfg = cfg.system_config()
    state = args.state
    grid = cfg.resolved_grid(n_states=state + 1)
    M, N, rho_max = grid
    ang = build_angular_scheme(M)
    rad = build_radial_scheme(N, rho_max)
    t0 = time.time()
    spec = lowest_levels(sys_cfg, ang, rad, state + 1, tol=cfg.solver.tol,
                         seed=cfg.solver.seed, keep_vectors=True)
    pairs = sorted(spec.pairs, key=lambda p: p.energy)
    if state >= len(pairs) or not spec.complete:
        print(f"state {state} did not converge "
              f"(found {len(pairs)}/{spec.expected_count})", file=sys.stderr)
        return EXIT_NONCONVERGED
    pair = pairs[state]
    extents = tuple(args.extents) if args.extents else None
    fld = density_field(pair, ang, rad, extents=extents, resolution=args.resolution)
    elapsed = time.time() - t0

    rows = ["x,y,density"]
    for iy, yv in enumerate(fld.y):
        for ix, xv in enumerate(fld.x):
            rows.append(f"{FLOAT_FMT.format(xv)},{FLOAT_FMT.format(yv)},"
                        f"{FLOAT_FMT.format(fld.values[iy, ix])}")
    extra = {"state": state, "energy": FLOAT_FMT.format(pair.energy),
             "norm": FLOAT_FMT.format(fld.norm_estimate),
             "extents": " ".join(f"{v:.8g}" for v in fld.extents)}
    csv_text = _header(cfg, grid, extra) + "\n".join(rows) + "\n"
    summary = {
        "config": cfg.to_dict(), "version": __version__,
        "grid": {"M": M, "N": N, "rho_max": rho_max},
        "state": state, "energy": pair.energy, "norm": fld.norm_estimate,
        "extents": list(fld.extents), "resolution": args.resolution,
        "anisotropy": fld.anisotropy(), "elapsed_s": round(elapsed, 3),
    }
    _write_outputs(args.output, csv_text, summary)
    return EXIT_OK


def cmd_nnsd(args) -> int:
    cfg = _build_config(args)
    sys_cfg = cfg.system_config()
    n_levels = args.levels
    grid = cfg.resolved_grid(n_states=n_levels)
    M, N, rho_max = grid
    ang = build_angular_scheme(M)
    rad = build_radial_scheme(N, rho_max)
    t0 = time.time()
    spec = lowest_levels(sys_cfg, ang, rad, n_levels, tol=cfg.solver.tol,
                         seed=cfg.solver.seed, keep_vectors=False)
    levels = np.repeat(spec.energies, spec.multiplicities)
    if args.skip_ground:
        levels = levels[1:]
    try:
        hist = nnsd(levels, bins=args.bins)
    except ValueError as exc:
        print(f"nnsd refused: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    elapsed = time.time() - t0

    rows = ["bin_lo,bin_hi,count,freq,poisson_ref,wigner_ref"]
    for i in range(len(hist.counts)):
        rows.append(
            f"{FLOAT_FMT.format(hist.edges[i])},{FLOAT_FMT.format(hist.edges[i+1])},"
            f"{hist.counts[i]},{FLOAT_FMT.format(hist.freq[i])},"
            f"{FLOAT_FMT.format(hist.poisson_ref[i])},{FLOAT_FMT.format(hist.wigner_ref[i])}"
        )
    footer = (f"# ks_poisson: {FLOAT_FMT.format(hist.d_poisson)}\n"
              f"# ks_wigner: {FLOAT_FMT.format(hist.d_wigner)}\n")
    csv_text = _header(cfg, grid, {"levels": len(levels)}) + "\n".join(rows) + "\n" + footer
    summary = {
        "config": cfg.to_dict(), "version": __version__,
        "grid": {"M": M, "N": N, "rho_max": rho_max},
        "levels": int(len(levels)), "spacings": int(hist.n_spacings),
        "complete": bool(spec.complete),
        "ks_poisson": hist.d_poisson, "ks_wigner": hist.d_wigner,
        "elapsed_s": round(elapsed, 3),
    }
    _write_outputs(args.output, csv_text, summary)
    return EXIT_OK if spec.complete else EXIT_NONCONVERGED


def _hydrogen_reference_energies(B: float, alpha_deg: int, grid=None):
    """Computed (E1, E2, E3) for one table point, with the paper's labels.

    At alpha=0 the published states carry the angular-momentum labels
    (m=-1, lowest), (m=-2, lowest), (m=0, second), solved per channel; at
    tilted angles they are the three levels above the ground state.
    """
    from .config import auto_grid

    cfg = preset_system("hydrogen2d", B=B, alpha=math.radians(alpha_deg))
    if grid is None:
        M, N, rho_max = auto_grid(cfg, 4)
    else:
        M, N, rho_max = grid
    if alpha_deg == 0:
        rad = build_radial_scheme(N, rho_max)
        e1 = solve_radial_modes(cfg, rad, -1, n_lowest=1)[0]
        e2 = solve_radial_modes(cfg, rad, -2, n_lowest=1)[0]
        e3 = solve_radial_modes(cfg, rad, 0, n_lowest=2)[1]
        return float(e1), float(e2), float(e3)
    ang = build_angular_scheme(M)
    rad = build_radial_scheme(N, rho_max)
    spec = lowest_levels(cfg, ang, rad, 4)
    flat = np.repeat(spec.energies, spec.multiplicities)
    if len(flat) < 4 or not spec.complete:
        raise RuntimeError(f"verification solve incomplete at B={B}, alpha={alpha_deg}")
    return float(flat[1]), float(flat[2]), float(flat[3])


def cmd_verify(args) -> int:
    fields = sorted(b for b in TABLES[1] if b <= HIGH_FIELD_START)
    if args.profile == "extended":
        fields += [b for b in EXTENDED_FIELDS]
    t0 = time.time()
    lines = ["table,B,alpha_deg,state,reference,computed,rel_error,tolerance,status"]
    results = []
    failures = 0
    for B in fields:
        for alpha_deg in ALPHAS_DEG:
            try:
                computed = _hydrogen_reference_energies(B, alpha_deg)
            except Exception as exc:
                for state in (1, 2, 3):
                    lines.append(f"hydrogen,{B:g},{alpha_deg},{state},"
                                 f"{TABLES[state][B][alpha_deg]},nan,nan,nan,ERROR:{exc}")
                    failures += 1
                continue
            for state in (1, 2, 3):
                ref = TABLES[state][B][alpha_deg]
                got = computed[state - 1]
                rtol = VERIFY_RTOL_HIGH if B >= HIGH_FIELD_START else VERIFY_RTOL_LOW
                err = abs(got - ref) / max(abs(ref), VERIFY_ATOL_LOW / rtol)
                ok = err < rtol
                failures += 0 if ok else 1
                status = "pass" if ok else "FAIL"
                lines.append(f"hydrogen,{B:g},{alpha_deg},{state},{ref},"
                             f"{FLOAT_FMT.format(got)},{err:.3e},{rtol:g},{status}")
                results.append({"B": B, "alpha_deg": alpha_deg, "state": state,
                                "rel_error": err, "pass": ok})
                if args.verbose:
                    print(lines[-1])
    # exciton anchor
    exc_cfg = RunConfig(system="exciton_gaas", B=EXCITON_B_TESLA, B_unit="T")
    exc_sys = exc_cfg.system_config()
    M, N, rho_max = exc_cfg.resolved_grid(n_states=1)
    rad = build_radial_scheme(N, rho_max)
    ground_au = solve_radial_modes(exc_sys, rad, 0, n_lowest=1)[0]
    ground_mev = hartree_to_mev(float(ground_au))
    exc_ok = abs(ground_mev - EXCITON_GROUND_MEV) < 0.05
    failures += 0 if exc_ok else 1
    lines.append(f"exciton,{EXCITON_B_TESLA:g},0,0,{EXCITON_GROUND_MEV},"
                 f"{ground_mev:.5f},{abs(ground_mev - EXCITON_GROUND_MEV):.3e},"
                 f"0.05meV,{'pass' if exc_ok else 'FAIL'}")
    elapsed = time.time() - t0

    csv_text = (f"# tiltspec {__version__}\n# profile: {args.profile}\n"
                + "\n".join(lines) + "\n")
    summary = {
        "version": __version__, "profile": args.profile,
        "entries": len(results) + 1, "failures": failures,
        "exciton_ground_mev": ground_mev, "elapsed_s": round(elapsed, 3),
    }
    _write_outputs(args.output, csv_text, summary)
    print(f"verify: {len(results) + 1 - failures}/{len(results) + 1} entries pass "
          f"({elapsed:.0f}s)")
    return EXIT_OK if failures == 0 else EXIT_VERIFY_FAILED


def cmd_converge(args) -> int:
    cfg = _build_config(args)
    sys_cfg0 = cfg.system_config()
    states = [int(s) for s in args.states.split(",")]
    n_top = max(states)
    if args.ladder:
        ladder = []
        for rung in args.ladder.split(";"):
            m_s, n_s, r_s = rung.split(",")
            ladder.append((int(m_s), int(n_s), float(r_s)))
    else:
        M0, N0, R0 = cfg.resolved_grid(n_states=n_top + 1)
        ladder = [(max(6, M0 // 2), N0 // 2, R0), (M0, N0, R0),
                  (M0 + M0 // 2, 2 * N0, R0)]
    t0 = time.time()
    rows = ["M,N,rho_max,state,energy,delta_prev"]
    prev: dict[int, float] = {}
    deltas: list[float] = []
    recommended = None
    for (M, N, rho_max) in ladder:
        ang = build_angular_scheme(M)
        rad = build_radial_scheme(N, rho_max)
        spec = lowest_levels(sys_cfg0, ang, rad, n_top + 1, tol=cfg.solver.tol,
                             seed=cfg.solver.seed)
        flat = np.repeat(spec.energies, spec.multiplicities)
        rung_delta = 0.0
        for s in states:
            e = float(flat[s]) if s < len(flat) else math.nan
            d = e - prev.get(s, math.nan)
            rows.append(f"{M},{N},{rho_max:.6g},{s},{FLOAT_FMT.format(e)},"
                        + (FLOAT_FMT.format(d) if math.isfinite(d) else "nan"))
            prev[s] = e
            if math.isfinite(d):
                rung_delta = max(rung_delta, abs(d))
        if prev and math.isfinite(rung_delta):
            deltas.append(rung_delta)
            if recommended is None and rung_delta < args.threshold and len(deltas) > 1:
                recommended = (M, N, rho_max)
    elapsed = time.time() - t0
    blowup = len(deltas) >= 2 and deltas[-1] > 10.0 * deltas[-2]
    extra = {"recommended": recommended or "none (refine further)",
             "blowup_flag": blowup}
    csv_text = _header(cfg, None, extra) + "\n".join(rows) + "\n"
    summary = {
        "config": cfg.to_dict(), "version": __version__,
        "ladder": [list(r) for r in ladder], "states": states,
        "recommended": list(recommended) if recommended else None,
        "blowup_flag": bool(blowup), "threshold": args.threshold,
        "elapsed_s": round(elapsed, 3),
    }
    _write_outputs(args.output, csv_text, summary)
    if blowup:
        print("warning: successive differences grew; rho_max is likely too small",
              file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--system", choices=["hydrogen2d", "exciton_gaas"])
    p.add_argument("--B", type=float, help="field strength (a.u. or Tesla)")
    p.add_argument("--B-unit", dest="B_unit", choices=["au", "T"])
    p.add_argument("--alpha", type=float, help="tilt angle in degrees")
    p.add_argument("--M", type=int, help="angular truncation")
    p.add_argument("--N", type=int, help="radial nodes")
    p.add_argument("--rho-max", dest="rho_max", type=float, help="radial box (a.u.)")
    p.add_argument("--tol", type=float, help="solver tolerance")
    p.add_argument("--seed", type=int, help="solver seed")
    p.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--count", type=int, help="number of levels")
    p.add_argument("-o", "--output", required=True, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tiltspec",
        description="Bound states of a planar Coulomb pair in a tilted magnetic field",
    )
    ap.add_argument("--version", action="version", version=f"tiltspec {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues in a window or the lowest count")
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="energies over a (B, alpha) grid")
    _add_common(p)
    p.add_argument("--states", default="1,2,3", help="comma list of state indices (0=ground)")
    p.add_argument("--B-list", dest="B_list", help="comma list of field strengths")
    p.add_argument("--alpha-list", dest="alpha_list", help="comma list of angles (deg)")
    p.add_argument("--track", action="store_true",
                   help="label angle curves by eigenvector continuation")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("density", help="|Psi|^2 on a Cartesian grid")
    _add_common(p)
    p.add_argument("--state", type=int, default=0, help="state index (0=ground)")
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--extents", type=float, nargs=4,
                   metavar=("XMIN", "XMAX", "YMIN", "YMAX"))
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("nnsd", help="nearest-neighbor spacing distribution")
    _add_common(p)
    p.add_argument("--levels", type=int, default=201, help="number of lowest levels")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--keep-ground", dest="skip_ground", action="store_false",
                   help="include the ground state in the sample")
    p.set_defaults(func=cmd_nnsd)

    p = sub.add_parser("verify", help="compare against the published tables")
    p.add_argument("--profile", choices=["default", "extended"], default="default")
    p.add_argument("--verbose", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("converge", help="grid refinement study")
    _add_common(p)
    p.add_argument("--states", default="0,1,2,3")
    p.add_argument("--ladder", help="semicolon list of M,N,rho_max rungs")
    p.add_argument("--threshold", type=float, default=1e-6,
                   help="stabilization threshold for the recommendation")
    p.set_defaults(func=cmd_converge)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, WindowTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
