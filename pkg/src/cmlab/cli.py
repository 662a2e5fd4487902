"""Command line front end: every command reads flat INI-style config or
flags, writes full-precision CSVs (plus PNG figures next to them), and is
deterministic given its inputs.

Exit codes: 0 success, 1 numerical failure (a residual over threshold),
2 usage or config error, 3 resolution lost during evolution.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

import numpy as np

from . import report
from .chiral import (DEFAULT_CHIRAL_GRID, chiral_profile, mollified_data,
                     scaling_check, write_slope_csv)
from .evolution import (ResolutionLostError, SimConfig, evolve,
                        read_snapshot, write_snapshot)
from .gauge import chirality_defect
from .identities import morawetz_battery, verify_identity_suite
from .modlaw import (ModLawState, closed_form, instability_scan,
                     match_closed_form, write_scan_csv)
from .modulation import ProfileParams, track, write_track_csv
from .solitons import smooth_cutoff, soliton_q, soliton_r
from .spectral import Field, Grid

USAGE_ERROR = 2
NUMERICAL_ERROR = 1
RESOLUTION_LOST = 3


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    grid = Grid(args.n, args.length)
    rows = verify_identity_suite(grid, only=args.only)
    if args.threshold is not None:
        for r in rows:
            r.threshold = args.threshold
    out = _out_dir(args)
    report.write_csv(out / "identities.csv",
                     "name,statement,mechanism,residual,threshold,passed,wrap_error",
                     (f"{r.name},\"{r.statement}\",{r.mechanism},{r.residual:.17e},"
                      f"{r.threshold:.17e},{r.passed},{r.wrap_error:.17e}"
                      for r in rows))
    mor = morawetz_battery(grid)
    report.write_csv(out / "morawetz.csv", "name,mor_sq,virial_form,ratio",
                     (f"{n},{a:.17e},{b:.17e},{c:.17e}" for n, a, b, c in mor))
    if not args.no_plots:
        report.plot_residual_table(rows, out / "identities.png")
    width = max(len(r.name) for r in rows)
    for r in rows:
        print(f"{'pass' if r.passed else 'FAIL'} {r.name:{width}s} "
              f"residual {r.residual:.3e}  threshold {r.threshold:.1e}")
    bad = [r for r in rows if not r.passed]
    bad_mor = [n for n, a, b, c in mor if a > 0 and b <= 0]
    for name in bad_mor:
        print(f"FAIL morawetz[{name}]: virial form not positive")
    print(f"{len(rows) - len(bad)}/{len(rows)} identities pass; "
          f"results in {out}")
    return NUMERICAL_ERROR if bad or bad_mor else 0


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------

PRESETS = {
    "soliton-static": dict(equation="gauged", n=16384, length=1200.0,
                           dt=1e-3, t_end=1.0, stride=100, init="soliton"),
    "chiral-static": dict(equation="cm-dnls", n=16384, length=1200.0,
                          dt=1e-3, t_end=1.0, stride=100, init="soliton"),
    "gaussian": dict(equation="gauged", n=4096, length=200.0, dt=1e-3,
                     t_end=1.0, stride=50, init="gaussian"),
}


def load_config(path) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"cannot read config file {path}")
    if "simulation" not in parser:
        raise ValueError("config needs a [simulation] section")
    sec = parser["simulation"]
    cfg = dict(
        equation=sec.get("equation", "gauged"),
        n=sec.getint("n", 4096),
        length=sec.getfloat("length", 200.0),
        dt=sec.getfloat("dt", 1e-3),
        t_end=sec.getfloat("t_end", 1.0),
        scheme=sec.get("scheme", "if-rk4"),
        dealias=sec.getboolean("dealias", True),
        stride=sec.getint("stride", 10),
        max_gradient=sec.getfloat("max_gradient", 1e6),
        min_scale=sec.getfloat("min_scale", 1e-6),
        tail_fraction_limit=sec.getfloat("tail_fraction_limit", 1e-6),
        init=sec.get("init", "gaussian"),
    )
    return cfg


def initial_field(kind: str, grid: Grid, equation: str) -> Field:
    if kind == "soliton":
        if equation == "gauged":
            return soliton_q(grid)
        return soliton_r(grid, periodized=True)
    if kind == "gaussian":
        return Field(grid, np.exp(-(grid.x / 4.0) ** 2) + 0j)
    if kind == "chiral-packet":
        omega = 2 * np.pi * round(6.0 * grid.length / (2 * np.pi)) / grid.length
        return Field(grid, np.exp(1j * omega * grid.x) * np.exp(-(grid.x / 4.0) ** 2))
    raise ValueError(f"unknown initial data kind {kind!r}")


def cmd_evolve(args) -> int:
    try:
        if args.preset:
            cfg = dict(PRESETS[args.preset])
        elif args.config:
            cfg = load_config(args.config)
        else:
            print("evolve needs --preset or a config file", file=sys.stderr)
            return USAGE_ERROR
        init_kind = cfg.pop("init")
        sim = SimConfig(**cfg)
        init = initial_field(init_kind, sim.grid(), sim.equation)
    except (KeyError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    out = _out_dir(args)
    try:
        traj = evolve(init, sim)
    except ResolutionLostError as exc:
        print(f"resolution lost: {exc}", file=sys.stderr)
        return RESOLUTION_LOST
    traj.write_diagnostics(out / "diagnostics.csv")
    if args.snapshots:
        traj.write_snapshots(out / "snapshots")
    if not args.no_plots:
        report.plot_diagnostics(traj.records, out / "diagnostics.png")
    r0, r1 = traj.records[0], traj.records[-1]
    print(f"evolved {sim.equation} to t = {traj.times[-1]:.6g} ({traj.reason}); "
          f"mass drift {abs(r1.mass - r0.mass) / r0.mass:.3e}; results in {out}")
    return 0


# ---------------------------------------------------------------------------
# blowup
# ---------------------------------------------------------------------------

def cmd_blowup(args) -> int:
    grid = Grid(args.n, args.length)
    lam0 = args.b0 ** (2.0 / 3.0)
    params = ProfileParams(args.b0, args.eta0 * lam0, args.nu0 * lam0)
    y = grid.x / lam0
    qy = np.sqrt(2.0) / np.sqrt(1 + y**2)
    py = (-1j * params.b * y**2 / 4 - params.eta * (1 + y**2) / 4
          + 1j * params.nu * y / 2) * qy * smooth_cutoff(y / args.profile_window)
    v0 = Field(grid, (qy + py) / np.sqrt(lam0))
    sim = SimConfig(equation="gauged", n=args.n, length=args.length,
                    dt=args.dt, t_end=args.t_end, stride=args.stride)
    out = _out_dir(args)
    try:
        traj = evolve(v0, sim)
    except ResolutionLostError as exc:
        print(f"resolution lost: {exc}", file=sys.stderr)
        return RESOLUTION_LOST
    points = track(traj, delta_dec=args.delta_dec)
    write_track_csv(points, out / "modulation.csv")
    reason = getattr(track, "last_reason", "end")

    # modulation-law prediction from the first tracked state, on the same grid
    s0 = points[0].state
    st0 = ModLawState(s0.lam, s0.gamma, s0.center, s0.b, s0.eta, s0.nu)
    ell, eta0, nu0, t_col, gam_star = match_closed_form(st0)
    tt = np.array([p.t for p in points])
    lam_pred, gam_pred = closed_form(ell, eta0, t_col, gam_star, tt)
    b_pred = 0.5 * ell * (t_col - tt) * lam_pred
    report.write_csv(out / "modlaw_prediction.csv",
                     "t,lam,gamma,x,b,eta,nu",
                     (",".join(f"{v:.17e}" for v in
                               (t, lp, gp, s0.center - nu0 * (t - tt[0]), bp,
                                eta0 * lp, nu0 * lp))
                      for t, lp, gp, bp in zip(tt, lam_pred, gam_pred, b_pred)))
    if not args.no_plots:
        report.plot_track(points, pred=(tt, lam_pred), path=out / "blowup.png")
        report.plot_diagnostics(traj.records, out / "diagnostics.png")
    lam_t = np.array([p.state.lam for p in points])
    gap = np.max(np.abs(lam_t - lam_pred) / lam_pred)
    print(f"tracked {len(points)} states ({reason}); scale {lam_t[0]:.4f} -> "
          f"{lam_t[-1]:.4f}; max relative gap to the modulation law {gap:.3%}; "
          f"results in {out}")
    return 0


# ---------------------------------------------------------------------------
# modlaw
# ---------------------------------------------------------------------------

def cmd_modlaw(args) -> int:
    out = _out_dir(args)
    if args.scan:
        try:
            eta_grid = np.linspace(args.eta0_min, args.eta0_max, args.scan_points)
            nu_grid = np.linspace(args.nu0_min, args.nu0_max, args.scan_points)
            rows = instability_scan(args.ell, eta_grid, nu_grid)
        except ValueError as exc:
            print(f"usage error: {exc}", file=sys.stderr)
            return USAGE_ERROR
        write_scan_csv(rows, out / "scan.csv")
        if not args.no_plots:
            report.plot_scan(rows, out / "scan.png")
        print(f"scan of {len(rows)} cells written to {out}")
        return 0
    try:
        lam, gam = closed_form(args.ell, args.eta0, args.t_collapse,
                               args.gamma_star, np.array([args.t]))
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    print(f"lambda = {lam[0]:.17e}")
    print(f"gamma  = {gam[0]:.17e}")
    return 0


# ---------------------------------------------------------------------------
# chiral
# ---------------------------------------------------------------------------

def cmd_chiral(args) -> int:
    out = _out_dir(args)
    grid = DEFAULT_CHIRAL_GRID
    if args.slopes:
        try:
            reports = scaling_check(args.b, args.eta, args.nu)
        except ValueError as exc:
            print(f"usage error: {exc}", file=sys.stderr)
            return USAGE_ERROR
        write_slope_csv(reports, out / "slopes.csv")
        if not args.no_plots:
            report.plot_slopes(reports, out / "slopes.png")
        for r in reports:
            print(f"{'pass' if r.passed else 'FAIL'} {r.norm_name}: "
                  f"slope {r.slope:+.4f} expected {r.expected:+.1f}")
        return 0 if all(r.passed for r in reports) else NUMERICAL_ERROR
    try:
        if args.mollify is not None:
            field = mollified_data(args.b, args.eta, args.nu, args.mollify, grid)
            name = "mollified.bin"
        else:
            field = chiral_profile(args.b, args.eta, args.nu, args.radius, grid)
            name = "profile.bin"
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    defect = chirality_defect(field)
    write_snapshot(out / name, grid, 0.0, field.values)
    back_grid, _, back = read_snapshot(out / name)
    exact = back_grid == grid and np.array_equal(back, field.values)
    print(f"profile written to {out / name}; chirality defect {defect:.3e}; "
          f"reload bit-exact: {exact}")
    if defect > 1e-5:
        return NUMERICAL_ERROR
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmlab",
        description="pseudospectral laboratory for the Calogero-Moser "
                    "derivative NLS and its gauged form")
    parser.add_argument("--out", default="cmlab-out", help="output directory")
    parser.add_argument("--no-plots", action="store_true",
                        help="skip PNG rendering")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the identity and Morawetz suites")
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--length", type=float, default=200.0)
    p.add_argument("--only", default=None, help="substring filter on row names")
    p.add_argument("--threshold", type=float, default=None,
                   help="override every pass threshold")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("evolve", help="time-step one of the two flows")
    p.add_argument("config", nargs="?", default=None, help="INI config file")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("--snapshots", action="store_true",
                   help="dump binary snapshots next to the diagnostics")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("blowup", help="profile-loaded run with modulation tracking")
    p.add_argument("--b0", type=float, default=0.05)
    p.add_argument("--eta0", type=float, default=0.0,
                   help="eta/lambda at start")
    p.add_argument("--nu0", type=float, default=0.0)
    p.add_argument("--n", type=int, default=8192)
    p.add_argument("--length", type=float, default=100.0)
    p.add_argument("--dt", type=float, default=2e-4)
    p.add_argument("--t-end", dest="t_end", type=float, default=0.16)
    p.add_argument("--stride", type=int, default=20)
    p.add_argument("--profile-window", dest="profile_window", type=float,
                   default=25.0, help="cutoff radius of the profile in y")
    p.add_argument("--delta-dec", dest="delta_dec", type=float, default=0.3)
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("modlaw", help="closed-form laws and instability scan")
    p.add_argument("--ell", type=float, default=1.0)
    p.add_argument("--eta0", type=float, default=0.0)
    p.add_argument("--t-collapse", dest="t_collapse", type=float, default=1.0)
    p.add_argument("--gamma-star", dest="gamma_star", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--scan", action="store_true")
    p.add_argument("--scan-points", dest="scan_points", type=int, default=21)
    p.add_argument("--eta0-min", dest="eta0_min", type=float, default=-0.01)
    p.add_argument("--eta0-max", dest="eta0_max", type=float, default=0.01)
    p.add_argument("--nu0-min", dest="nu0_min", type=float, default=-0.01)
    p.add_argument("--nu0-max", dest="nu0_max", type=float, default=0.01)
    p.set_defaults(func=cmd_modlaw)

    p = sub.add_parser("chiral", help="chiral profiles, mollified data, slopes")
    p.add_argument("--b", type=float, default=1e-4)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--radius", type=float, default=40.0)
    p.add_argument("--mollify", type=float, default=None,
                   help="emit mollified data at this scale instead")
    p.add_argument("--slopes", action="store_true",
                   help="run the scaling-slope sweep")
    p.set_defaults(func=cmd_chiral)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResolutionLostError as exc:
        print(f"resolution lost: {exc}", file=sys.stderr)
        return RESOLUTION_LOST


if __name__ == "__main__":
    sys.exit(main())
