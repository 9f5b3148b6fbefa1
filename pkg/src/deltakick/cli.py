"""Command-line front end: ``deltakick {spectrum,husimi,poincare,orbits,evolve}``.

Exit codes: 0 success, 1 invalid input, 2 tolerance or convergence failure.
"""

import argparse
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import classical, evolve, floquet, phasespace
from .output import write_csv, write_pgm16, write_sidecar
from .params import ResonanceInput, ValidationError, derive_params, parse_items, read_config

EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _pair(text, kind=float):
    try:
        a, b = text.split(",")
        return kind(a), kind(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated values, got {text!r}")


def _grid(text):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}")


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="flat key = value file (M, N, R, S, l, k, theta0)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--threads", type=int, default=None, help="cap on internal parallelism")
    for key, kind in (("M", int), ("N", int), ("R", int), ("S", int), ("l", int), ("k", float)):
        p.add_argument(f"--{key}", dest=f"p_{key}", type=kind, default=None)
    p.add_argument("--theta0", type=float, default=None)
    return p


def build_parser():
    parser = _Parser(prog="deltakick", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()

    sp = sub.add_parser("spectrum", parents=[common], help="Floquet block spectrum")
    sp.add_argument("--state-index", default=None,
                    help="eigenvectors to write: comma list of indices or 'all'")

    hp = sub.add_parser("husimi", parents=[common], help="Husimi heatmap of a quasi-eigenstate")
    hp.add_argument("--state-index", type=int, default=0)
    hp.add_argument("--plane-wave", type=int, default=None, metavar="Q",
                    help="use the single ladder slot Q instead of an eigenstate")
    hp.add_argument("--grid", type=_grid, default=None, help="samples WxH over the window")
    hp.add_argument("--window", type=lambda s: tuple(float(v) for v in s.split(",")), default=None,
                    metavar="Z0,Z1,P0,P1", help="phase-space window (default: full cell)")
    hp.add_argument("--kick-frame", choices=("pre", "post"), default="pre",
                    help="state just before (default) or just after the kick")
    hp.add_argument("--csv", action="store_true", help="also dump z,p,theta,J,value")

    for name, help_ in (("poincare", "Poincare section"), ("orbits", "accelerator-mode orbits")):
        cp = sub.add_parser(name, parents=[common], help=help_)
        cp.add_argument("--map", choices=("classical", "epsilon"), default="classical")
        cp.add_argument("--K", type=float, default=None, help="override the kick strength of the map")
        cp.add_argument("--Omega", type=float, default=None, help="override Omega")
        cp.add_argument("--coords", choices=("map", "section"), default="map",
                        help="section: J = T p sampled just before a kick (figure coordinates)")
        if name == "poincare":
            cp.add_argument("--init", type=_pair, action="append", metavar="THETA,J")
            cp.add_argument("--steps", type=int, default=1000)
        else:
            cp.add_argument("--order", type=int, default=None)
            cp.add_argument("--jump", type=int, default=None)
            cp.add_argument("--seeds", type=int, default=32)

    ep = sub.add_parser("evolve", parents=[common], help="kick-by-kick ensemble evolution")
    ep.add_argument("--kicks", type=int, default=200)
    ep.add_argument("--beta-samples", type=int, default=201)
    ep.add_argument("--beta-sigma", type=float, default=0.05)
    ep.add_argument("--frame", choices=("falling", "lab"), default="falling")
    ep.add_argument("--order", type=int, default=2, help="order of the tracked mode")
    ep.add_argument("--jump", type=int, default=None, help="jump of the tracked mode")
    ep.add_argument("--map", choices=("classical", "epsilon"), default=None,
                    help="regime for the slope prediction (default: nearest resonance)")
    ep.add_argument("--band-width", type=float, default=10.0)
    ep.add_argument("--fit-from", type=int, default=50)
    return parser


def resolve_input(args):
    items = {}
    extras = {}
    if args.config is not None:
        raw, extras = read_config(args.config)
        items.update(asdict(raw))
    for key in ("M", "N", "R", "S", "l", "k"):
        v = getattr(args, f"p_{key}")
        if v is not None:
            items[key] = v
    if args.theta0 is not None:
        items["theta0"] = args.theta0
    raw, _ = parse_items({k: str(v) for k, v in items.items()})
    return raw, extras


def _meta(args, params, **extra):
    options = {k: v for k, v in vars(args).items() if not k.startswith("p_")}
    meta = {"command": args.command, "options": options}
    if params is not None:
        meta["params"] = params.as_dict()
        meta["input"] = asdict(params.source)
    meta.update(extra)
    return meta


def cmd_spectrum(args, params):
    block = floquet.build_block(params, params.theta0)
    states = floquet.diagonalize(block)
    out = args.out
    rows = [(s.index, s.quasi_energy, s.eigenvalue.real, s.eigenvalue.imag, s.residual) for s in states]
    write_csv(out / "spectrum.csv", ["index", "quasi_energy", "eigenvalue_re", "eigenvalue_im", "residual"], rows)
    chosen = []
    if args.state_index:
        chosen = range(len(states)) if args.state_index == "all" else [int(i) for i in args.state_index.split(",")]
    for i in chosen:
        if not 0 <= i < len(states):
            raise UsageError(f"state index {i} out of range 0..{len(states) - 1}")
        q = np.arange(params.P)
        v = states[i].block_vector
        pq = floquet.ladder_momentum(params, q)
        write_csv(out / f"state_{i}.csv", ["q", "p_q", "amp_re", "amp_im"],
                  zip(q, pq, v.real, v.imag))
    write_sidecar(out / "spectrum.json", _meta(
        args, params, unitarity_error=block.unitarity_error(),
        tolerances={"unitarity": floquet.UNITARITY_TOL, "residual": floquet.RESIDUAL_TOL},
        states_written=list(chosen)))
    return EXIT_OK


def cmd_husimi(args, params):
    if args.window is not None:
        if len(args.window) != 4:
            raise UsageError("--window needs Z0,Z1,P0,P1")
        z0, z1, p0, p1 = args.window
        nz, np_ = args.grid or (512, 512)
        grid = phasespace.GridSpec(z0, z1, nz, p0, p1, np_)
    else:
        grid = phasespace.cell_grid(params)
        if args.grid:
            grid = phasespace.GridSpec(grid.z0, grid.z1, args.grid[0], grid.p0, grid.p1, args.grid[1])
    pre = args.kick_frame == "pre"
    info = {}
    if args.plane_wave is not None:
        q = np.arange(args.plane_wave - 2 * params.P, args.plane_wave + 2 * params.P + 1)
        amps = np.where(q == args.plane_wave, 1.0 + 0j, 0j)
        H = phasespace.husimi_map(q, amps, params, grid)
        tag = f"plane_{args.plane_wave}"
        info["plane_wave_slot"] = args.plane_wave
    else:
        block = floquet.build_block(params, params.theta0)
        states = floquet.diagonalize(block)
        i = args.state_index
        if not 0 <= i < len(states):
            raise UsageError(f"state index {i} out of range 0..{len(states) - 1}")
        H = phasespace.eigenstate_husimi(states[i], params, grid, params.theta0, pre_kick=pre)
        tag = f"husimi_{i}"
        info.update(state_index=i, quasi_energy=states[i].quasi_energy,
                    eigenvalue=[states[i].eigenvalue.real, states[i].eigenvalue.imag])
    _, vmax = write_pgm16(args.out / f"{tag}.pgm", H.values)
    if args.csv:
        zz, pp = np.meshgrid(H.z, H.p)
        th, J = phasespace.fold_to_torus(zz, pp, params)
        write_csv(args.out / f"{tag}.csv", ["z", "p", "theta", "J", "value"],
                  zip(zz.ravel(), pp.ravel(), th.ravel(), J.ravel(), H.values.ravel()))
    write_sidecar(args.out / f"{tag}.json", _meta(
        args, params, grid={"z0": grid.z0, "z1": grid.z1, "nz": grid.nz,
                            "p0": grid.p0, "p1": grid.p1, "np": grid.np_},
        raw_max=vmax, kick_frame=args.kick_frame,
        map_J_offset=phasespace.map_offset(params),
        tolerances={"gauss_cutoff": phasespace.GAUSS_CUTOFF}, **info))
    return EXIT_OK


def _map_params(args, params):
    if args.map == "classical":
        K = args.K if args.K is not None else params.K
        Omega = args.Omega if args.Omega is not None else float(params.Omega)
        return classical.MapParams.classical(K, Omega)
    eps = params.epsilon
    mp = classical.eps_map_params(eps, params.k, args.Omega if args.Omega is not None else float(params.Omega))
    if args.K is not None:
        mp = classical.MapParams(args.K, mp.Omega, mp.sign)
    return mp


def _to_map(theta, J, mp, coords):
    return classical.section_to_map(theta, J, mp.Omega) if coords == "section" else (theta, J)


def _from_map(theta, J, mp, coords):
    return classical.map_to_section(theta, J, mp.Omega) if coords == "section" else (theta, J)


def cmd_poincare(args, params):
    if not args.init:
        raise UsageError("poincare needs at least one --init THETA,J")
    mp = _map_params(args, params)
    inits = [_to_map(t, J, mp, args.coords) for t, J in args.init]
    section = classical.poincare_section(np.array(inits, dtype=float), args.steps, mp)
    rows = []
    for tid, (th, J) in enumerate(section):
        th, J = _from_map(th, J, mp, args.coords)
        rows.extend((tid, s, a, b) for s, (a, b) in enumerate(zip(th, J)))
    write_csv(args.out / "poincare.csv", ["traj_id", "step", "theta", "J"], rows)
    write_sidecar(args.out / "poincare.json", _meta(args, params, map=asdict(mp)))
    return EXIT_OK


def cmd_orbits(args, params):
    if args.order is None or args.jump is None:
        raise UsageError("orbits needs --order and --jump")
    mp = _map_params(args, params)
    orbits = classical.find_accel_orbits(args.order, args.jump, mp, seeds=args.seeds)
    o = args.order
    header = ["o", "j"] + [f"theta_{i}" for i in range(o)] + [f"J_{i}" for i in range(o)] + ["trace", "stable"]
    rows = []
    for orb in orbits:
        th, J = _from_map(orb.theta, orb.J, mp, args.coords)
        rows.append([orb.order, orb.jump, *th, *J, orb.monodromy_trace, orb.stable])
    write_csv(args.out / "orbits.csv", header, rows)
    write_sidecar(args.out / "orbits.json", _meta(
        args, params, map=asdict(mp), residuals=[orb.residual for orb in orbits]))
    return EXIT_OK


def cmd_evolve(args, params, workers):
    mixture = evolve.BetaMixture(samples=args.beta_samples, sigma=args.beta_sigma)
    series = evolve.evolve_ensemble(mixture, args.kicks, params, frame=args.frame, workers=workers)
    regime = args.map or ("classical" if params.T < math.pi else "epsilon")
    eps = None if regime == "classical" else params.epsilon
    sign = 1 if eps is None or eps > 0 else -1
    Omega = float(params.Omega)
    jump = args.jump if args.jump is not None else int(round(sign * Omega * args.order))
    slope = classical.mode_slope(args.order, jump, params.T, Omega, frame=args.frame, eps=eps)
    rows = []
    for t in range(series.mass.shape[0]):
        for b, m in zip(series.bins, series.mass[t]):
            if m > 0:
                rows.append((t, b - 0.5, b + 0.5, m))
    write_csv(args.out / "evolve_series.csv", ["kick", "p_bin_lo", "p_bin_hi", "mass"], rows)
    window = evolve.ModeWindow(0.0, slope, args.band_width, min(args.fit_from, args.kicks))
    track = evolve.track_mode(series, window)
    write_csv(args.out / "evolve_summary.csv", ["kick", "peak_p", "mode_fraction"],
              zip(range(len(track.peak)), track.peak, track.fraction))
    write_sidecar(args.out / "evolve.json", _meta(
        args, params, mixture=asdict(mixture), regime=regime, mode={"order": args.order, "jump": jump},
        predicted_slope=slope, tracked_slope=track.slope,
        tolerances={"trim": evolve.TRIM_TOL, "truncation": evolve.TRUNCATION_TOL}))
    return EXIT_OK


def _with_config_options(parser, argv):
    """Turn non-parameter keys of the config file into flags placed before
    the command-line ones, so explicit flags win."""
    args, _ = parser.parse_known_args(argv)
    if getattr(args, "config", None) is None:
        return argv
    try:
        _, extras = read_config(args.config)
    except (ValidationError, OSError):
        return argv  # reported properly later
    pos = argv.index(args.command) + 1
    injected = []
    for key, val in extras.items():
        injected += [f"--{key.replace('_', '-')}", val]
    return argv[:pos] + injected + argv[pos:]


def run(argv=None):
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_with_config_options(parser, argv))
    standalone = (args.command in ("poincare", "orbits") and args.map == "classical"
                  and args.K is not None and args.Omega is not None and args.config is None)
    try:
        raw, _ = resolve_input(args)
        params = derive_params(raw)
    except ValidationError as exc:
        if not standalone:
            print(f"deltakick: invalid input: {exc}", file=sys.stderr)
            return EXIT_INVALID
        params = None  # the map is fully specified by --K and --Omega
    except OSError as exc:
        print(f"deltakick: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    args.out.mkdir(parents=True, exist_ok=True)
    workers = args.threads or os.cpu_count() or 1
    try:
        with threadpool_limits(limits=workers):
            if args.command == "spectrum":
                return cmd_spectrum(args, params)
            if args.command == "husimi":
                return cmd_husimi(args, params)
            if args.command == "poincare":
                return cmd_poincare(args, params)
            if args.command == "orbits":
                return cmd_orbits(args, params)
            return cmd_evolve(args, params, workers)
    except (UsageError, ValueError) as exc:
        print(f"deltakick: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (floquet.UnitarityError, floquet.ResidualError, classical.OrbitNotFound,
            evolve.NoPersistentPeak, RuntimeError) as exc:
        print(f"deltakick: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
