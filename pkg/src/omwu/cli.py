"""Command-line interface: exact solving, trajectory runs, spectral
certificates, and the two benchmark sweeps."""

from __future__ import annotations

import argparse
import json
import sys

from .bench import SweepConfig, sweep_dimension, sweep_error
from .dynamics import RunConfig, run, write_trajectory_csv
from .game import MatrixGame
from .oracle import solve_lp
from .spectral import certify_contraction


def _add_game_arg(parser):
    parser.add_argument("--game", required=True, help='JSON game file: {"A": [[...], ...]}')


def _parse_list(text, cast):
    return tuple(cast(tok) for tok in text.split(",") if tok.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="omwu", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_exact = sub.add_parser("exact", help="solve the game exactly")
    _add_game_arg(p_exact)
    p_exact.add_argument("--json", action="store_true", help="emit JSON instead of text")

    p_solve = sub.add_parser("solve", help="run learning dynamics to a target error")
    _add_game_arg(p_solve)
    p_solve.add_argument("--method", choices=("omwu", "omwu-linear", "mwu"), default="omwu")
    p_solve.add_argument("--eta", type=float, required=True)
    p_solve.add_argument("--max-iters", type=int, required=True)
    p_solve.add_argument("--target-error", type=float, default=0.0)
    p_solve.add_argument("--log", help="trajectory CSV output path")
    p_solve.add_argument("--log-every", type=int, default=1)
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--stall-constant", type=float, default=1.0)

    p_spec = sub.add_parser("spectral", help="contraction certificate at the equilibrium")
    _add_game_arg(p_spec)
    p_spec.add_argument("--eta", type=float, required=True)
    p_spec.add_argument("--json", action="store_true")

    p_dim = sub.add_parser("sweep-dim", help="iterations vs dimension sweep")
    p_dim.add_argument("--sizes", required=True, help="comma-separated strictly increasing sizes")
    p_dim.add_argument("--eta", type=float, default=0.01)
    p_dim.add_argument("--target-error", type=float, default=0.1)
    p_dim.add_argument("--trials", type=int, default=5)
    p_dim.add_argument("--seed", type=int, default=0)
    p_dim.add_argument("--max-iters", type=int, default=2_000_000)
    p_dim.add_argument("--jobs", type=int, default=1)
    p_dim.add_argument("--out", required=True)

    p_err = sub.add_parser("sweep-err", help="iterations vs error sweep")
    p_err.add_argument("--n", type=int, default=50)
    p_err.add_argument("--errors", required=True, help="comma-separated strictly decreasing errors")
    p_err.add_argument("--eta", type=float, default=0.01)
    p_err.add_argument("--trials", type=int, default=5)
    p_err.add_argument("--seed", type=int, default=0)
    p_err.add_argument("--max-iters", type=int, default=2_000_000)
    p_err.add_argument("--jobs", type=int, default=1)
    p_err.add_argument("--out", required=True)
    return parser


def _cmd_exact(args) -> int:
    eq = solve_lp(MatrixGame.load(args.game))
    payload = {
        "x_star": eq.x_star.probs.tolist(),
        "y_star": eq.y_star.probs.tolist(),
        "value": eq.value,
        "unique": eq.unique,
        "support_x": list(eq.support_x),
        "support_y": list(eq.support_y),
    }
    if args.json:
        print(json.dumps(payload))
    else:
        print(f"value     {eq.value:.12g}")
        print(f"x*        {eq.x_star.probs.tolist()}")
        print(f"y*        {eq.y_star.probs.tolist()}")
        print(f"unique    {str(eq.unique).lower()}")
    return 0


def _cmd_solve(args) -> int:
    game = MatrixGame.load(args.game)
    eq = solve_lp(game)
    config = RunConfig(
        eta=args.eta,
        max_iters=args.max_iters,
        target_l1_error=args.target_error,
        method=args.method,
        log_every=args.log_every,
        seed=args.seed,
        stall_constant=args.stall_constant,
    )
    result, records = run(game, eq, config)
    if args.log:
        write_trajectory_csv(args.log, records)
    print(
        f"method={result.method} eta={result.eta:g} iterations={result.iterations} "
        f"converged={str(result.converged).lower()} l1_error={result.final.l1_error:.6g} "
        f"kl={result.final.kl:.6g} stall_iteration={result.stall_iteration}"
    )
    return 0


def _cmd_spectral(args) -> int:
    game = MatrixGame.load(args.game)
    eq = solve_lp(game)
    cert = certify_contraction(eq, game, args.eta)
    payload = {
        "eigenvalues": [[z.real, z.imag] for z in cert.eigenvalues],
        "spectral_radius": cert.spectral_radius,
        "off_support_multipliers": list(cert.off_support_multipliers),
        "sigma_values": list(cert.sigma_values),
        "certified": cert.certified,
    }
    if args.json:
        print(json.dumps(payload))
    else:
        print(f"spectral_radius          {cert.spectral_radius:.12g}")
        print(f"off_support_multipliers  {list(cert.off_support_multipliers)}")
        print(f"sigma_values             {sorted(cert.sigma_values)}")
        print(f"certified                {str(cert.certified).lower()}")
        if cert.failures:
            print(f"failed_checks            {list(cert.failures)}")
    return 0


def _cmd_sweep_dim(args) -> int:
    config = SweepConfig(
        sizes=_parse_list(args.sizes, int),
        eta=args.eta,
        trials_per_point=args.trials,
        seed=args.seed,
        target_error=args.target_error,
        max_iters=args.max_iters,
        jobs=args.jobs,
    )
    sweep_dimension(config).write_csv(args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_sweep_err(args) -> int:
    config = SweepConfig(
        errors=_parse_list(args.errors, float),
        eta=args.eta,
        trials_per_point=args.trials,
        seed=args.seed,
        n_fixed=args.n,
        max_iters=args.max_iters,
        jobs=args.jobs,
    )
    sweep_error(config).write_csv(args.out)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "exact": _cmd_exact,
    "solve": _cmd_solve,
    "spectral": _cmd_spectral,
    "sweep-dim": _cmd_sweep_dim,
    "sweep-err": _cmd_sweep_err,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
