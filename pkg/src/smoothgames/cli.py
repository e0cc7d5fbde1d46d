"""Command-line front end.

Exit status: 0 on success, 2 for usage or input errors (bad flags, unreadable
or malformed game files), 1 for numerical or runtime failures.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import dynamics, sweep, theory
from .errors import GameSpecError
from .games import BilinearGame, JointPoint, KappaAlphaGame, jacobian, load_game
from .spectral import Polynomial, Spectrum, eigenvalues, poly_roots

PROG = "smoothgames"


class UsageError(Exception):
    """Bad command-line input; reported with exit status 2."""

    def __init__(self, message, prog=PROG):
        super().__init__(message)
        self.prog = prog


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, prog=self.prog)


def parse_complex(text: str) -> complex:
    """Parse ``"1+1i"``, ``"-2.5i"``, ``"3"`` or ``"1-j"`` into a complex number."""
    s = text.strip().replace(" ", "").replace("i", "j")
    s = re.sub(r"(^|[+-])j", r"\g<1>1j", s)
    try:
        return complex(s)
    except ValueError:
        raise ValueError(f"not a complex number: {text!r}") from None


def _complex_list(text: str) -> list[complex]:
    try:
        return [parse_complex(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _range_or_list(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma list."""
    if ":" in text:
        try:
            start, stop, step = (float(t) for t in text.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from None
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        n = int(round((stop - start) / step))
        return [round(start + k * step, 12) for k in range(n + 1)]
    return _float_list(text)


def _positive_int(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {val}")
    return val


def _seed(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if val < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return val


def _fmt(x: float) -> str:
    return repr(float(x))


def _write(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _method_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", choices=["simultaneous", "alternating", "sim", "alt"],
                   default="simultaneous", help="update scheme")
    p.add_argument("--eta", type=float, default=None, help="step size for both players (sets eta1 and eta2)")
    p.add_argument("--eta1", type=float, default=0.1, help="step size of the theta player")
    p.add_argument("--eta2", type=float, default=0.1, help="step size of the phi player")
    p.add_argument("--beta", type=float, default=None, help="momentum for both players (sets beta1 and beta2)")
    p.add_argument("--beta1", type=float, default=0.0, help="momentum of the theta player")
    p.add_argument("--beta2", type=float, default=0.0, help="momentum of the phi player")


def _method(args) -> dynamics.MethodConfig:
    eta1 = args.eta if args.eta is not None else args.eta1
    eta2 = args.eta if args.eta is not None else args.eta2
    beta1 = args.beta if args.beta is not None else args.beta1
    beta2 = args.beta if args.beta is not None else args.beta2
    try:
        return dynamics.MethodConfig(args.scheme, eta1, eta2, beta1, beta2)
    except ValueError as exc:
        raise UsageError(f"--eta/--beta: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog=PROG, description="Gradient dynamics and spectra of smooth two-player games.",
                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", formatter_class=fmt,
                       help="eigenvalues of a game Jacobian or of its update operator")
    p.add_argument("--game", required=True, help="JSON game file")
    p.add_argument("--operator", action="store_true",
                   help="use the momentum update operator built from the method flags instead of the Jacobian")
    _method_flags(p)
    p.add_argument("--out", default="-", help="output JSON path ('-' for stdout)")

    p = sub.add_parser("trajectory", formatter_class=fmt, help="run the dynamics and write Delta_t as CSV")
    p.add_argument("--game", required=True, help="JSON game file")
    _method_flags(p)
    p.add_argument("--steps", type=_positive_int, default=1000, help="number of updates")
    p.add_argument("--theta", type=_float_list, default=None, help="initial theta (default: seeded normal)")
    p.add_argument("--phi", type=_float_list, default=None, help="initial phi (default: seeded normal)")
    p.add_argument("--record-every", type=_positive_int, default=None, help="also record iterates every k steps")
    p.add_argument("--seed", type=_seed, default=0, help="seed for the initial point")
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")

    p = sub.add_parser("sweep", formatter_class=fmt, help="compute a parameter grid and export it")
    p.add_argument("--figure", choices=sweep.PRESETS, default=None, help="pinned preset grid")
    p.add_argument("--diagnostic", choices=[d.value for d in sweep.Diagnostic], default=None,
                   help="diagnostic for a custom grid")
    p.add_argument("--game", default=None, help="JSON game file (normalized_delta grids; default scalar bilinear)")
    p.add_argument("--scheme", choices=["simultaneous", "alternating", "sim", "alt"], default="alternating",
                   help="update scheme for normalized_delta grids")
    p.add_argument("--x-values", type=_range_or_list, default=None,
                   help="x axis (eta, or alpha for optimal_beta) as start:stop:step or a comma list")
    p.add_argument("--y-values", type=_range_or_list, default=None,
                   help="y axis (beta, or log10 kappa for optimal_beta) as start:stop:step or a comma list")
    p.add_argument("--steps", type=_positive_int, default=None,
                   help=f"updates per cell for trajectory grids (None means {sweep.FIG4_STEPS})")
    p.add_argument("--seed", type=_seed, default=0, help="seed for the initial point")
    p.add_argument("--workers", type=_positive_int, default=sweep.default_workers(), help="worker processes")
    p.add_argument("--out", required=True, help="output CSV path; metadata goes to the same stem with .json")

    p = sub.add_parser("optstep", formatter_class=fmt, help="optimal step size for a Jacobian spectrum")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--eigs", type=_complex_list, help="comma-separated eigenvalues, e.g. '1+1i,2'")
    src.add_argument("--game", help="JSON game file (its Jacobian spectrum is used)")

    p = sub.add_parser("optmom", formatter_class=fmt, help="grid-searched optimal momentum of a kappa-alpha game")
    p.add_argument("--game", default=None, help="JSON kappa_alpha game file (overrides --alpha/--kappa)")
    p.add_argument("--alpha", type=float, default=1.0, help="cooperation weight alpha")
    p.add_argument("--kappa", type=float, default=1.0, help="condition number of D")
    p.add_argument("--eta-grid", type=_range_or_list, default="0.005:2:0.005", help="step-size search grid")
    p.add_argument("--beta-grid", type=_range_or_list, default="-1:1:0.01", help="momentum search grid")

    p = sub.add_parser("polyroots", formatter_class=fmt, help="roots of a polynomial or of a bilinear quartic")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--coeffs", type=_complex_list, help="coefficients in ascending degree order")
    src.add_argument("--char", choices=["sim", "alt"], help="characteristic quartic of the bilinear game")
    p.add_argument("--lambda-ata", type=float, default=1.0, help="eigenvalue of A^T A for --char")
    _method_flags(p)
    p.add_argument("--out", default="-", help="output JSON path ('-' for stdout)")
    return parser


def parse_game_file(path):
    """Game described by the JSON document at ``path`` (raises ``GameSpecError`` on schema errors)."""
    return load_game(path)


def _load(path):
    try:
        return parse_game_file(path)
    except FileNotFoundError:
        raise UsageError(f"--game: no such file: {path}") from None
    except GameSpecError as exc:
        raise UsageError(f"--game {path}: {exc}") from None
    except OSError as exc:
        raise UsageError(f"--game: cannot read {path}: {exc}") from None


def _spectrum_json(spec: Spectrum) -> str:
    return json.dumps(spec.to_dict(), indent=2) + "\n"


def cmd_spectrum(args) -> None:
    game = _load(args.game)
    if args.operator:
        spec = eigenvalues(dynamics.exact_linear_operator(game, _method(args)))
    else:
        spec = eigenvalues(jacobian(game))
    _write(_spectrum_json(spec), args.out)


def cmd_trajectory(args) -> None:
    game = _load(args.game)
    cfg = _method(args)
    d, p = game.dims
    init = sweep.seeded_init(game, args.seed)
    theta = init.theta if args.theta is None else np.array(args.theta)
    phi = init.phi if args.phi is None else np.array(args.phi)
    if theta.shape != (d,):
        raise UsageError(f"--theta: expected {d} values, got {theta.size}")
    if phi.shape != (p,):
        raise UsageError(f"--phi: expected {p} values, got {phi.size}")
    traj = dynamics.run(game, cfg, JointPoint(theta, phi), args.steps, args.record_every)
    if args.out in (None, "-"):
        dynamics.write_trajectory_csv(traj, sys.stdout)
    else:
        dynamics.write_trajectory_csv(traj, args.out)
    if traj.diverged_at is not None:
        print(f"{PROG}: diverged at step {traj.diverged_at}", file=sys.stderr)


def cmd_sweep(args) -> None:
    if args.figure is not None:
        if args.diagnostic or args.x_values or args.y_values or args.game:
            raise UsageError("--figure cannot be combined with --diagnostic/--x-values/--y-values/--game")
        result = sweep.run_preset(args.figure, seed=args.seed, steps=args.steps, workers=args.workers)
    else:
        if args.diagnostic is None:
            raise UsageError("--diagnostic: required unless --figure is given")
        for flag, val in (("--x-values", args.x_values), ("--y-values", args.y_values)):
            if not val:
                raise UsageError(f"{flag}: required for a custom grid")
        diag = sweep.Diagnostic(args.diagnostic)
        names = ("alpha", "log10_kappa") if diag is sweep.Diagnostic.OPTIMAL_BETA else ("eta", "beta")
        steps = args.steps
        if diag is sweep.Diagnostic.NORMALIZED_DELTA and steps is None:
            steps = sweep.FIG4_STEPS
        try:
            spec = sweep.GridSpec(names[0], args.x_values, names[1], args.y_values, diag, steps, args.seed)
        except ValueError as exc:
            raise UsageError(f"--x-values/--y-values: {exc}") from None
        if diag is sweep.Diagnostic.NORMALIZED_DELTA:
            game = _load(args.game) if args.game else BilinearGame([[1.0]])
            result = sweep.sweep_trajectory_grid(game, args.scheme, spec, workers=args.workers)
        elif diag is sweep.Diagnostic.OPTIMAL_BETA:
            result = sweep.sweep_optimal_momentum(spec, workers=args.workers)
        else:
            result = sweep.sweep_magnitude_grid(spec)
    sweep.export_grid(result, args.out)


def cmd_optstep(args) -> None:
    if args.game is not None:
        eigs = eigenvalues(jacobian(_load(args.game)))
    else:
        if not args.eigs:
            raise UsageError("--eigs: no eigenvalues given")
        eigs = args.eigs
    rep = theory.best_step_size(eigs)
    lines = [
        f"eta_best={_fmt(rep.eta_best)}",
        f"rho_best={_fmt(rep.rho_best)}",
        f"rho_best_sq={_fmt(rep.rho_best ** 2)}",
        f"eta_lower={_fmt(rep.eta_lower)}",
        f"eta_upper={_fmt(rep.eta_upper)}",
        f"lower_bound_rho_sq={_fmt(rep.lower_bound_rho_sq)}",
        f"upper_bound_rho_sq={_fmt(rep.upper_bound_rho_sq)}",
        f"delta_term={_fmt(rep.delta_term)}",
    ]
    print("\n".join(lines))


def cmd_optmom(args) -> None:
    if args.game is not None:
        game = _load(args.game)
        if not isinstance(game, KappaAlphaGame):
            raise UsageError(f"--game {args.game}: optmom needs a kappa_alpha game")
    else:
        try:
            game = KappaAlphaGame.from_kappa(args.alpha, args.kappa)
        except ValueError as exc:
            raise UsageError(f"--alpha/--kappa: {exc}") from None
    res = theory.optimal_momentum(game, args.eta_grid, args.beta_grid)
    print("\n".join([
        f"beta_opt={_fmt(res.beta_opt)}",
        f"eta_opt={_fmt(res.eta_opt)}",
        f"rho_opt={_fmt(res.rho_opt)}",
        f"polyak_beta={_fmt(theory.polyak_momentum(game.kappa))}",
    ]))


def cmd_polyroots(args) -> None:
    if args.coeffs is not None:
        try:
            poly = Polynomial(args.coeffs)
        except ValueError as exc:
            raise UsageError(f"--coeffs: {exc}") from None
        if poly.degree < 1:
            raise UsageError("--coeffs: polynomial must have degree >= 1")
    else:
        cfg = _method(args)
        if args.lambda_ata <= 0:
            raise UsageError("--lambda-ata: must be positive")
        fn = theory.char_poly_sim if args.char == "sim" else theory.char_poly_alt
        poly = fn(args.lambda_ata, cfg.eta1, cfg.eta2, cfg.beta1, cfg.beta2)
    _write(_spectrum_json(poly_roots(poly)), args.out)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "trajectory": cmd_trajectory,
    "sweep": cmd_sweep,
    "optstep": cmd_optstep,
    "optmom": cmd_optmom,
    "polyroots": cmd_polyroots,
}


def run_cli(argv=None) -> int:
    """Run one subcommand and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"{exc.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError, OSError) as exc:
        print(f"{PROG}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> int:
    return run_cli(sys.argv[1:])
