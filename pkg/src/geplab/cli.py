"""geplab command line.

Exit codes: 0 success, 2 bad arguments or config, 3 scalar Hamiltonian,
4 gapless parameters, 5 no protected edge pair, 6 other model failure
(no root, ambiguous edge pair, exceptional line, ...).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from typing import Sequence

import numpy as np

from . import classifier, dataio, linalg, pauli, ssh, sweep
from .errors import GaplessError, ModelError, NoEdgePairError

EXIT_USAGE = 2
EXIT_SCALAR = 3
EXIT_GAPLESS = 4
EXIT_NO_EDGE = 5
EXIT_MODEL = 6

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_PATTERNS = (
    re.compile(rf"^(?P<re>[+-]?{_NUM})$"),
    re.compile(rf"^(?P<im>[+-]?{_NUM})i$"),
    re.compile(rf"^(?P<re>[+-]?{_NUM})(?P<im>[+-]{_NUM})i$"),
)


def parse_complex(text: str) -> complex:
    """``a``, ``bi``, ``a+bi`` or ``a-bi`` with decimal floats, no whitespace."""
    for pat in _COMPLEX_PATTERNS:
        m = pat.match(text)
        if m:
            d = m.groupdict()
            return complex(float(d.get("re") or 0.0), float(d.get("im") or 0.0))
    raise argparse.ArgumentTypeError(f"not a complex literal: {text!r} (use a, bi, a+bi or a-bi)")


def parse_extended(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(value) or value < 0:
        raise argparse.ArgumentTypeError("value must be non-negative")
    return value


def parse_finite(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError("value must be finite")
    return value


def parse_axis(text: str) -> tuple[float, float, float]:
    named = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}
    key = text.lower().lstrip("+")
    if key in named:
        return named[key]
    if key.startswith("-") and key[1:] in named:
        return tuple(-c for c in named[key[1:]])
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        parts = ()
    if len(parts) != 3 or not any(parts) or not all(math.isfinite(p) for p in parts):
        raise argparse.ArgumentTypeError(f"axis must be x, y, z or 'a,b,c', got {text!r}")
    return parts


def parse_grid(text: str) -> sweep.Axis:
    try:
        return sweep.Axis.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


# defaults applied after the config file, so that file < flags < defaults works
DEFAULTS = {
    "t1": 0.0, "t2": 1.0, "gamma": 0.0, "eps": 0.0, "n": 20,
    "format": "csv", "out": None, "grid": [],
    "h0": 0j, "hx": 0j, "hy": 0j, "hz": 0j, "basis_axis": (0.0, 0.0, 1.0), "beta_b": 0.0,
    "beta_m": 0.0, "n_theta": 33, "n_phi": 65, "evaluator": "edge-lambda", "shuffle_seed": None,
    "boundaries_out": None, "hidden_numeric": False, "beta_b_divergent": False,
}


SWITCHES = ("beta_b_divergent", "hidden_numeric")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output file (default: stdout for data commands)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--workers", type=positive_int, help="worker processes (default $GEPLAB_WORKERS or 1)")
    p.add_argument("--config", help="key=value file; command-line flags take precedence")


def _add_ssh_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t1", type=parse_finite)
    p.add_argument("--t2", type=parse_finite)
    p.add_argument("--gamma", type=parse_finite)
    p.add_argument("--eps", type=parse_finite)
    p.add_argument("--n", type=positive_int, help="number of unit cells")
    p.add_argument("--grid", type=parse_grid, action="append", metavar="NAME:MIN:MAX:COUNT",
                   help="sweep axis (repeatable); names t1, t2, gamma, eps, N")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geplab", description="General exceptional points: two-level theory and the nonreciprocal SSH chain.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pc = sub.add_parser("classify", help="classify a two-level system")
    for name in ("h0", "hx", "hy", "hz"):
        pc.add_argument(f"--{name}", type=parse_complex, help="complex literal a, bi, a+bi, a-bi")
    pc.add_argument("--basis-axis", type=parse_axis)
    pc.add_argument("--beta-b", type=parse_extended)
    pc.add_argument("--beta-b-divergent", action="store_true", default=None)
    pc.add_argument("--config")

    ps = sub.add_parser("ssh", help="nonreciprocal SSH chain")
    ssub = ps.add_subparsers(dest="ssh_command", required=True, parser_class=_Parser)
    for name, text in (("spectrum", "open-chain spectrum / midgap pair"),
                       ("lambda", "state similarity of the edge pair"),
                       ("winding", "non-Bloch winding number"),
                       ("phase-diagram", "class map over (gamma, t1)"),
                       ("m-locus", "gamma on t1 = 0 where |Delta_bar| = eps"),
                       ("h-locus", "t1 where |Delta_bar| = eps"),
                       ("hidden", "hidden IB/IIB transition in t1")):
        sp = ssub.add_parser(name, help=text)
        _add_ssh_params(sp)
        _add_output(sp)
        if name == "phase-diagram":
            sp.add_argument("--boundaries-out", help="file for the per-gamma boundary curves")
            sp.add_argument("--hidden-numeric", action="store_true", default=None,
                            help="also bisect the lattice Lambda = 1/2 crossing per gamma (slow)")

    pp = sub.add_parser("peach", help="Bloch peach mesh")
    pp.add_argument("--beta-m", type=parse_extended)
    pp.add_argument("--beta-b", type=parse_extended)
    pp.add_argument("--n-theta", type=positive_int)
    pp.add_argument("--n-phi", type=positive_int)
    _add_output(pp)

    pw = sub.add_parser("sweep", help="generic grid sweep")
    pw.add_argument("--evaluator", choices=sorted(sweep.EVALUATORS))
    pw.add_argument("--shuffle-seed", type=int)
    _add_ssh_params(pw)
    _add_output(pw)
    return parser


def _read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    path = getattr(args, "config", None)
    if path:
        try:
            entries = _read_config(path)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        known = vars(args)
        for key, text in entries.items():
            if key in ("command", "ssh_command", "config") or key not in known:
                raise UsageError(f"unknown config key {key!r}")
            if known[key] not in (None, []):
                continue
            if key in SWITCHES:
                if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise UsageError(f"config key {key!r} expects true or false")
                setattr(args, key, text.lower() in ("true", "1", "yes"))
                continue
            prefix = [args.command] + ([args.ssh_command] if getattr(args, "ssh_command", None) else [])
            flag = "--" + key.replace("_", "-")
            argv = prefix[:]
            for v in (text.split(";") if key == "grid" else [text]):
                argv.append(f"{flag}={v}")
            setattr(args, key, getattr(parser.parse_args(argv), key))
    for key, value in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    if hasattr(args, "workers") and args.workers is None:
        env = os.environ.get("GEPLAB_WORKERS")
        try:
            args.workers = max(1, int(env)) if env else 1
        except ValueError:
            raise UsageError(f"GEPLAB_WORKERS must be an integer, got {env!r}") from None


# ------------------------------------------------------------------ output

def _emit(rows: list[dict], args) -> None:
    if args.out:
        dataio.write_rows(args.out, rows, args.format)
    else:
        sys.stdout.write(dataio.dumps(rows, args.format))


def _summary(**items) -> None:
    for k, v in items.items():
        if isinstance(v, float):
            v = "%.12g" % v
        elif isinstance(v, complex):
            v = "%.12g%+.12gi" % (v.real, v.imag)
        print(f"{k}={v}")


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(type(obj).__name__)


def _params(args) -> ssh.SSHParams:
    return ssh.SSHParams(args.t1, args.t2, args.gamma, args.eps, args.n)


def _base(args) -> dict:
    return {"t1": args.t1, "t2": args.t2, "gamma": args.gamma, "eps": args.eps, "N": args.n}


def _grid(args) -> sweep.Grid:
    return sweep.Grid(tuple(args.grid))


def _run_sweep(args, evaluator: str) -> int:
    records = sweep.sweep(_grid(args), evaluator, _base(args), workers=args.workers,
                          shuffle_seed=getattr(args, "shuffle_seed", None))
    _emit(dataio.records_to_rows(records), args)
    failed = sum(1 for r in records if not r.ok)
    print(f"points={len(records)} errors={failed}", file=sys.stderr)
    return 0


# ------------------------------------------------------------------ commands

def cmd_classify(args) -> int:
    h = pauli.PauliVector(args.h0, (args.hx, args.hy, args.hz))
    if h.norm() == 0.0:
        print("error: scalar Hamiltonian (h vector is zero)", file=sys.stderr)
        return EXIT_SCALAR
    basis = classifier.BasisSpec(args.basis_axis, math.inf if args.beta_b_divergent else args.beta_b,
                                 bool(args.beta_b_divergent))
    result = classifier.classify(classifier.SystemSpec(h, basis))
    print(json.dumps(result.as_dict(), default=_json_default))
    return 0


def cmd_ssh_spectrum(args) -> int:
    if args.grid:
        return _run_sweep(args, "edge-spectrum")
    p = _params(args)
    e_plus, e_minus, third = ssh.midgap_energies(p)
    h = ssh.build_gauged_hamiltonian(p)
    vals = linalg.eigenvalues(h)
    vals = vals[np.lexsort((vals.imag, vals.real))]
    _emit([{"index": i, **dataio.flatten({"E": complex(v)})} for i, v in enumerate(vals)], args)
    if args.out:
        _summary(E_plus=e_plus, E_minus=e_minus, E_bulk_min=third)
    return 0


def cmd_ssh_lambda(args) -> int:
    if args.grid:
        return _run_sweep(args, "edge-lambda")
    e = ssh.edge_states_numeric(_params(args))
    _summary(**{"lambda": e.lam, "E_plus": e.e_plus, "E_minus": e.e_minus})
    return 0


def cmd_ssh_winding(args) -> int:
    if args.grid:
        return _run_sweep(args, "winding")
    w = ssh.winding_number(_params(args))
    if w.criterion_branch:
        print("note: t1^2 < gamma^2, value from the |t1_bar| < |t2| criterion", file=sys.stderr)
    print(w.value)
    return 0


def cmd_ssh_phase_diagram(args) -> int:
    axes = {a.name: a for a in args.grid}
    unknown = set(axes) - {"gamma", "t1"}
    if unknown:
        raise UsageError(f"phase-diagram grids are over gamma and t1 only, got {sorted(unknown)}")
    g_axis = axes.get("gamma", sweep.Axis("gamma", -1.5, 1.5, 201))
    t_axis = axes.get("t1", sweep.Axis("t1", -1.5, 1.5, 201))
    diagram = sweep.phase_diagram(g_axis, t_axis, args.n, args.eps, args.t2, workers=args.workers,
                                  hidden_numeric=bool(args.hidden_numeric))
    _emit(dataio.records_to_rows(diagram.records), args)
    if args.boundaries_out:
        dataio.write_rows(args.boundaries_out, diagram.boundaries, args.format)
    counts: dict[str, int] = {}
    for r in diagram.records:
        key = r.outputs.get("category") if r.ok else f"error:{r.reason}"
        counts[key] = counts.get(key, 0) + 1
    print(" ".join(f"{k}={v}" for k, v in sorted(counts.items())), file=sys.stderr)
    return 0


def cmd_ssh_m_locus(args) -> int:
    _summary(gamma_star=ssh.solve_m_gep_gamma(args.n, args.eps, args.t2))
    return 0


def cmd_ssh_h_locus(args) -> int:
    if args.gamma == 0:
        raise UsageError("h-locus needs a non-zero --gamma")
    lo, hi = ssh.h_gep_roots(args.gamma, args.n, args.eps, args.t2)
    _summary(t1_star=lo, t1_star_upper=hi)
    return 0


def cmd_ssh_hidden(args) -> int:
    if args.gamma == 0:
        raise UsageError("hidden needs a non-zero --gamma")
    res = ssh.locate_hidden_transition(args.gamma, args.n, args.eps, args.t2)
    _summary(t1_star=res.t1_numeric, t1_competition=res.t1_competition, t1_asymptotic=res.t1_asymptotic)
    return 0


def cmd_peach(args) -> int:
    mesh = sweep.peach_mesh(args.beta_m, args.beta_b, args.n_theta, args.n_phi)
    rows = [{"theta": s.theta, "phi": s.phi, "radius": s.radius} for s in mesh.samples]
    _emit(rows, args)
    return 0


def cmd_sweep(args) -> int:
    if not args.grid:
        raise UsageError("sweep needs at least one --grid axis")
    return _run_sweep(args, args.evaluator)


SSH_COMMANDS = {
    "spectrum": cmd_ssh_spectrum,
    "lambda": cmd_ssh_lambda,
    "winding": cmd_ssh_winding,
    "phase-diagram": cmd_ssh_phase_diagram,
    "m-locus": cmd_ssh_m_locus,
    "h-locus": cmd_ssh_h_locus,
    "hidden": cmd_ssh_hidden,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config(parser, args)
        if args.command == "classify":
            return cmd_classify(args)
        if args.command == "ssh":
            return SSH_COMMANDS[args.ssh_command](args)
        if args.command == "peach":
            if args.n_theta < 8 or args.n_phi < 8:
                raise UsageError("--n-theta and --n-phi must be at least 8")
            return cmd_peach(args)
        return cmd_sweep(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except pauli.ScalarHamiltonianError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCALAR
    except GaplessError as exc:
        print(f"error: gapless: {exc}", file=sys.stderr)
        return EXIT_GAPLESS
    except NoEdgePairError as exc:
        print(f"error: no protected edge pair: {exc}", file=sys.stderr)
        return EXIT_NO_EDGE
    except (ModelError, linalg.ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
