"""Command-line interface.

Exit codes: 0 success, 1 failed verification, 2 malformed input or usage,
3 a loaded state violates its invariants.
"""
from __future__ import annotations

import argparse
import sys

from . import formats, suites
from .analysis import distill_certificate, distillable_pure, scan
from .chsh import expectation_raw, make_chsh, make_chsh_bipartition, make_witness, witness_value
from .errors import ChshError, StateInvariantError
from .pair_ops import PairIndex
from .states import Bipartition, PureState, random_pure

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_STATE = 0, 1, 2, 3


def _tolerance(text: str) -> float:
    try:
        tol = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid tolerance {text!r}")
    if not 1e-14 <= tol <= 1e-3:
        raise argparse.ArgumentTypeError("tolerance must lie in [1e-14, 1e-3]")
    return tol


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid count {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("count must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_tolerance, default=1e-9, help="decision tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=42, help="random seed (default 42)")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(prog="chshblocks", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="scan every 2x2 block of a state")
    p.add_argument("state")

    p = sub.add_parser("witness", parents=[common], help="build W = 2I - B for one block")
    p.add_argument("state")
    p.add_argument("--alpha", nargs=2, type=int, required=True, metavar=("I", "J"))
    p.add_argument("--beta", nargs=2, type=int, required=True, metavar=("K", "L"))
    p.add_argument("--settings", required=True, help="settings JSON file")
    p.add_argument("--left", nargs="+", type=int, default=None,
                   help="subsystems on the left of the bipartition (multipartite states)")

    p = sub.add_parser("distill", parents=[common], help="two-qubit distillation certificate")
    p.add_argument("state")

    p = sub.add_parser("verify", parents=[common], help="run a randomized property suite")
    p.add_argument("--suite", choices=sorted(suites.SUITES), required=True)
    p.add_argument("--samples", type=_positive, default=500)

    p = sub.add_parser("random", parents=[common], help="write a Haar-random pure state")
    p.add_argument("--dims", nargs="+", type=int, required=True)
    return parser


def _emit(args, doc: dict, text: str) -> None:
    body = formats.dumps(doc) if args.format == "json" else text
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)


def _analyze(args) -> int:
    state = formats.load_state(args.state)
    report = scan(state)
    doc = formats.report_to_dict(report, state, args.tol)
    lines = [
        f"dims {list(report.dims)} ({doc['kind']}), {len(report.entries)} blocks"
        + (f" over {len(report.bipartitions)} bipartitions" if state.m > 2 else ""),
        f"max block CHSH value: {report.max_block:.12g}",
        f"max raw CHSH value:   {report.max_raw:.12g}",
        f"entangled: {'yes' if report.entangled else 'no'}",
    ]
    if report.best is not None:
        b = report.best
        where = f" in {b.bipartition.label()}" if b.bipartition else ""
        lines.append(f"best block: alpha={b.alpha.as_list()} beta={b.beta.as_list()}{where}, weight {b.weight:.12g}")
    _emit(args, doc, "\n".join(lines) + "\n")
    return EXIT_OK


def _witness(args) -> int:
    state = formats.load_state(args.state)
    settings = formats.load_settings(args.settings)
    alpha, beta = PairIndex(*args.alpha), PairIndex(*args.beta)
    if args.left is not None:
        p = Bipartition.from_left(args.left, state.m)
        op = make_chsh_bipartition(p, alpha, beta, settings, state.dims)
    elif state.m == 2:
        p = None
        op = make_chsh(alpha, beta, settings, state.dims)
    else:
        raise ChshError("multipartite states need --left to choose a bipartition")
    w = make_witness(op, args.tol)
    value = witness_value(w, state)
    doc = {
        "p": None if p is None else {"left": list(p.left), "right": list(p.right)},
        "alpha": alpha.as_list(),
        "beta": beta.as_list(),
        "settings": settings.to_dict(),
        "raw_value": expectation_raw(op, state),
        "expectation": value,
        "detected": value < -args.tol,
        "min_eigenvalue": w.min_eigenvalue,
        "nontrivial": w.nontrivial,
        "matrix": formats.matrix_to_dict(w.matrix),
    }
    text = (f"Tr(W rho) = {value:.12g} ({'negative: entanglement detected' if doc['detected'] else 'non-negative'})\n"
            f"min eigenvalue of W = {w.min_eigenvalue:.12g} (nontrivial witness: {'yes' if w.nontrivial else 'no'})\n")
    _emit(args, doc, text)
    return EXIT_OK


def _distill(args) -> int:
    state = formats.load_state(args.state)
    cert = distill_certificate(state)
    pure = isinstance(state, PureState)
    if cert is not None:
        verdict = "distillable"
    elif pure:
        verdict = "none (pure, separable)" if not distillable_pure(state) else "undetermined"
    else:
        verdict = "undetermined"
    doc = {"verdict": verdict, "kind": "pure" if pure else "mixed", "certificate": formats.certificate_to_dict(cert)}
    text = verdict
    if cert is not None:
        text += (f": alpha0={cert.alpha0.as_list()} beta0={cert.beta0.as_list()}"
                 f", projected concurrence {cert.concurrence:.12g}")
    _emit(args, doc, text + "\n")
    return EXIT_OK


def _verify(args) -> int:
    kwargs = {} if args.suite == "decomposition" else {"tol": args.tol}
    result = suites.SUITES[args.suite](args.samples, args.seed, **kwargs)
    lines = [f"suite {result.suite}: {'PASS' if result.passed else 'FAIL'}"]
    lines += [f"  [{'PASS' if c.passed else 'FAIL'}] {c.name}" for c in result.checks]
    _emit(args, result.to_dict(), "\n".join(lines) + "\n")
    return EXIT_OK if result.passed else EXIT_FAIL


def _random(args) -> int:
    psi = random_pure(args.dims, args.seed)
    doc = formats.state_to_dict(psi)
    _emit(args, doc, formats.dumps(doc))
    return EXIT_OK


COMMANDS = {"analyze": _analyze, "witness": _witness, "distill": _distill, "verify": _verify, "random": _random}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except StateInvariantError as exc:
        print(f"error: invalid state: {exc}", file=sys.stderr)
        return EXIT_STATE
    except ChshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
