"""Command-line front end: validate, predict, verify, compile, demo.

Exit codes: 0 success, 1 verification or compilation failure, 2 usage,
I/O or parse errors.  The default seed comes from ESPEC_SEED when set.
All reports are deterministic under fixed seed and inputs; --report-dir
additionally writes the trial table as CSV plus rendered figures.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .labels import ANTILINEAR, FunctionalLabel
from .linalg import random_unitary
from .network import NetworkError
from .oracle import verify_theorem
from .paths import PathError, composite, validate_path
from .protocols import (
    NotCompilableError,
    builtin_gate_teleportation,
    builtin_parallel,
    builtin_swap,
    builtin_teleportation,
    compile_unconditional,
    verify_compiled,
)
from .report import RunReport, TrialRow
from .specfile import (
    SpecSerializeError,
    document_from_network,
    parse,
    serialize,
    validate_document,
)

_NAMED_MATRICES = {
    "id": np.eye(2, dtype=complex),
    "pi": np.array([[0, 1], [1, 0]], dtype=complex),
    "idstar": np.array([[1, 0], [0, -1]], dtype=complex),
    "pistar": np.array([[0, -1], [1, 0]], dtype=complex),
}

_NAMED_GATES = {
    "cnot": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                     dtype=complex),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "s": np.diag([1, 1j]).astype(complex),
    "x": _NAMED_MATRICES["pi"],
    "z": _NAMED_MATRICES["idstar"],
}


def _default_seed() -> int:
    env = os.environ.get("ESPEC_SEED")
    try:
        return int(env) if env else 0
    except ValueError:
        return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entflow",
        description="Entanglement network predictions, verification, and "
                    "protocol compilation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an .espec file")
    p.add_argument("file")

    p = sub.add_parser("predict", help="print the composite label of a path")
    p.add_argument("file")
    p.add_argument("--path", required=True, dest="path_name")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("verify", help="check path predictions against the simulator")
    p.add_argument("file")
    p.add_argument("--path", required=True, dest="path_name")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--json", action="store_true")
    p.add_argument("--report-dir", default=None)

    p = sub.add_parser("compile", help="compile a conditional protocol")
    p.add_argument("file")
    p.add_argument("--path", required=True, dest="path_name")
    p.add_argument("--target", default=None,
                   help="target label name (id, pi, idstar, pistar, or an event)")
    p.add_argument("-o", "--output", default=None, help="write compiled .espec")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--json", action="store_true")
    p.add_argument("--report-dir", default=None)

    p = sub.add_parser("demo", help="build, compile and verify a builtin protocol")
    p.add_argument("which", choices=["teleport", "gateteleport", "swap", "parallel"])
    p.add_argument("--gate", default="cnot", choices=sorted(_NAMED_GATES),
                   help="gate for gateteleport")
    p.add_argument("-m", type=int, default=3, help="chain length for parallel")
    p.add_argument("--two-stage", action="store_true",
                   help="teleport via the two one-bit virtual measurements")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--json", action="store_true")
    p.add_argument("--report-dir", default=None)
    p.add_argument("-o", "--output", default=None, help="write compiled .espec")
    return parser


def _load(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return None, 2
    result = parse(text)
    if not result.ok:
        for d in result.diagnostics:
            print(f"{path}:{d}", file=sys.stderr)
        return None, 2
    return result.document, 0


def _emit(report: RunReport, args) -> None:
    body = report.to_json() if getattr(args, "json", False) else report.to_text()
    sys.stdout.write(body)
    if getattr(args, "report_dir", None):
        written = report.write_all(args.report_dir, getattr(args, "json", False))
        for name in written:
            print(f"wrote {name}", file=sys.stderr)


def _cmd_validate(args) -> int:
    try:
        with open(args.file, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    result = parse(text)
    if not result.ok:
        for d in result.diagnostics:
            print(f"{args.file}:{d}")
        return 1
    problems = validate_document(result.document)
    for d in problems:
        print(f"{args.file}:{d}")
    if problems:
        return 1
    print(f"{args.file}: ok")
    return 0


def _cmd_predict(args) -> int:
    doc, code = _load(args.file)
    if doc is None:
        return code
    try:
        network = doc.to_network()
        path = doc.path_for(args.path_name, network)
    except (KeyError, NetworkError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    problems = validate_path(network, path)
    if problems:
        for d in problems:
            print(f"{args.file}:{d}", file=sys.stderr)
        return 1
    try:
        label = composite(network, path)
    except PathError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    report = RunReport(
        command=f"predict {args.file} --path {args.path_name}",
        version=__version__,
        notes=[f"linearity: {label.linearity.value}"],
        matrices=[("composite", label.matrix)],
    )
    _emit(report, args)
    return 0


def _cmd_verify(args) -> int:
    doc, code = _load(args.file)
    if doc is None:
        return code
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        network = doc.to_network()
        path = doc.path_for(args.path_name, network)
    except (KeyError, NetworkError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    problems = validate_path(network, path)
    if problems:
        for d in problems:
            print(f"{args.file}:{d}", file=sys.stderr)
        return 1
    result = verify_theorem(network, path, trials=args.trials, seed=seed,
                            tol=args.tol)
    report = RunReport(
        command=(f"verify {args.file} --path {args.path_name} "
                 f"--trials {args.trials} --seed {seed}"),
        seed=seed,
        tol=args.tol,
        version=__version__,
        trials=[
            TrialRow(t.index, "", t.zero_amplitude, t.passed,
                     t.factor_residual, t.match_deviation)
            for t in result.trials
        ],
    )
    _emit(report, args)
    return 0 if result.all_passed else 1


def _resolve_target(doc, network, name, base):
    if name is None:
        return None
    if name in _NAMED_MATRICES:
        return FunctionalLabel(_NAMED_MATRICES[name], base.linearity)
    event = network.event(name)  # KeyError -> usage error upstream
    return FunctionalLabel(event.label.matrix, base.linearity)


def _cmd_compile(args) -> int:
    doc, code = _load(args.file)
    if doc is None:
        return code
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        network = doc.to_network()
        path = doc.path_for(args.path_name, network)
    except (KeyError, NetworkError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    if doc.protocol is not None:
        measure_names = doc.protocol.measure
    else:
        measure_names = tuple(m.name for m in doc.measurements)
    if not measure_names:
        print("error: no measurement families declared", file=sys.stderr)
        return 2
    measurements = {}
    for name in measure_names:
        rec = doc.measurement_record(name)
        measurements[rec.at] = doc.measurement_for(name, network)
    base = composite(network, path)
    try:
        target = _resolve_target(doc, network, args.target, base)
    except KeyError:
        print(f"error: unknown target {args.target!r}", file=sys.stderr)
        return 2
    try:
        compiled = compile_unconditional(network, path, measurements, target,
                                         tol=args.tol)
    except (NotCompilableError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    checks = verify_compiled(compiled, trials=args.trials, seed=seed, tol=args.tol)
    report = _compiled_report(
        f"compile {args.file} --path {args.path_name}", compiled, checks,
        seed, args.tol,
    )
    _emit(report, args)
    if args.output:
        code = _write_compiled(doc, network, path, args, compiled)
        if code:
            return code
    return 0 if report.passed else 1


def _write_compiled(doc, network, path, args, compiled) -> int:
    measurements = {}
    for m in doc.measurements:
        measurements[m.name] = (m.at, doc.measurement_for(m.name, network))
    out_doc = document_from_network(
        network,
        paths={args.path_name: path},
        measurements=measurements,
        protocol=(doc.protocol.name if doc.protocol else "compiled",
                  tuple(m for m in measurements)),
        corrections={
            tokens: list(events)
            for tokens, events in compiled.branch_corrections.items()
        },
    )
    try:
        text = serialize(out_doc)
    except SpecSerializeError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    with open(args.output, "w", encoding="utf-8") as handle:
        handle.write(text)
    print(f"wrote {args.output}", file=sys.stderr)
    return 0


def _compiled_report(command, compiled, checks, seed, tol) -> RunReport:
    trials = []
    for check in checks:
        branch = ".".join(check.tokens)
        for t in check.trials:
            trials.append(TrialRow(t.index, branch, t.zero_amplitude, t.passed,
                                   0.0, t.deviation))
    report = RunReport(
        command=command,
        seed=seed,
        tol=tol,
        version=__version__,
        notes=[
            f"branches: {len(compiled.branches())}",
            f"designated: {'.'.join(compiled.designated)}",
            f"target linearity: {compiled.target.linearity.value}",
        ],
        matrices=[("target", compiled.target.matrix)],
        trials=trials,
        corrections=[
            (".".join(tokens), matrix)
            for tokens, matrix in sorted(compiled.corrections.items())
        ],
    )
    return report


def _cmd_demo(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.which == "teleport":
        builtin = builtin_teleportation(two_stage=args.two_stage)
        tag = "teleport --two-stage" if args.two_stage else "teleport"
    elif args.which == "gateteleport":
        matrix = _NAMED_GATES[args.gate]
        builtin = builtin_gate_teleportation(FunctionalLabel(matrix, ANTILINEAR))
        tag = f"gateteleport --gate {args.gate}"
    elif args.which == "swap":
        builtin = builtin_swap()
        tag = "swap"
    else:
        rng = np.random.default_rng(seed)
        gates = [FunctionalLabel(random_unitary(rng, 2), ANTILINEAR)
                 for _ in range(max(1, args.m))]
        builtin = builtin_parallel(gates)
        tag = f"parallel -m {max(1, args.m)}"
    try:
        compiled = builtin.compile(tol=args.tol)
    except NotCompilableError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    checks = verify_compiled(compiled, trials=args.trials, seed=seed, tol=args.tol)
    report = _compiled_report(f"demo {tag}", compiled, checks, seed, args.tol)
    _emit(report, args)
    if args.output:
        measurements = {
            f"family_{at}": (at, fam) for at, fam in builtin.measurements.items()
        }
        out_doc = document_from_network(
            builtin.network,
            paths={"main": builtin.path},
            measurements=measurements,
            protocol=("demo", tuple(measurements)),
            corrections={
                tokens: list(events)
                for tokens, events in compiled.branch_corrections.items()
            },
        )
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(serialize(out_doc))
        print(f"wrote {args.output}", file=sys.stderr)
    return 0 if report.passed else 1


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    handlers = {
        "validate": _cmd_validate,
        "predict": _cmd_predict,
        "verify": _cmd_verify,
        "compile": _cmd_compile,
        "demo": _cmd_demo,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
