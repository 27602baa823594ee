"""Command-line front end.

Subcommands
-----------
certify       span-gap certification pipeline (counterexample detection)
diamond       diamond-norm distance between two channels
bound         sandwich report for a Schur channel
discriminate  optimal two-outcome discrimination (states, or channels at a
              fixed input state)

All reports are machine-readable JSON (canonical formatting: sorted keys,
17-significant-digit floats) and embed the tolerances and solver
diagnostics needed to reproduce them.  Exit codes: 0 success, 2 parse
error, 3 precondition error, 4 solver non-convergence.

The environment variable CHANNEL_GAUGE_THREADS caps the number of parallel
multi-starts in the span-gap search (default 1; the merge is deterministic
either way).
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import bounds, catalog, chanio, sdpsolve
from .channels import KrausChannel, validate
from .errors import (
    DimensionError,
    ParameterError,
    ParseError,
    PreconditionError,
    SolverError,
    StructureError,
)
from .matcore import DensityOperator, trace_distance
from .schur import (
    DiagonalUnitaryMixture,
    SchurMatrix,
    is_schur_channel,
    mixture_as_channel,
    schur_to_kraus,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_SOLVER = 4

TP_UNITAL_TOL = 1e-9
DEFAULT_CERTIFY_TOL = 1e-4


def _load_any(path):
    obj, meta = chanio.load(path)
    return obj, meta


def _as_channel(obj) -> KrausChannel:
    if isinstance(obj, KrausChannel):
        return obj
    if isinstance(obj, SchurMatrix):
        return schur_to_kraus(obj)
    if isinstance(obj, DiagonalUnitaryMixture):
        return mixture_as_channel(obj)
    raise PreconditionError(f"expected a channel, got {type(obj).__name__}")


def _resolve_channel(args, attr="input"):
    builtin = getattr(args, "builtin", None)
    path = getattr(args, attr, None)
    if builtin:
        ch = catalog.BUILTIN_CHANNELS[builtin]()
        return ch, {"name": builtin, "source": "builtin"}
    if path is None:
        raise ParseError("either --input or --builtin is required")
    obj, meta = _load_any(path)
    return _as_channel(obj), meta


def _require_tp_unital(ch: KrausChannel):
    flags = ch.flags
    if flags.defect_tp > TP_UNITAL_TOL or flags.defect_unital > TP_UNITAL_TOL:
        raise PreconditionError(
            "channel must be trace preserving and unital within 1e-9 "
            f"(defects tp={flags.defect_tp:.2e}, unital={flags.defect_unital:.2e})"
        )


def _matrix_out(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(m)]


def _emit(report: dict, args) -> None:
    text = chanio.dumps(report)
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_certify(args) -> int:
    t0 = time.time()
    ch, meta = _resolve_channel(args)
    _require_tp_unital(ch)
    flags = ch.flags
    cp = bounds.c_phi(ch, seed=args.seed)
    unitary = bounds.unitary_in_span(ch, args.tol)
    schur_like = ch.is_diagonal()
    report = {
        "command": "certify",
        "channel": {"metadata": meta, "dim": ch.dim_in,
                    "tp_defect": flags.defect_tp, "unital_defect": flags.defect_unital,
                    "schur_channel": schur_like},
        "c_phi": cp.value,
        "c_phi_coeffs": _matrix_out(np.array(cp.coeffs)[None, :])[0],
        "unitary_in_span": None if unitary is None else _matrix_out(unitary),
        "n": args.n,
        "tolerances": {"certify_tol": args.tol, "tp_unital": TP_UNITAL_TOL,
                       "sdp_relative_gap": sdpsolve.DEFAULT_GAP_TOL},
        "seed": args.seed,
        "diagnostics": {"c_phi": cp.diagnostics},
    }
    if schur_like:
        sm = catalog.schur_matrix_of(ch)
        rep = bounds.sandwich_report(sm, budget=args.budget, seed=args.seed,
                                     channel_id=meta.get("name", "channel"))
        report["sandwich"] = rep.sandwich
        report["lambda_upper"] = rep.lambda_upper
        report["tensor_bound"] = bounds.tensor_bound_report(ch, 1, args.n, seed=args.seed)
    if cp.value > args.tol and schur_like:
        verdict = "counterexample-to-AQBC certified"
    elif cp.value > args.tol:
        verdict = "span-gap positive; single-copy bound only"
    elif unitary is not None:
        verdict = "not a counterexample"
    else:
        verdict = "inconclusive"
    report["verdict"] = verdict
    report["runtime_seconds"] = time.time() - t0
    _emit(report, args)
    return EXIT_OK


def cmd_diamond(args) -> int:
    a, meta_a = _resolve_channel(args, "input")
    if args.input_b is None:
        raise ParseError("--input-b is required")
    obj_b, meta_b = _load_any(args.input_b)
    b = _as_channel(obj_b)
    result = sdpsolve.diamond_distance(a, b)
    report = {
        "command": "diamond",
        "value": result.value,
        "p_succ": bounds.succ_probability(result.value),
        "channels": {"a": meta_a, "b": meta_b},
        "tolerances": {"sdp_relative_gap": sdpsolve.DEFAULT_GAP_TOL},
        "diagnostics": result.solution.diagnostics(),
    }
    _emit(report, args)
    return EXIT_OK


def cmd_bound(args) -> int:
    builtin = getattr(args, "builtin", None)
    if builtin:
        sm = catalog.schur_matrix_of(catalog.BUILTIN_CHANNELS[builtin]())
        meta = {"name": builtin, "source": "builtin"}
    else:
        if args.input is None:
            raise ParseError("either --input or --builtin is required")
        obj, meta = _load_any(args.input)
        if isinstance(obj, KrausChannel):
            if not obj.is_diagonal():
                raise PreconditionError("bound requires a Schur channel")
            sm = catalog.schur_matrix_of(obj)
        elif isinstance(obj, SchurMatrix):
            sm = obj
        elif isinstance(obj, DiagonalUnitaryMixture):
            from .schur import mixture_to_schur
            sm = mixture_to_schur(obj)
        else:
            raise PreconditionError("bound requires a Schur channel input")
    if not is_schur_channel(sm):
        raise PreconditionError("input is not a Schur channel (PSD, unit diagonal)")
    rep = bounds.sandwich_report(sm, budget=args.budget, seed=args.seed,
                                 channel_id=meta.get("name", "channel"))
    report = {"command": "bound", "channel": {"metadata": meta, "dim": sm.dim}}
    report.update(rep.to_dict())
    report["tolerances"] = {
        "sandwich_slack": 1e-6,
        "sdp_relative_gap": sdpsolve.DEFAULT_GAP_TOL,
        "lambda_stopping": 1e-5,
    }
    report["seed"] = args.seed
    _emit(report, args)
    return EXIT_OK


def cmd_discriminate(args) -> int:
    if args.input is None or args.input_b is None:
        raise ParseError("discriminate requires --input and --input-b")
    obj_a, meta_a = _load_any(args.input)
    obj_b, meta_b = _load_any(args.input_b)
    report = {"command": "discriminate", "inputs": {"a": meta_a, "b": meta_b}}
    if isinstance(obj_a, DensityOperator) and isinstance(obj_b, DensityOperator):
        res = bounds.helstrom_measurement(obj_a, obj_b)
        dist = trace_distance(obj_a, obj_b)
        report.update({
            "mode": "states",
            "trace_distance": dist,
            "p_succ": res.p_succ,
            "e0": _matrix_out(res.e0),
            "e1": _matrix_out(res.e1),
        })
    else:
        ch_a, ch_b = _as_channel(obj_a), _as_channel(obj_b)
        if args.state is None:
            raise ParseError("channel discrimination requires --state")
        rho, _ = _load_any(args.state)
        if not isinstance(rho, DensityOperator):
            raise ParseError("--state must point to a state file")
        d = ch_a.dim_in
        if rho.dim == d:
            out_a, out_b = ch_a.apply(rho.matrix), ch_b.apply(rho.matrix)
        elif rho.dim % d == 0:
            anc = rho.dim // d
            big_a = catalog.identity_channel(anc).tensor(ch_a)
            big_b = catalog.identity_channel(anc).tensor(ch_b)
            out_a, out_b = big_a.apply(rho.matrix), big_b.apply(rho.matrix)
        else:
            raise DimensionError(
                f"state dimension {rho.dim} incompatible with channel dimension {d}"
            )
        res = bounds.helstrom_measurement(out_a, out_b)
        dist = trace_distance(out_a, out_b)
        report.update({
            "mode": "channels-fixed-input",
            "fixed_input_distance": dist,
            "p_succ": res.p_succ,
        })
    report["tolerances"] = {"helstrom_consistency": 1e-10}
    _emit(report, args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="birkhoffgap",
        description="Distance bounds between unital quantum channels and "
                    "mixed-unitary channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, builtin=False, second=False, state=False):
        p.add_argument("--input", help="channel (or state) file")
        if builtin:
            p.add_argument("--builtin", choices=sorted(catalog.BUILTIN_CHANNELS),
                           help="use a built-in channel instead of --input")
        if second:
            p.add_argument("--input-b", dest="input_b", help="second input file")
        if state:
            p.add_argument("--state", help="input state file for channel discrimination")
        p.add_argument("--output", help="write the JSON report here instead of stdout")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for multi-start searches (default 0)")

    p = sub.add_parser("certify", help="certify a counterexample to the "
                                       "asymptotic Birkhoff property")
    common(p, builtin=True)
    p.add_argument("--tol", type=float, default=DEFAULT_CERTIFY_TOL,
                   help="span-gap threshold for certification (default 1e-4)")
    p.add_argument("--n", type=int, default=1, help="tensor-power exponent for the bound")
    p.add_argument("--budget", type=int, default=8, help="mixture-search budget")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("diamond", help="diamond distance between two channels")
    common(p, second=True)
    p.set_defaults(func=cmd_diamond)

    p = sub.add_parser("bound", help="sandwich report for a Schur channel")
    common(p, builtin=True)
    p.add_argument("--budget", type=int, default=12, help="mixture-search budget")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("discriminate", help="optimal discrimination of two states "
                                            "or two channels at a fixed input")
    common(p, second=True, state=True)
    p.set_defaults(func=cmd_discriminate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionError, DimensionError, StructureError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
