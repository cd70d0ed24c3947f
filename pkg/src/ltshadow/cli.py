"""Command-line front end.

Subcommands:
  decompose  block-coordinate split of a bipartite operator
  shadow     shadow projection of an operator (any number of factors)
  cone       membership oracle for one of the nested cones
  map        local positivity / positivity / shadow of a process
  fiber      sample the fiber of a shadow; optionally push through a map
  examples   one-shot verification report of the built-in reproductions

All input and output is JSON (see serialize).  Stochastic subcommands
require an explicit seed and echo it in the output.  Exit codes: 0 success,
2 malformed input, 3 dimension mismatch, 4 infeasible or undecided where a
decision was required, 5 internal numeric failure.  Output is byte-identical
across runs for identical (input, flags, seed).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .blocks import build_block_basis, decompose as block_decompose
from .cones import (
    FeasibilityParams,
    UNDECIDED,
    effect_in_shadow_cone,
    in_boxtimes_cone,
    in_max_cone,
    in_min_cone,
    in_positive_ss_cone,
)
from .errors import (
    DimensionMismatch,
    EigenConvergenceError,
    InfeasibleShadow,
    NotLocallyPositive,
    SupportViolation,
)
from .fiber import push_and_spread, sample_fiber
from .processes import (
    block_matrix,
    is_locally_positive,
    is_positive_map_heuristic,
    shadow_of_map,
)
from .serialize import (
    cone_result_to_json,
    dumps,
    jsonable,
    matrix_from_json,
    matrix_to_json,
    process_from_json,
)
from .shadow import ShadowState, kernel_component_norm, lt_multipartite
from .verify import run_verification_report

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_DIMENSION = 3
EXIT_UNDECIDED = 4
EXIT_NUMERIC = 5


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ValueError(f"cannot parse dims {text!r}; expected e.g. 2,2") from exc
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"dims must be positive integers, got {text!r}")
    return dims


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise _BadInput(f"malformed JSON: {exc}") from exc
    except OSError as exc:
        raise _BadInput(f"cannot read {path}: {exc}") from exc


class _BadInput(Exception):
    pass


def _write(payload: dict, path: str) -> None:
    text = dumps(payload) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _resolve_dims(file_dims, arg_dims, dim: int) -> tuple[int, ...]:
    dims = arg_dims if arg_dims is not None else file_dims
    if dims is None:
        raise DimensionMismatch(
            "factor dimensions required: pass --dims or include \"dims\" in the input"
        )
    if math.prod(dims) != dim:
        raise DimensionMismatch(
            f"dims {list(dims)} have product {math.prod(dims)}, matrix has dimension {dim}"
        )
    return dims


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def cmd_decompose(args) -> tuple[dict, int]:
    m, file_dims = matrix_from_json(_read_json(args.input))
    dims = _resolve_dims(file_dims, args.dims, m.shape[0])
    if len(dims) != 2:
        raise DimensionMismatch("decompose expects a bipartite operator")
    basis = build_block_basis(*dims)
    coords = block_decompose(m, basis)
    norms = coords.norms()
    payload = {
        "dims": list(dims),
        "ss_norm": norms["ss"],
        "sa_norm": norms["sa"],
        "as_norm": norms["as"],
        "aa_norm": norms["aa"],
        "coords": {name: jsonable(coords.coeffs(name)) for name in ("ss", "sa", "as", "aa")},
    }
    return payload, EXIT_OK


def cmd_shadow(args) -> tuple[dict, int]:
    m, file_dims = matrix_from_json(_read_json(args.input))
    dims = _resolve_dims(file_dims, args.dims, m.shape[0])
    state = lt_multipartite(m, dims)
    payload = matrix_to_json(state.op, dims)
    payload["kernel_component_norm"] = kernel_component_norm(m, dims)
    return payload, EXIT_OK


_CONE_NEEDS_SEED = {"min", "max", "boxtimes"}


def cmd_cone(args) -> tuple[dict, int]:
    m, file_dims = matrix_from_json(_read_json(args.input))
    dims = _resolve_dims(file_dims, args.dims, m.shape[0])
    if args.cone in _CONE_NEEDS_SEED and args.seed is None:
        raise _BadInput(f"--seed is required for cone {args.cone!r}")
    if args.cone == "psd-ss":
        result = in_positive_ss_cone(m, dims, tol=args.tol)
    elif args.cone == "effect":
        result = effect_in_shadow_cone(m, dims, tol=args.tol)
    else:
        params = FeasibilityParams(seed=args.seed, tol=args.tol)
        if args.cone == "boxtimes":
            result = in_boxtimes_cone(m, dims, params)
        elif args.cone == "max":
            result = in_max_cone(m, dims, params)
        else:
            result = in_min_cone(m, dims, params)
    payload = {"cone": args.cone, "dims": list(dims), "tol": args.tol}
    if args.seed is not None:
        payload["seed"] = args.seed
    payload.update(cone_result_to_json(result))
    code = EXIT_UNDECIDED if result.verdict == UNDECIDED else EXIT_OK
    return payload, code


def cmd_map(args) -> tuple[dict, int]:
    proc = process_from_json(_read_json(args.input))
    payload = {
        "in_dims": list(proc.in_dims),
        "out_dims": list(proc.out_dims),
        "check": args.check,
    }
    code = EXIT_OK
    if args.check == "local-positive":
        check = is_locally_positive(proc)
        payload["locally_positive"] = check.locally_positive
        payload["defect"] = check.defect
        payload["tolerance"] = check.tol
        if check.witness_kernel_element is not None:
            payload["witness_kernel_element"] = jsonable(check.witness_kernel_element)
            payload["witness_shadow_image"] = jsonable(check.witness_shadow_image)
    elif args.check == "positive":
        if args.seed is None:
            raise _BadInput("--seed is required for --check positive")
        params = FeasibilityParams(seed=args.seed, tol=args.tol)
        verdict = is_positive_map_heuristic(proc, params)
        payload["seed"] = args.seed
        payload["verdict"] = verdict.verdict
        payload["min_value"] = verdict.value
        payload["heuristic"] = verdict.heuristic
        if verdict.witness is not None:
            payload["witness_vector"] = jsonable(verdict.witness)
        if verdict.verdict == UNDECIDED:
            code = EXIT_UNDECIDED
    else:  # shadow
        shadow = shadow_of_map(proc)
        blocks = block_matrix(shadow)
        payload["shadow_matrix"] = jsonable(blocks.phi_ss)
    return payload, code


def cmd_fiber(args) -> tuple[dict, int]:
    m, file_dims = matrix_from_json(_read_json(args.shadow))
    dims = _resolve_dims(file_dims, args.dims, m.shape[0])
    shadow = ShadowState(op=m, dims=dims)
    sample = sample_fiber(shadow, n=args.n, seed=args.seed)
    payload = {
        "seed": args.seed,
        "dims": list(dims),
        "n_requested": sample.n_requested,
        "n_accepted": sample.n_accepted,
        "kernel_dim": sample.kernel_dim,
        "rejected": sample.rejected,
    }
    if args.map is not None:
        proc = process_from_json(_read_json(args.map))
        report = push_and_spread(sample, proc)
        payload["spread"] = {
            "n": report.n,
            "diameter": report.diameter,
            "mean_pairwise": report.mean_pairwise,
            "deterministic": report.deterministic,
            "excluded": report.excluded,
        }
    return payload, EXIT_OK


def cmd_examples(args) -> tuple[dict, int]:
    report = run_verification_report(seed=args.seed, include_upb=args.upb)
    return report, EXIT_OK if report["all_pass"] else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lt-shadow",
        description="Shadows of real quantum states: block decomposition, "
                    "cone oracles, process shadows, fiber sampling.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, dims_help="factor dimensions, e.g. 2,2"):
        p.add_argument("--input", "-i", default="-", help="input JSON file (default stdin)")
        p.add_argument("--output", "-o", default="-", help="output JSON file (default stdout)")
        p.add_argument("--dims", type=_parse_dims, default=None, help=dims_help)

    p = sub.add_parser("decompose", help="block-coordinate split of a bipartite operator")
    add_common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("shadow", help="shadow projection of an operator")
    add_common(p)
    p.set_defaults(func=cmd_shadow)

    p = sub.add_parser("cone", help="cone membership oracle")
    add_common(p)
    p.add_argument("--cone", required=True,
                   choices=("min", "psd-ss", "boxtimes", "max", "effect"))
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=None,
                   help="required for min/max/boxtimes")
    p.set_defaults(func=cmd_cone)

    p = sub.add_parser("map", help="checks on a linear process")
    p.add_argument("--input", "-i", default="-", help="process JSON (default stdin)")
    p.add_argument("--output", "-o", default="-")
    p.add_argument("--check", required=True,
                   choices=("local-positive", "positive", "shadow"))
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("fiber", help="sample the fiber of a shadow")
    p.add_argument("--shadow", required=True, help="shadow matrix JSON file")
    p.add_argument("--output", "-o", default="-")
    p.add_argument("--dims", type=_parse_dims, default=None)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--map", default=None, help="optional process JSON to push through")
    p.set_defaults(func=cmd_fiber)

    p = sub.add_parser("examples", help="run the built-in verification report")
    p.add_argument("--output", "-o", default="-")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--upb", action="store_true",
                   help="include the unextendible-product-basis state in the output")
    p.set_defaults(func=cmd_examples)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, code = args.func(args)
    except _BadInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, (DimensionMismatch, SupportViolation)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DIMENSION
        if isinstance(exc, (InfeasibleShadow, NotLocallyPositive)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_UNDECIDED
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except EigenConvergenceError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except np.linalg.LinAlgError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write(payload, getattr(args, "output", "-"))
    return code


if __name__ == "__main__":
    sys.exit(main())
