"""Command-line front end: determinants by any method, characteristic
polynomials, cross-method comparison, prime cycles, moment checks, and
random instance generation.

Exit codes: 0 success, 1 internal invariant violation or disagreement,
2 input validation failure, 3 method or size refusal.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from .errors import HolodetError, InvariantViolation, MethodRefusal, ValidationError
from .linalg import Matrix, charpoly_oracle, det_oracle
from .ring import Poly, Symbols, scalar_str, scalars_close, to_complex
from .quiver import (
    Representation,
    gen_example,
    haar_like_unitary,
    instance_from_json,
    instance_to_json,
    load_instance,
    validate,
)
from .laplacian import (
    build_laplacian,
    charpoly_laplacian,
    det_laplacian_cycles,
    hol_trace,
    weight_product,
    wilson_moment,
)
from .blockdet import det_block_perm, det_perm_traces, det_trace_formal
from .vectorfields import det_vector_fields, term_budget
from .euler import det_euler_finite, det_euler_truncated
from .walks import enumerate_gcycle_multisets, prime_cycles, prime_finiteness

DET_METHODS = (
    "oracle",
    "perm",
    "block-perm",
    "trace-formal",
    "cycles",
    "vector-fields",
    "euler-finite",
    "euler-truncated",
)


def _value_json(value, mode):
    if mode == "float":
        z = to_complex(value)
        return {"re": z.real, "im": z.imag}
    return scalar_str(value)


def _value_text(value, mode):
    if mode == "float":
        z = to_complex(value)
        return scalar_str(z)
    return scalar_str(value)


def _load(args):
    if args.example:
        q, rep, w = gen_example(
            args.example,
            seed=args.seed,
            p=args.p,
            max_edges=args.max_edges,
            max_rank=args.max_rank,
        )
        if args.example in ("two_cycle", "acyclic", "unicyclic", "figure5"):
            if args.mode != "symbolic":
                raise MethodRefusal(
                    f"example '{args.example}' is symbolic; use --mode symbolic"
                )
        if args.example == "random" and args.mode == "float":
            rep = Representation(
                rep.ranks,
                {eid: m.to_complex() for eid, m in rep.matrices.items()},
            )
            w = {eid: complex(to_complex(x)) for eid, x in w.items()}
        return q, rep, w
    if not args.input:
        raise ValidationError(["no input: pass --input FILE or --example NAME"])
    return load_instance(args.input, mode=args.mode)


def _build(args):
    q, rep, w = _load(args)
    bad = validate(q, rep, w)
    if bad:
        raise ValidationError(bad)
    return build_laplacian(q, rep, w)


def _run_method(method, lap, args):
    if method == "oracle":
        return det_oracle(lap.matrix), None
    if method == "perm":
        return det_perm_traces(lap.matrix), None
    if method == "block-perm":
        return det_block_perm(lap.block), None
    if method == "trace-formal":
        return det_trace_formal(lap.block), None
    if method == "cycles":
        terms = sum(1 for _ in enumerate_gcycle_multisets(lap.quiver, lap.ranks))
        return det_laplacian_cycles(lap), terms
    if method == "vector-fields":
        return det_vector_fields(lap, budget=args.budget), None
    if method == "euler-finite":
        return det_euler_finite(lap), None
    if method == "euler-truncated":
        if args.mode != "float":
            raise MethodRefusal("euler-truncated requires --mode float")
        kappa = _parse_kappa(args, lap.quiver.p)
        res = det_euler_truncated(lap, kappa, tol=args.tol)
        return res.value, res.prime_count
    raise MethodRefusal(f"unknown method '{method}'")


def _parse_kappa(args, p):
    if not args.kappa:
        return (0.0,) * p
    parts = [float(x) for x in args.kappa.split(",")]
    if len(parts) == 1:
        return (parts[0],) * p
    if len(parts) != p:
        raise ValidationError([f"--kappa needs 1 or {p} values, got {len(parts)}"])
    return tuple(parts)


def _emit(args, payload, text_lines):
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=False))
    else:
        for line in text_lines:
            print(line)


def cmd_det(args):
    lap = _build(args)
    start = time.perf_counter()
    value, terms = _run_method(args.method, lap, args)
    elapsed = time.perf_counter() - start
    payload = {
        "command": "det",
        "method": args.method,
        "mode": args.mode,
        "value": _value_json(value, args.mode),
    }
    if terms is not None:
        payload["terms"] = terms
    if args.timing:
        payload["timing_s"] = elapsed
    _emit(args, payload, [_value_text(value, args.mode)])
    return 0


def specialize_shifts(poly, tnames, n):
    """Substitute every per-vertex shift symbol by a single symbol t and
    return the coefficient list of t^0 .. t^n (scalars or polynomials)."""
    others = tuple(name for name in poly.syms.names if name not in tnames)
    target = Symbols(("t",) + others)
    tvar = Poly.variable(target, "t")
    assign = {name: tvar for name in tnames}
    for name in others:
        assign[name] = Poly.variable(target, name)
    spec = poly.eval(assign)
    if not isinstance(spec, Poly):
        spec = Poly.const(target, spec)
    coeffs = []
    for j in range(n + 1):
        terms = {
            (0,) + exps[1:]: c for exps, c in spec.terms.items() if exps[0] == j
        }
        cj = Poly(target, terms)
        if not others:
            cj = cj.constant_value() if not cj.is_zero else 0
        coeffs.append(cj)
    return coeffs


def cmd_charpoly(args):
    lap = _build(args)
    n = sum(lap.ranks)
    if args.mode == "float":
        coeffs = charpoly_oracle(lap.matrix.to_complex())
    else:
        poly = charpoly_laplacian(lap)
        tnames = tuple(f"t{a + 1}" for a in range(lap.quiver.p))
        coeffs = specialize_shifts(poly, tnames, n)
    payload = {
        "command": "charpoly",
        "mode": args.mode,
        "coefficients": [_value_json(c, args.mode) for c in coeffs],
    }
    _emit(
        args,
        payload,
        [f"t^{j}: {_value_text(c, args.mode)}" for j, c in enumerate(coeffs)],
    )
    return 0


def _applicable_methods(lap, args):
    n = sum(lap.ranks)
    methods = ["oracle", "cycles"]
    if args.mode == "symbolic" and n > 8:
        methods.remove("oracle")
    # permutation sums over polynomial entries blow up well before the
    # numeric size caps, so gate them tighter in symbolic mode
    perm_cap, formal_cap = (5, 5) if args.mode == "symbolic" else (8, 7)
    if n <= perm_cap:
        methods += ["perm", "block-perm"]
    if n <= formal_cap:
        methods.append("trace-formal")
    stacks = 1
    for a in range(lap.quiver.p):
        stacks *= max(1, lap.quiver.outdeg(a)) ** lap.ranks[a]
    import math as _math
    if stacks * _math.factorial(n) <= (args.budget or term_budget()):
        methods.append("vector-fields")
    if prime_finiteness(lap.quiver).finite:
        methods.append("euler-finite")
    return methods


def cmd_compare(args):
    lap = _build(args)
    wanted = args.methods.split(",") if args.methods else _applicable_methods(lap, args)
    rows = []
    values = []
    for method in wanted:
        start = time.perf_counter()
        try:
            value, terms = _run_method(method, lap, args)
        except MethodRefusal as exc:
            rows.append({"method": method, "skipped": str(exc)})
            continue
        elapsed = time.perf_counter() - start
        row = {"method": method, "value": _value_json(value, args.mode)}
        if terms is not None:
            row["terms"] = terms
        if args.timing:
            row["timing_s"] = elapsed
        rows.append(row)
        values.append((method, value))

    agree = True
    max_disc = 0.0
    exact_mode = args.mode != "float"
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            a, b = values[i][1], values[j][1]
            if exact_mode:
                if not (a == b):
                    agree = False
                    max_disc = "nonzero"
            else:
                d = abs(to_complex(a) - to_complex(b))
                max_disc = max(max_disc, d)
                if not scalars_close(a, b):
                    agree = False
    payload = {
        "command": "compare",
        "mode": args.mode,
        "methods": rows,
        "max_discrepancy": 0 if (exact_mode and agree) else max_disc,
        "agree": agree,
    }
    lines = []
    for row in rows:
        if "skipped" in row:
            lines.append(f"{row['method']}: skipped ({row['skipped']})")
        else:
            lines.append(f"{row['method']}: {row['value']}")
    lines.append(f"agree: {agree}")
    _emit(args, payload, lines)
    if not agree:
        raise InvariantViolation("determinant methods disagree")
    return 0


def cmd_primes(args):
    q, rep, w = _load(args)
    bad = validate(q, rep, w)
    if bad:
        raise ValidationError(bad)
    if args.max_len:
        cycles = prime_cycles(q, args.max_len)
        finite = None
    else:
        fin = prime_finiteness(q)
        finite = fin.finite
        if fin.finite:
            cycles = list(fin.cycles)
        else:
            payload = {"command": "primes", "finite": False}
            _emit(args, payload, ["infinite prime set; rerun with --max-len"])
            return 0
    payload = {
        "command": "primes",
        "cycles": [
            {"edges": list(c.edges), "vertices": [v + 1 for v in c.srcs]}
            for c in cycles
        ],
    }
    if finite is not None:
        payload["finite"] = finite
    lines = [",".join(c.edges) for c in cycles]
    _emit(args, payload, lines or ["(none)"])
    return 0


def _sign_distribution(quiver, ranks):
    dists = {}
    for e in quiver.edges:
        r_src, r_tgt = ranks[e.src], ranks[e.tgt]
        if r_src != r_tgt:
            raise MethodRefusal(
                "built-in moment distribution needs equal ranks per edge"
            )
        ident = Matrix.identity(r_src).map(Fraction)
        flip = Matrix.from_rows(
            [
                [Fraction(-1 if (i == j == r_src - 1) else (1 if i == j else 0))
                 for j in range(r_src)]
                for i in range(r_src)
            ]
        )
        dists[e.id] = [(Fraction(1, 2), ident), (Fraction(1, 2), flip)]
    return dists


def cmd_moments(args):
    q, rep, w = _load(args)
    bad = validate(q, rep, w)
    if bad:
        raise ValidationError(bad)
    if args.mc_samples:
        return _moments_monte_carlo(args, q, rep, w)
    if args.mode == "float":
        raise MethodRefusal("exact moments need --mode exact; use --mc-samples for float")
    dists = _sign_distribution(q, rep.ranks)
    report = wilson_moment(q, w, rep.ranks, dists, args.k)
    payload = {
        "command": "moments",
        "k": args.k,
        "lhs": _value_json(report.lhs, args.mode),
        "rhs": _value_json(report.rhs, args.mode),
        "agree": bool(report.agree),
        "terms": len(report.rows),
    }
    _emit(
        args,
        payload,
        [
            f"lhs: {_value_text(report.lhs, args.mode)}",
            f"rhs: {_value_text(report.rhs, args.mode)}",
            f"agree: {report.agree}",
        ],
    )
    if not report.agree:
        raise InvariantViolation("moment identity failed")
    return 0


def _moments_monte_carlo(args, q, rep, w):
    import math
    import random

    if args.mode != "float":
        raise MethodRefusal("--mc-samples requires --mode float")
    rng = random.Random(args.seed)
    ranks = rep.ranks
    for e in q.edges:
        if ranks[e.src] != ranks[e.tgt]:
            raise MethodRefusal("Monte Carlo sampling needs equal ranks per edge")
    from .walks import enumerate_gcycle_multisets as _ems

    multisets = list(_ems(q, tuple(ranks)))
    from .quiver import vertex_z

    z = vertex_z(q, w)
    p = q.p

    def comb_weight(ms):
        visits = ms.visits(p)
        term = 1
        for za, na, va in zip(z, ranks, visits):
            term = term * to_complex(za) ** (na - va)
        for cyc, mult in ms:
            f = -to_complex(weight_product(w, cyc)) / cyc.valuation
            for _ in range(mult):
                term = term * f
        return term / ms.multiplicity_factorial()

    import itertools

    weights_by_ms = [comb_weight(ms) for ms in multisets]
    tuples = list(itertools.product(range(len(multisets)), repeat=args.k))

    lhs_samples = []
    rhs_samples = []
    for _ in range(args.mc_samples):
        mats = {}
        for e in q.edges:
            mats[e.id] = haar_like_unitary(ranks[e.src], rng)
        sample_rep = Representation(tuple(ranks), mats)
        lap = build_laplacian(q, sample_rep, w)
        detv = det_oracle(lap.matrix.to_complex())
        lhs_samples.append(detv ** args.k)
        traces = {}
        for ms in multisets:
            for cyc, _m in ms:
                if cyc.edges not in traces:
                    traces[cyc.edges] = to_complex(hol_trace(sample_rep, cyc))
        acc = 0.0 + 0.0j
        for tup in tuples:
            tprod = 1.0 + 0.0j
            for idx in tup:
                for cyc, mult in multisets[idx]:
                    for _ in range(mult):
                        tprod *= traces[cyc.edges]
            acc += _tuple_w(weights_by_ms, tup) * tprod
        rhs_samples.append(acc)

    def stats(samples):
        n = len(samples)
        mean = sum(samples) / n
        if n > 1:
            var = sum(abs(s - mean) ** 2 for s in samples) / (n - 1)
            se = math.sqrt(var / n)
        else:
            se = float("nan")
        return mean, se

    lhs_mean, lhs_se = stats(lhs_samples)
    rhs_mean, rhs_se = stats(rhs_samples)
    payload = {
        "command": "moments",
        "k": args.k,
        "mc_samples": args.mc_samples,
        "seed": args.seed,
        "lhs_mean": {"re": lhs_mean.real, "im": lhs_mean.imag},
        "lhs_stderr": lhs_se,
        "rhs_mean": {"re": rhs_mean.real, "im": rhs_mean.imag},
        "rhs_stderr": rhs_se,
    }
    _emit(
        args,
        payload,
        [
            f"lhs mean: {scalar_str(lhs_mean)} (stderr {lhs_se:.3e})",
            f"rhs mean: {scalar_str(rhs_mean)} (stderr {rhs_se:.3e})",
        ],
    )
    return 0


def _tuple_w(weights_by_ms, tup):
    acc = 1.0 + 0.0j
    for idx in tup:
        acc *= weights_by_ms[idx]
    return acc


def cmd_random(args):
    q, rep, w = gen_example(
        "random", seed=args.seed, p=args.p, max_edges=args.max_edges,
        max_rank=args.max_rank,
    )
    print(json.dumps(instance_to_json(q, rep, w), indent=2))
    return 0


def _add_common(sp):
    sp.add_argument("--input", help="quiver instance JSON file")
    sp.add_argument(
        "--example",
        choices=("two_cycle", "acyclic", "unicyclic", "figure5", "random"),
        help="use a built-in instance family instead of --input",
    )
    sp.add_argument("--mode", choices=("float", "exact", "symbolic"), default="exact")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--max-edges", type=int, default=None)
    sp.add_argument("--max-rank", type=int, default=None)
    sp.add_argument("--budget", type=int, default=None,
                    help="term budget override (env HOLODET_BUDGET)")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--kappa", help="per-vertex shift list, e.g. 1.0 or 1,0.5,2")
    sp.add_argument("--timing", action="store_true",
                    help="include wall-clock timings in reports")
    sp.add_argument("--parallel", action="store_true",
                    help="evaluate compare methods in worker processes (exact modes)")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="holodet",
        description="determinants of twisted quiver Laplacians via cycle identities",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("det", help="one determinant by the chosen method")
    _add_common(sp)
    sp.add_argument("--method", choices=DET_METHODS, default="cycles")
    sp.set_defaults(func=cmd_det)

    sp = sub.add_parser("charpoly", help="characteristic polynomial coefficients")
    _add_common(sp)
    sp.set_defaults(func=cmd_charpoly)

    sp = sub.add_parser("compare", help="run all applicable methods and compare")
    _add_common(sp)
    sp.add_argument("--methods", help="comma-separated subset to run")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("primes", help="prime cycles of the quiver")
    _add_common(sp)
    sp.add_argument("--max-len", type=int, default=None)
    sp.set_defaults(func=cmd_primes)

    sp = sub.add_parser("moments", help="moment identity for random representations")
    _add_common(sp)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--mc-samples", type=int, default=None)
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("random", help="emit a random instance as JSON")
    _add_common(sp)
    sp.set_defaults(func=cmd_random)

    return ap


def _error_json(kind, exc):
    return json.dumps({"error": {"type": kind, "message": str(exc)}})


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if getattr(args, "parallel", False) and args.command == "compare":
            return _compare_parallel(args)
        return args.func(args)
    except ValidationError as exc:
        print(_error_json("validation", exc), file=sys.stderr)
        return 2
    except MethodRefusal as exc:
        print(_error_json("refusal", exc), file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(_error_json("invariant", exc), file=sys.stderr)
        return 1
    except HolodetError as exc:
        print(_error_json("error", exc), file=sys.stderr)
        return 1


def _method_worker(payload):
    doc, mode, method, budget, tol, kappa = payload
    q, rep, w = instance_from_json(doc, mode=mode)
    lap = build_laplacian(q, rep, w)
    ns = argparse.Namespace(mode=mode, budget=budget, tol=tol, kappa=kappa)
    try:
        value, terms = _run_method(method, lap, ns)
        return method, scalar_str(value) if mode != "float" else to_complex(value), terms, None
    except MethodRefusal as exc:
        return method, None, None, str(exc)


def _compare_parallel(args):
    if args.mode == "float":
        raise MethodRefusal("--parallel compare supports exact modes only")
    import multiprocessing

    q, rep, w = _load(args)
    bad = validate(q, rep, w)
    if bad:
        raise ValidationError(bad)
    lap = build_laplacian(q, rep, w)
    doc = instance_to_json(q, rep, w)
    methods = args.methods.split(",") if args.methods else _applicable_methods(lap, args)
    payloads = [
        (doc, args.mode, m, args.budget, args.tol, args.kappa) for m in methods
    ]
    with multiprocessing.Pool(min(len(payloads), 4)) as pool:
        results = pool.map(_method_worker, payloads)
    rows = []
    values = []
    for method, value, terms, skip in results:
        if skip is not None:
            rows.append({"method": method, "skipped": skip})
            continue
        row = {"method": method, "value": value}
        if terms is not None:
            row["terms"] = terms
        rows.append(row)
        values.append(value)
    agree = all(v == values[0] for v in values) if values else True
    payload = {
        "command": "compare",
        "mode": args.mode,
        "methods": rows,
        "max_discrepancy": 0 if agree else "nonzero",
        "agree": agree,
    }
    lines = [
        f"{r['method']}: {r.get('value', 'skipped')}" for r in rows
    ] + [f"agree: {agree}"]
    _emit(args, payload, lines)
    if not agree:
        raise InvariantViolation("determinant methods disagree")
    return 0


if __name__ == "__main__":
    sys.exit(main())
