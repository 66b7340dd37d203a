"""Determinant identities for abstract block matrices: permutation-trace
sums, the trace-determinant reduction, the cycle-multiset expansion for
scalar-diagonal blocks, its integer-coefficient variant, the blockwise
characteristic polynomial, and a truncated Euler product over prime walks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import factorial

from .errors import HolodetError, InvariantViolation, MethodRefusal
from .linalg import BlockMatrix, Matrix, block_product, det_oracle, walk_trace
from .ring import Poly, Symbols, int_div, is_exact, lift, to_complex
from .walks import (
    candidate_walks,
    enumerate_walk_multisets,
    min_rotation,
    permutations_with_cycles,
)
from . import taudet

PERM_SUM_CAP = 8
TRACE_FORMAL_CAP = 7
SCALAR_DIAG_FLOAT_TOL = 1e-12


class ScalarDiagBlockMatrix:
    """Block matrix whose diagonal blocks are scalar multiples of the
    identity; carries the extracted scalars."""

    __slots__ = ("block", "z")

    def __init__(self, block, z):
        self.block = block
        self.z = tuple(z)

    @classmethod
    def from_block(cls, block):
        zs = []
        for a in range(block.p):
            d = block.block(a, a)
            z = d.at(0, 0)
            exact = all(is_exact(x) for x in d.data)
            for i in range(d.rows):
                for j in range(d.cols):
                    want = z if i == j else 0
                    got = d.at(i, j)
                    if exact:
                        ok = got == want
                    else:
                        tol = SCALAR_DIAG_FLOAT_TOL * abs(to_complex(z))
                        ok = abs(to_complex(got) - to_complex(want)) <= tol
                    if not ok:
                        raise HolodetError(
                            f"diagonal block {a} is not a scalar multiple of "
                            f"the identity (entry ({i},{j}))"
                        )
            zs.append(z)
        return cls(block, zs)

    @property
    def part(self):
        return self.block.part

    @property
    def p(self):
        return self.block.p

    @property
    def n(self):
        return self.block.n


def det_perm_traces(m):
    """Average over permutations of sign times the product of Tr(M^len)
    over the permutation's cycles."""
    if not m.is_square:
        raise HolodetError("square matrix required")
    n = m.rows
    if n > PERM_SUM_CAP:
        raise MethodRefusal(f"permutation sum capped at n<={PERM_SUM_CAP}, got {n}")
    powers = {}
    acc = m
    powers[1] = m.trace()
    for k in range(2, n + 1):
        acc = acc * m
        powers[k] = acc.trace()
    total = 0
    for _, cycles, sign in permutations_with_cycles(n):
        term = 1
        for cyc in cycles:
            term = term * powers[len(cyc)]
        total = total + (term if sign > 0 else -term)
    return int_div(total, factorial(n))


def det_block_perm(bm):
    """Permutation sum with each cycle contributing the trace of the block
    product it traverses, normalized by the block-size factorials."""
    n = bm.n
    if n > PERM_SUM_CAP:
        raise MethodRefusal(f"permutation sum capped at n<={PERM_SUM_CAP}, got {n}")
    memo = {}

    def wtrace(block_seq):
        key = min_rotation(block_seq)
        got = memo.get(key)
        if got is None:
            got = block_product(bm, key).trace()
            memo[key] = got
        return got

    total = 0
    for _, cycles, sign in permutations_with_cycles(n):
        term = 1
        for cyc in cycles:
            term = term * wtrace(tuple(bm.bl(i) for i in cyc))
            if term == 0:
                break
        total = total + (term if sign > 0 else -term)
    denom = 1
    for na in bm.part:
        denom *= factorial(na)
    return int_div(total, denom)


def det_trace_formal(bm):
    """Trace-determinant of the block-symbol word matrix divided by the
    block-size factorials."""
    n = bm.n
    if n > TRACE_FORMAL_CAP:
        raise MethodRefusal(
            f"trace-determinant route capped at n<={TRACE_FORMAL_CAP}, got {n}"
        )
    ctx = taudet.block_tau_context(bm)
    entries = taudet.block_word_matrix(bm)
    value = taudet.det_tau(entries, ctx)
    denom = 1
    for na in bm.part:
        denom *= factorial(na)
    return int_div(value, denom)


def _walk_factor(sd, walk, memo):
    """(-1)^(len-1) W / val for one cyclic walk, fraction-free inputs kept
    exact by integer division."""
    got = memo.get(walk.seq)
    if got is None:
        w = walk_trace(sd.block, walk.seq)
        sign = 1 if len(walk.seq) % 2 else -1
        got = int_div(sign * w, walk.valuation)
        memo[walk.seq] = got
    return got


def _z_power(zs, exponents):
    acc = 1
    for z, e in zip(zs, exponents):
        if e:
            acc = acc * z ** e
    return acc


def det_scalar_diag(sd):
    """Cycle-multiset expansion for a block matrix with scalar diagonal:
    sum over multisets of z^(n-v)/C! times the product of walk factors."""
    part = sd.part
    p = sd.p
    memo = {}
    total = 0
    for ms in enumerate_walk_multisets(p, part):
        visits = ms.visits(p)
        term = _z_power(sd.z, tuple(n - v for n, v in zip(part, visits)))
        for walk, mult in ms:
            f = _walk_factor(sd, walk, memo)
            for _ in range(mult):
                term = term * f
        total = total + int_div(term, ms.multiplicity_factorial())
    return total


def det_scalar_diag_integral(sd):
    """Same expansion rescaled so every coefficient is an integer, then
    divided back down; raises if a coefficient fails to be integral."""
    part = sd.part
    p = sd.p
    nfact = 1
    for na in part:
        nfact *= factorial(na)
    memo = {}
    total = 0
    for ms in enumerate_walk_multisets(p, part):
        denom = ms.multiplicity_factorial() * ms.valuation_product()
        coeff, rem = divmod(nfact, denom)
        if rem:
            raise InvariantViolation(
                f"coefficient {nfact}/{denom} is not an integer for {ms!r}"
            )
        visits = ms.visits(p)
        term = _z_power(sd.z, tuple(n - v for n, v in zip(part, visits)))
        for walk, mult in ms:
            w = walk_trace(sd.block, walk.seq)
            f = (1 if len(walk.seq) % 2 else -1) * w
            for _ in range(mult):
                term = term * f
        total = total + coeff * term
    return int_div(total, nfact)


def _binom(n, k):
    return math.comb(n, k)


def charpoly_block(sd, t_names=None):
    """det(T + A) as a polynomial in per-block shift symbols, via the
    binomially weighted cycle-multiset expansion."""
    part = sd.part
    p = sd.p
    if t_names is None:
        t_names = tuple(f"t{a + 1}" for a in range(p))
    t_names = tuple(t_names)
    if len(t_names) != p:
        raise HolodetError(f"need {p} shift symbols, got {len(t_names)}")

    base_syms = None
    for x in sd.block.base.data:
        if isinstance(x, Poly):
            base_syms = x.syms
            break
    if base_syms is not None:
        clash = [t for t in t_names if t in base_syms]
        if clash:
            raise HolodetError(
                f"shift symbol '{clash[0]}' already names an indeterminate"
            )
    syms = (base_syms or Symbols(())).extended(t_names)
    tvars = [Poly.variable(syms, name) for name in t_names]

    memo = {}
    total = Poly(syms)
    for ms in enumerate_walk_multisets(p, part):
        visits = ms.visits(p)
        walk_part = 1
        for walk, mult in ms:
            f = _walk_factor(sd, walk, memo)
            for _ in range(mult):
                walk_part = walk_part * f
        walk_part = int_div(walk_part, ms.multiplicity_factorial())
        free = tuple(n - v for n, v in zip(part, visits))
        import itertools
        for kvec in itertools.product(*(range(f + 1) for f in free)):
            coeff = 1
            for fa, ka in zip(free, kvec):
                coeff *= _binom(fa, ka)
            zpow = _z_power(sd.z, tuple(f - k for f, k in zip(free, kvec)))
            tmono = Poly.const(syms, 1)
            for tv, ka in zip(tvars, kvec):
                if ka:
                    tmono = tmono * tv ** ka
            total = total + tmono * lift(coeff * (zpow * walk_part), syms)
    return total


@dataclass(frozen=True)
class BlockEulerResult:
    value: object
    converged: bool
    max_level: int


def _prime_walk_factor(sd, walk):
    """det(I - z^-v hol(-A, walk)) for one prime cyclic walk, based at the
    canonical rotation's first block."""
    seq = walk.seq
    hol = sd.block.block(seq[0], seq[1 % len(seq)]).scale(-1)
    for i in range(1, len(seq)):
        hol = hol * sd.block.block(seq[i], seq[(i + 1) % len(seq)]).scale(-1)
    s = 1
    for a, v in enumerate(walk.visits(sd.p)):
        if v:
            s = s / sd.z[a] ** v
    return det_oracle(Matrix.identity(hol.rows) - hol.scale(s))


def block_euler_truncated(sd, max_total_visits, tol=1e-9, probe_extra=2):
    """Truncated Euler product over prime cyclic walks: z^n times the
    product of det(I - z^-v hol(-A, walk)) over primes within the visit
    budget.  The convergence flag probes whether walks just beyond the cap
    still move the product; it is heuristic, a report rather than a bound."""
    part = sd.part
    p = sd.p
    if any(z == 0 for z in sd.z):
        raise HolodetError("all diagonal scalars must be invertible")
    cap = max_total_visits
    probe_cap = cap + probe_extra
    walks = [
        w for w in candidate_walks(p, (probe_cap,) * p, total_cap=probe_cap)
        if w.valuation == 1
    ]
    walks.sort(key=lambda w: w.sort_key)

    value = _z_power(sd.z, part)
    probe = 1
    for w in walks:
        factor = _prime_walk_factor(sd, w)
        if len(w.seq) <= cap:
            value = value * factor
        else:
            probe = probe * factor

    if is_exact(probe) and not isinstance(probe, Poly):
        converged = probe == 1
    else:
        converged = abs(to_complex(probe) - 1.0) <= tol
    return BlockEulerResult(value=value, converged=converged, max_level=cap)
