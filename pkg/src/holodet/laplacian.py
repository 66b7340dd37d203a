"""The twisted Laplacian of a quiver representation, and identities for its
determinant: the cycle-multiset expansion, the characteristic polynomial,
moment identities for random representations, and a Cauchy-Binet splitting
into edge-subset terms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from math import factorial

from .errors import HolodetError, MethodRefusal, ValidationError
from .linalg import BlockMatrix, Matrix, det_oracle
from .quiver import validate, vertex_z
from .ring import Poly, Symbols, int_div, lift
from .walks import enumerate_gcycle_multisets

CAUCHY_BINET_CAP = 6


@dataclass
class TwistedLaplacian:
    quiver: object
    rep: object
    weights: dict
    z: tuple
    block: BlockMatrix

    @property
    def matrix(self):
        return self.block.base

    @property
    def ranks(self):
        return self.rep.ranks


def build_laplacian(quiver, rep, weights):
    """Assemble the block operator with diagonal z_a I and off-diagonal
    minus the weight-scaled sum of edge matrices."""
    bad = validate(quiver, rep, weights)
    if bad:
        raise ValidationError(bad)
    ranks = tuple(rep.ranks)
    z = vertex_z(quiver, weights)
    offsets = [0]
    for r in ranks:
        offsets.append(offsets[-1] + r)
    n = offsets[-1]
    rows = [[0] * n for _ in range(n)]
    for a in range(quiver.p):
        for i in range(ranks[a]):
            rows[offsets[a] + i][offsets[a] + i] = z[a]
    for e in quiver.edges:
        u_mat = rep.matrices[e.id]
        w = weights[e.id]
        r0, c0 = offsets[e.src], offsets[e.tgt]
        for i in range(u_mat.rows):
            for j in range(u_mat.cols):
                rows[r0 + i][c0 + j] = rows[r0 + i][c0 + j] - w * u_mat.at(i, j)
    block = BlockMatrix(Matrix.from_rows(rows), ranks)
    return TwistedLaplacian(quiver, rep, weights, z, block)


def holonomy(rep, gcycle):
    """Edge-matrix product along a cycle, based at its canonical rotation."""
    prod = rep.matrices[gcycle.edges[0]]
    for eid in gcycle.edges[1:]:
        prod = prod * rep.matrices[eid]
    return prod


def hol_trace(rep, gcycle):
    return holonomy(rep, gcycle).trace()


def weight_product(weights, gcycle):
    acc = 1
    for eid in gcycle.edges:
        acc = acc * weights[eid]
    return acc


def _cycle_factor(lap, gcycle, memo):
    """-(x^e(c) Tr hol(c)) / val(c) for one cycle on the quiver."""
    got = memo.get(gcycle.edges)
    if got is None:
        term = -(weight_product(lap.weights, gcycle) * hol_trace(lap.rep, gcycle))
        got = int_div(term, gcycle.valuation)
        memo[gcycle.edges] = got
    return got


def _z_power(zs, exponents):
    acc = 1
    for z, e in zip(zs, exponents):
        if e:
            acc = acc * z ** e
    return acc


def det_laplacian_cycles(lap):
    """Cycle-multiset expansion of the Laplacian determinant: the empty
    multiset contributes z^n, every other multiset a z-cofactor times the
    product of its cycle factors."""
    p = lap.quiver.p
    ranks = lap.ranks
    memo = {}
    total = 0
    for ms in enumerate_gcycle_multisets(lap.quiver, ranks):
        visits = ms.visits(p)
        term = _z_power(lap.z, tuple(n - v for n, v in zip(ranks, visits)))
        for cyc, mult in ms:
            f = _cycle_factor(lap, cyc, memo)
            for _ in range(mult):
                term = term * f
        total = total + int_div(term, ms.multiplicity_factorial())
    return total


def charpoly_laplacian(lap, t_names=None):
    """det(T + Laplacian) as a polynomial in per-vertex shift symbols."""
    p = lap.quiver.p
    ranks = lap.ranks
    if t_names is None:
        t_names = tuple(f"t{a + 1}" for a in range(p))
    t_names = tuple(t_names)
    if len(t_names) != p:
        raise HolodetError(f"need {p} shift symbols, got {len(t_names)}")
    base_syms = None
    for x in lap.matrix.data:
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
    for ms in enumerate_gcycle_multisets(lap.quiver, ranks):
        visits = ms.visits(p)
        cyc_part = 1
        for cyc, mult in ms:
            f = _cycle_factor(lap, cyc, memo)
            for _ in range(mult):
                cyc_part = cyc_part * f
        cyc_part = int_div(cyc_part, ms.multiplicity_factorial())
        free = tuple(n - v for n, v in zip(ranks, visits))
        for kvec in itertools.product(*(range(f + 1) for f in free)):
            coeff = 1
            for fa, ka in zip(free, kvec):
                coeff *= math.comb(fa, ka)
            zpow = _z_power(lap.z, tuple(f - k for f, k in zip(free, kvec)))
            tmono = Poly.const(syms, 1)
            for tv, ka in zip(tvars, kvec):
                if ka:
                    tmono = tmono * tv ** ka
            total = total + tmono * lift(coeff * (zpow * cyc_part), syms)
    return total


@dataclass(frozen=True)
class WilsonMomentReport:
    lhs: object
    rhs: object
    rows: tuple  # (multiset tuple, combinatorial weight, Wilson expectation)

    @property
    def agree(self):
        return self.lhs == self.rhs


def wilson_moment(quiver, weights, ranks, edge_dists, k):
    """Compare E[(det L)^k] computed by brute-force enumeration of the
    joint representation distribution against the multiset expansion where
    only the holonomy traces sit inside the expectation.

    edge_dists maps each edge id to a list of (probability, Matrix) pairs
    with exact probabilities summing to 1; edges are independent.
    """
    from .quiver import Representation

    if k < 1:
        raise HolodetError("moment order k must be >= 1")
    edge_ids = [e.id for e in quiver.edges]
    for eid in edge_ids:
        dist = edge_dists.get(eid)
        if not dist:
            raise MethodRefusal(f"edge '{eid}' has no finite-support distribution")
        if sum(pr for pr, _ in dist) != 1:
            raise MethodRefusal(f"probabilities for edge '{eid}' do not sum to 1")

    outcomes = []
    for combo in itertools.product(*(edge_dists[eid] for eid in edge_ids)):
        prob = 1
        mats = {}
        for eid, (pr, mat) in zip(edge_ids, combo):
            prob = prob * pr
            mats[eid] = mat
        outcomes.append((prob, Representation(tuple(ranks), mats)))

    lhs = 0
    for prob, rep in outcomes:
        lap = build_laplacian(quiver, rep, weights)
        lhs = lhs + prob * det_oracle(lap.matrix) ** k

    p = quiver.p
    z = vertex_z(quiver, weights)
    multisets = list(enumerate_gcycle_multisets(quiver, tuple(ranks)))

    trace_cache = []
    for prob, rep in outcomes:
        per = {}
        for ms in multisets:
            for cyc, _ in ms:
                if cyc.edges not in per:
                    per[cyc.edges] = hol_trace(rep, cyc)
        trace_cache.append(per)

    def comb_weight(ms):
        visits = ms.visits(p)
        term = _z_power(z, tuple(n - v for n, v in zip(ranks, visits)))
        for cyc, mult in ms:
            f = int_div(-weight_product(weights, cyc), cyc.valuation)
            for _ in range(mult):
                term = term * f
        return int_div(term, ms.multiplicity_factorial())

    weights_by_ms = [comb_weight(ms) for ms in multisets]

    rhs = 0
    rows = []
    for tup in itertools.product(range(len(multisets)), repeat=k):
        w = 1
        for idx in tup:
            w = w * weights_by_ms[idx]
        wilson = 0
        for (prob, _), per in zip(outcomes, trace_cache):
            tprod = 1
            for idx in tup:
                for cyc, mult in multisets[idx]:
                    for _ in range(mult):
                        tprod = tprod * per[cyc.edges]
            wilson = wilson + prob * tprod
        rhs = rhs + w * wilson
        rows.append((tuple(multisets[i] for i in tup), w, wilson))
    return WilsonMomentReport(lhs=lhs, rhs=rhs, rows=tuple(rows))


def _subset_selections(quiver, ranks):
    """All collections of per-edge row subsets with per-vertex sizes
    summing to the vertex rank."""
    per_vertex = []
    for a in range(quiver.p):
        es = quiver.out_edges(a)
        choices = []

        def rec(i, remaining, acc):
            if i == len(es):
                if remaining == 0:
                    choices.append(tuple(acc))
                return
            for size in range(remaining + 1):
                for comb in itertools.combinations(range(ranks[a]), size):
                    acc.append((es[i].id, comb))
                    rec(i + 1, remaining - size, acc)
                    acc.pop()

        rec(0, ranks[a], [])
        if not choices:
            return []
        per_vertex.append(choices)
    out = []
    for combo in itertools.product(*per_vertex):
        sel = {}
        for group in combo:
            for eid, comb in group:
                sel[eid] = comb
        out.append(sel)
    return out


def cauchy_binet_decompose(lap):
    """Split det L over collections of per-edge coordinate subsets: each
    term is the determinant of the Laplacian-like composite built from the
    projected edge maps; the terms sum to det L."""
    quiver = lap.quiver
    ranks = lap.ranks
    n = sum(ranks)
    if n > CAUCHY_BINET_CAP:
        raise MethodRefusal(
            f"subset decomposition capped at total rank {CAUCHY_BINET_CAP}, got {n}"
        )
    offsets = [0]
    for r in ranks:
        offsets.append(offsets[-1] + r)
    terms = []
    for sel in _subset_selections(quiver, ranks):
        rows = [[0] * n for _ in range(n)]
        for e in quiver.edges:
            chosen = sel.get(e.id, ())
            if not chosen:
                continue
            w = lap.weights[e.id]
            u_mat = lap.rep.matrices[e.id]
            r0 = offsets[e.src]
            c0 = offsets[e.tgt]
            for i in chosen:
                rows[r0 + i][r0 + i] = rows[r0 + i][r0 + i] + w
                for j in range(u_mat.cols):
                    rows[r0 + i][c0 + j] = rows[r0 + i][c0 + j] - w * u_mat.at(i, j)
        terms.append((sel, det_oracle(Matrix.from_rows(rows))))
    return terms
