"""Determinant expansions over stacks of outgoing edges and well-chained
permutations of slots, the two reinterpretations of their combinatorial
factor, and the classical rank-one vector-field sum.
"""

from __future__ import annotations

import itertools
import os
from math import factorial

from .errors import HolodetError, MethodRefusal
from .ring import int_div
from .walks import min_rotation, permutations_with_cycles

DEFAULT_TERM_BUDGET = 10_000_000


def term_budget(default=DEFAULT_TERM_BUDGET):
    env = os.environ.get("HOLODET_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise HolodetError(f"HOLODET_BUDGET must be an integer, got {env!r}")
    return default


def _slot_layout(lap):
    ranks = lap.ranks
    bl = []
    for a, r in enumerate(ranks):
        bl.extend([a] * r)
    return tuple(bl)


def _estimate_stack_cost(lap):
    n = sum(lap.ranks)
    stacks = 1
    for a in range(lap.quiver.p):
        stacks *= max(1, lap.quiver.outdeg(a)) ** lap.ranks[a]
        if lap.quiver.outdeg(a) == 0:
            return 0, n
    return stacks, n


def _hol_trace_for_slot_cycle(lap, edge_ids, memo):
    key = min_rotation(tuple(edge_ids))
    got = memo.get(key)
    if got is None:
        prod = lap.rep.matrices[key[0]]
        for eid in key[1:]:
            prod = prod * lap.rep.matrices[eid]
        got = prod.trace()
        memo[key] = got
    return got


def _stacks(lap, bl):
    out_ids = [tuple(e.id for e in lap.quiver.out_edges(a)) for a in range(lap.quiver.p)]
    return itertools.product(*(out_ids[bl[i]] for i in range(len(bl))))


def det_vector_fields(lap, budget=None):
    """Sum over stacks of outgoing edges and well-chained permutations,
    with stationary freedom counted by factorials of unmoved slots."""
    budget = term_budget() if budget is None else budget
    stacks_count, n = _estimate_stack_cost(lap)
    cost = stacks_count * factorial(n)
    if cost > budget:
        raise MethodRefusal(
            f"stack sum needs about {cost} elementary terms, budget is {budget}"
        )
    bl = _slot_layout(lap)
    ranks = lap.ranks
    tgt = {e.id: e.tgt for e in lap.quiver.edges}
    perms = permutations_with_cycles(n)
    memo = {}
    total = 0
    if stacks_count == 0:
        return 0
    for xi in _stacks(lap, bl):
        xw = 1
        for eid in xi:
            xw = xw * lap.weights[eid]
        inner = 0
        for perm, cycles, _sign in perms:
            ok = True
            for i in range(n):
                j = perm[i]
                if j != i and tgt[xi[i]] != bl[j]:
                    ok = False
                    break
            if not ok:
                continue
            moved = [0] * lap.quiver.p
            term = 1
            for cyc in cycles:
                if len(cyc) == 1:
                    continue
                for i in cyc:
                    moved[bl[i]] += 1
                tr = _hol_trace_for_slot_cycle(
                    lap, [xi[i] for i in cyc], memo
                )
                term = term * -tr
            stat = 1
            for a, r in enumerate(ranks):
                stat *= factorial(r - moved[a])
            inner = inner + stat * term
        total = total + xw * inner
    denom = 1
    for r in ranks:
        denom *= factorial(r)
    return int_div(total, denom)


def _sigma_prime_inner(lap, xi, bl, tgt, perms, memo):
    """Permutations whose cycles are each either stationary within one
    block or step blocks at every move; moving cycles contribute traces,
    stationary cycles contribute nothing."""
    n = len(bl)
    inner = 0
    for perm, cycles, _sign in perms:
        ok = True
        moving = []
        for cyc in cycles:
            if len(cyc) == 1:
                continue
            blocks = {bl[i] for i in cyc}
            if len(blocks) == 1:
                continue  # stationary cycle of length >= 2
            kin = all(tgt[xi[i]] == bl[perm[i]] for i in cyc)
            if not kin:
                ok = False
                break
            moving.append(cyc)
        if not ok:
            continue
        term = 1
        for cyc in moving:
            tr = _hol_trace_for_slot_cycle(lap, [xi[i] for i in cyc], memo)
            term = term * -tr
        inner = inner + term
    return inner


def _beta_inner(lap, xi, bl, tgt, perms, memo, blocks_slots):
    """Sum over block-preserving permutations beta and well-chained sigma
    whose support beta fixes pointwise."""
    n = len(bl)
    sigmas = []
    for perm, cycles, _sign in perms:
        ok = True
        for i in range(n):
            j = perm[i]
            if j != i and tgt[xi[i]] != bl[j]:
                ok = False
                break
        if not ok:
            continue
        support = frozenset(i for i in range(n) if perm[i] != i)
        term = 1
        for cyc in cycles:
            if len(cyc) == 1:
                continue
            tr = _hol_trace_for_slot_cycle(lap, [xi[i] for i in cyc], memo)
            term = term * -tr
        sigmas.append((support, term))

    inner = 0
    for beta in itertools.product(*(itertools.permutations(slots) for slots in blocks_slots)):
        fixed = set()
        for slots, image in zip(blocks_slots, beta):
            for s, t in zip(slots, image):
                if s == t:
                    fixed.add(s)
        for support, term in sigmas:
            if support <= fixed:
                inner = inner + term
    return inner


def det_vector_fields_variant(lap, variant, budget=None):
    """Evaluate one of the two reinterpretations of the stack sum; both
    agree exactly with det_vector_fields."""
    if variant not in ("sigma_prime", "beta"):
        raise HolodetError(f"unknown variant '{variant}'")
    budget = term_budget() if budget is None else budget
    stacks_count, n = _estimate_stack_cost(lap)
    block_fact = 1
    for r in lap.ranks:
        block_fact *= factorial(r)
    mult = factorial(n) if variant == "sigma_prime" else factorial(n) * block_fact
    cost = stacks_count * mult
    if cost > budget:
        raise MethodRefusal(
            f"variant sum needs about {cost} elementary terms, budget is {budget}"
        )
    if stacks_count == 0:
        return 0
    bl = _slot_layout(lap)
    tgt = {e.id: e.tgt for e in lap.quiver.edges}
    perms = permutations_with_cycles(n)
    memo = {}
    blocks_slots = []
    pos = 0
    for r in lap.ranks:
        blocks_slots.append(tuple(range(pos, pos + r)))
        pos += r
    total = 0
    for xi in _stacks(lap, bl):
        xw = 1
        for eid in xi:
            xw = xw * lap.weights[eid]
        if variant == "sigma_prime":
            inner = _sigma_prime_inner(lap, xi, bl, tgt, perms, memo)
        else:
            inner = _beta_inner(lap, xi, bl, tgt, perms, memo, blocks_slots)
        total = total + xw * inner
    return int_div(total, block_fact)


def count_sigma_prime(lap, xi):
    """|Sigma'(xi)| by direct enumeration, for counting cross-checks."""
    bl = _slot_layout(lap)
    n = len(bl)
    tgt = {e.id: e.tgt for e in lap.quiver.edges}
    count = 0
    for perm, cycles, _sign in permutations_with_cycles(n):
        ok = True
        for cyc in cycles:
            if len(cyc) == 1:
                continue
            blocks = {bl[i] for i in cyc}
            if len(blocks) == 1:
                continue
            if not all(tgt[xi[i]] == bl[perm[i]] for i in cyc):
                ok = False
                break
        if ok:
            count += 1
    return count


def count_sigma_weighted(lap, xi):
    """Sum over well-chained sigma of the product of factorials of unmoved
    slots per block; equals |Sigma'(xi)|."""
    bl = _slot_layout(lap)
    n = len(bl)
    tgt = {e.id: e.tgt for e in lap.quiver.edges}
    total = 0
    for perm, cycles, _sign in permutations_with_cycles(n):
        ok = True
        for i in range(n):
            j = perm[i]
            if j != i and tgt[xi[i]] != bl[j]:
                ok = False
                break
        if not ok:
            continue
        moved = [0] * lap.quiver.p
        for cyc in cycles:
            if len(cyc) > 1:
                for i in cyc:
                    moved[bl[i]] += 1
        stat = 1
        for a, r in enumerate(lap.ranks):
            stat *= factorial(r - moved[a])
        total += stat
    return total


def det_forman_classic(lap):
    """Rank-one vector-field sum: over assignments of one outgoing edge per
    vertex, the weight monomial times the product of (1 - holonomy) over
    the limit cycles of the assignment."""
    if any(r != 1 for r in lap.ranks):
        raise MethodRefusal("classical vector-field sum requires all ranks 1")
    quiver = lap.quiver
    per_vertex = [quiver.out_edges(v) for v in range(quiver.p)]
    if any(not es for es in per_vertex):
        return 0
    total = 0
    for choice in itertools.product(*per_vertex):
        xw = 1
        for e in choice:
            xw = xw * lap.weights[e.id]
        nxt = {e.src: e for e in choice}
        done = set()
        factor = 1
        for start in range(quiver.p):
            if start in done:
                continue
            path = []
            on_path = {}
            v = start
            while v not in done and v not in on_path:
                on_path[v] = len(path)
                path.append(nxt[v])
                v = nxt[v].tgt
            if v in on_path:
                hol = 1
                for e in path[on_path[v]:]:
                    hol = hol * lap.rep.matrices[e.id].at(0, 0)
                factor = factor * (1 - hol)
            done.update(on_path)
        total = total + xw * factor
    return total
