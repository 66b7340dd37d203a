"""Cyclic walks, cycles on a quiver, their multisets, powers and primes.

Canonical form everywhere is the lexicographically minimal rotation; the
valuation of a walk is the order of its rotation stabiliser.  Multiset
streams are lazy and deterministic: candidates are fixed in sorted order
and multiplicities are chosen in nondecreasing candidate order, so every
multiset within the visit bound appears exactly once.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

from .errors import HolodetError


def min_rotation(seq):
    k = len(seq)
    best = seq
    for r in range(1, k):
        cand = seq[r:] + seq[:r]
        if cand < best:
            best = cand
    return best


def _stabiliser_order(seq):
    k = len(seq)
    return sum(1 for r in range(k) if seq[r:] + seq[:r] == seq)


class CyclicWalk:
    """Rotation class of a vertex sequence with distinct adjacent entries."""

    __slots__ = ("seq",)

    def __init__(self, seq):
        seq = tuple(seq)
        k = len(seq)
        if k < 2:
            raise HolodetError(f"cyclic walk needs length >= 2, got {seq!r}")
        for i in range(k):
            if seq[i] == seq[(i + 1) % k]:
                raise HolodetError(f"equal adjacent entries in {seq!r}")
        self.seq = min_rotation(seq)

    def __len__(self):
        return len(self.seq)

    def visits(self, p):
        counts = [0] * p
        for a in self.seq:
            counts[a] += 1
        return tuple(counts)

    @property
    def valuation(self):
        return _stabiliser_order(self.seq)

    def power(self, m):
        if m < 1:
            raise ValueError("power exponent must be >= 1")
        return CyclicWalk(self.seq * m)

    def prime_root(self):
        period = len(self.seq) // self.valuation
        return CyclicWalk(self.seq[:period])

    @property
    def sort_key(self):
        return (len(self.seq), self.seq)

    def __eq__(self, other):
        return isinstance(other, CyclicWalk) and self.seq == other.seq

    def __hash__(self):
        return hash(("walk", self.seq))

    def __repr__(self):
        return f"CyclicWalk({self.seq!r})"


class GCycle:
    """Rotation class of a well-chained edge sequence on a quiver."""

    __slots__ = ("edges", "srcs")

    def __init__(self, edge_ids, src_vertices):
        edges = tuple(edge_ids)
        srcs = tuple(src_vertices)
        if len(edges) < 2:
            raise HolodetError(f"cycle needs length >= 2, got {edges!r}")
        if len(edges) != len(srcs):
            raise HolodetError("edge/source sequences disagree in length")
        k = len(edges)
        best = 0
        for r in range(1, k):
            if edges[r:] + edges[:r] < edges[best:] + edges[:best]:
                best = r
        self.edges = edges[best:] + edges[:best]
        self.srcs = srcs[best:] + srcs[:best]

    @classmethod
    def from_quiver(cls, quiver, edge_ids):
        ids = list(edge_ids)
        es = [quiver.edge(i) for i in ids]
        k = len(es)
        for i in range(k):
            if es[i].tgt != es[(i + 1) % k].src:
                raise HolodetError(
                    f"edges {es[i].id} -> {es[(i + 1) % k].id} are not chained"
                )
        return cls(ids, [e.src for e in es])

    def __len__(self):
        return len(self.edges)

    def visits(self, p):
        counts = [0] * p
        for v in self.srcs:
            counts[v] += 1
        return tuple(counts)

    @property
    def valuation(self):
        return _stabiliser_order(self.edges)

    def power(self, m):
        if m < 1:
            raise ValueError("power exponent must be >= 1")
        return GCycle(self.edges * m, self.srcs * m)

    def prime_root(self):
        period = len(self.edges) // self.valuation
        return GCycle(self.edges[:period], self.srcs[:period])

    def vertex_walk(self):
        return CyclicWalk(self.srcs)

    def edge_counts(self):
        counts = {}
        for e in self.edges:
            counts[e] = counts.get(e, 0) + 1
        return counts

    @property
    def sort_key(self):
        return (len(self.edges), self.edges)

    def __eq__(self, other):
        return isinstance(other, GCycle) and self.edges == other.edges

    def __hash__(self):
        return hash(("gcycle", self.edges))

    def __repr__(self):
        return f"GCycle({self.edges!r})"


def valuation(c):
    return c.valuation


def power(c, m):
    return c.power(m)


class CycleMultiset:
    """Multiset of canonical walks or cycles with multiplicity bookkeeping."""

    __slots__ = ("items",)

    def __init__(self, items=()):
        items = tuple(sorted(items, key=lambda wm: wm[0].sort_key))
        for _, mult in items:
            if mult < 1:
                raise HolodetError("multiplicities must be >= 1")
        self.items = items

    @property
    def is_empty(self):
        return not self.items

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def visits(self, p):
        total = [0] * p
        for c, m in self.items:
            for a, v in enumerate(c.visits(p)):
                total[a] += m * v
        return tuple(total)

    def multiplicity_factorial(self):
        out = 1
        for _, m in self.items:
            out *= factorial(m)
        return out

    def valuation_product(self):
        out = 1
        for c, m in self.items:
            out *= c.valuation ** m
        return out

    def edge_counts(self):
        total = {}
        for c, m in self.items:
            for e, k in c.edge_counts().items():
                total[e] = total.get(e, 0) + m * k
        return total

    def __eq__(self, other):
        return isinstance(other, CycleMultiset) and self.items == other.items

    def __hash__(self):
        return hash(self.items)

    def __repr__(self):
        return f"CycleMultiset({list(self.items)!r})"


def candidate_walks(p, bound, total_cap=None):
    """All canonical cyclic walks on range(p) fitting the visit bound."""
    bound = tuple(bound)
    if len(bound) != p or any(b < 0 for b in bound):
        raise HolodetError(f"bad visit bound {bound!r}")
    cap = sum(bound) if total_cap is None else min(total_cap, sum(bound))
    out = []

    def extend(seq, budget):
        if len(seq) >= 2 and seq[-1] != seq[0] and seq == min_rotation(seq):
            out.append(CyclicWalk(seq))
        if len(seq) == cap:
            return
        a0, last = seq[0], seq[-1]
        for b in range(a0, p):
            if b != last and budget[b] > 0:
                budget[b] -= 1
                extend(seq + (b,), budget)
                budget[b] += 1

    for a0 in range(p):
        if bound[a0] > 0:
            budget = list(bound)
            budget[a0] -= 1
            extend((a0,), budget)
    out.sort(key=lambda w: w.sort_key)
    return out


def _multiset_stream(candidates, p, bound):
    fits = lambda visits, remaining: all(v <= r for v, r in zip(visits, remaining))

    def rec(start, remaining):
        yield ()
        for j in range(start, len(candidates)):
            c = candidates[j]
            v = c.visits(p)
            if not fits(v, remaining):
                continue
            rem = list(remaining)
            m = 0
            while fits(v, rem):
                for a in range(p):
                    rem[a] -= v[a]
                m += 1
                for rest in rec(j + 1, tuple(rem)):
                    yield ((c, m),) + rest

    for items in rec(0, tuple(bound)):
        yield CycleMultiset(items)


def enumerate_walk_multisets(p, bound):
    """Every multiset of cyclic walks whose visit totals fit the bound."""
    return _multiset_stream(candidate_walks(p, bound), p, tuple(bound))


def closed_edge_walks(quiver, max_len, vertex_budget=None, node_budget=None):
    """Canonical cycles on the quiver, length-capped, optionally
    visit-bounded per vertex (budget consumed at the source of each edge).
    node_budget caps the number of search states visited."""
    from .errors import MethodRefusal

    out_edges = [quiver.out_edges(v) for v in range(quiver.p)]
    found = set()
    nodes = [0]

    def extend(ids, srcs, cur, v0, budget):
        nodes[0] += 1
        if node_budget is not None and nodes[0] > node_budget:
            raise MethodRefusal(
                f"cycle search exceeded its node budget of {node_budget}"
            )
        if cur == v0 and len(ids) >= 2:
            found.add(GCycle(ids, srcs))
        if len(ids) == max_len:
            return
        if budget is not None and budget[cur] == 0:
            return
        for e in out_edges[cur]:
            if e.tgt < v0:
                continue
            if budget is not None:
                budget[cur] -= 1
            extend(ids + (e.id,), srcs + (cur,), e.tgt, v0, budget)
            if budget is not None:
                budget[cur] += 1

    for v0 in range(quiver.p):
        if vertex_budget is not None and vertex_budget[v0] == 0:
            continue
        budget = list(vertex_budget) if vertex_budget is not None else None
        for e in out_edges[v0]:
            if e.tgt < v0:
                continue
            if budget is not None:
                budget[v0] -= 1
            extend((e.id,), (v0,), e.tgt, v0, budget)
            if budget is not None:
                budget[v0] += 1

    return sorted(found, key=lambda c: c.sort_key)


def candidate_gcycles(quiver, bound):
    bound = tuple(bound)
    return closed_edge_walks(quiver, sum(bound), vertex_budget=bound)


def enumerate_gcycle_multisets(quiver, bound):
    """Every multiset of cycles on the quiver within the visit bound."""
    bound = tuple(bound)
    return _multiset_stream(candidate_gcycles(quiver, bound), quiver.p, bound)


def prime_cycles(quiver, max_len):
    """All cycles of valuation 1 up to the length cap, canonical, sorted."""
    if max_len < 2:
        raise HolodetError("max_len must be >= 2")
    return [c for c in closed_edge_walks(quiver, max_len) if c.valuation == 1]


@dataclass(frozen=True)
class PrimeFiniteness:
    finite: bool
    cycles: tuple


def _tarjan_sccs(quiver):
    p = quiver.p
    adj = [[e.tgt for e in quiver.out_edges(v)] for v in range(p)]
    index = [None] * p
    low = [0] * p
    on_stack = [False] * p
    stack = []
    sccs = []
    counter = itertools.count()

    for root in range(p):
        if index[root] is not None:
            continue
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] is None:
                    index[w] = low[w] = next(counter)
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(adj[w])))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(sorted(comp))
    return sccs


def prime_finiteness(quiver):
    """Finite prime-cycle set iff every strongly connected component is a
    single vertex or a single simple directed cycle; returns the cycles."""
    cycles = []
    for comp in _tarjan_sccs(quiver):
        if len(comp) == 1:
            continue
        members = set(comp)
        internal = [
            e for v in comp for e in quiver.out_edges(v) if e.tgt in members
        ]
        out_count = {v: 0 for v in comp}
        in_count = {v: 0 for v in comp}
        for e in internal:
            out_count[e.src] += 1
            in_count[e.tgt] += 1
        if any(out_count[v] != 1 or in_count[v] != 1 for v in comp):
            return PrimeFiniteness(False, ())
        next_edge = {e.src: e for e in internal}
        start = comp[0]
        ids, srcs, cur = [], [], start
        while True:
            e = next_edge[cur]
            ids.append(e.id)
            srcs.append(cur)
            cur = e.tgt
            if cur == start:
                break
        cycles.append(GCycle(ids, srcs))
    cycles.sort(key=lambda c: c.sort_key)
    return PrimeFiniteness(True, tuple(cycles))


@lru_cache(maxsize=None)
def permutations_with_cycles(n):
    """All permutations of range(n) with their full cycle decompositions
    (fixed points included as length-1 cycles) and signs."""
    out = []
    for perm in itertools.permutations(range(n)):
        seen = [False] * n
        cycles = []
        for i in range(n):
            if seen[i]:
                continue
            cyc = []
            j = i
            while not seen[j]:
                seen[j] = True
                cyc.append(j)
                j = perm[j]
            cycles.append(tuple(cyc))
        sign = (-1) ** (n - len(cycles))
        out.append((perm, tuple(cycles), sign))
    return tuple(out)
