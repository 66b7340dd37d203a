import itertools
import random
from math import factorial

import pytest

from holodet.errors import HolodetError
from holodet.quiver import Edge, Quiver, gen_example
from holodet.walks import (
    CycleMultiset,
    CyclicWalk,
    GCycle,
    candidate_walks,
    closed_edge_walks,
    enumerate_gcycle_multisets,
    enumerate_walk_multisets,
    min_rotation,
    prime_cycles,
    prime_finiteness,
)


def test_valuation_examples():
    assert CyclicWalk((1, 2, 1, 2)).valuation == 2
    assert CyclicWalk((1, 2, 1, 3)).valuation == 1


def test_walk_rejects_bad_sequences():
    with pytest.raises(HolodetError):
        CyclicWalk((1,))
    with pytest.raises(HolodetError):
        CyclicWalk((1, 1, 2))
    with pytest.raises(HolodetError):
        CyclicWalk((1, 2, 3, 1))  # wrap pair equal


def test_canonicalization_idempotent_under_rotation():
    rng = random.Random(3)
    for _ in range(60):
        k = rng.randint(2, 7)
        seq = [rng.randrange(4)]
        while len(seq) < k:
            nxt = rng.randrange(4)
            if nxt != seq[-1] and not (len(seq) == k - 1 and nxt == seq[0]):
                seq.append(nxt)
        w = CyclicWalk(tuple(seq))
        for r in range(k):
            assert CyclicWalk(tuple(seq[r:] + seq[:r])) == w


def test_power_and_prime_root():
    w = CyclicWalk((1, 2))
    assert w.power(2) == CyclicWalk((1, 2, 1, 2))
    assert w.power(1) == w
    for m in range(1, 5):
        assert w.power(m).valuation == m


def test_unique_prime_factorization():
    rng = random.Random(5)
    seen = 0
    for _ in range(300):
        k = rng.randint(2, 8)
        seq = [rng.randrange(3)]
        while len(seq) < k:
            nxt = rng.randrange(3)
            if nxt != seq[-1] and not (len(seq) == k - 1 and nxt == seq[0]):
                seq.append(nxt)
        w = CyclicWalk(tuple(seq))
        root = w.prime_root()
        assert root.valuation == 1
        assert root.power(w.valuation) == w
        assert len(w) % len(root) == 0
        seen += 1
    assert seen == 300


def test_walk_multisets_small_bounds():
    got = list(enumerate_walk_multisets(2, (1, 1)))
    assert len(got) == 2
    assert CycleMultiset() in got
    assert CycleMultiset(((CyclicWalk((0, 1)), 1),)) in got

    assert list(enumerate_walk_multisets(1, (5,))) == [CycleMultiset()]

    got = list(enumerate_walk_multisets(2, (2, 2)))
    repeated = CycleMultiset(((CyclicWalk((0, 1)), 2),))
    doubled = CycleMultiset(((CyclicWalk((0, 1, 0, 1)), 1),))
    assert repeated in got and doubled in got
    assert len(set(got)) == len(got) == 4


def _brute_force_multiset_count(p, bound):
    """Multisets via combinations-with-replacement over candidates, with a
    final bound filter; mechanically different from the streaming path."""
    cands = candidate_walks(p, bound)
    total = sum(bound)
    count = 0
    max_size = total // 2
    for size in range(0, max_size + 1):
        for combo in itertools.combinations_with_replacement(cands, size):
            visits = [0] * p
            for w in combo:
                for a, v in enumerate(w.visits(p)):
                    visits[a] += v
            if all(v <= b for v, b in zip(visits, bound)):
                count += 1
    return count


@pytest.mark.parametrize("p,bound", [(2, (1, 1)), (2, (2, 2)), (2, (3, 3)),
                                     (3, (1, 1, 1)), (3, (2, 2, 2)),
                                     (3, (3, 2, 1)), (3, (2, 2, 1))])
def test_walk_multisets_match_brute_force(p, bound):
    stream = list(enumerate_walk_multisets(p, bound))
    assert len(set(stream)) == len(stream)
    assert len(stream) == _brute_force_multiset_count(p, bound)


def test_gcycle_stream_partitions_compatible_walk_stream():
    # projecting each cycle multiset to vertex walks groups the cycle
    # stream into fibers indexed exactly by the compatible walk multisets
    q = two_parallel_quiver()
    bound = (2, 2)
    fibers = {}
    for ms in enumerate_gcycle_multisets(q, bound):
        projected = []
        for cyc, mult in ms:
            projected.extend([cyc.vertex_walk().seq] * mult)
        fibers.setdefault(tuple(sorted(projected)), []).append(ms)
    compatible = set()
    for ms in enumerate_walk_multisets(2, bound):
        seqs = []
        ok = True
        for walk, mult in ms:
            k = len(walk.seq)
            for i in range(k):
                u, v = walk.seq[i], walk.seq[(i + 1) % k]
                if not q.edges_between(u, v):
                    ok = False
            seqs.extend([walk.seq] * mult)
        if ok:
            compatible.add(tuple(sorted(seqs)))
    assert set(fibers) == compatible
    total = sum(len(v) for v in fibers.values())
    assert total == len(list(enumerate_gcycle_multisets(q, bound)))


def two_parallel_quiver():
    return Quiver(2, [Edge("e", 0, 1), Edge("f", 0, 1), Edge("g", 1, 0)])


def test_gcycle_multisets_hand_counts():
    q, _, _ = gen_example("acyclic")
    assert list(enumerate_gcycle_multisets(q, (2, 1, 2))) == [CycleMultiset()]

    q = two_parallel_quiver()
    got = set(enumerate_gcycle_multisets(q, (1, 1)))
    eg = GCycle.from_quiver(q, ("e", "g"))
    fg = GCycle.from_quiver(q, ("f", "g"))
    assert got == {
        CycleMultiset(),
        CycleMultiset(((eg, 1),)),
        CycleMultiset(((fg, 1),)),
    }


def test_gcycle_multisets_figure5_all_ones():
    q, _, _ = gen_example("figure5")
    got = list(enumerate_gcycle_multisets(q, (1,) * 8))
    assert len(got) == 4
    sizes = sorted(sum(m for _, m in ms) for ms in got)
    assert sizes == [0, 1, 1, 2]


def test_gcycle_projection_refines_walks():
    q = two_parallel_quiver()
    eg = GCycle.from_quiver(q, ("e", "g"))
    assert eg.vertex_walk() == CyclicWalk((0, 1))
    assert eg.visits(2) == (1, 1)
    assert eg.edge_counts() == {"e": 1, "g": 1}


def test_prime_cycles_two_cycle_quiver():
    q = Quiver(2, [Edge("e", 0, 1), Edge("g", 1, 0)])
    got = prime_cycles(q, 6)
    assert got == [GCycle.from_quiver(q, ("e", "g"))]
    # powers are excluded by valuation
    all_cycles = closed_edge_walks(q, 6)
    assert len(all_cycles) == 3  # lengths 2, 4, 6


def test_prime_cycles_figure5():
    q, _, _ = gen_example("figure5")
    got = prime_cycles(q, 20)
    assert len(got) == 2
    assert {tuple(c.srcs) for c in got} == {(0, 1, 2, 3), (4, 5, 6, 7)}


def test_prime_cycles_acyclic_empty():
    q, _, _ = gen_example("acyclic")
    assert prime_cycles(q, 10) == []


def test_prime_finiteness_families():
    q, _, _ = gen_example("figure5")
    fin = prime_finiteness(q)
    assert fin.finite and len(fin.cycles) == 2

    q, _, _ = gen_example("unicyclic")
    fin = prime_finiteness(q)
    assert fin.finite and len(fin.cycles) == 1

    q, _, _ = gen_example("acyclic")
    fin = prime_finiteness(q)
    assert fin.finite and fin.cycles == ()

    # two simple cycles sharing a vertex: infinitely many primes
    q = Quiver(3, [
        Edge("a", 0, 1), Edge("b", 1, 0), Edge("c", 1, 2), Edge("d", 2, 1),
    ])
    fin = prime_finiteness(q)
    assert not fin.finite
    # witness: a non-simple prime cycle exists
    assert any(
        c.valuation == 1 and len(set(c.srcs)) < len(c.srcs)
        for c in prime_cycles(q, 8)
    )


def test_prime_finiteness_matches_brute_force_enumeration():
    rng = random.Random(41)
    for _ in range(40):
        p = rng.randint(2, 4)
        edges = []
        for i in range(rng.randint(1, 5)):
            src = rng.randrange(p)
            tgt = rng.randrange(p)
            while tgt == src:
                tgt = rng.randrange(p)
            edges.append(Edge(f"e{i}", src, tgt))
        q = Quiver(p, edges)
        fin = prime_finiteness(q)
        primes12 = prime_cycles(q, 12)
        if fin.finite:
            assert sorted(fin.cycles, key=lambda c: c.sort_key) == primes12
        else:
            simple_count = len([c for c in primes12 if len(set(c.srcs)) == len(c.srcs)])
            assert len(primes12) > simple_count


def test_multiset_bookkeeping():
    w = CyclicWalk((0, 1))
    ms = CycleMultiset(((w, 2), (CyclicWalk((0, 1, 0, 1)), 1)))
    assert ms.visits(2) == (4, 4)
    assert ms.multiplicity_factorial() == 2
    assert ms.valuation_product() == 1 * 1 * 2


def test_min_rotation():
    assert min_rotation((2, 1, 3)) == (1, 3, 2)
    assert min_rotation(("b", "a")) == ("a", "b")


def test_module_level_valuation_and_power():
    from holodet.walks import power, valuation

    w = CyclicWalk((0, 1))
    assert valuation(w) == 1
    assert power(w, 3) == CyclicWalk((0, 1) * 3)
    q = Quiver(2, [Edge("e", 0, 1), Edge("g", 1, 0)])
    c = GCycle.from_quiver(q, ("e", "g"))
    assert valuation(power(c, 2)) == 2
    assert power(c, 2).prime_root() == c
