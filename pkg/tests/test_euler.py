import math
import random
from fractions import Fraction

import pytest

from holodet.errors import HolodetError, MethodRefusal
from holodet.euler import (
    build_submarkov,
    det_euler_finite,
    det_euler_truncated,
    unitary_comparison_check,
)
from holodet.laplacian import build_laplacian, det_laplacian_cycles, holonomy
from holodet.linalg import Matrix, det_oracle
from holodet.quiver import (
    Edge,
    Quiver,
    Representation,
    bidirected,
    gen_example,
    haar_like_unitary,
)
from holodet.ring import Poly, scalars_close


def test_unicyclic_closed_form():
    q, rep, w = gen_example("unicyclic")
    lap = build_laplacian(q, rep, w)
    oracle = det_oracle(lap.matrix)
    value = det_euler_finite(lap)
    assert value == oracle
    # explicit closed form: prod x_e^(rank of source) times det(I - hol)
    from holodet.walks import prime_finiteness

    cyc = prime_finiteness(q).cycles[0]
    hol = holonomy(rep, cyc)
    closed = det_oracle(Matrix.identity(hol.rows) - hol.map(lambda c: Poly.const(w["c0"].syms, c)) )
    for e in q.edges:
        closed = closed * w[e.id] ** rep.ranks[e.src]
    assert value == closed


def test_figure5_product_formula():
    q, rep, w = gen_example("figure5")
    lap = build_laplacian(q, rep, w)
    oracle = det_oracle(lap.matrix)
    assert det_euler_finite(lap) == oracle
    assert det_laplacian_cycles(lap) == oracle

    # hand-built product: z^n det(I - p(c1) hol(c1)) det(I - hol(c2)) with
    # p(c1) = x23 x34 / ((x23 + x25)(x34 + x36)); cleared of denominators
    syms = w["x12"].syms
    var = {n: Poly.variable(syms, n) for n in syms.names}
    h = {e.id: rep.matrices[e.id].at(0, 0) for e in q.edges}
    h1 = h["x12"] * h["x23"] * h["x34"] * h["x41"]
    h2 = h["x56"] * h["x67"] * h["x78"] * h["x85"]
    z2 = var["x23"] + var["x25"]
    z3 = var["x34"] + var["x36"]
    expected = (
        var["x12"] * var["x41"]
        * (z2 * z3 - var["x23"] * var["x34"] * h1)
        * (var["x56"] * var["x67"] * var["x78"] * var["x85"]) * (1 - h2)
    )
    assert oracle == expected


def test_acyclic_empty_product():
    q, rep, w = gen_example("acyclic")
    lap = build_laplacian(q, rep, w)
    assert det_euler_finite(lap) == 0  # some z vanishes
    # with a nonzero weight on every vertex the empty product is z^n:
    q2 = Quiver(2, [Edge("e", 0, 1)])
    rep2 = Representation((1, 2), {"e": Matrix(1, 2, [Fraction(1), Fraction(2)])})
    lap2 = build_laplacian(q2, rep2, {"e": Fraction(3)})
    assert det_euler_finite(lap2) == 0  # sink vertex: z = 0
    q3 = Quiver(2, [Edge("e", 0, 1), Edge("f", 1, 0)])
    rep3 = Representation(
        (1, 1), {"e": Matrix(1, 1, [Fraction(0)]), "f": Matrix(1, 1, [Fraction(0)])}
    )
    lap3 = build_laplacian(q3, rep3, {"e": Fraction(3), "f": Fraction(5)})
    # zero representation: the one cycle contributes det(I - 0) = 1
    assert det_euler_finite(lap3) == Fraction(15) == det_oracle(lap3.matrix)


def test_finite_euler_refuses_infinite_primes():
    q = Quiver(3, [
        Edge("a", 0, 1), Edge("b", 1, 0), Edge("c", 1, 2), Edge("d", 2, 1),
    ])
    rep = Representation(
        (1, 1, 1), {k: Matrix(1, 1, [Fraction(1, 2)]) for k in "abcd"}
    )
    w = {k: Fraction(1) for k in "abcd"}
    lap = build_laplacian(q, rep, w)
    with pytest.raises(MethodRefusal, match="truncated"):
        det_euler_finite(lap)


def test_finite_euler_float_mixed_ranks():
    # rank-deficient holonomy: the trailing charpoly coefficients vanish
    # only up to roundoff in float mode and must not trip the rank check
    rng = random.Random(1)
    q = Quiver(3, [Edge("a", 0, 1), Edge("b", 1, 2), Edge("c", 2, 0)])
    big = haar_like_unitary(2, rng)
    rep = Representation((2, 1, 2), {
        "a": Matrix(2, 1, [big.at(0, 0), big.at(1, 0)]),
        "b": Matrix(1, 2, [0.3 + 0.1j, -0.2j]),
        "c": haar_like_unitary(2, rng),
    })
    w = {"a": 1.25, "b": 0.75, "c": 2.0}
    lap = build_laplacian(q, rep, w)
    got = det_euler_finite(lap)
    want = det_oracle(lap.matrix.to_complex())
    assert scalars_close(got, want, rel=1e-9)


def test_factor_rotation_independence():
    # det(I - p hol) must not depend on the base point of the cycle
    rng = random.Random(241)
    q, rep, w = gen_example("unicyclic")
    wq = {e.id: Fraction(rng.randint(1, 4)) for e in q.edges}
    from holodet.walks import prime_finiteness

    cyc = prime_finiteness(q).cycles[0]
    k = len(cyc.edges)
    vals = []
    for r in range(k):
        ids = cyc.edges[r:] + cyc.edges[:r]
        prod = rep.matrices[ids[0]]
        for eid in ids[1:]:
            prod = prod * rep.matrices[eid]
        vals.append(det_oracle(Matrix.identity(prod.rows) - prod))
    assert all(v == vals[0] for v in vals)


def _random_submarkov_instance(rng, p_max=4, edge_max=5):
    while True:
        p = rng.randint(2, p_max)
        edges = []
        for i in range(rng.randint(1, edge_max)):
            src = rng.randrange(p)
            tgt = rng.randrange(p)
            while tgt == src:
                tgt = rng.randrange(p)
            edges.append(Edge(f"e{i}", src, tgt))
        q = Quiver(p, edges)
        if any(q.outdeg(v) > 2 for v in range(p)):
            continue
        ranks = tuple(rng.randint(1, 2) for _ in range(p))
        mats = {}
        for e in q.edges:
            nu, nv = ranks[e.src], ranks[e.tgt]
            if nu == nv:
                mats[e.id] = haar_like_unitary(nu, rng)
            else:
                # truncated unitary keeps the operator norm at most one
                big = haar_like_unitary(max(nu, nv), rng)
                mats[e.id] = Matrix(
                    nu, nv, [big.at(i, j) for i in range(nu) for j in range(nv)]
                )
        weights = {e.id: rng.uniform(0.2, 1.5) for e in q.edges}
        kappa = tuple(5.0 * max(1.0, sum(weights[e.id] for e in q.out_edges(v)))
                      for v in range(p))
        return q, Representation(ranks, mats), weights, kappa


def test_truncated_euler_two_cycle():
    q = Quiver(2, [Edge("e", 0, 1), Edge("f", 1, 0)])
    rep = Representation(
        (1, 1),
        {"e": Matrix(1, 1, [complex(math.cos(0.4), math.sin(0.4))]),
         "f": Matrix(1, 1, [complex(math.cos(1.1), math.sin(1.1))])},
    )
    w = {"e": 1.0, "f": 1.0}
    lap = build_laplacian(q, rep, w)
    res = det_euler_truncated(lap, (1.0, 1.0), tol=1e-10)
    target = det_oracle(
        (Matrix.identity(2).scale(1.0 + 0j) + lap.matrix.to_complex())
    )
    assert abs(res.value - target) <= res.certified_bound
    assert abs(res.value - target) <= 1e-8


def test_truncated_euler_zero_kappa_substochastic():
    # no killing mass, but a sink vertex drains the chain
    q = Quiver(3, [Edge("e", 0, 1), Edge("f", 1, 0), Edge("g", 0, 2)])
    rep = Representation(
        (1, 1, 1), {k: Matrix(1, 1, [1.0 + 0j]) for k in ("e", "f", "g")}
    )
    w = {"e": 1.0, "f": 2.0, "g": 1.0}
    lap = build_laplacian(q, rep, w)
    res = det_euler_truncated(lap, (0.0, 0.0, 0.0), tol=1e-10)
    target = det_oracle(lap.matrix.to_complex())
    assert abs(res.value - target) <= max(res.certified_bound, 1e-9)


def test_truncated_euler_agrees_with_finite_product():
    q = Quiver(2, [Edge("e", 0, 1), Edge("f", 1, 0)])
    rep = Representation(
        (1, 1),
        {"e": Matrix(1, 1, [0.6 + 0.2j]), "f": Matrix(1, 1, [0.3 - 0.4j])},
    )
    w = {"e": 1.0, "f": 1.0}
    lap = build_laplacian(q, rep, w)
    finite = det_euler_finite(lap)
    res = det_euler_truncated(lap, (0.0, 0.0), tol=1e-12)
    assert scalars_close(finite, res.value, rel=1e-9)


def test_truncated_euler_certified_bound_honest():
    rng = random.Random(251)
    for _ in range(12):
        q, rep, w, kappa = _random_submarkov_instance(rng)
        lap = build_laplacian(q, rep, w)
        res = det_euler_truncated(lap, kappa, tol=1e-9)
        shift = Matrix(
            lap.matrix.rows, lap.matrix.rows,
            [0.0 + 0j] * lap.matrix.rows ** 2,
        )
        offsets = [0]
        for r in rep.ranks:
            offsets.append(offsets[-1] + r)
        rows = [[0.0 + 0j] * lap.matrix.rows for _ in range(lap.matrix.rows)]
        for a in range(q.p):
            for i in range(offsets[a], offsets[a + 1]):
                rows[i][i] = kappa[a]
        target = det_oracle(
            Matrix.from_rows(rows) + lap.matrix.to_complex()
        )
        assert abs(res.value - target) <= res.certified_bound
        assert abs(res.value - target) <= 1e-8 * max(1.0, abs(target))


def test_finite_primes_zero_kappa_is_exact():
    # conservative two-cycle: not sub-Markovian, but the prime set is
    # finite so the product needs no tail and stays exact
    q = Quiver(2, [Edge("e", 0, 1), Edge("f", 1, 0)])
    rep = Representation(
        (1, 1), {"e": Matrix(1, 1, [0.5 + 0.5j]), "f": Matrix(1, 1, [0.25 - 0.1j])}
    )
    w = {"e": 1.0, "f": 1.0}
    lap = build_laplacian(q, rep, w)
    res = det_euler_truncated(lap, (0.0, 0.0))
    target = det_oracle(lap.matrix.to_complex())
    assert abs(res.value - target) <= max(res.certified_bound, 1e-12)


def test_submarkov_refusal_when_not_substochastic():
    # two cycles sharing a vertex (infinitely many primes) with a
    # conservative chain: spectral radius 1, so the tail cannot be bounded
    q = Quiver(3, [
        Edge("a", 0, 1), Edge("b", 1, 0), Edge("c", 1, 2), Edge("d", 2, 1),
    ])
    rep = Representation(
        (1, 1, 1), {k: Matrix(1, 1, [1.0 + 0j]) for k in "abcd"}
    )
    w = {k: 1.0 for k in "abcd"}
    lap = build_laplacian(q, rep, w)
    with pytest.raises(MethodRefusal, match="sub-Markov"):
        det_euler_truncated(lap, (0.0, 0.0, 0.0))


def test_submarkov_data_checks():
    q = Quiver(2, [Edge("e", 0, 1), Edge("f", 1, 0)])
    rep = Representation(
        (1, 1), {"e": Matrix(1, 1, [1.0 + 0j]), "f": Matrix(1, 1, [1.0 + 0j])}
    )
    w = {"e": 1.0, "f": 1.0}
    lap = build_laplacian(q, rep, w)
    data = build_submarkov(lap, (1.0, 0.0))
    assert data.reachable
    assert data.edge_norm_ok
    assert data.rho < 1.0
    data0 = build_submarkov(lap, (0.0, 0.0))
    assert not data0.reachable
    with pytest.raises(HolodetError):
        build_submarkov(lap, (-1.0, 0.0))


def test_unitary_comparison_identity_representation():
    rng = random.Random(257)
    q, rep, w = bidirected(3, [(0, 1), (1, 2), (0, 2)], rng=rng, rank=2)
    ident_rep = Representation(
        (2,) * 3, {e.id: Matrix.identity(2).map(complex) for e in q.edges}
    )
    report = unitary_comparison_check(
        q, w, lambda i: ident_rep, 2, (0.0, 0.1, 1.0, 10.0), 1
    )
    assert report.ok
    # with the identity representation the two sides coincide
    assert abs(report.min_margin) < 1e-9


def test_unitary_comparison_random_unitaries():
    rng = random.Random(263)
    q, rep, w = bidirected(3, [(0, 1), (1, 2), (0, 2)], rng=rng, rank=2)

    def factory(i):
        local = random.Random(1000 + i)
        mats = {}
        for a, b in q.involution:
            u = haar_like_unitary(2, local)
            mats[a] = u
            mats[b] = u.conj_transpose()
        return Representation((2,) * q.p, mats)

    report = unitary_comparison_check(q, w, factory, 2, (0.0, 0.1, 1.0, 10.0), 10)
    assert report.ok
    assert report.min_margin >= -1e-9


def test_unitary_comparison_requires_involution():
    q = Quiver(2, [Edge("e", 0, 1), Edge("f", 1, 0)])
    w = {"e": 1.0, "f": 1.0}
    with pytest.raises(MethodRefusal):
        unitary_comparison_check(q, w, lambda i: None, 1, (0.0,), 1)
