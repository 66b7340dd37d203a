"""Generic tau-determinant: a Leibniz-style determinant over matrices whose
entries live in a monoid of words, evaluated through a central map tau.

Words are tuples of block-index pairs; the zero element is None.  tau of a
word multiplies the concrete blocks it names and takes the trace, returning
0 whenever dimensions fail to chain or the final product is not square.
Values are memoized by rotation class, since tau is central.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

from .errors import MethodRefusal
from .linalg import Matrix
from .walks import min_rotation, permutations_with_cycles

TAU_DET_CAP = 7


@dataclass
class TauContext:
    """Evaluation hooks for words over ordered block pairs."""

    blocks: dict            # (a, b) -> Matrix
    tau_one: object = None  # declared value of tau on the empty word
    _memo: dict = field(default_factory=dict)

    def tau(self, word):
        if word is None:
            return 0
        if not word:
            if self.tau_one is None:
                raise MethodRefusal("tau of the empty word is not declared")
            return self.tau_one
        key = min_rotation(word)
        if key in self._memo:
            return self._memo[key]
        mats = []
        for pair in key:
            m = self.blocks.get(pair)
            if m is None:
                self._memo[key] = 0
                return 0
            mats.append(m)
        prod = mats[0]
        ok = True
        for m in mats[1:]:
            if prod.cols != m.rows:
                ok = False
                break
            prod = prod * m
        if not ok or prod.rows != prod.cols:
            val = 0
        else:
            val = prod.trace()
        self._memo[key] = val
        return val


def word_concat(*words):
    if any(w is None for w in words):
        return None
    out = ()
    for w in words:
        out = out + tuple(w)
    return out


def det_tau(entries, ctx):
    """Sum over permutations of sign times tau of the entry word
    multiplied along each cycle."""
    n = len(entries)
    if any(len(row) != n for row in entries):
        raise MethodRefusal("tau-determinant needs a square array")
    if n > TAU_DET_CAP:
        raise MethodRefusal(f"tau-determinant capped at n<={TAU_DET_CAP}, got {n}")
    total = 0
    for _, cycles, sign in permutations_with_cycles(n):
        term = 1
        dead = False
        for cyc in cycles:
            word = ()
            for pos, i in enumerate(cyc):
                j = cyc[(pos + 1) % len(cyc)]
                word = word_concat(word, entries[i][j])
                if word is None:
                    dead = True
                    break
            if dead:
                break
            term = term * ctx.tau(word)
            if term == 0:
                dead = True
                break
        if dead:
            continue
        total = total + (term if sign > 0 else -term)
    return total


def block_word_matrix(block_matrix):
    """The size-n array whose (i, j) entry is the single-symbol word naming
    the block containing position (i, j)."""
    n = block_matrix.n
    return [
        [((block_matrix.bl(i), block_matrix.bl(j)),) for j in range(n)]
        for i in range(n)
    ]


def block_tau_context(block_matrix, tau_one=None):
    p = block_matrix.p
    blocks = {
        (a, b): block_matrix.block(a, b) for a in range(p) for b in range(p)
    }
    return TauContext(blocks, tau_one=tau_one)


@dataclass(frozen=True)
class VectorFieldTauReport:
    """Side-by-side evaluation of tau-determinant identities on a graph
    with constant rank N, with the index set read as the assignments of one
    outgoing edge per vertex."""

    rank: int
    det_tau_blocks: object      # tau-det of the vertex-level block matrix
    corrected_rhs: object       # N^m sum over fields of prod(1 - N^-len tau(hol))
    scaled_det: object          # prod of rank factorials times the plain det
    field_sum: object           # sum over fields of prod(1 - tau(hol))
    corrected_agrees: bool
    corollary_agrees: bool


def appendixA_special_check(quiver, rep, weights, N):
    """Evaluate both candidate sides of the trace-map identities with
    tau = matrix trace (so tau of the empty word is N) and report, rather
    than assert, their agreement."""
    from .laplacian import build_laplacian
    from .linalg import det_oracle
    from .ring import int_div, scalars_close, is_exact

    if any(r != N for r in rep.ranks):
        raise MethodRefusal("constant rank N is required for this check")
    lap = build_laplacian(quiver, rep, weights)
    m = quiver.p

    blocks = {
        (a, b): lap.block.block(a, b) for a in range(m) for b in range(m)
    }
    ctx = TauContext(blocks, tau_one=N)
    entries = [[((a, b),) for b in range(m)] for a in range(m)]
    det_tau_blocks = det_tau(entries, ctx)

    fields = _vertex_fields(quiver)
    corrected_rhs = 0
    field_sum = 0
    for field_choice in fields:
        xw = 1
        for e in field_choice:
            xw = xw * weights[e.id]
        corr = 1
        plain = 1
        for cyc in _field_cycles(quiver, field_choice):
            hol = _cycle_holonomy(rep, cyc)
            tr = hol.trace()
            corr = corr * (1 - int_div(tr, N ** len(cyc)))
            plain = plain * (1 - tr)
        corrected_rhs = corrected_rhs + xw * corr
        field_sum = field_sum + xw * plain
    corrected_rhs = (N ** m) * corrected_rhs

    scale = 1
    for r in rep.ranks:
        scale *= factorial(r)
    scaled_det = scale * det_oracle(lap.matrix)

    def same(a, b):
        if is_exact(a) and is_exact(b):
            return a == b
        return scalars_close(a, b)

    return VectorFieldTauReport(
        rank=N,
        det_tau_blocks=det_tau_blocks,
        corrected_rhs=corrected_rhs,
        scaled_det=scaled_det,
        field_sum=field_sum,
        corrected_agrees=same(det_tau_blocks, corrected_rhs),
        corollary_agrees=same(scaled_det, field_sum),
    )


def _vertex_fields(quiver):
    """All assignments of one outgoing edge to every vertex; empty if some
    vertex has no outgoing edge."""
    import itertools

    per_vertex = [quiver.out_edges(v) for v in range(quiver.p)]
    if any(not es for es in per_vertex):
        return []
    return [list(choice) for choice in itertools.product(*per_vertex)]


def _field_cycles(quiver, field_choice):
    """Limit cycles of the functional graph defined by one out-edge per
    vertex; each cycle is the list of edges traversed."""
    nxt = {e.src: e for e in field_choice}
    done = set()
    cycles = []
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
            cycles.append(path[on_path[v]:])
        done.update(on_path)
    return cycles


def _cycle_holonomy(rep, cycle_edges):
    prod = rep.matrices[cycle_edges[0].id]
    for e in cycle_edges[1:]:
        prod = prod * rep.matrices[e.id]
    return prod
