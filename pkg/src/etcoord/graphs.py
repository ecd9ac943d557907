"""Directed communication networks between coordinating agents.

An edge (i, j) means information flows from node j to node i, i.e. node i
listens to node j.  Node indices are 1-based in every public interface and
in all serialized formats; only array storage is 0-based.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

# Spectral helpers operate on small dense matrices only; this library targets
# desk-scale fleets, not large networks.
MAX_DENSE_NODES = 64

# Exact spectra are computed for integer matrices up to this side; beyond it
# the Fraction arithmetic cost is not worth it and LAPACK takes over.
_EXACT_SPECTRUM_NODES = 16


@dataclass(frozen=True)
class Digraph:
    """Directed graph over nodes {1, ..., n}, without self-loops.

    ``edges`` is a frozenset of ordered pairs (i, j): j transmits to i.
    """

    n: int
    edges: frozenset

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"node count must be an integer >= 2, got {self.n!r}")
        norm = set()
        for e in self.edges:
            try:
                i, j = e
            except (TypeError, ValueError):
                raise ValueError(f"edge {e!r} is not an (i, j) pair") from None
            i, j = int(i), int(j)
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"edge ({i}, {j}) references a node outside 1..{self.n}")
            if i == j:
                raise ValueError(f"self-loop ({i}, {i}) is not allowed")
            norm.add((i, j))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable) -> "Digraph":
        return cls(n, frozenset(tuple(e) for e in edges))


def adjacency(g: Digraph) -> np.ndarray:
    """0/1 adjacency matrix A with A[i-1, j-1] = 1 iff (i, j) is an edge."""
    a = np.zeros((g.n, g.n), dtype=np.int64)
    for i, j in g.edges:
        a[i - 1, j - 1] = 1
    return a


def laplacian(g: Digraph) -> np.ndarray:
    """Graph Laplacian L = diag(in-degrees) - A.  Rows sum to zero exactly."""
    a = adjacency(g)
    return np.diag(a.sum(axis=1)) - a


def neighborhood(g: Digraph, i: int) -> set:
    """The set of nodes agent i listens to: {j : (i, j) in edges}."""
    if not (1 <= i <= g.n):
        raise ValueError(f"node index {i} outside 1..{g.n}")
    return {j for (k, j) in g.edges if k == i}


def _successors(g: Digraph) -> list:
    """succ[j] = nodes that receive from j (0-based lists)."""
    succ = [[] for _ in range(g.n)]
    for i, j in g.edges:
        succ[j - 1].append(i - 1)
    return succ


def has_spanning_tree(g: Digraph) -> bool:
    """True iff some root node transmits, directly or transitively, to all.

    Exact BFS reachability; the equivalent spectral characterisation (one zero
    Laplacian eigenvalue, rest in the open right half plane) is used only as a
    cross-check in tests because classifying eigenvalues near zero is fragile.
    """
    succ = _successors(g)
    for root in range(g.n):
        seen = [False] * g.n
        seen[root] = True
        queue = deque([root])
        count = 1
        while queue:
            u = queue.popleft()
            for v in succ[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    queue.append(v)
        if count == g.n:
            return True
    return False


def spectrum(m) -> np.ndarray:
    """Eigenvalues of a small dense real matrix, with algebraic multiplicity.

    Integer-valued matrices up to side 16 (graph Laplacians in particular)
    are solved through their exact characteristic polynomial, which keeps
    repeated defective eigenvalues accurate: a plain QR iteration smears a
    Jordan block of size m over a radius ~eps^(1/m), far outside the 1e-8
    accuracy this function promises.  Everything else goes to LAPACK, where
    a failed QR iteration surfaces as numpy.linalg.LinAlgError rather than
    looping forever.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DENSE_NODES:
        raise ValueError(f"matrix side {a.shape[0]} exceeds dense limit {MAX_DENSE_NODES}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if a.shape[0] <= _EXACT_SPECTRUM_NODES and np.all(a == np.round(a)):
        return _integer_spectrum(np.round(a).astype(np.int64))
    return np.linalg.eigvals(a)


# -- exact spectra of integer matrices -----------------------------------
#
# Polynomials are coefficient lists over Fraction, descending powers, with a
# nonzero leading coefficient (except the zero polynomial []).


def _pstrip(p):
    z = 0
    while z < len(p) and p[z] == 0:
        z += 1
    return p[z:]


def _pderiv(p):
    d = len(p) - 1
    return _pstrip([c * (d - z) for z, c in enumerate(p[:-1])])


def _pdivmod(a, b):
    a = list(a)
    if len(a) < len(b):
        return [], _pstrip(a)
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    for z in range(len(q)):
        f = a[z] / b[0]
        q[z] = f
        if f:
            for w in range(len(b)):
                a[z + w] -= f * b[w]
    return _pstrip(q), _pstrip(a[len(q):])


def _pgcd(a, b):
    a, b = _pstrip(list(a)), _pstrip(list(b))
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    return [c / a[0] for c in a] if a else a


def _charpoly(a: np.ndarray):
    """Exact monic characteristic polynomial via Faddeev-LeVerrier."""
    n = a.shape[0]
    mat = [[Fraction(int(a[i, j])) for j in range(n)] for i in range(n)]
    aux = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    coeffs = [Fraction(1)]
    for k in range(1, n + 1):
        prod = [
            [sum(mat[i][w] * aux[w][j] for w in range(n)) for j in range(n)]
            for i in range(n)
        ]
        c = -sum(prod[i][i] for i in range(n)) / k
        coeffs.append(c)
        aux = [[prod[i][j] + (c if i == j else 0) for j in range(n)] for i in range(n)]
    return coeffs


def _integer_spectrum(a: np.ndarray) -> np.ndarray:
    """Roots-with-multiplicity of the exact characteristic polynomial.

    Yun's square-free decomposition splits the polynomial into factors with
    only simple roots, which a companion-matrix solve then locates to full
    working precision; multiplicities come out exact.
    """
    p = _charpoly(a)
    # Yun: f = prod_i a_i^i with each a_i square-free.
    g = _pgcd(p, _pderiv(p))
    c, _ = _pdivmod(p, g)
    d, _ = _pdivmod(_pderiv(p), g)
    d = _pstrip([x - y for x, y in _zip_pad(d, _pderiv(c))])
    out = []
    mult = 1
    while len(c) > 1:
        fac = _pgcd(c, d) if d else [x / c[0] for x in c]
        if len(fac) > 1:
            roots = np.roots([float(x) for x in fac])
            out.extend((complex(r), mult) for r in roots)
        c, _ = _pdivmod(c, fac)
        if len(c) <= 1:
            break
        d2, _ = _pdivmod(d, fac)
        d = _pstrip([x - y for x, y in _zip_pad(d2, _pderiv(c))])
        mult += 1
    eigs = []
    for val, m in out:
        eigs.extend([val] * m)
    return np.array(eigs, dtype=complex)


def _zip_pad(a, b):
    """Align two descending coefficient lists at the constant term."""
    la, lb = len(a), len(b)
    width = max(la, lb)
    a = [Fraction(0)] * (width - la) + list(a)
    b = [Fraction(0)] * (width - lb) + list(b)
    return zip(a, b)
