"""Graphs as upper-triangle edge-bit vectors.

Slot ``k`` of ``edge_bits`` holds the pair ``(i, j)``, ``i < j``, enumerated row
by row: ``(0,1), (0,2), ..., (0,n-1), (1,2), ..., (n-2,n-1)``.  The same
order is used for the policy observation and for the adjacency reconstruction.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InputShapeError, NumericalFailure

DEFAULT_TOL = 1e-10


def n_slots(n: int) -> int:
    return n * (n - 1) // 2


def slot_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    edge_bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        bits = np.array(self.edge_bits, dtype=np.uint8).ravel()
        if self.n < 1:
            raise InputShapeError(f"vertex count must be >= 1, got {self.n}")
        if bits.size != n_slots(self.n):
            raise InputShapeError(
                f"expected {n_slots(self.n)} edge bits for n={self.n}, got {bits.size}"
            )
        if bits.size and bits.max() > 1:
            raise InputShapeError("edge bits must be 0 or 1")
        bits.flags.writeable = False
        object.__setattr__(self, "edge_bits", bits)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edge_bits, other.edge_bits)

    def __hash__(self):
        return hash((self.n, self.edge_bits.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"

    @property
    def num_edges(self) -> int:
        return int(self.edge_bits.sum())

    def adjacency(self) -> np.ndarray:
        return kernels.numpy_kernels.adjacency(self.edge_bits, self.n)

    def edges(self) -> list[tuple[int, int]]:
        return [p for p, b in zip(slot_pairs(self.n), self.edge_bits) if b]


def graph_from_bits(n: int, bits) -> Graph:
    return Graph(n, np.asarray(bits))


def from_adjacency(a) -> Graph:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputShapeError(f"adjacency matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    if not np.array_equal(a, a.T):
        raise InputShapeError("adjacency matrix is not symmetric")
    if np.any(np.diag(a)):
        raise InputShapeError("adjacency matrix has a nonzero diagonal")
    iu, ju = np.triu_indices(n, 1)
    return Graph(n, a[iu, ju])


def empty_graph(n: int) -> Graph:
    return Graph(n, np.zeros(n_slots(n), dtype=np.uint8))


def complete_graph(n: int) -> Graph:
    return Graph(n, np.ones(n_slots(n), dtype=np.uint8))


def from_edges(n: int, edges) -> Graph:
    a = np.zeros((n, n), dtype=np.uint8)
    for i, j in edges:
        a[i, j] = a[j, i] = 1
    return from_adjacency(a)


def path_graph(n: int) -> Graph:
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(n: int) -> Graph:
    """K_{1,n-1} with centre 0."""
    return from_edges(n, [(0, i) for i in range(1, n)])


def relabel(g: Graph, perm) -> Graph:
    """Graph with vertex ``v`` renamed ``perm[v]``."""
    perm = np.asarray(perm)
    a = g.adjacency()
    b = np.zeros_like(a)
    b[np.ix_(perm, perm)] = a
    return from_adjacency(b)


@dataclass(frozen=True)
class DegreeProfile:
    degrees: np.ndarray
    neighbor_avg: np.ndarray


def degree_profile(g: Graph) -> DegreeProfile:
    """Degrees ``d_v`` and neighbour-average degrees ``m_v`` (0 for isolated vertices)."""
    d, m = kernels.numpy_kernels.degree_profile(g.adjacency())
    return DegreeProfile(d.astype(np.int64), m)


def laplacian(g: Graph) -> np.ndarray:
    a = g.adjacency()
    return np.diag(a.sum(axis=1)).astype(np.float64) - a


def component_count(g: Graph) -> int:
    return int(kernels.count_components(g.adjacency()))


def is_connected(g: Graph) -> bool:
    return component_count(g) == 1


@dataclass(frozen=True)
class SpectralResult:
    mu: float
    residual: float


def laplacian_spectral_radius(g: Graph, tol: float = DEFAULT_TOL) -> SpectralResult:
    """Largest Laplacian eigenvalue via cyclic Jacobi.

    ``mu`` is the Rayleigh quotient of the Jacobi eigenvector and ``residual``
    is ``||L x - mu x||``; for a symmetric matrix some eigenvalue lies within
    ``residual`` of ``mu``, so ``residual <= tol`` certifies the accuracy.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if g.n == 1:
        return SpectralResult(0.0, 0.0)
    mu, res, converged = kernels.spectral_radius(laplacian(g), kernels.MAX_SWEEPS)
    mu, res = float(mu), float(res)
    if not converged or res > tol:
        raise NumericalFailure(
            f"Jacobi eigensolve did not reach tolerance {tol:g} (residual {res:.3g})",
            best_estimate=mu,
        )
    return SpectralResult(mu, res)
