"""Catalog of conjectured upper bounds on the Laplacian spectral radius.

Every bound is a maximum of a closed-form expression in the degree ``d`` and
neighbour-average degree ``m``, taken either over all vertices (``vertex_max``)
or over all adjacent pairs ``v ~ j`` (``edge_max``).  The search reward for a
connected graph is ``mu - bound``, so a positive reward is a counterexample.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .errors import CatalogError, DomainError, NumericalFailure
from .formats import GRAPH6_MAX_N, to_adjacency_text, to_graph6
from .graph import DEFAULT_TOL, Graph, component_count, degree_profile, laplacian_spectral_radius

CERTIFY_EIG_TOL = 1e-12
DEFAULT_STRICT_TOL = 1e-6


class BoundForm(str, Enum):
    VERTEX_MAX = "vertex_max"
    EDGE_MAX = "edge_max"


@dataclass(frozen=True)
class BoundSpec:
    id: int
    form: BoundForm
    formula: str

    def __str__(self):
        dom = "v in V" if self.form is BoundForm.VERTEX_MAX else "v~j"
        return f"{self.id:>3}  {self.form.value:<10}  max_{{{dom}}} {self.formula}"


_V = BoundForm.VERTEX_MAX
_E = BoundForm.EDGE_MAX

CATALOG: dict[int, BoundSpec] = {
    spec.id: spec
    for spec in [
        BoundSpec(2, _V, "2 m_v^2 / d_v"),
        BoundSpec(3, _V, "m_v^2 / d_v + m_v"),
        BoundSpec(15, _V, "sqrt(4 m_v^3 / d_v)"),
        BoundSpec(28, _V, "sqrt(4 m_v^4 / d_v^2 + 2 d_v m_v)"),
        BoundSpec(29, _V, "sqrt(m_v^2 + 3 m_v^3 / d_v)"),
        BoundSpec(31, _V, "4 m_v^2 / (m_v + d_v)"),
        BoundSpec(32, _V, "sqrt(m_v^3 (m_v + 3 d_v)) / d_v"),
        BoundSpec(36, _E, "2 (m_v^2 + m_j^2) / (d_v + d_j)"),
        BoundSpec(41, _E, "2 + (m_v + m_j) - (d_v + d_j) + sqrt(2 (d_v^2 + d_j^2) - 4 (m_v + m_j) + 4)"),
        BoundSpec(43, _E, "2 + sqrt(3 (m_v^2 + m_j^2) - 2 m_v m_j - 4 (d_v + d_j) + 4)"),
        BoundSpec(49, _E, "2 + sqrt(2 (m_v^2 + m_j^2) + (d_v - d_j)^2 - 4 (d_v + d_j) + 4)"),
        BoundSpec(51, _E, "2 (m_v + m_j) - 4 m_v m_j / (d_v + d_j)"),
        BoundSpec(52, _E, "2 + sqrt(sqrt(8 (m_v^4 + m_j^4) - 8 (d_v^2 + d_j^2) + 4) - 4 (d_v + d_j) + 6)"),
        BoundSpec(53, _E, "2 + sqrt(sqrt(8 (m_v^4 + m_j^4) - 8 (d_v m_v + d_j m_j) + 4) - 4 (d_v + d_j) + 6)"),
        BoundSpec(54, _E, "2 + sqrt(2 (m_v^2 + m_j^2) + (d_v m_v + d_j m_j) - (d_v^2 + d_j^2) - 4 (d_v + d_j) + 4)"),
        BoundSpec(55, _E, "2 + sqrt(3 (m_v^2 + m_j^2) - (d_v^2 + d_j^2) - 4 (m_v + m_j) + 4)"),
        BoundSpec(57, _E, "2 + sqrt(2 (m_v^2 + m_j^2) - 8 (d_v^2 + d_j^2) / (m_v + m_j) + 4)"),
        BoundSpec(58, _E, "2 + sqrt(2 (m_v^2 + m_v m_j + m_j^2) - (d_v m_v + d_j m_j) - 4 (d_v + d_j) + 4)"),
        BoundSpec(59, _E, "(2 (m_v^2 + m_v m_j + m_j^2) - (d_v^2 + d_j^2)) / (m_v + m_j)"),
        BoundSpec(60, _E, "2 + sqrt(2 (m_v^2 + m_v m_j + m_j^2) - (d_v^2 + d_j^2) - 4 (d_v + d_j) + 4)"),
        BoundSpec(61, _E, "2 (m_v^2 + m_j^2) / (2 + sqrt(2 ((d_v - 1)^2 + (d_j - 1)^2)))"),
        BoundSpec(62, _E, "2 + sqrt(m_v^2 + 4 m_v m_j + m_j^2 - 2 d_v d_j - 4 (d_v + d_j) + 4)"),
        BoundSpec(63, _E, "d_v + d_j + m_v + m_j - 4 d_v d_j / (m_v + m_j)"),
        BoundSpec(64, _E, "m_v m_j (d_v + d_j) / (d_v d_j)"),
        BoundSpec(65, _E, "(m_v + m_j) (d_v m_v + d_j m_j) / (2 m_v m_j)"),
        BoundSpec(66, _E, "(m_v^2 + 4 m_v m_j + m_j^2 - (d_v m_v + d_j m_j)) / (d_v + d_j)"),
        BoundSpec(67, _E, "(m_v + m_j) (d_v m_v + d_j m_j) / (2 d_v d_j)"),
        BoundSpec(68, _E, "2 + sqrt((m_v - m_j)^2 + 4 d_v d_j - 4 (m_v + m_j) + 4)"),
    ]
}

CONJECTURE_IDS = tuple(sorted(CATALOG))


def get_conjecture(cid) -> BoundSpec:
    try:
        return CATALOG[int(cid)]
    except (KeyError, ValueError, TypeError):
        valid = ", ".join(str(i) for i in CONJECTURE_IDS)
        raise CatalogError(f"unknown conjecture {cid!r}; valid ids: {valid}") from None


def list_conjectures() -> list[BoundSpec]:
    return [CATALOG[i] for i in CONJECTURE_IDS]


@dataclass(frozen=True)
class BoundValue:
    bound: float
    witness: tuple  # (v,) or (v, j)
    clamped: bool
    argmax_clamped: bool


@dataclass(frozen=True)
class EvaluationReport:
    id: int
    bound: float
    mu: float
    margin: float
    argmax_witness: tuple
    clamped: bool
    argmax_clamped: bool
    residual: float

    @property
    def violated(self) -> bool:
        return self.margin > 0


def bound_value(cid, g: Graph) -> BoundValue:
    spec = get_conjecture(cid)
    if g.n < 2 or component_count(g) != 1:
        raise DomainError(f"conjecture {spec.id} is only defined on connected graphs with n >= 2")
    prof = degree_profile(g)
    d = prof.degrees.astype(np.float64)
    bound, wa, wb, any_c, best_c = kernels.numpy_kernels.bound_value(
        spec.id, spec.form is _V, g.adjacency(), d, prof.neighbor_avg
    )
    if wa < 0:
        raise DomainError(f"conjecture {spec.id}: empty maximisation domain")
    witness = (int(wa),) if spec.form is _V else (int(wa), int(wb))
    return BoundValue(float(bound), witness, bool(any_c), bool(best_c))


def evaluate(cid, g: Graph, tol: float = DEFAULT_TOL) -> EvaluationReport:
    spec = get_conjecture(cid)
    bv = bound_value(spec.id, g)
    spec_res = laplacian_spectral_radius(g, tol)
    return EvaluationReport(
        spec.id, bv.bound, spec_res.mu, spec_res.mu - bv.bound, bv.witness,
        bv.clamped, bv.argmax_clamped, spec_res.residual,
    )


def disconnected_penalty(n: int, components: int) -> float:
    return -float(n + components)


def reward(cid, g: Graph, tol: float = DEFAULT_TOL) -> float:
    """``mu - bound`` for connected graphs, ``-(n + components)`` otherwise."""
    get_conjecture(cid)
    c = component_count(g)
    if g.n < 2:
        raise DomainError("reward needs at least 2 vertices")
    if c > 1:
        return disconnected_penalty(g.n, c)
    return evaluate(cid, g, tol).margin


@dataclass(frozen=True)
class CounterexampleRecord:
    graph: Graph
    conjecture: int
    mu: float
    bound: float
    margin: float
    residual: float
    witness: tuple

    def to_text(self) -> str:
        return "\n".join([
            "# Laplacian spectral radius counterexample",
            f"conjecture: {self.conjecture}",
            f"n: {self.graph.n}",
            f"edges: {self.graph.num_edges}",
            f"mu: {self.mu!r}",
            f"bound: {self.bound!r}",
            f"margin: {self.margin!r}",
            f"witness: {' '.join(str(v) for v in self.witness)}",
            f"graph6: {to_graph6(self.graph) if self.graph.n <= GRAPH6_MAX_N else '-'}",
            "adjacency:",
            to_adjacency_text(self.graph),
            "",
        ])


class CertificationRejected(Exception):
    def __init__(self, conjecture, margin, connected=True, clamped=False, argmax_clamped=False):
        self.conjecture = conjecture
        self.margin = margin
        self.connected = connected
        self.clamped = clamped
        self.argmax_clamped = argmax_clamped
        if not connected:
            why = "graph is disconnected"
        elif argmax_clamped:
            why = f"radicand clamped at the maximising term (margin {margin:.6g})"
        else:
            why = f"margin {margin:.6g} is not above the certification threshold"
        super().__init__(f"conjecture {conjecture}: {why}")


def verify_counterexample(g: Graph, cid, strict_tol: float = DEFAULT_STRICT_TOL) -> CounterexampleRecord:
    """Certify ``g`` against conjecture ``cid`` or raise :class:`CertificationRejected`."""
    if strict_tol <= 0:
        raise ValueError("strict_tol must be positive")
    spec = get_conjecture(cid)
    if g.n < 2 or component_count(g) != 1:
        raise CertificationRejected(spec.id, float("nan"), connected=False)
    rep = evaluate(spec.id, g, CERTIFY_EIG_TOL)
    if rep.margin <= strict_tol or rep.argmax_clamped:
        raise CertificationRejected(spec.id, rep.margin, True, rep.clamped, rep.argmax_clamped)
    return CounterexampleRecord(g, spec.id, rep.mu, rep.bound, rep.margin, rep.residual, rep.argmax_witness)


class ConjectureReward:
    """Batch scorer for one conjecture at a fixed vertex count."""

    def __init__(self, cid, n: int, tol: float = DEFAULT_TOL, strict_tol: float = DEFAULT_STRICT_TOL):
        self.spec = get_conjecture(cid)
        if n < 2:
            raise DomainError("conjecture rewards need n >= 2")
        self.n = n
        self.tol = tol
        self.strict_tol = strict_tol

    def score(self, bits) -> np.ndarray:
        bits = np.ascontiguousarray(np.atleast_2d(bits), dtype=np.uint8)
        rewards, status = kernels.score_conjecture_batch(
            bits, self.n, self.spec.id, self.spec.form is _V, kernels.MAX_SWEEPS, self.tol
        )
        if status.any():
            k = int(np.flatnonzero(status)[0])
            raise NumericalFailure(
                f"eigensolve failed for batch row {k} at tolerance {self.tol:g}",
                best_estimate=float(rewards[k]),
            )
        return rewards

    def certify(self, bits):
        g = Graph(self.n, bits)
        try:
            return verify_counterexample(g, self.spec.id, self.strict_tol)
        except CertificationRejected:
            return None


class EdgeCountReward:
    """Number of edges; a smoke-test reward whose optimum is the complete graph."""

    def __init__(self, n: int):
        self.n = n

    def score(self, bits) -> np.ndarray:
        return np.atleast_2d(bits).sum(axis=1).astype(np.float64)

    def certify(self, bits):
        return None
