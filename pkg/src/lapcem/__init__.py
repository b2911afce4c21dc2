"""Cross-entropy search for graphs that violate conjectured bounds on the
Laplacian spectral radius, plus a verifier for candidate counterexamples."""

__version__ = "0.1.0"

from ._backend import USE_NUMBA, backend_name
from .conjectures import (
    CATALOG,
    CONJECTURE_IDS,
    CertificationRejected,
    ConjectureReward,
    CounterexampleRecord,
    EdgeCountReward,
    bound_value,
    evaluate,
    list_conjectures,
    reward,
    verify_counterexample,
)
from .engine import CEInstance, GenerationConfig, GenerationStats
from .formats import from_adjacency_text, from_graph6, read_graph_text, to_adjacency_text, to_graph6
from .graph import (
    Graph,
    degree_profile,
    from_adjacency,
    graph_from_bits,
    is_connected,
    laplacian_spectral_radius,
)
from .parallel import SearchConfig, SearchResult, run_parallel, split_batch
