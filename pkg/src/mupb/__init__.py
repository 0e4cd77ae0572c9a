"""Mutually unbiased product bases: construction, verification, structure and search."""

__version__ = "0.1.0"

from .linalg import (DEFAULT_TOL, DensityMatrix, DimensionError, DimensionSignature, Ket, MubSet,  # noqa: E402
                     NormError, ProductBasis, ProductKet, inner, partial_trace, tensor)
from .mu import are_bases_mu, factorwise_mu, global_mu_oracle, is_mu_pair, trace_identities  # noqa: E402
from .constructions import (assemble_corollary_set, canonical_qubit_triple,  # noqa: E402
                            canonical_qutrit_quadruple, weyl_operators)
from .structure import (classify, conjecture2_grouping, extract_ortho_subset,  # noqa: E402
                        mu_product_bound, partition)
from .equivalence import apply_move, equivalent, fingerprint  # noqa: E402
from .entanglement import audit_mu_vector, find_mu_vectors, is_maximally_entangled  # noqa: E402
from .search import conjecture1_probe, enumerate_structured_sets, extend_set  # noqa: E402
from .io import load_mubset, save_mubset  # noqa: E402

__all__ = [
    "DEFAULT_TOL", "DensityMatrix", "DimensionError", "DimensionSignature", "Ket", "MubSet", "NormError",
    "ProductBasis", "ProductKet", "inner", "partial_trace", "tensor",
    "are_bases_mu", "factorwise_mu", "global_mu_oracle", "is_mu_pair", "trace_identities",
    "assemble_corollary_set", "canonical_qubit_triple", "canonical_qutrit_quadruple", "weyl_operators",
    "classify", "conjecture2_grouping", "extract_ortho_subset", "mu_product_bound", "partition",
    "apply_move", "equivalent", "fingerprint",
    "audit_mu_vector", "find_mu_vectors", "is_maximally_entangled",
    "conjecture1_probe", "enumerate_structured_sets", "extend_set",
    "load_mubset", "save_mubset",
]
