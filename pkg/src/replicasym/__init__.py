"""Exact replica-permutation witnesses for local-operation obstructions between pure states."""

from .canonical_engine import BlockTerm, SymBlock, TermStats, canonicalize, evaluate_fast, expand_block_terms
from .classifier import Evaluation, Verdict, VerdictKind, check_obstruction, check_pair, evaluate, tangle
from .errors import NotFactoredError, ResourceCapExceeded, ShapeMismatchError
from .exact_scalar import ApproxScalar, ExactScalar, as_scalar
from .permutation_algebra import (
    LocalSymOp,
    ReplicaPermutation,
    WitnessOperator,
    apply_permutation,
    apply_witness_reference,
    commutes_with_local_powers_check,
    compose,
    signature,
)
from .replica_state import (
    ReplicaState,
    SystemShape,
    inner_product,
    norm_sq,
    rank_profile,
    reduced_density_rank,
    tensor_power,
)
from .state_library import (
    aharonov,
    aharonov_plus3,
    bell,
    biseparable,
    ghz,
    product_state,
    schmidt_state,
    w3_threelevel,
    w_qubit,
)
from .suite import reproduce_paper_suite
from .witness_library import a_3tau, a_tau, aas, antisymmetrizer, p_minus, p_n, schmidt_rank_witness, symmetrizer

__version__ = "0.1.0"
