"""Identifiability checks for sparse matrix factorization Z = X Y^T."""
from ._kernels import BACKEND
from .checks import check_fixed_support_nc, check_instance_ps_uniqueness, \
    check_right_identifiability, check_support_identifiability_sc, flop_model, in_IC, in_MC
from .errors import CapExceeded, DimensionMismatch, EnumerationBudgetExceeded, NotInFamily, \
    NotInSupport, NotRankOne, NotStable, ParseError, PreconditionNotMet, SfidError, ZeroColumn
from .gaussian import GaussianRational
from .lifting import Equivalence, FactorPair, factor_from_rank_one, pairs_equivalent, \
    pairs_equivalent_perm_only, phi, phi_supports, sum_tuple, tuple_equivalent, tuple_supports
from .linalg import DEFAULT_TOL, EXACT, Tolerance, collinearity_partition, kruskal_rank, \
    normalize_columns, numerical_rank
from .oracle import OracleReport, construct_uniform_counterexample, oracle_A_injectivity, \
    oracle_kruskal_rank, oracle_right_identifiability, randomized_counterexample_search
from .supports import Bounded, ColumnSparse, Enumerated, EnumeratedPairs, GlobalSparse, \
    Intersection, PairFamily, Product, Regular, RowSparse, SupportFamily, SupportMatrix, \
    SupportPair, completion, enumerate_family, fingerprint, intersect, is_stable_by_permutation, \
    member, signature
from .uniform import s_uniqueness_fixed_support, uniform_emd_family, uniform_emd_fixed_support, \
    uniform_right_classical, uniform_right_identifiability
from .verdict import FactorCounterexample, Status, TupleCounterexample, Verdict

__version__ = "0.1.0"
