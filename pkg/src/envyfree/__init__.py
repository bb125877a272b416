"""Envy-free matchings and the fair-division protocols built on them."""

from .cake import (
    CakeAllocation,
    Piece,
    PiecewiseConstantValuation,
    evaluate,
    lexicographic_cut,
    lone_divider,
    mark_equal_partition,
    symmetric_divide,
)
from .efm import (
    EfmDecomposition,
    EfmExistence,
    SimpleGraph,
    StarMatching,
    decompose,
    has_nonempty_efm,
    max_cardinality_efm,
    max_r_star_efm,
    max_weight_efm,
    min_weight_efm,
    symmetric_efm,
)
from .errors import InputError, InvariantError
from .graph import (
    BipartiteGraph,
    Matching,
    WeightedBipartiteGraph,
    is_envy_free,
    is_y_path_saturated,
    neighbors,
    validate_matching,
)
from .matching import extreme_weight_max_cardinality_matching, max_cardinality_matching
from .mms import MmsInstance, ObjectAllocation, Variant, allocate, mms_value

