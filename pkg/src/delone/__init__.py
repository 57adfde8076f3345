"""Delone sets: generators, patch complexity, crystallinity certificates, symbolic words and κ(n)."""

__version__ = "0.1.0"

from .core import (
    Ball,
    Box,
    DeloneConstants,
    Interval,
    PointSample,
    covering_radius,
    delone_constants,
    min_pairwise_distance,
)
from .generators import (
    TAU,
    beatty_generator,
    crystal_generator,
    cut_project_generator,
    fibonacci_generator,
    generator_from_dict,
    perturb_one_point,
    product_generator,
)
from .patches import (
    canonicalize,
    extract_patch,
    patch_census,
    patch_count_curve,
    repetitivity,
    repetitivity_curve,
)
from .crystallinity import (
    CosetDecomposition,
    Verdict,
    certify_by_count,
    certify_by_repetitivity,
    certify_period,
    coset_decomposition,
    extract_periods,
    stagnation_test,
    verify_period,
)
from .words import (
    NdWord,
    Word,
    cubic_complexity,
    full_periodicity_test,
    morse_hedlund_report,
    recurrence,
    recurrence_function,
    sturmian_word,
    word_complexity,
)
from .kappa import c_threshold, kappa_bounds, kappa_lattice, lattice_covering_radius, named_lattice
