"""Spectral density functions of group-ring operators via Cayley lcmg's.

The package follows the route from a group-ring element w to its spectral
density function through graphs: z = w w* becomes a labelled Cayley graph,
whose Markov-type operator is right multiplication by z.  Finite quotients
G/K_n give finite graphs whose balls agree with those of the infinite graph
up to a growing radius, which forces their spectral moments, and hence their
spectral measures, to converge.
"""

from .convergence import ConvergenceReport, continuity_grid, run_chain
from .errors import (
    ConfigError,
    DomainError,
    LcmgSpectraError,
    LevelRangeError,
    NumericError,
    ResourceCapError,
    StructuralError,
)
from .expr import parse_element
from .groups import (
    FiniteGroup,
    GroupElement,
    Heisenberg,
    IntegerLattice,
    QuotientChain,
    QuotientElement,
    enumerate_quotient,
    injectivity_radius,
    multiply,
    project,
)
from .lcmg import (
    Ball,
    Lcmg,
    cayley_ball_infinite,
    cayley_lcmg_finite,
    extract_ball,
    find_isomorphism,
    graph_involution,
    is_self_involutive,
    lcmg_isomorphic,
    metric_D,
)
from .oracle import torus_moment, torus_sdf
from .ring import (
    RingElement,
    SymmetrizedSupport,
    gram,
    involution,
    power_trace,
    project_ring,
    ring_multiply,
    symmetrize,
)
from .spectral import (
    KestenMeasure,
    MarkovOperator,
    SpectralDensityFunction,
    betti,
    counting_measure,
    kesten_measure,
    moment_by_walks,
    quotient_operator,
    sdf_from_measure,
)

__version__ = "0.1.0"
