"""Garding cones of sigma_m, mixed Hodge-index forms and a flat-torus model."""

from .errors import (AliasingError, ConeViolation, ContractError, DegenerateInputError, GhxError,
                     PreconditionError)
from .garding import (ConcavityProfile, GardingGap, Representer, concavity_profile, garding_gap,
                      garding_gaps, mixed_positivity, positive_representer, require_gamma)
from .herm import (HermitianForm, MatrixFormatError, MetricPencil, RealBasis, format_matrix_text,
                   inner, parse_matrix_text, pencil_eigenvalues, proportionality)
from .hodge import (QuadraticReport, corollary_hodge_index, gram_matrix, gram_report, log_concavity,
                    minor_2x2, primitive_basis, quadratic_hyperbolicity, verify_theorem_a)
from .sampling import haar_unitary, random_hermitian, random_metric, sample_gamma, stream
from .sympoly import (MixedContext, PolyOnLine, TracePowerPolynomial, hyperbolic_at, in_cone,
                      in_gamma_m, linearity_dimension, mixed_sigma, mixed_sigma_oracle, polarize,
                      real_rooted, restrict_line, sigma, sigmas)

__version__ = "0.1.0"
