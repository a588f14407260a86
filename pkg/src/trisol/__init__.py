"""Three-weak-solutions toolkit.

Computes the closed-form constants, certifies the four hypotheses of the
three-critical-points theorem on sampled boxes, determines the admissible
parameter interval, and searches for distinct critical points of the
frozen-time energy functional on a discretized domain.
"""

from .constants import ConstantsReport, compute_report, embedding_bound, k1_k2, kappa, two_star
from .functionals import (
    EnergyBreakdown,
    Nonlinearity,
    ProblemSpec,
    big_f,
    energy,
    f_tilde,
    gradient,
    make_nonlinearity,
)
from .geometry import (
    Ball,
    Box,
    Field,
    Grid,
    Masked,
    apply_neg_laplacian,
    h10_norm_sq,
    inradius,
    integrate,
    l2_norm_sq,
)
from .hypotheses import (
    AdmissibleInterval,
    AssumptionReport,
    HypothesisReport,
    SampleSet,
    admissible_interval,
    check_all,
    check_assumption_1,
    check_assumption_2,
    check_assumption_3,
    check_assumption_4,
)
from .solver import (
    CriticalPoint,
    SolutionSet,
    descend,
    find_three,
    mountain_pass,
    verify_weak_form,
)
from .testfn import (
    TestFunctionReport,
    build_u_beta,
    chi_upper_bound,
    phi_u_beta_closed,
    vartheta_u_beta_lower,
)

__version__ = "0.1.0"
