"""Beta and alpha divergences, deviance and densities from a variance function."""
from .core import (
    CumulantPair,
    DivergenceResult,
    Evaluation,
    LikelihoodValue,
    Method,
    alpha_divergence,
    alpha_divergence_via_cumulant,
    beta_divergence,
    canonical_theta,
    cumulant_pair,
    cumulant_psi,
    dual_cumulant_phi,
    evaluate,
    quasi_log_likelihood,
    unit_deviance,
)
from .density import DispersionModel, log_density, normalization_check
from .errors import (
    ConvergenceError,
    DivkitError,
    DomainError,
    ExpressionSyntaxError,
    InfiniteResultError,
    IntegrandError,
    NotDecomposableError,
    PositivityError,
    SamplerDriftError,
    UnknownIdentifierError,
    UnsupportedError,
)
from .expression import parse_vf_expression, print_expression
from .quadrature import DEFAULT_SPEC, QuadratureResult, QuadratureSpec, integrate
from .report import PropertyReport
from .stats import MonteCarloSpec, entropy_via_divergence, expected_beta_tweedie, jensen_gap_check
from .transforms import (
    alpha_from_beta,
    alpha_symmetry_check,
    beta_from_alpha,
    detect_decomposition,
    scale_identity_check,
    translate_identity_check,
)
from .varfun import (
    Bernoulli,
    Custom,
    ExponentialVF,
    HyperbolicSecant,
    MeanDomain,
    NegativeBinomial,
    TweediePower,
    VarianceFunction,
    make_variance_function,
)

__version__ = "0.1.0"
