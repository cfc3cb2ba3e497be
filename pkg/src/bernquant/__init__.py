"""Bernstein approximation with one-bit sigma-delta coefficients and quantized networks."""

from .bernstein import (
    GridSamples,
    basis_matrix,
    basis_tensor,
    central_moment,
    eval_basis_1d,
    eval_basis_md,
    grid_operator_apply,
    moment_closed_form,
    variation,
)
from .errors import (
    AlphabetViolation,
    BernquantError,
    CoefficientOverflow,
    ConfigError,
    DomainError,
    InfeasibleParameters,
    NetFormatError,
    PreconditionError,
    ResourceCapExceeded,
    StabilityOverflow,
)
from .functions import TargetFunction, builtin, builtin_suite, from_samples
from .qnn import NetBuilder, QuantNet, SizeTriple, compose, deserialize_net, evaluate_net, serialize_net, size_of
from .quad import attach_sign_layer, build_bernstein_quad, build_mult2_quad, build_multd_quad
from .relu import (
    attach_sign_layer_relu,
    build_bernstein_relu,
    build_bernstein_relu_1d,
    build_mult2_relu,
    build_multd_relu,
    build_phi_block,
    build_squaring,
)
from .sigma_delta import ONE_BIT, THREE_BIT, TWO_BIT, Alphabet, SdState, SignTensor, quantize_1d, quantize_directional
from .smoothing import CoeffTensor, SmoothnessSpec, eval_combination, iterated_coeffs
from .verify import ErrorReport, RateFit, certify_explicit_bounds, decompose_error, fit_rate, run_binary_bernstein

__version__ = "0.1.0"
