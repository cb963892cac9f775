"""Orthogonal series machinery for Gaussian processes.

Sampling-type (Paley-Wiener) expansions, Karhunen-Loeve bases with
closed-form eigenpairs, fundamental-martingale path transforms, and
independent numerical oracles for all of them.
"""

from .specfun import RootList, bessel_j, bessel_j_prime, bessel_zeros, find_roots
from .chain import (
    ChainComponents,
    StationaryChain,
    StructureFn,
    fbm_components,
    fbm_structure,
    kernel_K,
    kernel_Q_diag,
    kernel_diag,
)
from .processes import (
    AR,
    OU,
    FBM,
    AlphaWienerBridge,
    BrownianBridge,
    BrownianMotion,
    CovarianceMatrix,
    EvenBridge,
    EvenMartingale,
    FBMEven,
    FBMOdd,
    OddBridge,
    OddMartingale,
    SingleSidedMartingale,
    covariance,
    covariance_matrix,
    spectral_density,
)
from .series import (
    BM,
    BMBridge,
    CoefficientDraw,
    ExtendedEvenBridge,
    ExtendedOddBridge,
    FBMEvenBridge,
    FBMEvenMartingale,
    FBMOddBridge,
    FBMOddMartingale,
    KLBasis,
    PWExpansion,
    evaluate_path,
    extended_bridge_basis,
    kl_basis,
    kl_eigenfunctions,
    kl_kernel,
    pw_fbm,
    pw_martingale,
    pw_stationary,
    sample_coefficients,
    series_covariance,
)
from .martingales import (
    BridgeKernel,
    SamplePath,
    bridge,
    extended_bridge,
    fwd_even,
    fwd_odd,
    fwd_single_sided,
    inv_even,
    inv_odd,
    inv_single_sided,
    inverse_bridge,
)
from .verify import (
    EigReport,
    RateReport,
    cholesky_sample,
    fbm_covariance_quad,
    gram_matrix,
    mc_covariance,
    mercer_check,
    nystrom_eig,
    truncation_rate,
)

__version__ = "0.1.0"

__all__ = [
    "AR",
    "AlphaWienerBridge",
    "BM",
    "BMBridge",
    "BridgeKernel",
    "BrownianBridge",
    "BrownianMotion",
    "ChainComponents",
    "CoefficientDraw",
    "CovarianceMatrix",
    "EigReport",
    "EvenBridge",
    "EvenMartingale",
    "ExtendedEvenBridge",
    "ExtendedOddBridge",
    "FBM",
    "FBMEven",
    "FBMEvenBridge",
    "FBMEvenMartingale",
    "FBMOdd",
    "FBMOddBridge",
    "FBMOddMartingale",
    "KLBasis",
    "OU",
    "OddBridge",
    "OddMartingale",
    "PWExpansion",
    "RateReport",
    "RootList",
    "SamplePath",
    "SingleSidedMartingale",
    "StationaryChain",
    "StructureFn",
    "bessel_j",
    "bessel_j_prime",
    "bessel_zeros",
    "bridge",
    "cholesky_sample",
    "covariance",
    "covariance_matrix",
    "evaluate_path",
    "extended_bridge",
    "extended_bridge_basis",
    "fbm_components",
    "fbm_covariance_quad",
    "fbm_structure",
    "find_roots",
    "fwd_even",
    "fwd_odd",
    "fwd_single_sided",
    "gram_matrix",
    "inv_even",
    "inv_odd",
    "inv_single_sided",
    "inverse_bridge",
    "kernel_K",
    "kernel_Q_diag",
    "kernel_diag",
    "kl_basis",
    "kl_eigenfunctions",
    "kl_kernel",
    "mc_covariance",
    "mercer_check",
    "nystrom_eig",
    "pw_fbm",
    "pw_martingale",
    "pw_stationary",
    "sample_coefficients",
    "series_covariance",
    "spectral_density",
    "truncation_rate",
]
