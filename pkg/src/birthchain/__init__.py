"""Transient analysis of the pure birth process with rates 1/(1+k).

Submodules:

- :mod:`birthchain.chain`: discrete subordinated chain (exact and float)
- :mod:`birthchain.ctime`: continuous-time law by closed form, uniformization and ODE
- :mod:`birthchain.genfunc`: bivariate generating function and its identities
- :mod:`birthchain.urn`: Monte Carlo of the urn / dependent Bernoulli scheme
- :mod:`birthchain.bounds`: moments and concentration-bound certification
"""

from .bounds import (
    BoundReport,
    MomentSet,
    chebyshev_report,
    general_mgf_bound,
    mcdiarmid_tail_report,
    mgf_report,
    moments,
)
from .chain import (
    ExactDist,
    coeff_Aik,
    dist_float,
    dist_recurrence,
    pnk_closed_exact,
    pnk_closed_float,
    transition_probs,
)
from .ctime import laplace_coeffs, pkt_closed, pkt_ode, pkt_uniformization
from .errors import (
    BirthChainError,
    DomainError,
    PrecisionExhausted,
    PrecisionWarning,
    ResourceLimitError,
    ToleranceNotMet,
)
from .genfunc import f_series, ode_residual, partial_fraction_check, verify_identity_aik
from .urn import SimConfig, SimSummary, expected_trials, histogram_export, simulate

__version__ = "0.1.0"
