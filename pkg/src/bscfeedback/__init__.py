"""Error-exponent bounds and a protocol simulator for the BSC with noisy feedback."""

from .core import (
    Bracket,
    BracketError,
    DomainError,
    binary_entropy,
    bisect_root,
    delta_gv,
    kl_bernoulli,
    maximize_scalar,
)
from .exponents import (
    berlekamp_zero_rate,
    capacity,
    e2,
    e_ex,
    e_ex_low_rate,
    e_low,
    e_r,
    e_sp,
    e_zero,
    e_zero_list2,
    gallager_f,
    r2,
    r_crit,
    r_min,
)
from .feedback import (
    BoundBreakdown,
    ChannelPair,
    InfeasibleError,
    SchemeParams,
    f1_noiseless,
    f1_noisy,
    gamma0,
    gamma0_parametric,
    log_p0,
    p0,
    p11,
    scheme_T,
    scheme_T_threshold,
    straight_line_upper,
    t0,
    t1,
    zero_rate_f1,
)
from .simulator import (
    Codebook,
    SimConfig,
    SimStats,
    TrialOutcome,
    build_code,
    estimate,
    exponent_trend,
    run_trial,
)

__version__ = "0.1.0"
