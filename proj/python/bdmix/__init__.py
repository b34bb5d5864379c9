from ._bdmix import (
    BdmixError,
    RegimeSpec,
    c_n,
    certify_drift,
    d_n,
    decay_trace,
    h_n,
    mgf_steady_bound,
    mixing_time_bound,
    mminf_gap,
    spectral_gap,
    stationary,
    theorem1_rate,
)

__all__ = [
    "BdmixError",
    "RegimeSpec",
    "c_n",
    "certify_drift",
    "d_n",
    "decay_trace",
    "h_n",
    "mgf_steady_bound",
    "mixing_time_bound",
    "mminf_gap",
    "spectral_gap",
    "stationary",
    "theorem1_rate",
]
