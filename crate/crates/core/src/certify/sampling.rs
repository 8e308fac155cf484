use std::fmt;

use serde::Serialize;

use super::envelope::ScalarFn;
use super::CertifyError;

/// Right-hand side of the sampling-period condition:
/// `(1/2L)·ln(1 + (L/γ)(1/(1+M))²)` for `L > 0`, `(1/2γ)(1/(1+M))²` for
/// `L = 0`.
pub fn max_sampling_period(l: f64, gamma: f64, m: f64) -> Result<f64, CertifyError> {
    if !(gamma > 0.0) {
        return Err(CertifyError::NonpositiveGamma { gamma });
    }
    if !(l >= 0.0) || !(m >= 0.0) {
        return Err(CertifyError::InvalidArgument(format!(
            "need L >= 0 and M >= 0, got L = {l}, M = {m}"
        )));
    }
    let q = (1.0 / (1.0 + m)).powi(2);
    if l == 0.0 {
        Ok(q / (2.0 * gamma))
    } else {
        Ok((l / gamma * q).ln_1p() / (2.0 * l))
    }
}

/// Constants `(L, γ, M, R, ρ)` and a chosen `h̃` strictly below the bound.
#[derive(Clone)]
pub struct SamplingBound {
    pub l: f64,
    pub gamma: f64,
    pub m: f64,
    pub r_level: f64,
    pub rho: ScalarFn,
    pub bound: f64,
    pub h_tilde: f64,
}

impl fmt::Debug for SamplingBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SamplingBound")
            .field("l", &self.l)
            .field("gamma", &self.gamma)
            .field("m", &self.m)
            .field("r_level", &self.r_level)
            .field("bound", &self.bound)
            .field("h_tilde", &self.h_tilde)
            .finish()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplingBoundSummary {
    pub l: f64,
    pub gamma: f64,
    pub m: f64,
    pub r_level: f64,
    pub bound: f64,
    pub h_tilde: f64,
}

impl SamplingBound {
    /// `h̃ = fraction · bound` with `fraction ∈ (0, 1)`.
    pub fn new(
        l: f64,
        gamma: f64,
        m: f64,
        r_level: f64,
        rho: ScalarFn,
        fraction: f64,
    ) -> Result<Self, CertifyError> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(CertifyError::InvalidArgument(format!(
                "fraction must lie in (0, 1), got {fraction}"
            )));
        }
        let bound = max_sampling_period(l, gamma, m)?;
        Ok(Self {
            l,
            gamma,
            m,
            r_level,
            rho,
            bound,
            h_tilde: fraction * bound,
        })
    }

    pub fn summary(&self) -> SamplingBoundSummary {
        SamplingBoundSummary {
            l: self.l,
            gamma: self.gamma,
            m: self.m,
            r_level: self.r_level,
            bound: self.bound,
            h_tilde: self.h_tilde,
        }
    }
}
