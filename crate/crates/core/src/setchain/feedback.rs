use std::fmt;
use std::sync::Arc;

use super::chain::{ChainError, SetChain};
use super::region::Region;
use crate::dynamics::ControlSet;

/// Inner (emulation) feedback `k̃` used on `Θ`.
pub type InnerFeedback = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// `k = k̃` on `C₁`, `k = v_i` on `C_i`, sampled with period `h = min{h̃, r}`.
#[derive(Clone)]
pub struct PiecewiseFeedback {
    inner: InnerFeedback,
    chain: Arc<SetChain>,
    control_set: ControlSet,
    h_tilde: f64,
    r: f64,
    period: f64,
}

impl fmt::Debug for PiecewiseFeedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseFeedback")
            .field("chain", &self.chain)
            .field("h_tilde", &self.h_tilde)
            .field("r", &self.r)
            .field("period", &self.period)
            .finish()
    }
}

impl PiecewiseFeedback {
    pub fn synthesize(
        inner: InnerFeedback,
        theta: &Region,
        h_tilde: f64,
        chain: Arc<SetChain>,
        r: f64,
        control_set: ControlSet,
    ) -> Result<Self, ChainError> {
        assert!(h_tilde > 0.0 && r > 0.0, "h̃ and r must be positive");
        if theta.expr != chain.theta().expr {
            return Err(ChainError::ChainHeadMismatch);
        }
        chain.validate_controls(&control_set)?;
        Ok(Self {
            inner,
            chain,
            control_set,
            h_tilde,
            r,
            period: h_tilde.min(r),
        })
    }

    /// Replaces the sampling period (e.g. to run at a period larger than the
    /// certified one).
    pub fn with_period(mut self, h: f64) -> Self {
        assert!(h > 0.0, "sampling period must be positive");
        self.period = h;
        self
    }

    /// Replaces `v_i` for one cell of a finite chain.
    pub fn with_cell_control(self, i: usize, v: Vec<f64>) -> Result<Self, ChainError> {
        let n = self.chain.len().ok_or(ChainError::IndexOutOfRange(i))?;
        let mut regions = Vec::with_capacity(n);
        let mut controls = Vec::with_capacity(n - 1);
        for j in 1..=n {
            regions.push(self.chain.region(j)?);
            if j >= 2 {
                controls.push(if j == i { v.clone() } else { self.chain.control(j)? });
            }
        }
        if !(2..=n).contains(&i) {
            return Err(ChainError::IndexOutOfRange(i));
        }
        let chain = Arc::new(SetChain::finite(regions, controls)?);
        let theta = chain.theta().clone();
        let period = self.period;
        Ok(Self::synthesize(self.inner, &theta, self.h_tilde, chain, self.r, self.control_set)?
            .with_period(period))
    }

    pub fn chain(&self) -> &SetChain {
        &self.chain
    }

    pub fn shared_chain(&self) -> Arc<SetChain> {
        Arc::clone(&self.chain)
    }

    pub fn h_tilde(&self) -> f64 {
        self.h_tilde
    }

    pub fn dwell(&self) -> f64 {
        self.r
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn inner(&self, x: &[f64]) -> Vec<f64> {
        (self.inner)(x)
    }

    /// `(k(x), cell index of x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<(Vec<f64>, usize), ChainError> {
        let i = self.chain.classify(x)?;
        let u = if i == 1 {
            (self.inner)(x)
        } else {
            self.chain.control(i)?
        };
        if i > 1 && !self.control_set.contains(&u) {
            return Err(ChainError::ControlOutOfSet { index: i, value: u });
        }
        Ok((u, i))
    }
}
