use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use thiserror::Error;

use super::region::Region;
use crate::dynamics::ControlSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("a set chain needs at least one region")]
    EmptyChain,
    #[error("state {point:?} is outside every region of the chain")]
    NotCovered { point: Vec<f64> },
    #[error("the first chain region differs from the inner-feedback region")]
    ChainHeadMismatch,
    #[error("control {value:?} of cell {index} is outside the control set")]
    ControlOutOfSet { index: usize, value: Vec<f64> },
    #[error("expected {expected} cell controls, got {got}")]
    ControlCount { expected: usize, got: usize },
    #[error("no region with index {0}")]
    IndexOutOfRange(usize),
}

/// Produces the tail `Ω_j, v_j` (`j ≥ 2`) of an unbounded chain on demand.
pub trait ChainGenerator: Send + Sync {
    fn region(&self, j: usize) -> Region;

    fn control(&self, j: usize) -> Vec<f64>;

    /// Membership in `Ω_j`. Override when it can be decided without building
    /// the region.
    fn contains(&self, j: usize, x: &[f64]) -> bool {
        self.region(j).contains(x)
    }
}

enum Storage {
    Finite {
        /// `Ω₂ … Ω_N`.
        tail: Vec<Region>,
        /// `v₂ … v_N`; empty until controls are attached.
        controls: Vec<Vec<f64>>,
    },
    Lazy {
        generator: Arc<dyn ChainGenerator>,
        controls: RwLock<BTreeMap<usize, Vec<f64>>>,
        extent: AtomicUsize,
        cap: usize,
    },
}

/// Ordered regions `Ω₁ = Θ, Ω₂, …` with cells `C_i = Ω_i \ B_{i−1}` and unions
/// `B_i = B_{i−1} ∪ Ω_i`. Indices are 1-based.
pub struct SetChain {
    theta: Region,
    storage: Storage,
}

impl fmt::Debug for SetChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("SetChain");
        s.field("theta", &self.theta);
        match &self.storage {
            Storage::Finite { tail, controls } => {
                s.field("tail", tail).field("controls", controls);
            }
            Storage::Lazy { extent, cap, .. } => {
                s.field("extent", &extent.load(Ordering::Relaxed))
                    .field("cap", cap);
            }
        }
        s.finish()
    }
}

/// Default bound on how far a lazy chain is extended.
pub const DEFAULT_LAZY_CAP: usize = 10_000_000;

impl SetChain {
    /// Finite chain from `Ω₁ … Ω_N`, without controls.
    pub fn decompose(regions: Vec<Region>) -> Result<Self, ChainError> {
        let mut it = regions.into_iter();
        let theta = it.next().ok_or(ChainError::EmptyChain)?;
        Ok(Self {
            theta,
            storage: Storage::Finite {
                tail: it.collect(),
                controls: Vec::new(),
            },
        })
    }

    /// Finite chain with controls `v₂ … v_N`.
    pub fn finite(regions: Vec<Region>, controls: Vec<Vec<f64>>) -> Result<Self, ChainError> {
        Self::decompose(regions)?.with_controls(controls)
    }

    /// Unbounded chain: `Θ` followed by the generator's regions.
    pub fn lazy(theta: Region, generator: Arc<dyn ChainGenerator>) -> Self {
        Self {
            theta,
            storage: Storage::Lazy {
                generator,
                controls: RwLock::new(BTreeMap::new()),
                extent: AtomicUsize::new(1),
                cap: DEFAULT_LAZY_CAP,
            },
        }
    }

    pub fn with_cap(mut self, new_cap: usize) -> Self {
        if let Storage::Lazy { cap, .. } = &mut self.storage {
            *cap = new_cap.max(1);
        }
        self
    }

    pub fn with_controls(mut self, new_controls: Vec<Vec<f64>>) -> Result<Self, ChainError> {
        match &mut self.storage {
            Storage::Finite { tail, controls } => {
                if new_controls.len() != tail.len() {
                    return Err(ChainError::ControlCount {
                        expected: tail.len(),
                        got: new_controls.len(),
                    });
                }
                *controls = new_controls;
            }
            Storage::Lazy { .. } => {
                if !new_controls.is_empty() {
                    return Err(ChainError::ControlCount {
                        expected: 0,
                        got: new_controls.len(),
                    });
                }
            }
        }
        Ok(self)
    }

    pub fn theta(&self) -> &Region {
        &self.theta
    }

    /// `Some(N)` for finite chains.
    pub fn len(&self) -> Option<usize> {
        match &self.storage {
            Storage::Finite { tail, .. } => Some(tail.len() + 1),
            Storage::Lazy { .. } => None,
        }
    }

    pub fn is_lazy(&self) -> bool {
        matches!(self.storage, Storage::Lazy { .. })
    }

    /// Largest index materialized so far (finite chains: `N`).
    pub fn extent(&self) -> usize {
        match &self.storage {
            Storage::Finite { tail, .. } => tail.len() + 1,
            Storage::Lazy { extent, .. } => extent.load(Ordering::Acquire),
        }
    }

    fn upper_index(&self) -> usize {
        match &self.storage {
            Storage::Finite { tail, .. } => tail.len() + 1,
            Storage::Lazy { cap, .. } => *cap,
        }
    }

    pub fn region(&self, j: usize) -> Result<Region, ChainError> {
        match (&self.storage, j) {
            (_, 0) => Err(ChainError::IndexOutOfRange(0)),
            (_, 1) => Ok(self.theta.clone()),
            (Storage::Finite { tail, .. }, j) => tail
                .get(j - 2)
                .cloned()
                .ok_or(ChainError::IndexOutOfRange(j)),
            (Storage::Lazy { generator, .. }, j) => Ok(generator.region(j)),
        }
    }

    /// `x ∈ Ω_j`.
    pub fn in_region(&self, j: usize, x: &[f64]) -> bool {
        match (&self.storage, j) {
            (_, 0) => false,
            (_, 1) => self.theta.contains(x),
            (Storage::Finite { tail, .. }, j) => tail.get(j - 2).is_some_and(|r| r.contains(x)),
            (Storage::Lazy { generator, .. }, j) => generator.contains(j, x),
        }
    }

    /// `x ∈ B_i = Ω₁ ∪ … ∪ Ω_i`.
    pub fn in_union(&self, i: usize, x: &[f64]) -> bool {
        (1..=i).any(|k| self.in_region(k, x))
    }

    /// `x ∈ C_i = Ω_i \ B_{i−1}`.
    pub fn in_cell(&self, i: usize, x: &[f64]) -> bool {
        self.in_region(i, x) && !self.in_union(i - 1, x)
    }

    /// Region descriptor of `C_i`.
    pub fn cell_region(&self, i: usize) -> Result<Region, ChainError> {
        let mut cell = self.region(i)?;
        for k in 1..i {
            cell = cell.minus(&self.region(k)?);
        }
        Ok(cell)
    }

    /// Index of the unique cell containing `x`: the smallest `i` with
    /// `x ∈ Ω_i`. Lazy chains are extended until `x` is covered.
    pub fn classify(&self, x: &[f64]) -> Result<usize, ChainError> {
        let top = self.upper_index();
        for i in 1..=top {
            if self.in_region(i, x) {
                if let Storage::Lazy { extent, .. } = &self.storage {
                    extent.fetch_max(i, Ordering::AcqRel);
                }
                return Ok(i);
            }
        }
        Err(ChainError::NotCovered { point: x.to_vec() })
    }

    /// Like [`classify`](Self::classify) but `None` outside the chain.
    pub fn try_classify(&self, x: &[f64]) -> Option<usize> {
        self.classify(x).ok()
    }

    /// `v_i` for `i ≥ 2`.
    pub fn control(&self, i: usize) -> Result<Vec<f64>, ChainError> {
        if i < 2 {
            return Err(ChainError::IndexOutOfRange(i));
        }
        match &self.storage {
            Storage::Finite { tail, controls } => {
                if controls.len() != tail.len() {
                    return Err(ChainError::ControlCount {
                        expected: tail.len(),
                        got: controls.len(),
                    });
                }
                controls
                    .get(i - 2)
                    .cloned()
                    .ok_or(ChainError::IndexOutOfRange(i))
            }
            Storage::Lazy {
                generator,
                controls,
                ..
            } => {
                if let Some(v) = controls.read().unwrap().get(&i) {
                    return Ok(v.clone());
                }
                let v = generator.control(i);
                controls.write().unwrap().entry(i).or_insert(v.clone());
                Ok(v)
            }
        }
    }

    /// Checks every stored control against `U` (lazy chains: the ones
    /// materialized so far plus `v₂`).
    pub fn validate_controls(&self, set: &ControlSet) -> Result<(), ChainError> {
        let indices: Vec<usize> = match &self.storage {
            Storage::Finite { tail, .. } => (2..tail.len() + 2).collect(),
            Storage::Lazy { .. } => (2..=self.extent().max(2)).collect(),
        };
        for i in indices {
            let v = self.control(i)?;
            if !set.contains(&v) {
                return Err(ChainError::ControlOutOfSet { index: i, value: v });
            }
        }
        Ok(())
    }
}
