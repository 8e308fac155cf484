use serde::{Deserialize, Serialize};

use crate::certify::LyapunovKind;
use crate::dynamics::BoxSet;
use crate::vecops::dot;

/// Predicate tree over the state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionExpr {
    /// All of ℝⁿ.
    Everything,
    /// `normal·x ≤ offset`, or `<` when strict.
    HalfSpace {
        normal: Vec<f64>,
        offset: f64,
        #[serde(default)]
        strict: bool,
    },
    /// Closed box.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `V(x) ≤ level`, or `<` when strict.
    Sublevel {
        lyapunov: LyapunovKind,
        level: f64,
        #[serde(default)]
        strict: bool,
    },
    /// `|x_axis| ≤ half_width`.
    Band { axis: usize, half_width: f64 },
    Intersection { parts: Vec<RegionExpr> },
    Union { parts: Vec<RegionExpr> },
    Complement { inner: Box<RegionExpr> },
}

impl RegionExpr {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            RegionExpr::Everything => true,
            RegionExpr::HalfSpace {
                normal,
                offset,
                strict,
            } => {
                let s = dot(normal, x);
                if *strict {
                    s < *offset
                } else {
                    s <= *offset
                }
            }
            RegionExpr::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi),
            RegionExpr::Sublevel {
                lyapunov,
                level,
                strict,
            } => {
                let v = lyapunov.value(x);
                if *strict {
                    v < *level
                } else {
                    v <= *level
                }
            }
            RegionExpr::Band { axis, half_width } => x[*axis].abs() <= *half_width,
            RegionExpr::Intersection { parts } => parts.iter().all(|p| p.contains(x)),
            RegionExpr::Union { parts } => parts.iter().any(|p| p.contains(x)),
            RegionExpr::Complement { inner } => !inner.contains(x),
        }
    }
}

/// A state-space set with an optional bounding box for grid sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub expr: RegionExpr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounding_box: Option<BoxSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl From<RegionExpr> for Region {
    fn from(expr: RegionExpr) -> Self {
        Self {
            expr,
            bounding_box: None,
            label: None,
        }
    }
}

impl Region {
    pub fn everything() -> Self {
        RegionExpr::Everything.into()
    }

    pub fn half_space(normal: Vec<f64>, offset: f64, strict: bool) -> Self {
        RegionExpr::HalfSpace {
            normal,
            offset,
            strict,
        }
        .into()
    }

    /// `x_axis ≤ bound` (or `<`) in `dim` dimensions.
    pub fn axis_at_most(dim: usize, axis: usize, bound: f64, strict: bool) -> Self {
        let mut normal = vec![0.0; dim];
        normal[axis] = 1.0;
        Self::half_space(normal, bound, strict)
    }

    /// `x_axis ≥ bound` (or `>`) in `dim` dimensions.
    pub fn axis_at_least(dim: usize, axis: usize, bound: f64, strict: bool) -> Self {
        let mut normal = vec![0.0; dim];
        normal[axis] = -1.0;
        Self::half_space(normal, -bound, strict)
    }

    pub fn closed_box(b: BoxSet) -> Self {
        Self {
            expr: RegionExpr::Box {
                lower: b.lower.clone(),
                upper: b.upper.clone(),
            },
            bounding_box: Some(b),
            label: None,
        }
    }

    pub fn sublevel(lyapunov: LyapunovKind, level: f64, strict: bool) -> Self {
        RegionExpr::Sublevel {
            lyapunov,
            level,
            strict,
        }
        .into()
    }

    pub fn band(axis: usize, half_width: f64) -> Self {
        RegionExpr::Band { axis, half_width }.into()
    }

    pub fn with_bounding_box(mut self, b: BoxSet) -> Self {
        self.bounding_box = Some(b);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.expr.contains(x)
    }

    pub fn intersect(&self, other: &Region) -> Region {
        let bounding_box = match (&self.bounding_box, &other.bounding_box) {
            (Some(a), Some(b)) => Some(a.intersect(b)),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        Region {
            expr: RegionExpr::Intersection {
                parts: vec![self.expr.clone(), other.expr.clone()],
            },
            bounding_box,
            label: None,
        }
    }

    pub fn union(&self, other: &Region) -> Region {
        let bounding_box = match (&self.bounding_box, &other.bounding_box) {
            (Some(a), Some(b)) => Some(BoxSet::new(
                a.lower.iter().zip(&b.lower).map(|(p, q)| p.min(*q)).collect(),
                a.upper.iter().zip(&b.upper).map(|(p, q)| p.max(*q)).collect(),
            )),
            _ => None,
        };
        Region {
            expr: RegionExpr::Union {
                parts: vec![self.expr.clone(), other.expr.clone()],
            },
            bounding_box,
            label: None,
        }
    }

    pub fn complement(&self) -> Region {
        let expr = match &self.expr {
            RegionExpr::Complement { inner } => (**inner).clone(),
            e => RegionExpr::Complement {
                inner: Box::new(e.clone()),
            },
        };
        expr.into()
    }

    /// `self \ other`.
    pub fn minus(&self, other: &Region) -> Region {
        let mut r = self.intersect(&other.complement());
        r.bounding_box = self.bounding_box.clone();
        r
    }
}
