use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::CertifyError;

/// Scalar function of a radius.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Nondecreasing table on a radius grid starting at `(0, 0)`, linearly
/// interpolated. Beyond the last radius it evaluates to `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneTable {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl MonotoneTable {
    /// Builds the table, forcing the shape: a `(0, 0)` node is prepended when
    /// missing and values are replaced by their running maximum.
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(radii.len(), values.len());
        assert!(
            radii.windows(2).all(|w| w[0] < w[1]),
            "radius grid must be strictly increasing"
        );
        assert!(radii.first().is_none_or(|r| *r >= 0.0));
        let (mut radii, mut values) = (radii, values);
        if radii.first() != Some(&0.0) {
            radii.insert(0, 0.0);
            values.insert(0, 0.0);
        }
        values[0] = 0.0;
        let mut run = 0.0f64;
        for v in &mut values {
            run = run.max(*v);
            *v = run;
        }
        Self { radii, values }
    }

    /// Tabulates `f` on `radii` (then forces the shape).
    pub fn tabulate(radii: &[f64], f: impl Fn(f64) -> f64) -> Self {
        Self::new(radii.to_vec(), radii.iter().map(|&s| f(s)).collect())
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn eval(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        if s > self.max_radius() {
            return f64::INFINITY;
        }
        let k = self.radii.partition_point(|&r| r <= s);
        if k == 0 {
            return self.values[0];
        }
        if k >= self.radii.len() {
            return *self.values.last().unwrap();
        }
        let (r0, r1) = (self.radii[k - 1], self.radii[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (s - r0) / (r1 - r0)
    }
}

/// Class-𝒩 envelope: a table, a closed form, or the pointwise max of several.
#[derive(Clone)]
pub enum Envelope {
    Table(MonotoneTable),
    Analytic { label: String, f: ScalarFn },
    Max(Vec<Envelope>),
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Envelope::Table(t) => f.debug_tuple("Table").field(t).finish(),
            Envelope::Analytic { label, .. } => f.debug_tuple("Analytic").field(label).finish(),
            Envelope::Max(parts) => f.debug_tuple("Max").field(parts).finish(),
        }
    }
}

impl Envelope {
    pub fn analytic(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Envelope::Analytic {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn zero() -> Self {
        Self::analytic("0", |_| 0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Envelope::Table(t) => t.eval(s),
            Envelope::Analytic { f, .. } => f(s.max(0.0)),
            Envelope::Max(parts) => parts.iter().map(|e| e.eval(s)).fold(0.0, f64::max),
        }
    }

    /// Human-readable description for reports.
    pub fn describe(&self) -> String {
        match self {
            Envelope::Table(t) => format!(
                "table({} nodes on [0, {}])",
                t.radii().len(),
                t.max_radius()
            ),
            Envelope::Analytic { label, .. } => label.clone(),
            Envelope::Max(parts) => format!(
                "max({})",
                parts.iter().map(Envelope::describe).collect::<Vec<_>>().join(", ")
            ),
        }
    }
}

/// Solves `f(s) = target` for strictly increasing `f` with `f(0) = 0`.
pub fn invert_increasing(f: &dyn Fn(f64) -> f64, target: f64) -> Result<f64, CertifyError> {
    if !target.is_finite() || target < 0.0 {
        return Err(CertifyError::InversionFailure { target });
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut guard = 0;
    while f(hi) < target {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 2000 || !hi.is_finite() {
            return Err(CertifyError::InversionFailure { target });
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_shape_is_forced() {
        let t = MonotoneTable::new(vec![1.0, 2.0, 3.0], vec![2.0, 1.0, 5.0]);
        assert_eq!(t.radii(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(t.values(), &[0.0, 2.0, 2.0, 5.0]);
        assert_eq!(t.eval(0.0), 0.0);
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(2.5), 3.5);
        assert_eq!(t.eval(3.0), 5.0);
        assert_eq!(t.eval(3.1), f64::INFINITY);
    }

    #[test]
    fn inversion() {
        let a1 = |s: f64| s;
        assert_eq!(invert_increasing(&a1, 436.0).unwrap(), 436.0);
        let cube = |s: f64| s * s * s;
        assert!((invert_increasing(&cube, 27.0).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(
            invert_increasing(&a1, f64::INFINITY),
            Err(CertifyError::InversionFailure { .. })
        ));
        let bounded = |s: f64| s / (1.0 + s);
        assert!(matches!(
            invert_increasing(&bounded, 2.0),
            Err(CertifyError::InversionFailure { .. })
        ));
    }

    proptest! {
        #[test]
        fn tables_are_class_n(values in proptest::collection::vec(-5.0..50.0f64, 1..30)) {
            let radii: Vec<f64> = (1..=values.len()).map(|k| k as f64 * 0.5).collect();
            let t = MonotoneTable::new(radii.clone(), values);
            prop_assert_eq!(t.eval(0.0), 0.0);
            let mut prev = 0.0;
            for k in 0..=(radii.len() * 4) {
                let s = k as f64 * 0.125;
                let v = t.eval(s);
                prop_assert!(v >= prev);
                prev = v;
            }
        }
    }
}
