//! Small dense-vector helpers. States are short `f64` slices.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `count` evenly spaced nodes on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count)
                .map(|k| if k + 1 == count { hi } else { lo + step * k as f64 })
                .collect()
        }
    }
}

/// Cartesian product of per-axis node lists, last axis fastest.
pub fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(axes.len())];
    for nodes in axes {
        let mut next = Vec::with_capacity(out.len() * nodes.len());
        for prefix in &out {
            for &v in nodes {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_hits_endpoints() {
        let v = linspace(-20.0, 20.0, 201);
        assert_eq!(v.len(), 201);
        assert_eq!(v[0], -20.0);
        assert_eq!(v[200], 20.0);
        assert!((v[120] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cartesian_counts() {
        let g = cartesian(&[vec![0.0, 1.0], vec![2.0, 3.0, 4.0]]);
        assert_eq!(g.len(), 6);
        assert_eq!(g[4], vec![1.0, 3.0]);
        assert_eq!(cartesian(&[]), vec![Vec::<f64>::new()]);
    }
}
