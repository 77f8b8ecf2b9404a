//! Second-order finite-difference stencils on the uniform plate grid.

/// First derivative: central differences inside, one-sided second-order
/// stencils at the ends.
pub fn gradient(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    debug_assert!(n >= 3);
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    out
}

/// Standard 3-point second derivative on interior nodes; the end entries are
/// left at zero (clamped rows never use them).
pub fn laplacian(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    debug_assert!(n >= 3);
    let h2 = h * h;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / h2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    #[test]
    fn gradient_exact_on_quadratic() {
        let g = Grid1D::new(41).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|&x| 3.0 * x * x - x + 2.0).collect();
        let d = gradient(&f, g.spacing());
        for (i, &x) in g.nodes().iter().enumerate() {
            assert!((d[i] - (6.0 * x - 1.0)).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn laplacian_second_order_on_cosine() {
        let errs: Vec<f64> = [65usize, 129]
            .iter()
            .map(|&n| {
                let g = Grid1D::new(n).unwrap();
                let f: Vec<f64> = g.nodes().iter().map(|&x| (1.5 * x).cos()).collect();
                let lap = laplacian(&f, g.spacing());
                (1..n - 1)
                    .map(|i| (lap[i] + 2.25 * (1.5 * g.node(i)).cos()).abs())
                    .fold(0.0f64, f64::max)
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
}
