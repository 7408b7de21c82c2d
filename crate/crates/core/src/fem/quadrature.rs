//! Quadrature rules on tetrahedra (in barycentric coordinates) and segments.

use crate::geometry::Point3;

/// A rule with weights summing to one (multiply by the element measure).
#[derive(Clone, Debug)]
pub struct TetRule {
    pub points: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

impl TetRule {
    /// Four-point rule, exact for polynomials of degree 2.
    pub fn degree2() -> Self {
        let a = 0.585_410_196_624_968_5;
        let b = 0.138_196_601_125_010_5;
        let points = vec![[a, b, b, b], [b, a, b, b], [b, b, a, b], [b, b, b, a]];
        Self { points, weights: vec![0.25; 4] }
    }

    /// Collapsed tensor Gauss-Legendre rule with `n^3` points, exact to degree `2n - 3`.
    pub fn collapsed_gauss(n: usize) -> Self {
        let (x, w) = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n * n);
        let mut weights = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (u, v, s) = (x[i], x[j], x[k]);
                    let l1 = u;
                    let l2 = (1.0 - u) * v;
                    let l3 = (1.0 - u) * (1.0 - v) * s;
                    points.push([1.0 - l1 - l2 - l3, l1, l2, l3]);
                    // Jacobian of the collapse, normalized by the reference volume 1/6.
                    weights.push(6.0 * w[i] * w[j] * w[k] * (1.0 - u).powi(2) * (1.0 - v));
                }
            }
        }
        Self { points, weights }
    }

    pub fn map(&self, p: &[Point3; 4], bary: &[f64; 4]) -> Point3 {
        p[0] * bary[0] + p[1] * bary[1] + p[2] * bary[2] + p[3] * bary[3]
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]` for `n` in 1..=5.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w): (Vec<f64>, Vec<f64>) = match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (0.6f64).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let s = (6.0f64 / 5.0).sqrt() * 2.0;
            let a = ((3.0 - s) / 7.0f64).sqrt();
            let b = ((3.0 + s) / 7.0f64).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        5 => {
            let r = (10.0f64 / 7.0).sqrt() * 2.0;
            let a = (5.0 - r).sqrt() / 3.0;
            let b = (5.0 + r).sqrt() / 3.0;
            let wa = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
            let wb = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
            (vec![-b, -a, 0.0, a, b], vec![wb, wa, 128.0 / 225.0, wa, wb])
        }
        _ => panic!("Gauss-Legendre rule with {n} points not tabulated"),
    };
    (x.iter().map(|t| 0.5 * (t + 1.0)).collect(), w.iter().map(|t| 0.5 * t).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Exact integral over the reference simplex of l0^a l1^b l2^c l3^d,
    // normalized by its volume: 3! a! b! c! d! / (a+b+c+d+3)!.
    fn monomial(e: [u32; 4]) -> f64 {
        let f = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        6.0 * e.iter().map(|&k| f(k)).product::<f64>() / f(e.iter().sum::<u32>() + 3)
    }

    fn integrate(rule: &TetRule, e: [u32; 4]) -> f64 {
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * (0..4).map(|i| p[i].powi(e[i] as i32)).product::<f64>())
            .sum()
    }

    #[test]
    fn degree2_rule_is_exact_for_quadratics() {
        let r = TetRule::degree2();
        for e in [[0, 0, 0, 0], [1, 0, 0, 0], [2, 0, 0, 0], [1, 1, 0, 0], [0, 1, 0, 1]] {
            assert!((integrate(&r, e) - monomial(e)).abs() < 1e-15, "{e:?}");
        }
    }

    #[test]
    fn collapsed_rule_is_exact_for_cubics() {
        let r = TetRule::collapsed_gauss(3);
        for e in [[0, 0, 0, 0], [2, 1, 0, 0], [0, 3, 0, 0], [1, 1, 1, 0], [0, 0, 0, 3], [1, 0, 1, 1]] {
            assert!((integrate(&r, e) - monomial(e)).abs() < 1e-14, "{e:?}");
        }
    }

    #[test]
    fn gauss_weights_sum_to_one() {
        for n in 1..=5 {
            let (_, w) = gauss_legendre_unit(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}
