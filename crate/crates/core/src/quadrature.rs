//! Gauss-Legendre rules at arbitrary precision.

use crate::num::{Precision, XReal};

/// Nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<XReal>,
    pub weights: Vec<XReal>,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: &XReal) -> (XReal, XReal) {
    let prec = x.precision();
    let mut p0 = XReal::one(prec);
    let mut p1 = x.clone();
    for k in 2..=n {
        let p2 = (x * &p1 * (2 * k as i32 - 1) - &p0 * (k as i32 - 1)) / k as i32;
        p0 = p1;
        p1 = p2;
    }
    let dp = (x * &p1 - &p0) * n as i32 / (x.square() - 1);
    (p1, dp)
}

impl GaussLegendre {
    pub fn new(n: usize, prec: Precision) -> Self {
        assert!(n >= 2, "need at least two nodes");
        let tol = prec.tolerance(0);
        let mut nodes = vec![XReal::zero(prec); n];
        let mut weights = vec![XReal::zero(prec); n];
        for i in 0..n.div_ceil(2) {
            let guess = ((i as f64 + 0.75) / (n as f64 + 0.5) * std::f64::consts::PI).cos();
            let mut x = XReal::from_f64(guess, prec);
            for _ in 0..100 {
                let (p, dp) = legendre(n, &x);
                let dx = p / &dp;
                x -= &dx;
                if dx.abs() < tol {
                    break;
                }
            }
            let (_, dp) = legendre(n, &x);
            let w = XReal::from_i32(2, prec) / ((XReal::one(prec) - x.square()) * dp.square());
            nodes[n - 1 - i] = x.clone();
            weights[n - 1 - i] = w.clone();
            nodes[i] = -x;
            weights[i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: &XReal, b: &XReal) -> impl Iterator<Item = (XReal, XReal)> + '_ {
        let half = (b - a) / 2;
        let mid = (a + b) / 2;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (&mid + &(&half * x), &half * w))
    }

    pub fn integrate<F: Fn(&XReal) -> XReal>(&self, a: &XReal, b: &XReal, f: F) -> XReal {
        let mut acc = XReal::zero(a.precision());
        for (x, w) in self.mapped(a, b) {
            acc += w * f(&x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let prec = Precision::DEFAULT;
        let gl = GaussLegendre::new(8, prec);
        let a = XReal::from_i32(-1, prec);
        let b = XReal::from_i32(2, prec);
        // integral of x^15 over [-1, 2] = (2^16 - 1)/16
        let v = gl.integrate(&a, &b, |x| x.powi(15));
        assert!((v - XReal::ratio(65535, 16, prec)).abs() < prec.tolerance(8));
    }

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        let prec = Precision::DEFAULT;
        let gl = GaussLegendre::new(64, prec);
        let sum = gl.weights.iter().fold(XReal::zero(prec), |s, w| s + w);
        assert!((sum - 2).abs() < prec.tolerance(5));
        for i in 0..32 {
            assert_eq!(gl.nodes[i], -&gl.nodes[63 - i]);
        }
        let e = gl.integrate(&XReal::zero(prec), &XReal::one(prec), |x| x.exp());
        let want = XReal::one(prec).exp() - 1;
        assert!((e - want).abs() < prec.tolerance(5));
    }
}
