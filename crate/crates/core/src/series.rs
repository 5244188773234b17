//! Truncated power series with extended-precision coefficients.

use crate::error::{Error, Result};
use crate::num::{Precision, XReal};

/// `c_0 + c_1 x + ... + c_K x^K + O(x^{K+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSeries {
    coeffs: Vec<XReal>,
    prec: Precision,
}

impl TaylorSeries {
    /// Series of order `coeffs.len() - 1`. An empty list is the zero series of order 0.
    pub fn new(mut coeffs: Vec<XReal>, prec: Precision) -> Self {
        if coeffs.is_empty() {
            coeffs.push(XReal::zero(prec));
        }
        TaylorSeries { coeffs, prec }
    }

    /// Pads or truncates `coeffs` to exactly `order + 1` terms.
    pub fn with_order(mut coeffs: Vec<XReal>, order: usize, prec: Precision) -> Self {
        coeffs.resize(order + 1, XReal::zero(prec));
        TaylorSeries { coeffs, prec }
    }

    pub fn from_f64(coeffs: &[f64], prec: Precision) -> Self {
        Self::new(coeffs.iter().map(|&c| XReal::from_f64(c, prec)).collect(), prec)
    }

    pub fn zero(order: usize, prec: Precision) -> Self {
        Self::with_order(Vec::new(), order, prec)
    }

    pub fn constant(c: XReal, order: usize, prec: Precision) -> Self {
        Self::with_order(vec![c], order, prec)
    }

    /// The series `x`.
    pub fn identity(order: usize, prec: Precision) -> Self {
        let mut s = Self::zero(order, prec);
        if order >= 1 {
            s.coeffs[1] = XReal::one(prec);
        }
        s
    }

    /// `sum x^n / n!`.
    pub fn exp_x(order: usize, prec: Precision) -> Self {
        let mut c = Vec::with_capacity(order + 1);
        let mut t = XReal::one(prec);
        for n in 0..=order {
            if n > 0 {
                t = t / n as i32;
            }
            c.push(t.clone());
        }
        Self::new(c, prec)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn coeffs(&self) -> &[XReal] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<XReal> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> XReal {
        self.coeffs.get(n).cloned().unwrap_or_else(|| XReal::zero(self.prec))
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::with_order(self.coeffs.clone(), order, self.prec)
    }

    fn joint(&self, other: &Self) -> (usize, Precision) {
        (self.order().min(other.order()), self.prec.max(other.prec))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (k, prec) = self.joint(other);
        let c = (0..=k).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect();
        Self::new(c, prec)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (k, prec) = self.joint(other);
        let c = (0..=k).map(|i| &self.coeffs[i] - &other.coeffs[i]).collect();
        Self::new(c, prec)
    }

    /// Cauchy product truncated to the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let (k, prec) = self.joint(other);
        let c = (0..=k)
            .map(|n| {
                let mut acc = XReal::zero(prec);
                for i in 0..=n {
                    acc += &self.coeffs[i] * &other.coeffs[n - i];
                }
                acc
            })
            .collect();
        Self::new(c, prec)
    }

    pub fn scale(&self, k: &XReal) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect(), self.prec)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect(), self.prec)
    }

    /// Term-by-term derivative; the order drops by one (floored at 0).
    pub fn derivative(&self) -> Self {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| c * n as i32)
            .collect();
        Self::new(c, self.prec)
    }

    /// Substitutes `x -> k x`.
    pub fn dilate(&self, k: &XReal) -> Self {
        let mut pw = XReal::one(self.prec);
        let mut c = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            c.push(a * &pw);
            pw = &pw * k;
        }
        Self::new(c, self.prec)
    }

    pub fn eval(&self, x: &XReal) -> XReal {
        let mut acc = XReal::zero(self.prec);
        for c in self.coeffs.iter().rev() {
            acc = &acc * x + c;
        }
        acc
    }

    pub fn exp(&self) -> Self {
        let k = self.order();
        let mut e = Vec::with_capacity(k + 1);
        e.push(self.coeffs[0].exp());
        for n in 1..=k {
            let mut acc = XReal::zero(self.prec);
            for j in 1..=n {
                acc += (&self.coeffs[j] * j as i32) * &e[n - j];
            }
            e.push(acc / n as i32);
        }
        Self::new(e, self.prec)
    }

    pub fn log(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if !c0.is_positive() {
            return Err(Error::NonPositiveConstantTerm(c0.to_f64()));
        }
        let k = self.order();
        let mut l = Vec::with_capacity(k + 1);
        l.push(c0.ln());
        for n in 1..=k {
            let mut acc = XReal::zero(self.prec);
            for j in 1..n {
                acc += (&l[j] * j as i32) * &self.coeffs[n - j];
            }
            let ln = (&self.coeffs[n] - acc / n as i32) / c0;
            l.push(ln);
        }
        Ok(Self::new(l, self.prec))
    }

    /// `self(inner(x))`; `inner` must vanish at 0.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::NonzeroInnerConstant(inner.coeffs[0].to_f64()));
        }
        let (k, prec) = self.joint(inner);
        let inner = inner.truncate(k);
        let mut acc = Self::zero(k, prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&inner);
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }

    pub fn max_abs_diff(&self, other: &Self) -> XReal {
        let (k, prec) = self.joint(other);
        let mut m = XReal::zero(prec);
        for i in 0..=k {
            let d = (&self.coeffs[i] - &other.coeffs[i]).abs();
            if d > m {
                m = d;
            }
        }
        m
    }
}

/// Dense polynomial helpers on coefficient lists, lowest degree first.
pub mod poly {
    use crate::num::{Precision, XReal};

    pub fn add(a: &[XReal], b: &[XReal], prec: Precision) -> Vec<XReal> {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| match (a.get(i), b.get(i)) {
                (Some(x), Some(y)) => x + y,
                (Some(x), None) | (None, Some(x)) => x.clone(),
                (None, None) => XReal::zero(prec),
            })
            .collect()
    }

    pub fn mul(a: &[XReal], b: &[XReal], prec: Precision) -> Vec<XReal> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![XReal::zero(prec); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    pub fn scale(a: &[XReal], k: &XReal) -> Vec<XReal> {
        a.iter().map(|c| c * k).collect()
    }

    pub fn eval(a: &[XReal], x: &XReal, prec: Precision) -> XReal {
        let mut acc = XReal::zero(prec);
        for c in a.iter().rev() {
            acc = &acc * x + c;
        }
        acc
    }

    /// Degree ignoring exact-zero trailing coefficients; `None` for the zero polynomial.
    pub fn degree(a: &[XReal]) -> Option<usize> {
        a.iter().rposition(|c| !c.is_zero())
    }
}

/// Power series in `a` whose coefficients are polynomials in `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiSeries {
    coeffs: Vec<Vec<XReal>>,
    prec: Precision,
}

impl BiSeries {
    pub fn new(mut coeffs: Vec<Vec<XReal>>, prec: Precision) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Vec::new());
        }
        BiSeries { coeffs, prec }
    }

    /// `f(a) + k a b` for a scalar series `f`.
    pub fn from_series_plus_ab(f: &TaylorSeries, k: &XReal) -> Self {
        let prec = f.precision();
        let mut coeffs: Vec<Vec<XReal>> = f.coeffs().iter().map(|c| vec![c.clone()]).collect();
        if coeffs.len() > 1 {
            coeffs[1] = vec![coeffs[1][0].clone(), k.clone()];
        }
        BiSeries { coeffs, prec }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Polynomial in `b` multiplying `a^m`.
    pub fn coeff(&self, m: usize) -> &[XReal] {
        &self.coeffs[m]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        let prec = self.prec.max(other.prec);
        let coeffs = (0..=k)
            .map(|n| {
                let mut acc = Vec::new();
                for i in 0..=n {
                    acc = poly::add(&acc, &poly::mul(&self.coeffs[i], &other.coeffs[n - i], prec), prec);
                }
                acc
            })
            .collect();
        Self::new(coeffs, prec)
    }

    /// Exponential by the `(exp f)' = f' exp f` recurrence. The `a^0`
    /// coefficient must be a constant polynomial.
    pub fn exp(&self) -> Self {
        let prec = self.prec;
        let c0 = self.coeffs[0].first().cloned().unwrap_or_else(|| XReal::zero(prec));
        debug_assert!(poly::degree(&self.coeffs[0]).unwrap_or(0) == 0);
        let k = self.order();
        let mut e: Vec<Vec<XReal>> = Vec::with_capacity(k + 1);
        e.push(vec![c0.exp()]);
        for n in 1..=k {
            let mut acc = Vec::new();
            for j in 1..=n {
                let fj = poly::scale(&self.coeffs[j], &XReal::from_usize(j, prec));
                acc = poly::add(&acc, &poly::mul(&fj, &e[n - j], prec), prec);
            }
            let inv = XReal::one(prec) / n as i32;
            e.push(poly::scale(&acc, &inv));
        }
        Self::new(e, prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> Precision {
        Precision::DEFAULT
    }

    fn close(a: &TaylorSeries, b: &TaylorSeries, slack: u32) -> bool {
        a.max_abs_diff(b) < p().tolerance(slack)
    }

    #[test]
    fn difference_of_squares() {
        let a = TaylorSeries::from_f64(&[1.0, 1.0, 0.0], p());
        let b = TaylorSeries::from_f64(&[1.0, -1.0, 0.0], p());
        assert_eq!(a.mul(&b), TaylorSeries::from_f64(&[1.0, 0.0, -1.0], p()));
    }

    #[test]
    fn scale_monomial() {
        let s = TaylorSeries::from_f64(&[0.0, 0.0, 1.0], p());
        let t = s.scale(&XReal::from_i32(3, p()));
        assert_eq!(t, TaylorSeries::from_f64(&[0.0, 0.0, 3.0], p()));
    }

    #[test]
    fn exp_times_exp_neg_is_one() {
        let e = TaylorSeries::exp_x(6, p());
        let en = e.dilate(&XReal::from_i32(-1, p()));
        let one = TaylorSeries::constant(XReal::one(p()), 6, p());
        assert!(close(&e.mul(&en), &one, 5));
    }

    #[test]
    fn mul_truncates_to_min_order() {
        let a = TaylorSeries::from_f64(&[1.0, 2.0, 3.0, 4.0], p());
        let b = TaylorSeries::from_f64(&[1.0, 1.0], p());
        assert_eq!(a.mul(&b).order(), 1);
        assert_eq!(a.add(&b).order(), 1);
    }

    #[test]
    fn exp_of_zero_and_x() {
        let z = TaylorSeries::zero(4, p()).exp();
        assert_eq!(z, TaylorSeries::constant(XReal::one(p()), 4, p()));
        let ex = TaylorSeries::identity(4, p()).exp();
        let want = TaylorSeries::new(
            vec![
                XReal::one(p()),
                XReal::one(p()),
                XReal::ratio(1, 2, p()),
                XReal::ratio(1, 6, p()),
                XReal::ratio(1, 24, p()),
            ],
            p(),
        );
        assert!(close(&ex, &want, 5));
    }

    #[test]
    fn exp_log_one_plus_x() {
        let s = TaylorSeries::from_f64(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0], p());
        let r = s.log().unwrap().exp();
        assert!(close(&r, &s, 5));
    }

    #[test]
    fn log_of_e() {
        let e = XReal::one(p()).exp();
        let s = TaylorSeries::constant(e, 3, p());
        let l = s.log().unwrap();
        assert!(close(&l, &TaylorSeries::constant(XReal::one(p()), 3, p()), 5));
    }

    #[test]
    fn log_exp_round_trip() {
        let f = TaylorSeries::from_f64(&[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0], p());
        assert!(close(&f.exp().log().unwrap(), &f, 5));
    }

    #[test]
    fn log_rejects_nonpositive_constant() {
        let s = TaylorSeries::from_f64(&[-1.0, 1.0], p());
        assert!(matches!(s.log(), Err(Error::NonPositiveConstantTerm(_))));
        let z = TaylorSeries::from_f64(&[0.0, 1.0], p());
        assert!(z.log().is_err());
    }

    #[test]
    fn compose_linear() {
        let f = TaylorSeries::from_f64(&[1.0, 1.0, 0.0], p());
        let g = TaylorSeries::from_f64(&[0.0, 2.0, 0.0], p());
        assert_eq!(f.compose(&g).unwrap(), TaylorSeries::from_f64(&[1.0, 2.0, 0.0], p()));
    }

    #[test]
    fn compose_exp_of_2x() {
        let f = TaylorSeries::exp_x(3, p());
        let g = TaylorSeries::from_f64(&[0.0, 2.0, 0.0, 0.0], p());
        let want = TaylorSeries::new(
            vec![
                XReal::one(p()),
                XReal::from_i32(2, p()),
                XReal::from_i32(2, p()),
                XReal::ratio(4, 3, p()),
            ],
            p(),
        );
        assert!(close(&f.compose(&g).unwrap(), &want, 5));
    }

    #[test]
    fn cosh_composed_with_identity() {
        let ex = TaylorSeries::exp_x(8, p());
        let cosh = ex.add(&ex.dilate(&XReal::from_i32(-1, p()))).scale(&XReal::ratio(1, 2, p()));
        let c = cosh.compose(&TaylorSeries::identity(8, p())).unwrap();
        let mut fact = 1.0f64;
        for n in 0..=8usize {
            if n > 0 {
                fact *= n as f64;
            }
            let want = if n % 2 == 0 { 1.0 / fact } else { 0.0 };
            assert!((c.coeff(n).to_f64() - want).abs() < 1e-30);
        }
    }

    #[test]
    fn compose_rejects_nonzero_inner_constant() {
        let f = TaylorSeries::exp_x(3, p());
        let g = TaylorSeries::from_f64(&[1.0, 1.0, 0.0, 0.0], p());
        assert!(matches!(f.compose(&g), Err(Error::NonzeroInnerConstant(_))));
    }

    #[test]
    fn biseries_exp_is_triangular() {
        let prec = p();
        let f = TaylorSeries::from_f64(&[0.0, 0.5, -0.25, 0.125, 0.0, 0.0, 0.0], prec);
        let bi = BiSeries::from_series_plus_ab(&f, &XReal::from_i32(-16, prec)).exp();
        for m in 0..=6 {
            assert_eq!(poly::degree(bi.coeff(m)), Some(m));
        }
    }

    #[test]
    fn biseries_exp_matches_scalar_exp_at_fixed_b() {
        let prec = p();
        let f = TaylorSeries::from_f64(&[0.0, 0.5, -0.25, 0.125, 0.3], prec);
        let k = XReal::from_f64(1.5, prec);
        let b = XReal::from_f64(-0.75, prec);
        let bi = BiSeries::from_series_plus_ab(&f, &k).exp();
        let mut g = f.clone();
        let shifted = &g.coeff(1) + &(&k * &b);
        g.coeffs[1] = shifted;
        let scalar = g.exp();
        for m in 0..=4 {
            let v = poly::eval(bi.coeff(m), &b, prec);
            assert!((&v - &scalar.coeff(m)).abs() < prec.tolerance(5));
        }
    }

    fn small_series(k: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, k + 1)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn log_inverts_exp(c in small_series(10)) {
            let f = TaylorSeries::from_f64(&c, p());
            let back = f.exp().log().unwrap();
            prop_assert!(close(&back, &f, 5));
        }

        #[test]
        fn cauchy_product_commutes_and_associates(a in small_series(8), b in small_series(8), c in small_series(8)) {
            let (a, b, c) = (
                TaylorSeries::from_f64(&a, p()),
                TaylorSeries::from_f64(&b, p()),
                TaylorSeries::from_f64(&c, p()),
            );
            prop_assert!(close(&a.mul(&b), &b.mul(&a), 5));
            prop_assert!(close(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c)), 5));
        }
    }
}
