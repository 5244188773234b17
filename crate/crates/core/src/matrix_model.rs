//! Matrix-model potential `V(A)` and the averaged characteristic polynomial `Q_N(b)`.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::{Precision, XComplex, XReal};
use crate::scaling::ModelParams;
use crate::series::{BiSeries, TaylorSeries};

/// Default upper limit on `N` accepted by the front ends.
pub const DEFAULT_MAX_N: usize = 64;

/// `V(A) = sum_{k=1}^p v_k (A^k/k - 1/k)`, so `V(1) = 0`. `v[k-1]` holds `v_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialV {
    pub p: usize,
    pub v: Vec<XReal>,
}

impl PotentialV {
    pub fn new(v: Vec<XReal>) -> Self {
        PotentialV { p: v.len(), v }
    }

    /// `-(A - 1)^2 / 4`, whose `Q_N` is the scaled Hermite polynomial.
    pub fn hermite(prec: Precision) -> Self {
        PotentialV::new(vec![XReal::ratio(1, 2, prec), XReal::ratio(-1, 2, prec)])
    }

    pub fn precision(&self) -> Precision {
        self.v.first().map(XReal::precision).unwrap_or_default()
    }

    /// Monomial coefficients `c_0..c_p` of `V(A)`.
    pub fn monomial_coeffs(&self) -> Vec<XReal> {
        let prec = self.precision();
        let mut c = vec![XReal::zero(prec); self.p + 1];
        for (i, vk) in self.v.iter().enumerate() {
            let t = vk / (i as i32 + 1);
            c[0] -= &t;
            c[i + 1] = t;
        }
        c
    }

    pub fn value(&self, a: &XReal) -> XReal {
        let c = self.monomial_coeffs();
        let mut acc = XReal::zero(self.precision());
        for ck in c.iter().rev() {
            acc = &acc * a + ck;
        }
        acc
    }

    /// Coefficients of `V'(A) = sum_k v_k A^{k-1}`, lowest first.
    pub fn derivative_coeffs(&self) -> &[XReal] {
        &self.v
    }

    /// `V(1 + x)` as a series in `x` of the given order, by binomial expansion.
    pub fn shifted_series(&self, order: usize) -> TaylorSeries {
        let prec = self.precision();
        let mut c = vec![XReal::zero(prec); order + 1];
        for (i, vk) in self.v.iter().enumerate() {
            let k = i + 1;
            let w = vk / k as i32;
            let mut binom = XReal::one(prec);
            for j in 1..=k.min(order) {
                binom = binom * (k + 1 - j) as i32 / j as i32;
                c[j] += &w * &binom;
            }
        }
        TaylorSeries::new(c, prec)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.v.iter().map(XReal::to_f64).collect()
    }
}

/// `V = V_p + sum_k s_k eps^{p-k} V_k` with `V_n(A) = -sum_{k=1}^n (A^k/k - 1/k)`.
pub fn build_potential(params: &ModelParams) -> PotentialV {
    let prec = params.precision();
    let p = params.p;
    let mut v = vec![XReal::from_i32(-1, prec); p];
    for (i, sk) in params.s.iter().enumerate() {
        let k = i + 1;
        if sk.is_zero() || k >= p {
            continue;
        }
        let w = sk * &params.epsilon.powi((p - k) as i32);
        for vj in v.iter_mut().take(k) {
            *vj -= &w;
        }
    }
    PotentialV::new(v)
}

/// Real polynomial `q_0 + q_1 b + ... + q_N b^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharPolynomial {
    coeffs: Vec<XReal>,
    prec: Precision,
}

impl CharPolynomial {
    pub fn new(coeffs: Vec<XReal>, prec: Precision) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        CharPolynomial { coeffs, prec }
    }

    pub fn from_f64(coeffs: &[f64], prec: Precision) -> Self {
        Self::new(coeffs.iter().map(|&c| XReal::from_f64(c, prec)).collect(), prec)
    }

    /// `lead * prod (b - r)` for real roots.
    pub fn from_real_roots(roots: &[XReal], lead: &XReal) -> Self {
        let prec = lead.precision();
        let mut c = vec![lead.clone()];
        for r in roots {
            let mut next = vec![XReal::zero(prec); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        Self::new(c, prec)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn coeffs(&self) -> &[XReal] {
        &self.coeffs
    }

    /// Coefficient of `b^k`.
    pub fn coeff(&self, k: usize) -> &XReal {
        &self.coeffs[k]
    }

    pub fn leading(&self) -> &XReal {
        &self.coeffs[self.degree()]
    }

    /// Coefficients from the highest power down, as printed in tables.
    pub fn descending_f64(&self) -> Vec<f64> {
        self.coeffs.iter().rev().map(XReal::to_f64).collect()
    }

    pub fn scale(&self, k: &XReal) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect(), self.prec)
    }

    pub fn eval(&self, b: &XReal) -> XReal {
        let mut acc = XReal::zero(self.prec);
        for c in self.coeffs.iter().rev() {
            acc = &acc * b + c;
        }
        acc
    }

    pub fn eval_complex(&self, z: &XComplex) -> XComplex {
        let mut acc = XComplex::zero(self.prec);
        for c in self.coeffs.iter().rev() {
            acc = &acc * z;
            acc.re += c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::new(vec![XReal::zero(self.prec)], self.prec);
        }
        let c = self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * k as i32).collect();
        Self::new(c, self.prec)
    }

    /// `Q(b + c)`.
    pub fn shift(&self, c: &XReal) -> Self {
        let n = self.degree();
        let mut out = vec![XReal::zero(self.prec); n + 1];
        // Horner in the polynomial ring: out <- out * (b + c) + q.
        for q in self.coeffs.iter().rev() {
            for i in (1..=n).rev() {
                out[i] = &out[i] * c + &out[i - 1];
            }
            out[0] = &out[0] * c + q;
        }
        Self::new(out, self.prec)
    }

    /// Largest relative coefficient mismatch, scaled by the largest coefficient magnitude.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        let n = self.degree().max(other.degree());
        let zero = XReal::zero(self.prec);
        let mut scale = XReal::zero(self.prec);
        let mut worst = XReal::zero(self.prec);
        for k in 0..=n {
            let a = self.coeffs.get(k).unwrap_or(&zero);
            let b = other.coeffs.get(k).unwrap_or(&zero);
            scale = XReal::max_of(&scale, &a.abs());
            worst = XReal::max_of(&worst, &(a - b).abs());
        }
        if scale.is_zero() {
            return worst.to_f64();
        }
        (worst / scale).to_f64()
    }

    /// Largest coefficientwise relative error `|a_k - b_k| / |b_k|` over nonzero `b_k`.
    pub fn max_coeff_rel_err(&self, reference: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.coeffs.iter().zip(&reference.coeffs) {
            if b.is_zero() {
                continue;
            }
            worst = worst.max(((a - b).abs() / b.abs()).to_f64());
        }
        worst
    }
}

impl Serialize for CharPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CharPolynomial", 3)?;
        st.serialize_field("N", &self.degree())?;
        st.serialize_field("precision_digits", &self.prec.digits())?;
        st.serialize_field("coeffs", &self.coeffs)?;
        st.end()
    }
}

impl CharPolynomial {
    /// Parses the JSON form `{N, precision_digits, coeffs}`.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let digits = v
            .get("precision_digits")
            .and_then(|d| d.as_u64())
            .ok_or_else(|| Error::Config("missing precision_digits".into()))?;
        let prec = Precision::new(digits as u32)?;
        let coeffs = v
            .get("coeffs")
            .and_then(|c| c.as_array())
            .ok_or_else(|| Error::Config("missing coeffs".into()))?
            .iter()
            .map(|c| match c {
                serde_json::Value::String(s) => XReal::parse(s, prec),
                serde_json::Value::Number(n) => XReal::parse(&n.to_string(), prec),
                _ => Err(Error::Config("coefficient must be a string or number".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        if coeffs.is_empty() {
            return Err(Error::DegeneratePolynomial);
        }
        if let Some(n) = v.get("N").and_then(|n| n.as_u64()) {
            if n as usize + 1 != coeffs.len() {
                return Err(Error::Config(format!("N = {n} but {} coefficients", coeffs.len())));
            }
        }
        Ok(Self::new(coeffs, prec))
    }
}

/// `Q_0 .. Q_N` from `(g d/da)^n exp((V(1+a) - a b)/g)` at `a = 0`.
pub fn q_sequence(g: &XReal, v: &PotentialV, n: usize) -> Vec<CharPolynomial> {
    let prec = g.precision().max(v.precision());
    let exponent = v.shifted_series(n.max(1)).scale(&g.recip());
    let bi = BiSeries::from_series_plus_ab(&exponent, &-g.recip()).exp();
    let mut out = Vec::with_capacity(n + 1);
    let mut factor = XReal::one(prec);
    for m in 0..=n {
        if m > 0 {
            factor = factor * g * m as i32;
        }
        let mut c: Vec<XReal> = bi.coeff(m).iter().map(|x| x * &factor).collect();
        c.resize(m + 1, XReal::zero(prec));
        out.push(CharPolynomial::new(c, prec));
    }
    out
}

/// `Q_N(b)` by series extraction of the derivative formula.
pub fn q_polynomial(params: &ModelParams, v: &PotentialV, n: usize) -> CharPolynomial {
    q_sequence(&params.g, v, n).pop().expect("sequence has N+1 entries")
}

/// `Q_N(y) = N! [t^N] exp(V(1 + g t)/g - y t)`, an independent construction.
pub fn q_polynomial_gf(params: &ModelParams, v: &PotentialV, n: usize) -> CharPolynomial {
    let g = &params.g;
    let prec = g.precision().max(v.precision());
    let order = n.max(1);
    let mono = v.monomial_coeffs();
    let inner = TaylorSeries::with_order(vec![XReal::one(prec), g.clone()], order, prec);
    let mut comp = TaylorSeries::zero(order, prec);
    for c in mono.iter().rev() {
        comp = comp.mul(&inner);
        let c0 = &comp.coeff(0) + c;
        let mut cs = comp.into_coeffs();
        cs[0] = c0;
        comp = TaylorSeries::new(cs, prec);
    }
    let e = comp.scale(&g.recip()).exp();
    // N! sum_m e_m (-y)^{N-m} / (N-m)!
    let mut coeffs = vec![XReal::zero(prec); n + 1];
    let mut fact = vec![XReal::one(prec)];
    for k in 1..=n {
        let next = &fact[k - 1] * k as i32;
        fact.push(next);
    }
    for m in 0..=n {
        let d = n - m;
        let mut term = &e.coeff(m) * &fact[n] / &fact[d];
        if d % 2 == 1 {
            term = -term;
        }
        coeffs[d] += term;
    }
    CharPolynomial::new(coeffs, prec)
}

/// `(g/4)^{N/2} H_N(b / sqrt g)`, monic in `b`.
pub fn hermite_q(n: usize, g: &XReal) -> CharPolynomial {
    let prec = g.precision();
    let mut coeffs = vec![XReal::zero(prec); n + 1];
    let quarter = g / 4;
    let mut term = XReal::one(prec);
    coeffs[n] = term.clone();
    for m in 1..=n / 2 {
        // ratio of consecutive terms: -(N-2m+2)(N-2m+1)/m * (g/4)
        let num = ((n - 2 * m + 2) * (n - 2 * m + 1)) as i64;
        term = -(term * &quarter * &XReal::ratio(num, m as i64, prec));
        coeffs[n - 2 * m] = term.clone();
    }
    CharPolynomial::new(coeffs, prec)
}

/// Lower-Hessenberg matrix of multiplication by `b` in the monic basis
/// `P_n = (-1)^n Q_n`, with ones on the superdiagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct HessenbergMatrix {
    rows: Vec<Vec<XReal>>,
}

impl HessenbergMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &XReal {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<XReal>] {
        &self.rows
    }

    pub fn is_tridiagonal(&self, tol: &XReal) -> bool {
        (0..self.dim()).all(|i| (0..i.saturating_sub(1)).all(|j| self.rows[i][j].abs() <= *tol))
    }

    /// `det(b I - J)` by Gaussian elimination with partial pivoting.
    pub fn det_shifted(&self, b: &XReal) -> XReal {
        let n = self.dim();
        let prec = b.precision();
        if n == 0 {
            return XReal::one(prec);
        }
        let mut m: Vec<Vec<XReal>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let e = -&self.rows[i][j];
                        if i == j {
                            e + b
                        } else {
                            e
                        }
                    })
                    .collect()
            })
            .collect();
        let mut det = XReal::one(prec);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs()))
                .expect("nonempty range");
            if m[piv][col].is_zero() {
                return XReal::zero(prec);
            }
            if piv != col {
                m.swap(piv, col);
                det = -det;
            }
            det = det * &m[col][col];
            for r in col + 1..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let f = &m[r][col] / &m[col][col];
                for c in col..n {
                    let t = &f * &m[col][c];
                    m[r][c] -= t;
                }
            }
        }
        det
    }

    /// Characteristic polynomial `det(b I - J)` by the Hessenberg recurrence.
    pub fn charpoly(&self) -> CharPolynomial {
        let n = self.dim();
        let prec = self.rows.first().and_then(|r| r.first()).map(XReal::precision).unwrap_or_default();
        let mut ps: Vec<Vec<XReal>> = vec![vec![XReal::one(prec)]];
        for k in 0..n {
            let mut next = vec![XReal::zero(prec); k + 2];
            for (i, c) in ps[k].iter().enumerate() {
                next[i + 1] += c;
            }
            for m in 0..=k {
                let h = &self.rows[k][m];
                if h.is_zero() {
                    continue;
                }
                for (i, c) in ps[m].iter().enumerate() {
                    next[i] -= h * c;
                }
            }
            ps.push(next);
        }
        CharPolynomial::new(ps.pop().expect("nonempty"), prec)
    }
}

/// Builds the `N x N` Jacobi matrix from `Q_0 .. Q_N`.
pub fn jacobi_matrix(params: &ModelParams, v: &PotentialV, n: usize) -> Result<HessenbergMatrix> {
    let qs = q_sequence(&params.g, v, n);
    jacobi_from_sequence(&qs)
}

pub fn jacobi_from_sequence(qs: &[CharPolynomial]) -> Result<HessenbergMatrix> {
    let n = qs.len().saturating_sub(1);
    let mut monic = Vec::with_capacity(qs.len());
    for (k, q) in qs.iter().enumerate() {
        if q.degree() < k || q.leading().is_zero() {
            return Err(Error::DegenerateBasis(k));
        }
        let lead_inv = q.leading().recip();
        monic.push(q.scale(&lead_inv));
    }
    let prec = qs[0].precision();
    let mut rows = vec![vec![XReal::zero(prec); n]; n];
    for k in 0..n {
        // r = b P_k - P_{k+1}, degree <= k
        let mut r = vec![XReal::zero(prec); k + 2];
        for (i, c) in monic[k].coeffs().iter().enumerate() {
            r[i + 1] += c;
        }
        for (i, c) in monic[k + 1].coeffs().iter().enumerate() {
            r[i] -= c;
        }
        for m in (0..=k).rev() {
            let j = r[m].clone();
            if !j.is_zero() {
                for (i, c) in monic[m].coeffs().iter().enumerate() {
                    r[i] -= &j * c;
                }
            }
            rows[k][m] = j;
        }
        if k + 1 < n {
            rows[k][k + 1] = XReal::one(prec);
        }
    }
    Ok(HessenbergMatrix { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::{double_scaling, GMode};
    use proptest::prelude::*;

    fn p() -> Precision {
        Precision::DEFAULT
    }

    fn sixteenth() -> ModelParams {
        double_scaling(2, 16, &[], GMode::Fixed(XReal::ratio(1, 16, p())), p()).unwrap()
    }

    #[test]
    fn potential_vanishes_at_identity() {
        let params = double_scaling(7, 16, &[XReal::from_f64(8.1, p()), XReal::zero(p()), XReal::from_f64(4.4, p())], GMode::Corrected, p()).unwrap();
        let v = build_potential(&params);
        assert!(v.value(&XReal::one(p())).abs() < p().tolerance(5));
        assert!(PotentialV::hermite(p()).value(&XReal::one(p())).is_zero());
    }

    #[test]
    fn bare_p2_block() {
        let params = double_scaling(2, 16, &[], GMode::Plain, p()).unwrap();
        let v = build_potential(&params);
        assert_eq!(v.to_f64(), vec![-1.0, -1.0]);
        let a = XReal::from_f64(0.3, p());
        let want = -(&a - 1) - (a.square() / 2 - XReal::ratio(1, 2, p()));
        assert!((v.value(&a) - want).abs() < p().tolerance(5));
    }

    #[test]
    fn shifted_series_matches_point_values() {
        let v = PotentialV::new(vec![XReal::from_f64(-1.3, p()), XReal::from_f64(0.7, p()), XReal::from_f64(-2.0, p())]);
        let x = XReal::from_f64(0.21, p());
        let s = v.shifted_series(3);
        assert!((s.eval(&x) - v.value(&(&x + 1))).abs() < p().tolerance(5));
    }

    #[test]
    fn q0_is_one() {
        let params = sixteenth();
        let v = build_potential(&params);
        let q = q_polynomial(&params, &v, 0);
        assert_eq!(q.degree(), 0);
        assert!((q.coeff(0) - 1).abs() < p().tolerance(3));
        assert!((q_polynomial_gf(&params, &v, 0).coeff(0) - 1).abs() < p().tolerance(3));
    }

    #[test]
    fn hermite_closed_form_small_cases() {
        let g = XReal::ratio(1, 16, p());
        let h1 = hermite_q(1, &g);
        assert!(h1.coeff(0).is_zero());
        assert!((h1.coeff(1) - 1).abs() < p().tolerance(3));
        let h16 = hermite_q(16, &g);
        assert!((h16.coeff(14).to_f64() + 3.75).abs() < 1e-12);
        assert!(((h16.coeff(0).to_f64() - 1.84357e-6) / 1.84357e-6).abs() < 1e-5);
    }

    #[test]
    fn hermite_potential_reproduces_closed_form() {
        let params = sixteenth();
        let v = PotentialV::hermite(p());
        for n in 0..=16 {
            let q = q_polynomial(&params, &v, n);
            let h = hermite_q(n, &params.g);
            let sign = if n % 2 == 0 { XReal::one(p()) } else { XReal::from_i32(-1, p()) };
            assert!(q.rel_diff(&h.scale(&sign)) < 1e-50, "N = {n}");
        }
    }

    #[test]
    fn bare_p2_block_is_affine_hermite() {
        let params = sixteenth();
        let v = build_potential(&params);
        let q = q_polynomial(&params, &v, 10);
        let h = hermite_q(10, &(&params.g * 2)).shift(&XReal::from_i32(2, p()));
        assert!(q.rel_diff(&h) < 1e-50);
    }

    #[test]
    fn leading_coefficient_is_signed_one() {
        let params = double_scaling(5, 7, &[XReal::from_f64(1.5, p()), XReal::from_f64(-0.5, p())], GMode::Corrected, p()).unwrap();
        let v = build_potential(&params);
        for n in 0..=7 {
            let q = q_polynomial(&params, &v, n);
            let want = if n % 2 == 0 { 1 } else { -1 };
            assert!((q.leading() - want).abs() < p().tolerance(5));
        }
    }

    #[test]
    fn jacobi_of_linear_and_hermite() {
        let params = sixteenth();
        let v = PotentialV::hermite(p());
        let j1 = jacobi_matrix(&params, &v, 1).unwrap();
        let q1 = q_polynomial(&params, &v, 1);
        assert!((j1.get(0, 0) + &(q1.coeff(0) / q1.coeff(1))).abs() < p().tolerance(5));
        let j = jacobi_matrix(&params, &v, 16).unwrap();
        assert!(j.is_tridiagonal(&p().tolerance(10)));
        let h = hermite_q(16, &params.g);
        assert!(j.charpoly().rel_diff(&h) < 1e-45);
    }

    #[test]
    fn shift_moves_roots() {
        let q = CharPolynomial::from_real_roots(
            &[XReal::from_f64(1.0, p()), XReal::from_f64(-2.0, p()), XReal::from_f64(0.5, p())],
            &XReal::from_i32(3, p()),
        );
        let c = XReal::from_f64(0.25, p());
        let s = q.shift(&c);
        for r in [1.0, -2.0, 0.5] {
            let x = XReal::from_f64(r, p()) - &c;
            assert!(s.eval(&x).abs() < p().tolerance(5));
        }
        let want = CharPolynomial::from_real_roots(
            &[XReal::from_f64(0.75, p()), XReal::from_f64(-2.25, p()), XReal::from_f64(0.25, p())],
            &XReal::from_i32(3, p()),
        );
        assert!(s.rel_diff(&want) < 1e-50);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let params = sixteenth();
        let q = q_polynomial(&params, &PotentialV::hermite(p()), 16);
        let js = serde_json::to_value(&q).unwrap();
        assert_eq!(js["N"], 16);
        let back = CharPolynomial::from_json(&js).unwrap();
        assert_eq!(back, q);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn derivative_formula_matches_generating_function(
            pp in prop::sample::select(vec![3usize, 5, 7]),
            n in 1usize..=8,
            s in prop::collection::vec(-3.0f64..3.0, 6),
        ) {
            let s: Vec<XReal> = s.iter().take(pp - 2).map(|&x| XReal::from_f64(x, p())).collect();
            let params = double_scaling(pp, n, &s, GMode::Fixed(XReal::from_f64(0.3, p())), p()).unwrap();
            let v = build_potential(&params);
            let a = q_polynomial(&params, &v, n);
            let b = q_polynomial_gf(&params, &v, n);
            prop_assert!(a.rel_diff(&b) < 1e-40);
        }
    }
}
