//! Fourier kernels `Phi(x)` and their potentials `U(x) = -log Phi(x)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{Precision, XReal};
use crate::series::TaylorSeries;

pub const DEFAULT_MAX_TERMS: usize = 64;

/// Decimal literal kept as text until a working precision is known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "DecimalRepr", into = "String")]
pub struct Decimal(String);

#[derive(Deserialize)]
#[serde(untagged)]
enum DecimalRepr {
    Text(String),
    Int(i64),
    Float(f64),
}

impl From<DecimalRepr> for Decimal {
    fn from(r: DecimalRepr) -> Self {
        match r {
            DecimalRepr::Text(s) => Decimal(s),
            DecimalRepr::Int(i) => Decimal(i.to_string()),
            DecimalRepr::Float(f) => Decimal(format!("{f:e}")),
        }
    }
}

impl From<Decimal> for String {
    fn from(d: Decimal) -> String {
        d.0
    }
}

impl FromStr for Decimal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        XReal::parse(s, Precision::DEFAULT)?;
        Ok(Decimal(s.trim().to_string()))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Decimal {
    pub fn to_xreal(&self, prec: Precision) -> Result<XReal> {
        XReal::parse(&self.0, prec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[serde(alias = "riemann_xi")]
    Riemann,
    #[serde(alias = "ramanujan_l")]
    Ramanujan,
    #[serde(alias = "eta")]
    EtaGamma,
    Cosh,
    Monomial,
    Explicit,
}

impl FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "riemann" | "riemann_xi" => Ok(KernelKind::Riemann),
            "ramanujan" | "ramanujan_l" => Ok(KernelKind::Ramanujan),
            "eta_gamma" | "eta" => Ok(KernelKind::EtaGamma),
            "cosh" => Ok(KernelKind::Cosh),
            "monomial" => Ok(KernelKind::Monomial),
            "explicit" => Ok(KernelKind::Explicit),
            other => Err(Error::Config(format!("unknown potential kind {other:?}"))),
        }
    }
}

/// The potentials handled by the pipeline.
#[derive(Clone, Debug, PartialEq)]
pub enum Kernel {
    RiemannXi,
    RamanujanL,
    EtaGamma,
    Cosh,
    /// `x^degree / degree`.
    Monomial { degree: usize },
    /// `x^{p+1}/(p+1) + sum_k s_k x^{k+1}/(k+1)`, with `s[0] = s_1`.
    Explicit { p: usize, s: Vec<XReal> },
}

impl Kernel {
    pub fn kind(&self) -> KernelKind {
        match self {
            Kernel::RiemannXi => KernelKind::Riemann,
            Kernel::RamanujanL => KernelKind::Ramanujan,
            Kernel::EtaGamma => KernelKind::EtaGamma,
            Kernel::Cosh => KernelKind::Cosh,
            Kernel::Monomial { .. } => KernelKind::Monomial,
            Kernel::Explicit { .. } => KernelKind::Explicit,
        }
    }

    pub fn is_even(&self) -> bool {
        match self {
            Kernel::EtaGamma => false,
            Kernel::Explicit { s, .. } => s.iter().skip(1).step_by(2).all(XReal::is_zero),
            _ => true,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Kernel::RiemannXi => "-log Phi_Xi(x)".into(),
            Kernel::RamanujanL => "-log Phi_L(x)".into(),
            Kernel::EtaGamma => "(x+log 2)/2 + e^-(x+log 2) + 1".into(),
            Kernel::Cosh => "cosh(x)".into(),
            Kernel::Monomial { degree } => format!("x^{degree}/{degree}"),
            Kernel::Explicit { p, s } => {
                let mut out = format!("x^{}/{}", p + 1, p + 1);
                for (i, sk) in s.iter().enumerate().rev() {
                    if sk.is_zero() {
                        continue;
                    }
                    let d = i + 2;
                    let sign = if sk.is_sign_negative() { '-' } else { '+' };
                    let mag = sk.abs();
                    if (&mag - 1).is_zero() {
                        out.push_str(&format!(" {sign} x^{d}/{d}"));
                    } else {
                        out.push_str(&format!(" {sign} {mag:.6}x^{d}/{d}"));
                    }
                }
                out
            }
        }
    }
}

/// Truncation controls for kernel sums and products.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesControl {
    pub max_terms: usize,
    pub term_tolerance: XReal,
}

impl SeriesControl {
    /// `max_terms = 64`, `term_tolerance = 10^-(digits+10)`.
    pub fn default_for(prec: Precision) -> Self {
        SeriesControl {
            max_terms: DEFAULT_MAX_TERMS,
            term_tolerance: XReal::from_i32(10, prec).powi(-(prec.digits() as i32 + 10)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    pub kernel: Kernel,
    pub control: SeriesControl,
    pub prec: Precision,
}

impl PotentialSpec {
    pub fn new(kernel: Kernel, prec: Precision) -> Self {
        PotentialSpec { kernel, control: SeriesControl::default_for(prec), prec }
    }

    pub fn riemann(prec: Precision) -> Self {
        Self::new(Kernel::RiemannXi, prec)
    }

    pub fn ramanujan(prec: Precision) -> Self {
        Self::new(Kernel::RamanujanL, prec)
    }

    pub fn eta_gamma(prec: Precision) -> Self {
        Self::new(Kernel::EtaGamma, prec)
    }

    pub fn cosh(prec: Precision) -> Self {
        Self::new(Kernel::Cosh, prec)
    }

    pub fn monomial(degree: usize, prec: Precision) -> Result<Self> {
        if degree == 0 || degree % 2 != 0 {
            return Err(Error::Config(format!("monomial degree must be positive and even, got {degree}")));
        }
        Ok(Self::new(Kernel::Monomial { degree }, prec))
    }

    /// Normalized polynomial potential; `s[k-1]` multiplies `x^{k+1}/(k+1)`.
    pub fn explicit(p: usize, s: Vec<XReal>, prec: Precision) -> Result<Self> {
        if p < 2 {
            return Err(Error::Config(format!("explicit potential needs p >= 2, got {p}")));
        }
        if s.len() > p - 1 {
            return Err(Error::Config(format!(
                "explicit potential at p = {p} takes at most {} couplings, got {}",
                p - 1,
                s.len()
            )));
        }
        Ok(Self::new(Kernel::Explicit { p, s }, prec))
    }

    pub fn explicit_f64(p: usize, s: &[f64], prec: Precision) -> Result<Self> {
        Self::explicit(p, s.iter().map(|&v| XReal::from_f64(v, prec)).collect(), prec)
    }
}

/// Serializable potential block, e.g. `{kind = "explicit", p = 7, s = [1, 0, 3, 0, 3]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: KernelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub s: Vec<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_terms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term_tolerance: Option<Decimal>,
}

impl PotentialConfig {
    pub fn to_spec(&self, prec: Precision) -> Result<PotentialSpec> {
        let mut spec = match self.kind {
            KernelKind::Riemann => PotentialSpec::riemann(prec),
            KernelKind::Ramanujan => PotentialSpec::ramanujan(prec),
            KernelKind::EtaGamma => PotentialSpec::eta_gamma(prec),
            KernelKind::Cosh => PotentialSpec::cosh(prec),
            KernelKind::Monomial => {
                let d = self
                    .degree
                    .or(self.p.map(|p| p + 1))
                    .ok_or_else(|| Error::Config("monomial potential needs a degree".into()))?;
                PotentialSpec::monomial(d, prec)?
            }
            KernelKind::Explicit => {
                let p = self.p.ok_or_else(|| Error::Config("explicit potential needs p".into()))?;
                let s = self.s.iter().map(|d| d.to_xreal(prec)).collect::<Result<Vec<_>>>()?;
                PotentialSpec::explicit(p, s, prec)?
            }
        };
        if let Some(m) = self.max_terms {
            spec.control.max_terms = m;
        }
        if let Some(t) = &self.term_tolerance {
            spec.control.term_tolerance = t.to_xreal(prec)?;
        }
        Ok(spec)
    }
}

/// `Phi(x)` and, where available, `Phi'(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelValue {
    pub phi: XReal,
    pub phi_prime: Option<XReal>,
}

fn check_tail(terms: usize, last: &XReal, ctl: &SeriesControl) -> Result<()> {
    if last.abs() >= ctl.term_tolerance {
        return Err(Error::NonConvergence { terms, last: last.to_f64() });
    }
    Ok(())
}

/// Theta-type sum `sum_n (4 pi^2 n^4 e^{9x/2} - 6 pi n^2 e^{5x/2}) exp(-pi n^2 e^{2x})`.
///
/// The kernel is even, so it is summed at `|x|` where the terms fall off fastest.
pub fn phi_riemann(x: &XReal, ctl: &SeriesControl) -> Result<KernelValue> {
    let prec = x.precision();
    let y = x.abs();
    let pi = XReal::pi(prec);
    let e2 = (&y * 2).exp();
    let e92 = (&y * 9 / 2).exp();
    let e52 = (&y * 5 / 2).exp();
    let mut phi = XReal::zero(prec);
    let mut dphi = XReal::zero(prec);
    let mut last = XReal::zero(prec);
    let mut used = 0;
    for n in 1..=ctl.max_terms {
        used = n;
        let n2 = XReal::from_usize(n * n, prec);
        let pin2 = &pi * &n2;
        let damp = (-(&pin2 * &e2)).exp();
        let a = &pin2.square() * 4 * &e92;
        let b = &pin2 * 6 * &e52;
        let term = (&a - &b) * &damp;
        let da = &a * 9 / 2;
        let db = &b * 5 / 2;
        let dterm = (&da - &db - (&a - &b) * (&pin2 * 2 * &e2)) * &damp;
        phi += &term;
        dphi += &dterm;
        last = term.abs();
        if n > 1 && last < ctl.term_tolerance {
            break;
        }
    }
    check_tail(used, &last, ctl)?;
    if x.is_sign_negative() {
        dphi = -dphi;
    }
    Ok(KernelValue { phi, phi_prime: Some(dphi) })
}

/// `log Phi_L(x)` for the weight-12 cusp form kernel.
///
/// `Phi_L` is even, so the product is evaluated at `-|x|`, where `e^{-x}` is
/// large and the factors approach 1 quickly.
pub fn log_phi_ramanujan(x: &XReal, ctl: &SeriesControl) -> Result<(XReal, XReal)> {
    let prec = x.precision();
    let y = -x.abs();
    let two_pi = XReal::pi(prec) * 2;
    let w = (-&y).exp();
    let mut log_phi = &y * (-6) - &two_pi * &w;
    let mut dlog = XReal::from_i32(-6, prec) + &two_pi * &w;
    let mut last = XReal::zero(prec);
    let mut used = 0;
    for n in 1..=ctl.max_terms {
        used = n;
        let k = &two_pi * &w * n as i32;
        let q = (-&k).exp();
        let one_minus = XReal::one(prec) - &q;
        log_phi += one_minus.ln() * 24;
        dlog -= &k * &q / &one_minus * 24;
        last = q;
        if last < ctl.term_tolerance {
            break;
        }
    }
    check_tail(used, &last, ctl)?;
    if x.is_sign_negative() {
        Ok((log_phi, dlog))
    } else {
        Ok((log_phi, -dlog))
    }
}

pub fn phi_ramanujan(x: &XReal, ctl: &SeriesControl) -> Result<KernelValue> {
    let (lp, dlp) = log_phi_ramanujan(x, ctl)?;
    let phi = lp.exp();
    let phi_prime = &phi * &dlp;
    Ok(KernelValue { phi, phi_prime: Some(phi_prime) })
}

/// `(x + log 2)/2 + e^{-(x + log 2)} + 1`.
pub fn u_eta_gamma(x: &XReal) -> XReal {
    let prec = x.precision();
    let t = x + &XReal::ln2(prec);
    &t / 2 + (-&t).exp() + 1
}

/// Point value of `U(x)`.
pub fn u_value(spec: &PotentialSpec, x: &XReal) -> Result<XReal> {
    let x = x.with_precision(spec.prec.max(x.precision()));
    match &spec.kernel {
        Kernel::RiemannXi => Ok(-phi_riemann(&x, &spec.control)?.phi.ln()),
        Kernel::RamanujanL => Ok(-log_phi_ramanujan(&x, &spec.control)?.0),
        Kernel::EtaGamma => Ok(u_eta_gamma(&x)),
        Kernel::Cosh => Ok(x.cosh()),
        Kernel::Monomial { degree } => Ok(x.powi(*degree as i32) / *degree as i32),
        Kernel::Explicit { .. } => {
            let poly = explicit_series(&spec.kernel, spec.prec);
            Ok(poly.eval(&x))
        }
    }
}

fn explicit_series(kernel: &Kernel, prec: Precision) -> TaylorSeries {
    match kernel {
        Kernel::Explicit { p, s } => {
            let mut c = vec![XReal::zero(prec); p + 2];
            c[p + 1] = XReal::ratio(1, (*p + 1) as i64, prec);
            for (i, sk) in s.iter().enumerate() {
                c[i + 2] = sk / (i as i32 + 2);
            }
            TaylorSeries::new(c, prec)
        }
        Kernel::Monomial { degree } => {
            let mut c = vec![XReal::zero(prec); degree + 1];
            c[*degree] = XReal::ratio(1, *degree as i64, prec);
            TaylorSeries::new(c, prec)
        }
        _ => unreachable!("not a polynomial kernel"),
    }
}

/// `e^{k x}` to the given order.
fn exp_kx(k: &XReal, order: usize, prec: Precision) -> TaylorSeries {
    TaylorSeries::exp_x(order, prec).dilate(k)
}

fn max_abs(s: &TaylorSeries) -> XReal {
    s.coeffs().iter().fold(XReal::zero(s.precision()), |m, c| XReal::max_of(&m, &c.abs()))
}

/// Taylor series of `Phi_Xi` and `Phi_Xi'` at 0.
pub fn riemann_phi_series(order: usize, ctl: &SeriesControl, prec: Precision) -> Result<(TaylorSeries, TaylorSeries)> {
    let pi = XReal::pi(prec);
    let e2 = exp_kx(&XReal::from_i32(2, prec), order, prec);
    let e92 = exp_kx(&XReal::ratio(9, 2, prec), order, prec);
    let e52 = exp_kx(&XReal::ratio(5, 2, prec), order, prec);
    let mut phi = TaylorSeries::zero(order, prec);
    let mut dphi = TaylorSeries::zero(order, prec);
    let mut last = XReal::zero(prec);
    let mut used = 0;
    for n in 1..=ctl.max_terms {
        used = n;
        let pin2 = &pi * &XReal::from_usize(n * n, prec);
        let damp = e2.scale(&-&pin2).exp();
        let a = e92.scale(&(pin2.square() * 4));
        let b = e52.scale(&(&pin2 * 6));
        let ab = a.sub(&b);
        let term = ab.mul(&damp);
        let lin = a.scale(&XReal::ratio(9, 2, prec)).sub(&b.scale(&XReal::ratio(5, 2, prec)));
        let quad = ab.mul(&e2).scale(&(&pin2 * 2));
        let dterm = lin.sub(&quad).mul(&damp);
        phi = phi.add(&term);
        dphi = dphi.add(&dterm);
        last = max_abs(&term);
        if n > 1 && last < ctl.term_tolerance {
            break;
        }
    }
    check_tail(used, &last, ctl)?;
    Ok((phi, dphi))
}

fn riemann_u_series(order: usize, ctl: &SeriesControl, prec: Precision) -> Result<TaylorSeries> {
    let (phi, _) = riemann_phi_series(order, ctl, prec)?;
    Ok(phi.log()?.neg())
}

fn ramanujan_u_series(order: usize, ctl: &SeriesControl, prec: Precision) -> Result<TaylorSeries> {
    let two_pi = XReal::pi(prec) * 2;
    let em = exp_kx(&XReal::from_i32(-1, prec), order, prec);
    let mut log_phi = TaylorSeries::identity(order, prec)
        .scale(&XReal::from_i32(-6, prec))
        .sub(&em.scale(&two_pi));
    let one = TaylorSeries::constant(XReal::one(prec), order, prec);
    let mut last = XReal::zero(prec);
    let mut used = 0;
    for n in 1..=ctl.max_terms {
        used = n;
        let q = em.scale(&-(&two_pi * n as i32)).exp();
        let term = one.sub(&q).log()?.scale(&XReal::from_i32(24, prec));
        log_phi = log_phi.add(&term);
        last = max_abs(&term);
        if last < ctl.term_tolerance {
            break;
        }
    }
    check_tail(used, &last, ctl)?;
    Ok(log_phi.neg())
}

fn eta_gamma_u_series(order: usize, prec: Precision) -> TaylorSeries {
    let ln2 = XReal::ln2(prec);
    let mut c = exp_kx(&XReal::from_i32(-1, prec), order, prec).scale(&XReal::ratio(1, 2, prec));
    let shift = TaylorSeries::constant(&ln2 / 2 + 1, order, prec);
    let half_x = TaylorSeries::identity(order, prec).scale(&XReal::ratio(1, 2, prec));
    c = c.add(&shift).add(&half_x);
    c
}

fn cosh_series(order: usize, prec: Precision) -> TaylorSeries {
    let e = TaylorSeries::exp_x(order, prec);
    e.add(&e.dilate(&XReal::from_i32(-1, prec))).scale(&XReal::ratio(1, 2, prec))
}

/// Taylor series of `U` at 0, obtained by exact series composition.
pub fn taylor_u(spec: &PotentialSpec, order: usize) -> Result<TaylorSeries> {
    if order < 2 {
        return Err(Error::SeriesTooShort { have: order, need: 2 });
    }
    let prec = spec.prec;
    match &spec.kernel {
        Kernel::RiemannXi => riemann_u_series(order, &spec.control, prec),
        Kernel::RamanujanL => ramanujan_u_series(order, &spec.control, prec),
        Kernel::EtaGamma => Ok(eta_gamma_u_series(order, prec)),
        Kernel::Cosh => Ok(cosh_series(order, prec)),
        k @ (Kernel::Monomial { .. } | Kernel::Explicit { .. }) => {
            let poly = explicit_series(k, prec);
            Ok(poly.truncate(order))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::DEFAULT
    }

    fn ctl() -> SeriesControl {
        SeriesControl::default_for(p())
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn riemann_phi_at_zero() {
        let v = phi_riemann(&XReal::zero(p()), &ctl()).unwrap();
        assert!((-v.phi.ln().to_f64() - 0.112728).abs() < 1e-6);
        assert!(v.phi_prime.unwrap().abs().to_f64() < 1e-50);
    }

    #[test]
    fn riemann_second_term_size() {
        let one_term = SeriesControl { max_terms: 1, term_tolerance: XReal::one(p()) };
        let two_terms = SeriesControl { max_terms: 2, term_tolerance: XReal::one(p()) };
        let a = phi_riemann(&XReal::zero(p()), &one_term).unwrap().phi;
        let b = phi_riemann(&XReal::zero(p()), &two_terms).unwrap().phi;
        let pi = std::f64::consts::PI;
        let want = (64.0 * pi * pi - 24.0 * pi) * (-4.0 * pi).exp();
        assert!(rel((&b - &a).to_f64(), want) < 1e-12);
        assert!((want - 1.94e-3).abs() < 1e-5);
    }

    #[test]
    fn riemann_nonconvergence_is_reported() {
        let tight = SeriesControl { max_terms: 2, term_tolerance: XReal::from_f64(1e-80, p()) };
        assert!(matches!(
            phi_riemann(&XReal::zero(p()), &tight),
            Err(Error::NonConvergence { terms: 2, .. })
        ));
    }

    #[test]
    fn riemann_phi_is_even_and_derivative_odd() {
        let x = XReal::from_f64(0.3, p());
        let a = phi_riemann(&x, &ctl()).unwrap();
        let b = phi_riemann(&-&x, &ctl()).unwrap();
        assert_eq!(a.phi, b.phi);
        assert_eq!(a.phi_prime.clone().unwrap(), -b.phi_prime.unwrap());
        let h = XReal::from_f64(1e-20, p());
        let fd = (phi_riemann(&(&x + &h), &ctl()).unwrap().phi - phi_riemann(&(&x - &h), &ctl()).unwrap().phi)
            / (&h * 2);
        assert!(rel(fd.to_f64(), a.phi_prime.unwrap().to_f64()) < 1e-15);
    }

    #[test]
    fn riemann_taylor_leading_values() {
        let u = taylor_u(&PotentialSpec::riemann(p()), 10).unwrap();
        assert!(rel(u.coeff(0).to_f64(), 0.112728) < 1e-5);
        assert!(rel(u.coeff(2).to_f64(), 9.36345) < 1e-5);
        assert!(rel(u.coeff(4).to_f64(), 5.95896) < 1e-5);
        for k in (1..=9).step_by(2) {
            assert!(u.coeff(k).abs() < p().tolerance(30));
        }
    }

    #[test]
    fn riemann_u_derivative_matches_kernel_ratio() {
        let (phi, dphi) = riemann_phi_series(12, &ctl(), p()).unwrap();
        let ratio = dphi.mul(&phi.log().unwrap().neg().exp());
        let du = taylor_u(&PotentialSpec::riemann(p()), 13).unwrap().derivative();
        assert!(du.max_abs_diff(&ratio.neg()) < p().tolerance(10));
    }

    #[test]
    fn ramanujan_taylor_values() {
        let u = taylor_u(&PotentialSpec::ramanujan(p()), 8).unwrap();
        let want = [6.32813, 3.89463, 0.971962, -0.188291, 0.112629];
        for (i, w) in want.iter().enumerate() {
            assert!(rel(u.coeff(2 * i).to_f64(), *w) < 1e-5, "a_{}", 2 * i);
        }
        for k in (1..=7).step_by(2) {
            assert!(u.coeff(k).abs() < p().tolerance(30));
        }
    }

    #[test]
    fn ramanujan_point_value_matches_polynomial() {
        let spec = PotentialSpec::ramanujan(p());
        let x = XReal::from_f64(0.1, p());
        let poly = taylor_u(&spec, 8).unwrap().eval(&x);
        let exact = u_value(&spec, &x).unwrap();
        assert!((&poly - &exact).abs().to_f64() < 1e-9);
        let poly12 = taylor_u(&spec, 12).unwrap().eval(&x);
        assert!((&poly12 - &exact).abs() < (&poly - &exact).abs());
    }

    #[test]
    fn ramanujan_is_even_with_left_asymptotics() {
        let spec = PotentialSpec::ramanujan(p());
        let x = XReal::from_f64(0.7, p());
        assert_eq!(u_value(&spec, &x).unwrap(), u_value(&spec, &-&x).unwrap());
        let far = XReal::from_f64(-8.0, p());
        let (lp, _) = log_phi_ramanujan(&far, &ctl()).unwrap();
        let two_pi = XReal::pi(p()) * 2;
        let rest = lp + &far * 6 + two_pi * (-&far).exp();
        assert!(rest.abs() < p().tolerance(5));
    }

    #[test]
    fn ramanujan_log_derivative_matches_finite_difference() {
        let x = XReal::from_f64(0.4, p());
        let h = XReal::from_f64(1e-20, p());
        let (_, d) = log_phi_ramanujan(&x, &ctl()).unwrap();
        let fd = (log_phi_ramanujan(&(&x + &h), &ctl()).unwrap().0 - log_phi_ramanujan(&(&x - &h), &ctl()).unwrap().0)
            / (&h * 2);
        assert!(rel(fd.to_f64(), d.to_f64()) < 1e-15);
    }

    #[test]
    fn eta_gamma_values() {
        let ln2 = XReal::ln2(p());
        let at = u_eta_gamma(&-&ln2);
        assert!((at - 2).abs() < p().tolerance(3));
        let zero = u_eta_gamma(&XReal::zero(p()));
        let want = &ln2 / 2 + XReal::ratio(3, 2, p());
        assert!((zero - want).abs() < p().tolerance(3));
    }

    #[test]
    fn eta_gamma_series_derivative_closed_form() {
        let u = taylor_u(&PotentialSpec::eta_gamma(p()), 12).unwrap();
        let du = u.derivative();
        // U'(x) = 1/2 - e^{-x}/2
        let e = TaylorSeries::exp_x(11, p()).dilate(&XReal::from_i32(-1, p())).scale(&XReal::ratio(-1, 2, p()));
        let want = e.add(&TaylorSeries::constant(XReal::ratio(1, 2, p()), 11, p()));
        assert!(du.max_abs_diff(&want) < p().tolerance(5));
        let x = XReal::from_f64(0.05, p());
        assert!((u.eval(&x) - u_eta_gamma(&x)).abs().to_f64() < 1e-20);
    }

    #[test]
    fn cosh_series_values() {
        let u = taylor_u(&PotentialSpec::cosh(p()), 6).unwrap();
        let want = [1.0, 0.0, 0.5, 0.0, 1.0 / 24.0, 0.0, 1.0 / 720.0];
        for (i, w) in want.iter().enumerate() {
            assert!((u.coeff(i).to_f64() - w).abs() < 1e-30);
        }
    }

    #[test]
    fn explicit_and_monomial_are_their_polynomials() {
        let m = taylor_u(&PotentialSpec::monomial(8, p()).unwrap(), 8).unwrap();
        assert_eq!(m.coeff(8).to_f64(), 0.125);
        assert!(PotentialSpec::monomial(7, p()).is_err());
        let e = PotentialSpec::explicit_f64(7, &[1.0, 0.0, 3.0, 0.0, 3.0], p()).unwrap();
        let u = taylor_u(&e, 8).unwrap();
        assert_eq!(u.coeff(2).to_f64(), 0.5);
        assert_eq!(u.coeff(4).to_f64(), 0.75);
        assert_eq!(u.coeff(6).to_f64(), 0.5);
        assert!(e.kernel.is_even());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let ok: PotentialConfig = toml::from_str("kind = \"explicit\"\np = 7\ns = [1, 0, \"3\", 0, 3.5]").unwrap();
        let spec = ok.to_spec(p()).unwrap();
        match spec.kernel {
            Kernel::Explicit { p, s } => {
                assert_eq!(p, 7);
                assert_eq!(s[4].to_f64(), 3.5);
            }
            _ => panic!(),
        }
        let bad = toml::from_str::<PotentialConfig>("kind = \"cosh\"\nbogus = 1");
        assert!(bad.is_err());
    }
}
