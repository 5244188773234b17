//! Normalized `(p,1)` potentials and double-scaling parameters.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::{Precision, XReal};
use crate::potentials::PotentialSpec;
use crate::series::TaylorSeries;

/// `U_p(x) = x^{p+1}/(p+1) + sum_{n=2}^{p} s_{n-1} x^n / n + a0`.
///
/// `s[k-1]` holds `s_k`, so `s` has length `p - 1`. The linear coefficient of
/// the source series is not part of the normal form and is carried in
/// `residual_linear`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaledPotential {
    pub p: usize,
    pub lambda: XReal,
    pub a0: XReal,
    pub s: Vec<XReal>,
    pub residual_linear: XReal,
    #[serde(rename = "precision_digits")]
    pub prec: Precision,
}

impl ScaledPotential {
    /// Builds a potential directly from couplings (`s[0] = s_1`), padding to length `p - 1`.
    pub fn from_couplings(p: usize, mut s: Vec<XReal>, prec: Precision) -> Self {
        s.resize(p - 1, XReal::zero(prec));
        ScaledPotential {
            p,
            lambda: XReal::one(prec),
            a0: XReal::zero(prec),
            s,
            residual_linear: XReal::zero(prec),
            prec,
        }
    }

    pub fn coupling(&self, k: usize) -> XReal {
        self.s.get(k.wrapping_sub(1)).cloned().unwrap_or_else(|| XReal::zero(self.prec))
    }

    /// The normal form as a polynomial series of order `p + 1`.
    pub fn to_series(&self) -> TaylorSeries {
        let p = self.p;
        let mut c = vec![XReal::zero(self.prec); p + 2];
        c[0] = self.a0.clone();
        c[1] = self.residual_linear.clone();
        for (i, sk) in self.s.iter().enumerate() {
            c[i + 2] = sk / (i as i32 + 2);
        }
        c[p + 1] = XReal::ratio(1, (p + 1) as i64, self.prec);
        TaylorSeries::new(c, self.prec)
    }

    /// The normal form as an explicit potential (constant and linear parts dropped).
    pub fn to_spec(&self) -> Result<PotentialSpec> {
        PotentialSpec::explicit(self.p, self.s.clone(), self.prec)
    }
}

/// Normalizes the degree-`p+1` truncation of `u`.
pub fn rescale_potential(u: &TaylorSeries, p: usize) -> Result<ScaledPotential> {
    if p < 2 {
        return Err(Error::Config(format!("p must be at least 2, got {p}")));
    }
    if u.order() < p + 1 {
        return Err(Error::SeriesTooShort { have: u.order(), need: p + 1 });
    }
    let prec = u.precision();
    let lead = u.coeff(p + 1);
    if !lead.is_positive() {
        return Err(Error::NonPositiveLeadingCoefficient { degree: p + 1, value: lead.to_f64() });
    }
    let base = &lead * (p as i32 + 1);
    let lambda = base.powf(&XReal::ratio(1, (p + 1) as i64, prec));
    let inv = lambda.recip();
    let mut pw = inv.clone();
    let residual_linear = u.coeff(1) * &inv;
    let mut s = Vec::with_capacity(p - 1);
    for n in 2..=p {
        pw = &pw * &inv;
        s.push(u.coeff(n) * &pw * n as i32);
    }
    Ok(ScaledPotential { p, lambda, a0: u.coeff(0), s, residual_linear, prec })
}

/// Couplings of `cosh x` in closed form: `s_{2j+1} = (p!)^{(2j+2)/(p+1)} / (2j+1)!`.
pub fn cosh_couplings(p: usize, prec: Precision) -> Result<ScaledPotential> {
    if p < 3 || p % 2 == 0 {
        return Err(Error::Config(format!("cosh normal form needs odd p >= 3, got {p}")));
    }
    let mut pfact = XReal::one(prec);
    for k in 2..=p {
        pfact = pfact * k as i32;
    }
    let mut s = vec![XReal::zero(prec); p - 1];
    let mut kfact = XReal::one(prec);
    for k in 1..=p - 2 {
        kfact = kfact * k as i32;
        if k % 2 == 1 {
            let e = XReal::ratio((k + 1) as i64, (p + 1) as i64, prec);
            s[k - 1] = pfact.powf(&e) / &kfact;
        }
    }
    let lambda = pfact.recip().powf(&XReal::ratio(1, (p + 1) as i64, prec));
    Ok(ScaledPotential {
        p,
        lambda,
        a0: XReal::one(prec),
        s,
        residual_linear: XReal::zero(prec),
        prec,
    })
}

/// How the coupling `g` is tied to `N`.
#[derive(Clone, Debug, PartialEq)]
pub enum GMode {
    /// `g = (1/N)(1 + sum_k s_k eps^{p-k})`.
    Corrected,
    /// `g = 1/N`.
    Plain,
    Fixed(XReal),
}

impl GMode {
    pub fn label(&self) -> String {
        match self {
            GMode::Corrected => "corrected".into(),
            GMode::Plain => "plain".into(),
            GMode::Fixed(g) => format!("fixed:{}", g.to_sig_string(12)),
        }
    }
}

impl Serialize for GMode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

/// One `(p,1)` model instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    pub p: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: XReal,
    pub g: XReal,
    pub s: Vec<XReal>,
    pub g_mode: GMode,
}

impl ModelParams {
    pub fn precision(&self) -> Precision {
        self.epsilon.precision()
    }

    pub fn coupling(&self, k: usize) -> XReal {
        self.s
            .get(k.wrapping_sub(1))
            .cloned()
            .unwrap_or_else(|| XReal::zero(self.precision()))
    }
}

/// `eps = N^{-1/(p+1)}` and `g` according to `mode`. `s[0] = s_1`; at most `p - 1` entries.
pub fn double_scaling(p: usize, n: usize, s: &[XReal], mode: GMode, prec: Precision) -> Result<ModelParams> {
    if n == 0 {
        return Err(Error::Config("N must be at least 1".into()));
    }
    if p < 2 {
        return Err(Error::Config(format!("p must be at least 2, got {p}")));
    }
    if s.len() > p - 1 {
        return Err(Error::Config(format!("at most {} couplings at p = {p}, got {}", p - 1, s.len())));
    }
    let nx = XReal::from_usize(n, prec);
    let epsilon = nx.powf(&XReal::ratio(-1, (p + 1) as i64, prec));
    let g = match &mode {
        GMode::Plain => nx.recip(),
        GMode::Fixed(g) => g.with_precision(prec),
        GMode::Corrected => {
            let mut corr = XReal::one(prec);
            for (i, sk) in s.iter().enumerate() {
                let k = i + 1;
                corr += sk * &epsilon.powi((p - k) as i32);
            }
            corr / &nx
        }
    };
    if !g.is_positive() {
        return Err(Error::NonPositiveG(g.to_f64()));
    }
    let mut s = s.iter().map(|v| v.with_precision(prec)).collect::<Vec<_>>();
    s.resize(p - 1, XReal::zero(prec));
    Ok(ModelParams { p, n, epsilon, g, s, g_mode: mode })
}
