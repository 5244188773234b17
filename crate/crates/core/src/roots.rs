//! Simultaneous root finding and real/complex classification.

use std::io::Write;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix_model::CharPolynomial;
use crate::num::{Precision, XComplex, XReal};

pub const DEFAULT_MAX_SWEEPS: usize = 200;
pub const DEFAULT_IM_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct RootOptions {
    pub max_sweeps: usize,
    pub im_tolerance: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { max_sweeps: DEFAULT_MAX_SWEEPS, im_tolerance: DEFAULT_IM_TOLERANCE }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootFlag {
    Real,
    /// Member of the conjugate pair with this id.
    Pair(usize),
    /// Off the real axis without a matching conjugate.
    Unpaired,
}

impl Serialize for RootFlag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RootFlag::Real => s.serialize_str("real"),
            RootFlag::Pair(id) => s.serialize_str(&format!("pair:{id}")),
            RootFlag::Unpaired => s.serialize_str("unpaired"),
        }
    }
}

/// Roots sorted by real part, then imaginary part.
#[derive(Clone, Debug)]
pub struct RootSet {
    pub roots: Vec<XComplex>,
    /// `|Q(r)| / sum_k |q_k| |r|^k` per root.
    pub residuals: Vec<XReal>,
    pub im_tolerance: f64,
    pub flags: Vec<RootFlag>,
    pub on_critical_line: bool,
    pub sweeps: usize,
    pub prec: Precision,
}

impl Serialize for RootSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RootSet", 7)?;
        st.serialize_field("precision_digits", &self.prec.digits())?;
        st.serialize_field("roots", &self.roots)?;
        st.serialize_field("residuals", &self.residuals)?;
        st.serialize_field("flags", &self.flags)?;
        st.serialize_field("im_tolerance", &self.im_tolerance)?;
        st.serialize_field("on_critical_line", &self.on_critical_line)?;
        st.serialize_field("n_complex_pairs", &self.n_complex_pairs())?;
        st.end()
    }
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn n_complex_pairs(&self) -> usize {
        self.flags
            .iter()
            .filter_map(|f| match f {
                RootFlag::Pair(id) => Some(*id),
                _ => None,
            })
            .max()
            .map_or(0, |m| m + 1)
    }

    /// Real roots in ascending order.
    pub fn real_roots(&self) -> Vec<XReal> {
        self.roots
            .iter()
            .zip(&self.flags)
            .filter(|(_, f)| **f == RootFlag::Real)
            .map(|(r, _)| r.re.clone())
            .collect()
    }

    /// One representative (positive imaginary part) per conjugate pair.
    pub fn complex_pairs(&self) -> Vec<XComplex> {
        self.roots
            .iter()
            .zip(&self.flags)
            .filter(|(r, f)| matches!(f, RootFlag::Pair(_)) && r.im.is_positive())
            .map(|(r, _)| r.clone())
            .collect()
    }

    pub fn max_residual(&self) -> XReal {
        self.residuals.iter().fold(XReal::zero(self.prec), |m, r| XReal::max_of(&m, r))
    }

    /// `lead * prod (b - r_i)`, expanded in complex arithmetic.
    pub fn reconstruct(&self, lead: &XReal) -> CharPolynomial {
        let prec = self.prec;
        let mut c = vec![XComplex::from_real(lead.clone())];
        for r in &self.roots {
            let mut next = vec![XComplex::zero(prec); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i + 1] = &next[i + 1] + ci;
                next[i] = &next[i] - &(ci * r);
            }
            c = next;
        }
        CharPolynomial::new(c.into_iter().map(|z| z.re).collect(), prec)
    }

    /// Writes `re,im,is_real` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["re", "im", "is_real"])?;
        for (r, f) in self.roots.iter().zip(&self.flags) {
            wr.write_record([
                r.re.to_decimal_string(),
                r.im.to_decimal_string(),
                (*f == RootFlag::Real).to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn fujiwara_bound(monic: &[XReal]) -> XReal {
    let n = monic.len() - 1;
    let prec = monic[n].precision();
    let mut best = XReal::zero(prec);
    for k in 1..=n {
        let mut a = monic[n - k].abs();
        if k == n {
            a = a / 2;
        }
        if a.is_zero() {
            continue;
        }
        let r = a.powf(&XReal::ratio(1, k as i64, prec));
        best = XReal::max_of(&best, &r);
    }
    best * 2
}

fn relative_residual(q: &CharPolynomial, z: &XComplex) -> XReal {
    let val = q.eval_complex(z).abs();
    let mag = z.abs();
    let mut scale = XReal::zero(q.precision());
    for c in q.coeffs().iter().rev() {
        scale = &scale * &mag + c.abs();
    }
    if scale.is_zero() {
        return val;
    }
    val / scale
}

/// All complex roots by Aberth-Ehrlich iteration, polished by Newton steps.
pub fn find_roots(q: &CharPolynomial) -> Result<RootSet> {
    find_roots_with(q, &RootOptions::default())
}

pub fn find_roots_with(q: &CharPolynomial, opts: &RootOptions) -> Result<RootSet> {
    let n = q.degree();
    let prec = q.precision();
    if n == 0 || q.leading().is_zero() {
        return Err(Error::DegeneratePolynomial);
    }
    let lead_inv = q.leading().recip();
    let monic = q.scale(&lead_inv);
    let dq = monic.derivative();

    let center = -(monic.coeff(n - 1) / n as i32);
    let shifted = monic.shift(&center);
    let radius = {
        let r = fujiwara_bound(shifted.coeffs());
        if r.is_zero() {
            XReal::one(prec)
        } else {
            r / 2
        }
    };
    let two_pi = XReal::pi(prec) * 2;
    let offset = XReal::from_f64(0.4, prec);
    let mut z: Vec<XComplex> = (0..n)
        .map(|k| {
            let theta = &two_pi * &XReal::ratio(k as i64, n as i64, prec) + &offset;
            let mut c = XComplex::cis(&theta).scale(&radius);
            c.re += &center;
            c
        })
        .collect();

    let step_tol = XReal::from_i32(10, prec).powi(-(prec.digits() as i32 - 8));
    let accept = XReal::from_i32(10, prec).powi(-(prec.digits() as i32 / 2));
    let one = XComplex::from_real(XReal::one(prec));
    let mut sweeps = 0;
    for _ in 0..opts.max_sweeps {
        sweeps += 1;
        let snapshot = z.clone();
        let mut max_step = XReal::zero(prec);
        for k in 0..n {
            let zk = &snapshot[k];
            let pv = monic.eval_complex(zk);
            if pv.re.is_zero() && pv.im.is_zero() {
                continue;
            }
            let w = &pv / &dq.eval_complex(zk);
            let mut s = XComplex::zero(prec);
            for (j, zj) in snapshot.iter().enumerate() {
                if j != k {
                    s = &s + &(&one / &(zk - zj));
                }
            }
            let corr = &w / &(&one - &(&w * &s));
            let rel = corr.abs() / (zk.abs() + 1);
            max_step = XReal::max_of(&max_step, &rel);
            z[k] = zk - &corr;
        }
        if max_step < step_tol {
            break;
        }
    }

    for zk in z.iter_mut() {
        for _ in 0..3 {
            let pv = monic.eval_complex(zk);
            let dv = dq.eval_complex(zk);
            if dv.abs().is_zero() {
                break;
            }
            let cand = &*zk - &(&pv / &dv);
            if relative_residual(&monic, &cand) <= relative_residual(&monic, zk) {
                *zk = cand;
            } else {
                break;
            }
        }
    }

    let mut worst = XReal::zero(prec);
    for zk in &z {
        worst = XReal::max_of(&worst, &relative_residual(&monic, zk));
    }
    if worst >= accept {
        return Err(Error::NoConvergence { sweeps, backward_error: worst.to_f64() });
    }

    let mut rs = RootSet {
        roots: z,
        residuals: Vec::new(),
        im_tolerance: opts.im_tolerance,
        flags: Vec::new(),
        on_critical_line: false,
        sweeps,
        prec,
    };
    rs = classify(rs, opts.im_tolerance);
    rs.residuals = rs.roots.iter().map(|r| relative_residual(q, r)).collect();
    Ok(rs)
}

fn is_real_root(z: &XComplex, tol: f64) -> bool {
    z.im.abs().to_f64() < tol * (1.0 + z.re.abs().to_f64())
}

/// Flags roots as real or paired, snaps real roots onto the axis and makes
/// each pair exactly conjugate. The result is sorted by real part.
pub fn classify(mut rs: RootSet, im_tolerance: f64) -> RootSet {
    let prec = rs.prec;
    let n = rs.roots.len();
    let mut flags = vec![RootFlag::Unpaired; n];
    for (k, z) in rs.roots.iter_mut().enumerate() {
        if is_real_root(z, im_tolerance) {
            flags[k] = RootFlag::Real;
            z.im = XReal::zero(prec);
        }
    }
    let mut used = vec![false; n];
    for k in 0..n {
        if flags[k] != RootFlag::Unpaired || used[k] || !rs.roots[k].im.is_positive() {
            continue;
        }
        let target = rs.roots[k].conj();
        let partner = (0..n)
            .filter(|&j| j != k && !used[j] && flags[j] == RootFlag::Unpaired && rs.roots[j].im.is_sign_negative())
            .min_by(|&a, &b| {
                (&rs.roots[a] - &target).abs().total_cmp(&(&rs.roots[b] - &target).abs())
            });
        if let Some(j) = partner {
            let avg = (&rs.roots[k] + &rs.roots[j].conj()).scale(&XReal::ratio(1, 2, prec));
            rs.roots[j] = avg.conj();
            rs.roots[k] = avg;
            used[k] = true;
            used[j] = true;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        rs.roots[a]
            .re
            .total_cmp(&rs.roots[b].re)
            .then(rs.roots[a].im.total_cmp(&rs.roots[b].im))
    });
    let roots: Vec<XComplex> = order.iter().map(|&i| rs.roots[i].clone()).collect();
    let residuals: Vec<XReal> = if rs.residuals.len() == n {
        order.iter().map(|&i| rs.residuals[i].clone()).collect()
    } else {
        Vec::new()
    };
    let mut sorted_flags = Vec::with_capacity(n);
    let mut next_id = 0;
    let mut pending: Vec<(XComplex, usize)> = Vec::new();
    for (i, &k) in order.iter().enumerate() {
        let f = if flags[k] == RootFlag::Real {
            RootFlag::Real
        } else if used[k] {
            let conj = roots[i].conj();
            if let Some(pos) = pending.iter().position(|(c, _)| *c == conj) {
                let (_, id) = pending.remove(pos);
                RootFlag::Pair(id)
            } else {
                let id = next_id;
                next_id += 1;
                pending.push((roots[i].clone(), id));
                RootFlag::Pair(id)
            }
        } else {
            RootFlag::Unpaired
        };
        sorted_flags.push(f);
    }
    rs.on_critical_line = sorted_flags.iter().all(|f| *f == RootFlag::Real);
    rs.roots = roots;
    rs.residuals = residuals;
    rs.flags = sorted_flags;
    rs.im_tolerance = im_tolerance;
    rs
}

/// Relative coefficient tolerance for rebuilding `q` from its roots:
/// `10^-(digits - 15 - log10 kappa)` with `kappa` the coefficient spread.
pub fn reconstruction_tolerance(q: &CharPolynomial) -> f64 {
    let mags: Vec<f64> = q.coeffs().iter().filter(|c| !c.is_zero()).map(|c| c.abs().to_f64()).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    let kappa = if min > 0.0 { (max / min).max(1.0) } else { 1.0 };
    let exp = q.precision().digits() as f64 - 15.0 - kappa.log10();
    10f64.powf(-exp)
}

/// Worst relative error of the coefficients rebuilt from `rs`; zero
/// coefficients are measured against the largest coefficient.
pub fn reconstruction_error(q: &CharPolynomial, rs: &RootSet) -> f64 {
    let back = rs.reconstruct(q.leading());
    let scale = q.coeffs().iter().fold(XReal::zero(q.precision()), |m, c| XReal::max_of(&m, &c.abs()));
    let mut worst = 0.0f64;
    for (a, b) in back.coeffs().iter().zip(q.coeffs()) {
        let d = (a - b).abs();
        let e = if b.is_zero() { d / &scale } else { d / b.abs() };
        worst = worst.max(e.to_f64());
    }
    worst
}
