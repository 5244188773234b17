//! Baker-Akhiezer functions `psi(z) = int e^{-U(x)} e^{izx} dx` and their zeros.

use std::io::Write;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::{Precision, XComplex, XReal};
use crate::potentials::{u_value, PotentialSpec};
use crate::quadrature::GaussLegendre;

#[derive(Clone, Debug)]
pub struct QuadratureOptions {
    pub nodes_per_panel: usize,
    /// Largest change of `U` across one panel.
    pub max_du: f64,
    /// Largest panel width, which bounds the oscillations per panel.
    pub max_width: f64,
    /// Each panel is split into this many equal pieces.
    pub refine: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { nodes_per_panel: 64, max_du: 5.0, max_width: 0.5, refine: 1 }
    }
}

/// A tabulated Baker-Akhiezer integral: nodes `x_i` and weights `w_i e^{-U(x_i)}`.
#[derive(Clone, Debug)]
pub struct BAFunction {
    pub spec: PotentialSpec,
    /// Integration runs over `[x_lo, x_hi]`; for even `U` only `[0, x_hi]` is tabulated.
    pub x_lo: XReal,
    pub x_hi: XReal,
    pub even: bool,
    pub panels: usize,
    nodes: Vec<XReal>,
    weighted: Vec<XReal>,
    prec: Precision,
}

fn target_level(prec: Precision) -> f64 {
    (prec.digits() as f64 + 5.0) * std::f64::consts::LN_10
}

/// Smallest `|X|` in direction `dir` where `U` reaches the tail level.
fn find_cutoff(spec: &PotentialSpec, dir: i32, target: f64) -> Result<XReal> {
    let prec = spec.prec;
    let u = |x: f64| -> Result<f64> { Ok(u_value(spec, &XReal::from_f64(dir as f64 * x, prec))?.to_f64()) };
    let mut hi = 0.5;
    let mut u_hi = u(hi)?;
    while !(u_hi >= target) {
        hi *= 2.0;
        if hi > 4096.0 {
            return Err(Error::TailNotNegligible { value: (-u_hi).exp() });
        }
        u_hi = u(hi)?;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if u(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(XReal::from_f64(dir as f64 * hi, prec))
}

fn build_panels(spec: &PotentialSpec, a: f64, b: f64, opts: &QuadratureOptions) -> Result<Vec<(f64, f64)>> {
    let prec = spec.prec;
    let u = |x: f64| -> Result<f64> { Ok(u_value(spec, &XReal::from_f64(x, prec))?.to_f64()) };
    let mut panels = Vec::new();
    let mut x = a;
    let mut ux = u(x)?;
    while x < b {
        let mut h = opts.max_width.min(b - x);
        let mut uh = u(x + h)?;
        while (uh - ux).abs() > opts.max_du && h > 1e-6 {
            h *= 0.5;
            uh = u(x + h)?;
        }
        let end = if b - (x + h) < 1e-12 { b } else { x + h };
        let step = (end - x) / opts.refine as f64;
        for k in 0..opts.refine {
            let lo = x + k as f64 * step;
            let hi = if k + 1 == opts.refine { end } else { lo + step };
            panels.push((lo, hi));
        }
        x = end;
        ux = uh;
    }
    Ok(panels)
}

impl BAFunction {
    pub fn new(spec: PotentialSpec) -> Result<Self> {
        Self::with_options(spec, &QuadratureOptions::default())
    }

    pub fn with_options(spec: PotentialSpec, opts: &QuadratureOptions) -> Result<Self> {
        let prec = spec.prec;
        let even = spec.kernel.is_even();
        let target = target_level(prec);
        let x_hi = find_cutoff(&spec, 1, target)?;
        let x_lo = if even { -&x_hi } else { find_cutoff(&spec, -1, target)? };
        let tail = (-u_value(&spec, &x_hi)?).exp();
        let tail_lo = (-u_value(&spec, &x_lo)?).exp();
        let bound = XReal::from_i32(10, prec).powi(-(prec.digits() as i32 + 5));
        let worst = XReal::max_of(&tail, &tail_lo);
        if worst > bound {
            return Err(Error::TailNotNegligible { value: worst.to_f64() });
        }
        let start = if even { 0.0 } else { x_lo.to_f64() };
        let panels = build_panels(&spec, start, x_hi.to_f64(), opts)?;
        let gl = GaussLegendre::new(opts.nodes_per_panel, prec);
        let mapped: Vec<(XReal, XReal)> = panels
            .par_iter()
            .flat_map_iter(|&(a, b)| {
                let a = XReal::from_f64(a, prec);
                let b = XReal::from_f64(b, prec);
                gl.mapped(&a, &b).collect::<Vec<_>>()
            })
            .collect();
        let weighted = mapped
            .par_iter()
            .map(|(x, w)| Ok(w * &(-u_value(&spec, x)?).exp()))
            .collect::<Result<Vec<_>>>()?;
        let nodes = mapped.into_iter().map(|(x, _)| x).collect();
        Ok(BAFunction { spec, x_lo, x_hi, even, panels: panels.len(), nodes, weighted, prec })
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `psi(z)` for complex `z`.
    pub fn psi(&self, z: &XComplex) -> XComplex {
        let prec = self.prec;
        let mut re = XReal::zero(prec);
        let mut im = XReal::zero(prec);
        let real_z = z.im.is_zero();
        for (x, w) in self.nodes.iter().zip(&self.weighted) {
            let phase = &z.re * x;
            if self.even {
                // 2 cos(z x) for complex z: cos(ux)cosh(vx) - i sin(ux)sinh(vx)
                if real_z {
                    re += w * &phase.cos();
                } else {
                    let (s, c) = phase.sin_cos();
                    let vx = &z.im * x;
                    re += w * &(c * vx.cosh());
                    im -= w * &(s * vx.sinh());
                }
            } else {
                let (s, c) = phase.sin_cos();
                let damp = if real_z { XReal::one(prec) } else { (-(&z.im * x)).exp() };
                let wd = w * &damp;
                re += &wd * &c;
                im += &wd * &s;
            }
        }
        if self.even {
            re = re * 2;
            im = im * 2;
        }
        XComplex::new(re, im)
    }

    /// `psi` on the real axis; the imaginary part is dropped for even `U`.
    pub fn psi_real(&self, z: &XReal) -> XComplex {
        let mut v = self.psi(&XComplex::from_real(z.clone()));
        if self.even {
            v.im = XReal::zero(self.prec);
        }
        v
    }

    /// Evaluates `psi` on a grid in parallel.
    pub fn psi_grid(&self, zs: &[XReal]) -> Vec<XComplex> {
        zs.par_iter().map(|z| self.psi_real(z)).collect()
    }

    /// Writes `z,re,im` rows for plotting.
    pub fn write_csv<W: Write>(&self, zs: &[XReal], w: W) -> Result<()> {
        let vals = self.psi_grid(zs);
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["z", "re", "im"])?;
        for (z, v) in zs.iter().zip(&vals) {
            wr.write_record([z.to_sig_string(12), v.re.to_sig_string(15), v.im.to_sig_string(15)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Table,
    Quadrature,
    MagnitudeMinimum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceZeros {
    pub id: String,
    pub zeros: Vec<XReal>,
    pub provenance: Provenance,
}

impl Serialize for ReferenceZeros {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ReferenceZeros", 3)?;
        st.serialize_field("id", &self.id)?;
        st.serialize_field("zeros", &self.zeros)?;
        st.serialize_field("provenance", &self.provenance)?;
        st.end()
    }
}

impl ReferenceZeros {
    pub fn to_f64(&self) -> Vec<f64> {
        self.zeros.iter().map(XReal::to_f64).collect()
    }
}

pub const REFERENCE_IDS: [&str; 8] =
    ["airy", "riemann", "ramanujan", "kbessel", "airy7", "airy7_m130", "airy7_p133", "eta_gamma"];

/// Tabulated first three zeros.
pub fn reference_table(id: &str, prec: Precision) -> Result<ReferenceZeros> {
    let values: &[&str] = match id {
        "airy" => &["-2.33811", "-4.08795", "-5.52056"],
        "riemann" | "eta_gamma" => &["14.1347", "21.022", "25.0109"],
        "ramanujan" => &["9.22238", "13.90755", "17.442777"],
        "kbessel" | "cosh" => &["2.96255", "4.53449", "5.87987"],
        "airy7" => &["2.56503", "5.08746", "7.53357"],
        "airy7_m130" => &["2.89881", "5.99627", "8.6996"],
        "airy7_p133" => &["4.17486", "7.69736", "10.9217"],
        other => return Err(Error::UnknownReference(other.to_string())),
    };
    let zeros = values.iter().map(|v| XReal::parse(v, prec)).collect::<Result<Vec<_>>>()?;
    Ok(ReferenceZeros { id: id.to_string(), zeros, provenance: Provenance::Table })
}

pub const DEFAULT_Z_MAX: f64 = 60.0;
const BISECT_TOL: f64 = 1e-10;
const CHUNK: usize = 32;

/// First `count` positive sign changes of `psi` on the real axis.
pub fn psi_zeros(f: &BAFunction, count: usize, scan_step: f64, z_max: f64) -> Result<ReferenceZeros> {
    if !f.even {
        return Err(Error::NotEven(f.spec.kernel.describe()));
    }
    let prec = f.prec;
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut prev: Option<(f64, XReal)> = None;
    let mut k = 0usize;
    'scan: while brackets.len() < count {
        let zs: Vec<f64> = (0..CHUNK).map(|j| (k + j) as f64 * scan_step).collect();
        if zs[0] > z_max {
            break;
        }
        k += CHUNK;
        let xs: Vec<XReal> = zs.iter().map(|&z| XReal::from_f64(z, prec)).collect();
        let vals = f.psi_grid(&xs);
        for (z, v) in zs.into_iter().zip(vals) {
            if z > z_max {
                break 'scan;
            }
            if let Some((z0, v0)) = &prev {
                if v.re.is_zero() {
                    brackets.push((z, z));
                } else if v0.is_sign_negative() != v.re.is_sign_negative() && !v0.is_zero() {
                    brackets.push((*z0, z));
                }
                if brackets.len() >= count {
                    break 'scan;
                }
            }
            prev = Some((z, v.re));
        }
    }
    if brackets.len() < count {
        return Err(Error::InsufficientZerosFound { found: brackets.len(), wanted: count, limit: z_max });
    }
    let zeros = brackets.par_iter().map(|&(a, b)| bisect(f, a, b)).collect();
    Ok(ReferenceZeros { id: f.spec.kernel.describe(), zeros, provenance: Provenance::Quadrature })
}

fn bisect(f: &BAFunction, a: f64, b: f64) -> XReal {
    let prec = f.prec;
    let mut lo = XReal::from_f64(a, prec);
    let mut hi = XReal::from_f64(b, prec);
    let mut f_lo = f.psi_real(&lo).re;
    while (&hi - &lo).to_f64() > BISECT_TOL {
        let mid = (&lo + &hi) / 2;
        let fm = f.psi_real(&mid).re;
        if fm.is_zero() {
            return mid;
        }
        if fm.is_sign_negative() == f_lo.is_sign_negative() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2
}

/// Local minima of `|psi|` along the real axis, for kernels whose `psi` is
/// complex there. A minimum is kept when `|psi|` drops below `rel_threshold`
/// times the larger of its two bracketing grid values. Heuristic; intended
/// for plots.
pub fn psi_magnitude_minima(
    f: &BAFunction,
    count: usize,
    scan_step: f64,
    z_max: f64,
    rel_threshold: f64,
) -> Result<ReferenceZeros> {
    let prec = f.prec;
    let n = (z_max / scan_step).floor() as usize + 1;
    let zs: Vec<XReal> = (0..n).map(|k| XReal::from_f64(k as f64 * scan_step, prec)).collect();
    let mags: Vec<f64> = f.psi_grid(&zs).iter().map(|v| v.abs().to_f64()).collect();
    let mut found = Vec::new();
    for k in 1..n.saturating_sub(1) {
        if !(mags[k] <= mags[k - 1] && mags[k] <= mags[k + 1]) {
            continue;
        }
        let (z, m) = golden_min(f, (k - 1) as f64 * scan_step, (k + 1) as f64 * scan_step);
        let local = mags[k - 1].max(mags[k + 1]);
        if m < rel_threshold * local {
            found.push(XReal::from_f64(z, prec));
            if found.len() == count {
                break;
            }
        }
    }
    if found.len() < count {
        return Err(Error::InsufficientZerosFound { found: found.len(), wanted: count, limit: z_max });
    }
    Ok(ReferenceZeros { id: f.spec.kernel.describe(), zeros: found, provenance: Provenance::MagnitudeMinimum })
}

fn golden_min(f: &BAFunction, mut a: f64, mut b: f64) -> (f64, f64) {
    let prec = f.prec;
    let g = |z: f64| f.psi_real(&XReal::from_f64(z, prec)).abs().to_f64();
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    while b - a > BISECT_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    let z = 0.5 * (a + b);
    (z, g(z))
}
