//! End-to-end runs: potential -> couplings -> `Q_N` -> roots -> calibrated zeros.

use rayon::prelude::*;
use serde::Serialize;

use crate::baker_akhiezer::{psi_zeros, reference_table, BAFunction, ReferenceZeros, DEFAULT_Z_MAX};
use crate::calibration::{
    build_table1, calibrate, estimate_zeros, fixed_airy, ordered_real_roots, Calibration, RootOrder, RowOutcome,
    ZeroReport, ZeroRow,
};
use crate::error::{Error, Result};
use crate::matrix_model::{build_potential, q_polynomial, CharPolynomial, PotentialV};
use crate::num::{Precision, XReal};
use crate::potentials::{taylor_u, PotentialSpec};
use crate::roots::{find_roots, RootSet};
use crate::scaling::{cosh_couplings, double_scaling, rescale_potential, GMode, ModelParams, ScaledPotential};

/// Row ids in table order.
pub const TABLE1_ROWS: [&str; 8] =
    ["airy", "riemann", "ramanujan", "airy7", "airy7_m130", "airy7_p133", "kbessel", "eta_gamma"];

/// Literature couplings `(s_1, s_3, s_5)` at `p = 7`.
pub const PUBLISHED_RIEMANN: [&str; 3] = ["8.12192", "4.48349", "-1.02395"];
pub const PUBLISHED_RAMANUJAN: [&str; 3] = ["7.99487", "4.0958", "-1.22159"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSource {
    /// Computed from the Taylor expansion of the kernel.
    Derived,
    /// The rounded literature values for the Riemann and Ramanujan rows.
    Published,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactSource {
    Table,
    /// Quadrature zeros where the kernel is even and real; table otherwise.
    Quadrature,
}

#[derive(Clone, Debug)]
pub struct RunSettings {
    pub n: usize,
    pub prec: Precision,
    pub couplings: CouplingSource,
    pub exact: ExactSource,
    /// Overrides the corrected `g` for every row except Airy.
    pub g_mode: Option<GMode>,
}

impl RunSettings {
    pub fn new(n: usize, prec: Precision) -> Self {
        RunSettings { n, prec, couplings: CouplingSource::Derived, exact: ExactSource::Table, g_mode: None }
    }
}

struct RowDef {
    label: &'static str,
    p: usize,
}

fn row_def(id: &str) -> Result<RowDef> {
    let (label, p) = match id {
        "airy" => ("Ai(z)", 2),
        "riemann" => ("Riemann Xi(z)", 7),
        "ramanujan" => ("Ramanujan Xi_L(z)", 7),
        "airy7" => ("Ai_(7,1)(z)", 7),
        "airy7_m130" => ("Ai_(7,1)(z,-1,3,0)", 7),
        "airy7_p133" => ("Ai_(7,1)(z,1,3,3)", 7),
        "kbessel" => ("K_iz(1)", 7),
        "eta_gamma" => ("Gamma*eta", 19),
        other => return Err(Error::UnknownReference(other.to_string())),
    };
    Ok(RowDef { label, p })
}

pub fn odd_couplings(vals: &[&str], prec: Precision) -> Result<Vec<XReal>> {
    let mut s = vec![XReal::zero(prec); 2 * vals.len()];
    for (j, v) in vals.iter().enumerate() {
        s[2 * j] = XReal::parse(v, prec)?;
    }
    Ok(s)
}

fn explicit_row(p: usize, s: &[f64], prec: Precision) -> Result<ScaledPotential> {
    Ok(ScaledPotential::from_couplings(p, s.iter().map(|&v| XReal::from_f64(v, prec)).collect(), prec))
}

/// The normal-form potential feeding a row (Airy has none).
pub fn row_potential(id: &str, settings: &RunSettings) -> Result<Option<ScaledPotential>> {
    let prec = settings.prec;
    let def = row_def(id)?;
    let derived = |spec: PotentialSpec| -> Result<ScaledPotential> {
        let u = taylor_u(&spec, def.p + 1)?;
        rescale_potential(&u, def.p)
    };
    let published = |vals: &[&str]| -> Result<ScaledPotential> {
        Ok(ScaledPotential::from_couplings(def.p, odd_couplings(vals, prec)?, prec))
    };
    let sp = match (id, settings.couplings) {
        ("airy", _) => return Ok(None),
        ("riemann", CouplingSource::Derived) => derived(PotentialSpec::riemann(prec))?,
        ("riemann", CouplingSource::Published) => published(&PUBLISHED_RIEMANN)?,
        ("ramanujan", CouplingSource::Derived) => derived(PotentialSpec::ramanujan(prec))?,
        ("ramanujan", CouplingSource::Published) => published(&PUBLISHED_RAMANUJAN)?,
        ("airy7", _) => explicit_row(7, &[], prec)?,
        ("airy7_m130", _) => explicit_row(7, &[-1.0, 0.0, 3.0], prec)?,
        ("airy7_p133", _) => explicit_row(7, &[1.0, 0.0, 3.0, 0.0, 3.0], prec)?,
        ("kbessel", _) => cosh_couplings(7, prec)?,
        ("eta_gamma", _) => derived(PotentialSpec::eta_gamma(prec))?,
        (other, _) => return Err(Error::UnknownReference(other.to_string())),
    };
    Ok(Some(sp))
}

/// Kernel whose quadrature zeros serve as the exact reference, when available.
fn quadrature_kernel(id: &str, prec: Precision) -> Option<PotentialSpec> {
    let s: &[f64] = match id {
        "airy7" => &[],
        "airy7_m130" => &[-1.0, 0.0, 3.0],
        "airy7_p133" => &[1.0, 0.0, 3.0, 0.0, 3.0],
        "kbessel" => return Some(PotentialSpec::cosh(prec)),
        _ => return None,
    };
    PotentialSpec::explicit_f64(7, s, prec).ok()
}

/// Reference zeros for a row; quadrature runs at no more than 30 digits.
pub fn row_reference(id: &str, exact: ExactSource, prec: Precision) -> Result<ReferenceZeros> {
    let qprec = Precision::new(prec.digits().min(30))?;
    match (exact, quadrature_kernel(id, qprec)) {
        (ExactSource::Quadrature, Some(spec)) => {
            let f = BAFunction::new(spec)?;
            let mut z = psi_zeros(&f, 3, 0.05, DEFAULT_Z_MAX)?;
            z.id = id.to_string();
            z.zeros = z.zeros.iter().map(|v| v.with_precision(prec)).collect();
            Ok(z)
        }
        _ => reference_table(id, prec),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineRun {
    pub id: String,
    pub potential: Option<ScaledPotential>,
    pub params: ModelParams,
    pub q: CharPolynomial,
    pub roots: RootSet,
    pub calibration: Calibration,
    pub estimates: Vec<XReal>,
    pub reference: ReferenceZeros,
}

/// Model parameters and matrix potential for a row.
pub fn row_model(id: &str, settings: &RunSettings) -> Result<(Option<ScaledPotential>, ModelParams, PotentialV)> {
    let prec = settings.prec;
    let def = row_def(id)?;
    let sp = row_potential(id, settings)?;
    match &sp {
        None => {
            let params = double_scaling(def.p, settings.n, &[], GMode::Plain, prec)?;
            Ok((None, params, PotentialV::hermite(prec)))
        }
        Some(sp) => {
            let mode = settings.g_mode.clone().unwrap_or(GMode::Corrected);
            let params = double_scaling(def.p, settings.n, &sp.s, mode, prec)?;
            let v = build_potential(&params);
            Ok((Some(sp.clone()), params, v))
        }
    }
}

pub fn run_row(id: &str, settings: &RunSettings) -> Result<PipelineRun> {
    let prec = settings.prec;
    let (potential, params, v) = row_model(id, settings)?;
    let q = q_polynomial(&params, &v, settings.n);
    let roots = find_roots(&q)?;
    let reference = row_reference(id, settings.exact, prec)?;
    let (calibration, ordered) = if id == "airy" {
        let cal = fixed_airy(prec);
        let r = ordered_real_roots(&roots, cal.order);
        (cal, r)
    } else {
        let cal = calibrate(&roots, &reference, RootOrder::Ascending)?;
        (cal, ordered_real_roots(&roots, RootOrder::Ascending))
    };
    let estimates = estimate_zeros(&calibration, &ordered);
    Ok(PipelineRun { id: id.to_string(), potential, params, q, roots, calibration, estimates, reference })
}

impl PipelineRun {
    pub fn to_row(&self, couplings: CouplingSource) -> Result<ZeroRow> {
        let def = row_def(&self.id)?;
        let need = 3;
        if self.estimates.len() < need || self.reference.zeros.len() < need {
            return Err(Error::NotEnoughRoots { need, have: self.estimates.len() });
        }
        let u = match &self.potential {
            None => "x^3/3".to_string(),
            Some(_) if self.id == "kbessel" => PotentialSpec::cosh(self.params.precision()).kernel.describe(),
            Some(_) if self.id == "eta_gamma" => PotentialSpec::eta_gamma(self.params.precision()).kernel.describe(),
            Some(_) if self.id == "riemann" => PotentialSpec::riemann(self.params.precision()).kernel.describe(),
            Some(_) if self.id == "ramanujan" => PotentialSpec::ramanujan(self.params.precision()).kernel.describe(),
            Some(sp) => sp.to_spec()?.kernel.describe(),
        };
        let couplings = match self.id.as_str() {
            "riemann" | "ramanujan" => couplings,
            _ => CouplingSource::Derived,
        };
        Ok(ZeroRow {
            id: self.id.clone(),
            label: def.label.to_string(),
            u,
            p: self.params.p,
            n: self.params.n,
            g: self.params.g.clone(),
            g_mode: self.params.g_mode.label(),
            couplings: serde_json::to_value(couplings)?.as_str().unwrap_or_default().to_string(),
            estimates: self.estimates.iter().take(need).cloned().collect(),
            exact: self.reference.zeros.iter().take(need).cloned().collect(),
            exact_source: serde_json::to_value(self.reference.provenance)?.as_str().unwrap_or_default().to_string(),
            z3_estimated: self.estimates[2].clone(),
            z3_exact: self.reference.zeros[2].clone(),
            on_cl_finite_n: self.roots.on_critical_line,
            n_complex_pairs: self.roots.n_complex_pairs(),
            a: self.calibration.a.clone(),
            c: self.calibration.c.clone(),
            calibration: self.calibration.mode,
        })
    }
}

/// Runs the requested rows in parallel; per-row failures become error markers.
pub fn run_table1(ids: &[&str], settings: &RunSettings) -> Result<ZeroReport> {
    for id in ids {
        row_def(id)?;
    }
    let outcomes: Vec<RowOutcome> = ids
        .par_iter()
        .map(|id| match run_row(id, settings).and_then(|r| r.to_row(settings.couplings)) {
            Ok(row) => RowOutcome { id: id.to_string(), row: Some(row), error: None },
            Err(e) => RowOutcome { id: id.to_string(), row: None, error: Some(e.to_string()) },
        })
        .collect();
    build_table1(ids, outcomes, settings.prec)
}
