//! Linear maps `z = A b + c` from polynomial roots to reference zeros, and
//! the summary report built from them.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::baker_akhiezer::ReferenceZeros;
use crate::error::{Error, Result};
use crate::num::{fmt_sig, Precision, XComplex, XReal};
use crate::roots::RootSet;

/// Which end of the real spectrum is matched to the lowest reference zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootOrder {
    /// Most negative root first.
    Ascending,
    /// Largest root first.
    Descending,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMode {
    /// Two-point fit through the anchor zeros.
    Fit,
    /// `y = -8 2^{1/6} (sqrt 2 - b)`, used for the Airy limit of the Gaussian model.
    FixedAiry,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    #[serde(rename = "A")]
    pub a: XReal,
    pub c: XReal,
    /// Positions in the ordered root list used as anchors.
    pub anchors: (usize, usize),
    pub reference: String,
    pub order: RootOrder,
    pub mode: CalibrationMode,
}

/// Real roots in the requested order; complex roots are skipped.
pub fn ordered_real_roots(rs: &RootSet, order: RootOrder) -> Vec<XReal> {
    let mut r = rs.real_roots();
    r.sort_by(|a, b| a.total_cmp(b));
    if order == RootOrder::Descending {
        r.reverse();
    }
    r
}

/// Fits `z = A b + c` through `roots[i] -> ref[i]` for the two anchor indices.
pub fn fit_linear(roots: &[XComplex], refs: &ReferenceZeros, which: (usize, usize), order: RootOrder) -> Result<Calibration> {
    let (i, j) = which;
    let need = i.max(j) + 1;
    if roots.len() < need {
        return Err(Error::NotEnoughRoots { need, have: roots.len() });
    }
    if refs.zeros.len() < need {
        return Err(Error::Config(format!("reference {} has only {} zeros", refs.id, refs.zeros.len())));
    }
    for k in [i, j] {
        if !roots[k].im.is_zero() {
            return Err(Error::ComplexAnchor { index: k });
        }
    }
    let (b1, b2) = (&roots[i].re, &roots[j].re);
    if b1 == b2 {
        return Err(Error::DegenerateFit);
    }
    let (z1, z2) = (&refs.zeros[i], &refs.zeros[j]);
    let a = (z2 - z1) / (b2 - b1);
    let c = z1 - &(&a * b1);
    Ok(Calibration { a, c, anchors: which, reference: refs.id.clone(), order, mode: CalibrationMode::Fit })
}

/// Fits the first two ordered real roots of `rs` to the first two reference zeros.
pub fn calibrate(rs: &RootSet, refs: &ReferenceZeros, order: RootOrder) -> Result<Calibration> {
    let roots: Vec<XComplex> = ordered_real_roots(rs, order).into_iter().map(XComplex::from_real).collect();
    fit_linear(&roots, refs, (0, 1), order)
}

/// The fixed Airy map `y = 8 2^{1/6} b - 8 2^{1/6} sqrt 2`, applied to descending roots.
pub fn fixed_airy(prec: Precision) -> Calibration {
    let k = XReal::from_i32(2, prec).powf(&XReal::ratio(1, 6, prec)) * 8;
    let c = -(&k * &XReal::from_i32(2, prec).sqrt());
    Calibration {
        a: k,
        c,
        anchors: (0, 1),
        reference: "airy".into(),
        order: RootOrder::Descending,
        mode: CalibrationMode::FixedAiry,
    }
}

pub fn estimate_zeros(cal: &Calibration, roots: &[XReal]) -> Vec<XReal> {
    roots.iter().map(|b| &cal.a * b + &cal.c).collect()
}

/// One line of the summary table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroRow {
    pub id: String,
    pub label: String,
    pub u: String,
    pub p: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub g: XReal,
    pub g_mode: String,
    pub couplings: String,
    pub estimates: Vec<XReal>,
    pub exact: Vec<XReal>,
    pub exact_source: String,
    pub z3_estimated: XReal,
    pub z3_exact: XReal,
    pub on_cl_finite_n: bool,
    pub n_complex_pairs: usize,
    #[serde(rename = "A")]
    pub a: XReal,
    pub c: XReal,
    pub calibration: CalibrationMode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowOutcome {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<ZeroRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroReport {
    pub precision_digits: u32,
    pub rows: Vec<RowOutcome>,
}

/// Assembles the report in the order of `expected`; missing ids are an error.
pub fn build_table1(expected: &[&str], outcomes: Vec<RowOutcome>, prec: Precision) -> Result<ZeroReport> {
    let mut rows = Vec::with_capacity(expected.len());
    for id in expected {
        let r = outcomes
            .iter()
            .find(|o| o.id == *id)
            .cloned()
            .ok_or_else(|| Error::MissingPipeline(id.to_string()))?;
        rows.push(r);
    }
    Ok(ZeroReport { precision_digits: prec.digits(), rows })
}

impl ZeroReport {
    pub fn row(&self, id: &str) -> Option<&ZeroRow> {
        self.rows.iter().find(|r| r.id == id).and_then(|r| r.row.as_ref())
    }

    /// Aligned plain-text table, numbers to six significant digits.
    pub fn to_text(&self) -> String {
        let header = ["function", "U(x)", "z3 (est)", "z3 exact", "on CL", "pairs", "A", "c"];
        let mut lines: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for o in &self.rows {
            match (&o.row, &o.error) {
                (Some(r), _) => lines.push(vec![
                    r.label.clone(),
                    r.u.clone(),
                    r.z3_estimated.to_sig_string(6),
                    r.z3_exact.to_sig_string(7),
                    if r.on_cl_finite_n { "Y".into() } else { "N".into() },
                    r.n_complex_pairs.to_string(),
                    r.a.to_sig_string(6),
                    r.c.to_sig_string(6),
                ]),
                (None, e) => {
                    let msg = e.clone().unwrap_or_else(|| "not run".into());
                    lines.push(vec![o.id.clone(), format!("FAILED: {msg}")]);
                }
            }
        }
        let cols = header.len();
        let mut width = vec![0usize; cols];
        for l in &lines {
            if l.len() == cols {
                for (k, cell) in l.iter().enumerate() {
                    width[k] = width[k].max(cell.chars().count());
                }
            }
        }
        let mut out = String::new();
        for l in &lines {
            let cells: Vec<String> = l
                .iter()
                .enumerate()
                .map(|(k, cell)| {
                    if l.len() == cols {
                        format!("{cell:<w$}", w = width[k])
                    } else {
                        cell.clone()
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }

    /// `id,z1_est,z2_est,z3_est,z1_exact,z2_exact,z3_exact,on_cl,pairs,A,c`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "id", "z1_est", "z2_est", "z3_est", "z1_exact", "z2_exact", "z3_exact", "on_cl", "pairs", "A", "c",
        ])?;
        for r in self.rows.iter().filter_map(|o| o.row.as_ref()) {
            let mut rec = vec![r.id.clone()];
            for k in 0..3 {
                rec.push(r.estimates.get(k).map(|v| fmt_sig(v.to_f64(), 12)).unwrap_or_default());
            }
            for k in 0..3 {
                rec.push(r.exact.get(k).map(|v| fmt_sig(v.to_f64(), 12)).unwrap_or_default());
            }
            rec.push(r.on_cl_finite_n.to_string());
            rec.push(r.n_complex_pairs.to_string());
            rec.push(fmt_sig(r.a.to_f64(), 12));
            rec.push(fmt_sig(r.c.to_f64(), 12));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baker_akhiezer::Provenance;
    use proptest::prelude::*;

    fn p() -> Precision {
        Precision::DEFAULT
    }

    fn refs(v: &[f64]) -> ReferenceZeros {
        ReferenceZeros {
            id: "test".into(),
            zeros: v.iter().map(|&x| XReal::from_f64(x, p())).collect(),
            provenance: Provenance::Table,
        }
    }

    fn reals(v: &[f64]) -> Vec<XComplex> {
        v.iter().map(|&x| XComplex::from_f64(x, 0.0, p())).collect()
    }

    #[test]
    fn identity_fit() {
        let cal = fit_linear(&reals(&[0.0, 1.0]), &refs(&[0.0, 1.0]), (0, 1), RootOrder::Ascending).unwrap();
        assert!((&cal.a - 1).abs() < p().tolerance(3));
        assert!(cal.c.abs() < p().tolerance(3));
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_linear(&reals(&[0.5, 0.5]), &refs(&[1.0, 2.0]), (0, 1), RootOrder::Ascending),
            Err(Error::DegenerateFit)
        ));
        let mut r = reals(&[0.0, 1.0]);
        r[1].im = XReal::from_f64(0.2, p());
        assert!(matches!(
            fit_linear(&r, &refs(&[1.0, 2.0]), (0, 1), RootOrder::Ascending),
            Err(Error::ComplexAnchor { index: 1 })
        ));
        assert!(matches!(
            fit_linear(&reals(&[0.0]), &refs(&[1.0, 2.0]), (0, 1), RootOrder::Ascending),
            Err(Error::NotEnoughRoots { .. })
        ));
    }

    #[test]
    fn fixed_airy_map_constants() {
        let cal = fixed_airy(p());
        let k = 8.0 * 2f64.powf(1.0 / 6.0);
        assert!((cal.a.to_f64() - k).abs() < 1e-12);
        assert!((cal.c.to_f64() + k * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn missing_row_is_reported() {
        let outcomes = vec![RowOutcome { id: "airy".into(), row: None, error: Some("x".into()) }];
        assert!(matches!(build_table1(&["airy", "riemann"], outcomes, p()), Err(Error::MissingPipeline(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn estimates_are_affine_invariant(
            b in prop::collection::vec(-3.0f64..3.0, 4),
            lam in prop::sample::select(vec![-2.5f64, -0.3, 0.7, 4.0]),
            mu in -5.0f64..5.0,
        ) {
            let mut b = b.clone();
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
            prop_assume!(b[1] - b[0] > 1e-3);
            let r = refs(&[14.1347, 21.022, 25.0109, 30.4249]);
            let xs: Vec<XReal> = b.iter().map(|&v| XReal::from_f64(v, p())).collect();
            let ys: Vec<XReal> = xs.iter().map(|v| v * &XReal::from_f64(lam, p()) + XReal::from_f64(mu, p())).collect();
            let c1 = fit_linear(&xs.iter().cloned().map(XComplex::from_real).collect::<Vec<_>>(), &r, (0, 1), RootOrder::Ascending).unwrap();
            let c2 = fit_linear(&ys.iter().cloned().map(XComplex::from_real).collect::<Vec<_>>(), &r, (0, 1), RootOrder::Ascending).unwrap();
            let e1 = estimate_zeros(&c1, &xs);
            let e2 = estimate_zeros(&c2, &ys);
            for (u, v) in e1.iter().zip(&e2) {
                prop_assert!((u - v).abs() < p().tolerance(20));
            }
            for k in 0..2 {
                prop_assert!(((&e1[k] - &r.zeros[k]) / &r.zeros[k]).abs().to_f64() < 1e-12);
            }
        }
    }
}
