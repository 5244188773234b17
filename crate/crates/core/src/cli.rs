//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::baker_akhiezer::{psi_magnitude_minima, psi_zeros, reference_table, BAFunction, DEFAULT_Z_MAX};
use crate::calibration::{calibrate, estimate_zeros, fixed_airy, ordered_real_roots, RootOrder};
use crate::error::{Error, Result};
use crate::master_field::{optimize, saddle_solve, MasterConfig, Momenta, OptimizerOptions, SaddleConfig};
use crate::matrix_model::{build_potential, q_polynomial, PotentialV, DEFAULT_MAX_N};
use crate::num::{Precision, XReal};
use crate::pipeline::{
    odd_couplings, run_row, run_table1, CouplingSource, ExactSource, RunSettings, PUBLISHED_RAMANUJAN,
    PUBLISHED_RIEMANN, TABLE1_ROWS,
};
use crate::potentials::{taylor_u, Decimal, KernelKind, PotentialConfig, PotentialSpec};
use crate::roots::{find_roots_with, reconstruction_error, RootOptions, DEFAULT_IM_TOLERANCE};
use crate::scaling::{cosh_couplings, double_scaling, rescale_potential, GMode, ModelParams, ScaledPotential};

const CSV_HELP: &str = "CSV outputs:\n  solve --csv:   re,im,is_real (one row per root)\n  psi --csv:     z,re,im\n  table1 --csv:  id,z1_est,z2_est,z3_est,z1_exact,z2_exact,z3_exact,on_cl,pairs,A,c\n\nExit codes: 0 ok, 2 configuration error, 3 numerical failure.";

#[derive(Parser, Debug)]
#[command(name = "xi-lab", version, about = "Characteristic polynomials, zeros and Baker-Akhiezer functions of (p,1) two-matrix models", after_help = CSV_HELP)]
pub struct Cli {
    /// Working precision in decimal digits (default 60).
    #[arg(long, global = true, env = "XI_LAB_PRECISION")]
    pub precision: Option<u32>,
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the JSON result to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Taylor-expand a potential and print its normalized couplings.
    Expand(ModelArgs),
    /// Build Q_N and find its roots.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        /// Imaginary-part tolerance for calling a root real.
        #[arg(long, default_value_t = DEFAULT_IM_TOLERANCE)]
        im_tol: f64,
        /// Write roots as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate the Baker-Akhiezer function on a real grid.
    Psi {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z_min: f64,
        #[arg(long, default_value_t = 20.0)]
        z_max: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Real zeros of the Baker-Akhiezer function, or a stored reference table.
    Zeros {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long)]
        p: Option<usize>,
        /// Print a stored reference table instead of integrating.
        #[arg(long)]
        reference: Option<String>,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long, default_value_t = DEFAULT_Z_MAX)]
        z_max: f64,
        /// Locate minima of |psi| (for kernels with complex psi on the real axis).
        #[arg(long)]
        minima: bool,
    },
    /// Fit z = A b + c from roots to reference zeros.
    Calibrate {
        #[command(flatten)]
        model: ModelArgs,
        /// Run a named table row end to end instead.
        #[arg(long)]
        row: Option<String>,
        #[arg(long)]
        reference: Option<String>,
        #[arg(long, value_enum, default_value_t = OrderArg::Ascending)]
        order: OrderArg,
        /// Use the fixed Airy map instead of a fit.
        #[arg(long)]
        fixed_airy: bool,
    },
    /// Run the summary table of all eight pipelines.
    Table1 {
        /// Comma-separated subset of rows.
        #[arg(long, value_delimiter = ',')]
        rows: Vec<String>,
        #[arg(long = "N", default_value_t = 16)]
        n: usize,
        #[arg(long, value_enum, default_value_t = CouplingArg::Derived)]
        couplings: CouplingArg,
        #[arg(long, value_enum, default_value_t = ExactArg::Table)]
        exact: ExactArg,
        #[arg(long, value_enum)]
        g_mode: Option<GModeArg>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Minimize the quenched master-field cost.
    Master {
        #[command(flatten)]
        model: ModelArgs,
        /// Noise scale of the Hermitian Gaussian source terms.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        /// Obstruction threshold (default 1e-10 (1 + C_0)).
        #[arg(long)]
        tau: Option<f64>,
        /// Momenta uniform on [-bound, bound].
        #[arg(long, default_value_t = std::f64::consts::PI)]
        bound: f64,
        /// Fixed momenta instead of random ones.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        momenta: Vec<f64>,
        /// Let the first matrix be general complex instead of Hermitian.
        #[arg(long)]
        general_a: bool,
    },
    /// Solve the eigenvalue saddle-point equations.
    Saddle {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct PotentialArgs {
    /// riemann | ramanujan | eta_gamma | cosh | monomial | explicit
    #[arg(long)]
    pub kind: Option<String>,
    /// Degree of a monomial potential.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Couplings s_1, s_2, ... of an explicit potential.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub s: Vec<String>,
    #[arg(long)]
    pub max_terms: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[command(flatten)]
    pub pot: PotentialArgs,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub g_mode: Option<GModeArg>,
    /// Fixed coupling g (overrides the g mode).
    #[arg(long)]
    pub g: Option<String>,
    /// Use the Gaussian potential -(A-1)^2/4.
    #[arg(long)]
    pub hermite: bool,
    #[arg(long, value_enum, default_value_t = CouplingArg::Derived)]
    pub couplings: CouplingArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GModeArg {
    Corrected,
    Plain,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingArg {
    Derived,
    Published,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactArg {
    Table,
    Quadrature,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderArg {
    Ascending,
    Descending,
}

impl From<CouplingArg> for CouplingSource {
    fn from(c: CouplingArg) -> Self {
        match c {
            CouplingArg::Derived => CouplingSource::Derived,
            CouplingArg::Published => CouplingSource::Published,
        }
    }
}

/// Optional TOML run configuration; unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub precision: Option<u32>,
    pub p: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub g_mode: Option<GModeArg>,
    pub g: Option<Decimal>,
    pub seed: Option<u64>,
    pub potential: Option<PotentialConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
    }
}

struct Ctx {
    prec: Precision,
    cfg: RunConfig,
    json: bool,
    out: Option<PathBuf>,
}

impl Ctx {
    /// Prints `text` or the JSON value, and writes JSON to `--out` when given.
    fn emit<W: Write>(&self, w: &mut W, text: &str, value: serde_json::Value) -> Result<()> {
        let s = serde_json::to_string_pretty(&value)?;
        if self.json {
            writeln!(w, "{s}")?;
        } else {
            write!(w, "{text}")?;
        }
        if let Some(path) = &self.out {
            std::fs::write(path, s + "\n")?;
        }
        Ok(())
    }

    fn potential_config(&self, pot: &PotentialArgs, p: Option<usize>) -> Result<PotentialConfig> {
        let base = self.cfg.potential.clone();
        let kind = match (&pot.kind, &base) {
            (Some(k), _) => k.parse::<KernelKind>()?,
            (None, Some(b)) => b.kind,
            (None, None) => return Err(Error::Config("no potential given (use --kind)".into())),
        };
        let from_cfg = base.filter(|b| b.kind == kind && pot.kind.is_none());
        let s = if pot.s.is_empty() {
            from_cfg.as_ref().map(|b| b.s.clone()).unwrap_or_default()
        } else {
            pot.s.iter().map(|v| v.parse::<Decimal>()).collect::<Result<Vec<_>>>()?
        };
        Ok(PotentialConfig {
            kind,
            p: p.or(from_cfg.as_ref().and_then(|b| b.p)).or(self.cfg.p),
            degree: pot.degree.or(from_cfg.as_ref().and_then(|b| b.degree)),
            s,
            max_terms: pot.max_terms.or(from_cfg.as_ref().and_then(|b| b.max_terms)),
            term_tolerance: from_cfg.and_then(|b| b.term_tolerance),
        })
    }

    fn p_of(&self, m: &ModelArgs) -> Result<usize> {
        m.p.or(self.cfg.p)
            .or(self.cfg.potential.as_ref().and_then(|b| b.p))
            .ok_or_else(|| Error::Config("--p is required".into()))
    }

    fn n_of(&self, m: &ModelArgs) -> Result<usize> {
        let n = m.n.or(self.cfg.n).ok_or_else(|| Error::Config("--N is required".into()))?;
        if n == 0 || n > DEFAULT_MAX_N {
            return Err(Error::Config(format!("N must be in 1..={DEFAULT_MAX_N}, got {n}")));
        }
        Ok(n)
    }

    fn g_mode_of(&self, m: &ModelArgs) -> Result<GMode> {
        if let Some(g) = m.g.as_ref().map(|g| g.parse::<Decimal>()).transpose()?.or(self.cfg.g.clone()) {
            return Ok(GMode::Fixed(g.to_xreal(self.prec)?));
        }
        Ok(match m.g_mode.or(self.cfg.g_mode) {
            Some(GModeArg::Plain) => GMode::Plain,
            _ => GMode::Corrected,
        })
    }

    /// Normal-form couplings for the model's potential.
    fn scaled(&self, m: &ModelArgs) -> Result<ScaledPotential> {
        let prec = self.prec;
        let p = self.p_of(m)?;
        let pc = self.potential_config(&m.pot, Some(p))?;
        match (pc.kind, m.couplings) {
            (KernelKind::Explicit, _) => {
                let s = pc.s.iter().map(|d| d.to_xreal(prec)).collect::<Result<Vec<_>>>()?;
                if s.len() > p - 1 {
                    return Err(Error::Config(format!("at most {} couplings at p = {p}", p - 1)));
                }
                Ok(ScaledPotential::from_couplings(p, s, prec))
            }
            (KernelKind::Riemann | KernelKind::Ramanujan, CouplingArg::Published) => {
                if p != 7 {
                    return Err(Error::Config("published couplings exist only at p = 7".into()));
                }
                let vals = if pc.kind == KernelKind::Riemann { &PUBLISHED_RIEMANN } else { &PUBLISHED_RAMANUJAN };
                Ok(ScaledPotential::from_couplings(p, odd_couplings(vals, prec)?, prec))
            }
            (KernelKind::Cosh, _) if p % 2 == 1 => cosh_couplings(p, prec),
            _ => {
                let spec = pc.to_spec(prec)?;
                rescale_potential(&taylor_u(&spec, p + 1)?, p)
            }
        }
    }

    fn model(&self, m: &ModelArgs) -> Result<(Option<ScaledPotential>, ModelParams, PotentialV)> {
        let n = self.n_of(m)?;
        if m.hermite {
            let mode = match self.g_mode_of(m)? {
                GMode::Corrected => GMode::Plain,
                other => other,
            };
            let params = double_scaling(2, n, &[], mode, self.prec)?;
            return Ok((None, params, PotentialV::hermite(self.prec)));
        }
        let sp = self.scaled(m)?;
        let params = double_scaling(sp.p, n, &sp.s, self.g_mode_of(m)?, self.prec)?;
        let v = build_potential(&params);
        Ok((Some(sp), params, v))
    }

    fn spec(&self, pot: &PotentialArgs, p: Option<usize>) -> Result<PotentialSpec> {
        self.potential_config(pot, p)?.to_spec(self.prec)
    }
}

fn sig(v: &XReal) -> String {
    v.to_sig_string(6)
}

fn open_csv(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn expand<W: Write>(ctx: &Ctx, m: &ModelArgs, w: &mut W) -> Result<()> {
    let p = ctx.p_of(m)?;
    let pc = ctx.potential_config(&m.pot, Some(p))?;
    let sp = ctx.scaled(m)?;
    let taylor = match pc.kind {
        KernelKind::Explicit => None,
        _ => Some(taylor_u(&pc.to_spec(ctx.prec)?, p + 1)?),
    };
    let mut text = String::new();
    if let Some(t) = &taylor {
        for (n, a) in t.coeffs().iter().enumerate() {
            text.push_str(&format!("a_{n} = {}\n", sig(a)));
        }
    }
    text.push_str(&format!("lambda = {}\n", sig(&sp.lambda)));
    for (i, s) in sp.s.iter().enumerate() {
        text.push_str(&format!("s_{} = {}\n", i + 1, sig(s)));
    }
    ctx.emit(
        w,
        &text,
        json!({
            "precision_digits": ctx.prec.digits(),
            "kind": pc.kind,
            "p": p,
            "taylor": taylor.as_ref().map(|t| t.coeffs().to_vec()),
            "potential": sp,
        }),
    )
}

fn solve<W: Write>(ctx: &Ctx, m: &ModelArgs, im_tol: f64, csv: Option<&Path>, w: &mut W) -> Result<()> {
    let (sp, params, v) = ctx.model(m)?;
    let q = q_polynomial(&params, &v, params.n);
    let roots = find_roots_with(&q, &RootOptions { im_tolerance: im_tol, ..RootOptions::default() })?;
    if let Some(path) = csv {
        roots.write_csv(open_csv(path)?)?;
    }
    let mut text = format!(
        "p = {}, N = {}, g = {} ({}), eps = {}\nQ_{}(b) coefficients, constant term first:\n",
        params.p,
        params.n,
        params.g.to_sig_string(10),
        params.g_mode.label(),
        params.epsilon.to_sig_string(10),
        params.n
    );
    for (k, c) in q.coeffs().iter().enumerate() {
        text.push_str(&format!("  b^{k}: {}\n", sig(c)));
    }
    text.push_str("roots:\n");
    for r in &roots.roots {
        if r.im.is_zero() {
            text.push_str(&format!("  {}\n", sig(&r.re)));
        } else {
            text.push_str(&format!("  {} {} {}i\n", sig(&r.re), if r.im.is_sign_negative() { "-" } else { "+" }, sig(&r.im.abs())));
        }
    }
    text.push_str(&format!(
        "complex pairs: {}, on critical line: {}\n",
        roots.n_complex_pairs(),
        if roots.on_critical_line { "yes" } else { "no" }
    ));
    ctx.emit(
        w,
        &text,
        json!({
            "precision_digits": ctx.prec.digits(),
            "params": params,
            "scaled_potential": sp,
            "potential": v,
            "q": q,
            "roots": roots,
            "reconstruction_error": reconstruction_error(&q, &roots),
        }),
    )
}

fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) {
        return Err(Error::Config("grid needs step > 0 and z_max >= z_min".into()));
    }
    let n = ((hi - lo) / step).floor() as usize + 1;
    Ok((0..n).map(|k| lo + k as f64 * step).collect())
}

fn psi<W: Write>(ctx: &Ctx, pot: &PotentialArgs, p: Option<usize>, zr: (f64, f64, f64), csv: Option<&Path>, w: &mut W) -> Result<()> {
    let f = BAFunction::new(ctx.spec(pot, p)?)?;
    let zs: Vec<XReal> = grid(zr.0, zr.1, zr.2)?.into_iter().map(|z| XReal::from_f64(z, ctx.prec)).collect();
    if let Some(path) = csv {
        f.write_csv(&zs, open_csv(path)?)?;
    }
    let vals = f.psi_grid(&zs);
    let mut text = String::new();
    for (z, v) in zs.iter().zip(&vals) {
        text.push_str(&format!("{:>10}  {}  {}\n", z.to_sig_string(6), sig(&v.re), sig(&v.im)));
    }
    let rows: Vec<_> = zs.iter().zip(&vals).map(|(z, v)| json!({"z": z, "psi": v})).collect();
    ctx.emit(w, &text, json!({"precision_digits": ctx.prec.digits(), "kernel": f.spec.kernel.describe(), "values": rows}))
}

fn zeros<W: Write>(ctx: &Ctx, pot: &PotentialArgs, p: Option<usize>, reference: Option<&str>, opts: (usize, f64, f64, bool), w: &mut W) -> Result<()> {
    let (count, step, z_max, minima) = opts;
    let z = match reference {
        Some(id) => reference_table(id, ctx.prec)?,
        None => {
            let f = BAFunction::new(ctx.spec(pot, p)?)?;
            if minima {
                psi_magnitude_minima(&f, count, step, z_max, 0.5)?
            } else {
                psi_zeros(&f, count, step, z_max)?
            }
        }
    };
    let text: String = z.zeros.iter().enumerate().map(|(k, v)| format!("z_{} = {}\n", k + 1, sig(v))).collect();
    ctx.emit(w, &text, json!({"precision_digits": ctx.prec.digits(), "zeros": z}))
}

fn settings(ctx: &Ctx, n: usize, couplings: CouplingArg, exact: ExactArg, g_mode: Option<GModeArg>) -> RunSettings {
    let mut s = RunSettings::new(n, ctx.prec);
    s.couplings = couplings.into();
    s.exact = match exact {
        ExactArg::Table => ExactSource::Table,
        ExactArg::Quadrature => ExactSource::Quadrature,
    };
    s.g_mode = match g_mode.or(ctx.cfg.g_mode) {
        Some(GModeArg::Plain) => Some(GMode::Plain),
        _ => None,
    };
    s
}

fn calibrate_cmd<W: Write>(ctx: &Ctx, m: &ModelArgs, row: Option<&str>, reference: Option<&str>, order: OrderArg, fixed: bool, w: &mut W) -> Result<()> {
    let (cal, estimates, exact) = if let Some(id) = row {
        let n = m.n.or(ctx.cfg.n).unwrap_or(16);
        let r = run_row(id, &settings(ctx, n, m.couplings, ExactArg::Table, m.g_mode))?;
        (r.calibration, r.estimates, r.reference)
    } else {
        let (_, params, v) = ctx.model(m)?;
        let roots = find_roots_with(&q_polynomial(&params, &v, params.n), &RootOptions::default())?;
        let id = reference.ok_or_else(|| Error::Config("--reference or --row is required".into()))?;
        let refs = reference_table(id, ctx.prec)?;
        let order = match order {
            OrderArg::Ascending => RootOrder::Ascending,
            OrderArg::Descending => RootOrder::Descending,
        };
        let cal = if fixed { fixed_airy(ctx.prec) } else { calibrate(&roots, &refs, order)? };
        let est = estimate_zeros(&cal, &ordered_real_roots(&roots, cal.order));
        (cal, est, refs)
    };
    let mut text = format!("A = {}\nc = {}\n", sig(&cal.a), sig(&cal.c));
    for (k, e) in estimates.iter().take(exact.zeros.len()).enumerate() {
        text.push_str(&format!("z_{} = {}  (exact {})\n", k + 1, sig(e), exact.zeros[k].to_sig_string(7)));
    }
    ctx.emit(
        w,
        &text,
        json!({"precision_digits": ctx.prec.digits(), "calibration": cal, "estimates": estimates, "reference": exact}),
    )
}

fn table1<W: Write>(ctx: &Ctx, rows: &[String], s: &RunSettings, csv: Option<&Path>, w: &mut W) -> Result<()> {
    let ids: Vec<&str> = if rows.is_empty() { TABLE1_ROWS.to_vec() } else { rows.iter().map(String::as_str).collect() };
    let report = run_table1(&ids, s)?;
    if let Some(path) = csv {
        report.write_csv(open_csv(path)?)?;
    }
    ctx.emit(w, &report.to_text(), serde_json::to_value(&report)?)
}

fn master<W: Write>(ctx: &Ctx, m: &ModelArgs, c: MasterOpts, w: &mut W) -> Result<()> {
    let (_, params, v) = ctx.model(m)?;
    let mut cfg = MasterConfig::new(params.n, params.g.to_f64(), &v);
    cfg.seed = c.seed.or(ctx.cfg.seed).unwrap_or(1);
    cfg.sigma = c.sigma;
    cfg.tau = c.tau;
    cfg.hermitian_a = !c.general_a;
    cfg.momenta = if c.momenta.is_empty() { Momenta::Uniform { bound: c.bound } } else { Momenta::Fixed { values: c.momenta } };
    cfg.optimizer = OptimizerOptions { max_iters: c.max_iters, restarts: c.restarts, ..OptimizerOptions::default() };
    let r = optimize(&cfg)?;
    let text = format!(
        "N = {}, g = {}\nbest cost C = {:e} (restart {}, {} iterations)\nthreshold tau = {:e}\nobstruction: {}\n",
        r.n,
        params.g.to_sig_string(10),
        r.cost,
        r.best_restart,
        r.iterations,
        r.tau,
        if r.obstruction { "yes" } else { "no" }
    );
    ctx.emit(w, &text, json!({"precision_digits": ctx.prec.digits(), "config": cfg, "result": r}))
}

fn saddle<W: Write>(ctx: &Ctx, m: &ModelArgs, max_iters: usize, w: &mut W) -> Result<()> {
    let (_, params, v) = ctx.model(m)?;
    let mut cfg = SaddleConfig::new(params.n, params.g.to_f64(), &v);
    cfg.max_iters = max_iters;
    let r = saddle_solve(&cfg)?;
    let mut text = String::new();
    for (a, b) in r.a.iter().zip(&r.b) {
        text.push_str(&format!("a = {a:.12}  b = {b:.12}\n"));
    }
    text.push_str(&format!(
        "residual = {:e}, iterations = {}, converged = {}\n",
        r.residual_norm, r.iterations, r.converged
    ));
    ctx.emit(w, &text, json!({"precision_digits": ctx.prec.digits(), "config": cfg, "result": r}))
}

struct MasterOpts {
    sigma: f64,
    seed: Option<u64>,
    restarts: usize,
    max_iters: usize,
    tau: Option<f64>,
    bound: f64,
    momenta: Vec<f64>,
    general_a: bool,
}

/// Executes a parsed command line, writing the primary output to `w`.
pub fn run<W: Write>(cli: Cli, w: &mut W) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let prec = Precision::new(cli.precision.or(cfg.precision).unwrap_or(Precision::DEFAULT_DIGITS))?;
    let ctx = Ctx { prec, cfg, json: cli.json, out: cli.out };
    match cli.command {
        Command::Expand(m) => expand(&ctx, &m, w),
        Command::Solve { model, im_tol, csv } => solve(&ctx, &model, im_tol, csv.as_deref(), w),
        Command::Psi { pot, p, z_min, z_max, step, csv } => psi(&ctx, &pot, p, (z_min, z_max, step), csv.as_deref(), w),
        Command::Zeros { pot, p, reference, count, step, z_max, minima } => {
            zeros(&ctx, &pot, p, reference.as_deref(), (count, step, z_max, minima), w)
        }
        Command::Calibrate { model, row, reference, order, fixed_airy } => {
            calibrate_cmd(&ctx, &model, row.as_deref(), reference.as_deref(), order, fixed_airy, w)
        }
        Command::Table1 { rows, n, couplings, exact, g_mode, csv } => {
            let s = settings(&ctx, n, couplings, exact, g_mode);
            table1(&ctx, &rows, &s, csv.as_deref(), w)
        }
        Command::Master { model, sigma, seed, restarts, max_iters, tau, bound, momenta, general_a } => master(
            &ctx,
            &model,
            MasterOpts { sigma, seed, restarts, max_iters, tau, bound, momenta, general_a },
            w,
        ),
        Command::Saddle { model, max_iters } => saddle(&ctx, &model, max_iters, w),
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> Result<String> {
        let cli = Cli::try_parse_from(std::iter::once("xi-lab").chain(args.iter().copied())).unwrap();
        let mut out = Vec::new();
        run(cli, &mut out)?;
        Ok(String::from_utf8(out).unwrap())
    }

    #[test]
    fn expand_monomial_is_trivial() {
        let out = run_str(&["--precision", "30", "expand", "--kind", "monomial", "--degree", "8", "--p", "7"]).unwrap();
        assert!(out.contains("s_1 = 0") && out.contains("s_6 = 0"), "{out}");
    }

    #[test]
    fn expand_cosh_closed_form() {
        let out = run_str(&["--json", "expand", "--kind", "cosh", "--p", "7"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["precision_digits"], 60);
        let s1: f64 = v["potential"]["s"][0].as_str().unwrap().parse().unwrap();
        assert!((s1 - 8.42573).abs() < 1e-4);
    }

    #[test]
    fn hermite_solve_reports_real_roots() {
        let out = run_str(&["solve", "--hermite", "--N", "16", "--g", "0.0625"]).unwrap();
        assert!(out.contains("complex pairs: 0, on critical line: yes"), "{out}");
    }

    #[test]
    fn config_errors() {
        let e = run_str(&["solve", "--N", "4"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = run_str(&["--precision", "5", "solve", "--hermite", "--N", "4"]).unwrap_err();
        assert!(matches!(e, Error::InvalidPrecision(5)));
        let e = run_str(&["table1", "--rows", "bogus"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn run_config_rejects_unknown_keys() {
        assert!(toml::from_str::<RunConfig>("precision = 40\nbogus = 1\n").is_err());
        let c: RunConfig = toml::from_str("N = 8\np = 7\n[potential]\nkind = \"explicit\"\np = 7\ns = [1, 0, 3]\n").unwrap();
        assert_eq!(c.n, Some(8));
        assert_eq!(c.potential.unwrap().s.len(), 3);
    }
}
