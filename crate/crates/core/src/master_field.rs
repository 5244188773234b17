//! Quenched master-field equations posed as nonlinear least squares, and the
//! eigenvalue saddle-point equations.
//!
//! Both run in `f64`: the quantities of interest are cost values and
//! residual norms, not digits of zeros.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix_model::PotentialV;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Distribution of the master momenta `p_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Momenta {
    Uniform { bound: f64 },
    Fixed { values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerOptions {
    pub max_iters: usize,
    pub restarts: usize,
    /// Standard deviation of the random Hermitian starting matrices.
    pub init_scale: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions { max_iters: 500, restarts: 8, init_scale: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MasterConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub g: f64,
    /// `v_k` of `V'(A) = sum_k v_k A^{k-1}`.
    pub v: Vec<f64>,
    pub seed: u64,
    pub momenta: Momenta,
    pub sigma: f64,
    pub optimizer: OptimizerOptions,
    /// Obstruction threshold; `None` means `1e-10 (1 + C_0)` with `C_0` the cost at zero.
    pub tau: Option<f64>,
    /// Restrict `a` to Hermitian matrices (`b` is always Hermitian).
    pub hermitian_a: bool,
}

impl MasterConfig {
    pub fn new(n: usize, g: f64, v: &PotentialV) -> Self {
        MasterConfig {
            n,
            g,
            v: v.to_f64(),
            seed: 1,
            momenta: Momenta::Uniform { bound: std::f64::consts::PI },
            sigma: 0.0,
            optimizer: OptimizerOptions::default(),
            tau: None,
            hermitian_a: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::Config(format!("noise scale must be non-negative, got {}", self.sigma)));
        }
        if !(self.g > 0.0) {
            return Err(Error::NonPositiveG(self.g));
        }
        if self.v.is_empty() {
            return Err(Error::Config("potential has no coefficients".into()));
        }
        match &self.momenta {
            Momenta::Fixed { values } if values.len() != self.n => Err(Error::Config(format!(
                "expected {} momenta, got {}",
                self.n,
                values.len()
            ))),
            Momenta::Fixed { values } if values.iter().any(|p| !p.is_finite()) => {
                Err(Error::Config("momenta must be finite".into()))
            }
            Momenta::Uniform { bound } if !(*bound >= 0.0) => {
                Err(Error::Config(format!("momentum bound must be non-negative, got {bound}")))
            }
            _ => Ok(()),
        }
    }
}

/// The frozen random data of one configuration: momenta and noise matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Quenched {
    pub momenta: Vec<f64>,
    pub eta1: CMat,
    pub eta2: CMat,
}

fn hermitian_gaussian(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> CMat {
    let mut m = CMat::zeros(n, n);
    for k in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        m[(k, k)] = C64::new(scale * d, 0.0);
        for l in k + 1..n {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            let z = C64::new(x, y) * (scale / std::f64::consts::SQRT_2);
            m[(k, l)] = z;
            m[(l, k)] = z.conj();
        }
    }
    m
}

/// Draws momenta and noise from `cfg.seed`.
pub fn quench(cfg: &MasterConfig) -> Quenched {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let momenta = match &cfg.momenta {
        Momenta::Uniform { bound } => (0..cfg.n).map(|_| rng.gen_range(-1.0..=1.0) * bound).collect(),
        Momenta::Fixed { values } => values.clone(),
    };
    let (eta1, eta2) = if cfg.sigma > 0.0 {
        (hermitian_gaussian(cfg.n, cfg.sigma, &mut rng), hermitian_gaussian(cfg.n, cfg.sigma, &mut rng))
    } else {
        (CMat::zeros(cfg.n, cfg.n), CMat::zeros(cfg.n, cfg.n))
    };
    Quenched { momenta, eta1, eta2 }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MasterState {
    pub a: CMat,
    pub b: CMat,
}

impl MasterState {
    pub fn zeros(n: usize) -> Self {
        MasterState { a: CMat::zeros(n, n), b: CMat::zeros(n, n) }
    }
}

fn ser_cmat<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> =
        (0..m.nrows()).map(|k| (0..m.ncols()).map(|l| [m[(k, l)].re, m[(k, l)].im]).collect()).collect();
    rows.serialize(s)
}

/// `i (p_k - p_l)` as a matrix.
fn momentum_diff(p: &[f64]) -> CMat {
    let n = p.len();
    CMat::from_fn(n, n, |k, l| I * (p[k] - p[l]))
}

/// `V'(M) = sum_k v_k M^{k-1}` by Horner.
pub fn matrix_v_prime(v: &[f64], m: &CMat) -> CMat {
    let n = m.nrows();
    let id = CMat::identity(n, n);
    let mut acc = CMat::zeros(n, n);
    for vk in v.iter().rev() {
        acc = &acc * m + &id * C64::new(*vk, 0.0);
    }
    acc
}

fn powers(m: &CMat, upto: usize) -> Vec<CMat> {
    let n = m.nrows();
    let mut out = vec![CMat::identity(n, n)];
    for k in 1..=upto {
        let next = &out[k - 1] * m;
        out.push(next);
    }
    out
}

/// Directional derivative of `V'` at `M` along `d`.
fn v_prime_linear(v: &[f64], pw: &[CMat], d: &CMat) -> CMat {
    let n = d.nrows();
    let mut acc = CMat::zeros(n, n);
    for (i, vk) in v.iter().enumerate() {
        let k = i + 1;
        if k < 2 || *vk == 0.0 {
            continue;
        }
        for j in 0..=k - 2 {
            acc += (&pw[j] * d * &pw[k - 2 - j]) * C64::new(*vk, 0.0);
        }
    }
    acc
}

/// `E = iD∘a + V'(a + I)/g - b/g - eta1`, `F = iD∘b - a/g - eta2`.
pub fn residuals(cfg: &MasterConfig, q: &Quenched, st: &MasterState) -> (CMat, CMat) {
    let n = cfg.n;
    let ig = C64::new(1.0 / cfg.g, 0.0);
    let d = momentum_diff(&q.momenta);
    let m = &st.a + CMat::identity(n, n);
    let e = d.component_mul(&st.a) + matrix_v_prime(&cfg.v, &m) * ig - &st.b * ig - &q.eta1;
    let f = d.component_mul(&st.b) - &st.a * ig - &q.eta2;
    (e, f)
}

/// `sum |E|^2 + |F|^2`.
pub fn cost(e: &CMat, f: &CMat) -> f64 {
    e.iter().chain(f.iter()).map(|z| z.norm_sqr()).sum()
}

/// Maps between `(a, b)` and a real parameter vector: Hermitian blocks store
/// the real diagonal and `(Re, Im)` of the strict upper triangle; a general
/// block stores `(Re, Im)` of every entry, column-major.
#[derive(Clone, Copy, Debug)]
pub struct Layout {
    pub n: usize,
    pub hermitian_a: bool,
}

impl Layout {
    pub fn new(cfg: &MasterConfig) -> Self {
        Layout { n: cfg.n, hermitian_a: cfg.hermitian_a }
    }

    fn block_len(&self, herm: bool) -> usize {
        if herm {
            self.n * self.n
        } else {
            2 * self.n * self.n
        }
    }

    pub fn len(&self) -> usize {
        self.block_len(self.hermitian_a) + self.block_len(true)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn pack_block(&self, m: &CMat, herm: bool, out: &mut Vec<f64>) {
        let n = self.n;
        if herm {
            for k in 0..n {
                out.push(m[(k, k)].re);
            }
            for k in 0..n {
                for l in k + 1..n {
                    out.push(m[(k, l)].re);
                    out.push(m[(k, l)].im);
                }
            }
        } else {
            for z in m.iter() {
                out.push(z.re);
                out.push(z.im);
            }
        }
    }

    fn unpack_block(&self, x: &[f64], herm: bool) -> CMat {
        let n = self.n;
        let mut m = CMat::zeros(n, n);
        if herm {
            for k in 0..n {
                m[(k, k)] = C64::new(x[k], 0.0);
            }
            let mut i = n;
            for k in 0..n {
                for l in k + 1..n {
                    let z = C64::new(x[i], x[i + 1]);
                    m[(k, l)] = z;
                    m[(l, k)] = z.conj();
                    i += 2;
                }
            }
        } else {
            for (i, z) in m.iter_mut().enumerate() {
                *z = C64::new(x[2 * i], x[2 * i + 1]);
            }
        }
        m
    }

    /// Chain rule from a complex gradient `G` (with `dC = 2 Re sum conj(G) dM`).
    fn pull_block(&self, g: &CMat, herm: bool, out: &mut Vec<f64>) {
        let n = self.n;
        if herm {
            for k in 0..n {
                out.push(2.0 * g[(k, k)].re);
            }
            for k in 0..n {
                for l in k + 1..n {
                    out.push(2.0 * (g[(k, l)].re + g[(l, k)].re));
                    out.push(2.0 * (g[(k, l)].im - g[(l, k)].im));
                }
            }
        } else {
            for z in g.iter() {
                out.push(2.0 * z.re);
                out.push(2.0 * z.im);
            }
        }
    }

    pub fn pack(&self, st: &MasterState) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.pack_block(&st.a, self.hermitian_a, &mut out);
        self.pack_block(&st.b, true, &mut out);
        DVector::from_vec(out)
    }

    pub fn unpack(&self, x: &DVector<f64>) -> MasterState {
        let na = self.block_len(self.hermitian_a);
        let s = x.as_slice();
        MasterState { a: self.unpack_block(&s[..na], self.hermitian_a), b: self.unpack_block(&s[na..], true) }
    }
}

/// Analytic gradient of the cost in the real parameterization.
pub fn gradient(cfg: &MasterConfig, q: &Quenched, st: &MasterState) -> DVector<f64> {
    let n = cfg.n;
    let ig = 1.0 / cfg.g;
    let (e, f) = residuals(cfg, q, st);
    let d = momentum_diff(&q.momenta);
    let mh = (&st.a + CMat::identity(n, n)).adjoint();
    let pw = powers(&mh, cfg.v.len().saturating_sub(2));
    let ga = -d.component_mul(&e) + v_prime_linear(&cfg.v, &pw, &e) * C64::new(ig, 0.0) - &f * C64::new(ig, 0.0);
    let gb = -d.component_mul(&f) - &e * C64::new(ig, 0.0);
    let layout = Layout::new(cfg);
    let mut out = Vec::with_capacity(layout.len());
    layout.pull_block(&ga, cfg.hermitian_a, &mut out);
    layout.pull_block(&gb, true, &mut out);
    DVector::from_vec(out)
}

fn flatten(e: &CMat, f: &CMat) -> DVector<f64> {
    let it = e.iter().map(|z| z.re).chain(e.iter().map(|z| z.im)).chain(f.iter().map(|z| z.re)).chain(f.iter().map(|z| z.im));
    DVector::from_iterator(4 * e.len(), it)
}

/// Residual vector and its Jacobian in the real parameterization.
fn linearize(cfg: &MasterConfig, q: &Quenched, layout: &Layout, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = cfg.n;
    let st = layout.unpack(x);
    let (e, f) = residuals(cfg, q, &st);
    let r = flatten(&e, &f);
    let d = momentum_diff(&q.momenta);
    let m = &st.a + CMat::identity(n, n);
    let pw = powers(&m, cfg.v.len().saturating_sub(2));
    let ig = C64::new(1.0 / cfg.g, 0.0);
    let mut jac = DMatrix::zeros(r.len(), layout.len());
    let mut unit = DVector::zeros(layout.len());
    for c in 0..layout.len() {
        unit[c] = 1.0;
        let dst = layout.unpack(&unit);
        unit[c] = 0.0;
        let de = d.component_mul(&dst.a) + v_prime_linear(&cfg.v, &pw, &dst.a) * ig - &dst.b * ig;
        let df = d.component_mul(&dst.b) - &dst.a * ig;
        jac.set_column(c, &flatten(&de, &df));
    }
    (r, jac)
}

fn state_cost(cfg: &MasterConfig, q: &Quenched, st: &MasterState) -> f64 {
    let (e, f) = residuals(cfg, q, st);
    cost(&e, &f)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalRun {
    pub cost: f64,
    pub iterations: usize,
    /// Cost at the start and after every accepted step.
    pub trace: Vec<f64>,
    #[serde(skip)]
    pub params: DVector<f64>,
}

/// Levenberg-Marquardt from `x0`; only cost-decreasing steps are accepted.
pub fn levenberg_marquardt(cfg: &MasterConfig, q: &Quenched, x0: DVector<f64>, max_iters: usize) -> LocalRun {
    let layout = Layout::new(cfg);
    let mut x = x0;
    let (mut r, mut jac) = linearize(cfg, q, &layout, &x);
    let mut c = r.norm_squared();
    let mut trace = vec![c];
    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut stalls = 0;
    while iterations < max_iters && c > 1e-32 {
        iterations += 1;
        let jt = jac.transpose();
        let a = &jt * &jac;
        let grad = &jt * &r;
        let mut accepted = None;
        while mu < 1e20 {
            let mut h = a.clone();
            for k in 0..h.nrows() {
                h[(k, k)] += mu * (a[(k, k)] + 1e-12);
            }
            let Some(chol) = h.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = chol.solve(&grad);
            let xn = &x - &step;
            let cn = state_cost(cfg, q, &layout.unpack(&xn));
            if cn.is_finite() && cn < c {
                accepted = Some((xn, cn));
                mu = (mu / 3.0).max(1e-15);
                break;
            }
            mu *= 4.0;
        }
        let Some((xn, cn)) = accepted else { break };
        stalls = if c - cn <= 1e-14 * c { stalls + 1 } else { 0 };
        x = xn;
        c = cn;
        trace.push(c);
        if stalls >= 5 {
            break;
        }
        (r, jac) = linearize(cfg, q, &layout, &x);
    }
    LocalRun { cost: c, iterations, trace, params: x }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MasterResult {
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub cost: f64,
    pub initial_cost: f64,
    pub tau: f64,
    pub obstruction: bool,
    pub iterations: usize,
    pub best_restart: usize,
    pub restart_costs: Vec<f64>,
    pub trace: Vec<f64>,
    pub momenta: Vec<f64>,
    #[serde(serialize_with = "ser_cmat")]
    pub a: CMat,
    #[serde(serialize_with = "ser_cmat")]
    pub b: CMat,
}

fn random_start(cfg: &MasterConfig, restart: usize) -> MasterState {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64 + 1);
    let s = cfg.optimizer.init_scale;
    let b = hermitian_gaussian(cfg.n, s, &mut rng);
    let a = if cfg.hermitian_a {
        hermitian_gaussian(cfg.n, s, &mut rng)
    } else {
        CMat::from_fn(cfg.n, cfg.n, |_, _| {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            C64::new(x, y) * (s / std::f64::consts::SQRT_2)
        })
    };
    MasterState { a, b }
}

/// Multi-restart minimisation of the cost; restarts run in parallel.
pub fn optimize(cfg: &MasterConfig) -> Result<MasterResult> {
    cfg.validate()?;
    let q = quench(cfg);
    let layout = Layout::new(cfg);
    let initial_cost = state_cost(cfg, &q, &MasterState::zeros(cfg.n));
    let tau = cfg.tau.unwrap_or(1e-10 * (1.0 + initial_cost));
    let restarts = cfg.optimizer.restarts.max(1);
    let runs: Vec<LocalRun> = (0..restarts)
        .into_par_iter()
        .map(|r| levenberg_marquardt(cfg, &q, layout.pack(&random_start(cfg, r)), cfg.optimizer.max_iters))
        .collect();
    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.cost < runs[best].cost {
            best = k;
        }
    }
    let run = &runs[best];
    let st = layout.unpack(&run.params);
    Ok(MasterResult {
        n: cfg.n,
        seed: cfg.seed,
        cost: run.cost,
        initial_cost,
        tau,
        obstruction: run.cost > tau,
        iterations: run.iterations,
        best_restart: best,
        restart_costs: runs.iter().map(|r| r.cost).collect(),
        trace: run.trace.clone(),
        momenta: q.momenta.clone(),
        a: st.a,
        b: st.b,
    })
}

/// Saddle-point equations for eigenvalues `a_i`, `b_i`:
/// `-V'(1 + a_i)/g + b_i/g + sum_{j≠i} 1/(a_i - a_j) = 0`,
/// `a_i/g + sum_{j≠i} 1/(b_i - b_j) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub g: f64,
    pub v: Vec<f64>,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl SaddleConfig {
    pub fn new(n: usize, g: f64, v: &PotentialV) -> Self {
        SaddleConfig { n, g, v: v.to_f64(), max_iters: 200, tolerance: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleResult {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SaddleResult {
    /// `(a_i, b_i)` pairs sorted by `a`.
    pub fn sorted_pairs(&self) -> Vec<(f64, f64)> {
        let mut p: Vec<(f64, f64)> = self.a.iter().copied().zip(self.b.iter().copied()).collect();
        p.sort_by(|x, y| x.0.total_cmp(&y.0));
        p
    }
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ck| acc * x + ck)
}

fn poly_deriv(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, ck)| acc * x + ck * k as f64)
}

/// `sum_{j≠i} 1/(x_i - x_j)`.
pub fn coulomb(x: &[f64], i: usize) -> f64 {
    x.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, xj)| 1.0 / (x[i] - xj)).sum()
}

/// `log |prod_{i>j} (x_i - x_j)|`.
pub fn log_vandermonde(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in 0..i {
            s += (x[i] - x[j]).abs().ln();
        }
    }
    s
}

pub fn saddle_residual(cfg: &SaddleConfig, a: &[f64], b: &[f64]) -> DVector<f64> {
    let n = a.len();
    let ig = 1.0 / cfg.g;
    DVector::from_fn(2 * n, |r, _| {
        if r < n {
            -ig * poly(&cfg.v, 1.0 + a[r]) + ig * b[r] + coulomb(a, r)
        } else {
            let i = r - n;
            ig * a[i] + coulomb(b, i)
        }
    })
}

fn saddle_jacobian(cfg: &SaddleConfig, a: &[f64], b: &[f64]) -> DMatrix<f64> {
    let n = a.len();
    let ig = 1.0 / cfg.g;
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        let mut da = -ig * poly_deriv(&cfg.v, 1.0 + a[i]);
        let mut db = 0.0;
        for k in 0..n {
            if k == i {
                continue;
            }
            let wa = 1.0 / (a[i] - a[k]).powi(2);
            let wb = 1.0 / (b[i] - b[k]).powi(2);
            j[(i, k)] = wa;
            j[(n + i, n + k)] = wb;
            da -= wa;
            db -= wb;
        }
        j[(i, i)] = da;
        j[(i, n + i)] = ig;
        j[(n + i, i)] = ig;
        j[(n + i, n + i)] = db;
    }
    j
}

/// Newton direction, falling back to increasingly damped normal equations.
fn newton_step(jac: &DMatrix<f64>, r: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(s) = jac.clone().lu().solve(r) {
        if s.iter().all(|v| v.is_finite()) {
            return Ok(-s);
        }
    }
    let jt = jac.transpose();
    let a = &jt * jac;
    let g = &jt * r;
    let scale = 1.0 + a.diagonal().amax();
    for damping in [1e-10, 1e-7, 1e-4, 1e-1] {
        let mut h = a.clone();
        for k in 0..h.nrows() {
            h[(k, k)] += damping * scale;
        }
        if let Some(c) = h.cholesky() {
            let s = c.solve(&g);
            if s.iter().all(|v| v.is_finite()) {
                return Ok(-s);
            }
        }
    }
    Err(Error::SingularJacobian)
}

/// Damped Newton from a given starting point.
pub fn saddle_solve_from(cfg: &SaddleConfig, a0: &[f64], b0: &[f64]) -> Result<SaddleResult> {
    let n = a0.len();
    let mut x: Vec<f64> = a0.iter().chain(b0).copied().collect();
    let mut r = saddle_residual(cfg, &x[..n], &x[n..]);
    let mut norm = r.norm();
    let mut iterations = 0;
    while iterations < cfg.max_iters && norm >= cfg.tolerance {
        iterations += 1;
        let jac = saddle_jacobian(cfg, &x[..n], &x[n..]);
        let step = newton_step(&jac, &r)?;
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-12 {
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi + t * si).collect();
            let rn = saddle_residual(cfg, &xn[..n], &xn[n..]);
            let nn = rn.norm();
            if nn.is_finite() && nn < norm * (1.0 - 1e-4 * t) {
                x = xn;
                r = rn;
                norm = nn;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(SaddleResult {
        a: x[..n].to_vec(),
        b: x[n..].to_vec(),
        residual_norm: norm,
        iterations,
        converged: norm < 1e-10,
    })
}

/// Tries interleaved starting grids of several widths and returns the first
/// converged point, or the best one found.
pub fn saddle_solve(cfg: &SaddleConfig) -> Result<SaddleResult> {
    if cfg.n < 2 {
        return Err(Error::Config("saddle equations need N >= 2".into()));
    }
    if !(cfg.g > 0.0) {
        return Err(Error::NonPositiveG(cfg.g));
    }
    let n = cfg.n;
    let mut best: Option<SaddleResult> = None;
    let mut last_err = None;
    for spread in [1.0, 0.5, 2.0, 0.25, 4.0, 0.1] {
        let a0: Vec<f64> = (0..n).map(|i| spread * (i as f64 - (n as f64 - 1.0) / 2.0)).collect();
        let b0: Vec<f64> = a0.iter().map(|a| -a - 0.5 * spread).collect();
        match saddle_solve_from(cfg, &a0, &b0) {
            Ok(res) if res.converged => return Ok(res),
            Ok(res) => {
                if best.as_ref().map_or(true, |b| res.residual_norm < b.residual_norm) {
                    best = Some(res);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match (best, last_err) {
        (Some(b), _) => Ok(b),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::SingularJacobian),
    }
}

/// `N = 2` solution from the symmetric ansatz `a = (-α, α)`: summing the second
/// equation forces `a_1 + a_2 = 0`, the first pair then requires
/// `V'(1+α) = V'(1-α)`, and `b_i = V'(1 + a_i) - g sum_{j≠i} 1/(a_i - a_j)`.
/// `α` is located by bisection on `(0, alpha_max]`.
pub fn saddle_reduced_n2(v: &[f64], g: f64, alpha_max: f64) -> Result<SaddleResult> {
    let odd = |al: f64| 0.5 * (poly(v, 1.0 + al) - poly(v, 1.0 - al));
    let steps = 4000;
    let lo0 = alpha_max * 1e-6;
    let h = (alpha_max - lo0) / steps as f64;
    let mut bracket = None;
    let mut prev = odd(lo0);
    for k in 1..=steps {
        let al = lo0 + h * k as f64;
        let cur = odd(al);
        if cur == 0.0 || prev.signum() != cur.signum() {
            bracket = Some((al - h, al));
            break;
        }
        prev = cur;
    }
    let (mut lo, mut hi) =
        bracket.ok_or_else(|| Error::NoSaddle(format!("V'(1+x) - V'(1-x) has no zero in (0, {alpha_max}]")))?;
    let flo = odd(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if odd(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let al = 0.5 * (lo + hi);
    let a = vec![-al, al];
    let b: Vec<f64> = (0..2).map(|i| poly(v, 1.0 + a[i]) - g * coulomb(&a, i)).collect();
    let cfg = SaddleConfig { n: 2, g, v: v.to_vec(), max_iters: 0, tolerance: 0.0 };
    let residual_norm = saddle_residual(&cfg, &a, &b).norm();
    Ok(SaddleResult { a, b, residual_norm, iterations: 0, converged: residual_norm < 1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Precision;
    use crate::scaling::{double_scaling, GMode};
    use crate::matrix_model::build_potential;
    use proptest::prelude::*;

    fn quadratic(n: usize) -> MasterConfig {
        let params = double_scaling(2, 16, &[], GMode::Plain, Precision::DEFAULT).unwrap();
        MasterConfig::new(n, 0.3, &build_potential(&params))
    }

    /// `V'(1+x) = x^3 - x`, i.e. `V'(y) = 2y - 3y^2 + y^3`.
    fn double_well() -> Vec<f64> {
        vec![0.0, 2.0, -3.0, 1.0]
    }

    fn brute_cost(cfg: &MasterConfig, q: &Quenched, st: &MasterState) -> f64 {
        let n = cfg.n;
        let mut m = vec![vec![C64::new(0.0, 0.0); n]; n];
        for k in 0..n {
            for l in 0..n {
                m[k][l] = st.a[(k, l)] + if k == l { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            }
        }
        let mut vp = vec![vec![C64::new(0.0, 0.0); n]; n];
        let mut pw: Vec<Vec<C64>> = (0..n).map(|k| (0..n).map(|l| C64::new(if k == l { 1.0 } else { 0.0 }, 0.0)).collect()).collect();
        for vk in &cfg.v {
            for k in 0..n {
                for l in 0..n {
                    vp[k][l] += pw[k][l] * vk;
                }
            }
            let mut next = vec![vec![C64::new(0.0, 0.0); n]; n];
            for k in 0..n {
                for l in 0..n {
                    for j in 0..n {
                        next[k][l] += pw[k][j] * m[j][l];
                    }
                }
            }
            pw = next;
        }
        let mut c = 0.0;
        for k in 0..n {
            for l in 0..n {
                let dp = q.momenta[k] - q.momenta[l];
                let e = I * dp * st.a[(k, l)] + vp[k][l] / cfg.g - st.b[(k, l)] / cfg.g - q.eta1[(k, l)];
                let f = I * dp * st.b[(k, l)] - st.a[(k, l)] / cfg.g - q.eta2[(k, l)];
                c += e.norm_sqr() + f.norm_sqr();
            }
        }
        c
    }

    fn riemann_like(n: usize, seed: u64, sigma: f64) -> MasterConfig {
        let mut cfg = MasterConfig::new(n, 0.2, &PotentialV::new(vec![]));
        cfg.v = vec![-1.3, -0.4, 0.2, -1.0, 0.1, -1.0, -1.0];
        cfg.seed = seed;
        cfg.sigma = sigma;
        cfg
    }

    #[test]
    fn cost_examples() {
        let z = CMat::zeros(2, 2);
        assert_eq!(cost(&z, &z), 0.0);
        let mut e = z.clone();
        e[(0, 1)] = C64::new(3.0, 0.0);
        assert_eq!(cost(&e, &z), 9.0);
    }

    #[test]
    fn zero_state_quadratic() {
        let cfg = quadratic(3);
        let q = quench(&cfg);
        let (e, f) = residuals(&cfg, &q, &MasterState::zeros(3));
        for k in 0..3 {
            assert!((e[(k, k)] - C64::new(-2.0 / 0.3, 0.0)).norm() < 1e-12);
        }
        assert!(f.iter().all(|z| z.norm() == 0.0));
        assert!((cost(&e, &f) - 3.0 * (2.0f64 / 0.3).powi(2)).abs() < 1e-9);
    }

    #[test]
    fn cost_matches_double_loop() {
        let cfg = riemann_like(4, 7, 0.3);
        let q = quench(&cfg);
        let st = random_start(&cfg, 3);
        let (e, f) = residuals(&cfg, &q, &st);
        let c = cost(&e, &f);
        assert!(((c - brute_cost(&cfg, &q, &st)) / c).abs() < 1e-12);
    }

    #[test]
    fn residuals_linear_in_noise() {
        let cfg = riemann_like(3, 2, 0.5);
        let q = quench(&cfg);
        let st = random_start(&cfg, 0);
        let q0 = Quenched { eta1: CMat::zeros(3, 3), eta2: CMat::zeros(3, 3), ..q.clone() };
        let q2 = Quenched { eta1: &q.eta1 * C64::new(2.0, 0.0), eta2: &q.eta2 * C64::new(2.0, 0.0), ..q.clone() };
        let (e0, f0) = residuals(&cfg, &q0, &st);
        let (e1, f1) = residuals(&cfg, &q, &st);
        let (e2, f2) = residuals(&cfg, &q2, &st);
        assert!(((&e2 - &e0) - (&e1 - &e0) * C64::new(2.0, 0.0)).norm() < 1e-10);
        assert!(((&f2 - &f0) - (&f1 - &f0) * C64::new(2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn scalar_case_solves_exactly() {
        let mut cfg = riemann_like(1, 5, 0.7);
        cfg.optimizer.restarts = 2;
        let r = optimize(&cfg).unwrap();
        assert!(r.cost < 1e-20, "{}", r.cost);
        assert!(!r.obstruction);
        let q = quench(&cfg);
        let a = -cfg.g * q.eta2[(0, 0)].re;
        assert!((r.a[(0, 0)].re - a).abs() < 1e-9);
    }

    #[test]
    fn quadratic_potential_solves_exactly() {
        let mut cfg = quadratic(4);
        cfg.optimizer.restarts = 2;
        let r = optimize(&cfg).unwrap();
        assert!(r.cost < 1e-12, "{}", r.cost);
        assert!(r.a.norm() < 1e-6);
        assert!((&r.b + CMat::identity(4, 4) * C64::new(2.0, 0.0)).norm() < 1e-6);
        assert!(r.trace.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn general_complex_mode_runs() {
        let mut cfg = quadratic(2);
        cfg.hermitian_a = false;
        cfg.optimizer.restarts = 1;
        let r = optimize(&cfg).unwrap();
        assert!(r.cost < 1e-12);
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let mut cfg = riemann_like(3, 11, 0.1);
        cfg.optimizer.restarts = 3;
        cfg.optimizer.max_iters = 40;
        let a = optimize(&cfg).unwrap();
        let b = optimize(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn config_validation() {
        let mut cfg = quadratic(2);
        cfg.sigma = -1.0;
        assert!(matches!(optimize(&cfg), Err(Error::Config(_))));
        let mut cfg = quadratic(2);
        cfg.momenta = Momenta::Fixed { values: vec![0.0] };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn coulomb_is_log_vandermonde_gradient() {
        let x = [0.3, -1.1, 2.0, 0.9];
        let h = 1e-6;
        for i in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (log_vandermonde(&xp) - log_vandermonde(&xm)) / (2.0 * h);
            assert!((fd - coulomb(&x, i)).abs() < 1e-7);
        }
    }

    #[test]
    fn double_well_saddle_matches_reduced_ansatz() {
        let v = double_well();
        let g = 0.4;
        let oracle = saddle_reduced_n2(&v, g, 3.0).unwrap();
        assert!((oracle.a[1] - 1.0).abs() < 1e-12);
        let cfg = SaddleConfig { n: 2, g, v: v.clone(), max_iters: 200, tolerance: 1e-13 };
        let res = saddle_solve(&cfg).unwrap();
        assert!(res.converged && res.residual_norm < 1e-10);
        for (p, q) in res.sorted_pairs().iter().zip(oracle.sorted_pairs()) {
            assert!((p.0 - q.0).abs() < 1e-8 && (p.1 - q.1).abs() < 1e-8);
        }
    }

    #[test]
    fn saddle_is_permutation_symmetric() {
        let cfg = SaddleConfig { n: 2, g: 0.4, v: double_well(), max_iters: 200, tolerance: 1e-13 };
        let r1 = saddle_solve_from(&cfg, &[-0.8, 1.1], &[0.3, -0.1]).unwrap();
        let r2 = saddle_solve_from(&cfg, &[1.1, -0.8], &[-0.1, 0.3]).unwrap();
        assert!(r1.converged && r2.converged);
        for (p, q) in r1.sorted_pairs().iter().zip(r2.sorted_pairs()) {
            assert!((p.0 - q.0).abs() < 1e-10 && (p.1 - q.1).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_force_has_no_symmetric_saddle() {
        assert!(matches!(saddle_reduced_n2(&[-1.0, -1.0], 0.3, 5.0), Err(Error::NoSaddle(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn gradient_matches_finite_differences(seed in 0u64..1000, n in 1usize..4, herm in any::<bool>()) {
            let mut cfg = riemann_like(n, seed, 0.4);
            cfg.hermitian_a = herm;
            let q = quench(&cfg);
            let layout = Layout::new(&cfg);
            let x = layout.pack(&random_start(&cfg, 1));
            let g = gradient(&cfg, &q, &layout.unpack(&x));
            let h = 1e-6;
            let mut fd = DVector::zeros(x.len());
            for i in 0..x.len() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                fd[i] = (state_cost(&cfg, &q, &layout.unpack(&xp)) - state_cost(&cfg, &q, &layout.unpack(&xm))) / (2.0 * h);
            }
            prop_assert!((&g - &fd).norm() / g.norm() < 1e-6, "{} vs {}", g, fd);
            let (r, jac) = linearize(&cfg, &q, &layout, &x);
            prop_assert!(((jac.transpose() * r) * 2.0 - &g).norm() / g.norm() < 1e-10);
        }

        #[test]
        fn pack_round_trip(seed in 0u64..100, n in 1usize..5) {
            let cfg = riemann_like(n, seed, 0.0);
            let layout = Layout::new(&cfg);
            let st = random_start(&cfg, 0);
            prop_assert_eq!(layout.unpack(&layout.pack(&st)), st);
        }
    }
}
