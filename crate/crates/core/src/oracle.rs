//! Independent Monte Carlo and quadrature validators.
//!
//! Trials are split into fixed chunks of [`CHUNK`] trials; chunk `i` draws from
//! stream `(seed, domain, i)` and chunk summaries are merged in chunk order, so
//! every estimate is bit-identical for any worker count.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::link_stats::SinrLaw;
use crate::mode_selection::{decide, decision_threshold, Hypothesis, ModeSelectModel};
use crate::numeric::{integrate_real_line, QuadConfig, RunningStats, StreamFactory, StreamRng};
use crate::scalar::{to_f64, Real};

/// Trials per reproducibility chunk.
pub const CHUNK: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub seed: u64,
    pub trials: u64,
    pub workers: usize,
    /// z-multiplier used by pass/fail checks.
    pub confidence: f64,
}

impl McConfig {
    pub fn new(seed: u64, trials: u64) -> Self {
        Self {
            seed,
            trials,
            workers: 1,
            confidence: 3.0,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1000 {
            return Err(domain("Monte Carlo needs at least 1000 trials"));
        }
        if self.workers == 0 {
            return Err(domain("worker count must be positive"));
        }
        if !(self.confidence > 0.0) {
            return Err(domain("confidence multiplier must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl Estimate {
    fn from_stats(s: &RunningStats) -> Self {
        Self {
            mean: s.mean(),
            std_error: s.std_error(),
            trials: s.count(),
        }
    }

    /// `|mean − target| ≤ z·stderr`, with a floor for zero-variance estimates.
    pub fn agrees_with(&self, target: f64, z: f64) -> bool {
        (self.mean - target).abs() <= z * self.std_error + 1e-12 * target.abs().max(1e-300)
    }
}

/// Runs `trials` calls of `trial`, each writing `dims` outcomes, and returns
/// per-dimension statistics.
pub fn run_trials<F>(cfg: &McConfig, domain: u64, dims: usize, trial: F) -> Result<Vec<RunningStats>>
where
    F: Fn(&mut StreamRng, &mut [f64]) + Sync,
{
    cfg.validate()?;
    let factory = StreamFactory::new(cfg.seed);
    let chunks = cfg.trials.div_ceil(CHUNK);
    let run_chunk = |c: u64| -> Vec<RunningStats> {
        let mut rng = factory.stream(domain, c);
        let n = CHUNK.min(cfg.trials - c * CHUNK);
        let mut stats = vec![RunningStats::new(); dims];
        let mut out = vec![0.0; dims];
        for _ in 0..n {
            trial(&mut rng, &mut out);
            for (s, v) in stats.iter_mut().zip(&out) {
                s.push(*v);
            }
        }
        stats
    };
    let parts: Vec<Vec<RunningStats>> = if cfg.workers == 1 {
        (0..chunks).map(run_chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| crate::error::domain(format!("thread pool: {e}")))?;
        pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect())
    };
    let mut total = vec![RunningStats::new(); dims];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total)
}

fn single<F>(cfg: &McConfig, domain: u64, f: F) -> Result<Estimate>
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    let s = run_trials(cfg, domain, 1, |rng, out| out[0] = f(rng))?;
    Ok(Estimate::from_stats(&s[0]))
}

/// CDF of `ψ/I` with `ψ ~ Exp(rate α)`, `I ~ Exp(rate β)`: `γα/(β + γα)`.
pub fn exact_ratio_cdf<T: Real>(rate_num: T, rate_den: T, gamma: T) -> T {
    if gamma <= T::zero() {
        return T::zero();
    }
    gamma * rate_num / (rate_den + gamma * rate_num)
}

/// Distribution whose outage is simulated.
#[derive(Debug, Clone, PartialEq)]
pub enum SinrSpec {
    Law(SinrLaw<f64>),
    Constant(f64),
}

impl SinrSpec {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SinrSpec::Law(l) => l.sample(rng),
            SinrSpec::Constant(v) => *v,
        }
    }
}

/// Empirical `P[Γ < γ_T]`.
pub fn mc_outage(spec: &SinrSpec, gamma_t: f64, cfg: &McConfig, domain: u64) -> Result<Estimate> {
    single(cfg, domain, |rng| if spec.sample(rng) < gamma_t { 1.0 } else { 0.0 })
}

/// Empirical `E[f(Γ)]`.
pub fn mc_law_expectation<T: Real, F>(law: &SinrLaw<T>, cfg: &McConfig, domain: u64, f: F) -> Result<Estimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    let law64 = law_to_f64(law);
    single(cfg, domain, |rng| f(law64.sample(rng)))
}

fn law_to_f64<T: Real>(law: &SinrLaw<T>) -> SinrLaw<f64> {
    match law {
        SinrLaw::Exponential { mean } => SinrLaw::Exponential { mean: to_f64(*mean) },
        SinrLaw::Ratio {
            signal_mean,
            interference_mean,
        } => SinrLaw::Ratio {
            signal_mean: to_f64(*signal_mean),
            interference_mean: to_f64(*interference_mean),
        },
        SinrLaw::Min(a, b) => SinrLaw::Min(Box::new(law_to_f64(a)), Box::new(law_to_f64(b))),
    }
}

/// Per-state service of a block.
#[derive(Debug, Clone, PartialEq)]
pub enum Service {
    Fixed(f64),
    /// `B log2(1 + Γ)` with `Γ` drawn from the law.
    Capacity { law: SinrLaw<f64>, bandwidth: f64 },
    /// `rate` when the drawn `Γ` reaches `gamma_t`, otherwise nothing.
    Threshold { law: SinrLaw<f64>, gamma_t: f64, rate: f64 },
}

impl Service {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Service::Fixed(r) => *r,
            Service::Capacity { law, bandwidth } => bandwidth * law.sample(rng).ln_1p() / std::f64::consts::LN_2,
            Service::Threshold { law, gamma_t, rate } => {
                if law.sample(rng) >= *gamma_t {
                    *rate
                } else {
                    0.0
                }
            }
        }
    }
}

/// Rank-one four-state service process: each block draws its state from `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovService {
    pub p: [f64; 4],
    pub service: [Service; 4],
}

impl MarkovService {
    pub fn fixed_rate(p: [f64; 4], r_t: f64) -> Self {
        Self {
            p,
            service: [Service::Fixed(r_t), Service::Fixed(0.0), Service::Fixed(r_t), Service::Fixed(0.0)],
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, pi) in self.p.iter().enumerate() {
            acc += pi;
            if u < acc {
                return self.service[i].draw(rng);
            }
        }
        self.service[3].draw(rng)
    }
}

/// `−ln(mean e^{−φS(t)})/(φt)` with delta-method standard error.
pub fn mc_effective_capacity(
    process: &MarkovService,
    phi: f64,
    horizon: usize,
    cfg: &McConfig,
    domain: u64,
) -> Result<Estimate> {
    if !(phi > 0.0) || horizon == 0 {
        return Err(crate::error::domain("need φ > 0 and horizon ≥ 1"));
    }
    let m = single(cfg, domain, |rng| {
        let s: f64 = (0..horizon).map(|_| process.draw(rng)).sum();
        (-phi * s).exp()
    })?;
    let scale = phi * horizon as f64;
    if m.mean >= 1.0 {
        return Ok(Estimate {
            mean: 0.0,
            std_error: m.std_error / scale,
            trials: m.trials,
        });
    }
    if !(m.mean > 0.0) {
        return Err(Error::NonConvergence {
            method: "Monte Carlo effective capacity (MGF underflow)",
            iterations: m.trials as usize,
            residual: m.mean,
        });
    }
    Ok(Estimate {
        mean: -m.mean.ln() / scale,
        std_error: m.std_error / (m.mean * scale),
        trials: m.trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeErrorEstimate {
    /// Frequency of deciding H1 when H0 is true.
    pub p_e1: Estimate,
    /// Frequency of deciding H0 when H1 is true.
    pub p_e2: Estimate,
    /// Frequency of deciding H0 under the prior mixture.
    pub p_h0_decided: Estimate,
}

/// Simulates the detector under each hypothesis and under the prior mixture.
pub fn mc_mode_error(model: &ModeSelectModel<f64>, cfg: &McConfig, domain: u64) -> Result<ModeErrorEstimate> {
    let delta = decision_threshold(model)?;
    let (m, s, pi0) = (model.m_tau, model.sigma_tau, model.pi0);
    let stats = run_trials(cfg, domain, 3, |rng, out| {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let under_h0 = -m + s * z0;
        let under_h1 = m + s * z1;
        out[0] = (decide(under_h0, delta) == Hypothesis::H1) as u8 as f64;
        out[1] = (decide(under_h1, delta) == Hypothesis::H0) as u8 as f64;
        let h0_true = rng.random::<f64>() < pi0;
        let tau = if h0_true { under_h0 } else { under_h1 };
        out[2] = (decide(tau, delta) == Hypothesis::H0) as u8 as f64;
    })?;
    Ok(ModeErrorEstimate {
        p_e1: Estimate::from_stats(&stats[0]),
        p_e2: Estimate::from_stats(&stats[1]),
        p_h0_decided: Estimate::from_stats(&stats[2]),
    })
}

fn gaussian_log_pdf(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// `∫ p ln(p/q)` for `p = N(mean_p, σ²)`, `q = N(mean_q, σ²)` by quadrature.
pub fn numeric_kld_gaussian(mean_p: f64, mean_q: f64, sigma: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(domain("KLD needs σ > 0"));
    }
    // Integrate in the standardized variable of p to keep the mass near 0.
    let q = integrate_real_line(
        |u: f64| {
            let x = mean_p + sigma * u;
            let lp = gaussian_log_pdf(x, mean_p, sigma);
            let lq = gaussian_log_pdf(x, mean_q, sigma);
            lp.exp() * (lp - lq) * sigma
        },
        cfg,
    )?;
    Ok(q.value)
}

/// `D(p(τ|H1) ‖ p(τ|H0))` by quadrature.
pub fn numeric_kld(model: &ModeSelectModel<f64>, cfg: &QuadConfig) -> Result<f64> {
    numeric_kld_gaussian(model.m_tau, -model.m_tau, model.sigma_tau, cfg)
}

/// Largest root modulus of `λ^X − Σ a_x λ^{X−x}` by Durand–Kerner iteration.
pub fn companion_root_modulus(a: &[f64]) -> Result<f64> {
    let x = a.len();
    if x == 0 {
        return Err(domain("polynomial needs at least one coefficient"));
    }
    if x == 1 {
        return Ok(a[0].abs());
    }
    // Monic coefficients c[0] = 1, c[k] = −a_k.
    let coeffs: Vec<Complex<f64>> = std::iter::once(Complex::new(1.0, 0.0))
        .chain(a.iter().map(|v| Complex::new(-v, 0.0)))
        .collect();
    let eval = |z: Complex<f64>| coeffs.iter().fold(Complex::new(0.0, 0.0), |acc, c| acc * z + c);
    let bound = 1.0 + a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let seed = Complex::new(0.4, 0.9);
    let mut roots: Vec<Complex<f64>> = (0..x).map(|k| seed.powu(k as u32) * bound * 0.5).collect();
    for iter in 0..20_000 {
        let mut change = 0.0f64;
        for i in 0..x {
            let zi = roots[i];
            let denom = roots
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(Complex::new(1.0, 0.0), |acc, (_, zj)| acc * (zi - zj));
            if denom.norm() == 0.0 {
                roots[i] = zi + Complex::new(1e-9, 1e-9);
                change = f64::INFINITY;
                continue;
            }
            let step = eval(zi) / denom;
            roots[i] = zi - step;
            change = change.max(step.norm());
        }
        if change < 1e-15 * bound {
            return Ok(roots.iter().fold(0.0, |m, z| m.max(z.norm())));
        }
        if iter == 19_999 {
            return Err(Error::NonConvergence {
                method: "Durand-Kerner",
                iterations: iter + 1,
                residual: change,
            });
        }
    }
    unreachable!()
}

/// Monte Carlo estimate of `E[(Σ_n |h_n|)²]` for `n` unit-scale Rician
/// coefficients, the coherent gain that `Nπ` stands in for in `κ_d`.
pub fn mc_coherent_gain(n_total: usize, rician: f64, cfg: &McConfig, domain: u64) -> Result<Estimate> {
    let (w_los, w_nlos) = if rician.is_infinite() {
        (1.0, 0.0)
    } else {
        ((rician / (1.0 + rician)).sqrt(), (1.0 / (1.0 + rician)).sqrt())
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    single(cfg, domain, |rng| {
        let mut sum = 0.0;
        for _ in 0..n_total {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            sum += Complex::new(w_los + w_nlos * s * re, w_nlos * s * im).norm();
        }
        sum * sum
    })
}
