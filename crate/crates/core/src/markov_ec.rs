//! Four-state Markov service model and its effective capacity.
//!
//! States: s1 D2D chosen and ON, s2 D2D chosen and OFF, s3 cellular chosen
//! and ON, s4 cellular chosen and OFF (no CSIT). With CSIT the states follow
//! the detector outcome only. Transitions are rank one (every row equals `p`),
//! so the spectral radius of `Φ(−φ)P` is the trace `Σ Φ_ii p_i`.

use crate::error::{domain, Error, Result};
use crate::link_stats::SinrLaw;
use crate::mode_selection::{detection_probs, ModeProbs, ModeSelectModel};
use crate::numeric::{integrate_semi_infinite, QuadConfig};
use crate::oracle::{mc_law_expectation, McConfig};
use crate::scalar::{count, lit, to_f64, Real};

const SUM_TOL: f64 = 1e-12;

/// Stationary state probabilities `p1..p4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProbs<T>([T; 4]);

impl<T: Real> TransitionProbs<T> {
    pub fn new(p: [T; 4]) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidTransitions {
            probs: p.map(to_f64),
            reason: reason.to_string(),
        };
        let tol = lit::<T>(SUM_TOL);
        if p.iter().any(|v| !(*v >= -tol && *v <= T::one() + tol)) {
            return Err(invalid("entries must lie in [0, 1]"));
        }
        let sum: T = p.iter().copied().sum();
        if (sum - T::one()).abs() > tol {
            return Err(invalid("entries must sum to 1"));
        }
        Ok(Self(p.map(|v| v.max(T::zero()).min(T::one()))))
    }

    pub fn probs(&self) -> [T; 4] {
        self.0
    }

    /// ON mass of the fixed-rate chain, `p1 + p3`.
    pub fn p_on(&self) -> T {
        self.0[0] + self.0[2]
    }

    /// ON mass with CSIT, `p1 + p3 + p4`.
    pub fn p_on_csit(&self) -> T {
        self.0[0] + self.0[2] + self.0[3]
    }

    /// Rescales so that `p1 + p3 = target`, keeping the ratios within the ON
    /// and within the OFF group.
    pub fn with_p_on(&self, target: T) -> Result<Self> {
        let [p1, p2, p3, p4] = self.0;
        let (on, off) = (p1 + p3, p2 + p4);
        let (a1, a3) = split(p1, p3, on);
        let (a2, a4) = split(p2, p4, off);
        Self::new(scaled(target, [a1, a3], [a2, a4]))
    }

    /// Rescales so that `p1 + p3 + p4 = target` (CSIT ON set).
    pub fn with_p_on_csit(&self, target: T) -> Result<Self> {
        if !(target >= T::zero() && target <= T::one()) {
            return Err(domain("target P_ON must lie in [0, 1]"));
        }
        let [p1, _, p3, p4] = self.0;
        let on = p1 + p3 + p4;
        let third = T::one() / lit(3.0);
        let w = if on > T::zero() {
            [p1 / on, p3 / on, p4 / on]
        } else {
            [third; 3]
        };
        Self::new([target * w[0], T::one() - target, target * w[1], target * w[2]])
    }
}

fn split<T: Real>(a: T, b: T, total: T) -> (T, T) {
    if total > T::zero() {
        (a / total, b / total)
    } else {
        (lit(0.5), lit(0.5))
    }
}

fn scaled<T: Real>(target: T, on: [T; 2], off: [T; 2]) -> [T; 4] {
    let rest = T::one() - target;
    [target * on[0], rest * off[0], target * on[1], rest * off[1]]
}

/// Underlay chain without CSIT from mode probabilities and outages.
pub fn transitions_no_csit_underlay<T: Real>(mode: ModeProbs<T>, outage_d2d: T, outage_cell: T) -> Result<TransitionProbs<T>> {
    for o in [outage_d2d, outage_cell] {
        if !(o >= T::zero() && o <= T::one()) {
            return Err(domain("outage probabilities must lie in [0, 1]"));
        }
    }
    TransitionProbs::new([
        mode.d2d * (T::one() - outage_d2d),
        mode.d2d * outage_d2d,
        mode.cellular * (T::one() - outage_cell),
        mode.cellular * outage_cell,
    ])
}

/// Overlay chain without CSIT; ON factors `e^{−γ_T/κ}`.
pub fn transitions_no_csit_overlay<T: Real>(mode: ModeProbs<T>, kappa_d: T, kappa_c: T, gamma_t: T) -> Result<TransitionProbs<T>> {
    if !(kappa_d > T::zero() && kappa_c > T::zero()) {
        return Err(domain("mean SNRs must be positive"));
    }
    if !(gamma_t >= T::zero()) {
        return Err(domain("threshold must be nonnegative"));
    }
    let off_d = -(-gamma_t / kappa_d).exp_m1();
    let off_c = -(-gamma_t / kappa_c).exp_m1();
    transitions_no_csit_underlay(mode, off_d, off_c)
}

/// CSIT chain: `(π0 P_d1, π0 P_e1, π1 P_e2, π1 P_d2)`.
pub fn transitions_csit<T: Real>(model: &ModeSelectModel<T>) -> Result<TransitionProbs<T>> {
    let d = detection_probs(model)?;
    TransitionProbs::new([
        model.pi0 * d.p_d1,
        model.pi0 * d.p_e1,
        model.pi1 * d.p_e2,
        model.pi1 * d.p_d2,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcResult<T> {
    /// Effective capacity, bits/s (bits/s/Hz for B = 1).
    pub ec: T,
    pub p_on: T,
    /// Argument of the logarithm (spectral radius of `Φ(−φ)P` or of `A`).
    pub log_argument: T,
    pub warning: Option<String>,
}

fn check_phi<T: Real>(phi: T) -> Result<()> {
    if phi > T::zero() && phi.is_finite() {
        Ok(())
    } else {
        Err(domain("QoS exponent φ must be positive and finite"))
    }
}

/// `−ln(p1 e^{−r_tφ} + p2 + p3 e^{−r_tφ} + p4)/φ`.
pub fn ec_fixed_rate<T: Real>(p: &TransitionProbs<T>, r_t: T, phi: T) -> Result<EcResult<T>> {
    check_phi(phi)?;
    if !(r_t >= T::zero()) {
        return Err(domain("rate must be nonnegative"));
    }
    let p_on = p.p_on();
    // 1 + p_on (e^{−rφ} − 1), kept in ln_1p form for small φ.
    let delta = p_on * (-r_t * phi).exp_m1();
    Ok(EcResult {
        ec: -delta.ln_1p() / phi,
        p_on,
        log_argument: T::one() + delta,
        warning: None,
    })
}

/// The `φ → 0⁺` limit of [`ec_fixed_rate`]: `r_t (p1 + p3)`.
pub fn average_rate<T: Real>(p: &TransitionProbs<T>, r_t: T) -> T {
    r_t * p.p_on()
}

/// Dominant eigenvalue of `Φ P` for rank-one `P`, i.e. `Σ Φ_ii p_i`.
pub fn spectral_radius_rank1<T: Real>(p: &TransitionProbs<T>, phi_diag: [T; 4]) -> T {
    p.0.iter().zip(phi_diag).map(|(a, b)| *a * b).sum()
}

/// Derivative of `(p1+p3)e^{−r_tφ}` with `p` held fixed, `−φ(p1+p3)e^{−r_tφ}`.
///
/// Kept for reference only: it ignores how `p` depends on `r_t`, so descending
/// along it drives the rate to the upper bound. [`optimal_rate`] differentiates
/// the full cost numerically.
pub fn paper_gradient<T: Real>(p_on: T, r_t: T, phi: T) -> T {
    -phi * p_on * (-r_t * phi).exp()
}

/// How the CSIT rate expectations are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    Quadrature(QuadConfig),
    /// Direct simulation with the given stream domain.
    MonteCarlo { cfg: McConfig, domain: u64 },
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Quadrature(QuadConfig::default())
    }
}

/// `1 − E[e^{−φ B log2(1+Γ)}]` with its error estimate (quadrature error or MC
/// standard error).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfDeficit<T> {
    pub value: T,
    pub error: T,
}

/// `1 − E[(1+Γ)^{−s}]` with `s = φB/ln 2`, computed as `s ∫₀^∞ (1+g)^{−s−1} S(g) dg`.
pub fn rate_mgf_deficit<T: Real>(law: &SinrLaw<T>, phi: T, bandwidth: T, integrator: &Integrator) -> Result<MgfDeficit<T>> {
    check_phi(phi)?;
    let s = phi * bandwidth / T::LN_2();
    match integrator {
        Integrator::Quadrature(cfg) => {
            let q = integrate_semi_infinite(
                |g: T| (-(s + T::one()) * g.ln_1p()).exp() * law.survival(g),
                T::zero(),
                cfg,
            )?;
            Ok(MgfDeficit {
                value: s * q.value,
                error: s * q.error,
            })
        }
        Integrator::MonteCarlo { cfg, domain } => {
            let sf = to_f64(s);
            let est = mc_law_expectation(law, cfg, *domain, |g| -(-sf * g.ln_1p()).exp_m1())?;
            Ok(MgfDeficit {
                value: lit(est.mean),
                error: lit(est.std_error),
            })
        }
    }
}

/// `E[B log2(1+Γ)] = (B/ln 2) ∫₀^∞ S(g)/(1+g) dg`.
pub fn mean_rate<T: Real>(law: &SinrLaw<T>, bandwidth: T, cfg: &QuadConfig) -> Result<T> {
    let q = integrate_semi_infinite(|g: T| law.survival(g) / (T::one() + g), T::zero(), cfg)?;
    Ok(bandwidth * q.value / T::LN_2())
}

/// EC with CSIT: `−ln(M_d (p1+p3) + p2 + M_c p4)/φ`, `M = E[e^{−φ B log2(1+Γ)}]`.
pub fn ec_csit<T: Real>(
    p: &TransitionProbs<T>,
    phi: T,
    d2d: &SinrLaw<T>,
    cellular: &SinrLaw<T>,
    bandwidth: T,
    integrator: &Integrator,
) -> Result<EcResult<T>> {
    ec_csit_with_error(p, phi, d2d, cellular, bandwidth, integrator).map(|(r, _)| r)
}

/// [`ec_csit`] plus the first-order propagated error of the EC (quadrature
/// error or Monte Carlo standard error).
pub fn ec_csit_with_error<T: Real>(
    p: &TransitionProbs<T>,
    phi: T,
    d2d: &SinrLaw<T>,
    cellular: &SinrLaw<T>,
    bandwidth: T,
    integrator: &Integrator,
) -> Result<(EcResult<T>, T)> {
    let dd = rate_mgf_deficit(d2d, phi, bandwidth, integrator)?;
    let dc = match integrator {
        Integrator::MonteCarlo { cfg, domain } => rate_mgf_deficit(
            cellular,
            phi,
            bandwidth,
            &Integrator::MonteCarlo {
                cfg: *cfg,
                domain: domain.wrapping_add(1),
            },
        )?,
        _ => rate_mgf_deficit(cellular, phi, bandwidth, integrator)?,
    };
    let [p1, _, p3, p4] = p.probs();
    let delta = -(p1 + p3) * dd.value - p4 * dc.value;
    let arg = T::one() + delta;
    let spread = ((p1 + p3) * dd.error).hypot(p4 * dc.error);
    Ok((
        EcResult {
            ec: -delta.ln_1p() / phi,
            p_on: p.p_on_csit(),
            log_argument: arg,
            warning: None,
        },
        spread / (phi * arg),
    ))
}

/// `φ → 0⁺` limit of [`ec_csit`]: `(p1+p3) E[r^d] + p4 E[r^c]`.
pub fn average_rate_csit<T: Real>(
    p: &TransitionProbs<T>,
    d2d: &SinrLaw<T>,
    cellular: &SinrLaw<T>,
    bandwidth: T,
    cfg: &QuadConfig,
) -> Result<T> {
    let [p1, _, p3, p4] = p.probs();
    Ok((p1 + p3) * mean_rate(d2d, bandwidth, cfg)? + p4 * mean_rate(cellular, bandwidth, cfg)?)
}

/// Gradient-descent settings; steps and tolerances are fractions of the search width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdConfig {
    pub step_fraction: f64,
    pub tol_fraction: f64,
    pub max_iter: usize,
    /// Points of the coarse scan used to detect multimodal profiles.
    pub scan_points: usize,
}

impl Default for GdConfig {
    fn default() -> Self {
        Self {
            step_fraction: 0.05,
            tol_fraction: 1e-6,
            max_iter: 10_000,
            scan_points: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSearch {
    GradientDescent(GdConfig),
    Grid { points: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateOptimum<T> {
    pub r_opt: T,
    pub ec_opt: T,
    pub iterations: usize,
    /// False when the scanned EC profile has more than one local maximum.
    pub unimodal: bool,
    pub warning: Option<String>,
}

/// Evaluates `rates` and reports the best point and whether the profile is unimodal.
pub fn scan_rates<T: Real, F>(p_of_rate: &F, phi: T, rates: &[T]) -> Result<(Vec<T>, usize, bool)>
where
    F: Fn(T) -> Result<TransitionProbs<T>>,
{
    let ecs = rates
        .iter()
        .map(|&r| Ok(ec_fixed_rate(&p_of_rate(r)?, r, phi)?.ec))
        .collect::<Result<Vec<T>>>()?;
    let best = ecs
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > ecs[b] { i } else { b });
    Ok((ecs.clone(), best, is_unimodal(&ecs)))
}

/// True when the sequence rises then falls (plateaus ignored).
pub fn is_unimodal<T: Real>(values: &[T]) -> bool {
    let scale = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let tol = scale * lit(1e-13);
    let mut falling = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d > tol {
            if falling {
                return false;
            }
        } else if d < -tol {
            falling = true;
        }
    }
    true
}

fn grid<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    let n = points.max(2);
    (0..n)
        .map(|i| lo + (hi - lo) * count::<T>(i) / count::<T>(n - 1))
        .collect()
}

/// Rate maximizing the fixed-rate EC when `p` depends on the rate.
pub fn optimal_rate<T: Real, F>(p_of_rate: F, phi: T, r_min: T, r_max: T, method: RateSearch) -> Result<RateOptimum<T>>
where
    F: Fn(T) -> Result<TransitionProbs<T>>,
{
    check_phi(phi)?;
    if !(r_min >= T::zero() && r_max > r_min && r_max.is_finite()) {
        return Err(domain("rate bounds must satisfy 0 ≤ r_min < r_max < ∞"));
    }
    match method {
        RateSearch::Grid { points } => {
            if points < 3 {
                return Err(domain("grid search needs at least 3 points"));
            }
            let rates = grid(r_min, r_max, points);
            let (ecs, best, unimodal) = scan_rates(&p_of_rate, phi, &rates)?;
            Ok(RateOptimum {
                r_opt: rates[best],
                ec_opt: ecs[best],
                iterations: points,
                unimodal,
                warning: (!unimodal).then(|| "EC profile is not unimodal".to_string()),
            })
        }
        RateSearch::GradientDescent(cfg) => gradient_descent(&p_of_rate, phi, r_min, r_max, &cfg),
    }
}

fn gradient_descent<T: Real, F>(p_of_rate: &F, phi: T, lo: T, hi: T, cfg: &GdConfig) -> Result<RateOptimum<T>>
where
    F: Fn(T) -> Result<TransitionProbs<T>>,
{
    let width = hi - lo;
    // Cost to minimize: Σ p_i Φ_ii, the argument of the EC logarithm.
    let cost = |r: T| -> Result<T> { Ok(ec_fixed_rate(&p_of_rate(r)?, r, phi)?.log_argument) };
    let h = width * lit(1e-6);
    let grad = |r: T| -> Result<T> {
        let a = (r - h).max(lo);
        let b = (r + h).min(hi);
        Ok((cost(b)? - cost(a)?) / (b - a))
    };
    let tol = width * lit(cfg.tol_fraction);
    let mut beta = width * lit(cfg.step_fraction);
    let mut r = lo + width * lit(0.5);
    let mut c = cost(r)?;
    let mut g = grad(r)?;
    let mut eta = if g != T::zero() { beta / g.abs() } else { T::zero() };
    let mut iterations = 0;
    while iterations < cfg.max_iter && g != T::zero() {
        iterations += 1;
        let mut step = -eta * g;
        if step.abs() > beta {
            step = beta * step.signum();
        }
        let r_new = (r + step).max(lo).min(hi);
        let moved = (r_new - r).abs();
        let c_new = cost(r_new)?;
        if c_new > c {
            eta = eta * lit(0.5);
            beta = beta * lit(0.5);
            if moved < tol {
                break;
            }
            continue;
        }
        r = r_new;
        c = c_new;
        if moved < tol {
            break;
        }
        g = grad(r)?;
        eta = eta * lit(1.5);
    }
    let scan = grid(lo, hi, cfg.scan_points.max(3));
    let (ecs, best, unimodal) = scan_rates(p_of_rate, phi, &scan)?;
    let ec_gd = ec_fixed_rate(&p_of_rate(r)?, r, phi)?.ec;
    if !unimodal && ecs[best] > ec_gd {
        return Ok(RateOptimum {
            r_opt: scan[best],
            ec_opt: ecs[best],
            iterations,
            unimodal,
            warning: Some("EC profile is not unimodal; returning the best scanned rate".into()),
        });
    }
    let warning = if iterations >= cfg.max_iter {
        Some(format!("gradient descent stopped at the iteration cap ({})", cfg.max_iter))
    } else if !unimodal {
        Some("EC profile is not unimodal".into())
    } else {
        None
    };
    Ok(RateOptimum {
        r_opt: r,
        ec_opt: ec_gd,
        iterations,
        unimodal,
        warning,
    })
}
