//! SNR/SINR, capacities, mean SNRs and outage probabilities.
//!
//! Statistical formulas use the exponential surrogate: the RIS-reflected
//! signal power `ψ` and interference power `I` are exponential with the
//! rates `α1, α2, β1, β2, β3`.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::channel::{coherent_sum, ChannelRealization, LinkBudget};
use crate::error::{domain, Result};
use crate::oracle::exact_ratio_cdf;
use crate::scalar::{count, lit, to_f64, Real};

/// `γ_T = 2^{r_t/B} − 1`.
pub fn threshold_snr<T: Real>(r_t: T, bandwidth: T) -> Result<T> {
    if !(r_t >= T::zero()) || !(bandwidth > T::zero()) {
        return Err(domain("threshold needs r_t ≥ 0 and B > 0"));
    }
    Ok((r_t / bandwidth).exp2() - T::one())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateThreshold<T> {
    pub r_t: T,
    pub gamma_t: T,
}

impl<T: Real> RateThreshold<T> {
    pub fn new(r_t: T, bandwidth: T) -> Result<Self> {
        Ok(Self {
            r_t,
            gamma_t: threshold_snr(r_t, bandwidth)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    D2d,
    Uplink,
    Downlink,
}

/// Instantaneous SNR (overlay) or SINR (underlay) of one link.
pub fn instantaneous_sinr<T: Real>(
    link: LinkKind,
    realization: &ChannelRealization<T>,
    budget: &LinkBudget<T>,
    underlay: bool,
) -> T {
    let (coeffs, power, pl, interference) = match link {
        LinkKind::D2d => (
            &realization.d2d,
            budget.p_dt,
            budget.pl_d,
            budget.p_ut * realization.ut_dr.norm_sqr() / budget.pl_ut_dr,
        ),
        LinkKind::Uplink => (
            &realization.uplink,
            budget.p_dt,
            budget.pl_dt_bs,
            budget.p_ut * realization.ut_bs.norm_sqr() / budget.pl_ut_bs,
        ),
        LinkKind::Downlink => (
            &realization.downlink,
            budget.p_bs,
            budget.pl_bs_dr,
            budget.p_ut * realization.ut_dr.norm_sqr() / budget.pl_ut_dr,
        ),
    };
    let signal = power * coherent_sum(coeffs, &realization.phases).norm_sqr() / pl;
    let denom = if underlay {
        interference + budget.noise
    } else {
        budget.noise
    };
    signal / denom
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkSinr<T> {
    D2d(T),
    Cellular { uplink: T, downlink: T },
}

/// `B log2(1+Γ)` for D2D, `0.5 B log2(1+min(Γ_ul, Γ_dl))` for the two-hop cellular link.
pub fn capacity<T: Real>(link: LinkSinr<T>, bandwidth: T) -> Result<T> {
    match link {
        LinkSinr::D2d(g) => {
            if !(g >= T::zero()) {
                return Err(domain("SINR must be nonnegative"));
            }
            Ok(bandwidth * g.ln_1p() / T::LN_2())
        }
        LinkSinr::Cellular { uplink, downlink } => {
            if !(uplink >= T::zero() && downlink >= T::zero()) {
                return Err(domain("SINR must be nonnegative"));
            }
            Ok(lit::<T>(0.5) * bandwidth * uplink.min(downlink).ln_1p() / T::LN_2())
        }
    }
}

fn n_pi<T: Real>(n_total: usize) -> T {
    count::<T>(n_total) * T::PI()
}

/// `κ_d = Nπ P̄_{D_T} / (PL_d ω0)`.
pub fn mean_snr_d2d<T: Real>(budget: &LinkBudget<T>, n_total: usize) -> T {
    n_pi::<T>(n_total) * budget.p_dt / (budget.pl_d * budget.noise)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellularMeans<T> {
    pub kappa_ul: T,
    pub kappa_dl: T,
    pub kappa_c: T,
}

/// Per-hop mean SNRs and the mean of their minimum,
/// `κ_c = Nπ P̄_{D_T} P̄_{BS} / (ω0 (P̄_{D_T} PL_{BS,D_R} + P̄_{BS} PL_{D_T,BS}))`.
pub fn mean_snr_cellular<T: Real>(budget: &LinkBudget<T>, n_total: usize) -> CellularMeans<T> {
    let np = n_pi::<T>(n_total);
    CellularMeans {
        kappa_ul: np * budget.p_dt / (budget.pl_dt_bs * budget.noise),
        kappa_dl: np * budget.p_bs / (budget.pl_bs_dr * budget.noise),
        kappa_c: np * budget.p_dt * budget.p_bs
            / (budget.noise * (budget.p_dt * budget.pl_bs_dr + budget.p_bs * budget.pl_dt_bs)),
    }
}

/// Outage as printed for the D2D SIR, before clamping.
pub fn outage_d2d_paper_raw<T: Real>(budget: &LinkBudget<T>, n_total: usize, gamma_t: T) -> T {
    let b = budget;
    b.p_ut * b.pl_d * gamma_t / (b.pl_d * b.p_ut + b.pl_ut_dr * b.p_dt * n_pi::<T>(n_total))
}

/// Outage as printed for the cellular SIR, before clamping.
pub fn outage_cellular_paper_raw<T: Real>(budget: &LinkBudget<T>, n_total: usize, gamma_t: T) -> T {
    let b = budget;
    let np = n_pi::<T>(n_total);
    let omega1 = b.p_dt * b.pl_ut_bs * np;
    let omega2 = b.p_bs * b.pl_ut_dr * np;
    let two = lit::<T>(2.0);
    let num = b.p_ut * gamma_t * (b.pl_dt_bs * (b.p_ut * b.pl_bs_dr * (two - gamma_t) + omega1) - b.pl_bs_dr * omega2);
    num / ((b.p_ut * b.pl_dt_bs + omega1) * (b.p_ut * b.pl_bs_dr + omega2))
}

fn clamp01<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

pub fn outage_d2d_paper<T: Real>(budget: &LinkBudget<T>, n_total: usize, gamma_t: T) -> T {
    clamp01(outage_d2d_paper_raw(budget, n_total, gamma_t))
}

pub fn outage_cellular_paper<T: Real>(budget: &LinkBudget<T>, n_total: usize, gamma_t: T) -> T {
    clamp01(outage_cellular_paper_raw(budget, n_total, gamma_t))
}

/// Which outage expressions feed the no-CSIT underlay chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutageModel {
    /// The printed closed forms, clamped to [0, 1].
    #[default]
    Paper,
    /// Exact CDFs of the exponential-ratio SIRs.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Access {
    /// Orthogonal resources, noise limited.
    Overlay,
    /// Shared resources, interference limited.
    Underlay,
}

/// Distribution of an instantaneous SNR/SIR under the exponential surrogate.
#[derive(Debug, Clone, PartialEq)]
pub enum SinrLaw<T> {
    Exponential { mean: T },
    /// `ψ/I` with independent exponential `ψ` and `I`.
    Ratio { signal_mean: T, interference_mean: T },
    /// Minimum of two independent laws.
    Min(Box<SinrLaw<T>>, Box<SinrLaw<T>>),
}

impl<T: Real> SinrLaw<T> {
    /// `P(Γ > g)`.
    pub fn survival(&self, g: T) -> T {
        if g <= T::zero() {
            return T::one();
        }
        match self {
            SinrLaw::Exponential { mean } => (-g / *mean).exp(),
            SinrLaw::Ratio {
                signal_mean,
                interference_mean,
            } => *signal_mean / (*signal_mean + g * *interference_mean),
            SinrLaw::Min(a, b) => a.survival(g) * b.survival(g),
        }
    }

    pub fn cdf(&self, g: T) -> T {
        T::one() - self.survival(g)
    }

    /// Outage `P(Γ < γ)` without cancellation for small `γ`.
    pub fn outage(&self, g: T) -> T {
        if g <= T::zero() {
            return T::zero();
        }
        match self {
            SinrLaw::Exponential { mean } => -(-g / *mean).exp_m1(),
            SinrLaw::Ratio {
                signal_mean,
                interference_mean,
            } => exact_ratio_cdf(signal_mean.recip(), interference_mean.recip(), g),
            SinrLaw::Min(a, b) => {
                let (fa, fb) = (a.outage(g), b.outage(g));
                fa + fb - fa * fb
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SinrLaw::Exponential { mean } => to_f64(*mean) * rng.sample::<f64, _>(Exp1),
            SinrLaw::Ratio {
                signal_mean,
                interference_mean,
            } => {
                let s = to_f64(*signal_mean) * rng.sample::<f64, _>(Exp1);
                let i = to_f64(*interference_mean) * rng.sample::<f64, _>(Exp1);
                s / i
            }
            SinrLaw::Min(a, b) => {
                let x = a.sample(rng);
                let y = b.sample(rng);
                x.min(y)
            }
        }
    }
}

/// Mean SNRs and exponential rate parameters of every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrModel<T> {
    pub kappa_d: T,
    pub kappa_c: T,
    pub kappa_ul: T,
    pub kappa_dl: T,
    /// Rate of `ψ_d`: `PL_d / (Nπ P̄_{D_T})`.
    pub alpha1: T,
    /// Rate of the interference at D_R: `PL_{U_T,D_R} / P̄_{U_T}`.
    pub alpha2: T,
    /// Rate of `ψ_ul`: `PL_{D_T,BS} / (Nπ P̄_{D_T})`.
    pub beta1: T,
    /// Rate of `ψ_dl`: `PL_{BS,D_R} / (Nπ P̄_{BS})`.
    pub beta2: T,
    /// Rate of the interference at the BS: `PL_{U_T,BS} / P̄_{U_T}`.
    pub beta3: T,
}

impl<T: Real> SnrModel<T> {
    pub fn new(budget: &LinkBudget<T>, n_total: usize) -> Result<Self> {
        budget.validate()?;
        if n_total == 0 {
            return Err(domain("n_total must be positive"));
        }
        let np = n_pi::<T>(n_total);
        let c = mean_snr_cellular(budget, n_total);
        Ok(Self {
            kappa_d: mean_snr_d2d(budget, n_total),
            kappa_c: c.kappa_c,
            kappa_ul: c.kappa_ul,
            kappa_dl: c.kappa_dl,
            alpha1: budget.pl_d / (np * budget.p_dt),
            alpha2: budget.pl_ut_dr / budget.p_ut,
            beta1: budget.pl_dt_bs / (np * budget.p_dt),
            beta2: budget.pl_bs_dr / (np * budget.p_bs),
            beta3: budget.pl_ut_bs / budget.p_ut,
        })
    }

    pub fn d2d_law(&self, access: Access) -> SinrLaw<T> {
        match access {
            Access::Overlay => SinrLaw::Exponential { mean: self.kappa_d },
            Access::Underlay => SinrLaw::Ratio {
                signal_mean: self.alpha1.recip(),
                interference_mean: self.alpha2.recip(),
            },
        }
    }

    pub fn cellular_law(&self, access: Access) -> SinrLaw<T> {
        match access {
            Access::Overlay => SinrLaw::Exponential { mean: self.kappa_c },
            Access::Underlay => SinrLaw::Min(
                Box::new(SinrLaw::Ratio {
                    signal_mean: self.beta1.recip(),
                    interference_mean: self.beta3.recip(),
                }),
                Box::new(SinrLaw::Ratio {
                    signal_mean: self.beta2.recip(),
                    interference_mean: self.alpha2.recip(),
                }),
            ),
        }
    }
}

/// Exact outage of the D2D SIR, `γα1/(α2 + γα1)`.
pub fn outage_d2d_exact<T: Real>(snr: &SnrModel<T>, gamma_t: T) -> T {
    exact_ratio_cdf(snr.alpha1, snr.alpha2, gamma_t)
}

/// Exact outage of the cellular SIR, `1 − (1 − F_ul)(1 − F_dl)`.
pub fn outage_cellular_exact<T: Real>(snr: &SnrModel<T>, gamma_t: T) -> T {
    let ul = exact_ratio_cdf(snr.beta1, snr.beta3, gamma_t);
    let dl = exact_ratio_cdf(snr.beta2, snr.alpha2, gamma_t);
    ul + dl - ul * dl
}

/// Outage pair `(D2D, cellular)` at threshold `γ_T`.
pub fn outage_pair<T: Real>(
    budget: &LinkBudget<T>,
    snr: &SnrModel<T>,
    n_total: usize,
    access: Access,
    model: OutageModel,
    gamma_t: T,
) -> (T, T) {
    match (access, model) {
        (Access::Overlay, _) => (
            snr.d2d_law(Access::Overlay).outage(gamma_t),
            snr.cellular_law(Access::Overlay).outage(gamma_t),
        ),
        (Access::Underlay, OutageModel::Paper) => (
            outage_d2d_paper(budget, n_total, gamma_t),
            outage_cellular_paper(budget, n_total, gamma_t),
        ),
        (Access::Underlay, OutageModel::Exact) => {
            (outage_d2d_exact(snr, gamma_t), outage_cellular_exact(snr, gamma_t))
        }
    }
}
