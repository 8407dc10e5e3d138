//! Path-loss based choice between RIS-assisted D2D (H0) and cellular (H1) mode.
//!
//! The statistic `τ = PL̂_d − PL̂_{D_T,BS}` is Gaussian with mean `−m_τ` under H0
//! and `+m_τ` under H1, variance `σ_τ² = 2σ_PL²`. H1 is chosen when `τ > δ`.

use crate::error::{domain, Result};
use crate::numeric::gaussian_q;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// RIS-assisted D2D mode.
    H0,
    /// RIS-assisted cellular mode.
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSelectModel<T> {
    pub pi0: T,
    pub pi1: T,
    pub m_tau: T,
    pub sigma_pl: T,
    pub sigma_tau: T,
    /// True when the layout gave `PL_d − PL_{D_T,BS} < 0` and the hypotheses'
    /// means were relabelled so that `m_τ ≥ 0`.
    pub swapped: bool,
}

impl<T: Real> ModeSelectModel<T> {
    pub fn new(pi0: T, m_tau: T, sigma_pl: T) -> Result<Self> {
        if !(pi0 > T::zero() && pi0 < T::one()) {
            return Err(domain("prior π0 must lie in (0, 1)"));
        }
        if !(m_tau >= T::zero() && m_tau.is_finite()) {
            return Err(domain("m_τ must be finite and nonnegative"));
        }
        if !(sigma_pl >= T::zero() && sigma_pl.is_finite()) {
            return Err(domain("σ_PL must be finite and nonnegative"));
        }
        Ok(Self {
            pi0,
            pi1: T::one() - pi0,
            m_tau,
            sigma_pl,
            sigma_tau: (lit::<T>(2.0) * sigma_pl * sigma_pl).sqrt(),
            swapped: false,
        })
    }

    /// Builds the model from the two path losses, taking `|PL_d − PL_{D_T,BS}|`
    /// and recording a swap when the difference is negative.
    pub fn from_path_losses(pi0: T, pl_d: T, pl_dt_bs: T, sigma_pl: T) -> Result<Self> {
        let diff = pl_d - pl_dt_bs;
        let mut m = Self::new(pi0, diff.abs(), sigma_pl)?;
        m.swapped = diff < T::zero();
        Ok(m)
    }

    pub fn sigma_tau_sq(&self) -> T {
        self.sigma_tau * self.sigma_tau
    }
}

/// `δ = ln(π0/π1) σ_τ² / (2m_τ)`.
pub fn decision_threshold<T: Real>(model: &ModeSelectModel<T>) -> Result<T> {
    if !(model.m_tau > T::zero()) {
        return Err(domain("decision threshold needs m_τ > 0"));
    }
    Ok((model.pi0 / model.pi1).ln() * model.sigma_tau_sq() / (lit::<T>(2.0) * model.m_tau))
}

/// H1 when `τ > δ`, otherwise H0 (ties go to D2D).
pub fn decide<T: Real>(tau: T, delta: T) -> Hypothesis {
    if tau > delta {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionProbs<T> {
    /// P(H1 | H0).
    pub p_e1: T,
    /// P(H0 | H1).
    pub p_e2: T,
    pub p_d1: T,
    pub p_d2: T,
}

/// Probability that each mode is selected under the prior mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeProbs<T> {
    pub d2d: T,
    pub cellular: T,
}

impl<T: Real> DetectionProbs<T> {
    pub fn mode_probs(&self, pi0: T, pi1: T) -> ModeProbs<T> {
        ModeProbs {
            d2d: pi0 * self.p_d1 + pi1 * self.p_e2,
            cellular: pi0 * self.p_e1 + pi1 * self.p_d2,
        }
    }
}

pub fn detection_probs<T: Real>(model: &ModeSelectModel<T>) -> Result<DetectionProbs<T>> {
    if !(model.sigma_tau > T::zero()) {
        return Err(domain("detection probabilities need σ_τ > 0"));
    }
    if !(model.m_tau > T::zero()) {
        return Err(domain("detection probabilities need m_τ > 0"));
    }
    let two = lit::<T>(2.0);
    let l = (model.pi0 / model.pi1).ln() * model.sigma_tau_sq();
    let m2 = two * model.m_tau * model.m_tau;
    let den = two * model.m_tau * model.sigma_tau;
    let p_e1 = gaussian_q((l + m2) / den);
    // 1 − Q(x) = Q(−x) keeps full precision when P_e2 is tiny.
    let p_e2 = gaussian_q(-(l - m2) / den);
    Ok(DetectionProbs {
        p_e1,
        p_e2,
        p_d1: T::one() - p_e1,
        p_d2: T::one() - p_e2,
    })
}

/// Reliability metric as printed: `m_τ² / σ_τ²`.
///
/// The Kullback–Leibler divergence between `N(m, σ²)` and `N(−m, σ²)` is twice
/// this value; see [`crate::oracle::numeric_kld`] for the integral.
pub fn kld<T: Real>(model: &ModeSelectModel<T>) -> Result<T> {
    if !(model.sigma_tau > T::zero()) {
        return Err(domain("KLD needs σ_τ > 0"));
    }
    Ok(model.m_tau * model.m_tau / model.sigma_tau_sq())
}
