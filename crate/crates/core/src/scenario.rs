//! End-to-end pipeline from a layout to transition probabilities and ECs.

use crate::channel::{LinkBudget, RadioParams};
use crate::error::{domain, Result};
use crate::geometry::{path_geometry, NetworkLayout, ReferencePoint, RisArray};
use crate::link_stats::{outage_pair, threshold_snr, Access, OutageModel, SinrLaw, SnrModel};
use crate::markov_ec::{
    ec_csit_with_error, ec_fixed_rate, optimal_rate, transitions_csit, EcResult, Integrator, RateOptimum, RateSearch,
    TransitionProbs,
};
use crate::mode_selection::{detection_probs, DetectionProbs, ModeProbs, ModeSelectModel};

/// Most square `(n_z, n_y)` with `n_z · n_y = n`, `n_z ≤ n_y`.
pub fn near_square(n: usize) -> (usize, usize) {
    let mut best = (1, n);
    let mut k = 1;
    while k * k <= n {
        if n.is_multiple_of(k) {
            best = (k, n / k);
        }
        k += 1;
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub layout: NetworkLayout<f64>,
    pub radio: RadioParams<f64>,
    pub pi0: f64,
    /// `σ_PL` as a fraction of `|PL_d − PL_{D_T,BS}|`.
    pub sigma_rel: f64,
    pub access: Access,
    pub outage_model: OutageModel,
}

impl Scenario {
    /// Same scenario with an `n`-element RIS of the same spacing and anchor.
    pub fn with_ris_size(&self, n: usize) -> Result<Self> {
        let (n_z, n_y) = near_square(n);
        let r = &self.layout.ris;
        let ris = RisArray::with_origin(n_z, n_y, r.d_ye, r.d_ze, r.b_q, r.origin)?;
        let mut s = self.clone();
        s.layout.ris = ris;
        Ok(s)
    }

    pub fn evaluate(&self) -> Result<Evaluated> {
        if !(self.sigma_rel > 0.0 && self.sigma_rel.is_finite()) {
            return Err(domain("relative σ_PL must be positive"));
        }
        let geom = path_geometry(&self.layout, ReferencePoint::Center)?;
        let ris = &self.layout.ris;
        let n_total = ris.n_total();
        let budget = LinkBudget::from_geometry(&geom, n_total, ris.d_ye, ris.d_ze, &self.radio)?;
        let snr = SnrModel::new(&budget, n_total)?;
        let m_tau = (budget.pl_d - budget.pl_dt_bs).abs();
        let mode = ModeSelectModel::from_path_losses(self.pi0, budget.pl_d, budget.pl_dt_bs, self.sigma_rel * m_tau)?;
        let detection = detection_probs(&mode)?;
        Ok(Evaluated {
            mode_probs: detection.mode_probs(mode.pi0, mode.pi1),
            budget,
            snr,
            n_total,
            mode,
            detection,
            access: self.access,
            outage_model: self.outage_model,
        })
    }
}

/// A scenario with every rate-independent quantity computed.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub budget: LinkBudget<f64>,
    pub snr: SnrModel<f64>,
    pub n_total: usize,
    pub mode: ModeSelectModel<f64>,
    pub detection: DetectionProbs<f64>,
    pub mode_probs: ModeProbs<f64>,
    pub access: Access,
    pub outage_model: OutageModel,
}

impl Evaluated {
    pub fn d2d_law(&self) -> SinrLaw<f64> {
        self.snr.d2d_law(self.access)
    }

    pub fn cellular_law(&self) -> SinrLaw<f64> {
        self.snr.cellular_law(self.access)
    }

    /// `(D2D, cellular)` outage at rate `r_t`.
    pub fn outages(&self, r_t: f64) -> Result<(f64, f64)> {
        let g = threshold_snr(r_t, self.budget.bandwidth)?;
        Ok(outage_pair(&self.budget, &self.snr, self.n_total, self.access, self.outage_model, g))
    }

    pub fn transitions_no_csit(&self, r_t: f64) -> Result<TransitionProbs<f64>> {
        let (od, oc) = self.outages(r_t)?;
        let m = self.mode_probs;
        TransitionProbs::new([m.d2d * (1.0 - od), m.d2d * od, m.cellular * (1.0 - oc), m.cellular * oc])
    }

    pub fn transitions_csit(&self) -> Result<TransitionProbs<f64>> {
        transitions_csit(&self.mode)
    }

    pub fn ec_no_csit(&self, r_t: f64, phi: f64) -> Result<EcResult<f64>> {
        ec_fixed_rate(&self.transitions_no_csit(r_t)?, r_t, phi)
    }

    pub fn ec_csit(&self, phi: f64, integrator: &Integrator) -> Result<EcResult<f64>> {
        self.ec_csit_with_error(phi, integrator).map(|(r, _)| r)
    }

    pub fn ec_csit_with_error(&self, phi: f64, integrator: &Integrator) -> Result<(EcResult<f64>, f64)> {
        ec_csit_with_error(
            &self.transitions_csit()?,
            phi,
            &self.d2d_law(),
            &self.cellular_law(),
            self.budget.bandwidth,
            integrator,
        )
    }

    pub fn optimal_rate(&self, phi: f64, r_max: f64, method: RateSearch) -> Result<RateOptimum<f64>> {
        optimal_rate(|r| self.transitions_no_csit(r), phi, 0.0, r_max, method)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorization() {
        assert_eq!(near_square(100), (10, 10));
        assert_eq!(near_square(50), (5, 10));
        assert_eq!(near_square(13), (1, 13));
        assert_eq!(near_square(1), (1, 1));
    }
}
