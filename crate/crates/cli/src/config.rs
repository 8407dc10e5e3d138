//! Experiment configuration: TOML schema, defaults, overrides and validation.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use risqos::channel::{InterferencePath, RadiationPattern, RadioParams};
use risqos::geometry::{NetworkLayout, Point3, RisArray};
use risqos::harq::{EntryRule, LogBase};
use risqos::link_stats::{Access, OutageModel};
use risqos::oracle::McConfig;
use risqos::scenario::{near_square, Scenario};

/// Shipped configuration; every sweep runs from it unchanged.
pub const DEFAULT_TOML: &str = include_str!("../configs/default.toml");

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Root seed of every random stream.
    pub seed: u64,
    pub layout: LayoutConfig,
    pub ris: RisConfig,
    pub radio: RadioConfig,
    pub mode: ModeConfig,
    pub regime: RegimeConfig,
    pub sweep: SweepConfig,
    pub mc: McSettings,
    pub output: OutputConfig,
}

/// Node positions in metres, `[x, y, z]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    /// Side of the square region the positions were drawn from.
    pub region: f64,
    /// Seed of the recorded draw (informational).
    pub draw_seed: u64,
    pub d_t: [f64; 3],
    pub d_r: [f64; 3],
    pub u_t: [f64; 3],
    pub u_r: [f64; 3],
    pub bs: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisConfig {
    /// Element count; laid out as the most square `n_z × n_y` grid.
    pub n: usize,
    /// Element spacing in metres; half a wavelength when omitted.
    pub d_ye: Option<f64>,
    pub d_ze: Option<f64>,
    pub b_q: u32,
    pub origin: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConfig {
    pub carrier_hz: f64,
    pub bandwidth: f64,
    /// Noise power ω0 in W.
    pub noise: f64,
    pub p_dt: f64,
    pub p_ut: f64,
    pub p_bs: f64,
    pub g_t: f64,
    pub g_r: f64,
    pub g_bs: f64,
    pub g_ris: f64,
    pub rician: f64,
    pub direct_exponent: f64,
    pub pattern: RadiationPattern,
    pub interference_path: InterferencePath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub pi0: f64,
    /// `σ_PL / |PL_d − PL_{D_T,BS}|`.
    pub sigma_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    /// Access modes whose curves are computed.
    pub access: Vec<Access>,
    /// CSIT settings whose curves are computed (`false` = fixed rate).
    pub csit: Vec<bool>,
    pub outage_model: OutageModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Rate,
    Qos,
    Harq,
    Sigma,
    Pon,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] = [Self::Rate, Self::Qos, Self::Harq, Self::Sigma, Self::Pon];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rate => "rate",
            Self::Qos => "qos",
            Self::Harq => "harq",
            Self::Sigma => "sigma",
            Self::Pon => "pon",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub rate: RateSweep,
    pub qos: QosSweep,
    pub harq: HarqSweep,
    pub sigma: SigmaSweep,
    pub pon: PonSweep,
}

/// EC against the fixed rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSweep {
    pub phis: Vec<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
}

/// EC against the QoS exponent, log-spaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosSweep {
    pub phi_min: f64,
    pub phi_max: f64,
    pub steps: usize,
    pub n_values: Vec<usize>,
    /// Upper bound of the rate search.
    pub r_max: f64,
}

/// EC against the retransmission limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarqSweep {
    pub x_min: usize,
    pub x_max: usize,
    pub l: usize,
    pub phi: f64,
    /// Target drop probability after the last attempt; sets the rate per X.
    pub drop_target: f64,
    /// Per-block SINR draws per mode (common random numbers).
    pub trials: usize,
    pub access: Access,
    pub log_base: LogBase,
    pub entries: EntryRule,
}

/// EC against the relative path-loss estimation error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaSweep {
    pub sigma_rel_min: f64,
    pub sigma_rel_max: f64,
    pub steps: usize,
    pub phi: f64,
    pub r_max: f64,
}

/// EC against P_ON at a fixed rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PonSweep {
    pub r_t: f64,
    pub phi: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    /// Trials per oracle estimate.
    pub trials: u64,
    pub workers: usize,
    /// z-multiplier for pass/fail checks.
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub plots: bool,
}

impl ExperimentConfig {
    pub fn default_config() -> Self {
        Self::from_toml(DEFAULT_TOML).expect("shipped default config is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.radio.carrier_hz
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let r = &self.radio;
        let positive = [
            ("radio.carrier_hz", r.carrier_hz),
            ("radio.bandwidth", r.bandwidth),
            ("radio.noise", r.noise),
            ("radio.p_dt", r.p_dt),
            ("radio.p_ut", r.p_ut),
            ("radio.p_bs", r.p_bs),
            ("radio.g_t", r.g_t),
            ("radio.g_r", r.g_r),
            ("radio.g_bs", r.g_bs),
            ("radio.g_ris", r.g_ris),
            ("radio.direct_exponent", r.direct_exponent),
            ("layout.region", self.layout.region),
            ("mode.sigma_rel", self.mode.sigma_rel),
            ("mc.confidence", self.mc.confidence),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive and finite"));
            }
        }
        if !(r.rician >= 0.0) {
            return invalid("radio.rician must be nonnegative");
        }
        if !(self.mode.pi0 > 0.0 && self.mode.pi0 < 1.0) {
            return invalid("mode.pi0 must lie in (0, 1)");
        }
        if self.ris.n == 0 {
            return invalid("ris.n must be positive");
        }
        for d in [self.ris.d_ye, self.ris.d_ze].into_iter().flatten() {
            if !(d > 0.0) {
                return invalid("RIS spacing must be positive");
            }
        }
        if self.regime.access.is_empty() || self.regime.csit.is_empty() {
            return invalid("regime.access and regime.csit must list at least one entry");
        }
        if self.mc.trials < 1000 || self.mc.workers == 0 {
            return invalid("mc.trials must be ≥ 1000 and mc.workers ≥ 1");
        }
        let s = &self.sweep;
        let range = |name: &str, lo: f64, hi: f64, steps: usize| -> Result<(), ConfigError> {
            if steps == 0 {
                return invalid(format!("sweep.{name}: zero-step range"));
            }
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return invalid(format!("sweep.{name}: empty range [{lo}, {hi}]"));
            }
            Ok(())
        };
        range("rate", s.rate.r_min, s.rate.r_max, s.rate.steps)?;
        if s.rate.r_min < 0.0 || s.rate.phis.is_empty() || s.rate.phis.iter().any(|p| !(*p > 0.0)) {
            return invalid("sweep.rate: need r_min ≥ 0 and positive φ values");
        }
        range("qos", s.qos.phi_min, s.qos.phi_max, s.qos.steps)?;
        if s.qos.phi_min <= 0.0 || s.qos.n_values.is_empty() || s.qos.n_values.contains(&0) || !(s.qos.r_max > 0.0) {
            return invalid("sweep.qos: need φ_min > 0, nonzero N values and r_max > 0");
        }
        let h = &s.harq;
        if h.x_min == 0 || h.x_min > h.x_max || h.x_max > risqos::harq::MAX_ATTEMPTS {
            return invalid("sweep.harq: need 1 ≤ x_min ≤ x_max ≤ 64");
        }
        if h.l == 0 || !(h.phi > 0.0) || !(h.drop_target > 0.0 && h.drop_target < 1.0) || h.trials == 0 {
            return invalid("sweep.harq: need l ≥ 1, φ > 0, drop target in (0,1), trials ≥ 1");
        }
        range("sigma", s.sigma.sigma_rel_min, s.sigma.sigma_rel_max, s.sigma.steps)?;
        if s.sigma.sigma_rel_min <= 0.0 || !(s.sigma.phi > 0.0) || !(s.sigma.r_max > 0.0) {
            return invalid("sweep.sigma: need σ_min > 0, φ > 0, r_max > 0");
        }
        if s.pon.steps < 2 || !(s.pon.r_t > 0.0) || !(s.pon.phi > 0.0) {
            return invalid("sweep.pon: need ≥ 2 steps, r_t > 0, φ > 0");
        }
        self.scenario().map(|_| ()).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn radio_params(&self) -> RadioParams<f64> {
        let r = &self.radio;
        RadioParams {
            p_dt: r.p_dt,
            p_ut: r.p_ut,
            p_bs: r.p_bs,
            noise: r.noise,
            bandwidth: r.bandwidth,
            g_t: r.g_t,
            g_r: r.g_r,
            g_bs: r.g_bs,
            g_ris: r.g_ris,
            wavelength: self.wavelength(),
            rician: r.rician,
            direct_exponent: r.direct_exponent,
            pattern: r.pattern,
            interference_path: r.interference_path,
        }
    }

    pub fn ris_array(&self) -> risqos::Result<RisArray<f64>> {
        let half = self.wavelength() / 2.0;
        let (n_z, n_y) = near_square(self.ris.n);
        let o = self.ris.origin;
        RisArray::with_origin(
            n_z,
            n_y,
            self.ris.d_ye.unwrap_or(half),
            self.ris.d_ze.unwrap_or(half),
            self.ris.b_q,
            Point3::new(o[0], o[1], o[2]),
        )
    }

    pub fn network_layout(&self) -> risqos::Result<NetworkLayout<f64>> {
        let p = |v: [f64; 3]| Point3::new(v[0], v[1], v[2]);
        let l = &self.layout;
        NetworkLayout::new(p(l.d_t), p(l.d_r), p(l.u_t), p(l.u_r), p(l.bs), self.ris_array()?)
    }

    /// Scenario for one access mode.
    pub fn scenario_for(&self, access: Access) -> risqos::Result<Scenario> {
        Ok(Scenario {
            layout: self.network_layout()?,
            radio: self.radio_params(),
            pi0: self.mode.pi0,
            sigma_rel: self.mode.sigma_rel,
            access,
            outage_model: self.regime.outage_model,
        })
    }

    pub fn scenario(&self) -> risqos::Result<Scenario> {
        let s = self.scenario_for(self.regime.access[0])?;
        s.evaluate()?;
        Ok(s)
    }

    pub fn mc_config(&self) -> McConfig {
        McConfig {
            seed: self.seed,
            trials: self.mc.trials,
            workers: self.mc.workers,
            confidence: self.mc.confidence,
        }
    }

    /// SHA-256 of the canonical JSON form, ignoring worker count and output
    /// settings (neither changes any number).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.mc.workers = 1;
        c.output = OutputConfig {
            dir: String::new(),
            plots: false,
        };
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_parses_and_validates() {
        let c = ExperimentConfig::default_config();
        assert_eq!(c.ris.n, 100);
        assert!((c.wavelength() - 0.124_913_524).abs() < 1e-8);
    }

    #[test]
    fn zero_steps_rejected() {
        let mut c = ExperimentConfig::default_config();
        c.sweep.rate.steps = 0;
        assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))));
        let mut c = ExperimentConfig::default_config();
        c.sweep.sigma.sigma_rel_max = c.sweep.sigma.sigma_rel_min;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = format!("{DEFAULT_TOML}\nbogus = 1\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn hash_ignores_workers_and_output() {
        let a = ExperimentConfig::default_config();
        let mut b = a.clone();
        b.mc.workers = 8;
        b.output.dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }
}
