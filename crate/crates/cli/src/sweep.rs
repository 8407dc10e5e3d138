//! The five parameter sweeps.

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use risqos::harq::{ec_harq, rate_for_drop_target, BlockDraws, HarqModel};
use risqos::link_stats::{threshold_snr, Access};
use risqos::markov_ec::{ec_fixed_rate, GdConfig, Integrator, RateSearch, TransitionProbs};
use risqos::numeric::rng::domain_tag;
use risqos::numeric::QuadConfig;
use risqos::oracle::{companion_root_modulus, mc_effective_capacity, MarkovService, McConfig, Service};
use risqos::scenario::Evaluated;

use crate::config::{ExperimentConfig, SweepVariable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

fn col(name: impl Into<String>, unit: &str) -> Column {
    Column {
        name: name.into(),
        unit: unit.into(),
    }
}

/// How a result is drawn: `y` columns against `x`, one curve per distinct
/// value of `series` (if any) and per `y` column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub x: String,
    pub y: Vec<String>,
    pub series: Option<String>,
    pub x_log: bool,
    pub x_label: String,
    pub y_label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub sweep: SweepVariable,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub plot: PlotSpec,
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Rows whose `key` column equals `value`.
    pub fn filter(&self, key: &str, value: f64) -> SweepResult {
        let i = self.column_index(key).expect("filter column exists");
        SweepResult {
            rows: self.rows.iter().filter(|r| r[i] == value).cloned().collect(),
            ..self.clone()
        }
    }
}

pub fn access_name(a: Access) -> &'static str {
    match a {
        Access::Overlay => "overlay",
        Access::Underlay => "underlay",
    }
}

pub fn regime_name(a: Access, csit: bool) -> String {
    if csit {
        format!("{}_csit", access_name(a))
    } else {
        access_name(a).to_string()
    }
}

pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
}

/// Log-spaced points with the endpoints pinned exactly.
pub fn logspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let mut v: Vec<f64> = linspace(lo.log10(), hi.log10(), steps)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect();
    v[0] = lo;
    if steps > 1 {
        v[steps - 1] = hi;
    }
    v
}

fn gd() -> RateSearch {
    RateSearch::GradientDescent(GdConfig::default())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building worker pool")
}

/// Runs `f` over `items` on `workers` threads, keeping input order.
fn ordered<I: Sync, O: Send>(workers: usize, items: &[I], f: impl Fn(usize, &I) -> Result<O> + Sync) -> Result<Vec<O>> {
    pool(workers)?.install(|| items.par_iter().enumerate().map(|(i, it)| f(i, it)).collect())
}

struct Oracle {
    cfg: McConfig,
    domain: u64,
}

impl Oracle {
    fn new(cfg: &ExperimentConfig, label: &str) -> Self {
        Self {
            cfg: cfg.mc_config().with_workers(1),
            domain: domain_tag(label),
        }
    }

    /// Monte Carlo EC of the fixed-rate service, simulating the SINR of the
    /// selected mode each block.
    fn fixed_rate_ec(&self, ev: &Evaluated, r_t: f64, phi: f64, index: u64) -> Result<(f64, f64)> {
        let g = threshold_snr(r_t, ev.budget.bandwidth)?;
        let m = ev.mode_probs;
        let process = MarkovService {
            p: [m.d2d, 0.0, m.cellular, 0.0],
            service: [
                Service::Threshold {
                    law: ev.d2d_law(),
                    gamma_t: g,
                    rate: r_t,
                },
                Service::Fixed(0.0),
                Service::Threshold {
                    law: ev.cellular_law(),
                    gamma_t: g,
                    rate: r_t,
                },
                Service::Fixed(0.0),
            ],
        };
        let e = mc_effective_capacity(&process, phi, 1, &self.cfg, self.domain ^ index.wrapping_mul(0x9E37_79B9))?;
        Ok((e.mean, e.std_error))
    }
}

pub fn run_sweep(cfg: &ExperimentConfig, variable: SweepVariable, with_oracle: bool) -> Result<SweepResult> {
    match variable {
        SweepVariable::Rate => rate_sweep(cfg, with_oracle),
        SweepVariable::Qos => qos_sweep(cfg, with_oracle),
        SweepVariable::Harq => harq_sweep(cfg, with_oracle),
        SweepVariable::Sigma => sigma_sweep(cfg, with_oracle),
        SweepVariable::Pon => pon_sweep(cfg, with_oracle),
    }
}

fn evaluated(cfg: &ExperimentConfig) -> Result<Vec<(Access, Evaluated)>> {
    cfg.regime
        .access
        .iter()
        .map(|&a| Ok((a, cfg.scenario_for(a)?.evaluate()?)))
        .collect()
}

fn rate_sweep(cfg: &ExperimentConfig, with_oracle: bool) -> Result<SweepResult> {
    let s = &cfg.sweep.rate;
    let evs = evaluated(cfg)?;
    let mut columns = vec![col("phi", "1/bit"), col("r_t", "bit/s/Hz")];
    for (a, _) in &evs {
        let n = access_name(*a);
        columns.extend([
            col(format!("ec_{n}"), "bit/s/Hz"),
            col(format!("p_on_{n}"), "probability"),
            col(format!("r_opt_{n}"), "bit/s/Hz"),
            col(format!("ec_opt_{n}"), "bit/s/Hz"),
            col(format!("unimodal_{n}"), "flag"),
        ]);
        if with_oracle {
            columns.extend([col(format!("oracle_delta_{n}"), "bit/s/Hz"), col(format!("oracle_se_{n}"), "bit/s/Hz")]);
        }
    }
    // Optimum per (φ, access).
    let pairs: Vec<(f64, usize)> = s.phis.iter().flat_map(|&p| (0..evs.len()).map(move |k| (p, k))).collect();
    let optima = ordered(cfg.mc.workers, &pairs, |_, &(phi, k)| Ok(evs[k].1.optimal_rate(phi, s.r_max, gd())?))?;
    let rates = linspace(s.r_min, s.r_max, s.steps);
    let points: Vec<(usize, f64)> = (0..s.phis.len()).flat_map(|i| rates.iter().map(move |&r| (i, r))).collect();
    let oracle = Oracle::new(cfg, "sweep/rate");
    let mut warnings = Vec::new();
    for o in &optima {
        warnings.extend(o.warning.clone());
    }
    let rows = ordered(cfg.mc.workers, &points, |idx, &(i, r)| {
        let phi = s.phis[i];
        let mut row = vec![phi, r];
        for (k, (_, ev)) in evs.iter().enumerate() {
            let o = &optima[i * evs.len() + k];
            let res = ev.ec_no_csit(r, phi)?;
            row.extend([res.ec, res.p_on, o.r_opt, o.ec_opt, o.unimodal as u8 as f64]);
            if with_oracle {
                let (m, se) = oracle.fixed_rate_ec(ev, r, phi, (idx * evs.len() + k) as u64)?;
                row.extend([m - res.ec, se]);
            }
        }
        Ok(row)
    })?;
    Ok(SweepResult {
        sweep: SweepVariable::Rate,
        plot: PlotSpec {
            x: "r_t".into(),
            y: evs.iter().map(|(a, _)| format!("ec_{}", access_name(*a))).collect(),
            series: Some("phi".into()),
            x_log: false,
            x_label: "r_t (bit/s/Hz)".into(),
            y_label: "EC (bit/s/Hz)".into(),
        },
        columns,
        rows,
        warnings,
    })
}

/// EC columns shared by the QoS and σ sweeps: for each access × CSIT setting.
fn regime_columns(cfg: &ExperimentConfig, with_oracle: bool) -> Vec<Column> {
    let mut columns = Vec::new();
    for &a in &cfg.regime.access {
        for &c in &cfg.regime.csit {
            let n = regime_name(a, c);
            columns.push(col(format!("ec_{n}"), "bit/s/Hz"));
            if !c {
                columns.push(col(format!("r_opt_{n}"), "bit/s/Hz"));
            }
            if with_oracle {
                columns.extend([col(format!("oracle_delta_{n}"), "bit/s/Hz"), col(format!("oracle_se_{n}"), "bit/s/Hz")]);
            }
        }
    }
    columns
}

fn regime_values(
    cfg: &ExperimentConfig,
    evs: &[(Access, Evaluated)],
    phi: f64,
    r_max: f64,
    oracle: Option<(&Oracle, u64)>,
) -> Result<(Vec<f64>, Vec<String>)> {
    let mut row = Vec::new();
    let mut warnings = Vec::new();
    for (k, (_, ev)) in evs.iter().enumerate() {
        for (j, &csit) in cfg.regime.csit.iter().enumerate() {
            let sub = (k * cfg.regime.csit.len() + j) as u64;
            if csit {
                let res = ev.ec_csit(phi, &Integrator::Quadrature(QuadConfig::default()))?;
                row.push(res.ec);
                if let Some((o, idx)) = oracle {
                    let (mc, se) = ev.ec_csit_with_error(
                        phi,
                        &Integrator::MonteCarlo {
                            cfg: o.cfg,
                            domain: o.domain ^ (idx * 16 + sub).wrapping_mul(0x9E37_79B9),
                        },
                    )?;
                    row.extend([mc.ec - res.ec, se]);
                }
            } else {
                let opt = ev.optimal_rate(phi, r_max, gd())?;
                warnings.extend(opt.warning.clone());
                row.extend([opt.ec_opt, opt.r_opt]);
                if let Some((o, idx)) = oracle {
                    let (m, se) = o.fixed_rate_ec(ev, opt.r_opt, phi, idx * 16 + sub)?;
                    row.extend([m - opt.ec_opt, se]);
                }
            }
        }
    }
    Ok((row, warnings))
}

fn regime_plot_columns(cfg: &ExperimentConfig) -> Vec<String> {
    cfg.regime
        .access
        .iter()
        .flat_map(|&a| cfg.regime.csit.iter().map(move |&c| format!("ec_{}", regime_name(a, c))))
        .collect()
}

fn qos_sweep(cfg: &ExperimentConfig, with_oracle: bool) -> Result<SweepResult> {
    let s = &cfg.sweep.qos;
    let mut columns = vec![col("n", "elements"), col("phi", "1/bit")];
    columns.extend(regime_columns(cfg, with_oracle));
    let mut per_n = Vec::new();
    for &n in &s.n_values {
        let evs: Vec<(Access, Evaluated)> = cfg
            .regime
            .access
            .iter()
            .map(|&a| Ok((a, cfg.scenario_for(a)?.with_ris_size(n)?.evaluate()?)))
            .collect::<Result<_>>()?;
        per_n.push((n, evs));
    }
    let phis = logspace(s.phi_min, s.phi_max, s.steps);
    let points: Vec<(usize, f64)> = (0..per_n.len()).flat_map(|i| phis.iter().map(move |&p| (i, p))).collect();
    let oracle = Oracle::new(cfg, "sweep/qos");
    let out = ordered(cfg.mc.workers, &points, |idx, &(i, phi)| {
        let (n, evs) = &per_n[i];
        let (vals, w) = regime_values(cfg, evs, phi, s.r_max, with_oracle.then_some((&oracle, idx as u64)))?;
        let mut row = vec![*n as f64, phi];
        row.extend(vals);
        Ok((row, w))
    })?;
    let (rows, warnings) = split(out);
    Ok(SweepResult {
        sweep: SweepVariable::Qos,
        plot: PlotSpec {
            x: "phi".into(),
            y: regime_plot_columns(cfg),
            series: Some("n".into()),
            x_log: true,
            x_label: "QoS exponent φ".into(),
            y_label: "EC (bit/s/Hz)".into(),
        },
        columns,
        rows,
        warnings,
    })
}

fn split(out: Vec<(Vec<f64>, Vec<String>)>) -> (Vec<Vec<f64>>, Vec<String>) {
    let mut rows = Vec::with_capacity(out.len());
    let mut warnings = Vec::new();
    for (r, w) in out {
        rows.push(r);
        warnings.extend(w);
    }
    (rows, warnings)
}

fn sigma_sweep(cfg: &ExperimentConfig, with_oracle: bool) -> Result<SweepResult> {
    let s = &cfg.sweep.sigma;
    let mut columns = vec![
        col("sigma_rel", "ratio"),
        col("sigma_pl", "linear path loss"),
        col("p_e1", "probability"),
        col("p_e2", "probability"),
    ];
    columns.extend(regime_columns(cfg, with_oracle));
    let sigmas = linspace(s.sigma_rel_min, s.sigma_rel_max, s.steps);
    let oracle = Oracle::new(cfg, "sweep/sigma");
    let out = ordered(cfg.mc.workers, &sigmas, |idx, &sr| {
        let mut c = cfg.clone();
        c.mode.sigma_rel = sr;
        let evs = evaluated(&c)?;
        let ev0 = &evs[0].1;
        let mut row = vec![sr, ev0.mode.sigma_pl, ev0.detection.p_e1, ev0.detection.p_e2];
        let (vals, w) = regime_values(&c, &evs, s.phi, s.r_max, with_oracle.then_some((&oracle, idx as u64)))?;
        row.extend(vals);
        Ok((row, w))
    })?;
    let (rows, warnings) = split(out);
    Ok(SweepResult {
        sweep: SweepVariable::Sigma,
        plot: PlotSpec {
            x: "sigma_rel".into(),
            y: regime_plot_columns(cfg),
            series: None,
            x_log: false,
            x_label: "σ_PL / m_τ".into(),
            y_label: "EC (bit/s/Hz)".into(),
        },
        columns,
        rows,
        warnings,
    })
}

fn pon_sweep(cfg: &ExperimentConfig, with_oracle: bool) -> Result<SweepResult> {
    let s = &cfg.sweep.pon;
    let ev = cfg.scenario_for(cfg.regime.access[0])?.evaluate()?;
    let base = ev.transitions_no_csit(s.r_t)?;
    let mut columns = vec![col("p_on", "probability"), col("ec", "bit/s/Hz")];
    if with_oracle {
        columns.extend([col("oracle_delta", "bit/s/Hz"), col("oracle_se", "bit/s/Hz")]);
    }
    let targets = linspace(0.0, 1.0, s.steps);
    let oracle = Oracle::new(cfg, "sweep/pon");
    let rows = ordered(cfg.mc.workers, &targets, |idx, &t| {
        let p = base.with_p_on(t)?;
        let res = ec_fixed_rate(&p, s.r_t, s.phi)?;
        let mut row = vec![t, res.ec];
        if with_oracle {
            let e = mc_effective_capacity(
                &MarkovService::fixed_rate(p.probs(), s.r_t),
                s.phi,
                1,
                &oracle.cfg,
                oracle.domain ^ (idx as u64).wrapping_mul(0x9E37_79B9),
            )?;
            row.extend([e.mean - res.ec, e.std_error]);
        }
        Ok(row)
    })?;
    Ok(SweepResult {
        sweep: SweepVariable::Pon,
        plot: PlotSpec {
            x: "p_on".into(),
            y: vec!["ec".into()],
            series: None,
            x_log: false,
            x_label: "P_ON".into(),
            y_label: "EC (bit/s/Hz)".into(),
        },
        columns,
        rows,
        warnings: vec![format!(
            "base P_ON at r_t = {} is {} ({} access)",
            s.r_t,
            base.p_on(),
            access_name(cfg.regime.access[0])
        )],
    })
}

fn harq_sweep(cfg: &ExperimentConfig, with_oracle: bool) -> Result<SweepResult> {
    let h = &cfg.sweep.harq;
    let ev = cfg.scenario_for(h.access)?.evaluate()?;
    let m = ev.mode_probs;
    let p = TransitionProbs::new([m.d2d, 0.0, m.cellular, 0.0])?;
    let d_draws = BlockDraws::sample(&ev.d2d_law(), h.trials, h.x_max, cfg.seed, domain_tag("harq/d2d"))?;
    let c_draws = BlockDraws::sample(&ev.cellular_law(), h.trials, h.x_max, cfg.seed, domain_tag("harq/cellular"))?;
    let mut columns = vec![
        col("x", "attempts"),
        col("r_t", "bit/channel use"),
        col("ec_harq", "bit/channel use"),
        col("spectral_radius", "1"),
        col("delivery", "probability"),
        col("ec_no_harq", "bit/channel use"),
    ];
    if with_oracle {
        columns.push(col("oracle_delta_radius", "1"));
    }
    let xs: Vec<usize> = (h.x_min..=h.x_max).collect();
    let out = ordered(cfg.mc.workers, &xs, |_, &x| {
        let r = rate_for_drop_target(&d_draws, &c_draws, (m.d2d, m.cellular), x, h.l, h.drop_target, h.log_base)?;
        let d = d_draws.error_curve(x, h.l, r, h.log_base)?;
        let c = c_draws.error_curve(x, h.l, r, h.log_base)?;
        let mut warnings: Vec<String> = [&d.warning, &c.warning].into_iter().flatten().cloned().collect();
        let model = HarqModel::new(x, h.l, r, h.phi, p, &d, &c, h.entries)?;
        let res = ec_harq(&model)?;
        warnings.extend(res.warning.clone());
        let (d1, c1) = (d.values()[1], c.values()[1]);
        let single = TransitionProbs::new([m.d2d * (1.0 - d1), m.d2d * d1, m.cellular * (1.0 - c1), m.cellular * c1])?;
        let no_harq = ec_fixed_rate(&single, r, h.phi)?;
        let mut row = vec![x as f64, r, res.ec, res.log_argument, res.p_on, no_harq.ec];
        if with_oracle {
            row.push(companion_root_modulus(&model.a)? - res.log_argument);
        }
        Ok((row, warnings))
    })?;
    let (rows, warnings) = split(out);
    Ok(SweepResult {
        sweep: SweepVariable::Harq,
        plot: PlotSpec {
            x: "x".into(),
            y: vec!["ec_harq".into(), "ec_no_harq".into()],
            series: None,
            x_log: false,
            x_label: "retransmission limit X".into(),
            y_label: "EC (bit/channel use)".into(),
        },
        columns,
        rows,
        warnings,
    })
}

/// Writes `<dir>/<sweep>.csv` and `<dir>/<sweep>.json`.
pub fn write_outputs(cfg: &ExperimentConfig, result: &SweepResult, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = result.sweep.name();
    let csv_path = dir.join(format!("{name}.csv"));
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
    w.write_record(result.columns.iter().map(|c| c.name.as_str()))?;
    for row in &result.rows {
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    let meta = Metadata {
        sweep: name,
        config_hash: cfg.hash(),
        seed: cfg.seed,
        versions: Versions {
            risqos: risqos::VERSION,
            risqos_cli: env!("CARGO_PKG_VERSION"),
        },
        rows: result.rows.len(),
        columns: &result.columns,
        plot: &result.plot,
        warnings: &result.warnings,
    };
    let json_path = dir.join(format!("{name}.json"));
    std::fs::write(&json_path, serde_json::to_string_pretty(&meta)? + "\n")
        .with_context(|| format!("writing {}", json_path.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct Versions {
    risqos: &'static str,
    risqos_cli: &'static str,
}

#[derive(Serialize)]
struct Metadata<'a> {
    sweep: &'a str,
    config_hash: String,
    seed: u64,
    versions: Versions,
    rows: usize,
    columns: &'a [Column],
    plot: &'a PlotSpec,
    warnings: &'a [String],
}
