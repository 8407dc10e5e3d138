//! Seeded node placement in the square deployment region.

use anyhow::Result;
use rand::Rng;
use serde::Serialize;

use risqos::link_stats::Access;
use risqos::numeric::rng::domain_tag;
use risqos::numeric::StreamFactory;

use crate::config::ExperimentConfig;

/// Five nodes uniform in `[0, side] × [−side/2, side/2]` on the ground plane,
/// in the order D_T, D_R, U_T, U_R, BS.
pub fn draw(draw_seed: u64, side: f64) -> [[f64; 3]; 5] {
    let mut rng = StreamFactory::new(draw_seed).stream(domain_tag("layout"), 0);
    let mut out = [[0.0; 3]; 5];
    for p in &mut out {
        let x: f64 = rng.random_range(0.0..side);
        let y: f64 = rng.random_range(-side / 2.0..side / 2.0);
        *p = [x, y, 0.0];
    }
    out
}

/// Summary of a candidate layout under a configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutReport {
    pub draw_seed: u64,
    pub nodes: [[f64; 3]; 5],
    /// Largest elevation off the RIS normal among D_T, D_R, U_T, BS, degrees.
    pub max_elevation_deg: f64,
    pub kappa_d_db: f64,
    pub kappa_c_db: f64,
    /// Mean signal over mean interference of the underlay D2D link.
    pub sir_d2d_db: f64,
    pub p_e1: f64,
    pub p_e2: f64,
    pub swapped: bool,
}

fn db(v: f64) -> f64 {
    10.0 * v.log10()
}

pub fn assess(cfg: &ExperimentConfig, draw_seed: u64) -> Result<LayoutReport> {
    let nodes = draw(draw_seed, cfg.layout.region);
    let mut c = cfg.clone();
    c.layout.draw_seed = draw_seed;
    c.layout.d_t = nodes[0];
    c.layout.d_r = nodes[1];
    c.layout.u_t = nodes[2];
    c.layout.u_r = nodes[3];
    c.layout.bs = nodes[4];
    let layout = c.network_layout()?;
    let center = layout.ris.center();
    let mut max_el: f64 = 0.0;
    for p in [layout.d_t, layout.d_r, layout.u_t, layout.bs] {
        let a = risqos::geometry::elevation_azimuth(&p, &center)?;
        max_el = max_el.max(a.elevation.to_degrees());
    }
    let ev = c.scenario_for(Access::Underlay)?.evaluate()?;
    Ok(LayoutReport {
        draw_seed,
        nodes,
        max_elevation_deg: max_el,
        kappa_d_db: db(ev.snr.kappa_d),
        kappa_c_db: db(ev.snr.kappa_c),
        sir_d2d_db: db(ev.snr.alpha2 / ev.snr.alpha1),
        p_e1: ev.detection.p_e1,
        p_e2: ev.detection.p_e2,
        swapped: ev.mode.swapped,
    })
}
