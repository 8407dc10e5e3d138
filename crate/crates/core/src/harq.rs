//! HARQ-enabled effective capacity with a finite-blocklength decoding model.
//!
//! A packet gets up to `X` attempts, each on a fresh fading block of `l`
//! channel uses; the receiver combines all attempts so far. The queue is
//! described by an `X × X` companion matrix whose first row holds the
//! entries `a_1..a_X`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::link_stats::SinrLaw;
use crate::markov_ec::{EcResult, TransitionProbs};
use crate::numeric::{gaussian_q, StreamFactory, StreamRng};
use crate::oracle::{run_trials, Estimate, McConfig};
use crate::scalar::{count, lit, Real};

/// Largest supported retransmission limit.
pub const MAX_ATTEMPTS: usize = 64;

/// Base of the `log(x l)/l` term in the decoding-error argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

impl std::str::FromStr for LogBase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" | "two" => Ok(LogBase::Two),
            "e" => Ok(LogBase::E),
            _ => Err(domain(format!("unknown log base '{s}' (use 2 or e)"))),
        }
    }
}

/// Error probability after combining the attempts whose SINRs are `sinr`.
///
/// `Q((Σ log2(1+Γ_n) + log(x l)/l − r_t) / (log2(e) √(Σ (2+Γ_n)Γ_n / (l(1+Γ_n)²))))`
/// with `x = sinr.len()`. With every `Γ_n = 0` the dispersion vanishes; the
/// limit is 1 for `r_t > 0` and 0.5 for `r_t = 0`.
pub fn decode_error_prob<T: Real>(sinr: &[T], l: usize, r_t: T, base: LogBase) -> Result<T> {
    if sinr.is_empty() || l == 0 {
        return Err(domain("decoding needs at least one attempt and l ≥ 1"));
    }
    if sinr.iter().any(|g| !(*g >= T::zero()) || !g.is_finite()) {
        return Err(domain("per-block SINRs must be finite and nonnegative"));
    }
    let lf = count::<T>(l);
    let x = count::<T>(sinr.len());
    let mut info = T::zero();
    let mut disp = T::zero();
    for &g in sinr {
        info = info + g.ln_1p() / T::LN_2();
        let one_g = T::one() + g;
        disp = disp + (lit::<T>(2.0) + g) * g / (lf * one_g * one_g);
    }
    if disp == T::zero() {
        return Ok(if r_t > T::zero() { T::one() } else { lit(0.5) });
    }
    let xl = x * lf;
    let log_xl = match base {
        LogBase::Two => xl.log2(),
        LogBase::E => xl.ln(),
    };
    let num = info + log_xl / lf - r_t;
    let den = T::LOG2_E() * disp.sqrt();
    Ok(gaussian_q(num / den))
}

/// Monte Carlo `E[P_x]` over `x` independent blocks drawn from `law`.
pub fn expected_decode_error(
    law: &SinrLaw<f64>,
    x: usize,
    l: usize,
    r_t: f64,
    base: LogBase,
    cfg: &McConfig,
    domain_id: u64,
) -> Result<Estimate> {
    if x == 0 || x > MAX_ATTEMPTS {
        return Err(domain(format!("attempt index must be in 1..={MAX_ATTEMPTS}")));
    }
    decode_error_prob(&vec![1.0; x], l, r_t, base)?;
    let stats = run_trials(cfg, domain_id, 1, |rng, out| {
        let mut g = [0.0; MAX_ATTEMPTS];
        for v in g.iter_mut().take(x) {
            *v = law.sample(rng);
        }
        out[0] = decode_error_prob(&g[..x], l, r_t, base).unwrap_or(f64::NAN);
    })?;
    Ok(Estimate {
        mean: stats[0].mean(),
        std_error: stats[0].std_error(),
        trials: stats[0].count(),
    })
}

/// Fixed per-block SINR draws shared by every rate and attempt count
/// (common random numbers), one row per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDraws {
    rows: Vec<Vec<f64>>,
}

impl BlockDraws {
    /// Row `i` is drawn from stream `(seed, domain, i)`.
    pub fn sample(law: &SinrLaw<f64>, trials: usize, x_max: usize, seed: u64, domain_id: u64) -> Result<Self> {
        if trials == 0 || x_max == 0 || x_max > MAX_ATTEMPTS {
            return Err(domain(format!("need trials ≥ 1 and 1 ≤ X ≤ {MAX_ATTEMPTS}")));
        }
        let factory = StreamFactory::new(seed);
        let rows = (0..trials as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng: StreamRng = factory.stream(domain_id, i);
                (0..x_max).map(|_| law.sample(&mut rng)).collect()
            })
            .collect();
        Ok(Self { rows })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(domain("draw rows must be nonempty and equally long"));
        }
        Ok(Self { rows })
    }

    pub fn trials(&self) -> usize {
        self.rows.len()
    }

    pub fn x_max(&self) -> usize {
        self.rows[0].len()
    }

    /// Sample mean of `P_x` over the rows, summed in row order.
    pub fn expected_error(&self, x: usize, l: usize, r_t: f64, base: LogBase) -> Result<f64> {
        if x == 0 || x > self.x_max() {
            return Err(domain("attempt index exceeds the drawn blocks"));
        }
        let per_row: Vec<f64> = self
            .rows
            .par_iter()
            .map(|r| decode_error_prob(&r[..x], l, r_t, base))
            .collect::<Result<_>>()?;
        Ok(per_row.iter().sum::<f64>() / self.rows.len() as f64)
    }

    /// `E[P_0..P_{x_max}]` with `E[P_0] = 1`.
    pub fn error_curve(&self, x_max: usize, l: usize, r_t: f64, base: LogBase) -> Result<DecodeErrorCurve<f64>> {
        let vals = (1..=x_max)
            .map(|x| self.expected_error(x, l, r_t, base))
            .collect::<Result<Vec<_>>>()?;
        DecodeErrorCurve::new(vals)
    }
}

/// Expected decoding errors `E[P_0] = 1, E[P_1], …, E[P_X]`, nonincreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeErrorCurve<T> {
    values: Vec<T>,
    /// Set when the raw sequence was not monotone and was projected.
    pub warning: Option<String>,
}

impl<T: Real> DecodeErrorCurve<T> {
    /// Takes `E[P_1..P_X]`; prepends `E[P_0] = 1` and projects onto
    /// nonincreasing sequences when Monte Carlo noise breaks monotonicity.
    pub fn new(after_first: Vec<T>) -> Result<Self> {
        if after_first.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
            return Err(domain("expected decoding errors must lie in [0, 1]"));
        }
        let mut values = Vec::with_capacity(after_first.len() + 1);
        values.push(T::one());
        values.extend(after_first);
        let mut warning = None;
        if values.windows(2).any(|w| w[1] > w[0]) {
            values = isotonic_nonincreasing(&values);
            values[0] = T::one();
            warning = Some("non-monotone decoding-error estimates were isotonically corrected".into());
        }
        Ok(Self { values, warning })
    }

    /// Perfect decoding at every attempt.
    pub fn perfect(x_max: usize) -> Self {
        let mut values = vec![T::zero(); x_max + 1];
        values[0] = T::one();
        Self { values, warning: None }
    }

    /// `E[P_x]` for `x = 0..=X`.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn x_max(&self) -> usize {
        self.values.len() - 1
    }
}

/// Pool-adjacent-violators fit of a nonincreasing sequence (equal weights).
pub fn isotonic_nonincreasing<T: Real>(y: &[T]) -> Vec<T> {
    // Blocks of (mean, size).
    let mut blocks: Vec<(T, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m2 <= m1 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let n = n1 + n2;
            blocks.push(((m1 * count(n1) + m2 * count(n2)) / count(n), n));
        }
    }
    blocks.into_iter().flat_map(|(m, n)| std::iter::repeat_n(m, n)).collect()
}

/// `P_{t,1}` for `t = 1..=X`: `E[P_{t−1}] − E[P_t]` for `t < X`, `E[P_{X−1}]` at `t = X`.
pub fn departure_pmf<T: Real>(curve: &DecodeErrorCurve<T>, x_max: usize) -> Result<Vec<T>> {
    check_x(x_max, curve)?;
    let e = curve.values();
    let mut pmf: Vec<T> = (1..x_max).map(|t| e[t - 1] - e[t]).collect();
    pmf.push(e[x_max - 1]);
    Ok(pmf)
}

fn check_x<T>(x_max: usize, curve: &DecodeErrorCurve<T>) -> Result<()> {
    if x_max == 0 || x_max > MAX_ATTEMPTS {
        return Err(domain(format!("retransmission limit must be in 1..={MAX_ATTEMPTS}")));
    }
    if curve.values.len() < x_max {
        return Err(domain("decoding-error curve shorter than the retransmission limit"));
    }
    Ok(())
}

/// Companion entries exactly as printed: `a_x = q_x Φ(−φ) pᵀ` with
/// `q_1 = [1−E P^d_1, 1, 1−E P^c_1, 1]`, `q_x = [E P_{x−1} − E P_x, 1, …, 1]`,
/// `q_X = [E P^d_{X−1}, 1, E P^c_{X−1}, 1]`.
///
/// Every OFF state contributes its full probability to every entry, so these
/// entries describe no stable queue for `X ≥ 2`; see [`companion_entries`].
pub fn companion_entries_printed<T: Real>(
    p: &TransitionProbs<T>,
    d2d: &DecodeErrorCurve<T>,
    cellular: &DecodeErrorCurve<T>,
    x_max: usize,
    r_t: T,
    phi: T,
) -> Result<Vec<T>> {
    check_x(x_max, d2d)?;
    check_x(x_max, cellular)?;
    let [p1, p2, p3, p4] = p.probs();
    let u = (-r_t * phi).exp();
    let (ed, ec) = (d2d.values(), cellular.values());
    Ok((1..=x_max)
        .map(|x| {
            let (qd, qc) = if x == x_max {
                (ed[x_max - 1], ec[x_max - 1])
            } else {
                (ed[x - 1] - ed[x], ec[x - 1] - ec[x])
            };
            qd * u * p1 + p2 + qc * u * p3 + p4
        })
        .collect())
}

/// Companion entries of the renewal queue, which charges each packet its
/// attempts: `a_x = Σ_ON p_i e^{−r_tφ}(E P_{x−1} − E P_x)`, plus the dropped mass
/// `Σ_ON p_i E P_X` at `x = X` and the OFF mass `p2 + p4` at `x = 1`.
///
/// The entries sum to `1` at `φ = 0`. At `X = 1` the EC equals
/// [`crate::markov_ec::ec_fixed_rate`] with `p_on = Σ_ON p_i (1 − E P_1)`.
pub fn companion_entries<T: Real>(
    p: &TransitionProbs<T>,
    d2d: &DecodeErrorCurve<T>,
    cellular: &DecodeErrorCurve<T>,
    x_max: usize,
    r_t: T,
    phi: T,
) -> Result<Vec<T>> {
    if d2d.x_max() < x_max || cellular.x_max() < x_max {
        return Err(domain("drop-aware entries need E[P_X]"));
    }
    check_x(x_max, d2d)?;
    let [p1, p2, p3, p4] = p.probs();
    let u = (-r_t * phi).exp();
    let (ed, ec) = (d2d.values(), cellular.values());
    Ok((1..=x_max)
        .map(|x| {
            let mut a = u * (p1 * (ed[x - 1] - ed[x]) + p3 * (ec[x - 1] - ec[x]));
            if x == x_max {
                a = a + p1 * ed[x_max] + p3 * ec[x_max];
            }
            if x == 1 {
                a = a + p2 + p4;
            }
            a
        })
        .collect())
}

/// Which companion entries [`HarqModel`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryRule {
    #[default]
    Renewal,
    Printed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarqModel<T> {
    pub x_max: usize,
    pub l: usize,
    pub r_t: T,
    pub phi: T,
    pub p: TransitionProbs<T>,
    pub a: Vec<T>,
    /// Probability that a packet is eventually delivered.
    pub delivery: T,
}

impl<T: Real> HarqModel<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        x_max: usize,
        l: usize,
        r_t: T,
        phi: T,
        p: TransitionProbs<T>,
        d2d: &DecodeErrorCurve<T>,
        cellular: &DecodeErrorCurve<T>,
        rule: EntryRule,
    ) -> Result<Self> {
        if l == 0 {
            return Err(domain("block length l must be at least 1"));
        }
        if !(phi > T::zero()) || !(r_t >= T::zero()) {
            return Err(domain("HARQ EC needs φ > 0 and r_t ≥ 0"));
        }
        let a = match rule {
            EntryRule::Renewal => companion_entries(&p, d2d, cellular, x_max, r_t, phi)?,
            EntryRule::Printed => companion_entries_printed(&p, d2d, cellular, x_max, r_t, phi)?,
        };
        let [p1, _, p3, _] = p.probs();
        let last = x_max.min(d2d.x_max()).min(cellular.x_max());
        let delivery = p1 * (T::one() - d2d.values()[last]) + p3 * (T::one() - cellular.values()[last]);
        Ok(Self {
            x_max,
            l,
            r_t,
            phi,
            p,
            a,
            delivery,
        })
    }
}

/// Dominant eigenvalue modulus of the companion matrix with first row `a`.
///
/// Power iteration on `A + I`: the nonnegative companion matrix has a Perron
/// root `ρ`, and the shift makes `ρ + 1` strictly dominant even when `A` is
/// periodic.
pub fn spectral_radius_companion<T: Real>(a: &[T]) -> Result<T> {
    let x = a.len();
    if x == 0 {
        return Err(domain("companion matrix needs at least one entry"));
    }
    if a.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
        return Err(domain("companion entries must be finite and nonnegative"));
    }
    if a.iter().all(|v| *v == T::zero()) {
        return Err(domain("companion entries are all zero"));
    }
    if x == 1 {
        return Ok(a[0]);
    }
    let tol = lit::<T>(1e-12);
    let max_iter = 100_000;
    let mut v = vec![T::one(); x];
    let mut w = vec![T::zero(); x];
    let mut lambda = T::zero();
    let mut change = T::infinity();
    for iter in 0..max_iter {
        w[0] = v[0] + a.iter().zip(&v).map(|(ai, vi)| *ai * *vi).sum::<T>();
        for i in 1..x {
            w[i] = v[i] + v[i - 1];
        }
        let norm = w.iter().fold(T::zero(), |m, c| m.max(*c));
        let next = norm; // v is normalized to max 1
        change = T::zero();
        for i in 0..x {
            let nv = w[i] / norm;
            change = change.max((nv - v[i]).abs());
            v[i] = nv;
        }
        let done = (next - lambda).abs() <= tol * next && change <= tol;
        lambda = next;
        if done && iter > 0 {
            return Ok(lambda - T::one());
        }
    }
    Err(Error::NonConvergence {
        method: "companion power iteration",
        iterations: max_iter,
        residual: crate::scalar::to_f64(change),
    })
}

/// `−ln(sp(A))/φ`, floored at zero when `sp(A) ≥ 1`.
pub fn ec_harq<T: Real>(model: &HarqModel<T>) -> Result<EcResult<T>> {
    let sp = spectral_radius_companion(&model.a)?;
    let mut ec = -sp.ln() / model.phi;
    let mut warning = None;
    if sp >= T::one() {
        ec = T::zero();
        warning = Some(format!("companion spectral radius {sp} ≥ 1: queue not stable at this φ"));
    }
    Ok(EcResult {
        ec,
        p_on: model.delivery,
        log_argument: sp,
        warning,
    })
}

/// Largest rate whose final-attempt drop probability `A·E P^d_X + B·E P^c_X`
/// stays at or below `target`, by bisection on the shared draws.
pub fn rate_for_drop_target(
    d2d: &BlockDraws,
    cellular: &BlockDraws,
    weights: (f64, f64),
    x: usize,
    l: usize,
    target: f64,
    base: LogBase,
) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(domain("drop target must lie in (0, 1)"));
    }
    let (wa, wb) = weights;
    let total = wa + wb;
    if !(wa >= 0.0 && wb >= 0.0 && total > 0.0) {
        return Err(domain("mode weights must be nonnegative and not both zero"));
    }
    let drop = |r: f64| -> Result<f64> {
        let d = if wa > 0.0 { d2d.expected_error(x, l, r, base)? } else { 0.0 };
        let c = if wb > 0.0 { cellular.expected_error(x, l, r, base)? } else { 0.0 };
        Ok((wa * d + wb * c) / total)
    };
    if drop(0.0)? > target {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while drop(hi)? <= target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NonConvergence {
                method: "drop-target rate bracket",
                iterations: 20,
                residual: hi,
            });
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if drop(mid)? <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
