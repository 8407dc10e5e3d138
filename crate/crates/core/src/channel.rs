//! Path loss, Rician coefficient sampling, phase design and quantization.
//!
//! Sampled coefficients are unit scale: path loss is applied once, by the
//! SNR formulas, never inside the coefficients.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{Angles, PathGeometry};
use crate::scalar::{lit, to_f64, Real};

/// Normalized power radiation pattern `F(υ, μ)` of a node seen from the RIS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiationPattern {
    /// cos³υ in front of the surface, 0 at grazing and behind it.
    #[default]
    Cos3,
    /// Constant 1 (normalized studies).
    Isotropic,
}

pub fn radiation_pattern<T: Real>(pattern: RadiationPattern, angles: &Angles<T>) -> T {
    match pattern {
        RadiationPattern::Isotropic => T::one(),
        RadiationPattern::Cos3 => {
            let u = angles.elevation;
            if u < T::zero() || u >= T::FRAC_PI_2() {
                T::zero()
            } else {
                let c = u.cos().max(T::zero());
                c * c * c
            }
        }
    }
}

/// How the U_T interference links are attenuated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterferencePath {
    /// Reflected via the RIS with the same far-field formula as the other links.
    #[default]
    Ris,
    /// Straight path with log-distance loss `(4π/λ)² d^υ`.
    Direct,
}

/// Radio constants from which a [`LinkBudget`] is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams<T> {
    pub p_dt: T,
    pub p_ut: T,
    pub p_bs: T,
    pub noise: T,
    pub bandwidth: T,
    pub g_t: T,
    pub g_r: T,
    pub g_bs: T,
    /// Unit-cell gain `G`.
    pub g_ris: T,
    pub wavelength: T,
    pub rician: T,
    pub direct_exponent: T,
    pub pattern: RadiationPattern,
    pub interference_path: InterferencePath,
}

/// The five path losses plus powers, noise and gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget<T> {
    pub pl_d: T,
    pub pl_dt_bs: T,
    pub pl_bs_dr: T,
    pub pl_ut_dr: T,
    pub pl_ut_bs: T,
    pub p_dt: T,
    pub p_ut: T,
    pub p_bs: T,
    pub noise: T,
    pub bandwidth: T,
    pub g_t: T,
    pub g_r: T,
    pub g_bs: T,
    pub g_ris: T,
    pub wavelength: T,
    pub rician: T,
}

impl<T: Real> LinkBudget<T> {
    /// Every path loss `pl`, every power `power`, unit gains, `B = λ = 1`.
    pub fn uniform(pl: T, power: T, noise: T) -> Self {
        Self {
            pl_d: pl,
            pl_dt_bs: pl,
            pl_bs_dr: pl,
            pl_ut_dr: pl,
            pl_ut_bs: pl,
            p_dt: power,
            p_ut: power,
            p_bs: power,
            noise,
            bandwidth: T::one(),
            g_t: T::one(),
            g_r: T::one(),
            g_bs: T::one(),
            g_ris: T::one(),
            wavelength: T::one(),
            rician: lit(4.0),
        }
    }

    pub fn from_geometry(geom: &PathGeometry<T>, ris_n: usize, d_ye: T, d_ze: T, radio: &RadioParams<T>) -> Result<Self> {
        let pl = |kind| path_loss(kind, geom, radio, ris_n, d_ye, d_ze);
        let b = Self {
            pl_d: pl(PathKind::D2d)?,
            pl_dt_bs: pl(PathKind::Uplink)?,
            pl_bs_dr: pl(PathKind::Downlink)?,
            pl_ut_dr: pl(PathKind::InterfererToDr)?,
            pl_ut_bs: pl(PathKind::InterfererToBs)?,
            p_dt: radio.p_dt,
            p_ut: radio.p_ut,
            p_bs: radio.p_bs,
            noise: radio.noise,
            bandwidth: radio.bandwidth,
            g_t: radio.g_t,
            g_r: radio.g_r,
            g_bs: radio.g_bs,
            g_ris: radio.g_ris,
            wavelength: radio.wavelength,
            rician: radio.rician,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("pl_d", self.pl_d),
            ("pl_dt_bs", self.pl_dt_bs),
            ("pl_bs_dr", self.pl_bs_dr),
            ("pl_ut_dr", self.pl_ut_dr),
            ("pl_ut_bs", self.pl_ut_bs),
            ("p_dt", self.p_dt),
            ("p_ut", self.p_ut),
            ("p_bs", self.p_bs),
            ("noise", self.noise),
            ("bandwidth", self.bandwidth),
            ("g_t", self.g_t),
            ("g_r", self.g_r),
            ("g_bs", self.g_bs),
            ("g_ris", self.g_ris),
            ("wavelength", self.wavelength),
        ];
        for (name, v) in positive {
            if !(v > T::zero() && v.is_finite()) {
                return Err(domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.rician >= T::zero()) {
            return Err(domain("Rician factor must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// D_T → RIS → D_R.
    D2d,
    /// D_T → RIS → BS.
    Uplink,
    /// BS → RIS → D_R.
    Downlink,
    /// U_T → D_R.
    InterfererToDr,
    /// U_T → BS.
    InterfererToBs,
}

/// Far-field RIS path loss `64π³(d₁d₂)² / (G G_tx G_rx N d_ye d_ze λ² F_tx F_rx)`.
#[allow(clippy::too_many_arguments)]
pub fn ris_path_loss<T: Real>(
    d1: T,
    d2: T,
    gains: T,
    n_total: usize,
    d_ye: T,
    d_ze: T,
    wavelength: T,
    f_tx: T,
    f_rx: T,
) -> T {
    let pi = T::PI();
    let prod = d1 * d2;
    lit::<T>(64.0) * pi * pi * pi * prod * prod
        / (gains * T::from_usize(n_total).unwrap() * d_ye * d_ze * wavelength * wavelength * f_tx * f_rx)
}

pub fn path_loss<T: Real>(
    kind: PathKind,
    geom: &PathGeometry<T>,
    radio: &RadioParams<T>,
    n_total: usize,
    d_ye: T,
    d_ze: T,
) -> Result<T> {
    if n_total == 0 {
        return Err(domain("RIS must have at least one element"));
    }
    let f = |node: &'static str, a: &Angles<T>| -> Result<T> {
        let v = radiation_pattern(radio.pattern, a);
        if v > T::zero() {
            Ok(v)
        } else {
            Err(Error::OutOfCoverage {
                node,
                elevation_rad: to_f64(a.elevation),
            })
        }
    };
    let g = radio.g_ris;
    let (d1, d2, gains, f_tx, f_rx) = match kind {
        PathKind::D2d => (
            geom.d_dt_ris,
            geom.d_ris_dr,
            g * radio.g_t * radio.g_r,
            f("D_T", &geom.angles_dt)?,
            f("D_R", &geom.angles_dr)?,
        ),
        PathKind::Uplink => (
            geom.d_dt_ris,
            geom.d_ris_bs,
            g * radio.g_t * radio.g_bs,
            f("D_T", &geom.angles_dt)?,
            f("BS", &geom.angles_bs)?,
        ),
        PathKind::Downlink => (
            geom.d_ris_bs,
            geom.d_ris_dr,
            g * radio.g_bs * radio.g_r,
            f("BS", &geom.angles_bs)?,
            f("D_R", &geom.angles_dr)?,
        ),
        PathKind::InterfererToDr | PathKind::InterfererToBs => {
            let (d_rx, d_straight, g_rx, rx_name, rx_angles) = if kind == PathKind::InterfererToDr {
                (geom.d_ris_dr, geom.d_ut_dr, radio.g_r, "D_R", &geom.angles_dr)
            } else {
                (geom.d_ris_bs, geom.d_ut_bs, radio.g_bs, "BS", &geom.angles_bs)
            };
            match radio.interference_path {
                InterferencePath::Ris => (
                    geom.d_ut_ris,
                    d_rx,
                    g * radio.g_t * g_rx,
                    f("U_T", &geom.angles_ut)?,
                    f(rx_name, rx_angles)?,
                ),
                InterferencePath::Direct => {
                    if !(d_straight > T::zero()) {
                        return Err(Error::DegenerateGeometry(format!("U_T coincides with {rx_name}")));
                    }
                    let k = lit::<T>(4.0) * T::PI() / radio.wavelength;
                    return Ok(k * k * d_straight.powf(radio.direct_exponent) / (radio.g_t * g_rx));
                }
            }
        }
    };
    Ok(ris_path_loss(d1, d2, gains, n_total, d_ye, d_ze, radio.wavelength, f_tx, f_rx))
}

/// Direct-link coefficient `h √(d^{-υ})`.
pub fn direct_link_coefficient<T: Real>(small_scale: Complex<T>, distance: T, exponent: T) -> Complex<T> {
    small_scale * distance.powf(-exponent).sqrt()
}

fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(lit(re * s), lit(im * s))
}

/// Unit-scale Rician coefficients `√(α/(1+α)) e^{-j2πD/λ} + √(1/(1+α)) ξ`, ξ ~ CN(0,1).
///
/// `rician = ∞` yields the pure LoS term.
pub fn sample_channel<T: Real, R: Rng + ?Sized>(
    rician: T,
    wavelength: T,
    total_path: T,
    n_total: usize,
    rng: &mut R,
) -> Vec<Complex<T>> {
    let (w_los, w_nlos) = if rician.is_infinite() {
        (T::one(), T::zero())
    } else {
        ((rician / (T::one() + rician)).sqrt(), (T::one() + rician).recip().sqrt())
    };
    let phase = -lit::<T>(2.0) * T::PI() * total_path / wavelength;
    let los = Complex::from_polar(w_los, phase);
    (0..n_total)
        .map(|_| {
            let xi: Complex<T> = complex_normal(rng);
            los + xi * w_nlos
        })
        .collect()
}

/// Per-element coefficients for every link plus the phase vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    pub d2d: Vec<Complex<T>>,
    pub uplink: Vec<Complex<T>>,
    pub downlink: Vec<Complex<T>>,
    pub ut_dr: Complex<T>,
    pub ut_bs: Complex<T>,
    pub direct: Option<Complex<T>>,
    pub phases: Vec<T>,
}

impl<T: Real> ChannelRealization<T> {
    /// Samples all links; the phases co-phase the D2D cascade.
    pub fn sample<R: Rng + ?Sized>(budget: &LinkBudget<T>, geom: &PathGeometry<T>, n_total: usize, rng: &mut R) -> Self {
        let d2d = sample_channel(budget.rician, budget.wavelength, geom.d_d, n_total, rng);
        let uplink = sample_channel(budget.rician, budget.wavelength, geom.d_c1, n_total, rng);
        let downlink = sample_channel(budget.rician, budget.wavelength, geom.d_c2, n_total, rng);
        let ut_dr = complex_normal(rng);
        let ut_bs = complex_normal(rng);
        let ones = vec![Complex::new(T::one(), T::zero()); n_total];
        let phases = phase_design_instantaneous(&d2d, &ones).unwrap_or_else(|_| vec![T::zero(); n_total]);
        Self {
            d2d,
            uplink,
            downlink,
            ut_dr,
            ut_bs,
            direct: None,
            phases,
        }
    }
}

fn wrap_phase<T: Real>(phi: T) -> T {
    let two_pi = lit::<T>(2.0) * T::PI();
    let mut r = phi % two_pi;
    if r < T::zero() {
        r = r + two_pi;
    }
    if r >= two_pi {
        r = T::zero();
    }
    r + T::zero()
}

fn co_phase<T: Real>(h_in: &[Complex<T>], h_out: &[Complex<T>]) -> Result<Vec<T>> {
    if h_in.len() != h_out.len() {
        return Err(domain("hop coefficient vectors differ in length"));
    }
    h_in.iter()
        .zip(h_out)
        .enumerate()
        .map(|(index, (a, b))| {
            if a.norm() == T::zero() || b.norm() == T::zero() {
                Err(Error::UndefinedPhase { index })
            } else {
                Ok(wrap_phase(-a.arg() - b.arg()))
            }
        })
        .collect()
}

/// `φ_n = −arg(h̄_in) − arg(h̄_out)` from mean (statistical) coefficients.
pub fn phase_design_statistical<T: Real>(mean_in: &[Complex<T>], mean_out: &[Complex<T>]) -> Result<Vec<T>> {
    co_phase(mean_in, mean_out)
}

/// Same rule applied to instantaneous coefficients.
pub fn phase_design_instantaneous<T: Real>(h_in: &[Complex<T>], h_out: &[Complex<T>]) -> Result<Vec<T>> {
    co_phase(h_in, h_out)
}

/// Nearest level of the grid `2lπ/(2^b − 1)`, `l = 0..2^b − 1`, under circular
/// distance. Ties go to the lower level, so the 2π alias never wins over 0.
pub fn quantize_phase<T: Real>(phi: T, b_q: u32) -> Result<(u32, T)> {
    if b_q == 0 || b_q > 16 {
        return Err(domain("b_q must be in 1..=16"));
    }
    let levels = 1u32 << b_q;
    let two_pi = lit::<T>(2.0) * T::PI();
    let step = two_pi / T::from_u32(levels - 1).unwrap();
    let target = wrap_phase(phi);
    let tol = lit::<T>(64.0) * T::epsilon() * two_pi;
    let mut best = (0u32, T::zero(), T::infinity());
    for l in 0..levels {
        let g = T::from_u32(l).unwrap() * step;
        let raw = (target - g).abs() % two_pi;
        let d = raw.min(two_pi - raw);
        if d < best.2 - tol {
            best = (l, g, d);
        }
    }
    Ok((best.0, best.1))
}

/// `Σ_n h_n e^{jφ_n}`.
pub fn coherent_sum<T: Real>(coeffs: &[Complex<T>], phases: &[T]) -> Complex<T> {
    coeffs
        .iter()
        .zip(phases)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (h, &p)| {
            acc + h * Complex::from_polar(T::one(), p)
        })
}

/// `P̄_{D_T} |h_direct + Σ h e^{jφ}|² / PL_d` (direct and reflected paths superposed).
pub fn received_signal_superposed<T: Real>(
    realization: &ChannelRealization<T>,
    budget: &LinkBudget<T>,
    direct: Complex<T>,
) -> T {
    let s = direct + coherent_sum(&realization.d2d, &realization.phases);
    budget.p_dt * s.norm_sqr() / budget.pl_d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{path_geometry, NetworkLayout, Point3, ReferencePoint, RisArray};
    use crate::numeric::StreamFactory;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn radio() -> RadioParams<f64> {
        RadioParams {
            p_dt: 0.1,
            p_ut: 0.1,
            p_bs: 1.0,
            noise: 1e-10,
            bandwidth: 1.0,
            g_t: 1.0,
            g_r: 1.0,
            g_bs: 1.0,
            g_ris: 1.0,
            wavelength: 0.125,
            rician: 4.0,
            direct_exponent: 3.5,
            pattern: RadiationPattern::Cos3,
            interference_path: InterferencePath::Ris,
        }
    }

    fn ang(e: f64) -> Angles<f64> {
        Angles {
            elevation: e,
            azimuth: 0.0,
        }
    }

    #[test]
    fn pattern_values() {
        assert_eq!(radiation_pattern(RadiationPattern::Cos3, &ang(0.0)), 1.0);
        assert_eq!(radiation_pattern(RadiationPattern::Cos3, &ang(FRAC_PI_2)), 0.0);
        assert!((radiation_pattern(RadiationPattern::Cos3, &ang(FRAC_PI_3)) - 0.125).abs() < 1e-15);
        assert_eq!(radiation_pattern(RadiationPattern::Cos3, &ang(2.0)), 0.0);
        assert_eq!(radiation_pattern(RadiationPattern::Isotropic, &ang(2.0)), 1.0);
    }

    #[test]
    fn ris_path_loss_scaling() {
        let base = ris_path_loss(1.0, 1.0, 1.0, 1, 1.0, 1.0, 1.0, 1.0, 1.0);
        assert!((base - 64.0 * PI.powi(3)).abs() < 1e-9);
        assert!((base - 1_984.401_707_539_7).abs() < 1e-6);
        let doubled = ris_path_loss(2.0, 2.0, 1.0, 1, 1.0, 1.0, 1.0, 1.0, 1.0);
        assert!((doubled / base - 16.0).abs() < 1e-12);
        let quad = ris_path_loss(1.0, 1.0, 1.0, 4, 1.0, 1.0, 1.0, 1.0, 1.0);
        assert!((base / quad - 4.0).abs() < 1e-12);
    }

    fn layout(dr_x: f64) -> NetworkLayout<f64> {
        let ris = RisArray::new(10, 10, 0.0625, 0.0625, 2).unwrap();
        NetworkLayout::new(
            Point3::new(30.0, -20.0, 0.0),
            Point3::new(dr_x, 40.0, 0.0),
            Point3::new(60.0, 10.0, 0.0),
            Point3::new(90.0, 70.0, 0.0),
            Point3::new(100.0, -50.0, 0.0),
            ris,
        )
        .unwrap()
    }

    #[test]
    fn path_loss_on_layout() {
        let l = layout(50.0);
        let g = path_geometry(&l, ReferencePoint::Center).unwrap();
        let r = radio();
        let pl = path_loss(PathKind::D2d, &g, &r, 100, 0.0625, 0.0625).unwrap();
        let f1 = radiation_pattern(r.pattern, &g.angles_dt);
        let f2 = radiation_pattern(r.pattern, &g.angles_dr);
        let expect = 64.0 * PI.powi(3) * (g.d_dt_ris * g.d_ris_dr).powi(2)
            / (100.0 * 0.0625 * 0.0625 * 0.125 * 0.125 * f1 * f2);
        assert!((pl / expect - 1.0).abs() < 1e-12);

        let farther = path_geometry(&layout(80.0), ReferencePoint::Center).unwrap();
        // Moving D_R changes both distance and angle; compare with isotropic pattern.
        let iso = RadioParams {
            pattern: RadiationPattern::Isotropic,
            ..r
        };
        let a = path_loss(PathKind::D2d, &g, &iso, 100, 0.0625, 0.0625).unwrap();
        let b = path_loss(PathKind::D2d, &farther, &iso, 100, 0.0625, 0.0625).unwrap();
        assert!(b > a);

        let direct = RadioParams {
            interference_path: InterferencePath::Direct,
            ..r
        };
        let pl_i = path_loss(PathKind::InterfererToDr, &g, &direct, 100, 0.0625, 0.0625).unwrap();
        let k = 4.0 * PI / 0.125;
        assert!((pl_i / (k * k * g.d_ut_dr.powf(3.5)) - 1.0).abs() < 1e-12);
        assert!(LinkBudget::from_geometry(&g, 100, 0.0625, 0.0625, &r).is_ok());
    }

    #[test]
    fn out_of_coverage() {
        let mut g = path_geometry(&layout(50.0), ReferencePoint::Center).unwrap();
        g.angles_dr.elevation = FRAC_PI_2 + 0.1;
        assert!(matches!(
            path_loss(PathKind::D2d, &g, &radio(), 100, 0.0625, 0.0625),
            Err(Error::OutOfCoverage { node: "D_R", .. })
        ));
    }

    #[test]
    fn rician_limits_and_moments() {
        let f = StreamFactory::new(11);
        let mut rng = f.stream(0, 0);
        let los = sample_channel(f64::INFINITY, 0.125, 10.03, 8, &mut rng);
        let expect = Complex::from_polar(1.0, -2.0 * PI * 10.03 / 0.125);
        assert!(los.iter().all(|h| (h - expect).norm() < 1e-12));

        let n = 100_000;
        let ray = sample_channel(0.0, 0.125, 10.0, n, &mut rng);
        let mean = ray.iter().sum::<Complex<f64>>() / n as f64;
        assert!(mean.norm() < 0.02);

        let h = sample_channel(4.0, 0.125, 10.0, n, &mut rng);
        let m = h.iter().sum::<Complex<f64>>() / n as f64;
        let nlos_var = h.iter().map(|x| (x - m).norm_sqr()).sum::<f64>() / n as f64;
        let power = h.iter().map(|x| x.norm_sqr()).sum::<f64>() / n as f64;
        assert!((nlos_var / power - 0.2).abs() < 0.2 * 0.02);
        assert!((power - 1.0).abs() < 0.02);
    }

    #[test]
    fn phase_designs() {
        let c = |r: f64, a: f64| Complex::from_polar(r, a);
        assert_eq!(phase_design_statistical(&[c(1.0, 0.0)], &[c(2.0, 0.0)]).unwrap(), vec![0.0]);
        let p = phase_design_statistical(&[c(1.0, FRAC_PI_4)], &[c(1.0, FRAC_PI_4)]).unwrap();
        assert!((p[0] - 1.5 * PI).abs() < 1e-12);
        let p = phase_design_instantaneous(&[c(1.0, PI)], &[c(1.0, PI)]).unwrap();
        assert!(p[0].abs() < 1e-12);
        assert!(matches!(
            phase_design_statistical(&[c(1.0, 0.0), Complex::new(0.0, 0.0)], &[c(1.0, 0.0); 2]),
            Err(Error::UndefinedPhase { index: 1 })
        ));
        assert!(phase_design_instantaneous(&[c(1.0, 0.0)], &[]).is_err());
    }

    #[test]
    fn quantization_grid() {
        let step = 2.0 * PI / 3.0;
        for l in 0..3u32 {
            let (lv, q) = quantize_phase(l as f64 * step, 2).unwrap();
            assert_eq!(lv, l);
            assert!((q - l as f64 * step).abs() < 1e-12);
        }
        // 2π is the alias of level 0.
        assert_eq!(quantize_phase(2.0 * PI - 1e-9, 2).unwrap().0, 0);
        let (lv, q) = quantize_phase(PI, 2).unwrap();
        assert_eq!(lv, 1);
        assert!((q - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!(quantize_phase(1.0_f64, 0).is_err());
    }

    #[test]
    fn superposition() {
        let h = vec![Complex::new(0.5, 0.0); 4];
        let real = ChannelRealization {
            d2d: h.clone(),
            uplink: h.clone(),
            downlink: h,
            ut_dr: Complex::new(1.0, 0.0),
            ut_bs: Complex::new(1.0, 0.0),
            direct: None,
            phases: vec![0.0; 4],
        };
        let b = LinkBudget::uniform(2.0f64, 1.0, 1.0);
        let ris_only = received_signal_superposed(&real, &b, Complex::new(0.0, 0.0));
        assert!((ris_only - 2.0).abs() < 1e-12);
        let both = received_signal_superposed(&real, &b, Complex::new(1.0, 0.0));
        let silent = ChannelRealization {
            d2d: vec![Complex::new(0.0, 0.0); 4],
            ..real.clone()
        };
        let direct_only = received_signal_superposed(&silent, &b, Complex::new(1.0, 0.0));
        assert!((direct_only - 0.5).abs() < 1e-12);
        assert!(both > ris_only && both > direct_only);
        let d = direct_link_coefficient(Complex::new(1.0f64, 0.0), 10.0, 2.0);
        assert!((d.re - 0.1).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn quantization_error_bounded(phi in -10.0f64..10.0, b in 1u32..6) {
            let (_, q) = quantize_phase(phi, b).unwrap();
            let two_pi = 2.0 * PI;
            let step = two_pi / ((1u32 << b) - 1) as f64;
            let raw = (wrap_phase(phi) - q).abs() % two_pi;
            prop_assert!(raw.min(two_pi - raw) <= step / 2.0 + 1e-9);
        }

        #[test]
        fn instantaneous_design_is_coherent(seed in 0u64..500, n in 1usize..16) {
            let mut rng = StreamFactory::new(seed).stream(1, 0);
            let a = sample_channel(1.0, 1.0, 3.0, n, &mut rng);
            let b = sample_channel(1.0, 1.0, 5.0, n, &mut rng);
            let phi = phase_design_instantaneous(&a, &b).unwrap();
            let cascade: Vec<_> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
            let s = coherent_sum(&cascade, &phi);
            let bound: f64 = a.iter().zip(&b).map(|(x, y)| x.norm() * y.norm()).sum();
            prop_assert!((s.norm() - bound).abs() < 1e-9 * bound.max(1.0));
            for (k, (x, y)) in a.iter().zip(&b).enumerate() {
                let arg = (x * Complex::from_polar(1.0, phi[k]) * y).arg();
                prop_assert!(arg.abs() < 1e-9);
            }
            let mut perturbed = phi.clone();
            perturbed[0] += 0.3;
            prop_assert!(coherent_sum(&cascade, &perturbed).norm() <= s.norm() + 1e-12);
        }

        #[test]
        fn path_loss_monotone_in_distance(d1 in 1.0f64..500.0, d2 in 1.0f64..500.0, k in 1.01f64..3.0) {
            let a = ris_path_loss(d1, d2, 1.0, 100, 0.06, 0.06, 0.125, 0.5, 0.5);
            prop_assert!(ris_path_loss(d1 * k, d2, 1.0, 100, 0.06, 0.06, 0.125, 0.5, 0.5) > a);
            prop_assert!(ris_path_loss(d1, d2, k, 100, 0.06, 0.06, 0.125, 0.5, 0.5) < a);
        }
    }
}
