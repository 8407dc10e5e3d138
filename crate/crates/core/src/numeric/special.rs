//! Complementary error function and the Gaussian tail.

use crate::scalar::{lit, Real};

const CF_SWITCH: f64 = 2.5;
const MAX_TERMS: usize = 1000;

/// Complementary error function.
///
/// Uses the all-positive series for `erf` below 2.5 (absolute error near
/// `1e-16`) and a Lentz continued fraction above (relative error of a few ulps).
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        return lit::<T>(2.0) - erfc(-x);
    }
    if x.is_infinite() {
        return T::zero();
    }
    if x < lit(CF_SWITCH) {
        T::one() - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// Error function.
pub fn erf<T: Real>(x: T) -> T {
    if x.abs() < lit(CF_SWITCH) {
        if x < T::zero() {
            -erf_series(-x)
        } else {
            erf_series(x)
        }
    } else {
        T::one() - erfc(x)
    }
}

/// Gaussian tail `Q(x) = P(Z > x)` for standard normal `Z`.
pub fn gaussian_q<T: Real>(x: T) -> T {
    lit::<T>(0.5) * erfc(x / T::SQRT_2())
}

// erf(x) = 2/sqrt(pi) e^{-x^2} sum_n 2^n x^{2n+1} / (2n+1)!!
fn erf_series<T: Real>(x: T) -> T {
    let two_x2 = lit::<T>(2.0) * x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_TERMS {
        term = term * two_x2 / lit::<T>((2 * n + 1) as f64);
        sum = sum + term;
        if term <= sum * T::epsilon() {
            break;
        }
    }
    T::FRAC_2_SQRT_PI() * (-x * x).exp() * sum
}

// sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
fn erfc_continued_fraction<T: Real>(x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for k in 1..MAX_TERMS {
        let a = lit::<T>(k as f64 * 0.5);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    (-x * x).exp() / (f * T::PI().sqrt())
}
