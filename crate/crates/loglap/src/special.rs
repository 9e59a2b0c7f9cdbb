//! Special functions used throughout the crate: Gamma, modified Bessel `I_n`,
//! Bessel `J_ν`, and the split-integral identity that produces the
//! Euler–Mascheroni constant.
//!
//! Everything here is a deterministic pure function of its arguments. No
//! caching, no global state.

use crate::quad::{integrate, QuadError, QuadratureResult};
use thiserror::Error;

/// Euler–Mascheroni constant γ = -Γ'(1), stored as a literal rather than
/// computed: downstream identities are compared against it.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.57721566490153286061;

#[derive(Debug, Error)]
pub enum SpecialFnError {
    #[error("gamma pole at nonpositive integer x = {0}")]
    GammaPole(f64),
    #[error("bessel_j requires order nu >= -1/2, got {0}")]
    UnsupportedOrder(f64),
    #[error("bessel_j diverges at r = 0 for negative order {0}")]
    SingularAtZero(f64),
    #[error("negative argument {0} outside the domain")]
    NegativeArgument(f64),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

// Lanczos coefficients, g = 7, 9 terms (GSL / Godfrey set), at their
// published precision.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_P: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Gamma function for real `x` away from the poles at `0, -1, -2, …`.
///
/// Lanczos approximation with the reflection formula for `x < 1/2`; relative
/// error below `1e-13` on `[-10, 50]`.
pub fn gamma(x: f64) -> Result<f64, SpecialFnError> {
    if x <= 0.0 && x == x.floor() {
        return Err(SpecialFnError::GammaPole(x));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        let s = (std::f64::consts::PI * x).sin();
        std::f64::consts::PI / (s * gamma_unchecked(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS_P[0];
        for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
            acc += p / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        // t^{z+1/2} e^{-t} computed as (t^{(z+1/2)/2}) e^{-t} (t^{(z+1/2)/2})
        // so the intermediate stays finite up to the true overflow of Γ.
        let p = t.powf(0.5 * (z + 0.5));
        (2.0 * std::f64::consts::PI).sqrt() * p * (-t).exp() * p * acc
    }
}

/// Natural log of Γ(x) for `x > 0`. Avoids the overflow of `gamma` for large
/// arguments (Bessel series starting terms need `ln Γ` up to a few thousand).
pub fn ln_gamma(x: f64) -> Result<f64, SpecialFnError> {
    if x <= 0.0 {
        return Err(SpecialFnError::NegativeArgument(x));
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_P[0];
    for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
        acc += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln())
}

/// Exponentially scaled modified Bessel function `e^{-z} I_n(z)` for `z >= 0`.
///
/// Three regimes: the ascending series (all terms positive, relatively
/// accurate) for small and moderate `z`; the periodic trapezoid rule on
/// `(1/π)∫_0^π e^{z(cos θ - 1)} cos(nθ) dθ` for large `z`; and the Hankel-type
/// asymptotic expansion once `z` dominates `n²`. The scaling keeps every
/// regime free of overflow for arbitrarily large `z`.
pub fn bessel_i_scaled(n: i64, z: f64) -> Result<f64, SpecialFnError> {
    if z < 0.0 {
        return Err(SpecialFnError::NegativeArgument(z));
    }
    let n = n.unsigned_abs();
    if z == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if z <= 35.0 {
        return Ok(bessel_i_scaled_series(n, z));
    }
    let nf = n as f64;
    if z >= 200.0 && z >= 25.0 * nf * nf {
        return Ok(bessel_i_scaled_asymptotic(nf, z));
    }
    Ok(bessel_i_scaled_trapezoid(n, z))
}

/// Unscaled `I_n(z)`. Overflows for `z` beyond ~700; use [`bessel_i_scaled`]
/// in kernel integrals.
pub fn bessel_i(n: i64, z: f64) -> Result<f64, SpecialFnError> {
    Ok(bessel_i_scaled(n, z)? * z.exp())
}

fn bessel_i_scaled_series(n: u64, z: f64) -> f64 {
    // t_0 = (z/2)^n / n! * e^{-z}, computed in log space so large n underflows
    // gracefully instead of spuriously overflowing the numerator.
    let nf = n as f64;
    let log_t0 = nf * (0.5 * z).ln() - ln_gamma(nf + 1.0).expect("n+1 > 0") - z;
    if log_t0 < -745.0 {
        return 0.0;
    }
    let mut term = log_t0.exp();
    let q = 0.25 * z * z;
    let mut sum = term;
    let mut m = 0.0;
    loop {
        term *= q / ((m + 1.0) * (nf + m + 1.0));
        sum += term;
        m += 1.0;
        if term < sum * 1e-18 || m > 1e6 {
            return sum;
        }
    }
}

fn bessel_i_scaled_trapezoid(n: u64, z: f64) -> f64 {
    // Periodic trapezoid on [0, π]; the integrand extends to an even 2π-periodic
    // entire function, so the rule converges geometrically once the node count
    // exceeds the bandwidth ~ z + n.
    let m = ((z + n as f64) as usize + 64).next_multiple_of(2);
    let h = std::f64::consts::PI / m as f64;
    let nf = n as f64;
    // Half-weight endpoints: θ=0 gives e^0=1, θ=π gives e^{-2z} cos(nπ).
    let mut acc = 0.5 * (1.0 + (-2.0 * z).exp() * (nf * std::f64::consts::PI).cos());
    for j in 1..m {
        let theta = h * j as f64;
        acc += (z * (theta.cos() - 1.0)).exp() * (nf * theta).cos();
    }
    acc * h / std::f64::consts::PI
}

fn bessel_i_scaled_asymptotic(nf: f64, z: f64) -> f64 {
    // e^{-z} I_ν(z) ~ (2πz)^{-1/2} Σ_k (-1)^k t_k with
    // t_k = ∏_{j<=k} (4ν² - (2j-1)²) / (k! (8z)^k), truncated at the smallest
    // term. Valid here because dispatch requires z >> ν².
    let mu = 4.0 * nf * nf;
    let mut t = 1.0;
    let mut sum = 1.0;
    for k in 1..=60u32 {
        let kf = k as f64;
        let d = 2.0 * kf - 1.0;
        let next = t * (mu - d * d) / (kf * 8.0 * z);
        if next.abs() >= t.abs() {
            break;
        }
        t = next;
        sum += if k % 2 == 1 { -t } else { t };
        if t.abs() < 1e-18 {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * z).sqrt()
}

/// Bessel function of the first kind `J_ν(r)` for real order `ν >= -1/2` and
/// `r >= 0`. Ascending series for `r <= 10`, Hankel asymptotic expansion
/// beyond; for half-integer orders the expansion terminates and is exact.
pub fn bessel_j(nu: f64, r: f64) -> Result<f64, SpecialFnError> {
    if nu < -0.5 {
        return Err(SpecialFnError::UnsupportedOrder(nu));
    }
    if r < 0.0 {
        return Err(SpecialFnError::NegativeArgument(r));
    }
    if r == 0.0 {
        if nu < 0.0 {
            return Err(SpecialFnError::SingularAtZero(nu));
        }
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if r <= 10.0 {
        Ok(bessel_j_series(nu, r))
    } else {
        Ok(bessel_j_hankel(nu, r))
    }
}

fn bessel_j_series(nu: f64, r: f64) -> f64 {
    let log_t0 = nu * (0.5 * r).ln() - ln_gamma(nu + 1.0).expect("nu + 1 > 1/2");
    let mut term = log_t0.exp();
    let q = 0.25 * r * r;
    let mut sum = term;
    let mut m = 0.0;
    loop {
        term *= -q / ((m + 1.0) * (nu + m + 1.0));
        sum += term;
        m += 1.0;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) || m > 200.0 {
            return sum;
        }
    }
}

fn bessel_j_hankel(nu: f64, r: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let omega = r - 0.5 * nu * std::f64::consts::PI - 0.25 * std::f64::consts::PI;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut j = 1.0;
    loop {
        let next = term * (mu - (2.0 * j - 1.0) * (2.0 * j - 1.0)) / (j * 8.0 * r);
        if next == 0.0 {
            break; // half-integer order: the expansion terminates exactly
        }
        if next.abs() >= term.abs() {
            break; // smallest term reached
        }
        term = next;
        let k = j as i64;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        j += 1.0;
        if j > 60.0 || term.abs() < 1e-18 {
            break;
        }
    }
    (2.0 / (std::f64::consts::PI * r)).sqrt() * (omega.cos() * p - omega.sin() * q)
}

/// `m`-th positive zero of `J_ν` (`m >= 1`), by McMahon's expansion refined
/// with Newton steps. Accurate to ~1e-12 relative for the orders used here.
pub fn bessel_j_zero(nu: f64, m: usize) -> Result<f64, SpecialFnError> {
    if nu < -0.5 {
        return Err(SpecialFnError::UnsupportedOrder(nu));
    }
    let mu = 4.0 * nu * nu;
    let beta = (m as f64 + 0.5 * nu - 0.25) * std::f64::consts::PI;
    let mut x = beta - (mu - 1.0) / (8.0 * beta)
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * beta).powi(3));
    for _ in 0..3 {
        let jv = bessel_j(nu, x)?;
        // J'_ν(x) = -J_{ν+1}(x) + (ν/x) J_ν(x): keeps the recursive order >= 1/2.
        let d = -bessel_j(nu + 1.0, x)? + nu / x * jv;
        if d == 0.0 {
            break;
        }
        let step = jv / d;
        x -= step;
        if step.abs() < 1e-14 * x {
            break;
        }
    }
    Ok(x)
}

/// Evaluates `∫_0^1 (e^{-t} - 1)/t dt + ∫_1^∞ e^{-t}/t dt`, which equals `-γ`.
///
/// The first integrand is entire (`expm1` keeps it stable near 0); the second
/// is truncated at `T = 40` where the remaining tail is below `e^{-40}`.
pub fn euler_split_check() -> Result<QuadratureResult, SpecialFnError> {
    let first = integrate(|t| (-t).exp_m1() / t, 1e-308, 1.0, 5e-14, &[], 2000)?;
    let second = integrate(|t| (-t).exp() / t, 1.0, 40.0, 5e-14, &[2.0, 5.0, 12.0], 2000)?;
    let tail_bound = (-40.0f64).exp() / 40.0;
    Ok(QuadratureResult {
        value: first.value + second.value,
        abs_error_estimate: first.abs_error_estimate + second.abs_error_estimate + tail_bound,
        evaluations: first.evaluations + second.evaluations,
    })
}
