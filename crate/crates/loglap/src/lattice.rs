//! The kernels `W_s`, `W_log`, `W` on the standard lattice `Z^d` and the
//! pointwise fractional and logarithmic Laplacians built from them.
//!
//! All kernels are time integrals of the closed-form heat kernel
//! (`W_s = (s/Γ(1-s)) ∫_0^∞ p t^{-1-s} dt` over the split at `t = 1` for
//! `W_log`/`W`), evaluated in log-time with certified truncation: the
//! short-time tail uses `p(t,0,k) <= t^{|k|_1}/Π k_j!`, the long-time tail
//! uses `p(t,0,0) <= (2πt)^{-d/2}`.
//!
//! The pointwise operators use the stochastic-completeness row sums
//! (`Σ_{y≠x} W_s(x,y) = (s/Γ(1-s)) ∫ (1 - p(t,x,x)) t^{-1-s} dt` and its
//! logarithmic analogue) plus an exact finite convolution over the support
//! of `u`, so no truncated lattice sums enter the operator values.

use crate::graph::lattice_ball_volume;
use crate::heat::{least_squares, one_minus_p_diag, p_zd, r_squared};
use crate::quad::{integrate, QuadError};
use crate::special::{gamma, ln_gamma, SpecialFnError, EULER_GAMMA};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
    #[error("offset {0:?} does not match dimension d = {1}")]
    DimensionMismatch(Vec<i64>, u32),
    #[error("kernel {0} undefined at the origin offset")]
    OriginExcluded(&'static str),
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("duplicate support point {0:?}")]
    DuplicateSupport(Vec<i64>),
}

/// Finitely supported real function on `Z^d`: support list plus values,
/// implicitly zero elsewhere. Support is kept sorted for deterministic sums.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunction {
    d: u32,
    support: Vec<Vec<i64>>,
    values: Vec<f64>,
}

impl LatticeFunction {
    pub fn new(d: u32, entries: Vec<(Vec<i64>, f64)>) -> Result<Self, LatticeError> {
        let mut entries = entries;
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut support = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (p, v) in entries {
            if p.len() != d as usize {
                return Err(LatticeError::DimensionMismatch(p, d));
            }
            if support.last() == Some(&p) {
                return Err(LatticeError::DuplicateSupport(p));
            }
            support.push(p);
            values.push(v);
        }
        Ok(LatticeFunction { d, support, values })
    }

    /// The Dirac delta at the origin.
    pub fn delta(d: u32) -> Self {
        LatticeFunction {
            d,
            support: vec![vec![0; d as usize]],
            values: vec![1.0],
        }
    }

    /// Seeded random function supported on the ℓ¹ ball of the given radius,
    /// with values in `[-1, 1)`. Deterministic across platforms.
    pub fn random_in_ball(d: u32, radius: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::new();
        // enumerate the full ball in lexicographic order
        let mut point = vec![-(radius as i64); d as usize];
        loop {
            let l1: i64 = point.iter().map(|c| c.abs()).sum();
            if l1 <= radius as i64 {
                entries.push((point.clone(), 2.0 * rng.gen::<f64>() - 1.0));
            }
            // advance odometer
            let mut axis = d as usize;
            loop {
                if axis == 0 {
                    let f = LatticeFunction::new(d, entries).expect("unique ball points");
                    return f;
                }
                axis -= 1;
                point[axis] += 1;
                if point[axis] <= radius as i64 {
                    break;
                }
                point[axis] = -(radius as i64);
            }
        }
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn support(&self) -> &[Vec<i64>] {
        &self.support
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], f64)> {
        self.support
            .iter()
            .map(|p| p.as_slice())
            .zip(self.values.iter().copied())
    }

    pub fn value_at(&self, p: &[i64]) -> f64 {
        match self.support.binary_search_by(|q| q.as_slice().cmp(p)) {
            Ok(i) => self.values[i],
            Err(_) => 0.0,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Which lattice kernel a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KernelKind {
    /// Fractional weight `W_s`.
    Ws(f64),
    /// Short-time logarithmic kernel `W_log`.
    Wlog,
    /// Long-range kernel `W`.
    Wlong,
}

impl KernelKind {
    fn name(&self) -> &'static str {
        match self {
            KernelKind::Ws(_) => "W_s",
            KernelKind::Wlog => "W_log",
            KernelKind::Wlong => "W",
        }
    }
}

fn check_offset(d: u32, k: &[i64]) -> Result<(), LatticeError> {
    if k.len() != d as usize {
        return Err(LatticeError::DimensionMismatch(k.to_vec(), d));
    }
    Ok(())
}

fn l1_norm(k: &[i64]) -> u64 {
    k.iter().map(|c| c.unsigned_abs()).sum()
}

fn ln_factorial_product(k: &[i64]) -> f64 {
    k.iter()
        .map(|&c| ln_gamma(c.abs() as f64 + 1.0).expect("positive argument"))
        .sum()
}

/// `p(t,0,k)/t^{|k|_1} = Π_j e^{-2t} Σ_m t^{2m}/(m!(k_j+m)!)`, the analytic
/// factor left after peeling the leading power. Finite and positive down to
/// `t = 0` (value `1/Π k_j!`), where `p` itself underflows. For `t <= 1`.
fn p_over_leading_power(d: u32, t: f64, k: &[i64]) -> f64 {
    debug_assert!(t <= 1.0 + 1e-12);
    let mut value = (-2.0 * t * d as f64).exp();
    for &c in k {
        let n = c.unsigned_abs();
        let mut term = (-ln_gamma(n as f64 + 1.0).expect("n + 1 > 0")).exp();
        let mut sum = term;
        let q = t * t;
        for m in 1..40u64 {
            term *= q / (m as f64 * (n + m) as f64);
            sum += term;
            if term < sum * 1e-18 {
                break;
            }
        }
        value *= sum;
    }
    value
}

/// Singular head `∫_0^{t0} t^{γ-1} h(t) dt` for `γ > 0` and analytic `h`,
/// through the exact substitution `u = t^γ` (so the integrand becomes the
/// bounded `h(u^{1/γ})/γ`). Immune to arbitrarily small exponents γ.
fn singular_head(
    gamma_exp: f64,
    t0: f64,
    h: impl Fn(f64) -> f64,
    tol: f64,
) -> Result<f64, QuadError> {
    let u0 = t0.powf(gamma_exp);
    let body = integrate(
        |u| h(u.powf(1.0 / gamma_exp)),
        0.0,
        u0,
        tol * gamma_exp / u0.max(1e-300),
        &[],
        4000,
    )?;
    Ok(body.value / gamma_exp)
}

/// Fractional weight `W_s(0, k) = (s/Γ(1-s)) ∫_0^∞ p(t,0,k) t^{-1-s} dt`
/// with μ ≡ 1, for `k ≠ 0`. Returns `(value, certified error)`.
pub fn w_s(d: u32, s: f64, k: &[i64], tol: f64) -> Result<(f64, f64), LatticeError> {
    check_offset(d, k)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(LatticeError::BadParameter(format!(
            "fractional order s = {s} outside (0, 1)"
        )));
    }
    let r = l1_norm(k);
    if r == 0 {
        return Err(LatticeError::OriginExcluded("W_s"));
    }
    let prefactor = s / gamma(1.0 - s)?;
    let inner_tol = tol / (4.0 * prefactor.max(1.0));

    // Short times: ∫_0^{t0} t^{r-1-s} (p/t^r) dt by the power substitution
    // (carries the full singular mass however close s is to r), then the
    // smooth remainder of (0, 1] in log time.
    let rf = r as f64;
    let t0 = 0.05f64;
    let head = singular_head(rf - s, t0, |t| p_over_leading_power(d, t, k), inner_tol)?;
    let short = integrate(
        |tau| {
            let t = tau.exp();
            p_zd(d, t, k) * (-s * tau).exp()
        },
        t0.ln(),
        0.0,
        inner_tol,
        &[],
        8000,
    )?;

    // long times in τ = ln t; truncation from p <= (2πt)^{-d/2}
    let decay = d as f64 / 2.0 + s;
    let c_diag = (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
    let tau_max = ((c_diag / (inner_tol * decay)).ln() / decay).max(1.0);
    let peak = (rf * rf / 4.0).max(1.0).ln();
    let long = integrate(
        |tau| {
            let t = tau.exp();
            p_zd(d, t, k) * (-s * tau).exp()
        },
        0.0,
        tau_max,
        inner_tol,
        &[peak.min(tau_max * 0.9), (2.0 * peak).min(tau_max * 0.95)],
        8000,
    )?;

    let value = prefactor * (head + short.value + long.value);
    let err = prefactor
        * (short.abs_error_estimate + long.abs_error_estimate + 3.0 * inner_tol).max(1e-300);
    Ok((value, err))
}

/// `W_log(0, k) = ∫_0^1 p(t,0,k) dt/t` for `k ≠ 0`.
pub fn w_log(d: u32, k: &[i64], tol: f64) -> Result<(f64, f64), LatticeError> {
    check_offset(d, k)?;
    let r = l1_norm(k);
    if r == 0 {
        return Err(LatticeError::OriginExcluded("W_log"));
    }
    let rf = r as f64;
    let ln_fact = ln_factorial_product(k);
    // whole-integral bound 1/(r Πk!): quick certificate for far offsets
    let whole_bound = (-(rf.ln() + ln_fact)).exp();
    if whole_bound <= tol / 2.0 {
        return Ok((0.0, whole_bound));
    }
    let tau_min = (((tol / 2.0 * rf).ln() + ln_fact) / rf).clamp(-700.0, -1.0);
    let body = integrate(
        |tau| p_zd(d, tau.exp(), k),
        tau_min,
        0.0,
        tol / 2.0,
        &[],
        8000,
    )?;
    Ok((body.value, body.abs_error_estimate + tol / 2.0))
}

/// `W(0, k) = ∫_1^∞ p(t,0,k) dt/t`; the origin offset is allowed.
pub fn w_long(d: u32, k: &[i64], tol: f64) -> Result<(f64, f64), LatticeError> {
    check_offset(d, k)?;
    let df = d as f64;
    let c_diag = (2.0 * std::f64::consts::PI).powf(-df / 2.0);
    // tail beyond T: c_diag (2/d) T^{-d/2} <= tol/2
    let tau_max = ((4.0 * c_diag / (df * tol)).ln() * 2.0 / df).max(1.0);
    let rf = l1_norm(k) as f64;
    let peak = (rf * rf / 4.0).max(1.0).ln();
    let body = integrate(
        |tau| p_zd(d, tau.exp(), k),
        0.0,
        tau_max,
        tol / 2.0,
        &[
            peak.min(tau_max * 0.9),
            (2.0 * peak).min(tau_max * 0.95),
        ],
        8000,
    )?;
    Ok((body.value, body.abs_error_estimate + tol / 2.0))
}

/// Canonical ℓ¹ shell classes: non-increasing absolute coordinate patterns
/// summing to `r`, with the number of lattice points each represents.
pub(crate) fn shell_canonical_classes(d: u32, r: u64) -> Vec<(Vec<i64>, u64)> {
    let mut classes = Vec::new();
    let mut pattern = vec![0i64; d as usize];
    fill_patterns(d as usize, r as i64, i64::MAX, &mut pattern, 0, &mut classes);
    classes
}

fn fill_patterns(
    d: usize,
    remaining: i64,
    cap: i64,
    pattern: &mut [i64],
    axis: usize,
    out: &mut Vec<(Vec<i64>, u64)>,
) {
    if axis == d {
        if remaining == 0 {
            out.push((pattern.to_vec(), class_multiplicity(pattern)));
        }
        return;
    }
    let hi = remaining.min(cap);
    for v in (0..=hi).rev() {
        pattern[axis] = v;
        fill_patterns(d, remaining - v, v, pattern, axis + 1, out);
    }
    pattern[axis] = 0;
}

fn class_multiplicity(pattern: &[i64]) -> u64 {
    // permutations of the multiset × sign choices for nonzero entries
    let d = pattern.len() as u64;
    let mut perms = (1..=d).product::<u64>();
    let mut run = 1u64;
    for w in pattern.windows(2) {
        if w[0] == w[1] {
            run += 1;
            perms /= run;
        } else {
            run = 1;
        }
    }
    let nonzero = pattern.iter().filter(|&&v| v != 0).count() as u32;
    perms * (1u64 << nonzero)
}

/// Upper bound for `Σ_{|k|_1 > K} W_log(0, k)` from the factorial decay
/// `W_log(k) <= 1/(|k|_1 Π k_j!)` and `Σ_{|k|_1 = r} 1/Π k_j! <= 2^d d^r/r!`.
pub(crate) fn wlog_tail_bound(d: u32, big_k: u64) -> f64 {
    let mut tail = 0.0;
    let mut term = (2.0f64).powi(d as i32);
    // term tracks 2^d d^r / r! progressively
    for r in 1..=(big_k + 60) {
        term *= d as f64 / r as f64;
        if r > big_k {
            tail += term / r as f64;
        }
    }
    tail
}

/// Both sides of the row-sum identity
/// `Σ_{y≠x} W_log(x,y) = μ(x) ∫_0^1 (1 - p(t,x,x) μ(x)) dt/t`.
#[derive(Debug, Clone, Serialize)]
pub struct RowSumIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Evaluates the identity on the standard lattice: the left side sums shells
/// to the factorial-tail cutoff, the right side integrates the cancellation-
/// free diagonal complement.
pub fn wlog_row_sum_identity(d: u32, tol: f64) -> Result<RowSumIdentity, LatticeError> {
    let lhs = log_row_sum_by_shells(d, tol / 2.0)?;
    let rhs = log_row_sum_integral(d, tol / 2.0)?;
    let gap = (lhs - rhs).abs();
    Ok(RowSumIdentity {
        lhs,
        rhs,
        gap,
        tol,
        pass: gap <= tol,
    })
}

fn log_row_sum_by_shells(d: u32, tol: f64) -> Result<f64, LatticeError> {
    let mut big_k = 10u64;
    while wlog_tail_bound(d, big_k) > tol / 2.0 {
        big_k += 5;
    }
    let mut classes = 0usize;
    for r in 1..=big_k {
        classes += shell_canonical_classes(d, r).len();
    }
    let each = tol / (2.0 * classes as f64);
    let mut total = 0.0;
    for r in 1..=big_k {
        for (offset, mult) in shell_canonical_classes(d, r) {
            total += w_log(d, &offset, each)?.0 * mult as f64;
        }
    }
    Ok(total)
}

fn log_row_sum_integral(d: u32, tol: f64) -> Result<f64, LatticeError> {
    let body = integrate(
        |t| one_minus_p_diag(d, t) / t,
        0.0,
        1.0,
        tol,
        &[0.01, 0.1, 0.5],
        4000,
    )?;
    Ok(body.value)
}

/// `Σ_{k≠0} W_s(0,k) = (s/Γ(1-s)) ∫_0^∞ (1 - p(t,0,0)) t^{-1-s} dt`
/// (stochastic completeness), the diagonal row sum of the fractional kernel.
fn ws_row_sum(d: u32, s: f64, tol: f64) -> Result<(f64, f64), LatticeError> {
    let prefactor = s / gamma(1.0 - s)?;
    let inner_tol = tol / (4.0 * prefactor.max(1.0));
    let df = d as f64;
    // ∫_0^{t0} t^{-s} (1-p)/t dt by the power substitution, remainder direct.
    let t0 = 0.05f64;
    let complement_rate = |t: f64| {
        if t < 1e-12 {
            2.0 * df // limit of (1 - p(t,0,0))/t
        } else {
            one_minus_p_diag(d, t) / t
        }
    };
    let head = singular_head(1.0 - s, t0, complement_rate, inner_tol)?;
    let short = integrate(
        |t| one_minus_p_diag(d, t) * t.powf(-1.0 - s),
        t0,
        1.0,
        inner_tol,
        &[0.1, 0.5],
        8000,
    )?;
    // ∫_1^∞ (1-p) t^{-1-s} = 1/s - ∫_1^T p t^{-1-s} - tail
    let decay = df / 2.0 + s;
    let c_diag = (2.0 * std::f64::consts::PI).powf(-df / 2.0);
    let t_max = (c_diag / (inner_tol * decay)).powf(1.0 / decay).max(2.0);
    let origin = vec![0i64; d as usize];
    let long = integrate(
        |tau| {
            let t = tau.exp();
            p_zd(d, t, &origin) * (-s * tau).exp()
        },
        0.0,
        t_max.ln(),
        inner_tol,
        &[],
        8000,
    )?;
    let value = prefactor * (head + short.value + 1.0 / s - long.value);
    let err =
        prefactor * (short.abs_error_estimate + long.abs_error_estimate + 4.0 * inner_tol);
    Ok((value, err))
}

/// `Σ_{k≠0} W_log(0,k) = ∫_0^1 (1 - p(t,0,0)) dt/t` with its error.
fn wlog_row_sum(d: u32, tol: f64) -> Result<(f64, f64), LatticeError> {
    let body = integrate(
        |t| one_minus_p_diag(d, t) / t,
        0.0,
        1.0,
        tol,
        &[0.01, 0.1, 0.5],
        4000,
    )?;
    Ok((body.value, body.abs_error_estimate))
}

/// Memoized kernel table over offsets, canonicalized by the sign-flip and
/// coordinate-permutation symmetries of the standard lattice.
#[derive(Debug)]
pub struct KernelTable {
    pub kind: KernelKind,
    d: u32,
    tol: f64,
    entries: BTreeMap<Vec<i64>, (f64, f64)>,
}

impl KernelTable {
    pub fn new(d: u32, kind: KernelKind, tol: f64) -> Self {
        KernelTable {
            kind,
            d,
            tol,
            entries: BTreeMap::new(),
        }
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    fn canonical(k: &[i64]) -> Vec<i64> {
        let mut c: Vec<i64> = k.iter().map(|v| v.abs()).collect();
        c.sort_unstable_by(|a, b| b.cmp(a));
        c
    }

    pub fn value(&mut self, k: &[i64]) -> Result<(f64, f64), LatticeError> {
        check_offset(self.d, k)?;
        let key = Self::canonical(k);
        if let Some(&hit) = self.entries.get(&key) {
            return Ok(hit);
        }
        let computed = match self.kind {
            KernelKind::Ws(s) => w_s(self.d, s, &key, self.tol)?,
            KernelKind::Wlog => w_log(self.d, &key, self.tol)?,
            KernelKind::Wlong => w_long(self.d, &key, self.tol)?,
        };
        self.entries.insert(key, computed);
        Ok(computed)
    }

    /// Fills every offset with `|k|_1 <= radius` (skipping the origin where
    /// the kernel excludes it).
    pub fn build_window(&mut self, radius: u64) -> Result<(), LatticeError> {
        let start = match self.kind {
            KernelKind::Wlong => 0,
            _ => 1,
        };
        for r in start..=radius {
            for (offset, _) in shell_canonical_classes(self.d, r) {
                self.value(&offset)?;
            }
        }
        Ok(())
    }

    /// Computed entries in deterministic (canonical, lexicographic) order.
    pub fn entries(&self) -> impl Iterator<Item = (&Vec<i64>, &(f64, f64))> {
        self.entries.iter()
    }
}

/// Writes a kernel table as CSV: `kind,d,s,k1..kd,value,err_est`.
pub fn write_kernel_csv<W: std::io::Write>(
    out: &mut W,
    table: &KernelTable,
) -> std::io::Result<()> {
    let d = table.dimension();
    write!(out, "kind,d,s")?;
    for axis in 1..=d {
        write!(out, ",k{axis}")?;
    }
    writeln!(out, ",value,err_est")?;
    let s_field = match table.kind {
        KernelKind::Ws(s) => format!("{s}"),
        _ => String::new(),
    };
    for (k, (value, err)) in table.entries() {
        write!(out, "{},{d},{s_field}", table.kind.name())?;
        for c in k {
            write!(out, ",{c}")?;
        }
        writeln!(out, ",{value:.17e},{err:.3e}")?;
    }
    Ok(())
}

/// The pointwise fractional Laplacian on `Z^d`:
/// `(-Δ)^s u(x) = Σ_{y≠x} W_s(x,y)(u(x) - u(y))`
/// `            = u(x) Σ_{y≠x} W_s(x,y) - (W_s * u)(x)`.
#[derive(Debug)]
pub struct FracPointwise {
    s: f64,
    row_sum: (f64, f64),
    table: KernelTable,
}

impl FracPointwise {
    pub fn new(d: u32, s: f64, tol: f64) -> Result<Self, LatticeError> {
        if !(s > 0.0 && s < 1.0) {
            return Err(LatticeError::BadParameter(format!(
                "fractional order s = {s} outside (0, 1)"
            )));
        }
        Ok(FracPointwise {
            s,
            row_sum: ws_row_sum(d, s, tol)?,
            table: KernelTable::new(d, KernelKind::Ws(s), tol),
        })
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    /// `(-Δ)^s u(x)` with certified error: row-sum identity plus an exact
    /// finite convolution over `supp u`.
    pub fn apply(&mut self, u: &LatticeFunction, x: &[i64]) -> Result<(f64, f64), LatticeError> {
        check_offset(self.table.d, x)?;
        let mut value = u.value_at(x) * self.row_sum.0;
        let mut err = u.value_at(x).abs() * self.row_sum.1;
        for (y, uy) in u.iter() {
            if y == x {
                continue;
            }
            let offset: Vec<i64> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
            let (w, we) = self.table.value(&offset)?;
            value -= w * uy;
            err += we * uy.abs();
        }
        Ok((value, err))
    }
}

/// The pointwise logarithmic Laplacian on `Z^d`:
/// `log(-Δ)u(x) = Σ_{y≠x} W_log(x,y)(u(x)-u(y)) - Σ_y W(x,y) u(y) + Γ'(1) u(x)`.
#[derive(Debug)]
pub struct LogPointwise {
    row_sum_log: (f64, f64),
    wlog: KernelTable,
    wlong: KernelTable,
}

impl LogPointwise {
    pub fn new(d: u32, tol: f64) -> Result<Self, LatticeError> {
        Ok(LogPointwise {
            row_sum_log: wlog_row_sum(d, tol)?,
            wlog: KernelTable::new(d, KernelKind::Wlog, tol),
            wlong: KernelTable::new(d, KernelKind::Wlong, tol),
        })
    }

    /// `log(-Δ)u(x)` with certified error. `Γ'(1) = -γ` enters as a literal.
    pub fn apply(&mut self, u: &LatticeFunction, x: &[i64]) -> Result<(f64, f64), LatticeError> {
        check_offset(self.wlog.d, x)?;
        let ux = u.value_at(x);
        let mut value = ux * (self.row_sum_log.0 - EULER_GAMMA);
        let mut err = ux.abs() * self.row_sum_log.1;
        for (y, uy) in u.iter() {
            let offset: Vec<i64> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
            if y != x {
                let (w, we) = self.wlog.value(&offset)?;
                value -= w * uy;
                err += we * uy.abs();
            }
            let (w, we) = self.wlong.value(&offset)?;
            value -= w * uy;
            err += we * uy.abs();
        }
        Ok((value, err))
    }
}

/// One-shot `(-Δ)^s u(x)`.
pub fn frac_laplacian_pointwise(
    d: u32,
    s: f64,
    u: &LatticeFunction,
    x: &[i64],
    tol: f64,
) -> Result<(f64, f64), LatticeError> {
    FracPointwise::new(d, s, tol)?.apply(u, x)
}

/// One-shot `log(-Δ)u(x)`.
pub fn log_laplacian_pointwise(
    d: u32,
    u: &LatticeFunction,
    x: &[i64],
    tol: f64,
) -> Result<(f64, f64), LatticeError> {
    LogPointwise::new(d, tol)?.apply(u, x)
}

/// Row sum `Σ_{y≠x} W_log(x,y)/μ(x)`, certified by the factorial tail: the
/// boundedness constant of the log-gradient. On the standard lattice the
/// supremum over `x` is a single row sum by translation invariance.
pub fn log_gradient_row_bound(d: u32, big_k: u64, tol: f64) -> Result<(f64, f64), LatticeError> {
    let mut classes = 0usize;
    for r in 1..=big_k {
        classes += shell_canonical_classes(d, r).len();
    }
    let each = tol / classes.max(1) as f64;
    let mut total = 0.0;
    let mut err = wlog_tail_bound(d, big_k);
    for r in 1..=big_k {
        for (offset, mult) in shell_canonical_classes(d, r) {
            let (v, e) = w_log(d, &offset, each)?;
            total += v * mult as f64;
            err += e * mult as f64;
        }
    }
    Ok((total, err))
}

/// Quadratic-form growth report for the long-range kernel on ball indicators.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub n_values: Vec<u64>,
    pub q_values: Vec<f64>,
    /// Least-squares slope of `Q_n` against `ln n`.
    pub log_slope: f64,
    pub r_squared: f64,
    pub increasing: bool,
}

/// `Q_n = Σ_{x,y} u_n(x) u_n(y) W(x,y)` with `u_n` the normalized indicator
/// of the ℓ¹ ball of radius `n`. Unbounded growth (`~ log n` for d = 1)
/// witnesses the failure of `W` to induce a bounded form on `ℓ²`.
pub fn quadratic_form_growth(
    d: u32,
    n_list: &[u64],
    tol: f64,
) -> Result<GrowthReport, LatticeError> {
    let max_n = *n_list.iter().max().ok_or_else(|| {
        LatticeError::BadParameter("empty n list".into())
    })?;
    if max_n > 30 {
        return Err(LatticeError::BadParameter(
            "ball radius beyond the desk-scale cap of 30".into(),
        ));
    }
    let mut table = KernelTable::new(d, KernelKind::Wlong, tol);
    // pair-count autocorrelation of the ball: offsets reach 2n
    let mut q_values = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let ball = ball_points(d, n as i64);
        let volume = lattice_ball_volume(d, n) as f64;
        let mut q = 0.0;
        for x in &ball {
            for y in &ball {
                let offset: Vec<i64> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
                q += table.value(&offset)?.0;
            }
        }
        q_values.push(q / volume);
    }
    let xs: Vec<f64> = n_list.iter().map(|&n| (n as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &q_values);
    let r2 = r_squared(&xs, &q_values, slope, intercept);
    let increasing = q_values.windows(2).all(|w| w[1] > w[0]);
    Ok(GrowthReport {
        n_values: n_list.to_vec(),
        q_values,
        log_slope: slope,
        r_squared: r2,
        increasing,
    })
}

fn ball_points(d: u32, radius: i64) -> Vec<Vec<i64>> {
    let mut points = Vec::new();
    let mut p = vec![-radius; d as usize];
    'outer: loop {
        if p.iter().map(|c| c.abs()).sum::<i64>() <= radius {
            points.push(p.clone());
        }
        let mut axis = d as usize;
        loop {
            if axis == 0 {
                break 'outer;
            }
            axis -= 1;
            p[axis] += 1;
            if p[axis] <= radius {
                break;
            }
            p[axis] = -radius;
        }
    }
    points
}

/// Which ℓᵖ norm a difference-quotient sweep reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpNorm {
    P(f64),
    Infinity,
}

/// Error sequence `|| ((-Δ)^s u - u)/s - log(-Δ)u ||_{ℓᵖ}` for each `s`,
/// over a window large enough that both operators' `|x|^{-d}` tails cannot
/// disturb the ordering; the window max plus the boundary ring value is
/// reported for `p = ∞`.
pub fn diff_quotient_error(
    d: u32,
    u: &LatticeFunction,
    s_list: &[f64],
    p: LpNorm,
    tol: f64,
) -> Result<Vec<f64>, LatticeError> {
    if let LpNorm::P(q) = p {
        if q <= 1.0 {
            return Err(LatticeError::BadParameter(format!(
                "ℓᵖ exponent p = {q} outside (1, ∞]"
            )));
        }
    }
    let support_radius = u
        .support()
        .iter()
        .map(|k| l1_norm(k))
        .max()
        .unwrap_or(0);
    let window = support_radius + 40;
    let mut log_op = LogPointwise::new(d, tol)?;
    let points = ball_points(d, window as i64);
    // log(-Δ)u over the window once
    let mut log_values = Vec::with_capacity(points.len());
    for x in &points {
        log_values.push(log_op.apply(u, x)?.0);
    }
    let mut errors = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let mut frac = FracPointwise::new(d, s, tol)?;
        let mut acc: f64 = 0.0;
        for (x, &log_v) in points.iter().zip(log_values.iter()) {
            let (f_v, _) = frac.apply(u, x)?;
            let diff = ((f_v - u.value_at(x)) / s - log_v).abs();
            match p {
                LpNorm::Infinity => acc = acc.max(diff),
                LpNorm::P(q) => acc += diff.powf(q),
            }
        }
        errors.push(match p {
            LpNorm::Infinity => acc,
            LpNorm::P(q) => acc.powf(1.0 / q),
        });
    }
    Ok(errors)
}
