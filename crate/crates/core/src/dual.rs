//! Characteristic functions on the dual group.
//!
//! Evaluation, zero localization with order detection, the winding number
//! of `μ̂` around the circle, and the continuous logarithm `ψ` with
//! `ψ(trivial character) = 0` obtained by phase unwrapping.
//!
//! Dual coordinates are radians: `θ ∈ [0, 2π)` for the integers, `y ∈ ℝ`
//! for a lattice of step `h` (so `μ̂(y) = Σ w_x e^{i x h y}`), and the
//! characters `2πj/N` for `Z_N`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{GroupSpec, Measure};

/// Default threshold below which `|μ̂|` counts as zero.
pub const ZERO_TOL: f64 = 1e-10;
/// Default threshold above which a derivative counts as non-vanishing.
pub const ORDER_TOL: f64 = 1e-8;
/// Highest derivative order examined when classifying a zero.
pub const MAX_DERIVATIVE_ORDER: u32 = 12;
/// Largest admissible principal phase step between neighbouring grid points.
pub const PHASE_STEP_LIMIT: f64 = FRAC_PI_2;
/// Initial grid of the winding refinement.
pub const WINDING_START_GRID: usize = 256;
/// Hard cap on unwrapping grids.
pub const MAX_GRID: usize = 1 << 20;
/// Default dual grid size.
pub const DEFAULT_GRID: usize = 1024;

// Candidates whose refined modulus stays above this are not zeros.
const SCREEN_TOL: f64 = 1e-3;

/// Sampled values of `μ̂`.
#[derive(Debug, Clone, Serialize)]
pub struct DualGrid {
    pub group: GroupSpec,
    pub points: Vec<f64>,
    #[serde(skip)]
    pub values: Vec<Complex64>,
}

impl DualGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the trivial character.
    pub fn origin_index(&self) -> usize {
        match self.group {
            GroupSpec::RealLattice { .. } => self.points.len() / 2,
            _ => 0,
        }
    }
}

/// A zero of `μ̂` with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroPoint {
    pub location: f64,
    pub order: u32,
    /// `|μ̂^{(k)}(location)| / k!`.
    pub leading_coefficient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FailureReason {
    HasZeros,
    NonzeroWinding,
}

/// The unwrapped logarithm of `μ̂` together with the admissibility verdict.
#[derive(Debug, Clone, Serialize)]
pub struct SecondCharacteristic {
    pub grid: DualGrid,
    /// Continuous logarithm on `grid`; absent when `μ̂` has zeros.
    #[serde(skip)]
    pub psi: Option<Vec<Complex64>>,
    /// Degree of `μ̂` around the circle (integers only, otherwise 0).
    pub winding: i64,
    pub admissible: bool,
    pub failure_reason: Option<FailureReason>,
    pub zeros: Vec<ZeroPoint>,
}

impl SecondCharacteristic {
    /// `max_j |exp(ψ_j) − μ̂_j|`, or `None` without a logarithm.
    pub fn reconstruction_error(&self) -> Option<f64> {
        let psi = self.psi.as_ref()?;
        Some(
            psi.iter()
                .zip(&self.grid.values)
                .map(|(p, v)| (p.exp() - v).norm())
                .fold(0.0, f64::max),
        )
    }

    pub fn psi_at_origin(&self) -> Option<Complex64> {
        self.psi.as_ref().map(|p| p[self.grid.origin_index()])
    }
}

/// `μ̂(θ) = Σ_x w_x e^{i x θ_eff}` with `θ_eff = θ·h` on a lattice of step `h`.
pub fn char_fn(mu: &Measure, theta: f64) -> Complex64 {
    let scale = mu.group().point_scale();
    mu.atoms()
        .iter()
        .map(|(&x, &w)| Complex64::from_polar(w, x as f64 * scale * theta))
        .sum()
}

fn i_pow(j: u32) -> Complex64 {
    match j % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Exact `j`-th derivative `Σ_x w_x (i x_eff)^j e^{i x_eff θ}`.
pub fn char_fn_derivative(mu: &Measure, theta: f64, order: u32) -> Result<Complex64> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::OrderTooHigh(order));
    }
    Ok(derivative_unchecked(mu, theta, order))
}

fn derivative_unchecked(mu: &Measure, theta: f64, order: u32) -> Complex64 {
    let scale = mu.group().point_scale();
    let ij = i_pow(order);
    mu.atoms()
        .iter()
        .map(|(&x, &w)| {
            let xe = x as f64 * scale;
            Complex64::from_polar(w * xe.powi(order as i32), xe * theta) * ij
        })
        .sum()
}

/// Exact DFT value at character `j` of `Z_N`, with angles reduced mod `N`.
pub(crate) fn cyclic_value(mu: &Measure, order: u64, j: u64) -> Complex64 {
    mu.atoms()
        .iter()
        .map(|(&x, &w)| {
            let r = ((x as u64 % order) * (j % order)) % order;
            Complex64::from_polar(w, TAU * r as f64 / order as f64)
        })
        .sum()
}

/// Uniform samples of `μ̂`.
///
/// Integers: `n_points` (a power of two, at least 16) points `2πj/n` of the
/// circle. Real lattice: `n_points + 1` points spanning `[−Y, Y]` with the
/// origin in the middle (`n_points` even, at least 16). Cyclic: all `N`
/// characters, `n_points` ignored.
pub fn sample_char_fn(mu: &Measure, n_points: usize, window: Option<f64>) -> Result<DualGrid> {
    let group = mu.group();
    match group {
        GroupSpec::Integers => {
            if n_points < 16 || !n_points.is_power_of_two() {
                return Err(Error::BadGridSize(format!(
                    "circle grid needs a power of two >= 16, got {n_points}"
                )));
            }
            let points: Vec<f64> = (0..n_points)
                .map(|j| TAU * j as f64 / n_points as f64)
                .collect();
            let values = points.iter().map(|&t| char_fn(mu, t)).collect();
            Ok(DualGrid {
                group,
                points,
                values,
            })
        }
        GroupSpec::RealLattice { .. } => {
            let y = window.ok_or_else(|| {
                Error::BadGridSize("a window [-Y, Y] is required on a real lattice".into())
            })?;
            if !(y.is_finite() && y > 0.0) {
                return Err(Error::BadGridSize(format!(
                    "window half-width must be positive, got {y}"
                )));
            }
            if n_points < 16 || !n_points.is_multiple_of(2) {
                return Err(Error::BadGridSize(format!(
                    "window grid needs an even count >= 16, got {n_points}"
                )));
            }
            let points = window_points(y, n_points);
            let values = points.iter().map(|&t| char_fn(mu, t)).collect();
            Ok(DualGrid {
                group,
                points,
                values,
            })
        }
        GroupSpec::Cyclic { order } => {
            let points = (0..order).map(|j| TAU * j as f64 / order as f64).collect();
            let values = (0..order).map(|j| cyclic_value(mu, order, j)).collect();
            Ok(DualGrid {
                group,
                points,
                values,
            })
        }
    }
}

fn window_points(y: f64, n: usize) -> Vec<f64> {
    let half = n / 2;
    (0..=n)
        .map(|j| {
            if j == half {
                0.0
            } else {
                y * (j as f64 - half as f64) / half as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum Domain {
    Periodic { start: f64, period: f64 },
    Window { lo: f64, hi: f64 },
}

fn default_domain(mu: &Measure) -> Domain {
    match mu.group() {
        GroupSpec::RealLattice { step } => Domain::Periodic {
            start: -PI / step,
            period: TAU / step,
        },
        _ => Domain::Periodic {
            start: 0.0,
            period: TAU,
        },
    }
}

/// Zeros of `μ̂` over one period (integers, cyclic, and lattices with the
/// default window `[−π/h, π/h)`), using the default order tolerance.
pub fn find_zeros(mu: &Measure, zero_tol: f64) -> Result<Vec<ZeroPoint>> {
    find_zeros_with(mu, zero_tol, ORDER_TOL, None)
}

/// Zero search with explicit tolerances. `window` restricts a real-lattice
/// search to `[−Y, Y]`; it is ignored for other groups.
pub fn find_zeros_with(
    mu: &Measure,
    zero_tol: f64,
    order_tol: f64,
    window: Option<f64>,
) -> Result<Vec<ZeroPoint>> {
    if !(zero_tol > 0.0 && zero_tol <= 1e-4) {
        return Err(Error::InvalidArgument(format!(
            "zero_tol must lie in (0, 1e-4], got {zero_tol}"
        )));
    }
    if let GroupSpec::Cyclic { order } = mu.group() {
        return cyclic_zeros(mu, order, zero_tol, order_tol);
    }
    let domain = match (mu.group(), window) {
        (GroupSpec::RealLattice { .. }, Some(y)) => {
            if !(y.is_finite() && y > 0.0) {
                return Err(Error::InvalidArgument(format!("bad window {y}")));
            }
            Domain::Window { lo: -y, hi: y }
        }
        _ => default_domain(mu),
    };
    scan_zeros(mu, domain, zero_tol, order_tol)
}

fn cyclic_zeros(
    mu: &Measure,
    order: u64,
    zero_tol: f64,
    order_tol: f64,
) -> Result<Vec<ZeroPoint>> {
    let mut zeros = Vec::new();
    for j in 0..order {
        if cyclic_value(mu, order, j).norm() <= zero_tol {
            // The order refers to the trigonometric polynomial with support
            // representatives in 0..N; the dual itself is discrete.
            let location = TAU * j as f64 / order as f64;
            let k = (1..=MAX_DERIVATIVE_ORDER)
                .find(|&k| derivative_unchecked(mu, location, k).norm() > order_tol)
                .ok_or(Error::OrderUndetermined { location })?;
            zeros.push(ZeroPoint {
                location,
                order: k,
                leading_coefficient: derivative_unchecked(mu, location, k).norm()
                    / factorial(k),
            });
        }
    }
    Ok(zeros)
}

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn scan_zeros(
    mu: &Measure,
    domain: Domain,
    zero_tol: f64,
    order_tol: f64,
) -> Result<Vec<ZeroPoint>> {
    let scale = mu.group().point_scale();
    let degree = mu.degree().max(1) as f64;
    let (lo, span, periodic) = match domain {
        Domain::Periodic { start, period } => (start, period, true),
        Domain::Window { lo, hi } => (lo, hi - lo, false),
    };
    // Oscillations of μ̂ inside the domain, with 64 samples per period of
    // the fastest component.
    let cycles = degree * scale * span / TAU;
    let m = ((64.0 * cycles).ceil() as usize).clamp(1024, 1 << 22);
    let step = span / m as f64;
    let count = if periodic { m } else { m + 1 };
    let coords: Vec<f64> = (0..count).map(|j| lo + step * j as f64).collect();
    let modsq: Vec<f64> = coords.iter().map(|&t| char_fn(mu, t).norm_sqr()).collect();

    let mut candidates = Vec::new();
    for j in 0..count {
        let (prev, next) = if periodic {
            ((j + count - 1) % count, (j + 1) % count)
        } else {
            (j.saturating_sub(1), (j + 1).min(count - 1))
        };
        if modsq[j] <= modsq[prev] && modsq[j] <= modsq[next] {
            candidates.push(coords[j]);
        }
    }

    let clamp = |t: f64| if periodic { t } else { t.clamp(lo, lo + span) };
    let mut zeros: Vec<ZeroPoint> = Vec::new();
    for seed in candidates {
        let (a, b) = (clamp(seed - step), clamp(seed + step));
        let mut loc = minimize_modulus(|t| derivative_pair(mu, t, 0), a, b);
        let mut modulus = char_fn(mu, loc).norm();
        if modulus > SCREEN_TOL {
            continue;
        }
        let mut order = None;
        for k in 1..=MAX_DERIVATIVE_ORDER {
            let (a, b) = (clamp(loc - step), clamp(loc + step));
            let cand = minimize_modulus(|t| derivative_pair(mu, t, k), a, b);
            let cand_mod = char_fn(mu, cand).norm();
            if cand_mod <= modulus {
                loc = cand;
                modulus = cand_mod;
            }
            if derivative_unchecked(mu, loc, k).norm() > order_tol {
                order = Some(k);
                break;
            }
        }
        if modulus > zero_tol {
            continue;
        }
        let k = order.ok_or(Error::OrderUndetermined { location: loc })?;
        if periodic {
            loc = lo + (loc - lo).rem_euclid(span);
        }
        let zp = ZeroPoint {
            location: loc,
            order: k,
            leading_coefficient: derivative_unchecked(mu, loc, k).norm() / factorial(k),
        };
        let dup = zeros.iter().any(|z| {
            let d = (z.location - zp.location).abs();
            let d = if periodic { d.min(span - d) } else { d };
            d < 1e-6
        });
        if !dup {
            zeros.push(zp);
        }
    }
    zeros.sort_by(|a, b| a.location.total_cmp(&b.location));
    Ok(zeros)
}

fn derivative_pair(mu: &Measure, t: f64, k: u32) -> (Complex64, Complex64) {
    (derivative_unchecked(mu, t, k), derivative_unchecked(mu, t, k + 1))
}

/// Minimizes `|g|²` on `[lo, hi]` given `t ↦ (g(t), g'(t))`: bisection on
/// the sign of `2 Re(conj(g) g')` when it brackets, golden section otherwise.
fn minimize_modulus<F>(f: F, lo: f64, hi: f64) -> f64
where
    F: Fn(f64) -> (Complex64, Complex64),
{
    let slope = |t: f64| {
        let (g, dg) = f(t);
        (g.conj() * dg).re
    };
    let value = |t: f64| f(t).0.norm_sqr();
    let best = if slope(lo) <= 0.0 && slope(hi) >= 0.0 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if slope(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    } else {
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (value(c), value(d));
        for _ in 0..200 {
            if (b - a).abs() <= f64::EPSILON * (1.0 + a.abs()) {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = value(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = value(d);
            }
        }
        0.5 * (a + b)
    };
    [best, lo, hi]
        .into_iter()
        .min_by(|x, y| value(*x).total_cmp(&value(*y)))
        .expect("non-empty")
}

/// Continuous logarithm of `μ̂` on a uniform circle grid.
#[derive(Debug, Clone)]
pub(crate) struct CircleLift {
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
    pub psi: Vec<Complex64>,
    pub winding: i64,
}

fn required_grid(mu: &Measure, requested: usize) -> usize {
    let by_degree = (8 * mu.degree().max(1) as usize).next_power_of_two();
    requested.max(by_degree).max(16).next_power_of_two()
}

/// Unwraps `arg μ̂` around the circle, doubling the grid (from at least
/// `start`) until every principal phase step is below `π/2`.
pub(crate) fn lift_circle(mu: &Measure, start: usize) -> Result<CircleLift> {
    let mut n = required_grid(mu, start);
    loop {
        if n > MAX_GRID {
            return Err(Error::NoConvergence);
        }
        let points: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
        let values: Vec<Complex64> = points.iter().map(|&t| char_fn(mu, t)).collect();
        let steps: Vec<f64> = (0..n)
            .map(|j| (values[(j + 1) % n] / values[j]).arg())
            .collect();
        if steps.iter().all(|s| s.abs() < PHASE_STEP_LIMIT) {
            let mut psi = Vec::with_capacity(n);
            let mut phase = values[0].arg();
            for j in 0..n {
                psi.push(Complex64::new(values[j].norm().ln(), phase));
                phase += steps[j];
            }
            let total: f64 = steps.iter().sum();
            let winding = (total / TAU).round() as i64;
            return Ok(CircleLift {
                points,
                values,
                psi,
                winding,
            });
        }
        n *= 2;
    }
}

/// Degree of `μ̂ : 𝕋 → ℂ*` (integers only).
pub fn winding_number(mu: &Measure) -> Result<i64> {
    if mu.group() != GroupSpec::Integers {
        return Err(Error::UnsupportedGroup(format!(
            "winding number is defined on Z, got {}",
            mu.group()
        )));
    }
    if !find_zeros(mu, ZERO_TOL)?.is_empty() {
        return Err(Error::HasZeros);
    }
    Ok(lift_circle(mu, WINDING_START_GRID)?.winding)
}

/// Second characteristic on a grid of at least `n_points` points.
///
/// On a real lattice `window` is the half-width `Y` of the sampled window
/// (default `π/h`); zeros are always searched over a full period.
pub fn second_characteristic(
    mu: &Measure,
    n_points: usize,
    window: Option<f64>,
) -> Result<SecondCharacteristic> {
    let zeros = find_zeros(mu, ZERO_TOL)?;
    let group = mu.group();
    if !zeros.is_empty() {
        let window = match group {
            GroupSpec::RealLattice { step } => Some(window.unwrap_or(PI / step)),
            _ => None,
        };
        let n = match group {
            GroupSpec::Integers => required_grid(mu, n_points),
            _ => n_points.max(16) + n_points % 2,
        };
        return Ok(SecondCharacteristic {
            grid: sample_char_fn(mu, n, window)?,
            psi: None,
            winding: 0,
            admissible: false,
            failure_reason: Some(FailureReason::HasZeros),
            zeros,
        });
    }
    match group {
        GroupSpec::Integers => {
            let lift = lift_circle(mu, n_points)?;
            let admissible = lift.winding == 0;
            Ok(SecondCharacteristic {
                grid: DualGrid {
                    group,
                    points: lift.points,
                    values: lift.values,
                },
                psi: Some(lift.psi),
                winding: lift.winding,
                admissible,
                failure_reason: (!admissible).then_some(FailureReason::NonzeroWinding),
                zeros,
            })
        }
        GroupSpec::RealLattice { step } => {
            let y = window.unwrap_or(PI / step);
            let mut n = n_points.max(16) + n_points % 2;
            loop {
                if n > MAX_GRID {
                    return Err(Error::NoConvergence);
                }
                let grid = sample_char_fn(mu, n, Some(y))?;
                if let Some(psi) = lift_window(&grid.values) {
                    return Ok(SecondCharacteristic {
                        grid,
                        psi: Some(psi),
                        winding: 0,
                        admissible: true,
                        failure_reason: None,
                        zeros,
                    });
                }
                n *= 2;
            }
        }
        GroupSpec::Cyclic { .. } => {
            let grid = sample_char_fn(mu, n_points, None)?;
            let psi = grid.values.iter().map(|v| v.ln()).collect();
            Ok(SecondCharacteristic {
                grid,
                psi: Some(psi),
                winding: 0,
                admissible: true,
                failure_reason: None,
                zeros,
            })
        }
    }
}

/// Unwraps outward from the middle sample; `None` if a step is unsafe.
fn lift_window(values: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = values.len();
    let mid = n / 2;
    let mut phase = vec![0.0; n];
    phase[mid] = values[mid].arg();
    for j in mid + 1..n {
        let s = (values[j] / values[j - 1]).arg();
        if s.abs() >= PHASE_STEP_LIMIT {
            return None;
        }
        phase[j] = phase[j - 1] + s;
    }
    for j in (0..mid).rev() {
        let s = (values[j] / values[j + 1]).arg();
        if s.abs() >= PHASE_STEP_LIMIT {
            return None;
        }
        phase[j] = phase[j + 1] + s;
    }
    Some(
        values
            .iter()
            .zip(phase)
            .map(|(v, p)| Complex64::new(v.norm().ln(), p))
            .collect(),
    )
}
