//! Fractional convolution powers `e^{tψ}` and the membership test
//! "is `e^{tψ}` a characteristic function".
//!
//! On the integers the coefficients of `e^{tψ}` are generally infinitely
//! supported; they are recovered by an inverse discrete transform on a
//! circle grid that is doubled until the most negative coefficient is
//! stable, which pushes the aliased tail below the stability tolerance.
//! The result is a three-way verdict: coefficients above `−neg_tol` are
//! accepted, coefficients below `−strict_tol` (at two consecutive grids)
//! reject, anything in between is reported as inconclusive.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::dual::{self, CircleLift, DEFAULT_GRID, MAX_GRID, ZERO_TOL};
use crate::error::{Error, Result};
use crate::measure::{table_distance, GroupSpec, Measure};

/// Numerical tolerances of the membership decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Coefficients down to `−neg_tol` count as zero.
    pub neg_tol: f64,
    /// Coefficients below `−strict_tol` reject.
    pub strict_tol: f64,
    /// Largest accepted `|Σ c_k − 1|`.
    pub mass_tol: f64,
    /// Grid doubling stops once the minimum coefficient moves less than this.
    pub stability_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            neg_tol: 1e-9,
            strict_tol: 1e-7,
            mass_tol: 1e-9,
            stability_tol: 1e-11,
        }
    }
}

/// Coefficients below this magnitude are not listed in candidate tables.
pub const COEFFICIENT_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Member,
    NonMember,
    Inconclusive,
}

/// Signed coefficient table of a candidate `e^{tψ}` (point → real weight).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CoefficientTable(pub BTreeMap<i64, f64>);

impl CoefficientTable {
    pub fn get(&self, point: i64) -> f64 {
        self.0.get(&point).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.0.values().sum()
    }

    /// Convolution of two tables (no modular reduction).
    pub fn convolve(&self, other: &CoefficientTable) -> CoefficientTable {
        let mut out = BTreeMap::new();
        for (&a, &wa) in &self.0 {
            for (&b, &wb) in &other.0 {
                *out.entry(a + b).or_insert(0.0) += wa * wb;
            }
        }
        CoefficientTable(out)
    }

    /// Convolution modulo `order`.
    pub fn convolve_mod(&self, other: &CoefficientTable, order: u64) -> CoefficientTable {
        let mut out = BTreeMap::new();
        for (&a, &wa) in &self.0 {
            for (&b, &wb) in &other.0 {
                *out.entry((a + b).rem_euclid(order as i64)).or_insert(0.0) += wa * wb;
            }
        }
        CoefficientTable(out)
    }

    /// `½ Σ |a(x) − b(x)|`.
    pub fn distance(&self, other: &CoefficientTable) -> f64 {
        table_distance(&self.0, &other.0)
    }

    pub fn distance_to(&self, mu: &Measure) -> f64 {
        table_distance(&self.0, mu.atoms())
    }
}

/// Decision for "`e^{tψ}` is a characteristic function" at one `t`.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipVerdict {
    pub t: f64,
    pub verdict: Verdict,
    pub min_coefficient: f64,
    /// Support point carrying `min_coefficient`.
    pub min_point: i64,
    /// Largest imaginary part among the coefficients (nonzero only for
    /// non-Hermitian branch choices on cyclic groups).
    pub max_imaginary: f64,
    pub mass_defect: f64,
    pub grid_used: usize,
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub candidate: Option<CoefficientTable>,
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        self.verdict == Verdict::Member
    }
}

/// Raw coefficients of one inverse transform.
#[derive(Debug, Clone)]
pub(crate) struct Coefficients {
    /// `(point, value)` for every grid frequency.
    pub entries: Vec<(i64, Complex64)>,
}

impl Coefficients {
    fn min_real(&self) -> (f64, i64) {
        self.entries
            .iter()
            .map(|(k, c)| (c.re, *k))
            .fold((f64::INFINITY, 0), |acc, x| if x.0 < acc.0 { x } else { acc })
    }

    fn max_imaginary(&self) -> f64 {
        self.entries
            .iter()
            .map(|(_, c)| c.im.abs())
            .fold(0.0, f64::max)
    }

    /// How far the table is from being a nonnegative real measure.
    fn violation(&self) -> f64 {
        (-self.min_real().0).max(self.max_imaginary())
    }

    fn mass_defect(&self) -> f64 {
        (self.entries.iter().map(|e| e.1).sum::<Complex64>() - 1.0).norm()
    }

    fn table(&self) -> CoefficientTable {
        CoefficientTable(
            self.entries
                .iter()
                .filter(|(_, c)| c.re.abs() > COEFFICIENT_FLOOR)
                .map(|(k, c)| (*k, c.re))
                .collect(),
        )
    }
}

/// Exact inverse DFT on `Z_N` of the values `e^{t·log_j}`.
pub(crate) fn cyclic_power_coefficients(logs: &[Complex64], t: f64) -> Coefficients {
    let n = logs.len() as u64;
    let values: Vec<Complex64> = logs.iter().map(|l| (l * t).exp()).collect();
    let entries = (0..n)
        .map(|x| {
            let c: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let r = (x * j as u64) % n;
                    v * Complex64::from_polar(1.0, -TAU * r as f64 / n as f64)
                })
                .sum();
            (x as i64, c / n as f64)
        })
        .collect();
    Coefficients { entries }
}

/// Classifies a single exact transform (no refinement available).
pub(crate) fn classify_exact(
    t: f64,
    coeffs: &Coefficients,
    tol: &Tolerances,
) -> MembershipVerdict {
    let violation = coeffs.violation();
    let mass_defect = coeffs.mass_defect();
    let verdict = if violation <= tol.neg_tol && mass_defect <= tol.mass_tol {
        Verdict::Member
    } else if violation > tol.strict_tol {
        Verdict::NonMember
    } else {
        Verdict::Inconclusive
    };
    let (min_coefficient, min_point) = coeffs.min_real();
    MembershipVerdict {
        t,
        verdict,
        min_coefficient,
        min_point,
        max_imaginary: coeffs.max_imaginary(),
        mass_defect,
        grid_used: coeffs.entries.len(),
        tolerances: *tol,
        candidate: Some(coeffs.table()),
    }
}

/// Fractional powers of one admissible measure, reusing the unwrapped
/// logarithm across many `t`.
pub struct PowerSynthesizer {
    measure: Measure,
    tolerances: Tolerances,
    mode: Mode,
}

enum Mode {
    Circle {
        base_grid: usize,
        lifts: Mutex<Vec<Arc<CircleLift>>>,
    },
    Cyclic {
        logs: Vec<Complex64>,
    },
}

impl PowerSynthesizer {
    /// Prepares `mu`, failing with `NotAdmissible` when no second
    /// characteristic exists.
    pub fn new(mu: &Measure, n_points: usize, tolerances: Tolerances) -> Result<Self> {
        let mode = match mu.group() {
            GroupSpec::Integers | GroupSpec::RealLattice { .. } => {
                if !dual::find_zeros(mu, ZERO_TOL)?.is_empty() {
                    return Err(Error::NotAdmissible);
                }
                let circle = mu.on_integers();
                let lift = dual::lift_circle(&circle, n_points)?;
                if lift.winding != 0 {
                    return Err(match mu.group() {
                        GroupSpec::Integers => Error::NotAdmissible,
                        _ => Error::UnsupportedGroup(
                            "second characteristic is not periodic in the lattice dual; \
                             powers are not lattice-supported"
                                .into(),
                        ),
                    });
                }
                Mode::Circle {
                    base_grid: lift.points.len(),
                    lifts: Mutex::new(vec![Arc::new(lift)]),
                }
            }
            GroupSpec::Cyclic { order } => {
                let logs: Vec<Complex64> = (0..order)
                    .map(|j| dual::cyclic_value(mu, order, j))
                    .collect();
                if logs.iter().any(|v| v.norm() <= ZERO_TOL) {
                    return Err(Error::NotAdmissible);
                }
                Mode::Cyclic {
                    logs: logs.iter().map(|v| v.ln()).collect(),
                }
            }
        };
        Ok(PowerSynthesizer {
            measure: mu.clone(),
            tolerances,
            mode,
        })
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    fn lift(&self, level: usize) -> Result<Arc<CircleLift>> {
        let Mode::Circle { lifts, .. } = &self.mode else {
            unreachable!("lift requested for cyclic measure")
        };
        let mut cache = lifts.lock().expect("lift cache poisoned");
        while cache.len() <= level {
            let next = 2 * cache.last().expect("seeded").points.len();
            if next > MAX_GRID {
                return Err(Error::NoConvergence);
            }
            let lift = dual::lift_circle(&self.measure.on_integers(), next)?;
            cache.push(Arc::new(lift));
        }
        Ok(cache[level].clone())
    }

    fn circle_coefficients(&self, level: usize, t: f64) -> Result<Coefficients> {
        let lift = self.lift(level)?;
        let n = lift.psi.len();
        let mut buf: Vec<Complex64> = lift.psi.iter().map(|p| (p * t).exp()).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let half = (n / 2) as i64;
        let entries = buf
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                let k = k as i64;
                (if k >= half { k - n as i64 } else { k }, c / n as f64)
            })
            .collect();
        Ok(Coefficients { entries })
    }

    /// Verdict for `e^{tψ}`.
    pub fn verdict(&self, t: f64) -> Result<MembershipVerdict> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
        }
        let tol = &self.tolerances;
        match &self.mode {
            Mode::Cyclic { logs } => Ok(classify_exact(
                t,
                &cyclic_power_coefficients(logs, t),
                tol,
            )),
            Mode::Circle { base_grid, .. } => {
                let mut level = 0;
                let mut prev = self.circle_coefficients(level, t)?;
                let (last, converged) = loop {
                    if (base_grid << (level + 1)) > MAX_GRID {
                        break (prev.clone(), false);
                    }
                    level += 1;
                    let cur = self.circle_coefficients(level, t)?;
                    if (cur.min_real().0 - prev.min_real().0).abs() < tol.stability_tol {
                        break (cur, true);
                    }
                    prev = cur;
                };
                let violation = last.violation();
                let mass_defect = last.mass_defect();
                let verdict = if converged
                    && violation <= tol.neg_tol
                    && mass_defect <= tol.mass_tol
                {
                    Verdict::Member
                } else if violation > tol.strict_tol && prev.violation() > tol.strict_tol {
                    Verdict::NonMember
                } else {
                    Verdict::Inconclusive
                };
                let (min_coefficient, min_point) = last.min_real();
                Ok(MembershipVerdict {
                    t,
                    verdict,
                    min_coefficient,
                    min_point,
                    max_imaginary: last.max_imaginary(),
                    mass_defect,
                    grid_used: last.entries.len(),
                    tolerances: *tol,
                    candidate: Some(last.table()),
                })
            }
        }
    }
}

/// Membership verdict for `e^{tψ}` with default tolerances, starting from a
/// grid of `n_points`.
pub fn fractional_power(mu: &Measure, t: f64, n_points: usize) -> Result<MembershipVerdict> {
    PowerSynthesizer::new(mu, n_points, Tolerances::default())?.verdict(t)
}

/// `true` iff `t` is a member; an inconclusive verdict is an error.
pub fn is_member(mu: &Measure, t: f64) -> Result<bool> {
    let v = fractional_power(mu, t, DEFAULT_GRID)?;
    verdict_to_bool(&v)
}

pub(crate) fn verdict_to_bool(v: &MembershipVerdict) -> Result<bool> {
    match v.verdict {
        Verdict::Member => Ok(true),
        Verdict::NonMember => Ok(false),
        Verdict::Inconclusive => Err(Error::Inconclusive {
            t: v.t,
            min_coefficient: v.min_coefficient,
            grid_used: v.grid_used,
        }),
    }
}

/// The unique `n`-th convolution root of an admissible measure.
#[derive(Debug, Clone)]
pub struct NthRoot {
    pub root: Measure,
    /// Mass removed by clipping tiny negative coefficients.
    pub clipped_mass: f64,
    pub grid_used: usize,
}

/// Coefficients of `e^{ψ/n}` with tiny negatives (≥ `−neg_tol`) clipped to
/// zero and the mass renormalized.
pub fn nth_root_admissible(mu: &Measure, n: u64) -> Result<NthRoot> {
    if n == 0 {
        return Err(Error::InvalidArgument("root order must be at least 1".into()));
    }
    let synth = PowerSynthesizer::new(mu, DEFAULT_GRID, Tolerances::default())?;
    let v = synth.verdict(1.0 / n as f64)?;
    if !verdict_to_bool(&v)? {
        return Err(Error::NotAMember { t: v.t });
    }
    let table = v.candidate.expect("verdict carries candidate");
    let mut clipped_mass = 0.0;
    let mut atoms = BTreeMap::new();
    for (k, c) in table.0 {
        if c > 0.0 {
            atoms.insert(k, c);
        } else {
            clipped_mass += -c;
        }
    }
    let total: f64 = atoms.values().sum();
    for w in atoms.values_mut() {
        *w /= total;
    }
    Ok(NthRoot {
        root: Measure::from_table_unchecked(mu.group(), atoms),
        clipped_mass,
        grid_used: v.grid_used,
    })
}
