//! Scanning the divisibility set `Λ(μ)` and the necessary conditions on
//! `Λ^alg(μ)` for non-admissible measures.
//!
//! Admissible measures are scanned directly over a `t`-grid made of exact
//! rationals plus a uniform mesh. For non-admissible measures only
//! restrictions are available: the zero orders of `μ̂` give the lower bound
//! `t₀(μ) = max 1/k`, and a nonzero winding `w` confines `Λ^alg(μ)` to the
//! lattice `(1/|w|)ℕ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dual::{self, ZeroPoint, DEFAULT_GRID, ZERO_TOL};
use crate::error::{Error, Result};
use crate::fractional::{MembershipVerdict, PowerSynthesizer, Tolerances, Verdict};
use crate::measure::{convolve_power, GroupSpec, Measure, Rational};

/// Grid points closer than this are identified.
const GRID_EPS: f64 = 1e-12;

/// One `t` value of a scan, remembering its exact rational form if any.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub value: f64,
    pub rational: Option<Rational>,
}

impl GridPoint {
    pub fn exact(q: Rational) -> Self {
        GridPoint {
            value: q.value(),
            rational: Some(q),
        }
    }

    pub fn float(value: f64) -> Self {
        GridPoint {
            value,
            rational: None,
        }
    }

    pub fn is_integer(&self) -> bool {
        match self.rational {
            Some(q) => q.is_integer(),
            None => (self.value - self.value.round()).abs() < GRID_EPS,
        }
    }
}

/// Structure read off a scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureSummary {
    pub min_member: Option<f64>,
    /// Every grid point is a member (infinite divisibility at grid resolution).
    pub all_member: bool,
    /// Pairs of members whose in-grid sum was rejected. Always empty for a
    /// correct scan.
    pub semigroup_violations: Vec<(f64, f64)>,
    /// Smallest `λ` such that every grid point in `[λ, t_max]` is a member,
    /// provided that tail contains a non-integer point.
    pub tail_start: Option<f64>,
    pub inconclusive: Vec<f64>,
}

/// A sampled `Λ(μ)`.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaReport {
    pub t_grid: Vec<GridPoint>,
    pub verdicts: Vec<MembershipVerdict>,
    pub summary: StructureSummary,
}

impl LambdaReport {
    pub fn new(t_grid: Vec<GridPoint>, verdicts: Vec<MembershipVerdict>) -> Self {
        let summary = summarize_parts(&t_grid, &verdicts);
        LambdaReport {
            t_grid,
            verdicts,
            summary,
        }
    }

    /// Grid points with a `MEMBER` verdict.
    pub fn members(&self) -> Vec<GridPoint> {
        self.t_grid
            .iter()
            .zip(&self.verdicts)
            .filter(|(_, v)| v.verdict == Verdict::Member)
            .map(|(g, _)| *g)
            .collect()
    }
}

/// Rationals `m/n` with `n ≤ n_max` and `m/n ≤ t_max`, plus the mesh
/// `mesh, 2·mesh, …`, sorted. Mesh points coinciding with a rational are
/// replaced by the rational.
pub fn build_t_grid(t_max: f64, n_max: u64, mesh: f64) -> Result<Vec<GridPoint>> {
    if !(t_max.is_finite() && t_max >= 1.0) {
        return Err(Error::InvalidArgument(format!("t_max must be >= 1, got {t_max}")));
    }
    if !(1..=12).contains(&n_max) {
        return Err(Error::InvalidArgument(format!(
            "n_max must lie in 1..=12, got {n_max}"
        )));
    }
    if !(1e-3..=0.5).contains(&mesh) {
        return Err(Error::InvalidArgument(format!(
            "mesh must lie in [1e-3, 0.5], got {mesh}"
        )));
    }
    let mut grid: Vec<GridPoint> = Vec::new();
    for n in 1..=n_max {
        let m_max = (t_max * n as f64 + GRID_EPS).floor() as u64;
        for m in 1..=m_max {
            let q = Rational::new(m, n)?;
            if q.denom() == n {
                grid.push(GridPoint::exact(q));
            }
        }
    }
    let steps = (t_max / mesh + GRID_EPS).floor() as u64;
    for i in 1..=steps {
        let value = i as f64 * mesh;
        if !grid.iter().any(|g| (g.value - value).abs() < 1e-9) {
            grid.push(GridPoint::float(value));
        }
    }
    grid.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(grid)
}

/// Verdicts for every grid point of an admissible measure.
pub fn lambda_scan(mu: &Measure, t_max: f64, n_max: u64, mesh: f64) -> Result<LambdaReport> {
    let grid = build_t_grid(t_max, n_max, mesh)?;
    lambda_scan_grid(mu, grid, DEFAULT_GRID, Tolerances::default())
}

/// Scan over an explicit grid.
pub fn lambda_scan_grid(
    mu: &Measure,
    grid: Vec<GridPoint>,
    n_points: usize,
    tolerances: Tolerances,
) -> Result<LambdaReport> {
    let synth = PowerSynthesizer::new(mu, n_points, tolerances)?;
    let verdicts = grid
        .par_iter()
        .map(|g| synth.verdict(g.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(LambdaReport::new(grid, verdicts))
}

/// Recomputes the structure summary of a report.
pub fn summarize(report: &LambdaReport) -> StructureSummary {
    summarize_parts(&report.t_grid, &report.verdicts)
}

fn summarize_parts(grid: &[GridPoint], verdicts: &[MembershipVerdict]) -> StructureSummary {
    let is = |i: usize, v: Verdict| verdicts[i].verdict == v;
    let min_member = (0..grid.len())
        .find(|&i| is(i, Verdict::Member))
        .map(|i| grid[i].value);
    let all_member = !grid.is_empty() && (0..grid.len()).all(|i| is(i, Verdict::Member));
    let inconclusive = (0..grid.len())
        .filter(|&i| is(i, Verdict::Inconclusive))
        .map(|i| grid[i].value)
        .collect();

    let mut semigroup_violations = Vec::new();
    let members: Vec<usize> = (0..grid.len()).filter(|&i| is(i, Verdict::Member)).collect();
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a..] {
            let sum = grid[i].value + grid[j].value;
            let hit = grid
                .binary_search_by(|g| {
                    if (g.value - sum).abs() < 1e-9 {
                        std::cmp::Ordering::Equal
                    } else {
                        g.value.total_cmp(&sum)
                    }
                })
                .ok();
            if let Some(k) = hit {
                if is(k, Verdict::NonMember) {
                    semigroup_violations.push((grid[i].value, grid[j].value));
                }
            }
        }
    }

    let mut start = grid.len();
    while start > 0 && is(start - 1, Verdict::Member) {
        start -= 1;
    }
    let tail_start = (start < grid.len() && grid[start..].iter().any(|g| !g.is_integer()))
        .then(|| grid[start].value);

    StructureSummary {
        min_member,
        all_member,
        semigroup_violations,
        tail_start,
        inconclusive,
    }
}

/// `t₀(μ) = max over zeros of 1/k`, a lower bound of `Λ^alg(μ)`.
pub fn t0_lower_bound(mu: &Measure) -> Result<f64> {
    let zeros = dual::find_zeros(mu, ZERO_TOL)?;
    t0_from_zeros(&zeros)
}

pub fn t0_from_zeros(zeros: &[ZeroPoint]) -> Result<f64> {
    zeros
        .iter()
        .map(|z| 1.0 / z.order as f64)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
        .ok_or(Error::NoZeros)
}

/// Growth exponent of `|μ̂|` along one straight path into a zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathExponent {
    pub location: f64,
    /// +1 or −1: the path `s ↦ location + direction·s`.
    pub direction: i8,
    /// Least-squares slope of `log|μ̂|` against `log s`.
    pub exponent: f64,
    /// `1/exponent`: the threshold where `s^{-1}|μ̂|^t` stops blowing up.
    pub t0_estimate: f64,
}

/// Ladder of path parameters `s = 2^{-5}, …, 2^{-20}`.
pub fn limsup_ladder() -> Vec<f64> {
    (5..=20).map(|e| 2f64.powi(-e)).collect()
}

/// Direct sampling of `|μ̂(γ₀ ± s)|` along the ladder, as a cross-check of
/// [`t0_lower_bound`].
pub fn t0_limsup_diagnostic(mu: &Measure) -> Result<Vec<PathExponent>> {
    let zeros = dual::find_zeros(mu, ZERO_TOL)?;
    if zeros.is_empty() {
        return Err(Error::NoZeros);
    }
    let ladder = limsup_ladder();
    let mut out = Vec::new();
    for z in &zeros {
        for direction in [1i8, -1] {
            let pts: Vec<(f64, f64)> = ladder
                .iter()
                .map(|&s| {
                    let v = dual::char_fn(mu, z.location + direction as f64 * s).norm();
                    (s.ln(), v.max(f64::MIN_POSITIVE).ln())
                })
                .collect();
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let exponent = sxy / sxx;
            out.push(PathExponent {
                location: z.location,
                direction,
                exponent,
                t0_estimate: 1.0 / exponent,
            });
        }
    }
    Ok(out)
}

/// Restrictions on `Λ^alg(μ)` implied by the winding number `w` of a
/// zero-free `μ̂`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintSet {
    pub winding: i64,
    /// `w = 0`: no restriction.
    pub no_obstruction: bool,
    /// Divisors `n` of `|w|`: `Λ^alg ⊆ ⋃ (1/n)ℕ`.
    pub divisor_union: Vec<u64>,
    /// `|w|`: `Λ^alg ⊆ (1/|w|)ℕ`.
    pub intersection_lattice: Option<u64>,
    /// Denominator of the lower bound `1/|w|`.
    pub lower_bound_denominator: Option<u64>,
}

impl ConstraintSet {
    pub fn lower_bound(&self) -> Option<f64> {
        self.lower_bound_denominator.map(|d| 1.0 / d as f64)
    }
}

pub fn winding_constraints(w: i64) -> ConstraintSet {
    if w == 0 {
        return ConstraintSet {
            winding: 0,
            no_obstruction: true,
            divisor_union: Vec::new(),
            intersection_lattice: None,
            lower_bound_denominator: None,
        };
    }
    let a = w.unsigned_abs();
    ConstraintSet {
        winding: w,
        no_obstruction: false,
        divisor_union: (1..=a).filter(|d| a.is_multiple_of(*d)).collect(),
        intersection_lattice: Some(a),
        lower_bound_denominator: Some(a),
    }
}

/// Whether `q` survives the constraints, i.e. `q ∈ (1/|w|)ℕ`.
pub fn rational_in_constraints(q: Rational, c: &ConstraintSet) -> bool {
    match c.intersection_lattice {
        None => true,
        // m/n = j/|w| with gcd(m, n) = 1 forces n | |w|
        Some(a) => a % q.denom() == 0,
    }
}

/// Brute-force `Λ^alg(δ_w)` on the integers: the reduced `m/l` (with
/// `l ≤ l_max`, `m ≤ m_max`) for which some `δ_j`, `|j| ≤ j_max`, satisfies
/// `δ_j^{*l} = δ_w^{*m}`. On the integers a characteristic function of
/// modulus one is a character, so point masses exhaust the candidates.
pub fn point_mass_algebraic_members(
    w: i64,
    j_max: i64,
    l_max: u64,
    m_max: u64,
) -> Result<Vec<(Rational, i64)>> {
    let delta = |p: i64| Measure::dirac(GroupSpec::Integers, p);
    let base = delta(w)?;
    let mut found = Vec::new();
    for l in 1..=l_max {
        for m in 1..=m_max {
            let q = Rational::new(m, l)?;
            if q.denom() != l {
                continue;
            }
            let target = convolve_power(&base, m)?;
            for j in -j_max..=j_max {
                if convolve_power(&delta(j)?, l)? == target {
                    found.push((q, j));
                    break;
                }
            }
        }
    }
    found.sort();
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::convolve;

    fn z(atoms: &[(i64, f64)]) -> Measure {
        Measure::new(GroupSpec::Integers, atoms).unwrap()
    }

    fn cos_measure() -> Measure {
        Measure::new(GroupSpec::real_lattice(1.0).unwrap(), &[(1, 0.5), (-1, 0.5)]).unwrap()
    }

    #[test]
    fn grid_construction() {
        let g = build_t_grid(3.0, 8, 0.05).unwrap();
        assert!(g.windows(2).all(|w| w[0].value < w[1].value));
        for k in 1..=3 {
            assert!(g
                .iter()
                .any(|p| p.rational == Some(Rational::integer(k).unwrap())));
        }
        let half = g.iter().find(|p| (p.value - 0.5).abs() < 1e-12).unwrap();
        assert_eq!(half.rational, Some(Rational::new(1, 2).unwrap()));
        assert!(g.iter().all(|p| p.value > 0.0 && p.value <= 3.0 + 1e-12));
        assert!(build_t_grid(0.5, 8, 0.05).is_err());
        assert!(build_t_grid(3.0, 13, 0.05).is_err());
        assert!(build_t_grid(3.0, 8, 0.6).is_err());
    }

    #[test]
    fn poisson_scan_is_all_member() {
        let p = Measure::truncated_poisson(0.7).unwrap();
        let r = lambda_scan(&p, 3.0, 4, 0.25).unwrap();
        assert!(r.summary.all_member);
        assert_eq!(r.summary.tail_start, Some(r.t_grid[0].value));
        assert_eq!(r.summary.min_member, Some(r.t_grid[0].value));
    }

    #[test]
    fn two_point_measure_is_minimally_divisible() {
        let m = z(&[(0, 0.7), (1, 0.3)]);
        let r = lambda_scan(&m, 3.0, 6, 0.1).unwrap();
        for (g, v) in r.t_grid.iter().zip(&r.verdicts) {
            let expect = if g.is_integer() {
                Verdict::Member
            } else {
                Verdict::NonMember
            };
            assert_eq!(v.verdict, expect, "t = {}", g.value);
        }
        let s = &r.summary;
        assert_eq!(s.min_member, Some(1.0));
        assert!(!s.all_member);
        assert_eq!(s.tail_start, None);
        assert!(s.semigroup_violations.is_empty());
    }

    #[test]
    fn point_mass_at_origin_scans_all_member() {
        let r = lambda_scan(&z(&[(0, 1.0)]), 2.0, 3, 0.5).unwrap();
        assert!(r.summary.all_member);
    }

    #[test]
    fn fault_injection_is_detected() {
        let p = Measure::truncated_poisson(0.7).unwrap();
        let mut r = lambda_scan(&p, 2.0, 2, 0.5).unwrap();
        let i = r.t_grid.iter().position(|g| g.value == 2.0).unwrap();
        r.verdicts[i].verdict = Verdict::NonMember;
        let s = summarize(&r);
        assert!(s.semigroup_violations.contains(&(1.0, 1.0)));
        assert!(!s.all_member);
    }

    #[test]
    fn scan_requires_admissibility() {
        assert!(matches!(
            lambda_scan(&z(&[(1, 1.0)]), 2.0, 2, 0.5),
            Err(Error::NotAdmissible)
        ));
    }

    #[test]
    fn t0_examples() {
        assert!((t0_lower_bound(&cos_measure()).unwrap() - 1.0).abs() < 1e-12);
        let sq = convolve(&cos_measure(), &cos_measure()).unwrap();
        assert!((t0_lower_bound(&sq).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(t0_lower_bound(&z(&[(0, 1.0)])), Err(Error::NoZeros));
    }

    #[test]
    fn limsup_cross_check_matches_orders() {
        for (mu, t0) in [
            (cos_measure(), 1.0),
            (convolve(&cos_measure(), &cos_measure()).unwrap(), 0.5),
        ] {
            let paths = t0_limsup_diagnostic(&mu).unwrap();
            assert_eq!(paths.len(), 4);
            for p in paths {
                assert!((p.t0_estimate - t0).abs() < 0.02, "{p:?}");
            }
        }
    }

    #[test]
    fn winding_constraint_examples() {
        let c = winding_constraints(3);
        assert_eq!(c.divisor_union, vec![1, 3]);
        assert_eq!(c.intersection_lattice, Some(3));
        assert_eq!(c.lower_bound(), Some(1.0 / 3.0));
        let c0 = winding_constraints(0);
        assert!(c0.no_obstruction);
        assert_eq!(c0.lower_bound(), None);
        let c1 = winding_constraints(-1);
        assert_eq!(c1.divisor_union, vec![1]);
        assert_eq!(c1.lower_bound(), Some(1.0));

        let q = |m, n| Rational::new(m, n).unwrap();
        assert!(rational_in_constraints(q(2, 3), &c));
        assert!(!rational_in_constraints(q(1, 2), &c));
        assert!(rational_in_constraints(q(5, 1), &c0));
    }

    /// Set-algebra oracle: q = m/l reduced is allowed by the winding `w`
    /// iff there is an integer `z'` with `l·z' = m·w` (the homotopy image
    /// of the root scales by `l`, that of `μ̂^m` by `m`).
    #[test]
    fn constraint_lattice_matches_homotopy_equation() {
        for w in [1i64, 2, 3, 4, 6, -3] {
            let c = winding_constraints(w);
            for l in 1..=12u64 {
                for m in 1..=24u64 {
                    let q = Rational::new(m, l).unwrap();
                    if q.denom() != l {
                        continue;
                    }
                    let solvable = (m as i64 * w) % l as i64 == 0;
                    assert_eq!(rational_in_constraints(q, &c), solvable, "w={w} q={q}");
                }
            }
        }
    }

    #[test]
    fn point_mass_brute_force_for_unit_winding() {
        let found = point_mass_algebraic_members(1, 50, 12, 36).unwrap();
        assert!(found.iter().all(|(q, _)| q.is_integer()));
        assert_eq!(found.len(), 36);
    }
}
