//! Exact divisibility on `Z_N`, where the dual group is discrete and the
//! logarithm of `μ̂` is only determined up to a branch per character.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::dual::{cyclic_value, ZERO_TOL};
use crate::error::{Error, Result};
use crate::fractional::{classify_exact, cyclic_power_coefficients, Tolerances};
use crate::measure::{convolve_power, total_variation, GroupSpec, Measure, Rational};
use crate::scan::{GridPoint, LambdaReport};

/// Default bound on branch shifts in branch scans.
pub const DEFAULT_K_MAX: i64 = 6;
/// Weights down to this are accepted (and clipped) in root candidates.
pub const ROOT_NEG_TOL: f64 = 1e-9;
// Round-off level of an exact length-N inverse transform.
const TRANSFORM_NOISE: f64 = 1e-14;
/// Largest `N` for the exhaustive root search.
pub const MAX_ROOT_ORDER: u64 = 8;
/// Largest root degree for the exhaustive root search.
pub const MAX_ROOT_DEGREE: u64 = 6;

fn order_of(mu: &Measure) -> Result<u64> {
    match mu.group() {
        GroupSpec::Cyclic { order } => Ok(order),
        _ => Err(Error::WrongGroup),
    }
}

/// DFT `μ̂(χ_j) = Σ_x w_x e^{2πi x j/N}`, `j = 0..N`.
pub fn cyclic_char_fn(mu: &Measure) -> Result<Vec<Complex64>> {
    let order = order_of(mu)?;
    Ok((0..order).map(|j| cyclic_value(mu, order, j)).collect())
}

/// Inverse of [`cyclic_char_fn`]: `w_x = (1/N) Σ_j v_j e^{−2πi x j/N}`.
pub fn cyclic_inverse(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len() as u64;
    (0..n)
        .map(|x| {
            values
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -TAU * ((x * j as u64) % n) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

/// Weight `β` of the unique `n`-th root `βδ₀ + (1−β)δ₁` of
/// `αδ₀ + (1−α)δ₁` on `Z_2`, or `None` when `2α − 1 < 0` and `n` is even.
pub fn z2_nth_root(alpha: f64, n: u64) -> Option<f64> {
    let s = 2.0 * alpha - 1.0;
    if n == 0 || (s < 0.0 && n.is_multiple_of(2)) {
        return None;
    }
    Some((1.0 + s.signum() * s.abs().powf(1.0 / n as f64)) / 2.0)
}

/// All `n`-th convolution roots found by the phase search.
#[derive(Debug, Clone, Serialize)]
pub struct RootSet {
    pub n: u64,
    #[serde(skip)]
    pub roots: Vec<Measure>,
    pub exhaustive: bool,
    pub candidates_examined: usize,
}

/// Enumerates every Hermitian choice of `n`-th roots of the DFT values,
/// inverse transforms, and keeps the nonnegative ones.
pub fn cyclic_nth_roots(mu: &Measure, n: u64) -> Result<RootSet> {
    let order = order_of(mu)?;
    if order > MAX_ROOT_ORDER || n > MAX_ROOT_DEGREE {
        return Err(Error::SearchTooLarge(format!(
            "root search needs N <= {MAX_ROOT_ORDER} and n <= {MAX_ROOT_DEGREE}, got N = {order}, n = {n}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("root degree must be at least 1".into()));
    }
    let values = cyclic_char_fn(mu)?;
    let nf = n as f64;
    // Free characters j with j <= N − j; their partners are conjugates.
    let free: Vec<usize> = (1..=(order as usize) / 2).collect();
    let options: Vec<Vec<Complex64>> = free
        .iter()
        .map(|&j| {
            let v = values[j];
            if v.norm() <= ZERO_TOL {
                return vec![Complex64::new(0.0, 0.0)];
            }
            if 2 * j == order as usize {
                let r = v.re.abs().powf(1.0 / nf);
                match (v.re > 0.0, n.is_multiple_of(2)) {
                    (true, true) => vec![Complex64::new(r, 0.0), Complex64::new(-r, 0.0)],
                    (true, false) => vec![Complex64::new(r, 0.0)],
                    (false, false) => vec![Complex64::new(-r, 0.0)],
                    (false, true) => Vec::new(),
                }
            } else {
                let (modulus, arg) = v.to_polar();
                (0..n)
                    .map(|l| {
                        Complex64::from_polar(modulus.powf(1.0 / nf), (arg + TAU * l as f64) / nf)
                    })
                    .collect()
            }
        })
        .collect();

    let mut roots: Vec<Measure> = Vec::new();
    let mut examined = 0;
    if options.iter().all(|o| !o.is_empty()) {
        let mut choice = vec![0usize; free.len()];
        loop {
            examined += 1;
            let mut spectrum = vec![Complex64::new(1.0, 0.0); order as usize];
            for (slot, &j) in free.iter().enumerate() {
                let r = options[slot][choice[slot]];
                spectrum[j] = r;
                spectrum[order as usize - j] = r.conj();
            }
            if let Some(nu) = candidate_measure(&spectrum, mu.group())? {
                let back = convolve_power(&nu, n)?;
                if total_variation(&back, mu)? <= 1e-9
                    && !roots
                        .iter()
                        .any(|r| total_variation(r, &nu).is_ok_and(|d| d < 1e-12))
                {
                    roots.push(nu);
                }
            }
            // odometer
            let mut slot = 0;
            loop {
                if slot == choice.len() {
                    return Ok(RootSet {
                        n,
                        roots,
                        exhaustive: true,
                        candidates_examined: examined,
                    });
                }
                choice[slot] += 1;
                if choice[slot] < options[slot].len() {
                    break;
                }
                choice[slot] = 0;
                slot += 1;
            }
        }
    }
    Ok(RootSet {
        n,
        roots,
        exhaustive: true,
        candidates_examined: examined,
    })
}

fn candidate_measure(spectrum: &[Complex64], group: GroupSpec) -> Result<Option<Measure>> {
    let weights = cyclic_inverse(spectrum);
    if weights
        .iter()
        .any(|w| w.re < -ROOT_NEG_TOL || w.im.abs() > ROOT_NEG_TOL)
    {
        return Ok(None);
    }
    let atoms: Vec<(i64, f64)> = weights
        .iter()
        .enumerate()
        .filter(|(_, w)| w.re > TRANSFORM_NOISE)
        .map(|(x, w)| (x as i64, w.re))
        .collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let atoms: Vec<(i64, f64)> = atoms.into_iter().map(|(x, w)| (x, w / total)).collect();
    Ok(Some(Measure::new(group, &atoms)?))
}

/// Both readings of "`q ∈ Λ^alg(δ₁)` on `Z_N`".
#[derive(Debug, Clone, Serialize)]
pub struct Delta1Membership {
    pub modulus: u64,
    pub q: Rational,
    /// Some `ν` on `Z_N` has `ν̂^l = δ̂₁^m`, decided by exhaustive search.
    pub brute: bool,
    /// The closed-form rule `m ≡ l (mod N)`.
    pub congruence_rule: bool,
    /// `j` with `δ_j^{*l} = δ₁^{*m}` when `brute` holds.
    pub witness: Option<i64>,
}

impl Delta1Membership {
    pub fn discrepancy(&self) -> bool {
        self.brute != self.congruence_rule
    }
}

/// Decides `q = m/l ∈ Λ^alg(δ₁)` on `Z_N`. A characteristic function of
/// modulus one on `Z_N` is a character, so roots are point masses `δ_j`
/// and the search runs over `j ∈ 0..N`.
pub fn delta1_membership(modulus: u64, q: Rational) -> Result<Delta1Membership> {
    if !(2..=50).contains(&modulus) || q.denom() > 50 {
        return Err(Error::SearchTooLarge(format!(
            "delta1 membership needs 2 <= N <= 50 and l <= 50, got N = {modulus}, q = {q}"
        )));
    }
    let group = GroupSpec::cyclic(modulus)?;
    let (m, l) = (q.numer(), q.denom());
    let target = convolve_power(&Measure::dirac(group, 1)?, m)?;
    let mut witness = None;
    for j in 0..modulus as i64 {
        if convolve_power(&Measure::dirac(group, j)?, l)? == target {
            witness = Some(j);
            break;
        }
    }
    Ok(Delta1Membership {
        modulus,
        q,
        brute: witness.is_some(),
        congruence_rule: m % modulus == l % modulus,
        witness,
    })
}

/// Branch shifts `k: Ẑ_N → ℤ` with `k[0] = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchAssignment {
    k: Vec<i64>,
}

impl BranchAssignment {
    pub fn new(k: Vec<i64>, k_max: i64) -> Result<Self> {
        if k.first() != Some(&0) {
            return Err(Error::InvalidArgument(
                "branch assignment must vanish at the trivial character".into(),
            ));
        }
        if let Some(bad) = k.iter().find(|x| x.abs() > k_max) {
            return Err(Error::InvalidArgument(format!(
                "branch shift {bad} exceeds k_max = {k_max}"
            )));
        }
        Ok(BranchAssignment { k })
    }

    /// The principal branch on `Z_N`.
    pub fn principal(order: u64) -> Self {
        BranchAssignment {
            k: vec![0; order as usize],
        }
    }

    pub fn shifts(&self) -> &[i64] {
        &self.k
    }
}

/// `ψ_k(χ_j) = Log μ̂(χ_j) + 2πi·k[j]`.
pub fn branch_logarithm(mu: &Measure, k: &BranchAssignment) -> Result<Vec<Complex64>> {
    let values = cyclic_char_fn(mu)?;
    if k.k.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "branch assignment has {} entries for a group of order {}",
            k.k.len(),
            values.len()
        )));
    }
    values
        .iter()
        .zip(&k.k)
        .enumerate()
        .map(|(j, (v, &shift))| {
            if v.norm() <= ZERO_TOL {
                Err(Error::ZeroCharacterValue { index: j })
            } else {
                Ok(v.ln() + Complex64::new(0.0, TAU * shift as f64))
            }
        })
        .collect()
}

/// Membership of each grid point in `Λ_k(μ)`, by exact inverse transform
/// of `e^{tψ_k}`.
pub fn lambda_k_scan(
    mu: &Measure,
    k: &BranchAssignment,
    t_grid: &[GridPoint],
) -> Result<LambdaReport> {
    let logs = branch_logarithm(mu, k)?;
    let tol = Tolerances::default();
    let verdicts = t_grid
        .iter()
        .map(|g| classify_exact(g.value, &cyclic_power_coefficients(&logs, g.value), &tol))
        .collect();
    Ok(LambdaReport::new(t_grid.to_vec(), verdicts))
}

/// Union over branches of the `Λ_k` memberships; entry `i` lists the
/// indices of the branches accepting `t_grid[i]`.
pub fn branch_union(
    mu: &Measure,
    branches: &[BranchAssignment],
    t_grid: &[GridPoint],
) -> Result<Vec<Vec<usize>>> {
    let mut hits = vec![Vec::new(); t_grid.len()];
    for (b, k) in branches.iter().enumerate() {
        let report = lambda_k_scan(mu, k, t_grid)?;
        for (i, v) in report.verdicts.iter().enumerate() {
            if v.is_member() {
                hits[i].push(b);
            }
        }
    }
    Ok(hits)
}
