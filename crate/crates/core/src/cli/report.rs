//! Report documents emitted by the command-line tool.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cli::spec::MeasureSpec;
use crate::cyclic::{self, Delta1Membership, RootSet};
use crate::dual::{self, FailureReason, SecondCharacteristic, ZeroPoint, ORDER_TOL, ZERO_TOL};
use crate::error::{Error, Result};
use crate::fractional::{self, Tolerances, Verdict};
use crate::measure::{convolve, convolve_power, total_variation, GroupSpec, Measure, Rational};
use crate::scan::{self, ConstraintSet, LambdaReport, PathExponent, StructureSummary};

#[derive(Debug, Clone, Serialize)]
pub struct ToleranceReport {
    pub zero_tol: f64,
    pub order_tol: f64,
    pub neg_tol: f64,
    pub strict_tol: f64,
    pub mass_tol: f64,
    pub stability_tol: f64,
    pub phase_step_limit: f64,
}

impl Default for ToleranceReport {
    fn default() -> Self {
        let t = Tolerances::default();
        ToleranceReport {
            zero_tol: ZERO_TOL,
            order_tol: ORDER_TOL,
            neg_tol: t.neg_tol,
            strict_tol: t.strict_tol,
            mass_tol: t.mass_tol,
            stability_tol: t.stability_tol,
            phase_step_limit: dual::PHASE_STEP_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PsiSummary {
    pub grid_size: usize,
    pub reconstruction_error: f64,
    pub psi_at_origin: [f64; 2],
    pub min_real_part: f64,
    /// Total increment of `Im ψ` across the sampled grid.
    pub imaginary_span: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilitySection {
    pub admissible: bool,
    pub failure_reason: Option<FailureReason>,
    pub zeros: Vec<ZeroPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winding: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<PsiSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaPoint {
    pub t: f64,
    pub exact: Option<String>,
    pub verdict: Verdict,
    pub min_coefficient: f64,
    pub min_point: i64,
    pub max_imaginary: f64,
    pub mass_defect: f64,
    pub grid_used: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<Vec<i64>>,
    pub t_max: f64,
    pub n_max: u64,
    pub mesh: f64,
    pub points: Vec<LambdaPoint>,
    pub summary: StructureSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct T0Section {
    pub t0: f64,
    pub zero_orders: Vec<u32>,
    /// Slopes of `log|μ̂|` along `γ₀ ± s`, `s = 2^{-5..-20}`.
    pub limsup_paths: Vec<PathExponent>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winding: Option<ConstraintSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<T0Section>,
    pub statement: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RootsSection {
    pub n: u64,
    pub method: &'static str,
    pub roots: Vec<MeasureSpec>,
    pub exhaustive: bool,
    pub reconstruction_tv: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clipped_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates_examined: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Z2Row {
    pub n: u64,
    pub closed_form_beta: Option<f64>,
    pub search_betas: Vec<f64>,
    pub agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Z2Section {
    pub alpha: f64,
    pub second_value: f64,
    pub infinitely_divisible: bool,
    pub rows: Vec<Z2Row>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CyclicSection {
    pub order: u64,
    pub dft: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z2: Option<Z2Section>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindingSection {
    pub winding: i64,
    pub constraints: ConstraintSet,
    pub statement: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Delta1Section {
    pub modulus: u64,
    pub q: String,
    pub brute: bool,
    pub congruence_rule: bool,
    pub witness: Option<i64>,
    pub discrepancy: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfCheck {
    pub seed: u64,
    pub samples: usize,
    /// `max |(μ*μ)^(θ) − μ̂(θ)²|` over random dual points.
    pub max_homomorphism_error: f64,
    /// `max (|μ̂(θ)| − 1)⁺` over the same points.
    pub max_modulus_excess: f64,
}

/// The single document written by every command.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    pub tolerances: ToleranceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admissibility: Option<AdmissibilitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winding: Option<WindingSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roots: Option<RootsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cyclic: Option<CyclicSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z2: Option<Z2Section>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta1: Option<Delta1Section>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub self_check: Option<SelfCheck>,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    pub fn new(command: &str, measure: Option<&Measure>) -> Self {
        AnalysisReport {
            command: command.to_string(),
            measure: measure.map(MeasureSpec::from_measure),
            tolerances: ToleranceReport::default(),
            admissibility: None,
            winding: None,
            lambda: None,
            constraints: None,
            roots: None,
            cyclic: None,
            z2: None,
            delta1: None,
            self_check: None,
            notes: Vec::new(),
        }
    }
}

/// Options shared by the report builders.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub t_max: f64,
    pub n_max: u64,
    pub mesh: f64,
    pub grid: usize,
    pub window: Option<f64>,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            t_max: 3.0,
            n_max: 8,
            mesh: 0.05,
            grid: dual::DEFAULT_GRID,
            window: None,
            seed: 0,
        }
    }
}

pub fn admissibility_section(mu: &Measure, sc: &SecondCharacteristic) -> AdmissibilitySection {
    let psi = sc.psi.as_ref().map(|psi| {
        let origin = sc.psi_at_origin().unwrap_or_default();
        let (lo, hi) = psi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.im), hi.max(p.im))
        });
        PsiSummary {
            grid_size: psi.len(),
            reconstruction_error: sc.reconstruction_error().unwrap_or(0.0),
            psi_at_origin: [origin.re, origin.im],
            min_real_part: psi.iter().map(|p| p.re).fold(f64::INFINITY, f64::min),
            imaginary_span: hi - lo,
        }
    });
    AdmissibilitySection {
        admissible: sc.admissible,
        failure_reason: sc.failure_reason,
        zeros: sc.zeros.clone(),
        winding: (mu.group() == GroupSpec::Integers && sc.zeros.is_empty()).then_some(sc.winding),
        psi,
    }
}

pub fn lambda_section(
    report: &LambdaReport,
    opts: &ScanOptions,
    branch: Option<Vec<i64>>,
) -> LambdaSection {
    LambdaSection {
        branch,
        t_max: opts.t_max,
        n_max: opts.n_max,
        mesh: opts.mesh,
        points: report
            .t_grid
            .iter()
            .zip(&report.verdicts)
            .map(|(g, v)| LambdaPoint {
                t: g.value,
                exact: g.rational.map(|q| q.to_string()),
                verdict: v.verdict,
                min_coefficient: v.min_coefficient,
                min_point: v.min_point,
                max_imaginary: v.max_imaginary,
                mass_defect: v.mass_defect,
                grid_used: v.grid_used,
            })
            .collect(),
        summary: report.summary.clone(),
    }
}

fn reciprocal_label(d: u64) -> String {
    if d == 1 {
        "1".into()
    } else {
        format!("1/{d}")
    }
}

pub fn t0_section(mu: &Measure, zeros: &[ZeroPoint]) -> Result<(T0Section, String)> {
    let t0 = scan::t0_from_zeros(zeros)?;
    let max_order = zeros.iter().map(|z| z.order).min().unwrap_or(1);
    let section = T0Section {
        t0,
        zero_orders: zeros.iter().map(|z| z.order).collect(),
        limsup_paths: scan::t0_limsup_diagnostic(mu)?,
    };
    let statement = format!(
        "Λ^alg(μ) ⊆ ℚ∩[{},∞)",
        reciprocal_label(max_order as u64)
    );
    Ok((section, statement))
}

pub fn winding_statement(c: &ConstraintSet) -> String {
    match c.intersection_lattice {
        None => "no winding obstruction".into(),
        Some(1) => "Λ^alg(μ) ⊆ ℕ".into(),
        Some(a) => format!("Λ^alg(μ) ⊆ (1/{a})ℕ, bounded below by 1/{a}"),
    }
}

pub fn constraints_section(
    mu: &Measure,
    sc: &SecondCharacteristic,
    notes: &mut Vec<String>,
) -> Result<Option<ConstraintsSection>> {
    match sc.failure_reason {
        Some(FailureReason::HasZeros) => {
            if let GroupSpec::Cyclic { .. } = mu.group() {
                notes.push(
                    "characteristic function vanishes at a character; the dual group is \
                     discrete, so no path-based lower bound applies"
                        .into(),
                );
                return Ok(None);
            }
            let (t0, statement) = t0_section(mu, &sc.zeros)?;
            Ok(Some(ConstraintsSection {
                winding: None,
                t0: Some(t0),
                statement,
            }))
        }
        Some(FailureReason::NonzeroWinding) => {
            let c = scan::winding_constraints(sc.winding);
            Ok(Some(ConstraintsSection {
                statement: winding_statement(&c),
                winding: Some(c),
                t0: None,
            }))
        }
        None => Ok(None),
    }
}

pub fn roots_section(
    mu: &Measure,
    sc: &SecondCharacteristic,
    n: u64,
) -> Result<RootsSection> {
    if n == 0 {
        return Err(Error::InvalidArgument("--n must be at least 1".into()));
    }
    if let GroupSpec::Cyclic { order } = mu.group() {
        let rs: RootSet = cyclic::cyclic_nth_roots(mu, n)?;
        let obstruction = if order == 2 && rs.roots.is_empty() {
            Some(format!(
                "μ̂(1) = 2α−1 = {} < 0 has no real root of even degree {n}; roots exist only for odd n",
                mu.weight(0) * 2.0 - 1.0
            ))
        } else {
            None
        };
        return Ok(RootsSection {
            n,
            method: "phase_search",
            reconstruction_tv: rs
                .roots
                .iter()
                .map(|r| total_variation(&convolve_power(r, n)?, mu))
                .collect::<Result<_>>()?,
            roots: rs.roots.iter().map(MeasureSpec::from_measure).collect(),
            exhaustive: rs.exhaustive,
            clipped_mass: None,
            candidates_examined: Some(rs.candidates_examined),
            obstruction,
        });
    }
    if let (GroupSpec::Integers, [(&w, _)]) = (mu.group(), &mu.atoms().iter().collect::<Vec<_>>()[..]) {
        // A root of a point mass is a point mass.
        let n_i = n as i64;
        let roots = if w % n_i == 0 {
            vec![Measure::dirac(GroupSpec::Integers, w / n_i)?]
        } else {
            Vec::new()
        };
        return Ok(RootsSection {
            n,
            method: "point_mass",
            obstruction: roots
                .is_empty()
                .then(|| format!("{n} does not divide the winding number {w}")),
            reconstruction_tv: vec![0.0; roots.len()],
            roots: roots.iter().map(MeasureSpec::from_measure).collect(),
            exhaustive: true,
            clipped_mass: None,
            candidates_examined: None,
        });
    }
    let empty = |obstruction: String| RootsSection {
        n,
        method: "constraint",
        roots: Vec::new(),
        exhaustive: true,
        reconstruction_tv: Vec::new(),
        clipped_mass: None,
        candidates_examined: None,
        obstruction: Some(obstruction),
    };
    match sc.failure_reason {
        None => match fractional::nth_root_admissible(mu, n) {
            Ok(root) => Ok(RootsSection {
                n,
                method: "admissible_root",
                reconstruction_tv: vec![total_variation(&convolve_power(&root.root, n)?, mu)?],
                roots: vec![MeasureSpec::from_measure(&root.root)],
                exhaustive: true,
                clipped_mass: Some(root.clipped_mass),
                candidates_examined: None,
                obstruction: None,
            }),
            Err(Error::NotAMember { .. }) => Ok(RootsSection {
                method: "admissible_root",
                ..empty(format!(
                    "1/{n} is not in Λ(μ): e^{{ψ/{n}}} has negative coefficients, and an \
                     admissible measure has at most this one candidate root"
                ))
            }),
            Err(e) => Err(e),
        },
        Some(FailureReason::HasZeros) => {
            let t0 = scan::t0_from_zeros(&sc.zeros)?;
            if 1.0 / (n as f64) < t0 {
                Ok(empty(format!("1/{n} lies below the lower bound t₀(μ) = {t0}")))
            } else {
                Err(Error::NotAdmissible)
            }
        }
        Some(FailureReason::NonzeroWinding) => {
            let c = scan::winding_constraints(sc.winding);
            if !scan::rational_in_constraints(Rational::new(1, n)?, &c) {
                Ok(empty(format!(
                    "{n} does not divide the winding number {}",
                    sc.winding
                )))
            } else {
                Err(Error::NotAdmissible)
            }
        }
    }
}

pub fn z2_section(alpha: f64, ns: &[u64]) -> Result<Z2Section> {
    let mu = Measure::new(GroupSpec::cyclic(2)?, &[(0, alpha), (1, 1.0 - alpha)])?;
    let rows = ns
        .iter()
        .map(|&n| {
            let closed = cyclic::z2_nth_root(alpha, n);
            let search = cyclic::cyclic_nth_roots(&mu, n)?;
            let betas: Vec<f64> = search.roots.iter().map(|r| r.weight(0)).collect();
            let agree = match closed {
                Some(b) => betas.len() == 1 && (betas[0] - b).abs() < 1e-12,
                None => betas.is_empty(),
            };
            Ok(Z2Row {
                n,
                closed_form_beta: closed,
                search_betas: betas,
                agree,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Z2Section {
        alpha,
        second_value: 2.0 * alpha - 1.0,
        infinitely_divisible: alpha >= 0.5,
        rows,
    })
}

pub fn cyclic_section(mu: &Measure) -> Result<CyclicSection> {
    let GroupSpec::Cyclic { order } = mu.group() else {
        return Err(Error::WrongGroup);
    };
    let dft = cyclic::cyclic_char_fn(mu)?
        .into_iter()
        .map(|v| [v.re, v.im])
        .collect();
    let z2 = if order == 2 {
        Some(z2_section(mu.weight(0), &[1, 2, 3, 4, 5, 6])?)
    } else {
        None
    };
    Ok(CyclicSection { order, dft, z2 })
}

pub fn delta1_section(d: &Delta1Membership) -> Delta1Section {
    let (m, l) = (d.q.numer(), d.q.denom());
    let note = d.discrepancy().then(|| match d.witness {
        Some(j) => format!(
            "exhaustive search finds δ_{j}^{{*{l}}} = δ_1^{{*{m}}} on Z_{}, contradicting the \
             congruence rule m ≡ l (mod N)",
            d.modulus
        ),
        None => format!(
            "the congruence rule m ≡ l (mod N) accepts {} but no root exists on Z_{}",
            d.q, d.modulus
        ),
    });
    Delta1Section {
        modulus: d.modulus,
        q: d.q.to_string(),
        brute: d.brute,
        congruence_rule: d.congruence_rule,
        witness: d.witness,
        discrepancy: d.discrepancy(),
        note,
    }
}

pub fn self_check(mu: &Measure, seed: u64) -> Result<SelfCheck> {
    const SAMPLES: usize = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let square = convolve(mu, mu)?;
    let period = std::f64::consts::TAU / mu.group().point_scale();
    let (mut hom, mut excess) = (0.0f64, 0.0f64);
    for _ in 0..SAMPLES {
        let theta = rng.gen_range(0.0..period);
        let v = dual::char_fn(mu, theta);
        hom = hom.max((dual::char_fn(&square, theta) - v * v).norm());
        excess = excess.max(v.norm() - 1.0);
    }
    Ok(SelfCheck {
        seed,
        samples: SAMPLES,
        max_homomorphism_error: hom,
        max_modulus_excess: excess.max(0.0),
    })
}
