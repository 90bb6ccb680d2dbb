//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::{Duration, Instant};

use partdiv::cli::report;
use partdiv::cyclic::{self, BranchAssignment};
use partdiv::dual;
use partdiv::fractional::{self, PowerSynthesizer, Tolerances, Verdict};
use partdiv::scan::{self, GridPoint};
use partdiv::{convolve, convolve_power, total_variation, GroupSpec, Measure, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if $cond {
        } else {
            return Err(format!($($fmt)*));
        }
    };
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn z(atoms: &[(i64, f64)]) -> Measure {
    Measure::new(GroupSpec::Integers, atoms).unwrap()
}

fn z2(alpha: f64) -> Measure {
    Measure::new(GroupSpec::cyclic(2).unwrap(), &[(0, alpha), (1, 1.0 - alpha)]).unwrap()
}

fn rational_grid(l_max: u64, t_max: u64) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for l in 1..=l_max {
        for m in 1..=l * t_max {
            let q = Rational::new(m, l).unwrap();
            if q.denom() == l {
                out.push(GridPoint::exact(q));
            }
        }
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    out
}

/// `c_k(t)` of `(0.7 + 0.3z)^t` from the binomial series.
fn binomial_oracle(t: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let mut binom = 1.0;
    for i in 0..k {
        binom *= (t - i as f64) / (i + 1) as f64;
    }
    0.7f64.powf(t) * binom * (0.3f64 / 0.7).powi(k as i32)
}

/// A random measure on `{0, ..., support-1}` with `min |μ̂| ≥ floor` and
/// winding zero.
fn random_admissible(rng: &mut ChaCha8Rng, support: i64, floor: f64) -> Measure {
    loop {
        let atoms: Vec<(i64, f64)> = (0..support).map(|p| (p, rng.gen_range(0.0..1.0))).collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let atoms: Vec<(i64, f64)> = atoms.iter().map(|&(p, w)| (p, w / total)).collect();
        let mu = z(&atoms);
        let min_modulus = (0..2048)
            .map(|i| dual::char_fn(&mu, TAU * i as f64 / 2048.0).norm())
            .fold(f64::INFINITY, f64::min);
        if min_modulus >= floor && dual::winding_number(&mu).ok() == Some(0) {
            return mu;
        }
    }
}

fn random_zero_free(rng: &mut ChaCha8Rng) -> Measure {
    loop {
        let n = rng.gen_range(1..=4);
        let atoms: Vec<(i64, f64)> = (0..n)
            .map(|_| (rng.gen_range(-3..=3), rng.gen_range(0.05..1.0)))
            .collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let atoms: Vec<(i64, f64)> = atoms.iter().map(|&(p, w)| (p, w / total)).collect();
        let mu = z(&atoms);
        if dual::find_zeros(&mu, dual::ZERO_TOL).map(|v| v.is_empty()).unwrap_or(false) {
            return mu;
        }
    }
}

fn z2_dichotomy() -> Check {
    for n in 1..=6u64 {
        let rs = cyclic::cyclic_nth_roots(&z2(0.3), n).map_err(e)?;
        if n % 2 == 1 {
            let beta = (1.0 - 0.4f64.powf(1.0 / n as f64)) / 2.0;
            let closed = cyclic::z2_nth_root(0.3, n).ok_or("closed form missing")?;
            ensure!((closed - beta).abs() <= 1e-12, "n={n}: closed form {closed} vs {beta}");
            ensure!(rs.roots.len() == 1, "n={n}: {} roots", rs.roots.len());
            let found = rs.roots[0].weight(0);
            ensure!((found - beta).abs() <= 1e-12, "n={n}: search {found} vs {beta}");
        } else {
            ensure!(rs.roots.is_empty() && rs.exhaustive, "n={n}: expected empty exhaustive set");
        }
    }
    Ok("odd n match the closed form, even n empty".into())
}

fn winding_contrast() -> Check {
    for n in -3..=3 {
        let d = Measure::dirac(GroupSpec::Integers, n).map_err(e)?;
        let w = dual::winding_number(&d).map_err(e)?;
        ensure!(w == n, "winding of δ_{n} = {w}");
        let sc = dual::second_characteristic(&d, dual::DEFAULT_GRID, None).map_err(e)?;
        ensure!(sc.admissible == (n == 0), "δ_{n} admissible = {}", sc.admissible);
    }
    let lat = Measure::dirac(GroupSpec::real_lattice(1.0).map_err(e)?, 1).map_err(e)?;
    let sc = dual::second_characteristic(&lat, dual::DEFAULT_GRID, None).map_err(e)?;
    ensure!(sc.admissible, "lattice δ_1 not admissible");
    Ok("δ_n winds n times; lattice δ_1 admissible".into())
}

fn cos_example() -> Check {
    let mu = z(&[(-1, 0.5), (1, 0.5)]);
    let zeros = dual::find_zeros(&mu, dual::ZERO_TOL).map_err(e)?;
    let z0 = zeros
        .iter()
        .find(|z| (z.location - FRAC_PI_2).abs() <= 1e-9)
        .ok_or("no zero at π/2")?;
    ensure!(z0.order == 1, "order {}", z0.order);
    let t0 = scan::t0_lower_bound(&mu).map_err(e)?;
    ensure!((t0 - 1.0).abs() <= 1e-9, "t0 = {t0}");
    let sc = dual::second_characteristic(&mu, dual::DEFAULT_GRID, None).map_err(e)?;
    let mut notes = Vec::new();
    let c = report::constraints_section(&mu, &sc, &mut notes)
        .map_err(e)?
        .ok_or("no constraints section")?;
    ensure!(c.statement == "Λ^alg(μ) ⊆ ℚ∩[1,∞)", "statement {:?}", c.statement);
    let sq = convolve(&mu, &mu).map_err(e)?;
    let zeros = dual::find_zeros(&sq, dual::ZERO_TOL).map_err(e)?;
    ensure!(!zeros.is_empty() && zeros.iter().all(|z| z.order == 2), "square orders {:?}", zeros);
    let t0 = scan::t0_lower_bound(&sq).map_err(e)?;
    ensure!((t0 - 0.5).abs() <= 1e-9, "square t0 = {t0}");
    Ok("zero at π/2 of order 1, t0 = 1; square t0 = 1/2".into())
}

fn minimally_divisible() -> Check {
    let mu = z(&[(0, 0.7), (1, 0.3)]);
    let rep = scan::lambda_scan(&mu, 3.0, 8, 0.05).map_err(e)?;
    let mut checked = 0;
    for (g, v) in rep.t_grid.iter().zip(&rep.verdicts) {
        let Some(q) = g.rational else { continue };
        match v.verdict {
            Verdict::Member => ensure!(q.is_integer(), "{q} marked MEMBER"),
            Verdict::NonMember => {
                ensure!(!q.is_integer(), "{q} marked NON_MEMBER");
                let oracle = binomial_oracle(g.value, v.min_point);
                ensure!(
                    oracle < 0.0 && v.min_coefficient < 0.0,
                    "{q}: oracle {oracle} at {} vs {}",
                    v.min_point,
                    v.min_coefficient
                );
                checked += 1;
            }
            Verdict::Inconclusive => return Err(format!("{q} inconclusive")),
        }
    }
    let half = fractional::fractional_power(&mu, 0.5, dual::DEFAULT_GRID).map_err(e)?;
    let c2 = half.candidate.as_ref().ok_or("no candidate")?.get(2);
    let oracle = binomial_oracle(0.5, 2);
    ensure!((c2 - oracle).abs() <= 1e-6, "c2(1/2) = {c2}, oracle {oracle}");
    Ok(format!("integers only; {checked} rejections agree with the series; c2(1/2) = {c2:.6}"))
}

fn infinitely_divisible() -> Check {
    let rate = 0.7;
    let mu = Measure::truncated_poisson(rate).map_err(e)?;
    let rep = scan::lambda_scan(&mu, 3.0, 8, 0.05).map_err(e)?;
    let mut worst = 0.0f64;
    for v in &rep.verdicts {
        ensure!(v.verdict == Verdict::Member, "t = {} is {:?}", v.t, v.verdict);
        let table = v.candidate.as_ref().ok_or("no candidate")?;
        let lt = rate * v.t;
        let mut pk = (-lt).exp();
        for k in 0..=10 {
            worst = worst.max((table.get(k) - pk).abs());
            pk *= lt / (k + 1) as f64;
        }
    }
    ensure!(worst <= 1e-9, "coefficient error {worst:e}");
    Ok(format!("{} points all MEMBER, max coefficient error {worst:.1e}", rep.verdicts.len()))
}

fn root_reconstruction() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let support = rng.gen_range(2..=5);
        let nu = random_admissible(&mut rng, support, 0.2);
        for n in [2u64, 3] {
            let mu = convolve_power(&nu, n).map_err(e)?;
            let root = fractional::nth_root_admissible(&mu, n).map_err(e)?;
            let tv = total_variation(&convolve_power(&root.root, n).map_err(e)?, &mu).map_err(e)?;
            worst = worst.max(tv);
        }
    }
    ensure!(worst <= 1e-7, "reconstruction TV {worst:e}");
    Ok(format!("40 roots, max TV {worst:.1e}"))
}

fn winding_soundness() -> Check {
    for w in 1..=3i64 {
        let members = scan::point_mass_algebraic_members(w, 50, 12, 12).map_err(e)?;
        let c = scan::winding_constraints(w);
        for (q, j) in &members {
            ensure!(scan::rational_in_constraints(*q, &c), "w={w}: {q} via δ_{j} escapes (1/{w})ℕ");
        }
        let bound = Rational::new(1, w as u64).map_err(e)?;
        ensure!(members.iter().any(|(q, _)| *q == bound), "w={w}: 1/{w} not attained");
        ensure!(c.lower_bound() == Some(bound.value()), "w={w}: lower bound {:?}", c.lower_bound());
    }
    Ok("all brute-force members lie in (1/w)ℕ; 1/w attained".into())
}

fn branch_family() -> Check {
    let mu = z2(0.3);
    let grid = rational_grid(9, 3);
    let branches: Vec<BranchAssignment> = (0..=4)
        .map(|k| BranchAssignment::new(vec![0, k], cyclic::DEFAULT_K_MAX))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let hits = cyclic::branch_union(&mu, &branches, &grid).map_err(e)?;
    for (g, h) in grid.iter().zip(&hits) {
        let q = g.rational.unwrap();
        ensure!(!h.is_empty() == (q.denom() % 2 == 1), "{q}: branches {h:?}");
    }
    let member = |q: Rational| grid.iter().zip(&hits).any(|(g, h)| g.rational == Some(q) && !h.is_empty());
    for k in 0..=4u64 {
        ensure!(member(Rational::new(1, 2 * k + 1).map_err(e)?), "1/{} missing", 2 * k + 1);
    }
    // 8/15 = 1/3 + 1/5 has denominator 15, outside the grid
    let q = Rational::new(8, 15).map_err(e)?;
    let wide = [GridPoint::exact(q)];
    let k7 = BranchAssignment::new(vec![0, 7], 7).map_err(e)?;
    let rep = cyclic::lambda_k_scan(&mu, &k7, &wide).map_err(e)?;
    ensure!(rep.verdicts[0].is_member(), "8/15 rejected on branch 7");
    Ok(format!("union over k ≤ 4 is {{m/l : l odd}} on {} points; 8/15 in Λ_7", grid.len()))
}

fn property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let trials = 100;
    let mut failures = Vec::new();

    for i in 0..trials {
        let a = random_zero_free(&mut rng);
        let b = random_zero_free(&mut rng);
        let ab = convolve(&a, &b).map_err(e)?;
        let theta = rng.gen_range(0.0..TAU);
        let err = (dual::char_fn(&ab, theta) - dual::char_fn(&a, theta) * dual::char_fn(&b, theta)).norm();
        if err > 1e-12 {
            failures.push(format!("homomorphism #{i}: {err:e}"));
        }
        let (wa, wb, wab) = (
            dual::winding_number(&a).map_err(e)?,
            dual::winding_number(&b).map_err(e)?,
            dual::winding_number(&ab).map_err(e)?,
        );
        if wab != wa + wb {
            failures.push(format!("winding #{i}: {wab} != {wa} + {wb}"));
        }
        let sc = dual::second_characteristic(&a, dual::DEFAULT_GRID, None).map_err(e)?;
        if let Some(r) = sc.reconstruction_error() {
            if r > 1e-9 {
                failures.push(format!("lifting #{i}: {r:e}"));
            }
        }
    }

    let ts = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0];
    let tol = Tolerances::default();
    for i in 0..trials {
        let support = rng.gen_range(2..=4);
        let mu = random_admissible(&mut rng, support, 0.05);
        let synth = PowerSynthesizer::new(&mu, dual::DEFAULT_GRID, tol).map_err(e)?;
        let fine = PowerSynthesizer::new(&mu, 2 * dual::DEFAULT_GRID, tol).map_err(e)?;
        let mut verdicts = Vec::new();
        for &t in &ts {
            let v = synth.verdict(t).map_err(e)?;
            let w = fine.verdict(t).map_err(e)?;
            let flip = matches!(
                (v.verdict, w.verdict),
                (Verdict::Member, Verdict::NonMember) | (Verdict::NonMember, Verdict::Member)
            );
            if flip {
                failures.push(format!("grid doubling #{i}, t={t}: {:?} vs {:?}", v.verdict, w.verdict));
            }
            verdicts.push(v);
        }
        for (x, vs) in verdicts.iter().enumerate() {
            for (y, vt) in verdicts.iter().enumerate().skip(x) {
                let Some(z) = ts.iter().position(|&t| (t - ts[x] - ts[y]).abs() < 1e-12) else {
                    continue;
                };
                if !(vs.is_member() && vt.is_member()) {
                    continue;
                }
                let sum = &verdicts[z];
                if sum.verdict == Verdict::NonMember {
                    failures.push(format!("semigroup #{i}: {} + {} rejected", ts[x], ts[y]));
                    continue;
                }
                let (cs, ct, cz) = (
                    vs.candidate.as_ref().unwrap(),
                    vt.candidate.as_ref().unwrap(),
                    sum.candidate.as_ref().unwrap(),
                );
                let d = cs.convolve(ct).distance(cz);
                if d > 1e-8 {
                    failures.push(format!("semigroup #{i}: {} + {} off by {d:e}", ts[x], ts[y]));
                }
            }
        }
    }

    ensure!(failures.is_empty(), "{} failures, first: {}", failures.len(), failures[0]);
    Ok(format!("{trials} measures per suite, no failures"))
}

fn delta1_discrepancy() -> Check {
    let d = cyclic::delta1_membership(3, Rational::new(1, 2).map_err(e)?).map_err(e)?;
    ensure!(d.brute, "brute search found no root");
    ensure!(d.witness == Some(2), "witness {:?}", d.witness);
    let two = Measure::dirac(GroupSpec::cyclic(3).map_err(e)?, 2).map_err(e)?;
    let one = Measure::dirac(GroupSpec::cyclic(3).map_err(e)?, 1).map_err(e)?;
    ensure!(convolve_power(&two, 2).map_err(e)? == one, "δ_2 * δ_2 != δ_1");
    let section = report::delta1_section(&d);
    ensure!(section.discrepancy && section.note.is_some(), "divergence not flagged");
    Ok("δ_2 * δ_2 = δ_1 on Z_3; congruence rule disagrees and is flagged".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Z2 dichotomy", Duration::from_secs(1), z2_dichotomy),
        ("winding of point masses", Duration::from_secs(1), winding_contrast),
        ("zeros and lower bound of the cos measure", Duration::from_secs(1), cos_example),
        ("minimally divisible detection", Duration::from_secs(30), minimally_divisible),
        ("infinitely divisible control", Duration::from_secs(30), infinitely_divisible),
        ("root reconstruction", Duration::from_secs(60), root_reconstruction),
        ("winding constraint soundness", Duration::from_secs(10), winding_soundness),
        ("Z2 branch family", Duration::from_secs(10), branch_family),
        ("property suites", Duration::from_secs(300), property_suites),
        ("delta1 discrepancy", Duration::from_secs(1), delta1_discrepancy),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(msg) if elapsed > *limit => Err(format!("{msg}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match result {
            Ok(msg) => println!("PASS {:>2} {name} ({elapsed:.2?}): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({elapsed:.2?}): {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
