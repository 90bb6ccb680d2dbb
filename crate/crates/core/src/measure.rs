//! Groups and finitely supported probability measures on them.
//!
//! A [`Measure`] is a finite table of point masses tagged with the group it
//! lives on. For [`GroupSpec::RealLattice`] the stored points are integer
//! multipliers of the lattice step, so every group shares the same integer
//! support representation and the same convolution code.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest deviation of the total mass from 1 that is silently renormalized.
pub const MASS_RENORMALIZE_TOL: f64 = 1e-9;

/// The group a measure lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum GroupSpec {
    /// The integers, with dual group the circle.
    Integers,
    /// The cyclic group of the given order (at least 2).
    Cyclic { order: u64 },
    /// The lattice `step * Z` inside the real line, with dual group the real line.
    RealLattice { step: f64 },
}

impl GroupSpec {
    pub fn cyclic(order: u64) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidGroup(format!(
                "cyclic order must be at least 2, got {order}"
            )));
        }
        Ok(GroupSpec::Cyclic { order })
    }

    pub fn real_lattice(step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGroup(format!(
                "lattice step must be positive and finite, got {step}"
            )));
        }
        Ok(GroupSpec::RealLattice { step })
    }

    /// Factor converting a support point into its coordinate in the group
    /// (1 except on real lattices).
    pub fn point_scale(&self) -> f64 {
        match *self {
            GroupSpec::RealLattice { step } => step,
            _ => 1.0,
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Integers => write!(f, "Z"),
            GroupSpec::Cyclic { order } => write!(f, "Z_{order}"),
            GroupSpec::RealLattice { step } => write!(f, "{step}Z in R"),
        }
    }
}

/// A finitely supported probability measure.
///
/// Invariants: weights are positive, sum to 1 within 1e-12, and cyclic
/// support points lie in `0..order`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    group: GroupSpec,
    atoms: BTreeMap<i64, f64>,
}

impl Measure {
    /// Validates and builds a measure. Duplicate points are merged; a total
    /// mass within [`MASS_RENORMALIZE_TOL`] of 1 is renormalized.
    pub fn new(group: GroupSpec, atoms: &[(i64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut merged: BTreeMap<i64, f64> = BTreeMap::new();
        for (index, &(point, weight)) in atoms.iter().enumerate() {
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::NegativeWeight {
                    index,
                    point,
                    weight,
                });
            }
            if let GroupSpec::Cyclic { order } = group {
                if point < 0 || point as u64 >= order {
                    return Err(Error::PointOutOfRange { point, order });
                }
            }
            *merged.entry(point).or_insert(0.0) += weight;
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > MASS_RENORMALIZE_TOL {
            return Err(Error::MassNotOne { total });
        }
        merged.retain(|_, w| *w > 0.0);
        for w in merged.values_mut() {
            *w /= total;
        }
        Ok(Measure {
            group,
            atoms: merged,
        })
    }

    /// Point mass at `point`.
    pub fn dirac(group: GroupSpec, point: i64) -> Result<Self> {
        Measure::new(group, &[(point, 1.0)])
    }

    /// Poisson distribution on the integers, truncated once the terms fall
    /// below 1e-22 and renormalized.
    pub fn truncated_poisson(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Poisson rate must be positive, got {rate}"
            )));
        }
        let mut atoms = Vec::new();
        let mut term = (-rate).exp();
        let mut k = 0i64;
        loop {
            atoms.push((k, term));
            k += 1;
            term *= rate / k as f64;
            if (k as f64) > rate && term < 1e-22 {
                break;
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        for a in atoms.iter_mut() {
            a.1 /= total;
        }
        Measure::new(GroupSpec::Integers, &atoms)
    }

    /// Builds a measure from an already normalized table without validation.
    pub(crate) fn from_table_unchecked(group: GroupSpec, atoms: BTreeMap<i64, f64>) -> Self {
        Measure { group, atoms }
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn atoms(&self) -> &BTreeMap<i64, f64> {
        &self.atoms
    }

    pub fn weight(&self, point: i64) -> f64 {
        self.atoms.get(&point).copied().unwrap_or(0.0)
    }

    /// Largest absolute support point: the degree of the characteristic
    /// function as a trigonometric polynomial.
    pub fn degree(&self) -> u64 {
        self.atoms
            .keys()
            .map(|p| p.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.values().sum()
    }

    /// The same weights viewed as a measure on the integers.
    pub fn on_integers(&self) -> Measure {
        Measure {
            group: GroupSpec::Integers,
            atoms: self.atoms.clone(),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, w) in &self.atoms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{w}·δ{p}")?;
        }
        write!(f, " on {}", self.group)
    }
}

/// Convenience alias mirroring [`Measure::new`].
pub fn make_measure(group: GroupSpec, atoms: &[(i64, f64)]) -> Result<Measure> {
    Measure::new(group, atoms)
}

fn check_same_group(a: &Measure, b: &Measure) -> Result<()> {
    if a.group != b.group {
        return Err(Error::GroupMismatch);
    }
    Ok(())
}

/// Convolution of two measures on the same group.
pub fn convolve(a: &Measure, b: &Measure) -> Result<Measure> {
    check_same_group(a, b)?;
    let mut out: BTreeMap<i64, f64> = BTreeMap::new();
    for (&pa, &wa) in &a.atoms {
        for (&pb, &wb) in &b.atoms {
            let mut p = pa.checked_add(pb).ok_or(Error::Overflow)?;
            if let GroupSpec::Cyclic { order } = a.group {
                p = p.rem_euclid(order as i64);
            }
            *out.entry(p).or_insert(0.0) += wa * wb;
        }
    }
    out.retain(|_, w| *w > 0.0);
    Ok(Measure {
        group: a.group,
        atoms: out,
    })
}

/// `n`-fold self-convolution by repeated squaring.
pub fn convolve_power(a: &Measure, n: u64) -> Result<Measure> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "convolution power must be at least 1".into(),
        ));
    }
    let mut result: Option<Measure> = None;
    let mut base = a.clone();
    let mut e = n;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => convolve(&r, &base)?,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = convolve(&base, &base)?;
    }
    Ok(result.expect("n >= 1"))
}

/// Total variation distance `½ Σ |a(x) − b(x)|`.
pub fn total_variation(a: &Measure, b: &Measure) -> Result<f64> {
    check_same_group(a, b)?;
    Ok(table_distance(&a.atoms, &b.atoms))
}

/// `½ Σ |a(x) − b(x)|` for arbitrary signed tables.
pub(crate) fn table_distance(a: &BTreeMap<i64, f64>, b: &BTreeMap<i64, f64>) -> f64 {
    let mut sum = 0.0;
    for (p, wa) in a {
        sum += (wa - b.get(p).copied().unwrap_or(0.0)).abs();
    }
    for (p, wb) in b {
        if !a.contains_key(p) {
            sum += wb.abs();
        }
    }
    0.5 * sum
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// A positive rational `m/n` stored in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Rational {
    numer: u64,
    denom: u64,
}

impl Rational {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if numer == 0 || denom == 0 {
            return Err(Error::InvalidArgument(format!(
                "rational {numer}/{denom} must have positive numerator and denominator"
            )));
        }
        let g = gcd(numer, denom);
        Ok(Rational {
            numer: numer / g,
            denom: denom / g,
        })
    }

    pub fn integer(n: u64) -> Result<Self> {
        Rational::new(n, 1)
    }

    pub fn numer(&self) -> u64 {
        self.numer
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn value(&self) -> f64 {
        self.numer as f64 / self.denom as f64
    }

    pub fn is_integer(&self) -> bool {
        self.denom == 1
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom == 1 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/{}", self.numer, self.denom)
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse rational {s:?}"));
        match s.split_once('/') {
            Some((m, n)) => Rational::new(
                m.trim().parse().map_err(|_| bad())?,
                n.trim().parse().map_err(|_| bad())?,
            ),
            None => Rational::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }
}
