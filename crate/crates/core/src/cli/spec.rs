//! JSON measure specifications.
//!
//! ```json
//! {"group":{"kind":"Z_mod","n":2},"atoms":[{"point":0,"weight":0.3},{"point":1,"weight":0.7}]}
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cli::json::to_canonical_json;
use crate::measure::{GroupSpec, Measure, MASS_RENORMALIZE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    #[serde(rename = "Z")]
    Integers,
    #[serde(rename = "Z_mod")]
    Cyclic,
    #[serde(rename = "R_lattice")]
    RealLattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupObject {
    pub kind: GroupKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub point: i64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub group: GroupObject,
    pub atoms: Vec<AtomSpec>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid measure spec: {}", .0.join("; "))]
    Validation(Vec<String>),
}

/// Parses and validates a spec, reporting every violation found.
pub fn parse_spec(text: &[u8]) -> Result<MeasureSpec, SpecError> {
    let spec: MeasureSpec = serde_json::from_slice(text).map_err(|e| {
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        let message = e.to_string();
        SpecError::Parse {
            line: e.line(),
            column: e.column(),
            message: message.strip_suffix(&suffix).unwrap_or(&message).to_string(),
        }
    })?;
    let problems = spec.violations();
    if problems.is_empty() {
        Ok(spec)
    } else {
        Err(SpecError::Validation(problems))
    }
}

/// Canonical JSON for a spec; [`parse_spec`] inverts it exactly.
pub fn emit_spec(spec: &MeasureSpec) -> String {
    to_canonical_json(spec)
}

impl MeasureSpec {
    pub fn from_measure(mu: &Measure) -> Self {
        let group = match mu.group() {
            GroupSpec::Integers => GroupObject {
                kind: GroupKind::Integers,
                n: None,
                step: None,
            },
            GroupSpec::Cyclic { order } => GroupObject {
                kind: GroupKind::Cyclic,
                n: Some(order),
                step: None,
            },
            GroupSpec::RealLattice { step } => GroupObject {
                kind: GroupKind::RealLattice,
                n: None,
                step: Some(step),
            },
        };
        MeasureSpec {
            group,
            atoms: mu
                .atoms()
                .iter()
                .map(|(&point, &weight)| AtomSpec { point, weight })
                .collect(),
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let g = &self.group;
        match g.kind {
            GroupKind::Integers => {}
            GroupKind::Cyclic => match g.n {
                None => out.push("group.n: required for kind Z_mod".into()),
                Some(n) if n < 2 => out.push(format!("group.n: order must be >= 2, got {n}")),
                _ => {}
            },
            GroupKind::RealLattice => match g.step {
                None => out.push("group.step: required for kind R_lattice".into()),
                Some(h) if !(h.is_finite() && h > 0.0) => {
                    out.push(format!("group.step: must be positive and finite, got {h}"))
                }
                _ => {}
            },
        }
        if g.kind != GroupKind::Cyclic && g.n.is_some() {
            out.push("group.n: only allowed for kind Z_mod".into());
        }
        if g.kind != GroupKind::RealLattice && g.step.is_some() {
            out.push("group.step: only allowed for kind R_lattice".into());
        }
        if self.atoms.is_empty() {
            out.push("atoms: at least one atom is required".into());
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if !a.weight.is_finite() || a.weight < 0.0 {
                out.push(format!(
                    "atoms[{i}].weight: must be nonnegative, got {}",
                    a.weight
                ));
            }
            if let (GroupKind::Cyclic, Some(n)) = (g.kind, g.n) {
                if a.point < 0 || a.point as u64 >= n {
                    out.push(format!(
                        "atoms[{i}].point: {} outside 0..{n}",
                        a.point
                    ));
                }
            }
        }
        let total: f64 = self.atoms.iter().map(|a| a.weight).sum();
        if !self.atoms.is_empty() && (total - 1.0).abs() > MASS_RENORMALIZE_TOL {
            out.push(format!("atoms: total mass {total} deviates from 1"));
        }
        out
    }

    pub fn to_measure(&self) -> crate::Result<Measure> {
        let group = match self.group.kind {
            GroupKind::Integers => GroupSpec::Integers,
            GroupKind::Cyclic => GroupSpec::cyclic(self.group.n.unwrap_or(0))?,
            GroupKind::RealLattice => GroupSpec::real_lattice(self.group.step.unwrap_or(0.0))?,
        };
        let atoms: Vec<(i64, f64)> = self.atoms.iter().map(|a| (a.point, a.weight)).collect();
        Measure::new(group, &atoms)
    }
}
