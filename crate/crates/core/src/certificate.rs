//! Verdict certificates and their independent re-checking.
//!
//! A verifier only evaluates distances on the graph the certificate refers
//! to and redoes the rational arithmetic; it never reruns a search.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{self, GapBracket, NegTypeVerdict, UpperSource, Weighting};
use crate::error::{Error, Result};
use crate::graph::{distance_matrix, FiniteMetric, MetricGraph, Point};
use crate::l1cut::L1Verdict;
use crate::rational::{self, Rational};
use crate::theta::Theta;
use crate::witness::{self, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Theta {
        theta: Theta,
    },
    Witness(WitnessCertificate),
    NegativeType {
        points: Vec<Point>,
        result: NegTypeVerdict,
    },
    Gap {
        points: Vec<Point>,
        bracket: GapBracket,
    },
    L1 {
        points: Vec<Point>,
        result: L1Verdict,
    },
    Subdivision(SubdivisionCertificate),
}

/// Six points with their roles, weighting and all pairwise distances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    /// `B` then `R`.
    pub points: Vec<Point>,
    pub index: usize,
    #[serde(with = "crate::rational::serde_text")]
    pub gap: Rational,
    /// `-1/6` per blue occurrence and `+1/6` per red one, by position in `points`.
    #[serde(with = "crate::rational::serde_text_vec")]
    pub omega: Vec<Rational>,
    #[serde(with = "crate::rational::serde_text_matrix")]
    pub distances: Vec<Vec<Rational>>,
    pub case: witness::MinCase,
}

impl WitnessCertificate {
    pub fn from_witness(w: &Witness) -> Self {
        let six = w.six();
        let sixth = rational::frac(1, 6);
        WitnessCertificate {
            points: six.points.clone(),
            index: w.index,
            gap: w.gap.clone(),
            omega: (0..6)
                .map(|k| if k < 3 { -sixth.clone() } else { sixth.clone() })
                .collect(),
            distances: six.dist.clone(),
            case: w.case,
        }
    }

    pub fn blue(&self) -> &[Point] {
        &self.points[..3.min(self.points.len())]
    }

    pub fn red(&self) -> &[Point] {
        &self.points[3.min(self.points.len())..]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivisionCertificate {
    pub k: usize,
    pub blue: [String; 3],
    pub red: [String; 3],
    #[serde(with = "crate::rational::serde_text")]
    pub continuous_gap: Rational,
    #[serde(with = "crate::rational::serde_text")]
    pub vertex_gap: Rational,
}

impl Certificate {
    /// Points a downstream command should analyse, when the certificate
    /// carries a point set.
    pub fn points(&self) -> Option<Vec<Point>> {
        match self {
            Certificate::Theta { .. } => None,
            Certificate::Witness(w) => Some(w.points.clone()),
            Certificate::NegativeType { points, .. }
            | Certificate::Gap { points, .. }
            | Certificate::L1 { points, .. } => Some(points.clone()),
            Certificate::Subdivision(s) => Some(
                s.blue
                    .iter()
                    .chain(&s.red)
                    .map(|v| Point::Vertex(v.clone()))
                    .collect(),
            ),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Theta { .. } => "theta",
            Certificate::Witness(_) => "witness",
            Certificate::NegativeType { .. } => "negative_type",
            Certificate::Gap { .. } => "gap",
            Certificate::L1 { .. } => "l1",
            Certificate::Subdivision(_) => "subdivision",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub kind: String,
    pub valid: bool,
    pub detail: String,
}

fn outcome(kind: &str, problems: Vec<String>, ok_detail: String) -> Verification {
    Verification {
        kind: kind.to_string(),
        valid: problems.is_empty(),
        detail: if problems.is_empty() {
            ok_detail
        } else {
            problems.join("; ")
        },
    }
}

/// Re-checks a certificate against `g`. Input errors (unknown points and
/// the like) are returned as `Err`; failed checks as `valid: false`.
pub fn verify(cert: &Certificate, g: &MetricGraph) -> Result<Verification> {
    let kind = cert.kind();
    let mut problems = Vec::new();
    let detail = match cert {
        Certificate::Theta { theta } => {
            if let Err(e) = theta.validate(g) {
                problems.push(e.to_string());
            }
            format!("theta of total length {}", rational::format(&theta.total))
        }
        Certificate::Witness(w) => {
            if w.points.len() != 6 || w.omega.len() != 6 {
                return Err(Error::Parse("witness certificate needs six points".into()));
            }
            let m = distance_matrix(g, &w.points)?;
            if m.dist != w.distances {
                problems.push("recorded distances differ from recomputed ones".into());
            }
            let gap = witness::gap(&m, &[0, 1, 2], &[3, 4, 5])?;
            if gap != w.gap {
                problems.push(format!(
                    "recorded gap {} but recomputed {}",
                    rational::format(&w.gap),
                    rational::format(&gap)
                ));
            }
            if !gap.is_positive() {
                problems.push("gap is not positive".into());
            }
            let sixth = rational::frac(1, 6);
            let expected: Vec<Rational> = (0..6)
                .map(|k| if k < 3 { -sixth.clone() } else { sixth.clone() })
                .collect();
            if w.omega != expected {
                problems.push("weighting is not -1/6 on B and +1/6 on R".into());
            }
            let mut gamma = Rational::zero();
            for a in 0..6 {
                for b in (a + 1)..6 {
                    gamma += &w.omega[a] * &w.omega[b] * m.d(a, b);
                }
            }
            if gamma != &gap / rational::int(36) {
                problems.push("gamma differs from gap/36".into());
            }
            format!(
                "gap {} and gamma {} recomputed",
                rational::format(&gap),
                rational::format(&gamma)
            )
        }
        Certificate::NegativeType { points, result } => {
            let m = distance_matrix(g, points)?;
            match result {
                NegTypeVerdict::NegativeType {
                    basepoint,
                    elimination,
                } => {
                    if *basepoint >= m.len()
                        || !analysis::verify_elimination(&m, *basepoint, elimination)
                    {
                        problems.push("LDL^T factorisation does not reproduce the Gram matrix".into());
                    }
                    "Gram matrix factorisation with nonnegative pivots rechecked".to_string()
                }
                NegTypeVerdict::NotNegativeType {
                    weighting, gamma, ..
                } => {
                    if weighting.max_index().is_some_and(|i| i >= m.len()) {
                        return Err(Error::Parse("weighting index outside point list".into()));
                    }
                    if !weighting.sum().is_zero() {
                        problems.push("weighting does not sum to zero".into());
                    }
                    let value = analysis::gamma(&m, weighting)?;
                    if value != *gamma {
                        problems.push("recorded gamma differs from recomputed".into());
                    }
                    if !value.is_positive() {
                        problems.push("gamma is not positive".into());
                    }
                    format!("gamma {} > 0 recomputed", rational::format(&value))
                }
            }
        }
        Certificate::Gap { points, bracket } => {
            let m = distance_matrix(g, points)?;
            check_bracket(&m, bracket, &mut problems)?;
            format!(
                "lower end {} recomputed exactly",
                rational::format(&bracket.lower)
            )
        }
        Certificate::L1 { points, result } => {
            let m = distance_matrix(g, points)?;
            if !result.verify(&m) {
                problems.push("cut certificate failed exact re-check".into());
            }
            match result {
                L1Verdict::Embeddable { decomposition } => {
                    format!("{} weighted cuts reproduce d", decomposition.cuts.len())
                }
                L1Verdict::NotEmbeddable { .. } => "Farkas certificate rechecked on every cut".into(),
            }
        }
        Certificate::Subdivision(s) => {
            let points: Vec<Point> = s
                .blue
                .iter()
                .chain(&s.red)
                .map(|v| Point::Vertex(v.clone()))
                .collect();
            let m = distance_matrix(g, &points)?;
            let gap = witness::gap(&m, &[0, 1, 2], &[3, 4, 5])?;
            if gap != s.vertex_gap {
                problems.push("recorded vertex gap differs from recomputed".into());
            }
            if !gap.is_positive() {
                problems.push("vertex gap is not positive".into());
            }
            format!("vertex gap {} recomputed", rational::format(&gap))
        }
    };
    Ok(outcome(kind, problems, detail))
}

fn check_bracket(m: &FiniteMetric, b: &GapBracket, problems: &mut Vec<String>) -> Result<()> {
    let w: &Weighting = &b.weighting;
    if w.max_index().is_some_and(|i| i >= m.len()) {
        return Err(Error::Parse("weighting index outside point list".into()));
    }
    if !w.sum().is_zero() || !w.abs_sum().is_one() {
        problems.push("weighting is not normalised".into());
    }
    if analysis::gamma(m, w)? != b.lower {
        problems.push("lower end differs from gamma of the weighting".into());
    }
    if b.lower > b.upper {
        problems.push("lower end exceeds upper end".into());
    }
    if b.upper_source == UpperSource::Diameter && b.upper != m.diameter() / rational::int(4) {
        problems.push("diameter bound mismatch".into());
    }
    Ok(())
}

/// Hex SHA-256 over the given byte strings, each length-prefixed.
pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// What every command prints. Identical inputs give identical reports
/// apart from `wall_time_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub verdict: String,
    pub details: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Reads either a bare certificate or a run report holding one.
pub fn parse_certificate(text: &str) -> Result<Certificate> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let inner = match value.get("certificate") {
        Some(c) if value.get("command").is_some() => c.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| Error::Parse(e.to_string()))
}

/// Reads a point list: a JSON array of points, or any certificate (or
/// report) carrying points.
pub fn parse_points(text: &str) -> Result<Vec<Point>> {
    if let Ok(points) = serde_json::from_str::<Vec<Point>>(text) {
        return Ok(points);
    }
    parse_certificate(text)?
        .points()
        .ok_or_else(|| Error::Parse("certificate carries no points".into()))
}

/// `true` when the rational is at least `1/12`.
pub fn meets_witness_bound(gap: &Rational) -> bool {
    *gap >= rational::frac(1, 12)
}
