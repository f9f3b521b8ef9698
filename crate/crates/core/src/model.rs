//! Domain vocabulary: colors, light graphs, movement and scheduler models,
//! and exact geometry on the line through the two robots.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational used for every coordinate, distance and coefficient.
pub type Ratio = BigRational;

/// A coordinate on the line through both robots.
pub type Position = Ratio;

pub fn ratio(numer: i64, denom: i64) -> Ratio {
    Ratio::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Ratio {
    Ratio::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational {0:?}: expected \"p/q\" or an integer")]
pub struct ParseRatioError(pub String);

/// Parses `"p/q"` or a bare integer. Decimal notation is rejected on purpose.
pub fn parse_ratio(s: &str) -> Result<Ratio, ParseRatioError> {
    let err = || ParseRatioError(s.to_string());
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Ratio::new(n, d))
}

/// Formats as `"p/q"`, always with an explicit denominator.
pub fn fmt_ratio(r: &Ratio) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Index of a color inside its owning [`LightGraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Color(pub u8);

impl Color {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Default display name: `A`, `B`, ... .
    pub fn letter(self) -> String {
        if self.0 < 26 {
            char::from(b'A' + self.0).to_string()
        } else {
            format!("X{}", self.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub next: Color,
    pub lambda: Ratio,
}

/// An L-algorithm: every observed color has exactly one out-edge carrying the
/// next own color and the coefficient of `(1 - lambda) * me + lambda * other`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LightGraph {
    names: Vec<String>,
    edges: Vec<Edge>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("color {0} has no outgoing edge")]
    MissingEdge(String),
    #[error("edge from {from} targets {0}, which is not a color of the graph", from = .1)]
    DanglingTarget(String, String),
    #[error("edge from unknown color {0}")]
    UnknownSource(String),
    #[error("duplicate color {0}")]
    DuplicateColor(String),
    #[error("bad lambda on edge from {0}: {1}")]
    BadLambda(String, ParseRatioError),
    #[error("a graph needs at least one color")]
    Empty,
}

/// Serialized form of a light graph; not yet validated.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphSpec {
    pub colors: Vec<String>,
    pub edges: BTreeMap<String, EdgeSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeSpec {
    pub next: String,
    pub lambda: String,
}

/// Checks that every color has exactly one out-edge into the color set.
pub fn validate_graph(spec: &GraphSpec) -> Result<LightGraph, GraphError> {
    if spec.colors.is_empty() {
        return Err(GraphError::Empty);
    }
    let mut index = BTreeMap::new();
    for (i, name) in spec.colors.iter().enumerate() {
        if index.insert(name.as_str(), Color(i as u8)).is_some() {
            return Err(GraphError::DuplicateColor(name.clone()));
        }
    }
    if let Some(src) = spec.edges.keys().find(|k| !index.contains_key(k.as_str())) {
        return Err(GraphError::UnknownSource(src.clone()));
    }
    let mut edges = Vec::with_capacity(spec.colors.len());
    for name in &spec.colors {
        let e = spec
            .edges
            .get(name)
            .ok_or_else(|| GraphError::MissingEdge(name.clone()))?;
        let next = *index
            .get(e.next.as_str())
            .ok_or_else(|| GraphError::DanglingTarget(e.next.clone(), name.clone()))?;
        let lambda = parse_ratio(&e.lambda).map_err(|err| GraphError::BadLambda(name.clone(), err))?;
        edges.push(Edge { next, lambda });
    }
    Ok(LightGraph {
        names: spec.colors.clone(),
        edges,
    })
}

impl LightGraph {
    /// Builds a graph over colors `A, B, ...` from `(next, lambda)` per color.
    pub fn from_edges(edges: Vec<(Color, Ratio)>) -> Self {
        let k = edges.len();
        assert!(k > 0 && k <= 26, "1..=26 colors supported");
        assert!(edges.iter().all(|(n, _)| n.index() < k), "edge target out of range");
        LightGraph {
            names: (0..k).map(|i| Color(i as u8).letter()).collect(),
            edges: edges.into_iter().map(|(next, lambda)| Edge { next, lambda }).collect(),
        }
    }

    pub fn num_colors(&self) -> usize {
        self.edges.len()
    }

    pub fn colors(&self) -> impl Iterator<Item = Color> + '_ {
        (0..self.edges.len()).map(|i| Color(i as u8))
    }

    pub fn name(&self, c: Color) -> &str {
        &self.names[c.index()]
    }

    pub fn color_by_name(&self, name: &str) -> Option<Color> {
        self.names.iter().position(|n| n == name).map(|i| Color(i as u8))
    }

    pub fn edge(&self, c: Color) -> &Edge {
        &self.edges[c.index()]
    }

    /// The unique out-edge of the observed color.
    pub fn transition(&self, observed: Color) -> (Color, &Ratio) {
        let e = &self.edges[observed.index()];
        (e.next, &e.lambda)
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            colors: self.names.clone(),
            edges: self
                .colors()
                .map(|c| {
                    let e = self.edge(c);
                    (
                        self.name(c).to_string(),
                        EdgeSpec {
                            next: self.name(e.next).to_string(),
                            lambda: fmt_ratio(&e.lambda),
                        },
                    )
                })
                .collect(),
        }
    }

    /// Compact one-line form, e.g. `A>B:1/2 B>C:0 C>A:1`.
    pub fn describe(&self) -> String {
        self.colors()
            .map(|c| {
                let e = self.edge(c);
                format!("{}>{}:{}", self.name(c), self.name(e.next), e.lambda)
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for LightGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MovementModel {
    Rigid,
    /// Moves may be cut short, but never below `delta` (or the full distance if closer).
    NonRigid {
        delta: Ratio,
    },
}

impl MovementModel {
    pub fn non_rigid(delta: Ratio) -> Self {
        assert!(delta.is_positive(), "delta must be positive");
        MovementModel::NonRigid { delta }
    }

    pub fn is_rigid(&self) -> bool {
        matches!(self, MovementModel::Rigid)
    }

    pub fn delta(&self) -> Option<&Ratio> {
        match self {
            MovementModel::Rigid => None,
            MovementModel::NonRigid { delta } => Some(delta),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    Fsync,
    Ssync,
    Async,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchedulerClass {
    pub kind: SchedulerKind,
    pub lc_atomic: bool,
    pub move_atomic: bool,
}

impl SchedulerClass {
    pub const FSYNC: Self = Self {
        kind: SchedulerKind::Fsync,
        lc_atomic: true,
        move_atomic: true,
    };
    pub const SSYNC: Self = Self {
        kind: SchedulerKind::Ssync,
        lc_atomic: true,
        move_atomic: true,
    };
    pub const ASYNC: Self = Self {
        kind: SchedulerKind::Async,
        lc_atomic: false,
        move_atomic: false,
    };
    pub const LC_ATOMIC: Self = Self {
        kind: SchedulerKind::Async,
        lc_atomic: true,
        move_atomic: false,
    };
    pub const LC_MOVE_ATOMIC: Self = Self {
        kind: SchedulerKind::Async,
        lc_atomic: true,
        move_atomic: true,
    };

    pub fn is_round_based(&self) -> bool {
        matches!(self.kind, SchedulerKind::Fsync | SchedulerKind::Ssync)
    }

    /// Parses comma-separated tokens: `fsync`, `ssync`, `async`, `lc-atomic`, `move-atomic`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut cls = SchedulerClass::ASYNC;
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok.to_ascii_lowercase().as_str() {
                "fsync" => cls = SchedulerClass::FSYNC,
                "ssync" => cls = SchedulerClass::SSYNC,
                "async" => {}
                "lc-atomic" | "lc" => cls.lc_atomic = true,
                "move-atomic" | "move" => cls.move_atomic = true,
                other => return Err(format!("unknown scheduler token {other:?}")),
            }
        }
        Ok(cls)
    }

    /// True if `self` imposes every restriction `other` does.
    pub fn at_least_as_strict_as(&self, other: &SchedulerClass) -> bool {
        let rank = |k: SchedulerKind| match k {
            SchedulerKind::Async => 0,
            SchedulerKind::Ssync => 1,
            SchedulerKind::Fsync => 2,
        };
        rank(self.kind) >= rank(other.kind)
            && (self.lc_atomic || !other.lc_atomic)
            && (self.move_atomic || !other.move_atomic)
    }
}

impl fmt::Display for SchedulerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SchedulerKind::Fsync => f.write_str("fsync"),
            SchedulerKind::Ssync => f.write_str("ssync"),
            SchedulerKind::Async => {
                let mut parts = vec!["async"];
                if self.lc_atomic {
                    parts.push("lc-atomic");
                }
                if self.move_atomic {
                    parts.push("move-atomic");
                }
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// `(1 - lambda) * me + lambda * other`, exactly.
pub fn destination(me: &Position, other: &Position, lambda: &Ratio) -> Position {
    me + lambda * (other - me)
}

/// Where a move from `me` towards `dest` stops.
///
/// `adversary_fraction` in `[0, 1]` picks the stop point under Non-Rigid
/// movement: 0 stops after exactly `delta`, 1 reaches the destination.
pub fn truncate_move(me: &Position, dest: &Position, model: &MovementModel, adversary_fraction: &Ratio) -> Position {
    debug_assert!(!adversary_fraction.is_negative() && *adversary_fraction <= Ratio::one());
    let delta = match model {
        MovementModel::Rigid => return dest.clone(),
        MovementModel::NonRigid { delta } => delta,
    };
    let span = dest - me;
    let len = span.abs();
    if len <= *delta {
        return dest.clone();
    }
    let wanted = adversary_fraction * &len;
    let travel = if wanted > *delta { wanted } else { delta.clone() };
    if travel >= len {
        return dest.clone();
    }
    me + span.signum() * travel
}
