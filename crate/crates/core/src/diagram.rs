use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Which part of the extended filtration produced a point.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    /// Node/edge pair from the ascending pass.
    OrdinaryAscending,
    /// Node/edge pair from the descending pass.
    RelativeDescending,
    /// One per connected component: `(min f, max f)`.
    #[serde(rename = "essential_0")]
    Essential0,
    /// Loop born by an ascending edge, killed by a descending edge.
    #[serde(rename = "extended_1")]
    Extended1,
}

impl PointKind {
    pub fn dim(self) -> u8 {
        match self {
            PointKind::Extended1 => 1,
            _ => 0,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistencePoint {
    pub dim: u8,
    pub birth: f64,
    pub death: f64,
    pub kind: PointKind,
}

impl PersistencePoint {
    pub fn new(kind: PointKind, birth: f64, death: f64) -> Self {
        PersistencePoint {
            dim: kind.dim(),
            birth,
            death,
            kind,
        }
    }

    pub fn is_zero_persistence(&self) -> bool {
        self.birth == self.death
    }

    fn cmp_total(&self, other: &Self) -> Ordering {
        self.kind
            .cmp(&other.kind)
            .then(self.birth.total_cmp(&other.birth))
            .then(self.death.total_cmp(&other.death))
    }
}

/// Multiset of persistence points. Serializes as a bare JSON array.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PersistenceDiagram {
    pub points: Vec<PersistencePoint>,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramOptions {
    /// Keep points with `birth == death`.
    pub keep_zero_persistence: bool,
}

impl PersistenceDiagram {
    pub fn new(points: Vec<PersistencePoint>) -> Self {
        PersistenceDiagram { points }
    }

    pub(crate) fn push(&mut self, opts: DiagramOptions, kind: PointKind, birth: f64, death: f64) {
        let p = PersistencePoint::new(kind, birth, death);
        if opts.keep_zero_persistence || !p.is_zero_persistence() {
            self.points.push(p);
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self, dim: u8) -> impl Iterator<Item = &PersistencePoint> {
        self.points.iter().filter(move |p| p.dim == dim)
    }

    pub fn of_kind(&self, kind: PointKind) -> impl Iterator<Item = &PersistencePoint> {
        self.points.iter().filter(move |p| p.kind == kind)
    }

    /// `(birth, death)` pairs of one dimension, sorted.
    pub fn pairs(&self, dim: u8) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self.dim(dim).map(|p| (p.birth, p.death)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        v
    }

    /// Points in a canonical order, for multiset comparison.
    pub fn canonical(&self) -> PersistenceDiagram {
        let mut points = self.points.clone();
        points.sort_by(PersistencePoint::cmp_total);
        PersistenceDiagram { points }
    }

    /// Equality as multisets, per kind, with exact values.
    pub fn same_multiset(&self, other: &PersistenceDiagram) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        a.points.len() == b.points.len()
            && a.points
                .iter()
                .zip(&b.points)
                .all(|(x, y)| x.cmp_total(y) == Ordering::Equal)
    }

    pub fn union(&self, other: &PersistenceDiagram) -> PersistenceDiagram {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        PersistenceDiagram { points }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
