//! Metric spaces over integer point identifiers.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::num::{decimal_places, ratio_to_f64, Key, Rational};

pub type PointId = usize;

/// Largest absolute tick value accepted for exact kernels. Leaves room for
/// sums over ~10^7 terms inside `i128`.
const MAX_TICKS: i128 = 10i128.pow(30);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("point {point} out of range (space has {count} points)")]
    InvalidPoint { point: PointId, count: usize },
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("metric space has no points")]
    Empty,
    #[error("planar distances are not rational; use float arithmetic")]
    NotExact,
    #[error("coordinates exceed the exact arithmetic range")]
    ExactRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Line,
    Plane,
    Matrix,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Line => "line",
            SpaceKind::Plane => "plane",
            SpaceKind::Matrix => "matrix",
        }
    }
}

impl std::str::FromStr for SpaceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "line" => Ok(SpaceKind::Line),
            "plane" => Ok(SpaceKind::Plane),
            "matrix" => Ok(SpaceKind::Matrix),
            other => Err(format!("unknown metric kind `{other}`")),
        }
    }
}

/// A finite metric space. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpace {
    Line(Vec<Rational>),
    Plane(Vec<[Rational; 2]>),
    Matrix(Vec<Vec<Rational>>),
}

/// A metric axiom violation found by [`MetricSpace::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonZeroDiagonal {
        point: PointId,
    },
    Negative {
        a: PointId,
        b: PointId,
    },
    Asymmetric {
        a: PointId,
        b: PointId,
    },
    /// `d(from, to) > d(from, via) + d(via, to)`.
    Triangle {
        from: PointId,
        to: PointId,
        via: PointId,
    },
}

impl MetricSpace {
    pub fn line(coordinates: Vec<Rational>) -> Result<Self, MetricError> {
        if coordinates.is_empty() {
            return Err(MetricError::Empty);
        }
        Ok(MetricSpace::Line(coordinates))
    }

    pub fn plane(coordinates: Vec<[Rational; 2]>) -> Result<Self, MetricError> {
        if coordinates.is_empty() {
            return Err(MetricError::Empty);
        }
        Ok(MetricSpace::Plane(coordinates))
    }

    pub fn matrix(distances: Vec<Vec<Rational>>) -> Result<Self, MetricError> {
        if distances.is_empty() {
            return Err(MetricError::Empty);
        }
        let n = distances.len();
        for (row, entries) in distances.iter().enumerate() {
            if entries.len() != n {
                return Err(MetricError::NotSquare { row, len: entries.len(), expected: n });
            }
        }
        Ok(MetricSpace::Matrix(distances))
    }

    pub fn kind(&self) -> SpaceKind {
        match self {
            MetricSpace::Line(_) => SpaceKind::Line,
            MetricSpace::Plane(_) => SpaceKind::Plane,
            MetricSpace::Matrix(_) => SpaceKind::Matrix,
        }
    }

    pub fn point_count(&self) -> usize {
        match self {
            MetricSpace::Line(c) => c.len(),
            MetricSpace::Plane(c) => c.len(),
            MetricSpace::Matrix(d) => d.len(),
        }
    }

    /// Whether distances are exact rationals (line and matrix kinds).
    pub fn is_exact(&self) -> bool {
        !matches!(self, MetricSpace::Plane(_))
    }

    fn check(&self, p: PointId) -> Result<(), MetricError> {
        let count = self.point_count();
        if p < count {
            Ok(())
        } else {
            Err(MetricError::InvalidPoint { point: p, count })
        }
    }

    pub fn exact_distance(&self, a: PointId, b: PointId) -> Result<Rational, MetricError> {
        self.check(a)?;
        self.check(b)?;
        match self {
            MetricSpace::Line(c) => Ok((&c[a] - &c[b]).abs()),
            MetricSpace::Matrix(d) => Ok(d[a][b].clone()),
            MetricSpace::Plane(_) if a == b => Ok(Rational::zero()),
            MetricSpace::Plane(_) => Err(MetricError::NotExact),
        }
    }

    pub fn float_distance(&self, a: PointId, b: PointId) -> Result<f64, MetricError> {
        self.check(a)?;
        self.check(b)?;
        Ok(match self {
            MetricSpace::Line(c) => ratio_to_f64(&(&c[a] - &c[b]).abs()),
            MetricSpace::Matrix(d) => ratio_to_f64(&d[a][b]),
            MetricSpace::Plane(c) => {
                let p = [ratio_to_f64(&c[a][0]), ratio_to_f64(&c[a][1])];
                let q = [ratio_to_f64(&c[b][0]), ratio_to_f64(&c[b][1])];
                f64::planar(p, q)
            }
        })
    }

    /// Checks the metric axioms. Line and plane spaces are metrics by
    /// construction; matrices are checked exhaustively and exactly.
    #[allow(clippy::needless_range_loop)]
    pub fn validate(&self) -> Vec<Violation> {
        let MetricSpace::Matrix(d) = self else {
            return Vec::new();
        };
        let n = d.len();
        let mut out = Vec::new();
        for a in 0..n {
            if !d[a][a].is_zero() {
                out.push(Violation::NonZeroDiagonal { point: a });
            }
            for b in 0..n {
                if d[a][b].is_negative() {
                    out.push(Violation::Negative { a, b });
                }
                if a < b && d[a][b] != d[b][a] {
                    out.push(Violation::Asymmetric { a, b });
                }
            }
        }
        for from in 0..n {
            for to in 0..n {
                if from == to {
                    continue;
                }
                for via in 0..n {
                    if via == from || via == to {
                        continue;
                    }
                    if d[from][to] > &d[from][via] + &d[via][to] {
                        out.push(Violation::Triangle { from, to, via });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Form<K> {
    Line(Vec<K>),
    Table { n: usize, d: Vec<K> },
    Plane(Vec<[f64; 2]>),
}

/// Fast distance evaluator over a metric space in key arithmetic.
///
/// Exact kernels scale every coordinate by a common power of ten so that
/// distances become `i128` ticks; [`Kernel::denominator`] converts back.
#[derive(Debug, Clone)]
pub struct Kernel<K> {
    form: Form<K>,
    denominator: i128,
}

impl<K: Key> Kernel<K> {
    #[inline]
    pub fn distance(&self, a: PointId, b: PointId) -> K {
        match &self.form {
            Form::Line(x) => (x[a] - x[b]).abs(),
            Form::Table { n, d } => d[a * n + b],
            Form::Plane(p) => K::planar(p[a], p[b]),
        }
    }

    /// Ticks per unit distance (1 for float kernels).
    pub fn denominator(&self) -> i128 {
        self.denominator
    }
}

impl Kernel<i128> {
    pub fn exact(space: &MetricSpace) -> Result<Self, MetricError> {
        let values: Vec<&Rational> = match space {
            MetricSpace::Line(c) => c.iter().collect(),
            MetricSpace::Matrix(d) => d.iter().flatten().collect(),
            MetricSpace::Plane(_) => return Err(MetricError::NotExact),
        };
        let mut places = 0usize;
        for v in &values {
            places = places.max(decimal_places(v.denom()).ok_or(MetricError::ExactRange)?);
        }
        if places > 24 {
            return Err(MetricError::ExactRange);
        }
        let denominator = 10i128.pow(places as u32);
        let scale = BigInt::from(denominator);
        let to_ticks = |v: &Rational| -> Result<i128, MetricError> {
            let t = (v.numer() * (&scale / v.denom())).to_i128().ok_or(MetricError::ExactRange)?;
            if t.abs() > MAX_TICKS {
                return Err(MetricError::ExactRange);
            }
            Ok(t)
        };
        let form = match space {
            MetricSpace::Line(c) => Form::Line(c.iter().map(to_ticks).collect::<Result<_, _>>()?),
            MetricSpace::Matrix(d) => {
                Form::Table { n: d.len(), d: d.iter().flatten().map(to_ticks).collect::<Result<_, _>>()? }
            }
            MetricSpace::Plane(_) => unreachable!(),
        };
        Ok(Kernel { form, denominator })
    }
}

impl Kernel<f64> {
    pub fn float(space: &MetricSpace) -> Self {
        let form = match space {
            MetricSpace::Line(c) => Form::Line(c.iter().map(ratio_to_f64).collect()),
            MetricSpace::Matrix(d) => Form::Table { n: d.len(), d: d.iter().flatten().map(ratio_to_f64).collect() },
            MetricSpace::Plane(c) => {
                Form::Plane(c.iter().map(|p| [ratio_to_f64(&p[0]), ratio_to_f64(&p[1])]).collect())
            }
        };
        Kernel { form, denominator: 1 }
    }
}
