//! Deterministic quasi-random sample points inside a coordinate box.
//!
//! Points come from a Halton sequence (bases 2, 3, 5, 7) with a seeded
//! Cranley-Patterson rotation, so distinct seeds give distinct but equally
//! well-spread point sets. Points violating any [`Constraint`] are rejected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{ChartPoint, ScalarExpr, DIM};

pub const DEFAULT_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub lo: [f64; DIM],
    pub hi: [f64; DIM],
}

impl SampleBox {
    pub fn cube(lo: f64, hi: f64) -> Self {
        Self {
            lo: [lo; DIM],
            hi: [hi; DIM],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Greater,
    Less,
}

/// Inequality `lhs > rhs` or `lhs < rhs`; the real part of each side is
/// compared. Used to carve singular loci out of the sample box.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub lhs: ScalarExpr,
    pub op: Comparison,
    pub rhs: ScalarExpr,
}

impl Constraint {
    pub fn holds(&self, p: &ChartPoint) -> bool {
        let (Ok(l), Ok(r)) = (self.lhs.eval(p), self.rhs.eval(p)) else {
            return false;
        };
        match self.op {
            Comparison::Greater => l.re > r.re,
            Comparison::Less => l.re < r.re,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampleSpec {
    pub bounds: SampleBox,
    pub count: usize,
    pub seed: u64,
    pub constraints: Vec<Constraint>,
}

impl SampleSpec {
    pub fn new(bounds: SampleBox, count: usize, seed: u64) -> Self {
        Self {
            bounds,
            count,
            seed,
            constraints: Vec::new(),
        }
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn generate(&self) -> Result<SampleSet> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let shift: [f64; DIM] = std::array::from_fn(|_| rng.gen::<f64>());
        let budget = self.count.saturating_mul(1000).max(1000);
        let mut points = Vec::with_capacity(self.count);
        let mut index = 1u64;
        while points.len() < self.count && index <= budget as u64 {
            let coords: [f64; DIM] = std::array::from_fn(|axis| {
                let u = (radical_inverse(index, PRIMES[axis]) + shift[axis]).fract();
                self.bounds.lo[axis] + u * (self.bounds.hi[axis] - self.bounds.lo[axis])
            });
            index += 1;
            let Some(p) = ChartPoint::new(coords) else {
                continue;
            };
            if self.constraints.iter().all(|c| c.holds(&p)) {
                points.push(p);
            }
        }
        if points.len() < self.count {
            return Err(Error::Sampling {
                wanted: self.count,
                found: points.len(),
            });
        }
        Ok(SampleSet::new(points))
    }
}

const PRIMES: [u64; DIM] = [2, 3, 5, 7];

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while n > 0 {
        acc += (n % base) as f64 * f;
        n /= base;
        f *= inv;
    }
    acc
}

/// The finite set of chart points at which identities are checked.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<ChartPoint>,
}

impl SampleSet {
    pub fn new(points: Vec<ChartPoint>) -> Self {
        Self { points }
    }

    /// `count` points in `bounds` with no exclusions.
    pub fn in_box(bounds: SampleBox, count: usize, seed: u64) -> Self {
        SampleSpec::new(bounds, count, seed)
            .generate()
            .expect("an unconstrained box always admits its sample points")
    }

    pub fn points(&self) -> &[ChartPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ChartPoint> {
        self.points.iter()
    }
}

impl<'a> IntoIterator for &'a SampleSet {
    type Item = &'a ChartPoint;
    type IntoIter = std::slice::Iter<'a, ChartPoint>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}
