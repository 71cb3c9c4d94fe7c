//! Discrete semigroup models with counting measure, Følner sequences, partial
//! averages, densities and density limits.

use std::collections::HashSet;
use std::fmt::Debug;
use std::hash::Hash;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexVector, C64};
use crate::representation::{LatticePowers, MatrixRepresentation};
use crate::tolerances::Tolerances;

pub trait DiscreteSemigroupModel: Sync {
    type Element: Clone + Eq + Hash + Ord + Debug + Send + Sync;

    fn name(&self) -> String;
    fn multiply(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
    TwoSided,
}

pub trait FolnerSequence: Sync {
    type Model: DiscreteSemigroupModel;

    fn model(&self) -> &Self::Model;
    fn side(&self) -> Side;
    /// `F_n` for `n ≥ 1`, enumerated in a fixed order.
    fn set(&self, n: usize) -> Vec<<Self::Model as DiscreteSemigroupModel>::Element>;
    fn name(&self) -> String;
}

type Elem<F> = <<F as FolnerSequence>::Model as DiscreteSemigroupModel>::Element;

/// `(ℤ^k, +)`; the sequences below only visit `ℕ^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice {
    pub rank: usize,
}

impl DiscreteSemigroupModel for Lattice {
    type Element = Vec<i64>;

    fn name(&self) -> String {
        format!("Z^{}", self.rank)
    }

    fn multiply(&self, a: &Vec<i64>, b: &Vec<i64>) -> Vec<i64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }
}

/// Cubes `[lo_n, lo_n + n)^k` with `lo_n = start + drift·n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoxSequence {
    model: Lattice,
    start: i64,
    drift: i64,
}

impl BoxSequence {
    pub fn new(rank: usize, start: i64) -> Self {
        Self::translated(rank, start, 0)
    }

    /// Boxes pushed out along the diagonal as `n` grows; another Følner sequence
    /// for the same commutative model, hence another invariant mean.
    pub fn translated(rank: usize, start: i64, drift: i64) -> Self {
        Self {
            model: Lattice { rank },
            start,
            drift,
        }
    }

    pub fn rank(&self) -> usize {
        self.model.rank
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn drift(&self) -> i64 {
        self.drift
    }

    pub fn lower(&self, n: usize) -> i64 {
        self.start + self.drift * n as i64
    }

    pub fn len(&self, n: usize) -> usize {
        n.pow(self.model.rank as u32)
    }

    /// `F_n \ F_{n-1}` for nested boxes: points whose largest offset is `n − 1`.
    pub fn shell(&self, n: usize) -> Vec<Vec<i64>> {
        assert_eq!(self.drift, 0, "shells are defined for nested boxes");
        let k = self.model.rank;
        if n == 0 || k == 0 {
            return Vec::new();
        }
        let lo = self.start;
        let top = lo + n as i64 - 1;
        let mut out = Vec::with_capacity(k * n.pow(k as u32 - 1));
        // classify by the first coordinate equal to `top`: earlier coordinates
        // stay below it, later ones range over the whole side
        for first in 0..k {
            let below = (n - 1).pow(first as u32);
            let after = n.pow((k - first - 1) as u32);
            for a in 0..below {
                for b in 0..after {
                    let mut p = vec![top; k];
                    let mut x = a;
                    for slot in p[..first].iter_mut().rev() {
                        *slot = lo + (x % (n - 1)) as i64;
                        x /= n - 1;
                    }
                    let mut y = b;
                    for slot in p[first + 1..].iter_mut().rev() {
                        *slot = lo + (y % n) as i64;
                        y /= n;
                    }
                    out.push(p);
                }
            }
        }
        out
    }

    /// Index of each point of `F_n` within the cube of exponents `[0, side)^k`.
    fn points(&self, n: usize) -> impl Iterator<Item = Vec<i64>> + '_ {
        let k = self.model.rank;
        let lo = self.lower(n);
        let total = self.len(n);
        (0..total).map(move |mut idx| {
            let mut p = vec![0i64; k];
            for slot in p.iter_mut().rev() {
                *slot = lo + (idx % n) as i64;
                idx /= n;
            }
            p
        })
    }
}

impl FolnerSequence for BoxSequence {
    type Model = Lattice;

    fn model(&self) -> &Lattice {
        &self.model
    }

    fn side(&self) -> Side {
        Side::TwoSided
    }

    fn set(&self, n: usize) -> Vec<Vec<i64>> {
        self.points(n).collect()
    }

    fn name(&self) -> String {
        if self.drift == 0 {
            format!("boxes(k={}, start={})", self.model.rank, self.start)
        } else {
            format!(
                "boxes(k={}, start={}, drift={})",
                self.model.rank, self.start, self.drift
            )
        }
    }
}

/// `|sF_n △ F_n| / |F_n|`, translating on the side the sequence is Følner for
/// (left translation for two-sided sequences).
pub fn folner_defect<F: FolnerSequence>(f: &F, s: &Elem<F>, n: usize) -> f64 {
    let set = f.set(n);
    let model = f.model();
    let translated: HashSet<Elem<F>> = set
        .iter()
        .map(|x| match f.side() {
            Side::Right => model.multiply(x, s),
            Side::Left | Side::TwoSided => model.multiply(s, x),
        })
        .collect();
    let original: HashSet<Elem<F>> = set.into_iter().collect();
    let diff = translated.symmetric_difference(&original).count();
    diff as f64 / original.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceStatus {
    Converged,
    Diverged,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    #[serde(serialize_with = "serialize_complex_list")]
    pub partial_values: Vec<C64>,
    #[serde(serialize_with = "serialize_complex_option")]
    pub limit_estimate: Option<C64>,
    pub cauchy_window: usize,
    pub status: ConvergenceStatus,
}

fn serialize_complex_list<S: serde::Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
    pairs.serialize(s)
}

fn serialize_complex_option<S: serde::Serializer>(v: &Option<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.map(|z| [z.re, z.im]).serialize(s)
}

pub const CAUCHY_WINDOW: usize = 10;

impl ConvergenceReport {
    /// Cauchy-window verdict on a sequence of partial values.
    ///
    /// Converged when the last [`CAUCHY_WINDOW`] values sit within `tol` of the
    /// final one. Diverged when they do not and the oscillation over the last
    /// quarter of the run is no smaller than over the second quarter.
    pub fn from_partials(partial_values: Vec<C64>, tol: f64) -> Self {
        let n = partial_values.len();
        let spread = |lo: usize, hi: usize| -> f64 {
            let slice = &partial_values[lo..hi];
            let mut m: f64 = 0.0;
            for a in slice {
                for b in slice {
                    m = m.max((a - b).norm());
                }
            }
            m
        };
        let (status, limit_estimate) = if n >= CAUCHY_WINDOW {
            let last = partial_values[n - 1];
            let within = partial_values[n - CAUCHY_WINDOW..]
                .iter()
                .all(|z| (z - last).norm() <= tol);
            if within {
                (ConvergenceStatus::Converged, Some(last))
            } else if n >= 4 * CAUCHY_WINDOW && spread(3 * n / 4, n) >= spread(n / 4, n / 2) {
                (ConvergenceStatus::Diverged, None)
            } else {
                (ConvergenceStatus::Undecided, Some(last))
            }
        } else {
            (ConvergenceStatus::Undecided, partial_values.last().copied())
        };
        Self {
            partial_values,
            limit_estimate,
            cauchy_window: CAUCHY_WINDOW,
            status,
        }
    }
}

/// Partial averages `(1/|F_n|) Σ_{s∈F_n} f(s)` for `n = 1..=n_max`.
pub fn average<F, G>(folner: &F, f: G, n_max: usize, tol: &Tolerances) -> ConvergenceReport
where
    F: FolnerSequence,
    G: Fn(&Elem<F>) -> C64 + Sync,
{
    let partials: Vec<C64> = (1..=n_max)
        .map(|n| {
            let set = folner.set(n);
            let terms: Vec<C64> = set.par_iter().map(&f).collect();
            let total: C64 = terms.iter().sum();
            total.unscale(set.len() as f64)
        })
        .collect();
    ConvergenceReport::from_partials(partials, tol.convergence_tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub upper: f64,
    pub lower: f64,
}

/// Partial densities `|A ∩ F_n| / |F_n|` for `n = 1..=n_max`.
pub fn partial_densities<F, A>(folner: &F, member: A, n_max: usize) -> Vec<f64>
where
    F: FolnerSequence,
    A: Fn(&Elem<F>) -> bool + Sync,
{
    (1..=n_max)
        .map(|n| {
            let set = folner.set(n);
            let hits = set.par_iter().filter(|x| member(x)).count();
            hits as f64 / set.len() as f64
        })
        .collect()
}

/// Upper and lower density estimated as the max and min of the partial
/// densities over the tail `n ∈ [⌈n_max/2⌉, n_max]`.
pub fn density<F, A>(folner: &F, member: A, n_max: usize) -> DensityEstimate
where
    F: FolnerSequence,
    A: Fn(&Elem<F>) -> bool + Sync,
{
    let partials = partial_densities(folner, member, n_max.max(1));
    tail_density(&partials)
}

pub(crate) fn tail_density(partials: &[f64]) -> DensityEstimate {
    let tail = &partials[(partials.len() - 1) / 2..];
    DensityEstimate {
        upper: tail.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        lower: tail.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Whether `{s : ‖π_s ξ‖ < radius}` has lower density at least
/// `1 − density_tol` along the boxes, i.e. `π_s ξ → 0` in density.
pub fn d_lim_check(
    folner: &BoxSequence,
    rep: &MatrixRepresentation,
    xi: &ComplexVector,
    radius: f64,
    n_max: usize,
    density_tol: f64,
) -> Result<bool> {
    if xi.len() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            found: xi.len(),
        });
    }
    if !(radius > 0.0) {
        return Err(Error::MalformedParameters("radius must be positive".into()));
    }
    let orbit = OrbitTable::new(rep, xi, folner, n_max)?;
    let partials = partial_densities(folner, |s| orbit.vector(s).norm() < radius, n_max);
    Ok(tail_density(&partials).lower >= 1.0 - density_tol)
}

/// `π_s ξ` tabulated for every exponent vector in `[0, side)^k`.
pub(crate) struct OrbitTable {
    rank: usize,
    side: usize,
    vectors: Vec<ComplexVector>,
}

const ORBIT_TABLE_LIMIT: usize = 20_000_000;

impl OrbitTable {
    pub fn new(rep: &MatrixRepresentation, xi: &ComplexVector, folner: &BoxSequence, n_max: usize) -> Result<Self> {
        let rank = rep.generators().len();
        if folner.rank() != rank {
            return Err(Error::DimensionMismatch {
                expected: rank,
                found: folner.rank(),
            });
        }
        if folner.start() < 0 || folner.drift() < 0 {
            return Err(Error::MalformedParameters("boxes must stay in the positive cone".into()));
        }
        let side = (folner.lower(n_max) + n_max as i64) as usize;
        let count = side.checked_pow(rank as u32).unwrap_or(usize::MAX);
        if count.saturating_mul(rep.dim()) > ORBIT_TABLE_LIMIT {
            return Err(Error::MalformedParameters(format!(
                "orbit table of {count} vectors is too large; lower the depth"
            )));
        }
        let mut powers = LatticePowers::new(rep);
        let mut vectors: Vec<ComplexVector> = Vec::with_capacity(count);
        for idx in 0..count {
            if idx == 0 {
                vectors.push(xi.clone());
                continue;
            }
            // step back along the last coordinate that is nonzero
            let mut rest = idx;
            let mut stride = 1;
            let mut coord = rank - 1;
            for c in (0..rank).rev() {
                if rest % side != 0 {
                    coord = c;
                    break;
                }
                rest /= side;
                stride *= side;
            }
            let prev = &vectors[idx - stride];
            let v = powers.power(coord, 1) * prev;
            vectors.push(v);
        }
        Ok(Self { rank, side, vectors })
    }

    pub fn vector(&self, s: &[i64]) -> &ComplexVector {
        debug_assert_eq!(s.len(), self.rank);
        let mut idx = 0;
        for &x in s {
            idx = idx * self.side + x as usize;
        }
        &self.vectors[idx]
    }
}
