//! Invariant inner products on the reversible part and its decomposition
//! into irreducible finite unitary systems.
//!
//! Everything here works in the coordinates of the representation it is
//! handed, normally the restriction of `π` to an orthonormal basis of `E_r`
//! (see [`MatrixRepresentation::restrict`]).

use nalgebra::Cholesky;
use serde::Serialize;

use crate::closure::approximate_closure;
use crate::error::{Error, Result};
use crate::folner::BoxSequence;
use crate::linalg::{
    c, from_columns, frobenius, hermitian_eigen, nullspace_below, numerical_rank, spectral_norm, svd, truncated_pinv,
    ComplexMatrix, ComplexVector,
};
use crate::representation::{LatticePowers, MatrixJson, MatrixRepresentation, VectorJson};
use crate::tolerances::Tolerances;

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantInnerProduct {
    pub gram: ComplexMatrix,
}

impl InvariantInnerProduct {
    /// `max_g ‖π_g* G π_g − G‖_F`.
    pub fn invariance_defect(&self, rep: &MatrixRepresentation) -> f64 {
        rep.matrices()
            .map(|g| frobenius(&(g.adjoint() * &self.gram * g - &self.gram)))
            .fold(0.0, f64::max)
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.gram).0.first().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AveragingSource {
    /// Cesàro averages of `π_s* π_s` along nested boxes, stopped at the first
    /// index whose average is invariant within `10·convergence_tol`.
    Folner(BoxSequence),
    /// Exact average over a finite closure that saturates to a group.
    KernelHaar,
    /// Mean ergodic projection of `I` onto the forms fixed by every
    /// `X ↦ π_g* X π_g`, along the span of the ranges of `X ↦ π_g* X π_g − X`.
    /// This is the limit every Følner average converges to.
    MeanErgodic,
}

fn check_form(gram: ComplexMatrix, tol: &Tolerances) -> Result<InvariantInnerProduct> {
    let gram = (&gram + gram.adjoint()).unscale(2.0);
    let ip = InvariantInnerProduct { gram };
    let top = spectral_norm(&ip.gram);
    let bottom = ip.smallest_eigenvalue();
    if !(bottom > tol.rank_tol * top.max(f64::MIN_POSITIVE)) {
        return Err(Error::NotPositiveDefinite(bottom));
    }
    Ok(ip)
}

pub fn invariant_inner_product(
    rep: &MatrixRepresentation,
    source: AveragingSource,
    tol: &Tolerances,
) -> Result<InvariantInnerProduct> {
    tol.validate()?;
    match source {
        AveragingSource::MeanErgodic => mean_ergodic_form(rep, tol),
        AveragingSource::KernelHaar => {
            let net = approximate_closure(rep, tol).map_err(|e| match e {
                Error::BudgetExhausted(_) => {
                    Error::NoConvergence("closure is not a finite group; Haar average unavailable".into())
                }
                other => other,
            })?;
            let d = rep.dim();
            let mut sum = ComplexMatrix::zeros(d, d);
            for m in &net.elements {
                sum += m.adjoint() * m;
            }
            let ip = check_form(sum.unscale(net.len() as f64), tol)?;
            if ip.invariance_defect(rep) > 10.0 * tol.convergence_tol {
                return Err(Error::NoConvergence("closure net is not a group; average is not invariant".into()));
            }
            Ok(ip)
        }
        AveragingSource::Folner(boxes) => folner_form(rep, &boxes, tol),
    }
}

fn folner_form(rep: &MatrixRepresentation, boxes: &BoxSequence, tol: &Tolerances) -> Result<InvariantInnerProduct> {
    let d = rep.dim();
    if boxes.rank() != rep.generators().len() || boxes.drift() != 0 {
        return Err(Error::MalformedParameters(
            "Følner source needs nested boxes of the representation's rank".into(),
        ));
    }
    let mut powers = LatticePowers::new(rep);
    let mut sum = ComplexMatrix::zeros(d, d);
    let mut count = 0usize;
    for n in 1..=tol.max_iterations {
        for s in boxes.shell(n) {
            let m = powers.operator(&s)?;
            if frobenius(&m) > tol.norm_cap {
                return Err(Error::NotPowerBounded(format!("element {s:?} exceeds the norm cap")));
            }
            sum += m.adjoint() * m;
            count += 1;
        }
        let g = sum.unscale(count as f64);
        let candidate = InvariantInnerProduct { gram: g };
        if candidate.invariance_defect(rep) < 10.0 * tol.convergence_tol {
            return check_form(candidate.gram, tol);
        }
    }
    Err(Error::NoConvergence(format!(
        "Følner averages of π_s*π_s not invariant within {} indices",
        tol.max_iterations
    )))
}

/// Column-major `vec`: `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

fn unvec(v: &ComplexVector, k: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(k, k, |i, j| v[j * k + i])
}

fn mean_ergodic_form(rep: &MatrixRepresentation, tol: &Tolerances) -> Result<InvariantInnerProduct> {
    let k = rep.dim();
    let kk = k * k;
    let id = ComplexMatrix::identity(kk, kk);
    let blocks: Vec<ComplexMatrix> = rep
        .matrices()
        .map(|g| kron(&g.transpose(), &g.adjoint()) - &id)
        .collect();
    let mut stacked = ComplexMatrix::zeros(kk * blocks.len(), kk);
    for (i, b) in blocks.iter().enumerate() {
        stacked.view_mut((i * kk, 0), (kk, kk)).copy_from(b);
    }
    // g⊗ḡ − I is measured against ‖g‖² + 1, not against itself: on an
    // isometric part it is rounding noise only
    let scale = 1.0 + rep.matrices().map(|g| spectral_norm(g).powi(2)).fold(0.0, f64::max);
    let cutoff = tol.rank_tol.sqrt() * scale;
    let fixed = nullspace_below(&stacked, cutoff);
    if fixed.is_empty() {
        return Err(Error::NotPositiveDefinite(0.0));
    }
    let mut ranges = ComplexMatrix::zeros(kk, kk * blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        ranges.view_mut((0, i * kk), (kk, kk)).copy_from(b);
    }
    let range_basis = column_space(&ranges, cutoff);
    if fixed.len() + range_basis.len() != kk {
        return Err(Error::NoConvergence(format!(
            "fixed space ({}) and ranges ({}) do not complement each other; the action is not mean ergodic",
            fixed.len(),
            range_basis.len()
        )));
    }
    let mut cols = fixed.clone();
    cols.extend(range_basis);
    let basis = from_columns(kk, &cols);
    let target = ComplexVector::from_fn(kk, |i, _| if i % (k + 1) == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let coeffs = basis
        .lu()
        .solve(&target)
        .ok_or_else(|| Error::NoConvergence("singular splitting of the form space".into()))?;
    let mut x = ComplexVector::zeros(kk);
    for (j, f) in fixed.iter().enumerate() {
        x.axpy(coeffs[j], f, c(1.0, 0.0));
    }
    check_form(unvec(&x, k), tol)
}

/// Orthonormal basis of the column space: left singular vectors above `cutoff`.
fn column_space(a: &ComplexMatrix, cutoff: f64) -> Vec<ComplexVector> {
    let d = svd(a);
    d.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cutoff)
        .map(|(i, _)| d.u.column(i).into_owned())
        .collect()
}

#[derive(Clone, Debug)]
pub struct UnitarySystem {
    /// Basis of the system's span, orthonormal for the invariant inner product.
    pub basis: Vec<ComplexVector>,
    /// `π_g E = E chi(g)` with `E` the basis as columns.
    pub chi: Vec<(String, ComplexMatrix)>,
    pub irreducible: bool,
    /// Dimension of the commutant of the `chi(g)`; 1 certifies irreducibility.
    pub commutant_dim: usize,
}

impl UnitarySystem {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_matrix(&self) -> ComplexMatrix {
        let d = self.basis.first().map_or(0, |v| v.len());
        from_columns(d, &self.basis)
    }

    /// Maps the basis through `embedding` (columns of a basis of `E_r` in the
    /// ambient space) to ambient coordinates.
    pub fn embed(&self, embedding: &[ComplexVector]) -> Self {
        let e = from_columns(embedding[0].len(), embedding);
        Self {
            basis: self.basis.iter().map(|v| &e * v).collect(),
            ..self.clone()
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.chi
            .iter()
            .map(|(_, m)| frobenius(&(m.adjoint() * m - ComplexMatrix::identity(m.nrows(), m.ncols()))))
            .fold(0.0, f64::max)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc {
            dim: usize,
            irreducible: bool,
            commutant_dim: usize,
            basis: Vec<VectorJson>,
            chi: serde_json::Map<String, serde_json::Value>,
        }
        let chi = self
            .chi
            .iter()
            .map(|(n, m)| (n.clone(), serde_json::to_value(MatrixJson::from(m)).expect("matrix")))
            .collect();
        serde_json::to_value(Doc {
            dim: self.dim(),
            irreducible: self.irreducible,
            commutant_dim: self.commutant_dim,
            basis: self.basis.iter().map(VectorJson::from).collect(),
            chi,
        })
        .expect("system serializes")
    }
}

/// Orthonormal basis of `{X : D_g X = X D_g ∀g}` as vectorized matrices.
fn commutant(mats: &[ComplexMatrix], tol: f64) -> Vec<ComplexVector> {
    let m = mats[0].nrows();
    let mm = m * m;
    let id = ComplexMatrix::identity(m, m);
    let mut stacked = ComplexMatrix::zeros(mm * mats.len(), mm);
    for (i, d) in mats.iter().enumerate() {
        let block = kron(&id, d) - kron(&d.transpose(), &id);
        stacked.view_mut((i * mm, 0), (mm, mm)).copy_from(&block);
    }
    let scale = mats.iter().map(spectral_norm).fold(1.0, f64::max);
    nullspace_below(&stacked, tol * scale)
}

const COMMUTANT_TOL: f64 = 1e-9;
const CLUSTER_GAP: f64 = 1e-6;

/// Splits the representation into irreducible unitary systems.
///
/// In coordinates orthonormal for `ip` the generators are unitary. A
/// self-adjoint element of their commutant, assembled from the commutant basis
/// with fixed weights, has eigenspaces that are invariant; the procedure
/// recurses into each until the commutant is one-dimensional.
pub fn decompose_irreducibles(
    rep: &MatrixRepresentation,
    ip: &InvariantInnerProduct,
    tol: &Tolerances,
) -> Result<Vec<UnitarySystem>> {
    tol.validate()?;
    let k = rep.dim();
    if ip.gram.shape() != (k, k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: ip.gram.nrows(),
        });
    }
    let chol = Cholesky::new(ip.gram.clone())
        .ok_or_else(|| Error::NotPositiveDefinite(ip.smallest_eigenvalue()))?;
    let l = chol.l();
    let l_adj = l.adjoint();
    let l_adj_inv = l_adj
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotPositiveDefinite(ip.smallest_eigenvalue()))?;
    // y = L* x turns the form into the standard one; C_g = L* B_g L^{-*}
    let unitary: Vec<(String, ComplexMatrix)> = rep
        .generators()
        .iter()
        .map(|g| (g.name.clone(), &l_adj * &g.matrix * &l_adj_inv))
        .collect();

    let mut systems = Vec::new();
    split_recursive(&unitary, ComplexMatrix::identity(k, k), &l_adj_inv, &mut systems, 0)?;
    Ok(systems)
}

fn split_recursive(
    unitary: &[(String, ComplexMatrix)],
    w: ComplexMatrix,
    to_rep: &ComplexMatrix,
    out: &mut Vec<UnitarySystem>,
    depth: usize,
) -> Result<()> {
    let restricted: Vec<ComplexMatrix> = unitary.iter().map(|(_, c)| w.adjoint() * c * &w).collect();
    let comm = commutant(&restricted, COMMUTANT_TOL);
    let m = w.ncols();
    if comm.is_empty() {
        return Err(Error::CommutantSolveFailure("commutant lost the identity".into()));
    }
    if comm.len() == 1 || m == 1 {
        let basis_m = to_rep * &w;
        out.push(UnitarySystem {
            basis: basis_m.column_iter().map(|c| c.into_owned()).collect(),
            chi: unitary
                .iter()
                .zip(restricted)
                .map(|((n, _), d)| (n.clone(), d))
                .collect(),
            irreducible: true,
            commutant_dim: comm.len(),
        });
        return Ok(());
    }
    if depth > m + 8 {
        return Err(Error::CommutantSolveFailure("recursion did not terminate".into()));
    }
    let mut h = ComplexMatrix::zeros(m, m);
    for (j, x) in comm.iter().enumerate() {
        let xm = unvec(x, m);
        let a = 1.0 / (j as f64 + 1.0) + 0.1 * (j as f64 + 2.0).sqrt();
        let b = 0.37 / (j as f64 + 1.5) + 0.05 * (j as f64 + 3.0).ln();
        h += (&xm + xm.adjoint()) * c(a, 0.0) + (&xm - xm.adjoint()) * c(0.0, b);
    }
    let (values, vectors) = hermitian_eigen(&h);
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..m {
        if values[i] - values[i - 1] > CLUSTER_GAP * scale {
            groups.push(vec![i]);
        } else {
            groups.last_mut().expect("seeded").push(i);
        }
    }
    if groups.len() == 1 {
        return Err(Error::CommutantSolveFailure(format!(
            "self-adjoint commutant element is scalar although the commutant has dimension {}",
            comm.len()
        )));
    }
    for g in groups {
        let e = ComplexMatrix::from_fn(m, g.len(), |r, j| vectors[(r, g[j])]);
        split_recursive(unitary, &w * e, to_rep, out, depth + 1)?;
    }
    Ok(())
}

/// Deterministic word sample: every word of length at most 3, then one
/// patterned word for each longer length up to `max_len`.
pub fn sample_words(generators: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    if generators == 0 {
        return out;
    }
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len.min(3) {
        let next: Vec<Vec<usize>> = layer
            .iter()
            .flat_map(|w| {
                (0..generators).map(move |g| {
                    let mut v = w.clone();
                    v.push(g);
                    v
                })
            })
            .collect();
        out.extend(next.iter().cloned());
        layer = next;
    }
    for len in 4..=max_len {
        out.push((0..len).map(|i| (i * 7 + i * i / 3 + len) % generators).collect());
    }
    out
}

fn word_matrix(mats: &[&ComplexMatrix], word: &[usize], dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(dim, dim);
    for &g in word {
        m *= mats[g];
    }
    m
}

/// Largest discrepancy between the matrix coefficients `e_b*(π_s e_a)` and
/// their reconstruction `Σ_j h′_j · chi_j(s) · η_j` from the systems, where
/// `h′_j` is the `b`-th row of the system basis and `η_j` the system
/// coordinates of `e_a`.
pub fn verify_weak_equivalence(
    rep: &MatrixRepresentation,
    systems: &[UnitarySystem],
    words: &[Vec<usize>],
    tol: &Tolerances,
) -> Result<f64> {
    let k = rep.dim();
    let total: usize = systems.iter().map(UnitarySystem::dim).sum();
    let all: Vec<ComplexVector> = systems.iter().flat_map(|s| s.basis.iter().cloned()).collect();
    let e = from_columns(k, &all);
    let found = if all.is_empty() { 0 } else { numerical_rank(&e, tol.rank_tol) };
    if total != k || found != k {
        return Err(Error::SpanDeficiency {
            expected: k,
            found: found.min(total),
        });
    }
    let e_inv = e
        .clone()
        .try_inverse()
        .ok_or(Error::SpanDeficiency { expected: k, found })?;
    let rep_mats: Vec<&ComplexMatrix> = rep.matrices().collect();
    let mut worst: f64 = 0.0;
    for w in words {
        let direct = word_matrix(&rep_mats, w, k);
        let mut block = ComplexMatrix::zeros(k, k);
        let mut offset = 0;
        for s in systems {
            let chi: Vec<&ComplexMatrix> = s.chi.iter().map(|(_, m)| m).collect();
            let cw = word_matrix(&chi, w, s.dim());
            block.view_mut((offset, offset), (s.dim(), s.dim())).copy_from(&cw);
            offset += s.dim();
        }
        let rebuilt = &e * block * &e_inv;
        let diff = (direct - rebuilt).iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    Ok(worst)
}

/// Checks that `Σ_j |f_j(π_s v)|²` does not depend on `s`, with `f_j` the
/// coordinate functionals of the system basis, for `v` ranging over the basis
/// vectors and their sum. `π` is the representation the basis lives in, so a
/// basis that does not span a unitary system shows up as drift or as
/// `π_s v` leaving the span.
pub fn norm_constancy_check(rep: &MatrixRepresentation, system: &UnitarySystem, words: &[Vec<usize>], tol: f64) -> bool {
    let k = rep.dim();
    if system.basis.is_empty() || system.basis[0].len() != k {
        return false;
    }
    let e = system.basis_matrix();
    let pinv = truncated_pinv(&e, numerical_rank(&e, 1e-12));
    let mut samples: Vec<ComplexVector> = system.basis.clone();
    samples.push(system.basis.iter().fold(ComplexVector::zeros(k), |acc, v| acc + v));
    let mats: Vec<&ComplexMatrix> = rep.matrices().collect();
    for v in &samples {
        let coords = &pinv * v;
        let reference = coords.norm_squared();
        for w in words {
            let moved = word_matrix(&mats, w, k) * v;
            let c = &pinv * &moved;
            let outside = (&moved - &e * &c).norm();
            if outside > tol.max(1e-12) * v.norm() {
                return false;
            }
            if (c.norm_squared() - reference).abs() > tol * reference.max(f64::MIN_POSITIVE) {
                return false;
            }
        }
    }
    true
}
