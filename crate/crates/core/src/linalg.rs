//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Matrices are plain `nalgebra` values over `Complex<f64>`. The spectral
//! split is built from a complex Schur form whose diagonal is reordered with
//! Givens swaps so that the outer eigenvalues lead, followed by a triangular
//! Sylvester solve that decouples the two diagonal blocks. Nothing here
//! assumes diagonalizability.

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{2πi·turns}`.
pub fn unit_root(turns: f64) -> C64 {
    C64::from_polar(1.0, std::f64::consts::TAU * turns)
}

pub fn diag(entries: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_row_slice(entries))
}

pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c(x, 0.0)))
}

pub fn basis_vector(dim: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[i] = ONE;
    v
}

pub fn ensure_finite(m: &ComplexMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() == m.ncols() && m.nrows() > 0 {
        Ok(m.nrows())
    } else {
        Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.norm()
}

/// Thin singular value decomposition `A = U Σ V*`, singular values descending.
///
/// For `m ≥ n`, `U` is `m × n` and `V` is `n × n` unitary; a wide matrix is
/// handled through its adjoint, giving `U` of size `m × m` and `V` of size
/// `n × m`. Columns belonging to a zero singular value on the thin side are
/// zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

const JACOBI_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD. nalgebra's complex bidiagonal SVD loses
/// accuracy when singular values nearly coincide (residuals near 1e-6 on
/// 3 × 3 idempotents), which is fatal for the subspace bases built here.
pub fn svd(a: &ComplexMatrix) -> Svd {
    jacobi_svd(a, true)
}

fn jacobi_svd(a: &ComplexMatrix, vectors: bool) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = jacobi_svd(&a.adjoint(), vectors);
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }
    let mut w = a.clone();
    let mut v = if vectors {
        ComplexMatrix::identity(n, n)
    } else {
        ComplexMatrix::zeros(0, n)
    };
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate (w_p, e^{-iφ} w_q), whose inner product is real
                let phase = gamma.unscale(g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut w, &mut v] {
                    for r in 0..mat.nrows() {
                        let x = mat[(r, p)];
                        let y = mat[(r, q)] * phase;
                        mat[(r, p)] = x.scale(cs) - y.scale(sn);
                        mat[(r, q)] = x.scale(sn) + y.scale(cs);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut u = ComplexMatrix::zeros(m, n);
    let mut vs = ComplexMatrix::zeros(v.nrows(), n);
    if vectors {
        for (k, &j) in order.iter().enumerate() {
            if norms[j] > 0.0 {
                u.set_column(k, &w.column(j).unscale(norms[j]));
            }
            vs.set_column(k, &v.column(j));
        }
    }
    Svd {
        u,
        singular_values: order.iter().map(|&j| norms[j]).collect(),
        v: vs,
    }
}

pub fn singular_values(m: &ComplexMatrix) -> DVector<f64> {
    if m.is_empty() {
        return DVector::zeros(0);
    }
    DVector::from_vec(jacobi_svd(m, false).singular_values)
}

pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().copied().fold(0.0, f64::max)
}

/// Number of singular values above `tol` times the largest one.
pub fn numerical_rank(m: &ComplexMatrix, tol: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// Number of singular values above an absolute threshold.
pub fn rank_above(m: &ComplexMatrix, threshold: f64) -> usize {
    singular_values(m).iter().filter(|&&s| s > threshold).count()
}

/// Gram–Schmidt with re-orthogonalization. A vector whose residual falls to
/// `tol` times its own norm (or to zero) is dropped.
pub fn orthonormal_basis(vectors: &[ComplexVector], tol: f64) -> Vec<ComplexVector> {
    let mut out: Vec<ComplexVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let proj = q.dotc(&w);
                w.axpy(-proj, q, ONE);
            }
        }
        let n = w.norm();
        if n > tol * scale {
            out.push(w.unscale(n));
        }
    }
    out
}

pub fn columns(m: &ComplexMatrix) -> Vec<ComplexVector> {
    m.column_iter().map(|c| c.into_owned()).collect()
}

pub fn from_columns(dim: usize, cols: &[ComplexVector]) -> ComplexMatrix {
    if cols.is_empty() {
        return ComplexMatrix::zeros(dim, 0);
    }
    ComplexMatrix::from_columns(cols)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0, 0));
    }
    let sym = (m + m.adjoint()).unscale(2.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Orthonormal basis of `{x : ‖Ax‖ ≤ tol·σ_max(A)}`.
pub fn nullspace(a: &ComplexMatrix, tol: f64) -> Vec<ComplexVector> {
    let (values, v) = right_singular(a);
    let top = values.first().copied().unwrap_or(0.0);
    collect_below(&values, &v, tol * top)
}

/// Right singular vectors whose singular value is at most `cutoff`. Use this
/// when `A` is a difference that may be pure rounding noise, where a cutoff
/// relative to `σ_max(A)` would reject everything.
pub fn nullspace_below(a: &ComplexMatrix, cutoff: f64) -> Vec<ComplexVector> {
    let (values, v) = right_singular(a);
    collect_below(&values, &v, cutoff)
}

fn right_singular(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let (m, n) = a.shape();
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0, 0));
    }
    // thin SVD only yields min(m, n) right vectors; pad to at least square
    let padded = if m < n {
        let mut p = ComplexMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let d = svd(&padded);
    (d.singular_values, d.v)
}

fn collect_below(values: &[f64], v: &ComplexMatrix, cutoff: f64) -> Vec<ComplexVector> {
    values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(i, _)| v.column(i).into_owned())
        .collect()
}

/// Moore–Penrose inverse keeping only the `rank` largest singular values.
pub fn truncated_pinv(a: &ComplexMatrix, rank: usize) -> ComplexMatrix {
    let d = svd(a);
    let mut out = ComplexMatrix::zeros(a.ncols(), a.nrows());
    for (i, &s) in d.singular_values.iter().enumerate().take(rank) {
        if s == 0.0 {
            continue;
        }
        out += (d.v.column(i) * d.u.column(i).adjoint()).unscale(s);
    }
    out
}

/// Principal angles between the spans of two vector families, ascending.
/// When the dimensions differ the surplus is reported as right angles.
pub fn principal_angles(a: &[ComplexVector], b: &[ComplexVector], tol: f64) -> Vec<f64> {
    let mut qa = orthonormal_basis(a, tol);
    let mut qb = orthonormal_basis(b, tol);
    if qa.len() < qb.len() {
        std::mem::swap(&mut qa, &mut qb);
    }
    let (ka, kb) = (qa.len(), qb.len());
    let mut angles = Vec::with_capacity(ka);
    if kb > 0 {
        let dim = qa[0].len();
        let ma = from_columns(dim, &qa);
        let mb = from_columns(dim, &qb);
        let cross = ma.adjoint() * &mb;
        let mut cosines: Vec<f64> = singular_values(&cross).iter().copied().collect();
        cosines.sort_by(|x, y| y.total_cmp(x));
        // small angles are resolved through sines, which keep full precision
        let mut sines: Vec<f64> = singular_values(&(&mb - &ma * &cross)).iter().copied().collect();
        sines.sort_by(|x, y| x.total_cmp(y));
        for (cs, sn) in cosines.iter().zip(&sines) {
            let angle = if cs * cs > 0.5 {
                sn.clamp(0.0, 1.0).asin()
            } else {
                cs.clamp(0.0, 1.0).acos()
            };
            angles.push(angle);
        }
    }
    angles.resize(ka, std::f64::consts::FRAC_PI_2);
    angles
}

/// Component of `v` outside the span of the orthonormal family `q`.
pub fn residual_outside(v: &ComplexVector, q: &[ComplexVector]) -> ComplexVector {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in q {
            let proj = b.dotc(&w);
            w.axpy(-proj, b, ONE);
        }
    }
    w
}

/// Complex Schur form `A = U T U*` with `T` upper triangular.
#[derive(Clone, Debug)]
pub(crate) struct SchurForm {
    pub u: ComplexMatrix,
    pub t: ComplexMatrix,
}

impl SchurForm {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let d = ensure_square(a)?;
        ensure_finite(a, "matrix")?;
        let schur = Schur::try_new(a.clone(), f64::EPSILON, 1000 * d.max(10)).ok_or_else(|| {
            Error::NoConvergence("complex Schur iteration did not converge".into())
        })?;
        let (u, mut t) = schur.unpack();
        for j in 0..d {
            for i in (j + 1)..d {
                t[(i, j)] = ZERO;
            }
        }
        Ok(Self { u, t })
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.t.diagonal().iter().copied().collect()
    }

    /// Exchange the diagonal entries at `k` and `k + 1` with a unitary rotation.
    fn swap_adjacent(&mut self, k: usize) {
        let a = self.t[(k, k)];
        let b = self.t[(k, k + 1)];
        let c = self.t[(k + 1, k + 1)];
        // (b, c - a) is the eigenvector of the 2x2 block for the eigenvalue c
        let (v1, v2) = (b, c - a);
        let r = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
        if r == 0.0 {
            return;
        }
        let (cs, sn) = (v1.unscale(r), v2.unscale(r));
        let n = self.t.nrows();
        for i in 0..n {
            let (x, y) = (self.t[(i, k)], self.t[(i, k + 1)]);
            self.t[(i, k)] = x * cs + y * sn;
            self.t[(i, k + 1)] = -x * sn.conj() + y * cs.conj();
            let (x, y) = (self.u[(i, k)], self.u[(i, k + 1)]);
            self.u[(i, k)] = x * cs + y * sn;
            self.u[(i, k + 1)] = -x * sn.conj() + y * cs.conj();
        }
        for j in 0..n {
            let (x, y) = (self.t[(k, j)], self.t[(k + 1, j)]);
            self.t[(k, j)] = cs.conj() * x + sn.conj() * y;
            self.t[(k + 1, j)] = -sn * x + cs * y;
        }
        self.t[(k + 1, k)] = ZERO;
    }

    /// Stable bubble sort of the diagonal by `keys`, carried along with the swaps.
    pub fn reorder(&mut self, keys: &mut [usize]) {
        let n = keys.len();
        loop {
            let mut swapped = false;
            for k in 0..n.saturating_sub(1) {
                if keys[k] > keys[k + 1] {
                    self.swap_adjacent(k);
                    keys.swap(k, k + 1);
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
    }
}

/// Solve `T11 X − X T22 = C` for upper-triangular `T11`, `T22` with disjoint spectra.
pub(crate) fn triangular_sylvester(
    t11: &ComplexMatrix,
    t22: &ComplexMatrix,
    rhs: &ComplexMatrix,
) -> ComplexMatrix {
    let k = t11.nrows();
    let m = t22.nrows();
    let mut x = ComplexMatrix::zeros(k, m);
    for j in 0..m {
        let mut b: ComplexVector = rhs.column(j).into_owned();
        for i in 0..j {
            let coef = t22[(i, j)];
            let xi = x.column(i).into_owned();
            b.axpy(coef, &xi, ONE);
        }
        let shift = t22[(j, j)];
        for r in (0..k).rev() {
            let mut acc = b[r];
            for cidx in (r + 1)..k {
                acc -= t11[(r, cidx)] * x[(cidx, j)];
            }
            x[(r, j)] = acc / (t11[(r, r)] - shift);
        }
    }
    x
}

/// Invariant subspaces of `A` for `|λ| ≥ boundary` (outer) and `|λ| < boundary`
/// (inner), with the oblique projector onto the outer one along the inner one.
#[derive(Clone, Debug)]
pub struct SpectralSplit {
    pub outer_basis: Vec<ComplexVector>,
    pub inner_basis: Vec<ComplexVector>,
    pub projector: ComplexMatrix,
    pub outer_eigenvalues: Vec<C64>,
    pub inner_eigenvalues: Vec<C64>,
    /// Leading block of the reordered Schur form, acting on `outer_basis`.
    pub(crate) outer_block: ComplexMatrix,
}

pub fn schur_spectral_split(a: &ComplexMatrix, boundary: f64, rank_tol: f64) -> Result<SpectralSplit> {
    if !(boundary > 0.0 && boundary < 1.0) {
        return Err(Error::MalformedParameters(format!(
            "boundary must lie in (0, 1), got {boundary}"
        )));
    }
    let mut schur = SchurForm::new(a)?;
    let d = schur.t.nrows();
    let eig = schur.eigenvalues();
    for z in &eig {
        if (z.norm() - boundary).abs() <= rank_tol {
            return Err(Error::BoundaryCollision {
                modulus: z.norm(),
                boundary,
            });
        }
    }
    let mut keys: Vec<usize> = eig.iter().map(|z| usize::from(z.norm() < boundary)).collect();
    schur.reorder(&mut keys);
    let k = keys.iter().filter(|&&x| x == 0).count();
    let m = d - k;

    let t11 = schur.t.view((0, 0), (k, k)).into_owned();
    let t12 = schur.t.view((0, k), (k, m)).into_owned();
    let t22 = schur.t.view((k, k), (m, m)).into_owned();
    let x = triangular_sylvester(&t11, &t22, &(-t12));

    let mut p_schur = ComplexMatrix::zeros(d, d);
    for i in 0..k {
        p_schur[(i, i)] = ONE;
    }
    p_schur.view_mut((0, k), (k, m)).copy_from(&(-&x));
    let projector = &schur.u * p_schur * schur.u.adjoint();

    let outer_basis: Vec<ComplexVector> = (0..k).map(|j| schur.u.column(j).into_owned()).collect();
    let mut stacked = ComplexMatrix::zeros(d, m);
    stacked.view_mut((0, 0), (k, m)).copy_from(&x);
    for j in 0..m {
        stacked[(k + j, j)] = ONE;
    }
    let inner_raw = columns(&(&schur.u * stacked));
    let inner_basis = orthonormal_basis(&inner_raw, 1e-12);

    let diag = schur.eigenvalues();
    Ok(SpectralSplit {
        outer_basis,
        inner_basis,
        projector,
        outer_eigenvalues: diag[..k].to_vec(),
        inner_eigenvalues: diag[k..].to_vec(),
        outer_block: t11,
    })
}

/// Checks that an upper-triangular block is similar to a diagonal matrix with
/// unimodular entries, i.e. that its powers stay bounded and do not decay.
pub(crate) fn check_unimodular_semisimple(t: &ComplexMatrix, boundary: f64) -> Result<()> {
    const UNIT_TOL: f64 = 1e-6;
    const CLUSTER_TOL: f64 = 1e-6;
    const JORDAN_TOL: f64 = 1e-6;
    let k = t.nrows();
    for i in 0..k {
        let r = t[(i, i)].norm();
        if r > 1.0 + UNIT_TOL {
            return Err(Error::NotPowerBounded(format!(
                "eigenvalue of modulus {r} outside the closed unit disc"
            )));
        }
        if r < 1.0 - UNIT_TOL {
            return Err(Error::BoundaryCollision {
                modulus: r,
                boundary,
            });
        }
    }
    // group eigenvalues into clusters, make the clusters contiguous, then any
    // sizable coupling inside a cluster is a nontrivial Jordan block
    let mut cluster_of = vec![usize::MAX; k];
    let mut clusters = 0;
    for i in 0..k {
        if cluster_of[i] != usize::MAX {
            continue;
        }
        cluster_of[i] = clusters;
        for j in (i + 1)..k {
            if cluster_of[j] == usize::MAX && (t[(i, i)] - t[(j, j)]).norm() < CLUSTER_TOL {
                cluster_of[j] = clusters;
            }
        }
        clusters += 1;
    }
    let mut schur = SchurForm {
        u: ComplexMatrix::identity(k, k),
        t: t.clone(),
    };
    schur.reorder(&mut cluster_of);
    let scale = frobenius(t).max(1.0);
    for i in 0..k {
        for j in (i + 1)..k {
            if cluster_of[i] == cluster_of[j] && schur.t[(i, j)].norm() > JORDAN_TOL * scale {
                return Err(Error::NotPowerBounded(format!(
                    "unimodular eigenvalue {} carries a Jordan block",
                    schur.t[(i, i)]
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.shape() == b.shape() && frobenius(&(a - b)) < tol
    }

    #[test]
    fn svd_reconstructs_near_degenerate_idempotent() {
        // oblique idempotent with singular values 1.0155 and 1 + 1e-16
        let q = ComplexMatrix::from_column_slice(
            3,
            3,
            &[
                c(0.8178487577619644, 0.029380051968566093),
                c(-0.13130693079829292, 0.06601076192241459),
                c(0.3242205359059823, 0.2735360179708674),
                c(-0.06521088418968801, -0.04953399751043444),
                c(0.9385861289263302, -0.021981073018281977),
                c(0.011375080654359299, 0.18792990291025713),
                c(0.2169209273667554, -0.24739965818932877),
                c(0.1054175167752187, -0.2399502349339666),
                c(0.2435651133117065, -0.007398978950283769),
            ],
        );
        let d = svd(&q);
        let sigma = ComplexMatrix::from_diagonal(&DVector::from_iterator(3, d.singular_values.iter().map(|&x| c(x, 0.0))));
        assert!(close(&(&d.u * sigma * d.v.adjoint()), &q, 1e-14));
        assert!(close(&(d.u.adjoint() * &d.u), &ComplexMatrix::identity(3, 3), 1e-14));
        assert!(d.singular_values[2] < 1e-14);
    }

    #[test]
    fn svd_of_wide_and_tall_matrices() {
        let a = ComplexMatrix::from_fn(2, 4, |i, j| c((i * 3 + j) as f64 - 2.5, (i as f64 - j as f64) * 0.5));
        for m in [a.clone(), a.adjoint()] {
            let d = svd(&m);
            let k = d.singular_values.len();
            assert_eq!(k, 2);
            let sigma = ComplexMatrix::from_diagonal(&DVector::from_iterator(k, d.singular_values.iter().map(|&x| c(x, 0.0))));
            let thin_u = d.u.columns(0, k).into_owned();
            let thin_v = d.v.columns(0, k).into_owned();
            assert!(close(&(thin_u * sigma * thin_v.adjoint()), &m, 1e-12));
            assert!(d.singular_values[0] >= d.singular_values[1]);
        }
    }

    #[test]
    fn identity_split_is_identity() {
        let a = ComplexMatrix::identity(3, 3);
        let s = schur_spectral_split(&a, 0.99, 1e-8).unwrap();
        assert!(close(&s.projector, &a, 1e-12));
        assert_eq!(s.outer_basis.len(), 3);
        assert!(s.inner_basis.is_empty());
    }

    #[test]
    fn diagonal_split_selects_unit_eigenvalue() {
        let a = diag(&[ONE, c(0.5, 0.0)]);
        let s = schur_spectral_split(&a, 0.99, 1e-8).unwrap();
        assert!(close(&s.projector, &diag(&[ONE, ZERO]), 1e-12));
    }

    #[test]
    fn inner_jordan_block_projects_to_zero() {
        let a = real_matrix(2, 2, &[0.5, 1.0, 0.0, 0.5]);
        let s = schur_spectral_split(&a, 0.99, 1e-8).unwrap();
        assert!(s.projector.norm() < 1e-14);
        assert_eq!(s.inner_basis.len(), 2);
    }

    #[test]
    fn oblique_projector_matches_hand_computation() {
        // A = [[1, 1], [0, 0.5]]: eigenvectors (1,0) for 1 and (1,-0.5) for 0.5.
        // P = V diag(1,0) V^{-1} = [[1, 2], [0, 0]].
        let a = real_matrix(2, 2, &[1.0, 1.0, 0.0, 0.5]);
        let s = schur_spectral_split(&a, 0.99, 1e-8).unwrap();
        let expected = real_matrix(2, 2, &[1.0, 2.0, 0.0, 0.0]);
        assert!(close(&s.projector, &expected, 1e-12), "{}", s.projector);
        assert!((&s.projector * &a - &a * &s.projector).norm() < 1e-12);
    }

    #[test]
    fn collision_is_an_error() {
        let a = diag(&[c(0.99, 0.0), ONE]);
        assert!(matches!(
            schur_spectral_split(&a, 0.99, 1e-8),
            Err(Error::BoundaryCollision { .. })
        ));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            schur_spectral_split(&rect, 0.99, 1e-8),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn ranks() {
        assert_eq!(numerical_rank(&ComplexMatrix::identity(4, 4), 1e-8), 4);
        assert_eq!(numerical_rank(&ComplexMatrix::zeros(3, 3), 1e-8), 0);
        assert_eq!(numerical_rank(&diag(&[ONE, c(1e-12, 0.0)]), 1e-8), 1);
    }

    #[test]
    fn orthonormal_basis_examples() {
        let v = |a: f64, b: f64| ComplexVector::from_vec(vec![c(a, 0.0), c(b, 0.0)]);
        let out = orthonormal_basis(&[v(1.0, 0.0), v(0.0, 2.0)], 1e-8);
        assert_eq!(out.len(), 2);
        assert!((&out[1] - v(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(orthonormal_basis(&[v(1.0, 0.0), v(1.0, 1e-12)], 1e-8).len(), 1);
        assert!(orthonormal_basis(&[], 1e-8).is_empty());
    }

    #[test]
    fn unimodular_jordan_is_rejected() {
        let j = real_matrix(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            check_unimodular_semisimple(&j, 0.99),
            Err(Error::NotPowerBounded(_))
        ));
        let rot = diag(&[unit_root(0.2), unit_root(0.2)]);
        check_unimodular_semisimple(&rot, 0.99).unwrap();
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = real_matrix(1, 3, &[1.0, 1.0, 0.0]);
        let ns = nullspace(&a, 1e-10);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((&a * v).norm() < 1e-12);
        }
    }

    #[test]
    fn principal_angle_of_axes() {
        let e1 = basis_vector(2, 0);
        let e2 = basis_vector(2, 1);
        let ang = principal_angles(std::slice::from_ref(&e1), &[e2], 1e-12);
        assert!((ang[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(principal_angles(std::slice::from_ref(&e1), std::slice::from_ref(&e1), 1e-12)[0] < 1e-14);
    }
}
