//! The splitting `E = E_r ⊕ E_aws` computed three ways: from the spectrum of a
//! single generator, from the minimal idempotent of the closure, and from the
//! kernel of Følner-averaged Gram matrices.

use serde::{Deserialize, Serialize};

use crate::closure::{closure_or_partial, find_minimal_idempotent, approximate_closure};
use crate::error::{Error, Result};
use crate::folner::BoxSequence;
use crate::linalg::{
    check_unimodular_semisimple, frobenius, from_columns, hermitian_eigen, orthonormal_basis,
    principal_angles, residual_outside, schur_spectral_split, singular_values, svd, ComplexMatrix,
    ComplexVector, SchurForm, C64,
};
use crate::representation::{MatrixJson, MatrixRepresentation, VectorJson};
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Spectral,
    Idempotent,
    Gram,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Spectral => "spectral",
            Method::Idempotent => "idempotent",
            Method::Gram => "gram",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residuals {
    /// `‖Q² − Q‖_F`.
    pub idempotency: f64,
    /// `max_g ‖Qπ_g − π_gQ‖_F`.
    pub commutation: f64,
    /// Largest component of `π_g v` outside the subspace containing `v`.
    pub invariance: f64,
    /// Largest principal angle between the Gram near-kernel and `ker Q`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram_kernel_angle: Option<f64>,
    /// Følner index at which the Gram near-kernel settled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram_index: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct JdLGSplit {
    pub basis_r: Vec<ComplexVector>,
    pub basis_aws: Vec<ComplexVector>,
    pub projector_q: ComplexMatrix,
    pub method: Method,
    pub residuals: Residuals,
}

impl JdLGSplit {
    fn assemble(
        rep: &MatrixRepresentation,
        basis_r: Vec<ComplexVector>,
        basis_aws: Vec<ComplexVector>,
        projector_q: ComplexMatrix,
        method: Method,
    ) -> Self {
        let idempotency = frobenius(&(&projector_q * &projector_q - &projector_q));
        let mut commutation: f64 = 0.0;
        let mut invariance: f64 = 0.0;
        for g in rep.matrices() {
            commutation = commutation.max(frobenius(&(&projector_q * g - g * &projector_q)));
            for basis in [&basis_r, &basis_aws] {
                for v in basis.iter() {
                    invariance = invariance.max(residual_outside(&(g * v), basis).norm());
                }
            }
        }
        Self {
            basis_r,
            basis_aws,
            projector_q,
            method,
            residuals: Residuals {
                idempotency,
                commutation,
                invariance,
                gram_kernel_angle: None,
                gram_index: None,
            },
        }
    }

    /// Bases read off an idempotent: `ran Q` and `ker Q` from its SVD. The
    /// nonzero singular values of an idempotent are at least 1.
    pub fn from_projector(rep: &MatrixRepresentation, q: ComplexMatrix, method: Method) -> Result<Self> {
        let d = rep.dim();
        if q.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: q.nrows(),
            });
        }
        let (basis_r, basis_aws) = range_and_kernel(&q);
        Ok(Self::assemble(rep, basis_r, basis_aws, q, method))
    }

    pub fn dim(&self) -> usize {
        self.projector_q.nrows()
    }

    pub fn dim_r(&self) -> usize {
        self.basis_r.len()
    }

    pub fn dim_aws(&self) -> usize {
        self.basis_aws.len()
    }

    /// The module-level acceptance conditions on residuals and dimensions.
    pub fn satisfies_invariants(&self, tol: &Tolerances) -> bool {
        self.dim_r() + self.dim_aws() == self.dim()
            && self.residuals.idempotency < 10.0 * tol.idempotent_tol
            && self.residuals.commutation < 10.0 * tol.idempotent_tol
            && self.residuals.invariance < 10.0 * tol.rank_tol
    }

    /// Whether `v` lies in `span(basis_aws)` up to a relative angle tolerance.
    pub fn contains_aws(&self, v: &ComplexVector, angle_tol: f64) -> bool {
        let n = v.norm();
        n == 0.0 || residual_outside(v, &self.basis_aws).norm() <= angle_tol * n
    }

    pub fn to_json_value(&self, tol: &Tolerances) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc<'a> {
            method: Method,
            dim: usize,
            dim_r: usize,
            dim_aws: usize,
            basis_r: Vec<VectorJson>,
            basis_aws: Vec<VectorJson>,
            projector_q: MatrixJson,
            residuals: &'a Residuals,
            tolerances: &'a Tolerances,
        }
        serde_json::to_value(Doc {
            method: self.method,
            dim: self.dim(),
            dim_r: self.dim_r(),
            dim_aws: self.dim_aws(),
            basis_r: self.basis_r.iter().map(VectorJson::from).collect(),
            basis_aws: self.basis_aws.iter().map(VectorJson::from).collect(),
            projector_q: MatrixJson::from(&self.projector_q),
            residuals: &self.residuals,
            tolerances: tol,
        })
        .expect("split serializes")
    }
}

fn range_and_kernel(q: &ComplexMatrix) -> (Vec<ComplexVector>, Vec<ComplexVector>) {
    let d = svd(q);
    let rank = d.singular_values.iter().filter(|&&s| s > 0.5).count();
    let range = (0..rank).map(|i| d.u.column(i).into_owned()).collect();
    let kernel = (rank..q.ncols()).map(|i| d.v.column(i).into_owned()).collect();
    (range, kernel)
}

fn single_generator(rep: &MatrixRepresentation) -> Result<&ComplexMatrix> {
    match rep.generators() {
        [g] => Ok(&g.matrix),
        gens => Err(Error::MalformedParameters(format!(
            "expected exactly one generator, found {}",
            gens.len()
        ))),
    }
}

/// Split from the spectrum of the single generator `T`: `E_r` is the
/// invariant subspace for `|λ| ≥ spectral_boundary`. `T` on `E_r` must be
/// diagonalizable with unimodular eigenvalues.
pub fn decompose_spectral(rep: &MatrixRepresentation, tol: &Tolerances) -> Result<JdLGSplit> {
    tol.validate()?;
    let t = single_generator(rep)?;
    let split = schur_spectral_split(t, tol.spectral_boundary, tol.rank_tol)?;
    check_unimodular_semisimple(&split.outer_block, tol.spectral_boundary)?;
    Ok(JdLGSplit::assemble(
        rep,
        split.outer_basis,
        split.inner_basis,
        split.projector,
        Method::Spectral,
    ))
}

/// Split from the minimal idempotent of the (possibly partial) closure net.
pub fn decompose_idempotent(rep: &MatrixRepresentation, tol: &Tolerances) -> Result<JdLGSplit> {
    tol.validate()?;
    let net = closure_or_partial(rep, tol)?;
    let q = find_minimal_idempotent(&net, tol)?;
    JdLGSplit::from_projector(rep, q, Method::Idempotent)
}

const GRAM_WINDOW: usize = 10;
const GRAM_FIRST_CHECKPOINT: usize = 16;
const DECAY_RATIO: f64 = 0.75;

/// `E_aws` as the vanishing directions of `G_n = avg_{s∈F_n} π_s*π_s`.
///
/// On `E_aws` the quadratic form decays like `1/n`, elsewhere it stays
/// bounded below, so a direction belongs to the near-kernel when its
/// eigenvalue is negligible or halves between the checkpoints `n/2` and `n`.
/// At every doubling checkpoint the near-kernels of the last
/// [`GRAM_WINDOW`] indices must agree in dimension and sit within
/// `convergence_tol` of each other. `Q` and `E_r` come from the idempotent
/// method; the near-kernel is projected onto `ker Q` and the angle between
/// the two is reported.
pub fn decompose_by_gram(rep: &MatrixRepresentation, folner: &BoxSequence, tol: &Tolerances) -> Result<JdLGSplit> {
    tol.validate()?;
    let k = rep.generators().len();
    if folner.rank() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: folner.rank(),
        });
    }
    if folner.drift() != 0 {
        return Err(Error::MalformedParameters(
            "Gram accumulation needs nested boxes (zero drift)".into(),
        ));
    }
    rep.effective_index_model(tol.rank_tol.max(1e-10))?;
    let idem = decompose_idempotent(rep, tol)?;
    let (index, kernel) = gram_near_kernel(rep, folner, tol)?;

    let d = rep.dim();
    if kernel.len() != idem.dim_aws() {
        return Err(Error::MethodDisagreement(format!(
            "Gram near-kernel has dimension {} but ker Q has dimension {}",
            kernel.len(),
            idem.dim_aws()
        )));
    }
    let angle = principal_angles(&kernel, &idem.basis_aws, 1e-12)
        .into_iter()
        .fold(0.0, f64::max);
    let complement = ComplexMatrix::identity(d, d) - &idem.projector_q;
    let projected: Vec<ComplexVector> = kernel.iter().map(|v| &complement * v).collect();
    let basis_aws = orthonormal_basis(&projected, 1e-8);
    if basis_aws.len() != kernel.len() {
        return Err(Error::MethodDisagreement(
            "Gram near-kernel collapses under I − Q".into(),
        ));
    }
    let mut split = JdLGSplit::assemble(rep, idem.basis_r, basis_aws, idem.projector_q, Method::Gram);
    split.residuals.gram_kernel_angle = Some(angle);
    split.residuals.gram_index = Some(index);
    Ok(split)
}

/// Incremental `n·G_n` over nested boxes.
struct GramAccumulator<'a> {
    rep: &'a MatrixRepresentation,
    folner: &'a BoxSequence,
    powers: Vec<Vec<ComplexMatrix>>,
    running: ComplexMatrix,
    sum: ComplexMatrix,
    count: usize,
    n: usize,
}

impl<'a> GramAccumulator<'a> {
    fn new(rep: &'a MatrixRepresentation, folner: &'a BoxSequence) -> Result<Self> {
        let d = rep.dim();
        let start = usize::try_from(folner.start())
            .map_err(|_| Error::MalformedParameters("negative box start".into()))?;
        let running = if rep.generators().len() == 1 {
            let mut p = ComplexMatrix::identity(d, d);
            for _ in 0..start {
                p *= &rep.generators()[0].matrix;
            }
            p
        } else {
            ComplexMatrix::zeros(0, 0)
        };
        Ok(Self {
            rep,
            folner,
            powers: vec![vec![ComplexMatrix::identity(d, d)]; rep.generators().len()],
            running,
            sum: ComplexMatrix::zeros(d, d),
            count: 0,
            n: 0,
        })
    }

    fn advance(&mut self, tol: &Tolerances) -> Result<()> {
        self.n += 1;
        if self.rep.generators().len() == 1 {
            let p = self.running.clone();
            if frobenius(&p) > tol.norm_cap {
                return Err(Error::NotPowerBounded(format!(
                    "power {} exceeds the norm cap",
                    self.folner.start() + self.n as i64 - 1
                )));
            }
            self.sum += p.adjoint() * &p;
            self.count += 1;
            self.running = p * &self.rep.generators()[0].matrix;
            return Ok(());
        }
        let top = (self.folner.start() + self.n as i64 - 1) as usize;
        for (i, table) in self.powers.iter_mut().enumerate() {
            while table.len() <= top {
                let next = table.last().expect("seeded") * &self.rep.generators()[i].matrix;
                table.push(next);
            }
        }
        let shell = self.folner.shell(self.n);
        let powers = &self.powers;
        let terms: Vec<Result<ComplexMatrix>> = {
            use rayon::prelude::*;
            shell
                .par_iter()
                .map(|s| {
                    let mut m = powers[0][s[0] as usize].clone();
                    for (i, &e) in s.iter().enumerate().skip(1) {
                        m *= &powers[i][e as usize];
                    }
                    if frobenius(&m) > tol.norm_cap {
                        return Err(Error::NotPowerBounded(format!("element {s:?} exceeds the norm cap")));
                    }
                    Ok(m.adjoint() * m)
                })
                .collect()
        };
        for t in terms {
            self.sum += t?;
            self.count += 1;
        }
        Ok(())
    }

    fn gram(&self) -> ComplexMatrix {
        self.sum.unscale(self.count as f64)
    }
}

fn gram_near_kernel(
    rep: &MatrixRepresentation,
    folner: &BoxSequence,
    tol: &Tolerances,
) -> Result<(usize, Vec<ComplexVector>)> {
    let mut acc = GramAccumulator::new(rep, folner)?;
    let mut checkpoint = GRAM_FIRST_CHECKPOINT;
    let mut previous: Option<Vec<f64>> = None;
    let mut window: Vec<Vec<ComplexVector>> = Vec::with_capacity(GRAM_WINDOW);
    while acc.n < tol.max_iterations {
        acc.advance(tol)?;
        let n = acc.n;
        if n + GRAM_WINDOW <= checkpoint {
            continue;
        }
        let (values, vectors) = hermitian_eigen(&acc.gram());
        if let Some(prev) = &previous {
            window.push(near_kernel(&values, &vectors, prev, tol));
        }
        if n == checkpoint {
            if let Some(v) = settled(&window, tol) {
                return Ok((n, v));
            }
            previous = Some(values);
            window.clear();
            checkpoint *= 2;
        }
    }
    Err(Error::NoConvergence(format!(
        "Gram near-kernel did not settle within {} Følner indices",
        tol.max_iterations
    )))
}

fn near_kernel(values: &[f64], vectors: &ComplexMatrix, previous: &[f64], tol: &Tolerances) -> Vec<ComplexVector> {
    let top = values.iter().copied().fold(0.0, f64::max);
    let mut m = 0;
    for (i, (&v, &p)) in values.iter().zip(previous).enumerate() {
        let negligible = v <= tol.rank_tol * top.max(f64::MIN_POSITIVE);
        let decaying = p > 0.0 && v / p < DECAY_RATIO;
        if !(negligible || decaying) {
            break;
        }
        m = i + 1;
    }
    (0..m).map(|j| vectors.column(j).into_owned()).collect()
}

fn settled(window: &[Vec<ComplexVector>], tol: &Tolerances) -> Option<Vec<ComplexVector>> {
    if window.len() < GRAM_WINDOW {
        return None;
    }
    let dim = window[0].len();
    if window.iter().any(|w| w.len() != dim) {
        return None;
    }
    for pair in window.windows(2) {
        let angle = principal_angles(&pair[0], &pair[1], 1e-12)
            .into_iter()
            .fold(0.0, f64::max);
        if angle >= tol.convergence_tol {
            return None;
        }
    }
    window.last().cloned()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reconciliation {
    pub projector_distance: f64,
    pub principal_angles_r: Vec<f64>,
    pub principal_angles_aws: Vec<f64>,
}

impl Reconciliation {
    pub fn max_angle(&self) -> f64 {
        self.principal_angles_r
            .iter()
            .chain(&self.principal_angles_aws)
            .copied()
            .fold(0.0, f64::max)
    }
}

pub fn reconcile(a: &JdLGSplit, b: &JdLGSplit) -> Result<Reconciliation> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(Reconciliation {
        projector_distance: frobenius(&(&a.projector_q - &b.projector_q)),
        principal_angles_r: principal_angles(&a.basis_r, &b.basis_r, 1e-12),
        principal_angles_aws: principal_angles(&a.basis_aws, &b.basis_aws, 1e-12),
    })
}

/// For a power-bounded group action the whole space is reversible.
///
/// Every generator must be invertible and the inverses must generate a
/// power-bounded family (sampled through their closure). Returns whether the
/// split has `E_aws = {0}`.
pub fn verify_group_reversibility(rep: &MatrixRepresentation, split: &JdLGSplit, tol: &Tolerances) -> Result<bool> {
    let mut inverses = Vec::with_capacity(rep.generators().len());
    for g in rep.generators() {
        let sv = singular_values(&g.matrix);
        let top = sv.iter().copied().fold(0.0, f64::max);
        let bottom = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if !(bottom > tol.rank_tol * top) {
            return Err(Error::NotAGroup(format!("generator `{}` is singular", g.name)));
        }
        let inv = g
            .matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NotAGroup(format!("generator `{}` is singular", g.name)))?;
        inverses.push((format!("{}^-1", g.name), inv));
    }
    let inverse_rep = MatrixRepresentation::new(inverses)?;
    match approximate_closure(&inverse_rep, tol) {
        Ok(_) | Err(Error::BudgetExhausted(_)) => {}
        Err(Error::NotPowerBounded(why)) => {
            return Err(Error::NotAGroup(format!("inverse iterates are unbounded: {why}")))
        }
        Err(e) => return Err(e),
    }
    Ok(split.basis_aws.is_empty())
}

#[derive(Clone, Debug, Serialize)]
pub struct ShadowIdempotent {
    pub n: usize,
    pub defect: f64,
    #[serde(serialize_with = "serialize_matrix")]
    pub candidate: ComplexMatrix,
}

fn serialize_matrix<S: serde::Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from(m).serialize(s)
}

/// The `n ≤ N` minimizing `‖T^{2n} − T^n‖_F` (first minimizer on ties), with
/// `T^n` as the candidate for `Q`. Fails with `NoneFound` when even the best
/// defect is above `idempotent_tol`.
pub fn ultrafilter_shadow_idempotent(rep: &MatrixRepresentation, bound: usize, tol: &Tolerances) -> Result<ShadowIdempotent> {
    let t = single_generator(rep)?;
    if bound == 0 {
        return Err(Error::MalformedParameters("search bound must be positive".into()));
    }
    let d = t.nrows();
    let mut powers = Vec::with_capacity(2 * bound + 1);
    powers.push(ComplexMatrix::identity(d, d));
    for i in 1..=2 * bound {
        let next = &powers[i - 1] * t;
        if frobenius(&next) > tol.norm_cap {
            return Err(Error::NotPowerBounded(format!("T^{i} exceeds the norm cap")));
        }
        powers.push(next);
    }
    let mut best = (1, f64::INFINITY);
    for n in 1..=bound {
        let defect = frobenius(&(&powers[2 * n] - &powers[n]));
        if defect < best.1 {
            best = (n, defect);
        }
    }
    let (n, defect) = best;
    if defect >= tol.idempotent_tol {
        return Err(Error::NoneFound { n, best: defect });
    }
    Ok(ShadowIdempotent {
        n,
        defect,
        candidate: powers.swap_remove(n),
    })
}

/// Eigenvalues of the single generator restricted to `span(basis)`.
pub fn restricted_eigenvalues(rep: &MatrixRepresentation, basis: &[ComplexVector]) -> Result<Vec<C64>> {
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let t = single_generator(rep)?;
    let b = from_columns(rep.dim(), basis);
    let block = b.adjoint() * t * &b;
    Ok(SchurForm::new(&block)?.eigenvalues())
}
