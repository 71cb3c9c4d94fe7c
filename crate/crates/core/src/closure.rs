//! ε-nets approximating the closure of `π(S)` under products, and the search
//! for the minimal idempotent inside them.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{frobenius, rank_above, truncated_pinv, ComplexMatrix};
use crate::representation::MatrixRepresentation;
use crate::tolerances::Tolerances;

/// Elements found so far, each with the generator word that produced it.
#[derive(Clone, Debug)]
pub struct ClosureNet {
    pub elements: Vec<ComplexMatrix>,
    pub witness_words: Vec<Vec<usize>>,
    pub dedup_eps: f64,
    pub saturated: bool,
    /// Largest Frobenius norm among the elements.
    pub norm_bound: f64,
}

impl ClosureNet {
    fn new(dedup_eps: f64) -> Self {
        Self {
            elements: Vec::new(),
            witness_words: Vec::new(),
            dedup_eps,
            saturated: false,
            norm_bound: 0.0,
        }
    }

    /// Whether some element lies within `dedup_eps` of `m`.
    fn covers(&self, m: &ComplexMatrix) -> bool {
        let eps2 = self.dedup_eps * self.dedup_eps;
        self.elements.iter().any(|e| {
            let mut acc = 0.0;
            for (x, y) in e.iter().zip(m.iter()) {
                acc += (x - y).norm_sqr();
                if acc >= eps2 {
                    return false;
                }
            }
            true
        })
    }

    /// Inserts unless some element lies within `dedup_eps`; returns the new index.
    fn try_insert(&mut self, m: ComplexMatrix, word: Vec<usize>) -> Option<usize> {
        if self.covers(&m) {
            return None;
        }
        self.norm_bound = self.norm_bound.max(frobenius(&m));
        self.elements.push(m);
        self.witness_words.push(word);
        Some(self.elements.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max_word_length(&self) -> usize {
        self.witness_words.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Absolute rank threshold used for the elements of this net.
    pub fn rank_threshold(&self, tol: &Tolerances) -> f64 {
        tol.rank_tol * self.norm_bound.max(1.0)
    }
}

fn check_norm(m: &ComplexMatrix, word: &[usize], tol: &Tolerances) -> Result<()> {
    let n = frobenius(m);
    if n > tol.norm_cap {
        return Err(Error::NotPowerBounded(format!(
            "word {word:?} has norm {n:e} above the cap {:e}",
            tol.norm_cap
        )));
    }
    Ok(())
}

/// Breadth-first product saturation with ε-deduplication.
///
/// Words are explored in shortlex order by right multiplication with the
/// generators. When that frontier runs dry a full pass over all pairwise
/// products is made; the net is saturated once such a pass adds nothing.
/// Running out of room returns `BudgetExhausted` with the partial net.
pub fn approximate_closure(rep: &MatrixRepresentation, tol: &Tolerances) -> Result<ClosureNet> {
    tol.validate()?;
    let d = rep.dim();
    let gens: Vec<&ComplexMatrix> = rep.matrices().collect();
    let mut net = ClosureNet::new(tol.closure_eps);
    let mut frontier = std::collections::VecDeque::new();

    if rep.is_monoid() {
        if let Some(i) = net.try_insert(ComplexMatrix::identity(d, d), Vec::new()) {
            frontier.push_back(i);
        }
    }
    for (g, m) in gens.iter().enumerate() {
        check_norm(m, &[g], tol)?;
        if let Some(i) = net.try_insert((*m).clone(), vec![g]) {
            frontier.push_back(i);
        }
    }

    let mut products = 0usize;
    loop {
        while let Some(i) = frontier.pop_front() {
            for (g, m) in gens.iter().enumerate() {
                products += 1;
                if products > tol.max_iterations {
                    return Err(Error::BudgetExhausted(Box::new(net)));
                }
                let p = &net.elements[i] * *m;
                let mut word = net.witness_words[i].clone();
                word.push(g);
                check_norm(&p, &word, tol)?;
                if let Some(j) = net.try_insert(p, word) {
                    if net.len() > tol.max_net_size {
                        return Err(Error::BudgetExhausted(Box::new(net)));
                    }
                    frontier.push_back(j);
                }
            }
        }

        // pairwise pass: products are formed and screened against the current
        // net in parallel, then inserted sequentially in canonical order
        let n = net.len();
        products += n * n;
        if products > tol.max_iterations {
            return Err(Error::BudgetExhausted(Box::new(net)));
        }
        let snapshot = &net;
        let candidates: Vec<(usize, usize, ComplexMatrix)> = (0..n * n)
            .into_par_iter()
            .filter_map(|ij| {
                let (i, j) = (ij / n, ij % n);
                let p = &snapshot.elements[i] * &snapshot.elements[j];
                (!snapshot.covers(&p)).then_some((i, j, p))
            })
            .collect();
        let mut inserted = false;
        for (i, j, p) in candidates {
            let mut word = net.witness_words[i].clone();
            word.extend_from_slice(&net.witness_words[j]);
            check_norm(&p, &word, tol)?;
            if let Some(k) = net.try_insert(p, word) {
                inserted = true;
                if net.len() > tol.max_net_size {
                    return Err(Error::BudgetExhausted(Box::new(net)));
                }
                frontier.push_back(k);
            }
        }
        if !inserted {
            net.saturated = true;
            return Ok(net);
        }
    }
}

/// Runs [`approximate_closure`] and keeps the partial net when the budget runs out.
pub fn closure_or_partial(rep: &MatrixRepresentation, tol: &Tolerances) -> Result<ClosureNet> {
    match approximate_closure(rep, tol) {
        Ok(net) => Ok(net),
        Err(Error::BudgetExhausted(net)) => Ok(*net),
        Err(e) => Err(e),
    }
}

const MAX_SQUARINGS: usize = 96;

/// Locates the minimal idempotent `Q` of the closure.
///
/// An element of the net is squared until it is idempotent. Squaring
/// alone never settles on a rotation (roots of unity of odd order or
/// irrational angles), so once the inner part has been squared below
/// `idempotent_tol` and the rank has stopped changing, the identity of the
/// group containing `u` is read off as `u² (u³)⁺ u` instead. The idempotent
/// `e` is then lowered through `e·x·e` over the net until its rank is stable,
/// and every `x·e`, `e·x` must lead back to `e`; otherwise the kernel is not
/// a group.
///
/// Partial nets are accepted: an irrational rotation never saturates, yet its
/// minimal-rank elements already determine `Q`.
pub fn find_minimal_idempotent(net: &ClosureNet, tol: &Tolerances) -> Result<ComplexMatrix> {
    if net.is_empty() {
        return Err(Error::MalformedParameters("empty closure net".into()));
    }
    let threshold = net.rank_threshold(tol);
    let min_squarings = {
        let ratio = tol.idempotent_tol.ln() / tol.spectral_boundary.ln();
        ratio.max(1.0).log2().ceil() as usize
    };
    let idempotent = |u: &ComplexMatrix| idempotent_from_seed(u, threshold, min_squarings, tol);
    // the trace of an idempotent is its rank
    let rank_of = |e: &ComplexMatrix| e.trace().re.round().max(0.0) as usize;

    // the most recently found element has the longest word, so is usually
    // the furthest contracted; the descent below corrects any choice
    let seed = net.elements.last().expect("nonempty");
    let mut e = idempotent(seed)?;

    // Descend through e·x·e ∈ eSe until no element yields a smaller idempotent.
    // An element whose high power keeps the rank of e cannot lower it.
    while rank_of(&e) > 0 {
        let r = rank_of(&e);
        let lowered = net.elements.par_iter().find_first(|x| {
            let mut u = &e * *x * &e;
            for _ in 0..min_squarings {
                u = &u * &u;
            }
            rank_above(&u, threshold) < r
        });
        match lowered {
            Some(x) => {
                let f = idempotent(&(&e * x * &e))?;
                if rank_of(&f) >= r {
                    break;
                }
                e = f;
            }
            None => break,
        }
    }

    // In a group kernel every x·e and e·x already lies in eSe.
    let scale = frobenius(&e).max(1.0);
    let distance = net
        .elements
        .par_iter()
        .map(|x| {
            let exe = &e * x * &e;
            frobenius(&(&e * x - &exe)).max(frobenius(&(x * &e - &exe))) / (scale * frobenius(x).max(1.0))
        })
        .reduce(|| 0.0, f64::max);
    if distance > tol.idempotent_tol.sqrt() {
        return Err(Error::MultipleIdempotents { distance });
    }
    Ok(e)
}

fn idempotent_from_seed(
    seed: &ComplexMatrix,
    threshold: f64,
    min_squarings: usize,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let d = seed.nrows();
    let mut u = seed.clone();
    let mut previous_rank = usize::MAX;
    let budget = MAX_SQUARINGS.min(tol.max_iterations);
    for step in 0..=budget {
        let u2 = &u * &u;
        if frobenius(&(&u2 - &u)) < tol.idempotent_tol {
            if rank_above(&u, threshold) == 0 {
                return Ok(ComplexMatrix::zeros(d, d));
            }
            return Ok(polish(u, tol));
        }
        // ranks only matter once the inner part has had time to die out
        if step >= min_squarings {
            let rank = rank_above(&u, threshold);
            if rank == 0 {
                return Ok(ComplexMatrix::zeros(d, d));
            }
            if rank == previous_rank {
                if let Some(e) = group_identity(&u, &u2, rank, tol) {
                    return Ok(e);
                }
            }
            previous_rank = rank;
        }
        if frobenius(&u2) > tol.norm_cap {
            return Err(Error::NotPowerBounded(format!(
                "squaring a minimal-rank element reached norm {:e}",
                frobenius(&u2)
            )));
        }
        u = u2;
    }
    Err(Error::NoConvergence(format!(
        "squaring did not reach an idempotent within {budget} steps"
    )))
}

/// `e = u² (u³)⁺ u` with the pseudo-inverse truncated to `rank`, accepted only
/// if `e` is an idempotent acting as the identity on `u` from both sides.
fn group_identity(u: &ComplexMatrix, u2: &ComplexMatrix, rank: usize, tol: &Tolerances) -> Option<ComplexMatrix> {
    let u3 = u2 * u;
    let e = u2 * truncated_pinv(&u3, rank) * u;
    let scale = frobenius(u).max(1.0);
    let loose = tol.idempotent_tol.sqrt();
    let ok = frobenius(&(&e * &e - &e)) < loose * frobenius(&e).max(1.0)
        && frobenius(&(&e * u - u)) < loose * scale
        && frobenius(&(u * &e - u)) < loose * scale;
    if !ok {
        return None;
    }
    let e = polish(e, tol);
    (frobenius(&(&e * &e - &e)) < tol.idempotent_tol).then_some(e)
}

/// Newton-type refinement `e ← 3e² − 2e³` toward the nearest idempotent.
fn polish(mut e: ComplexMatrix, tol: &Tolerances) -> ComplexMatrix {
    for _ in 0..8 {
        let e2 = &e * &e;
        if frobenius(&(&e2 - &e)) < tol.idempotent_tol * 1e-2 {
            break;
        }
        let e3 = &e2 * &e;
        let next = e2 * crate::linalg::c(3.0, 0.0) - e3 * crate::linalg::c(2.0, 0.0);
        if frobenius(&(&next * &next - &next)) >= frobenius(&(&e * &e - &e)) {
            break;
        }
        e = next;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag, real_matrix, unit_root};

    fn rep(m: ComplexMatrix) -> MatrixRepresentation {
        MatrixRepresentation::single(m).unwrap()
    }

    #[test]
    fn scaling_net_saturates_near_zero() {
        let tol = Tolerances {
            closure_eps: 1e-3,
            ..Tolerances::default()
        };
        let net = approximate_closure(&rep(diag(&[c(0.5, 0.0)])), &tol).unwrap();
        assert!(net.saturated);
        // powers 2^-1..2^-9 by breadth-first search, 2^-11 from the pairwise pass
        assert_eq!(net.len(), 10);
        let smallest = net.elements.iter().map(|m| m[(0, 0)].re).fold(1.0, f64::min);
        assert!(smallest < 2e-3);
        assert_eq!(find_minimal_idempotent(&net, &tol).unwrap(), diag(&[c(0.0, 0.0)]));
    }

    #[test]
    fn identity_net_is_a_point() {
        let tol = Tolerances::default();
        let net = approximate_closure(&rep(ComplexMatrix::identity(2, 2)), &tol).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.witness_words, vec![vec![0]]);
        assert_eq!(find_minimal_idempotent(&net, &tol).unwrap(), ComplexMatrix::identity(2, 2));
    }

    #[test]
    fn expanding_generator_is_rejected() {
        let err = approximate_closure(&rep(diag(&[c(2.0, 0.0)])), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::NotPowerBounded(_)));
    }

    #[test]
    fn irrational_rotation_exhausts_budget_but_finds_q() {
        let tol = Tolerances::default();
        let t = diag(&[unit_root(2f64.sqrt()), c(0.5, 0.0)]);
        let err = approximate_closure(&rep(t.clone()), &tol).unwrap_err();
        let Error::BudgetExhausted(net) = err else {
            panic!("expected budget exhaustion")
        };
        assert!(!net.saturated);
        let q = find_minimal_idempotent(&net, &tol).unwrap();
        assert!(frobenius(&(q - diag(&[c(1.0, 0.0), c(0.0, 0.0)]))) < 1e-9);
    }

    #[test]
    fn fifth_roots_need_the_group_identity() {
        let tol = Tolerances::default();
        let t = diag(&[unit_root(0.2), c(0.6, 0.0)]);
        let net = closure_or_partial(&rep(t), &tol).unwrap();
        let q = find_minimal_idempotent(&net, &tol).unwrap();
        assert!(frobenius(&(q - diag(&[c(1.0, 0.0), c(0.0, 0.0)]))) < 1e-9);
    }

    #[test]
    fn distinct_minimal_idempotents_are_reported() {
        // two rank-one idempotents with e·f = f and f·e = e: a right-zero band
        let e = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let f = real_matrix(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(&e * &f, f);
        let r = MatrixRepresentation::new(vec![("e", e), ("f", f)]).unwrap();
        let tol = Tolerances::default();
        let net = approximate_closure(&r, &tol).unwrap();
        assert!(net.saturated);
        assert_eq!(net.len(), 2);
        assert!(matches!(
            find_minimal_idempotent(&net, &tol),
            Err(Error::MultipleIdempotents { .. })
        ));
    }

    #[test]
    fn words_are_shortlex() {
        let a = real_matrix(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let b = real_matrix(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let r = MatrixRepresentation::new(vec![("a", a), ("b", b)]).unwrap();
        let net = approximate_closure(&r, &Tolerances::default()).unwrap();
        assert!(net.saturated);
        assert_eq!(net.len(), 6);
        for w in net.witness_words.windows(2) {
            assert!((w[0].len(), &w[0]) < (w[1].len(), &w[1]));
        }
        for (m, w) in net.elements.iter().zip(&net.witness_words) {
            assert!(frobenius(&(r.word(w) - m)) < 1e-12);
        }
    }
}
