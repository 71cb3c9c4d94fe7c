//! Built-in representations with their splits where these are known by hand.

use crate::error::{Error, Result};
use crate::folner::BoxSequence;
use crate::linalg::{c, diag, real_matrix, unit_root, ComplexMatrix};
use crate::representation::{IndexModel, MatrixRepresentation};

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub representation: MatrixRepresentation,
    /// The projector onto `E_r` along `E_aws`, when known in closed form.
    pub expected_q: Option<ComplexMatrix>,
}

impl CatalogEntry {
    fn new(name: &str, description: String, rep: MatrixRepresentation, expected_q: Option<ComplexMatrix>) -> Self {
        Self {
            name: name.into(),
            description,
            representation: rep,
            expected_q,
        }
    }

    /// Nested boxes matching the entry's index model, when it has one.
    pub fn folner(&self) -> Option<BoxSequence> {
        let IndexModel::Lattice { start } = self.representation.index_model()?;
        Some(BoxSequence::new(self.representation.generators().len(), *start))
    }
}

fn lattice(rep: MatrixRepresentation) -> MatrixRepresentation {
    rep.with_index_model(IndexModel::Lattice { start: 1 })
}

/// `π(n)z = 2^{-n} z` on `ℂ¹`: everything is almost weakly stable.
pub fn scaling_example() -> CatalogEntry {
    let rep = lattice(MatrixRepresentation::single(diag(&[c(0.5, 0.0)])).expect("valid"));
    CatalogEntry::new(
        "scaling_example",
        "n acts on C^1 by multiplication with 2^-n".into(),
        rep,
        Some(ComplexMatrix::zeros(1, 1)),
    )
}

/// `diag(e^{2πiα}, r)` with `0 ≤ r < 1`.
pub fn rotation_contraction(alpha: f64, r: f64) -> Result<CatalogEntry> {
    if !(alpha.is_finite() && r.is_finite() && (0.0..1.0).contains(&r)) {
        return Err(Error::MalformedParameters(format!(
            "rotation_contraction needs finite alpha and 0 <= r < 1, got ({alpha}, {r})"
        )));
    }
    let rep = lattice(MatrixRepresentation::single(diag(&[unit_root(alpha), c(r, 0.0)]))?);
    Ok(CatalogEntry::new(
        "rotation_contraction",
        format!("diag(exp(2 pi i {alpha}), {r})"),
        rep,
        Some(diag(&[c(1.0, 0.0), c(0.0, 0.0)])),
    ))
}

/// A row-stochastic `P` acting on functions: `(Pf)(i) = Σ_j P_ij f(j)`.
pub fn markov(p: &[Vec<f64>]) -> Result<CatalogEntry> {
    let d = p.len();
    if d == 0 || p.iter().any(|row| row.len() != d) {
        return Err(Error::MalformedParameters("transition matrix must be square and nonempty".into()));
    }
    for (i, row) in p.iter().enumerate() {
        if row.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::MalformedParameters(format!("row {i} has a negative or non-finite entry")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::MalformedParameters(format!("row {i} sums to {sum}, not 1")));
        }
    }
    let flat: Vec<f64> = p.iter().flatten().copied().collect();
    let rep = lattice(MatrixRepresentation::single(real_matrix(d, d, &flat))?);
    Ok(CatalogEntry::new("markov", format!("Markov operator on {d} states"), rep, None))
}

/// Two states, leaving state 0 with probability `p` and state 1 with
/// probability `q`. For `0 < p + q < 2` the powers converge to the projector
/// onto constants along `{f : π·f = 0}`, `π = (q, p)/(p + q)`.
pub fn markov_two_state(p: f64, q: f64) -> Result<CatalogEntry> {
    let mut entry = markov(&[vec![1.0 - p, p], vec![q, 1.0 - q]])?;
    entry.name = "markov_two_state".into();
    entry.description = format!("two-state chain with p = {p}, q = {q}");
    let s = p + q;
    if s > 0.0 && s < 2.0 {
        entry.expected_q = Some(real_matrix(2, 2, &[q / s, p / s, q / s, p / s]));
    }
    Ok(entry)
}

/// The cyclic permutation `e_i ↦ e_{i+1 mod d}`.
pub fn cyclic_shift(d: usize) -> Result<CatalogEntry> {
    if d == 0 {
        return Err(Error::MalformedParameters("cyclic_shift needs d >= 1".into()));
    }
    let m = ComplexMatrix::from_fn(d, d, |i, j| if i == (j + 1) % d { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let rep = lattice(MatrixRepresentation::single(m)?);
    Ok(CatalogEntry::new(
        "cyclic_shift",
        format!("cyclic shift on C^{d}"),
        rep,
        Some(ComplexMatrix::identity(d, d)),
    ))
}

/// `a = diag(i, 0.9)`, `b = diag(−1, 0.8)` acting by `a^{s₁} b^{s₂}`, `s ∈ ℕ²`.
pub fn commuting_pair() -> CatalogEntry {
    let rep = lattice(
        MatrixRepresentation::new(vec![
            ("a", diag(&[c(0.0, 1.0), c(0.9, 0.0)])),
            ("b", diag(&[c(-1.0, 0.0), c(0.8, 0.0)])),
        ])
        .expect("valid"),
    );
    CatalogEntry::new(
        "commuting_pair",
        "diag(i, 0.9) and diag(-1, 0.8) indexed by N^2".into(),
        rep,
        Some(diag(&[c(1.0, 0.0), c(0.0, 0.0)])),
    )
}

pub fn identity(d: usize) -> Result<CatalogEntry> {
    if d == 0 {
        return Err(Error::MalformedParameters("identity needs d >= 1".into()));
    }
    let rep = lattice(MatrixRepresentation::single(ComplexMatrix::identity(d, d))?);
    Ok(CatalogEntry::new(
        "identity",
        format!("identity on C^{d}"),
        rep,
        Some(ComplexMatrix::identity(d, d)),
    ))
}

/// `diag(i, −i)` and `[[0, i], [i, 0]]`, generating the quaternion group in
/// its irreducible 2-dimensional representation. They do not commute, so
/// the entry has no lattice index model and is not part of [`catalog`].
pub fn quaternion_pair() -> CatalogEntry {
    let a = diag(&[c(0.0, 1.0), c(0.0, -1.0)]);
    let b = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let rep = MatrixRepresentation::new(vec![("a", a), ("b", b)]).expect("valid");
    CatalogEntry::new(
        "quaternion_pair",
        "quaternion group generators i, j as 2x2 unitaries".into(),
        rep,
        Some(ComplexMatrix::identity(2, 2)),
    )
}

/// Every lattice-indexed built-in entry, in a fixed order.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut fifth = rotation_contraction(0.2, 0.6).expect("valid");
    fifth.name = "rotation_fifth".into();
    vec![
        scaling_example(),
        rotation_contraction(2f64.sqrt(), 0.5).expect("valid"),
        fifth,
        markov_two_state(0.3, 0.3).expect("valid"),
        cyclic_shift(3).expect("valid"),
        commuting_pair(),
        identity(2).expect("valid"),
    ]
}

/// Names accepted by [`by_name`].
pub fn names() -> Vec<String> {
    let mut out: Vec<String> = catalog().into_iter().map(|e| e.name).collect();
    out.push("quaternion_pair".into());
    out.push("cyclic_shift:<d>".into());
    out.push("identity:<d>".into());
    out.push("rotation_contraction:<alpha>,<r>".into());
    out.push("markov_two_state:<p>,<q>".into());
    out
}

fn parse_args(args: &str, count: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = args
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::MalformedParameters(format!("bad catalog parameter `{args}`: {e}")))?;
    if v.len() != count {
        return Err(Error::MalformedParameters(format!(
            "expected {count} parameters, got `{args}`"
        )));
    }
    Ok(v)
}

fn parse_dim(args: &str) -> Result<usize> {
    args.trim()
        .parse()
        .map_err(|e| Error::MalformedParameters(format!("bad dimension `{args}`: {e}")))
}

/// Looks up `name` or `name:params`.
pub fn by_name(name: &str) -> Result<CatalogEntry> {
    if let Some((head, args)) = name.split_once(':') {
        return match head {
            "cyclic_shift" => cyclic_shift(parse_dim(args)?),
            "identity" => identity(parse_dim(args)?),
            "rotation_contraction" => {
                let v = parse_args(args, 2)?;
                rotation_contraction(v[0], v[1])
            }
            "markov_two_state" => {
                let v = parse_args(args, 2)?;
                markov_two_state(v[0], v[1])
            }
            _ => Err(Error::MalformedParameters(format!("unknown catalog entry `{name}`"))),
        };
    }
    if name == "quaternion_pair" {
        return Ok(quaternion_pair());
    }
    catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::MalformedParameters(format!("unknown catalog entry `{name}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;

    #[test]
    fn markov_validation() {
        assert!(markov(&[vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(markov(&[vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
        assert!(markov(&[vec![1.0]]).is_ok());
    }

    #[test]
    fn two_state_eigenvalues() {
        let e = markov_two_state(0.3, 0.3).unwrap();
        let t = &e.representation.generators()[0].matrix;
        let mut eig: Vec<f64> = crate::linalg::SchurForm::new(t).unwrap().eigenvalues().iter().map(|z| z.re).collect();
        eig.sort_by(f64::total_cmp);
        assert!((eig[0] - 0.4).abs() < 1e-12 && (eig[1] - 1.0).abs() < 1e-12);
        let q = e.expected_q.unwrap();
        assert!(frobenius(&(&q * &q - &q)) < 1e-15);
    }

    #[test]
    fn names_resolve() {
        for e in catalog() {
            assert_eq!(by_name(&e.name).unwrap().name, e.name);
            assert!(e.folner().is_some());
        }
        assert_eq!(by_name("cyclic_shift:5").unwrap().representation.dim(), 5);
        assert!(by_name("rotation_contraction:0.1,1.5").is_err());
        assert!(by_name("nope").is_err());
        assert!(by_name("quaternion_pair").unwrap().folner().is_none());
    }
}
