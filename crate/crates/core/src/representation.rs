//! Finite-dimensional representations given by generator matrices, plus the
//! JSON document format they are exchanged in.

use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, ensure_square, frobenius, ComplexMatrix, ComplexVector};

/// How elements of the indexing semigroup map to operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexModel {
    /// `s ∈ ℕ^k` acts as `g₁^{s₁}⋯g_k^{s_k}`; needs commuting generators.
    /// Følner boxes start at `start` in every coordinate.
    Lattice {
        #[serde(default = "default_start")]
        start: i64,
    },
}

fn default_start() -> i64 {
    1
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub name: String,
    pub matrix: ComplexMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixRepresentation {
    dim: usize,
    generators: Vec<Generator>,
    monoid: bool,
    index_model: Option<IndexModel>,
}

impl MatrixRepresentation {
    pub fn new<S: Into<String>>(generators: Vec<(S, ComplexMatrix)>) -> Result<Self> {
        let generators: Vec<Generator> = generators
            .into_iter()
            .map(|(name, matrix)| Generator {
                name: name.into(),
                matrix,
            })
            .collect();
        let first = generators
            .first()
            .ok_or_else(|| Error::MalformedParameters("representation without generators".into()))?;
        let dim = ensure_square(&first.matrix)?;
        for g in &generators {
            let d = ensure_square(&g.matrix)?;
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
            ensure_finite(&g.matrix, "generator")?;
        }
        for (i, g) in generators.iter().enumerate() {
            if generators[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::MalformedParameters(format!(
                    "duplicate generator name `{}`",
                    g.name
                )));
            }
        }
        Ok(Self {
            dim,
            generators,
            monoid: false,
            index_model: None,
        })
    }

    pub fn single(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(vec![("T", matrix)])
    }

    pub fn with_monoid(mut self, monoid: bool) -> Self {
        self.monoid = monoid;
        self
    }

    pub fn with_index_model(mut self, model: IndexModel) -> Self {
        self.index_model = Some(model);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn matrices(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.generators.iter().map(|g| &g.matrix)
    }

    pub fn is_monoid(&self) -> bool {
        self.monoid
    }

    pub fn index_model(&self) -> Option<&IndexModel> {
        self.index_model.as_ref()
    }

    /// The declared index model, or the lattice model when the generators commute.
    pub fn effective_index_model(&self, tol: f64) -> Result<IndexModel> {
        if let Some(m) = &self.index_model {
            if !self.generators_commute(tol) {
                return Err(Error::MalformedParameters(
                    "lattice indexing needs commuting generators".into(),
                ));
            }
            return Ok(m.clone());
        }
        if self.generators_commute(tol) {
            Ok(IndexModel::Lattice {
                start: if self.monoid { 0 } else { 1 },
            })
        } else {
            Err(Error::MalformedParameters(
                "no index model given and the generators do not commute".into(),
            ))
        }
    }

    pub fn lattice_start(&self, tol: f64) -> Result<i64> {
        match self.effective_index_model(tol)? {
            IndexModel::Lattice { start } => Ok(start),
        }
    }

    pub fn generators_commute(&self, tol: f64) -> bool {
        for (i, a) in self.generators.iter().enumerate() {
            for b in &self.generators[i + 1..] {
                let ab = &a.matrix * &b.matrix;
                let ba = &b.matrix * &a.matrix;
                let scale = frobenius(&ab).max(1.0);
                if frobenius(&(ab - ba)) > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Product of the generators along a word of generator indices.
    pub fn word(&self, word: &[usize]) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(self.dim, self.dim);
        for &g in word {
            m *= &self.generators[g].matrix;
        }
        m
    }

    /// Restriction to an invariant subspace with orthonormal basis `basis`:
    /// the generator matrices in those coordinates.
    pub fn restrict(&self, basis: &[ComplexVector]) -> Result<Self> {
        let k = basis.len();
        if k == 0 {
            return Err(Error::MalformedParameters("restriction to the zero subspace".into()));
        }
        let b = crate::linalg::from_columns(self.dim, basis);
        let gens = self
            .generators
            .iter()
            .map(|g| (g.name.clone(), b.adjoint() * &g.matrix * &b))
            .collect();
        let mut r = Self::new(gens)?;
        r.monoid = self.monoid;
        r.index_model = self.index_model.clone();
        Ok(r)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: RepresentationDocument = serde_json::from_str(text)
            .map_err(|e| Error::MalformedParameters(format!("representation JSON: {e}")))?;
        let mut rep = Self::new(doc.generators.0)?;
        if rep.dim != doc.dim {
            return Err(Error::DimensionMismatch {
                expected: doc.dim,
                found: rep.dim,
            });
        }
        rep.monoid = doc.monoid;
        rep.index_model = doc.index_model;
        Ok(rep)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = RepresentationDocument {
            dim: self.dim,
            generators: NamedMatrices(
                self.generators
                    .iter()
                    .map(|g| (g.name.clone(), g.matrix.clone()))
                    .collect(),
            ),
            monoid: self.monoid,
            index_model: self.index_model.clone(),
        };
        serde_json::to_value(doc).expect("representation serializes")
    }
}

/// Powers `g_i^k` cached per generator, for evaluating lattice elements.
#[derive(Clone, Debug)]
pub struct LatticePowers<'a> {
    rep: &'a MatrixRepresentation,
    powers: Vec<Vec<ComplexMatrix>>,
}

impl<'a> LatticePowers<'a> {
    pub fn new(rep: &'a MatrixRepresentation) -> Self {
        let id = ComplexMatrix::identity(rep.dim, rep.dim);
        Self {
            rep,
            powers: vec![vec![id]; rep.generators.len()],
        }
    }

    pub fn power(&mut self, generator: usize, exponent: usize) -> &ComplexMatrix {
        let table = &mut self.powers[generator];
        while table.len() <= exponent {
            let next = table.last().expect("identity seeded") * &self.rep.generators[generator].matrix;
            table.push(next);
        }
        &table[exponent]
    }

    pub fn operator(&mut self, s: &[i64]) -> Result<ComplexMatrix> {
        if s.len() != self.rep.generators.len() {
            return Err(Error::DimensionMismatch {
                expected: self.rep.generators.len(),
                found: s.len(),
            });
        }
        let mut m = ComplexMatrix::identity(self.rep.dim, self.rep.dim);
        for (i, &e) in s.iter().enumerate() {
            let e = usize::try_from(e).map_err(|_| {
                Error::MalformedParameters(format!("negative exponent {e} in lattice element"))
            })?;
            m = &m * self.power(i, e);
        }
        Ok(m)
    }

    pub fn apply(&mut self, s: &[i64], v: &ComplexVector) -> Result<ComplexVector> {
        if s.len() != self.rep.generators.len() {
            return Err(Error::DimensionMismatch {
                expected: self.rep.generators.len(),
                found: s.len(),
            });
        }
        let mut w = v.clone();
        for (i, &e) in s.iter().enumerate().rev() {
            let e = usize::try_from(e).map_err(|_| {
                Error::MalformedParameters(format!("negative exponent {e} in lattice element"))
            })?;
            w = self.power(i, e) * w;
        }
        Ok(w)
    }
}

#[derive(Serialize, Deserialize)]
struct RepresentationDocument {
    dim: usize,
    generators: NamedMatrices,
    #[serde(default)]
    monoid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    index_model: Option<IndexModel>,
}

/// JSON object of named matrices that keeps document order.
struct NamedMatrices(Vec<(String, ComplexMatrix)>);

impl Serialize for NamedMatrices {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (name, m) in &self.0 {
            map.serialize_entry(name, &MatrixJson::from(m))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for NamedMatrices {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = NamedMatrices;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object of named complex matrices")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((name, m)) = access.next_entry::<String, MatrixJson>()? {
                    out.push((name, m.into_matrix().map_err(serde::de::Error::custom)?));
                }
                Ok(NamedMatrices(out))
            }
        }
        deserializer.deserialize_map(V)
    }
}

/// Row-major `[[[re, im], ...], ...]`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixJson(
            m.row_iter()
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        )
    }
}

impl MatrixJson {
    pub fn into_matrix(self) -> Result<ComplexMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::MalformedParameters("ragged matrix rows".into()));
        }
        let m = ComplexMatrix::from_row_iterator(
            rows,
            cols,
            self.0.into_iter().flatten().map(|[re, im]| crate::linalg::c(re, im)),
        );
        ensure_finite(&m, "matrix")?;
        Ok(m)
    }
}

/// `[[re, im], ...]`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(transparent)]
pub struct VectorJson(pub Vec<[f64; 2]>);

impl From<&ComplexVector> for VectorJson {
    fn from(v: &ComplexVector) -> Self {
        VectorJson(v.iter().map(|z| [z.re, z.im]).collect())
    }
}

impl VectorJson {
    pub fn into_vector(self) -> Result<ComplexVector> {
        let v = ComplexVector::from_iterator(
            self.0.len(),
            self.0.into_iter().map(|[re, im]| crate::linalg::c(re, im)),
        );
        if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag, unit_root};

    #[test]
    fn json_keeps_generator_order() {
        let text = r#"{"dim": 1, "generators": {"b": [[[0.5, 0]]], "a": [[[0, 1]]]}, "monoid": true,
                       "index_model": {"kind": "lattice", "start": 0}}"#;
        let rep = MatrixRepresentation::from_json(text).unwrap();
        assert_eq!(rep.generators()[0].name, "b");
        assert_eq!(rep.generators()[1].matrix[(0, 0)], c(0.0, 1.0));
        assert!(rep.is_monoid());
        assert_eq!(rep.index_model(), Some(&IndexModel::Lattice { start: 0 }));
        let back = MatrixRepresentation::from_json(&rep.to_json_value().to_string()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn rejects_inconsistent_documents() {
        assert!(MatrixRepresentation::from_json(r#"{"dim": 2, "generators": {"T": [[[1, 0]]]}}"#).is_err());
        assert!(MatrixRepresentation::from_json(r#"{"dim": 1, "generators": {}}"#).is_err());
        let two = ComplexMatrix::identity(2, 2);
        let one = ComplexMatrix::identity(1, 1);
        assert!(matches!(
            MatrixRepresentation::new(vec![("a", two), ("b", one)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lattice_powers_multiply_out() {
        let rep = MatrixRepresentation::new(vec![
            ("a", diag(&[c(0.0, 1.0), c(0.9, 0.0)])),
            ("b", diag(&[c(-1.0, 0.0), c(0.8, 0.0)])),
        ])
        .unwrap();
        let mut p = LatticePowers::new(&rep);
        let m = p.operator(&[3, 2]).unwrap();
        assert!((m[(0, 0)] - c(0.0, -1.0)).norm() < 1e-15);
        assert!((m[(1, 1)].re - 0.9f64.powi(3) * 0.64).abs() < 1e-15);
        assert!(rep.generators_commute(1e-12));
        assert!(p.operator(&[-1, 0]).is_err());
        let single = MatrixRepresentation::single(diag(&[unit_root(0.25)])).unwrap();
        assert_eq!(
            single.effective_index_model(1e-12).unwrap(),
            IndexModel::Lattice { start: 1 }
        );
    }
}
