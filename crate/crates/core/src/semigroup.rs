//! Finite semigroups given by Cayley tables: minimal one-sided ideals, the
//! kernel (smallest two-sided ideal), idempotents and the admissibility test
//! "the kernel is a group".

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

pub type ElementSet = BTreeSet<usize>;

/// A validated Cayley table. `table[a][b]` is the index of `a·b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteSemigroup {
    order: usize,
    table: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct CayleyDocument {
    order: Option<usize>,
    table: Vec<Vec<usize>>,
    labels: Option<Vec<String>>,
}

impl FiniteSemigroup {
    /// Validates shape, range and associativity (all `n³` triples).
    pub fn build(table: Vec<Vec<usize>>) -> Result<Self> {
        let order = table.len();
        if order == 0 {
            return Err(Error::MalformedParameters("empty Cayley table".into()));
        }
        for (row, entries) in table.iter().enumerate() {
            if entries.len() != order {
                return Err(Error::NonSquare {
                    rows: order,
                    cols: entries.len(),
                });
            }
            for (col, &value) in entries.iter().enumerate() {
                if value >= order {
                    return Err(Error::OutOfRange {
                        row,
                        col,
                        value,
                        order,
                    });
                }
            }
        }
        for a in 0..order {
            for b in 0..order {
                let ab = table[a][b];
                for c in 0..order {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(Error::NonAssociative { a, b, c });
                    }
                }
            }
        }
        Ok(Self {
            order,
            table,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Parses `{"order": n, "table": [[...]], "labels": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CayleyDocument = serde_json::from_str(text)
            .map_err(|e| Error::MalformedParameters(format!("Cayley JSON: {e}")))?;
        if let Some(n) = doc.order {
            if n != doc.table.len() {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: doc.table.len(),
                });
            }
        }
        let s = Self::build(doc.table)?;
        match doc.labels {
            Some(labels) => s.with_labels(labels),
            None => Ok(s),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn label(&self, a: usize) -> String {
        match &self.labels {
            Some(l) => l[a].clone(),
            None => a.to_string(),
        }
    }

    /// The opposite semigroup `a ∘ b = b·a`.
    pub fn opposite(&self) -> Self {
        let n = self.order;
        let table = (0..n)
            .map(|a| (0..n).map(|b| self.table[b][a]).collect())
            .collect();
        Self {
            order: n,
            table,
            labels: self.labels.clone(),
        }
    }

    pub fn idempotents(&self) -> ElementSet {
        (0..self.order).filter(|&e| self.mul(e, e) == e).collect()
    }

    /// `sS ∪ {s}`.
    pub fn principal_right_ideal(&self, s: usize) -> ElementSet {
        let mut set: ElementSet = self.table[s].iter().copied().collect();
        set.insert(s);
        set
    }

    /// `Ss ∪ {s}`.
    pub fn principal_left_ideal(&self, s: usize) -> ElementSet {
        let mut set: ElementSet = (0..self.order).map(|t| self.mul(t, s)).collect();
        set.insert(s);
        set
    }

    pub fn ideal_structure(&self) -> IdealStructure {
        let right: Vec<ElementSet> = (0..self.order).map(|s| self.principal_right_ideal(s)).collect();
        let left: Vec<ElementSet> = (0..self.order).map(|s| self.principal_left_ideal(s)).collect();
        let minimal_right_ideals = inclusion_minimal(&right);
        let minimal_left_ideals = inclusion_minimal(&left);
        let kernel: ElementSet = minimal_right_ideals.iter().flatten().copied().collect();
        let idempotents = self.idempotents();

        let kernel_is_group = self.is_latin_square(&kernel);
        let (kernel_identity, kernel_inverse) = if kernel_is_group {
            let e = *kernel
                .iter()
                .find(|&&k| self.mul(k, k) == k)
                .expect("a finite group has an identity");
            let inverse = kernel
                .iter()
                .map(|&k| {
                    let inv = *kernel
                        .iter()
                        .find(|&&x| self.mul(k, x) == e)
                        .expect("Latin square rows are permutations");
                    (k, inv)
                })
                .collect();
            (Some(e), Some(inverse))
        } else {
            (None, None)
        };

        IdealStructure {
            minimal_right_ideals,
            minimal_left_ideals,
            kernel,
            idempotents,
            kernel_is_group,
            kernel_identity,
            kernel_inverse,
        }
    }

    /// Closed under the product with every row and column a permutation.
    fn is_latin_square(&self, set: &ElementSet) -> bool {
        for &a in set {
            let row: ElementSet = set.iter().map(|&b| self.mul(a, b)).collect();
            let col: ElementSet = set.iter().map(|&b| self.mul(b, a)).collect();
            if row != *set || col != *set {
                return false;
            }
        }
        true
    }

    pub fn is_jdlg_admissible(&self) -> Admissibility {
        let ideals = self.ideal_structure();
        let witness = if ideals.kernel_is_group {
            format!(
                "kernel {} is a group with identity {}",
                self.format_set(&ideals.kernel),
                self.label(ideals.kernel_identity.expect("group kernel"))
            )
        } else if ideals.minimal_right_ideals.len() > 1 {
            format!(
                "distinct minimal right ideals {} and {}",
                self.format_set(&ideals.minimal_right_ideals[0]),
                self.format_set(&ideals.minimal_right_ideals[1])
            )
        } else {
            format!(
                "distinct minimal left ideals {} and {}",
                self.format_set(&ideals.minimal_left_ideals[0]),
                self.format_set(&ideals.minimal_left_ideals[1])
            )
        };
        Admissibility {
            admissible: ideals.kernel_is_group,
            witness,
            ideals,
        }
    }

    /// Uniform average of `f` over the kernel, which is the Haar mean when
    /// the kernel is a group.
    pub fn kernel_haar_mean<F: Fn(usize) -> C64>(&self, f: F) -> Result<C64> {
        let ideals = self.ideal_structure();
        if !ideals.kernel_is_group {
            return Err(Error::KernelNotGroup);
        }
        let total: C64 = ideals.kernel.iter().map(|&k| f(k)).sum();
        Ok(total / ideals.kernel.len() as f64)
    }

    pub fn format_set(&self, set: &ElementSet) -> String {
        let items: Vec<String> = set.iter().map(|&a| self.label(a)).collect();
        format!("{{{}}}", items.join(", "))
    }
}

fn inclusion_minimal(sets: &[ElementSet]) -> Vec<ElementSet> {
    let mut distinct: Vec<ElementSet> = Vec::new();
    for s in sets {
        if !distinct.contains(s) {
            distinct.push(s.clone());
        }
    }
    let mut minimal: Vec<ElementSet> = distinct
        .iter()
        .filter(|s| !distinct.iter().any(|t| t != *s && t.is_subset(s)))
        .cloned()
        .collect();
    minimal.sort();
    minimal
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdealStructure {
    pub minimal_right_ideals: Vec<ElementSet>,
    pub minimal_left_ideals: Vec<ElementSet>,
    pub kernel: ElementSet,
    pub idempotents: ElementSet,
    pub kernel_is_group: bool,
    pub kernel_identity: Option<usize>,
    /// Pairs `(k, k⁻¹)` inside the kernel group.
    pub kernel_inverse: Option<Vec<(usize, usize)>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub witness: String,
    pub ideals: IdealStructure,
}
