//! The semigroup `S = {(m, n) : m ≥ 0, n ≥ 1}` with
//! `(m₁, n₁)·(m₂, n₂) = (2^{n₂} m₁ + m₂, n₁ + n₂)`: left amenable, not right
//! amenable, and a witness that averaging along a left Følner sequence can
//! miss a vector whose orbit reaches 0.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::folner::{DiscreteSemigroupModel, FolnerSequence, Side};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KlaweElement {
    pub m: BigUint,
    pub n: u32,
}

impl KlaweElement {
    pub fn new(m: impl Into<BigUint>, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::MalformedParameters("second coordinate must be at least 1".into()));
        }
        Ok(Self { m: m.into(), n })
    }

    pub(crate) fn small(m: u64, n: u32) -> Self {
        Self::new(m, n).expect("n ≥ 1")
    }
}

impl std::fmt::Display for KlaweElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

impl Serialize for KlaweElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.m.to_string(), self.n).serialize(s)
    }
}

pub fn klawe_mul(a: &KlaweElement, b: &KlaweElement) -> KlaweElement {
    KlaweElement {
        m: (&a.m << b.n) + &b.m,
        n: a.n + b.n,
    }
}

/// Indicator of `S·(0,1)`, in closed form: even first coordinate and `n ≥ 2`.
pub fn klawe_f(x: &KlaweElement) -> u8 {
    u8::from(x.n >= 2 && !x.m.bit(0))
}

/// Membership in `S·t` by searching all `s` with `s·t = x`.
pub fn in_right_ideal_by_search(x: &KlaweElement, t: &KlaweElement) -> bool {
    if x.n <= t.n || x.m < t.m {
        return false;
    }
    let n = x.n - t.n;
    // s = (m', n) with 2^{t.n} m' + t.m = x.m; scan m' up to the bound
    let bound = &x.m >> t.n;
    let mut m = BigUint::zero();
    while m <= bound {
        if klawe_mul(&KlaweElement { m: m.clone(), n }, t) == *x {
            return true;
        }
        m += 1u32;
    }
    false
}

#[derive(Clone, Copy, Debug, Default)]
pub struct KlaweSemigroup;

impl DiscreteSemigroupModel for KlaweSemigroup {
    type Element = KlaweElement;

    fn name(&self) -> String {
        "klawe".into()
    }

    fn multiply(&self, a: &KlaweElement, b: &KlaweElement) -> KlaweElement {
        klawe_mul(a, b)
    }
}

/// `F_N = {(m, n) : 0 ≤ m < 4^N, 1 ≤ n ≤ N}`, optionally right-translated by a
/// fixed element.
#[derive(Clone, Debug, Default)]
pub struct KlaweFolner {
    model: KlaweSemigroup,
    translate: Option<KlaweElement>,
}

impl KlaweFolner {
    pub fn new() -> Self {
        Self::default()
    }

    /// The sequence `F_N · t`.
    pub fn right_translated(t: KlaweElement) -> Self {
        Self {
            model: KlaweSemigroup,
            translate: Some(t),
        }
    }
}

pub fn klawe_folner(big_n: usize) -> Vec<KlaweElement> {
    KlaweFolner::new().set(big_n)
}

impl FolnerSequence for KlaweFolner {
    type Model = KlaweSemigroup;

    fn model(&self) -> &KlaweSemigroup {
        &self.model
    }

    fn side(&self) -> Side {
        Side::Left
    }

    fn set(&self, big_n: usize) -> Vec<KlaweElement> {
        let width = 1u64 << (2 * big_n);
        let mut out = Vec::with_capacity(width as usize * big_n);
        for n in 1..=big_n as u32 {
            for m in 0..width {
                let x = KlaweElement::small(m, n);
                out.push(match &self.translate {
                    Some(t) => klawe_mul(&x, t),
                    None => x,
                });
            }
        }
        out
    }

    fn name(&self) -> String {
        match &self.translate {
            Some(t) => format!("klawe F_N·{t}"),
            None => "klawe F_N".into(),
        }
    }
}

/// Window `{0..=m_max} × {1..=n_max}` on which functions are tabulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub m_max: u64,
    pub n_max: u32,
}

impl Window {
    pub fn elements(&self) -> impl Iterator<Item = KlaweElement> + '_ {
        (1..=self.n_max).flat_map(move |n| (0..=self.m_max).map(move |m| KlaweElement::small(m, n)))
    }

    pub fn tabulate(&self, g: impl Fn(&KlaweElement) -> u8) -> Vec<u8> {
        self.elements().map(|x| g(&x)).collect()
    }
}

/// `R_s f (t) = f(t·s)`.
pub fn translate_f(s: &KlaweElement, t: &KlaweElement) -> u8 {
    klawe_f(&klawe_mul(t, s))
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitClass {
    /// Name among `f`, `0`, `1`, `1_A - f`, or `other`.
    pub name: String,
    /// First translating element producing the class; `None` for `f` itself.
    pub witness: Option<KlaweElement>,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitReport {
    pub window: Window,
    pub translate_bound: Window,
    pub found: Vec<OrbitClass>,
    /// Functions in `{f, 0, 1, 1_A − f}` that never appeared.
    pub expected_but_missing: Vec<String>,
    /// Translates that are none of the four.
    pub unexpected: usize,
    pub matches_expected_list: bool,
}

/// Tabulates `{f} ∪ {R_s f : s ∈ translate_bound}` on `window` and compares
/// the distinct functions with `{f, 0, 1, 1_A − f}` where
/// `A = S·(0,1) ∪ S·(1,1)`.
pub fn klawe_orbit(window: Window, translate_bound: Window) -> OrbitReport {
    let one = KlaweElement::small(0, 1);
    let one_one = KlaweElement::small(1, 1);
    let in_a = |x: &KlaweElement| {
        in_right_ideal_by_search(x, &one) || in_right_ideal_by_search(x, &one_one)
    };
    let named: Vec<(String, Vec<u8>)> = vec![
        ("f".into(), window.tabulate(klawe_f)),
        ("0".into(), window.tabulate(|_| 0)),
        ("1".into(), window.tabulate(|_| 1)),
        (
            "1_A - f".into(),
            window.tabulate(|x| u8::from(in_a(x)) - klawe_f(x)),
        ),
    ];
    let mut found: Vec<OrbitClass> = vec![OrbitClass {
        name: "f".into(),
        witness: None,
        count: 1,
    }];
    let mut tables: Vec<Vec<u8>> = vec![named[0].1.clone()];
    let mut unexpected = 0;
    for s in translate_bound.elements() {
        let table = window.tabulate(|t| translate_f(&s, t));
        if let Some(i) = tables.iter().position(|t| *t == table) {
            found[i].count += 1;
            continue;
        }
        let name = named
            .iter()
            .find(|(_, t)| *t == table)
            .map(|(n, _)| n.clone())
            .unwrap_or_else(|| {
                unexpected += 1;
                "other".into()
            });
        tables.push(table);
        found.push(OrbitClass {
            name,
            witness: Some(s),
            count: 1,
        });
    }
    let names: BTreeSet<&str> = found.iter().map(|c| c.name.as_str()).collect();
    let expected_but_missing: Vec<String> = named
        .iter()
        .map(|(n, _)| n.clone())
        .filter(|n| !names.contains(n.as_str()))
        .collect();
    OrbitReport {
        window,
        translate_bound,
        matches_expected_list: expected_but_missing.is_empty() && unexpected == 0,
        found,
        expected_but_missing,
        unexpected,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    pub window: Window,
    /// `S·(0,1) ∩ S·(1,1)` on the window.
    pub intersection: usize,
    /// Elements in neither `S·(0,1)` nor `S·(1,1)`.
    pub uncovered: usize,
    /// Second coordinates occurring among the uncovered elements.
    pub uncovered_rows: Vec<u32>,
}

/// Enumerates which window elements lie in `S·(0,1)` and `S·(1,1)`.
pub fn klawe_coverage(window: Window) -> CoverageReport {
    let a = KlaweElement::small(0, 1);
    let b = KlaweElement::small(1, 1);
    let mut intersection = 0;
    let mut uncovered = 0;
    let mut rows = BTreeSet::new();
    for x in window.elements() {
        let (ia, ib) = (in_right_ideal_by_search(&x, &a), in_right_ideal_by_search(&x, &b));
        if ia && ib {
            intersection += 1;
        }
        if !ia && !ib {
            uncovered += 1;
            rows.insert(x.n);
        }
    }
    CoverageReport {
        window,
        intersection,
        uncovered,
        uncovered_rows: rows.into_iter().collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FolnerAverage {
    pub big_n: usize,
    /// `Σ_{s ∈ F_N·(0,1)} (R_s f)(s₀)`.
    pub numerator: String,
    /// `|F_N·(0,1)|`.
    pub denominator: String,
    pub equals_one: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub base_point: KlaweElement,
    /// `R_{(1,1)} f` vanishes on the window, so 0 is in the orbit of `f`.
    pub r11_window: Window,
    pub r11_vanishes: bool,
    /// Følner averages of `s ↦ (R_s f)(s₀)` over `F_N·(0,1)`.
    pub averages: Vec<FolnerAverage>,
    pub all_averages_one: bool,
    pub orbit: OrbitReport,
    pub coverage: CoverageReport,
    pub summary: String,
}

/// Exact integer average of `s ↦ g(s)` over `F_N·t`.
pub fn translated_average(big_n: usize, t: &KlaweElement, g: impl Fn(&KlaweElement) -> u8) -> (BigUint, BigUint) {
    let set = KlaweFolner::right_translated(t.clone()).set(big_n);
    let mut numerator = BigUint::zero();
    for s in &set {
        numerator += u32::from(g(s));
    }
    (numerator, BigUint::from(set.len()))
}

pub fn counterexample_report(n_max: usize, base_point: &KlaweElement) -> Result<CounterexampleReport> {
    if n_max == 0 {
        return Err(Error::MalformedParameters("N_max must be at least 1".into()));
    }
    if n_max > 10 {
        return Err(Error::MalformedParameters("N_max above 10 enumerates over 10^7 elements".into()));
    }
    let r11_window = Window { m_max: 20, n_max: 20 };
    let r11 = KlaweElement::small(1, 1);
    let r11_vanishes = r11_window.elements().all(|t| translate_f(&r11, &t) == 0);

    let shift = KlaweElement::small(0, 1);
    let averages: Vec<FolnerAverage> = (1..=n_max)
        .map(|big_n| {
            let (num, den) = translated_average(big_n, &shift, |s| translate_f(s, base_point));
            FolnerAverage {
                big_n,
                equals_one: num == den && !den.is_zero(),
                numerator: num.to_string(),
                denominator: den.to_string(),
            }
        })
        .collect();
    let all_averages_one = averages.iter().all(|a| a.equals_one);
    let orbit = klawe_orbit(Window { m_max: 15, n_max: 6 }, Window { m_max: 15, n_max: 6 });
    let coverage = klawe_coverage(Window { m_max: 40, n_max: 6 });
    let summary = format!(
        "R_(1,1) f {} on m, n <= 20, so 0 lies in the orbit closure of f; \
         yet the average of (R_s f)(s0) over F_N·(0,1) {} for N = 1..={n_max}. \
         Translates found: {{{}}}; expected {{f, 0, 1, 1_A - f}}{}. \
         Elements outside S·(0,1) ∪ S·(1,1): rows n ∈ {:?}.",
        if r11_vanishes { "vanishes" } else { "does not vanish" },
        if all_averages_one { "is exactly 1" } else { "is not always 1" },
        orbit.found.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", "),
        if orbit.expected_but_missing.is_empty() {
            String::new()
        } else {
            format!(" (missing: {})", orbit.expected_but_missing.join(", "))
        },
        coverage.uncovered_rows,
    );
    Ok(CounterexampleReport {
        base_point: base_point.clone(),
        r11_window,
        r11_vanishes,
        averages,
        all_averages_one,
        orbit,
        coverage,
        summary,
    })
}

/// `|s·F_N △ F_N| / |F_N|` as an exact fraction.
pub fn klawe_defect_exact(s: &KlaweElement, big_n: usize) -> (usize, usize) {
    use std::collections::HashSet;
    let set = klawe_folner(big_n);
    let original: HashSet<&KlaweElement> = set.iter().collect();
    let moved: Vec<KlaweElement> = set.iter().map(|x| klawe_mul(s, x)).collect();
    let moved_set: HashSet<&KlaweElement> = moved.iter().collect();
    (moved_set.symmetric_difference(&original).count(), set.len())
}
