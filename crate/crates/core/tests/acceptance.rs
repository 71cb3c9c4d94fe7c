//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so every line is printed; exits nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use jdlg::battery::{characterization_battery, BatteryConfig, Verdict};
use jdlg::catalog::{catalog, cyclic_shift, markov_two_state, scaling_example};
use jdlg::folner::{density, folner_defect, BoxSequence};
use jdlg::klawe::{counterexample_report, KlaweElement};
use jdlg::linalg::{c, diag, frobenius, spectral_norm, unit_root, ComplexMatrix};
use jdlg::semigroup::{ElementSet, FiniteSemigroup};
use jdlg::split::{
    decompose_by_gram, decompose_idempotent, decompose_spectral, reconcile, ultrafilter_shadow_idempotent,
};
use jdlg::unitary::{decompose_irreducibles, invariant_inner_product, sample_words, verify_weak_equivalence, AveragingSource};
use jdlg::{JdLGSplit, MatrixRepresentation, Tolerances};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fmt_err(e: jdlg::Error) -> String {
    e.to_string()
}

// 1 ------------------------------------------------------------------------

fn scaling_split() -> Check {
    let rep = scaling_example().representation;
    let tol = Tolerances::default();
    let mut notes = Vec::new();
    for split in [
        decompose_spectral(&rep, &tol).map_err(fmt_err)?,
        decompose_idempotent(&rep, &tol).map_err(fmt_err)?,
    ] {
        let q = spectral_norm(&split.projector_q);
        ensure(split.dim_r() == 0, format!("{}: dim E_r = {}", split.method, split.dim_r()))?;
        ensure(split.dim_aws() == 1, format!("{}: dim E_aws = {}", split.method, split.dim_aws()))?;
        ensure(q < 1e-10, format!("{}: |Q| = {q:e}", split.method))?;
        notes.push(format!("{} |Q| = {q:.1e}", split.method));
    }
    Ok(notes.join(", "))
}

// 2 ------------------------------------------------------------------------

/// `F_N·(0,1) = {(2m, n + 1)}`, and `s₀·s = (2^{n_s} m₀ + m_s, n₀ + n_s)`;
/// `f` is 1 exactly when the second coordinate is at least 2 and the first
/// is even. Plain `u128` arithmetic, independent of the library.
fn klawe_oracle_average(big_n: u32, s0: (u128, u32)) -> (u128, u128) {
    let mut hits = 0u128;
    let mut total = 0u128;
    for n in 1..=big_n {
        for m in 0..(1u128 << (2 * big_n)) {
            let (sm, sn) = (2 * m, n + 1);
            let (pm, pn) = ((s0.0 << sn) + sm, s0.1 + sn);
            hits += u128::from(pn >= 2 && pm % 2 == 0);
            total += 1;
        }
    }
    (hits, total)
}

fn klawe_counterexample() -> Check {
    let s0 = KlaweElement::new(0u32, 1).map_err(fmt_err)?;
    let report = counterexample_report(8, &s0).map_err(fmt_err)?;
    ensure(report.r11_vanishes, "R_(1,1) f does not vanish on m, n <= 20")?;
    ensure(report.averages.len() == 8, "expected averages for N = 1..=8")?;
    for a in &report.averages {
        let (hits, total) = klawe_oracle_average(a.big_n as u32, (0, 1));
        ensure(
            a.equals_one && a.numerator == a.denominator,
            format!("N = {}: average {}/{}", a.big_n, a.numerator, a.denominator),
        )?;
        ensure(
            a.numerator == hits.to_string() && a.denominator == total.to_string(),
            format!("N = {}: oracle gives {hits}/{total}", a.big_n),
        )?;
    }
    let last = report.averages.last().expect("nonempty");
    Ok(format!(
        "averages exactly 1 for N = 1..=8 (N = 8: {}/{}), R_(1,1) f = 0 on the 20x20 window",
        last.numerator, last.denominator
    ))
}

// 3 ------------------------------------------------------------------------

fn method_agreement() -> Check {
    let tol = Tolerances::default();
    let boxes = BoxSequence::new(1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let d = rng.gen_range(1..=8);
        let (rep, _) = common::random_single(&mut rng, d);
        let spectral = decompose_spectral(&rep, &tol).map_err(|e| format!("case {case} spectral: {e}"))?;
        let idempotent = decompose_idempotent(&rep, &tol).map_err(|e| format!("case {case} idempotent: {e}"))?;
        let gram = decompose_by_gram(&rep, &boxes, &tol).map_err(|e| format!("case {case} gram: {e}"))?;
        for (a, b) in [(&spectral, &idempotent), (&spectral, &gram), (&idempotent, &gram)] {
            let r = reconcile(a, b).map_err(fmt_err)?;
            worst = worst.max(r.projector_distance);
            ensure(
                r.projector_distance < 1e-6,
                format!("case {case} (d = {d}): {} vs {} distance {:e}", a.method, b.method, r.projector_distance),
            )?;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    ensure(elapsed < 30.0, format!("took {elapsed:.1} s"))?;
    Ok(format!("50 cases, worst projector distance {worst:.1e}, {elapsed:.1} s"))
}

// 4 ------------------------------------------------------------------------

/// Ideal structure computed from the definitions by enumerating subsets.
struct BruteIdeals {
    minimal_right: BTreeSet<ElementSet>,
    minimal_left: BTreeSet<ElementSet>,
    kernel: ElementSet,
    kernel_is_group: bool,
}

fn brute_ideals(table: &[Vec<usize>]) -> BruteIdeals {
    let n = table.len();
    let subsets: Vec<ElementSet> = (1u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
        .collect();
    let is_right = |set: &ElementSet| set.iter().all(|&a| (0..n).all(|s| set.contains(&table[a][s])));
    let is_left = |set: &ElementSet| set.iter().all(|&a| (0..n).all(|s| set.contains(&table[s][a])));
    let minimal = |ideals: Vec<&ElementSet>| -> BTreeSet<ElementSet> {
        ideals
            .iter()
            .filter(|i| !ideals.iter().any(|j| j.len() < i.len() && j.is_subset(i)))
            .map(|i| (*i).clone())
            .collect()
    };
    let right: Vec<&ElementSet> = subsets.iter().filter(|s| is_right(s)).collect();
    let left: Vec<&ElementSet> = subsets.iter().filter(|s| is_left(s)).collect();
    let kernel = subsets
        .iter()
        .filter(|s| is_right(s) && is_left(s))
        .fold(None::<ElementSet>, |acc, s| match acc {
            None => Some(s.clone()),
            Some(k) => Some(k.intersection(s).copied().collect()),
        })
        .expect("S itself is an ideal");
    let identity = kernel
        .iter()
        .copied()
        .find(|&e| kernel.iter().all(|&k| table[e][k] == k && table[k][e] == k));
    let kernel_is_group = identity.is_some_and(|e| {
        kernel
            .iter()
            .all(|&k| kernel.iter().any(|&x| table[k][x] == e && table[x][k] == e))
    });
    BruteIdeals {
        minimal_right: minimal(right),
        minimal_left: minimal(left),
        kernel,
        kernel_is_group,
    }
}

fn group_table<T: PartialEq + Clone>(elements: &[T], mul: impl Fn(&T, &T) -> T) -> Vec<Vec<usize>> {
    let index = |x: &T| elements.iter().position(|y| y == x).expect("closed under product");
    elements
        .iter()
        .map(|a| elements.iter().map(|b| index(&mul(a, b))).collect())
        .collect()
}

/// Abelian group `Z_{m₁} × … × Z_{m_k}`.
fn abelian(moduli: &[usize]) -> Vec<Vec<usize>> {
    let mut elements: Vec<Vec<usize>> = vec![vec![]];
    for &m in moduli {
        elements = elements
            .into_iter()
            .flat_map(|e| {
                (0..m).map(move |x| {
                    let mut v = e.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    group_table(&elements, |a, b| {
        a.iter().zip(b).zip(moduli).map(|((x, y), m)| (x + y) % m).collect()
    })
}

/// Dihedral group of order `2n` as pairs `r^i s^j`.
fn dihedral(n: usize) -> Vec<Vec<usize>> {
    let elements: Vec<(usize, usize)> = (0..2).flat_map(|j| (0..n).map(move |i| (i, j))).collect();
    group_table(&elements, |&(i, j), &(k, l)| {
        let k = if j == 1 { (n - k) % n } else { k };
        ((i + k) % n, (j + l) % 2)
    })
}

/// Quaternion group as `±1, ±i, ±j, ±k` encoded (sign, unit index).
fn quaternion() -> Vec<Vec<usize>> {
    // unit products e_a e_b = sign · e_c for units 1, i, j, k
    const PRODUCT: [[(i8, usize); 4]; 4] = [
        [(1, 0), (1, 1), (1, 2), (1, 3)],
        [(1, 1), (-1, 0), (1, 3), (-1, 2)],
        [(1, 2), (-1, 3), (-1, 0), (1, 1)],
        [(1, 3), (1, 2), (-1, 1), (-1, 0)],
    ];
    let elements: Vec<(i8, usize)> = [1i8, -1].iter().flat_map(|&s| (0..4).map(move |u| (s, u))).collect();
    group_table(&elements, |&(s, a), &(t, b)| {
        let (sign, u) = PRODUCT[a][b];
        (s * t * sign, u)
    })
}

fn groups_up_to_eight() -> Vec<(&'static str, Vec<Vec<usize>>)> {
    vec![
        ("C1", abelian(&[1])),
        ("C2", abelian(&[2])),
        ("C3", abelian(&[3])),
        ("C4", abelian(&[4])),
        ("C2xC2", abelian(&[2, 2])),
        ("C5", abelian(&[5])),
        ("C6", abelian(&[6])),
        ("S3", dihedral(3)),
        ("C7", abelian(&[7])),
        ("C8", abelian(&[8])),
        ("C2xC4", abelian(&[2, 4])),
        ("C2xC2xC2", abelian(&[2, 2, 2])),
        ("D4", dihedral(4)),
        ("Q8", quaternion()),
    ]
}

fn matches_oracle(s: &FiniteSemigroup) -> Result<(), String> {
    let got = s.ideal_structure();
    let want = brute_ideals(s.table());
    let right: BTreeSet<ElementSet> = got.minimal_right_ideals.iter().cloned().collect();
    let left: BTreeSet<ElementSet> = got.minimal_left_ideals.iter().cloned().collect();
    ensure(right == want.minimal_right, format!("minimal right ideals differ for {:?}", s.table()))?;
    ensure(left == want.minimal_left, format!("minimal left ideals differ for {:?}", s.table()))?;
    ensure(got.kernel == want.kernel, format!("kernel differs for {:?}", s.table()))?;
    ensure(
        got.kernel_is_group == want.kernel_is_group,
        format!("group test differs for {:?}", s.table()),
    )
}

#[derive(serde::Deserialize)]
struct StoredTables {
    semigroups: Vec<StoredTable>,
}

#[derive(serde::Deserialize)]
struct StoredTable {
    order: usize,
    table: Vec<Vec<usize>>,
}

fn finite_semigroups() -> Check {
    let l2 = FiniteSemigroup::build(vec![vec![0, 0], vec![1, 1]]).map_err(fmt_err)?;
    let adm = l2.is_jdlg_admissible();
    ensure(!adm.admissible, "left-zero L2 reported admissible")?;
    ensure(
        adm.ideals.minimal_right_ideals.len() == 2,
        format!("L2 has {} minimal right ideals", adm.ideals.minimal_right_ideals.len()),
    )?;
    matches_oracle(&l2)?;

    let groups = groups_up_to_eight();
    for (name, table) in &groups {
        let g = FiniteSemigroup::build(table.clone()).map_err(|e| format!("{name}: {e}"))?;
        let adm = g.is_jdlg_admissible();
        ensure(adm.admissible, format!("{name} not admissible"))?;
        ensure(adm.ideals.kernel.len() == g.order(), format!("{name}: kernel is not S"))?;
        matches_oracle(&g)?;
    }

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/small_semigroups.json");
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let stored: StoredTables = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let mut counts = [0usize; 5];
    for entry in &stored.semigroups {
        counts[entry.order] += 1;
        let s = FiniteSemigroup::build(entry.table.clone()).map_err(fmt_err)?;
        matches_oracle(&s)?;
    }
    ensure(counts[1..] == [1, 5, 24, 188], format!("stored counts {:?}", &counts[1..]))?;
    Ok(format!(
        "L2 has two minimal right ideals; {} groups of order <= 8 admissible; {} stored semigroups match the subset oracle",
        groups.len(),
        stored.semigroups.len()
    ))
}

// 5 ------------------------------------------------------------------------

fn markov_case() -> Check {
    let entry = markov_two_state(0.3, 0.3).map_err(fmt_err)?;
    let rep = entry.representation;
    let split = decompose_spectral(&rep, &Tolerances::default()).map_err(fmt_err)?;
    ensure(split.dim_r() == 1, format!("dim E_r = {}", split.dim_r()))?;
    let xi = split.basis_aws[0].clone();
    let t = &rep.generators()[0].matrix;
    // Cesàro average over {1..n} of |<T^s xi, e_j>|, for n = 30.
    let n = 30;
    let mut sums = vec![0.0; rep.dim()];
    let mut v = xi.clone();
    for _ in 1..=n {
        v = t * v;
        for (acc, z) in sums.iter_mut().zip(v.iter()) {
            *acc += z.norm();
        }
    }
    let worst = sums.iter().map(|s| s / n as f64).fold(0.0, f64::max);
    ensure(
        worst < 1e-3,
        format!(
            "dim E_r = 1, but for unit xi in E_aws the average at n = 30 is {worst:.4e} >= 1e-3 \
             (sum of 0.4^s is 2/3, so the average decays like 1/n, not geometrically)"
        ),
    )?;
    Ok(format!("dim E_r = 1, average at n = 30 is {worst:.2e}"))
}

// 6 ------------------------------------------------------------------------

fn battery_consistency() -> Check {
    let tol = Tolerances::default();
    let mut checked = 0;
    for entry in catalog() {
        let rep = &entry.representation;
        let split = decompose_idempotent(rep, &tol).map_err(|e| format!("{}: {e}", entry.name))?;
        let boxes = entry.folner().ok_or_else(|| format!("{}: no index model", entry.name))?;
        let cfg = BatteryConfig::for_rank(boxes.rank());
        let labelled = split
            .basis_r
            .iter()
            .map(|v| (v, Verdict::NotAws))
            .chain(split.basis_aws.iter().map(|v| (v, Verdict::Aws)));
        for (i, (v, expected)) in labelled.enumerate() {
            let report = characterization_battery(rep, v, &boxes, &cfg).map_err(fmt_err)?;
            let verdicts: Vec<String> = report
                .results
                .iter()
                .map(|r| format!("{}/p{}={:?}", r.item.label(), r.p, r.verdict))
                .collect();
            ensure(
                report.results.len() == 8 && report.verdict() == Some(expected),
                format!("{} vector {i}: expected {expected:?}, got {}", entry.name, verdicts.join(" ")),
            )?;
            checked += 1;
        }
    }
    Ok(format!("{checked} basis vectors over {} catalog entries, all eight item verdicts agree", catalog().len()))
}

// 7 ------------------------------------------------------------------------

fn unitary_structure() -> Check {
    let tol = Tolerances::default();
    let rep = cyclic_shift(3).map_err(fmt_err)?.representation;
    let ip = invariant_inner_product(&rep, AveragingSource::KernelHaar, &tol).map_err(fmt_err)?;
    let gram_err = frobenius(&(&ip.gram - ComplexMatrix::identity(3, 3)));
    ensure(gram_err < 1e-8, format!("inner product differs from I by {gram_err:e}"))?;
    let systems = decompose_irreducibles(&rep, &ip, &tol).map_err(fmt_err)?;
    ensure(systems.len() == 3, format!("{} systems", systems.len()))?;
    let mut roots = vec![unit_root(0.0), unit_root(1.0 / 3.0), unit_root(2.0 / 3.0)];
    for s in &systems {
        ensure(s.dim() == 1 && s.irreducible, "a system is not 1-dimensional and irreducible")?;
        let chi = s.chi[0].1[(0, 0)];
        let hit = roots
            .iter()
            .position(|r| (r - chi).norm() < 1e-8)
            .ok_or_else(|| format!("chi = {chi} is not an unused cube root of unity"))?;
        roots.remove(hit);
    }
    let words = sample_words(1, 50);
    let discrepancy = verify_weak_equivalence(&rep, &systems, &words, &tol).map_err(fmt_err)?;
    ensure(discrepancy < 1e-10, format!("weak-equivalence discrepancy {discrepancy:e}"))?;
    Ok(format!(
        "three 1-dimensional systems on the cube roots of unity, |G - I| = {gram_err:.1e}, discrepancy {discrepancy:.1e}"
    ))
}

// 8 ------------------------------------------------------------------------

fn folner_calculus() -> Check {
    let boxes = BoxSequence::new(1, 1);
    for n in 1..=500 {
        let defect = folner_defect(&boxes, &vec![1], n);
        ensure(defect == 2.0 / n as f64, format!("n = {n}: defect {defect} != 2/n"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let predicates = 40;
    for case in 0..predicates {
        let rank = rng.gen_range(1..=2);
        let boxes = BoxSequence::new(rank, rng.gen_range(0..=1));
        let n_max = if rank == 1 { 300 } else { 40 };
        // membership by a seeded hash with a random threshold, or a random period
        let key: u64 = rng.gen();
        let p: f64 = rng.gen();
        let period: i64 = rng.gen_range(1..7);
        let hashed = move |s: &Vec<i64>, salt: u64| {
            let mut h = key ^ salt;
            for &x in s {
                h = (h ^ x as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
                h ^= h >> 29;
            }
            (h >> 11) as f64 / (1u64 << 53) as f64
        };
        let a = move |s: &Vec<i64>| {
            if case % 2 == 0 {
                hashed(s, 1) < p
            } else {
                s.iter().sum::<i64>().rem_euclid(period) == 0
            }
        };
        let b = move |s: &Vec<i64>| hashed(s, 2) < 0.3;

        let empty = density(&boxes, |_| false, n_max);
        let full = density(&boxes, |_| true, n_max);
        ensure(
            empty.upper == 0.0 && empty.lower == 0.0 && full.upper == 1.0 && full.lower == 1.0,
            format!("case {case}: empty {empty:?}, full {full:?}"),
        )?;
        let da = density(&boxes, a, n_max);
        let dc = density(&boxes, move |s| !a(s), n_max);
        ensure(
            (da.upper - (1.0 - dc.lower)).abs() < 1e-12 && (da.lower - (1.0 - dc.upper)).abs() < 1e-12,
            format!("case {case}: complement duality {da:?} vs {dc:?}"),
        )?;
        let db = density(&boxes, b, n_max);
        let du = density(&boxes, move |s| a(s) || b(s), n_max);
        ensure(
            du.upper <= da.upper + db.upper + 1e-12,
            format!("case {case}: union {du:?} exceeds {da:?} + {db:?}"),
        )?;
    }
    Ok(format!("defect of s = 1 is exactly 2/n for n <= 500; density axioms hold on {predicates} predicates"))
}

// 9 ------------------------------------------------------------------------

fn ultrafilter_shadow() -> Check {
    let tol = Tolerances::default();
    let rep = MatrixRepresentation::single(diag(&[unit_root(0.2), c(0.6, 0.0)])).map_err(fmt_err)?;
    let shadow = ultrafilter_shadow_idempotent(&rep, 200, &tol).map_err(fmt_err)?;
    let q = decompose_spectral(&rep, &tol).map_err(fmt_err)?.projector_q;
    let err = frobenius(&(&shadow.candidate - &q));
    ensure(err < 1e-4, format!("n = {}: |T^n - Q| = {err:e}", shadow.n))?;
    Ok(format!("n = {}, |T^n - Q_spectral| = {err:.1e}", shadow.n))
}

// 10 -----------------------------------------------------------------------

fn check_split(rep: &MatrixRepresentation, s: &JdLGSplit, tol: &Tolerances) -> Result<(), TestCaseError> {
    let q = &s.projector_q;
    let idem = frobenius(&(q * q - q));
    prop_assert!(idem <= 10.0 * tol.idempotent_tol, "{}: |Q^2 - Q| = {idem:e}", s.method);
    for g in rep.matrices() {
        let comm = frobenius(&(q * g - g * q));
        prop_assert!(comm <= 10.0 * tol.idempotent_tol, "{}: |Qg - gQ| = {comm:e}", s.method);
        for basis in [&s.basis_r, &s.basis_aws] {
            for v in basis.iter() {
                let w = g * v;
                let mut r = w.clone();
                for b in basis.iter() {
                    r -= b * b.dotc(&w);
                }
                prop_assert!(r.norm() <= 10.0 * tol.rank_tol, "{}: subspace not invariant ({:e})", s.method, r.norm());
            }
        }
    }
    prop_assert_eq!(s.dim_r() + s.dim_aws(), rep.dim());
    prop_assert!(s.satisfies_invariants(tol));
    Ok(())
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

fn invariant_suite() -> Check {
    let tol = Tolerances::default();
    let boxes = BoxSequence::new(1, 1);
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 32,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let accepted = std::cell::Cell::new(0usize);
    runner
        .run(&(any::<u64>(), 1usize..=6, any::<bool>()), |(seed, d, pair)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rep = if pair {
                common::random_pair(&mut rng, d)
            } else {
                common::random_single(&mut rng, d).0
            };
            let run = || {
                let mut out = Vec::new();
                if !pair {
                    out.push(decompose_spectral(&rep, &tol));
                    out.push(decompose_by_gram(&rep, &boxes, &tol));
                }
                out.push(decompose_idempotent(&rep, &tol));
                out
            };
            let one = in_pool(1, run);
            let four = in_pool(4, run);
            for (a, b) in one.iter().zip(&four) {
                match (a, b) {
                    (Ok(a), Ok(b)) => {
                        check_split(&rep, a, &tol)?;
                        prop_assert!(a.projector_q == b.projector_q, "{} differs across thread counts", a.method);
                        accepted.set(accepted.get() + 1);
                    }
                    (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
                    _ => prop_assert!(false, "outcome differs across thread counts"),
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    ensure(accepted.get() > 0, "no split was accepted")?;
    Ok(format!("{} accepted splits over 32 generated representations, identical on 1 and 4 threads", accepted.get()))
}

// --------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 10] = [
        ("scaling example splits to E_aws", scaling_split),
        ("Klawe counterexample", klawe_counterexample),
        ("method agreement", method_agreement),
        ("finite semigroup structure", finite_semigroups),
        ("Markov two-state chain", markov_case),
        ("characterization battery consistency", battery_consistency),
        ("unitary structure of cyclic_shift(3)", unitary_structure),
        ("Folner calculus", folner_calculus),
        ("ultrafilter shadow", ultrafilter_shadow),
        ("invariant suite", invariant_suite),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
