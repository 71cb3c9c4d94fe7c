use std::fmt::Write as _;
use std::path::PathBuf;

use jdlg::battery::{characterization_battery, convergence_curve, BatteryConfig, BatteryReport, Verdict};
use jdlg::catalog::{by_name, catalog, names, CatalogEntry};
use jdlg::closure::{approximate_closure, find_minimal_idempotent};
use jdlg::folner::{BoxSequence, FolnerSequence};
use jdlg::klawe::{counterexample_report, KlaweElement};
use jdlg::linalg::{basis_vector, frobenius, numerical_rank, ComplexMatrix, ComplexVector};
use jdlg::representation::{MatrixJson, VectorJson};
use jdlg::semigroup::FiniteSemigroup;
use jdlg::split::{decompose_by_gram, decompose_idempotent, decompose_spectral, reconcile};
use jdlg::unitary::{
    decompose_irreducibles, invariant_inner_product, sample_words, verify_weak_equivalence, AveragingSource,
};
use jdlg::{Error, JdLGSplit, MatrixRepresentation, Method};
use serde_json::{json, Value};

use crate::failure::{Failure, Outcome, NOT_ADMISSIBLE, OK, UNDECIDED};
use crate::settings::{CommandKind, Format, MethodChoice, Settings, SourceChoice};

/// Word length for the weak-equivalence check.
const WORD_LENGTH: usize = 50;
const COUNTEREXAMPLE_DEPTH: usize = 8;

/// What a subcommand produced. `code` is the exit status once the report is written.
pub struct Report {
    pub json: Value,
    pub csv: Option<String>,
    pub text: String,
    pub default_format: Format,
    pub code: u8,
    /// Side files such as convergence curves.
    pub extra: Vec<(PathBuf, String)>,
}

impl Report {
    fn new(json: Value, text: String) -> Self {
        Self {
            json,
            csv: None,
            text,
            default_format: Format::Json,
            code: OK,
            extra: Vec::new(),
        }
    }

    pub fn render(&self, format: Option<Format>) -> Outcome<String> {
        match format.unwrap_or(self.default_format) {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("report serializes");
                s.push('\n');
                Ok(s)
            }
            Format::Csv => self
                .csv
                .clone()
                .ok_or_else(|| Failure::malformed("this command has no CSV output")),
            Format::Text => Ok(self.text.clone()),
        }
    }
}

pub fn run(s: &Settings) -> Outcome<Report> {
    match s.command {
        CommandKind::AnalyzeSemigroup => analyze_semigroup(s),
        CommandKind::Decompose => decompose(s),
        CommandKind::Characterize => characterize(s),
        CommandKind::UnitaryStructure => unitary_structure(s),
        CommandKind::Counterexample => counterexample(s),
        CommandKind::Closure => closure(s),
        CommandKind::ListCatalog => Ok(list_catalog()),
    }
}

fn read(path: &PathBuf) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::malformed(format!("cannot read {}: {e}", path.display())))
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

struct Subject {
    label: Value,
    rep: MatrixRepresentation,
    expected_q: Option<ComplexMatrix>,
}

fn subject(s: &Settings) -> Outcome<Subject> {
    if let Some(name) = &s.catalog {
        let CatalogEntry {
            name: entry,
            representation,
            expected_q,
            ..
        } = by_name(name)?;
        return Ok(Subject {
            label: json!({ "catalog": name, "entry": entry }),
            rep: representation,
            expected_q,
        });
    }
    let path = s
        .input
        .as_ref()
        .ok_or_else(|| Failure::malformed("give a representation with --input or --catalog"))?;
    Ok(Subject {
        label: json!({ "input": path.display().to_string() }),
        rep: MatrixRepresentation::from_json(&read(path)?)?,
        expected_q: None,
    })
}

fn parse_ints(text: &str, count: usize) -> Outcome<Vec<i64>> {
    let v: Vec<i64> = text
        .split(',')
        .map(|x| x.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::malformed(format!("bad integer list `{text}`: {e}")))?;
    if v.len() != count {
        return Err(Failure::malformed(format!("expected {count} integers in `{text}`")));
    }
    Ok(v)
}

fn folner(s: &Settings, rep: &MatrixRepresentation) -> Outcome<BoxSequence> {
    let k = rep.generators().len();
    let spec = s.folner.as_deref().unwrap_or("box");
    match spec.split_once(':') {
        None if spec == "box" => Ok(BoxSequence::new(k, rep.lattice_start(s.tol.rank_tol.max(1e-10))?)),
        Some(("box", args)) => Ok(BoxSequence::new(k, parse_ints(args, 1)?[0])),
        Some(("shifted", args)) => {
            let v = parse_ints(args, 2)?;
            Ok(BoxSequence::translated(k, v[0], v[1]))
        }
        _ => Err(Failure::malformed(format!(
            "unknown Følner sequence `{spec}`; use box, box:<start> or shifted:<start>,<drift>"
        ))),
    }
}

fn matrix_text(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|z| format!("{:+.6e}{:+.6e}i", z.re, z.im)).collect();
        let _ = writeln!(out, "  [{}]", cells.join(", "));
    }
    out
}

fn analyze_semigroup(s: &Settings) -> Outcome<Report> {
    let path = s
        .input
        .as_ref()
        .ok_or_else(|| Failure::malformed("analyze-semigroup needs a Cayley table via --input"))?;
    let sg = FiniteSemigroup::from_json(&read(path)?)?;
    let adm = sg.is_jdlg_admissible();
    let labelled = |sets: &[jdlg::semigroup::ElementSet]| -> Vec<Vec<String>> {
        sets.iter().map(|set| set.iter().map(|&a| sg.label(a)).collect()).collect()
    };
    let ideals = &adm.ideals;
    let json = json!({
        "input": path.display().to_string(),
        "order": sg.order(),
        "admissible": adm.admissible,
        "witness": adm.witness,
        "ideal_structure": ideals,
        "labelled": {
            "minimal_right_ideals": labelled(&ideals.minimal_right_ideals),
            "minimal_left_ideals": labelled(&ideals.minimal_left_ideals),
            "kernel": labelled(std::slice::from_ref(&ideals.kernel))[0],
            "idempotents": labelled(std::slice::from_ref(&ideals.idempotents))[0],
        },
    });
    let mut text = format!(
        "order {}: {}\n{}\n",
        sg.order(),
        if adm.admissible { "admissible" } else { "not admissible" },
        adm.witness
    );
    for r in &ideals.minimal_right_ideals {
        let _ = writeln!(text, "minimal right ideal {}", sg.format_set(r));
    }
    for l in &ideals.minimal_left_ideals {
        let _ = writeln!(text, "minimal left ideal {}", sg.format_set(l));
    }
    let _ = writeln!(text, "kernel {}", sg.format_set(&ideals.kernel));
    let mut report = Report::new(json, text);
    if !adm.admissible {
        report.code = NOT_ADMISSIBLE;
    }
    Ok(report)
}

fn run_method(method: Method, s: &Settings, rep: &MatrixRepresentation) -> Outcome<JdLGSplit> {
    Ok(match method {
        Method::Spectral => decompose_spectral(rep, &s.tol)?,
        Method::Idempotent => decompose_idempotent(rep, &s.tol)?,
        Method::Gram => decompose_by_gram(rep, &folner(s, rep)?, &s.tol)?,
    })
}

fn decompose(s: &Settings) -> Outcome<Report> {
    let subj = subject(s)?;
    let rep = &subj.rep;
    let mut skipped = Vec::new();
    let methods = match s.method {
        MethodChoice::Spectral => vec![Method::Spectral],
        MethodChoice::Idempotent => vec![Method::Idempotent],
        MethodChoice::Gram => vec![Method::Gram],
        MethodChoice::All => {
            let mut m = Vec::new();
            if rep.generators().len() == 1 {
                m.push(Method::Spectral);
            } else {
                skipped.push(json!({ "method": "spectral", "reason": "needs a single generator" }));
            }
            m.push(Method::Idempotent);
            match rep.effective_index_model(s.tol.rank_tol.max(1e-10)) {
                Ok(_) => m.push(Method::Gram),
                Err(e) => skipped.push(json!({ "method": "gram", "reason": e.to_string() })),
            }
            m
        }
    };
    let splits: Vec<JdLGSplit> = methods
        .iter()
        .map(|&m| run_method(m, s, rep))
        .collect::<Outcome<_>>()?;

    let mut reconciliations = Vec::new();
    if s.reconcile {
        let expected = subj
            .expected_q
            .clone()
            .map(|q| JdLGSplit::from_projector(rep, q, Method::Spectral))
            .transpose()?;
        let mut named: Vec<(String, &JdLGSplit)> = splits.iter().map(|x| (x.method.to_string(), x)).collect();
        if let Some(e) = &expected {
            named.push(("expected".into(), e));
        }
        for i in 0..named.len() {
            for j in i + 1..named.len() {
                let r = reconcile(named[i].1, named[j].1)?;
                reconciliations.push(json!({
                    "a": named[i].0,
                    "b": named[j].0,
                    "projector_distance": r.projector_distance,
                    "max_angle": r.max_angle(),
                    "principal_angles_r": r.principal_angles_r,
                    "principal_angles_aws": r.principal_angles_aws,
                }));
            }
        }
    }

    let json = json!({
        "source": subj.label,
        "dim": rep.dim(),
        "profile": s.profile,
        "splits": splits.iter().map(|x| x.to_json_value(&s.tol)).collect::<Vec<_>>(),
        "skipped": skipped,
        "reconciliations": reconciliations,
    });

    let mut rows = vec![[
        "method",
        "dim",
        "dim_r",
        "dim_aws",
        "idempotency",
        "commutation",
        "invariance",
        "gram_kernel_angle",
        "gram_index",
    ]
    .map(String::from)
    .to_vec()];
    let mut text = String::new();
    for x in &splits {
        let r = &x.residuals;
        rows.push(vec![
            x.method.to_string(),
            x.dim().to_string(),
            x.dim_r().to_string(),
            x.dim_aws().to_string(),
            num(r.idempotency),
            num(r.commutation),
            num(r.invariance),
            r.gram_kernel_angle.map(num).unwrap_or_default(),
            r.gram_index.map(|n| n.to_string()).unwrap_or_default(),
        ]);
        let _ = writeln!(
            text,
            "{}: dim E_r = {}, dim E_aws = {}, |Q^2 - Q| = {:e}, |[Q, g]| = {:e}, invariance {:e}",
            x.method,
            x.dim_r(),
            x.dim_aws(),
            r.idempotency,
            r.commutation,
            r.invariance
        );
        text.push_str(&matrix_text(&x.projector_q));
    }
    for r in &reconciliations {
        let _ = writeln!(
            text,
            "{} vs {}: projector distance {:e}",
            r["a"].as_str().unwrap_or_default(),
            r["b"].as_str().unwrap_or_default(),
            r["projector_distance"].as_f64().unwrap_or(f64::NAN)
        );
    }
    let mut report = Report::new(json, text);
    report.csv = Some(csv_string(rows));
    Ok(report)
}

fn parse_vector(text: &str, dim: usize) -> Outcome<ComplexVector> {
    let v = if let Some(i) = text.strip_prefix('e') {
        let i: usize = i
            .parse()
            .map_err(|_| Failure::malformed(format!("bad basis vector `{text}`")))?;
        if i >= dim {
            return Err(Failure::malformed(format!("basis vector e{i} outside dimension {dim}")));
        }
        basis_vector(dim, i)
    } else if let Ok(pairs) = serde_json::from_str::<VectorJson>(text) {
        pairs.into_vector()?
    } else {
        let reals: Vec<f64> = serde_json::from_str(text).map_err(|e| {
            Failure::malformed(format!("vector must be e<i>, [[re, im], ...] or [x, ...]: {e}"))
        })?;
        VectorJson(reals.into_iter().map(|x| [x, 0.0]).collect()).into_vector()?
    };
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        }
        .into());
    }
    Ok(v)
}

fn verdict_name(v: Option<Verdict>) -> &'static str {
    match v {
        Some(Verdict::Aws) => "aws",
        Some(Verdict::NotAws) => "not-aws",
        Some(Verdict::Undecided) => "undecided",
        None => "disagreement",
    }
}

fn characterize(s: &Settings) -> Outcome<Report> {
    let subj = subject(s)?;
    let rep = &subj.rep;
    let boxes = folner(s, rep)?;
    let mut cfg = BatteryConfig::for_rank(rep.generators().len());
    if let Some(d) = s.depth {
        cfg.depth = d;
    }

    // (label, vector, verdict implied by the split)
    let vectors: Vec<(String, ComplexVector, Option<Verdict>)> = match &s.vector {
        Some(text) => vec![("given".into(), parse_vector(text, rep.dim())?, None)],
        None => {
            let split = decompose_idempotent(rep, &s.tol)?;
            let r = split.basis_r.iter().enumerate().map(|(i, v)| (format!("r{i}"), v.clone(), Some(Verdict::NotAws)));
            let a = split.basis_aws.iter().enumerate().map(|(i, v)| (format!("aws{i}"), v.clone(), Some(Verdict::Aws)));
            r.chain(a).collect()
        }
    };

    let mut rows = vec![["vector", "item", "p", "verdict", "value", "spread", "upper_bound"]
        .map(String::from)
        .to_vec()];
    let mut curve_rows = vec![["vector", "n", "mean_squared_norm"].map(String::from).to_vec()];
    let mut entries = Vec::new();
    let mut text = String::new();
    let mut code = OK;
    for (label, v, expected) in &vectors {
        let report: BatteryReport = characterization_battery(rep, v, &boxes, &cfg)?;
        let verdict = report.verdict();
        if !matches!(verdict, Some(Verdict::Aws | Verdict::NotAws)) || expected.is_some_and(|e| Some(e) != verdict) {
            code = UNDECIDED;
        }
        for r in &report.results {
            rows.push(vec![
                label.clone(),
                r.item.label().into(),
                r.p.to_string(),
                verdict_name(Some(r.verdict)).into(),
                num(r.value),
                num(r.spread),
                r.upper_bound.map(num).unwrap_or_default(),
            ]);
        }
        if s.curves.is_some() {
            for (n, value) in convergence_curve(rep, v, &boxes, cfg.depth)? {
                curve_rows.push(vec![label.clone(), n.to_string(), num(value)]);
            }
        }
        let _ = writeln!(
            text,
            "{label}: {}{}",
            verdict_name(verdict),
            match expected {
                Some(e) if Some(*e) == verdict => " (matches split)".to_string(),
                Some(e) => format!(" (split says {})", verdict_name(Some(*e))),
                None => String::new(),
            }
        );
        entries.push(json!({
            "label": label,
            "vector": VectorJson::from(v),
            "verdict": verdict_name(verdict),
            "expected": expected.map(|e| verdict_name(Some(e))),
            "battery": report,
        }));
    }
    let json = json!({
        "source": subj.label,
        "folner": boxes.name(),
        "depth": cfg.depth,
        "profile": s.profile,
        "tolerances": s.tol,
        "vectors": entries,
    });
    let mut out = Report::new(json, text);
    out.csv = Some(csv_string(rows));
    out.default_format = Format::Csv;
    out.code = code;
    if let Some(path) = &s.curves {
        out.extra.push((path.clone(), csv_string(curve_rows)));
    }
    Ok(out)
}

fn unitary_structure(s: &Settings) -> Outcome<Report> {
    let subj = subject(s)?;
    let rep = &subj.rep;
    let split = decompose_idempotent(rep, &s.tol)?;
    let averaging = match s.source {
        SourceChoice::MeanErgodic => "mean-ergodic",
        SourceChoice::Haar => "haar",
        SourceChoice::Folner => "folner",
    };
    let mut json = json!({
        "source": subj.label,
        "dim": rep.dim(),
        "dim_r": split.dim_r(),
        "averaging": averaging,
        "profile": s.profile,
        "tolerances": s.tol,
    });
    if split.basis_r.is_empty() {
        json["systems"] = json!([]);
        let text = "E_r = {0}: no unitary systems\n".to_string();
        return Ok(Report::new(json, text));
    }
    let restricted = rep.restrict(&split.basis_r)?;
    let source = match s.source {
        SourceChoice::MeanErgodic => AveragingSource::MeanErgodic,
        SourceChoice::Haar => AveragingSource::KernelHaar,
        SourceChoice::Folner => AveragingSource::Folner(folner(s, &restricted)?),
    };
    let ip = invariant_inner_product(&restricted, source, &s.tol)?;
    let systems = decompose_irreducibles(&restricted, &ip, &s.tol)?;
    let words = sample_words(rep.generators().len(), WORD_LENGTH);
    let discrepancy = verify_weak_equivalence(&restricted, &systems, &words, &s.tol)?;
    let embedded: Vec<_> = systems.iter().map(|x| x.embed(&split.basis_r)).collect();

    json["gram"] = serde_json::to_value(MatrixJson::from(&ip.gram)).expect("matrix");
    json["gram_invariance_defect"] = json!(ip.invariance_defect(&restricted));
    json["systems"] = Value::Array(embedded.iter().map(|x| x.to_json_value()).collect());
    json["weak_equivalence"] = json!({
        "words": words.len(),
        "max_word_length": WORD_LENGTH,
        "discrepancy": discrepancy,
    });

    let mut text = format!(
        "dim E_r = {}, {} system(s), invariance defect {:e}, weak-equivalence discrepancy {:e}\n",
        split.dim_r(),
        systems.len(),
        ip.invariance_defect(&restricted),
        discrepancy
    );
    for (i, x) in embedded.iter().enumerate() {
        let _ = writeln!(
            text,
            "system {i}: dim {}, {}",
            x.dim(),
            if x.irreducible { "irreducible" } else { "reducible" }
        );
        for (name, m) in &x.chi {
            let _ = write!(text, " chi({name}) =\n{}", matrix_text(m));
        }
    }
    Ok(Report::new(json, text))
}

fn counterexample(s: &Settings) -> Outcome<Report> {
    let base = match &s.base {
        Some(text) => {
            let (m, n) = text
                .split_once(',')
                .ok_or_else(|| Failure::malformed(format!("base point must be `m,n`, got `{text}`")))?;
            let m: u64 = m
                .trim()
                .parse()
                .map_err(|_| Failure::malformed(format!("bad first coordinate `{m}`")))?;
            let n: u32 = n
                .trim()
                .parse()
                .map_err(|_| Failure::malformed(format!("bad second coordinate `{n}`")))?;
            KlaweElement::new(m, n)?
        }
        None => KlaweElement::new(0u32, 1)?,
    };
    let report = counterexample_report(s.depth.unwrap_or(COUNTEREXAMPLE_DEPTH), &base)?;
    let text = format!("{}\n", report.summary);
    let rows: Vec<Vec<String>> = std::iter::once(["N", "numerator", "denominator", "equals_one"].map(String::from).to_vec())
        .chain(report.averages.iter().map(|a| {
            vec![
                a.big_n.to_string(),
                a.numerator.clone(),
                a.denominator.clone(),
                a.equals_one.to_string(),
            ]
        }))
        .collect();
    let mut out = Report::new(serde_json::to_value(&report).expect("report serializes"), text);
    out.csv = Some(csv_string(rows));
    Ok(out)
}

fn closure(s: &Settings) -> Outcome<Report> {
    let subj = subject(s)?;
    let rep = &subj.rep;
    let (net, exhausted) = match approximate_closure(rep, &s.tol) {
        Ok(net) => (net, false),
        Err(Error::BudgetExhausted(net)) => (*net, true),
        Err(e) => return Err(e.into()),
    };
    let names: Vec<&str> = rep.generators().iter().map(|g| g.name.as_str()).collect();
    let word = |w: &[usize]| -> String {
        if w.is_empty() {
            "1".into()
        } else {
            w.iter().map(|&g| names[g]).collect::<Vec<_>>().join("*")
        }
    };
    let minimal = find_minimal_idempotent(&net, &s.tol);
    let mut elements = Vec::new();
    let mut rows = vec![["index", "word", "frobenius_norm", "rank"].map(String::from).to_vec()];
    for (i, (m, w)) in net.elements.iter().zip(&net.witness_words).enumerate() {
        let norm = frobenius(m);
        let rank = numerical_rank(m, s.tol.rank_tol);
        rows.push(vec![i.to_string(), word(w), num(norm), rank.to_string()]);
        elements.push(json!({ "word": word(w), "frobenius_norm": norm, "rank": rank }));
    }
    let (minimal_json, minimal_text) = match &minimal {
        Ok(q) => (
            json!({ "rank": numerical_rank(q, 0.5), "projector": MatrixJson::from(q) }),
            format!("minimal idempotent of rank {}\n{}", numerical_rank(q, 0.5), matrix_text(q)),
        ),
        Err(e) => (json!({ "error": e.to_string() }), format!("minimal idempotent: {e}\n")),
    };
    let json = json!({
        "source": subj.label,
        "size": net.len(),
        "saturated": net.saturated,
        "budget_exhausted": exhausted,
        "max_word_length": net.max_word_length(),
        "norm_bound": net.norm_bound,
        "dedup_eps": net.dedup_eps,
        "rank_threshold": net.rank_threshold(&s.tol),
        "minimal_idempotent": minimal_json,
        "elements": elements,
        "profile": s.profile,
        "tolerances": s.tol,
    });
    let text = format!(
        "{} elements ({}), longest word {}, norm bound {:e}\n{}",
        net.len(),
        if net.saturated {
            "saturated"
        } else {
            "budget exhausted"
        },
        net.max_word_length(),
        net.norm_bound,
        minimal_text
    );
    let mut out = Report::new(json, text);
    out.csv = Some(csv_string(rows));
    Ok(out)
}

fn list_catalog() -> Report {
    let entries: Vec<Value> = catalog()
        .into_iter()
        .chain(by_name("quaternion_pair").ok())
        .map(|e| {
            json!({
                "name": e.name,
                "description": e.description,
                "dim": e.representation.dim(),
                "generators": e.representation.generators().len(),
                "lattice_indexed": e.folner().is_some(),
                "expected_q": e.expected_q.as_ref().map(MatrixJson::from),
            })
        })
        .collect();
    let mut text = String::new();
    for n in names() {
        let _ = writeln!(text, "{n}");
    }
    Report::new(json!({ "entries": entries, "names": names() }), text)
}
