//! Text, JSON and CSV renderings.
//!
//! Every report is first turned into a plain serde view, so the JSON carries
//! the same numbers the text shows (plus exact numerators/denominators).

use std::fmt::Write as _;

use scpqca_core::model::Notation;
use scpqca_core::pipeline::Analysis;
use scpqca_core::robustness::{SweepCell, ValidityClass, ValidityReport};
use scpqca_core::{CandidateRule, CaseTable, Conjunction, FactorSchema, Literal, Ratio, Solution};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct RatioView {
    pub value: f64,
    pub num: u64,
    pub den: u64,
}

impl From<Ratio> for RatioView {
    fn from(r: Ratio) -> Self {
        RatioView { value: r.value(), num: r.numerator(), den: r.denominator() }
    }
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct LiteralView {
    pub factor: String,
    pub level: u32,
    pub label: String,
}

pub fn literal_view(schema: &FactorSchema, l: Literal) -> LiteralView {
    let f = &schema.factors()[l.factor];
    LiteralView { factor: f.name.clone(), level: l.value, label: f.label(l.value) }
}

pub fn expr(schema: &FactorSchema, c: &Conjunction) -> String {
    c.display(schema, Notation::Compact).to_string()
}

fn fixed(x: f64) -> String {
    format!("{x:.4}")
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

// ---- necessity ----

#[derive(Serialize, Debug)]
pub struct NecessityRow {
    pub literal: LiteralView,
    pub expression: String,
    pub consistency: RatioView,
}

#[derive(Serialize, Debug)]
pub struct NecessityView {
    pub outcome: String,
    pub decision_label: String,
    pub threshold: f64,
    pub necessary: Vec<NecessityRow>,
    /// Factors with several qualifying levels.
    pub ambiguous: Vec<String>,
}

pub fn necessity_view(table: &CaseTable, label: u32, threshold: f64, rows: &[(Literal, Ratio)], ambiguous: &[usize]) -> NecessityView {
    let schema = table.schema();
    NecessityView {
        outcome: schema.outcome().name.clone(),
        decision_label: schema.outcome().label(label),
        threshold,
        necessary: rows
            .iter()
            .map(|&(l, r)| NecessityRow {
                literal: literal_view(schema, l),
                expression: expr(schema, &Conjunction::new(vec![l]).expect("single literal")),
                consistency: r.into(),
            })
            .collect(),
        ambiguous: ambiguous.iter().map(|&f| schema.factors()[f].name.clone()).collect(),
    }
}

pub fn render_necessity(v: &NecessityView, format: Format) -> String {
    match format {
        Format::Json => json(v),
        Format::Csv => {
            let mut out = csv_line(&["factor".into(), "level".into(), "label".into(), "consistency".into(), "num".into(), "den".into()]);
            for r in &v.necessary {
                out += &csv_line(&[
                    r.literal.factor.clone(),
                    r.literal.level.to_string(),
                    r.literal.label.clone(),
                    fixed(r.consistency.value),
                    r.consistency.num.to_string(),
                    r.consistency.den.to_string(),
                ]);
            }
            out
        }
        Format::Text => {
            let mut out = format!("Necessary conditions for {}={} (consistency > {})\n", v.outcome, v.decision_label, v.threshold);
            if v.necessary.is_empty() {
                out += "  none\n";
            }
            for r in &v.necessary {
                let _ = writeln!(
                    out,
                    "  {}={:<10} {}  ({}/{})",
                    r.literal.factor,
                    r.literal.label,
                    fixed(r.consistency.value),
                    r.consistency.num,
                    r.consistency.den
                );
            }
            if !v.ambiguous.is_empty() {
                let _ = writeln!(
                    out,
                    "warning: several levels qualify for {}; confirm one with --confirm-necessary FACTOR=LEVEL",
                    v.ambiguous.join(", ")
                );
            }
            out
        }
    }
}

// ---- candidates ----

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct RuleView {
    pub expression: String,
    pub literals: Vec<LiteralView>,
    pub consistency: RatioView,
    /// Share of all decision-label cases this rule covers.
    pub coverage: RatioView,
    pub matched: usize,
    pub positives: usize,
    pub cases: Vec<String>,
}

pub fn rule_view(table: &CaseTable, label: u32, r: &CandidateRule) -> RuleView {
    let schema = table.schema();
    let all_pos = table.outcome_set(label).map(|s| s.len()).unwrap_or(0);
    RuleView {
        expression: expr(schema, &r.conjunction),
        literals: r.conjunction.literals().iter().map(|&l| literal_view(schema, l)).collect(),
        consistency: r.consistency().into(),
        coverage: Ratio::new(r.positives.len() as u64, all_pos as u64, "").map(Into::into).unwrap_or(RatioView { value: 0.0, num: 0, den: 0 }),
        matched: r.matched.len(),
        positives: r.positives.len(),
        cases: table.ids(&r.matched).into_iter().map(str::to_string).collect(),
    }
}

#[derive(Serialize, Debug)]
pub struct CandidatesView {
    pub necessary: Vec<LiteralView>,
    pub factors: Vec<String>,
    pub consistency_threshold: f64,
    pub cutoff: usize,
    pub candidates: Vec<RuleView>,
}

pub fn candidates_view(
    table: &CaseTable,
    label: u32,
    necessary: &[Literal],
    factor_set: &[usize],
    candidates: &[CandidateRule],
    consistency_threshold: f64,
    cutoff: usize,
) -> CandidatesView {
    let schema = table.schema();
    CandidatesView {
        necessary: necessary.iter().map(|&l| literal_view(schema, l)).collect(),
        factors: factor_set.iter().map(|&f| schema.factors()[f].name.clone()).collect(),
        consistency_threshold,
        cutoff,
        candidates: candidates.iter().map(|r| rule_view(table, label, r)).collect(),
    }
}

fn rules_csv(rules: &[RuleView]) -> String {
    let mut out = String::new();
    for r in rules {
        let rec = [
            r.expression.clone(),
            fixed(r.consistency.value),
            fixed(r.coverage.value),
            r.matched.to_string(),
            r.positives.to_string(),
            r.cases.join(" "),
        ];
        out += &csv_line(&rec);
    }
    out
}

pub fn render_candidates(v: &CandidatesView, format: Format) -> String {
    match format {
        Format::Json => json(v),
        Format::Csv => {
            let mut out = csv_line(&["rule", "consistency", "coverage", "matched", "positives", "cases"].map(String::from));
            out += &rules_csv(&v.candidates);
            out
        }
        Format::Text => {
            let mut out = String::new();
            if !v.necessary.is_empty() {
                let nec: Vec<String> = v.necessary.iter().map(|l| format!("{}={}", l.factor, l.label)).collect();
                let _ = writeln!(out, "Within cases satisfying {}", nec.join(" * "));
            }
            let _ = writeln!(
                out,
                "{} candidate rules over {} (consistency >= {}, cutoff {})",
                v.candidates.len(),
                if v.factors.is_empty() { "no factors".to_string() } else { v.factors.join(", ") },
                v.consistency_threshold,
                v.cutoff
            );
            let width = v.candidates.iter().map(|r| r.expression.chars().count()).max().unwrap_or(4).max(4);
            let _ = writeln!(out, "  {:<width$}  cons.   n  pos  cases", "rule");
            for r in &v.candidates {
                let _ = writeln!(
                    out,
                    "  {:<width$}  {}  {:>2}  {:>3}  {}",
                    r.expression,
                    fixed(r.consistency.value),
                    r.matched,
                    r.positives,
                    r.cases.join(" ")
                );
            }
            out
        }
    }
}

// ---- solution ----

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ConfigurationView {
    #[serde(flatten)]
    pub rule: RuleView,
    /// Positives only this configuration covers in the final solution.
    pub unique_coverage: usize,
    /// New positives when it was picked.
    pub selection_gain: Option<usize>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct SolutionView {
    pub outcome: String,
    pub decision_label: String,
    pub expression: String,
    pub necessary: Vec<LiteralView>,
    pub configurations: Vec<ConfigurationView>,
    pub consistency: RatioView,
    pub coverage: RatioView,
    pub covered_cases: Vec<String>,
}

/// Solution with every configuration shown as necessary ∧ rule.
pub fn solution_view(table: &CaseTable, s: &Solution) -> SolutionView {
    let schema = table.schema();
    let label = s.decision_label;
    let configurations: Vec<ConfigurationView> = if s.rules.is_empty() {
        let conj = Conjunction::new(s.necessary.clone()).expect("valid necessary set");
        let matched = table.matched(&conj).expect("schema-checked");
        let positives = matched.intersection(table.outcome_set(label).expect("label checked"));
        vec![ConfigurationView {
            rule: rule_view(table, label, &CandidateRule { conjunction: conj, matched, positives }),
            unique_coverage: 0,
            selection_gain: None,
        }]
    } else {
        s.rules
            .iter()
            .enumerate()
            .map(|(i, r)| ConfigurationView {
                rule: rule_view(table, label, r),
                unique_coverage: s.unique_coverage[i],
                selection_gain: Some(s.selection_gain[i]),
            })
            .collect()
    };
    let expression = configurations.iter().map(|c| c.rule.expression.clone()).collect::<Vec<_>>().join(" + ");
    let covered = s.matched.intersection(table.outcome_set(label).expect("label checked"));
    SolutionView {
        outcome: schema.outcome().name.clone(),
        decision_label: schema.outcome().label(label),
        expression,
        necessary: s.necessary.iter().map(|&l| literal_view(schema, l)).collect(),
        configurations,
        consistency: s.consistency.into(),
        coverage: s.coverage.into(),
        covered_cases: table.ids(&covered).into_iter().map(str::to_string).collect(),
    }
}

#[derive(Serialize, Debug)]
pub struct SolveView {
    pub necessity: NecessityView,
    pub factors: Vec<String>,
    pub candidate_count: usize,
    pub no_cover: bool,
    pub solution: SolutionView,
}

pub fn solve_view(table: &CaseTable, a: &Analysis, necessity_threshold: f64) -> SolveView {
    let schema = table.schema();
    SolveView {
        necessity: necessity_view(table, a.solution.decision_label, necessity_threshold, &a.necessity, &a.ambiguous),
        factors: a.factor_set.iter().map(|&f| schema.factors()[f].name.clone()).collect(),
        candidate_count: a.candidates.len(),
        no_cover: a.no_cover(),
        solution: solution_view(table, &a.solution),
    }
}

/// Configuration chart: one column per configuration, one row per factor.
/// `●` level 1, `○` level 0, the level number for multi-value factors and a
/// trailing `*` on necessary literals.
pub fn chart(table: &CaseTable, s: &Solution) -> String {
    let schema = table.schema();
    let configs = s.configurations();
    let mark = |c: &Conjunction, f: usize| -> String {
        let Some(v) = c.value_of(f) else { return String::new() };
        let factor = &schema.factors()[f];
        let mut m = if factor.levels == 2 && factor.labels.is_empty() { if v == 1 { "●" } else { "○" }.to_string() } else { factor.label(v) };
        if s.necessary.iter().any(|l| l.factor == f && l.value == v) {
            m.push('*');
        }
        m
    };
    let view = solution_view(table, s);
    let name_w = schema.factors().iter().map(|f| f.name.chars().count()).chain(["Unique cov.".len()]).max().unwrap_or(0);
    let col_w = 8;
    let mut out = String::new();
    let _ = write!(out, "{:<name_w$}", "");
    for i in 0..configs.len() {
        let _ = write!(out, " {:^col_w$}", i + 1);
    }
    out.push('\n');
    for (f, factor) in schema.factors().iter().enumerate() {
        if configs.iter().all(|c| c.value_of(f).is_none()) {
            continue;
        }
        let _ = write!(out, "{:<name_w$}", factor.name);
        for c in &configs {
            let m = mark(c, f);
            let pad = col_w.saturating_sub(m.chars().count());
            let _ = write!(out, " {}{}{}", " ".repeat(pad / 2), m, " ".repeat(pad - pad / 2));
        }
        out.push('\n');
    }
    let row = |out: &mut String, name: &str, vals: Vec<String>| {
        let _ = write!(out, "{name:<name_w$}");
        for v in vals {
            let _ = write!(out, " {v:^col_w$}");
        }
        out.push('\n');
    };
    row(&mut out, "Consist.", view.configurations.iter().map(|c| fixed(c.rule.consistency.value)).collect());
    row(&mut out, "Raw cov.", view.configurations.iter().map(|c| fixed(c.rule.coverage.value)).collect());
    row(&mut out, "Unique cov.", view.configurations.iter().map(|c| c.unique_coverage.to_string()).collect());
    out
}

pub fn render_solve(table: &CaseTable, a: &Analysis, v: &SolveView, format: Format) -> String {
    let s = &v.solution;
    match format {
        Format::Json => json(v),
        Format::Csv => {
            let mut out = csv_line(
                &["rule", "consistency", "coverage", "unique_coverage", "selection_gain", "matched", "positives", "cases"].map(String::from),
            );
            for c in &s.configurations {
                out += &csv_line(&[
                    c.rule.expression.clone(),
                    fixed(c.rule.consistency.value),
                    fixed(c.rule.coverage.value),
                    c.unique_coverage.to_string(),
                    c.selection_gain.map(|g| g.to_string()).unwrap_or_default(),
                    c.rule.matched.to_string(),
                    c.rule.positives.to_string(),
                    c.rule.cases.join(" "),
                ]);
            }
            out += &csv_line(&[
                "solution".into(),
                fixed(s.consistency.value),
                fixed(s.coverage.value),
                String::new(),
                String::new(),
                String::new(),
                s.coverage.num.to_string(),
                s.covered_cases.join(" "),
            ]);
            out
        }
        Format::Text => {
            let mut out = render_necessity(&v.necessity, Format::Text);
            let _ = writeln!(
                out,
                "{} candidate rules over {}",
                v.candidate_count,
                if v.factors.is_empty() { "no factors".into() } else { v.factors.join(", ") }
            );
            out.push('\n');
            let _ = writeln!(out, "Solution for {}={}:", s.outcome, s.decision_label);
            let _ = writeln!(out, "  {}", s.expression);
            if v.no_cover {
                out += "  (no rule passes the unique-cover floor; only the necessary conditions remain)\n";
            }
            out.push('\n');
            out += &chart(table, &a.solution);
            out.push('\n');
            let _ = writeln!(out, "Solution consistency  {}  ({}/{})", fixed(s.consistency.value), s.consistency.num, s.consistency.den);
            let _ = writeln!(out, "Solution coverage     {}  ({}/{})", fixed(s.coverage.value), s.coverage.num, s.coverage.den);
            for (i, c) in s.configurations.iter().enumerate() {
                let _ = writeln!(out, "  {}: {}  [{}]", i + 1, c.rule.expression, c.rule.cases.join(" "));
            }
            out
        }
    }
}

// ---- sweep ----

#[derive(Serialize, Debug)]
pub struct SweepRow {
    pub consistency_threshold: f64,
    pub cutoff: usize,
    pub unique_cover: usize,
    pub candidate_count: Option<usize>,
    pub solution: Option<SolutionView>,
    pub error: Option<String>,
}

pub fn sweep_rows(table: &CaseTable, cells: &[SweepCell]) -> Vec<SweepRow> {
    cells
        .iter()
        .map(|c| {
            let (count, solution, error) = match &c.outcome {
                Ok((s, n)) => (Some(*n), Some(solution_view(table, s)), None),
                Err(e) => (None, None, Some(e.to_string())),
            };
            SweepRow {
                consistency_threshold: c.point.consistency_threshold,
                cutoff: c.point.cutoff,
                unique_cover: c.point.unique_cover,
                candidate_count: count,
                solution,
                error,
            }
        })
        .collect()
}

pub fn render_sweep(rows: &[SweepRow], format: Format) -> String {
    match format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut out = csv_line(
                &["consistency_threshold", "cutoff", "unique_cover", "candidates", "solution", "consistency", "coverage", "error"].map(String::from),
            );
            for r in rows {
                let s = r.solution.as_ref();
                out += &csv_line(&[
                    r.consistency_threshold.to_string(),
                    r.cutoff.to_string(),
                    r.unique_cover.to_string(),
                    r.candidate_count.map(|n| n.to_string()).unwrap_or_default(),
                    s.map(|s| s.expression.clone()).unwrap_or_default(),
                    s.map(|s| fixed(s.consistency.value)).unwrap_or_default(),
                    s.map(|s| fixed(s.coverage.value)).unwrap_or_default(),
                    r.error.clone().unwrap_or_default(),
                ]);
            }
            out
        }
        Format::Text => {
            let mut out = String::from("cons.  cutoff  uniq  rules  sol.cons  sol.cov  solution\n");
            for r in rows {
                let _ = write!(out, "{:<5}  {:>6}  {:>4}  ", r.consistency_threshold, r.cutoff, r.unique_cover);
                match (&r.solution, &r.error) {
                    (Some(s), _) => {
                        let _ = writeln!(
                            out,
                            "{:>5}  {}    {}   {}",
                            r.candidate_count.unwrap_or(0),
                            fixed(s.consistency.value),
                            fixed(s.coverage.value),
                            s.expression
                        );
                    }
                    (None, e) => {
                        let _ = writeln!(out, "    -  failed: {}", e.as_deref().unwrap_or("unknown"));
                    }
                }
            }
            out
        }
    }
}

// ---- external validity ----

#[derive(Serialize, Debug)]
pub struct TallyView {
    pub configuration: String,
    pub replicated: usize,
    pub accuracy: f64,
}

#[derive(Serialize, Debug)]
pub struct RepView {
    pub rep: usize,
    pub removed: Vec<String>,
    pub configurations: Vec<(String, String)>,
    pub degenerate: Option<String>,
}

#[derive(Serialize, Debug)]
pub struct ValidityView {
    pub fraction: f64,
    pub reps: usize,
    pub seed: u64,
    pub removed_per_rep: usize,
    pub original: SolutionView,
    pub per_configuration: Vec<TallyView>,
    pub replicated: usize,
    pub superset: usize,
    pub subset: usize,
    pub not_identified: usize,
    pub overall_accuracy: Option<RatioView>,
    pub repetitions: Vec<RepView>,
}

pub fn validity_view(table: &CaseTable, r: &ValidityReport) -> ValidityView {
    let schema = table.schema();
    ValidityView {
        fraction: r.params.fraction,
        reps: r.params.reps,
        seed: r.params.seed,
        removed_per_rep: r.removed_per_rep,
        original: solution_view(table, &r.original),
        per_configuration: r
            .per_configuration
            .iter()
            .map(|t| TallyView { configuration: expr(schema, &t.configuration), replicated: t.replicated, accuracy: t.accuracy })
            .collect(),
        replicated: r.total(ValidityClass::Replicated),
        superset: r.total(ValidityClass::Superset),
        subset: r.total(ValidityClass::Subset),
        not_identified: r.total(ValidityClass::NotIdentified),
        overall_accuracy: r.overall_accuracy.map(Into::into),
        repetitions: r
            .reps
            .iter()
            .map(|rep| RepView {
                rep: rep.rep,
                removed: rep.removed.iter().map(|&i| table.cases()[i].id.clone()).collect(),
                configurations: rep
                    .configurations
                    .iter()
                    .map(|(c, k)| {
                        let e = if rep.degenerate.is_some() { "-".to_string() } else { expr(schema, c) };
                        (e, k.name().to_string())
                    })
                    .collect(),
                degenerate: rep.degenerate.clone(),
            })
            .collect(),
    }
}

pub fn render_validity(v: &ValidityView, format: Format) -> String {
    match format {
        Format::Json => json(v),
        Format::Csv => {
            let mut out = csv_line(&["configuration", "replicated", "accuracy"].map(String::from));
            for t in &v.per_configuration {
                out += &csv_line(&[t.configuration.clone(), t.replicated.to_string(), fixed(t.accuracy)]);
            }
            out += &csv_line(&["overall".into(), v.replicated.to_string(), v.overall_accuracy.as_ref().map(|a| fixed(a.value)).unwrap_or_default()]);
            out
        }
        Format::Text => {
            let mut out = format!(
                "External validity: {} repetitions, {} of the cases removed each ({} cases), seed {}\n",
                v.reps, v.fraction, v.removed_per_rep, v.seed
            );
            let _ = writeln!(out, "Full-data solution: {}\n", v.original.expression);
            let width = v.per_configuration.iter().map(|t| t.configuration.chars().count()).max().unwrap_or(0).max(13);
            let _ = writeln!(out, "{:<width$}  replicated  accuracy", "configuration");
            for t in &v.per_configuration {
                let _ = writeln!(out, "{:<width$}  {:>10}  {}", t.configuration, t.replicated, fixed(t.accuracy));
            }
            let _ = writeln!(out, "\nreplicated {}  superset {}  subset {}  not identified {}", v.replicated, v.superset, v.subset, v.not_identified);
            match &v.overall_accuracy {
                Some(a) => {
                    let _ = writeln!(out, "accuracy (except not identified) {}  ({}/{})", fixed(a.value), a.num, a.den);
                }
                None => out += "accuracy (except not identified) undefined\n",
            }
            out
        }
    }
}

pub fn json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report views serialize");
    s.push('\n');
    s
}
