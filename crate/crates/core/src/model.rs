//! Domain types, rule–case matching and the consistency/coverage arithmetic
//! every other module shares.
//!
//! All indicators are crisp: a case either satisfies a literal or it does not.
//! Ratios are kept as exact fractions ([`Ratio`]) so threshold ties compare
//! exactly; a zero denominator is always an error, never a silent `0.0`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::bitset::CaseSet;
use crate::error::{Error, Result};

/// A dense, zero-based factor or outcome level.
pub type Level = u32;

/// A condition (or outcome) column: its name, level count and optional labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub name: String,
    pub levels: u32,
    /// Original label of each level, when ingestion mapped labels to levels.
    /// Empty means the level numbers are the labels.
    pub labels: Vec<String>,
}

impl Factor {
    pub fn new(name: impl Into<String>, levels: u32) -> Self {
        Factor { name: name.into(), levels, labels: Vec::new() }
    }

    pub fn with_labels(name: impl Into<String>, labels: Vec<String>) -> Self {
        Factor { name: name.into(), levels: labels.len() as u32, labels }
    }

    /// Label printed for `level`.
    pub fn label(&self, level: Level) -> String {
        match self.labels.get(level as usize) {
            Some(l) => l.clone(),
            None => level.to_string(),
        }
    }

    /// Reverse lookup of [`Factor::label`].
    pub fn level_of(&self, label: &str) -> Option<Level> {
        if self.labels.is_empty() {
            label.trim().parse::<Level>().ok().filter(|&v| v < self.levels)
        } else {
            self.labels.iter().position(|l| l == label).map(|p| p as Level)
        }
    }
}

/// Ordered condition factors plus the outcome column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorSchema {
    factors: Vec<Factor>,
    outcome: Factor,
}

impl FactorSchema {
    pub fn new(factors: Vec<Factor>, outcome: Factor) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for f in factors.iter().chain(core::iter::once(&outcome)) {
            if f.name.is_empty() {
                return Err(Error::InvalidSchema("empty factor name".into()));
            }
            if f.levels < 2 {
                return Err(Error::InvalidSchema(format!("`{}` has {} level(s), at least 2 are required", f.name, f.levels)));
            }
            if !f.labels.is_empty() && f.labels.len() != f.levels as usize {
                return Err(Error::InvalidSchema(format!("`{}` declares {} levels but {} labels", f.name, f.levels, f.labels.len())));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(Error::InvalidSchema(format!("duplicate column name `{}`", f.name)));
            }
        }
        Ok(FactorSchema { factors, outcome })
    }

    /// Unlabelled schema from `(name, levels)` pairs.
    pub fn simple(factors: &[(&str, u32)], outcome: &str, outcome_levels: u32) -> Result<Self> {
        Self::new(factors.iter().map(|&(n, l)| Factor::new(n, l)).collect(), Factor::new(outcome, outcome_levels))
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, index: usize) -> Option<&Factor> {
        self.factors.get(index)
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn outcome(&self) -> &Factor {
        &self.outcome
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    /// Checks that `literal` names an existing factor and an admissible level.
    pub fn check_literal(&self, literal: Literal) -> Result<()> {
        let factor = self.factors.get(literal.factor).ok_or(Error::FactorOutOfRange { index: literal.factor, count: self.factors.len() })?;
        if literal.value >= factor.levels {
            return Err(Error::LevelOutOfRange { factor: factor.name.clone(), value: literal.value, levels: factor.levels });
        }
        Ok(())
    }

    pub fn check_outcome(&self, label: Level) -> Result<()> {
        if label >= self.outcome.levels {
            return Err(Error::LevelOutOfRange { factor: self.outcome.name.clone(), value: label, levels: self.outcome.levels });
        }
        Ok(())
    }

    /// Every literal of the schema, factor-major.
    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.factors.iter().enumerate().flat_map(|(i, f)| (0..f.levels).map(move |v| Literal::new(i, v)))
    }
}

/// One observed case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub id: String,
    pub values: Vec<Level>,
    pub outcome: Level,
}

impl Case {
    pub fn new(id: impl Into<String>, values: Vec<Level>, outcome: Level) -> Self {
        Case { id: id.into(), values, outcome }
    }
}

/// Calibrated cases × factors, indexed by per-level case sets.
#[derive(Clone, Debug)]
pub struct CaseTable {
    schema: FactorSchema,
    cases: Vec<Case>,
    level_sets: Vec<Vec<CaseSet>>,
    outcome_sets: Vec<CaseSet>,
}

impl PartialEq for CaseTable {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema && self.cases == other.cases
    }
}

impl CaseTable {
    pub fn new(schema: FactorSchema, cases: Vec<Case>) -> Result<Self> {
        let n = cases.len();
        let mut level_sets: Vec<Vec<CaseSet>> = schema.factors.iter().map(|f| (0..f.levels).map(|_| CaseSet::empty(n)).collect()).collect();
        let mut outcome_sets: Vec<CaseSet> = (0..schema.outcome.levels).map(|_| CaseSet::empty(n)).collect();
        let mut ids = BTreeSet::new();
        for (ci, case) in cases.iter().enumerate() {
            if !ids.insert(case.id.as_str()) {
                return Err(Error::DuplicateCaseId(case.id.clone()));
            }
            if case.values.len() != schema.len() {
                return Err(Error::InvalidCase { id: case.id.clone(), reason: format!("{} values for {} factors", case.values.len(), schema.len()) });
            }
            for (fi, (&v, f)) in case.values.iter().zip(&schema.factors).enumerate() {
                if v >= f.levels {
                    return Err(Error::InvalidCase { id: case.id.clone(), reason: format!("`{}` = {v} outside 0..{}", f.name, f.levels) });
                }
                level_sets[fi][v as usize].insert(ci);
            }
            if case.outcome >= schema.outcome.levels {
                return Err(Error::InvalidCase {
                    id: case.id.clone(),
                    reason: format!("outcome {} outside 0..{}", case.outcome, schema.outcome.levels),
                });
            }
            outcome_sets[case.outcome as usize].insert(ci);
        }
        Ok(CaseTable { schema, cases, level_sets, outcome_sets })
    }

    pub fn schema(&self) -> &FactorSchema {
        &self.schema
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    /// All case indices.
    pub fn all(&self) -> CaseSet {
        CaseSet::full(self.cases.len())
    }

    /// Cases satisfying `literal`.
    pub fn level_set(&self, literal: Literal) -> Result<&CaseSet> {
        self.schema.check_literal(literal)?;
        Ok(&self.level_sets[literal.factor][literal.value as usize])
    }

    /// Cases whose outcome equals `label`.
    pub fn outcome_set(&self, label: Level) -> Result<&CaseSet> {
        self.schema.check_outcome(label)?;
        Ok(&self.outcome_sets[label as usize])
    }

    /// Cases matched by `conjunction`; the empty conjunction matches all.
    pub fn matched(&self, conjunction: &Conjunction) -> Result<CaseSet> {
        let mut set = self.all();
        for &lit in conjunction.literals() {
            set.intersect_with(self.level_set(lit)?);
        }
        Ok(set)
    }

    pub fn ids(&self, set: &CaseSet) -> Vec<&str> {
        set.iter().map(|i| self.cases[i].id.as_str()).collect()
    }

    /// A new table holding only the cases in `keep`, in their original order.
    pub fn select(&self, keep: &CaseSet) -> CaseTable {
        let cases = keep.iter().map(|i| self.cases[i].clone()).collect();
        CaseTable::new(self.schema.clone(), cases).expect("subset of a valid table is valid")
    }
}

/// `factor = value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub factor: usize,
    pub value: Level,
}

impl Literal {
    pub const fn new(factor: usize, value: Level) -> Self {
        Literal { factor, value }
    }
}

/// How conjunctions are printed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Notation {
    /// `MS=0*PI=1`
    Assignment,
    /// `ms*PI` for binary factors (upper case = level 1, lower case = level 0),
    /// `A2` for multi-value factors.
    Compact,
}

/// A partial assignment: at most one literal per factor, absent factors are
/// don't-cares. Literals are kept sorted by factor index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Conjunction {
    literals: Vec<Literal>,
}

impl Conjunction {
    pub fn new(mut literals: Vec<Literal>) -> Result<Self> {
        literals.sort();
        if let Some(w) = literals.windows(2).find(|w| w[0].factor == w[1].factor) {
            return Err(Error::DuplicateFactor(format!("#{}", w[0].factor)));
        }
        Ok(Conjunction { literals })
    }

    /// The empty conjunction (matches every case). Internal sentinel only.
    pub fn empty() -> Self {
        Conjunction::default()
    }

    pub(crate) fn from_sorted(literals: Vec<Literal>) -> Self {
        debug_assert!(literals.windows(2).all(|w| w[0].factor < w[1].factor));
        Conjunction { literals }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn value_of(&self, factor: usize) -> Option<Level> {
        self.literals.binary_search_by_key(&factor, |l| l.factor).ok().map(|i| self.literals[i].value)
    }

    /// Conjoins two partial assignments; `None` when they disagree on a factor.
    pub fn merge(&self, other: &Conjunction) -> Option<Conjunction> {
        let mut out = self.literals.clone();
        for &lit in &other.literals {
            match self.value_of(lit.factor) {
                Some(v) if v == lit.value => {}
                Some(_) => return None,
                None => out.push(lit),
            }
        }
        out.sort();
        Some(Conjunction { literals: out })
    }

    /// Literal-set inclusion.
    pub fn is_subset_of(&self, other: &Conjunction) -> bool {
        self.literals.iter().all(|l| other.value_of(l.factor) == Some(l.value))
    }

    pub fn validate(&self, schema: &FactorSchema) -> Result<()> {
        self.literals.iter().try_for_each(|&l| schema.check_literal(l))
    }

    /// Evaluates against a raw value vector (no schema checks).
    pub fn matches_values(&self, values: &[Level]) -> bool {
        self.literals.iter().all(|l| values.get(l.factor) == Some(&l.value))
    }

    pub fn display<'a>(&'a self, schema: &'a FactorSchema, notation: Notation) -> ConjunctionDisplay<'a> {
        ConjunctionDisplay { conjunction: self, schema, notation }
    }
}

/// [`fmt::Display`] adapter returned by [`Conjunction::display`].
pub struct ConjunctionDisplay<'a> {
    conjunction: &'a Conjunction,
    schema: &'a FactorSchema,
    notation: Notation,
}

impl fmt::Display for ConjunctionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conjunction.is_empty() {
            return f.write_str("1");
        }
        for (i, lit) in self.conjunction.literals.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            let Some(factor) = self.schema.factor(lit.factor) else {
                write!(f, "#{}={}", lit.factor, lit.value)?;
                continue;
            };
            match self.notation {
                Notation::Assignment => write!(f, "{}={}", factor.name, factor.label(lit.value))?,
                Notation::Compact if factor.levels == 2 && factor.labels.is_empty() => {
                    if lit.value == 1 {
                        write!(f, "{}", factor.name.to_uppercase())?
                    } else {
                        write!(f, "{}", factor.name.to_lowercase())?
                    }
                }
                Notation::Compact => write!(f, "{}{}", factor.name, factor.label(lit.value))?,
            }
        }
        Ok(())
    }
}

/// An exact non-negative fraction with nonzero denominator.
#[derive(Clone, Copy, Debug)]
pub struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    /// `what` names the quantity in the error raised for `den == 0`.
    pub fn new(num: u64, den: u64, what: &'static str) -> Result<Self> {
        if den == 0 {
            return Err(Error::UndefinedRatio(what));
        }
        Ok(Ratio { num, den })
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ratio {}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A conjunction with its matched and positively-matched case sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateRule {
    pub conjunction: Conjunction,
    pub matched: CaseSet,
    /// `matched ∩ {outcome = decision label}`.
    pub positives: CaseSet,
}

impl CandidateRule {
    /// Sufficiency consistency `|positives| / |matched|`.
    ///
    /// # Panics
    /// If `matched` is empty; rules are only built from nonempty matches.
    pub fn consistency(&self) -> Ratio {
        Ratio::new(self.positives.len() as u64, self.matched.len() as u64, "rule consistency").expect("candidate rules match at least one case")
    }
}

/// Necessary literals conjoined with a disjunction of selected rules.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub decision_label: Level,
    pub necessary: Vec<Literal>,
    /// Selected rules in pick order, each already conjoined with `necessary`
    /// (their case sets are those of the effective configuration).
    pub rules: Vec<CandidateRule>,
    pub consistency: Ratio,
    pub coverage: Ratio,
    /// Per rule: positives covered by it and by no other selected rule.
    pub unique_coverage: Vec<usize>,
    /// Per rule: positives it added when it was picked.
    pub selection_gain: Vec<usize>,
    /// Union of the configurations' matched cases.
    pub matched: CaseSet,
}

impl Solution {
    /// The effective configurations: each rule (already including the
    /// necessary literals), or the bare necessary conjunction when no rule
    /// was selected.
    pub fn configurations(&self) -> Vec<Conjunction> {
        if self.rules.is_empty() {
            let mut lits = self.necessary.clone();
            lits.sort();
            alloc::vec![Conjunction::from_sorted(lits)]
        } else {
            self.rules.iter().map(|r| r.conjunction.clone()).collect()
        }
    }
}

/// Whether every literal of `conjunction` holds for `case`.
pub fn matches(conjunction: &Conjunction, case: &Case, schema: &FactorSchema) -> Result<bool> {
    conjunction.validate(schema)?;
    if case.values.len() != schema.len() {
        return Err(Error::InvalidCase { id: case.id.clone(), reason: format!("{} values for {} factors", case.values.len(), schema.len()) });
    }
    Ok(conjunction.matches_values(&case.values))
}

/// `Σ I(C=c, O=o) / Σ I(C=c)`.
pub fn sufficiency_consistency(conjunction: &Conjunction, table: &CaseTable, decision_label: Level) -> Result<Ratio> {
    let matched = table.matched(conjunction)?;
    let positives = table.outcome_set(decision_label)?;
    Ratio::new(matched.intersection_len(positives) as u64, matched.len() as u64, "sufficiency consistency of a conjunction matching no case")
}

/// `Σ I(C=c, O=o) / Σ I(O=o)`.
pub fn necessity_consistency(literal: Literal, table: &CaseTable, decision_label: Level) -> Result<Ratio> {
    let cases = table.level_set(literal)?;
    let positives = table.outcome_set(decision_label)?;
    Ratio::new(cases.intersection_len(positives) as u64, positives.len() as u64, "necessity consistency without positive cases")
}

/// Consistency and coverage of the union of `rules`' matched sets.
pub fn solution_metrics(rules: &[CandidateRule], table: &CaseTable, decision_label: Level) -> Result<(Ratio, Ratio)> {
    let mut union = CaseSet::empty(table.len());
    for r in rules {
        union.union_with(&r.matched);
    }
    union_metrics(&union, table, decision_label)
}

pub(crate) fn union_metrics(union: &CaseSet, table: &CaseTable, label: Level) -> Result<(Ratio, Ratio)> {
    let positives = table.outcome_set(label)?;
    let hit = union.intersection_len(positives) as u64;
    Ok((
        Ratio::new(hit, union.len() as u64, "solution consistency of an empty union")?,
        Ratio::new(hit, positives.len() as u64, "solution coverage without positive cases")?,
    ))
}

/// Collapses cases identical in every factor value and the outcome, keeping
/// the first id. Contradictory cases (same factors, different outcome) stay.
pub fn deduplicate(table: &CaseTable) -> (CaseTable, usize) {
    let mut seen = BTreeSet::new();
    let mut kept = Vec::with_capacity(table.len());
    for case in table.cases() {
        if seen.insert((case.values.as_slice(), case.outcome)) {
            kept.push(case.clone());
        }
    }
    let removed = table.len() - kept.len();
    let out = CaseTable::new(table.schema.clone(), kept).expect("subset of a valid table is valid");
    (out, removed)
}
