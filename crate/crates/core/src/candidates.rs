//! Candidate-rule enumeration.
//!
//! Every conjunction over the chosen factors (up to `max_order` literals) is
//! visited depth-first in factor order. A node whose matched-case count has
//! already dropped below the cutoff is not extended: matching is
//! anti-monotone, so none of its extensions could reach the cutoff either.
//! Rules are handed to a callback as they are found; only survivors are ever
//! stored.
//!
//! The search space splits by the first literal ([`CandidateEnumerator::partitions`]),
//! which lets callers fan the work out and merge with [`sort_candidates`].

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::bitset::CaseSet;
use crate::error::{Error, Result};
use crate::model::{CandidateRule, CaseTable, Conjunction, FactorSchema, Level, Literal};

/// Filters applied to every enumerated conjunction.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateParams {
    pub decision_label: Level,
    /// Minimum sufficiency consistency (inclusive), in `(0, 1]`.
    pub consistency_threshold: f64,
    /// Minimum number of matched cases (all outcomes), at least 1.
    pub cutoff: usize,
    /// Maximum literals per conjunction; `None` means every factor.
    pub max_order: Option<usize>,
}

impl CandidateParams {
    pub fn new(decision_label: Level, consistency_threshold: f64, cutoff: usize) -> Self {
        CandidateParams { decision_label, consistency_threshold, cutoff, max_order: None }
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = Some(max_order);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.consistency_threshold > 0.0 && self.consistency_threshold <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "consistency threshold",
                reason: format!("{} is outside (0, 1]", self.consistency_threshold),
            });
        }
        if self.cutoff == 0 {
            return Err(Error::InvalidParameter { name: "cutoff", reason: "must be at least 1".into() });
        }
        if self.max_order == Some(0) {
            return Err(Error::InvalidParameter { name: "max order", reason: "must be at least 1".into() });
        }
        Ok(())
    }
}

/// Streams the candidate rules of one table.
pub struct CandidateEnumerator<'a> {
    table: &'a CaseTable,
    factors: Vec<usize>,
    base: CaseSet,
    positives: CaseSet,
    params: CandidateParams,
    max_order: usize,
}

impl<'a> CandidateEnumerator<'a> {
    pub fn new(table: &'a CaseTable, factor_set: &[usize], params: &CandidateParams) -> Result<Self> {
        params.validate()?;
        let mut factors = factor_set.to_vec();
        factors.sort_unstable();
        factors.dedup();
        if let Some(&bad) = factors.iter().find(|&&f| f >= table.schema().len()) {
            return Err(Error::FactorOutOfRange { index: bad, count: table.schema().len() });
        }
        let positives = table.outcome_set(params.decision_label)?.clone();
        let max_order = params.max_order.unwrap_or(factors.len()).min(factors.len());
        Ok(CandidateEnumerator { table, factors, base: table.all(), positives, params: params.clone(), max_order })
    }

    /// Restricts matching to `base`; rules then describe `base`-cases only.
    pub fn within(mut self, base: CaseSet) -> Self {
        self.positives.intersect_with(&base);
        self.base = base;
        self
    }

    pub fn table(&self) -> &'a CaseTable {
        self.table
    }

    /// One partition per possible first literal, in enumeration order.
    pub fn partitions(&self) -> Vec<Literal> {
        if self.max_order == 0 {
            return Vec::new();
        }
        let schema = self.table.schema();
        self.factors.iter().flat_map(|&f| (0..schema.factors()[f].levels).map(move |v| Literal::new(f, v))).collect()
    }

    /// Visits every rule whose lowest-factor literal is `first`.
    pub fn for_each_in_partition<F: FnMut(CandidateRule)>(&self, first: Literal, emit: &mut F) {
        let Some(pos) = self.factors.iter().position(|&f| f == first.factor) else {
            return;
        };
        let Ok(level) = self.table.level_set(first) else {
            return;
        };
        let matched = self.base.intersection(level);
        let mut lits = Vec::with_capacity(self.max_order);
        lits.push(first);
        self.descend(pos + 1, &mut lits, &matched, emit);
    }

    fn descend<F: FnMut(CandidateRule)>(&self, next: usize, lits: &mut Vec<Literal>, matched: &CaseSet, emit: &mut F) {
        let m = matched.len();
        if m == 0 || m < self.params.cutoff {
            return;
        }
        let p = matched.intersection_len(&self.positives);
        if p as f64 / m as f64 >= self.params.consistency_threshold {
            emit(CandidateRule {
                conjunction: Conjunction::from_sorted(lits.clone()),
                matched: matched.clone(),
                positives: matched.intersection(&self.positives),
            });
        }
        if lits.len() >= self.max_order {
            return;
        }
        let schema = self.table.schema();
        for pos in next..self.factors.len() {
            let f = self.factors[pos];
            for v in 0..schema.factors()[f].levels {
                let lit = Literal::new(f, v);
                let narrowed = matched.intersection(self.table.level_set(lit).expect("valid literal"));
                lits.push(lit);
                self.descend(pos + 1, lits, &narrowed, emit);
                lits.pop();
            }
        }
    }

    /// Visits every rule, partition by partition.
    pub fn for_each<F: FnMut(CandidateRule)>(&self, mut emit: F) {
        for first in self.partitions() {
            self.for_each_in_partition(first, &mut emit);
        }
    }

    /// All rules in the canonical order of [`candidate_order`].
    pub fn collect_sorted(&self) -> Vec<CandidateRule> {
        let mut out = Vec::new();
        self.for_each(|r| out.push(r));
        sort_candidates(&mut out);
        out
    }

    pub fn count(&self) -> usize {
        let mut n = 0;
        self.for_each(|_| n += 1);
        n
    }
}

/// Literal count ascending, then lexicographic on `(factor, value)`.
pub fn candidate_order(a: &CandidateRule, b: &CandidateRule) -> Ordering {
    let (x, y) = (a.conjunction.literals(), b.conjunction.literals());
    x.len().cmp(&y.len()).then_with(|| x.cmp(y))
}

pub fn sort_candidates(rules: &mut [CandidateRule]) {
    rules.sort_by(candidate_order);
}

/// All rules over `factor_set` passing both thresholds, canonically ordered.
pub fn enumerate_candidates(table: &CaseTable, factor_set: &[usize], params: &CandidateParams) -> Result<Vec<CandidateRule>> {
    Ok(CandidateEnumerator::new(table, factor_set, params)?.collect_sorted())
}

/// Size of the conjunction lattice the enumerator may visit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountBound {
    Exact(u64),
    /// More than 2^63 conjunctions.
    Overflow,
}

impl fmt::Display for CountBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountBound::Exact(n) => write!(f, "{n}"),
            CountBound::Overflow => f.write_str("> 2^63"),
        }
    }
}

/// Number of nonempty conjunctions over `factor_set` with at most
/// `max_order` literals: `Π (levels + 1) − 1` at full order, otherwise the
/// sum of the elementary symmetric polynomials of the level counts.
pub fn candidate_count_bound(schema: &FactorSchema, factor_set: &[usize], max_order: Option<usize>) -> CountBound {
    const LIMIT: u128 = 1 << 63;
    let order = max_order.unwrap_or(factor_set.len()).min(factor_set.len());
    // e[k] = sum over k-subsets of the product of level counts
    let mut e: Vec<u128> = alloc::vec![0; order + 1];
    e[0] = 1;
    for &f in factor_set {
        let Some(levels) = schema.factor(f).map(|x| x.levels as u128) else {
            continue;
        };
        for k in (1..=order).rev() {
            e[k] = (e[k] + e[k - 1] * levels).min(LIMIT + 1);
        }
    }
    let total: u128 = e[1..].iter().fold(0u128, |acc, &x| (acc + x).min(LIMIT + 1));
    if total > LIMIT {
        CountBound::Overflow
    } else {
        CountBound::Exact(total as u64)
    }
}
