//! The two-step analysis: necessity first, then sufficiency over the rest.

use alloc::format;
use alloc::vec::Vec;

use crate::bitset::CaseSet;
use crate::candidates::{CandidateEnumerator, CandidateParams};
use crate::cover::{assemble_solution, exhaustive_cover_oracle, greedy_cover, CoverParams, Pick, ORACLE_MAX_CANDIDATES};
use crate::error::{Error, Result};
use crate::model::{CandidateRule, CaseTable, Conjunction, Level, Literal, Ratio, Solution};
use crate::necessity::{ambiguous_factors, exclude_necessary, necessary_conditions, DEFAULT_THRESHOLD};

/// How the cover step picks rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverStrategy {
    Greedy,
    /// Exhaustive search; only for small candidate lists.
    Oracle {
        max_subset_size: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisParams {
    pub decision_label: Level,
    pub necessity_threshold: f64,
    pub consistency_threshold: f64,
    pub cutoff: usize,
    pub unique_cover: usize,
    pub max_order: Option<usize>,
    /// Levels to conjoin for factors where several levels pass the
    /// necessity threshold.
    pub confirmed_necessary: Vec<Literal>,
    pub strategy: CoverStrategy,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams {
            decision_label: 1,
            necessity_threshold: DEFAULT_THRESHOLD,
            consistency_threshold: 0.8,
            cutoff: 2,
            unique_cover: crate::cover::DEFAULT_UNIQUE_COVER,
            max_order: None,
            confirmed_necessary: Vec::new(),
            strategy: CoverStrategy::Greedy,
        }
    }
}

impl AnalysisParams {
    pub fn candidate_params(&self) -> CandidateParams {
        CandidateParams {
            decision_label: self.decision_label,
            consistency_threshold: self.consistency_threshold,
            cutoff: self.cutoff,
            max_order: self.max_order,
        }
    }

    pub fn cover_params(&self) -> CoverParams {
        CoverParams::new(self.unique_cover, self.decision_label)
    }
}

/// Everything one run produced, intermediate steps included.
#[derive(Clone, Debug)]
pub struct Analysis {
    /// Every literal above the necessity threshold.
    pub necessity: Vec<(Literal, Ratio)>,
    /// The subset conjoined into the solution.
    pub conjoined: Vec<Literal>,
    /// Factors with more than one qualifying level.
    pub ambiguous: Vec<usize>,
    /// Factors the candidate search ran over.
    pub factor_set: Vec<usize>,
    /// Cases satisfying the conjoined literals.
    pub base: CaseSet,
    pub candidates: Vec<CandidateRule>,
    pub picks: Vec<Pick>,
    pub solution: Solution,
}

impl Analysis {
    /// True when the cover step chose nothing and the solution is only the
    /// necessary conjunction.
    pub fn no_cover(&self) -> bool {
        self.picks.is_empty()
    }
}

/// Output of the necessity step.
#[derive(Clone, Debug, PartialEq)]
pub struct NecessityStep {
    pub necessity: Vec<(Literal, Ratio)>,
    pub conjoined: Vec<Literal>,
    pub ambiguous: Vec<usize>,
}

/// Step one: which literals get conjoined.
pub fn necessity_step(table: &CaseTable, params: &AnalysisParams) -> Result<NecessityStep> {
    let necessity = necessary_conditions(table, params.decision_label, params.necessity_threshold)?;
    let ambiguous = ambiguous_factors(&necessity);
    for c in &params.confirmed_necessary {
        if !necessity.iter().any(|(l, _)| l == c) {
            return Err(Error::InvalidParameter {
                name: "confirmed necessary literal",
                reason: format!("factor {} level {} does not pass the necessity threshold", c.factor, c.value),
            });
        }
    }
    let mut conjoined: Vec<Literal> =
        necessity.iter().map(|(l, _)| *l).filter(|l| !ambiguous.contains(&l.factor)).chain(params.confirmed_necessary.iter().copied()).collect();
    conjoined.sort();
    conjoined.dedup();
    Conjunction::new(conjoined.clone())?;
    Ok(NecessityStep { necessity, conjoined, ambiguous })
}

/// Runs the pipeline with the sequential enumerator.
pub fn analyze(table: &CaseTable, params: &AnalysisParams) -> Result<Analysis> {
    analyze_with(table, params, |e| Ok(e.collect_sorted()))
}

/// Runs the pipeline; `enumerate` must return the enumerator's rules in
/// canonical order (the std crate passes a parallel version here).
pub fn analyze_with<F>(table: &CaseTable, params: &AnalysisParams, enumerate: F) -> Result<Analysis>
where
    F: FnOnce(&CandidateEnumerator<'_>) -> Result<Vec<CandidateRule>>,
{
    let cover = params.cover_params();
    cover.validate()?;
    let NecessityStep { necessity, conjoined, ambiguous } = necessity_step(table, params)?;
    let factor_set = exclude_necessary(table.schema(), &conjoined);
    let base = table.matched(&Conjunction::new(conjoined.clone())?)?;
    let enumerator = CandidateEnumerator::new(table, &factor_set, &params.candidate_params())?.within(base.clone());
    let candidates = enumerate(&enumerator)?;
    let positives = table.outcome_set(params.decision_label)?.intersection(&base);

    let picks = match params.strategy {
        CoverStrategy::Greedy => greedy_cover(&candidates, &positives, &cover)?,
        CoverStrategy::Oracle { max_subset_size } => {
            if candidates.len() > ORACLE_MAX_CANDIDATES {
                return Err(Error::TooManyCandidates { count: candidates.len(), max: ORACLE_MAX_CANDIDATES });
            }
            let chosen = exhaustive_cover_oracle(&candidates, &positives, &cover, max_subset_size)?;
            let mut covered = CaseSet::empty(table.len());
            chosen
                .into_iter()
                .map(|index| {
                    let gain = candidates[index].positives.difference_len(&covered);
                    covered.union_with(&candidates[index].positives);
                    Pick { index, gain }
                })
                .collect()
        }
    };
    let selected: Vec<CandidateRule> = picks.iter().map(|p| candidates[p.index].clone()).collect();
    let solution = assemble_solution(&conjoined, &selected, table, &cover)?;
    Ok(Analysis { necessity, conjoined, ambiguous, factor_set, base, candidates, picks, solution })
}
