//! Greedy maximum coverage over candidate rules, with a unique-cover floor,
//! and assembly of the final solution.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::bitset::CaseSet;
use crate::error::{Error, Result};
use crate::model::{union_metrics, CandidateRule, CaseTable, Conjunction, Level, Literal, Ratio, Solution};

pub const DEFAULT_UNIQUE_COVER: usize = 2;

/// Largest candidate list [`exhaustive_cover_oracle`] accepts.
pub const ORACLE_MAX_CANDIDATES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverParams {
    /// Minimum number of not-yet-covered positives a rule must add.
    pub unique_cover: usize,
    pub decision_label: Level,
}

impl CoverParams {
    pub fn new(unique_cover: usize, decision_label: Level) -> Self {
        CoverParams { unique_cover, decision_label }
    }

    pub fn validate(&self) -> Result<()> {
        if self.unique_cover == 0 {
            return Err(Error::InvalidParameter { name: "unique cover", reason: "must be at least 1".into() });
        }
        Ok(())
    }
}

/// One greedy selection: the candidate's index and the positives it added.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pick {
    pub index: usize,
    pub gain: usize,
}

/// Greedy cover of `positives`.
///
/// Each round considers the unselected rules adding at least
/// `unique_cover` uncovered positives and takes the best by
/// (consistency, added positives, fewer literals, position in `candidates`).
/// Consistencies compare as exact fractions. The loop ends when every
/// positive is covered or no rule clears the floor.
pub fn greedy_cover(candidates: &[CandidateRule], positives: &CaseSet, params: &CoverParams) -> Result<Vec<Pick>> {
    params.validate()?;
    let targets: Vec<CaseSet> = candidates.iter().map(|r| r.positives.intersection(positives)).collect();
    let consistencies: Vec<Ratio> = candidates.iter().map(CandidateRule::consistency).collect();
    let mut covered = CaseSet::empty(positives.capacity());
    let mut taken = vec![false; candidates.len()];
    let mut picks = Vec::new();
    let remaining = |covered: &CaseSet| positives.difference_len(covered);

    while remaining(&covered) > 0 {
        let mut best: Option<Pick> = None;
        for (i, target) in targets.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let gain = target.difference_len(&covered);
            if gain < params.unique_cover || gain == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    consistencies[i]
                        .cmp(&consistencies[b.index])
                        .then(gain.cmp(&b.gain))
                        .then(candidates[b.index].conjunction.len().cmp(&candidates[i].conjunction.len()))
                        == Ordering::Greater
                }
            };
            if better {
                best = Some(Pick { index: i, gain });
            }
        }
        let Some(pick) = best else { break };
        taken[pick.index] = true;
        covered.union_with(&targets[pick.index]);
        picks.push(pick);
    }
    Ok(picks)
}

/// Exact search over rule subsets of at most `max_subset_size` rules.
///
/// A subset is admissible when its rules can be ordered so that each adds at
/// least `unique_cover` uncovered positives; every greedy selection is
/// therefore admissible. Maximizes covered positives, then prefers fewer
/// rules, then higher solution consistency. Returns candidate indices,
/// ascending.
pub fn exhaustive_cover_oracle(
    candidates: &[CandidateRule],
    positives: &CaseSet,
    params: &CoverParams,
    max_subset_size: usize,
) -> Result<Vec<usize>> {
    params.validate()?;
    let n = candidates.len();
    if n > ORACLE_MAX_CANDIDATES {
        return Err(Error::TooManyCandidates { count: n, max: ORACLE_MAX_CANDIDATES });
    }
    // positives re-indexed densely so unions stay small
    let pos_index: Vec<usize> = positives.iter().collect();
    let p = pos_index.len();
    let compress = |s: &CaseSet| CaseSet::from_indices(p, pos_index.iter().enumerate().filter(|(_, &c)| s.contains(c)).map(|(k, _)| k));
    let targets: Vec<CaseSet> = candidates.iter().map(|r| compress(&r.positives)).collect();

    let masks = 1usize << n;
    let mut admissible = vec![false; masks];
    let mut unions: Vec<CaseSet> = Vec::with_capacity(masks);
    admissible[0] = true;
    unions.push(CaseSet::empty(p));

    let mut best_mask = 0usize;
    let mut best_cov = 0usize;
    let mut best_cons: Option<Ratio> = None;

    for mask in 1..masks {
        let low = mask.trailing_zeros() as usize;
        let mut u = unions[mask & (mask - 1)].clone();
        u.union_with(&targets[low]);
        let size = mask.count_ones() as usize;
        if size <= max_subset_size {
            admissible[mask] = (0..n).filter(|r| mask & (1 << r) != 0).any(|r| {
                let rest = mask & !(1 << r);
                admissible[rest] && targets[r].difference_len(&unions[rest]) >= params.unique_cover
            });
        }
        let cov = u.len();
        unions.push(u);
        if !admissible[mask] {
            continue;
        }
        let best_size = best_mask.count_ones() as usize;
        if cov < best_cov || (cov == best_cov && size > best_size) {
            continue;
        }
        let cons = subset_consistency(candidates, mask);
        let better = cov > best_cov || size < best_size || cons > best_cons;
        if better {
            best_mask = mask;
            best_cov = cov;
            best_cons = cons;
        }
    }
    Ok((0..n).filter(|r| best_mask & (1 << r) != 0).collect())
}

fn subset_consistency(candidates: &[CandidateRule], mask: usize) -> Option<Ratio> {
    let mut matched: Option<CaseSet> = None;
    let mut hits: Option<CaseSet> = None;
    for (i, r) in candidates.iter().enumerate() {
        if mask & (1 << i) == 0 {
            continue;
        }
        match (&mut matched, &mut hits) {
            (Some(m), Some(h)) => {
                m.union_with(&r.matched);
                h.union_with(&r.positives);
            }
            _ => {
                matched = Some(r.matched.clone());
                hits = Some(r.positives.clone());
            }
        }
    }
    let (m, h) = (matched?, hits?);
    Ratio::new(h.len() as u64, m.len() as u64, "").ok()
}

/// Builds the [`Solution`]: each selected rule is conjoined with the
/// necessary literals and re-matched against the whole table, then the
/// union metrics, per-rule unique coverage and pick-order gains are computed.
pub fn assemble_solution(necessary: &[Literal], selected: &[CandidateRule], table: &CaseTable, params: &CoverParams) -> Result<Solution> {
    params.validate()?;
    let label = params.decision_label;
    let positives = table.outcome_set(label)?;
    let necessary_conj = Conjunction::new(necessary.to_vec())?;
    necessary_conj.validate(table.schema())?;

    let mut rules: Vec<CandidateRule> = Vec::with_capacity(selected.len());
    for rule in selected {
        let conjunction = necessary_conj
            .merge(&rule.conjunction)
            .ok_or_else(|| Error::InvalidParameter { name: "selected rule", reason: "contradicts a necessary literal".into() })?;
        if rules.iter().any(|r| r.conjunction == conjunction) {
            return Err(Error::InvalidParameter { name: "selected rule", reason: "selected twice".into() });
        }
        let matched = table.matched(&conjunction)?;
        let hits = matched.intersection(positives);
        rules.push(CandidateRule { conjunction, matched, positives: hits });
    }

    let union = if rules.is_empty() {
        if necessary.is_empty() {
            return Err(Error::VacuousSolution);
        }
        table.matched(&necessary_conj)?
    } else {
        let mut u = CaseSet::empty(table.len());
        for r in &rules {
            u.union_with(&r.matched);
        }
        u
    };
    let (consistency, coverage) = union_metrics(&union, table, label)?;

    let mut covered = CaseSet::empty(table.len());
    let mut selection_gain = Vec::with_capacity(rules.len());
    for r in &rules {
        selection_gain.push(r.positives.difference_len(&covered));
        covered.union_with(&r.positives);
    }
    let unique_coverage = (0..rules.len())
        .map(|i| {
            let mut others = CaseSet::empty(table.len());
            for (j, r) in rules.iter().enumerate() {
                if j != i {
                    others.union_with(&r.positives);
                }
            }
            rules[i].positives.difference_len(&others)
        })
        .collect();

    let mut necessary = necessary.to_vec();
    necessary.sort();
    Ok(Solution { decision_label: label, necessary, rules, consistency, coverage, unique_coverage, selection_gain, matched: union })
}
