//! Rayon drivers. Each one returns exactly what its sequential core
//! counterpart returns, whatever the thread count.

use rayon::prelude::*;
use scpqca_core::candidates::{sort_candidates, CandidateEnumerator};
use scpqca_core::pipeline::{analyze_with, Analysis, AnalysisParams};
use scpqca_core::robustness::{aggregate, run_repetition, sweep_cell, SweepCell, SweepPoint, ValidityParams, ValidityReport};
use scpqca_core::{CandidateRule, CaseTable, Result};

/// Runs `f` on a pool of `threads` workers, or rayon's global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => anyhow::bail!("--threads must be at least 1"),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
    }
}

/// Enumerates the first-literal partitions in parallel, then sorts.
pub fn enumerate(e: &CandidateEnumerator<'_>) -> Vec<CandidateRule> {
    let mut rules: Vec<CandidateRule> = e
        .partitions()
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut part = Vec::new();
            e.for_each_in_partition(first, &mut |r| part.push(r));
            part
        })
        .collect();
    sort_candidates(&mut rules);
    rules
}

pub fn analyze(table: &CaseTable, params: &AnalysisParams) -> Result<Analysis> {
    analyze_with(table, params, |e| Ok(enumerate(e)))
}

pub fn internal_sweep(table: &CaseTable, base: &AnalysisParams, grid: &[SweepPoint]) -> Vec<SweepCell> {
    grid.par_iter().map(|&p| sweep_cell(table, base, p)).collect()
}

pub fn external_validity(table: &CaseTable, params: &AnalysisParams, validity: &ValidityParams) -> Result<ValidityReport> {
    let k = validity.removal_count(table.len())?;
    let original = analyze(table, params)?.solution;
    let configs = original.configurations();
    let reps = (0..validity.reps).into_par_iter().map(|rep| run_repetition(table, params, validity, &configs, rep)).collect::<Result<Vec<_>>>()?;
    Ok(aggregate(original, *validity, k, reps))
}
