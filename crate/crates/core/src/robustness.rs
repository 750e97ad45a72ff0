//! Internal validity (parameter sweeps) and external validity (jackknife
//! resampling with configuration classification).
//!
//! Classification is structural. A test configuration is compared as a
//! literal set against each original configuration:
//!
//! | relation                              | class          |
//! |---------------------------------------|----------------|
//! | equal                                 | Replicated     |
//! | proper subset (drops a factor)        | Superset       |
//! | proper superset (adds a factor)       | Subset         |
//! | none of the above for every original  | NotIdentified  |
//!
//! When originals disagree, Replicated beats Superset beats Subset. The
//! names follow what the rule covers, not its literal set: fewer literals
//! match more cases.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bitset::CaseSet;
use crate::error::{Error, Result};
use crate::model::{CaseTable, Conjunction, Ratio, Solution};
use crate::pipeline::{analyze, AnalysisParams};
use crate::rng::ExperimentRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValidityClass {
    Replicated,
    Superset,
    Subset,
    NotIdentified,
}

impl ValidityClass {
    pub const ALL: [ValidityClass; 4] = [ValidityClass::Replicated, ValidityClass::Superset, ValidityClass::Subset, ValidityClass::NotIdentified];

    pub fn name(self) -> &'static str {
        match self {
            ValidityClass::Replicated => "replicated",
            ValidityClass::Superset => "superset",
            ValidityClass::Subset => "subset",
            ValidityClass::NotIdentified => "not identified",
        }
    }
}

/// Class of `test` against `originals`; lower variants take precedence.
pub fn classify_configuration(test: &Conjunction, originals: &[Conjunction]) -> ValidityClass {
    originals
        .iter()
        .map(|o| {
            if test == o {
                ValidityClass::Replicated
            } else if test.is_subset_of(o) {
                ValidityClass::Superset
            } else if o.is_subset_of(test) {
                ValidityClass::Subset
            } else {
                ValidityClass::NotIdentified
            }
        })
        .min()
        .unwrap_or(ValidityClass::NotIdentified)
}

/// One grid point of an internal-validity sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub consistency_threshold: f64,
    pub cutoff: usize,
    pub unique_cover: usize,
}

impl SweepPoint {
    pub fn apply(&self, base: &AnalysisParams) -> AnalysisParams {
        AnalysisParams { consistency_threshold: self.consistency_threshold, cutoff: self.cutoff, unique_cover: self.unique_cover, ..base.clone() }
    }
}

/// Result of one sweep cell. A failing cell keeps the error and the sweep
/// moves on.
#[derive(Clone, Debug)]
pub struct SweepCell {
    pub point: SweepPoint,
    pub outcome: core::result::Result<(Solution, usize), Error>,
}

/// Every combination of the three axes, consistency outermost.
pub fn sweep_grid(consistency: &[f64], cutoff: &[usize], unique_cover: &[usize]) -> Vec<SweepPoint> {
    let mut out = Vec::new();
    for &c in consistency {
        for &f in cutoff {
            for &u in unique_cover {
                out.push(SweepPoint { consistency_threshold: c, cutoff: f, unique_cover: u });
            }
        }
    }
    out
}

pub fn sweep_cell(table: &CaseTable, base: &AnalysisParams, point: SweepPoint) -> SweepCell {
    let outcome = analyze(table, &point.apply(base)).map(|a| (a.solution, a.candidates.len()));
    SweepCell { point, outcome }
}

pub fn internal_sweep(table: &CaseTable, base: &AnalysisParams, grid: &[SweepPoint]) -> Result<Vec<SweepCell>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter { name: "grid", reason: "sweep grid is empty".into() });
    }
    Ok(grid.iter().map(|&p| sweep_cell(table, base, p)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityParams {
    pub fraction: f64,
    pub reps: usize,
    pub seed: u64,
}

impl Default for ValidityParams {
    fn default() -> Self {
        ValidityParams { fraction: 0.10, reps: 10, seed: 0 }
    }
}

impl ValidityParams {
    /// Cases dropped per repetition, `⌈fraction·n⌉`.
    pub fn removal_count(&self, n: usize) -> Result<usize> {
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(Error::InvalidParameter { name: "fraction", reason: alloc::format!("{} is outside (0, 1)", self.fraction) });
        }
        if self.reps == 0 {
            return Err(Error::InvalidParameter { name: "reps", reason: "need at least one repetition".into() });
        }
        let x = self.fraction * n as f64;
        let mut k = x as usize;
        if (k as f64) < x {
            k += 1;
        }
        if k >= n {
            return Err(Error::InvalidParameter { name: "fraction", reason: alloc::format!("removing {k} of {n} cases leaves nothing") });
        }
        Ok(k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepOutcome {
    pub rep: usize,
    /// Indices of the held-out cases, ascending.
    pub removed: Vec<usize>,
    /// Each configuration found on the reduced data with its class.
    pub configurations: Vec<(Conjunction, ValidityClass)>,
    /// Why the repetition produced no solution, if it did not.
    pub degenerate: Option<String>,
}

/// One jackknife repetition. Uses PRNG stream `rep` of the seed, so reps
/// can run in any order or in parallel.
pub fn run_repetition(
    table: &CaseTable,
    params: &AnalysisParams,
    validity: &ValidityParams,
    original: &[Conjunction],
    rep: usize,
) -> Result<RepOutcome> {
    let n = table.len();
    let k = validity.removal_count(n)?;
    let mut rng = ExperimentRng::stream(validity.seed, rep as u64);
    let mut removed = rng.choose_distinct(n, k);
    removed.sort_unstable();
    let mut keep = CaseSet::full(n);
    for &i in &removed {
        keep.remove(i);
    }
    let sub = table.select(&keep);
    let degenerate = |reason: String| RepOutcome {
        rep,
        removed: removed.clone(),
        configurations: alloc::vec![(Conjunction::empty(), ValidityClass::NotIdentified)],
        degenerate: Some(reason),
    };
    if sub.outcome_set(params.decision_label)?.is_empty() {
        return Ok(degenerate("no positive cases left".into()));
    }
    match analyze(&sub, params) {
        Ok(a) => Ok(RepOutcome {
            rep,
            configurations: a
                .solution
                .configurations()
                .into_iter()
                .map(|c| {
                    let class = classify_configuration(&c, original);
                    (c, class)
                })
                .collect(),
            removed,
            degenerate: None,
        }),
        Err(e) => Ok(degenerate(e.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigTally {
    pub configuration: Conjunction,
    /// Repetitions reproducing this configuration exactly.
    pub replicated: usize,
    /// `replicated / reps`.
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidityReport {
    pub original: Solution,
    pub params: ValidityParams,
    pub removed_per_rep: usize,
    pub reps: Vec<RepOutcome>,
    pub per_configuration: Vec<ConfigTally>,
    /// Counts in [`ValidityClass::ALL`] order.
    pub totals: [usize; 4],
    /// Replicated over everything except NotIdentified.
    pub overall_accuracy: Option<Ratio>,
}

impl ValidityReport {
    pub fn total(&self, class: ValidityClass) -> usize {
        self.totals[class as usize]
    }

    pub fn test_configurations(&self) -> usize {
        self.totals.iter().sum()
    }
}

/// Folds repetition outcomes (in any order) into the report.
pub fn aggregate(original: Solution, validity: ValidityParams, removed_per_rep: usize, mut reps: Vec<RepOutcome>) -> ValidityReport {
    reps.sort_by_key(|r| r.rep);
    let mut totals = [0usize; 4];
    for r in &reps {
        for (_, c) in &r.configurations {
            totals[*c as usize] += 1;
        }
    }
    let per_configuration = original
        .configurations()
        .into_iter()
        .map(|configuration| {
            let replicated = reps.iter().filter(|r| r.configurations.iter().any(|(c, _)| *c == configuration)).count();
            ConfigTally { accuracy: replicated as f64 / validity.reps as f64, configuration, replicated }
        })
        .collect();
    let classified = totals.iter().sum::<usize>() - totals[ValidityClass::NotIdentified as usize];
    let overall_accuracy = Ratio::new(totals[0] as u64, classified as u64, "accuracy").ok();
    ValidityReport { original, params: validity, removed_per_rep, reps, per_configuration, totals, overall_accuracy }
}

/// Full-data solution plus `validity.reps` sequential repetitions.
pub fn external_validity(table: &CaseTable, params: &AnalysisParams, validity: &ValidityParams) -> Result<ValidityReport> {
    let k = validity.removal_count(table.len())?;
    let original = analyze(table, params)?.solution;
    let configs = original.configurations();
    let reps = (0..validity.reps).map(|rep| run_repetition(table, params, validity, &configs, rep)).collect::<Result<Vec<_>>>()?;
    Ok(aggregate(original, *validity, k, reps))
}
