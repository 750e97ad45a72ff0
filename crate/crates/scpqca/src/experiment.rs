//! Planted-pathway experiments: generate, solve, compare with the plant.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use scpqca_core::pathways::{generate, ExperimentSpec, PathwaySpec};
use scpqca_core::pipeline::AnalysisParams;
use scpqca_core::robustness::{classify_configuration, ValidityClass};
use serde::Serialize;

use crate::parallel;
use crate::report::{self, Format};

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub confound: usize,
    pub seed: u64,
    pub samples: usize,
    pub solution: String,
    pub consistency: f64,
    pub coverage: f64,
    pub candidates: usize,
    /// Each configuration against the planted terms.
    pub recovery: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

impl ExperimentRow {
    /// Every configuration is a planted term or a superset/subset of one.
    pub fn recovered(&self) -> bool {
        self.recovery.iter().all(|r| r != ValidityClass::NotIdentified.name())
    }
}

/// Generates the table for `spec` and runs the pipeline on it.
pub fn run_experiment(spec: &ExperimentSpec, params: &AnalysisParams) -> anyhow::Result<ExperimentRow> {
    let table = generate(spec)?;
    let start = Instant::now();
    let a = parallel::analyze(&table, params)?;
    let elapsed = start.elapsed();
    let schema = table.schema();
    let configs = a.solution.configurations();
    let recovery = configs.iter().map(|c| classify_configuration(c, spec.pathway.terms()).name().to_string()).collect();
    Ok(ExperimentRow {
        confound: spec.confound_count,
        seed: spec.seed,
        samples: spec.sample_size,
        solution: scpqca_core::pathways::dnf_string(&configs, schema),
        consistency: a.solution.consistency.value(),
        coverage: a.solution.coverage.value(),
        candidates: a.candidates.len(),
        recovery,
        runtime_ms: Some(elapsed.as_secs_f64() * 1e3),
    })
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub confound: usize,
    pub runs: usize,
    pub median_consistency: f64,
    pub median_coverage: f64,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub pathway: String,
    pub factors: usize,
    pub samples: usize,
    pub rows: Vec<ExperimentRow>,
    pub summary: Vec<SummaryRow>,
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => xs[n / 2],
        _ => (xs[n / 2 - 1] + xs[n / 2]) / 2.0,
    }
}

/// One run per (confound, seed), seeds `seed, seed+1, …`.
pub fn run_grid(
    pathway: &PathwaySpec,
    samples: usize,
    confounds: &[usize],
    seed: u64,
    seeds: usize,
    params: &AnalysisParams,
    timing: bool,
) -> anyhow::Result<ExperimentReport> {
    let jobs: Vec<(usize, u64)> = confounds.iter().flat_map(|&k| (0..seeds as u64).map(move |i| (k, seed.wrapping_add(i)))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(k, s)| {
            let spec = ExperimentSpec { pathway: pathway.clone(), sample_size: samples, confound_count: k, seed: s };
            let mut row = run_experiment(&spec, params)?;
            if !timing {
                row.runtime_ms = None;
            }
            Ok(row)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let summary = confounds
        .iter()
        .map(|&k| {
            let mine: Vec<&ExperimentRow> = rows.iter().filter(|r| r.confound == k).collect();
            SummaryRow {
                confound: k,
                runs: mine.len(),
                median_consistency: median(&mut mine.iter().map(|r| r.consistency).collect::<Vec<_>>()),
                median_coverage: median(&mut mine.iter().map(|r| r.coverage).collect::<Vec<_>>()),
            }
        })
        .collect();
    Ok(ExperimentReport { pathway: pathway.to_text(), factors: pathway.schema().len(), samples, rows, summary })
}

pub fn render(r: &ExperimentReport, format: Format) -> String {
    match format {
        Format::Json => report::json(r),
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            let mut header = vec!["confound", "seed", "solution", "consistency", "coverage", "candidates", "recovery"];
            let timed = r.rows.iter().any(|x| x.runtime_ms.is_some());
            if timed {
                header.push("runtime_ms");
            }
            w.write_record(&header).expect("in-memory write");
            for x in &r.rows {
                let mut rec = vec![
                    x.confound.to_string(),
                    x.seed.to_string(),
                    x.solution.clone(),
                    format!("{:.4}", x.consistency),
                    format!("{:.4}", x.coverage),
                    x.candidates.to_string(),
                    x.recovery.join(" "),
                ];
                if timed {
                    rec.push(x.runtime_ms.map(|t| format!("{t:.1}")).unwrap_or_default());
                }
                w.write_record(&rec).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
        }
        Format::Text => {
            let mut out = format!("Pathway {} over {} factors, {} samples\n\n", r.pathway, r.factors, r.samples);
            out += "Num.  seed  Con.    Cov.    rules  Sol.\n";
            for x in &r.rows {
                let _ = write!(out, "{:>4}  {:>4}  {:.4}  {:.4}  {:>5}  {}", x.confound, x.seed, x.consistency, x.coverage, x.candidates, x.solution);
                if let Some(t) = x.runtime_ms {
                    let _ = write!(out, "  ({t:.1} ms)");
                }
                out.push('\n');
            }
            if r.rows.len() > r.summary.len() {
                out += "\nNum.  runs  median Con.  median Cov.\n";
                for s in &r.summary {
                    let _ = writeln!(out, "{:>4}  {:>4}  {:>11.4}  {:>11.4}", s.confound, s.runs, s.median_consistency, s.median_coverage);
                }
            }
            out
        }
    }
}
