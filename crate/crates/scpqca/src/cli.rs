//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 when no rule passes the
//! unique-cover floor or the solution would be vacuous.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use scpqca_core::candidates::CandidateEnumerator;
use scpqca_core::cover::ORACLE_MAX_CANDIDATES;
use scpqca_core::model::deduplicate;
use scpqca_core::necessity::exclude_necessary;
use scpqca_core::pathways::{generate, letter_schema, parse_pathway, ExperimentSpec};
use scpqca_core::pipeline::{necessity_step, AnalysisParams, CoverStrategy};
use scpqca_core::robustness::{sweep_grid, ValidityParams};
use scpqca_core::{CaseTable, Conjunction, Literal};

use crate::experiment;
use crate::ingest::{self, LoadOptions};
use crate::parallel;
use crate::report::{self, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_COVER: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "scpqca", version, about = "Configurational comparative analysis by greedy set covering")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Case data (CSV with a header row).
    #[arg(long, global = true, value_name = "CSV")]
    pub data: Option<PathBuf>,
    /// Outcome column [default: the last column].
    #[arg(long, global = true, value_name = "COL")]
    pub outcome: Option<String>,
    /// Outcome level (or label) to explain.
    #[arg(long, global = true, default_value = "1")]
    pub label: String,
    /// Minimum sufficiency consistency of a candidate rule.
    #[arg(long, global = true, default_value_t = 0.8)]
    pub consistency: f64,
    /// Minimum number of cases a candidate rule must match.
    #[arg(long, global = true, default_value_t = 2)]
    pub cutoff: usize,
    /// New positive cases a rule must add to be selected.
    #[arg(long, global = true, default_value_t = 2)]
    pub unique_cover: usize,
    /// Necessity consistency must exceed this.
    #[arg(long, global = true, default_value_t = 0.9)]
    pub necessity_threshold: f64,
    /// Longest candidate rule, in literals.
    #[arg(long, global = true)]
    pub max_order: Option<usize>,
    #[arg(long, global = true, env = "SCPQCA_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Calibrate a numeric column with cut points, e.g. `GDP=1000,5000`.
    #[arg(long, global = true, value_name = "COL=X1,X2,..")]
    pub cut: Vec<String>,
    /// Declare the level count of an integer column, e.g. `REGION=4`.
    #[arg(long, global = true, value_name = "COL=N")]
    pub declare_levels: Vec<String>,
    #[arg(long, global = true, value_name = "COL")]
    pub id_column: Option<String>,
    /// Collapse cases identical in every column before analysis.
    #[arg(long, global = true)]
    pub dedup: bool,
    /// Conjoin this level when several levels of a factor pass the necessity threshold.
    #[arg(long, global = true, value_name = "FACTOR=LEVEL")]
    pub confirm_necessary: Vec<String>,
    /// Write the label/level mapping as JSON.
    #[arg(long, global = true, value_name = "PATH")]
    pub emit_schema: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List necessary conditions.
    Necessity,
    /// List candidate rules over the non-necessary factors.
    Candidates,
    /// Necessity, candidates and cover: the full solution.
    Solve {
        /// Exhaustive cover search instead of greedy (at most 20 candidates).
        #[arg(long)]
        oracle: bool,
    },
    /// Generate a planted-pathway dataset.
    Synth(SynthArgs),
    /// Solve generated datasets over confound counts and seeds.
    Experiment(ExperimentArgs),
    /// Internal validity: rerun over a parameter grid.
    Sweep(SweepArgs),
    /// External validity: rerun on random subsamples.
    Xval(XvalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct DesignArgs {
    #[arg(long, default_value_t = 6)]
    pub factors: usize,
    /// Levels per factor: one count for all, or one per factor.
    #[arg(long, default_value = "2", value_name = "N[,N..]")]
    pub levels: String,
    /// DNF over the factors, e.g. `ab+CD` or `A0*B0+B1*C1`.
    #[arg(long)]
    pub pathway: String,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long, default_value_t = 0)]
    pub confound: usize,
    #[arg(long, value_enum, default_value_t = Emit::Csv)]
    pub emit: Emit,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Confound counts to try.
    #[arg(long, default_value = "0", value_name = "K[,K..]")]
    pub confound: String,
    /// Runs per confound count, seeds `--seed`, `--seed`+1, …
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// Report wall-clock time per run (output is then not reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Consistency thresholds [default: --consistency].
    #[arg(long, value_name = "R[,R..]")]
    pub consistency_grid: Option<String>,
    /// Cutoffs [default: --cutoff].
    #[arg(long, value_name = "N[,N..]")]
    pub cutoff_grid: Option<String>,
    /// Unique-cover values [default: --unique-cover].
    #[arg(long, value_name = "N[,N..]")]
    pub unique_cover_grid: Option<String>,
}

#[derive(Args, Debug)]
pub struct XvalArgs {
    /// Share of cases removed per repetition.
    #[arg(long, default_value_t = 0.10)]
    pub fraction: f64,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
}

/// Parses `args` (program name first), runs, writes the report to `out` and
/// diagnostics to `err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_INPUT
                }
            };
        }
    };
    let result = parallel::with_threads(cli.global.threads, || execute(&cli)).and_then(|r| r);
    match result {
        Ok(done) => {
            for w in &done.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let _ = out.write_all(done.output.as_bytes());
            if done.no_cover {
                let _ = writeln!(err, "no admissible cover: no candidate rule adds --unique-cover {} new cases", cli.global.unique_cover);
                EXIT_NO_COVER
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            let vacuous = e.chain().any(|c| matches!(c.downcast_ref::<scpqca_core::Error>(), Some(scpqca_core::Error::VacuousSolution)));
            if vacuous {
                EXIT_NO_COVER
            } else {
                EXIT_INPUT
            }
        }
    }
}

struct Done {
    output: String,
    warnings: Vec<String>,
    no_cover: bool,
}

impl Done {
    fn new(output: String) -> Self {
        Done { output, warnings: Vec::new(), no_cover: false }
    }
}

fn list<T: std::str::FromStr>(flag: &str, text: &str) -> anyhow::Result<Vec<T>> {
    let items = text
        .split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| anyhow!("{flag}: `{s}` is not a valid value")))
        .collect::<anyhow::Result<Vec<T>>>()?;
    if items.is_empty() {
        bail!("{flag}: empty list");
    }
    Ok(items)
}

fn load(g: &Global, command: &str, warnings: &mut Vec<String>) -> anyhow::Result<CaseTable> {
    let path = g.data.as_ref().ok_or_else(|| anyhow!("--data <CSV> is required for `{command}`"))?;
    let mut options = LoadOptions { outcome: g.outcome.clone(), id_column: g.id_column.clone(), ..Default::default() };
    for c in &g.cut {
        options.calibration.add_cut(c)?;
    }
    for c in &g.declare_levels {
        options.calibration.add_levels(c)?;
    }
    let mut table = ingest::load_csv(path, &options).with_context(|| format!("--data {}", path.display()))?;
    if g.dedup {
        let (t, removed) = deduplicate(&table);
        if removed > 0 {
            warnings.push(format!("removed {removed} duplicate case(s)"));
        }
        table = t;
    }
    if let Some(p) = &g.emit_schema {
        std::fs::write(p, ingest::schema_json(&table) + "\n").with_context(|| format!("--emit-schema {}", p.display()))?;
    }
    Ok(table)
}

fn analysis_params(g: &Global, table: &CaseTable) -> anyhow::Result<AnalysisParams> {
    let schema = table.schema();
    let outcome = schema.outcome();
    let decision_label = outcome.level_of(&g.label).ok_or_else(|| {
        let known: Vec<String> = (0..outcome.levels).map(|l| outcome.label(l)).collect();
        anyhow!("--label `{}`: outcome `{}` has levels {}", g.label, outcome.name, known.join(", "))
    })?;
    let confirmed_necessary = g
        .confirm_necessary
        .iter()
        .map(|arg| {
            let (name, level) = arg.split_once('=').ok_or_else(|| anyhow!("--confirm-necessary `{arg}`: expected FACTOR=LEVEL"))?;
            let f = schema.factor_index(name.trim()).ok_or_else(|| anyhow!("--confirm-necessary `{arg}`: no factor `{name}`"))?;
            let v = schema.factors()[f]
                .level_of(level.trim())
                .ok_or_else(|| anyhow!("--confirm-necessary `{arg}`: `{level}` is not a level of `{name}`"))?;
            Ok(Literal::new(f, v))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(AnalysisParams {
        decision_label,
        necessity_threshold: g.necessity_threshold,
        consistency_threshold: g.consistency,
        cutoff: g.cutoff,
        unique_cover: g.unique_cover,
        max_order: g.max_order,
        confirmed_necessary,
        strategy: CoverStrategy::Greedy,
    })
}

fn ambiguity_warning(table: &CaseTable, ambiguous: &[usize], warnings: &mut Vec<String>) {
    if !ambiguous.is_empty() {
        let names: Vec<&str> = ambiguous.iter().map(|&f| table.schema().factors()[f].name.as_str()).collect();
        warnings.push(format!(
            "several levels of {} pass the necessity threshold; none is conjoined unless confirmed with --confirm-necessary",
            names.join(", ")
        ));
    }
}

fn design(d: &DesignArgs) -> anyhow::Result<scpqca_core::pathways::PathwaySpec> {
    let levels: Vec<u32> = list("--levels", &d.levels)?;
    let schema = letter_schema(d.factors, &levels).context("--factors/--levels")?;
    parse_pathway(&d.pathway, &schema).with_context(|| format!("--pathway `{}`", d.pathway))
}

fn execute(cli: &Cli) -> anyhow::Result<Done> {
    let g = &cli.global;
    let mut warnings = Vec::new();
    let done = match &cli.command {
        Command::Necessity => {
            let table = load(g, "necessity", &mut warnings)?;
            let params = analysis_params(g, &table)?;
            let step = necessity_step(&table, &params)?;
            ambiguity_warning(&table, &step.ambiguous, &mut warnings);
            let v = report::necessity_view(&table, params.decision_label, g.necessity_threshold, &step.necessity, &step.ambiguous);
            Done::new(report::render_necessity(&v, g.format))
        }
        Command::Candidates => {
            let table = load(g, "candidates", &mut warnings)?;
            let params = analysis_params(g, &table)?;
            let step = necessity_step(&table, &params)?;
            ambiguity_warning(&table, &step.ambiguous, &mut warnings);
            let factor_set = exclude_necessary(table.schema(), &step.conjoined);
            let base = table.matched(&Conjunction::new(step.conjoined.clone())?)?;
            let e = CandidateEnumerator::new(&table, &factor_set, &params.candidate_params())?.within(base);
            let rules = parallel::enumerate(&e);
            let v = report::candidates_view(&table, params.decision_label, &step.conjoined, &factor_set, &rules, g.consistency, g.cutoff);
            Done::new(report::render_candidates(&v, g.format))
        }
        Command::Solve { oracle } => {
            let table = load(g, "solve", &mut warnings)?;
            let mut params = analysis_params(g, &table)?;
            if *oracle {
                params.strategy = CoverStrategy::Oracle { max_subset_size: ORACLE_MAX_CANDIDATES };
            }
            let a = parallel::analyze(&table, &params).map_err(|e| match e {
                scpqca_core::Error::TooManyCandidates { .. } => {
                    anyhow!(e).context("--oracle needs a small candidate list; raise --consistency or --cutoff, or lower --max-order")
                }
                e => anyhow!(e),
            })?;
            ambiguity_warning(&table, &a.ambiguous, &mut warnings);
            let v = report::solve_view(&table, &a, g.necessity_threshold);
            let mut done = Done::new(report::render_solve(&table, &a, &v, g.format));
            done.no_cover = a.no_cover();
            done
        }
        Command::Synth(s) => {
            let pathway = design(&s.design)?;
            let table = generate(&ExperimentSpec { pathway, sample_size: s.design.samples, confound_count: s.confound, seed: g.seed })
                .context("--confound")?;
            let output = match s.emit {
                Emit::Csv => {
                    let mut buf = Vec::new();
                    ingest::write_csv(&table, &mut buf)?;
                    String::from_utf8(buf)?
                }
                Emit::Json => {
                    let schema = table.schema();
                    let rows: Vec<serde_json::Value> = table
                        .cases()
                        .iter()
                        .map(|c| {
                            let mut m = serde_json::Map::new();
                            m.insert("id".into(), c.id.clone().into());
                            for (f, &v) in schema.factors().iter().zip(&c.values) {
                                m.insert(f.name.clone(), v.into());
                            }
                            m.insert(schema.outcome().name.clone(), c.outcome.into());
                            serde_json::Value::Object(m)
                        })
                        .collect();
                    report::json(&rows)
                }
            };
            Done::new(output)
        }
        Command::Experiment(x) => {
            let pathway = design(&x.design)?;
            let confounds: Vec<usize> = list("--confound", &x.confound)?;
            if x.seeds == 0 {
                bail!("--seeds must be at least 1");
            }
            let params = AnalysisParams {
                necessity_threshold: g.necessity_threshold,
                consistency_threshold: g.consistency,
                cutoff: g.cutoff,
                unique_cover: g.unique_cover,
                max_order: g.max_order,
                ..Default::default()
            };
            let r = experiment::run_grid(&pathway, x.design.samples, &confounds, g.seed, x.seeds, &params, x.timing)?;
            Done::new(experiment::render(&r, g.format))
        }
        Command::Sweep(s) => {
            let table = load(g, "sweep", &mut warnings)?;
            let params = analysis_params(g, &table)?;
            let cons = match &s.consistency_grid {
                Some(t) => list("--consistency-grid", t)?,
                None => vec![g.consistency],
            };
            let cut = match &s.cutoff_grid {
                Some(t) => list("--cutoff-grid", t)?,
                None => vec![g.cutoff],
            };
            let uc = match &s.unique_cover_grid {
                Some(t) => list("--unique-cover-grid", t)?,
                None => vec![g.unique_cover],
            };
            let cells = parallel::internal_sweep(&table, &params, &sweep_grid(&cons, &cut, &uc));
            Done::new(report::render_sweep(&report::sweep_rows(&table, &cells), g.format))
        }
        Command::Xval(x) => {
            let table = load(g, "xval", &mut warnings)?;
            let params = analysis_params(g, &table)?;
            let v = ValidityParams { fraction: x.fraction, reps: x.reps, seed: g.seed };
            let r = parallel::external_validity(&table, &params, &v)?;
            Done::new(report::render_validity(&report::validity_view(&table, &r), g.format))
        }
    };
    Ok(Done { warnings, ..done })
}
