use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use drr_anatomy::measurement::Grade;
use drr_anatomy::stats::{
    ordinal_metrics, pairwise_comparisons, weighted_kappa, ConfusionMatrix, Kappa, OrdinalMetrics, PairwiseRow,
    Weighting,
};
use serde::{Deserialize, Serialize};

use crate::error::{validation, CliError, CliResult};
use crate::output::{read_json, to_json_bytes, write_file_atomic, SCHEMA_VERSION};

/// Columns treated as row identifiers rather than models.
const ID_COLUMNS: [&str; 6] = ["id", "class_id", "case", "case_id", "study", "study_id"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum StatsMode {
    /// Paired Wilcoxon signed-rank tests between every pair of models.
    Pairwise(PairwiseArgs),
    /// Grade agreement (kappa, accuracy, F1) of each model against the truth.
    Ordinal(OrdinalArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PairwiseArgs {
    /// Scores as CSV (one column per model) or JSON `{"models":[{"name","scores"}]}`.
    pub scores: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OrdinalArgs {
    /// CSV with a truth column and one grade column per model.
    pub grades: PathBuf,
    #[arg(long, default_value = "truth")]
    pub truth_column: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn run(mode: &StatsMode) -> CliResult<()> {
    match mode {
        StatsMode::Pairwise(a) => run_pairwise(a),
        StatsMode::Ordinal(a) => run_ordinal(a),
    }
}

fn emit(output: &OutputArgs, bytes: &[u8]) -> CliResult<()> {
    match &output.out {
        Some(p) => write_file_atomic(p, bytes),
        None => io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
}

/// Header and string cells of a CSV file.
fn read_table(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let bad = |e: csv::Error| validation(format!("{}: {e}", path.display()));
    let header: Vec<String> = r.headers().map_err(bad)?.iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_owned).collect()).map_err(bad))
        .collect::<CliResult<Vec<Vec<String>>>>()?;
    if rows.is_empty() {
        return Err(validation(format!("{}: no data rows", path.display())));
    }
    Ok((header, rows))
}

fn is_id_column(name: &str) -> bool {
    ID_COLUMNS.contains(&name.to_ascii_lowercase().as_str())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoresJson {
    models: Vec<ModelScores>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelScores {
    name: String,
    scores: Vec<f64>,
}

pub fn load_scores(path: &Path) -> CliResult<Vec<(String, Vec<f64>)>> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let s: ScoresJson = read_json(path)?;
        return Ok(s.models.into_iter().map(|m| (m.name, m.scores)).collect());
    }
    let (header, rows) = read_table(path)?;
    let mut models = Vec::new();
    for (c, name) in header.iter().enumerate() {
        if is_id_column(name) {
            continue;
        }
        let scores = rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row[c].parse::<f64>().map_err(|_| {
                    validation(format!(
                        "{}: row {}, column {name}: {:?} is not a number",
                        path.display(),
                        r + 2,
                        row[c]
                    ))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        models.push((name.clone(), scores));
    }
    Ok(models)
}

#[derive(Serialize)]
struct PairwiseDocument<'a> {
    schema_version: u32,
    alpha: f64,
    n_comparisons: usize,
    rows: &'a [PairwiseRow],
}

fn run_pairwise(args: &PairwiseArgs) -> CliResult<()> {
    let models = load_scores(&args.scores)?;
    let rows = pairwise_comparisons(&models, args.alpha)?;
    let bytes = match args.output.format {
        Format::Json => to_json_bytes(&PairwiseDocument {
            schema_version: SCHEMA_VERSION,
            alpha: args.alpha,
            n_comparisons: rows.len(),
            rows: &rows,
        })?,
        Format::Csv => csv_bytes(&rows)?,
    };
    emit(&args.output, &bytes)
}

#[derive(Debug, Serialize)]
pub struct OrdinalRow {
    pub model: String,
    pub n: u64,
    /// Rows are truth grades, columns predicted grades.
    pub confusion: Vec<Vec<u64>>,
    pub kappa_linear: Kappa,
    pub kappa_quadratic: Kappa,
    pub metrics: OrdinalMetrics,
}

#[derive(Serialize)]
struct OrdinalCsvRow<'a> {
    model: &'a str,
    n: u64,
    kappa_linear: f64,
    kappa_quadratic: f64,
    accuracy: f64,
    off_by_one: f64,
    macro_f1: f64,
    weighted_f1: f64,
    empty_classes: String,
}

fn parse_grade(s: &str) -> CliResult<usize> {
    Ok(s.parse::<Grade>()?.index())
}

/// Grades are zero-padded to all four severity levels.
pub fn ordinal_table(header: &[String], rows: &[Vec<String>], truth_column: &str) -> CliResult<Vec<OrdinalRow>> {
    let t = header
        .iter()
        .position(|h| h == truth_column)
        .ok_or_else(|| validation(format!("no {truth_column:?} column")))?;
    let truth = rows
        .iter()
        .map(|r| parse_grade(&r[t]))
        .collect::<CliResult<Vec<usize>>>()?;
    let mut out = Vec::new();
    for (c, name) in header.iter().enumerate() {
        if c == t || is_id_column(name) {
            continue;
        }
        let pred = rows
            .iter()
            .map(|r| parse_grade(&r[c]).map_err(|e| e.context(format!("column {name}"))))
            .collect::<CliResult<Vec<usize>>>()?;
        let cm = ConfusionMatrix::from_pairs(Grade::ALL.len(), truth.iter().copied().zip(pred))?;
        out.push(OrdinalRow {
            model: name.clone(),
            n: cm.total(),
            confusion: cm.rows(),
            kappa_linear: weighted_kappa(&cm, Weighting::Linear),
            kappa_quadratic: weighted_kappa(&cm, Weighting::Quadratic),
            metrics: ordinal_metrics(&cm),
        });
    }
    if out.is_empty() {
        return Err(validation("no model columns besides the truth column"));
    }
    Ok(out)
}

#[derive(Serialize)]
struct OrdinalDocument<'a> {
    schema_version: u32,
    grades: Vec<Grade>,
    models: &'a [OrdinalRow],
}

fn run_ordinal(args: &OrdinalArgs) -> CliResult<()> {
    let (header, rows) = read_table(&args.grades)?;
    let table = ordinal_table(&header, &rows, &args.truth_column)?;
    let bytes = match args.output.format {
        Format::Json => to_json_bytes(&OrdinalDocument {
            schema_version: SCHEMA_VERSION,
            grades: Grade::ALL.to_vec(),
            models: &table,
        })?,
        Format::Csv => {
            let flat: Vec<OrdinalCsvRow> = table
                .iter()
                .map(|r| OrdinalCsvRow {
                    model: &r.model,
                    n: r.n,
                    kappa_linear: r.kappa_linear.value,
                    kappa_quadratic: r.kappa_quadratic.value,
                    accuracy: r.metrics.accuracy,
                    off_by_one: r.metrics.off_by_one,
                    macro_f1: r.metrics.macro_f1,
                    weighted_f1: r.metrics.weighted_f1,
                    empty_classes: r
                        .metrics
                        .empty_classes
                        .iter()
                        .map(|c| c.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                })
                .collect();
            csv_bytes(&flat)?
        }
    };
    emit(&args.output, &bytes)
}
