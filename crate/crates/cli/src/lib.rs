//! Driver behind the `spincorr` binary: resolves a [`RunSpec`], executes it,
//! writes the data file and a replayable manifest next to it.

pub mod config;
pub mod error;
pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spincorr::experiment::{diagnose, re_deviation, Command, Experiment, ExperimentSpec, Recipe};
use spincorr::protocol::CONVENTION;
use spincorr::sampling::SampleConfig;

use crate::error::CliError;
use crate::output::{Format, Table};

pub const TOOL: &str = "spincorr";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const NORMALIZATION: &str = "correlation columns are C / l^2; script_c columns are raw";

/// Everything that determines the bytes of a data file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<Recipe>,
    pub runs: Vec<ExperimentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SampleConfig>,
    /// Site whose γ coefficients `diagnose` reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
    pub format: Format,
    pub convention: String,
    pub normalization: String,
    /// Parameters a recipe pins by choice rather than by necessity.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assumed: Vec<String>,
}

impl RunSpec {
    pub fn new(command: Command, runs: Vec<ExperimentSpec>, format: Format) -> Self {
        RunSpec {
            command,
            recipe: None,
            runs,
            sampling: None,
            site: None,
            format,
            convention: CONVENTION.to_string(),
            normalization: NORMALIZATION.to_string(),
            assumed: Vec::new(),
        }
    }

    pub fn from_recipe(recipe: Recipe, format: Format) -> Self {
        let plan = recipe.plan();
        RunSpec {
            recipe: Some(recipe),
            sampling: plan.sampling,
            assumed: plan.assumed.iter().map(|s| s.to_string()).collect(),
            ..RunSpec::new(plan.command, plan.runs, format)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub spec: RunSpec,
    pub outputs: Vec<PathBuf>,
}

/// Result of executing a [`RunSpec`].
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub table: Table,
    /// Per-site γ profile (diagnose only; included in JSON output).
    pub profile: Option<Table>,
    /// Human-readable lines for stderr.
    pub summary: Vec<String>,
}

pub fn execute(spec: &RunSpec) -> Result<RunOutput, CliError> {
    if spec.runs.is_empty() {
        return Err(CliError::Config("nothing to run".into()));
    }
    let mut out = RunOutput::default();
    for run in &spec.runs {
        match spec.command {
            Command::Exact => {
                let rows = Experiment::new(run.clone())?.exact_series()?;
                out.table.extend(output::exact_table(run, &rows))?;
            }
            Command::Protocol => {
                let rows = Experiment::new(run.clone())?.protocol_series()?;
                let dev = re_deviation(&rows)?;
                out.summary.push(format!(
                    "l = {} ({}): max |Re C - exact| = {:.4}, mean = {:.4} (units of l^2)",
                    run.l,
                    run.state.name(),
                    dev.max_abs_dev,
                    dev.mean_abs_dev
                ));
                out.table.extend(output::protocol_table(run, &rows))?;
            }
            Command::Sample => {
                let sampling =
                    spec.sampling.ok_or_else(|| CliError::Config("sample run without sampling settings".into()))?;
                let rows = Experiment::new(run.clone())?.sampled_series(&sampling)?;
                let noisy = rows.iter().filter(|r| r.re_c_std > r.systematic()).count();
                out.summary.push(format!(
                    "l = {} ({}), n_s = {}: statistical std exceeds systematic deviation at {noisy}/{} points",
                    run.l,
                    run.state.name(),
                    sampling.n_s,
                    rows.len()
                ));
                out.table.extend(output::sample_table(run, &rows))?;
            }
            Command::Diagnose => {
                let report = diagnose(run.l, run.state, spec.site.unwrap_or(run.site_i))?;
                out.summary.push(format!(
                    "l = {} ({}): slow-variation metric {:.6} (full), {:.6} (interior)",
                    run.l,
                    run.state.name(),
                    report.metric_full,
                    report.metric_interior
                ));
                out.table.extend(output::diagnose_table(&report))?;
                let profile = output::profile_table(&report);
                match &mut out.profile {
                    Some(p) => p.extend(profile)?,
                    None => out.profile = Some(profile),
                }
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    spec: &'a RunSpec,
    #[serde(flatten)]
    table: &'a Table,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<&'a Table>,
}

pub fn render(spec: &RunSpec, out: &RunOutput) -> Result<Vec<u8>, CliError> {
    match spec.format {
        Format::Csv => out.table.to_csv(),
        Format::Json => {
            let doc = JsonDocument { spec, table: &out.table, profile: out.profile.as_ref() };
            let mut bytes = serde_json::to_vec_pretty(&doc)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Write { path: path.to_owned(), source })
}

/// Executes `spec` and writes the data (to `out` or stdout) plus, for files, its manifest.
pub fn emit(spec: &RunSpec, out: Option<&Path>) -> Result<RunOutput, CliError> {
    let result = execute(spec)?;
    let bytes = render(spec, &result)?;
    match out {
        Some(path) => {
            write_file(path, &bytes)?;
            let manifest = RunManifest {
                tool: TOOL.into(),
                version: VERSION.into(),
                spec: spec.clone(),
                outputs: vec![path.to_owned()],
            };
            let mut text = serde_json::to_vec_pretty(&manifest)?;
            text.push(b'\n');
            write_file(&manifest_path(path), &text)?;
        }
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|source| CliError::Write { path: PathBuf::from("<stdout>"), source })?,
    }
    Ok(result)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read(path).map_err(|source| CliError::Read { path: path.to_owned(), source })?;
    serde_json::from_slice(&text).map_err(|source| CliError::Manifest { path: path.to_owned(), source })
}

/// Re-runs a manifest, writing to `out` or to the manifest's recorded output.
pub fn replay(manifest: &Path, out: Option<&Path>) -> Result<RunOutput, CliError> {
    let m = read_manifest(manifest)?;
    if m.tool != TOOL {
        return Err(CliError::Config(format!("manifest was written by '{}', not {TOOL}", m.tool)));
    }
    let target = out.map(Path::to_path_buf).or_else(|| m.outputs.first().cloned());
    emit(&m.spec, target.as_deref())
}
