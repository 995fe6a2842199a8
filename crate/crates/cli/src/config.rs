//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use spincorr::experiment::{ExperimentSpec, Grid};
use spincorr::model::{HamiltonianKind, InitialState};
use spincorr::protocol::{CouplingKind, ExtractionMethod};
use spincorr::sampling::{SampleConfig, DEFAULT_REPEATS};
use spincorr::HalfInt;

use crate::error::CliError;
use crate::output::Format;

/// A `λL` value written either as a number or as an expression such as `pi/2` or `3*pi/4`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum LambdaValue {
    Number(f64),
    Expr(String),
}

impl LambdaValue {
    pub fn resolve(&self) -> Result<f64, CliError> {
        match self {
            LambdaValue::Number(x) => Ok(*x),
            LambdaValue::Expr(s) => parse_lambda(s),
        }
    }
}

/// Parses `1.57`, `pi`, `pi/2`, `3pi/4` or `3*pi/4`.
pub fn parse_lambda(s: &str) -> Result<f64, CliError> {
    let bad = || CliError::Config(format!("cannot read lambda-l value '{s}'"));
    let t = s.trim().to_ascii_lowercase();
    let Some(pos) = t.find("pi") else {
        return t.parse().map_err(|_| bad());
    };
    let (head, tail) = (t[..pos].trim_end_matches('*').trim(), t[pos + 2..].trim());
    let factor = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|_| bad())? };
    let divisor = match tail.strip_prefix('/') {
        Some(d) => d.trim().parse::<f64>().map_err(|_| bad())?,
        None if tail.is_empty() => 1.0,
        None => return Err(bad()),
    };
    if divisor == 0.0 {
        return Err(bad());
    }
    Ok(factor * std::f64::consts::PI / divisor)
}

pub fn parse_l(s: &str) -> Result<HalfInt, CliError> {
    let value = match s.split_once('/') {
        Some((num, "2")) => num.trim().parse::<f64>().map(|n| n / 2.0),
        Some(_) => return Err(CliError::Config(format!("l = '{s}' must be an integer or half-integer"))),
        None => s.trim().parse::<f64>(),
    }
    .map_err(|_| CliError::Config(format!("l = '{s}' is not a number")))?;
    match HalfInt::from_f64(value) {
        Some(l) if value > 0.0 => Ok(l),
        _ => Err(CliError::Config(format!("l = {s} must be a positive multiple of 1/2"))),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub l: Option<f64>,
    pub state: Option<String>,
    /// TOML file holding `re = [[...]]` and `im = [[...]]` for a custom Hamiltonian.
    pub hamiltonian_file: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub coupling: Option<String>,
    pub site_i: Option<usize>,
    pub site_j: Option<usize>,
    pub t1: Option<f64>,
    pub t2_grid: Option<String>,
    pub lambda_l: Option<Vec<LambdaValue>>,
    pub method: Option<String>,
    pub refined_l: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub ns: Option<usize>,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub model: ModelSection,
    pub protocol: ProtocolSection,
    pub sampling: SamplingSection,
    pub output: OutputSection,
}

pub fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

fn load_hamiltonian(path: &Path) -> Result<HamiltonianKind, CliError> {
    let m: MatrixFile = read_toml(path)?;
    let im = m.im.unwrap_or_else(|| m.re.iter().map(|row| vec![0.0; row.len()]).collect());
    Ok(HamiltonianKind::Custom { re: m.re, im })
}

/// Flag values; `None` means "not given on the command line".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub l: Option<String>,
    pub state: Option<String>,
    pub coupling: Option<String>,
    pub site_i: Option<usize>,
    pub site_j: Option<usize>,
    pub t1: Option<f64>,
    pub t2_grid: Option<String>,
    pub lambda_l: Vec<String>,
    pub ns: Option<usize>,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
    pub method: Option<String>,
    pub refined_l: Option<bool>,
    pub hamiltonian_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

pub const DEFAULT_L: &str = "4";
pub const DEFAULT_GRID: &str = "0:3:0.05";
pub const DEFAULT_NS: usize = 1000;

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: ExperimentSpec,
    pub sampling: SampleConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn parse_with<T: std::str::FromStr<Err = spincorr::Error>>(s: &str) -> Result<T, CliError> {
    s.parse::<T>().map_err(CliError::from)
}

pub fn resolve(flags: &Overrides) -> Result<Resolved, CliError> {
    let file: FileConfig = match &flags.config {
        Some(path) => read_toml(path)?,
        None => FileConfig::default(),
    };
    let base_dir = flags.config.as_deref().and_then(Path::parent).unwrap_or(Path::new("."));

    let l = match (&flags.l, file.model.l) {
        (Some(s), _) => parse_l(s)?,
        (None, Some(x)) => parse_l(&x.to_string())?,
        (None, None) => parse_l(DEFAULT_L)?,
    };
    let state: InitialState = parse_with(flags.state.as_deref().or(file.model.state.as_deref()).unwrap_or("uniform"))?;
    let coupling: CouplingKind =
        parse_with(flags.coupling.as_deref().or(file.protocol.coupling.as_deref()).unwrap_or("heisenberg"))?;
    let method: ExtractionMethod =
        parse_with(flags.method.as_deref().or(file.protocol.method.as_deref()).unwrap_or("two-point"))?;
    let t2_grid: Grid =
        parse_with(flags.t2_grid.as_deref().or(file.protocol.t2_grid.as_deref()).unwrap_or(DEFAULT_GRID))?;
    let lambda_l = if !flags.lambda_l.is_empty() {
        flags.lambda_l.iter().map(|s| parse_lambda(s)).collect::<Result<Vec<_>, _>>()?
    } else if let Some(values) = &file.protocol.lambda_l {
        values.iter().map(LambdaValue::resolve).collect::<Result<Vec<_>, _>>()?
    } else {
        vec![std::f64::consts::FRAC_PI_2, std::f64::consts::PI]
    };
    let hamiltonian = match (&flags.hamiltonian_file, &file.model.hamiltonian_file) {
        (Some(path), _) => load_hamiltonian(path)?,
        (None, Some(path)) => load_hamiltonian(&base_dir.join(path))?,
        (None, None) => HamiltonianKind::HeisenbergTwoSpin,
    };
    let spec = ExperimentSpec {
        l,
        state,
        coupling,
        hamiltonian,
        site_i: flags.site_i.or(file.protocol.site_i).unwrap_or(0),
        site_j: flags.site_j.or(file.protocol.site_j).unwrap_or(1),
        t1: flags.t1.or(file.protocol.t1).unwrap_or(0.0),
        t2_grid,
        lambda_l,
        method,
        refined_l: flags.refined_l.or(file.protocol.refined_l).unwrap_or(true),
    };
    spec.validate()?;

    let sampling = SampleConfig {
        n_s: flags.ns.or(file.sampling.ns).unwrap_or(DEFAULT_NS),
        n_repeats: flags.repeats.or(file.sampling.repeats).unwrap_or(DEFAULT_REPEATS),
        master_seed: flags.seed.or(file.sampling.seed).unwrap_or(0),
    };
    let format: Format = flags.format.as_deref().or(file.output.format.as_deref()).unwrap_or("csv").parse()?;
    let out = flags.out.clone().or(file.output.out.map(|p| base_dir.join(p)));
    Ok(Resolved { spec, sampling, out, format })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lambda_expressions() {
        assert_eq!(parse_lambda("pi").unwrap(), PI);
        assert_eq!(parse_lambda("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_lambda(" 3*pi/4 ").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_lambda("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_lambda("0.25").unwrap(), 0.25);
        for bad in ["pie", "pi/0", "x*pi", "", "pi/"] {
            assert!(parse_lambda(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn spin_values() {
        assert_eq!(parse_l("8").unwrap(), HalfInt::from_int(8));
        assert_eq!(parse_l("8.5").unwrap(), HalfInt::from_twice(17));
        assert_eq!(parse_l("17/2").unwrap(), HalfInt::from_twice(17));
        for bad in ["0", "-1", "0.3", "17/3", "x"] {
            assert!(parse_l(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn defaults_resolve() {
        let r = resolve(&Overrides::default()).unwrap();
        assert_eq!(r.spec.l, HalfInt::from_int(4));
        assert_eq!(r.spec.t2_grid.len(), 61);
        assert!(r.spec.refined_l);
        assert_eq!(r.sampling.n_repeats, 100);
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("spincorr-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(
            &path,
            "[model]\nl = 2\nstate = \"ramp\"\n[protocol]\nlambda_l = [\"pi/2\", 3.141592653589793]\nrefined_l = false\n[sampling]\nseed = 9\n",
        )
        .unwrap();
        let flags = Overrides { config: Some(path.clone()), state: Some("maxmag".into()), ..Default::default() };
        let r = resolve(&flags).unwrap();
        assert_eq!(r.spec.l, HalfInt::from_int(2));
        assert_eq!(r.spec.state, InitialState::MaxMag);
        assert_eq!(r.spec.lambda_l, vec![PI / 2.0, PI]);
        assert!(!r.spec.refined_l);
        assert_eq!(r.sampling.master_seed, 9);

        std::fs::write(&path, "[model]\nspin = 2\n").unwrap();
        assert!(matches!(resolve(&flags), Err(CliError::Config(_))));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
