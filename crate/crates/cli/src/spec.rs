//! Experiment specification: a plain `key = value` text file.
//!
//! ```text
//! # comments start with '#'
//! source = chain:400          # chain:<n>[:<seed>], cloud:<n>:<side>[:<seed>] or a PDB path
//! recipe = normal             # normal | bonds | weighted
//! p = 0.02, 0.12              # one or more values
//! sigma = 0.01
//! instances = 3
//! runs = 3
//! seed = 0
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use distgeom::instance::{parse_pdb_atoms, synthetic_chain, uniform_cloud, AtomSet, Recipe, DEFAULT_CUTOFF};
use distgeom::layout::InitLayout;
use distgeom::PipelineConfig;

use crate::CliError;

/// Where the atoms of an experiment come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Chain { n: usize, seed: Option<u64> },
    Cloud { n: usize, side: f64, seed: Option<u64> },
    Pdb(PathBuf),
}

impl FromStr for Source {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<usize>().map_err(|_| CliError::input(format!("bad count '{t}' in source '{s}'")));
        let seed = |t: Option<&&str>| -> Result<Option<u64>, CliError> {
            t.map(|x| x.parse::<u64>().map_err(|_| CliError::input(format!("bad seed '{x}' in source '{s}'"))))
                .transpose()
        };
        match parts[0] {
            "chain" if (2..=3).contains(&parts.len()) => Ok(Source::Chain { n: num(parts[1])?, seed: seed(parts.get(2))? }),
            "cloud" if (3..=4).contains(&parts.len()) => {
                let side =
                    parts[2].parse::<f64>().map_err(|_| CliError::input(format!("bad side '{}' in source '{s}'", parts[2])))?;
                Ok(Source::Cloud { n: num(parts[1])?, side, seed: seed(parts.get(3))? })
            }
            "chain" | "cloud" => Err(CliError::input(format!("malformed synthetic source '{s}'"))),
            _ => Ok(Source::Pdb(PathBuf::from(s))),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Chain { n, seed: Some(s) } => write!(f, "chain:{n}:{s}"),
            Source::Chain { n, seed: None } => write!(f, "chain:{n}"),
            Source::Cloud { n, side, seed: Some(s) } => write!(f, "cloud:{n}:{side}:{s}"),
            Source::Cloud { n, side, seed: None } => write!(f, "cloud:{n}:{side}"),
            Source::Pdb(p) => write!(f, "{}", p.display()),
        }
    }
}

impl Source {
    /// Loads or generates the atoms; synthetic sources without their own seed use
    /// `default_seed`.
    pub fn load(&self, default_seed: u64) -> Result<AtomSet<f64>, CliError> {
        match self {
            Source::Chain { n, seed } => {
                if *n < 4 {
                    return Err(CliError::input("chain needs at least 4 points"));
                }
                Ok(synthetic_chain(*n, seed.unwrap_or(default_seed)))
            }
            Source::Cloud { n, side, seed } => {
                if *n < 4 || !(*side > 0.0) {
                    return Err(CliError::input("cloud needs at least 4 points and a positive side"));
                }
                Ok(uniform_cloud(*n, *side, seed.unwrap_or(default_seed)))
            }
            Source::Pdb(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
                let mut atoms = parse_pdb_atoms::<f64>(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
                for w in &atoms.warnings {
                    log::warn!("{}: {w}", path.display());
                }
                if atoms.is_empty() {
                    return Err(CliError::input(format!("{}: no ATOM records", path.display())));
                }
                atoms.source = path.display().to_string();
                Ok(atoms)
            }
        }
    }
}

/// Solver settings that a spec file or the command line may override.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverOverrides {
    pub alpha_start: Option<f64>,
    pub alpha_end: Option<f64>,
    pub alpha_rate: Option<f64>,
    pub pivots: Option<usize>,
    pub theta: Option<f64>,
    pub q: Option<f64>,
    pub layout: Option<InitLayout>,
    pub refine: Option<bool>,
}

impl SolverOverrides {
    /// Values from `other` win where set.
    pub fn merged(&self, other: &SolverOverrides) -> SolverOverrides {
        SolverOverrides {
            alpha_start: other.alpha_start.or(self.alpha_start),
            alpha_end: other.alpha_end.or(self.alpha_end),
            alpha_rate: other.alpha_rate.or(self.alpha_rate),
            pivots: other.pivots.or(self.pivots),
            theta: other.theta.or(self.theta),
            q: other.q.or(self.q),
            layout: other.layout.or(self.layout),
            refine: other.refine.or(self.refine),
        }
    }

    pub fn apply(&self, cfg: &mut PipelineConfig<f64>) {
        if let Some(v) = self.alpha_start {
            cfg.solver.alpha_start = v;
        }
        if let Some(v) = self.alpha_end {
            cfg.solver.alpha_end = v;
        }
        if let Some(v) = self.alpha_rate {
            cfg.solver.alpha_rate = v;
        }
        if let Some(v) = self.theta {
            cfg.solver.theta = v;
        }
        if self.q.is_some() {
            cfg.solver.q = self.q;
        }
        if self.pivots.is_some() {
            cfg.pivots = self.pivots;
        }
        if let Some(v) = self.layout {
            cfg.layout = v;
        }
        if let Some(v) = self.refine {
            cfg.run_refine = v;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: Source,
    pub recipe: Recipe,
    pub p: Vec<f64>,
    pub sigma: Vec<f64>,
    pub instances: usize,
    pub runs: usize,
    pub seed: u64,
    pub cutoff: f64,
    pub solver: SolverOverrides,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            source: Source::Chain { n: 400, seed: None },
            recipe: Recipe::Normal,
            p: vec![0.5],
            sigma: vec![0.1],
            instances: 3,
            runs: 3,
            seed: 0,
            cutoff: DEFAULT_CUTOFF,
            solver: SolverOverrides::default(),
            out: None,
        }
    }
}

fn parse_list(key: &str, value: &str, line: usize) -> Result<Vec<f64>, CliError> {
    value
        .split([',', ' ', '\t'])
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| CliError::input(format!("line {line}: bad value '{t}' for {key}"))))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError> {
    value.parse::<T>().map_err(|_| CliError::input(format!("line {line}: bad value '{value}' for {key}")))
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut spec = ExperimentSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::input(format!("line {line}: expected 'key = value'")))?;
            let s = &mut spec.solver;
            match key {
                "source" => spec.source = value.parse()?,
                "recipe" => spec.recipe = value.parse().map_err(|e| CliError::input(format!("line {line}: {e}")))?,
                "p" => spec.p = parse_list(key, value, line)?,
                "sigma" => spec.sigma = parse_list(key, value, line)?,
                "instances" => spec.instances = parse_one(key, value, line)?,
                "runs" => spec.runs = parse_one(key, value, line)?,
                "seed" => spec.seed = parse_one(key, value, line)?,
                "cutoff" => spec.cutoff = parse_one(key, value, line)?,
                "out" => spec.out = Some(PathBuf::from(value)),
                "alpha_start" => s.alpha_start = Some(parse_one(key, value, line)?),
                "alpha_end" => s.alpha_end = Some(parse_one(key, value, line)?),
                "alpha_rate" => s.alpha_rate = Some(parse_one(key, value, line)?),
                "pivots" => s.pivots = Some(parse_one(key, value, line)?),
                "theta" => s.theta = Some(parse_one(key, value, line)?),
                "q" => s.q = Some(parse_one(key, value, line)?),
                "layout" => s.layout = Some(value.parse().map_err(|e| CliError::input(format!("line {line}: {e}")))?),
                "refine" => s.refine = Some(parse_one(key, value, line)?),
                _ => return Err(CliError::input(format!("line {line}: unknown key '{key}'"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.instances == 0 || self.runs == 0 {
            return Err(CliError::input("instances and runs must be at least 1"));
        }
        if self.p.is_empty() || self.sigma.is_empty() {
            return Err(CliError::input("p and sigma need at least one value"));
        }
        let p_min = if self.recipe == Recipe::Bonds { 0.0 } else { f64::MIN_POSITIVE };
        if let Some(p) = self.p.iter().find(|p| !(**p >= p_min && **p <= 1.0)) {
            return Err(CliError::input(format!("p = {p} outside (0, 1]")));
        }
        if let Some(s) = self.sigma.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(CliError::input(format!("sigma = {s} must be finite and non-negative")));
        }
        if !(self.cutoff > 0.0) {
            return Err(CliError::input("cutoff must be positive"));
        }
        Ok(())
    }
}
