//! Benchmark harness: instance and run replicates over a (p, sigma) grid, and
//! report files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use distgeom::instance::{generate_instance, GenParams};
use distgeom::{reconstruct, Instance, PipelineConfig};

use crate::spec::ExperimentSpec;
use crate::CliError;

/// Seed of instance replicate `i`.
pub fn instance_seed(master: u64, i: usize) -> u64 {
    master.wrapping_add(1000 * i as u64)
}

/// Seed of run `j` on instance replicate `i`.
pub fn run_seed(master: u64, i: usize, j: usize) -> u64 {
    instance_seed(master, i).wrapping_add(j as u64)
}

/// One (instance, run) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub p: f64,
    pub sigma: f64,
    pub instance: usize,
    pub run: usize,
    pub instance_seed: u64,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "rmsd_A")]
    pub rmsd_a: Option<f64>,
    pub ldme: Option<f64>,
    pub violations: Option<usize>,
    pub status: String,
    #[serde(skip)]
    pub time_s: f64,
}

impl Row {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Mean and standard deviation over the successful runs of one instance replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub p: f64,
    pub sigma: f64,
    pub instance: usize,
    pub runs_ok: usize,
    pub rmsd_mean: Option<f64>,
    pub rmsd_sd: Option<f64>,
    pub ldme_mean: Option<f64>,
    pub ldme_sd: Option<f64>,
    pub violations_mean: Option<f64>,
}

/// One (p, sigma) cell of the plot grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotCell {
    pub p: f64,
    pub sigma: f64,
    pub runs_ok: usize,
    pub rmsd_mean: Option<f64>,
    pub rmsd_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub p: f64,
    pub sigma: f64,
    pub instance: usize,
    pub run: usize,
    pub seed: u64,
    pub time_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
}

/// Sample mean and (n - 1) standard deviation; the deviation of a single value is 0.
pub fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(sd))
}

impl Report {
    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut keys: Vec<(f64, f64, usize)> = Vec::new();
        for r in &self.rows {
            let k = (r.p, r.sigma, r.instance);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .map(|(p, sigma, instance)| {
                let ok: Vec<&Row> =
                    self.rows.iter().filter(|r| r.p == p && r.sigma == sigma && r.instance == instance && r.ok()).collect();
                let rmsd: Vec<f64> = ok.iter().filter_map(|r| r.rmsd_a).collect();
                let ldme: Vec<f64> = ok.iter().filter_map(|r| r.ldme).collect();
                let viol: Vec<f64> = ok.iter().filter_map(|r| r.violations.map(|v| v as f64)).collect();
                let (rmsd_mean, rmsd_sd) = mean_sd(&rmsd);
                let (ldme_mean, ldme_sd) = mean_sd(&ldme);
                Aggregate {
                    p,
                    sigma,
                    instance,
                    runs_ok: ok.len(),
                    rmsd_mean,
                    rmsd_sd,
                    ldme_mean,
                    ldme_sd,
                    violations_mean: mean_sd(&viol).0,
                }
            })
            .collect()
    }

    pub fn plot_cells(&self) -> Vec<PlotCell> {
        let mut keys: Vec<(f64, f64)> = Vec::new();
        for r in &self.rows {
            if !keys.contains(&(r.p, r.sigma)) {
                keys.push((r.p, r.sigma));
            }
        }
        keys.into_iter()
            .map(|(p, sigma)| {
                let ok: Vec<&Row> = self.rows.iter().filter(|r| r.p == p && r.sigma == sigma && r.ok()).collect();
                let rmsd: Vec<f64> = ok.iter().filter_map(|r| r.rmsd_a).collect();
                let (rmsd_mean, rmsd_sd) = mean_sd(&rmsd);
                PlotCell { p, sigma, runs_ok: ok.len(), rmsd_mean, rmsd_sd }
            })
            .collect()
    }

    pub fn timings(&self) -> Vec<Timing> {
        self.rows
            .iter()
            .map(|r| Timing { p: r.p, sigma: r.sigma, instance: r.instance, run: r.run, seed: r.seed, time_s: r.time_s })
            .collect()
    }

    /// Mean RMSD over every successful row.
    pub fn mean_rmsd(&self) -> Option<f64> {
        let v: Vec<f64> = self.rows.iter().filter(|r| r.ok()).filter_map(|r| r.rmsd_a).collect();
        mean_sd(&v).0
    }
}

struct Job<'a> {
    p: f64,
    sigma: f64,
    instance: usize,
    run: usize,
    inst: Result<&'a Instance<f64>, &'a str>,
}

/// Runs every (p, sigma, instance, run) combination of `spec`.
///
/// Instance replicate `i` is generated with seed `seed + 1000 i`, and run `j` on it
/// uses seed `seed + 1000 i + j`. Rows come out in grid order whatever the thread
/// count; a failing row records its error and does not stop the batch. Only the
/// reconstruction itself is timed.
pub fn run_experiment(spec: &ExperimentSpec, base: &PipelineConfig<f64>) -> Result<Report, CliError> {
    spec.validate()?;
    let atoms = spec.source.load(spec.seed)?;
    let mut cfg = base.clone();
    spec.solver.apply(&mut cfg);

    let mut instances: Vec<(f64, f64, usize, Result<Instance<f64>, String>)> = Vec::new();
    for &p in &spec.p {
        for &sigma in &spec.sigma {
            for i in 0..spec.instances {
                let params = GenParams {
                    recipe: spec.recipe,
                    p,
                    sigma,
                    cutoff: spec.cutoff,
                    seed: instance_seed(spec.seed, i),
                };
                let inst = generate_instance(&atoms, &params).map_err(|e| e.to_string());
                instances.push((p, sigma, i, inst));
            }
        }
    }
    let jobs: Vec<Job> = instances
        .iter()
        .flat_map(|(p, sigma, i, inst)| {
            (0..spec.runs).map(move |run| Job {
                p: *p,
                sigma: *sigma,
                instance: *i,
                run,
                inst: inst.as_ref().map_err(String::as_str),
            })
        })
        .collect();

    let rows = jobs
        .par_iter()
        .map(|job| {
            let seed = run_seed(spec.seed, job.instance, job.run);
            let mut row = Row {
                p: job.p,
                sigma: job.sigma,
                instance: job.instance,
                run: job.run,
                instance_seed: instance_seed(spec.seed, job.instance),
                seed,
                n: atoms.len(),
                m: 0,
                rmsd_a: None,
                ldme: None,
                violations: None,
                status: String::new(),
                time_s: 0.0,
            };
            let inst = match job.inst {
                Ok(inst) => inst,
                Err(msg) => {
                    row.status = format!("error: {msg}");
                    return row;
                }
            };
            row.m = inst.m();
            let run_cfg = cfg.clone().with_seed(seed).with_parallel(false);
            let start = Instant::now();
            let result = reconstruct(inst, &run_cfg);
            row.time_s = start.elapsed().as_secs_f64();
            match result {
                Ok(r) => {
                    row.rmsd_a = r.rmsd;
                    row.ldme = Some(r.ldme);
                    row.violations = Some(r.violations.count);
                    row.status = "ok".into();
                }
                Err(e) => {
                    log::warn!("p={} sigma={} instance={} run={}: {e}", job.p, job.sigma, job.instance, job.run);
                    row.status = format!("error: {e}");
                }
            }
            row
        })
        .collect();
    Ok(Report { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Tsv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
            Format::Json => "json",
        }
    }
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub rows: PathBuf,
    pub aggregate: PathBuf,
    pub plot: PathBuf,
    pub timing: PathBuf,
}

fn write_table<S: Serialize>(path: &Path, items: &[S], headers: &[&str], format: Format) -> Result<(), CliError> {
    let io_err = |e: &dyn std::fmt::Display| CliError::input(format!("cannot write {}: {e}", path.display()));
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(items).map_err(|e| io_err(&e))?;
            fs::write(path, text + "\n").map_err(|e| io_err(&e))
        }
        Format::Csv | Format::Tsv => {
            let delim = if format == Format::Csv { b',' } else { b'\t' };
            let mut w = csv::WriterBuilder::new().delimiter(delim).has_headers(false).from_path(path).map_err(|e| io_err(&e))?;
            w.write_record(headers).map_err(|e| io_err(&e))?;
            for item in items {
                w.serialize(item).map_err(|e| io_err(&e))?;
            }
            w.flush().map_err(|e| io_err(&e))
        }
    }
}

pub const ROW_HEADERS: [&str; 12] =
    ["p", "sigma", "instance", "run", "instance_seed", "seed", "n", "m", "rmsd_A", "ldme", "violations", "status"];
pub const AGGREGATE_HEADERS: [&str; 9] =
    ["p", "sigma", "instance", "runs_ok", "rmsd_mean", "rmsd_sd", "ldme_mean", "ldme_sd", "violations_mean"];
pub const PLOT_HEADERS: [&str; 5] = ["p", "sigma", "runs_ok", "rmsd_mean", "rmsd_sd"];
pub const TIMING_HEADERS: [&str; 6] = ["p", "sigma", "instance", "run", "seed", "time_s"];

/// Writes `rows`, `aggregate`, `plot` and `timing` files into `dir`. Wall times
/// live only in the timing file so that the other three are reproducible.
pub fn emit_report(report: &Report, dir: &Path, format: Format) -> Result<ReportFiles, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    let ext = format.extension();
    let files = ReportFiles {
        rows: dir.join(format!("rows.{ext}")),
        aggregate: dir.join(format!("aggregate.{ext}")),
        plot: dir.join(format!("plot.{ext}")),
        timing: dir.join(format!("timing.{ext}")),
    };
    write_table(&files.rows, &report.rows, &ROW_HEADERS, format)?;
    write_table(&files.aggregate, &report.aggregates(), &AGGREGATE_HEADERS, format)?;
    write_table(&files.plot, &report.plot_cells(), &PLOT_HEADERS, format)?;
    write_table(&files.timing, &report.timings(), &TIMING_HEADERS, format)?;
    Ok(files)
}

/// Reads a CSV/TSV aggregate file written by [`emit_report`].
pub fn read_aggregates(path: &Path, format: Format) -> Result<Vec<Aggregate>, CliError> {
    let err = |e: &dyn std::fmt::Display| CliError::input(format!("{}: {e}", path.display()));
    match format {
        Format::Json => {
            let text = fs::read_to_string(path).map_err(|e| err(&e))?;
            serde_json::from_str(&text).map_err(|e| err(&e))
        }
        Format::Csv | Format::Tsv => {
            let delim = if format == Format::Csv { b',' } else { b'\t' };
            let mut r = csv::ReaderBuilder::new().delimiter(delim).from_path(path).map_err(|e| err(&e))?;
            r.deserialize().map(|rec| rec.map_err(|e| err(&e))).collect()
        }
    }
}
