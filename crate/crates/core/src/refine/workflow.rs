use crate::error::{Error, Result};
use crate::metrics::ldme;
use crate::model::{Embedding, Instance};
use crate::scalar::Real;

use super::anneal::{simulated_annealing, SAConfig, SAReport};
use super::simple::{simple_local_opt, SimpleOptReport};

#[derive(Debug, Clone, PartialEq)]
pub struct RefineConfig<T> {
    pub sa: SAConfig<T>,
    pub run_sa: bool,
    pub run_simple: bool,
}

impl<T: Real> Default for RefineConfig<T> {
    fn default() -> Self {
        RefineConfig { sa: SAConfig::default(), run_sa: true, run_simple: true }
    }
}

/// Which candidate [`refine_workflow`] returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RefineStage {
    #[default]
    Input,
    Annealed,
    Simple,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RefineReport {
    pub ldme_input: f64,
    pub ldme_annealed: Option<f64>,
    pub annealed_discarded: bool,
    pub ldme_final: f64,
    pub chosen: RefineStage,
    pub sa: Option<SAReport>,
    pub simple: Option<SimpleOptReport>,
}

/// Annealing followed by greedy length adjustment.
///
/// The annealed embedding is dropped if its LDME is worse than the input's; the
/// greedy pass then runs on whichever survived. The result is the candidate with
/// the lowest LDME among input, survivor and greedy output (earlier wins ties), so
/// the LDME never increases.
pub fn refine_workflow<T: Real>(
    inst: &Instance<T>,
    emb: &Embedding<T>,
    cfg: &RefineConfig<T>,
) -> Result<(Embedding<T>, RefineReport)> {
    if emb.len() != inst.n() {
        return Err(Error::SizeMismatch { expected: inst.n(), actual: emb.len() });
    }
    if inst.m() == 0 {
        return Ok((emb.clone(), RefineReport::default()));
    }
    let input_ldme = ldme(emb, inst)?;
    let mut report = RefineReport { ldme_input: input_ldme.as_f64(), ..RefineReport::default() };
    let mut best = (emb.clone(), input_ldme, RefineStage::Input);

    let mut survivor = emb.clone();
    if cfg.run_sa {
        let (annealed, sa_report) = simulated_annealing(inst, emb, &cfg.sa)?;
        let l = ldme(&annealed, inst)?;
        report.ldme_annealed = Some(l.as_f64());
        report.sa = Some(sa_report);
        if l > input_ldme || !l.is_finite() {
            report.annealed_discarded = true;
        } else {
            survivor = annealed.clone();
            if l < best.1 {
                best = (annealed, l, RefineStage::Annealed);
            }
        }
    }
    if cfg.run_simple {
        let (out, simple_report) = simple_local_opt(inst, &survivor)?;
        let l = ldme(&out, inst)?;
        report.simple = Some(simple_report);
        if l < best.1 {
            best = (out, l, RefineStage::Simple);
        }
    }
    report.ldme_final = best.1.as_f64();
    report.chosen = best.2;
    Ok((best.0, report))
}
