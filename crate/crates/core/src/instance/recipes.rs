use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{confidence_weight, DistanceConstraint, Instance, InstanceMeta};
use crate::scalar::Real;

use super::edges::{contact_edges, infer_bonds, DEFAULT_CUTOFF};
use super::pdb::AtomSet;

/// Instance construction recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Recipe {
    /// A random fraction of all pairs below the cutoff, with noisy intervals.
    #[default]
    Normal,
    /// Every covalent bond exactly, plus a random fraction of the contacts with noise.
    Bonds,
    /// Exact bonds plus contacts split into three confidence classes.
    Weighted,
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Recipe::Normal => "normal",
            Recipe::Bonds => "bonds",
            Recipe::Weighted => "weighted",
        })
    }
}

impl FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Recipe::Normal),
            "bonds" => Ok(Recipe::Bonds),
            "weighted" => Ok(Recipe::Weighted),
            _ => Err(Error::validation(format!("unknown recipe '{s}' (expected normal, bonds or weighted)"))),
        }
    }
}

/// Parameters of [`generate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub recipe: Recipe,
    /// Inclusion probability of each candidate pair.
    pub p: f64,
    /// Relative noise level (standard deviation of the multiplicative normal draw).
    pub sigma: f64,
    pub cutoff: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn new(recipe: Recipe, p: f64, sigma: f64, seed: u64) -> Self {
        GenParams { recipe, p, sigma, cutoff: DEFAULT_CUTOFF, seed }
    }
}

/// Interval `[max(0, d - |d z1 sigma|), d + |d z2 sigma|]` for standard normal draws `z1`, `z2`.
fn noisy_interval<T: Real, R: Rng>(d: f64, sigma: f64, rng: &mut R) -> DistanceConstraint<T> {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let lo = (d * z1 * sigma).abs();
    let hi = (d * z2 * sigma).abs();
    DistanceConstraint::interval(T::lit((d - lo).max(0.0)), T::lit(d + hi))
}

fn sample<R: Rng>(pairs: &[(usize, usize)], p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    pairs.iter().copied().filter(|_| rng.random::<f64>() < p).collect()
}

/// Builds an instance from `atoms` with the given recipe. The atoms' coordinates
/// become the reference embedding.
pub fn generate_instance<T: Real>(atoms: &AtomSet<T>, params: &GenParams) -> Result<Instance<T>> {
    let GenParams { recipe, p, sigma, cutoff, seed } = *params;
    let p_ok = match recipe {
        Recipe::Bonds => (0.0..=1.0).contains(&p),
        _ => p > 0.0 && p <= 1.0,
    };
    if !p_ok {
        return Err(Error::validation(format!("sampling fraction p = {p} out of range")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::validation("sigma must be finite and non-negative"));
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::validation("cutoff must be positive"));
    }
    if atoms.is_empty() {
        return Err(Error::validation("no atoms"));
    }
    let reference = atoms.embedding();
    let dist = |(a, b): (usize, usize)| reference.distance(a, b).as_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bonds = infer_bonds(atoms);
    let contacts = contact_edges(atoms, cutoff, &bonds);

    let mut edges: Vec<(usize, usize, DistanceConstraint<T>)> = Vec::new();
    match recipe {
        Recipe::Normal => {
            let mut pool: Vec<(usize, usize)> = bonds.iter().chain(&contacts).copied().filter(|&e| dist(e) < cutoff).collect();
            pool.sort_unstable();
            for e in sample(&pool, p, &mut rng) {
                edges.push((e.0, e.1, noisy_interval(dist(e), sigma, &mut rng)));
            }
        }
        Recipe::Bonds => {
            for &e in &bonds {
                edges.push((e.0, e.1, DistanceConstraint::exact(T::lit(dist(e)))));
            }
            for e in sample(&contacts, p, &mut rng) {
                edges.push((e.0, e.1, noisy_interval(dist(e), sigma, &mut rng)));
            }
        }
        Recipe::Weighted => {
            let w1 = confidence_weight(T::one())?;
            for &e in &bonds {
                let c = DistanceConstraint::exact(T::lit(dist(e))).with_confidence(T::one()).with_weight(w1);
                edges.push((e.0, e.1, c));
            }
            let mut picked = sample(&contacts, p, &mut rng);
            if picked.len() < 4 {
                return Err(Error::validation(format!(
                    "weighted recipe needs at least 4 sampled contacts, got {}",
                    picked.len()
                )));
            }
            picked.shuffle(&mut rng);
            let k = picked.len();
            let quarter = (k as f64 / 4.0).round() as usize;
            for (i, e) in picked.into_iter().enumerate() {
                let d = dist(e);
                let (c, conf) = if i < quarter {
                    let c = DistanceConstraint::interval(T::lit((d - 0.1).max(0.0)), T::lit(d + 0.1));
                    (c, 1.0)
                } else if i < k - quarter {
                    (noisy_interval(d, 0.1, &mut rng), 0.75)
                } else {
                    (noisy_interval(d, 0.5, &mut rng), 0.5)
                };
                let conf = T::lit(conf);
                edges.push((e.0, e.1, c.with_confidence(conf).with_weight(confidence_weight(conf)?)));
            }
        }
    }
    if edges.is_empty() {
        return Err(Error::validation("instance has no edges; increase p"));
    }

    let mut meta = InstanceMeta {
        source: atoms.source.clone(),
        seed: Some(seed),
        elements: atoms.elements(),
        ..InstanceMeta::default()
    };
    meta.params.insert("recipe".into(), recipe.to_string());
    meta.params.insert("p".into(), p.to_string());
    meta.params.insert("sigma".into(), sigma.to_string());
    meta.params.insert("cutoff".into(), cutoff.to_string());
    Instance::from_edges(atoms.len(), edges, Some(reference), meta)
}

pub fn gen_normal_instance<T: Real>(atoms: &AtomSet<T>, p: f64, sigma: f64, seed: u64) -> Result<Instance<T>> {
    generate_instance(atoms, &GenParams::new(Recipe::Normal, p, sigma, seed))
}

pub fn gen_bonds_instance<T: Real>(atoms: &AtomSet<T>, p: f64, sigma: f64, seed: u64) -> Result<Instance<T>> {
    generate_instance(atoms, &GenParams::new(Recipe::Bonds, p, sigma, seed))
}

pub fn gen_weighted_instance<T: Real>(atoms: &AtomSet<T>, p: f64, seed: u64) -> Result<Instance<T>> {
    generate_instance(atoms, &GenParams::new(Recipe::Weighted, p, 0.0, seed))
}

/// Every pair of `atoms` as an exact distance, with the atoms as reference.
pub fn complete_exact_instance<T: Real>(atoms: &AtomSet<T>) -> Result<Instance<T>> {
    let reference = atoms.embedding();
    let n = atoms.len();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            edges.push((a, b, DistanceConstraint::exact(reference.distance(a, b))));
        }
    }
    let meta = InstanceMeta {
        source: atoms.source.clone(),
        elements: atoms.elements(),
        params: [("recipe".to_string(), "complete".to_string())].into_iter().collect(),
        ..InstanceMeta::default()
    };
    Instance::from_edges(n, edges, Some(reference), meta)
}
