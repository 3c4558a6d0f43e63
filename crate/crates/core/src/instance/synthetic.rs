use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geom::{self, Vec3};
use crate::scalar::Real;

use super::pdb::AtomSet;

/// Distance between consecutive chain points, in Å.
pub const CHAIN_BOND: f64 = 1.5;
/// Minimum distance between non-consecutive chain points, in Å.
pub const CHAIN_MIN_SEPARATION: f64 = 2.2;
/// Target number density of the folded chain, in points per Å^3.
pub const CHAIN_DENSITY: f64 = 0.05;

const ATTEMPTS: usize = 200;
const BACKTRACK_AFTER: usize = 5;

fn random_unit<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let r = geom::norm(v);
        if r > 1e-9 {
            return geom::scale(v, 1.0 / r);
        }
    }
}

/// A protein-like test structure: a self-avoiding random walk with 1.5 Å steps,
/// confined to a ball sized for a density of 0.05 points per Å^3. Points that are
/// not consecutive stay at least 2.2 Å apart. When the walk gets trapped the ball
/// grows by 2%, and after five such failures in a row the last point is removed.
pub fn synthetic_chain<T: Real>(n: usize, seed: u64) -> AtomSet<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut radius = (3.0 * n as f64 / (4.0 * std::f64::consts::PI * CHAIN_DENSITY)).cbrt();
    let mut pts: Vec<[f64; 3]> = Vec::with_capacity(n);
    if n > 0 {
        pts.push([0.0; 3]);
    }
    let min_sq = CHAIN_MIN_SEPARATION * CHAIN_MIN_SEPARATION;
    let mut stuck = 0;
    while pts.len() < n {
        let last = *pts.last().unwrap();
        let mut placed = false;
        for _ in 0..ATTEMPTS {
            let cand = geom::add(last, geom::scale(random_unit(&mut rng), CHAIN_BOND));
            if geom::norm(cand) > radius {
                continue;
            }
            let clear = pts[..pts.len() - 1].iter().all(|p| geom::norm_sq(geom::sub(*p, cand)) >= min_sq);
            if clear {
                pts.push(cand);
                placed = true;
                break;
            }
        }
        if placed {
            stuck = 0;
        } else {
            radius *= 1.02;
            stuck += 1;
            if stuck >= BACKTRACK_AFTER && pts.len() > 1 {
                pts.pop();
                stuck = 0;
            }
        }
    }
    let points = pts.into_iter().map(|p| p.map(T::lit)).collect();
    AtomSet::from_points(points, "C", format!("chain:{n}:{seed}"))
}

/// `n` points uniform in `[0, side]^3`.
pub fn uniform_cloud<T: Real>(n: usize, side: f64, seed: u64) -> AtomSet<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec3<T>> =
        (0..n).map(|_| [0; 3].map(|_| T::lit(rng.random::<f64>() * side))).collect();
    AtomSet::from_points(points, "C", format!("cloud:{n}:{side}:{seed}"))
}
