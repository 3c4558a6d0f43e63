use std::collections::HashMap;

use crate::geom::{self, Vec3};
use crate::scalar::Real;

use super::pdb::AtomSet;

/// Contact cutoff used by the instance recipes, in Å.
pub const DEFAULT_CUTOFF: f64 = 5.0;

/// Largest bond threshold in [`bond_threshold`].
const MAX_BOND: f64 = 2.0;

/// Covalent-bond distance threshold for an element pair, in Å.
pub fn bond_threshold(a: &str, b: &str) -> f64 {
    let is = |e: &str, s: &str| e.eq_ignore_ascii_case(s);
    if is(a, "H") || is(b, "H") {
        1.2
    } else if is(a, "S") || is(b, "S") {
        2.0
    } else if ["C", "N", "O"].iter().any(|e| is(a, e)) && ["C", "N", "O"].iter().any(|e| is(b, e)) {
        1.8
    } else {
        1.9
    }
}

/// Index pairs `(i, j)`, `i < j`, accepted by `keep(i, j, distance)`. Candidates
/// come from a uniform grid of cell size `reach`, so `keep` must reject every pair
/// farther apart than `reach`. Output is sorted.
pub(crate) fn grid_pairs<T: Real>(points: &[Vec3<T>], reach: f64, mut keep: impl FnMut(usize, usize, f64) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if points.len() < 2 || !(reach > 0.0) {
        return out;
    }
    let key = |p: &Vec3<T>| -> [i64; 3] { [0, 1, 2].map(|k| (p[k].as_f64() / reach).floor() as i64) };
    let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        cells.entry(key(p)).or_default().push(i);
    }
    for (i, p) in points.iter().enumerate() {
        let k = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(members) = cells.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) else { continue };
                    for &j in members {
                        if j <= i {
                            continue;
                        }
                        let d = geom::dist(*p, points[j]).as_f64();
                        if keep(i, j, d) {
                            out.push((i, j));
                        }
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Pairs within their element-pair bond threshold (inclusive).
pub fn infer_bonds<T: Real>(atoms: &AtomSet<T>) -> Vec<(usize, usize)> {
    let pts = atoms.positions();
    grid_pairs(&pts, MAX_BOND, |i, j, d| d <= bond_threshold(&atoms.atoms[i].element, &atoms.atoms[j].element))
}

/// Pairs closer than `cutoff` (strictly) that are not in `bonds`.
pub fn contact_edges<T: Real>(atoms: &AtomSet<T>, cutoff: f64, bonds: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let pts = atoms.positions();
    let mut bonded: Vec<(usize, usize)> = bonds.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    bonded.sort_unstable();
    grid_pairs(&pts, cutoff, |i, j, d| d < cutoff && bonded.binary_search(&(i, j)).is_err())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn carbons(points: Vec<Vec3<f64>>) -> AtomSet<f64> {
        AtomSet::from_points(points, "C", "test")
    }

    #[test]
    fn thresholds() {
        assert_eq!(bond_threshold("C", "H"), 1.2);
        assert_eq!(bond_threshold("H", "S"), 1.2);
        assert_eq!(bond_threshold("C", "S"), 2.0);
        assert_eq!(bond_threshold("N", "O"), 1.8);
        assert_eq!(bond_threshold("C", "Fe"), 1.9);
    }

    #[test]
    fn carbon_bonds() {
        let near = carbons(vec![[0.0, 0.0, 0.0], [1.5, 0.0, 0.0]]);
        assert_eq!(infer_bonds(&near), vec![(0, 1)]);
        let far = carbons(vec![[0.0, 0.0, 0.0], [2.5, 0.0, 0.0]]);
        assert!(infer_bonds(&far).is_empty());
    }

    #[test]
    fn collinear_contacts() {
        let set = carbons(vec![[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [6.0, 0.0, 0.0]]);
        assert_eq!(contact_edges(&set, 5.0, &[]), vec![(0, 1), (1, 2)]);
        assert!(contact_edges(&set, 0.1, &[]).is_empty());
        assert_eq!(contact_edges(&set, 5.0, &[(1, 0)]), vec![(1, 2)]);
    }
}
