//! Independent reference computations checked against the library.

mod common;

use common::*;
use distgeom::geom::{self, Vec3};
use distgeom::instance::{contact_edges, generate_instance, synthetic_chain, uniform_cloud, AtomSet, GenParams, Recipe};
use distgeom::layout::layout_pivot_mds;
use distgeom::linalg::{assemble_laplacian, entropy_forces, solve_cg, Octree};
use distgeom::refine::{simulated_annealing, SAConfig};
use distgeom::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

#[test]
fn cg_matches_dense_pseudo_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.random_range(2..=50);
        let edges = random_connected_edges(&mut rng, n, n);
        let g = build_graph(n, &edges).unwrap();
        let w: Vec<f64> = (0..g.m()).map(|_| rng.random_range(0.1..3.0)).collect();
        let mut b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let sys = assemble_laplacian(&g, &w).unwrap();
        let x = solve_cg(&sys, &b, 1e-12, 10 * n, &[]).unwrap().x;

        // L + J/n is nonsingular on a connected graph and its inverse applied to
        // a centered vector is the pseudo-inverse solution.
        let mut a = vec![vec![1.0 / n as f64; n]; n];
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            a[u][u] += w[e];
            a[v][v] += w[e];
            a[u][v] -= w[e];
            a[v][u] -= w[e];
        }
        center(&mut b);
        let mut y = gauss_solve(a, b);
        center(&mut y);
        let mut xc = x.clone();
        center(&mut xc);
        for (p, q) in xc.iter().zip(&y) {
            assert!((p - q).abs() < 1e-6, "n={n}: {p} vs {q}");
        }
    }
}

fn brute_entropy(pts: &[Vec3<f64>], g: &Graph, q: f64) -> Vec<Vec3<f64>> {
    let mut out = vec![[0.0; 3]; pts.len()];
    for v in 0..pts.len() {
        for u in 0..pts.len() {
            if u == v || g.has_edge(u, v) {
                continue;
            }
            let d = geom::sub(pts[v], pts[u]);
            let r = geom::norm(d);
            let s = if q >= 0.0 { 1.0 } else { -1.0 };
            out[v] = geom::add(out[v], geom::scale(d, s / r.powf(q + 2.0)));
        }
    }
    out
}

fn cloud_graph(seed: u64, n: usize) -> (Vec<Vec3<f64>>, Graph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = random_points(&mut rng, n, 20.0);
    let g = build_graph(n, &random_connected_edges(&mut rng, n, 2 * n)).unwrap();
    (pts, g)
}

#[test]
fn exact_entropy_matches_pair_sum() {
    for seed in 0..5 {
        let (pts, g) = cloud_graph(seed, 100);
        for q in [0.0, 0.8] {
            let tree = Octree::build(&pts);
            let fast = entropy_forces(&tree, &g, q, 0.0, false);
            let slow = brute_entropy(&pts, &g, q);
            for (a, b) in fast.iter().zip(&slow) {
                assert!(geom::dist(*a, *b) < 1e-9, "{a:?} vs {b:?}");
            }
            let total = fast.iter().fold([0.0; 3], |acc, f| geom::add(acc, *f));
            assert!(geom::norm(total) < 1e-8, "net force {total:?}");
        }
    }
}

/// Mean over vertices of `|f_bh - f| / |f|`.
fn mean_relative_error(seed: u64, theta: f64) -> f64 {
    let (pts, g) = cloud_graph(seed, 100);
    let tree = Octree::build(&pts);
    let approx = entropy_forces(&tree, &g, 0.0, theta, false);
    let exact = brute_entropy(&pts, &g, 0.0);
    approx.iter().zip(&exact).map(|(a, b)| geom::dist(*a, *b) / geom::norm(*b)).sum::<f64>() / pts.len() as f64
}

#[test]
fn barnes_hut_half_theta_within_five_percent() {
    let errs: Vec<f64> = (0..10).map(|s| mean_relative_error(100 + s, 0.5)).collect();
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    println!("theta 0.5 mean relative error per seed {errs:?}");
    assert!(mean < 0.05, "mean relative error {mean}");
}

/// Smallest RMSD over a grid of rotations refined by coordinate descent on the
/// three Euler angles. Both sets are centered first.
fn rotation_search_rmsd(p: &[Vec3<f64>], q: &[Vec3<f64>]) -> f64 {
    let c = |s: &[Vec3<f64>]| {
        let m = s.iter().fold([0.0; 3], |a, x| geom::add(a, *x));
        let m = geom::scale(m, 1.0 / s.len() as f64);
        s.iter().map(|x| geom::sub(*x, m)).collect::<Vec<_>>()
    };
    let (p, q) = (c(p), c(q));
    let eval = |ang: [f64; 3]| {
        let (a, b, g) = (ang[0], ang[1], ang[2]);
        let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
        let ry = |t: f64| [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]];
        let r = geom::mat_mul(&rz(a), &geom::mat_mul(&ry(b), &rz(g)));
        let s: f64 = p.iter().zip(&q).map(|(x, y)| geom::norm_sq(geom::sub(rotate(&r, *x), *y))).sum();
        (s / p.len() as f64).sqrt()
    };
    let steps = 24;
    let mut best = (f64::INFINITY, [0.0; 3]);
    for i in 0..steps {
        for j in 0..=steps / 2 {
            for k in 0..steps {
                let ang = [
                    i as f64 * std::f64::consts::TAU / steps as f64,
                    j as f64 * std::f64::consts::TAU / steps as f64,
                    k as f64 * std::f64::consts::TAU / steps as f64,
                ];
                let v = eval(ang);
                if v < best.0 {
                    best = (v, ang);
                }
            }
        }
    }
    let mut h = 0.2;
    while h > 1e-10 {
        let mut improved = false;
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut a = best.1;
                a[axis] += sign * h;
                let v = eval(a);
                if v < best.0 {
                    best = (v, a);
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best.0
}

#[test]
fn rmsd_of_displaced_point_matches_rotation_search() {
    let refp: Vec<Vec3<f64>> = vec![[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, 5.0]];
    let mut moved = refp.clone();
    moved[1][1] += 2.0;
    let naive = (geom::norm_sq([0.0f64, 2.0, 0.0]) / 4.0).sqrt();
    assert!((naive - 1.0).abs() < 1e-15);
    let kabsch = kabsch_superpose(&moved, &refp).unwrap().rmsd;
    let oracle = rotation_search_rmsd(&moved, &refp);
    assert!(kabsch <= oracle + 1e-9, "kabsch {kabsch} oracle {oracle}");
    assert!((kabsch - oracle).abs() < 1e-6, "kabsch {kabsch} oracle {oracle}");
    assert!(kabsch < naive);
    let r = rmsd(&Embedding::new(moved), &Embedding::new(refp)).unwrap();
    assert!(r <= kabsch + 1e-12);
}

/// Top three eigenpairs of a symmetric matrix by power iteration with deflation.
fn top_eigen(mut a: Vec<Vec<f64>>, k: usize) -> Vec<(f64, Vec<f64>)> {
    let n = a.len();
    let mut out = Vec::new();
    for c in 0..k {
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7 + c * 3) % 5) as f64).collect();
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * v[j]).sum()).collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            lambda = v.iter().zip(&w).map(|(x, y)| x * y).sum();
            v = w.iter().map(|x| x / norm).collect();
        }
        for i in 0..n {
            for j in 0..n {
                a[i][j] -= lambda * v[i] * v[j];
            }
        }
        out.push((lambda, v));
    }
    out
}

#[test]
fn pivot_mds_with_all_pivots_matches_classical_mds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 6;
    let pts = random_points(&mut rng, n, 10.0);
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let g = build_graph(n, &edges).unwrap();
    let d: Vec<f64> = g.edges().iter().map(|&(a, b)| geom::dist(pts[a], pts[b])).collect();
    let emb = layout_pivot_mds(&g, &d, n, 0).unwrap();

    let mut d2 = vec![vec![0.0; n]; n];
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        d2[a][b] = d[e] * d[e];
        d2[b][a] = d[e] * d[e];
    }
    let row: Vec<f64> = (0..n).map(|i| d2[i].iter().sum::<f64>() / n as f64).collect();
    let all = row.iter().sum::<f64>() / n as f64;
    let bmat: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| -0.5 * (d2[i][j] - row[i] - row[j] + all)).collect()).collect();
    let eig = top_eigen(bmat, 3);
    let classical: Vec<Vec3<f64>> =
        (0..n).map(|i| [0, 1, 2].map(|c| eig[c].1[i] * eig[c].0.max(0.0).sqrt())).collect();
    let r = rmsd(&emb, &Embedding::new(classical)).unwrap();
    assert!(r < 1e-6, "rmsd to classical MDS {r}");
    assert!(rmsd(&emb, &Embedding::new(pts)).unwrap() < 1e-6);
}

#[test]
fn ldme_matches_naive_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n = rng.random_range(3..=8);
        let pts = random_points(&mut rng, n, 5.0);
        let mut edges = random_connected_edges(&mut rng, n, 4);
        edges.truncate(10);
        let inst = noisy_instance(&mut rng, &pts, &edges, 1.0);
        let emb = Embedding::new(random_points(&mut rng, n, 5.0));
        let mut sum = 0.0;
        for (e, &(a, b)) in inst.graph().edges().iter().enumerate() {
            let c = inst.constraint(e);
            let dist = ((emb.point(a)[0] - emb.point(b)[0]).powi(2)
                + (emb.point(a)[1] - emb.point(b)[1]).powi(2)
                + (emb.point(a)[2] - emb.point(b)[2]).powi(2))
            .sqrt();
            let gap = if dist < c.lower {
                c.lower - dist
            } else if dist > c.upper {
                dist - c.upper
            } else {
                0.0
            };
            sum += gap * gap;
        }
        let naive = (sum / inst.m() as f64).sqrt();
        let got = ldme(&emb, &inst).unwrap();
        assert!((got - naive).abs() < 1e-12, "{got} vs {naive}");
    }
}

#[test]
fn triangle_converges_to_equilateral() {
    let g = build_graph(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let d = [1.0, 1.0, 1.0];
    let w = [1.0, 1.0, 1.0];
    let cfg = SolverConfig::<f64> { cg_tol: 1e-12, ..SolverConfig::default() };
    let mut x = Embedding::new(vec![[0.3, -1.2, 0.5], [2.0, 0.7, -0.4], [-0.6, 0.1, 1.9]]);
    let zero = vec![[0.0; 3]; 3];
    for _ in 0..100 {
        x = maxent_step(&g, &d, &w, &x, 0.0, &zero, &cfg).unwrap();
    }
    for &(a, b) in g.edges() {
        assert!((x.distance(a, b) - 1.0).abs() < 1e-4);
    }
}

#[test]
fn exact_ten_point_self_reconstruction() {
    let atoms = uniform_cloud::<f64>(10, 10.0, 4);
    let inst = distgeom::instance::complete_exact_instance(&atoms).unwrap();
    let r = reconstruct(&inst, &PipelineConfig::default()).unwrap();
    assert!(r.rmsd.unwrap() < 1e-2);
}

#[test]
fn contacts_match_brute_force_scan() {
    for seed in 0..5 {
        let atoms: AtomSet<f64> = uniform_cloud(200, 25.0, seed);
        let pts = atoms.positions();
        let mut expected = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if geom::dist(pts[i], pts[j]) < 5.0 {
                    expected.push((i, j));
                }
            }
        }
        let mut got = contact_edges(&atoms, 5.0, &[]);
        got.sort_unstable();
        assert_eq!(got, expected);
    }
}

#[test]
fn intervals_contain_true_distance_over_many_draws() {
    let atoms = synthetic_chain::<f64>(120, 2);
    let reference = atoms.embedding();
    let mut draws = 0;
    let mut seed = 0;
    while draws < 100_000 {
        let inst = generate_instance(&atoms, &GenParams::new(Recipe::Normal, 1.0, 0.5, seed)).unwrap();
        for (e, &(a, b)) in inst.graph().edges().iter().enumerate() {
            let c = inst.constraint(e);
            let d = reference.distance(a, b);
            assert!(c.lower <= d && d <= c.upper, "{d} outside [{}, {}]", c.lower, c.upper);
        }
        draws += inst.m();
        seed += 1;
    }
}

#[test]
fn sampled_fraction_is_binomial() {
    let atoms = synthetic_chain::<f64>(400, 1);
    let all = generate_instance(&atoms, &GenParams::new(Recipe::Normal, 1.0, 0.0, 0)).unwrap().m();
    for (i, p) in [0.1, 0.5, 0.9].into_iter().enumerate() {
        let m = generate_instance(&atoms, &GenParams::new(Recipe::Normal, p, 0.0, 10 + i as u64)).unwrap().m();
        let frac = m as f64 / all as f64;
        assert!((frac - p).abs() <= 2.0 / (all as f64).sqrt(), "p={p} got {frac}");
    }
}

#[test]
fn sa_acceptance_frequency_at_delta_equal_t() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let trials = 100_000;
    let hits = (0..trials).filter(|_| distgeom::refine::sa_accept(0.5, 1.0, 1.5, &mut rng)).count();
    let freq = hits as f64 / trials as f64;
    assert!((freq - (-1.0f64).exp()).abs() < 0.01, "{freq}");
}

#[test]
fn weighted_errors_agree_with_naive_sum() {
    let atoms = synthetic_chain::<f64>(60, 3);
    let inst = distgeom::instance::gen_weighted_instance(&atoms, 0.5, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Embedding::new(
        atoms.embedding().coords().iter().map(|p| p.map(|x| x + rng.random::<f64>() - 0.5)).collect(),
    );
    let (out, report) = simulated_annealing(&inst, &start, &SAConfig { seed: 2, ..SAConfig::default() }).unwrap();
    let mut naive = 0.0;
    for (e, &(a, b)) in inst.graph().edges().iter().enumerate() {
        let c = inst.constraint(e);
        let dist = out.distance(a, b);
        let gap = (c.lower - dist).max(dist - c.upper).max(0.0);
        naive += c.weight * gap * gap;
    }
    assert!((report.final_total_error - naive).abs() <= 1e-12 * naive.max(1.0));
}
