use indexmap::IndexSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::{load_edges, load_seeds};

fn labels(m: usize) -> IndexSet<String> {
    (0..m).map(|l| format!("L{l}")).collect()
}

fn random_graph(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize, f64)> = (1..n).map(|v| (rng.gen_range(0..v), v, rng.gen_range(0.5..2.0))).collect();
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push((u, v, rng.gen_range(0.5..2.0)));
        }
    }
    Graph::from_edges(n, edges, true).unwrap()
}

fn random_seeds(n: usize, m: usize, count: usize, seed: u64) -> SeedSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..count).map(|i| (rng.gen_range(0..n), (i % m) as u32, 1.0)).collect();
    SeedSet::new(n, labels(m), entries).unwrap()
}

fn sketch_cfg(w: usize, d: usize, seed: u64) -> SolverConfig {
    SolverConfig::default().with_backend(Backend::Sketch(SketchParams::new(w, d, seed).unwrap()))
}

#[test]
fn isolated_seed_keeps_injected_mass() {
    let g = load_edges("s\n".as_bytes(), true).unwrap();
    let seeds = load_seeds("s x\n".as_bytes(), &g).unwrap();
    let cfg = SolverConfig { weight_mode: WeightMode::Uniform, ..SolverConfig::default() };
    let (state, report) = run(&g, &seeds, cfg).unwrap();
    assert!((state.score(0, 0) - 0.98 / 0.99).abs() < 1e-15);
    assert_eq!(report.executed, 10);
}

#[test]
fn dense_recurrence_matches() {
    let g = random_graph(12, 15, 3);
    let seeds = random_seeds(12, 3, 4, 4);
    let cfg = SolverConfig::default();
    let p = Propagator::new(&g, &seeds, cfg).unwrap();
    let w = p.weights().unwrap();
    let m1 = seeds.num_labels() + 1;
    let [mu1, mu2, mu3] = w.mu();
    let mut y: Vec<Vec<f64>> = (0..12).map(|v| (0..m1 as u32).map(|l| seeds.row(v).get(l)).collect()).collect();
    let mut state = p.initial_state();
    for _ in 0..10 {
        let next: Vec<Vec<f64>> = (0..12)
            .map(|v| {
                let (cols, vals) = w.symmetric_row(v);
                (0..m1)
                    .map(|l| {
                        let nb: f64 = cols.iter().zip(vals).map(|(&u, &x)| x * y[u as usize][l]).sum();
                        let q = seeds.row(v).get(l as u32);
                        let r = w.prior(v).get(l as u32);
                        (mu1 * w.injection_indicator(v) * q + mu2 * nb + mu3 * r) / w.normalizer(v)
                    })
                    .collect()
            })
            .collect();
        y = next;
        state = p.step(&state).unwrap();
    }
    for v in 0..12 {
        for l in 0..m1 {
            assert!((state.score(v, l as u32) - y[v][l]).abs() < 1e-12, "node {v} label {l}");
        }
    }
}

#[test]
fn no_propagation_is_a_fixed_point() {
    let g = random_graph(20, 10, 1);
    let seeds = random_seeds(20, 4, 6, 2);
    let cfg = SolverConfig { mu1: 0.5, mu2: 0.0, mu3: 0.5, ..SolverConfig::default() };
    let p = Propagator::new(&g, &seeds, cfg).unwrap();
    let one = p.step(&p.initial_state()).unwrap();
    let two = p.step(&one).unwrap();
    assert_eq!(one.exact_rows(), two.exact_rows());
}

#[test]
fn single_label_sketch_matches_exact() {
    let g = random_graph(30, 20, 9);
    let seeds = random_seeds(30, 1, 3, 9);
    let base = SolverConfig { weight_mode: WeightMode::Uniform, ..SolverConfig::default() };
    let (exact, _) = run(&g, &seeds, base.clone()).unwrap();
    let (sk, _) = run(&g, &seeds, base.with_backend(Backend::Sketch(SketchParams::new(4, 2, 1).unwrap()))).unwrap();
    for v in 0..30 {
        assert!((exact.score(v, 0) - sk.score(v, 0)).abs() < 1e-12);
    }
}

#[test]
fn harmonic_path_interpolates() {
    let g = load_edges("a b\nb c\nc d\n".as_bytes(), true).unwrap();
    let seeds = load_seeds("a x\nd y\n".as_bytes(), &g).unwrap();
    let cfg = SolverConfig { method: Method::Harmonic, iterations: 60, ..SolverConfig::default() };
    let (state, _) = run(&g, &seeds, cfg).unwrap();
    let x = seeds.label_id("x").unwrap();
    assert!((state.score(1, x) - 2.0 / 3.0).abs() < 1e-6);
    assert!((state.score(2, x) - 1.0 / 3.0).abs() < 1e-6);
    assert_eq!(state.score(0, x), 1.0);
    assert_eq!(state.score(3, x), 0.0);
}

/// Solves `(D_uu − W_uu) f = W_ul f_l` for the unlabeled block by Gaussian
/// elimination.
fn harmonic_oracle(g: &Graph, seeded: &[bool], f_l: &[f64]) -> Vec<f64> {
    let n = g.node_count();
    let free: Vec<usize> = (0..n).filter(|&v| !seeded[v]).collect();
    let pos: Vec<Option<usize>> = {
        let mut p = vec![None; n];
        for (i, &v) in free.iter().enumerate() {
            p[v] = Some(i);
        }
        p
    };
    let k = free.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (i, &v) in free.iter().enumerate() {
        a[i][i] = g.degree(v);
        for (u, w) in g.neighbors(v) {
            match pos[u] {
                Some(j) => a[i][j] -= w,
                None => a[i][k] += w * f_l[u],
            }
        }
    }
    for c in 0..k {
        let piv = (c..k).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, piv);
        for r in 0..k {
            if r != c {
                let f = a[r][c] / a[c][c];
                for j in c..=k {
                    a[r][j] -= f * a[c][j];
                }
            }
        }
    }
    let mut out = f_l.to_vec();
    for (i, &v) in free.iter().enumerate() {
        out[v] = a[i][k] / a[i][i];
    }
    out
}

#[test]
fn harmonic_converges_to_linear_solve() {
    let g = random_graph(50, 80, 17);
    let seeds = random_seeds(50, 2, 8, 18);
    let cfg = SolverConfig { method: Method::Harmonic, iterations: 2000, ..SolverConfig::default() };
    let (state, _) = run(&g, &seeds, cfg).unwrap();
    let seeded: Vec<bool> = (0..50).map(|v| seeds.is_seeded(v)).collect();
    for l in 0..2u32 {
        let f_l: Vec<f64> = (0..50).map(|v| seeds.row(v).get(l)).collect();
        let oracle = harmonic_oracle(&g, &seeded, &f_l);
        for v in 0..50 {
            assert!((state.score(v, l) - oracle[v]).abs() < 1e-8, "node {v} label {l}");
        }
    }
}

#[test]
fn sketch_never_underestimates_and_stays_constant() {
    let g = random_graph(80, 120, 5);
    let seeds = random_seeds(80, 40, 60, 6);
    let (exact, er) = run(&g, &seeds, SolverConfig::default()).unwrap();
    let (sk, sr) = run(&g, &seeds, sketch_cfg(20, 3, 11)).unwrap();
    for v in 0..80 {
        for l in 0..=40u32 {
            assert!(sk.score(v, l) >= exact.score(v, l) - 1e-12);
        }
    }
    let sizes: Vec<usize> = sr.iterations.iter().map(|i| i.store_bytes).collect();
    assert!(sizes.iter().all(|&b| b == 80 * 20 * 3 * 8));
    assert_eq!(sr.initial_bytes, 80 * 20 * 3 * 8);
    let entries: Vec<usize> = er.iterations.iter().map(|i| i.store_entries).collect();
    assert!(entries.windows(2).all(|w| w[0] <= w[1]));
    assert!(*entries.last().unwrap() > er.initial_entries);
}

#[test]
fn sequential_and_parallel_agree() {
    let g = random_graph(300, 600, 21);
    let seeds = random_seeds(300, 30, 60, 22);
    for cfg in [SolverConfig::default(), sketch_cfg(16, 3, 2)] {
        let seq = run(&g, &seeds, cfg.clone()).unwrap().0;
        let par = crate::par::with_threads(2, || {
            run(&g, &seeds, SolverConfig { parallelism: Parallelism::Parallel, ..cfg.clone() }).unwrap().0
        });
        assert_eq!(seq, par);
    }
}

#[test]
fn zero_iterations_return_seeds() {
    let g = random_graph(10, 5, 1);
    let seeds = random_seeds(10, 3, 4, 1);
    let (state, report) = run(&g, &seeds, SolverConfig { iterations: 0, ..SolverConfig::default() }).unwrap();
    assert_eq!(report.executed, 0);
    for v in 0..10 {
        assert_eq!(state.exact_rows().unwrap()[v], *seeds.row(v));
    }
}

#[test]
fn early_stop_on_small_change() {
    let g = random_graph(40, 40, 8);
    let seeds = random_seeds(40, 3, 6, 8);
    let cfg = SolverConfig { iterations: 500, convergence_delta: Some(1e-9), ..SolverConfig::default() };
    let (_, report) = run(&g, &seeds, cfg).unwrap();
    assert!(report.converged);
    assert!(report.executed < 500);
    assert!(report.iterations.last().unwrap().max_delta.unwrap() < 1e-9);
}

#[test]
fn backend_mismatch_is_rejected() {
    let g = random_graph(10, 5, 1);
    let seeds = random_seeds(10, 3, 4, 1);
    let exact = Propagator::new(&g, &seeds, SolverConfig::default()).unwrap();
    let sketch = Propagator::new(&g, &seeds, sketch_cfg(8, 2, 0)).unwrap();
    assert!(matches!(exact.step(&sketch.initial_state()), Err(SolverError::WrongBackend(_))));
    assert!(matches!(sketch.step(&exact.initial_state()), Err(SolverError::WrongBackend(_))));
    let w = exact.weights().unwrap();
    assert!(mad_sketch_step(&exact.initial_state(), &g, w, &seeds, &SolverConfig::default()).is_err());
    assert!(mad_exact_step(&exact.initial_state(), &g, w, &seeds, &SolverConfig::default()).is_ok());
}

#[test]
fn guarantee_flag() {
    let g = random_graph(10, 5, 1);
    let seeds = random_seeds(10, 3, 4, 1);
    let ok = SolverConfig { assert_guarantee: true, iterations: 1, ..sketch_cfg(8, 2, 0) };
    assert!(run(&g, &seeds, ok.clone()).unwrap().1.guarantee);
    let over = SolverConfig { mu1: 1.0, ..ok };
    assert!(!run(&g, &seeds, over).unwrap().1.guarantee);
}

#[test]
fn harmonic_step_free_function() {
    let g = load_edges("a b\nb c\n".as_bytes(), true).unwrap();
    let seeds = load_seeds("a x\n".as_bytes(), &g).unwrap();
    let p = Propagator::new(&g, &seeds, SolverConfig { method: Method::Harmonic, ..SolverConfig::default() }).unwrap();
    let one = harmonic_step(&p.initial_state(), &g, &seeds).unwrap();
    assert_eq!(one.score(1, 0), 0.5);
    assert_eq!(one.iteration(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn k_sparse_rows_keep_l1_bounded(seed in 0u64..1000, k in 1usize..3) {
        let n = 40;
        let g = random_graph(n, 60, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let entries: Vec<(usize, u32, f64)> = (0..n)
            .filter(|_| rng.gen_bool(0.3))
            .flat_map(|v| (0..k).map(move |i| (v, ((v + i) % 6) as u32, 1.0)))
            .collect();
        prop_assume!(!entries.is_empty());
        let seeds = SeedSet::new(n, labels(6), entries).unwrap();
        let (state, _) = run(&g, &seeds, SolverConfig::default()).unwrap();
        let dummy = state.dummy_label();
        for row in state.exact_rows().unwrap() {
            let l1: f64 = row.iter().filter(|p| p.0 != dummy).map(|p| p.1).sum();
            prop_assert!(l1 <= k as f64 + 1e-9);
        }
    }

    #[test]
    fn sketch_overestimates(seed in 0u64..1000) {
        let g = random_graph(25, 30, seed);
        let seeds = random_seeds(25, 12, 10, seed + 1);
        let (exact, _) = run(&g, &seeds, SolverConfig { iterations: 4, ..SolverConfig::default() }).unwrap();
        let (sk, _) = run(&g, &seeds, SolverConfig { iterations: 4, ..sketch_cfg(5, 2, seed) }).unwrap();
        for v in 0..25 {
            for l in 0..12u32 {
                prop_assert!(sk.score(v, l) >= exact.score(v, l) - 1e-12);
            }
        }
    }
}
