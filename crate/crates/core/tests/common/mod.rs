//! Dense reference implementations shared by the integration tests.
//! They work from the definitions directly and share no code with the
//! library's propagation path.

#![allow(dead_code)]

use madsketch::{Graph, SeedSet};

pub struct DenseMad {
    pub n: usize,
    /// Real labels plus the dummy label at index `m`.
    pub labels: usize,
    pub sym: Vec<Vec<f64>>,
    /// Seed indicator `S_vv`.
    pub inject: Vec<f64>,
    pub p_inj: Vec<f64>,
    pub p_cont: Vec<f64>,
    pub abandon: Vec<f64>,
    pub normalizer: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub mu: [f64; 3],
}

/// `None` selects uniform walk probabilities (`0.5` injection on seeds);
/// `Some(beta)` the entropy recipe.
pub fn dense_mad(g: &Graph, seeds: &SeedSet, beta: Option<f64>, mu: [f64; 3]) -> DenseMad {
    let n = g.node_count();
    let m = seeds.num_labels();
    let mut w = vec![vec![0.0; n]; n];
    for v in 0..n {
        for (u, x) in g.neighbors(v) {
            w[v][u] += x;
        }
    }
    let mut q = vec![vec![0.0; m + 1]; n];
    for &(v, l, s) in seeds.entries() {
        q[v][l as usize] += s;
    }
    let seeded: Vec<bool> = q.iter().map(|r| r.iter().any(|&s| s > 0.0)).collect();
    let mut cont = vec![0.0; n];
    let mut inj = vec![0.0; n];
    let mut abnd = vec![0.0; n];
    for v in 0..n {
        let deg: f64 = w[v].iter().sum();
        match beta {
            None => {
                if seeded[v] {
                    inj[v] = 0.5;
                    cont[v] = 0.5;
                } else {
                    cont[v] = 1.0;
                }
            }
            Some(beta) => {
                let h: f64 = if deg > 0.0 {
                    -w[v].iter().filter(|&&x| x > 0.0).map(|&x| (x / deg) * (x / deg).ln()).sum::<f64>()
                } else {
                    0.0
                };
                let c = beta.ln() / (beta + h.exp()).ln();
                let d = if seeded[v] { (1.0 - c) * h.sqrt() } else { 0.0 };
                let z = (c + d).max(1.0);
                cont[v] = c / z;
                inj[v] = d / z;
                abnd[v] = 1.0 - cont[v] - inj[v];
            }
        }
    }
    let mut wp = vec![vec![0.0; n]; n];
    for v in 0..n {
        let deg: f64 = w[v].iter().sum();
        if deg > 0.0 {
            for u in 0..n {
                wp[v][u] = cont[v] * w[v][u] / deg;
            }
        }
    }
    let sym: Vec<Vec<f64>> = (0..n).map(|v| (0..n).map(|u| wp[v][u] + wp[u][v]).collect()).collect();
    let inject: Vec<f64> = seeded.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect();
    let normalizer: Vec<f64> =
        (0..n).map(|v| mu[0] * inject[v] + mu[1] * sym[v].iter().sum::<f64>() + mu[2]).collect();
    DenseMad { n, labels: m + 1, sym, inject, p_inj: inj, p_cont: cont, abandon: abnd, normalizer, q, mu }
}

impl DenseMad {
    pub fn step(&self, y: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let m = self.labels - 1;
        (0..self.n)
            .map(|v| {
                (0..self.labels)
                    .map(|l| {
                        let nb: f64 = (0..self.n).map(|u| self.sym[v][u] * y[u][l]).sum();
                        let r = if l == m { self.abandon[v] } else { 0.0 };
                        (self.mu[0] * self.inject[v] * self.q[v][l] + self.mu[1] * nb + self.mu[2] * r)
                            / self.normalizer[v]
                    })
                    .collect()
            })
            .collect()
    }

    pub fn run(&self, iterations: usize) -> Vec<Vec<f64>> {
        let mut y = self.q.clone();
        for _ in 0..iterations {
            y = self.step(&y);
        }
        y
    }
}
