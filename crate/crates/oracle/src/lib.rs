//! Exhaustive path-enumeration references for small instances.
//!
//! Nothing here shares code with the transfer-matrix engine: every quantity
//! is a literal sum over all `(2d)^N` nearest-neighbour paths (or all pairs
//! of paths), reading disorder one site at a time.

use std::collections::BTreeMap;

use polymerlab::disorder::Environment;

pub type Site = Vec<i32>;

/// All `(2d)^steps` paths from `start`, each listed as `ω_1, …, ω_steps`.
pub fn all_paths(start: &[i32], steps: usize) -> Vec<Vec<Site>> {
    let d = start.len();
    let moves = 2 * d;
    let total = moves.pow(steps as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let mut pos = start.to_vec();
        let mut path = Vec::with_capacity(steps);
        for _ in 0..steps {
            let m = c % moves;
            c /= moves;
            pos[m / 2] += if m % 2 == 0 { -1 } else { 1 };
            path.push(pos.clone());
        }
        out.push(path);
    }
    out
}

/// `e^{β Σ_{t=1}^{n} η(M + t, ω_t)}`.
pub fn path_weight<E: Environment>(env: &E, beta: f64, start_time: i64, path: &[Site]) -> f64 {
    let sum: f64 = path
        .iter()
        .enumerate()
        .map(|(i, s)| env.value(start_time + 1 + i as i64, s).expect("site inside the window"))
        .sum();
    (beta * sum).exp()
}

/// Every polymer quantity from one base point, by brute force.
#[derive(Debug, Clone)]
pub struct PathSums {
    pub steps: usize,
    /// `Z^x_{M,N}`.
    pub z: f64,
    /// Point-to-point weights `(2d)^{−n} Σ_{paths→y} e^{β Σ η}`.
    pub endpoint: BTreeMap<Site, f64>,
    /// Walk probabilities `p_n(x, y)` from path counts.
    pub walk: BTreeMap<Site, f64>,
    /// `μ(ω_t = z)` for `t = 1..=n`.
    pub marginals: Vec<BTreeMap<Site, f64>>,
}

impl PathSums {
    pub fn new<E: Environment>(env: &E, beta: f64, start_time: i64, start: &[i32], steps: usize) -> Self {
        let paths = all_paths(start, steps);
        let norm = ((2 * start.len()) as f64).powi(steps as i32);
        let weights: Vec<f64> = paths.iter().map(|p| path_weight(env, beta, start_time, p)).collect();
        let z = weights.iter().sum::<f64>() / norm;
        let mut endpoint = BTreeMap::new();
        let mut walk = BTreeMap::new();
        let mut marginals = vec![BTreeMap::new(); steps];
        if steps == 0 {
            endpoint.insert(start.to_vec(), 1.0);
            walk.insert(start.to_vec(), 1.0);
        }
        for (path, w) in paths.iter().zip(&weights) {
            if let Some(end) = path.last() {
                *endpoint.entry(end.clone()).or_insert(0.0) += w / norm;
                *walk.entry(end.clone()).or_insert(0.0) += 1.0 / norm;
            }
            for (t, site) in path.iter().enumerate() {
                *marginals[t].entry(site.clone()).or_insert(0.0) += w / norm / z;
            }
        }
        PathSums {
            steps,
            z,
            endpoint,
            walk,
            marginals,
        }
    }

    pub fn w(&self, lambda: f64) -> f64 {
        self.z * (-(self.steps as f64) * lambda).exp()
    }

    /// `W(x|y)`; `None` when no path reaches `y`.
    pub fn conditional(&self, end: &[i32], lambda: f64) -> Option<f64> {
        let w = self.endpoint.get(end)?;
        let p = self.walk.get(end)?;
        Some(w / p * (-(self.steps as f64) * lambda).exp())
    }

    pub fn mean_square(&self, start: &[i32]) -> f64 {
        let last = &self.marginals[self.steps - 1];
        last.iter()
            .map(|(z, m)| {
                let r2: i32 = z.iter().zip(start).map(|(a, b)| (a - b) * (a - b)).sum();
                m * r2 as f64
            })
            .sum()
    }
}

/// Sites with `|x|₁ ≤ r` and `Σx ≡ r (mod 2)`, lexicographic.
pub fn parity_ball(dim: usize, r: i32) -> Vec<Site> {
    let mut out = Vec::new();
    let mut x = vec![-r; dim];
    loop {
        let l1: i32 = x.iter().map(|v| v.abs()).sum();
        let s: i32 = x.iter().sum();
        if l1 <= r && (s - r).rem_euclid(2) == 0 {
            out.push(x.clone());
        }
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            x[i] += 1;
            if x[i] <= r {
                break;
            }
            x[i] = -r;
        }
    }
}

/// `q_N = Σ_x μ^x_{−N,0}(ω_N = 0)` by enumerating paths from every start.
pub fn density_qn<E: Environment>(env: &E, beta: f64, n: usize) -> f64 {
    let d = env.dim();
    let origin = vec![0; d];
    parity_ball(d, n as i32)
        .iter()
        .map(|x| {
            let sums = PathSums::new(env, beta, -(n as i64), x, n);
            if n == 0 {
                return 1.0;
            }
            sums.marginals[n - 1].get(&origin).copied().unwrap_or(0.0)
        })
        .sum()
}

/// `P⊗²[e^{γ L_N}]` with `L_N = #{1 ≤ t ≤ N : ω_t = ω̃_t}`, over all path pairs.
pub fn pair_overlap_moment(dim: usize, steps: usize, gamma: f64) -> f64 {
    let origin = vec![0; dim];
    let paths = all_paths(&origin, steps);
    let norm = ((2 * dim) as f64).powi(2 * steps as i32);
    let mut total = 0.0;
    for a in &paths {
        for b in &paths {
            let overlap = a.iter().zip(b).filter(|(x, y)| x == y).count();
            total += (gamma * overlap as f64).exp();
        }
    }
    total / norm
}

/// `Σ_x p_t(0, x)²` from path counts.
pub fn squared_walk_mass(dim: usize, steps: usize) -> f64 {
    let mut counts: BTreeMap<Site, f64> = BTreeMap::new();
    let paths = all_paths(&vec![0; dim], steps);
    let norm = ((2 * dim) as f64).powi(steps as i32);
    for p in &paths {
        let end = p.last().cloned().unwrap_or_else(|| vec![0; dim]);
        *counts.entry(end).or_insert(0.0) += 1.0 / norm;
    }
    counts.values().map(|p| p * p).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_counts() {
        assert_eq!(all_paths(&[0], 3).len(), 8);
        assert_eq!(all_paths(&[0, 0, 0], 2).len(), 36);
        assert_eq!(parity_ball(1, 2), vec![vec![-2], vec![0], vec![2]]);
    }

    #[test]
    fn pair_moment_at_zero_gamma() {
        assert!((pair_overlap_moment(2, 2, 0.0) - 1.0).abs() < 1e-15);
        // d = 1, N = 1: the replicas meet with probability 1/2.
        let g = 0.7f64;
        assert!((pair_overlap_moment(1, 1, g) - (0.5 + 0.5 * g.exp())).abs() < 1e-15);
    }

    #[test]
    fn squared_mass_small() {
        // d = 1, t = 1: p = (1/2, 1/2).
        assert_eq!(squared_walk_mass(1, 1), 0.5);
    }
}
