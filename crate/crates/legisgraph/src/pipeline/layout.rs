//! Fruchterman-Reingold force-directed layout.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrParams {
    /// Optimal distance between nodes.
    pub k: f64,
    pub seed: u64,
    pub iterations: usize,
}

impl Default for FrParams {
    fn default() -> Self {
        FrParams {
            k: 2.2,
            seed: 1234,
            iterations: 100,
        }
    }
}

/// Standard FR layout: repulsion `k²/d` between all pairs, attraction
/// `w·d²/k` along edges, linear cooling from an initial temperature of
/// 0.1 (positions start uniformly in the unit square). The result is
/// recentred on the centroid, so a single node lands at the origin.
/// Deterministic for a fixed seed.
pub fn fr_layout(n: usize, edges: &[(u32, u32, f64)], params: &FrParams) -> Vec<(f64, f64)> {
    if n == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut pos: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    if n > 1 {
        let mut t = 0.1f64;
        let dt = t / (params.iterations as f64 + 1.0);
        for _ in 0..params.iterations {
            let mut disp = vec![(0.0f64, 0.0f64); n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let dx = pos[i].0 - pos[j].0;
                    let dy = pos[i].1 - pos[j].1;
                    let d = (dx * dx + dy * dy).sqrt().max(0.01);
                    let force = params.k * params.k / (d * d);
                    let (fx, fy) = (dx / d * force, dy / d * force);
                    disp[i].0 += fx;
                    disp[i].1 += fy;
                    disp[j].0 -= fx;
                    disp[j].1 -= fy;
                }
            }
            for &(a, b, w) in edges {
                let (i, j) = (a as usize, b as usize);
                if i == j {
                    continue;
                }
                let dx = pos[i].0 - pos[j].0;
                let dy = pos[i].1 - pos[j].1;
                let d = (dx * dx + dy * dy).sqrt().max(0.01);
                let force = w * d * d / params.k;
                let (fx, fy) = (dx / d * force, dy / d * force);
                disp[i].0 -= fx;
                disp[i].1 -= fy;
                disp[j].0 += fx;
                disp[j].1 += fy;
            }
            for i in 0..n {
                let len = (disp[i].0 * disp[i].0 + disp[i].1 * disp[i].1)
                    .sqrt()
                    .max(1e-12);
                let step = len.min(t);
                pos[i].0 += disp[i].0 / len * step;
                pos[i].1 += disp[i].1 / len * step;
            }
            t -= dt;
        }
    }
    let cx = pos.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let cy = pos.iter().map(|p| p.1).sum::<f64>() / n as f64;
    pos.iter().map(|&(x, y)| (x - cx, y - cy)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_at_origin() {
        let pos = fr_layout(1, &[], &FrParams::default());
        assert_eq!(pos, vec![(0.0, 0.0)]);
    }

    #[test]
    fn two_nodes_settle_near_k() {
        let params = FrParams::default();
        let pos = fr_layout(2, &[(0, 1, 1.0)], &params);
        let d = ((pos[0].0 - pos[1].0).powi(2) + (pos[0].1 - pos[1].1).powi(2)).sqrt();
        assert!(
            (d - params.k).abs() <= 0.2 * params.k,
            "distance {d} not within 20% of k = {}",
            params.k
        );
    }

    #[test]
    fn fixed_seed_reproduces_positions() {
        let edges = [(0, 1, 1.0), (1, 2, 2.0), (2, 0, 1.0), (2, 3, 1.0)];
        let a = fr_layout(4, &edges, &FrParams::default());
        let b = fr_layout(4, &edges, &FrParams::default());
        assert_eq!(a, b);
        let c = fr_layout(
            4,
            &edges,
            &FrParams {
                seed: 99,
                ..FrParams::default()
            },
        );
        assert_ne!(a, c);
    }
}
