//! Seeded generator of drifting-label graphs with recency-dominant signal.
//!
//! Each node holds a binary label that persists between timesteps with
//! probability `1 - θ*` and is otherwise redrawn, so its correlation with
//! the label `k` steps later decays as `(1 - θ*)^k`. Every existing node
//! forms [`LINKS_PER_STEP`] links per timestep; with probability
//! `autocorr_strength` the partner is drawn among nodes sharing its current
//! label. A link formed at `t_i` therefore predicts the label at `t` with a
//! strength that fades with `t - t_i`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, TemporalGraph, Timestep};
use crate::seeding::rng;

pub const LINKS_PER_STEP: usize = 2;
/// Probability that the predictive attribute misreports the neighbor majority.
pub const SIGNAL_FLIP: f64 = 0.2;
pub const LABELS: [&str; 2] = ["neg", "pos"];
pub const SIGNAL_ATTR: &str = "signal";
pub const NOISE_ATTR: &str = "noise";

fn node_name(i: usize, n: usize) -> String {
    let width = (n - 1).to_string().len().max(3);
    format!("n{i:0width$}")
}

pub fn generate_synthetic(
    n_nodes: usize,
    n_timesteps: Timestep,
    decay_theta_star: f64,
    autocorr_strength: f64,
    seed: u64,
) -> Result<TemporalGraph> {
    if n_nodes < 10 {
        return Err(Error::Config(format!("synth.nodes: must be at least 10, got {n_nodes}")));
    }
    if n_timesteps < 3 {
        return Err(Error::Config(format!(
            "synth.timesteps: must be at least 3, got {n_timesteps}"
        )));
    }
    if !(decay_theta_star > 0.0 && decay_theta_star < 1.0) {
        return Err(Error::Config(format!(
            "synth.theta: must lie in (0, 1), got {decay_theta_star}"
        )));
    }
    if !(0.0..=1.0).contains(&autocorr_strength) {
        return Err(Error::Config(format!(
            "synth.strength: must lie in [0, 1], got {autocorr_strength}"
        )));
    }

    let mut r = rng(seed, &[0x7379_6e74]);
    let names: Vec<String> = (0..n_nodes).map(|i| node_name(i, n_nodes)).collect();
    // half the nodes exist from the start, the rest arrive uniformly later
    let mut order: Vec<usize> = (0..n_nodes).collect();
    order.shuffle(&mut r);
    let mut creation = vec![1; n_nodes];
    for &i in &order[n_nodes / 2..] {
        creation[i] = r.gen_range(2..=n_timesteps);
    }

    let mut b = GraphBuilder::new();
    for (i, name) in names.iter().enumerate() {
        b.set_creation(name, creation[i]);
    }
    let mut label: Vec<Option<usize>> = vec![None; n_nodes];
    for t in 1..=n_timesteps {
        for i in 0..n_nodes {
            if creation[i] > t {
                continue;
            }
            label[i] = Some(match label[i] {
                Some(l) if !r.gen_bool(decay_theta_star) => l,
                _ => r.gen_range(0..2),
            });
        }
        let alive: Vec<usize> = (0..n_nodes).filter(|&i| creation[i] <= t).collect();
        let by_label: [Vec<usize>; 2] =
            [0, 1].map(|l| alive.iter().copied().filter(|&i| label[i] == Some(l)).collect());
        let mut votes = vec![[0usize; 2]; n_nodes];
        for &i in &alive {
            let li = label[i].unwrap();
            for _ in 0..LINKS_PER_STEP {
                let pool = if r.gen_bool(autocorr_strength) {
                    &by_label[li]
                } else {
                    &alive
                };
                let candidates = pool.len() - usize::from(pool.contains(&i));
                if candidates == 0 {
                    continue;
                }
                let j = loop {
                    let j = pool[r.gen_range(0..pool.len())];
                    if j != i {
                        break j;
                    }
                };
                b.add_edge(&names[i], &names[j], t);
                votes[i][label[j].unwrap()] += 1;
                votes[j][li] += 1;
            }
        }
        for &i in &alive {
            let [neg, pos] = votes[i];
            let majority = match neg.cmp(&pos) {
                std::cmp::Ordering::Greater => 0,
                std::cmp::Ordering::Less => 1,
                std::cmp::Ordering::Equal => r.gen_range(0..2),
            };
            let signal = if r.gen_bool(SIGNAL_FLIP) { 1 - majority } else { majority };
            b.set_attr(&names[i], t, SIGNAL_ATTR, LABELS[signal]);
            b.set_attr(&names[i], t, NOISE_ATTR, LABELS[r.gen_range(0..2)]);
            b.set_label(&names[i], t, LABELS[label[i].unwrap()])?;
        }
    }
    b.build()
}
