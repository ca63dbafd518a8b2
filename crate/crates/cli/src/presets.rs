//! Built-in experiment configurations.

use std::collections::BTreeMap;

use hypersis::Backend;

use crate::config::{ExperimentConfig, HypergraphSource, Model, Sweepable};

/// Edge counts by size for the standard 400-node instance.
pub const RECIPE_SIZES: &str = "2:400,3:200,4:100,5:50";
pub const RECIPE_NODES: usize = 400;
pub const RECIPE_SEED: u64 = 7;

/// Infection strength used by the collective-contagion presets.
pub const COLLECTIVE_BETA: f64 = 2.0;

pub const NAMES: &[&str] = &[
    "fig-time-arctan",
    "fig-time-log",
    "fig-time-min",
    "fig-time-collective",
    "fig-beta-sweep",
    "fig-beta-sweep-log",
    "fig-i0-sweep",
    "fig-i0-sweep-k3",
    "fig-i0-sweep-fewer",
];

/// Identity on pairs and `(k-1)·1(x >= k-1)` on hyperedges of size `k+1`.
pub fn collective_size_kernels() -> BTreeMap<usize, String> {
    [
        (2, "identity"),
        (3, "threshold:1,1"),
        (4, "threshold:2,2"),
        (5, "threshold:3,3"),
    ]
    .into_iter()
    .map(|(k, s)| (k, s.to_string()))
    .collect()
}

fn grid(start: f64, step: f64, count: usize) -> Vec<f64> {
    // rounded so the printed grid stays short
    (0..count)
        .map(|k| ((start + step * k as f64) * 1e6).round() / 1e6)
        .collect()
}

fn base(sizes: &str) -> ExperimentConfig {
    ExperimentConfig {
        hypergraph: HypergraphSource::Random {
            n: RECIPE_NODES,
            sizes: sizes.into(),
            seed: RECIPE_SEED,
        },
        kernel: None,
        size_kernels: BTreeMap::new(),
        family_kernels: BTreeMap::new(),
        beta: Sweepable::One(0.1),
        delta: 1.0,
        i0: Sweepable::One(0.1),
        horizon: 50.0,
        dt: hypersis::meanfield::DEFAULT_DT,
        runs: 100,
        models: vec![Model::Exact, Model::MfInteger, Model::MfCommuted],
        seed: 1,
        backend: Backend::Discretized,
        out: None,
    }
}

fn time_panel(kernel: &str) -> ExperimentConfig {
    ExperimentConfig {
        kernel: Some(kernel.into()),
        ..base(RECIPE_SIZES)
    }
}

fn beta_sweep(kernel: &str, betas: Vec<f64>) -> ExperimentConfig {
    ExperimentConfig {
        kernel: Some(kernel.into()),
        beta: Sweepable::Many(betas),
        i0: Sweepable::One(0.5),
        horizon: 200.0,
        runs: 10,
        ..base(RECIPE_SIZES)
    }
}

fn i0_sweep(sizes: &str) -> ExperimentConfig {
    ExperimentConfig {
        size_kernels: collective_size_kernels(),
        beta: Sweepable::One(COLLECTIVE_BETA),
        i0: Sweepable::Many(vec![0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5]),
        horizon: 100.0,
        runs: 5,
        ..base(sizes)
    }
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    Some(match name {
        "fig-time-arctan" => time_panel("arctan"),
        "fig-time-log" => time_panel("log1p"),
        "fig-time-min" => time_panel("min:3"),
        "fig-time-collective" => ExperimentConfig {
            size_kernels: collective_size_kernels(),
            beta: Sweepable::One(COLLECTIVE_BETA),
            ..base(RECIPE_SIZES)
        },
        "fig-beta-sweep" => beta_sweep("arctan", grid(0.01, 0.01, 15)),
        "fig-beta-sweep-log" => beta_sweep("log1p:2", grid(0.005, 0.005, 16)),
        "fig-i0-sweep" => i0_sweep("4:200,5:100"),
        "fig-i0-sweep-k3" => i0_sweep("3:200,4:100,5:50"),
        "fig-i0-sweep-fewer" => i0_sweep("4:100,5:50"),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Plan;

    #[test]
    fn every_preset_is_valid() {
        for name in NAMES {
            let cfg = preset(name).unwrap();
            cfg.plan().unwrap();
            assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn sweep_shapes() {
        match preset("fig-beta-sweep").unwrap().plan().unwrap() {
            Plan::BetaSweep { betas, i0 } => {
                assert_eq!(i0, 0.5);
                assert_eq!(betas.first(), Some(&0.01));
                assert_eq!(betas.last(), Some(&0.15));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(preset("fig-i0-sweep").unwrap().plan().unwrap(), Plan::I0Sweep { .. }));
    }
}
