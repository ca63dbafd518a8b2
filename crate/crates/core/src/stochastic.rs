//! The exact individual-level SIS process and ensemble statistics.
//!
//! A susceptible node `i` is infected at rate `λ_i = β Σ_{h∋i} f_h(#infected in h)`
//! and an infected node recovers at rate `δ`. Two samplers are provided:
//! a fixed-step discretization (each node flips independently with
//! probability `1 - exp(-rate·dt)`, all against the state at the start of
//! the step) and an exact event-driven sampler used to cross-check it.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::kernel::Kernels;
use crate::meanfield::ModelParams;

/// Fraction of runs dropped at each end of the per-time envelope.
pub const ENVELOPE_TAIL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Discretized,
    EventDriven,
}

/// One simulation setup. `seed` is the run's own seed; ensembles derive
/// per-run seeds from a base seed instead.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig<'a> {
    pub hg: &'a Hypergraph,
    pub kernels: &'a Kernels,
    pub params: ModelParams,
    /// Independent initial infection probability per node.
    pub i0: f64,
    pub horizon: f64,
    /// Step of the discretized backend and spacing of the output grid.
    pub dt: f64,
    pub backend: Backend,
    pub seed: u64,
}

impl RunConfig<'_> {
    pub fn validate(&self) -> Result<()> {
        self.kernels.validate(self.hg)?;
        if !(0.0..=1.0).contains(&self.i0) {
            return Err(Error::Validation(format!("i0 = {} is outside [0, 1]", self.i0)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.dt) {
            return Err(Error::Validation(format!(
                "horizon {} must be finite and at least dt = {}",
                self.horizon, self.dt
            )));
        }
        Ok(())
    }

    /// Output grid `0, dt, 2dt, ..., T` (last interval shortened if needed).
    pub fn time_grid(&self) -> Vec<f64> {
        time_grid(self.dt, self.horizon)
    }
}

fn time_grid(dt: f64, horizon: f64) -> Vec<f64> {
    let full = (horizon / dt + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=full).map(|k| k as f64 * dt).collect();
    if horizon - full as f64 * dt > 1e-9 * dt {
        grid.push(horizon);
    }
    grid
}

/// `λ_i = β Σ_{h∋i} f_h(Σ_{j∈h} X_j)` for every node, infected or not.
pub fn infection_rates(hg: &Hypergraph, kernels: &Kernels, beta: f64, x: &[u8]) -> Vec<f64> {
    let tracker = RateTracker::new(hg, kernels, beta, x);
    tracker.rates
}

/// One synchronous discretized step.
pub fn step_discretized(
    x: &[u8],
    rates: &[f64],
    delta: f64,
    dt: f64,
    rng: &mut impl Rng,
) -> Vec<u8> {
    let recover = 1.0 - (-delta * dt).exp();
    x.iter()
        .zip(rates)
        .map(|(&xi, &rate)| flip_discretized(xi, rate, recover, dt, rng))
        .collect()
}

fn flip_discretized(xi: u8, rate: f64, recover: f64, dt: f64, rng: &mut impl Rng) -> u8 {
    if xi == 1 {
        if recover > 0.0 && rng.random::<f64>() < recover {
            0
        } else {
            1
        }
    } else if rate > 0.0 && rng.random::<f64>() < 1.0 - (-rate * dt).exp() {
        1
    } else {
        0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    /// One node flipped after `elapsed` time.
    Event { state: Vec<u8>, node: usize, elapsed: f64 },
    /// Total event rate is zero: the chain cannot move again.
    Absorbed,
}

/// One exact event: exponential waiting time at the total rate, then a node
/// chosen proportionally to its own rate is flipped.
pub fn step_event_driven(
    x: &[u8],
    hg: &Hypergraph,
    kernels: &Kernels,
    params: ModelParams,
    rng: &mut impl Rng,
) -> StepOutcome {
    let tracker = RateTracker::new(hg, kernels, params.beta, x);
    let mut sampler = EventSampler::new(&tracker, params.delta);
    match sampler.sample(rng) {
        None => StepOutcome::Absorbed,
        Some((node, elapsed)) => {
            let mut state = x.to_vec();
            state[node] ^= 1;
            StepOutcome::Event {
                state,
                node,
                elapsed,
            }
        }
    }
}

/// Per-edge infected counts and per-node infection rates, updated on flips.
///
/// Rates of touched nodes are re-summed from cached per-edge kernel values,
/// so a node with no infected co-members has rate exactly zero.
struct RateTracker<'a> {
    hg: &'a Hypergraph,
    kernels: &'a Kernels,
    beta: f64,
    state: Vec<u8>,
    infected: usize,
    edge_counts: Vec<usize>,
    edge_values: Vec<f64>,
    rates: Vec<f64>,
}

impl<'a> RateTracker<'a> {
    fn new(hg: &'a Hypergraph, kernels: &'a Kernels, beta: f64, x: &[u8]) -> Self {
        let edge_counts: Vec<usize> = hg
            .edges()
            .iter()
            .map(|e| e.iter().filter(|&&j| x[j] == 1).count())
            .collect();
        let edge_values: Vec<f64> = edge_counts
            .iter()
            .enumerate()
            .map(|(h, &c)| kernels.for_edge(hg, h).eval_int(c))
            .collect();
        let mut tracker = RateTracker {
            hg,
            kernels,
            beta,
            state: x.to_vec(),
            infected: x.iter().filter(|&&v| v == 1).count(),
            edge_counts,
            edge_values,
            rates: vec![0.0; hg.node_count()],
        };
        for i in 0..hg.node_count() {
            tracker.rates[i] = tracker.node_rate(i);
        }
        tracker
    }

    fn node_rate(&self, i: usize) -> f64 {
        self.beta
            * self
                .hg
                .edges_of(i)
                .iter()
                .map(|&h| self.edge_values[h])
                .sum::<f64>()
    }

    /// Flips `v` and refreshes the rates of every node sharing an edge with
    /// it; `touched` receives those nodes (with repeats).
    fn flip(&mut self, v: usize, touched: &mut Vec<usize>) {
        let now_infected = self.state[v] == 0;
        self.state[v] = u8::from(now_infected);
        if now_infected {
            self.infected += 1;
        } else {
            self.infected -= 1;
        }
        touched.clear();
        for &h in self.hg.edges_of(v) {
            if now_infected {
                self.edge_counts[h] += 1;
            } else {
                self.edge_counts[h] -= 1;
            }
            self.edge_values[h] = self.kernels.for_edge(self.hg, h).eval_int(self.edge_counts[h]);
            touched.extend_from_slice(self.hg.edge(h));
        }
        for &u in touched.iter() {
            self.rates[u] = self.node_rate(u);
        }
    }
}

/// Binary sum tree over per-node event rates.
struct EventSampler {
    leaves: usize,
    tree: Vec<f64>,
    delta: f64,
}

impl EventSampler {
    fn new(tracker: &RateTracker<'_>, delta: f64) -> Self {
        let n = tracker.state.len();
        let leaves = n.next_power_of_two().max(1);
        let mut sampler = EventSampler {
            leaves,
            tree: vec![0.0; 2 * leaves],
            delta,
        };
        for i in 0..n {
            sampler.tree[leaves + i] = sampler.event_rate(tracker, i);
        }
        for k in (1..leaves).rev() {
            sampler.tree[k] = sampler.tree[2 * k] + sampler.tree[2 * k + 1];
        }
        sampler
    }

    fn event_rate(&self, tracker: &RateTracker<'_>, i: usize) -> f64 {
        if tracker.state[i] == 1 {
            self.delta
        } else {
            tracker.rates[i]
        }
    }

    fn refresh(&mut self, tracker: &RateTracker<'_>, i: usize) {
        let mut k = self.leaves + i;
        self.tree[k] = self.event_rate(tracker, i);
        while k > 1 {
            k /= 2;
            self.tree[k] = self.tree[2 * k] + self.tree[2 * k + 1];
        }
    }

    fn total(&self) -> f64 {
        self.tree[1]
    }

    /// Returns `(node, waiting time)`, or `None` when nothing can happen.
    fn sample(&mut self, rng: &mut impl Rng) -> Option<(usize, f64)> {
        let total = self.total();
        if total <= 0.0 {
            return None;
        }
        let wait: f64 = rng.sample::<f64, _>(Exp1) / total;
        let mut target = rng.random::<f64>() * total;
        let mut k = 1;
        while k < self.leaves {
            let left = self.tree[2 * k];
            if target < left || self.tree[2 * k + 1] <= 0.0 {
                k *= 2;
            } else {
                target -= left;
                k = 2 * k + 1;
            }
        }
        let mut node = k - self.leaves;
        // guard against round-off selecting a zero-rate leaf
        if self.tree[k] <= 0.0 {
            node = (0..self.leaves)
                .rev()
                .find(|&i| self.tree[self.leaves + i] > 0.0)
                .expect("positive total implies a positive leaf");
        }
        Some((node, wait))
    }
}

/// Prevalence series of one run on the configuration's time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub times: Vec<f64>,
    pub prevalence: Vec<f64>,
    /// First time with no infected node; `None` if the run survives to `T`.
    pub extinction_time: Option<f64>,
}

fn initial_state(n: usize, i0: f64, rng: &mut impl Rng) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.random::<f64>() < i0)).collect()
}

/// Simulates one run: `X_j(0) ~ Bernoulli(i0)` independently, then the chosen
/// backend up to the horizon.
pub fn run_trajectory(cfg: &RunConfig<'_>) -> Result<RunResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.hg.node_count();
    let x0 = initial_state(n, cfg.i0, &mut rng);
    let times = cfg.time_grid();
    let mut tracker = RateTracker::new(cfg.hg, cfg.kernels, cfg.params.beta, &x0);
    let (prevalence, extinction_time) = match cfg.backend {
        Backend::Discretized => run_discretized(&mut tracker, cfg.params.delta, &times, &mut rng),
        Backend::EventDriven => run_event_driven(&mut tracker, cfg.params.delta, &times, &mut rng),
    };
    Ok(RunResult {
        times,
        prevalence,
        extinction_time,
    })
}

fn run_discretized(
    tracker: &mut RateTracker<'_>,
    delta: f64,
    times: &[f64],
    rng: &mut impl Rng,
) -> (Vec<f64>, Option<f64>) {
    let n = tracker.state.len() as f64;
    let mut prevalence = Vec::with_capacity(times.len());
    prevalence.push(tracker.infected as f64 / n);
    if tracker.infected == 0 {
        prevalence.resize(times.len(), 0.0);
        return (prevalence, Some(0.0));
    }
    let mut flips = Vec::new();
    let mut touched = Vec::new();
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        let recover = 1.0 - (-delta * dt).exp();
        flips.clear();
        for i in 0..tracker.state.len() {
            let xi = tracker.state[i];
            if flip_discretized(xi, tracker.rates[i], recover, dt, rng) != xi {
                flips.push(i);
            }
        }
        for &v in &flips {
            tracker.flip(v, &mut touched);
        }
        prevalence.push(tracker.infected as f64 / n);
        if tracker.infected == 0 {
            prevalence.resize(times.len(), 0.0);
            return (prevalence, Some(times[k]));
        }
    }
    (prevalence, None)
}

fn run_event_driven(
    tracker: &mut RateTracker<'_>,
    delta: f64,
    times: &[f64],
    rng: &mut impl Rng,
) -> (Vec<f64>, Option<f64>) {
    let n = tracker.state.len() as f64;
    let horizon = *times.last().unwrap();
    let mut prevalence = Vec::with_capacity(times.len());
    prevalence.push(tracker.infected as f64 / n);
    if tracker.infected == 0 {
        prevalence.resize(times.len(), 0.0);
        return (prevalence, Some(0.0));
    }
    let mut sampler = EventSampler::new(tracker, delta);
    let mut touched = Vec::new();
    let mut t = 0.0;
    let mut next = 1;
    loop {
        let Some((node, wait)) = sampler.sample(rng) else {
            // frozen: nothing can change any more
            let current = tracker.infected as f64 / n;
            prevalence.resize(times.len(), current);
            return (prevalence, None);
        };
        let t_event = t + wait;
        while next < times.len() && times[next] < t_event {
            prevalence.push(tracker.infected as f64 / n);
            next += 1;
        }
        if t_event > horizon {
            return (prevalence, None);
        }
        tracker.flip(node, &mut touched);
        sampler.refresh(tracker, node);
        for &u in &touched {
            sampler.refresh(tracker, u);
        }
        t = t_event;
        if tracker.infected == 0 {
            prevalence.resize(times.len(), 0.0);
            return (prevalence, Some(t));
        }
    }
}

/// Per-time ensemble statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    /// Mean prevalence over all runs.
    pub mean: Vec<f64>,
    /// Sample standard deviation of prevalence over runs (0 for one run).
    pub std_dev: Vec<f64>,
    pub env_lo: Vec<f64>,
    pub env_hi: Vec<f64>,
    /// Fraction of runs with at least one infected node.
    pub survival: Vec<f64>,
    pub extinction_times: Vec<Option<f64>>,
}

impl EnsembleSummary {
    pub fn runs(&self) -> usize {
        self.extinction_times.len()
    }

    /// `mean ± z·sd/√R` at grid index `k`.
    pub fn confidence_band(&self, k: usize, z: f64) -> (f64, f64) {
        let half = z * self.std_dev[k] / (self.runs() as f64).sqrt();
        (self.mean[k] - half, self.mean[k] + half)
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean.last().unwrap()
    }

    /// Writes `t,mean,env_lo,env_hi,survival`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "t,mean,env_lo,env_hi,survival")?;
        for k in 0..self.times.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.times[k],
                crate::format_float(self.mean[k]),
                crate::format_float(self.env_lo[k]),
                crate::format_float(self.env_hi[k]),
                self.survival[k]
            )?;
        }
        Ok(())
    }

    /// Writes `run,extinction_time`, leaving the field empty for runs that
    /// never went extinct.
    pub fn write_extinction_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "run,extinction_time")?;
        for (r, t) in self.extinction_times.iter().enumerate() {
            match t {
                Some(t) => writeln!(w, "{r},{t}")?,
                None => writeln!(w, "{r},")?,
            }
        }
        Ok(())
    }
}

/// Number of values dropped from each end of a sorted sample of size `runs`:
/// `⌈0.05 R⌉`, capped so at least one value remains.
pub fn envelope_trim(runs: usize) -> usize {
    let drop = (ENVELOPE_TAIL * runs as f64).ceil() as usize;
    drop.min(runs.saturating_sub(1) / 2)
}

/// Min and max of `values` after dropping the extreme tails.
pub fn trimmed_envelope(values: &mut [f64]) -> (f64, f64) {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let drop = envelope_trim(values.len());
    let kept = &values[drop..values.len() - drop];
    (kept[0], kept[kept.len() - 1])
}

/// Aggregates completed runs (all on the same grid) in run order.
pub fn summarize(runs: &[RunResult]) -> EnsembleSummary {
    assert!(!runs.is_empty());
    let times = runs[0].times.clone();
    let r = runs.len() as f64;
    let mut summary = EnsembleSummary {
        mean: Vec::with_capacity(times.len()),
        std_dev: Vec::with_capacity(times.len()),
        env_lo: Vec::with_capacity(times.len()),
        env_hi: Vec::with_capacity(times.len()),
        survival: Vec::with_capacity(times.len()),
        extinction_times: runs.iter().map(|run| run.extinction_time).collect(),
        times,
    };
    let mut column = Vec::with_capacity(runs.len());
    for k in 0..summary.times.len() {
        column.clear();
        column.extend(runs.iter().map(|run| run.prevalence[k]));
        let mean = column.iter().sum::<f64>() / r;
        let var = if runs.len() > 1 {
            column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0)
        } else {
            0.0
        };
        let alive = column.iter().filter(|&&v| v > 0.0).count() as f64 / r;
        let (lo, hi) = trimmed_envelope(&mut column);
        summary.mean.push(mean);
        summary.std_dev.push(var.sqrt());
        summary.env_lo.push(lo);
        summary.env_hi.push(hi);
        summary.survival.push(alive);
    }
    summary
}

/// Runs `runs` independent trajectories with seeds `base_seed + r` (in
/// parallel) and aggregates them deterministically.
pub fn run_ensemble(cfg: &RunConfig<'_>, runs: usize, base_seed: u64) -> Result<EnsembleSummary> {
    if runs == 0 {
        return Err(Error::Validation("an ensemble needs at least one run".into()));
    }
    cfg.validate()?;
    let results = (0..runs)
        .into_par_iter()
        .map(|r| {
            let run_cfg = RunConfig {
                seed: base_seed.wrapping_add(r as u64),
                ..*cfg
            };
            run_trajectory(&run_cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&results))
}
