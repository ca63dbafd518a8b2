//! Deterministic mean-field systems for the expected infection probabilities
//! `p_i(t)` and an explicit Euler integrator.
//!
//! Three right-hand sides are provided:
//!
//! * integer-argument `g`: `β Σ_{h∋i} Σ_l f(l) Ψ(h,l) (1 - p_i) - δ p_i`, where
//!   `Ψ(h,·)` is the Poisson-binomial law of the members of `h` (node `i`
//!   included);
//! * expectation-commuted `ĝ`: `β Σ_{h∋i} f(Σ_{j∈h} p_j) (1 - p_i) - δ p_i`;
//! * linear bound `g̃`: `β c Σ_j W_ij p_j (1 - p_i) - δ p_i`.
//!
//! With per-family kernels the integer-argument field becomes the multi-type
//! system: each hyperedge uses its own family's kernel.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{comembership, family_comembership, Hypergraph};
use crate::kernel::{InfectionFunction, Kernels};
use crate::matrix::{Matrix, StorageKind};
use crate::poisson_binomial::f_load_extended;

/// Default Euler step.
pub const DEFAULT_DT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Infection strength.
    pub beta: f64,
    /// Recovery rate.
    pub delta: f64,
}

impl ModelParams {
    /// Accepts any finite nonnegative pair; see [`ModelParams::require_positive`].
    pub fn new(beta: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("beta", beta), ("delta", delta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Validation(format!(
                    "{name} must be a finite nonnegative number, got {v}"
                )));
            }
        }
        Ok(ModelParams { beta, delta })
    }

    pub fn require_positive(&self) -> Result<()> {
        if self.beta > 0.0 && self.delta > 0.0 {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "beta and delta must be positive, got beta = {}, delta = {}",
                self.beta, self.delta
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MeanFieldVariant {
    IntegerArgument,
    ExpectationCommuted,
    /// Linear upper-bound system with coefficient `c` (usually `c_f`).
    LinearBound { c: f64 },
}

/// A right-hand side bound to its hypergraph, kernels and parameters.
#[derive(Debug, Clone)]
pub struct MeanField<'a> {
    hg: &'a Hypergraph,
    kernels: &'a Kernels,
    params: ModelParams,
    variant: MeanFieldVariant,
    comembership: Option<Matrix>,
}

impl<'a> MeanField<'a> {
    pub fn new(
        hg: &'a Hypergraph,
        kernels: &'a Kernels,
        params: ModelParams,
        variant: MeanFieldVariant,
    ) -> Result<Self> {
        kernels.validate(hg)?;
        let comembership = match variant {
            MeanFieldVariant::IntegerArgument => None,
            MeanFieldVariant::ExpectationCommuted => {
                if !kernels.has_continuous_extension() {
                    return Err(Error::Unsupported(
                        "the expectation-commuted model needs kernels defined on the reals"
                            .into(),
                    ));
                }
                None
            }
            MeanFieldVariant::LinearBound { c } => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(Error::Validation(format!(
                        "linear-bound coefficient must be positive, got {c}"
                    )));
                }
                Some(comembership(hg).into_matrix())
            }
        };
        Ok(MeanField {
            hg,
            kernels,
            params,
            variant,
            comembership,
        })
    }

    pub fn node_count(&self) -> usize {
        self.hg.node_count()
    }

    pub fn variant(&self) -> MeanFieldVariant {
        self.variant
    }

    /// Writes the field at `p` into `out`.
    pub fn eval_into(&self, p: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.hg.node_count();
        assert_eq!(p.len(), n, "state length must match node count");
        assert_eq!(out.len(), n);
        let beta = self.params.beta;
        match self.variant {
            MeanFieldVariant::LinearBound { c } => {
                let w = self.comembership.as_ref().expect("built in new");
                w.matvec_into(p, out);
                for (o, &pi) in out.iter_mut().zip(p) {
                    *o *= beta * c * (1.0 - pi);
                }
            }
            MeanFieldVariant::IntegerArgument | MeanFieldVariant::ExpectationCommuted => {
                out.iter_mut().for_each(|o| *o = 0.0);
                let mut members = Vec::new();
                for (h, edge) in self.hg.edges().iter().enumerate() {
                    let f = self.kernels.for_edge(self.hg, h);
                    members.clear();
                    members.extend(edge.iter().map(|&j| p[j]));
                    let load = match self.variant {
                        MeanFieldVariant::IntegerArgument => f_load_extended(f, &members)?,
                        _ => f.eval_real(members.iter().sum())?,
                    };
                    if load == 0.0 {
                        continue;
                    }
                    for &i in edge {
                        out[i] += beta * load * (1.0 - p[i]);
                    }
                }
            }
        }
        for (o, &pi) in out.iter_mut().zip(p) {
            *o -= self.params.delta * pi;
        }
        Ok(())
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; p.len()];
        self.eval_into(p, &mut out)?;
        Ok(out)
    }

    /// Explicit Euler from `p0`; see [`integrate`].
    pub fn integrate(&self, p0: &[f64], dt: f64, horizon: f64, stride: usize) -> Result<Trajectory> {
        integrate(|p, out| self.eval_into(p, out), p0, dt, horizon, stride)
    }
}

/// Integer-argument field `g(P)`.
pub fn rhs_integer_argument(
    hg: &Hypergraph,
    kernels: &Kernels,
    params: ModelParams,
    p: &[f64],
) -> Result<Vec<f64>> {
    MeanField::new(hg, kernels, params, MeanFieldVariant::IntegerArgument)?.eval(p)
}

/// Expectation-commuted field `ĝ(P)`.
pub fn rhs_expectation_commuted(
    hg: &Hypergraph,
    kernels: &Kernels,
    params: ModelParams,
    p: &[f64],
) -> Result<Vec<f64>> {
    MeanField::new(hg, kernels, params, MeanFieldVariant::ExpectationCommuted)?.eval(p)
}

/// Linear upper-bound field `g̃(P)` from a co-membership (or any symmetric
/// nonnegative) matrix.
pub fn rhs_linear_bound(w: &Matrix, c: f64, params: ModelParams, p: &[f64]) -> Vec<f64> {
    let wp = w.matvec(p);
    wp.iter()
        .zip(p)
        .map(|(&s, &pi)| params.beta * c * s * (1.0 - pi) - params.delta * pi)
        .collect()
}

/// Multi-type integer-argument field; `kernels[s - 1]` applies to family `s`.
pub fn rhs_multitype(
    hg: &Hypergraph,
    kernels: &[InfectionFunction],
    params: ModelParams,
    p: &[f64],
) -> Result<Vec<f64>> {
    let kernels = Kernels::PerFamily(kernels.to_vec());
    rhs_integer_argument(hg, &kernels, params, p)
}

/// `∇g(0) = β Σ_s f_s(1) W^(s) - δ I` (a single kernel gives `β f(1) W - δ I`).
pub fn jacobian_at_zero(hg: &Hypergraph, kernels: &Kernels, params: ModelParams) -> Result<Matrix> {
    kernels.validate(hg)?;
    let n = hg.node_count();
    let kind = StorageKind::for_size(n);
    let weighted = match kernels {
        Kernels::Single(f) => comembership(hg).as_matrix().scaled(params.beta * f.f_one()),
        Kernels::PerFamily(list) => {
            let ws = family_comembership(hg)?;
            let terms: Vec<(f64, &Matrix)> = ws
                .iter()
                .enumerate()
                .map(|(s, w)| (params.beta * list[s].f_one(), w.as_matrix()))
                .collect();
            Matrix::weighted_sum(n, &terms, kind)
        }
    };
    Ok(weighted.shifted_diagonal(-params.delta))
}

/// Time grid plus strided state snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least one snapshot")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one snapshot")
    }

    /// `(1/n) Σ_i p_i` per snapshot.
    pub fn prevalence(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| s.iter().sum::<f64>() / s.len() as f64)
            .collect()
    }

    /// Writes `t,prevalence`, or `t,p_0,...,p_{n-1}` when `per_node`.
    pub fn write_csv(&self, mut w: impl Write, per_node: bool) -> Result<()> {
        if per_node {
            let n = self.states.first().map_or(0, Vec::len);
            let cols: Vec<String> = (0..n).map(|i| format!("p_{i}")).collect();
            writeln!(w, "t,{}", cols.join(","))?;
            for (t, s) in self.times.iter().zip(&self.states) {
                let vals: Vec<String> = s.iter().copied().map(crate::format_float).collect();
                writeln!(w, "{t},{}", vals.join(","))?;
            }
        } else {
            writeln!(w, "t,prevalence")?;
            for (t, prev) in self.times.iter().zip(self.prevalence()) {
                writeln!(w, "{t},{}", crate::format_float(prev))?;
            }
        }
        Ok(())
    }
}

/// Explicit Euler `P <- clamp(P + dt * rhs(P), 0, 1)` up to `horizon`.
///
/// Snapshots are taken at `t = 0`, every `stride` steps, and at the final
/// time. When `horizon` is not a multiple of `dt` the last step is shortened
/// to land on `horizon` exactly.
pub fn integrate(
    mut rhs: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
    p0: &[f64],
    dt: f64,
    horizon: f64,
    stride: usize,
) -> Result<Trajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Validation(format!("dt must be positive, got {dt}")));
    }
    if !(horizon.is_finite() && horizon >= dt) {
        return Err(Error::Validation(format!(
            "horizon {horizon} must be finite and at least dt = {dt}"
        )));
    }
    if stride == 0 {
        return Err(Error::Validation("stride must be positive".into()));
    }
    if let Some((i, v)) = p0.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Validation(format!(
            "initial probability p_{i} = {v} is outside [0, 1]"
        )));
    }

    let full_steps = (horizon / dt + 1e-9).floor() as usize;
    let remainder = horizon - full_steps as f64 * dt;
    let partial = remainder > 1e-9 * dt;
    let total_steps = full_steps + usize::from(partial);

    let mut p = p0.to_vec();
    let mut dp = vec![0.0; p.len()];
    let mut times = vec![0.0];
    let mut states = vec![p.clone()];

    for step in 1..=total_steps {
        let (h, t) = if step > full_steps {
            (remainder, horizon)
        } else {
            (dt, step as f64 * dt)
        };
        rhs(&p, &mut dp).map_err(|e| match e {
            Error::Numerical(reason) => Error::Integration { step, reason },
            other => other,
        })?;
        for (i, (pi, &d)) in p.iter_mut().zip(&dp).enumerate() {
            let next = *pi + h * d;
            if !next.is_finite() {
                return Err(Error::Integration {
                    step,
                    reason: format!("component {i} became {next}"),
                });
            }
            *pi = next.clamp(0.0, 1.0);
        }
        if step % stride == 0 || step == total_steps {
            times.push(t);
            states.push(p.clone());
        }
    }
    Ok(Trajectory { times, states })
}
