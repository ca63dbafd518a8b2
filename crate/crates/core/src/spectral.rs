//! Largest eigenvalues of co-membership matrices and the stability
//! conditions built from them.
//!
//! Every condition has the form `β·c·λ/δ < 1` for some coefficient `c` and
//! matrix eigenvalue `λ`; they are reported side by side so the models can be
//! compared, together with the critical `β = δ/(c·λ)` at which each one
//! becomes an equality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{comembership, family_comembership, Hypergraph};
use crate::kernel::{InfectionFunction, Kernels};
use crate::matrix::{Matrix, StorageKind};
use crate::meanfield::ModelParams;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100_000;
const RESTART_SEED: u64 = 0x5eed;

/// Largest eigenvalue of a symmetric nonnegative matrix by power iteration
/// from the all-ones vector.
pub fn lambda_max(m: &Matrix, tol: f64) -> Result<f64> {
    lambda_max_capped(m, tol, MAX_ITERATIONS)
}

/// [`lambda_max`] with an explicit iteration cap (per attempt).
///
/// Iterates `x ← Mx/‖Mx‖` and stops once the estimate `‖Mx‖` changes by less
/// than `tol` relative. For a nonnegative symmetric matrix this estimate
/// converges to the spectral radius, which is the largest eigenvalue, even
/// when `-λ` is also an eigenvalue. If the first attempt stalls, one restart
/// is made from a fixed-seed random vector.
pub fn lambda_max_capped(m: &Matrix, tol: f64, max_iterations: usize) -> Result<f64> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
    }
    let n = m.order();
    if n == 0 {
        return Err(Error::Validation("matrix has order 0".into()));
    }
    if !m.all_entries(f64::is_finite) {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }
    if !m.all_entries(|v| v >= 0.0) {
        return Err(Error::Validation("matrix has negative entries".into()));
    }
    if !m.is_symmetric() {
        return Err(Error::Validation("matrix is not symmetric".into()));
    }
    if m.is_zero() {
        return Ok(0.0);
    }

    let start = vec![1.0; n];
    match power_iteration(m, start, tol, max_iterations) {
        Ok(v) => Ok(v),
        Err(first) => {
            log::debug!("power iteration stalled ({first:?}); restarting from a random vector");
            let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
            let start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.5).collect();
            power_iteration(m, start, tol, max_iterations).map_err(|last| Error::NoConvergence {
                iterations: 2 * max_iterations,
                estimate: last,
            })
        }
    }
}

/// Returns the converged estimate, or the last estimate on failure.
fn power_iteration(m: &Matrix, mut x: Vec<f64>, tol: f64, cap: usize) -> Result<f64, f64> {
    normalize(&mut x).ok_or(f64::NAN)?;
    let mut y = vec![0.0; x.len()];
    let mut previous = f64::NAN;
    for _ in 0..cap {
        m.matvec_into(&x, &mut y);
        let Some(estimate) = normalize(&mut y) else {
            return Err(previous);
        };
        if (estimate - previous).abs() < tol * estimate {
            return Ok(estimate);
        }
        previous = estimate;
        std::mem::swap(&mut x, &mut y);
    }
    Err(previous)
}

fn normalize(x: &mut [f64]) -> Option<f64> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return None;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    Some(norm)
}

/// Condition names as they appear in reports.
pub mod names {
    /// Exact process, mean decay: coefficient `max_x f(x)/x`.
    pub const EXACT_MEAN_DECAY: &str = "exact_mean_decay";
    /// Integer-argument mean field: coefficient `f(1)`.
    pub const MF_INTEGER: &str = "mf_integer";
    /// Integer-argument mean field, threshold kernel: coefficient `c2/c1`.
    pub const MF_INTEGER_THRESHOLD: &str = "mf_integer_threshold";
    /// Expectation-commuted mean field: coefficient `f'(0)`.
    pub const MF_COMMUTED: &str = "mf_commuted";
    /// Multi-type integer-argument mean field on `Σ_s f_s(1) W^(s)`.
    pub const MULTI_MF_INTEGER: &str = "multi_mf_integer";
    /// Multi-type threshold kernels on `Σ_s (c2_s/c1_s) W^(s)`.
    pub const MULTI_MF_INTEGER_THRESHOLD: &str = "multi_mf_integer_threshold";
}

/// Whether a satisfied condition guarantees local or global stability of
/// the disease-free state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Local,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    /// Kernel-derived multiplier; `1` for multi-type conditions, whose
    /// weights are folded into the matrix.
    pub coefficient: Option<f64>,
    /// `β·coefficient·lambda/δ`.
    pub value: Option<f64>,
    pub satisfied: Option<bool>,
    /// `δ/(coefficient·lambda)`; `null` when that product is zero, i.e. the
    /// condition holds for every β.
    pub critical_beta: Option<f64>,
    pub scope: Option<Scope>,
    /// Eigenvalue the condition uses.
    pub lambda: Option<f64>,
    pub evaluable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl Condition {
    fn evaluated(name: &str, coefficient: f64, lambda: f64, scope: Scope, params: ModelParams) -> Self {
        let value = params.beta * coefficient * lambda / params.delta;
        let slope = coefficient * lambda;
        Condition {
            name: name.into(),
            coefficient: Some(coefficient),
            value: Some(value),
            satisfied: Some(value < 1.0),
            critical_beta: (slope > 0.0).then(|| params.delta / slope),
            scope: Some(scope),
            lambda: Some(lambda),
            evaluable: true,
            reason: None,
        }
    }

    fn not_evaluable(name: &str, reason: impl Into<String>) -> Self {
        Condition {
            name: name.into(),
            coefficient: None,
            value: None,
            satisfied: None,
            critical_beta: None,
            scope: None,
            lambda: None,
            evaluable: false,
            reason: Some(reason.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    /// Largest eigenvalue of the full co-membership matrix.
    #[serde(rename = "lambda_W")]
    pub lambda_w: f64,
    pub beta: f64,
    pub delta: f64,
    pub conditions: Vec<Condition>,
}

impl ThresholdReport {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Critical β of an evaluable condition.
    pub fn critical_beta(&self, name: &str) -> Option<f64> {
        self.condition(name).and_then(|c| c.critical_beta)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn is_concave(f: &InfectionFunction, max_size: usize) -> bool {
    f.is_declared_concave() || f.verify_concavity(max_size).is_ok()
}

/// Evaluates every stability condition that applies to the kernel setup.
///
/// Single kernels get the exact-process, integer-argument and commuted
/// conditions on `λ(W)`; per-family kernels get the multi-type conditions.
/// Conditions whose kernel metadata is missing are kept in the report and
/// marked not evaluable.
pub fn evaluate_conditions(hg: &Hypergraph, kernels: &Kernels, params: ModelParams) -> Result<ThresholdReport> {
    if params.delta <= 0.0 {
        return Err(Error::Validation(format!(
            "conditions need delta > 0, got {}",
            params.delta
        )));
    }
    kernels.validate(hg)?;
    let lambda_w = lambda_max(comembership(hg).as_matrix(), DEFAULT_TOLERANCE)?;
    let conditions = match kernels {
        Kernels::Single(f) => single_conditions(hg, f, lambda_w, params),
        Kernels::PerFamily(list) => multi_conditions(hg, list, params)?,
    };
    Ok(ThresholdReport {
        lambda_w,
        beta: params.beta,
        delta: params.delta,
        conditions,
    })
}

fn single_conditions(hg: &Hypergraph, f: &InfectionFunction, lambda: f64, params: ModelParams) -> Vec<Condition> {
    use names::*;
    let k = hg.max_edge_size();
    let mut out = Vec::with_capacity(4);

    out.push(match f.c_f(k) {
        Ok(c) => Condition::evaluated(EXACT_MEAN_DECAY, c, lambda, Scope::Global, params),
        Err(e) => Condition::not_evaluable(EXACT_MEAN_DECAY, e.to_string()),
    });

    let scope = if is_concave(f, k.max(1)) {
        Scope::Global
    } else {
        Scope::Local
    };
    out.push(Condition::evaluated(MF_INTEGER, f.f_one(), lambda, scope, params));

    out.push(match f.threshold_ratio() {
        Some(ratio) => Condition::evaluated(MF_INTEGER_THRESHOLD, ratio, lambda, Scope::Global, params),
        None => Condition::not_evaluable(MF_INTEGER_THRESHOLD, format!("kernel {f} is not a threshold kernel")),
    });

    out.push(match f.fprime_zero() {
        Ok(d) => Condition::evaluated(MF_COMMUTED, d, lambda, Scope::Local, params),
        Err(e) => Condition::not_evaluable(MF_COMMUTED, e.to_string()),
    });
    out
}

fn multi_conditions(hg: &Hypergraph, kernels: &[InfectionFunction], params: ModelParams) -> Result<Vec<Condition>> {
    use names::*;
    let per_family = family_comembership(hg)?;
    let kind = StorageKind::for_size(hg.node_count());
    // families without edges contribute nothing and impose no requirement
    let present: Vec<(&InfectionFunction, &Matrix, usize)> = per_family
        .iter()
        .enumerate()
        .filter(|(_, w)| !w.as_matrix().is_zero())
        .map(|(s, w)| {
            let size = hg
                .edges()
                .iter()
                .enumerate()
                .filter(|&(h, _)| hg.family_of(h) == Some(s as u32 + 1))
                .map(|(_, e)| e.len())
                .max()
                .unwrap_or(1);
            (&kernels[s], w.as_matrix(), size)
        })
        .collect();

    let weighted = |weight: &dyn Fn(&InfectionFunction) -> f64| -> Result<f64> {
        let terms: Vec<(f64, &Matrix)> = present.iter().map(|(f, w, _)| (weight(f), *w)).collect();
        lambda_max(&Matrix::weighted_sum(hg.node_count(), &terms, kind), DEFAULT_TOLERANCE)
    };

    let mut out = Vec::with_capacity(2);
    let scope = if present.iter().all(|(f, _, size)| is_concave(f, *size)) {
        Scope::Global
    } else {
        Scope::Local
    };
    let lambda = weighted(&|f| f.f_one())?;
    out.push(Condition::evaluated(MULTI_MF_INTEGER, 1.0, lambda, scope, params));

    let all_threshold = present
        .iter()
        .all(|(f, _, _)| matches!(f.threshold_params(), Some((c1, _)) if c1 >= 2));
    out.push(if all_threshold {
        let lambda = weighted(&|f| f.threshold_ratio().expect("checked threshold"))?;
        Condition::evaluated(MULTI_MF_INTEGER_THRESHOLD, 1.0, lambda, Scope::Global, params)
    } else {
        Condition::not_evaluable(
            MULTI_MF_INTEGER_THRESHOLD,
            "every family needs a threshold kernel with c1 >= 2",
        )
    });
    Ok(out)
}

/// Upper bound on the probability that any node is still infected at `t`:
/// `n·i0·exp((β·f1·λ − δ)·t)`.
pub fn survival_bound(n: usize, i0: f64, beta: f64, f1: f64, lambda_w: f64, delta: f64, t: f64) -> f64 {
    n as f64 * i0 * ((beta * f1 * lambda_w - delta) * t).exp()
}

/// Upper bound on the expected extinction time, `(1 + ln n)/(δ − β·f1·λ)`.
/// Requires a strictly subcritical setting.
pub fn extinction_time_bound(n: usize, beta: f64, f1: f64, lambda_w: f64, delta: f64) -> Result<f64> {
    let margin = delta - beta * f1 * lambda_w;
    if margin.is_nan() || margin <= 0.0 {
        return Err(Error::Domain(format!(
            "extinction-time bound needs delta > beta·f(1)·lambda; margin is {margin}"
        )));
    }
    Ok((1.0 + (n as f64).ln()) / margin)
}
