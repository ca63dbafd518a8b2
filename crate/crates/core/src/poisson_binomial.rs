//! Distribution of the number of infected members of a hyperedge when
//! members are infected independently with probabilities `p_j`.
//!
//! [`pmf_dft`] evaluates the closed-form discrete Fourier representation
//!
//! ```text
//! Ψ(l) = 1/(k+1) Σ_{t=0..k} ω^{-tl} Π_j (1 - p_j + p_j ω^t),   ω = exp(2πi/(k+1))
//! ```
//!
//! directly in `O(k²)`. [`pmf_enum`] sums over all member subsets and is the
//! reference it is checked against.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::InfectionFunction;

/// Raw entries outside `[-ROUNDOFF_FLOOR, 1 + ROUNDOFF_FLOOR]` are treated as
/// a numerical failure rather than round-off.
pub const ROUNDOFF_FLOOR: f64 = 1e-9;

/// Largest member count [`pmf_enum`] accepts.
pub const ENUM_LIMIT: usize = 20;

/// `Ψ(l)` for `l = 0..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf(Vec<f64>);

impl Pmf {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, l: usize) -> f64 {
        self.0[l]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().enumerate().map(|(l, p)| l as f64 * p).sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

fn clamp_unit(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// The Fourier closed form evaluated at arbitrary real `p`, without any
/// cleanup. Outside `[0,1]^k` this is the polynomial extension of `Ψ`.
pub fn pmf_polynomial(p: &[f64]) -> Vec<f64> {
    let size = p.len() + 1;
    let roots: Vec<Complex64> = (0..size)
        .map(|m| Complex64::from_polar(1.0, TAU * m as f64 / size as f64))
        .collect();
    let transform: Vec<Complex64> = (0..size)
        .map(|t| {
            let w = roots[t];
            p.iter()
                .map(|&pj| Complex64::new(1.0 - pj, 0.0) + w * pj)
                .product()
        })
        .collect();
    (0..size)
        .map(|l| {
            let acc: f64 = transform
                .iter()
                .enumerate()
                .map(|(t, z)| {
                    // ω^{-tl} = conj(ω^{tl mod size}); only the real part is kept
                    let w = roots[(t * l) % size];
                    z.re * w.re + z.im * w.im
                })
                .sum();
            acc / size as f64
        })
        .collect()
}

fn cleanup(mut raw: Vec<f64>) -> Result<Pmf> {
    if let Some((l, v)) = raw
        .iter()
        .enumerate()
        .find(|(_, &v)| !(-ROUNDOFF_FLOOR..=1.0 + ROUNDOFF_FLOOR).contains(&v))
    {
        return Err(Error::Numerical(format!(
            "Poisson-binomial mass Ψ({l}) = {v} is outside [0, 1] beyond round-off"
        )));
    }
    raw.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    let total: f64 = raw.iter().sum();
    raw.iter_mut().for_each(|v| *v /= total);
    Ok(Pmf(raw))
}

/// Fourier evaluation with round-off cleanup: entries are clamped into `[0,1]`
/// and renormalized to sum to one. Member probabilities are clamped first.
///
/// Members with `p_j = 0` contribute a unit factor to every term and are left
/// out of the transform, so an uninfected hyperedge yields `Ψ = (1, 0, ...)`
/// exactly.
pub fn pmf_dft(p: &[f64]) -> Result<Pmf> {
    let active: Vec<f64> = p
        .iter()
        .copied()
        .map(clamp_unit)
        .filter(|&v| v > 0.0)
        .collect();
    let mut pmf = cleanup(pmf_polynomial(&active))?;
    pmf.0.resize(p.len() + 1, 0.0);
    Ok(pmf)
}

/// Exact subset enumeration, `O(2^k k)`; refuses `k > 20`.
pub fn pmf_enum(p: &[f64]) -> Result<Pmf> {
    let k = p.len();
    if k > ENUM_LIMIT {
        return Err(Error::Validation(format!(
            "subset enumeration is limited to {ENUM_LIMIT} members, got {k}"
        )));
    }
    let p: Vec<f64> = p.iter().copied().map(clamp_unit).collect();
    let mut out = vec![0.0; k + 1];
    for mask in 0u32..(1u32 << k) {
        let mut prob = 1.0;
        for (j, &pj) in p.iter().enumerate() {
            prob *= if mask & (1 << j) != 0 { pj } else { 1.0 - pj };
        }
        out[mask.count_ones() as usize] += prob;
    }
    Ok(Pmf(out))
}

/// `Σ_{l=1..k} f(l) Ψ(l)`, the expected kernel value on a hyperedge.
pub fn f_load(f: &InfectionFunction, p: &[f64]) -> Result<f64> {
    let pmf = pmf_dft(p)?;
    Ok(weigh(f, pmf.values()))
}

/// [`f_load`] inside `[0,1]^k`; outside it, the polynomial extension with no
/// cleanup. Used where the mean-field field is needed as a function on all of
/// `R^n` (finite differences through the origin).
pub fn f_load_extended(f: &InfectionFunction, p: &[f64]) -> Result<f64> {
    if p.iter().all(|v| (0.0..=1.0).contains(v)) {
        f_load(f, p)
    } else {
        Ok(weigh(f, &pmf_polynomial(p)))
    }
}

fn weigh(f: &InfectionFunction, pmf: &[f64]) -> f64 {
    pmf.iter()
        .enumerate()
        .skip(1)
        .map(|(l, psi)| f.eval_int(l) * psi)
        .sum()
}
