//! Acceptance suite: each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use hypersis::hypergraph::{comembership, generate_random};
use hypersis::meanfield::{jacobian_at_zero, rhs_integer_argument};
use hypersis::poisson_binomial::{pmf_dft, pmf_enum};
use hypersis::spectral::{evaluate_conditions, extinction_time_bound, lambda_max, names, survival_bound};
use hypersis::stochastic::run_ensemble;
use hypersis::{
    Backend, Hypergraph, InfectionFunction, Kernels, MeanField, MeanFieldVariant, ModelParams, RunConfig,
    SizeSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 400;
const DT: f64 = 0.05;
const RECIPE: [(usize, usize); 4] = [(2, 400), (3, 200), (4, 100), (5, 50)];
const RECIPE_SEED: u64 = 1;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn recipe(seed: u64) -> Hypergraph {
    generate_random(N, &SizeSpec::new(RECIPE.to_vec(), seed)).unwrap()
}

fn lambda_w(hg: &Hypergraph) -> f64 {
    lambda_max(comembership(hg).as_matrix(), 1e-10).unwrap()
}

fn mf_final(hg: &Hypergraph, kernels: &Kernels, params: ModelParams, variant: MeanFieldVariant, i0: f64, horizon: f64) -> Vec<f64> {
    let mf = MeanField::new(hg, kernels, params, variant).unwrap();
    let steps = (horizon / DT).round() as usize;
    mf.integrate(&vec![i0; hg.node_count()], DT, horizon, steps)
        .unwrap()
        .final_state()
        .to_vec()
}

fn ensemble_cfg<'a>(hg: &'a Hypergraph, kernels: &'a Kernels, beta: f64, backend: Backend) -> RunConfig<'a> {
    RunConfig {
        hg,
        kernels,
        params: ModelParams::new(beta, 1.0).unwrap(),
        i0: 0.5,
        horizon: 200.0,
        dt: DT,
        backend,
        seed: 0,
    }
}

fn pmf_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for k in 1..=12 {
        for _ in 0..1000 {
            let p: Vec<f64> = (0..k).map(|_| rng.random()).collect();
            let a = pmf_dft(&p).unwrap();
            let b = pmf_enum(&p).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    outcome(worst <= 1e-9, format!("max |dft - enum| = {worst:.3e} over 12000 vectors"))
}

fn jacobian_identity() -> Outcome {
    let kernels = [
        InfectionFunction::identity(),
        InfectionFunction::arctan(),
        InfectionFunction::log_one_plus(1.0).unwrap(),
        InfectionFunction::saturating_min(3).unwrap(),
    ];
    let params = ModelParams::new(0.3, 1.0).unwrap();
    let h = 1e-6;
    let n = 30;
    let mut worst = 0.0_f64;
    let mut analytic_mismatch = 0.0_f64;
    for seed in 0..20 {
        let hg = generate_random(n, &SizeSpec::new(vec![(2, 20), (3, 12), (4, 8), (5, 5)], seed)).unwrap();
        let w = comembership(&hg);
        for f in &kernels {
            let k = Kernels::Single(f.clone());
            let jac = jacobian_at_zero(&hg, &k, params).unwrap();
            for j in 0..n {
                let mut plus = vec![0.0; n];
                let mut minus = vec![0.0; n];
                plus[j] = h;
                minus[j] = -h;
                let gp = rhs_integer_argument(&hg, &k, params, &plus).unwrap();
                let gm = rhs_integer_argument(&hg, &k, params, &minus).unwrap();
                for i in 0..n {
                    let fd = (gp[i] - gm[i]) / (2.0 * h);
                    let diag = if i == j { params.delta } else { 0.0 };
                    let expected = params.beta * f.f_one() * w.count(i, j) as f64 - diag;
                    let err = (fd - expected).abs() / expected.abs().max(1e-6);
                    worst = worst.max(err);
                    analytic_mismatch = analytic_mismatch.max((jac.get(i, j) - expected).abs());
                }
            }
        }
    }
    outcome(
        worst <= 1e-4 && analytic_mismatch < 1e-12,
        format!("max relative FD error {worst:.3e}; assembled Jacobian deviation {analytic_mismatch:.1e}"),
    )
}

struct Setup {
    hg: Hypergraph,
    kernels: Kernels,
    beta_star: f64,
}

fn setup() -> Setup {
    let hg = recipe(RECIPE_SEED);
    let kernels = Kernels::Single(InfectionFunction::arctan());
    let report = evaluate_conditions(&hg, &kernels, ModelParams::new(0.0, 1.0).unwrap()).unwrap();
    let beta_star = report.critical_beta(names::MF_INTEGER).unwrap();
    Setup { hg, kernels, beta_star }
}

fn subcritical_decay(s: &Setup) -> Outcome {
    let beta = 0.8 * s.beta_star;
    let params = ModelParams::new(beta, 1.0).unwrap();
    let p = mf_final(&s.hg, &s.kernels, params, MeanFieldVariant::IntegerArgument, 0.5, 200.0);
    let max_p = p.iter().copied().fold(0.0, f64::max);
    let ens = run_ensemble(&ensemble_cfg(&s.hg, &s.kernels, beta, Backend::Discretized), 100, 3000).unwrap();
    let survival = *ens.survival.last().unwrap();
    outcome(
        max_p < 1e-4 && survival <= 0.05,
        format!("beta* = {:.5}; mf_integer max p(200) = {max_p:.2e}; exact survival(200) = {survival}", s.beta_star),
    )
}

fn supercritical_persistence(s: &Setup) -> Outcome {
    let beta = 3.0 * s.beta_star;
    let params = ModelParams::new(beta, 1.0).unwrap();
    let p = mf_final(&s.hg, &s.kernels, params, MeanFieldVariant::IntegerArgument, 0.5, 200.0);
    let prevalence = p.iter().sum::<f64>() / N as f64;
    let ens = run_ensemble(&ensemble_cfg(&s.hg, &s.kernels, beta, Backend::Discretized), 100, 4000).unwrap();
    let exact = ens.final_mean();
    outcome(
        prevalence > 0.1 && exact > 0.05,
        format!("mf_integer prevalence(200) = {prevalence:.4}; exact mean(200) = {exact:.4}"),
    )
}

fn threshold_ratio(s: &Setup) -> Outcome {
    let report = evaluate_conditions(&s.hg, &s.kernels, ModelParams::new(0.05, 1.0).unwrap()).unwrap();
    let integer = report.critical_beta(names::MF_INTEGER).unwrap();
    let commuted = report.critical_beta(names::MF_COMMUTED).unwrap();
    let ratio = integer / commuted;
    let analytic = 4.0 / PI;
    let measured = 0.0629 / 0.0494;
    let rel = (measured - analytic).abs() / analytic;
    outcome(
        (ratio - analytic).abs() <= 1e-12 && rel <= 1e-3,
        format!("critical ratio {ratio:.14} vs 4/pi; reported pair ratio {measured:.5} off by {:.3}%", 100.0 * rel),
    )
}

fn lambda_range() -> Outcome {
    let values: Vec<f64> = (0..20).map(|seed| lambda_w(&recipe(100 + seed))).collect();
    let lo = values.iter().copied().fold(f64::MAX, f64::min);
    let hi = values.iter().copied().fold(f64::MIN, f64::max);
    outcome(lo >= 15.0 && hi <= 26.0, format!("lambda(W) over 20 seeds in [{lo:.3}, {hi:.3}]"))
}

fn survival_and_extinction_bounds(s: &Setup) -> Outcome {
    let beta = 0.8 * s.beta_star;
    let lambda = lambda_w(&s.hg);
    let f1 = InfectionFunction::arctan().f_one();
    let runs = 100;
    let ens = run_ensemble(&ensemble_cfg(&s.hg, &s.kernels, beta, Backend::Discretized), runs, 3000).unwrap();
    let mut worst_excess = f64::MIN;
    for (t, &observed) in ens.times.iter().zip(&ens.survival) {
        let bound = survival_bound(N, 0.5, beta, f1, lambda, 1.0, *t);
        let q = bound.min(1.0);
        let se = (q * (1.0 - q) / runs as f64).sqrt();
        worst_excess = worst_excess.max(observed - bound - 3.0 * se);
    }
    let horizon = *ens.times.last().unwrap();
    let censored = ens.extinction_times.iter().filter(|t| t.is_none()).count();
    let times: Vec<f64> = ens.extinction_times.iter().map(|t| t.unwrap_or(horizon)).collect();
    let mean = times.iter().sum::<f64>() / runs as f64;
    let sd = (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (runs as f64 - 1.0)).sqrt();
    let bound = extinction_time_bound(N, beta, f1, lambda, 1.0).unwrap();
    let ok_time = censored == 0 && mean <= bound + 3.0 * sd / (runs as f64).sqrt();
    outcome(
        worst_excess <= 0.0 && ok_time,
        format!(
            "max survival excess over bound+3SE = {worst_excess:.3e}; mean extinction {mean:.3} vs bound {bound:.3} ({censored} censored)"
        ),
    )
}

fn linear_equivalence() -> Outcome {
    let hg = generate_random(60, &SizeSpec::new(vec![(2, 60), (3, 30), (4, 15), (5, 8)], 77)).unwrap();
    let k = Kernels::Single(InfectionFunction::identity());
    let params = ModelParams::new(0.08, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let p0: Vec<f64> = (0..60).map(|_| rng.random()).collect();
    let a = MeanField::new(&hg, &k, params, MeanFieldVariant::IntegerArgument)
        .unwrap()
        .integrate(&p0, DT, 50.0, 1)
        .unwrap();
    let b = MeanField::new(&hg, &k, params, MeanFieldVariant::ExpectationCommuted)
        .unwrap()
        .integrate(&p0, DT, 50.0, 1)
        .unwrap();
    let sup = a
        .states
        .iter()
        .zip(&b.states)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max);
    outcome(sup <= 1e-12, format!("sup-norm gap over [0, 50] = {sup:.3e}"))
}

/// Per-size kernels of the collective contagion preset: identity on pairs,
/// `(k-1)·1(x >= k-1)` on edges of size `k+1`.
fn collective_kernels() -> Kernels {
    Kernels::PerFamily(vec![
        InfectionFunction::identity(),
        InfectionFunction::threshold(1, 1.0).unwrap(),
        InfectionFunction::threshold(2, 2.0).unwrap(),
        InfectionFunction::threshold(3, 3.0).unwrap(),
    ])
}

const COLLECTIVE_BETA: f64 = 5.0;

fn collective_freeze() -> Outcome {
    let hg = generate_random(N, &SizeSpec::new(vec![(4, 200), (5, 100)], RECIPE_SEED))
        .unwrap()
        .partition_by_size();
    let kernels = collective_kernels();
    let params = ModelParams::new(COLLECTIVE_BETA, 1.0).unwrap();
    let i0 = 0.01;
    let commuted = MeanField::new(&hg, &kernels, params, MeanFieldVariant::ExpectationCommuted)
        .unwrap()
        .integrate(&vec![i0; N], DT, 100.0, 1)
        .unwrap();
    let mut gap = 0.0_f64;
    for (t, prev) in commuted.times.iter().zip(commuted.prevalence()) {
        gap = gap.max((prev - i0 * (-t).exp()).abs());
    }
    let integer = MeanField::new(&hg, &kernels, params, MeanFieldVariant::IntegerArgument)
        .unwrap()
        .integrate(&vec![i0; N], DT, 100.0, 2000)
        .unwrap();
    let final_integer = *integer.prevalence().last().unwrap();
    let final_commuted = *commuted.prevalence().last().unwrap();
    outcome(
        gap <= 1e-3 && final_integer > final_commuted,
        format!(
            "beta = {COLLECTIVE_BETA}: commuted vs i0*exp(-t) gap {gap:.2e}; prevalence(100) integer {final_integer:.4} vs commuted {final_commuted:.2e}"
        ),
    )
}

fn backend_cross_validation(s: &Setup) -> Outcome {
    let beta = 0.8 * s.beta_star;
    let runs = 100;
    let a = run_ensemble(&ensemble_cfg(&s.hg, &s.kernels, beta, Backend::Discretized), runs, 5000).unwrap();
    let b = run_ensemble(&ensemble_cfg(&s.hg, &s.kernels, beta, Backend::EventDriven), runs, 5000).unwrap();
    let mut disjoint = 0;
    let mut widest_gap = 0.0_f64;
    for k in 0..a.times.len() {
        let (alo, ahi) = a.confidence_band(k, 1.96);
        let (blo, bhi) = b.confidence_band(k, 1.96);
        if alo > bhi || blo > ahi {
            disjoint += 1;
            widest_gap = widest_gap.max((alo - bhi).max(blo - ahi));
        }
    }
    outcome(
        disjoint == 0,
        format!("{disjoint} of {} grid times with disjoint 95% bands (largest gap {widest_gap:.2e})", a.times.len()),
    )
}

fn main() -> ExitCode {
    let s = setup();
    let criteria: Vec<Criterion<'_>> = vec![
        ("poisson-binomial oracle equivalence", Box::new(pmf_oracle)),
        ("jacobian identity at the origin", Box::new(jacobian_identity)),
        ("subcritical decay", Box::new(|| subcritical_decay(&s))),
        ("supercritical persistence", Box::new(|| supercritical_persistence(&s))),
        ("arctan threshold ratio", Box::new(|| threshold_ratio(&s))),
        ("lambda(W) plausibility", Box::new(lambda_range)),
        ("survival and extinction-time bounds", Box::new(|| survival_and_extinction_bounds(&s))),
        ("model equivalence for identity kernel", Box::new(linear_equivalence)),
        ("collective contagion freeze", Box::new(collective_freeze)),
        ("backend cross-validation", Box::new(|| backend_cross_validation(&s))),
    ];
    let mut failures = 0;
    for (idx, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = check();
        if !result.passed {
            failures += 1;
        }
        println!(
            "{} [{:>2}] {name}: {} ({:.1}s)",
            if result.passed { "PASS" } else { "FAIL" },
            idx + 1,
            result.detail,
            started.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
