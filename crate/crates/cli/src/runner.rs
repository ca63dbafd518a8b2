//! Executes models at one parameter point and writes their outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hypersis::meanfield::Trajectory;
use hypersis::stochastic::run_ensemble;
use hypersis::{
    Backend, EnsembleSummary, Error, Hypergraph, Kernels, MeanField, MeanFieldVariant, ModelParams, Result,
    RunConfig, ThresholdReport,
};

use crate::config::Model;

/// One `(β, i0)` point together with the run settings.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub params: ModelParams,
    pub i0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub runs: usize,
    pub seed: u64,
    pub backend: Backend,
}

pub enum ModelOutput {
    Ensemble(EnsembleSummary),
    MeanField(Trajectory),
}

impl ModelOutput {
    pub fn final_prevalence(&self) -> f64 {
        match self {
            ModelOutput::Ensemble(s) => s.final_mean(),
            ModelOutput::MeanField(t) => *t.prevalence().last().expect("nonempty trajectory"),
        }
    }
}

/// Coefficient of the linear upper-bound system: the largest `max_x f(x)/x`
/// over the kernels in use.
fn linear_coefficient(hg: &Hypergraph, kernels: &Kernels) -> Result<f64> {
    let mut c = 0.0_f64;
    for h in 0..hg.edge_count() {
        c = c.max(kernels.for_edge(hg, h).c_f(hg.edge(h).len())?);
    }
    if c > 0.0 {
        Ok(c)
    } else {
        Err(Error::Domain("the linear bound needs at least one hyperedge".into()))
    }
}

pub fn run_model(
    hg: &Hypergraph,
    kernels: &Kernels,
    model: Model,
    point: &Point,
    stride: usize,
) -> Result<ModelOutput> {
    let variant = match model {
        Model::Exact => {
            let cfg = RunConfig {
                hg,
                kernels,
                params: point.params,
                i0: point.i0,
                horizon: point.horizon,
                dt: point.dt,
                backend: point.backend,
                seed: point.seed,
            };
            return Ok(ModelOutput::Ensemble(run_ensemble(&cfg, point.runs, point.seed)?));
        }
        Model::MfInteger => MeanFieldVariant::IntegerArgument,
        Model::MfCommuted => MeanFieldVariant::ExpectationCommuted,
        Model::MfLinearBound => MeanFieldVariant::LinearBound {
            c: linear_coefficient(hg, kernels)?,
        },
    };
    let mf = MeanField::new(hg, kernels, point.params, variant)?;
    let p0 = vec![point.i0; hg.node_count()];
    Ok(ModelOutput::MeanField(mf.integrate(&p0, point.dt, point.horizon, stride)?))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `<model>.csv` (and `exact_extinction.csv` for the ensemble) into
/// `dir`.
pub fn write_model_output(dir: &Path, model: Model, output: &ModelOutput, per_node: bool) -> Result<()> {
    let path = dir.join(format!("{}.csv", model.name()));
    let mut w = create(&path)?;
    match output {
        ModelOutput::Ensemble(s) => {
            s.write_csv(&mut w)?;
            let mut ext = create(&dir.join("exact_extinction.csv"))?;
            s.write_extinction_csv(&mut ext)?;
            ext.flush()?;
        }
        ModelOutput::MeanField(t) => t.write_csv(&mut w, per_node)?,
    }
    w.flush()?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// `#`-prefixed metadata lines with `λ(W)` and every finite critical β.
pub fn threshold_metadata(report: &ThresholdReport) -> Vec<String> {
    let mut lines = vec![format!("# lambda_W={}", report.lambda_w)];
    for c in &report.conditions {
        if let Some(b) = c.critical_beta {
            lines.push(format!("# critical_beta_{}={b}", c.name));
        }
    }
    lines
}
