//! JSON experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use hypersis::hypergraph::{self, generate_random};
use hypersis::{Backend, Error, Hypergraph, InfectionFunction, Kernels, Result, SizeSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum HypergraphSource {
    File { path: PathBuf },
    Random { n: usize, sizes: String, seed: u64 },
}

impl HypergraphSource {
    pub fn load(&self, base_dir: &Path) -> Result<Hypergraph> {
        match self {
            HypergraphSource::File { path } => hypergraph::load(base_dir.join(path)),
            HypergraphSource::Random { n, sizes, seed } => {
                let sizes = SizeSpec::parse_sizes(sizes)
                    .map_err(|e| Error::Validation(format!("hypergraph.sizes: {e}")))?;
                generate_random(*n, &SizeSpec::new(sizes, *seed))
            }
        }
    }
}

/// A scalar, or a list of values to sweep over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweepable {
    One(f64),
    Many(Vec<f64>),
}

impl Sweepable {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweepable::One(v) => vec![*v],
            Sweepable::Many(v) => v.clone(),
        }
    }

    pub fn is_sweep(&self) -> bool {
        matches!(self, Sweepable::Many(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Model {
    Exact,
    MfInteger,
    MfCommuted,
    MfLinearBound,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Exact => "exact",
            Model::MfInteger => "mf_integer",
            Model::MfCommuted => "mf_commuted",
            Model::MfLinearBound => "mf_linear_bound",
        }
    }

    /// Column header in sweep tables.
    pub fn column(self) -> &'static str {
        match self {
            Model::Exact => "exact_mean",
            other => other.name(),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How kernels are assigned to hyperedges.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KernelAssignment {
    pub kernel: Option<String>,
    /// Hyperedge size → kernel; the hypergraph is partitioned by size.
    pub size_kernels: BTreeMap<usize, String>,
    /// Family tag → kernel, for hypergraphs carrying their own tags.
    pub family_kernels: BTreeMap<u32, String>,
}

fn parse_kernel(field: &str, spec: &str) -> Result<InfectionFunction> {
    spec.parse()
        .map_err(|e: Error| Error::Validation(format!("{field}: {e}")))
}

impl KernelAssignment {
    /// Resolves kernels against `hg`, partitioning it by size when
    /// per-size kernels are given.
    pub fn resolve(&self, hg: Hypergraph) -> Result<(Hypergraph, Kernels)> {
        let given = usize::from(self.kernel.is_some())
            + usize::from(!self.size_kernels.is_empty())
            + usize::from(!self.family_kernels.is_empty());
        if given != 1 {
            return Err(Error::Validation(
                "kernel: give exactly one of kernel, size_kernels or family_kernels".into(),
            ));
        }
        if let Some(spec) = &self.kernel {
            return Ok((hg, Kernels::Single(parse_kernel("kernel", spec)?)));
        }
        if !self.size_kernels.is_empty() {
            let hg = hg.partition_by_size();
            let sizes: Vec<usize> = hg.size_histogram().iter().map(|&(k, _)| k).collect();
            let mut list = vec![InfectionFunction::identity(); hg.family_count()];
            for &size in &sizes {
                let spec = self.size_kernels.get(&size).ok_or_else(|| {
                    Error::Validation(format!("size_kernels: no kernel for hyperedges of size {size}"))
                })?;
                list[size - 2] = parse_kernel(&format!("size_kernels.{size}"), spec)?;
            }
            for size in self.size_kernels.keys().filter(|k| !sizes.contains(k)) {
                log::warn!("size_kernels.{size}: no hyperedges of that size; ignored");
            }
            return Ok((hg, Kernels::PerFamily(list)));
        }
        if hg.families().is_none() {
            return Err(Error::Validation(
                "family_kernels: the hypergraph carries no family tags".into(),
            ));
        }
        let mut list = Vec::with_capacity(hg.family_count());
        for s in 1..=hg.family_count() as u32 {
            let used = (0..hg.edge_count()).any(|h| hg.family_of(h) == Some(s));
            match self.family_kernels.get(&s) {
                Some(spec) => list.push(parse_kernel(&format!("family_kernels.{s}"), spec)?),
                None if used => {
                    return Err(Error::Validation(format!("family_kernels: no kernel for family {s}")))
                }
                None => list.push(InfectionFunction::identity()),
            }
        }
        Ok((hg, Kernels::PerFamily(list)))
    }
}

fn default_delta() -> f64 {
    1.0
}

fn default_dt() -> f64 {
    hypersis::meanfield::DEFAULT_DT
}

fn default_runs() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub hypergraph: HypergraphSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub size_kernels: BTreeMap<usize, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub family_kernels: BTreeMap<u32, String>,
    pub beta: Sweepable,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub i0: Sweepable,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub models: Vec<Model>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// What an experiment produces.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    TimeEvolution { beta: f64, i0: f64 },
    BetaSweep { betas: Vec<f64>, i0: f64 },
    I0Sweep { beta: f64, i0s: Vec<f64> },
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Validation(format!("config field `{path}`: {}", e.into_inner()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Validation(msg) => Error::Parse {
                path: path.to_path_buf(),
                message: msg,
            },
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn kernels(&self) -> KernelAssignment {
        KernelAssignment {
            kernel: self.kernel.clone(),
            size_kernels: self.size_kernels.clone(),
            family_kernels: self.family_kernels.clone(),
        }
    }

    /// Checks field-level constraints and decides the output plan.
    pub fn plan(&self) -> Result<Plan> {
        let bad = |field: &str, msg: String| Err(Error::Validation(format!("{field}: {msg}")));
        if self.models.is_empty() {
            return bad("models", "select at least one model".into());
        }
        for (field, value) in [("beta", &self.beta), ("i0", &self.i0)] {
            let values = value.values();
            if values.is_empty() {
                return bad(field, "sweep list is empty".into());
            }
            for (k, &v) in values.iter().enumerate() {
                let name = if value.is_sweep() { format!("{field}[{k}]") } else { field.to_string() };
                let ok = v.is_finite() && v >= 0.0 && (field != "i0" || v <= 1.0);
                if !ok {
                    return bad(&name, format!("invalid value {v}"));
                }
            }
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return bad("delta", format!("invalid value {}", self.delta));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt", format!("must be positive, got {}", self.dt));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.dt) {
            return bad("T", format!("must be at least dt, got {}", self.horizon));
        }
        if self.runs == 0 && self.models.contains(&Model::Exact) {
            return bad("runs", "the exact model needs at least one run".into());
        }
        match (&self.beta, &self.i0) {
            (Sweepable::Many(_), Sweepable::Many(_)) => {
                bad("beta", "only one of beta and i0 may be a sweep list".into())
            }
            (Sweepable::Many(betas), Sweepable::One(i0)) => Ok(Plan::BetaSweep {
                betas: betas.clone(),
                i0: *i0,
            }),
            (Sweepable::One(beta), Sweepable::Many(i0s)) => Ok(Plan::I0Sweep {
                beta: *beta,
                i0s: i0s.clone(),
            }),
            (Sweepable::One(beta), Sweepable::One(i0)) => Ok(Plan::TimeEvolution { beta: *beta, i0: *i0 }),
        }
    }
}
