use std::fs;
use std::io::Write;
use std::path::Path;

use hypersis::hypergraph::{self, generate_random};
use hypersis::spectral::evaluate_conditions;
use hypersis::{Error, Hypergraph, Kernels, ModelParams, Result, SizeSpec};

use crate::cli::{ExperimentArgs, GenerateArgs, KernelArgs, SimulateArgs, ThresholdArgs};
use crate::config::{ExperimentConfig, KernelAssignment, Model, Plan};
use crate::presets;
use crate::runner::{create, run_model, threshold_metadata, write_model_output, Point};

fn split_pair<K: std::str::FromStr>(flag: &str, raw: &str) -> Result<(K, String)> {
    let (key, spec) = raw
        .split_once('=')
        .ok_or_else(|| Error::Validation(format!("--{flag} expects KEY=SPEC, got `{raw}`")))?;
    let key = key
        .trim()
        .parse()
        .map_err(|_| Error::Validation(format!("--{flag}: bad key `{key}`")))?;
    Ok((key, spec.trim().to_string()))
}

impl KernelArgs {
    pub fn assignment(&self) -> Result<KernelAssignment> {
        Ok(KernelAssignment {
            kernel: self.kernel.clone(),
            size_kernels: self
                .size_kernel
                .iter()
                .map(|raw| split_pair("size-kernel", raw))
                .collect::<Result<_>>()?,
            family_kernels: self
                .family_kernel
                .iter()
                .map(|raw| split_pair("family-kernel", raw))
                .collect::<Result<_>>()?,
        })
    }
}

fn load_with_kernels(path: &Path, kernels: &KernelArgs) -> Result<(Hypergraph, Kernels)> {
    kernels.assignment()?.resolve(hypergraph::load(path)?)
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let spec = SizeSpec::new(SizeSpec::parse_sizes(&args.sizes)?, args.seed);
    let mut hg = generate_random(args.n, &spec)?;
    if args.families.is_some() {
        hg = hg.partition_by_size();
    }
    hypergraph::save(&hg, &args.out)?;
    log::info!("wrote {} hyperedges to {}", hg.edge_count(), args.out.display());
    Ok(())
}

pub fn threshold(args: &ThresholdArgs) -> Result<()> {
    let (hg, kernels) = load_with_kernels(&args.hypergraph, &args.kernels)?;
    let report = evaluate_conditions(&hg, &kernels, ModelParams::new(args.beta, args.delta)?)?;
    let json = report.to_json();
    match &args.out {
        Some(path) => fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    if args.models.is_empty() {
        return Err(Error::Validation("--models: select at least one model".into()));
    }
    let (hg, kernels) = load_with_kernels(&args.hypergraph, &args.kernels)?;
    let point = Point {
        params: ModelParams::new(args.beta, args.delta)?,
        i0: args.i0,
        horizon: args.horizon,
        dt: args.dt,
        runs: args.runs,
        seed: args.seed,
        backend: args.backend,
    };
    fs::create_dir_all(&args.out)?;
    for &model in &args.models {
        let output = run_model(&hg, &kernels, model, &point, args.stride)?;
        write_model_output(&args.out, model, &output, args.per_node)?;
    }
    Ok(())
}

pub fn experiment(args: &ExperimentArgs) -> Result<()> {
    if args.list_presets {
        for name in presets::NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let (mut cfg, base_dir) = match (&args.preset, &args.config) {
        (Some(name), _) => {
            let cfg = presets::preset(name).ok_or_else(|| {
                Error::Validation(format!(
                    "unknown preset `{name}`; available: {}",
                    presets::NAMES.join(", ")
                ))
            })?;
            (cfg, std::env::current_dir()?)
        }
        (None, Some(path)) => {
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (ExperimentConfig::load(path)?, dir)
        }
        (None, None) => return Err(Error::Validation("give a config file or --preset".into())),
    };
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if args.print_config {
        println!("{}", cfg.to_json());
        return Ok(());
    }
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| Error::Validation("out: no output directory (use --out)".into()))?;
    run_experiment(&cfg, &base_dir, &out)
}

/// Runs a validated experiment, writing the resolved config and its CSVs
/// into `out`.
pub fn run_experiment(cfg: &ExperimentConfig, base_dir: &Path, out: &Path) -> Result<()> {
    let plan = cfg.plan()?;
    let (hg, kernels) = cfg.kernels().resolve(cfg.hypergraph.load(base_dir)?)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("config.json"), cfg.to_json() + "\n")?;

    let point = |beta: f64, i0: f64| -> Result<Point> {
        Ok(Point {
            params: ModelParams::new(beta, cfg.delta)?,
            i0,
            horizon: cfg.horizon,
            dt: cfg.dt,
            runs: cfg.runs,
            seed: cfg.seed,
            backend: cfg.backend,
        })
    };
    let mut models: Vec<Model> = Vec::new();
    for &m in &cfg.models {
        if !models.contains(&m) {
            models.push(m);
        }
    }

    match plan {
        Plan::TimeEvolution { beta, i0 } => {
            let p = point(beta, i0)?;
            if cfg.delta > 0.0 {
                let report = evaluate_conditions(&hg, &kernels, p.params)?;
                fs::write(out.join("threshold.json"), report.to_json() + "\n")?;
            }
            for &model in &models {
                let output = run_model(&hg, &kernels, model, &p, 1)?;
                write_model_output(out, model, &output, false)?;
            }
        }
        Plan::BetaSweep { betas, i0 } => {
            let report = evaluate_conditions(&hg, &kernels, point(betas[0], i0)?.params)?;
            let mut meta = threshold_metadata(&report);
            meta.push(format!("# i0={i0}"));
            let rows = betas
                .iter()
                .map(|&beta| sweep_row(&hg, &kernels, &models, &point(beta, i0)?, beta))
                .collect::<Result<Vec<_>>>()?;
            write_sweep(&out.join("beta_sweep.csv"), &meta, "beta", &models, &rows)?;
        }
        Plan::I0Sweep { beta, i0s } => {
            let report = evaluate_conditions(&hg, &kernels, point(beta, i0s[0])?.params)?;
            let mut meta = threshold_metadata(&report);
            meta.push(format!("# beta={beta}"));
            let rows = i0s
                .iter()
                .map(|&i0| sweep_row(&hg, &kernels, &models, &point(beta, i0)?, i0))
                .collect::<Result<Vec<_>>>()?;
            write_sweep(&out.join("i0_sweep.csv"), &meta, "i0", &models, &rows)?;
        }
    }
    Ok(())
}

fn sweep_row(hg: &Hypergraph, kernels: &Kernels, models: &[Model], point: &Point, key: f64) -> Result<Vec<f64>> {
    let mut row = vec![key];
    for &model in models {
        row.push(run_model(hg, kernels, model, point, usize::MAX)?.final_prevalence());
    }
    log::info!("sweep point {key} done");
    Ok(row)
}

fn write_sweep(path: &Path, meta: &[String], key: &str, models: &[Model], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = create(path)?;
    for line in meta {
        writeln!(w, "{line}")?;
    }
    let header: Vec<&str> = std::iter::once(key).chain(models.iter().map(|m| m.column())).collect();
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().copied().map(hypersis::format_float).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    log::info!("wrote {}", path.display());
    Ok(())
}
