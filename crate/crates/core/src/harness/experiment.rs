use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{Algorithm, ExperimentConfig, Init, ProblemSpec};
use super::tracefile::{trace_to_csv, TraceSummary};
use crate::baselines::{gda_run, GdaConfig};
use crate::hsda::{hsda_run, HsdaConfig};
use crate::ihsda::{ihsda_run, IhsdaConfig};
use crate::oracle::MinimaxOracle;
use crate::problems::{
    make_quadratic, make_robust_regression, make_wtoy, QuadraticMinimaxParams, RobustRegressionParams, WToyParams,
};
use crate::trace::IterateTrace;
use crate::{Error, Result, Vector};

pub fn build_problem(spec: &ProblemSpec) -> Result<Box<dyn MinimaxOracle>> {
    Ok(match *spec {
        ProblemSpec::WToy { eps_w, l_w } => Box::new(make_wtoy(WToyParams { eps_w, l_w })?),
        ProblemSpec::Quadratic { n, m, ell2, seed } => {
            if n == 0 || m == 0 {
                return Err(Error::InvalidConfig("quadratic dimensions must be positive".into()));
            }
            let mut p = QuadraticMinimaxParams::random(n, m, seed);
            p.ell2 = ell2;
            Box::new(make_quadratic(p)?)
        }
        ProblemSpec::Robust {
            n,
            samples,
            lambda_adv,
            seed,
        } => Box::new(make_robust_regression(RobustRegressionParams::random(
            n, samples, lambda_adv, seed,
        ))?),
    })
}

fn init_vector(init: &Init, dim: usize, rng: &mut ChaCha8Rng, what: &str) -> Result<Vector> {
    let fixed = |v: Vec<f64>| {
        if v.len() == dim {
            Ok(Vector::from_vec(v))
        } else {
            Err(Error::InvalidConfig(format!(
                "{what} has length {}, problem needs {dim}",
                v.len()
            )))
        }
    };
    match init {
        Init::Start1 => fixed(vec![0.1, 0.1, 0.1]),
        Init::Start2 => fixed(vec![1.0, 0.1, 0.1]),
        Init::Zeros => Ok(Vector::zeros(dim)),
        Init::Random => Ok(Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))),
        Init::Explicit(v) => fixed(v.clone()),
    }
}

/// Problem and initial point of a config.
pub fn prepare(config: &ExperimentConfig) -> Result<(Box<dyn MinimaxOracle>, Vector, Vector)> {
    let oracle = build_problem(&config.problem)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let x1 = init_vector(&config.init_x, oracle.dim_x(), &mut rng, "init.x")?;
    let y0 = init_vector(&config.init_y, oracle.dim_y(), &mut rng, "init.y")?;
    Ok((oracle, x1, y0))
}

fn default_eps(spec: &ProblemSpec) -> f64 {
    match spec {
        ProblemSpec::WToy { .. } => 1e-3,
        _ => 1e-2,
    }
}

/// Config-checked driver invocation, split so that configuration errors
/// surface before any computation.
enum Driver {
    Hsda(HsdaConfig),
    Ihsda(IhsdaConfig),
    Gda(GdaConfig),
}

fn driver(config: &ExperimentConfig, oracle: &dyn MinimaxOracle) -> Result<Driver> {
    let constants = oracle.constants();
    let a = &config.algo;
    let eps = a.eps.unwrap_or_else(|| default_eps(&config.problem));
    let reject = |keys: &[(&str, bool)]| -> Result<()> {
        for (k, set) in keys {
            if *set {
                return Err(Error::InvalidConfig(format!(
                    "key 'algo.{k}' does not apply to {}",
                    config.algorithm.as_str()
                )));
            }
        }
        Ok(())
    };
    Ok(match config.algorithm {
        Algorithm::Hsda => {
            reject(&[
                ("b_g", a.b_g.is_some()),
                ("max_safeguard_retries", a.max_safeguard_retries.is_some()),
                ("lanczos_max_iters", a.lanczos_max_iters.is_some()),
                ("step_x", a.step_x.is_some()),
                ("step_y", a.step_y.is_some()),
                ("ascent_steps", a.ascent_steps.is_some()),
            ])?;
            let mut c = HsdaConfig::new(eps, &constants)?;
            if let Some(w) = a.omega {
                c = c.with_omega(w)?;
            }
            if let Some(m) = a.max_outer {
                c = c.with_max_outer(m);
            }
            c.warm_dist = a.warm_dist;
            c.snapshots = config.snapshots;
            Driver::Hsda(c)
        }
        Algorithm::Ihsda => {
            reject(&[
                ("step_x", a.step_x.is_some()),
                ("step_y", a.step_y.is_some()),
                ("ascent_steps", a.ascent_steps.is_some()),
            ])?;
            let mut c = IhsdaConfig::new(eps, &constants)?.with_seed(config.seed);
            if let Some(w) = a.omega {
                c = c.with_omega(w)?;
            }
            if let Some(b) = a.b_g {
                c = c.with_b_g(b)?;
            }
            if let Some(m) = a.max_outer {
                c = c.with_max_outer(m);
            }
            if let Some(r) = a.max_safeguard_retries {
                c.max_safeguard_retries = r;
            }
            c.lanczos_max_iters = a.lanczos_max_iters;
            c.warm_dist = a.warm_dist;
            c.snapshots = config.snapshots;
            Driver::Ihsda(c)
        }
        Algorithm::Gda => {
            reject(&[
                ("eps", a.eps.is_some()),
                ("omega", a.omega.is_some()),
                ("warm_dist", a.warm_dist.is_some()),
                ("b_g", a.b_g.is_some()),
                ("max_safeguard_retries", a.max_safeguard_retries.is_some()),
                ("lanczos_max_iters", a.lanczos_max_iters.is_some()),
            ])?;
            let mut c = GdaConfig::from_constants(&constants);
            if let Some(v) = a.step_x {
                c.step_x = v;
            }
            if let Some(v) = a.step_y {
                c.step_y = v;
            }
            if let Some(v) = a.ascent_steps {
                c.ascent_steps = v;
            }
            if let Some(v) = a.max_outer {
                c.max_outer = v;
            }
            c.snapshots = config.snapshots;
            c.validate()?;
            Driver::Gda(c)
        }
    })
}

/// Runs a configured experiment in memory. Driver errors are returned
/// alongside whatever trace they carry.
pub fn run_config(config: &ExperimentConfig) -> Result<(Option<IterateTrace>, Option<Error>)> {
    let (oracle, x1, y0) = prepare(config)?;
    let drv = driver(config, oracle.as_ref())?;
    let result = match &drv {
        Driver::Hsda(c) => hsda_run(oracle.as_ref(), c, &x1, &y0),
        Driver::Ihsda(c) => ihsda_run(oracle.as_ref(), c, &x1, &y0),
        Driver::Gda(c) => gda_run(oracle.as_ref(), c, &x1, &y0),
    };
    Ok(match result {
        Ok(trace) => (Some(trace), None),
        Err(Error::MaxOuterExceeded { max_outer, trace }) => (
            Some(*trace),
            Some(Error::MaxOuterExceeded {
                max_outer,
                trace: Box::new(empty_trace()),
            }),
        ),
        Err(e) => (None, Some(e)),
    })
}

fn empty_trace() -> IterateTrace {
    IterateTrace {
        records: Vec::new(),
        termination: crate::TerminationReason::MaxOuter,
        certified: false,
        final_x: Vec::new(),
        final_y: Vec::new(),
        final_f_gap: None,
        final_grad_norm: f64::NAN,
        final_lambda_min: None,
        total_hvp: 0,
    }
}

pub fn summarize(config: &ExperimentConfig, trace: Option<&IterateTrace>, error: Option<&Error>) -> TraceSummary {
    TraceSummary {
        algorithm: config.algorithm.as_str().to_string(),
        termination: trace.map(|t| t.termination.as_str().to_string()),
        certified: trace.is_some_and(|t| t.certified),
        outer_iterations: trace.map_or(0, |t| t.outer_iterations()),
        final_f_gap: trace.and_then(|t| t.final_f_gap),
        final_grad_norm: trace.map(|t| t.final_grad_norm),
        final_lambda_min: trace.and_then(|t| t.final_lambda_min),
        total_hvp: trace.map_or(0, |t| t.total_hvp),
        final_x: trace.map(|t| t.final_x.clone()).unwrap_or_default(),
        x_snapshots: trace
            .map(|t| t.records.iter().filter_map(|r| r.x.clone()).collect())
            .unwrap_or_default(),
        config: config.entries().into_iter().collect(),
        error: error.map(|e| e.to_string()),
    }
}

/// Paths and summary of a finished experiment.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub summary: TraceSummary,
}

impl RunArtifacts {
    pub fn driver_failed(&self) -> bool {
        self.summary.error.is_some()
    }
}

/// Runs `config` and writes `<out>/<algorithm>_trace.csv` and `.json`.
/// Configuration problems are returned as errors before anything runs;
/// driver failures are recorded in the summary with the partial trace.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifacts> {
    let (trace, error) = run_config(config)?;
    fs::create_dir_all(out_dir)?;
    let stem = out_dir.join(format!("{}_trace", config.algorithm.as_str()));
    let csv = stem.with_extension("csv");
    let json = stem.with_extension("json");
    fs::write(&csv, trace_to_csv(trace.as_ref()))?;
    let summary = summarize(config, trace.as_ref(), error.as_ref());
    fs::write(&json, serde_json::to_string_pretty(&summary)?)?;
    Ok(RunArtifacts { csv, json, summary })
}
