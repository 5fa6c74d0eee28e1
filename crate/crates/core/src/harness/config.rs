//! Flat `key=value` experiment configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! problem.name=wtoy
//! algorithm=hsda
//! algo.eps=0.001
//! init.x=start1
//! seed=7
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Hsda,
    Ihsda,
    Gda,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Hsda => "hsda",
            Algorithm::Ihsda => "ihsda",
            Algorithm::Gda => "gda",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hsda" => Ok(Algorithm::Hsda),
            "ihsda" => Ok(Algorithm::Ihsda),
            "gda" => Ok(Algorithm::Gda),
            other => Err(Error::InvalidConfig(format!(
                "unknown algorithm '{other}' (expected hsda, ihsda or gda)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    WToy { eps_w: f64, l_w: f64 },
    Quadratic { n: usize, m: usize, ell2: f64, seed: u64 },
    Robust { n: usize, samples: usize, lambda_adv: f64, seed: u64 },
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::WToy { .. } => "wtoy",
            ProblemSpec::Quadratic { .. } => "quadratic",
            ProblemSpec::Robust { .. } => "robust",
        }
    }

    /// Defaults for a problem name.
    pub fn default_for(name: &str) -> Result<Self> {
        match name {
            "wtoy" => Ok(ProblemSpec::WToy { eps_w: 0.01, l_w: 5.0 }),
            "quadratic" => Ok(ProblemSpec::Quadratic {
                n: 10,
                m: 5,
                ell2: 2.0,
                seed: 0,
            }),
            "robust" => Ok(ProblemSpec::Robust {
                n: 20,
                samples: 10,
                lambda_adv: 1.0,
                seed: 0,
            }),
            other => Err(Error::InvalidConfig(format!(
                "unknown problem '{other}' (expected wtoy, quadratic or robust)"
            ))),
        }
    }

    /// Sets one parameter; `key` has no `problem.` prefix.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match (self, key) {
            (ProblemSpec::WToy { eps_w, .. }, "eps_w") => *eps_w = parse(key, value)?,
            (ProblemSpec::WToy { l_w, .. }, "l_w") => *l_w = parse(key, value)?,
            (ProblemSpec::Quadratic { n, .. }, "n") | (ProblemSpec::Robust { n, .. }, "n") => *n = parse(key, value)?,
            (ProblemSpec::Quadratic { m, .. }, "m") => *m = parse(key, value)?,
            (ProblemSpec::Quadratic { ell2, .. }, "ell2") => *ell2 = parse(key, value)?,
            (ProblemSpec::Quadratic { seed, .. }, "seed") | (ProblemSpec::Robust { seed, .. }, "seed") => {
                *seed = parse(key, value)?
            }
            (ProblemSpec::Robust { samples, .. }, "samples") => *samples = parse(key, value)?,
            (ProblemSpec::Robust { lambda_adv, .. }, "lambda_adv") => *lambda_adv = parse(key, value)?,
            (spec, _) => {
                return Err(Error::InvalidConfig(format!(
                    "unknown key 'problem.{key}' for problem '{}'",
                    spec.name()
                )))
            }
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(String, String)> {
        let mut out = vec![("problem.name".to_string(), self.name().to_string())];
        let mut push = |k: &str, v: String| out.push((format!("problem.{k}"), v));
        match self {
            ProblemSpec::WToy { eps_w, l_w } => {
                push("eps_w", eps_w.to_string());
                push("l_w", l_w.to_string());
            }
            ProblemSpec::Quadratic { n, m, ell2, seed } => {
                push("n", n.to_string());
                push("m", m.to_string());
                push("ell2", ell2.to_string());
                push("seed", seed.to_string());
            }
            ProblemSpec::Robust {
                n,
                samples,
                lambda_adv,
                seed,
            } => {
                push("n", n.to_string());
                push("samples", samples.to_string());
                push("lambda_adv", lambda_adv.to_string());
                push("seed", seed.to_string());
            }
        }
        out
    }
}

/// Named or explicit initial point.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// `[0.1, 0.1, 0.1]`, W-problem only.
    Start1,
    /// `[1, 0.1, 0.1]`, W-problem only.
    Start2,
    Zeros,
    /// Standard Gaussian from the run seed.
    Random,
    Explicit(Vec<f64>),
}

impl Init {
    fn parse(key: &str, value: &str) -> Result<Self> {
        Ok(match value {
            "start1" => Init::Start1,
            "start2" => Init::Start2,
            "zeros" => Init::Zeros,
            "random" => Init::Random,
            list => Init::Explicit(
                list.split(',')
                    .map(|t| parse::<f64>(key, t.trim()))
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
    }

    fn render(&self) -> String {
        match self {
            Init::Start1 => "start1".into(),
            Init::Start2 => "start2".into(),
            Init::Zeros => "zeros".into(),
            Init::Random => "random".into(),
            Init::Explicit(v) => v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        }
    }
}

/// Optional algorithm parameters; unset values take the driver defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlgoParams {
    pub eps: Option<f64>,
    pub omega: Option<f64>,
    pub max_outer: Option<usize>,
    pub warm_dist: Option<f64>,
    pub b_g: Option<f64>,
    pub max_safeguard_retries: Option<usize>,
    pub lanczos_max_iters: Option<usize>,
    pub step_x: Option<f64>,
    pub step_y: Option<f64>,
    pub ascent_steps: Option<usize>,
}

impl AlgoParams {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let full = format!("algo.{key}");
        match key {
            "eps" => self.eps = Some(parse(&full, value)?),
            "omega" => self.omega = Some(parse(&full, value)?),
            "max_outer" => self.max_outer = Some(parse(&full, value)?),
            "warm_dist" => self.warm_dist = Some(parse(&full, value)?),
            "b_g" => self.b_g = Some(parse(&full, value)?),
            "max_safeguard_retries" => self.max_safeguard_retries = Some(parse(&full, value)?),
            "lanczos_max_iters" => self.lanczos_max_iters = Some(parse(&full, value)?),
            "step_x" => self.step_x = Some(parse(&full, value)?),
            "step_y" => self.step_y = Some(parse(&full, value)?),
            "ascent_steps" => self.ascent_steps = Some(parse(&full, value)?),
            _ => return Err(Error::InvalidConfig(format!("unknown key '{full}'"))),
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((format!("algo.{k}"), v));
            }
        };
        push("eps", self.eps.map(|v| v.to_string()));
        push("omega", self.omega.map(|v| v.to_string()));
        push("max_outer", self.max_outer.map(|v| v.to_string()));
        push("warm_dist", self.warm_dist.map(|v| v.to_string()));
        push("b_g", self.b_g.map(|v| v.to_string()));
        push("max_safeguard_retries", self.max_safeguard_retries.map(|v| v.to_string()));
        push("lanczos_max_iters", self.lanczos_max_iters.map(|v| v.to_string()));
        push("step_x", self.step_x.map(|v| v.to_string()));
        push("step_y", self.step_y.map(|v| v.to_string()));
        push("ascent_steps", self.ascent_steps.map(|v| v.to_string()));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub algorithm: Algorithm,
    pub algo: AlgoParams,
    pub init_x: Init,
    pub init_y: Init,
    pub seed: u64,
    /// Record `x_t` in the trace JSON; `None` leaves the driver default.
    pub snapshots: Option<bool>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse '{value}' for key '{key}'")))
}

/// Splits config text into `(key, value)` pairs. Duplicate keys are errors.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = parse_assignment(line).map_err(|_| {
            Error::InvalidConfig(format!("line {}: expected key=value, got '{line}'", lineno + 1))
        })?;
        if seen.insert(k.clone(), lineno).is_some() {
            return Err(Error::InvalidConfig(format!("line {}: duplicate key '{k}'", lineno + 1)));
        }
        out.push((k, v));
    }
    Ok(out)
}

/// `key=value` with surrounding whitespace trimmed.
pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidConfig(format!("expected key=value, got '{s}'")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(Error::InvalidConfig(format!("empty key in '{s}'")));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_pairs(parse_pairs(text)?)
    }

    /// Builds a config from pairs; later pairs override earlier ones.
    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (k, v) in pairs {
            map.insert(k.into(), v.into());
        }
        let name = map
            .remove("problem.name")
            .ok_or_else(|| Error::InvalidConfig("missing key 'problem.name'".into()))?;
        let mut problem = ProblemSpec::default_for(&name)?;
        let algorithm: Algorithm = map
            .remove("algorithm")
            .ok_or_else(|| Error::InvalidConfig("missing key 'algorithm'".into()))?
            .parse()?;
        let mut cfg = ExperimentConfig {
            problem: problem.clone(),
            algorithm,
            algo: AlgoParams::default(),
            init_x: Init::Zeros,
            init_y: Init::Zeros,
            seed: 0,
            snapshots: None,
        };
        for (key, value) in &map {
            if let Some(rest) = key.strip_prefix("problem.") {
                problem.set(rest, value)?;
            } else if let Some(rest) = key.strip_prefix("algo.") {
                cfg.algo.set(rest, value)?;
            } else {
                match key.as_str() {
                    "init.x" => cfg.init_x = Init::parse(key, value)?,
                    "init.y" => cfg.init_y = Init::parse(key, value)?,
                    "seed" => cfg.seed = parse(key, value)?,
                    "output.snapshots" => cfg.snapshots = Some(parse(key, value)?),
                    _ => return Err(Error::InvalidConfig(format!("unknown key '{key}'"))),
                }
            }
        }
        cfg.problem = problem;
        Ok(cfg)
    }

    /// Canonical `(key, value)` list; `parse(serialize(c)) == c`.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = self.problem.entries();
        out.push(("algorithm".into(), self.algorithm.as_str().into()));
        out.extend(self.algo.entries());
        out.push(("init.x".into(), self.init_x.render()));
        out.push(("init.y".into(), self.init_y.render()));
        out.push(("seed".into(), self.seed.to_string()));
        if let Some(s) = self.snapshots {
            out.push(("output.snapshots".into(), s.to_string()));
        }
        out
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_example() {
        let c = ExperimentConfig::parse(
            "# W run\nproblem.name = wtoy\nalgorithm=hsda\nalgo.eps=0.001\ninit.x=start1\nseed=7\n",
        )
        .unwrap();
        assert_eq!(c.algorithm, Algorithm::Hsda);
        assert_eq!(c.algo.eps, Some(1e-3));
        assert_eq!(c.init_x, Init::Start1);
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn rejects_unknown_keys_and_names() {
        assert!(ExperimentConfig::parse("problem.name=wtoy\nalgorithm=newton\n").is_err());
        assert!(ExperimentConfig::parse("problem.name=wtoy\nalgorithm=hsda\nalgo.foo=1\n").is_err());
        assert!(ExperimentConfig::parse("problem.name=wtoy\nalgorithm=hsda\nproblem.n=3\n").is_err());
        assert!(ExperimentConfig::parse("problem.name=wtoy\nalgorithm=hsda\nbogus=1\n").is_err());
        assert!(ExperimentConfig::parse("problem.name=wtoy\nalgorithm=hsda\nseed=1\nseed=2\n").is_err());
        assert!(ExperimentConfig::parse("algorithm=hsda\n").is_err());
    }

    #[test]
    fn explicit_vectors() {
        let c = ExperimentConfig::parse("problem.name=wtoy\nalgorithm=gda\ninit.x=1, -0.5,2e-3\n").unwrap();
        assert_eq!(c.init_x, Init::Explicit(vec![1.0, -0.5, 2e-3]));
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e6..1e6f64, 1e-12..1e-3f64, Just(0.1), Just(1.0 / 3.0)]
    }

    fn problem() -> impl Strategy<Value = ProblemSpec> {
        prop_oneof![
            (finite(), finite()).prop_map(|(eps_w, l_w)| ProblemSpec::WToy { eps_w, l_w }),
            (1..500usize, 1..500usize, finite(), any::<u64>())
                .prop_map(|(n, m, ell2, seed)| ProblemSpec::Quadratic { n, m, ell2, seed }),
            (1..500usize, 1..500usize, finite(), any::<u64>()).prop_map(|(n, samples, lambda_adv, seed)| {
                ProblemSpec::Robust {
                    n,
                    samples,
                    lambda_adv,
                    seed,
                }
            }),
        ]
    }

    fn init() -> impl Strategy<Value = Init> {
        prop_oneof![
            Just(Init::Start1),
            Just(Init::Start2),
            Just(Init::Zeros),
            Just(Init::Random),
            prop::collection::vec(finite(), 1..6).prop_map(Init::Explicit),
        ]
    }

    fn algo() -> impl Strategy<Value = AlgoParams> {
        (
            (
                prop::option::of(finite()),
                prop::option::of(finite()),
                prop::option::of(0..10_000usize),
                prop::option::of(finite()),
                prop::option::of(finite()),
            ),
            (
                prop::option::of(0..10usize),
                prop::option::of(1..1000usize),
                prop::option::of(finite()),
                prop::option::of(finite()),
                prop::option::of(1..10usize),
            ),
        )
            .prop_map(|((eps, omega, max_outer, warm_dist, b_g), (retries, lanczos, sx, sy, asc))| AlgoParams {
                eps,
                omega,
                max_outer,
                warm_dist,
                b_g,
                max_safeguard_retries: retries,
                lanczos_max_iters: lanczos,
                step_x: sx,
                step_y: sy,
                ascent_steps: asc,
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn round_trip(
            problem in problem(),
            alg in prop_oneof![Just(Algorithm::Hsda), Just(Algorithm::Ihsda), Just(Algorithm::Gda)],
            algo in algo(),
            init_x in init(),
            init_y in init(),
            seed in any::<u64>(),
            snapshots in prop::option::of(any::<bool>()),
        ) {
            let c = ExperimentConfig { problem, algorithm: alg, algo, init_x, init_y, seed, snapshots };
            prop_assert_eq!(ExperimentConfig::parse(&c.serialize()).unwrap(), c);
        }
    }
}
