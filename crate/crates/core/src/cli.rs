//! Command-line front end. Every report carries the effective configuration
//! with inputs inlined, and `replay --config report.json` re-runs it.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::blockprg::{PrgParams, Seed};
use crate::counting::{
    count, ctable_to_polytope, generate_dense_setcover, setcover_to_polytope, ContingencyTableSpec, MethodChoice,
    SetCoverInstance,
};
use crate::error::{Error, Result};
use crate::experiments::{
    anticoncentration_curve, invariance_gap, noise_sensitivity, random_regular_polytope, sphere_gap, spiked_family,
    SpikedShape,
};
use crate::oracle::{
    exact_cube_prob, gaussian_mc_prob, mc_prob, separable_gaussian_prob, sphere_mc_prob, McConfig, Measure,
};
use crate::polytope::{normalize, PolytopeJson, PolytopeSpec};
use crate::rotate::{spherical_generate, GaussianPrg};

const DEFAULT_BUDGET: u64 = 1 << 24;
const DEFAULT_EPS: f64 = 0.5;
const DEFAULT_ROTATION_DELTA: f64 = 0.25;

#[derive(Debug, Parser)]
#[command(name = "polyprg", version, about = "Pseudorandom generators for polytopes and approximate counting")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Largest number of points or seeds any enumeration may visit.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, global = true, default_value_t = 0)]
    stream_seed: u64,
    #[arg(long, global = true, default_value_t = 0.999)]
    ci_level: f64,
    /// Target error; sets the generator's ε when --eps is absent.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Regularity parameter for the generator and the density check.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write a CSV summary here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-face regularity of a polytope.
    Regularity {
        #[arg(long)]
        polytope: PathBuf,
    },
    /// Hypercube acceptance probability (exact, or Monte Carlo with --mc).
    CubeProb {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        mc: bool,
    },
    /// Gaussian acceptance probability.
    GaussProb {
        #[arg(long)]
        polytope: PathBuf,
    },
    /// Uniform-sphere acceptance probability.
    SphereProb {
        #[arg(long)]
        polytope: PathBuf,
    },
    /// One generator output for explicit seeds.
    PrgSample {
        #[arg(long, value_enum)]
        mode: PrgMode,
        /// Takes n and k from this polytope.
        #[arg(long)]
        polytope: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// Block generator seed, decimal.
        #[arg(long, default_value = "0")]
        seed: String,
        /// Rotation seed, decimal (gauss and sphere modes).
        #[arg(long, default_value = "0")]
        g1_seed: String,
    },
    /// Count solutions of a covering program.
    CountSetcover {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Count even when the density check fails.
        #[arg(long)]
        force: bool,
    },
    /// Count {0,1} contingency tables.
    CountCtable {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rows: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        cols: Vec<i64>,
        /// JSON `{"rows": [...], "cols": [...]}` instead of --rows/--cols.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Force exact enumeration.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Write a random dense covering instance.
    GenSetcover {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        universe: usize,
    },
    /// Empirical experiments.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentCommand,
    },
    /// Re-run the configuration echoed in a report.
    Replay {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum ExperimentCommand {
    /// Cube vs Gaussian acceptance of one polytope.
    Invariance {
        #[arg(long)]
        polytope: PathBuf,
    },
    /// Invariance gap along the spiked family at several ε.
    Spiked {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25,0.125")]
        eps_list: Vec<f64>,
    },
    /// Noise sensitivity of the polytope's indicator.
    Noise {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.04")]
        deltas: Vec<f64>,
    },
    /// Gaussian shell masses; a random regular polytope unless --polytope is given.
    Anticoncentration {
        #[arg(long)]
        polytope: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
        lambdas: Vec<f64>,
    },
    /// Sphere vs scaled Gaussian acceptance along a dimension ladder.
    SphereGap {
        #[arg(long, value_enum, default_value_t = SphereFamily::Cap)]
        family: SphereFamily,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_value = "64,256,1024")]
        ladder: Vec<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrgMode {
    Cube,
    Gauss,
    Sphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Exact,
    PrgEnumerated,
    PrgSampled,
}

impl From<MethodArg> for MethodChoice {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::Exact => MethodChoice::Exact,
            MethodArg::PrgEnumerated => MethodChoice::PrgEnumerated,
            MethodArg::PrgSampled => MethodChoice::PrgSampled,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SphereFamily {
    /// `x₁ ≤ 0`.
    Hemisphere,
    /// `x₁ ≤ 1/√n`.
    Cap,
    /// Random regular faces with offsets scaled by `1/√n`.
    Random,
}

/// Everything a run depends on, with inputs inlined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub budget: u64,
    pub samples: u64,
    pub stream_seed: u64,
    pub ci_level: f64,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub task: Task,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Task {
    Regularity {
        polytope: PolytopeJson,
    },
    CubeProb {
        polytope: PolytopeJson,
        mc: bool,
    },
    GaussProb {
        polytope: PolytopeJson,
    },
    SphereProb {
        polytope: PolytopeJson,
    },
    PrgSample {
        mode: PrgMode,
        n: usize,
        k: usize,
        seed: String,
        g1_seed: String,
    },
    CountSetcover {
        instance: SetCoverInstance,
        method: MethodChoice,
        force: bool,
    },
    CountCtable {
        table: ContingencyTableSpec,
        method: MethodChoice,
    },
    GenSetcover {
        n: usize,
        universe: usize,
    },
    Experiment {
        experiment: ExperimentTask,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentTask {
    Invariance {
        polytope: PolytopeJson,
    },
    Spiked {
        k: usize,
        theta: f64,
        eps_list: Vec<f64>,
    },
    Noise {
        polytope: PolytopeJson,
        deltas: Vec<f64>,
    },
    Anticoncentration {
        polytope: Option<PolytopeJson>,
        n: usize,
        k: usize,
        lambdas: Vec<f64>,
    },
    SphereGap {
        family: SphereFamily,
        k: usize,
        ladder: Vec<usize>,
    },
}

#[derive(Serialize)]
struct Report<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    warnings: Vec<String>,
    result: Value,
}

struct Outcome {
    result: Value,
    warnings: Vec<String>,
    rows: Vec<Value>,
}

impl Outcome {
    fn new<T: Serialize>(result: &T) -> Result<Self> {
        let result = serde_json::to_value(result)?;
        Ok(Self {
            rows: vec![result.clone()],
            result,
            warnings: Vec::new(),
        })
    }

    fn with_rows<T: Serialize>(mut self, rows: &[T]) -> Result<Self> {
        self.rows = rows.iter().map(serde_json::to_value).collect::<std::result::Result<_, _>>()?;
        Ok(self)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::invalid(format!("malformed JSON in {}: {e}", path.display())))
}

/// A bare instance, or a `gen-setcover` report carrying one in `result`.
fn load_setcover(path: &Path) -> Result<SetCoverInstance> {
    let value: Value = read_json(path)?;
    let body = match value.get("result") {
        Some(r) if value.get("tool").is_some() => r.clone(),
        _ => value,
    };
    let inst: SetCoverInstance = serde_json::from_value(body)
        .map_err(|e| Error::invalid(format!("malformed set cover instance in {}: {e}", path.display())))?;
    inst.validate()?;
    Ok(inst)
}

fn load_polytope(path: &Path) -> Result<PolytopeJson> {
    let raw: PolytopeJson = read_json(path)?;
    PolytopeSpec::from_json(raw.clone())?;
    Ok(raw)
}

impl Cli {
    /// Resolves inputs and defaults into a self-contained configuration.
    fn into_config(self) -> Result<(RunConfig, RunOptions)> {
        let g = self.global;
        let opts = RunOptions {
            threads: g.threads,
            out: g.out,
            csv: g.csv,
        };
        let task = match self.command {
            Command::Regularity { polytope } => Task::Regularity {
                polytope: load_polytope(&polytope)?,
            },
            Command::CubeProb { polytope, mc } => Task::CubeProb {
                polytope: load_polytope(&polytope)?,
                mc,
            },
            Command::GaussProb { polytope } => Task::GaussProb {
                polytope: load_polytope(&polytope)?,
            },
            Command::SphereProb { polytope } => Task::SphereProb {
                polytope: load_polytope(&polytope)?,
            },
            Command::PrgSample {
                mode,
                polytope,
                n,
                k,
                seed,
                g1_seed,
            } => {
                let (n, k) = match (polytope, n, k) {
                    (Some(p), None, None) => {
                        let raw = load_polytope(&p)?;
                        (raw.n, raw.k)
                    }
                    (None, Some(n), Some(k)) => (n, k),
                    _ => return Err(Error::invalid("prg-sample needs either --polytope or both --n and --k")),
                };
                Task::PrgSample {
                    mode,
                    n,
                    k,
                    seed,
                    g1_seed,
                }
            }
            Command::CountSetcover { instance, method, force } => {
                let inst = load_setcover(&instance)?;
                Task::CountSetcover {
                    instance: inst,
                    method: method.into(),
                    force,
                }
            }
            Command::CountCtable {
                rows,
                cols,
                instance,
                exact,
                method,
            } => {
                let table = match instance {
                    Some(path) => read_json(&path)?,
                    None => ContingencyTableSpec { rows, cols },
                };
                table.validate()?;
                Task::CountCtable {
                    table,
                    method: if exact { MethodChoice::Exact } else { method.into() },
                }
            }
            Command::GenSetcover { n, universe } => Task::GenSetcover { n, universe },
            Command::Experiment { kind } => Task::Experiment {
                experiment: match kind {
                    ExperimentCommand::Invariance { polytope } => ExperimentTask::Invariance {
                        polytope: load_polytope(&polytope)?,
                    },
                    ExperimentCommand::Spiked { k, theta, eps_list } => ExperimentTask::Spiked { k, theta, eps_list },
                    ExperimentCommand::Noise { polytope, deltas } => ExperimentTask::Noise {
                        polytope: load_polytope(&polytope)?,
                        deltas,
                    },
                    ExperimentCommand::Anticoncentration {
                        polytope,
                        n,
                        k,
                        lambdas,
                    } => {
                        let polytope = polytope.map(|p| load_polytope(&p)).transpose()?;
                        let (n, k) = polytope.as_ref().map_or((n, k), |p| (p.n, p.k));
                        ExperimentTask::Anticoncentration { polytope, n, k, lambdas }
                    }
                    ExperimentCommand::SphereGap { family, k, ladder } => ExperimentTask::SphereGap { family, k, ladder },
                },
            },
            Command::Replay { config } => {
                let v: Value = read_json(&config)?;
                let inner = v.get("config").cloned().unwrap_or(v);
                let cfg: RunConfig = serde_json::from_value(inner)?;
                return Ok((cfg, opts));
            }
        };
        let cfg = RunConfig {
            budget: g.budget,
            samples: g.samples,
            stream_seed: g.stream_seed,
            ci_level: g.ci_level,
            delta: g.delta,
            eps: g.eps,
            task,
        };
        Ok((cfg, opts))
    }
}

struct RunOptions {
    threads: Option<usize>,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
}

impl RunConfig {
    fn mc(&self) -> McConfig {
        McConfig {
            samples: self.samples,
            stream_seed: self.stream_seed,
            ci_level: self.ci_level,
        }
    }

    /// `--eps` if given, else `--delta`, else `ε = 0.5`.
    fn block_params(&self, n: usize, k: usize) -> Result<PrgParams> {
        let mut params = match (self.eps, self.delta) {
            (Some(eps), _) => PrgParams::with_eps(n, k, eps)?,
            (None, Some(delta)) => PrgParams::from_delta(n, k, delta)?,
            (None, None) => PrgParams::with_eps(n, k, DEFAULT_EPS)?,
        };
        if params.delta.is_none() {
            params.delta = self.delta;
        }
        Ok(params)
    }

    fn gaussian_prg(&self, n: usize, k: usize) -> Result<GaussianPrg> {
        let delta = self.delta.unwrap_or(DEFAULT_ROTATION_DELTA);
        match self.eps {
            Some(eps) => GaussianPrg::with_eps(n, k, delta, eps),
            None if self.delta.is_some() => GaussianPrg::new(n, k, delta),
            None => GaussianPrg::with_eps(n, k, delta, DEFAULT_EPS),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::invalid("budget must be at least 1"));
        }
        self.mc().validate()
    }

    /// Runs the task; pure in the configuration.
    fn execute(&self) -> Result<Outcome> {
        self.validate()?;
        let mc = self.mc();
        match &self.task {
            Task::Regularity { polytope } => {
                let p = PolytopeSpec::from_json(polytope.clone())?;
                let reg = p.regularity();
                Outcome::new(&json!({
                    "n": p.n(),
                    "k": p.k(),
                    "scale_factors": p.scale_factors(),
                    "per_column_eps": reg.per_column_eps,
                    "eps": reg.eps,
                }))
            }
            Task::CubeProb { polytope, mc: use_mc } => {
                let p = PolytopeSpec::from_json(polytope.clone())?;
                if *use_mc {
                    let e = mc_prob(&p, Measure::Cube, &mc)?;
                    Outcome::new(&json!({ "method": "mc", "estimate": e }))
                } else {
                    let f = exact_cube_prob(&p, self.budget)?;
                    Outcome::new(&json!({
                        "method": "exact",
                        "count": f.count,
                        "fraction": f.to_string(),
                        "value": f.value(),
                    }))
                }
            }
            Task::GaussProb { polytope } => {
                let p = PolytopeSpec::from_json(polytope.clone())?;
                let e = gaussian_mc_prob(&p, &mc)?;
                let closed = separable_gaussian_prob(&p).ok();
                Outcome::new(&json!({ "mc": e, "closed_form": closed }))
            }
            Task::SphereProb { polytope } => {
                let p = PolytopeSpec::from_json(polytope.clone())?;
                Outcome::new(&json!({ "mc": sphere_mc_prob(&p, &mc)? }))
            }
            Task::PrgSample {
                mode,
                n,
                k,
                seed,
                g1_seed,
            } => self.prg_sample(*mode, *n, *k, seed, g1_seed),
            Task::CountSetcover { instance, method, force } => {
                let compiled = setcover_to_polytope(instance)?;
                let density = instance.density(self.eps.unwrap_or(DEFAULT_EPS))?;
                if !density.passes && !force {
                    return Err(Error::invalid(format!(
                        "density check failed: some element lies in {} sets, {} required (use --force)",
                        density.min_occupancy, density.required_occupancy
                    )));
                }
                let params = self.block_params(instance.n, compiled.integer.k())?;
                let report = count(&compiled.integer, &params, *method, self.budget, self.ci_level)?;
                let mut out = Outcome::new(&json!({
                    "density": density,
                    "faces": compiled.integer.k(),
                    "face_regularity": compiled.polytope.as_ref().map(|p| p.regularity().eps),
                    "infeasible_by_construction": compiled.infeasible_by_construction,
                    "count": report,
                }))?;
                out.rows = vec![serde_json::to_value(&report)?];
                Ok(out)
            }
            Task::CountCtable { table, method } => {
                let compiled = ctable_to_polytope(table)?;
                let params = self.block_params(table.variables(), compiled.integer.k())?;
                let report = count(&compiled.integer, &params, *method, self.budget, self.ci_level)?;
                let mut out = Outcome::new(&json!({
                    "table": table,
                    "conserved": table.conserved(),
                    "faces": compiled.integer.k(),
                    "face_regularity": compiled.polytope.as_ref().map(|p| p.regularity().eps),
                    "count": report,
                }))?;
                out.rows = vec![serde_json::to_value(&report)?];
                Ok(out)
            }
            Task::GenSetcover { n, universe } => {
                let eps = self.eps.unwrap_or(DEFAULT_EPS);
                let inst = generate_dense_setcover(*n, *universe, eps, self.stream_seed)?;
                let mut out = Outcome::new(&inst)?;
                out.rows = vec![serde_json::to_value(inst.density(eps)?)?];
                Ok(out)
            }
            Task::Experiment { experiment } => self.experiment(experiment),
        }
    }

    fn prg_sample(&self, mode: PrgMode, n: usize, k: usize, seed: &str, g1_seed: &str) -> Result<Outcome> {
        let parse = |s: &str, what: &str| {
            BigUint::from_str(s).map_err(|_| Error::invalid(format!("{what} must be a non-negative decimal integer")))
        };
        let seed = parse(seed, "--seed")?;
        match mode {
            PrgMode::Cube => {
                let params = self.block_params(n, k)?;
                let s = Seed::from_integer(&params, &seed)?;
                let x = crate::blockprg::generate(&params, &s)?;
                let out = json!({
                    "mode": mode,
                    "params": params.summary(),
                    "point": x,
                });
                Ok(Outcome {
                    rows: x.iter().enumerate().map(|(i, v)| json!({"index": i, "value": v})).collect(),
                    result: out,
                    warnings: Vec::new(),
                })
            }
            PrgMode::Gauss | PrgMode::Sphere => {
                let g1 = parse(g1_seed, "--g1-seed")?;
                let prg = self.gaussian_prg(n, k)?;
                let s = Seed::from_integer(&prg.block, &seed)?;
                let x = if mode == PrgMode::Gauss {
                    prg.generate(&g1, &s)?
                } else {
                    spherical_generate(&prg, &g1, &s)?
                };
                let warnings = prg.rotation.regime_warning().into_iter().collect();
                let out = json!({
                    "mode": mode,
                    "padded_dim": prg.dim(),
                    "rotation": {
                        "g1_degree": prg.rotation.g1.degree(),
                        "g1_seed_bits": prg.g1_seed_bits(),
                        "threshold": prg.rotation.threshold(),
                    },
                    "params": prg.block.summary(),
                    "point": x,
                });
                Ok(Outcome {
                    rows: x.iter().enumerate().map(|(i, v)| json!({"index": i, "value": v})).collect(),
                    result: out,
                    warnings,
                })
            }
        }
    }

    fn experiment(&self, task: &ExperimentTask) -> Result<Outcome> {
        let mc = self.mc();
        match task {
            ExperimentTask::Invariance { polytope } => {
                let p = PolytopeSpec::from_json(polytope.clone())?;
                Outcome::new(&invariance_gap("input", &p, &mc, self.budget)?)
            }
            ExperimentTask::Spiked { k, theta, eps_list } => {
                let recs = spiked_family(&SpikedShape::default(), *k, eps_list, *theta, self.stream_seed, &mc, self.budget)?;
                Outcome::new(&recs)?.with_rows(&recs)
            }
            ExperimentTask::Noise { polytope, deltas } => {
                let p = PolytopeSpec::from_json(polytope.clone())?;
                let recs = deltas
                    .iter()
                    .map(|&d| noise_sensitivity(&p, d, &mc, self.budget))
                    .collect::<Result<Vec<_>>>()?;
                Outcome::new(&recs)?.with_rows(&recs)
            }
            ExperimentTask::Anticoncentration { polytope, n, k, lambdas } => {
                let p = match polytope {
                    Some(raw) => PolytopeSpec::from_json(raw.clone())?,
                    None => random_regular_polytope(*n, *k, self.stream_seed)?,
                };
                let curve = anticoncentration_curve(&p, lambdas, &mc)?;
                let rows: Vec<Value> = curve
                    .points
                    .iter()
                    .map(|pt| {
                        json!({
                            "k": curve.k,
                            "lambda": pt.lambda,
                            "mass": pt.mass.estimate,
                            "half_width": pt.mass.half_width,
                            "slope": curve.slope,
                        })
                    })
                    .collect();
                let mut out = Outcome::new(&curve)?;
                out.rows = rows;
                Ok(out)
            }
            ExperimentTask::SphereGap { family, k, ladder } => {
                let family = *family;
                let (k, seed) = (*k, self.stream_seed);
                let build = move |n: usize| -> Result<PolytopeSpec> {
                    let mut e1 = vec![0.0; n];
                    e1[0] = 1.0;
                    match family {
                        SphereFamily::Hemisphere => normalize(n, vec![e1], vec![0.0]),
                        SphereFamily::Cap => normalize(n, vec![e1], vec![1.0 / (n as f64).sqrt()]),
                        SphereFamily::Random => {
                            let p = random_regular_polytope(n, k, seed)?;
                            let scale = 1.0 / (n as f64).sqrt();
                            p.with_theta(p.theta().iter().map(|t| t * scale).collect())
                        }
                    }
                };
                let recs = sphere_gap(build, ladder, &mc)?;
                Outcome::new(&recs)?.with_rows(&recs)
            }
        }
    }
}

fn flatten_row(v: &Value) -> Vec<(String, String)> {
    match v {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| {
                let s = match v {
                    Value::String(s) => s.clone(),
                    Value::Null => String::new(),
                    other => other.to_string(),
                };
                (k.clone(), s)
            })
            .collect(),
        other => vec![("value".into(), other.to_string())],
    }
}

fn write_csv(path: &Path, rows: &[Value]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if let Some(first) = rows.first() {
        let header: Vec<String> = flatten_row(first).into_iter().map(|(k, _)| k).collect();
        w.write_record(&header)?;
    }
    for row in rows {
        w.write_record(flatten_row(row).into_iter().map(|(_, v)| v))?;
    }
    w.flush()?;
    Ok(())
}

/// Renders the report for `cfg` exactly as the binary writes it.
pub fn render_report(cfg: &RunConfig) -> Result<(String, Vec<Value>)> {
    let outcome = cfg.execute()?;
    let report = Report {
        tool: "polyprg",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        warnings: outcome.warnings,
        result: outcome.result,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    Ok((text, outcome.rows))
}

fn run_config(cfg: &RunConfig, opts: &RunOptions) -> Result<()> {
    let (text, rows) = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(|| render_report(cfg))?,
        None => render_report(cfg)?,
    };
    match &opts.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| Error::file(path, e))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if let Some(path) = &opts.csv {
        write_csv(path, &rows)?;
    }
    Ok(())
}

/// Exit code for an error: 2 for budget refusals, 1 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } | Error::SeedOverflow { .. } => 2,
        _ => 1,
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = cli.into_config().and_then(|(cfg, opts)| run_config(&cfg, &opts));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
