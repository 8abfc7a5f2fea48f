//! Strict JSON configs, one parameter block per subcommand.

use std::collections::BTreeMap;
use std::path::PathBuf;

use genlab::crossval::{log_grid, DEFAULT_GRID_POINTS};
use genlab::datagen::{generate, Dataset, Generator, Task};
use genlab::experiments::SuiteOptions;
use genlab::hypotheses::{Constraint, HypothesisClass};
use genlab::mlp::Activation;
use genlab::{rng, BoundVariant, LossFn, TrainerConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn parse_list(s: &str) -> Result<Vec<Format>, CliError> {
        s.split(',')
            .map(|f| match f.trim() {
                "csv" => Ok(Format::Csv),
                "json" => Ok(Format::Json),
                "svg" => Ok(Format::Svg),
                other => Err(CliError::config(format!("--format: unknown format `{other}`"))),
            })
            .collect()
    }

    pub fn of_file(name: &str) -> Option<Format> {
        match name.rsplit('.').next()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "svg" => Some(Format::Svg),
            _ => None,
        }
    }
}

/// Top-level config file. A written `manifest.json` is itself a valid
/// config for the same subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    bound(serialize = "P: Serialize", deserialize = "P: DeserializeOwned + Default")
)]
pub struct ExperimentConfig<P> {
    /// Subcommand name; checked when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub formats: Option<Vec<Format>>,
    #[serde(default)]
    pub params: P,
    /// Where each resolved top-level value came from (written to manifests,
    /// ignored on input).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sources: BTreeMap<String, String>,
}

pub fn parse_config<P: DeserializeOwned + Serialize + Default>(
    text: &str,
    command: &str,
) -> Result<ExperimentConfig<P>, CliError> {
    let cfg: ExperimentConfig<P> =
        serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))?;
    if let Some(c) = &cfg.command {
        if c != command {
            return Err(CliError::config(format!(
                "config key `command` is `{c}` but the subcommand is `{command}`"
            )));
        }
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSpec {
    Generated { generator: Generator, n: usize },
    Csv { path: PathBuf, task: Task },
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec::Generated {
            generator: Generator::linear_threshold(vec![1.0, -1.0], 0.1).expect("valid default"),
            n: 10,
        }
    }
}

impl DataSpec {
    pub fn load(&self, seed: u64) -> Result<Dataset<f64>, CliError> {
        match self {
            DataSpec::Generated { generator, n } => {
                Ok(generate(generator, *n, rng::derive_seed(seed, "cli-data", 0))?)
            }
            DataSpec::Csv { path, task } => {
                let f = std::fs::File::open(path)
                    .map_err(|e| CliError::config(format!("data.path `{}`: {e}", path.display())))?;
                Ok(Dataset::read_csv(*task, std::io::BufReader::new(f))?)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClassSpec {
    /// `count` random linear thresholds on the data's feature dimension.
    RandomLinearThresholds {
        count: usize,
        #[serde(default)]
        bias: bool,
    },
    /// `count` random ±1 tables on the data points.
    RandomSignTables { count: usize },
    /// Every ±1 labeling of the data points.
    AllLabelings,
    LinearThreshold {
        #[serde(default)]
        bias: bool,
    },
    RidgeLinear {
        #[serde(default)]
        bias: bool,
        #[serde(default)]
        constraint: Option<Constraint>,
    },
    LassoLinear {
        #[serde(default)]
        bias: bool,
        #[serde(default)]
        constraint: Option<Constraint>,
    },
    Mlp {
        hidden: Vec<usize>,
        #[serde(default)]
        activation: Activation,
    },
    Explicit { class: HypothesisClass<f64> },
}

impl ClassSpec {
    pub fn build(&self, points: &[Vec<f64>], p: usize, seed: u64) -> Result<HypothesisClass<f64>, CliError> {
        let class_seed = rng::derive_seed(seed, "cli-class", 0);
        let with = |c: HypothesisClass<f64>, k: &Option<Constraint>| match k {
            Some(k) => c.with_constraint(*k),
            None => c,
        };
        Ok(match self {
            ClassSpec::RandomLinearThresholds { count, bias } => {
                HypothesisClass::random_linear_thresholds(p, *count, *bias, class_seed)?
            }
            ClassSpec::RandomSignTables { count } => {
                HypothesisClass::random_sign_tables(points, *count, class_seed)?
            }
            ClassSpec::AllLabelings => HypothesisClass::all_labelings(points)?,
            ClassSpec::LinearThreshold { bias } => HypothesisClass::linear_threshold(p, *bias),
            ClassSpec::RidgeLinear { bias, constraint } => with(HypothesisClass::ridge_linear(p, *bias), constraint),
            ClassSpec::LassoLinear { bias, constraint } => with(HypothesisClass::lasso_linear(p, *bias), constraint),
            ClassSpec::Mlp { hidden, activation } => HypothesisClass::mlp(p, hidden.clone(), *activation),
            ClassSpec::Explicit { class } => class.clone(),
        })
    }
}

pub fn trainer_with_seed(t: &TrainerConfig, master: u64) -> TrainerConfig {
    TrainerConfig {
        seed: rng::derive_seed(master, "cli-trainer", t.seed),
        ..t.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadMethod {
    Exact,
    #[default]
    MonteCarlo,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadParams {
    pub class: ClassSpec,
    pub data: DataSpec,
    pub method: RadMethod,
    pub n_sigma: usize,
    pub trainer: TrainerConfig,
}

impl Default for RadParams {
    fn default() -> Self {
        RadParams {
            class: ClassSpec::RandomLinearThresholds { count: 32, bias: true },
            data: DataSpec::default(),
            method: RadMethod::MonteCarlo,
            n_sigma: 1000,
            trainer: TrainerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Either explicit values or a log-spaced range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    Values(Vec<f64>),
    Log(GridSpec),
}

impl LambdaGrid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            LambdaGrid::Values(v) => Ok(v.clone()),
            LambdaGrid::Log(g) => Ok(log_grid(g.lo, g.hi, g.count)?),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BvParams {
    pub class: ClassSpec,
    pub generator: Generator,
    pub n: usize,
    pub lambda_grid: LambdaGrid,
    pub n_train_sets: usize,
    pub n_eval_points: usize,
    pub trainer: TrainerConfig,
}

impl Default for BvParams {
    fn default() -> Self {
        BvParams {
            class: ClassSpec::RidgeLinear {
                bias: false,
                constraint: None,
            },
            generator: Generator::linear_gaussian(vec![0.6, -0.4, 0.3, 0.5, -0.3], 0.5).expect("valid default"),
            n: 50,
            lambda_grid: LambdaGrid::Log(GridSpec {
                lo: 1e-2,
                hi: 1e2,
                count: DEFAULT_GRID_POINTS,
            }),
            n_train_sets: 500,
            n_eval_points: 300,
            trainer: TrainerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvParams {
    pub class: ClassSpec,
    pub data: DataSpec,
    pub loss: LossFn,
    pub lambda_grid: LambdaGrid,
    pub folds: usize,
    pub trainer: TrainerConfig,
}

impl Default for CvParams {
    fn default() -> Self {
        CvParams {
            class: ClassSpec::RidgeLinear {
                bias: false,
                constraint: None,
            },
            data: DataSpec::Generated {
                generator: Generator::linear_gaussian(vec![10f64.sqrt().recip(); 50], 1.0).expect("valid default"),
                n: 40,
            },
            loss: LossFn::Square,
            lambda_grid: LambdaGrid::Log(GridSpec {
                lo: 1e-4,
                hi: 1e3,
                count: DEFAULT_GRID_POINTS,
            }),
            folds: 5,
            trainer: TrainerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundParams {
    /// Evaluate the bound from given terms.
    Evaluate {
        empirical_error: f64,
        rad: f64,
        n: usize,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "default_variant")]
        variant: BoundVariant,
        /// The class was chosen by cross-validation on the same sample.
        #[serde(default)]
        cv_selected: bool,
    },
    /// Empirical coverage over fresh samples for a finite class.
    Coverage {
        class: ClassSpec,
        generator: Generator,
        n: usize,
        #[serde(default = "default_delta")]
        delta: f64,
        trials: usize,
    },
}

fn default_delta() -> f64 {
    0.05
}

fn default_variant() -> BoundVariant {
    BoundVariant::Classification
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams::Evaluate {
            empirical_error: 0.0,
            rad: 1.0,
            n: 100,
            delta: default_delta(),
            variant: default_variant(),
            cv_selected: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomizationParams {
    pub grid_size: usize,
    pub noise_sigma: f64,
    pub label_flip_prob: f64,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub suite: SuiteOptions,
    pub trainer: TrainerConfig,
}

impl Default for RandomizationParams {
    fn default() -> Self {
        RandomizationParams {
            grid_size: 16,
            noise_sigma: 1.0,
            label_flip_prob: 0.0,
            hidden: vec![32],
            activation: Activation::Tanh,
            suite: SuiteOptions::default(),
            trainer: TrainerConfig {
                max_epochs: 3000,
                learning_rate: 0.05,
                stop_on_interpolation: true,
                ..TrainerConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PointSpec {
    Explicit { points: Vec<Vec<f64>> },
    /// Standard normal points.
    Gaussian { count: usize, p: usize },
}

impl PointSpec {
    pub fn points(&self, seed: u64) -> Vec<Vec<f64>> {
        match self {
            PointSpec::Explicit { points } => points.clone(),
            PointSpec::Gaussian { count, p } => {
                let mut r = rng::stream(seed, "cli-points", 0);
                (0..*count)
                    .map(|_| (0..*p).map(|_| rng::normal(&mut r)).collect())
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VcParams {
    pub class: ClassSpec,
    pub points: PointSpec,
    pub d_max: usize,
    /// Sample sizes at which to report the VC complexity bound.
    pub bound_n: Vec<usize>,
}

impl Default for VcParams {
    fn default() -> Self {
        VcParams {
            class: ClassSpec::LinearThreshold { bias: true },
            points: PointSpec::Gaussian { count: 8, p: 2 },
            d_max: 6,
            bound_n: vec![10, 100, 1000, 10_000, 100_000, 1_000_000],
        }
    }
}
