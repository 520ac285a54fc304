//! Multi-seed experiment runner, report assembly and the ρ / δ sweeps.
//!
//! An [`ExperimentSpec`] is read from a flat TOML file. Every key is optional
//! and unknown keys are rejected. A minimal file:
//!
//! ```toml
//! sbm_block_sizes = [200, 200, 200, 200, 200]
//! rho = 50.0
//! methods = ["vanilla", "graphsha"]
//! seeds = [0, 1, 2]
//! output_dir = "out/sbm"
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{
    generate_sbm, load_edge_list_bundle, load_graph_container, make_long_tailed_split, make_step_split,
    ImbalancedSplit, SbmSpec,
};
use crate::diffusion::{load_or_compute, DiffusionConfig, DiffusionKind, DiffusionMatrix, CACHE_DIR_ENV};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hardness::{HardnessConfig, HardnessMetric};
use crate::metrics::{evaluate, misclassified_minor_probability, MetricsReport};
use crate::nn::{train_with_diffusion, Backbone, Mode, TraceRecord, TrainConfig};
use crate::synthesis::{DeltaDistribution, MixupConfig, QuotaMode};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Vanilla,
    Upsample,
    Reweight,
    #[serde(rename = "graphsha")]
    GraphSha,
    /// GraphSHA with KNN hardness and receptive-field auxiliaries.
    #[serde(rename = "graphsha-knn")]
    GraphShaKnn,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Vanilla => "vanilla",
            Method::Upsample => "upsample",
            Method::Reweight => "reweight",
            Method::GraphSha => "graphsha",
            Method::GraphShaKnn => "graphsha-knn",
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Method::Vanilla => Mode::Vanilla,
            Method::Upsample => Mode::Upsample,
            Method::Reweight => Mode::Reweight,
            Method::GraphSha | Method::GraphShaKnn => Mode::GraphSha,
        }
    }

    pub fn uses_diffusion(&self) -> bool {
        self.mode() == Mode::GraphSha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    /// Geometric long tail from `n_max` down to `n_max / rho`.
    Lt,
    /// Half the classes at the majority count, the rest `rho` times smaller.
    Step,
}

/// Flat experiment description. Field names are the config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Graph container file. When unset the edge-list bundle keys are tried,
    /// then the `sbm_*` keys.
    pub dataset: Option<PathBuf>,
    pub edges_file: Option<PathBuf>,
    pub features_file: Option<PathBuf>,
    pub labels_file: Option<PathBuf>,
    pub num_classes: Option<usize>,

    pub sbm_block_sizes: Vec<usize>,
    pub sbm_p_in: f64,
    pub sbm_p_out: f64,
    pub sbm_feature_dim: usize,
    pub sbm_feature_separation: f64,
    pub sbm_seed: u64,

    pub split: SplitKind,
    pub rho: f64,
    /// Head-class training count of the long-tailed split.
    pub n_max: usize,
    pub val_per_class: usize,
    /// `(train, val, test)` fractions of `N / C` for the step split.
    pub step_fractions: [f64; 3],
    /// Fixed split seed; when unset each run re-splits with its own seed.
    pub split_seed: Option<u64>,

    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub output_dir: Option<PathBuf>,

    pub backbone: Backbone,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,

    pub temperature: f64,
    pub knn_k: usize,

    pub delta_b1: f64,
    pub delta_b2: f64,
    pub quota_mode: QuotaMode,

    pub diffusion: DiffusionKind,
    pub ppr_alpha: f64,
    pub heat_t: f64,
    pub top_k: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let train = TrainConfig::default();
        let (b1, b2) = match train.mixup.delta {
            DeltaDistribution::Beta { b1, b2 } => (b1, b2),
            DeltaDistribution::Constant(_) => unreachable!("default delta is a beta distribution"),
        };
        Self {
            dataset: None,
            edges_file: None,
            features_file: None,
            labels_file: None,
            num_classes: None,
            sbm_block_sizes: vec![200; 5],
            sbm_p_in: 0.02,
            sbm_p_out: 0.002,
            sbm_feature_dim: 6,
            sbm_feature_separation: 3.5,
            sbm_seed: 0,
            split: SplitKind::Lt,
            rho: 100.0,
            n_max: 100,
            val_per_class: 20,
            step_fractions: [0.1, 0.1, 0.8],
            split_seed: None,
            methods: vec![Method::Vanilla, Method::GraphSha],
            seeds: vec![0, 1, 2, 3, 4],
            output_dir: None,
            backbone: train.backbone,
            hidden_dim: train.hidden_dim,
            learning_rate: train.learning_rate,
            weight_decay: train.weight_decay,
            max_epochs: train.max_epochs,
            patience: train.patience,
            temperature: train.hardness.temperature,
            knn_k: train.hardness.knn_k,
            delta_b1: b1,
            delta_b2: b2,
            quota_mode: train.mixup.quota_mode,
            diffusion: train.diffusion.kind,
            ppr_alpha: train.diffusion.alpha,
            heat_t: train.diffusion.t,
            top_k: train.diffusion.top_k,
        }
    }
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parses `text`, then replaces top-level keys with `overrides`. Override
    /// values use TOML syntax; anything that does not parse as a TOML value is
    /// taken as a bare string.
    pub fn from_toml_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(config_error)?;
        for (key, raw) in overrides {
            let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.clone()));
            table.insert(key.clone(), value);
        }
        let spec: Self = table.try_into().map_err(config_error)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>, overrides: &[(String, String)]) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be nonempty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods must be nonempty".into()));
        }
        if !(self.rho.is_finite() && self.rho >= 1.0) {
            return Err(Error::Config(format!("rho must be >= 1, got {}", self.rho)));
        }
        let bundle = [&self.edges_file, &self.features_file, &self.labels_file];
        let given = bundle.iter().filter(|p| p.is_some()).count();
        if given != 0 && given != 3 {
            return Err(Error::Config(
                "edges_file, features_file and labels_file must be given together".into(),
            ));
        }
        if self.dataset.is_none() && given == 0 {
            self.sbm_spec().validate().map_err(config_error)?;
        }
        self.train_config(Method::Vanilla, 0).validate().map_err(config_error)?;
        DeltaDistribution::Beta {
            b1: self.delta_b1,
            b2: self.delta_b2,
        }
        .validate()
        .map_err(config_error)
    }

    pub fn sbm_spec(&self) -> SbmSpec {
        SbmSpec {
            block_sizes: self.sbm_block_sizes.clone(),
            p_in: self.sbm_p_in,
            p_out: self.sbm_p_out,
            feature_dim: self.sbm_feature_dim,
            feature_separation: self.sbm_feature_separation,
            seed: self.sbm_seed,
        }
    }

    pub fn load_graph(&self) -> Result<Graph> {
        if let Some(path) = &self.dataset {
            return load_graph_container(path);
        }
        if let (Some(e), Some(f), Some(l)) = (&self.edges_file, &self.features_file, &self.labels_file) {
            return load_edge_list_bundle(e, f, l, self.num_classes);
        }
        generate_sbm(&self.sbm_spec())
    }

    pub fn make_split(&self, g: &Graph, seed: u64) -> Result<ImbalancedSplit> {
        let seed = self.split_seed.unwrap_or(seed);
        match self.split {
            SplitKind::Lt => make_long_tailed_split(g, self.rho, self.n_max, self.val_per_class, seed),
            SplitKind::Step => {
                let [tr, va, te] = self.step_fractions;
                make_step_split(g, self.rho, (tr, va, te), seed)
            }
        }
    }

    pub fn diffusion_config(&self) -> DiffusionConfig {
        DiffusionConfig {
            kind: self.diffusion,
            alpha: self.ppr_alpha,
            t: self.heat_t,
            top_k: self.top_k,
            ..DiffusionConfig::default()
        }
    }

    pub fn train_config(&self, method: Method, seed: u64) -> TrainConfig {
        TrainConfig {
            backbone: self.backbone,
            hidden_dim: self.hidden_dim,
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            max_epochs: self.max_epochs,
            patience: self.patience,
            seed,
            mode: method.mode(),
            hardness: HardnessConfig {
                metric: match method {
                    Method::GraphShaKnn => HardnessMetric::Knn,
                    _ => HardnessMetric::Confidence,
                },
                temperature: self.temperature,
                knn_k: self.knn_k,
            },
            mixup: MixupConfig {
                delta: DeltaDistribution::Beta {
                    b1: self.delta_b1,
                    b2: self.delta_b2,
                },
                quota_mode: self.quota_mode,
            },
            diffusion: self.diffusion_config(),
        }
    }
}

/// One (method, seed) run. `metrics` is `None` when the run failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub seed: u64,
    pub metrics: Option<MetricsReport>,
    pub epochs: usize,
    pub best_epoch: usize,
    pub error: Option<String>,
    /// Wall-clock seconds; the only nondeterministic fields of a report.
    pub wall_clock_secs: f64,
    pub synthesis_secs: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation (0 for a single value). `None` for
    /// an empty slice.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    pub runs: usize,
    pub failed: usize,
    pub accuracy: Option<MeanStd>,
    pub balanced_accuracy: Option<MeanStd>,
    pub macro_f1: Option<MeanStd>,
    /// Over runs that had at least one misclassification.
    pub misclassified_minor_prob: Option<MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: u32,
    pub code_version: String,
    pub spec: ExperimentSpec,
    pub graph_hash: String,
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentReport {
    pub fn aggregate(&self, method: Method) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.method == method)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(|r| r.error.is_some())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("method,seed,{},epochs,best_epoch,error\n", MetricsReport::CSV_HEADER);
        for r in &self.runs {
            let metrics = r.metrics.as_ref().map(|m| m.csv_row()).unwrap_or_else(|| ",,,".into());
            let error = r.error.as_deref().unwrap_or("").replace([',', '\n'], " ");
            writeln!(out, "{},{},{},{},{},{}", r.method.name(), r.seed, metrics, r.epochs, r.best_epoch, error)
                .expect("writing to a String");
        }
        out
    }

    /// Writes `report.json`, `report.csv`, `config.toml` and one
    /// `runs/<method>-seed<seed>/trace.ndjson` per run.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)?)?;
        fs::write(dir.join("report.csv"), self.to_csv())?;
        fs::write(dir.join("config.toml"), self.spec.to_toml())?;
        for r in &self.runs {
            let run_dir = dir.join("runs").join(format!("{}-seed{}", r.method.name(), r.seed));
            fs::create_dir_all(&run_dir)?;
            let mut lines = String::new();
            for t in &r.trace {
                lines.push_str(&serde_json::to_string(t)?);
                lines.push('\n');
            }
            fs::write(run_dir.join("trace.ndjson"), lines)?;
        }
        Ok(())
    }
}

fn aggregate(method: Method, runs: &[RunRecord]) -> Aggregate {
    let mine: Vec<&RunRecord> = runs.iter().filter(|r| r.method == method).collect();
    let ok: Vec<&MetricsReport> = mine.iter().filter_map(|r| r.metrics.as_ref()).collect();
    let collect = |f: fn(&MetricsReport) -> f64| MeanStd::of(&ok.iter().map(|m| f(m)).collect::<Vec<_>>());
    let minor: Vec<f64> = ok.iter().filter_map(|m| m.misclassified_minor_prob).collect();
    Aggregate {
        method,
        runs: mine.len(),
        failed: mine.len() - ok.len(),
        accuracy: collect(|m| m.accuracy),
        balanced_accuracy: collect(|m| m.balanced_accuracy),
        macro_f1: collect(|m| m.macro_f1),
        misclassified_minor_prob: MeanStd::of(&minor),
    }
}

/// Directory for diffusion caches, from the environment.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from)
}

fn single_run(
    spec: &ExperimentSpec,
    g: &Graph,
    dm: Option<&DiffusionMatrix>,
    method: Method,
    seed: u64,
) -> RunRecord {
    let started = Instant::now();
    let outcome = spec.make_split(g, seed).and_then(|split| {
        let cfg = spec.train_config(method, seed);
        let out = train_with_diffusion(g, &split, &cfg, dm)?;
        let mut metrics = evaluate(&out.predictions, g.labels(), split.test(), g.num_classes());
        metrics.misclassified_minor_prob =
            misclassified_minor_probability(&out.predictions, g.labels(), split.test(), &split.minor_classes());
        Ok((out, metrics))
    });
    let wall_clock_secs = started.elapsed().as_secs_f64();
    match outcome {
        Ok((out, metrics)) => RunRecord {
            method,
            seed,
            metrics: Some(metrics),
            epochs: out.trace.len(),
            best_epoch: out.state.best_epoch,
            error: None,
            wall_clock_secs,
            synthesis_secs: out.timing.synthesis.as_secs_f64(),
            trace: out.trace,
        },
        Err(e) => RunRecord {
            method,
            seed,
            metrics: None,
            epochs: 0,
            best_epoch: 0,
            error: Some(format!("method {} seed {seed}: {e}", method.name())),
            wall_clock_secs,
            synthesis_secs: 0.0,
            trace: Vec::new(),
        },
    }
}

/// Runs every (method, seed) pair on an already loaded graph. `diffusion` is
/// computed when needed and not given.
pub fn run_experiment_on(
    spec: &ExperimentSpec,
    g: &Graph,
    diffusion: Option<&DiffusionMatrix>,
) -> Result<ExperimentReport> {
    spec.validate()?;
    let owned;
    let dm = match diffusion {
        Some(dm) => Some(dm),
        None if spec.methods.iter().any(Method::uses_diffusion) => {
            owned = load_or_compute(g, &spec.diffusion_config(), cache_dir_from_env().as_deref())?;
            Some(&owned)
        }
        None => None,
    };
    let jobs: Vec<(Method, u64)> = spec
        .methods
        .iter()
        .flat_map(|&m| spec.seeds.iter().map(move |&s| (m, s)))
        .collect();
    let runs: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(method, seed)| single_run(spec, g, dm, method, seed))
        .collect();

    let mut methods: Vec<Method> = Vec::new();
    for &m in &spec.methods {
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let aggregates = methods.iter().map(|&m| aggregate(m, &runs)).collect();
    let report = ExperimentReport {
        version: REPORT_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        spec: spec.clone(),
        graph_hash: g.content_hash(),
        runs,
        aggregates,
    };
    if let Some(dir) = &spec.output_dir {
        report.write(dir)?;
    }
    Ok(report)
}

/// Loads the dataset, then [`run_experiment_on`]. Failed runs are kept in the
/// report with their (method, seed) context; see [`ExperimentReport::failures`].
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let g = spec.load_graph()?;
    run_experiment_on(spec, &g, None)
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// ρ for imbalance sweeps, `E[δ]` for δ sweeps.
    pub value: f64,
    pub method: Method,
    pub f1: Option<MeanStd>,
    pub error: Option<String>,
}

pub fn sweep_csv(value_column: &str, rows: &[SweepRow]) -> String {
    let mut out = format!("{value_column},method,f1_mean,f1_std,error\n");
    for r in rows {
        let (m, s) = r.f1.map(|f| (f.mean.to_string(), f.std.to_string())).unwrap_or_default();
        let error = r.error.as_deref().unwrap_or("").replace([',', '\n'], " ");
        writeln!(out, "{},{},{m},{s},{error}", r.value, r.method.name()).expect("writing to a String");
    }
    out
}

fn sweep_rows(value: f64, spec: &ExperimentSpec, result: Result<ExperimentReport>) -> Vec<SweepRow> {
    match result {
        Ok(report) => report
            .aggregates
            .iter()
            .map(|a| SweepRow {
                value,
                method: a.method,
                f1: a.macro_f1,
                error: report
                    .failures()
                    .find(|r| r.method == a.method)
                    .and_then(|r| r.error.clone()),
            })
            .collect(),
        Err(e) => spec
            .methods
            .iter()
            .map(|&method| SweepRow {
                value,
                method,
                f1: None,
                error: Some(e.to_string()),
            })
            .collect(),
    }
}

fn sub_output(spec: &ExperimentSpec, name: String) -> Option<PathBuf> {
    spec.output_dir.as_ref().map(|d| d.join(name))
}

/// Macro-F1 per method for each imbalance ratio. Failures are recorded in
/// the rows and the sweep continues.
pub fn sweep_imbalance(spec: &ExperimentSpec, rhos: &[f64]) -> Result<Vec<SweepRow>> {
    if rhos.is_empty() {
        return Ok(Vec::new());
    }
    let g = spec.load_graph()?;
    let dm = if spec.methods.iter().any(Method::uses_diffusion) {
        Some(load_or_compute(&g, &spec.diffusion_config(), cache_dir_from_env().as_deref())?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &rho in rhos {
        let sub = ExperimentSpec {
            rho,
            output_dir: sub_output(spec, format!("rho-{rho}")),
            ..spec.clone()
        };
        rows.extend(sweep_rows(rho, &sub, run_experiment_on(&sub, &g, dm.as_ref())));
    }
    Ok(rows)
}

/// Macro-F1 of the GraphSHA methods in `spec` (plain GraphSHA if none are
/// listed) for each Beta parameterization of `δ`.
pub fn sweep_delta(spec: &ExperimentSpec, beta_params: &[(f64, f64)]) -> Result<Vec<SweepRow>> {
    if beta_params.is_empty() {
        return Ok(Vec::new());
    }
    let mut methods: Vec<Method> = spec.methods.iter().copied().filter(Method::uses_diffusion).collect();
    if methods.is_empty() {
        methods.push(Method::GraphSha);
    }
    let g = spec.load_graph()?;
    let dm = load_or_compute(&g, &spec.diffusion_config(), cache_dir_from_env().as_deref())?;
    let mut rows = Vec::new();
    for &(b1, b2) in beta_params {
        let delta = DeltaDistribution::Beta { b1, b2 };
        let sub = ExperimentSpec {
            delta_b1: b1,
            delta_b2: b2,
            methods: methods.clone(),
            output_dir: sub_output(spec, format!("beta-{b1}-{b2}")),
            ..spec.clone()
        };
        rows.extend(sweep_rows(delta.mean(), &sub, run_experiment_on(&sub, &g, Some(&dm))));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentSpec {
        ExperimentSpec {
            sbm_block_sizes: vec![30, 30, 30],
            sbm_p_in: 0.2,
            sbm_p_out: 0.02,
            sbm_feature_dim: 4,
            rho: 5.0,
            n_max: 10,
            val_per_class: 5,
            max_epochs: 15,
            patience: 5,
            hidden_dim: 8,
            top_k: 16,
            methods: vec![Method::Vanilla, Method::GraphSha],
            seeds: vec![0, 1],
            ..ExperimentSpec::default()
        }
    }

    #[test]
    fn parses_flat_file() {
        let spec = ExperimentSpec::from_toml_str(
            "rho = 20.0\nmethods = [\"vanilla\", \"graphsha-knn\"]\nseeds = [3]\nsplit = \"step\"\n",
        )
        .unwrap();
        assert_eq!(spec.rho, 20.0);
        assert_eq!(spec.methods, vec![Method::Vanilla, Method::GraphShaKnn]);
        assert_eq!(spec.split, SplitKind::Step);
        assert_eq!(spec.hidden_dim, 64);
    }

    #[test]
    fn unknown_key_is_config_error() {
        let err = ExperimentSpec::from_toml_str("learning_rat = 0.1\n").unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("learning_rat")), "{err}");
    }

    #[test]
    fn empty_seeds_rejected() {
        assert!(matches!(ExperimentSpec::from_toml_str("seeds = []\n"), Err(Error::Config(_))));
    }

    #[test]
    fn overrides_replace_file_keys() {
        let over = vec![
            ("rho".to_string(), "7".to_string()),
            ("output_dir".to_string(), "some/dir".to_string()),
        ];
        let spec = ExperimentSpec::from_toml_with_overrides("rho = 20.0\n", &over).unwrap();
        assert_eq!(spec.rho, 7.0);
        assert_eq!(spec.output_dir, Some(PathBuf::from("some/dir")));
    }

    #[test]
    fn resolved_config_round_trips() {
        let spec = tiny();
        assert_eq!(ExperimentSpec::from_toml_str(&spec.to_toml()).unwrap(), spec);
    }

    #[test]
    fn mean_std() {
        let m = MeanStd::of(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((m.mean, m.std), (2.0, 1.0));
        assert_eq!(MeanStd::of(&[4.0]).unwrap().std, 0.0);
        assert!(MeanStd::of(&[]).is_none());
    }

    #[test]
    fn one_method_one_seed_gives_one_row() {
        let spec = ExperimentSpec {
            methods: vec![Method::Vanilla],
            seeds: vec![0],
            ..tiny()
        };
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.runs.len(), 1);
        assert_eq!(report.aggregates.len(), 1);
        assert_eq!(report.to_csv().lines().count(), 2);
    }

    #[test]
    fn aggregate_counts_match_grid() {
        let report = run_experiment(&tiny()).unwrap();
        assert_eq!(report.runs.len(), 4);
        for a in &report.aggregates {
            assert_eq!(a.runs, 2);
            assert_eq!(a.failed, 0);
        }
    }

    #[test]
    fn failed_split_is_recorded_with_context() {
        let spec = ExperimentSpec {
            n_max: 1000,
            methods: vec![Method::Vanilla],
            seeds: vec![4],
            ..tiny()
        };
        let report = run_experiment(&spec).unwrap();
        let err = report.failures().next().unwrap().error.clone().unwrap();
        assert!(err.contains("vanilla") && err.contains("seed 4"), "{err}");
    }

    #[test]
    fn empty_sweeps_are_empty() {
        assert!(sweep_imbalance(&tiny(), &[]).unwrap().is_empty());
        assert!(sweep_delta(&tiny(), &[]).unwrap().is_empty());
    }
}
