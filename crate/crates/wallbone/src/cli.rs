//! Command implementations behind the `wallbone` binary: train, predict,
//! evaluate, extract, and the ASCE 41 baseline, wired for reproducible runs.
//!
//! Every command is a pure function of (inputs, [`RunConfig`]): seeds fix
//! the randomness, reports embed the resolved configuration, and re-running
//! a command rewrites byte-identical outputs. Configuration comes from an
//! optional TOML file (unknown keys rejected) with command-line flags
//! layered on top.
//!
//! Exit codes: 2 schema or configuration problems, 3 empty or insufficient
//! scope, 4 hyperparameter optimization failure, 5 backbone extraction
//! failure, 1 anything else.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::asce41::{
    back_calculate_shear, shear_controlled_params, Aci318Simplified, ConstantVn, VnModel,
    WallState,
};
use crate::dataset::{
    backbone_to_polyline, extract_backbone, filter_scope, load_csv, read_hysteresis_csv,
    write_polyline_csv, BackbonePoints, BackboneVar, DatasetError, ExtractConfig, ExtractError,
    ScopeCriteria, WallRecord, CANONICAL_FEATURES,
};
use crate::evaluation::{
    aggregate, compare_asce41, comparison_table, feature_matrix, filter_overtrained, make_splits,
    report_table, run_trials, AggregateReport, AsceComparison, EvalError, OvertrainRule,
    PipelineConfig, MIN_SPECIMENS,
};
use crate::gpr::{FitConfig, GprError, GprModel, LambdaChoice, OptimizerConfig};

#[derive(Debug)]
pub enum CliError {
    /// Malformed input files or configuration (exit 2).
    Schema(String),
    /// Scope filter left nothing (or not enough) to work with (exit 3).
    Scope(String),
    /// Hyperparameter optimization failed (exit 4).
    Optimization(String),
    /// Backbone extraction failed (exit 5).
    Extraction(String),
    /// Everything else (exit 1).
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Scope(_) => 3,
            CliError::Optimization(_) => 4,
            CliError::Extraction(_) => 5,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "schema: {m}"),
            CliError::Scope(m) => write!(f, "scope: {m}"),
            CliError::Optimization(m) => write!(f, "optimization: {m}"),
            CliError::Extraction(m) => write!(f, "extraction: {m}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::SchemaMismatch(_) | DatasetError::UnitError(_) | DatasetError::Csv(_) => {
                CliError::Schema(e.to_string())
            }
            DatasetError::InvalidBackbone(_) => CliError::Schema(e.to_string()),
            DatasetError::Io(_) => CliError::Other(e.to_string()),
        }
    }
}

impl From<GprError> for CliError {
    fn from(e: GprError) -> Self {
        match e {
            GprError::OptimizationDiverged(_) => CliError::Optimization(e.to_string()),
            GprError::Parse(_) | GprError::SchemaVersion { .. } => CliError::Schema(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::TooFewSpecimens { .. } => CliError::Scope(e.to_string()),
            EvalError::InvalidConfig(_) => CliError::Schema(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<ExtractError> for CliError {
    fn from(e: ExtractError) -> Self {
        CliError::Extraction(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

/// Which failure modes the run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScopeChoice {
    /// Shear and shear-flexure controlled walls (the recommended scope).
    #[serde(rename = "s-sf")]
    SSf,
    /// Every failure mode; geometry limits still apply.
    #[serde(rename = "all")]
    All,
}

impl std::str::FromStr for ScopeChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "s-sf" => Ok(ScopeChoice::SSf),
            "all" => Ok(ScopeChoice::All),
            other => Err(format!("scope must be 's-sf' or 'all', got '{other}'")),
        }
    }
}

impl ScopeChoice {
    pub fn criteria(&self) -> ScopeCriteria {
        match self {
            ScopeChoice::SSf => ScopeCriteria::default(),
            ScopeChoice::All => ScopeCriteria::all_modes(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// Aligned-column text.
    Table,
    /// The machine-readable TOML document.
    Doc,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "doc" => Ok(OutputFormat::Doc),
            other => Err(format!("format must be 'table' or 'doc', got '{other}'")),
        }
    }
}

/// The resolved run configuration; every report embeds it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: usize,
    pub train_fraction: f64,
    pub lambda: LambdaChoice,
    pub scope: ScopeChoice,
    pub features: Vec<String>,
    pub optimizer: OptimizerConfig,
    pub overtrain: OvertrainRule,
    pub compare_asce41: bool,
    pub format: OutputFormat,
    pub out_dir: PathBuf,
    pub extract: ExtractConfig,
    /// Constant nominal shear strength [kN]; None uses the ACI 318-style
    /// default formula.
    pub vn_kn: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            trials: 100,
            train_fraction: 0.9,
            lambda: LambdaChoice::Auto,
            scope: ScopeChoice::SSf,
            features: CANONICAL_FEATURES.iter().map(|s| s.to_string()).collect(),
            optimizer: PipelineConfig::default().optimizer,
            overtrain: OvertrainRule::default(),
            compare_asce41: false,
            format: OutputFormat::Table,
            out_dir: PathBuf::from("wallbone_out"),
            extract: ExtractConfig::default(),
            vn_kn: None,
        }
    }
}

impl RunConfig {
    /// Reads a TOML config file; unknown keys are rejected.
    pub fn from_file(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Schema(format!("config '{}': {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Schema(format!("config '{}': {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(CliError::Schema(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.trials == 0 {
            return Err(CliError::Schema("trials must be >= 1".into()));
        }
        if self.features.is_empty() {
            return Err(CliError::Schema("feature list must not be empty".into()));
        }
        for f in &self.features {
            if !CANONICAL_FEATURES.contains(&f.as_str()) {
                return Err(CliError::Schema(format!(
                    "unknown feature '{f}' (known: {})",
                    CANONICAL_FEATURES.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            features: self.features.clone(),
            lambda: self.lambda,
            optimizer: self.optimizer.clone(),
            parallel: true,
        }
    }

    fn fit_config(&self, seed: u64) -> FitConfig {
        FitConfig {
            lambda: self.lambda,
            optimizer: OptimizerConfig { seed, ..self.optimizer.clone() },
        }
    }

    fn vn_model(&self) -> Box<dyn VnModel> {
        match self.vn_kn {
            Some(v) => Box::new(ConstantVn(v)),
            None => Box::new(Aci318Simplified::default()),
        }
    }
}

/// Flag-level overrides layered on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub train_fraction: Option<f64>,
    pub lambda: Option<LambdaChoice>,
    pub scope: Option<ScopeChoice>,
    pub features: Option<Vec<String>>,
    pub compare_asce41: bool,
    pub format: Option<OutputFormat>,
    pub out_dir: Option<PathBuf>,
    pub vn_kn: Option<f64>,
}

/// Resolves file config plus overrides into the final [`RunConfig`].
pub fn resolve_config(file: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match file {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = overrides.seed {
        cfg.seed = v;
    }
    if let Some(v) = overrides.trials {
        cfg.trials = v;
    }
    if let Some(v) = overrides.train_fraction {
        cfg.train_fraction = v;
    }
    if let Some(v) = overrides.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = overrides.scope {
        cfg.scope = v;
    }
    if let Some(v) = &overrides.features {
        cfg.features = v.clone();
    }
    if overrides.compare_asce41 {
        cfg.compare_asce41 = true;
    }
    if let Some(v) = overrides.format {
        cfg.format = v;
    }
    if let Some(v) = &overrides.out_dir {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = overrides.vn_kn {
        cfg.vn_kn = Some(v);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_database(db: &Path) -> Result<Vec<WallRecord>, CliError> {
    let outcome = load_csv(db)?;
    for e in &outcome.row_errors {
        eprintln!("warning: {} row {}: {}", db.display(), e.row, e.message);
    }
    Ok(outcome.records)
}

fn scope_filter(records: Vec<WallRecord>, cfg: &RunConfig) -> Result<Vec<WallRecord>, CliError> {
    let total = records.len();
    let (in_scope, excluded) = filter_scope(records, &cfg.scope.criteria());
    if in_scope.is_empty() {
        return Err(CliError::Scope(format!(
            "no specimens left after scope filtering ({total} read, {} excluded)",
            excluded.len()
        )));
    }
    Ok(in_scope)
}

fn labeled_only(records: Vec<WallRecord>) -> Result<Vec<WallRecord>, CliError> {
    let (labeled, unlabeled): (Vec<_>, Vec<_>) =
        records.into_iter().partition(|r| r.backbone.is_some());
    if !unlabeled.is_empty() {
        eprintln!("warning: skipping {} specimens without backbone targets", unlabeled.len());
    }
    if labeled.is_empty() {
        return Err(CliError::Scope("no specimens carry backbone targets".into()));
    }
    Ok(labeled)
}

fn model_file_name(var: BackboneVar) -> String {
    format!("model_{}.toml", var.column())
}

// ---------------------------------------------------------------------------
// train

#[derive(Debug, Serialize)]
struct TrainedOutputSummary {
    output: String,
    lambda: f64,
    shift: f64,
    signal_variance: f64,
    noise_variance: f64,
    lengthscales: Vec<f64>,
    top_features: Vec<String>,
}

#[derive(Debug, Serialize)]
struct TrainReport {
    config: RunConfig,
    training_specimens: usize,
    outputs: Vec<TrainedOutputSummary>,
}

/// Fits one model per backbone variable on all in-scope specimens and
/// persists them plus a training report.
pub fn cmd_train(db: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let records = labeled_only(scope_filter(load_database(db)?, cfg)?)?;
    if records.len() < MIN_SPECIMENS {
        return Err(CliError::Scope(format!(
            "{} in-scope specimens, need at least {MIN_SPECIMENS}",
            records.len()
        )));
    }
    std::fs::create_dir_all(&cfg.out_dir)?;

    let refs: Vec<&WallRecord> = records.iter().collect();
    let x = feature_matrix(&refs, &cfg.features)?;
    let mut summaries = Vec::new();
    for (vi, var) in BackboneVar::ALL.iter().enumerate() {
        let y: Vec<f64> = records.iter().map(|r| r.backbone.unwrap().value(*var)).collect();
        let seed = cfg.seed.wrapping_add(vi as u64);
        let model = GprModel::fit(&x, &y, &cfg.features, var.column(), &cfg.fit_config(seed))?;
        model.save(&cfg.out_dir.join(model_file_name(*var)))?;

        let ranking = model.feature_relevance();
        summaries.push(TrainedOutputSummary {
            output: var.column().to_string(),
            lambda: model.transform().lambda,
            shift: model.transform().shift,
            signal_variance: model.params().signal_variance,
            noise_variance: model.params().noise_variance,
            lengthscales: model.params().lengthscales.clone(),
            top_features: ranking
                .iter()
                .take(5)
                .map(|(i, _)| cfg.features[*i].clone())
                .collect(),
        });
    }

    let report = TrainReport {
        config: cfg.clone(),
        training_specimens: records.len(),
        outputs: summaries,
    };
    let doc = toml::to_string(&report).expect("train report serializes");
    std::fs::write(cfg.out_dir.join("train_report.toml"), &doc)?;

    let mut table = format!(
        "trained {} models on {} specimens\n{:<10} {:>8} {:>12} {:>12}  top features\n",
        report.outputs.len(),
        report.training_specimens,
        "output",
        "lambda",
        "signal_var",
        "noise_var"
    );
    for o in &report.outputs {
        table.push_str(&format!(
            "{:<10} {:>8.3} {:>12.4} {:>12.4}  {}\n",
            o.output,
            o.lambda,
            o.signal_variance,
            o.noise_variance,
            o.top_features.join(", ")
        ));
    }
    std::fs::write(cfg.out_dir.join("train_report.txt"), &table)?;
    match cfg.format {
        OutputFormat::Table => print!("{table}"),
        OutputFormat::Doc => print!("{doc}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// predict

fn load_models(models_dir: &Path) -> Result<BTreeMap<BackboneVar, GprModel>, CliError> {
    let mut models = BTreeMap::new();
    for var in BackboneVar::ALL {
        let path = models_dir.join(model_file_name(var));
        if !path.exists() {
            return Err(CliError::Schema(format!("missing model file '{}'", path.display())));
        }
        models.insert(var, GprModel::load(&path)?);
    }
    let names = models[&BackboneVar::VCr].feature_names().to_vec();
    for m in models.values() {
        if m.feature_names() != names.as_slice() {
            return Err(CliError::Schema(
                "model files disagree on the feature schema".into(),
            ));
        }
    }
    Ok(models)
}

/// Predicts the seven backbone values (with posterior standard deviations)
/// for each specimen and writes plot-ready polylines for rows whose
/// predictions form a valid backbone. Monotonicity violations are flagged,
/// never silently repaired.
pub fn cmd_predict(models_dir: &Path, specimens: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let models = load_models(models_dir)?;
    let feature_names = models[&BackboneVar::VCr].feature_names().to_vec();
    let records = load_database(specimens)?;
    if records.is_empty() {
        return Err(CliError::Schema("no specimens to predict".into()));
    }
    std::fs::create_dir_all(&cfg.out_dir)?;

    let mut csv_out = String::new();
    csv_out.push_str("id");
    for var in BackboneVar::ALL {
        csv_out.push_str(&format!(",{}_mean,{}_std", var.column(), var.column()));
    }
    csv_out.push_str(",violations\n");

    let mut printed = String::new();
    for r in &records {
        let feats: Vec<f64> = feature_names
            .iter()
            .map(|n| {
                r.wall.feature(n).ok_or_else(|| {
                    CliError::Schema(format!(
                        "feature mismatch: model needs '{n}' which the specimen schema lacks"
                    ))
                })
            })
            .collect::<Result<_, _>>()?;

        let mut means = BTreeMap::new();
        csv_out.push_str(&r.wall.id);
        for var in BackboneVar::ALL {
            let p = models[&var]
                .predict(&feats)
                .map_err(|e| CliError::Other(format!("prediction for '{}': {e}", r.wall.id)))?;
            means.insert(var, p.mean);
            csv_out.push_str(&format!(",{},{}", p.mean, p.std));
        }

        let backbone = BackbonePoints::new(
            means[&BackboneVar::VCr],
            means[&BackboneVar::VY],
            means[&BackboneVar::DeltaY],
            means[&BackboneVar::VMax],
            means[&BackboneVar::DeltaMax],
            means[&BackboneVar::VU],
            means[&BackboneVar::DeltaU],
            r.wall.wall_height,
        );
        match backbone {
            Ok(b) => {
                csv_out.push_str(",\n");
                write_polyline_csv(&b, &cfg.out_dir.join(format!("polyline_{}.csv", r.wall.id)))?;
                printed.push_str(&format!("{}: ok\n", r.wall.id));
            }
            Err(e) => {
                let msg = e.to_string().replace(',', ";");
                csv_out.push_str(&format!(",{msg}\n"));
                printed.push_str(&format!("{}: flagged ({msg})\n", r.wall.id));
            }
        }
    }
    std::fs::write(cfg.out_dir.join("predictions.csv"), &csv_out)?;
    match cfg.format {
        OutputFormat::Table => print!("{printed}"),
        OutputFormat::Doc => print!("{csv_out}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate

#[derive(Debug, Serialize)]
struct EvaluationDocument {
    config: RunConfig,
    report: AggregateReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    asce41_comparison: Option<AsceComparison>,
}

/// Runs the repeated-split protocol and writes the aggregate report in both
/// formats; optionally appends the ASCE 41 comparison on the first trial's
/// held-out specimens.
pub fn cmd_evaluate(db: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let records = labeled_only(scope_filter(load_database(db)?, cfg)?)?;
    let ids: Vec<String> = records.iter().map(|r| r.wall.id.clone()).collect();
    let plan = make_splits(&ids, cfg.seed, cfg.trials, cfg.train_fraction)?;
    let results = run_trials(&records, &plan, &cfg.pipeline())?;
    let filtered = filter_overtrained(&results, &cfg.overtrain);
    let report = aggregate(&filtered, &cfg.overtrain, &cfg.features)?;

    let comparison = if cfg.compare_asce41 {
        Some(run_asce_comparison(&records, &plan.trials[0], cfg)?)
    } else {
        None
    };

    std::fs::create_dir_all(&cfg.out_dir)?;
    let doc = EvaluationDocument { config: cfg.clone(), report, asce41_comparison: comparison };
    let toml_text = toml::to_string(&doc).expect("evaluation document serializes");
    std::fs::write(cfg.out_dir.join("report.toml"), &toml_text)?;

    let mut table = report_table(&doc.report);
    if let Some(cmp) = &doc.asce41_comparison {
        table.push('\n');
        table.push_str(&comparison_table(cmp));
    }
    std::fs::write(cfg.out_dir.join("report.txt"), &table)?;

    match cfg.format {
        OutputFormat::Table => print!("{table}"),
        OutputFormat::Doc => print!("{toml_text}"),
    }
    Ok(())
}

/// Fits fresh models on the trial's training fold and compares them with the
/// ASCE 41 back-calculation on up to 20 of its held-out specimens.
fn run_asce_comparison(
    records: &[WallRecord],
    split: &crate::evaluation::TrialSplit,
    cfg: &RunConfig,
) -> Result<AsceComparison, CliError> {
    let by_id: BTreeMap<&str, &WallRecord> =
        records.iter().map(|r| (r.wall.id.as_str(), r)).collect();
    let train: Vec<&WallRecord> = split.train.iter().map(|id| by_id[id.as_str()]).collect();
    let test: Vec<WallRecord> = split
        .test
        .iter()
        .take(20)
        .map(|id| (*by_id[id.as_str()]).clone())
        .collect();

    let x = feature_matrix(&train, &cfg.features)?;
    let mut models = BTreeMap::new();
    for (vi, var) in BackboneVar::ALL.iter().enumerate() {
        let y: Vec<f64> = train.iter().map(|r| r.backbone.unwrap().value(*var)).collect();
        let seed = cfg.seed.wrapping_add(1000 + vi as u64);
        let model = GprModel::fit(&x, &y, &cfg.features, var.column(), &cfg.fit_config(seed))?;
        models.insert(*var, model);
    }
    Ok(compare_asce41(&test, &models, cfg.vn_model().as_ref())?)
}

// ---------------------------------------------------------------------------
// extract

/// Extracts backbone points from a cyclic record, printing the row and
/// writing the polyline.
pub fn cmd_extract(record_csv: &Path, height_mm: f64, cfg: &RunConfig) -> Result<(), CliError> {
    if !(height_mm > 0.0) {
        return Err(CliError::Schema(format!("height must be > 0 mm, got {height_mm}")));
    }
    let record = read_hysteresis_csv(record_csv, height_mm)?;
    let backbone = extract_backbone(&record, &cfg.extract)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    write_polyline_csv(&backbone, &cfg.out_dir.join("extracted_polyline.csv"))?;
    print_backbone(&backbone, cfg.format);
    Ok(())
}

// ---------------------------------------------------------------------------
// asce41

/// Baseline input: either a specimen file (V_y from the nominal-strength
/// model) or direct `--vy/--height/--axial-metric` values.
pub enum Asce41Input {
    Specimens(PathBuf),
    Direct { v_y_kn: f64, height_mm: f64, axial_metric: f64 },
}

/// Back-calculates ASCE 41-17 shear-wall backbone points and writes
/// polylines.
pub fn cmd_asce41(input: &Asce41Input, cfg: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    match input {
        Asce41Input::Direct { v_y_kn, height_mm, axial_metric } => {
            if !(*v_y_kn > 0.0 && *height_mm > 0.0) {
                return Err(CliError::Schema("--vy and --height must be positive".into()));
            }
            let params = shear_controlled_params(&WallState::new(*axial_metric, 0.0, false));
            let b = back_calculate_shear(&params, *v_y_kn, *height_mm);
            write_polyline_csv(&b, &cfg.out_dir.join("asce41_polyline.csv"))?;
            print_backbone(&b, cfg.format);
        }
        Asce41Input::Specimens(path) => {
            let records = load_database(path)?;
            if records.is_empty() {
                return Err(CliError::Schema("no specimens in input".into()));
            }
            let vn = cfg.vn_model();
            for r in &records {
                let v_n = vn.nominal_shear_strength_kn(&r.wall);
                let state = WallState::from_specimen(&r.wall, v_n);
                let params = shear_controlled_params(&state);
                let b = back_calculate_shear(&params, v_n, r.wall.wall_height);
                write_polyline_csv(
                    &b,
                    &cfg.out_dir.join(format!("asce41_polyline_{}.csv", r.wall.id)),
                )?;
                println!("{} (V_n = {:.1} kN)", r.wall.id, v_n);
                print_backbone(&b, cfg.format);
            }
        }
    }
    Ok(())
}

fn print_backbone(b: &BackbonePoints, format: OutputFormat) {
    match format {
        OutputFormat::Table => {
            println!(
                "{:<10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
                "Vcr_kn", "Vy_kn", "dy_mm", "Vmax_kn", "dmax_mm", "Vu_kn", "du_mm"
            );
            println!(
                "{:<10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
                b.v_cr, b.v_y, b.delta_y, b.v_max, b.delta_max, b.v_u, b.delta_u
            );
            for (d, f) in backbone_to_polyline(b) {
                println!("  ({d:.3} mm, {f:.3} kN)");
            }
        }
        OutputFormat::Doc => {
            println!("{}", toml::to_string(b).expect("backbone serializes"));
        }
    }
}
