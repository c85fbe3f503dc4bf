//! The `sae` command line.
//!
//! Every command prints a short human summary on stdout, writes its JSON
//! artifact atomically (plus a `.txt` rendering for reports), and maps
//! failures to exit codes: 1 usage, 2 data, 3 numerical.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::clustering::{
    clustering_loss, encode_labels, kmeans, project_and_cluster, save_assignments_csv, synth_generate_with,
    KMeansConfig, SynthKind, SynthParams, DEFAULT_RESTARTS, TEST_SEED_OFFSET,
};
use crate::data::{gzsl_split, l2_normalize_columns, load_manifest, save_dataset, zsl_split, LabeledDataset, SplitSpec};
use crate::error::{Error, ErrorClass, Result};
use crate::io::write_atomic;
use crate::matlin::{solve_sylvester, sylvester_residual, Lu, Matrix};
use crate::sae::{train_sae_with_retry, Method, SaeModel, TrainConfig, DEFAULT_LAMBDA};
use crate::zsl::synthetic::{generate, SyntheticZslConfig};
use crate::zsl::{
    ausuc, classify, cross_validate_lambda, gzsl_accuracy, gzsl_scores, hit_at_k, multiway_accuracy,
    natural_direction, score_matrix, CvConfig, Direction, DistanceKind, EvalReport, EvalRow, LambdaScore,
    ReportConfig, DEFAULT_FOLDS, DEFAULT_GAMMA_GRID,
};

#[derive(Parser, Debug)]
#[command(name = "sae", version, about = "Semantic autoencoder for zero-shot learning and supervised clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train an encoder on the seen classes of a manifest
    Train(TrainArgs),
    /// Zero-shot accuracy on the unseen classes
    ZslEval(ZslArgs),
    /// Generalized zero-shot evaluation (AUSUC) on a mixed test set
    GzslEval(GzslArgs),
    /// Supervised clustering: SAE projection + k-means against raw k-means
    Cluster(ClusterArgs),
    /// Write a synthetic dataset and its manifest
    Synth(SynthArgs),
    /// Check the Sylvester solver against a dense Kronecker solve
    SolverCheck(SolverArgs),
}

#[derive(Args, Debug, Clone)]
struct LambdaArgs {
    /// Fixed weight of the encoder term
    #[arg(long, conflicts_with = "lambda_grid", allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Comma-separated grid; picks λ by class-wise cross-validation
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    lambda_grid: Option<Vec<f64>>,
    /// Class-wise folds for cross-validation
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long)]
    manifest: PathBuf,
    /// L2-normalize every feature vector before use
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value = "cosine")]
    distance: DistanceKind,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    lambda: LambdaArgs,
    /// Route scored during cross-validation
    #[arg(long, value_enum, default_value_t = DirectionArg::Encoder)]
    direction: DirectionArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ZslArgs {
    #[command(flatten)]
    common: Common,
    /// Trained model; otherwise one is trained on the seen classes
    #[arg(long, conflicts_with_all = ["lambda", "lambda_grid"])]
    model: Option<PathBuf>,
    #[command(flatten)]
    lambda: LambdaArgs,
    #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
    direction: DirectionArg,
    /// Also evaluate both ridge regressions (needs no --model)
    #[arg(long, conflicts_with = "model")]
    baselines: bool,
    /// Ranks reported as hit@k
    #[arg(long, value_delimiter = ',', default_value = "1,5")]
    hit_k: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GzslArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, conflicts_with_all = ["lambda", "lambda_grid"])]
    model: Option<PathBuf>,
    #[command(flatten)]
    lambda: LambdaArgs,
    #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
    direction: DirectionArg,
    /// Seed of the seen-class holdout
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_GAMMA_GRID)]
    gamma_grid: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    /// Training data; its labels define the semantic space
    #[arg(long, required_unless_present = "synth", conflicts_with = "synth")]
    manifest: Option<PathBuf>,
    /// Test data to cluster (defaults to the training manifest)
    #[arg(long, requires = "manifest")]
    test_manifest: Option<PathBuf>,
    /// Use a built-in synthetic benchmark instead of manifests
    #[arg(long, value_enum)]
    synth: Option<SynthArg>,
    /// Number of clusters (defaults to the number of test classes)
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = DEFAULT_LAMBDA, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the SAE cluster assignments (defaults next to --out)
    #[arg(long)]
    assignments: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SynthArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Noise fraction for the clustering kinds
    #[arg(long)]
    noise: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Size of B (and of A unless --k is given)
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional JSON summary
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum DirectionArg {
    Encoder,
    Decoder,
    Both,
}

impl DirectionArg {
    fn routes(self) -> Vec<Direction> {
        match self {
            DirectionArg::Encoder => vec![Direction::Encoder],
            DirectionArg::Decoder => vec![Direction::Decoder],
            DirectionArg::Both => vec![Direction::Encoder, Direction::Decoder],
        }
    }

    fn name(self) -> &'static str {
        match self {
            DirectionArg::Encoder => "encoder",
            DirectionArg::Decoder => "decoder",
            DirectionArg::Both => "both",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
#[value(rename_all = "snake_case")]
enum SynthArg {
    SameSize,
    DiffSizeNoisy,
    Zsl,
}

impl SynthArg {
    fn clustering(self) -> Option<SynthKind> {
        match self {
            SynthArg::SameSize => Some(SynthKind::SameSize),
            SynthArg::DiffSizeNoisy => Some(SynthKind::DiffSizeNoisy),
            SynthArg::Zsl => None,
        }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Train(a) => train(a),
        Command::ZslEval(a) => zsl_eval(a),
        Command::GzslEval(a) => gzsl_eval(a),
        Command::Cluster(a) => cluster(a),
        Command::Synth(a) => synth(a),
        Command::SolverCheck(a) => solver_check(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Data => 2,
                ErrorClass::Numerical => 3,
            }
        }
    }
}

fn load(common: &Common) -> Result<(LabeledDataset, Option<SplitSpec>)> {
    let (ds, split) = load_manifest(&common.manifest)?;
    if common.normalize {
        let normalized = l2_normalize_columns(ds.features());
        return Ok((ds.with_features(normalized)?, split));
    }
    Ok((ds, split))
}

fn require_split(split: Option<SplitSpec>) -> Result<SplitSpec> {
    split.ok_or_else(|| Error::data("manifest has no seen_classes/unseen_classes split"))
}

fn require_semantics(ds: &LabeledDataset) -> Result<()> {
    if ds.semantics().is_none() {
        return Err(Error::data("manifest has no semantics_csv"));
    }
    Ok(())
}

fn validate_lambda(args: &LambdaArgs) -> Result<()> {
    if let Some(l) = args.lambda {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::invalid(format!("--lambda must be positive, got {l}")));
        }
    }
    if let Some(grid) = &args.lambda_grid {
        if grid.is_empty() {
            return Err(Error::invalid("--lambda-grid is empty"));
        }
    }
    Ok(())
}

struct Fit {
    w: Matrix,
    lambda: f64,
    scores: Option<Vec<LambdaScore>>,
    /// Set for SAE only.
    model: Option<SaeModel>,
}

/// Fits `method` on `train`, cross-validating λ when a grid is given.
fn fit(
    method: Method,
    train: &LabeledDataset,
    lambda: &LambdaArgs,
    direction: Direction,
    distance: DistanceKind,
) -> Result<Fit> {
    let (best, scores) = match &lambda.lambda_grid {
        Some(grid) => {
            let cv = CvConfig {
                lambda_grid: grid.clone(),
                folds: lambda.folds,
                method,
                direction,
                distance,
            };
            let semantics = train.semantics().expect("checked by caller");
            let out = cross_validate_lambda(train.features(), train.labels(), semantics, &cv)?;
            (out.best_lambda, Some(out.scores))
        }
        None => (lambda.lambda.unwrap_or(DEFAULT_LAMBDA), None),
    };
    let s = train.semantic_matrix()?;
    if method == Method::Sae {
        let model = train_sae_with_retry(train.features(), &s, &TrainConfig::with_lambda(best))?;
        return Ok(Fit {
            w: model.w().clone(),
            lambda: best,
            scores,
            model: Some(model),
        });
    }
    Ok(Fit {
        w: method.fit(train.features(), &s, best)?,
        lambda: best,
        scores,
        model: None,
    })
}

fn report_jitter(model: &SaeModel) {
    if let Some(j) = model.jitter() {
        println!(
            "note: singular Sylvester pencil; retried with diagonal jitter A+{:.3e}·I, B+{:.3e}·I",
            j.a, j.b
        );
    }
}

fn print_cv(scores: &[LambdaScore], best: f64) {
    for s in scores {
        let acc = s.accuracy.map_or_else(|| "failed".to_owned(), |a| format!("{a:.4}"));
        let mark = if s.lambda == best { "  <- selected" } else { "" };
        println!("  λ = {:<10} cv accuracy {acc}{mark}", s.lambda);
    }
}

fn txt_path(out: &Path) -> PathBuf {
    out.with_extension("txt")
}

fn write_report(out: &Path, report: &EvalReport) -> Result<()> {
    report.validate()?;
    write_atomic(out, report.to_json().as_bytes())?;
    let text = report.render_text();
    write_atomic(&txt_path(out), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    validate_lambda(&a.lambda)?;
    let (ds, split) = load(&a.common)?;
    require_semantics(&ds)?;
    let train = match &split {
        Some(spec) => zsl_split(&ds, spec)?.train,
        None => ds,
    };
    let direction = a.direction.routes()[0];
    let Fit {
        lambda: best,
        scores,
        model,
        ..
    } = fit(Method::Sae, &train, &a.lambda, direction, a.common.distance)?;
    let model = model.expect("SAE fit returns a model");
    if let Some(scores) = &scores {
        print_cv(scores, best);
    }
    report_jitter(&model);
    model.save(&a.out)?;
    println!(
        "trained W ({}×{}) on {} samples, λ = {best}, Sylvester residual {:.3e}",
        model.k(),
        model.d(),
        train.len(),
        model.train_residual()
    );
    println!("wrote {}", a.out.display());
    Ok(())
}

fn load_model(path: &Path, train: &LabeledDataset) -> Result<SaeModel> {
    let model = SaeModel::load(path)?;
    let k = train.semantics().map_or(model.k(), |s| s.dim());
    if model.d() != train.dim() || model.k() != k {
        return Err(Error::data(format!(
            "model is {}×{} but the data need {}×{}",
            model.k(),
            model.d(),
            k,
            train.dim()
        )));
    }
    Ok(model)
}

fn zsl_eval(a: ZslArgs) -> Result<()> {
    validate_lambda(&a.lambda)?;
    if a.hit_k.contains(&0) {
        return Err(Error::invalid("--hit-k entries must be at least 1"));
    }
    let (ds, split) = load(&a.common)?;
    require_semantics(&ds)?;
    let spec = require_split(split)?;
    let parts = zsl_split(&ds, &spec)?;
    let dist = a.common.distance;
    let routes = a.direction.routes();

    let (w, lambda, lambda_scores) = match &a.model {
        Some(path) => {
            let m = load_model(path, &parts.train)?;
            (m.w().clone(), m.lambda(), None)
        }
        None => {
            let f = fit(Method::Sae, &parts.train, &a.lambda, routes[0], dist)?;
            report_jitter(f.model.as_ref().expect("SAE fit returns a model"));
            (f.w, f.lambda, f.scores)
        }
    };

    let test_classes = parts.test.classes();
    let protos = parts.test.semantics().expect("checked above").select(&test_classes)?;
    let mut rows = Vec::new();
    let mut evaluate = |name: &str, w: &Matrix, direction: Direction| -> Result<()> {
        let pred = classify(w, parts.test.features(), &protos, dist, direction)?;
        let acc = multiway_accuracy(&pred, parts.test.labels())?;
        let mut row = EvalRow::new(name)
            .metric("accuracy", acc.overall)
            .metric("mean_class_accuracy", acc.mean_per_class)
            .per_class(acc.per_class);
        let scores = score_matrix(w, parts.test.features(), &protos, dist, direction)?;
        for &k in a.hit_k.iter().filter(|&&k| k <= protos.len()) {
            row = row.metric(&format!("hit@{k}"), hit_at_k(&scores, &test_classes, parts.test.labels(), k)?);
        }
        rows.push(row);
        Ok(())
    };
    for &route in &routes {
        evaluate(route.row_label(), &w, route)?;
    }
    if a.baselines {
        for method in [Method::RidgeForward, Method::RidgeReverse] {
            let route = natural_direction(method);
            let f = fit(method, &parts.train, &a.lambda, route, dist)?;
            evaluate(&format!("{} (λ={})", method.label(), f.lambda), &f.w, route)?;
        }
    }

    let report = EvalReport::new(
        ReportConfig {
            command: "zsl-eval".into(),
            distance: dist,
            direction: a.direction.name().into(),
            lambda,
            normalize: a.common.normalize,
            seed: None,
            lambda_scores,
        },
        rows,
    )?;
    write_report(&a.out, &report)
}

fn gzsl_eval(a: GzslArgs) -> Result<()> {
    validate_lambda(&a.lambda)?;
    let (ds, split) = load(&a.common)?;
    require_semantics(&ds)?;
    let spec = require_split(split)?;
    let parts = gzsl_split(&ds, &spec, a.seed)?;
    let dist = a.common.distance;
    let routes = a.direction.routes();

    let (w, lambda, lambda_scores) = match &a.model {
        Some(path) => {
            let m = load_model(path, &parts.train)?;
            (m.w().clone(), m.lambda(), None)
        }
        None => {
            let f = fit(Method::Sae, &parts.train, &a.lambda, routes[0], dist)?;
            report_jitter(f.model.as_ref().expect("SAE fit returns a model"));
            (f.w, f.lambda, f.scores)
        }
    };

    let semantics = parts.test.semantics().expect("checked above");
    let mut rows = Vec::new();
    for &route in &routes {
        let scores = gzsl_scores(&w, parts.test.features(), semantics, &spec.seen, &spec.unseen, dist, route)?;
        let curve = ausuc(&scores, parts.test.labels(), &parts.seen_mask, a.gamma_grid)?;
        let plain = gzsl_accuracy(&scores, parts.test.labels(), &parts.seen_mask, 0.0)?;
        rows.push(
            EvalRow::new(route.row_label())
                .metric("ausuc", curve.area)
                .metric("seen_accuracy", plain.seen_accuracy)
                .metric("unseen_accuracy", plain.unseen_accuracy)
                .curve(curve.curve),
        );
    }
    let report = EvalReport::new(
        ReportConfig {
            command: "gzsl-eval".into(),
            distance: dist,
            direction: a.direction.name().into(),
            lambda,
            normalize: a.common.normalize,
            seed: Some(a.seed),
            lambda_scores,
        },
        rows,
    )?;
    write_report(&a.out, &report)
}

#[derive(Debug, Serialize)]
struct ClusterSummary {
    loss: f64,
    inertia: f64,
    restart: usize,
    iterations: usize,
}

#[derive(Debug, Serialize)]
struct ClusterReport {
    source: String,
    k: usize,
    restarts: usize,
    seed: u64,
    lambda: f64,
    normalize: bool,
    train_samples: usize,
    test_samples: usize,
    sae: ClusterSummary,
    raw: ClusterSummary,
}

impl ClusterReport {
    fn render_text(&self) -> String {
        let mut out = format!(
            "cluster  source={}  k={}  restarts={}  seed={}  lambda={}  normalize={}\n",
            self.source, self.k, self.restarts, self.seed, self.lambda, self.normalize
        );
        out.push_str(&format!(
            "train samples {}, test samples {}\n\n",
            self.train_samples, self.test_samples
        ));
        out.push_str(&format!("{:<16}  {:>10}  {:>14}\n", "method", "Δ", "inertia"));
        for (name, s) in [("SAE + k-means", &self.sae), ("k-means (raw)", &self.raw)] {
            out.push_str(&format!("{name:<16}  {:>10.4}  {:>14.4}\n", s.loss, s.inertia));
        }
        out
    }
}

fn cluster(a: ClusterArgs) -> Result<()> {
    if !(a.lambda > 0.0 && a.lambda.is_finite()) {
        return Err(Error::invalid(format!("--lambda must be positive, got {}", a.lambda)));
    }
    let (source, train, test) = match (&a.synth, &a.manifest) {
        (Some(kind), _) => {
            let kind = kind
                .clustering()
                .ok_or_else(|| Error::invalid("--synth zsl is not a clustering benchmark"))?;
            let params = SynthParams::for_kind(kind);
            let train = synth_generate_with(kind, &params, a.seed)?;
            let clean = SynthParams {
                noise_fraction: 0.0,
                ..params
            };
            let test = synth_generate_with(kind, &clean, a.seed.wrapping_add(TEST_SEED_OFFSET))?;
            (format!("synth:{kind}"), train, test)
        }
        (None, Some(path)) => {
            let (train, _) = load_manifest(path)?;
            let test = match &a.test_manifest {
                Some(p) => load_manifest(p)?.0,
                None => train.clone(),
            };
            ("manifest".to_owned(), train, test)
        }
        (None, None) => unreachable!("clap requires --manifest or --synth"),
    };
    let (train, test) = if a.normalize {
        (
            train.with_features(l2_normalize_columns(train.features()))?,
            test.with_features(l2_normalize_columns(test.features()))?,
        )
    } else {
        (train, test)
    };
    if train.dim() != test.dim() {
        return Err(Error::data(format!(
            "training features have dimension {} but test features {}",
            train.dim(),
            test.dim()
        )));
    }
    let k = a.k.unwrap_or_else(|| test.classes().len());

    let enc = encode_labels(train.labels())?;
    let model = train_sae_with_retry(train.features(), &enc.s_matrix, &TrainConfig::with_lambda(a.lambda))?;
    report_jitter(&model);
    let sae = project_and_cluster(&model, test.features(), k, a.restarts, a.seed)?;
    let raw = kmeans(
        test.features(),
        &KMeansConfig {
            k,
            restarts: a.restarts,
            seed: a.seed,
            ..KMeansConfig::default()
        },
    )?;
    let summary = |c: &crate::clustering::ClusterAssignment| -> Result<ClusterSummary> {
        Ok(ClusterSummary {
            loss: clustering_loss(&c.labels, test.labels())?,
            inertia: c.inertia,
            restart: c.restart,
            iterations: c.iterations,
        })
    };
    let report = ClusterReport {
        source,
        k,
        restarts: a.restarts,
        seed: a.seed,
        lambda: a.lambda,
        normalize: a.normalize,
        train_samples: train.len(),
        test_samples: test.len(),
        sae: summary(&sae)?,
        raw: summary(&raw)?,
    };

    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_atomic(&a.out, json.as_bytes())?;
    let text = report.render_text();
    write_atomic(&txt_path(&a.out), text.as_bytes())?;
    let assignments = a
        .assignments
        .clone()
        .unwrap_or_else(|| a.out.with_extension("assignments.csv"));
    save_assignments_csv(&assignments, &sae.labels)?;
    print!("{text}");
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let path = match a.kind.clustering() {
        Some(kind) => {
            let mut params = SynthParams::for_kind(kind);
            if let Some(noise) = a.noise {
                params.noise_fraction = noise;
            }
            let ds = synth_generate_with(kind, &params, a.seed)?;
            save_dataset(&a.out, &ds, None)?
        }
        None => {
            if a.noise.is_some() {
                return Err(Error::invalid("--noise applies to the clustering kinds only"));
            }
            let task = generate(&SyntheticZslConfig::default(), a.seed)?;
            save_dataset(&a.out, &task.dataset, Some(&task.split))?
        }
    };
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct SolverReport {
    k: usize,
    d: usize,
    seed: u64,
    relative_residual: f64,
    max_oracle_deviation: f64,
    residual_tolerance: f64,
    deviation_tolerance: f64,
    passed: bool,
}

/// Dense solve of `(I⊗A + Bᵀ⊗I)·vec(W) = vec(C)`.
fn kronecker_solve(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Matrix> {
    let (k, d) = c.shape();
    let n = k * d;
    let mut m = Matrix::zeros(n, n);
    for j in 0..d {
        for i in 0..k {
            let row = j * k + i;
            for i2 in 0..k {
                m.column_mut(j * k + i2)[row] += a[(i, i2)];
            }
            for j2 in 0..d {
                m.column_mut(j2 * k + i)[row] += b[(j2, j)];
            }
        }
    }
    let rhs = Matrix::from_col_major(n, 1, c.as_slice().to_vec())?;
    let x = Lu::new(&m)?.solve(&rhs)?;
    Ok(Matrix::from_col_major(k, d, x.into_vec())?)
}

fn solver_check(a: SolverArgs) -> Result<()> {
    let d = a.dim;
    let k = a.k.unwrap_or(d);
    if d == 0 || k == 0 || d * k > 1600 {
        return Err(Error::invalid("solver-check needs 1 ≤ k·dim ≤ 1600 for the dense oracle"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut randn = |r: usize, c: usize| Matrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
    let g = randn(k, k);
    let h = randn(d, d);
    let cm = randn(k, d);
    let am = g.gram_rows();
    let bm = h.gram_rows().add_diagonal(1.0);

    let w = solve_sylvester(&am, &bm, &cm)?;
    let relative_residual = sylvester_residual(&am, &w, &bm, &cm)? / cm.frobenius_norm().max(f64::MIN_POSITIVE);
    let oracle = kronecker_solve(&am, &bm, &cm)?;
    let max_oracle_deviation = w.max_abs_diff(&oracle).expect("same shape");
    let (residual_tolerance, deviation_tolerance) = (1e-8, 1e-6);
    let report = SolverReport {
        k,
        d,
        seed: a.seed,
        relative_residual,
        max_oracle_deviation,
        residual_tolerance,
        deviation_tolerance,
        passed: relative_residual <= residual_tolerance && max_oracle_deviation <= deviation_tolerance,
    };
    println!("Sylvester {k}×{d}, seed {}", a.seed);
    println!("  relative residual        {relative_residual:.3e}  (tolerance {residual_tolerance:.0e})");
    println!("  max |W − W_kronecker|    {max_oracle_deviation:.3e}  (tolerance {deviation_tolerance:.0e})");
    if let Some(out) = &a.out {
        let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
        json.push('\n');
        write_atomic(out, json.as_bytes())?;
    }
    if !report.passed {
        return Err(Error::ResidualTooLarge {
            residual: relative_residual.max(max_oracle_deviation),
            tolerance: residual_tolerance,
        });
    }
    println!("ok");
    Ok(())
}
