//! Semantic autoencoder training.
//!
//! The encoder `W` (k×d) maps visual features into the semantic space and
//! its transpose maps semantic vectors back. Training minimizes
//!
//! ```text
//! ‖X − WᵀS‖²_F + λ‖WX − S‖²_F
//! ```
//!
//! whose stationarity condition is the Sylvester equation
//! `SSᵀ·W + W·(λXXᵀ) = (1+λ)·SXᵀ`. Only the two Gram products touch the `N`
//! samples; the solve itself costs `O(d³ + k³)`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::matlin::{
    solve_spd, solve_sylvester_with, sylvester_residual, LinalgError, Matrix, SchurOptions,
    SylvesterOptions, DEFLATION_TOL,
};

/// Weight of the encoder term when none is given or cross-validated.
pub const DEFAULT_LAMBDA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub lambda: f64,
    /// Francis sweep budget per Schur decomposition; `None` is `30·n`.
    pub schur_max_iters: Option<usize>,
    /// Bound on `‖AW + WB − C‖_F / max(1, ‖C‖_F)` at the returned solution.
    pub residual_tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: DEFAULT_LAMBDA,
            schur_max_iters: None,
            residual_tol: 1e-6,
        }
    }
}

impl TrainConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        TrainConfig {
            lambda,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::invalid("residual_tol must be positive"));
        }
        Ok(())
    }

    fn sylvester_options(&self) -> SylvesterOptions {
        SylvesterOptions {
            schur: SchurOptions {
                max_iters: self.schur_max_iters,
                tol: DEFLATION_TOL,
            },
            ..SylvesterOptions::default()
        }
    }
}

/// Diagonal shifts added to the Sylvester coefficients of a degenerate
/// training problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jitter {
    pub a: f64,
    pub b: f64,
}

/// The linear system whose solution is the trained encoder.
#[derive(Debug, Clone)]
pub struct SylvesterSystem {
    /// `S·Sᵀ`, k×k.
    pub a: Matrix,
    /// `λ·X·Xᵀ`, d×d.
    pub b: Matrix,
    /// `(1+λ)·S·Xᵀ`, k×d.
    pub c: Matrix,
    pub lambda: f64,
    pub jitter: Option<Jitter>,
}

impl SylvesterSystem {
    pub fn from_data(x: &Matrix, s: &Matrix, lambda: f64) -> Result<Self> {
        if x.cols() != s.cols() {
            return Err(LinalgError::DimensionMismatch {
                op: "train_sae",
                left: x.shape(),
                right: s.shape(),
            }
            .into());
        }
        if x.cols() == 0 {
            return Err(Error::invalid("training needs at least one sample"));
        }
        x.ensure_finite("train_sae features")?;
        s.ensure_finite("train_sae semantics")?;
        let finite = |m: Matrix| {
            if m.is_finite() {
                Ok(m)
            } else {
                Err(LinalgError::Overflow { op: "train_sae" })
            }
        };
        Ok(SylvesterSystem {
            a: finite(s.gram_rows())?,
            b: finite(x.gram_rows().scale(lambda))?,
            c: finite(s.matmul_t(x)?.scale(1.0 + lambda))?,
            lambda,
            jitter: None,
        })
    }

    /// Adds `1e-8·trace/dim` to the diagonals of `A` and `B`.
    pub fn jittered(&self) -> Self {
        let eps = |m: &Matrix| {
            let n = m.rows().max(1) as f64;
            let e = 1e-8 * m.trace() / n;
            if e > 0.0 {
                e
            } else {
                1e-8
            }
        };
        let (ea, eb) = (eps(&self.a), eps(&self.b));
        SylvesterSystem {
            a: self.a.add_diagonal(ea),
            b: self.b.add_diagonal(eb),
            c: self.c.clone(),
            lambda: self.lambda,
            jitter: Some(Jitter { a: ea, b: eb }),
        }
    }

    pub fn solve(&self, cfg: &TrainConfig) -> Result<SaeModel> {
        cfg.validate()?;
        let w = solve_sylvester_with(&self.a, &self.b, &self.c, &cfg.sylvester_options())?;
        let residual = sylvester_residual(&self.a, &w, &self.b, &self.c)?;
        let tolerance = cfg.residual_tol * self.c.frobenius_norm().max(1.0);
        if residual > tolerance {
            return Err(Error::ResidualTooLarge {
                residual,
                tolerance,
            });
        }
        let (k, d) = w.shape();
        Ok(SaeModel {
            w,
            lambda: self.lambda,
            train_residual: residual,
            k,
            d,
            jitter: self.jitter,
        })
    }
}

/// Trains the encoder from features `x` (d×N) and semantics `s` (k×N).
pub fn train_sae(x: &Matrix, s: &Matrix, cfg: &TrainConfig) -> Result<SaeModel> {
    cfg.validate()?;
    SylvesterSystem::from_data(x, s, cfg.lambda)?.solve(cfg)
}

/// Like [`train_sae`], but retries once with diagonal jitter when the
/// system is a singular pencil; the jitter used is recorded on the model.
pub fn train_sae_with_retry(x: &Matrix, s: &Matrix, cfg: &TrainConfig) -> Result<SaeModel> {
    cfg.validate()?;
    let sys = SylvesterSystem::from_data(x, s, cfg.lambda)?;
    match sys.solve(cfg) {
        Err(Error::Linalg(LinalgError::SingularPencil { .. })) => sys.jittered().solve(cfg),
        other => other,
    }
}

/// A trained semantic autoencoder. The decoder is `wᵀ`; there is no second
/// parameter matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaeModel {
    w: Matrix,
    lambda: f64,
    train_residual: f64,
    k: usize,
    d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jitter: Option<Jitter>,
}

impl SaeModel {
    /// Wraps an externally supplied encoder, e.g. for evaluation of a fixed
    /// projection.
    pub fn from_weights(w: Matrix, lambda: f64) -> Result<Self> {
        let (k, d) = w.shape();
        let model = SaeModel {
            w,
            lambda,
            train_residual: 0.0,
            k,
            d,
            jitter: None,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.w.shape() != (self.k, self.d) {
            return Err(Error::data(format!(
                "model weights are {}x{} but dims say {}x{}",
                self.w.rows(),
                self.w.cols(),
                self.k,
                self.d
            )));
        }
        self.w.ensure_finite("model weights")?;
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::data(format!("model lambda must be positive, got {}", self.lambda)));
        }
        if !(self.train_residual >= 0.0) {
            return Err(Error::data("model residual must be non-negative"));
        }
        Ok(())
    }

    pub fn w(&self) -> &Matrix {
        &self.w
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn train_residual(&self) -> f64 {
        self.train_residual
    }

    pub fn jitter(&self) -> Option<Jitter> {
        self.jitter
    }

    /// Semantic dimension.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Feature dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn encode(&self, x: &Matrix) -> Result<Matrix> {
        Projection::encode(self, x)
    }

    pub fn decode(&self, s: &Matrix) -> Result<Matrix> {
        Projection::decode(self, s)
    }

    /// `‖X − WᵀS‖²_F + λ‖WX − S‖²_F` at this model's weights and λ.
    pub fn objective(&self, x: &Matrix, s: &Matrix) -> Result<f64> {
        objective(&self.w, self.lambda, x, s)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::data(format!("serialize model: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: SaeModel =
            serde_json::from_str(text).map_err(|e| Error::data(format!("model JSON: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SaeModel::from_json(&text).map_err(|e| match e {
            Error::Data(msg) => Error::parse(path, msg),
            other => other,
        })
    }
}

/// Relaxed autoencoder objective for an arbitrary encoder `w`.
pub fn objective(w: &Matrix, lambda: f64, x: &Matrix, s: &Matrix) -> Result<f64> {
    let recon = x.sub(&w.t_matmul(s)?)?;
    let embed = w.matmul(x)?.sub(s)?;
    Ok(recon.frobenius_norm_sq() + lambda * embed.frobenius_norm_sq())
}

/// Anything that acts as a linear encoder `W` with decoder `Wᵀ`.
pub trait Projection {
    fn weights(&self) -> &Matrix;

    /// `W·X`: features (d×M) into the semantic space.
    fn encode(&self, x: &Matrix) -> Result<Matrix> {
        let w = self.weights();
        if x.rows() != w.cols() {
            return Err(LinalgError::DimensionMismatch {
                op: "encode",
                left: w.shape(),
                right: x.shape(),
            }
            .into());
        }
        Ok(w.matmul(x)?)
    }

    /// `Wᵀ·S`: semantic vectors (k×M) into the feature space.
    fn decode(&self, s: &Matrix) -> Result<Matrix> {
        let w = self.weights();
        if s.rows() != w.rows() {
            return Err(LinalgError::DimensionMismatch {
                op: "decode",
                left: w.shape(),
                right: s.shape(),
            }
            .into());
        }
        Ok(w.t_matmul(s)?)
    }
}

impl Projection for SaeModel {
    fn weights(&self) -> &Matrix {
        &self.w
    }
}

impl Projection for Matrix {
    fn weights(&self) -> &Matrix {
        self
    }
}

/// Ridge regression from features to semantics:
/// `min ‖WX − S‖² + λ‖W‖²`, i.e. `W = SXᵀ(XXᵀ + λI)⁻¹`.
pub fn solve_ridge_forward(x: &Matrix, s: &Matrix, lambda: f64) -> Result<Matrix> {
    check_ridge_inputs(x, s, lambda)?;
    let gram = x.gram_rows().add_diagonal(lambda);
    let xst = x.matmul_t(s)?;
    Ok(solve_spd(&gram, &xst)?.transpose())
}

/// Ridge regression from semantics to features:
/// `min ‖X − WᵀS‖² + λ‖W‖²`, i.e. `W = (SSᵀ + λI)⁻¹SXᵀ`.
pub fn solve_ridge_reverse(x: &Matrix, s: &Matrix, lambda: f64) -> Result<Matrix> {
    check_ridge_inputs(x, s, lambda)?;
    let gram = s.gram_rows().add_diagonal(lambda);
    let sxt = s.matmul_t(x)?;
    Ok(solve_spd(&gram, &sxt)?)
}

fn check_ridge_inputs(x: &Matrix, s: &Matrix, lambda: f64) -> Result<()> {
    if x.cols() != s.cols() {
        return Err(LinalgError::DimensionMismatch {
            op: "ridge",
            left: x.shape(),
            right: s.shape(),
        }
        .into());
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// The three linear projections compared in the ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Sae,
    RidgeForward,
    RidgeReverse,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Sae, Method::RidgeForward, Method::RidgeReverse];

    /// Fits an encoder `W` (k×d) with this method.
    pub fn fit(self, x: &Matrix, s: &Matrix, lambda: f64) -> Result<Matrix> {
        match self {
            Method::Sae => Ok(train_sae(x, s, &TrainConfig::with_lambda(lambda))?.w),
            Method::RidgeForward => solve_ridge_forward(x, s, lambda),
            Method::RidgeReverse => solve_ridge_reverse(x, s, lambda),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Sae => "SAE",
            Method::RidgeForward => "ridge F→S",
            Method::RidgeReverse => "ridge S→F",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sae" => Ok(Method::Sae),
            "ridge-forward" => Ok(Method::RidgeForward),
            "ridge-reverse" => Ok(Method::RidgeReverse),
            other => Err(Error::invalid(format!("unknown method '{other}'"))),
        }
    }
}
