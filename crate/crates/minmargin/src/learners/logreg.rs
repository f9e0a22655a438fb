//! Multinomial logistic regression trained by full-batch gradient descent
//! with backtracking line search.
//!
//! The objective is the mean negative log-likelihood plus an L2 penalty on
//! the weights (never the bias): L(W, b) = −(1/N)Σ log p(y_i|x_i) +
//! λ/(2N)·‖W‖², the same minimizer as the common reference implementations'
//! summed log-loss with ridge λ/2. Strictly convex for λ > 0, so any
//! descent method reaches the unique optimum.

use super::{check_trainable, log_sum_exp, softmax_in_place, DiscriminantModel, ModelDump};
use crate::data::{Dataset, Row};
use crate::error::{Error, Result};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

pub(super) const KIND: &str = "logreg";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticRegressionConfig {
    /// L2 penalty strength λ on the weights (bias unpenalized).
    pub l2_strength: f64,
    pub max_iterations: usize,
    /// Stop once the sup-norm of the objective gradient falls below this.
    pub tolerance: f64,
}

impl Default for LogisticRegressionConfig {
    fn default() -> Self {
        LogisticRegressionConfig {
            l2_strength: 1.0,
            max_iterations: 100,
            tolerance: 1e-4,
        }
    }
}

impl LogisticRegressionConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.l2_strength < 0.0 {
            problems.push("l2_strength must be non-negative".to_string());
        }
        if self.max_iterations < 1 {
            problems.push("max_iterations must be at least 1".to_string());
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            problems.push("tolerance must be positive".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

/// Softmax-linear classifier: scores are softmax(Wx + b).
#[derive(Clone, Debug)]
pub struct LogisticRegression {
    /// C×D weight matrix.
    weights: Array2<f64>,
    /// Length-C bias.
    bias: Array1<f64>,
    /// Iterations the optimizer actually ran.
    iterations: usize,
    /// Sup-norm of the gradient at the returned parameters.
    grad_norm: f64,
}

impl LogisticRegression {
    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad_norm
    }

    pub(super) fn from_dump(dump: &ModelDump) -> Result<LogisticRegression> {
        let bad = |msg: &str| Error::InvalidData(format!("bad {KIND} dump: {msg}"));
        let [dim, classes] = dump.dims[..] else {
            return Err(bad("dims must be [input_dim, classes]"));
        };
        let [w, b] = &dump.weights[..] else {
            return Err(bad("weights must be [flat weight matrix, bias]"));
        };
        if w.len() != classes * dim || b.len() != classes {
            return Err(bad("weight lengths disagree with dims"));
        }
        let weights = Array2::from_shape_vec((classes, dim), w.clone())
            .expect("length checked above");
        Ok(LogisticRegression {
            weights,
            bias: Array1::from_vec(b.clone()),
            iterations: 0,
            grad_norm: f64::NAN,
        })
    }

    fn linear_scores_into(&self, z: Row<'_>, out: &mut [f64]) {
        for (c, val) in out.iter_mut().enumerate() {
            *val = self.bias[c];
        }
        for (j, x) in z.entries() {
            if x == 0.0 {
                continue;
            }
            for (c, val) in out.iter_mut().enumerate() {
                *val += self.weights[(c, j)] * x;
            }
        }
    }
}

impl DiscriminantModel for LogisticRegression {
    fn num_classes(&self) -> usize {
        self.weights.nrows()
    }

    fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    fn score_into(&self, z: Row<'_>, out: &mut [f64]) {
        self.linear_scores_into(z, out);
        softmax_in_place(out);
    }

    fn dump(&self) -> ModelDump {
        ModelDump {
            kind: KIND.to_string(),
            dims: vec![self.input_dim(), self.num_classes()],
            weights: vec![
                self.weights.iter().copied().collect(),
                self.bias.to_vec(),
            ],
        }
    }
}

/// Objective value, or value plus gradient, at the given parameters.
///
/// Exposed within the crate so tests can finite-difference the gradient.
pub(crate) fn loss_and_grad(
    train: &Dataset,
    weights: &Array2<f64>,
    bias: &Array1<f64>,
    l2: f64,
    with_grad: bool,
) -> (f64, Array2<f64>, Array1<f64>) {
    let n = train.len() as f64;
    let classes = weights.nrows();
    let mut grad_w = Array2::zeros(weights.raw_dim());
    let mut grad_b = Array1::zeros(bias.raw_dim());
    let mut loss = 0.0;
    let mut probs = vec![0.0; classes];
    for i in 0..train.len() {
        let row = train.row(i);
        for (c, val) in probs.iter_mut().enumerate() {
            *val = bias[c];
        }
        for (j, x) in row.entries() {
            if x == 0.0 {
                continue;
            }
            for (c, val) in probs.iter_mut().enumerate() {
                *val += weights[(c, j)] * x;
            }
        }
        loss += (log_sum_exp(&probs) - probs[train.label(i)]) / n;
        if with_grad {
            softmax_in_place(&mut probs);
            probs[train.label(i)] -= 1.0;
            for (c, &p) in probs.iter().enumerate() {
                grad_b[c] += p / n;
                for (j, x) in row.entries() {
                    if x != 0.0 {
                        grad_w[(c, j)] += p * x / n;
                    }
                }
            }
        }
    }
    let reg: f64 = weights.iter().map(|w| w * w).sum();
    loss += l2 / (2.0 * n) * reg;
    if with_grad {
        grad_w.scaled_add(l2 / n, weights);
    }
    (loss, grad_w, grad_b)
}

fn sup_norm(grad_w: &Array2<f64>, grad_b: &Array1<f64>) -> f64 {
    grad_w
        .iter()
        .chain(grad_b.iter())
        .fold(0.0f64, |m, &g| m.max(g.abs()))
}

/// Train a multinomial logistic model.
///
/// Runs until the gradient sup-norm drops below `cfg.tolerance` or
/// `cfg.max_iterations` full-batch steps have been taken, whichever first.
pub fn train_logreg(
    train: &Dataset,
    cfg: &LogisticRegressionConfig,
) -> Result<LogisticRegression> {
    cfg.validate()?;
    check_trainable(train)?;
    let classes = train.num_classes();
    let dim = train.dim();
    let mut weights: Array2<f64> = Array2::zeros((classes, dim));
    let mut bias: Array1<f64> = Array1::zeros(classes);

    let (mut loss, mut grad_w, mut grad_b) =
        loss_and_grad(train, &weights, &bias, cfg.l2_strength, true);
    let mut iterations = 0;
    let mut grad_norm = sup_norm(&grad_w, &grad_b);
    while iterations < cfg.max_iterations && grad_norm > cfg.tolerance {
        let descent: f64 = grad_w.iter().map(|g| g * g).sum::<f64>()
            + grad_b.iter().map(|g| g * g).sum::<f64>();
        // Backtracking line search with the Armijo condition.
        let mut step = 1.0;
        let mut stalled = true;
        for _ in 0..60 {
            let w_try = &weights - &(step * &grad_w);
            let b_try = &bias - &(step * &grad_b);
            let (loss_try, _, _) = loss_and_grad(train, &w_try, &b_try, cfg.l2_strength, false);
            if loss_try <= loss - 1e-4 * step * descent {
                weights = w_try;
                bias = b_try;
                stalled = false;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if stalled {
            break; // step size underflowed; gradient is numerically zero
        }
        let (l, gw, gb) = loss_and_grad(train, &weights, &bias, cfg.l2_strength, true);
        loss = l;
        grad_w = gw;
        grad_b = gb;
        grad_norm = sup_norm(&grad_w, &grad_b);
    }

    Ok(LogisticRegression {
        weights,
        bias,
        iterations,
        grad_norm,
    })
}
