//! Feed-forward network with rectified-linear hidden layers and a softmax
//! output, trained by minibatch Adam. With no hidden layers it degenerates to
//! logistic regression fit by Adam.
//!
//! Training is deterministic for a fixed seed: initialization and epoch
//! shuffles derive from it, and updates run single-threaded in epoch order.

use super::{check_trainable, log_sum_exp, softmax_in_place, DiscriminantModel, ModelDump};
use crate::data::{Dataset, Row};
use crate::error::{Error, Result};
use crate::seeding;
use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use rand::Rng;

pub(super) const KIND: &str = "mlp";

/// Adam optimizer constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            step_size: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    /// Hidden layer widths; empty for a plain softmax-linear model.
    pub hidden_layers: Vec<usize>,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub adam: AdamConfig,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_layers: vec![512, 512],
            epochs: 100,
            minibatch_size: 100,
            adam: AdamConfig::default(),
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.hidden_layers.contains(&0) {
            problems.push("hidden layer widths must be at least 1".to_string());
        }
        if self.epochs < 1 {
            problems.push("epochs must be at least 1".to_string());
        }
        if self.minibatch_size < 1 {
            problems.push("minibatch_size must be at least 1".to_string());
        }
        if self.adam.step_size.is_nan() || self.adam.step_size <= 0.0 {
            problems.push("adam step_size must be positive".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

/// Per-layer parameters: `weights[l]` is out×in, `biases[l]` length-out.
#[derive(Clone, Debug)]
pub(crate) struct MlpParams {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl MlpParams {
    /// Layer dimensions [input, hidden..., classes].
    fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.weights[0].ncols()];
        dims.extend(self.weights.iter().map(|w| w.nrows()));
        dims
    }

    fn glorot_init(dims: &[usize], rng: &mut impl Rng) -> MlpParams {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w = Array2::from_shape_fn((fan_out, fan_in), |_| {
                rng.random_range(-limit..limit)
            });
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        MlpParams { weights, biases }
    }

    fn zeros_like(&self) -> MlpParams {
        MlpParams {
            weights: self.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: self.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }
}

/// Trained feed-forward network.
#[derive(Clone, Debug)]
pub struct Mlp {
    params: MlpParams,
}

impl Mlp {
    pub(super) fn from_dump(dump: &ModelDump) -> Result<Mlp> {
        let bad = |msg: &str| Error::InvalidData(format!("bad {KIND} dump: {msg}"));
        if dump.dims.len() < 2 {
            return Err(bad("dims must list at least input and output widths"));
        }
        let layers = dump.dims.len() - 1;
        if dump.weights.len() != 2 * layers {
            return Err(bad("weights must alternate [matrix, bias] per layer"));
        }
        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        for l in 0..layers {
            let (fan_in, fan_out) = (dump.dims[l], dump.dims[l + 1]);
            let w = &dump.weights[2 * l];
            let b = &dump.weights[2 * l + 1];
            if w.len() != fan_in * fan_out || b.len() != fan_out {
                return Err(bad("layer shapes disagree with dims"));
            }
            weights.push(
                Array2::from_shape_vec((fan_out, fan_in), w.clone())
                    .expect("length checked above"),
            );
            biases.push(Array1::from_vec(b.clone()));
        }
        Ok(Mlp {
            params: MlpParams { weights, biases },
        })
    }
}

impl DiscriminantModel for Mlp {
    fn num_classes(&self) -> usize {
        self.params.weights.last().expect("at least one layer").nrows()
    }

    fn input_dim(&self) -> usize {
        self.params.weights[0].ncols()
    }

    fn score_into(&self, z: Row<'_>, out: &mut [f64]) {
        let mut activation = vec![0.0; self.input_dim()];
        z.copy_into(&mut activation);
        let last = self.params.weights.len() - 1;
        for (l, (w, b)) in self
            .params
            .weights
            .iter()
            .zip(&self.params.biases)
            .enumerate()
        {
            let mut next = b.to_vec();
            for (out_v, w_row) in next.iter_mut().zip(w.rows()) {
                *out_v += w_row
                    .iter()
                    .zip(&activation)
                    .map(|(wij, a)| wij * a)
                    .sum::<f64>();
            }
            if l < last {
                for v in next.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            activation = next;
        }
        softmax_in_place(&mut activation);
        out.copy_from_slice(&activation);
    }

    fn dump(&self) -> ModelDump {
        let mut weights = Vec::new();
        for (w, b) in self.params.weights.iter().zip(&self.params.biases) {
            weights.push(w.iter().copied().collect());
            weights.push(b.to_vec());
        }
        ModelDump {
            kind: KIND.to_string(),
            dims: self.params.dims(),
            weights,
        }
    }
}

/// Mean cross-entropy over a batch and, optionally, its parameter gradient.
pub(crate) fn loss_and_grad(
    params: &MlpParams,
    x: &Array2<f64>,
    y: &[usize],
    with_grad: bool,
) -> (f64, MlpParams) {
    let n = x.nrows();
    let layers = params.weights.len();
    // Forward pass keeping post-activation values per layer.
    let mut activations: Vec<Array2<f64>> = Vec::with_capacity(layers + 1);
    activations.push(x.clone());
    for l in 0..layers {
        let mut z = activations[l].dot(&params.weights[l].t());
        z += &params.biases[l];
        if l + 1 < layers {
            z.mapv_inplace(|v| v.max(0.0));
        }
        activations.push(z);
    }
    let logits = activations.last().expect("forward produced output");
    let mut loss = 0.0;
    let mut delta = logits.clone();
    for (i, &label) in y.iter().enumerate() {
        let row = logits.row(i);
        let row_slice = row.to_slice().expect("row-major logits");
        loss += (log_sum_exp(row_slice) - row_slice[label]) / n as f64;
        let mut d = delta.row_mut(i);
        let d_slice = d.as_slice_mut().expect("row-major delta");
        softmax_in_place(d_slice);
        d_slice[label] -= 1.0;
    }
    if !with_grad {
        return (loss, params.zeros_like());
    }
    delta /= n as f64;

    let mut grad = params.zeros_like();
    for l in (0..layers).rev() {
        grad.weights[l] = delta.t().dot(&activations[l]);
        grad.biases[l] = delta.sum_axis(Axis(0));
        if l > 0 {
            let mut back = delta.dot(&params.weights[l]);
            // ReLU gate: the stored activation is already rectified, so a
            // zero activation means a closed gate.
            back.zip_mut_with(&activations[l], |d, &a| {
                if a <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = back;
        }
    }
    (loss, grad)
}

/// Train a feed-forward network with minibatch Adam.
pub fn train_mlp(train: &Dataset, cfg: &MlpConfig, seed: u64) -> Result<Mlp> {
    cfg.validate()?;
    check_trainable(train)?;
    let mut dims = vec![train.dim()];
    dims.extend_from_slice(&cfg.hidden_layers);
    dims.push(train.num_classes());

    let mut init_rng = seeding::stream_rng(seed, 0);
    let mut params = MlpParams::glorot_init(&dims, &mut init_rng);
    let mut first_moment = params.zeros_like();
    let mut second_moment = params.zeros_like();
    let mut shuffle_rng = seeding::stream_rng(seed, 1);

    let n = train.len();
    let dim = train.dim();
    let mut order: Vec<usize> = (0..n).collect();
    let mut step = 0u64;
    for _epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(cfg.minibatch_size) {
            let mut x = Array2::zeros((chunk.len(), dim));
            let mut y = Vec::with_capacity(chunk.len());
            for (b, &i) in chunk.iter().enumerate() {
                train
                    .row(i)
                    .copy_into(x.row_mut(b).as_slice_mut().expect("row-major batch"));
                y.push(train.label(i));
            }
            let (_, grad) = loss_and_grad(&params, &x, &y, true);
            step += 1;
            adam_update(
                &mut params,
                &grad,
                &mut first_moment,
                &mut second_moment,
                &cfg.adam,
                step,
            );
        }
    }
    Ok(Mlp { params })
}

fn adam_update(
    params: &mut MlpParams,
    grad: &MlpParams,
    first: &mut MlpParams,
    second: &mut MlpParams,
    cfg: &AdamConfig,
    step: u64,
) {
    let bc1 = 1.0 - cfg.beta1.powi(step as i32);
    let bc2 = 1.0 - cfg.beta2.powi(step as i32);
    let apply = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= cfg.step_size * m_hat / (v_hat.sqrt() + cfg.epsilon);
    };
    for l in 0..params.weights.len() {
        for ((p, &g), (m, v)) in params.weights[l]
            .iter_mut()
            .zip(grad.weights[l].iter())
            .zip(first.weights[l].iter_mut().zip(second.weights[l].iter_mut()))
        {
            apply(p, g, m, v);
        }
        for ((p, &g), (m, v)) in params.biases[l]
            .iter_mut()
            .zip(grad.biases[l].iter())
            .zip(first.biases[l].iter_mut().zip(second.biases[l].iter_mut()))
        {
            apply(p, g, m, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::{separable_clusters, xor_pattern};
    use super::super::{accuracy, load_model};
    use super::*;

    fn small_cfg(hidden: Vec<usize>, epochs: usize) -> MlpConfig {
        MlpConfig {
            hidden_layers: hidden,
            epochs,
            minibatch_size: 100,
            adam: AdamConfig::default(),
        }
    }

    #[test]
    fn hidden_layer_solves_xor() {
        let data = xor_pattern(100, 21);
        let model = train_mlp(&data, &small_cfg(vec![16], 200), 3).unwrap();
        assert!(accuracy(&model, &data) >= 0.95);
    }

    #[test]
    fn no_hidden_layer_separates_clusters() {
        // 40 points with minibatch 100 means one Adam step per epoch, so give
        // the linear model enough epochs to rotate into place.
        let data = separable_clusters(20, 2.0, 13);
        let model = train_mlp(&data, &small_cfg(vec![], 1000), 4).unwrap();
        assert_eq!(accuracy(&model, &data), 1.0);
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let data = separable_clusters(15, 1.0, 17);
        let a = train_mlp(&data, &small_cfg(vec![8], 20), 42).unwrap();
        let b = train_mlp(&data, &small_cfg(vec![8], 20), 42).unwrap();
        assert_eq!(a.dump().to_json(), b.dump().to_json());
        let c = train_mlp(&data, &small_cfg(vec![8], 20), 43).unwrap();
        assert_ne!(a.dump().to_json(), c.dump().to_json());
    }

    #[test]
    fn scores_are_probabilities() {
        let data = separable_clusters(10, 1.0, 19);
        let model = train_mlp(&data, &small_cfg(vec![8], 30), 1).unwrap();
        for i in 0..data.len() {
            let s = model.score(data.row(i));
            assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            assert!(s.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn single_class_training_set_is_rejected() {
        let data = separable_clusters(10, 1.0, 23).subset(&[0, 1, 2]);
        assert!(train_mlp(&data, &small_cfg(vec![4], 5), 0).is_err());
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let data = xor_pattern(2, 31).subset(&[0, 2, 4, 5, 7]);
        let mut rng = crate::seeding::stream_rng(77, 0);
        let params = MlpParams::glorot_init(&[2, 4, 2], &mut rng);
        let mut x = Array2::zeros((data.len(), 2));
        let mut y = Vec::new();
        for i in 0..data.len() {
            data.row(i)
                .copy_into(x.row_mut(i).as_slice_mut().unwrap());
            y.push(data.label(i));
        }
        let (_, grad) = loss_and_grad(&params, &x, &y, true);
        let h = 1e-6;
        for l in 0..params.weights.len() {
            for idx in 0..params.weights[l].len() {
                let flat = |p: &MlpParams| p.weights[l].as_slice().unwrap()[idx];
                let mut pp = params.clone();
                pp.weights[l].as_slice_mut().unwrap()[idx] += h;
                let mut pm = params.clone();
                pm.weights[l].as_slice_mut().unwrap()[idx] -= h;
                let (lp, _) = loss_and_grad(&pp, &x, &y, false);
                let (lm, _) = loss_and_grad(&pm, &x, &y, false);
                let fd = (lp - lm) / (2.0 * h);
                let analytic = flat(&grad);
                let rel = (fd - analytic).abs() / fd.abs().max(1e-8);
                assert!(rel <= 1e-4, "layer {l} weight {idx}: fd {fd} vs {analytic}");
            }
            for idx in 0..params.biases[l].len() {
                let mut pp = params.clone();
                pp.biases[l][idx] += h;
                let mut pm = params.clone();
                pm.biases[l][idx] -= h;
                let (lp, _) = loss_and_grad(&pp, &x, &y, false);
                let (lm, _) = loss_and_grad(&pm, &x, &y, false);
                let fd = (lp - lm) / (2.0 * h);
                let rel = (fd - grad.biases[l][idx]).abs() / fd.abs().max(1e-8);
                assert!(rel <= 1e-4, "layer {l} bias {idx}");
            }
        }
    }

    #[test]
    fn dump_round_trips_scores_exactly() {
        let data = separable_clusters(8, 1.0, 29);
        let model = train_mlp(&data, &small_cfg(vec![6], 15), 5).unwrap();
        let json = model.dump().to_json();
        let restored = load_model(&ModelDump::from_json(&json).unwrap()).unwrap();
        for i in 0..data.len() {
            let a = model.score(data.row(i));
            let b = restored.score(data.row(i));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
