//! Feed-forward neural classifier for sideband feature vectors.
//!
//! A single-hidden-layer perceptron (default 10-16-3) maps a feature vector
//! to class probabilities over {healthy, inter_turn_minor, inter_turn_severe}
//! (broken_bar as an optional fourth class). Training is plain mini-batch
//! gradient descent on softmax cross-entropy; `gradient_check` verifies the
//! analytic gradients against central finite differences, parameter by
//! parameter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::motor::{FaultLabel, CLASS_ORDER};

/// Confidence below which a classification is flagged uncertain. A network
/// shown a condition it was never trained on tends to produce weak outputs;
/// the flag surfaces that instead of silently asserting a label.
pub const DEFAULT_REJECT_THRESHOLD: f64 = 0.6;

// ─── Model ──────────────────────────────────────────────────────────────────

/// Hidden-layer activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output.
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Validation(format!("unknown activation `{other}`"))),
        }
    }
}

/// Layered weights and biases of the classifier.
///
/// `weights[0]` is hidden-by-input row-major, `weights[1]` output-by-hidden;
/// biases follow the same split. The output layer is always a softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_sizes: [usize; 3],
    weights: [Vec<f64>; 2],
    biases: [Vec<f64>; 2],
    activation: Activation,
}

impl MlpModel {
    pub fn layer_sizes(&self) -> [usize; 3] {
        self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn hidden_dim(&self) -> usize {
        self.layer_sizes[1]
    }

    pub fn output_dim(&self) -> usize {
        self.layer_sizes[2]
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn param_count(&self) -> usize {
        let [d, h, c] = self.layer_sizes;
        h * d + h + c * h + c
    }

    fn check_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// Initialize a model with 1/sqrt(fan_in)-scaled zero-mean weights and zero
/// biases, deterministically for a fixed seed.
pub fn init_model(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<MlpModel> {
    if layer_sizes.len() != 3 {
        return Err(Error::Config(format!(
            "expected 3 layer sizes (input, hidden, output), got {}",
            layer_sizes.len()
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Config(format!(
            "zero-sized layer in {layer_sizes:?}"
        )));
    }
    let [d, h, c] = [layer_sizes[0], layer_sizes[1], layer_sizes[2]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layer = |rows: usize, cols: usize| -> Vec<f64> {
        let scale = 1.0 / (cols as f64).sqrt();
        (0..rows * cols)
            .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * scale)
            .collect()
    };
    let w1 = layer(h, d);
    let w2 = layer(c, h);
    Ok(MlpModel {
        layer_sizes: [d, h, c],
        weights: [w1, w2],
        biases: [vec![0.0; h], vec![0.0; c]],
        activation,
    })
}

// ─── Forward pass ───────────────────────────────────────────────────────────

fn hidden_out(m: &MlpModel, x: &[f64]) -> Vec<f64> {
    let [d, h, _] = m.layer_sizes;
    let mut out = Vec::with_capacity(h);
    for r in 0..h {
        let row = &m.weights[0][r * d..(r + 1) * d];
        let z: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + m.biases[0][r];
        out.push(m.activation.apply(z));
    }
    out
}

fn logits(m: &MlpModel, hidden: &[f64]) -> Vec<f64> {
    let [_, h, c] = m.layer_sizes;
    let mut out = Vec::with_capacity(c);
    for r in 0..c {
        let row = &m.weights[1][r * h..(r + 1) * h];
        out.push(row.iter().zip(hidden).map(|(w, hi)| w * hi).sum::<f64>() + m.biases[1][r]);
    }
    out
}

/// Numerically stable softmax (max subtraction).
fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Class probabilities for a feature vector.
pub fn forward(m: &MlpModel, x: &FeatureVector) -> Result<Vec<f64>> {
    forward_values(m, x.values())
}

/// Class probabilities for a raw value slice.
pub fn forward_values(m: &MlpModel, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != m.input_dim() {
        return Err(Error::Domain(format!(
            "feature vector has {} values, model expects {}",
            x.len(),
            m.input_dim()
        )));
    }
    Ok(softmax(&logits(m, &hidden_out(m, x))))
}

/// Classification outcome: the argmax label, its probability, and whether
/// the probability fell below the reject threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub label: FaultLabel,
    pub confidence: f64,
    pub uncertain: bool,
}

/// Classify with the default reject threshold.
pub fn classify(m: &MlpModel, x: &FeatureVector) -> Result<Classification> {
    classify_with_threshold(m, x.values(), DEFAULT_REJECT_THRESHOLD)
}

/// Classify raw values, flagging results whose confidence is below
/// `reject_threshold`.
pub fn classify_with_threshold(
    m: &MlpModel,
    x: &[f64],
    reject_threshold: f64,
) -> Result<Classification> {
    let probs = forward_values(m, x)?;
    let (best, &confidence) = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("probabilities are finite"))
        .expect("output layer is non-empty");
    if best >= CLASS_ORDER.len() {
        return Err(Error::Config(format!(
            "model has {} outputs but only {} labels are defined",
            probs.len(),
            CLASS_ORDER.len()
        )));
    }
    Ok(Classification {
        label: CLASS_ORDER[best],
        confidence,
        uncertain: confidence < reject_threshold,
    })
}

// ─── Loss and gradients ─────────────────────────────────────────────────────

/// Cross-entropy of the softmax output against a class index, fused with the
/// forward pass for numerical stability.
fn sample_loss(m: &MlpModel, x: &[f64], class: usize) -> f64 {
    let z = logits(m, &hidden_out(m, x));
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = z.iter().map(|&v| (v - max).exp()).sum::<f64>().ln() + max;
    log_sum - z[class]
}

/// Flat gradient buffer ordered [w1, b1, w2, b2].
struct Gradients {
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

impl Gradients {
    fn zeros(m: &MlpModel) -> Self {
        let [d, h, c] = m.layer_sizes;
        Self {
            w1: vec![0.0; h * d],
            b1: vec![0.0; h],
            w2: vec![0.0; c * h],
            b2: vec![0.0; c],
        }
    }

    fn scale(&mut self, factor: f64) {
        for v in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            for g in v.iter_mut() {
                *g *= factor;
            }
        }
    }
}

/// Accumulate the cross-entropy gradient for one sample; returns the loss.
fn accumulate_gradients(m: &MlpModel, x: &[f64], class: usize, grads: &mut Gradients) -> f64 {
    let [d, h, c] = m.layer_sizes;
    let hidden = hidden_out(m, x);
    let z = logits(m, &hidden);
    let probs = softmax(&z);

    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = z.iter().map(|&v| (v - max).exp()).sum::<f64>().ln() + max;
    let loss = log_sum - z[class];

    // Output layer: dL/dz = p - onehot(class).
    let mut dz2 = probs;
    dz2[class] -= 1.0;
    for (r, &dz) in dz2.iter().enumerate() {
        grads.b2[r] += dz;
        for (j, &hj) in hidden.iter().enumerate() {
            grads.w2[r * h + j] += dz * hj;
        }
    }
    // Hidden layer.
    for (j, &hj) in hidden.iter().enumerate() {
        let upstream: f64 = (0..c).map(|r| m.weights[1][r * h + j] * dz2[r]).sum();
        let dz1 = upstream * m.activation.grad_from_output(hj);
        grads.b1[j] += dz1;
        for (i, &xi) in x.iter().enumerate() {
            grads.w1[j * d + i] += dz1 * xi;
        }
    }
    loss
}

fn apply_step(m: &mut MlpModel, grads: &Gradients, lr: f64, l2: f64) {
    for (w, g) in m.weights[0].iter_mut().zip(&grads.w1) {
        *w -= lr * (g + l2 * *w);
    }
    for (b, g) in m.biases[0].iter_mut().zip(&grads.b1) {
        *b -= lr * g;
    }
    for (w, g) in m.weights[1].iter_mut().zip(&grads.w2) {
        *w -= lr * (g + l2 * *w);
    }
    for (b, g) in m.biases[1].iter_mut().zip(&grads.b2) {
        *b -= lr * g;
    }
}

// ─── Training ───────────────────────────────────────────────────────────────

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Step size; zero is allowed and leaves the model untouched.
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// L2 penalty on weights (not biases).
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            epochs: 500,
            batch_size: 32,
            seed: 0,
            l2: 0.0,
        }
    }
}

fn class_of(v: &FeatureVector, output_dim: usize) -> Result<usize> {
    let label = v
        .label()
        .ok_or_else(|| Error::Training("unlabeled vector in training data".into()))?;
    let class = label.class_index();
    if class >= output_dim {
        return Err(Error::Training(format!(
            "label `{label}` needs class index {class} but the model has {output_dim} outputs"
        )));
    }
    Ok(class)
}

/// Train by mini-batch gradient descent on mean cross-entropy.
///
/// Batches are drawn from a seeded shuffle, re-shuffled every epoch. The loss
/// history records the mean sample loss of each epoch (measured as trained,
/// before the next shuffle). Divergence — a non-finite loss or parameter —
/// aborts with the offending epoch.
pub fn train(
    mut m: MlpModel,
    data: &[FeatureVector],
    cfg: &TrainConfig,
) -> Result<(MlpModel, Vec<f64>)> {
    if data.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    if !cfg.learning_rate.is_finite() || cfg.learning_rate < 0.0 {
        return Err(Error::Training("learning rate must be finite and >= 0".into()));
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(Error::Training("epochs and batch size must be >= 1".into()));
    }
    if cfg.batch_size > data.len() {
        return Err(Error::Training(format!(
            "batch size {} exceeds dataset size {}",
            cfg.batch_size,
            data.len()
        )));
    }
    let classes: Vec<usize> = data
        .iter()
        .map(|v| class_of(v, m.output_dim()))
        .collect::<Result<_>>()?;
    {
        let mut distinct: Vec<usize> = classes.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < 2 {
            return Err(Error::Training(
                "training data must contain at least two distinct labels".into(),
            ));
        }
    }
    for v in data {
        if v.len() != m.input_dim() {
            return Err(Error::Domain(format!(
                "vector has {} values, model expects {}",
                v.len(),
                m.input_dim()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        shuffle(&mut order, &mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = Gradients::zeros(&m);
            for &idx in batch {
                epoch_loss +=
                    accumulate_gradients(&m, data[idx].values(), classes[idx], &mut grads);
            }
            grads.scale(1.0 / batch.len() as f64);
            apply_step(&mut m, &grads, cfg.learning_rate, cfg.l2);
            if !m.check_finite() {
                return Err(Error::Divergence { epoch });
            }
        }
        let mean_loss = epoch_loss / data.len() as f64;
        if !mean_loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        history.push(mean_loss);
    }
    Ok((m, history))
}

/// Fisher-Yates shuffle driven by the training RNG.
fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
}

/// Fraction of vectors whose argmax class matches their label.
pub fn accuracy(m: &MlpModel, data: &[FeatureVector]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Training("empty evaluation set".into()));
    }
    let mut correct = 0usize;
    for v in data {
        let probs = forward(m, v)?;
        let best = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if best == class_of(v, m.output_dim())? {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

// ─── Gradient verification ──────────────────────────────────────────────────

fn get_param(m: &MlpModel, idx: usize) -> f64 {
    let [d, h, c] = m.layer_sizes;
    let (w1, b1, w2) = (h * d, h, c * h);
    if idx < w1 {
        m.weights[0][idx]
    } else if idx < w1 + b1 {
        m.biases[0][idx - w1]
    } else if idx < w1 + b1 + w2 {
        m.weights[1][idx - w1 - b1]
    } else {
        m.biases[1][idx - w1 - b1 - w2]
    }
}

fn set_param(m: &mut MlpModel, idx: usize, value: f64) {
    let [d, h, c] = m.layer_sizes;
    let (w1, b1, w2) = (h * d, h, c * h);
    if idx < w1 {
        m.weights[0][idx] = value;
    } else if idx < w1 + b1 {
        m.biases[0][idx - w1] = value;
    } else if idx < w1 + b1 + w2 {
        m.weights[1][idx - w1 - b1] = value;
    } else {
        m.biases[1][idx - w1 - b1 - w2] = value;
    }
}

fn analytic_gradient_flat(m: &MlpModel, x: &[f64], class: usize) -> Vec<f64> {
    let mut grads = Gradients::zeros(m);
    accumulate_gradients(m, x, class, &mut grads);
    let mut flat = grads.w1;
    flat.extend(grads.b1);
    flat.extend(grads.w2);
    flat.extend(grads.b2);
    flat
}

/// Compare the analytic cross-entropy gradient against central finite
/// differences over every parameter.
///
/// Returns the maximum over parameters of
/// `|g_a - g_n| / max(|g_a|, |g_n|, 1e-12)`.
pub fn gradient_check(m: &MlpModel, x: &[f64], class: usize, epsilon: f64) -> Result<f64> {
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon > 1e-2 {
        return Err(Error::Domain(format!(
            "epsilon {epsilon} outside (0, 1e-2]"
        )));
    }
    if x.len() != m.input_dim() {
        return Err(Error::Domain(format!(
            "input has {} values, model expects {}",
            x.len(),
            m.input_dim()
        )));
    }
    if class >= m.output_dim() {
        return Err(Error::Domain(format!(
            "class {class} outside the model's {} outputs",
            m.output_dim()
        )));
    }
    let analytic = analytic_gradient_flat(m, x, class);
    let mut probe = m.clone();
    let mut worst = 0.0f64;
    for (idx, &g_analytic) in analytic.iter().enumerate() {
        let original = get_param(&probe, idx);
        set_param(&mut probe, idx, original + epsilon);
        let plus = sample_loss(&probe, x, class);
        set_param(&mut probe, idx, original - epsilon);
        let minus = sample_loss(&probe, x, class);
        set_param(&mut probe, idx, original);
        let numeric = (plus - minus) / (2.0 * epsilon);
        let denom = g_analytic.abs().max(numeric.abs()).max(1e-12);
        worst = worst.max((g_analytic - numeric).abs() / denom);
    }
    Ok(worst)
}

// ─── Serialization ──────────────────────────────────────────────────────────

const MODEL_HEADER: &str = "MCSA-MLP v1";

/// Render the model in the versioned text format (17+ significant digits,
/// so a reload reproduces forward outputs bitwise).
pub fn model_to_text(m: &MlpModel) -> String {
    let [d, h, c] = m.layer_sizes;
    let mut out = String::new();
    out.push_str(MODEL_HEADER);
    out.push('\n');
    out.push_str(&format!("{d} {h} {c}\n"));
    out.push_str(m.activation.as_str());
    out.push('\n');
    let mut block = |rows: usize, cols: usize, values: &[f64]| {
        for r in 0..rows {
            let line: Vec<String> = (0..cols)
                .map(|col| format!("{:.17e}", values[r * cols + col]))
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    };
    block(h, d, &m.weights[0]);
    block(1, h, &m.biases[0]);
    block(c, h, &m.weights[1]);
    block(1, c, &m.biases[1]);
    out
}

/// Parse a model from the text format.
pub fn model_from_text(text: &str) -> Result<MlpModel> {
    let mut lines = text.lines().enumerate();
    let mut next_line = |what: &str| -> Result<(usize, &str)> {
        lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("unexpected end of model file, expected {what}"),
            })
    };
    let (line, header) = next_line("header")?;
    if header.trim() != MODEL_HEADER {
        return Err(Error::Parse {
            line,
            msg: format!("expected `{MODEL_HEADER}`, got `{header}`"),
        });
    }
    let (line, sizes_line) = next_line("layer sizes")?;
    let sizes: Vec<usize> = sizes_line
        .split_whitespace()
        .map(|f| {
            f.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad layer size `{f}`"),
            })
        })
        .collect::<Result<_>>()?;
    if sizes.len() != 3 || sizes.contains(&0) {
        return Err(Error::Parse {
            line,
            msg: format!("expected 3 positive layer sizes, got {sizes:?}"),
        });
    }
    let (line, act_line) = next_line("activation")?;
    let activation = Activation::parse(act_line.trim()).map_err(|e| Error::Parse {
        line,
        msg: e.to_string(),
    })?;
    let [d, h, c] = [sizes[0], sizes[1], sizes[2]];

    let mut read_block = |rows: usize, cols: usize, what: &str| -> Result<Vec<f64>> {
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (line, row) = next_line(what)?;
            let fields: Vec<&str> = row.split_whitespace().collect();
            if fields.len() != cols {
                return Err(Error::Parse {
                    line,
                    msg: format!("{what}: expected {cols} values, got {}", fields.len()),
                });
            }
            for f in fields {
                values.push(f.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("{what}: bad value `{f}`"),
                })?);
            }
        }
        Ok(values)
    };
    let w1 = read_block(h, d, "hidden weights")?;
    let b1 = read_block(1, h, "hidden biases")?;
    let w2 = read_block(c, h, "output weights")?;
    let b2 = read_block(1, c, "output biases")?;
    Ok(MlpModel {
        layer_sizes: [d, h, c],
        weights: [w1, w2],
        biases: [b1, b2],
        activation,
    })
}
