//! The fixed three-layer dense classifier: ReLU → Tanh → Softmax, trained
//! with mini-batch cross-entropy and adaptive moment estimation.
//!
//! Training is bitwise deterministic for a given config: weight
//! initialization, epoch shuffling and optimizer state all flow from the
//! config seed.

use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::seed::derive_seed;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const LOG_CLAMP: f64 = 1e-12;

/// Network and training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "F: Scalar")]
pub struct NetConfig<F> {
    pub input_dim: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub output_dim: usize,
    pub learning_rate: F,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Validation loss at or below this counts as converged; also the
    /// minimum improvement that resets the patience counter.
    pub loss_floor: F,
    pub seed: u64,
}

impl<F: Scalar> Default for NetConfig<F> {
    fn default() -> Self {
        Self {
            input_dim: 0,
            hidden1: 64,
            hidden2: 32,
            output_dim: 0,
            learning_rate: F::from_f64(1e-3),
            batch_size: 32,
            max_epochs: 180,
            patience: 5,
            loss_floor: F::from_f64(1e-6),
            seed: 0,
        }
    }
}

impl<F: Scalar> NetConfig<F> {
    pub fn new(input_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            output_dim,
            ..Self::default()
        }
    }

    /// Fill in dimensions left at zero (configs loaded from files don't know
    /// the dataset yet).
    pub fn with_dims(mut self, input_dim: usize, output_dim: usize) -> Self {
        if self.input_dim == 0 {
            self.input_dim = input_dim;
        }
        if self.output_dim == 0 {
            self.output_dim = output_dim;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim < 1 || self.hidden1 < 1 || self.hidden2 < 1 || self.output_dim < 1 {
            return Err(Error::Config("net dimensions must all be >= 1".into()));
        }
        if self.max_epochs < 1 {
            return Err(Error::Config("net.max_epochs must be >= 1".into()));
        }
        if !self.loss_floor.is_finite() || self.loss_floor <= F::zero() {
            return Err(Error::Config("net.loss_floor must be positive".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("net.batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Result of one `train_batches` call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome<F> {
    pub epochs_run: usize,
    pub train_loss: F,
    pub val_loss: Option<F>,
    /// True when training stopped on the validation criterion rather than
    /// by exhausting the epoch budget.
    pub converged: bool,
    pub wall_secs: f64,
}

/// Adam first/second moment buffers, one pair per parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AdamState<F> {
    m: Vec<Vec<F>>,
    v: Vec<Vec<F>>,
    step: u64,
}

/// Parameter gradients in the same tensor order as the network itself
/// (w1, b1, w2, b2, w3, b3).
#[derive(Debug, Clone)]
pub struct Gradients<F> {
    tensors: Vec<Vec<F>>,
}

impl<F: Scalar> Gradients<F> {
    /// Flat parameter-index view matching [`DenseNet::param`].
    pub fn param(&self, mut index: usize) -> F {
        for t in &self.tensors {
            if index < t.len() {
                return t[index];
            }
            index -= t.len();
        }
        panic!("gradient index out of range");
    }
}

/// The three-layer classifier plus optimizer state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct DenseNet<F> {
    config: NetConfig<F>,
    w1: Matrix<F>,
    b1: Vec<F>,
    w2: Matrix<F>,
    b2: Vec<F>,
    w3: Matrix<F>,
    b3: Vec<F>,
    adam: AdamState<F>,
    epochs_trained: usize,
}

impl<F: Scalar> DenseNet<F> {
    /// Fresh network with scaled-uniform fan-in initialization (seeded) and
    /// zero biases.
    pub fn new(config: NetConfig<F>) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "net-init", 0));
        let mut init = |rows: usize, cols: usize| -> Matrix<F> {
            let limit = 1.0 / (rows as f64).sqrt();
            let data = (0..rows * cols)
                .map(|_| F::from_f64(rng.random_range(-limit..limit)))
                .collect();
            Matrix::from_vec(rows, cols, data)
        };
        let w1 = init(config.input_dim, config.hidden1);
        let w2 = init(config.hidden1, config.hidden2);
        let w3 = init(config.hidden2, config.output_dim);
        let sizes = [
            config.input_dim * config.hidden1,
            config.hidden1,
            config.hidden1 * config.hidden2,
            config.hidden2,
            config.hidden2 * config.output_dim,
            config.output_dim,
        ];
        let adam = AdamState {
            m: sizes.iter().map(|&s| vec![F::zero(); s]).collect(),
            v: sizes.iter().map(|&s| vec![F::zero(); s]).collect(),
            step: 0,
        };
        Ok(Self {
            b1: vec![F::zero(); config.hidden1],
            b2: vec![F::zero(); config.hidden2],
            b3: vec![F::zero(); config.output_dim],
            w1,
            w2,
            w3,
            adam,
            epochs_trained: 0,
        config,
        })
    }

    pub fn config(&self) -> &NetConfig<F> {
        &self.config
    }

    /// Total epochs accumulated over every `train_batches` call.
    pub fn epochs_trained(&self) -> usize {
        self.epochs_trained
    }

    /// Class probabilities, one row per input row; rows sum to one.
    pub fn forward(&self, x: &Matrix<F>) -> Result<Matrix<F>> {
        self.check_input(x)?;
        let (_, _, probs) = self.forward_cached(x);
        Ok(probs)
    }

    /// Predicted class ids (argmax of `forward`, ties to the lowest id).
    pub fn predict(&self, x: &Matrix<F>) -> Result<Vec<usize>> {
        let probs = self.forward(x)?;
        Ok((0..probs.rows()).map(|i| argmax(probs.row(i))).collect())
    }

    /// Mean categorical cross-entropy of `x` against integer labels.
    pub fn loss(&self, x: &Matrix<F>, y: &[usize]) -> Result<F> {
        self.check_input(x)?;
        assert_eq!(x.rows(), y.len(), "labels must align with rows");
        let probs = self.forward(x)?;
        Ok(cross_entropy(&probs, y))
    }

    fn check_input(&self, x: &Matrix<F>) -> Result<()> {
        if x.cols() != self.config.input_dim {
            return Err(Error::Shape {
                context: "dense net input".into(),
                expected: format!("{} columns", self.config.input_dim),
                got: format!("{} columns", x.cols()),
            });
        }
        Ok(())
    }

    /// Forward pass keeping the hidden activations for backprop.
    fn forward_cached(&self, x: &Matrix<F>) -> (Matrix<F>, Matrix<F>, Matrix<F>) {
        let mut a1 = x.mul(&self.w1);
        for i in 0..a1.rows() {
            for (v, &b) in a1.row_mut(i).iter_mut().zip(&self.b1) {
                *v = (*v + b).max(F::zero()); // relu
            }
        }
        let mut a2 = a1.mul(&self.w2);
        for i in 0..a2.rows() {
            for (v, &b) in a2.row_mut(i).iter_mut().zip(&self.b2) {
                *v = (*v + b).tanh();
            }
        }
        let mut probs = a2.mul(&self.w3);
        for i in 0..probs.rows() {
            let row = probs.row_mut(i);
            for (v, &b) in row.iter_mut().zip(&self.b3) {
                *v += b;
            }
            softmax_in_place(row);
        }
        (a1, a2, probs)
    }

    /// Mean cross-entropy loss and its analytic gradients.
    ///
    /// Preconditions (asserted): shapes match, labels lie in `[0, K)`.
    pub fn loss_and_grads(&self, x: &Matrix<F>, y: &[usize]) -> (F, Gradients<F>) {
        assert_eq!(x.cols(), self.config.input_dim, "input width");
        assert_eq!(x.rows(), y.len(), "labels align with rows");
        assert!(
            y.iter().all(|&c| c < self.config.output_dim),
            "labels must lie in [0, K)"
        );
        let m = x.rows();
        let (a1, a2, probs) = self.forward_cached(x);
        let loss = cross_entropy(&probs, y);

        // dz3 = (p − onehot(y)) / m, backprop through softmax+CE.
        let inv_m = F::one() / F::from_usize(m);
        let mut dz3 = probs;
        for (i, &label) in y.iter().enumerate() {
            let row = dz3.row_mut(i);
            row[label] -= F::one();
            for v in row.iter_mut() {
                *v *= inv_m;
            }
        }

        let dw3 = a2.t_mul(&dz3);
        let db3 = column_sums(&dz3);
        let mut dz2 = dz3.mul_t(&self.w3);
        for i in 0..dz2.rows() {
            for (g, &a) in dz2.row_mut(i).iter_mut().zip(a2.row(i)) {
                *g *= F::one() - a * a; // tanh'
            }
        }

        let dw2 = a1.t_mul(&dz2);
        let db2 = column_sums(&dz2);
        let mut dz1 = dz2.mul_t(&self.w2);
        for i in 0..dz1.rows() {
            for (g, &a) in dz1.row_mut(i).iter_mut().zip(a1.row(i)) {
                if a <= F::zero() {
                    *g = F::zero(); // relu'
                }
            }
        }

        let dw1 = x.t_mul(&dz1);
        let db1 = column_sums(&dz1);

        let grads = Gradients {
            tensors: vec![
                dw1.data().to_vec(),
                db1,
                dw2.data().to_vec(),
                db2,
                dw3.data().to_vec(),
                db3,
            ],
        };
        (loss, grads)
    }

    /// Mini-batch training with seeded shuffling and validation-driven early
    /// stopping.
    ///
    /// Stops when the validation loss reaches `loss_floor`, when it has not
    /// improved by more than `loss_floor` for `patience` consecutive epochs,
    /// or when `max_epochs` is exhausted. Without a validation set the full
    /// budget always runs. Duplicate training rows are seen once per copy
    /// per epoch.
    pub fn train_batches(
        &mut self,
        x: &Matrix<F>,
        y: &[usize],
        val: Option<(&Matrix<F>, &[usize])>,
    ) -> Result<TrainOutcome<F>> {
        self.check_input(x)?;
        if x.rows() == 0 {
            return Err(Error::TooFewRows {
                context: "train_batches".into(),
                needed: 1,
                got: 0,
            });
        }
        assert_eq!(x.rows(), y.len(), "labels align with rows");
        if let Some((vx, vy)) = val {
            self.check_input(vx)?;
            assert_eq!(vx.rows(), vy.len(), "validation labels align with rows");
        }
        let start = Instant::now();
        let n = x.rows();
        let mut order: Vec<usize> = (0..n).collect();
        let mut epochs_run = 0;
        let mut train_loss = F::zero();
        let mut val_loss = None;
        let mut converged = false;
        let mut best_val = F::infinity();
        let mut stall = 0usize;

        for _ in 0..self.config.max_epochs {
            let shuffle_seed = derive_seed(self.config.seed, "shuffle", self.epochs_trained as u64);
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));

            let mut loss_sum = F::zero();
            for batch in order.chunks(self.config.batch_size) {
                let bx = x.gather_rows(batch);
                let by: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
                let (loss, grads) = self.loss_and_grads(&bx, &by);
                loss_sum += loss * F::from_usize(batch.len());
                self.adam_step(&grads);
            }
            train_loss = loss_sum / F::from_usize(n);
            self.epochs_trained += 1;
            epochs_run += 1;

            if let Some((vx, vy)) = val {
                if vx.rows() > 0 {
                    let vl = self.loss(vx, vy)?;
                    val_loss = Some(vl);
                    if vl <= self.config.loss_floor {
                        converged = true;
                        break;
                    }
                    if best_val - vl > self.config.loss_floor {
                        best_val = vl;
                        stall = 0;
                    } else {
                        stall += 1;
                        if stall >= self.config.patience {
                            converged = true;
                            break;
                        }
                    }
                }
            }
        }

        debug_assert!(self.parameters_finite(), "parameters stayed finite");
        Ok(TrainOutcome {
            epochs_run,
            train_loss,
            val_loss,
            converged,
            wall_secs: start.elapsed().as_secs_f64(),
        })
    }

    fn adam_step(&mut self, grads: &Gradients<F>) {
        self.adam.step += 1;
        let t = self.adam.step as i32;
        let b1 = F::from_f64(ADAM_BETA1);
        let b2 = F::from_f64(ADAM_BETA2);
        let eps = F::from_f64(ADAM_EPS);
        let lr = self.config.learning_rate;
        let bc1 = F::one() - b1.powi(t);
        let bc2 = F::one() - b2.powi(t);

        let params: [&mut [F]; 6] = [
            self.w1.data_mut(),
            &mut self.b1,
            self.w2.data_mut(),
            &mut self.b2,
            self.w3.data_mut(),
            &mut self.b3,
        ];
        for (slot, param) in params.into_iter().enumerate() {
            let g = &grads.tensors[slot];
            let m = &mut self.adam.m[slot];
            let v = &mut self.adam.v[slot];
            for i in 0..param.len() {
                m[i] = b1 * m[i] + (F::one() - b1) * g[i];
                v[i] = b2 * v[i] + (F::one() - b2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                param[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }

    fn parameters_finite(&self) -> bool {
        self.w1.is_finite()
            && self.w2.is_finite()
            && self.w3.is_finite()
            && self.b1.iter().all(|v| v.is_finite())
            && self.b2.iter().all(|v| v.is_finite())
            && self.b3.iter().all(|v| v.is_finite())
    }

    /// Number of trainable parameters.
    pub fn num_params(&self) -> usize {
        self.w1.data().len()
            + self.b1.len()
            + self.w2.data().len()
            + self.b2.len()
            + self.w3.data().len()
            + self.b3.len()
    }

    /// Read a parameter by flat index (w1, b1, w2, b2, w3, b3 order).
    pub fn param(&self, index: usize) -> F {
        *self.locate(index)
    }

    /// Overwrite a parameter by flat index.
    pub fn set_param(&mut self, index: usize, value: F) {
        *self.locate_mut(index) = value;
    }

    fn locate(&self, mut index: usize) -> &F {
        let tensors: [&[F]; 6] = [
            self.w1.data(),
            &self.b1,
            self.w2.data(),
            &self.b2,
            self.w3.data(),
            &self.b3,
        ];
        for t in tensors {
            if index < t.len() {
                return &t[index];
            }
            index -= t.len();
        }
        panic!("parameter index out of range");
    }

    fn locate_mut(&mut self, mut index: usize) -> &mut F {
        let lens = [
            self.w1.data().len(),
            self.b1.len(),
            self.w2.data().len(),
            self.b2.len(),
            self.w3.data().len(),
            self.b3.len(),
        ];
        let mut slot = 0;
        while index >= lens[slot] {
            index -= lens[slot];
            slot += 1;
            assert!(slot < 6, "parameter index out of range");
        }
        match slot {
            0 => &mut self.w1.data_mut()[index],
            1 => &mut self.b1[index],
            2 => &mut self.w2.data_mut()[index],
            3 => &mut self.b2[index],
            4 => &mut self.w3.data_mut()[index],
            _ => &mut self.b3[index],
        }
    }

    /// Serialize the model (config, seed, shapes, parameters, optimizer
    /// state) as JSON.
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let net: Self = serde_json::from_reader(file)?;
        net.config.validate()?;
        Ok(net)
    }
}

fn argmax<F: Scalar>(row: &[F]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    best
}

/// Row softmax with max subtraction.
fn softmax_in_place<F: Scalar>(row: &mut [F]) {
    let max = row.iter().copied().fold(F::neg_infinity(), F::max);
    let mut sum = F::zero();
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Mean negative log-likelihood with the log argument clamped at 1e-12.
fn cross_entropy<F: Scalar>(probs: &Matrix<F>, y: &[usize]) -> F {
    let clamp = F::from_f64(LOG_CLAMP);
    let mut sum = F::zero();
    for (i, &label) in y.iter().enumerate() {
        sum -= probs.get(i, label).max(clamp).ln();
    }
    sum / F::from_usize(y.len())
}

fn column_sums<F: Scalar>(m: &Matrix<F>) -> Vec<F> {
    let mut sums = vec![F::zero(); m.cols()];
    for i in 0..m.rows() {
        for (s, &v) in sums.iter_mut().zip(m.row(i)) {
            *s += v;
        }
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_net(seed: u64) -> DenseNet<f64> {
        let cfg = NetConfig {
            input_dim: 3,
            hidden1: 4,
            hidden2: 3,
            output_dim: 2,
            seed,
            ..NetConfig::default()
        };
        DenseNet::new(cfg).unwrap()
    }

    #[test]
    fn forward_rows_sum_to_one() {
        let net = tiny_net(1);
        let x = Matrix::from_rows(&[vec![0.3, -1.2, 0.8], vec![5.0, 2.0, -3.0]]);
        let p = net.forward(&x).unwrap();
        for i in 0..p.rows() {
            let sum: f64 = p.row(i).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(p.row(i).iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn zero_net_is_uniform() {
        let mut net = tiny_net(1);
        for i in 0..net.num_params() {
            net.set_param(i, 0.0);
        }
        let x = Matrix::from_rows(&[vec![1.0, 2.0, 3.0]]);
        let p = net.forward(&x).unwrap();
        assert_eq!(p.row(0), &[0.5, 0.5]);
    }

    #[test]
    fn near_one_hot_predictions_drive_loss_to_zero() {
        let mut net = tiny_net(5);
        for i in 0..net.num_params() {
            net.set_param(i, 0.0);
        }
        // Saturate the class-0 logit bias: softmax ≈ one-hot on class 0.
        let b3_index = net.num_params() - 2;
        net.set_param(b3_index, 60.0);
        let x = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![-1.0, 0.0, 1.0]]);
        let loss = net.loss(&x, &[0, 0]).unwrap();
        assert!(loss < 1e-12, "loss {loss}");
    }

    #[test]
    fn uniform_prediction_loss_is_ln_k() {
        let mut net = tiny_net(2);
        for i in 0..net.num_params() {
            net.set_param(i, 0.0);
        }
        let x = Matrix::from_rows(&[vec![1.0, -1.0, 2.0], vec![0.0, 1.0, 0.0]]);
        let loss = net.loss(&x, &[0, 1]).unwrap();
        assert!((loss - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn predict_breaks_ties_toward_lower_class() {
        let mut net = tiny_net(3);
        for i in 0..net.num_params() {
            net.set_param(i, 0.0);
        }
        let x = Matrix::from_rows(&[vec![0.1, 0.2, 0.3]]);
        assert_eq!(net.predict(&x).unwrap(), vec![0]);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let net = tiny_net(4);
        let x = Matrix::from_rows(&[vec![1.0, 2.0]]);
        assert!(matches!(net.forward(&x), Err(Error::Shape { .. })));
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let x = Matrix::from_rows(
            &(0..40)
                .map(|i| vec![i as f64 * 0.1, (i % 2) as f64, -(i as f64) * 0.05])
                .collect::<Vec<_>>(),
        );
        let y: Vec<usize> = (0..40).map(|i| i % 2).collect();
        let mut cfg = NetConfig::new(3, 2);
        cfg.max_epochs = 5;
        cfg.seed = 11;
        let mut a = DenseNet::new(cfg.clone()).unwrap();
        let mut b = DenseNet::new(cfg).unwrap();
        let oa = a.train_batches(&x, &y, None).unwrap();
        let ob = b.train_batches(&x, &y, None).unwrap();
        assert_eq!(oa.epochs_run, ob.epochs_run);
        assert_eq!(oa.train_loss, ob.train_loss);
        for i in 0..a.num_params() {
            assert_eq!(a.param(i), b.param(i), "param {i}");
        }
    }

    #[test]
    fn single_epoch_budget_is_honored() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]]);
        let y = vec![0, 1];
        let mut cfg = NetConfig::new(3, 2);
        cfg.max_epochs = 1;
        let mut net = DenseNet::new(cfg).unwrap();
        let outcome = net.train_batches(&x, &y, None).unwrap();
        assert_eq!(outcome.epochs_run, 1);
        assert!(!outcome.converged);
    }

    #[test]
    fn save_load_round_trips() {
        let net = tiny_net(9);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        net.save_json(&path).unwrap();
        let back: DenseNet<f64> = DenseNet::load_json(&path).unwrap();
        assert_eq!(net, back);
    }
}
