use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mlp::{Dense, Mlp};
use crate::cloud::LabeledDataset;
use crate::error::{Error, Result};
use crate::network::{Activation, Layer, Network};

// Pre-activations closer than this to a ReLU kink are skipped by the
// gradient check.
const KINK_MARGIN: f64 = 1e-4;
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Hidden layer widths; a scalar affine readout follows them.
    pub hidden_widths: Vec<usize>,
    pub activation: Activation,
}

impl Default for TrainConfig {
    /// Three width-2 ReLU layers and a scalar readout, four affine maps in
    /// total.
    fn default() -> Self {
        Self {
            batch_size: 16,
            learning_rate: 1e-3,
            epochs: 500,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            hidden_widths: vec![2, 2, 2],
            activation: Activation::Relu,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::pre("batch size and epochs must be positive"));
        }
        for (name, v) in [
            ("learning rate", self.learning_rate),
            ("adam eps", self.adam_eps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::pre(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("beta1", self.adam_beta1), ("beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::pre(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if self.hidden_widths.contains(&0) {
            return Err(Error::pre("hidden widths must be positive"));
        }
        Ok(())
    }

    /// Whether every hidden width is at most the input dimension.
    pub fn is_narrow(&self, input_dim: usize) -> bool {
        self.hidden_widths.iter().all(|&w| w <= input_dim)
    }

    /// Network with weights and biases uniform in `±1/√fan_in`.
    pub fn initial_network(&self, input_dim: usize) -> Result<Network> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut init = |rows: usize, cols: usize| {
            let bound = 1.0 / (cols as f64).sqrt();
            let w = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-bound..bound));
            let b = DVector::from_fn(rows, |_, _| rng.random_range(-bound..bound));
            (w, b)
        };
        let mut layers = Vec::new();
        let mut fan_in = input_dim;
        for &width in &self.hidden_widths {
            let (w, b) = init(width, fan_in);
            layers.push(Layer::new(w, b, self.activation)?);
            fan_in = width;
        }
        let (w, b) = init(1, fan_in);
        Network::new(layers, w, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mse: f64,
    pub uuac: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    /// Metrics of the initial network, before any update.
    pub initial: EpochRecord,
    /// Metrics after each epoch, numbered from 1.
    pub per_epoch: Vec<EpochRecord>,
    pub final_net: Network,
}

impl TrainHistory {
    pub fn last(&self) -> EpochRecord {
        *self.per_epoch.last().unwrap_or(&self.initial)
    }

    /// `epoch,mse,uuac` rows, starting with epoch 0 for the initial network.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("epoch,mse,uuac\n");
        for r in std::iter::once(&self.initial).chain(&self.per_epoch) {
            out.push_str(&format!("{},{:?},{:?}\n", r.epoch, r.mse, r.uuac));
        }
        out
    }
}

fn metrics(mlp: &Mlp, data: &LabeledDataset, epoch: usize) -> EpochRecord {
    let mut t = mlp.trace();
    let (mut sq, mut worst) = (0.0, 0.0f64);
    for (x, y) in data.iter() {
        let e = mlp.forward(x.as_slice(), &mut t) - y;
        sq += e * e;
        worst = worst.max(e.abs());
    }
    EpochRecord {
        epoch,
        mse: sq / data.len() as f64,
        uuac: worst,
    }
}

/// Minibatch Adam on the mean squared error, starting from
/// [`TrainConfig::initial_network`].
pub fn train(config: &TrainConfig, data: &LabeledDataset) -> Result<TrainHistory> {
    let net = config.initial_network(data.dim())?;
    train_from(config, data, &net)
}

/// Like [`train`], but starting from `net`, which must have scalar output.
pub fn train_from(
    config: &TrainConfig,
    data: &LabeledDataset,
    net: &Network,
) -> Result<TrainHistory> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if net.input_dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            got: data.dim(),
        });
    }
    if net.output_dim() != 1 {
        return Err(Error::pre("training needs a scalar-output network"));
    }
    let mut mlp = Mlp::from_network(net);
    let mut grad = mlp.zeros_like();
    let mut m = mlp.zeros_like();
    let mut v = mlp.zeros_like();
    let mut t = mlp.trace();
    let (mut delta, mut next) = (Vec::new(), Vec::new());
    // Shuffling uses its own stream so that it does not depend on the
    // number of parameters drawn at initialisation.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5348_5546_464c_4521);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let points = data.points().points();
    let targets = data.targets();

    let initial = metrics(&mlp, data, 0);
    let mut per_epoch = Vec::with_capacity(config.epochs);
    let mut step = 0u64;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for (batch_index, batch) in order.chunks(config.batch_size).enumerate() {
            for g in grad.iter_mut() {
                g.w.fill(0.0);
                g.b.fill(0.0);
            }
            let mut loss = 0.0;
            let scale = 2.0 / batch.len() as f64;
            for &i in batch {
                let e = mlp.forward(points[i].as_slice(), &mut t) - targets[i];
                loss += e * e;
                mlp.backward(&t, scale * e, &mut grad, &mut delta, &mut next);
            }
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    step: batch_index,
                });
            }
            step += 1;
            adam_step(config, step, &mut mlp.stages, &grad, &mut m, &mut v);
        }
        let record = metrics(&mlp, data, epoch);
        if !record.mse.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                step: order.len().div_ceil(config.batch_size),
            });
        }
        per_epoch.push(record);
    }
    Ok(TrainHistory {
        initial,
        per_epoch,
        final_net: mlp.to_network(),
    })
}

fn adam_step(
    config: &TrainConfig,
    step: u64,
    params: &mut [Dense],
    grad: &[Dense],
    m: &mut [Dense],
    v: &mut [Dense],
) {
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let c1 = 1.0 - b1.powf(step as f64);
    let c2 = 1.0 - b2.powf(step as f64);
    let lr = config.learning_rate;
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(grad)
        .zip(m.iter_mut())
        .zip(v.iter_mut())
    {
        let pairs = [
            (&mut p.w, &g.w, &mut m.w, &mut v.w),
            (&mut p.b, &g.b, &mut m.b, &mut v.b),
        ];
        for (p, g, m, v) in pairs {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + config.adam_eps);
            }
        }
    }
}

/// Largest relative difference between backpropagated gradients of the
/// mean squared error and central differences with step `1e-6`.
///
/// The relative error of a parameter is `|g - fd| / max(1, |g|, |fd|)`.
/// Samples with a ReLU pre-activation within `1e-4` of the kink are left
/// out.
pub fn gradient_check(net: &Network, data: &LabeledDataset) -> Result<f64> {
    if net.output_dim() != 1 {
        return Err(Error::pre("gradient check needs a scalar-output network"));
    }
    if net.input_dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            got: data.dim(),
        });
    }
    let mlp = Mlp::from_network(net);
    let mut t = mlp.trace();
    let usable: Vec<(Vec<f64>, f64)> = data
        .iter()
        .filter(|(x, _)| {
            mlp.forward(x.as_slice(), &mut t);
            mlp.kink_margin(&t) > KINK_MARGIN
        })
        .map(|(x, y)| (x.as_slice().to_vec(), y))
        .collect();
    if usable.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = usable.len() as f64;
    let loss = |mlp: &Mlp, t: &mut super::mlp::Trace| {
        usable
            .iter()
            .map(|(x, y)| (mlp.forward(x, t) - y).powi(2))
            .sum::<f64>()
            / n
    };

    let mut grad = mlp.zeros_like();
    let (mut delta, mut next) = (Vec::new(), Vec::new());
    for (x, y) in &usable {
        let e = mlp.forward(x, &mut t) - y;
        mlp.backward(&t, 2.0 * e / n, &mut grad, &mut delta, &mut next);
    }
    let analytic: Vec<f64> = Mlp::params_mut(&mut grad).map(|g| *g).collect();

    let mut probe = mlp.clone();
    let mut worst = 0.0f64;
    for (index, &g) in analytic.iter().enumerate() {
        let original = *Mlp::params_mut(&mut probe.stages)
            .nth(index)
            .expect("parameter");
        let set = |probe: &mut Mlp, value: f64| {
            *Mlp::params_mut(&mut probe.stages)
                .nth(index)
                .expect("parameter") = value;
        };
        set(&mut probe, original + FD_STEP);
        let up = loss(&probe, &mut t);
        set(&mut probe, original - FD_STEP);
        let down = loss(&probe, &mut t);
        set(&mut probe, original);
        let fd = (up - down) / (2.0 * FD_STEP);
        worst = worst.max((g - fd).abs() / 1f64.max(g.abs()).max(fd.abs()));
    }
    Ok(worst)
}
