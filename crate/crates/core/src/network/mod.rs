//! Feed-forward networks `W_L (A_{L-1} ∘ … ∘ A_1) + b_L` with
//! `A_j(x) = σ(W_j x + b_j)`.

pub mod activation;
pub mod bounds;
pub mod hexfloat;
mod json;

use nalgebra::{DMatrix, DVector};

pub use activation::Activation;
pub use bounds::Evaluator;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(weights: DMatrix<f64>, bias: DVector<f64>, activation: Activation) -> Result<Self> {
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::pre("layer weights must be non-empty"));
        }
        if bias.len() != weights.nrows() {
            return Err(Error::DimensionMismatch {
                expected: weights.nrows(),
                got: bias.len(),
            });
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn width(&self) -> usize {
        self.weights.nrows()
    }

    pub fn pre_activation(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.weights * x + &self.bias
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.pre_activation(x).map(|t| self.activation.apply(t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
    final_weights: DMatrix<f64>,
    final_bias: DVector<f64>,
}

impl Network {
    pub fn new(
        layers: Vec<Layer>,
        final_weights: DMatrix<f64>,
        final_bias: DVector<f64>,
    ) -> Result<Self> {
        if final_weights.nrows() == 0 || final_weights.ncols() == 0 {
            return Err(Error::pre("final weights must be non-empty"));
        }
        if final_bias.len() != final_weights.nrows() {
            return Err(Error::DimensionMismatch {
                expected: final_weights.nrows(),
                got: final_bias.len(),
            });
        }
        for pair in layers.windows(2) {
            if pair[1].input_dim() != pair[0].width() {
                return Err(Error::DimensionMismatch {
                    expected: pair[0].width(),
                    got: pair[1].input_dim(),
                });
            }
        }
        if let Some(last) = layers.last() {
            if final_weights.ncols() != last.width() {
                return Err(Error::DimensionMismatch {
                    expected: last.width(),
                    got: final_weights.ncols(),
                });
            }
        }
        Ok(Self {
            layers,
            final_weights,
            final_bias,
        })
    }

    /// Network with no hidden layers.
    pub fn affine(weights: DMatrix<f64>, bias: DVector<f64>) -> Result<Self> {
        Self::new(Vec::new(), weights, bias)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::affine(DMatrix::identity(dim, dim), DVector::zeros(dim))
    }

    /// Constant scalar function on `R^input_dim`.
    pub fn constant(input_dim: usize, value: f64) -> Result<Self> {
        Self::affine(
            DMatrix::zeros(1, input_dim),
            DVector::from_element(1, value),
        )
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn final_weights(&self) -> &DMatrix<f64> {
        &self.final_weights
    }

    pub fn final_bias(&self) -> &DVector<f64> {
        &self.final_bias
    }

    pub fn input_dim(&self) -> usize {
        self.layers
            .first()
            .map_or(self.final_weights.ncols(), Layer::input_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.final_weights.nrows()
    }

    /// ω(F): the largest number of units in any layer, output included.
    pub fn width(&self) -> usize {
        self.layers
            .iter()
            .map(Layer::width)
            .chain(std::iter::once(self.output_dim()))
            .max()
            .unwrap_or(0)
    }

    /// Number of affine stages: hidden layers plus the final map.
    pub fn depth(&self) -> usize {
        self.layers.len() + 1
    }

    fn check_input(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() == self.input_dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            })
        }
    }

    pub fn forward(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_input(x)?;
        let hidden = self
            .layers
            .iter()
            .fold(x.clone(), |h, layer| layer.apply(&h));
        Ok(&self.final_weights * hidden + &self.final_bias)
    }

    /// Scalar output of a network with `output_dim() == 1`.
    pub fn forward_scalar(&self, x: &DVector<f64>) -> Result<f64> {
        if self.output_dim() != 1 {
            return Err(Error::pre("network output is not scalar"));
        }
        Ok(self.forward(x)?[0])
    }

    /// Pre-activation `F_k(x)` of hidden layer `k`, for `1 <= k <= L - 1`.
    pub fn forward_prefix(&self, k: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_input(x)?;
        if k == 0 || k > self.layers.len() {
            return Err(Error::pre(format!(
                "prefix index {k} outside 1..={}",
                self.layers.len()
            )));
        }
        let h = self.layers[..k - 1]
            .iter()
            .fold(x.clone(), |h, layer| layer.apply(&h));
        Ok(self.layers[k - 1].pre_activation(&h))
    }

    /// `outer ∘ inner`, folding `inner`'s final affine map into the first
    /// affine map of `outer`. The depth is `depth(inner) + depth(outer) - 1`.
    pub fn compose(outer: &Network, inner: &Network) -> Result<Network> {
        if inner.output_dim() != outer.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: outer.input_dim(),
                got: inner.output_dim(),
            });
        }
        let fold = |w: &DMatrix<f64>, b: &DVector<f64>| {
            (w * &inner.final_weights, w * &inner.final_bias + b)
        };
        let mut layers = inner.layers.clone();
        let (final_weights, final_bias) = match outer.layers.split_first() {
            None => fold(&outer.final_weights, &outer.final_bias),
            Some((first, rest)) => {
                let (w, b) = fold(&first.weights, &first.bias);
                layers.push(Layer::new(w, b, first.activation)?);
                layers.extend(rest.iter().cloned());
                (outer.final_weights.clone(), outer.final_bias.clone())
            }
        };
        Network::new(layers, final_weights, final_bias)
    }

    /// `-F`.
    pub fn negated(&self) -> Network {
        Network {
            layers: self.layers.clone(),
            final_weights: -&self.final_weights,
            final_bias: -&self.final_bias,
        }
    }

    /// Upper bound on the Lipschitz constant: the product of spectral norms
    /// and activation constants.
    pub fn lipschitz_bound(&self) -> Result<f64> {
        let mut bound = spectral_norm(&self.final_weights);
        for layer in &self.layers {
            bound *= spectral_norm(&layer.weights) * layer.activation.lipschitz()?;
        }
        Ok(bound)
    }

    /// Reusable allocation-free evaluator.
    pub fn evaluator(&self) -> Evaluator {
        Evaluator::new(self)
    }

    pub fn to_json(&self) -> String {
        json::to_json(self)
    }

    pub fn from_json(text: &str) -> Result<Network> {
        json::from_json(text)
    }

    pub fn read(path: impl AsRef<std::path::Path>) -> Result<Network> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |a, &s| a.max(s))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn relu_layer(w: &[f64], rows: usize, b: &[f64]) -> Layer {
        let cols = w.len() / rows;
        Layer::new(
            DMatrix::from_row_slice(rows, cols, w),
            DVector::from_column_slice(b),
            Activation::Relu,
        )
        .unwrap()
    }

    // G1(x) = ReLU(-ReLU(x) + 1)
    fn g1() -> Network {
        Network::new(
            vec![
                relu_layer(&[1.0], 1, &[0.0]),
                relu_layer(&[-1.0], 1, &[1.0]),
            ],
            DMatrix::identity(1, 1),
            DVector::zeros(1),
        )
        .unwrap()
    }

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    pub(crate) fn random_net(rng: &mut ChaCha8Rng, dims: &[usize], act: Activation) -> Network {
        let mut layers = Vec::new();
        for pair in dims[..dims.len() - 1].windows(2) {
            let w = DMatrix::from_fn(pair[1], pair[0], |_, _| rng.random_range(-1.5..1.5));
            let b = DVector::from_fn(pair[1], |_, _| rng.random_range(-1.0..1.0));
            layers.push(Layer::new(w, b, act).unwrap());
        }
        let (n_in, n_out) = (dims[dims.len() - 2], dims[dims.len() - 1]);
        let w = DMatrix::from_fn(n_out, n_in, |_, _| rng.random_range(-1.5..1.5));
        let b = DVector::from_fn(n_out, |_, _| rng.random_range(-1.0..1.0));
        Network::new(layers, w, b).unwrap()
    }

    // Straight-line evaluator written independently of `forward`.
    fn reference_eval(net: &Network, x: &[f64]) -> Vec<f64> {
        let mut h = x.to_vec();
        let stages = net
            .layers()
            .iter()
            .map(|l| (&l.weights, &l.bias, Some(l.activation)))
            .chain(std::iter::once((
                net.final_weights(),
                net.final_bias(),
                None,
            )));
        for (w, b, act) in stages {
            let mut next = vec![0.0; w.nrows()];
            for i in 0..w.nrows() {
                let mut s = b[i];
                for j in 0..w.ncols() {
                    s += w[(i, j)] * h[j];
                }
                next[i] = match act {
                    Some(a) => a.apply(s),
                    None => s,
                };
            }
            h = next;
        }
        h
    }

    #[test]
    fn example_network_values() {
        let net = g1();
        assert_eq!(net.forward(&v(&[0.0])).unwrap()[0], 1.0);
        assert_eq!(net.forward(&v(&[2.0])).unwrap()[0], 0.0);
        assert_eq!(net.depth(), 3);
        assert_eq!(net.width(), 1);
    }

    #[test]
    fn identity_layer_passes_through() {
        let layer = Layer::new(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            Activation::Identity,
        )
        .unwrap();
        let net = Network::new(vec![layer], DMatrix::identity(2, 2), v(&[1.0, -1.0])).unwrap();
        assert_eq!(net.forward(&v(&[3.0, 4.0])).unwrap(), v(&[4.0, 3.0]));
    }

    #[test]
    fn random_nets_match_reference_evaluator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = random_net(&mut rng, &[2, 2, 2, 2, 1], Activation::Relu);
        for _ in 0..100 {
            let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let got = net.forward(&v(&x)).unwrap();
            assert!((got[0] - reference_eval(&net, &x)[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(
            g1().forward(&v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch {
                expected: 1,
                got: 2
            })
        ));
        let bad = Layer::new(DMatrix::zeros(2, 3), DVector::zeros(2), Activation::Relu).unwrap();
        assert!(Network::new(vec![bad], DMatrix::zeros(1, 3), DVector::zeros(1)).is_err());
    }

    #[test]
    fn prefix_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = random_net(&mut rng, &[3, 3, 2, 3, 1], Activation::Tanh);
        let x = v(&[0.3, -0.2, 0.9]);
        let l = &net.layers()[0];
        assert_eq!(
            net.forward_prefix(1, &x).unwrap(),
            &l.weights * &x + &l.bias
        );
        let f1 = net.forward_prefix(1, &x).unwrap().map(|t| t.tanh());
        let f2 = net.forward_prefix(2, &x).unwrap();
        assert!((&net.layers()[1].weights * f1 + &net.layers()[1].bias - f2).amax() < 1e-15);
        let last = net.forward_prefix(3, &x).unwrap().map(|t| t.tanh());
        let out = net.final_weights() * last + net.final_bias();
        assert!((out - net.forward(&x).unwrap()).amax() < 1e-15);
        assert!(net.forward_prefix(0, &x).is_err());
        assert!(net.forward_prefix(4, &x).is_err());
    }

    #[test]
    fn compose_with_affine_outer_keeps_hidden_layers() {
        let outer = Network::affine(DMatrix::from_element(1, 1, 2.0), v(&[1.0])).unwrap();
        let net = Network::compose(&outer, &g1()).unwrap();
        assert_eq!(net.layers().len(), 2);
        assert_eq!(net.forward(&v(&[0.0])).unwrap()[0], 3.0);
    }

    #[test]
    fn composed_depth_matches_three_hidden_relu_layers() {
        // One hidden layer, then a depth-3 map, then a scalar readout.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f1 = random_net(&mut rng, &[2, 2, 2], Activation::Relu);
        let f2 = random_net(&mut rng, &[2, 2, 2, 2], Activation::Relu);
        let readout =
            Network::affine(DMatrix::from_row_slice(1, 2, &[1.0, -1.0]), v(&[0.5])).unwrap();
        let net = Network::compose(&readout, &Network::compose(&f2, &f1).unwrap()).unwrap();
        assert_eq!(net.depth(), 4);
        assert_eq!(net.layers().len(), 3);
        assert!(net
            .layers()
            .iter()
            .all(|l| l.activation == Activation::Relu));
    }

    #[test]
    fn lipschitz_examples() {
        let affine =
            Network::affine(DMatrix::from_row_slice(1, 2, &[3.0, 4.0]), v(&[0.0])).unwrap();
        assert!((affine.lipschitz_bound().unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(
            Network::identity(3).unwrap().lipschitz_bound().unwrap(),
            1.0
        );
        let net = g1();
        let bound = net.lipschitz_bound().unwrap();
        assert!(bound >= 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let (x, y) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let dx = net.forward(&v(&[x])).unwrap()[0] - net.forward(&v(&[y])).unwrap()[0];
            assert!(dx.abs() <= bound * (x - y).abs() + 1e-15);
        }
        let step =
            Layer::new(DMatrix::identity(1, 1), DVector::zeros(1), Activation::Step).unwrap();
        let step_net =
            Network::new(vec![step], DMatrix::identity(1, 1), DVector::zeros(1)).unwrap();
        assert!(matches!(
            step_net.lipschitz_bound(),
            Err(Error::Unbounded(_))
        ));
    }

    fn arb_net() -> impl Strategy<Value = (Network, u64)> {
        (any::<u64>(), 1usize..4, 0usize..4, 0usize..5).prop_map(|(seed, n0, depth, kind)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let act = [
                Activation::Relu,
                Activation::LeakyRelu(0.1),
                Activation::Tanh,
                Activation::Sigmoid,
                Activation::Cosine,
            ][kind];
            let mut dims = vec![n0];
            for _ in 0..depth {
                dims.push(rng.random_range(1..=n0 + 1));
            }
            dims.push(rng.random_range(1..=n0));
            (random_net(&mut rng, &dims, act), seed)
        })
    }

    proptest! {
        #[test]
        fn composition_equals_sequential_evaluation((inner, seed) in arb_net(), depth in 0usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut dims = vec![inner.output_dim()];
            for _ in 0..depth {
                dims.push(rng.random_range(1..4));
            }
            dims.push(2);
            let outer = random_net(&mut rng, &dims, Activation::Relu);
            let composed = Network::compose(&outer, &inner).unwrap();
            prop_assert_eq!(composed.depth(), inner.depth() + outer.depth() - 1);
            prop_assert!(composed.width() <= inner.width().max(outer.width()).max(inner.output_dim()));
            for _ in 0..10 {
                let x = DVector::from_fn(inner.input_dim(), |_, _| rng.random_range(-2.0..2.0));
                let seq = outer.forward(&inner.forward(&x).unwrap()).unwrap();
                let got = composed.forward(&x).unwrap();
                prop_assert!((seq - got).amax() < 1e-9);
            }
        }

        #[test]
        fn lipschitz_bound_dominates_sampled_slopes((net, seed) in arb_net()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bound = net.lipschitz_bound().unwrap();
            for _ in 0..20 {
                let x = DVector::from_fn(net.input_dim(), |_, _| rng.random_range(-2.0..2.0));
                let y = DVector::from_fn(net.input_dim(), |_, _| rng.random_range(-2.0..2.0));
                let df = (net.forward(&x).unwrap() - net.forward(&y).unwrap()).norm();
                prop_assert!(df <= bound * (x - y).norm() * (1.0 + 1e-12) + 1e-12);
            }
        }

        #[test]
        fn json_round_trip_is_exact((net, seed) in arb_net()) {
            let back = Network::from_json(&net.to_json()).unwrap();
            prop_assert_eq!(&back, &net);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = DVector::from_fn(net.input_dim(), |_, _| rng.random_range(-2.0..2.0));
            let a = net.forward(&x).unwrap();
            let b = back.forward(&x).unwrap();
            prop_assert!(a.iter().zip(b.iter()).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }
}
