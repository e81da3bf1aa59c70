use nalgebra::{DMatrix, DVector};

use crate::network::{Activation, Layer, Network};

/// Leaky ReLU slope used by the second fixture pair.
pub const FIXTURE_ALPHA: f64 = 0.5;

/// Values of a fixture pair at one probe point.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureRow {
    pub pair: &'static str,
    pub x: f64,
    pub first: f64,
    pub second: f64,
    /// Whether the two networks are stated to agree at `x`.
    pub expect_agree: bool,
}

impl FixtureRow {
    pub fn agrees(&self) -> bool {
        (self.first - self.second).abs() <= 1e-12
    }

    pub fn holds(&self) -> bool {
        self.agrees() == self.expect_agree
    }
}

fn scalar_chain(stages: &[(f64, f64)], act: Activation) -> Network {
    let layers = stages
        .iter()
        .map(|&(w, b)| {
            Layer::new(
                DMatrix::from_element(1, 1, w),
                DVector::from_element(1, b),
                act,
            )
            .expect("1 x 1 layer")
        })
        .collect();
    Network::new(layers, DMatrix::identity(1, 1), DVector::zeros(1)).expect("1-D chain")
}

/// `ReLU(-ReLU(x) + 1)` and `ReLU(-ReLU(x - 1) + 1)`.
pub fn relu_pair() -> (Network, Network) {
    (
        scalar_chain(&[(1.0, 0.0), (-1.0, 1.0)], Activation::Relu),
        scalar_chain(&[(1.0, -1.0), (-1.0, 1.0)], Activation::Relu),
    )
}

/// `σ(σ(x)/(1+α) + α/(1+α))` and `σ(σ(x+1)/2)` for leaky ReLU `σ` with slope `α`.
pub fn leaky_pair(alpha: f64) -> (Network, Network) {
    let act = Activation::LeakyRelu(alpha);
    (
        scalar_chain(
            &[(1.0, 0.0), (1.0 / (1.0 + alpha), alpha / (1.0 + alpha))],
            act,
        ),
        scalar_chain(&[(1.0, 1.0), (0.5, 0.0)], act),
    )
}

/// Evaluates both counterexample pairs to uniqueness at their probe points.
/// Each pair agrees at two points and differs in between.
pub fn uniqueness_fixtures() -> Vec<FixtureRow> {
    let mut rows = Vec::new();
    let mut probe = |pair: &'static str, nets: &(Network, Network), x: f64, expect_agree: bool| {
        let v = DVector::from_element(1, x);
        rows.push(FixtureRow {
            pair,
            x,
            first: nets.0.forward_scalar(&v).expect("scalar"),
            second: nets.1.forward_scalar(&v).expect("scalar"),
            expect_agree,
        });
    };
    let relu = relu_pair();
    probe("relu", &relu, 0.0, true);
    probe("relu", &relu, 1.0, false);
    probe("relu", &relu, 2.0, true);
    let leaky = leaky_pair(FIXTURE_ALPHA);
    probe("leaky_relu", &leaky, -1.0, true);
    probe("leaky_relu", &leaky, 0.0, false);
    probe("leaky_relu", &leaky, 1.0, true);
    rows
}
