//! Flat dense representation used for backpropagation.

use nalgebra::{DMatrix, DVector};

use crate::network::{Activation, Layer, Network};

#[derive(Debug, Clone)]
pub(crate) struct Dense {
    pub rows: usize,
    pub cols: usize,
    /// Row-major weights.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub act: Option<Activation>,
}

#[derive(Debug, Clone)]
pub(crate) struct Mlp {
    pub stages: Vec<Dense>,
}

/// Per-sample forward pass: `pre[k]` and `post[k]` for every stage, with
/// `post[0]` holding the input and `post[k + 1]` the output of stage `k`.
pub(crate) struct Trace {
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl Mlp {
    pub fn from_network(net: &Network) -> Self {
        let dense = |w: &DMatrix<f64>, b: &DVector<f64>, act| Dense {
            rows: w.nrows(),
            cols: w.ncols(),
            w: (0..w.nrows())
                .flat_map(|i| (0..w.ncols()).map(move |j| w[(i, j)]))
                .collect(),
            b: b.iter().copied().collect(),
            act,
        };
        let mut stages: Vec<Dense> = net
            .layers()
            .iter()
            .map(|l| dense(&l.weights, &l.bias, Some(l.activation)))
            .collect();
        stages.push(dense(net.final_weights(), net.final_bias(), None));
        Self { stages }
    }

    pub fn to_network(&self) -> Network {
        let (last, hidden) = self.stages.split_last().expect("at least one stage");
        let matrix = |d: &Dense| DMatrix::from_row_slice(d.rows, d.cols, &d.w);
        let layers = hidden
            .iter()
            .map(|d| {
                Layer::new(
                    matrix(d),
                    DVector::from_column_slice(&d.b),
                    d.act.expect("hidden stage has an activation"),
                )
                .expect("consistent shapes")
            })
            .collect();
        Network::new(layers, matrix(last), DVector::from_column_slice(&last.b))
            .expect("consistent shapes")
    }

    pub fn trace(&self) -> Trace {
        Trace {
            pre: self.stages.iter().map(|s| vec![0.0; s.rows]).collect(),
            post: std::iter::once(self.stages[0].cols)
                .chain(self.stages.iter().map(|s| s.rows))
                .map(|n| vec![0.0; n])
                .collect(),
        }
    }

    pub fn zeros_like(&self) -> Vec<Dense> {
        self.stages
            .iter()
            .map(|s| Dense {
                rows: s.rows,
                cols: s.cols,
                w: vec![0.0; s.w.len()],
                b: vec![0.0; s.b.len()],
                act: s.act,
            })
            .collect()
    }

    /// Scalar output at `x`, recording intermediate values in `t`.
    pub fn forward(&self, x: &[f64], t: &mut Trace) -> f64 {
        t.post[0].copy_from_slice(x);
        for (k, s) in self.stages.iter().enumerate() {
            let (before, after) = t.post.split_at_mut(k + 1);
            let input = &before[k];
            for i in 0..s.rows {
                let row = &s.w[i * s.cols..(i + 1) * s.cols];
                let z = s.b[i] + row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>();
                t.pre[k][i] = z;
                after[0][i] = s.act.map_or(z, |a| a.apply(z));
            }
        }
        t.post.last().expect("output")[0]
    }

    /// Adds `scale * d(output)/d(params)` at the traced point to `grad`.
    pub fn backward(
        &self,
        t: &Trace,
        scale: f64,
        grad: &mut [Dense],
        delta: &mut Vec<f64>,
        next: &mut Vec<f64>,
    ) {
        delta.clear();
        delta.push(scale);
        for k in (0..self.stages.len()).rev() {
            let s = &self.stages[k];
            if let Some(act) = s.act {
                for (d, &z) in delta.iter_mut().zip(&t.pre[k]) {
                    *d *= act.derivative(z);
                }
            }
            let g = &mut grad[k];
            let input = &t.post[k];
            next.clear();
            next.resize(s.cols, 0.0);
            for i in 0..s.rows {
                let d = delta[i];
                if d == 0.0 {
                    continue;
                }
                g.b[i] += d;
                let row = &s.w[i * s.cols..(i + 1) * s.cols];
                let grow = &mut g.w[i * s.cols..(i + 1) * s.cols];
                for j in 0..s.cols {
                    grow[j] += d * input[j];
                    next[j] += d * row[j];
                }
            }
            std::mem::swap(delta, next);
        }
    }

    /// Smallest `|pre-activation|` over units with a piecewise activation.
    pub fn kink_margin(&self, t: &Trace) -> f64 {
        self.stages
            .iter()
            .zip(&t.pre)
            .filter(|(s, _)| matches!(s.act, Some(Activation::Relu | Activation::LeakyRelu(_))))
            .flat_map(|(_, z)| z.iter().map(|v| v.abs()))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn params_mut(stages: &mut [Dense]) -> impl Iterator<Item = &mut f64> {
        stages
            .iter_mut()
            .flat_map(|s| s.w.iter_mut().chain(s.b.iter_mut()))
    }
}
