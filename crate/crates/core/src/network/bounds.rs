use super::{Activation, Network};

struct Stage {
    rows: usize,
    cols: usize,
    // Row-major weights and their absolute values.
    w: Vec<f64>,
    w_abs: Vec<f64>,
    b: Vec<f64>,
    act: Option<Activation>,
}

/// Flat, allocation-free evaluator for repeated point and interval queries.
pub struct Evaluator {
    stages: Vec<Stage>,
    input_dim: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    ra: Vec<f64>,
    rb: Vec<f64>,
}

impl Evaluator {
    pub fn new(net: &Network) -> Self {
        let mut stages: Vec<Stage> = net
            .layers()
            .iter()
            .map(|l| stage(&l.weights, &l.bias, Some(l.activation)))
            .collect();
        stages.push(stage(net.final_weights(), net.final_bias(), None));
        let widest = stages.iter().map(|s| s.rows.max(s.cols)).max().unwrap_or(1);
        Self {
            stages,
            input_dim: net.input_dim(),
            a: vec![0.0; widest],
            b: vec![0.0; widest],
            ra: vec![0.0; widest],
            rb: vec![0.0; widest],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Evaluates the network at `x`, which must have the input dimension.
    pub fn eval(&mut self, x: &[f64]) -> &[f64] {
        assert_eq!(x.len(), self.input_dim, "input dimension");
        self.a[..x.len()].copy_from_slice(x);
        let mut out_len = x.len();
        for s in &self.stages {
            for i in 0..s.rows {
                let row = &s.w[i * s.cols..(i + 1) * s.cols];
                let mut acc = s.b[i];
                for (w, v) in row.iter().zip(&self.a[..s.cols]) {
                    acc += w * v;
                }
                self.b[i] = match s.act {
                    Some(act) => act.apply(acc),
                    None => acc,
                };
            }
            std::mem::swap(&mut self.a, &mut self.b);
            out_len = s.rows;
        }
        &self.a[..out_len]
    }

    pub fn eval_scalar(&mut self, x: &[f64]) -> f64 {
        self.eval(x)[0]
    }

    /// Interval enclosure of the outputs over the box `[lo, hi]`, by
    /// propagating centre and radius through each stage.
    pub fn interval(&mut self, lo: &[f64], hi: &[f64]) -> (&[f64], &[f64]) {
        assert_eq!(lo.len(), self.input_dim, "input dimension");
        assert_eq!(hi.len(), self.input_dim, "input dimension");
        for i in 0..lo.len() {
            self.a[i] = 0.5 * (lo[i] + hi[i]);
            self.ra[i] = 0.5 * (hi[i] - lo[i]);
        }
        let mut out_len = lo.len();
        for s in &self.stages {
            for i in 0..s.rows {
                let row = &s.w[i * s.cols..(i + 1) * s.cols];
                let row_abs = &s.w_abs[i * s.cols..(i + 1) * s.cols];
                let mut c = s.b[i];
                let mut r = 0.0;
                for j in 0..s.cols {
                    c += row[j] * self.a[j];
                    r += row_abs[j] * self.ra[j];
                }
                if let Some(act) = s.act {
                    let (l, h) = act.interval(c - r, c + r);
                    c = 0.5 * (l + h);
                    r = 0.5 * (h - l);
                }
                self.b[i] = c;
                self.rb[i] = r;
            }
            std::mem::swap(&mut self.a, &mut self.b);
            std::mem::swap(&mut self.ra, &mut self.rb);
            out_len = s.rows;
        }
        for i in 0..out_len {
            let (c, r) = (self.a[i], self.ra[i]);
            self.a[i] = c - r;
            self.ra[i] = c + r;
        }
        (&self.a[..out_len], &self.ra[..out_len])
    }
}

fn stage(w: &nalgebra::DMatrix<f64>, b: &nalgebra::DVector<f64>, act: Option<Activation>) -> Stage {
    let (rows, cols) = w.shape();
    let flat: Vec<f64> = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| w[(i, j)]))
        .collect();
    Stage {
        rows,
        cols,
        w_abs: flat.iter().map(|v| v.abs()).collect(),
        w: flat,
        b: b.as_slice().to_vec(),
        act,
    }
}
