use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Relu,
    /// `t` for `t >= 0`, `alpha * t` otherwise.
    LeakyRelu(f64),
    Cosine,
    Tanh,
    Sigmoid,
    Identity,
    /// 1 for `t >= 0`, 0 otherwise.
    Step,
}

impl Activation {
    pub fn leaky_relu(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha.is_finite() {
            Ok(Activation::LeakyRelu(alpha))
        } else {
            Err(Error::pre(format!(
                "leaky_relu needs alpha > 0, got {alpha}"
            )))
        }
    }

    #[inline]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Activation::Relu => t.max(0.0),
            Activation::LeakyRelu(alpha) => {
                if t >= 0.0 {
                    t
                } else {
                    alpha * t
                }
            }
            Activation::Cosine => t.cos(),
            Activation::Tanh => t.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-t).exp()),
            Activation::Identity => t,
            Activation::Step => {
                if t >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Derivative, with the ReLU subgradient at 0 taken as 0.
    #[inline]
    pub fn derivative(self, t: f64) -> f64 {
        match self {
            Activation::Relu => {
                if t > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu(alpha) => {
                if t > 0.0 {
                    1.0
                } else {
                    alpha
                }
            }
            Activation::Cosine => -t.sin(),
            Activation::Tanh => 1.0 - t.tanh().powi(2),
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-t).exp());
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
            Activation::Step => 0.0,
        }
    }

    /// Non-decreasing activations. Cosine is the only non-monotone kind.
    pub fn is_monotone(self) -> bool {
        !matches!(self, Activation::Cosine)
    }

    pub fn lipschitz(self) -> Result<f64> {
        match self {
            Activation::Relu | Activation::Cosine | Activation::Tanh | Activation::Identity => {
                Ok(1.0)
            }
            Activation::LeakyRelu(alpha) => Ok(alpha.max(1.0)),
            Activation::Sigmoid => Ok(0.25),
            Activation::Step => Err(Error::Unbounded("step".into())),
        }
    }

    /// Image of the interval `[lo, hi]`.
    pub fn interval(self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            Activation::Cosine => cos_interval(lo, hi),
            _ => (self.apply(lo), self.apply(hi)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::LeakyRelu(_) => "leaky_relu",
            Activation::Cosine => "cosine",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
            Activation::Step => "step",
        }
    }
}

fn cos_interval(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo >= 2.0 * PI {
        return (-1.0, 1.0);
    }
    let (a, b) = (lo.cos(), hi.cos());
    let mut min = a.min(b);
    let mut max = a.max(b);
    // Maxima of cos sit at 2πk, minima at π + 2πk.
    if (lo / (2.0 * PI)).ceil() * 2.0 * PI <= hi {
        max = 1.0;
    }
    if ((lo - PI) / (2.0 * PI)).ceil() * 2.0 * PI + PI <= hi {
        min = -1.0;
    }
    (min, max)
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::LeakyRelu(alpha) => write!(f, "leaky_relu({alpha})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Parses `relu`, `cosine`, `tanh`, `sigmoid`, `identity`, `step` and
/// `leaky_relu(<alpha>)`. `cos` is accepted as an alias of `cosine`.
impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "relu" => Ok(Activation::Relu),
            "cosine" | "cos" => Ok(Activation::Cosine),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "identity" => Ok(Activation::Identity),
            "step" => Ok(Activation::Step),
            _ => {
                let alpha = s
                    .strip_prefix("leaky_relu(")
                    .and_then(|rest| rest.strip_suffix(')'))
                    .ok_or_else(|| {
                        Error::parse("activation", format!("unknown activation `{s}`"))
                    })?;
                let alpha: f64 = alpha.trim().parse().map_err(|_| {
                    Error::parse("activation", format!("bad leaky_relu slope `{alpha}`"))
                })?;
                Activation::leaky_relu(alpha)
            }
        }
    }
}
