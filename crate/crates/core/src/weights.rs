//! Concave allocation weights.
//!
//! Every piece of weight arithmetic in the crate goes through [`WeightSpec`]:
//! value, exact derivative, and an increment `w(x + d) - w(x)` that stays
//! accurate when `d` is tiny compared with `x`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Deepest supported nesting for iterated logarithms.
pub const MAX_LOG_DEPTH: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    /// `x^gamma` with `gamma` in `(0, 1]`.
    Power(f64),
    /// `log(x + 1)`.
    Log1p,
    /// `k` nested `log(. + 1)` applications; depth 1 is stored as [`WeightKind::Log1p`].
    IteratedLog(u32),
}

/// A validated concave, increasing weight function with `w(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    kind: WeightKind,
}

impl WeightSpec {
    pub fn power(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Invalid(format!(
                "power weight exponent must lie in (0, 1], got {gamma}"
            )));
        }
        Ok(Self {
            kind: WeightKind::Power(gamma),
        })
    }

    /// The proportional weight `w(x) = x`.
    pub fn linear() -> Self {
        Self {
            kind: WeightKind::Power(1.0),
        }
    }

    pub fn log1p() -> Self {
        Self {
            kind: WeightKind::Log1p,
        }
    }

    pub fn iterated_log(depth: u32) -> Result<Self> {
        match depth {
            0 => Err(Error::Invalid(
                "iterated log depth must be at least 1".into(),
            )),
            1 => Ok(Self::log1p()),
            d if d <= MAX_LOG_DEPTH => Ok(Self {
                kind: WeightKind::IteratedLog(d),
            }),
            d => Err(Error::Invalid(format!(
                "iterated log depth {d} unsupported (max {MAX_LOG_DEPTH})"
            ))),
        }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    /// Exponent of a power weight, `None` for log weights.
    pub fn gamma(&self) -> Option<f64> {
        match self.kind {
            WeightKind::Power(g) => Some(g),
            _ => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.gamma() == Some(1.0)
    }

    fn depth(&self) -> u32 {
        match self.kind {
            WeightKind::Power(_) => 0,
            WeightKind::Log1p => 1,
            WeightKind::IteratedLog(k) => k,
        }
    }

    /// `w(x)` for `x >= 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("weight evaluated at {x}")));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match self.kind {
            WeightKind::Power(1.0) => x,
            WeightKind::Power(0.5) => x.sqrt(),
            WeightKind::Power(g) => x.powf(g),
            _ => (0..self.depth()).fold(x, |acc, _| acc.ln_1p()),
        }
    }

    /// `w'(x)` for `x > 0`, computed analytically.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!(
                "weight derivative requires a positive argument, got {x}"
            )));
        }
        Ok(self.deriv_unchecked(x))
    }

    pub(crate) fn deriv_unchecked(&self, x: f64) -> f64 {
        match self.kind {
            WeightKind::Power(1.0) => 1.0,
            WeightKind::Power(0.5) => 0.5 / x.sqrt(),
            WeightKind::Power(g) => g * x.powf(g - 1.0),
            _ => {
                // chain rule through each log(. + 1) layer
                let mut inner = x;
                let mut d = 1.0;
                for _ in 0..self.depth() {
                    d /= 1.0 + inner;
                    inner = inner.ln_1p();
                }
                d
            }
        }
    }

    /// `w'(0)`; infinite for `x^gamma` with `gamma < 1`.
    pub fn deriv_at_zero(&self) -> f64 {
        match self.kind {
            WeightKind::Power(g) if g < 1.0 => f64::INFINITY,
            _ => 1.0,
        }
    }

    /// `w(x + d) - w(x)` without the cancellation of subtracting two evaluations.
    /// Requires `x >= 0` and `x + d >= 0`.
    pub fn increment(&self, x: f64, d: f64) -> f64 {
        if d == 0.0 {
            return 0.0;
        }
        match self.kind {
            WeightKind::Power(1.0) => d,
            WeightKind::Power(g) => {
                if x == 0.0 {
                    d.max(0.0).powf(g)
                } else {
                    let ratio = (d / x).max(-1.0);
                    x.powf(g) * (g * ratio.ln_1p()).exp_m1()
                }
            }
            _ => {
                let mut base = x;
                let mut delta = d;
                for _ in 0..self.depth() {
                    delta = (delta / (1.0 + base)).max(-1.0).ln_1p();
                    base = base.ln_1p();
                }
                delta
            }
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            WeightKind::Power(g) => write!(f, "power:{g}"),
            WeightKind::Log1p => f.write_str("log1p"),
            WeightKind::IteratedLog(2) => f.write_str("loglog"),
            WeightKind::IteratedLog(k) => write!(f, "iterlog:{k}"),
        }
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    /// Accepts `power:<gamma>`, `linear`, `sqrt`, `log1p`, `loglog` and `iterlog:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let parse_err = || Error::Parse {
            what: "weight",
            input: s.to_string(),
        };
        let s = s.trim();
        match s {
            "linear" => return Ok(Self::linear()),
            "sqrt" => return Self::power(0.5),
            "log1p" => return Ok(Self::log1p()),
            "loglog" => return Self::iterated_log(2),
            _ => {}
        }
        if let Some(g) = s.strip_prefix("power:") {
            let g: f64 = g.parse().map_err(|_| parse_err())?;
            return Self::power(g);
        }
        if let Some(k) = s.strip_prefix("iterlog:") {
            let k: u32 = k.parse().map_err(|_| parse_err())?;
            return Self::iterated_log(k);
        }
        Err(parse_err())
    }
}

impl Serialize for WeightSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WeightSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
