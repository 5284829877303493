//! Minkowski-form distances between normalized opcode histograms.
//!
//! Only identical bins are compared: the distance is a sum over the union
//! of mnemonics of `|x_i - y_i|^r`, with missing bins read as zero. The
//! r-th root is not taken unless [`MetricConfig::apply_root`] is set, so
//! the Euclidean form is the plain sum of squared differences by default.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::OpcodeHistogram;
use crate::numeric::NeumaierSum;

/// Default Manhattan threshold below which two programs count as variants.
pub const MANHATTAN_THRESHOLD: f64 = 0.832;
/// Default threshold for the (unrooted) Euclidean form.
pub const EUCLIDEAN_THRESHOLD: f64 = 0.186;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricConfig {
    order: u32,
    pub apply_root: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistanceError {
    #[error("histogram of `{program_id}`/`{subroutine}` is not normalized")]
    NonNormalizedInput {
        program_id: String,
        subroutine: String,
    },
    #[error("Minkowski order must be at least 1")]
    InvalidOrder,
    #[error("unknown metric `{0}` (expected manhattan, euclidean or minkowski:<r>)")]
    UnknownMetric(String),
}

impl MetricConfig {
    pub fn minkowski(order: u32) -> Result<Self, DistanceError> {
        if order == 0 {
            return Err(DistanceError::InvalidOrder);
        }
        Ok(MetricConfig {
            order,
            apply_root: false,
        })
    }

    pub const fn manhattan() -> Self {
        MetricConfig {
            order: 1,
            apply_root: false,
        }
    }

    pub const fn euclidean() -> Self {
        MetricConfig {
            order: 2,
            apply_root: false,
        }
    }

    pub const fn with_root(mut self, apply_root: bool) -> Self {
        self.apply_root = apply_root;
        self
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Threshold shipped for this metric, if there is one. Thresholds are
    /// tied to a particular mutation engine; these are starting points.
    pub fn default_threshold(&self) -> Option<f64> {
        match self.order {
            1 => Some(MANHATTAN_THRESHOLD),
            2 => Some(EUCLIDEAN_THRESHOLD),
            _ => None,
        }
    }
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig::manhattan()
    }
}

impl fmt::Display for MetricConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut label = match self.order {
            1 => "manhattan".to_string(),
            2 => "euclidean".to_string(),
            r => format!("minkowski:{r}"),
        };
        // A root is the identity for r = 1.
        if self.apply_root && self.order > 1 {
            label.push_str("+root");
        }
        f.pad(&label)
    }
}

impl FromStr for MetricConfig {
    type Err = DistanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, root) = match s.strip_suffix("+root") {
            Some(name) => (name, true),
            None => (s, false),
        };
        let cfg = match name.to_ascii_lowercase().as_str() {
            "manhattan" => MetricConfig::manhattan(),
            "euclidean" => MetricConfig::euclidean(),
            other => {
                let r = other
                    .strip_prefix("minkowski:")
                    .and_then(|r| r.parse::<u32>().ok())
                    .ok_or_else(|| DistanceError::UnknownMetric(s.to_string()))?;
                MetricConfig::minkowski(r)?
            }
        };
        Ok(cfg.with_root(root))
    }
}

fn ensure_normalized(h: &OpcodeHistogram) -> Result<(), DistanceError> {
    if h.is_normalized() {
        Ok(())
    } else {
        Err(DistanceError::NonNormalizedInput {
            program_id: h.source.program_id.clone(),
            subroutine: h.source.subroutine.clone(),
        })
    }
}

/// Sum of `|x_i - y_i|^r` over the sorted union of bins, optionally
/// followed by the r-th root.
pub fn minkowski_distance(
    x: &OpcodeHistogram,
    y: &OpcodeHistogram,
    cfg: &MetricConfig,
) -> Result<f64, DistanceError> {
    ensure_normalized(x)?;
    ensure_normalized(y)?;
    Ok(minkowski_unchecked(x, y, cfg))
}

pub(crate) fn minkowski_unchecked(x: &OpcodeHistogram, y: &OpcodeHistogram, cfg: &MetricConfig) -> f64 {
    let r = cfg.order as i32;
    let mut acc = NeumaierSum::default();
    let mut term = |a: f64, b: f64| {
        // `(a - b).abs()` and `(b - a).abs()` are bit-identical, so the sum
        // is exactly symmetric.
        let d = (a - b).abs();
        acc.add(if r == 1 { d } else { d.powi(r) });
    };

    let mut xs = x.bin_map().iter().peekable();
    let mut ys = y.bin_map().iter().peekable();
    loop {
        match (xs.peek(), ys.peek()) {
            (Some((kx, vx)), Some((ky, vy))) => match kx.cmp(ky) {
                Ordering::Less => {
                    term(**vx, 0.0);
                    xs.next();
                }
                Ordering::Greater => {
                    term(0.0, **vy);
                    ys.next();
                }
                Ordering::Equal => {
                    term(**vx, **vy);
                    xs.next();
                    ys.next();
                }
            },
            (Some((_, vx)), None) => {
                term(**vx, 0.0);
                xs.next();
            }
            (None, Some((_, vy))) => {
                term(0.0, **vy);
                ys.next();
            }
            (None, None) => break,
        }
    }

    let sum = acc.value().max(0.0);
    if cfg.apply_root && r > 1 {
        sum.powf(1.0 / r as f64)
    } else {
        sum
    }
}

/// Minkowski distance with r = 1.
pub fn manhattan(x: &OpcodeHistogram, y: &OpcodeHistogram) -> Result<f64, DistanceError> {
    minkowski_distance(x, y, &MetricConfig::manhattan())
}

/// Minkowski distance with r = 2, rooted or not.
pub fn euclidean(
    x: &OpcodeHistogram,
    y: &OpcodeHistogram,
    apply_root: bool,
) -> Result<f64, DistanceError> {
    minkowski_distance(x, y, &MetricConfig::euclidean().with_root(apply_root))
}
