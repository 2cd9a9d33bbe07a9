use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZneMethod {
    /// Least-squares fit `a + b x + c x^2`.
    #[default]
    Quadratic,
    /// Interpolating polynomial through every point, evaluated at zero.
    Richardson,
}

/// A measured value at one noise scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZnePoint {
    pub requested: f64,
    pub achieved: f64,
    pub mean: f64,
    pub std_err: f64,
}

impl ZnePoint {
    pub fn new(scale: f64, mean: f64, std_err: f64) -> Self {
        Self {
            requested: scale,
            achieved: scale,
            mean,
            std_err,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZneResult {
    pub method: ZneMethod,
    /// Value extrapolated to zero noise.
    pub estimate: f64,
    pub std_err: f64,
    /// Polynomial coefficients, constant term first.
    pub coefficients: Vec<f64>,
    /// True when the estimate was moved into `[0, 1]`.
    pub clamped: bool,
    nodes: Vec<(f64, f64)>,
}

impl ZneResult {
    /// The fitted curve at scale `x`.
    pub fn evaluate(&self, x: f64) -> f64 {
        match self.method {
            ZneMethod::Quadratic => self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c),
            ZneMethod::Richardson => lagrange_weights(&self.nodes, x)
                .iter()
                .zip(&self.nodes)
                .map(|(w, (_, y))| w * y)
                .sum(),
        }
    }
}

fn lagrange_weights(nodes: &[(f64, f64)], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &(xj, _))| (x - xj) / (nodes[i].0 - xj))
                .product()
        })
        .collect()
}

fn distinct_scales(points: &[ZnePoint]) -> usize {
    let mut xs: Vec<f64> = points.iter().map(|p| p.achieved).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.len()
}

/// Extrapolates `points` to zero noise. With `probability` set the estimate
/// is clamped to `[0, 1]` and the clamp is flagged.
pub fn zne(points: &[ZnePoint], method: ZneMethod, probability: bool) -> Result<ZneResult> {
    if let Some(p) = points.iter().find(|p| !(p.achieved >= 1.0) || !p.mean.is_finite()) {
        return Err(Error::InvalidScale(p.achieved));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.achieved.total_cmp(&b.achieved));
    let mut result = match method {
        ZneMethod::Quadratic => quadratic(&pts)?,
        ZneMethod::Richardson => richardson(&pts)?,
    };
    if probability && !(0.0..=1.0).contains(&result.estimate) {
        result.estimate = result.estimate.clamp(0.0, 1.0);
        result.clamped = true;
    }
    Ok(result)
}

fn quadratic(pts: &[ZnePoint]) -> Result<ZneResult> {
    if pts.len() < 3 || distinct_scales(pts) < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: distinct_scales(pts),
        });
    }
    let n = pts.len();
    let x = DMatrix::from_fn(n, 3, |i, j| pts[i].achieved.powi(j as i32));
    let y = DVector::from_iterator(n, pts.iter().map(|p| p.mean));
    let xtx_inv = (x.transpose() * &x)
        .try_inverse()
        .ok_or(Error::InsufficientPoints { needed: 3, got: n })?;
    // row 0 of the pseudo-inverse gives the intercept as a linear combination
    let pinv = &xtx_inv * x.transpose();
    let coef = &pinv * &y;
    let std_err = if n > 3 {
        let rss = (&y - &x * &coef).norm_squared();
        (rss / (n - 3) as f64 * xtx_inv[(0, 0)]).sqrt()
    } else {
        propagated(pinv.row(0).iter().copied(), pts)
    };
    Ok(ZneResult {
        method: ZneMethod::Quadratic,
        estimate: coef[0],
        std_err,
        coefficients: coef.iter().copied().collect(),
        clamped: false,
        nodes: Vec::new(),
    })
}

fn propagated(weights: impl Iterator<Item = f64>, pts: &[ZnePoint]) -> f64 {
    weights
        .zip(pts)
        .map(|(w, p)| (w * p.std_err).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn richardson(pts: &[ZnePoint]) -> Result<ZneResult> {
    if distinct_scales(pts) != pts.len() || pts.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            got: distinct_scales(pts),
        });
    }
    let nodes: Vec<(f64, f64)> = pts.iter().map(|p| (p.achieved, p.mean)).collect();
    let w = lagrange_weights(&nodes, 0.0);
    let estimate = w.iter().zip(&nodes).map(|(w, (_, y))| w * y).sum();
    let std_err = propagated(w.iter().copied(), pts);
    let k = nodes.len();
    let vander = DMatrix::from_fn(k, k, |i, j| nodes[i].0.powi(j as i32));
    let ys = DVector::from_iterator(k, nodes.iter().map(|n| n.1));
    let coefficients = vander
        .lu()
        .solve(&ys)
        .map(|c| c.iter().copied().collect())
        .unwrap_or_default();
    Ok(ZneResult {
        method: ZneMethod::Richardson,
        estimate,
        std_err,
        coefficients,
        clamped: false,
        nodes,
    })
}
