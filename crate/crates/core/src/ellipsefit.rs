//! Conventional gradient estimation: fit an ellipse to a window of signal
//! pairs and read the phase difference off the conic coefficients.
//!
//! The fit is the direct least-squares ellipse fit with the constraint
//! 4AC − B² = 1, solved in the reduced 3×3 form so the scatter matrix of the
//! linear terms is the only inverse needed.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::gradiometer::{GradiometerConfig, PairSample};

/// A x² + B xy + C y² + D x + E y + F = 0, scaled so 4AC − B² = 1 and A > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConicCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl ConicCoefficients {
    pub fn discriminant(&self) -> f64 {
        4.0 * self.a * self.c - self.b * self.b
    }

    /// Algebraic residual at a point.
    pub fn residual(&self, x: f64, y: f64) -> f64 {
        self.a * x * x + self.b * x * y + self.c * y * y + self.d * x + self.e * y + self.f
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            a: self.a * k,
            b: self.b * k,
            c: self.c * k,
            d: self.d * k,
            e: self.e * k,
            f: self.f * k,
        }
    }
}

/// Smallest reciprocal condition number accepted for the linear scatter matrix.
pub const CONDITION_THRESHOLD: f64 = 1e-10;

/// Fits an ellipse to the valid samples.
pub fn fit_conic(samples: &[PairSample]) -> Result<ConicCoefficients> {
    let pts: Vec<(f64, f64)> = samples.iter().filter(|s| s.valid).map(|s| (s.s0_norm, s.s1_norm)).collect();
    fit_conic_xy(&pts)
}

pub fn fit_conic_xy(points: &[(f64, f64)]) -> Result<ConicCoefficients> {
    if points.len() < 6 {
        return Err(Error::DegenerateFit(format!("need at least 6 samples, got {}", points.len())));
    }
    let mut s1 = Matrix3::zeros();
    let mut s2 = Matrix3::zeros();
    let mut s3 = Matrix3::zeros();
    for &(x, y) in points {
        let q = Vector3::new(x * x, x * y, y * y);
        let l = Vector3::new(x, y, 1.0);
        s1 += q * q.transpose();
        s2 += q * l.transpose();
        s3 += l * l.transpose();
    }
    let eig = s3.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if !(hi > 0.0) || lo / hi < CONDITION_THRESHOLD {
        return Err(Error::DegenerateFit("samples are collinear".into()));
    }
    let s3_inv = s3
        .try_inverse()
        .ok_or_else(|| Error::DegenerateFit("singular linear scatter matrix".into()))?;
    let t = -s3_inv * s2.transpose();
    let m = s1 + s2 * t;
    // Premultiply by the inverse of the constraint matrix [[0,0,2],[0,-1,0],[2,0,0]].
    let m = Matrix3::new(
        m[(2, 0)] / 2.0,
        m[(2, 1)] / 2.0,
        m[(2, 2)] / 2.0,
        -m[(1, 0)],
        -m[(1, 1)],
        -m[(1, 2)],
        m[(0, 0)] / 2.0,
        m[(0, 1)] / 2.0,
        m[(0, 2)] / 2.0,
    );
    let scale = m.abs().max();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::DegenerateFit("degenerate scatter".into()));
    }
    let eigenvalues = m
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::DegenerateFit("complex eigenvalues in constrained system".into()))?;

    let mut best: Option<Vector3<f64>> = None;
    for &lambda in eigenvalues.iter() {
        let Some(v) = null_vector(&(m - Matrix3::identity() * lambda)) else {
            continue;
        };
        let disc = 4.0 * v.x * v.z - v.y * v.y;
        if disc > 0.0 {
            let v = v / disc.sqrt();
            // Of several admissible vectors keep the one with smallest algebraic error.
            let better = match best {
                Some(b) => (v.transpose() * s1 * v)[0] < (b.transpose() * s1 * b)[0],
                None => true,
            };
            if better {
                best = Some(v);
            }
        }
    }
    let a1 = best.ok_or_else(|| Error::DegenerateFit("no ellipse-admissible solution".into()))?;
    let a2 = t * a1;
    let mut conic = ConicCoefficients {
        a: a1.x,
        b: a1.y,
        c: a1.z,
        d: a2.x,
        e: a2.y,
        f: a2.z,
    };
    let disc = conic.discriminant();
    if !(disc > CONDITION_THRESHOLD) {
        return Err(Error::DegenerateFit(format!("ill-conditioned ellipse (4AC - B^2 = {disc:e})")));
    }
    conic = conic.scaled(1.0 / disc.sqrt());
    if conic.a < 0.0 {
        conic = conic.scaled(-1.0);
    }
    Ok(conic)
}

/// Unit null vector of a rank-deficient 3×3 matrix from the best-conditioned
/// cross product of its rows.
fn null_vector(m: &Matrix3<f64>) -> Option<Vector3<f64>> {
    let r0 = m.row(0).transpose();
    let r1 = m.row(1).transpose();
    let r2 = m.row(2).transpose();
    let candidates = [r0.cross(&r1), r0.cross(&r2), r1.cross(&r2)];
    let v = candidates.iter().max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))?;
    let n = v.norm();
    (n > 0.0 && n.is_finite()).then(|| v / n)
}

/// Phase difference in [0, π] of the fitted ellipse.
pub fn phase_from_conic(c: &ConicCoefficients) -> Result<f64> {
    let disc = c.discriminant();
    if !(disc > 0.0) || !(c.a * c.c > 0.0) {
        return Err(Error::NotAnEllipse { discriminant: disc });
    }
    // Same angle as acos(-B / 2√(AC)), without its loss of precision near 0 and π.
    let sign = c.a.signum();
    Ok((disc.sqrt()).atan2(-c.b * sign))
}

/// One window of the sliding estimator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowEstimate {
    /// Timestamp of the first sample in the window.
    pub t_start: f64,
    /// Timestamp of the last sample; estimates are reported at this time.
    pub t_end: f64,
    /// `None` when the window could not be fitted.
    pub gradient: Option<f64>,
}

impl WindowEstimate {
    pub fn t_mid(&self) -> f64 {
        0.5 * (self.t_start + self.t_end)
    }
}

/// Non-overlapping windows of `window` valid samples, each inverted to a gradient.
pub fn sliding_gradient_estimate(samples: &[PairSample], window: usize, config: &GradiometerConfig) -> Vec<WindowEstimate> {
    let valid: Vec<&PairSample> = samples.iter().filter(|s| s.valid).collect();
    if window == 0 {
        return Vec::new();
    }
    valid
        .chunks_exact(window)
        .map(|w| {
            let pts: Vec<(f64, f64)> = w.iter().map(|s| (s.s0_norm, s.s1_norm)).collect();
            let gradient = fit_conic_xy(&pts)
                .and_then(|c| phase_from_conic(&c))
                .ok()
                .map(|dphi| config.delta_phi_to_gradient(dphi));
            WindowEstimate {
                t_start: w[0].timestamp,
                t_end: w[w.len() - 1].timestamp,
                gradient,
            }
        })
        .collect()
}

/// Streaming form of [`sliding_gradient_estimate`].
#[derive(Clone, Debug)]
pub struct SlidingEllipseFit {
    window: usize,
    buffer: Vec<PairSample>,
}

impl SlidingEllipseFit {
    pub fn new(window: usize) -> Self {
        Self {
            window: window.max(1),
            buffer: Vec::with_capacity(window),
        }
    }

    /// Adds a sample; returns an estimate when a window completes.
    pub fn push(&mut self, sample: PairSample, config: &GradiometerConfig) -> Option<WindowEstimate> {
        if !sample.valid {
            return None;
        }
        self.buffer.push(sample);
        if self.buffer.len() < self.window {
            return None;
        }
        let out = sliding_gradient_estimate(&self.buffer, self.window, config).pop();
        self.buffer.clear();
        out
    }
}
