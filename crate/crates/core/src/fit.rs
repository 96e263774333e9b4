//! Least-squares fit of y = mean − amplitude · cos(2πx/period + phase).
//!
//! Gauss–Newton with a central-difference Jacobian (relative step 1e-6) and
//! step halving. The linear sub-problem at the expected period seeds the
//! iteration. x is centered internally so phase and period decouple.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scan::Curve;

const MAX_ITERATIONS: usize = 200;
const JACOBIAN_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub mean_level: f64,
    pub amplitude: f64,
    pub period: f64,
    pub phase_offset: f64,
    pub visibility: f64,
    pub rms_residual: f64,
}

impl FringeFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.mean_level - self.amplitude * (TAU * x / self.period + self.phase_offset).cos()
    }
}

// p = [mean, amplitude, period, phase]
fn model(p: &Vector4<f64>, x: f64) -> f64 {
    p[0] - p[1] * (TAU * x / p[2] + p[3]).cos()
}

fn cost(p: &Vector4<f64>, xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(&x, &y)| (model(p, x) - y).powi(2)).sum()
}

fn wrap_phase(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

fn initial_guess(xs: &[f64], ys: &[f64], period: f64) -> Vector4<f64> {
    // y ≈ c0 + c1 cos kx + c2 sin kx
    let k = TAU / period;
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut aty = nalgebra::Vector3::<f64>::zeros();
    for (&x, &y) in xs.iter().zip(ys) {
        let row = nalgebra::Vector3::new(1.0, (k * x).cos(), (k * x).sin());
        ata += row * row.transpose();
        aty += row * y;
    }
    let c = ata.lu().solve(&aty).unwrap_or_else(nalgebra::Vector3::zeros);
    Vector4::new(c[0], c[1].hypot(c[2]), period, c[2].atan2(-c[1]))
}

fn finish(p: &Vector4<f64>, center: f64, sse: f64, n: usize) -> FringeFit {
    let (mut amplitude, mut phase) = (p[1], p[3]);
    if amplitude < 0.0 {
        amplitude = -amplitude;
        phase += PI;
    }
    let period = p[2];
    let phase_offset = wrap_phase(phase - TAU * center / period);
    let visibility = if p[0] > 0.0 { (amplitude / p[0]).min(1.0) } else { 0.0 };
    FringeFit {
        mean_level: p[0],
        amplitude,
        period,
        phase_offset,
        visibility,
        rms_residual: (sse / n as f64).sqrt(),
    }
}

pub fn fit_fringe(curve: &Curve, expected_period: f64) -> Result<FringeFit> {
    if !(expected_period > 0.0) || !expected_period.is_finite() {
        return Err(Error::InvalidArgument(format!("expected period must be > 0, got {expected_period}")));
    }
    let n = curve.points.len();
    if n < 8 {
        return Err(Error::InvalidArgument(format!("fringe fit needs at least 8 points, got {n}")));
    }
    let first = curve.points[0].0;
    let last = curve.points[n - 1].0;
    let spacing = (last - first) / (n - 1) as f64;
    if !(spacing > 0.0) || spacing > expected_period / 8.0 * (1.0 + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "need >= 8 points per period {expected_period}; mean spacing is {spacing}"
        )));
    }
    let center = 0.5 * (first + last);
    let xs: Vec<f64> = curve.xs().map(|x| x - center).collect();
    let ys: Vec<f64> = curve.ys().collect();

    let mut p = initial_guess(&xs, &ys, expected_period);
    let mut sse = cost(&p, &xs, &ys);
    let scale = ys.iter().map(|y| y * y).sum::<f64>().max(f64::MIN_POSITIVE);

    for iteration in 0..MAX_ITERATIONS {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        let steps: [f64; 4] = std::array::from_fn(|j| JACOBIAN_STEP * p[j].abs().max(1.0));
        for (&x, &y) in xs.iter().zip(&ys) {
            let r = model(&p, x) - y;
            let mut grad = Vector4::<f64>::zeros();
            for j in 0..4 {
                let mut hi = p;
                let mut lo = p;
                hi[j] += steps[j];
                lo[j] -= steps[j];
                grad[j] = (model(&hi, x) - model(&lo, x)) / (2.0 * steps[j]);
            }
            jtj += grad * grad.transpose();
            jtr += grad * r;
        }
        let Some(delta) = jtj.lu().solve(&(-jtr)) else {
            return Err(Error::FitFailed { iterations: iteration, best: Box::new(finish(&p, center, sse, n)) });
        };

        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda > 1e-10 {
            let trial = p + delta * lambda;
            if trial[2] > 0.0 {
                let c = cost(&trial, &xs, &ys);
                if c <= sse {
                    accepted = Some((trial, c));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let converged_step = delta.iter().zip(p.iter()).all(|(d, v)| d.abs() <= 1e-12 * v.abs().max(1.0));
        match accepted {
            Some((trial, c)) => {
                let improvement = sse - c;
                p = trial;
                sse = c;
                if converged_step || improvement <= 1e-12 * sse + 1e-30 * scale {
                    return Ok(finish(&p, center, sse, n));
                }
            }
            None => {
                // No descent along the Gauss–Newton direction: p is a minimum to
                // working precision.
                return Ok(finish(&p, center, sse, n));
            }
        }
    }
    Err(Error::FitFailed { iterations: MAX_ITERATIONS, best: Box::new(finish(&p, center, sse, n)) })
}
