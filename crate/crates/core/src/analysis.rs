//! Signal analysis used to read frequencies and extrema off trajectories.

use nalgebra::{Matrix3, Vector3};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of `f` on `[lo, hi]`.
pub fn golden_min(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Maximum of `f` on `[lo, hi]`: dense scan followed by golden-section
/// refinement between the neighbours of the best sample.
pub fn maximize(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, samples: usize) -> (f64, f64) {
    let samples = samples.max(3);
    let step = (hi - lo) / (samples - 1) as f64;
    let (mut best_i, mut best) = (0usize, f64::NEG_INFINITY);
    for i in 0..samples {
        let v = f(lo + step * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    let x = golden_min(|x| -f(x), a, b, 200);
    let v = f(x);
    if v >= best {
        (x, v)
    } else {
        (lo + step * best_i as f64, best)
    }
}

/// Least-squares fit `offset + amplitude * cos(omega t + phase)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillationFit {
    pub omega: f64,
    pub offset: f64,
    pub amplitude: f64,
    pub rms_residual: f64,
}

fn residual_at(times: &[f64], values: &[f64], omega: f64) -> (f64, Vector3<f64>) {
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for (&t, &y) in times.iter().zip(values) {
        let row = Vector3::new(1.0, (omega * t).cos(), (omega * t).sin());
        ata += row * row.transpose();
        atb += row * y;
    }
    let coef = ata.lu().solve(&atb).unwrap_or_else(Vector3::zeros);
    let ss = times
        .iter()
        .zip(values)
        .map(|(&t, &y)| {
            let m = coef[0] + coef[1] * (omega * t).cos() + coef[2] * (omega * t).sin();
            (y - m) * (y - m)
        })
        .sum();
    (ss, coef)
}

/// Dominant angular frequency of `values(times)` inside `[omega_lo, omega_hi]`.
///
/// The residual of the linear sinusoid fit is scanned on a grid finer than
/// the Fourier resolution of the window, then refined by golden section.
/// Fast components outside the band average out of the fit.
pub fn fit_oscillation(times: &[f64], values: &[f64], omega_lo: f64, omega_hi: f64) -> OscillationFit {
    assert_eq!(times.len(), values.len());
    assert!(times.len() >= 4, "need at least four samples");
    let span = times[times.len() - 1] - times[0];
    let step = std::f64::consts::TAU / span / 16.0;
    let count = (((omega_hi - omega_lo) / step).ceil() as usize).max(64);
    let grid_step = (omega_hi - omega_lo) / count as f64;
    let mut best = (f64::INFINITY, omega_lo);
    for i in 0..=count {
        let w = omega_lo + grid_step * i as f64;
        if w <= 0.0 {
            continue;
        }
        let (ss, _) = residual_at(times, values, w);
        if ss < best.0 {
            best = (ss, w);
        }
    }
    let a = (best.1 - grid_step).max(omega_lo.max(f64::MIN_POSITIVE));
    let b = (best.1 + grid_step).min(omega_hi);
    let omega = golden_min(|w| residual_at(times, values, w).0, a, b, 200);
    let (ss, coef) = residual_at(times, values, omega);
    OscillationFit {
        omega,
        offset: coef[0],
        amplitude: coef[1].hypot(coef[2]),
        rms_residual: (ss / times.len() as f64).sqrt(),
    }
}

/// Slope and coefficient of determination of `y = slope * x`.
///
/// R^2 uses the centered total sum of squares, which is the stricter choice.
pub fn fit_through_origin(x: &[f64], y: &[f64]) -> (f64, f64) {
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let slope = sxy / sxx;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - mean).powi(2)).sum();
    (slope, 1.0 - ss_res / ss_tot)
}

/// Ordinary least-squares `(slope, intercept)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Evenly spaced grid with `count` points including both ends.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}
