//! Fourier collocation helpers on the uniform periodic grid
//! theta_j = 2 pi j / n.

use nalgebra::DMatrix;
use rustfft::{num_complex::Complex, FftPlanner};

/// Uniform angular nodes on [0, 2 pi).
pub fn theta_nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n as f64)
        .collect()
}

/// First-derivative spectral differentiation matrix for even `n`
/// (cotangent kernel).
pub fn periodic_d1(n: usize) -> DMatrix<f64> {
    assert!(n.is_multiple_of(2), "periodic grid size must be even");
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let k = i as isize - j as isize;
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = 0.5 * sign / (0.5 * h * k as f64).tan();
            }
        }
    }
    d
}

/// Second-derivative spectral differentiation matrix for even `n`.
pub fn periodic_d2(n: usize) -> DMatrix<f64> {
    assert!(n.is_multiple_of(2), "periodic grid size must be even");
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let pi = std::f64::consts::PI;
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                d[(i, j)] = -pi * pi / (3.0 * h * h) - 1.0 / 6.0;
            } else {
                let k = i as isize - j as isize;
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let s = (0.5 * h * k as f64).sin();
                d[(i, j)] = -0.5 * sign / (s * s);
            }
        }
    }
    d
}

/// Harmonic content of real periodic samples:
/// u(theta) = cos_c[0] + sum_m cos_c[m] cos(m theta) + sin_c[m] sin(m theta),
/// with m up to n/2 (the Nyquist cosine carries no sine partner).
#[derive(Clone, Debug)]
pub struct Harmonics {
    pub cos_c: Vec<f64>,
    pub sin_c: Vec<f64>,
}

impl Harmonics {
    pub fn max_mode(&self) -> usize {
        self.cos_c.len() - 1
    }

    pub fn cos(&self, m: usize) -> f64 {
        self.cos_c.get(m).copied().unwrap_or(0.0)
    }

    pub fn sin(&self, m: usize) -> f64 {
        self.sin_c.get(m).copied().unwrap_or(0.0)
    }
}

/// Forward analysis of real samples on the uniform grid.
pub fn analyze(samples: &[f64]) -> Harmonics {
    let n = samples.len();
    assert!(n.is_multiple_of(2) && n >= 4);
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let scale = 1.0 / n as f64;
    let mut cos_c = vec![0.0; half + 1];
    let mut sin_c = vec![0.0; half + 1];
    cos_c[0] = buf[0].re * scale;
    for m in 1..half {
        cos_c[m] = 2.0 * buf[m].re * scale;
        sin_c[m] = -2.0 * buf[m].im * scale;
    }
    cos_c[half] = buf[half].re * scale;
    Harmonics { cos_c, sin_c }
}

/// Spectral derivative of real periodic samples (Nyquist mode dropped,
/// the standard convention for odd derivatives).
pub fn derivative(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    assert!(n.is_multiple_of(2) && n >= 4);
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    for (m, v) in buf.iter_mut().enumerate() {
        let k = if m < half {
            m as f64
        } else if m == half {
            0.0
        } else {
            m as f64 - n as f64
        };
        *v *= Complex::new(0.0, k);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}
