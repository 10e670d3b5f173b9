//! Chebyshev collocation helpers: Lobatto grids, barycentric
//! interpolation, and differentiation matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Chebyshev-Lobatto nodes mapped to [0, 1], ascending (s_0 = 0,
/// s_n = 1). `n` is the number of intervals; returns n+1 nodes.
pub fn lobatto01(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    (0..=n)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / n as f64).cos()))
        .collect()
}

/// Barycentric weights for the Lobatto family (up to a common factor):
/// (-1)^i, halved at both endpoints. Valid for either node ordering.
pub fn lobatto_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            if i == 0 || i == n {
                0.5 * s
            } else {
                s
            }
        })
        .collect()
}

/// Barycentric interpolation of (nodes, values) at `x`; exact when `x`
/// hits a node.
pub fn bary_eval(nodes: &[f64], weights: &[f64], values: &[f64], x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&xi, &wi), &vi) in nodes.iter().zip(weights).zip(values) {
        let d = x - xi;
        if d == 0.0 {
            return vi;
        }
        let c = wi / d;
        num += c * vi;
        den += c;
    }
    num / den
}

/// Differentiation matrix for arbitrary distinct nodes given their
/// barycentric weights; diagonal entries from the negative row-sum
/// identity (exact differentiation of constants).
pub fn diff_matrix(nodes: &[f64], weights: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = (weights[j] / weights[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    d
}

/// Full Chebyshev grid cos(j pi / n_cheb), j = 0..=n_cheb, descending
/// from 1 to -1. With odd `n_cheb` the grid avoids zero and splits into
/// (+, -) pairs, which is what the disk discretization folds.
pub fn chebyshev_full(n_cheb: usize) -> Vec<f64> {
    (0..=n_cheb)
        .map(|j| (std::f64::consts::PI * j as f64 / n_cheb as f64).cos())
        .collect()
}

/// Validates monotone [0,1] coverage for interpolation queries.
pub fn check_unit_range(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("argument {x} outside [0, 1]")));
    }
    Ok(())
}
