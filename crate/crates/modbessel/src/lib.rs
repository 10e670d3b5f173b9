//! Modified Bessel functions of the first kind by direct power series.
//!
//! The series
//!
//! ```text
//! I_n(x) = sum_{j>=0} (x/2)^(n+2j) / (j! (n+j)!)
//! ```
//!
//! converges for every x and is numerically benign for moderate |x| (all
//! terms positive, ratio test gives geometric tail decay once
//! 2j > |x|). This crate targets the range |x| <= 30 and integer orders,
//! where the straight series is accurate to near machine precision; it
//! deliberately avoids asymptotic or rational approximations so it can
//! serve as an independent reference for other numerical code.

/// Evaluates `I_n(x)` for integer order `n >= 0`.
///
/// Accuracy is ~1 ulp relative for `|x| <= 30`. Panics in debug builds
/// for non-finite input.
pub fn bessel_i(n: u32, x: f64) -> f64 {
    debug_assert!(x.is_finite());
    let half = 0.5 * x;
    // leading term (x/2)^n / n!, built incrementally to dodge overflow
    // of the separate factors for large n
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    series_from(term, n, x)
}

/// Evaluates the normalized form `n! (2/x)^n I_n(x)`.
///
/// Equivalent to the confluent limit 0F1(; n+1; x^2/4). The
/// normalization removes the `(x/2)^n / n!` prefactor, so the value is
/// O(1) for every order and never under- or overflows; it is the
/// natural scale when comparing solutions of singular ODEs whose
/// leading behaviour is `x^n`.
pub fn bessel_i_normalized(n: u32, x: f64) -> f64 {
    debug_assert!(x.is_finite());
    series_from(1.0, n, x)
}

// Sums term * [1 + q/(1(n+1)) + q^2/(2!(n+1)(n+2)) + ...] with q = x^2/4.
fn series_from(leading: f64, n: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = leading;
    let mut sum = term;
    for j in 1..400u32 {
        term *= q / (j as f64 * (n + j) as f64);
        sum += term;
        if term <= f64::EPSILON * sum.abs() * 1e-2 {
            break;
        }
    }
    sum
}
