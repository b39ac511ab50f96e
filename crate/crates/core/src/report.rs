// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! Shared output formatting.

/// 17 significant digits in scientific notation; round-trips any `f64`.
/// Negative zero prints as `0`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        "0.0000000000000000e0".to_string()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Least-squares slope of `ln y` against `ln x`. Pairs with a nonpositive
/// coordinate are skipped; `None` if fewer than two remain.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1e-2, 5e-3, 2.5e-3];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&xs, &[0.0; 3]), None);
    }
}
