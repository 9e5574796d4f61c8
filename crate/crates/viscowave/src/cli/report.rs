//! Report assembly: CSV emission (comma-separated, '.' decimal, header row,
//! 17 significant digits), estimated orders of convergence, and peak
//! detection for the damping diagnostics.

use crate::Result;
use std::path::Path;

/// Format with 17 significant digits so the value round-trips exactly.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write CSV text to `dir/name`, creating the directory if needed.
pub fn write_csv(dir: &Path, name: &str, content: &str) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    Ok(path)
}

/// EOC between consecutive rows under parameter halving.
pub fn eoc(coarser_error: f64, finer_error: f64) -> f64 {
    (coarser_error / finer_error).log2()
}

/// Strict interior local maxima of a sampled series, as (index, value).
pub fn find_peaks(series: &[f64]) -> Vec<(usize, f64)> {
    let mut peaks = Vec::new();
    for i in 1..series.len().saturating_sub(1) {
        if series[i] > series[i - 1] && series[i] > series[i + 1] {
            peaks.push((i, series[i]));
        }
    }
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_round_trips() {
        for &x in &[0.1, -3.75e-11, std::f64::consts::PI, 1.0 / 3.0] {
            let s = fmt_g17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s} did not round trip");
        }
    }

    #[test]
    fn eoc_of_exact_halving() {
        assert!((eoc(4.0, 1.0) - 2.0).abs() < 1e-15);
        assert!((eoc(2.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn peaks_of_decaying_oscillation() {
        let series: Vec<f64> = (0..400)
            .map(|i| {
                let t = i as f64 * 0.05;
                (-0.2 * t).exp() * (2.0 * t).sin()
            })
            .collect();
        let peaks = find_peaks(&series);
        assert!(peaks.len() >= 5);
        for w in peaks.windows(2) {
            assert!(w[1].1 < w[0].1, "decaying signal must have decreasing peaks");
        }
    }
}
