//! Peak detection on sampled curves.
//!
//! Local maxima are screened by topographic prominence (default threshold 1%
//! of the global maximum) and refined by quadratic interpolation through the
//! three samples around each maximum. A curvature-based fallback finds
//! shoulder positions (local maxima of −d²y/dx²) for spectra whose sidebands
//! have not yet separated into distinct maxima.

use crate::float::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T: Real> {
    /// Interpolated position of the maximum.
    pub position: T,
    /// Interpolated height.
    pub height: T,
    /// Topographic prominence (height above the higher of the two valleys
    /// separating it from higher ground).
    pub prominence: T,
}

/// Local maxima of `y` over `x`, with prominence at least
/// `prominence_frac * max(y)`. `x` must be sorted ascending and uniform
/// enough for the quadratic refinement to make sense.
pub fn find_peaks<T: Real>(x: &[T], y: &[T], prominence_frac: T) -> Vec<Peak<T>> {
    assert_eq!(x.len(), y.len());
    let n = y.len();
    if n < 3 {
        return Vec::new();
    }
    let gmax = y.iter().copied().fold(T::neg_infinity(), T::max);
    let threshold = prominence_frac * gmax;
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1]) {
            continue;
        }
        // walk out to the nearest higher ground on each side, tracking the
        // lowest valley crossed; prominence is height above the higher valley
        let mut left_min = y[i];
        let mut j = i;
        while j > 0 {
            j -= 1;
            if y[j] > y[i] {
                break;
            }
            left_min = left_min.min(y[j]);
        }
        let mut right_min = y[i];
        let mut k = i;
        while k < n - 1 {
            k += 1;
            if y[k] > y[i] {
                break;
            }
            right_min = right_min.min(y[k]);
        }
        let prominence = y[i] - left_min.max(right_min);
        if prominence < threshold {
            continue;
        }
        let (pos, height) = quadratic_vertex(x, y, i);
        peaks.push(Peak { position: pos, height, prominence });
    }
    peaks
}

/// Vertex of the parabola through samples (i−1, i, i+1).
fn quadratic_vertex<T: Real>(x: &[T], y: &[T], i: usize) -> (T, T) {
    let denom = y[i - 1] - T::of(2.0) * y[i] + y[i + 1];
    if denom == T::zero() {
        return (x[i], y[i]);
    }
    let half = T::of(0.5);
    let delta = half * (y[i - 1] - y[i + 1]) / denom;
    let dx = half * (x[i + 1] - x[i - 1]);
    let pos = x[i] + delta * dx;
    let height = y[i] - T::of(0.25) * (y[i - 1] - y[i + 1]) * delta;
    (pos, height)
}

/// Spectral feature positions: distinct local maxima when present, otherwise
/// shoulder positions from the curvature (local maxima of −y''). Returns
/// positions sorted ascending, and whether the curvature fallback was used.
pub fn spectral_features<T: Real>(x: &[T], y: &[T], prominence_frac: T) -> (Vec<T>, bool) {
    let peaks = find_peaks(x, y, prominence_frac);
    if peaks.len() >= 3 {
        let mut pos: Vec<T> = peaks.iter().map(|p| p.position).collect();
        pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return (pos, false);
    }
    // curvature fallback
    let n = y.len();
    if n < 5 {
        return (peaks.iter().map(|p| p.position).collect(), false);
    }
    let mut neg_curv = vec![T::zero(); n];
    for i in 1..n - 1 {
        let h1 = x[i] - x[i - 1];
        let h2 = x[i + 1] - x[i];
        // second derivative on a (possibly slightly) non-uniform grid
        let d2 = T::of(2.0)
            * (h1 * y[i + 1] - (h1 + h2) * y[i] + h2 * y[i - 1])
            / (h1 * h2 * (h1 + h2));
        neg_curv[i] = -d2;
    }
    neg_curv[0] = neg_curv[1];
    neg_curv[n - 1] = neg_curv[n - 2];
    // shift so the prominence screen works on a non-negative curve
    let cmin = neg_curv.iter().copied().fold(T::infinity(), T::min);
    let shifted: Vec<T> = neg_curv.iter().map(|&c| c - cmin).collect();
    let curv_peaks = find_peaks(x, &shifted, T::of(0.01));
    let mut pos: Vec<T> = curv_peaks.iter().map(|p| p.position).collect();
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (pos, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::linspace;

    #[test]
    fn finds_two_gaussian_bumps() {
        let xs = linspace(-10.0f64, 10.0, 801);
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| (-(x - 3.0) * (x - 3.0)).exp() + 0.8 * (-(x + 3.0) * (x + 3.0)).exp())
            .collect();
        let peaks = find_peaks(&xs, &ys, 0.01);
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0].position + 3.0).abs() < 1e-3);
        assert!((peaks[1].position - 3.0).abs() < 1e-3);
    }

    #[test]
    fn prominence_screens_ripple() {
        let xs = linspace(0.0f64, 10.0, 1001);
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| (-(x - 5.0) * (x - 5.0)).exp() + 1e-4 * (40.0 * x).sin())
            .collect();
        let peaks = find_peaks(&xs, &ys, 0.01);
        assert_eq!(peaks.len(), 1);
    }

    #[test]
    fn quadratic_refinement_beats_grid_resolution() {
        let xs = linspace(-1.0f64, 1.0, 21); // coarse: step 0.1
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - (x - 0.03) * (x - 0.03)).collect();
        let peaks = find_peaks(&xs, &ys, 0.0);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].position - 0.03).abs() < 1e-12);
    }

    #[test]
    fn shoulders_found_by_curvature() {
        // two merged Lorentzians: no distinct maxima, but curvature shows them
        let xs = linspace(-10.0f64, 10.0, 2001);
        let lor = |x: f64, c: f64| 1.0 / ((x - c) * (x - c) + 4.0);
        let ys: Vec<f64> = xs.iter().map(|&x| lor(x, -2.0) + lor(x, 2.0) + 2.0 * lor(x, 0.0)).collect();
        assert!(find_peaks(&xs, &ys, 0.01).len() < 3);
        let (pos, fell_back) = spectral_features(&xs, &ys, 0.01);
        assert!(fell_back);
        assert!(pos.len() >= 3, "{pos:?}");
    }
}
