//! Evaluation grids.

// Redundant when std is linked (dev builds); required for the no_std build.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;


/// `n` points spaced uniformly on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    assert!(lo.is_finite() && hi.is_finite() && lo <= hi);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
}

/// `n` points spaced geometrically on `[lo, hi]`, endpoints included.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo, "geomspace needs 0 < lo <= hi");
    linspace(lo.ln(), hi.ln(), n).into_iter().map(|t| t.exp()).collect()
}

/// Geometric grid on `[lo, hi]` mirrored through the origin, ascending:
/// `-hi, ..., -lo, lo, ..., hi`.
pub fn symmetric_geomspace(lo: f64, hi: f64, n_per_side: usize) -> Vec<f64> {
    let pos = geomspace(lo, hi, n_per_side);
    let mut out: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    out.extend(pos);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints_and_spacing() {
        let g = linspace(1.0, 3.0, 5);
        assert_eq!(g, alloc::vec![1.0, 1.5, 2.0, 2.5, 3.0]);
    }

    #[test]
    fn geomspace_hits_decades() {
        let g = geomspace(1.0, 1e4, 5);
        for (got, want) in g.iter().zip([1.0, 10.0, 100.0, 1000.0, 10000.0]) {
            assert!((got / want - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_grid_is_ascending_and_even() {
        let g = symmetric_geomspace(1.0, 100.0, 3);
        assert_eq!(g.len(), 6);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!((g[0] + 100.0).abs() < 1e-12 * 100.0);
        assert!((g[5] - 100.0).abs() < 1e-12 * 100.0);
    }
}
