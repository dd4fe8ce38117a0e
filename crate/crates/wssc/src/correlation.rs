//! Segment correlation kernels: two-way least-squares translation
//! coefficients, the unsigned geometric-mean index built from them, and the
//! signed Pearson index computed on standardized segments.

use crate::error::{Error, Result};
use crate::spectral::{flat_threshold, mean_and_pop_std, standardize, SegmentData};

/// Coefficients of the two least-squares translations between a library
/// segment `L` and a test segment `T`: `L = a1 + b1*T` and `T = a2 + b2*L`.
///
/// `b1` and `b2` always share the sign of the covariance, and the intercepts
/// satisfy `a1 = mean(L) - b1*mean(T)` and `a2 = mean(T) - b2*mean(L)`.
#[derive(Debug, Clone, Copy)]
pub struct RegressionFit {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

/// A segment correlation value together with its information flag.
///
/// `flat` is set when either side of the segment had no shape information
/// (numerically zero variance); the value is then 0 by convention, which
/// distinguishes "uncorrelated" from "no information".
#[derive(Debug, Clone, Copy)]
pub struct SegmentCorrelation {
    pub value: f64,
    pub flat: bool,
}

/// Centered sums of a segment: means and the deviation products
/// `sum((L-mean_l)^2)`, `sum((T-mean_t)^2)`, `sum((L-mean_l)(T-mean_t))`.
///
/// Two-pass mean-then-deviation form; the raw expanded sums are numerically
/// equivalent but cancel catastrophically on large reflectance offsets.
fn centered_sums(seg: &SegmentData) -> (f64, f64, f64, f64, f64) {
    let l = seg.lib_values();
    let t = seg.test_values();
    let mean_l = l.iter().sum::<f64>() / l.len() as f64;
    let mean_t = t.iter().sum::<f64>() / t.len() as f64;
    let (mut sll, mut stt, mut slt) = (0.0, 0.0, 0.0);
    for (&li, &ti) in l.iter().zip(t) {
        let dl = li - mean_l;
        let dt = ti - mean_t;
        sll += dl * dl;
        stt += dt * dt;
        slt += dl * dt;
    }
    (mean_l, mean_t, sll, stt, slt)
}

fn check_not_flat(values: &[f64]) -> Result<()> {
    let (_, std) = mean_and_pop_std(values);
    if std < flat_threshold(values) {
        return Err(Error::FlatSegment);
    }
    Ok(())
}

/// Fits both least-squares translations over a segment.
///
/// Fails with [`Error::FlatSegment`] when either side has no variance, since
/// the corresponding slope is undefined.
pub fn regression_coefficients(seg: &SegmentData) -> Result<RegressionFit> {
    check_not_flat(seg.lib_values())?;
    check_not_flat(seg.test_values())?;
    let (mean_l, mean_t, sll, stt, slt) = centered_sums(seg);
    let b1 = slt / stt;
    let b2 = slt / sll;
    Ok(RegressionFit {
        a1: mean_l - b1 * mean_t,
        b1,
        a2: mean_t - b2 * mean_l,
        b2,
    })
}

/// Unsigned correlation index: the geometric mean of the two regression
/// slopes, `sqrt(b1*b2)`. Equals the magnitude of [`pearson_index`], losing
/// the sign that distinguishes correlated from anti-correlated segments.
pub fn clark_index(seg: &SegmentData) -> Result<f64> {
    let fit = regression_coefficients(seg)?;
    Ok((fit.b1 * fit.b2).max(0.0).sqrt().clamp(0.0, 1.0))
}

/// Signed correlation index: both sides are standardized to mean 0 and
/// population deviation 1, and the index is their covariance
/// `(1/n) * sum(L' * T')`.
///
/// A flat side yields a flagged 0 instead of an error, so one
/// information-free segment cannot abort a whole match.
pub fn pearson_index(seg: &SegmentData) -> SegmentCorrelation {
    let l = match standardize(seg.lib_values()) {
        Ok(v) => v,
        Err(_) => return SegmentCorrelation { value: 0.0, flat: true },
    };
    let t = match standardize(seg.test_values()) {
        Ok(v) => v,
        Err(_) => return SegmentCorrelation { value: 0.0, flat: true },
    };
    let n = l.len() as f64;
    let c = l.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>() / n;
    SegmentCorrelation {
        value: c.clamp(-1.0, 1.0),
        flat: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SegmentWindow;

    fn seg(l: &[f64], t: &[f64]) -> SegmentData {
        let w = SegmentWindow::new(1000.0, 2000.0).unwrap();
        SegmentData::new(w, l.to_vec(), t.to_vec()).unwrap()
    }

    /// Independent oracle: generic least-squares line fit y = a + b*x via
    /// the textbook normal equations on raw sums.
    fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let a = (sy - b * sx) / n;
        (a, b)
    }

    /// Independent oracle: the covariance / (sigma*sigma) correlation
    /// formula, expanded raw-sum form.
    fn pearson_oracle(l: &[f64], t: &[f64]) -> f64 {
        let n = l.len() as f64;
        let ml = l.iter().sum::<f64>() / n;
        let mt = t.iter().sum::<f64>() / n;
        let slt: f64 = l.iter().zip(t).map(|(a, b)| a * b).sum();
        let sll: f64 = l.iter().map(|a| a * a).sum();
        let stt: f64 = t.iter().map(|a| a * a).sum();
        (slt - n * ml * mt) / ((sll - n * ml * ml) * (stt - n * mt * mt)).sqrt()
    }

    #[test]
    fn regression_identity_translation() {
        let fit = regression_coefficients(&seg(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0])).unwrap();
        assert!((fit.b1 - 1.0).abs() < 1e-12);
        assert!((fit.b2 - 1.0).abs() < 1e-12);
        assert!(fit.a1.abs() < 1e-12);
        assert!(fit.a2.abs() < 1e-12);
    }

    #[test]
    fn regression_matches_line_fit_oracle() {
        let l = [1.0, 2.0, 4.0];
        let t = [0.0, 1.0, 3.0];
        let fit = regression_coefficients(&seg(&l, &t)).unwrap();
        // L = a1 + b1*T fits L against T; T = a2 + b2*L the other way.
        let (a1, b1) = line_fit(&t, &l);
        let (a2, b2) = line_fit(&l, &t);
        assert!((fit.b1 - b1).abs() < 1e-12);
        assert!((fit.a1 - a1).abs() < 1e-12);
        assert!((fit.b2 - b2).abs() < 1e-12);
        assert!((fit.a2 - a2).abs() < 1e-12);
        assert!((fit.b1 - 1.0).abs() < 1e-12);
        assert!((fit.b2 - 1.0).abs() < 1e-12);
        assert!((fit.a1 - 1.0).abs() < 1e-12);
        assert!((fit.a2 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn regression_negation_gives_slope_minus_one() {
        let fit = regression_coefficients(&seg(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0])).unwrap();
        assert!((fit.b1 + 1.0).abs() < 1e-12);
        assert!((fit.b2 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn regression_flat_side_signals() {
        assert!(matches!(
            regression_coefficients(&seg(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0])),
            Err(Error::FlatSegment)
        ));
        assert!(matches!(
            regression_coefficients(&seg(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0])),
            Err(Error::FlatSegment)
        ));
    }

    #[test]
    fn clark_perfect_self_correlation() {
        assert!((clark_index(&seg(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0])).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clark_loses_the_sign() {
        // Exact anti-correlation still scores 1.0 under the unsigned index.
        let c = clark_index(&seg(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0])).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clark_matches_absolute_correlation_oracle() {
        let l = [1.0, 2.0, 3.0];
        let t = [1.0, 3.0, 2.0];
        let c = clark_index(&seg(&l, &t)).unwrap();
        assert!((c - pearson_oracle(&l, &t).abs()).abs() < 1e-12);
        assert!((c - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pearson_self_and_negated() {
        assert!((pearson_index(&seg(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0])).value - 1.0).abs() < 1e-12);
        assert!((pearson_index(&seg(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0])).value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_matches_footnote_oracle() {
        let l = [1.0, 2.0, 3.0];
        let t = [1.0, 3.0, 2.0];
        let c = pearson_index(&seg(&l, &t));
        assert!(!c.flat);
        assert!((c.value - pearson_oracle(&l, &t)).abs() < 1e-12);
        assert!((c.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pearson_flat_side_is_flagged_zero() {
        let c = pearson_index(&seg(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]));
        assert_eq!(c.value, 0.0);
        assert!(c.flat);
    }

    #[test]
    fn pearson_symmetry_is_exact() {
        let l = [0.21, 0.95, 0.47, 0.66];
        let t = [0.83, 0.12, 0.39, 0.74];
        let ab = pearson_index(&seg(&l, &t)).value;
        let ba = pearson_index(&seg(&t, &l)).value;
        assert_eq!(ab, ba);
    }

    #[test]
    fn pearson_affine_invariance() {
        let l = [0.2, 0.5, 0.3, 0.9, 0.4];
        let t = [0.6, 0.1, 0.8, 0.3, 0.7];
        let base = pearson_index(&seg(&l, &t)).value;
        let scaled: Vec<f64> = l.iter().map(|v| 2.5 * v + 0.7).collect();
        assert!((pearson_index(&seg(&scaled, &t)).value - base).abs() < 1e-10);
        let negated: Vec<f64> = l.iter().map(|v| -1.5 * v + 0.2).collect();
        assert!((pearson_index(&seg(&negated, &t)).value + base).abs() < 1e-10);
    }

    #[test]
    fn standardized_sides_make_slopes_equal_pearson() {
        let l = [0.2, 0.5, 0.3, 0.9, 0.4];
        let t = [0.6, 0.1, 0.8, 0.3, 0.7];
        let c = pearson_index(&seg(&l, &t)).value;
        let ls = standardize(&l).unwrap();
        let ts = standardize(&t).unwrap();
        let fit = regression_coefficients(&seg(&ls, &ts)).unwrap();
        assert!(fit.a1.abs() < 1e-10);
        assert!(fit.a2.abs() < 1e-10);
        assert!((fit.b1 - c).abs() < 1e-10);
        assert!((fit.b2 - c).abs() < 1e-10);
    }
}
