use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Accept when distance ≤ threshold. The last point uses +∞ (JSON `null`).
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EerPoint {
    /// Sweep threshold with the smallest |FAR − FRR| (first on ties).
    pub threshold: f64,
    /// Midpoint between `threshold` and the next swept threshold. FAR and
    /// FRR on the swept data are the same anywhere in that interval.
    pub operating_threshold: f64,
    pub far: f64,
    pub frr: f64,
    /// (FAR + FRR) / 2 at the chosen point.
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyPoint {
    pub threshold: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocSweep {
    pub points: Vec<RocPoint>,
    pub eer: EerPoint,
    pub best_accuracy: AccuracyPoint,
}

/// Sweeps the acceptance threshold over 0, every distinct observed
/// distance, and +∞.
pub fn roc_sweep(genuine: &[f64], impostor: &[f64]) -> Result<RocSweep> {
    if genuine.is_empty() || impostor.is_empty() {
        return Err(Error::Data("roc sweep needs genuine and impostor distances".into()));
    }
    if genuine.iter().chain(impostor).any(|d| d.is_nan() || *d < 0.0) {
        return Err(Error::Data("distances must be non-negative numbers".into()));
    }
    let mut gen = genuine.to_vec();
    let mut imp = impostor.to_vec();
    gen.sort_by(f64::total_cmp);
    imp.sort_by(f64::total_cmp);

    let mut thresholds: Vec<f64> = std::iter::once(0.0)
        .chain(gen.iter().copied())
        .chain(imp.iter().copied())
        .chain(std::iter::once(f64::INFINITY))
        .collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let (n_gen, n_imp) = (gen.len() as f64, imp.len() as f64);
    let (mut gi, mut ii) = (0, 0);
    let mut points = Vec::with_capacity(thresholds.len());
    let mut accepted_counts = Vec::with_capacity(thresholds.len());
    for &t in &thresholds {
        while gi < gen.len() && gen[gi] <= t {
            gi += 1;
        }
        while ii < imp.len() && imp[ii] <= t {
            ii += 1;
        }
        accepted_counts.push((gi, ii));
        points.push(RocPoint {
            threshold: t,
            far: ii as f64 / n_imp,
            frr: (gen.len() - gi) as f64 / n_gen,
        });
    }

    let mut eer_idx = 0;
    for (i, p) in points.iter().enumerate() {
        if (p.far - p.frr).abs() < (points[eer_idx].far - points[eer_idx].frr).abs() {
            eer_idx = i;
        }
    }
    let eer = &points[eer_idx];
    let operating_threshold = match points.get(eer_idx + 1) {
        Some(next) if next.threshold.is_finite() => (eer.threshold + next.threshold) / 2.0,
        _ => eer.threshold,
    };

    let mut best = 0;
    let correct = |i: usize| {
        let (g_acc, i_acc) = accepted_counts[i];
        g_acc + (imp.len() - i_acc)
    };
    for i in 1..points.len() {
        if correct(i) > correct(best) {
            best = i;
        }
    }

    Ok(RocSweep {
        eer: EerPoint {
            threshold: eer.threshold,
            operating_threshold,
            far: eer.far,
            frr: eer.frr,
            rate: (eer.far + eer.frr) / 2.0,
        },
        best_accuracy: AccuracyPoint {
            threshold: points[best].threshold,
            accuracy: correct(best) as f64 / (n_gen + n_imp),
        },
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_pair() {
        let roc = roc_sweep(&[0.1], &[0.9]).unwrap();
        let thresholds: Vec<f64> = roc.points.iter().map(|p| p.threshold).collect();
        assert_eq!(thresholds, vec![0.0, 0.1, 0.9, f64::INFINITY]);
        // t = 0.5 lies between 0.1 and 0.9, which share the 0.1 point
        let at = roc.points[1];
        assert_eq!((at.far, at.frr), (0.0, 0.0));
        assert_eq!(roc.eer.threshold, 0.1);
        assert_eq!(roc.eer.operating_threshold, 0.5);
        assert_eq!(roc.best_accuracy.accuracy, 1.0);
    }

    #[test]
    fn identical_distributions() {
        let d: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let roc = roc_sweep(&d, &d).unwrap();
        assert!((roc.eer.rate - 0.5).abs() < 0.051, "{:?}", roc.eer);
    }

    #[test]
    fn sentinels_bound_the_curve() {
        let roc = roc_sweep(&[0.3, 0.4], &[0.2, 0.5]).unwrap();
        let first = roc.points.first().unwrap();
        let last = roc.points.last().unwrap();
        assert_eq!((first.threshold, first.far, first.frr), (0.0, 0.0, 1.0));
        assert_eq!((last.far, last.frr), (1.0, 0.0));
        assert!(last.threshold.is_infinite());
    }

    #[test]
    fn empty_input() {
        assert!(matches!(roc_sweep(&[], &[1.0]), Err(Error::Data(_))));
        assert!(matches!(roc_sweep(&[1.0], &[]), Err(Error::Data(_))));
    }
}
