use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Row/column label used in the confusion matrix for "no gesture".
pub const CONFUSION_NONE: &str = "none";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub name: String,
    pub total_frames: u64,
    pub correct_frames: u64,
    pub false_frames: u64,
    pub accuracy_pct: f64,
    pub error_pct: f64,
    pub recall: f64,
}

impl EvalRow {
    pub fn from_counts(name: impl Into<String>, total: u64, correct: u64) -> Self {
        assert!(correct <= total, "correct frames exceed total");
        let (accuracy_pct, error_pct) = if total == 0 {
            (0.0, 0.0)
        } else {
            let acc = 100.0 * correct as f64 / total as f64;
            (acc, 100.0 - acc)
        };
        Self {
            name: name.into(),
            total_frames: total,
            correct_frames: correct,
            false_frames: total - correct,
            accuracy_pct,
            error_pct,
            recall: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        }
    }

    /// Accuracy percentage truncated (not rounded) to two decimals.
    pub fn accuracy_display(&self) -> String {
        truncated_pct(self.correct_frames, self.total_frames)
    }

    /// Error percentage truncated to two decimals, computed from the false
    /// count directly.
    pub fn error_display(&self) -> String {
        truncated_pct(self.false_frames, self.total_frames)
    }
}

/// `100 * num / den` truncated to two decimals, in exact integer arithmetic.
pub(crate) fn truncated_pct(num: u64, den: u64) -> String {
    if den == 0 {
        return "0.00".into();
    }
    let basis_points = (num as u128 * 10_000) / den as u128;
    format!("{}.{:02}", basis_points / 100, basis_points % 100)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_gesture: Vec<EvalRow>,
    /// Aggregate over every frame; `recall` is the macro average of the
    /// per-gesture recalls.
    pub totals: EvalRow,
    /// Label order shared by rows (truth) and columns (prediction); the
    /// last entry is [`CONFUSION_NONE`].
    pub labels: Vec<String>,
    pub confusion_matrix: Vec<Vec<u64>>,
}

impl EvalReport {
    /// Builds the totals row from per-gesture rows.
    pub fn totals_from_rows(rows: &[EvalRow]) -> EvalRow {
        let total = rows.iter().map(|r| r.total_frames).sum();
        let correct = rows.iter().map(|r| r.correct_frames).sum();
        let mut totals = EvalRow::from_counts("Total", total, correct);
        let counted: Vec<f64> = rows
            .iter()
            .filter(|r| r.total_frames > 0)
            .map(|r| r.recall)
            .collect();
        if !counted.is_empty() {
            totals.recall = counted.iter().sum::<f64>() / counted.len() as f64;
        }
        totals
    }

    /// Aligned text table in the layout of a per-gesture results table.
    pub fn to_table(&self) -> String {
        let width = self
            .per_gesture
            .iter()
            .map(|r| r.name.len())
            .chain(["Gesture name".len(), "Total".len()])
            .max()
            .unwrap_or(12);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>12}  {:>9}  {:>7}  {:>10}  {:>7}  {:>6}",
            "Gesture name", "Total frames", "Correct", "False", "Accuracy %", "Error %", "Recall"
        );
        let rule = "-".repeat(width + 66);
        let _ = writeln!(out, "{rule}");
        for row in &self.per_gesture {
            let _ = writeln!(
                out,
                "{:<width$}  {:>12}  {:>9}  {:>7}  {:>10}  {:>7}  {:>6.2}",
                row.name,
                row.total_frames,
                row.correct_frames,
                row.false_frames,
                row.accuracy_display(),
                row.error_display(),
                row.recall
            );
        }
        let _ = writeln!(out, "{rule}");
        let t = &self.totals;
        let _ = writeln!(
            out,
            "{:<width$}  {:>12}  {:>9}  {:>7}  {:>10}  {:>7}  {:>6.4}",
            t.name,
            t.total_frames,
            t.correct_frames,
            t.false_frames,
            t.accuracy_display(),
            t.error_display(),
            t.recall
        );
        out
    }

    /// Confusion matrix as aligned text, truth labels down, predictions across.
    pub fn confusion_table(&self) -> String {
        let width = self.labels.iter().map(|l| l.len()).max().unwrap_or(4).max(6);
        let mut out = String::new();
        let _ = write!(out, "{:<width$}", "true\\pred");
        for l in &self.labels {
            let _ = write!(out, " {:>width$}", l);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.confusion_matrix) {
            let _ = write!(out, "{:<width$}", label);
            for count in row {
                let _ = write!(out, " {:>width$}", count);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_matches_published_rows() {
        // 686/750 = 91.4666..., 64/750 = 8.5333...
        let row = EvalRow::from_counts("TimeOut", 750, 686);
        assert_eq!(row.accuracy_display(), "91.46");
        assert_eq!(row.error_display(), "8.53");
        let row = EvalRow::from_counts("Eight_VRF", 750, 718);
        assert_eq!(row.error_display(), "4.26");
    }

    #[test]
    fn row_arithmetic() {
        let row = EvalRow::from_counts("A", 10, 9);
        assert_eq!(row.false_frames, 1);
        assert!((row.accuracy_pct + row.error_pct - 100.0).abs() < 1e-9);
        assert_eq!(row.accuracy_display(), "90.00");
        assert!((row.recall - 0.9).abs() < 1e-12);
    }
}
