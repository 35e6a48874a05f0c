//! CSV emission. Floats use Rust's shortest round-trip formatting, which is
//! locale-independent and parses back to the identical `f64`.

use std::fmt::Write as _;
use std::path::Path;

use snn_core::optimize::TrainingHistory;
use snn_core::sparsity::SweepRow;

pub const HISTORY_HEADER: &str = "epoch,mean_cost,accuracy,weight_sparsity,activation_sparsity";
pub const SWEEP_HEADER: &str = "epsilon,activation_sparsity,weight_sparsity,accuracy,mean_cost";

pub fn history_csv(history: &TrainingHistory) -> String {
    let mut out = format!("{HISTORY_HEADER}\n");
    for r in &history.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.epoch, r.mean_cost, r.accuracy, r.weight_sparsity, r.activation_sparsity
        );
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.epsilon, r.activation_sparsity, r.weight_sparsity, r.accuracy, r.mean_cost
        );
    }
    out
}

pub fn emit_history_csv(history: &TrainingHistory, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, history_csv(history))
}

pub fn emit_sweep_csv(rows: &[SweepRow], path: &Path) -> std::io::Result<()> {
    std::fs::write(path, sweep_csv(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use snn_core::optimize::EpochRecord;

    fn record(epoch: usize, cost: f64) -> EpochRecord {
        EpochRecord {
            epoch,
            mean_cost: cost,
            accuracy: 0.5,
            weight_sparsity: 0.0,
            activation_sparsity: 0.25,
        }
    }

    #[test]
    fn empty_history_is_header_only() {
        assert_eq!(history_csv(&TrainingHistory::default()), format!("{HISTORY_HEADER}\n"));
    }

    #[test]
    fn one_line_per_epoch() {
        let h = TrainingHistory {
            records: (1..=3).map(|e| record(e, 0.1 * e as f64)).collect(),
        };
        assert_eq!(history_csv(&h).lines().count(), 4);
    }

    #[test]
    fn values_round_trip() {
        let awkward = [0.1 + 0.2, 1.0 / 3.0, 5e-324, 1.7976931348623157e308, 0.0, 2.0f64.sqrt()];
        let h = TrainingHistory {
            records: awkward.iter().enumerate().map(|(i, &c)| record(i, c)).collect(),
        };
        let text = history_csv(&h);
        for (line, &c) in text.lines().skip(1).zip(&awkward) {
            let back: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(back.to_bits(), c.to_bits());
        }
    }

    #[test]
    fn sweep_columns() {
        let rows = [SweepRow {
            epsilon: 0.5,
            activation_sparsity: 0.25,
            weight_sparsity: 0.0,
            accuracy: 1.0,
            mean_cost: 0.125,
        }];
        assert_eq!(sweep_csv(&rows), format!("{SWEEP_HEADER}\n0.5,0.25,0,1,0.125\n"));
    }
}
