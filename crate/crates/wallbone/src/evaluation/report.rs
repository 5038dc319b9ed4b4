//! Aligned-column text rendering of evaluation reports. The machine-readable
//! form is plain TOML serialization of the same structs.

use super::{AggregateReport, AsceComparison};

/// Fixed-width table of the per-output aggregates plus the feature tally.
pub fn report_table(report: &AggregateReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<8} {:>8} {:>12} {:>14} {:>10} {:>10}\n",
        "output", "trials", "median_R2", "mean_RelRMSE", "mean_P/A", "std_P/A"
    ));
    for o in &report.outputs {
        out.push_str(&format!(
            "{:<8} {:>8} {:>12.3} {:>14.3} {:>10.3} {:>10.3}\n",
            o.var.label(),
            o.retained_trials,
            o.median_test_r2,
            o.mean_rel_rmse,
            o.pa_mean,
            o.pa_std
        ));
    }
    out.push('\n');
    out.push_str(&format!(
        "trials: {}   dropped (trial, output) pairs: {}   RelRMSE = {}\n",
        report.trial_count, report.dropped_count, report.rel_rmse_definition
    ));
    out.push_str(&format!(
        "overtraining rule: drop when train R2 - test R2 > {} or test R2 < {}\n",
        report.overtrain_rule.max_gap, report.overtrain_rule.min_test_r2
    ));
    for w in &report.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    out.push('\n');
    out.push_str("feature relevance (top-2 appearances across retained trials x outputs)\n");
    for (rank, t) in report.feature_tally.iter().enumerate() {
        if t.top2_count == 0 {
            continue;
        }
        out.push_str(&format!("{:>4}. {:<14} {:>6}\n", rank + 1, t.feature, t.top2_count));
    }
    out
}

/// Fixed-width table of the GPR-versus-ASCE-41 comparison.
pub fn comparison_table(cmp: &AsceComparison) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "GPR vs ASCE 41-17 on {} unseen specimens (V_n: {})\n",
        cmp.test_count, cmp.vn_model
    ));
    out.push_str(&format!(
        "{:<8} {:>12} {:>12} {:>13} {:>13}\n",
        "output", "GPR_P/A", "GPR_std", "ASCE41_P/A", "ASCE41_std"
    ));
    for r in &cmp.rows {
        out.push_str(&format!(
            "{:<8} {:>12.3} {:>12.3} {:>13.3} {:>13.3}\n",
            r.var.label(),
            r.gpr_pa_mean,
            r.gpr_pa_std,
            r.asce_pa_mean,
            r.asce_pa_std
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::BackboneVar;
    use crate::evaluation::{ComparisonRow, FeatureTally, OutputAggregate, OvertrainRule};

    #[test]
    fn tables_render_aligned_rows() {
        let report = AggregateReport {
            trial_count: 3,
            outputs: vec![OutputAggregate {
                var: BackboneVar::VMax,
                retained_trials: 3,
                median_test_r2: 0.91,
                mean_rel_rmse: 0.28,
                pa_mean: 1.04,
                pa_std: 0.26,
            }],
            feature_tally: vec![
                FeatureTally { feature: "alr".into(), top2_count: 5 },
                FeatureTally { feature: "fc_mpa".into(), top2_count: 0 },
            ],
            rel_rmse_definition: "rmse / mean(actual)".into(),
            overtrain_rule: OvertrainRule::default(),
            dropped_count: 1,
            warnings: vec![],
        };
        let t = report_table(&report);
        assert!(t.contains("V_max"));
        assert!(t.contains("0.910"));
        assert!(t.contains("alr"));
        // Zero-count features are omitted from the tally listing.
        assert!(!t.contains("fc_mpa"));

        let cmp = AsceComparison {
            test_count: 6,
            vn_model: "constant (400 kN)".into(),
            rows: vec![ComparisonRow {
                var: BackboneVar::VY,
                gpr_pa_mean: 0.97,
                gpr_pa_std: 0.16,
                asce_pa_mean: 2.17,
                asce_pa_std: 2.41,
            }],
        };
        let t = comparison_table(&cmp);
        assert!(t.contains("V_y"));
        assert!(t.contains("2.170"));
    }
}
