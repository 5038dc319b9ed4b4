//! The full evaluation protocol at demo scale: repeated 90/10 splits,
//! per-output models, overtraining filter, aggregation, and the ASCE 41
//! comparison table.
//!
//! ```bash
//! cargo run --release --example evaluation_protocol
//! ```

use std::collections::BTreeMap;

use wallbone::asce41::Aci318Simplified;
use wallbone::dataset::{
    filter_scope, generate_synthetic_database, BackboneVar, ScopeCriteria,
};
use wallbone::evaluation::{
    aggregate, compare_asce41, comparison_table, feature_matrix, filter_overtrained, make_splits,
    report_table, run_trials, OvertrainRule, PipelineConfig,
};
use wallbone::gpr::{FitConfig, GprModel};

fn main() {
    let records = generate_synthetic_database(120, 42, 0.15);
    let (in_scope, _) = filter_scope(records, &ScopeCriteria::default());
    println!("{} in-scope specimens", in_scope.len());

    let ids: Vec<String> = in_scope.iter().map(|r| r.wall.id.clone()).collect();
    let trials = 10;
    let plan = make_splits(&ids, 42, trials, 0.9).unwrap();
    println!(
        "plan: {} trials, {}/{} split\n",
        trials,
        plan.trials[0].train.len(),
        plan.trials[0].test.len()
    );

    let config = PipelineConfig::default();
    let results = run_trials(&in_scope, &plan, &config).unwrap();
    let rule = OvertrainRule::default();
    let filtered = filter_overtrained(&results, &rule);
    let report = aggregate(&filtered, &rule, &config.features).unwrap();
    print!("{}", report_table(&report));

    // Table-5-style comparison on the first trial's held-out specimens.
    let by_id: BTreeMap<&str, _> = in_scope.iter().map(|r| (r.wall.id.as_str(), r)).collect();
    let train: Vec<_> = plan.trials[0].train.iter().map(|id| by_id[id.as_str()]).collect();
    let test: Vec<_> = plan.trials[0]
        .test
        .iter()
        .map(|id| (*by_id[id.as_str()]).clone())
        .collect();
    let x = feature_matrix(&train, &config.features).unwrap();
    let mut models = BTreeMap::new();
    for var in BackboneVar::ALL {
        let y: Vec<f64> = train.iter().map(|r| r.backbone.unwrap().value(var)).collect();
        let fit = FitConfig { lambda: config.lambda, optimizer: config.optimizer.clone() };
        models.insert(var, GprModel::fit(&x, &y, &config.features, var.column(), &fit).unwrap());
    }
    let cmp = compare_asce41(&test, &models, &Aci318Simplified::default()).unwrap();
    println!();
    print!("{}", comparison_table(&cmp));
}
