use std::time::Instant;
use wallbone::dataset::{generate_synthetic_database, filter_scope, ScopeCriteria};
use wallbone::evaluation::{make_splits, run_trials, PipelineConfig};
use wallbone::gpr::LambdaChoice;

#[test]
fn transform_benefit_probe() {
    let t0 = Instant::now();
    let mut r2_auto = Vec::new();
    let mut r2_off = Vec::new();
    for seed in 1..=10u64 {
        let records = generate_synthetic_database(120, seed, 0.25);
        let (in_scope, _) = filter_scope(records, &ScopeCriteria::default());
        let ids: Vec<String> = in_scope.iter().map(|r| r.wall.id.clone()).collect();
        let plan = make_splits(&ids, seed, 2, 0.9).unwrap();
        for (lambda, bucket) in [(LambdaChoice::Auto, &mut r2_auto), (LambdaChoice::Off, &mut r2_off)] {
            let cfg = PipelineConfig { lambda, ..Default::default() };
            let results = run_trials(&in_scope, &plan, &cfg).unwrap();
            for t in &results {
                for o in &t.outputs {
                    if let Some(m) = &o.metrics { bucket.push(m.test_r2); }
                }
            }
        }
    }
    let med = |v: &mut Vec<f64>| { v.sort_by(|a,b| a.partial_cmp(b).unwrap()); let n=v.len(); if n%2==1 {v[n/2]} else {0.5*(v[n/2-1]+v[n/2])} };
    let ma = med(&mut r2_auto);
    let mo = med(&mut r2_off);
    println!("median R2 boxcox={ma:.4} none={mo:.4} margin={:.4} took {:.1?}", ma - mo, t0.elapsed());
}
