// Arithmetic circuits: evaluation with counted operations and the lower
// bound of `m − 1` binary operations for a function of `m` variables.

use opcap::dag::{analyze, certify_lower_bound, parse_dag, random_dag, sum_dag, DEFAULT_PROBES};
use opcap::{OpMeter, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() {
    // x0*x1 + x2, with a masked branch that never changes the output.
    let text = "i0; i1; i2; b mul 0 1; b add 3 2; c 0; b mul 5 2; b add 4 6; out 7";
    let dag = parse_dag(text).unwrap();
    let mut meter = OpMeter::unlimited();
    let y = dag.evaluate_one(&[Scalar::int(2), Scalar::int(5), Scalar::int(-1)], &mut meter).unwrap();
    println!("value {y}, {} binary ops executed", meter.used());
    assert_eq!(y, Scalar::int(9));

    let report = &analyze(&dag, DEFAULT_PROBES, 1).unwrap()[0];
    println!(
        "semantic deps {:?}, static binary ops {}, bound {}, pass {}",
        report.semantic.as_ref().unwrap(),
        report.static_binary_ops,
        report.bound,
        report.pass
    );
    assert!(report.pass);

    // The sum of m inputs is tight: exactly m − 1 additions.
    for m in 2..=6 {
        let r = certify_lower_bound(&sum_dag(m), m);
        assert_eq!(r.static_binary_ops, r.bound);
        let edges: Vec<String> = r.witness.iter().map(|e| format!("{}-{}", e.a, e.b)).collect();
        println!("sum of {m}: {} ops, witness {}", r.static_binary_ops, edges.join(" "));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let violations =
        (0..200).map(|i| analyze(&random_dag(&mut rng, 6, 20), DEFAULT_PROBES, i).unwrap()).filter(|reports| reports.iter().any(|r| !r.pass)).count();
    println!("random circuits violating the bound: {violations}");
    assert_eq!(violations, 0);
}

#[allow(dead_code)]
fn main() {
    run_example();
}
