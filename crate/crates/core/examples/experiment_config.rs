// Experiments as JSON documents: parse, validate, run in parallel and
// export transcripts.

use opcap::cli::{render_transcript, Format};
use opcap::engine::{sweep, ExperimentConfig};
use opcap::Error;

const SPAN: &str = include_str!("data/span_basis.json");

pub fn run_example() {
    let base = ExperimentConfig::from_json(SPAN).unwrap();
    let configs: Vec<ExperimentConfig> = (1..=4)
        .map(|n| {
            let mut c = base.clone();
            c.family = opcap::families::Family::LinearReal { n };
            c
        })
        .collect();
    for (c, t) in configs.iter().zip(sweep(&configs)) {
        let t = t.unwrap();
        println!("{}: mistakes={} max_ops={} status={:?}", c.family.name(), t.mistakes, t.max_ops, t.status);
    }

    let t = base.run().unwrap();
    print!("{}", render_transcript(&t, Format::Csv).unwrap());
    assert_eq!(t.to_json(), base.run().unwrap().to_json());

    let broken = SPAN.replace("\"rounds\": 10", "\"rounds\": -1");
    match ExperimentConfig::from_json(&broken) {
        Err(Error::Config { path, msg }) => println!("rejected: {path}: {msg}"),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
