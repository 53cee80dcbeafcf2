// Caps below and above the cost of checking `x_i · y_i = 1` on a reciprocal
// family: below it the learner needs a second mistake.

use opcap::adversaries::AdversarySpec;
use opcap::engine::{ExperimentConfig, Status};
use opcap::families::Family;
use opcap::learners::LearnerSpec;
use opcap::verify::game;

pub fn run_example() {
    let r = 3;
    let family = Family::ReciprocalTuple { r };
    println!("cap  memorizer  check");
    for cap in 0..=r as u64 + 1 {
        let play = |learner: LearnerSpec| {
            let mut c: ExperimentConfig = game(family.clone(), learner, AdversarySpec::ReciprocalProbe);
            c.cap = Some(cap);
            c.seed = 5;
            c.run().unwrap()
        };
        let memo = play(LearnerSpec::Memorizer);
        let check = play(LearnerSpec::ReciprocalCheck);
        let shown = match check.status {
            Status::Clean => format!("{} mistake(s)", check.mistakes),
            _ => "cap exceeded".to_string(),
        };
        println!("{cap:>3}  {:>9}  {shown}", memo.mistakes);
        assert_eq!(memo.mistakes, 2);
        assert_eq!(check.is_clean(), cap >= r as u64);
        if check.is_clean() {
            assert_eq!(check.mistakes, 1);
        }
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
