// Weighted voting over copies of a base learner when up to `η` answers are
// lies, with an exact audit of the weights.

use opcap::adversaries::{AdversarySpec, LieSpec};
use opcap::bounds;
use opcap::engine::Protocol;
use opcap::learners::LearnerSpec;
use opcap::reductions::ReductionSpec;
use opcap::verify::{game, random_finite_family};
use opcap::Scalar;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() {
    let (m, k, eta) = (2u64, 4u32, 2usize);
    let family = random_finite_family(&mut ChaCha8Rng::seed_from_u64(1), m as usize + 1, 8, k);
    let variants = [
        ("strong", Protocol::AgnosticStrong { eta }, ReductionSpec::AgnosticStrong, false, bounds::agnostic_strong(m, eta as u64, k.into())),
        ("weak", Protocol::AgnosticWeak { eta }, ReductionSpec::AgnosticWeak, true, bounds::agnostic_weak(m, eta as u64, k.into())),
        ("restart", Protocol::AgnosticStrong { eta }, ReductionSpec::Restart { m: None }, false, bounds::agnostic_restart(m, eta as u64)),
    ];
    for (name, protocol, reduction, weak, bound) in variants {
        let mut c = game(family.clone(), LearnerSpec::SequentialElimination, AdversarySpec::Honest);
        c.protocol = protocol;
        c.reduction = Some(reduction);
        c.lies = Some(LieSpec { eta, schedule: vec![0, 3], weak });
        c.rounds = 40;
        c.seed = 2;
        let t = c.run().unwrap();
        let cert = t.certification.as_ref().unwrap();
        println!("{name}: {} mistakes (bound {}), {} lies, witness within {} disagreements", t.mistakes, bound.ceiling(), t.lies, cert.disagreements);
        assert!(bound.holds(t.mistakes as u64));
        if let Some(audit) = &t.audit {
            let worst = audit.events.iter().map(|e| &e.after / &e.before).max().unwrap_or_else(Scalar::zero);
            println!("  guaranteed decay {}, worst recorded {worst}, peak copies {}", audit.decay_factor, audit.max_q());
            assert!(audit.decay_holds(&audit.decay_factor));
        }
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
