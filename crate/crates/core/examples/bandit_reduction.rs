// Learning from right/wrong verdicts alone, and from a single verdict for
// `r` answers, by voting over copies of a standard learner.

use opcap::adversaries::AdversarySpec;
use opcap::bounds;
use opcap::engine::Protocol;
use opcap::families::Family;
use opcap::learners::LearnerSpec;
use opcap::reductions::{default_alpha, ReductionSpec};
use opcap::verify::{game, random_finite_family};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() {
    let (m, k, a) = (2u32, 3u32, 5u64);
    let family = random_finite_family(&mut ChaCha8Rng::seed_from_u64(8), m as usize + 1, 6, k);
    let base = LearnerSpec::Padded { ops: a, base: Box::new(LearnerSpec::SequentialElimination) };

    let cap = bounds::bandit_ops(m, k.into(), a).ceiling();
    let mut c = game(family.clone(), base.clone(), AdversarySpec::VersionSpace);
    c.protocol = Protocol::Bandit;
    c.reduction = Some(ReductionSpec::Bandit { alpha: None });
    c.cap = Some(cap);
    c.rounds = 40;
    let t = c.run().unwrap();
    let alpha = default_alpha(k as usize, 1);
    let limit = bounds::voting_mistakes(m.into(), &alpha, &bounds::ambiguous_decay(k.into(), 1, &alpha));
    println!("bandit: {} mistakes (bound {}), max ops {} under cap {cap}", t.mistakes, limit.ceiling(), t.max_ops);
    assert!(t.is_clean() && limit.holds(t.mistakes as u64));

    let r = 2;
    let cap = bounds::ambiguous_ops(m, k.into(), r as u64, a).ceiling();
    for (name, protocol, fam) in [
        ("delayed", Protocol::DelayedAmbiguous { r }, family.clone()),
        ("cart", Protocol::CartBandit { r }, Family::Cart { base: Box::new(family.clone()), r }),
    ] {
        let mut c = game(fam, base.clone(), AdversarySpec::Honest);
        c.protocol = protocol;
        c.reduction = Some(ReductionSpec::Ambiguous { alpha: None });
        c.cap = Some(cap);
        c.rounds = 40;
        let t = c.run().unwrap();
        let audit = t.audit.as_ref().unwrap();
        println!("{name} r={r}: {} mistakes, max ops {} under cap {cap}, peak copies {}", t.mistakes, t.max_ops, audit.max_q());
        assert!(t.is_clean());
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
