// Splitting a learner into cheap guesses and a resumable update, so that it
// runs under a cap equal to the cost of one guess.

use opcap::adversaries::Honest;
use opcap::engine::{run_game, GameConfig, Mode, Protocol};
use opcap::families::Family;
use opcap::learners::{Learner, Phased, RealCodec, SpanSolver};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() {
    let f = Family::LinearReal { n: 3 };
    let w = f.declared().w_f.unwrap();
    println!("cap W = {w} (one dot product of length 3)");
    for seed in 0..5 {
        let hidden = f.random_member(&mut ChaCha8Rng::seed_from_u64(seed));
        let learner: Box<dyn Learner> = Box::new(Phased::new(SpanSolver::new(RealCodec::for_family(&f).unwrap()), w));
        let adversary = Box::new(Honest::random(f.clone(), hidden, seed).unwrap());
        let config = GameConfig { cap: Some(w), max_rounds: 40, mode: Mode::Exact };
        let t = run_game(&f, learner, adversary, Protocol::Standard, config).unwrap();
        let updates = t.diagnostics["updates"].as_u64().unwrap();
        let s = t.diagnostics["max_update_ops"].as_u64().unwrap();
        let bound = updates * (1 + s.div_ceil(w));
        println!("seed {seed}: {} mistakes, t={updates} s={s}, certificate {bound}, max ops {}", t.mistakes, t.max_ops);
        assert!(t.is_clean());
        assert!(t.max_ops <= w);
        assert!(t.mistakes as u64 <= bound);
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
