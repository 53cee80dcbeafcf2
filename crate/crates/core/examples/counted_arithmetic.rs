// Exact rationals and the per-round operation meter.

use opcap::numerics::unary_op;
use opcap::{NumericError, OpMeter, Scalar, UnaryOp};

pub fn run_example() {
    let x = vec![Scalar::ratio(1, 2), Scalar::int(3), Scalar::ratio(-2, 3)];
    let v = vec![Scalar::int(4), Scalar::ratio(1, 3), Scalar::int(6)];

    // A dot product of length 3 costs 3 multiplications and 2 additions.
    let mut meter = OpMeter::unlimited();
    let d = meter.dot(&x, &v).unwrap();
    println!("x.v = {d} using {} binary ops", meter.used());
    assert_eq!(d, Scalar::int(-1));
    assert_eq!(meter.used(), 5);

    // Unary operations are free.
    let floor = unary_op(&UnaryOp::Floor, &Scalar::ratio(7, 2)).unwrap();
    println!("floor(7/2) = {floor}");

    // Under a cap of 4 the fifth charge fails.
    let mut capped = OpMeter::capped(4);
    match capped.dot(&x, &v) {
        Err(NumericError::CapExceeded { cap, attempted }) => println!("cap {cap} exceeded at charge #{attempted}"),
        other => panic!("expected the cap to trip, got {other:?}"),
    }

    // Arithmetic after the answer is rejected.
    let mut sealed = OpMeter::unlimited();
    sealed.seal();
    assert!(matches!(sealed.add(&Scalar::one(), &Scalar::one()), Err(NumericError::SealedMeter)));
}

#[allow(dead_code)]
fn main() {
    run_example();
}
