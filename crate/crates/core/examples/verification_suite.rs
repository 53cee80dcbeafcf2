// Running a named verification sweep and printing its table.

use opcap::cli::{render_rows, Format};
use opcap::verify::{all_pass, Suite};

pub fn run_example() {
    let rows = Suite::Impossibility.run();
    print!("{}", render_rows(&rows, Format::Csv).unwrap());
    assert!(all_pass(&rows));
}

#[allow(dead_code)]
fn main() {
    run_example();
}
