//! Prints the per-round avalanche table as CSV.
fn main() {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(400);
    let report = symfrog::diagnostics::run_avalanche(trials, symfrog::ROUNDS, 0x5EED);
    print!("{}", report.to_csv());
}
