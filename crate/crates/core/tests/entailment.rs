mod common;
use common::laws;

#[test]
fn decision_procedure_agrees_with_the_box() {
    let start = std::time::Instant::now();
    let (n, bad) = laws::entailment_grid().unwrap();
    println!("{n} instances, {bad} disagreements, {:?}", start.elapsed());
    assert!(n >= 30_000);
}
