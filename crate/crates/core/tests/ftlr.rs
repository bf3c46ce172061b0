mod common;
use common::laws;

#[test]
fn every_program_has_a_member_witness() {
    println!("{}", laws::ftlr_suite(&laws::budget()).unwrap());
}

#[test]
fn closed_units_close_when_typed() {
    println!("{}", laws::adequacy_suite(&laws::budget()).unwrap());
}

#[test]
fn witnesses_survive_closure() {
    println!("{}", laws::closure_suite(&laws::budget()).unwrap());
}
