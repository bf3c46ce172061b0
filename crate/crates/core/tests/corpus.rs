mod common;
use common::laws;

#[test]
fn type_system_accepts_the_corpus_and_names_the_mutant() {
    println!("{}", laws::type_system().unwrap());
}
