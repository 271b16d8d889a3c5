//! Records a derivation while proving, writes it as a log, reads it back and
//! compresses it.

use guided_prover::derivation::{read_log, write_log};
use guided_prover::guidance::SelectionScheme;
use guided_prover::logic::{parse_problem, Signature};
use guided_prover::saturation::{saturate, Limits};

const PROBLEM: &str = "
cnf(a, axiom, p(a)).
cnf(step1, axiom, ~p(X) | q(X)).
cnf(step2, axiom, ~q(X) | r(X)).
cnf(sym, theory_axiom(thax_sym), ~e(X,Y) | e(Y,X)).
cnf(base, theory_axiom(thax_base), e(c0,c1)).
cnf(goal, negated_conjecture, ~r(a)).
";

fn main() {
    let sig = Signature::new();
    let input = parse_problem(PROBLEM, &sig).unwrap();
    let out = saturate("chain", &input, &SelectionScheme::base(), None, Limits::default()).unwrap();
    let store = &out.store;
    println!(
        "{} nodes, {} selected, {} positive, {} negative",
        store.len(),
        store.selected_count(),
        store.positive_count(),
        store.negative_count()
    );

    let mut bytes = Vec::new();
    write_log(store, &mut bytes).unwrap();
    println!("log is {} bytes:\n{}", bytes.len(), String::from_utf8_lossy(&bytes));
    let back = read_log(&bytes[..]).unwrap();
    assert_eq!(back.len(), store.len());

    let training_view = back.selected_closure().compress();
    println!("selected closure, compressed: {} nodes", training_view.len());
    for n in training_view.nodes().iter().filter(|n| n.selected) {
        println!("  {} {}", if n.in_proof { "+" } else { "-" }, training_view.render_fingerprint(n.id));
    }
}
