//! Refutes a small problem with the default age/weight heuristic and prints the proof.

use guided_prover::guidance::SelectionScheme;
use guided_prover::logic::{parse_problem, Signature};
use guided_prover::saturation::{saturate, Limits};

const PROBLEM: &str = "
cnf(human, axiom, human(socrates)).
cnf(mortal, axiom, ~human(X) | mortal(X)).
cnf(refl, theory_axiom(thax_eq), eq(X,X)).
cnf(goal, negated_conjecture, ~mortal(socrates)).
";

fn main() {
    let sig = Signature::new();
    let input = parse_problem(PROBLEM, &sig).expect("problem parses");
    let out =
        saturate("socrates", &input, &SelectionScheme::base(), None, Limits::default()).expect("base needs no model");
    println!("status {}, {} selections, {} generated", out.status.as_str(), out.stats.selections, out.stats.generated);
    print!("{}", out.format_proof(&sig));
}
