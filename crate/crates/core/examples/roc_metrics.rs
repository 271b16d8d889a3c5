//! ROC points of a score set, the same computation the threshold sweep reports.

use guided_prover::training::{confusion_rates, roc, roc_csv, roc_thresholds};

fn main() {
    let logits = [(2.1, true), (0.7, true), (-0.2, true), (0.4, false), (-0.9, false), (-1.6, false), (-2.4, false)];
    let points = roc(&logits, &roc_thresholds(&logits));
    print!("{}", roc_csv(&points));
    for t in [0.0, -0.25] {
        let (tpr, tnr) = confusion_rates(&logits, t);
        println!("t = {t}: TPR {tpr:.3} TNR {tnr:.3}");
    }
}
