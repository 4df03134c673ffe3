//! Searches for a joint distribution whose dependence is invisible to a
//! product kernel, and verifies the result exactly.
//!
//! ```text
//! cargo run --example witness_search
//! ```

use tklab::witness::{search_i_witness, verify_witness, SearchConfig, SearchOutcome};
use tklab::{FiniteKernel, ProductKernel};

fn main() -> tklab::Result<()> {
    let kernels = [
        ("(2δ−1) ⊗ (2δ−1) ⊗ (2δ−1)", vec![FiniteKernel::signed_delta(); 3]),
        ("(2δ−1) ⊗ δ ⊗ δ", vec![FiniteKernel::signed_delta(), FiniteKernel::delta(2), FiniteKernel::delta(2)]),
        ("(2δ−1) ⊗ (2δ−1)", vec![FiniteKernel::signed_delta(); 2]),
    ];
    let config = SearchConfig { budget: 100_000, seed: 7, delta: 0.01 };
    for (name, components) in kernels {
        let kernel = ProductKernel::new(components)?;
        match search_i_witness(&kernel, &config)? {
            SearchOutcome::Found { report, restart, evaluations } => {
                let check = verify_witness(&kernel, &report)?;
                let p = report.joint.as_ref().expect("class I witnesses carry P");
                println!("{name}: witness from restart {restart:?} after {evaluations} evaluations");
                println!("  P = {:?}", p.measure().to_flat().iter().map(ToString::to_string).collect::<Vec<_>>());
                println!("  A = {:?}", report.witness.to_flat().iter().map(ToString::to_string).collect::<Vec<_>>());
                println!("  exact check: {}", check.summary());
            }
            SearchOutcome::Certified { tag, reason } => {
                println!("{name}: certified I-characteristic ({tag}): {reason}")
            }
            SearchOutcome::Inconclusive { restarts, evaluations } => {
                println!("{name}: no witness found within budget ({restarts} restarts, {evaluations} evaluations): inconclusive")
            }
        }
    }
    Ok(())
}
