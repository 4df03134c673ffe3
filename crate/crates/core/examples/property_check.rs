//! Decides the five embedding properties of several product kernels, exactly
//! for finite components and from the spectral catalog for continuous ones.
//!
//! ```text
//! cargo run --example property_check
//! ```

use tklab::property::{classify_translation_invariant, decide_product_properties};
use tklab::{ContinuousKernel, FiniteKernel, Property, PropertyReport};

fn show(name: &str, report: &PropertyReport) {
    println!("{name}");
    for (i, c) in report.components.iter().enumerate() {
        println!("  k{}: characteristic {:?}, universal {:?}", i + 1, c.characteristic.status, c.universal.status);
    }
    for p in Property::ALL {
        let v = report.verdict(p);
        println!("  {:<15} {:?} ({})", p.name(), v.status, v.citation.unwrap_or("-"));
    }
}

fn main() -> tklab::Result<()> {
    let finite = [
        ("(2δ−1) ⊗ (2δ−1)", vec![FiniteKernel::signed_delta(); 2]),
        ("δ₂ ⊗ δ₃", vec![FiniteKernel::delta(2), FiniteKernel::delta(3)]),
        ("1₃ ⊗ δ₂", vec![FiniteKernel::constant(3), FiniteKernel::delta(2)]),
        ("(2δ−1) ⊗ (2δ−1) ⊗ (2δ−1)", vec![FiniteKernel::signed_delta(); 3]),
    ];
    for (name, components) in finite {
        show(name, &decide_product_properties(&components)?);
    }
    let continuous = [
        ("gaussian ⊗ laplacian", vec![ContinuousKernel::gaussian(1.0, 1)?, ContinuousKernel::laplacian(0.5, 2)?]),
        ("gaussian ⊗ constant", vec![ContinuousKernel::gaussian(1.0, 1)?, ContinuousKernel::constant(1)]),
    ];
    for (name, components) in continuous {
        show(name, &classify_translation_invariant(&components)?);
    }
    Ok(())
}
