//! Checks the stored witnesses, generates new members of the three-way
//! witness family, and factorizes members of the two-way independence family.
//!
//! ```text
//! cargo run --example exact_witnesses
//! ```

use tklab::witness::{factorizing_family, fixture, verify_witness, SignCubeFamily, FIXTURE_NAMES};
use tklab::{rat, FiniteKernel, ProductKernel};

fn strings(v: &[tklab::Rational]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn main() -> tklab::Result<()> {
    for name in FIXTURE_NAMES {
        let f = fixture(name)?;
        let check = verify_witness(&f.kernel, &f.witness)?;
        println!("{name}: class {}, quad form {}, {}", f.witness.class.name(), check.quad_form, check.summary());
    }

    let kernel = ProductKernel::new(vec![FiniteKernel::signed_delta(); 3])?;
    let z = [rat(1, 20), rat(1, 10), rat(3, 20), rat(1, 10), rat(1, 5), rat(1, 10)];
    let (p, report) = SignCubeFamily::new(z)?.generate()?;
    println!("family member:");
    println!("  P = {:?}", strings(&p.measure().to_flat()));
    println!("  A = {:?}", strings(&report.witness.to_flat()));
    println!("  exact check: {}", verify_witness(&kernel, &report)?.summary());

    match SignCubeFamily::new([rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2)])?.generate() {
        Ok(_) => println!("z = 1/2 everywhere is feasible"),
        Err(e) => println!("z = 1/2 everywhere is rejected: {e}"),
    }

    for (a, b) in [(rat(1, 10), rat(2, 10)), (rat(1, 3), rat(1, 3))] {
        let p = factorizing_family(&a, &b)?;
        println!(
            "a = {a}, b = {b}: P = {:?}, marginals {:?}",
            strings(&p.measure().to_flat()),
            p.marginals().iter().map(|m| strings(m)).collect::<Vec<_>>()
        );
    }
    Ok(())
}
