//! Builds a dependent joint distribution with zero HSIC from a component
//! kernel that is not characteristic.
//!
//! ```text
//! cargo run --example collision
//! ```

use tklab::hsic::population_hsic;
use tklab::witness::{find_embedding_collision, thm2ii_construct, verify_witness};
use tklab::{rat, FiniteKernel, JointDistribution, ProductKernel, Rational};

fn strings(p: &JointDistribution<Rational>) -> Vec<String> {
    p.measure().to_flat().iter().map(ToString::to_string).collect()
}

fn main() -> tklab::Result<()> {
    let k1 = FiniteKernel::from_integers(&[&[2, 1, 1], &[1, 2, 1], &[1, 1, 2]])?;
    println!("k1 = I + 1 on 3 points: collision {:?}", find_embedding_collision(&k1).is_some());

    let k1 = FiniteKernel::constant(3);
    let (p, q) = find_embedding_collision(&k1).expect("constant kernels are not characteristic");
    println!("collision under the constant kernel: P = {:?}, P' = {:?}", strings(&p), strings(&q));

    let kernel = ProductKernel::new(vec![k1, FiniteKernel::delta(2), FiniteKernel::signed_delta()])?;
    let (f, report) = thm2ii_construct(&kernel, (&p, &q), (0, 1), &[vec![rat(1, 3), rat(2, 3)]])?;
    println!("joint F = {:?}", strings(&f));
    println!("F independent: {}", f.is_product());
    println!("HSIC(F) = {}", population_hsic(&kernel, &f)?);
    println!("exact check of F − ⊗F_m: {}", verify_witness(&kernel, &report)?.summary());
    Ok(())
}
