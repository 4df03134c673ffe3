//! Mean embeddings, quadratic forms and MMD on products of finite spaces,
//! computed with mode products and compared with the explicit Kronecker Gram.
//!
//! ```text
//! cargo run --example embeddings
//! ```

use tklab::measure::outer;
use tklab::{rat, FiniteKernel, JointDistribution, ProductKernel, Rational, Scalar, SignedMeasure};

fn main() -> tklab::Result<()> {
    let k1 = FiniteKernel::from_integers(&[&[2, 1], &[1, 2]])?;
    let k2 = FiniteKernel::from_integers(&[&[3, 1, 0], &[1, 3, 1], &[0, 1, 3]])?;
    let kernel = ProductKernel::new(vec![k1.clone(), k2.clone()])?;

    let f = SignedMeasure::new(&[2, 3], vec![rat(1, 2), rat(-1, 3), rat(0, 1), rat(1, 4), rat(1, 6), rat(-1, 5)])?;
    let fast = kernel.quad_form(&f)?;
    let flat = f.to_flat();
    let gram = kernel.kronecker_gram();
    let mut explicit = Rational::from_integer(0.into());
    for i in 0..flat.len() {
        for j in 0..flat.len() {
            explicit += &flat[i] * &gram[[i, j]] * &flat[j];
        }
    }
    println!("quad form by mode products {fast}, by the 6 × 6 Gram {explicit}");

    let u = vec![rat(1, 1), rat(-2, 1)];
    let v = vec![rat(1, 2), rat(0, 1), rat(1, 3)];
    println!(
        "product measure: quad form {} = {} · {}",
        kernel.quad_form(&outer(&[u.clone(), v.clone()])?)?,
        k1.quad(&u),
        k2.quad(&v)
    );

    let p = JointDistribution::from_flat(&[2, 3], vec![rat(1, 6); 6])?;
    let q =
        JointDistribution::from_flat(&[2, 3], vec![rat(1, 3), rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 3), rat(1, 3)])?;
    println!("MMD²(uniform, Q) = {}", kernel.mmd2(&p, &q)?);
    println!("embedding of Q = {}", kernel.embed(q.measure())?);

    let to_float = |d: &JointDistribution<Rational>| JointDistribution::new(d.measure().map(Scalar::to_f64));
    let approx = kernel.to_f64().mmd2(&to_float(&p)?, &to_float(&q)?)?;
    println!("the same MMD² in floating point: {approx:.12}");
    Ok(())
}
