use ndarray::Array2;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use tklab::hsic::{dhsic_from_grams, dhsic_vstat, empirical_joint, population_hsic, SampleBlock};
use tklab::measure::{class_membership, i_class_element, outer, product_measure};
use tklab::property::{decide_product_properties, Certificate};
use tklab::witness::{
    find_embedding_collision, search_i_witness, thm2ii_construct, verify_witness, SearchConfig, PARITY_CONSTRAINTS,
};
use tklab::{
    rat, ContinuousKernel, FiniteKernel, JointDistribution, ProductKernel, Property, Rational, SignedMeasure, Status,
};

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn rational_vec(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(small_rational(), n)
}

/// `B Bᵀ` for an integer `B` of size `n × rank`.
fn gram(n: usize) -> impl Strategy<Value = FiniteKernel<Rational>> {
    (1..=n).prop_flat_map(move |rank| prop::collection::vec(prop::collection::vec(-2i64..=2, rank), n)).prop_map(
        move |b| {
            FiniteKernel::from_fn(n, |i, j| {
                Rational::from_integer(b[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum::<i64>().into())
            })
            .unwrap()
        },
    )
}

fn grams(sizes: Vec<usize>) -> impl Strategy<Value = Vec<FiniteKernel<Rational>>> {
    sizes.into_iter().map(gram).collect::<Vec<_>>()
}

fn shape(max_order: usize, max_size: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=max_size, 1..=max_order)
}

fn product_setup() -> impl Strategy<Value = (Vec<FiniteKernel<Rational>>, Vec<Vec<Rational>>)> {
    shape(3, 3).prop_flat_map(|s| (grams(s.clone()), s.iter().map(|&n| rational_vec(n)).collect::<Vec<_>>()))
}

fn measure_setup() -> impl Strategy<Value = (Vec<FiniteKernel<Rational>>, SignedMeasure<Rational>)> {
    shape(3, 3).prop_flat_map(|s| {
        let total = s.iter().product();
        (grams(s.clone()), rational_vec(total).prop_map(move |v| SignedMeasure::new(&s, v).unwrap()))
    })
}

fn joint(shape: Vec<usize>) -> impl Strategy<Value = JointDistribution<Rational>> {
    let total: usize = shape.iter().product();
    prop::collection::vec(0i64..=5, total).prop_filter("nonzero mass", |w| w.iter().any(|&x| x > 0)).prop_map(
        move |w| {
            let s: i64 = w.iter().sum();
            JointDistribution::from_flat(&shape, w.iter().map(|&x| rat(x, s)).collect()).unwrap()
        },
    )
}

fn brute_force(kernel: &ProductKernel<Rational>, f: &SignedMeasure<Rational>) -> Rational {
    let flat = f.to_flat();
    let g = kernel.kronecker_gram();
    let mut acc = Rational::zero();
    for i in 0..flat.len() {
        for j in 0..flat.len() {
            acc += &flat[i] * &g[[i, j]] * &flat[j];
        }
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn marginal_of_product_is_scaled_factor((_, factors) in product_setup()) {
        let measures: Vec<SignedMeasure<Rational>> = factors.iter().map(|f| SignedMeasure::vector(f.clone()).unwrap()).collect();
        let p = product_measure(&measures).unwrap();
        for m in 0..factors.len() {
            let scale = factors.iter().enumerate().filter(|&(n, _)| n != m).fold(rat(1, 1), |acc, (_, f)| acc * tklab::measure::total(f));
            let expected: Vec<Rational> = factors[m].iter().map(|x| x * &scale).collect();
            prop_assert_eq!(p.marginal(m).unwrap().to_flat(), expected);
        }
    }

    #[test]
    fn i_class_marginals_vanish(p in shape(3, 3).prop_filter("M ≥ 2", |s| s.len() >= 2).prop_flat_map(joint)) {
        let a = i_class_element(&p).unwrap();
        prop_assert!(a.marginal_vectors().iter().flatten().all(Zero::is_zero));
        prop_assert!(a.mass().is_zero());
    }

    #[test]
    fn flattening_round_trips(s in shape(4, 5)) {
        let total: usize = s.iter().product();
        let entries: Vec<Rational> = (0..total as i64).map(|i| rat(i - 7, 3)).collect();
        let m = SignedMeasure::new(&s, entries.clone()).unwrap();
        prop_assert_eq!(m.to_flat(), entries);
        prop_assert_eq!(SignedMeasure::from_array(m.coefficients().clone()).unwrap(), m);
    }

    #[test]
    fn quad_form_is_nonnegative_and_matches_brute_force((ks, f) in measure_setup()) {
        let kernel = ProductKernel::new(ks).unwrap();
        let q = kernel.quad_form(&f).unwrap();
        prop_assert!(!q.is_negative());
        prop_assert_eq!(q, brute_force(&kernel, &f));
    }

    #[test]
    fn quad_form_is_quadratic((ks, f) in measure_setup(), alpha in small_rational()) {
        let kernel = ProductKernel::new(ks).unwrap();
        let q = kernel.quad_form(&f).unwrap();
        prop_assert_eq!(kernel.quad_form(&f.scaled(&alpha)).unwrap(), &alpha * &alpha * q);
    }

    #[test]
    fn quad_form_factorizes_on_products((ks, factors) in product_setup()) {
        let kernel = ProductKernel::new(ks.clone()).unwrap();
        let lhs = kernel.quad_form(&outer(&factors).unwrap()).unwrap();
        let rhs = ks.iter().zip(&factors).fold(rat(1, 1), |acc, (k, f)| acc * k.quad(f));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn universality_of_product_matches_components(ks in prop::collection::vec(2usize..=3, 2..=3).prop_flat_map(grams)) {
        let explicit = FiniteKernel::new(ProductKernel::new(ks.clone()).unwrap().kronecker_gram()).unwrap();
        let direct = tklab::property::is_universal_finite(&explicit).status;
        let report = decide_product_properties(&ks).unwrap();
        prop_assert_eq!(report.status(Property::Universal), direct);
        prop_assert_eq!(report.status(Property::TensorCharacteristic), direct);
        prop_assert_eq!(report.status(Property::Characteristic), direct);
    }

    #[test]
    fn failing_certificates_are_exact(ks in prop::collection::vec(1usize..=3, 1..=3).prop_flat_map(grams)) {
        let kernel = ProductKernel::new(ks.clone()).unwrap();
        let report = decide_product_properties(&ks).unwrap();
        for (m, c) in report.components.iter().enumerate() {
            for v in [&c.characteristic, &c.universal] {
                if let Some(Certificate::Witness(w)) = &v.certificate {
                    prop_assert_eq!(v.status, Status::Fails);
                    prop_assert!(!w.is_zero());
                    prop_assert!(class_membership(w, v.property.class()).member);
                    prop_assert!(ks[m].quad(&w.to_flat()).is_zero());
                }
            }
        }
        for v in report.product.values() {
            match &v.certificate {
                Some(Certificate::Witness(w)) => {
                    prop_assert_eq!(v.status, Status::Fails);
                    prop_assert!(!w.is_zero());
                    prop_assert!(class_membership(w, v.property.class()).member);
                    prop_assert!(kernel.quad_form(w).unwrap().is_zero());
                }
                Some(Certificate::IWitness(r)) => {
                    prop_assert_eq!(v.status, Status::Fails);
                    prop_assert!(verify_witness(&kernel, r).unwrap().ok);
                }
                _ => {}
            }
        }
    }

    #[test]
    fn adding_a_universal_component_keeps_verdicts(
        ks in prop::collection::vec(2usize..=3, 2..=3).prop_flat_map(grams),
        n in 2usize..=3,
    ) {
        let base = decide_product_properties(&ks).unwrap();
        let mut extended = ks.clone();
        extended.push(FiniteKernel::delta(n));
        let report = decide_product_properties(&extended).unwrap();
        for p in [Property::Universal, Property::Characteristic, Property::TensorCharacteristic, Property::Tensor0Characteristic] {
            prop_assert_eq!(report.status(p), base.status(p), "{}", p);
        }
    }

    #[test]
    fn parity_groups_match_mass_and_quad_form(entries in prop::collection::vec(-2i64..=2, 8), scale in 1i64..=8) {
        let a = SignedMeasure::new(&[2, 2, 2], entries.iter().map(|&x| rat(x, scale)).collect()).unwrap();
        let kernel = ProductKernel::new(vec![FiniteKernel::signed_delta(); 3]).unwrap();
        let groups_vanish = PARITY_CONSTRAINTS.iter().all(|group| {
            group.iter().fold(Rational::zero(), |acc, idx| acc + a.get(idx)).is_zero()
        });
        let exact = a.mass().is_zero() && kernel.quad_form(&a).unwrap().is_zero();
        prop_assert_eq!(groups_vanish, exact);
    }

    #[test]
    fn collision_constructions_are_witnesses(
        k in (2usize..=4).prop_flat_map(gram),
        extra in 0usize..=2,
    ) {
        let k1 = FiniteKernel::from_fn(k.size(), |i, j| &k.gram()[[i, j]] + rat(1, 1)).unwrap();
        if let Some((p, q)) = find_embedding_collision(&k1) {
            let mut comps = vec![k1, FiniteKernel::delta(2)];
            let mut tails = Vec::new();
            for _ in 0..extra {
                comps.push(FiniteKernel::signed_delta());
                tails.push(vec![rat(1, 3), rat(2, 3)]);
            }
            let kernel = ProductKernel::new(comps).unwrap();
            let (_, report) = thm2ii_construct(&kernel, (&p, &q), (0, 1), &tails).unwrap();
            prop_assert!(report.is_certified());
            prop_assert!(report.witness.marginal_vectors().iter().flatten().all(Zero::is_zero));
            prop_assert!(kernel.quad_form(&report.witness).unwrap().is_zero());
        }
    }

    #[test]
    fn dhsic_is_permutation_invariant_and_nonnegative(
        rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 2..30),
        shift in 0usize..30,
    ) {
        let n = rows.len();
        let data = Array2::from_shape_fn((n, 3), |(i, j)| rows[i][j]);
        let rotated = Array2::from_shape_fn((n, 3), |(i, j)| rows[(i + shift) % n][j]);
        let groups = vec![vec![0], vec![1, 2]];
        let kernels = vec![ContinuousKernel::gaussian(1.0, 1).unwrap(), ContinuousKernel::laplacian(0.7, 2).unwrap()];
        let a = dhsic_vstat(&SampleBlock::from_columns(data.view(), &groups).unwrap(), &kernels).unwrap();
        let b = dhsic_vstat(&SampleBlock::from_columns(rotated.view(), &groups).unwrap(), &kernels).unwrap();
        prop_assert!(a >= -1e-12);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn plug_in_matches_population(codes in prop::collection::vec((0usize..2, 0usize..3), 1..40)) {
        let data = Array2::from_shape_fn((codes.len(), 2), |(i, j)| if j == 0 { codes[i].0 as f64 } else { codes[i].1 as f64 });
        let groups = vec![vec![0], vec![1]];
        let kernels = vec![ContinuousKernel::discrete_delta(1), ContinuousKernel::discrete_delta(1)];
        let stat = dhsic_vstat(&SampleBlock::from_columns(data.view(), &groups).unwrap(), &kernels).unwrap();
        let p = empirical_joint(&[2, 3], &codes.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>()).unwrap();
        let kernel = ProductKernel::new(vec![FiniteKernel::delta(2), FiniteKernel::delta(3)]).unwrap();
        let exact = population_hsic(&kernel, &p).unwrap();
        prop_assert!((stat - tklab::Scalar::to_f64(&exact)).abs() <= 1e-10);
    }

    #[test]
    fn dhsic_from_grams_is_nonnegative(xs in prop::collection::vec(-1e3f64..1e3, 2..20)) {
        let n = xs.len();
        let g = Array2::from_shape_fn((n, n), |(i, j)| (-(xs[i] - xs[j]).powi(2)).exp());
        let h = Array2::from_shape_fn((n, n), |(i, j)| if (xs[i] > 0.0) == (xs[j] > 0.0) { 1.0 } else { 0.0 });
        prop_assert!(dhsic_from_grams(&[g, h]).unwrap() >= -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn search_is_deterministic(seed in 0u64..1000) {
        let kernel = ProductKernel::new(vec![FiniteKernel::signed_delta(); 3]).unwrap();
        let config = SearchConfig { budget: 2_000, seed, delta: 0.01 };
        let a = search_i_witness(&kernel, &config).unwrap();
        let b = search_i_witness(&kernel, &config).unwrap();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
