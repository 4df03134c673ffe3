//! Certified decisions of the characteristic-type properties of product kernels.
//!
//! A kernel `k` on `X` is *F-ispd* for a class `F` of finite signed measures
//! when `‖μ_k(F)‖² > 0` for every nonzero `F ∈ F`. The five properties and
//! their classes:
//!
//! | property | class of `F` |
//! |----------|--------------|
//! | universal | all finite signed measures |
//! | characteristic | zero total mass |
//! | ⊗-characteristic (`tensor-char`) | product measures `⊗ F_m` with zero total mass |
//! | ⊗₀-characteristic (`tensor0-char`) | product measures with every `F_m` of zero mass |
//! | I-characteristic (`I-char`) | `P − ⊗ P_m` for joint distributions `P` |
//!
//! On a finite space universality is strict positive definiteness of the Gram
//! matrix (c₀- and c-universality coincide on compact discrete spaces).
//!
//! Every verdict carries a certificate: LDLᵀ pivots, an exact witness measure
//! with vanishing quadratic form, or the tag of the rule that implied it.
//! `Undecided` is explicit: for `M ≥ 3` characteristic but not all universal
//! components, no rule decides I-characteristic and the cell is left to the
//! witness search.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::kernel::{ContinuousKernel, FiniteKernel, ProductKernel};
use crate::measure::{outer, MeasureClass, SignedMeasure};
use crate::scalar::Rational;
use crate::witness::{self, WitnessReport};
use crate::{Error, Result};

/// Citation tags attached to rule-derived verdicts.
pub mod tags {
    /// Universal product iff universal components.
    pub const PRODUCT_UNIVERSAL: &str = "Thm4";
    /// Two characteristic components give an I-characteristic product.
    pub const TWO_CHARACTERISTIC: &str = "Thm2i";
    /// I-characteristic product needs characteristic components.
    pub const NEEDS_CHARACTERISTIC: &str = "Thm2ii";
    /// Translation-invariant equivalences via spectral support.
    pub const TRANSLATION_INVARIANT: &str = "Thm3";
    /// ⊗₀-characteristic iff characteristic components (product factorization).
    pub const FACTORIZATION: &str = "Rem1iii";
    /// Implication chain between the classes.
    pub const IMPLICATION: &str = "Rem1v";
    /// For products: ⊗-characteristic ⇔ characteristic ⇔ universal.
    pub const PRODUCT_EQUIVALENCE: &str = "Rem4";
    /// The class contains only the zero measure.
    pub const VACUOUS: &str = "vacuous";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Property {
    #[serde(rename = "characteristic")]
    Characteristic,
    #[serde(rename = "universal")]
    Universal,
    #[serde(rename = "tensor0-char")]
    Tensor0Characteristic,
    #[serde(rename = "tensor-char")]
    TensorCharacteristic,
    #[serde(rename = "I-char")]
    ICharacteristic,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::Characteristic,
        Property::Universal,
        Property::Tensor0Characteristic,
        Property::TensorCharacteristic,
        Property::ICharacteristic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Characteristic => "characteristic",
            Property::Universal => "universal",
            Property::Tensor0Characteristic => "tensor0-char",
            Property::TensorCharacteristic => "tensor-char",
            Property::ICharacteristic => "I-char",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Parse(format!("unknown property {name:?}")))
    }

    /// The measure class whose nonzero members must have positive quadratic form.
    pub fn class(self) -> MeasureClass {
        match self {
            Property::Characteristic => MeasureClass::Mb0,
            Property::Universal => MeasureClass::Mb,
            Property::Tensor0Characteristic => MeasureClass::ProdMb0,
            Property::TensorCharacteristic => MeasureClass::SumZeroProduct,
            Property::ICharacteristic => MeasureClass::I,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Holds,
    Fails,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ExactLinearAlgebra,
    TheoremInference,
    Search,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// Positive LDLᵀ pivots of the relevant Gram (or its zero-sum compression).
    Pivots(Vec<Rational>),
    /// A nonzero member of the property's class with zero quadratic form.
    Witness(SignedMeasure<Rational>),
    /// An I-class witness together with the joint distribution generating it.
    IWitness(Box<WitnessReport>),
    /// Implied by a rule from other verdicts.
    Rule { tag: &'static str, premises: Vec<String> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub property: Property,
    pub status: Status,
    pub certificate: Option<Certificate>,
    pub provenance: Provenance,
    pub citation: Option<&'static str>,
}

impl Verdict {
    pub fn holds(
        property: Property,
        certificate: Certificate,
        provenance: Provenance,
        citation: Option<&'static str>,
    ) -> Self {
        Self { property, status: Status::Holds, certificate: Some(certificate), provenance, citation }
    }

    pub fn fails(
        property: Property,
        certificate: Certificate,
        provenance: Provenance,
        citation: Option<&'static str>,
    ) -> Self {
        Self { property, status: Status::Fails, certificate: Some(certificate), provenance, citation }
    }

    pub fn undecided(property: Property) -> Self {
        Self {
            property,
            status: Status::Undecided,
            certificate: None,
            provenance: Provenance::TheoremInference,
            citation: None,
        }
    }

    /// The witness measure, if the certificate carries one.
    pub fn witness(&self) -> Option<&SignedMeasure<Rational>> {
        match &self.certificate {
            Some(Certificate::Witness(w)) => Some(w),
            Some(Certificate::IWitness(r)) => Some(&r.witness),
            _ => None,
        }
    }

    fn rule(property: Property, status: Status, tag: &'static str, premises: Vec<String>) -> Self {
        Self {
            property,
            status,
            certificate: Some(Certificate::Rule { tag, premises }),
            provenance: Provenance::TheoremInference,
            citation: Some(tag),
        }
    }
}

/// Verdicts for one component kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentVerdicts {
    pub characteristic: Verdict,
    pub universal: Verdict,
}

pub type VerdictSet = BTreeMap<Property, Verdict>;

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub components: Vec<ComponentVerdicts>,
    pub product: VerdictSet,
    /// Human-readable derivation steps in the order they were taken.
    pub trace: Vec<String>,
    /// Whether the product-specific equivalence (⊗-char ⇒ universal) applies.
    pub product_rule: bool,
}

impl PropertyReport {
    pub fn status(&self, p: Property) -> Status {
        self.product.get(&p).map_or(Status::Undecided, |v| v.status)
    }

    pub fn verdict(&self, p: Property) -> &Verdict {
        &self.product[&p]
    }

    /// Records an externally found I-class witness after verifying it exactly
    /// against `kernel`, then re-closes the report.
    pub fn refine_with_witness(&mut self, kernel: &ProductKernel<Rational>, w: &WitnessReport) -> Result<()> {
        let check = witness::verify_witness(kernel, w)?;
        if !check.ok || w.class != MeasureClass::I || w.joint.is_none() {
            return Err(Error::Constraint(format!("witness does not certify failure of I-char: {}", check.summary())));
        }
        let current = self.status(Property::ICharacteristic);
        if current == Status::Holds {
            return Err(Error::Inconsistent("verified I-class witness contradicts I-char: Holds".into()));
        }
        self.product.insert(
            Property::ICharacteristic,
            Verdict::fails(
                Property::ICharacteristic,
                Certificate::IWitness(Box::new(w.clone())),
                Provenance::Search,
                None,
            ),
        );
        self.trace.push(format!("I-char: Fails by verified {} witness", w.origin.name()));
        let (closed, steps) = apply_implication_closure(self.product.clone(), self.product_rule)?;
        self.product = closed;
        self.trace.extend(steps);
        Ok(())
    }
}

/// Universality of a finite kernel: strict positive definiteness of its Gram.
pub fn is_universal_finite(k: &FiniteKernel<Rational>) -> Verdict {
    let psd = k.psd_report();
    if psd.is_pd() {
        Verdict::holds(
            Property::Universal,
            Certificate::Pivots(psd.pivots.clone()),
            Provenance::ExactLinearAlgebra,
            None,
        )
    } else {
        let v = psd.null_vectors[0].clone();
        Verdict::fails(
            Property::Universal,
            Certificate::Witness(SignedMeasure::vector(v).expect("nonempty")),
            Provenance::ExactLinearAlgebra,
            None,
        )
    }
}

/// LDLᵀ of `BᵀGB`, with `B` the `n × (n−1)` basis `e_i − e_n` of zero-sum
/// vectors; `None` for a one-point space.
fn zero_sum_compression(k: &FiniteKernel<Rational>) -> Option<crate::linalg::PsdReport<Rational>> {
    let n = k.size();
    if n == 1 {
        return None;
    }
    let g = k.gram();
    let last = n - 1;
    let compressed = ndarray::Array2::from_shape_fn((last, last), |(i, j)| {
        &g[[i, j]] - &g[[i, last]] - &g[[last, j]] + &g[[last, last]]
    });
    Some(crate::linalg::ldl_exact(&compressed))
}

fn extend_zero_sum(w: &[Rational]) -> Vec<Rational> {
    let mut v = w.to_vec();
    v.push(-w.iter().fold(Rational::zero(), |a, x| a + x));
    v
}

/// Basis of the zero-sum vectors `v` with `vᵀGv = 0`; empty iff `k` is characteristic.
pub fn zero_sum_null_space(k: &FiniteKernel<Rational>) -> Vec<Vec<Rational>> {
    zero_sum_compression(k).map(|r| r.null_vectors.iter().map(|w| extend_zero_sum(w)).collect()).unwrap_or_default()
}

/// Characteristic property of a finite kernel: holds iff the Gram restricted
/// to zero-sum vectors, `BᵀGB`, is strictly PD.
pub fn is_characteristic_finite(k: &FiniteKernel<Rational>) -> Verdict {
    let Some(report) = zero_sum_compression(k) else {
        return Verdict::holds(
            Property::Characteristic,
            Certificate::Pivots(Vec::new()),
            Provenance::ExactLinearAlgebra,
            Some(tags::VACUOUS),
        );
    };
    if report.is_pd() {
        return Verdict::holds(
            Property::Characteristic,
            Certificate::Pivots(report.pivots),
            Provenance::ExactLinearAlgebra,
            None,
        );
    }
    Verdict::fails(
        Property::Characteristic,
        Certificate::Witness(SignedMeasure::vector(extend_zero_sum(&report.null_vectors[0])).expect("nonempty")),
        Provenance::ExactLinearAlgebra,
        None,
    )
}

fn component_verdicts(k: &FiniteKernel<Rational>) -> ComponentVerdicts {
    ComponentVerdicts { characteristic: is_characteristic_finite(k), universal: is_universal_finite(k) }
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::from_integer(1.into());
    v
}

fn difference_vector(n: usize) -> Vec<Rational> {
    let mut v = unit(n, 0);
    v[1] = Rational::from_integer((-1).into());
    v
}

fn witness_vector(v: &Verdict) -> Vec<Rational> {
    v.witness().expect("failing verdicts carry a witness").to_flat()
}

/// Decides all five properties of `⊗ k_m` for finite components.
///
/// Rules used, all on exact component verdicts:
/// * universal ⇔ every component universal;
/// * ⊗₀-characteristic ⇔ every component characteristic;
/// * with at least two nontrivial components, characteristic ⇔ ⊗-characteristic
///   ⇔ universal;
/// * I-characteristic holds when the product is universal or when `M = 2` and
///   both components are characteristic, and fails (with a constructed
///   witness) when some component is not characteristic.
pub fn decide_product_properties(components: &[FiniteKernel<Rational>]) -> Result<PropertyReport> {
    let kernel = ProductKernel::new(components.to_vec())?;
    let comps: Vec<ComponentVerdicts> = components.iter().map(component_verdicts).collect();
    let sizes = kernel.shape();
    let m_count = components.len();
    let nontrivial: Vec<usize> = (0..m_count).filter(|&m| sizes[m] >= 2).collect();
    let product_rule = nontrivial.len() >= 2;
    let mut trace = Vec::new();
    let mut product = VerdictSet::new();

    let failing_universal = comps.iter().position(|c| c.universal.status == Status::Fails);
    let failing_char = comps.iter().position(|c| c.characteristic.status == Status::Fails);

    // Universal.
    let universal = match failing_universal {
        None => {
            trace.push("universal: Holds, all components strictly PD".into());
            Verdict::rule(
                Property::Universal,
                Status::Holds,
                tags::PRODUCT_UNIVERSAL,
                (1..=m_count).map(|m| format!("k{m} universal")).collect(),
            )
        }
        Some(m) => {
            let factors: Vec<Vec<Rational>> = (0..m_count)
                .map(|n| if n == m { witness_vector(&comps[m].universal) } else { unit(sizes[n], 0) })
                .collect();
            trace.push(format!("universal: Fails, k{} has a null vector", m + 1));
            Verdict::fails(
                Property::Universal,
                Certificate::Witness(outer(&factors)?),
                Provenance::TheoremInference,
                Some(tags::PRODUCT_UNIVERSAL),
            )
        }
    };
    let universal_holds = universal.status == Status::Holds;
    product.insert(Property::Universal, universal);

    // Characteristic and ⊗-characteristic.
    if product_rule {
        if universal_holds {
            for p in [Property::Characteristic, Property::TensorCharacteristic] {
                product.insert(p, Verdict::rule(p, Status::Holds, tags::PRODUCT_EQUIVALENCE, vec!["universal".into()]));
            }
            trace.push("characteristic, tensor-char: Hold, equivalent to universal for products".into());
        } else {
            let m = comps.iter().rposition(|c| c.universal.status == Status::Fails).expect("universal fails");
            let v = witness_vector(&comps[m].universal);
            let zero_sum = crate::measure::total(&v).is_zero();
            let partner = nontrivial.iter().copied().find(|&n| n != m).expect("two nontrivial components");
            let factors: Vec<Vec<Rational>> = (0..m_count)
                .map(|n| {
                    if n == m {
                        v.clone()
                    } else if n == partner && !zero_sum {
                        difference_vector(sizes[n])
                    } else {
                        unit(sizes[n], 0)
                    }
                })
                .collect();
            let w = outer(&factors)?;
            for p in [Property::Characteristic, Property::TensorCharacteristic] {
                product.insert(
                    p,
                    Verdict::fails(
                        p,
                        Certificate::Witness(w.clone()),
                        Provenance::TheoremInference,
                        Some(tags::PRODUCT_EQUIVALENCE),
                    ),
                );
            }
            trace.push(format!(
                "characteristic, tensor-char: Fail, zero-mass product witness from the null vector of k{}",
                m + 1
            ));
        }
    } else {
        // At most one component has more than one point: decide on the explicit Gram.
        let explicit = FiniteKernel::new(kernel.kronecker_gram())?;
        let v = is_characteristic_finite(&explicit);
        for p in [Property::Characteristic, Property::TensorCharacteristic] {
            let verdict = match &v.certificate {
                Some(Certificate::Witness(w)) => Verdict::fails(
                    p,
                    Certificate::Witness(SignedMeasure::new(&sizes, w.to_flat())?),
                    Provenance::ExactLinearAlgebra,
                    None,
                ),
                Some(c) => Verdict::holds(p, c.clone(), Provenance::ExactLinearAlgebra, None),
                None => unreachable!("characteristic check always certifies"),
            };
            product.insert(p, verdict);
        }
        trace.push("characteristic, tensor-char: decided on the explicit Gram (single nontrivial component)".into());
    }

    // ⊗₀-characteristic.
    let tensor0 = if nontrivial.len() < m_count {
        trace.push("tensor0-char: Holds, a one-point component makes the class {0}".into());
        Verdict::rule(Property::Tensor0Characteristic, Status::Holds, tags::VACUOUS, vec![])
    } else if let Some(m) = failing_char {
        let v = witness_vector(&comps[m].characteristic);
        let factors: Vec<Vec<Rational>> =
            (0..m_count).map(|n| if n == m { v.clone() } else { difference_vector(sizes[n]) }).collect();
        trace.push(format!("tensor0-char: Fails, k{} is not characteristic", m + 1));
        Verdict::fails(
            Property::Tensor0Characteristic,
            Certificate::Witness(outer(&factors)?),
            Provenance::TheoremInference,
            Some(tags::FACTORIZATION),
        )
    } else {
        trace.push("tensor0-char: Holds, all components characteristic".into());
        Verdict::rule(
            Property::Tensor0Characteristic,
            Status::Holds,
            tags::FACTORIZATION,
            (1..=m_count).map(|m| format!("k{m} characteristic")).collect(),
        )
    };
    product.insert(Property::Tensor0Characteristic, tensor0);

    // I-characteristic.
    let all_char = failing_char.is_none();
    let i_char = if nontrivial.len() < 2 {
        trace.push("I-char: Holds, at most one nontrivial component makes I = {0}".into());
        Verdict::rule(Property::ICharacteristic, Status::Holds, tags::VACUOUS, vec![])
    } else if product[&Property::Characteristic].status == Status::Holds {
        trace.push("I-char: Holds, implied by characteristic".into());
        Verdict::rule(Property::ICharacteristic, Status::Holds, tags::IMPLICATION, vec!["characteristic".into()])
    } else if m_count == 2 && all_char {
        trace.push("I-char: Holds, two characteristic components".into());
        Verdict::rule(
            Property::ICharacteristic,
            Status::Holds,
            tags::TWO_CHARACTERISTIC,
            vec!["k1 characteristic".into(), "k2 characteristic".into()],
        )
    } else if let Some(m) = failing_char {
        let partner = nontrivial.iter().copied().find(|&n| n != m).expect("two nontrivial components");
        let (p, q) =
            witness::find_embedding_collision(&components[m]).expect("non-characteristic kernels have a collision");
        let tails: Vec<Vec<Rational>> =
            (0..m_count).filter(|&n| n != m && n != partner).map(|n| unit(sizes[n], 0)).collect();
        let (_, report) = witness::lift_collision(&kernel, m, (&p, &q), partner, (0, 1), &tails)?;
        trace.push(format!("I-char: Fails, witness lifted from an embedding collision of k{}", m + 1));
        Verdict::fails(
            Property::ICharacteristic,
            Certificate::IWitness(Box::new(report)),
            Provenance::TheoremInference,
            Some(tags::NEEDS_CHARACTERISTIC),
        )
    } else {
        trace.push(
            "I-char: Undecided, characteristic components with M ≥ 3 and not all universal; delegate to search".into(),
        );
        Verdict::undecided(Property::ICharacteristic)
    };
    product.insert(Property::ICharacteristic, i_char);

    let (product, steps) = apply_implication_closure(product, product_rule)?;
    trace.extend(steps);
    Ok(PropertyReport { components: comps, product, trace, product_rule })
}

/// A rule `premise(status) ⇒ conclusion(status)`; `transfers` when a witness of
/// the premise is also a witness for the conclusion.
struct Rule {
    premise: Property,
    conclusion: Property,
    status: Status,
    product_only: bool,
    transfers: bool,
}

const RULES: [Rule; 10] = {
    use Property::*;
    use Status::*;
    [
        Rule { premise: Universal, conclusion: Characteristic, status: Holds, product_only: false, transfers: false },
        Rule {
            premise: Characteristic,
            conclusion: TensorCharacteristic,
            status: Holds,
            product_only: false,
            transfers: false,
        },
        Rule {
            premise: TensorCharacteristic,
            conclusion: Tensor0Characteristic,
            status: Holds,
            product_only: false,
            transfers: false,
        },
        Rule {
            premise: Characteristic,
            conclusion: ICharacteristic,
            status: Holds,
            product_only: false,
            transfers: false,
        },
        Rule {
            premise: TensorCharacteristic,
            conclusion: Universal,
            status: Holds,
            product_only: true,
            transfers: false,
        },
        Rule {
            premise: Tensor0Characteristic,
            conclusion: TensorCharacteristic,
            status: Fails,
            product_only: false,
            transfers: true,
        },
        Rule {
            premise: TensorCharacteristic,
            conclusion: Characteristic,
            status: Fails,
            product_only: false,
            transfers: true,
        },
        Rule { premise: Characteristic, conclusion: Universal, status: Fails, product_only: false, transfers: true },
        Rule {
            premise: ICharacteristic,
            conclusion: Characteristic,
            status: Fails,
            product_only: false,
            transfers: true,
        },
        Rule {
            premise: Universal,
            conclusion: TensorCharacteristic,
            status: Fails,
            product_only: true,
            transfers: false,
        },
    ]
};

/// Closes a partial verdict set under the implication rules
/// universal ⇒ characteristic ⇒ ⊗-char ⇒ ⊗₀-char, characteristic ⇒ I-char and,
/// when `product_rule` is set, ⊗-char ⇒ universal, together with their
/// contrapositives. Missing properties come out `Undecided`. A derived status
/// opposite to a given one is an [`Error::Inconsistent`].
pub fn apply_implication_closure(mut facts: VerdictSet, product_rule: bool) -> Result<(VerdictSet, Vec<String>)> {
    facts.retain(|_, v| v.status != Status::Undecided);
    let mut trace = Vec::new();
    loop {
        let mut changed = false;
        for rule in RULES.iter().filter(|r| product_rule || !r.product_only) {
            let Some(src) = facts.get(&rule.premise) else { continue };
            if src.status != rule.status {
                continue;
            }
            let derived = match (rule.transfers, &src.certificate) {
                (true, Some(Certificate::Witness(w))) => Verdict {
                    property: rule.conclusion,
                    status: rule.status,
                    certificate: Some(Certificate::Witness(w.clone())),
                    provenance: Provenance::TheoremInference,
                    citation: Some(tags::IMPLICATION),
                },
                (true, Some(Certificate::IWitness(r))) => Verdict {
                    property: rule.conclusion,
                    status: rule.status,
                    certificate: Some(Certificate::Witness(r.witness.clone())),
                    provenance: Provenance::TheoremInference,
                    citation: Some(tags::IMPLICATION),
                },
                _ => {
                    let tag = if rule.product_only { tags::PRODUCT_EQUIVALENCE } else { tags::IMPLICATION };
                    Verdict::rule(
                        rule.conclusion,
                        rule.status,
                        tag,
                        vec![format!("{}: {:?}", rule.premise, rule.status)],
                    )
                }
            };
            match facts.get(&rule.conclusion) {
                Some(existing) if existing.status == rule.status => {}
                Some(existing) => {
                    return Err(Error::Inconsistent(format!(
                        "{}: {:?} implies {}: {:?}, but {}: {:?} was given",
                        rule.premise, rule.status, rule.conclusion, rule.status, rule.conclusion, existing.status
                    )));
                }
                None => {
                    trace.push(format!(
                        "{}: {:?} from {}: {:?}",
                        rule.conclusion, rule.status, rule.premise, rule.status
                    ));
                    facts.insert(rule.conclusion, derived);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    for p in Property::ALL {
        facts.entry(p).or_insert_with(|| Verdict::undecided(p));
    }
    Ok((facts, trace))
}

/// Classifies a product of translation-invariant kernels on `ℝ^{d_m}` from the
/// declared spectral support of each family.
///
/// Full support for every component: all five properties hold. Otherwise the
/// deficient component is not characteristic and every product property fails
/// (I-characteristic only for `M ≥ 2`; with `M = 1` the class `I` is `{0}`).
pub fn classify_translation_invariant(components: &[ContinuousKernel]) -> Result<PropertyReport> {
    if components.is_empty() {
        return Err(Error::EmptyFactors);
    }
    let mut comps = Vec::new();
    let mut deficient = None;
    for (m, k) in components.iter().enumerate() {
        let full = k.family().spectral_support_full().ok_or_else(|| {
            Error::InvalidKernel(format!(
                "component {} ({}) has no translation-invariant spectral metadata",
                m + 1,
                k.family().name()
            ))
        })?;
        if !full && deficient.is_none() {
            deficient = Some(m);
        }
        let status = if full { Status::Holds } else { Status::Fails };
        let premise =
            vec![format!("spectral support of {} {}", k.family().name(), if full { "is full" } else { "is not full" })];
        comps.push(ComponentVerdicts {
            characteristic: Verdict::rule(
                Property::Characteristic,
                status,
                tags::TRANSLATION_INVARIANT,
                premise.clone(),
            ),
            universal: Verdict::rule(Property::Universal, status, tags::TRANSLATION_INVARIANT, premise),
        });
    }
    let mut product = VerdictSet::new();
    let mut trace = Vec::new();
    match deficient {
        None => {
            for p in Property::ALL {
                let tag = if p == Property::Universal { tags::PRODUCT_UNIVERSAL } else { tags::TRANSLATION_INVARIANT };
                product.insert(p, Verdict::rule(p, Status::Holds, tag, vec!["all spectral supports full".into()]));
            }
            trace.push("all components have full spectral support: all properties Hold".into());
        }
        Some(m) => {
            let premise = vec![format!("k{} not characteristic", m + 1)];
            for p in Property::ALL {
                let (status, tag) = match p {
                    Property::ICharacteristic if components.len() == 1 => (Status::Holds, tags::VACUOUS),
                    Property::ICharacteristic => (Status::Fails, tags::NEEDS_CHARACTERISTIC),
                    Property::Tensor0Characteristic => (Status::Fails, tags::FACTORIZATION),
                    Property::Universal => (Status::Fails, tags::PRODUCT_UNIVERSAL),
                    _ => (Status::Fails, tags::TRANSLATION_INVARIANT),
                };
                product.insert(p, Verdict::rule(p, status, tag, premise.clone()));
            }
            trace.push(format!("k{} lacks full spectral support: product properties Fail", m + 1));
        }
    }
    let (product, steps) = apply_implication_closure(product, components.len() >= 2)?;
    trace.extend(steps);
    Ok(PropertyReport { components: comps, product, trace, product_rule: components.len() >= 2 })
}
