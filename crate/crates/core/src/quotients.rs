//! Quotients of products by kernels of computable homomorphisms.
//!
//! A [`QuotientOracle`] assigns every product point a [`CosetKey`] that is
//! constant on cosets `gN`. Enumerating the orbit points of a ball and keeping
//! the shortest point per key gives a minimal section and the quotient ball
//! counts for the induced pseudo-metric.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::automata::CountSequence;
use crate::error::{invalid, Error, Result};
use crate::growth::{GrowthBracket, Method, Regime};
use crate::products::{bracket_from_balls, duality_bracket, factor_brackets, product_count_sequence, Exponent, LpProductSpec, ProductPoint};
use crate::scalar::Real;
use crate::tree_geometry::ghat_membership_exact;
use crate::words::{EnumerationLimits, ReducedWord};

/// Canonical identifier of a coset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum CosetKey {
    Words(Vec<ReducedWord>),
    Ints(Vec<i64>),
    Label(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuotientOracle {
    /// Kernel of the projection forgetting the listed coordinates.
    FactorKernel { killed: Vec<usize> },
    /// Kernel of the map to exponent-sum vectors of every coordinate.
    Abelianization,
    /// Kernel of `x ↦ Σ_i Σ_j coefficients[i][j] · (exponent sum of generator j in x_i)`.
    HomomorphismToIntegers { coefficients: Vec<Vec<i64>> },
    /// Explicit keys for listed points; every other point is its own coset.
    UserTable { table: BTreeMap<String, String> },
}

impl QuotientOracle {
    /// Checks the oracle against the shape of a product.
    pub fn validate<T: Real>(&self, spec: &LpProductSpec<T>) -> Result<()> {
        match self {
            QuotientOracle::FactorKernel { killed } => {
                if let Some(&i) = killed.iter().find(|&&i| i >= spec.n()) {
                    return Err(invalid(format!("killed factor {i} does not exist")));
                }
            }
            QuotientOracle::HomomorphismToIntegers { coefficients } => {
                if coefficients.len() != spec.n() {
                    return Err(invalid(format!(
                        "need coefficients for {} factors, got {}",
                        spec.n(),
                        coefficients.len()
                    )));
                }
                for (i, (c, f)) in coefficients.iter().zip(spec.factors()).enumerate() {
                    if c.len() != f.alphabet().rank() {
                        return Err(invalid(format!(
                            "factor {i} has rank {}, got {} coefficients",
                            f.alphabet().rank(),
                            c.len()
                        )));
                    }
                }
            }
            QuotientOracle::Abelianization | QuotientOracle::UserTable { .. } => {}
        }
        Ok(())
    }

    pub fn key(&self, x: &ProductPoint) -> CosetKey {
        match self {
            QuotientOracle::FactorKernel { killed } => CosetKey::Words(
                x.coords()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !killed.contains(i))
                    .map(|(_, w)| w.clone())
                    .collect(),
            ),
            QuotientOracle::Abelianization => {
                CosetKey::Ints(x.coords().iter().flat_map(|w| w.exponent_sums()).collect())
            }
            QuotientOracle::HomomorphismToIntegers { coefficients } => {
                let v = x
                    .coords()
                    .iter()
                    .zip(coefficients)
                    .map(|(w, c)| w.exponent_sums().iter().zip(c).map(|(e, k)| e * k).sum::<i64>())
                    .sum();
                CosetKey::Ints(vec![v])
            }
            QuotientOracle::UserTable { table } => match table.get(&x.to_string()) {
                Some(label) => CosetKey::Label(label.clone()),
                None => CosetKey::Words(x.coords().to_vec()),
            },
        }
    }

    pub fn contains(&self, x: &ProductPoint, identity: &ProductPoint) -> bool {
        self.key(x) == self.key(identity)
    }

    /// Factors killed outright, for factor kernels.
    pub fn killed_factors(&self) -> Option<&[usize]> {
        match self {
            QuotientOracle::FactorKernel { killed } => Some(killed),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectionEntry<T> {
    pub representative: ProductPoint,
    pub lengths: Vec<usize>,
    pub length: T,
}

/// One shortest representative per coset realised within the radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimalSection<T> {
    pub radius: usize,
    pub entries: BTreeMap<CosetKey, SectionEntry<T>>,
}

/// Calls `visit` on every product point of `L^p` length at most `radius`.
fn for_each_point<T: Real>(
    spec: &LpProductSpec<T>,
    radius: usize,
    limits: &EnumerationLimits,
    mut visit: impl FnMut(&ProductPoint, &[usize]),
) -> Result<()> {
    let balls = spec
        .factors()
        .iter()
        .map(|f| f.ball(radius, limits))
        .collect::<Result<Vec<_>>>()?;
    let total = balls
        .iter()
        .fold(1u128, |acc, b| acc.saturating_mul(b.len() as u128));
    if total > limits.max_words {
        return Err(Error::ResourceLimit(format!(
            "product ball of radius {radius} spans {total} tuples, budget is {}",
            limits.max_words
        )));
    }
    let n = balls.len();
    let r = T::from_usize_exact(radius);
    let mut idx = vec![0usize; n];
    let mut lengths = vec![0usize; n];
    loop {
        let coords: Vec<ReducedWord> = (0..n).map(|i| balls[i][idx[i]].clone()).collect();
        for (l, c) in lengths.iter_mut().zip(&coords) {
            *l = c.len();
        }
        if spec.p().within(&lengths, r) {
            visit(&ProductPoint::new(coords), &lengths);
        }
        let mut i = 0;
        while i < n {
            idx[i] += 1;
            if idx[i] < balls[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == n {
            return Ok(());
        }
    }
}

/// Shortest representative of each key, ties broken coordinate-wise shortlex.
pub fn minimal_section<T: Real>(
    spec: &LpProductSpec<T>,
    oracle: &QuotientOracle,
    radius: usize,
    limits: &EnumerationLimits,
) -> Result<MinimalSection<T>> {
    oracle.validate(spec)?;
    let p = spec.p();
    let mut best: HashMap<CosetKey, (ProductPoint, Vec<usize>)> = HashMap::new();
    for_each_point(spec, radius, limits, |x, lengths| {
        let key = oracle.key(x);
        match best.get_mut(&key) {
            Some(entry) => {
                let better = match p.cmp_norms(lengths, &entry.1) {
                    Ordering::Less => true,
                    Ordering::Equal => x < &entry.0,
                    Ordering::Greater => false,
                };
                if better {
                    *entry = (x.clone(), lengths.to_vec());
                }
            }
            None => {
                best.insert(key, (x.clone(), lengths.to_vec()));
            }
        }
    })?;
    let entries = best
        .into_iter()
        .map(|(k, (x, lengths))| {
            let length = p.norm(&lengths.iter().map(|&l| T::from_usize_exact(l)).collect::<Vec<_>>());
            (
                k,
                SectionEntry {
                    representative: x,
                    lengths,
                    length,
                },
            )
        })
        .collect();
    Ok(MinimalSection { radius, entries })
}

/// Number of cosets first realised at each integer radius; `balls()` of the result
/// counts the cosets within each radius.
pub fn quotient_ball_counts<T: Real>(
    spec: &LpProductSpec<T>,
    oracle: &QuotientOracle,
    radius: usize,
    limits: &EnumerationLimits,
) -> Result<CountSequence> {
    let section = minimal_section(spec, oracle, radius, limits)?;
    Ok(section_counts(spec.p(), &section))
}

/// Coset counts per integer radius for a computed section.
pub fn section_counts<T: Real>(p: Exponent<T>, section: &MinimalSection<T>) -> CountSequence {
    let mut spheres = vec![num_bigint::BigUint::from(0u32); section.radius + 1];
    for e in section.entries.values() {
        spheres[p.ceil_norm(&e.lengths)] += 1u32;
    }
    CountSequence::new(spheres)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropMinimalReport {
    pub radius: usize,
    pub k: usize,
    pub entries_checked: usize,
    /// Representatives with no coordinate in Ĝ_i(K).
    pub counterexamples: Vec<ProductPoint>,
}

impl PropMinimalReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Checks that every representative has a coordinate `a_i` in Ĝ(K) for `h_i`.
pub fn check_section_entries<'a>(
    entries: impl IntoIterator<Item = &'a ProductPoint>,
    h_tuple: &ProductPoint,
    k: usize,
    radius: usize,
) -> Result<PropMinimalReport> {
    let mut counterexamples = Vec::new();
    let mut checked = 0;
    for a in entries {
        checked += 1;
        let mut some_in = false;
        for (ai, hi) in a.coords().iter().zip(h_tuple.coords()) {
            if ghat_membership_exact(ai, hi, k)? {
                some_in = true;
                break;
            }
        }
        if !some_in {
            counterexamples.push(a.clone());
        }
    }
    Ok(PropMinimalReport {
        radius,
        k,
        entries_checked: checked,
        counterexamples,
    })
}

/// Builds the minimal section at `radius` and checks it with [`check_section_entries`].
pub fn check_prop_minimal<T: Real>(
    spec: &LpProductSpec<T>,
    oracle: &QuotientOracle,
    h_tuple: &ProductPoint,
    k: usize,
    radius: usize,
    limits: &EnumerationLimits,
) -> Result<PropMinimalReport> {
    oracle.validate(spec)?;
    if h_tuple.coords().len() != spec.n() {
        return Err(invalid("h tuple has the wrong number of coordinates"));
    }
    if h_tuple.coords().iter().any(ReducedWord::is_identity) {
        return Err(invalid("every coordinate of the h tuple must be non-trivial"));
    }
    if !oracle.contains(h_tuple, &ProductPoint::identity(spec)) {
        return Err(invalid(format!("{h_tuple} is not in the kernel")));
    }
    let section = minimal_section(spec, oracle, radius, limits)?;
    check_section_entries(
        section.entries.values().map(|e| &e.representative),
        h_tuple,
        k,
        radius,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Tight,
    NotTight,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real + Serialize")]
pub struct TightnessReport<T> {
    pub p: Exponent<T>,
    pub n: usize,
    pub delta_g: GrowthBracket<T>,
    pub delta_gn: GrowthBracket<T>,
    /// Fekete brackets from exact counts, as a cross-check.
    pub delta_g_counts: GrowthBracket<T>,
    pub delta_gn_counts: GrowthBracket<T>,
    /// `delta_g.lower - delta_gn.upper`.
    pub gap: T,
    /// `p = 1`, `n > 1` and the oracle kills a slowest factor.
    pub structural_witness: bool,
    pub verdict: Verdict,
}

/// Compares the exponent of the product with that of its quotient.
///
/// The product exponent is the duality norm of spectral factor brackets. For
/// factor kernels the quotient is the surviving sub-product, treated the same
/// way; other oracles use a Fekete bracket on exact quotient counts up to
/// `radius`.
pub fn tightness_verdict<T: Real>(
    spec: &LpProductSpec<T>,
    oracle: &QuotientOracle,
    radius: usize,
    tol: T,
    limits: &EnumerationLimits,
) -> Result<TightnessReport<T>> {
    oracle.validate(spec)?;
    let spectral_tol = T::lit(1e-9).max(T::epsilon() * T::lit(1e4));
    let factors = factor_brackets(spec, spectral_tol)?;
    let delta_g = duality_bracket(&factors, spec.p())?;
    let counts = spec.factor_counts(radius);
    let delta_g_counts = bracket_from_balls(&product_count_sequence(spec, &counts, radius)?.balls())?;

    let (delta_gn, delta_gn_counts, structural_witness) = match oracle.killed_factors() {
        Some(killed) => {
            let keep: Vec<usize> = (0..spec.n()).filter(|i| !killed.contains(i)).collect();
            if keep.is_empty() {
                let none = GrowthBracket::neg_infinity(Method::Duality);
                (none.clone(), none, false)
            } else {
                let kept: Vec<GrowthBracket<T>> = keep.iter().map(|&i| factors[i].clone()).collect();
                let sub = spec.restrict(&keep)?;
                let sub_counts: Vec<CountSequence> = keep.iter().map(|&i| counts[i].clone()).collect();
                let from_counts = bracket_from_balls(&product_count_sequence(&sub, &sub_counts, radius)?.balls())?;
                let slowest = factors
                    .iter()
                    .map(|b| b.estimate)
                    .fold(T::infinity(), T::min);
                let kills_slowest = killed
                    .iter()
                    .any(|&i| factors[i].estimate <= slowest + tol);
                let witness = spec.p().is_one() && spec.n() > 1 && kills_slowest;
                (duality_bracket(&kept, spec.p())?, from_counts, witness)
            }
        }
        None => {
            let seq = quotient_ball_counts(spec, oracle, radius, limits)?;
            let mut b = bracket_from_balls::<T>(&seq.balls())?;
            b.regime = Regime::Limsup;
            (b.clone(), b, false)
        }
    };
    let gap = delta_g.lower - delta_gn.upper;
    let separation = (delta_gn.lower - delta_g.upper)
        .max(delta_g.lower - delta_gn.upper)
        .max(T::zero());
    let verdict = if delta_gn.upper < delta_g.lower {
        Verdict::Tight
    } else if separation <= tol && structural_witness {
        Verdict::NotTight
    } else {
        Verdict::Inconclusive
    };
    Ok(TightnessReport {
        p: spec.p(),
        n: spec.n(),
        delta_g,
        delta_gn,
        delta_g_counts,
        delta_gn_counts,
        gap,
        structural_witness,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::products::Factor;
    use crate::words::{enumerate_ball, Alphabet};
    use num_bigint::BigUint;

    type Spec = LpProductSpec<f64>;

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn limits() -> EnumerationLimits {
        EnumerationLimits::default()
    }

    fn phi() -> QuotientOracle {
        QuotientOracle::HomomorphismToIntegers {
            coefficients: vec![vec![1, 0], vec![1, 0]],
        }
    }

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn abelianization_of_f2() {
        let s = Spec::free_power(2, 1, Exponent::Infinity).unwrap();
        let c = quotient_ball_counts(&s, &QuotientOracle::Abelianization, 2, &limits()).unwrap();
        assert_eq!(c.balls(), big(&[1, 5, 13]));
        let sec = minimal_section(&s, &QuotientOracle::Abelianization, 2, &limits()).unwrap();
        let e = &sec.entries[&CosetKey::Ints(vec![1, 0])];
        assert_eq!(e.representative.coords()[0], f2().parse_word("a").unwrap());
        assert_eq!(e.length, 1.0);
        let id = &sec.entries[&CosetKey::Ints(vec![0, 0])];
        assert!(id.representative.coords()[0].is_identity());
        assert_eq!(id.length, 0.0);
    }

    #[test]
    fn killing_everything_leaves_one_coset() {
        let s = Spec::free_power(2, 2, Exponent::Finite(1.0)).unwrap();
        let o = QuotientOracle::FactorKernel { killed: vec![0, 1] };
        let c = quotient_ball_counts(&s, &o, 3, &limits()).unwrap();
        assert_eq!(c.balls(), big(&[1, 1, 1, 1]));
    }

    #[test]
    fn factor_kernel_counts_equal_surviving_factor() {
        for p in [Exponent::Infinity, Exponent::Finite(1.0), Exponent::Finite(2.0)] {
            let s = Spec::free_power(2, 2, p).unwrap();
            let o = QuotientOracle::FactorKernel { killed: vec![1] };
            let c = quotient_ball_counts(&s, &o, 4, &limits()).unwrap();
            assert_eq!(c.balls(), big(&[1, 5, 17, 53, 161]));
        }
    }

    #[test]
    fn homomorphism_section_example() {
        let s = Spec::free_power(2, 2, Exponent::Infinity).unwrap();
        let sec = minimal_section(&s, &phi(), 3, &limits()).unwrap();
        let e = &sec.entries[&CosetKey::Ints(vec![1])];
        assert_eq!(e.length, 1.0);
        assert_eq!(e.representative, ProductPoint::parse(&s, &["1", "a"]).unwrap());
        assert_eq!(sec.entries.len(), 13);
    }

    #[test]
    fn section_is_minimal_by_brute_force() {
        let s = Spec::free_power(2, 2, Exponent::Finite(1.0)).unwrap();
        let o = QuotientOracle::Abelianization;
        let sec = minimal_section(&s, &o, 3, &limits()).unwrap();
        let ball = enumerate_ball(f2(), 3, &limits()).unwrap();
        for x in &ball {
            for y in &ball {
                if x.len() + y.len() > 3 {
                    continue;
                }
                let pt = ProductPoint::new(vec![x.clone(), y.clone()]);
                let e = &sec.entries[&o.key(&pt)];
                assert!(e.lengths.iter().sum::<usize>() <= x.len() + y.len());
            }
        }
        let larger = minimal_section(&s, &o, 4, &limits()).unwrap();
        for (k, e) in &sec.entries {
            assert_eq!(larger.entries[k].length, e.length);
        }
    }

    #[test]
    fn counts_are_invariant_under_kernel_base_points() {
        let s = Spec::free_power(2, 2, Exponent::Infinity).unwrap();
        let h = ProductPoint::parse(&s, &["a b", "b a-"]).unwrap();
        for o in [phi(), QuotientOracle::Abelianization] {
            let n = if o.contains(&h, &ProductPoint::identity(&s)) {
                h.clone()
            } else {
                ProductPoint::parse(&s, &["a b a- b-", "1"]).unwrap()
            };
            assert!(o.contains(&n, &ProductPoint::identity(&s)));
            for r in 0..=3 {
                let mut plain = std::collections::HashSet::new();
                let mut moved = std::collections::HashSet::new();
                for_each_point(&s, r, &limits(), |x, _| {
                    plain.insert(o.key(x));
                    moved.insert(o.key(&n.try_mul(x).unwrap()));
                })
                .unwrap();
                assert_eq!(plain, moved);
            }
        }
    }

    #[test]
    fn user_table_keys() {
        let s = Spec::free_power(2, 1, Exponent::Infinity).unwrap();
        let mut table = BTreeMap::new();
        table.insert("(a)".to_string(), "x".to_string());
        table.insert("(a-)".to_string(), "x".to_string());
        let o = QuotientOracle::UserTable { table };
        let c = quotient_ball_counts(&s, &o, 1, &limits()).unwrap();
        assert_eq!(c.balls(), big(&[1, 4]));
    }

    #[test]
    fn oracle_validation() {
        let s = Spec::free_power(2, 2, Exponent::Infinity).unwrap();
        let bad = QuotientOracle::HomomorphismToIntegers {
            coefficients: vec![vec![1, 0]],
        };
        assert!(minimal_section(&s, &bad, 1, &limits()).is_err());
        let bad = QuotientOracle::FactorKernel { killed: vec![2] };
        assert!(quotient_ball_counts(&s, &bad, 1, &limits()).is_err());
        let tight = EnumerationLimits {
            max_radius: 14,
            max_words: 100,
        };
        assert!(matches!(
            quotient_ball_counts(&s, &phi(), 4, &tight),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn prop_minimal_checks() {
        let s = Spec::free_power(2, 2, Exponent::Infinity).unwrap();
        let h = ProductPoint::parse(&s, &["a b", "b a-"]).unwrap();
        let r = check_prop_minimal(&s, &phi(), &h, 3, 4, &limits()).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = check_prop_minimal(&s, &phi(), &h, 14, 2, &limits()).unwrap();
        assert!(r.passed());

        let not_in = ProductPoint::parse(&s, &["a b", "b"]).unwrap();
        assert!(check_prop_minimal(&s, &phi(), &not_in, 3, 2, &limits()).is_err());

        // a representative running along both axes is not minimal and must be flagged
        let sec = minimal_section(&s, &phi(), 4, &limits()).unwrap();
        let mut reps: Vec<ProductPoint> = sec.entries.values().map(|e| e.representative.clone()).collect();
        let corrupt = ProductPoint::parse(&s, &["a b a b", "b a- b a-"]).unwrap();
        assert_eq!(phi().key(&corrupt), CosetKey::Ints(vec![0]));
        reps.push(corrupt.clone());
        let r = check_section_entries(&reps, &h, 3, 4).unwrap();
        assert_eq!(r.counterexamples, vec![corrupt]);
    }

    #[test]
    fn verdicts_for_free_square() {
        let l3 = 3f64.ln();
        let kill2 = QuotientOracle::FactorKernel { killed: vec![1] };
        let s = Spec::free_power(2, 2, Exponent::Infinity).unwrap();
        let r = tightness_verdict(&s, &kill2, 10, 0.08, &limits()).unwrap();
        assert_eq!(r.verdict, Verdict::Tight);
        assert!(r.gap >= 0.9 * l3);
        assert!(r.delta_gn.upper <= r.delta_g.upper);

        let s = Spec::free_power(2, 2, Exponent::Finite(1.0)).unwrap();
        let r = tightness_verdict(&s, &kill2, 10, 0.08, &limits()).unwrap();
        assert_eq!(r.verdict, Verdict::NotTight);
        assert!(r.delta_gn.contains(l3) && r.delta_g.contains(l3));

        let s = Spec::free_power(2, 2, Exponent::Finite(2.0)).unwrap();
        let r = tightness_verdict(&s, &kill2, 10, 0.08, &limits()).unwrap();
        assert_eq!(r.verdict, Verdict::Tight);

        let s = Spec::free_power(2, 1, Exponent::Infinity).unwrap();
        let r = tightness_verdict(&s, &QuotientOracle::Abelianization, 10, 0.08, &limits()).unwrap();
        assert_eq!(r.verdict, Verdict::Tight);
        assert_eq!(r.delta_gn.regime, Regime::Limsup);
    }

    #[test]
    fn p1_with_unequal_factors_kills_only_the_slowest() {
        let f3 = Alphabet::new(3).unwrap();
        let s = Spec::new(vec![Factor::Free(f2()), Factor::Free(f3)], Exponent::Finite(1.0)).unwrap();
        let slow = QuotientOracle::FactorKernel { killed: vec![0] };
        let r = tightness_verdict(&s, &slow, 8, 0.08, &limits()).unwrap();
        assert_eq!(r.verdict, Verdict::NotTight);
        let fast = QuotientOracle::FactorKernel { killed: vec![1] };
        let r = tightness_verdict(&s, &fast, 8, 0.08, &limits()).unwrap();
        assert_eq!(r.verdict, Verdict::Tight);
    }
}
