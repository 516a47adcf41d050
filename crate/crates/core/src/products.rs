//! `L^p` products of free groups and of factor languages.
//!
//! A point of the product is a tuple of reduced words; its distance to the
//! base point combines the coordinate word lengths by the `p`-norm. Ball counts
//! are lattice sums over coordinate radii of products of factor sphere counts,
//! and the growth exponent of the product is predicted by the `q`-norm of the
//! factor exponents, `1/p + 1/q = 1`.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::automata::{count_lengths, perron_root, reduced_word_automaton, CountSequence, CountingAutomaton};
use crate::error::{invalid, Error, Result};
use crate::growth::{check_subadditivity, fekete_bracket, GrowthBracket, Method, Regime};
use crate::scalar::{ln_big, Real};
use crate::words::{enumerate_ball, Alphabet, EnumerationLimits, Letter, ReducedWord};

/// Largest integral exponent handled by exact integer comparison.
const EXACT_POWER_LIMIT: u32 = 64;

/// An exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent<T> {
    Finite(T),
    Infinity,
}

impl<T: Real> Serialize for Exponent<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(p.to_f64().unwrap_or(f64::NAN)),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<T: Real> Exponent<T> {
    pub fn finite(p: T) -> Result<Self> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(invalid(format!("exponent must lie in [1, inf), got {p}")));
        }
        Ok(Exponent::Finite(p))
    }

    /// Parses `"inf"`, `"infinity"`, `"∞"` or a number `>= 1`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
            return Ok(Exponent::Infinity);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| invalid(format!("cannot parse exponent {t:?}")))?;
        if v.is_infinite() {
            return Ok(Exponent::Infinity);
        }
        Self::finite(T::lit(v))
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(&self) -> Self {
        match *self {
            Exponent::Infinity => Exponent::Finite(T::one()),
            Exponent::Finite(p) if p == T::one() => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - T::one())),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(*self, Exponent::Finite(p) if p == T::one())
    }

    fn integral(&self) -> Option<u32> {
        match *self {
            Exponent::Finite(p) if p.fract() == T::zero() && p <= T::lit(EXACT_POWER_LIMIT as f64) => {
                p.to_u32()
            }
            _ => None,
        }
    }

    /// The `p`-norm of a vector of non-negative reals.
    pub fn norm(&self, v: &[T]) -> T {
        match *self {
            Exponent::Infinity => v.iter().copied().fold(T::zero(), T::max),
            Exponent::Finite(p) if p == T::one() => v.iter().copied().fold(T::zero(), |a, b| a + b),
            Exponent::Finite(p) => {
                let scale = v.iter().copied().fold(T::zero(), T::max);
                if scale == T::zero() {
                    return T::zero();
                }
                let s = v.iter().fold(T::zero(), |a, &b| a + (b / scale).powf(p));
                scale * s.powf(p.recip())
            }
        }
    }

    fn lengths_norm(&self, lengths: &[usize]) -> T {
        let v: Vec<T> = lengths.iter().map(|&r| T::from_usize_exact(r)).collect();
        self.norm(&v)
    }

    /// `||lengths||_p <= radius`, decided in integer arithmetic when `p` and `radius` are integral.
    pub fn within(&self, lengths: &[usize], radius: T) -> bool {
        if radius < T::zero() {
            return false;
        }
        match *self {
            Exponent::Infinity => lengths.iter().all(|&r| T::from_usize_exact(r) <= radius),
            _ => {
                if let (Some(p), true) = (self.integral(), radius.fract() == T::zero()) {
                    let r = radius.to_u64().expect("integral radius");
                    let lhs = lengths
                        .iter()
                        .fold(BigUint::zero(), |acc, &x| acc + BigUint::from(x).pow(p));
                    lhs <= BigUint::from(r).pow(p)
                } else {
                    let n = self.lengths_norm(lengths);
                    let slack = T::lit(16.0) * T::epsilon() * (T::one() + radius);
                    n <= radius + slack
                }
            }
        }
    }

    /// Smallest integer radius whose ball contains a point with these coordinate lengths.
    pub fn ceil_norm(&self, lengths: &[usize]) -> usize {
        match *self {
            Exponent::Infinity => lengths.iter().copied().max().unwrap_or(0),
            _ => {
                let guess = self.lengths_norm(lengths).ceil().to_usize().unwrap_or(0);
                let mut r = guess.saturating_sub(1);
                while !self.within(lengths, T::from_usize_exact(r)) {
                    r += 1;
                }
                while r > 0 && self.within(lengths, T::from_usize_exact(r - 1)) {
                    r -= 1;
                }
                r
            }
        }
    }

    /// Compares `p`-norms, exactly when `p` is integral or infinite.
    pub fn cmp_norms(&self, a: &[usize], b: &[usize]) -> Ordering {
        match *self {
            Exponent::Infinity => a.iter().max().cmp(&b.iter().max()),
            _ => match self.integral() {
                Some(p) => {
                    let s = |v: &[usize]| {
                        v.iter()
                            .fold(BigUint::zero(), |acc, &x| acc + BigUint::from(x).pow(p))
                    };
                    s(a).cmp(&s(b))
                }
                None => self
                    .lengths_norm(a)
                    .partial_cmp(&self.lengths_norm(b))
                    .unwrap_or(Ordering::Equal),
            },
        }
    }
}

/// One coordinate of a product: a whole free group or a regular subset of one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    Free(Alphabet),
    Language(CountingAutomaton),
}

impl Factor {
    pub fn alphabet(&self) -> Alphabet {
        match self {
            Factor::Free(a) => *a,
            Factor::Language(aut) => aut.alphabet(),
        }
    }

    pub fn automaton(&self) -> CountingAutomaton {
        match self {
            Factor::Free(a) => reduced_word_automaton(*a),
            Factor::Language(aut) => aut.clone(),
        }
    }

    pub fn contains(&self, w: &ReducedWord) -> bool {
        match self {
            Factor::Free(a) => w.alphabet() == *a,
            Factor::Language(aut) => w.alphabet() == aut.alphabet() && aut.accepts(w.letters()),
        }
    }

    pub fn counts(&self, r_max: usize) -> CountSequence {
        count_lengths(&self.automaton(), r_max)
    }

    /// Elements of length at most `r`, shortlex ordered.
    pub fn ball(&self, r: usize, limits: &EnumerationLimits) -> Result<Vec<ReducedWord>> {
        let mut words = enumerate_ball(self.alphabet(), r, limits)?;
        if let Factor::Language(aut) = self {
            words.retain(|w| aut.accepts(w.letters()));
        }
        Ok(words)
    }
}

/// The product `G_1 × … × G_n` with the `L^p` combination of word metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProductSpec<T> {
    factors: Vec<Factor>,
    p: Exponent<T>,
}

impl<T: Real> LpProductSpec<T> {
    pub fn new(factors: Vec<Factor>, p: Exponent<T>) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("a product needs at least one factor"));
        }
        if let Exponent::Finite(v) = p {
            Exponent::finite(v)?;
        }
        Ok(LpProductSpec { factors, p })
    }

    /// `n` copies of the free group of rank `rank`.
    pub fn free_power(rank: usize, n: usize, p: Exponent<T>) -> Result<Self> {
        let a = Alphabet::new(rank)?;
        Self::new(vec![Factor::Free(a); n], p)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn p(&self) -> Exponent<T> {
        self.p
    }

    pub fn q(&self) -> Exponent<T> {
        self.p.conjugate()
    }

    /// The same metric on the sub-product of the listed coordinates.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let factors = keep
            .iter()
            .map(|&i| {
                self.factors
                    .get(i)
                    .cloned()
                    .ok_or_else(|| invalid(format!("no factor {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors, self.p)
    }

    pub fn factor_counts(&self, r_max: usize) -> Vec<CountSequence> {
        self.factors.iter().map(|f| f.counts(r_max)).collect()
    }
}

/// A tuple of reduced words.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ProductPoint {
    coords: Vec<ReducedWord>,
}

impl ProductPoint {
    pub fn new(coords: Vec<ReducedWord>) -> Self {
        ProductPoint { coords }
    }

    pub fn identity<T: Real>(spec: &LpProductSpec<T>) -> Self {
        ProductPoint {
            coords: spec.factors.iter().map(|f| f.alphabet().identity()).collect(),
        }
    }

    pub fn coords(&self) -> &[ReducedWord] {
        &self.coords
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.coords.iter().map(ReducedWord::len).collect()
    }

    pub fn inverse(&self) -> Self {
        ProductPoint::new(self.coords.iter().map(ReducedWord::inverse).collect())
    }

    pub fn try_mul(&self, other: &ProductPoint) -> Result<Self> {
        if self.coords.len() != other.coords.len() {
            return Err(invalid("product points have different numbers of coordinates"));
        }
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.try_mul(b))
            .collect::<Result<Vec<_>>>()
            .map(ProductPoint::new)
    }

    /// Parses one word per coordinate.
    pub fn parse<T: Real>(spec: &LpProductSpec<T>, coords: &[&str]) -> Result<Self> {
        if coords.len() != spec.n() {
            return Err(invalid(format!(
                "expected {} coordinates, got {}",
                spec.n(),
                coords.len()
            )));
        }
        spec.factors
            .iter()
            .zip(coords)
            .map(|(f, s)| f.alphabet().parse_word(s))
            .collect::<Result<Vec<_>>>()
            .map(ProductPoint::new)
    }

    fn check_shape<T: Real>(&self, spec: &LpProductSpec<T>) -> Result<()> {
        if self.coords.len() != spec.n() {
            return Err(invalid(format!(
                "point has {} coordinates, product has {}",
                self.coords.len(),
                spec.n()
            )));
        }
        for (w, f) in self.coords.iter().zip(&spec.factors) {
            if w.alphabet() != f.alphabet() {
                return Err(Error::AlphabetMismatch {
                    left: f.alphabet().rank(),
                    right: w.alphabet().rank(),
                });
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for ProductPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// `||(d(x_i, y_i))_i||_p`; exact for `p` in `{1, ∞}` up to the conversion of an integer.
pub fn lp_distance<T: Real>(spec: &LpProductSpec<T>, x: &ProductPoint, y: &ProductPoint) -> Result<T> {
    x.check_shape(spec)?;
    y.check_shape(spec)?;
    let lengths: Vec<usize> = x
        .coords
        .iter()
        .zip(&y.coords)
        .map(|(a, b)| (&a.inverse() * b).len())
        .collect();
    Ok(match spec.p {
        Exponent::Infinity => T::from_usize_exact(lengths.iter().copied().max().unwrap_or(0)),
        Exponent::Finite(p) if p == T::one() => T::from_usize_exact(lengths.iter().sum()),
        _ => spec.p.lengths_norm(&lengths),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorrespondenceReport {
    pub radius: usize,
    pub factors: usize,
    /// Tuples reached by breadth-first search with the `S^1` generators.
    pub checked_s1: usize,
    pub checked_s_inf: usize,
    /// Tuples whose `S^1` word length differs from the `L^1` orbit distance.
    pub mismatches_s1: Vec<String>,
    pub mismatches_s_inf: Vec<String>,
}

impl CorrespondenceReport {
    pub fn passed(&self) -> bool {
        self.mismatches_s1.is_empty() && self.mismatches_s_inf.is_empty()
    }
}

/// Breadth-first word lengths in the product for the generators that move one coordinate
/// (`all_at_once = false`) or any non-empty set of coordinates by one letter each.
fn product_bfs(alphabets: &[Alphabet], radius: usize, all_at_once: bool) -> HashMap<Vec<Vec<Letter>>, usize> {
    let n = alphabets.len();
    let start: Vec<Vec<Letter>> = vec![Vec::new(); n];
    let mut dist = HashMap::new();
    dist.insert(start.clone(), 0usize);
    let mut queue = VecDeque::from([start]);
    let step = |w: &[Letter], a: Alphabet, l: Letter| -> Vec<Letter> {
        let mut v = w.to_vec();
        if v.last() == Some(&a.inverse(l)) {
            v.pop();
        } else {
            v.push(l);
        }
        v
    };
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur];
        if d == radius {
            continue;
        }
        let mut next = Vec::new();
        if all_at_once {
            // each coordinate either stays or moves by one letter; not all stay
            let mut options: Vec<Vec<Vec<Letter>>> = Vec::with_capacity(n);
            for (i, a) in alphabets.iter().enumerate() {
                let mut o = vec![cur[i].clone()];
                o.extend(a.letters().map(|l| step(&cur[i], *a, l)));
                options.push(o);
            }
            let mut idx = vec![0usize; n];
            loop {
                let mut i = 0;
                while i < n {
                    idx[i] += 1;
                    if idx[i] < options[i].len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
                next.push((0..n).map(|j| options[j][idx[j]].clone()).collect::<Vec<_>>());
            }
        } else {
            for (i, a) in alphabets.iter().enumerate() {
                for l in a.letters() {
                    let mut t = cur.clone();
                    t[i] = step(&cur[i], *a, l);
                    next.push(t);
                }
            }
        }
        for t in next {
            if !dist.contains_key(&t) {
                dist.insert(t.clone(), d + 1);
                queue.push_back(t);
            }
        }
    }
    dist
}

/// Checks on balls of radius `radius` that word length for `S^1` is the `L^1` distance and
/// word length for `S^∞` is the `L^∞` distance.
pub fn generating_set_correspondence(alphabets: &[Alphabet], radius: usize) -> Result<CorrespondenceReport> {
    if alphabets.is_empty() {
        return Err(invalid("need at least one factor"));
    }
    let budget: u128 = alphabets
        .iter()
        .map(|&a| crate::words::ball_size(a, radius))
        .fold(1u128, |acc, b| acc.saturating_mul(b));
    if budget > EnumerationLimits::default().max_words {
        return Err(Error::ResourceLimit(format!(
            "product ball of radius {radius} has {budget} tuples"
        )));
    }
    let show = |t: &Vec<Vec<Letter>>| {
        let words: Vec<String> = t
            .iter()
            .zip(alphabets)
            .map(|(w, &a)| ReducedWord::from_reduced_unchecked(a, w.clone()).to_string())
            .collect();
        format!("({})", words.join(", "))
    };
    let s1 = product_bfs(alphabets, radius, false);
    let s_inf = product_bfs(alphabets, radius, true);
    let mut mismatches_s1: Vec<String> = s1
        .iter()
        .filter(|(t, &d)| t.iter().map(Vec::len).sum::<usize>() != d)
        .map(|(t, _)| show(t))
        .collect();
    let mut mismatches_s_inf: Vec<String> = s_inf
        .iter()
        .filter(|(t, &d)| t.iter().map(Vec::len).max().unwrap_or(0) != d)
        .map(|(t, _)| show(t))
        .collect();
    // both searches must reach exactly the tuples inside the respective balls
    let expected_s1: u128 = lattice_ball(alphabets, radius, |l| l.iter().sum::<usize>() <= radius);
    let expected_inf: u128 = lattice_ball(alphabets, radius, |_| true);
    if s1.len() as u128 != expected_s1 {
        mismatches_s1.push(format!("reached {} tuples, expected {expected_s1}", s1.len()));
    }
    if s_inf.len() as u128 != expected_inf {
        mismatches_s_inf.push(format!("reached {} tuples, expected {expected_inf}", s_inf.len()));
    }
    mismatches_s1.sort();
    mismatches_s_inf.sort();
    Ok(CorrespondenceReport {
        radius,
        factors: alphabets.len(),
        checked_s1: s1.len(),
        checked_s_inf: s_inf.len(),
        mismatches_s1,
        mismatches_s_inf,
    })
}

/// Number of tuples with coordinate lengths at most `radius` accepted by `keep`.
fn lattice_ball(alphabets: &[Alphabet], radius: usize, keep: impl Fn(&[usize]) -> bool) -> u128 {
    let mut total = 0u128;
    for_each_lattice_point(alphabets.len(), radius, |l| {
        if keep(l) {
            total += l
                .iter()
                .zip(alphabets)
                .map(|(&r, &a)| crate::words::sphere_size(a, r))
                .product::<u128>();
        }
    });
    total
}

/// Visits every `(r_1, …, r_n)` with `0 <= r_i <= r_max`.
fn for_each_lattice_point(n: usize, r_max: usize, mut visit: impl FnMut(&[usize])) {
    let mut v = vec![0usize; n];
    loop {
        visit(&v);
        let mut i = 0;
        while i < n {
            v[i] += 1;
            if v[i] <= r_max {
                break;
            }
            v[i] = 0;
            i += 1;
        }
        if i == n {
            return;
        }
    }
}

fn check_counts(factor_counts: &[CountSequence], n: usize, r: usize) -> Result<()> {
    if factor_counts.len() != n {
        return Err(invalid(format!(
            "expected counts for {n} factors, got {}",
            factor_counts.len()
        )));
    }
    if let Some(i) = factor_counts.iter().position(|c| c.len() <= r) {
        return Err(Error::ResourceLimit(format!(
            "factor {i} has counts only up to radius {}, need {r}",
            factor_counts[i].len().saturating_sub(1)
        )));
    }
    Ok(())
}

/// Exact number of product points of `L^p` length at most `radius`.
pub fn product_ball_counts<T: Real>(
    spec: &LpProductSpec<T>,
    factor_counts: &[CountSequence],
    radius: T,
) -> Result<BigUint> {
    if radius < T::zero() {
        return Ok(BigUint::zero());
    }
    let r_max = radius.floor().to_usize().ok_or_else(|| invalid("radius out of range"))?;
    check_counts(factor_counts, spec.n(), r_max)?;
    let mut total = BigUint::zero();
    for_each_lattice_point(spec.n(), r_max, |l| {
        if spec.p.within(l, radius) {
            total += sphere_product(factor_counts, l);
        }
    });
    Ok(total)
}

fn sphere_product(factor_counts: &[CountSequence], l: &[usize]) -> BigUint {
    l.iter()
        .zip(factor_counts)
        .fold(BigUint::one(), |acc, (&r, c)| acc * &c.spheres()[r])
}

/// Product sphere counts at every integer radius `0..=r_max`.
pub fn product_count_sequence<T: Real>(
    spec: &LpProductSpec<T>,
    factor_counts: &[CountSequence],
    r_max: usize,
) -> Result<CountSequence> {
    check_counts(factor_counts, spec.n(), r_max)?;
    let mut spheres = vec![BigUint::zero(); r_max + 1];
    for_each_lattice_point(spec.n(), r_max, |l| {
        let r = spec.p.ceil_norm(l);
        if r <= r_max {
            spheres[r] += sphere_product(factor_counts, l);
        }
    });
    Ok(CountSequence::new(spheres))
}

/// `||deltas||_q` for the conjugate `q` of `p`.
pub fn duality_exponent<T: Real>(deltas: &[T], p: Exponent<T>) -> Result<T> {
    if let Some(d) = deltas.iter().find(|d| !(**d >= T::zero())) {
        return Err(invalid(format!("factor exponents must be non-negative, got {d}")));
    }
    Ok(p.conjugate().norm(deltas))
}

/// Applies [`duality_exponent`] to the ends of factor brackets; both ends are monotone in each input.
pub fn duality_bracket<T: Real>(brackets: &[GrowthBracket<T>], p: Exponent<T>) -> Result<GrowthBracket<T>> {
    if brackets.is_empty() {
        return Err(invalid("need at least one factor bracket"));
    }
    if brackets.iter().any(|b| b.upper == T::neg_infinity()) {
        return Ok(GrowthBracket::neg_infinity(Method::Duality));
    }
    let clamp = |v: T| v.max(T::zero());
    let lows: Vec<T> = brackets.iter().map(|b| clamp(b.lower)).collect();
    let highs: Vec<T> = brackets.iter().map(|b| clamp(b.upper)).collect();
    let mids: Vec<T> = brackets.iter().map(|b| clamp(b.estimate)).collect();
    let q = p.conjugate();
    let regime = if brackets.iter().all(|b| b.regime == Regime::Limit) {
        Regime::Limit
    } else {
        Regime::Limsup
    };
    Ok(GrowthBracket {
        lower: q.norm(&lows),
        upper: q.norm(&highs),
        estimate: q.norm(&mids),
        method: Method::Duality,
        regime,
        radii: [
            brackets.iter().map(|b| b.radii[0]).min().unwrap_or(0),
            brackets.iter().map(|b| b.radii[1]).max().unwrap_or(0),
        ],
        lower_certified: brackets.iter().all(|b| b.lower_certified),
        upper_certified: brackets.iter().all(|b| b.upper_certified),
    })
}

/// Spectral brackets of every factor.
pub fn factor_brackets<T: Real>(spec: &LpProductSpec<T>, tol: T) -> Result<Vec<GrowthBracket<T>>> {
    spec.factors.iter().map(|f| perron_root(&f.automaton(), tol)).collect()
}

/// Fekete bracket from a ball-count sequence, with the subadditivity constant measured on the data.
pub fn bracket_from_balls<T: Real>(balls: &[BigUint]) -> Result<GrowthBracket<T>> {
    let sub = check_subadditivity::<T>(balls, None)?;
    let logs: Vec<T> = balls.iter().map(ln_big).collect();
    fekete_bracket(&logs, sub.b)
}

fn big_to_string<S: Serializer>(v: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real + Serialize")]
pub struct DualityReport<T> {
    pub p: Exponent<T>,
    pub q: Exponent<T>,
    pub radius_max: usize,
    #[serde(serialize_with = "big_to_string")]
    pub ball_counts: Vec<BigUint>,
    pub factor_exponents: Vec<GrowthBracket<T>>,
    /// Fekete bracket from the product ball counts.
    pub measured: GrowthBracket<T>,
    /// `q`-norm of the factor brackets.
    pub predicted: GrowthBracket<T>,
    /// `|measured.estimate - predicted.estimate|`.
    pub deviation: T,
    /// Distance from `predicted.estimate` to the measured bracket.
    pub margin: T,
}

/// Measures the product exponent from exact ball counts up to `r_max` and compares with the duality prediction.
pub fn verify_duality<T: Real>(
    spec: &LpProductSpec<T>,
    factor_counts: &[CountSequence],
    r_max: usize,
    tol: T,
) -> Result<DualityReport<T>> {
    if r_max < 1 {
        return Err(invalid("need r_max >= 1"));
    }
    let seq = product_count_sequence(spec, factor_counts, r_max)?;
    let balls = seq.balls();
    let measured = bracket_from_balls::<T>(&balls)?;
    let factor_exponents = factor_brackets(spec, tol)?;
    let predicted = duality_bracket(&factor_exponents, spec.p)?;
    Ok(DualityReport {
        p: spec.p,
        q: spec.q(),
        radius_max: r_max,
        ball_counts: balls,
        deviation: (measured.estimate - predicted.estimate).abs(),
        margin: measured.distance_to(predicted.estimate),
        factor_exponents,
        measured,
        predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::avoid_factors;

    type Spec = LpProductSpec<f64>;

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn exps() -> [Exponent<f64>; 3] {
        [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity]
    }

    #[test]
    fn exponent_parsing_and_conjugates() {
        assert_eq!(Exponent::<f64>::parse("inf").unwrap(), Exponent::Infinity);
        assert_eq!(Exponent::<f64>::parse("2").unwrap().conjugate(), Exponent::Finite(2.0));
        assert_eq!(Exponent::<f64>::parse("1").unwrap().conjugate(), Exponent::Infinity);
        assert_eq!(Exponent::<f64>::Infinity.conjugate(), Exponent::Finite(1.0));
        match Exponent::<f64>::parse("3").unwrap().conjugate() {
            Exponent::Finite(q) => assert!((q - 1.5).abs() < 1e-15),
            _ => panic!(),
        }
        assert!(Exponent::<f64>::parse("0.5").is_err());
        assert!(Exponent::<f64>::parse("x").is_err());
    }

    #[test]
    fn distance_examples() {
        let spec = Spec::free_power(2, 2, Exponent::Infinity).unwrap();
        let x = ProductPoint::parse(&spec, &["a", "b"]).unwrap();
        let o = ProductPoint::identity(&spec);
        assert_eq!(lp_distance(&spec, &x, &o).unwrap(), 1.0);
        let s1 = Spec::free_power(2, 2, Exponent::Finite(1.0)).unwrap();
        assert_eq!(lp_distance(&s1, &x, &o).unwrap(), 2.0);
        let s2 = Spec::free_power(2, 2, Exponent::Finite(2.0)).unwrap();
        let y = ProductPoint::parse(&s2, &["a a a", "b b b b"]).unwrap();
        assert_eq!(lp_distance(&s2, &y, &o).unwrap(), 5.0);
        let bad = ProductPoint::parse(&spec, &["a"]);
        assert!(bad.is_err());
        let short = ProductPoint::new(vec![f2().identity()]);
        assert!(lp_distance(&spec, &short, &o).is_err());
    }

    #[test]
    fn distance_is_symmetric_and_monotone_in_p() {
        let pts: Vec<ProductPoint> = ["a b", "b", "a-", "b b a"]
            .iter()
            .flat_map(|u| ["a", "1", "b- a"].iter().map(move |v| (u, v)))
            .map(|(u, v)| ProductPoint::new(vec![f2().parse_word(u).unwrap(), f2().parse_word(v).unwrap()]))
            .collect();
        let specs: Vec<Spec> = exps().iter().map(|&p| Spec::free_power(2, 2, p).unwrap()).collect();
        for x in &pts {
            for y in &pts {
                let ds: Vec<f64> = specs.iter().map(|s| lp_distance(s, x, y).unwrap()).collect();
                assert!(ds[0] >= ds[1] && ds[1] >= ds[2]);
                for (s, d) in specs.iter().zip(&ds) {
                    assert_eq!(*d, lp_distance(s, y, x).unwrap());
                    for z in &pts {
                        let via = lp_distance(s, x, z).unwrap() + lp_distance(s, z, y).unwrap();
                        assert!(*d <= via + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn correspondence_small_radius() {
        let r = generating_set_correspondence(&[f2(), f2()], 3).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.checked_s_inf, 53 * 53);
        let s1 = product_bfs(&[f2(), f2()], 3, false);
        let key = vec![f2().parse_letters("ab").unwrap(), f2().parse_letters("b").unwrap()];
        assert_eq!(s1[&key], 3);
        let s_inf = product_bfs(&[f2(), f2()], 3, true);
        let key = vec![f2().parse_letters("a").unwrap(), f2().parse_letters("b").unwrap()];
        assert_eq!(s_inf[&key], 1);
        assert_eq!(s_inf[&vec![vec![], vec![]]], 0);
    }

    #[test]
    fn ball_count_examples() {
        let counts = vec![Factor::Free(f2()).counts(12), Factor::Free(f2()).counts(12)];
        let s1 = Spec::free_power(2, 2, Exponent::Finite(1.0)).unwrap();
        assert_eq!(product_ball_counts(&s1, &counts, 2.0).unwrap(), BigUint::from(49u32));
        let inf = Spec::free_power(2, 2, Exponent::Infinity).unwrap();
        assert_eq!(product_ball_counts(&inf, &counts, 1.0).unwrap(), BigUint::from(25u32));
        assert_eq!(product_ball_counts(&inf, &counts, 1.5).unwrap(), BigUint::from(25u32));
        for p in exps() {
            let s = Spec::free_power(2, 2, p).unwrap();
            assert_eq!(product_ball_counts(&s, &counts, 0.0).unwrap(), BigUint::one());
        }
        assert!(matches!(
            product_ball_counts(&inf, &counts, 13.0),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn infinity_ball_is_product_of_balls() {
        let inf = Spec::free_power(2, 3, Exponent::Infinity).unwrap();
        let counts = inf.factor_counts(8);
        let seq = product_count_sequence(&inf, &counts, 8).unwrap();
        for r in 0..=8 {
            let b = counts[0].balls()[r].clone();
            assert_eq!(seq.balls()[r], &(&b * &b) * &b);
            assert_eq!(product_ball_counts(&inf, &counts, r as f64).unwrap(), seq.balls()[r]);
        }
    }

    #[test]
    fn ball_counts_match_enumeration() {
        let limits = EnumerationLimits::default();
        let ball = Factor::Free(f2()).ball(5, &limits).unwrap();
        for p in exps() {
            let s = Spec::free_power(2, 2, p).unwrap();
            let counts = s.factor_counts(5);
            for r in 0..=5 {
                let mut n = 0u64;
                for x in &ball {
                    for y in &ball {
                        if p.within(&[x.len(), y.len()], r as f64) {
                            n += 1;
                        }
                    }
                }
                assert_eq!(product_ball_counts(&s, &counts, r as f64).unwrap(), BigUint::from(n));
            }
        }
    }

    #[test]
    fn ball_counts_monotone_in_p() {
        let counts = vec![Factor::Free(f2()).counts(9); 2];
        for r in 0..=9 {
            let c: Vec<BigUint> = [1.0, 1.5, 2.0, 3.0]
                .iter()
                .map(|&p| Exponent::Finite(p))
                .chain([Exponent::Infinity])
                .map(|p| product_ball_counts(&Spec::free_power(2, 2, p).unwrap(), &counts, r as f64).unwrap())
                .collect();
            assert!(c.windows(2).all(|w| w[0] <= w[1]), "r = {r}: {c:?}");
        }
    }

    #[test]
    fn exact_boundary_for_integral_p() {
        let p = Exponent::<f64>::Finite(2.0);
        assert!(p.within(&[3, 4], 5.0));
        assert!(!p.within(&[3, 5], 5.0));
        assert_eq!(p.ceil_norm(&[3, 4]), 5);
        assert_eq!(p.ceil_norm(&[1, 1]), 2);
        assert_eq!(p.cmp_norms(&[3, 4], &[5, 0]), Ordering::Equal);
        assert_eq!(Exponent::<f64>::Infinity.ceil_norm(&[2, 7]), 7);
    }

    #[test]
    fn duality_examples() {
        let l3 = 3f64.ln();
        let d = [l3, l3];
        assert!((duality_exponent(&d, Exponent::Infinity).unwrap() - 2.0 * l3).abs() < 1e-12);
        assert!((duality_exponent(&d, Exponent::Finite(1.0)).unwrap() - l3).abs() < 1e-12);
        assert!((duality_exponent(&d, Exponent::Finite(2.0)).unwrap() - 2f64.sqrt() * l3).abs() < 1e-12);
        assert!(duality_exponent(&[-1.0], Exponent::Infinity).is_err());
        let ps = [1.0, 1.5, 2.0, 4.0];
        let v = [0.3, 1.1, 0.7];
        let vals: Vec<f64> = ps.iter().map(|&p| duality_exponent(&v, Exponent::Finite(p)).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let scaled: Vec<f64> = v.iter().map(|x| 2.5 * x).collect();
        let a = duality_exponent(&scaled, Exponent::Finite(3.0)).unwrap();
        let b = duality_exponent(&v, Exponent::Finite(3.0)).unwrap();
        assert!((a - 2.5 * b).abs() < 1e-12);
    }

    #[test]
    fn single_factor_matches_factor_exponent() {
        for p in exps() {
            let s = Spec::free_power(2, 1, p).unwrap();
            let r = verify_duality(&s, &s.factor_counts(12), 12, 1e-10).unwrap();
            assert_eq!(r.ball_counts, s.factor_counts(12)[0].balls());
            assert!(r.predicted.contains(3f64.ln()));
        }
    }

    #[test]
    fn duality_on_free_square() {
        let l3 = 3f64.ln();
        let cases = [
            (Exponent::Infinity, 2.0 * l3, 0.05),
            (Exponent::Finite(2.0), 2f64.sqrt() * l3, 0.08),
            (Exponent::Finite(1.0), l3, 0.08),
        ];
        for (p, target, tol) in cases {
            let s = Spec::free_power(2, 2, p).unwrap();
            let r = verify_duality(&s, &s.factor_counts(12), 12, 1e-10).unwrap();
            assert!(r.measured.distance_to(target) <= tol, "{p:?}: {:?}", r.measured);
            assert!(r.predicted.contains(target));
        }
    }

    #[test]
    fn restricted_factor_uses_same_counting_path() {
        let base = reduced_word_automaton(f2());
        let lang = avoid_factors(&base, &[f2().parse_word("a b").unwrap()]).unwrap();
        let s = Spec::new(vec![Factor::Language(lang.clone()), Factor::Free(f2())], Exponent::Infinity).unwrap();
        let counts = s.factor_counts(6);
        let limits = EnumerationLimits::default();
        let xs = s.factors()[0].ball(4, &limits).unwrap();
        let ys = s.factors()[1].ball(4, &limits).unwrap();
        assert_eq!(
            product_ball_counts(&s, &counts, 4.0).unwrap(),
            BigUint::from(xs.len() * ys.len())
        );
        assert!(xs.iter().all(|x| !x.contains_factor(&f2().parse_word("a b").unwrap())));
    }
}
