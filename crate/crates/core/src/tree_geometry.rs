//! Axes, projections and long projections on the Cayley tree of a free group.
//!
//! Every non-trivial `h = c · core · c^-1` (with `core` cyclically reduced)
//! stabilises a bi-infinite geodesic, its axis: the vertices `t · c · P(i)`,
//! where `P(i)` is the prefix of length `i` of `core^∞` for `i >= 0` and of
//! `(core^-1)^∞` for `i < 0`, and `t` is the translate of the axis. The
//! integer `i` is the axis coordinate; `h` moves the axis forward by `|core|`.
//!
//! In a tree, nearest-point projection onto a line is exact and unique, the
//! contraction constants vanish, and the diameter of the projection of a
//! geodesic segment onto a line is the length of their overlap. The constant
//! `D' = |core| + 2|c|` bounds the diameter of the quotient of the axis by
//! `<h>` together with the distance from the identity to the axis.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::automata::{avoid_factors, reduced_word_automaton, CountingAutomaton};
use crate::error::{invalid, Error, Result};
use crate::words::{Alphabet, Letter, ReducedWord};

/// Constant in the bound `d^π_H(g^n.p, p) <= 2 d(p, g.p) + D_TREE`, fixed from exhaustive runs.
pub const D_TREE: i64 = 0;

/// The axis of a non-trivial element, optionally translated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axis {
    h: ReducedWord,
    core: ReducedWord,
    conjugator: ReducedWord,
    translate: ReducedWord,
    root: ReducedWord,
    core_inverse: ReducedWord,
    base: ReducedWord,
}

/// Nearest point of an axis to a vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectionResult {
    pub foot: ReducedWord,
    pub distance: usize,
    pub axis_coordinate: i64,
}

impl Axis {
    pub fn new(h: &ReducedWord) -> Result<Self> {
        Self::translated_from(h, &h.alphabet().identity())
    }

    fn translated_from(h: &ReducedWord, translate: &ReducedWord) -> Result<Self> {
        if h.is_identity() {
            return Err(invalid("axis of the identity is undefined"));
        }
        if h.alphabet() != translate.alphabet() {
            return Err(Error::AlphabetMismatch {
                left: h.alphabet().rank(),
                right: translate.alphabet().rank(),
            });
        }
        let (core, conjugator) = h.cyclic_reduce();
        let (root, _) = core.primitive_root();
        let base = translate * &conjugator;
        Ok(Axis {
            h: h.clone(),
            core_inverse: core.inverse(),
            core,
            conjugator,
            translate: translate.clone(),
            root,
            base,
        })
    }

    /// The axis `w · self`.
    pub fn translated(&self, w: &ReducedWord) -> Result<Axis> {
        if w.alphabet() != self.h.alphabet() {
            return Err(Error::AlphabetMismatch {
                left: self.h.alphabet().rank(),
                right: w.alphabet().rank(),
            });
        }
        Self::translated_from(&self.h, &(w * &self.translate))
    }

    pub fn h(&self) -> &ReducedWord {
        &self.h
    }

    pub fn core(&self) -> &ReducedWord {
        &self.core
    }

    pub fn conjugator(&self) -> &ReducedWord {
        &self.conjugator
    }

    pub fn translate(&self) -> &ReducedWord {
        &self.translate
    }

    /// Primitive root of the core; the stabiliser of the axis is generated by its conjugate.
    pub fn root(&self) -> &ReducedWord {
        &self.root
    }

    /// The vertex at coordinate 0.
    pub fn base(&self) -> &ReducedWord {
        &self.base
    }

    pub fn d_prime(&self) -> usize {
        self.core.len() + 2 * self.conjugator.len()
    }

    /// `P(i)`, the path from the base to the vertex at coordinate `i`.
    fn offset(&self, i: i64) -> ReducedWord {
        let period = if i >= 0 { &self.core } else { &self.core_inverse };
        let m = period.len();
        let letters: Vec<Letter> = (0..i.unsigned_abs() as usize)
            .map(|t| period.letters()[t % m])
            .collect();
        ReducedWord::from_reduced_unchecked(self.h.alphabet(), letters)
    }

    /// Vertex at coordinate `i`.
    pub fn point(&self, i: i64) -> ReducedWord {
        &self.base * &self.offset(i)
    }

    pub fn project(&self, x: &ReducedWord) -> ProjectionResult {
        let y = &self.base.inverse() * x;
        let forward = periodic_match(y.letters(), self.core.letters(), 0);
        let backward = periodic_match(y.letters(), self.core_inverse.letters(), 0);
        let coordinate = if forward > 0 {
            forward as i64
        } else {
            -(backward as i64)
        };
        ProjectionResult {
            foot: self.point(coordinate),
            distance: y.len() - coordinate.unsigned_abs() as usize,
            axis_coordinate: coordinate,
        }
    }

    pub fn contains(&self, x: &ReducedWord) -> bool {
        self.project(x).distance == 0
    }

    /// True iff both axes are the same line of the tree (orientation ignored).
    pub fn same_line(&self, other: &Axis) -> bool {
        let span = (self.core.len() + other.core.len()) as i64;
        (0..=span).all(|i| self.contains(&other.point(i)))
    }

    /// Smallest closed interval of coordinates on `self` containing the projection of `other`.
    fn projection_interval(&self, other: &Axis) -> (i64, i64) {
        let gap = (&self.base.inverse() * &other.base).len();
        let window = 2 * (gap + self.core.len() + other.core.len()) as i64 + 4;
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for j in -window..=window {
            let c = self.project(&other.point(j)).axis_coordinate;
            lo = lo.min(c);
            hi = hi.max(c);
        }
        (lo, hi)
    }
}

/// Number of leading letters of `word` agreeing with `period^∞` read from index `phase`.
fn periodic_match(word: &[Letter], period: &[Letter], phase: usize) -> usize {
    let m = period.len();
    word.iter()
        .enumerate()
        .take_while(|(t, &l)| l == period[(phase + t) % m])
        .count()
}

/// Outcome of a projection-axiom check over a family of axes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub family_size: usize,
    /// Largest `diam π_X(Y)` over ordered pairs of distinct axes.
    pub p0_max: i64,
    /// Smallest ξ for which both the diameter bound and the at-most-one-large rule hold.
    pub xi_observed: i64,
    /// `max |core| + 2 max |conjugator|` over the family.
    pub tree_bound: i64,
    pub xi_tested: i64,
    /// Triples `(x, y, z)` with at least two of `d_x(y,z)`, `d_y(x,z)`, `d_z(x,y)` above `xi_tested`.
    pub violations: Vec<([usize; 3], [i64; 3])>,
}

/// Checks the projection axioms on the family `{ s · X : s in sample, X in axes }`.
///
/// An empty sample means the axes themselves. Translates that land on an
/// already present line are dropped; duplicate lines among `axes` are an error.
/// Violations are reported against `xi`, or against the tree bound when `xi` is `None`.
pub fn check_projection_axioms(
    axes: &[Axis],
    sample: &[ReducedWord],
    xi: Option<i64>,
) -> Result<AxiomReport> {
    for i in 0..axes.len() {
        for j in 0..i {
            if axes[i].same_line(&axes[j]) {
                return Err(invalid(format!("axes {j} and {i} coincide")));
            }
        }
    }
    let mut family: Vec<Axis> = Vec::new();
    if sample.is_empty() {
        family = axes.to_vec();
    } else {
        for s in sample {
            for ax in axes {
                let t = ax.translated(s)?;
                if !family.iter().any(|f| f.same_line(&t)) {
                    family.push(t);
                }
            }
        }
    }
    let n = family.len();
    let mut intervals = vec![vec![(0i64, 0i64); n]; n];
    let mut p0_max = 0;
    for x in 0..n {
        for y in 0..n {
            if x != y {
                let iv = family[x].projection_interval(&family[y]);
                p0_max = p0_max.max(iv.1 - iv.0);
                intervals[x][y] = iv;
            }
        }
    }
    let d = |x: usize, y: usize, z: usize| {
        let (a, b) = intervals[x][y];
        let (c, e) = intervals[x][z];
        b.max(e) - a.min(c)
    };
    let tree_bound = family.iter().map(|a| a.core.len()).max().unwrap_or(0) as i64
        + 2 * family.iter().map(|a| a.conjugator.len()).max().unwrap_or(0) as i64;
    let xi_tested = xi.unwrap_or(tree_bound);
    let mut xi_observed = p0_max;
    let mut violations = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                let vals = [d(x, y, z), d(y, x, z), d(z, x, y)];
                let mut sorted = vals;
                sorted.sort_unstable();
                xi_observed = xi_observed.max(sorted[1]);
                if vals.iter().filter(|&&v| v > xi_tested).count() >= 2 {
                    violations.push(([x, y, z], vals));
                }
            }
        }
    }
    Ok(AxiomReport {
        family_size: n,
        p0_max,
        xi_observed,
        tree_bound,
        xi_tested,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PowerBoundRow {
    pub n: usize,
    pub projection_diameter: i64,
    pub bound: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PowerBoundReport {
    /// Smallest `j <= n_max` with `g^j` in `<h>`, if any.
    pub power_in_h: Option<usize>,
    pub d_tree: i64,
    pub rows: Vec<PowerBoundRow>,
    pub bound_holds: bool,
    /// Either a power of `g` lies in `<h>` or the bound holds for every row.
    pub passed: bool,
}

/// Tests `d^π_H(g^n.p, p) <= 2 d(p, g.p) + D_TREE` for `n = 1..=n_max`, where `p` is the foot of the identity.
pub fn power_projection_bound(ax: &Axis, g: &ReducedWord, n_max: usize) -> Result<PowerBoundReport> {
    if g.is_identity() {
        return Err(invalid("g must be non-trivial"));
    }
    if g.alphabet() != ax.h.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: ax.h.alphabet().rank(),
            right: g.alphabet().rank(),
        });
    }
    let p = ax.project(&g.alphabet().identity());
    let step = (&p.foot.inverse() * &(g * &p.foot)).len() as i64;
    let bound = 2 * step + D_TREE;
    let conj = &ax.translate * &ax.conjugator;
    let mut power_in_h = None;
    let mut rows = Vec::with_capacity(n_max);
    let mut gn = g.alphabet().identity();
    for n in 1..=n_max {
        gn = &gn * g;
        if power_in_h.is_none() && is_power_of(&(&conj.inverse() * &(&gn * &conj)), &ax.core) {
            power_in_h = Some(n);
        }
        let q = ax.project(&(&gn * &p.foot));
        rows.push(PowerBoundRow {
            n,
            projection_diameter: (q.axis_coordinate - p.axis_coordinate).abs(),
            bound,
        });
    }
    let bound_holds = rows.iter().all(|r| r.projection_diameter <= r.bound);
    Ok(PowerBoundReport {
        passed: power_in_h.is_some() || bound_holds,
        power_in_h,
        d_tree: D_TREE,
        rows,
        bound_holds,
    })
}

/// True iff `x = core^m` for some integer `m != 0`.
fn is_power_of(x: &ReducedWord, core: &ReducedWord) -> bool {
    if x.is_identity() || !x.len().is_multiple_of(core.len()) {
        return false;
    }
    let m = (x.len() / core.len()) as i64;
    *x == core.pow(m) || *x == core.pow(-m)
}

/// A translate `kH` of the axis of `h` onto which a subsegment of the geodesic `[1, g]`
/// projects with large diameter, aligned so that `k` sits near the start and `k h^α` near the end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LongProjectionWitness {
    pub k: ReducedWord,
    pub projection_diameter: usize,
    pub alpha: u64,
    /// The geodesic runs along `kH` in the direction of `h`.
    pub positive: bool,
    /// Prefix lengths of `g` giving the subsegment endpoints `x0`, `x1`.
    pub start: usize,
    pub end: usize,
}

/// Maximal stretch of `g` lying on one translate of the axis.
#[derive(Clone, Copy, Debug)]
struct Run {
    start: usize,
    len: usize,
    phase: usize,
    positive: bool,
}

struct AxisData {
    alphabet: Alphabet,
    root: Vec<Letter>,
    root_inverse: Vec<Letter>,
    core_len: i64,
    conjugator: ReducedWord,
    window: i64,
}

impl AxisData {
    fn new(h: &ReducedWord) -> Result<Self> {
        if h.is_identity() {
            return Err(invalid("h must be non-trivial"));
        }
        let (core, conjugator) = h.cyclic_reduce();
        let (root, _) = core.primitive_root();
        Ok(AxisData {
            alphabet: h.alphabet(),
            root_inverse: root.inverse().letters().to_vec(),
            root: root.letters().to_vec(),
            core_len: core.len() as i64,
            window: (core.len() + conjugator.len()) as i64,
            conjugator,
        })
    }

    fn root_len(&self) -> usize {
        self.root.len()
    }

    fn d_prime(&self) -> i64 {
        self.core_len + 2 * self.conjugator.len() as i64
    }

    /// Left-maximal runs of `g` along lines labelled by the root, in both directions.
    fn runs(&self, g: &[Letter]) -> Vec<Run> {
        let m = self.root_len();
        let mut out = Vec::new();
        for positive in [true, false] {
            let period = if positive { &self.root } else { &self.root_inverse };
            for phase in 0..m {
                for start in 0..g.len() {
                    if start > 0 && g[start - 1] == period[(phase + m - 1) % m] {
                        continue;
                    }
                    let len = periodic_match(&g[start..], period, phase);
                    if len > 0 {
                        out.push(Run {
                            start,
                            len,
                            phase,
                            positive,
                        });
                    }
                }
            }
        }
        out
    }

    /// Coordinate of the vertex `g[..run.start + t]` on the run's line.
    fn position(&self, run: &Run, t: usize) -> i64 {
        let p = (run.phase + t) as i64;
        if run.positive {
            p
        } else {
            -p
        }
    }

    /// Range of `α >= 1` with `|p + α|core| - target| <= window`.
    fn alpha_range(&self, p: i64, target: i64) -> Option<(i64, i64)> {
        let lo = (target - self.window - p).div_euclid(self.core_len)
            + i64::from((target - self.window - p).rem_euclid(self.core_len) != 0);
        let hi = (target + self.window - p).div_euclid(self.core_len);
        let lo = lo.max(1);
        (lo <= hi).then_some((lo, hi))
    }

    /// `k = v c^-1`, where `v` is the vertex at coordinate `p` (a multiple of the root length).
    fn translate_element(&self, g: &[Letter], run: &Run, p: i64) -> ReducedWord {
        let gs = ReducedWord::from_reduced_unchecked(self.alphabet, g[..run.start].to_vec());
        let from = self.position(run, 0);
        let m = self.root_len() as i64;
        let path: Vec<Letter> = if p >= from {
            (from..p)
                .map(|i| self.root[i.rem_euclid(m) as usize])
                .collect()
        } else {
            (0..from - p)
                .map(|t| {
                    let i = (from - 1 - t).rem_euclid(m) as usize;
                    self.alphabet.inverse(self.root[i])
                })
                .collect()
        };
        &gs.mul_letters(&path) * &self.conjugator.inverse()
    }

    /// Best witness carried by one run: maximal diameter, then the nearest phase point, then the smallest α.
    fn witness(&self, g: &[Letter], run: &Run, k_len: usize) -> Option<LongProjectionWitness> {
        if run.len < k_len {
            return None;
        }
        let m = self.root_len() as i64;
        for diameter in (k_len..=run.len).rev() {
            for t0 in 0..=run.len - diameter {
                let t1 = t0 + diameter;
                let pos0 = self.position(run, t0);
                let pos1 = self.position(run, t1);
                let first = (pos0 - self.window).div_euclid(m) * m;
                let mut best: Option<(i64, i64, i64)> = None;
                let mut p = first;
                while p <= pos0 + self.window {
                    if (p - pos0).abs() <= self.window {
                        if let Some((lo, _)) = self.alpha_range(p, pos1) {
                            let key = ((p - pos0).abs(), p, lo);
                            if best.is_none_or(|b| key < b) {
                                best = Some(key);
                            }
                        }
                    }
                    p += m;
                }
                if let Some((_, p, alpha)) = best {
                    return Some(LongProjectionWitness {
                        k: self.translate_element(g, run, p),
                        projection_diameter: diameter,
                        alpha: alpha as u64,
                        positive: run.positive,
                        start: run.start + t0,
                        end: run.start + t1,
                    });
                }
            }
        }
        None
    }
}

fn check_pair(g: &ReducedWord, h: &ReducedWord, k_len: usize) -> Result<()> {
    if g.alphabet() != h.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: g.alphabet().rank(),
            right: h.alphabet().rank(),
        });
    }
    if k_len == 0 {
        return Err(invalid("K must be at least 1"));
    }
    Ok(())
}

/// All `K`-long projections of subsegments of `[1, g]` onto translates of the axis of `h`,
/// one per translate, in order of first appearance along `g`.
pub fn find_long_projections(
    g: &ReducedWord,
    h: &ReducedWord,
    k_len: usize,
) -> Result<Vec<LongProjectionWitness>> {
    check_pair(g, h, k_len)?;
    let data = AxisData::new(h)?;
    let mut runs = data.runs(g.letters());
    runs.sort_by_key(|r| (r.start, !r.positive, r.phase));
    Ok(runs
        .iter()
        .filter_map(|r| data.witness(g.letters(), r, k_len))
        .collect())
}

/// `g` lies in Ĝ(K): no subsegment of `[1, g]` has a `K`-long positive projection.
pub fn ghat_membership_exact(g: &ReducedWord, h: &ReducedWord, k_len: usize) -> Result<bool> {
    check_pair(g, h, k_len)?;
    let data = AxisData::new(h)?;
    Ok(data
        .runs(g.letters())
        .iter()
        .all(|r| data.witness(g.letters(), r, k_len).is_none()))
}

/// Distinct length-`m` factors of `core^∞` read forwards.
pub fn core_factors(h: &ReducedWord, m: usize) -> Result<Vec<ReducedWord>> {
    if h.is_identity() {
        return Err(invalid("h must be non-trivial"));
    }
    let (core, _) = h.cyclic_reduce();
    let n = core.len();
    let set: BTreeSet<ReducedWord> = (0..n)
        .map(|j| {
            let letters = (0..m).map(|t| core.letters()[(j + t) % n]).collect();
            ReducedWord::from_reduced_unchecked(h.alphabet(), letters)
        })
        .collect();
    Ok(set.into_iter().collect())
}

/// Reduced words avoiding every length-`m` factor of `core^∞`.
///
/// When `m > D'` the accepted words are exactly Ĝ(m); in general
/// Ĝ(m - 2D') ⊆ language ⊆ Ĝ(m + 2D').
pub fn ghat_automaton(alphabet: Alphabet, h: &ReducedWord, m: usize) -> Result<CountingAutomaton> {
    if h.alphabet() != alphabet {
        return Err(Error::AlphabetMismatch {
            left: alphabet.rank(),
            right: h.alphabet().rank(),
        });
    }
    let forbidden = core_factors(h, m)?;
    let (core, _) = h.cyclic_reduce();
    if m < core.len() {
        return Err(invalid(format!(
            "m = {m} is shorter than the core length {}",
            core.len()
        )));
    }
    avoid_factors(&reduced_word_automaton(alphabet), &forbidden)
}

/// Threshold `4(D' + 1) + 2` above which [`shorten`] always succeeds on elements outside Ĝ(K).
pub fn shorten_threshold(h: &ReducedWord) -> Result<usize> {
    Ok(4 * (AxisData::new(h)?.d_prime() as usize + 1) + 2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Shortening {
    Unchanged,
    Shortened {
        g_prime: ReducedWord,
        k: ReducedWord,
        alpha: u64,
        /// The admissible range `[α', α'']`.
        interval: (u64, u64),
    },
}

/// Replaces `g` by `k h^-α k^-1 g` along its longest positive run, which shortens it.
///
/// Elements of Ĝ(K) are returned unchanged. Below [`shorten_threshold`] the
/// move is attempted anyway and fails with an invalid-input error when the
/// admissible range contains no shortening exponent.
pub fn shorten(g: &ReducedWord, h: &ReducedWord, k_len: usize) -> Result<Shortening> {
    check_pair(g, h, k_len)?;
    let data = AxisData::new(h)?;
    let runs = data.runs(g.letters());
    let witnessed = runs
        .iter()
        .any(|r| data.witness(g.letters(), r, k_len).is_some());
    if !witnessed {
        return Ok(Shortening::Unchanged);
    }
    let run = runs
        .iter()
        .filter(|r| r.positive && r.len >= k_len)
        .max_by_key(|r| (r.len, std::cmp::Reverse(r.start)));
    let Some(run) = run else {
        return Err(invalid(format!(
            "K = {k_len} admits only backward projections; no shortening move exists"
        )));
    };
    let core_len = data.core_len;
    let exit = data.position(run, run.len);
    let alpha_max = (exit + data.window).div_euclid(core_len);
    let alpha_min = (4 * data.d_prime() + 1 + core_len - 1) / core_len;
    let shortening = |a: i64| a >= 1 && a * core_len < 2 * run.len as i64;
    let threshold = 4 * (data.d_prime() as usize + 1) + 2;
    let alpha = if k_len >= threshold {
        if alpha_min > alpha_max || !shortening(alpha_max) {
            return Err(Error::Invariant(format!(
                "shortening interval [{alpha_min}, {alpha_max}] fails for g = {g}"
            )));
        }
        alpha_max
    } else {
        match (alpha_min..=alpha_max).rev().find(|&a| shortening(a)) {
            Some(a) => a,
            None => {
                return Err(invalid(format!(
                    "K = {k_len} is below the threshold {threshold}; interval [{alpha_min}, {alpha_max}] does not shorten"
                )))
            }
        }
    };
    let k = data.translate_element(g.letters(), run, 0);
    let g_prime = apply_move(&k, h, alpha, g);
    if g_prime.len() >= g.len() {
        return Err(Error::Invariant(format!(
            "shortening move did not shorten g = {g}"
        )));
    }
    Ok(Shortening::Shortened {
        g_prime,
        k,
        alpha: alpha as u64,
        interval: (alpha_min as u64, alpha_max.max(0) as u64),
    })
}

/// `k h^-α k^-1 g`.
pub fn apply_move(k: &ReducedWord, h: &ReducedWord, alpha: i64, g: &ReducedWord) -> ReducedWord {
    &h.pow(-alpha).conjugate_by(k) * g
}

/// Repeats [`shorten`] until the element lies in Ĝ(K).
pub fn shorten_fully(g: &ReducedWord, h: &ReducedWord, k_len: usize) -> Result<ReducedWord> {
    let mut cur = g.clone();
    loop {
        match shorten(&cur, h, k_len)? {
            Shortening::Unchanged => return Ok(cur),
            Shortening::Shortened { g_prime, .. } => cur = g_prime,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::count_lengths;
    use crate::words::{enumerate_ball, for_each_in_sphere, EnumerationLimits};
    use proptest::prelude::*;

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn w(s: &str) -> ReducedWord {
        f2().parse_word(s).unwrap()
    }

    fn ball(r: usize) -> Vec<ReducedWord> {
        enumerate_ball(f2(), r, &EnumerationLimits::default()).unwrap()
    }

    /// Nearest axis vertex found by scanning a window of coordinates.
    fn brute_projection(ax: &Axis, x: &ReducedWord) -> (i64, usize) {
        let reach = (x.len() + ax.base().len() + ax.core().len()) as i64 * 2;
        (-reach..=reach)
            .map(|i| (i, (&ax.point(i).inverse() * x).len()))
            .min_by_key(|&(i, d)| (d, i.abs()))
            .unwrap()
    }

    fn word_strategy(max: usize) -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec(0u8..4, 0..=max).prop_map(|v| {
            crate::words::free_reduce(f2(), &v.into_iter().map(Letter).collect::<Vec<_>>()).unwrap()
        })
    }

    fn nontrivial(max: usize) -> impl Strategy<Value = ReducedWord> {
        word_strategy(max).prop_filter("non-trivial", |x| !x.is_identity())
    }

    /// Image in `Z` of `F2 / <<h>>` for the two test relators.
    fn quotient_image(h: &str, x: &ReducedWord) -> i64 {
        let s = x.exponent_sums();
        match h {
            "a" => s[1],
            "ab" => s[0] - s[1],
            _ => unreachable!(),
        }
    }

    #[test]
    fn axis_decomposition() {
        let ax = Axis::new(&w("b a b a b-")).unwrap();
        assert_eq!(ax.core(), &w("a b a"));
        assert_eq!(ax.conjugator(), &w("b"));
        assert_eq!(ax.d_prime(), 5);
        assert_eq!(ax.point(0), w("b"));
        assert_eq!(ax.point(3), w("b a b a"));
        assert_eq!(ax.point(-1), w("b a-"));
        assert!(Axis::new(&f2().identity()).is_err());
        let sq = Axis::new(&w("a b a b")).unwrap();
        assert_eq!(sq.root(), &w("a b"));
    }

    #[test]
    fn projection_examples() {
        let ax = Axis::new(&w("a b")).unwrap();
        let on = ax.project(&w("a b a"));
        assert_eq!((on.distance, on.axis_coordinate), (0, 3));
        assert_eq!(on.foot, w("a b a"));

        let x = w("b");
        let p = ax.project(&x);
        let (coord, dist) = brute_projection(&ax, &x);
        assert_eq!((p.axis_coordinate, p.distance), (coord, dist));
        assert_eq!(p.foot, f2().identity());
        assert_eq!(p.distance, 1);

        let far = ax.project(&w("a b a b a b a"));
        assert!(far.axis_coordinate >= 6 - 2);
        let off = ax.project(&w("a a b a b a b"));
        assert_eq!(off.axis_coordinate, brute_projection(&ax, &w("a a b a b a b")).0);
        assert_eq!(off.axis_coordinate, 1);
    }

    #[test]
    fn three_axes_p0_diameters_by_brute_force() {
        let x = Axis::new(&w("a b")).unwrap();
        let y = Axis::new(&w("b a")).unwrap();
        let (lo, hi) = x.projection_interval(&y);
        let feet: BTreeSet<i64> = (-20..=20).map(|j| brute_projection(&x, &y.point(j)).0).collect();
        assert_eq!((lo, hi), (*feet.first().unwrap(), *feet.last().unwrap()));
        assert!(hi - lo <= 2);

        let z = Axis::new(&w("a b")).unwrap().translated(&w("b b")).unwrap();
        let (lo, hi) = x.projection_interval(&z);
        assert_eq!(lo, hi);
        assert!(hi - lo <= x.core().len() as i64);
    }

    #[test]
    fn axioms_small_families() {
        let single = [Axis::new(&w("a b")).unwrap()];
        let r = check_projection_axioms(&single, &[], None).unwrap();
        assert_eq!((r.family_size, r.xi_observed), (1, 0));
        assert!(r.violations.is_empty());

        let dup = [Axis::new(&w("a b")).unwrap(), Axis::new(&w("b a")).unwrap().translated(&w("a")).unwrap()];
        assert!(check_projection_axioms(&dup, &[], None).is_err());

        let family = [
            Axis::new(&w("a b")).unwrap(),
            Axis::new(&w("b a")).unwrap(),
            Axis::new(&w("a")).unwrap(),
        ];
        let r = check_projection_axioms(&family, &[w("1"), w("b"), w("a b-")], None).unwrap();
        assert!(r.family_size > 3);
        assert!(r.violations.is_empty());
        assert!(r.xi_observed <= r.tree_bound);
    }

    #[test]
    fn power_bound_examples() {
        let ab = Axis::new(&w("a b")).unwrap();
        let r = power_projection_bound(&ab, &w("a b"), 8).unwrap();
        assert_eq!(r.power_in_h, Some(1));
        assert!(r.passed);
        let r = power_projection_bound(&ab, &w("a"), 8).unwrap();
        assert_eq!(r.power_in_h, None);
        assert!(r.bound_holds);
        let r = power_projection_bound(&ab, &w("b- a b"), 8).unwrap();
        assert!(r.passed);
        let sq = Axis::new(&w("a b a b")).unwrap();
        assert_eq!(power_projection_bound(&sq, &w("a b"), 8).unwrap().power_in_h, Some(2));
        assert!(power_projection_bound(&ab, &f2().identity(), 3).is_err());
    }

    #[test]
    fn power_bound_exhaustive_fixes_d_tree() {
        for h in ["a", "ab", "a b a-", "a a b"] {
            let ax = Axis::new(&w(h)).unwrap();
            for g in ball(4).into_iter().skip(1) {
                let r = power_projection_bound(&ax, &g, 8).unwrap();
                assert!(r.passed, "h = {h}, g = {g}: {r:?}");
            }
        }
    }

    #[test]
    fn long_projection_examples() {
        let h = w("a b");
        let g = w("a b").pow(6);
        let ws = find_long_projections(&g, &h, 6).unwrap();
        let positive: Vec<_> = ws.iter().filter(|x| x.positive).collect();
        assert_eq!(positive.len(), 1);
        assert!(positive[0].k.is_identity());
        assert!(positive[0].projection_diameter >= 12 - 4);

        let neg = w("a b").pow(-6);
        for k in 5..12 {
            assert!(find_long_projections(&neg, &h, k).unwrap().is_empty(), "K = {k}");
        }
        assert!(!find_long_projections(&neg, &h, 2).unwrap().is_empty());

        assert!(find_long_projections(&w("a b a"), &h, 8).unwrap().is_empty());
        assert!(find_long_projections(&g, &h, 0).is_err());
        assert!(find_long_projections(&g, &f2().identity(), 3).is_err());
    }

    #[test]
    fn witnesses_satisfy_definition_by_brute_force() {
        for (h, k_len) in [("a b", 3), ("a", 2), ("b a b-", 2), ("a b", 1)] {
            let h = w(h);
            let axis = Axis::new(&h).unwrap();
            let dp = axis.d_prime();
            for g in ball(7) {
                for wit in find_long_projections(&g, &h, k_len).unwrap() {
                    let line = axis.translated(&wit.k).unwrap();
                    let x0 = line.project(&g.prefix(wit.start));
                    let x1 = line.project(&g.prefix(wit.end));
                    let diam = (x1.axis_coordinate - x0.axis_coordinate).unsigned_abs() as usize;
                    assert_eq!(diam, wit.projection_diameter);
                    assert!(diam >= k_len);
                    assert!((&wit.k.inverse() * &x0.foot).len() <= dp);
                    let end = &wit.k * &h.pow(wit.alpha as i64);
                    assert!((&end.inverse() * &x1.foot).len() <= dp, "g = {g}, {wit:?}");
                    assert!(wit.alpha >= 1);
                }
            }
        }
    }

    #[test]
    fn ghat_membership_examples() {
        let h = w("a b");
        assert!(ghat_membership_exact(&f2().identity(), &h, 3).unwrap());
        assert!(!ghat_membership_exact(&w("a b").pow(3), &h, 6).unwrap());
        assert!(ghat_membership_exact(&w("a b a"), &h, 4).unwrap());
        let h = w("b a b-");
        assert!(!ghat_membership_exact(&w("a a a a a"), &h, 5).unwrap());
    }

    #[test]
    fn ghat_automaton_examples() {
        let fs = core_factors(&w("a b"), 4).unwrap();
        assert_eq!(fs, vec![w("a b a b"), w("b a b a")]);
        assert_eq!(core_factors(&w("a"), 3).unwrap(), vec![w("a a a")]);
        assert!(ghat_automaton(f2(), &w("a b"), 1).is_err());

        let aut = ghat_automaton(f2(), &w("a"), 3).unwrap();
        let br = crate::automata::perron_root::<f64>(&aut, 1e-9).unwrap();
        assert!(br.upper < 3f64.ln());

        let big = ghat_automaton(f2(), &w("a b"), 12).unwrap();
        let full = reduced_word_automaton(f2());
        assert_eq!(count_lengths(&big, 9), count_lengths(&full, 9));
    }

    #[test]
    fn ghat_sandwich_up_to_radius_nine() {
        for h in ["a", "a b"] {
            let h = w(h);
            let dp = Axis::new(&h).unwrap().d_prime();
            for m in [h.len().max(2), 3, 4, 5, 6] {
                let aut = ghat_automaton(f2(), &h, m).unwrap();
                for r in 0..=9 {
                    for_each_in_sphere(f2(), r, |x| {
                        let g = ReducedWord::from_reduced_unchecked(f2(), x.to_vec());
                        let accepted = aut.accepts(x);
                        if m > 2 * dp && ghat_membership_exact(&g, &h, m - 2 * dp).unwrap() {
                            assert!(accepted, "lower inclusion fails for {g}");
                        }
                        if accepted {
                            assert!(ghat_membership_exact(&g, &h, m + 2 * dp).unwrap());
                        }
                        if m > dp {
                            assert_eq!(accepted, ghat_membership_exact(&g, &h, m).unwrap());
                        }
                    });
                }
            }
        }
    }

    #[test]
    fn shorten_examples() {
        let h = w("a b");
        let g = w("a b").pow(8);
        match shorten(&g, &h, 6).unwrap() {
            Shortening::Shortened { g_prime, k, alpha, interval } => {
                assert!(g_prime.len() < 16);
                assert!(k.is_identity());
                assert!(interval.0 <= alpha && alpha <= interval.1);
                for a in interval.0..=interval.1 {
                    assert!(apply_move(&k, &h, a as i64, &g).len() < 16, "alpha = {a}");
                }
            }
            other => panic!("expected a shortening, got {other:?}"),
        }

        let inside = w("a b a");
        assert_eq!(shorten(&inside, &h, 6).unwrap(), Shortening::Unchanged);

        let g = &w("b-") * &w("a b").pow(8);
        match shorten(&g, &h, 6).unwrap() {
            Shortening::Shortened { g_prime, k, .. } => {
                assert!(!k.is_identity());
                assert!(g_prime.len() < g.len());
            }
            other => panic!("expected a shortening, got {other:?}"),
        }
        assert_eq!(shorten_threshold(&h).unwrap(), 14);
        assert_eq!(shorten_threshold(&w("a")).unwrap(), 10);
    }

    #[test]
    fn alpha_upper_end_grows_linearly_in_k() {
        let h = w("a b");
        let upper = |n: i64| match shorten(&w("a b").pow(n), &h, 14).unwrap() {
            Shortening::Shortened { interval, .. } => interval.1,
            _ => panic!(),
        };
        assert_eq!(upper(20) - upper(10), 10);
    }

    #[test]
    fn shortening_soundness_exhaustive() {
        for hs in ["a", "ab"] {
            let h = w(hs);
            let threshold = shorten_threshold(&h).unwrap();
            for k_len in (Axis::new(&h).unwrap().d_prime() + 1)..=threshold {
                for g in ball(10) {
                    if ghat_membership_exact(&g, &h, k_len).unwrap() {
                        assert_eq!(shorten(&g, &h, k_len).unwrap(), Shortening::Unchanged);
                        continue;
                    }
                    match shorten(&g, &h, k_len) {
                        Ok(Shortening::Shortened { g_prime, k, alpha, .. }) => {
                            assert!(g_prime.len() < g.len());
                            assert_eq!(g_prime, apply_move(&k, &h, alpha as i64, &g));
                            assert_eq!(quotient_image(hs, &g_prime), quotient_image(hs, &g));
                        }
                        Ok(Shortening::Unchanged) => panic!("{g} is outside Ĝ({k_len})"),
                        Err(e) => assert!(k_len < threshold, "{g}: {e}"),
                    }
                }
            }
        }
    }

    #[test]
    fn iterated_shortening_lands_in_ghat() {
        let h = w("a b");
        let g = &(&w("b b") * &w("a b").pow(9)) * &w("a a");
        let out = shorten_fully(&g, &h, 14).unwrap();
        assert!(out.len() < g.len());
        assert!(ghat_membership_exact(&out, &h, 14).unwrap());
    }

    #[test]
    fn quasi_geodesic_constants() {
        for hs in ["a b", "b a a b-", "a b- a b a- b-"] {
            let h = w(hs);
            let ax = Axis::new(&h).unwrap();
            let c = ax.conjugator().len();
            for i in -4i64..=4 {
                for j in -4i64..=4 {
                    let d = (&h.pow(i).inverse() * &h.pow(j)).len();
                    let expected = (i - j).unsigned_abs() as usize * ax.core().len();
                    assert_eq!(d, if i == j { 0 } else { expected + 2 * c });
                }
            }
        }
    }

    proptest! {
        #[test]
        fn projection_is_nearest_point(h in nontrivial(6), x in word_strategy(10)) {
            let ax = Axis::new(&h).unwrap();
            let p = ax.project(&x);
            let (coord, dist) = brute_projection(&ax, &x);
            prop_assert_eq!(p.distance, dist);
            prop_assert_eq!(p.axis_coordinate, coord);
            prop_assert_eq!(p.foot, ax.point(coord));
        }

        #[test]
        fn projection_is_equivariant(h in nontrivial(6), x in word_strategy(8), g in word_strategy(8)) {
            let ax = Axis::new(&h).unwrap();
            let moved = ax.translated(&g).unwrap();
            let p = ax.project(&x);
            let q = moved.project(&(&g * &x));
            prop_assert_eq!(q.foot, &g * &p.foot);
            prop_assert_eq!(q.distance, p.distance);
            prop_assert_eq!(q.axis_coordinate, p.axis_coordinate);
        }

        #[test]
        fn disjoint_segments_project_to_a_point(h in nontrivial(5), x in word_strategy(8), y in word_strategy(8)) {
            let ax = Axis::new(&h).unwrap();
            let step = &x.inverse() * &y;
            let meets = (0..=step.len()).any(|i| ax.contains(&(&x * &step.prefix(i))));
            if !meets {
                prop_assert_eq!(ax.project(&x).foot, ax.project(&y).foot);
            }
        }

        #[test]
        fn long_core_runs_are_shortened(pre in word_strategy(6), post in word_strategy(6), n in 8i64..14, pick in 0usize..2) {
            let (hs, h) = [("a", w("a")), ("ab", w("a b"))][pick].clone();
            let threshold = shorten_threshold(&h).unwrap();
            let g = &(&pre * &h.pow(n)) * &post;
            match shorten(&g, &h, threshold).unwrap() {
                Shortening::Unchanged => prop_assert!(ghat_membership_exact(&g, &h, threshold).unwrap()),
                Shortening::Shortened { g_prime, .. } => {
                    prop_assert!(g_prime.len() < g.len());
                    prop_assert_eq!(quotient_image(hs, &g_prime), quotient_image(hs, &g));
                }
            }
        }
    }
}
