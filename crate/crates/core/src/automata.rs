//! Counting automata for languages of reduced words.
//!
//! A [`CountingAutomaton`] is a trimmed deterministic automaton over the
//! letters of an [`Alphabet`]. Its transfer matrix counts letters between
//! states, so accepted words of length `r` are counted exactly by dynamic
//! programming, and the growth exponent of the language is the log of the
//! matrix's spectral radius.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::growth::{GrowthBracket, Method, Regime};
use crate::scalar::Real;
use crate::words::{Alphabet, Letter, ReducedWord};

/// Deterministic, trimmed automaton with an integer transfer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingAutomaton {
    alphabet: Alphabet,
    initial: usize,
    accepting: Vec<bool>,
    delta: Vec<Vec<Option<usize>>>,
}

impl CountingAutomaton {
    /// Builds and trims an automaton. `delta[s][l]` is the successor of state `s` on letter `l`.
    pub fn new(
        alphabet: Alphabet,
        initial: usize,
        accepting: Vec<bool>,
        delta: Vec<Vec<Option<usize>>>,
    ) -> Result<Self> {
        let n = delta.len();
        if initial >= n || accepting.len() != n {
            return Err(invalid("automaton state tables are inconsistent"));
        }
        for row in &delta {
            if row.len() != alphabet.size() {
                return Err(invalid("transition row width differs from alphabet size"));
            }
            if row.iter().flatten().any(|&t| t >= n) {
                return Err(invalid("transition to an unknown state"));
            }
        }
        Ok(CountingAutomaton {
            alphabet,
            initial,
            accepting,
            delta,
        }
        .trimmed())
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, s: usize) -> bool {
        self.accepting[s]
    }

    pub fn step(&self, s: usize, l: Letter) -> Option<usize> {
        self.delta[s][l.0 as usize]
    }

    pub fn accepts(&self, word: &[Letter]) -> bool {
        let mut s = self.initial;
        for &l in word {
            match self.step(s, l) {
                Some(t) => s = t,
                None => return false,
            }
        }
        self.accepting[s]
    }

    /// `m[s][t]` = number of letters carrying `s` to `t`.
    pub fn transfer_matrix(&self) -> Vec<Vec<u64>> {
        let n = self.num_states();
        let mut m = vec![vec![0u64; n]; n];
        for (s, row) in self.delta.iter().enumerate() {
            for &t in row.iter().flatten() {
                m[s][t] += 1;
            }
        }
        m
    }

    /// Keeps states that are reachable and co-reachable, renumbered in BFS order.
    fn trimmed(self) -> Self {
        let n = self.num_states();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (s, row) in self.delta.iter().enumerate() {
            for &t in row.iter().flatten() {
                rev[t].push(s);
            }
        }
        let mut coacc = self.accepting.clone();
        let mut queue: VecDeque<usize> = (0..n).filter(|&s| coacc[s]).collect();
        while let Some(t) = queue.pop_front() {
            for &s in &rev[t] {
                if !coacc[s] {
                    coacc[s] = true;
                    queue.push_back(s);
                }
            }
        }
        if !coacc[self.initial] {
            return CountingAutomaton {
                alphabet: self.alphabet,
                initial: 0,
                accepting: vec![false],
                delta: vec![vec![None; self.alphabet.size()]],
            };
        }
        let mut id = vec![usize::MAX; n];
        let mut order = vec![self.initial];
        id[self.initial] = 0;
        let mut head = 0;
        while head < order.len() {
            let s = order[head];
            head += 1;
            for &t in self.delta[s].iter().flatten() {
                if coacc[t] && id[t] == usize::MAX {
                    id[t] = order.len();
                    order.push(t);
                }
            }
        }
        let delta = order
            .iter()
            .map(|&s| {
                self.delta[s]
                    .iter()
                    .map(|t| t.filter(|&t| coacc[t]).map(|t| id[t]))
                    .collect()
            })
            .collect();
        let accepting = order.iter().map(|&s| self.accepting[s]).collect();
        CountingAutomaton {
            alphabet: self.alphabet,
            initial: 0,
            accepting,
            delta,
        }
    }

    /// Structured export: states, initial state, accepting states and transition triples.
    pub fn to_document(&self) -> AutomatonDocument {
        let mut transitions = Vec::new();
        for (s, row) in self.delta.iter().enumerate() {
            for l in self.alphabet.letters() {
                if let Some(t) = row[l.0 as usize] {
                    transitions.push((s, self.alphabet.letter_name(l), t));
                }
            }
        }
        AutomatonDocument {
            rank: self.alphabet.rank(),
            states: self.num_states(),
            initial: self.initial,
            accepting: (0..self.num_states()).filter(|&s| self.accepting[s]).collect(),
            transitions,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AutomatonDocument {
    pub rank: usize,
    pub states: usize,
    pub initial: usize,
    pub accepting: Vec<usize>,
    pub transitions: Vec<(usize, String, usize)>,
}

/// Recognizer of all freely reduced words: a start state plus one state per last letter.
pub fn reduced_word_automaton(alphabet: Alphabet) -> CountingAutomaton {
    let m = alphabet.size();
    let mut delta = vec![vec![None; m]; m + 1];
    for l in alphabet.letters() {
        delta[0][l.0 as usize] = Some(1 + l.0 as usize);
    }
    for last in alphabet.letters() {
        for l in alphabet.letters() {
            if l != alphabet.inverse(last) {
                delta[1 + last.0 as usize][l.0 as usize] = Some(1 + l.0 as usize);
            }
        }
    }
    CountingAutomaton::new(alphabet, 0, vec![true; m + 1], delta)
        .expect("reduced-word automaton is well formed")
}

/// Aho–Corasick matcher over a forbidden set; `dead[q]` marks states that end an occurrence.
struct FactorMatcher {
    goto: Vec<Vec<usize>>,
    dead: Vec<bool>,
}

impl FactorMatcher {
    fn new(alphabet: Alphabet, patterns: &[&[Letter]]) -> Self {
        let m = alphabet.size();
        let mut trie: Vec<Vec<Option<usize>>> = vec![vec![None; m]];
        let mut dead = vec![false];
        for p in patterns {
            let mut q = 0;
            for &l in *p {
                q = match trie[q][l.0 as usize] {
                    Some(nq) => nq,
                    None => {
                        trie.push(vec![None; m]);
                        dead.push(false);
                        let nq = trie.len() - 1;
                        trie[q][l.0 as usize] = Some(nq);
                        nq
                    }
                };
            }
            dead[q] = true;
        }
        let n = trie.len();
        let mut goto = vec![vec![0usize; m]; n];
        let mut fail = vec![0usize; n];
        let mut queue = VecDeque::new();
        for c in 0..m {
            if let Some(q) = trie[0][c] {
                goto[0][c] = q;
                queue.push_back(q);
            }
        }
        while let Some(q) = queue.pop_front() {
            dead[q] = dead[q] || dead[fail[q]];
            for c in 0..m {
                match trie[q][c] {
                    Some(nq) => {
                        fail[nq] = goto[fail[q]][c];
                        goto[q][c] = nq;
                        queue.push_back(nq);
                    }
                    None => goto[q][c] = goto[fail[q]][c],
                }
            }
        }
        FactorMatcher { goto, dead }
    }
}

/// Sub-language of `base` whose words contain no forbidden word as a contiguous factor.
///
/// Factors are matched literally; `f^-1` is not forbidden unless listed.
pub fn avoid_factors(
    base: &CountingAutomaton,
    forbidden: &[ReducedWord],
) -> Result<CountingAutomaton> {
    let alphabet = base.alphabet;
    for f in forbidden {
        if f.alphabet() != alphabet {
            return Err(Error::AlphabetMismatch {
                left: alphabet.rank(),
                right: f.alphabet().rank(),
            });
        }
        if f.is_identity() {
            return Err(invalid("forbidden word must be non-empty"));
        }
    }
    let patterns: Vec<&[Letter]> = forbidden.iter().map(|f| f.letters()).collect();
    let matcher = FactorMatcher::new(alphabet, &patterns);

    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pairs = vec![(base.initial, 0usize)];
    ids.insert((base.initial, 0), 0);
    let mut delta: Vec<Vec<Option<usize>>> = Vec::new();
    let mut head = 0;
    while head < pairs.len() {
        let (b, q) = pairs[head];
        head += 1;
        let mut row = vec![None; alphabet.size()];
        for l in alphabet.letters() {
            let Some(nb) = base.step(b, l) else { continue };
            let nq = matcher.goto[q][l.0 as usize];
            if matcher.dead[nq] {
                continue;
            }
            let next = *ids.entry((nb, nq)).or_insert_with(|| {
                pairs.push((nb, nq));
                pairs.len() - 1
            });
            row[l.0 as usize] = Some(next);
        }
        delta.push(row);
    }
    let accepting = pairs.iter().map(|&(b, _)| base.accepting[b]).collect();
    CountingAutomaton::new(alphabet, 0, accepting, delta)
}

/// Exact sphere counts: `counts[r]` is the number of accepted words of length `r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountSequence {
    counts: Vec<BigUint>,
}

impl CountSequence {
    pub fn new(counts: Vec<BigUint>) -> Self {
        CountSequence { counts }
    }

    pub fn spheres(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Prefix sums: ball counts.
    pub fn balls(&self) -> Vec<BigUint> {
        let mut acc = BigUint::zero();
        self.counts
            .iter()
            .map(|c| {
                acc += c;
                acc.clone()
            })
            .collect()
    }

    /// `r,sphere,ball` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,sphere,ball\n");
        for (r, (s, b)) in self.counts.iter().zip(self.balls()).enumerate() {
            out.push_str(&format!("{r},{s},{b}\n"));
        }
        out
    }
}

pub fn count_lengths(aut: &CountingAutomaton, r_max: usize) -> CountSequence {
    let n = aut.num_states();
    let mut cur = vec![BigUint::zero(); n];
    cur[aut.initial] = BigUint::from(1u32);
    let mut counts = Vec::with_capacity(r_max + 1);
    for r in 0..=r_max {
        let total = cur
            .iter()
            .enumerate()
            .filter(|(s, _)| aut.accepting[*s])
            .fold(BigUint::zero(), |acc, (_, c)| acc + c);
        counts.push(total);
        if r == r_max {
            break;
        }
        let mut next = vec![BigUint::zero(); n];
        for (s, c) in cur.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for &t in aut.delta[s].iter().flatten() {
                next[t] += c;
            }
        }
        cur = next;
    }
    CountSequence { counts }
}

/// Iteration budget for [`perron_root`].
pub const PERRON_MAX_ITERATIONS: usize = 200_000;

/// Strongly connected components (Tarjan), in reverse topological order.
fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// Two-sided bounds on the Perron root of an irreducible non-negative matrix with at least one cycle.
///
/// Iterates `B = M + I`, which is primitive, and reads off the Collatz–Wielandt
/// quotients `min (Bx)_i/x_i <= rho(B) <= max (Bx)_i/x_i`, widened for rounding.
fn irreducible_perron_bounds<T: Real>(m: &[Vec<u64>], tol: T) -> Result<(T, T)> {
    let n = m.len();
    let entries: Vec<Vec<(usize, T)>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut e: Vec<(usize, T)> = row
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0)
                .map(|(j, &v)| (j, T::from_u64(v).expect("matrix entry")))
                .collect();
            match e.iter_mut().find(|(j, _)| *j == i) {
                Some(d) => d.1 = d.1 + T::one(),
                None => e.push((i, T::one())),
            }
            e
        })
        .collect();
    let eta = T::lit(4.0) * T::from_usize_exact(n + 2) * T::epsilon();
    let log_slack = T::lit(8.0) * T::epsilon();
    let mut x = vec![T::one(); n];
    let mut best = (T::one(), T::infinity());
    for _ in 0..PERRON_MAX_ITERATIONS {
        let y: Vec<T> = entries
            .iter()
            .map(|row| row.iter().fold(T::zero(), |acc, &(j, v)| acc + v * x[j]))
            .collect();
        let mut lo = T::infinity();
        let mut hi = T::zero();
        for (yi, xi) in y.iter().zip(&x) {
            let q = *yi / *xi;
            lo = lo.min(q);
            hi = hi.max(q);
        }
        let lower = (lo * (T::one() - eta) - T::one()).max(T::one());
        let upper = hi * (T::one() + eta) - T::one();
        best.0 = best.0.max(lower);
        best.1 = best.1.min(upper);
        let ln_lo = best.0.ln() - log_slack * (T::one() + best.0.ln().abs());
        let ln_hi = best.1.ln() + log_slack * (T::one() + best.1.ln().abs());
        if ln_hi - ln_lo <= tol {
            return Ok((ln_lo.max(T::zero()), ln_hi));
        }
        let scale = y.iter().copied().fold(T::zero(), T::max);
        x = y.into_iter().map(|v| v / scale).collect();
    }
    Err(Error::ResourceLimit(format!(
        "Perron bracket did not reach width {tol} in {PERRON_MAX_ITERATIONS} iterations"
    )))
}

/// Bracket of width at most `tol` around `log rho`, where `rho` is the spectral radius of the
/// transfer matrix. A language with no cycles has exponent `-inf`.
pub fn perron_root<T: Real>(aut: &CountingAutomaton, tol: T) -> Result<GrowthBracket<T>> {
    if !(tol > T::zero()) {
        return Err(invalid("tolerance must be positive"));
    }
    let m = aut.transfer_matrix();
    let adj: Vec<Vec<usize>> = m
        .iter()
        .map(|row| (0..row.len()).filter(|&j| row[j] > 0).collect())
        .collect();
    let mut bracket: Option<(T, T)> = None;
    for comp in strongly_connected_components(&adj) {
        let cyclic = comp.len() > 1 || m[comp[0]][comp[0]] > 0;
        if !cyclic {
            continue;
        }
        let sub: Vec<Vec<u64>> = comp
            .iter()
            .map(|&i| comp.iter().map(|&j| m[i][j]).collect())
            .collect();
        let (lo, hi) = irreducible_perron_bounds(&sub, tol)?;
        bracket = Some(match bracket {
            None => (lo, hi),
            Some((a, b)) => (a.max(lo), b.max(hi)),
        });
    }
    Ok(match bracket {
        None => GrowthBracket::neg_infinity(Method::Spectral),
        Some((lower, upper)) => GrowthBracket {
            lower,
            upper,
            estimate: (lower + upper) / T::lit(2.0),
            method: Method::Spectral,
            regime: Regime::Limit,
            radii: [0, 0],
            lower_certified: true,
            upper_certified: true,
        },
    })
}

/// Growth exponents after forbidding `f` alone and after forbidding both `f` and `f^-1`.
pub fn oriented_vs_unoriented_gap<T: Real>(
    alphabet: Alphabet,
    f: &ReducedWord,
    tol: T,
) -> Result<(GrowthBracket<T>, GrowthBracket<T>)> {
    if f.is_identity() {
        return Err(invalid("forbidden word must be non-trivial"));
    }
    let base = reduced_word_automaton(alphabet);
    let oriented = avoid_factors(&base, std::slice::from_ref(f))?;
    let both = avoid_factors(&base, &[f.clone(), f.inverse()])?;
    Ok((perron_root(&oriented, tol)?, perron_root(&both, tol)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{for_each_in_sphere, contains_factor};

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn w(s: &str) -> ReducedWord {
        f2().parse_word(s).unwrap()
    }

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    /// Brute force: reduced words of each length avoiding every forbidden factor.
    fn brute_counts(a: Alphabet, forbidden: &[ReducedWord], r_max: usize) -> Vec<BigUint> {
        (0..=r_max)
            .map(|r| {
                let mut n = 0u64;
                for_each_in_sphere(a, r, |x| {
                    if forbidden.iter().all(|f| !contains_factor(x, f.letters())) {
                        n += 1;
                    }
                });
                BigUint::from(n)
            })
            .collect()
    }

    #[test]
    fn reduced_word_automaton_shapes() {
        let aut = reduced_word_automaton(f2());
        assert_eq!(aut.num_states(), 5);
        assert_eq!(count_lengths(&aut, 3).spheres(), big(&[1, 4, 12, 36]).as_slice());
        let z = reduced_word_automaton(Alphabet::new(1).unwrap());
        assert_eq!(count_lengths(&z, 4).spheres(), big(&[1, 2, 2, 2, 2]).as_slice());
        let f3 = reduced_word_automaton(Alphabet::new(3).unwrap());
        let br = perron_root::<f64>(&f3, 1e-10).unwrap();
        assert!(br.contains(5f64.ln()));
    }

    #[test]
    fn transfer_matrix_row_sums() {
        let aut = reduced_word_automaton(f2());
        let m = aut.transfer_matrix();
        assert_eq!(m[0].iter().sum::<u64>(), 4);
        for row in &m[1..] {
            assert_eq!(row.iter().sum::<u64>(), 3);
        }
    }

    #[test]
    fn avoid_examples() {
        let base = reduced_word_automaton(f2());
        let no_ab = avoid_factors(&base, &[w("ab")]).unwrap();
        assert_eq!(count_lengths(&no_ab, 2).spheres()[2], BigUint::from(11u32));

        let no_a = avoid_factors(&base, &[w("a")]).unwrap();
        let counts = count_lengths(&no_a, 9);
        assert_eq!(&counts.spheres()[..2], big(&[1, 3]).as_slice());
        assert_eq!(counts.spheres(), brute_counts(f2(), &[w("a")], 9).as_slice());

        let same = avoid_factors(&base, &[]).unwrap();
        assert_eq!(count_lengths(&same, 8), count_lengths(&base, 8));

        let pair = avoid_factors(&base, &[w("ab"), w("ba")]).unwrap();
        let expected = brute_counts(f2(), &[w("ab"), w("ba")], 3);
        assert_eq!(count_lengths(&pair, 3).spheres(), expected.as_slice());
    }

    #[test]
    fn avoid_rejects_empty_and_foreign_words() {
        let base = reduced_word_automaton(f2());
        assert!(avoid_factors(&base, &[f2().identity()]).is_err());
        let f3 = Alphabet::new(3).unwrap();
        assert!(avoid_factors(&base, &[f3.parse_word("c").unwrap()]).is_err());
    }

    #[test]
    fn empty_language_counts_zero() {
        let base = reduced_word_automaton(f2());
        let none = avoid_factors(&base, &[w("a"), w("b"), w("a-"), w("b-")]).unwrap();
        // only the identity survives
        assert_eq!(count_lengths(&none, 4).spheres(), big(&[1, 0, 0, 0, 0]).as_slice());
        let br = perron_root::<f64>(&none, 1e-9).unwrap();
        assert_eq!(br.upper, f64::NEG_INFINITY);

        let dead = CountingAutomaton::new(f2(), 0, vec![false], vec![vec![None; 4]]).unwrap();
        assert!(count_lengths(&dead, 5).spheres().iter().all(|c| c.is_zero()));
        assert_eq!(perron_root::<f64>(&dead, 1e-9).unwrap().lower, f64::NEG_INFINITY);
    }

    #[test]
    fn trimming_drops_dead_states() {
        // state 1 is a sink that never accepts
        let mut delta = vec![vec![None; 4]; 3];
        delta[0][0] = Some(1);
        delta[0][1] = Some(2);
        delta[1][0] = Some(1);
        delta[2][1] = Some(2);
        let aut = CountingAutomaton::new(f2(), 0, vec![true, false, true], delta).unwrap();
        assert_eq!(aut.num_states(), 2);
        let br = perron_root::<f64>(&aut, 1e-9).unwrap();
        assert!(br.contains(0.0));
    }

    #[test]
    fn perron_examples() {
        let base = reduced_word_automaton(f2());
        let br = perron_root::<f64>(&base, 1e-10).unwrap();
        assert!(br.contains(3f64.ln()));
        assert!(br.width() <= 1e-10);

        let z = reduced_word_automaton(Alphabet::new(1).unwrap());
        let br = perron_root::<f64>(&z, 1e-10).unwrap();
        assert!(br.contains(0.0));

        let tol = 1e-9;
        let no_ab = avoid_factors(&base, &[w("ab")]).unwrap();
        let br = perron_root::<f64>(&no_ab, tol).unwrap();
        assert!(br.upper < 3f64.ln() - 10.0 * tol);
    }

    #[test]
    fn perron_works_in_f32() {
        let base = reduced_word_automaton(f2());
        let br = perron_root::<f32>(&base, 1e-4).unwrap();
        assert!(br.contains(3f32.ln()));
        assert!(matches!(
            perron_root::<f32>(&base, 1e-12),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn perron_handles_periodic_components() {
        // a two-cycle 0 -> 1 -> 0 on single letters is periodic with rho = 1
        let mut delta = vec![vec![None; 4]; 2];
        delta[0][0] = Some(1);
        delta[1][1] = Some(0);
        let aut = CountingAutomaton::new(f2(), 0, vec![true, true], delta).unwrap();
        let br = perron_root::<f64>(&aut, 1e-9).unwrap();
        assert!(br.contains(0.0));
    }

    #[test]
    fn oriented_gap_examples() {
        let tol = 1e-9;
        let (one, both) = oriented_vs_unoriented_gap::<f64>(f2(), &w("ab"), tol).unwrap();
        assert!(one.lower >= both.lower);
        assert!(one.upper < 3f64.ln() && both.upper < 3f64.ln());

        let (one, both) = oriented_vs_unoriented_gap::<f64>(f2(), &w("a"), tol).unwrap();
        let base = reduced_word_automaton(f2());
        let aut_one = avoid_factors(&base, &[w("a")]).unwrap();
        let aut_both = avoid_factors(&base, &[w("a"), w("a-")]).unwrap();
        assert_eq!(
            count_lengths(&aut_one, 10).spheres(),
            brute_counts(f2(), &[w("a")], 10).as_slice()
        );
        assert_eq!(
            count_lengths(&aut_both, 10).spheres(),
            brute_counts(f2(), &[w("a"), w("a-")], 10).as_slice()
        );
        // forbidding a and a- leaves powers of b: exponent 0
        assert!(both.contains(0.0));
        assert!(one.lower > both.upper);
    }

    #[test]
    fn long_forbidden_word_leaves_small_radii_alone() {
        let base = reduced_word_automaton(f2());
        let f = w("a b a b a b a");
        let aut = avoid_factors(&base, &[f]).unwrap();
        assert_eq!(count_lengths(&aut, 6), count_lengths(&base, 6));
    }

    #[test]
    fn csv_export() {
        let csv = count_lengths(&reduced_word_automaton(f2()), 2).to_csv();
        assert_eq!(csv, "r,sphere,ball\n0,1,1\n1,4,5\n2,12,17\n");
    }
}
