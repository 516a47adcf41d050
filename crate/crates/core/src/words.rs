//! Exact arithmetic in finite-rank free groups.
//!
//! A free group of rank `k` is generated by `a_1, ..., a_k`. The symmetric
//! generating set has `2k` letters, ordered `a_1 < ... < a_k < a_1^-1 < ... < a_k^-1`;
//! that order is the base of the shortlex order used everywhere for canonical
//! choices. Elements are stored as freely reduced words, which is the normal
//! form, and the word length is the distance from the identity vertex in the
//! Cayley tree.
//!
//! # Text format
//!
//! Letters are named `a`, `b`, `c`, ... in generator order. An inverse is
//! written with a `-` or `'` suffix (`a-`, `a'`), or as the upper-case name
//! (`A`). Tokens may be separated by whitespace or written back to back, so
//! `"a b a-"`, `"aba-"` and `"abA"` denote the same word. The identity is the
//! empty string or `1`. Words are printed as space-separated tokens with the
//! `-` suffix, and the identity prints as `1`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// A letter of the symmetric generating set, stored as its index in the base order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub u8);

/// Symmetric free generating set of a free group of rank `k`, `1 <= k <= 26`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet {
    rank: usize,
}

impl Alphabet {
    pub const MAX_RANK: usize = 26;

    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 || rank > Self::MAX_RANK {
            return Err(invalid(format!(
                "rank must lie in 1..={}, got {rank}",
                Self::MAX_RANK
            )));
        }
        Ok(Alphabet { rank })
    }

    pub fn rank(self) -> usize {
        self.rank
    }

    /// Number of letters, `2k`.
    pub fn size(self) -> usize {
        2 * self.rank
    }

    pub fn letters(self) -> impl Iterator<Item = Letter> {
        (0..self.size() as u8).map(Letter)
    }

    pub fn contains(self, l: Letter) -> bool {
        (l.0 as usize) < self.size()
    }

    /// The inverse pairing `a_i <-> a_i^-1`.
    #[inline]
    pub fn inverse(self, l: Letter) -> Letter {
        let k = self.rank as u8;
        if l.0 < k {
            Letter(l.0 + k)
        } else {
            Letter(l.0 - k)
        }
    }

    pub fn generator(self, i: usize) -> Letter {
        assert!(i < self.rank, "generator index out of range");
        Letter(i as u8)
    }

    /// Index of the generator underlying `l`, ignoring orientation.
    pub fn generator_index(self, l: Letter) -> usize {
        (l.0 as usize) % self.rank
    }

    pub fn is_inverse_letter(self, l: Letter) -> bool {
        (l.0 as usize) >= self.rank
    }

    pub fn letter_name(self, l: Letter) -> String {
        let c = (b'a' + self.generator_index(l) as u8) as char;
        if self.is_inverse_letter(l) {
            format!("{c}-")
        } else {
            c.to_string()
        }
    }

    /// Parses a letter sequence without reducing it.
    pub fn parse_letters(self, text: &str) -> Result<Vec<Letter>> {
        let chars: Vec<char> = text.chars().collect();
        let trimmed: String = text.trim().to_string();
        if trimmed.is_empty() || trimmed == "1" {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let (index, mut inverted) = if c.is_ascii_lowercase() {
                ((c as u8 - b'a') as usize, false)
            } else if c.is_ascii_uppercase() {
                ((c as u8 - b'A') as usize, true)
            } else {
                return Err(Error::Malformed {
                    position: i,
                    message: format!("unexpected character {c:?}"),
                });
            };
            if index >= self.rank {
                return Err(Error::Malformed {
                    position: i,
                    message: format!("letter {c:?} is not in the rank-{} alphabet", self.rank),
                });
            }
            i += 1;
            if i < chars.len() && (chars[i] == '-' || chars[i] == '\'') {
                inverted = !inverted;
                i += 1;
            } else if i + 1 < chars.len() && chars[i] == '⁻' && chars[i + 1] == '¹' {
                inverted = !inverted;
                i += 2;
            }
            let l = Letter(index as u8);
            out.push(if inverted { self.inverse(l) } else { l });
        }
        Ok(out)
    }

    /// Parses and freely reduces a word.
    pub fn parse_word(self, text: &str) -> Result<ReducedWord> {
        let raw = self.parse_letters(text)?;
        free_reduce(self, &raw)
    }

    pub fn identity(self) -> ReducedWord {
        ReducedWord {
            alphabet: self,
            letters: Vec::new(),
        }
    }
}

/// A freely reduced word: no letter is adjacent to its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    alphabet: Alphabet,
    letters: Vec<Letter>,
}

/// Stack-based free reduction.
pub fn free_reduce(alphabet: Alphabet, raw: &[Letter]) -> Result<ReducedWord> {
    let mut out: Vec<Letter> = Vec::with_capacity(raw.len());
    for (pos, &l) in raw.iter().enumerate() {
        if !alphabet.contains(l) {
            return Err(Error::Malformed {
                position: pos,
                message: format!("letter index {} outside the rank-{} alphabet", l.0, alphabet.rank),
            });
        }
        push_reduced(alphabet, &mut out, l);
    }
    Ok(ReducedWord {
        alphabet,
        letters: out,
    })
}

#[inline]
fn push_reduced(alphabet: Alphabet, out: &mut Vec<Letter>, l: Letter) {
    if out.last() == Some(&alphabet.inverse(l)) {
        out.pop();
    } else {
        out.push(l);
    }
}

/// Freely reduced product `uv`.
pub fn multiply(u: &ReducedWord, v: &ReducedWord) -> Result<ReducedWord> {
    u.try_mul(v)
}

impl ReducedWord {
    /// Wraps letters that are already known to be reduced.
    pub(crate) fn from_reduced_unchecked(alphabet: Alphabet, letters: Vec<Letter>) -> Self {
        debug_assert!(letters
            .windows(2)
            .all(|w| w[1] != alphabet.inverse(w[0])));
        ReducedWord { alphabet, letters }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Word length, i.e. distance from the identity in the Cayley tree.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    /// The prefix of length `n`, a vertex on the geodesic from the identity.
    pub fn prefix(&self, n: usize) -> ReducedWord {
        ReducedWord {
            alphabet: self.alphabet,
            letters: self.letters[..n].to_vec(),
        }
    }

    pub fn inverse(&self) -> ReducedWord {
        let a = self.alphabet;
        ReducedWord {
            alphabet: a,
            letters: self.letters.iter().rev().map(|&l| a.inverse(l)).collect(),
        }
    }

    pub fn try_mul(&self, other: &ReducedWord) -> Result<ReducedWord> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch {
                left: self.alphabet.rank,
                right: other.alphabet.rank,
            });
        }
        Ok(self.mul_letters(&other.letters))
    }

    /// Right multiplication by a raw letter sequence (reduced on the fly).
    pub fn mul_letters(&self, letters: &[Letter]) -> ReducedWord {
        let a = self.alphabet;
        let mut out = self.letters.clone();
        for &l in letters {
            push_reduced(a, &mut out, l);
        }
        ReducedWord {
            alphabet: a,
            letters: out,
        }
    }

    /// `self^n` for any integer `n`.
    pub fn pow(&self, n: i64) -> ReducedWord {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = self.alphabet.identity();
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    /// `c · self · c^-1`.
    pub fn conjugate_by(&self, c: &ReducedWord) -> ReducedWord {
        &(c * self) * &c.inverse()
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => self.len() == 1 || l != self.alphabet.inverse(f),
            _ => true,
        }
    }

    /// Splits `self = conjugator · core · conjugator^-1` with `core` cyclically reduced.
    pub fn cyclic_reduce(&self) -> (ReducedWord, ReducedWord) {
        let a = self.alphabet;
        let n = self.letters.len();
        let mut peel = 0;
        while 2 * peel + 1 < n && self.letters[n - 1 - peel] == a.inverse(self.letters[peel]) {
            peel += 1;
        }
        let core = ReducedWord {
            alphabet: a,
            letters: self.letters[peel..n - peel].to_vec(),
        };
        let conj = ReducedWord {
            alphabet: a,
            letters: self.letters[..peel].to_vec(),
        };
        (core, conj)
    }

    /// Shortest `r` with `self = r^m`; the identity is its own root.
    pub fn primitive_root(&self) -> (ReducedWord, usize) {
        let n = self.len();
        for d in 1..=n {
            if n.is_multiple_of(d) && (d..n).all(|i| self.letters[i] == self.letters[i - d]) {
                return (self.prefix(d), n / d);
            }
        }
        (self.clone(), 1)
    }

    /// Signed exponent sum of each generator.
    pub fn exponent_sums(&self) -> Vec<i64> {
        let a = self.alphabet;
        let mut sums = vec![0i64; a.rank];
        for &l in &self.letters {
            let i = a.generator_index(l);
            sums[i] += if a.is_inverse_letter(l) { -1 } else { 1 };
        }
        sums
    }

    /// True iff `f` occurs as a contiguous factor.
    pub fn contains_factor(&self, f: &ReducedWord) -> bool {
        contains_factor(&self.letters, &f.letters)
    }
}

pub(crate) fn contains_factor(hay: &[Letter], needle: &[Letter]) -> bool {
    needle.is_empty() || hay.windows(needle.len()).any(|w| w == needle)
}

impl std::ops::Mul for &ReducedWord {
    type Output = ReducedWord;

    /// Panics on alphabet mismatch; use [`ReducedWord::try_mul`] for a checked product.
    fn mul(self, rhs: &ReducedWord) -> ReducedWord {
        self.try_mul(rhs).expect("multiplying words over different alphabets")
    }
}

impl Ord for ReducedWord {
    /// Shortlex: shorter words first, then lexicographic in the base letter order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.alphabet
            .cmp(&other.alphabet)
            .then(self.letters.len().cmp(&other.letters.len()))
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for (i, &l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&self.alphabet.letter_name(l))?;
        }
        Ok(())
    }
}

impl Serialize for ReducedWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Feasibility guard for brute-force enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub max_radius: usize,
    pub max_words: u128,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_radius: 14,
            max_words: 10_000_000,
        }
    }
}

impl EnumerationLimits {
    pub fn check(&self, alphabet: Alphabet, r: usize) -> Result<()> {
        if r > self.max_radius {
            return Err(Error::ResourceLimit(format!(
                "radius {r} exceeds enumeration cutoff {}",
                self.max_radius
            )));
        }
        let words = ball_size(alphabet, r);
        if words > self.max_words {
            return Err(Error::ResourceLimit(format!(
                "ball of radius {r} has {words} words, budget is {}",
                self.max_words
            )));
        }
        Ok(())
    }
}

/// `2k(2k-1)^{r-1}` for `r >= 1`, saturating.
pub fn sphere_size(alphabet: Alphabet, r: usize) -> u128 {
    if r == 0 {
        return 1;
    }
    let m = alphabet.size() as u128;
    let mut s = m;
    for _ in 1..r {
        s = s.saturating_mul(m - 1);
    }
    s
}

pub fn ball_size(alphabet: Alphabet, r: usize) -> u128 {
    (0..=r).fold(0u128, |acc, i| acc.saturating_add(sphere_size(alphabet, i)))
}

/// Visits every reduced word of length exactly `r` in shortlex order without allocating per word.
pub fn for_each_in_sphere(alphabet: Alphabet, r: usize, mut visit: impl FnMut(&[Letter])) {
    let mut buf: Vec<Letter> = Vec::with_capacity(r);
    fn rec(a: Alphabet, r: usize, buf: &mut Vec<Letter>, visit: &mut dyn FnMut(&[Letter])) {
        if buf.len() == r {
            visit(buf);
            return;
        }
        for l in a.letters() {
            if let Some(&last) = buf.last() {
                if l == a.inverse(last) {
                    continue;
                }
            }
            buf.push(l);
            rec(a, r, buf, visit);
            buf.pop();
        }
    }
    rec(alphabet, r, &mut buf, &mut visit);
}

/// All reduced words of length `r`, in shortlex order.
pub fn enumerate_sphere(
    alphabet: Alphabet,
    r: usize,
    limits: &EnumerationLimits,
) -> Result<Vec<ReducedWord>> {
    limits.check(alphabet, r)?;
    let mut out = Vec::with_capacity(sphere_size(alphabet, r) as usize);
    for_each_in_sphere(alphabet, r, |w| {
        out.push(ReducedWord::from_reduced_unchecked(alphabet, w.to_vec()))
    });
    Ok(out)
}

/// All reduced words of length at most `r`, in shortlex order.
pub fn enumerate_ball(
    alphabet: Alphabet,
    r: usize,
    limits: &EnumerationLimits,
) -> Result<Vec<ReducedWord>> {
    limits.check(alphabet, r)?;
    let mut out = Vec::with_capacity(ball_size(alphabet, r) as usize);
    for i in 0..=r {
        for_each_in_sphere(alphabet, i, |w| {
            out.push(ReducedWord::from_reduced_unchecked(alphabet, w.to_vec()))
        });
    }
    Ok(out)
}
