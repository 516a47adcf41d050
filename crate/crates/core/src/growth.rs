//! Growth-exponent estimation from exact counts.
//!
//! All estimators here consume ball counts `P(r) = #{a in A : |a| <= r}`.
//! Only upper bounds are certified from finite data: if `log P` is
//! subadditive up to `b`, then `L <= (log P(i) + b) / i` for every `i`. Lower
//! ends of count-based brackets are extrapolations and carry
//! `lower_certified = false`.

use num_bigint::BigUint;
use serde::Serialize;

use crate::automata::CountSequence;
use crate::error::{invalid, Result};
use crate::scalar::{ln_big, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Subadditive upper bounds on exact counts.
    Fekete,
    /// Collatz–Wielandt bounds on a transfer matrix.
    Spectral,
    /// Norm of factor brackets under the product duality formula.
    Duality,
}

/// Whether the exponent is known to be a limit or only a limsup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Limit,
    Limsup,
}

/// Interval for a growth exponent, with provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthBracket<T> {
    pub lower: T,
    pub upper: T,
    /// Point estimate inside `[lower, upper]`.
    pub estimate: T,
    pub method: Method,
    pub regime: Regime,
    /// Smallest and largest radius whose counts entered the bracket (0,0 for spectral).
    pub radii: [usize; 2],
    pub lower_certified: bool,
    pub upper_certified: bool,
}

impl<T: Real> GrowthBracket<T> {
    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    pub fn contains(&self, x: T) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Distance from `x` to the interval, zero if contained.
    pub fn distance_to(&self, x: T) -> T {
        if x < self.lower {
            self.lower - x
        } else if x > self.upper {
            x - self.upper
        } else {
            T::zero()
        }
    }

    /// Exponent of the empty or finite set.
    pub fn neg_infinity(method: Method) -> Self {
        GrowthBracket {
            lower: T::neg_infinity(),
            upper: T::neg_infinity(),
            estimate: T::neg_infinity(),
            method,
            regime: Regime::Limit,
            radii: [0, 0],
            lower_certified: true,
            upper_certified: true,
        }
    }
}

/// Result of an almost-subadditivity scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Subadditivity<T> {
    /// Smallest `b >= 0` with `log P(m+n) <= log P(m) + log P(n) + b` over the tested range.
    pub b: T,
    /// True when `P(m+n) <= P(m) P(n)` held exactly in integer arithmetic.
    pub exact: bool,
    /// Largest `m + n` tested.
    pub max_index: usize,
    /// Pairs `(m, n)` violating the candidate constant, if one was supplied.
    pub violations: Vec<(usize, usize)>,
}

/// Scans all `m, n >= 1` with `m + n < balls.len()`.
pub fn check_subadditivity<T: Real>(
    balls: &[BigUint],
    candidate: Option<T>,
) -> Result<Subadditivity<T>> {
    if let Some(pos) = balls.iter().position(|p| p.bits() == 0) {
        return Err(invalid(format!("zero count at radius {pos}")));
    }
    let logs: Vec<T> = balls.iter().map(ln_big).collect();
    let top = balls.len().saturating_sub(1);
    let mut exact = true;
    let mut b = T::zero();
    let mut violations = Vec::new();
    for total in 2..=top {
        for m in 1..total {
            let n = total - m;
            if n < m {
                break;
            }
            let prod = &balls[m] * &balls[n];
            let excess = logs[total] - logs[m] - logs[n];
            if balls[total] > prod {
                exact = false;
                b = b.max(excess);
            }
            if let Some(c) = candidate {
                let violated = if c == T::zero() {
                    balls[total] > prod
                } else {
                    excess > c
                };
                if violated {
                    violations.push((m, n));
                }
            }
        }
    }
    Ok(Subadditivity {
        b,
        exact,
        max_index: top,
        violations,
    })
}

/// Certified upper bounds `(a_i + b) / i` for every `i >= 1`.
pub fn fekete_upper_bounds<T: Real>(log_counts: &[T], b: T) -> Vec<(usize, T)> {
    log_counts
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &a)| (i, (a + b) / T::from_usize_exact(i)))
        .collect()
}

/// Bracket for `L = lim a_i / i` from an almost-subadditive sequence.
///
/// The upper end is `min_i (a_i + b)/i`. The estimate is the secant slope
/// `(a_I - a_J)/(I - J)` with `J = I/2`, which removes the `c/i` term of
/// `a_i/i`; the heuristic lower end mirrors the residual `a_I/I - estimate`
/// below the estimate.
pub fn fekete_bracket<T: Real>(log_counts: &[T], b: T) -> Result<GrowthBracket<T>> {
    let top = log_counts.len().checked_sub(1).filter(|&t| t >= 1).ok_or_else(|| {
        invalid("need log-counts for at least radii 0 and 1")
    })?;
    if b < T::zero() {
        return Err(invalid("subadditivity constant must be non-negative"));
    }
    for i in 1..=top {
        if log_counts[i] < log_counts[i - 1] {
            return Err(invalid(format!("log-counts decrease at index {i}")));
        }
    }
    let upper = fekete_upper_bounds(log_counts, b)
        .into_iter()
        .map(|(_, u)| u)
        .fold(T::infinity(), T::min);
    let (estimate, lower) = if top >= 2 {
        let j = top / 2;
        let slope =
            (log_counts[top] - log_counts[j]) / T::from_usize_exact(top - j);
        let tail = log_counts[top] / T::from_usize_exact(top);
        (slope, slope + slope - tail)
    } else {
        (upper, T::zero())
    };
    let lower = lower.min(upper).max(T::zero());
    let estimate = estimate.max(lower).min(upper);
    Ok(GrowthBracket {
        lower,
        upper,
        estimate,
        method: Method::Fekete,
        regime: Regime::Limit,
        radii: [1, top],
        lower_certified: false,
        upper_certified: true,
    })
}

/// Subadditivity scan followed by [`fekete_bracket`] on the ball counts.
pub fn bracket_from_counts<T: Real>(counts: &CountSequence) -> Result<GrowthBracket<T>> {
    let balls = counts.balls();
    let sub = check_subadditivity::<T>(&balls, None)?;
    let logs: Vec<T> = balls.iter().map(ln_big).collect();
    fekete_bracket(&logs, sub.b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesVerdict {
    Converging,
    Diverging,
    Undetermined,
}

/// Partial sums of `sum_r P(r) e^{-rs}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareProbe<T> {
    pub s: T,
    pub partial_sums: Vec<T>,
    /// Average log-decay rate of the terms over the second half of the range.
    pub tail_rate: Option<T>,
    pub verdict: SeriesVerdict,
}

/// Terms decaying at log-rate below this are called converging.
pub const CONVERGING_RATE: f64 = -0.01;
/// Terms whose log-rate stays above this are called diverging.
pub const DIVERGING_RATE: f64 = -0.001;

pub fn poincare_probe<T: Real>(balls: &[BigUint], s: T, r_max: usize) -> Result<PoincareProbe<T>> {
    if s < T::zero() {
        return Err(invalid("Poincaré parameter must be non-negative"));
    }
    let top = r_max.min(balls.len().saturating_sub(1));
    let ln_terms: Vec<T> = balls
        .iter()
        .take(top + 1)
        .enumerate()
        .map(|(r, p)| ln_big::<T>(p) - s * T::from_usize_exact(r))
        .collect();
    let mut acc = T::zero();
    let partial_sums: Vec<T> = ln_terms
        .iter()
        .map(|&lt| {
            acc = acc + lt.exp();
            acc
        })
        .collect();
    let all_zero = ln_terms.iter().all(|t| t.is_infinite());
    let (tail_rate, verdict) = if all_zero {
        (None, SeriesVerdict::Converging)
    } else if top < 2 {
        (None, SeriesVerdict::Undetermined)
    } else {
        let j = top / 2;
        let rate = (ln_terms[top] - ln_terms[j]) / T::from_usize_exact(top - j);
        let verdict = if rate.is_nan() {
            SeriesVerdict::Undetermined
        } else if rate < T::lit(CONVERGING_RATE) {
            SeriesVerdict::Converging
        } else if rate > T::lit(DIVERGING_RATE) {
            SeriesVerdict::Diverging
        } else {
            SeriesVerdict::Undetermined
        };
        (Some(rate), verdict)
    };
    Ok(PoincareProbe {
        s,
        partial_sums,
        tail_rate,
        verdict,
    })
}

/// Term-wise divergence check at a candidate critical exponent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceReport<T> {
    pub delta: T,
    pub b: T,
    /// `P(r) e^{-r delta}` for each tested radius.
    pub terms: Vec<T>,
    pub min_term: T,
    /// Radii where the term fell below `e^{-b - r * slack}`.
    pub failures: Vec<usize>,
    pub holds: bool,
}

/// Checks `P(r) >= e^{r delta - b - r slack}` for `r <= r_max`.
///
/// `slack` absorbs the width of `delta` when it comes from a certified
/// two-sided bracket; pass zero for an exact exponent.
pub fn divergence_at_critical<T: Real>(
    balls: &[BigUint],
    delta: T,
    b: T,
    slack: T,
    r_max: usize,
) -> DivergenceReport<T> {
    let top = r_max.min(balls.len().saturating_sub(1));
    let rel = T::lit(1e-12);
    let mut terms = Vec::with_capacity(top + 1);
    let mut failures = Vec::new();
    for (r, p) in balls.iter().take(top + 1).enumerate() {
        let rr = T::from_usize_exact(r);
        let ln_term = ln_big::<T>(p) - rr * delta;
        let threshold = -b - rr * slack;
        if ln_term < threshold - rel * (T::one() + threshold.abs() + rr * delta.abs()) {
            failures.push(r);
        }
        terms.push(ln_term.exp());
    }
    let min_term = terms.iter().copied().fold(T::infinity(), T::min);
    DivergenceReport {
        delta,
        b,
        terms,
        min_term,
        holds: failures.is_empty(),
        failures,
    }
}

/// [`divergence_at_critical`] at the certified upper end of `bracket`.
pub fn divergence_at_bracket<T: Real>(
    balls: &[BigUint],
    bracket: &GrowthBracket<T>,
    b: T,
    r_max: usize,
) -> DivergenceReport<T> {
    let slack = if bracket.lower_certified {
        bracket.width()
    } else {
        T::zero()
    };
    divergence_at_critical(balls, bracket.upper, b, slack, r_max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport<T> {
    pub sub_upper: T,
    pub full_lower: T,
    /// `full_lower - sub_upper`.
    pub margin: T,
    /// `margin > tol`.
    pub strict_gap: bool,
    /// Strict gap with both bracket ends certified.
    pub certified: bool,
}

pub fn strict_gap_check<T: Real>(
    sub: &GrowthBracket<T>,
    full: &GrowthBracket<T>,
    tol: T,
) -> GapReport<T> {
    let margin = full.lower - sub.upper;
    let strict_gap = margin > tol;
    GapReport {
        sub_upper: sub.upper,
        full_lower: full.lower,
        margin,
        strict_gap,
        certified: strict_gap && sub.upper_certified && full.lower_certified,
    }
}

/// Gap check on raw counts using Fekete brackets; `sub` must be pointwise below `full`.
pub fn strict_gap_from_counts<T: Real>(
    sub: &CountSequence,
    full: &CountSequence,
    tol: T,
) -> Result<GapReport<T>> {
    if let Some(r) = sub
        .spheres()
        .iter()
        .zip(full.spheres())
        .position(|(s, f)| s > f)
    {
        return Err(invalid(format!("sub-count exceeds full count at radius {r}")));
    }
    let sb = bracket_from_counts::<T>(sub)?;
    let fb = bracket_from_counts::<T>(full)?;
    Ok(strict_gap_check(&sb, &fb, tol))
}
