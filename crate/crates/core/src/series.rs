//! Normalized weight sequences γ.
//!
//! The q- and log-q-series are normalized by an Euler–Maclaurin bracket of
//! their infinite sums. Both summands are completely monotone, so the first
//! omitted correction bounds the remainder and the bracket is rigorous up to
//! floating-point rounding. The normalizer is the upper end of the bracket,
//! which keeps every partial sum of γ at or below one.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{euler_maclaurin_tail, CompensatedSum, Jet};

const TABLE_LEN: usize = 4096;
const REL_WIDTH: f64 = 1e-13;
const DIRECT_LIMIT: u64 = 2_000_000;

/// How a series is described in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SeriesSpec {
    Q { q: f64 },
    Logq { q: f64 },
    Explicit { weights: Vec<f64> },
}

impl Default for SeriesSpec {
    fn default() -> Self {
        SeriesSpec::Logq { q: 2.0 }
    }
}

impl SeriesSpec {
    pub fn build(&self) -> Result<WeightSeries> {
        match self {
            SeriesSpec::Q { q } => WeightSeries::q_series(*q),
            SeriesSpec::Logq { q } => WeightSeries::log_q_series(*q),
            SeriesSpec::Explicit { weights } => WeightSeries::explicit(weights.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesKind {
    Q(f64),
    LogQ(f64),
    Explicit,
}

/// A nonnegative sequence γ_1, γ_2, ... with Σ γ_i ≤ 1.
///
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct WeightSeries {
    kind: SeriesKind,
    normalizer: f64,
    bracket: (f64, f64),
    table: Vec<f64>,
}

impl WeightSeries {
    /// γ_i = i^{-q} / ζ(q).
    pub fn q_series(q: f64) -> Result<Self> {
        check_exponent(q)?;
        Self::infinite(SeriesKind::Q(q))
    }

    /// γ_i = c / ((i+1) ln^q(i+1)).
    pub fn log_q_series(q: f64) -> Result<Self> {
        check_exponent(q)?;
        Self::infinite(SeriesKind::LogQ(q))
    }

    /// A finite user list; indices past the end have weight zero.
    pub fn explicit(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("explicit series must contain at least one weight"));
        }
        if let Some(pos) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid(format!(
                "explicit weight {} is not a finite nonnegative number",
                pos + 1
            )));
        }
        let total: CompensatedSum = weights.iter().copied().collect();
        let total = total.value();
        if total > 1.0 + 1e-12 {
            return Err(invalid(format!("explicit weights sum to {total} > 1")));
        }
        Ok(WeightSeries {
            kind: SeriesKind::Explicit,
            normalizer: total,
            bracket: (total, total),
            table: weights,
        })
    }

    fn infinite(kind: SeriesKind) -> Result<Self> {
        let (lo, hi) = certified_sum(kind)?;
        let table = (1..=TABLE_LEN as u64).map(|i| raw(kind, i) / hi).collect();
        Ok(WeightSeries {
            kind,
            normalizer: hi,
            bracket: (lo, hi),
            table,
        })
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.kind, SeriesKind::Explicit)
    }

    /// Number of nonzero-capable entries for explicit series, `None` if infinite.
    pub fn len(&self) -> Option<usize> {
        match self.kind {
            SeriesKind::Explicit => Some(self.table.len()),
            _ => None,
        }
    }

    /// The normalizing constant (upper bracket end for infinite series,
    /// list sum for explicit ones).
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Certified bracket for the unnormalized infinite sum.
    pub fn normalizer_bracket(&self) -> (f64, f64) {
        self.bracket
    }

    /// γ_i with index checking.
    pub fn weight(&self, i: u64) -> Result<f64> {
        if i == 0 {
            return Err(Error::Index(0));
        }
        Ok(self.gamma(i))
    }

    /// γ_i for `i ≥ 1`; returns 0 for `i = 0`.
    pub fn gamma(&self, i: u64) -> f64 {
        if i == 0 {
            return 0.0;
        }
        if let Some(w) = self.table.get((i - 1) as usize) {
            return *w;
        }
        match self.kind {
            SeriesKind::Explicit => 0.0,
            kind => raw(kind, i) / self.normalizer,
        }
    }

    /// The unnormalized summand at a real argument (infinite series only).
    pub fn unnormalized(&self, x: f64) -> f64 {
        match self.kind {
            SeriesKind::Q(q) => x.powf(-q),
            SeriesKind::LogQ(q) => 1.0 / ((x + 1.0) * (x + 1.0).ln().powf(q)),
            SeriesKind::Explicit => 0.0,
        }
    }

    /// Σ_{i ≤ n} γ_i.
    pub fn partial_sum(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match self.kind {
            SeriesKind::Explicit => {
                let end = (n as usize).min(self.table.len());
                let s: CompensatedSum = self.table[..end].iter().rev().copied().collect();
                s.value()
            }
            kind if n <= DIRECT_LIMIT => {
                let s: CompensatedSum = (1..=n).rev().map(|i| raw(kind, i)).collect();
                (s.value() / self.normalizer).min(1.0)
            }
            kind => {
                let (tail, _) = em_tail(kind, n + 1);
                (1.0 - tail / self.normalizer).clamp(0.0, 1.0)
            }
        }
    }

    /// Integral bounds on Σ_{i > n} γ_i: `[∫_{n+1}^∞ u, ∫_n^∞ u] / Z`.
    ///
    /// For explicit series the tail is exact.
    pub fn tail_bracket(&self, n: u64) -> (f64, f64) {
        match self.kind {
            SeriesKind::Explicit => {
                let t = (self.normalizer - self.partial_sum(n)).max(0.0);
                (t, t)
            }
            kind => {
                let lo = tail_integral(kind, (n + 1) as f64) / self.normalizer;
                let hi = if n == 0 {
                    // the first term is not dominated by an integral from 0
                    raw(kind, 1) / self.normalizer + tail_integral(kind, 1.0) / self.normalizer
                } else {
                    tail_integral(kind, n as f64) / self.normalizer
                };
                (lo, hi)
            }
        }
    }
}

fn check_exponent(q: f64) -> Result<()> {
    if !q.is_finite() || q <= 1.0 {
        return Err(invalid(format!("series exponent q must exceed 1, got {q}")));
    }
    Ok(())
}

fn raw(kind: SeriesKind, i: u64) -> f64 {
    let x = i as f64;
    match kind {
        SeriesKind::Q(q) => x.powf(-q),
        SeriesKind::LogQ(q) => {
            let y = x + 1.0;
            1.0 / (y * y.ln().powf(q))
        }
        SeriesKind::Explicit => 0.0,
    }
}

fn tail_integral(kind: SeriesKind, m: f64) -> f64 {
    match kind {
        SeriesKind::Q(q) => m.powf(1.0 - q) / (q - 1.0),
        SeriesKind::LogQ(q) => (m + 1.0).ln().powf(1.0 - q) / (q - 1.0),
        SeriesKind::Explicit => 0.0,
    }
}

fn jet(kind: SeriesKind, m: f64) -> Jet {
    match kind {
        SeriesKind::Q(q) => Jet::variable(m).powf(-q),
        SeriesKind::LogQ(q) => {
            let y = Jet::variable(m + 1.0);
            y.powf(-1.0).mul(&y.ln().powf(-q))
        }
        SeriesKind::Explicit => Jet::constant(0.0),
    }
}

/// Euler–Maclaurin estimate of Σ_{i ≥ m} u_i and the first omitted term.
fn em_tail(kind: SeriesKind, m: u64) -> (f64, f64) {
    euler_maclaurin_tail(tail_integral(kind, m as f64), &jet(kind, m as f64))
}

fn certified_sum(kind: SeriesKind) -> Result<(f64, f64)> {
    let mut m: u64 = 16;
    while m <= 1 << 24 {
        let head: CompensatedSum = (1..m).rev().map(|i| raw(kind, i)).collect();
        let head = head.value();
        let (est, omitted) = em_tail(kind, m);
        let lo = head + est.min(est + omitted);
        let hi = head + est.max(est + omitted);
        // rounding in the head sum and the jet arithmetic
        let slack = 4.0 * f64::EPSILON * hi;
        if hi - lo <= REL_WIDTH * hi && lo.is_finite() {
            return Ok((lo - slack, hi + slack));
        }
        m *= 2;
    }
    Err(Error::Divergent(format!(
        "could not certify the normalizer of {kind:?}"
    )))
}

/// ζ(q) and ζ'(q) for q > 1, from a 1000-term head and an Euler–Maclaurin tail.
pub fn zeta_and_derivative(q: f64) -> Result<(f64, f64)> {
    check_exponent(q)?;
    let z = certified_sum(SeriesKind::Q(q))?.1;
    let m: u64 = 1000;
    let head: CompensatedSum = (1..m)
        .rev()
        .map(|i| {
            let x = i as f64;
            -x.ln() * x.powf(-q)
        })
        .collect();
    let mf = m as f64;
    let a = q - 1.0;
    let integral = -mf.powf(-a) * (mf.ln() / a + 1.0 / (a * a));
    let x = Jet::variable(mf);
    let f = x.ln().mul(&x.powf(-q));
    let f = Jet(f.0.map(|c| -c));
    let (tail, _) = euler_maclaurin_tail(integral, &f);
    Ok((z, head.value() + tail))
}
