//! Power theory of Alpha-Spending under the Gaussian mean testing model:
//! expected true discoveries, the optimal q-series exponent, the adaptivity
//! threshold c*, and Lagrange-optimal weights for varying signals.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::normal::{cdf, ln_cdf, quantile, quantile_ln, sf, shifted_cdf};
use crate::numeric::{bisect, gauss_legendre, golden_section_max, integrate, CompensatedSum};
use crate::series::{zeta_and_derivative, SeriesKind, WeightSeries};

/// Mixture of N(μ_N, 1) nulls and N(μ_A, 1) non-nulls with P(non-null) = π_A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixModel {
    pub pi_a: f64,
    pub mu_a: f64,
    pub mu_n: f64,
}

impl GaussianMixModel {
    pub fn new(pi_a: f64, mu_a: f64, mu_n: f64) -> Result<Self> {
        let m = GaussianMixModel { pi_a, mu_a, mu_n };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pi_a > 0.0 && self.pi_a < 1.0) {
            return Err(invalid(format!("pi_A must lie in (0, 1), got {}", self.pi_a)));
        }
        if !(self.mu_a > 0.0 && self.mu_a.is_finite()) {
            return Err(invalid(format!("mu_A must be positive, got {}", self.mu_a)));
        }
        if !(self.mu_n <= 0.0 && self.mu_n.is_finite()) {
            return Err(invalid(format!("mu_N must be nonpositive, got {}", self.mu_n)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Horizon {
    Finite(u64),
    Infinite,
}

/// Values of a power quantity over a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Σ_{i ≤ N} π_A Φ(Φ⁻¹(αγ_i) + μ_A), the expected number of true discoveries
/// of Alpha-Spending.
///
/// For an infinite horizon the q-series tail past 4096 terms is integrated
/// in log space; the result may exceed the `f64` range for q close to 1, in
/// which case it is `+∞`. The log-q-series gives a divergent sum for μ_A > 0.
pub fn expected_true_discoveries(
    horizon: Horizon,
    alpha: f64,
    series: &WeightSeries,
    pi_a: f64,
    mu_a: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    if !(0.0..=1.0).contains(&pi_a) {
        return Err(invalid(format!("pi_A must lie in [0, 1], got {pi_a}")));
    }
    if !(mu_a >= 0.0 && mu_a.is_finite()) {
        return Err(invalid(format!("mu_A must be nonnegative, got {mu_a}")));
    }
    let n = match (horizon, series.len()) {
        (Horizon::Finite(n), Some(len)) => n.min(len as u64),
        (Horizon::Finite(n), None) => n,
        (Horizon::Infinite, Some(len)) => len as u64,
        (Horizon::Infinite, None) => return infinite_sum(alpha, series, pi_a, mu_a),
    };
    let total: CompensatedSum = (1..=n)
        .map(|i| pi_a * shifted_cdf(alpha * series.gamma(i), mu_a))
        .collect();
    Ok(total.value())
}

const HEAD: u64 = 4096;

fn infinite_sum(alpha: f64, series: &WeightSeries, pi_a: f64, mu_a: f64) -> Result<f64> {
    let q = match series.kind() {
        SeriesKind::Q(q) => q,
        SeriesKind::LogQ(_) if mu_a > 0.0 => {
            return Err(Error::Divergent(
                "expected discoveries of a log-q-series diverge for mu_A > 0".into(),
            ))
        }
        _ => return Ok(pi_a * alpha),
    };
    if mu_a == 0.0 || pi_a == 0.0 {
        return Ok(pi_a * alpha);
    }
    let head: CompensatedSum = (1..HEAD)
        .map(|i| pi_a * shifted_cdf(alpha * series.gamma(i), mu_a))
        .collect();
    let ln_z = series.normalizer().ln();
    let ln_alpha = alpha.ln();
    let ln_pi = pi_a.ln();
    // ln of the summand at real x
    let ell = |x: f64| ln_pi + ln_cdf(quantile_ln(ln_alpha - q * x.ln() - ln_z) + mu_a);
    // integrand over u = ln x
    let g = |u: f64| ell(u.exp()) + u;

    let u0 = (HEAD as f64).ln();
    let mut gmax = g(u0);
    let mut u = u0;
    let mut prev = gmax;
    let u_end = loop {
        let step = (0.01 * u).max(0.25);
        u += step;
        let gu = g(u);
        gmax = gmax.max(gu);
        if gu < gmax - 60.0 && gu < prev {
            break u;
        }
        if u > 1e7 {
            return Err(Error::Divergent("tail of expected discoveries does not decay".into()));
        }
        prev = gu;
    };
    let rule = gauss_legendre(10);
    let scaled = |u: f64| (g(u) - gmax).exp();
    let mut panels = 8usize;
    let mut last = integrate(scaled, u0, u_end, panels, &rule);
    loop {
        panels *= 2;
        let next = integrate(scaled, u0, u_end, panels, &rule);
        let done = (next - last).abs() <= 1e-12 * next.abs() || panels > 1 << 16;
        last = next;
        if done {
            break;
        }
    }
    // beyond u_end the log-integrand falls at least linearly
    let slope = (g(u_end - 0.5) - g(u_end)) / 0.5;
    let beyond = if slope > 0.0 { scaled(u_end) / slope } else { 0.0 };
    // Euler–Maclaurin corrections: Σ_{i ≥ M} f(i) = ∫_M^∞ f + f(M)/2 − f'(M)/12 + ...
    let m = HEAD as f64;
    let fm = ell(m).exp();
    let h = 1e-3 * m;
    let dfm = fm * (ell(m + h) - ell(m - h)) / (2.0 * h);
    let tail = (gmax.exp()) * (last + beyond) + 0.5 * fm - dfm / 12.0;
    Ok(head.value() + tail)
}

/// E_N[D] over a grid of q-series exponents.
pub fn q_curve(horizon: Horizon, alpha: f64, pi_a: f64, mu_a: f64, qs: &[f64]) -> Result<PowerCurve> {
    let mut values = Vec::with_capacity(qs.len());
    for &q in qs {
        let s = WeightSeries::q_series(q)?;
        values.push(expected_true_discoveries(horizon, alpha, &s, pi_a, mu_a)?);
    }
    Ok(PowerCurve {
        grid: qs.to_vec(),
        values,
    })
}

const Q_LOWER: f64 = 1.0 + 1e-6;

/// The q maximizing E_N[D] over q-series, to |Δq| < 1e-6.
pub fn optimal_q(n: u64, mu_a: f64, alpha: f64) -> Result<f64> {
    optimal_q_bounded(n, mu_a, alpha, 50.0)
}

/// As [`optimal_q`] with an explicit initial upper bound, doubled while the
/// maximizer sits at the edge.
pub fn optimal_q_bounded(n: u64, mu_a: f64, alpha: f64, q_max: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("optimal q needs N >= 2; E_1[D] increases in q without bound"));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(invalid(format!("optimal q needs alpha in (0, 1/2), got {alpha}")));
    }
    if !(mu_a > 0.0 && mu_a.is_finite()) {
        return Err(invalid(format!("mu_A must be positive, got {mu_a}")));
    }
    let objective = |q: f64| match WeightSeries::q_series(q) {
        Ok(s) => expected_true_discoveries(Horizon::Finite(n), alpha, &s, 1.0, mu_a).unwrap_or(f64::NEG_INFINITY),
        Err(_) => f64::NEG_INFINITY,
    };
    let mut hi = q_max;
    loop {
        let (q, _) = golden_section_max(objective, Q_LOWER, hi, 2e-7);
        if hi - q > 1e-3 || hi >= 1e4 {
            log::debug!("optimal q for N={n}, mu_A={mu_a}: {q}");
            return Ok(q);
        }
        hi *= 2.0;
    }
}

/// dE_N[D]/dq for q-series (π_A = 1), from the closed-form derivative of
/// each summand.
pub fn expected_discoveries_dq(n: u64, q: f64, mu_a: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let series = WeightSeries::q_series(q)?;
    let (zeta, dzeta) = zeta_and_derivative(q)?;
    let ratio = dzeta / zeta;
    let total: CompensatedSum = (1..=n)
        .map(|i| {
            let x = alpha * series.gamma(i);
            let z = quantile(x);
            // φ(z + μ)/φ(z) · α dγ_i/dq
            let dens = (x.ln() - mu_a * z - 0.5 * mu_a * mu_a).exp();
            dens * (-(i as f64).ln() - ratio)
        })
        .collect();
    Ok(total.value())
}

/// Φ(a) − Φ(b) without cancellation in the upper tail.
fn cdf_diff(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        sf(b) - sf(a)
    } else {
        cdf(a) - cdf(b)
    }
}

/// J at the point x = Φ(z).
fn j_at_z(model: &GaussianMixModel, z: f64) -> f64 {
    (1.0 - model.pi_a) * cdf_diff(z, z + model.mu_n) + model.pi_a * cdf_diff(z, z + model.mu_a)
}

/// J(x) = x − G(x) with G the mixture CDF of the p-values.
pub fn j_function(model: &GaussianMixModel, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    j_at_z(model, quantile(x))
}

/// The interior zero c* of J, or exactly 1 when J has no sign change below
/// 1 − 1e-9.
pub fn cstar_threshold(model: &GaussianMixModel) -> Result<f64> {
    model.validate()?;
    let z_hi = quantile(1.0 - 1e-9);
    let step = 1e-3;
    let mut z = -38.0;
    let mut seen_negative = false;
    let mut prev = (z, j_at_z(model, z));
    while z < z_hi {
        z = (z + step).min(z_hi);
        let jz = j_at_z(model, z);
        if prev.1 < 0.0 {
            seen_negative = true;
        }
        if seen_negative && jz > 0.0 {
            let (lo, hi) = bisect(|t| j_at_z(model, t), prev.0, z, 1e-14, 200)
                .ok_or_else(|| Error::Infeasible("lost the sign change of J".into()))?;
            let c = cdf(0.5 * (lo + hi));
            return Ok(if c > 1.0 - 1e-9 { 1.0 } else { c });
        }
        prev = (z, jz);
    }
    Ok(1.0)
}

/// Broadcasts a length-1 slice, or checks the length against the horizon.
fn expand(name: &str, v: &[f64], horizon: usize) -> Result<Vec<f64>> {
    match v.len() {
        1 => Ok(vec![v[0]; horizon]),
        n if n == horizon => Ok(v.to_vec()),
        n => Err(Error::Mismatch(format!(
            "{name} has {n} entries but the horizon is {horizon}"
        ))),
    }
}

/// Lagrange-optimal Alpha-Spending weights for per-index (π_i, μ_i) over a
/// finite horizon: γ_i = Φ(−h_i(η))/α with h_i(η) = ln(η/π_i)/μ_i + μ_i/2 and
/// η chosen so the weights sum to one.
pub fn optimal_gamma_varying(pi: &[f64], mu: &[f64], alpha: f64, horizon: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if horizon == 0 {
        return Err(invalid("horizon must be positive"));
    }
    let pi = expand("pi", pi, horizon)?;
    let mu = expand("mu", mu, horizon)?;
    if let Some(i) = pi.iter().position(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(invalid(format!("pi_{} must lie in (0, 1)", i + 1)));
    }
    if let Some(i) = mu.iter().position(|m| !(*m > 1e-9 && m.is_finite())) {
        return Err(invalid(format!("mu_{} must be positive", i + 1)));
    }
    if pi.iter().all(|p| *p == pi[0]) && mu.iter().all(|m| *m == mu[0]) {
        return Ok(vec![1.0 / horizon as f64; horizon]);
    }
    let ln_pi: Vec<f64> = pi.iter().map(|p| p.ln()).collect();
    let weights = |ln_eta: f64| -> Vec<f64> {
        ln_pi
            .iter()
            .zip(&mu)
            .map(|(lp, m)| sf((ln_eta - lp) / m + 0.5 * m) / alpha)
            .collect()
    };
    let excess = |ln_eta: f64| {
        let s: CompensatedSum = weights(ln_eta).into_iter().collect();
        s.value() - 1.0
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut tries = 0;
    while excess(lo) < 0.0 || excess(hi) > 0.0 {
        lo *= 2.0;
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::Infeasible("no multiplier makes the weights sum to one".into()));
        }
    }
    let (a, b) = bisect(excess, lo, hi, 1e-15, 300)
        .ok_or_else(|| Error::Infeasible("no multiplier makes the weights sum to one".into()))?;
    let w = weights(0.5 * (a + b));
    let s: CompensatedSum = w.iter().copied().collect();
    let s = s.value();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::Infeasible(format!("weights sum to {s}, not 1")));
    }
    Ok(w.into_iter().map(|x| x / s).collect())
}
