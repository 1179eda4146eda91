//! Standard normal distribution: CDF, survival function, quantile, and
//! log-domain variants for the far lower tail.
//!
//! `erfc` is evaluated with the exponentially scaled power series for
//! `erf` on `[0, 2.5)` and a Lentz continued fraction beyond. The quantile
//! starts from a low-order rational guess and is polished with Newton steps
//! on `ln Φ`, which keeps full relative accuracy down to `p = 1e-300`.
//! The log-domain entry points go further: `ln_cdf` and `quantile_ln`
//! handle probabilities far below the smallest positive `f64`.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

const FRAC_2_SQRT_PI: f64 = 1.128_379_167_095_512_6;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
/// ln(sqrt(2π))
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SERIES_CUTOFF: f64 = 2.5;

/// `erf(x)` for `0 <= x < SERIES_CUTOFF` via
/// `erf(x) = 2/√π · e^{-x²} · Σ 2ⁿ x^{2n+1} / (2n+1)!!`, all terms positive.
fn erf_series(x: f64) -> f64 {
    let x2 = 2.0 * x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= x2 / (2.0 * n + 1.0);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x * x).exp() * sum
}

/// `e^{x²} erfc(x)` for `x >= SERIES_CUTOFF` by the continued fraction
/// `erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
fn erfcx_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..2000 {
        let a = n as f64 * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    FRAC_1_SQRT_PI / f
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < SERIES_CUTOFF {
        1.0 - erf_series(x)
    } else if x > 27.3 {
        0.0
    } else {
        (-x * x).exp() * erfcx_cf(x)
    }
}

/// `ln erfc(x)` for `x >= 0`, finite for arbitrarily large `x`.
fn ln_erfc_pos(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        (-erf_series(x)).ln_1p()
    } else {
        -x * x + erfcx_cf(x).ln()
    }
}

/// Standard normal density φ(z).
pub fn pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

/// ln φ(z).
pub fn ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Standard normal CDF Φ(z).
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Survival function Φ(−z) = 1 − Φ(z), accurate in the upper tail.
pub fn sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// ln Φ(z), finite for every finite `z`.
pub fn ln_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if z >= 0.0 {
        (-sf(z)).ln_1p()
    } else {
        ln_erfc_pos(-z * FRAC_1_SQRT_2) - LN_2
    }
}

/// Rational starting point for the lower-tail quantile given `t = sqrt(-2 ln p)`
/// (absolute error below 5e-4).
fn initial_lower(t: f64) -> f64 {
    const C: [f64; 3] = [2.515_517, 0.802_853, 0.010_328];
    const D: [f64; 3] = [1.432_788, 0.189_269, 0.001_308];
    let num = C[0] + t * (C[1] + t * C[2]);
    let den = 1.0 + t * (D[0] + t * (D[1] + t * D[2]));
    -(t - num / den)
}

/// Newton iteration on `ln Φ(z) = ln_p` for `ln_p <= ln(1/2)`.
fn newton_ln(ln_p: f64, mut z: f64) -> f64 {
    for _ in 0..100 {
        let lc = ln_cdf(z);
        // d/dz ln Φ = φ/Φ
        let slope = (ln_pdf(z) - lc).exp();
        let step = (lc - ln_p) / slope;
        let next = z - step;
        if !next.is_finite() {
            break;
        }
        z = next;
        if step.abs() <= 1e-15 * z.abs().max(1.0) {
            break;
        }
    }
    z
}

/// Standard normal quantile Φ⁻¹(p).
///
/// Returns ±∞ at the endpoints and NaN outside `[0, 1]`.
pub fn quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        return -quantile(1.0 - p);
    }
    if p == 0.5 {
        return 0.0;
    }
    let ln_p = p.ln();
    newton_ln(ln_p, initial_lower((-2.0 * ln_p).sqrt()))
}

/// Quantile from a log-probability: returns `z` with `ln Φ(z) = ln_p`.
///
/// Works for `ln_p` far below `ln(f64::MIN_POSITIVE)`.
pub fn quantile_ln(ln_p: f64) -> f64 {
    if ln_p.is_nan() || ln_p > 0.0 {
        return f64::NAN;
    }
    if ln_p == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if ln_p == 0.0 {
        return f64::INFINITY;
    }
    if ln_p > -LN_2 {
        return quantile(ln_p.exp());
    }
    let t = (-2.0 * ln_p).sqrt();
    let guess = if t < 38.0 {
        initial_lower(t)
    } else {
        // asymptotic: z² ≈ -2 ln p - ln(-4π ln p)
        -(t * t - (2.0 * PI * t * t).ln()).sqrt()
    };
    newton_ln(ln_p, guess)
}

/// Φ(Φ⁻¹(x) + shift): the probability that a N(shift, 1) observation falls
/// below the level-`x` threshold of a standard normal.
pub fn shifted_cdf(x: f64, shift: f64) -> f64 {
    if shift == 0.0 {
        return x;
    }
    cdf(quantile(x) + shift)
}
