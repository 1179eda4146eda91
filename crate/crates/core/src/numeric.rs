//! Small numerical building blocks: compensated summation, bracketing root
//! finders, golden-section search and truncated Taylor jets.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them be zero).
/// Stops once the bracket is narrower than `tol` or after `max_iter` halvings.
/// Returns the final bracket.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some((lo, lo));
    }
    if f_hi == 0.0 {
        return Some((hi, hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some((mid, mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some((lo, hi))
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x_max, f_max)` once the bracket is narrower than `tol`.
pub fn golden_section_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

pub const JET_ORDER: usize = 8;

/// Truncated Taylor expansion `Σ c_k h^k`, `k < JET_ORDER`, around a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; JET_ORDER]);

impl Jet {
    pub fn constant(c: f64) -> Self {
        let mut v = [0.0; JET_ORDER];
        v[0] = c;
        Jet(v)
    }

    /// The identity function expanded at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut v = [0.0; JET_ORDER];
        v[0] = x0;
        v[1] = 1.0;
        Jet(v)
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let mut out = [0.0; JET_ORDER];
        for (n, slot) in out.iter_mut().enumerate() {
            *slot = (0..=n).map(|k| self.0[k] * other.0[n - k]).sum();
        }
        Jet(out)
    }

    /// `self^a` for a real exponent; requires `self.0[0] > 0`.
    pub fn powf(&self, a: f64) -> Jet {
        let s = &self.0;
        let mut w = [0.0; JET_ORDER];
        w[0] = s[0].powf(a);
        for n in 1..JET_ORDER {
            let mut acc = 0.0;
            for k in 1..=n {
                acc += ((a + 1.0) * k as f64 - n as f64) * s[k] * w[n - k];
            }
            w[n] = acc / (n as f64 * s[0]);
        }
        Jet(w)
    }

    /// Natural logarithm; requires `self.0[0] > 0`.
    pub fn ln(&self) -> Jet {
        let s = &self.0;
        let mut l = [0.0; JET_ORDER];
        l[0] = s[0].ln();
        // s·l' = s'  →  n s0 l_n = n s_n − Σ_{k=1}^{n−1} k l_k s_{n−k}
        for n in 1..JET_ORDER {
            let mut acc = n as f64 * s[n];
            for k in 1..n {
                acc -= k as f64 * l[k] * s[n - k];
            }
            l[n] = acc / (n as f64 * s[0]);
        }
        Jet(l)
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let factorial: f64 = (1..=k).map(|i| i as f64).product();
        self.0[k] * factorial
    }
}

/// Bernoulli numbers B_2, B_4, ..., B_10.
const BERNOULLI_EVEN: [f64; 5] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
];

/// Euler–Maclaurin estimate of `Σ_{i ≥ m} f(i)`:
/// `∫_m^∞ f + f(m)/2 − Σ_{k=1}^{3} B_{2k}/(2k)! f^{(2k−1)}(m)`,
/// returned together with the first omitted correction term.
///
/// For completely monotone `f` the remainder lies between zero and the
/// omitted term, so `(estimate, estimate + omitted)` brackets the tail.
pub fn euler_maclaurin_tail(integral: f64, jet: &Jet) -> (f64, f64) {
    let mut est = integral + 0.5 * jet.0[0];
    let mut omitted = 0.0;
    for (idx, b) in BERNOULLI_EVEN.iter().enumerate().take(4) {
        let k = idx + 1;
        let fact: f64 = (1..=2 * k).map(|i| i as f64).product();
        let term = -b / fact * jet.derivative(2 * k - 1);
        if k <= 3 {
            est += term;
        } else {
            omitted = term;
        }
    }
    (est, omitted)
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // three-term recurrence for P_n(x) and P_{n-1}(x)
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 0 { 0.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre quadrature of `f` over `[a, b]` with `panels`
/// equal panels.
pub fn integrate<F>(f: F, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64
where
    F: Fn(f64) -> f64,
{
    let h = (b - a) / panels as f64;
    let mut s = CompensatedSum::new();
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for &(x, w) in rule {
            s.add(0.5 * h * w * f(mid + 0.5 * h * x));
        }
    }
    s.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-17);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-16).abs() < 1e-30);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let (lo, hi) = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((0.5 * (lo + hi) - std::f64::consts::SQRT_2).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 1.0, 1e-9, 10).is_none());
    }

    #[test]
    fn golden_section_parabola() {
        let (x, fx) = golden_section_max(|x| -(x - 1.3) * (x - 1.3) + 2.0, -4.0, 9.0, 1e-9);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn jet_derivatives_of_power_and_log() {
        let x0 = 3.0;
        let x = Jet::variable(x0);
        let p = x.powf(-1.5);
        // d³/dx³ x^{-1.5} = -1.5·-2.5·-3.5 · x^{-4.5}
        let want = -1.5 * -2.5 * -3.5 * x0.powf(-4.5);
        assert!((p.derivative(3) - want).abs() < 1e-14);
        let l = x.ln();
        // d⁴/dx⁴ ln x = -6/x⁴
        assert!((l.derivative(4) + 6.0 / x0.powi(4)).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_is_exact_for_high_degree() {
        let rule = gauss_legendre(10);
        let w: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((w - 2.0).abs() < 1e-14);
        let i = integrate(|x| x.powi(19) + x.powi(18), 0.0, 1.0, 1, &rule);
        assert!((i - (1.0 / 20.0 + 1.0 / 19.0)).abs() < 1e-15);
        let i = integrate(|x| (-x).exp(), 0.0, 30.0, 8, &rule);
        assert!((i - (1.0 - (-30f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn euler_maclaurin_zeta_two() {
        let m = 10.0;
        let f = Jet::variable(m).powf(-2.0);
        let (tail, omitted) = euler_maclaurin_tail(1.0 / m, &f);
        let head: f64 = (1..10).map(|i| 1.0 / (i as f64 * i as f64)).sum();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let (lo, hi) = (head + tail + omitted.min(0.0), head + tail + omitted.max(0.0));
        assert!(lo <= zeta2 && zeta2 <= hi, "{lo} {zeta2} {hi}");
        assert!(hi - lo < 1e-10);
    }
}
