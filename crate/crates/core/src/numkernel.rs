//! Log-space numerical primitives shared by every bound and oracle.
//!
//! Probabilities are carried as natural logarithms ([`LogProb`]) so that bounds
//! of the form `exp(-n D)` survive for `n` in the thousands. The only
//! linear-scale computation is the Poisson-binomial convolution, which uses
//! double-double accumulation.

use std::f64::consts::{LN_2, PI};

use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};

/// A probability stored as its natural logarithm.
///
/// `LogProb::ZERO` (negative infinity) represents probability zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    /// Wraps a log-probability, rejecting NaN and positive values.
    pub fn new(ln_value: f64) -> Result<Self> {
        if ln_value.is_nan() || ln_value > 0.0 {
            return Err(domain(format!("log-probability must be <= 0, got {ln_value}")));
        }
        Ok(LogProb(ln_value))
    }

    /// Wraps a computed log value, clamping it to at most 0.
    ///
    /// Panics on NaN: a NaN here means an upstream formula was evaluated
    /// outside its domain.
    pub fn clamped(ln_value: f64) -> Self {
        assert!(!ln_value.is_nan(), "NaN log-probability");
        LogProb(ln_value.min(0.0))
    }

    pub fn from_prob(p: f64) -> Self {
        assert!(!p.is_nan(), "NaN probability");
        if p <= 0.0 {
            LogProb::ZERO
        } else {
            LogProb(p.ln().min(0.0))
        }
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    /// Linear-scale value, clamped to `[0, 1]`.
    pub fn prob(self) -> f64 {
        self.0.exp().clamp(0.0, 1.0)
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

/// `ln(sum(exp(x_i)))` without overflow. Returns negative infinity for an
/// empty input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = terms.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// `ln(exp(a) - exp(b))` for `a >= b`.
pub fn log_diff_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// Kullback-Leibler divergence `D(q||p)` between Bernoulli(q) and Bernoulli(p).
///
/// Both arguments must lie strictly inside `(0, 1)`; endpoints are rejected
/// rather than extended by continuity.
pub fn kl_divergence(q: f64, p: f64) -> Result<f64> {
    let inside = |x: f64| x.is_finite() && x > 0.0 && x < 1.0;
    if !inside(q) || !inside(p) {
        return Err(domain(format!("kl_divergence needs q, p in (0,1); got q={q}, p={p}")));
    }
    if q == p {
        return Ok(0.0);
    }
    let up = q * ((q - p) / p).ln_1p();
    let down = (1.0 - q) * ((p - q) / (1.0 - p)).ln_1p();
    Ok((up + down).max(0.0))
}

/// Error term of Stirling's approximation:
/// `ln Γ(x+1) - (x + 1/2) ln x + x - ln sqrt(2π)`.
fn stirlerr(x: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if x <= 15.0 {
        return ln_gamma(x + 1.0) - (x + 0.5) * x.ln() + x - 0.5 * (2.0 * PI).ln();
    }
    let xx = x * x;
    if x > 500.0 {
        (S0 - S1 / xx) / x
    } else if x > 80.0 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if x > 35.0 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x/m) + m - x`, accurate when `x` is close to `m`.
fn bd0(x: f64, m: f64) -> f64 {
    if x == 0.0 {
        return m;
    }
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `ln C(n, k)`.
pub fn log_binom_coeff(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(domain(format!("log_binom_coeff: k={k} exceeds n={n}")));
    }
    let k = k.min(n - k);
    if k == 0 {
        return Ok(0.0);
    }
    if k <= 24 {
        let base = (n - k) as f64;
        return Ok((1..=k).map(|i| ((base + i as f64) / i as f64).ln()).sum());
    }
    let (nf, kf) = (n as f64, k as f64);
    let rest = nf - kf;
    let main = kf * (nf / kf).ln() - rest * (-kf / nf).ln_1p();
    Ok(main + 0.5 * (nf / (2.0 * PI * kf * rest)).ln() + stirlerr(nf) - stirlerr(kf) - stirlerr(rest))
}

/// `ln C(x, k)` for real `x >= 0`, via the falling factorial
/// `x (x-1) ... (x-k+1) / k!`.
///
/// Returns negative infinity when `x` is an integer smaller than `k`.
pub fn log_binom_coeff_real(x: f64, k: u64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(domain(format!("log_binom_coeff_real: x must be finite and >= 0, got {x}")));
    }
    let rounded = x.round();
    if (x - rounded).abs() <= 1e-9 * x.max(1.0) {
        let top = rounded as u64;
        if top < k {
            return Ok(f64::NEG_INFINITY);
        }
        return log_binom_coeff(top, k);
    }
    if x - k as f64 + 1.0 <= 0.0 {
        return Err(domain(format!(
            "log_binom_coeff_real: falling factorial of {x} over {k} terms is not positive"
        )));
    }
    Ok((0..k).map(|i| ((x - i as f64) / (i + 1) as f64).ln()).sum())
}

/// Binomial distribution parameters: `n >= 1` trials, success probability in `(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialSpec {
    n: u64,
    p: f64,
}

impl BinomialSpec {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("binomial: n must be >= 1"));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!("binomial: p must lie in (0,1), got {p}")));
        }
        Ok(BinomialSpec { n, p })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mean(&self) -> f64 {
        self.n as f64 * self.p
    }

    fn mode(&self) -> u64 {
        (((self.n + 1) as f64 * self.p).floor() as u64).min(self.n)
    }

    fn check_support(&self, j: u64) -> Result<()> {
        if j > self.n {
            return Err(domain(format!("binomial: j={j} outside 0..={}", self.n)));
        }
        Ok(())
    }

    /// Saddle-point form of the log mass; no support check.
    fn ln_pmf(&self, j: u64) -> f64 {
        let n = self.n as f64;
        let p = self.p;
        let q = 1.0 - p;
        if j == 0 {
            return n * (-p).ln_1p();
        }
        if j == self.n {
            return n * p.ln();
        }
        let x = j as f64;
        let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(x, n * p) - bd0(n - x, n * q);
        lc + 0.5 * (n / (2.0 * PI * x * (n - x))).ln()
    }

    /// `ln P[B >= j]` by direct summation of the upper masses.
    fn ln_upper(&self, j: u64) -> f64 {
        if j == 0 {
            return 0.0;
        }
        let mode = self.mode();
        if j <= mode {
            // the lower side is the small one: ln(1 - P[B < j]) keeps full accuracy
            let lower = self.ln_sum(j - 1, 0);
            if lower < -std::f64::consts::LN_2 {
                return (-lower.exp()).ln_1p();
            }
        }
        self.ln_sum(j, self.n)
    }

    /// `ln` of the pmf summed from `from` toward `to` (either direction),
    /// stopping once terms past the mode are negligible.
    fn ln_sum(&self, from: u64, to: u64) -> f64 {
        let mode = self.mode();
        let mut terms = Vec::new();
        let mut max = f64::NEG_INFINITY;
        let mut i = from;
        loop {
            let lp = self.ln_pmf(i);
            max = max.max(lp);
            terms.push(lp);
            let past_mode = if to >= from { i > mode } else { i < mode };
            if (past_mode && lp < max - 50.0) || i == to {
                break;
            }
            if to >= from {
                i += 1;
            } else {
                i -= 1;
            }
        }
        log_sum_exp(terms).min(0.0)
    }
}

pub fn binom_pmf_log(spec: &BinomialSpec, j: u64) -> Result<LogProb> {
    spec.check_support(j)?;
    Ok(LogProb::clamped(spec.ln_pmf(j)))
}

/// `ln P[B >= j]`, summed directly from the upper side.
pub fn binom_tail_log(spec: &BinomialSpec, j: u64) -> Result<LogProb> {
    spec.check_support(j)?;
    Ok(LogProb::clamped(spec.ln_upper(j)))
}

/// `ln P[B <= j]`, computed as the upper tail of the mirrored binomial.
pub fn binom_lower_tail_log(spec: &BinomialSpec, j: u64) -> Result<LogProb> {
    spec.check_support(j)?;
    let mirrored = BinomialSpec { n: spec.n, p: 1.0 - spec.p };
    Ok(LogProb::clamped(mirrored.ln_upper(spec.n - j)))
}

/// Per-trial success probabilities of independent, non-identical trials.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonBinomialSpec {
    ps: Vec<f64>,
}

impl PoissonBinomialSpec {
    pub fn new(ps: Vec<f64>) -> Result<Self> {
        if ps.is_empty() {
            return Err(domain("poisson-binomial: need at least one trial"));
        }
        if let Some(bad) = ps.iter().find(|p| !(**p >= 0.0 && **p <= 1.0)) {
            return Err(domain(format!("poisson-binomial: probability {bad} outside [0,1]")));
        }
        Ok(PoissonBinomialSpec { ps })
    }

    pub fn ps(&self) -> &[f64] {
        &self.ps
    }

    pub fn n(&self) -> usize {
        self.ps.len()
    }

    pub fn mean(&self) -> f64 {
        self.ps.iter().sum::<f64>() / self.ps.len() as f64
    }
}

/// Double-double value `hi + lo`.
#[derive(Debug, Clone, Copy, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Dd { hi, lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::new(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        Dd::new(s, e + self.lo + o.lo)
    }
}

/// Exact distribution of the number of successes, by convolution.
pub fn poisson_binom_dist(spec: &PoissonBinomialSpec) -> Vec<f64> {
    let n = spec.n();
    let mut dist = vec![Dd::default(); n + 1];
    dist[0] = Dd { hi: 1.0, lo: 0.0 };
    for (i, &p) in spec.ps.iter().enumerate() {
        let (qh, ql) = two_sum(1.0, -p);
        let q = Dd { hi: qh, lo: ql };
        let pd = Dd { hi: p, lo: 0.0 };
        for j in (0..=i + 1).rev() {
            let stay = dist[j].mul(q);
            dist[j] = if j > 0 { stay.add(dist[j - 1].mul(pd)) } else { stay };
        }
    }
    dist.into_iter().map(|d| (d.hi + d.lo).max(0.0)).collect()
}

/// Checks that `np - 1` is a lower bound for the median: `P[B >= np - 1] >= 1/2`.
pub fn binomial_median_lb_check(spec: &BinomialSpec) -> bool {
    let threshold = (spec.mean() - 1.0 - 1e-9).ceil().max(0.0) as u64;
    let tail = spec.ln_upper(threshold.min(spec.n));
    tail >= 0.5f64.ln() - 1e-12
}

/// `ln P[H = k]` for a hypergeometric draw of `draws` items from a population
/// of `total` containing `successes` marked items.
pub fn hypergeom_pmf_log(total: u64, successes: u64, draws: u64, k: u64) -> Result<LogProb> {
    if successes > total || draws > total {
        return Err(domain("hypergeometric: successes and draws must not exceed the population"));
    }
    if k > successes || k > draws || draws - k > total - successes {
        return Ok(LogProb::ZERO);
    }
    let v = log_binom_coeff(successes, k)? + log_binom_coeff(total - successes, draws - k)?
        - log_binom_coeff(total, draws)?;
    Ok(LogProb::clamped(v))
}

/// Exact big-integer helpers for combinatorial ratios.
pub mod exact {
    use num_bigint::BigUint;
    use num_traits::{One, ToPrimitive, Zero};

    use super::LN_2;

    /// `C(n, k)` as an exact integer (zero when `k > n`).
    pub fn binom(n: u64, k: u64) -> BigUint {
        if k > n {
            return BigUint::zero();
        }
        let k = k.min(n - k);
        let mut acc = BigUint::one();
        for i in 0..k {
            acc *= n - i;
            acc /= i + 1;
        }
        acc
    }

    /// Natural log of a non-negative big integer; negative infinity for zero.
    pub fn ln(x: &BigUint) -> f64 {
        if x.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = x.bits();
        if bits <= 1000 {
            return x.to_f64().expect("finite below 2^1000").ln();
        }
        let shift = bits - 64;
        let top: BigUint = x >> shift;
        top.to_f64().expect("64-bit value").ln() + shift as f64 * LN_2
    }

    /// `ln(num / den)`.
    pub fn ln_ratio(num: &BigUint, den: &BigUint) -> f64 {
        assert!(!den.is_zero(), "zero denominator");
        ln(num) - ln(den)
    }
}

/// Returns the error for the shared "size above limit" case.
pub(crate) fn size_error(n: usize, max: usize) -> Error {
    Error::Size { n, max }
}
