//! Comparisons between a Poisson-binomial count and the binomial with the
//! same mean, using exact distributions.

use crate::error::{domain, Result};
use crate::numkernel::{binom_pmf_log, log_sum_exp, poisson_binom_dist, BinomialSpec, PoissonBinomialSpec};

const SLACK: f64 = 1e-12;

fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if p <= 0.0 {
        out[0] = 1.0;
    } else if p >= 1.0 {
        out[n] = 1.0;
    } else {
        let s = BinomialSpec::new(n as u64, p).expect("p in (0,1)");
        for (j, v) in out.iter_mut().enumerate() {
            *v = binom_pmf_log(&s, j as u64).expect("in support").prob();
        }
    }
    out
}

fn ln_mgf(pmf: &[f64], h: f64) -> f64 {
    log_sum_exp(pmf.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(j, p)| p.ln() + h * j as f64))
}

/// `E[e^(h H)] <= E[e^(h B)]` with `H` the Poisson-binomial count and `B`
/// the binomial of equal mean.
pub fn convex_order_check(spec: &PoissonBinomialSpec, h: f64) -> bool {
    let n = spec.n();
    let pbar = spec.mean();
    let lhs = ln_mgf(&poisson_binom_dist(spec), h);
    let rhs = ln_mgf(&binomial_pmf(n, pbar), h);
    lhs <= rhs + SLACK * rhs.abs().max(1.0)
}

/// `P[H >= b] >= P[B >= b]` for `0 <= b <= n pbar`.
pub fn poisson_trials_check(spec: &PoissonBinomialSpec, b: u64) -> Result<bool> {
    let n = spec.n();
    let mean = spec.mean() * n as f64;
    if b as f64 > mean + 1e-9 {
        return Err(domain(format!("b = {b} exceeds the mean {mean}")));
    }
    let b = b as usize;
    let pb = poisson_binom_dist(spec);
    let bin = binomial_pmf(n, spec.mean());
    let lhs: f64 = pb[b..].iter().sum();
    let rhs: f64 = bin[b..].iter().sum();
    Ok(lhs >= rhs - SLACK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(ps: &[f64]) -> PoissonBinomialSpec {
        PoissonBinomialSpec::new(ps.to_vec()).unwrap()
    }

    #[test]
    fn equal_probabilities_are_equal() {
        assert!(convex_order_check(&spec(&[0.3; 7]), 2.0));
        assert!(poisson_trials_check(&spec(&[0.3; 7]), 2).unwrap());
    }

    #[test]
    fn two_trials() {
        // against Bin(2, 0.5)
        let s = spec(&[0.1, 0.9]);
        assert!(convex_order_check(&s, 1.0));
        let s = spec(&[0.2, 0.8]);
        assert!(poisson_trials_check(&s, 0).unwrap());
        assert!(poisson_trials_check(&s, 1).unwrap());
        assert!(poisson_trials_check(&s, 2).is_err());
    }

    #[test]
    fn degenerate_mean() {
        assert!(convex_order_check(&spec(&[0.0, 0.0]), 1.0));
        assert!(convex_order_check(&spec(&[1.0, 1.0, 1.0]), 3.0));
    }
}
