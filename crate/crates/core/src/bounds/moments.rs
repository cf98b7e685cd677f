//! Bounds driven by product moments, k-wise independence and dependency graphs.

use std::f64::consts::LN_2;

use super::{as_integer, require, DependencyGraphParams, Method, MomentProfile, Provenance, TailBound};
use crate::error::{domain, Result};
use crate::numkernel::{kl_divergence, log_binom_coeff, log_binom_coeff_real, LogProb};

fn in_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// `S_k / C(beta_n, k)` as an upper bound on `P[sum X_i >= beta_n]`.
pub fn linial_luria_bound(n: u64, beta_n: u64, k: u64, profile: &MomentProfile) -> TailBound {
    let m = Method::LinialLuria;
    require!(k >= 1, m, "k must be >= 1");
    require!(k < beta_n, m, "k >= beta_n");
    require!(beta_n < n, m, "beta_n >= n");
    if let Err(e) = profile.validate(n) {
        return TailBound::invalid(m, format!("profile rejected: {e}"));
    }
    let Some(s_k) = profile.symmetric_moment(n, k) else {
        return TailBound::invalid(m, format!("profile does not supply S_{k}"));
    };
    let ln_s = s_k.ln();
    let ln_c = log_binom_coeff(beta_n, k).expect("k < beta_n");
    let b = TailBound::valid(m, ln_s - ln_c, vec![("k", k as f64), ("beta_n", beta_n as f64), ("ln_s_k", ln_s)]);
    if matches!(profile, MomentProfile::SplitBound { .. }) {
        b.with_note("S_k estimated from the split bound; Bernoulli-only")
    } else {
        b
    }
}

/// [`linial_luria_bound`] minimized over every `k` in `1..beta_n` the profile supplies.
pub fn linial_luria_best(n: u64, beta_n: u64, profile: &MomentProfile) -> TailBound {
    let m = Method::LinialLuria;
    let mut best: Option<TailBound> = None;
    let mut last_invalid = None;
    for k in 1..beta_n.max(1) {
        let b = linial_luria_bound(n, beta_n, k, profile);
        match b.ln() {
            Some(v) => {
                if best.as_ref().and_then(TailBound::ln).is_none_or(|cur| v < cur) {
                    best = Some(b);
                }
            }
            None => last_invalid = Some(b),
        }
    }
    match best {
        Some(b) => b.with_provenance(Provenance::GridMinimized),
        None => last_invalid.unwrap_or_else(|| TailBound::invalid(m, "k >= beta_n")),
    }
}

/// `S_{beta_n} / C(n, beta_n)`, a lower bound on `P[sum X_i >= beta_n]` for
/// Bernoulli variables.
pub fn linial_lower_bound(n: u64, beta_n: u64, s_beta_n: f64) -> Result<LogProb> {
    if beta_n == 0 || beta_n > n {
        return Err(domain(format!("need 0 < beta_n <= n, got beta_n={beta_n}, n={n}")));
    }
    if !(s_beta_n >= 0.0) || !s_beta_n.is_finite() {
        return Err(domain(format!("S_beta_n must be a finite nonnegative value, got {s_beta_n}")));
    }
    Ok(LogProb::clamped(s_beta_n.ln() - log_binom_coeff(n, beta_n)?))
}

/// Bound under `E[Z_A] <= gamma^|A| delta^(n-|A|)`:
/// `gamma^t delta^(n-t) ((n-t)/t)^t (n/(n-t))^n`.
pub fn split_moment_bound(n: u64, gamma: f64, delta: f64, t: f64) -> TailBound {
    let m = Method::SplitMoment;
    let nf = n as f64;
    require!(n >= 1, m, "n must be >= 1");
    require!(in_unit(gamma), m, "gamma must lie in (0,1)");
    require!(delta > 0.0 && delta <= 1.0, m, "delta must lie in (0,1]");
    require!(gamma + delta >= 1.0 - 1e-12, m, "gamma + delta < 1");
    require!(t > nf * gamma, m, "t <= n gamma");
    require!(t < nf, m, "t >= n");
    let value = t * gamma.ln() + (nf - t) * delta.ln() + t * ((nf - t) / t).ln() + nf * (nf / (nf - t)).ln();
    let eps = t / (nf * gamma) - 1.0;
    let q = gamma * (1.0 + eps);
    let Ok(d) = kl_divergence(q, gamma) else {
        return TailBound::invalid(m, "gamma(1+eps) outside (0,1)");
    };
    let kl_form = -nf * (d - (1.0 - q) * (delta / (1.0 - gamma)).ln());
    let h = (t * delta / ((nf - t) * gamma)).ln();
    TailBound::valid(m, value, vec![("eps", eps), ("h", h), ("kl_form", kl_form), ("t", t)])
}

/// k-wise independent variables with common mean `p`:
/// `(p - p^2)^-(n-k) exp(-n D(p(1+eps) || p))`.
pub fn kwise_bound(n: u64, k: u64, p: f64, eps: f64) -> TailBound {
    let m = Method::KWise;
    require!(k >= 1 && k <= n, m, "k outside [1, n]");
    require!(in_unit(p), m, "p must lie in (0,1)");
    require!(eps > 0.0, m, "eps <= 0");
    let q = p * (1.0 + eps);
    require!(q < 1.0, m, "p(1+eps) >= 1");
    let Ok(d) = kl_divergence(q, p) else {
        return TailBound::invalid(m, "p(1+eps) outside (0,1)");
    };
    let nf = n as f64;
    let value = -((n - k) as f64) * (p * (1.0 - p)).ln() - nf * d;
    TailBound::valid(m, value, vec![("eps", eps), ("k", k as f64), ("t", nf * q)])
}

/// k-wise independent Bernoulli variables: `C(n,k) p^k / C(np(1+eps), k)`.
pub fn kwise_bernoulli_bound(n: u64, k: u64, p: f64, eps: f64) -> TailBound {
    let m = Method::KWiseBernoulli;
    require!(k >= 1 && k <= n, m, "k outside [1, n]");
    require!(in_unit(p), m, "p must lie in (0,1)");
    require!(eps > 0.0, m, "eps <= 0");
    let Some(ell) = as_integer(n as f64 * p * (1.0 + eps)).filter(|&l| l >= 1) else {
        return TailBound::invalid(m, "np(1+eps) not integer");
    };
    require!(ell > k, m, "np(1+eps) <= k");
    let value = log_binom_coeff(n, k).expect("k <= n") + k as f64 * p.ln()
        - log_binom_coeff(ell, k).expect("k < ell");
    TailBound::valid(m, value, vec![("eps", eps), ("k", k as f64), ("t", ell as f64)])
}

/// `k* = ceil(np eps / (1-p))`, treating values within 1e-9 of an integer as that integer.
pub fn sss_k_star(n: u64, p: f64, eps: f64) -> u64 {
    let x = n as f64 * p * eps / (1.0 - p);
    as_integer(x).unwrap_or_else(|| x.ceil() as u64)
}

/// `C(n,k*) p^k* / C(np(1+eps), k*)` for k-wise independence with `k >= k*`;
/// the lower coefficient uses the falling-factorial extension to real arguments.
pub fn sss_bound(n: u64, p: f64, eps: f64, k: u64) -> TailBound {
    let m = Method::Sss;
    require!(in_unit(p), m, "p must lie in (0,1)");
    require!(eps > 0.0, m, "eps <= 0");
    require!(k <= n, m, "k > n");
    let k_star = sss_k_star(n, p, eps);
    require!(k_star <= n, m, "k* > n");
    require!(k >= k_star, m, "k < k*");
    let top = n as f64 * p * (1.0 + eps);
    let Ok(ln_den) = log_binom_coeff_real(top, k_star) else {
        return TailBound::invalid(m, "C(np(1+eps), k*) is not positive");
    };
    let value = log_binom_coeff(n, k_star).expect("k* <= n") + k_star as f64 * p.ln() - ln_den;
    TailBound::valid(m, value, vec![("eps", eps), ("k", k as f64), ("k_star", k_star as f64), ("t", top)])
}

/// `2^(n - alpha) H(n, 1/2, t)` for fair Bernoulli variables with a dependency
/// graph of independence number `alpha`.
pub fn depgraph_bound(params: &DependencyGraphParams, t: f64) -> TailBound {
    let m = Method::DependencyGraph;
    let nf = params.n() as f64;
    require!(t > nf / 2.0, m, "t <= n/2");
    require!(t < nf, m, "t >= n");
    let Ok(d) = kl_divergence(t / nf, 0.5) else {
        return TailBound::invalid(m, "t/n outside (0,1)");
    };
    let value = (params.n() - params.alpha()) as f64 * LN_2 - nf * d;
    TailBound::valid(m, value, vec![("alpha", params.alpha() as f64), ("t", t)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::hoeffding_bound;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn linial_luria_k1_is_markov() {
        let b = linial_luria_bound(10, 6, 1, &MomentProfile::MeanOnly(0.2));
        assert!(close(b.bound().unwrap(), 2.0 / 6.0, 1e-14));
        assert!(!linial_luria_bound(10, 6, 2, &MomentProfile::MeanOnly(0.2)).is_valid());
        assert_eq!(linial_luria_bound(10, 5, 5, &MomentProfile::ProductBound(0.2)).invalid_reason(), Some("k >= beta_n"));
    }

    #[test]
    fn linial_luria_best_takes_minimum() {
        let prof = MomentProfile::ProductBound(0.1);
        let best = linial_luria_best(40, 20, &prof);
        assert_eq!(best.provenance, Provenance::GridMinimized);
        for k in 1..20 {
            assert!(best.ln().unwrap() <= linial_luria_bound(40, 20, k, &prof).ln().unwrap());
        }
    }

    #[test]
    fn linial_lower_extremes() {
        assert_eq!(linial_lower_bound(12, 5, 792.0).unwrap().ln(), 0.0);
        assert!(linial_lower_bound(12, 5, 0.0).unwrap().is_zero());
        assert!(linial_lower_bound(12, 13, 1.0).is_err());
        assert!(linial_lower_bound(12, 0, 1.0).is_err());
    }

    #[test]
    fn split_moment_reduces_to_hoeffding() {
        for (n, g, t) in [(12u64, 0.25, 6.0), (100, 0.3, 45.0), (30, 0.6, 25.0)] {
            let a = split_moment_bound(n, g, 1.0 - g, t).ln().unwrap();
            let b = hoeffding_bound(n, g, t).ln().unwrap();
            assert!(close(a, b, 1e-10));
        }
        assert_eq!(split_moment_bound(12, 0.1, 0.5, 6.0).invalid_reason(), Some("gamma + delta < 1"));
    }

    #[test]
    fn split_moment_closed_form_below_kl_form() {
        for g in [0.1, 0.25, 0.5, 0.8] {
            for dlt in [0.2, 0.5, 0.9, 1.0] {
                for t in [0.3, 0.6, 0.9] {
                    let n = 40u64;
                    let b = split_moment_bound(n, g, dlt, t * n as f64);
                    if let Some(v) = b.ln() {
                        assert!(v <= b.param("kl_form").unwrap() + 1e-10 * v.abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn kwise_full_independence_is_hoeffding() {
        let a = kwise_bound(40, 40, 0.5, 0.5).ln().unwrap();
        let b = hoeffding_bound(40, 0.5, 30.0).ln().unwrap();
        assert!(close(a, b, 1e-12));
        let c = kwise_bound(40, 10, 0.5, 0.1);
        assert_eq!(c.ln(), Some(0.0));
        assert_eq!(c.param("clamped"), Some(1.0));
    }

    #[test]
    fn kwise_bernoulli_clauses() {
        let b = kwise_bernoulli_bound(20, 1, 0.25, 1.0);
        assert!(close(b.bound().unwrap(), 0.5, 1e-14));
        assert_eq!(kwise_bernoulli_bound(20, 3, 0.25, 0.9).invalid_reason(), Some("np(1+eps) not integer"));
        assert_eq!(kwise_bernoulli_bound(20, 10, 0.25, 1.0).invalid_reason(), Some("np(1+eps) <= k"));
    }

    #[test]
    fn sss_k_star_and_agreement() {
        assert_eq!(sss_k_star(100, 0.1, 0.5), 6);
        assert_eq!(sss_bound(100, 0.1, 0.5, 5).invalid_reason(), Some("k < k*"));
        let a = sss_bound(100, 0.1, 0.5, 6);
        let b = kwise_bernoulli_bound(100, 6, 0.1, 0.5);
        assert!(close(a.ln().unwrap(), b.ln().unwrap(), 1e-12));
    }

    #[test]
    fn depgraph_full_independence_is_hoeffding() {
        let p = DependencyGraphParams::new(30, 30).unwrap();
        let a = depgraph_bound(&p, 24.0).ln().unwrap();
        assert!(close(a, hoeffding_bound(30, 0.5, 24.0).ln().unwrap(), 1e-12));
        let q = DependencyGraphParams::new(30, 20).unwrap();
        assert_eq!(depgraph_bound(&q, 15.0).invalid_reason(), Some("t <= n/2"));
    }
}
