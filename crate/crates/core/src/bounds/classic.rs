//! Exponential-moment bounds: Hoeffding and its relatives.

use std::f64::consts::LN_2;

use super::optim::minimize_positive;
use super::{as_integer, require, Method, Provenance, TailBound};
use crate::numkernel::{binom_pmf_log, kl_divergence, log_sum_exp, BinomialSpec};

fn in_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// `ln(1 - p + p e^h)` without overflow for large `h`.
fn ln_mgf_bernoulli(p: f64, h: f64) -> f64 {
    log_sum_exp([(1.0 - p).ln(), p.ln() + h])
}

/// The three equal expressions of the Hoeffding function in log scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoeffdingForms {
    /// `min_h -ht + n ln(1-p+pe^h)`, found numerically.
    pub infimum: f64,
    /// `ln p^t (1-p)^(n-t) ((n-t)/t)^t (n/(n-t))^n`.
    pub product: f64,
    /// `-n D(t/n || p)`.
    pub kl: f64,
    /// The numerical minimizer.
    pub h_numeric: f64,
}

/// Evaluates all forms; `None` outside `np < t < n`.
pub fn hoeffding_forms(n: u64, p: f64, t: f64) -> Option<HoeffdingForms> {
    let nf = n as f64;
    if !(in_unit(p) && t > nf * p && t < nf) {
        return None;
    }
    let (h_numeric, infimum) =
        minimize_positive(|h| -h * t + nf * ln_mgf_bernoulli(p, h), 1e-12);
    let product = t * p.ln() + (nf - t) * (1.0 - p).ln() + t * ((nf - t) / t).ln()
        + nf * (nf / (nf - t)).ln();
    let kl = -nf * kl_divergence(t / nf, p).ok()?;
    Some(HoeffdingForms { infimum, product, kl, h_numeric })
}

/// `P[sum X_i >= t] <= exp(-n D(t/n || p))` for independent `[0,1]` variables
/// with average mean `p`.
pub fn hoeffding_bound(n: u64, p: f64, t: f64) -> TailBound {
    let m = Method::Hoeffding;
    let nf = n as f64;
    require!(n >= 1, m, "n must be >= 1");
    require!(in_unit(p), m, "p must lie in (0,1)");
    require!(t > nf * p, m, "t <= np");
    require!(t < nf, m, "t >= n");
    let q = t / nf;
    let Ok(d) = kl_divergence(q, p) else {
        return TailBound::invalid(m, "t/n outside (0,1)");
    };
    let h = (t * (1.0 - p) / ((nf - t) * p)).ln();
    TailBound::valid(m, -nf * d, vec![("h", h), ("eps", q / p - 1.0), ("t", t)])
}

/// `c exp(-n D(gamma(1+eps) || gamma))` under `E[prod_A X_i] <= gamma^|A|`.
/// Without an explicit `c` the constant 1 is used, which is proven only for
/// Bernoulli variables.
pub fn ik_bound(n: u64, gamma: f64, eps: f64, c: Option<f64>) -> TailBound {
    let m = Method::ImpagliazzoKabanets;
    require!(n >= 1, m, "n must be >= 1");
    require!(in_unit(gamma), m, "gamma must lie in (0,1)");
    require!(eps > 0.0, m, "eps <= 0");
    let q = gamma * (1.0 + eps);
    require!(q < 1.0, m, "gamma(1+eps) >= 1");
    let cv = c.unwrap_or(1.0);
    require!(cv >= 1.0, m, "c < 1");
    let Ok(d) = kl_divergence(q, gamma) else {
        return TailBound::invalid(m, "gamma(1+eps) outside (0,1)");
    };
    let nf = n as f64;
    let b = TailBound::valid(m, cv.ln() - nf * d, vec![("eps", eps), ("c", cv), ("t", nf * q)]);
    if c.is_none() {
        b.with_note("Bernoulli-only soundness")
    } else {
        b
    }
}

/// `2 exp(-n D(p(1+eps0) || p))` with `t - 1 = np(1+eps0)`.
pub fn coupling_bound(n: u64, p: f64, t: f64) -> TailBound {
    let m = Method::Coupling;
    let nf = n as f64;
    require!(n >= 1, m, "n must be >= 1");
    require!(in_unit(p), m, "p must lie in (0,1)");
    require!(t > nf * p + 1.0, m, "t <= np+1");
    require!(t < nf, m, "t >= n");
    let eps0 = (t - 1.0 - nf * p) / (nf * p);
    let Ok(d) = kl_divergence((t - 1.0) / nf, p) else {
        return TailBound::invalid(m, "(t-1)/n outside (0,1)");
    };
    TailBound::valid(m, LN_2 - nf * d, vec![("eps0", eps0), ("t", t)])
}

/// McDiarmid's bound for martingale differences `-p_i <= Y_i <= 1 - p_i`;
/// `t` is per variable, the event is `sum Y_i >= n t`.
pub fn mcdiarmid_bound(n: u64, p: f64, t: f64) -> TailBound {
    let m = Method::McDiarmid;
    let nf = n as f64;
    require!(n >= 1, m, "n must be >= 1");
    require!(in_unit(p), m, "p must lie in (0,1)");
    require!(t > 0.0, m, "t <= 0");
    require!(t < 1.0 - p, m, "t >= 1-p");
    let Ok(d) = kl_divergence(p + t, p) else {
        return TailBound::invalid(m, "p+t outside (0,1)");
    };
    let h = ((t + p) * (1.0 - p) / (p * (1.0 - p - t))).ln();
    TailBound::valid(
        m,
        -nf * d,
        vec![("h", h), ("foolproof", -2.0 * nf * t * t), ("t", t), ("sum_threshold", nf * (p + t))],
    )
}

/// Smallest `t` for which the refined bounds apply (the optimal `h` exceeds 1).
pub fn refined_threshold(p: f64) -> f64 {
    let e = std::f64::consts::E;
    p * (1.0 - p) * (e - 1.0) / (1.0 - p + e * p)
}

/// McDiarmid's bound with the missing factor `(1+h)/e^h`:
/// `m (H_m - T) + (1 - m) P[B = l]`, `l = n(p+t)`.
pub fn mcdiarmid_refined_bound(n: u64, p: f64, t: f64) -> TailBound {
    let m = Method::McDiarmidRefined;
    let nf = n as f64;
    require!(n >= 1, m, "n must be >= 1");
    require!(in_unit(p), m, "p must lie in (0,1)");
    require!(t > 0.0, m, "t <= 0");
    require!(t < 1.0 - p, m, "t >= 1-p");
    let Some(ell) = as_integer(nf * (p + t)) else {
        return TailBound::invalid(m, "n(p+t) not integer");
    };
    require!(ell >= 1 && ell < n, m, "n(p+t) outside (np, n)");
    require!(t > refined_threshold(p), m, "t too small: h <= 1");

    let h = ((t + p) * (1.0 - p) / (p * (1.0 - p - t))).ln();
    let ln_factor = (1.0 + h).ln() - h;
    let spec = BinomialSpec::new(n, p).expect("validated");
    let pmf = |j: u64| binom_pmf_log(&spec, j).expect("in support").ln();
    let shifted = |j: u64| pmf(j) + h * (j as f64 - ell as f64);
    // H_m - T is exactly the part of the moment sum at or above l
    let ln_upper = log_sum_exp((ell..=n).map(shifted));
    let ln_lower = log_sum_exp((0..ell).map(shifted));
    let ln_h_m = -nf * kl_divergence(p + t, p).expect("validated");
    let ln_one_minus = (-ln_factor.exp()).ln_1p();
    let value = log_sum_exp([ln_factor + ln_upper, ln_one_minus + pmf(ell)]);
    TailBound::valid(
        m,
        value,
        vec![
            ("h", h),
            ("missing_factor", ln_factor.exp()),
            ("ln_h_m", ln_h_m),
            ("ln_t_sum", ln_lower),
            ("t", t),
            ("sum_threshold", ell as f64),
        ],
    )
}

/// Cross-check of the closed-form Hoeffding optimizer, reported as grid-minimized.
pub fn hoeffding_numeric(n: u64, p: f64, t: f64) -> TailBound {
    let b = hoeffding_bound(n, p, t);
    match hoeffding_forms(n, p, t) {
        Some(f) if b.is_valid() => TailBound::valid(Method::Hoeffding, f.infimum, vec![("h", f.h_numeric), ("t", t)])
            .with_provenance(Provenance::GridMinimized),
        _ => b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hoeffding_rejects_boundaries() {
        assert_eq!(hoeffding_bound(10, 0.3, 3.0).invalid_reason(), Some("t <= np"));
        assert_eq!(hoeffding_bound(10, 0.3, 10.0).invalid_reason(), Some("t >= n"));
        assert!(hoeffding_bound(10, 0.3, 3.0000001).is_valid());
    }

    #[test]
    fn hoeffding_forms_agree() {
        for (n, p, t) in [(10u64, 0.3, 6.0), (100, 0.3, 40.0), (5000, 0.01, 80.0), (7, 0.9, 6.9)] {
            let f = hoeffding_forms(n, p, t).unwrap();
            assert!((f.infimum - f.kl).abs() <= 1e-10 * f.kl.abs().max(1.0), "{n} {p} {t}");
            assert!((f.product - f.kl).abs() <= 1e-10 * f.kl.abs().max(1.0));
            let b = hoeffding_bound(n, p, t);
            assert!((b.param("h").unwrap() - f.h_numeric).abs() < 1e-5);
            assert!((hoeffding_numeric(n, p, t).ln().unwrap() - b.ln().unwrap()).abs() < 1e-10 * f.kl.abs().max(1.0));
        }
    }

    #[test]
    fn ik_default_constant_is_annotated() {
        let b = ik_bound(20, 0.2, 1.0, None);
        assert_eq!(b.notes, vec!["Bernoulli-only soundness".to_string()]);
        assert!(ik_bound(20, 0.2, 1.0, Some(2.0)).notes.is_empty());
        assert!(!ik_bound(20, 0.2, 4.5, None).is_valid());
        assert!(!ik_bound(20, 0.2, 1.0, Some(0.5)).is_valid());
    }

    #[test]
    fn ik_tends_to_one_as_eps_vanishes() {
        let v = ik_bound(50, 0.3, 1e-9, None).ln().unwrap();
        assert!(v <= 0.0 && v > -1e-12);
    }

    #[test]
    fn coupling_boundary_and_identity() {
        assert_eq!(coupling_bound(100, 0.3, 31.0).invalid_reason(), Some("t <= np+1"));
        let c = coupling_bound(100, 0.3, 50.0);
        assert!((c.param("eps0").unwrap() - 19.0 / 30.0).abs() < 1e-12);
        let h = hoeffding_bound(100, 0.3, 49.0);
        assert!((c.ln().unwrap() - (LN_2 + h.ln().unwrap())).abs() < 1e-12);
    }

    #[test]
    fn mcdiarmid_matches_hoeffding_at_sum_scale() {
        for (n, p, t) in [(50u64, 0.4, 0.2), (20, 0.3, 0.4), (1000, 0.05, 0.01)] {
            let a = mcdiarmid_bound(n, p, t).ln().unwrap();
            let b = hoeffding_bound(n, p, n as f64 * (p + t)).ln().unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }
        assert!(!mcdiarmid_bound(50, 0.4, 0.7).is_valid());
        assert!(!mcdiarmid_bound(50, 0.4, 0.6).is_valid());
    }

    #[test]
    fn refined_validity_clauses() {
        assert!((refined_threshold(0.3) - 0.238_103).abs() < 1e-5);
        assert_eq!(mcdiarmid_refined_bound(20, 0.3, 0.33).invalid_reason(), Some("n(p+t) not integer"));
        assert_eq!(mcdiarmid_refined_bound(20, 0.3, 0.2).invalid_reason(), Some("t too small: h <= 1"));
        assert_eq!(mcdiarmid_refined_bound(20, 0.3, 0.7).invalid_reason(), Some("t >= 1-p"));
        let b = mcdiarmid_refined_bound(20, 0.3, 0.25);
        assert!(b.is_valid());
        assert!(b.param("h").unwrap() > 1.0);
    }

    #[test]
    fn refined_below_plain_mcdiarmid() {
        for n in [10u64, 20, 40, 100] {
            for step in 1..n {
                let t = step as f64 / n as f64 - 0.3;
                let r = mcdiarmid_refined_bound(n, 0.3, t);
                if let Some(v) = r.ln() {
                    assert!(v <= mcdiarmid_bound(n, 0.3, t).ln().unwrap() + 1e-12, "n={n} t={t}");
                }
            }
        }
    }
}
