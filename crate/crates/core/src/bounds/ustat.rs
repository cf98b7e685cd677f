//! U-statistic bounds. The statistic `X` sums a `[0,1]` kernel over all
//! `d`-subsets of `n` i.i.d. inputs; it is a convex mixture of scaled
//! `Bin(k, p)` variables, `k = n/d`.

use super::classic::refined_threshold;
use super::{as_integer, require, Method, TailBound, UStatParams};
use crate::numkernel::{binom_pmf_log, kl_divergence, log_diff_exp, log_sum_exp, BinomialSpec};

/// `exp(-k D(p+t || p))` for `P[X >= E[X] + t C(n,d)]`.
pub fn ustat_bound(params: &UStatParams, t: f64) -> TailBound {
    let m = Method::UStat;
    let (k, p, nd) = (params.k() as f64, params.p(), params.n_d());
    require!(t > 0.0, m, "t <= 0");
    require!(t < 1.0 - p, m, "t >= 1-p");
    let Ok(d) = kl_divergence(p + t, p) else {
        return TailBound::invalid(m, "p+t outside (0,1)");
    };
    let u = ((p + t) * (1.0 - p) / (p * (1.0 - p - t))).ln();
    TailBound::valid(
        m,
        -k * d,
        vec![
            ("t", t),
            ("y", params.threshold(t)),
            ("n_d", nd),
            ("k", k),
            ("h", u / nd),
            ("foolproof", -2.0 * k * t * t),
        ],
    )
}

/// The U-statistic bound with missing factor `(h N_d + 1)/e^(h N_d)`:
/// `m (exp(-2kt^2) - T2) + (1 - m) P[B = l]`, `l = k(p+t)`.
pub fn ustat_refined_bound(params: &UStatParams, t: f64) -> TailBound {
    let m = Method::UStatRefined;
    let (k, p, nd) = (params.k(), params.p(), params.n_d());
    let kf = k as f64;
    require!(t > 0.0, m, "t <= 0");
    require!(t < 1.0 - p, m, "t >= 1-p");
    let Some(ell) = as_integer(kf * (p + t)) else {
        return TailBound::invalid(m, "k(p+t) not integer");
    };
    require!(ell >= 1 && ell < k, m, "k(p+t) outside (kp, k)");
    require!(t > refined_threshold(p), m, "t too small: h N_d <= 1");

    // u = h N_d; the shift h(N_d j - y) equals u (j - l) since y = N_d l
    let u = ((p + t) * (1.0 - p) / (p * (1.0 - p - t))).ln();
    let ln_factor = (1.0 + u).ln() - u;
    let spec = BinomialSpec::new(k, p).expect("validated");
    let pmf = |j: u64| binom_pmf_log(&spec, j).expect("in support").ln();
    let ln_t2 = log_sum_exp((0..ell).map(|j| pmf(j) + u * (j as f64 - ell as f64)));
    let foolproof = -2.0 * kf * t * t;
    let ln_one_minus = (-ln_factor.exp()).ln_1p();
    let value = log_sum_exp([ln_factor + log_diff_exp(foolproof, ln_t2), ln_one_minus + pmf(ell)]);
    TailBound::valid(
        m,
        value,
        vec![
            ("t", t),
            ("y", params.threshold(t)),
            ("n_d", nd),
            ("k", kf),
            ("h", u / nd),
            ("missing_factor", ln_factor.exp()),
            ("ln_t2", ln_t2),
            ("foolproof", foolproof),
        ],
    )
}
