//! `inf_f E[f(Z)] / f(t)` over parameterized families of increasing convex
//! nonnegative functions.

use super::ZDist;
use crate::bounds::{require, Method, Provenance, TailBound};
use crate::numkernel::{log_binom_coeff, log_sum_exp};

/// Number of grid points for the `h` families unless overridden.
pub const DEFAULT_GRID: usize = 512;

/// Decades covered on each side of the grid centre.
const GRID_DECADES: f64 = 3.0;

const MAX_CENTER: f64 = 700.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexFamily {
    /// `f(x) = e^(h x)` on a geometric `h` grid.
    Exponential { grid: usize },
    /// `f(x) = max(0, h (x - ell) + 1)` on a geometric `h` grid.
    Hinge { ell: f64, grid: usize },
    /// Piecewise-linear interpolation of `m -> C(m, k)`, zero below `k`.
    BinomCoeff(u64),
}

impl ConvexFamily {
    /// Member value at `x`; `h` is ignored by `BinomCoeff`.
    pub fn eval(&self, h: f64, x: f64) -> f64 {
        match *self {
            ConvexFamily::Exponential { .. } => (h * x).exp(),
            ConvexFamily::Hinge { ell, .. } => (h * (x - ell) + 1.0).max(0.0),
            ConvexFamily::BinomCoeff(k) => binom_interp(k, x),
        }
    }
}

fn binom_at(m: f64, k: u64) -> f64 {
    if m < k as f64 {
        0.0
    } else {
        log_binom_coeff(m as u64, k).map(f64::exp).unwrap_or(0.0)
    }
}

fn binom_interp(k: u64, x: f64) -> f64 {
    if x <= 0.0 {
        return binom_at(0.0, k);
    }
    let lo = x.floor();
    let frac = x - lo;
    let a = binom_at(lo, k);
    if frac == 0.0 {
        return a;
    }
    a + frac * (binom_at(lo + 1.0, k) - a)
}

/// `m` points spaced geometrically over `center * 10^[-3, 3]`, plus `center`.
/// The grid with `2m - 1` points contains the one with `m` points.
pub(crate) fn h_grid(center: f64, m: usize) -> Vec<f64> {
    let mut g: Vec<f64> = if m <= 1 {
        vec![]
    } else {
        (0..m)
            .map(|i| center * 10f64.powf(-GRID_DECADES + 2.0 * GRID_DECADES * i as f64 / (m - 1) as f64))
            .collect()
    };
    g.push(center);
    g
}

/// Best member of `family` for `P[sum X_i >= t]` given the Z-distribution.
pub fn dephoeff_bound(zdist: &ZDist, t: f64, family: &ConvexFamily) -> TailBound {
    let m = Method::ConvexFunction;
    let n = zdist.n() as f64;
    let mean = zdist.mean();
    require!(t > mean, m, "t <= mean");
    require!(t < n, m, "t >= n");
    let support: Vec<(f64, f64)> = zdist
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(j, p)| (j as f64, p.ln()))
        .collect();
    // closed-form optimizer for a binomial Z with this mean
    // capped for a mean of zero, where e^(-center) already underflows
    let center = (t * (n - mean) / ((n - t) * mean.max(f64::MIN_POSITIVE))).ln().min(MAX_CENTER);

    let (value, params) = match *family {
        ConvexFamily::Exponential { grid } => {
            let mut best = (f64::INFINITY, center);
            for h in h_grid(center, grid) {
                let v = log_sum_exp(support.iter().map(|&(j, lp)| lp + h * (j - t)));
                if v < best.0 {
                    best = (v, h);
                }
            }
            (best.0, vec![("h", best.1), ("members", (grid.max(1) + 1) as f64)])
        }
        ConvexFamily::Hinge { ell, grid } => {
            let mut best: Option<(f64, f64)> = None;
            let mut members = 0usize;
            for h in h_grid(center, grid) {
                let ft = h * (t - ell) + 1.0;
                if ft <= 0.0 {
                    continue;
                }
                members += 1;
                let v = log_sum_exp(support.iter().filter_map(|&(j, lp)| {
                    let f = h * (j - ell) + 1.0;
                    (f > 0.0).then(|| lp + f.ln())
                })) - ft.ln();
                if best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, h));
                }
            }
            let Some((v, h)) = best else {
                return TailBound::invalid(m, "no member is positive at t");
            };
            (v, vec![("h", h), ("ell", ell), ("members", members as f64)])
        }
        ConvexFamily::BinomCoeff(k) => {
            let gt = binom_interp(k, t);
            require!(gt > 0.0, m, "g(t) = 0: t <= k-1");
            let num = log_sum_exp(
                support
                    .iter()
                    .filter(|&&(j, _)| j >= k as f64)
                    .map(|&(j, lp)| lp + log_binom_coeff(j as u64, k).expect("j >= k")),
            );
            (num - gt.ln(), vec![("k", k as f64)])
        }
    };
    let mut all = vec![("t", t), ("mean", mean)];
    all.extend(params);
    let b = TailBound::valid(m, value, all);
    match family {
        ConvexFamily::BinomCoeff(_) => b,
        _ => b.with_provenance(Provenance::GridMinimized),
    }
}
