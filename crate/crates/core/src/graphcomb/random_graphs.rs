//! Tail bounds for subgraph counts in G(n,p) and G(n,m).

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::bounds::{ik_bound, require, Method, TailBound};
use crate::error::{domain, Result};
use crate::numkernel::exact;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GnpKind {
    Isolated,
    Triangles,
    Cliques4,
}

impl GnpKind {
    pub fn method(self) -> Method {
        match self {
            GnpKind::Isolated => Method::GnpIsolated,
            GnpKind::Triangles => Method::GnpTriangles,
            GnpKind::Cliques4 => Method::Gnp4Cliques,
        }
    }

    /// Number of indicator summands: vertices, vertex triples or quadruples.
    pub fn count(self, n: u64) -> u64 {
        match self {
            GnpKind::Isolated => n,
            GnpKind::Triangles => n * n.saturating_sub(1) * n.saturating_sub(2) / 6,
            GnpKind::Cliques4 => {
                n * n.saturating_sub(1) * n.saturating_sub(2) * n.saturating_sub(3) / 24
            }
        }
    }

    fn min_n(self) -> u64 {
        match self {
            GnpKind::Isolated => 1,
            GnpKind::Triangles => 3,
            GnpKind::Cliques4 => 4,
        }
    }
}

/// Per-summand product-moment constant `gamma` for the count of `kind`.
pub fn gnp_constant(kind: GnpKind, n: u64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("p must lie in (0,1), got {p}")));
    }
    if n < kind.min_n() {
        return Err(domain(format!("n must be >= {}, got {n}", kind.min_n())));
    }
    let nf = n as f64;
    Ok(match kind {
        GnpKind::Isolated => ((nf - 1.0) / 2.0 * (-p).ln_1p()).exp(),
        GnpKind::Triangles if n == 3 => p,
        GnpKind::Triangles => p.powf(3.0 / (nf - 2.0)),
        // K_4 on 4 vertices needs all 6 edges; 12/((n-2)(n-3)) also gives 6
        GnpKind::Cliques4 => p.powf(12.0 / ((nf - 2.0) * (nf - 3.0))),
    })
}

/// `P[count >= t]` in G(n,p) via the covariance bound with `c = 1`.
pub fn gnp_bound(kind: GnpKind, n: u64, p: f64, t: f64) -> TailBound {
    let m = kind.method();
    let gamma = match gnp_constant(kind, n, p) {
        Ok(g) => g,
        Err(e) => return TailBound::invalid(m, e.to_string()),
    };
    let count = kind.count(n);
    let nf = count as f64;
    require!(t > nf * gamma, m, "t <= N gamma");
    require!(t < nf, m, "t >= N");
    let eps = t / (nf * gamma) - 1.0;
    let mut b = ik_bound(count, gamma, eps, Some(1.0)).retag(m);
    if !b.is_valid() {
        return b;
    }
    b.params.insert("gamma".into(), gamma);
    b.params.insert("count".into(), nf);
    if b.bound().unwrap_or(0.0) > 0.5 {
        b = b.with_note("weak: bound exceeds 0.5");
    }
    b
}

struct Ratio {
    num: BigUint,
    den: BigUint,
}

impl Ratio {
    fn cmp(&self, other: &Ratio) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

/// Minimum over `k in 1..t` of `term(k)`, with the minimizing `k`.
fn min_ratio(t: u64, term: impl Fn(u64) -> Ratio) -> (u64, Ratio) {
    let mut best = (1, term(1));
    for k in 2..t {
        let r = term(k);
        if r.cmp(&best.1) == Ordering::Less {
            best = (k, r);
        }
    }
    best
}

fn finish(method: Method, t: u64, k: u64, r: Ratio) -> TailBound {
    let ln = if r.num.is_zero() { f64::NEG_INFINITY } else { exact::ln_ratio(&r.num, &r.den) };
    let mut b = TailBound::valid(method, ln, vec![("t", t as f64), ("k", k as f64)]);
    if r.num.is_zero() {
        b = b.with_note("exact zero: no graph with m edges has the forced structure");
    }
    b
}

/// `P[I >= t]` for isolated vertices in G(n,m):
/// `min_{0<k<t} C(n,k) C(C(n-k,2), m) / (C(t,k) C(C(n,2), m))`.
pub fn gnm_isolated_bound(n: u64, m: u64, t: u64) -> TailBound {
    let method = Method::GnmIsolated;
    let pairs = n * n.saturating_sub(1) / 2;
    require!(m <= pairs, method, "m > C(n,2)");
    require!(t >= 2, method, "t too small");
    require!(t <= n, method, "t > n");
    let total = exact::binom(pairs, m);
    let (k, r) = min_ratio(t, |k| {
        let free = (n - k) * (n - k).saturating_sub(1) / 2;
        Ratio {
            num: exact::binom(n, k) * exact::binom(free, m),
            den: exact::binom(t, k) * &total,
        }
    });
    finish(method, t, k, r)
}

/// `P[T >= t]` for triangles in G(n,m):
/// `min_{0<k<t} C(C(n,3),k) C(C(n,2)-f, m-f) / (C(t,k) C(C(n,2), m))`,
/// `f = floor(3k/(n-2))`.
pub fn gnm_triangles_bound(n: u64, m: u64, t: u64) -> TailBound {
    let method = Method::GnmTriangles;
    require!(n >= 3, method, "n < 3");
    let pairs = n * (n - 1) / 2;
    let triples = n * (n - 1) * (n - 2) / 6;
    require!(m <= pairs, method, "m > C(n,2)");
    require!(t >= 2, method, "t too small");
    require!(t <= triples, method, "t > C(n,3)");
    let total = exact::binom(pairs, m);
    let (k, r) = min_ratio(t, |k| {
        let forced = 3 * k / (n - 2);
        let num = if forced > m {
            BigUint::zero()
        } else {
            exact::binom(triples, k) * exact::binom(pairs - forced, m - forced)
        };
        Ratio { num, den: exact::binom(t, k) * &total }
    });
    finish(method, t, k, r)
}
