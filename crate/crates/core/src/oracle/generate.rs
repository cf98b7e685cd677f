//! Seeded generators of joint distributions, and fixed constructions with
//! known dependence structure.

use rand::Rng;
use rand_distr::Exp1;

use super::{Atom, JointDist};
use crate::error::{domain, Error, Result};
use crate::numkernel::size_error;
use crate::streams::stream_rng;

/// Largest `n` for full-support Bernoulli generation.
pub const GEN_MAX_N: usize = 12;

/// Rejection cap for constrained generation.
pub const MAX_ATTEMPTS: usize = 100_000;

const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    None,
    /// `E[prod_{i in A} X_i] <= gamma^|A|` for every `A`.
    ProductBound(f64),
    /// `E[Z_A] <= gamma^|A| delta^(n-|A|)` for every `A`.
    SplitBound { gamma: f64, delta: f64 },
}

/// Full-support Bernoulli distribution on `n <= 12` variables satisfying the
/// constraint, verified over all `2^n` sets.
pub fn random_joint_dist(n: usize, constraint: &Constraint, seed: u64) -> Result<JointDist> {
    if n == 0 {
        return Err(domain("n must be >= 1"));
    }
    if n > GEN_MAX_N {
        return Err(size_error(n, GEN_MAX_N));
    }
    let mut rng = stream_rng(seed, 0);
    let (lo, hi) = match *constraint {
        Constraint::None => {
            let w: Vec<f64> = (0..1usize << n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = w.iter().sum();
            return JointDist::from_mask_probs(n, &w.iter().map(|v| v / total).collect::<Vec<_>>());
        }
        Constraint::ProductBound(g) => {
            if !(g > 0.0 && g < 1.0) {
                return Err(domain(format!("gamma must lie in (0,1), got {g}")));
            }
            (0.0, g)
        }
        Constraint::SplitBound { gamma, delta } => {
            if !(gamma > 0.0 && gamma < 1.0) || !(delta > 0.0 && delta <= 1.0) {
                return Err(domain(format!("need gamma in (0,1) and delta in (0,1], got ({gamma}, {delta})")));
            }
            if gamma + delta < 1.0 - REL_TOL {
                return Err(domain(format!("gamma + delta = {} < 1 is infeasible", gamma + delta)));
            }
            ((1.0 - delta).max(0.0), gamma)
        }
    };

    let mut best: Option<(f64, String)> = None;
    for attempt in 0..MAX_ATTEMPTS {
        // every 64th proposal is an unperturbed product law
        let eta = if attempt % 64 == 63 { 0.0 } else { rng.random::<f64>() * 0.9 };
        let qs: Vec<f64> = (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
        let mut w = product_mask_probs(&qs);
        for v in &mut w {
            *v *= 1.0 + eta * (2.0 * rng.random::<f64>() - 1.0);
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        match worst_violation(n, &w, constraint) {
            None => return JointDist::from_mask_probs(n, &w),
            Some((ratio, what)) => {
                if best.as_ref().is_none_or(|(r, _)| ratio < *r) {
                    best = Some((ratio, what));
                }
            }
        }
    }
    let (ratio, what) = best.expect("at least one attempt");
    Err(Error::Generation { attempts: MAX_ATTEMPTS, violated: format!("{what} (ratio {ratio})") })
}

/// Largest ratio `moment / cap` over violated sets, or `None` if all hold.
fn worst_violation(n: usize, probs: &[f64], constraint: &Constraint) -> Option<(f64, String)> {
    let mut worst: Option<(f64, usize)> = None;
    let mut consider = |mask: usize, value: f64, cap: f64| {
        if value > cap * (1.0 + REL_TOL) {
            let r = value / cap;
            if worst.is_none_or(|(w, _)| r > w) {
                worst = Some((r, mask));
            }
        }
    };
    let label = match *constraint {
        Constraint::None => return None,
        Constraint::ProductBound(g) => {
            let sup = superset_sums(n, probs);
            for (mask, &v) in sup.iter().enumerate().skip(1) {
                consider(mask, v, g.powi(mask.count_ones() as i32));
            }
            "E[prod X_i]"
        }
        Constraint::SplitBound { gamma, delta } => {
            for (mask, &v) in probs.iter().enumerate() {
                let k = mask.count_ones() as i32;
                consider(mask, v, gamma.powi(k) * delta.powi(n as i32 - k));
            }
            "E[Z_A]"
        }
    };
    worst.map(|(r, mask)| {
        let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        (r, format!("{label} over A = {set:?} exceeds its cap"))
    })
}

/// `sum_{B contains A} f(B)` for every `A`.
pub(crate) fn superset_sums(n: usize, f: &[f64]) -> Vec<f64> {
    let mut s = f.to_vec();
    for i in 0..n {
        let bit = 1 << i;
        for mask in 0..s.len() {
            if mask & bit == 0 {
                s[mask] += s[mask | bit];
            }
        }
    }
    s
}

fn product_mask_probs(qs: &[f64]) -> Vec<f64> {
    let mut w = vec![1.0];
    for &q in qs {
        let half = w.len();
        w.resize(2 * half, 0.0);
        for mask in 0..half {
            let base = w[mask];
            w[mask] = base * (1.0 - q);
            w[mask | half] = base * q;
        }
    }
    w
}

/// Joint law of consecutive independent blocks, each given as probabilities
/// of its local outcomes.
fn from_blocks(blocks: &[(usize, Vec<f64>)]) -> Result<JointDist> {
    let n: usize = blocks.iter().map(|b| b.0).sum();
    if n > super::ENUM_MAX_N {
        return Err(size_error(n, super::ENUM_MAX_N));
    }
    let mut w = vec![1.0];
    let mut width = 0;
    for (size, local) in blocks {
        let mut next = vec![0.0; w.len() << size];
        for (mask, &a) in w.iter().enumerate() {
            for (lm, &b) in local.iter().enumerate() {
                next[mask | lm << width] = a * b;
            }
        }
        w = next;
        width += size;
    }
    JointDist::from_mask_probs(n, &w)
}

/// Independent Bernoulli variables with the given means.
pub fn product_bernoulli(ps: &[f64]) -> Result<JointDist> {
    if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(domain(format!("probability {p} outside [0,1]")));
    }
    from_blocks(&ps.iter().map(|&p| (1, vec![1.0 - p, p])).collect::<Vec<_>>())
}

/// Fair bits in blocks of `b`: in each block the last bit is the parity of
/// the others, so every `b - 1` variables are independent.
pub fn block_parity(n: usize, b: usize) -> Result<JointDist> {
    if b < 2 || n == 0 {
        return Err(domain("block parity needs n >= 1 and b >= 2"));
    }
    let mut blocks = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = left.min(b);
        let local: Vec<f64> = if s < b {
            vec![1.0 / (1 << s) as f64; 1 << s]
        } else {
            (0..1usize << s)
                .map(|m| if m.count_ones() % 2 == 0 { 1.0 / (1 << (s - 1)) as f64 } else { 0.0 })
                .collect()
        };
        blocks.push((s, local));
        left -= s;
    }
    from_blocks(&blocks)
}

/// Fair bits grouped into consecutive cliques; within a clique, with
/// probability `rho` all bits copy one fair coin, otherwise they are
/// independent. Distinct cliques are independent.
pub fn clique_mixture(sizes: &[usize], rho: f64) -> Result<JointDist> {
    if !(0.0..=1.0).contains(&rho) || sizes.contains(&0) {
        return Err(domain("clique mixture needs rho in [0,1] and nonempty cliques"));
    }
    let blocks: Vec<(usize, Vec<f64>)> = sizes
        .iter()
        .map(|&s| {
            let full = (1usize << s) - 1;
            let local = (0..=full)
                .map(|m| {
                    let shared = if m == 0 || m == full { rho / 2.0 } else { 0.0 };
                    shared + (1.0 - rho) / (1usize << s) as f64
                })
                .collect();
            (s, local)
        })
        .collect();
    from_blocks(&blocks)
}

/// `lambda * prod(a) + (1 - lambda) * prod(b)`.
pub fn product_mixture(a: &[f64], b: &[f64], lambda: f64) -> Result<JointDist> {
    if a.len() != b.len() || !(0.0..=1.0).contains(&lambda) {
        return Err(domain("product mixture needs equal lengths and lambda in [0,1]"));
    }
    let (pa, pb) = (product_bernoulli(a)?.mask_probs()?, product_bernoulli(b)?.mask_probs()?);
    let w: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
    JointDist::from_mask_probs(a.len(), &w)
}

/// `X_i = p_i + s_i (B_i - p_i)` with independent `B_i ~ Bernoulli(p_i)` and
/// `s_i = (1 + #{j < i : B_j = 1}) / (i + 1)`. Each `X_i` has conditional mean
/// `p_i` given the past, so `X_i - p_i` is a martingale difference sequence.
pub fn martingale(ps: &[f64]) -> Result<JointDist> {
    let n = ps.len();
    if n == 0 || n > super::ENUM_MAX_N {
        return Err(domain(format!("martingale construction needs 1 <= n <= {}", super::ENUM_MAX_N)));
    }
    if let Some(p) = ps.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(domain(format!("p_i = {p} outside (0,1)")));
    }
    let mut atoms = Vec::with_capacity(1 << n);
    for mask in 0..1u64 << n {
        let mut w = 1.0;
        let mut ups = 0;
        let mut x = Vec::with_capacity(n);
        for (i, &p) in ps.iter().enumerate() {
            let b = (mask >> i & 1) as f64;
            w *= if b == 1.0 { p } else { 1.0 - p };
            let s = (1 + ups) as f64 / (i + 1) as f64;
            x.push((p + s * (b - p)).clamp(0.0, 1.0));
            ups += b as usize;
        }
        atoms.push(Atom { x, w });
    }
    JointDist::new(n, atoms)
}

/// All coordinates equal `t/n` with probability `mean/t`, else all zero:
/// Markov's inequality at `t` is attained.
pub fn markov_extremal(n: usize, mean: f64, t: f64) -> Result<JointDist> {
    if !(mean > 0.0 && mean < t && t <= n as f64) {
        return Err(domain(format!("need 0 < mean < t <= n, got mean={mean}, t={t}, n={n}")));
    }
    let q = mean / t;
    JointDist::new(
        n,
        vec![Atom { x: vec![t / n as f64; n], w: q }, Atom { x: vec![0.0; n], w: 1.0 - q }],
    )
}

/// `atoms` random points of `[0,1]^n` with Dirichlet(1) weights.
pub fn random_fractional(n: usize, atoms: usize, seed: u64) -> Result<JointDist> {
    if n == 0 || atoms == 0 {
        return Err(domain("need n >= 1 and at least one atom"));
    }
    let mut rng = stream_rng(seed, 0);
    let raw: Vec<(Vec<f64>, f64)> = (0..atoms)
        .map(|_| ((0..n).map(|_| rng.random::<f64>()).collect(), rng.sample::<f64, _>(Exp1)))
        .collect();
    let total: f64 = raw.iter().map(|r| r.1).sum();
    JointDist::new(n, raw.into_iter().map(|(x, w)| Atom { x, w: w / total }).collect())
}

/// Independent coordinates, each uniform over `support` random points of
/// `[0,1]` with Dirichlet(1) weights.
pub fn random_product_fractional(n: usize, support: usize, seed: u64) -> Result<JointDist> {
    if n == 0 || support == 0 {
        return Err(domain("need n >= 1 and at least one support point"));
    }
    let cells = (support as f64).powi(n as i32);
    if cells > (1u64 << super::ENUM_MAX_N) as f64 {
        return Err(domain(format!("{support}^{n} atoms is too many")));
    }
    let mut rng = stream_rng(seed, 0);
    let marginals: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|_| {
            let raw: Vec<(f64, f64)> =
                (0..support).map(|_| (rng.random::<f64>(), rng.sample::<f64, _>(Exp1))).collect();
            let total: f64 = raw.iter().map(|r| r.1).sum();
            raw.into_iter().map(|(x, w)| (x, w / total)).collect()
        })
        .collect();
    let mut atoms = vec![Atom { x: vec![], w: 1.0 }];
    for m in &marginals {
        atoms = atoms
            .iter()
            .flat_map(|a| {
                m.iter().map(move |&(x, w)| {
                    let mut xs = a.x.clone();
                    xs.push(x);
                    Atom { x: xs, w: a.w * w }
                })
            })
            .collect();
    }
    JointDist::new(n, atoms)
}

/// Bernoulli law supported on `atoms` random outcomes (repeats merge).
pub fn sparse_bernoulli(n: usize, atoms: usize, seed: u64) -> Result<JointDist> {
    if n == 0 || n > GEN_MAX_N || atoms == 0 {
        return Err(domain(format!("need 1 <= n <= {GEN_MAX_N} and at least one atom")));
    }
    let mut rng = stream_rng(seed, 0);
    let mut w = vec![0.0; 1 << n];
    for _ in 0..atoms {
        w[rng.random_range(0..1usize << n)] += rng.sample::<f64, _>(Exp1);
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    JointDist::from_mask_probs(n, &w)
}
