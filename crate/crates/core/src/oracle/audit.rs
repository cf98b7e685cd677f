//! Soundness audits: every bound whose hypotheses a small explicit
//! distribution provably satisfies is checked against its exact tail.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;

use super::generate::{self, Constraint};
use super::{
    dephoeff_bound, exact_tail, symmetric_moment_map, symmetric_moments, z_distribution, ConvexFamily, JointDist,
    ZDist, DEFAULT_GRID,
};
use crate::bounds::{
    coupling_bound, depgraph_bound, hoeffding_bound, ik_bound, kwise_bernoulli_bound, kwise_bound, linial_lower_bound,
    linial_luria_best, linial_luria_bound, mcdiarmid_bound, mcdiarmid_refined_bound, split_moment_bound, sss_bound,
    DependencyGraphParams, Method, MomentProfile, TailBound,
};
use crate::error::{domain, Result};
use crate::graphcomb::{independence_number, Graph};
use crate::numkernel::size_error;
use crate::streams::stream_rng;

/// Largest `n` the audit enumerates.
pub const AUDIT_MAX_N: usize = 12;

/// Allowed excess of the exact tail over a bound.
pub const VIOLATION_SLACK: f64 = 1e-12;

/// Thresholds tried per bound.
pub const THRESHOLDS_PER_BOUND: usize = 5;

const EQ_TOL: f64 = 1e-12;
const MARTINGALE_TOL: f64 = 1e-11;

/// Dependence facts established exactly from an explicit distribution.
#[derive(Debug, Clone)]
pub struct Hypotheses {
    pub n: usize,
    pub bernoulli: bool,
    pub means: Vec<f64>,
    pub mean_sum: f64,
    /// Joint law equals the product of its marginals.
    pub independent: bool,
    /// All means agree.
    pub common_mean: Option<f64>,
    /// Smallest `gamma` with `E[prod_A X_i] <= gamma^|A|` for all nonempty `A`.
    pub gamma_star: f64,
    /// Largest `k` such that every `k` variables are mutually independent.
    pub kwise: usize,
    /// `E[X_i | X_1..X_(i-1)] = E[X_i]` for every `i`.
    pub martingale: bool,
    /// Largest independence number of a valid dependency graph, for fair
    /// Bernoulli variables.
    pub dependency_alpha: Option<usize>,
    z_moments: Vec<f64>,
    zdist: ZDist,
}

impl Hypotheses {
    pub fn derive(dist: &JointDist) -> Result<Hypotheses> {
        let n = dist.n();
        if n > AUDIT_MAX_N {
            return Err(size_error(n, AUDIT_MAX_N));
        }
        let means = dist.means();
        let mean_sum = dist.mean_sum();
        let bernoulli = dist.is_bernoulli();
        let independent = is_product(dist);
        let common_mean = means
            .iter()
            .all(|m| (m - means[0]).abs() <= EQ_TOL)
            .then(|| mean_sum / n as f64);
        let pm = dist.product_moments()?;
        let gamma_star = pm
            .iter()
            .enumerate()
            .skip(1)
            .map(|(mask, v)| v.powf(1.0 / mask.count_ones() as f64))
            .fold(0.0, f64::max);
        let kwise = if independent {
            n
        } else if bernoulli {
            bernoulli_kwise(&pm, &means)
        } else {
            1
        };
        let fair = bernoulli && means.iter().all(|m| (m - 0.5).abs() <= EQ_TOL);
        let dependency_alpha = if fair { Some(dependency_alpha(dist)?) } else { None };
        Ok(Hypotheses {
            n,
            bernoulli,
            means,
            mean_sum,
            independent,
            common_mean,
            gamma_star,
            kwise,
            martingale: is_martingale(dist),
            dependency_alpha,
            z_moments: dist.z_moments()?,
            zdist: z_distribution(dist)?,
        })
    }

    /// Smallest `delta >= 1 - gamma` with `E[Z_A] <= gamma^|A| delta^(n-|A|)`
    /// for every `A`, if one in `(0, 1]` exists.
    pub fn split_delta(&self, gamma: f64) -> Option<f64> {
        let n = self.n;
        let mut delta: f64 = 1.0 - gamma;
        for (mask, &z) in self.z_moments.iter().enumerate() {
            let k = mask.count_ones() as usize;
            let cap = gamma.powi(k as i32);
            if k == n {
                if z > cap * (1.0 + EQ_TOL) {
                    return None;
                }
            } else if z > 0.0 {
                delta = delta.max((z / cap).powf(1.0 / (n - k) as f64));
            }
        }
        (delta > 0.0 && delta <= 1.0).then_some(delta)
    }

    pub fn zdist(&self) -> &ZDist {
        &self.zdist
    }
}

/// Joint law equals the product of its marginals. Atoms with equal
/// coordinates are merged first.
fn is_product(dist: &JointDist) -> bool {
    let n = dist.n();
    let mut joint: HashMap<Vec<u64>, f64> = HashMap::new();
    let mut marginals: Vec<HashMap<u64, f64>> = vec![HashMap::new(); n];
    for a in dist.atoms() {
        if a.w == 0.0 {
            continue;
        }
        let key: Vec<u64> = a.x.iter().map(|v| v.to_bits()).collect();
        for (m, &k) in marginals.iter_mut().zip(&key) {
            *m.entry(k).or_default() += a.w;
        }
        *joint.entry(key).or_default() += a.w;
    }
    let cells: f64 = marginals.iter().map(|m| m.len() as f64).product();
    if cells != joint.len() as f64 {
        return false;
    }
    joint.iter().all(|(key, &w)| {
        let prod: f64 = key.iter().zip(&marginals).map(|(k, m)| m[k]).product();
        (w - prod).abs() <= EQ_TOL
    })
}

/// For Bernoulli variables, `k`-wise independence holds iff every product
/// moment of order at most `k` factorizes.
fn bernoulli_kwise(pm: &[f64], means: &[f64]) -> usize {
    let n = means.len();
    let mut first_bad = n + 1;
    for (mask, &v) in pm.iter().enumerate().skip(1) {
        let size = mask.count_ones() as usize;
        if size >= first_bad {
            continue;
        }
        let prod: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| means[i]).product();
        if (v - prod).abs() > EQ_TOL {
            first_bad = size;
        }
    }
    (first_bad - 1).max(1).min(n)
}

fn is_martingale(dist: &JointDist) -> bool {
    let means = dist.means();
    (1..dist.n()).all(|i| {
        let mut groups: HashMap<Vec<u64>, (f64, f64)> = HashMap::new();
        for a in dist.atoms() {
            let e = groups.entry(a.x[..i].iter().map(|v| v.to_bits()).collect()).or_default();
            e.0 += a.w;
            e.1 += a.w * a.x[i];
        }
        groups.values().all(|&(w, wx)| w == 0.0 || (wx / w - means[i]).abs() <= MARTINGALE_TOL)
    })
}

/// Size of the largest mutually independent set of fair bits. The graph that
/// is complete except inside that set is a dependency graph with this
/// independence number, and no dependency graph has a larger one.
fn dependency_alpha(dist: &JointDist) -> Result<usize> {
    let n = dist.n();
    let probs = dist.mask_probs()?;
    let mut best = 1u64;
    let mut best_size = 1;
    for set in 1u64..1 << n {
        let size = set.count_ones() as usize;
        if size <= best_size {
            continue;
        }
        let mut marg: HashMap<u64, f64> = HashMap::new();
        for (mask, &p) in probs.iter().enumerate() {
            *marg.entry(mask as u64 & set).or_default() += p;
        }
        let uniform = 0.5f64.powi(size as i32);
        let all = marg.len() == 1 << size && marg.values().all(|v| (v - uniform).abs() <= EQ_TOL);
        if all {
            best = set;
            best_size = size;
        }
    }
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if best >> u & 1 == 0 || best >> v & 1 == 0 {
                g.add_edge(u, v)?;
            }
        }
    }
    independence_number(&g)
}

/// Up to [`THRESHOLDS_PER_BOUND`] points of `(lo, hi)`: integers first,
/// spread evenly, then interior fractional points.
pub fn thresholds(lo: f64, hi: f64) -> Vec<f64> {
    if !(lo < hi) {
        return vec![];
    }
    let first = lo.floor() as i64 + 1;
    let last = hi.ceil() as i64 - 1;
    let ints: Vec<f64> = (first..=last).map(|v| v as f64).filter(|v| *v > lo && *v < hi).collect();
    let want = THRESHOLDS_PER_BOUND;
    let mut out: Vec<f64> = if ints.len() <= want {
        ints.clone()
    } else {
        (0..want).map(|i| ints[(i as f64 * (ints.len() - 1) as f64 / (want - 1) as f64).round() as usize]).collect()
    };
    let fill = want - out.len();
    for j in 0..fill {
        let v = lo + (hi - lo) * (j as f64 + 0.5) / fill as f64;
        if v > lo && v < hi {
            out.push(v);
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub method: Method,
    pub t: f64,
    pub exact: f64,
    pub bound: f64,
    pub params: BTreeMap<String, f64>,
}

/// Outcome of auditing one distribution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Audit {
    pub checks: BTreeMap<Method, usize>,
    pub violations: Vec<Violation>,
}

impl Audit {
    fn record(&mut self, dist: &JointDist, t: f64, b: TailBound) {
        let Some(bound) = b.bound() else { return };
        *self.checks.entry(b.method).or_default() += 1;
        let exact = exact_tail(dist, t);
        if exact > bound + VIOLATION_SLACK {
            self.violations.push(Violation {
                method: b.method,
                t,
                exact,
                bound,
                params: b.params.clone(),
            });
        }
    }

    pub fn total_checks(&self) -> usize {
        self.checks.values().sum()
    }
}

/// Checks every bound whose hypotheses `dist` satisfies at
/// [`THRESHOLDS_PER_BOUND`] thresholds each.
pub fn audit(dist: &JointDist) -> Result<Audit> {
    let h = Hypotheses::derive(dist)?;
    let n = h.n;
    let nu = n as u64;
    let nf = n as f64;
    let pbar = h.mean_sum / nf;
    let mut out = Audit::default();

    if h.independent {
        for t in thresholds(h.mean_sum, nf) {
            out.record(dist, t, hoeffding_bound(nu, pbar, t));
        }
        for t in thresholds(h.mean_sum + 1.0, nf) {
            out.record(dist, t, coupling_bound(nu, pbar, t));
        }
    }

    let g = h.gamma_star;
    if h.bernoulli && g > 0.0 && g < 1.0 {
        for t in thresholds(nf * g, nf) {
            out.record(dist, t, ik_bound(nu, g, t / (nf * g) - 1.0, None));
        }
    }

    if h.bernoulli {
        let exact_s = MomentProfile::SymmetricMoments(symmetric_moment_map(dist)?);
        for t in thresholds(1.0, nf).into_iter().filter(|t| t.fract() == 0.0) {
            out.record(dist, t, linial_luria_best(nu, t as u64, &exact_s));
            if g > 0.0 && g < 1.0 {
                out.record(dist, t, linial_luria_best(nu, t as u64, &MomentProfile::ProductBound(g)));
            }
        }
    }

    for gamma in [g, pbar] {
        if !(gamma > 0.0 && gamma < 1.0) {
            continue;
        }
        if let Some(delta) = h.split_delta(gamma) {
            for t in thresholds(nf * gamma, nf) {
                out.record(dist, t, split_moment_bound(nu, gamma, delta, t));
            }
        }
    }

    if h.martingale && h.means.iter().all(|p| *p > 0.0 && *p < 1.0) {
        for total in thresholds(h.mean_sum, nf) {
            let t = total / nf - pbar;
            out.record(dist, total, mcdiarmid_bound(nu, pbar, t));
            out.record(dist, total, mcdiarmid_refined_bound(nu, pbar, t));
        }
    }

    if let Some(p) = h.common_mean.filter(|p| *p > 0.0 && *p < 1.0) {
        let k = h.kwise as u64;
        for t in thresholds(nf * p, nf) {
            out.record(dist, t, kwise_bound(nu, k, p, t / (nf * p) - 1.0));
        }
        if h.bernoulli {
            for t in thresholds(nf * p, nf).into_iter().filter(|t| t.fract() == 0.0) {
                out.record(dist, t, kwise_bernoulli_bound(nu, k, p, t / (nf * p) - 1.0));
            }
        }
    }
    if pbar > 0.0 && pbar < 1.0 {
        for t in thresholds(h.mean_sum, nf) {
            out.record(dist, t, sss_bound(nu, pbar, t / h.mean_sum - 1.0, h.kwise as u64));
        }
    }

    if let Some(alpha) = h.dependency_alpha {
        let params = DependencyGraphParams::new(nu, alpha as u64)?;
        for t in thresholds(nf / 2.0, nf) {
            out.record(dist, t, depgraph_bound(&params, t));
        }
    }

    for t in thresholds(h.mean_sum, nf) {
        out.record(dist, t, dephoeff_bound(h.zdist(), t, &ConvexFamily::Exponential { grid: DEFAULT_GRID }));
        out.record(dist, t, dephoeff_bound(h.zdist(), t, &ConvexFamily::Hinge { ell: t, grid: DEFAULT_GRID }));
        for k in 0..=nu {
            out.record(dist, t, dephoeff_bound(h.zdist(), t, &ConvexFamily::BinomCoeff(k)));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepViolation {
    pub trial: usize,
    pub violation: Violation,
    pub dist: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    pub trials: usize,
    pub checks: BTreeMap<Method, usize>,
    pub violations: Vec<SweepViolation>,
}

impl SweepReport {
    pub fn total_checks(&self) -> usize {
        self.checks.values().sum()
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Trial `index` of a sweep: a distribution drawn from a rotating mix of
/// families, on between 2 and `n_max` variables.
pub fn sweep_dist(index: usize, n_max: usize, seed: u64, fractional: bool) -> Result<JointDist> {
    if !(2..=AUDIT_MAX_N).contains(&n_max) {
        return Err(domain(format!("n_max must lie in [2, {AUDIT_MAX_N}], got {n_max}")));
    }
    let mut rng = stream_rng(seed, index as u64);
    let n = rng.random_range(2..=n_max);
    let sub: u64 = rng.random();
    let unit = |rng: &mut rand_chacha::ChaCha8Rng, lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    if fractional {
        return match index % 4 {
            0 => generate::random_fractional(n, rng.random_range(1..=12), sub),
            1 => {
                let ps: Vec<f64> = (0..n.min(10)).map(|_| unit(&mut rng, 0.05, 0.95)).collect();
                generate::martingale(&ps)
            }
            2 => {
                let support = rng.random_range(1..=3);
                generate::random_product_fractional(n.min(8), support, sub)
            }
            _ => {
                let t = unit(&mut rng, 1.0, n as f64);
                generate::markov_extremal(n, unit(&mut rng, 0.05, 0.95) * t, t)
            }
        };
    }
    match index % 8 {
        0 => generate::random_joint_dist(n, &Constraint::None, sub),
        1 => generate::random_joint_dist(n, &Constraint::ProductBound(unit(&mut rng, 0.2, 0.7)), sub),
        2 => {
            let gamma = unit(&mut rng, 0.2, 0.6);
            let delta = unit(&mut rng, 1.0 - gamma + 0.05, 1.0);
            generate::random_joint_dist(n, &Constraint::SplitBound { gamma, delta }, sub)
        }
        3 => generate::product_bernoulli(&(0..n).map(|_| unit(&mut rng, 0.02, 0.9)).collect::<Vec<_>>()),
        4 => {
            let p = unit(&mut rng, 0.05, 0.6);
            generate::product_bernoulli(&vec![p; n])
        }
        5 => generate::block_parity(n, rng.random_range(2..=n.max(2))),
        6 => {
            let mut sizes = vec![];
            let mut left = n;
            while left > 0 {
                let s = rng.random_range(1..=left);
                sizes.push(s);
                left -= s;
            }
            generate::clique_mixture(&sizes, rng.random())
        }
        _ => {
            if sub.is_multiple_of(2) {
                generate::sparse_bernoulli(n, rng.random_range(1..=8), sub)
            } else {
                let a: Vec<f64> = (0..n).map(|_| unit(&mut rng, 0.05, 0.5)).collect();
                let b: Vec<f64> = (0..n).map(|_| unit(&mut rng, 0.3, 0.95)).collect();
                generate::product_mixture(&a, &b, rng.random())
            }
        }
    }
}

/// Audits `trials` seeded distributions in parallel; the report does not
/// depend on the number of threads.
pub fn soundness_sweep(trials: usize, n_max: usize, seed: u64, fractional: bool) -> Result<SweepReport> {
    let audits: Vec<Result<(JointDist, Audit)>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let d = sweep_dist(i, n_max, seed, fractional)?;
            let a = audit(&d)?;
            Ok((d, a))
        })
        .collect();
    let mut report = SweepReport { trials, ..Default::default() };
    for (trial, r) in audits.into_iter().enumerate() {
        let (d, a) = r?;
        for (m, c) in a.checks {
            *report.checks.entry(m).or_default() += c;
        }
        report
            .violations
            .extend(a.violations.into_iter().map(|violation| SweepViolation { trial, violation, dist: d.to_text() }));
    }
    Ok(report)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SandwichReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

/// `S_b / C(n,b) <= P[sum >= b] <= S_k / C(b,k)` for every `b` and `k < b`.
pub fn sandwich_check(dist: &JointDist) -> Result<SandwichReport> {
    if !dist.is_bernoulli() {
        return Err(domain("the sandwich property concerns Bernoulli variables"));
    }
    let n = dist.n();
    let s = symmetric_moments(dist)?;
    let profile = MomentProfile::SymmetricMoments(symmetric_moment_map(dist)?);
    let mut rep = SandwichReport::default();
    for (b, &s_b) in s.iter().enumerate().skip(1) {
        let exact = exact_tail(dist, b as f64);
        let lower = linial_lower_bound(n as u64, b as u64, s_b)?.prob();
        rep.checks += 1;
        if lower > exact + VIOLATION_SLACK {
            rep.failures.push(format!("lower bound {lower:e} > exact {exact:e} at beta_n={b}"));
        }
        if b == n {
            continue;
        }
        for k in 1..b {
            let Some(upper) = linial_luria_bound(n as u64, b as u64, k as u64, &profile).bound() else {
                continue;
            };
            rep.checks += 1;
            if exact > upper + VIOLATION_SLACK {
                rep.failures.push(format!("exact {exact:e} > upper bound {upper:e} at beta_n={b}, k={k}"));
            }
        }
    }
    Ok(rep)
}

/// [`sandwich_check`] over the Bernoulli sweep mix.
pub fn sandwich_sweep(trials: usize, n_max: usize, seed: u64) -> Result<SandwichReport> {
    let parts: Vec<Result<SandwichReport>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let d = sweep_dist(i, n_max, seed, false)?;
            let mut r = sandwich_check(&d)?;
            r.failures.iter_mut().for_each(|f| *f = format!("trial {i}: {f}"));
            Ok(r)
        })
        .collect();
    let mut rep = SandwichReport::default();
    for p in parts {
        let p = p?;
        rep.checks += p.checks;
        rep.failures.extend(p.failures);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_layout() {
        assert_eq!(thresholds(3.0, 10.0), vec![4.0, 5.0, 7.0, 8.0, 9.0]);
        let t = thresholds(0.5, 2.0);
        assert_eq!(t.len(), 5);
        assert!(t.iter().all(|v| *v > 0.5 && *v < 2.0));
        assert!(t.contains(&1.0));
        assert!(thresholds(2.0, 2.0).is_empty());
    }

    #[test]
    fn hypotheses_of_constructions() {
        let h = Hypotheses::derive(&generate::product_bernoulli(&[0.3; 5]).unwrap()).unwrap();
        assert!(h.independent && h.martingale);
        assert_eq!(h.kwise, 5);
        assert!((h.gamma_star - 0.3).abs() < 1e-12);
        assert_eq!(h.dependency_alpha, None);

        let h = Hypotheses::derive(&generate::block_parity(6, 3).unwrap()).unwrap();
        assert!(!h.independent);
        assert_eq!(h.kwise, 2);
        assert_eq!(h.dependency_alpha, Some(4));

        let h = Hypotheses::derive(&generate::clique_mixture(&[3], 1.0).unwrap()).unwrap();
        assert_eq!(h.kwise, 1);
        assert_eq!(h.dependency_alpha, Some(1));

        let h = Hypotheses::derive(&generate::martingale(&[0.3, 0.6, 0.5]).unwrap()).unwrap();
        assert!(h.martingale && !h.independent && !h.bernoulli);
    }

    #[test]
    fn split_delta_for_products() {
        let h = Hypotheses::derive(&generate::product_bernoulli(&[0.3; 4]).unwrap()).unwrap();
        assert!((h.split_delta(0.3).unwrap() - 0.7).abs() < 1e-12);
        assert!((h.split_delta(0.5).unwrap() - 0.7).abs() < 1e-12);
        assert!(h.split_delta(0.1).is_none());
    }

    #[test]
    fn coupling_fails_under_full_dependence() {
        // all ten variables equal one Bernoulli(0.3)
        let mut probs = vec![0.0; 1 << 10];
        probs[0] = 0.7;
        probs[(1 << 10) - 1] = 0.3;
        let d = JointDist::from_mask_probs(10, &probs).unwrap();
        assert!(coupling_bound(10, 0.3, 8.0).bound().unwrap() < exact_tail(&d, 8.0));
        // the audit does not apply it, so nothing is flagged
        let a = audit(&d).unwrap();
        assert!(a.violations.is_empty(), "{:?}", a.violations);
        assert!(!a.checks.contains_key(&Method::Coupling));
    }

    #[test]
    fn small_sweep_is_clean() {
        let r = soundness_sweep(24, 6, 11, false).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.total_checks() > 24);
        let r = soundness_sweep(12, 6, 11, true).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        let s = sandwich_sweep(16, 7, 2).unwrap();
        assert!(s.failures.is_empty(), "{:?}", s.failures);
    }
}
