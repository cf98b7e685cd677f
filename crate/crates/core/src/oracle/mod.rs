//! Exact machinery for small explicit joint distributions of `[0,1]`-valued
//! variables: the `zeta_A` decomposition, the Z-distribution, symmetric
//! moments, convex-function bounds and ordering checks.

pub mod audit;
mod convex;
pub mod generate;
mod ordering;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{domain, Error, Result};
use crate::numkernel::size_error;

pub use convex::{dephoeff_bound, ConvexFamily, DEFAULT_GRID};
pub use ordering::{convex_order_check, poisson_trials_check};

/// Largest `n` for which `2^n` subset enumeration is performed.
pub const ENUM_MAX_N: usize = 20;

/// Slack when deciding whether an atom reaches the threshold; coordinate
/// sums of decimal inputs carry rounding error, and counting a borderline
/// atom only enlarges the reference tail.
pub const TAIL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub x: Vec<f64>,
    pub w: f64,
}

/// A finitely supported joint distribution of `n` variables in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    n: usize,
    atoms: Vec<Atom>,
    bernoulli: bool,
}

impl JointDist {
    pub fn new(n: usize, atoms: Vec<Atom>) -> Result<Self> {
        if n == 0 {
            return Err(domain("joint distribution needs n >= 1"));
        }
        if atoms.is_empty() {
            return Err(domain("joint distribution needs at least one atom"));
        }
        let mut total = 0.0;
        for (i, a) in atoms.iter().enumerate() {
            if a.x.len() != n {
                return Err(domain(format!("atom {i} has {} coordinates, expected {n}", a.x.len())));
            }
            if let Some(v) = a.x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(domain(format!("atom {i} has coordinate {v} outside [0,1]")));
            }
            if !(a.w >= 0.0) || !a.w.is_finite() {
                return Err(domain(format!("atom {i} has weight {}", a.w)));
            }
            total += a.w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain(format!("weights sum to {total}, not 1")));
        }
        let bernoulli = atoms.iter().all(|a| a.x.iter().all(|&v| v == 0.0 || v == 1.0));
        Ok(JointDist { n, atoms, bernoulli })
    }

    /// Bernoulli distribution from probabilities of the outcomes `mask`
    /// (bit `i` set means `X_i = 1`). Zero-probability outcomes are dropped.
    pub fn from_mask_probs(n: usize, probs: &[f64]) -> Result<Self> {
        if n > ENUM_MAX_N {
            return Err(size_error(n, ENUM_MAX_N));
        }
        if probs.len() != 1 << n {
            return Err(domain(format!("expected {} outcome probabilities, got {}", 1usize << n, probs.len())));
        }
        let atoms = probs
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(mask, &w)| Atom { x: mask_to_x(n, mask as u64), w })
            .collect();
        JointDist::new(n, atoms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_bernoulli(&self) -> bool {
        self.bernoulli
    }

    pub fn means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n];
        for a in &self.atoms {
            for (mi, xi) in m.iter_mut().zip(&a.x) {
                *mi += a.w * xi;
            }
        }
        m
    }

    pub fn mean_sum(&self) -> f64 {
        self.atoms.iter().map(|a| a.w * a.x.iter().sum::<f64>()).sum()
    }

    /// `P[X = mask]` for every outcome of a Bernoulli distribution.
    pub fn mask_probs(&self) -> Result<Vec<f64>> {
        if !self.bernoulli {
            return Err(domain("outcome probabilities need a Bernoulli distribution"));
        }
        self.check_enum()?;
        let mut probs = vec![0.0; 1 << self.n];
        for a in &self.atoms {
            probs[x_to_mask(&a.x) as usize] += a.w;
        }
        Ok(probs)
    }

    /// `E[prod_{i in A} X_i]` for every `A`, indexed by bitmask.
    pub fn product_moments(&self) -> Result<Vec<f64>> {
        self.check_enum()?;
        let size = 1usize << self.n;
        let mut out = vec![0.0; size];
        let mut prod = vec![0.0; size];
        for a in &self.atoms {
            prod[0] = 1.0;
            for mask in 1..size {
                let low = mask.trailing_zeros() as usize;
                prod[mask] = prod[mask & (mask - 1)] * a.x[low];
            }
            for (o, p) in out.iter_mut().zip(&prod) {
                *o += a.w * p;
            }
        }
        Ok(out)
    }

    /// `E[Z_A]` for every `A`, indexed by bitmask.
    pub fn z_moments(&self) -> Result<Vec<f64>> {
        self.check_enum()?;
        let mut out = vec![0.0; 1 << self.n];
        for a in &self.atoms {
            for (o, z) in out.iter_mut().zip(zeta_decomposition(&a.x)?) {
                *o += a.w * z;
            }
        }
        Ok(out)
    }

    fn check_enum(&self) -> Result<()> {
        if self.n > ENUM_MAX_N {
            return Err(size_error(self.n, ENUM_MAX_N));
        }
        Ok(())
    }

    /// One atom per line: `w x_1 ... x_n`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for a in &self.atoms {
            let _ = write!(s, "{}", a.w);
            for v in &a.x {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        s
    }

    /// Parses [`JointDist::to_text`] output; blank lines and `#` comments are
    /// skipped, and weights within 1e-9 of summing to one are renormalized.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut n = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let vals: Vec<f64> = l
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            if vals.len() < 2 {
                return Err(Error::Parse { line, msg: "expected `w x_1 ... x_n`".into() });
            }
            let dim = vals.len() - 1;
            if *n.get_or_insert(dim) != dim {
                return Err(Error::Parse { line, msg: format!("atom has {dim} coordinates, expected {}", n.unwrap()) });
            }
            atoms.push(Atom { w: vals[0], x: vals[1..].to_vec() });
        }
        let n = n.ok_or(Error::Parse { line: 1, msg: "no atoms".into() })?;
        let total: f64 = atoms.iter().map(|a| a.w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(domain(format!("weights sum to {total}; more than 1e-9 away from 1")));
        }
        for a in &mut atoms {
            a.w /= total;
        }
        JointDist::new(n, atoms)
    }
}

pub(crate) fn mask_to_x(n: usize, mask: u64) -> Vec<f64> {
    (0..n).map(|i| (mask >> i & 1) as f64).collect()
}

fn x_to_mask(x: &[f64]) -> u64 {
    x.iter().enumerate().fold(0, |m, (i, &v)| if v == 1.0 { m | 1 << i } else { m })
}

/// Distribution of `Z` on `{0, ..., n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZDist {
    probs: Vec<f64>,
}

impl ZDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(domain("Z-distribution needs n >= 1"));
        }
        if probs.iter().any(|p| !(*p >= -1e-15)) {
            return Err(domain("Z-distribution has a negative entry"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(domain(format!("Z-distribution sums to {total}")));
        }
        Ok(ZDist { probs: probs.into_iter().map(|p| p.max(0.0)).collect() })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(j, p)| j as f64 * p).sum()
    }
}

/// `zeta_A = prod_{i in A} x_i prod_{i not in A} (1 - x_i)` for every `A`,
/// indexed by bitmask (bit `i` is element `i`).
pub fn zeta_decomposition(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n > ENUM_MAX_N {
        return Err(size_error(n, ENUM_MAX_N));
    }
    if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(domain(format!("coordinate {v} outside [0,1]")));
    }
    let mut z = vec![0.0; 1 << n];
    z[0] = 1.0;
    for (i, &xi) in x.iter().enumerate() {
        let half = 1usize << i;
        for mask in 0..half {
            let base = z[mask];
            z[mask] = base * (1.0 - xi);
            z[mask | half] = base * xi;
        }
    }
    Ok(z)
}

/// `P[Z = j] = sum_{|A| = j} E[Z_A]`, via the Poisson-binomial recurrence per atom.
pub fn z_distribution(dist: &JointDist) -> Result<ZDist> {
    let n = dist.n;
    if n > ENUM_MAX_N {
        return Err(size_error(n, ENUM_MAX_N));
    }
    let mut probs = vec![0.0; n + 1];
    let mut row = vec![0.0; n + 1];
    for a in &dist.atoms {
        row.iter_mut().for_each(|v| *v = 0.0);
        row[0] = 1.0;
        for (i, &xi) in a.x.iter().enumerate() {
            for j in (1..=i + 1).rev() {
                row[j] = row[j] * (1.0 - xi) + row[j - 1] * xi;
            }
            row[0] *= 1.0 - xi;
        }
        for (p, r) in probs.iter_mut().zip(&row) {
            *p += a.w * r;
        }
    }
    ZDist::new(probs)
}

/// `P[sum X_i >= t]`, counting atoms whose sum is within [`TAIL_SLACK`] of `t`.
pub fn exact_tail(dist: &JointDist, t: f64) -> f64 {
    let hit: f64 = dist
        .atoms
        .iter()
        .filter(|a| a.x.iter().sum::<f64>() >= t - TAIL_SLACK)
        .map(|a| a.w)
        .sum();
    hit.min(1.0)
}

/// `E[S_k] = sum_{|A| = k} E[prod_{i in A} X_i]` via the elementary
/// symmetric recurrence on each atom.
pub fn symmetric_moment(dist: &JointDist, k: usize) -> Result<f64> {
    if k > dist.n {
        return Err(domain(format!("k = {k} exceeds n = {}", dist.n)));
    }
    Ok(symmetric_moments(dist)?[k])
}

/// `E[S_0], ..., E[S_n]`.
pub fn symmetric_moments(dist: &JointDist) -> Result<Vec<f64>> {
    let n = dist.n;
    if n > ENUM_MAX_N {
        return Err(size_error(n, ENUM_MAX_N));
    }
    let mut out = vec![0.0; n + 1];
    let mut e = vec![0.0; n + 1];
    for a in &dist.atoms {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[0] = 1.0;
        for (i, &xi) in a.x.iter().enumerate() {
            for j in (1..=i + 1).rev() {
                e[j] += xi * e[j - 1];
            }
        }
        for (o, v) in out.iter_mut().zip(&e) {
            *o += a.w * v;
        }
    }
    Ok(out)
}

/// Symmetric moments as a `k -> S_k` map, `1 <= k <= n`.
pub fn symmetric_moment_map(dist: &JointDist) -> Result<BTreeMap<u64, f64>> {
    Ok(symmetric_moments(dist)?.into_iter().enumerate().skip(1).map(|(k, v)| (k as u64, v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern(n: usize, probs: &[f64]) -> JointDist {
        JointDist::from_mask_probs(n, probs).unwrap()
    }

    #[test]
    fn zeta_extremes() {
        let z = zeta_decomposition(&[1.0; 4]).unwrap();
        assert_eq!(z[15], 1.0);
        assert_eq!(z.iter().sum::<f64>(), 1.0);
        let h = zeta_decomposition(&[0.5; 5]).unwrap();
        assert!(h.iter().all(|&v| v == 1.0 / 32.0));
        assert!(zeta_decomposition(&[0.5; 21]).is_err());
        assert!(zeta_decomposition(&[1.5]).is_err());
    }

    #[test]
    fn joint_dist_validation() {
        assert!(JointDist::new(2, vec![Atom { x: vec![0.5, 0.5], w: 0.9 }]).is_err());
        assert!(JointDist::new(2, vec![Atom { x: vec![0.5], w: 1.0 }]).is_err());
        assert!(JointDist::new(1, vec![Atom { x: vec![-0.1], w: 1.0 }]).is_err());
        let d = JointDist::new(2, vec![Atom { x: vec![0.5, 1.0], w: 1.0 }]).unwrap();
        assert!(!d.is_bernoulli());
        assert!(bern(1, &[0.3, 0.7]).is_bernoulli());
    }

    #[test]
    fn text_round_trip_and_renormalize() {
        let d = bern(2, &[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(JointDist::from_text(&d.to_text()).unwrap(), d);
        let r = JointDist::from_text("# c\n0.5000000001 0 1\n0.5 1 0\n").unwrap();
        assert!((r.atoms()[0].w + r.atoms()[1].w - 1.0).abs() < 1e-15);
        assert!(JointDist::from_text("0.5 0 1\n0.4 1 0\n").is_err());
        assert!(matches!(JointDist::from_text("1 0 x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(JointDist::from_text("0.5 0\n0.5 1 1\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn tails_trivial_cases() {
        let d = bern(2, &[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(exact_tail(&d, 0.0), 1.0);
        assert_eq!(exact_tail(&d, -3.0), 1.0);
        assert_eq!(exact_tail(&d, 2.5), 0.0);
        assert!((exact_tail(&d, 2.0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn moments() {
        let d = bern(2, &[0.1, 0.2, 0.3, 0.4]);
        let s = symmetric_moments(&d).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15);
        assert!((s[1] - (0.6 + 0.7)).abs() < 1e-15);
        assert!((s[2] - 0.4).abs() < 1e-15);
        assert!((symmetric_moment(&d, 1).unwrap() - 1.3).abs() < 1e-15);
        assert!(symmetric_moment(&d, 3).is_err());
        let pm = d.product_moments().unwrap();
        assert!((pm[1] - 0.6).abs() < 1e-15 && (pm[3] - 0.4).abs() < 1e-15);
        assert_eq!(d.z_moments().unwrap(), d.mask_probs().unwrap());
    }
}
