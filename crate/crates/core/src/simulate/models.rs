//! Samplers for the dependence models.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::graphcomb::Graph;
use crate::numkernel::{binom_tail_log, log_binom_coeff, BinomialSpec};
use crate::streams::stream_rng;

pub(crate) fn pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Vertices of the pair with lexicographic index `idx`.
fn pair_at(n: usize, mut idx: usize) -> (usize, usize) {
    let mut u = 0;
    while idx >= n - 1 - u {
        idx -= n - 1 - u;
        u += 1;
    }
    (u, u + 1 + idx)
}

pub(crate) fn gnp_with(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                g.add_edge(u, v).expect("fresh pair");
            }
        }
    }
    g
}

pub(crate) fn gnm_with(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut g = Graph::empty(n);
    for idx in sample_indices(rng, pairs(n), m) {
        let (u, v) = pair_at(n, idx);
        g.add_edge(u, v).expect("distinct pairs");
    }
    g
}

/// Erdős–Rényi graph with independent edges of probability `p`.
pub fn sample_gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("edge probability {p} outside [0,1]")));
    }
    Ok(gnp_with(n, p, &mut stream_rng(seed, 0)))
}

/// Uniform graph among those with `n` vertices and `m` edges.
pub fn sample_gnm(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m > pairs(n) {
        return Err(domain(format!("m = {m} exceeds C({n},2) = {}", pairs(n))));
    }
    Ok(gnm_with(n, m, &mut stream_rng(seed, 0)))
}

pub(crate) fn orientation_parity_with(g: &Graph, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut parity = vec![0u8; g.n()];
    for (u, v) in g.edges() {
        let head = if rng.random::<bool>() { v } else { u };
        parity[head] ^= 1;
    }
    parity
}

/// Each edge is oriented by a fair coin; entry `v` is the in-degree of `v`
/// modulo 2.
pub fn sample_orientation_parity(g: &Graph, seed: u64) -> Vec<u8> {
    orientation_parity_with(g, &mut stream_rng(seed, 0))
}

/// Degree parities of `G(n, 1/2)`.
pub(crate) fn degree_parity_with(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let g = gnp_with(n, 0.5, rng);
    (0..n).map(|v| (g.degree(v) % 2) as u8).collect()
}

/// Built-in martingale difference constructions with `-p_i <= Y_i <= 1 - p_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdsKernel {
    /// `Y_i = B_i - p_i`, independent `B_i ~ Bernoulli(p_i)`.
    IndependentCentered,
    /// `Y_i = s_i (B_i - p_i)` with `B_i ~ Bernoulli(p_i)` independent of the
    /// past and the urn fraction `s_i = (1 + #{j < i : B_j = 1}) / (i + 1)`.
    /// `s_i` is in `(0, 1]` and depends on the past, so `E[Y_i | past] = 0`
    /// holds exactly while the increments stay dependent.
    PolyaStyle,
}

impl MdsKernel {
    pub fn name(self) -> &'static str {
        match self {
            MdsKernel::IndependentCentered => "independent-centered",
            MdsKernel::PolyaStyle => "polya-style",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "independent-centered" => Ok(MdsKernel::IndependentCentered),
            "polya-style" => Ok(MdsKernel::PolyaStyle),
            _ => Err(domain(format!("unknown martingale kernel {s:?}"))),
        }
    }
}

pub(crate) fn check_ps(ps: &[f64]) -> Result<()> {
    if ps.is_empty() {
        return Err(domain("need at least one p_i"));
    }
    if let Some(p) = ps.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(domain(format!("p_i = {p} outside (0,1)")));
    }
    Ok(())
}

pub(crate) fn martingale_with(ps: &[f64], kernel: MdsKernel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut ups = 0usize;
    ps.iter()
        .enumerate()
        .map(|(i, &p)| {
            let b = rng.random::<f64>() < p;
            let centered = if b { 1.0 - p } else { -p };
            let s = match kernel {
                MdsKernel::IndependentCentered => 1.0,
                MdsKernel::PolyaStyle => (1 + ups) as f64 / (i + 1) as f64,
            };
            ups += b as usize;
            s * centered
        })
        .collect()
}

pub fn sample_martingale_diff(ps: &[f64], kernel: MdsKernel, seed: u64) -> Result<Vec<f64>> {
    check_ps(ps)?;
    Ok(martingale_with(ps, kernel, &mut stream_rng(seed, 0)))
}

/// Law of the i.i.d. inputs of a U-statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseDist {
    Uniform,
    Bernoulli(f64),
}

impl BaseDist {
    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            BaseDist::Uniform => rng.random(),
            BaseDist::Bernoulli(q) => (rng.random::<f64>() < q) as u8 as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UStatKernel {
    One,
    Zero,
    /// `1` when the `d` inputs sum to at least `c`.
    ThresholdSum(f64),
    /// Inputs are the `C(m,2)` edge indicators of a graph on `m` vertices;
    /// the kernel is `1` when three edges form a triangle.
    TriangleIndicator,
}

impl UStatKernel {
    pub fn name(self) -> &'static str {
        match self {
            UStatKernel::One => "one",
            UStatKernel::Zero => "zero",
            UStatKernel::ThresholdSum(_) => "threshold-sum",
            UStatKernel::TriangleIndicator => "triangle-indicator",
        }
    }
}

/// Shape and kernel of a U-statistic `X = sum_{i_1 < ... < i_d} F(xi_i1, ..., xi_id)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UStatModel {
    pub n: usize,
    pub d: usize,
    pub kernel: UStatKernel,
    pub base: BaseDist,
}

/// `m` with `C(m,2) = n`, if any.
pub(crate) fn vertices_for_pairs(n: usize) -> Option<usize> {
    (2..=n + 1).find(|&m| pairs(m) >= n).filter(|&m| pairs(m) == n)
}

impl UStatModel {
    pub fn new(n: usize, d: usize, kernel: UStatKernel, base: BaseDist) -> Result<Self> {
        if d == 0 || n == 0 || !n.is_multiple_of(d) {
            return Err(domain(format!("need d | n with n, d >= 1, got n={n}, d={d}")));
        }
        if let BaseDist::Bernoulli(q) = base {
            if !(0.0..=1.0).contains(&q) {
                return Err(domain(format!("base probability {q} outside [0,1]")));
            }
        }
        if kernel == UStatKernel::TriangleIndicator {
            if d != 3 || vertices_for_pairs(n).is_none() || !matches!(base, BaseDist::Bernoulli(_)) {
                return Err(domain("triangle-indicator needs d = 3, n = C(m,2) and Bernoulli inputs"));
            }
        } else if log_binom_coeff(n as u64, d as u64)? > 25.0 {
            return Err(domain(format!("C({n},{d}) kernel terms is too many to enumerate")));
        }
        Ok(UStatModel { n, d, kernel, base })
    }

    /// Number of graph vertices for the triangle kernel.
    pub fn graph_vertices(&self) -> Option<usize> {
        (self.kernel == UStatKernel::TriangleIndicator).then(|| vertices_for_pairs(self.n)).flatten()
    }

    /// Kernel mean `p = E[F]`.
    pub fn kernel_mean(&self) -> f64 {
        let d = self.d;
        match (self.kernel, self.base) {
            (UStatKernel::One, _) => 1.0,
            (UStatKernel::Zero, _) => 0.0,
            (UStatKernel::ThresholdSum(c), BaseDist::Uniform) => 1.0 - irwin_hall_cdf(d, c),
            (UStatKernel::ThresholdSum(c), BaseDist::Bernoulli(q)) => {
                let j = c.max(0.0).ceil() as u64;
                if j == 0 {
                    1.0
                } else if j > d as u64 || q == 0.0 {
                    0.0
                } else if q == 1.0 {
                    1.0
                } else {
                    binom_tail_log(&BinomialSpec::new(d as u64, q).expect("q in (0,1)"), j).expect("j <= d").prob()
                }
            }
            (UStatKernel::TriangleIndicator, BaseDist::Bernoulli(q)) => {
                let m = self.graph_vertices().expect("validated") as u64;
                let ratio = (log_binom_coeff(m, 3).unwrap_or(f64::NEG_INFINITY)
                    - log_binom_coeff(self.n as u64, 3).unwrap_or(0.0))
                .exp();
                ratio * q.powi(3)
            }
            (UStatKernel::TriangleIndicator, BaseDist::Uniform) => unreachable!("validated"),
        }
    }

    /// `C(n,d)`.
    pub fn terms(&self) -> f64 {
        log_binom_coeff(self.n as u64, self.d as u64).map(f64::exp).unwrap_or(0.0).round()
    }

    pub(crate) fn sample_with(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.kernel {
            UStatKernel::One => self.terms(),
            UStatKernel::Zero => 0.0,
            UStatKernel::TriangleIndicator => {
                let BaseDist::Bernoulli(q) = self.base else { unreachable!("validated") };
                let m = self.graph_vertices().expect("validated");
                gnp_with(m, q, rng).count_triangles() as f64
            }
            UStatKernel::ThresholdSum(c) => {
                let xi: Vec<f64> = (0..self.n).map(|_| self.base.draw(rng)).collect();
                let mut count = 0u64;
                let mut idx: Vec<usize> = (0..self.d).collect();
                loop {
                    let s: f64 = idx.iter().map(|&i| xi[i]).sum();
                    count += (s >= c) as u64;
                    // next d-subset in lexicographic order
                    let Some(pos) = (0..self.d).rev().find(|&j| idx[j] < self.n - self.d + j) else { break };
                    idx[pos] += 1;
                    for j in pos + 1..self.d {
                        idx[j] = idx[j - 1] + 1;
                    }
                }
                count as f64
            }
        }
    }
}

pub fn sample_ustat(model: &UStatModel, seed: u64) -> f64 {
    model.sample_with(&mut stream_rng(seed, 0))
}

/// CDF of the sum of `d` independent uniforms.
fn irwin_hall_cdf(d: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= d as f64 {
        return 1.0;
    }
    let mut acc = 0.0;
    let mut c = 1.0;
    for k in 0..=x.floor() as usize {
        if k > 0 {
            c *= (d - k + 1) as f64 / k as f64;
        }
        let term = c * (x - k as f64).powi(d as i32);
        acc += if k % 2 == 0 { term } else { -term };
    }
    let fact: f64 = (1..=d).map(|i| i as f64).product();
    (acc / fact).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indexing() {
        let mut idx = 0;
        for u in 0..6 {
            for v in u + 1..6 {
                assert_eq!(pair_at(6, idx), (u, v));
                idx += 1;
            }
        }
        assert_eq!(vertices_for_pairs(15), Some(6));
        assert_eq!(vertices_for_pairs(14), None);
    }

    #[test]
    fn extreme_edge_probabilities() {
        assert_eq!(sample_gnp(7, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(sample_gnp(7, 1.0, 1).unwrap().edge_count(), 21);
        assert_eq!(sample_gnm(5, 4, 1).unwrap().edge_count(), 4);
        assert!(sample_gnm(5, 11, 1).is_err());
    }

    #[test]
    fn irwin_hall_values() {
        assert!((irwin_hall_cdf(1, 0.3) - 0.3).abs() < 1e-15);
        assert!((irwin_hall_cdf(2, 1.0) - 0.5).abs() < 1e-15);
        assert!((irwin_hall_cdf(3, 1.5) - 0.5).abs() < 1e-15);
        assert!((irwin_hall_cdf(2, 0.5) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn martingale_ranges() {
        let ps = [0.1, 0.5, 0.9, 0.3];
        for kernel in [MdsKernel::IndependentCentered, MdsKernel::PolyaStyle] {
            for seed in 0..200 {
                let y = sample_martingale_diff(&ps, kernel, seed).unwrap();
                for (v, p) in y.iter().zip(ps) {
                    assert!(*v >= -p && *v <= 1.0 - p);
                }
            }
        }
    }

    #[test]
    fn constant_kernels() {
        let one = UStatModel::new(9, 3, UStatKernel::One, BaseDist::Uniform).unwrap();
        assert_eq!(sample_ustat(&one, 4), 84.0);
        let zero = UStatModel::new(9, 3, UStatKernel::Zero, BaseDist::Uniform).unwrap();
        assert_eq!(sample_ustat(&zero, 4), 0.0);
        assert!(UStatModel::new(10, 3, UStatKernel::One, BaseDist::Uniform).is_err());
    }
}
