//! Monte Carlo generators for the dependence models and an empirical tail
//! estimator with exact binomial confidence intervals.

mod models;

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use models::{
    sample_gnm, sample_gnp, sample_martingale_diff, sample_orientation_parity, sample_ustat, BaseDist, MdsKernel,
    UStatKernel, UStatModel,
};

use crate::bounds::{
    kwise_bound, mcdiarmid_bound, mcdiarmid_refined_bound, ustat_bound, ustat_refined_bound, TailBound, UStatParams,
};
use crate::error::{domain, Error, Result};
use crate::graphcomb::{gnm_isolated_bound, gnm_triangles_bound, gnp_bound, Graph, GnpKind};
use crate::numkernel::{binom_lower_tail_log, binom_tail_log, BinomialSpec};
use crate::streams::stream_rng;

/// Confidence level of [`SimResult`] intervals.
pub const CI_LEVEL: f64 = 0.999;

/// A replication counts as a hit when its statistic is at least `t - HIT_SLACK`.
pub const HIT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum SimModel {
    GnpIsolated { n: usize, p: f64 },
    GnpTriangles { n: usize, p: f64 },
    Gnp4Cliques { n: usize, p: f64 },
    GnmIsolated { n: usize, m: usize },
    GnmTriangles { n: usize, m: usize },
    /// Sum of in-degree parities under a uniformly random orientation.
    OrientationParity(Graph),
    /// Sum of degree parities of `G(n, 1/2)`.
    DegreeParity { n: usize },
    /// `sum_i Y_i` of a martingale difference sequence.
    MartingaleDiff { ps: Vec<f64>, kernel: MdsKernel },
    UStat(UStatModel),
}

impl SimModel {
    pub fn name(&self) -> &'static str {
        match self {
            SimModel::GnpIsolated { .. } => "gnp-isolated",
            SimModel::GnpTriangles { .. } => "gnp-triangles",
            SimModel::Gnp4Cliques { .. } => "gnp-4cliques",
            SimModel::GnmIsolated { .. } => "gnm-isolated",
            SimModel::GnmTriangles { .. } => "gnm-triangles",
            SimModel::OrientationParity(_) => "orientation-parity",
            SimModel::DegreeParity { .. } => "degree-parity",
            SimModel::MartingaleDiff { .. } => "martingale",
            SimModel::UStat(_) => "ustat",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |p: f64| {
            if p > 0.0 && p < 1.0 {
                Ok(())
            } else {
                Err(domain(format!("p must lie in (0,1), got {p}")))
            }
        };
        let nonempty = |n: usize| if n == 0 { Err(domain("n must be >= 1")) } else { Ok(()) };
        match self {
            SimModel::GnpIsolated { n, p } | SimModel::GnpTriangles { n, p } | SimModel::Gnp4Cliques { n, p } => {
                nonempty(*n)?;
                unit(*p)
            }
            SimModel::GnmIsolated { n, m } | SimModel::GnmTriangles { n, m } => {
                nonempty(*n)?;
                if *m > models::pairs(*n) {
                    return Err(domain(format!("m = {m} exceeds C({n},2)")));
                }
                Ok(())
            }
            SimModel::OrientationParity(_) => Ok(()),
            SimModel::DegreeParity { n } => nonempty(*n),
            SimModel::MartingaleDiff { ps, .. } => models::check_ps(ps),
            SimModel::UStat(u) => UStatModel::new(u.n, u.d, u.kernel, u.base).map(|_| ()),
        }
    }

    /// One realization of the model's statistic.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            SimModel::GnpIsolated { n, p } => models::gnp_with(*n, *p, rng).count_isolated() as f64,
            SimModel::GnpTriangles { n, p } => models::gnp_with(*n, *p, rng).count_triangles() as f64,
            SimModel::Gnp4Cliques { n, p } => models::gnp_with(*n, *p, rng).count_4cliques() as f64,
            SimModel::GnmIsolated { n, m } => models::gnm_with(*n, *m, rng).count_isolated() as f64,
            SimModel::GnmTriangles { n, m } => models::gnm_with(*n, *m, rng).count_triangles() as f64,
            SimModel::OrientationParity(g) => {
                models::orientation_parity_with(g, rng).iter().map(|&b| b as f64).sum()
            }
            SimModel::DegreeParity { n } => models::degree_parity_with(*n, rng).iter().map(|&b| b as f64).sum(),
            SimModel::MartingaleDiff { ps, kernel } => models::martingale_with(ps, *kernel, rng).iter().sum(),
            SimModel::UStat(u) => u.sample_with(rng),
        }
    }

    /// The bound that applies to this model at statistic threshold `t`, if
    /// there is one.
    pub fn matching_bound(&self, t: f64) -> Option<TailBound> {
        // counts are integers, so P[X >= t] = P[X >= ceil(t)]
        let count_t = |t: f64| t.max(0.0).ceil() as u64;
        Some(match self {
            SimModel::GnpIsolated { n, p } => gnp_bound(GnpKind::Isolated, *n as u64, *p, t),
            SimModel::GnpTriangles { n, p } => gnp_bound(GnpKind::Triangles, *n as u64, *p, t),
            SimModel::Gnp4Cliques { n, p } => gnp_bound(GnpKind::Cliques4, *n as u64, *p, t),
            SimModel::GnmIsolated { n, m } => gnm_isolated_bound(*n as u64, *m as u64, count_t(t)),
            SimModel::GnmTriangles { n, m } => gnm_triangles_bound(*n as u64, *m as u64, count_t(t)),
            SimModel::OrientationParity(g) => {
                // (n-1)-wise independent fair bits only on the complete graph
                let n = g.n();
                if n < 2 || g.edge_count() != models::pairs(n) {
                    return None;
                }
                parity_bound(n, t)
            }
            SimModel::DegreeParity { n } => {
                if *n < 2 {
                    return None;
                }
                parity_bound(*n, t)
            }
            SimModel::MartingaleDiff { ps, .. } => {
                let n = ps.len() as u64;
                let p = ps.iter().sum::<f64>() / n as f64;
                let per = t / n as f64;
                let refined = mcdiarmid_refined_bound(n, p, per);
                if refined.is_valid() {
                    refined
                } else {
                    mcdiarmid_bound(n, p, per)
                }
            }
            SimModel::UStat(u) => {
                let params = UStatParams::new(u.n as u64, u.d as u64, u.kernel_mean()).ok()?;
                let rel = (t - params.mean()) / params.n_choose_d();
                let refined = ustat_refined_bound(&params, rel);
                if refined.is_valid() {
                    refined
                } else {
                    ustat_bound(&params, rel)
                }
            }
        })
    }
}

fn parity_bound(n: usize, t: f64) -> TailBound {
    kwise_bound(n as u64, n as u64 - 1, 0.5, t / (n as f64 / 2.0) - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub replications: u64,
    pub t: f64,
    pub hits: u64,
    pub empirical_tail: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub sum_mean: f64,
}

impl fmt::Display for SimResult {
    /// `key=value` lines; floats use 17 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "replications={}", self.replications)?;
        writeln!(f, "t={:.16e}", self.t)?;
        writeln!(f, "hits={}", self.hits)?;
        writeln!(f, "empirical_tail={:.16e}", self.empirical_tail)?;
        writeln!(f, "ci_low={:.16e}", self.ci_low)?;
        writeln!(f, "ci_high={:.16e}", self.ci_high)?;
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "sum_mean={:.16e}", self.sum_mean)
    }
}

impl FromStr for SimResult {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut fields = std::collections::HashMap::new();
        for (i, line) in s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: "expected key=value".into() })?;
            fields.insert(k.trim(), (i + 1, v.trim()));
        }
        fn get<T: FromStr>(fields: &std::collections::HashMap<&str, (usize, &str)>, key: &str) -> Result<T> {
            let (line, v) = fields.get(key).ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {key}") })?;
            v.parse().map_err(|_| Error::Parse { line: *line, msg: format!("bad value for {key}") })
        }
        Ok(SimResult {
            replications: get(&fields, "replications")?,
            t: get(&fields, "t")?,
            hits: get(&fields, "hits")?,
            empirical_tail: get(&fields, "empirical_tail")?,
            ci_low: get(&fields, "ci_low")?,
            ci_high: get(&fields, "ci_high")?,
            seed: get(&fields, "seed")?,
            sum_mean: get(&fields, "sum_mean")?,
        })
    }
}

/// Two-sided exact binomial (Clopper-Pearson) interval for `hits` successes
/// in `reps` trials.
pub fn clopper_pearson(hits: u64, reps: u64, level: f64) -> Result<(f64, f64)> {
    if reps == 0 || hits > reps {
        return Err(domain(format!("need 0 <= hits <= reps and reps >= 1, got {hits}/{reps}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(domain(format!("level must lie in (0,1), got {level}")));
    }
    let ln_a = ((1.0 - level) / 2.0).ln();
    let low = if hits == 0 {
        0.0
    } else {
        // P[B >= hits] increases with p
        bisect(|p| binom_tail_log(&BinomialSpec::new(reps, p).expect("p in (0,1)"), hits).expect("hits <= reps").ln() < ln_a)
    };
    let high = if hits == reps {
        1.0
    } else {
        // P[B <= hits] decreases with p
        bisect(|p| binom_lower_tail_log(&BinomialSpec::new(reps, p).expect("p in (0,1)"), hits).expect("hits <= reps").ln() > ln_a)
    };
    Ok((low, high))
}

/// Boundary of `{p : below(p)}` on `(0, 1)`, assumed to be an initial segment.
fn bisect(below: impl Fn(f64) -> bool) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fraction of `reps` replications whose statistic reaches `t`. Replication
/// `i` draws from stream `(seed, i)`, so the result does not depend on the
/// number of threads.
pub fn empirical_tail(model: &SimModel, t: f64, reps: u64, seed: u64) -> Result<SimResult> {
    if reps == 0 {
        return Err(domain("reps must be >= 1"));
    }
    model.validate()?;
    let stats: Vec<f64> = (0..reps).into_par_iter().map(|i| model.sample(&mut stream_rng(seed, i))).collect();
    let hits = stats.iter().filter(|&&x| x >= t - HIT_SLACK).count() as u64;
    let sum_mean = stats.iter().sum::<f64>() / reps as f64;
    let (ci_low, ci_high) = clopper_pearson(hits, reps, CI_LEVEL)?;
    Ok(SimResult {
        replications: reps,
        t,
        hits,
        empirical_tail: hits as f64 / reps as f64,
        ci_low,
        ci_high,
        seed,
        sum_mean,
    })
}
