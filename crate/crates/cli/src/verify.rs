//! `verify`: property suites over the exact oracle and the graph lemmas.

use clap::{Args, ValueEnum};
use rand::Rng;
use rayon::prelude::*;

use depbound::bounds::{
    depgraph_bound, hoeffding_bound, kwise_bound, linial_luria_bound, split_moment_bound, DependencyGraphParams,
    Method, MomentProfile,
};
use depbound::graphcomb::{clique4_union_triangles, triangle_union_edges, Graph};
use depbound::numkernel::{binom_pmf_log, binomial_median_lb_check, BinomialSpec, LogProb, PoissonBinomialSpec};
use depbound::oracle::audit::{sandwich_sweep, soundness_sweep, SweepViolation, AUDIT_MAX_N};
use depbound::oracle::{convex_order_check, dephoeff_bound, poisson_trials_check, ConvexFamily, ZDist, DEFAULT_GRID};
use depbound::streams::stream_rng;

use crate::output::{fmt_float, Record};
use crate::{usage, CliError, Report, EXIT_OK, EXIT_VIOLATION};

/// Log-scale tolerance of the identity suite.
const IDENTITY_TOL: f64 = 1e-10;

/// Failures quoted in a record's detail field.
const DUMP_LIMIT: usize = 5;

/// Largest vertex count for the exhaustive lemma check (2^21 graphs).
const EXHAUSTIVE_MAX_N: usize = 7;

/// Vertex range of the random lemma graphs.
const RANDOM_GRAPH_N: std::ops::RangeInclusive<usize> = 3..=30;

/// Largest vertex count for the exact binomial median check.
const MEDIAN_MAX_N: u64 = 200;

/// Stream offset separating the fractional sweep from the Bernoulli one.
const FRACTIONAL_STREAM: u64 = 0x5eed_f4ac;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Suite {
    /// Exact tails never exceed any applicable bound.
    Soundness,
    /// Bounds that collapse to one another at special parameters.
    Identities,
    /// Triangle and 4-clique union lemmas.
    Lemmas,
    /// Poisson-binomial versus binomial comparisons.
    ConvexOrder,
    /// Symmetric-moment lower and upper bounds around the exact tail.
    Sandwich,
}

#[derive(Args, Debug)]
pub(crate) struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Largest number of variables (vertices for lemmas).
    #[arg(long)]
    n_max: Option<usize>,
    /// Random instances.
    #[arg(long)]
    trials: Option<usize>,
}

fn property(suite: &str, name: &str, checks: usize, failures: &[String]) -> Record {
    let detail = failures.iter().take(DUMP_LIMIT).cloned().collect::<Vec<_>>().join(" || ");
    Record::new()
        .with("suite", suite)
        .with("property", name)
        .with("status", if failures.is_empty() { "pass" } else { "fail" })
        .with("checks", checks)
        .with("failures", failures.len())
        .with("detail", detail)
}

pub(crate) fn run(a: &VerifyArgs, seed: u64) -> Result<Report, CliError> {
    let records = match a.suite {
        Suite::Soundness => soundness(a, seed)?,
        Suite::Identities => {
            if a.n_max.is_some() || a.trials.is_some() {
                return Err(usage("the identities suite runs a fixed grid and takes no --n-max or --trials"));
            }
            identities()
        }
        Suite::Lemmas => lemmas(a, seed)?,
        Suite::ConvexOrder => convex_order(a, seed)?,
        Suite::Sandwich => sandwich(a, seed)?,
    };
    let failed = records.iter().any(|r| r.get("status") == Some(&"fail".into()));
    Ok(Report { records, code: if failed { EXIT_VIOLATION } else { EXIT_OK } })
}

fn n_max(a: &VerifyArgs, default: usize, lo: usize, hi: usize) -> Result<usize, CliError> {
    let n = a.n_max.unwrap_or(default);
    if n < lo || n > hi {
        return Err(usage(format!("--n-max must lie in [{lo}, {hi}] for this suite, got {n}")));
    }
    Ok(n)
}

fn trials(a: &VerifyArgs, default: usize) -> Result<usize, CliError> {
    match a.trials.unwrap_or(default) {
        0 => Err(usage("--trials must be at least 1")),
        t => Ok(t),
    }
}

fn dump(v: &SweepViolation) -> String {
    let params: Vec<String> = v.violation.params.iter().map(|(k, x)| format!("{k}={}", fmt_float(*x))).collect();
    format!(
        "trial={} method={} t={} exact={} bound={} params=[{}] dist=[{}]",
        v.trial,
        v.violation.method,
        fmt_float(v.violation.t),
        fmt_float(v.violation.exact),
        fmt_float(v.violation.bound),
        params.join(","),
        v.dist.trim().replace('\n', " / ")
    )
}

fn soundness(a: &VerifyArgs, seed: u64) -> Result<Vec<Record>, CliError> {
    let n_max = n_max(a, 10, 2, AUDIT_MAX_N)?;
    let trials = trials(a, 1000)?;
    let rep = soundness_sweep(trials, n_max, seed, false)?;
    let mut out = Vec::new();
    for m in Method::ALL {
        let checks = rep.checks.get(&m).copied().unwrap_or(0);
        let failures: Vec<String> = rep.violations.iter().filter(|v| v.violation.method == m).map(dump).collect();
        if checks > 0 || !failures.is_empty() {
            out.push(property("soundness", &format!("bernoulli:{m}"), checks, &failures));
        }
    }
    let frac = soundness_sweep(trials.div_ceil(4), n_max, seed ^ FRACTIONAL_STREAM, true)?;
    let failures: Vec<String> = frac.violations.iter().map(dump).collect();
    out.push(property("soundness", "fractional:all", frac.total_checks(), &failures));
    Ok(out)
}

/// Thresholds strictly inside `(lo, hi)`.
fn interior(lo: f64, hi: f64) -> Vec<f64> {
    [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|f| lo + f * (hi - lo)).collect()
}

struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { checks: 0, failures: Vec::new() }
    }

    /// Both values present and within the tolerance, or both absent.
    fn same(&mut self, what: String, a: Option<f64>, b: Option<f64>) {
        self.checks += 1;
        let ok = match (a, b) {
            (Some(x), Some(y)) => (x - y).abs() <= IDENTITY_TOL * x.abs().max(y.abs()).max(1.0),
            (None, None) => true,
            _ => false,
        };
        if !ok {
            let show = |v: Option<f64>| v.map_or("invalid".to_string(), fmt_float);
            self.failures.push(format!("{what}: {} vs {}", show(a), show(b)));
        }
    }
}

fn identities() -> Vec<Record> {
    let ns = [5u64, 10, 20, 50, 100];
    let ps = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut kwise = Tally::new();
    let mut depgraph = Tally::new();
    let mut split = Tally::new();
    let mut markov = Tally::new();
    let mut convex = Tally::new();
    for &n in &ns {
        let nf = n as f64;
        for &p in &ps {
            for t in interior(nf * p, nf) {
                let h = hoeffding_bound(n, p, t).ln();
                let eps = t / (nf * p) - 1.0;
                kwise.same(format!("n={n} p={p} t={t}"), kwise_bound(n, n, p, eps).ln(), h);
                split.same(format!("n={n} gamma={p} t={t}"), split_moment_bound(n, p, 1.0 - p, t).ln(), h);
            }
            let z = binomial(n, p);
            for t in interior(nf * p, nf) {
                let h = hoeffding_bound(n, p, t).ln();
                let e = dephoeff_bound(&z, t, &ConvexFamily::Exponential { grid: DEFAULT_GRID }).ln();
                convex.same(format!("n={n} p={p} t={t}"), e, h);
            }
            // Markov on integer thresholds above the mean, below n
            for beta in ((nf * p).floor() as u64 + 1).max(2)..n {
                let ll = linial_luria_bound(n, beta, 1, &MomentProfile::MeanOnly(p)).ln();
                markov.same(format!("n={n} p={p} beta_n={beta}"), ll, Some((nf * p / beta as f64).ln().min(0.0)));
            }
        }
        let params = DependencyGraphParams::new(n, n).expect("alpha = n is valid");
        for t in interior(nf / 2.0, nf) {
            depgraph.same(format!("n={n} t={t}"), depgraph_bound(&params, t).ln(), hoeffding_bound(n, 0.5, t).ln());
        }
    }
    vec![
        property("identities", "kwise-full-independence", kwise.checks, &kwise.failures),
        property("identities", "depgraph-edgeless", depgraph.checks, &depgraph.failures),
        property("identities", "split-complement", split.checks, &split.failures),
        property("identities", "linial-luria-markov", markov.checks, &markov.failures),
        property("identities", "convex-exponential-binomial", convex.checks, &convex.failures),
    ]
}

fn binomial(n: u64, p: f64) -> ZDist {
    let spec = BinomialSpec::new(n, p).expect("p in (0,1)");
    let probs = (0..=n).map(|j| binom_pmf_log(&spec, j).map_or(0.0, LogProb::prob)).collect();
    ZDist::new(probs).expect("binomial pmf")
}

/// `(triangle failures, clique failures)` for one graph; the lemmas need
/// at least 3 and 4 vertices.
fn lemma_failures(g: &Graph, label: &dyn Fn() -> String) -> (Option<String>, Option<String>) {
    let n = g.n();
    let tri = (n >= 3).then(|| triangle_union_edges(g)).and_then(|(j, r)| {
        (r * (n - 2) < 3 * j).then(|| format!("{}: {j} triangles, {r} edges in their union", label()))
    });
    let cl = (n >= 4).then(|| clique4_union_triangles(g)).and_then(|(k, r)| {
        (r * (n - 3) < 4 * k).then(|| format!("{}: {k} 4-cliques, {r} triangles in their union", label()))
    });
    (tri, cl)
}

fn random_graph(seed: u64, index: u64) -> Graph {
    let mut rng = stream_rng(seed, index);
    let n = rng.random_range(RANDOM_GRAPH_N);
    let p: f64 = rng.random_range(0.05..0.95);
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                g.add_edge(u, v).expect("vertices in range");
            }
        }
    }
    g
}

fn lemmas(a: &VerifyArgs, seed: u64) -> Result<Vec<Record>, CliError> {
    let n_max = n_max(a, 6, 1, EXHAUSTIVE_MAX_N)?;
    let trials = trials(a, 10_000)?;

    let mut ex_checks = (0, 0);
    let mut ex_fail = (Vec::new(), Vec::new());
    for n in 1..=n_max {
        let pairs = n * (n - 1) / 2;
        let found: Vec<(Option<String>, Option<String>)> = (0..1u64 << pairs)
            .into_par_iter()
            .map(|mask| lemma_failures(&Graph::from_pair_mask(n, mask), &|| format!("n={n} edge mask={mask:#x}")))
            .filter(|(a, b)| a.is_some() || b.is_some())
            .collect();
        if n >= 3 {
            ex_checks.0 += 1usize << pairs;
        }
        if n >= 4 {
            ex_checks.1 += 1usize << pairs;
        }
        for (t, c) in found {
            ex_fail.0.extend(t);
            ex_fail.1.extend(c);
        }
    }

    let found: Vec<(Option<String>, Option<String>)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let g = random_graph(seed, i);
            lemma_failures(&g, &|| format!("trial {i}: graph [{}]", g.to_text().trim().replace('\n', " / ")))
        })
        .collect();
    let mut rnd_fail = (Vec::new(), Vec::new());
    for (t, c) in found {
        rnd_fail.0.extend(t);
        rnd_fail.1.extend(c);
    }

    let (j, r) = triangle_union_edges(&Graph::complete(4));
    let k4 = if r * 2 == 3 * j { vec![] } else { vec![format!("K4: r(n-2) = {} but 3j = {}", r * 2, 3 * j)] };
    let (k, r) = clique4_union_triangles(&Graph::complete(5));
    let k5 = if r * 2 == 4 * k { vec![] } else { vec![format!("K5: r(n-3) = {} but 4k = {}", r * 2, 4 * k)] };

    Ok(vec![
        property("lemmas", "triangle-union:exhaustive", ex_checks.0, &ex_fail.0),
        property("lemmas", "clique4-union:exhaustive", ex_checks.1, &ex_fail.1),
        property("lemmas", "triangle-union:random", trials, &rnd_fail.0),
        property("lemmas", "clique4-union:random", trials, &rnd_fail.1),
        property("lemmas", "triangle-union:tight-at-K4", 1, &k4),
        property("lemmas", "clique4-union:tight-at-K5", 1, &k5),
    ])
}

fn convex_order(a: &VerifyArgs, seed: u64) -> Result<Vec<Record>, CliError> {
    let n_max = n_max(a, 12, 1, 64)?;
    let trials = trials(a, 100)?;
    let hs = [0.1, 1.0, 3.0];
    // (convex checks, failures, tail checks, failures) per p-vector
    type Tallies = (usize, Vec<String>, usize, Vec<String>);
    let per: Vec<Result<Tallies, CliError>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let n = rng.random_range(1..=n_max);
            let ps: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..0.99)).collect();
            let spec = PoissonBinomialSpec::new(ps.clone())?;
            let show = || ps.iter().map(|p| fmt_float(*p)).collect::<Vec<_>>().join(",");
            let mut co = Vec::new();
            for h in hs {
                if !convex_order_check(&spec, h) {
                    co.push(format!("ps=[{}] h={h}", show()));
                }
            }
            let top = (spec.mean() * n as f64 + 1e-9).floor() as u64;
            let mut pt = Vec::new();
            for b in 0..=top {
                if !poisson_trials_check(&spec, b)? {
                    pt.push(format!("ps=[{}] b={b}", show()));
                }
            }
            Ok((hs.len(), co, top as usize + 1, pt))
        })
        .collect();
    let (mut co_checks, mut co_fail, mut pt_checks, mut pt_fail) = (0, Vec::new(), 0, Vec::new());
    for r in per {
        let (c, cf, p, pf) = r?;
        co_checks += c;
        co_fail.extend(cf);
        pt_checks += p;
        pt_fail.extend(pf);
    }
    let mut med_fail = Vec::new();
    let mut med_checks = 0;
    for n in 1..=MEDIAN_MAX_N {
        for j in 1..100 {
            let p = j as f64 / 100.0;
            med_checks += 1;
            if !binomial_median_lb_check(&BinomialSpec::new(n, p)?) {
                med_fail.push(format!("n={n} p={p}"));
            }
        }
    }
    Ok(vec![
        property("convex-order", "mgf-dominated-by-binomial", co_checks, &co_fail),
        property("convex-order", "tail-dominates-binomial-below-mean", pt_checks, &pt_fail),
        property("convex-order", "binomial-median-above-np-minus-1", med_checks, &med_fail),
    ])
}

fn sandwich(a: &VerifyArgs, seed: u64) -> Result<Vec<Record>, CliError> {
    let n_max = n_max(a, 10, 2, AUDIT_MAX_N)?;
    let trials = trials(a, 500)?;
    let rep = sandwich_sweep(trials, n_max, seed)?;
    Ok(vec![property("sandwich", "lower-exact-upper", rep.checks, &rep.failures)])
}
