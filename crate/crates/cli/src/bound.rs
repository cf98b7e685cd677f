//! `bound`: one method over a cartesian grid of parameter values.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use rayon::prelude::*;

use depbound::bounds::{
    coupling_bound, depgraph_bound, hoeffding_bound, ik_bound, kwise_bernoulli_bound, kwise_bound,
    linial_lower_bound, linial_luria_best, linial_luria_bound, mcdiarmid_bound, mcdiarmid_refined_bound,
    split_moment_bound, sss_bound, sss_k_star, ustat_bound, ustat_refined_bound, DependencyGraphParams, Method,
    MomentProfile, TailBound, UStatParams,
};
use depbound::graphcomb::{gnm_isolated_bound, gnm_triangles_bound, gnp_bound, GnpKind};
use depbound::numkernel::{binom_pmf_log, BinomialSpec, LogProb};
use depbound::oracle::{dephoeff_bound, z_distribution, ConvexFamily, JointDist, ZDist, DEFAULT_GRID};

use crate::output::{Record, Value};
use crate::{usage, CliError, Report, EXIT_INVALID, EXIT_OK};

pub(crate) fn parse_method(s: &str) -> Result<Method, String> {
    Method::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        format!("unknown method '{s}'; expected one of {}", names.join(", "))
    })
}

fn parse_moment(s: &str) -> Result<(u64, f64), String> {
    let (k, v) = s.split_once(':').ok_or_else(|| format!("expected k:S_k, got '{s}'"))?;
    let k = k.trim().parse().map_err(|_| format!("bad moment order '{k}'"))?;
    let v = v.trim().parse().map_err(|_| format!("bad moment value '{v}'"))?;
    Ok((k, v))
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum FamilyName {
    Exponential,
    Hinge,
    BinomCoeff,
}

/// Method parameters. Numeric flags take comma-separated sweeps.
#[derive(Args, Debug, Clone, Default)]
pub(crate) struct ParamFlags {
    /// Number of variables (vertices for the graph methods).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    /// Number of edges in G(n,m).
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<u64>,
    /// Kernel arity of a U-statistic.
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<u64>,
    /// Independence order, moment order, or binomial-coefficient order.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u64>,
    /// Independence number of the dependency graph.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<u64>,
    /// Mean of each variable (kernel mean for U-statistics, edge probability for G(n,p)).
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Product-moment rate.
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    /// Complementary rate of the split bound.
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<f64>,
    /// Leading constant of the product-moment bound.
    #[arg(long, value_delimiter = ',')]
    pub c: Vec<f64>,
    /// Threshold on the sum. Per variable for mcdiarmid, relative to C(n,d) for ustat.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Vec<f64>,
    /// Relative excess over the mean, t = n * base * (1 + eps).
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// The symmetric moment S_t for linial-lower.
    #[arg(long = "s-value", value_delimiter = ',')]
    pub s_value: Vec<f64>,
    /// Exact symmetric moments as k:S_k pairs.
    #[arg(long, value_delimiter = ',', value_parser = parse_moment)]
    pub moments: Vec<(u64, f64)>,
    /// Function family for convex-function.
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Hinge knot; defaults to the threshold.
    #[arg(long)]
    pub ell: Option<f64>,
    /// Grid size for the exponential and hinge families.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Joint law file for convex-function.
    #[arg(long)]
    pub dist: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub(crate) struct BoundArgs {
    #[arg(value_parser = parse_method)]
    method: Method,
    #[command(flatten)]
    params: ParamFlags,
}

impl ParamFlags {
    pub(crate) fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut add = |name, set: bool| {
            if set {
                out.push(name);
            }
        };
        add("n", !self.n.is_empty());
        add("m", !self.m.is_empty());
        add("d", !self.d.is_empty());
        add("k", !self.k.is_empty());
        add("alpha", !self.alpha.is_empty());
        add("p", !self.p.is_empty());
        add("gamma", !self.gamma.is_empty());
        add("delta", !self.delta.is_empty());
        add("c", !self.c.is_empty());
        add("t", !self.t.is_empty());
        add("eps", !self.eps.is_empty());
        add("s-value", !self.s_value.is_empty());
        add("moments", !self.moments.is_empty());
        add("family", self.family.is_some());
        add("ell", self.ell.is_some());
        add("grid", self.grid.is_some());
        add("dist", self.dist.is_some());
        out
    }

    /// Sweep dimensions in grid order, each sorted ascending.
    pub(crate) fn dims(&self) -> Vec<(&'static str, Vec<Num>)> {
        fn ints(v: &[u64]) -> Vec<Num> {
            let mut v = v.to_vec();
            v.sort_unstable();
            v.into_iter().map(Num::U).collect()
        }
        fn reals(v: &[f64]) -> Vec<Num> {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.into_iter().map(Num::F).collect()
        }
        let all = [
            ("n", ints(&self.n)),
            ("m", ints(&self.m)),
            ("d", ints(&self.d)),
            ("k", ints(&self.k)),
            ("alpha", ints(&self.alpha)),
            ("p", reals(&self.p)),
            ("gamma", reals(&self.gamma)),
            ("delta", reals(&self.delta)),
            ("c", reals(&self.c)),
            ("s-value", reals(&self.s_value)),
            ("t", reals(&self.t)),
            ("eps", reals(&self.eps)),
        ];
        all.into_iter().filter(|(_, v)| !v.is_empty()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Num {
    U(u64),
    F(f64),
}

impl From<Num> for Value {
    fn from(n: Num) -> Self {
        match n {
            Num::U(v) => Value::Int(v),
            Num::F(v) => Value::Float(v),
        }
    }
}

/// One grid point: flag name to value.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Point(pub Vec<(&'static str, Num)>);

impl Point {
    fn get(&self, key: &str) -> Option<Num> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    pub(crate) fn f(&self, key: &str) -> Option<f64> {
        self.get(key).map(|v| match v {
            Num::U(u) => u as f64,
            Num::F(f) => f,
        })
    }

    pub(crate) fn u(&self, key: &str) -> Option<u64> {
        match self.get(key)? {
            Num::U(u) => Some(u),
            Num::F(f) => (f >= 0.0 && f.fract() == 0.0 && f < u64::MAX as f64).then_some(f as u64),
        }
    }

    pub(crate) fn set(&mut self, key: &'static str, v: Num) {
        match self.0.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = v,
            None => self.0.push((key, v)),
        }
    }

    pub(crate) fn to_value(&self) -> Value {
        Value::Map(self.0.iter().map(|(k, v)| (k.to_string(), (*v).into())).collect())
    }
}

pub(crate) fn grid(dims: &[(&'static str, Vec<Num>)]) -> Vec<Point> {
    let mut points = vec![Point::default()];
    for (name, values) in dims {
        points = points
            .into_iter()
            .flat_map(|pt| {
                values.iter().map(move |v| {
                    let mut q = pt.clone();
                    q.0.push((name, *v));
                    q
                })
            })
            .collect();
    }
    points
}

/// Flag groups of which exactly one member must be given, and further optional flags.
pub(crate) fn needs(method: Method) -> (&'static [&'static [&'static str]], &'static [&'static str]) {
    use Method::*;
    const T_OR_EPS: &[&str] = &["t", "eps"];
    match method {
        Hoeffding | Coupling => (&[&["n"], &["p"], T_OR_EPS], &[]),
        ImpagliazzoKabanets => (&[&["n"], &["gamma"], T_OR_EPS], &["c"]),
        LinialLuria => (&[&["n"], &["p", "gamma", "moments"], &["t"]], &["k"]),
        LinialLower => (&[&["n"], &["s-value"], &["t"]], &[]),
        SplitMoment => (&[&["n"], &["gamma"], &["delta"], T_OR_EPS], &[]),
        McDiarmid | McDiarmidRefined => (&[&["n"], &["p"], &["t"]], &[]),
        KWise | KWiseBernoulli => (&[&["n"], &["k"], &["p"], T_OR_EPS], &[]),
        Sss => (&[&["n"], &["p"], T_OR_EPS], &["k"]),
        DependencyGraph => (&[&["n"], &["alpha"], T_OR_EPS], &[]),
        UStat | UStatRefined => (&[&["n"], &["d"], &["p"], &["t"]], &[]),
        ConvexFunction => (&[&["n", "dist"], T_OR_EPS], &["p", "family", "ell", "grid", "k"]),
        GnpIsolated | GnpTriangles | Gnp4Cliques => (&[&["n"], &["p"], &["t"]], &[]),
        GnmIsolated | GnmTriangles => (&[&["n"], &["m"], &["t"]], &[]),
    }
}

fn flag_list(names: &[&str]) -> String {
    names.iter().map(|n| format!("--{n}")).collect::<Vec<_>>().join(", ")
}

/// Every required group has exactly one member in `present`.
pub(crate) fn check_required(method: Method, present: &[&str]) -> Result<(), CliError> {
    let (groups, _) = needs(method);
    for group in groups {
        let given: Vec<&str> = group.iter().copied().filter(|g| present.contains(g)).collect();
        match given.len() {
            0 if group.len() == 1 => return Err(usage(format!("{method} requires --{}", group[0]))),
            0 => return Err(usage(format!("{method} requires one of {}", flag_list(group)))),
            1 => {}
            _ => return Err(usage(format!("{method}: {} are mutually exclusive", flag_list(&given)))),
        }
    }
    if method == Method::ConvexFunction && present.contains(&"n") && !present.contains(&"p") {
        return Err(usage("convex-function requires --p with --n (or a joint law via --dist)"));
    }
    Ok(())
}

/// Rejects flags no method in `methods` reads.
pub(crate) fn check_unused(methods: &[Method], present: &[&str]) -> Result<(), CliError> {
    for flag in present {
        let used = methods.iter().any(|&m| {
            let (groups, optional) = needs(m);
            groups.iter().any(|g| g.contains(flag)) || optional.contains(flag)
        });
        if !used {
            let names: Vec<&str> = methods.iter().map(|m| m.name()).collect();
            return Err(usage(format!("--{flag} does not apply to {}", names.join(", "))));
        }
    }
    Ok(())
}

/// Inputs that are not swept.
pub(crate) struct Extras {
    moments: Vec<(u64, f64)>,
    family: Option<FamilyName>,
    ell: Option<f64>,
    grid: Option<usize>,
    zdist: Option<ZDist>,
}

impl Extras {
    pub(crate) fn from_flags(flags: &ParamFlags) -> Result<Self, CliError> {
        let zdist = match &flags.dist {
            None => None,
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                let dist = JointDist::from_text(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                Some(z_distribution(&dist).map_err(|e| usage(format!("{}: {e}", path.display())))?)
            }
        };
        Ok(Extras { moments: flags.moments.clone(), family: flags.family, ell: flags.ell, grid: flags.grid, zdist })
    }
}

pub(crate) enum Outcome {
    Bound(TailBound),
    /// A lower bound on the tail.
    Lower(LogProb),
}

fn need_u(pt: &Point, key: &str) -> Result<u64, CliError> {
    pt.u(key).ok_or_else(|| usage(format!("--{key} must be a nonnegative integer")))
}

fn need_f(pt: &Point, key: &str) -> Result<f64, CliError> {
    pt.f(key).ok_or_else(|| usage(format!("--{key} is required")))
}

fn integer_t(pt: &Point) -> Result<u64, CliError> {
    need_f(pt, "t")?;
    pt.u("t").ok_or_else(|| usage(format!("t = {} must be a nonnegative integer", pt.f("t").unwrap_or(f64::NAN))))
}

/// Threshold on the scale of the sum; `eps` is relative to `n * base`.
fn sum_t(pt: &Point, n: f64, base: f64) -> f64 {
    match pt.f("t") {
        Some(t) => t,
        None => n * base * (1.0 + pt.f("eps").unwrap_or(f64::NAN)),
    }
}

fn rel_eps(pt: &Point, n: f64, base: f64) -> f64 {
    match pt.f("eps") {
        Some(e) => e,
        None => pt.f("t").unwrap_or(f64::NAN) / (n * base) - 1.0,
    }
}

fn binomial_zdist(n: u64, p: f64) -> Result<ZDist, CliError> {
    let spec = BinomialSpec::new(n, p).map_err(|e| usage(e.to_string()))?;
    let probs = (0..=n).map(|j| binom_pmf_log(&spec, j).map(LogProb::prob)).collect::<Result<Vec<_>, _>>()?;
    ZDist::new(probs).map_err(|e| usage(e.to_string()))
}

pub(crate) fn evaluate(method: Method, pt: &Point, ex: &Extras) -> Result<Outcome, CliError> {
    use Method::*;
    let lib = |e: depbound::Error| usage(e.to_string());
    let b = match method {
        Hoeffding => {
            let (n, p) = (need_u(pt, "n")?, need_f(pt, "p")?);
            hoeffding_bound(n, p, sum_t(pt, n as f64, p))
        }
        ImpagliazzoKabanets => {
            let (n, g) = (need_u(pt, "n")?, need_f(pt, "gamma")?);
            ik_bound(n, g, rel_eps(pt, n as f64, g), pt.f("c"))
        }
        LinialLuria => {
            let (n, beta) = (need_u(pt, "n")?, integer_t(pt)?);
            let profile = if let Some(g) = pt.f("gamma") {
                MomentProfile::ProductBound(g)
            } else if let Some(p) = pt.f("p") {
                MomentProfile::MeanOnly(p)
            } else {
                MomentProfile::SymmetricMoments(ex.moments.iter().copied().collect())
            };
            match pt.u("k") {
                Some(k) => linial_luria_bound(n, beta, k, &profile),
                None => linial_luria_best(n, beta, &profile),
            }
        }
        LinialLower => {
            let (n, beta, s) = (need_u(pt, "n")?, integer_t(pt)?, need_f(pt, "s-value")?);
            return Ok(Outcome::Lower(linial_lower_bound(n, beta, s).map_err(lib)?));
        }
        SplitMoment => {
            let (n, g, d) = (need_u(pt, "n")?, need_f(pt, "gamma")?, need_f(pt, "delta")?);
            split_moment_bound(n, g, d, sum_t(pt, n as f64, g))
        }
        Coupling => {
            let (n, p) = (need_u(pt, "n")?, need_f(pt, "p")?);
            coupling_bound(n, p, sum_t(pt, n as f64, p))
        }
        McDiarmid => mcdiarmid_bound(need_u(pt, "n")?, need_f(pt, "p")?, need_f(pt, "t")?),
        McDiarmidRefined => mcdiarmid_refined_bound(need_u(pt, "n")?, need_f(pt, "p")?, need_f(pt, "t")?),
        KWise | KWiseBernoulli => {
            let (n, k, p) = (need_u(pt, "n")?, need_u(pt, "k")?, need_f(pt, "p")?);
            let eps = rel_eps(pt, n as f64, p);
            if method == KWise {
                kwise_bound(n, k, p, eps)
            } else {
                kwise_bernoulli_bound(n, k, p, eps)
            }
        }
        Sss => {
            let (n, p) = (need_u(pt, "n")?, need_f(pt, "p")?);
            let eps = rel_eps(pt, n as f64, p);
            let k = match pt.get("k") {
                Some(_) => need_u(pt, "k")?,
                None => sss_k_star(n, p, eps),
            };
            sss_bound(n, p, eps, k)
        }
        DependencyGraph => {
            let (n, alpha) = (need_u(pt, "n")?, need_u(pt, "alpha")?);
            depgraph_bound(&DependencyGraphParams::new(n, alpha).map_err(lib)?, sum_t(pt, n as f64, 0.5))
        }
        UStat | UStatRefined => {
            let params = UStatParams::new(need_u(pt, "n")?, need_u(pt, "d")?, need_f(pt, "p")?).map_err(lib)?;
            let t = need_f(pt, "t")?;
            if method == UStat {
                ustat_bound(&params, t)
            } else {
                ustat_refined_bound(&params, t)
            }
        }
        ConvexFunction => {
            let built;
            let z = match &ex.zdist {
                Some(z) => z,
                None => {
                    built = binomial_zdist(need_u(pt, "n")?, need_f(pt, "p")?)?;
                    &built
                }
            };
            let n = z.n() as f64;
            let t = sum_t(pt, n, z.mean() / n);
            let grid = ex.grid.unwrap_or(DEFAULT_GRID);
            let family = match ex.family.unwrap_or(FamilyName::Exponential) {
                FamilyName::Exponential => ConvexFamily::Exponential { grid },
                FamilyName::Hinge => ConvexFamily::Hinge { ell: ex.ell.unwrap_or(t), grid },
                FamilyName::BinomCoeff => ConvexFamily::BinomCoeff(
                    pt.u("k").ok_or_else(|| usage("the binom-coeff family requires an integer --k"))?,
                ),
            };
            dephoeff_bound(z, t, &family)
        }
        GnpIsolated | GnpTriangles | Gnp4Cliques => {
            let kind = match method {
                GnpIsolated => GnpKind::Isolated,
                GnpTriangles => GnpKind::Triangles,
                _ => GnpKind::Cliques4,
            };
            gnp_bound(kind, need_u(pt, "n")?, need_f(pt, "p")?, need_f(pt, "t")?)
        }
        GnmIsolated => gnm_isolated_bound(need_u(pt, "n")?, need_u(pt, "m")?, integer_t(pt)?),
        GnmTriangles => gnm_triangles_bound(need_u(pt, "n")?, need_u(pt, "m")?, integer_t(pt)?),
    };
    Ok(Outcome::Bound(b))
}

impl Outcome {
    pub(crate) fn ln(&self) -> Option<f64> {
        match self {
            Outcome::Bound(b) => b.ln(),
            Outcome::Lower(l) => Some(l.ln()),
        }
    }

    pub(crate) fn reason(&self) -> Option<&str> {
        match self {
            Outcome::Bound(b) => b.invalid_reason(),
            Outcome::Lower(_) => None,
        }
    }
}

pub(crate) fn record(method: Method, pt: &Point, outcome: &Outcome, runtime_ms: f64) -> Record {
    let (provenance, derived, notes) = match outcome {
        Outcome::Bound(b) => (
            b.provenance.name(),
            b.params.iter().map(|(k, v)| (k.clone(), Value::Float(*v))).collect(),
            b.notes.join("; "),
        ),
        Outcome::Lower(_) => ("closed-form", Vec::new(), "lower bound on the tail".to_string()),
    };
    let ln = outcome.ln();
    Record::new()
        .with("method", method.name())
        .with("parameters", pt.to_value())
        .with("validity", if outcome.reason().is_none() { "valid" } else { "invalid" })
        .with("reason", outcome.reason())
        .with("bound", ln.map(f64::exp))
        .with("log_bound", ln)
        .with("provenance", provenance)
        .with("derived", Value::Map(derived))
        .with("notes", notes)
        .with("runtime_ms", runtime_ms)
}

pub(crate) fn run(args: &BoundArgs) -> Result<Report, CliError> {
    let present = args.params.present();
    check_required(args.method, &present)?;
    check_unused(&[args.method], &present)?;
    let extras = Extras::from_flags(&args.params)?;
    let points = grid(&args.params.dims());
    let results: Vec<Result<(Outcome, f64), CliError>> = points
        .par_iter()
        .map(|pt| {
            let start = Instant::now();
            let o = evaluate(args.method, pt, &extras)?;
            Ok((o, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect();
    let mut records = Vec::with_capacity(points.len());
    let mut code = EXIT_OK;
    for (pt, r) in points.iter().zip(results) {
        let (outcome, ms) = r?;
        if outcome.reason().is_some() {
            code = EXIT_INVALID;
        }
        records.push(record(args.method, pt, &outcome, ms));
    }
    Ok(Report { records, code })
}
