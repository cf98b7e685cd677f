//! `simulate`: empirical tails of the dependence models, optionally checked
//! against the model's own bound.

use clap::{Args, ValueEnum};

use depbound::graphcomb::Graph;
use depbound::simulate::{empirical_tail, BaseDist, MdsKernel, SimModel, UStatKernel, UStatModel, CI_LEVEL};

use crate::output::{Record, Value};
use crate::{usage, CliError, Report, EXIT_OK, EXIT_VIOLATION};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ModelName {
    GnpIsolated,
    GnpTriangles,
    #[value(name = "gnp-4cliques")]
    Gnp4Cliques,
    GnmIsolated,
    GnmTriangles,
    OrientationParity,
    DegreeParity,
    Martingale,
    UstatThreshold,
    UstatTriangles,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum GraphShape {
    Complete,
    Cycle,
    Empty,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BoundMode {
    /// The bound that matches the model.
    Auto,
    None,
}

#[derive(Args, Debug)]
pub(crate) struct SimulateArgs {
    #[arg(value_enum)]
    model: ModelName,
    /// Vertices, variables, or U-statistic inputs.
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability, common mean, or Bernoulli input probability.
    #[arg(long)]
    p: Option<f64>,
    /// Edges in G(n,m); vertices for ustat-triangles.
    #[arg(long)]
    m: Option<usize>,
    /// Base graph of orientation-parity.
    #[arg(long, value_enum, default_value_t = GraphShape::Complete)]
    graph: GraphShape,
    /// Per-step means of the martingale.
    #[arg(long, value_delimiter = ',')]
    ps: Vec<f64>,
    /// Martingale kernel: independent-centered or polya-style.
    #[arg(long, default_value = "independent-centered", value_parser = |s: &str| MdsKernel::from_name(s).map_err(|e| e.to_string()))]
    kernel: MdsKernel,
    /// Kernel arity of ustat-threshold.
    #[arg(long)]
    d: Option<usize>,
    /// ustat-threshold counts the d-subsets whose inputs sum to at least this.
    #[arg(long)]
    level: Option<f64>,
    /// Bernoulli inputs with this mean for ustat-threshold; uniform inputs otherwise.
    #[arg(long)]
    q: Option<f64>,
    /// Thresholds on the statistic.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    t: Vec<f64>,
    /// Replications per threshold.
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, value_enum)]
    bound: Option<BoundMode>,
}

fn need<T: Copy>(v: Option<T>, flag: &str, model: ModelName) -> Result<T, CliError> {
    let name = model.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default();
    v.ok_or_else(|| usage(format!("{name} requires --{flag}")))
}

fn build(a: &SimulateArgs) -> Result<(SimModel, Vec<(String, Value)>), CliError> {
    use ModelName::*;
    let model = a.model;
    let mut inputs: Vec<(String, Value)> = Vec::new();
    let mut put = |k: &str, v: Value| inputs.push((k.to_string(), v));
    let m = match model {
        GnpIsolated | GnpTriangles | Gnp4Cliques => {
            let (n, p) = (need(a.n, "n", model)?, need(a.p, "p", model)?);
            put("n", n.into());
            put("p", p.into());
            match model {
                GnpIsolated => SimModel::GnpIsolated { n, p },
                GnpTriangles => SimModel::GnpTriangles { n, p },
                _ => SimModel::Gnp4Cliques { n, p },
            }
        }
        GnmIsolated | GnmTriangles => {
            let (n, m) = (need(a.n, "n", model)?, need(a.m, "m", model)?);
            put("n", n.into());
            put("m", m.into());
            if model == GnmIsolated {
                SimModel::GnmIsolated { n, m }
            } else {
                SimModel::GnmTriangles { n, m }
            }
        }
        OrientationParity => {
            let n = need(a.n, "n", model)?;
            let g = match a.graph {
                GraphShape::Complete => Graph::complete(n),
                GraphShape::Cycle => Graph::cycle(n),
                GraphShape::Empty => Graph::empty(n),
            };
            put("n", n.into());
            put("graph", format!("{:?}", a.graph).to_lowercase().into());
            SimModel::OrientationParity(g)
        }
        DegreeParity => {
            let n = need(a.n, "n", model)?;
            put("n", n.into());
            SimModel::DegreeParity { n }
        }
        Martingale => {
            let ps = if !a.ps.is_empty() {
                if a.n.is_some() || a.p.is_some() {
                    return Err(usage("martingale takes either --ps or --n with --p"));
                }
                a.ps.clone()
            } else {
                vec![need(a.p, "p", model)?; need(a.n, "n", model)?]
            };
            put("n", ps.len().into());
            put("ps", ps.iter().map(|p| crate::output::fmt_float(*p)).collect::<Vec<_>>().join(" ").into());
            put("kernel", a.kernel.name().into());
            SimModel::MartingaleDiff { ps, kernel: a.kernel }
        }
        UstatThreshold => {
            let (n, d, level) = (need(a.n, "n", model)?, need(a.d, "d", model)?, need(a.level, "level", model)?);
            let base = a.q.map_or(BaseDist::Uniform, BaseDist::Bernoulli);
            put("n", n.into());
            put("d", d.into());
            put("level", level.into());
            put("q", a.q.into());
            SimModel::UStat(UStatModel::new(n, d, UStatKernel::ThresholdSum(level), base).map_err(|e| usage(e.to_string()))?)
        }
        UstatTriangles => {
            let (m, p) = (need(a.m, "m", model)?, need(a.p, "p", model)?);
            put("m", m.into());
            put("p", p.into());
            let inputs = m * m.saturating_sub(1) / 2;
            SimModel::UStat(
                UStatModel::new(inputs, 3, UStatKernel::TriangleIndicator, BaseDist::Bernoulli(p))
                    .map_err(|e| usage(e.to_string()))?,
            )
        }
    };
    m.validate().map_err(|e| usage(e.to_string()))?;
    Ok((m, inputs))
}

pub(crate) fn run(a: &SimulateArgs, seed: u64) -> Result<Report, CliError> {
    if a.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    if let Some(t) = a.t.iter().find(|t| !t.is_finite()) {
        return Err(usage(format!("threshold {t} is not finite")));
    }
    let (model, inputs) = build(a)?;
    let mut ts = a.t.clone();
    ts.sort_by(f64::total_cmp);
    let mut records = Vec::with_capacity(ts.len());
    let mut code = EXIT_OK;
    for t in ts {
        let r = empirical_tail(&model, t, a.reps, seed)?;
        let mut rec = Record::new()
            .with("model", model.name())
            .with("parameters", Value::Map(inputs.clone()))
            .with("t", r.t)
            .with("replications", r.replications)
            .with("hits", r.hits)
            .with("empirical_tail", r.empirical_tail)
            .with("ci_low", r.ci_low)
            .with("ci_high", r.ci_high)
            .with("ci_level", CI_LEVEL)
            .with("seed", r.seed)
            .with("sum_mean", r.sum_mean);
        let (method, bound, ln, reason, verdict): (Value, Value, Value, Value, Value) = match a.bound {
            None | Some(BoundMode::None) => (Value::Null, Value::Null, Value::Null, Value::Null, Value::Null),
            Some(BoundMode::Auto) => match model.matching_bound(t) {
                None => (Value::Null, Value::Null, Value::Null, "no bound applies to this model".into(), "NO-BOUND".into()),
                Some(b) => match b.bound() {
                    None => (
                        b.method.name().into(),
                        Value::Null,
                        Value::Null,
                        b.invalid_reason().map(str::to_string).into(),
                        "NO-BOUND".into(),
                    ),
                    Some(v) => {
                        let verdict = if r.ci_high <= v {
                            "DOMINATED"
                        } else if r.ci_low > v {
                            code = EXIT_VIOLATION;
                            "VIOLATED"
                        } else {
                            "INCONCLUSIVE"
                        };
                        (b.method.name().into(), v.into(), b.ln().into(), Value::Null, verdict.into())
                    }
                },
            },
        };
        rec = rec
            .with("bound_method", method)
            .with("bound", bound)
            .with("log_bound", ln)
            .with("bound_reason", reason)
            .with("verdict", verdict);
        records.push(rec);
    }
    Ok(Report { records, code })
}
