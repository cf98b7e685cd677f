//! Concentration-bound evaluators.
//!
//! Every evaluator returns a [`TailBound`]. A bound whose hypotheses are not
//! met is reported as [`Validity::Invalid`] naming the violated clause, and
//! carries no value. Thresholds sitting exactly on a validity endpoint are
//! invalid: every hypothesis is a strict inequality.

mod classic;
mod moments;
pub mod optim;
mod ustat;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{domain, Result};
use crate::numkernel::{log_binom_coeff, LogProb};

pub use classic::{
    coupling_bound, hoeffding_bound, hoeffding_forms, hoeffding_numeric, ik_bound, HoeffdingForms, mcdiarmid_bound,
    mcdiarmid_refined_bound, refined_threshold,
};
pub use moments::{
    depgraph_bound, kwise_bernoulli_bound, kwise_bound, linial_lower_bound, linial_luria_best,
    linial_luria_bound, split_moment_bound, sss_bound, sss_k_star,
};
pub use ustat::{ustat_bound, ustat_refined_bound};

/// Which bound produced a [`TailBound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Hoeffding,
    ImpagliazzoKabanets,
    LinialLuria,
    LinialLower,
    SplitMoment,
    Coupling,
    McDiarmid,
    McDiarmidRefined,
    KWise,
    KWiseBernoulli,
    Sss,
    DependencyGraph,
    UStat,
    UStatRefined,
    ConvexFunction,
    GnpIsolated,
    GnpTriangles,
    Gnp4Cliques,
    GnmIsolated,
    GnmTriangles,
}

impl Method {
    pub const ALL: [Method; 20] = [
        Method::Hoeffding,
        Method::ImpagliazzoKabanets,
        Method::LinialLuria,
        Method::LinialLower,
        Method::SplitMoment,
        Method::Coupling,
        Method::McDiarmid,
        Method::McDiarmidRefined,
        Method::KWise,
        Method::KWiseBernoulli,
        Method::Sss,
        Method::DependencyGraph,
        Method::UStat,
        Method::UStatRefined,
        Method::ConvexFunction,
        Method::GnpIsolated,
        Method::GnpTriangles,
        Method::Gnp4Cliques,
        Method::GnmIsolated,
        Method::GnmTriangles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Hoeffding => "hoeffding",
            Method::ImpagliazzoKabanets => "ik",
            Method::LinialLuria => "linial-luria",
            Method::LinialLower => "linial-lower",
            Method::SplitMoment => "split-moment",
            Method::Coupling => "coupling",
            Method::McDiarmid => "mcdiarmid",
            Method::McDiarmidRefined => "mcdiarmid-refined",
            Method::KWise => "kwise",
            Method::KWiseBernoulli => "kwise-bernoulli",
            Method::Sss => "sss",
            Method::DependencyGraph => "dependency-graph",
            Method::UStat => "ustat",
            Method::UStatRefined => "ustat-refined",
            Method::ConvexFunction => "convex-function",
            Method::GnpIsolated => "gnp-isolated",
            Method::GnpTriangles => "gnp-triangles",
            Method::Gnp4Cliques => "gnp-4cliques",
            Method::GnmIsolated => "gnm-isolated",
            Method::GnmTriangles => "gnm-triangles",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Ok,
    Invalid(String),
}

/// How the reported value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    GridMinimized,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::GridMinimized => "grid-minimized",
        }
    }
}

/// A computed tail bound with its parameters and validity verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct TailBound {
    pub method: Method,
    log_bound: Option<LogProb>,
    /// Optimizer parameters and derived quantities (`h`, `eps`, `k_star`, ...).
    /// Valid bounds always carry `clamped` (1 when the raw value exceeded 1)
    /// and `ln_unclamped`.
    pub params: BTreeMap<String, f64>,
    pub validity: Validity,
    pub provenance: Provenance,
    pub notes: Vec<String>,
}

impl TailBound {
    /// A valid bound from a raw natural-log value; values above 0 are clamped
    /// and flagged.
    pub(crate) fn valid(method: Method, raw_log: f64, params: Vec<(&str, f64)>) -> Self {
        let mut map: BTreeMap<String, f64> =
            params.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        map.insert("clamped".into(), if raw_log > 0.0 { 1.0 } else { 0.0 });
        map.insert("ln_unclamped".into(), raw_log);
        TailBound {
            method,
            log_bound: Some(LogProb::clamped(raw_log)),
            params: map,
            validity: Validity::Ok,
            provenance: Provenance::ClosedForm,
            notes: Vec::new(),
        }
    }

    pub(crate) fn invalid(method: Method, reason: impl Into<String>) -> Self {
        TailBound {
            method,
            log_bound: None,
            params: BTreeMap::new(),
            validity: Validity::Invalid(reason.into()),
            provenance: Provenance::ClosedForm,
            notes: Vec::new(),
        }
    }

    pub(crate) fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub(crate) fn retag(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn log_bound(&self) -> Option<LogProb> {
        self.log_bound
    }

    /// Natural log of the bound, if valid.
    pub fn ln(&self) -> Option<f64> {
        self.log_bound.map(LogProb::ln)
    }

    /// Linear-scale bound, if valid.
    pub fn bound(&self) -> Option<f64> {
        self.log_bound.map(LogProb::prob)
    }

    pub fn is_valid(&self) -> bool {
        self.validity == Validity::Ok
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    pub fn invalid_reason(&self) -> Option<&str> {
        match &self.validity {
            Validity::Ok => None,
            Validity::Invalid(r) => Some(r),
        }
    }
}

/// Evaluates to an invalid [`TailBound`] when the condition fails.
macro_rules! require {
    ($cond:expr, $method:expr, $($reason:tt)+) => {
        if !($cond) {
            return $crate::bounds::TailBound::invalid($method, format!($($reason)+));
        }
    };
}
pub(crate) use require;

/// Threshold on the scale of the sum, with conversions to the relative
/// excess `eps` used when `t = n * base * (1 + eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuery {
    n: u64,
    t: f64,
}

impl TailQuery {
    pub fn new(n: u64, t: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("tail query: n must be >= 1"));
        }
        if !(t > 0.0 && t < n as f64) {
            return Err(domain(format!("tail query: t={t} must lie in (0, {n})")));
        }
        Ok(TailQuery { n, t })
    }

    pub fn from_eps(n: u64, base: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(domain(format!("tail query: eps={eps} must be > 0")));
        }
        TailQuery::new(n, n as f64 * base * (1.0 + eps))
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn eps(&self, base: f64) -> f64 {
        self.t / (self.n as f64 * base) - 1.0
    }
}

/// The dependence information a bound consumes.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentProfile {
    /// Only the average mean `p` is known.
    MeanOnly(f64),
    /// `E[prod_{i in A} X_i] <= gamma^|A|` for every `A`.
    ProductBound(f64),
    /// `E[Z_A] <= gamma^|A| * delta^(n-|A|)` for every `A`.
    SplitBound { gamma: f64, delta: f64 },
    /// Exact symmetric moments `S_k = sum_{|A|=k} E[prod_{i in A} X_i]`.
    SymmetricMoments(BTreeMap<u64, f64>),
}

impl MomentProfile {
    pub fn validate(&self, n: u64) -> Result<()> {
        let rate = |x: f64, what: &str| {
            if x > 0.0 && x < 1.0 {
                Ok(())
            } else {
                Err(domain(format!("{what} must lie in (0,1), got {x}")))
            }
        };
        match self {
            MomentProfile::MeanOnly(p) => rate(*p, "mean"),
            MomentProfile::ProductBound(g) => rate(*g, "gamma"),
            MomentProfile::SplitBound { gamma, delta } => {
                rate(*gamma, "gamma")?;
                if !(*delta > 0.0 && *delta <= 1.0) {
                    return Err(domain(format!("delta must lie in (0,1], got {delta}")));
                }
                if gamma + delta < 1.0 {
                    return Err(domain(format!("gamma + delta must be >= 1, got {}", gamma + delta)));
                }
                Ok(())
            }
            MomentProfile::SymmetricMoments(s) => {
                if let Some(s0) = s.get(&0) {
                    if (s0 - 1.0).abs() > 1e-12 {
                        return Err(domain(format!("S_0 must equal 1, got {s0}")));
                    }
                }
                for (&k, &v) in s {
                    if k > n {
                        return Err(domain(format!("S_{k} given for n = {n}")));
                    }
                    let cap = log_binom_coeff(n, k)?.exp();
                    if !(v >= 0.0) || v > cap * (1.0 + 1e-12) {
                        return Err(domain(format!("S_{k} = {v} outside [0, C({n},{k})]")));
                    }
                }
                Ok(())
            }
        }
    }

    /// The value (or an upper estimate) of `S_k` this profile supplies.
    ///
    /// Under a split bound the estimate `C(n,k) gamma^k (gamma+delta)^(n-k)`
    /// holds for Bernoulli variables only.
    pub fn symmetric_moment(&self, n: u64, k: u64) -> Option<f64> {
        if k > n {
            return None;
        }
        let lc = log_binom_coeff(n, k).ok()?;
        match self {
            MomentProfile::MeanOnly(p) => match k {
                0 => Some(1.0),
                1 => Some(n as f64 * p),
                _ => None,
            },
            MomentProfile::ProductBound(g) => Some((lc + k as f64 * g.ln()).exp()),
            MomentProfile::SplitBound { gamma, delta } => {
                Some((lc + k as f64 * gamma.ln() + (n - k) as f64 * (gamma + delta).ln()).exp())
            }
            MomentProfile::SymmetricMoments(s) => match k {
                0 => Some(1.0),
                _ => s.get(&k).copied(),
            },
        }
    }
}

/// U-statistic shape: `n = k d` base variables, kernel mean `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UStatParams {
    n: u64,
    d: u64,
    k: u64,
    p: f64,
    n_d: f64,
    n_choose_d: f64,
}

impl UStatParams {
    pub fn new(n: u64, d: u64, p: f64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(domain("u-statistic: n and d must be positive"));
        }
        if !n.is_multiple_of(d) {
            return Err(domain(format!("d does not divide n (n={n}, d={d})")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!("u-statistic: p must lie in (0,1), got {p}")));
        }
        Ok(UStatParams {
            n,
            d,
            k: n / d,
            p,
            n_d: log_binom_coeff(n - 1, d - 1)?.exp().round(),
            n_choose_d: log_binom_coeff(n, d)?.exp().round(),
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn d(&self) -> u64 {
        self.d
    }
    pub fn k(&self) -> u64 {
        self.k
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    /// `C(n-1, d-1)`.
    pub fn n_d(&self) -> f64 {
        self.n_d
    }
    /// `C(n, d)`, the number of kernel terms.
    pub fn n_choose_d(&self) -> f64 {
        self.n_choose_d
    }
    /// `E[X] = k p N_d = C(n,d) p`.
    pub fn mean(&self) -> f64 {
        self.k as f64 * self.p * self.n_d
    }
    /// Threshold `y = E[X] + t C(n,d)` on the scale of `X`.
    pub fn threshold(&self, t: f64) -> f64 {
        self.mean() + t * self.n_choose_d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DependencyGraphParams {
    n: u64,
    alpha: u64,
}

impl DependencyGraphParams {
    pub fn new(n: u64, alpha: u64) -> Result<Self> {
        if n == 0 || alpha == 0 || alpha > n {
            return Err(domain(format!("dependency graph: need 1 <= alpha <= n, got alpha={alpha}, n={n}")));
        }
        Ok(DependencyGraphParams { n, alpha })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }
}

/// Returns `Some(m)` when `x` is within `1e-9` (relative) of the integer `m`.
pub(crate) fn as_integer(x: f64) -> Option<u64> {
    if !x.is_finite() || x < 0.0 {
        return None;
    }
    let r = x.round();
    ((x - r).abs() <= 1e-9 * r.max(1.0)).then_some(r as u64)
}
