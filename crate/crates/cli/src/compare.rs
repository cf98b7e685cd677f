//! `compare`: several bounds side by side over a threshold sweep.

use clap::Args;

use depbound::bounds::{Method, UStatParams};

use crate::bound::{check_required, check_unused, evaluate, grid, parse_method, Extras, Num, Outcome, ParamFlags};
use crate::output::{Record, Value};
use crate::{usage, CliError, Report, EXIT_OK};

/// Relative tolerance on the log scale for ties in the `best` column.
const TIE_TOL: f64 = 1e-12;

#[derive(Args, Debug)]
pub(crate) struct CompareArgs {
    /// Methods to tabulate, at least two. `--t` is read on the scale of the sum for all of them.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_method)]
    methods: Vec<Method>,
    #[command(flatten)]
    params: ParamFlags,
}

/// The method's own threshold for the event `sum >= t`, where the sum has
/// `n` terms of mean `p`.
fn native_t(method: Method, base: &crate::bound::Point, t: f64) -> Result<f64, String> {
    let n = base.f("n").ok_or("--n is required")?;
    match method {
        Method::McDiarmid | Method::McDiarmidRefined => Ok(t / n - base.f("p").ok_or("--p is required")?),
        Method::UStat | Method::UStatRefined => {
            let (nu, d) = (base.u("n").ok_or("--n must be an integer")?, base.u("d").ok_or("--d is required")?);
            let params = UStatParams::new(nu, d, base.f("p").ok_or("--p is required")?).map_err(|e| e.to_string())?;
            Ok((t - params.mean()) / params.n_choose_d())
        }
        _ => Ok(t),
    }
}

pub(crate) fn run(args: &CompareArgs) -> Result<Report, CliError> {
    let methods = &args.methods;
    if methods.len() < 2 {
        return Err(usage("compare needs at least two methods"));
    }
    for (i, m) in methods.iter().enumerate() {
        if *m == Method::LinialLower {
            return Err(usage("linial-lower is a lower bound and cannot be compared"));
        }
        if methods[..i].contains(m) {
            return Err(usage(format!("{m} is listed twice")));
        }
    }
    let present = args.params.present();
    if present.contains(&"eps") {
        return Err(usage("compare takes thresholds through --t"));
    }
    if !present.contains(&"t") {
        return Err(usage("compare requires --t"));
    }
    for &m in methods {
        check_required(m, &present)?;
    }
    check_unused(methods, &present)?;
    let dims = args.params.dims();
    let mut ts = Vec::new();
    let mut fixed = Vec::new();
    for (name, values) in dims {
        if name == "t" {
            ts = values;
        } else if values.len() > 1 {
            return Err(usage(format!("--{name} takes a single value in compare; only --t is swept")));
        } else {
            fixed.push((name, values));
        }
    }
    let base = grid(&fixed).pop().unwrap_or_default();
    let extras = Extras::from_flags(&args.params)?;

    let mut records = Vec::with_capacity(ts.len());
    for t in ts {
        let Num::F(t) = t else { unreachable!("t is real") };
        let mut cells: Vec<(Method, Option<f64>)> = Vec::new();
        for &m in methods {
            let ln = match native_t(m, &base, t) {
                Err(_) => None,
                Ok(native) => {
                    let mut pt = base.clone();
                    pt.set("t", Num::F(native));
                    // bad values for one method leave its cell empty
                    match evaluate(m, &pt, &extras) {
                        Ok(Outcome::Bound(b)) => b.ln(),
                        _ => None,
                    }
                }
            };
            cells.push((m, ln));
        }
        let min = cells.iter().filter_map(|c| c.1).fold(f64::INFINITY, f64::min);
        let best: Vec<&str> = cells
            .iter()
            .filter(|(_, ln)| ln.is_some_and(|v| v <= min + TIE_TOL * min.abs().max(1.0)))
            .map(|(m, _)| m.name())
            .collect();
        let mut r = Record::new().with("t", t);
        for (m, ln) in &cells {
            r = r.with(m.name(), ln.map(f64::exp));
        }
        let best_ln = (!best.is_empty()).then_some(min);
        records.push(
            r.with("best", if best.is_empty() { Value::Null } else { best.join("+").into() })
                .with("best_log_bound", best_ln),
        );
    }
    Ok(Report { records, code: EXIT_OK })
}
