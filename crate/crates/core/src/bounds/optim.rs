//! Scalar minimization used to cross-check closed-form optimizers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fc < fx && fc < fd {
        (c, fc)
    } else if fd < fx {
        (d, fd)
    } else {
        (x, fx)
    }
}

/// Minimizes a convex `f` over `h > 0`, growing the bracket until the
/// function turns upward.
pub fn minimize_positive<F: Fn(f64) -> f64>(f: F, tol: f64) -> (f64, f64) {
    let mut hi = 1.0;
    while f(2.0 * hi) < f(hi) && hi < 1e6 {
        hi *= 2.0;
    }
    golden_section(f, 0.0, 2.0 * hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_minimum() {
        let (x, fx) = golden_section(|x| (x - 1.3) * (x - 1.3) + 2.0, -5.0, 5.0, 1e-12);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn expands_bracket() {
        let (x, _) = minimize_positive(|x| (x - 37.0).powi(2), 1e-12);
        assert!((x - 37.0).abs() < 1e-5);
    }
}
