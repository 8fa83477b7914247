//! Central-finite-difference verification of analytic gradients.

/// Outcome of one gradient comparison.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub checked: usize,
}

/// Relative error with an absolute fallback when both values are tiny.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs());
    if denom < 1e-8 {
        (a - b).abs()
    } else {
        (a - b).abs() / denom
    }
}

/// Compare `analytic` against central differences of `f` around `x0`.
///
/// `f` must be a pure function of its argument. The default step 1e-5
/// balances truncation against cancellation in double precision.
pub fn check_gradient<F>(x0: &[f64], analytic: &[f64], step: f64, mut f: F) -> GradCheckReport
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(x0.len(), analytic.len());
    let mut x = x0.to_vec();
    let mut max_rel_err: f64 = 0.0;
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + step;
        let fp = f(&x);
        x[i] = orig - step;
        let fm = f(&x);
        x[i] = orig;
        let numeric = (fp - fm) / (2.0 * step);
        max_rel_err = max_rel_err.max(rel_err(analytic[i], numeric));
    }
    GradCheckReport {
        max_rel_err,
        checked: x0.len(),
    }
}

pub const DEFAULT_STEP: f64 = 1e-5;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function_checks_to_machine_precision() {
        let coeffs = [2.0, -3.0, 0.5];
        let x0 = [1.0, 2.0, -1.5];
        let f = |x: &[f64]| x.iter().zip(&coeffs).map(|(a, b)| a * b).sum::<f64>();
        let report = check_gradient(&x0, &coeffs, DEFAULT_STEP, f);
        assert!(report.max_rel_err < 1e-9, "err {}", report.max_rel_err);
        assert_eq!(report.checked, 3);
    }

    #[test]
    fn quadratic_function_gradient() {
        let x0 = [0.7, -1.3];
        let f = |x: &[f64]| x[0] * x[0] + 3.0 * x[0] * x[1];
        let analytic = [2.0 * x0[0] + 3.0 * x0[1], 3.0 * x0[0]];
        let report = check_gradient(&x0, &analytic, DEFAULT_STEP, f);
        assert!(report.max_rel_err < 1e-8, "err {}", report.max_rel_err);
    }

    #[test]
    fn detects_a_wrong_gradient() {
        let x0 = [1.0];
        let f = |x: &[f64]| x[0] * x[0];
        let wrong = [1.0]; // true gradient is 2.0
        let report = check_gradient(&x0, &wrong, DEFAULT_STEP, f);
        assert!(report.max_rel_err > 0.4);
    }
}
