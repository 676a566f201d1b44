use super::{NumericError, Scalar, Tensor};

/// Verdict for one parameter tensor from [`finite_diff_check`].
///
/// `max_ratio` is the largest value of `|analytic - numeric| /
/// (atol + rtol * max(|analytic|, |numeric|))` over the tensor's elements;
/// the check passes when every ratio is at most 1.
#[derive(Debug, Clone)]
pub struct ParamCheck<S> {
    pub index: usize,
    pub pass: bool,
    pub max_ratio: S,
    pub worst_element: usize,
    pub analytic_at_worst: S,
    pub numeric_at_worst: S,
}

#[derive(Debug, Clone)]
pub struct FiniteDiffReport<S> {
    pub params: Vec<ParamCheck<S>>,
    pub pass: bool,
}

impl<S: Scalar> FiniteDiffReport<S> {
    /// Worst parameter by violation ratio, for one-line diagnostics.
    pub fn worst(&self) -> Option<&ParamCheck<S>> {
        self.params
            .iter()
            .max_by(|a, b| a.max_ratio.partial_cmp(&b.max_ratio).unwrap())
    }
}

/// Compare analytic gradients against central finite differences of
/// `loss_fn`, element by element.
///
/// `loss_fn` must be a pure function of `params`; it is evaluated twice on
/// the unperturbed parameters first, and any disagreement is reported as
/// nondeterminism (a nondeterministic loss makes the comparison
/// meaningless). Parameters are perturbed in place and always restored.
pub fn finite_diff_check<S, F>(
    mut loss_fn: F,
    params: &mut [Tensor<S>],
    analytic: &[Tensor<S>],
    step: S,
    rtol: S,
    atol: S,
) -> Result<FiniteDiffReport<S>, NumericError>
where
    S: Scalar,
    F: FnMut(&[Tensor<S>]) -> Result<S, NumericError>,
{
    if params.len() != analytic.len() {
        return Err(NumericError::ShapeMismatch {
            op: "finite_diff_check",
            lhs: format!("{} parameter tensors", params.len()),
            rhs: format!("{} gradient tensors", analytic.len()),
        });
    }
    for (p, a) in params.iter().zip(analytic) {
        if p.shape() != a.shape() {
            return Err(NumericError::ShapeMismatch {
                op: "finite_diff_check",
                lhs: p.fmt_shape(),
                rhs: a.fmt_shape(),
            });
        }
    }

    let base1 = loss_fn(params)?;
    let base2 = loss_fn(params)?;
    if base1 != base2 {
        return Err(NumericError::NonDeterministic {
            first: format!("{base1}"),
            second: format!("{base2}"),
        });
    }

    let two = S::from_f64(2.0);
    let mut checks = Vec::with_capacity(params.len());
    for pi in 0..params.len() {
        let mut worst = ParamCheck {
            index: pi,
            pass: true,
            max_ratio: S::zero(),
            worst_element: 0,
            analytic_at_worst: S::zero(),
            numeric_at_worst: S::zero(),
        };
        for ei in 0..params[pi].len() {
            let saved = params[pi].data()[ei];
            params[pi].data_mut()[ei] = saved + step;
            let plus = loss_fn(params)?;
            params[pi].data_mut()[ei] = saved - step;
            let minus = loss_fn(params)?;
            params[pi].data_mut()[ei] = saved;

            let numeric = (plus - minus) / (two * step);
            let a = analytic[pi].data()[ei];
            let tol = atol + rtol * a.abs().max(numeric.abs());
            let ratio = (a - numeric).abs() / tol;
            if ratio > worst.max_ratio {
                worst.max_ratio = ratio;
                worst.worst_element = ei;
                worst.analytic_at_worst = a;
                worst.numeric_at_worst = numeric;
            }
        }
        worst.pass = worst.max_ratio <= S::one();
        checks.push(worst);
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(FiniteDiffReport { params: checks, pass })
}
