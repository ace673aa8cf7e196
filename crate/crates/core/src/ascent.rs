//! One projected ascent step with multiplicative backtracking, shared by the
//! joint solver and the power-difference phase ascent.

use crate::Result;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Policy {
    /// Shrink the step by `c` while the objective decreases, at most
    /// `max_inner` trials. A decrease no larger than `xi` ends the loop
    /// without further shrinking.
    Backtrack { c: f64, max_inner: usize, xi: f64 },
    /// Take the step as is.
    AcceptAll,
}

pub(crate) struct Outcome<X> {
    /// Accepted iterate and its objective value, `None` if every trial
    /// decreased the objective.
    pub accepted: Option<(X, f64)>,
    pub step: f64,
    pub evals: usize,
}

/// `trial(step)` must return the projected candidate and its objective.
pub(crate) fn step<X, F>(current: f64, mut step: f64, policy: Policy, mut trial: F) -> Result<Outcome<X>>
where
    F: FnMut(f64) -> Result<(X, f64)>,
{
    match policy {
        Policy::AcceptAll => {
            let (x, v) = trial(step)?;
            Ok(Outcome {
                accepted: Some((x, v)),
                step,
                evals: 1,
            })
        }
        Policy::Backtrack { c, max_inner, xi } => {
            let mut evals = 0;
            for _ in 0..max_inner {
                let (x, v) = trial(step)?;
                evals += 1;
                // NaN compares false and is treated like a decrease
                let delta = v - current;
                if delta >= 0.0 {
                    return Ok(Outcome {
                        accepted: Some((x, v)),
                        step,
                        evals,
                    });
                }
                step *= c;
                if delta.abs() <= xi {
                    break;
                }
            }
            Ok(Outcome {
                accepted: None,
                step,
                evals,
            })
        }
    }
}
