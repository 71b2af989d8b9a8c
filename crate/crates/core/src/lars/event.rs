use super::{MoveDirection, Mode};
use crate::data::{EventKind, ExpandedDesign, PathEvent};
use crate::error::{Error, Result};

/// A join or drop this close to the full-fit step is treated as reaching the
/// full fit.
const FULL_FIT_MARGIN: f64 = 1e-10;

/// Inputs for locating the next breakpoint along `β + γρ`.
pub(crate) struct EventSearch<'a> {
    /// Correlations `X̃ᵀr` at the current point.
    pub c: &'a [f64],
    /// Correlation decay rates `X̃ᵀX̃ρ`.
    pub a: &'a [f64],
    pub beta: &'a [f64],
    pub direction: &'a MoveDirection,
    pub mode: Mode,
    /// Columns that may not join on this segment.
    pub blocked: &'a [bool],
    /// Remaining room before an early stop on the path parameter.
    pub max_gamma: Option<f64>,
    pub stop_lambda: Option<f64>,
}

impl EventSearch<'_> {
    pub fn find(&self) -> Result<PathEvent> {
        let support = &self.direction.support;
        let reference = *support
            .iter()
            .max_by(|&&i, &&j| self.c[i].total_cmp(&self.c[j]).then(j.cmp(&i)))
            .ok_or_else(|| Error::InternalConsistency("event search along a zero direction".into()))?;
        let (c_ref, a_ref) = (self.c[reference], self.a[reference]);
        if !(a_ref > 0.0) || !(c_ref > 0.0) {
            return Err(Error::InternalConsistency(format!(
                "active correlation {c_ref} does not decrease along the direction (rate {a_ref})"
            )));
        }
        let gamma_full = c_ref / a_ref;

        let mut best: Option<PathEvent> = None;
        let mut offer = |kind, index, gamma: f64| {
            if gamma > 0.0 && gamma.is_finite() && best.is_none_or(|b: PathEvent| gamma < b.gamma) {
                best = Some(PathEvent {
                    kind,
                    index: Some(index),
                    gamma,
                });
            }
        };

        for j in 0..self.c.len() {
            if self.blocked[j] {
                continue;
            }
            let rate = a_ref - self.a[j];
            if rate > 0.0 {
                offer(EventKind::Join, j, (c_ref - self.c[j]) / rate);
            }
        }
        if self.mode == Mode::Lasso {
            for &k in support {
                let r = self.direction.rho[k];
                if r < 0.0 && self.beta[k] > 0.0 {
                    offer(EventKind::HitZero, k, self.beta[k] / -r);
                }
            }
        }

        let mut event = match best {
            Some(e) if e.gamma < gamma_full * (1.0 - FULL_FIT_MARGIN) => e,
            _ => PathEvent {
                kind: EventKind::FullLeastSquares,
                index: None,
                gamma: gamma_full,
            },
        };

        let mut stop = f64::INFINITY;
        if let Some(g) = self.max_gamma {
            stop = stop.min(g);
        }
        if let Some(lambda) = self.stop_lambda {
            stop = stop.min((c_ref - lambda) / a_ref);
        }
        if stop <= event.gamma {
            event = PathEvent {
                kind: EventKind::EarlyStop,
                index: None,
                gamma: stop.max(0.0),
            };
        }
        Ok(event)
    }
}

/// The first breakpoint reached when moving from `beta` along `direction`.
///
/// Correlations change linearly along the segment, `c_j(γ) = c_j − γ a_j`
/// with `a = X̃ᵀX̃ρ`, so each candidate event has a closed-form step length:
/// a column outside the active set joins when its correlation meets the
/// active one, a lasso coefficient reaches zero at `β_k / −ρ_k`, and the full
/// least-squares fit is reached when the active correlation hits zero.
pub fn next_event(
    design: &ExpandedDesign,
    beta: &[f64],
    direction: &MoveDirection,
    mode: Mode,
) -> Result<PathEvent> {
    if direction.rho.len() != design.width() || beta.len() != design.width() {
        return Err(Error::Dimension(format!(
            "expected vectors of length {}",
            design.width()
        )));
    }
    let c = design.correlations(beta).to_vec();
    let a = design.gram_times(&direction.rho).to_vec();
    let mut blocked = vec![false; design.width()];
    for &k in &direction.active {
        blocked[k] = true;
    }
    for &k in &direction.support {
        blocked[design.partner(k)] = true;
    }
    EventSearch {
        c: &c,
        a: &a,
        beta,
        direction,
        mode,
        blocked: &blocked,
        max_gamma: None,
        stop_lambda: None,
    }
    .find()
}
