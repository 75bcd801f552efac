//! Discrete gradient-ascent frequency tracker (perturb-and-observe on the
//! estimated secondary current amplitude).
//!
//! Each tick moves the operating frequency by
//! `learn_rate * (metric_new - metric_prev) * sign(f_curr - f_prev)`,
//! with `sign(0) = +1`, the step magnitude capped at `slew_limit`, and the
//! result clamped to `[f_min, f_max]`. The slew cap keeps the loop stable
//! through coupling steps, where the metric jumps by hundreds of mA between
//! ticks and the raw product would leave the band in one move.

use crate::error::{ensure_positive, Error, Result};

/// Step gain of the ascent law (Hz per ampere).
pub const DEFAULT_LEARN_RATE: f64 = 8e5;
/// Default per-tick cap on the frequency move (Hz).
pub const DEFAULT_SLEW_LIMIT: f64 = 1e3;
/// Default tracking band (Hz); contains every |I2| maximum of the reference
/// circuit for k up to 0.9.
pub const DEFAULT_F_MIN: f64 = 55e3;
pub const DEFAULT_F_MAX: f64 = 100e3;

/// Tracker memory: the two most recent frequencies and metric values.
#[derive(Debug, Clone, Copy)]
pub struct ControllerState {
    f_curr: f64,
    f_prev: f64,
    metric_prev: f64,
    metric_prev2: f64,
    learn_rate: f64,
    slew_limit: f64,
    f_min: f64,
    f_max: f64,
}

/// Result of one ascent tick.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    /// Frequency to drive next (Hz), already clamped.
    pub f_next: f64,
    /// Whether the raw proposal left `[f_min, f_max]` and was clamped.
    pub clamped: bool,
}

impl ControllerState {
    /// Start the tracker at `f_start`; both frequency memories equal the
    /// start value and the metric memories are zero.
    pub fn new(f_start: f64, learn_rate: f64, f_min: f64, f_max: f64) -> Result<Self> {
        ensure_positive("f_min", f_min)?;
        if !f_max.is_finite() || f_max <= f_min {
            return Err(Error::invalid(
                "f_min",
                format!("need 0 < f_min < f_max, got [{f_min}, {f_max}]"),
            ));
        }
        if !(f_start >= f_min && f_start <= f_max) {
            return Err(Error::invalid(
                "f_start",
                format!("must lie in [{f_min}, {f_max}], got {f_start}"),
            ));
        }
        ensure_positive("learn_rate", learn_rate)?;
        Ok(Self {
            f_curr: f_start,
            f_prev: f_start,
            metric_prev: 0.0,
            metric_prev2: 0.0,
            learn_rate,
            slew_limit: DEFAULT_SLEW_LIMIT,
            f_min,
            f_max,
        })
    }

    /// Replace the per-tick step cap (Hz).
    pub fn with_slew_limit(mut self, slew_limit: f64) -> Result<Self> {
        ensure_positive("slew_limit", slew_limit)?;
        self.slew_limit = slew_limit;
        Ok(self)
    }

    pub fn f_curr(&self) -> f64 {
        self.f_curr
    }

    pub fn f_prev(&self) -> f64 {
        self.f_prev
    }

    pub fn metric_prev(&self) -> f64 {
        self.metric_prev
    }

    pub fn metric_prev2(&self) -> f64 {
        self.metric_prev2
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    /// One perturb-and-observe tick with the newest metric sample.
    pub fn ascent_step(&mut self, metric_new: f64) -> Result<StepOutcome> {
        if !metric_new.is_finite() || metric_new < 0.0 {
            return Err(Error::invalid(
                "metric_new",
                format!("must be finite and non-negative, got {metric_new}"),
            ));
        }
        let delta = metric_new - self.metric_prev;
        let direction = if self.f_curr >= self.f_prev {
            1.0
        } else {
            -1.0
        };
        let raw = self.learn_rate * delta * direction;
        let step = raw.clamp(-self.slew_limit, self.slew_limit);
        let proposal = self.f_curr + step;
        let f_next = proposal.clamp(self.f_min, self.f_max);
        let clamped = proposal != f_next;
        self.f_prev = self.f_curr;
        self.f_curr = f_next;
        self.metric_prev2 = self.metric_prev;
        self.metric_prev = metric_new;
        Ok(StepOutcome { f_next, clamped })
    }
}
