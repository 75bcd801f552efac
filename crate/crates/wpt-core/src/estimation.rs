//! Recover the mutual inductance and the secondary current amplitude from
//! primary-side quantities only (drive amplitude, primary current amplitude,
//! operating frequency).
//!
//! With `A = w^2 R2 / (R2^2 + X2^2)` and `B = w^2 X2 / (R2^2 + X2^2)`,
//! `|Z_IN|^2 = (R1 + M^2 A)^2 + (X1 - M^2 B)^2` is a quadratic in `t = M^2`:
//!
//! ```text
//! alpha t^2 + 2 beta t + gamma = 0
//! alpha = A^2 + B^2,  beta = R1 A - X1 B,  gamma = R1^2 + X1^2 - |Z_IN|^2
//! ```
//!
//! The magnitude route solves that quadratic; the phase route inverts
//! `tan(angle Z_IN)` instead. The closed loop uses the magnitude route, which
//! needs no phase reference.

use crate::circuit::{i2_magnitude, CircuitParams};
use crate::error::{ensure_positive, Error, Result};
use std::f64::consts::FRAC_PI_2;

/// Relative tolerance for the consistency checks (discriminant, decoupled
/// magnitude floor, phase denominator).
const REL_TOL: f64 = 1e-9;

/// Amplitudes and frequency observed on the primary side.
#[derive(Debug, Clone, Copy)]
pub struct PrimaryMeasurement {
    /// Drive amplitude (V).
    pub v_amp: f64,
    /// Primary current amplitude (A).
    pub i1_amp: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Input-impedance phase (rad), when a phase measurement exists.
    pub zin_phase: Option<f64>,
}

impl PrimaryMeasurement {
    pub fn new(v_amp: f64, i1_amp: f64, omega: f64, zin_phase: Option<f64>) -> Result<Self> {
        ensure_positive("v_amp", v_amp)?;
        ensure_positive("i1_amp", i1_amp)?;
        ensure_positive("omega", omega)?;
        if let Some(ph) = zin_phase {
            if ph.abs() >= FRAC_PI_2 {
                return Err(Error::invalid(
                    "zin_phase",
                    format!("must lie in (-pi/2, pi/2), got {ph}"),
                ));
            }
        }
        Ok(Self {
            v_amp,
            i1_amp,
            omega,
            zin_phase,
        })
    }
}

/// Which inversion produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Magnitude,
    Phase,
}

/// Coefficients of the quadratic in M^2, kept as diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticTerms {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Estimated coupling state and secondary amplitude.
#[derive(Debug, Clone, Copy)]
pub struct EstimationResult {
    /// Estimated mutual inductance (H).
    pub m_est: f64,
    /// Estimated secondary current amplitude (A).
    pub i2_est: f64,
    pub method: Method,
    pub quadratic_terms: QuadraticTerms,
}

fn quadratic_terms(p: &CircuitParams, omega: f64, zin_mag: f64) -> QuadraticTerms {
    let x1 = p.x1(omega);
    let x2 = p.x2(omega);
    let d2 = p.r2 * p.r2 + x2 * x2;
    let a = omega * omega * p.r2 / d2;
    let b = omega * omega * x2 / d2;
    QuadraticTerms {
        alpha: a * a + b * b,
        beta: p.r1 * a - x1 * b,
        gamma: p.r1 * p.r1 + x1 * x1 - zin_mag * zin_mag,
    }
}

/// Invert |Z_IN| to the mutual inductance (H), taking the `+` branch of the
/// quadratic: `M = sqrt((-beta + sqrt(beta^2 - alpha gamma)) / alpha)`.
///
/// For any measurement this circuit can produce in-band, `gamma <= 0` and the
/// `+` branch is the unique non-negative root; a magnitude below the
/// decoupled floor `sqrt(R1^2 + X1^2)` (beyond tolerance) is rejected.
pub fn m_from_zin_magnitude(zin_mag: f64, p: &CircuitParams, omega: f64) -> Result<f64> {
    ensure_positive("omega", omega)?;
    ensure_positive("zin_mag", zin_mag)?;
    let q = quadratic_terms(p, omega, zin_mag);
    let x1 = p.x1(omega);
    let floor2 = p.r1 * p.r1 + x1 * x1;
    let eps = REL_TOL * floor2;
    if q.gamma > eps {
        return Err(Error::InconsistentMeasurement(format!(
            "|Z_IN| = {zin_mag} ohm is below the decoupled magnitude {} ohm at omega = {omega}",
            floor2.sqrt()
        )));
    }
    let disc = q.beta * q.beta - q.alpha * q.gamma;
    if disc < -REL_TOL * q.beta * q.beta {
        return Err(Error::InconsistentMeasurement(format!(
            "negative discriminant for |Z_IN| = {zin_mag} ohm at omega = {omega}"
        )));
    }
    let t = (-q.beta + disc.max(0.0).sqrt()) / q.alpha;
    Ok(t.max(0.0).sqrt())
}

/// Invert the input-impedance phase to the mutual inductance (H):
///
/// ```text
/// M^2 = (X1 R2^2 + X1 X2^2 - tan(phi) (R1 R2^2 + R1 X2^2))
///     / (tan(phi) R2 w^2 + w^2 X2)
/// ```
///
/// Near resonance both X2 and tan(phi) vanish and the denominator carries no
/// information; that region is reported as [`Error::IllConditionedPhase`].
pub fn m_from_zin_phase(zin_phase: f64, p: &CircuitParams, omega: f64) -> Result<f64> {
    ensure_positive("omega", omega)?;
    if zin_phase.abs() >= FRAC_PI_2 {
        return Err(Error::invalid(
            "zin_phase",
            format!("must lie in (-pi/2, pi/2), got {zin_phase}"),
        ));
    }
    let x1 = p.x1(omega);
    let x2 = p.x2(omega);
    let d2 = p.r2 * p.r2 + x2 * x2;
    let tan_phi = zin_phase.tan();
    let w2 = omega * omega;
    let num = x1 * d2 - tan_phi * p.r1 * d2;
    let den = tan_phi * p.r2 * w2 + w2 * x2;
    if den.abs() <= REL_TOL * w2 * p.r2 {
        return Err(Error::IllConditionedPhase(format!(
            "phase {zin_phase} rad at omega = {omega} leaves the inversion denominator near zero"
        )));
    }
    let t = num / den;
    if t < -REL_TOL * (x1 * x1 + p.r1 * p.r1) / den.abs() {
        return Err(Error::InconsistentMeasurement(format!(
            "phase {zin_phase} rad at omega = {omega} yields a negative M^2"
        )));
    }
    Ok(t.max(0.0).sqrt())
}

/// Full primary-side estimate: `|Z_IN| = v_amp / i1_amp`, M by the magnitude
/// route, then the closed-form |I2| at the estimated M.
pub fn estimate_i2(meas: &PrimaryMeasurement, p: &CircuitParams) -> Result<EstimationResult> {
    let zin_mag = meas.v_amp / meas.i1_amp;
    let m_est = m_from_zin_magnitude(zin_mag, p, meas.omega)?;
    let i2_est = i2_magnitude(p, m_est, meas.omega)?;
    Ok(EstimationResult {
        m_est,
        i2_est,
        method: Method::Magnitude,
        quadratic_terms: quadratic_terms(p, meas.omega, zin_mag),
    })
}
