//! Steady-state (phasor) analysis of two magnetically coupled series-resonant
//! tanks: input impedance, loop currents, frequency sweeps and local-maximum
//! (frequency-splitting) detection.
//!
//! The drive is an ideal sinusoid `V` applied to the primary loop; the two
//! Kirchhoff loop equations are
//!
//! ```text
//! V = I1 (R1 + jwL1 + 1/jwC1) - jwM I2
//! 0 = -jwM I1 + I2 (R2 + jwL2 + 1/jwC2)
//! ```
//!
//! so the secondary reflects `(wM)^2 / (R2 + jX2)` into the primary.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{ensure_positive, Error, Result};

/// Upper bound accepted for the coupling coefficient; the transient plant is
/// singular at k = 1.
pub const K_MAX: f64 = 0.99;

/// Element values of both tanks plus the drive amplitude.
///
/// `r2` is the total secondary resistance (parasitic + load); `r_load` is the
/// portion treated as the load when reporting delivered power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Drive sinusoid amplitude (V).
    pub v_amp: f64,
    /// Primary resistance (ohm).
    pub r1: f64,
    /// Primary inductance (H).
    pub l1: f64,
    /// Primary capacitance (F).
    pub c1: f64,
    /// Total secondary resistance (ohm).
    pub r2: f64,
    /// Load portion of `r2` (ohm), `0 <= r_load <= r2`.
    pub r_load: f64,
    /// Secondary inductance (H).
    pub l2: f64,
    /// Secondary capacitance (F).
    pub c2: f64,
}

impl CircuitParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        v_amp: f64,
        r1: f64,
        l1: f64,
        c1: f64,
        r2: f64,
        r_load: f64,
        l2: f64,
        c2: f64,
    ) -> Result<Self> {
        let fields = [
            ("v_amp", v_amp),
            ("r1", r1),
            ("l1", l1),
            ("c1", c1),
            ("r2", r2),
            ("l2", l2),
            ("c2", c2),
        ];
        for (name, v) in fields {
            ensure_positive(name, v)?;
        }
        if !(0.0..=r2).contains(&r_load) {
            return Err(Error::invalid(
                "r_load",
                format!("must lie in [0, r2 = {r2}], got {r_load}"),
            ));
        }
        Ok(Self {
            v_amp,
            r1,
            l1,
            c1,
            r2,
            r_load,
            l2,
            c2,
        })
    }

    /// Primary-side series reactance at `omega` (rad/s).
    pub fn x1(&self, omega: f64) -> f64 {
        omega * self.l1 - 1.0 / (omega * self.c1)
    }

    /// Secondary-side series reactance at `omega` (rad/s).
    pub fn x2(&self, omega: f64) -> f64 {
        omega * self.l2 - 1.0 / (omega * self.c2)
    }
}

/// Reference element values: 10 V drive, 5 ohm / 20 uH / 240.7 nF per side,
/// all of the secondary resistance treated as load.
impl Default for CircuitParams {
    fn default() -> Self {
        Self {
            v_amp: 10.0,
            r1: 5.0,
            l1: 20e-6,
            c1: 240.7e-9,
            r2: 5.0,
            r_load: 5.0,
            l2: 20e-6,
            c2: 240.7e-9,
        }
    }
}

/// A validated (k, M) pair; one is always derived from the other via
/// `M = k * sqrt(L1 * L2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    k: f64,
    m: f64,
}

impl Coupling {
    pub fn from_k(k: f64, l1: f64, l2: f64) -> Result<Self> {
        Self::from_k_capped(k, l1, l2, K_MAX)
    }

    /// Like [`Coupling::from_k`] with a caller-chosen upper cap (< 1; the
    /// transient plant is singular at k = 1).
    pub fn from_k_capped(k: f64, l1: f64, l2: f64, cap: f64) -> Result<Self> {
        if !(cap > 0.0 && cap < 1.0) {
            return Err(Error::invalid(
                "cap",
                format!("must lie in (0, 1), got {cap}"),
            ));
        }
        if !k.is_finite() || k <= 0.0 || k > cap {
            return Err(Error::invalid(
                "k",
                format!("coupling coefficient must lie in (0, {cap}], got {k}"),
            ));
        }
        Ok(Self {
            k,
            m: k * (l1 * l2).sqrt(),
        })
    }

    pub fn from_m(m: f64, l1: f64, l2: f64) -> Result<Self> {
        let k = m / (l1 * l2).sqrt();
        Self::from_k(k, l1, l2).map_err(|_| {
            Error::invalid(
                "m",
                format!("mutual inductance {m} implies k = {k} outside (0, {K_MAX}]"),
            )
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Mutual inductance (H).
    pub fn m(&self) -> f64 {
        self.m
    }
}

/// Exact solution of the two loop equations at one (M, omega) operating point.
#[derive(Debug, Clone, Copy)]
pub struct PhasorSolution {
    /// Primary loop current (A).
    pub i1: Complex64,
    /// Secondary loop current (A).
    pub i2: Complex64,
    /// Input impedance V / I1 (ohm).
    pub z_in: Complex64,
    /// Angular frequency (rad/s).
    pub omega: f64,
}

/// One frequency sweep: per-point current magnitudes and input impedance.
#[derive(Debug, Clone)]
pub struct SweepCurve {
    /// Grid frequencies (Hz), strictly increasing.
    pub freqs: Vec<f64>,
    /// |I1| (A).
    pub i1_mag: Vec<f64>,
    /// |I2| (A).
    pub i2_mag: Vec<f64>,
    /// |Z_IN| (ohm).
    pub zin_mag: Vec<f64>,
    /// Input impedance phase (rad).
    pub zin_phase: Vec<f64>,
}

/// |I2| over a (k, f) grid plus the per-k frequency-axis maxima.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub k_grid: Vec<f64>,
    pub f_grid: Vec<f64>,
    /// `i2[i][j]` = |I2| at (`k_grid[i]`, `f_grid[j]`).
    pub i2: Vec<Vec<f64>>,
    /// Per-k list of interior maxima as (frequency Hz, |I2| A).
    pub maxima: Vec<Vec<(f64, f64)>>,
}

fn check_omega(omega: f64) -> Result<()> {
    ensure_positive("omega", omega)
}

/// Series-tank reactance `wL - 1/(wC)` (ohm).
pub fn tank_reactance(l: f64, c: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok(omega * l - 1.0 / (omega * c))
}

/// Series resonant frequency `1 / (2 pi sqrt(LC))` (Hz).
pub fn resonant_frequency(l: f64, c: f64) -> Result<f64> {
    ensure_positive("l", l)?;
    ensure_positive("c", c)?;
    Ok(1.0 / (2.0 * PI * (l * c).sqrt()))
}

/// Mutual inductance from a coupling coefficient: `M = k sqrt(L1 L2)` (H).
///
/// Accepts the full physical range `0 <= k < 1` (a zero here simply means
/// decoupled coils; the stricter `Coupling` type is for operating points).
pub fn mutual_from_k(k: f64, l1: f64, l2: f64) -> Result<f64> {
    if !k.is_finite() || !(0.0..1.0).contains(&k) {
        return Err(Error::invalid("k", format!("must lie in [0, 1), got {k}")));
    }
    Ok(k * (l1 * l2).sqrt())
}

/// Primary-side input impedance: series tank 1 plus the reflected secondary,
/// `Z_IN = R1 + jX1 + (wM)^2 / (R2 + jX2)` (ohm).
pub fn input_impedance(p: &CircuitParams, m: f64, omega: f64) -> Result<Complex64> {
    check_omega(omega)?;
    let z1 = Complex64::new(p.r1, p.x1(omega));
    let z2 = Complex64::new(p.r2, p.x2(omega));
    let wm = omega * m;
    Ok(z1 + wm * wm / z2)
}

/// Solve both loop equations for (I1, I2) at one operating point.
pub fn solve_phasor(p: &CircuitParams, m: f64, omega: f64) -> Result<PhasorSolution> {
    let z_in = input_impedance(p, m, omega)?;
    let z2 = Complex64::new(p.r2, p.x2(omega));
    let v = Complex64::new(p.v_amp, 0.0);
    let i1 = v / z_in;
    let i2 = Complex64::new(0.0, omega * m) * i1 / z2;
    Ok(PhasorSolution {
        i1,
        i2,
        z_in,
        omega,
    })
}

/// Secondary current amplitude by the closed-form real-arithmetic expression
///
/// ```text
/// |I2| = wMV / ( sqrt(R2^2+X2^2)
///        * sqrt( (R1 + (wM)^2 R2/(R2^2+X2^2))^2 + (X1 - (wM)^2 X2/(R2^2+X2^2))^2 ) )
/// ```
///
/// Kept in real arithmetic deliberately so that it cross-checks the complex
/// route in [`solve_phasor`].
pub fn i2_magnitude(p: &CircuitParams, m: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let x1 = p.x1(omega);
    let x2 = p.x2(omega);
    let wm2 = (omega * m) * (omega * m);
    let d2 = p.r2 * p.r2 + x2 * x2;
    let re = p.r1 + wm2 * p.r2 / d2;
    let im = x1 - wm2 * x2 / d2;
    Ok(omega * m.abs() * p.v_amp / (d2.sqrt() * (re * re + im * im).sqrt()))
}

/// Evaluate [`solve_phasor`] over a frequency grid (Hz).
pub fn sweep(p: &CircuitParams, m: f64, f_grid: &[f64]) -> Result<SweepCurve> {
    if f_grid.is_empty() {
        return Err(Error::invalid("f_grid", "must not be empty"));
    }
    if f_grid[0] <= 0.0 {
        return Err(Error::invalid("f_grid", "frequencies must be positive"));
    }
    if f_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("f_grid", "must be strictly increasing"));
    }
    let n = f_grid.len();
    let mut curve = SweepCurve {
        freqs: f_grid.to_vec(),
        i1_mag: Vec::with_capacity(n),
        i2_mag: Vec::with_capacity(n),
        zin_mag: Vec::with_capacity(n),
        zin_phase: Vec::with_capacity(n),
    };
    for &f in f_grid {
        let sol = solve_phasor(p, m, 2.0 * PI * f)?;
        curve.i1_mag.push(sol.i1.norm());
        curve.i2_mag.push(sol.i2.norm());
        curve.zin_mag.push(sol.z_in.norm());
        curve.zin_phase.push(sol.z_in.arg());
    }
    Ok(curve)
}

/// Strictly interior local maxima of `values` over `freqs`.
///
/// Endpoints are never reported; a plateau flanked by lower values on both
/// sides is reported once, at its midpoint.
pub fn local_maxima(values: &[f64], freqs: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.len() != freqs.len() {
        return Err(Error::invalid(
            "values",
            "values and freqs must have equal length",
        ));
    }
    if values.len() < 3 {
        return Err(Error::invalid("values", "need at least 3 samples"));
    }
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if values[i] > values[i - 1] {
            // extend over a possible plateau
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[j] {
                j += 1;
            }
            if j < n - 1 && values[j] > values[j + 1] {
                let mid = (i + j) / 2;
                out.push((freqs[mid], values[mid]));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    Ok(out)
}

/// |I2| over the outer product of `k_grid` and `f_grid`, with per-k maxima.
pub fn splitting_surface(p: &CircuitParams, k_grid: &[f64], f_grid: &[f64]) -> Result<SurfaceGrid> {
    if k_grid.is_empty() {
        return Err(Error::invalid("k_grid", "must not be empty"));
    }
    let mut i2 = Vec::with_capacity(k_grid.len());
    let mut maxima = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let m = mutual_from_k(k, p.l1, p.l2)?;
        let curve = sweep(p, m, f_grid)?;
        maxima.push(local_maxima(&curve.i2_mag, f_grid)?);
        i2.push(curve.i2_mag);
    }
    Ok(SurfaceGrid {
        k_grid: k_grid.to_vec(),
        f_grid: f_grid.to_vec(),
        i2,
        maxima,
    })
}

/// Build a uniform, strictly increasing frequency grid (Hz).
pub fn linear_grid(f_min: f64, f_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::invalid(
            "points",
            format!("need at least 2 grid points, got {points}"),
        ));
    }
    ensure_positive("f_min", f_min)?;
    if !f_max.is_finite() || f_max <= f_min {
        return Err(Error::invalid(
            "f_min",
            format!("need 0 < f_min < f_max, got [{f_min}, {f_max}]"),
        ));
    }
    let step = (f_max - f_min) / (points - 1) as f64;
    Ok((0..points).map(|i| f_min + step * i as f64).collect())
}
