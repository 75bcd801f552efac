//! Simulation and analysis toolkit for adaptive maximum-power transfer over
//! a magnetically coupled resonant link.
//!
//! The crate covers four layers:
//!
//! - [`circuit`]: exact phasor analysis of the two coupled series-resonant
//!   tanks (input impedance, loop currents, sweeps, frequency-splitting
//!   detection);
//! - [`estimation`]: recovery of the mutual inductance and the secondary
//!   current amplitude from primary-side quantities only;
//! - [`transient`]: fixed-step RK4 time-domain simulation with coupling
//!   schedules, amplitude detection and phase-continuous retuning;
//! - [`controller`]: the discrete gradient-ascent (perturb-and-observe)
//!   frequency tracker closing the loop around the transient plant;
//! - [`experiments`]: scenario harness writing sweep/surface/adaptive/
//!   comparison artifacts as CSV plus a JSON summary.

pub mod circuit;
pub mod controller;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod transient;

pub use circuit::{
    i2_magnitude, input_impedance, linear_grid, local_maxima, mutual_from_k, resonant_frequency,
    solve_phasor, splitting_surface, sweep, tank_reactance, CircuitParams, Coupling,
    PhasorSolution, SurfaceGrid, SweepCurve, K_MAX,
};
pub use controller::{ControllerState, StepOutcome};
pub use error::{Error, Result};
pub use estimation::{
    estimate_i2, m_from_zin_magnitude, m_from_zin_phase, EstimationResult, Method,
    PrimaryMeasurement,
};
pub use experiments::{ComparisonRow, ExperimentConfig};
pub use transient::{
    amplitude_detector, derivatives, rk4_step, run_open_loop, run_scenario, CouplingSchedule,
    RunRecord, ScenarioTiming, TickRecord, TransientState,
};
