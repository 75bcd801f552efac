//! Scenario harness: reproduces the AC sweeps, the splitting surface, the
//! closed-loop coupling ramp and the static-vs-adaptive comparison as CSV
//! artifacts plus a JSON summary with the headline numbers.
//!
//! All outputs are deterministic: identical configuration produces
//! byte-identical files.

use serde::Serialize;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::circuit::{
    i2_magnitude, linear_grid, local_maxima, mutual_from_k, resonant_frequency, splitting_surface,
    sweep, CircuitParams,
};
use crate::controller::{
    ControllerState, DEFAULT_F_MAX, DEFAULT_F_MIN, DEFAULT_LEARN_RATE, DEFAULT_SLEW_LIMIT,
};
use crate::error::{ensure_positive, Error, Result};
use crate::transient::{run_scenario, CouplingSchedule, RunRecord, ScenarioTiming, TickRecord};

/// Everything the experiments need: circuit, grids, loop timing, controller
/// settings and the output directory. The defaults reproduce the reference
/// scenario (10 V / 5 ohm / 20 uH / 240.7 nF tanks, 0.2 to 0.9 coupling ramp
/// over 0.02 s, 150 us controller period, 75 kHz start).
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub circuit: CircuitParams,
    /// Coupling coefficients for sweeps, the surface and the comparison.
    pub k_list: Vec<f64>,
    /// Sweep grid lower edge (Hz).
    pub f_min: f64,
    /// Sweep grid upper edge (Hz).
    pub f_max: f64,
    /// Sweep grid size.
    pub f_points: usize,
    /// Controller period (s).
    pub dt_ctrl: f64,
    /// Detection window (s); None = one carrier period.
    pub detect_window: Option<f64>,
    /// Integrator step (s).
    pub step_h: f64,
    /// Adaptive-run duration (s).
    pub duration: f64,
    /// Coupling steps of the adaptive ramp.
    pub ramp_k: Vec<f64>,
    /// Time span over which the ramp steps are spread (s).
    pub ramp_span: f64,
    /// Tracker start frequency (Hz).
    pub start_freq: f64,
    /// Ascent gain (Hz/A).
    pub learn_rate: f64,
    /// Per-tick step cap (Hz).
    pub slew_limit: f64,
    /// Tracker band lower edge (Hz).
    pub ctrl_f_min: f64,
    /// Tracker band upper edge (Hz).
    pub ctrl_f_max: f64,
    /// Duration of each fixed-k comparison run (s).
    pub compare_run: f64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            circuit: CircuitParams::default(),
            k_list: (1..=9).map(|i| i as f64 / 10.0).collect(),
            f_min: 50e3,
            f_max: 125e3,
            f_points: 7501,
            dt_ctrl: 150e-6,
            detect_window: None,
            step_h: 50e-9,
            duration: 0.025,
            ramp_k: (2..=9).map(|i| i as f64 / 10.0).collect(),
            ramp_span: 0.02,
            start_freq: 75e3,
            learn_rate: DEFAULT_LEARN_RATE,
            slew_limit: DEFAULT_SLEW_LIMIT,
            ctrl_f_min: DEFAULT_F_MIN,
            ctrl_f_max: DEFAULT_F_MAX,
            compare_run: 10e-3,
            out_dir: PathBuf::from("wpt-out"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_list.is_empty() {
            return Err(Error::invalid("k_list", "must not be empty"));
        }
        for &k in self.k_list.iter().chain(self.ramp_k.iter()) {
            if !(k > 0.0 && k <= 0.99) {
                return Err(Error::invalid(
                    "k",
                    format!("must lie in (0, 0.99], got {k}"),
                ));
            }
        }
        if self.ramp_k.is_empty() {
            return Err(Error::invalid("ramp_k", "must not be empty"));
        }
        linear_grid(self.f_min, self.f_max, self.f_points)?;
        for (name, v) in [
            ("dt_ctrl", self.dt_ctrl),
            ("step_h", self.step_h),
            ("duration", self.duration),
            ("ramp_span", self.ramp_span),
            ("compare_run", self.compare_run),
            ("learn_rate", self.learn_rate),
            ("slew_limit", self.slew_limit),
        ] {
            ensure_positive(name, v)?;
        }
        if !(self.ctrl_f_min > 0.0 && self.ctrl_f_max > self.ctrl_f_min) {
            return Err(Error::invalid(
                "ctrl_f_min",
                format!(
                    "need 0 < f_min < f_max, got [{}, {}]",
                    self.ctrl_f_min, self.ctrl_f_max
                ),
            ));
        }
        if self.start_freq < self.ctrl_f_min || self.start_freq > self.ctrl_f_max {
            return Err(Error::invalid(
                "start_freq",
                format!(
                    "must lie in the tracker band [{}, {}], got {}",
                    self.ctrl_f_min, self.ctrl_f_max, self.start_freq
                ),
            ));
        }
        if self.compare_run < 5.0 * self.dt_ctrl {
            return Err(Error::invalid(
                "compare_run",
                "must cover at least 5 controller ticks",
            ));
        }
        Ok(())
    }

    pub fn f_grid(&self) -> Result<Vec<f64>> {
        linear_grid(self.f_min, self.f_max, self.f_points)
    }

    fn controller(&self, f_start: f64) -> Result<ControllerState> {
        ControllerState::new(f_start, self.learn_rate, self.ctrl_f_min, self.ctrl_f_max)?
            .with_slew_limit(self.slew_limit)
    }

    fn timing(&self, duration: f64) -> ScenarioTiming {
        ScenarioTiming {
            dt_ctrl: self.dt_ctrl,
            detect_window: self.detect_window,
            h: self.step_h,
            duration,
        }
    }
}

// ---------------------------------------------------------------------------
// summaries

#[derive(Debug, Clone, Serialize)]
pub struct SweepKSummary {
    pub k: f64,
    /// Grid argmax of |I1| (Hz).
    pub argmax_i1_hz: f64,
    /// Grid argmax of |I2| (Hz).
    pub argmax_i2_hz: f64,
    /// Interior local-maximum count of |I1|.
    pub i1_maxima: usize,
    /// Interior local-maximum count of |I2|.
    pub i2_maxima: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub per_k: Vec<SweepKSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RidgePoint {
    pub f_hz: f64,
    pub i2_a: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceKSummary {
    pub k: f64,
    pub ridge: Vec<RidgePoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceSummary {
    pub per_k: Vec<SurfaceKSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdaptiveSummary {
    /// Series resonant frequency of the primary tank (Hz).
    pub f0_hz: f64,
    /// Frequency active in the last controller interval (Hz).
    pub final_freq_hz: f64,
    /// Metric at the last tick (A).
    pub final_metric_a: f64,
    /// Squared final metric (A^2).
    pub final_metric_sq: f64,
    /// Analytic max |I2|^2 at the final coupling (A^2), by dense sweep.
    pub analytic_max_sq: f64,
    /// Time of the first tick below f0 at or after the first k >= 0.6
    /// segment (s); None if the trace never breaks downward.
    pub freq_break_s: Option<f64>,
    /// Largest relative |i2_est - i2_meas| / i2_meas over the ticks after
    /// the tracker's first direction reversal.
    pub max_estimator_err: Option<f64>,
    /// Number of ticks whose retune was clamped to the band.
    pub clamped_ticks: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonRow {
    pub k: f64,
    /// |I2|^2 at the static design frequency (A^2).
    pub static_metric: f64,
    /// Converged closed-loop |I2|^2 (A^2).
    pub dynamic_metric: f64,
    /// 100 (dynamic - static) / static; None when static is zero.
    pub improvement_pct: Option<f64>,
    /// Physical load power 0.5 |I2|^2 r_load at the converged point (W).
    pub p_load_w: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareSummary {
    /// Static design frequency: argmax of |I2| at k = 0.5 (Hz).
    pub f_static_hz: f64,
    pub rows: Vec<ComparisonRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AllSummary {
    pub ac_sweep: SweepSummary,
    pub surface: SurfaceSummary,
    pub adaptive: AdaptiveSummary,
    pub compare: CompareSummary,
}

// ---------------------------------------------------------------------------
// tick-trace helpers

/// Index of the first tick at which the commanded frequency reversed
/// direction (both moves nonzero).
pub fn first_reversal_tick(ticks: &[TickRecord]) -> Option<usize> {
    for i in 2..ticks.len() {
        let d1 = ticks[i].freq - ticks[i - 1].freq;
        let d0 = ticks[i - 1].freq - ticks[i - 2].freq;
        if d0 != 0.0 && d1 != 0.0 && d0.signum() != d1.signum() {
            return Some(i);
        }
    }
    None
}

/// Largest relative estimator error over ticks strictly after `idx`.
pub fn max_estimator_error_after(ticks: &[TickRecord], idx: usize) -> Option<f64> {
    ticks
        .iter()
        .skip(idx + 1)
        .filter(|t| t.i2_amp > 0.0)
        .map(|t| (t.i2_est - t.i2_amp).abs() / t.i2_amp)
        .fold(None, |acc, e| Some(acc.map_or(e, |a: f64| a.max(e))))
}

// ---------------------------------------------------------------------------
// experiments

fn csv_writer(dir: &Path, name: &str) -> Result<BufWriter<fs::File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(fs::File::create(dir.join(name))?))
}

/// Per-k AC sweeps: `sweep_<k>.csv` with columns
/// `f_hz,i1_a,i2_a,zin_ohm,zin_rad`.
pub fn exp_ac_sweep(cfg: &ExperimentConfig) -> Result<SweepSummary> {
    cfg.validate()?;
    let grid = cfg.f_grid()?;
    let mut per_k = Vec::with_capacity(cfg.k_list.len());
    for &k in &cfg.k_list {
        let m = mutual_from_k(k, cfg.circuit.l1, cfg.circuit.l2)?;
        let curve = sweep(&cfg.circuit, m, &grid)?;
        let mut w = csv_writer(&cfg.out_dir, &format!("sweep_{k:.2}.csv"))?;
        writeln!(w, "f_hz,i1_a,i2_a,zin_ohm,zin_rad")?;
        for j in 0..grid.len() {
            writeln!(
                w,
                "{:.3},{:.9e},{:.9e},{:.9e},{:.9e}",
                curve.freqs[j],
                curve.i1_mag[j],
                curve.i2_mag[j],
                curve.zin_mag[j],
                curve.zin_phase[j]
            )?;
        }
        w.flush()?;
        let argmax = |v: &[f64]| {
            let (mut bi, mut bv) = (0usize, f64::MIN);
            for (i, &x) in v.iter().enumerate() {
                if x > bv {
                    bv = x;
                    bi = i;
                }
            }
            grid[bi]
        };
        per_k.push(SweepKSummary {
            k,
            argmax_i1_hz: argmax(&curve.i1_mag),
            argmax_i2_hz: argmax(&curve.i2_mag),
            i1_maxima: local_maxima(&curve.i1_mag, &grid)?.len(),
            i2_maxima: local_maxima(&curve.i2_mag, &grid)?.len(),
        });
    }
    Ok(SweepSummary { per_k })
}

/// |I2| surface over (k, f): `surface.csv` with `k,f_hz,i2_a` and
/// `ridge.csv` with the per-k interior maxima.
pub fn exp_surface(cfg: &ExperimentConfig) -> Result<SurfaceSummary> {
    cfg.validate()?;
    let grid = cfg.f_grid()?;
    let surf = splitting_surface(&cfg.circuit, &cfg.k_list, &grid)?;
    let mut w = csv_writer(&cfg.out_dir, "surface.csv")?;
    writeln!(w, "k,f_hz,i2_a")?;
    for (i, &k) in surf.k_grid.iter().enumerate() {
        for (j, &f) in surf.f_grid.iter().enumerate() {
            writeln!(w, "{:.3},{:.3},{:.9e}", k, f, surf.i2[i][j])?;
        }
    }
    w.flush()?;
    let mut r = csv_writer(&cfg.out_dir, "ridge.csv")?;
    writeln!(r, "k,f_hz,i2_a")?;
    let mut per_k = Vec::with_capacity(surf.k_grid.len());
    for (i, &k) in surf.k_grid.iter().enumerate() {
        let mut ridge = Vec::new();
        for &(f, v) in &surf.maxima[i] {
            writeln!(r, "{:.3},{:.3},{:.9e}", k, f, v)?;
            ridge.push(RidgePoint { f_hz: f, i2_a: v });
        }
        per_k.push(SurfaceKSummary { k, ridge });
    }
    r.flush()?;
    Ok(SurfaceSummary { per_k })
}

/// Build and run the closed-loop coupling-ramp scenario.
pub fn adaptive_run(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let schedule = CouplingSchedule::ramp(&cfg.ramp_k, cfg.ramp_span)?;
    let ctrl = cfg.controller(cfg.start_freq)?;
    run_scenario(
        &cfg.circuit,
        &schedule,
        Some(ctrl),
        cfg.start_freq,
        &cfg.timing(cfg.duration),
    )
}

/// Closed-loop ramp: `adaptive.csv` with one row per controller tick,
/// columns `t_s,k,f_hz,i2_meas_a,i2_est_a,metric_a`.
pub fn exp_adaptive(cfg: &ExperimentConfig) -> Result<AdaptiveSummary> {
    let rec = adaptive_run(cfg)?;
    let mut w = csv_writer(&cfg.out_dir, "adaptive.csv")?;
    writeln!(w, "t_s,k,f_hz,i2_meas_a,i2_est_a,metric_a")?;
    for t in &rec.ticks {
        writeln!(
            w,
            "{:.9},{:.3},{:.3},{:.9e},{:.9e},{:.9e}",
            t.t, t.k, t.freq, t.i2_amp, t.i2_est, t.metric
        )?;
    }
    w.flush()?;
    summarize_adaptive(cfg, &rec)
}

fn summarize_adaptive(cfg: &ExperimentConfig, rec: &RunRecord) -> Result<AdaptiveSummary> {
    let f0 = resonant_frequency(cfg.circuit.l1, cfg.circuit.c1)?;
    let last = rec
        .ticks
        .last()
        .ok_or_else(|| Error::invalid("duration", "run produced no controller ticks"))?;
    let k_final = last.k;
    let m = mutual_from_k(k_final, cfg.circuit.l1, cfg.circuit.l2)?;
    let grid = cfg.f_grid()?;
    let analytic_max = grid
        .iter()
        .map(|&f| i2_magnitude(&cfg.circuit, m, 2.0 * std::f64::consts::PI * f).unwrap_or(0.0))
        .fold(0.0f64, f64::max);
    // downward break: first tick below f0 once a k >= 0.6 segment is active
    let seg = cfg.ramp_span / cfg.ramp_k.len() as f64;
    let t_split = cfg
        .ramp_k
        .iter()
        .position(|&k| k >= 0.6)
        .map(|i| i as f64 * seg);
    let freq_break_s = t_split.and_then(|t0| {
        rec.ticks
            .iter()
            .find(|t| t.t >= t0 && t.freq < f0)
            .map(|t| t.t)
    });
    let max_estimator_err =
        first_reversal_tick(&rec.ticks).and_then(|i| max_estimator_error_after(&rec.ticks, i));
    Ok(AdaptiveSummary {
        f0_hz: f0,
        final_freq_hz: last.freq,
        final_metric_a: last.metric,
        final_metric_sq: last.metric * last.metric,
        analytic_max_sq: analytic_max * analytic_max,
        freq_break_s,
        max_estimator_err,
        clamped_ticks: rec.ticks.iter().filter(|t| t.clamped).count(),
    })
}

/// Static-vs-adaptive comparison: `compare.csv` with columns
/// `k,static_a2,dynamic_a2,improvement_pct,p_load_w`.
///
/// The static arm evaluates |I2|^2 at the fixed frequency that maximizes
/// |I2| for k = 0.5. The dynamic arm runs, per k, a fixed-k closed-loop
/// scenario seeded with the frequency a coupling ramp over `k_list` carries
/// into that k segment, and reads the mean detected |I2| over the last five
/// ticks.
pub fn exp_compare(cfg: &ExperimentConfig) -> Result<CompareSummary> {
    cfg.validate()?;
    let p = &cfg.circuit;
    let grid = cfg.f_grid()?;

    // static design frequency from the k = 0.5 sweep
    let m_half = mutual_from_k(0.5, p.l1, p.l2)?;
    let half = sweep(p, m_half, &grid)?;
    let mut f_static = grid[0];
    let mut best = f64::MIN;
    for (j, &f) in grid.iter().enumerate() {
        if half.i2_mag[j] > best {
            best = half.i2_mag[j];
            f_static = f;
        }
    }
    let w_static = 2.0 * std::f64::consts::PI * f_static;

    // seeding ramp across the comparison couplings
    let seg = cfg.ramp_span / cfg.ramp_k.len() as f64;
    let span = seg * cfg.k_list.len() as f64;
    let schedule = CouplingSchedule::ramp(&cfg.k_list, span)?;
    let ctrl = cfg.controller(cfg.start_freq)?;
    let seed_rec = run_scenario(p, &schedule, Some(ctrl), cfg.start_freq, &cfg.timing(span))?;

    let entry_freq = |t_boundary: f64| -> f64 {
        seed_rec
            .ticks
            .iter()
            .take_while(|t| t.t <= t_boundary + 1e-12)
            .last()
            .map(|t| t.freq_next)
            .unwrap_or(cfg.start_freq)
    };

    let mut rows = Vec::with_capacity(cfg.k_list.len());
    for (i, &k) in cfg.k_list.iter().enumerate() {
        let m = mutual_from_k(k, p.l1, p.l2)?;
        let static_metric = i2_magnitude(p, m, w_static)?.powi(2);

        let seed = entry_freq(seg * i as f64).clamp(cfg.ctrl_f_min, cfg.ctrl_f_max);
        let run = run_scenario(
            p,
            &CouplingSchedule::constant(k)?,
            Some(cfg.controller(seed)?),
            seed,
            &cfg.timing(cfg.compare_run),
        )?;
        let tail = &run.ticks[run.ticks.len() - 5..];
        let dynamic_amp = tail.iter().map(|t| t.i2_amp).sum::<f64>() / 5.0;
        let dynamic_metric = dynamic_amp * dynamic_amp;

        rows.push(ComparisonRow {
            k,
            static_metric,
            dynamic_metric,
            improvement_pct: (static_metric > 1e-12)
                .then(|| 100.0 * (dynamic_metric - static_metric) / static_metric),
            p_load_w: 0.5 * dynamic_metric * p.r_load,
        });
    }

    let mut w = csv_writer(&cfg.out_dir, "compare.csv")?;
    writeln!(w, "k,static_a2,dynamic_a2,improvement_pct,p_load_w")?;
    for r in &rows {
        match r.improvement_pct {
            Some(imp) => writeln!(
                w,
                "{:.3},{:.9e},{:.9e},{:.4},{:.9e}",
                r.k, r.static_metric, r.dynamic_metric, imp, r.p_load_w
            )?,
            None => writeln!(
                w,
                "{:.3},{:.9e},{:.9e},nan,{:.9e}",
                r.k, r.static_metric, r.dynamic_metric, r.p_load_w
            )?,
        }
    }
    w.flush()?;
    Ok(CompareSummary {
        f_static_hz: f_static,
        rows,
    })
}

/// Fixed-width text table of the comparison, suitable for terminal output.
pub fn format_compare_table(summary: &CompareSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "static design frequency: {:.1} Hz\n",
        summary.f_static_hz
    ));
    out.push_str("    k   static [A^2]  dynamic [A^2]  improvement [%]  P_load [W]\n");
    for r in &summary.rows {
        let imp = r
            .improvement_pct
            .map_or_else(|| "      --".to_string(), |v| format!("{v:8.2}"));
        out.push_str(&format!(
            "  {:.2}   {:12.4}  {:13.4}  {:>15}  {:10.4}\n",
            r.k, r.static_metric, r.dynamic_metric, imp, r.p_load_w
        ));
    }
    out
}

/// Run the full reproduction suite and write `summary.json`.
pub fn run_all(cfg: &ExperimentConfig) -> Result<AllSummary> {
    let all = AllSummary {
        ac_sweep: exp_ac_sweep(cfg)?,
        surface: exp_surface(cfg)?,
        adaptive: exp_adaptive(cfg)?,
        compare: exp_compare(cfg)?,
    };
    fs::create_dir_all(&cfg.out_dir)?;
    let mut w = BufWriter::new(fs::File::create(cfg.out_dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut w, &all)
        .map_err(|e| Error::invalid("summary", format!("serialization failed: {e}")))?;
    writeln!(w)?;
    w.flush()?;
    Ok(all)
}
