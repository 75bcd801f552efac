//! Flat `key = value` configuration files and flag overrides.
//!
//! Values use plain SI units with exponent notation (`l1 = 20e-6`); lists
//! are comma-separated (`k_list = 0.1, 0.2, 0.3`). Flags win over the file,
//! the file wins over the built-in defaults.

use std::path::{Path, PathBuf};

use wpt_core::circuit::CircuitParams;
use wpt_core::error::{Error, Result};
use wpt_core::experiments::ExperimentConfig;

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::InvalidParam {
        name: "config",
        reason: format!("`{key}`: expected a number, got `{value}`"),
    })
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse::<usize>().map_err(|_| Error::InvalidParam {
        name: "config",
        reason: format!("`{key}`: expected an integer, got `{value}`"),
    })
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|s| parse_f64(key, s.trim())).collect()
}

/// Apply one configuration file onto `cfg`.
pub fn apply_config_file(cfg: &mut ExperimentConfig, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidParam {
                name: "config",
                reason: format!("line {}: expected `key = value`, got `{line}`", lineno + 1),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "v_amp" => cfg.circuit.v_amp = parse_f64(key, value)?,
            "r1" => cfg.circuit.r1 = parse_f64(key, value)?,
            "l1" => cfg.circuit.l1 = parse_f64(key, value)?,
            "c1" => cfg.circuit.c1 = parse_f64(key, value)?,
            "r2" => cfg.circuit.r2 = parse_f64(key, value)?,
            "r_load" => cfg.circuit.r_load = parse_f64(key, value)?,
            "l2" => cfg.circuit.l2 = parse_f64(key, value)?,
            "c2" => cfg.circuit.c2 = parse_f64(key, value)?,
            "k_list" => cfg.k_list = parse_list(key, value)?,
            "ramp_k" => cfg.ramp_k = parse_list(key, value)?,
            "f_min" => cfg.f_min = parse_f64(key, value)?,
            "f_max" => cfg.f_max = parse_f64(key, value)?,
            "points" => cfg.f_points = parse_usize(key, value)?,
            "dt_ctrl" => cfg.dt_ctrl = parse_f64(key, value)?,
            "detect_window" => cfg.detect_window = Some(parse_f64(key, value)?),
            "h" | "step_h" => cfg.step_h = parse_f64(key, value)?,
            "duration" => cfg.duration = parse_f64(key, value)?,
            "ramp_span" => cfg.ramp_span = parse_f64(key, value)?,
            "start_freq" => cfg.start_freq = parse_f64(key, value)?,
            "learn_rate" => cfg.learn_rate = parse_f64(key, value)?,
            "slew_limit" => cfg.slew_limit = parse_f64(key, value)?,
            "ctrl_f_min" => cfg.ctrl_f_min = parse_f64(key, value)?,
            "ctrl_f_max" => cfg.ctrl_f_max = parse_f64(key, value)?,
            "compare_run" => cfg.compare_run = parse_f64(key, value)?,
            "out_dir" => cfg.out_dir = PathBuf::from(value),
            _ => {
                return Err(Error::InvalidParam {
                    name: "config",
                    reason: format!("unknown key `{key}` on line {}", lineno + 1),
                })
            }
        }
    }
    Ok(())
}

/// Re-run the domain checks on circuit values that may have been edited
/// field-by-field.
pub fn revalidate_circuit(cfg: &ExperimentConfig) -> Result<()> {
    let c = &cfg.circuit;
    CircuitParams::new(c.v_amp, c.r1, c.l1, c.c1, c.r2, c.r_load, c.l2, c.c2)?;
    Ok(())
}
