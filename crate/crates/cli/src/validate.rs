//! Dry-run precondition checks. Diagnostics are data: an empty list means
//! the configuration is runnable.

use serde::Serialize;

use crate::config::{CommandKind, ExperimentConfig};
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    fn new(code: &str, message: impl ToString) -> Self {
        Self {
            code: code.to_string(),
            message: message.to_string(),
        }
    }

    fn from_error(e: &CliError) -> Self {
        Self::new(e.code(), e)
    }
}

/// Check every numeric parameter against the preconditions of the target
/// operation without executing it.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    match collect(cfg, &mut diags) {
        Ok(()) => diags,
        Err(e) => {
            diags.push(Diagnostic::from_error(&e));
            diags
        }
    }
}

fn collect(cfg: &ExperimentConfig, diags: &mut Vec<Diagnostic>) -> crate::error::Result<()> {
    match cfg.command {
        CommandKind::PhotonDist | CommandKind::ReproduceFig1 => {
            let (z2, m) = if cfg.command == CommandKind::PhotonDist {
                let z2 = cfg.get_f64("z_re")?.powi(2) + cfg.get_f64("z_im")?.powi(2);
                (z2, cfg.get_usize("m")?)
            } else {
                (49.0, 1)
            };
            let n_max = cfg.get_usize("n_max")?;
            let dim = n_max + 1;
            if z2 > dim as f64 / 4.0 {
                diags.push(Diagnostic::new(
                    "E_TRUNCATION_TOO_SMALL",
                    format!("|z|^2 = {z2:.3} exceeds (n_max+1)/4 = {:.3}", dim as f64 / 4.0),
                ));
            }
            if m + 4 > dim {
                diags.push(Diagnostic::new(
                    "E_TRUNCATION_TOO_SMALL",
                    format!("initial level m = {m} leaves no room below n_max = {n_max}"),
                ));
            }
        }
        CommandKind::Drive => {
            let tau = cfg.get_f64("tau")?;
            let dim = cfg.get_usize("dim")?;
            let (t0, t1) = (cfg.get_f64("t_start")?, cfg.get_f64("t_end")?);
            if tau <= 0.0 {
                diags.push(Diagnostic::new("E_INVALID_INPUT", "tau must be > 0"));
            }
            if t1 <= t0 {
                diags.push(Diagnostic::new("E_INVALID_INPUT", "need t_end > t_start"));
            }
            if dim < 2 {
                diags.push(Diagnostic::new("E_INVALID_INPUT", "dim must be >= 2"));
            }
            if cfg.get_usize("psi0_m")? >= dim.max(1) {
                diags.push(Diagnostic::new(
                    "E_INVALID_INPUT",
                    "psi0_m lies outside the basis",
                ));
            }
            if tau > 0.0 {
                let omega = cfg.get_f64("omega")?;
                let amp = cfg.get_f64("amplitude")?;
                let z_est = (amp * tau * (2.0 * std::f64::consts::PI).sqrt()
                    * (-omega * omega * tau * tau / 2.0).exp())
                .abs();
                if z_est * z_est > dim as f64 / 4.0 {
                    diags.push(Diagnostic::new(
                        "E_TRUNCATION_TOO_SMALL",
                        format!(
                            "drive accumulates |z| ~ {z_est:.2}; need dim >= {}",
                            (4.0 * z_est * z_est).ceil() as usize + 1
                        ),
                    ));
                }
            }
        }
        CommandKind::G2 => match cfg.get_str("source")? {
            "fock" => {
                let n: i64 = cfg.get_str("n")?.parse().unwrap_or(-1);
                if n <= 0 {
                    diags.push(Diagnostic::new("E_INVALID_N", format!("need N >= 1, got {n}")));
                }
            }
            "coherent" | "thermal" => {
                if cfg.get_f64("mean")? <= 0.0 {
                    diags.push(Diagnostic::new("E_ZERO_MEAN", "mean must be > 0"));
                }
                if cfg.get_bool("sampled")? && cfg.get_usize("n_samples")? < 10_000 {
                    diags.push(Diagnostic::new(
                        "E_INVALID_INPUT",
                        "sampled g2 needs at least 1e4 samples",
                    ));
                }
            }
            other => diags.push(Diagnostic::new(
                "E_CONFIG",
                format!("g2 source must be fock|coherent|thermal, got '{other}'"),
            )),
        },
        CommandKind::Hbt => {
            match cfg.get_str("source")? {
                "chaotic" => {
                    if cfg.get_f64("radius")? <= 0.0 {
                        diags.push(Diagnostic::new("E_INVALID_INPUT", "radius must be > 0"));
                    }
                }
                "coherent" => {}
                other => diags.push(Diagnostic::new(
                    "E_UNSUPPORTED_SOURCE",
                    format!("hbt source must be chaotic|coherent, got '{other}'"),
                )),
            }
            if cfg.get_usize("n_samples")? < 10_000 {
                diags.push(Diagnostic::new(
                    "E_INVALID_INPUT",
                    "hbt needs at least 1e4 samples per scan point",
                ));
            }
            if cfg.get_usize("n_q")? < 2 {
                diags.push(Diagnostic::new("E_INVALID_INPUT", "need n_q >= 2"));
            }
        }
        CommandKind::BerryLoop | CommandKind::Holonomy => {
            let segments = cfg.get_usize("segments")?;
            if segments < 6 {
                diags.push(Diagnostic::new("E_INVALID_INPUT", "need at least 6 segments"));
            }
            let kind = cfg.get_str("loop")?;
            if kind != "octant" && kind != "latitude" {
                diags.push(Diagnostic::new(
                    "E_CONFIG",
                    format!("loop must be octant|latitude, got '{kind}'"),
                ));
            }
            if kind == "latitude" {
                let theta = cfg.get_f64("theta_deg")?;
                if !(0.0 < theta && theta < 180.0) {
                    diags.push(Diagnostic::new(
                        "E_DEGENERATE_PATH",
                        "theta_deg must lie strictly between 0 and 180",
                    ));
                }
            }
            if cfg.get_f64("radius")? <= 0.0 {
                diags.push(Diagnostic::new("E_SINGULAR_MOMENTUM", "radius must be > 0"));
            }
            if cfg.command == CommandKind::Holonomy && segments >= 6 {
                // per-segment generator norm ~ arc length / radius
                let arc = 2.0 * std::f64::consts::PI / segments as f64;
                if arc > photonkin::geometry::MAX_STEP_NORM {
                    diags.push(Diagnostic::new(
                        "E_STEP_TOO_LARGE",
                        format!("{segments} segments leave step norm ~ {arc:.3} > 0.1"),
                    ));
                }
            }
            if cfg.command == CommandKind::BerryLoop
                && cfg.get_str("two_lambda")?.parse::<i32>().is_err()
            {
                diags.push(Diagnostic::new(
                    "E_INVALID_HELICITY",
                    "two_lambda must be an integer (2λ)",
                ));
            }
        }
        CommandKind::Wavepacket | CommandKind::ReproduceFig2 => {
            let (n_points, x_min, x_max, a, k0, t) = if cfg.command == CommandKind::Wavepacket {
                (
                    cfg.get_usize("n_points")?,
                    cfg.get_f64("x_min")?,
                    cfg.get_f64("x_max")?,
                    cfg.get_f64("a")?,
                    cfg.get_f64("k0")?,
                    cfg.get_f64("t")?,
                )
            } else {
                (4096, -40.0, 40.0, 1.0, 0.5, 10.0)
            };
            match photonkin::wavepacket::Grid1D::new(n_points, x_min, x_max) {
                Err(e) => diags.push(Diagnostic::from_error(&e.into())),
                Ok(grid) => {
                    if let Err(e) = photonkin::wavepacket::init_gaussian(grid, a, k0) {
                        diags.push(Diagnostic::from_error(&e.into()));
                    } else {
                        let max_t = grid.len() / 2.0 - 10.0 * a;
                        if t.abs() >= max_t {
                            diags.push(Diagnostic::new(
                                "E_WRAP_AROUND",
                                format!("|t| = {t:.3} exceeds the safe range {max_t:.3}"),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}
