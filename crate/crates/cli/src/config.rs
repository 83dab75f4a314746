//! Experiment configuration: command, typed parameter map, output directory
//! and seed. Values merge as defaults < config file < command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    PhotonDist,
    Drive,
    G2,
    Hbt,
    BerryLoop,
    Holonomy,
    Wavepacket,
    ReproduceFig1,
    ReproduceFig2,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::PhotonDist => "photon-dist",
            CommandKind::Drive => "drive",
            CommandKind::G2 => "g2",
            CommandKind::Hbt => "hbt",
            CommandKind::BerryLoop => "berry-loop",
            CommandKind::Holonomy => "holonomy",
            CommandKind::Wavepacket => "wavepacket",
            CommandKind::ReproduceFig1 => "reproduce-fig1",
            CommandKind::ReproduceFig2 => "reproduce-fig2",
        }
    }
}

impl FromStr for CommandKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "photon-dist" => CommandKind::PhotonDist,
            "drive" => CommandKind::Drive,
            "g2" => CommandKind::G2,
            "hbt" => CommandKind::Hbt,
            "berry-loop" => CommandKind::BerryLoop,
            "holonomy" => CommandKind::Holonomy,
            "wavepacket" => CommandKind::Wavepacket,
            "reproduce-fig1" => CommandKind::ReproduceFig1,
            "reproduce-fig2" => CommandKind::ReproduceFig2,
            other => {
                return Err(CliError::Config(format!("unknown command '{other}'")));
            }
        })
    }
}

/// Built-in defaults; chosen so the two figure commands run with no flags.
pub fn defaults(kind: CommandKind) -> BTreeMap<String, String> {
    let pairs: &[(&str, &str)] = match kind {
        CommandKind::PhotonDist => &[("z_re", "7"), ("z_im", "0"), ("m", "0"), ("n_max", "120")],
        CommandKind::Drive => &[
            ("omega", "1"),
            ("tau", "0.7"),
            ("amplitude", "1.2"),
            ("t_start", "-7"),
            ("t_end", "7"),
            ("dim", "64"),
            ("psi0_m", "0"),
            ("drive_samples", "4001"),
            ("max_step", "0.001"),
        ],
        CommandKind::G2 => &[
            ("source", "fock"),
            ("n", "1"),
            ("mean", "1"),
            ("n_max", "400"),
            ("sampled", "false"),
            ("n_samples", "1000000"),
        ],
        CommandKind::Hbt => &[
            ("source", "chaotic"),
            ("radius", "1"),
            ("q_max", "5"),
            ("n_q", "21"),
            ("n_samples", "100000"),
        ],
        CommandKind::BerryLoop => &[
            ("loop", "octant"),
            ("theta_deg", "60"),
            ("segments", "900"),
            ("two_lambda", "2"),
            ("radius", "1"),
        ],
        CommandKind::Holonomy => &[
            ("loop", "octant"),
            ("theta_deg", "60"),
            ("segments", "3000"),
            ("radius", "1"),
        ],
        CommandKind::Wavepacket => &[
            ("a", "1"),
            ("k0", "0.5"),
            ("t", "10"),
            ("n_points", "4096"),
            ("x_min", "-40"),
            ("x_max", "40"),
            ("peak_fraction", "0.05"),
        ],
        CommandKind::ReproduceFig1 => &[("n_max", "120")],
        CommandKind::ReproduceFig2 => &[],
    };
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// A fully merged experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub params: BTreeMap<String, String>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(command: CommandKind, out_dir: PathBuf, seed: u64) -> Self {
        Self {
            command,
            params: defaults(command),
            out_dir,
            seed,
        }
    }

    /// Layer config-file values over the defaults.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        for (k, v) in parse_ini(path)? {
            if k == "command" {
                continue; // consumed by the caller when selecting the command
            }
            if k == "seed" {
                self.seed = v
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad seed '{v}' in config file")))?;
                continue;
            }
            if k == "out" {
                self.out_dir = PathBuf::from(v);
                continue;
            }
            self.params.insert(k, v);
        }
        Ok(())
    }

    /// Layer a single flag override.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        self.get_parsed(key)
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        self.get_parsed(key)
    }

    pub fn get_bool(&self, key: &str) -> Result<bool> {
        self.get_parsed(key)
    }

    pub fn get_str(&self, key: &str) -> Result<&str> {
        self.params
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| CliError::Config(format!("missing parameter '{key}'")))
    }

    fn get_parsed<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get_str(key)?;
        raw.parse().map_err(|_| {
            CliError::Config(format!(
                "parameter '{key}' has invalid value '{raw}' for {}",
                self.command.name()
            ))
        })
    }
}

/// Flat INI-style key = value file; '#' and ';' start comments.
pub fn parse_ini(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if line.starts_with('[') {
            return Err(CliError::Config(format!(
                "line {}: sections are not supported; use flat key = value",
                lineno + 1
            )));
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {}: expected key = value, got '{line}'",
                lineno + 1
            )));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// The command named in a config file, if any.
pub fn command_from_file(path: &Path) -> Result<Option<CommandKind>> {
    for (k, v) in parse_ini(path)? {
        if k == "command" {
            return Ok(Some(v.parse()?));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ini_parsing_and_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("exp.ini");
        std::fs::write(&file, "# comment\ncommand = wavepacket\nk0 = 2.5\nseed = 9\n").unwrap();
        assert_eq!(
            command_from_file(&file).unwrap(),
            Some(CommandKind::Wavepacket)
        );
        let mut cfg = ExperimentConfig::new(CommandKind::Wavepacket, dir.path().into(), 1);
        assert_eq!(cfg.get_f64("k0").unwrap(), 0.5); // default
        cfg.apply_file(&file).unwrap();
        assert_eq!(cfg.get_f64("k0").unwrap(), 2.5); // file overrides default
        assert_eq!(cfg.seed, 9);
        cfg.set("k0", 3.0); // flag overrides file
        assert_eq!(cfg.get_f64("k0").unwrap(), 3.0);
    }

    #[test]
    fn bad_config_reports_offending_key() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::new(CommandKind::Wavepacket, dir.path().into(), 1);
        cfg.set("k0", "not-a-number");
        let err = cfg.get_f64("k0").unwrap_err();
        assert!(err.to_string().contains("k0"));
    }
}
