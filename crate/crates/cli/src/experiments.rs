//! The experiment implementations behind each CLI command. Every experiment
//! writes its artifacts into the output directory and returns their paths.

use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use serde::Serialize;

use photonkin::fock::{
    accumulated_displacement, apply_matrix, displacement_matrix, distribution, propagate_driven_with,
    timeordering_phase_with, DriveSignal, FockVector, PhotonDistribution, PropagateOptions,
};
use photonkin::geometry::{
    holonomy, latitude_path, loop_phase_from_cocycles, octant_path, solid_angle, Helicity,
    HolonomyReport, MomentumPath,
};
use photonkin::io;
use photonkin::stats::{c2_scan, c2_halfwidth, g2_fock, g2_from_distribution, sample_g2, SourceModel};
use photonkin::wavepacket::{
    dalembert_reconstruct, evolve, init_gaussian, peak_report, Grid1D,
};

use crate::config::{CommandKind, ExperimentConfig};
use crate::error::{CliError, Result};

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    match cfg.command {
        CommandKind::PhotonDist => photon_dist(cfg),
        CommandKind::Drive => drive(cfg),
        CommandKind::G2 => g2(cfg),
        CommandKind::Hbt => hbt(cfg),
        CommandKind::BerryLoop => berry_loop(cfg),
        CommandKind::Holonomy => holonomy_cmd(cfg),
        CommandKind::Wavepacket => wavepacket(cfg),
        CommandKind::ReproduceFig1 => reproduce_fig1(cfg),
        CommandKind::ReproduceFig2 => reproduce_fig2(cfg),
    }
}

fn write_dist(
    cfg: &ExperimentConfig,
    stem: &str,
    z: C64,
    m: usize,
    dist: &PhotonDistribution,
    artifacts: &mut Vec<PathBuf>,
) -> Result<()> {
    let csv = cfg.out_dir.join(format!("{stem}.csv"));
    io::write_distribution_csv(&csv, dist)?;
    artifacts.push(csv);
    let meta = cfg.out_dir.join(format!("{stem}.meta.json"));
    io::write_json(
        &meta,
        &io::DistributionMeta {
            z: [z.re, z.im],
            m,
            dim: dist.dim(),
            deficit: dist.deficit(),
            mean: dist.mean(),
        },
    )?;
    artifacts.push(meta);
    Ok(())
}

fn photon_dist(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let z = C64::new(cfg.get_f64("z_re")?, cfg.get_f64("z_im")?);
    let m = cfg.get_usize("m")?;
    let n_max = cfg.get_usize("n_max")?;
    let dist = distribution(z, m, n_max)?;
    let mut artifacts = Vec::new();
    write_dist(cfg, "distribution", z, m, &dist, &mut artifacts)?;
    Ok(artifacts)
}

#[derive(Serialize)]
struct DriveSummary {
    z_accumulated: [f64; 2],
    phase: f64,
    fidelity_vs_closed_form: f64,
    overlap_arg: f64,
    norm_drift: f64,
    mean_photon_number: f64,
}

fn drive(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let omega = cfg.get_f64("omega")?;
    let tau = cfg.get_f64("tau")?;
    let amplitude = cfg.get_f64("amplitude")?;
    let t0 = cfg.get_f64("t_start")?;
    let t1 = cfg.get_f64("t_end")?;
    let dim = cfg.get_usize("dim")?;
    let m = cfg.get_usize("psi0_m")?;
    let n_samples = cfg.get_usize("drive_samples")?;
    let max_step = cfg.get_f64("max_step")?;

    let signal = DriveSignal::gaussian(amplitude, tau, omega, t0, t1, n_samples)?;
    let opts = PropagateOptions {
        max_step: Some(max_step),
        ..Default::default()
    };
    let psi0 = FockVector::number_state(m, dim)?;
    let psi = propagate_driven_with(&psi0, &signal, t0, t1, opts)?;
    let z = accumulated_displacement(&signal, t0, t1)?;
    let phase = timeordering_phase_with(&signal, t0, t1, opts)?;
    let d = displacement_matrix(z, dim)?;
    let reference = apply_matrix(&d, &psi0)?;
    let overlap = reference.inner(&psi) * C64::from_polar(1.0, -phase);
    let summary = DriveSummary {
        z_accumulated: [z.re, z.im],
        phase,
        fidelity_vs_closed_form: overlap.norm(),
        overlap_arg: overlap.arg(),
        norm_drift: (psi.norm() - 1.0).abs(),
        mean_photon_number: psi.mean_photon_number(),
    };

    let mut artifacts = Vec::new();
    let state_path = cfg.out_dir.join("final_state.json");
    io::write_json(&state_path, &io::StateArtifact::new(&psi, z, m))?;
    artifacts.push(state_path);
    let dist_path = cfg.out_dir.join("final_distribution.csv");
    io::write_distribution_csv(&dist_path, &psi.photon_distribution())?;
    artifacts.push(dist_path);
    let summary_path = cfg.out_dir.join("drive_summary.json");
    io::write_json(&summary_path, &summary)?;
    artifacts.push(summary_path);
    Ok(artifacts)
}

#[derive(Serialize)]
struct G2Report {
    value: f64,
    classification: photonkin::stats::Bunching,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampled: Option<photonkin::stats::McEstimate>,
}

fn g2(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let source = cfg.get_str("source")?;
    let analytic = match source {
        "fock" => {
            let n: i64 = cfg
                .get_str("n")?
                .parse()
                .map_err(|_| CliError::Config("parameter 'n' must be an integer".into()))?;
            g2_fock(n)?
        }
        "coherent" => {
            let dist =
                PhotonDistribution::poisson(cfg.get_f64("mean")?, cfg.get_usize("n_max")?);
            g2_from_distribution(&dist)?
        }
        "thermal" => {
            let dist =
                PhotonDistribution::thermal(cfg.get_f64("mean")?, cfg.get_usize("n_max")?);
            g2_from_distribution(&dist)?
        }
        other => {
            return Err(CliError::Config(format!(
                "g2 source must be fock|coherent|thermal, got '{other}'"
            )))
        }
    };
    let sampled = if cfg.get_bool("sampled")? && source != "fock" {
        let model = match source {
            "coherent" => SourceModel::Coherent {
                mean: cfg.get_f64("mean")?,
            },
            _ => SourceModel::Thermal {
                mean: cfg.get_f64("mean")?,
            },
        };
        Some(sample_g2(&model, cfg.get_usize("n_samples")?, cfg.seed)?)
    } else {
        None
    };
    let report = G2Report {
        value: analytic.value,
        classification: analytic.classification,
        sampled,
    };
    let path = cfg.out_dir.join("g2.json");
    io::write_json(&path, &report)?;
    Ok(vec![path])
}

#[derive(Serialize)]
struct HbtSummary {
    source: String,
    radius: Option<f64>,
    halfwidth: Option<f64>,
    n_samples: usize,
    n_q: usize,
}

fn hbt(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let source_name = cfg.get_str("source")?.to_string();
    let radius = cfg.get_f64("radius")?;
    let source = match source_name.as_str() {
        "chaotic" => SourceModel::ChaoticGaussian {
            radius,
            momentum_scale: cfg.get_f64("q_max")?,
        },
        "coherent" => SourceModel::Coherent { mean: 1.0 },
        other => {
            return Err(CliError::Config(format!(
                "hbt source must be chaotic|coherent, got '{other}'"
            )))
        }
    };
    let n_q = cfg.get_usize("n_q")?;
    let q_max = cfg.get_f64("q_max")?;
    let n_samples = cfg.get_usize("n_samples")?;
    let qs: Vec<f64> = (0..n_q)
        .map(|i| q_max * i as f64 / (n_q - 1).max(1) as f64)
        .collect();
    let rows = c2_scan(&source, &qs, n_samples, cfg.seed)?;

    let mut artifacts = Vec::new();
    let scan_path = cfg.out_dir.join("c2_scan.csv");
    io::write_c2_scan_csv(&scan_path, &rows)?;
    artifacts.push(scan_path);
    let summary = HbtSummary {
        halfwidth: match source {
            SourceModel::ChaoticGaussian { .. } => Some(c2_halfwidth(&source)?),
            _ => None,
        },
        radius: match source {
            SourceModel::ChaoticGaussian { .. } => Some(radius),
            _ => None,
        },
        source: source_name,
        n_samples,
        n_q,
    };
    let sum_path = cfg.out_dir.join("hbt_summary.json");
    io::write_json(&sum_path, &summary)?;
    artifacts.push(sum_path);
    Ok(artifacts)
}

fn build_loop(cfg: &ExperimentConfig) -> Result<MomentumPath> {
    let radius = cfg.get_f64("radius")?;
    let segments = cfg.get_usize("segments")?;
    match cfg.get_str("loop")? {
        "octant" => Ok(octant_path(radius, (segments / 3).max(2))?),
        "latitude" => {
            let theta = cfg.get_f64("theta_deg")? * PI / 180.0;
            Ok(latitude_path(radius, theta, segments.max(5))?)
        }
        other => Err(CliError::Config(format!(
            "loop must be octant|latitude, got '{other}'"
        ))),
    }
}

#[derive(Serialize)]
struct BerryLoopReport {
    loop_phase: f64,
    solid_angle: f64,
    lambda: f64,
    lambda_times_omega: f64,
    deviation: f64,
    segments: usize,
}

fn berry_loop(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let path = build_loop(cfg)?;
    let two_lambda: i32 = cfg
        .get_str("two_lambda")?
        .parse()
        .map_err(|_| CliError::Config("parameter 'two_lambda' must be an integer".into()))?;
    let lam = Helicity::from_two_lambda(two_lambda);
    let phase = loop_phase_from_cocycles(&path, lam)?;
    let omega = solid_angle(&path)?;
    let report = BerryLoopReport {
        loop_phase: phase,
        solid_angle: omega,
        lambda: lam.value(),
        lambda_times_omega: lam.value() * omega,
        deviation: (phase - lam.value() * omega).abs(),
        segments: path.n_segments(),
    };
    let mut artifacts = Vec::new();
    let report_path = cfg.out_dir.join("berry_loop.json");
    io::write_json(&report_path, &report)?;
    artifacts.push(report_path);
    let path_csv = cfg.out_dir.join("path.csv");
    io::write_path_csv(&path_csv, path.points())?;
    artifacts.push(path_csv);
    Ok(artifacts)
}

fn holonomy_cmd(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let path = build_loop(cfg)?;
    let h = holonomy(&path)?;
    let omega = solid_angle(&path)?;
    let report = HolonomyReport::new(&h, omega);
    let mut artifacts = Vec::new();
    let report_path = cfg.out_dir.join("holonomy.json");
    io::write_json(&report_path, &report)?;
    artifacts.push(report_path);
    let path_csv = cfg.out_dir.join("path.csv");
    io::write_path_csv(&path_csv, path.points())?;
    artifacts.push(path_csv);
    Ok(artifacts)
}

#[derive(Serialize)]
struct WavepacketReport {
    peaks: Vec<photonkin::wavepacket::Peak>,
    positive_momentum_fraction: f64,
    dalembert_l2_distance: f64,
    norm_drift: f64,
    t: f64,
}

fn wavepacket(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let grid = Grid1D::new(
        cfg.get_usize("n_points")?,
        cfg.get_f64("x_min")?,
        cfg.get_f64("x_max")?,
    )?;
    let a = cfg.get_f64("a")?;
    let k0 = cfg.get_f64("k0")?;
    let t = cfg.get_f64("t")?;
    let frac = cfg.get_f64("peak_fraction")?;

    let wp0 = init_gaussian(grid, a, k0)?;
    let wp = evolve(&wp0, t)?;
    let rec = dalembert_reconstruct(&wp0, t)?;
    let report = WavepacketReport {
        peaks: peak_report(&wp, frac),
        positive_momentum_fraction: wp.positive_momentum_fraction(),
        dalembert_l2_distance: wp.l2_distance(&rec),
        norm_drift: (wp.norm() - 1.0).abs(),
        t,
    };

    let mut artifacts = Vec::new();
    for (stem, packet) in [("snapshot_t0", &wp0), ("snapshot_t1", &wp)] {
        let csv = cfg.out_dir.join(format!("{stem}.csv"));
        io::write_snapshot_csv(&csv, packet)?;
        artifacts.push(csv);
        let meta = cfg.out_dir.join(format!("{stem}.meta.json"));
        io::write_json(&meta, &io::SnapshotMeta::new(packet))?;
        artifacts.push(meta);
    }
    let report_path = cfg.out_dir.join("wavepacket_report.json");
    io::write_json(&report_path, &report)?;
    artifacts.push(report_path);
    Ok(artifacts)
}

fn reproduce_fig1(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let n_max = cfg.get_usize("n_max")?;
    let z = C64::new(7.0, 0.0); // ⟨n⟩ = |z|² = 49
    let mut artifacts = Vec::new();
    for m in [0usize, 1] {
        let dist = distribution(z, m, n_max)?;
        write_dist(cfg, &format!("fig1_m{m}"), z, m, &dist, &mut artifacts)?;
    }
    Ok(artifacts)
}

fn reproduce_fig2(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let mut fig2 = cfg.clone();
    fig2.params = crate::config::defaults(CommandKind::Wavepacket);
    wavepacket(&fig2)
}
