//! End-to-end runs of the binary: subcommand plumbing, file formats, exit
//! codes (0 success, 2 validation, 3 numeric failure).

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nft-cli"))
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    let cfg = nft_cli::config::example_config();
    std::fs::write(&path, cfg.to_toml()).unwrap();
    path
}

#[test]
fn transform_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let sig_path = dir.path().join("sig.tsv");
    let qhat_path = dir.path().join("qhat.tsv");
    let back_path = dir.path().join("back.tsv");

    let grid = nft::TimeGrid::new(-16.0, 16.0, 512).unwrap();
    let sig = nft::TimeSignal::from_fn(grid, |t| nft::Complex::new(0.8 * (-t * t).exp(), 0.0));
    let mut buf = Vec::new();
    nft_cli::signal_io::write_time_signal(&sig, &mut buf).unwrap();
    std::fs::write(&sig_path, buf).unwrap();

    let status = bin()
        .args(["nft", "--input"])
        .arg(&sig_path)
        .arg("--output")
        .arg(&qhat_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let status = bin()
        .args([
            "inft",
            "--t-start",
            "-16",
            "--t-end",
            "16",
            "--samples",
            "512",
        ])
        .arg("--input")
        .arg(&qhat_path)
        .arg("--output")
        .arg(&back_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let back = nft_cli::signal_io::read_time_signal(std::io::BufReader::new(
        std::fs::File::open(&back_path).unwrap(),
    ))
    .unwrap();
    let err = nft::relative_l2(&back.samples, &sig.samples);
    assert!(err < 1e-3, "file round trip error {err}");
}

#[test]
fn propagate_subcommand_runs() {
    let dir = tempfile::tempdir().unwrap();
    let sig_path = dir.path().join("sig.tsv");
    let out_path = dir.path().join("out.tsv");
    let grid = nft::TimeGrid::new(-16.0, 16.0, 256).unwrap();
    let sig = nft::TimeSignal::from_fn(grid, |t| nft::Complex::new(0.3 * (-t * t).exp(), 0.0));
    let mut buf = Vec::new();
    nft_cli::signal_io::write_time_signal(&sig, &mut buf).unwrap();
    std::fs::write(&sig_path, buf).unwrap();

    let status = bin()
        .args(["propagate", "--distance", "0.05", "--z-steps", "50"])
        .arg("--input")
        .arg(&sig_path)
        .arg("--output")
        .arg(&out_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out_path.exists());
}

#[test]
fn loopback_subcommands_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    for cmd in ["nfdm-loopback", "wdm-loopback"] {
        let out = bin()
            .args([cmd, "--power-dbm", "-6"])
            .arg("--config")
            .arg(&cfg)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{cmd} failed: {out:?}");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("symbol_error"), "{text}");
    }
}

#[test]
fn rate_sweep_writes_run_dir_and_plots_reemit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("config.toml");
    let mut cfg = nft_cli::config::example_config();
    cfg.trials = 8;
    cfg.power_dbm = vec![-4.0];
    cfg.distance_km = 20.0;
    cfg.grid.time_samples = 512;
    cfg.grid.spectral_samples = 512;
    cfg.channel.z_steps = 60;
    std::fs::write(&cfg_path, cfg.to_toml()).unwrap();

    let run_dir = dir.path().join("run");
    let status = bin()
        .arg("rate-sweep")
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&run_dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    for f in [
        "manifest.toml",
        "rate_vs_power.tsv",
        "entropy_vs_power.tsv",
        "histogram_p0.tsv",
        "clouds_p0.tsv",
    ] {
        assert!(run_dir.join(f).exists(), "missing {f}");
    }
    // the manifest embeds the fully resolved config
    let manifest = std::fs::read_to_string(run_dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("scheme = \"nfdm\""));
    assert!(manifest.contains("trials = 8"));
    // one cloud row per successful trial (plus two header lines)
    let clouds = std::fs::read_to_string(run_dir.join("clouds_p0.tsv")).unwrap();
    assert_eq!(clouds.lines().count(), 2 + 8);
    // one rate row per sweep power
    let rate = std::fs::read_to_string(run_dir.join("rate_vs_power.tsv")).unwrap();
    assert_eq!(rate.lines().count(), 2 + 1);

    // re-emission from the stored run
    std::fs::remove_file(run_dir.join("rate_vs_power.tsv")).unwrap();
    let status = bin()
        .args(["emit-plots", "--kind", "rate"])
        .arg("--run")
        .arg(&run_dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(run_dir.join("rate_vs_power.tsv").exists());

    let status = bin()
        .args(["emit-plots", "--kind", "sausages"])
        .arg("--run")
        .arg(&run_dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn exit_codes_for_validation_and_numeric_failures() {
    let dir = tempfile::tempdir().unwrap();

    // unreadable config -> validation (2)
    let status = bin()
        .args(["rate-sweep", "--config", "/nonexistent.toml", "--out"])
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // invalid config contents -> validation (2)
    let bad_cfg = dir.path().join("bad.toml");
    std::fs::write(&bad_cfg, "scheme = \"nfdm\"\n").unwrap();
    let status = bin()
        .args(["rate-sweep", "--out"])
        .arg(dir.path().join("y"))
        .arg("--config")
        .arg(&bad_cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // spectral amplitude outside the unit disk -> numeric failure (3)
    let qhat_path = dir.path().join("qhat.tsv");
    let grid = nft::SpectralGrid::new(-3.2, 3.2, 64).unwrap();
    let qhat = nft::SpectralSignal::from_fn(grid, |_| nft::Complex::new(1.5, 0.0));
    let mut buf = Vec::new();
    nft_cli::signal_io::write_spectral_signal(&qhat, &mut buf).unwrap();
    std::fs::write(&qhat_path, buf).unwrap();
    let status = bin()
        .args(["inft", "--t-start", "-1", "--t-end", "1", "--samples", "64"])
        .arg("--input")
        .arg(&qhat_path)
        .arg("--output")
        .arg(dir.path().join("z.tsv"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}
