use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn holocgh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holocgh"))
        .args(args)
        .env_remove("HOLOCGH_OUT_DIR")
        .output()
        .expect("spawn holocgh")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Number after `prefix` on the first line containing it.
fn number_after(text: &str, prefix: &str) -> Vec<f64> {
    let line = text.lines().find(|l| l.starts_with(prefix)).unwrap_or_else(|| panic!("no {prefix:?} in {text}"));
    line[prefix.len()..]
        .split(|c: char| !(c.is_ascii_digit() || c == '.'))
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().unwrap())
        .collect()
}

const TINY: &str = r#"
[optics]
wavelengths = [5.2e-7]
pixel_pitch = 8.2e-6
slm_resolution = { cols = 48, rows = 32 }
active_resolution = { cols = 48, rows = 32 }
eyepiece_focal_length = 0.04
half_depth = 0.005535
wrp_distance = 0.01
num_frames = 2
sideband = true

[supervision]
mode = "2.5d"
num_planes = 3
scene = { kind = "synthetic" }

[optimizer]
iterations = 5
seed = 3

[output]
dir = "out"
"#;

#[test]
fn no_arguments_prints_usage_and_fails() {
    let o = holocgh(&[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let o = holocgh(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn help_on_every_node() {
    let nodes: &[&[&str]] = &[
        &[],
        &["optimize"],
        &["reconstruct"],
        &["lf-extract"],
        &["analyze"],
        &["analyze", "geometry"],
        &["analyze", "sampling"],
        &["analyze", "parallax"],
        &["analyze", "luminance"],
        &["jod"],
        &["jod", "scale"],
        &["jod", "test"],
        &["jod", "bootstrap"],
    ];
    for n in nodes {
        let mut args = n.to_vec();
        args.push("--help");
        let o = holocgh(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert!(stdout(&o).contains("Usage"), "{args:?}");
    }
}

#[test]
fn geometry_of_the_prototype() {
    let o = holocgh(&["analyze", "geometry", "--config", configs().join("prototype.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let eb = number_after(&s, "eyebox:");
    let fov = number_after(&s, "field of view:");
    let cpd = number_after(&s, "max resolution:");
    let close = |a: f64, b: f64| (a - b).abs() / b < 0.02;
    assert!(close(eb[0], 2.2) && close(eb[1], 1.1), "{s}");
    assert!(close(fov[0], 18.6) && close(fov[1], 10.5), "{s}");
    assert!(close(cpd[0], 43.0), "{s}");
}

#[test]
fn sampling_views_at_thirty_cpd() {
    let o = holocgh(&["analyze", "sampling", "--cpd", "30", "--depth-range", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let n = number_after(&s, "")[0];
    assert!((7.0..=9.0).contains(&n), "{s}");
    assert!(s.contains("horizontal views"));
}

#[test]
fn sampling_above_cutoff_is_rejected() {
    let o = holocgh(&["analyze", "sampling", "--cpd", "60", "--depth-range", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cutoff"));
}

#[test]
fn sampling_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("sweep.csv");
    let out = dir.path().join("out");
    let o = holocgh(&[
        "--out",
        out.to_str().unwrap(),
        "analyze",
        "sampling",
        "--cpd",
        "30",
        "--depth-range",
        "3",
        "--table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = fs::read_to_string(&table).unwrap();
    assert_eq!(rows.lines().count(), 1 + 4 * 21);
    assert!(out.join("manifest.toml").exists());
}

#[test]
fn corrupt_hologram_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("bad.hbin");
    fs::write(&h, b"HBIN1 nonsense").unwrap();
    let p = dir.path().join("pupil.csv");
    fs::write(&p, "x_p,y_p,d_p,focal_diopters\n0,0,1,0\n").unwrap();
    let o = holocgh(&["--out", dir.path().to_str().unwrap(), "reconstruct", h.to_str().unwrap(), "--pupil-csv", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn luminance_of_one_line() {
    let o = holocgh(&["analyze", "luminance", "--line", "555:1", "--area", "1", "--solid-angle", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = number_after(&stdout(&o), "luminance:")[0];
    assert!((v - 683.0).abs() < 1e-3);
}

fn digest(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn optimize_reconstruct_extract_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, TINY).unwrap();
    let pupil = dir.path().join("pupil.csv");
    fs::write(&pupil, "x_p,y_p,d_p,focal_diopters\n0,0,1,0\n0.1,0,0.3,2\n").unwrap();
    let inputs = digest(dir.path());

    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = holocgh(&["--out", out.to_str().unwrap(), "optimize", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(fs::read(a.join("hologram.hbin")).unwrap(), fs::read(b.join("hologram.hbin")).unwrap());
    let manifest = fs::read_to_string(a.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 3") && manifest.contains("[config.optics]"), "{manifest}");

    // the manifest's config echo reproduces the run
    fs::create_dir(dir.path().join("echo")).unwrap();
    let echoed = dir.path().join("echo/run.toml");
    let table: toml::Table = manifest.parse().unwrap();
    fs::write(&echoed, toml::to_string(&table["config"]).unwrap()).unwrap();
    let c = dir.path().join("c");
    let o = holocgh(&["--out", c.to_str().unwrap(), "optimize", echoed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(a.join("hologram.hbin")).unwrap(), fs::read(c.join("hologram.hbin")).unwrap());

    let holo = a.join("hologram.hbin");
    let rec = dir.path().join("rec");
    let o = holocgh(&[
        "--out",
        rec.to_str().unwrap(),
        "reconstruct",
        holo.to_str().unwrap(),
        "--pupil-csv",
        pupil.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(rec.join("retina_000.pfm").exists() && rec.join("retina_001.pfm").exists());
    assert!(rec.join("manifest.toml").exists());

    let lf = dir.path().join("lf");
    let o = holocgh(&[
        "--out",
        lf.to_str().unwrap(),
        "lf-extract",
        holo.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--window",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(lf.join("view_02_02.pfm").exists() && lf.join("tiles.csv").exists());

    let o = holocgh(&[
        "analyze",
        "parallax",
        "--reference",
        rec.join("retina_000.pfm").to_str().unwrap(),
        "--test",
        rec.join("retina_000.pfm").to_str().unwrap(),
    ]);
    // identical inputs: either no features on this tiny image or rate 0
    match o.status.code() {
        Some(0) => assert!(stdout(&o).contains("detection rate: 0.0000")),
        code => assert_eq!(code, Some(2)),
    }

    assert_eq!(inputs, digest(dir.path()), "inputs were modified");
}

fn votes_csv(path: &Path) {
    let mut s = String::from("observer,option_i,option_j,chosen\n");
    // B beats A 3:1 for every observer, C beats B 3:1
    for o in 0..4 {
        for k in 0..8 {
            let ab = if k % 4 == 0 { "A" } else { "B" };
            let bc = if k % 4 == 0 { "B" } else { "C" };
            s += &format!("obs{o},A,B,{ab}\nobs{o},B,C,{bc}\n");
        }
    }
    fs::write(path, s).unwrap();
}

#[test]
fn jod_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let votes = dir.path().join("votes.csv");
    votes_csv(&votes);
    let out = dir.path().join("jod");
    let o = holocgh(&["--out", out.to_str().unwrap(), "jod", "scale", votes.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let scores = fs::read_to_string(out.join("scores.csv")).unwrap();
    assert!(scores.starts_with("option,jod"));
    assert!(out.join("covariance.csv").exists() && out.join("manifest.toml").exists());

    let o = holocgh(&["jod", "test", votes.to_str().unwrap(), "--a", "C", "--b", "A"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("z ="));
    let o = holocgh(&["jod", "test", votes.to_str().unwrap(), "--a", "C", "--b", "Z"]);
    assert_eq!(o.status.code(), Some(1));

    let run_boot = |name: &str| {
        let out = dir.path().join(name);
        let o = holocgh(&[
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
            "jod",
            "bootstrap",
            votes.to_str().unwrap(),
            "--samples",
            "200",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out.join("scores.csv")).unwrap()
    };
    assert_eq!(run_boot("b1"), run_boot("b2"));
}

#[test]
fn malformed_votes_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let votes = dir.path().join("votes.csv");
    fs::write(&votes, "observer,option_i,option_j,chosen\no,A,B,Q\n").unwrap();
    let o = holocgh(&["--out", dir.path().to_str().unwrap(), "jod", "scale", votes.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
