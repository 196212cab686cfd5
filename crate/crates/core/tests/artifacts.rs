use std::fs;
use std::path::Path;

use binls::config::parse_config;
use binls::grid::Field;
use binls::io::{
    self, parse_record, read_checkpoint, read_checkpoint_on, read_ground_state, write_checkpoint, MAGIC,
};
use binls::random::{band_limited_field, rng_from_seed};
use binls::run::run;
use binls::{Error, GridSpec};

fn sample(dim: usize, points: usize) -> Field {
    let g = GridSpec::new(dim, 20.0, points).unwrap();
    band_limited_field(&g, &mut rng_from_seed(5), 2.0)
}

#[test]
fn checkpoint_file_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    for (dim, m) in [(1, 128), (2, 32)] {
        let f = sample(dim, m);
        let path = dir.path().join(format!("f{dim}.bin"));
        write_checkpoint(&f, 0.75, 2.0, &path).unwrap();
        let (g, meta) = read_checkpoint(&path).unwrap();
        assert_eq!((meta.dim, meta.points, meta.gamma, meta.sigma), (dim, m, 0.75, 2.0));
        assert!(f.values().iter().zip(g.values()).all(|(a, b)| a.re.to_bits() == b.re.to_bits()
            && a.im.to_bits() == b.im.to_bits()));
    }
    // no temporary files left behind by the atomic writes
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn corrupted_and_truncated_checkpoints_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.bin");
    write_checkpoint(&sample(1, 64), 1.0, 1.0, &path).unwrap();
    let good = fs::read(&path).unwrap();

    let mut bad = good.clone();
    bad[0] ^= 0xff;
    fs::write(&path, &bad).unwrap();
    assert!(matches!(read_checkpoint(&path), Err(Error::BadMagic)));

    fs::write(&path, &good[..good.len() - 8]).unwrap();
    assert!(matches!(read_checkpoint(&path), Err(Error::TruncatedFile { .. })));
    fs::write(&path, &good[..12]).unwrap();
    assert!(matches!(read_checkpoint(&path), Err(Error::TruncatedFile { .. })));

    let mut three = good.clone();
    three[8..12].copy_from_slice(&3u32.to_le_bytes());
    fs::write(&path, &three).unwrap();
    assert!(matches!(read_checkpoint(&path), Err(Error::DimensionMismatch(_))));
    assert_eq!(&good[..8], &MAGIC);
}

#[test]
fn loading_onto_another_grid_is_a_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.bin");
    write_checkpoint(&sample(1, 64), 1.0, 1.0, &path).unwrap();
    let other = GridSpec::new(1, 20.0, 128).unwrap();
    let e = read_checkpoint_on(&path, &other).unwrap_err();
    assert!(matches!(e, Error::DimensionMismatch(_)));
    assert_eq!(e.exit_code(), 5);
    assert!(read_checkpoint_on(&path, &GridSpec::new(1, 20.0, 64).unwrap()).is_ok());
}

fn config(text: &str, out: &Path) -> binls::config::RunConfig {
    let mut cfg = parse_config(text).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg
}

const GROUND_STATE: &str = "command = ground-state\nsigma = 4\ndim = 1\nmass_ratio = 1.2\nextent = 64\npoints = 512\n";

#[test]
fn ground_state_run_artifacts_revalidate_on_load() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config(GROUND_STATE, dir.path()));
    assert_eq!(out.exit_code, 0, "{:?}", out.error);
    let (gs, p) = read_ground_state(dir.path(), "ground_state").unwrap();
    assert_eq!((p.sigma, p.dim), (4.0, 1));
    assert!(gs.alpha > 0.0);
    let report = parse_record(&fs::read_to_string(dir.path().join("report.txt")).unwrap()).unwrap();
    assert_eq!(report.get("solver_tag"), Some("petviashvili_shooting"));
    let manifest = parse_record(&fs::read_to_string(dir.path().join("manifest.txt")).unwrap()).unwrap();
    assert_eq!(manifest.get("command"), Some("ground-state"));
    assert_eq!(manifest.get("exit_code"), Some("0"));
    assert_eq!(manifest.get("config.model.mass_ratio"), Some("1.2"));
    assert!(manifest.get("wall_seconds").is_some() && manifest.get("rng_seed").is_some());
}

#[test]
fn tampered_ground_state_fails_to_load() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&config(GROUND_STATE, dir.path())).exit_code, 0);
    let (bin, txt) = io::ground_state_paths(dir.path(), "ground_state");

    let sidecar = fs::read_to_string(&txt).unwrap();
    let edited: String = sidecar
        .lines()
        .map(|l| if l.starts_with("energy = ") { "energy = 1.0".to_string() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(&txt, edited).unwrap();
    assert!(matches!(read_ground_state(dir.path(), "ground_state"), Err(Error::InvariantViolation(_))));
    fs::write(&txt, &sidecar).unwrap();

    // a rescaled field changes the mass the sidecar recorded
    let (f, meta) = read_checkpoint(&bin).unwrap();
    write_checkpoint(&f.scale(1.01), meta.gamma, meta.sigma, &bin).unwrap();
    assert!(read_ground_state(dir.path(), "ground_state").is_err());
}

const EVOLVE: &str = "command = evolve\nsigma = 4\ndim = 1\nmass_ratio = 1.2\nextent = 64\npoints = 512\n\
                      dynamics.horizon = 0.2\ndynamics.output_interval = 0.05\ndynamics.lambda = 0.9\n";

#[test]
fn evolve_run_writes_the_trace_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config(EVOLVE, dir.path()));
    assert_eq!(out.exit_code, 0, "{:?}", out.error);
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,mass,energy,bilap,grad,Q,virial"));
    assert_eq!(csv.lines().count(), 1 + 5);
    let side = parse_record(&fs::read_to_string(dir.path().join("final.txt")).unwrap()).unwrap();
    assert_eq!(side.get("verdict"), Some("completed"));
}

#[test]
fn identical_runs_write_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for text in [EVOLVE, "command = gamma-curve\nsigma = 6\ndim = 1\nextent = 64\npoints = 512\nexperiment.masses = 2.4, 2.8, 3.2\n"] {
        assert_eq!(run(&config(text, a.path())).exit_code, 0);
        assert_eq!(run(&config(text, b.path())).exit_code, 0);
        let mut csvs = 0;
        for e in fs::read_dir(a.path()).unwrap() {
            let name = e.unwrap().file_name();
            if name.to_string_lossy().ends_with(".csv") {
                csvs += 1;
                assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
            }
        }
        assert!(csvs > 0);
    }
}

#[test]
fn failures_are_categorized_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let sub = "command = ground-state\nsigma = 4\ndim = 1\nmass_ratio = 0.9\nextent = 64\npoints = 512\n";
    let out = run(&config(sub, dir.path()));
    assert!(matches!(out.error, Some(Error::SubcriticalMass { .. })));
    assert_eq!(out.exit_code, 3);
    let err = parse_record(&fs::read_to_string(dir.path().join("error.txt")).unwrap()).unwrap();
    assert_eq!(err.get("category"), Some("SolverError"));
    let manifest = parse_record(&fs::read_to_string(dir.path().join("manifest.txt")).unwrap()).unwrap();
    assert_eq!(manifest.get("exit_code"), Some("3"));

    let mut cfg = config(GROUND_STATE, dir.path());
    cfg.points = 511;
    assert_eq!(run(&cfg).exit_code, 2);
}
