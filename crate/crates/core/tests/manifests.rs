use std::path::PathBuf;

use rowblock::experiment::{run_sweep, write_sweep, ExperimentManifest};

fn experiments_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../experiments")
}

#[test]
fn shipped_manifests_validate() {
    let mut count = 0;
    for entry in std::fs::read_dir(experiments_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            ExperimentManifest::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 3);
}

#[test]
fn recovery_manifest_meets_recovery_floors() {
    let manifest =
        ExperimentManifest::load(experiments_dir().join("recovery_scaled.json")).unwrap();
    let out = run_sweep(&manifest, 0).unwrap();
    assert_eq!(out.summary.curves.len(), 4 * 5);
    for curve in &out.summary.curves {
        let rho = curve.generator.as_ref().unwrap().rho;
        let sel = curve.at_height.as_ref().unwrap();
        let floor = if rho >= 0.2 { 0.95 } else { 0.45 };
        assert!(
            sel.relative_density >= floor,
            "{} seed {:?}: {}",
            curve.matrix_id,
            curve.scramble_seed,
            sel.relative_density
        );
        assert_eq!(curve.all_density_bounds_ok, Some(true));
        assert_eq!(curve.tcu.len(), 2);
    }

    let dir = tempfile::tempdir().unwrap();
    let (csv, _) = write_sweep(&out, dir.path()).unwrap();
    let rows = std::fs::read_to_string(csv).unwrap().lines().count() - 1;
    assert_eq!(rows, 4 * 5 * 20);
}
