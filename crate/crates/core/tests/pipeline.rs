use std::path::PathBuf;

use bdeconv::experiments::check::{run_check, CheckSpec, Mutation};
use bdeconv::experiments::deblur::{run_deblur, DeblurSpec};
use bdeconv::experiments::image::test_image;
use bdeconv::experiments::kernels::{make_kernel, KernelKind};
use bdeconv::experiments::{run_bench, run_noise, run_phase, sidecar_path, Algorithm, BenchSpec, NoiseSpec, PhaseSpec};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bdeconv-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn small_bench(seed: u64) -> BenchSpec {
    BenchSpec {
        l: 120,
        k: 12,
        n: 12,
        trials: 3,
        seed,
        algorithms: Algorithm::ALL.to_vec(),
        max_iter: 2000,
    }
}

#[test]
fn bench_writes_csv_and_sidecar() {
    let (rows, out) = run_bench(&small_bench(3)).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.converged == r.trials && r.rmse < 1e-6));
    let path = scratch("bench.csv");
    let (csv, json) = out.write(&path).unwrap();
    assert_eq!(json, sidecar_path(&path));
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "algorithm,L,K,N,trials,nBh,nCm,nFFT,RMSE,max_RMSE,converged"
    );
    assert_eq!(text.lines().count(), 5);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(meta["experiment"], "bench");
    assert_eq!(meta["spec"]["seed"], 3);
}

#[test]
fn bench_bytes_are_reproducible() {
    let a = run_bench(&small_bench(9)).unwrap().1.table.to_csv();
    let b = run_bench(&small_bench(9)).unwrap().1.table.to_csv();
    assert_eq!(a, b);
    let c = run_bench(&small_bench(10)).unwrap().1.table.to_csv();
    assert_ne!(a, c);
}

#[test]
fn phase_rows_defined_when_everything_fails() {
    let spec = PhaseSpec {
        k: 10,
        n: 10,
        ratios: vec![0.5, 0.6],
        trials: 4,
        seed: 1,
        algorithms: vec![Algorithm::Robb, Algorithm::Ncbt],
        max_iter: 50,
    };
    let (rows, out) = run_phase(&spec).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.success_rate)));
    assert_eq!(
        out.table.header,
        vec!["ratio", "L", "algorithm", "trials", "successes", "success_rate"]
    );
}

#[test]
fn phase_rejects_unsorted_grid() {
    let spec = PhaseSpec {
        k: 10,
        n: 10,
        ratios: vec![2.0, 1.5],
        trials: 1,
        seed: 1,
        algorithms: vec![Algorithm::Robb],
        max_iter: 10,
    };
    assert!(run_phase(&spec).is_err());
}

#[test]
fn noise_at_high_snr_matches_noiseless() {
    let spec = NoiseSpec {
        ls: vec![200],
        k: 20,
        n: 20,
        snr_db: vec![300.0],
        trials: 2,
        seed: 4,
        max_iter: 2000,
        grad_ratio_tol: 1e-12,
    };
    let (rows, _) = run_noise(&spec).unwrap();
    // 20 log10(1e-7) = -140
    assert!(rows[0].rmse_db <= -140.0, "{}", rows[0].rmse_db);
}

#[test]
fn deblur_small_image() {
    let spec = DeblurSpec {
        checkpoints: vec![10, 20, 30],
        ..DeblurSpec::new(KernelKind::motion(5.0), 400, 30)
    };
    let r = run_deblur(&test_image(64), &spec).unwrap();
    assert_eq!(r.k, make_kernel(KernelKind::motion(5.0)).unwrap().nnz());
    assert!((r.reblur_residual - r.relres).abs() <= 1e-10);
    assert!(r.energy_fraction >= 0.9);
    assert!(r.relerr < 0.2, "{}", r.relerr);
    assert_eq!(r.checkpoints.len(), 3);
}

#[test]
fn check_suite_reports_and_catches_mutation() {
    let rep = run_check(&CheckSpec::default()).unwrap();
    assert!(rep.all_passed());
    assert!(rep.results.len() >= 15);
    let bad = run_check(&CheckSpec {
        mutation: Some(Mutation::AdjointSign),
        ..CheckSpec::default()
    })
    .unwrap();
    assert!(!bad.all_passed());
    let out = bad.output(&CheckSpec::default()).unwrap();
    assert_eq!(out.sidecar["results"]["failures"][0], "adjoint_identity");
}
