use std::fs;
use std::path::Path;
use std::process::Command;

use cfsr_sim::config::{ExperimentParams, InitKind};
use cfsr_sim::convergence::run_sca_convergence;
use cfsr_sim::error_power::run_error_power_sweep;
use cfsr_sim::output::{write_fig2, write_fig34, write_fig56};
use cfsr_sim::region::run_rate_region;
use cfsr_sim::{CsiMode, SimConfig};

/// Four APs with two antennas each, so that the SOCPs stay small.
const SMALL: &str = r#"
num_aps = 4
antennas_per_ap = 2
area_side = 100.0
rng_seed = 11
mc_trials = 6
fig2_l1 = [0.2, 0.5, 0.8]
sca_trials = 2
sca_r_th = 8.0
region_l1 = [0.5]
region_r_th_max = 14.0
"#;

fn small() -> SimConfig {
    SimConfig::from_toml_str(SMALL).unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or_default().to_string()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "num_aps = 2\narea_side = 10.0\ntx_power = [0.1, 0.2]\nap_positions = [[1.0, 2.0], [-3.0, 4.0]]\nsca_init = \"random\"\n")
        .unwrap();
    let cfg = SimConfig::load(&path).unwrap();
    assert_eq!(cfg.system.num_aps, 2);
    assert_eq!(cfg.system.tx_power, vec![0.1, 0.2]);
    assert_eq!(cfg.params.sca_init, InitKind::Random);
    assert_eq!(cfg.params.region_l1, ExperimentParams::default().region_l1);
    assert!(SimConfig::load(&dir.path().join("missing.toml")).is_err());
}

#[test]
fn region_run_is_identical_across_thread_counts() {
    let cfg = small();
    let run =
        |threads| in_pool(threads, || run_rate_region(&cfg.system, &cfg.params, 5, cfg.system.mc_trials).unwrap());
    let (a, b) = (run(1), run(3));
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_fig56(&pa, &a).unwrap();
    write_fig56(&pb, &b).unwrap();
    assert_eq!(fs::read(&pa).unwrap(), fs::read(&pb).unwrap());

    let other = run_rate_region(&cfg.system, &cfg.params, 6, cfg.system.mc_trials).unwrap();
    assert_ne!(a.curves[0].r_hat_c.mean(), other.curves[0].r_hat_c.mean());
}

#[test]
fn region_curves_are_consistent() {
    let cfg = small();
    let res = run_rate_region(&cfg.system, &cfg.params, 1, cfg.system.mc_trials).unwrap();
    assert_eq!(res.curves.len(), 3);
    assert_eq!(res.curves[0].mode, CsiMode::Perfect);
    for c in &res.curves {
        assert_eq!(c.trials + c.solver_failures, cfg.system.mc_trials);
        assert_eq!(c.points.len(), res.grid.len());
        for p in &c.points {
            assert_eq!(p.feasible + p.infeasible, c.trials);
            assert!(p.closed_form <= p.feasible && p.mean_r_c >= 0.0);
        }
        // the mean at R_th = 0 is the mean MRT rate
        assert!((c.points[0].mean_r_c - c.r_hat_c.mean()).abs() <= 1e-12 * c.r_hat_c.mean());
        assert!(c.r_bar_s.mean() >= c.r_hat_s.mean());
    }
}

#[test]
fn convergence_traces_are_monotone() {
    let cfg = small();
    let res = run_sca_convergence(&cfg.system, &cfg.params, 3).unwrap();
    assert!(!res.runs.is_empty());
    assert_eq!(res.abandoned_trials, 0);
    assert_eq!(res.solver_failures, 0);
    for run in &res.runs {
        assert!(run.monotone && run.converged && !run.rejected_step, "{run:?}");
        assert!(run.iterations <= 20);
    }
    for trial in 0..cfg.params.sca_trials {
        let perfect = res.runs.iter().find(|r| r.trial == trial && r.mode == CsiMode::Perfect).unwrap();
        for r in res.runs.iter().filter(|r| r.trial == trial && r.mode != CsiMode::Perfect) {
            assert!(
                perfect.final_r_c >= r.final_r_c,
                "trial {trial}: {} < {} ({})",
                perfect.final_r_c,
                r.final_r_c,
                r.mode
            );
        }
    }
    let again = in_pool(2, || run_sca_convergence(&cfg.system, &cfg.params, 3).unwrap());
    assert_eq!(res, again);
}

#[test]
fn csv_headers_are_stable() {
    let cfg = small();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_fig2(&d.join("fig2.csv"), &run_error_power_sweep(&cfg.system, &cfg.params).unwrap()).unwrap();
    write_fig34(&d.join("fig34.csv"), &run_sca_convergence(&cfg.system, &cfg.params, 1).unwrap()).unwrap();
    write_fig56(&d.join("fig56.csv"), &run_rate_region(&cfg.system, &cfg.params, 1, 1).unwrap()).unwrap();
    assert_eq!(header(&d.join("fig2.csv")), "tau_total,l1,tau1,tau2,e_over_noise");
    assert_eq!(header(&d.join("fig34.csv")), "trial,csi_mode,tau_total,l1,iteration,objective,r_c");
    assert_eq!(
        header(&d.join("fig56.csv")),
        "csi_mode,tau_total,l1,r_th,mean_r_c,stderr_r_c,feasible,infeasible,closed_form"
    );
    let fig2 = fs::read_to_string(d.join("fig2.csv")).unwrap();
    assert!(
        fig2.lines().any(|l| l.starts_with("0,") && l.ends_with(",0,0,1")),
        "perfect-CSI reference row missing:\n{fig2}"
    );
}

#[test]
fn cli_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("out");
    let run = |out: &Path, threads: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_simulate"))
            .arg(&cfg)
            .args(["--out", out.to_str().unwrap(), "--seed", "9", "--trials", "3", "--threads", threads])
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        String::from_utf8(status.stdout).unwrap()
    };
    let stdout = run(&out, "1");
    for f in ["fig2.csv", "fig34.csv", "fig56.csv", "topology.csv", "summary.txt"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("kappa1") && summary.contains("kappa2") && summary.contains("seed"));
    assert!(stdout.contains("kappa1"));

    let again = dir.path().join("again");
    run(&again, "2");
    for f in ["fig2.csv", "fig34.csv", "fig56.csv", "topology.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f} differs");
    }

    let bad = Command::new(env!("CARGO_BIN_EXE_simulate")).arg(dir.path().join("nope.toml")).output().unwrap();
    assert!(!bad.status.success());
    assert!(!String::from_utf8_lossy(&bad.stderr).is_empty());
}

/// A default-scenario draw whose SCA subproblem stalls with the dual residual
/// near 2e-7; it must be used as a near-optimal point, not dropped.
#[test]
fn stalled_subproblem_does_not_lose_the_draw() {
    use cfsr_core::beamforming::{rate_region_on_grid, RegionOptions};
    use cfsr_core::channel::{build_topology, realize, SystemConfig};
    use cfsr_sim::region::threshold_grid;
    use cfsr_sim::{effective_problem, trial_rng, Purpose};

    let system = SystemConfig::default();
    let topo = build_topology(&system).unwrap();
    let trial = 212;
    let chan = realize(&system, &topo, &mut trial_rng(system.rng_seed, trial, Purpose::Channel)).unwrap();
    let mut rng = trial_rng(system.rng_seed, trial, Purpose::Training { config: 0, draw: 0 });
    let p = effective_problem(&system, &chan, CsiMode::Perfect, &mut rng).unwrap();
    let reg = rate_region_on_grid(&p, &threshold_grid(20.0, 1.0), &RegionOptions::default()).unwrap();
    assert!(reg.r_bar_s > reg.r_hat_s);
    for w in reg.points.windows(2) {
        assert!(w[1].r_c <= w[0].r_c + 1e-6);
    }
}
