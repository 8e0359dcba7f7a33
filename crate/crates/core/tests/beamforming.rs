use cfsr_core::beamforming::{
    closed_form_mrt, max_primary_rate, rate_region, rate_region_on_grid, sca_from, sca_initialize,
    sca_maximize_secondary, Branch, EffectiveProblem, InitStrategy, RegionOptions, ScaOptions,
};
use cfsr_core::channel::{build_topology, realize, SystemConfig};
use cfsr_core::estimation::{estimate, TrainingConfig};
use cfsr_core::socp::{solve, ComplexEmbedding, ConeProgram, SolveStatus, SolverSettings};
use cfsr_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn cn(rng: &mut ChaCha8Rng, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

fn random_problem(rng: &mut ChaCha8Rng) -> EffectiveProblem {
    let aps = rng.random_range(2..5);
    let antennas = rng.random_range(1..4);
    let n = aps * antennas;
    let g = (0..n).map(|_| cn(rng, 1.0)).collect();
    let h = (0..n).map(|_| cn(rng, 0.3)).collect();
    let powers = (0..aps).map(|_| rng.random_range(0.5..2.0)).collect();
    EffectiveProblem::new(antennas, g, h, rng.random_range(0.2..1.0), rng.random_range(0.02..0.5), powers).unwrap()
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Default scenario with perfect and estimated channels for one draw.
fn realistic(seed: u64, pilot_total: usize, split: f64) -> (EffectiveProblem, EffectiveProblem) {
    let cfg = SystemConfig { pilot_total, pilot_split: split, ..SystemConfig::default() };
    let topo = build_topology(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chan = realize(&cfg, &topo, &mut rng).unwrap();
    let tc = TrainingConfig::from_config(&cfg).unwrap();
    let est = estimate(&cfg, &chan, &tc, &mut rng).unwrap();
    (EffectiveProblem::perfect(&chan, &cfg).unwrap(), EffectiveProblem::imperfect(&est, &cfg).unwrap())
}

fn assert_returned_beamformer_ok(p: &EffectiveProblem, w: &[C64]) {
    for (blk, &pm) in w.chunks(p.antennas).zip(&p.powers) {
        let used: f64 = blk.iter().map(|v| v.norm_sqr()).sum();
        assert!(used <= pm * (1.0 + 1e-9), "{used} > {pm}");
    }
    let v = inner(&p.g, w);
    assert!(v.im.abs() <= 1e-12 * (1.0 + v.norm()) && v.re >= 0.0, "{v}");
}

fn cascaded_bound(p: &EffectiveProblem) -> f64 {
    p.h.chunks(p.antennas).zip(&p.powers).map(|(h, &q)| q.sqrt() * inner(h, h).re.sqrt()).sum()
}

/// `max |hᴴw|` over the power budgets as one cone program: the phase is
/// pinned on `hᴴw` itself, so the optimum is `Re(hᴴw)`.
fn socp_max_cascaded_gain(p: &EffectiveProblem) -> f64 {
    let emb = ComplexEmbedding::new(p.num_aps(), p.antennas).unwrap();
    let (re, _) = emb.functional_rows(&p.h).unwrap();
    let mut prog = ConeProgram::new(emb.dim()).with_objective(re);
    for (m, &pm) in p.powers.iter().enumerate() {
        prog.push_soc(emb.power_cone(m, pm).unwrap());
    }
    prog.push_eq(emb.imag_equality(&p.h).unwrap());
    let sol = solve(&prog).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    sol.objective_value
}

#[test]
fn closed_form_matches_direct_cone_maximization() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..60 {
        let p = random_problem(&mut rng);
        let mrt = closed_form_mrt(&p).unwrap();
        let bound = cascaded_bound(&p);
        assert!((mrt.objective / (bound * bound) - 1.0).abs() < 1e-12);
        assert!((p.objective(&mrt.w.0) / mrt.objective - 1.0).abs() < 1e-12);
        let best = socp_max_cascaded_gain(&p).powi(2);
        assert!((best / mrt.objective - 1.0).abs() <= 1e-6, "case {case}: {best} vs {}", mrt.objective);
    }
}

#[test]
fn below_mrt_rate_sca_never_beats_the_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for case in 0..60 {
        let p = random_problem(&mut rng);
        let mrt = closed_form_mrt(&p).unwrap();
        let r_th = mrt.r_s * rng.random_range(0.0..1.0);
        let out = sca_maximize_secondary(&p, r_th, &ScaOptions::default()).unwrap();
        assert!(out.closed_form && (p.objective(&out.w.0) / mrt.objective - 1.0).abs() < 1e-12);
        let init = if case % 2 == 0 { InitStrategy::Feasibility } else { InitStrategy::Random { seed: case } };
        let opts = ScaOptions { closed_form_shortcut: false, init, ..ScaOptions::default() };
        let out = sca_maximize_secondary(&p, r_th, &opts).unwrap();
        let obj = p.objective(&out.w.0);
        assert!(obj <= mrt.objective * (1.0 + 1e-6), "case {case}: {obj} vs {}", mrt.objective);
        for w in out.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * (1.0 + w[0]));
        }
        assert_returned_beamformer_ok(&p, &out.w.0);
    }
}

#[test]
fn shortcut_returns_exactly_the_mrt_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let p = random_problem(&mut rng);
        let mrt = closed_form_mrt(&p).unwrap();
        let out = sca_maximize_secondary(&p, mrt.r_s, &ScaOptions::default()).unwrap();
        assert!(out.closed_form);
        assert_eq!(out.w, mrt.w);
        assert_eq!(out.r_c, mrt.r_c);
    }
}

#[test]
fn mrt_examples() {
    let one = C64::new(1.0, 0.0);
    let p = EffectiveProblem::new(1, vec![one], vec![one], 1.0, 1.0, vec![4.0]).unwrap();
    let s = closed_form_mrt(&p).unwrap();
    assert!((s.w.0[0] - C64::new(2.0, 0.0)).norm() < 1e-15 && (s.objective - 4.0).abs() < 1e-15);
    let h = vec![C64::from_polar(1.0, 1.1), C64::from_polar(1.0, -0.3)];
    let p = EffectiveProblem::new(1, vec![one, one], h, 1.0, 1.0, vec![1.0, 1.0]).unwrap();
    assert!((p.objective(&closed_form_mrt(&p).unwrap().w.0) - 4.0).abs() < 1e-14);
    // a silent cascaded channel at one AP switches that AP off
    let zero = C64::new(0.0, 0.0);
    let p = EffectiveProblem::new(1, vec![one, one], vec![one, zero], 1.0, 1.0, vec![1.0, 9.0]).unwrap();
    let s = closed_form_mrt(&p).unwrap();
    assert_eq!(s.w.0[1], zero);
    assert!((s.objective - 1.0).abs() < 1e-15);
}

#[test]
fn sca_objective_never_decreases() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut runs = 0;
    while runs < 100 {
        let p = random_problem(&mut rng);
        let mrt = closed_form_mrt(&p).unwrap();
        let bis = max_primary_rate(&p, 0.005, &SolverSettings::default()).unwrap();
        if bis.r_bar <= mrt.r_s {
            continue;
        }
        let r_th = mrt.r_s + (bis.r_bar - mrt.r_s) * rng.random_range(0.05..1.0);
        let out = sca_maximize_secondary(&p, r_th, &ScaOptions::default()).unwrap();
        for w in out.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * (1.0 + w[0]), "run {runs}: {:?}", out.trace);
        }
        assert!(out.converged && !out.rejected_step && out.iterations <= 100);
        let exact = {
            let s = inner(&p.g, &out.w.0).norm_sqr();
            let i = p.alpha * inner(&p.h, &out.w.0).norm_sqr();
            (1.0 + s / (i + p.noise)).log2()
        };
        assert!(exact >= r_th - 1e-6, "run {runs}: {exact} < {r_th}");
        assert_returned_beamformer_ok(&p, &out.w.0);
        runs += 1;
    }
}

#[test]
fn sca_on_realistic_draws_is_monotone_for_both_csi_modes() {
    for seed in 0..3 {
        let (perfect, imperfect) = realistic(seed, 50, 0.5);
        for p in [&perfect, &imperfect] {
            let mrt = closed_form_mrt(p).unwrap();
            let bis = max_primary_rate(p, 0.005, &SolverSettings::default()).unwrap();
            let r_th = 0.5 * (mrt.r_s + bis.r_bar);
            let out = sca_maximize_secondary(p, r_th, &ScaOptions::default()).unwrap();
            assert!(out.converged && out.iterations <= 100);
            for w in out.trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9 * (1.0 + w[0]));
            }
            assert!(p.primary_rate(&out.w.0) >= r_th - 1e-6);
        }
    }
}

#[test]
fn bisection_without_backscatter_matches_mrt_to_the_direct_link() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let q = random_problem(&mut rng);
        let p = EffectiveProblem { alpha: 0.0, ..q };
        let kappa = 0.005;
        let out = max_primary_rate(&p, kappa, &SolverSettings::default()).unwrap();
        let b: f64 = p.g.chunks(p.antennas).zip(&p.powers).map(|(g, &pm)| pm.sqrt() * inner(g, g).re.sqrt()).sum();
        let exact = (1.0 + b * b / p.noise).log2();
        assert!(out.r_bar <= exact && out.r_bar >= exact / (1.0 + kappa), "{} vs {exact}", out.r_bar);
    }
}

#[test]
fn bisection_result_is_self_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let kappa = 0.005;
    for _ in 0..20 {
        let p = random_problem(&mut rng);
        let out = max_primary_rate(&p, kappa, &SolverSettings::default()).unwrap();
        assert!(p.primary_rate(&out.w.0) >= out.r_bar / (1.0 + kappa));
        assert_returned_beamformer_ok(&p, &out.w.0);
        let lowest_bad = out.trace.iter().filter(|s| !s.is_feasible()).map(|s| s.mu).fold(f64::INFINITY, f64::min);
        let highest_good = out.trace.iter().filter(|s| s.is_feasible()).map(|s| s.mu).fold(0.0, f64::max);
        assert!(highest_good < lowest_bad);
        assert!(out.trace.iter().all(|s| s.verdict.is_some()));
        assert!(out.r_bar <= out.mu_max0);
    }
}

#[test]
fn zero_direct_channel_gives_zero_rate() {
    let z = C64::new(0.0, 0.0);
    let p = EffectiveProblem::new(2, vec![z; 4], vec![C64::new(1.0, 0.0); 4], 1.0, 1.0, vec![1.0, 1.0]).unwrap();
    let out = max_primary_rate(&p, 0.005, &SolverSettings::default()).unwrap();
    assert_eq!(out.r_bar, 0.0);
    assert!(out.w.0.iter().all(|v| *v == z));
}

#[test]
fn initializer_at_the_boundary_reproduces_the_bisection_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let p = random_problem(&mut rng);
        let s = SolverSettings::default();
        let bis = max_primary_rate(&p, 0.005, &s).unwrap();
        let w0 = sca_initialize(&p, bis.r_bar, InitStrategy::Feasibility, &s).unwrap();
        let diff: f64 = w0.0.iter().zip(&bis.w.0).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let size: f64 = bis.w.0.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(diff <= 1e-9 * size, "{diff} vs {size}");
        assert!(p.is_feasible(&w0.0, bis.r_bar, 1e-9, 0.0));
        let w_zero = sca_initialize(&p, 0.0, InitStrategy::Feasibility, &s).unwrap();
        assert_eq!(w_zero, closed_form_mrt(&p).unwrap().w);
        assert!(sca_initialize(&p, bis.mu_max0 * 1.01, InitStrategy::Feasibility, &s).is_err());
    }
}

#[test]
fn sca_rejects_infeasible_starting_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = random_problem(&mut rng);
    let too_loud = cfsr_core::rates::Beamformer(p.g.iter().map(|v| v * 100.0).collect());
    assert!(sca_from(&p, 0.1, too_loud, &ScaOptions::default()).is_err());
}

#[test]
fn region_is_monotone_and_ends_near_zero() {
    for seed in 0..2 {
        let (p, _) = realistic(100 + seed, 50, 0.5);
        let reg = rate_region(&p, &RegionOptions::default()).unwrap();
        for w in reg.points.windows(2) {
            assert!(w[1].r_th > w[0].r_th);
            assert!(w[1].r_c <= w[0].r_c + 1e-6);
        }
        for pt in &reg.points {
            assert!(pt.r_c >= 0.0);
            if pt.branch == Branch::ClosedForm {
                assert!(pt.r_th <= reg.r_hat_s);
            }
        }
        assert!(reg.boundary.r_c < 0.1 * reg.r_hat_c, "{} vs {}", reg.boundary.r_c, reg.r_hat_c);
    }
}

#[test]
fn larger_noise_shrinks_the_region() {
    for seed in 0..2 {
        let (p, _) = realistic(200 + seed, 50, 0.5);
        let noisy = EffectiveProblem { noise: p.noise * 2.0, ..p.clone() };
        let grid: Vec<f64> = (0..=20).map(f64::from).collect();
        let a = rate_region_on_grid(&p, &grid, &RegionOptions::default()).unwrap();
        let b = rate_region_on_grid(&noisy, &grid, &RegionOptions::default()).unwrap();
        assert!(a.r_bar_s >= b.r_bar_s);
        for (x, y) in a.points.iter().zip(&b.points) {
            assert!(x.r_c >= y.r_c - 1e-3, "R_th {}: {} vs {}", x.r_th, x.r_c, y.r_c);
        }
    }
}

#[test]
fn feasibility_program_accepts_zero_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = random_problem(&mut rng);
    let w = sca_initialize(&p, 0.0, InitStrategy::Feasibility, &SolverSettings::default()).unwrap();
    assert!(p.is_feasible(&w.0, 0.0, 1e-9, 0.0));
}
