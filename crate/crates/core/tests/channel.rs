use cfsr_core::channel::{
    build_topology, large_scale, path_loss, realize, reference_gain, split_pilots, ApLayout, Point2, SystemConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn default_grid_has_the_four_coordinate_levels() {
    let cfg = SystemConfig::default();
    let topo = build_topology(&cfg).unwrap();
    assert_eq!(topo.ap_positions.len(), 16);
    let levels = [-375.0, -125.0, 125.0, 375.0];
    for p in &topo.ap_positions {
        assert!(levels.iter().any(|l| (p.x - l).abs() < 1e-9));
        assert!(levels.iter().any(|l| (p.y - l).abs() < 1e-9));
    }
    for (p, d) in topo.ap_positions.iter().zip(&topo.dist_ap_rx) {
        assert!((d - ((p.x - 5.0).powi(2) + p.y.powi(2)).sqrt()).abs() < 1e-9);
    }
}

#[test]
fn four_ap_grid_sits_on_the_border() {
    let cfg = SystemConfig { num_aps: 4, tx_power: vec![0.1; 4], area_side: 100.0, ..SystemConfig::default() };
    let topo = build_topology(&cfg).unwrap();
    for (p, d) in topo.ap_positions.iter().zip(&topo.dist_ap_bd) {
        assert_eq!((p.x.abs(), p.y.abs()), (50.0, 50.0));
        assert!((d - 70.71067811865476).abs() < 1e-9);
    }
    assert!((Point2::new(25.0, 25.0).distance(&Point2::new(0.0, 0.0)) - 35.3553).abs() < 1e-4);
}

#[test]
fn bad_layouts_are_rejected() {
    let cfg = SystemConfig { num_aps: 5, tx_power: vec![0.1; 5], ..SystemConfig::default() };
    assert!(build_topology(&cfg).is_err());
    let cfg = SystemConfig {
        num_aps: 1,
        tx_power: vec![0.1],
        ap_layout: ApLayout::Explicit(vec![Point2::new(0.0, 0.0)]),
        ..SystemConfig::default()
    };
    assert!(build_topology(&cfg).is_err());
    assert!(path_loss(0.0, 2.7, 1.0).is_err());
}

#[test]
fn path_loss_follows_the_power_law() {
    let beta0 = reference_gain(0.0857);
    assert!((beta0 - (0.0857 / (4.0 * core::f64::consts::PI)).powi(2)).abs() < 1e-18);
    let a = path_loss(100.0, 2.7, beta0).unwrap();
    let b = path_loss(200.0, 2.7, beta0).unwrap();
    assert!((a / b - 2f64.powf(2.7)).abs() < 1e-9);
}

#[test]
fn pilot_split_rounds_half_up_and_keeps_both_phases() {
    assert_eq!(split_pilots(50, 0.5), (25, 25));
    assert_eq!(split_pilots(50, 0.11), (6, 44));
    assert_eq!(split_pilots(50, 0.01), (1, 49));
    assert_eq!(split_pilots(50, 0.999), (49, 1));
    assert_eq!(split_pilots(100, 0.1), (10, 90));
}

#[test]
fn realizations_have_the_configured_second_moments() {
    let cfg = SystemConfig::default();
    let topo = build_topology(&cfg).unwrap();
    let ls = large_scale(&cfg, &topo).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let trials = 20_000;
    let n = cfg.antennas_per_ap;
    let mut g = vec![0.0; cfg.num_aps];
    let mut h = vec![0.0; cfg.num_aps];
    for _ in 0..trials {
        let chan = realize(&cfg, &topo, &mut rng).unwrap();
        for m in 0..cfg.num_aps {
            g[m] += chan.g[m * n..(m + 1) * n].iter().map(|v| v.norm_sqr()).sum::<f64>();
            h[m] += chan.h[m * n..(m + 1) * n].iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
    }
    let cnt = (trials * n) as f64;
    for m in 0..cfg.num_aps {
        assert!((g[m] / cnt / ls.b[m] - 1.0).abs() < 0.03, "AP {m}");
        // |q f|² has relative spread √3, hence the wider band
        assert!((h[m] / cnt / ls.eps[m] - 1.0).abs() < 0.06, "AP {m}");
    }
}
