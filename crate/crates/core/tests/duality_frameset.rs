use gaborlab::frame::reconstruct;
use gaborlab::region::regions_g2;
use gaborlab::scan::{density_agreement, g2_agreement};
use gaborlab::{
    bspline_compact_dual, classify_point_g2, compact_dual_on_grid, frame_bounds, janssen_residual, sample_window,
    scan_frame_set, BlockSize, CompactSignal, FrameClass, Lattice, Range, RegionLabel, SampleGrid, Signal, WindowSpec,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hat() -> CompactSignal {
    CompactSignal::from_window(&WindowSpec::bspline(2).unwrap()).unwrap()
}

fn random_signal(grid: SampleGrid, seed: u64) -> Signal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Signal::new(
        grid,
        (0..grid.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
    .unwrap()
}

#[test]
fn janssen_examples() {
    let g1 = CompactSignal::from_window(&WindowSpec::bspline(1).unwrap()).unwrap();
    assert!(janssen_residual(&g1, &g1, 1.0, 1.0).unwrap() < 1e-12);
    // Disjoint translates with beta = 1 / support: h = beta g / |g|^2 pointwise.
    let h = CompactSignal::sampled(-0.5, 1.0 / 1024.0, vec![1.0; 1024], "box").unwrap();
    assert!(janssen_residual(&g1, &h, 1.0, 1.0).unwrap() < 1e-12);
    assert!(janssen_residual(&g1, &h.perturbed(|_| 0.1).unwrap(), 1.0, 1.0).unwrap() > 0.09);
    assert_eq!(janssen_residual(&g1, &g1, 0.0, 1.0).unwrap_err().kind(), "invalid_argument");
    assert_eq!(janssen_residual(&g1, &g1, 1.0, -1.0).unwrap_err().kind(), "invalid_argument");
}

#[test]
fn region_c_dual_is_reciprocal_of_hat() {
    // With m = 1 the system reduces to g_2(x) h(x) = beta on [-alpha/2, alpha/2).
    let (alpha, beta) = (1.0, 0.5);
    let d = bspline_compact_dual(2, alpha, beta, BlockSize::Auto).unwrap();
    assert_eq!(d.m, 1);
    assert_eq!(d.support, (-0.5, 0.5));
    for i in 0..200 {
        let x = -0.5 + (i as f64 + 0.5) / 200.0;
        let expected = beta / (1.0 - x.abs());
        let got = d.dual.eval(x);
        // Nearest-cell lookup: at most one cell of 1/1024 away.
        assert!((got - expected).abs() < 2.0 * 2.0 / 1024.0, "x = {x}");
    }
    assert!(janssen_residual(&hat(), &d.dual, alpha, beta).unwrap() < 1e-8);
}

#[test]
fn compact_duals_at_example_points() {
    for &(alpha, beta, m) in &[(1.0, 0.5, 1usize), (1.0, 0.7, 2), (0.4, 1.5, 3), (0.4, 1.4, 3)] {
        let d = bspline_compact_dual(2, alpha, beta, BlockSize::Auto).unwrap();
        assert_eq!(d.m, m, "({alpha}, {beta})");
        let half = (2 * m - 1) as f64 * alpha / 2.0;
        assert!((d.support.0 + half).abs() < 1e-12 && (d.support.1 - half).abs() < 1e-12);
        let (lo, hi) = d.dual.support();
        assert!(lo >= -half - 1e-12 && hi <= half + 1e-12);
        let r = janssen_residual(&hat(), &d.dual, alpha, beta).unwrap();
        assert!(r < 1e-8, "({alpha}, {beta}): {r:e}");
    }
    let d = bspline_compact_dual(2, 1.0, 0.7, BlockSize::Auto).unwrap();
    assert!(!d.attempts[0].accepted && d.attempts[0].reason.is_some());
}

#[test]
fn compact_dual_failures() {
    assert_eq!(bspline_compact_dual(2, 1.0, 1.0, BlockSize::Auto).unwrap_err().kind(), "invalid_argument");
    assert_eq!(bspline_compact_dual(1, 0.5, 0.5, BlockSize::Auto).unwrap_err().kind(), "invalid_argument");
    let err = bspline_compact_dual(2, 1.0, 0.7, BlockSize::Fixed(1)).unwrap_err();
    assert_eq!(err.kind(), "singular_slice");
    assert!(err.to_string().contains("m = 1"));
    let err = bspline_compact_dual(2, 0.4, 1.5, BlockSize::Fixed(4)).unwrap_err();
    assert_eq!(err.kind(), "beyond_proven_regions");
    // In the open part of the frame set no block size up to 3 works.
    let err = bspline_compact_dual(2, 0.7, 1.15, BlockSize::Auto).unwrap_err();
    assert_eq!(err.kind(), "beyond_proven_regions");
}

#[test]
fn region_c_dual_is_unique() {
    let (alpha, beta) = (1.0, 0.6);
    assert!(regions_g2(alpha, beta).contains(&RegionLabel::RegionC));
    let d = bspline_compact_dual(2, alpha, beta, BlockSize::Fixed(1)).unwrap();
    assert!(janssen_residual(&hat(), &d.dual, alpha, beta).unwrap() < 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let (c0, c1, c2): (f64, f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let amp = 0.05 * (c0.abs() + c1.abs() + c2.abs());
        let perturbed = d.dual.perturbed(|x| 0.05 * (c0 + c1 * x + c2 * (7.0 * x).cos())).unwrap();
        let r = janssen_residual(&hat(), &perturbed, alpha, beta).unwrap();
        assert!(r > 1e-3 * amp, "{r:e}");
    }
}

#[test]
fn dual_of_dual_reconstruction() {
    // (1, 1/2), (1, 0.7), (0.4, 1.5) with every step a whole number of samples or bins.
    let cases = [(1024usize, 1.0 / 32.0, 32usize, 16usize), (1960, 1.0 / 28.0, 28, 49), (960, 1.0 / 30.0, 12, 48)];
    for (l, delta, a, b) in cases {
        let grid = SampleGrid::new(l, delta).unwrap();
        let lat = Lattice::new(grid, a, b).unwrap();
        let g = sample_window(&WindowSpec::bspline(2).unwrap(), &grid).unwrap();
        let (h, m) = compact_dual_on_grid(2, &lat, BlockSize::Auto).unwrap();
        for seed in 0..2 {
            let f = random_signal(grid, seed);
            let err = reconstruct(&f, &g, &h, &lat).unwrap().relative_error(&f).unwrap();
            assert!(err < 1e-6, "({}, {}), m = {m}: {err:e}", lat.alpha(), lat.beta());
            let err = reconstruct(&f, &h, &g, &lat).unwrap().relative_error(&f).unwrap();
            assert!(err < 1e-6);
        }
    }
}

#[test]
fn classifier_examples() {
    assert_eq!(classify_point_g2(1.5, 0.5), RegionLabel::RegionB);
    assert_eq!(classify_point_g2(0.4, 2.0), RegionLabel::NotFrameRedLine);
    assert_eq!(classify_point_g2(1.0, 1.5), RegionLabel::NotFrameDensity);
    assert_eq!(classify_point_g2(2.0, 0.1), RegionLabel::NotFrameDensity);
    assert_eq!(classify_point_g2(0.5, 2.0), RegionLabel::NotFrameDensity);
    assert_eq!(classify_point_g2(0.2, 3.0), RegionLabel::NotFrameRedLine);
    assert_eq!(classify_point_g2(0.5, 0.5), RegionLabel::Painless);
    assert_eq!(classify_point_g2(0.8, 0.6), RegionLabel::RegionC);
    assert_eq!(classify_point_g2(0.8, 0.8), RegionLabel::RegionD);
    assert_eq!(classify_point_g2(0.4, 1.4), RegionLabel::RegionE);
    assert_eq!(classify_point_g2(0.6, 1.2), RegionLabel::RegionF);
    assert_eq!(classify_point_g2(0.9, 0.95), RegionLabel::RegionG);
    assert_eq!(classify_point_g2(0.4, 1.5), RegionLabel::Unknown);
    assert_eq!(classify_point_g2(0.7, 1.15), RegionLabel::Unknown);
    assert_eq!(RegionLabel::RegionE.dual_block_size(), Some(3));
    assert_eq!(RegionLabel::Unknown.class(), FrameClass::Unknown);
}

#[test]
fn red_line_lattices_are_degenerate() {
    let grid = SampleGrid::new(1728, 1.0 / 48.0).unwrap();
    let g = sample_window(&WindowSpec::bspline(2).unwrap(), &grid).unwrap();
    for a in [6usize, 12, 18] {
        let lat = Lattice::new(grid, a, 72).unwrap();
        assert_eq!(lat.beta(), 2.0);
        assert!(lat.alpha() * 2.0 < 1.0);
        let r = frame_bounds(&g, &lat).unwrap();
        assert!(r.lower < 1e-4, "alpha = {}: A = {:e}", lat.alpha(), r.lower);
    }
    let lat = Lattice::new(grid, 24, 12).unwrap();
    assert!(frame_bounds(&g, &lat).unwrap().lower > 1e-2);
}

#[test]
fn hat_scan_agrees_with_classifier() {
    let grid = SampleGrid::new(1728, 1.0 / 48.0).unwrap();
    let range = Range::new(0.0, 2.0).unwrap();
    let map = scan_frame_set(&WindowSpec::bspline(2).unwrap(), range, range, 12, grid).unwrap();
    assert_eq!(map.cells.len(), 144);
    assert!(map.cells.iter().all(|c| c.label.is_some()));
    let agree = g2_agreement(&map);
    assert!(agree.checked > 40);
    assert!(agree.disagreements.is_empty(), "{:?}", agree.disagreements);
    assert_eq!(agree.checked + agree.exempt + agree.unknown + agree.unsnappable, 144);
}

#[test]
fn gaussian_scan_follows_density() {
    let grid = SampleGrid::new(576, 1.0 / 24.0).unwrap();
    let range = Range::new(0.0, 2.0).unwrap();
    let map = scan_frame_set(&WindowSpec::gaussian(), range, range, 10, grid).unwrap();
    let d = density_agreement(&map, 0.9, 1.1);
    assert!(d.checked > 50);
    assert!(d.fraction >= 0.95, "{d:?}");
    for c in &map.cells {
        if let Some(r) = c.report {
            if r.a * r.b > grid.len() {
                assert!(!r.is_frame);
            }
        }
    }
    let again = scan_frame_set(&WindowSpec::gaussian(), range, range, 10, grid).unwrap();
    assert_eq!(map.to_csv(), again.to_csv());
    assert_eq!(map.to_pgm(None), again.to_pgm(None));
    assert!(map.to_csv().starts_with("alpha_target,beta_target,alpha_snap,beta_snap,A,B,label\n"));
    assert!(map.to_pgm(None).starts_with(b"P5\n10 10\n255\n"));
}
