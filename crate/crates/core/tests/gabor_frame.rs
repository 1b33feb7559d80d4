use std::f64::consts::{PI, SQRT_2};

use gaborlab::frame::{frame_bounds_with, gabor_atom, EigenMethod};
use gaborlab::lattice::divisors;
use gaborlab::{
    analysis, canonical_dual, canonical_tight, frame_apply, frame_bounds, least_norm_check, make_lattice,
    sample_window, synthesis, zak, zak_tightness, CoefficientArray, Lattice, SampleGrid, Signal, WindowSpec,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

fn random_coefficients(lat: &Lattice, seed: u64) -> CoefficientArray {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = CoefficientArray::zeros(lat);
    for v in c.values_mut() {
        *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    c
}

fn gaussian(grid: SampleGrid) -> Signal {
    sample_window(&WindowSpec::gaussian(), &grid).unwrap()
}

/// The normalized indicator of `a` samples with `b = L/a`: an orthonormal basis.
fn indicator_onb(grid: SampleGrid, a: usize) -> (Signal, Lattice) {
    let lat = Lattice::new(grid, a, grid.len() / a).unwrap();
    let g = sample_window(&WindowSpec::indicator(lat.alpha()).unwrap(), &grid).unwrap();
    (g.normalized().unwrap(), lat)
}

/// All atoms `M_{k beta} T_{n alpha} g`, computed one by one.
fn atoms(g: &Signal, lat: &Lattice) -> Vec<Signal> {
    let mut out = Vec::new();
    for n in 0..lat.time_count() {
        for k in 0..lat.freq_count() {
            out.push(gabor_atom(g, lat, n, k));
        }
    }
    out
}

/// `S[i, j] = delta sum_atoms phi[i] conj(phi[j])`.
fn assembled_operator(g: &Signal, lat: &Lattice) -> DMatrix<Complex64> {
    let l = g.len();
    let d = g.grid().delta();
    let mut s = DMatrix::zeros(l, l);
    for phi in atoms(g, lat) {
        let v = phi.values();
        for i in 0..l {
            for j in 0..l {
                s[(i, j)] += v[i] * v[j].conj() * d;
            }
        }
    }
    s
}

#[test]
fn make_lattice_snaps_to_divisors() {
    let grid = SampleGrid::default();
    let s = make_lattice(grid, 1.0, 1.0, None).unwrap();
    assert_eq!((s.lattice.a(), s.lattice.b()), (32, 32));
    assert_eq!(s.lattice.redundancy(), 1.0);
    let s = make_lattice(grid, 1.0, 0.5, None).unwrap();
    assert_eq!((s.lattice.a(), s.lattice.b()), (32, 16));
    assert_eq!(s.lattice.redundancy(), 2.0);

    let target = SQRT_2 - 0.01;
    let divs = divisors(1024);
    let nearest = |t: f64| {
        *divs
            .iter()
            .min_by(|x, y| (**x as f64 - t).abs().partial_cmp(&(**y as f64 - t).abs()).unwrap())
            .unwrap()
    };
    let a = nearest(target * 32.0);
    let s = make_lattice(grid, target, target, None).unwrap();
    assert_eq!(s.lattice.a(), a);
    assert!((s.alpha_error - (a as f64 / 32.0 - target).abs()).abs() < 1e-15);
    let err = make_lattice(grid, target, 0.5, Some(0.05)).unwrap_err();
    assert_eq!(err.kind(), "unsnappable");
    assert!(err.to_string().contains("alpha"));
}

#[test]
fn analysis_examples() {
    let grid = SampleGrid::new(96, 0.125).unwrap();
    let lat = Lattice::new(grid, 8, 6).unwrap();
    let g = gaussian(grid);
    let c = analysis(&g, &lat, &g).unwrap();
    assert!((c.get(0, 0) - g.norm_sqr()).norm() < 1e-12);

    let f = random_signal(grid, 1);
    let c = analysis(&g, &lat, &f).unwrap();
    for (idx, phi) in atoms(&g, &lat).iter().enumerate() {
        let (n, k) = (idx / lat.freq_count(), idx % lat.freq_count());
        assert!((c.get(n, k) - f.inner(phi).unwrap()).norm() < 1e-12);
    }

    let (chi, onb) = indicator_onb(SampleGrid::default(), 32);
    let atom = gabor_atom(&chi, &onb, 3, 5);
    let c = analysis(&chi, &onb, &atom).unwrap();
    let nonzero = c.values().iter().filter(|v| v.norm() > 1e-10).count();
    assert_eq!(nonzero, 1);
    assert!((c.get(3, 5) - 1.0).norm() < 1e-10);
}

#[test]
fn synthesis_examples() {
    let grid = SampleGrid::new(96, 0.125).unwrap();
    let lat = Lattice::new(grid, 8, 6).unwrap();
    let g = gaussian(grid);
    assert_eq!(synthesis(&g, &lat, &CoefficientArray::delta(&lat, 0, 0)).unwrap(), g);

    let c = random_coefficients(&lat, 2);
    let f = random_signal(grid, 3);
    let lhs = synthesis(&g, &lat, &c).unwrap().inner(&f).unwrap();
    let rhs = c.inner(&analysis(&g, &lat, &f).unwrap());
    assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));

    let tight = canonical_tight(&g, &lat).unwrap();
    let back = synthesis(&tight, &lat, &analysis(&tight, &lat, &f).unwrap()).unwrap();
    assert!(back.relative_error(&f).unwrap() < 1e-10);

    let wrong = CoefficientArray::zeros(&Lattice::new(grid, 8, 8).unwrap());
    assert_eq!(synthesis(&g, &lat, &wrong).unwrap_err().kind(), "dimension_mismatch");
}

#[test]
fn frame_apply_examples() {
    let (chi, onb) = indicator_onb(SampleGrid::default(), 32);
    let f = random_signal(SampleGrid::default(), 4);
    assert!(frame_apply(&chi, &onb, &f).unwrap().relative_error(&f).unwrap() < 1e-10);

    let grid = SampleGrid::new(96, 0.125).unwrap();
    let lat = Lattice::new(grid, 8, 6).unwrap();
    let g = gaussian(grid);
    for seed in 0..5 {
        let f = random_signal(grid, 10 + seed);
        let sf = frame_apply(&g, &lat, &f).unwrap();
        let quad = sf.inner(&f).unwrap();
        let direct: f64 = atoms(&g, &lat).iter().map(|phi| f.inner(phi).unwrap().norm_sqr()).sum();
        assert!(quad.re >= 0.0);
        assert!(quad.im.abs() < 1e-12 * quad.re);
        assert!((quad.re - direct).abs() < 1e-12 * direct);
    }
}

#[test]
fn frame_apply_matches_assembled_matrix() {
    for (l, delta, a, b) in [(96usize, 0.125, 8usize, 6usize), (256, 1.0 / 16.0, 16, 8), (144, 1.0 / 12.0, 9, 12)] {
        let grid = SampleGrid::new(l, delta).unwrap();
        let lat = Lattice::new(grid, a, b).unwrap();
        let g = sample_window(&"gaussian@0.8".parse().unwrap(), &grid).unwrap();
        let s = assembled_operator(&g, &lat);
        let f = random_signal(grid, l as u64);
        let sf = &s * DVector::from_column_slice(f.values());
        let got = frame_apply(&g, &lat, &f).unwrap();
        let diff = (DVector::from_column_slice(got.values()) - &sf).norm() / sf.norm();
        assert!(diff < 1e-12, "L = {l}: {diff:e}");
    }
}

#[test]
fn frame_operator_commutes_with_lattice_shifts() {
    let grid = SampleGrid::new(256, 1.0 / 16.0).unwrap();
    let lat = Lattice::new(grid, 16, 8).unwrap();
    let g = gaussian(grid);
    let f = random_signal(grid, 5);
    let sf = frame_apply(&g, &lat, &f).unwrap();
    for (n, k) in [(1, 0), (0, 1), (3, 2), (15, 31)] {
        let lhs = frame_apply(&g, &lat, &gabor_atom(&f, &lat, n, k)).unwrap();
        let rhs = gabor_atom(&sf, &lat, n, k);
        assert!(lhs.relative_error(&rhs).unwrap() < 1e-10, "({n}, {k})");
    }
}

#[test]
fn indicator_onb_has_unit_bounds() {
    for a in [16, 32, 64] {
        let (chi, onb) = indicator_onb(SampleGrid::default(), a);
        let r = frame_bounds(&chi, &onb).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-10 && (r.upper - 1.0).abs() < 1e-10, "a = {a}");
    }
}

#[test]
fn gaussian_at_half_density_is_a_frame() {
    // alpha = beta = 2^{-1/2} exactly: a = b = 24 samples, L = 2ab.
    let alpha = 0.5f64.sqrt();
    let grid = SampleGrid::new(1152, alpha / 24.0).unwrap();
    let lat = Lattice::new(grid, 24, 24).unwrap();
    assert!((lat.alpha() - alpha).abs() < 1e-12 && (lat.beta() - alpha).abs() < 1e-12);
    let r = frame_bounds(&gaussian(grid), &lat).unwrap();
    assert!(r.lower > 0.05 && r.upper < 4.0 && r.is_frame, "{r:?}");
}

#[test]
fn undersampled_lattice_is_rank_deficient() {
    let grid = SampleGrid::default();
    let g = gaussian(grid);
    for (a, b) in [(64, 32), (32, 64), (64, 64)] {
        let lat = Lattice::new(grid, a, b).unwrap();
        let r = frame_bounds(&g, &lat).unwrap();
        assert!(r.lower < 1e-12 && !r.is_frame, "({a}, {b}): {r:?}");
    }
    // The Gram matrix of the atoms has rank below L.
    let grid = SampleGrid::new(96, 0.125).unwrap();
    let lat = Lattice::new(grid, 12, 16).unwrap();
    let rank = assembled_operator(&gaussian(grid), &lat).rank(1e-10);
    assert!(rank < 96);
}

#[test]
fn block_and_lanczos_bounds_agree() {
    let grid = SampleGrid::new(3072, 1.0 / 32.0).unwrap();
    let lat = Lattice::new(grid, 32, 48).unwrap();
    let g = gaussian(grid);
    let dense = frame_bounds_with(&g, &lat, EigenMethod::BlockDense).unwrap();
    let lanczos = frame_bounds(&g, &lat).unwrap();
    assert_eq!(lanczos.eigensolver.method, EigenMethod::Lanczos);
    assert!((dense.lower - lanczos.lower).abs() < 1e-8 * dense.upper);
    assert!((dense.upper - lanczos.upper).abs() < 1e-8 * dense.upper);
}

#[test]
fn zak_bounds_match_frame_bounds() {
    let grid = SampleGrid::default();
    let lat = Lattice::new(grid, 32, 16).unwrap();
    for spec in [WindowSpec::gaussian(), "gaussian@1.5".parse().unwrap(), WindowSpec::bspline(3).unwrap()] {
        let g = sample_window(&spec, &grid).unwrap();
        let r = frame_bounds(&g, &lat).unwrap();
        let z = zak_tightness(&g).unwrap();
        assert!((r.lower - z.min).abs() < 1e-10 * r.upper, "{spec}");
        assert!((r.upper - z.max).abs() < 1e-10 * r.upper, "{spec}");
    }
}

#[test]
fn canonical_dual_examples() {
    let (chi, onb) = indicator_onb(SampleGrid::default(), 32);
    assert!(canonical_dual(&chi, &onb).unwrap().relative_error(&chi).unwrap() < 1e-10);
    assert!(canonical_tight(&chi, &onb).unwrap().relative_error(&chi).unwrap() < 1e-10);

    let grid = SampleGrid::default();
    let lat = Lattice::new(grid, 32, 16).unwrap();
    let g = gaussian(grid);
    let tight = canonical_tight(&g, &lat).unwrap();
    // A tight frame with bound 3 has dual g / 3.
    let scaled = tight.scale(3f64.sqrt());
    let dual = canonical_dual(&scaled, &lat).unwrap();
    assert!(dual.relative_error(&scaled.scale(1.0 / 3.0)).unwrap() < 1e-10);

    let dual = canonical_dual(&g, &lat).unwrap();
    for seed in 0..3 {
        let f = random_signal(grid, 30 + seed);
        let back = synthesis(&g, &lat, &analysis(&dual, &lat, &f).unwrap()).unwrap();
        assert!(back.relative_error(&f).unwrap() < 1e-8);
        let back = synthesis(&dual, &lat, &analysis(&g, &lat, &f).unwrap()).unwrap();
        assert!(back.relative_error(&f).unwrap() < 1e-8);
    }

    let r = frame_bounds(&g, &lat).unwrap();
    let rd = frame_bounds(&dual, &lat).unwrap();
    assert!((rd.lower - 1.0 / r.upper).abs() < 1e-8 * rd.lower);
    assert!((rd.upper - 1.0 / r.lower).abs() < 1e-8 * rd.upper);
}

#[test]
fn canonical_tight_is_parseval() {
    let grid = SampleGrid::default();
    let lat = Lattice::new(grid, 32, 16).unwrap();
    let tight = canonical_tight(&gaussian(grid), &lat).unwrap();
    let r = frame_bounds(&tight, &lat).unwrap();
    assert!((r.lower - 1.0).abs() < 1e-8 && (r.upper - 1.0).abs() < 1e-8);
    let energy = analysis(&tight, &lat, &tight).unwrap().norm_sqr();
    assert!((energy - tight.norm_sqr()).abs() < 1e-10);
}

#[test]
fn non_frames_have_no_dual() {
    let grid = SampleGrid::default();
    let lat = Lattice::new(grid, 64, 32).unwrap();
    let err = canonical_dual(&gaussian(grid), &lat).unwrap_err();
    assert_eq!(err.kind(), "not_a_frame");
    assert!(err.is_numerical());
}

#[test]
fn canonical_coefficients_have_least_norm() {
    let grid = SampleGrid::new(256, 1.0 / 16.0).unwrap();
    let lat = Lattice::new(grid, 16, 8).unwrap();
    let g = gaussian(grid);
    let f = random_signal(grid, 6);
    let r = least_norm_check(&f, &g, &lat, 100, 7).unwrap();
    assert_eq!(r.trials, 100);
    assert!(r.all_strict && r.min_excess > 0.0);
    assert_eq!(r.zero_perturbation_excess, 0.0);
    assert!(r.reconstruction_error < 1e-10);
    assert!(r.max_synthesis_error < 1e-10);
    assert!(r.max_pythagoras_defect < 1e-10);

    let (chi, onb) = indicator_onb(grid, 16);
    assert_eq!(least_norm_check(&f, &chi, &onb, 10, 1).unwrap_err().kind(), "degenerate");
}

#[test]
fn zak_examples() {
    let grid = SampleGrid::default();
    let z = zak(&Signal::impulse(grid, 0), 32).unwrap();
    let first = z.get(0, 0).norm();
    assert!((0..z.m()).all(|k| (z.get(0, k).norm() - first).abs() < 1e-15));
    assert_eq!(zak(&Signal::impulse(grid, 0), 48).unwrap_err().kind(), "unrepresentable");

    for seed in 0..3 {
        let f = random_signal(grid, 40 + seed);
        for k in [8, 32, 64] {
            let z = zak(&f, k).unwrap();
            assert!((z.energy() - f.norm_sqr()).abs() < 1e-12 * f.norm_sqr());
        }
    }

    // f[j + K] has Zak transform e^{-2 pi i k / M} Z[n, k].
    let f = random_signal(grid, 50);
    let kk = 32;
    let z = zak(&f, kk).unwrap();
    let zs = zak(&f.shift_samples(-(kk as isize)), kk).unwrap();
    let m = z.m();
    for n in 0..kk {
        for k in 0..m {
            let phase = Complex64::from_polar(1.0, -2.0 * PI * k as f64 / m as f64);
            assert!((zs.get(n, k) - phase * z.get(n, k)).norm() < 1e-12 * (1.0 + z.get(n, k).norm()));
        }
    }
}

#[test]
fn zak_tightness_examples() {
    let grid = SampleGrid::default();
    let lat = Lattice::new(grid, 32, 16).unwrap();
    let g = gaussian(grid);
    let tight = canonical_tight(&g, &lat).unwrap();
    let p = zak_tightness(&tight).unwrap();
    assert!(p.flatness < 1e-8 && p.tight);
    let raw = zak_tightness(&g).unwrap();
    assert!(raw.flatness > 0.01 && !raw.tight);
    let doubled = zak_tightness(&g.scale(2.0)).unwrap();
    assert!((doubled.min - 4.0 * raw.min).abs() < 1e-12 * doubled.max);
    assert!((doubled.max - 4.0 * raw.max).abs() < 1e-12 * doubled.max);
    assert!((doubled.flatness - raw.flatness).abs() < 1e-10);

    let odd = SampleGrid::new(96, 1.0 / 32.0).unwrap();
    assert_eq!(zak_tightness(&Signal::zeros(odd)).unwrap_err().kind(), "unrepresentable");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn frame_operator_is_positive_and_self_adjoint(seed in 0u64..10_000) {
        let grid = SampleGrid::new(96, 0.125).unwrap();
        let lat = Lattice::new(grid, 8, 6).unwrap();
        let g = random_signal(grid, seed);
        let f = random_signal(grid, seed + 1);
        let h = random_signal(grid, seed + 2);
        let sf = frame_apply(&g, &lat, &f).unwrap();
        let sh = frame_apply(&g, &lat, &h).unwrap();
        let lhs = sf.inner(&h).unwrap();
        let rhs = f.inner(&sh).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
        prop_assert!(sf.inner(&f).unwrap().re >= 0.0);
    }
}
