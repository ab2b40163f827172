mod common;

use common::{dagger, inner, propagator, scrambled_vector};
use ndarray::Array1;
use num_complex::Complex64 as C64;
use otoc_lab::model::{self, ModelParams, OperatorTag};
use otoc_lab::otoc::{self, OtocEvaluator, VarianceMode, FREQUENCY_TOL};
use otoc_lab::spectral::{self, BasisTag, QuantumState};
use otoc_lab::OperatorMatrix;
use proptest::prelude::*;

fn grid(count: usize, t_max: f64) -> Vec<f64> {
    (0..count).map(|k| t_max * k as f64 / (count - 1) as f64).collect()
}

/// `⟨ψ|B(t)† A† B(t) A|ψ⟩` from dense propagators.
fn dense_otoc(h: &OperatorMatrix, a: &OperatorMatrix, b: &OperatorMatrix, psi: &Array1<C64>, t: f64) -> C64 {
    let u = propagator(h, t);
    let bt = dagger(&u).dot(&b.to_complex()).dot(&u);
    let a = a.to_complex();
    let chain = dagger(&bt).dot(&dagger(&a)).dot(&bt).dot(&a);
    inner(psi, &chain.dot(psi))
}

fn random_product_state(n: usize, seed: f64) -> QuantumState {
    let boson = QuantumState::normalized(scrambled_vector(n + 1, seed), BasisTag::BosonOnly).unwrap();
    let q = scrambled_vector(2, seed * 1.7);
    let norm = (q[0].norm_sqr() + q[1].norm_sqr()).sqrt();
    QuantumState::product(&boson, [q[0] / norm, q[1] / norm]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn two_boson_series_matches_dense_propagators(
        u in -2.0f64..2.0, j_a in 0.1f64..2.0, w in -3.0f64..3.0, seed in 0.1f64..4.0, t in 0.0f64..6.0,
    ) {
        let p = ModelParams::new(2, u, j_a, w).unwrap();
        let h = model::build_hamiltonian(&p).unwrap();
        let d = spectral::diagonalize_model(&p).unwrap();
        let psi = random_product_state(2, seed);
        let sx = model::embed_qubit(&model::sigma_x(), 2);
        let sz = model::embed_qubit(&model::sigma_z(), 2);
        let szn = OperatorTag::SzOverN.build(2, true).unwrap();
        for (a, b) in [(&sx, &sx), (&szn, &sz)] {
            let got = otoc::otoc_series(&d, a, b, &psi, &[t]).unwrap().values[0];
            let want = dense_otoc(&h, a, b, psi.amplitudes(), t);
            prop_assert!((got - want).norm() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn pauli_otoc_is_bounded(seed in 0.1f64..4.0, t in 0.0f64..50.0, lam in -4.0f64..3.0) {
        let p = ModelParams::at_reduced_lambda(12, lam, 1.0, 1.0).unwrap();
        let d = spectral::diagonalize_model(&p).unwrap();
        let psi = QuantumState::normalized(scrambled_vector(d.dim(), seed), BasisTag::Composite).unwrap();
        for tag in [OperatorTag::SigmaX, OperatorTag::SigmaZ] {
            let op = tag.build(12, true).unwrap();
            let f = otoc::otoc_series(&d, &op, &op, &psi, &[0.0, t]).unwrap();
            prop_assert!((f.values[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
            prop_assert!(f.values[1].norm() <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn spectral_sum_matches_pipeline() {
    for n in [10, 50] {
        let p = ModelParams::at_reduced_lambda(n, -1.5, 1.0, 1.0).unwrap();
        let d = spectral::diagonalize_model(&p).unwrap();
        let sx = model::embed_qubit(&model::sigma_x(), n);
        let el = spectral::heisenberg_elements(&sx, &d).unwrap();
        let times = grid(100, 30.0);
        let fast = otoc::eigenstate_series(&d, OperatorTag::SigmaX, 0, &times).unwrap();
        let slow = otoc::otoc_series_spectral_sum(&d, &el, 0, &times, otoc::SPECTRAL_SUM_CAP).unwrap();
        let err = fast.values.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "N={n}: {err}");
    }
}

#[test]
fn echo_form_matches_pipeline_on_product_state() {
    for n in [10, 50] {
        let p = ModelParams::at_reduced_lambda(n, -2.0, 1.0, 1.0).unwrap();
        let psi = otoc::default_echo_state(&p).unwrap();
        let times = grid(200, 40.0);
        let echo = otoc::echo_otoc(&p, &psi, &times).unwrap();
        let d = spectral::diagonalize_model(&p).unwrap();
        let sx = model::embed_qubit(&model::sigma_x(), n);
        let direct = otoc::otoc_series(&d, &sx, &sx, &psi, &times).unwrap();
        let err = echo.values.iter().zip(&direct.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "N={n}: {err}");
    }
}

#[test]
fn echo_is_trivial_without_coupling() {
    let p = ModelParams::new(20, -0.3, 1.0, 0.0).unwrap();
    let psi = otoc::default_echo_state(&p).unwrap();
    let s = otoc::echo_otoc(&p, &psi, &grid(50, 100.0)).unwrap();
    assert!(s.values.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-10));
}

#[test]
fn commutator_identity() {
    let p = ModelParams::at_reduced_lambda(6, -1.0, 1.0, 1.3).unwrap();
    let d = spectral::diagonalize_model(&p).unwrap();
    let psi = QuantumState::normalized(scrambled_vector(d.dim(), 1.1), BasisTag::Composite).unwrap();
    for tag in [OperatorTag::SigmaX, OperatorTag::SigmaZ] {
        let op = tag.build(6, true).unwrap();
        let ev = OtocEvaluator::new(&d, &op, &op, &psi).unwrap();
        for t in [0.0, 0.3, 2.0, 11.0] {
            let c = ev.commutator_square(&d, t).unwrap();
            assert!((c - 2.0 * (1.0 - ev.eval(t).re)).abs() < 1e-9);
        }
    }
}

#[test]
fn gap_matching_agrees_with_quadrature_and_improves_with_horizon() {
    let p = ModelParams::at_reduced_lambda(30, -2.0, 1.0, 1.0).unwrap();
    let d = spectral::diagonalize_model(&p).unwrap();
    let sx = model::embed_qubit(&model::sigma_x(), 30);
    let exact = otoc::long_time_average(&d, 0, &sx).unwrap();
    assert!(exact.variance.is_none());
    let ev = OtocEvaluator::new(&d, &sx, &sx, &d.ground_state()).unwrap();
    let short = otoc::long_time_average_numeric(&ev, 50.0, 5_001, VarianceMode::Real).unwrap();
    let long = otoc::long_time_average_numeric(&ev, 5.0e3, 50_001, VarianceMode::Real).unwrap();
    assert!((long.f_bar - exact.f_bar).abs() < 0.01);
    assert!((long.f_bar - exact.f_bar).abs() < (short.f_bar - exact.f_bar).abs());
    assert!(long.variance.unwrap() >= 0.0);
    assert!(otoc::long_time_average_numeric(&ev, 10.0, 999, VarianceMode::Real).is_err());
}

#[test]
fn eigenstate_average_matches_quadrature_for_two_bosons() {
    let p = ModelParams::new(2, -0.8, 0.9, 1.7).unwrap();
    let d = spectral::diagonalize_model(&p).unwrap();
    for tag in [OperatorTag::SigmaX, OperatorTag::SigmaZ] {
        let op = tag.build(2, true).unwrap();
        for level in 0..d.dim() {
            let exact = otoc::eigenstate_otoc_average(&d, level, &op).unwrap();
            let ev = OtocEvaluator::new(&d, &op, &op, &d.eigenstate(level).unwrap()).unwrap();
            let numeric = otoc::long_time_average_numeric(&ev, 2.0e4, 400_001, VarianceMode::Real).unwrap();
            assert!((exact - numeric.f_bar).abs() < 2e-3, "{tag:?} level {level}: {exact} vs {}", numeric.f_bar);
        }
    }
}

#[test]
fn general_state_average_matches_quadrature() {
    let p = ModelParams::at_reduced_lambda(8, -1.5, 1.0, 1.0).unwrap();
    let d = spectral::diagonalize_model(&p).unwrap();
    let sx = model::embed_qubit(&model::sigma_x(), 8);
    let psi = otoc::default_echo_state(&p).unwrap();
    let exact = otoc::long_time_average_state(&d, &sx, &sx, &psi, FREQUENCY_TOL, otoc::GENERAL_AVERAGE_CAP).unwrap();
    let ev = OtocEvaluator::new(&d, &sx, &sx, &psi).unwrap();
    let numeric = otoc::long_time_average_numeric(&ev, 2.0e4, 200_001, VarianceMode::Complex).unwrap();
    assert!((exact.f_bar_complex - numeric.f_bar_complex).norm() < 5e-3);
    // On an eigenstate the general route reduces to the single-level one.
    let g = otoc::long_time_average_state(&d, &sx, &sx, &d.ground_state(), FREQUENCY_TOL, 1000).unwrap();
    let e = otoc::long_time_average(&d, 0, &sx).unwrap();
    assert!((g.f_bar - e.f_bar).abs() < 1e-12);
    assert!(otoc::long_time_average_state(&d, &sx, &sx, &psi, FREQUENCY_TOL, 4).is_err());
}

#[test]
fn imaginary_part_averages_to_zero() {
    let sx = model::embed_qubit(&model::sigma_x(), 50);
    for lam in [-2.0, 2.0] {
        let p = ModelParams::at_reduced_lambda(50, lam, 1.0, 1.0).unwrap();
        let d = spectral::diagonalize_model(&p).unwrap();
        let ev = OtocEvaluator::new(&d, &sx, &sx, &d.ground_state()).unwrap();
        let s = otoc::long_time_average_numeric(&ev, 5.0e3, 50_001, VarianceMode::Complex).unwrap();
        assert!(s.f_bar_complex.im.abs() < 1e-3, "λ={lam}: {}", s.f_bar_complex.im);
        let g = otoc::long_time_average(&d, 0, &sx).unwrap();
        assert!(g.f_bar_complex.im.abs() < 1e-3);
    }
}

#[test]
fn doublet_members_share_the_average() {
    let p = ModelParams::at_reduced_lambda(50, -3.0, 1.0, 1.0).unwrap();
    let d = spectral::diagonalize_model(&p).unwrap();
    assert_ne!(d.parities()[0], d.parities()[1]);
    let sx = model::embed_qubit(&model::sigma_x(), 50);
    let f0 = otoc::eigenstate_otoc_average(&d, 0, &sx).unwrap();
    let f1 = otoc::eigenstate_otoc_average(&d, 1, &sx).unwrap();
    assert!((f0 - f1).abs() < 1e-9, "{f0} vs {f1}");
}

#[test]
fn normal_phase_average_is_dominated_by_diagonal_term() {
    let defect = |n: usize| {
        let p = ModelParams::at_reduced_lambda(n, 5.0, 1.0, 1.0).unwrap();
        let d = spectral::diagonalize_model(&p).unwrap();
        let sx = model::embed_qubit(&model::sigma_x(), n);
        let el = spectral::heisenberg_elements(&sx, &d).unwrap();
        let f = otoc::long_time_average(&d, 0, &sx).unwrap().f_bar;
        (f - el.get(0, 0).re.powi(4)).abs()
    };
    let (small, large) = (defect(100), defect(400));
    assert!(small < 5e-3, "{small}");
    assert!(large < small, "{small} then {large}");
}

#[test]
fn cat_state_otoc_is_a_pure_phase() {
    // With only W Ŝ_z σ̂_z the cat is an eigenstate at E = −WN/2 and σ̂_x maps it
    // to the one at +WN/2, so F(t) = e^{2i(E₀ − E₁)t} = e^{−2iWNt}.
    let (n, w) = (10, 0.7);
    let p = ModelParams::new(n, 0.0, 0.0, w).unwrap().with_tunneling(0.0).unwrap();
    let d = spectral::diagonalize_model(&p).unwrap();
    let cat = otoc::cat_state(n).unwrap();
    let sx = model::embed_qubit(&model::sigma_x(), n);
    let times = grid(200, 4.0);
    let s = otoc::otoc_series(&d, &sx, &sx, &cat, &times).unwrap();
    for (t, f) in times.iter().zip(&s.values) {
        let want = C64::from_polar(1.0, -2.0 * w * n as f64 * t);
        assert!((f - want).norm() < 1e-10);
    }
    let ev = OtocEvaluator::new(&d, &sx, &sx, &cat).unwrap();
    let stats = otoc::long_time_average_numeric(&ev, 500.0, 100_001, VarianceMode::Real).unwrap();
    assert!(stats.f_bar.abs() < 1e-3);
    assert!((stats.variance.unwrap() - 0.5).abs() < 1e-3);
}

#[test]
fn participation_ratio_limits() {
    let p = ModelParams::at_reduced_lambda(60, -2.0, 1.0, 1.0).unwrap();
    let d = spectral::diagonalize_model(&p).unwrap();
    for level in [0, 7, 100] {
        assert!((otoc::participation_ratio(&d, &d.eigenstate(level).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }
    let flat = d.synthesize(&Array1::from_elem(d.dim(), C64::new((d.dim() as f64).sqrt().recip(), 0.0)));
    assert!((otoc::participation_ratio(&d, &flat).unwrap() - d.dim() as f64).abs() < 1e-8);
    let sx = model::embed_qubit(&model::sigma_x(), 60);
    let pr = otoc::kicked_participation_ratio(&d, &sx, 0).unwrap();
    assert!((1.0..=d.dim() as f64).contains(&pr));
    let normal = spectral::diagonalize_model(&ModelParams::at_reduced_lambda(300, 3.0, 1.0, 1.0).unwrap()).unwrap();
    let pr = otoc::kicked_participation_ratio(&normal, &model::embed_qubit(&model::sigma_x(), 300), 0).unwrap();
    assert!(pr < 1.01, "{pr}");
}

#[test]
fn two_point_function_basics() {
    let p = ModelParams::at_reduced_lambda(40, -1.0, 1.0, 1.0).unwrap();
    let d = spectral::diagonalize_model(&p).unwrap();
    let psi = otoc::default_echo_state(&p).unwrap();
    let sx = model::embed_qubit(&model::sigma_x(), 40);
    let g = otoc::two_point(&d, &psi, &sx, &[0.0, 1.0]).unwrap();
    assert!((g[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
    assert!(g[1].norm() <= 1.0 + 1e-12);

    let free = ModelParams::new(40, -0.01, 1.0, 0.0).unwrap();
    let d = spectral::diagonalize_model(&free).unwrap();
    let psi = otoc::default_echo_state(&free).unwrap();
    let g = otoc::two_point(&d, &psi, &sx, &grid(30, 50.0)).unwrap();
    assert!(g.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-10));
    let avg = otoc::two_point_long_time_average(&d, &psi, &sx, FREQUENCY_TOL).unwrap();
    assert!((avg - C64::new(1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn coherent_state_overlaps_free_ground_state() {
    let p = ModelParams::new(100, 0.0, 1.0, 0.0).unwrap();
    let ground = spectral::diagonalize_boson(&p).unwrap().ground_state();
    let x = otoc::coherent_state(std::f64::consts::FRAC_PI_2, 0.0, 100).unwrap();
    assert!(ground.inner(&x).norm_sqr() >= 0.99);
    let (a, b) = otoc::broken_phase_angles(-4.0).unwrap();
    for theta in [a, b] {
        assert!((otoc::coherent_state(theta, 0.0, 30).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn csv_export_has_header_and_rows() {
    let p = ModelParams::at_reduced_lambda(6, 1.0, 1.0, 1.0).unwrap();
    let d = spectral::diagonalize_model(&p).unwrap();
    let s = otoc::eigenstate_series(&d, OperatorTag::SigmaZ, 0, &grid(5, 1.0)).unwrap();
    let csv = s.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# params={"));
    assert!(lines[0].contains("operator=sigma_z") && lines[0].contains("state=ground"));
    assert_eq!(lines[1], "t,re_F,im_F");
    assert_eq!(lines.len(), 7);
    let first: Vec<f64> = lines[2].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 1.0).abs() < 1e-12 && first[2].abs() < 1e-12);
}

#[test]
fn non_commuting_pair_is_rejected() {
    let p = ModelParams::new(3, 0.0, 1.0, 1.0).unwrap();
    let d = spectral::diagonalize_model(&p).unwrap();
    let sx = model::embed_qubit(&model::sigma_x(), 3);
    let sy = model::embed_qubit(&model::sigma_y(), 3);
    assert!(otoc::otoc_series(&d, &sx, &sy, &d.ground_state(), &[0.0]).is_err());
}
