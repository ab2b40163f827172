use ndarray::Array2;
use num_complex::Complex64 as C64;
use otoc_lab::model::{self, ModelParams, Qubit, SpinBasis};
use otoc_lab::{Error, OperatorMatrix};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (1usize..40, -3.0f64..3.0, 0.0f64..3.0, -4.0f64..4.0)
        .prop_map(|(n, u, j_a, w)| ModelParams::new(n, u, j_a, w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hamiltonian_is_real_symmetric(p in params()) {
        let h = model::build_hamiltonian(&p).unwrap();
        prop_assert!(h.is_real());
        prop_assert!(h.hermiticity_defect() <= 1e-12 * h.max_abs().max(1.0));
        prop_assert!(h.is_hermitian());
    }

    #[test]
    fn parity_commutes_with_hamiltonian(p in params()) {
        let h = model::build_hamiltonian(&p).unwrap();
        let pi = model::build_parity(p.n_bosons).unwrap();
        let c = pi.commutator(&h).unwrap().norm();
        prop_assert!(c <= 1e-10 * h.norm(), "‖[Π,H]‖ = {c}");
    }

    #[test]
    fn plus_minus_differ_by_twice_interaction(p in params()) {
        let plus = model::build_hamiltonian_pm(&p, 1).unwrap();
        let minus = model::build_hamiltonian_pm(&p, -1).unwrap();
        let full = model::build_hamiltonian(&p).unwrap();
        prop_assert_eq!(plus.sub(&full).unwrap().max_abs(), 0.0);
        let sz = model::build_spin_operators(p.n_bosons).unwrap().sz;
        let interaction = sz.kron(&model::sigma_z()).scale(2.0 * p.w);
        prop_assert!(plus.sub(&minus).unwrap().sub(&interaction).unwrap().max_abs() < 1e-12);
    }
}

/// Largest `[S_a,S_b] − iS_c` entry (absolute), the largest entry of the
/// products `S_a S_b`, and the Casimir defect relative to `S(S+1)`.
fn algebra_defects(n: usize) -> (f64, f64, f64) {
    let s = model::build_spin_operators(n).unwrap();
    let cyclic = [(&s.sx, &s.sy, &s.sz), (&s.sy, &s.sz, &s.sx), (&s.sz, &s.sx, &s.sy)];
    let algebra = cyclic
        .iter()
        .map(|(a, b, c)| a.commutator(b).unwrap().sub(&c.times_i()).unwrap().max_abs())
        .fold(0.0, f64::max);
    let scale = cyclic.iter().map(|(a, b, _)| a.matmul(b).unwrap().max_abs()).fold(0.0, f64::max);
    let casimir = s.sx.matmul(&s.sx).unwrap().add(&s.sy.matmul(&s.sy).unwrap()).unwrap().add(&s.sz.matmul(&s.sz).unwrap()).unwrap();
    let spin = n as f64 / 2.0;
    let target = OperatorMatrix::identity(n + 1).scale(spin * (spin + 1.0));
    let casimir_rel = casimir.sub(&target).unwrap().max_abs() / (spin * (spin + 1.0));
    (algebra, scale, casimir_rel)
}

#[test]
fn su2_algebra_and_casimir_up_to_1500() {
    for n in [1, 2, 7, 100, 1000, 1500] {
        let (alg, scale, cas) = algebra_defects(n);
        // Beyond N ≈ 1000 one ulp of the O(N²) product entries exceeds 1e-10,
        // so the bound is scaled by the largest entry there.
        let tol = if n <= 1000 { 1e-10 } else { 1e-10 * scale.max(1.0) };
        assert!(alg <= tol, "N={n}: [S_a,S_b] − iS_c defect {alg}, product scale {scale}");
        assert!(cas <= 1e-10, "N={n}: Casimir relative defect {cas}");
    }
}

#[test]
fn spin_operators_are_hermitian() {
    for n in [1, 5, 64] {
        let s = model::build_spin_operators(n).unwrap();
        for op in [&s.sx, &s.sy, &s.sz] {
            assert!(op.is_hermitian());
        }
        assert!(!s.sy.is_real());
    }
    for op in [model::sigma_x(), model::sigma_y(), model::sigma_z()] {
        assert!(op.is_hermitian());
    }
}

#[test]
fn ladder_element_spin_one() {
    let s = model::build_spin_operators(2).unwrap();
    // index 1 is m = 0, indices 0 and 2 are m = ∓1
    assert!((s.sx.get(1, 0).re - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((s.sx.get(2, 1).re - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn basis_round_trip_is_exact() {
    for n in [1, 2, 9, 150] {
        let b = SpinBasis::new(n);
        assert_eq!(b.dimension_composite(), 2 * (n + 1));
        for i in 0..b.dimension_composite() {
            let (twice_m, q) = b.decompose(i).unwrap();
            assert_eq!(b.composite_index(twice_m, q), Some(i));
        }
        assert!(b.decompose(b.dimension_composite()).is_none());
        assert_eq!(b.composite_index(n as i64, Qubit::Down), Some(b.dimension_composite() - 1));
    }
}

#[test]
fn parity_is_a_real_involution() {
    for n in [1, 4, 11, 60] {
        let pi = model::build_parity(n).unwrap();
        assert!(pi.is_real());
        let sq = pi.matmul(&pi).unwrap();
        assert_eq!(sq.sub(&OperatorMatrix::identity(2 * (n + 1))).unwrap().max_abs(), 0.0);
    }
}

#[test]
fn parity_for_one_boson_is_sigma_x_twice() {
    let pi = model::build_parity(1).unwrap();
    let xx = model::sigma_x().kron(&model::sigma_x());
    let same = pi.sub(&xx).unwrap().max_abs();
    let flipped = pi.add(&xx).unwrap().max_abs();
    assert!(same == 0.0 || flipped == 0.0);
}

#[test]
fn parity_flips_sz_and_keeps_interaction() {
    let n = 6;
    let pi = model::build_parity(n).unwrap();
    let sz = model::build_spin_operators(n).unwrap().sz;
    let szsz = sz.kron(&model::sigma_z());
    let sz1 = model::embed_boson(&sz);
    let conj = |op: &OperatorMatrix| pi.matmul(op).unwrap().matmul(&pi).unwrap();
    assert!(conj(&szsz).sub(&szsz).unwrap().max_abs() < 1e-14);
    assert!(conj(&sz1).add(&sz1).unwrap().max_abs() < 1e-14);
}

#[test]
fn hamiltonian_examples() {
    let p = ModelParams::new(1, 0.0, 1.0, 0.0).unwrap();
    let h = model::build_hamiltonian(&p).unwrap();
    let expected = model::sigma_x().kron(&OperatorMatrix::identity(2)).add(&OperatorMatrix::identity(2).kron(&model::sigma_x())).unwrap().scale(-1.0);
    assert!(h.sub(&expected).unwrap().max_abs() < 1e-15);

    let p = ModelParams::new(9, 0.4, 1.3, 0.0).unwrap();
    let h = model::build_hamiltonian(&p).unwrap();
    let sx = model::embed_qubit(&model::sigma_x(), 9);
    assert_eq!(h.commutator(&sx).unwrap().max_abs(), 0.0);

    let h_plus = model::build_hamiltonian_pm(&p, 1).unwrap();
    let h_minus = model::build_hamiltonian_pm(&p, -1).unwrap();
    assert_eq!(h_plus.sub(&h_minus).unwrap().max_abs(), 0.0);
}

#[test]
fn kac_factor_multiplies_qubit_term() {
    let p = ModelParams::new(12, 0.0, 0.7, 0.0).unwrap().with_tunneling(0.0).unwrap();
    let h = model::build_hamiltonian(&p).unwrap();
    let expected = model::embed_qubit(&model::sigma_x(), 12).scale(-12.0 * 0.7);
    assert!(h.sub(&expected).unwrap().max_abs() < 1e-14);
}

#[test]
fn coupling_algebra() {
    assert_eq!(model::lambda_c(1.0, 1.0).unwrap(), -0.75);
    assert!((model::lambda_c(2.0 * 2f64.sqrt(), 1.0).unwrap() - 1.0).abs() < 1e-15);
    let p = ModelParams::new(40, 0.0, 1.0, 1.0).unwrap();
    assert!((p.u_for_lambda(0.0).unwrap() - 2.0 * -0.75 / 40.0).abs() < 1e-16);
    let q = p.at_lambda(-2.5).unwrap();
    assert!((q.reduced_lambda().unwrap() + 2.5).abs() < 1e-14);
    assert!((q.big_lambda().unwrap() - q.u * 40.0 / 2.0).abs() < 1e-14);
    let at_zero = ModelParams::new(10, 0.1, 1.0, 2.0).unwrap();
    assert!(matches!(at_zero.reduced_lambda(), Err(Error::CriticalPointZero)));
    assert!(matches!(at_zero.u_for_lambda(1.0), Err(Error::CriticalPointZero)));
    assert_eq!(at_zero.at_critical().unwrap().u, 0.0);
}

#[test]
fn rejects_invalid_parameters() {
    assert!(ModelParams::new(0, 0.0, 1.0, 1.0).is_err());
    assert!(ModelParams::new(3, f64::NAN, 1.0, 1.0).is_err());
    assert!(model::build_spin_operators(0).is_err());
    assert!(model::build_parity(0).is_err());
}

#[test]
fn sz_spectrum_is_integer_ladder() {
    let n = 13;
    let sz = model::build_spin_operators(n).unwrap().sz;
    let diag: Vec<f64> = sz.diagonal().to_vec();
    let expected: Vec<f64> = (0..=n).map(|k| k as f64 - n as f64 / 2.0).collect();
    assert_eq!(diag, expected);
    let off: f64 = (sz.re().to_owned() - Array2::from_diag(&sz.diagonal())).iter().map(|x| x.abs()).sum();
    assert_eq!(off, 0.0);
    assert_eq!(sz.get(0, 0), C64::new(-6.5, 0.0));
}
