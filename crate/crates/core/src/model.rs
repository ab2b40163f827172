//! Collective-spin model of N two-mode bosons coupled to one impurity qubit.
//!
//! ```text
//! Ĥ   = Ĥ_B + Ĥ_Q + Ĥ_I
//! Ĥ_B = U Ŝ_z² − 2J Ŝ_x
//! Ĥ_Q = −N Jᵃ σ̂_x          (Kac factor N kept explicit)
//! Ĥ_I = W Ŝ_z σ̂_z
//! ```
//!
//! The composite basis is `|m⟩ ⊗ |q⟩_z` with `m` ascending from `−S` to `S`
//! (`S = N/2`) as the slow index and the qubit `σ̂_z` basis `{|+⟩, |−⟩}` as the
//! fast index, so composite index `2k + q` with `k = m + S`. Every term of Ĥ
//! is real in this basis.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;

/// Physical couplings in units of the boson tunneling energy `J`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_bosons: usize,
    /// Boson-boson interaction `U`.
    pub u: f64,
    /// Boson tunneling `J`; the energy unit, so 1 unless a limit is being probed.
    #[serde(default = "unit")]
    pub j: f64,
    /// Qubit transition energy `Jᵃ`.
    pub j_a: f64,
    /// Boson-qubit coupling `W`.
    pub w: f64,
}

fn unit() -> f64 {
    1.0
}

impl ModelParams {
    pub fn new(n_bosons: usize, u: f64, j_a: f64, w: f64) -> Result<Self> {
        let p = ModelParams { n_bosons, u, j: 1.0, j_a, w };
        p.validate()?;
        Ok(p)
    }

    /// Parameters placed at a given `Λ = UN/2J`.
    pub fn at_big_lambda(n_bosons: usize, big_lambda: f64, j_a: f64, w: f64) -> Result<Self> {
        let n = n_bosons as f64;
        Self::new(n_bosons, 2.0 * big_lambda / n.max(1.0), j_a, w)
    }

    /// Parameters placed at a given reduced coupling `λ = (Λ − Λ_c)/|Λ_c|`.
    pub fn at_reduced_lambda(n_bosons: usize, lambda: f64, j_a: f64, w: f64) -> Result<Self> {
        let mut p = Self::new(n_bosons, 0.0, j_a, w)?;
        p.u = p.u_for_lambda(lambda)?;
        Ok(p)
    }

    /// Override the tunneling energy. Only limit checks (e.g. `J = 0`) use this.
    pub fn with_tunneling(mut self, j: f64) -> Result<Self> {
        self.j = j;
        self.validate()?;
        Ok(self)
    }

    pub fn with_n(mut self, n_bosons: usize) -> Result<Self> {
        self.n_bosons = n_bosons;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bosons < 1 {
            return Err(Error::InvalidParams("n_bosons must be ≥ 1".into()));
        }
        for (name, v) in [("u", self.u), ("j", self.j), ("j_a", self.j_a), ("w", self.w)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        if self.j < 0.0 {
            return Err(Error::InvalidParams(format!("j must be ≥ 0, got {}", self.j)));
        }
        Ok(())
    }

    pub fn basis(&self) -> SpinBasis {
        SpinBasis::new(self.n_bosons)
    }

    /// `Λ = UN/2J`.
    pub fn big_lambda(&self) -> Result<f64> {
        if self.j == 0.0 {
            return Err(Error::InvalidParams("Λ is undefined for J = 0".into()));
        }
        Ok(self.u * self.n_bosons as f64 / (2.0 * self.j))
    }

    /// `Λ_c = W²/(4Jᵃ) − 1`.
    pub fn lambda_c(&self) -> Result<f64> {
        lambda_c(self.w, self.j_a)
    }

    /// `λ = (Λ − Λ_c)/|Λ_c|`.
    pub fn reduced_lambda(&self) -> Result<f64> {
        let lc = self.lambda_c()?;
        if lc == 0.0 {
            return Err(Error::CriticalPointZero);
        }
        Ok((self.big_lambda()? - lc) / lc.abs())
    }

    /// The `U` that places these couplings at reduced coupling `lambda`.
    pub fn u_for_lambda(&self, lambda: f64) -> Result<f64> {
        let lc = self.lambda_c()?;
        if lc == 0.0 {
            return Err(Error::CriticalPointZero);
        }
        let big = lc + lambda * lc.abs();
        Ok(self.u_for_big_lambda(big))
    }

    /// Copy with `U` set for reduced coupling `lambda`.
    pub fn at_lambda(mut self, lambda: f64) -> Result<Self> {
        self.u = self.u_for_lambda(lambda)?;
        Ok(self)
    }

    /// Copy with `U` set for `Λ = Λ_c`; defined even where `λ` is not (`Λ_c = 0`).
    pub fn at_critical(mut self) -> Result<Self> {
        self.u = self.u_for_big_lambda(self.lambda_c()?);
        Ok(self)
    }

    pub fn lambda_c_nonzero(&self) -> Result<f64> {
        let lc = self.lambda_c()?;
        if lc == 0.0 {
            return Err(Error::CriticalPointZero);
        }
        Ok(lc)
    }

    pub fn u_for_big_lambda(&self, big_lambda: f64) -> f64 {
        2.0 * self.j * big_lambda / self.n_bosons as f64
    }
}

/// `Λ_c = W²/(4Jᵃ) − 1`; needs `Jᵃ ≠ 0`.
pub fn lambda_c(w: f64, j_a: f64) -> Result<f64> {
    if j_a == 0.0 {
        return Err(Error::InvalidParams("Λ_c requires j_a ≠ 0".into()));
    }
    Ok(w * w / (4.0 * j_a) - 1.0)
}

/// Qubit `σ̂_z` eigenstates, `Up = |+⟩_z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Qubit {
    Up,
    Down,
}

impl Qubit {
    pub fn index(self) -> usize {
        match self {
            Qubit::Up => 0,
            Qubit::Down => 1,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Qubit::Up => 1.0,
            Qubit::Down => -1.0,
        }
    }

    pub fn flip(self) -> Qubit {
        match self {
            Qubit::Up => Qubit::Down,
            Qubit::Down => Qubit::Up,
        }
    }
}

/// Index bookkeeping for `|S, m⟩ ⊗ |q⟩_z`. `m` is carried as `2m` so it stays integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpinBasis {
    n_bosons: usize,
}

impl SpinBasis {
    pub fn new(n_bosons: usize) -> Self {
        SpinBasis { n_bosons }
    }

    pub fn total_spin(&self) -> f64 {
        self.n_bosons as f64 / 2.0
    }

    pub fn dimension_boson(&self) -> usize {
        self.n_bosons + 1
    }

    pub fn dimension_composite(&self) -> usize {
        2 * (self.n_bosons + 1)
    }

    /// `m` value of boson index `k`.
    pub fn m_of(&self, k: usize) -> f64 {
        k as f64 - self.total_spin()
    }

    /// Boson index of `2m`; `None` outside `[−N, N]` or with wrong parity.
    pub fn boson_index(&self, twice_m: i64) -> Option<usize> {
        let n = self.n_bosons as i64;
        if twice_m.abs() > n || (twice_m + n) % 2 != 0 {
            return None;
        }
        Some(((twice_m + n) / 2) as usize)
    }

    pub fn composite_index(&self, twice_m: i64, q: Qubit) -> Option<usize> {
        self.boson_index(twice_m).map(|k| 2 * k + q.index())
    }

    /// Inverse of [`composite_index`](Self::composite_index): `(2m, q)`.
    pub fn decompose(&self, index: usize) -> Option<(i64, Qubit)> {
        if index >= self.dimension_composite() {
            return None;
        }
        let k = (index / 2) as i64;
        let q = if index % 2 == 0 { Qubit::Up } else { Qubit::Down };
        Some((2 * k - self.n_bosons as i64, q))
    }
}

/// Collective spin operators on the `(N+1)`-dimensional boson space.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub sx: OperatorMatrix,
    pub sy: OperatorMatrix,
    pub sz: OperatorMatrix,
}

/// `½√(S(S+1) − m(m+1))`, the `⟨m+1|Ŝ_x|m⟩` element.
fn ladder_half(s: f64, m: f64) -> f64 {
    0.5 * (s * (s + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

fn sz_diag(n_bosons: usize) -> Array1<f64> {
    let basis = SpinBasis::new(n_bosons);
    Array1::from_iter((0..=n_bosons).map(|k| basis.m_of(k)))
}

fn sx_real(n_bosons: usize) -> Array2<f64> {
    let s = n_bosons as f64 / 2.0;
    let dim = n_bosons + 1;
    let mut sx = Array2::zeros((dim, dim));
    for k in 0..n_bosons {
        let m = k as f64 - s;
        let e = ladder_half(s, m);
        sx[(k + 1, k)] = e;
        sx[(k, k + 1)] = e;
    }
    sx
}

pub fn build_spin_operators(n_bosons: usize) -> Result<SpinOperators> {
    if n_bosons < 1 {
        return Err(Error::InvalidParams("n_bosons must be ≥ 1".into()));
    }
    let s = n_bosons as f64 / 2.0;
    let dim = n_bosons + 1;
    let sx = sx_real(n_bosons);
    // Ŝ_y = (Ŝ₊ − Ŝ₋)/(2i): ⟨m+1|Ŝ_y|m⟩ = −i·½√(…), ⟨m|Ŝ_y|m+1⟩ = +i·½√(…)
    let mut sy_im = Array2::zeros((dim, dim));
    for k in 0..n_bosons {
        let e = ladder_half(s, k as f64 - s);
        sy_im[(k + 1, k)] = -e;
        sy_im[(k, k + 1)] = e;
    }
    Ok(SpinOperators {
        sx: OperatorMatrix::from_real(sx)?,
        sy: OperatorMatrix::from_parts(Array2::zeros((dim, dim)), sy_im)?,
        sz: OperatorMatrix::from_real(Array2::from_diag(&sz_diag(n_bosons)))?,
    })
}

/// Pauli matrices in the `{|+⟩_z, |−⟩_z}` basis.
pub fn sigma_x() -> OperatorMatrix {
    OperatorMatrix::from_real(ndarray::array![[0.0, 1.0], [1.0, 0.0]]).expect("2×2")
}

pub fn sigma_y() -> OperatorMatrix {
    OperatorMatrix::from_parts(Array2::zeros((2, 2)), ndarray::array![[0.0, -1.0], [1.0, 0.0]]).expect("2×2")
}

pub fn sigma_z() -> OperatorMatrix {
    OperatorMatrix::from_real(ndarray::array![[1.0, 0.0], [0.0, -1.0]]).expect("2×2")
}

/// `O_B ⊗ 1_Q`
pub fn embed_boson(op: &OperatorMatrix) -> OperatorMatrix {
    op.kron(&OperatorMatrix::identity(2))
}

/// `1_B ⊗ O_Q`
pub fn embed_qubit(op: &OperatorMatrix, n_bosons: usize) -> OperatorMatrix {
    OperatorMatrix::identity(n_bosons + 1).kron(op)
}

/// Observables used as OTOC operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorTag {
    SigmaX,
    SigmaZ,
    /// `Ŝ_z / N`, on whichever space the Hamiltonian lives in.
    SzOverN,
}

impl OperatorTag {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorTag::SigmaX => "sigma_x",
            OperatorTag::SigmaZ => "sigma_z",
            OperatorTag::SzOverN => "Sz_over_N",
        }
    }

    /// Operator on the composite space (`with_qubit`) or the boson space.
    pub fn build(self, n_bosons: usize, with_qubit: bool) -> Result<OperatorMatrix> {
        let n = n_bosons as f64;
        match (self, with_qubit) {
            (OperatorTag::SigmaX, true) => Ok(embed_qubit(&sigma_x(), n_bosons)),
            (OperatorTag::SigmaZ, true) => Ok(embed_qubit(&sigma_z(), n_bosons)),
            (OperatorTag::SzOverN, true) => {
                Ok(embed_boson(&build_spin_operators(n_bosons)?.sz.scale(1.0 / n)))
            }
            (OperatorTag::SzOverN, false) => Ok(build_spin_operators(n_bosons)?.sz.scale(1.0 / n)),
            (tag, false) => Err(Error::InvalidInput(format!(
                "{} needs the qubit; the boson-only space has none",
                tag.as_str()
            ))),
        }
    }
}

impl std::str::FromStr for OperatorTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma_x" | "sx" | "x" => Ok(OperatorTag::SigmaX),
            "sigma_z" | "sz" | "z" => Ok(OperatorTag::SigmaZ),
            "Sz_over_N" | "sz_over_n" | "Sz" => Ok(OperatorTag::SzOverN),
            other => Err(Error::InvalidInput(format!("unknown operator tag '{other}'"))),
        }
    }
}

/// The three pieces of Ĥ on the composite space.
#[derive(Clone, Debug)]
pub struct HamiltonianTerms {
    pub boson: OperatorMatrix,
    pub qubit: OperatorMatrix,
    pub interaction: OperatorMatrix,
}

pub fn hamiltonian_terms(p: &ModelParams) -> Result<HamiltonianTerms> {
    p.validate()?;
    let n = p.n_bosons;
    Ok(HamiltonianTerms {
        boson: embed_boson(&build_boson_hamiltonian(p)?),
        qubit: embed_qubit(&sigma_x(), n).scale(-(n as f64) * p.j_a),
        interaction: build_spin_operators(n)?.sz.kron(&sigma_z()).scale(p.w),
    })
}

/// `Ĥ_B = U Ŝ_z² − 2J Ŝ_x` on the boson space.
pub fn build_boson_hamiltonian(p: &ModelParams) -> Result<OperatorMatrix> {
    p.validate()?;
    let sz = sz_diag(p.n_bosons);
    let mut h = sx_real(p.n_bosons) * (-2.0 * p.j);
    for (k, m) in sz.iter().enumerate() {
        h[(k, k)] += p.u * m * m;
    }
    OperatorMatrix::from_real(h)
}

pub fn build_hamiltonian(p: &ModelParams) -> Result<OperatorMatrix> {
    build_hamiltonian_pm(p, 1)
}

/// `Ĥ_± = Ĥ_B + Ĥ_Q ± Ĥ_I`.
pub fn build_hamiltonian_pm(p: &ModelParams, sign: i8) -> Result<OperatorMatrix> {
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidInput(format!("sign must be ±1, got {sign}")));
    }
    let t = hamiltonian_terms(p)?;
    t.boson.add(&t.qubit)?.add(&t.interaction.scale(sign as f64))
}

/// π rotation about the spin x axis, `exp(−iπŜ_x)`, phase-normalized to a real matrix.
///
/// Built by exponentiating `Ŝ_x` through its eigendecomposition. The result maps
/// `|m⟩ → |−m⟩`; its `(0, 0)` entry vanishes for every `N ≥ 1`, so the global
/// phase is referenced to the largest entry of column 0 instead.
pub fn boson_reflection(n_bosons: usize) -> Result<OperatorMatrix> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<OperatorMatrix>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().expect("parity cache poisoned").get(&n_bosons) {
        return Ok((**r).clone());
    }
    if n_bosons < 1 {
        return Err(Error::InvalidParams("n_bosons must be ≥ 1".into()));
    }
    let (vals, vecs) = sx_real(n_bosons)
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Eigensolver(e.to_string()))?;
    let angle = vals.mapv(|m| -std::f64::consts::PI * m);
    let scaled = |f: fn(f64) -> f64| {
        let d = angle.mapv(f);
        (&vecs * &d.insert_axis(ndarray::Axis(0))).dot(&vecs.t())
    };
    let (rot_re, rot_im) = (scaled(f64::cos), scaled(f64::sin));
    let rot = ndarray::Zip::from(&rot_re).and(&rot_im).map_collect(|&r, &i| C64::new(r, i));
    let (pivot, _) = rot
        .column(0)
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
    let phase = rot[(pivot, 0)] / rot[(pivot, 0)].norm();
    let normalized = rot.mapv(|z| z / phase);
    let residual_imag = normalized.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if residual_imag > 1e-8 {
        return Err(Error::Eigensolver(format!(
            "reflection is not real after phase normalization (imag {residual_imag:.3e})"
        )));
    }
    // Entries are 0 or ±1 up to rounding; snap them so Π is exactly involutive.
    let real = normalized.mapv(|z| z.re.round());
    let r = Arc::new(OperatorMatrix::from_real(real)?);
    cache.lock().expect("parity cache poisoned").insert(n_bosons, r.clone());
    Ok((*r).clone())
}

/// `Π = R ⊗ σ̂_x`, the ℤ₂ symmetry of Ĥ.
pub fn build_parity(n_bosons: usize) -> Result<OperatorMatrix> {
    Ok(boson_reflection(n_bosons)?.kron(&sigma_x()))
}

/// Ĥ restricted to one parity sector, in the basis
/// `|m⟩_s = (|m,+⟩ + s|−m,−⟩)/√2`, `m = −S..S`:
/// `U m² + W m − 2J Ŝ_x − s N Jᵃ X` with `X` the `m → −m` flip.
pub fn sector_hamiltonian(p: &ModelParams, sector: f64) -> Result<Array2<f64>> {
    p.validate()?;
    let n = p.n_bosons;
    let sz = sz_diag(n);
    let mut h = sx_real(n) * (-2.0 * p.j);
    for (k, m) in sz.iter().enumerate() {
        h[(k, k)] += p.u * m * m + p.w * m;
        h[(k, n - k)] += -sector * n as f64 * p.j_a;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn single_spin_is_half_pauli() {
        let s = build_spin_operators(1).unwrap();
        assert_eq!(s.sz.diagonal().to_vec(), vec![-0.5, 0.5]);
        assert_eq!(s.sx.get(0, 1).re, 0.5);
        assert_eq!(s.sx.get(1, 0).re, 0.5);
    }

    #[test]
    fn spin_one_ladder_element() {
        let s = build_spin_operators(2).unwrap();
        // ⟨m=0|Sx|m=−1⟩ and ⟨m=1|Sx|m=0⟩
        assert!((s.sx.get(1, 0).re - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((s.sx.get(2, 1).re - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sz_spectrum_spans_plus_minus_half_n() {
        for n in [1usize, 2, 7, 40] {
            let s = build_spin_operators(n).unwrap();
            let d = s.sz.diagonal();
            assert_eq!(d[0], -(n as f64) / 2.0);
            assert_eq!(d[n], n as f64 / 2.0);
            assert!(d.windows(2).into_iter().all(|w| w[1] - w[0] == 1.0));
        }
    }

    #[test]
    fn rejects_zero_bosons() {
        assert!(build_spin_operators(0).is_err());
        assert!(ModelParams::new(0, 0.0, 1.0, 1.0).is_err());
        assert!(build_parity(0).is_err());
    }

    #[test]
    fn two_site_free_spectrum() {
        let p = ModelParams::new(1, 0.0, 1.0, 0.0).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let (vals, _) = h.re().to_owned().eigh(UPLO::Lower).unwrap();
        let expect = [-2.0, 0.0, 0.0, 2.0];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12, "{vals:?}");
        }
    }

    #[test]
    fn hamiltonian_is_real_symmetric() {
        let p = ModelParams::new(6, -0.3, 0.7, 1.3).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        assert!(h.is_real() && h.is_hermitian());
    }

    #[test]
    fn decoupled_qubit_commutes_with_sigma_x() {
        let p = ModelParams::new(5, 0.4, 1.0, 0.0).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let sx = embed_qubit(&sigma_x(), 5);
        assert_eq!(h.commutator(&sx).unwrap().norm(), 0.0);
        assert_eq!(max_diff(&build_hamiltonian_pm(&p, 1).unwrap(), &build_hamiltonian_pm(&p, -1).unwrap()), 0.0);
    }

    #[test]
    fn plus_minus_difference_is_twice_interaction() {
        let p = ModelParams::new(2, 0.1, 1.0, 1.0).unwrap();
        let d = build_hamiltonian_pm(&p, 1).unwrap().sub(&build_hamiltonian_pm(&p, -1).unwrap()).unwrap();
        // 2W·m·(±1) for (m, q) in basis order
        let expect = [-2.0, 2.0, 0.0, 0.0, 2.0, -2.0];
        assert_eq!(d.diagonal().to_vec(), expect.to_vec());
        assert_eq!(d.sub(&OperatorMatrix::from_real(Array2::from_diag(&Array1::from(expect.to_vec()))).unwrap()).unwrap().max_abs(), 0.0);
        assert!(build_hamiltonian_pm(&p, 0).is_err());
        assert_eq!(max_diff(&build_hamiltonian_pm(&p, 1).unwrap(), &build_hamiltonian(&p).unwrap()), 0.0);
    }

    #[test]
    fn lambda_algebra() {
        let p = ModelParams::new(50, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(p.lambda_c().unwrap(), -0.75);
        let q = ModelParams::new(50, 0.0, 1.0, 2.0 * 2f64.sqrt()).unwrap();
        assert!((q.lambda_c().unwrap() - 1.0).abs() < 1e-15);
        // λ = 0 → U = 2Λ_c/N
        assert!((p.u_for_lambda(0.0).unwrap() - 2.0 * -0.75 / 50.0).abs() < 1e-15);
        let r = ModelParams::at_reduced_lambda(50, -2.0, 1.0, 1.0).unwrap();
        assert!((r.reduced_lambda().unwrap() + 2.0).abs() < 1e-12);
        let zero = ModelParams::new(10, 0.1, 1.0, 2.0).unwrap();
        assert!(matches!(zero.reduced_lambda(), Err(Error::CriticalPointZero)));
        assert!(matches!(zero.u_for_lambda(1.0), Err(Error::CriticalPointZero)));
        assert!(ModelParams::new(10, 0.1, 0.0, 2.0).unwrap().lambda_c().is_err());
    }

    #[test]
    fn basis_round_trip() {
        let b = SpinBasis::new(7);
        for idx in 0..b.dimension_composite() {
            let (m2, q) = b.decompose(idx).unwrap();
            assert_eq!(b.composite_index(m2, q), Some(idx));
        }
        assert_eq!(b.decompose(b.dimension_composite()), None);
        assert_eq!(b.boson_index(8), None);
        assert_eq!(b.boson_index(0), None);
    }

    #[test]
    fn reflection_is_the_flip() {
        for n in [1usize, 2, 5, 12] {
            let r = boson_reflection(n).unwrap();
            for i in 0..=n {
                for j in 0..=n {
                    let expect = if i + j == n { 1.0 } else { 0.0 };
                    assert_eq!(r.get(i, j).re, expect, "N={n} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn single_boson_parity_is_sigma_x_sigma_x() {
        let pi = build_parity(1).unwrap();
        let expect = sigma_x().kron(&sigma_x());
        assert_eq!(max_diff(&pi, &expect), 0.0);
    }

    #[test]
    fn parity_symmetry_action() {
        let n = 4;
        let pi = build_parity(n).unwrap();
        let id = OperatorMatrix::identity(2 * (n + 1));
        assert_eq!(max_diff(&pi.matmul(&pi).unwrap(), &id), 0.0);
        let sz = build_spin_operators(n).unwrap().sz;
        let szsz = sz.kron(&sigma_z());
        let sz1 = embed_boson(&sz);
        let conj = |o: &OperatorMatrix| pi.matmul(o).unwrap().matmul(&pi).unwrap();
        assert!(max_diff(&conj(&szsz), &szsz) < 1e-14);
        assert!(max_diff(&conj(&sz1), &sz1.scale(-1.0)) < 1e-14);
    }

    #[test]
    fn sector_blocks_reproduce_full_spectrum() {
        let p = ModelParams::new(6, -0.37, 0.8, 1.4).unwrap();
        let (full, _) = build_hamiltonian(&p).unwrap().re().to_owned().eigh(UPLO::Lower).unwrap();
        let (even, _) = sector_hamiltonian(&p, 1.0).unwrap().eigh(UPLO::Lower).unwrap();
        let (odd, _) = sector_hamiltonian(&p, -1.0).unwrap().eigh(UPLO::Lower).unwrap();
        let mut merged: Vec<f64> = even.iter().chain(odd.iter()).copied().collect();
        merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in merged.iter().zip(full.iter()) {
            assert!((a - b).abs() < 1e-11);
        }
    }
}
