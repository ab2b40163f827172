//! Diagonalization, parity labels, and eigenbasis time evolution.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, ModelParams};
use crate::operator::OperatorMatrix;

/// Relative scale of the quasi-degeneracy window: `ε_deg = DEGENERACY_REL · max(1, max|E|)`.
pub const DEGENERACY_REL: f64 = 1e-8;
/// Minimum |⟨Π⟩| for a level to get a parity label.
pub const PARITY_CONFIDENCE: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
    Unclassified,
}

impl Parity {
    pub fn from_sign(x: f64) -> Parity {
        if x >= PARITY_CONFIDENCE {
            Parity::Even
        } else if x <= -PARITY_CONFIDENCE {
            Parity::Odd
        } else {
            Parity::Unclassified
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
            Parity::Unclassified => 0.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Unclassified => "unclassified",
        }
    }
}

/// Which Hilbert space a state or decomposition lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisTag {
    Composite,
    BosonOnly,
}

/// Ascending eigenvalues with real orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    energies: Array1<f64>,
    states: Array2<f64>,
    parities: Vec<Parity>,
    source_params: Option<ModelParams>,
    basis: BasisTag,
}

impl EigenDecomposition {
    /// Assemble from raw parts; energies must be non-decreasing and match the state count.
    pub fn from_parts(
        energies: Array1<f64>,
        states: Array2<f64>,
        parities: Vec<Parity>,
        source_params: Option<ModelParams>,
        basis: BasisTag,
    ) -> Result<Self> {
        let d = energies.len();
        if states.dim() != (d, d) {
            return Err(Error::Dimension { expected: d, found: states.ncols() });
        }
        if parities.len() != d {
            return Err(Error::Dimension { expected: d, found: parities.len() });
        }
        if energies.windows(2).into_iter().any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("energies must be non-decreasing".into()));
        }
        Ok(EigenDecomposition { energies, states, parities, source_params, basis })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Retag the space (e.g. a boson-only Hamiltonian passed through [`diagonalize`]).
    pub fn with_basis(mut self, basis: BasisTag) -> Self {
        self.basis = basis;
        self
    }

    pub fn with_source_params(mut self, p: ModelParams) -> Self {
        self.source_params = Some(p);
        self
    }

    pub fn energies(&self) -> ArrayView1<'_, f64> {
        self.energies.view()
    }

    pub fn states(&self) -> ArrayView2<'_, f64> {
        self.states.view()
    }

    pub fn state(&self, n: usize) -> ArrayView1<'_, f64> {
        self.states.column(n)
    }

    pub fn parities(&self) -> &[Parity] {
        &self.parities
    }

    pub fn source_params(&self) -> Option<&ModelParams> {
        self.source_params.as_ref()
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn ground_state(&self) -> QuantumState {
        self.eigenstate(0).expect("non-empty decomposition")
    }

    pub fn eigenstate(&self, n: usize) -> Result<QuantumState> {
        if n >= self.dim() {
            return Err(Error::IndexOutOfRange { index: n, dim: self.dim() });
        }
        Ok(QuantumState {
            amplitudes: self.states.column(n).mapv(|x| C64::new(x, 0.0)),
            basis: self.basis,
        })
    }

    /// `max_n ‖H v_n − E_n v_n‖ / max(1, |E_n|)`.
    pub fn max_residual(&self, h: &OperatorMatrix) -> Result<f64> {
        if h.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: h.dim() });
        }
        let hv = h.re().dot(&self.states);
        let mut worst = 0.0f64;
        for (n, &e) in self.energies.iter().enumerate() {
            let r = (&hv.column(n) - &(&self.states.column(n) * e)).mapv(|x| x * x).sum().sqrt();
            worst = worst.max(r / e.abs().max(1.0));
        }
        Ok(worst)
    }

    /// `max |VᵀV − 1|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.states.t().dot(&self.states);
        let mut worst = 0.0f64;
        for ((i, j), &x) in g.indexed_iter() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((x - target).abs());
        }
        worst
    }

    /// Amplitudes `⟨ψ_n|state⟩`.
    pub fn coefficients(&self, state: &QuantumState) -> Result<Array1<C64>> {
        self.check_state(state)?;
        let re = self.states.t().dot(&state.amplitudes.mapv(|z| z.re));
        let im = self.states.t().dot(&state.amplitudes.mapv(|z| z.im));
        Ok(re.iter().zip(im.iter()).map(|(&r, &i)| C64::new(r, i)).collect())
    }

    /// Inverse of [`coefficients`](Self::coefficients).
    pub fn synthesize(&self, coeffs: &Array1<C64>) -> QuantumState {
        let re = self.states.dot(&coeffs.mapv(|z| z.re));
        let im = self.states.dot(&coeffs.mapv(|z| z.im));
        QuantumState {
            amplitudes: re.iter().zip(im.iter()).map(|(&r, &i)| C64::new(r, i)).collect(),
            basis: self.basis,
        }
    }

    fn check_state(&self, state: &QuantumState) -> Result<()> {
        if state.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: state.dim() });
        }
        Ok(())
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: Array1<C64>,
    basis: BasisTag,
}

impl QuantumState {
    pub const NORM_TOL: f64 = 1e-12;

    /// Wraps amplitudes that must already be normalized.
    pub fn new(amplitudes: Array1<C64>, basis: BasisTag) -> Result<Self> {
        let norm = l2(&amplitudes);
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(QuantumState { amplitudes, basis })
    }

    /// Normalizes `amplitudes`; rejects the zero vector.
    pub fn normalized(amplitudes: Array1<C64>, basis: BasisTag) -> Result<Self> {
        let norm = l2(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Ok(QuantumState { amplitudes: amplitudes / C64::new(norm, 0.0), basis })
    }

    pub fn from_real(amplitudes: ArrayView1<'_, f64>, basis: BasisTag) -> Result<Self> {
        Self::normalized(amplitudes.mapv(|x| C64::new(x, 0.0)), basis)
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        l2(&self.amplitudes)
    }

    pub fn inner(&self, other: &QuantumState) -> C64 {
        self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|boson⟩ ⊗ |qubit⟩` with the qubit given in the `σ̂_z` basis.
    pub fn product(boson: &QuantumState, qubit: [C64; 2]) -> Result<Self> {
        if boson.basis != BasisTag::BosonOnly {
            return Err(Error::InvalidInput("product state needs a boson-only factor".into()));
        }
        let mut amps = Array1::zeros(2 * boson.dim());
        for (k, a) in boson.amplitudes.iter().enumerate() {
            amps[2 * k] = a * qubit[0];
            amps[2 * k + 1] = a * qubit[1];
        }
        Self::normalized(amps, BasisTag::Composite)
    }
}

pub(crate) fn l2(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Flip each column so its largest-magnitude entry is positive.
fn fix_phases(states: &mut Array2<f64>) {
    for mut col in states.axis_iter_mut(Axis(1)) {
        let pivot = col
            .iter()
            .fold((0.0f64, 0.0f64), |(best, val), &x| if x.abs() > best { (x.abs(), x) } else { (best, val) })
            .1;
        if pivot < 0.0 {
            col.mapv_inplace(|x| -x);
        }
    }
}

fn eigh_real(m: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    m.eigh(UPLO::Lower).map_err(|e| Error::Eigensolver(e.to_string()))
}

/// Dense diagonalization of a real-symmetric operator. Levels are left unlabeled.
pub fn diagonalize(h: &OperatorMatrix) -> Result<EigenDecomposition> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(h.hermiticity_defect()));
    }
    if !h.is_real() {
        return Err(Error::Unsupported(
            "complex Hamiltonians; every model Hamiltonian is real in the m ⊗ σ_z basis".into(),
        ));
    }
    let (energies, mut states) = eigh_real(&h.re().to_owned())?;
    fix_phases(&mut states);
    let d = energies.len();
    EigenDecomposition::from_parts(energies, states, vec![Parity::Unclassified; d], None, BasisTag::Composite)
}

/// Diagonalize and label every level with the given symmetry operator.
pub fn diagonalize_with_parity(h: &OperatorMatrix, parity: &OperatorMatrix) -> Result<EigenDecomposition> {
    let mut d = diagonalize(h)?;
    parity_classify(&mut d, parity)?;
    Ok(d)
}

/// Diagonalize the model Hamiltonian block by block in the two Π sectors.
///
/// Each sector is an `(N+1)`-dimensional real-symmetric matrix, so labels are
/// exact and quasi-degenerate doublets never mix.
pub fn diagonalize_model(p: &ModelParams) -> Result<EigenDecomposition> {
    diagonalize_model_pm(p, 1)
}

/// Sector diagonalization of `Ĥ_±`.
pub fn diagonalize_model_pm(p: &ModelParams, sign: i8) -> Result<EigenDecomposition> {
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidInput(format!("sign must be ±1, got {sign}")));
    }
    let mut q = *p;
    q.w *= sign as f64;
    let n = p.n_bosons;
    let nb = n + 1;
    let d = 2 * nb;
    let h = 1.0 / 2f64.sqrt();
    let mut levels: Vec<(f64, Parity, Array1<f64>)> = Vec::with_capacity(d);
    for (sector, parity) in [(1.0, Parity::Even), (-1.0, Parity::Odd)] {
        let (vals, vecs) = eigh_real(&model::sector_hamiltonian(&q, sector)?)?;
        for (i, &e) in vals.iter().enumerate() {
            let c = vecs.column(i);
            let mut v = Array1::zeros(d);
            for k in 0..nb {
                v[2 * k] += c[k] * h;
                v[2 * (n - k) + 1] += sector * c[k] * h;
            }
            levels.push((e, parity, v));
        }
    }
    // Stable sort keeps the even member first inside an exactly degenerate pair.
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let energies = Array1::from_iter(levels.iter().map(|l| l.0));
    let parities = levels.iter().map(|l| l.1).collect();
    let mut states = Array2::zeros((d, d));
    for (j, l) in levels.iter().enumerate() {
        states.column_mut(j).assign(&l.2);
    }
    fix_phases(&mut states);
    EigenDecomposition::from_parts(energies, states, parities, Some(q), BasisTag::Composite)
}

/// Diagonalize `Ĥ_B` alone on the `(N+1)`-dimensional boson space, labeled by the reflection `R`.
pub fn diagonalize_boson(p: &ModelParams) -> Result<EigenDecomposition> {
    let h = model::build_boson_hamiltonian(p)?;
    let r = model::boson_reflection(p.n_bosons)?;
    let mut d = diagonalize(&h)?;
    d.basis = BasisTag::BosonOnly;
    d.source_params = Some(*p);
    parity_classify(&mut d, &r)?;
    Ok(d)
}

/// Label levels by `sign⟨ψ_n|Π|ψ_n⟩`.
///
/// Clusters with `|E_i − E_j| < ε_deg` are first rotated to exact Π eigenvectors
/// (the states in `decomp` are replaced). Levels that still have `|⟨Π⟩| < 0.99`
/// are marked [`Parity::Unclassified`].
pub fn parity_classify(decomp: &mut EigenDecomposition, parity: &OperatorMatrix) -> Result<Vec<Parity>> {
    let d = decomp.dim();
    if parity.dim() != d {
        return Err(Error::Dimension { expected: d, found: parity.dim() });
    }
    if !parity.is_real() {
        return Err(Error::Unsupported("complex parity operators".into()));
    }
    let scale = decomp.energies.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    let eps = DEGENERACY_REL * scale;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && decomp.energies[end] - decomp.energies[end - 1] < eps {
            end += 1;
        }
        if end - start > 1 {
            let block = decomp.states.slice(s![.., start..end]).to_owned();
            let pi_block = block.t().dot(&parity.re().dot(&block));
            let sym = (&pi_block + &pi_block.t()) * 0.5;
            let (_, rot) = eigh_real(&sym)?;
            let rotated = block.dot(&rot);
            decomp.states.slice_mut(s![.., start..end]).assign(&rotated);
        }
        start = end;
    }
    fix_phases(&mut decomp.states);
    let pv = parity.re().dot(&decomp.states);
    let labels: Vec<Parity> = (0..d)
        .map(|n| Parity::from_sign(decomp.states.column(n).dot(&pv.column(n))))
        .collect();
    let unclassified = labels.iter().filter(|p| **p == Parity::Unclassified).count();
    if unclassified > 0 {
        log::warn!("{unclassified} of {d} levels have no definite parity");
    }
    decomp.parities = labels.clone();
    Ok(labels)
}

fn phases(energies: ArrayView1<'_, f64>, t: f64, sign: f64) -> Array1<C64> {
    let e0 = energies[0];
    energies.mapv(|e| C64::from_polar(1.0, sign * (e - e0) * t))
}

/// `e^{−iĤt}|ψ⟩`, applied in the eigenbasis.
pub fn evolve(state: &QuantumState, decomp: &EigenDecomposition, t: f64) -> Result<QuantumState> {
    let c = decomp.coefficients(state)?;
    let c = &c * &decomp.energies().mapv(|e| C64::from_polar(1.0, -e * t));
    Ok(decomp.synthesize(&c))
}

/// Matrix elements `O_{αγ} = ⟨ψ_α|Ô|ψ_γ⟩`.
pub fn heisenberg_elements(op: &OperatorMatrix, decomp: &EigenDecomposition) -> Result<OperatorMatrix> {
    op.conjugate_by(decomp.states())
}

/// `O_{αγ} e^{i(E_α − E_γ)t}`, the Heisenberg-picture operator in the eigenbasis.
pub fn phase_apply(elements: &OperatorMatrix, decomp: &EigenDecomposition, t: f64) -> Result<Array2<C64>> {
    if elements.dim() != decomp.dim() {
        return Err(Error::Dimension { expected: decomp.dim(), found: elements.dim() });
    }
    let p = phases(decomp.energies(), t, 1.0);
    let mut m = elements.to_complex();
    for ((a, g), z) in m.indexed_iter_mut() {
        *z *= p[a] * p[g].conj();
    }
    Ok(m)
}
