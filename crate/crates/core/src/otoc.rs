//! Out-of-time-ordered correlators of the impurity qubit (and of collective
//! boson operators), their long-time averages, participation ratios, and the
//! echo form available for `σ̂_x`-eigenstate initial conditions.
//!
//! Conventions: `F(t) = ⟨B(t)† A† B(t) A⟩` with `B(t) = e^{iĤt} B e^{−iĤt}`.
//! Evaluated as the overlap `⟨v(t)|u(t)⟩` with `|u⟩ = B(t)A|ψ⟩` and
//! `|v⟩ = A B(t)|ψ⟩`, both built by matrix-vector products in the eigenbasis.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, ModelParams, OperatorTag};
use crate::operator::OperatorMatrix;
use crate::spectral::{self, BasisTag, EigenDecomposition, QuantumState};

/// Frequency-match window for long-time averages, in units of `J`.
pub const FREQUENCY_TOL: f64 = 1e-8;
/// Largest dimension accepted by the O(D³)-per-point reference sum.
pub const SPECTRAL_SUM_CAP: usize = 500;
/// Largest dimension accepted by the O(D³ log D) average for non-eigenstates.
pub const GENERAL_AVERAGE_CAP: usize = 1200;
/// Tolerance for `[A, B] = 0` at `t = 0`.
pub const COMMUTE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "level")]
pub enum StateTag {
    Ground,
    Eigen(usize),
    Product,
    Cat,
    Custom,
}

impl StateTag {
    pub fn label(&self) -> String {
        match self {
            StateTag::Ground => "ground".into(),
            StateTag::Eigen(n) => format!("eigen({n})"),
            StateTag::Product => "product".into(),
            StateTag::Cat => "cat".into(),
            StateTag::Custom => "custom".into(),
        }
    }
}

/// Sampled `F(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OTOCSeries {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
    /// `None` for operators that are not one of the named observables.
    pub operator: Option<OperatorTag>,
    pub state: StateTag,
    pub params: Option<ModelParams>,
}

impl OTOCSeries {
    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn imag(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.im).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Columns `t,re_F,im_F` after one `#` line carrying parameters and tags.
    pub fn to_csv(&self) -> String {
        let params = self.params.map(|p| serde_json::to_string(&p).unwrap_or_default()).unwrap_or_else(|| "null".into());
        let op = self.operator.map_or("custom", |o| o.as_str());
        let mut s = format!("# params={params} operator={op} state={}\nt,re_F,im_F\n", self.state.label());
        for (t, f) in self.times.iter().zip(&self.values) {
            s.push_str(&format!("{t:.17e},{:.17e},{:.17e}\n", f.re, f.im));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageMethod {
    /// Infinite-time average: only zero-frequency spectral terms survive.
    GapMatching,
    /// Trapezoidal average over a uniform grid on `[0, T]`.
    FiniteT,
    /// Average over equidistributed sample times in `[0, T]`.
    Sampled,
}

/// How the temporal variance treats the complex `F(t)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// `(F̄ − Re F(t))²`
    #[default]
    Real,
    /// `|F̄_c − F(t)|²`
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongTimeStats {
    /// Average of `Re F`.
    pub f_bar: f64,
    pub f_bar_complex: C64,
    /// Temporal variance; the gap-matching route does not produce one.
    pub variance: Option<f64>,
    pub method: AverageMethod,
    pub horizon: Option<f64>,
}

/// `F(t)` for fixed operators and state, cheap to evaluate at many times.
///
/// Holds the operators' eigenbasis elements, so construction costs two
/// `D × D` products per distinct operator and each evaluation is O(D²).
#[derive(Clone, Debug)]
pub struct OtocEvaluator {
    shifted: Array1<f64>,
    a: OperatorMatrix,
    b: Option<OperatorMatrix>,
    coeffs: Array1<C64>,
    a_coeffs: Array1<C64>,
}

impl OtocEvaluator {
    pub fn new(
        decomp: &EigenDecomposition,
        a: &OperatorMatrix,
        b: &OperatorMatrix,
        state: &QuantumState,
    ) -> Result<Self> {
        check_normalized(state)?;
        if a.dim() != decomp.dim() || b.dim() != decomp.dim() {
            return Err(Error::Dimension { expected: decomp.dim(), found: a.dim().max(b.dim()) });
        }
        let same = std::ptr::eq(a, b);
        if !same {
            let c = a.commutator(b)?.norm();
            if c > COMMUTE_TOL {
                return Err(Error::NonCommuting(c));
            }
        }
        let a_el = spectral::heisenberg_elements(a, decomp)?;
        let b_el = if same { None } else { Some(spectral::heisenberg_elements(b, decomp)?) };
        Ok(Self::from_elements(decomp, a_el, b_el, decomp.coefficients(state)?))
    }

    /// Eigenbasis inputs; `b = None` means `B = A`.
    pub fn from_elements(
        decomp: &EigenDecomposition,
        a: OperatorMatrix,
        b: Option<OperatorMatrix>,
        coeffs: Array1<C64>,
    ) -> Self {
        let e0 = decomp.energies()[0];
        let a_coeffs = a.apply_unchecked(&coeffs);
        OtocEvaluator { shifted: decomp.energies().mapv(|e| e - e0), a, b, coeffs, a_coeffs }
    }

    fn b(&self) -> &OperatorMatrix {
        self.b.as_ref().unwrap_or(&self.a)
    }

    /// `B(t) x` in the eigenbasis.
    fn heisenberg_apply(&self, x: &Array1<C64>, phase: &Array1<C64>) -> Array1<C64> {
        let rotated: Array1<C64> = x.iter().zip(phase.iter()).map(|(z, p)| z * p.conj()).collect();
        let mut y = self.b().apply_unchecked(&rotated);
        y.iter_mut().zip(phase.iter()).for_each(|(z, p)| *z *= p);
        y
    }

    pub fn eval(&self, t: f64) -> C64 {
        let phase = self.shifted.mapv(|e| C64::from_polar(1.0, e * t));
        let u = self.heisenberg_apply(&self.a_coeffs, &phase);
        let v = self.a.apply_unchecked(&self.heisenberg_apply(&self.coeffs, &phase));
        v.iter().zip(u.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn eval_many(&self, times: &[f64]) -> Vec<C64> {
        times.par_iter().map(|&t| self.eval(t)).collect()
    }

    /// `C(t) = −⟨[A, B(t)]²⟩` by forming `B(t)` densely. O(D³); reference use only.
    pub fn commutator_square(&self, decomp: &EigenDecomposition, t: f64) -> Result<f64> {
        let bt = spectral::phase_apply(self.b(), decomp, t)?;
        let a = self.a.to_complex();
        let k = a.dot(&bt) - bt.dot(&a);
        let kc = k.dot(&k.dot(&self.coeffs));
        let val: C64 = self.coeffs.iter().zip(kc.iter()).map(|(c, x)| c.conj() * x).sum();
        Ok(-val.re)
    }
}

fn check_normalized(state: &QuantumState) -> Result<()> {
    let n = state.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

/// `F(t)` on a grid of times.
pub fn otoc_series(
    decomp: &EigenDecomposition,
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    state: &QuantumState,
    times: &[f64],
) -> Result<OTOCSeries> {
    let ev = OtocEvaluator::new(decomp, a, b, state)?;
    Ok(OTOCSeries {
        times: times.to_vec(),
        values: ev.eval_many(times),
        operator: None,
        state: StateTag::Custom,
        params: decomp.source_params().copied(),
    })
}

/// Qubit or collective OTOC with `A = B = op` in an eigenstate.
pub fn eigenstate_series(
    decomp: &EigenDecomposition,
    tag: OperatorTag,
    level: usize,
    times: &[f64],
) -> Result<OTOCSeries> {
    let op = operator_for(decomp, tag)?;
    let state = decomp.eigenstate(level)?;
    let mut s = otoc_series(decomp, &op, &op, &state, times)?;
    s.operator = Some(tag);
    s.state = if level == 0 { StateTag::Ground } else { StateTag::Eigen(level) };
    Ok(s)
}

/// Build a named operator on the space `decomp` lives in.
pub fn operator_for(decomp: &EigenDecomposition, tag: OperatorTag) -> Result<OperatorMatrix> {
    let with_qubit = decomp.basis() == BasisTag::Composite;
    let n = if with_qubit { decomp.dim() / 2 - 1 } else { decomp.dim() - 1 };
    tag.build(n, with_qubit)
}

/// Explicit triple sum over eigenstates for `A = B = op` and reference level `n`:
///
/// `F(t) = Σ_{γ,γ′,β} e^{−i(E_β − E_n + E_γ − E_γ′)t} O_{nγ} O_{γγ′} O_{γ′β} O_{βn}`.
///
/// O(D³) per time point; refuses `D > cap`.
pub fn otoc_series_spectral_sum(
    decomp: &EigenDecomposition,
    elements: &OperatorMatrix,
    level: usize,
    times: &[f64],
    cap: usize,
) -> Result<Vec<C64>> {
    let d = decomp.dim();
    if d > cap {
        return Err(Error::TooLarge { dim: d, cap });
    }
    if level >= d {
        return Err(Error::IndexOutOfRange { index: level, dim: d });
    }
    if elements.dim() != d {
        return Err(Error::Dimension { expected: d, found: elements.dim() });
    }
    let e = decomp.energies();
    let o = elements.to_complex();
    Ok(times
        .par_iter()
        .map(|&t| {
            let mut total = C64::new(0.0, 0.0);
            for g in 0..d {
                let w_g = o[(level, g)];
                if w_g == C64::new(0.0, 0.0) {
                    continue;
                }
                for gp in 0..d {
                    let w_ggp = w_g * o[(g, gp)];
                    if w_ggp == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for beta in 0..d {
                        let freq = e[beta] - e[level] + e[g] - e[gp];
                        total += C64::from_polar(1.0, -freq * t) * w_ggp * o[(gp, beta)] * o[(beta, level)];
                    }
                }
            }
            total
        })
        .collect())
}

/// Indices `β` with `|E_β − target| < eps` in an ascending spectrum.
fn matching_levels(energies: &[f64], target: f64, eps: f64) -> std::ops::Range<usize> {
    let lo = energies.partition_point(|&e| e <= target - eps);
    let hi = energies.partition_point(|&e| e < target + eps);
    lo..hi.max(lo)
}

/// Infinite-time average of `F_n(t)` for `A = B = op` in eigenstate `level`.
///
/// Keeps the terms `O_{nγ}O_{γγ′}O_{γ′β}O_{βn}` whose frequency
/// `|E_β − E_n + E_γ − E_γ′|` is below `eps`. For each `(γ, γ′)` pair the
/// matching `β` are located by binary search in the sorted spectrum, so the
/// cost is O(D² log D) plus the number of matches.
pub fn long_time_average_elements(
    decomp: &EigenDecomposition,
    elements: &OperatorMatrix,
    level: usize,
    eps: f64,
) -> Result<LongTimeStats> {
    let d = decomp.dim();
    if level >= d {
        return Err(Error::IndexOutOfRange { index: level, dim: d });
    }
    if elements.dim() != d {
        return Err(Error::Dimension { expected: d, found: elements.dim() });
    }
    let e = decomp.energies().to_vec();
    let total: C64 = if elements.is_real() {
        let o = elements.re();
        (0..d)
            .into_par_iter()
            .map(|g| {
                let w_g = o[(level, g)];
                if w_g == 0.0 {
                    return C64::new(0.0, 0.0);
                }
                let mut acc = 0.0;
                for gp in 0..d {
                    let w = w_g * o[(g, gp)];
                    if w == 0.0 {
                        continue;
                    }
                    for beta in matching_levels(&e, e[level] + e[gp] - e[g], eps) {
                        acc += w * o[(gp, beta)] * o[(beta, level)];
                    }
                }
                C64::new(acc, 0.0)
            })
            .sum()
    } else {
        (0..d)
            .into_par_iter()
            .map(|g| {
                let w_g = elements.get(level, g);
                let mut acc = C64::new(0.0, 0.0);
                for gp in 0..d {
                    let w = w_g * elements.get(g, gp);
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for beta in matching_levels(&e, e[level] + e[gp] - e[g], eps) {
                        acc += w * elements.get(gp, beta) * elements.get(beta, level);
                    }
                }
                acc
            })
            .sum()
    };
    Ok(LongTimeStats {
        f_bar: total.re,
        f_bar_complex: total,
        variance: None,
        method: AverageMethod::GapMatching,
        horizon: None,
    })
}

/// Gap-matching long-time average in eigenstate `level` for `A = B = op`.
pub fn long_time_average(decomp: &EigenDecomposition, level: usize, op: &OperatorMatrix) -> Result<LongTimeStats> {
    let el = spectral::heisenberg_elements(op, decomp)?;
    long_time_average_elements(decomp, &el, level, FREQUENCY_TOL)
}

/// `F̄_n` for every level at once, sharing the eigenbasis elements.
pub fn eigenstate_otoc_averages(decomp: &EigenDecomposition, op: &OperatorMatrix) -> Result<Vec<f64>> {
    let el = spectral::heisenberg_elements(op, decomp)?;
    (0..decomp.dim())
        .map(|n| long_time_average_elements(decomp, &el, n, FREQUENCY_TOL).map(|s| s.f_bar))
        .collect()
}

/// `F̄_n` of a single level.
pub fn eigenstate_otoc_average(decomp: &EigenDecomposition, level: usize, op: &OperatorMatrix) -> Result<f64> {
    Ok(long_time_average(decomp, level, op)?.f_bar)
}

/// Infinite-time average of `F(t)` for an arbitrary state.
///
/// Keeps the terms `c_α* b_β B†_{αγ} A†_{γγ′} B_{γ′β}` (with `b = A c`) whose
/// frequency `E_β − E_α + E_γ − E_γ′` vanishes. O(D³ log D); refuses `D > cap`.
pub fn long_time_average_state(
    decomp: &EigenDecomposition,
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    state: &QuantumState,
    eps: f64,
    cap: usize,
) -> Result<LongTimeStats> {
    let d = decomp.dim();
    if d > cap {
        return Err(Error::TooLarge { dim: d, cap });
    }
    check_normalized(state)?;
    let a_el = spectral::heisenberg_elements(a, decomp)?;
    let b_el = spectral::heisenberg_elements(b, decomp)?;
    let c = decomp.coefficients(state)?;
    let bc = a_el.apply_unchecked(&c);
    let a_dag = a_el.adjoint().to_complex();
    let b_c = b_el.to_complex();
    let b_dag = b_el.adjoint().to_complex();
    let e = decomp.energies().to_vec();
    let total: C64 = (0..d)
        .into_par_iter()
        .map(|alpha| {
            let ca = c[alpha].conj();
            if ca == C64::new(0.0, 0.0) {
                return C64::new(0.0, 0.0);
            }
            let mut acc = C64::new(0.0, 0.0);
            for g in 0..d {
                let w_g = ca * b_dag[(alpha, g)];
                if w_g == C64::new(0.0, 0.0) {
                    continue;
                }
                for gp in 0..d {
                    let w = w_g * a_dag[(g, gp)];
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for beta in matching_levels(&e, e[alpha] + e[gp] - e[g], eps) {
                        acc += w * b_c[(gp, beta)] * bc[beta];
                    }
                }
            }
            acc
        })
        .sum();
    Ok(LongTimeStats {
        f_bar: total.re,
        f_bar_complex: total,
        variance: None,
        method: AverageMethod::GapMatching,
        horizon: None,
    })
}

/// Trapezoidal average of `F` over `[0, T]` with `n_samples` uniformly spaced points.
pub fn long_time_average_numeric(
    evaluator: &OtocEvaluator,
    horizon: f64,
    n_samples: usize,
    mode: VarianceMode,
) -> Result<LongTimeStats> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!("horizon must be > 0, got {horizon}")));
    }
    if n_samples < 1000 {
        return Err(Error::InvalidInput(format!("n_samples must be ≥ 1000, got {n_samples}")));
    }
    let h = horizon / (n_samples - 1) as f64;
    let times: Vec<f64> = (0..n_samples).map(|k| k as f64 * h).collect();
    let values = evaluator.eval_many(&times);
    Ok(trapezoid_stats(&values, horizon, mode))
}

/// Trapezoidal mean and variance of equally spaced samples spanning `[0, horizon]`.
pub fn trapezoid_stats(values: &[C64], horizon: f64, mode: VarianceMode) -> LongTimeStats {
    let n = values.len();
    let weight = |k: usize| if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
    let norm = (n - 1) as f64;
    let mean: C64 = values.iter().enumerate().map(|(k, z)| z * weight(k)).sum::<C64>() / norm;
    let variance = values
        .iter()
        .enumerate()
        .map(|(k, z)| weight(k) * deviation(*z, mean, mode))
        .sum::<f64>()
        / norm;
    LongTimeStats {
        f_bar: mean.re,
        f_bar_complex: mean,
        variance: Some(variance),
        method: AverageMethod::FiniteT,
        horizon: Some(horizon),
    }
}

fn deviation(z: C64, mean: C64, mode: VarianceMode) -> f64 {
    match mode {
        VarianceMode::Real => (mean.re - z.re).powi(2),
        VarianceMode::Complex => (mean - z).norm_sqr(),
    }
}

/// Average and variance over the equidistributed times `t_k = T·frac(k/φ)`, `k = 1..=n`.
///
/// Converges to the same long-time limit as the trapezoidal average without
/// having to resolve the fastest oscillation, which matters when `NW ≫ 1`.
pub fn long_time_average_sampled(
    evaluator: &OtocEvaluator,
    horizon: f64,
    n_samples: usize,
    mode: VarianceMode,
) -> Result<LongTimeStats> {
    if !(horizon > 0.0) || n_samples < 2 {
        return Err(Error::InvalidInput("sampled average needs T > 0 and at least 2 samples".into()));
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let times: Vec<f64> = (1..=n_samples).map(|k| horizon * (k as f64 * golden).fract()).collect();
    let values = evaluator.eval_many(&times);
    let mean = values.iter().sum::<C64>() / n_samples as f64;
    let variance = values.iter().map(|z| deviation(*z, mean, mode)).sum::<f64>() / n_samples as f64;
    Ok(LongTimeStats {
        f_bar: mean.re,
        f_bar_complex: mean,
        variance: Some(variance),
        method: AverageMethod::Sampled,
        horizon: Some(horizon),
    })
}

/// `PR = (Σ_n |⟨ψ_n|ref⟩|⁴)⁻¹`.
pub fn participation_ratio(decomp: &EigenDecomposition, reference: &QuantumState) -> Result<f64> {
    check_normalized(reference)?;
    let c = decomp.coefficients(reference)?;
    let s: f64 = c.iter().map(|z| z.norm_sqr().powi(2)).sum();
    Ok(1.0 / s)
}

/// `PR` of `op|ψ_level⟩` (renormalized), the spread of the kicked eigenstate.
pub fn kicked_participation_ratio(decomp: &EigenDecomposition, op: &OperatorMatrix, level: usize) -> Result<f64> {
    let psi = decomp.eigenstate(level)?;
    let kicked = QuantumState::normalized(op.apply(psi.amplitudes())?, psi.basis())?;
    participation_ratio(decomp, &kicked)
}

/// `⟨ψ|O(t) O|ψ⟩` on a grid of times.
pub fn two_point(
    decomp: &EigenDecomposition,
    state: &QuantumState,
    op: &OperatorMatrix,
    times: &[f64],
) -> Result<Vec<C64>> {
    check_normalized(state)?;
    let el = spectral::heisenberg_elements(op, decomp)?;
    let c = decomp.coefficients(state)?;
    let y = el.apply_unchecked(&c);
    let e0 = decomp.energies()[0];
    let shifted = decomp.energies().mapv(|e| e - e0);
    Ok(times
        .par_iter()
        .map(|&t| {
            let back = shifted.mapv(|e| C64::from_polar(1.0, -e * t));
            let z: Array1<C64> = y.iter().zip(back.iter()).map(|(a, p)| a * p).collect();
            let w = el.apply_unchecked(&z);
            c.iter().zip(back.iter()).zip(w.iter()).map(|((ci, p), wi)| (ci * p).conj() * wi).sum()
        })
        .collect())
}

/// Infinite-time average of `⟨ψ|O(t) O|ψ⟩`.
pub fn two_point_long_time_average(
    decomp: &EigenDecomposition,
    state: &QuantumState,
    op: &OperatorMatrix,
    eps: f64,
) -> Result<C64> {
    check_normalized(state)?;
    let el = spectral::heisenberg_elements(op, decomp)?;
    let c = decomp.coefficients(state)?;
    let y = el.apply_unchecked(&c);
    let e = decomp.energies().to_vec();
    let mut total = C64::new(0.0, 0.0);
    for alpha in 0..e.len() {
        for beta in matching_levels(&e, e[alpha], eps) {
            total += c[alpha].conj() * el.get(alpha, beta) * y[beta];
        }
    }
    Ok(total)
}

/// Echo form of the `σ̂_x` OTOC for a `σ̂_x = +1` initial state:
/// `F(t) = ⟨Ψ(t)|σ̂_x|Ψ(t)⟩` with `|Ψ(t)⟩ = e^{iĤ₊t} e^{−iĤ₋t}|Ψ(0)⟩`.
#[derive(Clone, Debug)]
pub struct EchoEvaluator {
    plus_shifted: Array1<f64>,
    minus_shifted: Array1<f64>,
    /// `V₊ᵀ V₋`
    overlap: Array2<f64>,
    minus_coeffs: Array1<C64>,
    sigma_plus: OperatorMatrix,
}

impl EchoEvaluator {
    pub fn new(plus: &EigenDecomposition, minus: &EigenDecomposition, state0: &QuantumState) -> Result<Self> {
        check_normalized(state0)?;
        let d = plus.dim();
        if minus.dim() != d || state0.dim() != d || plus.basis() != BasisTag::Composite {
            return Err(Error::Dimension { expected: d, found: state0.dim() });
        }
        let n = d / 2 - 1;
        let sx = model::embed_qubit(&model::sigma_x(), n);
        let flipped = sx.apply(state0.amplitudes())?;
        let residual = spectral::l2(&(flipped - state0.amplitudes()));
        if residual > 1e-8 {
            return Err(Error::NotSigmaXEigenstate(residual));
        }
        let shift = |dec: &EigenDecomposition| {
            let e0 = dec.energies()[0];
            dec.energies().mapv(|e| e - e0)
        };
        Ok(EchoEvaluator {
            plus_shifted: shift(plus),
            minus_shifted: shift(minus),
            overlap: plus.states().t().dot(&minus.states()),
            minus_coeffs: minus.coefficients(state0)?,
            sigma_plus: spectral::heisenberg_elements(&sx, plus)?,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x: Array1<C64> = self
            .minus_coeffs
            .iter()
            .zip(self.minus_shifted.iter())
            .map(|(c, e)| c * C64::from_polar(1.0, -e * t))
            .collect();
        let re = self.overlap.dot(&x.mapv(|z| z.re));
        let im = self.overlap.dot(&x.mapv(|z| z.im));
        let y: Array1<C64> = re
            .iter()
            .zip(im.iter())
            .zip(self.plus_shifted.iter())
            .map(|((r, i), e)| C64::new(*r, *i) * C64::from_polar(1.0, e * t))
            .collect();
        let sy = self.sigma_plus.apply_unchecked(&y);
        y.iter().zip(sy.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().re
    }
}

/// Echo-form OTOC, diagonalizing `Ĥ₊` and `Ĥ₋` in their parity sectors.
pub fn echo_otoc(params: &ModelParams, state0: &QuantumState, times: &[f64]) -> Result<OTOCSeries> {
    let plus = spectral::diagonalize_model_pm(params, 1)?;
    let minus = spectral::diagonalize_model_pm(params, -1)?;
    let ev = EchoEvaluator::new(&plus, &minus, state0)?;
    Ok(OTOCSeries {
        times: times.to_vec(),
        values: times.par_iter().map(|&t| C64::new(ev.eval(t), 0.0)).collect(),
        operator: Some(OperatorTag::SigmaX),
        state: StateTag::Product,
        params: Some(*params),
    })
}

/// `|ψ₀⟩_B ⊗ (|+⟩ + |−⟩)/√2` with `|ψ₀⟩_B` the ground state of `Ĥ_B`.
pub fn default_echo_state(params: &ModelParams) -> Result<QuantumState> {
    let boson = spectral::diagonalize_boson(params)?.ground_state();
    let h = C64::new(1.0 / 2f64.sqrt(), 0.0);
    QuantumState::product(&boson, [h, h])
}

/// `(|N/2⟩|−⟩ + |−N/2⟩|+⟩)/√2`, the strong-coupling ground state of `W Ŝ_z σ̂_z`.
pub fn cat_state(n_bosons: usize) -> Result<QuantumState> {
    let basis = model::SpinBasis::new(n_bosons);
    let n = n_bosons as i64;
    let mut amps = Array1::zeros(basis.dimension_composite());
    let top = basis.composite_index(n, model::Qubit::Down).expect("m = S");
    let bottom = basis.composite_index(-n, model::Qubit::Up).expect("m = −S");
    amps[top] = C64::new(1.0, 0.0);
    amps[bottom] = C64::new(1.0, 0.0);
    QuantumState::normalized(amps, BasisTag::Composite)
}

/// Spin coherent state `|θ, φ⟩` on the boson space:
/// amplitudes `√C(N, S+m) cos(θ/2)^{S+m} sin(θ/2)^{S−m} e^{i(S−m)φ}`.
pub fn coherent_state(theta: f64, phi: f64, n_bosons: usize) -> Result<QuantumState> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidInput(format!("θ must lie in [0, π], got {theta}")));
    }
    if n_bosons < 1 {
        return Err(Error::InvalidParams("n_bosons must be ≥ 1".into()));
    }
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n_bosons).scan(0.0, |acc, k| {
            *acc += (k as f64).ln();
            Some(*acc)
        }))
        .collect();
    let amps = Array1::from_iter((0..=n_bosons).map(|k| {
        // k = S + m up-spins, n − k = S − m down-spins
        let down = n_bosons - k;
        let pow = |base: f64, e: usize| if e == 0 { 1.0 } else { base.powi(e as i32) };
        if (c == 0.0 && k > 0) || (s == 0.0 && down > 0) {
            return C64::new(0.0, 0.0);
        }
        let ln_binom = ln_fact[n_bosons] - ln_fact[k] - ln_fact[down];
        let mag = if c > 0.0 && s > 0.0 {
            (0.5 * ln_binom + k as f64 * c.ln() + down as f64 * s.ln()).exp()
        } else {
            (0.5 * ln_binom).exp() * pow(c, k) * pow(s, down)
        };
        C64::from_polar(mag, down as f64 * phi)
    }));
    QuantumState::normalized(amps, BasisTag::BosonOnly)
}

/// Broken-phase mean-field polar angles `arccos(±√(1 − Λ⁻²))`, defined for `|Λ| ≥ 1`.
pub fn broken_phase_angles(big_lambda: f64) -> Result<(f64, f64)> {
    if big_lambda.abs() < 1.0 {
        return Err(Error::InvalidInput(format!("|Λ| must be ≥ 1, got {big_lambda}")));
    }
    let r = (1.0 - big_lambda.powi(-2)).sqrt();
    Ok((r.acos(), (-r).acos()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::spectral::diagonalize_model;

    fn qubit_x(n: usize) -> OperatorMatrix {
        model::embed_qubit(&model::sigma_x(), n)
    }

    #[test]
    fn sigma_x_otoc_starts_at_one() {
        let p = ModelParams::at_reduced_lambda(8, -1.5, 1.0, 1.0).unwrap();
        let d = diagonalize_model(&p).unwrap();
        let psi = QuantumState::normalized(Array1::from_iter((0..18).map(|k| C64::new((k as f64).sin(), 0.3))), BasisTag::Composite).unwrap();
        let sx = qubit_x(8);
        let s = otoc_series(&d, &sx, &sx, &psi, &[0.0]).unwrap();
        assert!((s.values[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_commuting_operators() {
        let d = diagonalize_model(&ModelParams::new(3, 0.1, 1.0, 1.0).unwrap()).unwrap();
        let sx = qubit_x(3);
        let sz = model::embed_qubit(&model::sigma_z(), 3);
        let err = otoc_series(&d, &sx, &sz, &d.ground_state(), &[0.1]).unwrap_err();
        assert!(matches!(err, Error::NonCommuting(_)));
        let wrong = OperatorMatrix::identity(4);
        assert!(matches!(otoc_series(&d, &wrong, &wrong, &d.ground_state(), &[0.1]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn participation_ratio_bounds() {
        let d = diagonalize_model(&ModelParams::new(5, -0.2, 1.0, 1.2).unwrap()).unwrap();
        assert!((participation_ratio(&d, &d.eigenstate(3).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        let uniform = d.synthesize(&Array1::from_elem(d.dim(), C64::new(1.0 / (d.dim() as f64).sqrt(), 0.0)));
        let pr = participation_ratio(&d, &uniform).unwrap();
        assert!((pr - d.dim() as f64).abs() < 1e-9);
    }

    #[test]
    fn coherent_state_limits() {
        let up = coherent_state(0.0, 0.3, 6).unwrap();
        assert!((up.amplitudes()[6].norm() - 1.0).abs() < 1e-15);
        let x = coherent_state(std::f64::consts::FRAC_PI_2, 0.0, 10).unwrap();
        let sx = model::build_spin_operators(10).unwrap().sx;
        assert!((sx.expectation(x.amplitudes()).unwrap().re - 5.0).abs() < 1e-12);
        assert!(coherent_state(4.0, 0.0, 3).is_err());
    }

    #[test]
    fn broken_angles_are_supplementary() {
        let (a, b) = broken_phase_angles(-10.0).unwrap();
        assert!((a + b - std::f64::consts::PI).abs() < 1e-14);
        assert!(broken_phase_angles(0.5).is_err());
    }

    #[test]
    fn echo_rejects_non_eigenstate() {
        let p = ModelParams::new(4, 0.0, 1.0, 1.0).unwrap();
        let boson = spectral::diagonalize_boson(&p).unwrap().ground_state();
        let bad = QuantumState::product(&boson, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!(matches!(echo_otoc(&p, &bad, &[0.0]), Err(Error::NotSigmaXEigenstate(_))));
    }

    #[test]
    fn spectral_sum_refuses_large_dimension() {
        let d = diagonalize_model(&ModelParams::new(4, 0.0, 1.0, 1.0).unwrap()).unwrap();
        let el = spectral::heisenberg_elements(&qubit_x(4), &d).unwrap();
        assert!(matches!(otoc_series_spectral_sum(&d, &el, 0, &[0.0], 5), Err(Error::TooLarge { .. })));
        let at_zero = otoc_series_spectral_sum(&d, &el, 0, &[0.0], SPECTRAL_SUM_CAP).unwrap();
        assert!((at_zero[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn constant_series_has_zero_variance() {
        let v = vec![C64::new(1.0, 0.0); 1001];
        let s = trapezoid_stats(&v, 10.0, VarianceMode::Real);
        assert_eq!(s.variance, Some(0.0));
        assert!((s.f_bar - 1.0).abs() < 1e-15);
    }
}
