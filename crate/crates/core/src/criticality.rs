//! Sweeps, phase diagrams, closed-form asymptotics, finite-size scaling fits,
//! first-minimum detection, excited-state scans and PR maxima.

use log::warn;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, ModelParams, OperatorTag};
use crate::operator::OperatorMatrix;
use crate::otoc::{self, OtocEvaluator, VarianceMode, FREQUENCY_TOL};
use crate::spectral::{self, EigenDecomposition, Parity, QuantumState};

/// `F̄` deep in the broken phase: `8Jᵃ²(2Jᵃ² − W²)/(4Jᵃ² + W²)²`.
pub fn asymptotic_fbar(w: f64, j_a: f64) -> Result<f64> {
    if !(j_a > 0.0) {
        return Err(Error::InvalidParams(format!("j_a must be > 0, got {j_a}")));
    }
    let (a2, w2) = (j_a * j_a, w * w);
    Ok(8.0 * a2 * (2.0 * a2 - w2) / (4.0 * a2 + w2).powi(2))
}

/// Settings for the finite-time part of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceSettings {
    pub horizon: f64,
    pub n_samples: usize,
    pub mode: VarianceMode,
}

impl Default for VarianceSettings {
    fn default() -> Self {
        VarianceSettings { horizon: 5.0e3, n_samples: 4000, mode: VarianceMode::Real }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis: f64,
    pub params: ModelParams,
    pub f_bar: Option<f64>,
    pub variance: Option<f64>,
    pub pr: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis_name: String,
    pub template: ModelParams,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# template={}\n{},n,u,w,j_a,f_bar,variance,pr,error\n",
            serde_json::to_string(&self.template).unwrap_or_default(),
            self.axis_name
        );
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                fmt17(p.axis),
                p.params.n_bosons,
                fmt17(p.params.u),
                fmt17(p.params.w),
                fmt17(p.params.j_a),
                opt17(p.f_bar),
                opt17(p.variance),
                opt17(p.pr),
                p.error.as_deref().unwrap_or("").replace(',', ";")
            ));
        }
        s
    }
}

/// Full-precision float formatting for CSV output.
pub fn fmt17(x: f64) -> String {
    format!("{x:.17e}")
}

fn opt17(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

/// Ground-state `σ̂_x` OTOC statistics for one parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub f_bar: f64,
    pub variance: Option<f64>,
    pub pr: f64,
}

/// `F̄` (gap matching), `PR(σ̂_x|ψ₀⟩)`, and optionally the temporal variance.
pub fn point_stats(p: &ModelParams, variance: Option<VarianceSettings>) -> Result<PointStats> {
    let decomp = spectral::diagonalize_model(p)?;
    let sx = model::embed_qubit(&model::sigma_x(), p.n_bosons);
    let el = spectral::heisenberg_elements(&sx, &decomp)?;
    let f_bar = otoc::long_time_average_elements(&decomp, &el, 0, FREQUENCY_TOL)?.f_bar;
    let pr = otoc::kicked_participation_ratio(&decomp, &sx, 0)?;
    let variance = match variance {
        None => None,
        Some(v) => {
            let c = decomp.coefficients(&decomp.ground_state())?;
            let ev = OtocEvaluator::from_elements(&decomp, el, None, c);
            otoc::long_time_average_sampled(&ev, v.horizon, v.n_samples, v.mode)?.variance
        }
    };
    Ok(PointStats { f_bar, variance, pr })
}

/// For every `(λ, N)`: set `U` from `λ`, diagonalize, and record `F̄`, PR and variance.
/// Failed points are kept with their error message.
pub fn sweep_lambda(
    template: &ModelParams,
    lambdas: &[f64],
    ns: &[usize],
    variance: Option<VarianceSettings>,
) -> Result<SweepResult> {
    check_monotone(lambdas)?;
    template.lambda_c_nonzero()?;
    let jobs: Vec<(f64, usize)> = ns.iter().flat_map(|&n| lambdas.iter().map(move |&l| (l, n))).collect();
    let points = jobs
        .par_iter()
        .map(|&(lam, n)| {
            let p = template.with_n(n).and_then(|t| t.at_lambda(lam));
            match p {
                Err(e) => SweepPoint { axis: lam, params: *template, f_bar: None, variance: None, pr: None, error: Some(e.to_string()) },
                Ok(p) => match point_stats(&p, variance) {
                    Ok(s) => SweepPoint { axis: lam, params: p, f_bar: Some(s.f_bar), variance: s.variance, pr: Some(s.pr), error: None },
                    Err(e) => SweepPoint { axis: lam, params: p, f_bar: None, variance: None, pr: None, error: Some(e.to_string()) },
                },
            }
        })
        .collect();
    Ok(SweepResult { axis_name: "lambda".into(), template: *template, points })
}

fn check_monotone(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidInput("empty axis".into()));
    }
    let up = xs.windows(2).all(|w| w[1] > w[0]);
    let down = xs.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::InvalidInput("axis values must be strictly monotone".into()));
    }
    Ok(())
}

/// `C̄/2 = 1 − Re F̄` over a `(Λ, W)` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramGrid {
    pub big_lambdas: Vec<f64>,
    pub ws: Vec<f64>,
    pub n_bosons: usize,
    pub j_a: f64,
    /// `half_c[iw][il]`; `None` where the cell failed.
    pub half_c: Vec<Vec<Option<f64>>>,
    /// `Λ_c(W)` for each row.
    pub critical_line: Vec<f64>,
}

impl PhaseDiagramGrid {
    /// Largest-to-smallest `Λ` scan of row `iw` for the first cell above `threshold`,
    /// interpolated linearly against the previous cell.
    pub fn onset(&self, iw: usize, threshold: f64) -> Option<f64> {
        let mut idx: Vec<usize> = (0..self.big_lambdas.len()).collect();
        idx.sort_by(|&a, &b| self.big_lambdas[b].total_cmp(&self.big_lambdas[a]));
        let row = &self.half_c[iw];
        let mut prev: Option<(f64, f64)> = None;
        for i in idx {
            let Some(v) = row[i] else { continue };
            let x = self.big_lambdas[i];
            if v > threshold {
                return Some(match prev {
                    Some((px, pv)) => px + (threshold - pv) * (x - px) / (v - pv),
                    None => x,
                });
            }
            prev = Some((x, v));
        }
        None
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# n_bosons={} j_a={}\nbig_lambda,w,half_c,lambda_c\n", self.n_bosons, fmt17(self.j_a));
        for (iw, w) in self.ws.iter().enumerate() {
            for (il, l) in self.big_lambdas.iter().enumerate() {
                s.push_str(&format!("{},{},{},{}\n", fmt17(*l), fmt17(*w), opt17(self.half_c[iw][il]), fmt17(self.critical_line[iw])));
            }
        }
        s
    }
}

pub fn phase_diagram(big_lambdas: &[f64], ws: &[f64], n_bosons: usize, j_a: f64) -> Result<PhaseDiagramGrid> {
    if big_lambdas.is_empty() || ws.is_empty() {
        return Err(Error::InvalidInput("phase diagram grids must be non-empty".into()));
    }
    let cells: Vec<(usize, usize)> = (0..ws.len()).flat_map(|iw| (0..big_lambdas.len()).map(move |il| (iw, il))).collect();
    let values: Vec<Option<f64>> = cells
        .par_iter()
        .map(|&(iw, il)| {
            let run = || -> Result<f64> {
                let p = ModelParams::at_big_lambda(n_bosons, big_lambdas[il], j_a, ws[iw])?;
                Ok(1.0 - point_stats(&p, None)?.f_bar)
            };
            run().map_err(|e| warn!("phase diagram cell Λ={} W={}: {e}", big_lambdas[il], ws[iw])).ok()
        })
        .collect();
    let half_c = values.chunks(big_lambdas.len()).map(|c| c.to_vec()).collect();
    Ok(PhaseDiagramGrid {
        big_lambdas: big_lambdas.to_vec(),
        ws: ws.to_vec(),
        n_bosons,
        j_a,
        half_c,
        critical_line: ws.iter().map(|&w| model::lambda_c(w, j_a).unwrap_or(f64::NAN)).collect(),
    })
}

/// Least-squares line through `(ln N, ln y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// System sizes that entered the fit.
    pub fit_window: Vec<usize>,
    pub residuals: Vec<f64>,
    /// `(N, y)` pairs that entered the fit.
    pub points: Vec<(usize, f64)>,
}

impl ScalingFit {
    /// Residual standard error in log space.
    pub fn residual_std(&self) -> f64 {
        let k = self.residuals.len();
        (self.residuals.iter().map(|r| r * r).sum::<f64>() / (k as f64 - 2.0)).sqrt()
    }

    /// `{exponent, stderr, window, points}`
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "exponent": self.slope,
            "stderr": self.slope_stderr,
            "intercept": self.intercept,
            "window": self.fit_window,
            "points": self.points,
        })
    }
}

pub const MIN_FIT_POINTS: usize = 5;

/// Fit `y ∼ N^slope`; non-positive `y` are dropped with a warning.
pub fn fit_power_law(ns: &[usize], ys: &[f64]) -> Result<ScalingFit> {
    if ns.len() != ys.len() {
        return Err(Error::Fit("length mismatch".into()));
    }
    let kept: Vec<(usize, f64)> = ns
        .iter()
        .zip(ys)
        .filter_map(|(&n, &y)| {
            if y > 0.0 && y.is_finite() {
                Some((n, y))
            } else {
                warn!("dropping N={n} from log-log fit: value {y}");
                None
            }
        })
        .collect();
    if kept.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!("need at least {MIN_FIT_POINTS} positive points, have {}", kept.len())));
    }
    let x: Vec<f64> = kept.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let y: Vec<f64> = kept.iter().map(|(_, v)| v.ln()).collect();
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all N identical".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - (intercept + slope * a)).collect();
    let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / (k - 2.0);
    let slope_stderr = (s2 / sxx).sqrt();
    if !slope_stderr.is_finite() {
        return Err(Error::Fit("non-finite standard error".into()));
    }
    Ok(ScalingFit {
        slope,
        intercept,
        slope_stderr,
        fit_window: kept.iter().map(|(n, _)| *n).collect(),
        residuals,
        points: kept,
    })
}

/// Eight geometrically spaced sizes over `[50, 1500]`.
pub fn default_scaling_ns() -> Vec<usize> {
    geometric_ns(50, 1500, 8)
}

pub fn geometric_ns(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let r = (hi as f64 / lo as f64).powf(1.0 / (count - 1) as f64);
    let mut v: Vec<usize> = (0..count).map(|k| (lo as f64 * r.powi(k as i32)).round() as usize).collect();
    v.dedup();
    v
}

/// `1 − F̄^c` at `Λ = Λ_c` for each `N`.
pub fn critical_deficits(w: f64, j_a: f64, ns: &[usize]) -> Result<Vec<f64>> {
    ns.iter()
        .map(|&n| {
            let p = ModelParams::new(n, 0.0, j_a, w)?.at_critical()?;
            Ok(1.0 - point_stats(&p, None)?.f_bar)
        })
        .collect()
}

/// `1 − F̄^c ∼ N^{−b}`; the returned slope is `−b`.
pub fn scaling_b(ws: &[f64], j_a: f64, ns: &[usize]) -> Result<Vec<ScalingFit>> {
    ws.iter().map(|&w| fit_power_law(ns, &critical_deficits(w, j_a, ns)?)).collect()
}

/// Settings for the first-minimum search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TMinOptions {
    /// Initial grid spacing is `t_guess / 200`.
    pub t_guess: f64,
    /// The search gives up beyond `max_factor · t_guess`.
    pub max_factor: f64,
    pub rel_tol: f64,
}

impl TMinOptions {
    /// `t_guess = 2π/(N·max(Jᵃ, W, 1))`.
    pub fn for_qubit(p: &ModelParams) -> Self {
        let scale = p.j_a.abs().max(p.w.abs()).max(1.0);
        TMinOptions { t_guess: 2.0 * std::f64::consts::PI / (p.n_bosons as f64 * scale), max_factor: 100.0, rel_tol: 1e-6 }
    }

    pub fn with_guess(t_guess: f64) -> Self {
        TMinOptions { t_guess, max_factor: 100.0, rel_tol: 1e-6 }
    }
}

const GRID_PER_GUESS: f64 = 200.0;
const GRID_CHUNK: usize = 64;

/// First strict local minimum of `f` on `t > 0`.
///
/// Marches a grid of spacing `t_guess/200` in parallel chunks, stops at the
/// first bracketing triple `f(t₋) > f(t₀) < f(t₊)`, then refines by golden
/// section to relative precision `rel_tol`.
pub fn t_min_detect<F>(f: F, opts: &TMinOptions) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(opts.t_guess > 0.0) {
        return Err(Error::InvalidInput(format!("t_guess must be > 0, got {}", opts.t_guess)));
    }
    let h = opts.t_guess / GRID_PER_GUESS;
    let t_max = opts.max_factor * opts.t_guess;
    let k_max = (t_max / h).ceil() as usize;
    let mut vals: Vec<f64> = vec![f(0.0)];
    let mut start = 1;
    while start <= k_max {
        let end = (start + GRID_CHUNK).min(k_max + 1);
        let chunk: Vec<f64> = (start..end).into_par_iter().map(|k| f(k as f64 * h)).collect();
        vals.extend(chunk);
        for k in start.max(2)..vals.len() {
            let (a, b, c) = (vals[k - 2], vals[k - 1], vals[k]);
            // Plateaus count as a minimum once the curve turns up again.
            if b < a && b <= c {
                let mut j = k;
                while j + 1 < vals.len() && vals[j] == b {
                    j += 1;
                }
                if vals[j] > b || j + 1 == vals.len() {
                    return Ok(golden_section(&f, (k - 2) as f64 * h, k as f64 * h, opts.rel_tol));
                }
            }
        }
        start = end;
    }
    Err(Error::NoMinimum { t_max })
}

/// Minimize a unimodal `f` on `[a, b]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > rel_tol * 0.5 * (a + b).abs().max(f64::MIN_POSITIVE) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// `t_min` of the ground-state OTOC `A = B = op` for a given decomposition.
pub fn t_min_ground(decomp: &EigenDecomposition, op: &OperatorMatrix, opts: &TMinOptions) -> Result<f64> {
    let el = spectral::heisenberg_elements(op, decomp)?;
    let c = decomp.coefficients(&decomp.ground_state())?;
    let ev = OtocEvaluator::from_elements(decomp, el, None, c);
    t_min_detect(|t| ev.eval(t).re, opts)
}

/// `t_min ∼ N^d` for a qubit OTOC at `Λ = Λ_c`.
pub fn scaling_d(tag: OperatorTag, w: f64, j_a: f64, ns: &[usize]) -> Result<ScalingFit> {
    if tag == OperatorTag::SzOverN {
        return Err(Error::Unsupported("scaling_d takes qubit operators; use scaling_z for Ŝ_z/N".into()));
    }
    let t: Result<Vec<f64>> = ns
        .iter()
        .map(|&n| {
            let p = ModelParams::new(n, 0.0, j_a, w)?.at_critical()?;
            let d = spectral::diagonalize_model(&p)?;
            t_min_ground(&d, &tag.build(n, true)?, &TMinOptions::for_qubit(&p))
        })
        .collect();
    fit_power_law(ns, &t?)
}

/// Time unit of the collective-spin dynamics, used as `t_guess` for `Ŝ_z/N`.
pub const BOSON_T_GUESS: f64 = 1.0;

/// `t_min ∼ N^slope` of the `Ŝ_z/N` OTOC in the ground state at the critical point:
/// `Λ = −1` on `Ĥ_B` alone, or `Λ = Λ_c` on the full Hamiltonian.
pub fn scaling_z(ns: &[usize], with_qubit: bool, w: f64, j_a: f64) -> Result<ScalingFit> {
    let t: Result<Vec<f64>> = ns.iter().map(|&n| t_min_sz(n, with_qubit, w, j_a)).collect();
    fit_power_law(ns, &t?)
}

pub fn t_min_sz(n: usize, with_qubit: bool, w: f64, j_a: f64) -> Result<f64> {
    let opts = TMinOptions::with_guess(BOSON_T_GUESS);
    if with_qubit {
        let p = ModelParams::new(n, 0.0, j_a, w)?.at_critical()?;
        let d = spectral::diagonalize_model(&p)?;
        t_min_ground(&d, &OperatorTag::SzOverN.build(n, true)?, &opts)
    } else {
        let p = ModelParams::new(n, 0.0, j_a, w)?;
        let p = ModelParams { u: p.u_for_big_lambda(-1.0), ..p };
        let d = spectral::diagonalize_boson(&p)?;
        t_min_ground(&d, &OperatorTag::SzOverN.build(n, false)?, &opts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsqptLevel {
    pub energy: f64,
    pub f_bar: f64,
    pub parity: Parity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsqptScan {
    pub params: ModelParams,
    pub operator: OperatorTag,
    pub levels: Vec<EsqptLevel>,
    /// `−N(1 + Jᵃ)` and `−N(1 − Jᵃ)`.
    pub critical_energies: (f64, f64),
}

impl EsqptScan {
    /// Distance from each level to the nearest level of opposite parity;
    /// infinite for unclassified levels.
    pub fn opposite_parity_gaps(&self) -> Vec<f64> {
        let sorted = |p: Parity| -> Vec<f64> {
            self.levels.iter().filter(|l| l.parity == p).map(|l| l.energy).collect()
        };
        let (even, odd) = (sorted(Parity::Even), sorted(Parity::Odd));
        let nearest = |list: &[f64], e: f64| -> f64 {
            let i = list.partition_point(|&x| x < e);
            let above = list.get(i).map_or(f64::INFINITY, |x| x - e);
            let below = if i > 0 { e - list[i - 1] } else { f64::INFINITY };
            above.min(below)
        };
        self.levels
            .iter()
            .map(|l| match l.parity {
                Parity::Even => nearest(&odd, l.energy),
                Parity::Odd => nearest(&even, l.energy),
                Parity::Unclassified => f64::INFINITY,
            })
            .collect()
    }

    /// Energies where the parity doublets break up: the lowest level whose
    /// opposite-parity gap exceeds `threshold`, and the highest level that is
    /// still paired within `threshold`.
    pub fn split_energies(&self, threshold: f64) -> (Option<f64>, Option<f64>) {
        let gaps = self.opposite_parity_gaps();
        let lower = self.levels.iter().zip(&gaps).find(|(_, g)| **g > threshold).map(|(l, _)| l.energy);
        let upper = self.levels.iter().zip(&gaps).filter(|(_, g)| **g <= threshold).map(|(l, _)| l.energy).last();
        (lower, upper)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# params={} operator={} e_c_low={} e_c_high={}\nenergy,f_bar,parity\n",
            serde_json::to_string(&self.params).unwrap_or_default(),
            self.operator.as_str(),
            fmt17(self.critical_energies.0),
            fmt17(self.critical_energies.1)
        );
        for l in &self.levels {
            s.push_str(&format!("{},{},{}\n", fmt17(l.energy), fmt17(l.f_bar), l.parity.label()));
        }
        s
    }
}

/// `E_c = −N(1 ± Jᵃ)` in units of `J`.
pub fn critical_energies(n_bosons: usize, j_a: f64) -> (f64, f64) {
    let n = n_bosons as f64;
    (-n * (1.0 + j_a), -n * (1.0 - j_a))
}

/// `F̄_n` for every level, with parity labels.
/// Doublet-splitting threshold, in units of `J`, above which a level counts as split.
pub fn split_threshold(n_bosons: usize) -> f64 {
    1e-2 * n_bosons as f64
}

pub fn esqpt_scan(p: &ModelParams, tag: OperatorTag) -> Result<EsqptScan> {
    let decomp = spectral::diagonalize_model(p)?;
    let op = tag.build(p.n_bosons, true)?;
    let f = otoc::eigenstate_otoc_averages(&decomp, &op)?;
    let levels = decomp
        .energies()
        .iter()
        .zip(f)
        .zip(decomp.parities())
        .map(|((&energy, f_bar), &parity)| EsqptLevel { energy, f_bar, parity })
        .collect();
    Ok(EsqptScan { params: *p, operator: tag, levels, critical_energies: critical_energies(p.n_bosons, p.j_a) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrMax {
    pub w: f64,
    pub pr_max: f64,
    pub lambda_at_max: f64,
    pub variance: Option<f64>,
}

/// Maximize `PR(σ̂_x|ψ₀⟩)` over `λ ∈ [min, max]` of `lambdas` for each `W`:
/// coarse scan of the supplied grid, then golden section around the best cell.
/// The OTOC variance is evaluated at the maximizing `λ`.
pub fn pr_max_analysis(
    ws: &[f64],
    lambdas: &[f64],
    n_bosons: usize,
    j_a: f64,
    variance: VarianceSettings,
) -> Result<Vec<PrMax>> {
    check_monotone(lambdas)?;
    let mut grid = lambdas.to_vec();
    grid.sort_by(f64::total_cmp);
    ws.iter()
        .map(|&w| {
            let template = ModelParams::new(n_bosons, 0.0, j_a, w)?;
            template.lambda_c_nonzero()?;
            let pr_at = |lam: f64| -> Result<f64> {
                let p = template.at_lambda(lam)?;
                Ok(point_stats(&p, None)?.pr)
            };
            let coarse: Vec<f64> = grid.par_iter().map(|&l| pr_at(l)).collect::<Result<_>>()?;
            let best = (0..grid.len()).max_by(|&a, &b| coarse[a].total_cmp(&coarse[b])).expect("non-empty");
            let lo = grid[best.saturating_sub(1)];
            let hi = grid[(best + 1).min(grid.len() - 1)];
            let neg = |l: f64| -pr_at(l).unwrap_or(f64::NEG_INFINITY);
            let mut lam = if hi > lo { golden_section(&neg, lo, hi, 1e-4) } else { grid[best] };
            let mut pr = pr_at(lam)?;
            if pr < coarse[best] {
                lam = grid[best];
                pr = coarse[best];
            }
            let stats = point_stats(&template.at_lambda(lam)?, Some(variance))?;
            Ok(PrMax { w, pr_max: pr, lambda_at_max: lam, variance: stats.variance })
        })
        .collect()
}

/// Long-time averages of the product-state OTOC and of `⟨σ̂_x(t)σ̂_x⟩` on
/// `|ψ₀⟩_B ⊗ |+⟩_x`, for one parameter point.
pub fn product_state_averages(p: &ModelParams) -> Result<(f64, f64)> {
    let decomp = spectral::diagonalize_model(p)?;
    let psi = otoc::default_echo_state(p)?;
    let sx = model::embed_qubit(&model::sigma_x(), p.n_bosons);
    let f = otoc::long_time_average_state(&decomp, &sx, &sx, &psi, FREQUENCY_TOL, otoc::GENERAL_AVERAGE_CAP)?;
    let g: C64 = otoc::two_point_long_time_average(&decomp, &psi, &sx, FREQUENCY_TOL)?;
    Ok((f.f_bar, g.re))
}

/// Re-exported for callers that only need the state constructor.
pub fn product_state(p: &ModelParams) -> Result<QuantumState> {
    otoc::default_echo_state(p)
}
