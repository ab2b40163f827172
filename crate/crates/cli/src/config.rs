//! Run configuration: `key = value` TOML with sections, merged under the
//! command-line flags. The resolved configuration is written next to the
//! outputs and can be fed back through `--config` to repeat a run.

use std::path::{Path, PathBuf};

use otoc_lab::model::ModelParams;
use otoc_lab::otoc::FREQUENCY_TOL;
use otoc_lab::spectral::DEGENERACY_REL;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub n: Option<usize>,
    pub u: Option<f64>,
    /// Reduced coupling `λ = (Λ − Λ_c)/|Λ_c|`.
    pub lambda: Option<f64>,
    /// `Λ = UN/2J`.
    pub big_lambda: Option<f64>,
    pub j_a: Option<f64>,
    pub w: Option<f64>,
    /// Tunneling `J`, the energy unit.
    pub j: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub lambda_points: Option<usize>,
    pub big_lambda_min: Option<f64>,
    pub big_lambda_max: Option<f64>,
    pub big_lambda_points: Option<usize>,
    pub w_min: Option<f64>,
    pub w_max: Option<f64>,
    pub w_points: Option<usize>,
    pub ns: Option<Vec<usize>>,
    pub ws: Option<Vec<f64>>,
    pub variance: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AverageSection {
    /// Finite-time horizon `T` for variances, in units of `1/J`.
    pub horizon: Option<f64>,
    pub n_samples: Option<usize>,
    /// Frequency-matching tolerance `ε_ω` (fixed; recorded with each run).
    pub freq_tol: Option<f64>,
    /// Relative quasi-degeneracy window `ε_deg` (fixed; recorded with each run).
    pub deg_rel: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub operator: Option<String>,
    pub state: Option<String>,
    pub exponent: Option<String>,
    pub qubit: Option<String>,
    pub figures: Option<Vec<String>>,
    pub full_size: Option<bool>,
    pub quick: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

/// Every setting of one run. Unset fields fall back to per-command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub model: ModelSection,
    pub time: TimeSection,
    pub sweep: SweepSection,
    pub average: AverageSection,
    pub analysis: AnalysisSection,
    pub run: RunSection,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, [$($f:ident),*]) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::BadArgs(format!("config {}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Fields set in `top` replace those in `self`. A coupling given in `top`
    /// (`u`, `lambda` or `big_lambda`) replaces whichever one `self` had.
    pub fn overlay(&mut self, top: &RunConfig) {
        let tm = &top.model;
        if tm.u.is_some() || tm.lambda.is_some() || tm.big_lambda.is_some() {
            self.model.u = None;
            self.model.lambda = None;
            self.model.big_lambda = None;
        }
        overlay!(self, top, [subcommand]);
        overlay!(self.model, top.model, [n, u, lambda, big_lambda, j_a, w, j]);
        overlay!(self.time, top.time, [t_max, points]);
        overlay!(
            self.sweep,
            top.sweep,
            [lambda_min, lambda_max, lambda_points, big_lambda_min, big_lambda_max, big_lambda_points, w_min, w_max, w_points, ns, ws, variance]
        );
        overlay!(self.average, top.average, [horizon, n_samples, freq_tol, deg_rel]);
        overlay!(self.analysis, top.analysis, [operator, state, exponent, qubit, figures, full_size, quick]);
        overlay!(self.run, top.run, [out, workers]);
    }

    pub fn has_coupling(&self) -> bool {
        let m = &self.model;
        m.u.is_some() || m.lambda.is_some() || m.big_lambda.is_some()
    }

    pub fn check_coupling(&self) -> Result<(), CliError> {
        let m = &self.model;
        let set = [m.u.is_some(), m.lambda.is_some(), m.big_lambda.is_some()].iter().filter(|x| **x).count();
        if set > 1 {
            return Err(CliError::BadArgs("give at most one of u, lambda, big_lambda".into()));
        }
        Ok(())
    }

    /// Fill the tolerances shared by every command.
    pub fn fill_common(&mut self) {
        let a = &mut self.average;
        a.freq_tol.get_or_insert(FREQUENCY_TOL);
        a.deg_rel.get_or_insert(DEGENERACY_REL);
        a.horizon.get_or_insert(5.0e3);
        a.n_samples.get_or_insert(4000);
        self.run.out.get_or_insert_with(|| PathBuf::from("otoc-lab-out"));
    }

    /// Fill the model section with defaults unless already set.
    pub fn default_model(&mut self, n: usize, coupling: Option<Coupling>) {
        let m = &mut self.model;
        m.n.get_or_insert(n);
        m.j_a.get_or_insert(1.0);
        m.w.get_or_insert(1.0);
        m.j.get_or_insert(1.0);
        if m.u.is_none() && m.lambda.is_none() && m.big_lambda.is_none() {
            match coupling {
                Some(Coupling::Reduced(l)) => m.lambda = Some(l),
                Some(Coupling::Big(l)) => m.big_lambda = Some(l),
                None => {}
            }
        }
    }

    pub fn default_time(&mut self, t_max: f64, points: usize) {
        self.time.t_max.get_or_insert(t_max);
        self.time.points.get_or_insert(points);
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let m = &self.model;
        let n = m.n.ok_or_else(|| CliError::BadArgs("missing n".into()))?;
        let (j_a, w) = (m.j_a.unwrap_or(1.0), m.w.unwrap_or(1.0));
        let base = ModelParams::new(n, 0.0, j_a, w)?.with_tunneling(m.j.unwrap_or(1.0))?;
        let p = match (m.u, m.lambda, m.big_lambda) {
            (Some(u), None, None) => ModelParams { u, ..base },
            (None, Some(l), None) => base.at_lambda(l)?,
            (None, None, Some(l)) => ModelParams { u: base.u_for_big_lambda(l), ..base },
            (None, None, None) => return Err(CliError::BadArgs("no coupling given (u, lambda or big_lambda)".into())),
            _ => return Err(CliError::BadArgs("give at most one of u, lambda, big_lambda".into())),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        let (t_max, k) = (self.time.t_max.unwrap_or(200.0), self.time.points.unwrap_or(4000));
        if !(t_max > 0.0) || k < 2 {
            return Err(CliError::BadArgs(format!("time grid needs t_max > 0 and points ≥ 2, got {t_max}, {k}")));
        }
        Ok(linspace(0.0, t_max, k))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.run.out.clone().unwrap_or_else(|| PathBuf::from("otoc-lab-out"))
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Coupling {
    Reduced(f64),
    Big(f64),
}

pub fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![a];
    }
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}
