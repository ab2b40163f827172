//! One function per subcommand. Each takes a resolved [`RunConfig`] and returns
//! the files to write; nothing here touches the file system.

use otoc_lab::cache;
use otoc_lab::criticality::{self, fmt17, VarianceSettings};
use otoc_lab::model::{ModelParams, OperatorTag};
use otoc_lab::otoc::{self, OtocEvaluator, StateTag, VarianceMode, FREQUENCY_TOL, GENERAL_AVERAGE_CAP};
use otoc_lab::spectral::{EigenDecomposition, QuantumState};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{linspace, Coupling, RunConfig};
use crate::error::CliError;
use crate::output::Outputs;

type CmdResult = Result<Outputs, CliError>;

/// Commands that set the coupling themselves from a grid or a criticality condition.
pub const GRID_COMMANDS: [&str; 4] = ["sweep", "phase-diagram", "scaling", "figures"];

/// Per-command defaults, applied after the config file and the flags.
pub fn apply_defaults(cmd: &str, c: &mut RunConfig) {
    c.fill_common();
    match cmd {
        "spectrum" => c.default_model(50, Some(Coupling::Reduced(2.0))),
        "otoc" => {
            c.default_model(50, Some(Coupling::Reduced(2.0)));
            c.default_time(200.0, 4000);
            c.analysis.operator.get_or_insert_with(|| "sigma_x".into());
            c.analysis.state.get_or_insert_with(|| "ground".into());
        }
        "echo" => {
            c.default_model(50, Some(Coupling::Reduced(-2.0)));
            c.default_time(200.0, 4000);
        }
        "sweep" => {
            c.default_model(50, None);
            let s = &mut c.sweep;
            s.lambda_min.get_or_insert(-4.0);
            s.lambda_max.get_or_insert(2.0);
            s.lambda_points.get_or_insert(61);
            s.ns.get_or_insert_with(|| vec![20, 50, 200]);
            s.variance.get_or_insert(false);
        }
        "phase-diagram" => {
            c.default_model(100, None);
            let s = &mut c.sweep;
            s.big_lambda_min.get_or_insert(-4.0);
            s.big_lambda_max.get_or_insert(1.0);
            s.big_lambda_points.get_or_insert(60);
            s.w_min.get_or_insert(0.0);
            s.w_max.get_or_insert(3.0);
            s.w_points.get_or_insert(60);
        }
        "scaling" => {
            c.default_model(50, None);
            c.analysis.exponent.get_or_insert_with(|| "b".into());
            c.analysis.qubit.get_or_insert_with(|| "both".into());
            c.sweep.ns.get_or_insert_with(criticality::default_scaling_ns);
            c.sweep.ws.get_or_insert_with(|| vec![0.5, 1.0, 2.0]);
        }
        "esqpt" => {
            c.default_model(100, Some(Coupling::Big(-10.0)));
            c.analysis.operator.get_or_insert_with(|| "sigma_x".into());
        }
        "figures" => {
            c.analysis.figures.get_or_insert_with(|| (1..=6).map(|k| format!("fig{k}")).collect());
            c.analysis.full_size.get_or_insert(false);
            c.analysis.quick.get_or_insert(false);
        }
        _ => {}
    }
}

fn operator(c: &RunConfig) -> Result<OperatorTag, CliError> {
    let s = c.analysis.operator.as_deref().unwrap_or("sigma_x");
    s.parse().map_err(|_| CliError::BadArgs(format!("unknown operator '{s}' (sigma_x, sigma_z, Sz_over_N)")))
}

fn csv_header(p: &ModelParams, extra: &str) -> String {
    format!("# params={}{extra}\n", serde_json::to_string(p).unwrap_or_default())
}

fn variance_settings(c: &RunConfig) -> VarianceSettings {
    VarianceSettings {
        horizon: c.average.horizon.unwrap_or(5.0e3),
        n_samples: c.average.n_samples.unwrap_or(4000),
        mode: VarianceMode::Real,
    }
}

fn diagonalize(p: &ModelParams) -> Result<EigenDecomposition, CliError> {
    Ok(cache::diagonalize_model_cached(p)?)
}

pub fn cmd_spectrum(c: &RunConfig) -> CmdResult {
    let p = c.params()?;
    let d = diagonalize(&p)?;
    let mut s = csv_header(&p, "");
    s.push_str("index,energy,parity\n");
    for (i, (e, q)) in d.energies().iter().zip(d.parities()).enumerate() {
        s.push_str(&format!("{i},{},{}\n", fmt17(*e), q.label()));
    }
    let mut out = Outputs::default();
    out.add("spectrum.csv", s);
    Ok(out)
}

fn parse_state(label: &str, p: &ModelParams, d: &EigenDecomposition) -> Result<(QuantumState, StateTag), CliError> {
    match label {
        "ground" => Ok((d.ground_state(), StateTag::Ground)),
        "product" => Ok((otoc::default_echo_state(p)?, StateTag::Product)),
        "cat" => Ok((otoc::cat_state(p.n_bosons)?, StateTag::Cat)),
        s if s.starts_with("eigen:") => {
            let k: usize = s[6..].parse().map_err(|_| CliError::BadArgs(format!("bad eigenstate index in '{s}'")))?;
            Ok((d.eigenstate(k)?, StateTag::Eigen(k)))
        }
        other => Err(CliError::BadArgs(format!("unknown state '{other}' (ground, eigen:K, product, cat)"))),
    }
}

pub fn cmd_otoc(c: &RunConfig) -> CmdResult {
    let p = c.params()?;
    let tag = operator(c)?;
    let d = diagonalize(&p)?;
    let (state, state_tag) = parse_state(c.analysis.state.as_deref().unwrap_or("ground"), &p, &d)?;
    let op = tag.build(p.n_bosons, true)?;
    let times = c.times()?;
    let mut series = otoc::otoc_series(&d, &op, &op, &state, &times)?;
    series.operator = Some(tag);
    series.state = state_tag;

    let el = otoc_lab::spectral::heisenberg_elements(&op, &d)?;
    let coeffs = d.coefficients(&state)?;
    let ev = OtocEvaluator::from_elements(&d, el.clone(), None, coeffs);
    let v = variance_settings(c);
    let sampled = otoc::long_time_average_sampled(&ev, v.horizon, v.n_samples, v.mode)?;
    let (f_bar, method) = match state_tag {
        StateTag::Ground | StateTag::Eigen(_) => {
            let level = if let StateTag::Eigen(k) = state_tag { k } else { 0 };
            (otoc::long_time_average_elements(&d, &el, level, FREQUENCY_TOL)?.f_bar_complex, "gap_matching")
        }
        _ => match otoc::long_time_average_state(&d, &op, &op, &state, FREQUENCY_TOL, GENERAL_AVERAGE_CAP) {
            Ok(s) => (s.f_bar_complex, "gap_matching"),
            Err(otoc_lab::Error::TooLarge { .. }) => (sampled.f_bar_complex, "sampled"),
            Err(e) => return Err(e.into()),
        },
    };
    let pr = match state_tag {
        StateTag::Ground => Some(otoc::kicked_participation_ratio(&d, &op, 0)?),
        StateTag::Eigen(k) => Some(otoc::kicked_participation_ratio(&d, &op, k)?),
        _ => None,
    };
    let summary = json!({
        "params": p,
        "operator": tag.as_str(),
        "state": state_tag.label(),
        "f_bar": f_bar.re,
        "f_bar_imag": f_bar.im,
        "average_method": method,
        "variance": sampled.variance,
        "variance_horizon": v.horizon,
        "variance_samples": v.n_samples,
        "kicked_pr": pr,
    });
    let mut out = Outputs::default();
    out.add("otoc.csv", series.to_csv());
    out.add_json("otoc_summary.json", &summary);
    Ok(out)
}

pub fn cmd_echo(c: &RunConfig) -> CmdResult {
    let p = c.params()?;
    let psi = otoc::default_echo_state(&p)?;
    let s = otoc::echo_otoc(&p, &psi, &c.times()?)?;
    let mut out = Outputs::default();
    out.add("echo.csv", s.to_csv());
    Ok(out)
}

fn template(c: &RunConfig, n: usize) -> Result<ModelParams, CliError> {
    let m = &c.model;
    Ok(ModelParams::new(n, 0.0, m.j_a.unwrap_or(1.0), m.w.unwrap_or(1.0))?.with_tunneling(m.j.unwrap_or(1.0))?)
}

fn grid(min: Option<f64>, max: Option<f64>, k: Option<usize>, what: &str) -> Result<Vec<f64>, CliError> {
    let (a, b, k) = (min.unwrap_or(0.0), max.unwrap_or(1.0), k.unwrap_or(2));
    if k == 0 || (k > 1 && !(b > a)) {
        return Err(CliError::BadArgs(format!("{what} grid needs max > min and at least one point")));
    }
    Ok(linspace(a, b, k))
}

pub fn cmd_sweep(c: &RunConfig) -> CmdResult {
    let s = &c.sweep;
    let lambdas = grid(s.lambda_min, s.lambda_max, s.lambda_points, "lambda")?;
    let ns = s.ns.clone().unwrap_or_default();
    if ns.is_empty() {
        return Err(CliError::BadArgs("sweep needs at least one N".into()));
    }
    let var = s.variance.unwrap_or(false).then(|| variance_settings(c));
    let r = criticality::sweep_lambda(&template(c, ns[0])?, &lambdas, &ns, var)?;
    let mut out = Outputs::default();
    out.add("sweep.csv", r.to_csv());
    for p in r.points.iter().filter(|p| p.error.is_some()) {
        out.partial_failures.push(format!("λ={} N={}: {}", p.axis, p.params.n_bosons, p.error.as_deref().unwrap_or("")));
    }
    Ok(out)
}

pub fn cmd_phase_diagram(c: &RunConfig) -> CmdResult {
    let s = &c.sweep;
    let ls = grid(s.big_lambda_min, s.big_lambda_max, s.big_lambda_points, "big_lambda")?;
    let ws = grid(s.w_min, s.w_max, s.w_points, "w")?;
    let n = c.model.n.unwrap_or(100);
    let g = criticality::phase_diagram(&ls, &ws, n, c.model.j_a.unwrap_or(1.0))?;
    let mut out = Outputs::default();
    out.add("phase_diagram.csv", g.to_csv());
    let onsets: Vec<_> = ws
        .iter()
        .enumerate()
        .map(|(iw, w)| json!({"w": w, "lambda_c": g.critical_line[iw], "onset_0.1": g.onset(iw, 0.1)}))
        .collect();
    out.add_json("phase_diagram_onsets.json", &json!({ "n_bosons": n, "threshold": 0.1, "rows": onsets }));
    for (iw, row) in g.half_c.iter().enumerate() {
        for (il, v) in row.iter().enumerate() {
            if v.is_none() {
                out.partial_failures.push(format!("Λ={} W={}", ls[il], ws[iw]));
            }
        }
    }
    Ok(out)
}

fn grouped_csv(header: &str, rows: &[(String, usize, f64)]) -> String {
    let mut s = format!("{header}\n");
    for (g, n, v) in rows {
        s.push_str(&format!("{g},{n},{}\n", fmt17(*v)));
    }
    s
}

fn fit_json(label: &str, fit: &criticality::ScalingFit) -> serde_json::Value {
    let mut v = fit.summary_json();
    v["series"] = json!(label);
    v
}

pub fn cmd_scaling(c: &RunConfig) -> CmdResult {
    let ns = c.sweep.ns.clone().unwrap_or_else(criticality::default_scaling_ns);
    let j_a = c.model.j_a.unwrap_or(1.0);
    let w = c.model.w.unwrap_or(1.0);
    let exponent = c.analysis.exponent.as_deref().unwrap_or("b");
    let mut rows = vec![];
    let mut fits = vec![];
    match exponent {
        "b" => {
            let ws = c.sweep.ws.clone().unwrap_or_else(|| vec![w]);
            for (w, fit) in ws.iter().zip(criticality::scaling_b(&ws, j_a, &ns)?) {
                let label = format!("W={w}");
                rows.extend(fit.points.iter().map(|(n, y)| (label.clone(), *n, *y)));
                let mut j = fit_json(&label, &fit);
                j["b"] = json!(-fit.slope);
                fits.push(j);
            }
        }
        "d" => {
            let tags = match c.analysis.operator.as_deref() {
                None => vec![OperatorTag::SigmaX, OperatorTag::SigmaZ],
                Some(_) => vec![operator(c)?],
            };
            for tag in tags {
                let fit = criticality::scaling_d(tag, w, j_a, &ns)?;
                rows.extend(fit.points.iter().map(|(n, y)| (tag.as_str().to_string(), *n, *y)));
                let mut j = fit_json(tag.as_str(), &fit);
                j["d"] = json!(fit.slope);
                fits.push(j);
            }
        }
        "z" => {
            let which: Vec<bool> = match c.analysis.qubit.as_deref().unwrap_or("both") {
                "both" => vec![false, true],
                "with" => vec![true],
                "without" => vec![false],
                other => return Err(CliError::BadArgs(format!("qubit must be with, without or both, got '{other}'"))),
            };
            for with_qubit in which {
                let label = if with_qubit { "with_qubit" } else { "boson_only" };
                let fit = criticality::scaling_z(&ns, with_qubit, w, j_a)?;
                rows.extend(fit.points.iter().map(|(n, y)| (label.to_string(), *n, *y)));
                let mut j = fit_json(label, &fit);
                j["slope"] = json!(fit.slope);
                fits.push(j);
            }
        }
        other => return Err(CliError::BadArgs(format!("exponent must be b, d or z, got '{other}'"))),
    }
    let value = match exponent {
        "b" => "deficit",
        _ => "t_min",
    };
    let mut out = Outputs::default();
    out.add(format!("scaling_{exponent}.csv"), grouped_csv(&format!("group,n,{value}"), &rows));
    out.add_json(format!("scaling_{exponent}.json"), &json!({ "exponent": exponent, "j_a": j_a, "w": w, "fits": fits }));
    Ok(out)
}

pub fn cmd_esqpt(c: &RunConfig) -> CmdResult {
    let p = c.params()?;
    let tag = operator(c)?;
    let s = criticality::esqpt_scan(&p, tag)?;
    let thr = criticality::split_threshold(p.n_bosons);
    let (lo, hi) = s.split_energies(thr);
    let mut out = Outputs::default();
    out.add("esqpt.csv", s.to_csv());
    out.add_json(
        "esqpt_summary.json",
        &json!({
            "params": p,
            "operator": tag.as_str(),
            "split_threshold": thr,
            "first_split_energy": lo,
            "last_paired_energy": hi,
            "critical_energies": [s.critical_energies.0, s.critical_energies.1],
        }),
    );
    Ok(out)
}

/// Sizes and grids for the figure datasets; `quick` shrinks everything to smoke-test scale.
struct FigureScale {
    fig1_n: usize,
    time_points: usize,
    fig2_ns: Vec<usize>,
    fig2_lambda_points: usize,
    fig2b_n: usize,
    fig2b_points: usize,
    fig2c_n: usize,
    fig2c_points: usize,
    fig3_n: usize,
    fig3_ws: Vec<f64>,
    fig3_lambda_points: usize,
    fig3_variance: VarianceSettings,
    fig4_ns: Vec<usize>,
    fig5_n: usize,
    fig6_n: usize,
    fig6_points: usize,
}

impl FigureScale {
    fn new(quick: bool, full_size: bool) -> Self {
        if quick {
            return FigureScale {
                fig1_n: 20,
                time_points: 200,
                fig2_ns: vec![10, 20],
                fig2_lambda_points: 9,
                fig2b_n: 30,
                fig2b_points: 9,
                fig2c_n: 20,
                fig2c_points: 6,
                fig3_n: 30,
                fig3_ws: vec![1.0, 7.0, 50.0],
                fig3_lambda_points: 6,
                fig3_variance: VarianceSettings { horizon: 200.0, n_samples: 500, mode: VarianceMode::Real },
                fig4_ns: criticality::geometric_ns(20, 60, 5),
                fig5_n: 20,
                fig6_n: 20,
                fig6_points: 5,
            };
        }
        FigureScale {
            fig1_n: 50,
            time_points: 4000,
            fig2_ns: vec![20, 50, 200],
            fig2_lambda_points: 61,
            fig2b_n: 200,
            fig2b_points: 41,
            fig2c_n: 100,
            fig2c_points: 60,
            fig3_n: if full_size { 1000 } else { 300 },
            fig3_ws: vec![1.0, 1.5, 2.5, 3.0, 5.0, 7.0, 10.0, 20.0, 30.0, 50.0],
            fig3_lambda_points: 40,
            fig3_variance: VarianceSettings { horizon: 5.0e4, n_samples: 40_000, mode: VarianceMode::Real },
            fig4_ns: criticality::default_scaling_ns(),
            fig5_n: 100,
            fig6_n: 200,
            fig6_points: 41,
        }
    }
}

fn ground_series(p: &ModelParams, tag: OperatorTag, times: &[f64]) -> Result<String, CliError> {
    let d = diagonalize(p)?;
    Ok(otoc::eigenstate_series(&d, tag, 0, times)?.to_csv())
}

fn figure1(s: &FigureScale, out: &mut Outputs) -> Result<(), CliError> {
    let times = linspace(0.0, 200.0, s.time_points);
    for (name, lam) in [("fig1a_otoc.csv", 2.0), ("fig1b_otoc.csv", -2.0)] {
        let p = ModelParams::at_reduced_lambda(s.fig1_n, lam, 1.0, 1.0)?;
        out.add(name, ground_series(&p, OperatorTag::SigmaX, &times)?);
    }
    Ok(())
}

fn figure2(s: &FigureScale, out: &mut Outputs) -> Result<(), CliError> {
    let lambdas = linspace(-4.0, 2.0, s.fig2_lambda_points);
    let sweep = criticality::sweep_lambda(&ModelParams::new(s.fig2_ns[0], 0.0, 1.0, 1.0)?, &lambdas, &s.fig2_ns, None)?;
    for p in sweep.points.iter().filter(|p| p.error.is_some()) {
        out.partial_failures.push(format!("fig2a λ={} N={}", p.axis, p.params.n_bosons));
    }
    out.add("fig2a_sweep.csv", sweep.to_csv());

    let ws = linspace(0.0, 10.0, s.fig2b_points);
    let rows: Vec<(f64, f64, f64)> = ws
        .par_iter()
        .map(|&w| {
            let p = ModelParams::at_big_lambda(s.fig2b_n, -500.0, 1.0, w)?;
            Ok((w, criticality::point_stats(&p, None)?.f_bar, criticality::asymptotic_fbar(w, 1.0)?))
        })
        .collect::<Result<_, otoc_lab::Error>>()?;
    let mut csv = format!("# n_bosons={} big_lambda=-500 j_a=1\nw,f_bar,closed_form\n", s.fig2b_n);
    for (w, f, a) in rows {
        csv.push_str(&format!("{},{},{}\n", fmt17(w), fmt17(f), fmt17(a)));
    }
    out.add("fig2b_asymptote.csv", csv);

    let ls = linspace(-4.0, 1.0, s.fig2c_points);
    let ws = linspace(0.0, 3.0, s.fig2c_points);
    let g = criticality::phase_diagram(&ls, &ws, s.fig2c_n, 1.0)?;
    out.add("fig2c_phase_diagram.csv", g.to_csv());
    Ok(())
}

fn figure3(s: &FigureScale, out: &mut Outputs) -> Result<(), CliError> {
    let lambdas = linspace(-10.0, 1.0, s.fig3_lambda_points);
    let panel_a: Vec<f64> = [1.0, 3.0, 7.0, 50.0].into_iter().filter(|w| s.fig3_ws.contains(w)).collect();
    let mut csv = format!("# n_bosons={} j_a=1\ngroup,lambda,pr\n", s.fig3_n);
    for &w in &panel_a {
        let t = ModelParams::new(s.fig3_n, 0.0, 1.0, w)?;
        let pr: Vec<f64> = lambdas
            .par_iter()
            .map(|&l| Ok(criticality::point_stats(&t.at_lambda(l)?, None)?.pr))
            .collect::<Result<_, otoc_lab::Error>>()?;
        for (l, v) in lambdas.iter().zip(pr) {
            csv.push_str(&format!("W={w},{},{}\n", fmt17(*l), fmt17(v)));
        }
    }
    out.add("fig3a_pr.csv", csv);

    let maxima = criticality::pr_max_analysis(&s.fig3_ws, &lambdas, s.fig3_n, 1.0, s.fig3_variance)?;
    let mut csv = format!(
        "# n_bosons={} j_a=1 horizon={} n_samples={}\nw,pr_max,lambda_at_max,variance\n",
        s.fig3_n, s.fig3_variance.horizon, s.fig3_variance.n_samples
    );
    for m in &maxima {
        csv.push_str(&format!("{},{},{},{}\n", fmt17(m.w), fmt17(m.pr_max), fmt17(m.lambda_at_max), m.variance.map(fmt17).unwrap_or_default()));
    }
    out.add("fig3b_prmax.csv", csv);

    let times = linspace(0.0, 200.0, s.time_points);
    for m in maxima.iter().filter(|m| m.w == 7.0 || m.w == 50.0) {
        let p = ModelParams::new(s.fig3_n, 0.0, 1.0, m.w)?.at_lambda(m.lambda_at_max)?;
        out.add(format!("fig3c_otoc_w{}.csv", m.w), ground_series(&p, OperatorTag::SigmaX, &times)?);
    }
    Ok(())
}

fn figure4(s: &FigureScale, out: &mut Outputs) -> Result<(), CliError> {
    let ns = &s.fig4_ns;
    let mut rows = vec![];
    let mut fits = vec![];
    for w in [0.5, 1.0, 2.0] {
        let fit = criticality::fit_power_law(ns, &criticality::critical_deficits(w, 1.0, ns)?)?;
        let label = format!("W={w}");
        rows.extend(fit.points.iter().map(|(n, y)| (label.clone(), *n, *y)));
        let mut j = fit_json(&label, &fit);
        j["b"] = json!(-fit.slope);
        fits.push(j);
    }
    out.add("fig4a_deficits.csv", grouped_csv("group,n,deficit", &rows));
    let mut rows = vec![];
    for tag in [OperatorTag::SigmaX, OperatorTag::SigmaZ] {
        let fit = criticality::scaling_d(tag, 1.0, 1.0, ns)?;
        rows.extend(fit.points.iter().map(|(n, y)| (tag.as_str().to_string(), *n, *y)));
        let mut j = fit_json(tag.as_str(), &fit);
        j["d"] = json!(fit.slope);
        fits.push(j);
    }
    out.add("fig4b_tmin.csv", grouped_csv("group,n,t_min", &rows));
    out.add_json("fig4_fits.json", &json!({ "fits": fits }));
    Ok(())
}

fn figure5(s: &FigureScale, out: &mut Outputs) -> Result<(), CliError> {
    let p = ModelParams::at_big_lambda(s.fig5_n, -10.0, 1.0, 1.0)?;
    for (name, tag) in [("fig5a_esqpt.csv", OperatorTag::SigmaX), ("fig5b_esqpt.csv", OperatorTag::SigmaZ)] {
        out.add(name, criticality::esqpt_scan(&p, tag)?.to_csv());
    }
    Ok(())
}

fn figure6(s: &FigureScale, out: &mut Outputs) -> Result<(), CliError> {
    let lambdas = linspace(-2.0, 2.0, s.fig6_points);
    let rows: Vec<(f64, f64, f64)> = lambdas
        .par_iter()
        .map(|&l| {
            let (f, g) = criticality::product_state_averages(&ModelParams::at_reduced_lambda(s.fig6_n, l, 1.0, 1.0)?)?;
            Ok((l, f, g))
        })
        .collect::<Result<_, otoc_lab::Error>>()?;
    let mut csv = format!("# n_bosons={} j_a=1 w=1 state=product\nlambda,otoc_f_bar,two_point_avg\n", s.fig6_n);
    for (l, f, g) in rows {
        csv.push_str(&format!("{},{},{}\n", fmt17(l), fmt17(f), fmt17(g)));
    }
    out.add("fig6_product.csv", csv);
    Ok(())
}

pub fn cmd_figures(c: &RunConfig) -> CmdResult {
    let scale = FigureScale::new(c.analysis.quick.unwrap_or(false), c.analysis.full_size.unwrap_or(false));
    let mut out = Outputs::default();
    for f in c.analysis.figures.clone().unwrap_or_default() {
        log::info!("building {f}");
        match f.as_str() {
            "fig1" => figure1(&scale, &mut out)?,
            "fig2" => figure2(&scale, &mut out)?,
            "fig3" => figure3(&scale, &mut out)?,
            "fig4" => figure4(&scale, &mut out)?,
            "fig5" => figure5(&scale, &mut out)?,
            "fig6" => figure6(&scale, &mut out)?,
            other => return Err(CliError::BadArgs(format!("unknown figure '{other}' (fig1 … fig6)"))),
        }
    }
    Ok(out)
}
