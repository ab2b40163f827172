//! SVG plots of CSV files written by the other subcommands. Presentation only.

use std::collections::BTreeMap;
use std::path::Path;

use plotters::prelude::*;
use plotters::series::DashedLineSeries;

use crate::error::CliError;

const SIZE: (u32, u32) = (900, 600);
const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(255, 127, 14),
    RGBColor(148, 103, 189),
    RGBColor(23, 190, 207),
];

/// A parsed CSV: the `#` comment (if any), column names and raw rows.
struct Table {
    comment: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(text: &str, source: &str) -> Result<Table, CliError> {
        let mut comment = String::new();
        let mut lines = text.lines().peekable();
        while let Some(l) = lines.peek() {
            if let Some(c) = l.strip_prefix('#') {
                comment.push_str(c.trim());
                lines.next();
            } else {
                break;
            }
        }
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::BadArgs(format!("{source}: no header line")))?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows: Vec<Vec<String>> = lines.filter(|l| !l.is_empty()).map(|l| l.split(',').map(str::to_string).collect()).collect();
        if let Some(bad) = rows.iter().position(|r| r.len() != header.len()) {
            return Err(CliError::BadArgs(format!("{source}: row {} has {} fields, header has {}", bad + 1, rows[bad].len(), header.len())));
        }
        Ok(Table { comment, header, rows })
    }

    fn col(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).expect("column checked by kind detection")
    }

    fn numbers(&self, name: &str) -> Vec<Option<f64>> {
        let i = self.col(name);
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }
}

enum Kind {
    Series,
    Sweep,
    Density,
    Levels,
    Spectrum,
    Grouped,
    Columns,
}

fn kind_of(header: &[String]) -> Option<Kind> {
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    match h.as_slice() {
        ["t", "re_F", "im_F"] => Some(Kind::Series),
        ["lambda", "n", "u", "w", "j_a", "f_bar", "variance", "pr", "error"] => Some(Kind::Sweep),
        ["big_lambda", "w", "half_c", "lambda_c"] => Some(Kind::Density),
        ["energy", "f_bar", "parity"] => Some(Kind::Levels),
        ["index", "energy", "parity"] => Some(Kind::Spectrum),
        ["group", _, _] => Some(Kind::Grouped),
        ["w", "f_bar", "closed_form"] | ["w", "pr_max", "lambda_at_max", "variance"] | ["lambda", "otoc_f_bar", "two_point_avg"] => {
            Some(Kind::Columns)
        }
        _ => None,
    }
}

fn draw_err<E: std::fmt::Debug>(e: E) -> CliError {
    CliError::Io(format!("plot backend: {e:?}"))
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5f64.max(lo.abs() * 0.05) };
    (lo - pad, hi + pad)
}

type Line = (String, Vec<(f64, f64)>);

fn line_chart(buf: &mut String, title: &str, x_label: &str, y_label: &str, lines: &[Line], log_log: bool) -> Result<(), CliError> {
    let root = SVGBackend::with_string(buf, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let tf = |v: f64| if log_log { v.ln() } else { v };
    let all = || lines.iter().flat_map(|(_, p)| p.iter());
    let (x0, x1) = bounds(all().map(|p| tf(p.0)));
    let (y0, y1) = bounds(all().map(|p| tf(p.1)));
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(draw_err)?;
    let (xl, yl) = if log_log { (format!("ln {x_label}"), format!("ln {y_label}")) } else { (x_label.to_string(), y_label.to_string()) };
    chart.configure_mesh().x_desc(xl).y_desc(yl).draw().map_err(draw_err)?;
    for (i, (name, pts)) in lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (tf(x), tf(y))).filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
        chart
            .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
            .map_err(draw_err)?
            .label(name.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        if log_log || pts.len() < 60 {
            chart.draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled()))).map_err(draw_err)?;
        }
    }
    chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw().map_err(draw_err)?;
    root.present().map_err(draw_err)
}

fn series_plot(t: &Table, buf: &mut String, title: &str) -> Result<(), CliError> {
    let x = t.numbers("t");
    let pick = |c: &str| -> Vec<(f64, f64)> { x.iter().zip(t.numbers(c)).filter_map(|(a, b)| Some(((*a)?, b?))).collect() };
    line_chart(buf, title, "t", "F(t)", &[("Re F".into(), pick("re_F")), ("Im F".into(), pick("im_F"))], false)
}

fn sweep_plot(t: &Table, buf: &mut String, title: &str) -> Result<(), CliError> {
    let (l, n, f) = (t.numbers("lambda"), t.col("n"), t.numbers("f_bar"));
    let mut by_n: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for (i, r) in t.rows.iter().enumerate() {
        if let (Some(x), Some(y), Ok(k)) = (l[i], f[i], r[n].parse::<usize>()) {
            by_n.entry(k).or_default().push((x, y));
        }
    }
    let lines: Vec<Line> = by_n.into_iter().map(|(k, p)| (format!("N={k}"), p)).collect();
    line_chart(buf, title, "λ", "F̄", &lines, false)
}

fn grouped_plot(t: &Table, buf: &mut String, title: &str) -> Result<(), CliError> {
    let (xn, yn) = (t.header[1].clone(), t.header[2].clone());
    let (x, y) = (t.numbers(&xn), t.numbers(&yn));
    let mut groups: Vec<Line> = vec![];
    for (i, r) in t.rows.iter().enumerate() {
        let (Some(a), Some(b)) = (x[i], y[i]) else { continue };
        match groups.iter_mut().find(|(g, _)| *g == r[0]) {
            Some((_, p)) => p.push((a, b)),
            None => groups.push((r[0].clone(), vec![(a, b)])),
        }
    }
    line_chart(buf, title, &xn, &yn, &groups, xn == "n")
}

fn columns_plot(t: &Table, buf: &mut String, title: &str) -> Result<(), CliError> {
    let x = t.numbers(&t.header[0]);
    let lines: Vec<Line> = t.header[1..]
        .iter()
        .map(|c| (c.clone(), x.iter().zip(t.numbers(c)).filter_map(|(a, b)| Some(((*a)?, b?))).collect()))
        .collect();
    line_chart(buf, title, &t.header[0], "value", &lines, false)
}

fn spectrum_plot(t: &Table, buf: &mut String, title: &str) -> Result<(), CliError> {
    let pts: Vec<(f64, f64)> = t.numbers("index").iter().zip(t.numbers("energy")).filter_map(|(a, b)| Some(((*a)?, b?))).collect();
    line_chart(buf, title, "level", "E", &[("E_n".into(), pts)], false)
}

/// `F̄_n` against `E_n`: even levels as black circles, odd as orange triangles,
/// critical energies (from the comment line) as vertical lines.
fn levels_plot(t: &Table, buf: &mut String, title: &str) -> Result<(), CliError> {
    let (e, f, par) = (t.numbers("energy"), t.numbers("f_bar"), t.col("parity"));
    let root = SVGBackend::with_string(buf, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let (x0, x1) = bounds(e.iter().flatten().copied());
    let (y0, y1) = bounds(f.iter().flatten().copied());
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(draw_err)?;
    chart.configure_mesh().x_desc("E_n").y_desc("F̄_n").draw().map_err(draw_err)?;
    let orange = RGBColor(255, 140, 0);
    for (i, r) in t.rows.iter().enumerate() {
        let (Some(x), Some(y)) = (e[i], f[i]) else { continue };
        if r[par] == "odd" {
            chart.draw_series(std::iter::once(TriangleMarker::new((x, y), 4, orange.filled()))).map_err(draw_err)?;
        } else {
            chart.draw_series(std::iter::once(Circle::new((x, y), 3, BLACK.stroke_width(1)))).map_err(draw_err)?;
        }
    }
    for key in ["e_c_low=", "e_c_high="] {
        if let Some(ec) = t.comment.split_whitespace().find_map(|w| w.strip_prefix(key)?.parse::<f64>().ok()) {
            chart.draw_series(DashedLineSeries::new(vec![(ec, y0), (ec, y1)], 8, 5, BLUE.stroke_width(1))).map_err(draw_err)?;
        }
    }
    root.present().map_err(draw_err)
}

fn heat(v: f64) -> RGBColor {
    let s = v.clamp(0.0, 1.0);
    let stops = [(0.0, (10.0, 10.0, 40.0)), (0.5, (180.0, 40.0, 90.0)), (1.0, (250.0, 230.0, 120.0))];
    let (a, b) = if s <= 0.5 { (stops[0], stops[1]) } else { (stops[1], stops[2]) };
    let u = (s - a.0) / (b.0 - a.0);
    let mix = |p: f64, q: f64| (p + u * (q - p)) as u8;
    RGBColor(mix(a.1 .0, b.1 .0), mix(a.1 .1, b.1 .1), mix(a.1 .2, b.1 .2))
}

/// `C̄/2` over `(Λ, W)` with the critical line dashed in white.
fn density_plot(t: &Table, buf: &mut String, title: &str) -> Result<(), CliError> {
    let (l, w, c, lc) = (t.numbers("big_lambda"), t.numbers("w"), t.numbers("half_c"), t.numbers("lambda_c"));
    let uniq = |v: &[Option<f64>]| {
        let mut u: Vec<f64> = v.iter().flatten().copied().collect();
        u.sort_by(f64::total_cmp);
        u.dedup();
        u
    };
    let (ls, ws) = (uniq(&l), uniq(&w));
    let step = |u: &[f64]| if u.len() > 1 { u[1] - u[0] } else { 1.0 };
    let (dl, dw) = (step(&ls), step(&ws));
    let (cmax, cmin) = c.iter().flatten().fold((f64::NEG_INFINITY, f64::INFINITY), |(a, b), v| (a.max(*v), b.min(*v)));
    let span = if cmax > cmin { cmax - cmin } else { 1.0 };
    let root = SVGBackend::with_string(buf, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let (lx0, lx1) = (ls[0] - dl / 2.0, ls[ls.len() - 1] + dl / 2.0);
    let (wy0, wy1) = (ws[0] - dw / 2.0, ws[ws.len() - 1] + dw / 2.0);
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(60)
        .build_cartesian_2d(lx0..lx1, wy0..wy1)
        .map_err(draw_err)?;
    chart.configure_mesh().disable_mesh().x_desc("Λ").y_desc("W").draw().map_err(draw_err)?;
    let cells = (0..t.rows.len()).filter_map(|i| {
        let (x, y, v) = (l[i]?, w[i]?, c[i]?);
        let color = heat((v - cmin) / span);
        Some(Rectangle::new([(x - dl / 2.0, y - dw / 2.0), (x + dl / 2.0, y + dw / 2.0)], color.filled()))
    });
    chart.draw_series(cells).map_err(draw_err)?;
    let mut line: Vec<(f64, f64)> = (0..t.rows.len()).filter_map(|i| Some((lc[i]?, w[i]?))).filter(|p| p.0 >= lx0 && p.0 <= lx1).collect();
    line.sort_by(|a, b| a.1.total_cmp(&b.1));
    line.dedup();
    chart.draw_series(DashedLineSeries::new(line, 10, 6, WHITE.stroke_width(2))).map_err(draw_err)?;
    root.present().map_err(draw_err)
}

/// Render `csv` to an SVG named after its stem; returns the file name and the document.
pub fn render_file(csv: &Path) -> Result<(String, String), CliError> {
    let text = std::fs::read_to_string(csv).map_err(|e| CliError::Io(format!("{}: {e}", csv.display())))?;
    let source = csv.display().to_string();
    let t = Table::parse(&text, &source)?;
    let kind = kind_of(&t.header).ok_or_else(|| CliError::BadArgs(format!("{source}: unrecognized header '{}'", t.header.join(","))))?;
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("plot").to_string();
    let mut buf = String::new();
    match kind {
        Kind::Series => series_plot(&t, &mut buf, &stem)?,
        Kind::Sweep => sweep_plot(&t, &mut buf, &stem)?,
        Kind::Density => density_plot(&t, &mut buf, &stem)?,
        Kind::Levels => levels_plot(&t, &mut buf, &stem)?,
        Kind::Spectrum => spectrum_plot(&t, &mut buf, &stem)?,
        Kind::Grouped => grouped_plot(&t, &mut buf, &stem)?,
        Kind::Columns => columns_plot(&t, &mut buf, &stem)?,
    }
    Ok((format!("{stem}.svg"), buf))
}
