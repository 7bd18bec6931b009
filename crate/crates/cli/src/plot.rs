//! Static log-log SVG plots with a fitted slope annotation.

use std::fmt::Write as _;
use std::path::Path;

use disperse_lab::dispersive::decay_fit;

use crate::CliError;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;

/// Slope label with a typographic minus, two decimals.
pub fn slope_label(slope: f64) -> String {
    let s = format!("{slope:.2}");
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().any(|c| c != '0' && c != '.') => format!("\u{2212}{rest}"),
        Some(rest) => rest.to_string(),
        None => s,
    }
}

/// SVG text for `(x, y)` points on log-log axes. With at least five
/// points the least-squares slope is drawn and labelled.
pub fn render(title: &str, xs: &[f64], ys: &[f64]) -> Result<String, CliError> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(CliError::Usage("plot needs a nonempty series of matching lengths".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(CliError::Usage("log-log plot needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.log10()).collect();
    let span = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = span(&lx);
    let (y0, y1) = span(&ly);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = writeln!(s, r#"<text x="{}" y="30" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    for (label, x, y, anchor) in [
        (format!("{:.2e}", 10f64.powf(x0)), px(x0), H - MARGIN + 18.0, "start"),
        (format!("{:.2e}", 10f64.powf(x1)), px(x1), H - MARGIN + 18.0, "end"),
        (format!("{:.2e}", 10f64.powf(y0)), MARGIN - 6.0, py(y0), "end"),
        (format!("{:.2e}", 10f64.powf(y1)), MARGIN - 6.0, py(y1) + 10.0, "end"),
    ] {
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{label}</text>"#);
    }
    for (&x, &y) in lx.iter().zip(&ly) {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, px(x), py(y));
    }
    if xs.len() >= 5 {
        let fit = decay_fit(xs, ys).map_err(CliError::from)?;
        let my = ly.iter().sum::<f64>() / ly.len() as f64;
        let mx = lx.iter().sum::<f64>() / lx.len() as f64;
        let at = |x: f64| my + fit.slope * (x - mx);
        let (a, b) = (lx[0], lx[lx.len() - 1]);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
            px(a),
            py(at(a)),
            px(b),
            py(at(b))
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" fill="firebrick">slope {}</text>"#,
            W - MARGIN - 110.0,
            MARGIN + 22.0,
            slope_label(fit.slope)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(title: &str, xs: &[f64], ys: &[f64], path: &Path) -> Result<(), CliError> {
    let svg = render(title, xs, ys)?;
    std::fs::write(path, svg).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
