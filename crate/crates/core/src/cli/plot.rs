//! Minimal SVG line plots of CSV columns.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::regression::rates::ols;

/// Reads the named columns, skipping rows where either cell is empty.
pub fn read_columns(csv: &str, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = csv.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let Some((_, header)) = lines.next() else {
        return Err(Error::InvalidArgument("CSV is empty".into()));
    };
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::InvalidArgument(format!("column '{name}' not in header {cols:?}")))
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let mut out = Vec::new();
    for (i, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |j: usize| cells.get(j).copied().unwrap_or("");
        let (sx, sy) = (get(ix), get(iy));
        if sx.is_empty() || sy.is_empty() {
            continue;
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse { line: i + 1, msg: format!("not a number: '{s}'") })
        };
        out.push((parse(sx)?, parse(sy)?));
    }
    Ok(out)
}

const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 48.0;

pub fn render_svg(points: &[(f64, f64)], x: &str, y: &str, loglog: bool) -> Result<String> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!("plot needs at least 2 points, got {}", points.len())));
    }
    if loglog && points.iter().any(|&(a, b)| !(a > 0.0) || !(b > 0.0)) {
        return Err(Error::InvalidArgument("log-log plot needs positive values".into()));
    }
    if points.iter().any(|&(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(Error::InvalidArgument("plot values must be finite".into()));
    }
    let tr: Vec<(f64, f64)> = if loglog {
        points.iter().map(|&(a, b)| (a.log10(), b.log10())).collect()
    } else {
        points.to_vec()
    };
    let (xs, ys): (Vec<f64>, Vec<f64>) = tr.iter().copied().unzip();
    let slope = ols(&xs, &ys).slope;
    let span = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = span(&xs);
    let (y0, y1) = span(&ys);
    let px = |v: f64| PAD + (v - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |v: f64| H - PAD - (v - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (l, r, t, b) = (PAD, W - PAD, PAD, H - PAD);
    let _ = writeln!(s, r#"<polyline points="{l},{t} {l},{b} {r},{b}" fill="none" stroke="black"/>"#);
    let pts: Vec<String> = tr.iter().map(|&(a, c)| format!("{:.2},{:.2}", px(a), py(c))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, pts.join(" "));
    let scale = if loglog { "log10 " } else { "" };
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{scale}{x}</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">{scale}{y}</text>"#,
        H / 2.0,
        H / 2.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">slope {slope:.2}</text>"#, r, t - 12.0);
    for (v, label) in [(x0, x0), (x1, x1)] {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" font-size="10" text-anchor="middle">{label:.3}</text>"#, px(v), b + 14.0);
    }
    for (v, label) in [(y0, y0), (y1, y1)] {
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" font-size="10" text-anchor="end">{label:.3}</text>"#, l - 4.0, py(v) + 3.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_annotation() {
        let svg = render_svg(&[(1.0, 1.0), (10.0, 0.1)], "n", "err", true).unwrap();
        assert!(svg.contains("slope -1.00"), "{svg}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_columns("", "a", "b").is_err());
        assert!(read_columns("a,b\n", "a", "c").is_err());
        let pts = read_columns("a,b\n1,0\n2,1\n", "a", "b").unwrap();
        assert!(render_svg(&pts, "a", "b", true).is_err());
        assert!(render_svg(&pts, "a", "b", false).is_ok());
        assert!(render_svg(&pts[..1], "a", "b", false).is_err());
    }

    #[test]
    fn skips_empty_cells() {
        let pts = read_columns("m,s\n4,\n8,-1.0\n", "m", "s").unwrap();
        assert_eq!(pts, vec![(8.0, -1.0)]);
    }
}
