use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::{curve_file, CurvePoint, Scenario};

pub const CURVES_CSV_FILE: &str = "curves.csv";
pub const CURVES_SVG_FILE: &str = "curves.svg";

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_Y: f64 = 40.0;

fn color(s: Scenario) -> &'static str {
    match s {
        Scenario::None => "#7f7f7f",
        Scenario::CameraOnly => "#1f77b4",
        Scenario::RisOnly => "#ff7f0e",
        Scenario::Both => "#2ca02c",
    }
}

fn parse_curve(text: &str, path: &Path) -> Result<Vec<CurvePoint>> {
    let bad = |line: usize, why: &str| Error::Format {
        path: path.to_path_buf(),
        reason: format!("line {line}: {why}"),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "iteration,accuracy")) => {}
        _ => return Err(bad(1, "expected header iteration,accuracy")),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let (it, acc) = l.split_once(',').ok_or_else(|| bad(i + 1, "expected two columns"))?;
            Ok(CurvePoint {
                iteration: it.parse().map_err(|_| bad(i + 1, "bad iteration"))?,
                accuracy: acc.parse().map_err(|_| bad(i + 1, "bad accuracy"))?,
            })
        })
        .collect()
}

/// Reads `curve_<scenario>.csv` for all four scenarios from `dir`.
pub fn read_curves(dir: &Path) -> Result<Vec<(Scenario, Vec<CurvePoint>)>> {
    Scenario::ALL
        .iter()
        .map(|&s| {
            let path = dir.join(curve_file(s));
            if !path.exists() {
                return Err(Error::Missing(path));
            }
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            Ok((s, parse_curve(&text, &path)?))
        })
        .collect()
}

/// Long format: `scenario,iteration,accuracy`.
pub fn curves_csv(curves: &[(Scenario, Vec<CurvePoint>)]) -> String {
    let mut out = String::from("scenario,iteration,accuracy\n");
    for (s, pts) in curves {
        for p in pts {
            let _ = writeln!(out, "{},{},{}", s.name(), p.iteration, p.accuracy);
        }
    }
    out
}

/// Accuracy against iteration, one `<polyline>` per scenario, y fixed to
/// `[0, 1]`.
pub fn curves_svg(curves: &[(Scenario, Vec<CurvePoint>)]) -> String {
    let x_max = curves
        .iter()
        .flat_map(|(_, p)| p.iter().map(|q| q.iteration))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let px = |it: usize| MARGIN_LEFT + it as f64 / x_max * plot_w;
    let py = |acc: f64| MARGIN_Y + (1.0 - acc.clamp(0.0, 1.0)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, y0, x1, y1) = (MARGIN_LEFT, MARGIN_Y, MARGIN_LEFT + plot_w, MARGIN_Y + plot_h);
    let _ = writeln!(
        s,
        r#"<path d="M{x0},{y0} L{x0},{y1} L{x1},{y1}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let acc = k as f64 / 5.0;
        let y = py(acc);
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{y:.1}" x2="{x1}" y2="{y:.1}" stroke="#dddddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{acc:.1}</text>"##,
            x0 - 6.0,
            y + 4.0
        );
    }
    for k in 0..=4 {
        let it = (x_max * k as f64 / 4.0).round() as usize;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{it}</text>"#,
            px(it),
            y1 + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">iteration</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 6.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">accuracy</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    for (i, (sc, pts)) in curves.iter().enumerate() {
        let points: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", px(p.iteration), py(p.accuracy)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-scenario="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            sc.name(),
            color(*sc),
            points.join(" ")
        );
        let ly = y0 + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="3"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            x1 + 12.0,
            x1 + 32.0,
            color(*sc),
            x1 + 38.0,
            ly + 4.0,
            sc.name()
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Reads the four curves from `dir` and writes the merged CSV and SVG there.
pub fn write_curves(dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let curves = read_curves(dir)?;
    let csv = dir.join(CURVES_CSV_FILE);
    let svg = dir.join(CURVES_SVG_FILE);
    std::fs::write(&csv, curves_csv(&curves)).map_err(|e| Error::io(&csv, e))?;
    std::fs::write(&svg, curves_svg(&curves)).map_err(|e| Error::io(&svg, e))?;
    Ok((csv, svg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curves() -> Vec<(Scenario, Vec<CurvePoint>)> {
        Scenario::ALL
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                let pts = (1..=5)
                    .map(|i| CurvePoint {
                        iteration: i,
                        accuracy: (k as f64 + i as f64) / 10.0,
                    })
                    .collect();
                (s, pts)
            })
            .collect()
    }

    #[test]
    fn svg_has_one_polyline_per_scenario() {
        let svg = curves_svg(&curves());
        assert_eq!(svg.matches("<polyline").count(), 4);
        for s in Scenario::ALL {
            assert!(svg.contains(&format!("data-scenario=\"{}\"", s.name())));
        }
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn csv_is_long_format() {
        let csv = curves_csv(&curves());
        assert_eq!(csv.lines().count(), 1 + 4 * 5);
        assert_eq!(csv.lines().nth(1), Some("none,1,0.1"));
    }

    #[test]
    fn curve_parsing() {
        let p = Path::new("c.csv");
        let pts = parse_curve("iteration,accuracy\n1,0.5\n2,1\n", p).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].accuracy, 1.0);
        assert!(parse_curve("it,acc\n1,0.5\n", p).is_err());
        assert!(parse_curve("iteration,accuracy\n1;0.5\n", p).is_err());
    }

    #[test]
    fn missing_curve_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(read_curves(dir.path()), Err(Error::Missing(_))));
    }
}
