//! Static SVG rendering of trajectory CSVs: per-integral drift curves and
//! planar projections of the geodesic trace. No external plotting backend.

use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum PlotError {
    Malformed(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for PlotError {
    fn from(e: std::io::Error) -> Self {
        PlotError::Io(e)
    }
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn parse_csv(path: &Path) -> Result<Csv, PlotError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| PlotError::Malformed("empty CSV".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    if header.first().map(String::as_str) != Some("t") {
        return Err(PlotError::Malformed("first column must be t".into()));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let row: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| PlotError::Malformed(format!("row {}: {e}", lineno + 2)))?;
        if row.len() != header.len() {
            return Err(PlotError::Malformed(format!(
                "row {} has {} fields, header has {}",
                lineno + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(PlotError::Malformed("CSV contains no data rows".into()));
    }
    Ok(Csv { header, rows })
}

const W: f64 = 720.0;
const H: f64 = 420.0;
const MARGIN: f64 = 54.0;

struct Frame {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn span(points: impl Iterator<Item = (f64, f64)>) -> Frame {
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        // degenerate spans (single sample) get a unit window
        if xmax <= xmin {
            xmin -= 0.5;
            xmax += 0.5;
        }
        if ymax <= ymin {
            ymin -= 0.5;
            ymax += 0.5;
        }
        Frame {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let px = MARGIN + (x - self.xmin) / (self.xmax - self.xmin) * (W - 2.0 * MARGIN);
        let py = H - MARGIN - (y - self.ymin) / (self.ymax - self.ymin) * (H - 2.0 * MARGIN);
        (px, py)
    }
}

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn svg_document(title: &str, body: &str, frame: &Frame, xlabel: &str, ylabel: &str) -> String {
    let (x0, y0) = (MARGIN, H - MARGIN);
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\" font-family=\"monospace\" font-size=\"12\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tx}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
            "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n",
            "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n",
            "<text x=\"{tx}\" y=\"{xl}\" text-anchor=\"middle\">{xlabel}</text>\n",
            "<text x=\"16\" y=\"{ty}\" transform=\"rotate(-90 16 {ty})\" text-anchor=\"middle\">{ylabel}</text>\n",
            "<text x=\"{x0}\" y=\"{xt}\" text-anchor=\"middle\">{xmin:.3}</text>\n",
            "<text x=\"{x1}\" y=\"{xt}\" text-anchor=\"middle\">{xmax:.3}</text>\n",
            "<text x=\"{yl}\" y=\"{y0}\" text-anchor=\"end\">{ymin:.3}</text>\n",
            "<text x=\"{yl}\" y=\"{y1v}\" text-anchor=\"end\">{ymax:.3}</text>\n",
            "{body}\n</svg>\n"
        ),
        w = W,
        h = H,
        tx = W / 2.0,
        title = title,
        x0 = x0,
        y0 = y0,
        x1 = W - MARGIN,
        y1 = MARGIN,
        xl = H - 16.0,
        xlabel = xlabel,
        ty = H / 2.0,
        ylabel = ylabel,
        xt = H - MARGIN + 16.0,
        xmin = frame.xmin,
        xmax = frame.xmax,
        yl = MARGIN - 6.0,
        ymin = frame.ymin,
        y1v = MARGIN + 4.0,
        ymax = frame.ymax,
        body = body,
    )
}

fn polyline(points: &[(f64, f64)], frame: &Frame, color: &str) -> String {
    if points.len() == 1 {
        let (px, py) = frame.map(points[0].0, points[0].1);
        return format!("<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"{color}\"/>");
    }
    let coords: Vec<String> = points
        .iter()
        .map(|&(x, y)| {
            let (px, py) = frame.map(x, y);
            format!("{px:.2},{py:.2}")
        })
        .collect();
    format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>",
        coords.join(" ")
    )
}

/// Renders `<stem>_drift.svg` (log10 of per-integral relative drift) and
/// `<stem>_trace.svg` (q0-q1 projection of the trajectory).
pub fn render(csv_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, PlotError> {
    let csv = parse_csv(csv_path)?;
    std::fs::create_dir_all(out_dir)?;
    let stem = csv_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trajectory");

    // columns: t, q0..qn, v0..vn, H, F0..Fn, J  => 1 + 3(n+1) + 2 columns
    let cols = csv.header.len();
    let nc = (cols - 3) / 3;
    if cols != 3 * nc + 3 || nc < 2 {
        return Err(PlotError::Malformed(format!(
            "unexpected column count {cols}"
        )));
    }
    let integral_cols = 1 + 2 * nc..cols;

    // drift curves
    let mut body = String::new();
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for c in integral_cols {
        let base = csv.rows[0][c];
        let pts: Vec<(f64, f64)> = csv
            .rows
            .iter()
            .map(|row| {
                let drift = (row[c] - base).abs() / base.abs().max(1.0);
                (row[0], (drift.max(1e-18)).log10())
            })
            .collect();
        series.push((csv.header[c].clone(), pts));
    }
    let frame = Frame::span(series.iter().flat_map(|(_, pts)| pts.iter().copied()));
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        body.push_str(&polyline(pts, &frame, color));
        body.push('\n');
        body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{label}</text>\n",
            W - MARGIN + 4.0,
            MARGIN + 14.0 * i as f64 + 10.0
        ));
    }
    let drift_path = out_dir.join(format!("{stem}_drift.svg"));
    std::fs::write(
        &drift_path,
        svg_document(
            "relative integral drift (log10)",
            &body,
            &frame,
            "t",
            "log10 drift",
        ),
    )?;

    // trace: q0 vs q1
    let pts: Vec<(f64, f64)> = csv.rows.iter().map(|row| (row[1], row[2])).collect();
    let frame = Frame::span(pts.iter().copied());
    let body = polyline(&pts, &frame, COLORS[0]);
    let trace_path = out_dir.join(format!("{stem}_trace.svg"));
    std::fs::write(
        &trace_path,
        svg_document("trajectory projection", &body, &frame, "q0", "q1"),
    )?;

    Ok(vec![drift_path, trace_path])
}
