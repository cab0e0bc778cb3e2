//! Bit-exact output formats: diagnostics CSV, JSON state snapshots, and
//! deterministic SVG plots.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DecayFit, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::evolution::FilmState;
use crate::grid::Grid;

pub const CSV_HEADER: &str = "t,mass,energy,dissipation,lambda,min_h,newton_iters,dt";

/// Write the diagnostics stream; floats as shortest round-trip decimals.
pub fn write_diag<W: Write>(mut w: W, records: &[DiagnosticsRecord<f64>]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.t, r.mass, r.energy, r.dissipation, r.lambda, r.min_h, r.newton_iters, r.dt
        )?;
    }
    Ok(())
}

pub fn write_diag_file(path: &Path, records: &[DiagnosticsRecord<f64>]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_diag(std::io::BufWriter::new(f), records)
}

/// Serialized solver state: grid metadata plus heights and the contact point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub h: Vec<f64>,
    pub lambda: f64,
    pub t: f64,
}

impl Snapshot {
    pub fn capture(state: &FilmState<f64>, grid: &Grid<f64>) -> Self {
        Snapshot {
            n: grid.n,
            a: grid.a,
            b: grid.b,
            h: state.h.clone(),
            lambda: state.lambda,
            t: state.t,
        }
    }

    pub fn restore(&self) -> Result<(FilmState<f64>, Grid<f64>)> {
        if self.h.len() != self.n {
            return Err(Error::Parse(format!(
                "snapshot has {} heights but n = {}",
                self.h.len(),
                self.n
            )));
        }
        let grid = Grid::new(self.n, self.a, self.b)?;
        Ok((
            FilmState {
                h: self.h.clone(),
                lambda: self.lambda,
                t: self.t,
            },
            grid,
        ))
    }
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<()> {
    let text = serde_json::to_string_pretty(snap).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

const W: f64 = 800.0;
const H: f64 = 500.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn axis_range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }
    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn svg_open(title: &str, xlabel: &str, ylabel: &str, f: &Frame) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    ));
    // axes
    s.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        r = W - MARGIN,
        t = MARGIN,
        b = H - MARGIN
    ));
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{xlabel}</text>\n",
        W / 2.0,
        H - 16.0
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{ylabel}</text>\n",
        H / 2.0,
        H / 2.0
    ));
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let xv = f.x0 + frac * (f.x1 - f.x0);
        let yv = f.y0 + frac * (f.y1 - f.y0);
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\">{:.4}</text>\n",
            f.px(xv),
            H - MARGIN + 16.0,
            xv
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\">{:.4}</text>\n",
            MARGIN - 6.0,
            f.py(yv) + 3.0,
            yv
        ));
    }
    s
}

fn polyline(points: &[(f64, f64)], f: &Frame, color: &str) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        coords.join(" ")
    )
}

/// Overlay of film profiles h(x), one polyline per labeled snapshot.
pub fn render_profiles(path: &Path, curves: &[(String, Vec<(f64, f64)>)]) -> Result<()> {
    let fx = axis_range(curves.iter().flat_map(|(_, c)| c.iter().map(|p| p.0)));
    let fy = axis_range(curves.iter().flat_map(|(_, c)| c.iter().map(|p| p.1)));
    let frame = Frame {
        x0: fx.0,
        x1: fx.1,
        y0: fy.0,
        y1: fy.1,
    };
    let mut s = svg_open("film profiles", "x", "h", &frame);
    for (i, (label, curve)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        s.push_str(&polyline(curve, &frame, color));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"{color}\">{label}</text>\n",
            W - MARGIN - 120.0,
            MARGIN + 16.0 * (i as f64 + 1.0)
        ));
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s)?;
    Ok(())
}

/// Log-energy trace with the fitted exponential overlaid.
pub fn render_energy(
    path: &Path,
    series: &[(f64, f64)],
    fit: Option<&DecayFit<f64>>,
) -> Result<()> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(_, e)| e > 0.0)
        .map(|&(t, e)| (t, e.log10()))
        .collect();
    if pts.is_empty() {
        return Err(Error::NonPositiveSeries);
    }
    let fx = axis_range(pts.iter().map(|p| p.0));
    let fy = axis_range(pts.iter().map(|p| p.1));
    let frame = Frame {
        x0: fx.0,
        x1: fx.1,
        y0: fy.0,
        y1: fy.1,
    };
    let mut s = svg_open("energy decay", "t", "log10 E", &frame);
    s.push_str(&polyline(&pts, &frame, PALETTE[0]));
    if let Some(f) = fit {
        let line: Vec<(f64, f64)> = [frame.x0, frame.x1]
            .iter()
            .map(|&t| (t, (f.prefactor.ln() - f.omega * t) / std::f64::consts::LN_10))
            .collect();
        s.push_str(&polyline(&line, &frame, PALETTE[1]));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"{}\">omega = {:.6}, r2 = {:.4}</text>\n",
            MARGIN + 10.0,
            MARGIN + 16.0,
            PALETTE[1],
            f.omega,
            f.r_squared
        ));
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64) -> DiagnosticsRecord<f64> {
        DiagnosticsRecord {
            t,
            mass: 2.0,
            energy: 0.005,
            dissipation: 1e-9,
            lambda: 0.5,
            min_h: 0.9,
            newton_iters: 2,
            dt: 1e-4,
        }
    }

    #[test]
    fn csv_shape_and_roundtrip_floats() {
        let recs: Vec<_> = (0..10).map(|i| record(i as f64 * 1e-4)).collect();
        let mut buf = Vec::new();
        write_diag(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.trim_end().lines().collect();
        assert_eq!(lines.len(), 11);
        assert_eq!(lines[0], CSV_HEADER);
        let fields: Vec<&str> = lines[3].split(',').collect();
        assert_eq!(fields.len(), 8);
        // shortest round-trip: parse back exactly
        assert_eq!(fields[0].parse::<f64>().unwrap(), 2e-4);
        assert_eq!(fields[7].parse::<f64>().unwrap(), 1e-4);
    }

    #[test]
    fn snapshot_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("snap.json");
        let grid = Grid::new(11, 0.5, 2.0).unwrap();
        let state = FilmState::sample(&grid, 0.5, 0.1, |x| 1.0 + 0.1 * x);
        let snap = Snapshot::capture(&state, &grid);
        write_snapshot(&p, &snap).unwrap();
        let back = read_snapshot(&p).unwrap();
        assert_eq!(snap, back);
        let (state2, grid2) = back.restore().unwrap();
        assert_eq!(state2, state);
        assert_eq!(grid2, grid);
    }

    #[test]
    fn svg_outputs_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.svg");
        let p2 = dir.path().join("b.svg");
        let curve = vec![(
            "t=0".to_string(),
            (0..50).map(|i| (i as f64 * 0.1, (i as f64 * 0.3).sin())).collect(),
        )];
        render_profiles(&p1, &curve).unwrap();
        render_profiles(&p2, &curve).unwrap();
        assert_eq!(
            std::fs::read(&p1).unwrap(),
            std::fs::read(&p2).unwrap()
        );
        let series: Vec<(f64, f64)> = (0..30).map(|i| (i as f64, 3.0 * (-0.5 * i as f64).exp())).collect();
        let fit = crate::diagnostics::fit_decay(&series).unwrap();
        let p3 = dir.path().join("e.svg");
        render_energy(&p3, &series, Some(&fit)).unwrap();
        let text = std::fs::read_to_string(&p3).unwrap();
        assert!(text.contains("omega"));
    }
}
