//! Flat-file formats: curve files (JSON), trajectory frames (JSON lines),
//! diagnostics (CSV), and per-sample gradient fields (CSV).
//!
//! Floats in the CSV outputs are printed with full round-trip precision in a
//! fixed format so identical runs produce byte-identical files.

use anyhow::Context;
use knotflow::vec3::V3;
use knotflow::{ClosedCurve, DiagnosticsRecord, Frame};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Curve file: `{ "d": 2, "n": 64, "points": [[x, y], ...] }`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub d: usize,
    pub n: usize,
    pub points: Vec<Vec<f64>>,
}

impl CurveFile {
    pub fn from_curve(curve: &ClosedCurve<f64>) -> Self {
        CurveFile {
            d: curve.dim(),
            n: curve.n(),
            points: curve
                .points()
                .iter()
                .map(|p| p[..curve.dim()].to_vec())
                .collect(),
        }
    }

    pub fn into_curve(self) -> anyhow::Result<ClosedCurve<f64>> {
        if self.points.len() != self.n {
            anyhow::bail!("curve file declares n = {} but has {} points", self.n, self.points.len());
        }
        let mut pts = Vec::with_capacity(self.n);
        for (i, p) in self.points.iter().enumerate() {
            if p.len() != self.d {
                anyhow::bail!("point {i} has {} coordinates, expected d = {}", p.len(), self.d);
            }
            let mut v = [0.0f64; 3];
            v[..self.d].copy_from_slice(p);
            pts.push(v);
        }
        Ok(ClosedCurve::new(pts, self.d)?)
    }
}

pub fn read_curve_file(path: &std::path::Path) -> anyhow::Result<ClosedCurve<f64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading curve file {}", path.display()))?;
    let file: CurveFile = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("parsing curve file (line {}): {e}", e.line()))?;
    file.into_curve()
}

pub fn write_curve_file(path: &std::path::Path, curve: &ClosedCurve<f64>) -> anyhow::Result<()> {
    let file = CurveFile::from_curve(curve);
    std::fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameRecord<'a> {
    run_id: &'a str,
    frame: usize,
    step: usize,
    t: f64,
    residual: f64,
    n: usize,
    d: usize,
    points: Vec<Vec<f64>>,
}

pub fn write_frames(
    path: &std::path::Path,
    run_id: &str,
    dim: usize,
    frames: &[Frame<f64>],
) -> anyhow::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (idx, f) in frames.iter().enumerate() {
        let rec = FrameRecord {
            run_id,
            frame: idx,
            step: f.step,
            t: f.t,
            residual: f.residual,
            n: f.points.len(),
            d: dim,
            points: f.points.iter().map(|p| p[..dim].to_vec()).collect(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub const DIAGNOSTICS_COLUMNS: &str =
    "step,t,dt,e_alpha,length,e_total,residual,e0,e1,e2,coercivity_ratio,bilipschitz,dissipation_residual,min_speed";

pub fn write_diagnostics(
    path: &std::path::Path,
    run_id: &str,
    records: &[DiagnosticsRecord<f64>],
) -> anyhow::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# run_id={run_id}")?;
    writeln!(out, "{DIAGNOSTICS_COLUMNS}")?;
    for r in records {
        writeln!(
            out,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.step,
            r.t,
            r.dt,
            r.e_alpha,
            r.length,
            r.e_total,
            r.residual,
            r.e0,
            r.e1,
            r.e2,
            r.coercivity_ratio,
            r.bilipschitz,
            r.dissipation_residual,
            r.min_speed
        )?;
    }
    Ok(())
}

/// Per-sample gradient/velocity table with the sample positions.
pub fn write_gradient_csv(
    path: &std::path::Path,
    curve: &ClosedCurve<f64>,
    gradient: &[V3<f64>],
    velocity: &[V3<f64>],
) -> anyhow::Result<()> {
    let d = curve.dim();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let coords = ["x", "y", "z"];
    let mut header = String::from("index,param");
    for c in 0..d {
        header.push_str(&format!(",p{}", coords[c]));
    }
    for c in 0..d {
        header.push_str(&format!(",h{}", coords[c]));
    }
    for c in 0..d {
        header.push_str(&format!(",v{}", coords[c]));
    }
    writeln!(out, "{header}")?;
    let n = curve.n();
    for i in 0..n {
        let mut line = format!("{i},{:.17e}", i as f64 / n as f64);
        for c in 0..d {
            line.push_str(&format!(",{:.17e}", curve.points()[i][c]));
        }
        for c in 0..d {
            line.push_str(&format!(",{:.17e}", gradient[i][c]));
        }
        for c in 0..d {
            line.push_str(&format!(",{:.17e}", velocity[i][c]));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Read a gradient CSV back into (points, gradient, velocity).
pub fn read_gradient_csv(
    path: &std::path::Path,
) -> anyhow::Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().context("empty gradient file")?;
    let cols: Vec<&str> = header.split(',').collect();
    let d = cols.iter().filter(|c| c.starts_with('p') && c.len() == 2).count();
    let mut pts = Vec::new();
    let mut grad = Vec::new();
    let mut vel = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<Result<_, _>>()
            .context("parsing gradient CSV row")?;
        pts.push(vals[2..2 + d].to_vec());
        grad.push(vals[2 + d..2 + 2 * d].to_vec());
        vel.push(vals[2 + 2 * d..2 + 3 * d].to_vec());
    }
    Ok((pts, grad, vel))
}
