use std::f64::consts::TAU;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::SurfaceError;

const HEADER: [&str; 3] = ["theta_rad", "phi_rad", "height_nm"];

/// Radial height error sampled on a (θ, φ) node grid. NaN heights mark
/// masked nodes (holes or missing data).
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMap {
    theta: Vec<f64>,
    phi: Vec<f64>,
    /// Row-major in θ then φ.
    heights_nm: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceStats {
    pub rms_nm: f64,
    pub pv_nm: f64,
    pub n_valid: usize,
}

impl SurfaceMap {
    pub fn new(theta: Vec<f64>, phi: Vec<f64>, heights_nm: Vec<f64>) -> Result<Self, SurfaceError> {
        if theta.len() < 2 || phi.len() < 4 {
            return Err(SurfaceError::Grid(format!(
                "need at least 2 polar and 4 azimuthal nodes, got {}x{}",
                theta.len(),
                phi.len()
            )));
        }
        if heights_nm.len() != theta.len() * phi.len() {
            return Err(SurfaceError::Grid(format!(
                "{} heights for a {}x{} grid",
                heights_nm.len(),
                theta.len(),
                phi.len()
            )));
        }
        if theta[0] < 0.0 || theta.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SurfaceError::Grid("polar angles must start at >= 0 and increase strictly".into()));
        }
        if phi[0] < 0.0 || phi[phi.len() - 1] >= TAU || phi.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SurfaceError::Grid("azimuths must increase strictly within [0, 2pi)".into()));
        }
        Ok(Self { theta, phi, heights_nm })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn heights_nm(&self) -> &[f64] {
        &self.heights_nm
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.theta.len(), self.phi.len())
    }

    pub fn theta_max(&self) -> f64 {
        self.theta[self.theta.len() - 1]
    }

    pub fn height(&self, i: usize, j: usize) -> Option<f64> {
        let h = self.heights_nm[i * self.phi.len() + j];
        (!h.is_nan()).then_some(h)
    }

    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.height(i, j).is_some()
    }

    /// Same grid with new heights.
    pub fn with_heights(&self, heights_nm: Vec<f64>) -> Result<Self, SurfaceError> {
        Self::new(self.theta.clone(), self.phi.clone(), heights_nm)
    }

    /// Mask every node for which `masked(theta, phi)` is true.
    pub fn mask_where(&mut self, mut masked: impl FnMut(f64, f64) -> bool) {
        let np = self.phi.len();
        for (i, &t) in self.theta.iter().enumerate() {
            for (j, &p) in self.phi.iter().enumerate() {
                if masked(t, p) {
                    self.heights_nm[i * np + j] = f64::NAN;
                }
            }
        }
    }

    /// Bilinear interpolation, periodic in φ. `None` outside the polar
    /// range or when any surrounding node is masked.
    pub fn sample(&self, theta: f64, phi: f64) -> Option<f64> {
        let nt = self.theta.len();
        if theta < self.theta[0] || theta > self.theta[nt - 1] {
            return None;
        }
        let i = match self.theta.partition_point(|&t| t <= theta) {
            0 => 0,
            k if k >= nt => nt - 2,
            k => k - 1,
        };
        let ft = (theta - self.theta[i]) / (self.theta[i + 1] - self.theta[i]);

        let np = self.phi.len();
        let p0 = self.phi[0];
        let p = p0 + (phi - p0).rem_euclid(TAU);
        let j = self.phi.partition_point(|&v| v <= p).saturating_sub(1);
        let (j1, span) = if j + 1 < np {
            (j + 1, self.phi[j + 1] - self.phi[j])
        } else {
            (0, p0 + TAU - self.phi[np - 1])
        };
        let fp = (p - self.phi[j]) / span;

        let h00 = self.height(i, j)?;
        let h01 = self.height(i, j1)?;
        let h10 = self.height(i + 1, j)?;
        let h11 = self.height(i + 1, j1)?;
        Some((1.0 - ft) * ((1.0 - fp) * h00 + fp * h01) + ft * ((1.0 - fp) * h10 + fp * h11))
    }

    /// Quadrature weights sinθ·dθ·dφ per node (trapezoid in θ, periodic in φ).
    pub fn area_weights(&self) -> Vec<f64> {
        let nt = self.theta.len();
        let np = self.phi.len();
        let dtheta: Vec<f64> = (0..nt)
            .map(|i| {
                let lo = if i == 0 { self.theta[0] } else { self.theta[i - 1] };
                let hi = if i + 1 == nt { self.theta[nt - 1] } else { self.theta[i + 1] };
                0.5 * (hi - lo)
            })
            .collect();
        let dphi: Vec<f64> = (0..np)
            .map(|j| {
                let prev = if j == 0 { self.phi[np - 1] - TAU } else { self.phi[j - 1] };
                let next = if j + 1 == np { self.phi[0] + TAU } else { self.phi[j + 1] };
                0.5 * (next - prev)
            })
            .collect();
        let mut w = Vec::with_capacity(nt * np);
        for i in 0..nt {
            for dp in &dphi {
                w.push(self.theta[i].sin() * dtheta[i] * dp);
            }
        }
        w
    }
}

/// Area-weighted statistics about the weighted mean. Nodes at the pole
/// carry zero area; if every valid node does, plain averaging is used.
pub fn surface_stats(map: &SurfaceMap) -> Result<SurfaceStats, SurfaceError> {
    let mut weights = map.area_weights();
    let valid: Vec<usize> = (0..map.heights_nm.len())
        .filter(|&k| !map.heights_nm[k].is_nan())
        .collect();
    if valid.is_empty() {
        return Err(SurfaceError::EmptyMap);
    }
    if valid.iter().all(|&k| weights[k] == 0.0) {
        weights.iter_mut().for_each(|w| *w = 1.0);
    }
    let total: f64 = valid.iter().map(|&k| weights[k]).sum();
    let mean = valid.iter().map(|&k| weights[k] * map.heights_nm[k]).sum::<f64>() / total;
    let var = valid
        .iter()
        .map(|&k| weights[k] * (map.heights_nm[k] - mean).powi(2))
        .sum::<f64>()
        / total;
    let (lo, hi) = valid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| {
        let h = map.heights_nm[k];
        (lo.min(h), hi.max(h))
    });
    Ok(SurfaceStats { rms_nm: var.sqrt(), pv_nm: hi - lo, n_valid: valid.len() })
}

pub fn load_surface_map(path: &Path) -> Result<SurfaceMap, SurfaceError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() != 3 || headers.iter().zip(HEADER).any(|(h, e)| h.trim() != e) {
        return Err(SurfaceError::Format {
            line: 1,
            message: format!("expected header `{}`", HEADER.join(",")),
        });
    }

    let mut rows: Vec<(usize, [f64; 3])> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 3 {
            return Err(SurfaceError::Format { line, message: format!("expected 3 fields, got {}", record.len()) });
        }
        let mut vals = [0.0f64; 3];
        for (v, field) in vals.iter_mut().zip(record.iter()) {
            *v = field.trim().parse().map_err(|_| SurfaceError::Format {
                line,
                message: format!("cannot parse `{field}` as a number"),
            })?;
        }
        if vals[0].is_nan() || vals[1].is_nan() {
            return Err(SurfaceError::Format { line, message: "angles must be finite".into() });
        }
        rows.push((line, vals));
    }
    if rows.is_empty() {
        return Err(SurfaceError::Format { line: 2, message: "no data rows".into() });
    }

    let first_theta = rows[0].1[0];
    let n_phi = rows.iter().take_while(|r| r.1[0] == first_theta).count();
    if rows.len() % n_phi != 0 {
        let line = rows.last().map(|r| r.0).unwrap_or(0);
        return Err(SurfaceError::Format {
            line,
            message: format!("{} rows is not a multiple of {} azimuths", rows.len(), n_phi),
        });
    }
    let n_theta = rows.len() / n_phi;
    let phi: Vec<f64> = rows[..n_phi].iter().map(|r| r.1[1]).collect();
    for j in 1..n_phi {
        if phi[j] <= phi[j - 1] {
            return Err(SurfaceError::Format { line: rows[j].0, message: "azimuth not strictly increasing".into() });
        }
    }
    let mut theta = Vec::with_capacity(n_theta);
    for i in 0..n_theta {
        let block = &rows[i * n_phi..(i + 1) * n_phi];
        let t = block[0].1[0];
        if i > 0 && t <= theta[i - 1] {
            return Err(SurfaceError::Format { line: block[0].0, message: "polar angle not strictly increasing".into() });
        }
        for (j, (line, v)) in block.iter().enumerate() {
            if v[0] != t {
                return Err(SurfaceError::Format { line: *line, message: "polar angle changes inside an azimuth row".into() });
            }
            if v[1] != phi[j] {
                return Err(SurfaceError::Format { line: *line, message: "azimuth does not match the first row".into() });
            }
        }
        theta.push(t);
    }
    let heights = rows.iter().map(|r| r.1[2]).collect();
    SurfaceMap::new(theta, phi, heights).map_err(|e| SurfaceError::Format { line: 2, message: e.to_string() })
}

pub fn write_surface_map(map: &SurfaceMap, path: &Path) -> Result<(), SurfaceError> {
    let mut out = String::with_capacity(map.heights_nm.len() * 40);
    out.push_str(&HEADER.join(","));
    out.push('\n');
    let np = map.phi.len();
    for (i, t) in map.theta.iter().enumerate() {
        for (j, p) in map.phi.iter().enumerate() {
            out.push_str(&format!("{t},{p},{}\n", map.heights_nm[i * np + j]));
        }
    }
    let mut f = File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}
