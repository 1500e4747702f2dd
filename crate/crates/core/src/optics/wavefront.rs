use nalgebra::Vector3;
use rayon::prelude::*;

use super::trace::{trace_ray_detailed, Ray};
use super::{LensPrescription, OpticsError};

/// Optical path difference over the exit pupil, in waves.
///
/// Pupil coordinates are normalized so the unit circle maps to the emission
/// cone of the requested NA (pupil radius ∝ sin θ).
#[derive(Debug, Clone, PartialEq)]
pub struct WavefrontMap {
    pub n: usize,
    /// Pupil coordinate of each column (and row), in [-1, 1].
    pub coords: Vec<f64>,
    /// Row-major OPD in waves; NaN outside the pupil or for lost rays.
    pub opd: Vec<f64>,
    pub mask: Vec<bool>,
    pub rms: f64,
    pub pv: f64,
    pub strehl: f64,
}

impl WavefrontMap {
    /// Valid cells as (px, py, opd).
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.n * self.n).filter(|&k| self.mask[k]).map(|k| {
            let (i, j) = (k / self.n, k % self.n);
            (self.coords[j], self.coords[i], self.opd[k])
        })
    }
}

/// Trace an n×n pupil grid from an on-axis point at the working distance
/// and measure the emerging wavefront against a plane normal to the axis.
pub fn wavefront_map(lens: &LensPrescription, na: f64, n: usize, wavelength: f64) -> Result<WavefrontMap, OpticsError> {
    lens.validate()?;
    if n < 64 {
        return Err(OpticsError::Input(format!("pupil grid must be at least 64×64, got {n}")));
    }
    if !(na > 0.0 && na < 1.0) {
        return Err(OpticsError::Input(format!("NA must lie in (0, 1), got {na}")));
    }
    if !(wavelength > 0.0) {
        return Err(OpticsError::Input(format!("wavelength must be positive, got {wavelength}")));
    }
    let reference_plane = (lens.working_distance_mm + lens.center_thickness_mm + 1.0) * 1e-3;
    let path_to_plane = |ray: &Ray| -> Option<f64> {
        let (out, _) = trace_ray_detailed(lens, ray).ok()?;
        if !out.alive() || out.direction.z <= 0.0 {
            return None;
        }
        Some(out.opl + (reference_plane - out.origin.z) / out.direction.z)
    };
    let chief = path_to_plane(&Ray::new(Vector3::zeros(), Vector3::z()))
        .ok_or_else(|| OpticsError::Input("chief ray does not reach the reference plane".into()))?;

    let coords: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / n as f64).collect();
    let cells: Vec<Option<Option<f64>>> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (px, py) = (coords[k % n], coords[k / n]);
            let rho = px.hypot(py);
            if rho > 1.0 {
                return None;
            }
            let s = na * rho;
            let c = (1.0 - s * s).sqrt();
            let (sx, sy) = if rho > 0.0 { (s * px / rho, s * py / rho) } else { (0.0, 0.0) };
            Some(path_to_plane(&Ray::new(Vector3::zeros(), Vector3::new(sx, sy, c))).map(|p| (p - chief) / wavelength))
        })
        .collect();

    let total = cells.iter().filter(|c| c.is_some()).count();
    let dead = cells.iter().filter(|c| matches!(c, Some(None))).count();
    if dead * 10 > total {
        return Err(OpticsError::Vignetting { dead, total });
    }
    let mut opd: Vec<f64> = cells.iter().map(|c| c.flatten().unwrap_or(f64::NAN)).collect();
    let mask: Vec<bool> = opd.iter().map(|v| v.is_finite()).collect();
    let valid = (total - dead) as f64;
    let mean = opd.iter().filter(|v| v.is_finite()).sum::<f64>() / valid;
    let (mut lo, mut hi, mut sq) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for v in opd.iter_mut().filter(|v| v.is_finite()) {
        *v -= mean;
        lo = lo.min(*v);
        hi = hi.max(*v);
        sq += *v * *v;
    }
    let rms = (sq / valid).sqrt();
    let strehl = (-(std::f64::consts::TAU * rms).powi(2)).exp();
    Ok(WavefrontMap { n, coords, opd, mask, rms, pv: hi - lo, strehl })
}
