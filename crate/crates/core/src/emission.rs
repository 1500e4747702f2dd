//! Spontaneous emission of a dipole at the centre of curvature of a
//! spherical mirror.
//!
//! Every mirror direction `u` sends the dipole field back onto the emitter
//! with amplitude `r(u) · exp(2ikR(u))`. The back-action integral
//! `Z = ∫ 2·D(u) · r(u) · exp(2ikR(u)) dΩ` over the reflecting part of the
//! aperture sets the decay rate `Γ/Γ₀ = 1 − Re Z`; `Im Z` is the level-shift
//! quadrature. The sign convention makes `R = nλ/2` a node (full
//! inhibition for a perfect hemisphere).

use std::f64::consts::{PI, TAU};

use nalgebra::{Unit, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::constants::SPEED_OF_LIGHT;
use crate::quadrature::GaussLegendre;
use crate::surface_thermal::{effective_radius, MirrorSpec, SurfaceError};

#[derive(Debug, Error)]
pub enum EmissionError {
    #[error("{what} must be a unit vector (norm {norm})")]
    NotUnit { what: &'static str, norm: f64 },
    #[error("invalid emitter: {0}")]
    Emitter(String),
    #[error(transparent)]
    Mirror(#[from] SurfaceError),
    #[error("quadrature did not converge: estimate {estimate:.8}, error bound {bound:.2e}")]
    Accuracy { estimate: f64, bound: f64 },
}

const UNIT_TOLERANCE: f64 = 1e-12;

/// Two-level emitter with a linear transition dipole.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleEmitter {
    pub wavelength: f64,
    /// Free-space decay rate (1/s).
    pub decay_rate: f64,
    /// Dipole direction relative to the mirror axis (+z).
    pub orientation: Unit<Vector3<f64>>,
}

impl DipoleEmitter {
    pub fn new(wavelength: f64, decay_rate: f64, orientation: Vector3<f64>) -> Result<Self, EmissionError> {
        check_unit("dipole orientation", &orientation)?;
        if !(wavelength > 0.0) {
            return Err(EmissionError::Emitter(format!("wavelength must be positive, got {wavelength}")));
        }
        if !(decay_rate > 0.0) {
            return Err(EmissionError::Emitter(format!("decay rate must be positive, got {decay_rate}")));
        }
        Ok(Self { wavelength, decay_rate, orientation: Unit::new_unchecked(orientation) })
    }

    /// Dipole along x, perpendicular to the mirror axis.
    pub fn perpendicular(wavelength: f64, decay_rate: f64) -> Self {
        Self { wavelength, decay_rate, orientation: Vector3::x_axis() }
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }
}

fn check_unit(what: &'static str, v: &Vector3<f64>) -> Result<(), EmissionError> {
    let norm = v.norm();
    if (norm - 1.0).abs() > UNIT_TOLERANCE || !norm.is_finite() {
        return Err(EmissionError::NotUnit { what, norm });
    }
    Ok(())
}

/// Normalized linear-dipole power pattern (1/sr).
pub fn dipole_pattern(orientation: &Vector3<f64>, u: &Vector3<f64>) -> Result<f64, EmissionError> {
    check_unit("dipole orientation", orientation)?;
    check_unit("direction", u)?;
    Ok(pattern(orientation, u))
}

#[inline]
pub(crate) fn pattern(orientation: &Vector3<f64>, u: &Vector3<f64>) -> f64 {
    let c = orientation.dot(u);
    3.0 / (8.0 * PI) * (1.0 - c * c)
}

/// Radius offsets added to R(T) across the mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusProfile {
    Uniform { offset: f64 },
    /// Offset `inner` for polar angles below `angle`, `outer` beyond.
    Step { angle: f64, inner: f64, outer: f64 },
}

impl Default for RadiusProfile {
    fn default() -> Self {
        RadiusProfile::Uniform { offset: 0.0 }
    }
}

impl RadiusProfile {
    fn offset(&self, theta: f64) -> f64 {
        match *self {
            RadiusProfile::Uniform { offset } => offset,
            RadiusProfile::Step { angle, inner, outer } => {
                if theta < angle {
                    inner
                } else {
                    outer
                }
            }
        }
    }

    fn breakpoint(&self) -> Option<f64> {
        match *self {
            RadiusProfile::Step { angle, .. } if angle > 0.0 => Some(angle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Absolute tolerance on the complex back-action integral.
    pub tolerance: f64,
    pub max_level: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { tolerance: 1e-6, max_level: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionResult {
    /// Real part of the back-action integral.
    pub coherence: f64,
    /// Γ/Γ₀.
    pub rate_ratio: f64,
    /// Imaginary part of the back-action integral.
    pub level_shift: f64,
    /// Pattern-weighted (2·D) coverage of the reflecting aperture.
    pub mirror_fraction: f64,
    /// Pattern-weighted coverage removed by holes.
    pub hole_fraction: f64,
    pub error_estimate: f64,
}

impl EmissionResult {
    pub fn back_action(&self) -> Complex64 {
        Complex64::new(self.coherence, self.level_shift)
    }
}

/// Mirror, emitter and temperature bound together for pointwise queries.
#[derive(Debug, Clone)]
pub struct MirrorModel<'a> {
    pub mirror: &'a MirrorSpec,
    pub dipole: &'a DipoleEmitter,
    radius: f64,
    profile: RadiusProfile,
    cos_aperture: f64,
    hole_cos: Vec<(Vector3<f64>, f64)>,
    amplitude: f64,
}

impl<'a> MirrorModel<'a> {
    pub fn new(
        mirror: &'a MirrorSpec,
        dipole: &'a DipoleEmitter,
        temperature: f64,
        profile: RadiusProfile,
    ) -> Result<Self, EmissionError> {
        mirror.validate()?;
        check_unit("dipole orientation", &dipole.orientation)?;
        Ok(Self {
            mirror,
            dipole,
            radius: effective_radius(mirror, temperature),
            profile,
            cos_aperture: mirror.half_aperture().cos(),
            hole_cos: mirror
                .holes
                .iter()
                .map(|h| (h.direction.into_inner(), h.angular_radius.cos()))
                .collect(),
            amplitude: mirror.amplitude_reflectivity(),
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn in_aperture(&self, u: &Vector3<f64>) -> bool {
        self.mirror.na > 0.0 && u.z >= self.cos_aperture
    }

    pub fn in_hole(&self, u: &Vector3<f64>) -> bool {
        self.hole_cos.iter().any(|(d, c)| d.dot(u) > *c)
    }

    /// Round-trip phase 2k·R(u) reduced to [0, 2π).
    fn phase(&self, theta: f64, phi: f64) -> Option<f64> {
        let height_nm = match &self.mirror.surface {
            Some(map) => map.sample(theta, phi)?,
            None => 0.0,
        };
        let r = self.radius + self.profile.offset(theta) + height_nm * 1e-9;
        let half_waves = 2.0 * r / self.dipole.wavelength;
        Some(TAU * half_waves.rem_euclid(1.0))
    }

    /// Amplitude and phase returned to the emitter from direction `u`,
    /// ignoring holes and the aperture test.
    fn surface_reflection(&self, u: &Vector3<f64>) -> Complex64 {
        let theta = u.z.clamp(-1.0, 1.0).acos();
        let phi = u.y.atan2(u.x);
        match self.phase(theta, phi) {
            Some(p) => Complex64::from_polar(self.amplitude, p),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Complex reflection seen from `u`: zero outside the aperture, in holes
    /// and on masked surface points.
    pub fn reflection(&self, u: &Vector3<f64>) -> Complex64 {
        if !self.in_aperture(u) || self.in_hole(u) {
            return Complex64::new(0.0, 0.0);
        }
        self.surface_reflection(u)
    }

    /// Far-field power density (units of Γ₀ per sr) leaving along `u`.
    pub fn emission_density(&self, u: &Vector3<f64>) -> f64 {
        let d = pattern(&self.dipole.orientation, u);
        let p = if self.in_aperture(u) {
            *u
        } else if self.in_aperture(&-u) {
            -u
        } else {
            return d;
        };
        d * (1.0 - self.reflection(&p).re)
    }

    /// Back-action integral with holes subtracted cap by cap.
    pub fn back_action(&self, opts: &QuadratureOptions) -> Result<EmissionResult, EmissionError> {
        if self.mirror.na == 0.0 {
            return Ok(EmissionResult {
                coherence: 0.0,
                rate_ratio: 1.0,
                level_shift: 0.0,
                mirror_fraction: 0.0,
                hole_fraction: 0.0,
                error_estimate: 0.0,
            });
        }
        let theta_m = self.mirror.half_aperture();
        let orientation = self.dipole.orientation.into_inner();
        let integrand = |u: &Vector3<f64>| -> [f64; 3] {
            let w = 2.0 * pattern(&orientation, u);
            let r = self.surface_reflection(u);
            [w * r.re, w * r.im, w]
        };

        let mut theta_breaks = vec![0.0];
        let mut phi_breaks: Vec<f64>;
        let order;
        if let Some(map) = &self.mirror.surface {
            theta_breaks.extend(map.theta().iter().copied().filter(|&t| t > 0.0 && t < theta_m));
            phi_breaks = map.phi().to_vec();
            phi_breaks.push(map.phi()[0] + TAU);
            order = 3;
        } else {
            phi_breaks = (0..=8).map(|k| TAU * k as f64 / 8.0).collect();
            order = 8;
        }
        if let Some(b) = self.profile.breakpoint() {
            if b < theta_m {
                theta_breaks.push(b);
            }
        }
        theta_breaks.push(theta_m);
        theta_breaks.sort_by(f64::total_cmp);
        theta_breaks.dedup();

        let full = PolarDomain {
            axis: Vector3::z(),
            e1: Vector3::x(),
            e2: Vector3::y(),
            theta_breaks,
            phi_breaks,
            limit: ThetaLimit::Constant,
        };
        let (whole, mut bound) = adaptive(&full, order, opts, &integrand)?;

        let mut holes = [0.0; 3];
        for hole in &self.mirror.holes {
            let domain = PolarDomain::cap(hole.direction.into_inner(), hole.angular_radius, theta_m);
            let (cap, err) = adaptive(&domain, 6, opts, &integrand)?;
            for k in 0..3 {
                holes[k] += cap[k];
            }
            bound += err;
        }
        let coherence = whole[0] - holes[0];
        Ok(EmissionResult {
            coherence,
            rate_ratio: 1.0 - coherence,
            level_shift: whole[1] - holes[1],
            mirror_fraction: whole[2] - holes[2],
            hole_fraction: holes[2],
            error_estimate: bound,
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum ThetaLimit {
    Constant,
    /// Cap clipped by the aperture edge: (hole polar angle, aperture half-angle).
    Clipped { beta: f64, theta_m: f64 },
}

/// Polar patch around `axis`; θ breakpoints are absolute for a constant
/// limit and fractions of the clipped limit otherwise.
#[derive(Debug, Clone)]
struct PolarDomain {
    axis: Vector3<f64>,
    e1: Vector3<f64>,
    e2: Vector3<f64>,
    theta_breaks: Vec<f64>,
    phi_breaks: Vec<f64>,
    limit: ThetaLimit,
}

impl PolarDomain {
    fn cap(axis: Vector3<f64>, radius: f64, theta_m: f64) -> Self {
        let beta = axis.z.clamp(-1.0, 1.0).acos();
        let e1 = if beta < 1e-12 {
            Vector3::x()
        } else {
            let azimuth = axis.y.atan2(axis.x);
            Vector3::new(beta.cos() * azimuth.cos(), beta.cos() * azimuth.sin(), -beta.sin())
        };
        let e2 = axis.cross(&e1);
        let clipped = beta + radius > theta_m;
        Self {
            axis,
            e1,
            e2,
            theta_breaks: if clipped { vec![0.0, 0.5, 1.0] } else { vec![0.0, 0.5 * radius, radius] },
            phi_breaks: (0..=16).map(|k| TAU * k as f64 / 16.0).collect(),
            limit: if clipped { ThetaLimit::Clipped { beta, theta_m } } else { ThetaLimit::Constant },
        }
        .with_cap_radius(radius)
    }

    fn with_cap_radius(mut self, radius: f64) -> Self {
        if let ThetaLimit::Clipped { .. } = self.limit {
            self.theta_breaks.push(radius);
        }
        self
    }

    /// Upper θ limit at azimuth φ for clipped caps.
    fn clipped_limit(&self, phi: f64) -> f64 {
        match self.limit {
            ThetaLimit::Constant => f64::NAN,
            ThetaLimit::Clipped { beta, theta_m } => {
                let radius = *self.theta_breaks.last().unwrap();
                let a = beta.cos();
                let b = -beta.sin() * phi.cos();
                let r = a.hypot(b);
                let delta = b.atan2(a);
                let edge = delta + (theta_m.cos() / r).clamp(-1.0, 1.0).acos();
                edge.clamp(0.0, radius)
            }
        }
    }

    fn direction(&self, theta: f64, phi: f64) -> Vector3<f64> {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        self.axis * ct + (self.e1 * cp + self.e2 * sp) * st
    }

    fn integrate(&self, gl: &GaussLegendre, level: u32, f: &(dyn Fn(&Vector3<f64>) -> [f64; 3] + Sync)) -> [f64; 3] {
        let sub = 1usize << level;
        let phi_nodes = gl.composite(&self.phi_breaks, sub);
        match self.limit {
            ThetaLimit::Constant => {
                let panels: Vec<(f64, f64)> = self.theta_breaks.windows(2).map(|w| (w[0], w[1])).collect();
                let partial: Vec<[f64; 3]> = panels
                    .par_iter()
                    .map(|&(a, b)| {
                        let mut acc = [0.0; 3];
                        for (t, wt) in gl.composite(&[a, b], sub) {
                            let st = t.sin();
                            for &(p, wp) in &phi_nodes {
                                let v = f(&self.direction(t, p));
                                let w = wt * wp * st;
                                for k in 0..3 {
                                    acc[k] += w * v[k];
                                }
                            }
                        }
                        acc
                    })
                    .collect();
                sum3(&partial)
            }
            ThetaLimit::Clipped { .. } => {
                let fracs: Vec<f64> = self.theta_breaks[..3].to_vec();
                let partial: Vec<[f64; 3]> = phi_nodes
                    .par_iter()
                    .map(|&(p, wp)| {
                        let top = self.clipped_limit(p);
                        let breaks: Vec<f64> = fracs.iter().map(|f| f * top).collect();
                        let mut acc = [0.0; 3];
                        for (t, wt) in gl.composite(&breaks, sub) {
                            let v = f(&self.direction(t, p));
                            let w = wt * wp * t.sin();
                            for k in 0..3 {
                                acc[k] += w * v[k];
                            }
                        }
                        acc
                    })
                    .collect();
                sum3(&partial)
            }
        }
    }
}

fn sum3(parts: &[[f64; 3]]) -> [f64; 3] {
    parts.iter().fold([0.0; 3], |mut a, p| {
        for k in 0..3 {
            a[k] += p[k];
        }
        a
    })
}

/// Refine by halving every panel until two successive levels agree.
fn adaptive(
    domain: &PolarDomain,
    order: usize,
    opts: &QuadratureOptions,
    f: &(dyn Fn(&Vector3<f64>) -> [f64; 3] + Sync),
) -> Result<([f64; 3], f64), EmissionError> {
    let gl = GaussLegendre::new(order);
    let mut previous = domain.integrate(&gl, 0, f);
    let mut diff = f64::INFINITY;
    for level in 1..=opts.max_level {
        let current = domain.integrate(&gl, level, f);
        diff = (current[0] - previous[0]).hypot(current[1] - previous[1]);
        if diff < opts.tolerance {
            return Ok((current, diff));
        }
        previous = current;
    }
    Err(EmissionError::Accuracy { estimate: previous[0], bound: diff })
}

/// Back-action integral and derived rate for the mirror at temperature `t`.
pub fn coherence_factor(
    mirror: &MirrorSpec,
    dipole: &DipoleEmitter,
    t: f64,
) -> Result<EmissionResult, EmissionError> {
    coherence_factor_with(mirror, dipole, t, RadiusProfile::default(), &QuadratureOptions::default())
}

pub fn coherence_factor_with(
    mirror: &MirrorSpec,
    dipole: &DipoleEmitter,
    t: f64,
    profile: RadiusProfile,
    opts: &QuadratureOptions,
) -> Result<EmissionResult, EmissionError> {
    MirrorModel::new(mirror, dipole, t, profile)?.back_action(opts)
}

/// Closed-form coherence of a perfect mirror of the given NA for a dipole
/// perpendicular to the axis, at a node.
pub fn ideal_coherence_closed_form(na: f64) -> f64 {
    let c = na.clamp(0.0, 1.0).asin().cos();
    0.75 * ((1.0 - c) + (1.0 - c * c * c) / 3.0)
}

/// Γ/Γ₀ with `radius_offset` added to the thermal radius.
pub fn decay_rate_modification(
    mirror: &MirrorSpec,
    dipole: &DipoleEmitter,
    t: f64,
    radius_offset: f64,
) -> Result<f64, EmissionError> {
    let profile = RadiusProfile::Uniform { offset: radius_offset };
    Ok(coherence_factor_with(mirror, dipole, t, profile, &QuadratureOptions::default())?.rate_ratio)
}

/// Γ/Γ₀ for each radius offset. The offsets only rotate the phase of the
/// back-action integral, so a single quadrature serves the whole sweep.
pub fn radius_sweep(
    mirror: &MirrorSpec,
    dipole: &DipoleEmitter,
    t: f64,
    offsets: &[f64],
) -> Result<Vec<f64>, EmissionError> {
    let z = coherence_factor(mirror, dipole, t)?.back_action();
    let k2 = 2.0 * dipole.wavenumber();
    Ok(offsets
        .iter()
        .map(|&d| {
            let phase = TAU * (k2 * d / TAU).rem_euclid(1.0);
            1.0 - (z * Complex64::from_polar(1.0, phase)).re
        })
        .collect())
}

/// Smallest and largest Γ/Γ₀ reachable by tuning the radius.
pub fn modification_extrema(
    mirror: &MirrorSpec,
    dipole: &DipoleEmitter,
    t: f64,
) -> Result<(f64, f64), EmissionError> {
    let z = coherence_factor(mirror, dipole, t)?.back_action().norm();
    Ok((1.0 - z, 1.0 + z))
}

/// Emitted power per steradian along `u` in units of Γ₀.
pub fn angular_emission_density(
    mirror: &MirrorSpec,
    dipole: &DipoleEmitter,
    t: f64,
    u: &Vector3<f64>,
) -> Result<f64, EmissionError> {
    check_unit("direction", u)?;
    Ok(MirrorModel::new(mirror, dipole, t, RadiusProfile::default())?.emission_density(u))
}

pub fn level_shift_quadrature(mirror: &MirrorSpec, dipole: &DipoleEmitter, t: f64) -> Result<f64, EmissionError> {
    Ok(coherence_factor(mirror, dipole, t)?.level_shift)
}

/// Round-trip light time over the excited-state lifetime, 2RΓ₀/c.
pub fn retardation_ratio(mirror: &MirrorSpec, dipole: &DipoleEmitter) -> f64 {
    2.0 * mirror.radius * dipole.decay_rate / SPEED_OF_LIGHT
}

/// Offset that brings the radius at `t` to the nearest node (R = nλ/2).
pub fn node_offset(mirror: &MirrorSpec, dipole: &DipoleEmitter, t: f64) -> f64 {
    let half = 0.5 * dipole.wavelength;
    let r = effective_radius(mirror, t);
    (r / half).round() * half - r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_thermal::{synthesize_surface, Hole, SurfaceGrid};
    use proptest::prelude::*;

    const LAMBDA: f64 = 493e-9;

    fn dipole() -> DipoleEmitter {
        DipoleEmitter::perpendicular(LAMBDA, 1.0e8)
    }

    /// Mirror whose radius is an exact number of half waves.
    fn node_mirror(na: f64) -> MirrorSpec {
        MirrorSpec::ideal(25_000.0 * LAMBDA, na)
    }

    fn t_ref(m: &MirrorSpec) -> f64 {
        m.reference_temperature
    }

    /// Independent oracle: cap integral of the pattern about the axis for a
    /// dipole at angle `beta` to it.
    fn cap_power(beta: f64, na: f64) -> f64 {
        let c = na.asin().cos();
        let axial = (1.0 - c * c * c) / 3.0;
        let transverse = 0.5 * ((1.0 - c) - axial);
        0.75 * ((1.0 - c) - (beta.cos().powi(2) * axial + beta.sin().powi(2) * transverse))
    }

    #[test]
    fn pattern_extremes_and_validation() {
        let p = Vector3::x();
        assert_eq!(dipole_pattern(&p, &Vector3::x()).unwrap(), 0.0);
        assert!((dipole_pattern(&p, &Vector3::y()).unwrap() - 3.0 / (8.0 * PI)).abs() < 1e-16);
        assert!(dipole_pattern(&(p * 1.01), &Vector3::y()).is_err());
        assert!(dipole_pattern(&p, &Vector3::new(0.0, 2.0, 0.0)).is_err());
    }

    #[test]
    fn pattern_normalized_over_sphere() {
        let gl = GaussLegendre::new(24);
        let p = Vector3::new(0.3, -0.5, 0.2).normalize();
        let mut total = 0.0;
        for (ct, wt) in gl.mapped(-1.0, 1.0) {
            let st = (1.0 - ct * ct).sqrt();
            for k in 0..48 {
                let phi = TAU * k as f64 / 48.0;
                let u = Vector3::new(st * phi.cos(), st * phi.sin(), ct);
                total += wt * TAU / 48.0 * pattern(&p, &u);
            }
        }
        assert!((total - 1.0).abs() < 1e-9, "{total}");
    }

    #[test]
    fn hemisphere_node_and_antinode() {
        let m = node_mirror(1.0);
        let r = coherence_factor(&m, &dipole(), t_ref(&m)).unwrap();
        assert!((r.coherence - 1.0).abs() < 1e-6 && r.rate_ratio.abs() < 1e-6, "{r:?}");
        let anti = decay_rate_modification(&m, &dipole(), t_ref(&m), LAMBDA / 4.0).unwrap();
        assert!((anti - 2.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_values() {
        assert!((ideal_coherence_closed_form(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(ideal_coherence_closed_form(0.0), 0.0);
        assert!((ideal_coherence_closed_form(0.7) - 0.373340).abs() < 1e-6);
    }

    #[test]
    fn quadrature_matches_closed_form_na_07() {
        let m = node_mirror(0.7);
        let c = coherence_factor(&m, &dipole(), t_ref(&m)).unwrap().coherence;
        assert!((c - ideal_coherence_closed_form(0.7)).abs() < 1e-6);
    }

    #[test]
    fn tilted_dipole_matches_oracle() {
        for beta in [0.0f64, 0.4, 1.1] {
            let d = DipoleEmitter::new(LAMBDA, 1e8, Vector3::new(beta.sin(), 0.0, beta.cos())).unwrap();
            let m = node_mirror(0.8);
            let c = coherence_factor(&m, &d, t_ref(&m)).unwrap().coherence;
            assert!((c - 2.0 * cap_power(beta, 0.8)).abs() < 1e-6, "beta {beta}");
        }
    }

    #[test]
    fn empty_aperture_has_no_effect() {
        let m = node_mirror(0.0);
        let r = coherence_factor(&m, &dipole(), t_ref(&m)).unwrap();
        assert_eq!((r.coherence, r.level_shift, r.rate_ratio), (0.0, 0.0, 1.0));
    }

    #[test]
    fn eighth_wave_offset() {
        let m = node_mirror(1.0);
        let r = coherence_factor_with(&m, &dipole(), t_ref(&m), RadiusProfile::Uniform { offset: LAMBDA / 8.0 }, &QuadratureOptions::default()).unwrap();
        assert!((r.rate_ratio - 1.0).abs() < 0.02);
        assert!((r.level_shift - 1.0).abs() < 1e-4);
        let node = level_shift_quadrature(&m, &dipole(), t_ref(&m)).unwrap();
        assert!(node.abs() < 1e-6);
    }

    #[test]
    fn sweep_spans_zero_to_two() {
        let m = node_mirror(1.0);
        let offsets: Vec<f64> = (0..=40).map(|k| LAMBDA / 2.0 * k as f64 / 40.0).collect();
        let sweep = radius_sweep(&m, &dipole(), t_ref(&m), &offsets).unwrap();
        let lo = sweep.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = sweep.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo.abs() < 1e-6 && (hi - 2.0).abs() < 1e-6);
        let direct = decay_rate_modification(&m, &dipole(), t_ref(&m), offsets[7]).unwrap();
        assert!((direct - sweep[7]).abs() < 1e-6);
    }

    #[test]
    fn hole_removes_its_weighted_coverage() {
        let base = node_mirror(0.9);
        let mut holed = base.clone();
        holed.holes.push(Hole::at(0.0, 0.0, 0.12));
        holed.holes.push(Hole::at(0.8, 1.0, 0.1));
        let a = coherence_factor(&base, &dipole(), t_ref(&base)).unwrap();
        let b = coherence_factor(&holed, &dipole(), t_ref(&holed)).unwrap();
        assert!(b.coherence < a.coherence);
        assert!((a.coherence - b.coherence - b.hole_fraction).abs() < 2e-6);
        // on-axis cap of half-angle 0.12 with a transverse dipole
        let on_axis = 2.0 * cap_power(PI / 2.0, 0.12f64.sin());
        assert!(b.hole_fraction > on_axis);
    }

    #[test]
    fn hole_straddling_the_rim_is_clipped() {
        let na = 0.8f64;
        let theta_m = na.asin();
        let mut m = node_mirror(na);
        m.holes.push(Hole::at(theta_m - 0.02, 0.3, 0.1));
        let r = coherence_factor(&m, &dipole(), t_ref(&m)).unwrap();
        // brute-force coverage of the clipped region
        let d = dipole();
        let model = MirrorModel::new(&m, &d, t_ref(&m), RadiusProfile::default()).unwrap();
        let gl = GaussLegendre::new(8);
        let mut brute = 0.0;
        for (t, wt) in gl.composite(&[0.0, theta_m], 400) {
            for (p, wp) in gl.composite(&[0.0, TAU], 400) {
                let u = Vector3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos());
                if model.in_hole(&u) {
                    brute += wt * wp * t.sin() * 2.0 * pattern(&Vector3::x(), &u);
                }
            }
        }
        assert!((r.hole_fraction - brute).abs() < 1e-5, "{} vs {brute}", r.hole_fraction);
    }

    #[test]
    fn retardation() {
        let m = MirrorSpec::ideal(12.5e-3, 1.0);
        let d = DipoleEmitter::perpendicular(LAMBDA, 1.28e8);
        assert!((retardation_ratio(&m, &d) - 0.0107).abs() < 1e-4);
        let z = MirrorSpec::ideal(0.0, 1.0);
        assert_eq!(retardation_ratio(&z, &d), 0.0);
    }

    #[test]
    fn antinode_density_doubles_pattern() {
        let m = node_mirror(1.0);
        let mut anti = m.clone();
        anti.radius += LAMBDA / 4.0;
        let d = dipole();
        for u in [Vector3::new(0.3, 0.4, (1.0f64 - 0.25).sqrt()), Vector3::new(0.6, 0.0, -0.8)] {
            let g = angular_emission_density(&anti, &d, t_ref(&anti), &u).unwrap();
            assert!((g - 2.0 * pattern(&Vector3::x(), &u)).abs() < 1e-9);
            let n = angular_emission_density(&m, &d, t_ref(&m), &u).unwrap();
            assert!(n.abs() < 1e-9);
        }
    }

    #[test]
    fn node_offset_lands_on_node() {
        let m = MirrorSpec::fabricated();
        let d = dipole();
        let off = node_offset(&m, &d, 300.0);
        assert!(off.abs() <= LAMBDA / 4.0);
        let mut ideal = MirrorSpec::ideal(m.radius, 1.0);
        ideal.reference_temperature = m.reference_temperature;
        let g = decay_rate_modification(&ideal, &d, 300.0, off).unwrap();
        assert!(g.abs() < 1e-5, "{g}");
    }

    #[test]
    fn surface_error_damps_coherence() {
        let sigma = 20.0;
        let grid = SurfaceGrid { n_theta: 181, n_phi: 720, theta_max: PI / 2.0 };
        let mut ratio = 0.0;
        let seeds = 4;
        for seed in 0..seeds {
            let mut m = node_mirror(1.0);
            m.surface = Some(synthesize_surface(sigma, 0.05, seed, grid).unwrap());
            ratio += coherence_factor(&m, &dipole(), t_ref(&m)).unwrap().back_action().norm() / seeds as f64;
        }
        let k = TAU / LAMBDA;
        let expected = (-(2.0 * k * sigma * 1e-9).powi(2) / 2.0).exp();
        assert!((ratio / expected - 1.0).abs() < 0.05, "{ratio} vs {expected}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn monotone_in_na(a in 0.05f64..0.95, b in 0.05f64..0.95) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let m1 = node_mirror(lo);
            let m2 = node_mirror(hi);
            let c1 = coherence_factor(&m1, &dipole(), t_ref(&m1)).unwrap().coherence;
            let c2 = coherence_factor(&m2, &dipole(), t_ref(&m2)).unwrap().coherence;
            prop_assert!(c2 >= c1 - 1e-9);
        }

        #[test]
        fn linear_in_amplitude(refl in 0.01f64..1.0, na in 0.1f64..1.0) {
            let full = node_mirror(na);
            let mut partial = full.clone();
            partial.reflectivity = refl;
            let opts = QuadratureOptions::default();
            let a = coherence_factor_with(&full, &dipole(), t_ref(&full), RadiusProfile::Uniform { offset: 3e-8 }, &opts).unwrap();
            let b = coherence_factor_with(&partial, &dipole(), t_ref(&full), RadiusProfile::Uniform { offset: 3e-8 }, &opts).unwrap();
            prop_assert!((b.coherence - refl.sqrt() * a.coherence).abs() <= 1e-10 * a.coherence.abs().max(1e-3));
        }

        #[test]
        fn periodic_in_half_wave(offset in 0.0f64..2.5e-7, na in 0.2f64..1.0) {
            let m = node_mirror(na);
            let d = dipole();
            let g = |o: f64| decay_rate_modification(&m, &d, t_ref(&m), o).unwrap();
            prop_assert!((g(offset) - g(offset + LAMBDA / 2.0)).abs() < 2e-6);
            prop_assert!(((1.0 - g(offset)) + (1.0 - g(offset + LAMBDA / 4.0))).abs() < 2e-6);
        }

        #[test]
        fn rate_is_physical(refl in 0.0f64..1.0, na in 0.0f64..1.0, offset in 0.0f64..2.5e-7, tilt in 0.0f64..1.6) {
            let mut m = node_mirror(na);
            m.reflectivity = refl;
            let d = DipoleEmitter::new(LAMBDA, 1e8, Vector3::new(tilt.sin(), 0.0, tilt.cos())).unwrap();
            let g = decay_rate_modification(&m, &d, t_ref(&m), offset).unwrap();
            prop_assert!((-1e-9..=2.0 + 1e-9).contains(&g));
        }

        #[test]
        fn density_integrates_to_rate(refl in 0.0f64..1.0, na in 0.1f64..1.0, offset in 0.0f64..2.5e-7, tilt in 0.0f64..1.6, azimuth in 0.0f64..6.0) {
            let mut m = node_mirror(na);
            m.reflectivity = refl;
            m.radius += offset;
            let orient = Vector3::new(tilt.sin() * azimuth.cos(), tilt.sin() * azimuth.sin(), tilt.cos());
            let d = DipoleEmitter::new(LAMBDA, 1e8, orient).unwrap();
            let model = MirrorModel::new(&m, &d, t_ref(&m), RadiusProfile::default()).unwrap();
            let theta_m = na.asin();
            let gl = GaussLegendre::new(12);
            let mut total = 0.0;
            let mut breaks = vec![0.0, theta_m, PI - theta_m, PI];
            breaks.sort_by(f64::total_cmp);
            for (t, wt) in gl.composite(&breaks, 4) {
                for (p, wp) in gl.composite(&[0.0, PI, TAU], 8) {
                    let u = Vector3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos());
                    total += wt * wp * t.sin() * model.emission_density(&u);
                }
            }
            let rate = coherence_factor(&m, &d, t_ref(&m)).unwrap().rate_ratio;
            prop_assert!((total - rate).abs() < 1e-4, "{} vs {}", total, rate);
        }
    }
}
