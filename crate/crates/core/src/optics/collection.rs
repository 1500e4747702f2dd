use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use super::OpticsError;
use crate::emission::{
    coherence_factor_with, node_offset, pattern, DipoleEmitter, MirrorModel, QuadratureOptions, RadiusProfile,
};
use crate::quadrature::{golden_section_max, GaussLegendre};
use crate::surface_thermal::MirrorSpec;

const WAIST_SCAN: usize = 41;
const WAIST_RANGE: (f64, f64) = (0.05, 5.0);
const WAIST_TOLERANCE: f64 = 1e-4;

/// Fraction of the bare dipole's power inside a cone of half-angle
/// asin(`na`), for a dipole perpendicular to the cone axis.
pub fn cone_power_closed_form(na: f64) -> f64 {
    let c = na.clamp(0.0, 1.0).asin().cos();
    0.375 * ((1.0 - c) + (1.0 - c * c * c) / 3.0)
}

/// Fraction of the bare dipole's power inside the lens cone (around −z).
pub fn power_fraction_in_cone(orientation: &Vector3<f64>, na: f64) -> Result<f64, OpticsError> {
    if (orientation.norm() - 1.0).abs() > 1e-12 {
        return Err(OpticsError::Input(format!("orientation must be a unit vector, |p| = {}", orientation.norm())));
    }
    check_na(na)?;
    let theta_c = na.asin();
    let theta = GaussLegendre::new(24).composite(&[0.0, theta_c], 2);
    let phi = GaussLegendre::new(16).composite(&[0.0, TAU], 4);
    let mut sum = 0.0;
    for &(t, wt) in &theta {
        for &(f, wf) in &phi {
            sum += wt * wf * t.sin() * pattern(orientation, &lens_direction(t, f));
        }
    }
    Ok(sum)
}

fn check_na(na: f64) -> Result<(), OpticsError> {
    if !(na > 0.0 && na <= 1.0) {
        return Err(OpticsError::Input(format!("NA must lie in (0, 1], got {na}")));
    }
    Ok(())
}

/// Direction at polar angle `theta` from −z.
fn lens_direction(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), -theta.cos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectionReport {
    /// Power reaching the lens over the total emitted power.
    pub collected_fraction: f64,
    /// ∫ dΓ/dΩ over the lens cone, in units of Γ₀.
    pub in_cone_rate: f64,
    /// Γ/Γ₀.
    pub total_rate: f64,
    /// Best overlap of the collimated field with a Gaussian mode.
    pub mode_overlap: f64,
    /// Optimal waist in units of the focal length.
    pub waist: f64,
    pub throughput: f64,
    pub eta: f64,
}

impl CollectionReport {
    /// Same report with a different lens transmission.
    pub fn with_throughput(mut self, throughput: f64) -> Self {
        self.eta = self.collected_fraction * self.mode_overlap * throughput;
        self.throughput = throughput;
        self
    }
}

/// Mirror with a radius step at the edge of the region that feeds the lens.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMirror {
    pub mirror: MirrorSpec,
    /// Polar angle of the step, measured from the mirror axis.
    pub step_angle: f64,
    /// Radius offset inside the step (m).
    pub inner_offset: f64,
    /// Radius offset outside the step (m).
    pub outer_offset: f64,
    pub temperature: f64,
}

impl StepMirror {
    /// Fabricated-quality mirror (reflectivity, form map) without holes,
    /// enhancing inside the partner of a lens cone of `lens_na` and
    /// inhibiting beyond it.
    pub fn shipped(dipole: &DipoleEmitter, lens_na: f64) -> Result<Self, OpticsError> {
        check_na(lens_na)?;
        let mut mirror = MirrorSpec::fabricated();
        mirror.holes.clear();
        let mirror = mirror.with_synthetic_form().map_err(crate::emission::EmissionError::from)?;
        Ok(Self::tuned(mirror, dipole, lens_na.asin()))
    }

    /// Antinode inside `step_angle`, node outside, at the reference
    /// temperature.
    pub fn tuned(mirror: MirrorSpec, dipole: &DipoleEmitter, step_angle: f64) -> Self {
        let temperature = mirror.reference_temperature;
        let node = node_offset(&mirror, dipole, temperature);
        Self {
            mirror,
            step_angle,
            inner_offset: node + 0.25 * dipole.wavelength,
            outer_offset: node,
            temperature,
        }
    }

    pub fn profile(&self) -> RadiusProfile {
        RadiusProfile::Step { angle: self.step_angle, inner: self.inner_offset, outer: self.outer_offset }
    }
}

/// Single-mode efficiency of the lens alone, or with the mirror tuned to
/// the antinode nearest its reference radius.
pub fn single_mode_collection_efficiency(
    dipole: &DipoleEmitter,
    mirror: Option<&MirrorSpec>,
    na: f64,
) -> Result<CollectionReport, OpticsError> {
    match mirror {
        None => collection_efficiency(dipole, None, na),
        Some(m) => {
            let t = m.reference_temperature;
            let offset = node_offset(m, dipole, t) + 0.25 * dipole.wavelength;
            collection_efficiency(dipole, Some((m, RadiusProfile::Uniform { offset }, t)), na)
        }
    }
}

pub fn step_mirror_efficiency(
    step: &StepMirror,
    na: f64,
    dipole: &DipoleEmitter,
) -> Result<CollectionReport, OpticsError> {
    collection_efficiency(dipole, Some((&step.mirror, step.profile(), step.temperature)), na)
}

/// Collected fraction and Gaussian mode overlap for an emitter behind an
/// ideal aplanatic lens of the given NA, optionally with a mirror at
/// temperature `t` and radius profile.
pub fn collection_efficiency(
    dipole: &DipoleEmitter,
    mirror: Option<(&MirrorSpec, RadiusProfile, f64)>,
    na: f64,
) -> Result<CollectionReport, OpticsError> {
    check_na(na)?;
    let theta_c = na.asin();
    let model = match mirror {
        Some((m, profile, t)) => Some(MirrorModel::new(m, dipole, t, profile)?),
        None => None,
    };
    let total_rate = match mirror {
        Some((m, profile, t)) => {
            coherence_factor_with(m, dipole, t, profile, &QuadratureOptions::default())?.rate_ratio
        }
        None => 1.0,
    };

    let (theta_nodes, phi_nodes) = pupil_nodes(mirror.map(|m| m.0), theta_c);
    let p = dipole.orientation.into_inner();
    let samples: Vec<PupilSample> = theta_nodes
        .par_iter()
        .flat_map_iter(|&(t, wt)| {
            let model = model.as_ref();
            phi_nodes.iter().map(move |&(f, wf)| {
                let u = lens_direction(t, f);
                let d = pattern(&p, &u);
                let r = model.map_or(Complex64::new(0.0, 0.0), |m| m.reflection(&-u));
                let sign = polarization_sign(&p, t, f);
                let rho = 2.0 * (0.5 * t).sin();
                PupilSample {
                    weight: wt * wf * t.sin(),
                    rho2: rho * rho,
                    amplitude: (Complex64::new(1.0, 0.0) - r) * (sign * d.sqrt()),
                    density: d * (1.0 - r.re),
                }
            })
        })
        .collect();

    let power: f64 = samples.iter().map(|s| s.weight * s.amplitude.norm_sqr()).sum();
    let in_cone_rate: f64 = samples.iter().map(|s| s.weight * s.density).sum();
    let collected_fraction = power / total_rate;

    let rho_max = 2.0 * (0.5 * theta_c).sin();
    let overlap = |w: f64| -> f64 {
        if power <= 0.0 {
            return 0.0;
        }
        let inv = 1.0 / (w * w);
        let field: Complex64 = samples.iter().map(|s| s.amplitude * (s.weight * (-s.rho2 * inv).exp())).sum();
        field.norm_sqr() / (power * 0.5 * PI * w * w)
    };
    let (waist, mode_overlap) = best_waist(overlap, rho_max)?;
    Ok(CollectionReport {
        collected_fraction,
        in_cone_rate,
        total_rate,
        mode_overlap,
        waist,
        throughput: 1.0,
        eta: collected_fraction * mode_overlap,
    })
}

struct PupilSample {
    weight: f64,
    rho2: f64,
    amplitude: Complex64,
    density: f64,
}

/// Quadrature over the lens cone. With a form map the panels follow the
/// map grid so the bilinear interpolant is integrated piece by piece.
fn pupil_nodes(mirror: Option<&MirrorSpec>, theta_c: f64) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    match mirror.and_then(|m| m.surface.as_ref()) {
        Some(map) => {
            let gl = GaussLegendre::new(3);
            let mut theta: Vec<f64> = map.theta().iter().copied().filter(|&t| t < theta_c).collect();
            theta.push(theta_c);
            // partner azimuth is φ + π, so shift the map grid by π
            let mut phi: Vec<f64> = map.phi().iter().map(|&f| (f + PI).rem_euclid(TAU)).collect();
            phi.extend([0.0, TAU]);
            phi.sort_by(f64::total_cmp);
            phi.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            (gl.composite(&theta, 1), gl.composite(&phi, 1))
        }
        None => {
            let theta = GaussLegendre::new(16).composite(&[0.0, theta_c], 4);
            let phi = GaussLegendre::new(16).composite(&[0.0, TAU], 8);
            (theta, phi)
        }
    }
}

/// Sign of the pupil field projected on the dominant polarization.
fn polarization_sign(p: &Vector3<f64>, theta: f64, phi: f64) -> f64 {
    let u = lens_direction(theta, phi);
    let e = p - u * p.dot(&u);
    let (st, ct) = theta.sin_cos();
    let (sf, cf) = phi.sin_cos();
    let e_theta = Vector3::new(ct * cf, ct * sf, st);
    let e_phi = Vector3::new(-sf, cf, 0.0);
    let radial = Vector3::new(cf, sf, 0.0);
    let pupil = radial * e.dot(&e_theta) + e_phi * e.dot(&e_phi);
    let transverse = Vector3::new(p.x, p.y, 0.0);
    let reference = if transverse.norm() > 1e-9 { transverse.normalize() } else { Vector3::x() };
    if pupil.dot(&reference) < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Log scan over waists followed by golden-section refinement.
fn best_waist(mut overlap: impl FnMut(f64) -> f64, rho_max: f64) -> Result<(f64, f64), OpticsError> {
    let (lo, hi) = (WAIST_RANGE.0 * rho_max, WAIST_RANGE.1 * rho_max);
    let waists: Vec<f64> =
        (0..WAIST_SCAN).map(|i| lo * (hi / lo).powf(i as f64 / (WAIST_SCAN - 1) as f64)).collect();
    let values: Vec<f64> = waists.iter().map(|&w| overlap(w)).collect();
    let best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if values[best] == 0.0 {
        return Ok((waists[WAIST_SCAN / 2], 0.0));
    }
    if best == 0 || best == WAIST_SCAN - 1 {
        return Err(OpticsError::Bracket { waists });
    }
    Ok(golden_section_max(overlap, waists[best - 1], waists[best + 1], WAIST_TOLERANCE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dipole() -> DipoleEmitter {
        DipoleEmitter::perpendicular(493e-9, 1.0 / 7.9e-9)
    }

    fn hemisphere() -> MirrorSpec {
        MirrorSpec::ideal(12.5e-3, 1.0)
    }

    #[test]
    fn half_space_holds_half_the_power() {
        let f = power_fraction_in_cone(&Vector3::x(), 1.0).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        assert!((cone_power_closed_form(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cone_fraction_at_design_na() {
        // (3/8)[(1 − c) + (1 − c³)/3] with c = √0.51
        let c = 0.51f64.sqrt();
        let expected = 0.375 * ((1.0 - c) + (1.0 - c * c * c) / 3.0);
        assert!((expected - 0.186670).abs() < 1e-6);
        let f = power_fraction_in_cone(&Vector3::x(), 0.7).unwrap();
        assert!((f - expected).abs() < 1e-10);
        assert!(power_fraction_in_cone(&Vector3::z(), 0.7).unwrap() < f);
    }

    #[test]
    fn ideal_antinode_efficiency() {
        let r = single_mode_collection_efficiency(&dipole(), Some(&hemisphere()), 0.7).unwrap();
        assert!((r.total_rate - 2.0).abs() < 1e-6, "{r:?}");
        assert!((r.collected_fraction - 2.0 * cone_power_closed_form(0.7)).abs() < 1e-6);
        assert!((r.eta - 0.317).abs() < 0.015, "{r:?}");
        assert!(r.eta <= r.collected_fraction);
    }

    #[test]
    fn mirror_doubles_in_cone_rate() {
        let bare = single_mode_collection_efficiency(&dipole(), None, 0.7).unwrap();
        let with = single_mode_collection_efficiency(&dipole(), Some(&hemisphere()), 0.7).unwrap();
        assert!((with.in_cone_rate / bare.in_cone_rate - 2.0).abs() < 1e-6);
        assert!((bare.collected_fraction - cone_power_closed_form(0.7)).abs() < 1e-10);
        // mode shape is unchanged by a uniform antinode mirror
        assert!((bare.mode_overlap - with.mode_overlap).abs() < 1e-9);
    }

    #[test]
    fn vanishing_na_collects_nothing() {
        let r = single_mode_collection_efficiency(&dipole(), None, 1e-3).unwrap();
        assert!(r.eta < 1e-5);
    }

    #[test]
    fn perfect_step_sends_everything_to_the_lens() {
        let d = dipole();
        let step = StepMirror::tuned(hemisphere(), &d, 0.7f64.asin());
        let r = step_mirror_efficiency(&step, 0.7, &d).unwrap();
        assert!((r.collected_fraction - 1.0).abs() < 1e-6, "{r:?}");
        assert!((r.eta - r.mode_overlap).abs() < 1e-6);
    }

    #[test]
    fn degenerate_step_matches_uniform_mirror() {
        let d = dipole();
        let m = hemisphere();
        let mut step = StepMirror::tuned(m.clone(), &d, 0.0);
        step.outer_offset = step.inner_offset;
        let a = step_mirror_efficiency(&step, 0.7, &d).unwrap();
        let b = single_mode_collection_efficiency(&d, Some(&m), 0.7).unwrap();
        assert!((a.eta - b.eta).abs() < 1e-6);
        step.outer_offset = step.inner_offset - 0.125 * d.wavelength;
        let c = step_mirror_efficiency(&step, 0.7, &d).unwrap();
        let t = m.reference_temperature;
        let profile = RadiusProfile::Uniform { offset: step.outer_offset };
        let uniform = collection_efficiency(&d, Some((&m, profile, t)), 0.7).unwrap();
        assert!((c.eta - uniform.eta).abs() < 1e-6);
    }

    #[test]
    fn throughput_scales_linearly() {
        let r = single_mode_collection_efficiency(&dipole(), None, 0.7).unwrap();
        let t = r.with_throughput(0.95);
        assert_eq!(t.eta, r.eta * 0.95);
        assert_eq!(t.collected_fraction, r.collected_fraction);
    }

    #[test]
    fn waist_outside_scan_is_reported() {
        let err = best_waist(|w| w, 1.0).unwrap_err();
        assert!(matches!(err, OpticsError::Bracket { waists } if waists.len() == WAIST_SCAN));
    }

    proptest! {
        #[test]
        fn closed_form_matches_quadrature(na in 0.01f64..1.0) {
            let f = power_fraction_in_cone(&Vector3::y(), na).unwrap();
            prop_assert!((f - cone_power_closed_form(na)).abs() < 1e-6);
        }

        #[test]
        fn efficiency_bounded_by_collected_fraction(na in 0.05f64..0.95, tilt in 0.0f64..1.0) {
            let d = DipoleEmitter::new(493e-9, 1e8, Vector3::new(tilt.cos(), 0.0, tilt.sin())).unwrap();
            let r = single_mode_collection_efficiency(&d, None, na).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.collected_fraction));
            prop_assert!(r.eta <= r.collected_fraction + 1e-12);
        }
    }
}
