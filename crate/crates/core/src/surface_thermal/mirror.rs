use nalgebra::{Unit, Vector3};

use super::{synthesize_surface, SurfaceError, SurfaceGrid, SurfaceMap};

/// Form error of the fabricated mirror: area-weighted rms height (nm).
pub const FABRICATED_FORM_RMS_NM: f64 = 18.1;
/// Correlation angle (rad) of the synthetic form map.
pub const FABRICATED_FORM_CORRELATION: f64 = 0.1;
/// Seed of the synthetic form map shipped with the fabricated mirror.
pub const FABRICATED_FORM_SEED: u64 = 1;

/// Circular hole in the mirror, centred on `direction` as seen from the
/// centre of curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct Hole {
    pub direction: Unit<Vector3<f64>>,
    /// Half-angle subtended at the centre of curvature (rad).
    pub angular_radius: f64,
}

impl Hole {
    /// Hole at polar angle `theta` from the mirror axis and azimuth `phi`.
    pub fn at(theta: f64, phi: f64, angular_radius: f64) -> Self {
        let d = Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        Self { direction: Unit::new_normalize(d), angular_radius }
    }

    pub fn polar_angle(&self) -> f64 {
        self.direction.z.clamp(-1.0, 1.0).acos()
    }
}

/// Concave spherical mirror whose axis is +z and whose centre of curvature
/// is the emitter position.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorSpec {
    /// Radius of curvature at the reference temperature (m).
    pub radius: f64,
    /// Sine of the half-aperture.
    pub na: f64,
    /// Intensity reflectivity.
    pub reflectivity: f64,
    pub holes: Vec<Hole>,
    pub surface: Option<SurfaceMap>,
    /// Linear expansion coefficient (1/K).
    pub expansion_coefficient: f64,
    pub reference_temperature: f64,
}

impl MirrorSpec {
    /// Perfect mirror: unit reflectivity, no holes, no form error.
    pub fn ideal(radius: f64, na: f64) -> Self {
        Self {
            radius,
            na,
            reflectivity: 1.0,
            holes: Vec::new(),
            surface: None,
            expansion_coefficient: 23.5e-6,
            reference_temperature: 293.15,
        }
    }

    /// The fabricated aluminium mirror: NA 0.996, reflectivity 0.92, a 3 mm
    /// hole on axis and one at 62° in the x–z plane. No form map attached.
    pub fn fabricated() -> Self {
        let hole_radius = 1.5e-3 / 12.5e-3;
        Self {
            radius: 12.5e-3,
            na: 0.996,
            reflectivity: 0.92,
            holes: vec![
                Hole::at(0.0, 0.0, hole_radius),
                Hole::at(62f64.to_radians(), 0.0, hole_radius),
            ],
            surface: None,
            expansion_coefficient: 23.5e-6,
            reference_temperature: 293.15,
        }
    }

    /// Attach the shipped synthetic form map on a one-degree grid.
    pub fn with_synthetic_form(mut self) -> Result<Self, SurfaceError> {
        let grid = SurfaceGrid::one_degree(self.half_aperture());
        self.surface = Some(synthesize_surface(
            FABRICATED_FORM_RMS_NM,
            FABRICATED_FORM_CORRELATION,
            FABRICATED_FORM_SEED,
            grid,
        )?);
        Ok(self)
    }

    pub fn half_aperture(&self) -> f64 {
        self.na.clamp(0.0, 1.0).asin()
    }

    /// Amplitude reflection coefficient.
    pub fn amplitude_reflectivity(&self) -> f64 {
        self.reflectivity.sqrt()
    }

    pub fn validate(&self) -> Result<(), SurfaceError> {
        if !(self.radius > 0.0) {
            return Err(SurfaceError::Mirror(format!("radius must be positive, got {}", self.radius)));
        }
        if !(0.0..=1.0).contains(&self.na) {
            return Err(SurfaceError::Mirror(format!("NA must lie in [0, 1], got {}", self.na)));
        }
        if !(0.0..=1.0).contains(&self.reflectivity) {
            return Err(SurfaceError::Mirror(format!("reflectivity must lie in [0, 1], got {}", self.reflectivity)));
        }
        if !self.expansion_coefficient.is_finite() {
            return Err(SurfaceError::Mirror("expansion coefficient must be finite".into()));
        }
        let theta_m = self.half_aperture();
        for (k, hole) in self.holes.iter().enumerate() {
            if !(hole.angular_radius > 0.0) {
                return Err(SurfaceError::Mirror(format!("hole {k} has non-positive radius")));
            }
            if hole.polar_angle() > theta_m {
                return Err(SurfaceError::Mirror(format!("hole {k} is centred outside the aperture")));
            }
            for (l, other) in self.holes.iter().enumerate().skip(k + 1) {
                let sep = hole.direction.dot(&other.direction).clamp(-1.0, 1.0).acos();
                if sep < hole.angular_radius + other.angular_radius {
                    return Err(SurfaceError::Mirror(format!("holes {k} and {l} overlap")));
                }
            }
        }
        if let Some(map) = &self.surface {
            if map.theta()[0] > 0.0 || map.theta_max() < theta_m - 1e-12 {
                return Err(SurfaceError::Mirror(format!(
                    "surface map covers polar angles up to {:.4} rad but the aperture extends to {:.4} rad",
                    map.theta_max(),
                    theta_m
                )));
            }
        }
        Ok(())
    }
}

/// Radius of curvature at temperature `t`.
pub fn effective_radius(mirror: &MirrorSpec, t: f64) -> f64 {
    mirror.radius * (1.0 + mirror.expansion_coefficient * (t - mirror.reference_temperature))
}
