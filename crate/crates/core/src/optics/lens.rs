use super::OpticsError;

/// Plano-to-aspheric singlet. The asphere ("front") faces the collimated
/// space; the spherical "back" surface faces the emitter. Radii are
/// positive when the surface bulges away from the glass; an infinite radius
/// is a flat surface.
#[derive(Debug, Clone, PartialEq)]
pub struct LensPrescription {
    pub front_radius_mm: f64,
    pub conic: f64,
    /// A4, A6, …, A16 in mm^(1-2i).
    pub asphere_coefficients: [f64; 7],
    pub back_radius_mm: f64,
    /// Conic constant of the back surface (0 for a sphere).
    pub back_conic: f64,
    pub center_thickness_mm: f64,
    pub clear_aperture_mm: f64,
    pub index: f64,
    /// Distance from the emitter to the back-surface vertex.
    pub working_distance_mm: f64,
    /// Nominal focal length, for reporting.
    pub efl_mm: f64,
}

impl LensPrescription {
    /// The NA 0.7 collection asphere. Thickness and glass index were fitted
    /// so the traced working distance and focal length meet the design
    /// values with the smallest wavefront error.
    pub fn design() -> Self {
        Self {
            front_radius_mm: 14.56,
            conic: -0.776,
            asphere_coefficients: [
                3.2022806e-6,
                -2.9002661e-8,
                -9.6249910e-11,
                -1.0236456e-13,
                4.5511459e-16,
                3.3201252e-18,
                -8.7645298e-21,
            ],
            back_radius_mm: 202.353,
            back_conic: 0.0,
            center_thickness_mm: 12.546632,
            clear_aperture_mm: 25.0,
            index: 1.870852,
            working_distance_mm: 9.60,
            efl_mm: 16.05,
        }
    }

    /// Geometrically similar lens with every length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.front_radius_mm *= s;
        out.back_radius_mm *= s;
        for (i, a) in out.asphere_coefficients.iter_mut().enumerate() {
            let power = 2 * (i as i32 + 2);
            *a *= s.powi(1 - power);
        }
        out.center_thickness_mm *= s;
        out.clear_aperture_mm *= s;
        out.working_distance_mm *= s;
        out.efl_mm *= s;
        out
    }

    pub fn semi_aperture_mm(&self) -> f64 {
        0.5 * self.clear_aperture_mm
    }

    pub fn validate(&self) -> Result<(), OpticsError> {
        if !(self.index > 1.0) {
            return Err(OpticsError::Prescription(format!("index must exceed 1, got {}", self.index)));
        }
        for (name, v) in [
            ("center thickness", self.center_thickness_mm),
            ("clear aperture", self.clear_aperture_mm),
            ("working distance", self.working_distance_mm),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(OpticsError::Prescription(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.front_radius_mm == 0.0 || self.back_radius_mm == 0.0 {
            return Err(OpticsError::Prescription("radii must be non-zero (use inf for flat)".into()));
        }
        let edge = self.semi_aperture_mm();
        asphere_sag(self, edge)?;
        conic_sag(1.0 / self.back_radius_mm, self.back_conic, edge).ok_or(OpticsError::SagDomain { r_mm: edge })?;
        Ok(())
    }
}

/// Sag of the conic base, with its radial derivative.
pub(crate) fn conic_sag(curvature: f64, conic: f64, r: f64) -> Option<(f64, f64)> {
    let arg = 1.0 - (1.0 + conic) * curvature * curvature * r * r;
    if arg <= 0.0 {
        return None;
    }
    let root = arg.sqrt();
    Some((curvature * r * r / (1.0 + root), curvature * r / root))
}

/// Even polynomial Σ A_{2i} r^{2i} (i = 2..8) by Horner in r², with its
/// derivative.
pub(crate) fn polynomial_sag(coefficients: &[f64; 7], r: f64) -> (f64, f64) {
    let r2 = r * r;
    let mut p = 0.0;
    let mut dp = 0.0;
    for (i, &a) in coefficients.iter().enumerate().rev() {
        let power = 2.0 * (i as f64 + 2.0);
        p = p * r2 + a;
        dp = dp * r2 + power * a;
    }
    let r4 = r2 * r2;
    (p * r4, dp * r2 * r)
}

/// Front-surface sag z(r) and dz/dr, both in mm.
pub fn asphere_sag(lens: &LensPrescription, r_mm: f64) -> Result<(f64, f64), OpticsError> {
    let (z, dz) = conic_sag(1.0 / lens.front_radius_mm, lens.conic, r_mm).ok_or(OpticsError::SagDomain { r_mm })?;
    let (p, dp) = polynomial_sag(&lens.asphere_coefficients, r_mm);
    Ok((z + p, dz + dp))
}
