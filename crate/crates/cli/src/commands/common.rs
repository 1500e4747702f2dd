use panoptic::constants::DESIGN_WAVELENGTH;
use panoptic::emission::DipoleEmitter;
use panoptic::surface_thermal::{
    synthesize_surface, MirrorSpec, SurfaceGrid, FABRICATED_FORM_CORRELATION, FABRICATED_FORM_RMS_NM,
};
use panoptic::Vector3;

use crate::config::Config;
use crate::error::{numerical, CliError};

/// Lifetime of the Ba⁺ 6P₁/₂ level (s).
const DEFAULT_LIFETIME: f64 = 7.9e-9;

pub fn dipole(cfg: &Config) -> Result<DipoleEmitter, CliError> {
    let wavelength = cfg.f64_or("dipole.wavelength_m", DESIGN_WAVELENGTH)?;
    let lifetime = cfg.f64_or("dipole.lifetime_s", DEFAULT_LIFETIME)?;
    if !(lifetime > 0.0) {
        return Err(CliError::Config("`dipole.lifetime_s` must be positive".into()));
    }
    let orientation = match cfg.str_opt("dipole.orientation") {
        Ok(None) => Vector3::x(),
        Ok(Some(s)) => match s.as_str() {
            "perpendicular" => Vector3::x(),
            "parallel" => Vector3::z(),
            other => {
                return Err(CliError::Config(format!(
                    "`dipole.orientation` must be \"perpendicular\", \"parallel\" or [x, y, z], got {other:?}"
                )))
            }
        },
        Err(_) => {
            let v = cfg.f64_list_opt("dipole.orientation")?.unwrap_or_default();
            if v.len() != 3 {
                return Err(CliError::Config("`dipole.orientation` vector needs three components".into()));
            }
            Vector3::new(v[0], v[1], v[2]).normalize()
        }
    };
    DipoleEmitter::new(wavelength, 1.0 / lifetime, orientation).map_err(|e| CliError::Config(e.to_string()))
}

/// Mirror block. `mirror.preset` selects "ideal" or "fabricated" defaults;
/// the remaining keys override them.
pub fn mirror(cfg: &Config, seed: u64) -> Result<MirrorSpec, CliError> {
    let preset = cfg.str_opt("mirror.preset")?.unwrap_or_else(|| "ideal".into());
    let (mut spec, default_rms) = match preset.as_str() {
        "ideal" => (MirrorSpec::ideal(12.5e-3, 0.996), 0.0),
        "fabricated" => (MirrorSpec::fabricated(), FABRICATED_FORM_RMS_NM),
        other => return Err(CliError::Config(format!("`mirror.preset` must be \"ideal\" or \"fabricated\", got {other:?}"))),
    };
    spec.radius = cfg.f64_or("mirror.radius_m", spec.radius)?;
    spec.na = cfg.f64_or("mirror.na", spec.na)?;
    spec.reflectivity = cfg.f64_or("mirror.reflectivity", spec.reflectivity)?;
    spec.expansion_coefficient = cfg.f64_or("mirror.alpha_per_K", spec.expansion_coefficient)?;
    spec.reference_temperature = cfg.f64_or("mirror.reference_temperature_K", spec.reference_temperature)?;
    if !cfg.bool_or("mirror.holes", !spec.holes.is_empty())? {
        spec.holes.clear();
    }
    let rms = cfg.f64_or("mirror.form_rms_nm", default_rms)?;
    let correlation = cfg.f64_or("mirror.form_correlation_rad", FABRICATED_FORM_CORRELATION)?;
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    if rms > 0.0 {
        let grid = SurfaceGrid::one_degree(spec.half_aperture());
        spec.surface = Some(synthesize_surface(rms, correlation, seed, grid).map_err(numerical)?);
    } else if rms < 0.0 {
        return Err(CliError::Config("`mirror.form_rms_nm` must be non-negative".into()));
    }
    Ok(spec)
}
