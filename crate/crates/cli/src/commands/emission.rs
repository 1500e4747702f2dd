use panoptic::emission::{ideal_coherence_closed_form, modification_extrema, node_offset, radius_sweep};
use panoptic::surface_thermal::MirrorSpec;

use super::common;
use crate::config::Config;
use crate::error::{numerical, CliError};
use crate::output::{num, Output, Report, Table};

pub const SECTIONS: [&str; 3] = ["mirror", "dipole", "scan"];

pub fn run(cfg: &Config, out: &mut Output) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let dipole = common::dipole(cfg)?;
    let mirror = common::mirror(cfg, seed)?;
    let nas = cfg.f64_list_opt("scan.na")?.ok_or_else(|| CliError::Usage("`scan.na` must list at least one NA".into()))?;
    if nas.is_empty() {
        return Err(CliError::Usage("`scan.na` must list at least one NA".into()));
    }
    if let Some(bad) = nas.iter().find(|&&na| !(na > 0.0 && na <= 1.0)) {
        return Err(CliError::Usage(format!("NA values must lie in (0, 1], got {bad}")));
    }
    let offset_points = cfg.usize_or("scan.offset_points", 81)?;
    if offset_points < 2 {
        return Err(CliError::Usage("`scan.offset_points` must be at least 2".into()));
    }
    cfg.finish(&SECTIONS)?;

    let t = mirror.reference_temperature;
    let node = node_offset(&mirror, &dipole, t);
    let quarter = 0.25 * dipole.wavelength;

    let mut fig1 = Table::new(&["na", "ratio_node", "ratio_antinode", "ratio_node_closed_form"]);
    for &na in &nas {
        let ideal = MirrorSpec::ideal(mirror.radius, na);
        let at = node_offset(&ideal, &dipole, t);
        let r = radius_sweep(&ideal, &dipole, t, &[at, at + quarter]).map_err(numerical)?;
        fig1.row(&[num(na), num(r[0]), num(r[1]), num(1.0 - ideal_coherence_closed_form(na))]);
    }
    out.write("fig1.csv", &fig1.finish())?;

    let mut fig4 = Table::new(&["na", "ideal_max", "form_only_max", "form_reflectivity_max", "fraction_of_ideal"]);
    for &na in &nas {
        let ideal = MirrorSpec::ideal(mirror.radius, na);
        let mut configured = MirrorSpec { na, ..mirror.clone() };
        let aperture = configured.half_aperture();
        configured.holes.retain(|h| h.polar_angle() <= aperture);
        let form_only = MirrorSpec { reflectivity: 1.0, ..configured.clone() };
        let (_, ideal_max) = modification_extrema(&ideal, &dipole, t).map_err(numerical)?;
        let (_, form_max) = modification_extrema(&form_only, &dipole, t).map_err(numerical)?;
        let (_, full_max) = modification_extrema(&configured, &dipole, t).map_err(numerical)?;
        fig4.row(&[num(na), num(ideal_max), num(form_max), num(full_max), num((full_max - 1.0) / (ideal_max - 1.0))]);
    }
    out.write("fig4.csv", &fig4.finish())?;

    let offsets: Vec<f64> = (0..offset_points).map(|k| node + 0.5 * dipole.wavelength * k as f64 / (offset_points - 1) as f64).collect();
    let ratios = radius_sweep(&mirror, &dipole, t, &offsets).map_err(numerical)?;
    let mut sweep = Table::new(&["offset_from_node_nm", "ratio"]);
    for (d, r) in offsets.iter().zip(&ratios) {
        sweep.row(&[num((d - node) * 1e9), num(*r)]);
    }
    out.write("radius_sweep.csv", &sweep.finish())?;

    let (lo, hi) = modification_extrema(&mirror, &dipole, t).map_err(numerical)?;
    let ideal_c = ideal_coherence_closed_form(mirror.na);
    let mut report = Report::default();
    report.line("mirror_na", mirror.na);
    report.line("mirror_reflectivity", mirror.reflectivity);
    report.line("holes", mirror.holes.len());
    report.line("form_map", mirror.surface.is_some());
    report.line("min_ratio", format!("{lo:.6}"));
    report.line("max_ratio", format!("{hi:.6}"));
    report.line("ideal_coherence", format!("{ideal_c:.6}"));
    report.line("fraction_of_ideal", format!("{:.6}", (hi - 1.0) / ideal_c));
    out.write("emission_summary.txt", &report.finish())?;
    Ok(())
}
