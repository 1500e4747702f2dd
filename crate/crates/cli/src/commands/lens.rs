use panoptic::optics::{
    cone_power_closed_form, effective_focal_length, power_fraction_in_cone, single_mode_collection_efficiency,
    step_mirror_efficiency, wavefront_map, working_distance, LensPrescription, StepMirror,
};
use panoptic::surface_thermal::MirrorSpec;

use super::common;
use crate::config::Config;
use crate::error::{numerical, CliError};
use crate::output::{num, Output, Report, Table};

pub const SECTIONS: [&str; 3] = ["lens", "collection", "dipole"];

pub fn run(cfg: &Config, out: &mut Output) -> Result<(), CliError> {
    let dipole = common::dipole(cfg)?;
    let na = cfg.f64_or("lens.na", 0.7)?;
    if !(na > 0.0 && na < 1.0) {
        return Err(CliError::Usage(format!("`lens.na` must lie in (0, 1), got {na}")));
    }
    let samples = cfg.usize_or("lens.pupil_samples", 128)?;
    if samples < 64 {
        return Err(CliError::Usage("`lens.pupil_samples` must be at least 64".into()));
    }
    let wavelength = cfg.f64_or("lens.wavelength_m", dipole.wavelength)?;
    let mirror_radius = cfg.f64_or("collection.mirror_radius_m", 12.5e-3)?;
    let with_step = cfg.bool_or("collection.step_mirror", true)?;
    cfg.finish(&SECTIONS)?;

    let lens = LensPrescription::design();
    let efl = effective_focal_length(&lens).map_err(numerical)?;
    let wd = working_distance(&lens, na).map_err(numerical)?;
    let map = wavefront_map(&lens, na, samples, wavelength).map_err(numerical)?;

    let mut table = Table::new(&["px", "py", "opd_waves"]);
    for (px, py, opd) in map.samples() {
        table.row(&[num(px), num(py), num(opd)]);
    }
    out.write("wavefront.csv", &table.finish())?;

    let bare = single_mode_collection_efficiency(&dipole, None, na).map_err(numerical)?;
    let hemisphere = MirrorSpec::ideal(mirror_radius, 1.0);
    let mirrored = single_mode_collection_efficiency(&dipole, Some(&hemisphere), na).map_err(numerical)?;
    let cone = power_fraction_in_cone(&dipole.orientation.into_inner(), na).map_err(numerical)?;

    let mut report = Report::default();
    report.line("na", na);
    report.line("efl_mm", format!("{:.4}", efl.efl_mm));
    report.line("back_focal_mm", format!("{:.4}", efl.back_focal_mm));
    report.line("working_distance_mm", format!("{wd:.5}"));
    report.line("rms_waves", format!("{:.6}", map.rms));
    report.line("pv_waves", format!("{:.6}", map.pv));
    report.line("strehl", format!("{:.6}", map.strehl));
    report.line("cone_fraction", format!("{cone:.6}"));
    report.line("cone_fraction_closed_form", format!("{:.6}", cone_power_closed_form(na)));
    report.line("eta_lens_only", format!("{:.6}", bare.eta));
    report.line("eta", format!("{:.6}", mirrored.eta));
    report.line("mode_overlap", format!("{:.6}", mirrored.mode_overlap));
    if with_step {
        let step = StepMirror::shipped(&dipole, na).map_err(numerical)?;
        let stepped = step_mirror_efficiency(&step, na, &dipole).map_err(numerical)?;
        report.line("eta_step", format!("{:.6}", stepped.eta));
    }
    out.write("lens_report.txt", &report.finish())?;
    Ok(())
}
