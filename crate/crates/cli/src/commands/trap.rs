use std::collections::BTreeMap;

use panoptic::trap::{
    characterize_with, compensate_micromotion, default_controls, line_cuts, optimize_slot, BasisSet,
    CharacterizeOptions, ElectrodeLabel, ObjectiveWeights, SlotSearch, TrapDrive, TrapParams, TrapReport,
};
use panoptic::Vector3;

use crate::config::Config;
use crate::error::{numerical, CliError};
use crate::output::{num, Output, Report, Table};

pub struct TrapFlags {
    pub optimize: bool,
    pub compensate: bool,
}

pub fn sections(flags: &TrapFlags) -> Vec<&'static str> {
    let mut s = vec!["trap", "drive"];
    if flags.optimize {
        s.push("optimize");
    }
    if flags.compensate {
        s.push("compensate");
    }
    s
}

fn params(cfg: &Config) -> Result<TrapParams, CliError> {
    let mut p = match cfg.str_opt("trap.preset")?.as_deref() {
        None | Some("default") => TrapParams::default(),
        Some("cross_baseline") => TrapParams::cross_baseline(),
        Some(other) => {
            return Err(CliError::Config(format!("`trap.preset` must be \"default\" or \"cross_baseline\", got {other:?}")))
        }
    };
    let fields: [(&str, &mut f64); 19] = [
        ("substrate_half_mm", &mut p.substrate_half),
        ("substrate_thickness_mm", &mut p.substrate_thickness),
        ("slot_half_x_mm", &mut p.slot_half_x),
        ("slot_length_mm", &mut p.slot_length),
        ("cross_length_mm", &mut p.cross_length),
        ("cross_width_mm", &mut p.cross_width),
        ("ring_half_x_mm", &mut p.ring_half_x),
        ("ring_half_z_mm", &mut p.ring_half_z),
        ("trench_width_mm", &mut p.trench_width),
        ("trench_depth_mm", &mut p.trench_depth),
        ("endcap_half_x_mm", &mut p.endcap_half_x),
        ("endcap_inner_z_mm", &mut p.endcap_inner_z),
        ("back_opening_half_x_mm", &mut p.back_opening_half_x),
        ("back_opening_half_z_mm", &mut p.back_opening_half_z),
        ("back_electrode_half_x_mm", &mut p.back_electrode_half_x),
        ("back_electrode_half_z_mm", &mut p.back_electrode_half_z),
        ("mirror_radius_mm", &mut p.mirror_radius),
        ("mirror_half_angle_deg", &mut p.mirror_half_angle_deg),
        ("mirror_centre_height_mm", &mut p.mirror_centre_height),
    ];
    for (key, slot) in fields {
        *slot = cfg.f64_or(&format!("trap.{key}"), *slot)?;
    }
    p.mirror = cfg.bool_or("trap.mirror", p.mirror)?;
    Ok(p)
}

/// Drive voltages are never defaulted: every DC electrode must be listed.
fn drive(cfg: &Config) -> Result<TrapDrive, CliError> {
    let mut d = TrapDrive {
        rf_amplitude: cfg.f64_required("drive.rf_amplitude_V")?,
        rf_frequency: cfg.f64_required("drive.rf_frequency_Hz")?,
        ..TrapDrive::default()
    };
    let mut dc = BTreeMap::new();
    for k in 1..=6u8 {
        dc.insert(ElectrodeLabel::Dc(k), cfg.f64_required(&format!("drive.DC{k}"))?);
    }
    for k in 1..=4u8 {
        if let Some(v) = cfg.f64_opt(&format!("drive.GR{k}"))? {
            dc.insert(ElectrodeLabel::Gr(k), v);
        }
    }
    d.dc = dc;
    if let Some(m) = cfg.f64_opt("drive.mass_kg")? {
        d.mass = m;
    }
    if let Some(e) = cfg.f64_list_opt("drive.stray_field_V_per_m")? {
        if e.len() != 3 {
            return Err(CliError::Config("`drive.stray_field_V_per_m` needs three components".into()));
        }
        d.stray_field = Vector3::new(e[0], e[1], e[2]);
    }
    d.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(d)
}

fn range(cfg: &Config, key: &str, default: f64) -> Result<[f64; 2], CliError> {
    match cfg.f64_list_opt(key)? {
        None => Ok([default; 2]),
        Some(v) if v.len() == 2 && v[0] <= v[1] => Ok([v[0], v[1]]),
        Some(_) => Err(CliError::Config(format!("`{key}` must be [lower, upper] with lower <= upper"))),
    }
}

fn report_lines(report: &mut Report, r: &TrapReport) {
    let um = |v: [f64; 3]| format!("{:.3},{:.3},{:.3}", v[0] * 1e6, v[1] * 1e6, v[2] * 1e6);
    report.line("minimum_um", um(r.minimum));
    let f = r.frequencies.map(|f| f / 1e6);
    report.line("frequencies_MHz", format!("{:.5},{:.5},{:.5}", f[0], f[1], f[2]));
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.5}")).unwrap_or_else(|| "nan".into());
    report.line("depth_eV", opt(r.depth()));
    report.line("depth_saddle_eV", opt(r.depth_ev));
    report.line("depth_scan_eV", opt(r.depth_scan_ev));
    report.line("mathieu_q", format!("{:.5},{:.5},{:.5}", r.mathieu_q[0], r.mathieu_q[1], r.mathieu_q[2]));
    report.line("mathieu_a", format!("{:.6},{:.6},{:.6}", r.mathieu_a[0], r.mathieu_a[1], r.mathieu_a[2]));
    report.line("axial_rf_residual_V_per_m", format!("{:.4}", r.axial_rf_residual));
    report.line("rf_field_at_minimum_V_per_m", format!("{:.4}", r.rf_field_at_minimum));
    report.line("ion_height_um", format!("{:.3}", r.ion_height * 1e6));
    report.line("min_electrode_distance_um", opt(r.min_electrode_distance.map(|d| d * 1e6)));
    for w in &r.warnings {
        report.line("warning", w);
    }
}

pub fn run(cfg: &Config, flags: &TrapFlags, out: &mut Output) -> Result<(), CliError> {
    let p = params(cfg)?;
    let drive = drive(cfg)?;
    let edge_mm = cfg.f64_or("trap.mesh_edge_mm", 0.2)?;
    if !(edge_mm > 0.0) {
        return Err(CliError::Usage("`trap.mesh_edge_mm` must be positive".into()));
    }
    let with_depth = cfg.bool_or("trap.depth", true)?;
    let cut_half = cfg.f64_or("trap.line_cut_half_range_um", 500.0)? * 1e-6;
    let cut_points = cfg.usize_or("trap.line_cut_points", 101)?;
    if cut_points < 2 {
        return Err(CliError::Usage("`trap.line_cut_points` must be at least 2".into()));
    }

    let search = if flags.optimize {
        let mut s = SlotSearch::new(p.clone(), drive.clone());
        s.slot_length_range = range(cfg, "optimize.slot_length_range_mm", p.slot_length)?;
        s.cross_length_range = range(cfg, "optimize.cross_length_range_mm", p.cross_length)?;
        s.grid_points = cfg.usize_or("optimize.grid_points", s.grid_points)?;
        s.max_evals = cfg.usize_or("optimize.max_evals", s.max_evals)?;
        s.mesh_edge = cfg.f64_or("optimize.mesh_edge_mm", s.mesh_edge * 1e3)? * 1e-3;
        let weights = ObjectiveWeights {
            frequency: cfg.f64_or("optimize.weight_frequency", 0.0)?,
            depth: cfg.f64_or("optimize.weight_depth", 0.0)?,
            axial_residual: cfg.f64_or("optimize.weight_axial_residual", 1.0)?,
        };
        Some((s, weights))
    } else {
        None
    };
    let controls = if flags.compensate {
        match cfg.str_list_opt("compensate.controls")? {
            None => default_controls(),
            Some(names) => names
                .iter()
                .map(|n| n.parse::<ElectrodeLabel>().map_err(|e| CliError::Config(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?,
        }
    } else {
        Vec::new()
    };
    cfg.finish(&sections(flags))?;

    let basis = BasisSet::for_trap(&p, edge_mm * 1e-3).map_err(numerical)?;
    let mut opts = CharacterizeOptions::default();
    if !with_depth {
        opts = opts.without_depth();
    }
    let r = characterize_with(&basis, &drive, &opts).map_err(numerical)?;

    let mut report = Report::default();
    report.line("panels", basis.mesh.len());
    report.line("condition_estimate", format!("{:.3e}", basis.condition_estimate));
    report_lines(&mut report, &r);

    for cut in line_cuts(&basis, &drive, r.minimum, cut_half, cut_points).map_err(numerical)? {
        let mut t = Table::new(&["coord_m", "phi_eV"]);
        for (c, v) in cut.coords.iter().zip(&cut.phi_ev) {
            t.row(&[num(*c), num(*v)]);
        }
        out.write(&format!("linecut_{}.csv", cut.axis), &t.finish())?;
    }

    let labels = &basis.mesh.labels;
    let names: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    let mut header = vec!["electrode".to_string()];
    header.extend(names.iter().map(|n| format!("{n}_F")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut cap = Table::new(&header);
    for (name, row) in names.iter().zip(basis.capacitance_matrix()) {
        let mut cells = vec![name.clone()];
        cells.extend(row.iter().map(|c| num(*c)));
        cap.row(&cells);
    }
    out.write("capacitance.csv", &cap.finish())?;

    if flags.compensate {
        let comp = compensate_micromotion(&basis, &drive, &controls, &opts).map_err(numerical)?;
        report.line("compensation_rf_null_um", format!("{:.3},{:.3},{:.3}", comp.rf_null[0] * 1e6, comp.rf_null[1] * 1e6, comp.rf_null[2] * 1e6));
        for (label, dv) in &comp.deltas {
            report.line(&format!("compensation_delta_{label}_V"), format!("{dv:.6}"));
        }
        report.line("compensation_residual_before_V_per_m", format!("{:.4}", comp.residual_before));
        report.line("compensation_residual_after_V_per_m", format!("{:.6}", comp.residual_after));
        report.line("compensation_reduction", format!("{:.6}", comp.reduction()));
    }

    if let Some((search, weights)) = search {
        let opt = optimize_slot(&search, &weights).map_err(numerical)?;
        let mut t = Table::new(&["d1_mm", "d2_mm", "wx_Hz", "wy_Hz", "wz_Hz", "depth_eV", "axial_rf_residual_V_per_m", "objective"]);
        for e in &opt.trace {
            let f = e.frequencies.map(|f| f.map(Some)).unwrap_or([None; 3]);
            let o = |v: Option<f64>| v.map(num).unwrap_or_else(|| "nan".into());
            t.row(&[num(e.slot_length), num(e.cross_length), o(f[0]), o(f[1]), o(f[2]), o(e.depth_ev), o(e.axial_rf_residual), num(e.objective)]);
        }
        out.write("slot_trace.csv", &t.finish())?;
        let start = &opt.trace[0];
        let best = &opt.best_evaluation;
        let opt_line = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "nan".into());
        report.line("optimize_start_slot_length_mm", start.slot_length);
        report.line("optimize_start_cross_length_mm", start.cross_length);
        report.line("optimize_start_axial_rf_residual_V_per_m", opt_line(start.axial_rf_residual));
        report.line("optimize_start_objective", format!("{:.6e}", start.objective));
        report.line("optimize_best_slot_length_mm", format!("{:.6}", best.slot_length));
        report.line("optimize_best_cross_length_mm", format!("{:.6}", best.cross_length));
        report.line("optimize_best_axial_rf_residual_V_per_m", opt_line(best.axial_rf_residual));
        report.line("optimize_best_objective", format!("{:.6e}", best.objective));
        report.line("optimize_evaluations", opt.trace.len());
    }

    out.write("trap_report.txt", &report.finish())?;
    Ok(())
}
