use std::collections::HashMap;
use std::path::Path;

use super::bem::BasisSet;
use super::characterize::{characterize_with, CharacterizeOptions, TrapReport};
use super::field::TrapDrive;
use super::geometry::TrapParams;
use super::TrapError;
use crate::optimize::{grid_scan, nelder_mead, Bounds, NelderMeadOptions};

/// Non-negative weights of the slot objective terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights {
    /// Weight on −ω_x·ω_y, in units of (2π·1 MHz)².
    pub frequency: f64,
    /// Weight on −depth (eV).
    pub depth: f64,
    /// Weight on the axial RF residual (kV/m).
    pub axial_residual: f64,
}

impl ObjectiveWeights {
    pub fn axial_only() -> Self {
        Self { frequency: 0.0, depth: 0.0, axial_residual: 1.0 }
    }
}

/// Search over slot length (d₁) and cross-arm length (d₂), both in mm.
#[derive(Debug, Clone)]
pub struct SlotSearch {
    pub start: TrapParams,
    pub slot_length_range: [f64; 2],
    pub cross_length_range: [f64; 2],
    pub drive: TrapDrive,
    /// Mesh edge (m).
    pub mesh_edge: f64,
    /// Grid pre-scan points per free axis.
    pub grid_points: usize,
    pub max_evals: usize,
    pub characterize: CharacterizeOptions,
}

impl SlotSearch {
    pub fn new(start: TrapParams, drive: TrapDrive) -> Self {
        Self {
            slot_length_range: [start.slot_length; 2],
            cross_length_range: [start.cross_length; 2],
            start,
            drive,
            mesh_edge: 0.2e-3,
            grid_points: 4,
            max_evals: 30,
            characterize: CharacterizeOptions::default().without_depth(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotEvaluation {
    pub slot_length: f64,
    pub cross_length: f64,
    /// None when the geometry did not trap.
    pub frequencies: Option<[f64; 3]>,
    pub depth_ev: Option<f64>,
    pub axial_rf_residual: Option<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct SlotOptimization {
    pub best: TrapParams,
    pub best_evaluation: SlotEvaluation,
    /// Every distinct evaluation in the order it was first requested.
    pub trace: Vec<SlotEvaluation>,
}

impl SlotOptimization {
    pub fn write_trace_csv(&self, path: &Path) -> Result<(), TrapError> {
        let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
        w.write_record(["d1_mm", "d2_mm", "wx_Hz", "wy_Hz", "wz_Hz", "depth_eV", "axial_rf_residual", "objective"]).map_err(csv_error)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.10e}")).unwrap_or_else(|| "nan".into());
        for e in &self.trace {
            let f = e.frequencies.map(|f| f.map(Some)).unwrap_or([None; 3]);
            w.write_record([
                format!("{:.6}", e.slot_length),
                format!("{:.6}", e.cross_length),
                opt(f[0]),
                opt(f[1]),
                opt(f[2]),
                opt(e.depth_ev),
                opt(e.axial_rf_residual),
                format!("{:.10e}", e.objective),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> TrapError {
    TrapError::Io(std::io::Error::other(e.to_string()))
}

/// Objective value of one report; lower is better.
pub fn slot_objective_terms(report: &TrapReport, weights: &ObjectiveWeights) -> f64 {
    let mhz = std::f64::consts::TAU * 1e6;
    let wx = std::f64::consts::TAU * report.frequencies[0] / mhz;
    let wy = std::f64::consts::TAU * report.frequencies[1] / mhz;
    let depth = report.depth().unwrap_or(0.0);
    -weights.frequency * wx * wy - weights.depth * depth + weights.axial_residual * report.axial_rf_residual / 1e3
}

/// Penalty for geometries that fail to build or to trap.
const FAILED: f64 = 1e6;

fn evaluate(search: &SlotSearch, weights: &ObjectiveWeights, slot_length: f64, cross_length: f64) -> SlotEvaluation {
    let params = TrapParams { slot_length, cross_length, ..search.start.clone() };
    let mut opts = search.characterize.clone();
    if weights.depth == 0.0 {
        opts.depth_directions = 0;
    }
    let report = BasisSet::for_trap(&params, search.mesh_edge).and_then(|b| characterize_with(&b, &search.drive, &opts));
    match report {
        Ok(r) => SlotEvaluation {
            slot_length,
            cross_length,
            frequencies: Some(r.frequencies),
            depth_ev: r.depth(),
            axial_rf_residual: Some(r.axial_rf_residual),
            objective: slot_objective_terms(&r, weights),
        },
        Err(_) => SlotEvaluation { slot_length, cross_length, frequencies: None, depth_ev: None, axial_rf_residual: None, objective: FAILED },
    }
}

/// Grid pre-scan followed by Nelder–Mead over (d₁, d₂).
pub fn optimize_slot(search: &SlotSearch, weights: &ObjectiveWeights) -> Result<SlotOptimization, TrapError> {
    for (name, w) in [("frequency", weights.frequency), ("depth", weights.depth), ("axial_residual", weights.axial_residual)] {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(TrapError::Input(format!("objective weight {name} must be non-negative")));
        }
    }
    let ranges = [search.slot_length_range, search.cross_length_range];
    if ranges.iter().any(|r| !(r[0] <= r[1])) {
        return Err(TrapError::Input("search ranges must satisfy lower <= upper".into()));
    }
    let bounds = Bounds::new(vec![ranges[0][0], ranges[1][0]], vec![ranges[0][1], ranges[1][1]]);

    let mut cache: HashMap<(u64, u64), usize> = HashMap::new();
    let mut trace: Vec<SlotEvaluation> = Vec::new();
    let mut objective = |p: &[f64]| -> f64 {
        // Round to 1 nm so the simplex and the grid share cache entries.
        let d1 = (p[0] * 1e6).round() / 1e6;
        let d2 = (p[1] * 1e6).round() / 1e6;
        let key = (d1.to_bits(), d2.to_bits());
        if let Some(&i) = cache.get(&key) {
            return trace[i].objective;
        }
        let e = evaluate(search, weights, d1, d2);
        let v = e.objective;
        cache.insert(key, trace.len());
        trace.push(e);
        v
    };

    let mut start = vec![search.start.slot_length, search.start.cross_length];
    bounds.reflect(&mut start);
    let start_value = objective(&start);
    let (grid_best, grid_value) = grid_scan(&mut objective, &bounds, search.grid_points);
    let x0 = if grid_value < start_value { grid_best } else { start };
    let nm = NelderMeadOptions { max_evals: search.max_evals, f_tol: 1e-6, x_tol: 1e-3, ..NelderMeadOptions::default() };
    nelder_mead(&mut objective, &x0, &bounds, &nm);

    let best_evaluation = trace
        .iter()
        .filter(|e| e.frequencies.is_some())
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .cloned()
        .ok_or_else(|| TrapError::Optimization("no evaluated geometry produced a trap".into()))?;
    let best = TrapParams { slot_length: best_evaluation.slot_length, cross_length: best_evaluation.cross_length, ..search.start.clone() };
    Ok(SlotOptimization { best, best_evaluation, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_rewards_frequency_and_depth() {
        let report = TrapReport {
            minimum: [0.0; 3],
            frequencies: [1e6, 2e6, 0.5e6],
            axes: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            depth_ev: Some(3.0),
            depth_scan_ev: Some(3.1),
            saddle: None,
            mathieu_q: [0.0; 3],
            mathieu_a: [0.0; 3],
            axial_rf_residual: 500.0,
            rf_field_at_minimum: 0.0,
            ion_height: 0.0,
            min_electrode_distance: None,
            warnings: vec![],
        };
        let w = ObjectiveWeights { frequency: 1.0, depth: 2.0, axial_residual: 4.0 };
        assert!((slot_objective_terms(&report, &w) - (-2.0 - 6.0 + 2.0)).abs() < 1e-12);
        assert_eq!(slot_objective_terms(&report, &ObjectiveWeights::axial_only()), 0.5);
    }

    #[test]
    fn negative_weights_are_rejected() {
        let search = SlotSearch::new(TrapParams::default(), TrapDrive::reference(1).unwrap());
        let w = ObjectiveWeights { frequency: -1.0, depth: 0.0, axial_residual: 0.0 };
        assert!(matches!(optimize_slot(&search, &w), Err(TrapError::Input(_))));
    }
}
