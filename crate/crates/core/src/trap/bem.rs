use nalgebra::Vector3;
use rayon::prelude::*;

use super::field::{ElectrodeModel, FieldValue};
use super::geometry::{build_geometry, ElectrodeLabel, ElectrodeSet, TrapParams};
use super::kernel::polygon_integral;
use super::mesh::{mesh_electrodes, Panel, PanelMesh};
use super::TrapError;
use crate::constants::VACUUM_PERMITTIVITY;
use crate::linalg::{DenseMatrix, LuFactors};

/// Panels farther than this many diameters act as point charges.
pub const FAR_FIELD_DIAMETERS: f64 = 5.0;
const CONDITION_LIMIT: f64 = 1e12;

fn coulomb() -> f64 {
    1.0 / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY)
}

/// Charge densities of every electrode held at 1 V with the others grounded.
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub mesh: PanelMesh,
    /// Surface charge density (C/m²) per label, then per panel.
    pub charges: Vec<Vec<f64>>,
    pub condition_estimate: f64,
    domain: Option<ElectrodeSet>,
    near_sq: Vec<f64>,
}

/// ∫ 1/|x − y| dA over panel `p` and its gradient, exact or as a point
/// charge depending on the distance from `reference`.
fn panel_kernel(p: &Panel, near_sq: f64, x: &Vector3<f64>, reference: &Vector3<f64>) -> (f64, Vector3<f64>) {
    if (reference - p.centroid).norm_squared() < near_sq {
        polygon_integral(x, &p.vertices, &p.normal)
    } else {
        let d = x - p.centroid;
        let r2 = d.norm_squared();
        let r = r2.sqrt();
        (p.area / r, d * (-p.area / (r2 * r)))
    }
}

/// Collocation solve of the exterior Dirichlet problem, one right-hand side
/// per electrode.
pub fn solve_basis(mesh: PanelMesh) -> Result<BasisSet, TrapError> {
    if mesh.is_empty() {
        return Err(TrapError::Mesh("empty mesh".into()));
    }
    let n = mesh.len();
    let near_sq: Vec<f64> = mesh.panels.iter().map(|p| (FAR_FIELD_DIAMETERS * p.diameter).powi(2)).collect();
    let k = coulomb();
    let rows: Vec<Vec<f64>> = mesh
        .panels
        .par_iter()
        .map(|target| {
            let c = target.centroid;
            mesh.panels.iter().zip(&near_sq).map(|(p, &ns)| k * panel_kernel(p, ns, &c, &c).0).collect()
        })
        .collect();
    let mut a = DenseMatrix::zeros(n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            a.set(i, j, v);
        }
    }
    let lu = LuFactors::factor(a)?;
    let condition_estimate = lu.condition_estimate();
    if !(condition_estimate < CONDITION_LIMIT) {
        return Err(TrapError::IllConditioned { estimate: condition_estimate });
    }
    let charges = mesh
        .labels
        .par_iter()
        .enumerate()
        .map(|(e, _)| {
            let rhs: Vec<f64> = mesh.label_index.iter().map(|&l| if l == e { 1.0 } else { 0.0 }).collect();
            lu.solve(&rhs)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BasisSet { mesh, charges, condition_estimate, domain: None, near_sq })
}

impl BasisSet {
    /// Build, mesh and solve the trap described by `params` (mesh edge in m).
    pub fn for_trap(params: &TrapParams, target_edge: f64) -> Result<Self, TrapError> {
        let set = build_geometry(params)?;
        let mesh = mesh_electrodes(&set, target_edge)?;
        Ok(solve_basis(mesh)?.with_domain(set))
    }

    /// Restrict field evaluation to the free space around `set`.
    pub fn with_domain(mut self, set: ElectrodeSet) -> Self {
        self.domain = Some(set);
        self
    }

    pub fn domain(&self) -> Option<&ElectrodeSet> {
        self.domain.as_ref()
    }

    pub fn label_position(&self, label: ElectrodeLabel) -> Option<usize> {
        self.mesh.labels.iter().position(|&l| l == label)
    }

    /// Charge on electrode `a` when electrode `b` is at 1 V (F).
    pub fn capacitance_matrix(&self) -> Vec<Vec<f64>> {
        let m = self.mesh.labels.len();
        let mut c = vec![vec![0.0; m]; m];
        for (j, p) in self.mesh.panels.iter().enumerate() {
            let a = self.mesh.label_index[j];
            for (b, sigma) in self.charges.iter().enumerate() {
                c[a][b] += sigma[j] * p.area;
            }
        }
        c
    }

    pub fn total_charge(&self, sources: &[f64]) -> f64 {
        self.mesh.panels.iter().zip(sources).map(|(p, s)| p.area * s).sum()
    }

    /// Shortest distance from `x` to any panel (m).
    pub fn nearest_panel_distance(&self, x: &Vector3<f64>) -> f64 {
        self.mesh.panels.iter().map(|p| point_polygon_distance(x, p)).fold(f64::INFINITY, f64::min)
    }
}

impl ElectrodeModel for BasisSet {
    fn labels(&self) -> &[ElectrodeLabel] {
        &self.mesh.labels
    }

    fn sources(&self, voltages: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.mesh.len()];
        for (sigma, &v) in self.charges.iter().zip(voltages) {
            if v != 0.0 {
                for (o, s) in out.iter_mut().zip(sigma) {
                    *o += v * s;
                }
            }
        }
        out
    }

    fn fields(&self, sources: &[&[f64]], x: &Vector3<f64>, anchor: Option<&Vector3<f64>>, out: &mut [FieldValue]) {
        let reference = anchor.unwrap_or(x);
        for o in out.iter_mut() {
            *o = FieldValue::default();
        }
        for (j, (p, &ns)) in self.mesh.panels.iter().zip(&self.near_sq).enumerate() {
            let (phi, grad) = panel_kernel(p, ns, x, reference);
            for (o, s) in out.iter_mut().zip(sources) {
                o.potential += s[j] * phi;
                o.gradient += grad * s[j];
            }
        }
        let k = coulomb();
        for o in out.iter_mut() {
            o.potential *= k;
            o.gradient *= k;
        }
    }

    fn is_exterior(&self, x: &Vector3<f64>) -> bool {
        self.domain.as_ref().is_none_or(|d| d.is_exterior(x))
    }

    fn nearest_electrode_distance(&self, x: &Vector3<f64>) -> Option<f64> {
        Some(self.nearest_panel_distance(x))
    }
}

fn point_polygon_distance(x: &Vector3<f64>, p: &Panel) -> f64 {
    let h = (x - p.vertices[0]).dot(&p.normal);
    let q = x - p.normal * h;
    let n = p.vertices.len();
    let mut inside = true;
    let mut edge_dist = f64::INFINITY;
    for i in 0..n {
        let a = p.vertices[i];
        let b = p.vertices[(i + 1) % n];
        let e = b - a;
        if e.cross(&(q - a)).dot(&p.normal) < 0.0 {
            inside = false;
        }
        let t = ((x - a).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
        edge_dist = edge_dist.min((x - (a + e * t)).norm());
    }
    if inside {
        h.abs()
    } else {
        edge_dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap::mesh::{plate_mesh, sphere_mesh};
    use std::f64::consts::PI;

    #[test]
    fn isolated_sphere_capacitance() {
        let a = 0.01;
        let mesh = sphere_mesh(&Vector3::zeros(), a, a / 8.0, ElectrodeLabel::Other(0)).unwrap();
        let basis = solve_basis(mesh).unwrap();
        let c = basis.capacitance_matrix()[0][0];
        let exact = 4.0 * PI * VACUUM_PERMITTIVITY * a;
        assert!((c / exact - 1.0).abs() < 0.01, "{} vs {}", c, exact);
    }

    #[test]
    fn parallel_plates() {
        let (side, gap) = (0.01, 0.0001);
        let top = plate_mesh([0.0, side], [0.0, side], gap, 1.0, side / 24.0, ElectrodeLabel::Other(0)).unwrap();
        let bottom = plate_mesh([0.0, side], [0.0, side], 0.0, -1.0, side / 24.0, ElectrodeLabel::Other(1)).unwrap();
        let basis = solve_basis(top.merge(bottom)).unwrap();
        let sources = basis.sources(&[0.5, -0.5]);
        let q: f64 = basis.mesh.panels.iter().zip(&sources).filter(|(p, _)| p.centroid.y > 0.0).map(|(p, s)| p.area * s).sum();
        let exact = VACUUM_PERMITTIVITY * side * side / gap;
        assert!((q / exact - 1.0).abs() < 0.05, "{} vs {}", q, exact);
    }

    #[test]
    fn boundary_condition_holds_at_collocation_points() {
        let a = plate_mesh([0.0, 1e-3], [0.0, 1e-3], 0.0, 1.0, 2e-4, ElectrodeLabel::Other(0)).unwrap();
        let b = plate_mesh([2e-3, 3e-3], [0.0, 1e-3], 5e-4, 1.0, 2e-4, ElectrodeLabel::Other(1)).unwrap();
        let basis = solve_basis(a.merge(b)).unwrap();
        let src = basis.sources(&[1.0, 0.0]);
        let mut out = [FieldValue::default()];
        for (j, p) in basis.mesh.panels.iter().enumerate() {
            basis.fields(&[&src], &p.centroid, None, &mut out);
            let expected = if basis.mesh.label_index[j] == 0 { 1.0 } else { 0.0 };
            assert!((out[0].potential - expected).abs() < 1e-3);
        }
    }

    #[test]
    fn capacitance_matrix_is_symmetric() {
        let a = plate_mesh([0.0, 1e-3], [0.0, 1e-3], 0.0, 1.0, 1e-4, ElectrodeLabel::Other(0)).unwrap();
        let b = plate_mesh([1.5e-3, 2.0e-3], [0.0, 2e-3], 3e-4, 1.0, 1e-4, ElectrodeLabel::Other(1)).unwrap();
        let c = solve_basis(a.merge(b)).unwrap().capacitance_matrix();
        assert!(c[0][1] < 0.0 && c[0][0] > 0.0);
        assert!((c[0][1] / c[1][0] - 1.0).abs() < 0.01, "{c:?}");
    }

    #[test]
    fn potential_decays_far_away() {
        let a = plate_mesh([0.0, 1e-3], [0.0, 1e-3], 0.0, 1.0, 2.5e-4, ElectrodeLabel::Other(0)).unwrap();
        let basis = solve_basis(a).unwrap();
        let src = basis.sources(&[1.0]);
        let q = basis.total_charge(&src);
        let mut out = [FieldValue::default()];
        let x = Vector3::new(0.0, 1.0, 0.0);
        basis.fields(&[&src], &x, None, &mut out);
        assert!((out[0].potential / (coulomb() * q / x.norm()) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn distance_to_plate() {
        let a = plate_mesh([0.0, 1e-3], [0.0, 1e-3], 0.0, 1.0, 5e-4, ElectrodeLabel::Other(0)).unwrap();
        let basis = solve_basis(a).unwrap();
        let d = basis.nearest_panel_distance(&Vector3::new(0.5e-3, 2e-4, 0.5e-3));
        assert!((d - 2e-4).abs() < 1e-15);
        let d = basis.nearest_panel_distance(&Vector3::new(1.3e-3, 4e-4, 0.5e-3));
        assert!((d - 5e-4).abs() < 1e-15);
    }
}
