use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use super::geometry::{ElectrodeLabel, ElectrodeSet, Patch, SphereCap};
use super::TrapError;

const MM: f64 = 1e-3;
/// Distance (mm) over which the target edge grows by one unit away from the slot.
const GRADING_LENGTH: f64 = 0.5;

/// Flat triangle or quadrilateral carrying one electrode label.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    /// Vertices (m), counter-clockwise about `normal`.
    pub vertices: Vec<Vector3<f64>>,
    pub centroid: Vector3<f64>,
    pub area: f64,
    pub normal: Vector3<f64>,
    /// Largest vertex-to-vertex distance.
    pub diameter: f64,
    pub label: ElectrodeLabel,
}

impl Panel {
    /// Panel from vertices in any winding; `outward` picks the normal side.
    pub fn new(
        mut vertices: Vec<Vector3<f64>>,
        outward: &Vector3<f64>,
        label: ElectrodeLabel,
    ) -> Result<Self, TrapError> {
        if vertices.len() < 3 {
            return Err(TrapError::Mesh("panel needs at least three vertices".into()));
        }
        let n = vertices.len();
        // Newell normal: twice the vector area
        let mut area_vec = Vector3::zeros();
        for i in 0..n {
            area_vec += vertices[i].cross(&vertices[(i + 1) % n]);
        }
        let twice_area = area_vec.norm();
        let diameter = vertices
            .iter()
            .flat_map(|a| vertices.iter().map(move |b| (a - b).norm()))
            .fold(0.0, f64::max);
        if !(twice_area > 1e-12 * diameter * diameter) {
            return Err(TrapError::Mesh(format!("degenerate panel at {:?}", vertices[0])));
        }
        let mut normal = area_vec / twice_area;
        if normal.dot(outward) < 0.0 {
            vertices.reverse();
            normal = -normal;
        }
        let centroid = polygon_centroid(&vertices, &normal);
        Ok(Self { vertices, centroid, area: 0.5 * twice_area, normal, diameter, label })
    }
}

fn polygon_centroid(vertices: &[Vector3<f64>], normal: &Vector3<f64>) -> Vector3<f64> {
    let origin = vertices[0];
    let mut weighted = Vector3::zeros();
    let mut total = 0.0;
    for k in 1..vertices.len() - 1 {
        let (a, b) = (vertices[k] - origin, vertices[k + 1] - origin);
        let w = 0.5 * a.cross(&b).dot(normal);
        weighted += (a + b) * (w / 3.0);
        total += w;
    }
    origin + weighted / total
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelMesh {
    pub panels: Vec<Panel>,
    /// Distinct labels in sorted order.
    pub labels: Vec<ElectrodeLabel>,
    /// Index into `labels` for each panel.
    pub label_index: Vec<usize>,
}

impl PanelMesh {
    pub fn from_panels(panels: Vec<Panel>) -> Self {
        let mut labels: Vec<ElectrodeLabel> = panels.iter().map(|p| p.label).collect();
        labels.sort();
        labels.dedup();
        let label_index = panels.iter().map(|p| labels.binary_search(&p.label).unwrap_or(0)).collect();
        Self { panels, labels, label_index }
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    /// Total area (m²).
    pub fn area(&self) -> f64 {
        self.panels.iter().map(|p| p.area).sum()
    }

    pub fn area_of(&self, label: ElectrodeLabel) -> f64 {
        self.panels.iter().filter(|p| p.label == label).map(|p| p.area).sum()
    }

    pub fn merge(mut self, other: PanelMesh) -> Self {
        self.panels.extend(other.panels);
        Self::from_panels(self.panels)
    }

    /// Panel dump: `x1,y1,z1,…,x4,y4,z4,label` in metres; triangles repeat
    /// their last vertex.
    pub fn write_csv(&self, path: &Path) -> Result<(), TrapError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "x1_m,y1_m,z1_m,x2_m,y2_m,z2_m,x3_m,y3_m,z3_m,x4_m,y4_m,z4_m,label")?;
        for p in &self.panels {
            for k in 0..4 {
                let v = p.vertices[k.min(p.vertices.len() - 1)];
                write!(out, "{:e},{:e},{:e},", v.x, v.y, v.z)?;
            }
            writeln!(out, "{}", p.label)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Number of cells for `ratio` = length / target edge. Above four cells
/// the count is a multiple of a power of two, so halving the target edge
/// splits every cell in two.
pub(crate) fn cell_count(ratio: f64) -> usize {
    if ratio <= 1.0 {
        return 1;
    }
    let m = (ratio.log2().floor() as i32 - 2).max(0);
    let block = 2f64.powi(m);
    ((ratio / block - 1e-9).ceil() * block) as usize
}

fn subdivide(a: f64, b: f64, target: f64) -> Vec<f64> {
    let n = cell_count((b - a) / target);
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

/// Distance (mm) from the interval [a, b] to [−half, half].
fn gap_to(a: f64, b: f64, half: f64) -> f64 {
    if b < -half {
        -half - b
    } else if a > half {
        a - half
    } else {
        0.0
    }
}

/// Graded panel mesh: edges of `target_edge` (m) at the slot, growing
/// linearly with distance from it.
pub fn mesh_electrodes(set: &ElectrodeSet, target_edge: f64) -> Result<PanelMesh, TrapError> {
    if !(target_edge > 0.0) {
        return Err(TrapError::Mesh(format!("target edge must be positive, got {target_edge}")));
    }
    let h = target_edge / MM;
    let (slot_x, slot_z) = set.params.slot_bounds();
    let mut panels = Vec::new();
    for patch in &set.patches {
        let tx = h * (1.0 + gap_to(patch.x[0], patch.x[1], slot_x) / GRADING_LENGTH);
        let tz = h * (1.0 + gap_to(patch.z[0], patch.z[1], slot_z) / GRADING_LENGTH);
        mesh_patch(patch, tx, tz, &mut panels)?;
    }
    if let Some(cap) = &set.cap {
        // the mirror is far from the ion; twenty times coarser is plenty
        panels.extend(cap_panels(cap, 20.0 * target_edge)?);
    }
    Ok(PanelMesh::from_panels(panels))
}

fn mesh_patch(patch: &Patch, tx: f64, tz: f64, out: &mut Vec<Panel>) -> Result<(), TrapError> {
    let xs = subdivide(patch.x[0], patch.x[1], tx);
    let zs = subdivide(patch.z[0], patch.z[1], tz);
    let outward = Vector3::new(0.0, patch.facing, 0.0);
    let y = patch.y * MM;
    for zw in zs.windows(2) {
        for xw in xs.windows(2) {
            let v = vec![
                Vector3::new(xw[0] * MM, y, zw[0] * MM),
                Vector3::new(xw[1] * MM, y, zw[0] * MM),
                Vector3::new(xw[1] * MM, y, zw[1] * MM),
                Vector3::new(xw[0] * MM, y, zw[1] * MM),
            ];
            out.push(Panel::new(v, &outward, patch.label)?);
        }
    }
    Ok(())
}

/// Latitude–longitude facets of a spherical cap (all lengths in mm in
/// `cap`, `edge` in m). Facets between two latitudes are planar trapezoids.
fn cap_panels(cap: &SphereCap, edge: f64) -> Result<Vec<Panel>, TrapError> {
    let centre = Vector3::new(cap.centre[0], cap.centre[1], cap.centre[2]) * MM;
    let r = cap.radius * MM;
    sphere_zone(&centre, r, 0.0, cap.half_angle, edge, cap.label, &Vector3::y())
}

/// Facets of the zone of a sphere between polar angles `a0` and `a1`
/// measured from `axis` (which must be ±x̂, ±ŷ or ±ẑ). The facets are pushed
/// slightly outwards so their total area equals the zone area, which keeps
/// the area independent of the resolution.
fn sphere_zone(
    centre: &Vector3<f64>,
    radius: f64,
    a0: f64,
    a1: f64,
    edge: f64,
    label: ElectrodeLabel,
    axis: &Vector3<f64>,
) -> Result<Vec<Panel>, TrapError> {
    let n_alpha = ((radius * (a1 - a0) / edge).ceil() as usize).max(2);
    let n_beta = |al: f64, ah: f64| ((TAU * radius * (0.5 * (al + ah)).sin() / edge).ceil() as usize).max(6);
    let inscribed = sphere_facets(centre, radius, a0, a1, n_alpha, &n_beta, label, axis)?;
    let facet_area: f64 = inscribed.iter().map(|p| p.area).sum();
    let exact = TAU * radius * radius * (a0.cos() - a1.cos());
    sphere_facets(centre, radius * (exact / facet_area).sqrt(), a0, a1, n_alpha, &n_beta, label, axis)
}

#[allow(clippy::too_many_arguments)]
fn sphere_facets(
    centre: &Vector3<f64>,
    radius: f64,
    a0: f64,
    a1: f64,
    n_alpha: usize,
    n_beta: &dyn Fn(f64, f64) -> usize,
    label: ElectrodeLabel,
    axis: &Vector3<f64>,
) -> Result<Vec<Panel>, TrapError> {
    let u = if axis.x.abs() > 0.5 { Vector3::y() } else { Vector3::x() };
    let v = axis.cross(&u);
    let point = |alpha: f64, beta: f64| -> Vector3<f64> {
        centre + (axis * alpha.cos() + (u * beta.cos() + v * beta.sin()) * alpha.sin()) * radius
    };
    let mut panels = Vec::new();
    for i in 0..n_alpha {
        let (al, ah) = (a0 + (a1 - a0) * i as f64 / n_alpha as f64, a0 + (a1 - a0) * (i + 1) as f64 / n_alpha as f64);
        let n_beta = n_beta(al, ah);
        for j in 0..n_beta {
            let (bl, bh) = (TAU * j as f64 / n_beta as f64, TAU * (j + 1) as f64 / n_beta as f64);
            let mut verts = vec![point(al, bl), point(ah, bl), point(ah, bh), point(al, bh)];
            if al.sin() < 1e-12 {
                verts.remove(3);
            } else if ah.sin() < 1e-12 {
                verts.remove(2);
            }
            let mid = verts.iter().sum::<Vector3<f64>>() / verts.len() as f64;
            panels.push(Panel::new(verts, &(mid - centre), label)?);
        }
    }
    Ok(panels)
}

/// Closed sphere fixture.
pub fn sphere_mesh(centre: &Vector3<f64>, radius: f64, edge: f64, label: ElectrodeLabel) -> Result<PanelMesh, TrapError> {
    Ok(PanelMesh::from_panels(sphere_zone(centre, radius, 0.0, PI, edge, label, &Vector3::z())?))
}

/// Rectangular plate in the plane y = `y` (m), uniform cells of at most
/// `edge`, normal towards `facing`·ŷ.
pub fn plate_mesh(
    x: [f64; 2],
    z: [f64; 2],
    y: f64,
    facing: f64,
    edge: f64,
    label: ElectrodeLabel,
) -> Result<PanelMesh, TrapError> {
    let patch = Patch { y: y / MM, x: [x[0] / MM, x[1] / MM], z: [z[0] / MM, z[1] / MM], label, facing };
    let mut panels = Vec::new();
    mesh_patch(&patch, edge / MM, edge / MM, &mut panels)?;
    Ok(PanelMesh::from_panels(panels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap::geometry::{build_geometry, TrapParams};

    #[test]
    fn unit_plate_gives_hundred_quads() {
        let m = plate_mesh([0.0, 1.0], [0.0, 1.0], 0.0, 1.0, 0.1, ElectrodeLabel::Other(0)).unwrap();
        assert_eq!(m.len(), 100);
        assert!((m.area() - 1.0).abs() < 1e-12);
        assert!(m.panels.iter().all(|p| (p.normal - Vector3::y()).norm() < 1e-12));
    }

    #[test]
    fn halving_nests_cells() {
        for ratio in [4.0, 5.3, 9.7, 10.0, 23.1] {
            let (a, b) = (cell_count(ratio), cell_count(2.0 * ratio));
            assert_eq!(b, 2 * a, "ratio {ratio}");
            assert!(a as f64 >= ratio && (a as f64) < 1.3 * ratio + 1.0);
        }
        let coarse = subdivide(0.0, 1.0, 0.1);
        let fine = subdivide(0.0, 1.0, 0.05);
        assert!(coarse.iter().all(|c| fine.iter().any(|f| (f - c).abs() < 1e-12)));
    }

    #[test]
    fn trap_area_is_mesh_independent() {
        let set = build_geometry(&TrapParams::default()).unwrap();
        let coarse = mesh_electrodes(&set, 0.4e-3).unwrap();
        let fine = mesh_electrodes(&set, 0.2e-3).unwrap();
        assert!(fine.len() > coarse.len());
        let planar = |m: &PanelMesh| m.area() - m.area_of(ElectrodeLabel::Mirror);
        assert!((planar(&coarse) / planar(&fine) - 1.0).abs() < 1e-3);
        assert!((planar(&fine) - set.area_mm2() * 1e-6 + cap_area(&set)).abs() < 1e-12);
        assert!((coarse.area() / fine.area() - 1.0).abs() < 1e-3);
    }

    fn cap_area(set: &ElectrodeSet) -> f64 {
        let c = set.cap.unwrap();
        TAU * c.radius * c.radius * (1.0 - c.half_angle.cos()) * 1e-6
    }

    #[test]
    fn mesh_is_finer_near_slot() {
        let set = build_geometry(&TrapParams::default()).unwrap();
        let mesh = mesh_electrodes(&set, 0.2e-3).unwrap();
        let near = mesh.panels.iter().filter(|p| p.centroid.norm() < 0.5e-3).map(|p| p.diameter).fold(0.0, f64::max);
        let far = mesh.panels.iter().filter(|p| p.centroid.x.abs() > 4.0e-3 && p.label != ElectrodeLabel::Mirror);
        let far = far.map(|p| p.diameter).fold(0.0, f64::max);
        assert!(near <= 0.2e-3 * 2f64.sqrt() + 1e-12);
        assert!(far > 2.0 * near);
    }

    #[test]
    fn sphere_area_converges() {
        let m = sphere_mesh(&Vector3::zeros(), 1.0, 0.1, ElectrodeLabel::Other(0)).unwrap();
        assert!((m.area() / (4.0 * PI) - 1.0).abs() < 1e-12, "{}", m.area());
        for p in &m.panels {
            assert!((p.normal.norm() - 1.0).abs() < 1e-12);
            assert!(p.normal.dot(&p.centroid) > 0.0);
        }
    }

    #[test]
    fn degenerate_panel_is_rejected() {
        let v = vec![Vector3::zeros(), Vector3::x(), Vector3::x() * 2.0];
        assert!(Panel::new(v, &Vector3::z(), ElectrodeLabel::Rf).is_err());
    }

    #[test]
    fn panel_dump_has_one_row_per_panel() {
        let m = plate_mesh([0.0, 1.0], [0.0, 1.0], 0.0, 1.0, 0.5, ElectrodeLabel::Rf).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("panels.csv");
        m.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().nth(1).unwrap().ends_with(",RF"));
    }
}
