use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use super::TrapError;

/// Electrode names of the trap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElectrodeLabel {
    Rf,
    /// DC1, DC2 are the endcaps; DC3–DC6 sit on the back plane.
    Dc(u8),
    /// Front-plane grounds GR1–GR4.
    Gr(u8),
    /// Common ground: back-plane remainder and trench bottoms.
    Grb,
    Mirror,
    /// Unnamed electrode of a test fixture.
    Other(u8),
}

impl fmt::Display for ElectrodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElectrodeLabel::Rf => write!(f, "RF"),
            ElectrodeLabel::Dc(k) => write!(f, "DC{k}"),
            ElectrodeLabel::Gr(k) => write!(f, "GR{k}"),
            ElectrodeLabel::Grb => write!(f, "GRB"),
            ElectrodeLabel::Mirror => write!(f, "MIRROR"),
            ElectrodeLabel::Other(k) => write!(f, "E{k}"),
        }
    }
}

impl FromStr for ElectrodeLabel {
    type Err = TrapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        let numbered = |prefix: &str| upper.strip_prefix(prefix).and_then(|rest| rest.parse::<u8>().ok());
        match upper.as_str() {
            "RF" => return Ok(ElectrodeLabel::Rf),
            "GRB" => return Ok(ElectrodeLabel::Grb),
            "MIRROR" => return Ok(ElectrodeLabel::Mirror),
            _ => {}
        }
        if let Some(k) = numbered("DC").filter(|k| (1..=6).contains(k)) {
            return Ok(ElectrodeLabel::Dc(k));
        }
        if let Some(k) = numbered("GR").filter(|k| (1..=4).contains(k)) {
            return Ok(ElectrodeLabel::Gr(k));
        }
        if let Some(k) = numbered("E") {
            return Ok(ElectrodeLabel::Other(k));
        }
        Err(TrapError::Input(format!("unknown electrode label {s:?}")))
    }
}

/// Dimensions of the slotted trap, in mm.
///
/// Frame: the front plane is y = 0 with the mirror on the +y side and the
/// lens below; the slot is long along z, the ion chain axis. The substrate
/// is modelled as two conducting sheets (front and back plane) with trench
/// bottoms recessed into it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapParams {
    /// Half-extent of the substrate in x and z.
    pub substrate_half: f64,
    pub substrate_thickness: f64,
    /// Half-width of the slot along x (kept fixed during slot optimization).
    pub slot_half_x: f64,
    /// Full slot length along z (d₁).
    pub slot_length: f64,
    /// Full length along x of the crossbar of a cross-shaped slot (d₂);
    /// no crossbar when it does not exceed the slot width.
    pub cross_length: f64,
    /// Full width along z of the crossbar.
    pub cross_width: f64,
    pub ring_half_x: f64,
    pub ring_half_z: f64,
    pub trench_width: f64,
    pub trench_depth: f64,
    /// Half-width along x of the DC1/DC2 endcap strips.
    pub endcap_half_x: f64,
    /// Distance along z from the centre to the inner edge of each endcap.
    pub endcap_inner_z: f64,
    pub back_opening_half_x: f64,
    pub back_opening_half_z: f64,
    /// Outer half-extent of the DC3–DC6 quadrant block on the back plane.
    pub back_electrode_half_x: f64,
    pub back_electrode_half_z: f64,
    pub mirror: bool,
    pub mirror_radius: f64,
    pub mirror_half_angle_deg: f64,
    /// Height of the mirror's centre of curvature above the front plane.
    pub mirror_centre_height: f64,
}

impl Default for TrapParams {
    /// Dimensions fitted to the reference drive (config 1) frequencies,
    /// ion height and depth.
    fn default() -> Self {
        Self {
            substrate_half: 5.0,
            substrate_thickness: 0.568,
            slot_half_x: 0.352,
            slot_length: 2.787,
            cross_length: 0.0,
            cross_width: 0.6,
            ring_half_x: 0.636,
            ring_half_z: 1.495,
            trench_width: 0.1,
            trench_depth: 0.2,
            endcap_half_x: 1.042,
            endcap_inner_z: 1.782,
            back_opening_half_x: 0.470,
            back_opening_half_z: 2.390,
            back_electrode_half_x: 2.800,
            back_electrode_half_z: 2.800,
            mirror: true,
            mirror_radius: 12.5,
            mirror_half_angle_deg: 85.0,
            mirror_centre_height: 0.157,
        }
    }
}

impl TrapParams {
    /// Starting point of the slot optimization: two π-shaped RF electrodes
    /// facing each other leave a cross-shaped slot. The ring is widened so
    /// the crossbar fits inside it.
    pub fn cross_baseline() -> Self {
        let base = Self::default();
        Self { cross_length: 1.2, ring_half_x: base.ring_half_x.max(0.8), ..base }
    }

    pub fn is_cross(&self) -> bool {
        self.cross_length > 2.0 * self.slot_half_x
    }

    /// Half-extents of the slot's bounding box.
    pub fn slot_bounds(&self) -> (f64, f64) {
        if self.is_cross() {
            (0.5 * self.cross_length, (0.5 * self.slot_length).max(0.5 * self.cross_width))
        } else {
            (self.slot_half_x, 0.5 * self.slot_length)
        }
    }

    fn in_slot(&self, ax: f64, az: f64) -> bool {
        let channel = ax < self.slot_half_x && az < 0.5 * self.slot_length;
        channel || (self.is_cross() && ax < 0.5 * self.cross_length && az < 0.5 * self.cross_width)
    }

    pub fn validate(&self) -> Result<(), TrapError> {
        let named = [
            ("substrate_half", self.substrate_half),
            ("substrate_thickness", self.substrate_thickness),
            ("slot_half_x", self.slot_half_x),
            ("slot_length", self.slot_length),
            ("cross_width", self.cross_width),
            ("ring_half_x", self.ring_half_x),
            ("ring_half_z", self.ring_half_z),
            ("trench_width", self.trench_width),
            ("trench_depth", self.trench_depth),
            ("endcap_half_x", self.endcap_half_x),
            ("endcap_inner_z", self.endcap_inner_z),
            ("back_opening_half_x", self.back_opening_half_x),
            ("back_opening_half_z", self.back_opening_half_z),
            ("back_electrode_half_x", self.back_electrode_half_x),
            ("back_electrode_half_z", self.back_electrode_half_z),
            ("mirror_radius", self.mirror_radius),
            ("mirror_half_angle_deg", self.mirror_half_angle_deg),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TrapError::Geometry(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.cross_length >= 0.0) {
            return Err(TrapError::Geometry("cross_length must be non-negative".into()));
        }
        let g = self.trench_width;
        let (sx, sz) = self.slot_bounds();
        if sx >= self.ring_half_x || sz >= self.ring_half_z {
            return Err(TrapError::Geometry(format!(
                "slot ({sx} × {sz} mm half-extent) must fit inside the RF ring ({} × {} mm)",
                self.ring_half_x, self.ring_half_z
            )));
        }
        if self.endcap_inner_z < self.ring_half_z + 2.0 * g {
            return Err(TrapError::Geometry("endcaps overlap the RF ring and its trench".into()));
        }
        if self.endcap_half_x + g >= self.substrate_half || self.endcap_inner_z + g >= self.substrate_half {
            return Err(TrapError::Geometry("endcaps must lie inside the substrate".into()));
        }
        if self.ring_half_x + g >= self.substrate_half || self.ring_half_z + g >= self.substrate_half {
            return Err(TrapError::Geometry("RF ring must lie inside the substrate".into()));
        }
        if self.back_opening_half_x + g >= self.back_electrode_half_x
            || self.back_opening_half_z + g >= self.back_electrode_half_z
        {
            return Err(TrapError::Geometry("back opening must fit inside the DC3–DC6 block".into()));
        }
        if self.back_electrode_half_x + g >= self.substrate_half || self.back_electrode_half_z + g >= self.substrate_half
        {
            return Err(TrapError::Geometry("DC3–DC6 block must lie inside the substrate".into()));
        }
        if self.ring_half_x - sx <= g || self.ring_half_z - sz <= g {
            return Err(TrapError::Geometry("RF ring is narrower than the trench".into()));
        }
        if self.trench_depth >= self.substrate_thickness * 0.5 {
            return Err(TrapError::Geometry("trench depth must be below half the substrate thickness".into()));
        }
        if self.mirror_half_angle_deg >= 90.0 {
            return Err(TrapError::Geometry("mirror half-angle must be below 90°".into()));
        }
        let rim_y = self.mirror_centre_height + self.mirror_radius * self.mirror_half_angle_deg.to_radians().cos();
        if self.mirror && rim_y <= 0.0 {
            return Err(TrapError::Geometry("mirror rim reaches below the front plane".into()));
        }
        Ok(())
    }
}

/// What a point of a sheet belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Region {
    Electrode(ElectrodeLabel),
    /// Gap between electrodes; its grounded bottom is recessed.
    Trench,
    Open,
}

/// Axis-aligned rectangle in a plane y = const (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Patch {
    pub y: f64,
    pub x: [f64; 2],
    pub z: [f64; 2],
    pub label: ElectrodeLabel,
    /// +1 when the electrode faces +y, −1 otherwise.
    pub facing: f64,
}

impl Patch {
    pub fn area(&self) -> f64 {
        (self.x[1] - self.x[0]) * (self.z[1] - self.z[0])
    }
}

/// Spherical cap around +y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereCap {
    pub centre: [f64; 3],
    pub radius: f64,
    pub half_angle: f64,
    pub label: ElectrodeLabel,
}

/// Electrode patches built from the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectrodeSet {
    pub params: TrapParams,
    pub patches: Vec<Patch>,
    pub cap: Option<SphereCap>,
}

impl ElectrodeSet {
    pub fn labels(&self) -> Vec<ElectrodeLabel> {
        let mut labels: Vec<ElectrodeLabel> = self.patches.iter().map(|p| p.label).collect();
        if let Some(cap) = &self.cap {
            labels.push(cap.label);
        }
        labels.sort();
        labels.dedup();
        labels
    }

    pub fn area_mm2(&self) -> f64 {
        let cap = self
            .cap
            .map(|c| std::f64::consts::TAU * c.radius * c.radius * (1.0 - c.half_angle.cos()))
            .unwrap_or(0.0);
        self.patches.iter().map(Patch::area).sum::<f64>() + cap
    }

    /// Whether `p` (m) lies in free space rather than inside the substrate.
    pub fn is_exterior(&self, p: &Vector3<f64>) -> bool {
        let q = p * 1e3;
        let params = &self.params;
        let inside_footprint = q.x.abs() < params.substrate_half && q.z.abs() < params.substrate_half;
        if !inside_footprint || q.y > 0.0 || q.y < -params.substrate_thickness {
            return true;
        }
        params.in_slot(q.x.abs(), q.z.abs())
    }
}

/// Build the electrode layout. Each sheet is cut along every edge position
/// into a tensor grid; every cell is then classified as electrode, trench or
/// opening, so patches never overlap.
pub fn build_geometry(params: &TrapParams) -> Result<ElectrodeSet, TrapError> {
    params.validate()?;
    let p = params;
    let g = p.trench_width;
    let mut patches = Vec::new();

    let (sx, sz) = (p.slot_half_x, 0.5 * p.slot_length);
    let (cx, cz) = (0.5 * p.cross_length, 0.5 * p.cross_width);
    let front_x = [0.5 * g, sx, cx, p.ring_half_x, p.ring_half_x + g, p.endcap_half_x, p.endcap_half_x + g];
    let front_z = [0.5 * g, sz, cz, p.ring_half_z, p.ring_half_z + g, p.endcap_inner_z - g, p.endcap_inner_z];
    let front = |x: f64, z: f64| classify_front(p, x, z);
    sheet_patches(p, &front_x, &front_z, 0.0, 1.0, -p.trench_depth, &front, &mut patches);

    let back_x = [0.5 * g, p.back_opening_half_x, p.back_electrode_half_x, p.back_electrode_half_x + g];
    let back_z = [0.5 * g, p.back_opening_half_z, p.back_electrode_half_z, p.back_electrode_half_z + g];
    let back = |x: f64, z: f64| classify_back(p, x, z);
    let y_back = -p.substrate_thickness;
    sheet_patches(p, &back_x, &back_z, y_back, -1.0, y_back + p.trench_depth, &back, &mut patches);

    let cap = p.mirror.then(|| SphereCap {
        centre: [0.0, p.mirror_centre_height, 0.0],
        radius: p.mirror_radius,
        half_angle: p.mirror_half_angle_deg.to_radians(),
        label: ElectrodeLabel::Mirror,
    });
    Ok(ElectrodeSet { params: p.clone(), patches, cap })
}

#[allow(clippy::too_many_arguments)]
fn sheet_patches(
    p: &TrapParams,
    xs: &[f64],
    zs: &[f64],
    y: f64,
    facing: f64,
    trench_y: f64,
    classify: &dyn Fn(f64, f64) -> Region,
    out: &mut Vec<Patch>,
) {
    let bx = breakpoints(xs, p.substrate_half);
    let bz = breakpoints(zs, p.substrate_half);
    for zw in bz.windows(2) {
        for xw in bx.windows(2) {
            let (xm, zm) = (0.5 * (xw[0] + xw[1]), 0.5 * (zw[0] + zw[1]));
            let (label, y) = match classify(xm, zm) {
                Region::Open => continue,
                Region::Trench => (ElectrodeLabel::Grb, trench_y),
                Region::Electrode(label) => (label, y),
            };
            out.push(Patch { y, x: [xw[0], xw[1]], z: [zw[0], zw[1]], label, facing });
        }
    }
}

/// Sorted symmetric breakpoints inside [−half, half].
fn breakpoints(positive: &[f64], half: f64) -> Vec<f64> {
    let mut v: Vec<f64> = positive
        .iter()
        .filter(|&&x| x > 0.0 && x < half)
        .flat_map(|&x| [x, -x])
        .chain([half, -half])
        .collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    v
}

fn quadrant(x: f64, z: f64) -> u8 {
    match (x > 0.0, z > 0.0) {
        (true, true) => 1,
        (false, true) => 2,
        (true, false) => 3,
        (false, false) => 4,
    }
}

fn classify_front(p: &TrapParams, x: f64, z: f64) -> Region {
    let (ax, az) = (x.abs(), z.abs());
    let g = p.trench_width;
    if p.in_slot(ax, az) {
        return Region::Open;
    }
    if ax < p.ring_half_x && az < p.ring_half_z {
        return Region::Electrode(ElectrodeLabel::Rf);
    }
    if ax < p.ring_half_x + g && az < p.ring_half_z + g {
        return Region::Trench;
    }
    if az > p.endcap_inner_z && ax < p.endcap_half_x {
        return Region::Electrode(ElectrodeLabel::Dc(if z > 0.0 { 1 } else { 2 }));
    }
    if az > p.endcap_inner_z - g && ax < p.endcap_half_x + g {
        return Region::Trench;
    }
    if ax < 0.5 * g || az < 0.5 * g {
        return Region::Trench;
    }
    Region::Electrode(ElectrodeLabel::Gr(quadrant(x, z)))
}

fn classify_back(p: &TrapParams, x: f64, z: f64) -> Region {
    let (ax, az) = (x.abs(), z.abs());
    let g = p.trench_width;
    if ax < p.back_opening_half_x && az < p.back_opening_half_z {
        return Region::Open;
    }
    let (hx, hz) = (p.back_electrode_half_x, p.back_electrode_half_z);
    if ax < hx && az < hz {
        if ax < 0.5 * g || az < 0.5 * g {
            return Region::Trench;
        }
        return Region::Electrode(ElectrodeLabel::Dc(2 + quadrant(x, z)));
    }
    if ax < hx + g && az < hz + g {
        return Region::Trench;
    }
    Region::Electrode(ElectrodeLabel::Grb)
}
