use std::collections::BTreeMap;

use nalgebra::Vector3;

use super::geometry::ElectrodeLabel;
use super::TrapError;
use crate::constants::{BARIUM_138_MASS, ELEMENTARY_CHARGE};

/// Potential (V) and its gradient (V/m) at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldValue {
    pub potential: f64,
    pub gradient: Vector3<f64>,
}

/// Anything that maps electrode voltages to a potential in space.
///
/// `sources` turns a voltage vector (ordered as `labels`) into the model's
/// internal representation, so several voltage sets can be evaluated in one
/// pass by `fields`. The optional anchor pins any distance-dependent
/// approximation so finite-difference stencils see one smooth function.
pub trait ElectrodeModel: Sync {
    fn labels(&self) -> &[ElectrodeLabel];
    fn sources(&self, voltages: &[f64]) -> Vec<f64>;
    fn fields(&self, sources: &[&[f64]], x: &Vector3<f64>, anchor: Option<&Vector3<f64>>, out: &mut [FieldValue]);

    fn is_exterior(&self, _x: &Vector3<f64>) -> bool {
        true
    }

    fn nearest_electrode_distance(&self, _x: &Vector3<f64>) -> Option<f64> {
        None
    }
}

/// Ideal linear quadrupole plus an axial DC quadrupole:
/// φ_RF = (x² − y²)/(2r₀²), φ_DC = (z² − (x² + y²)/2)/z₀².
#[derive(Debug, Clone)]
pub struct QuadrupoleFixture {
    pub r0: f64,
    pub z0: f64,
    labels: [ElectrodeLabel; 2],
}

impl QuadrupoleFixture {
    pub fn new(r0: f64, z0: f64) -> Self {
        Self { r0, z0, labels: [ElectrodeLabel::Rf, ElectrodeLabel::Dc(1)] }
    }
}

impl ElectrodeModel for QuadrupoleFixture {
    fn labels(&self) -> &[ElectrodeLabel] {
        &self.labels
    }

    fn sources(&self, voltages: &[f64]) -> Vec<f64> {
        voltages.to_vec()
    }

    fn fields(&self, sources: &[&[f64]], x: &Vector3<f64>, _anchor: Option<&Vector3<f64>>, out: &mut [FieldValue]) {
        let (r2, z2) = (self.r0 * self.r0, self.z0 * self.z0);
        for (o, s) in out.iter_mut().zip(sources) {
            let (u, v) = (s[0], s[1]);
            o.potential = u * (x.x * x.x - x.y * x.y) / (2.0 * r2) + v * (x.z * x.z - 0.5 * (x.x * x.x + x.y * x.y)) / z2;
            o.gradient = Vector3::new(u * x.x / r2 - v * x.x / z2, -u * x.y / r2 - v * x.y / z2, 2.0 * v * x.z / z2);
        }
    }
}

/// RF drive, static voltages and the trapped species.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapDrive {
    /// RF amplitude (V).
    pub rf_amplitude: f64,
    /// RF frequency Ω/2π (Hz).
    pub rf_frequency: f64,
    /// Static voltages (V); unlisted electrodes are grounded.
    pub dc: BTreeMap<ElectrodeLabel, f64>,
    /// Ion charge (C).
    pub charge: f64,
    /// Ion mass (kg).
    pub mass: f64,
    /// Uniform stray field (V/m) acting on the ion.
    pub stray_field: Vector3<f64>,
}

impl Default for TrapDrive {
    fn default() -> Self {
        Self {
            rf_amplitude: 0.0,
            rf_frequency: 16e6,
            dc: BTreeMap::new(),
            charge: ELEMENTARY_CHARGE,
            mass: BARIUM_138_MASS,
            stray_field: Vector3::zeros(),
        }
    }
}

impl TrapDrive {
    /// The three published operating points (1, 2 or 3) for ¹³⁸Ba⁺.
    pub fn reference(config: u8) -> Result<Self, TrapError> {
        let (rf, endcap, back) = match config {
            1 => (1000.0, 200.0, 82.0),
            2 => (1500.0, 300.0, 123.0),
            3 => (2000.0, 400.0, 164.0),
            _ => return Err(TrapError::Input(format!("reference configuration {config} does not exist (1-3)"))),
        };
        let mut dc = BTreeMap::new();
        for k in 1..=2 {
            dc.insert(ElectrodeLabel::Dc(k), endcap);
        }
        for k in 3..=6 {
            dc.insert(ElectrodeLabel::Dc(k), back);
        }
        Ok(Self { rf_amplitude: rf, dc, ..Self::default() })
    }

    pub fn validate(&self) -> Result<(), TrapError> {
        if !(self.rf_frequency > 0.0 && self.rf_frequency.is_finite()) {
            return Err(TrapError::Input(format!("RF frequency must be positive, got {}", self.rf_frequency)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(TrapError::Input(format!("ion mass must be positive, got {}", self.mass)));
        }
        if !self.charge.is_finite() || self.charge == 0.0 {
            return Err(TrapError::Input("ion charge must be nonzero".into()));
        }
        if !self.rf_amplitude.is_finite() || self.dc.values().any(|v| !v.is_finite()) {
            return Err(TrapError::Input("voltages must be finite".into()));
        }
        Ok(())
    }

    pub fn rf_angular_frequency(&self) -> f64 {
        std::f64::consts::TAU * self.rf_frequency
    }

    /// Pseudopotential prefactor: Φ_ps = coefficient · |∇φ_RF|² for a unit-volt φ_RF.
    pub fn pseudo_coefficient(&self) -> f64 {
        let w = self.rf_angular_frequency();
        (self.charge * self.rf_amplitude).powi(2) / (4.0 * self.mass * w * w)
    }
}

/// Total ion potential energy Φ = Φ_ps + Q·Σ Vᵢφᵢ − Q·E_s·x for a model and drive.
pub struct TrapPotential<'a> {
    model: &'a dyn ElectrodeModel,
    pub drive: TrapDrive,
    rf: Vec<f64>,
    dc: Vec<f64>,
}

impl<'a> TrapPotential<'a> {
    pub fn new(model: &'a dyn ElectrodeModel, drive: &TrapDrive) -> Result<Self, TrapError> {
        drive.validate()?;
        let labels = model.labels();
        let mut rf_v = vec![0.0; labels.len()];
        let Some(rf_index) = labels.iter().position(|&l| l == ElectrodeLabel::Rf) else {
            return Err(TrapError::Input("model has no RF electrode".into()));
        };
        rf_v[rf_index] = 1.0;
        let mut dc_v = vec![0.0; labels.len()];
        for (label, &v) in &drive.dc {
            match labels.iter().position(|l| l == label) {
                Some(i) if *label != ElectrodeLabel::Rf => dc_v[i] = v,
                Some(_) => return Err(TrapError::Input("RF electrode cannot carry a static voltage".into())),
                None => return Err(TrapError::Input(format!("electrode {label} is not part of the model"))),
            }
        }
        Ok(Self { model, drive: drive.clone(), rf: model.sources(&rf_v), dc: model.sources(&dc_v) })
    }

    pub fn model(&self) -> &'a dyn ElectrodeModel {
        self.model
    }

    /// Unit-volt RF field and static field at `x`.
    pub fn fields(&self, x: &Vector3<f64>, anchor: Option<&Vector3<f64>>) -> (FieldValue, FieldValue) {
        let mut out = [FieldValue::default(); 2];
        self.model.fields(&[&self.rf, &self.dc], x, anchor, &mut out);
        (out[0], out[1])
    }

    pub fn rf_field(&self, x: &Vector3<f64>, anchor: Option<&Vector3<f64>>) -> FieldValue {
        let mut out = [FieldValue::default()];
        self.model.fields(&[&self.rf], x, anchor, &mut out);
        out[0]
    }

    fn check(&self, x: &Vector3<f64>) -> Result<(), TrapError> {
        if self.model.is_exterior(x) {
            Ok(())
        } else {
            Err(TrapError::Domain { point: [x.x, x.y, x.z] })
        }
    }

    /// Pseudopotential energy (J).
    pub fn pseudopotential(&self, x: &Vector3<f64>, anchor: Option<&Vector3<f64>>) -> Result<f64, TrapError> {
        self.check(x)?;
        Ok(self.drive.pseudo_coefficient() * self.rf_field(x, anchor).gradient.norm_squared())
    }

    /// Total potential energy (J).
    pub fn total(&self, x: &Vector3<f64>, anchor: Option<&Vector3<f64>>) -> Result<f64, TrapError> {
        self.check(x)?;
        Ok(self.total_unchecked(x, anchor))
    }

    pub(crate) fn total_unchecked(&self, x: &Vector3<f64>, anchor: Option<&Vector3<f64>>) -> f64 {
        let (rf, dc) = self.fields(x, anchor);
        let q = self.drive.charge;
        self.drive.pseudo_coefficient() * rf.gradient.norm_squared() + q * dc.potential - q * self.drive.stray_field.dot(x)
    }

    pub fn is_exterior(&self, x: &Vector3<f64>) -> bool {
        self.model.is_exterior(x)
    }
}
