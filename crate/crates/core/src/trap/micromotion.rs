use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use super::characterize::{characterize_with, CharacterizeOptions, Landscape};
use super::field::{ElectrodeModel, FieldValue, TrapDrive};
use super::geometry::ElectrodeLabel;
use super::TrapError;

type V3 = Vector3<f64>;

/// Static voltage corrections that move the trap minimum onto the RF null.
#[derive(Debug, Clone, PartialEq)]
pub struct Compensation {
    pub deltas: Vec<(ElectrodeLabel, f64)>,
    /// Point where the RF field vanishes (m).
    pub rf_null: [f64; 3],
    /// |U·∇φ_RF| at the uncompensated minimum (V/m).
    pub residual_before: f64,
    /// |U·∇φ_RF| at the compensated minimum (V/m).
    pub residual_after: f64,
    pub drive: TrapDrive,
}

impl Compensation {
    /// Fractional reduction of the RF field seen by the ion.
    pub fn reduction(&self) -> f64 {
        if self.residual_before > 0.0 {
            1.0 - self.residual_after / self.residual_before
        } else {
            1.0
        }
    }
}

/// Electrodes used for compensation unless told otherwise.
pub fn default_controls() -> Vec<ElectrodeLabel> {
    (3..=6).map(ElectrodeLabel::Dc).collect()
}

/// Locate the RF null by Gauss–Newton on ∇φ_RF = 0, starting at `start`.
fn rf_null(land: &Landscape<'_>, start: V3) -> Result<V3, TrapError> {
    let h = land.step;
    let mut x = start;
    for _ in 0..100 {
        let g = land.potential.rf_field(&x, Some(&x)).gradient;
        let mut jac = Matrix3::zeros();
        for j in 0..3 {
            let mut e = V3::zeros();
            e[j] = h;
            let col = (land.potential.rf_field(&(x + e), Some(&x)).gradient - land.potential.rf_field(&(x - e), Some(&x)).gradient) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let jac = (jac + jac.transpose()) * 0.5;
        // Least squares on the symmetric Jacobian: drop near-null curvatures
        // so a nodal line does not blow up the step.
        let eig = SymmetricEigen::new(jac);
        let scale = eig.eigenvalues.abs().max();
        let mut step = V3::zeros();
        for k in 0..3 {
            let lam = eig.eigenvalues[k];
            if lam.abs() > 1e-8 * scale {
                let v = eig.eigenvectors.column(k).into_owned();
                step -= v * (v.dot(&g) / lam);
            }
        }
        let n = step.norm();
        if n > 20e-6 {
            step *= 20e-6 / n;
        }
        x += step;
        if !land.potential.is_exterior(&x) {
            return Err(TrapError::Domain { point: [x.x, x.y, x.z] });
        }
        if step.norm() < 1e-11 {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Minimum-norm DC corrections on `controls` that cancel the net static
/// force at the RF null.
pub fn compensate_micromotion(
    model: &dyn ElectrodeModel,
    drive: &TrapDrive,
    controls: &[ElectrodeLabel],
    opts: &CharacterizeOptions,
) -> Result<Compensation, TrapError> {
    let opts = opts.clone().without_depth();
    let before = characterize_with(model, drive, &opts)?;
    let land = Landscape::new(model, drive, opts.fd_step)?;
    let null = rf_null(&land, V3::from(before.minimum))?;

    let labels = model.labels();
    let mut columns = Vec::with_capacity(controls.len());
    for label in controls {
        let Some(i) = labels.iter().position(|l| l == label) else {
            return Err(TrapError::Input(format!("control electrode {label} is not part of the model")));
        };
        let mut v = vec![0.0; labels.len()];
        v[i] = 1.0;
        let src = model.sources(&v);
        let mut out = [FieldValue::default()];
        model.fields(&[&src], &null, None, &mut out);
        columns.push(out[0].gradient);
    }
    let static_gradient = land.potential.fields(&null, None).1.gradient;
    let rhs = drive.stray_field - static_gradient;

    let a = nalgebra::Matrix3xX::from_columns(&columns);
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let rank_tol = 1e-6 * sigma_max;
    let u = svd.u.as_ref().expect("left singular vectors requested");
    if controls.len() < 3 || svd.singular_values.iter().filter(|&&s| s > rank_tol).count() < 3 {
        let weakest = if controls.len() < 3 {
            // Any direction orthogonal to the control columns.
            let span = columns.iter().fold(V3::zeros(), |acc, c| acc + c.normalize());
            span.cross(&V3::x()).try_normalize(1e-12).unwrap_or(V3::y())
        } else {
            let k = svd.singular_values.imin();
            u.column(k).into_owned()
        };
        return Err(TrapError::RankDeficient { direction: [weakest.x, weakest.y, weakest.z] });
    }
    let delta = svd.solve(&rhs, rank_tol).map_err(|e| TrapError::Input(e.to_string()))?;

    let mut compensated = drive.clone();
    let mut deltas = Vec::with_capacity(controls.len());
    for (label, d) in controls.iter().zip(delta.iter()) {
        *compensated.dc.entry(*label).or_insert(0.0) += d;
        deltas.push((*label, *d));
    }
    let after_opts = CharacterizeOptions::around([null.x, null.y, null.z], 20e-6).without_depth();
    let after = characterize_with(model, &compensated, &CharacterizeOptions { grid: [5, 5, 5], ..after_opts })?;
    Ok(Compensation {
        deltas,
        rf_null: [null.x, null.y, null.z],
        residual_before: before.rf_field_at_minimum,
        residual_after: after.rf_field_at_minimum,
        drive: compensated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Linear quadrupole whose static part is four independent pads.
    struct PadFixture {
        labels: Vec<ElectrodeLabel>,
    }

    impl PadFixture {
        fn new() -> Self {
            let mut labels = vec![ElectrodeLabel::Rf];
            labels.extend(default_controls());
            Self { labels }
        }
    }

    // Each pad adds a uniform field plus a shared axial curvature; the uniform
    // parts cancel for equal voltages.
    const PAD_FIELDS: [[f64; 3]; 4] = [[400.0, 300.0, 250.0], [-400.0, 300.0, -250.0], [400.0, -300.0, -250.0], [-400.0, -300.0, 250.0]];

    impl ElectrodeModel for PadFixture {
        fn labels(&self) -> &[ElectrodeLabel] {
            &self.labels
        }

        fn sources(&self, v: &[f64]) -> Vec<f64> {
            v.to_vec()
        }

        fn fields(&self, sources: &[&[f64]], x: &V3, _anchor: Option<&V3>, out: &mut [FieldValue]) {
            let r0 = 0.5e-3;
            let z0 = 1.5e-3;
            for (o, s) in out.iter_mut().zip(sources) {
                let mut phi = s[0] * (x.x * x.x - x.y * x.y) / (2.0 * r0 * r0);
                let mut g = V3::new(s[0] * x.x / (r0 * r0), -s[0] * x.y / (r0 * r0), 0.0);
                for (k, f) in PAD_FIELDS.iter().enumerate() {
                    let v = s[k + 1];
                    let f = V3::from(*f);
                    phi += v * (f.dot(x) + (x.z * x.z - 0.5 * (x.x * x.x + x.y * x.y)) / (z0 * z0));
                    g += (f + V3::new(-x.x / (z0 * z0), -x.y / (z0 * z0), 2.0 * x.z / (z0 * z0))) * v;
                }
                o.potential = phi;
                o.gradient = g;
            }
        }
    }

    fn drive(v: f64, stray: V3) -> TrapDrive {
        let mut d = TrapDrive { rf_amplitude: 400.0, rf_frequency: 20e6, stray_field: stray, ..TrapDrive::default() };
        for l in default_controls() {
            d.dc.insert(l, v);
        }
        d
    }

    fn opts() -> CharacterizeOptions {
        CharacterizeOptions::around([0.0; 3], 2e-4).without_depth()
    }

    #[test]
    fn each_stray_direction_is_compensated() {
        let model = PadFixture::new();
        for axis in 0..3 {
            let mut stray = V3::zeros();
            stray[axis] = 10.0;
            let c = compensate_micromotion(&model, &drive(2.5, stray), &default_controls(), &opts()).unwrap();
            if axis < 2 {
                assert!(c.residual_before > 1.0);
                assert!(c.reduction() >= 0.99, "axis {axis}: {c:?}");
            } else {
                // The fixture's RF null is a line along z.
                assert!(c.residual_after < 1e-6);
            }
            assert!(c.rf_null[0].abs() < 1e-9 && c.rf_null[1].abs() < 1e-9);
        }
    }

    #[test]
    fn balanced_pads_need_no_correction() {
        let model = PadFixture::new();
        let d = drive(1.0, V3::zeros());
        let c = compensate_micromotion(&model, &d, &default_controls(), &opts()).unwrap();
        assert!(c.deltas.iter().all(|(_, v)| v.abs() < 1e-3), "{c:?}");
    }

    #[test]
    fn too_few_controls_are_rank_deficient() {
        let model = PadFixture::new();
        let d = drive(2.5, V3::new(10.0, 0.0, 0.0));
        let controls = [ElectrodeLabel::Dc(3), ElectrodeLabel::Dc(4)];
        assert!(matches!(compensate_micromotion(&model, &d, &controls, &opts()), Err(TrapError::RankDeficient { .. })));
    }
}
