use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};

use super::field::{ElectrodeModel, TrapDrive, TrapPotential};
use super::TrapError;
use crate::constants::ELEMENTARY_CHARGE;

type V3 = Vector3<f64>;

#[derive(Debug, Clone)]
pub struct CharacterizeOptions {
    /// Seed search box corners (m).
    pub search_lower: [f64; 3],
    pub search_upper: [f64; 3],
    pub grid: [usize; 3],
    /// Finite-difference step (m).
    pub fd_step: f64,
    pub max_newton_step: f64,
    /// Escape directions for the depth scan; zero skips the depth.
    pub depth_directions: usize,
    /// Farthest escape distance probed (m).
    pub depth_range: f64,
    /// Half-length of the axial segment over which the RF residual is taken (m).
    pub chain_half_length: f64,
    /// Half-width of the 1-D cuts used for the quartic fit (m).
    pub fit_half_width: f64,
}

impl Default for CharacterizeOptions {
    fn default() -> Self {
        Self {
            search_lower: [-0.4e-3, 0.02e-3, -0.6e-3],
            search_upper: [0.4e-3, 1.0e-3, 0.6e-3],
            grid: [9, 15, 9],
            fd_step: 1e-6,
            max_newton_step: 20e-6,
            depth_directions: 200,
            depth_range: 2e-3,
            chain_half_length: 50e-6,
            fit_half_width: 50e-6,
        }
    }
}

impl CharacterizeOptions {
    /// Search a cube of half-width `half` (m) around `centre`.
    pub fn around(centre: [f64; 3], half: f64) -> Self {
        Self {
            search_lower: [centre[0] - half, centre[1] - half, centre[2] - half],
            search_upper: [centre[0] + half, centre[1] + half, centre[2] + half],
            ..Self::default()
        }
    }

    pub fn without_depth(mut self) -> Self {
        self.depth_directions = 0;
        self
    }
}

/// Result of a trap characterization; positions in m, frequencies in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapReport {
    pub minimum: [f64; 3],
    /// Secular frequencies ω/2π, ordered by the principal axis closest to x, y, z.
    pub frequencies: [f64; 3],
    /// Principal axes (unit vectors) matching `frequencies`.
    pub axes: [[f64; 3]; 3],
    /// Saddle-point depth (eV), if a saddle was located.
    pub depth_ev: Option<f64>,
    /// Lowest barrier found along straight escape rays (eV).
    pub depth_scan_ev: Option<f64>,
    pub saddle: Option<[f64; 3]>,
    pub mathieu_q: [f64; 3],
    pub mathieu_a: [f64; 3],
    /// |U·∂φ_RF/∂z| maximised over the chain segment (V/m).
    pub axial_rf_residual: f64,
    /// |U·∇φ_RF| at the minimum (V/m).
    pub rf_field_at_minimum: f64,
    pub ion_height: f64,
    pub min_electrode_distance: Option<f64>,
    pub warnings: Vec<String>,
}

impl TrapReport {
    /// Best available depth in eV.
    pub fn depth(&self) -> Option<f64> {
        self.depth_ev.or(self.depth_scan_ev)
    }
}

/// Potential energy in eV with finite-difference helpers.
pub(crate) struct Landscape<'a> {
    pub potential: TrapPotential<'a>,
    pub step: f64,
}

impl<'a> Landscape<'a> {
    pub fn new(model: &'a dyn ElectrodeModel, drive: &TrapDrive, step: f64) -> Result<Self, TrapError> {
        Ok(Self { potential: TrapPotential::new(model, drive)?, step })
    }

    pub fn value(&self, x: &V3, anchor: Option<&V3>) -> Option<f64> {
        self.potential.is_exterior(x).then(|| self.potential.total_unchecked(x, anchor) / ELEMENTARY_CHARGE)
    }

    fn value_or_err(&self, x: &V3, anchor: &V3) -> Result<f64, TrapError> {
        self.value(x, Some(anchor)).ok_or(TrapError::Domain { point: [x.x, x.y, x.z] })
    }

    pub fn gradient(&self, x: &V3) -> Result<V3, TrapError> {
        let h = self.step;
        let mut g = V3::zeros();
        for i in 0..3 {
            let e = unit(i) * h;
            g[i] = (self.value_or_err(&(x + e), x)? - self.value_or_err(&(x - e), x)?) / (2.0 * h);
        }
        Ok(g)
    }

    fn hessian_at_step(&self, x: &V3, h: f64) -> Result<Matrix3<f64>, TrapError> {
        let f = |p: V3| self.value_or_err(&p, x);
        let f0 = f(*x)?;
        let mut m = Matrix3::zeros();
        for i in 0..3 {
            let ei = unit(i) * h;
            m[(i, i)] = (f(x + ei)? - 2.0 * f0 + f(x - ei)?) / (h * h);
            for j in 0..i {
                let ej = unit(j) * h;
                let v = (f(x + ei + ej)? - f(x + ei - ej)? - f(x - ei + ej)? + f(x - ei - ej)?) / (4.0 * h * h);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }

    /// Richardson-extrapolated Hessian (eV/m²).
    pub fn hessian(&self, x: &V3) -> Result<Matrix3<f64>, TrapError> {
        let fine = self.hessian_at_step(x, self.step)?;
        let coarse = self.hessian_at_step(x, 2.0 * self.step)?;
        Ok((fine * 4.0 - coarse) / 3.0)
    }

    /// Newton iteration towards a stationary point. With `saddle` false the
    /// step is forced downhill along negative-curvature directions.
    pub fn newton(&self, start: V3, max_step: f64, saddle: bool, iterations: usize) -> Result<(V3, bool), TrapError> {
        let mut x = start;
        for _ in 0..iterations {
            let g = self.gradient(&x)?;
            let h = self.hessian_at_step(&x, self.step)?;
            let eig = SymmetricEigen::new(h);
            let scale = eig.eigenvalues.abs().max().max(f64::MIN_POSITIVE);
            let mut step = V3::zeros();
            for k in 0..3 {
                let v = eig.eigenvectors.column(k).into_owned();
                let lam = eig.eigenvalues[k];
                let floor = 1e-9 * scale;
                let denom = if saddle && lam < -floor { lam } else { lam.abs().max(floor) };
                step -= v * (v.dot(&g) / denom);
            }
            let n = step.norm();
            if n > max_step {
                step *= max_step / n;
            }
            let mut accepted = false;
            let f0 = self.value_or_err(&x, &x)?;
            let mut t = 1.0;
            for _ in 0..30 {
                let trial = x + step * t;
                if let Some(v) = self.value(&trial, Some(&x)) {
                    if saddle || v <= f0 + 1e-15 * f0.abs().max(1.0) {
                        x = trial;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                return Ok((x, step.norm() < 1e-9));
            }
            if (step * t).norm() < 1e-10 {
                return Ok((x, true));
            }
        }
        Ok((x, false))
    }
}

fn unit(i: usize) -> V3 {
    let mut e = V3::zeros();
    e[i] = 1.0;
    e
}

fn as_array(v: &V3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

pub fn characterize(model: &dyn ElectrodeModel, drive: &TrapDrive) -> Result<TrapReport, TrapError> {
    characterize_with(model, drive, &CharacterizeOptions::default())
}

pub fn characterize_with(model: &dyn ElectrodeModel, drive: &TrapDrive, opts: &CharacterizeOptions) -> Result<TrapReport, TrapError> {
    let land = Landscape::new(model, drive, opts.fd_step)?;
    let seed = grid_seed(&land, opts)?;
    let (x0, converged) = land.newton(seed, opts.max_newton_step, false, 200)?;
    let inside_box = (0..3).all(|i| x0[i] >= opts.search_lower[i] - 1e-9 && x0[i] <= opts.search_upper[i] + 1e-9);
    let hess = land.hessian(&x0)?;
    let eig = SymmetricEigen::new(hess);
    if !converged || !inside_box || eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(TrapError::NoTrap {
            summary: format!(
                "Newton from seed {:?} m ended at {:?} m (converged: {converged}, in search box: {inside_box}) with curvatures {:?} eV/m²",
                as_array(&seed),
                as_array(&x0),
                eig.eigenvalues.as_slice()
            ),
        });
    }

    let (axes, curvatures) = order_axes(&eig);
    let mass = drive.mass;
    let frequencies = curvatures.map(|k| (k * ELEMENTARY_CHARGE / mass).sqrt() / std::f64::consts::TAU);

    let (h_rf, h_dc) = potential_hessians(&land, &x0);
    let w = drive.rf_angular_frequency();
    let mut mathieu_q = [0.0; 3];
    let mut mathieu_a = [0.0; 3];
    for k in 0..3 {
        let e = axes[k];
        mathieu_q[k] = 2.0 * drive.charge * drive.rf_amplitude * e.dot(&(h_rf * e)) / (mass * w * w);
        mathieu_a[k] = 4.0 * drive.charge * e.dot(&(h_dc * e)) / (mass * w * w);
    }
    let mut warnings = Vec::new();
    for (k, q) in mathieu_q.iter().enumerate() {
        if q.abs() >= 0.908 {
            warnings.push(format!("|q| = {:.3} along axis {} is outside the first stability region", q.abs(), k));
        } else if q.abs() >= 0.4 {
            warnings.push(format!("|q| = {:.3} along axis {} exceeds 0.4; pseudopotential approximation is marginal", q.abs(), k));
        }
    }

    let rf0 = land.potential.rf_field(&x0, None);
    let (depth_ev, depth_scan_ev, saddle) = if opts.depth_directions > 0 {
        let f0 = land.value(&x0, None).unwrap_or(f64::NAN);
        let scan = escape_scan(&land, &x0, opts.depth_directions, opts.depth_range);
        match scan {
            Some((barrier, peak)) => {
                let saddle = find_saddle(&land, &x0, peak, f0);
                (saddle.map(|(_, v)| v - f0), Some(barrier - f0), saddle.map(|(p, _)| as_array(&p)))
            }
            None => (None, None, None),
        }
    } else {
        (None, None, None)
    };

    Ok(TrapReport {
        minimum: as_array(&x0),
        frequencies,
        axes: axes.map(|a| as_array(&a)),
        depth_ev,
        depth_scan_ev,
        saddle,
        mathieu_q,
        mathieu_a,
        axial_rf_residual: axial_rf_residual(model, drive, &x0, opts.chain_half_length)?,
        rf_field_at_minimum: drive.rf_amplitude.abs() * rf0.gradient.norm(),
        ion_height: x0.y,
        min_electrode_distance: model.nearest_electrode_distance(&x0),
        warnings,
    })
}

fn grid_seed(land: &Landscape<'_>, opts: &CharacterizeOptions) -> Result<V3, TrapError> {
    let axis = |i: usize| -> Vec<f64> {
        let (lo, hi, n) = (opts.search_lower[i], opts.search_upper[i], opts.grid[i]);
        if n < 2 || hi <= lo {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
        }
    };
    let (xs, ys, zs) = (axis(0), axis(1), axis(2));
    let mut best: Option<(V3, f64)> = None;
    let (mut lowest, mut highest, mut count) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for &x in &xs {
        for &y in &ys {
            for &z in &zs {
                let p = V3::new(x, y, z);
                if let Some(v) = land.value(&p, None) {
                    count += 1;
                    lowest = lowest.min(v);
                    highest = highest.max(v);
                    if best.is_none_or(|(_, b)| v < b) {
                        best = Some((p, v));
                    }
                }
            }
        }
    }
    best.map(|(p, _)| p).ok_or_else(|| TrapError::NoTrap {
        summary: format!("no free-space point in the search box ({count} samples, range {lowest:.3e}..{highest:.3e} eV)"),
    })
}

/// Assign each eigenvector to the coordinate it is most aligned with.
fn order_axes(eig: &SymmetricEigen<f64, nalgebra::U3>) -> ([V3; 3], [f64; 3]) {
    let mut axes = [V3::zeros(); 3];
    let mut curv = [0.0; 3];
    let mut taken = [false; 3];
    let mut order: Vec<(usize, usize, f64)> = Vec::new();
    for k in 0..3 {
        for c in 0..3 {
            order.push((k, c, eig.eigenvectors[(c, k)].abs()));
        }
    }
    order.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut used = [false; 3];
    for (k, c, _) in order {
        if used[k] || taken[c] {
            continue;
        }
        let mut v = eig.eigenvectors.column(k).into_owned();
        if v[c] < 0.0 {
            v = -v;
        }
        axes[c] = v;
        curv[c] = eig.eigenvalues[k];
        used[k] = true;
        taken[c] = true;
    }
    (axes, curv)
}

/// Hessians of the unit-volt RF potential and of the static potential (V/m²),
/// from differences of the analytic gradients.
fn potential_hessians(land: &Landscape<'_>, x: &V3) -> (Matrix3<f64>, Matrix3<f64>) {
    let h = land.step;
    let mut rf = Matrix3::zeros();
    let mut dc = Matrix3::zeros();
    for j in 0..3 {
        let e = unit(j) * h;
        let (rp, dp) = land.potential.fields(&(x + e), Some(x));
        let (rm, dm) = land.potential.fields(&(x - e), Some(x));
        let col_rf = (rp.gradient - rm.gradient) / (2.0 * h);
        let col_dc = (dp.gradient - dm.gradient) / (2.0 * h);
        rf.set_column(j, &col_rf);
        dc.set_column(j, &col_dc);
    }
    ((rf + rf.transpose()) * 0.5, (dc + dc.transpose()) * 0.5)
}

fn fibonacci_directions(n: usize) -> Vec<V3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - y * y).sqrt();
            let phi = golden * i as f64;
            V3::new(r * phi.cos(), y, r * phi.sin())
        })
        .collect()
}

/// Highest potential met along a straight ray from `x0`, refined around the
/// best sample; the ray ends at `range` or where it enters material.
fn ray_barrier(land: &Landscape<'_>, x0: &V3, dir: &V3, range: f64) -> (f64, V3) {
    const SAMPLES: usize = 80;
    let s_min: f64 = 2e-6;
    let ratio = (range / s_min).powf(1.0 / (SAMPLES - 1) as f64);
    let mut best = (f64::NEG_INFINITY, 0.0, 0usize);
    let mut s_values = Vec::with_capacity(SAMPLES);
    let mut s = s_min;
    for k in 0..SAMPLES {
        let p = x0 + dir * s;
        match land.value(&p, None) {
            Some(v) => {
                s_values.push(s);
                if v > best.0 {
                    best = (v, s, k);
                }
            }
            None => break,
        }
        s *= ratio;
    }
    let k = best.2;
    if k == 0 || k + 1 >= s_values.len() {
        return (best.0, x0 + dir * best.1);
    }
    let (mut a, mut b) = (s_values[k - 1], s_values[k + 1]);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let f = |t: f64| land.value(&(x0 + dir * t), None).unwrap_or(f64::NEG_INFINITY);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..25 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    let (s, v) = if fc > fd { (c, fc) } else { (d, fd) };
    if v > best.0 {
        (v, x0 + dir * s)
    } else {
        (best.0, x0 + dir * best.1)
    }
}

/// Lowest ray barrier over `n` directions: (barrier eV, location of the peak).
pub(crate) fn escape_scan(land: &Landscape<'_>, x0: &V3, n: usize, range: f64) -> Option<(f64, V3)> {
    use rayon::prelude::*;
    fibonacci_directions(n)
        .par_iter()
        .map(|d| ray_barrier(land, x0, d, range))
        .filter(|(v, _)| v.is_finite())
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

fn find_saddle(land: &Landscape<'_>, x0: &V3, start: V3, f0: f64) -> Option<(V3, f64)> {
    let max_step = 0.1 * (start - x0).norm().max(10e-6);
    let (p, converged) = land.newton(start, max_step, true, 60).ok()?;
    if !converged {
        return None;
    }
    let h = land.hessian(&p).ok()?;
    let negatives = SymmetricEigen::new(h).eigenvalues.iter().filter(|&&l| l < 0.0).count();
    let v = land.value(&p, None)?;
    (negatives == 1 && v > f0 && (p - x0).norm() > 1e-6).then_some((p, v))
}

/// max |U·∂φ_RF/∂z| over `x0 ± half_length·ẑ` (V/m).
pub fn axial_rf_residual(model: &dyn ElectrodeModel, drive: &TrapDrive, x0: &V3, half_length: f64) -> Result<f64, TrapError> {
    let pot = TrapPotential::new(model, drive)?;
    const POINTS: usize = 21;
    let mut worst: f64 = 0.0;
    for k in 0..POINTS {
        let s = -half_length + 2.0 * half_length * k as f64 / (POINTS - 1) as f64;
        let p = x0 + V3::z() * s;
        if !pot.is_exterior(&p) {
            return Err(TrapError::Domain { point: as_array(&p) });
        }
        worst = worst.max((drive.rf_amplitude * pot.rf_field(&p, None).gradient.z).abs());
    }
    Ok(worst)
}

/// Frequencies (Hz) from quartic fits of the potential along each principal
/// axis over ±`half_width`.
pub fn quartic_frequencies(model: &dyn ElectrodeModel, drive: &TrapDrive, report: &TrapReport, half_width: f64) -> Result<[f64; 3], TrapError> {
    let land = Landscape::new(model, drive, 1e-6)?;
    let x0 = V3::from(report.minimum);
    const POINTS: usize = 21;
    let mut out = [0.0; 3];
    for (k, axis) in report.axes.iter().enumerate() {
        let e = V3::from(*axis);
        let mut a = DMatrix::zeros(POINTS, 5);
        let mut b = DVector::zeros(POINTS);
        for i in 0..POINTS {
            let t = -1.0 + 2.0 * i as f64 / (POINTS - 1) as f64;
            let p = x0 + e * (t * half_width);
            b[i] = land.value_or_err(&p, &x0)?;
            for j in 0..5 {
                a[(i, j)] = t.powi(j as i32);
            }
        }
        let coeffs = a.svd(true, true).solve(&b, 1e-14).map_err(|e| TrapError::Input(e.to_string()))?;
        let curvature = 2.0 * coeffs[2] / (half_width * half_width);
        out[k] = (curvature.max(0.0) * ELEMENTARY_CHARGE / drive.mass).sqrt() / std::f64::consts::TAU;
    }
    Ok(out)
}

/// One-dimensional potential cut through the minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct LineCut {
    pub axis: char,
    /// Offset from the minimum along the axis (m).
    pub coords: Vec<f64>,
    /// Potential energy (eV); NaN inside material.
    pub phi_ev: Vec<f64>,
}

pub fn line_cuts(model: &dyn ElectrodeModel, drive: &TrapDrive, minimum: [f64; 3], half_range: f64, points: usize) -> Result<Vec<LineCut>, TrapError> {
    let land = Landscape::new(model, drive, 1e-6)?;
    let x0 = V3::from(minimum);
    let points = points.max(2);
    Ok(['x', 'y', 'z']
        .iter()
        .enumerate()
        .map(|(i, &axis)| {
            let coords: Vec<f64> = (0..points).map(|k| -half_range + 2.0 * half_range * k as f64 / (points - 1) as f64).collect();
            let phi_ev = coords.iter().map(|&s| land.value(&(x0 + unit(i) * s), None).unwrap_or(f64::NAN)).collect();
            LineCut { axis, coords, phi_ev }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap::field::QuadrupoleFixture;
    use crate::trap::geometry::ElectrodeLabel;

    fn fixture_drive(u: f64, v: f64) -> TrapDrive {
        let mut d = TrapDrive { rf_amplitude: u, rf_frequency: 20e6, ..TrapDrive::default() };
        d.dc.insert(ElectrodeLabel::Dc(1), v);
        d
    }

    #[test]
    fn quadrupole_fixture_matches_first_order_oracle() {
        let (r0, z0) = (0.5e-3, 1.5e-3);
        let fixture = QuadrupoleFixture::new(r0, z0);
        let drive = fixture_drive(400.0, 10.0);
        let opts = CharacterizeOptions { depth_directions: 0, ..CharacterizeOptions::around([3e-6, -2e-6, 5e-6], 1e-4) };
        let r = characterize_with(&fixture, &drive, &opts).unwrap();
        let (q, m, w) = (drive.charge, drive.mass, drive.rf_angular_frequency());
        let radial_ps = q * drive.rf_amplitude / (2f64.sqrt() * m * w * r0 * r0);
        let dc = q * 10.0 / (m * z0 * z0);
        let wr = (radial_ps * radial_ps - dc).sqrt() / std::f64::consts::TAU;
        let wz = (2.0 * dc).sqrt() / std::f64::consts::TAU;
        for (got, want) in r.frequencies.iter().zip([wr, wr, wz]) {
            assert!((got / want - 1.0).abs() < 5e-3, "{got} vs {want}");
        }
        assert!(V3::from(r.minimum).norm() < 1e-9);
        let q_oracle = 2.0 * q * drive.rf_amplitude / (m * w * w * r0 * r0);
        assert!((r.mathieu_q[0] / q_oracle - 1.0).abs() < 5e-3);
        assert!((r.mathieu_q[1] / q_oracle + 1.0).abs() < 5e-3);
        assert!(r.mathieu_q[2].abs() < 1e-6 * q_oracle);
        let a_oracle = 8.0 * q * 10.0 / (m * w * w * z0 * z0);
        assert!((r.mathieu_a[2] / a_oracle - 1.0).abs() < 5e-3);
        assert!(r.axial_rf_residual < 1e-9);
    }

    #[test]
    fn quartic_fit_agrees_with_hessian_for_fixture() {
        let fixture = QuadrupoleFixture::new(0.5e-3, 1.5e-3);
        let drive = fixture_drive(400.0, 10.0);
        let opts = CharacterizeOptions::around([0.0; 3], 1e-4).without_depth();
        let r = characterize_with(&fixture, &drive, &opts).unwrap();
        let fit = quartic_frequencies(&fixture, &drive, &r, 50e-6).unwrap();
        for (a, b) in fit.iter().zip(r.frequencies) {
            assert!((a / b - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn anti_trapping_voltage_is_rejected() {
        let fixture = QuadrupoleFixture::new(0.5e-3, 1.5e-3);
        let drive = fixture_drive(400.0, -10.0);
        let opts = CharacterizeOptions::around([0.0; 3], 1e-4).without_depth();
        assert!(matches!(characterize_with(&fixture, &drive, &opts), Err(TrapError::NoTrap { .. })));
    }

    #[test]
    fn line_cuts_are_centred() {
        let fixture = QuadrupoleFixture::new(0.5e-3, 1.5e-3);
        let drive = fixture_drive(400.0, 10.0);
        let cuts = line_cuts(&fixture, &drive, [0.0; 3], 1e-4, 11).unwrap();
        assert_eq!(cuts.len(), 3);
        for c in cuts {
            assert_eq!(c.phi_ev[5], 0.0);
            assert!((c.phi_ev[0] - c.phi_ev[10]).abs() < 1e-12);
        }
    }

    #[test]
    fn fibonacci_directions_are_unit_and_balanced() {
        let d = fibonacci_directions(500);
        let mean: V3 = d.iter().sum::<V3>() / 500.0;
        assert!(mean.norm() < 1e-2);
        assert!(d.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }
}
