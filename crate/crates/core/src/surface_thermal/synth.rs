use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{surface_stats, SurfaceError, SurfaceMap};

/// Number of random Fourier modes used for synthesis.
const MODES: usize = 768;

/// Node grid for synthesized maps: θ from 0 to `theta_max` inclusive,
/// φ uniformly over [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub theta_max: f64,
}

impl SurfaceGrid {
    /// One-degree grid covering a mirror of the given half-aperture.
    pub fn one_degree(theta_max: f64) -> Self {
        let n_theta = (theta_max.to_degrees().ceil() as usize).max(1) + 1;
        Self { n_theta, n_phi: 360, theta_max: (n_theta - 1) as f64 * PI / 180.0 }
    }

    fn spacing(&self) -> f64 {
        let dtheta = self.theta_max / (self.n_theta - 1) as f64;
        let dphi = TAU / self.n_phi as f64 * self.theta_max.min(PI / 2.0).sin();
        dtheta.max(dphi)
    }
}

/// Zero-mean Gaussian random field on the sphere with Gaussian correlation
/// exp(-d²/2ℓ²) in chord distance, rescaled to the requested area-weighted
/// rms. Built from random Fourier features of a 3D field restricted to the
/// unit sphere, which keeps the correlation isotropic.
pub fn synthesize_surface(
    rms_target_nm: f64,
    correlation_angle: f64,
    seed: u64,
    grid: SurfaceGrid,
) -> Result<SurfaceMap, SurfaceError> {
    if !(rms_target_nm >= 0.0) {
        return Err(SurfaceError::Grid(format!("rms target must be non-negative, got {rms_target_nm}")));
    }
    if !(correlation_angle > 0.0) {
        return Err(SurfaceError::Grid(format!("correlation angle must be positive, got {correlation_angle}")));
    }
    if grid.n_theta < 2 || grid.n_phi < 4 || !(grid.theta_max > 0.0) || grid.theta_max > PI {
        return Err(SurfaceError::Grid(format!("unusable grid {grid:?}")));
    }
    let samples = correlation_angle / grid.spacing();
    if samples < 4.0 {
        return Err(SurfaceError::Resolution { correlation: correlation_angle, samples });
    }

    let theta: Vec<f64> = (0..grid.n_theta)
        .map(|i| grid.theta_max * i as f64 / (grid.n_theta - 1) as f64)
        .collect();
    let phi: Vec<f64> = (0..grid.n_phi).map(|j| TAU * j as f64 / grid.n_phi as f64).collect();
    if rms_target_nm == 0.0 {
        return SurfaceMap::new(theta, phi, vec![0.0; grid.n_theta * grid.n_phi]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(Vector3<f64>, f64)> = (0..MODES)
        .map(|_| {
            let k = Vector3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            ) / correlation_angle;
            (k, rng.random_range(0.0..TAU))
        })
        .collect();

    let mut heights = Vec::with_capacity(grid.n_theta * grid.n_phi);
    for &t in &theta {
        let (st, ct) = t.sin_cos();
        for &p in &phi {
            let u = Vector3::new(st * p.cos(), st * p.sin(), ct);
            heights.push(modes.iter().map(|(k, psi)| (k.dot(&u) + psi).cos()).sum::<f64>());
        }
    }

    let raw = SurfaceMap::new(theta, phi, heights)?;
    let weights = raw.area_weights();
    let total: f64 = weights.iter().sum();
    let mean = raw.heights_nm().iter().zip(&weights).map(|(h, w)| h * w).sum::<f64>() / total;
    let centred: Vec<f64> = raw.heights_nm().iter().map(|h| h - mean).collect();
    let map = raw.with_heights(centred)?;
    let rms = surface_stats(&map)?.rms_nm;
    let scaled = map.heights_nm().iter().map(|h| h * rms_target_nm / rms).collect();
    map.with_heights(scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> SurfaceGrid {
        SurfaceGrid { n_theta: 46, n_phi: 180, theta_max: 1.4 }
    }

    #[test]
    fn zero_target_gives_flat_map() {
        let m = synthesize_surface(0.0, 0.2, 1, grid()).unwrap();
        assert!(m.heights_nm().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn deterministic_for_seed() {
        let a = synthesize_surface(18.1, 0.2, 42, grid()).unwrap();
        let b = synthesize_surface(18.1, 0.2, 42, grid()).unwrap();
        let c = synthesize_surface(18.1, 0.2, 43, grid()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn hits_rms_target() {
        let m = synthesize_surface(18.1, 0.2, 7, grid()).unwrap();
        let s = surface_stats(&m).unwrap();
        assert!((s.rms_nm - 18.1).abs() < 0.1, "{}", s.rms_nm);
        assert!(s.pv_nm > 3.0 * 18.1);
    }

    #[test]
    fn rejects_underresolved_correlation() {
        let r = synthesize_surface(10.0, 0.05, 1, grid());
        assert!(matches!(r, Err(SurfaceError::Resolution { .. })));
    }

    #[test]
    fn field_is_correlated_on_the_requested_scale() {
        let g = SurfaceGrid { n_theta: 91, n_phi: 360, theta_max: PI / 2.0 };
        let ell = 0.15;
        let np = g.n_phi;
        let shift = (ell / (TAU / np as f64)).round() as usize;
        let mut ratio = 0.0;
        for seed in 0..4 {
            let m = synthesize_surface(1.0, ell, seed, g).unwrap();
            let lag = |shift: usize| -> f64 {
                let h = m.heights_nm();
                let mut s = 0.0;
                for i in 80..91 {
                    for j in 0..np {
                        s += h[i * np + j] * h[i * np + (j + shift) % np];
                    }
                }
                s
            };
            ratio += lag(shift) / lag(0) / 4.0;
        }
        // separation of one correlation length along the equator
        assert!((ratio - (-0.5f64).exp()).abs() < 0.12, "{ratio}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn doubling_target_doubles_rms(seed in 0u64..1000, target in 1.0f64..50.0) {
            let a = surface_stats(&synthesize_surface(target, 0.25, seed, grid()).unwrap()).unwrap();
            let b = surface_stats(&synthesize_surface(2.0 * target, 0.25, seed, grid()).unwrap()).unwrap();
            prop_assert!((b.rms_nm / a.rms_nm - 2.0).abs() < 0.01);
        }
    }
}
