use nalgebra::Vector3;

use super::lens::{conic_sag, polynomial_sag, LensPrescription};
use super::OpticsError;

const MM: f64 = 1e-3;
const NEWTON_TOLERANCE: f64 = 1e-12;
const NEWTON_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayStatus {
    Alive,
    MissedAperture,
    TotalInternalReflection,
}

/// Ray in metres; the emitter sits at the origin and the lens along +z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vector3<f64>,
    pub direction: Vector3<f64>,
    /// Accumulated optical path length (m).
    pub opl: f64,
    pub status: RayStatus,
}

impl Ray {
    pub fn new(origin: Vector3<f64>, direction: Vector3<f64>) -> Self {
        Self { origin, direction: direction.normalize(), opl: 0.0, status: RayStatus::Alive }
    }

    pub fn alive(&self) -> bool {
        self.status == RayStatus::Alive
    }

    /// Point at which the ray crosses the plane z = `z`.
    pub fn at_z(&self, z: f64) -> Vector3<f64> {
        self.origin + self.direction * ((z - self.origin.z) / self.direction.z)
    }
}

/// One refraction event, for auditing Snell's law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refraction {
    pub point: Vector3<f64>,
    /// Unit normal facing the incident side.
    pub normal: Vector3<f64>,
    pub incident: Vector3<f64>,
    pub refracted: Vector3<f64>,
    pub n_in: f64,
    pub n_out: f64,
}

/// Rotationally symmetric surface z = vertex + orientation·sag(r), in metres.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Surface {
    vertex: f64,
    curvature: f64,
    conic: f64,
    coefficients: [f64; 7],
    orientation: f64,
    semi_aperture: f64,
}

impl Surface {
    fn sag(&self, r: f64) -> Option<(f64, f64)> {
        let (z, dz) = conic_sag(self.curvature, self.conic, r)?;
        let (p, dp) = polynomial_sag(&self.coefficients, r);
        Some((z + p, dz + dp))
    }

    fn intersect(&self, ray: &Ray) -> Result<Option<(f64, Vector3<f64>)>, OpticsError> {
        let p = ray.origin;
        let d = ray.direction;
        if d.z.abs() < 1e-15 {
            return Ok(None);
        }
        let mut s = (self.vertex - p.z) / d.z;
        for _ in 0..NEWTON_ITERATIONS {
            let q = p + d * s;
            let r = q.x.hypot(q.y);
            let Some((sag, slope)) = self.sag(r) else {
                return Ok(None);
            };
            let h = q.z - self.vertex - self.orientation * sag;
            let dr = if r > 0.0 { (q.x * d.x + q.y * d.y) / r } else { 0.0 };
            let dh = d.z - self.orientation * slope * dr;
            if dh == 0.0 {
                break;
            }
            let step = h / dh;
            s -= step;
            if step.abs() < NEWTON_TOLERANCE {
                let q = p + d * s;
                if s < 0.0 || q.x.hypot(q.y) > self.semi_aperture {
                    return Ok(None);
                }
                let r = q.x.hypot(q.y);
                let (_, slope) = self.sag(r).ok_or(OpticsError::SagDomain { r_mm: r / MM })?;
                let (nx, ny) = if r > 0.0 {
                    (-self.orientation * slope * q.x / r, -self.orientation * slope * q.y / r)
                } else {
                    (0.0, 0.0)
                };
                return Ok(Some((s, Vector3::new(nx, ny, 1.0).normalize())));
            }
        }
        let q = p + d * s;
        Err(OpticsError::Intersection { last: [q.x, q.y, q.z] })
    }
}

fn surfaces(lens: &LensPrescription) -> [Surface; 2] {
    let back_vertex = lens.working_distance_mm * MM;
    let front_vertex = back_vertex + lens.center_thickness_mm * MM;
    let semi = lens.semi_aperture_mm() * MM;
    let mut coefficients = lens.asphere_coefficients;
    for (i, a) in coefficients.iter_mut().enumerate() {
        // mm^(1-2n) -> m^(1-2n)
        *a *= 10f64.powi(3 * (2 * (i as i32 + 2) - 1));
    }
    [
        Surface {
            vertex: back_vertex,
            curvature: 1.0 / (lens.back_radius_mm * MM),
            conic: lens.back_conic,
            coefficients: [0.0; 7],
            orientation: 1.0,
            semi_aperture: semi,
        },
        Surface {
            vertex: front_vertex,
            curvature: 1.0 / (lens.front_radius_mm * MM),
            conic: lens.conic,
            coefficients,
            orientation: -1.0,
            semi_aperture: semi,
        },
    ]
}

fn refract(d: &Vector3<f64>, normal: &Vector3<f64>, n1: f64, n2: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
    let n = if normal.dot(d) > 0.0 { -normal } else { *normal };
    let eta = n1 / n2;
    let cos_i = -n.dot(d);
    let k = 1.0 - eta * eta * (1.0 - cos_i * cos_i);
    if k < 0.0 {
        return None;
    }
    let t = d * eta + n * (eta * cos_i - k.sqrt());
    Some((t.normalize(), n))
}

/// Trace through both surfaces, in the order met by the ray (emitter side
/// first when travelling towards +z).
pub fn trace_ray_detailed(lens: &LensPrescription, ray: &Ray) -> Result<(Ray, Vec<Refraction>), OpticsError> {
    let mut out = *ray;
    let mut events = Vec::with_capacity(2);
    if !ray.alive() {
        return Ok((out, events));
    }
    let [back, front] = surfaces(lens);
    let order = if ray.direction.z > 0.0 { [back, front] } else { [front, back] };
    let media = [1.0, lens.index, 1.0];
    for (k, surface) in order.iter().enumerate() {
        let Some((s, normal)) = surface.intersect(&out)? else {
            out.status = RayStatus::MissedAperture;
            return Ok((out, events));
        };
        let point = out.origin + out.direction * s;
        out.opl += media[k] * s;
        out.origin = point;
        let Some((refracted, facing)) = refract(&out.direction, &normal, media[k], media[k + 1]) else {
            out.status = RayStatus::TotalInternalReflection;
            return Ok((out, events));
        };
        events.push(Refraction {
            point,
            normal: facing,
            incident: out.direction,
            refracted,
            n_in: media[k],
            n_out: media[k + 1],
        });
        out.direction = refracted;
    }
    Ok((out, events))
}

/// Trace a ray through the lens. The wavelength enters only through the
/// prescription's index, which is given at the design wavelength.
pub fn trace_ray(lens: &LensPrescription, ray: &Ray, wavelength: f64) -> Result<Ray, OpticsError> {
    if !(wavelength > 0.0) {
        return Err(OpticsError::Input(format!("wavelength must be positive, got {wavelength}")));
    }
    Ok(trace_ray_detailed(lens, ray)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EflReport {
    pub efl_mm: f64,
    /// Relative difference between the two paraxial heights.
    pub paraxial_residual: f64,
    /// Paraxial back focal distance from the emitter-side vertex.
    pub back_focal_mm: f64,
}

/// Reverse-traced collimated ray at height `h` (m): focal length and the
/// axis crossing measured from the emitter-side vertex.
fn collimated_probe(lens: &LensPrescription, h: f64) -> Result<(f64, f64, f64), OpticsError> {
    let start = (lens.working_distance_mm + lens.center_thickness_mm + 10.0) * MM;
    let ray = Ray::new(Vector3::new(h, 0.0, start), -Vector3::z());
    let (out, _) = trace_ray_detailed(lens, &ray)?;
    if !out.alive() || out.direction.x >= 0.0 {
        return Err(OpticsError::Paraxial(format!("probe at {:.3e} m does not converge to the axis", h)));
    }
    let slope = -out.direction.x / -out.direction.z;
    let s = -out.origin.x / out.direction.x;
    let crossing = out.origin.z + s * out.direction.z;
    let sin_angle = (out.direction.x.powi(2) + out.direction.y.powi(2)).sqrt();
    Ok((h / slope, lens.working_distance_mm * MM - crossing, sin_angle))
}

pub fn effective_focal_length(lens: &LensPrescription) -> Result<EflReport, OpticsError> {
    lens.validate()?;
    let h = 1e-3 * lens.clear_aperture_mm * MM;
    let (f1, _, _) = collimated_probe(lens, h)?;
    let (f2, bfd, _) = collimated_probe(lens, 0.5 * h)?;
    if !f2.is_finite() || f2 <= 0.0 {
        return Err(OpticsError::Paraxial("non-positive focal length".into()));
    }
    Ok(EflReport { efl_mm: f2 / MM, paraxial_residual: ((f1 - f2) / f2).abs(), back_focal_mm: bfd / MM })
}

/// Working distance seen by a reversed collimated beam: distance from the
/// emitter-side vertex to where rays converging at `na` cross the axis (mm).
pub fn working_distance(lens: &LensPrescription, na: f64) -> Result<f64, OpticsError> {
    lens.validate()?;
    if !(na > 0.0 && na < 1.0) {
        return Err(OpticsError::Input(format!("NA must lie in (0, 1), got {na}")));
    }
    let mut lo = 1e-3 * lens.clear_aperture_mm * MM;
    let mut hi = lens.semi_aperture_mm() * MM * (1.0 - 1e-9);
    if collimated_probe(lens, hi)?.2 < na {
        return Err(OpticsError::Input(format!("clear aperture does not reach NA {na}")));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if collimated_probe(lens, mid)?.2 < na {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(collimated_probe(lens, 0.5 * (lo + hi))?.1 / MM)
}
