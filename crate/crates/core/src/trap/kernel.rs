//! Potential and field of a uniformly charged flat polygon.

use nalgebra::Vector3;

/// ∫ 1/|x − y| dA over a planar convex polygon and its gradient with
/// respect to `x`. Vertices must be ordered counter-clockwise about `normal`.
pub(crate) fn polygon_integral(
    x: &Vector3<f64>,
    vertices: &[Vector3<f64>],
    normal: &Vector3<f64>,
) -> (f64, Vector3<f64>) {
    let h = (x - vertices[0]).dot(normal);
    let abs_h = h.abs();
    let projected = x - normal * h;
    let mut potential = 0.0;
    let mut log_sum = Vector3::zeros();
    let mut solid = 0.0;
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let edge = b - a;
        let len = edge.norm();
        let l_hat = edge / len;
        let m_hat = l_hat.cross(normal);
        let p0 = (a - projected).dot(&m_hat);
        let l_minus = (a - projected).dot(&l_hat);
        let l_plus = (b - projected).dot(&l_hat);
        let r0_sq = p0 * p0 + h * h;
        let r_minus = (x - a).norm();
        let r_plus = (x - b).norm();
        let f = edge_log(r_plus, l_plus, r_minus, l_minus, r0_sq);
        potential += p0 * f;
        log_sum += m_hat * f;
        if p0.abs() > 1e-14 * len {
            solid += (p0 * l_plus).atan2(r0_sq + abs_h * r_plus) - (p0 * l_minus).atan2(r0_sq + abs_h * r_minus);
        }
    }
    potential -= abs_h * solid;
    let gradient = -log_sum - normal * (h.signum() * solid);
    (potential, gradient)
}

/// ln((R⁺ + l⁺)/(R⁻ + l⁻)), evaluated in the form that avoids cancellation.
fn edge_log(r_plus: f64, l_plus: f64, r_minus: f64, l_minus: f64, r0_sq: f64) -> f64 {
    if l_minus >= 0.0 || l_plus >= 0.0 {
        if l_minus >= 0.0 {
            return ((r_plus + l_plus) / (r_minus + l_minus)).ln();
        }
        // segment straddles the foot of the perpendicular
        if r0_sq == 0.0 {
            return 0.0;
        }
        return ((r_plus + l_plus) * (r_minus - l_minus) / r0_sq).ln();
    }
    if r0_sq == 0.0 && r_minus - l_minus == 0.0 {
        return 0.0;
    }
    ((r_minus - l_minus) / (r_plus - l_plus)).ln()
}
