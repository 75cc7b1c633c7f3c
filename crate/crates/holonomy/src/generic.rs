//! Torus elements and the genericity condition: no relation
//! `Σ λᵢθᵢ ∈ 2πℤ` with `λ ∈ {−1, 0, 1}ⁿ ∖ {0}`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;

use crate::matrix::block;

/// Distance from `x` to the nearest multiple of `2π`.
pub fn distance_to_lattice(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    r.min(TAU - r)
}

/// The angles of `m` when it lies within `tol` of the block-rotation form
/// `diag(R_θ₁, …, R_θₙ, 1)`; `None` otherwise.
pub fn torus_angles(m: &DMatrix<f64>, tol: f64) -> Option<Vec<f64>> {
    let size = m.nrows();
    if size.is_multiple_of(2) || !m.is_square() {
        return None;
    }
    let n = size / 2;
    let last = size - 1;
    for k in 0..last {
        if m[(k, last)].abs() > tol || m[(last, k)].abs() > tol {
            return None;
        }
    }
    if (m[(last, last)] - 1.0).abs() > tol {
        return None;
    }
    let mut angles = Vec::with_capacity(n);
    for i in 0..n {
        for j in 0..n {
            let (a, b, c, d) = block(m, i, j);
            if i != j {
                if a.abs().max(b.abs()).max(c.abs()).max(d.abs()) > tol {
                    return None;
                }
            } else {
                if (a - d).abs() > tol || (b + c).abs() > tol || (a.hypot(c) - 1.0).abs() > tol {
                    return None;
                }
                angles.push(c.atan2(a));
            }
        }
    }
    Some(angles)
}

/// Smallest `dist(Σ λᵢθᵢ, 2πℤ)` over all `λ ∈ {−1, 0, 1}ⁿ ∖ {0}`.
pub fn min_relation_defect(angles: &[f64]) -> f64 {
    let n = angles.len();
    let mut best = f64::INFINITY;
    let total = 3usize.pow(n as u32);
    for code in 1..total {
        let mut c = code;
        let mut sum = 0.0;
        for &t in angles {
            match c % 3 {
                1 => sum += t,
                2 => sum -= t,
                _ => {}
            }
            c /= 3;
        }
        best = best.min(distance_to_lattice(sum));
    }
    best
}

/// True when `m` is within `tol` of a torus element whose angles satisfy no
/// relation `Σ λᵢθᵢ ∈ 2πℤ` (each relation missed by more than `tol`).
pub fn is_generic_torus(m: &DMatrix<f64>, tol: f64) -> bool {
    torus_angles(m, tol).is_some_and(|a| min_relation_defect(&a) > tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::TorusElement;

    #[test]
    fn opposite_angles_are_not_generic() {
        let t = TorusElement {
            angles: vec![0.7, -0.7],
        }
        .to_matrix();
        assert!(!is_generic_torus(t.matrix(), 1e-9));
        let t = TorusElement {
            angles: vec![0.7, 1.9],
        }
        .to_matrix();
        assert!(is_generic_torus(t.matrix(), 1e-9));
    }

    #[test]
    fn lattice_distance() {
        assert!(distance_to_lattice(TAU * 3.0 + 1e-3) < 1.1e-3);
        assert!((distance_to_lattice(-0.5) - 0.5).abs() < 1e-15);
    }
}
