use serde::{Deserialize, Serialize};

use super::zonotope::Zonotope;
use super::{PolytopeError, YVector};
use crate::numeric::{compensated_sum, determinant};

/// Σ_j ∏_{k≠j} y_k.
pub fn volume_formula(y: &YVector) -> f64 {
    let v = y.values();
    compensated_sum((0..v.len()).map(|j| {
        v.iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, x)| x)
            .product::<f64>()
    }))
}

/// |det| of the n − 1 generators other than g_j (1-based).
pub fn volume_parallelohedron(y: &YVector, j: usize) -> Result<f64, PolytopeError> {
    let n = y.n();
    if j == 0 || j > n {
        return Err(PolytopeError::IndexOutOfRange { index: j, n });
    }
    let z = Zonotope::new(y);
    let m: Vec<Vec<f64>> = z
        .generators
        .into_iter()
        .enumerate()
        .filter(|&(k, _)| k + 1 != j)
        .map(|(_, g)| g)
        .collect();
    Ok(determinant(&m).abs())
}

/// e_k(v) by the one-variable-at-a-time recurrence.
pub fn elementary_symmetric(v: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &x in v {
        for i in (1..=k.min(v.len())).rev() {
            e[i] += x * e[i - 1];
        }
    }
    e[k]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeRoute {
    Bialternant,
    DirectExpansion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchurVolume {
    pub value: f64,
    pub route: VolumeRoute,
}

/// s_{(1,…,1,0)}(y) = det(y_i^{a_j}) / det(y_i^{j − 1}) with a = (0, 2, 3, …, n).
///
/// The Vandermonde factor is divided out by row reduction rather than by a
/// floating-point quotient: subtracting row i from the rows below it and
/// dividing by y_k − y_i, repeatedly, turns row k of the numerator into the
/// divided differences of x^{a_j} at y_1, …, y_k, which are the complete
/// homogeneous polynomials h_{a_j − k + 1}(y_1, …, y_k). The denominator
/// becomes unit upper triangular, so the ratio is det[h_{a_j − k + 1}(y_1..y_k)].
/// The alternants themselves vanish on repeated entries, which is reported
/// as degenerate.
pub fn schur_bialternant(y: &YVector) -> Result<f64, PolytopeError> {
    let mut sorted = y.values().to_vec();
    // ascending nodes keep the divided differences well conditioned
    sorted.sort_by(|a, b| a.total_cmp(b));
    let v = &sorted;
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            if v[i] == v[j] {
                return Err(PolytopeError::DegenerateDeterminant);
            }
        }
    }
    let exps: Vec<usize> = std::iter::once(0).chain(2..=n).collect();
    // h[k][m] = h_m(y_1, …, y_{k+1}) for m ≤ n
    let mut h = vec![vec![0.0; n + 1]; n];
    for k in 0..n {
        h[k][0] = 1.0;
        for m in 1..=n {
            let prev = if k == 0 { 0.0 } else { h[k - 1][m] };
            h[k][m] = prev + v[k] * h[k][m - 1];
        }
    }
    let m: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            exps.iter()
                .map(|&a| if a >= k { h[k][a - k] } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(determinant(&m))
}

/// e_{n−1}(y) through the bialternant, or by direct expansion when y has
/// repeated entries.
pub fn schur_volume(y: &YVector) -> SchurVolume {
    match schur_bialternant(y) {
        Ok(value) => SchurVolume {
            value,
            route: VolumeRoute::Bialternant,
        },
        Err(_) => SchurVolume {
            value: elementary_symmetric(y.values(), y.n() - 1),
            route: VolumeRoute::DirectExpansion,
        },
    }
}
