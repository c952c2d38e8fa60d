//! The gap polytope P(y) ⊂ R^{n−1} and its zonotope description.
//!
//! For y ∈ R^n_{>0}, P(y) is cut out by
//!
//!   y_{j+1} + … + y_{k−1} ≤ x_j + … + x_{k−1} ≤ y_j + … + y_k,   1 ≤ j < k ≤ n,
//!
//! and coincides with the zonotope Q(y) = w + Σ_j [0, 1] · y_j v_j where
//! w = (y_2, …, y_n), v_1 = e_1, v_j = e_j − e_{j−1}, v_n = −e_{n−1}.
//!
//! Indices in the public API are 1-based where they name a generator or a
//! parallelohedron, matching the usual notation; vectors are plain slices.

mod facets;
mod sampling;
mod volume;
mod zonotope;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use facets::{emit_geometry, facets, polytope_vertices, Facet, FacetSide, Geometry};
pub use sampling::{monte_carlo_volume, sample_point, sample_points, McVolume, SampleMode};
pub use volume::{
    elementary_symmetric, schur_bialternant, schur_volume, volume_formula,
    volume_parallelohedron, SchurVolume, VolumeRoute,
};
pub use zonotope::{an_generator_matrix, an_projection, Zonotope};

/// Absolute slack applied to every membership inequality.
pub const MEMBERSHIP_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolytopeError {
    #[error("y must have length at least 2, got {0}")]
    TooShort(usize),
    #[error("y_{index} = {value} is not strictly positive and finite")]
    NonPositive { index: usize, value: f64 },
    #[error("x has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("x_{index} is not finite")]
    NonFinite { index: usize },
    #[error("index {index} outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("y has repeated entries; both alternants vanish")]
    DegenerateDeterminant,
    #[error("vertex output is only available for n <= 3, got n = {0}")]
    UnsupportedDimension(usize),
}

/// Strictly positive gap vector y of length n ≥ 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct YVector(Vec<f64>);

impl YVector {
    pub fn new(y: &[f64]) -> Result<Self, PolytopeError> {
        if y.len() < 2 {
            return Err(PolytopeError::TooShort(y.len()));
        }
        if let Some((i, &v)) = y.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(PolytopeError::NonPositive { index: i + 1, value: v });
        }
        Ok(Self(y.to_vec()))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// y_j, 1-based.
    #[inline]
    pub fn at(&self, j: usize) -> f64 {
        self.0[j - 1]
    }

    /// Prefix sums P with P[i] = y_1 + … + y_i, P[0] = 0.
    pub(crate) fn prefix(&self) -> Vec<f64> {
        prefix_sums(&self.0)
    }

    /// Index of the smallest entry (1-based, first on ties) and of the
    /// smallest among the rest.
    pub fn two_smallest(&self) -> (usize, usize) {
        let argmin_excluding = |skip: Option<usize>| {
            let mut best = None;
            for (i, &v) in self.0.iter().enumerate() {
                if Some(i) == skip {
                    continue;
                }
                match best {
                    Some((_, bv)) if bv <= v => {}
                    _ => best = Some((i, v)),
                }
            }
            best.map(|(i, _)| i).unwrap_or(0)
        };
        let j0 = argmin_excluding(None);
        let k0 = argmin_excluding(Some(j0));
        (j0 + 1, k0 + 1)
    }
}

impl TryFrom<Vec<f64>> for YVector {
    type Error = PolytopeError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        YVector::new(&v)
    }
}

impl From<YVector> for Vec<f64> {
    fn from(y: YVector) -> Self {
        y.0
    }
}

/// A point x ∈ R^{n−1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XPoint(pub Vec<f64>);

impl XPoint {
    pub fn new(x: &[f64]) -> Result<Self, PolytopeError> {
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(PolytopeError::NonFinite { index: i + 1 });
        }
        Ok(Self(x.to_vec()))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn prefix_sums(v: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(v.len() + 1);
    let mut acc = 0.0;
    p.push(acc);
    for x in v {
        acc += x;
        p.push(acc);
    }
    p
}

fn check_len(x: &[f64], y: &YVector) -> Result<(), PolytopeError> {
    if x.len() + 1 != y.n() {
        return Err(PolytopeError::DimensionMismatch {
            expected: y.n() - 1,
            got: x.len(),
        });
    }
    Ok(())
}

/// Half-space test against the full double-inequality system.
pub fn member_system(x: &XPoint, y: &YVector) -> Result<bool, PolytopeError> {
    check_len(&x.0, y)?;
    Ok(member_system_unchecked(&x.0, &y.prefix(), MEMBERSHIP_SLACK))
}

/// Membership with precomputed y prefix sums; `x.len() + 2 == py.len()`.
#[inline]
pub(crate) fn member_system_unchecked(x: &[f64], py: &[f64], slack: f64) -> bool {
    let n = py.len() - 1;
    for j in 1..n {
        let mut s = 0.0;
        for k in (j + 1)..=n {
            s += x[k - 2];
            let lo = py[k - 1] - py[j];
            let hi = py[k] - py[j - 1];
            if s < lo - slack || s > hi + slack {
                return false;
            }
        }
    }
    true
}

/// Smallest signed distance of x to a bound of the inequality system:
/// positive inside, negative outside.
pub fn system_margin(x: &XPoint, y: &YVector) -> Result<f64, PolytopeError> {
    check_len(&x.0, y)?;
    let py = y.prefix();
    let n = y.n();
    let mut margin = f64::INFINITY;
    for j in 1..n {
        let mut s = 0.0;
        for k in (j + 1)..=n {
            s += x.0[k - 2];
            margin = margin.min(s - (py[k - 1] - py[j])).min((py[k] - py[j - 1]) - s);
        }
    }
    Ok(margin)
}

/// Coefficients of x in the zonotope basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Generator whose coefficient vanishes (1-based, smallest on ties).
    pub j0: usize,
    /// t_j for j = 1..n.
    pub t: Vec<f64>,
    /// 1-based generators whose t_j leaves [0, 1] beyond the slack.
    pub violations: Vec<usize>,
}

impl Decomposition {
    pub fn is_member(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scaled coefficients c_j = t_j y_j of one solution of x − w = Σ c_j v_j,
/// namely the one with c_n = 0.
pub(crate) fn raw_coefficients(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut c = vec![0.0; n];
    // x_i − w_i = c_i − c_{i+1}
    for i in (0..n - 1).rev() {
        c[i] = c[i + 1] + (x[i] - y[i + 1]);
    }
    c
}

/// Writes x − w in the generators and normalises so that min_j t_j y_j = 0.
pub fn decompose(x: &XPoint, y: &YVector) -> Result<Decomposition, PolytopeError> {
    check_len(&x.0, y)?;
    let mut c = raw_coefficients(&x.0, y.values());
    let (j0, cmin) = c
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    for v in c.iter_mut() {
        *v -= cmin;
    }
    c[j0] = 0.0;
    let violations = c
        .iter()
        .zip(y.values())
        .enumerate()
        .filter(|(_, (&cj, &yj))| cj < -MEMBERSHIP_SLACK || cj > yj + MEMBERSHIP_SLACK)
        .map(|(i, _)| i + 1)
        .collect();
    let t = c.iter().zip(y.values()).map(|(cj, yj)| cj / yj).collect();
    Ok(Decomposition {
        j0: j0 + 1,
        t,
        violations,
    })
}

/// Membership through the generator decomposition.
pub fn member_zonotope(x: &XPoint, y: &YVector) -> Result<bool, PolytopeError> {
    Ok(decompose(x, y)?.is_member())
}

/// Parallelohedra Q_j (1-based) that contain x, i.e. those j for which the
/// representation with t_j = 0 is valid.
pub fn cells_containing(x: &XPoint, y: &YVector) -> Result<Vec<usize>, PolytopeError> {
    check_len(&x.0, y)?;
    let c = raw_coefficients(&x.0, y.values());
    let cells = (0..y.n())
        .filter(|&j| {
            c.iter().zip(y.values()).all(|(ci, yi)| {
                let s = ci - c[j];
                s >= -MEMBERSHIP_SLACK && s <= yi + MEMBERSHIP_SLACK
            })
        })
        .map(|j| j + 1)
        .collect();
    Ok(cells)
}

/// w + Σ t_j y_j v_j.
pub fn point_from_t(t: &[f64], y: &YVector) -> Result<XPoint, PolytopeError> {
    if t.len() != y.n() {
        return Err(PolytopeError::DimensionMismatch {
            expected: y.n(),
            got: t.len(),
        });
    }
    let yv = y.values();
    let n = yv.len();
    let x = (0..n - 1)
        .map(|i| yv[i + 1] + t[i] * yv[i] - t[i + 1] * yv[i + 1])
        .collect();
    Ok(XPoint(x))
}

/// x'_j = y_j + y_{j+1} − x_j.
pub fn involution(x: &XPoint, y: &YVector) -> Result<XPoint, PolytopeError> {
    check_len(&x.0, y)?;
    let yv = y.values();
    Ok(XPoint(
        x.0.iter()
            .enumerate()
            .map(|(i, xi)| yv[i] + yv[i + 1] - xi)
            .collect(),
    ))
}

/// x_j + … + x_{k−1} through the t-representation:
/// t_j y_j + (y_{j+1} + … + y_{k−1}) + (1 − t_k) y_k.
pub fn row_sum_from_t(t: &[f64], y: &YVector, j: usize, k: usize) -> f64 {
    let inner: f64 = (j + 1..k).map(|i| y.at(i)).sum();
    t[j - 1] * y.at(j) + inner + (1.0 - t[k - 1]) * y.at(k)
}

/// Length of the median interval predicted from a t-representation of x:
/// the minimum over ordered pairs j ≠ k of t_j y_j + (1 − t_k) y_k, and of y_j.
pub fn median_length_from_t(t: &[f64], y: &YVector) -> f64 {
    let n = y.n();
    let mut best = f64::INFINITY;
    for j in 1..=n {
        for k in 1..=n {
            let v = if j == k {
                y.at(j)
            } else {
                t[j - 1] * y.at(j) + (1.0 - t[k - 1]) * y.at(k)
            };
            best = best.min(v);
        }
    }
    best
}

/// The shrunken cell Q*_{j0}: t_{j0} = 0 and t_j ∈ [1/4, 3/4] otherwise, where
/// y_{j0} is the smallest entry and y_{k0} the next smallest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QStarRegion {
    pub j0: usize,
    pub k0: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    y: YVector,
}

pub fn q_star_region(y: &YVector) -> QStarRegion {
    let (j0, k0) = y.two_smallest();
    QStarRegion {
        j0,
        k0,
        t_lo: 0.25,
        t_hi: 0.75,
        y: y.clone(),
    }
}

impl QStarRegion {
    pub fn volume(&self) -> f64 {
        let n = self.y.n();
        let prod: f64 = (1..=n).filter(|&k| k != self.j0).map(|k| self.y.at(k)).product();
        prod * 0.5_f64.powi(n as i32 - 1)
    }

    /// t-coordinates of x relative to the representation with t_{j0} = 0.
    pub fn coordinates(&self, x: &XPoint) -> Result<Vec<f64>, PolytopeError> {
        check_len(&x.0, &self.y)?;
        let c = raw_coefficients(&x.0, self.y.values());
        let base = c[self.j0 - 1];
        Ok(c.iter()
            .zip(self.y.values())
            .map(|(ci, yi)| (ci - base) / yi)
            .collect())
    }

    pub fn contains(&self, x: &XPoint) -> Result<bool, PolytopeError> {
        let t = self.coordinates(x)?;
        Ok(t.iter().enumerate().all(|(i, &tj)| {
            i + 1 == self.j0 || (tj >= self.t_lo - MEMBERSHIP_SLACK && tj <= self.t_hi + MEMBERSHIP_SLACK)
        }))
    }

    /// Point of the region from free coordinates s ∈ [0, 1]^{n−1}, mapped
    /// affinely onto [t_lo, t_hi] for every j ≠ j0.
    pub fn point(&self, s: &[f64]) -> Result<XPoint, PolytopeError> {
        let n = self.y.n();
        if s.len() + 1 != n {
            return Err(PolytopeError::DimensionMismatch {
                expected: n - 1,
                got: s.len(),
            });
        }
        let mut t = Vec::with_capacity(n);
        let mut it = s.iter();
        for j in 1..=n {
            if j == self.j0 {
                t.push(0.0);
            } else {
                let sj = it.next().copied().unwrap_or(0.0);
                t.push(self.t_lo + (self.t_hi - self.t_lo) * sj);
            }
        }
        point_from_t(&t, &self.y)
    }
}
