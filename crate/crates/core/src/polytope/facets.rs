use serde::{Deserialize, Serialize};

use super::zonotope::Zonotope;
use super::{member_system_unchecked, point_from_t, PolytopeError, YVector, MEMBERSHIP_SLACK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FacetSide {
    /// The polytope lies in normal · x ≥ offset.
    Lower,
    /// The polytope lies in normal · x ≤ offset.
    Upper,
}

/// Hyperplane x_{j0} + … + x_{k0−1} = offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub j0: usize,
    pub k0: usize,
    pub normal: Vec<f64>,
    #[serde(rename = "offsetValue")]
    pub offset_value: f64,
    pub side: FacetSide,
}

impl Facet {
    /// A relative-interior point, given in t-coordinates: on the lower facet
    /// t_{j0} = 0 and t_{k0} = 1, on the upper facet the reverse, all other
    /// t_j = 1/2.
    pub fn midpoint_t(&self, n: usize) -> Vec<f64> {
        let mut t = vec![0.5; n];
        let (a, b) = match self.side {
            FacetSide::Lower => (0.0, 1.0),
            FacetSide::Upper => (1.0, 0.0),
        };
        t[self.j0 - 1] = a;
        t[self.k0 - 1] = b;
        t
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// The n(n − 1) facets, lower then upper for each pair j0 < k0.
pub fn facets(y: &YVector) -> Vec<Facet> {
    let n = y.n();
    let p = y.prefix();
    let mut out = Vec::with_capacity(n * (n - 1));
    for j0 in 1..n {
        for k0 in j0 + 1..=n {
            let normal: Vec<f64> = (1..n)
                .map(|i| if (j0..k0).contains(&i) { 1.0 } else { 0.0 })
                .collect();
            out.push(Facet {
                j0,
                k0,
                normal: normal.clone(),
                offset_value: p[k0 - 1] - p[j0],
                side: FacetSide::Lower,
            });
            out.push(Facet {
                j0,
                k0,
                normal,
                offset_value: p[k0] - p[j0 - 1],
                side: FacetSide::Upper,
            });
        }
    }
    out
}

/// Vertices for n = 2 (segment) and n = 3 (hexagon, counter-clockwise).
pub fn polytope_vertices(y: &YVector) -> Result<Vec<Vec<f64>>, PolytopeError> {
    match y.n() {
        2 => Ok(vec![vec![0.0], vec![y.at(1) + y.at(2)]]),
        3 => Ok(hexagon(y)),
        n => Err(PolytopeError::UnsupportedDimension(n)),
    }
}

fn hexagon(y: &YVector) -> Vec<Vec<f64>> {
    let fs = facets(y);
    let py = y.prefix();
    let mut pts: Vec<[f64; 2]> = Vec::new();
    for (i, a) in fs.iter().enumerate() {
        for b in &fs[i + 1..] {
            let det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0];
            if det == 0.0 {
                continue;
            }
            let x0 = (a.offset_value * b.normal[1] - a.normal[1] * b.offset_value) / det;
            let x1 = (a.normal[0] * b.offset_value - a.offset_value * b.normal[0]) / det;
            if !member_system_unchecked(&[x0, x1], &py, MEMBERSHIP_SLACK) {
                continue;
            }
            let scale = 1.0 + x0.abs() + x1.abs();
            if !pts
                .iter()
                .any(|p| (p[0] - x0).abs() <= 1e-12 * scale && (p[1] - x1).abs() <= 1e-12 * scale)
            {
                pts.push([x0, x1]);
            }
        }
    }
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
    pts.sort_by(|a, b| {
        let ta = (a[1] - cy).atan2(a[0] - cx);
        let tb = (b[1] - cy).atan2(b[0] - cx);
        ta.total_cmp(&tb)
    });
    pts.into_iter().map(|p| p.to_vec()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub n: usize,
    pub y: Vec<f64>,
    pub offset: Vec<f64>,
    pub generators: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    /// Corners of Q_1, Q_2, Q_3 for n = 3.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallelograms: Option<Vec<Vec<Vec<f64>>>>,
}

/// Offset, generators and facets; vertices and cells when n ≤ 3.
pub fn emit_geometry(y: &YVector) -> Geometry {
    let z = Zonotope::new(y);
    let n = y.n();
    let parallelograms = (n == 3).then(|| {
        (1..=3)
            .map(|j| {
                let others: Vec<usize> = (1..=3).filter(|&k| k != j).collect();
                [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
                    .iter()
                    .map(|&(a, b)| {
                        let mut t = vec![0.0; 3];
                        t[others[0] - 1] = a;
                        t[others[1] - 1] = b;
                        point_from_t(&t, y).map(|p| p.0).unwrap_or_default()
                    })
                    .collect()
            })
            .collect()
    });
    Geometry {
        n,
        y: y.values().to_vec(),
        offset: z.offset,
        generators: z.generators,
        facets: facets(y),
        vertices: polytope_vertices(y).ok(),
        parallelograms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_facets_for_n2() {
        let f = facets(&YVector::new(&[1.5, 2.0]).unwrap());
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].offset_value, 0.0);
        assert_eq!(f[1].offset_value, 3.5);
        let v = polytope_vertices(&YVector::new(&[1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(v, vec![vec![0.0], vec![3.0]]);
    }

    #[test]
    fn hexagon_for_unit_y() {
        let y = YVector::new(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(facets(&y).len(), 6);
        let v = polytope_vertices(&y).unwrap();
        assert_eq!(v.len(), 6);
        let g = emit_geometry(&y);
        assert_eq!(g.offset, vec![1.0, 1.0]);
        let cells = g.parallelograms.unwrap();
        assert_eq!(cells.len(), 3);
        for c in &cells {
            assert_eq!(c[0], vec![1.0, 1.0]);
        }
    }

    #[test]
    fn no_vertices_above_three() {
        let y = YVector::new(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(
            polytope_vertices(&y),
            Err(PolytopeError::UnsupportedDimension(4))
        ));
        let g = emit_geometry(&y);
        assert!(g.vertices.is_none());
        assert_eq!(g.facets.len(), 12);
    }
}
