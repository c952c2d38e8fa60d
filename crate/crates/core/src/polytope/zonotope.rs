use serde::{Deserialize, Serialize};

use super::YVector;

/// w + Σ_j [0, 1] · g_j with n generators in R^{n−1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zonotope {
    pub offset: Vec<f64>,
    pub generators: Vec<Vec<f64>>,
}

impl Zonotope {
    /// The realisation of P(y): offset (y_2, …, y_n), generators y_j v_j.
    pub fn new(y: &YVector) -> Self {
        let n = y.n();
        let generators = (1..=n)
            .map(|j| unit_generator(n, j).into_iter().map(|v| v * y.at(j)).collect())
            .collect();
        Self {
            offset: y.values()[1..].to_vec(),
            generators,
        }
    }

    pub fn dimension(&self) -> usize {
        self.offset.len()
    }

    /// w + Σ t_j g_j.
    pub fn point(&self, t: &[f64]) -> Vec<f64> {
        let mut x = self.offset.clone();
        for (g, tj) in self.generators.iter().zip(t) {
            for (xi, gi) in x.iter_mut().zip(g) {
                *xi += tj * gi;
            }
        }
        x
    }
}

/// v_j ∈ R^{n−1} (1-based j): e_j − e_{j−1}, with the missing end terms dropped.
pub(crate) fn unit_generator(n: usize, j: usize) -> Vec<f64> {
    let mut v = vec![0.0; n - 1];
    if j <= n - 1 {
        v[j - 1] = 1.0;
    }
    if j >= 2 {
        v[j - 2] = -1.0;
    }
    v
}

/// The n × (n+1) matrix whose r-th row is −e_r + e_{r+1}.
pub fn an_generator_matrix(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|r| {
            let mut row = vec![0.0; n + 1];
            row[r] = -1.0;
            row[r + 1] = 1.0;
            row
        })
        .collect()
}

/// Stretch row j of the A_n generator matrix by y_j and delete the first and
/// last columns. The result, with zero offset, has the generators of Q(y).
pub fn an_projection(y: &YVector) -> Zonotope {
    let n = y.n();
    let generators = an_generator_matrix(n)
        .into_iter()
        .enumerate()
        .map(|(j, row)| row[1..n].iter().map(|v| v * y.values()[j]).collect())
        .collect();
    Zonotope {
        offset: vec![0.0; n - 1],
        generators,
    }
}
