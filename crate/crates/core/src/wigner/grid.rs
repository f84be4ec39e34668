use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::CovarianceMatrix;
use crate::error::{Error, Result};

/// Rectangular phase-space grid; both end points are included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_q: usize,
    pub n_p: usize,
}

impl GridSpec {
    pub fn new(
        q_min: f64,
        q_max: f64,
        p_min: f64,
        p_max: f64,
        n_q: usize,
        n_p: usize,
    ) -> Result<Self> {
        let g = Self {
            q_min,
            q_max,
            p_min,
            p_max,
            n_q,
            n_p,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.q_min, self.q_max, self.p_min, self.p_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite || self.q_min >= self.q_max {
            return Err(Error::param("grid.q_min", "require finite q_min < q_max"));
        }
        if self.p_min >= self.p_max {
            return Err(Error::param("grid.p_min", "require finite p_min < p_max"));
        }
        if self.n_q < 2 {
            return Err(Error::param("grid.n_q", "must be >= 2"));
        }
        if self.n_p < 2 {
            return Err(Error::param("grid.n_p", "must be >= 2"));
        }
        Ok(())
    }

    /// Window of `±n_sigma` standard deviations around `mean`.
    pub fn around(mean: [f64; 2], cov: &CovarianceMatrix, n_sigma: f64, n: usize) -> Self {
        let sq = cov.c_qq.max(0.0).sqrt() * n_sigma;
        let sp = cov.c_pp.max(0.0).sqrt() * n_sigma;
        Self {
            q_min: mean[0] - sq,
            q_max: mean[0] + sq,
            p_min: mean[1] - sp,
            p_max: mean[1] + sp,
            n_q: n,
            n_p: n,
        }
    }

    /// Default window: `±6σ`, 201×201 points.
    pub fn auto(mean: [f64; 2], cov: &CovarianceMatrix) -> Self {
        Self::around(mean, cov, 6.0, 201)
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n_q - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.n_p - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn len(&self) -> usize {
        self.n_q * self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sample `f(q, p)`; rows over `q`, `p` fastest.
    pub fn fill<F: Fn(f64, f64) -> f64 + Sync>(&self, f: F) -> WignerGrid {
        let values = (0..self.n_q)
            .into_par_iter()
            .flat_map_iter(|i| {
                let q = self.q(i);
                let f = &f;
                (0..self.n_p).map(move |j| f(q, self.p(j)))
            })
            .collect();
        WignerGrid {
            spec: *self,
            values,
        }
    }
}

/// Wigner function sampled on a [`GridSpec`]; `values[i * n_p + j]` is the
/// value at `(q_i, p_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    #[serde(rename = "grid")]
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::param(
                "grid",
                format!("expected {} values, got {}", spec.len(), values.len()),
            ));
        }
        Ok(Self { spec, values })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.n_p + j]
    }

    pub fn cell_area(&self) -> f64 {
        self.spec.dq() * self.spec.dp()
    }

    /// `Σ W Δq Δp`.
    pub fn norm(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// `∫ W dp` at each `q_i`.
    pub fn marginal_q(&self) -> Vec<f64> {
        let dp = self.spec.dp();
        self.values
            .chunks(self.spec.n_p)
            .map(|row| row.iter().sum::<f64>() * dp)
            .collect()
    }

    pub fn max_abs_diff(&self, other: &WignerGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest sampled value; negative values signal non-classical states.
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
