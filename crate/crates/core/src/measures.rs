//! Inner-product similarity, trace ranking, and the ℓ∞ semantical distance.

use crate::error::{Error, Result};
use crate::pattern::Observable;
use crate::rig::{dot, norm2, RealMatrix};

/// Orthonormality tolerance for subspace bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

fn cosine(x: &[f64], y: &[f64], what: impl Fn(bool) -> String) -> Result<f64> {
    let nx = norm2(x);
    if nx == 0.0 {
        return Err(Error::UndefinedSimilarity(what(true)));
    }
    let ny = norm2(y);
    if ny == 0.0 {
        return Err(Error::UndefinedSimilarity(what(false)));
    }
    let xs: Vec<f64> = x.iter().map(|v| v / nx).collect();
    let ys: Vec<f64> = y.iter().map(|v| v / ny).collect();
    Ok(dot(&xs, &ys).clamp(-1.0, 1.0))
}

fn check_index(index: usize, len: usize) -> Result<()> {
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    Ok(())
}

/// Cosine of rows `i` and `j`, clamped to `[-1, 1]`.
pub fn sim_items(a: &RealMatrix, i: usize, j: usize) -> Result<f64> {
    check_index(i, a.rows())?;
    check_index(j, a.rows())?;
    cosine(a.row(i), a.row(j), |first| {
        format!("item row {}", if first { i } else { j })
    })
}

/// Cosine of columns `u` and `v`, clamped to `[-1, 1]`.
pub fn sim_users(a: &RealMatrix, u: usize, v: usize) -> Result<f64> {
    check_index(u, a.cols())?;
    check_index(v, a.cols())?;
    cosine(&a.column(u), &a.column(v), |first| {
        format!("user column {}", if first { u } else { v })
    })
}

/// `s_M(x, y) = <Ax|Ay>`.
pub fn sim_topics(a: &RealMatrix, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(dot(&a.apply(x)?, &a.apply(y)?))
}

/// `s_M(x, y) = <x|M|y>` evaluated against a precomputed observable.
pub fn sim_topics_observable(m: &Observable, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dims(x.len(), y.len()));
    }
    m.expectation(x, y)
}

/// `tr_M(x) = ‖Ax‖²`.
pub fn trace_rank(a: &RealMatrix, x: &[f64]) -> Result<f64> {
    let ax = a.apply(x)?;
    Ok(dot(&ax, &ax))
}

/// Explicit orthonormal basis of a subspace of `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl SubspaceBasis {
    /// Accepts the vectors only if they are already orthonormal.
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::dims(dim, bad.len()));
        }
        let mut deviation = 0.0f64;
        for (k, x) in vectors.iter().enumerate() {
            for (l, y) in vectors.iter().enumerate().skip(k) {
                let target = if k == l { 1.0 } else { 0.0 };
                deviation = deviation.max((dot(x, y) - target).abs());
            }
        }
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(SubspaceBasis { dim, vectors })
    }

    /// Modified Gram–Schmidt; vectors whose residual norm falls below
    /// `ORTHONORMAL_TOL` are dropped as dependent.
    pub fn orthonormalize(dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in vectors {
            if v.len() != dim {
                return Err(Error::dims(dim, v.len()));
            }
            let mut w = v.clone();
            for b in &basis {
                let p = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
            let n = norm2(&w);
            if n > ORTHONORMAL_TOL {
                w.iter_mut().for_each(|x| *x /= n);
                basis.push(w);
            }
        }
        Ok(SubspaceBasis {
            dim,
            vectors: basis,
        })
    }

    /// Standard basis of the whole space.
    pub fn full(dim: usize) -> Self {
        let vectors = (0..dim)
            .map(|k| (0..dim).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
            .collect();
        SubspaceBasis { dim, vectors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// `tr_M(E) = Σ_{x ∈ B_E} tr_M(x)`.
pub fn trace_rank_subspace(a: &RealMatrix, basis: &SubspaceBasis) -> Result<f64> {
    if basis.dim() != a.cols() {
        return Err(Error::dims(a.cols(), basis.dim()));
    }
    basis.vectors().iter().map(|x| trace_rank(a, x)).sum()
}

/// `‖Ax − Ay‖_∞`.
pub fn linf_distance(a: &RealMatrix, x: &[f64], y: &[f64]) -> Result<f64> {
    let ax = a.apply(x)?;
    let ay = a.apply(y)?;
    Ok(ax
        .iter()
        .zip(&ay)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max))
}
