//! Real-rig isometric decomposition: `A = W D V‡`.
//!
//! The SVD is computed by one-sided Jacobi rotations (Hestenes): columns of
//! a working copy of `A` are rotated pairwise until they are mutually
//! orthogonal. The accumulated rotations form `V`, the column norms are the
//! singular values, and the normalized columns form `W`.
//!
//! Columns of `W` are styles (over items), columns of `V` are tastes (over
//! users), and `d_i² = λ_i` is the shared spectrum of `AA‡` and `A‡A`.

use crate::error::{Error, Result};
use crate::rig::{dot, norm2, RealMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdOptions {
    /// Relative column-correlation threshold for convergence.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Singular values at or below `rank_tol · d₁` are dropped.
    pub rank_tol: f64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            tol: 1e-12,
            max_sweeps: 30,
            rank_tol: 1e-10,
        }
    }
}

/// Components below this magnitude are skipped when fixing signs.
const SIGN_EPS: f64 = 1e-12;

/// Singular values closer than this (relative to `d₁`) count as tied.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    rows: usize,
    cols: usize,
    /// `rows × rank`, orthonormal columns.
    styles: RealMatrix,
    /// `cols × rank`, orthonormal columns.
    tastes: RealMatrix,
    singular_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicPair {
    pub style: Vec<f64>,
    pub taste: Vec<f64>,
    pub weight: f64,
}

impl SpectralModel {
    /// Shape of the decomposed matrix.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// `λ_i = d_i²`.
    pub fn spectrum(&self) -> Vec<f64> {
        self.singular_values.iter().map(|d| d * d).collect()
    }

    /// `W`, one style per column.
    pub fn styles(&self) -> &RealMatrix {
        &self.styles
    }

    /// `V`, one taste per column.
    pub fn tastes(&self) -> &RealMatrix {
        &self.tastes
    }

    /// `W D V‡`.
    pub fn reconstruct(&self) -> RealMatrix {
        let r = self.rank();
        RealMatrix::from_fn(self.rows, self.cols, |i, j| {
            (0..r)
                .map(|k| self.styles.get(i, k) * self.singular_values[k] * self.tastes.get(j, k))
                .sum()
        })
    }

    /// Keeps the `k` heaviest topics.
    pub fn truncate(&self, k: usize) -> Result<SpectralModel> {
        if k > self.rank() {
            return Err(Error::InvalidParameter(format!(
                "cannot keep {k} topics of a rank-{} model",
                self.rank()
            )));
        }
        let keep = |m: &RealMatrix| RealMatrix::from_fn(m.rows(), k, |i, j| m.get(i, j));
        Ok(SpectralModel {
            rows: self.rows,
            cols: self.cols,
            styles: keep(&self.styles),
            tastes: keep(&self.tastes),
            singular_values: self.singular_values[..k].to_vec(),
        })
    }

    /// Style/taste pairs ordered by weight.
    pub fn topic_pairs(&self) -> Vec<TopicPair> {
        (0..self.rank())
            .map(|k| TopicPair {
                style: self.styles.column(k),
                taste: self.tastes.column(k),
                weight: self.singular_values[k],
            })
            .collect()
    }
}

pub fn svd(a: &RealMatrix) -> Result<SpectralModel> {
    svd_with(a, &SvdOptions::default())
}

pub fn svd_with(a: &RealMatrix, opts: &SvdOptions) -> Result<SpectralModel> {
    if !a.is_finite() {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let (m, n) = a.shape();
    let (left, right, values) = if m >= n {
        jacobi_tall(a, opts)?
    } else {
        // A‡ = W' D V'‡  ⇒  A = V' D W'‡
        let (w, v, d) = jacobi_tall(&a.transpose(), opts)?;
        (v, w, d)
    };
    Ok(finish(m, n, left, right, values, opts.rank_tol))
}

/// `(W columns, V columns, singular values)` in input column order, untruncated.
type RawSvd = (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>);

/// One-sided Jacobi on a matrix with at least as many rows as columns.
fn jacobi_tall(a: &RealMatrix, opts: &SvdOptions) -> Result<RawSvd> {
    let n = a.cols();
    let mut u: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    // Columns this small relative to ‖A‖ carry only rounding noise.
    let floor = (f64::EPSILON * a.frobenius_norm()).powi(2);
    let mut converged = n < 2;
    let mut residual = 0.0;
    for _ in 0..opts.max_sweeps {
        if converged {
            break;
        }
        residual = 0.0f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let gamma = dot(&u[p], &u[q]);
                let corr = gamma.abs() / (alpha * beta).sqrt();
                residual = residual.max(corr);
                if corr <= opts.tol {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        converged = residual <= opts.tol;
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: opts.max_sweeps,
            residual,
        });
    }

    let values: Vec<f64> = u.iter().map(|col| norm2(col)).collect();
    for (col, &d) in u.iter_mut().zip(&values) {
        if d > 0.0 {
            col.iter_mut().for_each(|x| *x /= d);
        }
    }
    Ok((u, v, values))
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let (cp, cq) = (&mut head[p], &mut tail[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

fn leading_index(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = k;
        }
    }
    best
}

fn finish(
    rows: usize,
    cols: usize,
    mut left: Vec<Vec<f64>>,
    mut right: Vec<Vec<f64>>,
    values: Vec<f64>,
    rank_tol: f64,
) -> SpectralModel {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let top = order.first().map_or(0.0, |&k| values[k]);
    let kept: Vec<usize> = order
        .into_iter()
        .take_while(|&k| top > 0.0 && values[k] > rank_tol * top)
        .collect();

    // Sign: first non-negligible taste component positive.
    for &k in &kept {
        if let Some(first) = right[k].iter().find(|x| x.abs() > SIGN_EPS) {
            if *first < 0.0 {
                right[k].iter_mut().for_each(|x| *x = -*x);
                left[k].iter_mut().for_each(|x| *x = -*x);
            }
        }
    }

    // Ties: ascending index of the leading taste component.
    let mut ordered = Vec::with_capacity(kept.len());
    let mut start = 0;
    while start < kept.len() {
        let mut end = start + 1;
        while end < kept.len() && values[kept[start]] - values[kept[end]] <= TIE_TOL * top {
            end += 1;
        }
        let mut group = kept[start..end].to_vec();
        group.sort_by_key(|&k| leading_index(&right[k]));
        ordered.extend(group);
        start = end;
    }

    let r = ordered.len();
    let styles = RealMatrix::from_fn(rows, r, |i, j| left[ordered[j]][i]);
    let tastes = RealMatrix::from_fn(cols, r, |i, j| right[ordered[j]][i]);
    SpectralModel {
        rows,
        cols,
        styles,
        tastes,
        singular_values: ordered.iter().map(|&k| values[k]).collect(),
    }
}

/// Eigenvalues of a symmetric matrix in descending order (cyclic Jacobi).
pub fn symmetric_eigenvalues(m: &RealMatrix) -> Result<Vec<f64>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::dims(format!("square matrix ({n} cols)"), m.cols()));
    }
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let scale = m.frobenius_norm();
    const MAX_SWEEPS: usize = 100;
    for sweep in 0..=MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || scale == 0.0 {
            break;
        }
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                residual: off / scale,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hits {
    /// Dominant unit eigenvector of `A‡A`, over users.
    pub hubs: Vec<f64>,
    /// Dominant unit eigenvector of `AA‡`, over items.
    pub authorities: Vec<f64>,
    pub iterations: usize,
}

/// Hubs and authorities by power iteration from the uniform vector.
///
/// Stops once successive hub iterates differ by less than `tol` in ℓ2.
pub fn hits(a: &RealMatrix, tol: f64, max_iter: usize) -> Result<Hits> {
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let v = a.get(i, j);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    if a.as_slice().iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let at = a.transpose();
    let n = a.cols();
    let mut hubs = vec![1.0 / (n as f64).sqrt(); n];
    let mut step = f64::INFINITY;
    for it in 1..=max_iter {
        let auth = a.apply(&hubs)?;
        let mut next = at.apply(&auth)?;
        let norm = norm2(&next);
        next.iter_mut().for_each(|x| *x /= norm);
        step = next
            .iter()
            .zip(&hubs)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        hubs = next;
        if step < tol {
            let mut authorities = a.apply(&hubs)?;
            let norm = norm2(&authorities);
            authorities.iter_mut().for_each(|x| *x /= norm);
            return Ok(Hits {
                hubs,
                authorities,
                iterations: it,
            });
        }
    }
    Err(Error::PowerIteration {
        iterations: max_iter,
        step,
    })
}
