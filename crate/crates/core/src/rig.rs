//! Rig scalars with conjugation, and dense matrices over them.
//!
//! A rig is a ring without negatives: `(R, +, 0)` and `(R, ·, 1)` are
//! commutative monoids, multiplication distributes over addition and `0`
//! annihilates. Each rig here also carries an involutive conjugation,
//! which is what turns a matrix into its adjoint and a pair of vectors
//! into an inner product.
//!
//! Two instances ship: [`RealRig`] (double precision, identity
//! conjugation) and [`BoolRig`] (`∨`, `∧`, with negation as conjugation).

use std::fmt::Debug;

use crate::error::{Error, Result};

pub trait Rig: Copy + Debug + Send + Sync + 'static {
    type Elem: Copy + PartialEq + Debug + Send + Sync;

    const NAME: &'static str;

    /// Whether conjugation maps the rig onto its order dual. Negation on
    /// booleans does; the identity on reals does not.
    const CONJ_FLIPS_POLARITY: bool;

    fn zero() -> Self::Elem;
    fn one() -> Self::Elem;
    fn add(a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn conj(a: Self::Elem) -> Self::Elem;

    fn parse_elem(s: &str) -> Option<Self::Elem>;

    fn sum<I: IntoIterator<Item = Self::Elem>>(iter: I) -> Self::Elem {
        iter.into_iter().fold(Self::zero(), Self::add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RealRig;

impl Rig for RealRig {
    type Elem = f64;
    const NAME: &'static str = "real";
    const CONJ_FLIPS_POLARITY: bool = false;

    fn zero() -> f64 {
        0.0
    }
    fn one() -> f64 {
        1.0
    }
    fn add(a: f64, b: f64) -> f64 {
        a + b
    }
    fn mul(a: f64, b: f64) -> f64 {
        a * b
    }
    fn conj(a: f64) -> f64 {
        a
    }

    fn parse_elem(s: &str) -> Option<f64> {
        s.parse::<f64>().ok().filter(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoolRig;

impl Rig for BoolRig {
    type Elem = bool;
    const NAME: &'static str = "bool";
    const CONJ_FLIPS_POLARITY: bool = true;

    fn zero() -> bool {
        false
    }
    fn one() -> bool {
        true
    }
    fn add(a: bool, b: bool) -> bool {
        a || b
    }
    fn mul(a: bool, b: bool) -> bool {
        a && b
    }
    fn conj(a: bool) -> bool {
        !a
    }

    fn parse_elem(s: &str) -> Option<bool> {
        match s {
            "1" | "true" => Some(true),
            "0" | "false" => Some(false),
            _ => None,
        }
    }
}

/// Which of the two order-dual readings a boolean matrix lives in.
///
/// Over 𝔹 conjugation is an antimorphism into the dual lattice, so an
/// adjoint flips the polarity and a second adjoint restores it. Over the
/// reals the polarity never changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarity {
    #[default]
    Primal,
    Dual,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Primal => Polarity::Dual,
            Polarity::Dual => Polarity::Primal,
        }
    }
}

/// Dense row-major matrix over a rig.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<R: Rig> {
    rows: usize,
    cols: usize,
    data: Vec<R::Elem>,
    polarity: Polarity,
}

pub type RealMatrix = Matrix<RealRig>;
pub type BoolMatrix = Matrix<BoolRig>;

impl<R: Rig> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, R::zero())
    }

    pub fn filled(rows: usize, cols: usize, value: R::Elem) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
            polarity: Polarity::Primal,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = R::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<R::Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(
                format!("{} entries for {rows}x{cols}", rows * cols),
                data.len(),
            ));
        }
        Ok(Matrix {
            rows,
            cols,
            data,
            polarity: Polarity::Primal,
        })
    }

    /// Builds a matrix from rows; all rows must share one length.
    pub fn from_rows<Row: AsRef<[R::Elem]>>(rows: &[Row]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::dims(format!("row of length {cols}"), row.len()));
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R::Elem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix {
            rows,
            cols,
            data,
            polarity: Polarity::Primal,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn with_polarity(mut self, polarity: Polarity) -> Self {
        self.polarity = polarity;
        self
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> R::Elem {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: R::Elem) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[R::Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [R::Elem] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<R::Elem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[R::Elem] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut m = Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i));
        m.polarity = self.polarity;
        m
    }

    /// Applies `A · x` for a column vector `x` over the column index set.
    pub fn apply(&self, x: &[R::Elem]) -> Result<Vec<R::Elem>> {
        if x.len() != self.cols {
            return Err(Error::dims(self.cols, x.len()));
        }
        Ok((0..self.rows)
            .map(|i| R::sum(self.row(i).iter().zip(x).map(|(&a, &b)| R::mul(a, b))))
            .collect())
    }
}

/// Conjugate transpose: entry `(u, i)` is `conj(A(i, u))`.
pub fn adjoint<R: Rig>(a: &Matrix<R>) -> Matrix<R> {
    let mut m = Matrix::from_fn(a.cols, a.rows, |u, i| R::conj(a.get(i, u)));
    m.polarity = if R::CONJ_FLIPS_POLARITY {
        a.polarity.flip()
    } else {
        a.polarity
    };
    m
}

/// `<x|y> = y‡ ∘ x = Σ_k conj(y_k) · x_k`.
pub fn inner_product<R: Rig>(x: &[R::Elem], y: &[R::Elem]) -> Result<R::Elem> {
    if x.len() != y.len() {
        return Err(Error::dims(x.len(), y.len()));
    }
    Ok(R::sum(
        x.iter().zip(y).map(|(&xk, &yk)| R::mul(R::conj(yk), xk)),
    ))
}

/// Ordinary composition: `(PQ)(i, k) = Σ_j P(i, j) · Q(j, k)`.
pub fn matmul<R: Rig>(p: &Matrix<R>, q: &Matrix<R>) -> Result<Matrix<R>> {
    if p.cols != q.rows {
        return Err(Error::dims(
            format!("{} rows on the right factor", p.cols),
            q.rows,
        ));
    }
    let mut out = Matrix::zeros(p.rows, q.cols);
    for i in 0..p.rows {
        let prow = p.row(i);
        for k in 0..q.cols {
            let v = R::sum((0..p.cols).map(|j| R::mul(prow[j], q.get(j, k))));
            out.data[i * q.cols + k] = v;
        }
    }
    out.polarity = p.polarity;
    Ok(out)
}

/// Composition in the order dual of 𝔹: `(P ∘̃ Q)(i, k) = ⋀_j (P(i, j) ∨ Q(j, k))`.
///
/// Restricted to boolean matrices by its signature.
pub fn dual_compose(p: &BoolMatrix, q: &BoolMatrix) -> Result<BoolMatrix> {
    if p.cols != q.rows {
        return Err(Error::dims(
            format!("{} rows on the right factor", p.cols),
            q.rows,
        ));
    }
    let mut out = Matrix::from_fn(p.rows, q.cols, |i, k| {
        (0..p.cols).all(|j| p.get(i, j) || q.get(j, k))
    });
    out.polarity = p.polarity;
    Ok(out)
}

impl RealMatrix {
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute entrywise difference; `None` on shape mismatch.
    pub fn max_abs_diff(&self, other: &RealMatrix) -> Option<f64> {
        (self.shape() == other.shape()).then(|| {
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }

    pub fn scale(&self, factor: f64) -> RealMatrix {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= factor);
        m
    }

    pub fn sub(&self, other: &RealMatrix) -> Result<RealMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::dims(
                format!("{:?}", self.shape()),
                format!("{:?}", other.shape()),
            ));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self::from_vec(self.rows, self.cols, data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real(rows: &[&[f64]]) -> RealMatrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn boolean(rows: &[&[u8]]) -> BoolMatrix {
        let rows: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| r.iter().map(|&b| b == 1).collect())
            .collect();
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn adjoint_examples() {
        let a = real(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(adjoint(&a), real(&[&[1.0, 3.0], &[2.0, 4.0]]));

        let b = boolean(&[&[1, 0], &[1, 1]]);
        let bd = adjoint(&b);
        assert_eq!(bd.as_slice(), boolean(&[&[0, 0], &[1, 0]]).as_slice());
        assert_eq!(bd.polarity(), Polarity::Dual);
        assert_eq!(adjoint(&bd), b);

        let i3 = RealMatrix::identity(3);
        assert_eq!(adjoint(&i3), i3);
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(inner_product::<RealRig>(&[1.0, 0.0], &[1.0, 0.0]), Ok(1.0));
        assert_eq!(inner_product::<RealRig>(&[1.0, 0.0], &[-1.0, 0.0]), Ok(-1.0));
        assert_eq!(inner_product::<RealRig>(&[1.0, 0.0], &[0.0, 1.0]), Ok(0.0));
        assert!(matches!(
            inner_product::<RealRig>(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn matmul_examples() {
        let a = real(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(matmul(&RealMatrix::identity(2), &a).unwrap(), a);

        let p = boolean(&[&[1, 1], &[0, 1]]);
        assert_eq!(matmul(&p, &BoolMatrix::identity(2)).unwrap(), p);

        let row = real(&[&[1.0, 1.0]]);
        let col = real(&[&[1.0], &[1.0]]);
        assert_eq!(matmul(&row, &col).unwrap(), real(&[&[2.0]]));

        assert!(matmul(&row, &row).is_err());
    }

    #[test]
    fn dual_compose_examples() {
        let ones = boolean(&[&[1, 1], &[1, 1]]);
        let q = boolean(&[&[0, 1], &[0, 0]]);
        assert_eq!(dual_compose(&ones, &q).unwrap(), ones);

        // (0 ∨ 1) ∧ (1 ∨ 0) = 1
        let p = boolean(&[&[0, 1]]);
        let q = boolean(&[&[1], &[0]]);
        assert_eq!(dual_compose(&p, &q).unwrap(), boolean(&[&[1]]));

        let p = boolean(&[&[0, 0]]);
        let q = boolean(&[&[0], &[0]]);
        assert_eq!(dual_compose(&p, &q).unwrap(), boolean(&[&[0]]));

        assert!(dual_compose(&p, &p).is_err());
    }

    #[test]
    fn bool_rig_laws_exhaustive() {
        let vals = [false, true];
        for &a in &vals {
            assert_eq!(BoolRig::conj(BoolRig::conj(a)), a);
            assert_eq!(BoolRig::add(a, BoolRig::zero()), a);
            assert_eq!(BoolRig::mul(a, BoolRig::one()), a);
            assert!(!BoolRig::mul(BoolRig::zero(), a));
            for &b in &vals {
                assert_eq!(BoolRig::add(a, b), BoolRig::add(b, a));
                assert_eq!(BoolRig::mul(a, b), BoolRig::mul(b, a));
                for &c in &vals {
                    assert_eq!(
                        BoolRig::add(BoolRig::add(a, b), c),
                        BoolRig::add(a, BoolRig::add(b, c))
                    );
                    assert_eq!(
                        BoolRig::mul(BoolRig::mul(a, b), c),
                        BoolRig::mul(a, BoolRig::mul(b, c))
                    );
                    assert_eq!(
                        BoolRig::mul(a, BoolRig::add(b, c)),
                        BoolRig::add(BoolRig::mul(a, b), BoolRig::mul(a, c))
                    );
                }
            }
        }
    }

    #[test]
    fn parse_elements() {
        assert_eq!(RealRig::parse_elem("2.5"), Some(2.5));
        assert_eq!(RealRig::parse_elem("nan"), None);
        assert_eq!(BoolRig::parse_elem("1"), Some(true));
        assert_eq!(BoolRig::parse_elem("2"), None);
    }

    fn real_matrix(rows: usize, cols: usize) -> impl Strategy<Value = RealMatrix> {
        prop::collection::vec(-1.0f64..1.0, rows * cols)
            .prop_map(move |d| RealMatrix::from_vec(rows, cols, d).unwrap())
    }

    fn bool_matrix(rows: usize, cols: usize) -> impl Strategy<Value = BoolMatrix> {
        prop::collection::vec(any::<bool>(), rows * cols)
            .prop_map(move |d| BoolMatrix::from_vec(rows, cols, d).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn real_rig_laws(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
            let tol = 1e-12;
            prop_assert!((RealRig::add(RealRig::add(a, b), c) - RealRig::add(a, RealRig::add(b, c))).abs() < tol);
            prop_assert!((RealRig::mul(RealRig::mul(a, b), c) - RealRig::mul(a, RealRig::mul(b, c))).abs() < tol);
            prop_assert!((RealRig::mul(a, RealRig::add(b, c)) - (RealRig::mul(a, b) + RealRig::mul(a, c))).abs() < tol);
            prop_assert_eq!(RealRig::add(a, b), RealRig::add(b, a));
            prop_assert_eq!(RealRig::mul(a, b), RealRig::mul(b, a));
            prop_assert_eq!(RealRig::mul(RealRig::zero(), a), 0.0);
            prop_assert_eq!(RealRig::conj(RealRig::conj(a)), a);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn adjoint_is_involutive(a in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| real_matrix(r, c))) {
            prop_assert_eq!(adjoint(&adjoint(&a)), a);
        }

        #[test]
        fn real_matmul_associative(
            (p, q, r) in (1usize..5, 1usize..5, 1usize..5, 1usize..5)
                .prop_flat_map(|(a, b, c, d)| (real_matrix(a, b), real_matrix(b, c), real_matrix(c, d)))
        ) {
            let left = matmul(&matmul(&p, &q).unwrap(), &r).unwrap();
            let right = matmul(&p, &matmul(&q, &r).unwrap()).unwrap();
            prop_assert!(left.max_abs_diff(&right).unwrap() <= 1e-10);
        }

        #[test]
        fn bool_matmul_associative(
            (p, q, r) in (1usize..5, 1usize..5, 1usize..5, 1usize..5)
                .prop_flat_map(|(a, b, c, d)| (bool_matrix(a, b), bool_matrix(b, c), bool_matrix(c, d)))
        ) {
            let left = matmul(&matmul(&p, &q).unwrap(), &r).unwrap();
            let right = matmul(&p, &matmul(&q, &r).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn real_inner_product_symmetric(x in prop::collection::vec(-1.0f64..1.0, 5), y in prop::collection::vec(-1.0f64..1.0, 5)) {
            prop_assert_eq!(
                inner_product::<RealRig>(&x, &y).unwrap(),
                RealRig::conj(inner_product::<RealRig>(&y, &x).unwrap())
            );
        }
    }
}
