//! Independent oracles and generators shared by the integration suites.
//!
//! Nothing here calls into the routines it is used to check: eigenvalues
//! come from the characteristic polynomial, closed sets from the closure
//! definition applied to a plain incidence table.
#![allow(dead_code)]

use latsem_core::fca::FormalContext;
use latsem_core::RealMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> RealMatrix {
    RealMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

/// Coefficients `c_0..c_n` of `det(λI − M)` by Faddeev–LeVerrier.
pub fn characteristic_polynomial(m: &RealMatrix) -> Vec<f64> {
    let n = m.rows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut mk = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += m.get(i, l) * mk[l][j];
                }
                next[i][j] = s + if i == j { coeffs[n - k + 1] } else { 0.0 };
            }
        }
        // c_{n-k} = −tr(A M_k) / k
        let mut tr = 0.0;
        for i in 0..n {
            for l in 0..n {
                tr += m.get(i, l) * next[l][i];
            }
        }
        coeffs[n - k] = -tr / k as f64;
        mk = next;
    }
    coeffs
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// All roots of a monic real polynomial (Durand–Kerner, then Newton polish
/// on the real parts). Returned in descending order of real part.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let radius = 1.0 + coeffs[..n].iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for k in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != k {
                    denom *= z[k] - z[j];
                }
            }
            let step = horner(coeffs, z[k]) / denom;
            z[k] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    let deriv: Vec<f64> = (1..=n).map(|k| coeffs[k] * k as f64).collect();
    let mut roots: Vec<f64> = z
        .iter()
        .map(|r| {
            let mut x = r.re;
            for _ in 0..50 {
                let p = horner(coeffs, Complex64::new(x, 0.0)).re;
                let dp = horner(&deriv, Complex64::new(x, 0.0)).re;
                if dp == 0.0 {
                    break;
                }
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            x
        })
        .collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

/// Eigenvalues of a symmetric matrix via its characteristic polynomial.
pub fn oracle_eigenvalues(m: &RealMatrix) -> Vec<f64> {
    real_roots(&characteristic_polynomial(m))
}

/// As [`oracle_eigenvalues`], for a matrix known to have at least `zeros`
/// zero eigenvalues (e.g. `A‡A` for a wide `A`). The factor `λ^zeros` is
/// divided out before root finding, since clustered roots defeat the solver.
pub fn oracle_eigenvalues_with_zeros(m: &RealMatrix, zeros: usize) -> Vec<f64> {
    let coeffs = characteristic_polynomial(m);
    let mut roots = real_roots(&coeffs[zeros..]);
    roots.extend(std::iter::repeat_n(0.0, zeros));
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

/// `M^U(X) = {u | ∀i. (∀v∈X. iAv) ⇒ iAu}` straight from the definition.
pub fn closure_by_definition(incidence: &[Vec<bool>], attrs: u32) -> u32 {
    let m = incidence.first().map_or(0, Vec::len);
    let mut out = 0u32;
    for u in 0..m {
        let implied = incidence.iter().all(|row| {
            let has_all = (0..m).filter(|v| attrs >> v & 1 == 1).all(|v| row[v]);
            !has_all || row[u]
        });
        if implied {
            out |= 1 << u;
        }
    }
    out
}

/// Every closed attribute set, by trying all `2^|U|` subsets.
pub fn brute_force_closed_sets(incidence: &[Vec<bool>]) -> Vec<u32> {
    let m = incidence.first().map_or(0, Vec::len);
    assert!(m <= 30, "exhaustive enumeration limited to 30 attributes");
    let mut closed: Vec<u32> = (0u32..1 << m)
        .filter(|&x| closure_by_definition(incidence, x) == x)
        .collect();
    closed.sort_unstable();
    closed
}

pub fn random_incidence(rng: &mut impl Rng, objects: usize, attributes: usize, density: f64) -> Vec<Vec<bool>> {
    (0..objects)
        .map(|_| (0..attributes).map(|_| rng.random_bool(density)).collect())
        .collect()
}

pub fn context_from(incidence: &[Vec<bool>]) -> FormalContext {
    let n = incidence.len();
    let m = incidence.first().map_or(0, Vec::len);
    FormalContext::new(
        (0..n).map(|k| format!("g{k}")).collect(),
        (0..m).map(|k| format!("m{k}")).collect(),
        incidence,
    )
    .unwrap()
}

pub fn mask_of(set: &fixedbitset::FixedBitSet) -> u32 {
    set.ones().fold(0, |acc, k| acc | 1 << k)
}

/// Random orthogonal `n × n` matrix (Gram–Schmidt on a random Gaussian-ish draw).
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for b in &q {
            let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    q
}

/// `max |X‡X − I|` over the columns of `x`.
pub fn orthonormality_error(x: &RealMatrix) -> f64 {
    let (rows, cols) = x.shape();
    let mut worst = 0.0f64;
    for a in 0..cols {
        for b in 0..cols {
            let g: f64 = (0..rows).map(|i| x.get(i, a) * x.get(i, b)).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}
