//! Bell-type audit of similarity-derived agreement probabilities.
//!
//! If the chance that two users agree were `(1 + s) / 2` for the cosine
//! similarity `s` of their taste vectors, the disagreement rates would form
//! a pseudometric, which forces
//!
//! ```text
//! s(x0,y1) + s(x1,y1) + s(x1,y0) - s(x0,y0) <= 2
//! ```
//!
//! Classical binary behaviors always satisfy the bound; unit vectors in the
//! plane do not. This module evaluates both sides.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pattern::RealPattern;
use crate::rig::{dot, norm2};

/// Right-hand side of the similarity inequality.
pub const BELL_BOUND: f64 = 2.0;
/// A statistic counts as a violation only above `BELL_BOUND + VIOLATION_TOL`.
pub const VIOLATION_TOL: f64 = 1e-9;
/// Slack on unit norms of quadruple vectors.
pub const UNIT_TOL: f64 = 1e-10;
/// Slack on similarities outside `[-1, 1]`.
pub const SIMILARITY_SLACK: f64 = 1e-9;

/// `P(X = Y) = (1 + s) / 2`, with `s` clamped into `[-1, 1]`.
pub fn agreement_probability(s: f64) -> Result<f64> {
    if !(-1.0 - SIMILARITY_SLACK..=1.0 + SIMILARITY_SLACK).contains(&s) {
        return Err(Error::SimilarityOutOfRange(s));
    }
    Ok((1.0 + s.clamp(-1.0, 1.0)) / 2.0)
}

/// `P(X ≠ Y) = (1 - s) / 2`.
pub fn disagreement_probability(s: f64) -> Result<f64> {
    agreement_probability(s).map(|p| 1.0 - p)
}

/// Four unit vectors in a shared coordinate space.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadruple {
    pub x0: Vec<f64>,
    pub x1: Vec<f64>,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
}

impl Quadruple {
    pub fn new(x0: Vec<f64>, x1: Vec<f64>, y0: Vec<f64>, y1: Vec<f64>) -> Result<Self> {
        let dim = x0.len();
        for (index, v) in [&x0, &x1, &y0, &y1].into_iter().enumerate() {
            if v.len() != dim {
                return Err(Error::dims(dim, v.len()));
            }
            let norm = norm2(v);
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::NotUnit { index, norm });
            }
        }
        Ok(Quadruple { x0, x1, y0, y1 })
    }

    /// The counterexample quadruple in the plane.
    pub fn planar_counterexample() -> Self {
        let h = 3f64.sqrt() / 2.0;
        Quadruple {
            x0: vec![1.0, 0.0],
            x1: vec![-0.5, h],
            y0: vec![-1.0, 0.0],
            y1: vec![0.5, h],
        }
    }
}

/// The four similarities entering the statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairSims {
    pub x0y1: f64,
    pub x1y1: f64,
    pub x1y0: f64,
    pub x0y0: f64,
}

impl PairSims {
    pub fn statistic(&self) -> f64 {
        self.x0y1 + self.x1y1 + self.x1y0 - self.x0y0
    }
}

pub fn pair_similarities(q: &Quadruple) -> PairSims {
    let s = |a: &[f64], b: &[f64]| dot(a, b).clamp(-1.0, 1.0);
    PairSims {
        x0y1: s(&q.x0, &q.y1),
        x1y1: s(&q.x1, &q.y1),
        x1y0: s(&q.x1, &q.y0),
        x0y0: s(&q.x0, &q.y0),
    }
}

/// `s(x0,y1) + s(x1,y1) + s(x1,y0) - s(x0,y0)`.
pub fn bell_statistic(q: &Quadruple) -> f64 {
    pair_similarities(q).statistic()
}

/// Users named in the order `x0, x1, y0, y1`.
pub type UserQuadruple = [String; 4];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadrupleRecord {
    pub users: UserQuadruple,
    pub sims: PairSims,
    pub statistic: f64,
    pub violated: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditSummary {
    pub checked: usize,
    pub violated: usize,
    pub max_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellReport {
    pub quadruples: Vec<QuadrupleRecord>,
    pub summary: AuditSummary,
}

impl BellReport {
    pub fn has_violation(&self) -> bool {
        self.summary.violated > 0
    }
}

/// Where audit quadruples come from.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadrupleSource {
    Explicit(Vec<UserQuadruple>),
    /// Every ordered choice of four distinct users from the list.
    Exhaustive(Vec<String>),
    /// `count` ordered quadruples of distinct users drawn with a seeded generator.
    Sampled {
        users: Vec<String>,
        count: usize,
        seed: u64,
    },
}

impl QuadrupleSource {
    pub fn resolve(&self) -> Result<Vec<UserQuadruple>> {
        let too_few = |n: usize| {
            Error::InvalidParameter(format!("need at least 4 distinct users, got {n}"))
        };
        match self {
            QuadrupleSource::Explicit(list) => Ok(list.clone()),
            QuadrupleSource::Exhaustive(users) => {
                let n = users.len();
                if n < 4 {
                    return Err(too_few(n));
                }
                let mut out = Vec::new();
                for a in 0..n {
                    for b in (0..n).filter(|&b| b != a) {
                        for c in (0..n).filter(|&c| c != a && c != b) {
                            for d in (0..n).filter(|&d| d != a && d != b && d != c) {
                                out.push([a, b, c, d].map(|k| users[k].clone()));
                            }
                        }
                    }
                }
                Ok(out)
            }
            QuadrupleSource::Sampled { users, count, seed } => {
                if users.len() < 4 {
                    return Err(too_few(users.len()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..*count)
                    .map(|_| {
                        let picked = sample(&mut rng, users.len(), 4).into_vec();
                        [0, 1, 2, 3].map(|k| users[picked[k]].clone())
                    })
                    .collect())
            }
        }
    }
}

/// Evaluates the statistic on normalized user columns of `a`.
///
/// Records are sorted by margin, largest first; ties keep input order.
pub fn audit(a: &RealPattern, quadruples: &[UserQuadruple]) -> Result<BellReport> {
    let (_, n_users) = a.shape();
    let mut columns: Vec<Option<Vec<f64>>> = vec![None; n_users];
    let mut resolved = Vec::with_capacity(quadruples.len());
    for q in quadruples {
        let mut idx = [0usize; 4];
        for (slot, id) in idx.iter_mut().zip(q) {
            let u = a.user_index(id)?;
            if columns[u].is_none() {
                let col = a.values().column(u);
                let norm = norm2(&col);
                if norm == 0.0 {
                    return Err(Error::UndefinedSimilarity(format!("user `{id}`")));
                }
                columns[u] = Some(col.iter().map(|v| v / norm).collect());
            }
            *slot = u;
        }
        resolved.push(idx);
    }

    let columns: Vec<Vec<f64>> = columns.into_iter().map(Option::unwrap_or_default).collect();
    let mut records: Vec<QuadrupleRecord> = resolved
        .par_iter()
        .zip(quadruples.par_iter())
        .map(|(idx, users)| {
            let q = Quadruple {
                x0: columns[idx[0]].clone(),
                x1: columns[idx[1]].clone(),
                y0: columns[idx[2]].clone(),
                y1: columns[idx[3]].clone(),
            };
            let sims = pair_similarities(&q);
            let statistic = sims.statistic();
            QuadrupleRecord {
                users: users.clone(),
                sims,
                statistic,
                violated: statistic > BELL_BOUND + VIOLATION_TOL,
                margin: statistic - BELL_BOUND,
            }
        })
        .collect();
    records.sort_by(|a, b| b.margin.total_cmp(&a.margin));

    let summary = AuditSummary {
        checked: records.len(),
        violated: records.iter().filter(|r| r.violated).count(),
        max_margin: records.first().map(|r| r.margin),
    };
    Ok(BellReport {
        quadruples: records,
        summary,
    })
}

/// The item universe `J'` a family of behaviors ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemUniverse(Arc<[String]>);

impl ItemUniverse {
    pub fn new(items: Vec<String>) -> Self {
        ItemUniverse(items.into())
    }

    /// Items named `j1..jn`.
    pub fn numbered(n: usize) -> Self {
        Self::new((1..=n).map(|k| format!("j{k}")).collect())
    }

    pub fn items(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn same(&self, other: &ItemUniverse) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

/// A `{0,1}`-valued behavior `X : J' → {0,1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryBehavior {
    universe: ItemUniverse,
    values: Vec<bool>,
}

impl BinaryBehavior {
    pub fn new(universe: &ItemUniverse, values: Vec<bool>) -> Result<Self> {
        if values.len() != universe.len() {
            return Err(Error::dims(universe.len(), values.len()));
        }
        Ok(BinaryBehavior {
            universe: universe.clone(),
            values,
        })
    }

    /// Behavior whose value at item `k` is bit `k` of `bits`.
    pub fn from_bits(universe: &ItemUniverse, bits: u64) -> Self {
        let values = (0..universe.len()).map(|k| bits >> k & 1 == 1).collect();
        BinaryBehavior {
            universe: universe.clone(),
            values,
        }
    }

    pub fn universe(&self) -> &ItemUniverse {
        &self.universe
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn negated(&self) -> Self {
        BinaryBehavior {
            universe: self.universe.clone(),
            values: self.values.iter().map(|v| !v).collect(),
        }
    }

    /// `W_XY`: indicator of disagreement per item.
    pub fn disagreement(&self, other: &BinaryBehavior) -> Result<Vec<u8>> {
        if !self.universe.same(&other.universe) {
            return Err(Error::MismatchedItems);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a != b) as u8)
            .collect())
    }

    fn agreements(&self, other: &BinaryBehavior) -> Result<u64> {
        let w = self.disagreement(other)?;
        Ok(w.iter().filter(|&&d| d == 0).count() as u64)
    }
}

/// Similarity inequality evaluated on behaviors, with exact counts kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalRecord {
    /// Agreement counts for `(x0,y1), (x1,y1), (x1,y0), (x0,y0)`.
    pub agreements: [u64; 4],
    pub items: u64,
    pub statistic: f64,
}

impl ClassicalRecord {
    /// `statistic · n / 2 + n`, an integer: `a01 + a11 + a10 − a00`.
    pub fn scaled_numerator(&self) -> i64 {
        let [a01, a11, a10, a00] = self.agreements.map(|a| a as i64);
        a01 + a11 + a10 - a00
    }

    /// `statistic ≤ 2`, decided in integers.
    pub fn within_bound(&self) -> bool {
        self.scaled_numerator() <= 2 * self.items as i64
    }
}

/// Reconstructs `s = 2·P(X=Y) − 1` from behaviors and evaluates the statistic.
pub fn classical_statistic(
    x0: &BinaryBehavior,
    x1: &BinaryBehavior,
    y0: &BinaryBehavior,
    y1: &BinaryBehavior,
) -> Result<ClassicalRecord> {
    let n = x0.universe.len() as u64;
    if n == 0 {
        return Err(Error::InvalidParameter("item universe is empty".into()));
    }
    let agreements = [
        x0.agreements(y1)?,
        x1.agreements(y1)?,
        x1.agreements(y0)?,
        x0.agreements(y0)?,
    ];
    let mut record = ClassicalRecord {
        agreements,
        items: n,
        statistic: 0.0,
    };
    // Σ(2a/n − 1) with the sign pattern (+,+,+,−) is 2·numerator/n − 2.
    record.statistic = (2 * record.scaled_numerator() - 2 * n as i64) as f64 / n as f64;
    Ok(record)
}

/// Outcome of checking `P(X≠Z) ≤ P(X≠Y) + P(Y≠Z)` on concrete behaviors.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleCheck {
    /// Disagreement counts `(X,Z), (X,Y), (Y,Z)`.
    pub disagreements: [u64; 3],
    pub items: u64,
    /// First item where `W_XZ > W_XY + W_YZ`, if any.
    pub pointwise_failure: Option<usize>,
}

impl TriangleCheck {
    pub fn probabilities(&self) -> [f64; 3] {
        self.disagreements.map(|d| d as f64 / self.items.max(1) as f64)
    }

    pub fn pointwise_holds(&self) -> bool {
        self.pointwise_failure.is_none()
    }

    pub fn probability_holds(&self) -> bool {
        let [xz, xy, yz] = self.disagreements;
        xz <= xy + yz
    }

    pub fn holds(&self) -> bool {
        self.pointwise_holds() && self.probability_holds()
    }
}

pub fn verify_triangle_lemma(
    x: &BinaryBehavior,
    y: &BinaryBehavior,
    z: &BinaryBehavior,
) -> Result<TriangleCheck> {
    let wxz = x.disagreement(z)?;
    let wxy = x.disagreement(y)?;
    let wyz = y.disagreement(z)?;
    let pointwise_failure = (0..wxz.len()).find(|&k| wxz[k] > wxy[k] + wyz[k]);
    let count = |w: &[u8]| w.iter().map(|&d| d as u64).sum::<u64>();
    Ok(TriangleCheck {
        disagreements: [count(&wxz), count(&wxy), count(&wyz)],
        items: wxz.len() as u64,
        pointwise_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rig::RealMatrix;

    #[test]
    fn agreement_probability_examples() {
        assert_eq!(agreement_probability(1.0), Ok(1.0));
        assert_eq!(agreement_probability(-1.0), Ok(0.0));
        assert_eq!(agreement_probability(0.0), Ok(0.5));
        assert_eq!(disagreement_probability(0.0), Ok(0.5));
        assert_eq!(agreement_probability(1.0 + 1e-10), Ok(1.0));
        assert!(matches!(
            agreement_probability(1.1),
            Err(Error::SimilarityOutOfRange(_))
        ));
        assert!(agreement_probability(f64::NAN).is_err());
    }

    #[test]
    fn planar_counterexample_statistic() {
        let q = Quadruple::planar_counterexample();
        let sims = pair_similarities(&q);
        assert!((sims.x0y1 - 0.5).abs() < 1e-15);
        assert!((sims.x1y1 - 0.5).abs() < 1e-15);
        assert!((sims.x1y0 - 0.5).abs() < 1e-15);
        assert_eq!(sims.x0y0, -1.0);
        assert!((bell_statistic(&q) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn boundary_and_orthogonal_statistics() {
        let e1 = vec![1.0, 0.0];
        let e2 = vec![0.0, 1.0];
        let same = Quadruple::new(e1.clone(), e1.clone(), e1.clone(), e1.clone()).unwrap();
        assert_eq!(bell_statistic(&same), 2.0);
        let orth = Quadruple::new(e1.clone(), e2.clone(), e1.clone(), e2.clone()).unwrap();
        assert_eq!(bell_statistic(&orth), 0.0);
    }

    #[test]
    fn non_unit_vectors_rejected() {
        let e1 = vec![1.0, 0.0];
        assert!(matches!(
            Quadruple::new(e1.clone(), vec![2.0, 0.0], e1.clone(), e1.clone()),
            Err(Error::NotUnit { index: 1, .. })
        ));
        assert!(matches!(
            Quadruple::new(e1.clone(), e1.clone(), vec![1.0], e1.clone()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn users(ids: [&str; 4]) -> UserQuadruple {
        ids.map(str::to_string)
    }

    fn counterexample_pattern() -> RealPattern {
        let q = Quadruple::planar_counterexample();
        let a = RealMatrix::from_fn(2, 4, |i, u| [&q.x0, &q.x1, &q.y0, &q.y1][u][i]);
        RealPattern::from_matrix(a)
            .with_ids(
                vec!["j1".into(), "j2".into()],
                ["x0", "x1", "y0", "y1"].map(String::from).to_vec(),
            )
            .unwrap()
    }

    #[test]
    fn audit_reports_the_violation() {
        let p = counterexample_pattern();
        let report = audit(&p, &[users(["x0", "x1", "y0", "y1"]), users(["x0", "x0", "x0", "x0"])]).unwrap();
        assert_eq!(report.summary.checked, 2);
        assert_eq!(report.summary.violated, 1);
        let top = &report.quadruples[0];
        assert!(top.violated);
        assert!((top.margin - 0.5).abs() < 1e-12);
        assert_eq!(report.summary.max_margin, Some(top.margin));
        assert!(!report.quadruples[1].violated);
    }

    #[test]
    fn audit_identical_users_no_violation() {
        let a = RealMatrix::from_rows(&[[1.0, 1.0, 1.0, 1.0], [2.0, 2.0, 2.0, 2.0]]).unwrap();
        let p = RealPattern::from_matrix(a);
        let report = audit(&p, &[users(["u1", "u2", "u3", "u4"])]).unwrap();
        assert!(!report.has_violation());
        let empty = audit(&p, &[]).unwrap();
        assert!(empty.quadruples.is_empty());
        assert_eq!(empty.summary.max_margin, None);
    }

    #[test]
    fn audit_errors() {
        let p = counterexample_pattern();
        assert_eq!(
            audit(&p, &[users(["x0", "x1", "y0", "nobody"])]).unwrap_err(),
            Error::UnknownIdentifier("nobody".into())
        );
        let z = RealPattern::from_matrix(RealMatrix::zeros(2, 4));
        assert!(matches!(
            audit(&z, &[users(["u1", "u2", "u3", "u4"])]),
            Err(Error::UndefinedSimilarity(_))
        ));
    }

    #[test]
    fn quadruple_sources() {
        let ids: Vec<String> = ["a", "b", "c", "d", "e"].map(String::from).to_vec();
        let all = QuadrupleSource::Exhaustive(ids.clone()).resolve().unwrap();
        assert_eq!(all.len(), 5 * 4 * 3 * 2);
        let s1 = QuadrupleSource::Sampled { users: ids.clone(), count: 20, seed: 7 }.resolve().unwrap();
        let s2 = QuadrupleSource::Sampled { users: ids.clone(), count: 20, seed: 7 }.resolve().unwrap();
        assert_eq!(s1, s2);
        for q in &s1 {
            let mut sorted = q.to_vec();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), 4);
        }
        assert!(QuadrupleSource::Exhaustive(ids[..3].to_vec()).resolve().is_err());
    }

    #[test]
    fn classical_examples() {
        let j = ItemUniverse::numbered(4);
        let b = BinaryBehavior::new(&j, vec![true, false, true, true]).unwrap();
        let r = classical_statistic(&b, &b, &b, &b).unwrap();
        assert_eq!(r.statistic, 2.0);
        assert!(r.within_bound());

        // X0 = ¬Y0, X1 = Y1 = Y0: terms −1, 1, 1, −(−1).
        let y0 = b.clone();
        let x0 = y0.negated();
        let r = classical_statistic(&x0, &y0, &y0, &y0).unwrap();
        assert_eq!(r.agreements, [0, 4, 4, 0]);
        assert_eq!(r.statistic, 2.0);

        let other = BinaryBehavior::new(&ItemUniverse::numbered(4), vec![true; 4]).unwrap();
        assert!(classical_statistic(&b, &b, &b, &other).is_ok());
        let short = BinaryBehavior::new(&ItemUniverse::numbered(3), vec![true; 3]).unwrap();
        assert_eq!(
            classical_statistic(&b, &b, &b, &short).unwrap_err(),
            Error::MismatchedItems
        );
        assert!(BinaryBehavior::new(&j, vec![true]).is_err());
    }

    #[test]
    fn triangle_examples() {
        let j = ItemUniverse::numbered(3);
        let x = BinaryBehavior::new(&j, vec![true, false, true]).unwrap();
        let r = verify_triangle_lemma(&x, &x, &x).unwrap();
        assert_eq!(r.disagreements, [0, 0, 0]);
        assert!(r.holds());

        let y = x.negated();
        let r = verify_triangle_lemma(&x, &y, &x).unwrap();
        assert_eq!(r.disagreements, [0, 3, 3]);
        assert_eq!(r.probabilities(), [0.0, 1.0, 1.0]);
        assert!(r.holds());
    }

    #[test]
    fn statistic_invariant_under_rotation() {
        let q = Quadruple::planar_counterexample();
        let (s, c) = 0.7f64.sin_cos();
        let rot = |v: &Vec<f64>| vec![c * v[0] - s * v[1], s * v[0] + c * v[1]];
        let r = Quadruple::new(rot(&q.x0), rot(&q.x1), rot(&q.y0), rot(&q.y1)).unwrap();
        assert!((bell_statistic(&q) - bell_statistic(&r)).abs() < 1e-10);
    }
}
