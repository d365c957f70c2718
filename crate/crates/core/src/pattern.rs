//! Pattern matrices: ratings of items by users over a rig, with an
//! explicit assignment mask.
//!
//! Unassigned cells hold the rig's zero in the value matrix and `false` in
//! the mask, so "padding by zeros" is just forgetting the mask. Balancing
//! and normalization only exist for real ratings.

use std::collections::HashMap;
use std::io::Read;

use crate::error::{Error, Result};
use crate::rig::{adjoint, matmul, BoolRig, Matrix, RealMatrix, RealRig, Rig};
use crate::spectral::symmetric_eigenvalues;

/// Symmetry tolerance for observables.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Lowest admissible eigenvalue of an observable, relative to `max(1, ‖M‖_F)`.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PatternMatrix<R: Rig> {
    items: Vec<String>,
    users: Vec<String>,
    values: Matrix<R>,
    mask: Vec<bool>,
}

pub type RealPattern = PatternMatrix<RealRig>;
pub type BoolPattern = PatternMatrix<BoolRig>;

fn check_unique(ids: &[String]) -> Result<()> {
    let mut seen = HashMap::with_capacity(ids.len());
    for id in ids {
        if seen.insert(id.as_str(), ()).is_some() {
            return Err(Error::DuplicateIdentifier(id.clone()));
        }
    }
    Ok(())
}

fn default_ids(prefix: char, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

impl<R: Rig> PatternMatrix<R> {
    /// Builds a pattern matrix. Values at unassigned cells are reset to zero.
    pub fn new(
        items: Vec<String>,
        users: Vec<String>,
        values: Matrix<R>,
        mask: Vec<bool>,
    ) -> Result<Self> {
        if values.shape() != (items.len(), users.len()) {
            return Err(Error::dims(
                format!("{}x{}", items.len(), users.len()),
                format!("{}x{}", values.rows(), values.cols()),
            ));
        }
        if mask.len() != items.len() * users.len() {
            return Err(Error::dims(items.len() * users.len(), mask.len()));
        }
        check_unique(&items)?;
        check_unique(&users)?;
        let mut values = values;
        for i in 0..items.len() {
            for u in 0..users.len() {
                if !mask[i * users.len() + u] {
                    values.set(i, u, R::zero());
                }
            }
        }
        Ok(PatternMatrix {
            items,
            users,
            values,
            mask,
        })
    }

    /// A fully assigned matrix with identifiers `i1..` and `u1..`.
    pub fn from_matrix(values: Matrix<R>) -> Self {
        let (rows, cols) = values.shape();
        PatternMatrix {
            items: default_ids('i', rows),
            users: default_ids('u', cols),
            values,
            mask: vec![true; rows * cols],
        }
    }

    pub fn with_ids(self, items: Vec<String>, users: Vec<String>) -> Result<Self> {
        Self::new(items, users, self.values, self.mask)
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    /// Value matrix with unassigned cells padded by zero.
    pub fn values(&self) -> &Matrix<R> {
        &self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn is_assigned(&self, item: usize, user: usize) -> bool {
        self.mask[item * self.users.len() + user]
    }

    pub fn get(&self, item: usize, user: usize) -> Option<R::Elem> {
        self.is_assigned(item, user)
            .then(|| self.values.get(item, user))
    }

    pub fn item_index(&self, id: &str) -> Result<usize> {
        self.items
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::UnknownIdentifier(id.to_string()))
    }

    pub fn user_index(&self, id: &str) -> Result<usize> {
        self.users
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::UnknownIdentifier(id.to_string()))
    }

    pub fn assigned_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_total(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    /// Assigned fraction of all cells; zero for an empty matrix.
    pub fn density(&self) -> f64 {
        if self.mask.is_empty() {
            0.0
        } else {
            self.assigned_count() as f64 / self.mask.len() as f64
        }
    }

    pub fn row_counts(&self) -> Vec<usize> {
        (0..self.items.len())
            .map(|i| (0..self.users.len()).filter(|&u| self.is_assigned(i, u)).count())
            .collect()
    }

    pub fn column_counts(&self) -> Vec<usize> {
        (0..self.users.len())
            .map(|u| (0..self.items.len()).filter(|&i| self.is_assigned(i, u)).count())
            .collect()
    }

    /// Items without any assigned rating.
    pub fn empty_rows(&self) -> Vec<usize> {
        self.row_counts()
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (c == 0).then_some(i))
            .collect()
    }

    pub fn empty_columns(&self) -> Vec<usize> {
        self.column_counts()
            .iter()
            .enumerate()
            .filter_map(|(u, &c)| (c == 0).then_some(u))
            .collect()
    }

    /// Marks every cell assigned; unassigned cells already hold zero.
    pub fn padded(&self) -> Self {
        PatternMatrix {
            mask: vec![true; self.mask.len()],
            ..self.clone()
        }
    }

    /// Swaps the roles of items and users.
    pub fn transposed(&self) -> Self {
        let (rows, cols) = self.shape();
        let mask = (0..cols)
            .flat_map(|u| (0..rows).map(move |i| (i, u)))
            .map(|(i, u)| self.mask[i * cols + u])
            .collect();
        PatternMatrix {
            items: self.users.clone(),
            users: self.items.clone(),
            values: self.values.transpose(),
            mask,
        }
    }
}

impl RealPattern {
    /// Shifts each row's assigned ratings by minus their mean, then pads.
    /// Rows with no assigned rating become zero rows.
    pub fn item_balance(&self) -> Self {
        let (rows, cols) = self.shape();
        let mut values = self.values.clone();
        for i in 0..rows {
            let assigned: Vec<usize> = (0..cols).filter(|&u| self.is_assigned(i, u)).collect();
            let mean = if assigned.is_empty() {
                0.0
            } else {
                assigned.iter().map(|&u| self.values.get(i, u)).sum::<f64>()
                    / assigned.len() as f64
            };
            for u in 0..cols {
                let v = if self.is_assigned(i, u) {
                    self.values.get(i, u) - mean
                } else {
                    0.0
                };
                values.set(i, u, v);
            }
        }
        PatternMatrix {
            items: self.items.clone(),
            users: self.users.clone(),
            values,
            mask: vec![true; rows * cols],
        }
    }

    pub fn user_balance(&self) -> Self {
        self.transposed().item_balance().transposed()
    }

    /// Scales each row of the padded matrix to unit ℓ2 norm; zero rows stay zero.
    pub fn item_normalize(&self) -> Self {
        let (rows, cols) = self.shape();
        let mut values = self.values.clone();
        for i in 0..rows {
            let row = values.row_mut(i);
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
        PatternMatrix {
            items: self.items.clone(),
            users: self.users.clone(),
            values,
            mask: vec![true; rows * cols],
        }
    }

    pub fn user_normalize(&self) -> Self {
        self.transposed().item_normalize().transposed()
    }

    pub fn apply(&self, adjustment: Adjustment) -> Self {
        match adjustment {
            Adjustment::ItemBalance => self.item_balance(),
            Adjustment::UserBalance => self.user_balance(),
            Adjustment::ItemNormalize => self.item_normalize(),
            Adjustment::UserNormalize => self.user_normalize(),
        }
    }

    /// Correlation observables `(M^J, M^U) = (AA‡, A‡A)` of the padded matrix.
    pub fn correlations(&self) -> Result<(Observable, Observable)> {
        correlations(&self.values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Adjustment {
    ItemBalance,
    UserBalance,
    ItemNormalize,
    UserNormalize,
}

impl Adjustment {
    pub fn name(self) -> &'static str {
        match self {
            Adjustment::ItemBalance => "item-balance",
            Adjustment::UserBalance => "user-balance",
            Adjustment::ItemNormalize => "item-normalize",
            Adjustment::UserNormalize => "user-normalize",
        }
    }
}

impl std::str::FromStr for Adjustment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "item-balance" => Ok(Adjustment::ItemBalance),
            "user-balance" => Ok(Adjustment::UserBalance),
            "item-normalize" => Ok(Adjustment::ItemNormalize),
            "user-normalize" => Ok(Adjustment::UserNormalize),
            other => Err(Error::InvalidParameter(format!(
                "unknown adjustment `{other}`"
            ))),
        }
    }
}

/// Which index set a correlation matrix ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `M^J = AA‡`, over items.
    Items,
    /// `M^U = A‡A`, over users.
    Users,
}

/// A self-adjoint positive semidefinite real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: RealMatrix,
    side: Side,
}

impl Observable {
    pub fn new(matrix: RealMatrix, side: Side) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c {
            return Err(Error::NotObservable(format!("{r}x{c} is not square")));
        }
        if !matrix.is_finite() {
            return Err(Error::NotObservable("non-finite entries".into()));
        }
        let asym = matrix
            .max_abs_diff(&matrix.transpose())
            .unwrap_or_default();
        if asym > SYMMETRY_TOL {
            return Err(Error::NotObservable(format!(
                "asymmetry {asym:e} exceeds {SYMMETRY_TOL:e}"
            )));
        }
        let floor = -PSD_TOL * matrix.frobenius_norm().max(1.0);
        if let Some(&min) = symmetric_eigenvalues(&matrix)?.last() {
            if min < floor {
                return Err(Error::NotObservable(format!(
                    "negative eigenvalue {min:e}"
                )));
            }
        }
        Ok(Observable { matrix, side })
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `<x|M|y> = y‡ M x`.
    pub fn expectation(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let mx = self.matrix.apply(x)?;
        Ok(crate::rig::dot(y, &mx))
    }
}

/// `(M^J, M^U) = (AA‡, A‡A)` for a real matrix.
pub fn correlations(a: &RealMatrix) -> Result<(Observable, Observable)> {
    let adj = adjoint(a);
    let items = matmul(a, &adj)?;
    let users = matmul(&adj, a)?;
    Ok((
        Observable::new(items, Side::Items)?,
        Observable::new(users, Side::Users)?,
    ))
}

/// An observable rescaled to unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    observable: Observable,
    original_trace: f64,
}

impl QuantumState {
    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn matrix(&self) -> &RealMatrix {
        self.observable.matrix()
    }

    pub fn trace(&self) -> f64 {
        self.observable.trace()
    }

    /// Trace of the observable before normalization.
    pub fn original_trace(&self) -> f64 {
        self.original_trace
    }
}

pub fn to_state(m: &Observable) -> Result<QuantumState> {
    let trace = m.trace();
    if trace.is_nan() || trace <= 0.0 {
        return Err(Error::NullObservable(trace));
    }
    Ok(QuantumState {
        observable: Observable {
            matrix: m.matrix.scale(1.0 / trace),
            side: m.side,
        },
        original_trace: trace,
    })
}

/// A parsed input file, tagged by the rig its header declares.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Real(RealPattern),
    Bool(BoolPattern),
}

impl Dataset {
    pub fn rig_name(&self) -> &'static str {
        match self {
            Dataset::Real(_) => RealRig::NAME,
            Dataset::Bool(_) => BoolRig::NAME,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Dataset::Real(p) => p.shape(),
            Dataset::Bool(p) => p.shape(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RigTag {
    Real,
    Bool,
}

struct Lines<'a> {
    /// (1-based line number, trimmed content), comments and blanks removed.
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Lines { lines, pos: 0 }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let l = self.peek();
        self.pos += l.is_some() as usize;
        l
    }

    fn rest(&self) -> &[(usize, &'a str)] {
        &self.lines[self.pos..]
    }
}

fn read_text(mut source: impl Read) -> Result<String> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes).map_err(|e| Error::Parse {
        line: 0,
        message: format!("read failed: {e}"),
    })?;
    String::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        message: format!("invalid UTF-8: {e}"),
    })
}

fn parse_header(lines: &mut Lines<'_>) -> Result<Option<RigTag>> {
    let Some((n, line)) = lines.peek() else {
        return Ok(None);
    };
    let Some(tag) = line.strip_prefix("rig:") else {
        return Ok(None);
    };
    lines.next();
    match tag.trim() {
        "real" => Ok(Some(RigTag::Real)),
        "bool" => Ok(Some(RigTag::Bool)),
        other => Err(Error::Parse {
            line: n,
            message: format!("unknown rig `{other}` (expected real or bool)"),
        }),
    }
}

fn parse_id_line(lines: &mut Lines<'_>, key: &str) -> Option<(usize, Vec<String>)> {
    let (n, line) = lines.peek()?;
    let rest = line.strip_prefix(key)?.strip_prefix(':')?;
    lines.next();
    Some((n, rest.split_whitespace().map(str::to_string).collect()))
}

fn is_dims_line(line: &str) -> bool {
    let mut parts = line.split_whitespace();
    matches!(
        (parts.next(), parts.next(), parts.next()),
        (Some(a), Some(b), None) if a.parse::<usize>().is_ok() && b.parse::<usize>().is_ok()
    )
}

/// Parses a triplet or dense file, detecting the layout from content.
///
/// Input consisting only of blanks and comments yields an empty real matrix.
pub fn parse(text: &str) -> Result<Dataset> {
    let mut lines = Lines::new(text);
    if lines.peek().is_none() {
        return Ok(Dataset::Real(RealPattern::from_matrix(Matrix::zeros(0, 0))));
    }
    let header = parse_header(&mut lines)?;
    let dense = lines
        .peek()
        .is_some_and(|(_, l)| l.starts_with("items:") || l.starts_with("users:") || is_dims_line(l));
    if dense {
        match header.unwrap_or(RigTag::Real) {
            RigTag::Real => parse_dense::<RealRig>(&mut lines).map(Dataset::Real),
            RigTag::Bool => parse_dense::<BoolRig>(&mut lines).map(Dataset::Bool),
        }
    } else {
        match header {
            Some(RigTag::Real) => parse_triplet_body::<RealRig>(&lines).map(Dataset::Real),
            Some(RigTag::Bool) => parse_triplet_body::<BoolRig>(&lines).map(Dataset::Bool),
            None => Err(Error::Parse {
                line: lines.peek().map_or(1, |(n, _)| n),
                message: "missing `rig: real|bool` header".into(),
            }),
        }
    }
}

pub fn ingest(source: impl Read) -> Result<Dataset> {
    parse(&read_text(source)?)
}

/// Reads `item_id,user_id,rating` lines after a `rig:` header.
pub fn ingest_triplets(source: impl Read) -> Result<Dataset> {
    let text = read_text(source)?;
    let mut lines = Lines::new(&text);
    if lines.peek().is_none() {
        return Ok(Dataset::Real(RealPattern::from_matrix(Matrix::zeros(0, 0))));
    }
    match parse_header(&mut lines)? {
        Some(RigTag::Real) => parse_triplet_body::<RealRig>(&lines).map(Dataset::Real),
        Some(RigTag::Bool) => parse_triplet_body::<BoolRig>(&lines).map(Dataset::Bool),
        None => Err(Error::Parse {
            line: lines.peek().map_or(1, |(n, _)| n),
            message: "missing `rig: real|bool` header".into(),
        }),
    }
}

fn parse_triplet_body<R: Rig>(lines: &Lines<'_>) -> Result<PatternMatrix<R>> {
    let mut items: Vec<String> = Vec::new();
    let mut users: Vec<String> = Vec::new();
    let mut item_ix: HashMap<String, usize> = HashMap::new();
    let mut user_ix: HashMap<String, usize> = HashMap::new();
    let mut entries: HashMap<(usize, usize), R::Elem> = HashMap::new();

    for &(n, line) in lines.rest() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [item, user, rating] = fields[..] else {
            return Err(Error::Parse {
                line: n,
                message: format!("expected `item,user,rating`, found {} fields", fields.len()),
            });
        };
        if item.is_empty() || user.is_empty() {
            return Err(Error::Parse {
                line: n,
                message: "empty identifier".into(),
            });
        }
        let value = R::parse_elem(rating).ok_or_else(|| Error::Parse {
            line: n,
            message: format!("rating `{rating}` is not a valid {} value", R::NAME),
        })?;
        let i = *item_ix.entry(item.to_string()).or_insert_with(|| {
            items.push(item.to_string());
            items.len() - 1
        });
        let u = *user_ix.entry(user.to_string()).or_insert_with(|| {
            users.push(user.to_string());
            users.len() - 1
        });
        if entries.insert((i, u), value).is_some() {
            return Err(Error::DuplicateAssignment {
                line: n,
                item: item.to_string(),
                user: user.to_string(),
            });
        }
    }

    let (rows, cols) = (items.len(), users.len());
    let mut values = Matrix::<R>::zeros(rows, cols);
    let mut mask = vec![false; rows * cols];
    for (&(i, u), &v) in &entries {
        values.set(i, u, v);
        mask[i * cols + u] = true;
    }
    PatternMatrix::new(items, users, values, mask)
}

fn parse_dense<R: Rig>(lines: &mut Lines<'_>) -> Result<PatternMatrix<R>> {
    let mut item_ids = None;
    let mut user_ids = None;
    loop {
        if let Some(ids) = parse_id_line(lines, "items") {
            item_ids = Some(ids);
        } else if let Some(ids) = parse_id_line(lines, "users") {
            user_ids = Some(ids);
        } else {
            break;
        }
    }
    let (n, dims) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "missing `rows cols` line".into(),
    })?;
    if !is_dims_line(dims) {
        return Err(Error::Parse {
            line: n,
            message: format!("expected `rows cols`, found `{dims}`"),
        });
    }
    let mut it = dims.split_whitespace().map(|t| t.parse::<usize>().unwrap());
    let (rows, cols) = (it.next().unwrap(), it.next().unwrap());

    let mut values = Vec::with_capacity(rows * cols);
    let mut mask = Vec::with_capacity(rows * cols);
    let mut last_line = n;
    for &(n, line) in lines.rest() {
        last_line = n;
        for tok in line.split_whitespace() {
            if values.len() == rows * cols {
                return Err(Error::Parse {
                    line: n,
                    message: format!("more than {} entries", rows * cols),
                });
            }
            if tok == "*" {
                values.push(R::zero());
                mask.push(false);
            } else {
                let v = R::parse_elem(tok).ok_or_else(|| Error::Parse {
                    line: n,
                    message: format!("entry `{tok}` is not a valid {} value", R::NAME),
                })?;
                values.push(v);
                mask.push(true);
            }
        }
    }
    if values.len() != rows * cols {
        return Err(Error::Parse {
            line: last_line,
            message: format!("expected {} entries, found {}", rows * cols, values.len()),
        });
    }

    let check_ids = |ids: Option<(usize, Vec<String>)>, len: usize, prefix: char| match ids {
        None => Ok(default_ids(prefix, len)),
        Some((_, ids)) if ids.len() == len => Ok(ids),
        Some((line, ids)) => Err(Error::Parse {
            line,
            message: format!("expected {len} identifiers, found {}", ids.len()),
        }),
    };
    let items = check_ids(item_ids, rows, 'i')?;
    let users = check_ids(user_ids, cols, 'u')?;
    PatternMatrix::new(items, users, Matrix::from_vec(rows, cols, values)?, mask)
}
