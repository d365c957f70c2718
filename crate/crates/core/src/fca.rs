//! Boolean-rig instantiation: formal contexts and concept lattices.
//!
//! Over 𝔹 the closure operators `M^U`, `M^J` unfold to the usual double
//! derivations of formal concept analysis, so they are computed directly
//! with packed bitsets instead of by dual matrix composition.

use std::collections::HashMap;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pattern::{parse, BoolPattern, Dataset};

/// Concept-count ceiling for [`enumerate_concepts`].
pub const DEFAULT_MAX_CONCEPTS: usize = 100_000;

/// Above this many concepts only covering edges are stored.
pub const ORDER_MATRIX_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct FormalContext {
    objects: Vec<String>,
    attributes: Vec<String>,
    /// Per object, the attributes it has.
    rows: Vec<FixedBitSet>,
    /// Per attribute, the objects having it.
    cols: Vec<FixedBitSet>,
}

impl FormalContext {
    /// `incidence[i][u]` says whether object `i` has attribute `u`.
    pub fn new(objects: Vec<String>, attributes: Vec<String>, incidence: &[Vec<bool>]) -> Result<Self> {
        if incidence.len() != objects.len() {
            return Err(Error::dims(objects.len(), incidence.len()));
        }
        let (n, m) = (objects.len(), attributes.len());
        let mut rows = vec![FixedBitSet::with_capacity(m); n];
        let mut cols = vec![FixedBitSet::with_capacity(n); m];
        for (i, row) in incidence.iter().enumerate() {
            if row.len() != m {
                return Err(Error::dims(m, row.len()));
            }
            for (u, &has) in row.iter().enumerate() {
                if has {
                    rows[i].insert(u);
                    cols[u].insert(i);
                }
            }
        }
        Ok(FormalContext {
            objects,
            attributes,
            rows,
            cols,
        })
    }

    /// Items become objects and users attributes; unassigned cells read as 0.
    pub fn from_pattern(p: &BoolPattern) -> Self {
        let (n, m) = p.shape();
        let incidence: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..m).map(|u| p.values().get(i, u)).collect())
            .collect();
        Self::new(p.items().to_vec(), p.users().to_vec(), &incidence)
            .expect("pattern shape is consistent")
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn has(&self, object: usize, attribute: usize) -> bool {
        self.rows[object].contains(attribute)
    }

    fn subset(len: usize, indices: &[usize]) -> Result<FixedBitSet> {
        let mut set = FixedBitSet::with_capacity(len);
        for &index in indices {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
            set.insert(index);
        }
        Ok(set)
    }

    pub fn object_set(&self, indices: &[usize]) -> Result<FixedBitSet> {
        Self::subset(self.objects.len(), indices)
    }

    pub fn attribute_set(&self, indices: &[usize]) -> Result<FixedBitSet> {
        Self::subset(self.attributes.len(), indices)
    }

    /// Object set from identifiers.
    pub fn objects_named(&self, names: &[&str]) -> Result<FixedBitSet> {
        let ix = names
            .iter()
            .map(|n| {
                self.objects
                    .iter()
                    .position(|o| o == n)
                    .ok_or_else(|| Error::UnknownIdentifier(n.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.object_set(&ix)
    }

    pub fn attributes_named(&self, names: &[&str]) -> Result<FixedBitSet> {
        let ix = names
            .iter()
            .map(|n| {
                self.attributes
                    .iter()
                    .position(|a| a == n)
                    .ok_or_else(|| Error::UnknownIdentifier(n.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.attribute_set(&ix)
    }

    fn check_len(set: &FixedBitSet, len: usize) -> Result<()> {
        if set.len() != len {
            return Err(Error::dims(len, set.len()));
        }
        Ok(())
    }

    /// Attributes shared by every object in `objects`.
    pub fn derive_attrs(&self, objects: &FixedBitSet) -> Result<FixedBitSet> {
        Self::check_len(objects, self.objects.len())?;
        Ok(self.derive_attrs_unchecked(objects))
    }

    /// Objects having every attribute in `attributes`.
    pub fn derive_objs(&self, attributes: &FixedBitSet) -> Result<FixedBitSet> {
        Self::check_len(attributes, self.attributes.len())?;
        Ok(self.derive_objs_unchecked(attributes))
    }

    fn derive_attrs_unchecked(&self, objects: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.attributes.len());
        out.insert_range(..);
        for i in objects.ones() {
            out.intersect_with(&self.rows[i]);
        }
        out
    }

    fn derive_objs_unchecked(&self, attributes: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.objects.len());
        out.insert_range(..);
        for u in attributes.ones() {
            out.intersect_with(&self.cols[u]);
        }
        out
    }

    /// `M^U(X)`: attributes implied by `X`.
    pub fn closure_users(&self, attributes: &FixedBitSet) -> Result<FixedBitSet> {
        Ok(self.derive_attrs_unchecked(&self.derive_objs(attributes)?))
    }

    /// `M^J(Y)`: objects implied by `Y`.
    pub fn closure_items(&self, objects: &FixedBitSet) -> Result<FixedBitSet> {
        Ok(self.derive_objs_unchecked(&self.derive_attrs(objects)?))
    }

    fn close_attrs(&self, attributes: &FixedBitSet) -> FixedBitSet {
        self.derive_attrs_unchecked(&self.derive_objs_unchecked(attributes))
    }

    fn close_objs(&self, objects: &FixedBitSet) -> FixedBitSet {
        self.derive_objs_unchecked(&self.derive_attrs_unchecked(objects))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Concept {
    extent: FixedBitSet,
    intent: FixedBitSet,
}

impl Concept {
    pub fn extent(&self) -> &FixedBitSet {
        &self.extent
    }

    pub fn intent(&self) -> &FixedBitSet {
        &self.intent
    }

    pub fn extent_indices(&self) -> Vec<usize> {
        self.extent.ones().collect()
    }

    pub fn intent_indices(&self) -> Vec<usize> {
        self.intent.ones().collect()
    }
}

#[derive(Debug, Clone)]
pub struct ConceptLattice {
    context: FormalContext,
    concepts: Vec<Concept>,
    by_extent: HashMap<FixedBitSet, usize>,
    /// `order[a]` holds every `b` with `a ≤ b`; absent for large lattices.
    order: Option<Vec<FixedBitSet>>,
    covers: Vec<(usize, usize)>,
}

/// All concepts of `ctx`, by NextClosure over attribute sets in lectic order.
pub fn enumerate_concepts(ctx: &FormalContext) -> Result<ConceptLattice> {
    enumerate_concepts_with(ctx, DEFAULT_MAX_CONCEPTS)
}

pub fn enumerate_concepts_with(ctx: &FormalContext, max_concepts: usize) -> Result<ConceptLattice> {
    let m = ctx.attributes.len();
    let mut intents = Vec::new();
    let mut current = ctx.close_attrs(&FixedBitSet::with_capacity(m));
    loop {
        if intents.len() == max_concepts {
            return Err(Error::ContextTooLarge(format!(
                "more than {max_concepts} concepts"
            )));
        }
        intents.push(current.clone());
        match next_closure(ctx, current) {
            Some(next) => current = next,
            None => break,
        }
    }

    let mut concepts: Vec<Concept> = intents
        .into_iter()
        .map(|intent| Concept {
            extent: ctx.derive_objs_unchecked(&intent),
            intent,
        })
        .collect();
    concepts.sort_by(|a, b| {
        a.extent
            .count_ones(..)
            .cmp(&b.extent.count_ones(..))
            .then_with(|| a.extent.ones().cmp(b.extent.ones()))
    });
    Ok(ConceptLattice::build(ctx.clone(), concepts))
}

/// The lectically next closed attribute set after `closed`, if any.
fn next_closure(ctx: &FormalContext, mut closed: FixedBitSet) -> Option<FixedBitSet> {
    for i in (0..ctx.attributes.len()).rev() {
        if closed.contains(i) {
            closed.set(i, false);
            continue;
        }
        let mut candidate = closed.clone();
        candidate.insert(i);
        let next = ctx.close_attrs(&candidate);
        // `closed` now holds only elements below i.
        if (0..i).all(|j| !next.contains(j) || closed.contains(j)) {
            return Some(next);
        }
    }
    None
}

impl ConceptLattice {
    fn build(context: FormalContext, concepts: Vec<Concept>) -> Self {
        let by_extent: HashMap<FixedBitSet, usize> = concepts
            .iter()
            .enumerate()
            .map(|(k, c)| (c.extent.clone(), k))
            .collect();
        let n = concepts.len();

        let order = (n <= ORDER_MATRIX_LIMIT).then(|| {
            (0..n)
                .map(|a| {
                    let mut up = FixedBitSet::with_capacity(n);
                    for (b, c) in concepts.iter().enumerate() {
                        if concepts[a].extent.is_subset(&c.extent) {
                            up.insert(b);
                        }
                    }
                    up
                })
                .collect()
        });

        // Upper covers of `a` are the minimal closures of extent(a) ∪ {o}.
        let mut covers = Vec::new();
        for (a, c) in concepts.iter().enumerate() {
            let mut candidates: Vec<usize> = Vec::new();
            for o in 0..context.objects.len() {
                if c.extent.contains(o) {
                    continue;
                }
                let mut ext = c.extent.clone();
                ext.insert(o);
                let up = by_extent[&context.close_objs(&ext)];
                if !candidates.contains(&up) {
                    candidates.push(up);
                }
            }
            let mut upper: Vec<usize> = candidates
                .iter()
                .copied()
                .filter(|&b| {
                    !candidates.iter().any(|&d| {
                        d != b && concepts[d].extent.is_subset(&concepts[b].extent)
                    })
                })
                .collect();
            upper.sort_unstable();
            covers.extend(upper.into_iter().map(|b| (a, b)));
        }

        ConceptLattice {
            context,
            concepts,
            by_extent,
            order,
            covers,
        }
    }

    pub fn context(&self) -> &FormalContext {
        &self.context
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn concept(&self, index: usize) -> &Concept {
        &self.concepts[index]
    }

    /// Smallest extent.
    pub fn bottom(&self) -> usize {
        0
    }

    /// Largest extent.
    pub fn top(&self) -> usize {
        self.concepts.len() - 1
    }

    /// Covering pairs `(lower, upper)`.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        match &self.order {
            Some(order) => order[a].contains(b),
            None => self.concepts[a].extent.is_subset(&self.concepts[b].extent),
        }
    }

    /// Whether the full order relation is stored.
    pub fn has_order_matrix(&self) -> bool {
        self.order.is_some()
    }

    pub fn index_of(&self, c: &Concept) -> Result<usize> {
        self.by_extent
            .get(&c.extent)
            .copied()
            .filter(|&k| self.concepts[k].intent == c.intent)
            .ok_or(Error::ForeignConcept)
    }

    /// Concept whose extent is exactly `extent`, if closed.
    pub fn find_by_extent(&self, extent: &FixedBitSet) -> Option<usize> {
        self.by_extent.get(extent).copied()
    }

    pub fn meet_index(&self, a: usize, b: usize) -> usize {
        let mut ext = self.concepts[a].extent.clone();
        ext.intersect_with(&self.concepts[b].extent);
        self.by_extent[&ext]
    }

    pub fn join_index(&self, a: usize, b: usize) -> usize {
        let mut ext = self.concepts[a].extent.clone();
        ext.union_with(&self.concepts[b].extent);
        self.by_extent[&self.context.close_objs(&ext)]
    }

    /// Extent intersection.
    pub fn meet(&self, a: &Concept, b: &Concept) -> Result<&Concept> {
        let k = self.meet_index(self.index_of(a)?, self.index_of(b)?);
        Ok(&self.concepts[k])
    }

    /// Closure of the extent union.
    pub fn join(&self, a: &Concept, b: &Concept) -> Result<&Concept> {
        let k = self.join_index(self.index_of(a)?, self.index_of(b)?);
        Ok(&self.concepts[k])
    }

    pub fn export(&self) -> LatticeExport {
        let sorted = |set: &FixedBitSet, names: &[String]| {
            let mut ids: Vec<String> = set.ones().map(|k| names[k].clone()).collect();
            ids.sort();
            ids
        };
        LatticeExport {
            concepts: self
                .concepts
                .iter()
                .enumerate()
                .map(|(id, c)| ConceptExport {
                    id,
                    extent: sorted(&c.extent, &self.context.objects),
                    intent: sorted(&c.intent, &self.context.attributes),
                })
                .collect(),
            edges: self.covers.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    /// Hasse diagram in Graphviz syntax, edges pointing upward.
    pub fn to_dot(&self) -> String {
        let export = self.export();
        let mut out = String::from("digraph concepts {\n  rankdir=BT;\n  node [shape=box];\n");
        for c in &export.concepts {
            let _ = writeln!(
                out,
                "  c{} [label=\"{{{}}}\\n{{{}}}\"];",
                c.id,
                escape(&c.extent.join(", ")),
                escape(&c.intent.join(", "))
            );
        }
        for [a, b] in &export.edges {
            let _ = writeln!(out, "  c{a} -> c{b};");
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConceptExport {
    pub id: usize,
    pub extent: Vec<String>,
    pub intent: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeExport {
    pub concepts: Vec<ConceptExport>,
    pub edges: Vec<[usize; 2]>,
}

/// A triple where `x ∧ (y ∨ z) ≠ (x ∧ y) ∨ (x ∧ z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistributivityViolation {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    /// `x ∧ (y ∨ z)`
    pub lhs: usize,
    /// `(x ∧ y) ∨ (x ∧ z)`
    pub rhs: usize,
}

/// Every ordered triple violating the distributive law, in `(x, y, z)` order.
pub fn audit_distributivity(lattice: &ConceptLattice) -> Vec<DistributivityViolation> {
    let n = lattice.len();
    let table = |f: &(dyn Fn(usize, usize) -> usize + Sync)| -> Vec<usize> {
        (0..n * n).into_par_iter().map(|k| f(k / n, k % n)).collect()
    };
    let meets = table(&|a, b| lattice.meet_index(a, b));
    let joins = table(&|a, b| lattice.join_index(a, b));

    (0..n)
        .into_par_iter()
        .flat_map_iter(|x| {
            let (meets, joins) = (&meets, &joins);
            (0..n).flat_map(move |y| {
                (0..n).filter_map(move |z| {
                    let lhs = meets[x * n + joins[y * n + z]];
                    let rhs = joins[meets[x * n + y] * n + meets[x * n + z]];
                    (lhs != rhs).then_some(DistributivityViolation { x, y, z, lhs, rhs })
                })
            })
        })
        .collect()
}

/// The shipped animal taxonomy (birds, humans, lizards, and a bee).
pub fn animal_context() -> FormalContext {
    match parse(include_str!("../data/animals.ctx")) {
        Ok(Dataset::Bool(p)) => FormalContext::from_pattern(&p),
        other => panic!("bundled animal context is malformed: {other:?}"),
    }
}

/// Context whose concept lattice is the powerset of `n` attributes.
pub fn powerset_context(n: usize) -> FormalContext {
    let names: Vec<String> = (1..=n).map(|k| format!("a{k}")).collect();
    let incidence: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|u| i != u).collect()).collect();
    FormalContext::new(names.clone(), names, &incidence).expect("square incidence")
}

/// Context whose concept lattice is a chain of `n + 1` elements.
pub fn chain_context(n: usize) -> FormalContext {
    let objects: Vec<String> = (1..=n).map(|k| format!("g{k}")).collect();
    let attributes: Vec<String> = (1..=n).map(|k| format!("m{k}")).collect();
    let incidence: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|u| i < u).collect()).collect();
    FormalContext::new(objects, attributes, &incidence).expect("square incidence")
}
