//! Latent semantics over rigs.
//!
//! A pattern matrix `A : J × U → R` rates items `J` by users `U`. Over the
//! reals, its isometric decomposition is the singular value decomposition
//! (latent semantic indexing, HITS); over the booleans it is the concept
//! lattice of formal concept analysis. On top of that sit inner-product
//! similarity, trace ranking, and an audit showing that rescaled cosine
//! similarities cannot be classical agreement probabilities.
//!
//! | module       | contents                                            |
//! |--------------|-----------------------------------------------------|
//! | [`rig`]      | rigs with conjugation, matrices, adjoints, products |
//! | [`pattern`]  | pattern matrices, file formats, balancing, observables |
//! | [`spectral`] | one-sided Jacobi SVD, topics, HITS                  |
//! | [`fca`]      | formal contexts, NextClosure, distributivity audit  |
//! | [`measures`] | similarity, trace rank, ℓ∞ distance                 |
//! | [`bell`]     | the similarity inequality, classical checks         |

pub mod bell;
pub mod error;
pub mod fca;
pub mod measures;
pub mod pattern;
pub mod rig;
pub mod spectral;

pub use error::{Error, Result};
pub use pattern::{Adjustment, Dataset, Observable, PatternMatrix, QuantumState, RealPattern, BoolPattern};
pub use rig::{BoolMatrix, BoolRig, Matrix, RealMatrix, RealRig, Rig};
pub use spectral::{SpectralModel, TopicPair};
