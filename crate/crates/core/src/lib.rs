//! Exact computations for extremal curve germs with reducible central
//! curve: dual graphs and codiscrepancies, cyclic quotient singularities,
//! ℓ-divisor degree calculus, class-group primitivity and the
//! classification rule engine.

pub mod analysis;
pub mod class_group;
pub mod corpus;
pub mod cyclic_quot;
pub mod dual_graph;
pub mod ell_calc;
pub mod germ_rules;
pub mod linalg;
pub mod rational;
pub mod resolution;
pub mod verify;

pub use analysis::{analyze, Analysis};
pub use class_group::{Generator, NonGorPoint, PrimitivityReport};
pub use corpus::Corpus;
pub use cyclic_quot::{CycQuot, TCertificate, TVerdict};
pub use dual_graph::{ConfigGraph, IntersectionMatrix, VertexKind};
pub use ell_calc::{DisproofTrace, EllDivisor, GlobalEllDivisor, KadSubcase};
pub use germ_rules::{ComponentType, GermDescriptor, GermKind, TableVerdict};
pub use rational::Q;
pub use resolution::{Codiscrepancy, KReport, SingularityClass};
pub use verify::{verify_paper, VerifyReport};
