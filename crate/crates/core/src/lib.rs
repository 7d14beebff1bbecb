//! Exact p-adic Sato Grassmannian machinery: p-adic fields, Laurent series, partitions and
//! Schur functions, Grassmannian points, superelliptic curve models, and the soliton pipeline
//! certifying that torsion points of Jacobians avoid the theta divisor.

pub mod padic;
pub mod series;
pub mod combinat;
pub mod grassmann;
pub mod curve;
pub mod soliton;
