//! Subdomain partitions, interface classification and statically condensed
//! Schur-complement operators.

mod interface;
mod partition;
mod reduce;
mod subdomain;

pub use interface::{classify, DofClass, InterfaceLayout, MacroEntity, MacroKind, Site};
pub use partition::{partition_structured, Partition};
pub use reduce::InterfaceOperator;
pub use subdomain::{build_subdomain_ops, SubdomainOps};
