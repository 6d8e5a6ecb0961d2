//! Finite quotients of `Z^r` and of the integer Heisenberg group.

pub mod heisenberg;
pub mod lattice;
pub mod oracle;
pub mod quotient;
pub mod subgroup;
pub mod sylow;

pub use heisenberg::{HeisElem, HeisModuli};
pub use lattice::Lattice;
pub use oracle::brute_force_core_oracle;
pub use quotient::{image_in_quotient, image_order, quotient, FiniteQuotient, FiniteSubgroup};
pub use subgroup::{
    index, is_subgroup, normal_core, FinitePreimage, GroupDescriptor, GroupElement, Parametric, SubgroupDescriptor,
};
pub use sylow::sylow_decompose;
