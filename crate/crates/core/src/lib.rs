//! Nonlocal (fractional) curvature functionals on discrete hypersurfaces.
//!
//! The crate evaluates the fractional mean curvature `H_s`, its absolute
//! variant `|A|_s`, the energies built from them (fractional Willmore,
//! nonlocal bending, tangent-point), a set of geometric probes (Monge patch
//! radius, Ahlfors ratio, chord-arc constant, sphere stability) and an
//! area-constrained descent on the bending energy.
//!
//! Everything here is pure computation over immutable meshes and builds
//! without `std` (an allocator is required). The `std` feature only enables
//! multi-threaded evaluation of the outer loops; results are bit-identical for
//! every worker count.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod curvature;
pub mod error;
pub mod exec;
pub mod flow;
pub mod functionals;
pub mod geodesic;
pub mod math;
pub mod oracles;
pub mod params;
pub mod probes;
pub mod quadrature;
pub mod seminorms;
pub mod surface;

pub use error::{Error, Result};
pub use exec::Workers;
pub use functionals::{EnergyReport, MeshDescriptor, PointwiseCurvature};
pub use params::{CodimMode, EnergyParameters, Normalization};
pub use quadrature::{DiagonalPolicy, NearField, QuadratureOrder, QuadratureScheme, SchemeOptions};
pub use surface::{DiscreteHypersurface, Embedding};
