//! Geometric diagnostics on discrete hypersurfaces.

mod ahlfors;
mod chord_arc;
mod patch;
mod stability;

pub use ahlfors::{ahlfors_ratio, ball_area};
pub use chord_arc::{chord_arc_constant, ChordArcOptions, ChordArcReport};
pub use patch::{extract_patch, PatchChart, PatchNode, PatchOptions};
pub use stability::{stability_probe, StabilityReport};
pub(crate) use stability::{distance_to_mesh, sphere_directions};
