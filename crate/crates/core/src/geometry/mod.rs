//! Geometry of the strip S = R x T: points, contours, patches, masks,
//! vertical averages, points of centering and symmetric differences.

mod centering;
mod contour;
mod density;
mod intersect;
mod io;
mod mask;
mod patch;
mod point;

pub use centering::{point_of_centering, weighted_sym_diff, SymDiffPiece, WeightedSymDiff};
pub use contour::{Contour, Segment};
pub use density::{vertical_average, Density1D, UniformGrid};
pub use intersect::find_self_intersection;
pub use io::{ContourFile, PatchFile};
pub use mask::{Grid, Mask};
pub use patch::{default_cell_size, patch_area, Patch, DEFAULT_CELL};
pub(crate) use patch::default_band;
pub use point::{reduce_y, StripPoint};
pub(crate) use point::wrap as wrap_angle;
