//! Domain types, the lattice generator, integrand building blocks, special
//! functions and partition enumeration shared by the other modules.

mod contour;
mod lattice;
mod logvalue;
mod params;
mod partition;
mod special;
mod tuple;

pub use contour::{Contour, ContourKind, TrackedSqrt};
pub use lattice::{apply_delta, eval_f, eval_f_log, Window};
pub use logvalue::{LogComplex, MomentResult, Route};
pub use params::ModelParams;
pub use partition::{enumerate_partitions, partition_count, Partition};
pub use special::{digamma, ln_gamma, polygamma, trigamma};
pub use tuple::{OrderedPair, OrderedTuple};
