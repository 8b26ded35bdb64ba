//! Problem objects: the kernel, initial histories, trajectories and segments.

mod history;
mod kernel;
mod trajectory;

pub use history::{segment, History};
pub use kernel::Kernel;
pub use trajectory::{Interp, Trajectory};
