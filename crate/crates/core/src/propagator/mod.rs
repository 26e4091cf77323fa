//! Green functions of the bulk and kernels of the defect block.

pub mod green;
pub mod kernel;

pub use green::{free_green, halfline_green, GreenMatrix, GreenTable};
pub use kernel::{gamma_kernel, kernel_n, zero_mode_limit, KernelCache, KernelSeries, PolePolicy};
