pub mod chain;
pub mod classifier;
pub mod config;
pub mod decay;
pub mod dispersion;
pub mod error;
pub mod jacobi;
pub mod propagator;
pub mod simulator;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/chains.md")]
    struct Chains;
    #[doc = include_str!("../../../book/src/dispersion.md")]
    struct Dispersion;
    #[doc = include_str!("../../../book/src/classification.md")]
    struct Classification;
    #[doc = include_str!("../../../book/src/kernels.md")]
    struct Kernels;
    #[doc = include_str!("../../../book/src/simulation.md")]
    struct Simulation;
    #[doc = include_str!("../../../book/src/decay.md")]
    struct Decay;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
