pub mod construct;
pub mod error;
pub mod exponent;
pub mod grid_fn;
pub mod halfline;
pub mod numeric;
pub mod params;
pub mod report;
pub mod smoothness;
pub mod verify;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use grid_fn::{GridFunction, StepRearrangement};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grid-functions.md")]
    mod grid_functions {}
    #[doc = include_str!("../../../book/src/halfline.md")]
    mod halfline {}
    #[doc = include_str!("../../../book/src/smoothness.md")]
    mod smoothness {}
    #[doc = include_str!("../../../book/src/parameters.md")]
    mod parameters {}
    #[doc = include_str!("../../../book/src/construction.md")]
    mod construction {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
