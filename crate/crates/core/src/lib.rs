pub mod cli;
pub mod error;
pub mod fgh;
pub mod geometry;
pub mod io;
pub mod isomonodromic;
pub mod lattice;
pub mod lax;
pub mod patterns;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/lattice.md")]
    pub struct Lattice;
    #[doc = include_str!("../../../book/src/fgh.md")]
    pub struct Fgh;
    #[doc = include_str!("../../../book/src/lax.md")]
    pub struct Lax;
    #[doc = include_str!("../../../book/src/isomonodromic.md")]
    pub struct Isomonodromic;
    #[doc = include_str!("../../../book/src/patterns.md")]
    pub struct Patterns;
    #[doc = include_str!("../../../book/src/io.md")]
    pub struct Io;
}
