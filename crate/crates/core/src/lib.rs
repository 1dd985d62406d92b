//! Walks on ordinals below epsilon-zero, ordinal-indexed coherent families of
//! functions, and Cech cohomology of finite cover models.

pub mod error;
pub mod ordinal;
pub mod csystem;
pub mod walks;
pub mod oracle;
pub mod sample;
pub mod groups;
pub mod finfun;
pub mod families;
pub mod game;
pub mod cech;
pub mod suite;

pub use error::{Error, Result};
pub use ordinal::{Ordinal, OrdinalInterval};
