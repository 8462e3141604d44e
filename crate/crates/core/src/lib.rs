//! Classification of finite-dimensional quantum processes into classical and
//! nonclassical ones by frame representations, with checkable certificates.

pub mod error;
pub mod hermspace;
pub mod linalg;
pub mod catalog;
pub mod certify;
pub mod decide;
pub mod identities;
pub mod processes;
pub mod standard;

pub use error::{Error, Result};
