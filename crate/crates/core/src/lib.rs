//! Convex bodies in John's position that are hard to approximate by
//! polytopes, together with the numerical machinery that certifies them.

pub mod certificate;
pub mod designs;
pub mod error;
pub mod frame;
pub mod hard_body;
pub mod lift;
pub mod lp;
pub mod net;
pub mod point;
pub mod polytope;
pub mod rng;

pub use error::{Error, Result};
pub use point::Point;
pub use polytope::HPolytope;
