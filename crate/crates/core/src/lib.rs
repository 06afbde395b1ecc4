//! Numerical Riemannian geometry for convex sets.
//!
//! `proxgeo-core` works on manifolds given by charts and a metric tensor. It
//! provides geodesics (exp/log by shooting), parallel transport, curvature,
//! Hessians and Fermi coordinates, and on top of that the machinery for
//! closed convex sets: metric projection, proximal normal cones, tubular
//! neighbourhoods, support hypersurfaces, convexity checks for the distance
//! function and second-order superjets.
//!
//! The crate is `no_std` (it needs `alloc`). Everything is a pure function of
//! immutable inputs; randomness always comes from an explicitly seeded
//! generator.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod cone;
pub mod convexity;
mod error;
pub mod field;
pub mod manifold;
pub mod optim;
pub mod separation;
#[cfg(feature = "serde")]
mod serde_vec;
pub mod sets;
pub mod superjets;
mod tolerance;
pub mod tubular;

pub use error::{GeoError, Result};
pub use field::ScalarField;
pub use manifold::{
    BilinearForm, ChartId, CurvatureBound, GeodesicPath, Geometry, Manifold, Point, TangentVector,
};
pub use sets::{ConvexSet, ProjectionResult, SetSpec};
pub use tolerance::ToleranceProfile;

/// Seeded generator used for every sampling routine in the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate's generator from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}

pub(crate) mod prelude {
    pub use alloc::boxed::Box;
    #[allow(unused_imports)]
    pub use alloc::string::ToString;
    pub use alloc::sync::Arc;
    pub use alloc::vec;
    pub use alloc::vec::Vec;
    pub use nalgebra::{DMatrix, DVector};
    #[allow(unused_imports)]
    pub use num_traits::Float;
}
