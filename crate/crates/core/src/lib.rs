//! Traveling waves of the ℓ=2 multi-component KB system: classification by the zeros
//! of the quartic first integral, closed-form constructors, independent verification,
//! spectral time evolution and the ℓ ≥ 3 vanishing-boundary reductions.

pub mod elliptic;
pub mod evolution;
pub mod higher_ell;
pub mod quartic;
pub mod reduction;
pub mod solutions;
pub mod verify;
