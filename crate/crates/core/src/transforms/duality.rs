//! Put-call duality: the share-measure smile is the mirror image `v̂(k) = v(−k)`.

use crate::smiles::{SmileSlice, SsviParams};

/// Smile seen under the share measure, `v̂(k) = v(−k)`.
///
/// SSVI maps to SSVI with `ρ → −ρ`; a flat smile is self-dual.
pub fn dual_slice(slice: &SmileSlice) -> SmileSlice {
    match *slice {
        SmileSlice::Ssvi(p) => SmileSlice::Ssvi(SsviParams { rho: -p.rho, ..p }),
        SmileSlice::ConstantVol(v) => SmileSlice::ConstantVol(v),
    }
}
