//! Systems used across the unit tests.

use crate::pwl::{Cplifs, PiecewiseLinearMap};
use alloc::vec;

/// Two-map system with ratios 1/3 and translations 0 and 2/3; its attractor
/// is the middle-thirds set on [0, 1].
pub(crate) fn cantor() -> Cplifs {
    Cplifs::new(vec![
        PiecewiseLinearMap::affine(1.0 / 3.0, 0.0).unwrap(),
        PiecewiseLinearMap::affine(1.0 / 3.0, 2.0 / 3.0).unwrap(),
    ])
    .unwrap()
}

/// Tent-plus-shift pair: one fold at 0.5 with slopes (0.3, -0.3) and anchor
/// 0.1, one affine map 0.3 x + 0.65.
pub(crate) fn triangle() -> Cplifs {
    Cplifs::new(vec![
        PiecewiseLinearMap::new(vec![0.5], vec![0.3, -0.3], 0.1).unwrap(),
        PiecewiseLinearMap::affine(0.3, 0.65).unwrap(),
    ])
    .unwrap()
}

/// Injective pair: a two-piece map with slopes (0.35, 0.2) broken at 0.4,
/// and an affine map 0.3 x + 0.6. All slopes positive.
pub(crate) fn injective_pair() -> Cplifs {
    Cplifs::new(vec![
        PiecewiseLinearMap::new(vec![0.4], vec![0.35, 0.2], 0.05).unwrap(),
        PiecewiseLinearMap::affine(0.3, 0.6).unwrap(),
    ])
    .unwrap()
}
