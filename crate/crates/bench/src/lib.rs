//! Fixtures shared by the criterion benches.

use cantor_core::CantorScheme;

/// The middle-thirds set, `b = 3`, `S = {0, 2}`.
pub fn middle_thirds() -> CantorScheme {
    CantorScheme::new(3, &[0, 2]).expect("valid scheme")
}

/// Schemes the benches sweep: one per shape of digit set.
pub fn sweep() -> Vec<CantorScheme> {
    vec![
        middle_thirds(),
        CantorScheme::new(5, &[0, 3]).expect("valid scheme"),
        CantorScheme::new(9, &[0, 2, 6, 8]).expect("valid scheme"),
    ]
}
