//! Basis orderings. Every state index used elsewhere in the crate comes
//! from here.
//!
//! Two-atom labels put the control atom first: `|r1⟩` means control in `|r⟩`
//! and target in `|1⟩`.

/// Single-atom detuned Rabi problem, basis {|0r⟩, |01⟩}.
pub mod single {
    pub const ZERO_R: usize = 0;
    pub const ZERO_ONE: usize = 1;
    pub const DIM: usize = 2;
}

/// Symmetric blockade problem, basis {|rr⟩, (|1r⟩+|r1⟩)/√2, |11⟩}.
pub mod v1 {
    pub const RR: usize = 0;
    pub const SYM: usize = 1;
    pub const ONE_ONE: usize = 2;
    pub const DIM: usize = 3;
}

/// Individually addressed blockade problem, basis {|rr⟩, |r1⟩, |1r⟩, |11⟩}.
pub mod v2 {
    pub const RR: usize = 0;
    pub const R_ONE: usize = 1;
    pub const ONE_R: usize = 2;
    pub const ONE_ONE: usize = 3;
    pub const DIM: usize = 4;
}

/// Reduced target-only problem, basis {|1r⟩, |11⟩}.
pub mod vt_reduced {
    pub const ONE_R: usize = 0;
    pub const ONE_ONE: usize = 1;
    pub const DIM: usize = 2;
}

/// Computational two-qubit basis {|00⟩, |01⟩, |10⟩, |11⟩}.
pub mod comp {
    pub const S00: usize = 0;
    pub const S01: usize = 1;
    pub const S10: usize = 2;
    pub const S11: usize = 3;
    pub const DIM: usize = 4;
}

/// Per-atom levels of the leakage model, in basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Level {
    Zero,
    One,
    R,
    D,
    S,
    A,
}

/// Canonical per-atom ordering {|0⟩, |1⟩, |r⟩, |d⟩, |s⟩, |a⟩}.
pub const LEVELS: [Level; 6] = [Level::Zero, Level::One, Level::R, Level::D, Level::S, Level::A];
pub const ATOM_DIM: usize = 6;
pub const PAIR_DIM: usize = ATOM_DIM * ATOM_DIM;

impl Level {
    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn is_rydberg(self) -> bool {
        matches!(self, Level::R | Level::D | Level::S)
    }
}

/// Index of `|control, target⟩` in the 36-dimensional pair basis.
pub const fn pair(control: Level, target: Level) -> usize {
    control.index() * ATOM_DIM + target.index()
}

/// Pair-basis indices of the computational states, in `comp` order.
pub const COMPUTATIONAL: [usize; 4] = [
    pair(Level::Zero, Level::Zero),
    pair(Level::Zero, Level::One),
    pair(Level::One, Level::Zero),
    pair(Level::One, Level::One),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indices() {
        assert_eq!(pair(Level::Zero, Level::Zero), 0);
        assert_eq!(pair(Level::One, Level::R), 8);
        assert_eq!(pair(Level::A, Level::A), PAIR_DIM - 1);
        assert_eq!(COMPUTATIONAL, [0, 1, 6, 7]);
    }
}
