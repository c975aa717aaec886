//! The Klein four-group generated by the two coordinate reflections.

use serde::{Deserialize, Serialize};

/// An element of {id, γ_v, γ_h, γ_v∘γ_h}.
///
/// `V` negates the x coordinate (reflection in the vertical axis), `H`
/// negates y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gamma {
    Id,
    V,
    H,
    VH,
}

impl Gamma {
    pub const ALL: [Gamma; 4] = [Gamma::Id, Gamma::V, Gamma::H, Gamma::VH];

    pub fn from_signs(sx: f64, sy: f64) -> Gamma {
        match (sx < 0.0, sy < 0.0) {
            (false, false) => Gamma::Id,
            (true, false) => Gamma::V,
            (false, true) => Gamma::H,
            (true, true) => Gamma::VH,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Gamma::Id => 0,
            Gamma::V => 1,
            Gamma::H => 2,
            Gamma::VH => 3,
        }
    }

    pub fn flips_x(self) -> bool {
        matches!(self, Gamma::V | Gamma::VH)
    }

    pub fn flips_y(self) -> bool {
        matches!(self, Gamma::H | Gamma::VH)
    }

    pub fn sx(self) -> f64 {
        if self.flips_x() {
            -1.0
        } else {
            1.0
        }
    }

    pub fn sy(self) -> f64 {
        if self.flips_y() {
            -1.0
        } else {
            1.0
        }
    }

    /// Group product; the group is abelian so order does not matter.
    pub fn compose(self, other: Gamma) -> Gamma {
        let fx = self.flips_x() ^ other.flips_x();
        let fy = self.flips_y() ^ other.flips_y();
        Gamma::from_signs(if fx { -1.0 } else { 1.0 }, if fy { -1.0 } else { 1.0 })
    }

    pub fn apply(self, p: [f64; 2]) -> [f64; 2] {
        [self.sx() * p[0], self.sy() * p[1]]
    }

    pub fn name(self) -> &'static str {
        match self {
            Gamma::Id => "id",
            Gamma::V => "v",
            Gamma::H => "h",
            Gamma::VH => "vh",
        }
    }
}

impl std::fmt::Display for Gamma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_table() {
        for g in Gamma::ALL {
            assert_eq!(g.compose(g), Gamma::Id);
            assert_eq!(g.compose(Gamma::Id), g);
            for h in Gamma::ALL {
                assert_eq!(g.compose(h), h.compose(g));
                let p = [0.3, -1.7];
                assert_eq!(g.compose(h).apply(p), g.apply(h.apply(p)));
            }
        }
        assert_eq!(Gamma::V.compose(Gamma::H), Gamma::VH);
    }
}
