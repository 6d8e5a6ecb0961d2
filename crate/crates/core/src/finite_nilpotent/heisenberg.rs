use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element `(a, b, c)` of the integer Heisenberg group, the upper triangular
/// matrix with `a`, `b` on the superdiagonal and `c` in the corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HeisElem {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl HeisElem {
    pub const IDENTITY: HeisElem = HeisElem { a: 0, b: 0, c: 0 };

    pub const fn new(a: i128, b: i128, c: i128) -> Self {
        HeisElem { a, b, c }
    }

    /// Standard generators `x = (1,0,0)`, `y = (0,1,0)`, `z = (0,0,1)`.
    pub const fn x() -> Self {
        HeisElem::new(1, 0, 0)
    }

    pub const fn y() -> Self {
        HeisElem::new(0, 1, 0)
    }

    pub const fn z() -> Self {
        HeisElem::new(0, 0, 1)
    }

    pub fn mul(&self, o: &HeisElem) -> HeisElem {
        HeisElem::new(self.a + o.a, self.b + o.b, self.c + o.c + self.a * o.b)
    }

    pub fn inv(&self) -> HeisElem {
        HeisElem::new(-self.a, -self.b, -self.c + self.a * self.b)
    }

    /// `self * h * self^-1`.
    pub fn conj(&self, h: &HeisElem) -> HeisElem {
        self.mul(h).mul(&self.inv())
    }

    pub fn pow(&self, k: i128) -> HeisElem {
        let base = if k < 0 { self.inv() } else { *self };
        let mut acc = HeisElem::IDENTITY;
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        *self == HeisElem::IDENTITY
    }
}

/// Moduli `(ma, mb, mc)` of the normal congruence subgroup
/// `{(x ma, y mb, z mc)}`; needs `mc | ma` and `mc | mb`.
///
/// The quotient is the set of triples `a mod ma, b mod mb, c mod mc` with the
/// Heisenberg law reduced coordinatewise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HeisModuli {
    pub ma: i128,
    pub mb: i128,
    pub mc: i128,
}

impl HeisModuli {
    pub fn new(ma: i128, mb: i128, mc: i128) -> Result<Self> {
        if ma < 1 || mb < 1 || mc < 1 {
            return Err(Error::invalid(format!("moduli must be positive: ({ma}, {mb}, {mc})")));
        }
        if ma % mc != 0 || mb % mc != 0 {
            return Err(Error::NotNormal(format!("({ma}, {mb}, {mc}): the c-modulus must divide the others")));
        }
        Ok(HeisModuli { ma, mb, mc })
    }

    pub fn uniform(n: i128) -> Result<Self> {
        Self::new(n, n, n)
    }

    pub fn order(&self) -> u128 {
        self.ma as u128 * self.mb as u128 * self.mc as u128
    }

    pub fn reduce(&self, g: &HeisElem) -> HeisElem {
        HeisElem::new(g.a.rem_euclid(self.ma), g.b.rem_euclid(self.mb), g.c.rem_euclid(self.mc))
    }

    pub fn mul(&self, g: &HeisElem, h: &HeisElem) -> HeisElem {
        self.reduce(&g.mul(h))
    }

    pub fn inv(&self, g: &HeisElem) -> HeisElem {
        self.reduce(&g.inv())
    }

    pub fn is_identity(&self, g: &HeisElem) -> bool {
        self.reduce(g).is_identity()
    }

    /// Dense index of a reduced element, `0 <= index < order`.
    pub fn index_of(&self, g: &HeisElem) -> usize {
        let r = self.reduce(g);
        ((r.a * self.mb + r.b) * self.mc + r.c) as usize
    }

    pub fn element_at(&self, idx: usize) -> HeisElem {
        let i = idx as i128;
        let c = i % self.mc;
        let b = (i / self.mc) % self.mb;
        let a = i / (self.mc * self.mb);
        HeisElem::new(a, b, c)
    }

    pub fn elements(&self) -> impl Iterator<Item = HeisElem> + '_ {
        (0..self.order() as usize).map(move |i| self.element_at(i))
    }

    /// Does `other`'s kernel lie inside this one's? Then reduction factors through.
    pub fn refines(&self, other: &HeisModuli) -> bool {
        other.ma % self.ma == 0 && other.mb % self.mb == 0 && other.mc % self.mc == 0
    }
}
