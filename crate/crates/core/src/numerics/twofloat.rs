//! Double-double arithmetic: an unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`,
//! giving roughly 106 bits of significand.

use core::cmp::Ordering;
use core::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwoFloat {
    pub hi: f64,
    pub lo: f64,
}

const LN2: TwoFloat = TwoFloat {
    hi: core::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};

/// `exp(j/64)` for `j = -23..=23`.
const EXP_SIXTY_FOURTHS: [TwoFloat; 47] = [
    TwoFloat {
        hi: 0.6981125100681258,
        lo: 4.379112262891346e-17,
    },
    TwoFloat {
        hi: 0.7091061824373984,
        lo: -1.2868055655346304e-17,
    },
    TwoFloat {
        hi: 0.7202729799554398,
        lo: -3.7374088280484695e-17,
    },
    TwoFloat {
        hi: 0.7316156289466418,
        lo: 8.35576468031604e-18,
    },
    TwoFloat {
        hi: 0.7431368986687583,
        lo: -9.001102395673582e-19,
    },
    TwoFloat {
        hi: 0.7548396019890073,
        lo: -9.844076038651084e-18,
    },
    TwoFloat {
        hi: 0.76672659607082,
        lo: 2.5682592802096574e-17,
    },
    TwoFloat {
        hi: 0.7788007830714049,
        lo: -1.0231869534531498e-17,
    },
    TwoFloat {
        hi: 0.791065110850296,
        lo: 5.426586044764942e-17,
    },
    TwoFloat {
        hi: 0.8035225736890608,
        lo: -3.661886830920417e-17,
    },
    TwoFloat {
        hi: 0.8161762130223398,
        lo: 6.554697808700811e-18,
    },
    TwoFloat {
        hi: 0.8290291181804004,
        lo: -2.7604408719539223e-17,
    },
    TwoFloat {
        hi: 0.8420844271433824,
        lo: -3.8967887440685524e-17,
    },
    TwoFloat {
        hi: 0.8553453273074225,
        lo: 1.7204900005057594e-17,
    },
    TwoFloat {
        hi: 0.8688150562628432,
        lo: 6.146598011714697e-19,
    },
    TwoFloat {
        hi: 0.8824969025845955,
        lo: -5.224526916735663e-17,
    },
    TwoFloat {
        hi: 0.8963942066351505,
        lo: -4.7460497709066285e-17,
    },
    TwoFloat {
        hi: 0.9105103613800342,
        lo: -3.325048324577564e-17,
    },
    TwoFloat {
        hi: 0.9248488132162048,
        lo: 1.0614261758612887e-17,
    },
    TwoFloat {
        hi: 0.9394130628134758,
        lo: -2.152447043447057e-17,
    },
    TwoFloat {
        hi: 0.9542066659691884,
        lo: -3.392457164103672e-17,
    },
    TwoFloat {
        hi: 0.9692332344763441,
        lo: -4.801151707083219e-17,
    },
    TwoFloat {
        hi: 0.9844964370054085,
        lo: -4.7493026566356186e-17,
    },
    TwoFloat { hi: 1.0, lo: 0.0 },
    TwoFloat {
        hi: 1.0157477085866857,
        lo: 2.0530467874932267e-17,
    },
    TwoFloat {
        hi: 1.0317434074991028,
        lo: -8.944417741043132e-17,
    },
    TwoFloat {
        hi: 1.0479910020166328,
        lo: -5.327900898877614e-17,
    },
    TwoFloat {
        hi: 1.0644944589178593,
        lo: 1.0872888143211957e-16,
    },
    TwoFloat {
        hi: 1.0812578074490395,
        lo: 6.013904942011385e-17,
    },
    TwoFloat {
        hi: 1.0982851403078258,
        lo: 9.070644949793751e-17,
    },
    TwoFloat {
        hi: 1.1155806146424807,
        lo: 5.298211318168963e-17,
    },
    TwoFloat {
        hi: 1.1331484530668263,
        lo: -5.370737708558031e-18,
    },
    TwoFloat {
        hi: 1.1509929446911764,
        lo: 3.7613173622701076e-17,
    },
    TwoFloat {
        hi: 1.1691184461695043,
        lo: 6.945488167320411e-17,
    },
    TwoFloat {
        hi: 1.1875293827631006,
        lo: 6.415816207759217e-19,
    },
    TwoFloat {
        hi: 1.2062302494209807,
        lo: 3.9295715071105525e-17,
    },
    TwoFloat {
        hi: 1.2252256118773075,
        lo: 8.279379001181868e-17,
    },
    TwoFloat {
        hi: 1.2445201077660952,
        lo: -7.440512295261056e-17,
    },
    TwoFloat {
        hi: 1.2641184477534664,
        lo: -1.541497933603795e-17,
    },
    TwoFloat {
        hi: 1.2840254166877414,
        lo: 8.968972781793724e-17,
    },
    TwoFloat {
        hi: 1.3042458747676378,
        lo: 1.7093578107981658e-17,
    },
    TwoFloat {
        hi: 1.3247847587288655,
        lo: 9.422682377542367e-17,
    },
    TwoFloat {
        hi: 1.3456470830494105,
        lo: 3.415854209639032e-17,
    },
    TwoFloat {
        hi: 1.3668379411737963,
        lo: 5.1449446596411544e-17,
    },
    TwoFloat {
        hi: 1.3883625067566268,
        lo: 6.691963657219203e-17,
    },
    TwoFloat {
        hi: 1.4102260349257107,
        lo: -4.1758810273684196e-17,
    },
    TwoFloat {
        hi: 1.4324338635650782,
        lo: -6.53862212642198e-17,
    },
];

/// `1/n!` for `n = 2..=12`.
const INV_FACT: [TwoFloat; 11] = [
    TwoFloat { hi: 0.5, lo: 0.0 },
    TwoFloat {
        hi: 0.16666666666666666,
        lo: 9.25185853854297e-18,
    },
    TwoFloat {
        hi: 0.041666666666666664,
        lo: 2.3129646346357427e-18,
    },
    TwoFloat {
        hi: 0.008333333333333333,
        lo: 1.1564823173178714e-19,
    },
    TwoFloat {
        hi: 0.001388888888888889,
        lo: -5.300543954373577e-20,
    },
    TwoFloat {
        hi: 0.0001984126984126984,
        lo: 1.7209558293420705e-22,
    },
    TwoFloat {
        hi: 2.48015873015873e-05,
        lo: 2.1511947866775882e-23,
    },
    TwoFloat {
        hi: 2.7557319223985893e-06,
        lo: -1.858393274046472e-22,
    },
    TwoFloat {
        hi: 2.755731922398589e-07,
        lo: 2.3767714622250297e-23,
    },
    TwoFloat {
        hi: 2.505210838544172e-08,
        lo: -1.448814070935912e-24,
    },
    TwoFloat {
        hi: 2.08767569878681e-09,
        lo: -1.20734505911326e-25,
    },
];

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = 134217729.0 * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Dekker's exact product; valid while `|a·b|` stays well below `2^996`.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl TwoFloat {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub const fn from_f64(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    /// Multiplication by a power of two, exact barring over/underflow.
    pub fn ldexp(self, k: i32) -> Self {
        Self {
            hi: libm::scalbn(self.hi, k),
            lo: libm::scalbn(self.lo, k),
        }
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let q = Self::from_f64(libm::sqrt(self.hi));
        q + (self - q * q) / (q + q)
    }

    pub fn exp(self) -> Self {
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        if self.hi > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        // x = k·ln2 + j/64 + s with |s| ≤ 1/128.
        let k = libm::round(self.hi / LN2.hi);
        let r = self - LN2 * Self::from_f64(k);
        let j = libm::round(r.hi * 64.0);
        let s = r - Self::from_f64(j / 64.0);
        // Terms from s^7 on are below 1e-16, so plain doubles carry them.
        let tail = INV_FACT[5..]
            .iter()
            .rev()
            .fold(0.0, |acc, c| c.hi + s.hi * acc);
        let mut poly = Self::from_f64(tail);
        for c in INV_FACT[..5].iter().rev() {
            poly = *c + s * poly;
        }
        let expm1 = s + s * s * poly;
        let table = EXP_SIXTY_FOURTHS[(j as i64 + 23) as usize];
        (table + table * expm1).ldexp(k as i32)
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(f64::NAN);
        }
        let y = Self::from_f64(libm::log(self.hi));
        // One Newton step on exp(y) = x doubles the 53 correct bits.
        y + self * (-y).exp() - Self::ONE
    }
}

impl From<f64> for TwoFloat {
    fn from(v: f64) -> Self {
        Self::from_f64(v)
    }
}

impl Neg for TwoFloat {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for TwoFloat {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::renorm(s, e + f)
    }
}

impl Sub for TwoFloat {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for TwoFloat {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        Self::renorm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for TwoFloat {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b * Self::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Self::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

impl PartialOrd for TwoFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl core::iter::Sum for TwoFloat {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}
