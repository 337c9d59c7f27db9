//! Reduced rational functions `num / den` over `Q(i)`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::coeff::Coeff;
use crate::error::ExprError;
use crate::gcd::gcd;
use crate::poly::Poly;

/// Numerator and denominator share no factor and the denominator has leading
/// coefficient one, so every value has exactly one representation.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        RatFunc {
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn constant(c: Coeff) -> Self {
        RatFunc {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        RatFunc::constant(Coeff::from_int(n))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    /// Builds `num / den`, reducing to lowest terms.
    pub fn new(num: Poly, den: Poly) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc::zero());
        }
        if let Some(c) = den.as_constant() {
            return Ok(RatFunc {
                num: num.scale(&c.inv()),
                den: Poly::one(),
            });
        }
        let g = gcd(&num, &den);
        let (n, d) = if g.is_one() {
            (num, den)
        } else {
            (
                num.exact_div(&g).expect("gcd divides"),
                den.exact_div(&g).expect("gcd divides"),
            )
        };
        Ok(Self::normalized(n, d))
    }

    /// Assumes coprime inputs and fixes the denominator scaling.
    fn normalized(num: Poly, den: Poly) -> Self {
        let c = den
            .leading()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Coeff::one);
        if c.is_one() {
            RatFunc { num, den }
        } else {
            let ci = c.inv();
            RatFunc {
                num: num.scale(&ci),
                den: den.scale(&ci),
            }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Coeff> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn inv(&self) -> Result<Self, ExprError> {
        if self.num.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Self::normalized(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, o: &RatFunc) -> Result<Self, ExprError> {
        Ok(self * &o.inv()?)
    }

    pub fn scale(&self, c: &Coeff) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn powi(&self, e: i32) -> Result<Self, ExprError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let k = e.unsigned_abs();
        // coprimality and a unit leading coefficient survive powers
        Ok(RatFunc {
            num: base.num.pow(k),
            den: base.den.pow(k),
        })
    }
}

impl<'a> Add<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, o: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let n = &self.num + &o.num;
            if self.den.is_one() {
                return RatFunc {
                    num: n,
                    den: Poly::one(),
                };
            }
            return RatFunc::new(n, self.den.clone()).expect("nonzero denominator");
        }
        if self.den.is_one() {
            return RatFunc {
                num: &(&self.num * &o.den) + &o.num,
                den: o.den.clone(),
            };
        }
        if o.den.is_one() {
            return RatFunc {
                num: &(&o.num * &self.den) + &self.num,
                den: self.den.clone(),
            };
        }
        let g = gcd(&self.den, &o.den);
        if g.is_one() {
            let n = &(&self.num * &o.den) + &(&o.num * &self.den);
            let d = &self.den * &o.den;
            return RatFunc::normalized(n, d);
        }
        let b1 = self.den.exact_div(&g).expect("gcd divides");
        let d1 = o.den.exact_div(&g).expect("gcd divides");
        let t = &(&self.num * &d1) + &(&o.num * &b1);
        if t.is_zero() {
            return RatFunc::zero();
        }
        let h = gcd(&t, &g);
        let den = &b1 * &o.den;
        if h.is_one() {
            RatFunc::normalized(t, den)
        } else {
            RatFunc::normalized(
                t.exact_div(&h).expect("gcd divides"),
                den.exact_div(&h).expect("gcd divides"),
            )
        }
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl<'a> Sub<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, o: &RatFunc) -> RatFunc {
        self + &(-o)
    }
}

impl<'a> Mul<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = self.as_constant() {
            return o.scale(&c);
        }
        if let Some(c) = o.as_constant() {
            return self.scale(&c);
        }
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let div = |p: &Poly, g: &Poly| {
            if g.is_one() {
                p.clone()
            } else {
                p.exact_div(g).expect("gcd divides")
            }
        };
        let n = &div(&self.num, &g1) * &div(&o.num, &g2);
        let d = &div(&self.den, &g2) * &div(&o.den, &g1);
        RatFunc::normalized(n, d)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, o: RatFunc) -> RatFunc {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::var_id;

    #[test]
    fn sum_of_fractions_reduces() {
        let x = RatFunc::from_poly(Poly::atom(var_id("rx")));
        let one = RatFunc::one();
        let a = one.checked_div(&(&x + &one)).unwrap();
        let b = one.checked_div(&(&x - &one)).unwrap();
        // 1/(x+1) + 1/(x-1) - 2x/(x^2-1) = 0
        let c = x
            .scale(&Coeff::from_int(2))
            .checked_div(&(&(&x * &x) - &one))
            .unwrap();
        assert!((&(&a + &b) - &c).is_zero());
    }

    #[test]
    fn zero_division_rejected() {
        assert!(RatFunc::one().checked_div(&RatFunc::zero()).is_err());
    }
}
