//! Minimal double-double ("dd") arithmetic for the far-field fast path of
//! the bilateral series summation.
//!
//! A dd value is an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
//! giving ~106 bits of significand. Error bounds used by the series module
//! (u = 2^-53, all bounds relative):
//!
//! - `add`:   <= 3u^2   (accurate double-word addition)
//! - `mul`:   <= 5u^2
//! - `sqr`:   <= 5u^2
//! - `recip`: <= 16u^2  (one Newton correction on the f64 quotient)
//! - `sub_f64_exact`: <= 2u^2 (the two_sum part is exact; one rounding
//!   folding in `lo`)
//!
//! A term `1/(x - n)^(k+2)` computed as sub, square-and-multiply powering
//! (<= 2*log2(k+2) operations), and one reciprocal therefore carries a
//! relative error of at most `(2 + 10*ceil(log2(k+2)) + 16) u^2`, which for
//! k + 2 <= 40 is below `2^-100`. The series module budgets `2^-97` per
//! far-field unit of mass to cover term errors plus blocked accumulation.
//!
//! `two_prod` needs an exact product; with the `fma` CPU feature it is one
//! fused multiply-add, otherwise a Dekker split. The `FMA` const generic
//! selects the flavor so the series module can monomorphize both and pick
//! at runtime.

#[derive(Clone, Copy, Debug, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline(always)]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline(always)]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Splits into high and low 26-bit halves (Dekker), exact for |a| < 2^996.
#[inline(always)]
fn split(a: f64) -> (f64, f64) {
    let t = 134_217_729.0 * a; // 2^27 + 1
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline(always)]
fn two_prod<const FMA: bool>(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if FMA {
        (p, f64::mul_add(a, b, -p))
    } else {
        let (ah, al) = split(a);
        let (bh, bl) = split(b);
        (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
    }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline(always)]
    pub fn from_f64(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline(always)]
    pub fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    #[inline(always)]
    pub fn sqr<const FMA: bool>(self) -> Dd {
        let (p1, p2) = two_prod::<FMA>(self.hi, self.hi);
        let p2 = p2 + 2.0 * self.hi * self.lo + self.lo * self.lo;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline(always)]
    pub fn mul<const FMA: bool>(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod::<FMA>(self.hi, o.hi);
        let p2 = p2 + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline(always)]
    pub fn recip<const FMA: bool>(self) -> Dd {
        let q1 = 1.0 / self.hi;
        // residual r = 1 - q1 * self, then one correction step
        let (p1, p2) = two_prod::<FMA>(q1, self.hi);
        let r = ((1.0 - p1) - p2) - q1 * self.lo;
        let q2 = r * q1;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    /// `self - b` where `b` is an exactly representable f64 (an integer
    /// index in the series loops).
    #[inline(always)]
    pub fn sub_f64_exact(self, b: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, -b);
        let s2 = s2 + self.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    /// `self^m` by square-and-multiply, m >= 1.
    #[inline(always)]
    pub fn powi<const FMA: bool>(self, m: u32) -> Dd {
        debug_assert!(m >= 1);
        let mut base = self;
        let mut m = m;
        let mut acc: Option<Dd> = None;
        loop {
            if m & 1 == 1 {
                acc = Some(match acc {
                    None => base,
                    Some(a) => a.mul::<FMA>(base),
                });
            }
            m >>= 1;
            if m == 0 {
                break;
            }
            base = base.sqr::<FMA>();
        }
        acc.unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    fn to_float(d: Dd) -> Float {
        Float::with_val(160, d.hi) + Float::with_val(160, d.lo)
    }

    fn rel_err(d: Dd, exact: &Float) -> f64 {
        let diff = (to_float(d) - exact).abs();
        (diff / exact.clone().abs()).to_f64()
    }

    #[test]
    fn term_accuracy_is_better_than_2_pow_minus_100() {
        // 1/(1/4 - n)^m against 160-bit MPFR for a spread of n and m.
        let budget = 2f64.powi(-100);
        for &n in &[3u32, 65, 1_000, 123_456_789] {
            for m in [2u32, 4, 7, 14, 40] {
                let x = Dd { hi: 0.25, lo: 0.0 };
                let d = x.sub_f64_exact(n as f64);
                let got = d.powi::<true>(m).recip::<true>();
                let exact = (Float::with_val(200, 0.25) - n).pow(-(m as i32));
                assert!(
                    rel_err(got, &exact) < budget,
                    "n={n} m={m}: rel err {}",
                    rel_err(got, &exact)
                );
                let got_nofma = d.powi::<false>(m).recip::<false>();
                assert!(rel_err(got_nofma, &exact) < budget, "no-fma n={n} m={m}");
            }
        }
    }

    #[test]
    fn blocked_accumulation_stays_in_budget() {
        // Sum 1/(1/4 - n)^4 for n in 5..=10_000 in dd blocks of 32 and
        // compare with a 200-bit MPFR sum; must be well below 2^-97 of the
        // accumulated mass.
        let x = Dd { hi: 0.25, lo: 0.0 };
        let mut block = Dd::ZERO;
        let mut total = Float::new(200);
        let mut exact = Float::new(200);
        let mut i = 0u32;
        for n in (5..=10_000u32).rev() {
            let t = x.sub_f64_exact(n as f64).powi::<true>(4).recip::<true>();
            block = block.add(t);
            i += 1;
            if i % 32 == 0 {
                total += block.hi;
                total += block.lo;
                block = Dd::ZERO;
            }
            exact += (Float::with_val(200, 0.25) - n).pow(-4);
        }
        total += block.hi;
        total += block.lo;
        let rel = ((total - &exact) / exact.clone()).abs().to_f64();
        assert!(rel < 2f64.powi(-97), "rel = {rel}");
    }
}
