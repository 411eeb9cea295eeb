use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::AssemblyError;
use crate::growth::GrowthFunction;

fn int(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Smallest `R` in `r_min..=r_max` with
/// `B v(Ba) + C v(a+R) + A (v(a+R+b) - v(a+R)) <= B v(a+R)` and
/// `v(a/B)/B - v(a)/C + v(a+R)/C >= v(a+R+b)/B`, evaluating `v` by linear
/// interpolation.
#[allow(clippy::too_many_arguments)]
pub fn stretch_r(
    a: &BigRational,
    b: &BigRational,
    big_a: &BigRational,
    big_b: &BigRational,
    big_c: &BigRational,
    v: &GrowthFunction,
    r_min: u64,
    r_max: u64,
) -> Result<u64, AssemblyError> {
    let bad = |m: &str| Err(AssemblyError::InvalidStretch(m.to_string()));
    if !a.is_positive() || !b.is_positive() {
        return bad("a and b must be positive");
    }
    if !(big_a > big_b && big_b > big_c && *big_c > BigRational::one()) {
        return bad("need A > B > C > 1");
    }
    let eval = |x: &BigRational| {
        v.interpolate(x).map_err(|e| AssemblyError::HorizonExceeded {
            j: 0,
            detail: e.to_string(),
        })
    };
    let fixed_f = big_b * eval(&(big_b * a))?;
    let fixed_g = eval(&(a / big_b))? / big_b - eval(a)? / big_c;
    for r in r_min..=r_max {
        let x = a + int(r);
        let vx = eval(&x)?;
        let vxb = eval(&(&x + b))?;
        let f = &fixed_f + big_c * &vx + big_a * (&vxb - &vx);
        let g = &fixed_g + &vx / big_c;
        if f <= big_b * &vx && g >= &vxb / big_b {
            return Ok(r);
        }
    }
    Err(AssemblyError::HorizonExceeded {
        j: 0,
        detail: format!("no R in {r_min}..={r_max} satisfies the stretch inequalities"),
    })
}
