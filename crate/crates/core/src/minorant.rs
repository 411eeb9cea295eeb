//! Lower convex hull of a tabulated sequence.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::growth::GrowthFunction;

/// Greatest convex function below `v`, sampled at the integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvexMinorant {
    /// Strict vertices of the lower hull, left to right.
    #[serde(with = "breakpoint_vec")]
    pub breakpoints: Vec<(usize, BigUint)>,
    #[serde(with = "rational_vec")]
    pub evaluated: Vec<BigRational>,
}

impl ConvexMinorant {
    pub fn horizon(&self) -> usize {
        self.evaluated.len() - 1
    }

    /// `u(n+1) - u(n)` for `n < horizon`.
    pub fn increments(&self) -> Vec<BigRational> {
        self.evaluated.windows(2).map(|w| &w[1] - &w[0]).collect()
    }

    pub fn is_breakpoint(&self, n: usize) -> bool {
        self.breakpoints.binary_search_by_key(&n, |(x, _)| *x).is_ok()
    }
}

/// Monotone-chain lower hull of `{(n, v(n))}`; collinear points are dropped.
pub fn convex_minorant(v: &GrowthFunction) -> ConvexMinorant {
    let pts: Vec<(i64, BigInt)> = v
        .values()
        .iter()
        .enumerate()
        .map(|(i, y)| (i as i64, BigInt::from(y.clone())))
        .collect();
    let mut hull: Vec<usize> = Vec::new();
    for (idx, p) in pts.iter().enumerate() {
        while hull.len() >= 2 {
            let o = &pts[hull[hull.len() - 2]];
            let a = &pts[hull[hull.len() - 1]];
            let cross = BigInt::from(a.0 - o.0) * (&p.1 - &o.1) - (&a.1 - &o.1) * BigInt::from(p.0 - o.0);
            if cross <= BigInt::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(idx);
    }

    let mut evaluated = Vec::with_capacity(pts.len());
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        let (yi, yj) = (&pts[i].1, &pts[j].1);
        let run = BigInt::from(j - i);
        for n in i..j {
            let offset = BigRational::new((yj - yi) * BigInt::from(n - i), run.clone());
            evaluated.push(BigRational::from_integer(yi.clone()) + offset);
        }
    }
    let last = *hull.last().expect("a growth function is nonempty");
    evaluated.push(BigRational::from_integer(pts[last].1.clone()));

    let breakpoints = hull.into_iter().map(|i| (i, v.at(i).clone())).collect();
    ConvexMinorant {
        breakpoints,
        evaluated,
    }
}

mod breakpoint_vec {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Point {
        n: usize,
        #[serde(with = "crate::dec::biguint")]
        value: BigUint,
    }

    pub fn serialize<S: Serializer>(xs: &[(usize, BigUint)], s: S) -> Result<S::Ok, S::Error> {
        let pts: Vec<Point> = xs
            .iter()
            .map(|(n, value)| Point {
                n: *n,
                value: value.clone(),
            })
            .collect();
        pts.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(usize, BigUint)>, D::Error> {
        let pts = Vec::<Point>::deserialize(d)?;
        Ok(pts.into_iter().map(|p| (p.n, p.value)).collect())
    }
}

mod rational_vec {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        let text: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
        text.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        let text = Vec::<String>::deserialize(d)?;
        text.iter()
            .map(|t| t.parse::<BigRational>().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(xs: &[u64]) -> GrowthFunction {
        GrowthFunction::from_u64s(xs).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// `min_{i <= n} [v_i + (n - i) * min_{j >= n, j > i} slope(i, j)]`, with
    /// `v_n` itself as a candidate.
    fn chord_oracle(v: &[u64]) -> Vec<BigRational> {
        let n_pts = v.len();
        let mut best: Vec<(i128, i128)> = v.iter().map(|&y| (y as i128, 1)).collect();
        for i in 0..n_pts {
            // suffix minimum of slope(i, j) over j >= m, as a fraction
            let mut suffix: Vec<Option<(i128, i128)>> = vec![None; n_pts + 1];
            for j in (i + 1..n_pts).rev() {
                let cand = (v[j] as i128 - v[i] as i128, (j - i) as i128);
                suffix[j] = match suffix[j + 1] {
                    Some(s) if s.0 * cand.1 <= cand.0 * s.1 => Some(s),
                    _ => Some(cand),
                };
            }
            for n in i + 1..n_pts {
                if let Some((num, den)) = suffix[n] {
                    let val = (v[i] as i128 * den + (n - i) as i128 * num, den);
                    let cur = best[n];
                    if val.0 * cur.1 < cur.0 * val.1 {
                        best[n] = val;
                    }
                }
            }
        }
        best.into_iter()
            .map(|(n, d)| BigRational::new(n.into(), d.into()))
            .collect()
    }

    #[test]
    fn convex_input_is_fixed() {
        let m = convex_minorant(&seq(&[1, 1, 2, 4]));
        assert_eq!(m.evaluated, vec![r(1, 1), r(1, 1), r(2, 1), r(4, 1)]);
        assert_eq!(m.breakpoints.len(), 4);
    }

    #[test]
    fn chord_example() {
        let m = convex_minorant(&seq(&[1, 3, 4, 9]));
        assert_eq!(m.evaluated, vec![r(1, 1), r(5, 2), r(4, 1), r(9, 1)]);
        let xs: Vec<usize> = m.breakpoints.iter().map(|b| b.0).collect();
        assert_eq!(xs, vec![0, 2, 3]);
        assert_eq!(m.evaluated, chord_oracle(&[1, 3, 4, 9]));
    }

    #[test]
    fn affine_input() {
        let v: Vec<u64> = (0..20).map(|n| 3 * n + 2).collect();
        let m = convex_minorant(&seq(&v));
        assert_eq!(m.breakpoints.len(), 2);
        assert!(m.evaluated.iter().zip(&v).all(|(u, &y)| *u == r(y as i64, 1)));
    }

    #[test]
    fn single_point() {
        let m = convex_minorant(&seq(&[7]));
        assert_eq!(m.evaluated, vec![r(7, 1)]);
    }

    #[test]
    fn serde_round_trip() {
        let m = convex_minorant(&seq(&[1, 3, 4, 9]));
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<ConvexMinorant>(&text).unwrap(), m);
    }

    fn arb_sequence() -> impl Strategy<Value = Vec<u64>> {
        (1u64..50, prop::collection::vec(0u64..30, 1..80)).prop_map(|(start, incs)| {
            let mut out = vec![start];
            for d in incs {
                out.push(out.last().unwrap() + d);
            }
            out
        })
    }

    proptest! {
        #[test]
        fn matches_chord_oracle(v in arb_sequence()) {
            let m = convex_minorant(&seq(&v));
            prop_assert_eq!(&m.evaluated, &chord_oracle(&v));
        }

        #[test]
        fn convex_below_and_touching(v in arb_sequence()) {
            let m = convex_minorant(&seq(&v));
            let inc = m.increments();
            prop_assert!(inc.windows(2).all(|w| w[0] <= w[1]));
            for (n, u) in m.evaluated.iter().enumerate() {
                prop_assert!(*u <= r(v[n] as i64, 1));
            }
            for (n, y) in &m.breakpoints {
                prop_assert_eq!(&m.evaluated[*n], &BigRational::from_integer(BigInt::from(y.clone())));
            }
        }

        #[test]
        fn breakpoint_increment_inequalities(v in arb_sequence()) {
            let m = convex_minorant(&seq(&v));
            let inc = m.increments();
            let h = v.len() - 1;
            for (n, _) in &m.breakpoints {
                let n = *n;
                if n < h {
                    prop_assert!(inc[n] <= r((v[n + 1] - v[n]) as i64, 1));
                }
                if n > 0 {
                    prop_assert!(inc[n - 1] >= r((v[n] - v[n - 1]) as i64, 1));
                }
            }
        }
    }
}
