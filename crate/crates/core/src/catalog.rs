//! Abstract pieces: a depth in unit slices and a volume per slice.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Global parameters of a catalog. Per-`j` vectors all have length `J`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogParams {
    pub ell: u32,
    pub h: u64,
    #[serde(rename = "H")]
    pub big_h: u64,
    pub t: Vec<u32>,
    pub u: Vec<u64>,
    #[serde(rename = "U")]
    pub big_u: Vec<u64>,
    pub d: Vec<u64>,
    #[serde(default)]
    pub finite_type: bool,
}

impl CatalogParams {
    pub fn pieces(&self) -> usize {
        self.t.len()
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        let bad = |reason: String| Err(CatalogError::InvalidParams(reason));
        if self.ell < 3 {
            return bad(format!("ell = {} must be at least 3", self.ell));
        }
        if self.h == 0 {
            return bad("h must be positive".into());
        }
        if self.h > self.big_h {
            return Err(CatalogError::InfeasibleBounds(format!(
                "h = {} exceeds H = {}",
                self.h, self.big_h
            )));
        }
        let j = self.t.len();
        if self.u.len() != j || self.big_u.len() != j || self.d.len() != j {
            return bad(format!(
                "t, u, U, d have lengths {}, {}, {}, {}",
                j,
                self.u.len(),
                self.big_u.len(),
                self.d.len()
            ));
        }
        for i in 0..j {
            if self.t[i] == 0 || self.u[i] == 0 {
                return bad(format!("t_{i} and u_{i} must be positive"));
            }
            if self.u[i] > self.big_u[i] {
                return Err(CatalogError::InfeasibleBounds(format!(
                    "u_{i} = {} exceeds U_{i} = {}",
                    self.u[i], self.big_u[i]
                )));
            }
        }
        if self.finite_type && self.u.windows(2).any(|w| w[0] != w[1]) {
            return bad("finite type needs a constant u".into());
        }
        Ok(())
    }

    fn small_depths(&self) -> (u32, u32) {
        (self.ell.div_ceil(3), self.ell)
    }

    fn q_depths(&self, j: usize) -> (u32, u32) {
        let full = self.ell * self.t[j];
        (full.div_ceil(3), full)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PieceKind {
    K,
    HS,
    J,
    Q(usize),
    R(usize),
}

impl PieceKind {
    pub fn is_small(self) -> bool {
        matches!(self, PieceKind::K | PieceKind::HS | PieceKind::J)
    }

    /// Kind of a non-trunk vertex with the given number of children.
    pub fn for_children(children: u8) -> Self {
        match children {
            2 => PieceKind::J,
            1 => PieceKind::K,
            _ => PieceKind::HS,
        }
    }
}

impl fmt::Display for PieceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PieceKind::K => write!(f, "K"),
            PieceKind::HS => write!(f, "HS"),
            PieceKind::J => write!(f, "J"),
            PieceKind::Q(j) => write!(f, "Q{j}"),
            PieceKind::R(j) => write!(f, "R{j}"),
        }
    }
}

impl FromStr for PieceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let index = |rest: &str| rest.parse::<usize>().map_err(|e| format!("{s}: {e}"));
        match s {
            "K" => Ok(PieceKind::K),
            "HS" => Ok(PieceKind::HS),
            "J" => Ok(PieceKind::J),
            _ if s.starts_with('Q') => Ok(PieceKind::Q(index(&s[1..])?)),
            _ if s.starts_with('R') => Ok(PieceKind::R(index(&s[1..])?)),
            _ => Err(format!("unknown piece kind {s:?}")),
        }
    }
}

impl Serialize for PieceKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PieceKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceProfile {
    pub kind: PieceKind,
    pub depth_slices: u32,
    pub slice_volumes: Vec<u64>,
}

impl PieceProfile {
    pub fn max_volume(&self) -> u64 {
        self.slice_volumes.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub params: CatalogParams,
    pub doubling: bool,
    pub profiles: Vec<PieceProfile>,
}

impl Catalog {
    pub fn profile(&self, kind: PieceKind) -> Option<&PieceProfile> {
        self.profiles.iter().find(|p| p.kind == kind)
    }

    pub fn profile_mut(&mut self, kind: PieceKind) -> Option<&mut PieceProfile> {
        self.profiles.iter_mut().find(|p| p.kind == kind)
    }

    /// Kinds a complex with `J` Q-pieces needs, in catalog order.
    pub fn required_kinds(pieces: usize) -> Vec<PieceKind> {
        let mut kinds = vec![PieceKind::K, PieceKind::HS, PieceKind::J];
        for j in 0..pieces {
            kinds.push(PieceKind::Q(j));
            kinds.push(PieceKind::R(j));
        }
        kinds
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("invalid catalog parameters: {0}")]
    InvalidParams(String),
    #[error("infeasible bounds: {0}")]
    InfeasibleBounds(String),
}

fn draw_profile(
    rng: &mut ChaCha8Rng,
    kind: PieceKind,
    depths: (u32, u32),
    volumes: (u64, u64),
    doubling: bool,
) -> PieceProfile {
    let depth = rng.gen_range(depths.0..=depths.1);
    let mut slice_volumes: Vec<u64> = Vec::with_capacity(depth as usize);
    for k in 0..depth as usize {
        let mut x = rng.gen_range(volumes.0..=volumes.1);
        if doubling && k > 0 {
            x = x.min(2 * slice_volumes[k - 1]);
        }
        slice_volumes.push(x);
    }
    PieceProfile {
        kind,
        depth_slices: depth,
        slice_volumes,
    }
}

/// Seeded synthetic catalog within the contract bounds. Depths are uniform
/// in their band, volumes uniform in theirs; with `doubling`, Q volumes are
/// clamped to twice the previous slice.
pub fn make_catalog(params: &CatalogParams, seed: u64, doubling: bool) -> Result<Catalog, CatalogError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let small = params.small_depths();
    let mut profiles = Vec::new();
    for kind in [PieceKind::K, PieceKind::HS, PieceKind::J] {
        profiles.push(draw_profile(&mut rng, kind, small, (params.h, params.big_h), false));
    }
    let mut shared_r: Option<PieceProfile> = None;
    for j in 0..params.pieces() {
        let q = draw_profile(
            &mut rng,
            PieceKind::Q(j),
            params.q_depths(j),
            (1, params.big_u[j]),
            doubling,
        );
        profiles.push(q);
        let r = match (&shared_r, params.finite_type) {
            (Some(first), true) => PieceProfile {
                kind: PieceKind::R(j),
                ..first.clone()
            },
            _ => draw_profile(&mut rng, PieceKind::R(j), small, (1, params.u[j]), false),
        };
        if params.finite_type && shared_r.is_none() {
            shared_r = Some(r.clone());
        }
        profiles.push(r);
    }
    Ok(Catalog {
        params: params.clone(),
        doubling,
        profiles,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "item", rename_all = "snake_case")]
pub enum CatalogRule {
    /// Numbered item of the piece contract.
    Item(u8),
    Doubling,
    Missing,
    Duplicate,
    /// `depth_slices` differs from the number of volumes.
    DepthMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[error("{piece} slice {slice:?}: {rule:?}")]
pub struct CatalogViolation {
    pub piece: PieceKind,
    pub slice: Option<usize>,
    pub rule: CatalogRule,
}

/// Checks every profile against the contract: depth bands (items 2, 3),
/// volume bands (items 6, 7, 8), identical R profiles in finite type
/// (item 9), and the doubling clamp when `doubling` is set.
pub fn validate_catalog(
    profiles: &[PieceProfile],
    params: &CatalogParams,
    doubling: bool,
) -> Result<(), CatalogViolation> {
    let fail = |piece, slice, rule| {
        Err(CatalogViolation {
            piece,
            slice,
            rule,
        })
    };
    for kind in Catalog::required_kinds(params.pieces()) {
        match profiles.iter().filter(|p| p.kind == kind).count() {
            0 => return fail(kind, None, CatalogRule::Missing),
            1 => {}
            _ => return fail(kind, None, CatalogRule::Duplicate),
        }
    }
    for p in profiles {
        if p.slice_volumes.len() != p.depth_slices as usize {
            return fail(p.kind, None, CatalogRule::DepthMismatch);
        }
        let (depth_band, depth_item, vol_band, vol_item) = match p.kind {
            PieceKind::K | PieceKind::HS | PieceKind::J => {
                (params.small_depths(), 3, (params.h, params.big_h), 6)
            }
            PieceKind::Q(j) if j < params.pieces() => (params.q_depths(j), 2, (1, params.big_u[j]), 7),
            PieceKind::R(j) if j < params.pieces() => (params.small_depths(), 3, (1, params.u[j]), 8),
            _ => return fail(p.kind, None, CatalogRule::Duplicate),
        };
        if p.depth_slices < depth_band.0 || p.depth_slices > depth_band.1 {
            return fail(p.kind, None, CatalogRule::Item(depth_item));
        }
        for (k, &x) in p.slice_volumes.iter().enumerate() {
            if x < vol_band.0 || x > vol_band.1 {
                return fail(p.kind, Some(k), CatalogRule::Item(vol_item));
            }
            if doubling && matches!(p.kind, PieceKind::Q(_)) && k > 0 && x > 2 * p.slice_volumes[k - 1] {
                return fail(p.kind, Some(k), CatalogRule::Doubling);
            }
        }
    }
    if params.finite_type {
        let first = profiles.iter().find(|p| p.kind == PieceKind::R(0));
        for p in profiles {
            if let (PieceKind::R(j), Some(first)) = (p.kind, first) {
                if p.slice_volumes != first.slice_volumes {
                    return fail(PieceKind::R(j), None, CatalogRule::Item(9));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(ell: u32, h: u64, big_h: u64) -> CatalogParams {
        CatalogParams {
            ell,
            h,
            big_h,
            t: vec![2, 1],
            u: vec![2, 3],
            big_u: vec![5, 6],
            d: vec![1, 2],
            finite_type: false,
        }
    }

    #[test]
    fn degenerate_bounds() {
        let cat = make_catalog(&params(3, 1, 1), 7, false).unwrap();
        for p in cat.profiles.iter().filter(|p| p.kind.is_small()) {
            assert!(p.slice_volumes.iter().all(|&x| x == 1));
        }
    }

    #[test]
    fn bands_and_determinism() {
        let p = params(6, 1, 4);
        let a = make_catalog(&p, 42, false).unwrap();
        let b = make_catalog(&p, 42, false).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        for prof in a.profiles.iter().filter(|p| p.kind.is_small()) {
            assert!((2..=6).contains(&prof.depth_slices));
            assert!(prof.slice_volumes.iter().all(|&x| (1..=4).contains(&x)));
        }
        validate_catalog(&a.profiles, &p, false).unwrap();
    }

    #[test]
    fn doubling_q_profile() {
        let mut p = params(3, 1, 2);
        p.t = vec![2];
        p.u = vec![2];
        p.big_u = vec![5];
        p.d = vec![1];
        for seed in 0..50 {
            let cat = make_catalog(&p, seed, true).unwrap();
            let q = cat.profile(PieceKind::Q(0)).unwrap();
            assert!(q.depth_slices >= 2 && q.depth_slices <= 6);
            assert!(q.slice_volumes.iter().all(|&x| x <= 5));
            assert!(q.slice_volumes.windows(2).all(|w| w[1] <= 2 * w[0]));
            validate_catalog(&cat.profiles, &p, true).unwrap();
        }
    }

    #[test]
    fn violations_name_items() {
        let p = params(3, 1, 4);
        let mut cat = make_catalog(&p, 1, false).unwrap();
        let j = cat.profile_mut(PieceKind::J).unwrap();
        j.slice_volumes[0] = 5;
        assert_eq!(
            validate_catalog(&cat.profiles, &p, false).unwrap_err().rule,
            CatalogRule::Item(6)
        );

        let mut cat = make_catalog(&p, 1, false).unwrap();
        let r = cat.profile_mut(PieceKind::R(1)).unwrap();
        r.slice_volumes[0] = 4;
        let err = validate_catalog(&cat.profiles, &p, false).unwrap_err();
        assert_eq!((err.piece, err.rule), (PieceKind::R(1), CatalogRule::Item(8)));

        let mut cat = make_catalog(&p, 1, false).unwrap();
        cat.profiles.retain(|p| p.kind != PieceKind::K);
        assert_eq!(
            validate_catalog(&cat.profiles, &p, false).unwrap_err().rule,
            CatalogRule::Missing
        );
    }

    #[test]
    fn infeasible_params() {
        assert!(matches!(
            make_catalog(&params(3, 5, 4), 0, false),
            Err(CatalogError::InfeasibleBounds(_))
        ));
        assert!(matches!(
            make_catalog(&params(2, 1, 4), 0, false),
            Err(CatalogError::InvalidParams(_))
        ));
        let mut p = params(3, 1, 4);
        p.finite_type = true;
        assert!(make_catalog(&p, 0, false).is_err());
    }

    #[test]
    fn kind_round_trip() {
        for kind in [PieceKind::K, PieceKind::HS, PieceKind::J, PieceKind::Q(3), PieceKind::R(12)] {
            assert_eq!(kind.to_string().parse::<PieceKind>().unwrap(), kind);
        }
        assert!("X1".parse::<PieceKind>().is_err());
    }

    proptest! {
        #[test]
        fn generated_catalogs_validate(
            ell in 3u32..10,
            h in 1u64..5,
            spread in 0u64..5,
            ts in prop::collection::vec((1u32..4, 1u64..5, 0u64..5), 0..5),
            finite in any::<bool>(),
            doubling in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let u0 = ts.first().map(|x| x.1).unwrap_or(1);
            let p = CatalogParams {
                ell,
                h,
                big_h: h + spread,
                t: ts.iter().map(|x| x.0).collect(),
                u: ts.iter().map(|x| if finite { u0 } else { x.1 }).collect(),
                big_u: ts.iter().map(|x| if finite { u0 } else { x.1 } + x.2).collect(),
                d: ts.iter().map(|_| 1).collect(),
                finite_type: finite,
            };
            let cat = make_catalog(&p, seed, doubling).unwrap();
            prop_assert!(validate_catalog(&cat.profiles, &p, doubling).is_ok());
            if finite {
                let maxes: Vec<u64> = cat.profiles.iter()
                    .filter(|x| matches!(x.kind, PieceKind::R(_)))
                    .map(|x| x.max_volume())
                    .collect();
                prop_assert!(maxes.windows(2).all(|w| w[0] == w[1]));
            }
        }
    }
}
