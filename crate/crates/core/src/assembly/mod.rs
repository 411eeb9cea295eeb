//! Plumbed complexes: a piece on every tree vertex, the discrete growth
//! function they induce, and the bounds relating it to the tree growth.

mod audit;
mod schedule;
mod stretch;

pub use audit::{metric_audit, AuditReport, AuditSide, AuditViolation, ContainmentFailure};
pub use schedule::{comb_growth, finite_type_bound, select_parameters, Mode, ParameterSelection};
pub use stretch::stretch_r;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, PieceKind, PieceProfile};
use crate::growth::GrowthFunction;
use crate::tree::{AdmissibleTree, SparseSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssemblyError {
    #[error("Q{j} needs trunk levels up to {needed}, tree depth is {depth}")]
    TrunkTooShort { j: usize, needed: u64, depth: usize },
    #[error("catalog has no profile for {0}")]
    MissingProfile(PieceKind),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("piece {j}: {detail}")]
    HorizonExceeded { j: usize, detail: String },
    #[error("mode infeasible: {0}")]
    ModeInfeasible(String),
    #[error("invalid stretch parameters: {0}")]
    InvalidStretch(String),
    #[error("no parameter selection attached")]
    MissingSelection,
}

/// A tree with a piece kind on every vertex. Trunk kinds are stored; side
/// kinds follow from child counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlumbedComplex {
    pub tree: AdmissibleTree,
    pub sparse: SparseSet,
    pub catalog: Catalog,
    pub selection: Option<ParameterSelection>,
    trunk: Vec<PieceKind>,
}

/// One piece of a complex: a vertex, or a whole Q-span of trunk vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PieceRef<'a> {
    pub level: usize,
    pub index: usize,
    pub kind: PieceKind,
    /// First r-value covered by the piece.
    pub slice_start: u64,
    pub profile: &'a PieceProfile,
}

impl PlumbedComplex {
    pub fn ell(&self) -> u32 {
        self.catalog.params.ell
    }

    pub fn trunk_kinds(&self) -> &[PieceKind] {
        &self.trunk
    }

    pub fn kind_at(&self, level: usize, index: usize) -> PieceKind {
        if index == 0 {
            self.trunk[level]
        } else {
            PieceKind::for_children(self.tree.level(level)[index].children)
        }
    }

    fn profile(&self, kind: PieceKind) -> &PieceProfile {
        self.catalog
            .profile(kind)
            .expect("profiles are checked on assembly")
    }

    /// Start level of the Q-span containing trunk level `level`, if any.
    pub fn q_start(&self, level: usize) -> Option<usize> {
        match self.trunk[level] {
            PieceKind::Q(j) => self.selection.as_ref().map(|s| s.n[j] as usize),
            _ => None,
        }
    }

    /// Largest r-value any slice can carry.
    pub fn slice_horizon(&self) -> usize {
        (self.tree.depth() + 1) * self.ell() as usize - 1
    }

    /// Per-level counts of side vertices with 2, 1 and 0 children.
    pub fn side_counts(&self) -> Vec<[u64; 3]> {
        self.tree
            .levels()
            .iter()
            .map(|layer| {
                let mut c = [0u64; 3];
                for v in &layer[1..] {
                    c[2 - v.children.min(2) as usize] += 1;
                }
                c
            })
            .collect()
    }

    /// Trunk pieces in level order, one entry per Q-span.
    pub fn trunk_pieces(&self) -> Vec<PieceRef<'_>> {
        let ell = self.ell() as u64;
        (0..=self.tree.depth())
            .filter(|&n| self.q_start(n).is_none_or(|s| s == n))
            .map(|n| {
                let kind = self.trunk[n];
                PieceRef {
                    level: n,
                    index: 0,
                    kind,
                    slice_start: n as u64 * ell,
                    profile: self.profile(kind),
                }
            })
            .collect()
    }

    /// Visits every piece once.
    pub fn for_each_piece(&self, mut f: impl FnMut(PieceRef<'_>)) {
        let ell = self.ell() as u64;
        let mut trunk = self.trunk_pieces().into_iter().peekable();
        for (n, layer) in self.tree.levels().iter().enumerate() {
            while let Some(p) = trunk.next_if(|p| p.level == n) {
                f(p);
            }
            for (i, v) in layer.iter().enumerate().skip(1) {
                let kind = PieceKind::for_children(v.children);
                f(PieceRef {
                    level: n,
                    index: i,
                    kind,
                    slice_start: n as u64 * ell,
                    profile: self.profile(kind),
                });
            }
        }
    }

    /// Number of slices carrying each r-value.
    pub fn slice_counts(&self) -> Vec<u64> {
        self.accumulate().1
    }

    /// Per r-value slice volume sums and slice counts, from per-level side
    /// counts.
    fn accumulate(&self) -> (Vec<u128>, Vec<u64>) {
        let horizon = self.slice_horizon();
        let mut vol = vec![0u128; horizon + 1];
        let mut count = vec![0u64; horizon + 1];
        let mut add = |start: u64, profile: &PieceProfile, times: u64| {
            for (k, &x) in profile.slice_volumes.iter().enumerate() {
                let r = start as usize + k;
                vol[r] += x as u128 * times as u128;
                count[r] += times;
            }
        };
        for p in self.trunk_pieces() {
            add(p.slice_start, p.profile, 1);
        }
        let ell = self.ell() as u64;
        for (n, c) in self.side_counts().iter().enumerate() {
            for (kind, &times) in [PieceKind::J, PieceKind::K, PieceKind::HS].iter().zip(c) {
                if times > 0 {
                    add(n as u64 * ell, self.profile(*kind), times);
                }
            }
        }
        (vol, count)
    }

    /// Growth of the sub-complex made of the trunk pieces and, at each trunk
    /// level outside `S` with two children, the piece on the side child.
    pub fn trunk_subcomplex_growth(&self) -> DiscreteGrowth {
        let ell = self.ell() as u64;
        let horizon = self.slice_horizon();
        let mut vol = vec![0u64; horizon + 1];
        let mut slice_counts = vec![0u64; horizon + 1];
        let mut add = |start: u64, profile: &PieceProfile| {
            for (k, &x) in profile.slice_volumes.iter().enumerate() {
                vol[start as usize + k] += x;
                slice_counts[start as usize + k] += 1;
            }
        };
        for p in self.trunk_pieces() {
            add(p.slice_start, p.profile);
        }
        for n in 0..self.tree.depth() {
            if self.tree.level(n)[0].children == 2 && !self.sparse.contains(n as u64) {
                let kind = self.kind_at(n + 1, 1);
                add((n as u64 + 1) * ell, self.profile(kind));
            }
        }
        let mut total = BigUint::zero();
        let values = vol
            .iter()
            .map(|&x| {
                total += x;
                total.clone()
            })
            .collect();
        DiscreteGrowth {
            z: GrowthFunction::new(values).expect("prefix sums are nondecreasing"),
            slice_counts,
        }
    }

    /// Copy without a selection; the metric audit refuses it.
    pub fn without_selection(&self) -> Self {
        Self {
            selection: None,
            ..self.clone()
        }
    }
}

/// Assigns pieces: HS at the root, `Q(j)` on trunk levels
/// `n_j..n_j+t_j`, `R(j)` after it until the next Q, and J/K/HS by child
/// count elsewhere (including the trunk before `n_0`).
pub fn assign_pieces(
    tree: AdmissibleTree,
    sel: &ParameterSelection,
    catalog: &Catalog,
) -> Result<PlumbedComplex, AssemblyError> {
    let depth = tree.depth();
    if sel.n.len() != sel.t.len() {
        return Err(AssemblyError::InvalidSchedule("n and t lengths differ".into()));
    }
    for j in 0..sel.n.len() {
        if sel.t[j] == 0 {
            return Err(AssemblyError::InvalidSchedule(format!("t_{j} = 0")));
        }
        if j == 0 && sel.n[0] == 0 {
            return Err(AssemblyError::InvalidSchedule("n_0 must be at least 1".into()));
        }
        if j > 0 && sel.n[j] < sel.n[j - 1] + sel.t[j - 1] {
            return Err(AssemblyError::InvalidSchedule(format!("Q{j} overlaps Q{}", j - 1)));
        }
        let needed = sel.n[j] + sel.t[j] - 1;
        if needed > depth as u64 {
            return Err(AssemblyError::TrunkTooShort { j, needed, depth });
        }
    }
    let mut trunk = Vec::with_capacity(depth + 1);
    let mut j_next = 0;
    for level in 0..=depth {
        let l = level as u64;
        while j_next < sel.n.len() && l >= sel.n[j_next] + sel.t[j_next] {
            j_next += 1;
        }
        let kind = if level == 0 {
            PieceKind::HS
        } else if j_next < sel.n.len() && l >= sel.n[j_next] {
            PieceKind::Q(j_next)
        } else if j_next > 0 {
            PieceKind::R(j_next - 1)
        } else {
            PieceKind::for_children(tree.level(level)[0].children)
        };
        trunk.push(kind);
    }
    let mut needed: Vec<PieceKind> = vec![PieceKind::J, PieceKind::K, PieceKind::HS];
    needed.extend(trunk.iter().copied());
    needed.sort();
    needed.dedup();
    if let Some(&kind) = needed.iter().find(|&&k| catalog.profile(k).is_none()) {
        return Err(AssemblyError::MissingProfile(kind));
    }
    Ok(PlumbedComplex {
        tree,
        sparse: sel.sparse_set(),
        catalog: catalog.clone(),
        selection: Some(sel.clone()),
        trunk,
    })
}

/// `z` on r-values `0..=slice_horizon` with the per-r slice counts `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteGrowth {
    pub z: GrowthFunction,
    pub slice_counts: Vec<u64>,
}

impl DiscreteGrowth {
    /// Cumulative slice counts, the slice-level analogue of tree growth.
    pub fn cumulative_slices(&self) -> GrowthFunction {
        let mut total = 0u64;
        let values = self
            .slice_counts
            .iter()
            .map(|&c| {
                total += c;
                BigUint::from(total)
            })
            .collect();
        GrowthFunction::new(values).expect("partial sums are nondecreasing")
    }

    pub fn to_file(&self) -> DiscreteGrowthFile {
        DiscreteGrowthFile {
            horizon: self.z.horizon(),
            values: self.z.values().iter().map(|x| x.to_string()).collect(),
            slice_counts: self.slice_counts.clone(),
        }
    }
}

/// On-disk form of a discrete growth function; values are kept as read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteGrowthFile {
    pub horizon: usize,
    pub values: Vec<String>,
    pub slice_counts: Vec<u64>,
}

/// `z(n)` = total volume of slices with r-value `<= n`.
pub fn discrete_growth(c: &PlumbedComplex) -> DiscreteGrowth {
    let (vol, slice_counts) = c.accumulate();
    let mut total = BigUint::zero();
    let values = vol
        .iter()
        .map(|&x| {
            total += BigUint::from(x);
            total.clone()
        })
        .collect();
    DiscreteGrowth {
        z: GrowthFunction::new(values).expect("prefix sums are nondecreasing"),
        slice_counts,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum LemmaZViolation {
    #[error("expected {expected} values, found {found}")]
    Length { expected: usize, found: usize },
    #[error("r = {level}: increment {increment} breaks the {side:?} bound {bound}")]
    Sandwich {
        level: usize,
        side: Side,
        increment: String,
        bound: String,
    },
    #[error("r = {level}: increment {increment} breaks the derived {side:?} bound {bound}")]
    Derived {
        level: usize,
        side: Side,
        increment: String,
        bound: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DerivedBound {
    /// `(h-1) c <= z' <= (H+1) c` where `c >= max(h, U_j)`.
    Checked { levels: usize },
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaZReport {
    pub levels_checked: usize,
    pub derived: DerivedBound,
}

/// Window index of r-value `n`: the largest `j` with `ell n_j <= n`, or 0.
fn window(sel: Option<&ParameterSelection>, ell: u64, n: u64) -> usize {
    sel.map_or(0, |s| s.n.partition_point(|&nj| nj * ell <= n).saturating_sub(1))
}

/// Checks `h (c(n) - 1) <= z(n) - z(n-1) <= H c(n) + U_j` at every r-value,
/// with `c(n)` recounted from the complex and `z(-1) = 0`.
pub fn check_lemma_z(c: &PlumbedComplex, z: &[BigUint]) -> Result<LemmaZReport, LemmaZViolation> {
    let counts = c.slice_counts();
    if z.len() != counts.len() {
        return Err(LemmaZViolation::Length {
            expected: counts.len(),
            found: z.len(),
        });
    }
    let p = &c.catalog.params;
    let (h, big_h) = (BigInt::from(p.h), BigInt::from(p.big_h));
    let ell = p.ell as u64;
    let sel = c.selection.as_ref();
    let derived_on = p.h >= 2;
    let mut derived_levels = 0;
    let mut prev = BigInt::zero();
    for (n, value) in z.iter().enumerate() {
        let cur = BigInt::from(value.clone());
        let inc = &cur - &prev;
        prev = cur;
        let cn = counts[n];
        let j = window(sel, ell, n as u64);
        let big_u = p.big_u.get(j).copied().unwrap_or(0);
        let lower = &h * (BigInt::from(cn) - 1);
        let upper = &big_h * cn + big_u;
        let breach = |side, bound: &BigInt| LemmaZViolation::Sandwich {
            level: n,
            side,
            increment: inc.to_string(),
            bound: bound.to_string(),
        };
        if inc < lower {
            return Err(breach(Side::Lower, &lower));
        }
        if inc > upper {
            return Err(breach(Side::Upper, &upper));
        }
        if derived_on && cn >= p.h.max(big_u) {
            derived_levels += 1;
            let lo = BigInt::from((p.h - 1) as u128 * cn as u128);
            let hi = BigInt::from((p.big_h + 1) as u128 * cn as u128);
            let side = if inc < lo {
                Some((Side::Lower, lo))
            } else if inc > hi {
                Some((Side::Upper, hi))
            } else {
                None
            };
            if let Some((side, bound)) = side {
                return Err(LemmaZViolation::Derived {
                    level: n,
                    side,
                    increment: inc.to_string(),
                    bound: bound.to_string(),
                });
            }
        }
    }
    let derived = if derived_on {
        DerivedBound::Checked {
            levels: derived_levels,
        }
    } else {
        DerivedBound::Skipped {
            reason: format!("h = {} leaves a zero lower constant", p.h),
        }
    };
    Ok(LemmaZReport {
        levels_checked: z.len(),
        derived,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[error("r = {level}: {side:?} integration bound fails ({value} vs {bound})")]
pub struct PrallViolation {
    pub level: usize,
    pub side: Side,
    pub value: String,
    pub bound: String,
}

/// `z0(n) + h (v(n) - v0(n)) <= z(n) <= z0(n) + H v(n)` on the common range.
pub fn check_prall_integration(
    z: &DiscreteGrowth,
    z0: &DiscreteGrowth,
    v: &GrowthFunction,
    v0: &GrowthFunction,
    h: u64,
    big_h: u64,
) -> Result<usize, PrallViolation> {
    let range = z
        .z
        .horizon()
        .min(z0.z.horizon())
        .min(v.horizon())
        .min(v0.horizon());
    let (h, big_h) = (BigInt::from(h), BigInt::from(big_h));
    let int = |x: &BigUint| BigInt::from(x.clone());
    for n in 0..=range {
        let zn = int(z.z.at(n));
        let z0n = int(z0.z.at(n));
        let lower = &z0n + &h * (int(v.at(n)) - int(v0.at(n)));
        let upper = &z0n + &big_h * int(v.at(n));
        let fail = |side, bound: BigInt| PrallViolation {
            level: n,
            side,
            value: zn.to_string(),
            bound: bound.to_string(),
        };
        if zn < lower {
            return Err(fail(Side::Lower, lower));
        }
        if zn > upper {
            return Err(fail(Side::Upper, upper));
        }
    }
    Ok(range + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make_catalog, CatalogParams};
    use crate::growth::Generator;
    use crate::tree::build_tree;

    fn params() -> CatalogParams {
        CatalogParams {
            ell: 3,
            h: 1,
            big_h: 3,
            t: vec![1],
            u: vec![2],
            big_u: vec![4],
            d: vec![1],
            finite_type: false,
        }
    }

    fn selection(n: Vec<u64>, t: Vec<u64>) -> ParameterSelection {
        ParameterSelection {
            mode: Mode::Infinite,
            n,
            t,
            r: Vec::new(),
            stretch_rs: Vec::new(),
        }
    }

    fn linear_complex(horizon: usize, seed: u64) -> PlumbedComplex {
        let v = Generator::Affine {
            slope: 2,
            intercept: 1,
            horizon,
        }
        .tabulate()
        .unwrap();
        let sel = selection(vec![2], vec![1]);
        let tree = build_tree(&v, &sel.sparse_set()).unwrap();
        let cat = make_catalog(&params(), seed, false).unwrap();
        assign_pieces(tree, &sel, &cat).unwrap()
    }

    /// Re-sums `z'` over every (piece, slice) pair, one vertex at a time.
    fn oracle_z(c: &PlumbedComplex) -> Vec<BigUint> {
        let ell = c.ell() as usize;
        let mut inc = vec![0u64; c.slice_horizon() + 1];
        for (n, layer) in c.tree.levels().iter().enumerate() {
            for i in 0..layer.len() {
                let kind = c.kind_at(n, i);
                let start = match (i, c.q_start(n)) {
                    (0, Some(s)) if s != n => continue,
                    (0, Some(s)) => s * ell,
                    _ => n * ell,
                };
                let prof = c.catalog.profile(kind).unwrap();
                for (k, &x) in prof.slice_volumes.iter().enumerate() {
                    inc[start + k] += x;
                }
            }
        }
        let mut total = 0u64;
        inc.iter()
            .map(|&x| {
                total += x;
                BigUint::from(total)
            })
            .collect()
    }

    #[test]
    fn rule_trace() {
        let c = linear_complex(10, 3);
        let trunk = c.trunk_kinds();
        assert_eq!(trunk[0], PieceKind::HS);
        assert_eq!(trunk[1], PieceKind::J);
        assert_eq!(trunk[2], PieceKind::Q(0));
        assert!(trunk[3..].iter().all(|&k| k == PieceKind::R(0)));
        for n in 1..=10 {
            for i in 1..c.tree.level(n).len() {
                let expect = PieceKind::for_children(c.tree.level(n)[i].children);
                assert_eq!(c.kind_at(n, i), expect);
            }
        }
        // level 2 is single-child on the trunk, so the side vertex of level 2 continues
        assert_eq!(c.kind_at(2, 1), PieceKind::K);
    }

    #[test]
    fn depth_zero_tree() {
        let v = GrowthFunction::from_u64s(&[1]).unwrap();
        let sel = selection(vec![], vec![]);
        let tree = build_tree(&v, &SparseSet::empty()).unwrap();
        let cat = make_catalog(&params(), 0, false).unwrap();
        let c = assign_pieces(tree, &sel, &cat).unwrap();
        assert_eq!(c.trunk_kinds(), &[PieceKind::HS]);
        let mut count = 0;
        c.for_each_piece(|_| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn trunk_too_short() {
        let v = GrowthFunction::from_u64s(&[1, 3, 5]).unwrap();
        let sel = selection(vec![2], vec![2]);
        let tree = build_tree(&v, &sel.sparse_set()).unwrap();
        let cat = make_catalog(&params(), 0, false).unwrap();
        assert!(matches!(
            assign_pieces(tree, &sel, &cat),
            Err(AssemblyError::TrunkTooShort { j: 0, .. })
        ));
    }

    #[test]
    fn missing_profile() {
        let v = GrowthFunction::from_u64s(&[1, 3, 5, 7]).unwrap();
        let sel = selection(vec![1], vec![1]);
        let tree = build_tree(&v, &sel.sparse_set()).unwrap();
        let mut cat = make_catalog(&params(), 0, false).unwrap();
        cat.profiles.retain(|p| p.kind != PieceKind::R(0));
        assert_eq!(
            assign_pieces(tree, &sel, &cat).unwrap_err(),
            AssemblyError::MissingProfile(PieceKind::R(0))
        );
    }

    #[test]
    fn single_piece_prefix_sum() {
        let v = GrowthFunction::from_u64s(&[1]).unwrap();
        let tree = build_tree(&v, &SparseSet::empty()).unwrap();
        let mut cat = make_catalog(&params(), 0, false).unwrap();
        let hs = cat.profile_mut(PieceKind::HS).unwrap();
        hs.depth_slices = 2;
        hs.slice_volumes = vec![3, 4];
        let c = assign_pieces(tree, &selection(vec![], vec![]), &cat).unwrap();
        let d = discrete_growth(&c);
        assert_eq!(d.z, GrowthFunction::from_u64s(&[3, 7, 7]).unwrap());
        assert_eq!(d.slice_counts, vec![1, 1, 0]);
    }

    #[test]
    fn matches_oracle() {
        for seed in 0..10 {
            let c = linear_complex(60, seed);
            let d = discrete_growth(&c);
            assert_eq!(d.z.values(), &oracle_z(&c)[..]);
            let mut pieces = 0u64;
            c.for_each_piece(|_| pieces += 1);
            assert_eq!(pieces, c.tree.vertex_count());
        }
    }

    #[test]
    fn lemma_z_passes_and_detects_corruption() {
        for seed in 0..20 {
            let c = linear_complex(40, seed);
            let d = discrete_growth(&c);
            let report = check_lemma_z(&c, d.z.values()).unwrap();
            assert!(matches!(report.derived, DerivedBound::Skipped { .. }));
            let n = 30;
            let counts = c.slice_counts();
            let bump = BigUint::from(c.catalog.params.big_h * counts[n] + 4 + 1);
            let mut bad = d.z.values().to_vec();
            for x in &mut bad[n..] {
                *x += &bump;
            }
            match check_lemma_z(&c, &bad) {
                Err(LemmaZViolation::Sandwich { level, side, .. }) => {
                    assert_eq!((level, side), (n, Side::Upper));
                }
                other => panic!("expected a violation, got {other:?}"),
            }
        }
    }

    #[test]
    fn degenerate_catalog_is_tight() {
        let mut p = params();
        p.big_h = 1;
        p.u = vec![1];
        p.big_u = vec![1];
        let v = Generator::Affine {
            slope: 2,
            intercept: 1,
            horizon: 30,
        }
        .tabulate()
        .unwrap();
        let sel = selection(vec![2], vec![1]);
        let tree = build_tree(&v, &sel.sparse_set()).unwrap();
        let c = assign_pieces(tree, &sel, &make_catalog(&p, 5, false).unwrap()).unwrap();
        let d = discrete_growth(&c);
        check_lemma_z(&c, d.z.values()).unwrap();
        for (n, &cn) in d.slice_counts.iter().enumerate() {
            let inc = d.z.at(n) - if n == 0 { BigUint::zero() } else { d.z.at(n - 1).clone() };
            assert_eq!(inc, BigUint::from(cn));
        }
    }

    #[test]
    fn prall_identity_and_corruption() {
        let c = linear_complex(40, 1);
        let d = discrete_growth(&c);
        let v = d.cumulative_slices();
        assert_eq!(check_prall_integration(&d, &d, &v, &v, 1, 3).unwrap(), d.z.horizon() + 1);
        let mut removed = d.clone();
        let n = (20..).find(|&n| d.z.at(n) > d.z.at(n - 1)).unwrap();
        let vol = removed.z.at(n) - removed.z.at(n - 1);
        let values: Vec<BigUint> = removed
            .z
            .values()
            .iter()
            .enumerate()
            .map(|(k, x)| if k >= n { x - &vol } else { x.clone() })
            .collect();
        removed.z = GrowthFunction::new(values).unwrap();
        let err = check_prall_integration(&removed, &d, &v, &v, 1, 3).unwrap_err();
        assert_eq!((err.level, err.side), (n, Side::Lower));
    }
}
