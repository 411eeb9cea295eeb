//! Rooted trees with prescribed ball growth.
//!
//! Vertices live in per-level arrays ordered lexicographically: children of
//! a vertex are contiguous and appear in the order of their parents. The
//! trunk is index 0 at every level.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::growth::GrowthFunction;

// ---------------------------------------------------------------------------
// sparse sets

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SparseSetError {
    #[error("interval {index} is empty")]
    EmptyInterval { index: usize },
    #[error("interval {index} overlaps or precedes its predecessor")]
    Unsorted { index: usize },
}

/// Union of disjoint integer intervals `[start, start + len)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u64, u64)>", into = "Vec<(u64, u64)>")]
pub struct SparseSet {
    intervals: Vec<(u64, u64)>,
    /// `prefix[j]` = total length of intervals before `j`.
    prefix: Vec<u64>,
}

impl SparseSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(intervals: Vec<(u64, u64)>) -> Result<Self, SparseSetError> {
        for (index, &(start, len)) in intervals.iter().enumerate() {
            if len == 0 {
                return Err(SparseSetError::EmptyInterval { index });
            }
            if index > 0 {
                let (ps, pl) = intervals[index - 1];
                if ps + pl > start {
                    return Err(SparseSetError::Unsorted { index });
                }
            }
        }
        let mut prefix = Vec::with_capacity(intervals.len() + 1);
        let mut total = 0;
        prefix.push(0);
        for &(_, len) in &intervals {
            total += len;
            prefix.push(total);
        }
        Ok(Self { intervals, prefix })
    }

    pub fn intervals(&self) -> &[(u64, u64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Number of intervals starting at or before `n`.
    fn rank(&self, n: u64) -> usize {
        self.intervals.partition_point(|&(start, _)| start <= n)
    }

    pub fn contains(&self, n: u64) -> bool {
        match self.rank(n) {
            0 => false,
            j => {
                let (start, len) = self.intervals[j - 1];
                n < start + len
            }
        }
    }

    /// `|S ∩ {0, ..., n}|`.
    pub fn count_upto(&self, n: u64) -> u64 {
        match self.rank(n) {
            0 => 0,
            j => {
                let (start, len) = self.intervals[j - 1];
                self.prefix[j - 1] + len.min(n - start + 1)
            }
        }
    }
}

impl TryFrom<Vec<(u64, u64)>> for SparseSet {
    type Error = SparseSetError;

    fn try_from(intervals: Vec<(u64, u64)>) -> Result<Self, SparseSetError> {
        SparseSet::new(intervals)
    }
}

impl From<SparseSet> for Vec<(u64, u64)> {
    fn from(s: SparseSet) -> Self {
        s.intervals
    }
}

/// `s(n) / n` at each checkpoint; checkpoints must be positive.
pub fn lower_density(s: &SparseSet, checkpoints: &[u64]) -> Vec<Ratio<u64>> {
    checkpoints
        .iter()
        .map(|&n| {
            assert!(n > 0, "density checkpoints must be positive");
            Ratio::new(s.count_upto(n), n)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("exponent n - s_n - k - 1 is negative for k={k}, n={n}, s_n={s_n}")]
pub struct NegativeExponent {
    pub k: u64,
    pub n: u64,
    pub s_n: u64,
}

/// `2^(n - s_n - k - 1)`: vertices forced at level `n` below a ray leaving
/// the trunk at level `k`.
pub fn binary_blowup_lower_bound(k: u64, n: u64, s_n: u64) -> Result<BigUint, NegativeExponent> {
    let exp = n
        .checked_sub(s_n)
        .and_then(|x| x.checked_sub(k))
        .and_then(|x| x.checked_sub(1))
        .ok_or(NegativeExponent { k, n, s_n })?;
    Ok(BigUint::one() << exp)
}

// ---------------------------------------------------------------------------
// trees

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub parent: u32,
    /// Index of the first child on the next level.
    pub first_child: u32,
    pub children: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum BuildEvent {
    /// `level ∈ S` but the budget needs two children on the trunk.
    RuleSlip { level: usize },
    /// `level ∉ S` but the budget leaves a single child for the trunk.
    CapBound { level: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("level {level}: budget {budget} exceeds twice the {parents} parents")]
    BudgetOverflow { level: usize, budget: u64, parents: u64 },
    #[error("level {level}: budget does not fit in memory")]
    TooLarge { level: usize },
    #[error("level {level}: child counts sum to {found}, next level has {expected}")]
    ChildCountMismatch { level: usize, found: u64, expected: u64 },
    #[error("level {level}: child count {count} exceeds 2")]
    TooManyChildren { level: usize, count: u8 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdmissibleTree {
    levels: Vec<Vec<Vertex>>,
    events: Vec<BuildEvent>,
}

impl AdmissibleTree {
    /// Builds a tree from child counts per level; level `n+1` gets
    /// `sum(counts[n])` vertices.
    pub fn from_child_counts(counts: &[Vec<u8>]) -> Result<Self, TreeError> {
        let mut levels: Vec<Vec<Vertex>> = Vec::with_capacity(counts.len() + 1);
        let mut width = 1u64;
        for (level, row) in counts.iter().enumerate() {
            if row.len() as u64 != width || width == 0 {
                return Err(TreeError::ChildCountMismatch {
                    level,
                    found: row.len() as u64,
                    expected: width,
                });
            }
            if let Some(&count) = row.iter().find(|&&c| c > 2) {
                return Err(TreeError::TooManyChildren { level, count });
            }
            let mut next = 0u32;
            let layer = row
                .iter()
                .map(|&c| {
                    let v = Vertex {
                        parent: 0,
                        first_child: next,
                        children: c,
                    };
                    next += c as u32;
                    v
                })
                .collect();
            levels.push(layer);
            width = next as u64;
        }
        let leaf = Vertex {
            parent: 0,
            first_child: 0,
            children: 0,
        };
        if width > 0 {
            levels.push(vec![leaf; width as usize]);
        }
        let mut tree = Self {
            levels,
            events: Vec::new(),
        };
        tree.link_parents();
        Ok(tree)
    }

    /// Trunk with one leaf hung at every level outside `S`.
    pub fn comb(depth: usize, s: &SparseSet) -> Self {
        let mut counts = Vec::with_capacity(depth);
        let mut width = 1usize;
        for level in 0..depth {
            let mut row = vec![0u8; width];
            row[0] = if s.contains(level as u64) { 1 } else { 2 };
            width = row[0] as usize;
            counts.push(row);
        }
        Self::from_child_counts(&counts).expect("comb counts are consistent")
    }

    fn link_parents(&mut self) {
        for n in 0..self.levels.len().saturating_sub(1) {
            let (upper, lower) = self.levels.split_at_mut(n + 1);
            for (i, v) in upper[n].iter().enumerate() {
                let start = v.first_child as usize;
                for child in &mut lower[0][start..start + v.children as usize] {
                    child.parent = i as u32;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Vec<Vertex>] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &[Vertex] {
        &self.levels[n]
    }

    pub fn vertex_count(&self) -> u64 {
        self.levels.iter().map(|l| l.len() as u64).sum()
    }

    pub fn events(&self) -> &[BuildEvent] {
        &self.events
    }

    /// Levels whose trunk vertex has exactly one child.
    pub fn single_child_trunk_levels(&self) -> Vec<usize> {
        (0..self.depth())
            .filter(|&n| self.levels[n][0].children == 1)
            .collect()
    }

    /// Graphviz rendering; trunk edges are bold.
    pub fn to_dot(&self, s: &SparseSet) -> String {
        let mut out = String::from("digraph tree {\n  node [shape=point];\n");
        for (n, layer) in self.levels.iter().enumerate() {
            for i in 0..layer.len() {
                let mark = if i == 0 && s.contains(n as u64) {
                    " [color=red]"
                } else {
                    ""
                };
                let _ = writeln!(out, "  L{n}I{i}{mark};");
            }
        }
        for (n, layer) in self.levels.iter().enumerate().skip(1) {
            for (i, v) in layer.iter().enumerate() {
                let style = if i == 0 { " [style=bold]" } else { "" };
                let _ = writeln!(out, "  L{}I{} -> L{n}I{i}{style};", n - 1, v.parent);
            }
        }
        out.push_str("}\n");
        out
    }

    /// One JSON object per vertex, level by level.
    pub fn to_jsonl(&self, s: &SparseSet) -> String {
        let mut out = String::new();
        for (n, layer) in self.levels.iter().enumerate() {
            for (i, v) in layer.iter().enumerate() {
                let parent = if n == 0 {
                    "null".to_string()
                } else {
                    v.parent.to_string()
                };
                let _ = writeln!(
                    out,
                    r#"{{"level":{n},"index":{i},"parent":{parent},"child_count":{},"on_trunk":{},"in_S":{}}}"#,
                    v.children,
                    i == 0,
                    i == 0 && s.contains(n as u64)
                );
            }
        }
        out
    }
}

/// Builds the tree level by level: the trunk vertex takes 1 child on `S`
/// and 2 elsewhere, then the remaining budget fills parents 2 at a time from
/// the front.
pub fn build_tree(v: &GrowthFunction, s: &SparseSet) -> Result<AdmissibleTree, TreeError> {
    let mut levels: Vec<Vec<Vertex>> = Vec::with_capacity(v.horizon() + 1);
    let mut events = Vec::new();
    levels.push(vec![Vertex {
        parent: 0,
        first_child: 0,
        children: 0,
    }]);
    for n in 0..v.horizon() {
        let budget = (v.at(n + 1) - v.at(n))
            .to_u64()
            .filter(|&b| b < u32::MAX as u64)
            .ok_or(TreeError::TooLarge { level: n })?;
        let layer = &mut levels[n];
        let parents = layer.len() as u64;
        if budget > 2 * parents {
            return Err(TreeError::BudgetOverflow {
                level: n,
                budget,
                parents,
            });
        }
        let in_s = s.contains(n as u64);
        let mut first = if in_s { 1 } else { 2 }.min(budget);
        if in_s && budget > 1 + 2 * (parents - 1) {
            first = 2;
            events.push(BuildEvent::RuleSlip { level: n });
        }
        if !in_s && budget < 2 {
            events.push(BuildEvent::CapBound { level: n });
        }
        let mut remaining = budget - first;
        let mut next = 0u32;
        for (i, vertex) in layer.iter_mut().enumerate() {
            let c = if i == 0 {
                first
            } else {
                let c = remaining.min(2);
                remaining -= c;
                c
            };
            vertex.first_child = next;
            vertex.children = c as u8;
            next += c as u32;
        }
        let child_layer = layer
            .iter()
            .enumerate()
            .flat_map(|(i, p)| {
                let v = Vertex {
                    parent: i as u32,
                    first_child: 0,
                    children: 0,
                };
                std::iter::repeat_n(v, p.children as usize)
            })
            .collect();
        levels.push(child_layer);
    }
    Ok(AdmissibleTree { levels, events })
}

/// Ball sizes around the root, counted by breadth-first search along the
/// child links.
pub fn root_growth(t: &AdmissibleTree) -> GrowthFunction {
    let mut per_level = vec![0u64; t.levels.len()];
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    while let Some((n, i)) = queue.pop_front() {
        per_level[n] += 1;
        let v = t.levels[n][i];
        let start = v.first_child as usize;
        for j in start..start + v.children as usize {
            queue.push_back((n + 1, j));
        }
    }
    let mut total = 0u64;
    let values = per_level
        .iter()
        .map(|&c| {
            total += c;
            BigUint::from(total)
        })
        .collect();
    GrowthFunction::new(values).expect("partial sums are nondecreasing")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum AdmissibilityViolation {
    #[error("vertex L{level}I{index} has {count} children")]
    ChildCount { level: usize, index: usize, count: u8 },
    #[error("vertex L{level}I{index} has inconsistent links")]
    Structure { level: usize, index: usize },
    #[error("trunk breaks at level {level}")]
    Trunk { level: usize },
    #[error("side branch leaving the trunk at level {branch_level} reaches L{level}I{index}")]
    InfiniteBranch {
        level: usize,
        index: usize,
        branch_level: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdmissibilityError {
    #[error("guard {guard} exceeds depth {depth}")]
    GuardTooLarge { guard: usize, depth: usize },
    #[error(transparent)]
    Violation(#[from] AdmissibilityViolation),
}

/// Checks child counts, link consistency, the trunk ray, and that no side
/// branch leaving the trunk at a level `<= depth - guard` reaches the last
/// level.
pub fn verify_admissible(t: &AdmissibleTree, guard: usize) -> Result<(), AdmissibilityError> {
    let depth = t.depth();
    if guard > depth {
        return Err(AdmissibilityError::GuardTooLarge { guard, depth });
    }
    const TRUNK: u32 = u32::MAX;
    let mut labels = vec![TRUNK];
    for n in 0..=depth {
        let layer = &t.levels[n];
        let mut expected_child = 0u32;
        for (i, v) in layer.iter().enumerate() {
            if v.children > 2 {
                return Err(AdmissibilityViolation::ChildCount {
                    level: n,
                    index: i,
                    count: v.children,
                }
                .into());
            }
            let child_end = v.first_child as usize + v.children as usize;
            if v.children > 0 && (v.first_child != expected_child || n == depth) {
                return Err(AdmissibilityViolation::Structure { level: n, index: i }.into());
            }
            if v.children > 0 && child_end > t.levels[n + 1].len() {
                return Err(AdmissibilityViolation::Structure { level: n, index: i }.into());
            }
            expected_child += v.children as u32;
        }
        if n < depth {
            if expected_child as usize != t.levels[n + 1].len() {
                return Err(AdmissibilityViolation::Structure { level: n + 1, index: 0 }.into());
            }
            if layer[0].children == 0 {
                return Err(AdmissibilityViolation::Trunk { level: n }.into());
            }
            let mut next_labels = Vec::with_capacity(expected_child as usize);
            for (i, v) in layer.iter().enumerate() {
                for k in 0..v.children {
                    let child = (v.first_child + k as u32) as usize;
                    if t.levels[n + 1][child].parent as usize != i {
                        return Err(AdmissibilityViolation::Structure {
                            level: n + 1,
                            index: child,
                        }
                        .into());
                    }
                    let label = if labels[i] == TRUNK && child != 0 {
                        n as u32
                    } else {
                        labels[i]
                    };
                    next_labels.push(label);
                }
            }
            labels = next_labels;
        } else {
            for (index, &label) in labels.iter().enumerate() {
                if label != TRUNK && label as usize + guard <= depth {
                    return Err(AdmissibilityViolation::InfiniteBranch {
                        level: depth,
                        index,
                        branch_level: label as usize,
                    }
                    .into());
                }
            }
        }
    }
    Ok(())
}
