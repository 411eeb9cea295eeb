use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{assign_pieces, discrete_growth, stretch_r, AssemblyError, DiscreteGrowth};
use crate::catalog::{Catalog, PieceKind};
use crate::growth::GrowthFunction;
use crate::tree::{AdmissibleTree, SparseSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Infinite,
    FiniteType,
}

/// Trunk positions `n_j` of the Q-pieces with their lengths `t_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterSelection {
    pub mode: Mode,
    pub n: Vec<u64>,
    pub t: Vec<u64>,
    /// Increment thresholds (infinite mode).
    #[serde(default)]
    pub r: Vec<u64>,
    /// Stretch values before escalation (finite type mode).
    #[serde(default)]
    pub stretch_rs: Vec<u64>,
}

impl ParameterSelection {
    pub fn sparse_set(&self) -> SparseSet {
        SparseSet::new(self.n.iter().copied().zip(self.t.iter().copied()).collect())
            .expect("schedules are increasing and disjoint")
    }

    pub fn pieces(&self) -> usize {
        self.n.len()
    }
}

/// Discrete growth of the comb of the given depth: the trunk, a leaf on
/// every trunk level outside `S`, pieces per the schedule.
pub fn comb_growth(
    catalog: &Catalog,
    sel: &ParameterSelection,
    depth: usize,
) -> Result<DiscreteGrowth, AssemblyError> {
    let tree = AdmissibleTree::comb(depth, &sel.sparse_set());
    Ok(discrete_growth(&assign_pieces(tree, sel, catalog)?))
}

/// First `n >= 1` with `z(n) > 4 u^2 n`, if any.
pub fn finite_type_bound(z: &GrowthFunction, u: u64) -> Result<(), usize> {
    let slope = BigUint::from(4 * u * u);
    match (1..=z.horizon()).find(|&n| z.at(n) > &(&slope * n)) {
        Some(n) => Err(n),
        None => Ok(()),
    }
}

/// Chooses the positions `n_j` of all catalog Q-pieces on a trunk of depth
/// `v.horizon()`.
pub fn select_parameters(
    v: &GrowthFunction,
    catalog: &Catalog,
    mode: Mode,
) -> Result<ParameterSelection, AssemblyError> {
    match mode {
        Mode::Infinite => select_infinite(v, catalog),
        Mode::FiniteType => select_finite_type(v, catalog),
    }
}

fn select_infinite(v: &GrowthFunction, catalog: &Catalog) -> Result<ParameterSelection, AssemblyError> {
    let p = &catalog.params;
    let depth = v.horizon();
    if depth < 1 {
        return Err(AssemblyError::ModeInfeasible("horizon 0 has no increments".into()));
    }
    let inc: Vec<BigUint> = (1..=depth).map(|n| v.at(n) - v.at(n - 1)).collect();
    let top = p.big_u.iter().copied().max().unwrap_or(0).max(p.h);
    if inc[depth - 1] < BigUint::from(top) {
        return Err(AssemblyError::ModeInfeasible(format!(
            "final increment {} is below max(h, U_j) = {top}",
            inc[depth - 1]
        )));
    }
    let mut sel = ParameterSelection {
        mode: Mode::Infinite,
        n: Vec::new(),
        t: Vec::new(),
        r: Vec::new(),
        stretch_rs: Vec::new(),
    };
    for j in 0..p.pieces() {
        let threshold = BigUint::from(p.h.max(p.big_u[j]));
        // increments stay above the threshold from r on
        let mut r = depth as u64;
        while r > 1 && inc[r as usize - 2] >= threshold {
            r -= 1;
        }
        let t = p.t[j] as u64;
        let prev = if j == 0 { 0 } else { sel.n[j - 1] + sel.t[j - 1] };
        let n = p.d[j].max(t).max(r).max(j as u64 * prev);
        if n + t - 1 > depth as u64 {
            return Err(AssemblyError::HorizonExceeded {
                j,
                detail: format!("Q{j} at {n} with length {t} passes depth {depth}"),
            });
        }
        sel.r.push(r);
        sel.n.push(n);
        sel.t.push(t);
    }
    Ok(sel)
}

fn select_finite_type(v: &GrowthFunction, catalog: &Catalog) -> Result<ParameterSelection, AssemblyError> {
    let p = &catalog.params;
    let depth = v.horizon() as u64;
    let u = p.u.first().copied().unwrap_or(0);
    if p.u.iter().any(|&x| x != u) {
        return Err(AssemblyError::ModeInfeasible("u_j must be constant".into()));
    }
    if p.pieces() > 0 && u < 2 {
        return Err(AssemblyError::ModeInfeasible(format!("u = {u} leaves no room for B > C > 1")));
    }
    let rat = |x: u64| BigRational::from_integer(x.into());
    let max_t = p.t.iter().copied().max().unwrap_or(0) as u64;
    let identity = GrowthFunction::tabulate((2 * u * (depth + 1) + max_t + 2) as usize, BigUint::from)
        .expect("identity is nondecreasing");
    let mut sel = ParameterSelection {
        mode: Mode::FiniteType,
        n: Vec::new(),
        t: Vec::new(),
        r: Vec::new(),
        stretch_rs: Vec::new(),
    };
    for j in 0..p.pieces() {
        let a = if j == 0 { 1 } else { sel.n[j - 1] + sel.t[j - 1] };
        let b = p.t[j] as u64;
        let exceeded = |detail: String| AssemblyError::HorizonExceeded { j, detail };
        if a + b > depth + 1 {
            return Err(exceeded(format!("Q{j} cannot start after {a} within depth {depth}")));
        }
        let r_max = depth + 1 - a - b;
        let q_max = catalog
            .profile(PieceKind::Q(j))
            .ok_or(AssemblyError::MissingProfile(PieceKind::Q(j)))?
            .max_volume();
        let big_a = q_max.max(2 * u + 1);
        let r_min = p.d[j]
            .saturating_sub(a)
            .max((j as u64 * a).saturating_sub(a))
            .max(b.saturating_sub(a));
        let lemma_r = stretch_r(&rat(a), &rat(b), &rat(big_a), &rat(2 * u), &rat(u), &identity, r_min, r_max)
            .map_err(|e| match e {
                AssemblyError::HorizonExceeded { detail, .. } => exceeded(detail),
                other => other,
            })?;
        let mut r = lemma_r;
        loop {
            sel.n.push(a + r);
            sel.t.push(b);
            let z0 = comb_growth(catalog, &sel, (a + r + b).min(depth) as usize)?;
            if finite_type_bound(&z0.z, u).is_ok() {
                break;
            }
            sel.n.pop();
            sel.t.pop();
            r += 1;
            if r > r_max {
                return Err(exceeded(format!("z_0 <= 4u^2 n fails for every R up to {r_max}")));
            }
        }
        sel.stretch_rs.push(lemma_r);
    }
    let z0 = comb_growth(catalog, &sel, depth as usize)?;
    if let Err(n) = finite_type_bound(&z0.z, u) {
        return Err(AssemblyError::ModeInfeasible(format!("z_0({n}) exceeds 4u^2 n")));
    }
    Ok(sel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make_catalog, CatalogParams};
    use crate::growth::Generator;
    use crate::tree::lower_density;
    use num_rational::Ratio;

    fn quadratic(horizon: usize) -> GrowthFunction {
        Generator::Polynomial {
            coefficients: vec![1, 0, 1],
            horizon,
        }
        .tabulate()
        .unwrap()
    }

    fn finite_params(u: u64, pieces: usize) -> CatalogParams {
        CatalogParams {
            ell: 3,
            h: 1,
            big_h: 2,
            t: vec![1; pieces],
            u: vec![u; pieces],
            big_u: vec![5; pieces],
            d: vec![1; pieces],
            finite_type: true,
        }
    }

    #[test]
    fn infinite_worked_example() {
        let params = CatalogParams {
            ell: 3,
            h: 1,
            big_h: 1,
            t: vec![1, 1],
            u: vec![1, 1],
            big_u: vec![3, 3],
            d: vec![1, 2],
            finite_type: false,
        };
        let cat = make_catalog(&params, 0, false).unwrap();
        let sel = select_parameters(&quadratic(10), &cat, Mode::Infinite).unwrap();
        assert_eq!(sel.r, vec![2, 2]);
        assert_eq!(sel.n, vec![2, 3]);
    }

    #[test]
    fn infinite_needs_growth() {
        let params = CatalogParams {
            ell: 3,
            h: 1,
            big_h: 1,
            t: vec![1],
            u: vec![1],
            big_u: vec![3],
            d: vec![1],
            finite_type: false,
        };
        let cat = make_catalog(&params, 0, false).unwrap();
        let v = Generator::Affine {
            slope: 2,
            intercept: 1,
            horizon: 20,
        }
        .tabulate()
        .unwrap();
        assert!(matches!(
            select_parameters(&v, &cat, Mode::Infinite),
            Err(AssemblyError::ModeInfeasible(_))
        ));
    }

    #[test]
    fn infinite_horizon_exceeded() {
        let params = CatalogParams {
            ell: 3,
            h: 1,
            big_h: 1,
            t: vec![1; 4],
            u: vec![1; 4],
            big_u: vec![3; 4],
            d: vec![1; 4],
            finite_type: false,
        };
        let cat = make_catalog(&params, 0, false).unwrap();
        assert!(matches!(
            select_parameters(&quadratic(12), &cat, Mode::Infinite),
            Err(AssemblyError::HorizonExceeded { j: 3, .. })
        ));
    }

    #[test]
    fn density_schedule() {
        let params = CatalogParams {
            ell: 3,
            h: 1,
            big_h: 1,
            t: vec![1, 2, 3],
            u: vec![1; 3],
            big_u: vec![3; 3],
            d: vec![1; 3],
            finite_type: false,
        };
        let cat = make_catalog(&params, 0, false).unwrap();
        let sel = select_parameters(&quadratic(200), &cat, Mode::Infinite).unwrap();
        let s = sel.sparse_set();
        for j in 2..sel.pieces() {
            let point = sel.n[j] - 1;
            assert!(lower_density(&s, &[point])[0] <= Ratio::new(1, j as u64));
        }
    }

    #[test]
    fn finite_type_rejects_u1() {
        let cat = make_catalog(&finite_params(1, 1), 0, false).unwrap();
        let v = GrowthFunction::tabulate(100, |n| BigUint::from(2 * n + 1)).unwrap();
        assert!(matches!(
            select_parameters(&v, &cat, Mode::FiniteType),
            Err(AssemblyError::ModeInfeasible(_))
        ));
    }

    #[test]
    fn finite_type_u2() {
        let cat = make_catalog(&finite_params(2, 2), 7, false).unwrap();
        let v = GrowthFunction::tabulate(300, |n| BigUint::from(2 * n + 1)).unwrap();
        let sel = select_parameters(&v, &cat, Mode::FiniteType).unwrap();
        assert_eq!(sel.stretch_rs.len(), 2);
        assert!(sel.n[0] > sel.stretch_rs[0]);
        let z0 = comb_growth(&cat, &sel, 300).unwrap();
        // direct evaluation of the linear bound
        for n in 1..=z0.z.horizon() {
            assert!(z0.z.at(n) <= &BigUint::from(16 * n));
        }
    }
}
