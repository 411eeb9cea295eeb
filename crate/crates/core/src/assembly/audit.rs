use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{discrete_growth, AssemblyError, PlumbedComplex};
use crate::catalog::PieceKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditSide {
    /// `d_hi <= 3 r` failed.
    Upper,
    /// `d_lo >= r / 3` failed.
    Lower,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditViolation {
    pub level: usize,
    pub index: usize,
    pub kind: PieceKind,
    pub r: u64,
    pub side: AuditSide,
    /// `d_hi`, or `3 d_lo` on the lower side.
    pub value: u64,
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainmentFailure {
    pub radius: u64,
    pub side: AuditSide,
    pub model: String,
    pub z: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub pieces: u64,
    pub slices: u64,
    pub upper_violations: u64,
    pub lower_violations: u64,
    pub first_violation: Option<AuditViolation>,
    pub radii_checked: u64,
    pub containment_failures: u64,
    pub first_containment_failure: Option<ContainmentFailure>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.upper_violations == 0 && self.lower_violations == 0 && self.containment_failures == 0
    }
}

/// Distance bounds to a piece's marked point: `d_hi` from junction caps,
/// `d_lo3` three times the depth floors crossed.
#[derive(Debug, Clone, Copy, Default)]
struct Bounds {
    d_hi: u64,
    d_lo3: u64,
}

/// Certifies `r/3 <= d(o, x) <= 3r` for every slice from accumulated jump
/// bounds, then the ball containment `z(R/3) <= vol <= z(3R)`.
pub fn metric_audit(c: &PlumbedComplex) -> Result<AuditReport, AssemblyError> {
    let sel = c.selection.as_ref().ok_or(AssemblyError::MissingSelection)?;
    let p = &c.catalog.params;
    let ell = p.ell as u64;
    let z = discrete_growth(c).z;
    let max_radius = (z.horizon() / 3) as u64;
    // volume by smallest certified-inside radius, and by largest possibly-inside radius
    let mut inner = vec![0u128; max_radius as usize + 2];
    let mut outer = vec![0u128; max_radius as usize + 2];
    let mut report = AuditReport {
        pieces: 0,
        slices: 0,
        upper_violations: 0,
        lower_violations: 0,
        first_violation: None,
        radii_checked: max_radius,
        containment_failures: 0,
        first_containment_failure: None,
    };

    let mut state = vec![Bounds::default()];
    for (n, layer) in c.tree.levels().iter().enumerate() {
        for (i, &b) in state.iter().enumerate() {
            let kind = c.kind_at(n, i);
            let q_start = if i == 0 { c.q_start(n) } else { None };
            if q_start.is_some_and(|s| s != n) {
                continue;
            }
            let start = q_start.unwrap_or(n) as u64 * ell;
            let width = match kind {
                _ if n == 0 => 0,
                PieceKind::Q(m) => p.d[m],
                _ => ell,
            };
            let profile = c.catalog.profile(kind).expect("assembled complexes have every profile");
            report.pieces += 1;
            for (k, &vol) in profile.slice_volumes.iter().enumerate() {
                let k = k as u64;
                let r = start + k;
                let hi = b.d_hi + width + k + 1;
                let lo3 = b.d_lo3 + 3 * k;
                report.slices += 1;
                let mut flag = |side, value, bound| {
                    match side {
                        AuditSide::Upper => report.upper_violations += 1,
                        AuditSide::Lower => report.lower_violations += 1,
                    }
                    report.first_violation.get_or_insert(AuditViolation {
                        level: n,
                        index: i,
                        kind,
                        r,
                        side,
                        value,
                        bound,
                    });
                };
                if hi > 3 * r.max(1) {
                    flag(AuditSide::Upper, hi, 3 * r.max(1));
                }
                if lo3 < r {
                    flag(AuditSide::Lower, lo3, r);
                }
                let inside = hi.min(max_radius + 1) as usize;
                inner[inside] += vol as u128;
                let maybe = lo3.div_ceil(3).min(max_radius + 1) as usize;
                outer[maybe] += vol as u128;
            }
        }

        // bounds for the next level
        if n + 1 < c.tree.levels().len() {
            let mut next = vec![Bounds::default(); c.tree.level(n + 1).len()];
            for (i, v) in layer.iter().enumerate() {
                let b = state[i];
                for ch in v.first_child as usize..v.first_child as usize + v.children as usize {
                    let trunk_child = i == 0 && ch == 0;
                    next[ch] = match (i, c.trunk_kinds()[n]) {
                        (0, PieceKind::Q(j)) => {
                            let s = sel.n[j] as usize;
                            if trunk_child && (n + 1) < s + sel.t[j] as usize {
                                b
                            } else {
                                Bounds {
                                    d_hi: b.d_hi + ell * sel.t[j],
                                    d_lo3: b.d_lo3 + ell * (n + 1 - s) as u64,
                                }
                            }
                        }
                        (0, PieceKind::R(j)) if !trunk_child => Bounds {
                            d_hi: b.d_hi + p.d[j],
                            d_lo3: b.d_lo3 + ell,
                        },
                        _ => Bounds {
                            d_hi: b.d_hi + ell,
                            d_lo3: b.d_lo3 + ell,
                        },
                    };
                }
            }
            state = next;
        }
    }

    let (mut vin, mut vout) = (0u128, 0u128);
    for radius in 0..=max_radius {
        vin += inner[radius as usize];
        vout += outer[radius as usize];
        if radius == 0 {
            continue;
        }
        let checks = [
            (AuditSide::Lower, vin, z.at((radius / 3) as usize), true),
            (AuditSide::Upper, vout, z.at((3 * radius) as usize), false),
        ];
        for (side, model, bound, at_least) in checks {
            let model_big = BigUint::from(model);
            let ok = if at_least { &model_big >= bound } else { &model_big <= bound };
            if !ok {
                report.containment_failures += 1;
                report.first_containment_failure.get_or_insert(ContainmentFailure {
                    radius,
                    side,
                    model: model.to_string(),
                    z: bound.to_string(),
                });
            }
        }
    }
    Ok(report)
}
