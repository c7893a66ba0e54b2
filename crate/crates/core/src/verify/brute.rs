//! Exhaustive enumeration of structural selections.

use crate::catalog::ProblemInstance;
use crate::expansion::Candidates;
use crate::model::{structural_vars, VarId};
use crate::num::Rational;

use super::{is_feasible, selection_cost, Selection};

/// Largest number of structural variables [`brute_force`] accepts.
pub const MAX_BRUTE_FORCE_VARS: usize = 24;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BruteForceError {
    #[error("instance has {vars} structural variables, brute force accepts at most {limit}")]
    TooLarge { vars: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    /// Minimum objective; None when nothing is feasible.
    pub objective: Option<Rational>,
    /// Every selection attaining the minimum, in enumeration order.
    pub optimal: Vec<Selection>,
}

/// For each variable, the variables it cannot be selected without: tasks
/// run on selected devices, connections join selected devices, routes use
/// selected connections for active links.
fn prerequisites(vars: &[VarId], cands: &Candidates) -> Vec<u32> {
    let pos = |id: VarId| vars.iter().position(|v| *v == id).map_or(0, |i| 1u32 << i);
    vars.iter()
        .map(|id| match *id {
            VarId::Assign { device, .. } => pos(VarId::Dev(device)),
            VarId::Cnx(k) => pos(VarId::Dev(cands.connections[k].a)) | pos(VarId::Dev(cands.connections[k].b)),
            VarId::Route { cnx, link } => pos(VarId::Cnx(cnx)) | pos(VarId::Link(link)),
            _ => 0,
        })
        .collect()
}

struct Best {
    cost: Option<Rational>,
    masks: Vec<u32>,
}

impl Best {
    fn offer(&mut self, cost: Rational, mask: u32) {
        match &self.cost {
            Some(c) if cost > *c => {}
            Some(c) if cost == *c => self.masks.push(mask),
            _ => {
                self.cost = Some(cost);
                self.masks = vec![mask];
            }
        }
    }

    #[cfg(feature = "parallel")]
    fn merge(mut self, other: Best) -> Best {
        if let Some(c) = other.cost {
            match &self.cost {
                Some(mine) if c > *mine => {}
                Some(mine) if c == *mine => self.masks.extend(other.masks),
                _ => return Best { cost: Some(c), masks: other.masks },
            }
        }
        self
    }
}

fn selection(inst: &ProblemInstance, cands: &Candidates, vars: &[VarId], mask: u32) -> Selection {
    let mut sel = Selection::empty(inst, cands);
    for (i, id) in vars.iter().enumerate() {
        if mask >> i & 1 == 1 {
            sel.set(id, true);
        }
    }
    sel
}

fn scan(
    inst: &ProblemInstance,
    cands: &Candidates,
    vars: &[VarId],
    needs: &[u32],
    masks: std::ops::Range<u64>,
    eps: &Rational,
) -> Best {
    let mut best = Best { cost: None, masks: Vec::new() };
    for mask in masks {
        let mask = mask as u32;
        if needs.iter().enumerate().any(|(i, n)| mask >> i & 1 == 1 && mask & n != *n) {
            continue;
        }
        let sel = selection(inst, cands, vars, mask);
        if is_feasible(inst, cands, &sel) {
            best.offer(selection_cost(inst, cands, &sel, eps), mask);
        }
    }
    best
}

/// Enumerates every selection of the structural variables and keeps the
/// feasible ones of least cost.
pub fn brute_force(
    inst: &ProblemInstance,
    cands: &Candidates,
    cnx_epsilon: &Rational,
) -> Result<BruteForce, BruteForceError> {
    let vars = structural_vars(inst, cands);
    if vars.len() > MAX_BRUTE_FORCE_VARS {
        return Err(BruteForceError::TooLarge {
            vars: vars.len(),
            limit: MAX_BRUTE_FORCE_VARS,
        });
    }
    let needs = prerequisites(&vars, cands);
    let total = 1u64 << vars.len();

    #[cfg(feature = "parallel")]
    let best = {
        use rayon::prelude::*;
        const CHUNK: u64 = 1 << 12;
        (0..total.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| scan(inst, cands, &vars, &needs, c * CHUNK..((c + 1) * CHUNK).min(total), cnx_epsilon))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Best { cost: None, masks: Vec::new() }, Best::merge)
    };
    #[cfg(not(feature = "parallel"))]
    let best = scan(inst, cands, &vars, &needs, 0..total, cnx_epsilon);

    Ok(BruteForce {
        objective: best.cost,
        optimal: best.masks.into_iter().map(|m| selection(inst, cands, &vars, m)).collect(),
    })
}
