//! Translation of a [`Program`] into integer `<=` rows for the search.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::scalar::{fits_fast, Scalar};
use super::BranchOrder;
use crate::model::{Family, Program, Relation, VarKind};
use crate::num::common_denominator;

pub(crate) struct Row<T> {
    pub terms: Vec<(usize, T)>,
    pub rhs: T,
    /// Largest coefficient magnitude; rows with more slack cannot propagate.
    pub maxabs: T,
    pub mission: bool,
}

/// A row whose negative-coefficient variables can be bought to cover it.
pub(crate) struct Cover<T> {
    pub row: usize,
    /// Costly covering variables with their coefficient magnitude, cheapest
    /// per unit of coverage first.
    pub costly: Vec<(usize, T)>,
    /// Covering variables that cost nothing.
    pub free: Vec<(usize, T)>,
}

pub(crate) struct Compiled<T> {
    pub n: usize,
    pub rows: Vec<Row<T>>,
    /// Per variable: (row, coefficient) occurrences.
    pub occ: Vec<Vec<(usize, T)>>,
    pub obj: Vec<T>,
    /// The program objective equals the integer objective over this scale.
    pub obj_scale: BigInt,
    pub covers: Vec<Cover<T>>,
    pub order: Vec<usize>,
    pub one_first: Vec<bool>,
    pub kind_of: Vec<VarKind>,
}

fn scaled(values: &[&BigRational], scale: &BigInt) -> Vec<BigInt> {
    values
        .iter()
        .map(|v| (*v * BigRational::from_integer(scale.clone())).to_integer())
        .collect()
}

/// Integer `<=` rows as big integers, with the objective, before choosing a
/// representation.
pub(crate) struct BigForm {
    rows: Vec<(Vec<(usize, BigInt)>, BigInt, bool)>,
    obj: Vec<BigInt>,
    obj_scale: BigInt,
}

impl BigForm {
    pub fn new(prog: &Program) -> Self {
        let mut rows = Vec::new();
        for c in &prog.constraints {
            let values: Vec<&BigRational> =
                c.terms.iter().map(|(_, r)| &r.0).chain(std::iter::once(&c.rhs.0)).collect();
            let scale = common_denominator(c.terms.iter().map(|(_, r)| r).chain(std::iter::once(&c.rhs)));
            let ints = scaled(&values, &scale);
            let (coefs, rhs) = ints.split_at(c.terms.len());
            let terms: Vec<(usize, BigInt)> =
                c.terms.iter().zip(coefs).map(|((v, _), a)| (*v, a.clone())).collect();
            let negated = || (terms.iter().map(|(v, a)| (*v, -a)).collect::<Vec<_>>(), -&rhs[0]);
            let mission = c.family == Family::Mission;
            match c.relation {
                Relation::Le => rows.push((terms.clone(), rhs[0].clone(), mission)),
                Relation::Ge => {
                    let (t, r) = negated();
                    rows.push((t, r, mission));
                }
                Relation::Eq => {
                    rows.push((terms.clone(), rhs[0].clone(), mission));
                    let (t, r) = negated();
                    rows.push((t, r, mission));
                }
            }
        }
        let obj_scale = common_denominator(prog.objective.iter().map(|(_, r)| r));
        let mut obj = vec![<BigInt as Zero>::zero(); prog.num_vars()];
        let values: Vec<&BigRational> = prog.objective.iter().map(|(_, r)| &r.0).collect();
        for ((v, _), c) in prog.objective.iter().zip(scaled(&values, &obj_scale)) {
            obj[*v] = c;
        }
        BigForm { rows, obj, obj_scale }
    }

    /// Whether every row and objective sum fits the `i128` path.
    pub fn fits_fast(&self) -> bool {
        let row_ok = self.rows.iter().all(|(terms, rhs, _)| {
            let total: BigInt = terms.iter().map(|(_, a)| Signed::abs(a)).sum::<BigInt>() + Signed::abs(rhs);
            fits_fast(&total)
        });
        let obj_total: BigInt = self.obj.iter().map(Signed::abs).sum();
        row_ok && fits_fast(&obj_total) && fits_fast(&self.obj_scale)
    }

    pub fn compile<T: Scalar>(&self, prog: &Program, order: &BranchOrder) -> Compiled<T> {
        let n = prog.num_vars();
        let rows: Vec<Row<T>> = self
            .rows
            .iter()
            .map(|(terms, rhs, mission)| {
                let terms: Vec<(usize, T)> = terms.iter().map(|(v, a)| (*v, T::from_big(a))).collect();
                let maxabs = terms.iter().map(|(_, a)| a.abs()).max().unwrap_or_else(T::zero);
                Row {
                    terms,
                    rhs: T::from_big(rhs),
                    maxabs,
                    mission: *mission,
                }
            })
            .collect();
        let mut occ = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for (v, a) in &row.terms {
                occ[*v].push((r, a.clone()));
            }
        }
        let obj: Vec<T> = self.obj.iter().map(T::from_big).collect();

        let mut covers = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            let mut costly: Vec<(usize, T)> = Vec::new();
            let mut free = Vec::new();
            for (v, a) in row.terms.iter().filter(|(_, a)| a.is_negative()) {
                if obj[*v].is_positive() {
                    costly.push((*v, a.neg()));
                } else {
                    free.push((*v, a.neg()));
                }
            }
            if costly.is_empty() {
                continue;
            }
            // Ascending c/a, compared as c_i * a_j < c_j * a_i.
            costly.sort_by(|(i, ai), (j, aj)| obj[*i].mul(aj).cmp(&obj[*j].mul(ai)).then(i.cmp(j)));
            covers.push(Cover {
                row: r,
                costly,
                free,
            });
        }

        let rank = |k: VarKind| order.kinds.iter().position(|o| *o == k).unwrap_or(order.kinds.len());
        let mut ord: Vec<usize> = (0..n).collect();
        ord.sort_by_key(|&v| (rank(prog.vars[v].kind()), v));
        let one_first = prog
            .vars
            .iter()
            .map(|id| matches!(id.kind(), VarKind::Dev | VarKind::Assign))
            .collect();

        Compiled {
            n,
            rows,
            occ,
            obj,
            obj_scale: if Zero::is_zero(&self.obj_scale) { BigInt::one() } else { self.obj_scale.clone() },
            covers,
            order: ord,
            one_first,
            kind_of: prog.vars.iter().map(|v| v.kind()).collect(),
        }
    }
}
