//! Flow conservation encodings for routing links over connections.
//!
//! Every non-loop connection carries two arc variables per link, one per
//! direction, whose sum is the route variable. For a link `l` from task `s`
//! to task `t` and a device `d`, the net outflow of `l`'s arcs at `d` must
//! equal `x_l * (a_d - b_d)`, where `a_d` and `b_d` assign `s` and `t` to
//! `d`. The two encodings differ only in how the product with `x_l` is
//! linearised.

use super::{Builder, Dir, Family, Relation, VarId};
use crate::num::Rational;

/// Arc terms of the net outflow of link `l` at device `d`.
fn net_outflow(b: &Builder, l: usize, d: usize) -> Vec<(usize, Rational)> {
    let mut terms = Vec::new();
    for k in b.conns.iter().filter(|k| !k.is_loop && k.touches(d)) {
        let (out_dir, in_dir) = if k.a == d { (Dir::Fwd, Dir::Bwd) } else { (Dir::Bwd, Dir::Fwd) };
        terms.push((b.v(VarId::Arc { cnx: k.index, link: l, dir: out_dir }), Rational::one()));
        terms.push((b.v(VarId::Arc { cnx: k.index, link: l, dir: in_dir }), -Rational::one()));
    }
    terms
}

/// Route variable equals the sum of its two arcs.
fn arc_rows(b: &mut Builder) {
    for k in b.conns.iter().filter(|k| !k.is_loop) {
        for l in b.links {
            let r = b.route(k.index, l.index);
            let fwd = b.v(VarId::Arc { cnx: k.index, link: l.index, dir: Dir::Fwd });
            let bwd = b.v(VarId::Arc { cnx: k.index, link: l.index, dir: Dir::Bwd });
            b.prog.add_row(
                Family::Plumbing,
                vec![(r, Rational::one()), (fwd, -Rational::one()), (bwd, -Rational::one())],
                Relation::Eq,
                Rational::zero(),
            );
        }
    }
}

/// Directed encoding. With `n` the net outflow, the pair
/// `n - a + b - x >= -1` and `n - a + b + x <= 1` pins `n = a - b` when the
/// link is active; inactive links have all arcs at zero through their
/// route variables, and both rows are then slack.
pub(crate) fn directed_rows(b: &mut Builder) {
    arc_rows(b);
    for l in b.links {
        let lv = b.v(VarId::Link(l.index));
        for d in 0..b.inst.devices.len() {
            let mut base = net_outflow(b, l.index, d);
            if let Some(a) = b.assign(d, l.src_task) {
                base.push((a, -Rational::one()));
            }
            if let Some(t) = b.assign(d, l.dst_task) {
                base.push((t, Rational::one()));
            }
            if base.is_empty() {
                continue;
            }
            let mut lower = base.clone();
            lower.push((lv, -Rational::one()));
            b.prog.add_row(Family::ActiveFlows, lower, Relation::Ge, -Rational::one());
            let mut upper = base;
            upper.push((lv, Rational::one()));
            b.prog.add_row(Family::ActiveFlows, upper, Relation::Le, Rational::one());
        }
    }
}

/// Dummy encoding. A dummy per (link, endpoint assignment) absorbs the
/// assignment whenever the link is unused, `z = a * (1 - x)`, so that the
/// balance `n - (a - z_s) + (b - z_t) = 0` is a single linear equality.
pub(crate) fn dummy_rows(b: &mut Builder) {
    arc_rows(b);
    for l in b.links {
        let lv = b.v(VarId::Link(l.index));
        for task in [l.src_task, l.dst_task] {
            for &(d, a) in &b.assign_of_task[task].clone() {
                let z = b.v(VarId::Dummy { link: l.index, device: d, task });
                let one = Rational::one;
                b.prog.add_row(
                    Family::LinearActiveFlows,
                    vec![(z, one()), (a, -one())],
                    Relation::Le,
                    Rational::zero(),
                );
                b.prog.add_row(
                    Family::LinearActiveFlows,
                    vec![(z, one()), (lv, one())],
                    Relation::Le,
                    one(),
                );
                b.prog.add_row(
                    Family::LinearActiveFlows,
                    vec![(z, one()), (a, -one()), (lv, one())],
                    Relation::Ge,
                    Rational::zero(),
                );
            }
        }
        for d in 0..b.inst.devices.len() {
            let mut terms = net_outflow(b, l.index, d);
            if let Some(a) = b.assign(d, l.src_task) {
                let z = b.v(VarId::Dummy { link: l.index, device: d, task: l.src_task });
                terms.push((a, -Rational::one()));
                terms.push((z, Rational::one()));
            }
            if let Some(t) = b.assign(d, l.dst_task) {
                let z = b.v(VarId::Dummy { link: l.index, device: d, task: l.dst_task });
                terms.push((t, Rational::one()));
                terms.push((z, -Rational::one()));
            }
            if terms.is_empty() {
                continue;
            }
            b.prog.add_row(Family::LinearActiveFlows, terms, Relation::Eq, Rational::zero());
        }
    }
}
