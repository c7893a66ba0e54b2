//! LP and fixed-column MPS text exchange formats.

use std::fmt::Write;

use super::{Program, Relation};
use crate::num::Rational;

const TERMS_PER_LINE: usize = 6;

fn lp_terms(out: &mut String, terms: &[(usize, Rational)], names: &[String]) {
    for (i, (v, c)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c.is_negative() { "-" } else { "+" };
        let mag = if c.is_negative() { -c.clone() } else { c.clone() };
        if i == 0 && !c.is_negative() {
            let _ = write!(out, " {} {}", mag.to_decimal_string(), names[*v]);
        } else {
            let _ = write!(out, " {sign} {} {}", mag.to_decimal_string(), names[*v]);
        }
    }
}

/// The program in LP format. Row names carry their constraint family.
/// Coefficients are exact decimals where the value terminates and rounded to
/// 17 significant digits otherwise.
pub fn export_lp(prog: &Program) -> String {
    let mut out = String::new();
    out.push_str("\\ robosynth system synthesis program\n");
    let _ = writeln!(
        out,
        "\\ {} variables, {} constraints",
        prog.vars.len(),
        prog.constraints.len()
    );
    out.push_str("Minimize\n obj:");
    lp_terms(&mut out, &prog.objective, &prog.names);
    out.push_str("\nSubject To\n");
    for (i, c) in prog.constraints.iter().enumerate() {
        let _ = write!(out, " r{}_{}:", i, c.family.as_str());
        if c.terms.is_empty() {
            match prog.names.first() {
                // An empty row is unsatisfiable; keep it expressible.
                Some(name) => {
                    let _ = write!(out, " 0 {name}");
                }
                None => out.push_str(" 0"),
            }
        } else {
            lp_terms(&mut out, &c.terms, &prog.names);
        }
        let _ = writeln!(out, " {} {}", c.relation.symbol(), c.rhs.to_decimal_string());
    }
    out.push_str("Binaries\n");
    for chunk in prog.names.chunks(TERMS_PER_LINE * 2) {
        let _ = writeln!(out, " {}", chunk.join(" "));
    }
    out.push_str("End\n");
    out
}

/// Fits a number into the 12-character MPS value field.
fn mps_number(r: &Rational) -> String {
    let exact = r.to_decimal_string();
    if exact.len() <= 12 {
        return exact;
    }
    let x = r.to_f64();
    for prec in (1..=10).rev() {
        let s = format!("{x:.prec$e}");
        if s.len() <= 12 {
            return s;
        }
    }
    format!("{x:.0e}")
}

fn mps_col(i: usize) -> String {
    format!("C{:07}", i + 1)
}

fn mps_row(i: usize) -> String {
    format!("R{:07}", i + 1)
}

fn field_line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str) {
    let _ = writeln!(out, " {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}");
}

/// The program in fixed-column MPS. Names are positional (`C0000001`,
/// `R0000001`); a comment header maps them to the LP names.
pub fn export_mps(prog: &Program) -> String {
    let mut out = String::new();
    out.push_str("* robosynth system synthesis program\n");
    for (i, name) in prog.names.iter().enumerate() {
        let _ = writeln!(out, "* {} {}", mps_col(i), name);
    }
    for (i, c) in prog.constraints.iter().enumerate() {
        let _ = writeln!(out, "* {} {}", mps_row(i), c.family.as_str());
    }
    out.push_str("NAME          ROBOSYNTH\nROWS\n N  OBJ\n");
    for (i, c) in prog.constraints.iter().enumerate() {
        let kind = match c.relation {
            Relation::Le => "L",
            Relation::Eq => "E",
            Relation::Ge => "G",
        };
        let _ = writeln!(out, " {kind}  {}", mps_row(i));
    }

    let mut column: Vec<Vec<(String, &Rational)>> = vec![Vec::new(); prog.vars.len()];
    for (v, c) in &prog.objective {
        column[*v].push(("OBJ".to_string(), c));
    }
    for (i, row) in prog.constraints.iter().enumerate() {
        for (v, c) in &row.terms {
            column[*v].push((mps_row(i), c));
        }
    }
    out.push_str("COLUMNS\n");
    out.push_str("    MARKER                 'MARKER'                 'INTORG'\n");
    for (v, entries) in column.iter().enumerate() {
        if entries.is_empty() {
            // Columns need at least one entry to be declared.
            field_line(&mut out, "", &mps_col(v), "OBJ", "0");
        }
        for (row, c) in entries {
            field_line(&mut out, "", &mps_col(v), row, &mps_number(c));
        }
    }
    out.push_str("    MARKER                 'MARKER'                 'INTEND'\n");
    out.push_str("RHS\n");
    for (i, row) in prog.constraints.iter().enumerate() {
        if !row.rhs.is_zero() {
            field_line(&mut out, "", "RHS", &mps_row(i), &mps_number(&row.rhs));
        }
    }
    out.push_str("BOUNDS\n");
    for v in 0..prog.vars.len() {
        let _ = writeln!(out, " BV BND       {}", mps_col(v));
    }
    out.push_str("ENDATA\n");
    out
}
