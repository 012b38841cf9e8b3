//! Minimal-parenthesis printer; output reparses to an equal AST.

use super::syntax::{Formula, FormulaKind, Term};

// binding strength; quantifiers are prefix and only need parens when
// something follows them
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;

pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    go(f, 0, true, &mut out);
    out
}

fn go(f: &Formula, min_prec: u8, open_right: bool, out: &mut String) {
    match &f.kind {
        FormulaKind::True => out.push_str("true"),
        FormulaKind::False => out.push_str("false"),
        FormulaKind::Rel(r, args) => {
            out.push_str(r);
            if !args.is_empty() {
                out.push('(');
                push_terms(args, out);
                out.push(')');
            }
        }
        FormulaKind::Eq(a, b) => {
            out.push_str(&a.to_string());
            out.push_str(" = ");
            out.push_str(&b.to_string());
        }
        FormulaKind::Not(inner) => {
            out.push_str("not ");
            go(inner, NOT, open_right, out);
        }
        FormulaKind::And(a, b) => binary(a, b, " and ", AND, (AND, NOT), min_prec, open_right, out),
        FormulaKind::Or(a, b) => binary(a, b, " or ", OR, (OR, AND), min_prec, open_right, out),
        FormulaKind::Implies(a, b) => {
            binary(a, b, " => ", IMPLIES, (OR, IMPLIES), min_prec, open_right, out)
        }
        FormulaKind::Exists(x, s, body) | FormulaKind::Forall(x, s, body) => {
            let kw = if matches!(f.kind, FormulaKind::Exists(..)) { "exists" } else { "forall" };
            if !open_right {
                out.push('(');
            }
            out.push_str(kw);
            out.push(' ');
            out.push_str(x);
            out.push(':');
            out.push_str(s);
            out.push_str(". ");
            go(body, 0, true, out);
            if !open_right {
                out.push(')');
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn binary(
    a: &Formula,
    b: &Formula,
    op: &str,
    prec: u8,
    (left_min, right_min): (u8, u8),
    min_prec: u8,
    open_right: bool,
    out: &mut String,
) {
    let wrap = prec < min_prec;
    if wrap {
        out.push('(');
    }
    go(a, left_min, false, out);
    out.push_str(op);
    go(b, right_min, wrap || open_right, out);
    if wrap {
        out.push(')');
    }
}

fn push_terms(args: &[Term], out: &mut String) {
    for (i, t) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&t.to_string());
    }
}
