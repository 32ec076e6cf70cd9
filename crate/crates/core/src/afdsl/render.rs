use super::{BinOp, Expr, Program};
use std::fmt::Write;

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => ADD,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => MUL,
        Expr::Neg(_) => NEG,
        Expr::Binary(BinOp::Pow, ..) => POW,
        _ => ATOM,
    }
}

pub(super) fn program(p: &Program) -> String {
    let mut out = String::new();
    for (name, e) in &p.lets {
        let _ = write!(out, "let {name} = ");
        expr(e, &mut out);
        out.push_str(" in\n");
    }
    out.push_str(p.reduce.name());
    out.push('(');
    expr(&p.body, &mut out);
    out.push(')');
    out
}

fn wrapped(e: &Expr, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        expr(e, out);
        out.push(')');
    } else {
        expr(e, out);
    }
}

pub(super) fn expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Var(v) => out.push_str(v.name()),
        Expr::Lit(v) => {
            let _ = write!(out, "{v:?}");
        }
        Expr::Ident(name) => out.push_str(name),
        Expr::Neg(inner) => {
            out.push('-');
            wrapped(inner, prec(inner) < NEG, out);
        }
        Expr::Binary(BinOp::Pow, a, b) => {
            wrapped(a, prec(a) < ATOM, out);
            out.push('^');
            wrapped(b, prec(b) < NEG, out);
        }
        Expr::Binary(op, a, b) => {
            let p = prec(e);
            wrapped(a, prec(a) < p, out);
            match op {
                BinOp::Div => out.push('/'),
                _ => {
                    out.push(' ');
                    out.push_str(op.symbol());
                    out.push(' ');
                }
            }
            wrapped(b, prec(b) <= p, out);
        }
        Expr::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(a, out);
            }
            out.push(')');
        }
    }
}
