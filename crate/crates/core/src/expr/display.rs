//! Canonical concrete syntax, accepted back by the frontend parser.

use super::{BoolExpr, IntExpr, PermExpr};
use num_traits::One;
use std::fmt::{self, Display, Formatter};

fn int_prec(e: &IntExpr) -> u8 {
    match e {
        IntExpr::Add(..) | IntExpr::Sub(..) => 1,
        IntExpr::Mul(..) | IntExpr::FloorDiv(..) => 2,
        IntExpr::Const(n) if *n < 0 => 2,
        _ => 3,
    }
}

fn write_int(f: &mut Formatter<'_>, e: &IntExpr, min: u8) -> fmt::Result {
    if int_prec(e) < min {
        write!(f, "(")?;
        write_int(f, e, 0)?;
        return write!(f, ")");
    }
    match e {
        IntExpr::Const(n) => write!(f, "{n}"),
        IntExpr::Var(x) => write!(f, "{x}"),
        IntExpr::Mul(n, e) => {
            write!(f, "{n}*")?;
            write_int(f, e, 3)
        }
        IntExpr::Add(a, b) => {
            write_int(f, a, 1)?;
            write!(f, " + ")?;
            write_int(f, b, 2)
        }
        IntExpr::Sub(a, b) => {
            write_int(f, a, 1)?;
            write!(f, " - ")?;
            write_int(f, b, 2)
        }
        IntExpr::Lookup(a, i) => {
            write!(f, "{a}[")?;
            write_int(f, i, 0)?;
            write!(f, "]")
        }
        IntExpr::Length(a) => write!(f, "length({a})"),
        IntExpr::Ite(c, a, b) => write!(f, "ite({c}, {a}, {b})"),
        IntExpr::FloorDiv(e, n) => {
            write_int(f, e, 3)?;
            write!(f, " / {n}")
        }
    }
}

impl Display for IntExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_int(f, self, 0)
    }
}

fn bool_prec(b: &BoolExpr) -> u8 {
    match b {
        BoolExpr::Or(v) if v.len() > 1 => 1,
        BoolExpr::And(v) if v.len() > 1 => 2,
        BoolExpr::Cmp(..)
        | BoolExpr::Divides(..)
        | BoolExpr::NotDivides(..)
        | BoolExpr::ArrEq(..)
        | BoolExpr::PermCmp(..) => 3,
        _ => 4,
    }
}

fn write_bool(f: &mut Formatter<'_>, b: &BoolExpr, min: u8) -> fmt::Result {
    if bool_prec(b) < min {
        write!(f, "(")?;
        write_bool(f, b, 0)?;
        return write!(f, ")");
    }
    match b {
        BoolExpr::True => write!(f, "true"),
        BoolExpr::False => write!(f, "false"),
        BoolExpr::Cmp(a, op, c) => {
            write_int(f, a, 0)?;
            write!(f, " {} ", op.symbol())?;
            write_int(f, c, 0)
        }
        BoolExpr::Divides(n, e) => {
            write_int(f, e, 3)?;
            write!(f, " % {n} == 0")
        }
        BoolExpr::NotDivides(n, e) => {
            write_int(f, e, 3)?;
            write!(f, " % {n} != 0")
        }
        BoolExpr::ArrEq(a, c) => write!(f, "{a} == {c}"),
        BoolExpr::And(v) | BoolExpr::Or(v) if v.is_empty() => {
            write!(f, "{}", if matches!(b, BoolExpr::And(_)) { "true" } else { "false" })
        }
        BoolExpr::And(v) | BoolExpr::Or(v) if v.len() == 1 => write_bool(f, &v[0], min),
        BoolExpr::And(v) => {
            for (i, c) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, " && ")?;
                }
                write_bool(f, c, 3)?;
            }
            Ok(())
        }
        BoolExpr::Or(v) => {
            for (i, c) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, " || ")?;
                }
                write_bool(f, c, 2)?;
            }
            Ok(())
        }
        BoolExpr::Not(c) => {
            write!(f, "!(")?;
            write_bool(f, c, 0)?;
            write!(f, ")")
        }
        BoolExpr::PermCmp(p, op, q) => write!(f, "{p} {} {q}", op.symbol()),
    }
}

impl Display for BoolExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_bool(f, self, 0)
    }
}

fn perm_prec(p: &PermExpr) -> u8 {
    match p {
        PermExpr::Add(..) | PermExpr::Sub(..) => 1,
        _ => 2,
    }
}

fn write_perm(f: &mut Formatter<'_>, p: &PermExpr, min: u8) -> fmt::Result {
    if perm_prec(p) < min {
        write!(f, "(")?;
        write_perm(f, p, 0)?;
        return write!(f, ")");
    }
    match p {
        PermExpr::Frac(q) => {
            if q.denom().is_one() {
                write!(f, "{}", q.numer())
            } else {
                write!(f, "{}/{}", q.numer(), q.denom())
            }
        }
        PermExpr::Rd => write!(f, "rd"),
        PermExpr::Add(a, b) => {
            write_perm(f, a, 1)?;
            write!(f, " + ")?;
            write_perm(f, b, 2)
        }
        PermExpr::Sub(a, b) => {
            write_perm(f, a, 1)?;
            write!(f, " - ")?;
            write_perm(f, b, 2)
        }
        PermExpr::Min(a, b) => write!(f, "min({a}, {b})"),
        PermExpr::Max(a, b) => write!(f, "max({a}, {b})"),
        PermExpr::Ite(c, a, b) => write!(f, "ite({c}, {a}, {b})"),
        PermExpr::PointwiseMax(vars, g, b) => {
            write!(f, "max_{{{} | {g}}}({b})", vars.join(", "))
        }
    }
}

impl Display for PermExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_perm(f, self, 0)
    }
}
