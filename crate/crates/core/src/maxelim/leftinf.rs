//! Left-infinite projections: the value an expression settles into as the
//! bound variable tends to −∞.

use super::simple::{view, Lit};
use super::MaxElimError;
use crate::expr::{lcm, BoolExpr, CmpOp, PermExpr};

/// Projection of a simple boolean expression over `x`.
///
/// The result mentions `x` only in divisibility literals and agrees with
/// `b` at every sufficiently small `x`; `delta` is the lcm of their moduli.
pub fn leftinf_bool(b: &BoolExpr, x: &str) -> Result<(BoolExpr, i64), MaxElimError> {
    match b {
        BoolExpr::And(v) | BoolExpr::Or(v) => {
            let mut delta = 1;
            let mut parts = Vec::with_capacity(v.len());
            for c in v {
                let (c, d) = leftinf_bool(c, x)?;
                delta = lcm(delta, d);
                parts.push(c);
            }
            let b = if matches!(b, BoolExpr::And(_)) { BoolExpr::And(parts) } else { BoolExpr::Or(parts) };
            Ok((b, delta))
        }
        _ => Ok(match view(b, x)? {
            Lit::Free => (b.clone(), 1),
            Lit::Div(n) => (b.clone(), n),
            Lit::Cmp(op, _) => match op {
                CmpOp::Eq | CmpOp::Ge | CmpOp::Gt => (BoolExpr::False, 1),
                CmpOp::Ne | CmpOp::Le | CmpOp::Lt => (BoolExpr::True, 1),
            },
        }),
    }
}

/// Projection of a simple permission expression over `x`.
pub fn leftinf_perm(p: &PermExpr, x: &str) -> Result<(PermExpr, i64), MaxElimError> {
    let pair = |a: &PermExpr, b: &PermExpr| -> Result<_, MaxElimError> {
        let ((a, da), (b, db)) = (leftinf_perm(a, x)?, leftinf_perm(b, x)?);
        Ok((a, b, lcm(da, db)))
    };
    Ok(match p {
        PermExpr::Frac(_) | PermExpr::Rd => (p.clone(), 1),
        PermExpr::Add(a, b) => {
            let (a, b, d) = pair(a, b)?;
            (a + b, d)
        }
        PermExpr::Sub(a, b) => {
            let (a, b, d) = pair(a, b)?;
            (a - b, d)
        }
        PermExpr::Min(a, b) => {
            let (a, b, d) = pair(a, b)?;
            (PermExpr::min(a, b), d)
        }
        PermExpr::Max(a, b) => {
            let (a, b, d) = pair(a, b)?;
            (PermExpr::max(a, b), d)
        }
        PermExpr::Ite(c, a, b) => {
            let (c, dc) = leftinf_bool(c, x)?;
            let (a, b, d) = pair(a, b)?;
            (PermExpr::ite(c, a, b), lcm(dc, d))
        }
        PermExpr::PointwiseMax(..) => return Err(MaxElimError::Nested(p.to_string())),
    })
}
