//! Retyping: `A ⋊ B @ T` (forwarding) and `A ⋉ B @ T` (cut).

use super::{fresh_ident, Conn, HypSet, Obligation, Pred, SessionType, TExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RetypeError {
    #[error("connective mismatch: `{0}` against `{1}`")]
    Mismatch(String, String),
    #[error("retyping obligation fails: {0}")]
    Entail(Obligation),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    Fwd,
    Cut,
}

/// `A ⋊ B @ T`: a client holding `A` may forward it as a provider of `B`.
/// Returns every obligation discharged along the way.
pub fn retype_fwd(h: &HypSet, a: &SessionType, b: &SessionType, t: &TExpr) -> Result<Vec<Obligation>, RetypeError> {
    let mut out = Vec::new();
    retype(Dir::Fwd, h, a, b, t, &mut out)?;
    Ok(out)
}

/// `A ⋉ B @ T`: a provider of `A` may be used by a client expecting `B`.
pub fn retype_cut(h: &HypSet, a: &SessionType, b: &SessionType, t: &TExpr) -> Result<Vec<Obligation>, RetypeError> {
    let mut out = Vec::new();
    retype(Dir::Cut, h, a, b, t, &mut out)?;
    Ok(out)
}

fn conn_of(a: &SessionType) -> Option<Conn> {
    match a {
        SessionType::One(_) => None,
        SessionType::Bin(c, ..) => Some(*c),
    }
}

fn retype(
    dir: Dir,
    h: &HypSet,
    a: &SessionType,
    b: &SessionType,
    t: &TExpr,
    out: &mut Vec<Obligation>,
) -> Result<(), RetypeError> {
    if conn_of(a) != conn_of(b) {
        return Err(RetypeError::Mismatch(a.to_string(), b.to_string()));
    }
    let mut avoid = h.gvars.clone();
    avoid.extend(a.all_vars());
    avoid.extend(b.all_vars());
    avoid.extend(t.var.iter().cloned());
    for p in &h.hyps {
        avoid.extend(p.vars());
    }
    let v = fresh_ident(&a.tpred().binder, &avoid);
    let ve = TExpr::var(&v);
    let (a, b) = (a.with_binder(&v), b.with_binder(&v));
    let (p, q) = (a.tpred().pred.clone(), b.tpred().pred.clone());
    let inner = match dir {
        Dir::Fwd => h.with_var(&v).with_hyp(q),
        Dir::Cut => h.with_var(&v).with_hyp(Pred::le(t.clone(), ve.clone())).with_hyp(q),
    };
    let mut goals = vec![p];
    if dir == Dir::Fwd {
        goals.push(Pred::le(t.clone(), ve.clone()));
    }
    for g in goals {
        let ob = Obligation::new(&inner, g);
        if !ob.holds() {
            return Err(RetypeError::Entail(ob));
        }
        out.push(ob);
    }
    if let (SessionType::Bin(c, a1, a2, _), SessionType::Bin(_, b1, b2, _)) = (&a, &b) {
        match c {
            Conn::Lolli => retype(dir, &inner, b1, a1, &ve, out)?,
            _ => retype(dir, &inner, a1, b1, &ve, out)?,
        }
        retype(dir, &inner, a2, b2, &ve, out)?;
    }
    Ok(())
}
