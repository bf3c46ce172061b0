//! Reference inhabitants of closed session types.
//!
//! A `Canon` object provides its type on its own channel, acting at any
//! instant the type's predicate allows, and consumes every channel it
//! has received the same way. Choices are left open, so the scheduler's
//! canonical order resolves them.

use crate::lts::{Action, AtomicProc, Channel, Configuration, NamelessObj, Payload, ProcessLanguage, Sel, StepAux};
use crate::time::FinTime;
use crate::types::{Conn, SessionType, TExpr, TPred};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Canon {
    pub since: FinTime,
    pub give: SessionType,
    /// Received channels still to be consumed, with their types.
    pub owe: Vec<(Channel, SessionType)>,
}

impl Canon {
    pub fn new(since: FinTime, give: SessionType) -> Self {
        Canon { since, give, owe: vec![] }
    }

    fn with(&self, since: FinTime, give: SessionType, mut owe: Vec<(Channel, SessionType)>) -> Canon {
        owe.sort();
        Canon { since, give, owe }
    }

    fn without(&self, i: usize) -> Vec<(Channel, SessionType)> {
        let mut o = self.owe.clone();
        o.remove(i);
        o
    }
}

pub fn canon_obj(c: Canon) -> NamelessObj {
    NamelessObj::new::<CanonLang>(c)
}

/// A reference provider of the closed type `a` from time `since` on.
pub fn canon_provider(since: FinTime, a: &SessionType) -> NamelessObj {
    canon_obj(Canon::new(since, a.clone()))
}

pub fn parse_canon(src: &str) -> Result<NamelessObj, String> {
    let (since, give, owe) = crate::syntax::parse_canon_parts(src).map_err(|e| e.to_string())?;
    Ok(canon_obj(Canon { since, give, owe }))
}

impl fmt::Display for Canon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}} give {}", self.since, self.give)?;
        for (c, b) in &self.owe {
            write!(f, "; owe '{c} : {b}")?;
        }
        Ok(())
    }
}

fn guard(tp: &TPred, t: FinTime) -> bool {
    tp.pred.holds_at(&tp.binder, t) == Some(true)
}

fn parts(a: &SessionType, t: FinTime) -> (SessionType, SessionType) {
    a.parts_at(&TExpr::lit(t)).expect("binary type")
}

pub struct CanonLang;

impl ProcessLanguage for CanonLang {
    type Term = Canon;
    const ID: &'static str = "canon";

    fn render(c: &Canon) -> String {
        c.to_string()
    }

    fn step(c: &Canon, a: &Channel, time: FinTime, aux: &StepAux) -> Vec<(Action, Configuration)> {
        let mut out = vec![];
        if time < c.since {
            return out;
        }
        let me = |k: Canon| AtomicProc::Proc(a.clone(), canon_obj(k));
        let one = |k: Canon| Configuration::singleton(me(k));
        let sels = [Sel::P1, Sel::P2];

        if guard(c.give.tpred(), time) {
            match &c.give {
                SessionType::One(_) if c.owe.is_empty() => out.push((Action::send(a, Payload::Close), Configuration::empty())),
                SessionType::One(_) => {}
                SessionType::Bin(conn, ..) => {
                    let (a1, a2) = parts(&c.give, time);
                    match conn {
                        Conn::Tensor => {
                            let d = &aux.fresh;
                            let cfg = Configuration::from_vec(vec![
                                AtomicProc::Proc(d.clone(), canon_provider(time, &a1)),
                                me(c.with(time, a2, c.owe.clone())),
                            ]);
                            out.push((Action::send(a, Payload::Chan(d.clone())), cfg));
                        }
                        Conn::Lolli => {
                            for d in &aux.payloads {
                                let mut owe = c.owe.clone();
                                owe.push((d.clone(), a1.clone()));
                                out.push((Action::recv(a, Payload::Chan(d.clone())), one(c.with(time, a2.clone(), owe))));
                            }
                        }
                        Conn::With | Conn::Plus => {
                            for (s, ai) in sels.iter().zip([a1, a2]) {
                                let act = if *conn == Conn::With {
                                    Action::recv(a, Payload::Sel(*s))
                                } else {
                                    Action::send(a, Payload::Sel(*s))
                                };
                                out.push((act, one(c.with(time, ai, c.owe.clone()))));
                            }
                        }
                    }
                }
            }
        }

        for (i, (ch, b)) in c.owe.iter().enumerate() {
            if !guard(b.tpred(), time) {
                continue;
            }
            let rest = c.without(i);
            match b {
                SessionType::One(_) => {
                    out.push((Action::recv(ch, Payload::Close), one(c.with(time, c.give.clone(), rest))));
                }
                SessionType::Bin(conn, ..) => {
                    let (b1, b2) = parts(b, time);
                    let cont = |extra: Vec<(Channel, SessionType)>| {
                        let mut owe = rest.clone();
                        owe.extend(extra);
                        c.with(time, c.give.clone(), owe)
                    };
                    match conn {
                        Conn::Tensor => {
                            for d in &aux.payloads {
                                let k = cont(vec![(d.clone(), b1.clone()), (ch.clone(), b2.clone())]);
                                out.push((Action::recv(ch, Payload::Chan(d.clone())), one(k)));
                            }
                        }
                        Conn::Lolli => {
                            let d = &aux.fresh;
                            let cfg = Configuration::from_vec(vec![
                                AtomicProc::Proc(d.clone(), canon_provider(time, &b1)),
                                me(cont(vec![(ch.clone(), b2.clone())])),
                            ]);
                            out.push((Action::send(ch, Payload::Chan(d.clone())), cfg));
                        }
                        Conn::With | Conn::Plus => {
                            for (s, bi) in sels.iter().zip([b1.clone(), b2.clone()]) {
                                let act = if *conn == Conn::With {
                                    Action::send(ch, Payload::Sel(*s))
                                } else {
                                    Action::recv(ch, Payload::Sel(*s))
                                };
                                out.push((act, one(cont(vec![(ch.clone(), bi)]))));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn channels(c: &Canon) -> BTreeSet<Channel> {
        c.owe.iter().map(|(ch, _)| ch.clone()).collect()
    }

    fn rename(c: &Canon, from: &Channel, to: &Channel) -> Canon {
        let owe = c.owe.iter().map(|(ch, b)| (if ch == from { to.clone() } else { ch.clone() }, b.clone())).collect();
        c.with(c.since, c.give.clone(), owe)
    }

    fn wake_times(c: &Canon) -> Vec<FinTime> {
        let mut ts: BTreeSet<FinTime> = c.give.tpred().onsets_from(c.since).into_iter().collect();
        for (_, b) in &c.owe {
            ts.extend(b.tpred().onsets_from(c.since));
        }
        ts.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_type;

    fn aux(payloads: &[&str]) -> StepAux {
        StepAux { fresh: Channel::fresh(9), payloads: payloads.iter().map(|s| Channel::new(s)).collect() }
    }

    #[test]
    fn unit_closes_only_when_done() {
        let a = Channel::new("a");
        let c = Canon::new(0, parse_type("1{t | 3 <= t}").unwrap());
        assert!(CanonLang::step(&c, &a, 2, &aux(&[])).is_empty());
        assert_eq!(CanonLang::step(&c, &a, 3, &aux(&[])).len(), 1);
        assert_eq!(CanonLang::wake_times(&c), vec![3]);
        let owing = Canon { owe: vec![(Channel::new("y"), parse_type("1{t | t == 5}").unwrap())], ..c };
        let rows = CanonLang::step(&owing, &a, 5, &aux(&[]));
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].0, Action::recv(&Channel::new("y"), Payload::Close));
    }

    #[test]
    fn lolli_provider_takes_on_the_input() {
        let a = Channel::new("a");
        let c = Canon::new(0, parse_type("1{s | s == t + 2} -o{t | t == 1} 1{s | s == t + 4}").unwrap());
        let rows = CanonLang::step(&c, &a, 1, &aux(&["q"]));
        assert_eq!(rows.len(), 1);
        let (_, cfg) = &rows[0];
        let (AtomicProc::Proc(_, o), _) = cfg.distinct().next().unwrap() else { panic!() };
        let k = o.downcast::<CanonLang>().unwrap();
        assert_eq!(k.owe[0].1.to_string(), "1{s | s == 3}");
        assert_eq!(CanonLang::wake_times(k), vec![3, 5]);
        assert_eq!(parse_canon(o.text()).unwrap(), o.clone());
    }
}
