//! Object-level stepping of closed process terms.

use super::term::{Sym, Term};
use crate::lts::{Action, AtomicProc, Channel, Configuration, NamelessObj, Payload, ProcessLanguage, Sel, StepAux};
use crate::time::FinTime;
use crate::types::{TExpr, TPred};
use std::collections::BTreeSet;

pub struct TimedLang;

pub fn closed_obj(m: Term) -> NamelessObj {
    NamelessObj::new::<TimedLang>(m)
}

fn at_now(e: &TExpr, time: FinTime) -> bool {
    e.as_lit() == Some(time)
}

fn guard(tp: &TPred, time: FinTime) -> bool {
    tp.pred.holds_at(&tp.binder, time) == Some(true)
}

/// Continuation of a right rule firing at `time`: the binder becomes `time`.
fn fired(tp: &TPred, m: &Term, time: FinTime) -> Term {
    m.subst_time(&tp.binder, &TExpr::lit(time))
}

fn chan(s: &Sym) -> Option<&Channel> {
    match s {
        Sym::Chan(c) => Some(c),
        Sym::Var(_) => None,
    }
}

fn one(c: &Channel, m: Term) -> Configuration {
    Configuration::singleton(AtomicProc::Proc(c.clone(), closed_obj(m)))
}

fn two(c1: &Channel, m1: Term, c2: &Channel, m2: Term) -> Configuration {
    one(c1, m1).union(&one(c2, m2))
}

fn bind(m: &Term, x: &crate::types::Ident, c: &Channel) -> Term {
    m.subst(&[(x.clone(), c.clone())].into_iter().collect())
}

impl ProcessLanguage for TimedLang {
    type Term = Term;
    const ID: &'static str = "timed";

    fn render(m: &Term) -> String {
        m.to_string()
    }

    fn step(m: &Term, a: &Channel, time: FinTime, aux: &StepAux) -> Vec<(Action, Configuration)> {
        let sels = [Sel::P1, Sel::P2];
        match m {
            Term::Fwd { at, src } if at_now(at, time) => match chan(src) {
                Some(b) => vec![(Action::Eps, Configuration::singleton(AtomicProc::Fwd(a.clone(), b.clone())))],
                None => vec![],
            },
            Term::Let { at, var, def, body, .. } if at_now(at, time) => {
                let b = &aux.fresh;
                vec![(Action::Eps, two(b, (**def).clone(), a, bind(body, var, b)))]
            }
            Term::SendClose { tp } if guard(tp, time) => vec![(Action::send(a, Payload::Close), Configuration::empty())],
            Term::RecvClose { at, subj, body } if at_now(at, time) => match chan(subj) {
                Some(b) => vec![(Action::recv(b, Payload::Close), one(a, (**body).clone()))],
                None => vec![],
            },
            Term::RecvChan { tp, var, body } if guard(tp, time) => {
                let k = fired(tp, body, time);
                aux.payloads
                    .iter()
                    .map(|c| (Action::recv(a, Payload::Chan(c.clone())), one(a, bind(&k, var, c))))
                    .collect()
            }
            Term::SendChan { at, subj, arg, body } if at_now(at, time) => match chan(subj) {
                Some(b) => {
                    let c = &aux.fresh;
                    vec![(Action::send(b, Payload::Chan(c.clone())), two(c, (**arg).clone(), a, (**body).clone()))]
                }
                None => vec![],
            },
            Term::SendChanR { tp, arg, body } if guard(tp, time) => {
                let c = &aux.fresh;
                vec![(
                    Action::send(a, Payload::Chan(c.clone())),
                    two(c, fired(tp, arg, time), a, fired(tp, body, time)),
                )]
            }
            Term::RecvChanR { at, subj, var, body } if at_now(at, time) => match chan(subj) {
                Some(b) => aux
                    .payloads
                    .iter()
                    .map(|c| (Action::recv(b, Payload::Chan(c.clone())), one(a, bind(body, var, c))))
                    .collect(),
                None => vec![],
            },
            Term::RecvSel { tp, left, right } if guard(tp, time) => sels
                .iter()
                .zip([left, right])
                .map(|(s, k)| (Action::recv(a, Payload::Sel(*s)), one(a, fired(tp, k, time))))
                .collect(),
            Term::SendSel { at, subj, sel, body } if at_now(at, time) => match chan(subj) {
                Some(b) => vec![(Action::send(b, Payload::Sel(*sel)), one(a, (**body).clone()))],
                None => vec![],
            },
            Term::SendSelR { tp, sel, body } if guard(tp, time) => {
                vec![(Action::send(a, Payload::Sel(*sel)), one(a, fired(tp, body, time)))]
            }
            Term::RecvSelR { at, subj, left, right } if at_now(at, time) => match chan(subj) {
                Some(b) => sels
                    .iter()
                    .zip([left, right])
                    .map(|(s, k)| (Action::recv(b, Payload::Sel(*s)), one(a, (**k).clone())))
                    .collect(),
                None => vec![],
            },
            _ => vec![],
        }
    }

    fn channels(m: &Term) -> BTreeSet<Channel> {
        m.channels()
    }

    fn rename(m: &Term, from: &Channel, to: &Channel) -> Term {
        m.rename_chan(from, to)
    }

    fn wake_times(m: &Term) -> Vec<FinTime> {
        match m {
            Term::SendClose { tp } | Term::SendChanR { tp, .. } | Term::SendSelR { tp, .. } => tp.onsets_from(0),
            Term::RecvChan { .. } | Term::RecvSel { .. } => vec![],
            _ => m.head_time().and_then(|e| e.as_lit()).into_iter().collect(),
        }
    }
}
