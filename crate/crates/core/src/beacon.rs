//! A second, deliberately tiny process language: a beacon closes its
//! provided channel at any instant of a fixed window.

use crate::lts::{Action, Channel, Configuration, NamelessObj, Payload, ProcessLanguage, StepAux};
use crate::time::FinTime;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Window {
    pub lo: FinTime,
    /// `None` is an unbounded window.
    pub hi: Option<FinTime>,
}

impl Window {
    pub fn new(lo: FinTime, hi: Option<FinTime>) -> Self {
        Window { lo, hi }
    }

    pub fn contains(&self, t: FinTime) -> bool {
        self.lo <= t && self.hi.is_none_or(|h| t <= h)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(h) => write!(f, "beacon({}, {h})", self.lo),
            None => write!(f, "beacon({}, inf)", self.lo),
        }
    }
}

pub struct BeaconLang;

pub fn beacon_obj(w: Window) -> NamelessObj {
    NamelessObj::new::<BeaconLang>(w)
}

impl ProcessLanguage for BeaconLang {
    type Term = Window;
    const ID: &'static str = "beacon";

    fn render(w: &Window) -> String {
        w.to_string()
    }

    fn step(w: &Window, a: &Channel, time: FinTime, _aux: &StepAux) -> Vec<(Action, Configuration)> {
        if w.contains(time) {
            vec![(Action::send(a, Payload::Close), Configuration::empty())]
        } else {
            vec![]
        }
    }

    fn channels(_: &Window) -> BTreeSet<Channel> {
        BTreeSet::new()
    }

    fn rename(w: &Window, _: &Channel, _: &Channel) -> Window {
        *w
    }

    fn wake_times(w: &Window) -> Vec<FinTime> {
        vec![w.lo]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_bounds() {
        let aux = StepAux { fresh: Channel::fresh(1), payloads: vec![] };
        let a = Channel::new("a");
        let w = Window::new(2, Some(4));
        assert!(BeaconLang::step(&w, &a, 1, &aux).is_empty());
        assert_eq!(BeaconLang::step(&w, &a, 4, &aux).len(), 1);
        assert!(BeaconLang::step(&w, &a, 5, &aux).is_empty());
        assert!(Window::new(2, None).contains(1_000));
        assert_eq!(beacon_obj(Window::new(0, None)).text(), "beacon(0, inf)");
    }
}
