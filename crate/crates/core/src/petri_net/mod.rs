//! Labeled Petri nets with invisible transitions.
//!
//! Places and transitions are addressed by dense indices. A [`Marking`] is a
//! token count per place index and is passed by value.

mod format;
mod soundness;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use format::{from_json, to_dot, to_json};
pub use soundness::{is_sound, Soundness, UnsoundReason, DEFAULT_STATE_BOUND};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown transition {0}")]
    UnknownTransition(usize),
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("duplicate place id `{0}`")]
    DuplicatePlace(String),
    #[error("duplicate transition id `{0}`")]
    DuplicateTransition(String),
    #[error("label `{0}` is used by more than one visible transition")]
    DuplicateLabel(String),
    #[error("transition `{0}`: visible transitions need a label, invisible ones must not have one")]
    LabelMismatch(String),
    #[error("arc {0} -> {1} does not connect a place and a transition")]
    InvalidArc(String, String),
    #[error("{0} marking holds no tokens")]
    EmptyMarking(&'static str),
    #[error("marking has {actual} entries but net has {expected} places")]
    MarkingSize { expected: usize, actual: usize },
    #[error("invalid net document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlaceId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransitionId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub id: String,
    pub label: Option<String>,
    pub invisible: bool,
}

/// Token count per place, indexed by [`PlaceId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Marking(Vec<u32>);

impl Marking {
    pub fn empty(places: usize) -> Self {
        Self(vec![0; places])
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn tokens(&self, p: PlaceId) -> u32 {
        self.0[p.0]
    }

    pub fn set(&mut self, p: PlaceId, n: u32) {
        self.0[p.0] = n;
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&n| n as u64).sum()
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    /// Pointwise `self >= other`.
    pub fn covers(&self, other: &Marking) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn marked_places(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, _)| PlaceId(i))
    }
}

/// An immutable, structurally valid Petri net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<Transition>,
    inputs: Vec<Vec<PlaceId>>,
    outputs: Vec<Vec<PlaceId>>,
    consumers: Vec<Vec<TransitionId>>,
    producers: Vec<Vec<TransitionId>>,
    by_label: BTreeMap<String, TransitionId>,
    initial: Marking,
    final_marking: Marking,
}

impl PetriNet {
    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: TransitionId) -> Result<&Transition, NetError> {
        self.transitions
            .get(t.0)
            .ok_or(NetError::UnknownTransition(t.0))
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = TransitionId> {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn inputs(&self, t: TransitionId) -> &[PlaceId] {
        &self.inputs[t.0]
    }

    pub fn outputs(&self, t: TransitionId) -> &[PlaceId] {
        &self.outputs[t.0]
    }

    pub fn consumers(&self, p: PlaceId) -> &[TransitionId] {
        &self.consumers[p.0]
    }

    pub fn producers(&self, p: PlaceId) -> &[TransitionId] {
        &self.producers[p.0]
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    /// The visible transition carrying `label`, if any.
    pub fn transition_by_label(&self, label: &str) -> Option<TransitionId> {
        self.by_label.get(label).copied()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.by_label.keys().map(String::as_str)
    }

    /// All arcs as `(source id, target id)` pairs.
    pub fn arcs(&self) -> Vec<(String, String)> {
        let mut arcs = Vec::new();
        for t in self.transition_ids() {
            for p in self.inputs(t) {
                arcs.push((self.places[p.0].clone(), self.transitions[t.0].id.clone()));
            }
            for p in self.outputs(t) {
                arcs.push((self.transitions[t.0].id.clone(), self.places[p.0].clone()));
            }
        }
        arcs
    }

    /// Whether every input place of `t` holds a token. Transitions without
    /// input places are never enabled.
    pub fn enabled(&self, m: &Marking, t: TransitionId) -> Result<bool, NetError> {
        let inputs = self
            .inputs
            .get(t.0)
            .ok_or(NetError::UnknownTransition(t.0))?;
        Ok(self.is_enabled_unchecked(m, inputs))
    }

    fn is_enabled_unchecked(&self, m: &Marking, inputs: &[PlaceId]) -> bool {
        !inputs.is_empty() && inputs.iter().all(|&p| m.tokens(p) >= 1)
    }

    pub fn enabled_transitions<'a>(
        &'a self,
        m: &'a Marking,
    ) -> impl Iterator<Item = TransitionId> + 'a {
        self.transition_ids()
            .filter(move |t| self.is_enabled_unchecked(m, &self.inputs[t.0]))
    }

    /// Returns the marking after firing `t`; `m` is left untouched.
    pub fn fire(&self, m: &Marking, t: TransitionId) -> Result<Marking, NetError> {
        if !self.enabled(m, t)? {
            return Err(NetError::NotEnabled(self.transitions[t.0].id.clone()));
        }
        let mut next = m.clone();
        for &p in &self.inputs[t.0] {
            next.0[p.0] -= 1;
        }
        for &p in &self.outputs[t.0] {
            next.0[p.0] += 1;
        }
        Ok(next)
    }
}

/// Incremental construction of a [`PetriNet`].
#[derive(Debug, Default, Clone)]
pub struct PetriNetBuilder {
    places: Vec<String>,
    transitions: Vec<Transition>,
    inputs: Vec<Vec<PlaceId>>,
    outputs: Vec<Vec<PlaceId>>,
}

impl PetriNetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, id: impl Into<String>) -> PlaceId {
        self.places.push(id.into());
        PlaceId(self.places.len() - 1)
    }

    pub fn visible(&mut self, id: impl Into<String>, label: impl Into<String>) -> TransitionId {
        self.push_transition(Transition {
            id: id.into(),
            label: Some(label.into()),
            invisible: false,
        })
    }

    pub fn invisible(&mut self, id: impl Into<String>) -> TransitionId {
        self.push_transition(Transition {
            id: id.into(),
            label: None,
            invisible: true,
        })
    }

    fn push_transition(&mut self, t: Transition) -> TransitionId {
        self.transitions.push(t);
        self.inputs.push(Vec::new());
        self.outputs.push(Vec::new());
        TransitionId(self.transitions.len() - 1)
    }

    /// Arc from place to transition.
    pub fn input(&mut self, p: PlaceId, t: TransitionId) -> &mut Self {
        if !self.inputs[t.0].contains(&p) {
            self.inputs[t.0].push(p);
        }
        self
    }

    /// Arc from transition to place.
    pub fn output(&mut self, t: TransitionId, p: PlaceId) -> &mut Self {
        if !self.outputs[t.0].contains(&p) {
            self.outputs[t.0].push(p);
        }
        self
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn build(self, initial: Marking, final_marking: Marking) -> Result<PetriNet, NetError> {
        let n = self.places.len();
        for m in [&initial, &final_marking] {
            if m.0.len() != n {
                return Err(NetError::MarkingSize {
                    expected: n,
                    actual: m.0.len(),
                });
            }
        }
        if initial.total() == 0 {
            return Err(NetError::EmptyMarking("initial"));
        }
        if final_marking.total() == 0 {
            return Err(NetError::EmptyMarking("final"));
        }
        let mut seen = BTreeMap::new();
        for p in &self.places {
            if seen.insert(p.clone(), ()).is_some() {
                return Err(NetError::DuplicatePlace(p.clone()));
            }
        }
        let mut tids = BTreeMap::new();
        let mut by_label = BTreeMap::new();
        for (i, t) in self.transitions.iter().enumerate() {
            if tids.insert(t.id.clone(), ()).is_some() || seen.contains_key(&t.id) {
                return Err(NetError::DuplicateTransition(t.id.clone()));
            }
            match (&t.label, t.invisible) {
                (Some(label), false) => {
                    if by_label.insert(label.clone(), TransitionId(i)).is_some() {
                        return Err(NetError::DuplicateLabel(label.clone()));
                    }
                }
                (None, true) => {}
                _ => return Err(NetError::LabelMismatch(t.id.clone())),
            }
        }
        let mut consumers = vec![Vec::new(); n];
        let mut producers = vec![Vec::new(); n];
        for (i, ins) in self.inputs.iter().enumerate() {
            for p in ins {
                consumers[p.0].push(TransitionId(i));
            }
        }
        for (i, outs) in self.outputs.iter().enumerate() {
            for p in outs {
                producers[p.0].push(TransitionId(i));
            }
        }
        Ok(PetriNet {
            places: self.places,
            transitions: self.transitions,
            inputs: self.inputs,
            outputs: self.outputs,
            consumers,
            producers,
            by_label,
            initial,
            final_marking,
        })
    }
}

/// A single token in each listed place.
pub fn marking_of(places: usize, marked: &[PlaceId]) -> Marking {
    let mut m = Marking::empty(places);
    for &p in marked {
        m.0[p.0] += 1;
    }
    m
}

/// Chain net `source -> l0 -> p1 -> l1 -> ... -> sink` over `labels`.
pub fn chain_net(labels: &[&str]) -> PetriNet {
    let mut b = PetriNetBuilder::new();
    let mut prev = b.place("source");
    for (i, l) in labels.iter().enumerate() {
        let next = if i + 1 == labels.len() {
            b.place("sink")
        } else {
            b.place(format!("p{}", i + 1))
        };
        let t = b.visible(format!("t{i}"), *l);
        b.input(prev, t).output(t, next);
        prev = next;
    }
    let n = b.place_count();
    let sink = PlaceId(n - 1);
    b.build(marking_of(n, &[PlaceId(0)]), marking_of(n, &[sink]))
        .expect("chain net is valid")
}
