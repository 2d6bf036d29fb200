//! Bounded soundness check over the reachability graph.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::{Marking, PetriNet, TransitionId};

pub const DEFAULT_STATE_BOUND: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum UnsoundReason {
    /// A reachable marking strictly covers the final marking.
    RemainingTokens(Marking),
    /// The final marking cannot be reached from this reachable marking.
    CannotComplete(Marking),
    /// The transition never fires on any path from the initial marking.
    DeadTransition(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Soundness {
    Sound,
    Unsound(UnsoundReason),
    /// More than `explored` markings are reachable.
    Inconclusive { explored: usize },
}

impl Soundness {
    pub fn is_sound(&self) -> bool {
        matches!(self, Soundness::Sound)
    }
}

/// Explores at most `state_bound` reachable markings and checks proper
/// completion, option to complete and absence of dead transitions, in that
/// order.
pub fn is_sound(net: &PetriNet, state_bound: usize) -> Soundness {
    let mut index: HashMap<Marking, usize> = HashMap::new();
    let mut states: Vec<Marking> = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut fired = vec![false; net.transitions().len()];
    let mut queue = VecDeque::new();

    index.insert(net.initial_marking().clone(), 0);
    states.push(net.initial_marking().clone());
    succ.push(Vec::new());
    queue.push_back(0usize);

    let mf = net.final_marking();
    while let Some(i) = queue.pop_front() {
        let m = states[i].clone();
        if m != *mf && m.covers(mf) {
            return Soundness::Unsound(UnsoundReason::RemainingTokens(m));
        }
        let enabled: Vec<TransitionId> = net.enabled_transitions(&m).collect();
        for t in enabled {
            fired[t.0] = true;
            let next = net.fire(&m, t).expect("enabled transition fires");
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if states.len() >= state_bound {
                        return Soundness::Inconclusive {
                            explored: states.len(),
                        };
                    }
                    let j = states.len();
                    index.insert(next.clone(), j);
                    states.push(next);
                    succ.push(Vec::new());
                    queue.push_back(j);
                    j
                }
            };
            succ[i].push(j);
        }
    }

    // backward reachability from the final marking
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
    for (i, out) in succ.iter().enumerate() {
        for &j in out {
            pred[j].push(i);
        }
    }
    let mut can_finish = vec![false; states.len()];
    if let Some(&fi) = index.get(mf) {
        can_finish[fi] = true;
        let mut q = VecDeque::from([fi]);
        while let Some(j) = q.pop_front() {
            for &i in &pred[j] {
                if !can_finish[i] {
                    can_finish[i] = true;
                    q.push_back(i);
                }
            }
        }
    }
    if let Some(i) = can_finish.iter().position(|&ok| !ok) {
        return Soundness::Unsound(UnsoundReason::CannotComplete(states[i].clone()));
    }
    if let Some(t) = fired.iter().position(|&f| !f) {
        return Soundness::Unsound(UnsoundReason::DeadTransition(
            net.transitions()[t].id.clone(),
        ));
    }
    Soundness::Sound
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::*;
    use super::*;

    #[test]
    fn chain_and_six_place_nets_are_sound() {
        assert_eq!(is_sound(&chain_net(&["a", "b", "c"]), 1000), Soundness::Sound);
        assert_eq!(is_sound(&six_place_net(), 1000), Soundness::Sound);
    }

    #[test]
    fn unreachable_transition_is_dead() {
        let mut b = PetriNetBuilder::new();
        let src = b.place("src");
        let orphan = b.place("orphan");
        let end = b.place("end");
        let a = b.visible("ta", "a");
        b.input(src, a).output(a, end);
        let x = b.visible("tx", "x");
        b.input(orphan, x).output(x, end);
        let net = b.build(marking_of(3, &[src]), marking_of(3, &[end])).unwrap();
        assert_eq!(
            is_sound(&net, 1000),
            Soundness::Unsound(UnsoundReason::DeadTransition("tx".into()))
        );
    }

    /// Brute-force enumeration of every firing sequence up to a depth, kept
    /// independent of the BFS above.
    fn reachable_by_enumeration(net: &PetriNet, depth: usize) -> Vec<Marking> {
        fn walk(net: &PetriNet, m: &Marking, depth: usize, out: &mut Vec<Marking>) {
            if !out.contains(m) {
                out.push(m.clone());
            }
            if depth == 0 {
                return;
            }
            for t in 0..net.transitions().len() {
                let inputs = net.inputs(TransitionId(t));
                if !inputs.is_empty() && inputs.iter().all(|p| m.tokens(*p) > 0) {
                    let mut next = m.counts().to_vec();
                    for p in inputs {
                        next[p.0] -= 1;
                    }
                    for p in net.outputs(TransitionId(t)) {
                        next[p.0] += 1;
                    }
                    walk(net, &Marking::from_counts(next), depth - 1, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(net, net.initial_marking(), depth, &mut out);
        out
    }

    #[test]
    fn unjoined_and_split_leaves_tokens() {
        let net = unjoined_and_split();
        let reachable = reachable_by_enumeration(&net, 6);
        // oracle: the marking with two sink tokens is reachable
        assert!(reachable.contains(&Marking::from_counts(vec![0, 0, 0, 2])));
        assert!(matches!(
            is_sound(&net, 1000),
            Soundness::Unsound(UnsoundReason::RemainingTokens(_))
        ));
    }

    #[test]
    fn unbounded_net_is_inconclusive() {
        let mut b = PetriNetBuilder::new();
        let p = b.place("p");
        let q = b.place("q");
        let end = b.place("end");
        let t = b.visible("t", "gen");
        b.input(p, t).output(t, p).output(t, q);
        // the final marking is never reached, so no state covers it
        let net = b.build(marking_of(3, &[p]), marking_of(3, &[end])).unwrap();
        assert!(matches!(
            is_sound(&net, 50),
            Soundness::Inconclusive { explored: 50 }
        ));
    }
}
