//! JSON and DOT representations of nets.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Marking, NetError, PetriNet, PetriNetBuilder, PlaceId, Transition, TransitionId};

#[derive(Debug, Serialize, Deserialize)]
struct NetDocument {
    places: Vec<String>,
    transitions: Vec<Transition>,
    arcs: Vec<(String, String)>,
    /// Token counts aligned with `places`.
    m0: Vec<u32>,
    mz: Vec<u32>,
}

pub fn to_json(net: &PetriNet) -> String {
    let doc = NetDocument {
        places: net.places().to_vec(),
        transitions: net.transitions().to_vec(),
        arcs: net.arcs(),
        m0: net.initial_marking().counts().to_vec(),
        mz: net.final_marking().counts().to_vec(),
    };
    serde_json::to_string_pretty(&doc).expect("net document serializes")
}

pub fn from_json(text: &str) -> Result<PetriNet, NetError> {
    let doc: NetDocument =
        serde_json::from_str(text).map_err(|e| NetError::Format(e.to_string()))?;
    let mut b = PetriNetBuilder::new();
    let mut places = BTreeMap::new();
    for p in &doc.places {
        let id = b.place(p.clone());
        if places.insert(p.clone(), id).is_some() {
            return Err(NetError::DuplicatePlace(p.clone()));
        }
    }
    let mut transitions: BTreeMap<String, TransitionId> = BTreeMap::new();
    for t in &doc.transitions {
        let id = match (&t.label, t.invisible) {
            (Some(label), false) => b.visible(t.id.clone(), label.clone()),
            (None, true) => b.invisible(t.id.clone()),
            _ => return Err(NetError::LabelMismatch(t.id.clone())),
        };
        transitions.insert(t.id.clone(), id);
    }
    for (src, dst) in &doc.arcs {
        match (
            places.get(src),
            transitions.get(src),
            places.get(dst),
            transitions.get(dst),
        ) {
            (Some(&p), None, None, Some(&t)) => {
                b.input(p, t);
            }
            (None, Some(&t), Some(&p), None) => {
                b.output(t, p);
            }
            _ => return Err(NetError::InvalidArc(src.clone(), dst.clone())),
        }
    }
    b.build(Marking::from_counts(doc.m0), Marking::from_counts(doc.mz))
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(net: &PetriNet) -> String {
    let mut out = String::from("digraph petri_net {\n  rankdir=LR;\n");
    for (i, p) in net.places().iter().enumerate() {
        let m0 = net.initial_marking().tokens(PlaceId(i));
        let mz = net.final_marking().tokens(PlaceId(i));
        let label = if m0 > 0 { "&#9679;" } else { "" };
        let periph = if mz > 0 { ", peripheries=2" } else { "" };
        let _ = writeln!(
            out,
            "  {} [shape=circle, label=\"{}\", xlabel={}{}];",
            quote(p),
            label,
            quote(p),
            periph
        );
    }
    for t in net.transitions() {
        if t.invisible {
            let _ = writeln!(
                out,
                "  {} [shape=box, style=filled, fillcolor=black, label=\"\", width=0.15];",
                quote(&t.id)
            );
        } else {
            let _ = writeln!(
                out,
                "  {} [shape=box, label={}];",
                quote(&t.id),
                quote(t.label.as_deref().unwrap_or_default())
            );
        }
    }
    for (src, dst) in net.arcs() {
        let _ = writeln!(out, "  {} -> {};", quote(&src), quote(&dst));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::*;
    use super::*;

    #[test]
    fn json_round_trip() {
        let net = unjoined_and_split();
        let back = from_json(&to_json(&net)).unwrap();
        assert_eq!(back, net);
        let net = six_place_net();
        assert_eq!(from_json(&to_json(&net)).unwrap(), net);
    }

    #[test]
    fn json_rejects_place_to_place_arc() {
        let doc = r#"{"places":["a","b"],"transitions":[],"arcs":[["a","b"]],"m0":[1,0],"mz":[0,1]}"#;
        assert_eq!(
            from_json(doc).unwrap_err(),
            NetError::InvalidArc("a".into(), "b".into())
        );
    }

    #[test]
    fn dot_mentions_labels_and_invisible_transitions() {
        let dot = to_dot(&unjoined_and_split());
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("label=\"a\""));
        assert!(dot.contains("fillcolor=black"));
        assert!(dot.contains("\"p0\" -> \"split\""));
    }
}
