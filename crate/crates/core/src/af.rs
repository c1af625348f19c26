//! Abstract argumentation frameworks and their labellings.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::AfError;

/// Enumeration of complete labellings refuses frameworks larger than this.
pub const COMPLETE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum NodeKind {
    Argument,
    /// Synthetic node standing for a critical question that counts against
    /// an argument.
    Objection {
        arg_id: String,
        cq_id: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    #[serde(flatten)]
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackReason {
    Rebut,
    Undermine,
    CqAssumption,
    CqException,
    /// Imported from an external framework file.
    Given,
}

impl fmt::Display for AttackReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttackReason::Rebut => "rebut",
            AttackReason::Undermine => "undermine",
            AttackReason::CqAssumption => "cq-assumption",
            AttackReason::CqException => "cq-exception",
            AttackReason::Given => "given",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Attack {
    pub attacker: String,
    pub target: String,
    pub reason: AttackReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentationFramework {
    pub nodes: Vec<Node>,
    pub attacks: Vec<Attack>,
}

impl ArgumentationFramework {
    /// Plain framework over numbered or named nodes, every attack `Given`.
    pub fn from_edges<S: AsRef<str>>(nodes: &[S], edges: &[(usize, usize)]) -> Self {
        let nodes: Vec<Node> = nodes
            .iter()
            .map(|n| Node {
                id: n.as_ref().to_owned(),
                kind: NodeKind::Argument,
            })
            .collect();
        let mut attacks: Vec<Attack> = edges
            .iter()
            .map(|&(a, b)| Attack {
                attacker: nodes[a].id.clone(),
                target: nodes[b].id.clone(),
                reason: AttackReason::Given,
            })
            .collect();
        attacks.sort();
        attacks.dedup();
        Self { nodes, attacks }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn attackers_of<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Attack> {
        self.attacks.iter().filter(move |a| a.target == id)
    }

    /// Attackers per node index, deduplicated.
    fn attacker_lists(&self) -> Vec<Vec<usize>> {
        let index: BTreeMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let mut lists = vec![Vec::new(); self.nodes.len()];
        for a in &self.attacks {
            let (Some(&x), Some(&y)) =
                (index.get(a.attacker.as_str()), index.get(a.target.as_str()))
            else {
                continue;
            };
            if !lists[y].contains(&x) {
                lists[y].push(x);
            }
        }
        lists
    }

    /// ICCMA apx text. Node names are used as-is.
    pub fn to_apx(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            out.push_str(&format!("arg({}).\n", n.id));
        }
        let mut seen = BTreeSet::new();
        for a in &self.attacks {
            if seen.insert((&a.attacker, &a.target)) {
                out.push_str(&format!("att({},{}).\n", a.attacker, a.target));
            }
        }
        out
    }

    pub fn from_apx(text: &str) -> Result<Self, AfError> {
        let mut nodes: Vec<String> = Vec::new();
        let mut edges: Vec<(String, String, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            let err = |message: &str| AfError::Apx {
                line: i + 1,
                message: message.to_owned(),
            };
            let body = line
                .strip_suffix('.')
                .ok_or_else(|| err("missing trailing `.`"))?;
            if let Some(name) = body.strip_prefix("arg(").and_then(|b| b.strip_suffix(')')) {
                let name = name.trim();
                if name.is_empty() || name.contains([',', '(', ')']) {
                    return Err(err("bad argument name"));
                }
                if !nodes.iter().any(|n| n == name) {
                    nodes.push(name.to_owned());
                }
            } else if let Some(pair) = body.strip_prefix("att(").and_then(|b| b.strip_suffix(')')) {
                let (a, b) = pair
                    .split_once(',')
                    .ok_or_else(|| err("att needs two names"))?;
                edges.push((a.trim().to_owned(), b.trim().to_owned(), i + 1));
            } else {
                return Err(err("expected arg(..) or att(..,..)"));
            }
        }
        let mut pairs = Vec::new();
        for (a, b, line) in edges {
            let find = |n: &str| {
                nodes.iter().position(|x| x == n).ok_or(AfError::Apx {
                    line,
                    message: format!("undeclared argument `{n}`"),
                })
            };
            pairs.push((find(&a)?, find(&b)?));
        }
        Ok(Self::from_edges(&nodes, &pairs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "IN")]
    In,
    #[serde(rename = "OUT")]
    Out,
    #[serde(rename = "UNDEC")]
    Undec,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::In => "IN",
            Label::Out => "OUT",
            Label::Undec => "UNDEC",
        })
    }
}

/// One label per node, keyed by node id.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Labelling(pub BTreeMap<String, Label>);

impl Labelling {
    pub fn get(&self, id: &str) -> Option<Label> {
        self.0.get(id).copied()
    }

    pub fn in_set(&self) -> BTreeSet<&str> {
        self.0
            .iter()
            .filter(|(_, l)| **l == Label::In)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    /// Nodes whose label violates the IN/OUT/UNDEC conditions.
    pub fn illegal_nodes(&self, af: &ArgumentationFramework) -> Vec<String> {
        let lists = af.attacker_lists();
        let mut bad = Vec::new();
        for (i, n) in af.nodes.iter().enumerate() {
            let label = self.get(&n.id);
            let labels: Vec<Option<Label>> = lists[i]
                .iter()
                .map(|&j| self.get(&af.nodes[j].id))
                .collect();
            let all_out = labels.iter().all(|l| *l == Some(Label::Out));
            let some_in = labels.contains(&Some(Label::In));
            let ok = match label {
                Some(Label::In) => all_out,
                Some(Label::Out) => some_in,
                Some(Label::Undec) => !all_out && !some_in,
                None => false,
            };
            if !ok {
                bad.push(n.id.clone());
            }
        }
        bad
    }

    pub fn is_legal(&self, af: &ArgumentationFramework) -> bool {
        self.0.len() == af.nodes.len() && self.illegal_nodes(af).is_empty()
    }
}

/// Least fixpoint of the labelling rules, one pass over nodes and attacks.
pub fn grounded_labelling(af: &ArgumentationFramework) -> Labelling {
    let n = af.nodes.len();
    let attackers = af.attacker_lists();
    let mut targets = vec![Vec::new(); n];
    for (y, list) in attackers.iter().enumerate() {
        for &x in list {
            targets[x].push(y);
        }
    }
    // attackers not yet known to be OUT
    let mut pending: Vec<usize> = attackers.iter().map(Vec::len).collect();
    let mut label: Vec<Option<Label>> = vec![None; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
    for &i in &queue {
        label[i] = Some(Label::In);
    }
    while let Some(x) = queue.pop_front() {
        for &y in &targets[x] {
            if label[y].is_some() {
                continue;
            }
            label[y] = Some(Label::Out);
            for &z in &targets[y] {
                if label[z].is_none() {
                    pending[z] -= 1;
                    if pending[z] == 0 {
                        label[z] = Some(Label::In);
                        queue.push_back(z);
                    }
                }
            }
        }
    }
    Labelling(
        af.nodes
            .iter()
            .zip(label)
            .map(|(node, l)| (node.id.clone(), l.unwrap_or(Label::Undec)))
            .collect(),
    )
}

/// Every complete (legal) labelling, in a stable order.
pub fn complete_labellings(af: &ArgumentationFramework) -> Result<Vec<Labelling>, AfError> {
    let n = af.nodes.len();
    if n > COMPLETE_LIMIT {
        return Err(AfError::TooLarge {
            nodes: n,
            limit: COMPLETE_LIMIT,
        });
    }
    let attackers = af.attacker_lists();
    // Start from the grounded labelling: every complete labelling extends it,
    // so only its UNDEC nodes need to be searched.
    let grounded = grounded_labelling(af);
    let mut fixed: Vec<Option<Label>> = af.nodes.iter().map(|nd| grounded.get(&nd.id)).collect();
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i] == Some(Label::Undec)).collect();
    for &i in &free {
        fixed[i] = None;
    }

    let mut out = Vec::new();
    search(af, &attackers, &free, 0, &mut fixed, &mut out);
    out.sort();
    Ok(out)
}

fn consistent(attackers: &[Vec<usize>], labels: &[Option<Label>], i: usize) -> bool {
    let Some(l) = labels[i] else { return true };
    let ls: Vec<Option<Label>> = attackers[i].iter().map(|&j| labels[j]).collect();
    let unknown = ls.iter().any(Option::is_none);
    let some_in = ls.contains(&Some(Label::In));
    let all_out = ls.iter().all(|l| *l == Some(Label::Out));
    match l {
        Label::In => ls.iter().all(|l| l.is_none() || *l == Some(Label::Out)),
        Label::Out => some_in || unknown,
        Label::Undec => !all_out && (unknown || !some_in),
    }
}

fn search(
    af: &ArgumentationFramework,
    attackers: &[Vec<usize>],
    free: &[usize],
    k: usize,
    labels: &mut Vec<Option<Label>>,
    out: &mut Vec<Labelling>,
) {
    if k == free.len() {
        out.push(Labelling(
            af.nodes
                .iter()
                .zip(labels.iter())
                .map(|(n, l)| (n.id.clone(), l.expect("all assigned")))
                .collect(),
        ));
        return;
    }
    let i = free[k];
    for l in [Label::In, Label::Out, Label::Undec] {
        labels[i] = Some(l);
        // check i and every node i attacks (their constraints may now fail)
        let ok = consistent(attackers, labels, i)
            && (0..labels.len())
                .filter(|&y| attackers[y].contains(&i))
                .all(|y| consistent(attackers, labels, y));
        if ok {
            search(af, attackers, free, k + 1, labels, out);
        }
    }
    labels[i] = None;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(af: &ArgumentationFramework, labels: &[Label]) -> Labelling {
        Labelling(
            af.nodes
                .iter()
                .zip(labels)
                .map(|(n, l)| (n.id.clone(), *l))
                .collect(),
        )
    }

    #[test]
    fn unattacked_is_in() {
        let af = ArgumentationFramework::from_edges(&["a"], &[]);
        assert_eq!(grounded_labelling(&af).get("a"), Some(Label::In));
    }

    #[test]
    fn two_cycle() {
        let af = ArgumentationFramework::from_edges(&["a", "b"], &[(0, 1), (1, 0)]);
        let g = grounded_labelling(&af);
        assert_eq!(g, lab(&af, &[Label::Undec, Label::Undec]));
        let all = complete_labellings(&af).unwrap();
        assert_eq!(all.len(), 3);
        assert!(all.contains(&lab(&af, &[Label::In, Label::Out])));
        assert!(all.contains(&lab(&af, &[Label::Out, Label::In])));
        assert!(all.contains(&g));
    }

    #[test]
    fn chain_and_self_attack() {
        // c -> b -> a, d self-attacks and attacks a too
        let af = ArgumentationFramework::from_edges(
            &["a", "b", "c", "d"],
            &[(2, 1), (1, 0), (3, 3), (3, 0)],
        );
        let g = grounded_labelling(&af);
        assert_eq!(
            g,
            lab(&af, &[Label::Undec, Label::Out, Label::In, Label::Undec])
        );
        assert!(g.is_legal(&af));
        assert_eq!(complete_labellings(&af).unwrap(), vec![g]);
    }

    #[test]
    fn empty_and_guard() {
        let af = ArgumentationFramework::default();
        assert_eq!(
            complete_labellings(&af).unwrap(),
            vec![Labelling::default()]
        );
        let names: Vec<String> = (0..21).map(|i| format!("n{i}")).collect();
        let big = ArgumentationFramework::from_edges(&names, &[]);
        assert_eq!(
            complete_labellings(&big),
            Err(AfError::TooLarge {
                nodes: 21,
                limit: 20
            })
        );
    }

    #[test]
    fn apx_round_trip() {
        let af = ArgumentationFramework::from_edges(&["a", "b", "c"], &[(0, 1), (1, 2), (2, 1)]);
        let text = af.to_apx();
        assert_eq!(
            text,
            "arg(a).\narg(b).\narg(c).\natt(a,b).\natt(b,c).\natt(c,b).\n"
        );
        assert_eq!(ArgumentationFramework::from_apx(&text).unwrap(), af);
        assert!(matches!(
            ArgumentationFramework::from_apx("arg(a).\natt(a,z).\n"),
            Err(AfError::Apx { line: 2, .. })
        ));
        assert!(ArgumentationFramework::from_apx("arg(a)\n").is_err());
    }
}
