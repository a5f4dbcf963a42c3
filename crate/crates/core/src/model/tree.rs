use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::exact::{Rational, RationalVector};

/// Identifier of a node as it appears in the tree file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One node record of the on-disk tree format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub prob: Rational,
    pub price: Vec<Rational>,
}

/// The serialized form of a scenario tree, before validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub d: usize,
    #[serde(rename = "N")]
    pub horizon: usize,
    pub nodes: Vec<NodeRecord>,
    /// Generator seed, when the tree was produced by the random generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A failed structural rule, tied to the node where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub node: Option<NodeId>,
    pub rule: String,
    pub message: String,
}

impl Violation {
    fn new(node: Option<NodeId>, rule: &str, message: impl Into<String>) -> Self {
        Violation {
            node,
            rule: rule.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(id) => write!(f, "node {id}: [{}] {}", self.rule, self.message),
            None => write!(f, "[{}] {}", self.rule, self.message),
        }
    }
}

/// Checks every structural invariant of a tree document.
///
/// Returns an empty list exactly when [`ScenarioTree::from_document`] would
/// succeed. Violations are reported in node-id order per rule.
pub fn validate(doc: &TreeDocument) -> Vec<Violation> {
    let mut out = Vec::new();
    if doc.d == 0 {
        out.push(Violation::new(None, "asset-count", "d must be at least 1"));
    }

    let mut seen = HashSet::new();
    for rec in &doc.nodes {
        if !seen.insert(rec.id) {
            out.push(Violation::new(Some(rec.id), "duplicate-id", "node id appears more than once"));
        }
    }
    let by_id: BTreeMap<NodeId, &NodeRecord> = doc.nodes.iter().map(|r| (r.id, r)).collect();

    let roots: Vec<NodeId> = by_id.values().filter(|r| r.parent.is_none()).map(|r| r.id).collect();
    match roots.as_slice() {
        [] => out.push(Violation::new(None, "single-root", "no node without a parent")),
        [_] => {}
        many => {
            for id in &many[1..] {
                out.push(Violation::new(Some(*id), "single-root", "more than one node without a parent"));
            }
        }
    }

    let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for rec in by_id.values() {
        if rec.price.len() != doc.d {
            out.push(Violation::new(
                Some(rec.id),
                "price-dimension",
                format!("price has {} entries, expected d = {}", rec.price.len(), doc.d),
            ));
        }
        match rec.parent {
            None => {
                if !rec.prob.is_one() {
                    out.push(Violation::new(
                        Some(rec.id),
                        "root-probability",
                        format!("root probability is {}, expected 1", rec.prob),
                    ));
                }
            }
            Some(p) => {
                if !by_id.contains_key(&p) {
                    out.push(Violation::new(Some(rec.id), "parent-exists", format!("parent {p} does not exist")));
                } else {
                    children.entry(p).or_default().push(rec.id);
                }
                if !rec.prob.is_positive() {
                    out.push(Violation::new(
                        Some(rec.id),
                        "positive-probability",
                        format!("non-positive transition probability {}", rec.prob),
                    ));
                }
            }
        }
    }

    for (parent, kids) in &children {
        let total: Rational = kids.iter().map(|k| &by_id[k].prob).sum();
        if !total.is_one() {
            out.push(Violation::new(
                Some(*parent),
                "probability-sum",
                format!("probabilities sum to {total} ≠ 1"),
            ));
        }
    }

    if let [root] = roots.as_slice() {
        let mut depth: HashMap<NodeId, usize> = HashMap::new();
        let mut stack = vec![(*root, 0usize)];
        while let Some((id, dep)) = stack.pop() {
            if depth.insert(id, dep).is_some() {
                continue;
            }
            match children.get(&id) {
                Some(kids) => stack.extend(kids.iter().map(|k| (*k, dep + 1))),
                None if dep != doc.horizon => out.push(Violation::new(
                    Some(id),
                    "leaf-depth",
                    format!("leaf at depth {dep}, expected N = {}", doc.horizon),
                )),
                None => {}
            }
        }
        for id in by_id.keys() {
            if !depth.contains_key(id) {
                out.push(Violation::new(Some(*id), "reachable", "node is not reachable from the root"));
            }
        }
    }
    out
}

/// A validated node of a [`ScenarioTree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub depth: usize,
    /// Transition probability from the parent (1 at the root).
    pub prob: Rational,
    pub price: RationalVector,
    pub children: Vec<NodeId>,
    /// Probability of the root-to-node path.
    pub mass: Rational,
}

/// A validated finite filtered probability space with an adapted price process.
///
/// Leaves are the elementary outcomes; depth-n nodes are the atoms of the
/// time-n sigma-algebra. Every branch carries strictly positive probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioTree {
    d: usize,
    horizon: usize,
    nodes: BTreeMap<NodeId, Node>,
    root: NodeId,
    seed: Option<u64>,
}

impl ScenarioTree {
    pub fn from_document(doc: &TreeDocument) -> Result<Self, ModelError> {
        let violations = validate(doc);
        if !violations.is_empty() {
            return Err(ModelError::Invalid(violations));
        }
        let mut nodes: BTreeMap<NodeId, Node> = doc
            .nodes
            .iter()
            .map(|r| {
                (
                    r.id,
                    Node {
                        id: r.id,
                        parent: r.parent,
                        depth: 0,
                        prob: r.prob.clone(),
                        price: RationalVector::new(r.price.clone()),
                        children: Vec::new(),
                        mass: Rational::zero(),
                    },
                )
            })
            .collect();
        let links: Vec<(NodeId, NodeId)> = nodes.values().filter_map(|n| n.parent.map(|p| (p, n.id))).collect();
        for (p, c) in links {
            nodes.get_mut(&p).expect("validated parent").children.push(c);
        }
        let root = nodes.values().find(|n| n.parent.is_none()).expect("validated root").id;
        let mut stack = vec![(root, 0usize, Rational::one())];
        while let Some((id, depth, mass)) = stack.pop() {
            let node = nodes.get_mut(&id).expect("reachable node");
            node.depth = depth;
            node.mass = mass.clone();
            let kids = node.children.clone();
            for k in kids {
                let p = &nodes[&k].prob;
                stack.push((k, depth + 1, &mass * p));
            }
        }
        Ok(ScenarioTree {
            d: doc.d,
            horizon: doc.horizon,
            nodes,
            root,
            seed: doc.seed,
        })
    }

    pub fn to_document(&self) -> TreeDocument {
        TreeDocument {
            d: self.d,
            horizon: self.horizon,
            nodes: self
                .nodes
                .values()
                .map(|n| NodeRecord {
                    id: n.id,
                    parent: n.parent,
                    prob: n.prob.clone(),
                    price: n.price.as_slice().to_vec(),
                })
                .collect(),
            seed: self.seed,
        }
    }

    /// Number of assets.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of trading periods.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node(&self, id: NodeId) -> Result<&Node, ModelError> {
        self.nodes.get(&id).ok_or(ModelError::UnknownNode(id))
    }

    /// All nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    /// Leaves in id order.
    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values().filter(|n| n.children.is_empty())
    }

    /// Non-leaf nodes in id order.
    pub fn internal_nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values().filter(|n| !n.children.is_empty())
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes.get(&id).is_some_and(|n| n.children.is_empty())
    }

    /// Price increment from the parent to `id`; zero at the root.
    pub fn increment(&self, id: NodeId) -> RationalVector {
        let node = &self.nodes[&id];
        match node.parent {
            Some(p) => node.price.sub(&self.nodes[&p].price),
            None => RationalVector::zeros(self.d),
        }
    }

    /// Node ids from the root down to `id`, inclusive.
    pub fn path(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[&cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Leaves below `id` (or `id` itself if it is a leaf), in id order.
    pub fn leaves_under(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[&n];
            if node.children.is_empty() {
                out.push(n);
            } else {
                stack.extend(node.children.iter().copied());
            }
        }
        out.sort();
        out
    }

    /// A copy of this tree with new transition probabilities for the listed
    /// nodes. The result is re-validated.
    pub fn with_probabilities(&self, probs: &BTreeMap<NodeId, Rational>) -> Result<ScenarioTree, ModelError> {
        let mut doc = self.to_document();
        for rec in &mut doc.nodes {
            if let Some(p) = probs.get(&rec.id) {
                rec.prob = p.clone();
            }
        }
        ScenarioTree::from_document(&doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: u64, parent: Option<u64>, prob: &str, price: &[&str]) -> NodeRecord {
        NodeRecord {
            id: NodeId(id),
            parent: parent.map(NodeId),
            prob: prob.parse().unwrap(),
            price: price.iter().map(|s| s.parse().unwrap()).collect(),
        }
    }

    fn binomial(p_up: &str, p_down: &str) -> TreeDocument {
        TreeDocument {
            d: 1,
            horizon: 1,
            nodes: vec![
                rec(0, None, "1", &["0"]),
                rec(1, Some(0), p_up, &["1"]),
                rec(2, Some(0), p_down, &["-1"]),
            ],
            seed: None,
        }
    }

    #[test]
    fn well_formed_binomial_has_no_violations() {
        assert!(validate(&binomial("1/2", "1/2")).is_empty());
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let v = validate(&binomial("1/2", "1/3"));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "probability-sum");
        assert_eq!(v[0].node, Some(NodeId(0)));
        assert_eq!(v[0].message, "probabilities sum to 5/6 ≠ 1");
    }

    #[test]
    fn zero_probability_is_rejected() {
        let mut doc = binomial("1", "0");
        doc.nodes[2].prob = Rational::zero();
        let v = validate(&doc);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "positive-probability");
        assert_eq!(v[0].node, Some(NodeId(2)));
        assert!(v[0].message.starts_with("non-positive transition probability"));
    }

    #[test]
    fn structural_rules() {
        let mut doc = binomial("1/2", "1/2");
        doc.nodes.push(rec(7, Some(9), "1", &["0"]));
        doc.nodes.push(rec(8, Some(1), "1", &["0", "1"]));
        let rules: Vec<String> = validate(&doc).into_iter().map(|v| v.rule).collect();
        assert!(rules.contains(&"parent-exists".to_string()));
        assert!(rules.contains(&"price-dimension".to_string()));
        assert!(rules.contains(&"leaf-depth".to_string()));
        assert!(rules.contains(&"reachable".to_string()));

        let mut doc = binomial("1/2", "1/2");
        doc.nodes.push(rec(1, Some(0), "1/2", &["1"]));
        doc.nodes.push(rec(5, None, "1", &["0"]));
        let rules: Vec<String> = validate(&doc).into_iter().map(|v| v.rule).collect();
        assert!(rules.contains(&"duplicate-id".to_string()));
        assert!(rules.contains(&"single-root".to_string()));
    }

    #[test]
    fn derived_structure() {
        let tree = ScenarioTree::from_document(&binomial("3/4", "1/4")).unwrap();
        assert_eq!(tree.root(), NodeId(0));
        assert_eq!(tree.leaves().count(), 2);
        assert_eq!(tree.node(NodeId(1)).unwrap().mass, Rational::new(3, 4));
        assert_eq!(tree.increment(NodeId(2)), RationalVector::from_integers(&[-1]));
        assert_eq!(tree.path(NodeId(2)), vec![NodeId(0), NodeId(2)]);
        assert_eq!(ScenarioTree::from_document(&tree.to_document()).unwrap(), tree);
    }

    #[test]
    fn json_format() {
        let json = r#"{ "d": 2, "N": 1, "nodes": [
            { "id": 0, "parent": null, "prob": "1", "price": ["100", "50"] },
            { "id": 1, "parent": 0, "prob": "3/4", "price": ["101", "50"] },
            { "id": 2, "parent": 0, "prob": "1/4", "price": ["97", "50"] } ] }"#;
        let doc: TreeDocument = serde_json::from_str(json).unwrap();
        let tree = ScenarioTree::from_document(&doc).unwrap();
        assert_eq!(tree.dim(), 2);
        let back = serde_json::to_string(&doc).unwrap();
        assert!(back.contains(r#""prob":"3/4""#));
        assert!(back.contains(r#""N":1"#));
    }
}
