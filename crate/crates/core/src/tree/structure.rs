use serde::{Deserialize, Serialize};

use super::{CutpointGrid, Dataset, MassMemo};

pub type NodeId = usize;

/// Send an observation left when `x[var] < cuts[var][cut]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitRule {
    pub var: usize,
    pub cut: usize,
}

impl SplitRule {
    pub fn goes_left(&self, data: &Dataset, cuts: &CutpointGrid, i: usize) -> bool {
        data.x(i, self.var) < cuts.value(self.var, self.cut)
    }

    /// Splits `obs` by the rule, keeping the input order on each side.
    pub fn partition(
        &self,
        obs: &[usize],
        data: &Dataset,
        cuts: &CutpointGrid,
    ) -> (Vec<usize>, Vec<usize>) {
        obs.iter().partition(|&&i| self.goes_left(data, cuts, i))
    }
}

/// Terminal-node parameters; `rho` is only meaningful for zero inflation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafParams {
    pub lambda: i64,
    pub k: i64,
    pub rho: f64,
}

impl LeafParams {
    pub fn new(lambda: i64, k: i64) -> Self {
        Self {
            lambda,
            k,
            rho: 0.0,
        }
    }
}

/// A terminal node: parameters, last auxiliaries, routed observations and a
/// memo of its mass function.
#[derive(Debug, Clone)]
pub struct Leaf {
    pub params: LeafParams,
    pub u: i64,
    pub r: i64,
    obs: Vec<usize>,
    memo: MassMemo,
}

impl PartialEq for Leaf {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.u == other.u
            && self.r == other.r
            && self.obs == other.obs
    }
}

impl Leaf {
    pub fn new(params: LeafParams, obs: Vec<usize>) -> Self {
        Self::with_memo(params, obs, MassMemo::new())
    }

    /// Leaf whose memo was already built for `obs` at its depth.
    pub fn with_memo(params: LeafParams, obs: Vec<usize>, memo: MassMemo) -> Self {
        Self {
            u: params.lambda,
            r: params.k,
            params,
            obs,
            memo,
        }
    }

    pub fn obs(&self) -> &[usize] {
        &self.obs
    }

    pub fn memo(&self) -> &MassMemo {
        &self.memo
    }

    /// Replaces the observations, with a memo built for them or an empty one.
    pub fn set_obs(&mut self, obs: Vec<usize>, memo: Option<MassMemo>) {
        self.obs = obs;
        self.memo = memo.unwrap_or_default();
    }

    /// Forgets memoized masses (after the active responses changed).
    pub fn clear_memo(&mut self) {
        self.memo.clear();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Leaf(Leaf),
    Internal {
        rule: SplitRule,
        left: NodeId,
        right: NodeId,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub parent: Option<NodeId>,
    pub depth: u32,
    pub kind: NodeKind,
}

/// One node of a preorder serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum EncodedNode {
    Internal {
        var: usize,
        cut: usize,
        value: f64,
    },
    Leaf {
        lambda: i64,
        k: i64,
        #[serde(skip_serializing_if = "Option::is_none")]
        rho: Option<f64>,
    },
}

/// Binary regression tree stored in an arena with a free list.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Option<Node>>,
    free: Vec<NodeId>,
    root: NodeId,
}

impl Tree {
    pub fn new(params: LeafParams, obs: Vec<usize>) -> Self {
        let root = Node {
            parent: None,
            depth: 0,
            kind: NodeKind::Leaf(Leaf::new(params, obs)),
        };
        Self {
            nodes: vec![Some(root)],
            free: Vec::new(),
            root: 0,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        self.nodes[id].as_ref().expect("live node")
    }

    fn node_mut(&mut self, id: NodeId) -> &mut Node {
        self.nodes[id].as_mut().expect("live node")
    }

    pub fn depth(&self, id: NodeId) -> u32 {
        self.node(id).depth
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        matches!(self.node(id).kind, NodeKind::Leaf(_))
    }

    pub fn leaf(&self, id: NodeId) -> Option<&Leaf> {
        match &self.node(id).kind {
            NodeKind::Leaf(l) => Some(l),
            NodeKind::Internal { .. } => None,
        }
    }

    pub fn leaf_mut(&mut self, id: NodeId) -> Option<&mut Leaf> {
        match &mut self.node_mut(id).kind {
            NodeKind::Leaf(l) => Some(l),
            NodeKind::Internal { .. } => None,
        }
    }

    pub fn rule(&self, id: NodeId) -> Option<SplitRule> {
        match self.node(id).kind {
            NodeKind::Internal { rule, .. } => Some(rule),
            NodeKind::Leaf(_) => None,
        }
    }

    pub fn children(&self, id: NodeId) -> Option<(NodeId, NodeId)> {
        match self.node(id).kind {
            NodeKind::Internal { left, right, .. } => Some((left, right)),
            NodeKind::Leaf(_) => None,
        }
    }

    /// Node ids in preorder (node, left subtree, right subtree).
    pub fn preorder(&self) -> Vec<NodeId> {
        self.preorder_from(self.root)
    }

    pub fn preorder_from(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![start];
        while let Some(id) = stack.pop() {
            out.push(id);
            if let Some((l, r)) = self.children(id) {
                stack.push(r);
                stack.push(l);
            }
        }
        out
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.preorder()
            .into_iter()
            .filter(|&id| self.is_leaf(id))
            .collect()
    }

    pub fn leaves_under(&self, id: NodeId) -> Vec<NodeId> {
        self.preorder_from(id)
            .into_iter()
            .filter(|&n| self.is_leaf(n))
            .collect()
    }

    pub fn internal_nodes(&self) -> Vec<NodeId> {
        self.preorder()
            .into_iter()
            .filter(|&id| !self.is_leaf(id))
            .collect()
    }

    /// Internal nodes whose two children are both leaves.
    pub fn nog_nodes(&self) -> Vec<NodeId> {
        self.internal_nodes()
            .into_iter()
            .filter(|&id| {
                let (l, r) = self.children(id).expect("internal");
                self.is_leaf(l) && self.is_leaf(r)
            })
            .collect()
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves().len()
    }

    pub fn n_internal(&self) -> usize {
        self.internal_nodes().len()
    }

    fn alloc(&mut self, node: Node) -> NodeId {
        match self.free.pop() {
            Some(id) => {
                self.nodes[id] = Some(node);
                id
            }
            None => {
                self.nodes.push(Some(node));
                self.nodes.len() - 1
            }
        }
    }

    /// Turns leaf `id` into an internal node with the given leaf children.
    pub fn split(
        &mut self,
        id: NodeId,
        rule: SplitRule,
        left: Leaf,
        right: Leaf,
    ) -> (NodeId, NodeId) {
        assert!(self.is_leaf(id), "only leaves can be split");
        let depth = self.depth(id) + 1;
        let l = self.alloc(Node {
            parent: Some(id),
            depth,
            kind: NodeKind::Leaf(left),
        });
        let r = self.alloc(Node {
            parent: Some(id),
            depth,
            kind: NodeKind::Leaf(right),
        });
        self.node_mut(id).kind = NodeKind::Internal {
            rule,
            left: l,
            right: r,
        };
        (l, r)
    }

    /// Replaces a node whose children are both leaves by a single leaf.
    pub fn collapse(&mut self, id: NodeId, leaf: Leaf) {
        let (l, r) = self.children(id).expect("internal node");
        assert!(
            self.is_leaf(l) && self.is_leaf(r),
            "collapse needs two leaf children"
        );
        self.nodes[l] = None;
        self.nodes[r] = None;
        self.free.push(r);
        self.free.push(l);
        self.node_mut(id).kind = NodeKind::Leaf(leaf);
    }

    pub fn set_rule(&mut self, id: NodeId, new_rule: SplitRule) {
        match &mut self.node_mut(id).kind {
            NodeKind::Internal { rule, .. } => *rule = new_rule,
            NodeKind::Leaf(_) => panic!("leaves carry no rule"),
        }
    }

    /// The leaf an observation routes to.
    pub fn route(&self, data: &Dataset, cuts: &CutpointGrid, i: usize) -> NodeId {
        let mut id = self.root;
        while let NodeKind::Internal { rule, left, right } = self.node(id).kind {
            id = if rule.goes_left(data, cuts, i) {
                left
            } else {
                right
            };
        }
        id
    }

    /// Routes `obs` from `start` and returns each leaf below it with its
    /// observations, in preorder.
    pub fn route_subtree(
        &self,
        start: NodeId,
        obs: &[usize],
        data: &Dataset,
        cuts: &CutpointGrid,
    ) -> Vec<(NodeId, Vec<usize>)> {
        let mut out = Vec::new();
        let mut stack = vec![(start, obs.to_vec())];
        while let Some((id, sub)) = stack.pop() {
            match self.node(id).kind {
                NodeKind::Leaf(_) => out.push((id, sub)),
                NodeKind::Internal { rule, left, right } => {
                    let (lo, ro) = rule.partition(&sub, data, cuts);
                    stack.push((right, ro));
                    stack.push((left, lo));
                }
            }
        }
        out
    }

    /// All observations in the leaves under `id`, in ascending order.
    pub fn obs_under(&self, id: NodeId) -> Vec<usize> {
        let leaves = self.leaves_under(id);
        let obs = || {
            leaves
                .iter()
                .flat_map(|&l| self.leaf(l).expect("leaf").obs().iter().copied())
        };
        // Leaves hold disjoint index sets, so a membership mask sorts in
        // linear time.
        let Some(max) = obs().max() else {
            return Vec::new();
        };
        let mut member = vec![false; max + 1];
        obs().for_each(|i| member[i] = true);
        member
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }

    /// Whether routing every observation from the root reproduces the stored
    /// leaf membership.
    pub fn partition_is_coherent(&self, data: &Dataset, cuts: &CutpointGrid) -> bool {
        let mut expected: std::collections::HashMap<NodeId, Vec<usize>> = Default::default();
        for i in 0..data.n() {
            expected
                .entry(self.route(data, cuts, i))
                .or_default()
                .push(i);
        }
        self.leaves().into_iter().all(|id| {
            let mut stored = self.leaf(id).expect("leaf").obs().to_vec();
            stored.sort_unstable();
            stored == expected.remove(&id).unwrap_or_default()
        }) && expected.is_empty()
    }

    /// Fitted location for every observation.
    pub fn fitted_lambda(&self, n: usize) -> Vec<i64> {
        let mut g = vec![0; n];
        for id in self.leaves() {
            let leaf = self.leaf(id).expect("leaf");
            for &i in leaf.obs() {
                g[i] = leaf.params.lambda;
            }
        }
        g
    }

    pub fn encode(&self, cuts: &CutpointGrid, with_rho: bool) -> Vec<EncodedNode> {
        self.preorder()
            .into_iter()
            .map(|id| match &self.node(id).kind {
                NodeKind::Internal { rule, .. } => EncodedNode::Internal {
                    var: rule.var,
                    cut: rule.cut,
                    value: cuts.value(rule.var, rule.cut),
                },
                NodeKind::Leaf(l) => EncodedNode::Leaf {
                    lambda: l.params.lambda,
                    k: l.params.k,
                    rho: with_rho.then_some(l.params.rho),
                },
            })
            .collect()
    }

    /// Topology and rules, ignoring leaf parameters, e.g. `(0:24 L (1:24 L L))`.
    pub fn structure_key(&self) -> String {
        fn walk(tree: &Tree, id: NodeId, out: &mut String) {
            match tree.node(id).kind {
                NodeKind::Leaf(_) => out.push('L'),
                NodeKind::Internal { rule, left, right } => {
                    out.push_str(&format!("({}:{} ", rule.var, rule.cut));
                    walk(tree, left, out);
                    out.push(' ');
                    walk(tree, right, out);
                    out.push(')');
                }
            }
        }
        let mut s = String::new();
        walk(self, self.root, &mut s);
        s
    }

    /// Distinct covariates used by internal nodes, ascending.
    pub fn split_vars(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = self
            .internal_nodes()
            .iter()
            .filter_map(|&id| self.rule(id))
            .map(|r| r.var)
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }
}
