//! Batch informed tree search over an edge-implicit random geometric graph.
//!
//! Samples and tree vertices live in one arena. A node is a tree vertex when
//! `in_tree` is set, otherwise it belongs to the unconnected set `X_uc`.
//! Edges are never stored; candidates are generated by radius queries when a
//! vertex is expanded.

use crate::cspace::{distance, Configuration, ContractError, Scenario};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub q: Configuration,
    /// Euclidean distance from the start (admissible cost-to-come).
    pub g_hat: f64,
    /// Euclidean distance to the goal (admissible cost-to-go).
    pub h_hat: f64,
    pub in_tree: bool,
    pub parent: Option<NodeId>,
    /// Cost of the edge from `parent`, penalty included.
    pub edge_cost: f64,
    /// Cost-to-come through the tree; infinite for unconnected samples.
    pub g: f64,
    pub children: Vec<NodeId>,
    /// Batch in which this node (re)joined the unconnected set.
    pub batch: u32,
    /// Batch and cost-to-come at the last expansion.
    expansion: Option<(u32, f64)>,
    queued: bool,
}

impl Node {
    fn sample(q: Configuration, scenario: &Scenario, batch: u32) -> Self {
        Node {
            g_hat: distance(&q, &scenario.start),
            h_hat: distance(&q, &scenario.goal),
            q,
            in_tree: false,
            parent: None,
            edge_cost: 0.0,
            g: f64::INFINITY,
            children: Vec::new(),
            batch,
            expansion: None,
            queued: false,
        }
    }

    pub fn f_hat(&self) -> f64 {
        self.g_hat + self.h_hat
    }
}

/// Cost bookkeeping of a planning run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostLedger {
    /// Bound used by the search; may include penalized edges.
    pub c_i: f64,
    /// Best feasible cost found so far.
    pub c_best: f64,
    /// Penalty unit: three times the bounds diagonal.
    pub c_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCandidate {
    pub source: NodeId,
    pub target: NodeId,
    /// Euclidean edge length.
    pub c_hat: f64,
    pub queue_key: f64,
}

/// Min-queue entry ordered by `(key, seq)`.
#[derive(Debug, Clone, Copy)]
struct Entry<T> {
    key: f64,
    seq: u64,
    item: T,
}

impl<T> PartialEq for Entry<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl<T> Eq for Entry<T> {}

impl<T> PartialOrd for Entry<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl<T> Ord for Entry<T> {
    // Reversed so that `BinaryHeap` pops the smallest key first.
    fn cmp(&self, o: &Self) -> Ordering {
        o.key.total_cmp(&self.key).then_with(|| o.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone)]
pub struct PlannerState {
    nodes: Vec<Node>,
    start: NodeId,
    goal: NodeId,
    vertex_queue: BinaryHeap<Entry<NodeId>>,
    edge_queue: BinaryHeap<Entry<EdgeCandidate>>,
    seq: u64,
    batch: u32,
}

/// Tree `{x_start}`, unconnected set `{x_goal}`, both costs infinite. Both
/// queues start empty so that the first iteration adds a batch.
pub fn init_state(scenario: &Scenario) -> (PlannerState, CostLedger) {
    let mut start = Node::sample(scenario.start.clone(), scenario, 0);
    start.in_tree = true;
    start.g = 0.0;
    let goal = Node::sample(scenario.goal.clone(), scenario, 0);
    let state = PlannerState {
        nodes: vec![start, goal],
        start: 0,
        goal: 1,
        vertex_queue: BinaryHeap::new(),
        edge_queue: BinaryHeap::new(),
        seq: 0,
        batch: 0,
    };
    let ledger = CostLedger {
        c_i: f64::INFINITY,
        c_best: f64::INFINITY,
        c_max: scenario.max_cost(),
    };
    (state, ledger)
}

impl PlannerState {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    pub fn goal(&self) -> NodeId {
        self.goal
    }

    pub fn goal_vertex(&self) -> Option<NodeId> {
        self.nodes[self.goal].in_tree.then_some(self.goal)
    }

    pub fn batch(&self) -> u32 {
        self.batch
    }

    pub fn vertices(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].in_tree)
    }

    pub fn unconnected(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&i| !self.nodes[i].in_tree)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices().count()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Cost-to-come of the goal through the tree (`inf` when unconnected).
    pub fn goal_cost(&self) -> f64 {
        self.nodes[self.goal].g
    }

    fn next_seq(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }

    fn push_vertex(&mut self, id: NodeId) {
        let seq = self.next_seq();
        let node = &mut self.nodes[id];
        node.queued = true;
        self.vertex_queue.push(Entry {
            key: node.g + node.h_hat,
            seq,
            item: id,
        });
    }

    fn push_edge(&mut self, e: EdgeCandidate) {
        let seq = self.next_seq();
        self.edge_queue.push(Entry {
            key: e.queue_key,
            seq,
            item: e,
        });
    }

    fn vertex_entry_live(&self, e: &Entry<NodeId>) -> bool {
        let n = &self.nodes[e.item];
        n.in_tree && n.queued && e.key == n.g + n.h_hat
    }

    fn edge_entry_live(&self, e: &EdgeCandidate) -> bool {
        let src = &self.nodes[e.source];
        let dst = &self.nodes[e.target];
        src.in_tree && !(dst.in_tree && dst.parent == Some(e.source))
    }

    /// Adds a batch of unconnected samples.
    pub fn add_samples(&mut self, scenario: &Scenario, samples: Vec<Configuration>) {
        self.batch += 1;
        let batch = self.batch;
        self.nodes
            .extend(samples.into_iter().map(|q| Node::sample(q, scenario, batch)));
    }

    /// `Q_V <- V`.
    pub fn enqueue_all_vertices(&mut self) {
        let ids: Vec<NodeId> = self.vertices().collect();
        for id in ids {
            self.push_vertex(id);
        }
    }

    /// Smallest key in the vertex queue, `inf` when empty.
    pub fn best_vertex_value(&mut self) -> f64 {
        while let Some(top) = self.vertex_queue.peek() {
            if self.vertex_entry_live(top) {
                return top.key;
            }
            self.vertex_queue.pop();
        }
        f64::INFINITY
    }

    /// Smallest key in the edge queue, `inf` when empty.
    pub fn best_edge_value(&mut self) -> f64 {
        while let Some(top) = self.edge_queue.peek() {
            if self.edge_entry_live(&top.item) {
                return top.key;
            }
            self.edge_queue.pop();
        }
        f64::INFINITY
    }

    pub fn vertex_queue_is_empty(&mut self) -> bool {
        self.best_vertex_value() == f64::INFINITY && self.vertex_queue.is_empty()
    }

    pub fn edge_queue_is_empty(&mut self) -> bool {
        self.best_edge_value() == f64::INFINITY && self.edge_queue.is_empty()
    }

    /// Keys of all live edges currently queued.
    pub fn edge_queue_keys(&self) -> Vec<f64> {
        self.edge_queue
            .iter()
            .filter(|e| self.edge_entry_live(&e.item))
            .map(|e| e.key)
            .collect()
    }

    /// Pops the best vertex and queues every edge out of it that could
    /// improve the current solution.
    ///
    /// A vertex expanded in an earlier batch at the same cost-to-come only
    /// considers samples that arrived since, and no rewiring targets.
    pub fn expand_next_vertex(&mut self, ledger: &CostLedger, radius: f64) -> Result<NodeId, ContractError> {
        if self.best_vertex_value() == f64::INFINITY {
            return Err(ContractError::Violation("expand from an empty vertex queue".into()));
        }
        let v = self.vertex_queue.pop().expect("non-empty after peek").item;
        self.nodes[v].queued = false;
        let c_i = ledger.c_i;
        let (g_v, f_v) = {
            let n = &self.nodes[v];
            (n.g, n.g + n.h_hat)
        };
        if f_v >= c_i {
            return Ok(v);
        }
        let previous = self.nodes[v].expansion;
        let full = previous.is_none_or(|(_, g0)| g_v < g0);
        let seen_batch = previous.map_or(0, |(b, _)| b);

        let mut found = Vec::new();
        let qv = &self.nodes[v].q;
        for (x, node) in self.nodes.iter().enumerate() {
            if x == v || x == self.start {
                continue;
            }
            if !node.in_tree && !full && node.batch <= seen_batch {
                continue;
            }
            if node.in_tree && !full {
                continue;
            }
            let c_hat = distance(qv, &node.q);
            if c_hat > radius {
                continue;
            }
            let key = g_v + c_hat + node.h_hat;
            if key >= c_i {
                continue;
            }
            if node.in_tree && (node.parent == Some(v) || g_v + c_hat >= node.g) {
                continue;
            }
            found.push(EdgeCandidate {
                source: v,
                target: x,
                c_hat,
                queue_key: key,
            });
        }
        for e in found {
            self.push_edge(e);
        }
        self.nodes[v].expansion = Some((self.batch, g_v));
        Ok(v)
    }

    /// Empties both queues.
    pub fn clear_queues(&mut self) {
        for node in &mut self.nodes {
            node.queued = false;
        }
        self.vertex_queue.clear();
        self.edge_queue.clear();
    }

    /// Pops the best live edge.
    pub fn pop_best_edge(&mut self) -> Option<EdgeCandidate> {
        while let Some(e) = self.edge_queue.pop() {
            if self.edge_entry_live(&e.item) {
                return Some(e.item);
            }
        }
        None
    }

    /// Admissible check with heuristic cost-to-come: `g^(v) + c^(e) + h^(x) < c_i`.
    pub fn edge_addition_helps(&self, ledger: &CostLedger, e: &EdgeCandidate) -> bool {
        self.nodes[e.source].g_hat + e.c_hat + self.nodes[e.target].h_hat < ledger.c_i
    }

    /// Whether an edge of cost `c_edge` improves both the solution bound and,
    /// for tree targets, the target's cost-to-come.
    pub fn edge_improves_cost(&self, ledger: &CostLedger, e: &EdgeCandidate, c_edge: f64) -> bool {
        let src = &self.nodes[e.source];
        let dst = &self.nodes[e.target];
        let g_new = src.g + c_edge;
        g_new + dst.h_hat < ledger.c_i && (!dst.in_tree || g_new < dst.g)
    }

    /// Connects an unconnected target, or rewires a tree target and
    /// propagates the cost change to its descendants.
    pub fn add_edge_to_tree(&mut self, e: &EdgeCandidate, c_edge: f64) {
        let (v, x) = (e.source, e.target);
        let g_new = self.nodes[v].g + c_edge;
        if self.nodes[x].in_tree {
            if let Some(old) = self.nodes[x].parent {
                self.nodes[old].children.retain(|&c| c != x);
            }
            let node = &mut self.nodes[x];
            node.parent = Some(v);
            node.edge_cost = c_edge;
            node.g = g_new;
            self.nodes[v].children.push(x);
            self.propagate_costs(x);
        } else {
            let node = &mut self.nodes[x];
            node.in_tree = true;
            node.parent = Some(v);
            node.edge_cost = c_edge;
            node.g = g_new;
            node.expansion = None;
            self.nodes[v].children.push(x);
            self.push_vertex(x);
        }
    }

    fn propagate_costs(&mut self, root: NodeId) {
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            if self.nodes[u].queued {
                self.push_vertex(u);
            }
            let g_u = self.nodes[u].g;
            let children = self.nodes[u].children.clone();
            for c in children {
                let node = &mut self.nodes[c];
                node.g = g_u + node.edge_cost;
                stack.push(c);
            }
        }
    }

    /// Configurations from start to goal along the tree.
    pub fn get_best_path(&self) -> Option<Vec<Configuration>> {
        let goal = self.goal_vertex()?;
        let mut path = vec![self.nodes[goal].q.clone()];
        let mut cur = goal;
        while let Some(p) = self.nodes[cur].parent {
            path.push(self.nodes[p].q.clone());
            cur = p;
        }
        path.reverse();
        Some(path)
    }

    /// Removes nodes that cannot lie on a path cheaper than `c_i`. Clears
    /// both queues and renumbers the surviving nodes.
    pub(crate) fn prune(&mut self, c_i: f64) {
        if !c_i.is_finite() {
            return;
        }
        let n = self.nodes.len();
        let removed: Vec<bool> = (0..n)
            .map(|i| i != self.start && i != self.goal && self.nodes[i].f_hat() > c_i)
            .collect();
        if !removed.iter().any(|&r| r) {
            return;
        }
        let mut reachable = vec![false; n];
        let mut stack = vec![self.start];
        while let Some(u) = stack.pop() {
            reachable[u] = true;
            stack.extend(self.nodes[u].children.iter().copied().filter(|&c| !removed[c]));
        }

        let mut remap = vec![usize::MAX; n];
        let mut kept = Vec::with_capacity(n);
        let demoted_batch = self.batch + 1;
        for (i, mut node) in std::mem::take(&mut self.nodes).into_iter().enumerate() {
            if removed[i] {
                continue;
            }
            if node.in_tree && !reachable[i] {
                node.in_tree = false;
                node.parent = None;
                node.edge_cost = 0.0;
                node.g = f64::INFINITY;
                node.children.clear();
                node.expansion = None;
                node.batch = demoted_batch;
            }
            node.queued = false;
            remap[i] = kept.len();
            kept.push(node);
        }
        for node in &mut kept {
            node.parent = node.parent.map(|p| remap[p]);
            node.children = node
                .children
                .iter()
                .filter(|&&c| remap[c] != usize::MAX && reachable[c])
                .map(|&c| remap[c])
                .collect();
        }
        self.nodes = kept;
        self.start = remap[self.start];
        self.goal = remap[self.goal];
        self.vertex_queue.clear();
        self.edge_queue.clear();
    }

    /// Full scan of the tree invariants: a single root with zero cost,
    /// acyclic parent links, consistent child lists and
    /// `g(v) = g(parent) + edge_cost`.
    pub fn check_invariants(&self) -> Result<(), String> {
        let root = &self.nodes[self.start];
        if !root.in_tree || root.parent.is_some() || root.g != 0.0 {
            return Err("start must be the unique zero-cost root".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if !node.in_tree {
                if node.parent.is_some() || !node.children.is_empty() || node.g.is_finite() {
                    return Err(format!("unconnected node {i} carries tree data"));
                }
                continue;
            }
            if i == self.start {
                continue;
            }
            let p = node.parent.ok_or_else(|| format!("vertex {i} has no parent (second root)"))?;
            let parent = &self.nodes[p];
            if !parent.in_tree || !parent.children.contains(&i) {
                return Err(format!("vertex {i}: parent {p} does not list it"));
            }
            let expected = parent.g + node.edge_cost;
            if (node.g - expected).abs() > 1e-12 * (1.0 + expected.abs()) {
                return Err(format!("vertex {i}: g = {} but parent gives {expected}", node.g));
            }
            let mut cur = i;
            for _ in 0..=self.nodes.len() {
                match self.nodes[cur].parent {
                    Some(p) => cur = p,
                    None => break,
                }
            }
            if cur != self.start {
                return Err(format!("vertex {i} does not reach the root (cycle)"));
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                if self.nodes[c].parent != Some(i) {
                    return Err(format!("child list of {i} is stale"));
                }
            }
        }
        Ok(())
    }
}
