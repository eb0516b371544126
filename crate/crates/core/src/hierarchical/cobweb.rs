//! Incremental concept formation (COBWEB with the Classit numeric term).
//!
//! Each node keeps symbol counts for nominal attributes and a running
//! mean/M2 for numeric ones. A node's "score" is the expected number of
//! correctly guessed attribute values, Σ P(v|C)² for nominal and
//! 1/(2√π σ) for numeric with σ floored at the acuity, so category utility
//! over a partition is `(1/k) Σ P(C) (score(C) − score(parent))`.

use std::f64::consts::PI;

use rand::seq::SliceRandom;

use crate::assignment::{ClusterAssignment, Label};
use crate::data::{Dataset, Instance, Value};
use crate::error::{Error, Result};
use crate::format::sig9;
use crate::rng::{stream, Stream};

pub const DEFAULT_ACUITY: f64 = 1.0;
pub const DEFAULT_CUTOFF: f64 = 0.00282;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_VISIT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum AttrStats {
    /// Symbol counts and their sum of squares.
    Nominal { counts: Vec<u64>, sumsq: u64 },
    /// Running mean and sum of squared deviations.
    Numeric { mean: f64, m2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CobwebNode {
    pub count: u64,
    /// One entry per modelled attribute, in the tree's attribute order.
    pub stats: Vec<AttrStats>,
    pub children: Vec<CobwebNode>,
    /// Rows absorbed by this node; populated for leaves only.
    pub members: Vec<usize>,
}

fn numeric_term(var: f64, acuity: f64) -> f64 {
    1.0 / (2.0 * PI.sqrt() * var.max(0.0).sqrt().max(acuity))
}

impl CobwebNode {
    /// Empty node over a schema restricted to `attrs`.
    pub fn empty(d: &Dataset, attrs: &[usize]) -> Self {
        let stats = attrs
            .iter()
            .map(|&a| match d.schema()[a].domain() {
                Some(dom) => AttrStats::Nominal {
                    counts: vec![0; dom.len()],
                    sumsq: 0,
                },
                None => AttrStats::Numeric { mean: 0.0, m2: 0.0 },
            })
            .collect();
        CobwebNode {
            count: 0,
            stats,
            children: Vec::new(),
            members: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn add(&mut self, x: &Instance, attrs: &[usize]) {
        self.count += 1;
        let n = self.count as f64;
        for (s, &a) in self.stats.iter_mut().zip(attrs) {
            match (s, x.values[a]) {
                (AttrStats::Nominal { counts, sumsq }, Value::Nominal(v)) => {
                    *sumsq += 2 * counts[v] + 1;
                    counts[v] += 1;
                }
                (AttrStats::Numeric { mean, m2 }, Value::Numeric(v)) => {
                    let delta = v - *mean;
                    *mean += delta / n;
                    *m2 += delta * (v - *mean);
                }
                _ => unreachable!("instance does not match schema"),
            }
        }
    }

    fn merged(a: &CobwebNode, b: &CobwebNode) -> CobwebNode {
        let (na, nb) = (a.count as f64, b.count as f64);
        let n = na + nb;
        let stats = a
            .stats
            .iter()
            .zip(&b.stats)
            .map(|(sa, sb)| match (sa, sb) {
                (AttrStats::Nominal { counts: ca, .. }, AttrStats::Nominal { counts: cb, .. }) => {
                    let counts: Vec<u64> = ca.iter().zip(cb).map(|(x, y)| x + y).collect();
                    let sumsq = counts.iter().map(|c| c * c).sum();
                    AttrStats::Nominal { counts, sumsq }
                }
                (AttrStats::Numeric { mean: ma, m2: qa }, AttrStats::Numeric { mean: mb, m2: qb }) => {
                    if n == 0.0 {
                        AttrStats::Numeric { mean: 0.0, m2: 0.0 }
                    } else {
                        let delta = mb - ma;
                        AttrStats::Numeric {
                            mean: ma + delta * nb / n,
                            m2: qa + qb + delta * delta * na * nb / n,
                        }
                    }
                }
                _ => unreachable!("mismatched node statistics"),
            })
            .collect();
        CobwebNode {
            count: a.count + b.count,
            stats,
            children: vec![a.clone(), b.clone()],
            members: Vec::new(),
        }
    }

    /// Score of this node, optionally as if `plus` had been added.
    fn score(&self, plus: Option<&Instance>, attrs: &[usize], acuity: f64) -> f64 {
        let n = self.count + u64::from(plus.is_some());
        if n == 0 {
            return 0.0;
        }
        let nf = n as f64;
        let mut total = 0.0;
        for (s, &a) in self.stats.iter().zip(attrs) {
            match s {
                AttrStats::Nominal { counts, sumsq } => {
                    let extra = match plus {
                        Some(x) => 2 * counts[x.nominal(a)] + 1,
                        None => 0,
                    };
                    total += (sumsq + extra) as f64 / (nf * nf);
                }
                AttrStats::Numeric { mean, m2 } => {
                    let var = match plus {
                        Some(x) => {
                            let v = x.numeric(a);
                            let delta = v - mean;
                            let m = mean + delta / nf;
                            (m2 + delta * (v - m)) / nf
                        }
                        None => m2 / nf,
                    };
                    total += numeric_term(var, acuity);
                }
            }
        }
        total
    }

    /// Mean of a numeric attribute at position `j` of the tree's attributes.
    pub fn mean(&self, j: usize) -> Option<f64> {
        match &self.stats[j] {
            AttrStats::Numeric { mean, .. } => Some(*mean),
            AttrStats::Nominal { .. } => None,
        }
    }

    /// Population std of a numeric attribute, unfloored.
    pub fn std(&self, j: usize) -> Option<f64> {
        match &self.stats[j] {
            AttrStats::Numeric { m2, .. } if self.count > 0 => Some((m2 / self.count as f64).max(0.0).sqrt()),
            AttrStats::Numeric { .. } => Some(0.0),
            AttrStats::Nominal { .. } => None,
        }
    }
}

/// Category utility of `children` as a partition of `parent`.
pub fn category_utility(
    parent: &CobwebNode,
    children: &[CobwebNode],
    attrs: &[usize],
    acuity: f64,
) -> Result<f64> {
    if children.is_empty() {
        return Err(Error::InvalidParameter("category utility needs at least one child".into()));
    }
    let total: u64 = children.iter().map(|c| c.count).sum();
    if total != parent.count || parent.count == 0 {
        return Err(Error::InvalidParameter(format!(
            "children hold {total} instances but parent holds {}",
            parent.count
        )));
    }
    let n = parent.count as f64;
    let base = parent.score(None, attrs, acuity);
    let sum: f64 = children
        .iter()
        .map(|c| c.count as f64 / n * (c.score(None, attrs, acuity) - base))
        .sum();
    Ok(sum / children.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Operator {
    Host,
    NewLeaf,
    Merge,
    Split,
}

/// A concept tree plus the settings it was grown with.
#[derive(Debug, Clone, PartialEq)]
pub struct CobwebTree {
    pub root: CobwebNode,
    /// Modelled attribute positions (the class attribute is excluded).
    pub attrs: Vec<usize>,
    pub acuity: f64,
    pub cutoff: f64,
    pub visit_budget: u64,
    pub visits: u64,
}

impl CobwebTree {
    pub fn new(d: &Dataset, acuity: f64, cutoff: f64) -> Result<Self> {
        if !(acuity > 0.0 && acuity.is_finite()) {
            return Err(Error::InvalidParameter(format!("acuity must be positive, got {acuity}")));
        }
        if !(cutoff >= 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidParameter(format!("cutoff must be nonnegative, got {cutoff}")));
        }
        let attrs = d.active_attributes();
        Ok(CobwebTree {
            root: CobwebNode::empty(d, &attrs),
            attrs,
            acuity,
            cutoff,
            visit_budget: DEFAULT_VISIT_BUDGET,
            visits: 0,
        })
    }

    /// Inserts instance `x`, recording it under identifier `row`.
    pub fn insert(&mut self, x: &Instance, row: usize) -> Result<()> {
        let ctx = Ctx {
            attrs: &self.attrs,
            acuity: self.acuity,
            cutoff: self.cutoff,
            budget: self.visit_budget,
        };
        ctx.insert(&mut self.root, x, row, &mut self.visits)
    }

    pub fn leaves(&self) -> Vec<&CobwebNode> {
        fn walk<'a>(n: &'a CobwebNode, out: &mut Vec<&'a CobwebNode>) {
            if n.is_leaf() {
                out.push(n);
            } else {
                for c in &n.children {
                    walk(c, out);
                }
            }
        }
        let mut out = Vec::new();
        if self.root.count > 0 {
            walk(&self.root, &mut out);
        }
        out
    }

    /// Leaf membership for rows `0..n`, leaves numbered left to right.
    pub fn assignment(&self, n: usize) -> Result<ClusterAssignment> {
        let mut labels = vec![Label::Undefined; n];
        let leaves = self.leaves();
        for (i, leaf) in leaves.iter().enumerate() {
            for &r in &leaf.members {
                labels[r] = Label::Cluster(i);
            }
        }
        if labels.contains(&Label::Undefined) {
            return Err(Error::InvalidParameter("tree does not cover every row".into()));
        }
        ClusterAssignment::with_k(labels, leaves.len())
    }

    /// Indented dump, one node per line.
    pub fn dump(&self, d: &Dataset) -> String {
        let mut out = format!(
            "# steelclust cobweb tree\nversion=1\nacuity={}\ncutoff={}\nleaves={}\n",
            sig9(self.acuity),
            sig9(self.cutoff),
            self.leaves().len()
        );
        let mut leaf = 0;
        self.dump_node(d, &self.root, 0, &mut leaf, &mut out);
        out
    }

    fn dump_node(&self, d: &Dataset, n: &CobwebNode, depth: usize, leaf: &mut usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!("node count={}", n.count));
        if n.is_leaf() && n.count > 0 {
            out.push_str(&format!(" leaf={}", *leaf));
            *leaf += 1;
        }
        for (j, (&a, s)) in self.attrs.iter().zip(&n.stats).enumerate() {
            let name = &d.schema()[a].name;
            match s {
                AttrStats::Nominal { counts, .. } => {
                    let mut mode = 0;
                    for (i, &c) in counts.iter().enumerate() {
                        if c > counts[mode] {
                            mode = i;
                        }
                    }
                    if n.count > 0 && !counts.is_empty() {
                        let p = counts[mode] as f64 / n.count as f64;
                        out.push_str(&format!(
                            " {name}={}({})",
                            d.render_value(a, Value::Nominal(mode)),
                            sig9(p)
                        ));
                    }
                }
                AttrStats::Numeric { mean, .. } => {
                    out.push_str(&format!(
                        " {name}={}±{}",
                        sig9(*mean),
                        sig9(n.std(j).unwrap_or(0.0))
                    ));
                }
            }
        }
        out.push('\n');
        for c in &n.children {
            self.dump_node(d, c, depth + 1, leaf, out);
        }
    }
}

struct Ctx<'a> {
    attrs: &'a [usize],
    acuity: f64,
    cutoff: f64,
    budget: u64,
}

impl Ctx<'_> {
    fn visit(&self, visits: &mut u64) -> Result<()> {
        *visits += 1;
        if *visits > self.budget {
            Err(Error::BudgetExhausted(self.budget))
        } else {
            Ok(())
        }
    }

    fn singleton(&self, template: &CobwebNode, x: &Instance, row: usize) -> CobwebNode {
        let mut leaf = CobwebNode {
            count: 0,
            stats: template
                .stats
                .iter()
                .map(|s| match s {
                    AttrStats::Nominal { counts, .. } => AttrStats::Nominal {
                        counts: vec![0; counts.len()],
                        sumsq: 0,
                    },
                    AttrStats::Numeric { .. } => AttrStats::Numeric { mean: 0.0, m2: 0.0 },
                })
                .collect(),
            children: Vec::new(),
            members: vec![row],
        };
        leaf.add(x, self.attrs);
        leaf
    }

    fn insert(&self, node: &mut CobwebNode, x: &Instance, row: usize, visits: &mut u64) -> Result<()> {
        self.visit(visits)?;
        if node.is_leaf() {
            return self.insert_at_fringe(node, x, row);
        }
        node.add(x, self.attrs);
        loop {
            let op = self.choose(node, x);
            match op {
                (Operator::Host, best, _) => {
                    return self.insert(&mut node.children[best], x, row, visits);
                }
                (Operator::NewLeaf, _, _) => {
                    let leaf = self.singleton(node, x, row);
                    node.children.push(leaf);
                    return Ok(());
                }
                (Operator::Merge, best, second) => {
                    let (lo, hi) = (best.min(second), best.max(second));
                    let b = node.children.remove(hi);
                    let a = node.children.remove(lo);
                    node.children.insert(lo, CobwebNode::merged(&a, &b));
                    return self.insert(&mut node.children[lo], x, row, visits);
                }
                (Operator::Split, best, _) => {
                    self.visit(visits)?;
                    let host = node.children.remove(best);
                    for (i, c) in host.children.into_iter().enumerate() {
                        node.children.insert(best + i, c);
                    }
                }
            }
        }
    }

    /// A leaf receiving a new instance either absorbs it or becomes the
    /// parent of a copy of itself plus a singleton, whichever the cutoff
    /// allows.
    fn insert_at_fringe(&self, leaf: &mut CobwebNode, x: &Instance, row: usize) -> Result<()> {
        if leaf.count == 0 {
            leaf.add(x, self.attrs);
            leaf.members.push(row);
            return Ok(());
        }
        let old = leaf.clone();
        let single = self.singleton(leaf, x, row);
        let mut parent = leaf.clone();
        parent.add(x, self.attrs);
        let cu = category_utility(&parent, &[old.clone(), single.clone()], self.attrs, self.acuity)?;
        if cu < self.cutoff {
            leaf.add(x, self.attrs);
            leaf.members.push(row);
        } else {
            parent.members.clear();
            parent.children = vec![old, single];
            *leaf = parent;
        }
        Ok(())
    }

    /// Picks the CU-maximizing operator at an internal node whose stats
    /// already include `x`. Returns (operator, best host, second host).
    fn choose(&self, node: &CobwebNode, x: &Instance) -> (Operator, usize, usize) {
        let (attrs, acuity) = (self.attrs, self.acuity);
        let n = node.count as f64;
        let k = node.children.len();
        let parent = node.score(None, attrs, acuity);
        let plain: Vec<f64> = node
            .children
            .iter()
            .map(|c| c.count as f64 / n * c.score(None, attrs, acuity))
            .collect();
        let sum: f64 = plain.iter().sum();

        let host_cu: Vec<f64> = node
            .children
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let with = (c.count + 1) as f64 / n * c.score(Some(x), attrs, acuity);
                (sum - plain[i] + with - parent) / k as f64
            })
            .collect();
        let mut best = 0;
        let mut second = usize::MAX;
        for i in 1..k {
            if host_cu[i] > host_cu[best] {
                second = best;
                best = i;
            } else if second == usize::MAX || host_cu[i] > host_cu[second] {
                second = i;
            }
        }
        let mut choice = (Operator::Host, host_cu[best]);

        let single = self.singleton_score(node);
        let leaf_cu = (sum + single / n - parent) / (k + 1) as f64;
        if leaf_cu > choice.1 {
            choice = (Operator::NewLeaf, leaf_cu);
        }

        if k > 2 {
            let m = CobwebNode::merged(&node.children[best], &node.children[second]);
            let with = (m.count + 1) as f64 / n * m.score(Some(x), attrs, acuity);
            let merge_cu = (sum - plain[best] - plain[second] + with - parent) / (k - 1) as f64;
            if merge_cu > choice.1 {
                choice = (Operator::Merge, merge_cu);
            }
        }

        let host = &node.children[best];
        if !host.is_leaf() {
            let kk = k - 1 + host.children.len();
            let grand: Vec<f64> = host
                .children
                .iter()
                .map(|c| c.count as f64 / n * c.score(None, attrs, acuity))
                .collect();
            let gsum: f64 = sum - plain[best] + grand.iter().sum::<f64>();
            let mut split_cu = f64::NEG_INFINITY;
            for (j, c) in host.children.iter().enumerate() {
                let with = (c.count + 1) as f64 / n * c.score(Some(x), attrs, acuity);
                split_cu = split_cu.max((gsum - grand[j] + with - parent) / kk as f64);
            }
            for (i, c) in node.children.iter().enumerate() {
                if i != best {
                    let with = (c.count + 1) as f64 / n * c.score(Some(x), attrs, acuity);
                    split_cu = split_cu.max((gsum - plain[i] + with - parent) / kk as f64);
                }
            }
            if split_cu > choice.1 {
                choice = (Operator::Split, split_cu);
            }
        }
        debug_assert!(host_cu.iter().all(|&h| h <= choice.1) && leaf_cu <= choice.1);
        (choice.0, best, second)
    }

    /// Score of a one-instance node: every nominal value is certain and every
    /// numeric σ sits at the acuity floor.
    fn singleton_score(&self, template: &CobwebNode) -> f64 {
        template
            .stats
            .iter()
            .map(|s| match s {
                AttrStats::Nominal { .. } => 1.0,
                AttrStats::Numeric { .. } => numeric_term(0.0, self.acuity),
            })
            .sum()
    }
}

/// Shuffles the rows with `seed`, then inserts them one at a time.
pub fn cobweb_fit(d: &Dataset, acuity: f64, cutoff: f64, seed: u64) -> Result<(CobwebTree, ClusterAssignment)> {
    cobweb_fit_with_budget(d, acuity, cutoff, seed, DEFAULT_VISIT_BUDGET)
}

pub fn cobweb_fit_with_budget(
    d: &Dataset,
    acuity: f64,
    cutoff: f64,
    seed: u64,
    budget: u64,
) -> Result<(CobwebTree, ClusterAssignment)> {
    let mut tree = CobwebTree::new(d, acuity, cutoff)?;
    tree.visit_budget = budget;
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.shuffle(&mut stream(seed, Stream::Cobweb));
    for &r in &order {
        tree.insert(d.row(r), r)?;
    }
    let assignment = tree.assignment(d.len())?;
    Ok((tree, assignment))
}
