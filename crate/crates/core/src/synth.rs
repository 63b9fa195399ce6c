//! C^nX synthesis for the four ancilla strategies.
//!
//! A [`ComputePlan`] lists the AND-computing blocks (CC(iX) or C³(iX)) that
//! fold the n controls into two operands for a final Toffoli. The plan is
//! built in two stages: a first layer of disjoint pairs or triples over the
//! controls, then a sequential ladder that keeps absorbing operands into a
//! chain. [`synthesize`] expands the plan to primitives and uncomputes the
//! ancillas, either by running the adjoint blocks (static) or by measuring
//! them out with classically conditioned phase corrections (dynamic).
//!
//! Qubit layout: controls at `0..n`, target at `n`, ancillas at `n+1..` in
//! plan-node order.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{dynamic_uncompute, emit_block, BlockError, BlockKind, BlockSpan};
use crate::circuit::{Circuit, CircuitError, Clbit, Qubit, Role};

/// Largest control count accepted by the planner.
pub const MAX_CONTROLS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// n−2 ancillas, adjoint uncomputation.
    StaticFull,
    /// n−2 ancillas, measurement-based uncomputation.
    DynamicFull,
    /// ⌈(n−2)/2⌉ ancillas, adjoint uncomputation.
    StaticHalf,
    /// ⌈(n−2)/2⌉ ancillas, measurement-based uncomputation.
    DynamicHalf,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::StaticFull,
        Strategy::DynamicFull,
        Strategy::StaticHalf,
        Strategy::DynamicHalf,
    ];

    pub fn is_dynamic(self) -> bool {
        matches!(self, Strategy::DynamicFull | Strategy::DynamicHalf)
    }

    pub fn is_half(self) -> bool {
        matches!(self, Strategy::StaticHalf | Strategy::DynamicHalf)
    }

    /// The strategy with the same ancilla regime and the other uncompute mode.
    pub fn counterpart(self) -> Strategy {
        match self {
            Strategy::StaticFull => Strategy::DynamicFull,
            Strategy::DynamicFull => Strategy::StaticFull,
            Strategy::StaticHalf => Strategy::DynamicHalf,
            Strategy::DynamicHalf => Strategy::StaticHalf,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::StaticFull => "static-full",
            Strategy::DynamicFull => "dynamic-full",
            Strategy::StaticHalf => "static-half",
            Strategy::DynamicHalf => "dynamic-half",
        }
    }

    /// Whether `n` controls can be synthesized. n = 2 is the bare Toffoli for
    /// every strategy; the half regime has no construction for n = 3.
    pub fn supports(self, n: usize) -> bool {
        (2..=MAX_CONTROLS).contains(&n) && !(self.is_half() && n == 3)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| SynthError::UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("unknown strategy '{0}' (expected static-full, dynamic-full, static-half or dynamic-half)")]
    UnknownStrategy(String),
    #[error("{strategy} does not support n = {n}")]
    UnsupportedN { n: usize, strategy: Strategy },
    #[error("plan invariant violated: {0}")]
    Plan(String),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// One AND-computing block of a plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanNode {
    pub block: BlockKind,
    pub inputs: Vec<Qubit>,
    pub output: Qubit,
    pub layer: usize,
}

/// DAG of AND blocks feeding the final Toffoli.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComputePlan {
    pub n: usize,
    pub strategy: Strategy,
    pub nodes: Vec<PlanNode>,
    pub final_operands: [Qubit; 2],
    pub target: Qubit,
    /// Node indices grouped by layer.
    pub layers: Vec<Vec<usize>>,
}

impl ComputePlan {
    /// Node indices in emission order: by layer, then by node index.
    pub fn emission_order(&self) -> Vec<usize> {
        self.layers.iter().flatten().copied().collect()
    }

    pub fn ancillas(&self) -> Vec<Qubit> {
        self.nodes.iter().map(|node| node.output).collect()
    }

    /// Checks the structural invariants of the plan.
    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: String| Err(SynthError::Plan(msg));
        let n = self.n;
        let expected_nodes = ancilla_requirement(n, self.strategy)?;
        if self.nodes.len() != expected_nodes {
            return fail(format!("{} nodes, expected {expected_nodes}", self.nodes.len()));
        }
        let ccix = self.nodes.iter().filter(|nd| nd.block == BlockKind::CCiX).count();
        let c3ix = self.nodes.iter().filter(|nd| nd.block == BlockKind::C3iX).count();
        if ccix + c3ix != self.nodes.len() {
            return fail("plan nodes must be CC(iX) or C3(iX)".into());
        }
        let (want_ccix, want_c3ix) = match (self.strategy.is_half(), n) {
            (_, 2) => (0, 0),
            (false, _) => (n - 2, 0),
            (true, _) if n % 2 == 0 => (0, (n - 2) / 2),
            (true, _) => (1, (n - 3) / 2),
        };
        if (ccix, c3ix) != (want_ccix, want_c3ix) {
            return fail(format!(
                "{ccix} CC(iX) and {c3ix} C3(iX) nodes, expected {want_ccix} and {want_c3ix}"
            ));
        }
        if self.target != Qubit(n) {
            return fail(format!("target is {}, expected {}", self.target, Qubit(n)));
        }
        // Every operand is an original control or an earlier output, and is
        // consumed exactly once.
        let mut available: Vec<Qubit> = (0..n).map(Qubit).collect();
        let mut layer_of: BTreeMap<Qubit, usize> = BTreeMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.inputs.len() != node.block.controls() {
                return fail(format!("node {i} has {} inputs", node.inputs.len()));
            }
            if node.output != Qubit(n + 1 + i) {
                return fail(format!("node {i} writes {}, expected {}", node.output, Qubit(n + 1 + i)));
            }
            for q in &node.inputs {
                let Some(pos) = available.iter().position(|a| a == q) else {
                    return fail(format!("node {i} reads {q}, which is unavailable"));
                };
                available.swap_remove(pos);
                if let Some(&l) = layer_of.get(q) {
                    if l >= node.layer {
                        return fail(format!("node {i} in layer {} reads {q} from layer {l}", node.layer));
                    }
                }
            }
            available.push(node.output);
            layer_of.insert(node.output, node.layer);
        }
        available.sort();
        let mut fin = self.final_operands.to_vec();
        fin.sort();
        if available != fin {
            return fail(format!("final CCX reads {fin:?} but {available:?} remain"));
        }
        let mut seen: Vec<usize> = self.layers.iter().flatten().copied().collect();
        seen.sort();
        if seen != (0..self.nodes.len()).collect::<Vec<_>>() {
            return fail("layers do not partition the nodes".into());
        }
        for (l, members) in self.layers.iter().enumerate() {
            if members.iter().any(|&i| self.nodes[i].layer != l) {
                return fail(format!("layer {l} lists a node from another layer"));
            }
            let mut touched: Vec<Qubit> = members
                .iter()
                .flat_map(|&i| self.nodes[i].inputs.iter().chain(std::iter::once(&self.nodes[i].output)))
                .copied()
                .collect();
            let before = touched.len();
            touched.sort();
            touched.dedup();
            if touched.len() != before {
                return fail(format!("layer {l} has overlapping nodes"));
            }
        }
        Ok(())
    }
}

/// Number of clean ancillas the strategy uses for `n` controls.
pub fn ancilla_requirement(n: usize, strategy: Strategy) -> Result<usize, SynthError> {
    if !strategy.supports(n) {
        return Err(SynthError::UnsupportedN { n, strategy });
    }
    Ok(if strategy.is_half() { (n - 2).div_ceil(2) } else { n - 2 })
}

struct Builder {
    n: usize,
    nodes: Vec<PlanNode>,
    depth: BTreeMap<Qubit, usize>,
}

impl Builder {
    fn new(n: usize) -> Builder {
        Builder {
            n,
            nodes: Vec::new(),
            depth: BTreeMap::new(),
        }
    }

    fn layer_after(&self, inputs: &[Qubit]) -> usize {
        inputs
            .iter()
            .filter_map(|q| self.depth.get(q).map(|l| l + 1))
            .max()
            .unwrap_or(0)
    }

    fn node(&mut self, block: BlockKind, inputs: Vec<Qubit>, layer: Option<usize>) -> Qubit {
        let output = Qubit(self.n + 1 + self.nodes.len());
        let layer = layer.unwrap_or_else(|| self.layer_after(&inputs));
        self.depth.insert(output, layer);
        self.nodes.push(PlanNode {
            block,
            inputs,
            output,
            layer,
        });
        output
    }
}

/// Canonical compute plan for `n` controls.
pub fn plan_tree(n: usize, strategy: Strategy) -> Result<ComputePlan, SynthError> {
    ancilla_requirement(n, strategy)?;
    let controls: Vec<Qubit> = (0..n).map(Qubit).collect();
    let mut b = Builder::new(n);
    let final_operands = if n == 2 {
        [controls[0], controls[1]]
    } else if !strategy.is_half() {
        let mut pool: VecDeque<Qubit> = controls
            .chunks_exact(2)
            .map(|pair| b.node(BlockKind::CCiX, pair.to_vec(), None))
            .collect();
        if n % 2 == 1 {
            pool.push_back(controls[n - 1]);
        }
        let mut chain = pool.pop_front().expect("n ≥ 3 leaves two pool entries");
        while pool.len() > 1 {
            let next = pool.pop_front().expect("checked length");
            chain = b.node(BlockKind::CCiX, vec![chain, next], None);
        }
        [chain, pool[0]]
    } else {
        let triples = (n + 2) / 4;
        // For n ≡ 1 (mod 4) the last two controls pair off in a CC(iX) that
        // runs beside the deepest C3(iX) layer.
        let side_pair = n % 4 == 1;
        let ladder_end = if side_pair { n - 2 } else { n };
        let mut pool: VecDeque<Qubit> = controls[..3 * triples]
            .chunks_exact(3)
            .map(|t| b.node(BlockKind::C3iX, t.to_vec(), None))
            .collect();
        pool.extend(&controls[3 * triples..ladder_end]);
        let mut chain = pool.pop_front().expect("at least one triple");
        while pool.len() >= 2 && (side_pair || n % 2 == 0 || pool.len() > 2) {
            let x = pool.pop_front().expect("checked length");
            let y = pool.pop_front().expect("checked length");
            chain = b.node(BlockKind::C3iX, vec![chain, x, y], None);
        }
        if side_pair {
            let deepest = b.depth[&chain];
            let pair = b.node(BlockKind::CCiX, controls[n - 2..].to_vec(), Some(deepest));
            [chain, pair]
        } else if n % 2 == 1 {
            let next = pool.pop_front().expect("odd n leaves two pool entries");
            chain = b.node(BlockKind::CCiX, vec![chain, next], None);
            [chain, pool[0]]
        } else {
            [chain, pool[0]]
        }
    };
    let depth = b.nodes.iter().map(|nd| nd.layer + 1).max().unwrap_or(0);
    let mut layers = vec![Vec::new(); depth];
    for (i, node) in b.nodes.iter().enumerate() {
        layers[node.layer].push(i);
    }
    let plan = ComputePlan {
        n,
        strategy,
        nodes: b.nodes,
        final_operands,
        target: Qubit(n),
        layers,
    };
    plan.validate()?;
    Ok(plan)
}

/// A synthesized C^nX circuit with its plan and block annotations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisResult {
    pub n: usize,
    pub strategy: Strategy,
    pub circuit: Circuit,
    pub plan: ComputePlan,
    pub ancillas: Vec<Qubit>,
    /// Measurement bit of each ancilla (dynamic strategies only).
    pub clbit_map: BTreeMap<Qubit, Clbit>,
    /// Block and correction ranges, in circuit order.
    pub spans: Vec<BlockSpan>,
}

/// Builds the C^nX circuit for `n` controls with `strategy`.
pub fn synthesize(n: usize, strategy: Strategy) -> Result<SynthesisResult, SynthError> {
    let plan = plan_tree(n, strategy)?;
    let ancillas = plan.ancillas();
    let m = ancillas.len();
    let num_clbits = if strategy.is_dynamic() { m } else { 0 };
    let mut roles = vec![Role::Control; n];
    roles.push(Role::Target);
    roles.extend(std::iter::repeat(Role::Ancilla).take(m));
    let mut circuit = Circuit::new(n + 1 + m, num_clbits, roles)?;
    let mut spans = Vec::new();

    let order = plan.emission_order();
    let operands = |i: usize| -> Vec<Qubit> {
        let node = &plan.nodes[i];
        let mut ops = node.inputs.clone();
        ops.push(node.output);
        ops
    };
    for &i in &order {
        spans.push(emit_block(&mut circuit, plan.nodes[i].block, &operands(i))?);
    }
    let [a, b] = plan.final_operands;
    spans.push(emit_block(&mut circuit, BlockKind::CCX, &[a, b, plan.target])?);

    let mut clbit_map = BTreeMap::new();
    for (k, &i) in order.iter().rev().enumerate() {
        let node = &plan.nodes[i];
        if strategy.is_dynamic() {
            let clbit = Clbit(k);
            spans.extend(dynamic_uncompute(
                &mut circuit,
                node.block,
                node.output,
                &node.inputs,
                Some(clbit),
            )?);
            clbit_map.insert(node.output, clbit);
        } else {
            let adj = node.block.adjoint().expect("plan nodes have adjoints");
            spans.push(emit_block(&mut circuit, adj, &operands(i))?);
        }
    }
    Ok(SynthesisResult {
        n,
        strategy,
        circuit,
        plan,
        ancillas,
        clbit_map,
        spans,
    })
}
