//! Routing onto coupling graphs and circuit-volume accounting.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Edges of the seven-qubit H-shaped device: two three-qubit arms bridged
/// through qubit 3.
pub const H7_EDGES: [(usize, usize); 6] = [(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)];

/// An undirected, connected coupling graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub name: String,
    pub n_qubits: usize,
    pub edges: Vec<(usize, usize)>,
    /// Measured quantum volume of the device, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum_volume: Option<u64>,
}

impl Topology {
    pub fn new(name: impl Into<String>, n_qubits: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        norm.sort_unstable();
        norm.dedup();
        let topo = Topology {
            name: name.into(),
            n_qubits,
            edges: norm,
            quantum_volume: None,
        };
        topo.validate()?;
        Ok(topo)
    }

    fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidTopology(format!("{}: no qubits", self.name)));
        }
        for &(a, b) in &self.edges {
            if a == b || a >= self.n_qubits || b >= self.n_qubits {
                return Err(Error::InvalidTopology(format!(
                    "{}: bad edge ({a}, {b})",
                    self.name
                )));
            }
        }
        if self.distances_from(0).iter().any(|d| d.is_none()) {
            return Err(Error::InvalidTopology(format!("{}: not connected", self.name)));
        }
        Ok(())
    }

    pub fn with_quantum_volume(mut self, qv: u64) -> Self {
        self.quantum_volume = Some(qv);
        self
    }

    /// Linear chain, as on Bogota (V_Q = 32).
    pub fn linear5() -> Self {
        Self::new("linear-5", 5, &[(0, 1), (1, 2), (2, 3), (3, 4)])
            .expect("valid")
            .with_quantum_volume(32)
    }

    /// T shape, as on Valencia (V_Q = 16).
    pub fn t5() -> Self {
        Self::new("t-5", 5, &[(0, 1), (1, 2), (1, 3), (3, 4)])
            .expect("valid")
            .with_quantum_volume(16)
    }

    pub fn h7() -> Self {
        Self::new("h-7", 7, &H7_EDGES).expect("valid")
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "linear-5" => Some(Self::linear5()),
            "t-5" => Some(Self::t5()),
            "h-7" => Some(Self::h7()),
            _ => None,
        }
    }

    /// A built-in name, or a path to a JSON description `{name, n_qubits, edges}`.
    pub fn resolve(spec: &str) -> Result<Self> {
        if let Some(t) = Self::builtin(spec) {
            return Ok(t);
        }
        let path = Path::new(spec);
        if !path.exists() {
            return Err(Error::InvalidTopology(format!(
                "unknown topology {spec:?} (built-ins: linear-5, t-5, h-7)"
            )));
        }
        Self::from_json_file(path)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Topology = serde_json::from_str(text)
            .map_err(|e| Error::InvalidTopology(e.to_string()))?;
        let mut topo = Self::new(raw.name, raw.n_qubits, &raw.edges)?;
        topo.quantum_volume = raw.quantum_volume;
        Ok(topo)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Neighbors in ascending order.
    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == q {
                    Some(b)
                } else if b == q {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn degree(&self, q: usize) -> usize {
        self.neighbors(q).len()
    }

    fn distances_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_qubits];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(dist[u].unwrap() + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.distances_from(b)[a].expect("connected")
    }

    /// Shortest path from `a` to `b`, preferring lower-index hops on ties.
    pub fn shortest_path(&self, a: usize, b: usize) -> Vec<usize> {
        let dist = self.distances_from(b);
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            let d = dist[cur].expect("connected");
            cur = self
                .neighbors(cur)
                .into_iter()
                .find(|&v| dist[v] == Some(d - 1))
                .expect("a neighbor one step closer");
            path.push(cur);
        }
        path
    }

    /// The maximum-degree node, ties broken by smallest total distance to all
    /// other nodes, then by index.
    pub fn hub(&self) -> usize {
        (0..self.n_qubits)
            .min_by_key(|&q| {
                let spread: usize = self.distances_from(q).iter().map(|d| d.unwrap()).sum();
                (std::cmp::Reverse(self.degree(q)), spread, q)
            })
            .expect("non-empty")
    }
}

/// Logical-to-physical qubit assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    physical: Vec<usize>,
    n_physical: usize,
}

impl Layout {
    pub fn new(physical: Vec<usize>, n_physical: usize) -> Result<Self> {
        let mut seen = vec![false; n_physical];
        for &p in &physical {
            if p >= n_physical || seen[p] {
                return Err(Error::InvalidTopology(format!(
                    "layout {physical:?} is not injective into {n_physical} qubits"
                )));
            }
            seen[p] = true;
        }
        Ok(Layout {
            physical,
            n_physical,
        })
    }

    pub fn trivial(n_logical: usize, n_physical: usize) -> Result<Self> {
        Self::new((0..n_logical).collect(), n_physical)
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.physical[logical]
    }

    pub fn logical(&self, physical: usize) -> Option<usize> {
        self.physical.iter().position(|&p| p == physical)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.physical
    }

    pub fn n_physical(&self) -> usize {
        self.n_physical
    }

    fn swap_physical(&mut self, a: usize, b: usize) {
        for p in &mut self.physical {
            if *p == a {
                *p = b;
            } else if *p == b {
                *p = a;
            }
        }
    }
}

fn interaction_counts(c: &Circuit) -> Vec<usize> {
    let mut counts = vec![0; c.n_qubits()];
    for g in c.gates().iter().filter(|g| g.is_two_qubit()) {
        for q in g.qubits() {
            counts[q] += 1;
        }
    }
    counts
}

fn check_fit(c: &Circuit, topo: &Topology) -> Result<()> {
    if c.n_qubits() > topo.n_qubits {
        return Err(Error::InsufficientQubits {
            topology: topo.name.clone(),
            needed: c.n_qubits(),
            available: topo.n_qubits,
        });
    }
    Ok(())
}

/// Ancilla (or the busiest qubit) on the hub node, then the other logical
/// qubits by descending interaction count onto free nodes in BFS order from it.
pub fn default_layout(c: &Circuit, topo: &Topology) -> Result<Layout> {
    check_fit(c, topo)?;
    let n = c.n_qubits();
    if n == 0 {
        return Layout::new(Vec::new(), topo.n_qubits);
    }
    let counts = interaction_counts(c);
    let anchor = c.ancillas().first().copied().unwrap_or_else(|| {
        (0..n)
            .min_by_key(|&q| (std::cmp::Reverse(counts[q]), q))
            .expect("non-empty")
    });
    let hub = topo.hub();

    let mut bfs = Vec::with_capacity(topo.n_qubits);
    let mut seen = vec![false; topo.n_qubits];
    let mut queue = VecDeque::from([hub]);
    seen[hub] = true;
    while let Some(u) = queue.pop_front() {
        bfs.push(u);
        for v in topo.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).filter(|&q| q != anchor).collect();
    order.sort_by_key(|&q| (std::cmp::Reverse(counts[q]), q));
    let mut physical = vec![0; n];
    physical[anchor] = hub;
    for (q, &p) in order.iter().zip(&bfs[1..]) {
        physical[*q] = p;
    }
    Layout::new(physical, topo.n_qubits)
}

/// Result of routing a circuit.
#[derive(Debug, Clone)]
pub struct Routed {
    /// Circuit on the physical qubits of the topology.
    pub circuit: Circuit,
    pub initial_layout: Layout,
    pub final_layout: Layout,
    pub swaps: usize,
}

impl Routed {
    pub fn added_cnots(&self) -> usize {
        3 * self.swaps
    }
}

/// Greedy router: before each two-qubit gate whose qubits are not coupled,
/// the first qubit is swapped along the shortest path until it is adjacent to
/// the second. Each SWAP becomes three CNOTs. Measurements are deferred to the
/// end and read the final physical location of their qubit.
pub fn transpile(c: &Circuit, topo: &Topology, initial: Option<Layout>) -> Result<Routed> {
    check_fit(c, topo)?;
    let initial = match initial {
        Some(l) => {
            if l.as_slice().len() != c.n_qubits() || l.n_physical() != topo.n_qubits {
                return Err(Error::QubitMismatch {
                    expected: c.n_qubits(),
                    got: l.as_slice().len(),
                });
            }
            l
        }
        None => default_layout(c, topo)?,
    };
    let mut layout = initial.clone();
    let mut out = Circuit::new(topo.n_qubits);
    let mut swaps = 0;
    let mut deferred = Vec::new();

    for &g in c.gates() {
        match g {
            Gate::Measure { qubit, cbit } => deferred.push((qubit, cbit)),
            g if g.is_two_qubit() => {
                let q = g.qubits();
                let target = layout.physical(q[1]);
                let path = topo.shortest_path(layout.physical(q[0]), target);
                for w in path[..path.len() - 1].windows(2) {
                    let (a, b) = (w[0], w[1]);
                    out.push(Gate::Cnot { control: a, target: b })?;
                    out.push(Gate::Cnot { control: b, target: a })?;
                    out.push(Gate::Cnot { control: a, target: b })?;
                    layout.swap_physical(a, b);
                    swaps += 1;
                }
                let mapped = g.remap(|l| layout.physical(l));
                debug_assert!(topo.is_edge(mapped.qubits()[0], mapped.qubits()[1]));
                out.push(mapped)?;
            }
            g => out.push(g.remap(|l| layout.physical(l)))?,
        }
    }
    for (qubit, cbit) in deferred {
        out.push(Gate::Measure {
            qubit: layout.physical(qubit),
            cbit,
        })?;
    }
    for &a in c.ancillas() {
        out.mark_ancilla(layout.physical(a))?;
    }
    Ok(Routed {
        circuit: out,
        initial_layout: initial,
        final_layout: layout,
        swaps,
    })
}

/// Circuit-volume bookkeeping: `m` active qubits, two-qubit depth `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VolumeReport {
    pub m: usize,
    pub d: usize,
    pub circuit_volume: usize,
    pub qv_exponent: usize,
    pub quantum_volume: u64,
}

impl VolumeReport {
    pub fn from_dims(m: usize, d: usize) -> Self {
        let e = m.min(d);
        VolumeReport {
            m,
            d,
            circuit_volume: m * d,
            qv_exponent: e,
            quantum_volume: 1u64 << e,
        }
    }
}

/// `m` counts qubits touched by at least one gate.
pub fn volume_report(c: &Circuit) -> VolumeReport {
    let mut active = vec![false; c.n_qubits()];
    for g in c.gates() {
        for q in g.qubits() {
            active[q] = true;
        }
    }
    let m = active.iter().filter(|&&a| a).count();
    VolumeReport::from_dims(m, c.metrics().two_qubit_depth)
}
