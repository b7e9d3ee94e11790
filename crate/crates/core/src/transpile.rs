//! Peephole passes, coupling-graph routing and best-of-N transpilation.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

// ---------------------------------------------------------------------------
// coupling graphs

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingGraph {
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl CouplingGraph {
    pub fn from_edges(num_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::RepeatedOperand(a));
            }
            for q in [a, b] {
                if q >= num_qubits {
                    return Err(Error::QubitOutOfRange { qubit: q, num_qubits });
                }
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adjacency = vec![Vec::new(); num_qubits];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for n in &mut adjacency {
            n.sort_unstable();
        }
        Ok(CouplingGraph { num_qubits, edges: set.into_iter().collect(), adjacency })
    }

    /// Edge list text: one `a b` pair per line, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max = None;
        for (i, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            let parsed: Option<Vec<usize>> = fields.iter().map(|f| f.parse().ok()).collect();
            match parsed.as_deref() {
                Some([a, b]) => {
                    if a == b {
                        return Err(Error::input(format!("line {}: self-loop on qubit {a}", i + 1)));
                    }
                    max = Some(max.unwrap_or(0).max(*a).max(*b));
                    edges.push((*a, *b));
                }
                _ => return Err(Error::input(format!("line {}: expected two qubit indices, got {body:?}", i + 1))),
            }
        }
        CouplingGraph::from_edges(max.map_or(0, |m| m + 1), edges)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::File { path: path.to_path_buf(), message: e.to_string() })?;
        CouplingGraph::parse(&text).map_err(|e| Error::File { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn to_edge_list(&self) -> String {
        self.edges.iter().map(|(a, b)| format!("{a} {b}\n")).collect()
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        CouplingGraph::from_edges(n, edges).expect("valid by construction")
    }

    pub fn line(n: usize) -> Self {
        CouplingGraph::from_edges(n, (1..n).map(|q| (q - 1, q))).expect("valid by construction")
    }

    pub fn ring(n: usize) -> Self {
        let mut edges: Vec<(usize, usize)> = (1..n).map(|q| (q - 1, q)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        CouplingGraph::from_edges(n, edges).expect("valid by construction")
    }

    /// Subgraph on `nodes`, relabelled `0..nodes.len()` in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Self> {
        let index: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        for &q in nodes {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits });
            }
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|(a, b)| Some((*index.get(a)?, *index.get(b)?)));
        CouplingGraph::from_edges(nodes.len(), edges)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(a).is_some_and(|n| n.binary_search(&b).is_ok())
    }

    fn bfs(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_qubits];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.num_qubits == 0 || self.bfs(0).iter().all(|&d| d != usize::MAX)
    }

    /// All-pairs hop distances.
    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        (0..self.num_qubits).map(|q| self.bfs(q)).collect()
    }
}

// ---------------------------------------------------------------------------
// single-qubit canonical words

type U2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn u2_of(g: &Gate) -> U2 {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match *g {
        Gate::H(_) => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        Gate::S(_) => [[o, z], [z, i]],
        Gate::Sdg(_) => [[o, z], [z, -i]],
        Gate::X(_) => [[z, o], [o, z]],
        Gate::Y(_) => [[z, -i], [i, z]],
        Gate::Z(_) => [[o, z], [z, -o]],
        Gate::Rz(_, phi) => [[Complex64::from_polar(1.0, -phi / 2.0), z], [z, Complex64::from_polar(1.0, phi / 2.0)]],
        Gate::Cx(..) | Gate::Swap(..) => unreachable!("two-qubit gate in a single-qubit run"),
    }
}

fn mul(a: &U2, b: &U2) -> U2 {
    let mut m = [[c(0.0, 0.0); 2]; 2];
    for (r, row) in m.iter_mut().enumerate() {
        for (k, entry) in row.iter_mut().enumerate() {
            *entry = a[r][0] * b[0][k] + a[r][1] * b[1][k];
        }
    }
    m
}

/// Time-ordered word to matrix.
fn word_unitary(word: &[Gate]) -> U2 {
    let mut u = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    for g in word {
        u = mul(&u2_of(g), &u);
    }
    u
}

/// `min_phi ||a - e^{i phi} b||` for 2x2 unitaries.
fn phase_distance(a: &U2, b: &U2) -> f64 {
    let overlap: Complex64 = (0..2).flat_map(|r| (0..2).map(move |k| (r, k))).map(|(r, k)| b[r][k].conj() * a[r][k]).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    (0..2)
        .flat_map(|r| (0..2).map(move |k| (r, k)))
        .map(|(r, k)| (a[r][k] - b[r][k] * phase).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Phase-normalised rounded key, used to look up Clifford words.
fn projective_key(u: &U2) -> [i64; 8] {
    let flat = [u[0][0], u[0][1], u[1][0], u[1][1]];
    let lead = flat.iter().find(|z| z.norm() > 1e-6).copied().unwrap_or(c(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    let mut key = [0i64; 8];
    for (i, z) in flat.iter().enumerate() {
        let w = z * phase;
        key[2 * i] = (w.re * 1e6).round() as i64;
        key[2 * i + 1] = (w.im * 1e6).round() as i64;
    }
    key
}

#[derive(Clone, Copy)]
enum Letter {
    H,
    S,
    Sdg,
    X,
    Z,
}

impl Letter {
    fn gate(self, q: usize) -> Gate {
        match self {
            Letter::H => Gate::H(q),
            Letter::S => Gate::S(q),
            Letter::Sdg => Gate::Sdg(q),
            Letter::X => Gate::X(q),
            Letter::Z => Gate::Z(q),
        }
    }
}

/// Shortest words over {H, S, Sdg, X, Z} for all 24 one-qubit Cliffords.
fn clifford_table() -> &'static HashMap<[i64; 8], Vec<Letter>> {
    static TABLE: OnceLock<HashMap<[i64; 8], Vec<Letter>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let letters = [Letter::H, Letter::S, Letter::Sdg, Letter::X, Letter::Z];
        let mut table = HashMap::new();
        let mut queue = VecDeque::from([Vec::<Letter>::new()]);
        while let Some(word) = queue.pop_front() {
            let gates: Vec<Gate> = word.iter().map(|l| l.gate(0)).collect();
            let key = projective_key(&word_unitary(&gates));
            if table.contains_key(&key) {
                continue;
            }
            table.insert(key, word.clone());
            for l in letters {
                let mut next = word.clone();
                next.push(l);
                queue.push_back(next);
            }
        }
        table
    })
}

fn wrap_angle(phi: f64) -> f64 {
    // Rz(phi + 2 pi) differs only by a global phase
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = phi % two_pi;
    if a > std::f64::consts::PI {
        a -= two_pi;
    } else if a <= -std::f64::consts::PI {
        a += two_pi;
    }
    a
}

fn push_rz(word: &mut Vec<Gate>, q: usize, phi: f64) {
    let a = wrap_angle(phi);
    if a.abs() > 1e-12 {
        word.push(Gate::Rz(q, a));
    }
}

/// A short word over {H, S, Sdg, X, Z, Rz} for `u` (up to global phase).
fn canonical_word(u: &U2, q: usize) -> Vec<Gate> {
    if let Some(word) = clifford_table().get(&projective_key(u)) {
        let gates: Vec<Gate> = word.iter().map(|l| l.gate(q)).collect();
        if phase_distance(&word_unitary(&gates), u) < 1e-9 {
            return gates;
        }
    }
    let mut candidates: Vec<Vec<Gate>> = Vec::new();
    let (u00, u01, u10, u11) = (u[0][0], u[0][1], u[1][0], u[1][1]);
    if u01.norm() < 1e-12 && u10.norm() < 1e-12 {
        let mut w = Vec::new();
        push_rz(&mut w, q, (u11 / u00).arg());
        candidates.push(w);
    }
    if u00.norm() > 1e-12 && u01.norm() > 1e-12 && u10.norm() > 1e-12 {
        // time order Rz(a) H Rz(b)
        let mut w = Vec::new();
        push_rz(&mut w, q, (u01 / u00).arg());
        w.push(Gate::H(q));
        push_rz(&mut w, q, (u10 / u00).arg());
        candidates.push(w);
    }
    // Z-X-Z Euler form: time order Rz(alpha) H Rz(beta) H Rz(gamma)
    let beta = 2.0 * u10.norm().atan2(u00.norm());
    let sum = if u00.norm() > 1e-12 { (u11 / u00).arg() } else { 0.0 };
    let diff = if u10.norm() > 1e-12 { (u10 / u01).arg() } else { 0.0 };
    let (gamma, alpha) = ((sum + diff) / 2.0, (sum - diff) / 2.0);
    // halving the angle sums is ambiguous by pi, which flips the sign of beta
    for b in [beta, -beta] {
        let mut w = Vec::new();
        push_rz(&mut w, q, alpha);
        w.push(Gate::H(q));
        push_rz(&mut w, q, b);
        w.push(Gate::H(q));
        push_rz(&mut w, q, gamma);
        candidates.push(w);
    }

    candidates
        .into_iter()
        .filter(|w| phase_distance(&word_unitary(w), u) < 1e-9)
        .min_by_key(|w| w.len())
        .expect("Euler form always reproduces the unitary")
}

// ---------------------------------------------------------------------------
// peephole engine

fn cancels(a: &Gate, b: &Gate) -> bool {
    match (*a, *b) {
        (Gate::Cx(c1, t1), Gate::Cx(c2, t2)) => c1 == c2 && t1 == t2,
        (Gate::Swap(a1, b1), Gate::Swap(a2, b2)) => (a1, b1) == (a2, b2) || (a1, b1) == (b2, a2),
        (Gate::Rz(..), _) | (_, Gate::Rz(..)) => false,
        _ => !a.is_two_qubit() && !b.is_two_qubit() && a.inverse() == *b,
    }
}

struct Peephole {
    fuse: bool,
    arena: Vec<Option<Gate>>,
    stacks: Vec<Vec<usize>>,
}

impl Peephole {
    fn new(num_qubits: usize, fuse: bool) -> Self {
        Peephole { fuse, arena: Vec::new(), stacks: vec![Vec::new(); num_qubits] }
    }

    fn top(&self, q: usize) -> Option<usize> {
        self.stacks[q].last().copied()
    }

    fn emit(&mut self, g: Gate) {
        let idx = self.arena.len();
        self.arena.push(Some(g));
        for q in g.qubits() {
            self.stacks[q].push(idx);
        }
    }

    fn remove_top(&mut self, idx: usize) {
        let g = self.arena[idx].take().expect("live gate");
        for q in g.qubits() {
            let popped = self.stacks[q].pop();
            debug_assert_eq!(popped, Some(idx));
        }
    }

    /// Rewrites the trailing single-qubit run on `q` when a strictly shorter
    /// word exists.
    fn canonicalize(&mut self, q: usize) {
        if !self.fuse {
            return;
        }
        let run: Vec<usize> = self.stacks[q]
            .iter()
            .rev()
            .take_while(|&&i| !self.arena[i].expect("live gate").is_two_qubit())
            .copied()
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        if run.is_empty() {
            return;
        }
        let gates: Vec<Gate> = run.iter().map(|&i| self.arena[i].expect("live gate")).collect();
        let word = canonical_word(&word_unitary(&gates), q);
        if word.len() < gates.len() {
            for &i in run.iter().rev() {
                self.remove_top(i);
            }
            for g in word {
                self.emit(g);
            }
        }
    }

    fn push(&mut self, g: Gate) {
        match g.operands() {
            (q, None) => {
                if !self.fuse {
                    if let Some(j) = self.top(q) {
                        let prev = self.arena[j].expect("live gate");
                        if let (Gate::Rz(_, a), Gate::Rz(_, b)) = (prev, g) {
                            self.remove_top(j);
                            let sum = a + b;
                            if wrap_angle(sum).abs() > 1e-12 {
                                self.emit(Gate::Rz(q, sum));
                            }
                            return;
                        }
                        if cancels(&prev, &g) {
                            self.remove_top(j);
                            return;
                        }
                    }
                }
                self.emit(g);
            }
            (a, Some(b)) => {
                self.canonicalize(a);
                self.canonicalize(b);
                if let (Some(ja), Some(jb)) = (self.top(a), self.top(b)) {
                    if ja == jb && cancels(&self.arena[ja].expect("live gate"), &g) {
                        self.remove_top(ja);
                        return;
                    }
                }
                self.emit(g);
            }
        }
    }

    fn finish(mut self, num_qubits: usize) -> Circuit {
        for q in 0..num_qubits {
            self.canonicalize(q);
        }
        let mut out = Circuit::new(num_qubits);
        for g in self.arena.into_iter().flatten() {
            out.push_unchecked(g);
        }
        out
    }
}

/// Removes adjacent inverse pairs (H·H, X·X, Y·Y, Z·Z, S·Sdg, CX·CX,
/// SWAP·SWAP) and merges neighbouring Rz gates, dropping zero angles.
pub fn cancel_inverses(c: &Circuit) -> Circuit {
    let mut p = Peephole::new(c.num_qubits(), false);
    for g in c.gates() {
        p.push(*g);
    }
    p.finish(c.num_qubits())
}

/// Rewrites every maximal single-qubit run as a shortest known word over
/// {H, S, Sdg, X, Z, Rz}. Two-qubit pairs that become adjacent once a run
/// vanishes are cancelled too.
pub fn fuse_single_qubit(c: &Circuit) -> Circuit {
    let mut p = Peephole::new(c.num_qubits(), true);
    for g in c.gates() {
        p.push(*g);
    }
    p.finish(c.num_qubits())
}

/// Alternates cancellation and fusion until nothing changes. Returns the
/// circuit and the number of rounds run, the last of which changed nothing.
pub fn optimize(c: &Circuit) -> (Circuit, usize) {
    let mut current = c.clone();
    for round in 1..=16 {
        let next = fuse_single_qubit(&cancel_inverses(&current));
        if next == current {
            return (current, round);
        }
        current = next;
    }
    (current, 16)
}

// ---------------------------------------------------------------------------
// routing

#[derive(Clone, Debug, PartialEq)]
pub struct RoutedCircuit {
    /// Circuit on the physical qubits of the coupling graph.
    pub circuit: Circuit,
    /// `layout[logical] = physical` after the last gate.
    pub final_layout: Vec<usize>,
}

impl RoutedCircuit {
    /// SWAPs that bring every logical qubit back to its initial position;
    /// `circuit` followed by this equals the input circuit.
    pub fn permutation_circuit(&self) -> Circuit {
        let n = self.circuit.num_qubits();
        let mut at: Vec<usize> = (0..n).collect(); // physical -> logical
        for (l, &p) in self.final_layout.iter().enumerate() {
            at[p] = l;
        }
        let mut out = Circuit::new(n);
        for target in 0..n {
            let current = at.iter().position(|&l| l == target).expect("permutation");
            if current != target {
                out.push_unchecked(Gate::Swap(current, target));
                at.swap(current, target);
            }
        }
        out
    }

    /// An observable on logical qubits, moved to where those qubits end up.
    pub fn relabel_pauli_sum(&self, obs: &PauliSum) -> Result<PauliSum> {
        let n = self.circuit.num_qubits();
        let mut out = PauliSum::new(n);
        for t in obs.iter() {
            let mut p = PauliString::identity(n);
            for q in 0..obs.num_qubits() {
                p.set(self.final_layout[q], t.pauli.get(q));
            }
            out.push(t.coeff, p)?;
        }
        Ok(out)
    }
}

/// Inserts SWAPs along shortest paths so every two-qubit gate acts on an
/// edge of `g`. Ties between distance-reducing SWAPs are broken by a RNG
/// seeded with `seed`.
pub fn route(c: &Circuit, g: &CouplingGraph, seed: u64) -> Result<RoutedCircuit> {
    if c.num_qubits() > g.num_qubits() {
        return Err(Error::QubitCountMismatch { left: g.num_qubits(), right: c.num_qubits() });
    }
    if !g.is_connected() {
        return Err(Error::DisconnectedGraph);
    }
    let n = g.num_qubits();
    let dist = g.distance_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut l2p: Vec<usize> = (0..n).collect();
    let mut p2l: Vec<usize> = (0..n).collect();
    let mut out = Circuit::new(n);
    for gate in c.gates() {
        if let (a, Some(b)) = gate.operands() {
            loop {
                let (pa, pb) = (l2p[a], l2p[b]);
                let d = dist[pa][pb];
                if d <= 1 {
                    break;
                }
                let mut options: Vec<(usize, usize)> = Vec::new();
                for &nb in g.neighbors(pa) {
                    if dist[nb][pb] < d {
                        options.push((pa, nb));
                    }
                }
                for &nb in g.neighbors(pb) {
                    if dist[pa][nb] < d {
                        options.push((pb, nb));
                    }
                }
                let &(x, y) = options.choose(&mut rng).expect("connected graph has a shorter path");
                out.push_unchecked(Gate::Swap(x.min(y), x.max(y)));
                let (lx, ly) = (p2l[x], p2l[y]);
                p2l.swap(x, y);
                l2p[lx] = y;
                l2p[ly] = x;
            }
        }
        out.push_unchecked(gate.map_qubits(|q| l2p[q]));
    }
    l2p.truncate(n);
    Ok(RoutedCircuit { circuit: out, final_layout: l2p })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranspileReport {
    pub depth: usize,
    pub two_qubit_count: usize,
    pub total_gates: usize,
    pub trials_run: usize,
    pub seed_of_best: u64,
    pub optimize_rounds: usize,
    pub final_layout: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranspileOutcome {
    /// SWAP-free circuit on the physical register.
    pub circuit: Circuit,
    pub routed: RoutedCircuit,
    pub report: TranspileReport,
}

/// Route with one seed, optimise, expand SWAPs, optimise again.
pub fn transpile_once(c: &Circuit, g: &CouplingGraph, seed: u64) -> Result<TranspileOutcome> {
    let routed = route(c, g, seed)?;
    let (opt, r1) = optimize(&routed.circuit);
    let (circuit, r2) = optimize(&opt.expand_swaps());
    let m = circuit.metrics();
    let report = TranspileReport {
        depth: m.depth,
        two_qubit_count: m.two_qubit_count,
        total_gates: m.total_gates,
        trials_run: 1,
        seed_of_best: seed,
        optimize_rounds: r1.max(r2),
        final_layout: routed.final_layout.clone(),
    };
    Ok(TranspileOutcome { circuit, routed, report })
}

/// Runs seeds `base_seed .. base_seed + trials` in parallel and keeps the
/// shallowest result (ties: fewer two-qubit gates, then lower seed).
pub fn transpile_best_of(c: &Circuit, g: &CouplingGraph, trials: usize, base_seed: u64) -> Result<TranspileOutcome> {
    if trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    let results: Vec<TranspileOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|i| transpile_once(c, g, base_seed + i))
        .collect::<Result<_>>()?;
    let mut best = results
        .into_iter()
        .min_by_key(|o| (o.report.depth, o.report.two_qubit_count, o.report.seed_of_best))
        .expect("at least one trial");
    best.report.trials_run = trials;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::dense::{circuit_matrix, phase_adjusted_distance};
    use proptest::prelude::*;
    use rand::Rng;

    fn random_circuit(n: usize, len: usize, seed: u64) -> Circuit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(n);
        for _ in 0..len {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            let g = match rng.gen_range(0..10) {
                0 => Gate::H(a),
                1 => Gate::S(a),
                2 => Gate::Sdg(a),
                3 => Gate::X(a),
                4 => Gate::Z(a),
                5 => Gate::Rz(a, rng.gen_range(-3.0..3.0)),
                6 => Gate::Y(a),
                _ => Gate::Cx(a, b),
            };
            c.push(g).unwrap();
        }
        c
    }

    /// Circuits with many cancellation opportunities.
    fn redundant_circuit(n: usize, len: usize, seed: u64) -> Circuit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_circuit(n, len, seed);
        let mut c = Circuit::new(n);
        for g in base.gates() {
            c.push(*g).unwrap();
            if rng.gen_bool(0.3) {
                c.push(g.inverse()).unwrap();
                c.push(*g).unwrap();
            }
        }
        c
    }

    fn assert_equivalent(a: &Circuit, b: &Circuit, tol: f64) {
        let d = phase_adjusted_distance(&circuit_matrix(a), &circuit_matrix(b));
        assert!(d < tol, "distance {d}");
    }

    #[test]
    fn hh_cancels() {
        let c = Circuit::from_gates(1, [Gate::H(0), Gate::H(0)]).unwrap();
        assert!(cancel_inverses(&c).is_empty());
    }

    #[test]
    fn non_adjacent_pair_is_kept() {
        let c = Circuit::from_gates(2, [Gate::Cx(0, 1), Gate::Rz(0, 0.3), Gate::Cx(0, 1)]).unwrap();
        assert_eq!(cancel_inverses(&c).len(), 3);
    }

    #[test]
    fn rz_merge_and_zero_elimination() {
        let c = Circuit::from_gates(1, [Gate::Rz(0, 0.2), Gate::Rz(0, 0.3)]).unwrap();
        let out = cancel_inverses(&c);
        assert_eq!(out.len(), 1);
        let Gate::Rz(0, phi) = out.gates()[0] else { panic!() };
        assert!((phi - 0.5).abs() < 1e-15);
        let zero = Circuit::from_gates(1, [Gate::Rz(0, 0.2), Gate::Rz(0, -0.2)]).unwrap();
        assert!(cancel_inverses(&zero).is_empty());
        let fused = fuse_single_qubit(&c);
        assert_eq!(fused.len(), 1);
    }

    #[test]
    fn ladder_junction_cancels() {
        use crate::synthesis::exp_pauli;
        let p: PauliString = "XX".parse().unwrap();
        let mut c = exp_pauli(&p, 0.3).unwrap();
        c.append(&exp_pauli(&p, 0.4).unwrap()).unwrap();
        let out = cancel_inverses(&c);
        assert!(out.len() < c.len());
        assert!(out.cx_count() < c.cx_count());
        assert_equivalent(&out, &c, 1e-10);
    }

    #[test]
    fn fuse_examples() {
        let ssdg = Circuit::from_gates(1, [Gate::S(0), Gate::Sdg(0)]).unwrap();
        assert!(fuse_single_qubit(&ssdg).is_empty());
        let hsh = Circuit::from_gates(1, [Gate::H(0), Gate::S(0), Gate::H(0)]).unwrap();
        let out = fuse_single_qubit(&hsh);
        assert!(out.len() <= 3);
        assert_equivalent(&out, &hsh, 1e-12);
        let long = Circuit::from_gates(
            1,
            [Gate::Rz(0, 0.3), Gate::H(0), Gate::S(0), Gate::Rz(0, 1.1), Gate::H(0), Gate::X(0), Gate::Rz(0, -0.7)],
        )
        .unwrap();
        let out = fuse_single_qubit(&long);
        assert!(out.len() <= 5);
        assert_equivalent(&out, &long, 1e-12);
    }

    #[test]
    fn clifford_table_has_24_elements() {
        assert_eq!(clifford_table().len(), 24);
        assert!(clifford_table().values().all(|w| w.len() <= 3));
    }

    #[test]
    fn exposed_two_qubit_pair_is_cancelled_by_fusion() {
        // H Z H X on the control is the identity, exposing CX CX
        let c = Circuit::from_gates(
            2,
            [Gate::Cx(0, 1), Gate::H(0), Gate::Z(0), Gate::H(0), Gate::X(0), Gate::Cx(0, 1)],
        )
        .unwrap();
        let (out, rounds) = optimize(&c);
        assert!(out.is_empty(), "{:?}", out.gates());
        assert!(rounds <= 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn passes_preserve_unitary(seed in 0u64..10_000) {
            let c = redundant_circuit(4, 40, seed);
            let a = cancel_inverses(&c);
            let b = fuse_single_qubit(&c);
            let (o, rounds) = optimize(&c);
            assert_equivalent(&a, &c, 1e-10);
            assert_equivalent(&b, &c, 1e-10);
            assert_equivalent(&o, &c, 1e-10);
            prop_assert!(rounds <= 2);
            prop_assert_eq!(cancel_inverses(&a), a.clone());
            prop_assert!(o.len() <= c.len());
        }
    }

    #[test]
    fn complete_graph_routing_is_identity() {
        let c = random_circuit(5, 50, 1);
        let r = route(&c, &CouplingGraph::complete(5), 3).unwrap();
        assert_eq!(r.circuit, c);
        assert_eq!(r.final_layout, (0..5).collect::<Vec<_>>());
    }

    #[test]
    fn path_graph_needs_one_swap() {
        let c = Circuit::from_gates(3, [Gate::Cx(0, 2)]).unwrap();
        let r = route(&c, &CouplingGraph::line(3), 0).unwrap();
        assert_eq!(r.circuit.len(), 2);
        assert!(matches!(r.circuit.gates()[0], Gate::Swap(..)));
        assert_eq!(r.circuit.expand_swaps().two_qubit_count(), 4);
    }

    #[test]
    fn routing_on_ring_is_sound() {
        let g = CouplingGraph::ring(5);
        for seed in 0..20 {
            let c = random_circuit(5, 30, seed);
            let r = route(&c, &g, seed).unwrap();
            for gate in r.circuit.gates() {
                if let (a, Some(b)) = gate.operands() {
                    assert!(g.has_edge(a, b));
                }
            }
            let mut back = r.circuit.clone();
            back.append(&r.permutation_circuit()).unwrap();
            assert_equivalent(&back, &c, 1e-10);
        }
    }

    #[test]
    fn relabelled_observable_keeps_expectation() {
        use crate::sim::{apply_circuit, expectation, StateVector};
        let g = CouplingGraph::line(4);
        let c = random_circuit(4, 25, 77);
        let r = route(&c, &g, 5).unwrap();
        let obs = PauliSum::from_labels(4, &[("ZIXI", 0.7), ("IYYZ", -0.2)]).unwrap();
        let s0 = StateVector::zero(4).unwrap();
        let want = expectation(&obs, &apply_circuit(&c, &s0).unwrap()).unwrap();
        let got = expectation(&r.relabel_pauli_sum(&obs).unwrap(), &apply_circuit(&r.circuit, &s0).unwrap()).unwrap();
        assert!((want - got).abs() < 1e-10);
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let g = CouplingGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(route(&Circuit::new(4), &g, 0), Err(Error::DisconnectedGraph)));
    }

    #[test]
    fn parse_edge_lists() {
        let g = CouplingGraph::parse("# ring\n0 1\n1 2 # inline\n\n2 0\n").unwrap();
        assert_eq!(g.num_qubits(), 3);
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
        let err = CouplingGraph::parse("0 1\n1 x\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(CouplingGraph::parse("3 3\n").is_err());
        assert_eq!(CouplingGraph::parse(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn best_of_trials() {
        let c = random_circuit(5, 40, 9);
        let ring = CouplingGraph::ring(5);
        let single = transpile_best_of(&c, &ring, 1, 0).unwrap();
        assert_eq!(single.circuit, transpile_once(&c, &ring, 0).unwrap().circuit);
        let best = transpile_best_of(&c, &ring, 50, 0).unwrap();
        assert!(best.report.depth <= single.report.depth);
        assert_eq!(best.report.trials_run, 50);
        assert!(best.report.depth <= best.report.total_gates);
        assert_eq!(best, transpile_best_of(&c, &ring, 50, 0).unwrap());

        let complete = transpile_best_of(&c, &CouplingGraph::complete(5), 50, 0).unwrap();
        assert_eq!(complete.report.depth, optimize(&optimize(&c).0.expand_swaps()).0.depth());
        assert!(transpile_best_of(&c, &ring, 0, 0).is_err());
    }
}
