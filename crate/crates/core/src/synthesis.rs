//! Pauli-exponential circuits, first-order product formulas, Clifford-frame
//! absorption (CDAT) and greedy chunk synthesis.
//!
//! Every method returns a circuit `E` and a Clifford frame `F` with
//! `U_default = F · E` up to global phase, so measuring `F† O F` after `E`
//! gives the same statistics as measuring `O` after the default circuit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{CliffordFrame, Pauli, PauliString, PauliSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthesisMethod {
    Default,
    Cdat,
    Greedy,
}

impl SynthesisMethod {
    pub const ALL: [SynthesisMethod; 3] = [SynthesisMethod::Default, SynthesisMethod::Cdat, SynthesisMethod::Greedy];
}

impl fmt::Display for SynthesisMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthesisMethod::Default => "default",
            SynthesisMethod::Cdat => "cdat",
            SynthesisMethod::Greedy => "greedy",
        })
    }
}

impl FromStr for SynthesisMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "default" => Ok(SynthesisMethod::Default),
            "cdat" => Ok(SynthesisMethod::Cdat),
            "greedy" | "rustiq" => Ok(SynthesisMethod::Greedy),
            other => Err(Error::input(format!("unknown synthesis method {other:?} (expected default, cdat or greedy)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermOrder {
    /// Input order.
    #[default]
    Given,
    /// Largest `|c|` first; ties keep input order.
    Descending,
}

/// Greedy chunk scoring parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    /// Weight of the k-th remaining rotation is `decay^k`.
    pub decay: f64,
    /// Only the first `window` remaining rotations are scored.
    pub window: usize,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig { decay: 0.8, window: 64 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub trotter_steps: usize,
    pub time: f64,
    pub method: SynthesisMethod,
    #[serde(default)]
    pub order: TermOrder,
    #[serde(default)]
    pub greedy: GreedyConfig,
}

impl SynthesisConfig {
    pub fn new(trotter_steps: usize, time: f64, method: SynthesisMethod) -> Result<Self> {
        let cfg = SynthesisConfig { trotter_steps, time, method, order: TermOrder::Given, greedy: GreedyConfig::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trotter_steps == 0 {
            return Err(Error::config("trotter_steps must be at least 1"));
        }
        if !self.time.is_finite() {
            return Err(Error::config(format!("time must be finite, got {}", self.time)));
        }
        if !(self.greedy.decay > 0.0 && self.greedy.decay <= 1.0) || self.greedy.window == 0 {
            return Err(Error::config("greedy decay must lie in (0, 1] and window must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesizedProgram {
    pub circuit: Circuit,
    pub frame: CliffordFrame,
    pub transformed_observables: Vec<PauliSum>,
    /// Coefficient of the Hamiltonian's identity terms (a global phase here).
    pub energy_offset: f64,
}

impl SynthesizedProgram {
    /// `E` followed by the gates realising `F`: the default unitary.
    pub fn full_circuit(&self) -> Circuit {
        let mut c = self.circuit.clone();
        c.append(&self.frame.to_circuit()).expect("same register");
        c
    }
}

/// Basis change taking `letter` to Z, in time order.
fn basis_change(letter: Pauli) -> &'static [fn(usize) -> Gate] {
    match letter {
        Pauli::X => &[Gate::H],
        Pauli::Y => &[Gate::Sdg, Gate::H],
        _ => &[],
    }
}

fn sign_of(p: &PauliString) -> Result<f64> {
    p.sign().ok_or_else(|| Error::NonHermitian(format!("rotation generator {p} has an imaginary phase")))
}

/// Basis change `B` and ladder `L` (time order) for `exp(-i theta P)`;
/// the full circuit is `B, L, Rz(2 theta) on pivot, L†, B†`.
fn ladder_parts(p: &PauliString) -> Result<(Vec<Gate>, Vec<Gate>, usize)> {
    let support = p.support();
    let Some(&pivot) = support.last() else { return Err(Error::IdentityRotation) };
    let mut basis = Vec::new();
    for &q in &support {
        for make in basis_change(p.get(q)) {
            basis.push(make(q));
        }
    }
    let ladder = support.windows(2).map(|w| Gate::Cx(w[0], w[1])).collect();
    Ok((basis, ladder, pivot))
}

fn reversed_inverse(gates: &[Gate]) -> impl Iterator<Item = Gate> + '_ {
    gates.iter().rev().map(Gate::inverse)
}

/// Circuit for `exp(-i theta P)`: `2(w-1)` CX gates and at most `4w+1`
/// single-qubit gates.
pub fn exp_pauli(p: &PauliString, theta: f64) -> Result<Circuit> {
    let theta = theta * sign_of(p)?;
    let (basis, ladder, pivot) = ladder_parts(p)?;
    let mut c = Circuit::new(p.num_qubits());
    for g in basis.iter().chain(&ladder) {
        c.push_unchecked(*g);
    }
    c.push_unchecked(Gate::Rz(pivot, 2.0 * theta));
    for g in reversed_inverse(&ladder).chain(reversed_inverse(&basis)) {
        c.push_unchecked(g);
    }
    Ok(c)
}

/// Non-identity terms as `(P, theta_k = c_k t / n)` for one Trotter step.
fn step_rotations(h: &PauliSum, cfg: &SynthesisConfig) -> Vec<(PauliString, f64)> {
    let mut terms: Vec<(PauliString, f64)> = h
        .iter()
        .filter(|t| !t.pauli.is_identity())
        .map(|t| (t.pauli.clone(), t.coeff * cfg.time / cfg.trotter_steps as f64))
        .collect();
    if cfg.order == TermOrder::Descending {
        terms.sort_by(|a, b| b.1.abs().partial_cmp(&a.1.abs()).unwrap_or(std::cmp::Ordering::Equal));
    }
    terms
}

/// All `n` repetitions of the step rotations, in time order.
pub fn trotter_rotations(h: &PauliSum, cfg: &SynthesisConfig) -> Result<Vec<(PauliString, f64)>> {
    cfg.validate()?;
    let step = step_rotations(h, cfg);
    if step.is_empty() {
        return Err(Error::input("Hamiltonian has no non-identity terms"));
    }
    Ok((0..cfg.trotter_steps).flat_map(|_| step.iter().cloned()).collect())
}

fn check_widths(h: &PauliSum, observables: &[PauliSum], initial: &Circuit) -> Result<()> {
    let n = h.num_qubits();
    if initial.num_qubits() != n {
        return Err(Error::QubitCountMismatch { left: n, right: initial.num_qubits() });
    }
    for o in observables {
        if o.num_qubits() != n {
            return Err(Error::QubitCountMismatch { left: n, right: o.num_qubits() });
        }
    }
    Ok(())
}

/// First-order product formula `(Π_k exp(-i c_k P_k t/n))^n` after the
/// initial-state gates, synthesised with `cfg.method`.
pub fn trotter_circuit(
    initial: &Circuit,
    h: &PauliSum,
    observables: &[PauliSum],
    cfg: &SynthesisConfig,
) -> Result<SynthesizedProgram> {
    match cfg.method {
        SynthesisMethod::Default => default_program(initial, h, observables, cfg),
        SynthesisMethod::Cdat => cdat_transform(h, observables, cfg, initial),
        SynthesisMethod::Greedy => {
            check_widths(h, observables, initial)?;
            let rotations = trotter_rotations(h, cfg)?;
            let mut prog = greedy_from(initial.clone(), &rotations, observables, &cfg.greedy)?;
            prog.energy_offset = h.identity_coefficient();
            Ok(prog)
        }
    }
}

fn default_program(
    initial: &Circuit,
    h: &PauliSum,
    observables: &[PauliSum],
    cfg: &SynthesisConfig,
) -> Result<SynthesizedProgram> {
    check_widths(h, observables, initial)?;
    let mut circuit = initial.clone();
    for (p, theta) in trotter_rotations(h, cfg)? {
        circuit.append(&exp_pauli(&p, theta)?)?;
    }
    Ok(SynthesizedProgram {
        circuit,
        frame: CliffordFrame::identity(h.num_qubits()),
        transformed_observables: observables.to_vec(),
        energy_offset: h.identity_coefficient(),
    })
}

/// Product formula with every rotation's Clifford half pushed into a frame:
/// each term, conjugated by the frame so far, is split as
/// `exp(-i theta P) = (B† L†) · (Rz L B)`; only `Rz L B` is emitted.
pub fn cdat_transform(
    h: &PauliSum,
    observables: &[PauliSum],
    cfg: &SynthesisConfig,
    initial: &Circuit,
) -> Result<SynthesizedProgram> {
    check_widths(h, observables, initial)?;
    let n = h.num_qubits();
    let mut circuit = initial.clone();
    let mut frame = CliffordFrame::identity(n);
    for (p, theta) in trotter_rotations(h, cfg)? {
        let image = frame.conjugate(&p)?;
        let theta = theta * sign_of(&image)?;
        let image = image.with_phase(0);
        let (basis, ladder, pivot) = ladder_parts(&image)?;
        for g in basis.iter().chain(&ladder) {
            circuit.push_unchecked(*g);
        }
        circuit.push_unchecked(Gate::Rz(pivot, 2.0 * theta));
        // F <- F · B† L†
        let clifford: Vec<Gate> = reversed_inverse(&ladder).chain(reversed_inverse(&basis)).collect();
        for g in clifford.iter().rev() {
            frame.prepend_gate(g)?;
        }
    }
    let transformed = observables.iter().map(|o| frame.conjugate_sum(o)).collect::<Result<Vec<_>>>()?;
    Ok(SynthesizedProgram { circuit, frame, transformed_observables: transformed, energy_offset: h.identity_coefficient() })
}

type Word = &'static [fn(usize) -> Gate];

const CHUNK_WORDS: [Word; 6] =
    [&[], &[Gate::H], &[Gate::S], &[Gate::H, Gate::S], &[Gate::S, Gate::H], &[Gate::H, Gate::S, Gate::H]];

fn chunk(a: usize, b: usize, ca: usize, cb: usize) -> Vec<Gate> {
    let mut g: Vec<Gate> = CHUNK_WORDS[ca].iter().map(|m| m(a)).collect();
    g.extend(CHUNK_WORDS[cb].iter().map(|m| m(b)));
    g.push(Gate::Cx(a, b));
    g
}

/// `G P G†` for a time-ordered Clifford gate list `G`.
fn push_through(p: &mut PauliString, gates: &[Gate]) -> Result<()> {
    for g in gates {
        p.conjugate_in_place(&g.inverse())?;
    }
    Ok(())
}

fn single_qubit_rotation(p: &PauliString, theta: f64) -> Result<Vec<Gate>> {
    let theta = theta * sign_of(p)?;
    let q = p.support()[0];
    let rz = Gate::Rz(q, 2.0 * theta);
    Ok(match p.get(q) {
        Pauli::Z => vec![rz],
        Pauli::X => vec![Gate::H(q), rz, Gate::H(q)],
        Pauli::Y => vec![Gate::Sdg(q), Gate::H(q), rz, Gate::H(q), Gate::S(q)],
        Pauli::I => unreachable!("weight-one word"),
    })
}

/// Greedy synthesis of the rotation list `Π exp(-i theta_k P_k)` (first
/// entry applied first).
///
/// Each round scores every chunk `C_a C_b CX(a,b)` (single-qubit Cliffords
/// from {I, H, S, HS, SH, HSH}) that lowers the weight of the leading
/// rotation, by `Σ_k decay^k Δweight_k` over the remaining list. The best
/// chunk is emitted and pushed through the remaining rotations; weight-one
/// rotations that commute with everything ahead of them are emitted as
/// single-qubit rotations. The accumulated Clifford ends up in the frame.
pub fn greedy_synthesize(
    num_qubits: usize,
    rotations: &[(PauliString, f64)],
    observables: &[PauliSum],
    cfg: &GreedyConfig,
) -> Result<SynthesizedProgram> {
    if rotations.is_empty() {
        return Err(Error::input("rotation list is empty"));
    }
    greedy_from(Circuit::new(num_qubits), rotations, observables, cfg)
}

fn greedy_from(
    mut circuit: Circuit,
    rotations: &[(PauliString, f64)],
    observables: &[PauliSum],
    cfg: &GreedyConfig,
) -> Result<SynthesizedProgram> {
    let n = circuit.num_qubits();
    let mut remaining: Vec<(PauliString, f64)> = Vec::with_capacity(rotations.len());
    for (p, theta) in rotations {
        if p.num_qubits() != n {
            return Err(Error::QubitCountMismatch { left: n, right: p.num_qubits() });
        }
        sign_of(p)?;
        if !p.is_identity() {
            remaining.push((p.clone(), *theta));
        }
    }
    for o in observables {
        if o.num_qubits() != n {
            return Err(Error::QubitCountMismatch { left: n, right: o.num_qubits() });
        }
    }
    let mut frame = CliffordFrame::identity(n);
    let mut start = 0usize;
    while start < remaining.len() {
        emit_ready(&mut remaining, &mut start, &mut circuit, cfg.window)?;
        if start >= remaining.len() {
            break;
        }
        let window_end = (start + cfg.window).min(remaining.len());
        let lead = remaining[start].0.clone();
        let support = lead.support();
        let mut best: Option<(f64, Vec<Gate>)> = None;
        for &a in &support {
            for &b in &support {
                if a == b {
                    continue;
                }
                for ca in 0..CHUNK_WORDS.len() {
                    for cb in 0..CHUNK_WORDS.len() {
                        let gates = chunk(a, b, ca, cb);
                        let mut lead_after = lead.clone();
                        push_through(&mut lead_after, &gates)?;
                        if lead_after.weight() >= lead.weight() {
                            continue;
                        }
                        let mut score = 0.0;
                        let mut w = 1.0;
                        for (p, _) in &remaining[start..window_end] {
                            let mut q = p.clone();
                            push_through(&mut q, &gates)?;
                            score += w * (p.weight() as f64 - q.weight() as f64);
                            w *= cfg.decay;
                        }
                        // strict comparison keeps the lowest (a, b, ca, cb)
                        if best.as_ref().is_none_or(|(s, _)| score > *s + 1e-12) {
                            best = Some((score, gates));
                        }
                    }
                }
            }
        }
        let (_, gates) = best.expect("a weight-reducing chunk always exists for weight >= 2");
        for g in &gates {
            circuit.push_unchecked(*g);
            frame.prepend_gate(&g.inverse())?;
        }
        for (p, _) in remaining[start..].iter_mut() {
            push_through(p, &gates)?;
        }
    }
    let transformed = observables.iter().map(|o| frame.conjugate_sum(o)).collect::<Result<Vec<_>>>()?;
    Ok(SynthesizedProgram { circuit, frame, transformed_observables: transformed, energy_offset: 0.0 })
}

/// Emits weight-one rotations that can be moved to the front of the
/// remaining list.
fn emit_ready(
    remaining: &mut [(PauliString, f64)],
    start: &mut usize,
    circuit: &mut Circuit,
    window: usize,
) -> Result<()> {
    loop {
        let end = (*start + window).min(remaining.len());
        let mut found = None;
        for j in *start..end {
            if remaining[j].0.weight() == 1 {
                let p = &remaining[j].0;
                let mut free = true;
                for (q, _) in &remaining[*start..j] {
                    if !q.commutes(p)? {
                        free = false;
                        break;
                    }
                }
                if free {
                    found = Some(j);
                    break;
                }
            }
        }
        let Some(j) = found else { return Ok(()) };
        let (p, theta) = remaining[j].clone();
        for g in single_qubit_rotation(&p, theta)? {
            circuit.push_unchecked(g);
        }
        // move the emitted rotation out of the live range
        remaining[*start..=j].rotate_right(1);
        *start += 1;
        if *start >= remaining.len() {
            return Ok(());
        }
    }
}
