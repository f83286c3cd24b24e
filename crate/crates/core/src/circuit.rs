//! Exact and sampled simulation of the 10-qubit teleportation circuit:
//! mixed-state channel initialization, mid-circuit measurement with exact
//! branch enumeration, classically conditioned Pauli corrections, and seeded
//! shot sampling layered on the exact distribution.

use std::collections::BTreeMap;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelParams};
use crate::error::{Error, Result};
use crate::linalg::{cr, C64, C_ONE, C_ZERO};
use crate::metrics;
use crate::protocol::{self, Direction, ProtocolConfig, TriggerPhase};
use crate::states::{PairDensity, QubitDensity};

pub const NUM_QUBITS: usize = 10;
const MAX_SIM_QUBITS: usize = 12;
pub const NUM_CLASSICAL_BITS: usize = 4;

/// Role of each wire, following the published register table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitRole {
    TriggerEven,
    StorageEven2,
    StorageEven1,
    Even,
    Channel1,
    Channel2,
    Odd,
    StorageOdd1,
    StorageOdd2,
    TriggerOdd,
}

impl QubitRole {
    pub fn index(self) -> usize {
        match self {
            QubitRole::TriggerEven => 0,
            QubitRole::StorageEven2 => 1,
            QubitRole::StorageEven1 => 2,
            QubitRole::Even => 3,
            QubitRole::Channel1 => 4,
            QubitRole::Channel2 => 5,
            QubitRole::Odd => 6,
            QubitRole::StorageOdd1 => 7,
            QubitRole::StorageOdd2 => 8,
            QubitRole::TriggerOdd => 9,
        }
    }

    pub fn of_index(i: usize) -> Option<Self> {
        [
            QubitRole::TriggerEven,
            QubitRole::StorageEven2,
            QubitRole::StorageEven1,
            QubitRole::Even,
            QubitRole::Channel1,
            QubitRole::Channel2,
            QubitRole::Odd,
            QubitRole::StorageOdd1,
            QubitRole::StorageOdd2,
            QubitRole::TriggerOdd,
        ]
        .get(i)
        .copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            QubitRole::TriggerEven => "T_e",
            QubitRole::StorageEven2 => "S_e^2",
            QubitRole::StorageEven1 => "S_e^1",
            QubitRole::Even => "Even",
            QubitRole::Channel1 => "psi_1",
            QubitRole::Channel2 => "psi_2",
            QubitRole::Odd => "Odd",
            QubitRole::StorageOdd1 => "S_o^1",
            QubitRole::StorageOdd2 => "S_o^2",
            QubitRole::TriggerOdd => "T_o",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateKind {
    #[serde(rename = "X")]
    X,
    #[serde(rename = "H")]
    H,
    #[serde(rename = "RY")]
    Ry,
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "CCNOT")]
    Ccnot,
    #[serde(rename = "CZ")]
    Cz,
    #[serde(rename = "CP")]
    Cp,
    #[serde(rename = "MEASURE")]
    Measure,
    #[serde(rename = "COND-X")]
    CondX,
    #[serde(rename = "COND-Z")]
    CondZ,
}

/// One circuit operation in the declarative description-file schema:
/// kind, operand qubits, optional phase, optional classical bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub operands: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    /// classical bit targets for MEASURE, or the single condition bit for
    /// COND-X / COND-Z
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bits: Option<Vec<usize>>,
}

impl Gate {
    pub fn x(q: usize) -> Self {
        Self {
            kind: GateKind::X,
            operands: vec![q],
            phase: None,
            bits: None,
        }
    }

    pub fn h(q: usize) -> Self {
        Self {
            kind: GateKind::H,
            operands: vec![q],
            phase: None,
            bits: None,
        }
    }

    pub fn ry(q: usize, phase: f64) -> Self {
        Self {
            kind: GateKind::Ry,
            operands: vec![q],
            phase: Some(phase),
            bits: None,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            operands: vec![control, target],
            phase: None,
            bits: None,
        }
    }

    pub fn ccnot(c1: usize, c2: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Ccnot,
            operands: vec![c1, c2, target],
            phase: None,
            bits: None,
        }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self {
            kind: GateKind::Cz,
            operands: vec![a, b],
            phase: None,
            bits: None,
        }
    }

    pub fn cp(a: usize, b: usize, phase: f64) -> Self {
        Self {
            kind: GateKind::Cp,
            operands: vec![a, b],
            phase: Some(phase),
            bits: None,
        }
    }

    pub fn measure(targets: Vec<usize>, bits: Vec<usize>) -> Self {
        Self {
            kind: GateKind::Measure,
            operands: targets,
            phase: None,
            bits: Some(bits),
        }
    }

    pub fn cond_x(q: usize, bit: usize) -> Self {
        Self {
            kind: GateKind::CondX,
            operands: vec![q],
            phase: None,
            bits: Some(vec![bit]),
        }
    }

    pub fn cond_z(q: usize, bit: usize) -> Self {
        Self {
            kind: GateKind::CondZ,
            operands: vec![q],
            phase: None,
            bits: Some(vec![bit]),
        }
    }
}

/// Declarative gate list over named qubits; serializes to the JSON
/// description-file schema bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub qubits: usize,
    pub roles: Vec<String>,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedGate(format!("circuit file: {e}")))
    }

    /// Number of classical bits referenced by MEASURE gates.
    pub fn classical_bits(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| g.kind == GateKind::Measure)
            .flat_map(|g| g.bits.iter().flatten())
            .map(|&b| b + 1)
            .max()
            .unwrap_or(0)
    }
}

/// Density matrix over the active register plus the classical bit store.
#[derive(Debug, Clone)]
pub struct SimState {
    n_qubits: usize,
    dim: usize,
    rho: Vec<C64>,
    pub cbits: Vec<u8>,
}

impl SimState {
    pub fn all_zeros(n_qubits: usize, n_cbits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_SIM_QUBITS {
            return Err(Error::MalformedGate(format!(
                "register of {n_qubits} qubits outside supported range 1..={MAX_SIM_QUBITS}"
            )));
        }
        let dim = 1 << n_qubits;
        let mut rho = vec![C_ZERO; dim * dim];
        rho[0] = C_ONE;
        Ok(Self {
            n_qubits,
            dim,
            rho,
            cbits: vec![0; n_cbits],
        })
    }

    /// The 10-qubit initial state: channel pair state on `qr[4]`, `qr[5]`,
    /// every other qubit in |0>.
    pub fn with_channel(params: &ChannelParams) -> Result<Self> {
        let pair = channel_init(params)?;
        let mut state = Self::all_zeros(NUM_QUBITS, NUM_CLASSICAL_BITS)?;
        state.rho[0] = C_ZERO;
        // bits of qubits 4 and 5 (qubit 0 is the most significant)
        let sub = |i: usize| -> usize { (i >> 4) & 0b11 };
        let rest_zero = |i: usize| -> bool { i & !(0b11 << 4) == 0 };
        for i in 0..state.dim {
            if !rest_zero(i) {
                continue;
            }
            for j in 0..state.dim {
                if !rest_zero(j) {
                    continue;
                }
                state.rho[i * state.dim + j] = pair.matrix()[(sub(i), sub(j))];
            }
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.rho[i * self.dim + i].re).sum()
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::MalformedGate(format!(
                "qubit {q} outside register of {}",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// rho -> U rho U^dag for a single-qubit unitary gated on `controls`.
    fn apply_controlled_single(
        &mut self,
        controls: &[usize],
        target: usize,
        u: &Matrix2<C64>,
    ) -> Result<()> {
        self.check_qubit(target)?;
        for &c in controls {
            self.check_qubit(c)?;
            if c == target {
                return Err(Error::MalformedGate("control equals target".into()));
            }
        }
        let dim = self.dim;
        let mt = self.mask(target);
        let cmask: usize = controls.iter().map(|&c| self.mask(c)).fold(0, |a, b| a | b);
        // row pass: U on the left
        for i0 in 0..dim {
            if i0 & mt != 0 || (i0 & cmask) != cmask {
                continue;
            }
            let i1 = i0 | mt;
            for j in 0..dim {
                let a = self.rho[i0 * dim + j];
                let b = self.rho[i1 * dim + j];
                self.rho[i0 * dim + j] = u[(0, 0)] * a + u[(0, 1)] * b;
                self.rho[i1 * dim + j] = u[(1, 0)] * a + u[(1, 1)] * b;
            }
        }
        // column pass: U^dag on the right
        for j0 in 0..dim {
            if j0 & mt != 0 || (j0 & cmask) != cmask {
                continue;
            }
            let j1 = j0 | mt;
            for i in 0..dim {
                let a = self.rho[i * dim + j0];
                let b = self.rho[i * dim + j1];
                self.rho[i * dim + j0] = a * u[(0, 0)].conj() + b * u[(0, 1)].conj();
                self.rho[i * dim + j1] = a * u[(1, 0)].conj() + b * u[(1, 1)].conj();
            }
        }
        Ok(())
    }

    /// rho -> D rho D^dag for the diagonal unitary that multiplies basis
    /// states with all `qualifier` bits set by `phase`.
    fn apply_diagonal_phase(&mut self, qualifier: &[usize], phase: C64) -> Result<()> {
        for &q in qualifier {
            self.check_qubit(q)?;
        }
        let qmask: usize = qualifier
            .iter()
            .map(|&q| self.mask(q))
            .fold(0, |a, b| a | b);
        let dim = self.dim;
        for i in 0..dim {
            let pi = if i & qmask == qmask { phase } else { C_ONE };
            for j in 0..dim {
                let pj = if j & qmask == qmask {
                    phase.conj()
                } else {
                    C_ONE
                };
                let f = pi * pj;
                if f != C_ONE {
                    self.rho[i * dim + j] *= f;
                }
            }
        }
        Ok(())
    }

    /// Project onto the given outcome of the measured qubits (unnormalized);
    /// returns the branch probability.
    fn project(&mut self, targets: &[usize], outcome: usize) -> Result<f64> {
        for &t in targets {
            self.check_qubit(t)?;
        }
        let dim = self.dim;
        let matches = |i: usize| -> bool {
            targets.iter().enumerate().all(|(k, &t)| {
                ((i & self.mask(t)) != 0) == ((outcome >> (targets.len() - 1 - k)) & 1 == 1)
            })
        };
        let keep: Vec<bool> = (0..dim).map(matches).collect();
        let mut prob = 0.0;
        for (i, kept) in keep.iter().enumerate() {
            if *kept {
                prob += self.rho[i * dim + i].re;
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                if !(keep[i] && keep[j]) {
                    self.rho[i * dim + j] = C_ZERO;
                }
            }
        }
        Ok(prob)
    }

    fn scale(&mut self, factor: f64) {
        for z in self.rho.iter_mut() {
            *z *= cr(factor);
        }
    }

    /// Reduced single-qubit state of wire `q`.
    pub fn reduced_qubit(&self, q: usize) -> Result<QubitDensity> {
        self.check_qubit(q)?;
        let dim = self.dim;
        let mq = self.mask(q);
        let mut m = Matrix2::zeros();
        for i in 0..dim {
            let a = usize::from(i & mq != 0);
            // partner index with qubit q flipped to b
            for b in 0..2 {
                let j = if b == 1 { i | mq } else { i & !mq };
                m[(a, b)] += self.rho[i * dim + j];
            }
        }
        QubitDensity::new(m)
    }
}

/// The mixed channel state loaded onto `qr[4]`, `qr[5]`: exactly the trace-one
/// reduced pair state of the coherent channel.
pub fn channel_init(params: &ChannelParams) -> Result<PairDensity> {
    channel::reduced_pair_state(params)
}

fn single_matrix(kind: GateKind, phase: Option<f64>) -> Result<Matrix2<C64>> {
    Ok(match kind {
        GateKind::X | GateKind::CondX => Matrix2::new(C_ZERO, C_ONE, C_ONE, C_ZERO),
        GateKind::H => {
            let s = cr(std::f64::consts::FRAC_1_SQRT_2);
            Matrix2::new(s, s, s, -s)
        }
        GateKind::Ry => {
            let half = phase.ok_or_else(|| Error::MalformedGate("RY needs a phase".into()))? / 2.0;
            Matrix2::new(
                cr(half.cos()),
                cr(-half.sin()),
                cr(half.sin()),
                cr(half.cos()),
            )
        }
        GateKind::CondZ => Matrix2::new(C_ONE, C_ZERO, C_ZERO, -C_ONE),
        _ => return Err(Error::MalformedGate("not a single-qubit kind".into())),
    })
}

fn expect_arity(gate: &Gate, arity: usize) -> Result<()> {
    if gate.operands.len() != arity {
        return Err(Error::MalformedGate(format!(
            "{:?} expects {arity} operand(s), got {}",
            gate.kind,
            gate.operands.len()
        )));
    }
    Ok(())
}

/// Apply a unitary or classically conditioned gate. Measurement is performed
/// by [`run_exact`] / [`run_shots`] through exact branch enumeration.
pub fn apply_gate(state: &mut SimState, gate: &Gate) -> Result<()> {
    match gate.kind {
        GateKind::X | GateKind::H | GateKind::Ry => {
            expect_arity(gate, 1)?;
            let u = single_matrix(gate.kind, gate.phase)?;
            state.apply_controlled_single(&[], gate.operands[0], &u)?;
        }
        GateKind::Cnot => {
            expect_arity(gate, 2)?;
            let u = single_matrix(GateKind::X, None)?;
            state.apply_controlled_single(&gate.operands[..1], gate.operands[1], &u)?;
        }
        GateKind::Ccnot => {
            expect_arity(gate, 3)?;
            let u = single_matrix(GateKind::X, None)?;
            state.apply_controlled_single(&gate.operands[..2], gate.operands[2], &u)?;
        }
        GateKind::Cz => {
            expect_arity(gate, 2)?;
            state.apply_diagonal_phase(&gate.operands, -C_ONE)?;
        }
        GateKind::Cp => {
            expect_arity(gate, 2)?;
            let phi = gate
                .phase
                .ok_or_else(|| Error::MalformedGate("CP needs a phase".into()))?;
            if !phi.is_finite() {
                return Err(Error::MalformedGate("CP phase not finite".into()));
            }
            state.apply_diagonal_phase(&gate.operands, C64::new(phi.cos(), phi.sin()))?;
        }
        GateKind::CondX | GateKind::CondZ => {
            expect_arity(gate, 1)?;
            let bit = gate
                .bits
                .as_ref()
                .and_then(|b| b.first())
                .copied()
                .ok_or_else(|| {
                    Error::MalformedGate("conditional gate needs a classical bit".into())
                })?;
            let set = *state
                .cbits
                .get(bit)
                .ok_or_else(|| Error::MalformedGate(format!("classical bit {bit} out of range")))?;
            if set == 1 {
                let u = single_matrix(gate.kind, None)?;
                state.apply_controlled_single(&[], gate.operands[0], &u)?;
            }
        }
        GateKind::Measure => {
            return Err(Error::MalformedGate(
                "MEASURE is executed by run_exact / run_shots, not apply_gate".into(),
            ));
        }
    }
    let tr = state.trace();
    if (tr - 1.0).abs() > 1e-10 {
        return Err(Error::MalformedState(format!(
            "trace drifted to {tr} after {:?}",
            gate.kind
        )));
    }
    Ok(())
}

/// Measurement histogram; exact probabilities always, counts when sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub probabilities: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<BTreeMap<String, u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn bits_key(cbits: &[u8]) -> String {
    cbits
        .iter()
        .map(|&b| if b == 1 { '1' } else { '0' })
        .collect()
}

/// Visitor over measurement branches: (classical bits, probability, state at
/// the measurement point, state after the trailing conditional gates).
type BranchVisitor<'a> = dyn FnMut(&[u8], f64, &SimState, &SimState) -> Result<()> + 'a;

/// Walk the gate list, forking at every MEASURE; the visitor sees each
/// surviving branch with its probability, the normalized state right after
/// the measurement, and the final state after conditional corrections.
fn enumerate_branches(
    circuit: &Circuit,
    state: SimState,
    weight: f64,
    from: usize,
    visit: &mut dyn FnMut(f64, &SimState, &SimState) -> Result<()>,
) -> Result<()> {
    let mut current = state;
    for (pos, gate) in circuit.gates.iter().enumerate().skip(from) {
        if gate.kind == GateKind::Measure {
            let targets = &gate.operands;
            let bits = gate
                .bits
                .as_ref()
                .ok_or_else(|| Error::MalformedGate("MEASURE needs classical bits".into()))?;
            if bits.len() != targets.len() {
                return Err(Error::MalformedGate(
                    "MEASURE bits/targets length mismatch".into(),
                ));
            }
            for outcome in 0..(1usize << targets.len()) {
                let mut branch = current.clone();
                let prob = branch.project(targets, outcome)?;
                if prob <= 1e-12 {
                    continue;
                }
                branch.scale(1.0 / prob);
                for (k, &bit) in bits.iter().enumerate() {
                    if bit >= branch.cbits.len() {
                        return Err(Error::MalformedGate(format!(
                            "classical bit {bit} out of range"
                        )));
                    }
                    branch.cbits[bit] = ((outcome >> (targets.len() - 1 - k)) & 1) as u8;
                }
                enumerate_branches(circuit, branch, weight * prob, pos + 1, visit)?;
            }
            return Ok(());
        }
        apply_gate(&mut current, gate)?;
    }
    let at_measure = current.clone();
    visit(weight, &at_measure, &current)
}

fn enumerate_with_snapshots(
    circuit: &Circuit,
    init: &SimState,
    visit: &mut BranchVisitor<'_>,
) -> Result<()> {
    // split the walk so the visitor sees both the post-measure and the final
    // state: find the last MEASURE, snapshot there
    let mut measured: Vec<(Vec<u8>, f64, SimState)> = Vec::new();
    let last_measure = circuit
        .gates
        .iter()
        .rposition(|g| g.kind == GateKind::Measure);
    match last_measure {
        None => {
            let mut current = init.clone();
            for gate in &circuit.gates {
                apply_gate(&mut current, gate)?;
            }
            visit(&current.cbits.clone(), 1.0, &current, &current)
        }
        Some(split) => {
            let head = Circuit {
                qubits: circuit.qubits,
                roles: circuit.roles.clone(),
                gates: circuit.gates[..=split].to_vec(),
            };
            enumerate_branches(&head, init.clone(), 1.0, 0, &mut |w, _, s| {
                measured.push((s.cbits.clone(), w, s.clone()));
                Ok(())
            })?;
            for (bits, weight, snapshot) in measured {
                let mut final_state = snapshot.clone();
                for gate in &circuit.gates[split + 1..] {
                    if gate.kind == GateKind::Measure {
                        unreachable!("split at the last MEASURE");
                    }
                    apply_gate(&mut final_state, gate)?;
                }
                visit(&bits, weight, &snapshot, &final_state)?;
            }
            Ok(())
        }
    }
}

/// Exact outcome distribution over the classical register, enumerating every
/// measurement branch.
pub fn run_exact(circuit: &Circuit, init: &SimState) -> Result<Histogram> {
    if circuit.qubits > NUM_QUBITS {
        return Err(Error::MalformedGate(format!(
            "register of {} qubits exceeds the supported {NUM_QUBITS}",
            circuit.qubits
        )));
    }
    let mut probabilities: BTreeMap<String, f64> = BTreeMap::new();
    enumerate_with_snapshots(circuit, init, &mut |bits, weight, _, _| {
        *probabilities.entry(bits_key(bits)).or_insert(0.0) += weight;
        Ok(())
    })?;
    Ok(Histogram {
        probabilities,
        counts: None,
        shots: None,
        seed: None,
    })
}

/// Draw shots from the exact branch distribution with a seeded generator;
/// identical (circuit, init, shots, seed) reproduce the histogram exactly.
pub fn run_shots(circuit: &Circuit, init: &SimState, shots: u64, seed: u64) -> Result<Histogram> {
    if shots == 0 {
        return Err(Error::OutOfRange {
            what: "shots",
            value: 0.0,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let exact = run_exact(circuit, init)?;
    let outcomes: Vec<(&String, &f64)> = exact.probabilities.iter().collect();
    let total: f64 = outcomes.iter().map(|(_, &p)| p).sum();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..shots {
        let draw: f64 = rng.gen_range(0.0..total);
        let mut acc = 0.0;
        let mut chosen = outcomes.last().expect("nonempty distribution").0;
        for (key, &p) in &outcomes {
            acc += p;
            if draw < acc {
                chosen = key;
                break;
            }
        }
        *counts.entry(chosen.clone()).or_insert(0) += 1;
    }
    Ok(Histogram {
        probabilities: exact.probabilities,
        counts: Some(counts),
        shots: Some(shots),
        seed: Some(seed),
    })
}

/// The shipped reconstruction of the published 10-qubit circuit.
///
/// Step 2 prepares the triggers with X then RY(theta - pi), which is the
/// X-only preparation at theta = pi. Step 3 entangles Even/Odd with the
/// channel (H before CNOT; the prose order would leave the CNOT controls in
/// |0>). Step 4 copies one channel wire per side into a storage qubit under
/// trigger control. Step 5 is the H/CZ/CP(m pi)/CZ block per side. The four
/// storage qubits are measured into classical bits (S_e^1, S_e^2, S_o^1,
/// S_o^2) and cross-side conditional corrections close the protocol.
pub fn build_bqt_circuit(params: &ChannelParams, triggers: &TriggerPhase) -> Circuit {
    use QubitRole::*;
    let pi = std::f64::consts::PI;
    let phase = params.cos_m_pi().acos(); // m pi reduced to {0, pi} by parity
    let q = |r: QubitRole| r.index();
    let gates = vec![
        Gate::x(q(TriggerEven)),
        Gate::x(q(TriggerOdd)),
        Gate::ry(q(TriggerEven), triggers.theta_e - pi),
        Gate::ry(q(TriggerOdd), triggers.theta_o - pi),
        Gate::h(q(Even)),
        Gate::h(q(Odd)),
        Gate::cnot(q(Even), q(Channel1)),
        Gate::cnot(q(Odd), q(Channel2)),
        Gate::ccnot(q(TriggerEven), q(Channel1), q(StorageEven1)),
        Gate::ccnot(q(TriggerOdd), q(Channel2), q(StorageOdd2)),
        Gate::h(q(Even)),
        Gate::h(q(Channel1)),
        Gate::cz(q(Even), q(Channel1)),
        Gate::cp(q(Even), q(Channel1), phase),
        Gate::cz(q(Even), q(Channel1)),
        Gate::h(q(Odd)),
        Gate::h(q(Channel2)),
        Gate::cz(q(Odd), q(Channel2)),
        Gate::cp(q(Odd), q(Channel2), phase),
        Gate::cz(q(Odd), q(Channel2)),
        Gate::measure(
            vec![
                q(StorageEven1),
                q(StorageEven2),
                q(StorageOdd1),
                q(StorageOdd2),
            ],
            vec![0, 1, 2, 3],
        ),
        // each side corrects from the other side's classical bits
        Gate::cond_x(q(Even), 3),
        Gate::cond_z(q(Even), 2),
        Gate::cond_x(q(Odd), 0),
        Gate::cond_z(q(Odd), 1),
    ];
    Circuit {
        qubits: NUM_QUBITS,
        roles: (0..NUM_QUBITS)
            .map(|i| {
                QubitRole::of_index(i)
                    .expect("ten roles")
                    .name()
                    .to_string()
            })
            .collect(),
        gates,
    }
}

/// Per-branch comparison of the circuit's Even/Odd wires against the
/// protocol-module predictions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchFidelity {
    pub bits: String,
    pub probability: f64,
    pub even_pre_correction: f64,
    pub even_post_correction: f64,
    pub odd_pre_correction: f64,
    pub odd_post_correction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub branches: Vec<BranchFidelity>,
    /// probability-weighted mean of the post-correction fidelities
    pub mean_even: f64,
    pub mean_odd: f64,
}

/// Run the shipped circuit, extract the Even/Odd reduced states per branch
/// (before and after the conditional corrections), and tabulate Uhlmann
/// fidelities against the teleported-state predictions. Deviations are data
/// for the compare report, not assertions.
pub fn teleport_roundtrip_check(
    params: &ChannelParams,
    triggers: &TriggerPhase,
) -> Result<RoundtripReport> {
    let circuit = build_bqt_circuit(params, triggers);
    let init = SimState::with_channel(params)?;
    let config = ProtocolConfig::new(*params, *triggers);
    let outcome = protocol::teleported_states(&config)?;
    let predicted_even = outcome.output_e_state()?;
    let predicted_odd = outcome.output_o_state()?;

    let mut branches = Vec::new();
    enumerate_with_snapshots(
        &circuit,
        &init,
        &mut |bits, weight, at_measure, final_state| {
            let even_pre = at_measure.reduced_qubit(QubitRole::Even.index())?;
            let odd_pre = at_measure.reduced_qubit(QubitRole::Odd.index())?;
            let even_post = final_state.reduced_qubit(QubitRole::Even.index())?;
            let odd_post = final_state.reduced_qubit(QubitRole::Odd.index())?;
            branches.push(BranchFidelity {
                bits: bits_key(bits),
                probability: weight,
                even_pre_correction: metrics::uhlmann_fidelity(&even_pre, &predicted_even)?,
                even_post_correction: metrics::uhlmann_fidelity(&even_post, &predicted_even)?,
                odd_pre_correction: metrics::uhlmann_fidelity(&odd_pre, &predicted_odd)?,
                odd_post_correction: metrics::uhlmann_fidelity(&odd_post, &predicted_odd)?,
            });
            Ok(())
        },
    )?;
    let mean_even: f64 = branches
        .iter()
        .map(|b| b.probability * b.even_post_correction)
        .sum();
    let mean_odd: f64 = branches
        .iter()
        .map(|b| b.probability * b.odd_post_correction)
        .sum();
    Ok(RoundtripReport {
        branches,
        mean_even,
        mean_odd,
    })
}

/// Direction-to-configuration mapping of the published comparison table.
pub fn reference_channel(direction: Direction) -> ChannelParams {
    match direction {
        Direction::AliceToBob => ChannelParams::new(0.0, 3, 1).expect("valid"),
        Direction::BobToAlice => ChannelParams::new(1.0 - 1e-9, 3, 0).expect("valid"),
    }
}
