//! Low-weight Pauli propagation.
//!
//! The observable is evolved in the Heisenberg picture, walking the gate list
//! from the last gate to the first. A rotation `exp(-iθG)` leaves a commuting
//! term untouched and sends an anticommuting term `P` to
//! `cos(2θ)·P + sin(2θ)·σP'` with `σP' = i[G,P]/2`. After every gate, strings
//! heavier than `k` are dropped. The propagated sum is finally contracted with
//! the singlet-product initial state.
//!
//! Two implementations live here:
//!
//! * the free functions operate on [`PauliSum`] hash maps and follow the
//!   definition step by step;
//! * [`LwppEvaluator`] compiles a circuit once into rotation tables over the
//!   fixed basis of strings with weight at most `k`, so each gate becomes a
//!   sweep over index pairs. Because truncation depends only on weights, the
//!   truncated propagation is a fixed linear chain and its gradient is
//!   obtained with one extra adjoint sweep.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind, InitStateSpec};
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum, DEFAULT_MERGE_EPSILON};

/// Largest basis the compiled evaluator will allocate.
pub const MAX_BASIS_SIZE: usize = 1 << 23;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    /// Strings with weight above `k` are discarded after every gate.
    pub k: usize,
    /// Merged coefficients at or below this magnitude are removed.
    pub coeff_epsilon: f64,
    /// Terms with magnitude below this are discarded after every gate; 0 disables.
    pub path_coeff_cutoff: f64,
}

impl TruncationConfig {
    pub fn new(k: usize) -> Self {
        Self { k, coeff_epsilon: DEFAULT_MERGE_EPSILON, path_coeff_cutoff: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("truncation weight k must be at least 1".into()));
        }
        if !(0.0..).contains(&self.coeff_epsilon) || !(0.0..).contains(&self.path_coeff_cutoff) {
            return Err(Error::InvalidArgument("truncation thresholds must be non-negative".into()));
        }
        Ok(())
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Conjugates `sum` by `exp(-i·angle·generator)` in place and truncates.
pub fn apply_rotation_backward(
    sum: &mut PauliSum,
    generator: &PauliString,
    angle: f64,
    cfg: &TruncationConfig,
) -> Result<()> {
    check_dims(sum.num_qubits(), generator.num_qubits())?;
    cfg.validate()?;
    rotate_sum(sum, generator, angle, cfg);
    Ok(())
}

fn rotate_sum(sum: &mut PauliSum, generator: &PauliString, angle: f64, cfg: &TruncationConfig) {
    let k = cfg.k;
    let mut branched = Vec::new();
    sum.retain(|p, c| {
        if !p.commutes_unchecked(generator) {
            branched.push((*p, *c));
            false
        } else {
            p.weight() <= k
        }
    });
    let (s, c) = (2.0 * angle).sin_cos();
    for (p, coeff) in branched {
        if p.weight() <= k {
            sum.add_unchecked(p, coeff * c, cfg.coeff_epsilon);
        }
        let (sign, pp) = p.branch_product_unchecked(generator);
        if pp.weight() <= k {
            sum.add_unchecked(pp, sign * coeff * s, cfg.coeff_epsilon);
        }
    }
    if cfg.path_coeff_cutoff > 0.0 {
        let cutoff = cfg.path_coeff_cutoff;
        sum.retain(|_, c| c.abs() >= cutoff);
    }
}

/// `Tr[ρ P]` for the singlet-product state.
pub fn initial_overlap_of(p: &PauliString, init: &InitStateSpec) -> f64 {
    let mut value = 1.0;
    for &(a, b) in init.pairs() {
        let (la, lb) = (p.letter(a), p.letter(b));
        if la != lb {
            return 0.0;
        }
        if la != crate::pauli::Letter::I {
            value = -value;
        }
    }
    if init.unpaired().iter().any(|&q| (p.x_bits() >> q) & 1 == 1) {
        return 0.0;
    }
    value
}

/// `Tr[ρ_init · sum]`.
pub fn evaluate_initial_overlap(sum: &PauliSum, init: &InitStateSpec) -> Result<f64> {
    check_dims(init.num_qubits(), sum.num_qubits())?;
    Ok(sum.sorted_terms().iter().map(|(p, c)| c * initial_overlap_of(p, init)).sum())
}

/// Propagates `h` backward through the whole circuit with the hash-map route,
/// calling `observer(gate_index, &sum)` after every gate.
pub fn propagate(
    circuit: &Circuit,
    params: &[f64],
    h: &PauliSum,
    cfg: &TruncationConfig,
    mut observer: impl FnMut(usize, &PauliSum),
) -> Result<PauliSum> {
    circuit.check_params(params)?;
    check_dims(circuit.num_qubits(), h.num_qubits())?;
    cfg.validate()?;
    let mut sum = h.clone();
    for (idx, gate) in circuit.gates().iter().enumerate().rev() {
        rotate_sum(&mut sum, &gate.generator, gate.angle(params), cfg);
        observer(idx, &sum);
    }
    Ok(sum)
}

/// LWPP energy by direct hash-map propagation.
pub fn lwpp_energy(
    circuit: &Circuit,
    params: &[f64],
    h: &PauliSum,
    init: &InitStateSpec,
    cfg: &TruncationConfig,
) -> Result<f64> {
    check_dims(circuit.num_qubits(), init.num_qubits())?;
    let sum = propagate(circuit, params, h, cfg, |_, _| {})?;
    evaluate_initial_overlap(&sum, init)
}

/// Exact gradient of the LWPP cost (adjoint sweep over the compiled plan).
pub fn lwpp_gradient(
    circuit: &Circuit,
    params: &[f64],
    h: &PauliSum,
    init: &InitStateSpec,
    cfg: &TruncationConfig,
) -> Result<Vec<f64>> {
    let evaluator = LwppEvaluator::new(circuit, h, init, cfg)?;
    Ok(evaluator.energy_and_gradient(params)?.1)
}

/// Gradient by the two-point shift rule `f(θ+π/4) - f(θ-π/4)` on the
/// hash-map route. `2P` full propagations; meant for checking.
pub fn lwpp_gradient_parameter_shift(
    circuit: &Circuit,
    params: &[f64],
    h: &PauliSum,
    init: &InitStateSpec,
    cfg: &TruncationConfig,
) -> Result<Vec<f64>> {
    circuit.check_params(params)?;
    let shift = std::f64::consts::FRAC_PI_4;
    let mut shifted = params.to_vec();
    (0..params.len())
        .map(|j| {
            shifted[j] = params[j] + shift;
            let plus = lwpp_energy(circuit, &shifted, h, init, cfg)?;
            shifted[j] = params[j] - shift;
            let minus = lwpp_energy(circuit, &shifted, h, init, cfg)?;
            shifted[j] = params[j];
            Ok(plus - minus)
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct PairEntry {
    i: u32,
    j: u32,
    sign: f64,
}

/// Action of one generator on the basis: index pairs that rotate into each
/// other, and indices whose partner falls outside the basis.
#[derive(Debug, Default)]
struct RotationTable {
    pairs: Vec<PairEntry>,
    singles: Vec<u32>,
}

impl RotationTable {
    fn touched(&self) -> usize {
        2 * self.pairs.len() + self.singles.len()
    }

    /// Heisenberg step `v ← R(θ)v`; pass `-s` for the transposed map.
    #[inline]
    fn rotate(&self, v: &mut [f64], c: f64, s: f64) {
        for e in &self.pairs {
            let (i, j) = (e.i as usize, e.j as usize);
            let (vi, vj) = (v[i], v[j]);
            v[i] = c * vi - e.sign * s * vj;
            v[j] = c * vj + e.sign * s * vi;
        }
        for &i in &self.singles {
            v[i as usize] *= c;
        }
    }

    fn snapshot(&self, v: &[f64], out: &mut Vec<f64>) {
        for e in &self.pairs {
            out.push(v[e.i as usize]);
            out.push(v[e.j as usize]);
        }
        out.extend(self.singles.iter().map(|&i| v[i as usize]));
    }

    /// `μ · dR/dθ v` for the stored pre-gate values `snap`.
    fn gradient(&self, mu: &[f64], snap: &[f64], c: f64, s: f64) -> f64 {
        let mut acc = 0.0;
        let (pairs, singles) = snap.split_at(2 * self.pairs.len());
        for (e, vals) in self.pairs.iter().zip(pairs.chunks_exact(2)) {
            let (vi, vj) = (vals[0], vals[1]);
            let di = -2.0 * s * vi - 2.0 * c * e.sign * vj;
            let dj = -2.0 * s * vj + 2.0 * c * e.sign * vi;
            acc += mu[e.i as usize] * di + mu[e.j as usize] * dj;
        }
        for (&i, &vi) in self.singles.iter().zip(singles) {
            acc += mu[i as usize] * (-2.0 * s * vi);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy)]
struct PlanGate {
    table: usize,
    kind: GateKind,
}

fn basis_size(n: usize, k: usize) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0;
    for w in 0..=k.min(n) {
        if w > 0 {
            binom = binom * (n - w + 1) as f64 / w as f64;
        }
        total += binom * 3f64.powi(w as i32);
    }
    total
}

/// All strings of weight at most `k`, ordered by weight, then support, then letters.
fn enumerate_low_weight(n: usize, k: usize) -> Vec<PauliString> {
    let mut out = Vec::new();
    for w in 0..=k.min(n) {
        let mut support_sets = Vec::new();
        combinations(n, w, 0, 0, &mut support_sets);
        for support in support_sets {
            let sites: Vec<usize> = (0..n).filter(|q| (support >> q) & 1 == 1).collect();
            for mut code in 0..3usize.pow(w as u32) {
                let (mut x, mut z) = (0u64, 0u64);
                for &q in &sites {
                    match code % 3 {
                        0 => x |= 1 << q,
                        1 => {
                            x |= 1 << q;
                            z |= 1 << q
                        }
                        _ => z |= 1 << q,
                    }
                    code /= 3;
                }
                out.push(PauliString::from_bits_unchecked(n, x, z));
            }
        }
    }
    out
}

fn combinations(n: usize, w: usize, start: usize, acc: u64, out: &mut Vec<u64>) {
    if w == 0 {
        out.push(acc);
        return;
    }
    for q in start..=n - w {
        combinations(n, w - 1, q + 1, acc | (1 << q), out);
    }
}

/// A circuit compiled for repeated LWPP evaluation at fixed `(h, init, k)`.
#[derive(Debug)]
pub struct LwppEvaluator {
    num_qubits: usize,
    param_count: usize,
    cfg: TruncationConfig,
    basis: Vec<PauliString>,
    /// Basis entries heavier than `k`; they only carry input terms of `h`.
    overweight: Vec<u32>,
    tables: Vec<RotationTable>,
    gates: Vec<PlanGate>,
    observable: Vec<f64>,
    init_overlap: Vec<f64>,
    /// Used when the circuit has no gates, so no truncation happens at all.
    untruncated_energy: f64,
}

impl LwppEvaluator {
    pub fn new(circuit: &Circuit, h: &PauliSum, init: &InitStateSpec, cfg: &TruncationConfig) -> Result<Self> {
        let n = circuit.num_qubits();
        check_dims(n, h.num_qubits())?;
        check_dims(n, init.num_qubits())?;
        cfg.validate()?;
        let size = basis_size(n, cfg.k);
        if size > MAX_BASIS_SIZE as f64 {
            return Err(Error::InvalidArgument(format!(
                "weight-{} basis on {n} qubits has {size:.3e} strings (limit {MAX_BASIS_SIZE})",
                cfg.k
            )));
        }

        let mut basis = enumerate_low_weight(n, cfg.k);
        let mut overweight = Vec::new();
        for (p, _) in h.sorted_terms() {
            if p.weight() > cfg.k {
                overweight.push(basis.len() as u32);
                basis.push(p);
            }
        }
        let index: FxHashMap<PauliString, u32> = basis.iter().enumerate().map(|(i, p)| (*p, i as u32)).collect();

        let mut table_of: FxHashMap<PauliString, usize> = FxHashMap::default();
        let mut tables = Vec::new();
        let mut gates = Vec::with_capacity(circuit.gates().len());
        for gate in circuit.gates() {
            let table = *table_of.entry(gate.generator).or_insert_with(|| {
                tables.push(build_table(&basis, &index, &gate.generator));
                tables.len() - 1
            });
            gates.push(PlanGate { table, kind: gate.kind });
        }

        let mut observable = vec![0.0; basis.len()];
        for (p, c) in h.iter() {
            observable[index[p] as usize] = c;
        }
        let mut init_overlap: Vec<f64> = basis.iter().map(|p| initial_overlap_of(p, init)).collect();
        for &i in &overweight {
            init_overlap[i as usize] = 0.0;
        }

        Ok(Self {
            num_qubits: n,
            param_count: circuit.param_count(),
            cfg: *cfg,
            basis,
            overweight,
            tables,
            gates,
            observable,
            init_overlap,
            untruncated_energy: evaluate_initial_overlap(h, init)?,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    pub fn config(&self) -> &TruncationConfig {
        &self.cfg
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::ParamCount { expected: self.param_count, found: params.len() });
        }
        Ok(())
    }

    fn angle(kind: GateKind, params: &[f64]) -> f64 {
        match kind {
            GateKind::Trainable { param } => params[param],
            GateKind::Fixed { angle } => angle,
        }
    }

    fn truncate(&self, v: &mut [f64], table: &RotationTable) {
        for &i in &self.overweight {
            v[i as usize] = 0.0;
        }
        let cutoff = self.cfg.path_coeff_cutoff;
        if cutoff > 0.0 {
            let mut clip = |i: u32| {
                if v[i as usize].abs() < cutoff {
                    v[i as usize] = 0.0;
                }
            };
            for e in &table.pairs {
                clip(e.i);
                clip(e.j);
            }
            for &i in &table.singles {
                clip(i);
            }
        }
    }

    fn propagate(&self, params: &[f64], mut snapshots: Option<&mut Vec<f64>>) -> Vec<f64> {
        let mut v = self.observable.clone();
        for gate in self.gates.iter().rev() {
            let table = &self.tables[gate.table];
            if let Some(buf) = snapshots.as_deref_mut() {
                table.snapshot(&v, buf);
            }
            let (s, c) = (2.0 * Self::angle(gate.kind, params)).sin_cos();
            table.rotate(&mut v, c, s);
            self.truncate(&mut v, table);
        }
        v
    }

    fn contract(&self, v: &[f64]) -> f64 {
        self.init_overlap.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn energy(&self, params: &[f64]) -> Result<f64> {
        self.check_params(params)?;
        if self.gates.is_empty() {
            return Ok(self.untruncated_energy);
        }
        Ok(self.contract(&self.propagate(params, None)))
    }

    /// Propagated observable as a sum (terms with exactly zero weight omitted).
    pub fn propagated_sum(&self, params: &[f64]) -> Result<PauliSum> {
        self.check_params(params)?;
        let v = self.propagate(params, None);
        PauliSum::from_terms(
            self.num_qubits,
            self.basis.iter().zip(&v).filter(|(_, c)| **c != 0.0).map(|(p, c)| (*p, *c)),
        )
    }

    pub fn energy_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_params(params)?;
        if self.gates.is_empty() {
            return Ok((self.untruncated_energy, vec![0.0; self.param_count]));
        }
        if self.cfg.path_coeff_cutoff > 0.0 {
            // Magnitude clipping depends on the angles, so the adjoint chain is
            // not exact; fall back to shifted evaluations.
            return self.energy_and_shift_gradient(params);
        }

        let total: usize = self.gates.iter().map(|g| self.tables[g.table].touched()).sum();
        let mut snapshots = Vec::with_capacity(total);
        let v = self.propagate(params, Some(&mut snapshots));
        let energy = self.contract(&v);

        // Snapshots were pushed from the last gate to the first; walk them
        // back from the end while sweeping the adjoint forward.
        let mut grad = vec![0.0; self.param_count];
        let mut mu = self.init_overlap.clone();
        let mut end = snapshots.len();
        for gate in &self.gates {
            let table = &self.tables[gate.table];
            let start = end - table.touched();
            let (s, c) = (2.0 * Self::angle(gate.kind, params)).sin_cos();
            if let GateKind::Trainable { param } = gate.kind {
                grad[param] = table.gradient(&mu, &snapshots[start..end], c, s);
            }
            table.rotate(&mut mu, c, -s);
            self.truncate(&mut mu, table);
            end = start;
        }
        Ok((energy, grad))
    }

    fn energy_and_shift_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let energy = self.energy(params)?;
        let shift = std::f64::consts::FRAC_PI_4;
        let mut shifted = params.to_vec();
        let mut grad = Vec::with_capacity(params.len());
        for j in 0..params.len() {
            shifted[j] = params[j] + shift;
            let plus = self.energy(&shifted)?;
            shifted[j] = params[j] - shift;
            let minus = self.energy(&shifted)?;
            shifted[j] = params[j];
            grad.push(plus - minus);
        }
        Ok((energy, grad))
    }
}

fn build_table(basis: &[PauliString], index: &FxHashMap<PauliString, u32>, generator: &PauliString) -> RotationTable {
    let mut table = RotationTable::default();
    for (i, p) in basis.iter().enumerate() {
        if p.commutes_unchecked(generator) {
            continue;
        }
        let (sign, pp) = p.branch_product_unchecked(generator);
        match index.get(&pp) {
            Some(&j) if (j as usize) > i => table.pairs.push(PairEntry { i: i as u32, j, sign }),
            Some(_) => {}
            None => table.singles.push(i as u32),
        }
    }
    table
}
