//! Statevector simulation of Pauli-rotation circuits and adjoint gradients.
//!
//! Amplitude index bit `n-1-q` holds qubit `q`, so qubit 0 is the most
//! significant bit and matches the leftmost letter of a Pauli string.

use num_complex::Complex64;

use crate::circuit::{Circuit, InitStateSpec};
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A Pauli string lowered to amplitude-index masks:
/// `P|b⟩ = phase · (-1)^{|b ∧ z|} |b ⊕ x⟩`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct IndexPauli {
    x: usize,
    z: usize,
    phase: Complex64,
}

impl IndexPauli {
    pub(crate) fn new(p: &PauliString) -> Self {
        let n = p.num_qubits() as u32;
        let lower = |m: u64| (m.reverse_bits() >> (64 - n)) as usize;
        let phase = match p.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Self { x: lower(p.x_bits()), z: lower(p.z_bits()), phase }
    }

    #[inline]
    fn sign(&self, b: usize) -> f64 {
        if (b & self.z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `⟨left| P |right⟩`.
    fn matrix_element(&self, left: &[Complex64], right: &[Complex64]) -> Complex64 {
        let mut acc = ZERO;
        for (b, r) in right.iter().enumerate() {
            acc += left[b ^ self.x].conj() * (r * self.sign(b));
        }
        acc * self.phase
    }

    /// `out += c · P |psi⟩`.
    fn accumulate(&self, c: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let scaled = self.phase * c;
        for (b, a) in psi.iter().enumerate() {
            out[b ^ self.x] += a * (scaled * self.sign(b));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// Largest register the statevector engine allocates.
pub const MAX_STATE_QUBITS: usize = 26;

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_STATE_QUBITS {
            return Err(Error::TooManyQubits { requested: num_qubits, max: MAX_STATE_QUBITS });
        }
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes cannot describe {num_qubits} qubits",
                amplitudes.len()
            )));
        }
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, found: n });
        }
        Ok(())
    }

    /// `|ψ⟩ ← exp(-i·angle·G) |ψ⟩ = cos(angle)|ψ⟩ - i sin(angle) G|ψ⟩`.
    pub fn apply_rotation(&mut self, generator: &PauliString, angle: f64) -> Result<()> {
        self.check(generator.num_qubits())?;
        rotate(&mut self.amplitudes, IndexPauli::new(generator), angle);
        Ok(())
    }

    /// `⟨ψ|h|ψ⟩`.
    pub fn expectation(&self, h: &PauliSum) -> Result<f64> {
        self.check(h.num_qubits())?;
        let mut total = ZERO;
        for (p, c) in h.sorted_terms() {
            total += IndexPauli::new(&p).matrix_element(&self.amplitudes, &self.amplitudes) * c;
        }
        let scale = 1.0 + h.iter().map(|(_, c)| c.abs()).sum::<f64>();
        debug_assert!(total.im.abs() <= 1e-10 * scale, "imaginary expectation residue {}", total.im);
        Ok(total.re)
    }

    /// `h|ψ⟩` as a new (unnormalized) vector.
    pub fn apply_sum(&self, h: &PauliSum) -> Result<StateVector> {
        self.check(h.num_qubits())?;
        let mut out = vec![ZERO; self.amplitudes.len()];
        apply_sum_into(h, &self.amplitudes, &mut out);
        Ok(StateVector { num_qubits: self.num_qubits, amplitudes: out })
    }
}

pub(crate) fn apply_sum_into(h: &PauliSum, psi: &[Complex64], out: &mut [Complex64]) {
    out.fill(ZERO);
    for (p, c) in h.sorted_terms() {
        IndexPauli::new(&p).accumulate(c, psi, out);
    }
}

/// Calls `f(b, b ^ x)` once for every index pair differing by the nonzero
/// mask `x`, visiting the member whose highest set bit of `x` is clear.
#[inline]
fn for_each_pair(len: usize, x: usize, mut f: impl FnMut(usize, usize)) {
    let high = 1usize << (usize::BITS - 1 - x.leading_zeros());
    for base in (0..len).step_by(2 * high) {
        for b in base..base + high {
            f(b, b ^ x);
        }
    }
}

fn rotate(psi: &mut [Complex64], g: IndexPauli, angle: f64) {
    let (s, c) = angle.sin_cos();
    if g.x == 0 {
        // Diagonal generator; no Y letters, so the phase is 1.
        let plus = Complex64::new(c, -s);
        let minus = Complex64::new(c, s);
        for (b, a) in psi.iter_mut().enumerate() {
            *a *= if g.sign(b) > 0.0 { plus } else { minus };
        }
        return;
    }
    let minus_i_s = Complex64::new(0.0, -s) * g.phase;
    for_each_pair(psi.len(), g.x, |b, bp| {
        let (a, ap) = (psi[b], psi[bp]);
        // (Gψ)[b] = phase·sign(b')·ψ[b'], (Gψ)[b'] = phase·sign(b)·ψ[b]
        psi[b] = a * c + minus_i_s * (ap * g.sign(bp));
        psi[bp] = ap * c + minus_i_s * (a * g.sign(b));
    });
}

/// One reverse-sweep step: returns `⟨λ|G|ψ⟩` and then un-applies
/// `exp(-i·angle·G)` from both vectors in the same pass.
fn reverse_step(psi: &mut [Complex64], lambda: &mut [Complex64], g: IndexPauli, angle: f64) -> Complex64 {
    let (s, c) = (-angle).sin_cos();
    let mut acc = ZERO;
    if g.x == 0 {
        let plus = Complex64::new(c, -s);
        let minus = Complex64::new(c, s);
        for (b, (a, l)) in psi.iter_mut().zip(lambda.iter_mut()).enumerate() {
            let sign = g.sign(b);
            acc += l.conj() * (*a * sign);
            let f = if sign > 0.0 { plus } else { minus };
            *a *= f;
            *l *= f;
        }
        return acc;
    }
    let minus_i_s = Complex64::new(0.0, -s) * g.phase;
    for_each_pair(psi.len(), g.x, |b, bp| {
        let (sb, sbp) = (g.sign(b), g.sign(bp));
        let (a, ap) = (psi[b], psi[bp]);
        let (l, lp) = (lambda[b], lambda[bp]);
        acc += l.conj() * (ap * sbp) + lp.conj() * (a * sb);
        psi[b] = a * c + minus_i_s * (ap * sbp);
        psi[bp] = ap * c + minus_i_s * (a * sb);
        lambda[b] = l * c + minus_i_s * (lp * sbp);
        lambda[bp] = lp * c + minus_i_s * (l * sb);
    });
    acc * g.phase
}

/// Product of singlets on the pairs and `|0⟩` elsewhere.
pub fn prepare_init(init: &InitStateSpec) -> Result<StateVector> {
    let n = init.num_qubits();
    let mut state = StateVector::zero(n)?;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    for &(a, b) in init.pairs() {
        let (ba, bb) = (bit(a), bit(b));
        let mut next = vec![ZERO; state.amplitudes.len()];
        for (idx, v) in state.amplitudes.iter().enumerate() {
            if *v == ZERO {
                continue;
            }
            // both qubits are |0⟩ here; |0_a 1_b⟩ gets +, |1_a 0_b⟩ gets -
            next[idx | bb] += v * amp;
            next[idx | ba] -= v * amp;
        }
        state.amplitudes = next;
    }
    Ok(state)
}

/// Runs `circuit` on `|init⟩`.
pub fn simulate(circuit: &Circuit, params: &[f64], init: &InitStateSpec) -> Result<StateVector> {
    circuit.check_params(params)?;
    if init.num_qubits() != circuit.num_qubits() {
        return Err(Error::DimensionMismatch { expected: circuit.num_qubits(), found: init.num_qubits() });
    }
    let mut state = prepare_init(init)?;
    for gate in circuit.gates() {
        rotate(&mut state.amplitudes, IndexPauli::new(&gate.generator), gate.angle(params));
    }
    Ok(state)
}

pub fn exact_energy(circuit: &Circuit, params: &[f64], h: &PauliSum, init: &InitStateSpec) -> Result<f64> {
    simulate(circuit, params, init)?.expectation(h)
}

/// Compiled exact evaluator: caches lowered generators and Hamiltonian terms.
#[derive(Debug, Clone)]
pub struct ExactEvaluator {
    num_qubits: usize,
    param_count: usize,
    gates: Vec<(IndexPauli, crate::circuit::GateKind)>,
    terms: Vec<(IndexPauli, f64)>,
    init: StateVector,
}

impl ExactEvaluator {
    pub fn new(circuit: &Circuit, h: &PauliSum, init: &InitStateSpec) -> Result<Self> {
        let n = circuit.num_qubits();
        for found in [h.num_qubits(), init.num_qubits()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        Ok(Self {
            num_qubits: n,
            param_count: circuit.param_count(),
            gates: circuit.gates().iter().map(|g| (IndexPauli::new(&g.generator), g.kind)).collect(),
            terms: h.sorted_terms().iter().map(|(p, c)| (IndexPauli::new(p), *c)).collect(),
            init: prepare_init(init)?,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn angle(kind: crate::circuit::GateKind, params: &[f64]) -> f64 {
        match kind {
            crate::circuit::GateKind::Trainable { param } => params[param],
            crate::circuit::GateKind::Fixed { angle } => angle,
        }
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::ParamCount { expected: self.param_count, found: params.len() });
        }
        Ok(())
    }

    pub fn state(&self, params: &[f64]) -> Result<StateVector> {
        self.check_params(params)?;
        let mut psi = self.init.clone();
        for (g, kind) in &self.gates {
            rotate(&mut psi.amplitudes, *g, Self::angle(*kind, params));
        }
        Ok(psi)
    }

    fn apply_h(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; psi.len()];
        for (p, c) in &self.terms {
            p.accumulate(*c, psi, &mut out);
        }
        out
    }

    pub fn energy(&self, params: &[f64]) -> Result<f64> {
        let psi = self.state(params)?;
        let lambda = self.apply_h(&psi.amplitudes);
        Ok(inner(&psi.amplitudes, &lambda).re)
    }

    /// Energy and all partial derivatives from one forward pass and one
    /// reverse sweep that un-applies each gate from both `|ψ⟩` and `H|ψ⟩`.
    pub fn energy_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut psi = self.state(params)?.amplitudes;
        let mut lambda = self.apply_h(&psi);
        let energy = inner(&psi, &lambda).re;
        let mut grad = vec![0.0; self.param_count];
        for (g, kind) in self.gates.iter().rev() {
            let overlap = reverse_step(&mut psi, &mut lambda, *g, Self::angle(*kind, params));
            if let crate::circuit::GateKind::Trainable { param } = kind {
                // dE/dθ = 2 Re⟨λ|(-iG)|ψ⟩ = 2 Im⟨λ|G|ψ⟩
                grad[*param] = 2.0 * overlap.im;
            }
        }
        Ok((energy, grad))
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Energy and adjoint gradient for a one-off evaluation.
pub fn exact_energy_and_gradient(
    circuit: &Circuit,
    params: &[f64],
    h: &PauliSum,
    init: &InitStateSpec,
) -> Result<(f64, Vec<f64>)> {
    ExactEvaluator::new(circuit, h, init)?.energy_and_gradient(params)
}
