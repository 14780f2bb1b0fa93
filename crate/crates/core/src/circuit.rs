//! Lattices, XYZ Hamiltonians, the layered two-qubit rotation ansatz and the
//! singlet-pair initial state.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, PauliSum};
use crate::rng::{seeded_rng, uniform_angles};

/// Open-boundary square lattice with row-major qubit numbering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    rows: usize,
    cols: usize,
    bonds: Vec<(usize, usize)>,
}

impl Lattice {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!("lattice {rows}x{cols} has no sites")));
        }
        if rows * cols > crate::pauli::MAX_QUBITS {
            return Err(Error::TooManyQubits { requested: rows * cols, max: crate::pauli::MAX_QUBITS });
        }
        let idx = |r: usize, c: usize| r * cols + c;
        let mut bonds = Vec::with_capacity(rows * (cols - 1) + (rows - 1) * cols);
        for r in 0..rows {
            for c in 0..cols - 1 {
                bonds.push((idx(r, c), idx(r, c + 1)));
            }
        }
        for r in 0..rows - 1 {
            for c in 0..cols {
                bonds.push((idx(r, c), idx(r + 1, c)));
            }
        }
        Ok(Self { rows, cols, bonds })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_qubits(&self) -> usize {
        self.rows * self.cols
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    pub fn is_bond(&self, a: usize, b: usize) -> bool {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.bonds.contains(&(lo, hi))
    }
}

fn two_site(n: usize, (i, j): (usize, usize), letter: Letter) -> PauliString {
    PauliString::from_sparse(n, &[(i, letter), (j, letter)]).expect("bond sites are in range")
}

/// `H = Σ_bonds (jx XX + jy YY + jz ZZ)`; zero couplings contribute no terms.
pub fn build_hamiltonian(lattice: &Lattice, jx: f64, jy: f64, jz: f64) -> PauliSum {
    let n = lattice.num_qubits();
    let mut h = PauliSum::new(n).expect("lattice qubit count is valid");
    for &bond in lattice.bonds() {
        for (letter, j) in [(Letter::X, jx), (Letter::Y, jy), (Letter::Z, jz)] {
            if j != 0.0 {
                h.add_unchecked(two_site(n, bond, letter), j, 0.0);
            }
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    Trainable { param: usize },
    Fixed { angle: f64 },
}

/// `exp(-i·angle·generator)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub generator: PauliString,
}

impl Gate {
    pub fn angle(&self, params: &[f64]) -> f64 {
        match self.kind {
            GateKind::Trainable { param } => params[param],
            GateKind::Fixed { angle } => angle,
        }
    }
}

/// Gates in application order (first gate acts on the initial state first).
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    param_count: usize,
}

impl Circuit {
    /// Validates qubit counts and that parameter ids form `0..P` with each used once.
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut seen = Vec::new();
        for g in &gates {
            if g.generator.num_qubits() != num_qubits {
                return Err(Error::DimensionMismatch { expected: num_qubits, found: g.generator.num_qubits() });
            }
            if let GateKind::Trainable { param } = g.kind {
                if param >= seen.len() {
                    seen.resize(param + 1, false);
                }
                if seen[param] {
                    return Err(Error::InvalidArgument(format!("parameter {param} used by more than one gate")));
                }
                seen[param] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("parameter {missing} is not used by any gate")));
        }
        Ok(Self { num_qubits, param_count: seen.len(), gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::ParamCount { expected: self.param_count, found: params.len() });
        }
        Ok(())
    }

    pub fn fixed_angles(&self) -> Vec<f64> {
        self.gates
            .iter()
            .filter_map(|g| match g.kind {
                GateKind::Fixed { angle } => Some(angle),
                GateKind::Trainable { .. } => None,
            })
            .collect()
    }

    /// Copy of the circuit with the fixed gates' angles replaced in order.
    pub fn with_fixed_angles(&self, angles: &[f64]) -> Result<Self> {
        let count = self.gates.iter().filter(|g| matches!(g.kind, GateKind::Fixed { .. })).count();
        if angles.len() != count {
            return Err(Error::InvalidArgument(format!("expected {count} fixed angles, got {}", angles.len())));
        }
        let mut it = angles.iter();
        let gates = self
            .gates
            .iter()
            .map(|g| match g.kind {
                GateKind::Fixed { .. } => Gate { kind: GateKind::Fixed { angle: *it.next().unwrap() }, ..*g },
                GateKind::Trainable { .. } => *g,
            })
            .collect();
        Ok(Self { gates, ..self.clone() })
    }

    /// One gate per line: `kind generator param_id|angle`.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            match g.kind {
                GateKind::Trainable { param } => writeln!(out, "trainable {} {param}", g.generator),
                GateKind::Fixed { angle } => writeln!(out, "fixed {} {angle:?}", g.generator),
            }
            .unwrap();
        }
        out
    }
}

fn ansatz_gates(lattice: &Lattice, depth: usize, mut fixed: impl FnMut() -> Option<f64>) -> Vec<Gate> {
    let n = lattice.num_qubits();
    let mut gates = Vec::new();
    let mut param = 0;
    for _ in 0..depth {
        for letter in [Letter::X, Letter::Y, Letter::Z] {
            for &bond in lattice.bonds() {
                let generator = two_site(n, bond, letter);
                gates.push(Gate { kind: GateKind::Trainable { param }, generator });
                param += 1;
                if let Some(angle) = fixed() {
                    gates.push(Gate { kind: GateKind::Fixed { angle }, generator });
                }
            }
        }
    }
    gates
}

fn check_depth(depth: usize) -> Result<()> {
    if depth == 0 {
        return Err(Error::InvalidArgument("circuit depth must be at least 1".into()));
    }
    Ok(())
}

/// `depth` blocks of XX, then YY, then ZZ rotations on every bond, each with
/// its own parameter.
pub fn build_ansatz(lattice: &Lattice, depth: usize) -> Result<Circuit> {
    check_depth(depth)?;
    Circuit::new(lattice.num_qubits(), ansatz_gates(lattice, depth, || None))
}

/// Like [`build_ansatz`], with a fixed rotation about the same generator after
/// every trainable gate. Fixed angles are uniform in `[-π, π]`, drawn from `seed`.
pub fn build_rugged_ansatz(lattice: &Lattice, depth: usize, seed: u64) -> Result<Circuit> {
    check_depth(depth)?;
    let mut rng = seeded_rng(seed);
    let gates = ansatz_gates(lattice, depth, || Some(uniform_angles(&mut rng, 1, 1.0)[0]));
    debug_assert!(gates.iter().all(|g| match g.kind {
        GateKind::Fixed { angle } => angle.abs() <= PI,
        _ => true,
    }));
    Circuit::new(lattice.num_qubits(), gates)
}

/// Product of singlets `(|01⟩ - |10⟩)/√2` on `pairs`, `|0⟩` on `unpaired`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitStateSpec {
    num_qubits: usize,
    pairs: Vec<(usize, usize)>,
    unpaired: Vec<usize>,
}

impl InitStateSpec {
    pub fn new(num_qubits: usize, pairs: Vec<(usize, usize)>, unpaired: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; num_qubits];
        let sites = pairs.iter().flat_map(|&(a, b)| [a, b]).chain(unpaired.iter().copied());
        for q in sites {
            if q >= num_qubits {
                return Err(Error::InvalidArgument(format!("qubit {q} out of range for {num_qubits} qubits")));
            }
            if seen[q] {
                return Err(Error::InvalidArgument(format!("qubit {q} appears twice in the initial state")));
            }
            seen[q] = true;
        }
        if let Some(q) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("qubit {q} is not assigned an initial state")));
        }
        Ok(Self { num_qubits, pairs, unpaired })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn unpaired(&self) -> &[usize] {
        &self.unpaired
    }
}

/// Pairs columns `(2c, 2c+1)` within each row; with an odd column count the
/// last qubit of every row stays in `|0⟩`.
pub fn build_singlet_pairing(lattice: &Lattice) -> InitStateSpec {
    let mut pairs = Vec::new();
    let mut unpaired = Vec::new();
    for r in 0..lattice.rows() {
        for c in 0..lattice.cols() / 2 {
            pairs.push((lattice.index(r, 2 * c), lattice.index(r, 2 * c + 1)));
        }
        if lattice.cols() % 2 == 1 {
            unpaired.push(lattice.index(r, lattice.cols() - 1));
        }
    }
    debug_assert!(pairs.iter().all(|&(a, b)| lattice.is_bond(a, b)));
    InitStateSpec::new(lattice.num_qubits(), pairs, unpaired).expect("pairing covers every site once")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_counts() {
        for (m, n) in [(1, 2), (2, 2), (3, 4), (3, 3), (4, 4), (3, 6), (1, 1)] {
            let lat = Lattice::new(m, n).unwrap();
            assert_eq!(lat.bonds().len(), m * (n - 1) + (m - 1) * n);
            let mut b = lat.bonds().to_vec();
            assert!(b.iter().all(|&(j, k)| j < k));
            b.sort();
            b.dedup();
            assert_eq!(b.len(), lat.bonds().len());
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let h = build_hamiltonian(&Lattice::new(2, 2).unwrap(), 1.0, 0.8, 0.5);
        assert_eq!(h.len(), 12);

        let h = build_hamiltonian(&Lattice::new(1, 2).unwrap(), 1.0, 1.0, 1.0);
        assert_eq!(h.len(), 3);
        for s in ["XX", "YY", "ZZ"] {
            assert_eq!(h.coefficient(&s.parse().unwrap()), 1.0);
        }

        assert_eq!(build_hamiltonian(&Lattice::new(3, 4).unwrap(), 1.0, 0.8, 0.5).len(), 51);
        assert_eq!(build_hamiltonian(&Lattice::new(2, 2).unwrap(), 1.0, 0.0, 0.5).len(), 8);
    }

    #[test]
    fn hamiltonian_transposition_invariant() {
        let a = build_hamiltonian(&Lattice::new(2, 3).unwrap(), 1.0, 0.8, 0.5);
        let b = build_hamiltonian(&Lattice::new(3, 2).unwrap(), 1.0, 0.8, 0.5);
        // site (r, c) of the 2x3 lattice is site (c, r) of the 3x2 lattice
        let perm: Vec<usize> = (0..6).map(|q| (q % 3) * 2 + q / 3).collect();
        let mapped = PauliSum::from_terms(6, a.iter().map(|(p, c)| (p.permuted(&perm).unwrap(), c))).unwrap();
        assert_eq!(mapped.sorted_terms(), b.sorted_terms());
    }

    #[test]
    fn ansatz_examples() {
        let c = build_ansatz(&Lattice::new(3, 4).unwrap(), 6).unwrap();
        assert_eq!(c.gates().len(), 306);
        assert_eq!(c.param_count(), 306);
        assert_eq!(build_ansatz(&Lattice::new(1, 2).unwrap(), 1).unwrap().gates().len(), 3);
        assert_eq!(build_ansatz(&Lattice::new(2, 2).unwrap(), 2).unwrap().gates().len(), 24);
        assert!(build_ansatz(&Lattice::new(2, 2).unwrap(), 0).is_err());
    }

    #[test]
    fn ansatz_layer_order() {
        let lat = Lattice::new(2, 2).unwrap();
        let c = build_ansatz(&lat, 2).unwrap();
        let nb = lat.bonds().len();
        for (i, g) in c.gates().iter().enumerate() {
            assert_eq!(g.generator.weight(), 2);
            assert_eq!(g.kind, GateKind::Trainable { param: i });
            let letter = [Letter::X, Letter::Y, Letter::Z][(i / nb) % 3];
            let (a, b) = lat.bonds()[i % nb];
            assert_eq!(g.generator.letter(a), letter);
            assert_eq!(g.generator.letter(b), letter);
        }
    }

    #[test]
    fn rugged_ansatz_structure_and_determinism() {
        let lat = Lattice::new(1, 2).unwrap();
        let c = build_rugged_ansatz(&lat, 1, 5).unwrap();
        assert_eq!(c.gates().len(), 6);
        for pair in c.gates().chunks(2) {
            assert!(matches!(pair[0].kind, GateKind::Trainable { .. }));
            assert!(matches!(pair[1].kind, GateKind::Fixed { .. }));
            assert_eq!(pair[0].generator, pair[1].generator);
        }
        let lat = Lattice::new(2, 3).unwrap();
        let a = build_rugged_ansatz(&lat, 2, 11).unwrap();
        let b = build_rugged_ansatz(&lat, 2, 11).unwrap();
        assert_eq!(a.fixed_angles(), b.fixed_angles());
        assert_ne!(a.fixed_angles(), build_rugged_ansatz(&lat, 2, 12).unwrap().fixed_angles());
        assert_eq!(a.param_count(), build_ansatz(&lat, 2).unwrap().param_count());
    }

    #[test]
    fn singlet_pairing_examples() {
        let s = build_singlet_pairing(&Lattice::new(2, 2).unwrap());
        assert_eq!(s.pairs(), &[(0, 1), (2, 3)]);
        assert!(s.unpaired().is_empty());

        let s = build_singlet_pairing(&Lattice::new(3, 3).unwrap());
        assert_eq!(s.pairs().len(), 3);
        assert_eq!(s.unpaired(), &[2, 5, 8]);

        let s = build_singlet_pairing(&Lattice::new(1, 4).unwrap());
        assert_eq!(s.pairs(), &[(0, 1), (2, 3)]);
    }

    #[test]
    fn init_spec_rejects_bad_partitions() {
        assert!(InitStateSpec::new(3, vec![(0, 1)], vec![]).is_err());
        assert!(InitStateSpec::new(3, vec![(0, 1)], vec![1, 2]).is_err());
        assert!(InitStateSpec::new(2, vec![(0, 2)], vec![]).is_err());
        assert!(InitStateSpec::new(3, vec![(0, 1)], vec![2]).is_ok());
    }

    #[test]
    fn circuit_rejects_reused_parameters() {
        let g: PauliString = "XX".parse().unwrap();
        let gate = Gate { kind: GateKind::Trainable { param: 0 }, generator: g };
        assert!(Circuit::new(2, vec![gate, gate]).is_err());
        let skip = Gate { kind: GateKind::Trainable { param: 1 }, generator: g };
        assert!(Circuit::new(2, vec![skip]).is_err());
    }
}
