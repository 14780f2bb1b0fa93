//! Pauli strings in symplectic form and sparse real-weighted sums of them.
//!
//! A string on `n` qubits is stored as two bit masks: bit `q` of `x` is set
//! when qubit `q` carries X or Y, bit `q` of `z` when it carries Z or Y.
//! Qubit 0 is the leftmost character of the text form.

use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 64;

/// Default cancellation threshold used when merging terms.
pub const DEFAULT_MERGE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

impl TryFrom<char> for Letter {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Letter::I),
            'X' => Ok(Letter::X),
            'Y' => Ok(Letter::Y),
            'Z' => Ok(Letter::Z),
            other => Err(Error::InvalidLetter(other)),
        }
    }
}

/// A Hermitian Pauli word without phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    num_qubits: u32,
    x: u64,
    z: u64,
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("a Pauli string needs at least one qubit".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits { requested: n, max: MAX_QUBITS });
    }
    Ok(())
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn identity(num_qubits: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        Ok(Self { num_qubits: num_qubits as u32, x: 0, z: 0 })
    }

    /// Builds a string from raw symplectic masks; bits above `num_qubits` are rejected.
    pub fn from_bits(num_qubits: usize, x: u64, z: u64) -> Result<Self> {
        check_qubits(num_qubits)?;
        let m = mask(num_qubits);
        if x & !m != 0 || z & !m != 0 {
            return Err(Error::InvalidArgument(format!("bit mask exceeds {num_qubits} qubits")));
        }
        Ok(Self { num_qubits: num_qubits as u32, x, z })
    }

    pub(crate) fn from_bits_unchecked(num_qubits: usize, x: u64, z: u64) -> Self {
        Self { num_qubits: num_qubits as u32, x, z }
    }

    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        check_qubits(letters.len())?;
        let (mut x, mut z) = (0u64, 0u64);
        for (q, letter) in letters.iter().enumerate() {
            let (xb, zb) = letter.bits();
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
        }
        Ok(Self { num_qubits: letters.len() as u32, x, z })
    }

    /// A string with the given letters on the listed qubits and identity elsewhere.
    pub fn from_sparse(num_qubits: usize, sites: &[(usize, Letter)]) -> Result<Self> {
        check_qubits(num_qubits)?;
        let mut letters = vec![Letter::I; num_qubits];
        for &(q, letter) in sites {
            if q >= num_qubits {
                return Err(Error::InvalidArgument(format!("qubit {q} out of range for {num_qubits} qubits")));
            }
            letters[q] = letter;
        }
        Self::from_letters(&letters)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits as usize
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn letter(&self, qubit: usize) -> Letter {
        Letter::from_bits((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.num_qubits()).map(|q| self.letter(q)).collect()
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    fn check_same(&self, other: &PauliString) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits(), found: other.num_qubits() });
        }
        Ok(())
    }

    /// Symplectic inner product: true when the strings commute.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    /// Operator product `self · other = i^phase · result`, phase in 0..4.
    pub fn product(&self, other: &PauliString) -> Result<(u8, PauliString)> {
        self.check_same(other)?;
        Ok(self.product_unchecked(other))
    }

    #[inline]
    pub(crate) fn product_unchecked(&self, other: &PauliString) -> (u8, PauliString) {
        let (x1, z1, x2, z2) = (self.x, self.z, other.x, other.z);
        let xa = x1 & !z1;
        let ya = x1 & z1;
        let za = !x1 & z1;
        // Per-site phase of the single-qubit products, summed mod 4.
        let plus = (xa & z2 & x2).count_ones() + (ya & z2 & !x2).count_ones() + (za & x2 & !z2).count_ones();
        let minus = (xa & z2 & !x2).count_ones() + (ya & x2 & !z2).count_ones() + (za & x2 & z2).count_ones();
        let phase = ((plus + 4 * 64 - minus) % 4) as u8;
        let result = PauliString { num_qubits: self.num_qubits, x: x1 ^ x2, z: z1 ^ z2 };
        (phase, result)
    }

    /// For anticommuting `self` (P) and `generator` (G), returns `(sign, P')` with
    /// `sign · P' = i[G, P] / 2`.
    pub fn branch_product(&self, generator: &PauliString) -> Result<(f64, PauliString)> {
        self.check_same(generator)?;
        if self.commutes_unchecked(generator) {
            return Err(Error::CommutingBranch { p: self.to_string(), g: generator.to_string() });
        }
        Ok(self.branch_product_unchecked(generator))
    }

    /// Caller guarantees the strings anticommute.
    #[inline]
    pub(crate) fn branch_product_unchecked(&self, generator: &PauliString) -> (f64, PauliString) {
        // i[G,P]/2 = iGP when GP = -PG.
        let (phase, result) = generator.product_unchecked(self);
        debug_assert!(phase % 2 == 1);
        let sign = if (phase + 1) % 4 == 0 { 1.0 } else { -1.0 };
        (sign, result)
    }

    /// Number of Y letters; the dense matrix of the string is real iff this is even.
    pub fn y_count(&self) -> usize {
        (self.x & self.z).count_ones() as usize
    }

    /// Relabels qubits: the letter on qubit `q` moves to `perm[q]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<PauliString> {
        if perm.len() != self.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.num_qubits(), found: perm.len() });
        }
        let mut letters = vec![Letter::I; perm.len()];
        for (q, &target) in perm.iter().enumerate() {
            if target >= perm.len() {
                return Err(Error::InvalidArgument(format!("permutation target {target} out of range")));
            }
            letters[target] = self.letter(q);
        }
        PauliString::from_letters(&letters)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s.trim().chars().map(Letter::try_from).collect::<Result<Vec<_>>>()?;
        PauliString::from_letters(&letters)
    }
}

/// Sparse map from Pauli strings to real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    num_qubits: usize,
    terms: FxHashMap<PauliString, f64>,
}

impl PauliSum {
    pub fn new(num_qubits: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        Ok(Self { num_qubits, terms: FxHashMap::default() })
    }

    pub fn from_terms<I>(num_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        let mut sum = Self::new(num_qubits)?;
        for (p, c) in terms {
            sum.add_term(p, c, DEFAULT_MERGE_EPSILON)?;
        }
        Ok(sum)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        self.terms.get(p).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, f64)> + '_ {
        self.terms.iter().map(|(p, &c)| (p, c))
    }

    /// Terms ordered by string, for stable output.
    pub fn sorted_terms(&self) -> Vec<(PauliString, f64)> {
        let mut terms: Vec<_> = self.terms.iter().map(|(p, &c)| (*p, c)).collect();
        terms.sort_by_key(|t| t.0);
        terms
    }

    /// Adds `c` to the coefficient of `p`, dropping the entry if the result is
    /// within `epsilon` of zero.
    pub fn add_term(&mut self, p: PauliString, c: f64, epsilon: f64) -> Result<()> {
        if p.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, found: p.num_qubits() });
        }
        if !(0.0..).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!("merge epsilon must be >= 0, got {epsilon}")));
        }
        self.add_unchecked(p, c, epsilon);
        Ok(())
    }

    #[inline]
    pub(crate) fn add_unchecked(&mut self, p: PauliString, c: f64, epsilon: f64) {
        use std::collections::hash_map::Entry;
        match self.terms.entry(p) {
            Entry::Occupied(mut e) => {
                let v = *e.get() + c;
                if v.abs() <= epsilon {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            Entry::Vacant(e) => {
                if c.abs() > epsilon {
                    e.insert(c);
                }
            }
        }
    }

    pub(crate) fn retain(&mut self, f: impl FnMut(&PauliString, &mut f64) -> bool) {
        self.terms.retain(f);
    }

    /// Sum of squared coefficients (the squared Hilbert-Schmidt norm divided by 2^n).
    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum()
    }

    pub fn max_weight(&self) -> usize {
        self.terms.keys().map(PauliString::weight).max().unwrap_or(0)
    }

    /// One term per line, `<coefficient> <string>`, sorted by string.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, c) in self.sorted_terms() {
            out.push_str(&format!("{c:?} {p}\n"));
        }
        out
    }

    /// Parses the text form. Blank lines and `#` comments are skipped; an empty
    /// body requires `num_qubits` to be supplied.
    pub fn from_text(text: &str, num_qubits: Option<usize>) -> Result<Self> {
        let mut parsed = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: i + 1, message };
            let mut fields = line.split_whitespace();
            let (Some(coeff), Some(word), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(parse_err(format!("expected `<coefficient> <string>`, got {line:?}")));
            };
            let c: f64 = coeff.parse().map_err(|e| parse_err(format!("bad coefficient {coeff:?}: {e}")))?;
            let p: PauliString = word.parse().map_err(|e: Error| parse_err(e.to_string()))?;
            parsed.push((i + 1, p, c));
        }
        let n = match (num_qubits, parsed.first()) {
            (Some(n), _) => n,
            (None, Some((_, p, _))) => p.num_qubits(),
            (None, None) => {
                return Err(Error::Parse { line: 0, message: "empty sum needs an explicit qubit count".into() })
            }
        };
        let mut sum = PauliSum::new(n)?;
        for (line, p, c) in parsed {
            if p.num_qubits() != n {
                return Err(Error::Parse {
                    line,
                    message: format!("string {p} has {} qubits, expected {n}", p.num_qubits()),
                });
            }
            sum.add_unchecked(p, c, 0.0);
        }
        Ok(sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{commutator_is_zero, pauli_matrix};
    use num_complex::Complex64;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(ps("IIII").weight(), 0);
        assert_eq!(ps("IXYZ").weight(), 3);
        assert_eq!(ps("XXYYZZ").weight(), 6);
    }

    #[test]
    fn commutes_examples() {
        assert!(!ps("XI").commutes(&ps("ZI")).unwrap());
        assert!(ps("XX").commutes(&ps("ZZ")).unwrap());
        assert!(!ps("ZZ").commutes(&ps("XI")).unwrap());
        assert!(matches!(ps("XX").commutes(&ps("X")), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn branch_product_examples() {
        assert_eq!(ps("X").branch_product(&ps("Z")).unwrap(), (-1.0, ps("Y")));
        assert_eq!(ps("ZZ").branch_product(&ps("XI")).unwrap(), (1.0, ps("YZ")));
        assert_eq!(ps("ZI").branch_product(&ps("XX")).unwrap(), (1.0, ps("YX")));
        assert!(matches!(ps("XX").branch_product(&ps("ZZ")), Err(Error::CommutingBranch { .. })));
    }

    fn all_strings(n: usize) -> Vec<PauliString> {
        (0..4usize.pow(n as u32))
            .map(|mut code| {
                let letters: Vec<Letter> = (0..n)
                    .map(|_| {
                        let l = [Letter::I, Letter::X, Letter::Y, Letter::Z][code % 4];
                        code /= 4;
                        l
                    })
                    .collect();
                PauliString::from_letters(&letters).unwrap()
            })
            .collect()
    }

    #[test]
    fn commutes_matches_dense_commutator() {
        for n in 1..=2 {
            let strings = all_strings(n);
            for p in &strings {
                for g in &strings {
                    assert_eq!(p.commutes(g).unwrap(), commutator_is_zero(p, g), "{p} {g}");
                }
            }
        }
    }

    #[test]
    fn branch_product_matches_dense_for_all_two_qubit_pairs() {
        let strings = all_strings(2);
        let i = Complex64::new(0.0, 1.0);
        for p in &strings {
            for g in &strings {
                if p.commutes(g).unwrap() {
                    continue;
                }
                let (sign, pp) = p.branch_product(g).unwrap();
                let mp = pauli_matrix(p);
                let mg = pauli_matrix(g);
                let expected = (&mg * &mp - &mp * &mg) * (i / 2.0);
                let got = pauli_matrix(&pp) * Complex64::new(sign, 0.0);
                assert!((expected - got).norm() < 1e-12, "{p} {g}");

                // Applying the branch twice returns to P with the opposite sign.
                let (sign2, back) = pp.branch_product(g).unwrap();
                assert_eq!(back, *p);
                assert_eq!(sign * sign2, -1.0);
            }
        }
    }

    #[test]
    fn add_term_examples() {
        let mut s = PauliSum::from_terms(1, [(ps("X"), 1.0)]).unwrap();
        s.add_term(ps("X"), -1.0, 1e-12).unwrap();
        assert!(s.is_empty());

        let mut s = PauliSum::new(1).unwrap();
        s.add_term(ps("Z"), 0.5, 1e-12).unwrap();
        assert_eq!(s.coefficient(&ps("Z")), 0.5);

        let mut s = PauliSum::from_terms(1, [(ps("Y"), 0.3)]).unwrap();
        s.add_term(ps("Y"), 0.4, 1e-12).unwrap();
        assert!((s.coefficient(&ps("Y")) - 0.7).abs() < 1e-15);
        assert_eq!(s.len(), 1);

        assert!(matches!(s.add_term(ps("YY"), 1.0, 0.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn text_parsing_errors() {
        assert!(matches!("XQ".parse::<PauliString>(), Err(Error::InvalidLetter('Q'))));
        assert!(matches!(PauliSum::from_text("1.0 XX\n0.5 X\n", None), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(PauliSum::from_text("abc XX\n", None), Err(Error::Parse { line: 1, .. })));
        let empty = PauliSum::from_text("# nothing\n", Some(3)).unwrap();
        assert_eq!(empty.num_qubits(), 3);
        assert!(empty.is_empty());
    }

    #[test]
    fn too_many_qubits_rejected() {
        assert!(matches!(PauliString::identity(65), Err(Error::TooManyQubits { .. })));
        assert!(PauliString::identity(64).is_ok());
    }
}
