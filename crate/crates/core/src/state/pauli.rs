//! Signed Pauli strings and stabilizer group specifications.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{c, gates, kron_all, r, Matrix, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix {
        match self {
            Pauli::I => gates::identity(),
            Pauli::X => gates::pauli_x(),
            Pauli::Y => gates::pauli_y(),
            Pauli::Z => gates::pauli_z(),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// `self · other = i^k · result`
    fn product(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }
}

/// `±P₁P₂…Pₙ`, with qubit 0 the leftmost factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    negative: bool,
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(negative: bool, ops: Vec<Pauli>) -> Self {
        PauliString { negative, ops }
    }

    pub fn identity(n: usize) -> Self {
        PauliString { negative: false, ops: vec![Pauli::I; n] }
    }

    pub fn n_qubits(&self) -> usize {
        self.ops.len()
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I)
    }

    pub fn matrix(&self) -> Result<Matrix> {
        let factors: Vec<Matrix> = self.ops.iter().map(|p| p.matrix()).collect();
        let m = kron_all(&factors)?;
        Ok(if self.negative { m.scale_real(-1.0) } else { m })
    }

    /// `(I + S)/2`, the projector onto the +1 eigenspace.
    pub fn plus_projector(&self) -> Result<Matrix> {
        let s = self.matrix()?;
        Ok((&Matrix::identity(s.rows()) + &s).scale_real(0.5))
    }

    /// Applies the string to a state without materializing its matrix.
    pub fn apply(&self, v: &StateVector) -> StateVector {
        let n = self.ops.len();
        assert_eq!(v.dim(), 1 << n, "Pauli string acts on {n} qubits");
        let mut flip = 0usize;
        for (k, p) in self.ops.iter().enumerate() {
            if p.bits().0 {
                flip |= 1 << (n - 1 - k);
            }
        }
        let sign = if self.negative { -1.0 } else { 1.0 };
        let mut out = StateVector::zeros(v.dim());
        for (b, &amp) in v.amplitudes().iter().enumerate() {
            let mut phase = r(sign);
            for (k, p) in self.ops.iter().enumerate() {
                let bit = (b >> (n - 1 - k)) & 1;
                let parity = if bit == 1 { -1.0 } else { 1.0 };
                phase *= match p {
                    Pauli::I | Pauli::X => r(1.0),
                    Pauli::Z => r(parity),
                    Pauli::Y => c(0.0, parity),
                };
            }
            out.amplitudes_mut()[b ^ flip] += phase * amp;
        }
        out
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(self.n_qubits(), other.n_qubits());
        let anti =
            self.ops.iter().zip(&other.ops).filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b).count();
        anti % 2 == 0
    }

    /// Product of two commuting strings; `None` if they anticommute.
    pub fn mul_commuting(&self, other: &PauliString) -> Option<PauliString> {
        if !self.commutes_with(other) {
            return None;
        }
        let mut k = 0u8;
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(&a, &b)| {
                let (e, p) = a.product(b);
                k += e;
                p
            })
            .collect();
        // Commuting strings give k ≡ 0 or 2 (mod 4).
        let negative = self.negative ^ other.negative ^ (k % 4 == 2);
        Some(PauliString { negative, ops })
    }

    fn symplectic(&self) -> u128 {
        let n = self.ops.len();
        self.ops.iter().enumerate().fold(0u128, |acc, (k, p)| {
            let (x, z) = p.bits();
            acc | (u128::from(x) << k) | (u128::from(z) << (n + k))
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        for p in &self.ops {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `"+XXX"`, `"-YY"`, or an unsigned `"ZIZ"` (taken as positive).
    /// Error positions are 1-based character indices.
    fn from_str(s: &str) -> Result<Self> {
        let mut negative = false;
        let mut ops = Vec::new();
        for (i, ch) in s.chars().enumerate() {
            let pos = i + 1;
            match ch {
                '+' | '-' if i == 0 => negative = ch == '-',
                '+' | '-' => return Err(Error::parse(pos, format!("sign '{ch}' must lead the string"))),
                'I' | 'i' => ops.push(Pauli::I),
                'X' | 'x' => ops.push(Pauli::X),
                'Y' | 'y' => ops.push(Pauli::Y),
                'Z' | 'z' => ops.push(Pauli::Z),
                other => return Err(Error::parse(pos, format!("unexpected character '{other}'"))),
            }
        }
        if ops.is_empty() {
            return Err(Error::parse(s.chars().count() + 1, "no Pauli factors"));
        }
        Ok(PauliString { negative, ops })
    }
}

/// `n` commuting, independent generators of a stabilizer group on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerGroupSpec {
    n: usize,
    generators: Vec<PauliString>,
}

impl StabilizerGroupSpec {
    pub fn new(generators: Vec<PauliString>) -> Result<Self> {
        let n = generators.first().map_or(0, |g| g.n_qubits());
        if n == 0 {
            return Err(Error::Spec("at least one generator is required".into()));
        }
        if n > 60 {
            return Err(Error::Spec(format!("{n} qubits is beyond the supported range")));
        }
        if generators.len() != n {
            return Err(Error::Spec(format!("{n}-qubit group needs {n} generators, got {}", generators.len())));
        }
        if let Some(g) = generators.iter().find(|g| g.n_qubits() != n) {
            return Err(Error::Spec(format!("generator {g} does not act on {n} qubits")));
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(Error::Spec(format!("generators {a} and {b} anticommute")));
                }
            }
        }
        if gf2_rank(generators.iter().map(|g| g.symplectic()).collect()) != n {
            return Err(Error::Spec("generators are not independent".into()));
        }
        Ok(StabilizerGroupSpec { n, generators })
    }

    /// Parses whitespace- or comma-separated generator strings.
    pub fn parse(text: &str) -> Result<Self> {
        let gens = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<PauliString>>>()?;
        Self::new(gens)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// All `2ⁿ − 1` non-identity group elements, indexed by generator subset bitmask.
    pub fn nontrivial_elements(&self) -> Vec<PauliString> {
        (1u64..(1u64 << self.n))
            .map(|mask| {
                self.generators
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .fold(PauliString::identity(self.n), |acc, (_, g)| {
                        acc.mul_commuting(g).expect("group elements commute")
                    })
            })
            .collect()
    }
}

fn gf2_rank(mut rows: Vec<u128>) -> usize {
    let mut rank = 0;
    for bit in 0..128 {
        let mask = 1u128 << bit;
        let Some(pivot) = rows[rank..].iter().position(|&v| v & mask != 0) else {
            continue;
        };
        rows.swap(rank, rank + pivot);
        let p = rows[rank];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && *row & mask != 0 {
                *row ^= p;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(ps("+XXX").to_string(), "+XXX");
        assert_eq!(ps("-YY").to_string(), "-YY");
        assert_eq!(ps("ZIZ").to_string(), "+ZIZ");
        match "+XQZ".parse::<PauliString>() {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!("X-Z".parse::<PauliString>(), Err(Error::Parse { position: 2, .. })));
        assert!("+".parse::<PauliString>().is_err());
    }

    #[test]
    fn apply_matches_matrix() {
        let v =
            StateVector::from_amplitudes((0..8).map(|k| c(k as f64 * 0.1, 0.3 - k as f64 * 0.05)).collect()).unwrap();
        for s in ["+XYZ", "-YIY", "+ZZI", "-XXX", "+IYI"] {
            let p = ps(s);
            let direct = p.apply(&v);
            let via = p.matrix().unwrap().apply(&v);
            assert!(direct.max_abs_diff(&via) < 1e-14, "{s}");
        }
    }

    #[test]
    fn products_track_sign() {
        // XX · ZZ = (XZ)(XZ) = (-iY)(-iY) = -YY
        assert_eq!(ps("+XX").mul_commuting(&ps("+ZZ")).unwrap(), ps("-YY"));
        assert!(ps("+X").mul_commuting(&ps("+Z")).is_none());
        let a = ps("+XZY");
        let b = ps("-ZZY");
        if let Some(prod) = a.mul_commuting(&b) {
            let lhs = a.matrix().unwrap().matmul(&b.matrix().unwrap());
            assert!(lhs.max_abs_diff(&prod.matrix().unwrap()) < 1e-14);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(StabilizerGroupSpec::parse("+XXX +ZIZ +ZZI").is_ok());
        assert!(matches!(StabilizerGroupSpec::parse("+XX +ZI"), Err(Error::Spec(_))));
        assert!(matches!(StabilizerGroupSpec::parse("+ZZ -ZZ"), Err(Error::Spec(_))));
        assert!(matches!(StabilizerGroupSpec::parse("+XX"), Err(Error::Spec(_))));
        assert!(matches!(StabilizerGroupSpec::parse("+XX +Z"), Err(Error::Spec(_))));
    }

    #[test]
    fn group_elements() {
        let spec = StabilizerGroupSpec::parse("+XXX,+ZIZ,+ZZI").unwrap();
        let els = spec.nontrivial_elements();
        assert_eq!(els.len(), 7);
        assert!(els.iter().all(|e| !e.is_identity()));
        let mut uniq = els.clone();
        uniq.sort_by_key(|e| e.to_string());
        uniq.dedup();
        assert_eq!(uniq.len(), 7);
    }
}
