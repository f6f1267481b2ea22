//! Residue fields of finite chain rings and the extension-field
//! multiplication matrices used by the difference-set construction.
//!
//! Field elements are handled as indices `0..q`. For a prime residue field
//! the index is the residue itself; for the field `Z_p[i]` (p = 3 mod 4) the
//! index of `a + bi` is `a + b p`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ring::{Ring, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FieldKind {
    Prime { p: u64 },
    GaussSquare { p: u64 },
}

/// The residue field `R/(pi)` of a finite chain ring, together with the
/// projection and a fixed section back into the ring.
#[derive(Debug, Clone)]
pub struct ChainField {
    ring: Arc<Ring>,
    q: u64,
    kind: FieldKind,
}

impl ChainField {
    pub fn new(ring: Arc<Ring>) -> Result<ChainField> {
        use crate::ring::ChainComponent::*;
        let comp = ring
            .chain_component()
            .ok_or_else(|| Error::NotChainRing(ring.to_string()))?;
        let (q, kind) = match comp {
            IntPower { p, .. } => (p, FieldKind::Prime { p }),
            GaussianTwo => (2, FieldKind::Prime { p: 2 }),
            GaussianField { p } => (p * p, FieldKind::GaussSquare { p }),
        };
        Ok(ChainField { ring, q, kind })
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        match self.kind {
            FieldKind::Prime { p } => (a + b) % p,
            FieldKind::GaussSquare { p } => {
                let (ar, ai) = (a % p, a / p);
                let (br, bi) = (b % p, b / p);
                (ar + br) % p + ((ai + bi) % p) * p
            }
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        match self.kind {
            FieldKind::Prime { p } => (p - a % p) % p,
            FieldKind::GaussSquare { p } => {
                let (ar, ai) = (a % p, a / p);
                (p - ar) % p + ((p - ai) % p) * p
            }
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match self.kind {
            FieldKind::Prime { p } => a * b % p,
            FieldKind::GaussSquare { p } => {
                let (ar, ai) = (a % p, a / p);
                let (br, bi) = (b % p, b / p);
                let re = (ar * br + p * p - ai * bi % (p * p)) % p;
                let im = (ar * bi + ai * br) % p;
                re + im * p
            }
        }
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::InvalidParameter("inverse of zero".into()));
        }
        // small fields: scan
        (1..self.q)
            .find(|&b| self.mul(a, b) == 1)
            .ok_or_else(|| Error::InvalidParameter("no inverse found".into()))
    }

    /// Fixed section of the projection `R -> R/(pi)`.
    pub fn lift(&self, a: u64) -> Value {
        use crate::ring::ChainComponent::*;
        match self.ring.chain_component().expect("chain ring") {
            IntPower { .. } => Value::Int(a),
            GaussianTwo => Value::Gauss(a, 0),
            GaussianField { p } => Value::Gauss(a % p, a / p),
        }
    }

    /// Projection `R -> R/(pi)`.
    pub fn project(&self, v: &Value) -> u64 {
        use crate::ring::ChainComponent::*;
        match (self.ring.chain_component().expect("chain ring"), v) {
            (IntPower { p, .. }, Value::Int(x)) => x % p,
            (GaussianTwo, Value::Gauss(a, b)) => (a + b) % 2,
            (GaussianField { p }, Value::Gauss(a, b)) => a + b * p,
            _ => panic!("value does not belong to the chain ring"),
        }
    }
}

/// Polynomials over the field as little-endian coefficient vectors
/// (index i holds the coefficient of x^i), trailing zeros trimmed.
fn poly_trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn poly_mul(k: &ChainField, f: &[u64], g: &[u64]) -> Vec<u64> {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = k.add(out[i + j], k.mul(a, b));
        }
    }
    poly_trim(out)
}

/// Remainder of `f` modulo the monic polynomial `m`.
fn poly_rem(k: &ChainField, f: &[u64], m: &[u64]) -> Vec<u64> {
    debug_assert_eq!(*m.last().expect("monic divisor"), 1);
    let mut r = f.to_vec();
    while r.len() >= m.len() {
        let lead = *r.last().expect("nonempty");
        if lead != 0 {
            let shift = r.len() - m.len();
            for (i, &c) in m.iter().enumerate() {
                let sub = k.mul(lead, c);
                r[shift + i] = k.sub(r[shift + i], sub);
            }
        }
        r.pop();
        r = poly_trim(r);
        if r.len() < m.len() {
            break;
        }
    }
    r
}

fn poly_is_irreducible(k: &ChainField, f: &[u64]) -> bool {
    let d = f.len() - 1;
    if d == 1 {
        return true;
    }
    // trial division by every monic polynomial of degree 1..=d/2
    for deg in 1..=d / 2 {
        let count = k.order().pow(deg as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(deg + 1);
            let mut rest = idx;
            for _ in 0..deg {
                g.push(rest % k.order());
                rest /= k.order();
            }
            g.push(1);
            if poly_rem(k, f, &g).is_empty() {
                return false;
            }
        }
    }
    true
}

/// The least monic irreducible of degree `d`, ordering candidates by the
/// base-q integer encoding of their non-leading coefficients.
fn least_irreducible(k: &ChainField, d: usize) -> Vec<u64> {
    let count = k.order().pow(d as u32);
    for idx in 0..count {
        let mut f = Vec::with_capacity(d + 1);
        let mut rest = idx;
        for _ in 0..d {
            f.push(rest % k.order());
            rest /= k.order();
        }
        f.push(1);
        if poly_is_irreducible(k, &f) {
            return f;
        }
    }
    unreachable!("an irreducible of every degree exists over a finite field")
}

/// The `q^d` multiplication matrices of `F_{q^d}` acting on itself in the
/// polynomial basis `1, x, ..., x^(d-1)` over the residue field, listed in
/// the canonical order of field elements. Differences of distinct matrices
/// are invertible over the field.
pub fn multiplication_matrices(k: &ChainField, d: usize) -> Vec<Vec<Vec<u64>>> {
    let modulus = least_irreducible(k, d);
    let q = k.order();
    let count = q.pow(d as u32);
    let mut out = Vec::with_capacity(count as usize);
    for idx in 0..count {
        let mut theta = Vec::with_capacity(d);
        let mut rest = idx;
        for _ in 0..d {
            theta.push(rest % q);
            rest /= q;
        }
        let theta = poly_trim(theta);
        let mut mat = vec![vec![0u64; d]; d];
        for (i, row) in mat.iter_mut().enumerate() {
            // row i holds the coordinates of theta * x^i
            let mut xi = vec![0u64; i + 1];
            xi[i] = 1;
            let prod = poly_rem(k, &poly_mul(k, &theta, &xi), &modulus);
            for (j, &c) in prod.iter().enumerate() {
                row[j] = c;
            }
        }
        out.push(mat);
    }
    out
}
