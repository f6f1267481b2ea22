//! Finite principal ideal rings and their element arithmetic.
//!
//! Three ring families are supported: `Z_m` (integers modulo `m`), `Z_p[i]`
//! (Gaussian integers modulo a prime), and finite direct products of these.
//! Every such ring decomposes into finite chain components, and the structural
//! operations (annihilators, ideal lengths, canonical generators, the 2x2
//! elimination transform) are routed through that decomposition.
//!
//! Canonical choices, fixed once and for all so that reduced echelon forms are
//! reproducible:
//! * the canonical generator of an ideal of `Z_m` is the positive divisor
//!   `gcd(a, m)` of `m` (with the zero ideal represented by `0`);
//! * canonical residue representatives modulo a divisor `d` are `0..d-1`;
//! * on the other chain components the canonical ideal generators are powers
//!   of the uniformizer and residue representatives are the least element of
//!   each class in enumeration order.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use rand::Rng;

use crate::error::{Error, Result};

/// Default cap for whole-ring element enumeration.
pub const DEFAULT_ELEMENT_CAP: u128 = 10_000;

/// Textual description of a supported ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingSpec {
    /// Integers modulo `m`, `m >= 2`. Written `Z<m>`.
    Residue(u64),
    /// Gaussian integers modulo a prime `p`. Written `Zi<p>`.
    Gaussian(u64),
    /// Direct product; elements are tuples. Written `product(a,b,...)`.
    Product(Vec<RingSpec>),
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Residue(m) => write!(f, "Z{m}"),
            RingSpec::Gaussian(p) => write!(f, "Zi{p}"),
            RingSpec::Product(fs) => {
                write!(f, "product(")?;
                for (i, s) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Canonical element payload. Always stores the canonical representative:
/// integers in `[0, m)`, Gaussian pairs with both parts in `[0, p)`, tuples
/// of canonical components.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(u64),
    /// `Gauss(a, b)` is `a + b i`.
    Gauss(u64, u64),
    Tuple(Vec<Value>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(x) => write!(f, "{x}"),
            Value::Gauss(a, b) => write!(f, "{a}+{b}i"),
            Value::Tuple(xs) => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// One chain component of a ring's structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainComponent {
    /// `Z_{p^e}`; residue field of order `p`.
    IntPower { p: u64, e: u32 },
    /// `Z_2[i]`; chain ring with uniformizer `1+i`, residue field of order 2.
    GaussianTwo,
    /// `Z_p[i]` for `p = 3 mod 4`; the field with `p^2` elements.
    GaussianField { p: u64 },
}

impl ChainComponent {
    /// Residue field order.
    pub fn q(&self) -> u64 {
        match self {
            ChainComponent::IntPower { p, .. } => *p,
            ChainComponent::GaussianTwo => 2,
            ChainComponent::GaussianField { p } => p * p,
        }
    }

    /// Chain length (nilpotency index of the uniformizer).
    pub fn e(&self) -> u32 {
        match self {
            ChainComponent::IntPower { e, .. } => *e,
            ChainComponent::GaussianTwo => 2,
            ChainComponent::GaussianField { .. } => 1,
        }
    }
}

impl fmt::Display for ChainComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainComponent::IntPower { p, e } => {
                write!(f, "(Z{}, q={}, e={})", pow_u64(*p, *e), p, e)
            }
            ChainComponent::GaussianTwo => write!(f, "(Zi2, q=2, e=2)"),
            ChainComponent::GaussianField { p } => write!(f, "(Zi{}, q={}, e=1)", p, p * p),
        }
    }
}

#[derive(Debug)]
enum RingKind {
    /// `Z_m` with its prime power factorization, sorted by prime.
    Residue { m: u64, factors: Vec<(u64, u32)> },
    /// `Z_2[i]`.
    GaussChain,
    /// `Z_p[i]`, `p = 3 mod 4`.
    GaussField { p: u64 },
    /// `Z_p[i]`, `p = 1 mod 4`; `s` is the least square root of `-1 mod p`.
    GaussSplit { p: u64, s: u64 },
    Product { factors: Vec<Arc<Ring>> },
}

/// A validated ring together with its derived structure.
#[derive(Debug)]
pub struct Ring {
    spec: RingSpec,
    kind: RingKind,
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}
impl Eq for Ring {}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec)
    }
}

/// The unimodular elimination transform: `x a + y b = g`, `z a + t b = 0`,
/// `x t - y z = 1`, and `(g) = (a) + (b)`.
#[derive(Debug, Clone)]
pub struct Stab2 {
    pub x: Value,
    pub y: Value,
    pub z: Value,
    pub t: Value,
    pub g: Value,
}

/// A principal ideal, pinned to its canonical generator. Two elements
/// generate the same ideal iff their handles are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealHandle {
    pub generator: Value,
    pub length: u64,
}

impl Ring {
    pub fn new(spec: RingSpec) -> Result<Arc<Ring>> {
        let kind = match &spec {
            RingSpec::Residue(m) => {
                if *m < 2 {
                    return Err(Error::InvalidRing(format!("Z{m}: modulus must be >= 2")));
                }
                RingKind::Residue {
                    m: *m,
                    factors: factorize(*m),
                }
            }
            RingSpec::Gaussian(p) => {
                if !is_prime(*p) {
                    return Err(Error::InvalidRing(format!("Zi{p}: {p} is not prime")));
                }
                if *p == 2 {
                    RingKind::GaussChain
                } else if p % 4 == 3 {
                    RingKind::GaussField { p: *p }
                } else {
                    let s = (2..*p)
                        .find(|s| mul_mod(*s, *s, *p) == p - 1)
                        .expect("p = 1 mod 4 has a square root of -1");
                    RingKind::GaussSplit { p: *p, s }
                }
            }
            RingSpec::Product(fs) => {
                if fs.is_empty() {
                    return Err(Error::InvalidRing("empty product".into()));
                }
                let factors = fs
                    .iter()
                    .map(|s| Ring::new(s.clone()))
                    .collect::<Result<Vec<_>>>()?;
                RingKind::Product { factors }
            }
        };
        Ok(Arc::new(Ring { spec, kind }))
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    /// Ordered chain components of the ring (finest decomposition).
    pub fn structure(&self) -> Vec<ChainComponent> {
        match &self.kind {
            RingKind::Residue { factors, .. } => factors
                .iter()
                .map(|&(p, e)| ChainComponent::IntPower { p, e })
                .collect(),
            RingKind::GaussChain => vec![ChainComponent::GaussianTwo],
            RingKind::GaussField { p } => vec![ChainComponent::GaussianField { p: *p }],
            RingKind::GaussSplit { p, .. } => vec![
                ChainComponent::IntPower { p: *p, e: 1 },
                ChainComponent::IntPower { p: *p, e: 1 },
            ],
            RingKind::Product { factors } => {
                factors.iter().flat_map(|f| f.structure()).collect()
            }
        }
    }

    /// For `Z_p[i]` with `p = 1 mod 4`, the two roots `(s, p - s)` of
    /// `x^2 + 1 = 0` used for the CRT split.
    pub fn split_roots(&self) -> Option<(u64, u64)> {
        match &self.kind {
            RingKind::GaussSplit { p, s } => Some((*s, *p - *s)),
            _ => None,
        }
    }

    /// Length of the ring as a module over itself.
    pub fn length(&self) -> u64 {
        self.structure().iter().map(|c| u64::from(c.e())).sum()
    }

    pub fn size(&self) -> u128 {
        match &self.kind {
            RingKind::Residue { m, .. } => u128::from(*m),
            RingKind::GaussChain => 4,
            RingKind::GaussField { p } | RingKind::GaussSplit { p, .. } => {
                u128::from(*p) * u128::from(*p)
            }
            RingKind::Product { factors } => factors.iter().map(|f| f.size()).product(),
        }
    }

    /// Some iff the ring is a finite chain ring (a single chain component).
    pub fn chain_component(&self) -> Option<ChainComponent> {
        let st = self.structure();
        if st.len() == 1 {
            st.into_iter().next()
        } else {
            None
        }
    }

    /// Canonical uniformizer of a chain ring: `p` for `Z_{p^e}`, `1+i` for
    /// `Z_2[i]`, `0` for a field (whose maximal ideal is the zero ideal).
    pub fn uniformizer(&self) -> Result<Value> {
        match &self.kind {
            RingKind::Residue { m, factors } => {
                if factors.len() != 1 {
                    return Err(Error::NotChainRing(self.spec.to_string()));
                }
                let (p, e) = factors[0];
                Ok(Value::Int(if e == 1 { 0 } else { p % m }))
            }
            RingKind::GaussChain => Ok(Value::Gauss(1, 1)),
            RingKind::GaussField { .. } => Ok(Value::Gauss(0, 0)),
            _ => Err(Error::NotChainRing(self.spec.to_string())),
        }
    }

    pub fn zero(&self) -> Value {
        match &self.kind {
            RingKind::Residue { .. } => Value::Int(0),
            RingKind::GaussChain | RingKind::GaussField { .. } | RingKind::GaussSplit { .. } => {
                Value::Gauss(0, 0)
            }
            RingKind::Product { factors } => {
                Value::Tuple(factors.iter().map(|f| f.zero()).collect())
            }
        }
    }

    pub fn one(&self) -> Value {
        match &self.kind {
            RingKind::Residue { .. } => Value::Int(1),
            RingKind::GaussChain | RingKind::GaussField { .. } | RingKind::GaussSplit { .. } => {
                Value::Gauss(1, 0)
            }
            RingKind::Product { factors } => {
                Value::Tuple(factors.iter().map(|f| f.one()).collect())
            }
        }
    }

    pub fn is_zero(&self, a: &Value) -> bool {
        *a == self.zero()
    }

    /// True iff `v` is a canonical element of this ring.
    pub fn contains(&self, v: &Value) -> bool {
        match (&self.kind, v) {
            (RingKind::Residue { m, .. }, Value::Int(x)) => x < m,
            (RingKind::GaussChain, Value::Gauss(a, b)) => *a < 2 && *b < 2,
            (RingKind::GaussField { p }, Value::Gauss(a, b))
            | (RingKind::GaussSplit { p, .. }, Value::Gauss(a, b)) => a < p && b < p,
            (RingKind::Product { factors }, Value::Tuple(xs)) => {
                xs.len() == factors.len() && factors.iter().zip(xs).all(|(f, x)| f.contains(x))
            }
            _ => false,
        }
    }

    pub fn add(&self, a: &Value, b: &Value) -> Value {
        match (&self.kind, a, b) {
            (RingKind::Residue { m, .. }, Value::Int(x), Value::Int(y)) => {
                Value::Int(add_mod(*x, *y, *m))
            }
            (RingKind::GaussChain, Value::Gauss(xa, xb), Value::Gauss(ya, yb)) => {
                Value::Gauss(add_mod(*xa, *ya, 2), add_mod(*xb, *yb, 2))
            }
            (RingKind::GaussField { p }, Value::Gauss(xa, xb), Value::Gauss(ya, yb))
            | (RingKind::GaussSplit { p, .. }, Value::Gauss(xa, xb), Value::Gauss(ya, yb)) => {
                Value::Gauss(add_mod(*xa, *ya, *p), add_mod(*xb, *yb, *p))
            }
            (RingKind::Product { factors }, Value::Tuple(xs), Value::Tuple(ys)) => Value::Tuple(
                factors
                    .iter()
                    .zip(xs.iter().zip(ys))
                    .map(|(f, (x, y))| f.add(x, y))
                    .collect(),
            ),
            _ => panic!("value does not belong to ring {self}"),
        }
    }

    pub fn neg(&self, a: &Value) -> Value {
        match (&self.kind, a) {
            (RingKind::Residue { m, .. }, Value::Int(x)) => Value::Int(neg_mod(*x, *m)),
            (RingKind::GaussChain, Value::Gauss(xa, xb)) => {
                Value::Gauss(neg_mod(*xa, 2), neg_mod(*xb, 2))
            }
            (RingKind::GaussField { p }, Value::Gauss(xa, xb))
            | (RingKind::GaussSplit { p, .. }, Value::Gauss(xa, xb)) => {
                Value::Gauss(neg_mod(*xa, *p), neg_mod(*xb, *p))
            }
            (RingKind::Product { factors }, Value::Tuple(xs)) => {
                Value::Tuple(factors.iter().zip(xs).map(|(f, x)| f.neg(x)).collect())
            }
            _ => panic!("value does not belong to ring {self}"),
        }
    }

    pub fn sub(&self, a: &Value, b: &Value) -> Value {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Value, b: &Value) -> Value {
        match (&self.kind, a, b) {
            (RingKind::Residue { m, .. }, Value::Int(x), Value::Int(y)) => {
                Value::Int(mul_mod(*x, *y, *m))
            }
            (RingKind::GaussChain, Value::Gauss(xa, xb), Value::Gauss(ya, yb)) => {
                gauss_mul(*xa, *xb, *ya, *yb, 2)
            }
            (RingKind::GaussField { p }, Value::Gauss(xa, xb), Value::Gauss(ya, yb))
            | (RingKind::GaussSplit { p, .. }, Value::Gauss(xa, xb), Value::Gauss(ya, yb)) => {
                gauss_mul(*xa, *xb, *ya, *yb, *p)
            }
            (RingKind::Product { factors }, Value::Tuple(xs), Value::Tuple(ys)) => Value::Tuple(
                factors
                    .iter()
                    .zip(xs.iter().zip(ys))
                    .map(|(f, (x, y))| f.mul(x, y))
                    .collect(),
            ),
            _ => panic!("value does not belong to ring {self}"),
        }
    }

    pub fn pow(&self, a: &Value, n: u32) -> Value {
        let mut acc = self.one();
        for _ in 0..n {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// Canonical generator of the principal ideal `(a)`. Two elements
    /// generate the same ideal iff their canonical generators are equal.
    pub fn ideal_gen(&self, a: &Value) -> Value {
        match (&self.kind, a) {
            (RingKind::Residue { m, .. }, Value::Int(x)) => Value::Int(gcd_mod(*x, *m) % *m),
            (RingKind::GaussChain, _) => match self.gauss_chain_val(a) {
                0 => Value::Gauss(1, 0),
                1 => Value::Gauss(1, 1),
                _ => Value::Gauss(0, 0),
            },
            (RingKind::GaussField { .. }, Value::Gauss(xa, xb)) => {
                if *xa == 0 && *xb == 0 {
                    Value::Gauss(0, 0)
                } else {
                    Value::Gauss(1, 0)
                }
            }
            (RingKind::GaussSplit { p, s }, Value::Gauss(..)) => {
                let (u, v) = split_fwd(a, *p, *s);
                split_back(u64::from(u != 0), u64::from(v != 0), *p, *s)
            }
            (RingKind::Product { factors }, Value::Tuple(xs)) => Value::Tuple(
                factors
                    .iter()
                    .zip(xs)
                    .map(|(f, x)| f.ideal_gen(x))
                    .collect(),
            ),
            _ => panic!("value does not belong to ring {self}"),
        }
    }

    /// The ideal `(a)` as a handle.
    pub fn ideal_handle(&self, a: &Value) -> IdealHandle {
        IdealHandle {
            generator: self.ideal_gen(a),
            length: self.ideal_length(a),
        }
    }

    /// The annihilator ideal `ann(a)` as a handle.
    pub fn annihilator_handle(&self, a: &Value) -> IdealHandle {
        let generator = self.annihilator(a);
        IdealHandle {
            length: self.ideal_length(&generator),
            generator,
        }
    }

    /// Length of the ideal `(a)`.
    pub fn ideal_length(&self, a: &Value) -> u64 {
        match (&self.kind, a) {
            (RingKind::Residue { m, .. }, Value::Int(x)) => big_omega(*m / gcd_mod(*x, *m)),
            (RingKind::GaussChain, _) => 2 - self.gauss_chain_val(a),
            (RingKind::GaussField { .. }, Value::Gauss(xa, xb)) => u64::from(*xa != 0 || *xb != 0),
            (RingKind::GaussSplit { p, s }, Value::Gauss(..)) => {
                let (u, v) = split_fwd(a, *p, *s);
                u64::from(u != 0) + u64::from(v != 0)
            }
            (RingKind::Product { factors }, Value::Tuple(xs)) => factors
                .iter()
                .zip(xs)
                .map(|(f, x)| f.ideal_length(x))
                .sum(),
            _ => panic!("value does not belong to ring {self}"),
        }
    }

    /// Canonical generator of `ann(a) = { r : r a = 0 }`.
    pub fn annihilator(&self, a: &Value) -> Value {
        match (&self.kind, a) {
            (RingKind::Residue { m, .. }, Value::Int(x)) => {
                Value::Int((*m / gcd_mod(*x, *m)) % *m)
            }
            (RingKind::GaussChain, _) => match self.gauss_chain_val(a) {
                0 => Value::Gauss(0, 0),
                1 => Value::Gauss(1, 1),
                _ => Value::Gauss(1, 0),
            },
            (RingKind::GaussField { .. }, Value::Gauss(xa, xb)) => {
                if *xa == 0 && *xb == 0 {
                    Value::Gauss(1, 0)
                } else {
                    Value::Gauss(0, 0)
                }
            }
            (RingKind::GaussSplit { p, s }, Value::Gauss(..)) => {
                let (u, v) = split_fwd(a, *p, *s);
                split_back(u64::from(u == 0), u64::from(v == 0), *p, *s)
            }
            (RingKind::Product { factors }, Value::Tuple(xs)) => Value::Tuple(
                factors
                    .iter()
                    .zip(xs)
                    .map(|(f, x)| f.annihilator(x))
                    .collect(),
            ),
            _ => panic!("value does not belong to ring {self}"),
        }
    }

    /// True iff `b` lies in the ideal `(a)`.
    pub fn divides(&self, a: &Value, b: &Value) -> bool {
        match (&self.kind, a, b) {
            (RingKind::Residue { m, .. }, Value::Int(x), Value::Int(y)) => {
                gcd_mod(*y, *m) % gcd_mod(*x, *m) == 0
            }
            (RingKind::GaussChain, _, _) => self.gauss_chain_val(a) <= self.gauss_chain_val(b),
            (RingKind::GaussField { .. }, _, _) => !self.is_zero(a) || self.is_zero(b),
            (RingKind::GaussSplit { p, s }, _, _) => {
                let (ua, va) = split_fwd(a, *p, *s);
                let (ub, vb) = split_fwd(b, *p, *s);
                (ua != 0 || ub == 0) && (va != 0 || vb == 0)
            }
            (RingKind::Product { factors }, Value::Tuple(xs), Value::Tuple(ys)) => factors
                .iter()
                .zip(xs.iter().zip(ys))
                .all(|(f, (x, y))| f.divides(x, y)),
            _ => panic!("value does not belong to ring {self}"),
        }
    }

    /// A deterministic quotient: some `h` with `h g = b`. For `Z_m` this is
    /// the least valid representative; elsewhere the componentwise least.
    /// Fails when `g` does not divide `b`.
    pub fn divide(&self, b: &Value, g: &Value) -> Result<Value> {
        if !self.divides(g, b) {
            return Err(Error::NotDivisible(b.to_string(), g.to_string()));
        }
        Ok(match (&self.kind, b, g) {
            (RingKind::Residue { m, .. }, Value::Int(bv), Value::Int(gv)) => {
                let d = gcd_mod(*gv, *m);
                if d == *m {
                    // (g) = (0); b is 0 as well and the least quotient is 0
                    Value::Int(0)
                } else {
                    let md = *m / d;
                    Value::Int(mul_mod(*bv / d, inv_mod((*gv / d) % md, md), md))
                }
            }
            (RingKind::GaussChain, _, _) => self
                .elements()
                .find(|h| self.mul(h, g) == *b)
                .expect("divisibility was checked"),
            (RingKind::GaussField { .. }, _, _) => {
                if self.is_zero(g) {
                    self.zero()
                } else {
                    self.mul(b, &self.inv(g)?)
                }
            }
            (RingKind::GaussSplit { p, s }, _, _) => {
                let (ub, vb) = split_fwd(b, *p, *s);
                let (ug, vg) = split_fwd(g, *p, *s);
                let hu = if ug == 0 {
                    0
                } else {
                    mul_mod(ub, inv_mod(ug, *p), *p)
                };
                let hv = if vg == 0 {
                    0
                } else {
                    mul_mod(vb, inv_mod(vg, *p), *p)
                };
                split_back(hu, hv, *p, *s)
            }
            (RingKind::Product { factors }, Value::Tuple(bs), Value::Tuple(gs)) => Value::Tuple(
                factors
                    .iter()
                    .zip(bs.iter().zip(gs))
                    .map(|(f, (bb, gg))| f.divide(bb, gg))
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => panic!("value does not belong to ring {self}"),
        })
    }

    /// Canonical generator of the ideal sum `(a_1) + ... + (a_s)`.
    pub fn ideal_gcd(&self, values: &[Value]) -> Result<Value> {
        if values.is_empty() {
            return Err(Error::EmptyGenerators);
        }
        let mut acc = self.ideal_gen(&values[0]);
        for v in &values[1..] {
            acc = self.ideal_sum2(&acc, v);
        }
        Ok(acc)
    }

    fn ideal_sum2(&self, a: &Value, b: &Value) -> Value {
        match (&self.kind, a, b) {
            (RingKind::Residue { m, .. }, Value::Int(x), Value::Int(y)) => {
                Value::Int(gcd(gcd_mod(*x, *m), gcd_mod(*y, *m)) % *m)
            }
            (RingKind::GaussChain, _, _) => {
                match self.gauss_chain_val(a).min(self.gauss_chain_val(b)) {
                    0 => Value::Gauss(1, 0),
                    1 => Value::Gauss(1, 1),
                    _ => Value::Gauss(0, 0),
                }
            }
            (RingKind::GaussField { .. }, _, _) => {
                if self.is_zero(a) && self.is_zero(b) {
                    self.zero()
                } else {
                    self.one()
                }
            }
            (RingKind::GaussSplit { p, s }, _, _) => {
                let (ua, va) = split_fwd(a, *p, *s);
                let (ub, vb) = split_fwd(b, *p, *s);
                split_back(
                    u64::from(ua != 0 || ub != 0),
                    u64::from(va != 0 || vb != 0),
                    *p,
                    *s,
                )
            }
            (RingKind::Product { factors }, Value::Tuple(xs), Value::Tuple(ys)) => Value::Tuple(
                factors
                    .iter()
                    .zip(xs.iter().zip(ys))
                    .map(|(f, (x, y))| f.ideal_sum2(x, y))
                    .collect(),
            ),
            _ => panic!("value does not belong to ring {self}"),
        }
    }

    pub fn is_unit(&self, a: &Value) -> bool {
        self.ideal_gen(a) == self.one()
    }

    /// Multiplicative inverse of a unit.
    pub fn inv(&self, a: &Value) -> Result<Value> {
        if !self.is_unit(a) {
            return Err(Error::InvalidParameter(format!("{a} is not a unit")));
        }
        Ok(match (&self.kind, a) {
            (RingKind::Residue { m, .. }, Value::Int(x)) => Value::Int(inv_mod(*x, *m)),
            (RingKind::GaussChain, _) => self
                .elements()
                .find(|u| self.mul(u, a) == self.one())
                .expect("unit has an inverse"),
            (RingKind::GaussField { p }, Value::Gauss(xa, xb)) => {
                // (a + bi)^-1 = (a - bi) / (a^2 + b^2)
                let n = add_mod(mul_mod(*xa, *xa, *p), mul_mod(*xb, *xb, *p), *p);
                let ninv = inv_mod(n, *p);
                Value::Gauss(mul_mod(*xa, ninv, *p), mul_mod(neg_mod(*xb, *p), ninv, *p))
            }
            (RingKind::GaussSplit { p, s }, _) => {
                let (u, v) = split_fwd(a, *p, *s);
                split_back(inv_mod(u, *p), inv_mod(v, *p), *p, *s)
            }
            (RingKind::Product { factors }, Value::Tuple(xs)) => Value::Tuple(
                factors
                    .iter()
                    .zip(xs)
                    .map(|(f, x)| f.inv(x))
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => panic!("value does not belong to ring {self}"),
        })
    }

    /// A unit `u` with `u g = ideal_gen(g)`.
    pub fn normalizing_unit(&self, g: &Value) -> Value {
        match (&self.kind, g) {
            (RingKind::Residue { m, factors }, Value::Int(x)) => {
                let target = gcd_mod(*x, *m) % *m;
                let mut rems = Vec::with_capacity(factors.len());
                let mut mods = Vec::with_capacity(factors.len());
                for &(p, e) in factors {
                    let pe = pow_u64(p, e);
                    // p-adic valuation of x, capped at e
                    let alpha = (0..e)
                        .find(|&j| *x % pow_u64(p, j + 1) != 0)
                        .unwrap_or(e);
                    let u = if alpha >= e {
                        1
                    } else {
                        let red = pow_u64(p, e - alpha);
                        let gu = (*x / pow_u64(p, alpha)) % red;
                        let du = (target / pow_u64(p, alpha)) % red;
                        mul_mod(du, inv_mod(gu, red), red)
                    };
                    rems.push(u % pe);
                    mods.push(pe);
                }
                Value::Int(crt(&rems, &mods) % *m)
            }
            (RingKind::GaussChain, _) => {
                let target = self.ideal_gen(g);
                [Value::Gauss(1, 0), Value::Gauss(0, 1)]
                    .into_iter()
                    .find(|u| self.mul(u, g) == target)
                    .expect("chain element is a unit times a uniformizer power")
            }
            (RingKind::GaussField { .. }, _) => {
                if self.is_zero(g) {
                    self.one()
                } else {
                    self.inv(g).expect("nonzero field element")
                }
            }
            (RingKind::GaussSplit { p, s }, _) => {
                let (u, v) = split_fwd(g, *p, *s);
                split_back(
                    if u == 0 { 1 } else { inv_mod(u, *p) },
                    if v == 0 { 1 } else { inv_mod(v, *p) },
                    *p,
                    *s,
                )
            }
            (RingKind::Product { factors }, Value::Tuple(xs)) => Value::Tuple(
                factors
                    .iter()
                    .zip(xs)
                    .map(|(f, x)| f.normalizing_unit(x))
                    .collect(),
            ),
            _ => panic!("value does not belong to ring {self}"),
        }
    }

    /// Canonical representative of the residue class `x + (d)`.
    pub fn canonical_residue(&self, x: &Value, d: &Value) -> Value {
        match (&self.kind, x, d) {
            (RingKind::Residue { m, .. }, Value::Int(xv), Value::Int(dv)) => {
                let g = gcd_mod(*dv, *m);
                Value::Int(if g == *m { *xv } else { *xv % g })
            }
            (RingKind::GaussChain, _, _) => match self.gauss_chain_val(d) {
                0 => Value::Gauss(0, 0),
                1 => {
                    // classes mod (1+i): {0, 1+i} -> 0 and {1, i} -> 1
                    match x {
                        Value::Gauss(a, b) => Value::Gauss((a + b) % 2, 0),
                        _ => panic!("value does not belong to ring {self}"),
                    }
                }
                _ => x.clone(),
            },
            (RingKind::GaussField { .. }, _, _) => {
                if self.is_zero(d) {
                    x.clone()
                } else {
                    self.zero()
                }
            }
            (RingKind::GaussSplit { p, s }, _, _) => {
                let (ux, vx) = split_fwd(x, *p, *s);
                let (ud, vd) = split_fwd(d, *p, *s);
                split_back(
                    if ud == 0 { ux } else { 0 },
                    if vd == 0 { vx } else { 0 },
                    *p,
                    *s,
                )
            }
            (RingKind::Product { factors }, Value::Tuple(xs), Value::Tuple(ds)) => Value::Tuple(
                factors
                    .iter()
                    .zip(xs.iter().zip(ds))
                    .map(|(f, (xx, dd))| f.canonical_residue(xx, dd))
                    .collect(),
            ),
            _ => panic!("value does not belong to ring {self}"),
        }
    }

    /// The 2x2 unimodular transform collapsing `(a, b)` to `(g, 0)`.
    ///
    /// Zero operands take explicit identity/swap transforms. `Z_m` runs the
    /// integer construction: eta = gcd(alpha, beta, m) over the integers,
    /// then gamma = m/eta is repeatedly divided by gcd(gamma, alpha/eta)
    /// until coprime. Gaussian rings go through their classification, and
    /// products act componentwise (the determinant is the all-ones tuple).
    pub fn stab2(&self, a: &Value, b: &Value) -> Stab2 {
        if self.is_zero(b) {
            return Stab2 {
                x: self.one(),
                y: self.zero(),
                z: self.zero(),
                t: self.one(),
                g: a.clone(),
            };
        }
        if self.is_zero(a) {
            return Stab2 {
                x: self.zero(),
                y: self.one(),
                z: self.neg(&self.one()),
                t: self.zero(),
                g: b.clone(),
            };
        }
        match (&self.kind, a, b) {
            (RingKind::Residue { m, .. }, Value::Int(alpha), Value::Int(beta)) => {
                let eta = gcd(gcd(*alpha, *beta), *m);
                let a_over_eta = *alpha / eta;
                let mut gamma = *m / eta;
                loop {
                    let g = gcd(gamma, a_over_eta);
                    if g == 1 {
                        break;
                    }
                    gamma /= g;
                }
                let c = Value::Int(gamma % *m);
                self.stab2_from_multiplier(a, b, c)
            }
            (RingKind::GaussChain, _, _) | (RingKind::GaussField { .. }, _, _) => {
                // chain case: c = 0 when val(a) <= val(b), else c = 1
                let e = u64::from(self.chain_component().expect("local ring").e());
                let val = |v: &Value| e - self.ideal_length(v);
                let c = if val(a) <= val(b) {
                    self.zero()
                } else {
                    self.one()
                };
                self.stab2_from_multiplier(a, b, c)
            }
            (RingKind::GaussSplit { p, s }, _, _) => {
                let (ua, va) = split_fwd(a, *p, *s);
                let (ub, vb) = split_fwd(b, *p, *s);
                let cu = field_stab2(ua, ub, *p);
                let cv = field_stab2(va, vb, *p);
                Stab2 {
                    x: split_back(cu.0, cv.0, *p, *s),
                    y: split_back(cu.1, cv.1, *p, *s),
                    z: split_back(cu.2, cv.2, *p, *s),
                    t: split_back(cu.3, cv.3, *p, *s),
                    g: split_back(cu.4, cv.4, *p, *s),
                }
            }
            (RingKind::Product { factors }, Value::Tuple(xs), Value::Tuple(ys)) => {
                let parts: Vec<Stab2> = factors
                    .iter()
                    .zip(xs.iter().zip(ys))
                    .map(|(f, (x, y))| f.stab2(x, y))
                    .collect();
                Stab2 {
                    x: Value::Tuple(parts.iter().map(|s| s.x.clone()).collect()),
                    y: Value::Tuple(parts.iter().map(|s| s.y.clone()).collect()),
                    z: Value::Tuple(parts.iter().map(|s| s.z.clone()).collect()),
                    t: Value::Tuple(parts.iter().map(|s| s.t.clone()).collect()),
                    g: Value::Tuple(parts.iter().map(|s| s.g.clone()).collect()),
                }
            }
            _ => panic!("value does not belong to ring {self}"),
        }
    }

    /// Assemble the transform from the multiplier `c` with `(a + c b) = (a) + (b)`:
    /// rows `(1, c)` and `(-h, 1 - c h)` where `h (a + c b) = b`.
    fn stab2_from_multiplier(&self, a: &Value, b: &Value, c: Value) -> Stab2 {
        let g = self.add(a, &self.mul(&c, b));
        let h = self.divide(b, &g).expect("(g) = (a) + (b) contains b");
        Stab2 {
            x: self.one(),
            y: c.clone(),
            z: self.neg(&h),
            t: self.sub(&self.one(), &self.mul(&c, &h)),
            g,
        }
    }

    /// Pairwise orthogonal idempotents summing to 1, one per chain component,
    /// in component order. A local ring yields `[1]`.
    pub fn idempotents(&self) -> Vec<Value> {
        match &self.kind {
            RingKind::Residue { m, factors } => {
                if factors.len() == 1 {
                    return vec![self.one()];
                }
                let mods: Vec<u64> = factors.iter().map(|&(p, e)| pow_u64(p, e)).collect();
                (0..factors.len())
                    .map(|i| {
                        let rems: Vec<u64> =
                            (0..factors.len()).map(|j| u64::from(i == j)).collect();
                        Value::Int(crt(&rems, &mods) % *m)
                    })
                    .collect()
            }
            RingKind::GaussChain | RingKind::GaussField { .. } => vec![self.one()],
            RingKind::GaussSplit { p, s } => {
                vec![split_back(1, 0, *p, *s), split_back(0, 1, *p, *s)]
            }
            RingKind::Product { factors } => {
                let mut out = Vec::new();
                for (i, f) in factors.iter().enumerate() {
                    for e in f.idempotents() {
                        out.push(Value::Tuple(
                            factors
                                .iter()
                                .enumerate()
                                .map(|(j, fj)| if j == i { e.clone() } else { fj.zero() })
                                .collect(),
                        ));
                    }
                }
                out
            }
        }
    }

    /// Number of chain components.
    pub fn component_count(&self) -> usize {
        self.structure().len()
    }

    /// The `i`-th chain component as a standalone ring.
    pub fn component_ring(&self, i: usize) -> Arc<Ring> {
        match &self.kind {
            RingKind::Residue { factors, .. } => {
                let (p, e) = factors[i];
                Ring::new(RingSpec::Residue(pow_u64(p, e))).expect("valid component")
            }
            RingKind::GaussChain | RingKind::GaussField { .. } => {
                assert_eq!(i, 0);
                Ring::new(self.spec.clone()).expect("valid component")
            }
            RingKind::GaussSplit { p, .. } => {
                assert!(i < 2);
                Ring::new(RingSpec::Residue(*p)).expect("valid component")
            }
            RingKind::Product { factors } => {
                let mut k = i;
                for f in factors {
                    let c = f.component_count();
                    if k < c {
                        return f.component_ring(k);
                    }
                    k -= c;
                }
                panic!("component index out of range")
            }
        }
    }

    /// Projection of an element onto the `i`-th chain component.
    pub fn project(&self, v: &Value, i: usize) -> Value {
        match (&self.kind, v) {
            (RingKind::Residue { factors, .. }, Value::Int(x)) => {
                let (p, e) = factors[i];
                Value::Int(*x % pow_u64(p, e))
            }
            (RingKind::GaussChain, _) | (RingKind::GaussField { .. }, _) => {
                assert_eq!(i, 0);
                v.clone()
            }
            (RingKind::GaussSplit { p, s }, _) => {
                let (u, w) = split_fwd(v, *p, *s);
                Value::Int(if i == 0 { u } else { w })
            }
            (RingKind::Product { factors }, Value::Tuple(xs)) => {
                let mut k = i;
                for (f, x) in factors.iter().zip(xs) {
                    let c = f.component_count();
                    if k < c {
                        return f.project(x, k);
                    }
                    k -= c;
                }
                panic!("component index out of range")
            }
            _ => panic!("value does not belong to ring {self}"),
        }
    }

    /// Rebuild an element from its chain component projections.
    pub fn assemble(&self, parts: &[Value]) -> Value {
        assert_eq!(parts.len(), self.component_count());
        match &self.kind {
            RingKind::Residue { m, factors } => {
                let mods: Vec<u64> = factors.iter().map(|&(p, e)| pow_u64(p, e)).collect();
                let rems: Vec<u64> = parts
                    .iter()
                    .map(|v| match v {
                        Value::Int(x) => *x,
                        _ => panic!("component of Z_m must be an integer"),
                    })
                    .collect();
                Value::Int(crt(&rems, &mods) % *m)
            }
            RingKind::GaussChain | RingKind::GaussField { .. } => parts[0].clone(),
            RingKind::GaussSplit { p, s } => {
                let (u, v) = match (&parts[0], &parts[1]) {
                    (Value::Int(u), Value::Int(v)) => (*u, *v),
                    _ => panic!("components of a split ring must be integers"),
                };
                split_back(u, v, *p, *s)
            }
            RingKind::Product { factors } => {
                let mut out = Vec::with_capacity(factors.len());
                let mut k = 0;
                for f in factors {
                    let c = f.component_count();
                    out.push(f.assemble(&parts[k..k + c]));
                    k += c;
                }
                Value::Tuple(out)
            }
        }
    }

    /// Top-level product factors: prime-power parts of `Z_m`, the two `Z_p`
    /// copies of a split `Z_p[i]`, the declared factors of a product, or the
    /// ring itself when local.
    pub fn factor_rings(&self) -> Vec<Arc<Ring>> {
        match &self.kind {
            RingKind::Residue { factors, .. } => {
                if factors.len() == 1 {
                    vec![Ring::new(self.spec.clone()).expect("valid")]
                } else {
                    factors
                        .iter()
                        .map(|&(p, e)| {
                            Ring::new(RingSpec::Residue(pow_u64(p, e))).expect("valid")
                        })
                        .collect()
                }
            }
            RingKind::GaussChain | RingKind::GaussField { .. } => {
                vec![Ring::new(self.spec.clone()).expect("valid")]
            }
            RingKind::GaussSplit { p, .. } => {
                let zp = Ring::new(RingSpec::Residue(*p)).expect("valid");
                vec![zp.clone(), zp]
            }
            RingKind::Product { factors } => factors.clone(),
        }
    }

    /// Projection onto the `i`-th top-level factor.
    pub fn project_factor(&self, v: &Value, i: usize) -> Value {
        match (&self.kind, v) {
            (RingKind::Product { .. }, Value::Tuple(xs)) => xs[i].clone(),
            (RingKind::Residue { factors, .. }, _) if factors.len() > 1 => self.project(v, i),
            (RingKind::GaussSplit { .. }, _) => self.project(v, i),
            _ => {
                assert_eq!(i, 0);
                v.clone()
            }
        }
    }

    /// Rebuild an element from top-level factor parts.
    pub fn assemble_factors(&self, parts: &[Value]) -> Value {
        match &self.kind {
            RingKind::Product { factors } => {
                assert_eq!(parts.len(), factors.len());
                Value::Tuple(parts.to_vec())
            }
            RingKind::Residue { factors, .. } if factors.len() > 1 => self.assemble(parts),
            RingKind::GaussSplit { .. } => self.assemble(parts),
            _ => {
                assert_eq!(parts.len(), 1);
                parts[0].clone()
            }
        }
    }

    /// All ring elements in a fixed deterministic order.
    pub fn elements(&self) -> Box<dyn Iterator<Item = Value> + '_> {
        match &self.kind {
            RingKind::Residue { m, .. } => Box::new((0..*m).map(Value::Int)),
            RingKind::GaussChain => {
                Box::new((0..2u64).flat_map(|a| (0..2u64).map(move |b| Value::Gauss(a, b))))
            }
            RingKind::GaussField { p } | RingKind::GaussSplit { p, .. } => {
                let p = *p;
                Box::new((0..p).flat_map(move |a| (0..p).map(move |b| Value::Gauss(a, b))))
            }
            RingKind::Product { factors } => {
                let mut iter: Box<dyn Iterator<Item = Vec<Value>>> =
                    Box::new(std::iter::once(Vec::new()));
                for f in factors {
                    iter = Box::new(iter.flat_map(move |prefix| {
                        f.elements().map(move |v| {
                            let mut next = prefix.clone();
                            next.push(v);
                            next
                        })
                    }));
                }
                Box::new(iter.map(Value::Tuple))
            }
        }
    }

    /// Materialized element list, guarded by a cap.
    pub fn enumerate_elements(&self, cap: u128) -> Result<Vec<Value>> {
        let size = self.size();
        if size > cap {
            return Err(Error::CapExceeded { needed: size, cap });
        }
        Ok(self.elements().collect())
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Value {
        match &self.kind {
            RingKind::Residue { m, .. } => Value::Int(rng.gen_range(0..*m)),
            RingKind::GaussChain => Value::Gauss(rng.gen_range(0..2), rng.gen_range(0..2)),
            RingKind::GaussField { p } | RingKind::GaussSplit { p, .. } => {
                Value::Gauss(rng.gen_range(0..*p), rng.gen_range(0..*p))
            }
            RingKind::Product { factors } => {
                Value::Tuple(factors.iter().map(|f| f.random_element(rng)).collect())
            }
        }
    }

    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Value {
        for _ in 0..256 {
            let v = self.random_element(rng);
            if self.is_unit(&v) {
                return v;
            }
        }
        self.one()
    }

    /// pi-adic valuation on `Z_2[i]`: 0 for units, 1 for the associate of
    /// `1+i`, 2 for zero.
    fn gauss_chain_val(&self, a: &Value) -> u64 {
        match a {
            Value::Gauss(0, 0) => 2,
            Value::Gauss(1, 1) => 1,
            Value::Gauss(_, _) => 0,
            _ => panic!("value does not belong to ring {self}"),
        }
    }
}

/// Element of a specific ring; the user-facing pairing of a ring and a value.
#[derive(Debug, Clone)]
pub struct Element {
    ring: Arc<Ring>,
    value: Value,
}

impl Element {
    pub fn new(ring: Arc<Ring>, value: Value) -> Result<Element> {
        if !ring.contains(&value) {
            return Err(Error::InvalidParameter(format!(
                "{value} is not a canonical element of {ring}"
            )));
        }
        Ok(Element { ring, value })
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn value(&self) -> &Value {
        &self.value
    }

    fn check_same_ring(&self, other: &Element) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.check_same_ring(other)?;
        Ok(Element {
            ring: self.ring.clone(),
            value: self.ring.add(&self.value, &other.value),
        })
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.check_same_ring(other)?;
        Ok(Element {
            ring: self.ring.clone(),
            value: self.ring.sub(&self.value, &other.value),
        })
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.check_same_ring(other)?;
        Ok(Element {
            ring: self.ring.clone(),
            value: self.ring.mul(&self.value, &other.value),
        })
    }
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.value == other.value
    }
}
impl Eq for Element {}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// ---- integer helpers ----

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// gcd(x, m) folded into [1, m]; gcd(0, m) = m.
fn gcd_mod(x: u64, m: u64) -> u64 {
    if x == 0 {
        m
    } else {
        gcd(x, m)
    }
}

pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) + u128::from(b)) % u128::from(m)) as u64
}

pub(crate) fn neg_mod(a: u64, m: u64) -> u64 {
    if a == 0 {
        0
    } else {
        m - a
    }
}

pub(crate) fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    add_mod(a, neg_mod(b % m, m), m)
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

/// Inverse of `a` modulo `m` (requires gcd(a, m) = 1).
pub(crate) fn inv_mod(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut r0, mut r1) = (i128::from(m), i128::from(a % m));
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1, "inv_mod of a non-unit");
    s0.rem_euclid(i128::from(m)) as u64
}

fn gauss_mul(xa: u64, xb: u64, ya: u64, yb: u64, p: u64) -> Value {
    // (xa + xb i)(ya + yb i) = (xa ya - xb yb) + (xa yb + xb ya) i
    let re = sub_mod(mul_mod(xa, ya, p), mul_mod(xb, yb, p), p);
    let im = add_mod(mul_mod(xa, yb, p), mul_mod(xb, ya, p), p);
    Value::Gauss(re, im)
}

/// CRT split of `a + bi` in `Z_p[i]`, `p = 1 mod 4`: `(a + bs, a - bs) mod p`.
fn split_fwd(v: &Value, p: u64, s: u64) -> (u64, u64) {
    match v {
        Value::Gauss(a, b) => {
            let bs = mul_mod(*b, s, p);
            (add_mod(*a, bs, p), sub_mod(*a, bs, p))
        }
        _ => panic!("expected a Gaussian value"),
    }
}

fn split_back(u: u64, v: u64, p: u64, s: u64) -> Value {
    let inv2 = inv_mod(2, p);
    let a = mul_mod(add_mod(u, v, p), inv2, p);
    let b = mul_mod(sub_mod(u, v, p), inv_mod(mul_mod(2, s, p), p), p);
    Value::Gauss(a, b)
}

/// stab2 over the field `Z_p` on raw residues.
fn field_stab2(a: u64, b: u64, p: u64) -> (u64, u64, u64, u64, u64) {
    if b == 0 {
        (1, 0, 0, 1, a)
    } else if a == 0 {
        (0, 1, p - 1, 0, b)
    } else {
        // g = a; z = -b/a; t = 1
        (1, 0, neg_mod(mul_mod(b, inv_mod(a, p), p), p), 1, a)
    }
}

pub(crate) fn pow_u64(base: u64, exp: u32) -> u64 {
    base.pow(exp)
}

pub(crate) fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            let mut e = 0;
            while m % d == 0 {
                m /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// Number of prime factors counted with multiplicity.
pub(crate) fn big_omega(m: u64) -> u64 {
    factorize(m).iter().map(|&(_, e)| u64::from(e)).sum()
}

pub(crate) fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == vec![(n, 1)]
}

/// CRT for pairwise coprime moduli.
fn crt(rems: &[u64], mods: &[u64]) -> u64 {
    let m: u64 = mods.iter().product();
    let mut acc: u128 = 0;
    for (&r, &mi) in rems.iter().zip(mods) {
        let big = m / mi;
        let inv = inv_mod(big % mi, mi);
        acc = (acc + u128::from(r) * u128::from(big) * u128::from(inv)) % u128::from(m);
    }
    acc as u64
}
