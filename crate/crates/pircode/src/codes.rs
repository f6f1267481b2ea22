//! Submodule codes: minimum distance, minimum-distance decoding, the
//! partial-spread / tensor / product / stacked constructions, and the
//! cardinality bounds.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{multiplication_matrices, ChainField};
use crate::matrix::{rref, Matrix};
use crate::ring::{is_prime, Ring, RingSpec, Value};
use crate::submodule::{
    count_submodules_within, enumerate_submodules, Ambient, SubModule, DEFAULT_ENUM_CAP,
};

/// A constant-length submodule code: at least two words over a shared
/// ambient, all of the same length. Words are kept sorted and deduplicated;
/// the minimum distance is brute-forced once at construction.
#[derive(Debug, Clone)]
pub struct Code {
    ambient: Arc<Ambient>,
    words: Vec<SubModule>,
    length: u64,
    min_distance: u64,
}

impl Code {
    pub fn new(ambient: Arc<Ambient>, words: Vec<SubModule>) -> Result<Code> {
        let mut ws: Vec<SubModule> = words;
        for w in &ws {
            if w.ambient() != &ambient {
                return Err(Error::ShapeMismatch(
                    "codeword ambient differs from the code ambient".into(),
                ));
            }
        }
        ws.sort();
        ws.dedup();
        if ws.len() < 2 {
            return Err(Error::SingletonCode);
        }
        let length = ws[0].length();
        if ws.iter().any(|w| w.length() != length) {
            return Err(Error::InvalidParameter(
                "codewords must all have the same length".into(),
            ));
        }
        let mut min_distance = u64::MAX;
        for i in 0..ws.len() {
            for j in i + 1..ws.len() {
                min_distance = min_distance.min(ws[i].distance(&ws[j])?);
            }
        }
        Ok(Code {
            ambient,
            words: ws,
            length,
            min_distance,
        })
    }

    pub fn ambient(&self) -> &Arc<Ambient> {
        &self.ambient
    }

    pub fn words(&self) -> &[SubModule] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Common codeword length.
    pub fn constant_length(&self) -> u64 {
        self.length
    }

    pub fn min_distance(&self) -> u64 {
        self.min_distance
    }

    pub fn contains(&self, m: &SubModule) -> bool {
        self.words.binary_search(m).is_ok()
    }

    /// Unique decoding radius `floor((d - 1) / 2)`.
    pub fn radius(&self) -> u64 {
        (self.min_distance - 1) / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    Decoded,
    Ambiguous,
    NoCodeword,
}

#[derive(Debug, Clone)]
pub struct DecodeResult {
    pub status: DecodeStatus,
    /// The unique nearest codeword, when one exists.
    pub word: Option<SubModule>,
    /// Distance to the nearest codeword.
    pub distance: u64,
    /// Distance to the second-nearest codeword.
    pub second_distance: Option<u64>,
    /// Within the guaranteed correction radius of the code.
    pub certified: bool,
}

/// Exhaustive minimum-distance decoding. Ties yield `Ambiguous` with no
/// word rather than an arbitrary pick.
pub fn decode_min_distance(code: &Code, received: &SubModule) -> Result<DecodeResult> {
    if received.ambient() != code.ambient() {
        return Err(Error::ShapeMismatch(
            "received module lives in a different ambient".into(),
        ));
    }
    let mut dists = Vec::with_capacity(code.len());
    for w in code.words() {
        dists.push(received.distance(w)?);
    }
    let best = *dists.iter().min().expect("codes are nonempty");
    let hits: Vec<usize> = (0..dists.len()).filter(|&i| dists[i] == best).collect();
    let second = dists.iter().filter(|&&d| d > best).min().copied();
    let unique = hits.len() == 1;
    Ok(DecodeResult {
        status: if unique {
            DecodeStatus::Decoded
        } else {
            DecodeStatus::Ambiguous
        },
        word: unique.then(|| code.words()[hits[0]].clone()),
        distance: best,
        second_distance: if unique {
            second
        } else {
            Some(best)
        },
        certified: unique && best <= code.radius(),
    })
}

/// A set of matrices over a chain ring in which the difference of any two
/// distinct members spans a free module of rank `h`.
#[derive(Debug, Clone)]
pub struct DifferenceSet {
    pub ring: Arc<Ring>,
    pub h: usize,
    pub rho: usize,
    pub q: u64,
    pub matrices: Vec<Matrix>,
}

/// Builds `q^(h+rho)` matrices of size `h x (h+rho)`: the multiplication
/// matrices of the degree-(h+rho) extension of the residue field, lifted
/// entrywise through a fixed section, with the first `rho` rows deleted.
/// The defining property is verified exhaustively for small sets.
pub fn difference_set(ring: &Arc<Ring>, h: usize, rho: usize) -> Result<DifferenceSet> {
    if h < 1 {
        return Err(Error::InvalidParameter("h must be positive".into()));
    }
    if rho >= h {
        return Err(Error::InvalidParameter("rho must be less than h".into()));
    }
    let fld = ChainField::new(ring.clone())?;
    let d = h + rho;
    let raw = multiplication_matrices(&fld, d);
    let mut matrices = Vec::with_capacity(raw.len());
    for m in &raw {
        let rows: Vec<Vec<Value>> = m[rho..]
            .iter()
            .map(|row| row.iter().map(|&c| fld.lift(c)).collect())
            .collect();
        matrices.push(Matrix::from_rows(ring.clone(), d, rows)?);
    }
    let out = DifferenceSet {
        ring: ring.clone(),
        h,
        rho,
        q: fld.order(),
        matrices,
    };
    if out.matrices.len() <= 32 {
        out.verify()?;
    }
    Ok(out)
}

impl DifferenceSet {
    /// Exhaustively check that distinct members differ by a free rank-h
    /// module.
    pub fn verify(&self) -> Result<()> {
        let want = self.h as u64 * self.ring.length();
        for (i, a) in self.matrices.iter().enumerate() {
            for b in self.matrices.iter().skip(i + 1) {
                let diff = matrix_sub(a, b);
                if rref(&diff).length() != want {
                    return Err(Error::InvalidParameter(
                        "difference set member pair is not full length".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn matrix_sub(a: &Matrix, b: &Matrix) -> Matrix {
    let ring = a.ring();
    let rows: Vec<Vec<Value>> = (0..a.rows())
        .map(|i| {
            a.row(i)
                .iter()
                .zip(b.row(i))
                .map(|(x, y)| ring.sub(x, y))
                .collect()
        })
        .collect();
    Matrix::from_rows(ring.clone(), a.cols(), rows).expect("same shape")
}

fn cartesian_indices(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for &s in sizes {
        let mut next = Vec::with_capacity(out.len() * s);
        for prefix in &out {
            for i in 0..s {
                let mut p = prefix.clone();
                p.push(i);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Partial-spread code over a chain ring: identity blocks followed by
/// difference-set tails, the terminal word `[0 | I]`, and the last row of
/// every word scaled by `pi^r` where `k = h lambda(R) - r`. Words have
/// constant length `k`, pairwise trivial intersections, and minimum
/// distance `2k`.
pub fn construct_spread(ring: &Arc<Ring>, n: usize, k: u64) -> Result<Code> {
    let lam_r = ring.length();
    ring.chain_component()
        .ok_or_else(|| Error::NotChainRing(ring.to_string()))?;
    if k < 1 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let h = (k.div_ceil(lam_r)) as usize;
    let r = (h as u64) * lam_r - k;
    if n < 2 * h {
        return Err(Error::InvalidParameter(format!(
            "need n >= 2h, got n = {n} and h = {h}"
        )));
    }
    let nu = n / h;
    let rho = n % h;
    let tails = difference_set(ring, h, 0)?;
    let tails_wide = difference_set(ring, h, rho)?;
    let pi = ring.uniformizer()?;
    let zeta = ring.pow(&pi, r as u32);
    let one = ring.one();

    let mut mats: Vec<Matrix> = Vec::new();
    for i in 1..nu {
        let tail = nu - 1 - i;
        let mut sizes = vec![tails.matrices.len(); tail];
        sizes.push(tails_wide.matrices.len());
        for combo in cartesian_indices(&sizes) {
            let mut m = Matrix::zero(ring.clone(), h, n);
            for rr in 0..h {
                m.set(rr, (i - 1) * h + rr, one.clone());
            }
            for (j, &ci) in combo[..tail].iter().enumerate() {
                let block = &tails.matrices[ci];
                for rr in 0..h {
                    for cc in 0..h {
                        m.set(rr, i * h + j * h + cc, block.entry(rr, cc).clone());
                    }
                }
            }
            let block = &tails_wide.matrices[combo[tail]];
            for rr in 0..h {
                for cc in 0..h + rho {
                    m.set(rr, i * h + tail * h + cc, block.entry(rr, cc).clone());
                }
            }
            mats.push(m);
        }
    }
    let mut terminal = Matrix::zero(ring.clone(), h, n);
    for rr in 0..h {
        terminal.set(rr, n - h + rr, one.clone());
    }
    mats.push(terminal);

    let ambient = Ambient::free(ring.clone(), n);
    let mut words = Vec::with_capacity(mats.len());
    for mut m in mats {
        if r > 0 {
            for cc in 0..n {
                let v = ring.mul(&zeta, m.entry(h - 1, cc));
                m.set(h - 1, cc, v);
            }
        }
        words.push(SubModule::from_generators(ambient.clone(), &m)?);
    }
    Code::new(ambient, words)
}

/// Expected cardinality of the spread construction over residue order `q`:
/// `q^(h+rho) (q^(h (nu-1)) - 1)/(q^h - 1) + 1` with `n = nu h + rho`.
pub fn spread_cardinality(q: u64, n: u64, h: u64) -> u128 {
    let rho = n % h;
    let nu = n / h;
    let a = u128::from(q).pow(h as u32);
    let ap = u128::from(q).pow((h + rho) as u32);
    ap * ((a.pow((nu - 1) as u32) - 1) / (a - 1)) + 1
}

/// The chain-ring cardinality bound for maximum-distance codes over the
/// free ambient: `(q^(n-h+1) - 1)/(q - 1)` with `k = h e - r`.
pub fn chain_bound_formula(q: u64, n: u64, h: u64) -> u128 {
    (u128::from(q).pow((n - h + 1) as u32) - 1) / (u128::from(q) - 1)
}

fn embed_scalar(target: &Arc<Ring>, p: u64, c: u64) -> Result<Value> {
    match target.spec() {
        RingSpec::Residue(m) => {
            if *m == p {
                Ok(Value::Int(c))
            } else {
                Err(Error::UnsupportedEmbedding(format!(
                    "Z{p} does not embed in Z{m} with a shared identity"
                )))
            }
        }
        RingSpec::Gaussian(q) => {
            if *q == p {
                Ok(Value::Gauss(c, 0))
            } else {
                Err(Error::UnsupportedEmbedding(format!(
                    "Z{p} does not embed in Zi{q}"
                )))
            }
        }
        RingSpec::Product(_) => {
            let parts = target
                .factor_rings()
                .iter()
                .map(|f| embed_scalar(f, p, c))
                .collect::<Result<Vec<_>>>()?;
            Ok(Value::Tuple(parts))
        }
    }
}

/// Lift a subspace code over the prime field `Z_p` to a submodule code over
/// a ring containing `Z_p` (diagonally for products, as the real axis for
/// `Z_p[i]`). Cardinality is preserved; length and minimum distance scale
/// by the ring length.
pub fn construct_tensor(code: &Code, target: &Arc<Ring>) -> Result<Code> {
    let src = code.ambient().ring();
    let p = match src.spec() {
        RingSpec::Residue(m) if is_prime(*m) => *m,
        _ => {
            return Err(Error::UnsupportedEmbedding(
                "tensor lift needs a code over a prime field".into(),
            ))
        }
    };
    if !code.ambient().is_free() {
        return Err(Error::UnsupportedEmbedding(
            "tensor lift needs the free ambient".into(),
        ));
    }
    embed_scalar(target, p, 1)?;
    let n = code.ambient().n();
    let ambient = Ambient::free(target.clone(), n);
    let mut words = Vec::with_capacity(code.len());
    for w in code.words() {
        let rows: Vec<Vec<Value>> = (0..w.basis().rows())
            .map(|i| {
                w.basis()
                    .matrix()
                    .row(i)
                    .iter()
                    .map(|v| match v {
                        Value::Int(c) => embed_scalar(target, p, *c),
                        _ => unreachable!("prime-field values are integers"),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let m = Matrix::from_rows(target.clone(), n, rows)?;
        words.push(SubModule::from_generators(ambient.clone(), &m)?);
    }
    Code::new(ambient, words)
}

/// The submodule of the product ring generated by the given factor modules:
/// entries carry each factor's rows in its own slot and zero elsewhere.
fn product_module(
    ambient: &Arc<Ambient>,
    factors: &[Arc<Ring>],
    parts: &[&SubModule],
) -> Result<SubModule> {
    let ring = ambient.ring();
    let n = ambient.n();
    let mut rows: Vec<Vec<Value>> = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        for rr in 0..part.basis().rows() {
            let row: Vec<Value> = part
                .basis()
                .matrix()
                .row(rr)
                .iter()
                .map(|v| {
                    let slot_parts: Vec<Value> = factors
                        .iter()
                        .enumerate()
                        .map(|(j, fj)| if j == i { v.clone() } else { fj.zero() })
                        .collect();
                    ring.assemble_factors(&slot_parts)
                })
                .collect();
            rows.push(row);
        }
    }
    let m = Matrix::from_rows(ring.clone(), n, rows)?;
    SubModule::from_generators(ambient.clone(), &m)
}

fn product_ring_of(codes: &[Code]) -> Result<(Arc<Ring>, usize)> {
    if codes.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    let n = codes[0].ambient().n();
    for c in codes {
        if c.ambient().n() != n {
            return Err(Error::ShapeMismatch(
                "component codes must share the ambient dimension".into(),
            ));
        }
        if !c.ambient().is_free() {
            return Err(Error::InvalidParameter(
                "product constructions need free ambients".into(),
            ));
        }
    }
    if codes.len() == 1 {
        return Ok((codes[0].ambient().ring().clone(), n));
    }
    let spec = RingSpec::Product(
        codes
            .iter()
            .map(|c| c.ambient().ring().spec().clone())
            .collect(),
    );
    Ok((Ring::new(spec)?, n))
}

/// Cartesian product of codes over the product ring: every combination of
/// component words. Cardinality multiplies; the minimum distance is the
/// least component distance.
pub fn construct_product(codes: &[Code]) -> Result<Code> {
    let (ring, n) = product_ring_of(codes)?;
    if codes.len() == 1 {
        return Ok(codes[0].clone());
    }
    let factors = ring.factor_rings();
    let ambient = Ambient::free(ring.clone(), n);
    let sizes: Vec<usize> = codes.iter().map(|c| c.len()).collect();
    let mut words = Vec::new();
    for combo in cartesian_indices(&sizes) {
        let parts: Vec<&SubModule> = combo
            .iter()
            .enumerate()
            .map(|(i, &w)| &codes[i].words()[w])
            .collect();
        words.push(product_module(&ambient, &factors, &parts)?);
    }
    Code::new(ambient, words)
}

/// Diagonal (stacked) combination: the j-th word is the product of the
/// j-th words of each component, using the first `c = min |C_i|` words in
/// canonical order. Minimum distance is at least the sum of the component
/// distances.
pub fn construct_stacked(codes: &[Code]) -> Result<Code> {
    let (ring, n) = product_ring_of(codes)?;
    if codes.len() == 1 {
        return Ok(codes[0].clone());
    }
    let factors = ring.factor_rings();
    let ambient = Ambient::free(ring.clone(), n);
    let c = codes.iter().map(|cd| cd.len()).min().expect("nonempty");
    let mut words = Vec::with_capacity(c);
    for j in 0..c {
        let parts: Vec<&SubModule> = codes.iter().map(|cd| &cd.words()[j]).collect();
        words.push(product_module(&ambient, &factors, &parts)?);
    }
    Code::new(ambient, words)
}

/// Result of factor-wise decoding over a product ring.
#[derive(Debug, Clone)]
pub struct ProductDecodeResult {
    /// One decode per top-level ring factor, against the projected words.
    pub components: Vec<DecodeResult>,
    /// Reassembled module when every component decoded uniquely.
    pub assembled: Option<SubModule>,
    pub status: DecodeStatus,
}

/// Decode by projecting onto each ring factor, decoding there, and
/// reassembling the product. On product codes with a certified received
/// module this agrees with global minimum-distance decoding; a failed or
/// ambiguous component is reported rather than silently guessed.
pub fn decode_product(code: &Code, received: &SubModule) -> Result<ProductDecodeResult> {
    if received.ambient() != code.ambient() {
        return Err(Error::ShapeMismatch(
            "received module lives in a different ambient".into(),
        ));
    }
    let ring = code.ambient().ring().clone();
    let factors = ring.factor_rings();
    let m = factors.len();
    let mut components = Vec::with_capacity(m);
    let mut chosen: Vec<Option<SubModule>> = Vec::with_capacity(m);
    for i in 0..m {
        let words: BTreeSet<SubModule> =
            code.words().iter().map(|w| w.project_factor(i)).collect();
        let words: Vec<SubModule> = words.into_iter().collect();
        let recv = received.project_factor(i);
        let mut dists = Vec::with_capacity(words.len());
        for w in &words {
            dists.push(recv.distance(w)?);
        }
        let best = *dists.iter().min().expect("projections are nonempty");
        let hits: Vec<usize> = (0..dists.len()).filter(|&j| dists[j] == best).collect();
        let second = dists.iter().filter(|&&d| d > best).min().copied();
        let unique = hits.len() == 1;
        let mut comp_min = u64::MAX;
        for a in 0..words.len() {
            for b in a + 1..words.len() {
                comp_min = comp_min.min(words[a].distance(&words[b])?);
            }
        }
        let certified = unique && (words.len() == 1 || best <= (comp_min - 1) / 2);
        components.push(DecodeResult {
            status: if unique {
                DecodeStatus::Decoded
            } else {
                DecodeStatus::Ambiguous
            },
            word: unique.then(|| words[hits[0]].clone()),
            distance: best,
            second_distance: if unique { second } else { Some(best) },
            certified,
        });
        chosen.push(unique.then(|| words[hits[0]].clone()));
    }
    if chosen.iter().any(|c| c.is_none()) {
        return Ok(ProductDecodeResult {
            components,
            assembled: None,
            status: DecodeStatus::Ambiguous,
        });
    }
    let parts: Vec<&SubModule> = chosen.iter().map(|c| c.as_ref().expect("checked")).collect();
    let assembled = product_module(code.ambient(), &factors, &parts)?;
    let status = if code.contains(&assembled) {
        DecodeStatus::Decoded
    } else {
        DecodeStatus::NoCodeword
    };
    Ok(ProductDecodeResult {
        components,
        assembled: Some(assembled),
        status,
    })
}

// ---- bounds ----

/// Gaussian binomial coefficient `[n k]_q`.
pub fn gaussian_binomial(n: u64, k: u64, q: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc *= u128::from(q).pow((n - k + i) as u32) - 1;
        acc /= u128::from(q).pow(i as u32) - 1;
    }
    acc
}

fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 0 {
        return if total == 0 {
            vec![Vec::new()]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Number of submodules of length `len` of a module over a product of
/// fields of order `q`, whose component dimensions are `dims`.
pub fn count_submodules_product_of_fields(q: u64, dims: &[u64], len: u64) -> u128 {
    compositions(len, dims.len())
        .iter()
        .map(|ls| {
            dims.iter()
                .zip(ls)
                .map(|(&u, &l)| gaussian_binomial(u, l, q))
                .product::<u128>()
        })
        .sum()
}

/// Minimum of the counting formula over all dimension profiles summing to
/// `total` across `parts` components.
pub fn composition_min_count(q: u64, parts: usize, total: u64, len: u64) -> u128 {
    compositions(total, parts)
        .iter()
        .map(|u| count_submodules_product_of_fields(q, u, len))
        .min()
        .expect("at least one composition")
}

/// Singleton-type bound: the least number of length-(k-delta+1) submodules
/// over all submodules of the ambient of length `lambda(Omega) - delta + 1`.
/// Free ambients over a single field use the Gaussian-binomial closed form;
/// everything else enumerates.
pub fn bound_singleton(ambient: &Arc<Ambient>, k: u64, delta: u64, cap: u128) -> Result<u64> {
    let lam = ambient.length();
    validate_bound_params(lam, k, delta)?;
    let m_len = lam - delta + 1;
    let s = k - delta + 1;
    if ambient.is_free() {
        if let Some(comp) = ambient.ring().chain_component() {
            if comp.e() == 1 {
                return Ok(gaussian_binomial(m_len, s, comp.q()) as u64);
            }
        }
    }
    let mods = enumerate_submodules(ambient, m_len, cap)?;
    let mut best = u64::MAX;
    for m in &mods {
        best = best.min(count_submodules_within(m, s, cap)?);
    }
    Ok(best)
}

/// Packing-type bound: total length-(k-delta+1) submodules of the ambient,
/// divided by the least count inside any length-k submodule.
pub fn bound_sphere(ambient: &Arc<Ambient>, k: u64, delta: u64, cap: u128) -> Result<u64> {
    let lam = ambient.length();
    validate_bound_params(lam, k, delta)?;
    let s = k - delta + 1;
    if ambient.is_free() {
        if let Some(comp) = ambient.ring().chain_component() {
            if comp.e() == 1 {
                let q = comp.q();
                return Ok(
                    (gaussian_binomial(lam, s, q) / gaussian_binomial(k, s, q)) as u64,
                );
            }
        }
    }
    let numerator = enumerate_submodules(ambient, s, cap)?.len() as u64;
    let ks = enumerate_submodules(ambient, k, cap)?;
    let mut denominator = u64::MAX;
    for m in &ks {
        denominator = denominator.min(count_submodules_within(m, s, cap)?);
    }
    if denominator == 0 || denominator == u64::MAX {
        return Err(Error::InvalidParameter(
            "no submodule of the codeword length exists".into(),
        ));
    }
    Ok(numerator / denominator)
}

fn validate_bound_params(lam: u64, k: u64, delta: u64) -> Result<()> {
    if !(1 <= delta && delta <= k && k <= lam.saturating_sub(1)) {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= delta <= k <= lambda(Omega) - 1, got k = {k}, delta = {delta}, lambda = {lam}"
        )));
    }
    Ok(())
}

/// The maximum-distance cardinality bound over a chain ring for the ambient
/// `R x (pi^a_2) x ... x (pi^a_n)`: `(q^m - 1)/(q - 1)` where `m` is the
/// least index such that `(n - m) e - a_(m+1) - ... - a_n <= k - 1`.
pub fn bound_chain_ring(ring: &Arc<Ring>, n: usize, exponents: &[u32], k: u64) -> Result<u64> {
    let comp = ring
        .chain_component()
        .ok_or_else(|| Error::NotChainRing(ring.to_string()))?;
    let q = comp.q();
    let e = u64::from(comp.e());
    if exponents.len() + 1 != n {
        return Err(Error::InvalidParameter(format!(
            "expected {} ambient exponents a_2..a_n",
            n - 1
        )));
    }
    if exponents.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "ambient exponents must be nondecreasing".into(),
        ));
    }
    if exponents.iter().any(|&a| u64::from(a) >= e) {
        return Err(Error::InvalidParameter(
            "ambient exponents must be below the chain length".into(),
        ));
    }
    if k < 1 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let suffix = |i: usize| -> u64 {
        // sum of a_(i+1)..a_n, with the exponent list holding a_2..a_n
        exponents[i.saturating_sub(1)..].iter().map(|&a| u64::from(a)).sum()
    };
    let m = (1..=n)
        .find(|&i| ((n - i) as u64) * e - suffix(i) <= k - 1)
        .expect("i = n always satisfies the condition");
    let val = (u128::from(q).pow(m as u32) - 1) / (u128::from(q) - 1);
    Ok(val as u64)
}

/// The four explicit bounds for rings isomorphic to `Z_p^m` with the free
/// ambient `R^n`, plus the tightest applicable value.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ZpmBounds {
    /// Singleton-type bound through dimension-profile minimization.
    pub singleton: u128,
    /// Packing-type bound through the same counting formula.
    pub sphere: u128,
    /// Balanced-profile bound, applicable when delta = k.
    pub balanced: Option<u128>,
    /// Refinement for two factors and odd k, applicable when delta = k.
    pub odd_two_factor: Option<u128>,
    pub tightest: u128,
}

pub fn bound_zpm(p: u64, m: usize, n: u64, k: u64, delta: u64) -> Result<ZpmBounds> {
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    if m < 1 {
        return Err(Error::InvalidParameter("need at least one factor".into()));
    }
    let lam = (m as u64) * n;
    validate_bound_params(lam, k, delta)?;
    let s = k - delta + 1;
    let singleton = composition_min_count(p, m, lam - delta + 1, s);
    let numerator = count_submodules_product_of_fields(p, &vec![n; m], s);
    let denominator = composition_min_count(p, m, k, s);
    let sphere = numerator / denominator;
    let balanced = (delta == k).then(|| {
        let num = (u128::from(p).pow(n as u32) - 1) / (u128::from(p) - 1);
        let den = if k % (m as u64) == 0 {
            (u128::from(p).pow((k / m as u64) as u32) - 1) / (u128::from(p) - 1)
        } else {
            // ceil((p^(k/m) - 1)/(p - 1)) with p^(k/m) irrational
            let w = floor_nth_root(u128::from(p).pow(k as u32), m as u32);
            (w - 1) / (u128::from(p) - 1) + 1
        };
        num / den
    });
    let odd_two_factor = (delta == k && m == 2 && k % 2 == 1).then(|| {
        let h = k.div_ceil(2);
        let num = 2 * (u128::from(p).pow(n as u32) - 1);
        let den = u128::from(p).pow(h as u32) + u128::from(p).pow((h - 1) as u32) - 2;
        num / den
    });
    let tightest = [Some(singleton), Some(sphere), balanced, odd_two_factor]
        .into_iter()
        .flatten()
        .min()
        .expect("singleton is always present");
    Ok(ZpmBounds {
        singleton,
        sphere,
        balanced,
        odd_two_factor,
        tightest,
    })
}

fn floor_nth_root(x: u128, n: u32) -> u128 {
    let mut lo = 0u128;
    let mut hi = 1u128 << (128 / n.max(1) + 1).min(127);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        match mid.checked_pow(n) {
            Some(v) if v <= x => lo = mid,
            _ => hi = mid - 1,
        }
    }
    lo
}

/// Default enumeration cap re-exported for bound computations.
pub const DEFAULT_BOUND_CAP: u128 = DEFAULT_ENUM_CAP;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submodule::DEFAULT_ORACLE_CAP;
    use crate::textio::{parse_code_str, parse_ring_spec, parse_submodule_str};

    fn ring(spec: &str) -> Arc<Ring> {
        parse_ring_spec(spec).unwrap()
    }

    #[test]
    fn difference_set_binary_trivial() {
        let d = difference_set(&ring("Z2"), 1, 0).unwrap();
        assert_eq!(d.matrices.len(), 2);
        assert_eq!(d.matrices[0].entry(0, 0), &Value::Int(0));
        assert_eq!(d.matrices[1].entry(0, 0), &Value::Int(1));
    }

    #[test]
    fn difference_set_z4() {
        let d = difference_set(&ring("Z4"), 2, 0).unwrap();
        assert_eq!(d.matrices.len(), 4);
        d.verify().unwrap();
    }

    #[test]
    fn difference_set_z9() {
        let d = difference_set(&ring("Z9"), 2, 0).unwrap();
        assert_eq!(d.matrices.len(), 9);
        d.verify().unwrap();
        assert!(difference_set(&ring("Z6"), 2, 0).is_err());
    }

    #[test]
    fn spread_z4_full_length() {
        let c = construct_spread(&ring("Z4"), 4, 4).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.constant_length(), 4);
        assert_eq!(c.min_distance(), 8);
        assert_eq!(c.len() as u128, spread_cardinality(2, 4, 2));
        for (i, a) in c.words().iter().enumerate() {
            for b in c.words().iter().skip(i + 1) {
                assert_eq!(a.intersection_length(b).unwrap(), 0);
            }
        }
        assert!(c.len() as u64 <= bound_chain_ring(&ring("Z4"), 4, &[0, 0, 0], 4).unwrap());
    }

    #[test]
    fn spread_z4_with_zeta() {
        let c = construct_spread(&ring("Z4"), 4, 3).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.constant_length(), 3);
        assert_eq!(c.min_distance(), 6);
    }

    #[test]
    fn spread_with_ragged_tail_block() {
        // n not a multiple of h: the wide difference set fills the tail
        let c = construct_spread(&ring("Z4"), 5, 4).unwrap();
        assert_eq!(c.len(), 9);
        assert_eq!(c.len() as u128, spread_cardinality(2, 5, 2));
        assert_eq!(c.min_distance(), 8);
        for (i, a) in c.words().iter().enumerate() {
            for b in c.words().iter().skip(i + 1) {
                assert_eq!(a.intersection_length(b).unwrap(), 0);
            }
        }
    }

    #[test]
    fn spread_classical_binary_planes() {
        let c = construct_spread(&ring("Z2"), 4, 2).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.min_distance(), 4);
        assert!(construct_spread(&ring("Z4"), 3, 4).is_err());
        assert!(construct_spread(&ring("Z6"), 4, 2).is_err());
    }

    #[test]
    fn decode_roundtrip_on_codewords() {
        let c = construct_spread(&ring("Z4"), 4, 4).unwrap();
        for w in c.words() {
            let r = decode_min_distance(&c, w).unwrap();
            assert_eq!(r.status, DecodeStatus::Decoded);
            assert_eq!(r.distance, 0);
            assert!(r.certified);
            assert_eq!(r.word.as_ref(), Some(w));
        }
    }

    #[test]
    fn tensor_lift_of_the_two_word_code() {
        let c = parse_code_str(
            "ring: Z5\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 2 1\n0 1 1 0\n",
        )
        .unwrap();
        assert_eq!(c.min_distance(), 4);
        let lifted = construct_tensor(&c, &ring("Zi5")).unwrap();
        assert_eq!(lifted.len(), 2);
        assert_eq!(lifted.constant_length(), 4);
        assert_eq!(lifted.min_distance(), 8);
    }

    #[test]
    fn tensor_rejects_bad_embeddings() {
        let c = parse_code_str("ring: Z2\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 1 1\n0 1 1 0\n")
            .unwrap();
        assert!(matches!(
            construct_tensor(&c, &ring("Z4")),
            Err(Error::UnsupportedEmbedding(_))
        ));
        // into the product Z2 x Z2: cardinality preserved, distance doubled
        let lifted = construct_tensor(&c, &ring("product(Z2,Z2)")).unwrap();
        assert_eq!(lifted.len(), c.len());
        assert_eq!(lifted.min_distance(), 2 * c.min_distance());
    }

    #[test]
    fn tensor_intersections_commute_with_the_lift() {
        let c = parse_code_str(
            "ring: Z5\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 2 1\n0 1 1 0\n",
        )
        .unwrap();
        let target = ring("Zi5");
        let lifted = construct_tensor(&c, &target).unwrap();
        let cap_src = c.words()[0]
            .intersection_oracle(&c.words()[1], DEFAULT_ORACLE_CAP)
            .unwrap();
        let cap_lift = lifted.words()[0]
            .intersection_oracle(&lifted.words()[1], DEFAULT_ORACLE_CAP)
            .unwrap();
        // the lift of the source intersection is the intersection of the lifts
        let rows: Vec<Vec<Value>> = (0..cap_src.basis().rows())
            .map(|i| {
                cap_src
                    .basis()
                    .matrix()
                    .row(i)
                    .iter()
                    .map(|v| match v {
                        Value::Int(c) => Value::Gauss(*c, 0),
                        _ => unreachable!(),
                    })
                    .collect()
            })
            .collect();
        let m = Matrix::from_rows(target.clone(), 4, rows).unwrap();
        let cap_src_lifted =
            SubModule::from_generators(lifted.ambient().clone(), &m).unwrap();
        assert_eq!(cap_lift, cap_src_lifted);
        assert_eq!(cap_lift.length(), target.length() * cap_src.length());
    }

    #[test]
    fn product_and_stacked_of_the_final_example() {
        let c1 = parse_code_str("ring: Z2\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 1 1\n0 1 1 0\n")
            .unwrap();
        let c2 = c1.clone();
        assert_eq!(c1.min_distance(), 4);

        let prod = construct_product(&[c1.clone(), c2.clone()]).unwrap();
        assert_eq!(prod.len(), 4);
        assert_eq!(prod.min_distance(), 4);
        assert_eq!(prod.constant_length(), 4);

        let stacked = construct_stacked(&[c1.clone(), c2]).unwrap();
        assert_eq!(stacked.len(), 2);
        assert_eq!(stacked.min_distance(), 8);
        assert_eq!(stacked.constant_length(), 4);

        // single-component constructions collapse to the input
        let same = construct_stacked(&[c1.clone()]).unwrap();
        assert_eq!(same.words(), c1.words());
    }

    #[test]
    fn stacked_over_mixed_chain_rings() {
        let c1 = construct_spread(&ring("Z2"), 4, 2).unwrap();
        let c2 = construct_spread(&ring("Z3"), 4, 2).unwrap();
        let stacked = construct_stacked(&[c1.clone(), c2.clone()]).unwrap();
        assert_eq!(stacked.len(), 5);
        assert!(stacked.min_distance() >= c1.min_distance() + c2.min_distance());
    }

    #[test]
    fn ambiguous_component_reported_on_the_stacked_code() {
        let c1 = parse_code_str("ring: Z2\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 1 1\n0 1 1 0\n")
            .unwrap();
        let stacked = construct_stacked(&[c1.clone(), c1]).unwrap();
        let n = parse_submodule_str(
            "ring: product(Z2,Z2)\ncols: 4\n(1,0) (0,0) (1,0) (0,0)\n(0,0) (1,1) (0,1) (1,1)\n",
        )
        .unwrap();
        let global = decode_min_distance(&stacked, &n).unwrap();
        assert_eq!(global.status, DecodeStatus::Decoded);
        assert_eq!(global.distance, 3);
        assert!(global.certified);

        let comp = decode_product(&stacked, &n).unwrap();
        assert_eq!(comp.status, DecodeStatus::Ambiguous);
        assert_eq!(comp.components[1].status, DecodeStatus::Ambiguous);
        assert_eq!(comp.components[1].distance, 3);
        // the first projection is exact
        assert_eq!(comp.components[0].status, DecodeStatus::Decoded);
        assert_eq!(comp.components[0].distance, 0);
    }

    #[test]
    fn product_decoding_agrees_on_codewords() {
        let c1 = parse_code_str("ring: Z2\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 1 1\n0 1 1 0\n")
            .unwrap();
        let prod = construct_product(&[c1.clone(), c1]).unwrap();
        for w in prod.words() {
            let r = decode_product(&prod, w).unwrap();
            assert_eq!(r.status, DecodeStatus::Decoded);
            assert_eq!(r.assembled.as_ref(), Some(w));
        }
    }

    #[test]
    fn product_decoding_agrees_on_every_decodable_module() {
        use crate::submodule::enumerate_submodules;
        let c1 = parse_code_str("ring: Z2\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 1 1\n0 1 1 0\n")
            .unwrap();
        let prod = construct_product(&[c1.clone(), c1.clone()]).unwrap();
        let prod_ring = prod.ambient().ring().clone();
        // every submodule of the product ambient is a pair of binary subspaces
        let z2_ambient = c1.ambient().clone();
        let mut subspaces = Vec::new();
        for len in 0..=4 {
            subspaces.extend(enumerate_submodules(&z2_ambient, len, 1 << 20).unwrap());
        }
        assert_eq!(subspaces.len(), 67);
        let mut decodable = 0u64;
        for v in &subspaces {
            for w in &subspaces {
                let mut rows: Vec<Vec<Value>> = Vec::new();
                for r in 0..v.basis().rows() {
                    rows.push(
                        v.basis()
                            .matrix()
                            .row(r)
                            .iter()
                            .map(|x| Value::Tuple(vec![x.clone(), Value::Int(0)]))
                            .collect(),
                    );
                }
                for r in 0..w.basis().rows() {
                    rows.push(
                        w.basis()
                            .matrix()
                            .row(r)
                            .iter()
                            .map(|x| Value::Tuple(vec![Value::Int(0), x.clone()]))
                            .collect(),
                    );
                }
                let m = Matrix::from_rows(prod_ring.clone(), 4, rows).unwrap();
                let received = SubModule::from_generators(prod.ambient().clone(), &m).unwrap();
                let global = decode_min_distance(&prod, &received).unwrap();
                if !global.certified {
                    continue;
                }
                decodable += 1;
                let split = decode_product(&prod, &received).unwrap();
                assert_eq!(split.status, DecodeStatus::Decoded);
                assert_eq!(split.assembled, global.word);
            }
        }
        assert!(decodable > 4, "the agreement sweep must cover real cases");
    }

    #[test]
    fn gaussian_binomials() {
        assert_eq!(gaussian_binomial(4, 2, 2), 35);
        assert_eq!(gaussian_binomial(2, 1, 3), 4);
        assert_eq!(gaussian_binomial(3, 1, 2), 7);
        assert_eq!(gaussian_binomial(5, 0, 7), 1);
        assert_eq!(gaussian_binomial(2, 3, 2), 0);
    }

    #[test]
    fn counting_formula_examples() {
        // component dimensions (2, 1) over p = 2: 3 + 1 = 4 length-one submodules
        assert_eq!(count_submodules_product_of_fields(2, &[2, 1], 1), 4);
        assert_eq!(count_submodules_product_of_fields(2, &[2, 2], 0), 1);
    }

    #[test]
    fn singleton_bound_on_fields_matches_enumeration() {
        let ambient = Ambient::free(ring("Z2"), 3);
        let closed = bound_singleton(&ambient, 2, 2, DEFAULT_BOUND_CAP).unwrap();
        assert_eq!(closed, 3);
        let sphere = bound_sphere(&ambient, 2, 2, DEFAULT_BOUND_CAP).unwrap();
        assert_eq!(sphere, 7 / 3);
    }

    #[test]
    fn singleton_bound_on_z4_matches_chain_formula() {
        let ambient = Ambient::free(ring("Z4"), 2);
        let enumerated = bound_singleton(&ambient, 2, 2, DEFAULT_BOUND_CAP).unwrap();
        let formula = bound_chain_ring(&ring("Z4"), 2, &[0], 2).unwrap();
        assert_eq!(enumerated, formula);
        assert_eq!(formula, 3);
    }

    #[test]
    fn chain_bound_examples() {
        assert_eq!(bound_chain_ring(&ring("Z4"), 4, &[0, 0, 0], 4).unwrap(), 7);
        assert_eq!(bound_chain_ring(&ring("Z4"), 4, &[0, 0, 0], 3).unwrap(), 7);
        // field specialization: (q^(n-k+1) - 1)/(q - 1)
        assert_eq!(bound_chain_ring(&ring("Z2"), 4, &[0, 0, 0], 2).unwrap(), 7);
        assert_eq!(
            chain_bound_formula(2, 4, 2),
            bound_chain_ring(&ring("Z4"), 4, &[0, 0, 0], 4).unwrap() as u128
        );
        assert!(bound_chain_ring(&ring("Z6"), 4, &[0, 0, 0], 2).is_err());
    }

    #[test]
    fn zpm_bound_examples() {
        let b = bound_zpm(2, 2, 4, 2, 2).unwrap();
        assert_eq!(b.balanced, Some(15));
        let b = bound_zpm(2, 2, 4, 3, 3).unwrap();
        assert_eq!(b.odd_two_factor, Some(7));
        assert!(b.tightest <= 7);
        // bb1 on (Z2)^2 with n = 2, k = delta = 2
        let b = bound_zpm(2, 2, 2, 2, 2).unwrap();
        assert_eq!(b.singleton, 4);
    }

    #[test]
    fn spread_respects_formula_and_bounds() {
        for (spec, q) in [("Z4", 2u64), ("Z2", 2), ("Z9", 3)] {
            let r = ring(spec);
            let lam = r.length();
            let k = 2 * lam; // h = 2, r = 0
            let c = construct_spread(&r, 4, k).unwrap();
            assert_eq!(c.len() as u128, spread_cardinality(q, 4, 2), "{spec}");
            assert!(c.len() as u128 <= chain_bound_formula(q, 4, 2), "{spec}");
        }
    }

    #[test]
    fn row_module_length_is_at_most_rows_times_ring_length() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
        for spec in ["Z4", "Z6", "Zi5", "product(Z2,Z3)"] {
            let r = ring(spec);
            for _ in 0..50 {
                use rand::Rng;
                let t = rng.gen_range(0..4);
                let s = rng.gen_range(1..5);
                let m = Matrix::random(r.clone(), t, s, &mut rng);
                assert!(
                    rref(&m).length() <= (t as u64) * r.length(),
                    "{spec}: {t}x{s}"
                );
            }
        }
    }

    #[test]
    fn constant_length_codes_have_even_min_distance() {
        let built = [
            construct_spread(&ring("Z4"), 4, 4).unwrap(),
            construct_spread(&ring("Z4"), 4, 3).unwrap(),
            construct_spread(&ring("Z2"), 4, 2).unwrap(),
        ];
        for c in &built {
            assert_eq!(c.min_distance() % 2, 0);
        }
    }

    #[test]
    fn constructed_codes_respect_applicable_bounds() {
        // binary partial spread meets the packing bound with equality
        let c = construct_spread(&ring("Z2"), 4, 2).unwrap();
        let singleton = bound_singleton(c.ambient(), 2, 2, DEFAULT_BOUND_CAP).unwrap();
        let sphere = bound_sphere(c.ambient(), 2, 2, DEFAULT_BOUND_CAP).unwrap();
        assert_eq!(singleton, 7);
        assert_eq!(sphere, 5);
        assert!(c.len() as u64 <= singleton);
        assert_eq!(c.len() as u64, sphere);

        // tensor code over Zi5 (two Z5 factors) against the balanced bound
        let base = parse_code_str(
            "ring: Z5\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 2 1\n0 1 1 0\n",
        )
        .unwrap();
        let lifted = construct_tensor(&base, &ring("Zi5")).unwrap();
        let b = bound_zpm(5, 2, 4, 4, lifted.min_distance() / 2).unwrap();
        assert!(lifted.len() as u128 <= b.tightest);

        // stacked and product codes over Z2 x Z2
        let c1 = parse_code_str("ring: Z2\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 1 1\n0 1 1 0\n")
            .unwrap();
        let stacked = construct_stacked(&[c1.clone(), c1.clone()]).unwrap();
        let b = bound_zpm(2, 2, 4, 4, stacked.min_distance() / 2).unwrap();
        assert!(stacked.len() as u128 <= b.tightest);
        let prod = construct_product(&[c1.clone(), c1]).unwrap();
        let b = bound_zpm(2, 2, 4, 4, prod.min_distance() / 2).unwrap();
        assert!(prod.len() as u128 <= b.tightest);
    }

    #[test]
    fn code_constructor_guards() {
        let c = construct_spread(&ring("Z4"), 4, 4).unwrap();
        let one_word = vec![c.words()[0].clone()];
        assert!(matches!(
            Code::new(c.ambient().clone(), one_word),
            Err(Error::SingletonCode)
        ));
        let mixed = vec![c.words()[0].clone(), SubModule::zero(c.ambient().clone())];
        assert!(Code::new(c.ambient().clone(), mixed).is_err());
    }
}
