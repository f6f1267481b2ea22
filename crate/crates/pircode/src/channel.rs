//! Monte-Carlo simulation of the end-to-end matrix channel `Y = A X + Z`,
//! the zero-padded error-trapping codebook, and the numerical comparison of
//! error-trapping with minimum-distance decoding.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::codes::{decode_min_distance, Code, DecodeStatus};
use crate::error::{Error, Result};
use crate::matrix::{random_invertible, rref, Matrix};
use crate::ring::{Ring, Value};
use crate::submodule::{Ambient, SubModule};

/// Channel dimensions and reproducibility knobs. The transmitted matrix `X`
/// is `t x n`, the transfer matrix `A` is `N x t`, the noise `Z` is `N x n`
/// with free row module of rank `v`.
#[derive(Debug, Clone)]
pub struct ChannelConfig {
    pub ring: Arc<Ring>,
    pub n: usize,
    pub t: usize,
    pub big_n: usize,
    pub v: usize,
    pub trials: u64,
    pub seed: u64,
}

/// Outcome of a single trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub word: usize,
    pub rho: u64,
    pub errors: u64,
    pub decoded: bool,
    pub correct: bool,
    pub certified: bool,
    pub nearest: u64,
    pub second_nearest: Option<u64>,
}

/// Aggregates over a run; records are kept only when requested.
#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub trials: u64,
    pub success_rate: f64,
    pub certified_success_rate: f64,
    pub mean_loss: f64,
    pub mean_error: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<TrialRecord>,
}

/// Per-trial generator derived from the master seed by a splittable counter.
pub fn rng_for(master: u64, index: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(split_mix(master ^ split_mix(index)))
}

fn split_mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// A left-invertible transfer matrix: `P [0; I_t]` for a random invertible
/// `P`, i.e. the last `t` columns of `P`.
pub fn sample_transfer<R: Rng + ?Sized>(
    ring: &Arc<Ring>,
    big_n: usize,
    t: usize,
    rng: &mut R,
) -> Result<Matrix> {
    if t > big_n {
        return Err(Error::InvalidParameter(format!(
            "transfer needs t <= N, got t = {t}, N = {big_n}"
        )));
    }
    let p = random_invertible(ring, big_n, rng);
    let mut pad = Matrix::zero(ring.clone(), big_n, t);
    let one = ring.one();
    for i in 0..t {
        pad.set(big_n - t + i, i, one.clone());
    }
    p.mul(&pad)
}

/// True iff the rows of `m` span a free module of rank `m.rows()`.
pub fn is_free_rows(m: &Matrix) -> bool {
    let e = rref(m);
    let ring = m.ring();
    e.rows() == m.rows() && (0..e.rows()).all(|i| ring.is_unit(e.pivot(i)))
}

/// A noise matrix with exactly `v` nonzero rows at random positions whose
/// row module is free of rank `v`.
pub fn sample_noise<R: Rng + ?Sized>(
    ring: &Arc<Ring>,
    big_n: usize,
    n: usize,
    v: usize,
    rng: &mut R,
) -> Result<Matrix> {
    if v > big_n.min(n) {
        return Err(Error::InvalidParameter(format!(
            "noise rank {v} exceeds min(N, n) = {}",
            big_n.min(n)
        )));
    }
    let core = free_random_matrix(ring, v, n, rng);
    let mut positions: Vec<usize> = (0..big_n).collect();
    for i in 0..v {
        let j = rng.gen_range(i..big_n);
        positions.swap(i, j);
    }
    let mut rows = positions[..v].to_vec();
    rows.sort_unstable();
    let mut z = Matrix::zero(ring.clone(), big_n, n);
    for (src, &dst) in rows.iter().enumerate() {
        for c in 0..n {
            z.set(dst, c, core.entry(src, c).clone());
        }
    }
    Ok(z)
}

/// Rejection-sample a `rows x cols` matrix with free row module, falling
/// back to an identity block when the ring makes rejection too slow.
fn free_random_matrix<R: Rng + ?Sized>(
    ring: &Arc<Ring>,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Matrix {
    if rows == 0 {
        return Matrix::zero(ring.clone(), 0, cols);
    }
    for _ in 0..1000 {
        let m = Matrix::random(ring.clone(), rows, cols, rng);
        if is_free_rows(&m) {
            return m;
        }
    }
    let mut m = Matrix::random(ring.clone(), rows, cols, rng);
    let one = ring.one();
    for i in 0..rows {
        for j in 0..rows.min(cols) {
            m.set(i, j, if i == j { one.clone() } else { ring.zero() });
        }
    }
    m
}

/// Run seeded channel trials against a code over the free ambient `R^n`.
/// Per trial: pick a word, pad its basis into the top rows of `X`, draw `A`
/// and `Z`, canonicalize `row(A X + Z)`, decode, record.
pub fn run_trials(cfg: &ChannelConfig, code: &Code, keep_records: bool) -> Result<SimReport> {
    if code.ambient().ring() != &cfg.ring || code.ambient().n() != cfg.n {
        return Err(Error::ShapeMismatch(
            "code ambient does not match the channel config".into(),
        ));
    }
    let max_rows = code
        .words()
        .iter()
        .map(|w| w.basis().rows())
        .max()
        .expect("nonempty code");
    if cfg.t < max_rows {
        return Err(Error::InvalidParameter(format!(
            "t = {} is below the largest basis row count {max_rows}",
            cfg.t
        )));
    }
    let ambient = code.ambient().clone();
    let mut records = Vec::new();
    let mut successes = 0u64;
    let mut certified_successes = 0u64;
    let mut loss_total = 0u64;
    let mut error_total = 0u64;
    for trial in 0..cfg.trials {
        let mut rng = rng_for(cfg.seed, trial);
        let widx = rng.gen_range(0..code.len());
        let word = &code.words()[widx];
        let mut x = Matrix::zero(cfg.ring.clone(), cfg.t, cfg.n);
        for i in 0..word.basis().rows() {
            for j in 0..cfg.n {
                x.set(i, j, word.basis().matrix().entry(i, j).clone());
            }
        }
        let a = sample_transfer(&cfg.ring, cfg.big_n, cfg.t, &mut rng)?;
        let z = sample_noise(&cfg.ring, cfg.big_n, cfg.n, cfg.v, &mut rng)?;
        let y = a.mul(&x)?.add(&z)?;
        let received = SubModule::from_generators(ambient.clone(), &y)?;
        let (rho, errors) = word.loss_and_error(&received)?;
        let outcome = decode_min_distance(code, &received)?;
        let correct =
            outcome.status == DecodeStatus::Decoded && outcome.word.as_ref() == Some(word);
        if correct {
            successes += 1;
            if outcome.certified {
                certified_successes += 1;
            }
        }
        loss_total += rho;
        error_total += errors;
        if keep_records {
            records.push(TrialRecord {
                trial,
                word: widx,
                rho,
                errors,
                decoded: outcome.status == DecodeStatus::Decoded,
                correct,
                certified: outcome.certified,
                nearest: outcome.distance,
                second_nearest: outcome.second_distance,
            });
        }
    }
    let t = cfg.trials.max(1) as f64;
    Ok(SimReport {
        trials: cfg.trials,
        success_rate: successes as f64 / t,
        certified_success_rate: certified_successes as f64 / t,
        mean_loss: loss_total as f64 / t,
        mean_error: error_total as f64 / t,
        records,
    })
}

/// The zero-padded codebook for error trapping and where the payload block
/// sits inside the transmitted matrix.
#[derive(Debug, Clone)]
pub struct TrappingCodebook {
    pub code: Code,
    /// Payload block dimensions.
    pub block_rows: usize,
    pub block_cols: usize,
    /// Offsets of the payload block inside the `t x n` transmitted matrix.
    pub row_offset: usize,
    pub col_offset: usize,
    /// The raw payload matrices, parallel to `code.words()`.
    pub blocks: Vec<Matrix>,
}

/// Enumerate the free-rank payload words for error trapping: all reduced
/// echelon matrices with unit pivots of the prescribed block size, embedded
/// at the bottom-right of the zero-padded transmitted shape. The block is
/// `(N-u) x (n-u)` when `t + v > N` and `t x (n-u)` otherwise.
pub fn error_trapping_codebook(
    ring: &Arc<Ring>,
    n: usize,
    big_n: usize,
    t: usize,
    u: usize,
    v: usize,
) -> Result<TrappingCodebook> {
    ring.chain_component()
        .ok_or_else(|| Error::NotChainRing(ring.to_string()))?;
    if n < 2 * big_n {
        return Err(Error::InvalidParameter(format!(
            "error trapping needs n >= 2N, got n = {n}, N = {big_n}"
        )));
    }
    if u < v {
        return Err(Error::InvalidParameter("need u >= v".into()));
    }
    if t > big_n {
        return Err(Error::InvalidParameter("need t <= N".into()));
    }
    let (block_rows, block_cols, row_offset) = if t + v > big_n {
        let rows = big_n
            .checked_sub(u)
            .filter(|&r| r >= 1 && r <= t)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "payload shape (N-u) x (n-u) is degenerate for N = {big_n}, u = {u}, t = {t}"
                ))
            })?;
        (rows, n - u, t - rows)
    } else {
        (t, n - u, 0)
    };
    let raw_blocks = unit_pivot_rref_matrices(ring, block_rows, block_cols)?;
    let ambient = Ambient::free(ring.clone(), n);
    let mut paired = Vec::with_capacity(raw_blocks.len());
    for b in raw_blocks {
        let mut x = Matrix::zero(ring.clone(), t, n);
        for i in 0..block_rows {
            for j in 0..block_cols {
                x.set(row_offset + i, u + j, b.entry(i, j).clone());
            }
        }
        let word = SubModule::from_generators(ambient.clone(), &x)?;
        paired.push((word, b));
    }
    // keep the raw payloads parallel to the code's sorted word order
    paired.sort_by(|a, b| a.0.cmp(&b.0));
    let words: Vec<SubModule> = paired.iter().map(|(w, _)| w.clone()).collect();
    let blocks: Vec<Matrix> = paired.into_iter().map(|(_, b)| b).collect();
    let code = Code::new(ambient, words)?;
    Ok(TrappingCodebook {
        code,
        block_rows,
        block_cols,
        row_offset,
        col_offset: u,
        blocks,
    })
}

/// All reduced echelon matrices of the given size with every pivot equal to
/// one (free row modules, exactly `rows` rows).
pub fn unit_pivot_rref_matrices(
    ring: &Arc<Ring>,
    rows: usize,
    cols: usize,
) -> Result<Vec<Matrix>> {
    if rows > cols {
        return Err(Error::InvalidParameter(
            "free rank cannot exceed the column count".into(),
        ));
    }
    let elems: Vec<Value> = ring.elements().collect();
    let one = ring.one();
    let mut out = Vec::new();
    for pivots in column_subsets(cols, rows) {
        // free entries: right of each row's pivot, outside pivot columns
        let mut free_slots = Vec::new();
        for (i, &jp) in pivots.iter().enumerate() {
            for j in jp + 1..cols {
                if !pivots.contains(&j) {
                    free_slots.push((i, j));
                }
            }
        }
        let combos = (elems.len() as u128)
            .checked_pow(free_slots.len() as u32)
            .unwrap_or(u128::MAX);
        if combos > 1_000_000 {
            return Err(Error::CapExceeded {
                needed: combos,
                cap: 1_000_000,
            });
        }
        let mut sweep = vec![0usize; free_slots.len()];
        loop {
            let mut m = Matrix::zero(ring.clone(), rows, cols);
            for (i, &jp) in pivots.iter().enumerate() {
                m.set(i, jp, one.clone());
            }
            for (slot, &(i, j)) in free_slots.iter().enumerate() {
                m.set(i, j, elems[sweep[slot]].clone());
            }
            out.push(m);
            let mut k = 0;
            while k < sweep.len() {
                sweep[k] += 1;
                if sweep[k] < elems.len() {
                    break;
                }
                sweep[k] = 0;
                k += 1;
            }
            if k == sweep.len() {
                break;
            }
        }
    }
    Ok(out)
}

fn column_subsets(cols: usize, take: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, cols: usize, take: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if take == 0 {
            out.push(acc.clone());
            return;
        }
        for j in start..=cols - take {
            acc.push(j);
            rec(j + 1, cols, take - 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if take <= cols {
        rec(0, cols, take, &mut Vec::new(), &mut out);
    } else if take == 0 {
        out.push(Vec::new());
    }
    out
}

/// Findings of the error-trapping versus minimum-distance comparison.
#[derive(Debug, Clone, Serialize)]
pub struct TrappingReport {
    pub instances: u64,
    pub comparisons: u64,
    pub violations: Vec<String>,
}

/// For sampled successful-trapping channels `Y = G [[H, K], [0, Xbar]]`
/// with free `H`, check that the padded transmitted word is the strict
/// distance minimizer among all padded codebook words, with equality only
/// at the word itself.
pub fn check_trapping_is_min_distance(
    ring: &Arc<Ring>,
    n: usize,
    big_n: usize,
    t: usize,
    u: usize,
    v: usize,
    trials_per_word: u64,
    seed: u64,
) -> Result<TrappingReport> {
    if !(t + v == big_n || (u == v && t + v > big_n)) {
        return Err(Error::InvalidParameter(
            "need t + v = N, or u = v with t + v > N".into(),
        ));
    }
    if v > u || v > n - u {
        return Err(Error::InvalidParameter("noise rank too large".into()));
    }
    let book = error_trapping_codebook(ring, n, big_n, t, u, v)?;
    if v + book.block_rows != big_n {
        return Err(Error::InvalidParameter(
            "payload rows plus noise rank must fill N".into(),
        ));
    }
    let ambient = book.code.ambient().clone();
    let mut instances = 0u64;
    let mut comparisons = 0u64;
    let mut violations = Vec::new();
    for (widx, block) in book.blocks.iter().enumerate() {
        let padded = &book.code.words()[widx];
        for rep in 0..trials_per_word {
            let mut rng = rng_for(seed, (widx as u64) << 20 | rep);
            let g = random_invertible(ring, big_n, &mut rng);
            let h = free_random_matrix(ring, v, u, &mut rng);
            let kmat = Matrix::random(ring.clone(), v, n - u, &mut rng);
            // inner = [[H K], [0 Xbar]], exactly N rows
            let mut inner = Matrix::zero(ring.clone(), big_n, n);
            for i in 0..v {
                for j in 0..u {
                    inner.set(i, j, h.entry(i, j).clone());
                }
                for j in 0..n - u {
                    inner.set(i, u + j, kmat.entry(i, j).clone());
                }
            }
            for i in 0..book.block_rows {
                for j in 0..book.block_cols {
                    inner.set(v + i, u + j, block.entry(i, j).clone());
                }
            }
            let y = g.mul(&inner)?;
            let received = SubModule::from_generators(ambient.clone(), &y)?;
            let d_sent = received.distance(padded)?;
            instances += 1;
            for (tidx, other) in book.code.words().iter().enumerate() {
                let d_other = received.distance(other)?;
                comparisons += 1;
                if tidx == widx {
                    continue;
                }
                if d_other <= d_sent {
                    violations.push(format!(
                        "word {widx}, trial {rep}: candidate {tidx} at distance {d_other} <= {d_sent}"
                    ));
                }
            }
        }
    }
    Ok(TrappingReport {
        instances,
        comparisons,
        violations,
    })
}

/// Exhaustive variant of the trapping comparison: every free `H`, every
/// `K`, every codebook word. The invertible left factor is omitted since it
/// does not change the row module.
pub fn check_trapping_exhaustive(
    ring: &Arc<Ring>,
    n: usize,
    big_n: usize,
    t: usize,
    u: usize,
    v: usize,
    cap: u128,
) -> Result<TrappingReport> {
    if !(t + v == big_n || (u == v && t + v > big_n)) {
        return Err(Error::InvalidParameter(
            "need t + v = N, or u = v with t + v > N".into(),
        ));
    }
    if v > u || v > n - u {
        return Err(Error::InvalidParameter("noise rank too large".into()));
    }
    let book = error_trapping_codebook(ring, n, big_n, t, u, v)?;
    if v + book.block_rows != big_n {
        return Err(Error::InvalidParameter(
            "payload rows plus noise rank must fill N".into(),
        ));
    }
    let ambient = book.code.ambient().clone();
    let h_all: Vec<Matrix> = all_matrices(ring, v, u, cap)?
        .into_iter()
        .filter(is_free_rows_owned)
        .collect();
    let k_all = all_matrices(ring, v, n - u, cap)?;
    let mut instances = 0u64;
    let mut comparisons = 0u64;
    let mut violations = Vec::new();
    for (widx, block) in book.blocks.iter().enumerate() {
        let padded = &book.code.words()[widx];
        for h in &h_all {
            for kmat in &k_all {
                let mut inner = Matrix::zero(ring.clone(), big_n, n);
                for i in 0..v {
                    for j in 0..u {
                        inner.set(i, j, h.entry(i, j).clone());
                    }
                    for j in 0..n - u {
                        inner.set(i, u + j, kmat.entry(i, j).clone());
                    }
                }
                for i in 0..book.block_rows {
                    for j in 0..book.block_cols {
                        inner.set(v + i, u + j, block.entry(i, j).clone());
                    }
                }
                let received = SubModule::from_generators(ambient.clone(), &inner)?;
                let d_sent = received.distance(padded)?;
                instances += 1;
                for (tidx, other) in book.code.words().iter().enumerate() {
                    if tidx == widx {
                        continue;
                    }
                    comparisons += 1;
                    let d_other = received.distance(other)?;
                    if d_other <= d_sent {
                        violations.push(format!(
                            "word {widx}: candidate {tidx} at distance {d_other} <= {d_sent}"
                        ));
                    }
                }
            }
        }
    }
    Ok(TrappingReport {
        instances,
        comparisons,
        violations,
    })
}

fn is_free_rows_owned(m: &Matrix) -> bool {
    is_free_rows(m)
}

/// All `rows x cols` matrices over the ring, cap-guarded.
fn all_matrices(ring: &Arc<Ring>, rows: usize, cols: usize, cap: u128) -> Result<Vec<Matrix>> {
    let cells = rows * cols;
    let count = ring.size().checked_pow(cells as u32).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::CapExceeded { needed: count, cap });
    }
    let elems: Vec<Value> = ring.elements().collect();
    let mut out = Vec::with_capacity(count as usize);
    let mut sweep = vec![0usize; cells];
    loop {
        let mut m = Matrix::zero(ring.clone(), rows, cols);
        for (idx, &e) in sweep.iter().enumerate() {
            m.set(idx / cols, idx % cols, elems[e].clone());
        }
        out.push(m);
        let mut k = 0;
        while k < cells {
            sweep[k] += 1;
            if sweep[k] < elems.len() {
                break;
            }
            sweep[k] = 0;
            k += 1;
        }
        if k == cells || cells == 0 {
            break;
        }
    }
    Ok(out)
}
