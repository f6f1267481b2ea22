//! Submodules of an ambient module as canonical values: length, sums,
//! distances, the loss/error split of a transmission, and the brute-force
//! enumeration oracles used to cross-check counting formulas.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::{member, rref, EchelonMatrix, Matrix};
use crate::ring::{Ring, Value};

/// Default cap (in coefficient combinations) for module element enumeration.
pub const DEFAULT_ORACLE_CAP: u128 = 100_000;

/// Default cap (in ambient elements) for submodule enumeration.
pub const DEFAULT_ENUM_CAP: u128 = 10_000;

/// Ambient module `(c_1) x ... x (c_n)` inside `R^n`, described by the
/// canonical generators of its column ideals. All generators equal to 1
/// means the free ambient `R^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ambient {
    ring: Arc<Ring>,
    n: usize,
    column_ideals: Vec<Value>,
}

impl Ambient {
    pub fn free(ring: Arc<Ring>, n: usize) -> Arc<Ambient> {
        let one = ring.one();
        Arc::new(Ambient {
            ring,
            n,
            column_ideals: vec![one; n],
        })
    }

    pub fn with_column_ideals(ring: Arc<Ring>, gens: Vec<Value>) -> Result<Arc<Ambient>> {
        for g in &gens {
            if !ring.contains(g) {
                return Err(Error::InvalidParameter(format!(
                    "{g} is not a canonical element of {ring}"
                )));
            }
        }
        let column_ideals = gens.iter().map(|g| ring.ideal_gen(g)).collect();
        Ok(Arc::new(Ambient {
            n: gens.len(),
            ring,
            column_ideals,
        }))
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn column_ideals(&self) -> &[Value] {
        &self.column_ideals
    }

    pub fn is_free(&self) -> bool {
        let one = self.ring.one();
        self.column_ideals.iter().all(|c| *c == one)
    }

    /// Length of the ambient: the sum of its column ideal lengths.
    pub fn length(&self) -> u64 {
        self.column_ideals
            .iter()
            .map(|c| self.ring.ideal_length(c))
            .sum()
    }

    /// Number of elements of the ambient.
    pub fn size(&self) -> u128 {
        self.column_ideals
            .iter()
            .map(|c| ideal_size(&self.ring, c))
            .product()
    }

    pub fn contains_vector(&self, v: &[Value]) -> bool {
        v.len() == self.n
            && v.iter()
                .zip(&self.column_ideals)
                .all(|(x, c)| self.ring.divides(c, x))
    }

    /// All ambient elements in a fixed order, guarded by a cap.
    pub fn elements(&self, cap: u128) -> Result<Vec<Vec<Value>>> {
        let size = self.size();
        if size > cap {
            return Err(Error::CapExceeded { needed: size, cap });
        }
        let mut per_column: Vec<Vec<Value>> = Vec::with_capacity(self.n);
        for c in &self.column_ideals {
            let mut set = BTreeSet::new();
            for r in self.ring.elements() {
                set.insert(self.ring.mul(c, &r));
            }
            per_column.push(set.into_iter().collect());
        }
        let mut out: Vec<Vec<Value>> = vec![Vec::new()];
        for col in &per_column {
            let mut next = Vec::with_capacity(out.len() * col.len());
            for prefix in &out {
                for v in col {
                    let mut row = prefix.clone();
                    row.push(v.clone());
                    next.push(row);
                }
            }
            out = next;
        }
        Ok(out)
    }
}

/// Number of elements of the principal ideal `(c)`.
fn ideal_size(ring: &Arc<Ring>, c: &Value) -> u128 {
    (0..ring.component_count())
        .map(|i| {
            let comp_ring = ring.component_ring(i);
            let comp = comp_ring.chain_component().expect("component is local");
            let lam = comp_ring.ideal_length(&ring.project(c, i));
            u128::from(comp.q()).pow(lam as u32)
        })
        .product()
}

/// A submodule of an ambient, stored as its unique reduced row-echelon
/// basis. Equality of submodules is entrywise equality of those bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubModule {
    ambient: Arc<Ambient>,
    basis: EchelonMatrix,
}

impl PartialOrd for SubModule {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SubModule {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.basis.matrix();
        let b = other.basis.matrix();
        a.rows()
            .cmp(&b.rows())
            .then_with(|| {
                for i in 0..a.rows() {
                    for j in 0..a.cols() {
                        match a.entry(i, j).cmp(b.entry(i, j)) {
                            Ordering::Equal => {}
                            ord => return ord,
                        }
                    }
                }
                Ordering::Equal
            })
    }
}

impl SubModule {
    /// Canonicalize a generating matrix into a submodule. Fails when a
    /// generator falls outside the ambient.
    pub fn from_generators(ambient: Arc<Ambient>, rows: &Matrix) -> Result<SubModule> {
        if rows.ring() != ambient.ring() || rows.cols() != ambient.n() {
            return Err(Error::ShapeMismatch(format!(
                "generators are {}x{} over {}, ambient is {}^{}",
                rows.rows(),
                rows.cols(),
                rows.ring(),
                ambient.ring(),
                ambient.n()
            )));
        }
        for i in 0..rows.rows() {
            if !ambient.contains_vector(rows.row(i)) {
                return Err(Error::OutsideAmbient);
            }
        }
        Ok(SubModule {
            ambient,
            basis: rref(rows),
        })
    }

    pub fn zero(ambient: Arc<Ambient>) -> SubModule {
        let rows = Matrix::zero(ambient.ring().clone(), 0, ambient.n());
        SubModule {
            basis: rref(&rows),
            ambient,
        }
    }

    /// The ambient itself as a submodule.
    pub fn full(ambient: Arc<Ambient>) -> SubModule {
        let ring = ambient.ring().clone();
        let n = ambient.n();
        let mut rows = Matrix::zero(ring, n, n);
        for (j, c) in ambient.column_ideals().iter().enumerate() {
            rows.set(j, j, c.clone());
        }
        SubModule::from_generators(ambient, &rows).expect("column ideals lie in the ambient")
    }

    pub fn ambient(&self) -> &Arc<Ambient> {
        &self.ambient
    }

    pub fn ring(&self) -> &Arc<Ring> {
        self.ambient.ring()
    }

    pub fn basis(&self) -> &EchelonMatrix {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.rows() == 0
    }

    /// Module length: the sum of the pivot ideal lengths of the basis.
    pub fn length(&self) -> u64 {
        self.basis.length()
    }

    /// Number of elements.
    pub fn size(&self) -> u128 {
        (0..self.basis.rows())
            .map(|i| ideal_size(self.ring(), self.basis.pivot(i)))
            .product()
    }

    pub fn contains(&self, v: &[Value]) -> bool {
        member(v, &self.basis).is_some()
    }

    pub fn is_submodule_of(&self, other: &SubModule) -> bool {
        (0..self.basis.rows()).all(|i| other.contains(self.basis.matrix().row(i)))
    }

    fn check_same_ambient(&self, other: &SubModule) -> Result<()> {
        if self.ambient == other.ambient {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("ambient mismatch".into()))
        }
    }

    /// Smallest submodule containing both operands.
    pub fn sum(&self, other: &SubModule) -> Result<SubModule> {
        self.check_same_ambient(other)?;
        let stacked = self.basis.matrix().stack(other.basis.matrix())?;
        SubModule::from_generators(self.ambient.clone(), &stacked)
    }

    /// Submodule distance, computed without intersections:
    /// `2 lambda(M+N) - lambda(M) - lambda(N)`.
    pub fn distance(&self, other: &SubModule) -> Result<u64> {
        let s = self.sum(other)?;
        Ok(2 * s.length() - self.length() - other.length())
    }

    /// `lambda(M) + lambda(N) - lambda(M+N)`.
    pub fn intersection_length(&self, other: &SubModule) -> Result<u64> {
        let s = self.sum(other)?;
        Ok(self.length() + other.length() - s.length())
    }

    /// Lengths of the information-loss and error modules of a transmission:
    /// `rho = lambda(sent) - lambda(sent ^ received)` and
    /// `e = lambda(received) - lambda(sent ^ received)`.
    pub fn loss_and_error(&self, received: &SubModule) -> Result<(u64, u64)> {
        let cap = self.intersection_length(received)?;
        Ok((self.length() - cap, received.length() - cap))
    }

    /// Every element of the module, by sweeping all coefficient combinations
    /// over the basis rows. Deduplicated, sorted, cap-guarded.
    pub fn elements(&self, cap: u128) -> Result<Vec<Vec<Value>>> {
        let ring = self.ring().clone();
        let t = self.basis.rows();
        let combos = ring.size().checked_pow(t as u32).unwrap_or(u128::MAX);
        if combos > cap {
            return Err(Error::CapExceeded {
                needed: combos,
                cap,
            });
        }
        let all: Vec<Value> = ring.elements().collect();
        let rows = self.basis.matrix().row_vecs();
        let n = self.ambient.n();
        let mut out = BTreeSet::new();
        let mut sweep = vec![0usize; t];
        loop {
            let mut acc = vec![ring.zero(); n];
            for (ci, row) in sweep.iter().zip(&rows) {
                for (x, y) in acc.iter_mut().zip(row) {
                    *x = ring.add(x, &ring.mul(&all[*ci], y));
                }
            }
            out.insert(acc);
            let mut k = 0;
            while k < t {
                sweep[k] += 1;
                if sweep[k] < all.len() {
                    break;
                }
                sweep[k] = 0;
                k += 1;
            }
            if k == t {
                break;
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Test-oriented intersection: enumerate the elements of `self`, keep
    /// those lying in `other`, canonicalize.
    pub fn intersection_oracle(&self, other: &SubModule, cap: u128) -> Result<SubModule> {
        self.check_same_ambient(other)?;
        let mine = self.elements(cap)?;
        let kept: Vec<Vec<Value>> = mine
            .into_iter()
            .filter(|v| other.contains(v))
            .collect();
        let rows = Matrix::from_rows(self.ring().clone(), self.ambient.n(), kept)?;
        SubModule::from_generators(self.ambient.clone(), &rows)
    }

    /// Projection onto the `i`-th top-level factor ring, as a submodule of
    /// the projected ambient.
    pub fn project_factor(&self, i: usize) -> SubModule {
        let ring = self.ring();
        let fs = ring.factor_rings();
        let fr = fs[i].clone();
        let gens: Vec<Value> = self
            .ambient
            .column_ideals()
            .iter()
            .map(|c| ring.project_factor(c, i))
            .collect();
        let ambient =
            Ambient::with_column_ideals(fr.clone(), gens).expect("projected generators are valid");
        let rows: Vec<Vec<Value>> = (0..self.basis.rows())
            .map(|r| {
                self.basis
                    .matrix()
                    .row(r)
                    .iter()
                    .map(|v| ring.project_factor(v, i))
                    .collect()
            })
            .collect();
        let m = Matrix::from_rows(fr, self.ambient.n(), rows).expect("projection is rectangular");
        SubModule::from_generators(ambient, &m).expect("projection lies in projected ambient")
    }

    /// Diagnostic for chain rings: the shape `(mu_1, ..., mu_e)` of the
    /// module, read off from the lengths of `pi^j M`.
    pub fn chain_shape(&self) -> Result<Vec<u64>> {
        let ring = self.ring().clone();
        let comp = ring
            .chain_component()
            .ok_or_else(|| Error::NotChainRing(ring.to_string()))?;
        let e = comp.e() as usize;
        let pi = ring.uniformizer()?;
        let mut lens = Vec::with_capacity(e + 1);
        let mut rows = self.basis.matrix().clone();
        lens.push(self.length());
        for _ in 0..e {
            let scaled: Vec<Vec<Value>> = (0..rows.rows())
                .map(|i| rows.row(i).iter().map(|v| ring.mul(&pi, v)).collect())
                .collect();
            rows = Matrix::from_rows(ring.clone(), rows.cols(), scaled)?;
            lens.push(rref(&rows).length());
        }
        Ok((1..=e).map(|k| lens[e - k] - lens[e - k + 1]).collect())
    }
}

/// All distinct submodules of the ambient of length exactly `target`,
/// deduplicated by their canonical bases, in a deterministic order. Closure
/// search over single-generator extensions, pruned at the target length.
pub fn enumerate_submodules(
    ambient: &Arc<Ambient>,
    target: u64,
    cap: u128,
) -> Result<Vec<SubModule>> {
    let pool = ambient.elements(cap)?;
    Ok(closure_up_to(ambient, &pool, target)
        .into_iter()
        .filter(|m| m.length() == target)
        .collect())
}

/// All submodules generated by subsets of `pool`, of length at most
/// `max_len`, in sorted order.
pub(crate) fn closure_up_to(
    ambient: &Arc<Ambient>,
    pool: &[Vec<Value>],
    max_len: u64,
) -> Vec<SubModule> {
    let mut seen = BTreeSet::new();
    let mut frontier = vec![SubModule::zero(ambient.clone())];
    seen.insert(frontier[0].clone());
    while let Some(m) = frontier.pop() {
        if m.length() >= max_len {
            continue;
        }
        for v in pool {
            if m.contains(v) {
                continue;
            }
            let gen = Matrix::from_rows(ambient.ring().clone(), ambient.n(), vec![v.clone()])
                .expect("pool rows are rectangular");
            let stacked = m.basis().matrix().stack(&gen).expect("same shape");
            let bigger = SubModule::from_generators(ambient.clone(), &stacked)
                .expect("pool vectors lie in the ambient");
            if bigger.length() <= max_len && seen.insert(bigger.clone()) {
                frontier.push(bigger);
            }
        }
    }
    seen.into_iter().collect()
}

/// Number of submodules of `m` of length exactly `target`, by closure over
/// the elements of `m`.
pub fn count_submodules_within(m: &SubModule, target: u64, cap: u128) -> Result<u64> {
    let pool = m.elements(cap)?;
    Ok(closure_up_to(m.ambient(), &pool, target)
        .into_iter()
        .filter(|s| s.length() == target)
        .count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::{parse_ring_spec, parse_submodule_str};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn submod(text: &str) -> SubModule {
        parse_submodule_str(text).unwrap()
    }

    fn i(x: u64) -> Value {
        Value::Int(x)
    }

    fn random_submodule<R: Rng>(
        ambient: &Arc<Ambient>,
        max_rows: usize,
        rng: &mut R,
    ) -> SubModule {
        let rows = rng.gen_range(0..=max_rows);
        loop {
            let m = Matrix::random(ambient.ring().clone(), rows, ambient.n(), rng);
            if (0..m.rows()).all(|r| ambient.contains_vector(m.row(r))) {
                return SubModule::from_generators(ambient.clone(), &m).unwrap();
            }
        }
    }

    #[test]
    fn worked_example_lengths() {
        let m = submod("ring: Z6\ncols: 3\n2 1 3\n4 1 2\n");
        assert_eq!(m.length(), 4);
        assert_eq!(m.basis().rows(), 3);
        let zero = SubModule::zero(m.ambient().clone());
        assert_eq!(zero.length(), 0);
        assert_eq!(m.sum(&zero).unwrap(), m);
        assert_eq!(m.sum(&m).unwrap(), m);
    }

    #[test]
    fn z4_distance_example() {
        let m = submod("ring: Z4\ncols: 4\n1 1 1 0\n0 2 1 2\n0 0 2 0\n");
        let n = submod("ring: Z4\ncols: 4\n1 3 0 2\n0 0 1 0\n");
        assert_eq!(m.length(), 4);
        assert_eq!(n.length(), 4);
        assert_eq!(m.sum(&n).unwrap().length(), 5);
        assert_eq!(m.distance(&n).unwrap(), 2);
        assert_eq!(m.intersection_length(&n).unwrap(), 3);
        assert_eq!(m.loss_and_error(&n).unwrap(), (1, 1));
        assert_eq!(m.distance(&m).unwrap(), 0);
        // cross-check the intersection with the oracle
        let cap = m.intersection_oracle(&n, DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(cap.length(), 3);
        assert_eq!(m.intersection_oracle(&m, DEFAULT_ORACLE_CAP).unwrap(), m);
        let z = SubModule::zero(m.ambient().clone());
        assert_eq!(m.intersection_oracle(&z, DEFAULT_ORACLE_CAP).unwrap(), z);
    }

    #[test]
    fn z12_singleton_ambient_module() {
        let m = submod("ring: Z12\ncols: 2\n1 0\n0 3\n");
        assert_eq!(m.length(), 5);
        // the generating matrix is already its own reduced basis
        let expect =
            Matrix::from_rows(m.ring().clone(), 2, vec![vec![i(1), i(0)], vec![i(0), i(3)]])
                .unwrap();
        assert_eq!(m.basis().matrix(), &expect);
    }

    #[test]
    fn loss_and_error_degenerate() {
        let m = submod("ring: Z4\ncols: 2\n1 0\n0 2\n");
        let zero = SubModule::zero(m.ambient().clone());
        assert_eq!(m.loss_and_error(&m).unwrap(), (0, 0));
        assert_eq!(m.loss_and_error(&zero).unwrap(), (m.length(), 0));
    }

    #[test]
    fn ambient_membership_enforced() {
        let ring = parse_ring_spec("Z4").unwrap();
        let ambient = Ambient::with_column_ideals(ring.clone(), vec![i(1), i(2)]).unwrap();
        let good = Matrix::from_rows(ring.clone(), 2, vec![vec![i(1), i(2)]]).unwrap();
        assert!(SubModule::from_generators(ambient.clone(), &good).is_ok());
        let bad = Matrix::from_rows(ring, 2, vec![vec![i(1), i(1)]]).unwrap();
        assert!(matches!(
            SubModule::from_generators(ambient, &bad),
            Err(Error::OutsideAmbient)
        ));
    }

    #[test]
    fn ambient_length_and_size() {
        let ring = parse_ring_spec("Z4").unwrap();
        let free = Ambient::free(ring.clone(), 3);
        assert_eq!(free.length(), 6);
        assert_eq!(free.size(), 64);
        let constrained = Ambient::with_column_ideals(ring, vec![i(1), i(2)]).unwrap();
        assert_eq!(constrained.length(), 3);
        assert_eq!(constrained.size(), 8);
        assert_eq!(constrained.elements(100).unwrap().len(), 8);
        let full = SubModule::full(constrained);
        assert_eq!(full.length(), 3);
    }

    #[test]
    fn enumerate_z12_length_one() {
        let ring = parse_ring_spec("Z12").unwrap();
        let ambient = Ambient::free(ring, 2);
        let mods = enumerate_submodules(&ambient, 1, DEFAULT_ENUM_CAP).unwrap();
        let gens: BTreeSet<Vec<Value>> = mods
            .iter()
            .map(|m| {
                assert_eq!(m.basis().rows(), 1);
                m.basis().matrix().row(0).to_vec()
            })
            .collect();
        let expect: BTreeSet<Vec<Value>> = [
            (4u64, 0u64),
            (4, 4),
            (4, 8),
            (6, 0),
            (6, 6),
            (0, 4),
            (0, 6),
        ]
        .into_iter()
        .map(|(a, b)| vec![i(a), i(b)])
        .collect();
        assert_eq!(gens, expect);
    }

    #[test]
    fn enumerate_degenerate_lengths() {
        let ring = parse_ring_spec("Z2").unwrap();
        let ambient = Ambient::free(ring, 3);
        let zero_only = enumerate_submodules(&ambient, 0, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(zero_only, vec![SubModule::zero(ambient.clone())]);
        let lines = enumerate_submodules(&ambient, 1, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn metric_and_oracle_random_suite() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for spec in ["Z4", "Z6", "product(Z2,Z3)"] {
            let ring = parse_ring_spec(spec).unwrap();
            let ambient = Ambient::free(ring, 2);
            for _ in 0..40 {
                let m = random_submodule(&ambient, 2, &mut rng);
                let n = random_submodule(&ambient, 2, &mut rng);
                let p = random_submodule(&ambient, 2, &mut rng);
                let dmn = m.distance(&n).unwrap();
                let dnm = n.distance(&m).unwrap();
                assert_eq!(dmn, dnm, "{spec}: symmetry");
                assert_eq!(dmn == 0, m == n, "{spec}: identity of indiscernibles");
                let dmp = m.distance(&p).unwrap();
                let dpn = p.distance(&n).unwrap();
                assert!(dmn <= dmp + dpn, "{spec}: triangle inequality");
                // modular law of lengths via the oracle
                let cap = m.intersection_oracle(&n, DEFAULT_ORACLE_CAP).unwrap();
                assert_eq!(
                    m.length() + n.length(),
                    m.sum(&n).unwrap().length() + cap.length(),
                    "{spec}: modular law"
                );
                assert_eq!(
                    m.intersection_length(&n).unwrap(),
                    cap.length(),
                    "{spec}: oracle agreement"
                );
                // monotonicity
                assert!(cap.is_submodule_of(&m));
                assert!(cap.length() <= m.length());
                if cap.length() == m.length() {
                    assert_eq!(cap, m);
                }
            }
        }
    }

    #[test]
    fn length_matches_maximal_chain_oracle() {
        // longest chain of submodules, by dynamic programming over the full
        // closure; an independent reading of the length
        for spec in ["Z4", "Z6"] {
            let ring = parse_ring_spec(spec).unwrap();
            let ambient = Ambient::free(ring, 2);
            let pool = ambient.elements(DEFAULT_ENUM_CAP).unwrap();
            let all = closure_up_to(&ambient, &pool, u64::MAX);
            let longest: std::collections::HashMap<usize, u64> = {
                let mut order: Vec<usize> = (0..all.len()).collect();
                order.sort_by_key(|&k| all[k].size());
                let mut best = std::collections::HashMap::new();
                for &k in &order {
                    let mut chain = 0;
                    for &j in &order {
                        if j != k
                            && all[j].size() < all[k].size()
                            && all[j].is_submodule_of(&all[k])
                        {
                            chain = chain.max(best[&j] + 1);
                        }
                    }
                    best.insert(k, chain);
                }
                best
            };
            for (k, m) in all.iter().enumerate() {
                assert_eq!(m.length(), longest[&k], "{spec}: {:?}", m.basis().matrix());
            }
        }
    }

    #[test]
    fn chain_shape_examples() {
        let m = submod("ring: Z4\ncols: 2\n2 1\n0 2\n");
        // cyclic of order 4: one free generator
        assert_eq!(m.chain_shape().unwrap(), vec![1, 1]);
        let free = submod("ring: Z4\ncols: 2\n1 0\n0 1\n");
        assert_eq!(free.chain_shape().unwrap(), vec![2, 2]);
        let socle = submod("ring: Z4\ncols: 2\n2 0\n0 2\n");
        assert_eq!(socle.chain_shape().unwrap(), vec![0, 2]);
        let not_chain = submod("ring: Z6\ncols: 2\n1 0\n");
        assert!(not_chain.chain_shape().is_err());
    }

    #[test]
    fn projection_splits_product_modules() {
        let m = submod(
            "ring: product(Z2,Z2)\ncols: 4\n(1,0) (0,0) (1,0) (0,0)\n(0,0) (1,1) (0,1) (1,1)\n",
        );
        let p0 = m.project_factor(0);
        let p1 = m.project_factor(1);
        assert_eq!(p0.length() + p1.length(), m.length());
        assert_eq!(p1.basis().rows(), 1);
        assert_eq!(
            p1.basis().matrix().row(0),
            &[i(0), i(1), i(1), i(1)]
        );
    }
}
