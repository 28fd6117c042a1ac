//! Translation orbits of ring configurations and the momentum-sector blocks
//! of the transfer operator.
//!
//! The ring shift `T` moves the label at site `i` to site `i+1`. A momentum
//! basis state for orbit representative `a` is
//! `|a_k> = N_a^{-1/2} Σ_{r=0}^{L_y-1} e^{-ikr} T^r |a>` with `N_a = L_y²/R_a`,
//! where the sum deliberately runs over all `L_y` shifts.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::transfer::{TransferOperator, Workspace};

/// Cyclic shift `T` of an `ly`-site ring configuration.
#[inline]
pub fn shift(config: u32, ly: usize) -> u32 {
    let mask = if ly == 32 { u32::MAX } else { (1u32 << ly) - 1 };
    ((config << 1) | (config >> (ly - 1))) & mask
}

/// Smallest rotation of `config`, compared as a binary numeral.
pub fn canonical(config: u32, ly: usize) -> u32 {
    let mut best = config;
    let mut x = config;
    for _ in 1..ly {
        x = shift(x, ly);
        best = best.min(x);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrbitClass {
    pub representative: u32,
    /// Smallest `r > 0` with `T^r a = a`; also the orbit size.
    pub period: u32,
}

impl OrbitClass {
    /// `N_a = L_y² / R_a`.
    pub fn norm(&self, ly: usize) -> f64 {
        (ly * ly) as f64 / f64::from(self.period)
    }
}

/// Orbit classes in increasing order of representative.
pub fn enumerate_orbits(ly: usize) -> Vec<OrbitClass> {
    OrbitTable::new(ly).classes
}

/// Orbit decomposition of the full ring space with per-configuration lookup.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    ly: usize,
    classes: Vec<OrbitClass>,
    /// Class index of each configuration.
    class_of: Vec<u32>,
    /// `l_{b'}` for each configuration `b'`, so that `b' = T^{-l} b` with `b` the representative.
    offset_of: Vec<u8>,
}

impl OrbitTable {
    pub fn new(ly: usize) -> Self {
        assert!((1..=24).contains(&ly), "ring length {ly} out of range");
        let n = 1usize << ly;
        let mut class_of = vec![u32::MAX; n];
        let mut offset_of = vec![0u8; n];
        let mut classes = Vec::new();
        for c in 0..n as u32 {
            if class_of[c as usize] != u32::MAX {
                continue;
            }
            // increasing scan: the first unseen member of an orbit is its minimum
            let id = classes.len() as u32;
            let mut x = c;
            let mut r = 0u32;
            loop {
                class_of[x as usize] = id;
                // x = T^r c, hence c = T^{-r}... and x = T^{-(L-r)} c
                offset_of[x as usize] = ((ly as u32 - r) % ly as u32) as u8;
                x = shift(x, ly);
                r += 1;
                if x == c {
                    break;
                }
            }
            classes.push(OrbitClass {
                representative: c,
                period: r,
            });
        }
        OrbitTable {
            ly,
            classes,
            class_of,
            offset_of,
        }
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn classes(&self) -> &[OrbitClass] {
        &self.classes
    }

    pub fn class_of(&self, config: u32) -> usize {
        self.class_of[config as usize] as usize
    }

    /// The shift `l` with `config = T^{-l} representative`.
    pub fn offset_of(&self, config: u32) -> usize {
        usize::from(self.offset_of[config as usize])
    }
}

/// Lattice momentum `k = 2π m / L_y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Momentum {
    index: usize,
    ly: usize,
}

impl Momentum {
    pub fn new(index: usize, ly: usize) -> Result<Self> {
        if ly == 0 || index >= ly {
            return Err(Error::InvalidMomentum(format!(
                "index {index} is not on the grid of L_y={ly}"
            )));
        }
        Ok(Momentum { index, ly })
    }

    /// Snap `k` (radians, any branch) onto the grid, rejecting off-grid values.
    pub fn from_radians(k: f64, ly: usize) -> Result<Self> {
        if ly == 0 || !k.is_finite() {
            return Err(Error::InvalidMomentum(format!("k={k} with L_y={ly}")));
        }
        let m = k * ly as f64 / (2.0 * PI);
        let nearest = m.round();
        if (m - nearest).abs() > 1e-9 {
            return Err(Error::InvalidMomentum(format!(
                "k={k} is not a multiple of 2π/{ly}"
            )));
        }
        let index = (nearest as i64).rem_euclid(ly as i64) as usize;
        Ok(Momentum { index, ly })
    }

    pub fn all(ly: usize) -> impl Iterator<Item = Momentum> {
        (0..ly).map(move |index| Momentum { index, ly })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn radians(&self) -> f64 {
        2.0 * PI * self.index as f64 / self.ly as f64
    }

    /// `e^{-ikl}` computed from the exact residue of `m·l mod L_y`.
    pub fn phase(&self, l: usize) -> Complex64 {
        let r = (self.index * l) % self.ly;
        if r == 0 {
            return Complex64::new(1.0, 0.0);
        }
        if 2 * r == self.ly {
            return Complex64::new(-1.0, 0.0);
        }
        let theta = -2.0 * PI * r as f64 / self.ly as f64;
        Complex64::from_polar(1.0, theta)
    }
}

/// True iff `k R_a` is a multiple of 2π, i.e. `m R_a ≡ 0 (mod L_y)`.
pub fn momentum_compatible(period: u32, k: Momentum) -> bool {
    (k.index * period as usize).is_multiple_of(k.ly)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisState {
    /// Index into [`OrbitTable::classes`].
    pub class: usize,
    pub orbit: OrbitClass,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct MomentumBasis {
    momentum: Momentum,
    states: Vec<BasisState>,
    /// Position within `states` for each orbit class, `u32::MAX` if incompatible.
    position: Vec<u32>,
}

impl MomentumBasis {
    pub fn momentum(&self) -> Momentum {
        self.momentum
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn position(&self, class: usize) -> Option<usize> {
        match self.position[class] {
            u32::MAX => None,
            p => Some(p as usize),
        }
    }

    /// `|a_k>` for basis state `j` as a dense vector over all `2^L_y` configurations.
    pub fn dense_state(&self, j: usize) -> Vec<Complex64> {
        let ly = self.momentum.ly;
        let st = &self.states[j];
        let mut v = vec![Complex64::new(0.0, 0.0); 1 << ly];
        let mut x = st.orbit.representative;
        for r in 0..ly {
            v[x as usize] += self.momentum.phase(r);
            x = shift(x, ly);
        }
        let scale = 1.0 / st.norm.sqrt();
        v.iter_mut().for_each(|z| *z *= scale);
        v
    }
}

pub fn build_momentum_basis(table: &OrbitTable, k: Momentum) -> Result<MomentumBasis> {
    if k.ly != table.ly {
        return Err(Error::InvalidMomentum(format!(
            "momentum grid L_y={} does not match orbit table L_y={}",
            k.ly, table.ly
        )));
    }
    let mut position = vec![u32::MAX; table.classes.len()];
    let mut states = Vec::new();
    for (class, orbit) in table.classes.iter().enumerate() {
        if momentum_compatible(orbit.period, k) {
            position[class] = states.len() as u32;
            states.push(BasisState {
                class,
                orbit: *orbit,
                norm: orbit.norm(table.ly),
            });
        }
    }
    Ok(MomentumBasis {
        momentum: k,
        states,
        position,
    })
}

/// One momentum sector of the transfer operator.
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    pub momentum: Momentum,
    pub matrix: Mat<Complex64>,
}

impl BlockMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Accumulate `h_{b'a} r^{|b'|-|a|} e^{-ik l_{b'}} sqrt(N_b/N_a)` into row `b`
/// for one representative column; `r` is [`TransferOperator::balancing_ratio`].
fn bin_column(
    column: &[f64],
    a: &BasisState,
    basis: &MomentumBasis,
    table: &OrbitTable,
    ratio: f64,
    out: &mut [Complex64],
) {
    let k = basis.momentum;
    let pop_a = a.orbit.representative.count_ones() as i32;
    for (bp, &h) in column.iter().enumerate() {
        if h == 0.0 {
            continue;
        }
        let h = h * ratio.powi(bp.count_ones() as i32 - pop_a);
        let class = table.class_of(bp as u32);
        let Some(row) = basis.position(class) else {
            continue;
        };
        let nb = basis.states[row].norm;
        let l = table.offset_of(bp as u32);
        out[row] += k.phase(l) * (h * (nb / a.norm).sqrt());
    }
}

fn check_ly(op: &TransferOperator, table: &OrbitTable) -> Result<()> {
    if op.ly() != table.ly {
        return Err(Error::DimensionMismatch {
            expected: table.ly,
            got: op.ly(),
        });
    }
    Ok(())
}

pub fn assemble_block(
    op: &TransferOperator,
    table: &OrbitTable,
    basis: &MomentumBasis,
) -> Result<BlockMatrix> {
    check_ly(op, table)?;
    if basis.momentum.ly != op.ly() {
        return Err(Error::DimensionMismatch {
            expected: op.ly(),
            got: basis.momentum.ly,
        });
    }
    let dim = basis.dim();
    let columns: Vec<Vec<Complex64>> = basis
        .states
        .par_iter()
        .map_init(
            || Workspace::new(op.ly()),
            |work, a| {
                let col = op.column(a.orbit.representative as usize, work);
                let mut out = vec![Complex64::new(0.0, 0.0); dim];
                bin_column(&col, a, basis, table, op.balancing_ratio(), &mut out);
                out
            },
        )
        .collect();
    Ok(BlockMatrix {
        momentum: basis.momentum,
        matrix: Mat::from_fn(dim, dim, |r, c| columns[c][r]),
    })
}

/// All `L_y` momentum blocks, applying the operator once per orbit representative.
pub fn assemble_all_blocks(op: &TransferOperator, table: &OrbitTable) -> Result<Vec<BlockMatrix>> {
    check_ly(op, table)?;
    let ly = op.ly();
    let bases = Momentum::all(ly)
        .map(|k| build_momentum_basis(table, k))
        .collect::<Result<Vec<_>>>()?;
    let ratio = op.balancing_ratio();
    // per representative: its column binned into every compatible sector
    let binned: Vec<Vec<Option<Vec<Complex64>>>> = table
        .classes
        .par_iter()
        .enumerate()
        .map_init(
            || Workspace::new(ly),
            |work, (class, orbit)| {
                let col = op.column(orbit.representative as usize, work);
                bases
                    .iter()
                    .map(|basis| {
                        let pos = basis.position(class)?;
                        let mut out = vec![Complex64::new(0.0, 0.0); basis.dim()];
                        bin_column(&col, &basis.states[pos], basis, table, ratio, &mut out);
                        Some(out)
                    })
                    .collect()
            },
        )
        .collect();
    let blocks = bases
        .iter()
        .enumerate()
        .map(|(m, basis)| {
            let dim = basis.dim();
            let mut matrix = Mat::<Complex64>::zeros(dim, dim);
            for st in &basis.states {
                let c = basis.position(st.class).expect("basis state is compatible");
                let col = binned[st.class][m]
                    .as_ref()
                    .expect("binned for compatible class");
                for (r, z) in col.iter().enumerate() {
                    matrix[(r, c)] = *z;
                }
            }
            BlockMatrix {
                momentum: basis.momentum,
                matrix,
            }
        })
        .collect();
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, Sector, Sign};
    use crate::transfer::build_transfer;
    use proptest::prelude::*;

    /// Orbit count by Burnside's lemma: (1/L) Σ_{d | L} φ(d) 2^{L/d}.
    fn burnside(ly: usize) -> usize {
        let phi = |n: usize| (1..=n).filter(|k| gcd(*k, n) == 1).count();
        (1..=ly)
            .filter(|d| ly.is_multiple_of(*d))
            .map(|d| phi(d) << (ly / d))
            .sum::<usize>()
            / ly
    }

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn orbit_counts() {
        assert_eq!(enumerate_orbits(4).len(), 6);
        for ly in 1..=14 {
            let orbits = enumerate_orbits(ly);
            assert_eq!(orbits.len(), burnside(ly), "ly={ly}");
            let total: u32 = orbits.iter().map(|o| o.period).sum();
            assert_eq!(total as usize, 1 << ly);
            assert!(orbits.iter().all(|o| ly % o.period as usize == 0));
        }
    }

    #[test]
    fn periods() {
        let t = OrbitTable::new(4);
        let p = |c: u32| t.classes()[t.class_of(c)].period;
        assert_eq!(p(0b0000), 1);
        assert_eq!(p(0b0101), 2);
        assert_eq!(p(0b0011), 4);
        assert_eq!(p(0b1111), 1);
    }

    #[test]
    fn offsets_reach_representative() {
        for ly in [3, 4, 6] {
            let t = OrbitTable::new(ly);
            for c in 0..1u32 << ly {
                let rep = t.classes()[t.class_of(c)].representative;
                let mut x = c;
                for _ in 0..t.offset_of(c) {
                    x = shift(x, ly);
                }
                assert_eq!(x, rep);
            }
        }
    }

    #[test]
    fn compatibility() {
        let k = |m| Momentum::new(m, 4).unwrap();
        assert!(momentum_compatible(2, k(2)));
        assert!(!momentum_compatible(2, k(1)));
        for m in 0..4 {
            assert!(momentum_compatible(4, k(m)));
        }
    }

    #[test]
    fn momentum_grid() {
        assert_eq!(Momentum::from_radians(PI, 4).unwrap().index(), 2);
        assert_eq!(Momentum::from_radians(-PI / 2.0, 4).unwrap().index(), 3);
        assert!(matches!(
            Momentum::from_radians(1.0, 4),
            Err(Error::InvalidMomentum(_))
        ));
        assert!(Momentum::new(4, 4).is_err());
    }

    #[test]
    fn basis_dimensions() {
        let t = OrbitTable::new(4);
        let b0 = build_momentum_basis(&t, Momentum::new(0, 4).unwrap()).unwrap();
        assert_eq!(b0.dim(), 6);
        let total: usize = Momentum::all(4)
            .map(|k| build_momentum_basis(&t, k).unwrap().dim())
            .sum();
        assert_eq!(total, 16);
        let c = t.class_of(0b0101);
        let st = b0.states()[b0.position(c).unwrap()];
        assert_eq!(st.norm, 8.0);
    }

    #[test]
    fn basis_rejects_mismatched_grid() {
        let t = OrbitTable::new(4);
        assert!(build_momentum_basis(&t, Momentum::new(0, 5).unwrap()).is_err());
    }

    #[test]
    fn basis_states_are_orthonormal_translation_eigenvectors() {
        for ly in [3, 4, 5, 6] {
            let t = OrbitTable::new(ly);
            for k in Momentum::all(ly) {
                let basis = build_momentum_basis(&t, k).unwrap();
                let vs: Vec<_> = (0..basis.dim()).map(|j| basis.dense_state(j)).collect();
                for (i, v) in vs.iter().enumerate() {
                    for (j, u) in vs.iter().enumerate() {
                        let ip: Complex64 = v.iter().zip(u).map(|(a, b)| a.conj() * b).sum();
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((ip - want).norm() < 1e-12);
                    }
                    // T|a_k> = e^{ik}|a_k>
                    let mut tv = vec![Complex64::new(0.0, 0.0); v.len()];
                    for (x, z) in v.iter().enumerate() {
                        tv[shift(x as u32, ly) as usize] = *z;
                    }
                    let eig = Complex64::from_polar(1.0, k.radians());
                    for (a, b) in tv.iter().zip(v) {
                        assert!((a - eig * b).norm() < 1e-12);
                    }
                    // each configuration in the orbit carries amplitude sqrt(R_a)/L_y · (L_y/R_a)
                    let st = basis.states()[i];
                    let amp = v[st.orbit.representative as usize].norm();
                    let want = (ly as f64 / f64::from(st.orbit.period)) / st.norm.sqrt();
                    assert!((amp - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn block_matches_projected_dense_operator() {
        let p = ModelParams::new(Sign::Minus, Sign::Plus, 0.8, Sector::E).unwrap();
        let ly = 5;
        let op = build_transfer(&p, ly).unwrap();
        let e = op.to_dense().unwrap();
        let rho = op.balancing_ratio();
        assert!((rho - 0.8).abs() < 1e-15);
        let t = OrbitTable::new(ly);
        for k in Momentum::all(ly) {
            let basis = build_momentum_basis(&t, k).unwrap();
            let block = assemble_block(&op, &t, &basis).unwrap();
            let vs: Vec<_> = (0..basis.dim()).map(|j| basis.dense_state(j)).collect();
            for (r, vr) in vs.iter().enumerate() {
                for (c, vc) in vs.iter().enumerate() {
                    let mut z = Complex64::new(0.0, 0.0);
                    for b in 0..1usize << ly {
                        for a in 0..1usize << ly {
                            let scale = rho.powi(
                                (b as u32).count_ones() as i32 - (a as u32).count_ones() as i32,
                            );
                            z += vr[b].conj() * e[(b, a)] * scale * vc[a];
                        }
                    }
                    assert!(
                        (block.matrix[(r, c)] - z).norm() < 1e-12,
                        "k={} r={r} c={c}",
                        k.index()
                    );
                }
            }
        }
    }

    #[test]
    fn balanced_blocks_are_hermitian() {
        for (km, ke) in [(Sign::Plus, Sign::Plus), (Sign::Minus, Sign::Minus)] {
            let p = ModelParams::new(km, ke, 0.3, Sector::E).unwrap();
            let op = build_transfer(&p, 6).unwrap();
            let t = OrbitTable::new(6);
            for block in assemble_all_blocks(&op, &t).unwrap() {
                let m = &block.matrix;
                let scale = (0..block.dim())
                    .flat_map(|r| (0..block.dim()).map(move |c| (r, c)))
                    .map(|(r, c)| m[(r, c)].norm())
                    .fold(0.0, f64::max);
                for r in 0..block.dim() {
                    for c in 0..block.dim() {
                        assert!((m[(r, c)] - m[(c, r)].conj()).norm() <= 1e-13 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn all_blocks_agree_with_single_blocks() {
        let p = ModelParams::new(Sign::Plus, Sign::Minus, 0.9, Sector::E).unwrap();
        let op = build_transfer(&p, 6).unwrap();
        let t = OrbitTable::new(6);
        let all = assemble_all_blocks(&op, &t).unwrap();
        for (block, k) in all.iter().zip(Momentum::all(6)) {
            let basis = build_momentum_basis(&t, k).unwrap();
            let single = assemble_block(&op, &t, &basis).unwrap();
            assert_eq!(block.dim(), basis.dim());
            for r in 0..block.dim() {
                for c in 0..block.dim() {
                    assert_eq!(block.matrix[(r, c)], single.matrix[(r, c)]);
                }
            }
        }
    }

    #[test]
    fn assemble_rejects_mismatched_ly() {
        let p = ModelParams::new(Sign::Plus, Sign::Plus, 0.9, Sector::E).unwrap();
        let op = build_transfer(&p, 4).unwrap();
        let t = OrbitTable::new(5);
        assert!(assemble_all_blocks(&op, &t).is_err());
    }

    proptest! {
        #[test]
        fn canonical_is_idempotent_and_minimal(ly in 1usize..=16, raw in any::<u32>()) {
            let c = raw & ((1u32 << ly) - 1);
            let rep = canonical(c, ly);
            prop_assert_eq!(canonical(rep, ly), rep);
            prop_assert!(rep <= c);
            let t = OrbitTable::new(ly);
            prop_assert_eq!(t.classes()[t.class_of(c)].representative, rep);
            prop_assert_eq!(t.class_of(c), t.class_of(shift(c, ly)));
        }
    }
}
