//! Double-layer column transfer operator on the reduced ring space.
//!
//! Because every bond tensor is diagonal with `α = α' = s`, bra and ket
//! labels coincide on every leg, and the operator acts on `2^L_y` ring
//! configurations instead of `4^L_y`. A configuration is a bitmask with
//! bit `i` holding the label of the horizontal bond at ring site `i`.
//!
//! Column convention: ring site `i` owns its parity tensor, the vertical
//! bond between sites `i` and `i+1`, and the horizontal bond to its right.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{BondTensor, ModelParams, PepsTensors, SiteTensor};

/// Largest perimeter accepted for matrix-free use.
pub const MAX_LY: usize = 16;
/// Largest perimeter for which a dense matrix may be materialized.
pub const MAX_DENSE_LY: usize = 12;

/// Bra-ket contraction of a bond tensor over the physical spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleBond {
    pub d0: f64,
    pub d1: f64,
}

impl DoubleBond {
    #[inline]
    pub fn weight(&self, label: u8) -> f64 {
        if label == 0 {
            self.d0
        } else {
            self.d1
        }
    }
}

pub fn build_double_bond(bond: &BondTensor) -> DoubleBond {
    let d = |alpha: u8| -> f64 {
        (0..2u8)
            .map(|s| {
                let g = bond.get(s, alpha, alpha);
                g * g
            })
            .sum()
    };
    DoubleBond { d0: d(0), d1: d(1) }
}

/// One column of the cylinder: `L_y` double sites on a ring.
#[derive(Debug, Clone)]
struct Column {
    /// Double site tensor, indexed like [`SiteTensor::index`].
    site: [f64; 16],
    vertical: DoubleBond,
    horizontal: DoubleBond,
    /// Product of right-hand horizontal double-bond weights per output configuration.
    out_weight: Vec<f64>,
}

impl Column {
    fn new(site: &SiteTensor, vertical: &BondTensor, horizontal: &BondTensor, ly: usize) -> Self {
        let mut double_site = [0.0; 16];
        for (d, t) in double_site.iter_mut().zip(site.entries()) {
            *d = t * t;
        }
        let h = build_double_bond(horizontal);
        let out_weight = (0..1usize << ly)
            .map(|b| (0..ly).map(|i| h.weight((b >> i & 1) as u8)).product())
            .collect();
        Column {
            site: double_site,
            vertical: build_double_bond(vertical),
            horizontal: h,
            out_weight,
        }
    }

    /// Sequential sweep around the ring, carrying the vertical label as a
    /// bond of dimension 2. The label closing the ring is fixed and summed.
    fn apply(&self, ly: usize, input: &[f64], out: &mut [f64], work: &mut Workspace) {
        let n = 1usize << ly;
        let dv = [self.vertical.d0, self.vertical.d1];
        out.fill(0.0);
        for seam in 0..2usize {
            let (cur, next) = (&mut work.cur, &mut work.next);
            cur.fill(0.0);
            for (x, &val) in input.iter().enumerate() {
                cur[2 * x + seam] = val;
            }
            for i in 0..ly {
                let bit = 1usize << i;
                next.fill(0.0);
                for x in (0..n).filter(|x| x & bit == 0) {
                    for a in 0..2u8 {
                        let xa = x | (usize::from(a) * bit);
                        for v in 0..2u8 {
                            let val = cur[2 * xa + usize::from(v)];
                            if val == 0.0 {
                                continue;
                            }
                            for b in 0..2u8 {
                                let xb = x | (usize::from(b) * bit);
                                for v2 in 0..2u8 {
                                    let t = self.site[SiteTensor::index(a, v2, b, v)];
                                    if t != 0.0 {
                                        next[2 * xb + usize::from(v2)] +=
                                            val * t * dv[usize::from(v2)];
                                    }
                                }
                            }
                        }
                    }
                }
                std::mem::swap(cur, next);
            }
            for (x, o) in out.iter_mut().enumerate() {
                *o += cur[2 * x + seam];
            }
        }
        for (o, w) in out.iter_mut().zip(&self.out_weight) {
            *o *= w;
        }
    }

    /// Entry `E(b, a)` as the trace of a product of 2x2 vertical-label matrices.
    fn entry(&self, ly: usize, b: usize, a: usize) -> f64 {
        let dv = [self.vertical.d0, self.vertical.d1];
        let mut acc = [[1.0, 0.0], [0.0, 1.0]];
        for i in 0..ly {
            let ai = (a >> i & 1) as u8;
            let bi = (b >> i & 1) as u8;
            let mut q = [[0.0; 2]; 2];
            for (v, row) in q.iter_mut().enumerate() {
                for (v2, q) in row.iter_mut().enumerate() {
                    *q = self.site[SiteTensor::index(ai, v2 as u8, bi, v as u8)] * dv[v2];
                }
            }
            let mut m = [[0.0; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    m[r][c] = acc[r][0] * q[0][c] + acc[r][1] * q[1][c];
                }
            }
            acc = m;
        }
        (acc[0][0] + acc[1][1]) * self.out_weight[b]
    }
}

/// Scratch buffers for [`TransferOperator::apply_with`].
#[derive(Debug, Clone)]
pub struct Workspace {
    cur: Vec<f64>,
    next: Vec<f64>,
    tmp: Vec<f64>,
}

impl Workspace {
    pub fn new(ly: usize) -> Self {
        let n = 1usize << ly;
        Workspace {
            cur: vec![0.0; 2 * n],
            next: vec![0.0; 2 * n],
            tmp: vec![0.0; n],
        }
    }
}

/// The cylinder transfer operator for one translation unit along x.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    ly: usize,
    params: ModelParams,
    columns: Vec<Column>,
}

impl TransferOperator {
    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn dim(&self) -> usize {
        1 << self.ly
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Number of lattice columns in one application (2 when the a-pattern doubles the unit cell).
    pub fn multiplicity(&self) -> usize {
        self.columns.len()
    }

    /// `r = sqrt(d0/d1)` of the horizontal double bond.
    ///
    /// Every column ends in the diagonal weight `D(b) = d0^{L_y-|b|} d1^{|b|}`,
    /// so rescaling entry `(b, a)` by `r^{|b|-|a|}` (the similarity `D^{-1/2} E D^{1/2}`)
    /// leaves the spectrum unchanged and removes the `w^{-L_y}` eigenvector
    /// conditioning that ruins accuracy at small `w`. `|b|` counts 1-labels,
    /// so the rescaling commutes with translations.
    pub fn balancing_ratio(&self) -> f64 {
        let h = self.columns[0].horizontal;
        if h.d0 > 0.0 && h.d1 > 0.0 {
            (h.d0 / h.d1).sqrt()
        } else {
            1.0
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        let mut work = Workspace::new(self.ly);
        self.apply_with(v, &mut out, &mut work)?;
        Ok(out)
    }

    pub fn apply_with(&self, v: &[f64], out: &mut [f64], work: &mut Workspace) -> Result<()> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        if out.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: out.len(),
            });
        }
        let mut tmp = std::mem::take(&mut work.tmp);
        tmp.copy_from_slice(v);
        for (k, col) in self.columns.iter().enumerate() {
            if k > 0 {
                tmp.copy_from_slice(out);
            }
            col.apply(self.ly, &tmp, out, work);
        }
        work.tmp = tmp;
        Ok(())
    }

    /// `E e_a`: the column of the operator for basis configuration `a`.
    pub fn column(&self, a: usize, work: &mut Workspace) -> Vec<f64> {
        let mut unit = vec![0.0; self.dim()];
        unit[a] = 1.0;
        let mut out = vec![0.0; self.dim()];
        self.apply_with(&unit, &mut out, work)
            .expect("unit vector has operator dimension");
        out
    }

    /// Dense matrix with entries `E(b, a)` (row `b`, column `a`).
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.ly > MAX_DENSE_LY {
            return Err(Error::Capacity {
                ly: self.ly,
                limit: MAX_DENSE_LY,
                what: "dense transfer matrix",
            });
        }
        let n = self.dim();
        let mut total: Option<DMatrix<f64>> = None;
        for col in &self.columns {
            let m = DMatrix::from_fn(n, n, |b, a| col.entry(self.ly, b, a));
            total = Some(match total {
                None => m,
                Some(prev) => m * prev,
            });
        }
        Ok(total.expect("at least one column"))
    }
}

pub fn build_transfer(params: &ModelParams, ly: usize) -> Result<TransferOperator> {
    let tensors = PepsTensors::build(params)?;
    build_transfer_from(params, &tensors, ly)
}

/// Build from explicit tensors. The verification fault hook passes a corrupted site tensor here.
pub fn build_transfer_from(
    params: &ModelParams,
    tensors: &PepsTensors,
    ly: usize,
) -> Result<TransferOperator> {
    if ly < 2 {
        return Err(Error::invalid(
            "L_y",
            format!("must be at least 2, got {ly}"),
        ));
    }
    if ly > MAX_LY {
        return Err(Error::Capacity {
            ly,
            limit: MAX_LY,
            what: "transfer operator",
        });
    }
    let columns = tensors
        .vertical
        .iter()
        .map(|v| Column::new(&tensors.site, v, &tensors.horizontal, ly))
        .collect();
    Ok(TransferOperator {
        ly,
        params: *params,
        columns,
    })
}
