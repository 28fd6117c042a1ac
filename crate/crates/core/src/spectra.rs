//! Momentum-block eigenvalues, the ground eigenvalue set, SCL minima and gaps.
//!
//! `ε = -ln(|λ|/λ0) / c` where `c` is the number of lattice columns in one
//! application of the transfer operator, so that ε is always measured per
//! lattice spacing along the cylinder.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, PepsTensors};
use crate::momentum::{assemble_all_blocks, BlockMatrix, Momentum, OrbitTable};
use crate::transfer::{build_transfer, build_transfer_from, TransferOperator};

/// Relative distance from λ0 below which two magnitudes are equal up to round-off.
pub const DEGENERACY_ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative magnitude window around λ0 for the ground set.
    pub degeneracy: f64,
    /// `|Im λ| ≤ real · λ0` counts as real.
    pub real: f64,
    /// `|λ| ≤ zero · λ0` counts as a vanishing eigenvalue.
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            degeneracy: 1e-3,
            real: 1e-9,
            zero: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    pub momentum: Momentum,
    /// Sorted by descending magnitude, ties broken by real then imaginary part.
    pub eigenvalues: Vec<Complex64>,
}

impl BlockSpectrum {
    pub fn max_imag(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }
}

fn magnitude_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

pub fn diagonalize_block(block: &BlockMatrix) -> Result<BlockSpectrum> {
    let fail = |reason: String| Error::NumericalFailure {
        ly: block.momentum.ly(),
        block: block.momentum.index(),
        reason,
    };
    if block.matrix.nrows() != block.matrix.ncols() {
        return Err(fail("block is not square".into()));
    }
    let finite =
        (0..block.dim()).all(|c| (0..block.dim()).all(|r| block.matrix[(r, c)].is_finite()));
    if !finite {
        return Err(fail("non-finite matrix entry".into()));
    }
    let mut eigenvalues = if block.dim() == 0 {
        Vec::new()
    } else {
        block
            .matrix
            .eigenvalues()
            .map_err(|e| fail(format!("eigensolver did not converge: {e:?}")))?
    };
    if eigenvalues.iter().any(|z| !z.is_finite()) {
        return Err(fail("eigensolver returned non-finite eigenvalues".into()));
    }
    eigenvalues.sort_by(magnitude_order);
    Ok(BlockSpectrum {
        momentum: block.momentum,
        eigenvalues,
    })
}

/// Every momentum sector of one cylinder perimeter.
#[derive(Debug, Clone)]
pub struct SpectrumSet {
    pub ly: usize,
    pub multiplicity: usize,
    pub blocks: Vec<BlockSpectrum>,
}

impl SpectrumSet {
    pub fn compute(params: &ModelParams, ly: usize) -> Result<Self> {
        let op = build_transfer(params, ly)?;
        Self::from_operator(&op)
    }

    pub fn compute_with_tensors(
        params: &ModelParams,
        tensors: &PepsTensors,
        ly: usize,
    ) -> Result<Self> {
        let op = build_transfer_from(params, tensors, ly)?;
        Self::from_operator(&op)
    }

    pub fn from_operator(op: &TransferOperator) -> Result<Self> {
        let table = OrbitTable::new(op.ly());
        let blocks = assemble_all_blocks(op, &table)?;
        let blocks = blocks
            .par_iter()
            .map(diagonalize_block)
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectrumSet {
            ly: op.ly(),
            multiplicity: op.multiplicity(),
            blocks,
        })
    }

    /// All eigenvalues, sector by sector.
    pub fn all_eigenvalues(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.blocks
            .iter()
            .flat_map(|b| b.eigenvalues.iter().copied())
    }

    /// ε of one eigenvalue; magnitudes within round-off of λ0 count as exactly degenerate.
    pub fn epsilon_of(&self, lambda: Complex64, lambda0: f64) -> f64 {
        let ratio = lambda.norm() / lambda0;
        if (1.0 - ratio).abs() <= DEGENERACY_ROUNDOFF {
            return 0.0;
        }
        (-ratio.ln() / self.multiplicity as f64).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundSet {
    pub lambda0: f64,
    /// `(k_y index, position in that block's sorted eigenvalue list)`.
    pub members: Vec<(usize, usize)>,
    pub tol: f64,
}

impl GroundSet {
    pub fn contains(&self, k_index: usize, idx: usize) -> bool {
        self.members.contains(&(k_index, idx))
    }
}

pub fn identify_ground_set(spectra: &SpectrumSet, tol: f64) -> Result<GroundSet> {
    let lambda0 = spectra
        .all_eigenvalues()
        .map(|z| z.norm())
        .fold(f64::NEG_INFINITY, f64::max);
    if !lambda0.is_finite() || lambda0 <= 0.0 {
        return Err(Error::EmptySpectra);
    }
    let mut members = Vec::new();
    for (m, block) in spectra.blocks.iter().enumerate() {
        for (i, z) in block.eigenvalues.iter().enumerate() {
            if z.norm() >= lambda0 * (1.0 - tol) {
                members.push((m, i));
            }
        }
    }
    Ok(GroundSet {
        lambda0,
        members,
        tol,
    })
}

/// Momentum along the cylinder, read from the eigenvalue phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kx {
    Zero,
    Pi,
    /// Phase of a complex eigenvalue, per lattice column, in (-π, π].
    Phase(f64),
}

impl Kx {
    pub fn radians(self) -> f64 {
        match self {
            Kx::Zero => 0.0,
            Kx::Pi => PI,
            Kx::Phase(p) => p,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Kx::Zero => "0",
            Kx::Pi => "pi",
            Kx::Phase(_) => "phase",
        }
    }
}

impl fmt::Display for Kx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kx::Phase(p) => write!(f, "{p}"),
            other => f.write_str(other.label()),
        }
    }
}

/// An SCL value; `Infinite` when the sector has no nonvanishing eigenvalue in the branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    Finite(f64),
    Infinite,
}

impl Epsilon {
    pub fn finite(self) -> Option<f64> {
        match self {
            Epsilon::Finite(e) => Some(e),
            Epsilon::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SclPoint {
    pub k_index: usize,
    pub kx: Kx,
    pub epsilon: Epsilon,
    pub lambda: Complex64,
    pub is_ground: bool,
}

#[derive(Debug, Clone)]
pub struct SclCurve {
    pub ly: usize,
    pub multiplicity: usize,
    pub lambda0: f64,
    pub points: Vec<SclPoint>,
}

impl SclCurve {
    /// Non-ground ε of one branch at every k_y, or the first k_y where it is missing.
    pub fn branch(&self, kx: Kx) -> Result<Vec<Epsilon>> {
        (0..self.ly)
            .map(|m| {
                self.points
                    .iter()
                    .find(|p| p.k_index == m && !p.is_ground && p.kx == kx)
                    .map(|p| p.epsilon)
                    .ok_or(Error::BranchUnavailable {
                        branch: kx.label(),
                        ly: self.ly,
                    })
            })
            .collect()
    }

    pub fn has_branch(&self, kx: Kx) -> bool {
        self.branch(kx).is_ok()
    }
}

enum Class {
    Positive,
    Negative,
    Vanishing,
    Complex,
}

fn classify_eigenvalue(z: Complex64, lambda0: f64, tol: &Tolerances) -> Class {
    if z.norm() <= tol.zero * lambda0 {
        Class::Vanishing
    } else if z.im.abs() > tol.real * lambda0 {
        Class::Complex
    } else if z.re > 0.0 {
        Class::Positive
    } else {
        Class::Negative
    }
}

fn kx_of(z: Complex64, multiplicity: usize) -> Kx {
    // a c-column eigenvalue carries phase c·k_x; with even c the sign says nothing
    if multiplicity.is_multiple_of(2) || z.re >= 0.0 {
        Kx::Zero
    } else {
        Kx::Pi
    }
}

pub fn scl_minima(spectra: &SpectrumSet, ground: &GroundSet, tol: &Tolerances) -> SclCurve {
    let lambda0 = ground.lambda0;
    let mult = spectra.multiplicity;
    let mut points = Vec::new();
    for (m, block) in spectra.blocks.iter().enumerate() {
        let mut best_pos: Option<Complex64> = None;
        let mut best_neg: Option<Complex64> = None;
        let mut best_complex: Option<Complex64> = None;
        for (i, &z) in block.eigenvalues.iter().enumerate() {
            if ground.contains(m, i) {
                points.push(SclPoint {
                    k_index: m,
                    kx: kx_of(z, mult),
                    epsilon: Epsilon::Finite(spectra.epsilon_of(z, lambda0)),
                    lambda: z,
                    is_ground: true,
                });
                continue;
            }
            // eigenvalues are sorted by magnitude, so the first hit per branch is the largest
            let slot = match classify_eigenvalue(z, lambda0, tol) {
                Class::Positive => &mut best_pos,
                Class::Negative if mult % 2 == 1 => &mut best_neg,
                Class::Negative | Class::Vanishing => continue,
                Class::Complex => &mut best_complex,
            };
            if slot.is_none() {
                *slot = Some(z);
            }
        }
        let point = |z: Option<Complex64>, kx: Kx| SclPoint {
            k_index: m,
            kx,
            epsilon: z.map_or(Epsilon::Infinite, |z| {
                Epsilon::Finite(spectra.epsilon_of(z, lambda0))
            }),
            lambda: z.map_or(Complex64::new(0.0, 0.0), |z| Complex64::new(z.re, 0.0)),
            is_ground: false,
        };
        points.push(point(best_pos, Kx::Zero));
        if let Some(z) = best_neg {
            points.push(point(Some(z), Kx::Pi));
        }
        if let Some(z) = best_complex {
            points.push(SclPoint {
                k_index: m,
                kx: Kx::Phase(z.arg() / mult as f64),
                epsilon: Epsilon::Finite(spectra.epsilon_of(z, lambda0)),
                lambda: z,
                is_ground: false,
            });
        }
    }
    points.sort_by(|a, b| {
        a.k_index
            .cmp(&b.k_index)
            .then(a.kx.radians().total_cmp(&b.kx.radians()))
            .then(b.is_ground.cmp(&a.is_ground))
            .then(a.epsilon.as_f64().total_cmp(&b.epsilon.as_f64()))
    });
    SclCurve {
        ly: spectra.ly,
        multiplicity: mult,
        lambda0,
        points,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPoint {
    pub k_index: usize,
    pub kx: Kx,
    pub gamma: Epsilon,
}

/// Gaps `γ(k_x, k_y)`: the subleading eigenvalue in the (0, 0) sector, the
/// leading eigenvalue of the branch elsewhere. Branches with no eigenvalue
/// of the right sign are omitted.
pub fn gap_gamma(spectra: &SpectrumSet, ground: &GroundSet, tol: &Tolerances) -> Vec<GapPoint> {
    let lambda0 = ground.lambda0;
    let mut gaps = Vec::new();
    for (m, block) in spectra.blocks.iter().enumerate() {
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        for &z in &block.eigenvalues {
            match classify_eigenvalue(z, lambda0, tol) {
                Class::Positive => positive.push(z),
                Class::Negative if spectra.multiplicity % 2 == 1 => negative.push(z),
                _ => {}
            }
        }
        let skip = usize::from(m == 0);
        let gamma = |z: Option<&Complex64>| {
            z.map_or(Epsilon::Infinite, |z| {
                Epsilon::Finite(spectra.epsilon_of(*z, lambda0))
            })
        };
        gaps.push(GapPoint {
            k_index: m,
            kx: Kx::Zero,
            gamma: gamma(positive.get(skip)),
        });
        if !negative.is_empty() {
            gaps.push(GapPoint {
                k_index: m,
                kx: Kx::Pi,
                gamma: gamma(negative.first()),
            });
        }
    }
    gaps
}

/// Everything derived from one perimeter.
#[derive(Debug, Clone)]
pub struct SectorAnalysis {
    pub spectra: SpectrumSet,
    pub ground: GroundSet,
    pub curve: SclCurve,
    pub gaps: Vec<GapPoint>,
}

pub fn analyze(params: &ModelParams, ly: usize, tol: &Tolerances) -> Result<SectorAnalysis> {
    analyze_spectra(SpectrumSet::compute(params, ly)?, tol)
}

pub fn analyze_spectra(spectra: SpectrumSet, tol: &Tolerances) -> Result<SectorAnalysis> {
    let ground = identify_ground_set(&spectra, tol.degeneracy)?;
    let curve = scl_minima(&spectra, &ground, tol);
    let gaps = gap_gamma(&spectra, &ground, tol);
    Ok(SectorAnalysis {
        spectra,
        ground,
        curve,
        gaps,
    })
}
