//! Bond-dimension-2 PEPS tensors for the four signed toric-code variants.
//!
//! The network lives on the dual lattice in the σ^z basis: a parity tensor
//! sits on every dual vertex and a diagonal bond tensor on every dual bond.
//! Label 0 is spin up, label 1 is spin down. The `diag(w, 1)` deformation is
//! folded into the bond tensor, so the bond dimension stays 2.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A coupling sign, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    /// Parity bit: 0 for `+1`, 1 for `-1`.
    pub fn parity(self) -> u8 {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn from_value(v: i64) -> Result<Sign> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::invalid(
                "sign",
                format!("expected +1 or -1, got {v}"),
            )),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.value()
    }
}

impl TryFrom<i8> for Sign {
    type Error = Error;

    fn try_from(v: i8) -> Result<Sign> {
        Sign::from_value(i64::from(v))
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => f.write_str("+1"),
            Sign::Minus => f.write_str("-1"),
        }
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Sign> {
        match s.trim() {
            "+1" | "1" | "+" => Ok(Sign::Plus),
            "-1" | "-" => Ok(Sign::Minus),
            other => Err(Error::invalid(
                "sign",
                format!("expected +1 or -1, got {other:?}"),
            )),
        }
    }
}

/// Which anyon's fractionalization a run probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    /// σ^z-basis network; reads η_e.
    E,
    /// Dual (σ^x-basis) network with the star and plaquette roles exchanged; reads η_m.
    M,
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sector::E => f.write_str("e"),
            Sector::M => f.write_str("m"),
        }
    }
}

impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Sector> {
        match s.trim().to_ascii_lowercase().as_str() {
            "e" | "e-sector" => Ok(Sector::E),
            "m" | "m-sector" => Ok(Sector::M),
            other => Err(Error::invalid(
                "detect",
                format!("expected e or m, got {other:?}"),
            )),
        }
    }
}

/// A validated parameter point: the two coupling signs, the deformation `w`,
/// and the detection sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    sign_km: Sign,
    sign_ke: Sign,
    w: f64,
    detect: Sector,
}

impl ModelParams {
    pub fn new(sign_km: Sign, sign_ke: Sign, w: f64, detect: Sector) -> Result<Self> {
        validate_w(w)?;
        Ok(ModelParams {
            sign_km,
            sign_ke,
            w,
            detect,
        })
    }

    pub fn sign_km(&self) -> Sign {
        self.sign_km
    }

    pub fn sign_ke(&self) -> Sign {
        self.sign_ke
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn detect(&self) -> Sector {
        self.detect
    }

    pub fn with_w(&self, w: f64) -> Result<Self> {
        ModelParams::new(self.sign_km, self.sign_ke, w, self.detect)
    }

    pub fn with_detect(&self, detect: Sector) -> Self {
        ModelParams { detect, ..*self }
    }

    /// Signs that actually enter tensor construction, as `(plaquette, star)`.
    ///
    /// The m-sector run swaps the two couplings: the dual network has the
    /// same tensor structure with the roles exchanged.
    pub fn tensor_signs(&self) -> (Sign, Sign) {
        match self.detect {
            Sector::E => (self.sign_km, self.sign_ke),
            Sector::M => (self.sign_ke, self.sign_km),
        }
    }

    /// Number of columns in the translation unit along x.
    pub fn column_period(&self) -> usize {
        match self.tensor_signs().1 {
            Sign::Plus => 1,
            Sign::Minus => 2,
        }
    }
}

pub fn validate_w(w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 && w <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("w", format!("must lie in (0, 1], got {w}")))
    }
}

/// The rank-4 parity tensor on a dual vertex.
///
/// Legs are ordered (left, up, right, down); the tensor is symmetric under
/// any permutation, so the order only matters for indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    entries: [f64; 16],
}

impl SiteTensor {
    #[inline]
    pub fn index(l: u8, u: u8, r: u8, d: u8) -> usize {
        debug_assert!(l < 2 && u < 2 && r < 2 && d < 2);
        usize::from(l) | usize::from(u) << 1 | usize::from(r) << 2 | usize::from(d) << 3
    }

    #[inline]
    pub fn get(&self, l: u8, u: u8, r: u8, d: u8) -> f64 {
        self.entries[Self::index(l, u, r, d)]
    }

    pub fn entries(&self) -> &[f64; 16] {
        &self.entries
    }

    /// Overwrite one entry. Used to inject faults into the verification path.
    #[doc(hidden)]
    pub fn with_entry(mut self, l: u8, u: u8, r: u8, d: u8, value: f64) -> Self {
        self.entries[Self::index(l, u, r, d)] = value;
        self
    }
}

pub fn build_site_tensor(sign_km: Sign) -> SiteTensor {
    let parity = sign_km.parity();
    let mut entries = [0.0; 16];
    for (idx, e) in entries.iter_mut().enumerate() {
        if (idx.count_ones() % 2) as u8 == parity {
            *e = 1.0;
        }
    }
    SiteTensor { entries }
}

/// The diagonal rank-3 bond tensor `g^s_{αα'}`, with `diag(w, 1)` folded in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondTensor {
    a: Sign,
    w: f64,
}

impl BondTensor {
    pub fn a(&self) -> Sign {
        self.a
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    /// Entry `g^s_{α α'}`.
    pub fn get(&self, s: u8, alpha: u8, alpha_p: u8) -> f64 {
        match (s, alpha, alpha_p) {
            (0, 0, 0) => self.a.as_f64() * self.w,
            (1, 1, 1) => 1.0,
            _ => 0.0,
        }
    }

    /// Nonzero entries as `(s, α, α', value)`.
    pub fn nonzero(&self) -> [(u8, u8, u8, f64); 2] {
        [(0, 0, 0, self.get(0, 0, 0)), (1, 1, 1, 1.0)]
    }
}

pub fn build_bond_tensor(a: Sign, w: f64) -> Result<BondTensor> {
    validate_w(w)?;
    Ok(BondTensor { a, w })
}

/// Position-dependent bond signs on an `x_extent × y_extent` periodic dual lattice.
///
/// Bond `horizontal(x, y)` joins dual vertices `(x, y)` and `(x+1, y)`;
/// bond `vertical(x, y)` joins `(x, y)` and `(x, y+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct APattern {
    x_extent: usize,
    y_extent: usize,
    x_period: usize,
    horizontal: Vec<Sign>,
    vertical: Vec<Sign>,
}

impl APattern {
    pub fn x_extent(&self) -> usize {
        self.x_extent
    }

    pub fn y_extent(&self) -> usize {
        self.y_extent
    }

    pub fn x_period(&self) -> usize {
        self.x_period
    }

    fn slot(&self, x: usize, y: usize) -> usize {
        (x % self.x_extent) * self.y_extent + (y % self.y_extent)
    }

    pub fn horizontal(&self, x: usize, y: usize) -> Sign {
        self.horizontal[self.slot(x, y)]
    }

    pub fn vertical(&self, x: usize, y: usize) -> Sign {
        self.vertical[self.slot(x, y)]
    }

    /// Product of the four bond signs around the dual plaquette with lower-left corner `(x, y)`.
    pub fn plaquette_product(&self, x: usize, y: usize) -> Sign {
        let bonds = [
            self.horizontal(x, y),
            self.horizontal(x, y + 1),
            self.vertical(x, y),
            self.vertical(x + 1, y),
        ];
        let minus = bonds.iter().filter(|&&s| s == Sign::Minus).count();
        if minus % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// Sign carried by the vertical bonds of column `x`; constant along y.
    pub fn column_vertical(&self, x: usize) -> Sign {
        self.vertical(x, 0)
    }
}

/// Bond signs realizing the requested star eigenvalue.
///
/// For `sign_ke = -1` the vertical bonds of even columns carry `a = -1`,
/// which puts exactly one `-1` on each dual plaquette and doubles the unit
/// cell along x.
pub fn build_a_pattern(sign_ke: Sign, x_extent: usize, y_extent: usize) -> Result<APattern> {
    if x_extent == 0 || y_extent == 0 {
        return Err(Error::invalid("extent", "extents must be at least 1"));
    }
    let n = x_extent * y_extent;
    let horizontal = vec![Sign::Plus; n];
    let (vertical, x_period) = match sign_ke {
        Sign::Plus => (vec![Sign::Plus; n], 1),
        Sign::Minus => {
            if !x_extent.is_multiple_of(2) {
                return Err(Error::IncompatibleExtent(format!(
                    "sign_ke=-1 doubles the unit cell along x; x_extent={x_extent} is odd"
                )));
            }
            let vertical = (0..n)
                .map(|i| {
                    if (i / y_extent).is_multiple_of(2) {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    }
                })
                .collect();
            (vertical, 2)
        }
    };
    Ok(APattern {
        x_extent,
        y_extent,
        x_period,
        horizontal,
        vertical,
    })
}

/// All tensors for one parameter point, with the a-pattern over a single unit cell column set.
#[derive(Debug, Clone, PartialEq)]
pub struct PepsTensors {
    pub site: SiteTensor,
    /// Bond tensor for horizontal bonds (always `a = +1`).
    pub horizontal: BondTensor,
    /// Bond tensor for the vertical bonds of each column in the unit cell.
    pub vertical: Vec<BondTensor>,
}

impl PepsTensors {
    pub fn build(params: &ModelParams) -> Result<Self> {
        let (km, ke) = params.tensor_signs();
        let period = params.column_period();
        let pattern = build_a_pattern(ke, period, 1)?;
        let vertical = (0..period)
            .map(|x| build_bond_tensor(pattern.column_vertical(x), params.w()))
            .collect::<Result<Vec<_>>>()?;
        Ok(PepsTensors {
            site: build_site_tensor(km),
            horizontal: build_bond_tensor(Sign::Plus, params.w())?,
            vertical,
        })
    }
}
