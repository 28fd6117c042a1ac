//! Brute-force ground truth, deliberately sharing no contraction code with
//! [`crate::transfer`]: explicit torus wavefunctions with exact stabilizer
//! checks, and the unreduced double-layer ring operator.
//!
//! Everything here builds its tensors directly from the sign definitions,
//! so a corrupted tensor handed to the fast pipeline shows up as a mismatch.

use std::collections::{BTreeMap, HashMap, HashSet};

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{build_a_pattern, APattern, ModelParams, Sign};

/// Largest number of physical spins enumerated exhaustively.
pub const MAX_EXHAUSTIVE_SPINS: usize = 20;
/// Largest torus (in dual vertices) whose support is enumerated through its generators.
pub const MAX_SUPPORT_VERTICES: usize = 19;
/// Largest perimeter for the unreduced transfer spectrum.
pub const MAX_ORACLE_LY: usize = 6;

/// Exact amplitude: integer coefficients of powers of `w`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Amplitude {
    /// `w` power → coefficient; zero coefficients are never stored.
    pub terms: BTreeMap<u32, i64>,
}

impl Amplitude {
    fn add(&mut self, coef: i64, w_power: u32) {
        let e = self.terms.entry(w_power).or_insert(0);
        *e += coef;
        if *e == 0 {
            self.terms.remove(&w_power);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, w: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&p, &c)| c as f64 * w.powi(p as i32))
            .sum()
    }

    pub fn negate(&self) -> Self {
        Amplitude {
            terms: self.terms.iter().map(|(&p, &c)| (p, -c)).collect(),
        }
    }
}

/// Physical spins on the bonds of an `lx × ly` periodic dual lattice.
///
/// Spin `2·(x·ly + y)` sits on the horizontal bond `(x,y)–(x+1,y)`,
/// spin `2·(x·ly + y) + 1` on the vertical bond `(x,y)–(x,y+1)`.
/// Bit value 1 means `σ^z = −1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Torus {
    pub lx: usize,
    pub ly: usize,
}

impl Torus {
    pub fn spins(&self) -> usize {
        2 * self.lx * self.ly
    }

    pub fn vertices(&self) -> usize {
        self.lx * self.ly
    }

    pub fn h(&self, x: usize, y: usize) -> usize {
        2 * ((x % self.lx) * self.ly + (y % self.ly))
    }

    pub fn v(&self, x: usize, y: usize) -> usize {
        self.h(x, y) + 1
    }

    /// Spins on the four legs (left, up, right, down) of dual vertex `(x, y)`.
    pub fn legs(&self, x: usize, y: usize) -> [usize; 4] {
        [
            self.h(x + self.lx - 1, y),
            self.v(x, y),
            self.h(x, y),
            self.v(x, y + self.ly - 1),
        ]
    }

    /// Spins around the dual plaquette with lower-left corner `(x, y)`: a star of the original lattice.
    pub fn star(&self, x: usize, y: usize) -> [usize; 4] {
        [
            self.h(x, y),
            self.h(x, y + 1),
            self.v(x, y),
            self.v(x + 1, y),
        ]
    }

    fn mask(spins: &[usize]) -> u64 {
        spins.iter().fold(0, |m, &s| m ^ (1u64 << s))
    }
}

/// Site tensor entry from its definition: 1 on the allowed parity, else 0.
fn site_entry(sign_km: Sign, legs: [u8; 4]) -> i64 {
    let ones: u8 = legs.iter().sum();
    let parity = if sign_km == Sign::Plus { 0 } else { 1 };
    i64::from(ones % 2 == parity)
}

/// Bond tensor entry `g^s_{αα'}` as a monomial `(coef, w power)`.
fn bond_entry(a: Sign, s: u8, alpha: u8, alpha_p: u8) -> (i64, u32) {
    match (s, alpha, alpha_p) {
        (0, 0, 0) => (i64::from(a.value()), 1),
        (1, 1, 1) => (1, 0),
        _ => (0, 0),
    }
}

/// Bond bookkeeping for the torus trace.
struct TorusNetwork {
    torus: Torus,
    pattern: APattern,
    sign_km: Sign,
}

impl TorusNetwork {
    fn new(sign_km: Sign, sign_ke: Sign, lx: usize, ly: usize) -> Result<Self> {
        Ok(TorusNetwork {
            torus: Torus { lx, ly },
            pattern: build_a_pattern(sign_ke, lx, ly)?,
            sign_km,
        })
    }

    fn bond_sign(&self, spin: usize) -> Sign {
        let cell = spin / 2;
        let (x, y) = (cell / self.torus.ly, cell % self.torus.ly);
        if spin.is_multiple_of(2) {
            self.pattern.horizontal(x, y)
        } else {
            self.pattern.vertical(x, y)
        }
    }

    /// `Tr{T^{⊗V} g^{⊗B}}` at one spin configuration: a depth-first sum over
    /// the nonzero virtual index pairs of every bond, closed by the site tensors.
    fn amplitude(&self, config: u64) -> Amplitude {
        let n = self.torus.spins();
        let mut out = Amplitude::default();
        // each bond carries (α at its lower/left end, α' at its upper/right end)
        let mut labels = vec![(0u8, 0u8); n];
        self.trace(config, 0, 1, 0, &mut labels, &mut out);
        out
    }

    fn trace(
        &self,
        config: u64,
        bond: usize,
        coef: i64,
        power: u32,
        labels: &mut [(u8, u8)],
        out: &mut Amplitude,
    ) {
        if bond == labels.len() {
            let mut c = coef;
            for x in 0..self.torus.lx {
                for y in 0..self.torus.ly {
                    let [l, u, r, d] = self.torus.legs(x, y);
                    // the vertex is the right end of its left bond, the left end of its right bond, etc.
                    let legs = [labels[l].1, labels[u].0, labels[r].0, labels[d].1];
                    c *= site_entry(self.sign_km, legs);
                    if c == 0 {
                        return;
                    }
                }
            }
            out.add(c, power);
            return;
        }
        let s = ((config >> bond) & 1) as u8;
        let a = self.bond_sign(bond);
        for alpha in 0..2u8 {
            for alpha_p in 0..2u8 {
                let (gc, gp) = bond_entry(a, s, alpha, alpha_p);
                if gc != 0 {
                    labels[bond] = (alpha, alpha_p);
                    self.trace(config, bond + 1, coef * gc, power + gp, labels, out);
                }
            }
        }
    }
}

/// Nonzero amplitudes of the PEPS wavefunction on a torus.
#[derive(Debug, Clone)]
pub struct AmplitudeTable {
    pub torus: Torus,
    pub sign_km: Sign,
    pub sign_ke: Sign,
    /// Configuration bitmask → amplitude; configurations absent here have amplitude 0.
    pub amplitudes: HashMap<u64, Amplitude>,
}

impl AmplitudeTable {
    pub fn get(&self, config: u64) -> Amplitude {
        self.amplitudes.get(&config).cloned().unwrap_or_default()
    }
}

/// Exhaustive amplitudes on an `lx × ly` torus (at most [`MAX_EXHAUSTIVE_SPINS`] spins).
///
/// `w` is kept symbolic, so the table holds for every `w`; the value in
/// `params` is not used.
pub fn brute_wavefunction(params: &ModelParams, lx: usize, ly: usize) -> Result<AmplitudeTable> {
    let net = TorusNetwork::new(params.sign_km(), params.sign_ke(), lx, ly)?;
    let n = net.torus.spins();
    if n > MAX_EXHAUSTIVE_SPINS {
        return Err(Error::OracleSizeCap(format!(
            "{lx}x{ly} torus has {n} spins; exhaustive enumeration is capped at {MAX_EXHAUSTIVE_SPINS}"
        )));
    }
    let amplitudes = (0..1u64 << n)
        .filter_map(|c| {
            let a = net.amplitude(c);
            (!a.is_zero()).then_some((c, a))
        })
        .collect::<HashMap<_, _>>();
    if amplitudes.is_empty() {
        return Err(Error::IncompatibleExtent(format!(
            "the wavefunction vanishes identically on the {lx}x{ly} torus"
        )));
    }
    Ok(AmplitudeTable {
        torus: net.torus,
        sign_km: params.sign_km(),
        sign_ke: params.sign_ke(),
        amplitudes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizerViolation {
    /// `"plaquette"` or `"star"`.
    pub kind: &'static str,
    pub x: usize,
    pub y: usize,
    pub config: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizerReport {
    pub lx: usize,
    pub ly: usize,
    pub sign_km: i8,
    pub sign_ke: i8,
    /// `"exhaustive"` or `"generated support"`.
    pub method: &'static str,
    pub support_size: usize,
    pub expected_support_size: usize,
    /// Configurations outside the generated support that were sampled and found to vanish.
    pub off_support_sampled: usize,
    pub violations: Vec<StabilizerViolation>,
    pub violation_count: usize,
}

impl StabilizerReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0 && self.support_size == self.expected_support_size
    }
}

const MAX_LISTED_VIOLATIONS: usize = 16;

struct Checker<'a> {
    net: &'a TorusNetwork,
    violations: Vec<StabilizerViolation>,
    count: usize,
}

impl Checker<'_> {
    fn record(&mut self, kind: &'static str, x: usize, y: usize, config: u64) {
        self.count += 1;
        if self.violations.len() < MAX_LISTED_VIOLATIONS {
            self.violations
                .push(StabilizerViolation { kind, x, y, config });
        }
    }

    /// `B_p ψ = sign_km ψ` (diagonal) and `A_s ψ = sign_ke ψ` (four-spin flip), at `w = 1`.
    fn check(&mut self, config: u64, amp: &Amplitude, amp_of: &dyn Fn(u64) -> Amplitude, ke: Sign) {
        let t = self.net.torus;
        for x in 0..t.lx {
            for y in 0..t.ly {
                let legs = Torus::mask(&t.legs(x, y));
                let eigen = if (config & legs).count_ones().is_multiple_of(2) {
                    1
                } else {
                    -1
                };
                if eigen != self.net.sign_km.value() {
                    self.record("plaquette", x, y, config);
                }
                let flipped = amp_of(config ^ Torus::mask(&t.star(x, y)));
                let expected = if ke == Sign::Plus {
                    amp.clone()
                } else {
                    amp.negate()
                };
                if flipped.eval(1.0) as i64 != expected.eval(1.0) as i64 {
                    self.record("star", x, y, config);
                }
            }
        }
    }
}

/// Check every plaquette and star eigenvalue equation exactly at `w = 1`.
///
/// Tori with at most [`MAX_EXHAUSTIVE_SPINS`] spins are enumerated in full.
/// Larger ones (up to [`MAX_SUPPORT_VERTICES`] dual vertices) enumerate the
/// support generated by star flips and the two winding loops from a seed,
/// require it to have the closed-form size `2^{V+1}`, and sample random
/// configurations outside it to confirm they vanish.
pub fn stabilizer_check(params: &ModelParams, lx: usize, ly: usize) -> Result<StabilizerReport> {
    let (km, ke) = (params.sign_km(), params.sign_ke());
    let net = TorusNetwork::new(km, ke, lx, ly)?;
    let t = net.torus;
    let expected_support_size = 1usize << (t.vertices() + 1);
    let mut checker = Checker {
        net: &net,
        violations: Vec::new(),
        count: 0,
    };

    if t.spins() <= MAX_EXHAUSTIVE_SPINS {
        let table = brute_wavefunction(params, lx, ly)?;
        let amp_of = |c: u64| table.get(c);
        let mut configs: Vec<_> = table.amplitudes.keys().copied().collect();
        configs.sort_unstable();
        for c in configs {
            let a = table.get(c);
            checker.check(c, &a, &amp_of, ke);
        }
        let (violations, violation_count) = (checker.violations, checker.count);
        return Ok(StabilizerReport {
            lx,
            ly,
            sign_km: km.value(),
            sign_ke: ke.value(),
            method: "exhaustive",
            support_size: table.amplitudes.len(),
            expected_support_size,
            off_support_sampled: 0,
            violations,
            violation_count,
        });
    }

    if t.vertices() > MAX_SUPPORT_VERTICES {
        return Err(Error::OracleSizeCap(format!(
            "{lx}x{ly} torus exceeds the stabilizer check limit of {MAX_SUPPORT_VERTICES} dual vertices"
        )));
    }
    let seed = parity_seed(t, km)?;
    // star flips: all but one are independent; the two winding loops complete the cycle space
    let mut generators: Vec<u64> = (0..t.lx)
        .flat_map(|x| (0..t.ly).map(move |y| (x, y)))
        .take(t.vertices() - 1)
        .map(|(x, y)| Torus::mask(&t.star(x, y)))
        .collect();
    generators.push((0..t.lx).fold(0, |m, x| m ^ (1u64 << t.h(x, 0))));
    generators.push((0..t.ly).fold(0, |m, y| m ^ (1u64 << t.v(0, y))));

    let amp_of = |c: u64| net.amplitude(c);
    let mut support = HashSet::with_capacity(expected_support_size);
    let mut config = seed;
    for step in 0..expected_support_size {
        if step > 0 {
            // binary-reflected Gray code: flip the generator at the lowest set bit
            config ^= generators[step.trailing_zeros() as usize];
        }
        support.insert(config);
        let a = net.amplitude(config);
        if a.is_zero() {
            checker.record("plaquette", 0, 0, config);
            continue;
        }
        checker.check(config, &a, &amp_of, ke);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5e75_c09e);
    let mask = (1u64 << t.spins()) - 1;
    let mut off_support_sampled = 0;
    for _ in 0..65_536 {
        let c = rng.gen::<u64>() & mask;
        if support.contains(&c) {
            continue;
        }
        off_support_sampled += 1;
        if !net.amplitude(c).is_zero() {
            checker.record("plaquette", 0, 0, c);
        }
    }
    let (violations, violation_count) = (checker.violations, checker.count);
    Ok(StabilizerReport {
        lx,
        ly,
        sign_km: km.value(),
        sign_ke: ke.value(),
        method: "generated support",
        support_size: support.len(),
        expected_support_size,
        off_support_sampled,
        violations,
        violation_count,
    })
}

/// A configuration with the required parity at every dual vertex.
fn parity_seed(t: Torus, km: Sign) -> Result<u64> {
    match km {
        Sign::Plus => Ok(0),
        // a perfect matching of the dual lattice puts exactly one flipped spin on every vertex
        Sign::Minus if t.lx.is_multiple_of(2) => Ok((0..t.lx)
            .step_by(2)
            .flat_map(|x| (0..t.ly).map(move |y| (x, y)))
            .fold(0, |m, (x, y)| m | 1u64 << t.h(x, y))),
        Sign::Minus if t.ly.is_multiple_of(2) => Ok((0..t.lx)
            .flat_map(|x| (0..t.ly).step_by(2).map(move |y| (x, y)))
            .fold(0, |m, (x, y)| m | 1u64 << t.v(x, y))),
        Sign::Minus => Err(Error::IncompatibleExtent(format!(
            "odd parity on every vertex needs an even number of dual vertices, got {}x{}",
            t.lx, t.ly
        ))),
    }
}

/// Nonzero spectrum of the unreduced double-layer ring operator.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub ly: usize,
    /// `D^{2 L_y}` (per column of the transfer operator).
    pub full_dim: usize,
    /// Number of basis states touched by a nonzero entry.
    pub support_dim: usize,
    /// Whether every such state has coinciding bra and ket labels on every row.
    pub support_coincident: bool,
    /// Eigenvalues of the operator restricted to its support.
    pub eigenvalues: Vec<Complex64>,
}

/// Double-layer site tensor with four legs of dimension 4 (ket label + 2·bra label):
/// `(left in, down in, up out, right out) → value`, with the site's own
/// vertical and horizontal bond tensors absorbed and the physical spins summed.
/// Double-site entries keyed by the (left, up) double labels: `(right, down, weight)`.
type DoubleSite = HashMap<(u8, u8), Vec<(u8, u8, f64)>>;

fn double_site(sign_km: Sign, a_vertical: Sign, w: f64) -> DoubleSite {
    let g = |a: Sign, s: u8, x: u8, y: u8| {
        let (c, p) = bond_entry(a, s, x, y);
        c as f64 * w.powi(p as i32)
    };
    let mut out: DoubleSite = HashMap::new();
    for left in 0..4u8 {
        for down in 0..4u8 {
            for up_out in 0..4u8 {
                for right_out in 0..4u8 {
                    let mut sum = 0.0;
                    for sv in 0..2u8 {
                        for sh in 0..2u8 {
                            for idx in 0..16u8 {
                                let (u, r, ub, rb) =
                                    (idx & 1, idx >> 1 & 1, idx >> 2 & 1, idx >> 3 & 1);
                                let ket = site_entry(sign_km, [left & 1, u, r, down & 1]) as f64;
                                let bra =
                                    site_entry(sign_km, [left >> 1, ub, rb, down >> 1]) as f64;
                                if ket == 0.0 || bra == 0.0 {
                                    continue;
                                }
                                sum += ket
                                    * bra
                                    * g(a_vertical, sv, u, up_out & 1)
                                    * g(a_vertical, sv, ub, up_out >> 1)
                                    * g(Sign::Plus, sh, r, right_out & 1)
                                    * g(Sign::Plus, sh, rb, right_out >> 1);
                            }
                        }
                    }
                    if sum != 0.0 {
                        out.entry((left, down))
                            .or_default()
                            .push((up_out, right_out, sum));
                    }
                }
            }
        }
    }
    out
}

type Sparse = HashMap<(usize, usize), f64>;

/// One column as a sparse map `(out, in) → value` over `4^{L_y}` states.
fn ring_column(sign_km: Sign, a_vertical: Sign, w: f64, ly: usize) -> Sparse {
    let site = double_site(sign_km, a_vertical, w);
    let mut out = Sparse::new();
    let mut lefts = vec![0u8; ly];
    let mut rights = vec![0u8; ly];
    for input in 0..1usize << (2 * ly) {
        for (i, l) in lefts.iter_mut().enumerate() {
            *l = (input >> (2 * i) & 3) as u8;
        }
        for seam in 0..4u8 {
            ring_dfs(
                &site,
                &lefts,
                &mut rights,
                0,
                seam,
                seam,
                1.0,
                input,
                &mut out,
            );
        }
    }
    out.retain(|_, v| *v != 0.0);
    out
}

#[allow(clippy::too_many_arguments)]
fn ring_dfs(
    site: &DoubleSite,
    lefts: &[u8],
    rights: &mut [u8],
    i: usize,
    down: u8,
    seam: u8,
    value: f64,
    input: usize,
    out: &mut Sparse,
) {
    if i == lefts.len() {
        if down == seam {
            let output = rights
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &r)| acc | usize::from(r) << (2 * k));
            *out.entry((output, input)).or_insert(0.0) += value;
        }
        return;
    }
    let Some(options) = site.get(&(lefts[i], down)) else {
        return;
    };
    for &(up, right, v) in options {
        rights[i] = right;
        ring_dfs(site, lefts, rights, i + 1, up, seam, value * v, input, out);
    }
}

/// `b · a`: apply `a` first.
fn sparse_product(b: &Sparse, a: &Sparse) -> Sparse {
    let mut by_row: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
    for (&(o, i), &v) in a {
        by_row.entry(o).or_default().push((i, v));
    }
    let mut out = Sparse::new();
    for (&(o, mid), &vb) in b {
        if let Some(row) = by_row.get(&mid) {
            for &(i, va) in row {
                *out.entry((o, i)).or_insert(0.0) += vb * va;
            }
        }
    }
    out.retain(|_, v| *v != 0.0);
    out
}

/// Eigenvalues of the transfer operator built without momentum blocks or
/// label coincidence, restricted to the states its nonzero entries touch
/// (the rest of the `D^{2L_y}` space contributes only zeros).
pub fn brute_transfer_spectrum(params: &ModelParams, ly: usize) -> Result<DenseSpectrum> {
    if ly > MAX_ORACLE_LY {
        return Err(Error::OracleSizeCap(format!(
            "L_y={ly} exceeds the oracle limit of {MAX_ORACLE_LY}"
        )));
    }
    if ly < 2 {
        return Err(Error::invalid(
            "L_y",
            format!("must be at least 2, got {ly}"),
        ));
    }
    let (km, ke) = params.tensor_signs();
    let period = if ke == Sign::Minus { 2 } else { 1 };
    let pattern = build_a_pattern(ke, period, ly)?;
    let mut op: Option<Sparse> = None;
    for x in 0..period {
        let col = ring_column(km, pattern.vertical(x, 0), params.w(), ly);
        op = Some(match op {
            None => col,
            Some(prev) => sparse_product(&col, &prev),
        });
    }
    let op = op.expect("at least one column");

    let mut support: Vec<usize> = op.keys().flat_map(|&(o, i)| [o, i]).collect();
    support.sort_unstable();
    support.dedup();
    let coincident = |state: usize| (0..ly).all(|k| matches!(state >> (2 * k) & 3, 0 | 3));
    let support_coincident = support.iter().all(|&s| coincident(s));
    let position: HashMap<usize, usize> =
        support.iter().enumerate().map(|(p, &s)| (s, p)).collect();
    let n = support.len();
    let mut m = Mat::<f64>::zeros(n, n);
    for (&(o, i), &v) in &op {
        m[(position[&o], position[&i])] = v;
    }
    let eigenvalues = if n == 0 {
        Vec::new()
    } else {
        // real-arithmetic Schur path, distinct from the complex one used on momentum blocks
        m.eigenvalues().map_err(|e| Error::NumericalFailure {
            ly,
            block: 0,
            reason: format!("unreduced eigensolver: {e:?}"),
        })?
    };
    Ok(DenseSpectrum {
        ly,
        full_dim: 1 << (2 * ly),
        support_dim: n,
        support_coincident,
        eigenvalues,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumMismatch {
    /// Position of the reference eigenvalue in descending-magnitude order.
    pub index: usize,
    pub expected: (f64, f64),
    /// Closest unmatched candidate, if any remained.
    pub nearest: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumComparison {
    pub lambda0: f64,
    pub compared: usize,
    /// Largest `|z_ref - z_match| / λ0` over matched pairs.
    pub max_deviation: f64,
    pub mismatches: Vec<SpectrumMismatch>,
}

impl SpectrumComparison {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Match two eigenvalue multisets within `rel_tol · λ0`, where λ0 is the
/// larger of the two leading magnitudes. The shorter list is padded with
/// zeros, so only the nonzero parts have to agree.
pub fn compare_spectra(
    reference: &[Complex64],
    candidate: &[Complex64],
    rel_tol: f64,
) -> SpectrumComparison {
    let lead = |v: &[Complex64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lambda0 = lead(reference).max(lead(candidate));
    let n = reference.len().max(candidate.len());
    let pad = |v: &[Complex64]| {
        let mut v = v.to_vec();
        v.resize(n, Complex64::new(0.0, 0.0));
        v.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        v
    };
    let reference = pad(reference);
    let mut remaining = pad(candidate);
    let tol = rel_tol * lambda0;
    let mut mismatches = Vec::new();
    let mut max_deviation = 0.0f64;
    for (index, z) in reference.iter().enumerate() {
        let nearest = remaining
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - z).norm().total_cmp(&(*b - z).norm()))
            .map(|(p, c)| (p, *c));
        match nearest {
            Some((p, c)) if (c - z).norm() <= tol => {
                if lambda0 > 0.0 {
                    max_deviation = max_deviation.max((c - z).norm() / lambda0);
                }
                remaining.swap_remove(p);
            }
            other => mismatches.push(SpectrumMismatch {
                index,
                expected: (z.re, z.im),
                nearest: other.map(|(_, c)| (c.re, c.im)),
            }),
        }
    }
    SpectrumComparison {
        lambda0,
        compared: n,
        max_deviation,
        mismatches,
    }
}
