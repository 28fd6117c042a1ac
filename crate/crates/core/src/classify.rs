//! Fractionalization verdicts from SCL curves over several perimeters.
//!
//! A nontrivial class shows up as an extra k_y → k_y + π periodicity of the
//! SCL minima whose finite-size violation `Δ(L_y) = ε(k_x,0) − ε(k_x,π)`
//! shrinks with `L_y`. The trivial class keeps a finite violation.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{ModelParams, Sector};
use crate::spectra::{analyze, Epsilon, GapPoint, Kx, SclCurve, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// A residual below this, at the largest perimeter, counts as periodic.
    pub period_threshold: f64,
    /// Minimum coefficient of determination for the `ln Δ` fit.
    pub min_fit_quality: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            period_threshold: 0.05,
            min_fit_quality: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Zero,
    Pi,
}

impl Branch {
    pub fn kx(self) -> Kx {
        match self {
            Branch::Zero => Kx::Zero,
            Branch::Pi => Kx::Pi,
        }
    }
}

impl Serialize for Branch {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.kx().label())
    }
}

fn finite_branch(curve: &SclCurve, branch: Branch) -> Result<Vec<f64>> {
    let values = curve.branch(branch.kx())?;
    values
        .iter()
        .enumerate()
        .map(|(k_index, e)| {
            e.finite().ok_or(Error::NonFiniteCurve {
                ly: curve.ly,
                k_index,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicityReport {
    pub ly: usize,
    pub branch: Branch,
    /// `max_k |ε(k) − ε(k+π)|`.
    pub residual: f64,
}

/// Residual of the k_y → k_y + π periodicity on one branch.
pub fn periodicity_residual(curve: &SclCurve, branch: Branch) -> Result<PeriodicityReport> {
    if !curve.ly.is_multiple_of(2) {
        return Err(Error::UndefinedForOdd(curve.ly));
    }
    let eps = finite_branch(curve, branch)?;
    Ok(PeriodicityReport {
        ly: curve.ly,
        branch,
        residual: residual_of(&eps),
    })
}

pub(crate) fn residual_of(eps: &[f64]) -> f64 {
    let half = eps.len() / 2;
    (0..half)
        .map(|k| (eps[k] - eps[k + half]).abs())
        .fold(0.0, f64::max)
}

/// `Δ(L_y) = ε(k_x, 0) − ε(k_x, π)` on one branch.
pub fn splitting(curve: &SclCurve, branch: Branch) -> Result<f64> {
    if !curve.ly.is_multiple_of(2) {
        return Err(Error::UndefinedForOdd(curve.ly));
    }
    let eps = finite_branch(curve, branch)?;
    Ok(eps[0] - eps[curve.ly / 2])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingFit {
    /// `(L_y, Δ)` pairs used in the fit.
    pub samples: Vec<(usize, f64)>,
    /// Perimeters whose Δ was not positive and therefore dropped.
    pub dropped: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination of `ln Δ` against `L_y`.
    pub quality: f64,
}

/// Least-squares line through `(L_y, ln Δ)`.
pub fn fit_splitting_decay(samples: &[(usize, f64)]) -> Result<SplittingFit> {
    if let Some(&(ly, _)) = samples.iter().find(|(ly, _)| ly % 2 != 0) {
        return Err(Error::UndefinedForOdd(ly));
    }
    let (kept, dropped): (Vec<_>, Vec<_>) = samples.iter().partition(|(_, d)| *d > 0.0);
    let dropped: Vec<usize> = dropped.into_iter().map(|(ly, _)| ly).collect();
    let mut distinct: Vec<usize> = kept.iter().map(|(ly, _)| *ly).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: distinct.len(),
        });
    }
    let n = kept.len() as f64;
    let xs: Vec<f64> = kept.iter().map(|(ly, _)| *ly as f64).collect();
    let ys: Vec<f64> = kept.iter().map(|(_, d)| d.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let quality = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(SplittingFit {
        samples: kept,
        dropped,
        slope,
        intercept,
        quality,
    })
}

/// Everything the classifier looked at for one sector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub branch: Branch,
    pub residuals: Vec<PeriodicityReport>,
    pub splittings: Vec<(usize, f64)>,
    pub decay_fit: Option<SplittingFit>,
    /// Why the fit is missing, when it is.
    pub fit_error: Option<String>,
}

/// Collect periodicity evidence from curves at three or more even perimeters.
///
/// The π branch is used when every curve has one; otherwise the k_x = 0 branch.
pub fn gather_evidence(curves: &[SclCurve]) -> Result<Evidence> {
    let mut curves: Vec<&SclCurve> = curves.iter().collect();
    curves.sort_by_key(|c| c.ly);
    if let Some(c) = curves.iter().find(|c| c.ly % 2 != 0) {
        return Err(Error::UndefinedForOdd(c.ly));
    }
    let mut lys: Vec<usize> = curves.iter().map(|c| c.ly).collect();
    lys.dedup();
    if lys.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: lys.len(),
        });
    }
    let branch = if curves.iter().all(|c| c.has_branch(Kx::Pi)) {
        Branch::Pi
    } else {
        Branch::Zero
    };
    let residuals = curves
        .iter()
        .map(|c| periodicity_residual(c, branch))
        .collect::<Result<Vec<_>>>()?;
    let splittings = curves
        .iter()
        .map(|c| Ok((c.ly, splitting(c, branch)?)))
        .collect::<Result<Vec<_>>>()?;
    let (decay_fit, fit_error) = match fit_splitting_decay(&splittings) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(Evidence {
        branch,
        residuals,
        splittings,
        decay_fit,
        fit_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Plus,
    Minus,
    Undetermined,
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Verdict::Plus => s.serialize_i8(1),
            Verdict::Minus => s.serialize_i8(-1),
            Verdict::Undetermined => s.serialize_str("undetermined"),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Plus => f.write_str("+1"),
            Verdict::Minus => f.write_str("-1"),
            Verdict::Undetermined => f.write_str("undetermined"),
        }
    }
}

/// `-1` when the residual at the largest perimeter is below threshold and
/// Δ decays (negative slope, good fit); `+1` when the residual stays above
/// threshold and never decreases; undetermined otherwise.
pub fn decide(evidence: &Evidence, cfg: &ClassifierConfig) -> Verdict {
    let Some(last) = evidence.residuals.last() else {
        return Verdict::Undetermined;
    };
    let decays = evidence
        .decay_fit
        .as_ref()
        .is_some_and(|f| f.slope < 0.0 && f.quality >= cfg.min_fit_quality);
    if last.residual < cfg.period_threshold && decays {
        return Verdict::Minus;
    }
    let above = evidence
        .residuals
        .iter()
        .all(|r| r.residual >= cfg.period_threshold);
    let non_decreasing = evidence
        .residuals
        .windows(2)
        .all(|w| w[1].residual >= w[0].residual);
    if above && non_decreasing {
        Verdict::Plus
    } else {
        Verdict::Undetermined
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetClassification {
    pub eta_e: Option<Verdict>,
    pub eta_m: Option<Verdict>,
    pub evidence_e: Option<Evidence>,
    pub evidence_m: Option<Evidence>,
}

/// Verdicts for the sectors whose evidence is present. A sector whose
/// evidence could not be gathered gets `Undetermined`, never a guess.
pub fn classify_eta(
    e_run: Option<&Result<Evidence>>,
    m_run: Option<&Result<Evidence>>,
    cfg: &ClassifierConfig,
) -> SetClassification {
    let verdict = |run: Option<&Result<Evidence>>| {
        run.map(|r| match r {
            Ok(ev) => decide(ev, cfg),
            Err(_) => Verdict::Undetermined,
        })
    };
    SetClassification {
        eta_e: verdict(e_run),
        eta_m: verdict(m_run),
        evidence_e: e_run.and_then(|r| r.as_ref().ok().cloned()),
        evidence_m: m_run.and_then(|r| r.as_ref().ok().cloned()),
    }
}

/// Compute SCL curves for `params` in `sector` at each perimeter and gather evidence.
pub fn run_sector(
    params: &ModelParams,
    sector: Sector,
    lys: &[usize],
    tol: &Tolerances,
) -> Result<Evidence> {
    let p = params.with_detect(sector);
    let curves = lys
        .iter()
        .map(|&ly| analyze(&p, ly, tol).map(|a| a.curve))
        .collect::<Result<Vec<_>>>()?;
    gather_evidence(&curves)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub w: f64,
    pub ly: usize,
    pub gamma_00: Epsilon,
    /// `None` when the sector has no eigenvalue in the π branch.
    pub gamma_pipi: Option<Epsilon>,
    pub gaps: Vec<GapPoint>,
}

/// γ(0,0) and γ(π,π) over a grid of `w` and even perimeters, sorted by `(w, L_y)`.
pub fn sweep_w(
    params: &ModelParams,
    ws: &[f64],
    lys: &[usize],
    tol: &Tolerances,
) -> Result<Vec<SweepRow>> {
    if let Some(&ly) = lys.iter().find(|&&ly| ly % 2 != 0) {
        return Err(Error::UndefinedForOdd(ly));
    }
    let mut ws = ws.to_vec();
    ws.sort_by(f64::total_cmp);
    ws.dedup();
    let mut lys = lys.to_vec();
    lys.sort_unstable();
    lys.dedup();
    let mut rows = Vec::with_capacity(ws.len() * lys.len());
    for &w in &ws {
        let p = params.with_w(w)?;
        for &ly in &lys {
            let a = analyze(&p, ly, tol)?;
            let find = |k_index: usize, kx: Kx| {
                a.gaps
                    .iter()
                    .find(|g| g.k_index == k_index && g.kx == kx)
                    .map(|g| g.gamma)
            };
            rows.push(SweepRow {
                w,
                ly,
                gamma_00: find(0, Kx::Zero).expect("k_x = 0 gap always present"),
                gamma_pipi: find(ly / 2, Kx::Pi),
                gaps: a.gaps,
            });
        }
    }
    Ok(rows)
}
