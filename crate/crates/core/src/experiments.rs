//! Reproducible noise-sweep and witness experiments.
//!
//! [`simulate_data`] perturbs exact data `A x†` with noise of *exactly*
//! the advertised level δ (unit-normalized Gaussian directions), so that
//! the discrepancy principle's noise-level input is honest. Sequence
//! images get a Gaussian vector scaled to ℓ² norm δ; function images get
//! a random combination of the first 64 orthonormal basis elements with
//! the coefficient vector scaled to δ, which by orthonormality has L²
//! norm exactly δ. Everything is driven by a seeded ChaCha stream, so a
//! given seed reproduces the data bit for bit.
//!
//! [`run_rate_sweep`] walks a descending list of noise levels; for each
//! it simulates data, runs the discrepancy-principle grid walk, and
//! records the reconstruction error next to the certified error bound
//! `φ(δ)` when a verified rate profile is supplied. Rows where the grid
//! is exhausted are recorded with a status instead of aborting the whole
//! sweep. [`SweepReport::to_csv`] serializes rows in a fixed schema.
//!
//! [`run_beta1_demo`] tabulates the witness family showing that no
//! finite multiple of the image distance bounds the ℓ¹ defect, i.e. that
//! the exponent-one variational inequality is out of reach.

use crate::error::{Error, Result};
use crate::operators::{ImageVec, Operator};
use crate::piecewise::haar_combination;
use crate::rates::{negative_witness, RateProfile};
use crate::sequences::SeqVec;
use crate::solver::{select_alpha_discrepancy, GridOptions, SolveOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

/// Basis elements used to span function-space noise.
const FUNCTION_NOISE_MODES: usize = 64;

/// Relative ℓ¹ mass allowed beyond the truncation dimension.
const TRUNCATION_TAIL_FRACTION: f64 = 1e-3;

/// Exact data `A x†` plus noise of exactly norm `delta`, reproducible
/// from `seed`.
pub fn simulate_data(
    op: &Operator,
    x_dagger: &SeqVec,
    delta: f64,
    seed: u64,
) -> Result<ImageVec> {
    if delta < 0.0 || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise level must be nonnegative and finite, got {delta}"
        )));
    }
    let exact = op.apply(x_dagger);
    if delta == 0.0 {
        return Ok(exact);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = match exact.space() {
        "sequence" => {
            let dim = match &exact {
                ImageVec::Seq(s) => s.dim().max(1),
                ImageVec::Fun(_) => unreachable!("space tag says sequence"),
            };
            let raw: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::Degenerate("noise draw collapsed to zero".into()));
            }
            let scale = delta / norm;
            ImageVec::Seq(SeqVec::from_raw(raw.iter().map(|v| v * scale).collect()))
        }
        _ => {
            let raw: Vec<f64> = (0..FUNCTION_NOISE_MODES)
                .map(|_| rng.sample(StandardNormal))
                .collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::Degenerate("noise draw collapsed to zero".into()));
            }
            let scale = delta / norm;
            let coeffs: Vec<f64> = raw.iter().map(|v| v * scale).collect();
            ImageVec::Fun(haar_combination(&coeffs))
        }
    };
    exact.add_scaled(1.0, &noise)
}

/// What a sweep reconstructs against.
pub enum SweepTarget<'a> {
    /// Operator and reference only; the φ column is left as NaN.
    Plain {
        op: &'a Operator,
        x_dagger: &'a SeqVec,
    },
    /// A verified rate profile; rows carry the certified bound φ(δ).
    Certified(&'a RateProfile),
}

impl<'a> SweepTarget<'a> {
    fn op(&self) -> &'a Operator {
        match self {
            SweepTarget::Plain { op, .. } => op,
            SweepTarget::Certified(p) => p.operator(),
        }
    }

    fn x_dagger(&self) -> &'a SeqVec {
        match self {
            SweepTarget::Plain { x_dagger, .. } => x_dagger,
            SweepTarget::Certified(p) => p.x_dagger(),
        }
    }

    fn phi(&self, delta: f64) -> Result<f64> {
        match self {
            SweepTarget::Plain { .. } => Ok(f64::NAN),
            SweepTarget::Certified(p) => p.phi(delta),
        }
    }
}

/// Noise levels, truncation, solver/grid settings and the seed for one
/// sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Noise levels, strictly descending and positive.
    pub deltas: Vec<f64>,
    /// Dimension the minimization is restricted to.
    pub truncation: usize,
    /// Discrepancy-principle grid.
    pub grid: GridOptions,
    /// Per-solve iteration/tolerance settings.
    pub solve: SolveOptions,
    /// Base seed; row `i` uses `seed + i`.
    pub seed: u64,
}

/// Outcome of one noise level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    /// The discrepancy walk selected a weight.
    Ok,
    /// No grid weight met the residual bound.
    GridExhausted,
}

impl std::fmt::Display for RowStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowStatus::Ok => write!(f, "ok"),
            RowStatus::GridExhausted => write!(f, "grid-exhausted"),
        }
    }
}

/// One noise level of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    /// Noise level fed to the simulator and the discrepancy principle.
    pub delta: f64,
    /// Selected regularization weight (0 when the grid was exhausted).
    pub alpha: f64,
    /// `‖x_α − x†‖₁` (0 when the grid was exhausted).
    pub l1_error: f64,
    /// Data residual at the recorded solution (best residual seen when
    /// the grid was exhausted).
    pub residual: f64,
    /// Certified bound φ(δ); NaN without a rate profile.
    pub phi_delta: f64,
    /// Iterations summed over the grid walk (0 when exhausted).
    pub iterations: usize,
    /// Whether the walk selected a weight.
    pub status: RowStatus,
}

/// All rows of a sweep, in the order of the requested noise levels.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

/// Column order of [`SweepReport::to_csv`].
pub const SWEEP_CSV_HEADER: &str = "delta,alpha,l1_error,residual,phi_delta,iterations,status";

impl SweepReport {
    /// Fixed-schema CSV; float formatting is shortest-round-trip, so
    /// identical runs serialize identically.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.delta, r.alpha, r.l1_error, r.residual, r.phi_delta, r.iterations, r.status
            ));
        }
        out
    }
}

/// Runs the discrepancy-principle reconstruction once per noise level.
///
/// The truncation dimension must carry all but a `1e-3` fraction of the
/// reference's ℓ¹ mass, so that the truncation error cannot pollute the
/// measured rates. A row whose grid walk fails is recorded with
/// [`RowStatus::GridExhausted`] rather than failing the sweep.
pub fn run_rate_sweep(target: &SweepTarget, cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.deltas.is_empty() {
        return Err(Error::InvalidInput(
            "sweep needs at least one noise level".into(),
        ));
    }
    for d in &cfg.deltas {
        if *d <= 0.0 || !d.is_finite() {
            return Err(Error::InvalidInput(format!(
                "noise levels must be positive and finite, got {d}"
            )));
        }
    }
    for w in cfg.deltas.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::InvalidInput(
                "noise levels must be strictly descending".into(),
            ));
        }
    }
    let x_dagger = target.x_dagger();
    let op = target.op();
    if cfg.truncation == 0 {
        return Err(Error::InvalidParameter(
            "truncation dimension must be at least 1".into(),
        ));
    }
    let tail = x_dagger.tail_l1(cfg.truncation);
    if tail > TRUNCATION_TAIL_FRACTION * x_dagger.norm_l1() {
        return Err(Error::InvalidInput(format!(
            "truncation {} drops {tail:.3e} of the reference's ℓ¹ mass, above the {TRUNCATION_TAIL_FRACTION:e} fraction allowed",
            cfg.truncation
        )));
    }

    let mut rows = Vec::with_capacity(cfg.deltas.len());
    for (i, &delta) in cfg.deltas.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let y_delta = simulate_data(op, x_dagger, delta, seed)?;
        let phi_delta = target.phi(delta)?;
        match select_alpha_discrepancy(op, &y_delta, delta, cfg.truncation, &cfg.grid, &cfg.solve)
        {
            Ok(sel) => rows.push(SweepRow {
                delta,
                alpha: sel.alpha,
                l1_error: sel.result.x.sub(x_dagger).norm_l1(),
                residual: sel.result.residual_norm,
                phi_delta,
                iterations: sel.total_iterations,
                status: RowStatus::Ok,
            }),
            Err(Error::GridExhausted { best_residual, .. }) => rows.push(SweepRow {
                delta,
                alpha: 0.0,
                l1_error: 0.0,
                residual: best_residual,
                phi_delta,
                iterations: 0,
                status: RowStatus::GridExhausted,
            }),
            Err(other) => return Err(other),
        }
    }
    Ok(SweepReport { rows })
}

/// One witness row: how far the ℓ¹ defect outruns the image distance.
#[derive(Debug, Clone, Serialize)]
pub struct Beta1Row {
    /// Number of leading components shifted.
    pub n: usize,
    /// `‖x − x†‖₁ + ‖x†‖₁ − ‖x‖₁`.
    pub gap: f64,
    /// `‖A(x − x†)‖`.
    pub image_distance: f64,
    /// `gap / image_distance`; unbounded in `n`.
    pub ratio: f64,
}

/// Witness table for [`run_beta1_demo`].
#[derive(Debug, Clone, Serialize)]
pub struct Beta1Report {
    pub rows: Vec<Beta1Row>,
}

/// Column order of [`Beta1Report::to_csv`].
pub const BETA1_CSV_HEADER: &str = "n,gap,image_distance,ratio";

impl Beta1Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(BETA1_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.n, r.gap, r.image_distance, r.ratio
            ));
        }
        out
    }
}

/// Evaluates the exponent-one witness family at each requested depth.
///
/// The growing `ratio` column demonstrates that the ℓ¹ defect admits no
/// bound `β·‖x − x†‖₁ ≤ ‖x†‖₁ − ‖x‖₁ + C‖A(x − x†)‖` with `β = 1`.
pub fn run_beta1_demo(op: &Operator, x_dagger: &SeqVec, ns: &[usize]) -> Result<Beta1Report> {
    if ns.is_empty() {
        return Err(Error::InvalidInput(
            "witness demo needs at least one depth".into(),
        ));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let w = negative_witness(op, x_dagger, n)?;
        rows.push(Beta1Row {
            n: w.n,
            gap: w.gap,
            image_distance: w.image_distance,
            ratio: w.ratio,
        });
    }
    Ok(Beta1Report { rows })
}
