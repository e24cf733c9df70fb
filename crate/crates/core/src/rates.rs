//! Certified convergence rates: the rate function, the variational
//! inequality it powers, and the impossibility witness for exponent one.
//!
//! Given verified source-set families (one per rung `n` of a ladder, all
//! sharing the interference constant `c`) and a reference solution `x†`,
//! the rate function is the concave envelope
//!
//! ```text
//! φ(t) = 2 · min_n [ tail_n(x†)  +  t · S_n / (1 + c) ]
//! ```
//!
//! where `tail_n(x†)` is the ℓ¹ mass of `x†` beyond position `n` and
//! `S_n = Σ_k ‖f(n,k)‖` sums the functional norms of the rung-`n` family.
//! As a minimum of nonnegative affine functions, φ is concave and
//! nondecreasing with `φ(0) = 2·min_n tail_n`.
//!
//! The payoff is a *variational inequality* with exponent
//! `β = (1−c)/(1+c)`: for every candidate `x`,
//!
//! ```text
//! ‖x‖₁ − ‖x†‖₁ + φ(‖A(x − x†)‖) ≥ β · ‖x − x†‖₁,
//! ```
//!
//! which converts data misfit into ℓ¹ reconstruction error and yields the
//! rate `‖x_α − x†‖₁ = O(φ(δ))` under the discrepancy parameter choice.
//! [`RateProfile::vie_margin`] evaluates the left minus the right side;
//! nonnegativity is what the test suite certifies sample by sample.
//!
//! `β = 1` is impossible for these operators: [`negative_witness`]
//! produces, for each `n`, a perturbation whose ℓ¹ defect stays bounded
//! below while its image distance shrinks like `1/n`, so no rate function
//! with `φ(0⁺) → 0` can close the inequality at exponent one.

use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::sequences::SeqVec;
use crate::source_sets::SourceCandidate;

/// The variational-inequality exponent `β = (1−c)/(1+c)` attached to an
/// interference constant `c ∈ [0, 1)`.
pub fn beta_of_c(c: f64) -> Result<f64> {
    if !c.is_finite() || !(0.0..1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!(
            "interference constant must lie in [0,1), got {c}"
        )));
    }
    Ok((1.0 - c) / (1.0 + c))
}

/// One rung of the rate function: the affine piece contributed by the
/// source family at dimension `n`.
#[derive(Debug, Clone)]
pub struct Rung {
    /// Reference dimension of the contributing family.
    pub n: usize,
    /// `tail_n(x†)`, the ℓ¹ mass of the reference beyond `n`.
    pub tail: f64,
    /// `S_n / (1+c)`, the slope of the piece before the outer factor 2.
    pub slope: f64,
}

/// The rate function φ for a fixed reference solution and source ladder,
/// together with everything needed to evaluate the variational
/// inequality it certifies.
#[derive(Debug, Clone)]
pub struct RateProfile {
    operator: Operator,
    c: f64,
    beta: f64,
    x_dagger: SeqVec,
    rungs: Vec<Rung>,
}

impl RateProfile {
    /// Builds the profile from a ladder of source families (all for the
    /// same operator and constant) and the reference solution.
    pub fn build(candidates: &[SourceCandidate], x_dagger: &SeqVec) -> Result<Self> {
        let Some(first) = candidates.first() else {
            return Err(Error::InvalidInput(
                "a rate profile needs at least one source family".into(),
            ));
        };
        let c = first.c();
        let operator = first.operator().clone();
        for cand in candidates {
            if cand.operator().name() != operator.name() {
                return Err(Error::InvalidInput(format!(
                    "mixed operators in ladder: {} and {}",
                    operator.name(),
                    cand.operator().name()
                )));
            }
            if (cand.c() - c).abs() > 1e-14 {
                return Err(Error::InvalidInput(format!(
                    "mixed interference constants in ladder: {c} and {}",
                    cand.c()
                )));
            }
        }
        let mut rungs: Vec<Rung> = candidates
            .iter()
            .map(|cand| Rung {
                n: cand.n(),
                tail: x_dagger.tail_l1(cand.n()),
                slope: cand.norm_sum() / (1.0 + c),
            })
            .collect();
        rungs.sort_by_key(|r| r.n);
        if rungs.windows(2).any(|w| w[0].n == w[1].n) {
            return Err(Error::InvalidInput(
                "duplicate rung dimension in ladder".into(),
            ));
        }
        Ok(Self {
            operator,
            c,
            beta: beta_of_c(c)?,
            x_dagger: x_dagger.clone(),
            rungs,
        })
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// The certified exponent `(1−c)/(1+c)`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn x_dagger(&self) -> &SeqVec {
        &self.x_dagger
    }

    pub fn rungs(&self) -> &[Rung] {
        &self.rungs
    }

    /// Evaluates `φ(t) = 2·min_n (tail_n + slope_n · t)` for `t ≥ 0`.
    pub fn phi(&self, t: f64) -> Result<f64> {
        Ok(2.0 * self.best_rung_value(t)?.1)
    }

    /// The rung attaining the minimum at `t`, preferring the smallest `n`
    /// on ties; useful for reporting which truncation level drives the
    /// rate at a given noise scale.
    pub fn active_rung(&self, t: f64) -> Result<&Rung> {
        Ok(self.best_rung_value(t)?.0)
    }

    fn best_rung_value(&self, t: f64) -> Result<(&Rung, f64)> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "the rate function is defined for t ≥ 0, got {t}"
            )));
        }
        let mut best: Option<(&Rung, f64)> = None;
        for rung in &self.rungs {
            let value = rung.tail + rung.slope * t;
            // Strict comparison keeps the earliest (smallest-n) minimizer.
            if best.as_ref().is_none_or(|(_, b)| value < *b) {
                best = Some((rung, value));
            }
        }
        Ok(best.expect("profiles are built with at least one rung"))
    }

    /// The slack in the variational inequality at `x`:
    ///
    /// `‖x‖₁ − ‖x†‖₁ + φ(‖A(x − x†)‖) − β‖x − x†‖₁`.
    ///
    /// Theory puts this at ≥ 0 for every `x`; numerics shave at most a
    /// few rounding errors off.
    pub fn vie_margin(&self, x: &SeqVec) -> Result<f64> {
        let diff = x.sub(&self.x_dagger);
        let image_dist = self.operator.apply(&diff).norm();
        Ok(x.norm_l1() - self.x_dagger.norm_l1() + self.phi(image_dist)?
            - self.beta * diff.norm_l1())
    }
}

/// A perturbation witnessing that exponent `β = 1` cannot hold.
#[derive(Debug, Clone)]
pub struct Beta1Witness {
    /// Head length used for the perturbation.
    pub n: usize,
    /// The perturbed sequence `x† ∓ ‖x†‖_∞ · (e₁ + … + e_n)`.
    pub x: SeqVec,
    /// The ℓ¹ defect `‖x − x†‖₁ + ‖x†‖₁ − ‖x‖₁` the inequality must absorb.
    pub gap: f64,
    /// `‖A(x − x†)‖`, the image distance available to absorb it.
    pub image_distance: f64,
    /// `gap / image_distance`; divergence in `n` rules out `β = 1`.
    pub ratio: f64,
}

/// Builds the exponent-one witness at head length `n`: shifting the first
/// `n` components of `x†` down by its sup norm (up, if no component in
/// the head is positive) costs an ℓ¹ defect of twice the head mass of the
/// dominant sign, while the image moves only by `‖A(‖x†‖_∞·1_head)‖` —
/// for the scaled-differencing operator, exactly `‖x†‖_∞ / n`.
pub fn negative_witness(op: &Operator, x_dagger: &SeqVec, n: usize) -> Result<Beta1Witness> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "witness head length must be at least 1".into(),
        ));
    }
    let sup = x_dagger.norm_sup();
    if sup == 0.0 {
        return Err(Error::Degenerate(
            "the exponent-one witness needs a nonzero reference".into(),
        ));
    }
    let positive_head_mass: f64 = (1..=n).map(|k| x_dagger.get(k).max(0.0)).sum();
    let shift = if positive_head_mass > 0.0 { -sup } else { sup };
    let head = SeqVec::new(vec![shift; n])?;
    let x = x_dagger.add(&head);
    let gap = x.sub(x_dagger).norm_l1() + x_dagger.norm_l1() - x.norm_l1();
    let image_distance = op.apply(&x.sub(x_dagger)).norm();
    if image_distance == 0.0 {
        return Err(Error::Degenerate(
            "perturbation is invisible to the operator".into(),
        ));
    }
    Ok(Beta1Witness {
        n,
        x,
        gap,
        image_distance,
        ratio: gap / image_distance,
    })
}
