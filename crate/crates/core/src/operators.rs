//! The forward operators, their adjoints, and spectral diagnostics.
//!
//! Every operator here maps summable sequences into a Hilbert space and
//! is bounded but has no closed range, which is what makes the inverse
//! problem ill posed. Three kinds are provided:
//!
//! * [`Operator::diagonal`] — multiplication by a finite list of positive
//!   weights, mapping into ℓ². Components beyond the weight list are
//!   annihilated. This is the transparent reference case: everything
//!   about it is computable in closed form.
//! * [`Operator::bidiagonal`] — `[Ax]_k = (x_k − x_{k+1}) / k`, mapping
//!   into ℓ². Differencing composed with decaying scaling; its adjoint is
//!   `[A*η]_1 = η_1`, `[A*η]_k = η_k/k − η_{k−1}/(k−1)`.
//! * [`Operator::haar_integration`] — synthesis of the coefficient
//!   sequence in the Haar orthonormal basis of L²(0,1) followed by
//!   integration, `(Ax)(s) = ∫₀ˢ (Σ_k x_k u(k))(t) dt`. Its adjoint sends
//!   a function `y` to the Haar coefficients of `t ↦ ∫ₜ¹ y(s) ds`.
//!
//! Images live in [`ImageVec`], a tagged union of a sequence (ℓ²) and a
//! piecewise polynomial (L²(0,1)); mixing the two is reported as a space
//! mismatch rather than silently coerced.
//!
//! All function-space computations go through the exact piecewise
//! calculus in [`crate::piecewise`], so adjoint identities hold to
//! rounding error, not to quadrature error.

use crate::error::{Error, Result};
use crate::piecewise::{haar_coefficient, haar_combination, PiecewisePoly};
use crate::sequences::SeqVec;
use nalgebra::DMatrix;

/// An element of an operator's image space: either an ℓ² sequence or an
/// L²(0,1) function.
#[derive(Debug, Clone)]
pub enum ImageVec {
    Seq(SeqVec),
    Fun(PiecewisePoly),
}

impl ImageVec {
    /// Which space this element lives in; used in mismatch diagnostics.
    pub fn space(&self) -> &'static str {
        match self {
            ImageVec::Seq(_) => "sequence",
            ImageVec::Fun(_) => "function",
        }
    }

    /// Hilbert-space norm (ℓ² or L²).
    pub fn norm(&self) -> f64 {
        match self {
            ImageVec::Seq(v) => v.norm_l2(),
            ImageVec::Fun(g) => g.norm_l2(),
        }
    }

    /// Hilbert-space inner product; errors if the spaces differ.
    pub fn inner(&self, other: &ImageVec) -> Result<f64> {
        match (self, other) {
            (ImageVec::Seq(a), ImageVec::Seq(b)) => Ok(a.duality_pair(b)),
            (ImageVec::Fun(a), ImageVec::Fun(b)) => Ok(a.inner_unchecked(b)),
            (a, b) => Err(Error::SpaceMismatch {
                expected: a.space(),
                found: b.space(),
            }),
        }
    }

    /// `self + a·other`; errors if the spaces differ.
    pub fn add_scaled(&self, a: f64, other: &ImageVec) -> Result<ImageVec> {
        match (self, other) {
            (ImageVec::Seq(x), ImageVec::Seq(y)) => Ok(ImageVec::Seq(x.add(&y.scale(a)))),
            (ImageVec::Fun(x), ImageVec::Fun(y)) => Ok(ImageVec::Fun(x.add(&y.scale(a)))),
            (x, y) => Err(Error::SpaceMismatch {
                expected: x.space(),
                found: y.space(),
            }),
        }
    }

    /// `self − other`; errors if the spaces differ.
    pub fn sub(&self, other: &ImageVec) -> Result<ImageVec> {
        self.add_scaled(-1.0, other)
    }

    /// Scalar multiple.
    pub fn scale(&self, a: f64) -> ImageVec {
        match self {
            ImageVec::Seq(v) => ImageVec::Seq(v.scale(a)),
            ImageVec::Fun(g) => ImageVec::Fun(g.scale(a)),
        }
    }
}

/// Report of a least-squares search for a preimage under the adjoint.
///
/// For a target `t` and truncation level `n`, the minimizer of
/// `‖(A^(n))* f − t‖₂` over `f ∈ ℝⁿ` is computed via the normal
/// equations. A divergent `preimage_norm_sq` as `n` grows certifies that
/// the target lies outside the range of the adjoint.
#[derive(Debug, Clone)]
pub struct RangeTestReport {
    /// Squared ℓ² norm of the least-squares preimage.
    pub preimage_norm_sq: f64,
    /// Residual `‖(A^(n))* f − t‖₂` at the minimizer.
    pub residual_norm: f64,
    /// True if the normal equations needed a tiny ridge to factorize.
    pub regularized: bool,
}

/// A forward operator from summable sequences into ℓ² or L²(0,1).
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Diagonal { weights: Vec<f64> },
    Bidiagonal,
    HaarIntegration,
}

impl Operator {
    /// Diagonal operator with the given positive weights; components
    /// beyond the list are annihilated.
    pub fn diagonal(weights: Vec<f64>) -> Result<Operator> {
        if weights.is_empty() {
            return Err(Error::InvalidInput(
                "diagonal operator needs at least one weight".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidInput(
                "diagonal weights must be finite and positive".into(),
            ));
        }
        Ok(Operator::Diagonal { weights })
    }

    /// The scaled-differencing operator `[Ax]_k = (x_k − x_{k+1}) / k`.
    pub fn bidiagonal() -> Operator {
        Operator::Bidiagonal
    }

    /// Haar-basis synthesis followed by integration on \[0,1\].
    pub fn haar_integration() -> Operator {
        Operator::HaarIntegration
    }

    /// Stable identifier used in reports and the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Operator::Diagonal { .. } => "diagonal",
            Operator::Bidiagonal => "bidiagonal",
            Operator::HaarIntegration => "haar-integration",
        }
    }

    /// Which space images live in ("sequence" or "function").
    pub fn image_space(&self) -> &'static str {
        match self {
            Operator::HaarIntegration => "function",
            _ => "sequence",
        }
    }

    /// Applies the operator to a finitely supported sequence.
    ///
    /// The input is read as zero beyond its stored length, so the image
    /// is computed exactly, not approximated by truncation.
    pub fn apply(&self, x: &SeqVec) -> ImageVec {
        match self {
            Operator::Diagonal { weights } => {
                let n = x.dim().min(weights.len());
                let vals: Vec<f64> = (1..=n).map(|k| weights[k - 1] * x.get(k)).collect();
                ImageVec::Seq(SeqVec::from_raw(vals))
            }
            Operator::Bidiagonal => {
                let n = x.dim();
                let vals: Vec<f64> = (1..=n)
                    .map(|k| (x.get(k) - x.get(k + 1)) / k as f64)
                    .collect();
                ImageVec::Seq(SeqVec::from_raw(vals))
            }
            Operator::HaarIntegration => {
                let step = haar_combination(x.values());
                // A step function has degree 0, so its antiderivative has
                // degree 1 and can never hit the degree cap.
                let img = step
                    .antiderivative()
                    .expect("antiderivative of a step function is piecewise linear");
                ImageVec::Fun(img)
            }
        }
    }

    /// Applies the adjoint and truncates the result to `depth` components.
    ///
    /// Pairing the truncation with any `x` supported on the first `depth`
    /// components gives exactly `⟨Ax, y⟩`.
    pub fn adjoint(&self, y: &ImageVec, depth: usize) -> Result<SeqVec> {
        if depth == 0 {
            return Err(Error::InvalidParameter(
                "adjoint truncation depth must be at least 1".into(),
            ));
        }
        match (self, y) {
            (Operator::Diagonal { weights }, ImageVec::Seq(y)) => {
                let vals: Vec<f64> = (1..=depth)
                    .map(|k| weights.get(k - 1).copied().unwrap_or(0.0) * y.get(k))
                    .collect();
                Ok(SeqVec::from_raw(vals))
            }
            (Operator::Bidiagonal, ImageVec::Seq(y)) => {
                let vals: Vec<f64> = (1..=depth)
                    .map(|k| {
                        if k == 1 {
                            y.get(1)
                        } else {
                            y.get(k) / k as f64 - y.get(k - 1) / (k - 1) as f64
                        }
                    })
                    .collect();
                Ok(SeqVec::from_raw(vals))
            }
            (Operator::HaarIntegration, ImageVec::Fun(y)) => {
                // [A*y]_k = ⟨u(k), t ↦ ∫ₜ¹ y⟩.
                let co = y.co_antiderivative()?;
                let vals = (1..=depth)
                    .map(|k| haar_coefficient(&co, k))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(SeqVec::from_raw(vals))
            }
            (op, y) => Err(Error::SpaceMismatch {
                expected: op.image_space(),
                found: y.space(),
            }),
        }
    }

    /// Image-space norm of the `k`-th column `A e_k`, in closed form.
    pub fn column_norm(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "column index must be at least 1".into(),
            ));
        }
        Ok(match self {
            Operator::Diagonal { weights } => weights.get(k - 1).copied().unwrap_or(0.0),
            Operator::Bidiagonal => {
                if k == 1 {
                    1.0
                } else {
                    let k = k as f64;
                    (1.0 / (k * k) + 1.0 / ((k - 1.0) * (k - 1.0))).sqrt()
                }
            }
            Operator::HaarIntegration => {
                // ‖∫₀ˢ u(k)‖: 1/√3 for the constant element; the wavelet
                // at level l integrates to a hat of height 2^{−l/2−1} over
                // width 2^{−l}, giving 2^{−l−1}/√3.
                if k == 1 {
                    1.0 / 3f64.sqrt()
                } else {
                    let l = (k - 1).ilog2() as i32;
                    2f64.powi(-l - 1) / 3f64.sqrt()
                }
            }
        })
    }

    /// Partial sum `Σ_{k=1}^n ‖A e_k‖²` of the squared column norms.
    ///
    /// Convergence of these sums as `n → ∞` (to π²/3 in the bidiagonal
    /// case) witnesses that the operator is Hilbert–Schmidt, hence
    /// compact with non-closed range.
    pub fn hs_norm_sq_partial(&self, n: usize) -> f64 {
        (1..=n)
            .map(|k| {
                let c = self
                    .column_norm(k)
                    .expect("column index is at least 1 by construction");
                c * c
            })
            .sum()
    }

    /// The matrix of the operator restricted to the first `n` coordinates
    /// on both sides.
    ///
    /// Entry `(i, j)` (zero-based storage, one-based math) is the `i`-th
    /// image coordinate of `A e_j`: the plain component for sequence
    /// images, the Haar coefficient `⟨u(i), A e_j⟩` for function images.
    pub fn truncated_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        self.image_matrix(n, n)
    }

    /// Like [`Operator::truncated_matrix`] but with `rows` image
    /// coordinates, which lets callers capture image content beyond the
    /// square truncation (the image of a finitely supported sequence is
    /// generally not supported on the first `n` coordinates).
    pub fn image_matrix(&self, rows: usize, n: usize) -> Result<DMatrix<f64>> {
        if n == 0 || rows == 0 {
            return Err(Error::InvalidParameter(
                "matrix truncation dimensions must be at least 1".into(),
            ));
        }
        let mut m = DMatrix::zeros(rows, n);
        for j in 1..=n {
            let col = self.apply(&SeqVec::unit(j)?);
            match &col {
                ImageVec::Seq(v) => {
                    for i in 1..=rows {
                        m[(i - 1, j - 1)] = v.get(i);
                    }
                }
                ImageVec::Fun(g) => {
                    for i in 1..=rows {
                        m[(i - 1, j - 1)] = haar_coefficient(g, i)?;
                    }
                }
            }
        }
        Ok(m)
    }

    /// Least-squares preimage of `target` under the truncated adjoint.
    ///
    /// Minimizes `‖(A^(n))* f − t‖₂` over `f ∈ ℝⁿ` via the normal
    /// equations `M Mᵀ f = M t` with `M` the truncated operator matrix.
    /// If the Cholesky factorization fails, a ridge of `1e−12` times the
    /// mean diagonal is added and the report is flagged.
    pub fn range_test_lsq(&self, target: &SeqVec, n: usize) -> Result<RangeTestReport> {
        let m = self.truncated_matrix(n)?;
        let t = nalgebra::DVector::from_fn(n, |i, _| target.get(i + 1));
        let gram = &m * m.transpose();
        let rhs = &m * &t;
        let (solution, regularized) = match gram.clone().cholesky() {
            Some(chol) => (chol.solve(&rhs), false),
            None => {
                let ridge = 1e-12 * gram.trace() / n as f64;
                let mut damped = gram;
                for i in 0..n {
                    damped[(i, i)] += ridge;
                }
                let chol = damped.cholesky().ok_or_else(|| {
                    Error::Degenerate(
                        "normal equations not positive definite even after ridge".into(),
                    )
                })?;
                (chol.solve(&rhs), true)
            }
        };
        let residual = (m.transpose() * &solution - t).norm();
        Ok(RangeTestReport {
            preimage_norm_sq: solution.norm_squared(),
            residual_norm: residual,
            regularized,
        })
    }
}
