//! Exact piecewise-polynomial calculus on \[0,1\] with dyadic breakpoints.
//!
//! Everything the Haar-integration pipeline produces — step functions,
//! their antiderivatives, residuals, products for inner products — is a
//! polynomial between consecutive dyadic rationals. Storing the
//! breakpoints exactly (as integer pairs `num / 2^exp`) means two grids
//! merge without any interval-matching tolerance: equal breakpoints are
//! *equal*, not merely close. Integration and inner products are then
//! evaluated in closed form; no quadrature appears anywhere.
//!
//! Coefficients are `f64` in the global variable `s` (not shifted per
//! piece), so the only numerical error in an inner product is ordinary
//! floating-point rounding of the closed-form antiderivative evaluations.
//!
//! The degree of every stored piece is capped at [`MAX_DEGREE`]: the
//! pipeline needs at most degree 2, so a higher degree indicates a logic
//! error and is reported as a capacity failure instead of growing
//! silently.

use crate::error::{Error, Result};

/// Maximum polynomial degree a stored piece may have.
pub const MAX_DEGREE: usize = 4;

/// A dyadic rational `num / 2^exp` in canonical form (`num` odd or zero).
///
/// Canonical form makes derived equality and hashing valid; the ordering
/// compares cross-multiplied integers, so it is exact for all values used
/// here (exponents stay far below the `u128` headroom).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: u64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    /// Builds `num / 2^exp` and reduces it to canonical form.
    pub fn new(mut num: u64, mut exp: u32) -> Dyadic {
        debug_assert!(exp <= 60, "dyadic exponent {exp} too large for exact compare");
        while exp > 0 && num.is_multiple_of(2) {
            num /= 2;
            exp -= 1;
        }
        if num == 0 {
            exp = 0;
        }
        Dyadic { num, exp }
    }

    /// Exact conversion; every canonical value in \[0,1\] fits an `f64`.
    pub fn to_f64(self) -> f64 {
        self.num as f64 * 0.5f64.powi(self.exp as i32)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let lhs = (self.num as u128) << other.exp;
        let rhs = (other.num as u128) << self.exp;
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for Dyadic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1u64 << self.exp)
        }
    }
}

impl std::fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Display::fmt(self, f)
    }
}

// ---------------------------------------------------------------------------
// Polynomial helpers on coefficient slices (ascending degree, global `s`).
// ---------------------------------------------------------------------------

fn poly_eval(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Antiderivative coefficients with zero constant term.
fn poly_antider(coeffs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(coeffs.len() + 1);
    out.push(0.0);
    for (i, &c) in coeffs.iter().enumerate() {
        out.push(c / (i + 1) as f64);
    }
    out
}

/// Exact `∫_a^b` of the polynomial with the given coefficients.
fn poly_integral(coeffs: &[f64], a: f64, b: f64) -> f64 {
    let anti = poly_antider(coeffs);
    poly_eval(&anti, b) - poly_eval(&anti, a)
}

fn trim_trailing_zeros(mut coeffs: Vec<f64>) -> Vec<f64> {
    while coeffs.last() == Some(&0.0) {
        coeffs.pop();
    }
    coeffs
}

// ---------------------------------------------------------------------------
// PiecewisePoly
// ---------------------------------------------------------------------------

/// A piecewise polynomial on \[0,1\] with exact dyadic breakpoints.
///
/// `breakpoints` has one more entry than `pieces`; piece `i` is the
/// polynomial on `(breakpoints[i], breakpoints[i+1])`. Values *at*
/// breakpoints are irrelevant in L²; [`PiecewisePoly::eval`] returns the
/// right-limit by convention (and the left limit at `s = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    breakpoints: Vec<Dyadic>,
    pieces: Vec<Vec<f64>>,
}

impl PiecewisePoly {
    /// Validates breakpoints (sorted, spanning \[0,1\]) and coefficients
    /// (finite, degree ≤ [`MAX_DEGREE`] after trimming exact zeros).
    pub fn new(breakpoints: Vec<Dyadic>, pieces: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidInput(
                "a piecewise polynomial needs at least two breakpoints".into(),
            ));
        }
        if breakpoints.len() != pieces.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints require {} pieces, found {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                pieces.len()
            )));
        }
        if breakpoints[0] != Dyadic::ZERO || *breakpoints.last().unwrap() != Dyadic::ONE {
            return Err(Error::InvalidInput(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        let pieces: Vec<Vec<f64>> = pieces.into_iter().map(trim_trailing_zeros).collect();
        for piece in &pieces {
            if piece.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(
                    "non-finite polynomial coefficient".into(),
                ));
            }
            if piece.len() > MAX_DEGREE + 1 {
                return Err(Error::Capacity {
                    degree: piece.len() - 1,
                    max: MAX_DEGREE,
                });
            }
        }
        Ok(Self {
            breakpoints,
            pieces,
        })
    }

    /// Internal constructor for already-validated data.
    fn from_raw(breakpoints: Vec<Dyadic>, pieces: Vec<Vec<f64>>) -> Self {
        Self {
            breakpoints,
            pieces,
        }
    }

    /// The constant function `v`.
    pub fn constant(v: f64) -> Result<Self> {
        Self::new(vec![Dyadic::ZERO, Dyadic::ONE], vec![vec![v]])
    }

    /// The zero function.
    pub fn zero() -> Self {
        Self::from_raw(vec![Dyadic::ZERO, Dyadic::ONE], vec![Vec::new()])
    }

    pub fn breakpoints(&self) -> &[Dyadic] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    /// Largest piece degree (0 for the zero function).
    pub fn degree(&self) -> usize {
        self.pieces
            .iter()
            .map(|p| p.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    /// Evaluates at `s ∈ [0,1]`, returning the right-limit at interior
    /// breakpoints and the final piece's value at `s = 1`.
    pub fn eval(&self, s: f64) -> f64 {
        // Index of the last breakpoint ≤ s, clamped to a valid piece.
        let mut idx = match self
            .breakpoints
            .iter()
            .position(|b| b.to_f64() > s)
        {
            Some(0) | None => {
                if s >= 1.0 {
                    self.pieces.len() - 1
                } else {
                    0
                }
            }
            Some(p) => p - 1,
        };
        idx = idx.min(self.pieces.len() - 1);
        poly_eval(&self.pieces[idx], s)
    }

    /// Entrywise sum on the merged breakpoint grid; the degree of a sum
    /// never exceeds its operands', so this cannot overflow the cap.
    pub fn add(&self, other: &PiecewisePoly) -> PiecewisePoly {
        let mut pieces = Vec::new();
        let mut breaks = Vec::new();
        for seg in merged_segments(self, other) {
            breaks.push(seg.lo);
            let a = &self.pieces[seg.left_piece];
            let b = &other.pieces[seg.right_piece];
            let mut sum = vec![0.0; a.len().max(b.len())];
            for (i, &c) in a.iter().enumerate() {
                sum[i] += c;
            }
            for (i, &c) in b.iter().enumerate() {
                sum[i] += c;
            }
            pieces.push(trim_trailing_zeros(sum));
        }
        breaks.push(Dyadic::ONE);
        PiecewisePoly::from_raw(breaks, pieces)
    }

    /// Scalar multiple.
    pub fn scale(&self, a: f64) -> PiecewisePoly {
        let pieces = self
            .pieces
            .iter()
            .map(|p| trim_trailing_zeros(p.iter().map(|c| a * c).collect()))
            .collect();
        Self::from_raw(self.breakpoints.clone(), pieces)
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &PiecewisePoly) -> PiecewisePoly {
        self.add(&other.scale(-1.0))
    }

    /// `s ↦ ∫₀ˢ g(t) dt`, continuous with value 0 at 0.
    pub fn antiderivative(&self) -> Result<PiecewisePoly> {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        let mut running = 0.0; // ∫₀^{b_i} accumulated so far
        for (i, piece) in self.pieces.iter().enumerate() {
            if piece.len() > MAX_DEGREE {
                return Err(Error::Capacity {
                    degree: piece.len(),
                    max: MAX_DEGREE,
                });
            }
            let lo = self.breakpoints[i].to_f64();
            let hi = self.breakpoints[i + 1].to_f64();
            let mut anti = poly_antider(piece);
            // Shift so the antiderivative equals `running` at the left endpoint.
            anti[0] = running - poly_eval(&anti, lo);
            running = poly_eval(&anti, hi);
            pieces.push(trim_trailing_zeros(anti));
        }
        Ok(PiecewisePoly::from_raw(self.breakpoints.clone(), pieces))
    }

    /// `t ↦ ∫ₜ¹ g(s) ds`, continuous with value 0 at 1.
    pub fn co_antiderivative(&self) -> Result<PiecewisePoly> {
        let anti = self.antiderivative()?;
        let total = anti.eval(1.0);
        // ∫ₜ¹ = ∫₀¹ − ∫₀ᵗ.
        let mut out = anti.scale(-1.0);
        for piece in &mut out.pieces {
            if piece.is_empty() {
                piece.push(total);
            } else {
                piece[0] += total;
            }
            *piece = trim_trailing_zeros(std::mem::take(piece));
        }
        Ok(out)
    }

    /// `∫₀¹ g`, summed piece by piece.
    pub fn integral(&self) -> f64 {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                poly_integral(
                    p,
                    self.breakpoints[i].to_f64(),
                    self.breakpoints[i + 1].to_f64(),
                )
            })
            .sum()
    }

    /// `∫₀¹ g·h` on the merged breakpoint grid.
    ///
    /// Errors with a capacity failure if a product's degree would exceed
    /// [`MAX_DEGREE`]; the pipeline never produces such products, so the
    /// error flags misuse rather than a numerical limitation.
    pub fn inner_l2(&self, other: &PiecewisePoly) -> Result<f64> {
        for seg in merged_segments(self, other) {
            let da = self.pieces[seg.left_piece].len().saturating_sub(1);
            let db = other.pieces[seg.right_piece].len().saturating_sub(1);
            if !self.pieces[seg.left_piece].is_empty()
                && !other.pieces[seg.right_piece].is_empty()
                && da + db > MAX_DEGREE
            {
                return Err(Error::Capacity {
                    degree: da + db,
                    max: MAX_DEGREE,
                });
            }
        }
        Ok(self.inner_unchecked(other))
    }

    /// Inner product without the degree cap; used internally for norms,
    /// which are always well defined for stored (cap-respecting) pieces.
    pub(crate) fn inner_unchecked(&self, other: &PiecewisePoly) -> f64 {
        let mut total = 0.0;
        for seg in merged_segments(self, other) {
            let a = &self.pieces[seg.left_piece];
            let b = &other.pieces[seg.right_piece];
            if a.is_empty() || b.is_empty() {
                continue;
            }
            total += poly_integral(&poly_mul(a, b), seg.lo.to_f64(), seg.hi.to_f64());
        }
        total
    }

    /// `‖g‖_{L²}`.
    pub fn norm_l2(&self) -> f64 {
        self.inner_unchecked(self).max(0.0).sqrt()
    }

    /// Diagnostic JSON: a list of `{interval: ["a","b"], coeffs: [...]}`
    /// with the dyadic endpoints rendered exactly.
    pub fn to_debug_json(&self) -> serde_json::Value {
        let items: Vec<serde_json::Value> = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                serde_json::json!({
                    "interval": [
                        self.breakpoints[i].to_string(),
                        self.breakpoints[i + 1].to_string(),
                    ],
                    "coeffs": p,
                })
            })
            .collect();
        serde_json::json!({ "pieces": items })
    }
}

/// One interval of the merged grid with the active piece on each side.
struct Segment {
    lo: Dyadic,
    hi: Dyadic,
    left_piece: usize,
    right_piece: usize,
}

/// Walks the union of both breakpoint grids. Both functions span \[0,1\],
/// so every merged interval lies inside exactly one piece of each.
fn merged_segments(a: &PiecewisePoly, b: &PiecewisePoly) -> Vec<Segment> {
    let mut merged: Vec<Dyadic> = Vec::with_capacity(a.breakpoints.len() + b.breakpoints.len());
    let (mut i, mut j) = (0, 0);
    while i < a.breakpoints.len() || j < b.breakpoints.len() {
        let next = match (a.breakpoints.get(i), b.breakpoints.get(j)) {
            (Some(&x), Some(&y)) => {
                if x <= y {
                    i += 1;
                    if x == y {
                        j += 1;
                    }
                    x
                } else {
                    j += 1;
                    y
                }
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => break,
        };
        merged.push(next);
    }

    let mut segments = Vec::with_capacity(merged.len() - 1);
    let (mut pa, mut pb) = (0usize, 0usize);
    for w in merged.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        while pa + 1 < a.pieces.len() && a.breakpoints[pa + 1] <= lo {
            pa += 1;
        }
        while pb + 1 < b.pieces.len() && b.breakpoints[pb + 1] <= lo {
            pb += 1;
        }
        segments.push(Segment {
            lo,
            hi,
            left_piece: pa,
            right_piece: pb,
        });
    }
    segments
}

impl PiecewisePoly {
    /// Exact `∫_lo^hi g` for dyadic bounds `0 ≤ lo ≤ hi ≤ 1`.
    ///
    /// Binary-searches the first overlapping piece, so integrating over a
    /// short window costs O(log pieces + pieces inside the window).
    pub(crate) fn integral_between(&self, lo: Dyadic, hi: Dyadic) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        // Last piece whose left endpoint is ≤ lo.
        let start = self
            .breakpoints
            .partition_point(|b| *b <= lo)
            .saturating_sub(1)
            .min(self.pieces.len() - 1);
        let mut total = 0.0;
        for i in start..self.pieces.len() {
            let piece_lo = self.breakpoints[i];
            if piece_lo >= hi {
                break;
            }
            let piece_hi = self.breakpoints[i + 1];
            let a = piece_lo.max(lo).to_f64();
            let b = piece_hi.min(hi).to_f64();
            if b > a {
                total += poly_integral(&self.pieces[i], a, b);
            }
        }
        total
    }
}

/// The step function `Σ_k coeffs[k−1] · u(k)` over the Haar basis,
/// assembled in one pass on the uniform dyadic grid that refines every
/// contributing wavelet.
///
/// This is O(n log n) rather than the O(n²) of repeated pairwise `add`,
/// and exact: each cell value is a plain floating-point sum of the
/// contributing amplitudes.
pub fn haar_combination(coeffs: &[f64]) -> PiecewisePoly {
    // Finest level among contributing elements; element k ≥ 2 lives on
    // level l = ⌊log₂(k−1)⌋ and needs grid exponent l + 1.
    let max_level = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, _)| if i == 0 { 0 } else { i.ilog2() + 1 })
        .max();
    let Some(grid_exp) = max_level else {
        return PiecewisePoly::zero();
    };
    let cells = 1u64 << grid_exp;
    let mut values = vec![0.0f64; cells as usize];
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let k = i + 1;
        if k == 1 {
            for v in &mut values {
                *v += c;
            }
            continue;
        }
        let l = (k - 1).ilog2();
        let j = (k - 1 - (1usize << l)) as u64;
        let amp = c * 2f64.powi(l as i32).sqrt();
        let width = cells >> (l + 1); // cells per half-support
        let start = 2 * j * width;
        for v in &mut values[start as usize..(start + width) as usize] {
            *v += amp;
        }
        for v in &mut values[(start + width) as usize..(start + 2 * width) as usize] {
            *v -= amp;
        }
    }
    let breakpoints = (0..=cells).map(|i| Dyadic::new(i, grid_exp)).collect();
    let pieces = values
        .into_iter()
        .map(|v| if v == 0.0 { Vec::new() } else { vec![v] })
        .collect();
    PiecewisePoly::from_raw(breakpoints, pieces)
}

/// The Haar coefficient `⟨u(k), g⟩` of an arbitrary piecewise polynomial,
/// computed from windowed integrals over the wavelet's support.
pub fn haar_coefficient(g: &PiecewisePoly, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "Haar index must be at least 1".into(),
        ));
    }
    if k == 1 {
        return Ok(g.integral());
    }
    let l = (k - 1).ilog2();
    let j = (k - 1 - (1usize << l)) as u64;
    let lo = Dyadic::new(j, l);
    let mid = Dyadic::new(2 * j + 1, l + 1);
    let hi = Dyadic::new(j + 1, l);
    let amp = 2f64.powi(l as i32).sqrt();
    Ok(amp * (g.integral_between(lo, mid) - g.integral_between(mid, hi)))
}

/// The `k`-th element of the Haar orthonormal basis of L²(0,1).
///
/// `k = 1` is the constant function 1. For `k ≥ 2` the unique
/// decomposition `k = 1 + 2^l + j` with `0 ≤ j ≤ 2^l − 1` selects the
/// wavelet `ψ_{l,j}(s) = 2^{l/2} ψ(2^l s − j)`, where ψ is `+1` on
/// (0,½) and `−1` on (½,1). Every element has unit L² norm.
pub fn haar_element(k: usize) -> Result<PiecewisePoly> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "Haar index must be at least 1".into(),
        ));
    }
    if k == 1 {
        return PiecewisePoly::constant(1.0);
    }
    let l = (k - 1).ilog2();
    let j = (k - 1 - (1usize << l)) as u64;
    let amp = 2f64.powi(l as i32).sqrt();

    let mut breaks = vec![Dyadic::ZERO];
    let mut pieces: Vec<Vec<f64>> = Vec::new();
    let start = Dyadic::new(j, l);
    if start != Dyadic::ZERO {
        pieces.push(Vec::new());
        breaks.push(start);
    }
    breaks.push(Dyadic::new(2 * j + 1, l + 1));
    pieces.push(vec![amp]);
    let end = Dyadic::new(j + 1, l);
    breaks.push(end);
    pieces.push(vec![-amp]);
    if end != Dyadic::ONE {
        breaks.push(Dyadic::ONE);
        pieces.push(Vec::new());
    }
    Ok(PiecewisePoly::from_raw(breaks, pieces))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite 3-point Gauss–Legendre quadrature on the uniform dyadic
    /// grid of `2^resolution_exp` cells, restricted to cells
    /// `[cell_lo, cell_hi)`. Exact for piecewise polynomials of degree ≤ 5
    /// whose breakpoints lie on the grid, and — because all nodes are
    /// interior — independent of the right-limit evaluation convention.
    /// This is the module's independent integration oracle: it only ever
    /// calls `eval`.
    fn gauss3<F: Fn(f64) -> f64>(f: F, resolution_exp: u32, cell_lo: u64, cell_hi: u64) -> f64 {
        let h = 0.5f64.powi(resolution_exp as i32);
        let r = 0.6f64.sqrt(); // node offset sqrt(3/5)
        let w = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
        let mut total = 0.0;
        for i in cell_lo..cell_hi {
            let mid = (i as f64 + 0.5) * h;
            let half = 0.5 * h;
            total += h
                * (w[0] * f(mid - r * half) + w[1] * f(mid) + w[2] * f(mid + r * half));
        }
        total
    }

    fn oracle_integral(g: &PiecewisePoly, resolution_exp: u32) -> f64 {
        gauss3(|s| g.eval(s), resolution_exp, 0, 1 << resolution_exp)
    }

    #[test]
    fn dyadic_normalization_and_order() {
        assert_eq!(Dyadic::new(2, 2), Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(4, 2), Dyadic::ONE);
        assert_eq!(Dyadic::new(0, 5), Dyadic::ZERO);
        assert!(Dyadic::new(1, 2) < Dyadic::new(3, 3)); // 1/4 < 3/8
        assert!(Dyadic::new(3, 2) > Dyadic::new(5, 3)); // 3/4 > 5/8
        assert_eq!(Dyadic::new(3, 3).to_f64(), 0.375);
        assert_eq!(Dyadic::new(3, 3).to_string(), "3/8");
        assert_eq!(Dyadic::ONE.to_string(), "1");
    }

    #[test]
    fn haar_element_first_is_constant_one() {
        let u1 = haar_element(1).unwrap();
        assert_eq!(u1.pieces(), &[vec![1.0]]);
        assert_eq!(u1.eval(0.3), 1.0);
    }

    #[test]
    fn haar_element_two_is_mother_wavelet() {
        let psi = haar_element(2).unwrap();
        assert_eq!(psi.eval(0.0), 1.0);
        assert_eq!(psi.eval(0.25), 1.0);
        assert_eq!(psi.eval(0.5), -1.0, "right-limit at the breakpoint");
        assert_eq!(psi.eval(1.0), -1.0);
    }

    #[test]
    fn haar_element_three_is_first_level_one_wavelet() {
        // k = 3 = 1 + 2^1 + 0 → ψ_{1,0}: √2 on (0,¼), −√2 on (¼,½), 0 after.
        let psi10 = haar_element(3).unwrap();
        let s2 = 2f64.sqrt();
        assert_eq!(psi10.eval(0.1), s2);
        assert_eq!(psi10.eval(0.3), -s2);
        assert_eq!(psi10.eval(0.7), 0.0);
    }

    #[test]
    fn haar_element_four_is_second_level_one_wavelet() {
        // k = 4 = 1 + 2^1 + 1 → ψ_{1,1}: supported on (½,1).
        let psi11 = haar_element(4).unwrap();
        let s2 = 2f64.sqrt();
        assert_eq!(psi11.eval(0.3), 0.0);
        assert_eq!(psi11.eval(0.6), s2);
        assert_eq!(psi11.eval(0.9), -s2);
    }

    #[test]
    fn haar_element_zero_rejected() {
        assert!(haar_element(0).is_err());
    }

    #[test]
    fn haar_elements_have_unit_norm() {
        for k in 1..=64 {
            let u = haar_element(k).unwrap();
            assert!(
                (u.norm_l2() - 1.0).abs() <= 1e-12,
                "‖u({k})‖ = {}",
                u.norm_l2()
            );
        }
    }

    #[test]
    fn haar_gram_matrix_is_identity() {
        let elements: Vec<_> = (1..=64).map(|k| haar_element(k).unwrap()).collect();
        for (i, u) in elements.iter().enumerate() {
            for (j, v) in elements.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                let got = u.inner_l2(v).unwrap();
                assert!(
                    (got - expected).abs() <= 1e-12,
                    "⟨u({}), u({})⟩ = {got}",
                    i + 1,
                    j + 1
                );
            }
        }
    }

    #[test]
    fn antiderivative_of_mother_wavelet_is_hat() {
        let hat = haar_element(2).unwrap().antiderivative().unwrap();
        assert_eq!(hat.eval(0.0), 0.0);
        assert!((hat.eval(0.5) - 0.5).abs() <= 1e-15, "peak value ½ at ½");
        assert!((hat.eval(0.25) - 0.25).abs() <= 1e-15, "t on (0,½)");
        assert!((hat.eval(0.75) - 0.25).abs() <= 1e-15, "1−t on (½,1)");
        assert!(hat.eval(1.0).abs() <= 1e-15);
        // Compare against the quadrature oracle at several partial uppers.
        for cells in [1u64, 2, 3] {
            let expected = gauss3(|s| haar_element(2).unwrap().eval(s), 2, 0, cells);
            assert!((hat.eval(cells as f64 / 4.0) - expected).abs() <= 1e-14);
        }
    }

    #[test]
    fn antiderivative_of_constant_is_linear() {
        let a = PiecewisePoly::constant(1.0).unwrap().antiderivative().unwrap();
        assert_eq!(a.pieces(), &[vec![0.0, 1.0]]);
    }

    #[test]
    fn antiderivative_of_zero_is_zero() {
        let z = PiecewisePoly::zero().antiderivative().unwrap();
        assert_eq!(z.norm_l2(), 0.0);
    }

    #[test]
    fn antiderivative_is_continuous_on_random_step_functions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let cells = 8u64;
            let vals: Vec<f64> = (0..cells).map(|_| rng.random_range(-2.0..2.0)).collect();
            let breaks: Vec<Dyadic> = (0..=cells).map(|i| Dyadic::new(i, 3)).collect();
            let g = PiecewisePoly::new(breaks, vals.iter().map(|&v| vec![v]).collect()).unwrap();
            let a = g.antiderivative().unwrap();
            // Continuity at interior breakpoints: left and right polynomial
            // values agree there.
            for i in 1..cells {
                let s = i as f64 / cells as f64;
                let left = poly_eval(&a.pieces()[(i - 1) as usize], s);
                let right = poly_eval(&a.pieces()[i as usize], s);
                assert!((left - right).abs() <= 1e-13);
            }
            // Matches the oracle on every grid prefix.
            for i in 1..=cells {
                let expected = gauss3(|s| g.eval(s), 3, 0, i);
                assert!((a.eval(i as f64 / cells as f64) - expected).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn derivative_of_antiderivative_restores_input() {
        // Coefficient-level inverse: d/ds ∫ = id. With coefficients chosen
        // divisible by the small integers involved, the round trip is exact;
        // generic coefficients come back to within one rounding.
        let breaks = vec![Dyadic::ZERO, Dyadic::new(1, 1), Dyadic::ONE];
        let g = PiecewisePoly::new(breaks.clone(), vec![vec![6.0, 6.0, 9.0], vec![3.0, 12.0]])
            .unwrap();
        let a = g.antiderivative().unwrap();
        for (orig, anti) in g.pieces().iter().zip(a.pieces()) {
            let derived: Vec<f64> = anti
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect();
            assert_eq!(&derived, orig, "exact coefficient round trip");
        }

        let g2 = PiecewisePoly::new(breaks, vec![vec![0.7, -1.3, 0.11], vec![2.4, 0.05]]).unwrap();
        let a2 = g2.antiderivative().unwrap();
        for (orig, anti) in g2.pieces().iter().zip(a2.pieces()) {
            for (i, &c) in anti.iter().enumerate().skip(1) {
                let back = c * i as f64;
                assert!((back - orig[i - 1]).abs() <= 1e-15 * (1.0 + orig[i - 1].abs()));
            }
        }
    }

    #[test]
    fn co_antiderivative_of_constant_two() {
        let co = PiecewisePoly::constant(2.0).unwrap().co_antiderivative().unwrap();
        assert_eq!(co.pieces(), &[vec![2.0, -2.0]]); // 2(1−t)
        assert_eq!(co.eval(1.0), 0.0);
    }

    #[test]
    fn co_antiderivative_of_constant_one() {
        let co = PiecewisePoly::constant(1.0).unwrap().co_antiderivative().unwrap();
        assert_eq!(co.pieces(), &[vec![1.0, -1.0]]); // 1−t
    }

    #[test]
    fn co_antiderivative_of_mother_wavelet() {
        // ∫ₜ¹ ψ = −t on (0,½) and t−1 on (½,1); checked against the oracle.
        let co = haar_element(2).unwrap().co_antiderivative().unwrap();
        for (t, expected) in [(0.0, 0.0), (0.25, -0.25), (0.75, -0.25), (1.0, 0.0)] {
            assert!((co.eval(t) - expected).abs() <= 1e-15, "co({t}) = {}", co.eval(t));
        }
        for cell in 0..4u64 {
            let t = cell as f64 / 4.0;
            let oracle = gauss3(|s| haar_element(2).unwrap().eval(s), 2, cell, 4);
            assert!((co.eval(t) - oracle).abs() <= 1e-14);
        }
    }

    #[test]
    fn integral_identities() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let vals: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
            let breaks: Vec<Dyadic> = (0..=16).map(|i| Dyadic::new(i, 4)).collect();
            let g = PiecewisePoly::new(breaks, vals.iter().map(|&v| vec![v]).collect()).unwrap();
            let total = g.integral();
            let anti = g.antiderivative().unwrap();
            let co = g.co_antiderivative().unwrap();
            assert!((anti.eval(1.0) - total).abs() <= 1e-13);
            assert!((co.eval(0.0) - total).abs() <= 1e-13);
            assert!((total - oracle_integral(&g, 4)).abs() <= 1e-13);
        }
    }

    #[test]
    fn wavelet_moment_against_linear_function() {
        // ⟨ψ_{l,j}, s⟩ = −2^{−3l/2}/4 for every shift j, confirmed by the
        // quadrature oracle and the frozen closed form.
        let linear = PiecewisePoly::new(
            vec![Dyadic::ZERO, Dyadic::ONE],
            vec![vec![0.0, 1.0]],
        )
        .unwrap();
        for l in 0..=4u32 {
            let expected = -(2f64.powi(-3 * l as i32)).sqrt() / 4.0;
            for j in 0..(1u64 << l) {
                let k = 1 + (1usize << l) + j as usize;
                let psi = haar_element(k).unwrap();
                let got = psi.inner_l2(&linear).unwrap();
                assert!(
                    (got - expected).abs() <= 1e-15,
                    "⟨ψ_{{{l},{j}}}, s⟩ = {got}, want {expected}"
                );
                let oracle = gauss3(|s| psi.eval(s) * s, l + 1, 0, 1 << (l + 1));
                assert!((got - oracle).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn inner_product_is_symmetric_and_bilinear() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            // Random piecewise linear functions on mismatched dyadic grids.
            let mk = |rng: &mut rand_chacha::ChaCha8Rng, exp: u32| {
                let cells = 1u64 << exp;
                let breaks: Vec<Dyadic> = (0..=cells).map(|i| Dyadic::new(i, exp)).collect();
                let pieces = (0..cells)
                    .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                    .collect();
                PiecewisePoly::new(breaks, pieces).unwrap()
            };
            let g = mk(&mut rng, 2);
            let h = mk(&mut rng, 3);
            let w = mk(&mut rng, 1);
            let s: f64 = rng.random_range(-3.0..3.0);

            let gh = g.inner_l2(&h).unwrap();
            assert!((gh - h.inner_l2(&g).unwrap()).abs() <= 1e-14, "symmetry");

            let lhs = g.add(&w.scale(s)).inner_l2(&h).unwrap();
            let rhs = gh + s * w.inner_l2(&h).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12, "bilinearity");

            let gg = g.inner_l2(&g).unwrap();
            assert!(gg >= 0.0);
            let oracle = gauss3(|x| g.eval(x) * h.eval(x), 3, 0, 8);
            assert!((gh - oracle).abs() <= 1e-13, "oracle disagreement");
        }
    }

    #[test]
    fn inner_product_zero_iff_zero_function() {
        let z = PiecewisePoly::zero();
        assert_eq!(z.inner_l2(&z).unwrap(), 0.0);
        let g = haar_element(5).unwrap();
        assert!(g.inner_l2(&g).unwrap() > 0.0);
    }

    #[test]
    fn degree_cap_enforced() {
        // Stored degree > 4 rejected at construction.
        let quintic = PiecewisePoly::new(
            vec![Dyadic::ZERO, Dyadic::ONE],
            vec![vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]],
        );
        assert!(matches!(quintic, Err(Error::Capacity { degree: 5, max: 4 })));

        // Degree-4 piece accepted, but its antiderivative would be degree 5.
        let quartic = PiecewisePoly::new(
            vec![Dyadic::ZERO, Dyadic::ONE],
            vec![vec![0.0, 0.0, 0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert!(matches!(
            quartic.antiderivative(),
            Err(Error::Capacity { .. })
        ));

        // Product degree 3 + 2 = 5 exceeds the cap in inner_l2.
        let cubic = PiecewisePoly::new(
            vec![Dyadic::ZERO, Dyadic::ONE],
            vec![vec![0.0, 0.0, 0.0, 1.0]],
        )
        .unwrap();
        let quadratic = PiecewisePoly::new(
            vec![Dyadic::ZERO, Dyadic::ONE],
            vec![vec![0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert!(matches!(
            cubic.inner_l2(&quadratic),
            Err(Error::Capacity { degree: 5, max: 4 })
        ));
    }

    #[test]
    fn invalid_breakpoints_rejected() {
        let bad_span = PiecewisePoly::new(
            vec![Dyadic::new(1, 2), Dyadic::ONE],
            vec![vec![1.0]],
        );
        assert!(bad_span.is_err());
        let unsorted = PiecewisePoly::new(
            vec![Dyadic::ZERO, Dyadic::new(3, 2), Dyadic::new(1, 2), Dyadic::ONE],
            vec![vec![1.0], vec![1.0], vec![1.0]],
        );
        assert!(unsorted.is_err());
        let wrong_count = PiecewisePoly::new(vec![Dyadic::ZERO, Dyadic::ONE], vec![]);
        assert!(wrong_count.is_err());
        let non_finite = PiecewisePoly::new(
            vec![Dyadic::ZERO, Dyadic::ONE],
            vec![vec![f64::NAN]],
        );
        assert!(non_finite.is_err());
    }

    #[test]
    fn haar_combination_matches_pairwise_sum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let n = rng.random_range(1..=20usize);
            let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let fast = haar_combination(&coeffs);
            let slow = coeffs
                .iter()
                .enumerate()
                .fold(PiecewisePoly::zero(), |acc, (i, &c)| {
                    acc.add(&haar_element(i + 1).unwrap().scale(c))
                });
            let diff = fast.sub(&slow);
            assert!(diff.norm_l2() <= 1e-13, "‖fast − slow‖ = {}", diff.norm_l2());
        }
    }

    #[test]
    fn haar_combination_of_nothing_is_zero() {
        assert_eq!(haar_combination(&[]).norm_l2(), 0.0);
        assert_eq!(haar_combination(&[0.0, 0.0]).norm_l2(), 0.0);
    }

    #[test]
    fn haar_coefficient_recovers_orthonormal_coordinates() {
        for j in 1..=32usize {
            let u = haar_element(j).unwrap();
            for k in 1..=32usize {
                let expected = if j == k { 1.0 } else { 0.0 };
                let got = haar_coefficient(&u, k).unwrap();
                assert!(
                    (got - expected).abs() <= 1e-13,
                    "coefficient {k} of element {j} = {got}"
                );
            }
        }
        assert!(haar_coefficient(&PiecewisePoly::zero(), 0).is_err());
    }

    #[test]
    fn haar_coefficient_agrees_with_inner_product_on_smooth_functions() {
        // A piecewise quadratic on a coarse grid; coefficients at finer
        // levels probe the windowed-integration path.
        let g = PiecewisePoly::new(
            vec![Dyadic::ZERO, Dyadic::new(1, 1), Dyadic::ONE],
            vec![vec![0.3, -1.0, 2.0], vec![-0.4, 0.9]],
        )
        .unwrap();
        for k in 1..=64usize {
            let via_window = haar_coefficient(&g, k).unwrap();
            let via_inner = g.inner_l2(&haar_element(k).unwrap()).unwrap();
            assert!(
                (via_window - via_inner).abs() <= 1e-14,
                "k = {k}: {via_window} vs {via_inner}"
            );
        }
    }

    #[test]
    fn integral_between_matches_quadrature_windows() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        let vals: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let breaks: Vec<Dyadic> = (0..=16).map(|i| Dyadic::new(i, 4)).collect();
        let g = PiecewisePoly::new(breaks, vals.iter().map(|&v| vec![v]).collect()).unwrap();
        for lo in 0..16u64 {
            for hi in lo..=16u64 {
                let got = g.integral_between(Dyadic::new(lo, 4), Dyadic::new(hi, 4));
                let want = gauss3(|s| g.eval(s), 4, lo, hi);
                assert!((got - want).abs() <= 1e-13, "[{lo}/16, {hi}/16]: {got} vs {want}");
            }
        }
        // Window bounds that sit strictly inside a piece.
        let got = g.integral_between(Dyadic::new(1, 5), Dyadic::new(3, 5));
        let want = vals[0] / 32.0 + vals[1] / 32.0;
        assert!((got - want).abs() <= 1e-15);
        // Degenerate and inverted windows integrate to zero.
        assert_eq!(g.integral_between(Dyadic::new(1, 2), Dyadic::new(1, 2)), 0.0);
        assert_eq!(g.integral_between(Dyadic::new(1, 1), Dyadic::new(1, 2)), 0.0);
    }

    #[test]
    fn debug_json_renders_dyadic_intervals() {
        let g = haar_element(3).unwrap();
        let json = g.to_debug_json();
        let text = json.to_string();
        assert!(text.contains("\"1/4\""), "expected exact dyadic label in {text}");
    }
}
