//! The *-algebra of finitely supported kernels on the homoclinic
//! groupoid. An element is a finite sum of weighted rewrite pieces; the
//! kernel value at a pair `(x, y)` is the sum of the coefficients of the
//! pieces whose graph contains the pair. Convolution composes graphs,
//! the involution transposes and conjugates, and the modular flow
//! multiplies each piece by `exp(i V t)` after refining the piece far
//! enough that the cocycle `V` is constant on it.

use crate::cocycle::{compose, refine_for_cocycle, RewritePiece};
use crate::error::{Error, Result};
use crate::symbolic::{internal_from_slot, slot_from_internal, Symbol, Window, Word};
use crate::thermo::{CylinderMeasure, FiniteRangePotential};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A finite formal sum of rewrite pieces.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlgebraElement {
    pieces: Vec<RewritePiece>,
}

impl AlgebraElement {
    pub fn zero() -> AlgebraElement {
        AlgebraElement { pieces: Vec::new() }
    }

    pub fn identity() -> AlgebraElement {
        AlgebraElement {
            pieces: vec![RewritePiece::identity()],
        }
    }

    pub fn from_pieces(pieces: Vec<RewritePiece>) -> AlgebraElement {
        AlgebraElement { pieces }
    }

    pub fn pieces(&self) -> &[RewritePiece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        AlgebraElement { pieces }
    }

    pub fn scale(&self, c: Complex64) -> AlgebraElement {
        AlgebraElement {
            pieces: self
                .pieces
                .iter()
                .map(|p| p.with_coeff(p.coeff() * c))
                .collect(),
        }
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Largest coefficient magnitude after canonicalization; zero for
    /// the zero element. Used to compare elements up to tolerance.
    pub fn canonical_norm(&self, d: u8, hull_cap: usize) -> Result<f64> {
        let canon = canonicalize(self, d, hull_cap)?;
        Ok(canon
            .pieces
            .iter()
            .map(|p| p.coeff().norm())
            .fold(0.0, f64::max))
    }
}

/// Refines every piece to the common hull window, merges pieces with the
/// same source and target, drops exact zeros and sorts the result.
pub fn canonicalize(a: &AlgebraElement, d: u8, hull_cap: usize) -> Result<AlgebraElement> {
    let hull = a
        .pieces
        .iter()
        .fold(Window::empty(), |acc, p| acc.hull(p.window()));
    if hull.len() > hull_cap {
        return Err(Error::HullCap {
            len: hull.len(),
            cap: hull_cap,
        });
    }
    let mut merged: BTreeMap<(Word, Word), Complex64> = BTreeMap::new();
    for p in &a.pieces {
        for rp in p.refined_to(hull, d)? {
            let entry = merged
                .entry((rp.source().clone(), rp.target().clone()))
                .or_insert(Complex64::new(0.0, 0.0));
            *entry += rp.coeff();
        }
    }
    let mut pieces = Vec::with_capacity(merged.len());
    for ((src, tgt), coeff) in merged {
        if coeff == Complex64::new(0.0, 0.0) {
            continue;
        }
        pieces.push(RewritePiece::new(hull, src, tgt, coeff)?);
    }
    Ok(AlgebraElement { pieces })
}

/// Convolution `(A * B)(x, y) = sum_z A(x, z) B(z, y)`; the sum is the
/// composite of the two graphs, piece by piece, in canonical form.
pub fn convolve(
    a: &AlgebraElement,
    b: &AlgebraElement,
    d: u8,
    hull_cap: usize,
) -> Result<AlgebraElement> {
    let mut pieces = Vec::new();
    for p in &a.pieces {
        for q in &b.pieces {
            let hull = p.window().hull(q.window());
            if hull.len() > hull_cap {
                return Err(Error::HullCap {
                    len: hull.len(),
                    cap: hull_cap,
                });
            }
            pieces.extend(compose(p, q, d));
        }
    }
    canonicalize(&AlgebraElement { pieces }, d, hull_cap)
}

/// The involution `A^*(x, y) = conj(A(y, x))`: every piece transposed
/// and conjugated. Canonical input yields canonical output.
pub fn involution(a: &AlgebraElement) -> AlgebraElement {
    let mut pieces: Vec<RewritePiece> = a
        .pieces
        .iter()
        .map(|p| p.inverted().with_coeff(p.coeff().conj()))
        .collect();
    pieces.sort_by(|p, q| (p.source(), p.target()).cmp(&(q.source(), q.target())));
    AlgebraElement { pieces }
}

/// The modular flow `(sigma^t A)(x, y) = exp(i V(x, y) t) A(x, y)` for
/// real or complex `t`; complex parameters analytically continue the
/// per-piece factor.
pub fn sigma_t(
    a: &AlgebraElement,
    t: Complex64,
    u: &FiniteRangePotential,
) -> Result<AlgebraElement> {
    let mut pieces = Vec::new();
    for p in &a.pieces {
        for (rp, v) in refine_for_cocycle(p, u)? {
            let factor = (Complex64::i() * v * t).exp();
            pieces.push(rp.with_coeff(rp.coeff() * factor));
        }
    }
    Ok(AlgebraElement { pieces })
}

/// The state of a measure: `omega(A) = int A(x, x) dmu(x)`, the sum of
/// the diagonal coefficients weighted by the measure of their domains.
pub fn state(a: &AlgebraElement, m: &dyn CylinderMeasure) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for p in &a.pieces {
        if p.is_diagonal() {
            total += p.coeff() * m.cylinder_measure(&p.domain())?;
        }
    }
    Ok(total)
}

/// Relative defect of the classical KMS identity
/// `omega(A * B) = omega(B * sigma^{-i beta} A)`.
pub fn kms_residual(
    a: &AlgebraElement,
    b: &AlgebraElement,
    m: &dyn CylinderMeasure,
    u: &FiniteRangePotential,
    beta: f64,
    hull_cap: usize,
) -> Result<f64> {
    let d = m.alphabet();
    let lhs = state(&convolve(a, b, d, hull_cap)?, m)?;
    let twisted = sigma_t(a, Complex64::new(0.0, -beta), u)?;
    let rhs = state(&convolve(b, &twisted, d, hull_cap)?, m)?;
    Ok((lhs - rhs).norm() / (1.0 + lhs.norm()))
}

/// `F(t) = omega(sigma^t A * B)`, the function carrying the KMS boundary
/// condition.
pub fn evaluate_f(
    a: &AlgebraElement,
    b: &AlgebraElement,
    m: &dyn CylinderMeasure,
    u: &FiniteRangePotential,
    t: Complex64,
    hull_cap: usize,
) -> Result<Complex64> {
    let d = m.alphabet();
    let shifted = sigma_t(a, t, u)?;
    state(&convolve(&shifted, b, d, hull_cap)?, m)
}

/// Defect of the boundary identity `F(t + i beta) = omega(B * sigma^t A)`.
pub fn kms_boundary_defect(
    a: &AlgebraElement,
    b: &AlgebraElement,
    m: &dyn CylinderMeasure,
    u: &FiniteRangePotential,
    t: Complex64,
    beta: f64,
    hull_cap: usize,
) -> Result<f64> {
    let d = m.alphabet();
    let lhs = evaluate_f(a, b, m, u, t + Complex64::new(0.0, beta), hull_cap)?;
    let shifted = sigma_t(a, t, u)?;
    let rhs = state(&convolve(b, &shifted, d, hull_cap)?, m)?;
    Ok((lhs - rhs).norm())
}

/// `omega(A * A^*)`, asserted to be essentially real; a violation means
/// the algebra itself is broken.
pub fn positivity_check(
    a: &AlgebraElement,
    m: &dyn CylinderMeasure,
    hull_cap: usize,
) -> Result<f64> {
    let d = m.alphabet();
    let value = state(&convolve(a, &involution(a), d, hull_cap)?, m)?;
    assert!(
        value.im.abs() <= 1e-12,
        "omega(A A*) has imaginary part {}",
        value.im
    );
    Ok(value.re)
}

/// A configuration pinned on a finite window with constant tails; the
/// data determines every symbol, so kernel values can be evaluated
/// pointwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    lo: i64,
    symbols: Vec<Symbol>,
    left_fill: Symbol,
    right_fill: Symbol,
}

impl Configuration {
    pub fn new(
        lo: i64,
        symbols: Vec<Symbol>,
        left_fill: Symbol,
        right_fill: Symbol,
    ) -> Configuration {
        Configuration {
            lo,
            symbols,
            left_fill,
            right_fill,
        }
    }

    pub fn symbol(&self, i: i64) -> Symbol {
        if i < self.lo {
            self.left_fill
        } else if i >= self.lo + self.symbols.len() as i64 {
            self.right_fill
        } else {
            self.symbols[(i - self.lo) as usize]
        }
    }

    fn explicit_span(&self) -> (i64, i64) {
        (self.lo, self.lo + self.symbols.len() as i64 - 1)
    }

    /// True when the two configurations agree at every index outside `w`.
    /// Requires equal tail fills; differences must sit inside the
    /// explicitly pinned spans.
    pub fn agrees_off_window(&self, other: &Configuration, w: Window) -> bool {
        if self.left_fill != other.left_fill || self.right_fill != other.right_fill {
            return false;
        }
        let (alo, ahi) = self.explicit_span();
        let (blo, bhi) = other.explicit_span();
        let lo = alo.min(blo);
        let hi = ahi.max(bhi);
        (lo..=hi).all(|i| w.contains(i) || self.symbol(i) == other.symbol(i))
    }
}

/// The kernel value `A(x, y)`: the sum of coefficients of the pieces
/// whose graph contains the pair. Serves as the brute-force oracle for
/// the piece calculus.
pub fn evaluate_at(a: &AlgebraElement, x: &Configuration, y: &Configuration) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for p in &a.pieces {
        let on_window = match p.window().bounds() {
            None => true,
            Some((lo, _)) => p.window().iter().all(|i| {
                x.symbol(i) == p.source()[(i - lo) as usize]
                    && y.symbol(i) == p.target()[(i - lo) as usize]
            }),
        };
        if on_window && x.agrees_off_window(y, p.window()) {
            total += p.coeff();
        }
    }
    total
}

#[derive(Serialize, Deserialize)]
struct PieceFile {
    window: Vec<i64>,
    source: String,
    target: String,
    re: f64,
    im: f64,
}

/// Reads an element from its JSON form: a list of pieces with windows
/// given in lattice slots (an empty window list denotes the full space).
pub fn element_from_json(text: &str, d: u8) -> Result<AlgebraElement> {
    let files: Vec<PieceFile> =
        serde_json::from_str(text).map_err(|e| Error::ElementFile(e.to_string()))?;
    let mut pieces = Vec::with_capacity(files.len());
    for f in &files {
        let window = match f.window.as_slice() {
            [] => Window::empty(),
            [lo, hi] => {
                let a = internal_from_slot(*lo).map_err(|e| Error::ElementFile(e.to_string()))?;
                let b = internal_from_slot(*hi).map_err(|e| Error::ElementFile(e.to_string()))?;
                if a > b {
                    return Err(Error::ElementFile(format!(
                        "window [{lo},{hi}] out of order"
                    )));
                }
                Window::new(a, b)
            }
            other => {
                return Err(Error::ElementFile(format!(
                    "window must have zero or two entries, got {}",
                    other.len()
                )))
            }
        };
        let source = Word::parse(&f.source, d).map_err(|e| Error::ElementFile(e.to_string()))?;
        let target = Word::parse(&f.target, d).map_err(|e| Error::ElementFile(e.to_string()))?;
        if !f.re.is_finite() || !f.im.is_finite() {
            return Err(Error::ElementFile("non-finite coefficient".into()));
        }
        pieces.push(
            RewritePiece::new(window, source, target, Complex64::new(f.re, f.im))
                .map_err(|e| Error::ElementFile(e.to_string()))?,
        );
    }
    Ok(AlgebraElement::from_pieces(pieces))
}

pub fn element_to_json(a: &AlgebraElement) -> String {
    let files: Vec<PieceFile> = a
        .pieces
        .iter()
        .map(|p| PieceFile {
            window: match p.window().bounds() {
                None => vec![],
                Some((lo, hi)) => vec![slot_from_internal(lo), slot_from_internal(hi)],
            },
            source: p.source().to_string(),
            target: p.target().to_string(),
            re: p.coeff().re,
            im: p.coeff().im,
        })
        .collect();
    serde_json::to_string_pretty(&files).expect("element serializes")
}
