//! Numerical verification of the change-of-variables identity for
//! equilibrium measures: residuals of the Gibbs relation over families
//! of conjugating rewrite pieces, Bowen ratio scans, shift-invariance
//! and bar-position checks, the same-cylinder Birkhoff bound, and a
//! depth-limited linear-system oracle for uniqueness.

use crate::cocycle::{refine_for_cocycle, RewritePiece};
use crate::error::{Error, Result};
use crate::symbolic::{intersect, Cylinder, Window, Word};
use crate::thermo::{
    birkhoff_sum, normalize, CylinderMeasure, FiniteRangePotential, MarkovEquilibrium,
};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Relative residual of the Gibbs identity for one conjugating piece:
/// the cocycle-weighted measure of the (refined) domain against the
/// measure of the image. Vanishes for the equilibrium state.
pub fn gibbs_residual(m: &MarkovEquilibrium, p: &RewritePiece, beta: f64) -> Result<f64> {
    let mut lhs = 0.0;
    for (rp, v) in refine_for_cocycle(p, m.potential())? {
        lhs += (-beta * v).exp() * m.cylinder_measure(&rp.domain())?;
    }
    let rhs = m.cylinder_measure(&p.image())?;
    assert!(rhs > 0.0, "cylinder of positive length has zero measure");
    Ok((lhs - rhs).abs() / rhs)
}

/// Residual of the weighted identity with `f` the indicator of a
/// sub-cylinder of the image; restricting the piece to the pulled-back
/// domain reduces this to the unweighted residual of a smaller piece.
pub fn gibbs_residual_weighted(
    m: &MarkovEquilibrium,
    p: &RewritePiece,
    beta: f64,
    test: &Cylinder,
) -> Result<f64> {
    let image = p.image();
    let meet = intersect(test, &image)?.ok_or(Error::NotInImage)?;
    if &meet != test {
        return Err(Error::NotInImage);
    }
    if !test.window().contains_window(p.window()) {
        return Err(Error::NotInImage);
    }
    // Pull the extra constraints back through the piece: off its window
    // the map is the identity.
    let window = test.window();
    let mut src = Vec::with_capacity(window.len());
    let (plo, _) = match p.window().bounds() {
        Some(b) => b,
        None => {
            // Identity-on-full-space piece: both sides are the test set.
            return gibbs_residual(
                m,
                &RewritePiece::new(window, test.word().clone(), test.word().clone(), p.coeff())?,
                beta,
            );
        }
    };
    for i in window.iter() {
        if p.window().contains(i) {
            src.push(p.source()[(i - plo) as usize]);
        } else {
            src.push(test.symbol_at(i).expect("inside test window"));
        }
    }
    let restricted = RewritePiece::new(window, Word::new(src), test.word().clone(), p.coeff())?;
    gibbs_residual(m, &restricted, beta)
}

/// Word-indexed tables used by the exhaustive sweeps: cylinder measures,
/// interior Birkhoff sums and their `exp(-beta S)` weights for every
/// word up to a maximal length.
struct SweepTables {
    d: usize,
    mu: Vec<Vec<f64>>,
    weight: Vec<Vec<f64>>,  // exp(-beta * interior Birkhoff sum)
    product: Vec<Vec<f64>>, // weight * mu
}

impl SweepTables {
    /// Total table entries for words up to `max_len`.
    fn entries(d: usize, max_len: usize) -> usize {
        (0..=max_len).map(|len| d.pow(len as u32)).sum()
    }

    fn check_size(d: usize, max_len: usize) -> Result<()> {
        let size = SweepTables::entries(d, max_len);
        const CAP: usize = 1 << 24;
        if size > CAP {
            return Err(Error::SystemCap { size, cap: CAP });
        }
        Ok(())
    }

    fn build(m: &MarkovEquilibrium, beta: f64, max_len: usize) -> SweepTables {
        let d = m.alphabet() as usize;
        let r = m.range();
        let f = m.potential();
        let cut = d.pow(r as u32);
        let mut mu: Vec<Vec<f64>> = (0..=max_len)
            .map(|len| vec![0.0; d.pow(len as u32)])
            .collect();
        let mut sums = mu.clone();
        // Interior Birkhoff sums grow by the last window when a word is
        // extended on the right; words shorter than the range have none.
        for len in r..=max_len {
            for code in 0..d.pow(len as u32) {
                sums[len][code] = sums[len - 1][code / d] + f.value_code(code % cut);
            }
        }
        // Measures: stationary weights at the state length, transition
        // factors above it, completion sums below it.
        assert!(max_len >= r.saturating_sub(1), "tables shorter than states");
        mu[r - 1].copy_from_slice(m.stationary());
        for len in r..=max_len {
            for code in 0..d.pow(len as u32) {
                mu[len][code] = mu[len - 1][code / d] * m.normalized().value_code(code % cut).exp();
            }
        }
        for len in (0..r.saturating_sub(1)).rev() {
            for code in 0..d.pow(len as u32) {
                mu[len][code] = (0..d).map(|a| mu[len + 1][code * d + a]).sum();
            }
        }
        let weight: Vec<Vec<f64>> = sums
            .iter()
            .map(|row| row.iter().map(|s| (-beta * s).exp()).collect())
            .collect();
        let product: Vec<Vec<f64>> = weight
            .iter()
            .zip(&mu)
            .map(|(w, m)| w.iter().zip(m).map(|(a, b)| a * b).collect())
            .collect();
        SweepTables {
            d,
            mu,
            weight,
            product,
        }
    }

    /// Residual for the conjugator pair of words `(u, v)` of length
    /// `len`, refined by `pad` context symbols on each side. The value
    /// does not depend on where the window sits relative to the bar.
    fn residual(&self, len: usize, pad: usize, ucode: usize, vcode: usize) -> f64 {
        let ctx = self.d.pow(pad as u32);
        let words = self.d.pow(len as u32);
        let padded = len + 2 * pad;
        let mut lhs = 0.0;
        for left in 0..ctx {
            let base_u = (left * words + ucode) * ctx;
            let base_v = (left * words + vcode) * ctx;
            for right in 0..ctx {
                lhs += self.product[padded][base_u + right] / self.weight[padded][base_v + right];
            }
        }
        let rhs = self.mu[len][vcode];
        (lhs - rhs).abs() / rhs
    }
}

/// Summary of an exhaustive conjugator sweep.
#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub max_residual: f64,
    pub checked: usize,
    pub worst: String,
}

/// Exhaustive sweep over all conjugator word pairs up to `max_len`. The
/// residual of a conjugator does not depend on the bar position of its
/// window, so each unordered source/target pair is evaluated once; the
/// count reports the full family including bar placements.
pub fn residual_sweep(m: &MarkovEquilibrium, beta: f64, max_len: usize) -> Result<SweepSummary> {
    let r = m.range();
    let pad = r - 1;
    SweepTables::check_size(m.alphabet() as usize, max_len + 2 * pad)?;
    let tables = SweepTables::build(m, beta, max_len + 2 * pad);
    let d = m.alphabet() as usize;
    let mut max_residual = 0.0f64;
    let mut worst = (0usize, 0usize, 0usize);
    let mut checked = 0usize;
    for len in 1..=max_len {
        let n = d.pow(len as u32);
        let (res, u, v) = (0..n)
            .into_par_iter()
            .map(|ucode| {
                let mut best = (0.0f64, 0usize, 0usize);
                for vcode in 0..n {
                    let res = tables.residual(len, pad, ucode, vcode);
                    if res > best.0 {
                        best = (res, ucode, vcode);
                    }
                }
                best
            })
            .reduce(
                || (0.0f64, 0usize, 0usize),
                |a, b| {
                    if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                        b
                    } else {
                        a
                    }
                },
            );
        if res > max_residual {
            max_residual = res;
            worst = (len, u, v);
        }
        checked += n * n * (len + 1);
    }
    let (len, u, v) = worst;
    let worst = if len == 0 {
        String::from("none")
    } else {
        format!(
            "{}->{}",
            Word::decode(u, len, m.alphabet()),
            Word::decode(v, len, m.alphabet())
        )
    };
    Ok(SweepSummary {
        max_residual,
        checked,
        worst,
    })
}

/// Per-conjugator residual list for report output (all pairs up to
/// `max_len`, all bar placements of the window, capped in size).
pub fn residual_list(
    m: &MarkovEquilibrium,
    beta: f64,
    max_len: usize,
    cap: usize,
) -> Result<Vec<(String, f64)>> {
    let r = m.range();
    let pad = r - 1;
    SweepTables::check_size(m.alphabet() as usize, max_len + 2 * pad)?;
    let tables = SweepTables::build(m, beta, max_len + 2 * pad);
    let d = m.alphabet();
    let mut out = Vec::new();
    'outer: for len in 1..=max_len {
        let n = (d as usize).pow(len as u32);
        for ucode in 0..n {
            for vcode in 0..n {
                let res = tables.residual(len, pad, ucode, vcode);
                for left in 0..=len {
                    if out.len() >= cap {
                        break 'outer;
                    }
                    let u = Word::decode(ucode, len, d);
                    let v = Word::decode(vcode, len, d);
                    let id = format!(
                        "{}|{}->{}|{}",
                        &u.to_string()[..left],
                        &u.to_string()[left..],
                        &v.to_string()[..left],
                        &v.to_string()[left..]
                    );
                    out.push((id, res));
                }
            }
        }
    }
    Ok(out)
}

/// Sweep over bar-moving conjugators: every word of length up to
/// `max_len` as a left block, rotated by `1..=max_r` slots.
pub fn bar_move_sweep(
    m: &MarkovEquilibrium,
    beta: f64,
    max_len: usize,
    max_r: usize,
) -> Result<f64> {
    let r = m.range();
    let pad = r - 1;
    SweepTables::check_size(m.alphabet() as usize, max_len + max_r + 2 * pad)?;
    let tables = SweepTables::build(m, beta, max_len + max_r + 2 * pad);
    let d = m.alphabet();
    let mut max_residual = 0.0f64;
    for len in 1..=max_len {
        for word in Word::all(len, d) {
            for mv in 1..=max_r.min(len) {
                for tail in Word::all(mv, d) {
                    let u = word.concat(&tail);
                    let v = tail.concat(&word);
                    let res = tables.residual(len + mv, pad, u.encode(d), v.encode(d));
                    max_residual = max_residual.max(res);
                }
            }
        }
    }
    Ok(max_residual)
}

/// Result of a Bowen inequality scan.
#[derive(Debug, Clone, Copy)]
pub struct BowenScan {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub envelope_lo: f64,
    pub envelope_hi: f64,
}

impl BowenScan {
    /// Whether the attained ratios sit inside the envelope, up to
    /// relative rounding slack; the envelope bounds the exact ratios.
    pub fn within_envelope(&self) -> bool {
        self.ratio_min >= self.envelope_lo * (1.0 - 1e-12)
            && self.ratio_max <= self.envelope_hi * (1.0 + 1e-12)
    }
}

/// Scans `ratio(w) = measure(|w) / exp(-P t + S_t U)` over all one-sided
/// cylinders with `r <= |w| <= max_len`, where `t = |w| - r + 1` is the
/// number of shift windows the word determines. For the normalized
/// potential the ratio equals the stationary weight of the leading
/// state, so it sits inside the reported envelope
/// `[min pi * exp(-(r-1) osc), max pi * exp((r-1) osc)]`.
pub fn bowen_scan(
    m: &MarkovEquilibrium,
    max_len: usize,
    use_normalized: bool,
) -> Result<BowenScan> {
    let r = m.range();
    assert!(max_len >= r, "scan needs max_len >= range");
    let (pot, pressure) = if use_normalized {
        (m.normalized().clone(), 0.0)
    } else {
        (m.potential().clone(), m.pressure())
    };
    let d = m.alphabet();
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = f64::NEG_INFINITY;
    for len in r..=max_len {
        let steps = len - r + 1;
        for word in Word::all(len, d) {
            let mu = m.word_measure(word.symbols());
            let s = birkhoff_sum(&pot, word.symbols(), steps)?;
            let ratio = mu / (-pressure * steps as f64 + s).exp();
            ratio_min = ratio_min.min(ratio);
            ratio_max = ratio_max.max(ratio);
        }
    }
    let (lo, hi) = bowen_envelope(m);
    Ok(BowenScan {
        ratio_min,
        ratio_max,
        envelope_lo: lo,
        envelope_hi: hi,
    })
}

/// The stationary-vector envelope for the normalized Bowen ratio.
pub fn bowen_envelope(m: &MarkovEquilibrium) -> (f64, f64) {
    let osc = m.normalized().osc();
    let slack = ((m.range() - 1) as f64) * osc;
    let pi_min = m.stationary().iter().cloned().fold(f64::INFINITY, f64::min);
    let pi_max = m
        .stationary()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    (pi_min * (-slack).exp(), pi_max * slack.exp())
}

/// Maximal deviation `|alpha(c) - alpha(shifted c)|` over bar-anchored
/// cylinders and shifts, with both sides evaluated by propagating the
/// stationary vector from a common anchor position. A genuinely
/// stationary vector makes the two evaluations agree; a corrupted one is
/// detected.
pub fn invariance_check(m: &MarkovEquilibrium, max_len: usize, max_shift: i64) -> f64 {
    let d = m.alphabet();
    let r = m.range() as i64;
    let mut worst = 0.0f64;
    for len in 1..=max_len {
        for word in Word::all(len, d) {
            for left in 0..=len {
                let window = Window::new(-(left as i64), (len - left) as i64 - 1);
                let c = Cylinder::new(window, word.clone()).expect("lengths match");
                for k in -max_shift..=max_shift {
                    let shifted = crate::symbolic::shift_cylinder(&c, k);
                    let lo = window.bounds().expect("nonempty").0;
                    let anchor = lo.min(lo + k) - (r - 1);
                    let a = m.anchored_cylinder_measure(&c, anchor);
                    let b = m.anchored_cylinder_measure(&shifted, anchor);
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    worst
}

/// Scans the ratio `alpha(|w) / alpha(bar form of w)` over all words up
/// to `max_len` and all interior bar positions, returning the attained
/// bounds. Both are one for any shift-invariant measure; finite-volume
/// approximants straddle one.
pub fn bar_ratio_scan(measure: &dyn CylinderMeasure, max_len: usize) -> Result<(f64, f64)> {
    let d = measure.alphabet();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for len in 2..=max_len {
        for word in Word::all(len, d) {
            let one_sided = Cylinder::new(Window::new(0, len as i64 - 1), word.clone())?;
            let reference = measure.cylinder_measure(&one_sided)?;
            for left in 1..len {
                let window = Window::new(-(left as i64), (len - left) as i64 - 1);
                let barred = Cylinder::new(window, word.clone())?;
                let ratio = reference / measure.cylinder_measure(&barred)?;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
    }
    Ok((lo, hi))
}

/// The same-cylinder Birkhoff bound: the supremum over cylinder depths
/// `1..=2r` of the Birkhoff-sum difference between two points sharing
/// the cylinder word, computed exhaustively over the normalized
/// potential. Always at most `(r-1) * osc`.
pub fn k_bound(m: &MarkovEquilibrium) -> f64 {
    let d = m.alphabet();
    let r = m.range();
    let pot = m.normalized();
    let mut sup = 0.0f64;
    for depth in 1..=2 * r {
        for word in Word::all(depth, d) {
            let mut best_hi = f64::NEG_INFINITY;
            let mut best_lo = f64::INFINITY;
            for tail in Word::all(r - 1, d) {
                let full = word.concat(&tail);
                let s = birkhoff_sum(pot, full.symbols(), depth).expect("length fits");
                best_hi = best_hi.max(s);
                best_lo = best_lo.min(s);
            }
            sup = sup.max(best_hi - best_lo);
        }
    }
    sup
}

/// Outcome of the depth-limited uniqueness oracle.
#[derive(Debug, Clone)]
pub struct GibbsSystem {
    pub depth: usize,
    pub values: Vec<f64>,
    pub rank_deficiency: usize,
    pub max_deviation: f64,
    pub lsq_residual: f64,
}

/// Solves for the measures of all depth-cylinders from (i) normalization,
/// (ii) marginal compatibility of left and right one-symbol extensions
/// and (iii) the Gibbs relations of every conjugator whose refined
/// cocycle is determined by depth-many symbols. Rank deficiency one
/// (before normalization) means the system pins the measure up to scale.
pub fn solve_gibbs_system(
    u: &FiniteRangePotential,
    depth: usize,
    beta: f64,
    cap: usize,
) -> Result<GibbsSystem> {
    let d = u.alphabet() as usize;
    let r = u.range();
    if depth < r {
        return Err(Error::DepthBelowRange { depth, range: r });
    }
    let n = d
        .checked_pow(depth as u32)
        .filter(|&n| n <= cap)
        .ok_or(Error::SystemCap {
            size: d.pow(depth as u32),
            cap,
        })?;
    let reference = normalize(&u.scaled(beta))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    // Marginal compatibility: left and right extensions of every
    // (depth-1)-word describe the same mass.
    for code in 0..d.pow(depth as u32 - 1) {
        let mut row = vec![0.0; n];
        for a in 0..d {
            row[code * d + a] += 1.0;
            row[a * d.pow(depth as u32 - 1) + code] -= 1.0;
        }
        rows.push(row);
    }
    // Gibbs relations. A source/target word pair of length `len` padded
    // by `r-1` context symbols on each side has a determined cocycle;
    // shorter-than-depth padded words are expanded over right
    // extensions.
    let pad = r - 1;
    let tables = SweepTables::build(&normalize(u)?, beta, depth);
    let mut gibbs_rows = 0usize;
    for len in 1..=depth.saturating_sub(2 * pad) {
        let words = d.pow(len as u32);
        gibbs_rows += words * (words - 1) / 2 * d.pow(2 * pad as u32);
    }
    if (gibbs_rows + rows.len()) * n > 64 * cap * cap {
        return Err(Error::SystemCap {
            size: (gibbs_rows + rows.len()) * n,
            cap: 64 * cap * cap,
        });
    }
    for len in 1..=depth.saturating_sub(2 * pad) {
        let words = d.pow(len as u32);
        let ctx = d.pow(pad as u32);
        let padded = len + 2 * pad;
        let ext = d.pow((depth - padded) as u32);
        for ucode in 0..words {
            for vcode in ucode + 1..words {
                for left in 0..ctx {
                    for right in 0..ctx {
                        let base_u = ((left * words + ucode) * ctx + right) * ext;
                        let base_v = ((left * words + vcode) * ctx + right) * ext;
                        // exp(-beta V) with V the interior Birkhoff
                        // difference of the padded words.
                        let w = tables.weight[padded][(left * words + ucode) * ctx + right]
                            / tables.weight[padded][(left * words + vcode) * ctx + right];
                        let mut row = vec![0.0; n];
                        for e in 0..ext {
                            row[base_u + e] += w;
                            row[base_v + e] -= 1.0;
                        }
                        rows.push(row);
                    }
                }
            }
        }
    }

    let hom = DMatrix::from_row_iterator(rows.len(), n, rows.iter().flatten().cloned());
    let svd = hom.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > smax * 1e-10)
        .count();
    let rank_deficiency = n - rank;

    // Append the normalization row and solve in the least-squares sense.
    let mut full = hom.insert_row(rows.len(), 0.0);
    for j in 0..n {
        full[(rows.len(), j)] = 1.0;
    }
    let mut b = DVector::zeros(rows.len() + 1);
    b[rows.len()] = 1.0;
    let solution = full
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|_| Error::Inconsistent { residual: f64::NAN })?;
    let residual = (&full * &solution - &b).abs().max();
    if residual > 1e-8 {
        return Err(Error::Inconsistent { residual });
    }

    let mut max_deviation = 0.0f64;
    let mut values = Vec::with_capacity(n);
    for code in 0..n {
        let word = Word::decode(code, depth, u.alphabet());
        let mu = reference.word_measure(word.symbols());
        let x = solution[code];
        values.push(x);
        max_deviation = max_deviation.max((x - mu).abs());
    }
    Ok(GibbsSystem {
        depth,
        values,
        rank_deficiency,
        max_deviation,
        lsq_residual: residual,
    })
}
