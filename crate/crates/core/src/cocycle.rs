//! Homoclinic pairs, the metric quantities kappa and vartheta, the
//! cocycle of a finite-range potential, and conjugating homeomorphisms
//! realized as constant word-rewrite pieces.

use crate::error::{Error, Result};
use crate::symbolic::{slot_from_internal, Cylinder, Symbol, Window, Word};
use crate::thermo::FiniteRangePotential;
use num_complex::Complex64;

/// A pair of configurations agreeing everywhere outside `window`, equal
/// to `source`/`target` on it, and carrying the given shared context
/// words on the slots flanking the window. The context is what makes the
/// cocycle of a finite-range potential computable exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomoclinicPair {
    window: Window,
    source: Word,
    target: Word,
    left_ctx: Word,
    right_ctx: Word,
}

impl HomoclinicPair {
    pub fn new(
        window: Window,
        source: Word,
        target: Word,
        left_ctx: Word,
        right_ctx: Word,
    ) -> Result<HomoclinicPair> {
        if window.len() != source.len() {
            return Err(Error::LengthMismatch {
                window: window.len(),
                word: source.len(),
            });
        }
        if window.len() != target.len() {
            return Err(Error::LengthMismatch {
                window: window.len(),
                word: target.len(),
            });
        }
        Ok(HomoclinicPair {
            window,
            source,
            target,
            left_ctx,
            right_ctx,
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn source(&self) -> &Word {
        &self.source
    }

    pub fn target(&self) -> &Word {
        &self.target
    }

    /// Internal indices where the two configurations disagree.
    fn differences(&self) -> Vec<i64> {
        match self.window.bounds() {
            None => Vec::new(),
            Some((lo, _)) => self
                .window
                .iter()
                .filter(|&i| self.source[(i - lo) as usize] != self.target[(i - lo) as usize])
                .collect(),
        }
    }

    /// Symbol of the source configuration at internal index `i`, if the
    /// pair's data determines it.
    fn source_symbol(&self, i: i64) -> Option<Symbol> {
        self.known_symbol(i, &self.source)
    }

    fn target_symbol(&self, i: i64) -> Option<Symbol> {
        self.known_symbol(i, &self.target)
    }

    fn known_symbol(&self, i: i64, inside: &Word) -> Option<Symbol> {
        match self.window.bounds() {
            None => None,
            Some((lo, hi)) => {
                if i >= lo && i <= hi {
                    Some(inside[(i - lo) as usize])
                } else if i < lo && lo - i <= self.left_ctx.len() as i64 {
                    Some(self.left_ctx[(self.left_ctx.len() as i64 - (lo - i)) as usize])
                } else if i > hi && i - hi <= self.right_ctx.len() as i64 {
                    Some(self.right_ctx[(i - hi - 1) as usize])
                } else {
                    None
                }
            }
        }
    }
}

/// Minimal `M >= 0` such that the configurations agree on every slot of
/// absolute value greater than `M`; zero for equal configurations.
pub fn kappa(p: &HomoclinicPair) -> u64 {
    p.differences()
        .into_iter()
        .map(|i| slot_from_internal(i).unsigned_abs())
        .max()
        .unwrap_or(0)
}

/// Largest `N` with agreement on all slots `-N..N`; the metric distance
/// is `2^{-N}`. Undefined for equal configurations.
pub fn vartheta(p: &HomoclinicPair) -> Result<u64> {
    p.differences()
        .into_iter()
        .map(|i| slot_from_internal(i).unsigned_abs() - 1)
        .min()
        .ok_or(Error::DegeneratePair)
}

/// The cocycle `V(x, y)`: the telescoped difference of the Birkhoff
/// orbit sums of `u` along the two configurations. Only shift windows
/// meeting the difference set contribute, so the sum is finite and
/// exact.
pub fn cocycle_v(p: &HomoclinicPair, u: &FiniteRangePotential) -> Result<f64> {
    let diffs = p.differences();
    let (dmin, dmax) = match (diffs.first(), diffs.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Ok(0.0),
    };
    let r = u.range() as i64;
    let need_lo = dmin - (r - 1);
    let need_hi = dmax + (r - 1);
    let (lo, hi) = p.window.bounds().expect("nonempty difference set");
    let avail_lo = lo - p.left_ctx.len() as i64;
    let avail_hi = hi + p.right_ctx.len() as i64;
    if need_lo < avail_lo {
        return Err(Error::ContextTooShort {
            side: "left",
            needed: (lo - need_lo) as usize,
            have: p.left_ctx.len(),
        });
    }
    if need_hi > avail_hi {
        return Err(Error::ContextTooShort {
            side: "right",
            needed: (need_hi - hi) as usize,
            have: p.right_ctx.len(),
        });
    }
    let mut sum = 0.0;
    let mut src = Vec::with_capacity(u.range());
    let mut tgt = Vec::with_capacity(u.range());
    for k in need_lo..=dmax {
        src.clear();
        tgt.clear();
        for i in k..k + r {
            src.push(p.source_symbol(i).expect("covered by context check"));
            tgt.push(p.target_symbol(i).expect("covered by context check"));
        }
        sum += u.value_at(&src, 0) - u.value_at(&tgt, 0);
    }
    Ok(sum)
}

/// A weighted constant-rewrite map: replace `source` by `target` on
/// `window`, identity elsewhere, with domain the source cylinder. Plain
/// conjugating homeomorphisms carry coefficient one; algebra elements
/// use arbitrary complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RewritePiece {
    window: Window,
    source: Word,
    target: Word,
    coeff: Complex64,
}

impl RewritePiece {
    pub fn new(
        window: Window,
        source: Word,
        target: Word,
        coeff: Complex64,
    ) -> Result<RewritePiece> {
        if window.len() != source.len() || window.len() != target.len() {
            return Err(Error::LengthMismatch {
                window: window.len(),
                word: source.len().max(target.len()),
            });
        }
        Ok(RewritePiece {
            window,
            source,
            target,
            coeff,
        })
    }

    /// The identity map on the whole space.
    pub fn identity() -> RewritePiece {
        RewritePiece {
            window: Window::empty(),
            source: Word::empty(),
            target: Word::empty(),
            coeff: Complex64::new(1.0, 0.0),
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn source(&self) -> &Word {
        &self.source
    }

    pub fn target(&self) -> &Word {
        &self.target
    }

    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    pub fn with_coeff(&self, coeff: Complex64) -> RewritePiece {
        RewritePiece {
            coeff,
            ..self.clone()
        }
    }

    pub fn domain(&self) -> Cylinder {
        Cylinder::new(self.window, self.source.clone()).expect("lengths checked")
    }

    pub fn image(&self) -> Cylinder {
        Cylinder::new(self.window, self.target.clone()).expect("lengths checked")
    }

    pub fn is_diagonal(&self) -> bool {
        self.source == self.target
    }

    /// Swaps source and target. Coefficient handling is the caller's
    /// concern; only the involution of the algebra conjugates it.
    pub fn inverted(&self) -> RewritePiece {
        RewritePiece {
            window: self.window,
            source: self.target.clone(),
            target: self.source.clone(),
            coeff: self.coeff,
        }
    }

    /// Refines to a larger window by enumerating the free slots; source
    /// and target receive the same fill since the map is the identity
    /// off its window.
    pub fn refined_to(&self, target: Window, d: u8) -> Result<Vec<RewritePiece>> {
        if !target.contains_window(self.window) {
            return Err(Error::BadRefineTarget);
        }
        if target == self.window {
            return Ok(vec![self.clone()]);
        }
        let free: Vec<i64> = target
            .iter()
            .filter(|&i| !self.window.contains(i))
            .collect();
        let (lo, _) = self.window.bounds().unwrap_or((0, -1));
        let mut out = Vec::with_capacity((d as usize).pow(free.len() as u32));
        for fill in Word::all(free.len(), d) {
            let mut src = Vec::with_capacity(target.len());
            let mut tgt = Vec::with_capacity(target.len());
            for i in target.iter() {
                if self.window.contains(i) {
                    src.push(self.source[(i - lo) as usize]);
                    tgt.push(self.target[(i - lo) as usize]);
                } else {
                    let k = free.iter().position(|&j| j == i).expect("free slot");
                    src.push(fill[k]);
                    tgt.push(fill[k]);
                }
            }
            out.push(RewritePiece {
                window: target,
                source: Word::new(src),
                target: Word::new(tgt),
                coeff: self.coeff,
            });
        }
        Ok(out)
    }
}

/// The symmetric conjugating homeomorphism sending the symmetric
/// cylinder of `x_word` onto that of `y_word`; `n` is the half-width,
/// normally the kappa of a representative pair.
pub fn symmetric_conjugator(x_word: &Word, y_word: &Word, n: u64) -> Result<RewritePiece> {
    let window = if n == 0 {
        Window::empty()
    } else {
        Window::new(-(n as i64), n as i64 - 1)
    };
    RewritePiece::new(
        window,
        x_word.clone(),
        y_word.clone(),
        Complex64::new(1.0, 0.0),
    )
}

/// The `d^r` constant-rewrite pieces implementing the bar-moving
/// homeomorphism: each piece captures one fill of the `r` slots right of
/// the cylinder and rotates it to the front, so the pieces jointly map
/// the cylinder onto its bar-shifted image.
pub fn bar_move_conjugator(c: &Cylinder, r: usize, d: u8) -> Result<Vec<RewritePiece>> {
    if r == 0 {
        return Ok(vec![RewritePiece::new(
            c.window(),
            c.word().clone(),
            c.word().clone(),
            Complex64::new(1.0, 0.0),
        )?]);
    }
    let left = c.window().left_len();
    if r > left {
        return Err(Error::BarMoveTooFar { r, left });
    }
    let (lo, hi) = c.window().bounds().expect("nonempty window");
    let window = Window::new(lo, hi + r as i64);
    let mut out = Vec::with_capacity((d as usize).pow(r as u32));
    for tail in Word::all(r, d) {
        let source = c.word().concat(&tail);
        let target = tail.concat(c.word());
        out.push(RewritePiece::new(
            window,
            source,
            target,
            Complex64::new(1.0, 0.0),
        )?);
    }
    Ok(out)
}

/// Composes two pieces as maps (`q` after `p`), restricted to where the
/// image of `p` meets the domain of `q`. The result is a list of pieces
/// on the hull window; an empty list means the graphs never chain.
pub fn compose(p: &RewritePiece, q: &RewritePiece, d: u8) -> Vec<RewritePiece> {
    let hull = p.window().hull(q.window());
    let refined = p.refined_to(hull, d).expect("hull contains window");
    let (qlo, _) = match q.window().bounds() {
        None => {
            // q is a multiple of the identity.
            return refined
                .into_iter()
                .map(|rp| rp.with_coeff(p.coeff * q.coeff))
                .collect();
        }
        Some(b) => b,
    };
    let (hlo, _) = hull.bounds().expect("hull nonempty");
    let mut out = Vec::new();
    for rp in refined {
        let mid = rp.target.clone();
        let matches = q
            .window()
            .iter()
            .all(|i| mid[(i - hlo) as usize] == q.source[(i - qlo) as usize]);
        if !matches {
            continue;
        }
        let mut tgt = mid.symbols().to_vec();
        for i in q.window().iter() {
            tgt[(i - hlo) as usize] = q.target[(i - qlo) as usize];
        }
        out.push(RewritePiece {
            window: hull,
            source: rp.source,
            target: Word::new(tgt),
            coeff: p.coeff * q.coeff,
        });
    }
    out
}

/// Refines a piece far enough that the cocycle of `u` is constant on
/// each refined domain, pairing every refined piece with its value. The
/// window is padded by `r - 1` slots on each side; diagonal pieces need
/// no refinement since their cocycle vanishes.
pub fn refine_for_cocycle(
    p: &RewritePiece,
    u: &FiniteRangePotential,
) -> Result<Vec<(RewritePiece, f64)>> {
    if p.is_diagonal() {
        return Ok(vec![(p.clone(), 0.0)]);
    }
    let r = u.range() as i64;
    let (lo, hi) = p
        .window()
        .bounds()
        .expect("non-diagonal piece has a window");
    let padded = Window::new(lo - (r - 1), hi + (r - 1));
    let mut out = Vec::new();
    for rp in p.refined_to(padded, u.alphabet())? {
        let pair = HomoclinicPair::new(
            rp.window,
            rp.source.clone(),
            rp.target.clone(),
            Word::empty(),
            Word::empty(),
        )?;
        let v = cocycle_v(&pair, u)?;
        out.push((rp, v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_potential;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn word(text: &str, d: u8) -> Word {
        Word::parse(text, d).unwrap()
    }

    fn pair(window: Window, src: &str, tgt: &str, lctx: &str, rctx: &str, d: u8) -> HomoclinicPair {
        HomoclinicPair::new(
            window,
            word(src, d),
            word(tgt, d),
            word(lctx, d),
            word(rctx, d),
        )
        .unwrap()
    }

    #[test]
    fn kappa_and_vartheta_on_worked_example() {
        // Symmetric window over slots -6..6 with right-side differences
        // at slots 4 and 6.
        let p = pair(
            Window::new(-6, 5),
            "122122121211",
            "122122121112",
            "",
            "",
            2,
        );
        assert_eq!(kappa(&p), 6);
        assert_eq!(vartheta(&p).unwrap(), 3);
    }

    #[test]
    fn kappa_degenerate_and_one_sided() {
        let p = pair(Window::new(-2, 1), "1122", "1122", "", "", 2);
        assert_eq!(kappa(&p), 0);
        assert!(matches!(vartheta(&p), Err(Error::DegeneratePair)));

        // Single difference at slot -2.
        let p = pair(Window::new(-2, 1), "1122", "2122", "", "", 2);
        assert_eq!(kappa(&p), 2);
        assert_eq!(vartheta(&p).unwrap(), 1);
    }

    #[test]
    fn vartheta_edge_cases() {
        let p = pair(Window::new(-1, 0), "12", "21", "", "", 2);
        assert_eq!(vartheta(&p).unwrap(), 0);
        // Difference only at slot 5 (internal 4).
        let p = pair(Window::new(4, 4), "1", "2", "", "", 2);
        assert_eq!(vartheta(&p).unwrap(), 4);
        assert_eq!(kappa(&p), 5);
    }

    #[test]
    fn vartheta_never_exceeds_kappa() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..500 {
            let d = 3u8;
            let len = rng.gen_range(1..=6usize);
            let lo = rng.gen_range(-6i64..=2);
            let src = Word::decode(rng.gen_range(0..3usize.pow(len as u32)), len, d);
            let tgt = Word::decode(rng.gen_range(0..3usize.pow(len as u32)), len, d);
            let p = HomoclinicPair::new(
                Window::new(lo, lo + len as i64 - 1),
                src.clone(),
                tgt.clone(),
                Word::empty(),
                Word::empty(),
            )
            .unwrap();
            if src != tgt {
                assert!(vartheta(&p).unwrap() <= kappa(&p));
            }
        }
    }

    #[test]
    fn cocycle_of_zero_potential_vanishes() {
        let u = FiniteRangePotential::zero(2);
        let p = pair(Window::new(-2, 1), "1122", "2211", "", "", 2);
        assert_eq!(cocycle_v(&p, &u).unwrap(), 0.0);
        let q = pair(Window::new(-2, 1), "1122", "1122", "", "", 2);
        assert_eq!(cocycle_v(&q, &u).unwrap(), 0.0);
    }

    #[test]
    fn cocycle_range_one_single_difference() {
        let u = FiniteRangePotential::new(2, 1, vec![0.0, 1.0]).unwrap();
        let p = pair(Window::new(2, 2), "2", "1", "", "", 2);
        assert_eq!(cocycle_v(&p, &u).unwrap(), 1.0);
    }

    #[test]
    fn cocycle_requires_context() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let u = random_potential(2, 3, 1.0, &mut rng);
        let p = pair(Window::new(-1, 0), "12", "21", "1", "22", 2);
        assert!(matches!(
            cocycle_v(&p, &u),
            Err(Error::ContextTooShort { side: "left", .. })
        ));
        let p = pair(Window::new(-1, 0), "12", "21", "11", "2", 2);
        assert!(matches!(
            cocycle_v(&p, &u),
            Err(Error::ContextTooShort { side: "right", .. })
        ));
        let p = pair(Window::new(-1, 0), "12", "21", "11", "22", 2);
        assert!(cocycle_v(&p, &u).is_ok());
    }

    #[test]
    fn cocycle_chain_rule_and_antisymmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let d = if rng.gen_bool(0.5) { 2u8 } else { 3 };
            let r = rng.gen_range(1..=3usize);
            let u = random_potential(d, r, 1.0, &mut rng);
            let len = rng.gen_range(1..=6usize);
            let lo = rng.gen_range(-5i64..=1);
            let window = Window::new(lo, lo + len as i64 - 1);
            let total = (d as usize).pow(len as u32);
            let ctx_len = r - 1;
            let lctx = Word::decode(
                rng.gen_range(0..(d as usize).pow(ctx_len as u32)),
                ctx_len,
                d,
            );
            let rctx = Word::decode(
                rng.gen_range(0..(d as usize).pow(ctx_len as u32)),
                ctx_len,
                d,
            );
            let wx = Word::decode(rng.gen_range(0..total), len, d);
            let wy = Word::decode(rng.gen_range(0..total), len, d);
            let wz = Word::decode(rng.gen_range(0..total), len, d);
            let make = |a: &Word, b: &Word| {
                HomoclinicPair::new(window, a.clone(), b.clone(), lctx.clone(), rctx.clone())
                    .unwrap()
            };
            let vxy = cocycle_v(&make(&wx, &wy), &u).unwrap();
            let vyz = cocycle_v(&make(&wy, &wz), &u).unwrap();
            let vxz = cocycle_v(&make(&wx, &wz), &u).unwrap();
            assert!((vxy + vyz - vxz).abs() <= 1e-12);
            let vyx = cocycle_v(&make(&wy, &wx), &u).unwrap();
            assert!((vxy + vyx).abs() <= 1e-12);
        }
    }

    #[test]
    fn cocycle_insensitive_to_coboundaries() {
        // X = U + g - g o tau + lambda changes the cocycle by at most
        // twice the oscillation of g.
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..50 {
            let d = 2u8;
            let ru = rng.gen_range(1..=2usize);
            let rg = rng.gen_range(1..=2usize);
            let u = random_potential(d, ru, 1.0, &mut rng);
            let g = random_potential(d, rg, 1.0, &mut rng);
            let lambda = rng.gen_range(-1.0..1.0);
            // Table for X on range max(ru, rg + 1).
            let rx = ru.max(rg + 1);
            let values: Vec<f64> = Word::all(rx, d)
                .map(|w| {
                    let s = w.symbols();
                    u.value_at(s, 0) + g.value_at(s, 0) - g.value_at(s, 1) + lambda
                })
                .collect();
            let x = FiniteRangePotential::new(d, rx, values).unwrap();
            let len = rng.gen_range(1..=4usize);
            let lo = rng.gen_range(-3i64..=0);
            let window = Window::new(lo, lo + len as i64 - 1);
            let total = (d as usize).pow(len as u32);
            let ctx = rx - 1;
            let lctx = Word::decode(rng.gen_range(0..(d as usize).pow(ctx as u32)), ctx, d);
            let rctx = Word::decode(rng.gen_range(0..(d as usize).pow(ctx as u32)), ctx, d);
            let wx = Word::decode(rng.gen_range(0..total), len, d);
            let wy = Word::decode(rng.gen_range(0..total), len, d);
            let p = HomoclinicPair::new(window, wx, wy, lctx, rctx).unwrap();
            let vu = cocycle_v(&p, &u).unwrap();
            let vx = cocycle_v(&p, &x).unwrap();
            assert!(
                (vx - vu).abs() <= 2.0 * g.osc() + 1e-12,
                "coboundary bound violated: {} vs {}",
                (vx - vu).abs(),
                2.0 * g.osc()
            );
        }
    }

    #[test]
    fn symmetric_conjugator_examples() {
        // kappa = 2 pair: 11|21 -> 12|12.
        let p = symmetric_conjugator(&word("1121", 2), &word("1212", 2), 2).unwrap();
        assert_eq!(p.window(), Window::new(-2, 1));
        assert_eq!(p.domain().to_notation().unwrap(), "11|21");
        assert_eq!(p.image().to_notation().unwrap(), "12|12");

        let id = symmetric_conjugator(&word("1121", 2), &word("1121", 2), 2).unwrap();
        assert!(id.is_diagonal());

        let omega = symmetric_conjugator(&Word::empty(), &Word::empty(), 0).unwrap();
        assert!(omega.window().is_empty());

        assert!(symmetric_conjugator(&word("112", 2), &word("1212", 2), 2).is_err());
    }

    #[test]
    fn bar_move_reproduces_worked_decomposition() {
        // 112|2 moved two slots: four pieces onto 1|122 with both free
        // right slots rotated to the front.
        let c = crate::symbolic::parse_cylinder("112|2", 2).unwrap();
        let pieces = bar_move_conjugator(&c, 2, 2).unwrap();
        assert_eq!(pieces.len(), 4);
        // Domains in tail order 11, 12, 21, 22.
        let expect = ["112|211", "112|212", "112|221", "112|222"];
        for (piece, dom) in pieces.iter().zip(expect.iter()) {
            assert_eq!(piece.domain().to_notation().unwrap(), *dom);
            assert_eq!(piece.window(), Window::new(-3, 2));
        }
        // phi_2 sends 112|2 12 to 12 1|122.
        assert_eq!(pieces[1].target().to_string(), "121122");
        // The images tile the bar-shifted cylinder.
        let shifted = crate::symbolic::shift_cylinder(&c, 2);
        for piece in &pieces {
            let img = piece.image();
            let both = crate::symbolic::intersect(&img, &shifted).unwrap().unwrap();
            assert_eq!(both, img);
        }
    }

    #[test]
    fn bar_move_edge_cases() {
        let c = crate::symbolic::parse_cylinder("1|1", 2).unwrap();
        let id = bar_move_conjugator(&c, 0, 2).unwrap();
        assert_eq!(id.len(), 1);
        assert!(id[0].is_diagonal());

        let pieces = bar_move_conjugator(&c, 1, 2).unwrap();
        assert_eq!(pieces.len(), 2);

        assert!(matches!(
            bar_move_conjugator(&c, 2, 2),
            Err(Error::BarMoveTooFar { .. })
        ));
    }

    #[test]
    fn compose_identity_and_inverse() {
        let p = RewritePiece::new(
            Window::new(-1, 0),
            word("12", 2),
            word("21", 2),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let id = RewritePiece::identity();
        let left = compose(&id, &p, 2);
        assert_eq!(left, vec![p.clone()]);
        let right = compose(&p, &id, 2);
        assert_eq!(right, vec![p.clone()]);

        // 1| -> 2| then 2| -> 1| composes to the identity on 1|.
        let a = RewritePiece::new(
            Window::new(-1, -1),
            word("1", 2),
            word("2", 2),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let b = a.inverted();
        let c = compose(&a, &b, 2);
        assert_eq!(c.len(), 1);
        assert!(c[0].is_diagonal());
        assert_eq!(c[0].source(), &word("1", 2));
    }

    #[test]
    fn compose_agrees_with_pointwise_application() {
        // Oracle: apply the two rewrites slotwise to configurations with
        // constant tails and compare against the composed pieces.
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let d = 2u8;
        for _ in 0..300 {
            let mk = |rng: &mut ChaCha8Rng| {
                let len = rng.gen_range(1..=3usize);
                let lo = rng.gen_range(-3i64..=1);
                let total = (d as usize).pow(len as u32);
                RewritePiece::new(
                    Window::new(lo, lo + len as i64 - 1),
                    Word::decode(rng.gen_range(0..total), len, d),
                    Word::decode(rng.gen_range(0..total), len, d),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
                .unwrap()
            };
            let p = mk(&mut rng);
            let q = mk(&mut rng);
            let composed = compose(&p, &q, d);

            // Sample a configuration on a wide window with constant tail.
            let span_lo = -6i64;
            let span_len = 12usize;
            let config: Vec<Symbol> = (0..span_len)
                .map(|_| Symbol::from_index(rng.gen_range(0..d as usize)))
                .collect();
            let get = |cfg: &[Symbol], i: i64| cfg[(i - span_lo) as usize];

            // Apply p then q by hand.
            let applies = |piece: &RewritePiece, cfg: &[Symbol]| -> Option<Vec<Symbol>> {
                let (lo, _) = match piece.window().bounds() {
                    None => return Some(cfg.to_vec()),
                    Some(b) => b,
                };
                for i in piece.window().iter() {
                    if get(cfg, i) != piece.source()[(i - lo) as usize] {
                        return None;
                    }
                }
                let mut out = cfg.to_vec();
                for i in piece.window().iter() {
                    out[(i - span_lo) as usize] = piece.target()[(i - lo) as usize];
                }
                Some(out)
            };
            let direct = applies(&p, &config).and_then(|mid| applies(&q, &mid));

            // Find the composed piece containing the configuration.
            let hit: Vec<&RewritePiece> = composed
                .iter()
                .filter(|piece| {
                    piece.window().iter().all(|i| {
                        get(&config, i)
                            == piece.source()[(i - piece.window().bounds().unwrap().0) as usize]
                    })
                })
                .collect();
            match direct {
                None => assert!(hit.is_empty()),
                Some(image) => {
                    assert_eq!(hit.len(), 1, "refined domains are disjoint");
                    let piece = hit[0];
                    let (lo, _) = piece.window().bounds().unwrap();
                    for i in piece.window().iter() {
                        assert_eq!(
                            image[(i - span_lo) as usize],
                            piece.target()[(i - lo) as usize]
                        );
                    }
                    let pc = p.coeff() * q.coeff();
                    assert!((piece.coeff() - pc).norm() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn invert_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..1000 {
            let d = 3u8;
            let len = rng.gen_range(0..=4usize);
            let window = if len == 0 {
                Window::empty()
            } else {
                let lo = rng.gen_range(-4i64..=2);
                Window::new(lo, lo + len as i64 - 1)
            };
            let total = (d as usize).pow(len as u32);
            let p = RewritePiece::new(
                window,
                Word::decode(rng.gen_range(0..total), len, d),
                Word::decode(rng.gen_range(0..total), len, d),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
            .unwrap();
            assert_eq!(p.inverted().inverted(), p);
        }
        let id = RewritePiece::identity();
        assert_eq!(id.inverted(), id);
    }

    #[test]
    fn refine_for_cocycle_examples() {
        // Zero potential has range one: no refinement, value zero.
        let p = RewritePiece::new(
            Window::new(-1, 0),
            word("12", 2),
            word("21", 2),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let out = refine_for_cocycle(&p, &FiniteRangePotential::zero(2)).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].1, 0.0);

        // Diagonal pieces keep cocycle zero.
        let id = RewritePiece::identity();
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let u = random_potential(2, 2, 1.0, &mut rng);
        for (_, v) in refine_for_cocycle(&id, &u).unwrap() {
            assert_eq!(v, 0.0);
        }

        // Range-two potential splits 11|21 -> 12|12 into four context
        // pieces whose values match the explicit pair cocycle.
        let p = symmetric_conjugator(&word("1121", 2), &word("1212", 2), 2).unwrap();
        let out = refine_for_cocycle(&p, &u).unwrap();
        assert_eq!(out.len(), 4);
        for (rp, v) in &out {
            assert_eq!(rp.window(), Window::new(-3, 2));
            let q = HomoclinicPair::new(
                Window::new(-2, 1),
                word("1121", 2),
                word("1212", 2),
                Word::new(vec![rp.source()[0]]),
                Word::new(vec![rp.source()[5]]),
            )
            .unwrap();
            assert!((v - cocycle_v(&q, &u).unwrap()).abs() <= 1e-14);
        }
    }
}
