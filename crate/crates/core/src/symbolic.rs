//! Alphabet, lattice indexing, words, windows and cylinder sets for the
//! two-sided full shift with a distinguished bar between negative and
//! positive slots.
//!
//! Lattice slots are the nonzero integers; the bar sits between slot -1
//! and slot 1. Internally everything is re-indexed onto the contiguous
//! integers by `ι(j) = j` for `j <= -1` and `ι(j) = j - 1` for `j >= 1`,
//! so the bar sits between internal index -1 and 0 and interval
//! arithmetic needs no special case for the missing slot 0. All parsing
//! and formatting uses the user-facing slot convention.

use crate::error::{Error, Result};
use std::fmt;

/// Maps a user-facing lattice slot (nonzero) to the internal index.
pub fn internal_from_slot(j: i64) -> Result<i64> {
    if j == 0 {
        return Err(Error::Parse("slot 0 does not exist on the lattice".into()));
    }
    Ok(if j < 0 { j } else { j - 1 })
}

/// Maps an internal index back to the user-facing lattice slot.
pub fn slot_from_internal(i: i64) -> i64 {
    if i < 0 {
        i
    } else {
        i + 1
    }
}

/// A letter of the alphabet `{1, ..., d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u8);

impl Symbol {
    pub fn new(value: u8, d: u8) -> Result<Symbol> {
        if value == 0 || value > d {
            return Err(Error::SymbolOutOfRange { value, d });
        }
        Ok(Symbol(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Zero-based index into tables of size `d`.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Symbol {
        Symbol(index as u8 + 1)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite string of symbols.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Word {
        Word(symbols)
    }

    pub fn empty() -> Word {
        Word(Vec::new())
    }

    /// Parses a digit string over the alphabet `1..=d`.
    pub fn parse(text: &str, d: u8) -> Result<Word> {
        if d > 9 {
            return Err(Error::AlphabetTooLarge(d));
        }
        let mut syms = Vec::with_capacity(text.len());
        for c in text.chars() {
            let v = c
                .to_digit(10)
                .ok_or_else(|| Error::Parse(format!("invalid character {c:?} in word")))?;
            syms.push(Symbol::new(v as u8, d)?);
        }
        Ok(Word(syms))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut syms = self.0.clone();
        syms.extend_from_slice(&other.0);
        Word(syms)
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    /// Lexicographic rank of the word among all words of its length,
    /// first symbol most significant.
    pub fn encode(&self, d: u8) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, s| acc * d as usize + s.index())
    }

    pub fn decode(mut code: usize, len: usize, d: u8) -> Word {
        let mut syms = vec![Symbol(1); len];
        for i in (0..len).rev() {
            syms[i] = Symbol::from_index(code % d as usize);
            code /= d as usize;
        }
        Word(syms)
    }

    /// All `d^len` words of a given length, in lexicographic order.
    pub fn all(len: usize, d: u8) -> impl Iterator<Item = Word> {
        let total = (d as usize).pow(len as u32);
        (0..total).map(move |code| Word::decode(code, len, d))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for Word {
    type Output = Symbol;
    fn index(&self, i: usize) -> &Symbol {
        &self.0[i]
    }
}

/// A contiguous interval of internal indices, possibly empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window(Option<(i64, i64)>);

impl Window {
    pub fn empty() -> Window {
        Window(None)
    }

    pub fn new(lo: i64, hi: i64) -> Window {
        assert!(lo <= hi, "window bounds out of order: [{lo},{hi}]");
        Window(Some((lo, hi)))
    }

    /// Builds a window from user-facing slot bounds (both nonzero).
    pub fn from_slots(lo: i64, hi: i64) -> Result<Window> {
        let a = internal_from_slot(lo)?;
        let b = internal_from_slot(hi)?;
        if a > b {
            return Err(Error::Parse(format!(
                "slot bounds out of order: [{lo},{hi}]"
            )));
        }
        Ok(Window::new(a, b))
    }

    pub fn is_empty(self) -> bool {
        self.0.is_none()
    }

    pub fn bounds(self) -> Option<(i64, i64)> {
        self.0
    }

    pub fn len(self) -> usize {
        match self.0 {
            None => 0,
            Some((lo, hi)) => (hi - lo + 1) as usize,
        }
    }

    pub fn contains(self, i: i64) -> bool {
        matches!(self.0, Some((lo, hi)) if lo <= i && i <= hi)
    }

    pub fn contains_window(self, other: Window) -> bool {
        match (self.0, other.0) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some((a, b)), Some((c, d))) => a <= c && d <= b,
        }
    }

    /// Smallest interval containing both windows.
    pub fn hull(self, other: Window) -> Window {
        match (self.0, other.0) {
            (None, w) | (w, None) => Window(w),
            (Some((a, b)), Some((c, d))) => Window::new(a.min(c), b.max(d)),
        }
    }

    pub fn shifted(self, k: i64) -> Window {
        Window(self.0.map(|(lo, hi)| (lo + k, hi + k)))
    }

    pub fn iter(self) -> impl Iterator<Item = i64> {
        let (lo, hi) = self.0.unwrap_or((0, -1));
        lo..=hi
    }

    /// Number of window positions strictly left of the bar.
    pub fn left_len(self) -> usize {
        match self.0 {
            None => 0,
            Some((lo, hi)) => {
                let top = hi.min(-1);
                if lo > top {
                    0
                } else {
                    (top - lo + 1) as usize
                }
            }
        }
    }
}

/// A cylinder set: configurations carrying a fixed word on a fixed window.
///
/// The empty window denotes the full space. A cylinder is symmetric when
/// its window covers slots `-n..-1, 1..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cylinder {
    window: Window,
    word: Word,
}

impl Cylinder {
    pub fn new(window: Window, word: Word) -> Result<Cylinder> {
        if window.len() != word.len() {
            return Err(Error::LengthMismatch {
                window: window.len(),
                word: word.len(),
            });
        }
        Ok(Cylinder { window, word })
    }

    pub fn full() -> Cylinder {
        Cylinder {
            window: Window::empty(),
            word: Word::empty(),
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn is_full(&self) -> bool {
        self.window.is_empty()
    }

    pub fn symbol_at(&self, i: i64) -> Option<Symbol> {
        let (lo, _) = self.window.bounds()?;
        if self.window.contains(i) {
            Some(self.word[(i - lo) as usize])
        } else {
            None
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self.window.bounds() {
            None => true,
            Some((lo, hi)) => lo == -(hi + 1),
        }
    }

    /// True when the notation `left '|' right` can express the window,
    /// i.e. the window is a contiguous run touching the bar from both
    /// sides (or empty).
    pub fn is_bar_anchored(&self) -> bool {
        match self.window.bounds() {
            None => true,
            Some((lo, hi)) => lo <= -1 && hi >= 0 || lo == 0 || hi == -1,
        }
    }

    /// Formats in the `digits '|' digits` notation when the window is
    /// anchored at the bar.
    pub fn to_notation(&self) -> Option<String> {
        let (lo, hi) = match self.window.bounds() {
            None => return Some("|".to_string()),
            Some(b) => b,
        };
        // Window must run contiguously up to the bar on each occupied side.
        if lo < 0 && hi < -1 {
            return None;
        }
        if lo > 0 {
            return None;
        }
        let mut s = String::new();
        for i in lo..=hi {
            if i == 0 {
                s.push('|');
            }
            s.push((b'0' + self.word[(i - lo) as usize].value()) as char);
        }
        if hi < 0 {
            s.push('|');
        }
        Some(s)
    }
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_notation() {
            Some(s) => write!(f, "{s}"),
            None => {
                let (lo, hi) = self.window.bounds().expect("full space is anchored");
                write!(
                    f,
                    "@[{},{}]:{}",
                    slot_from_internal(lo),
                    slot_from_internal(hi),
                    self.word
                )
            }
        }
    }
}

/// Parses the cylinder notation `digits? '|' digits?`; `|` alone denotes
/// the full space.
pub fn parse_cylinder(text: &str, d: u8) -> Result<Cylinder> {
    if text.is_empty() {
        return Err(Error::Parse("empty cylinder notation".into()));
    }
    let bars = text.chars().filter(|&c| c == '|').count();
    if bars != 1 {
        return Err(Error::Parse(format!(
            "expected exactly one '|', found {bars} in {text:?}"
        )));
    }
    let (left, right) = text.split_once('|').expect("one bar present");
    let lw = Word::parse(left, d)?;
    let rw = Word::parse(right, d)?;
    let n = lw.len() as i64;
    let m = rw.len() as i64;
    if n == 0 && m == 0 {
        return Ok(Cylinder::full());
    }
    let window = Window::new(-n, m - 1);
    Cylinder::new(window, lw.concat(&rw))
}

/// Intersects two cylinders. `Ok(None)` means the constraints clash and
/// the intersection is empty. A hull with slots constrained by neither
/// side is an error; callers are expected to refine first.
pub fn intersect(a: &Cylinder, b: &Cylinder) -> Result<Option<Cylinder>> {
    if a.is_full() {
        return Ok(Some(b.clone()));
    }
    if b.is_full() {
        return Ok(Some(a.clone()));
    }
    let hull = a.window().hull(b.window());
    let mut syms = Vec::with_capacity(hull.len());
    for i in hull.iter() {
        match (a.symbol_at(i), b.symbol_at(i)) {
            (Some(x), Some(y)) if x != y => return Ok(None),
            (Some(x), _) => syms.push(x),
            (None, Some(y)) => syms.push(y),
            (None, None) => return Err(Error::Gap),
        }
    }
    Ok(Some(Cylinder::new(hull, Word::new(syms))?))
}

/// Splits a cylinder into the `d^k` disjoint sub-cylinders on the larger
/// window `target`, where `k` is the number of newly constrained slots.
pub fn refine(c: &Cylinder, target: Window, d: u8) -> Result<Vec<Cylinder>> {
    if !target.contains_window(c.window()) {
        return Err(Error::BadRefineTarget);
    }
    if target == c.window() {
        return Ok(vec![c.clone()]);
    }
    let free: Vec<i64> = target.iter().filter(|&i| !c.window().contains(i)).collect();
    let mut out = Vec::with_capacity((d as usize).pow(free.len() as u32));
    for fill in Word::all(free.len(), d) {
        let mut syms = Vec::with_capacity(target.len());
        for i in target.iter() {
            match c.symbol_at(i) {
                Some(s) => syms.push(s),
                None => {
                    let k = free.iter().position(|&j| j == i).expect("free slot");
                    syms.push(fill[k]);
                }
            }
        }
        out.push(Cylinder::new(target, Word::new(syms))?);
    }
    Ok(out)
}

/// The cylinder `τ̂^{-k}(c)`: the word is unchanged and the window moves
/// so that for `k > 0` the bar travels `k` slots to the left through the
/// word, turning `x_{-n}..x_{-1}|x_1..x_m` into
/// `x_{-n}..x_{-k-1}|x_{-k}..x_m`.
pub fn shift_cylinder(c: &Cylinder, k: i64) -> Cylinder {
    Cylinder {
        window: c.window().shifted(k),
        word: c.word().clone(),
    }
}
