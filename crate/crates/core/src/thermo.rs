//! Finite-range potentials and their equilibrium states on the full
//! shift: transfer matrix, Perron eigendata, potential normalization,
//! cylinder measures, entropy, pressure and finite-volume reweighting.

use crate::error::{Error, Result};
use crate::symbolic::{Cylinder, Symbol, Word};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Default relative tolerance for the power iteration.
pub const PERRON_TOL: f64 = 1e-13;
/// Default iteration cap for the power iteration.
pub const PERRON_CAP: usize = 200_000;

const MAX_TABLE: usize = 1 << 24;

/// A potential depending on the first `r` coordinates right of the bar,
/// stored as the full table of its values on words of length `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRangePotential {
    d: u8,
    r: usize,
    values: Vec<f64>,
}

impl FiniteRangePotential {
    pub fn new(d: u8, r: usize, values: Vec<f64>) -> Result<FiniteRangePotential> {
        if d == 0 {
            return Err(Error::PotentialFile(
                "alphabet size must be positive".into(),
            ));
        }
        if r == 0 {
            return Err(Error::PotentialFile("range must be at least 1".into()));
        }
        let expect = (d as usize)
            .checked_pow(r as u32)
            .filter(|&n| n <= MAX_TABLE)
            .ok_or_else(|| Error::PotentialFile(format!("table d^r too large: d={d}, r={r}")))?;
        if values.len() != expect {
            return Err(Error::PotentialFile(format!(
                "expected {expect} table entries, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::PotentialFile(format!("non-finite table entry {v}")));
        }
        Ok(FiniteRangePotential { d, r, values })
    }

    pub fn zero(d: u8) -> FiniteRangePotential {
        FiniteRangePotential {
            d,
            r: 1,
            values: vec![0.0; d as usize],
        }
    }

    pub fn constant(d: u8, c: f64) -> FiniteRangePotential {
        FiniteRangePotential {
            d,
            r: 1,
            values: vec![c; d as usize],
        }
    }

    pub fn alphabet(&self) -> u8 {
        self.d
    }

    pub fn range(&self) -> usize {
        self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value on an `r`-word given by its lexicographic code.
    pub fn value_code(&self, code: usize) -> f64 {
        self.values[code]
    }

    /// Value on the length-`r` slice starting at `at`.
    pub fn value_at(&self, word: &[Symbol], at: usize) -> f64 {
        self.values[encode_slice(&word[at..at + self.r], self.d)]
    }

    /// Oscillation `sup U - inf U`.
    pub fn osc(&self) -> f64 {
        let max = self
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let min = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    pub fn scaled(&self, beta: f64) -> FiniteRangePotential {
        FiniteRangePotential {
            d: self.d,
            r: self.r,
            values: self.values.iter().map(|v| beta * v).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<FiniteRangePotential> {
        let file: PotentialFile =
            serde_json::from_str(text).map_err(|e| Error::PotentialFile(e.to_string()))?;
        let d = file.alphabet;
        let r = file.range;
        if d == 0 || d > 9 {
            return Err(Error::PotentialFile(format!(
                "alphabet size {d} outside 1..=9"
            )));
        }
        if r == 0 {
            return Err(Error::PotentialFile("range must be at least 1".into()));
        }
        let expect = (d as usize)
            .checked_pow(r as u32)
            .filter(|&n| n <= MAX_TABLE)
            .ok_or_else(|| Error::PotentialFile(format!("table d^r too large: d={d}, r={r}")))?;
        let mut values = vec![f64::NAN; expect];
        for (key, v) in &file.values {
            let w = Word::parse(key, d)
                .map_err(|_| Error::PotentialFile(format!("bad word key {key:?}")))?;
            if w.len() != r {
                return Err(Error::PotentialFile(format!(
                    "word key {key:?} does not have length {r}"
                )));
            }
            values[w.encode(d)] = *v;
        }
        if file.values.len() != expect || values.iter().any(|v| v.is_nan()) {
            return Err(Error::PotentialFile(format!(
                "table must list every word of length {r} exactly once"
            )));
        }
        FiniteRangePotential::new(d, r, values)
    }

    pub fn to_json(&self) -> String {
        let mut values = BTreeMap::new();
        for (code, v) in self.values.iter().enumerate() {
            let w = Word::decode(code, self.r, self.d);
            values.insert(w.to_string(), *v);
        }
        let file = PotentialFile {
            alphabet: self.d,
            range: self.r,
            values,
        };
        serde_json::to_string_pretty(&file).expect("potential serializes")
    }

    pub fn load(path: &Path) -> Result<FiniteRangePotential> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::PotentialFile(format!("{}: {e}", path.display())))?;
        FiniteRangePotential::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialFile {
    alphabet: u8,
    range: usize,
    values: BTreeMap<String, f64>,
}

fn encode_slice(word: &[Symbol], d: u8) -> usize {
    word.iter()
        .fold(0usize, |acc, s| acc * d as usize + s.index())
}

/// Perron eigendata of the transfer matrix: leading eigenvalue, right and
/// left eigenvectors over `(r-1)`-word states (`nu . h = 1`) and the
/// pressure `log lambda`.
#[derive(Debug, Clone)]
pub struct PerronData {
    pub lambda: f64,
    pub h: Vec<f64>,
    pub nu: Vec<f64>,
    pub pressure: f64,
}

/// Number of `(r-1)`-word states; one state when `r = 1`.
pub fn state_count(d: u8, r: usize) -> usize {
    (d as usize).pow(r as u32 - 1)
}

/// Dense transfer matrix over `(r-1)`-word states, row-major. Entry
/// `(a, b)` is `exp f(a . last(b))` when `b` is a shift-successor of `a`
/// and zero otherwise.
pub fn transfer_matrix(u: &FiniteRangePotential) -> Vec<f64> {
    let d = u.d as usize;
    let s = state_count(u.d, u.r);
    let mut m = vec![0.0; s * s];
    for a in 0..s {
        for j in 0..d {
            // r-word code of a . j and state code of its suffix.
            let word = a * d + j;
            let b = word % s;
            m[a * s + b] += u.values[word].exp();
        }
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64], transpose: bool) {
    let s = v.len();
    out.iter_mut().for_each(|x| *x = 0.0);
    for i in 0..s {
        for j in 0..s {
            let entry = if transpose {
                m[j * s + i]
            } else {
                m[i * s + j]
            };
            out[i] += entry * v[j];
        }
    }
}

fn power_iterate(
    m: &[f64],
    s: usize,
    tol: f64,
    cap: usize,
    transpose: bool,
) -> Result<(f64, Vec<f64>)> {
    let mut v = vec![1.0 / s as f64; s];
    let mut w = vec![0.0; s];
    for _ in 0..cap {
        mat_vec(m, &v, &mut w, transpose);
        let lambda: f64 = w.iter().sum();
        let vmax = v.iter().cloned().fold(0.0, f64::max);
        let res = v
            .iter()
            .zip(&w)
            .map(|(x, y)| (y - lambda * x).abs())
            .fold(0.0, f64::max);
        for (x, y) in v.iter_mut().zip(&w) {
            *x = y / lambda;
        }
        if res <= tol * lambda * vmax {
            return Ok((lambda, v));
        }
    }
    Err(Error::Convergence { tol, cap })
}

/// Computes the Perron data by power iteration with the deterministic
/// all-ones start.
pub fn perron(u: &FiniteRangePotential) -> Result<PerronData> {
    perron_with(u, PERRON_TOL, PERRON_CAP)
}

pub fn perron_with(u: &FiniteRangePotential, tol: f64, cap: usize) -> Result<PerronData> {
    let s = state_count(u.d, u.r);
    if s * s > MAX_TABLE {
        return Err(Error::SystemCap {
            size: s * s,
            cap: MAX_TABLE,
        });
    }
    let m = transfer_matrix(u);
    let (_, mut h) = power_iterate(&m, s, tol, cap, false)?;
    let (_, mut nu) = power_iterate(&m, s, tol, cap, true)?;
    // Rayleigh quotient with both eigenvectors squares the residual.
    let mut mh = vec![0.0; s];
    mat_vec(&m, &h, &mut mh, false);
    let num: f64 = nu.iter().zip(&mh).map(|(a, b)| a * b).sum();
    let den: f64 = nu.iter().zip(&h).map(|(a, b)| a * b).sum();
    let lambda = num / den;
    let hmax = h.iter().cloned().fold(0.0, f64::max);
    h.iter_mut().for_each(|x| *x /= hmax);
    let dot: f64 = nu.iter().zip(&h).map(|(a, b)| a * b).sum();
    nu.iter_mut().for_each(|x| *x /= dot);
    Ok(PerronData {
        lambda,
        h,
        nu,
        pressure: lambda.ln(),
    })
}

/// The equilibrium state of a finite-range potential, realized as the
/// stationary Markov chain over `(r-1)`-word states produced by the
/// Perron eigendata.
#[derive(Debug, Clone)]
pub struct MarkovEquilibrium {
    potential: FiniteRangePotential,
    normalized: FiniteRangePotential,
    perron: PerronData,
    stationary: Vec<f64>,
    transitions: Vec<f64>,
    exp_normalized: Vec<f64>,
}

/// Builds the equilibrium state for `u`.
pub fn normalize(u: &FiniteRangePotential) -> Result<MarkovEquilibrium> {
    normalize_with(u, PERRON_TOL, PERRON_CAP)
}

pub fn normalize_with(u: &FiniteRangePotential, tol: f64, cap: usize) -> Result<MarkovEquilibrium> {
    let perron = perron_with(u, tol, cap)?;
    let d = u.d as usize;
    let s = state_count(u.d, u.r);
    let mut table = vec![0.0; u.values.len()];
    let mut exp_table = vec![0.0; u.values.len()];
    let mut transitions = vec![0.0; s * s];
    for a in 0..s {
        for j in 0..d {
            let word = a * d + j;
            let b = word % s;
            let v = u.values[word] + perron.h[b].ln() - perron.h[a].ln() - perron.pressure;
            table[word] = v;
            exp_table[word] = v.exp();
            transitions[a * s + b] += exp_table[word];
        }
    }
    let stationary: Vec<f64> = (0..s).map(|a| perron.nu[a] * perron.h[a]).collect();
    let normalized = FiniteRangePotential::new(u.d, u.r, table)?;
    Ok(MarkovEquilibrium {
        potential: u.clone(),
        normalized,
        perron,
        stationary,
        transitions,
        exp_normalized: exp_table,
    })
}

impl MarkovEquilibrium {
    pub fn potential(&self) -> &FiniteRangePotential {
        &self.potential
    }

    /// The normalized potential: `f + log h(successor) - log h(state) - P`.
    pub fn normalized(&self) -> &FiniteRangePotential {
        &self.normalized
    }

    pub fn perron(&self) -> &PerronData {
        &self.perron
    }

    pub fn pressure(&self) -> f64 {
        self.perron.pressure
    }

    pub fn alphabet(&self) -> u8 {
        self.potential.d
    }

    pub fn range(&self) -> usize {
        self.potential.r
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Row-stochastic transition matrix over `(r-1)`-word states.
    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    /// Measure of the one-sided cylinder carrying `word` right of the bar.
    pub fn word_measure(&self, word: &[Symbol]) -> f64 {
        let d = self.potential.d;
        let r = self.potential.r;
        let s = word.len();
        if s < r - 1 {
            // Sum the stationary vector over all completions.
            let base = encode_slice(word, d) * (d as usize).pow((r - 1 - s) as u32);
            let span = (d as usize).pow((r - 1 - s) as u32);
            return self.stationary[base..base + span].iter().sum();
        }
        let mut acc = self.stationary[encode_slice(&word[..r - 1], d)];
        for k in 0..s + 1 - r {
            acc *= self.exp_normalized[encode_slice(&word[k..k + r], d)];
        }
        acc
    }

    /// Like `word_measure`, but the chain is started from the stationary
    /// vector at the fixed internal position `anchor` instead of at the
    /// word itself. Agrees with `word_measure` exactly when the stationary
    /// vector is a true fixed point; used by the invariance checker.
    pub fn anchored_cylinder_measure(&self, c: &Cylinder, anchor: i64) -> f64 {
        let (lo, _) = match c.window().bounds() {
            None => return 1.0,
            Some(b) => b,
        };
        assert!(anchor <= lo, "anchor must sit left of the window");
        let s = self.stationary.len();
        let mut dist = self.stationary.clone();
        let mut next = vec![0.0; s];
        for _ in 0..(lo - anchor) {
            mat_vec(&self.transitions, &dist, &mut next, true);
            std::mem::swap(&mut dist, &mut next);
        }
        let d = self.potential.d;
        let r = self.potential.r;
        let word = c.word().symbols();
        if word.len() < r - 1 {
            let base = encode_slice(word, d) * (d as usize).pow((r - 1 - word.len()) as u32);
            let span = (d as usize).pow((r - 1 - word.len()) as u32);
            return dist[base..base + span].iter().sum();
        }
        let mut acc = dist[encode_slice(&word[..r - 1], d)];
        for k in 0..word.len() + 1 - r {
            acc *= self.exp_normalized[encode_slice(&word[k..k + r], d)];
        }
        acc
    }

    #[cfg(test)]
    pub(crate) fn with_stationary(mut self, stationary: Vec<f64>) -> MarkovEquilibrium {
        assert_eq!(stationary.len(), self.stationary.len());
        self.stationary = stationary;
        self
    }
}

/// Anything that assigns probabilities to cylinder sets.
pub trait CylinderMeasure {
    fn cylinder_measure(&self, c: &Cylinder) -> Result<f64>;
    fn alphabet(&self) -> u8;
}

impl CylinderMeasure for MarkovEquilibrium {
    /// Shift invariance reduces a two-sided cylinder to the one-sided
    /// measure of its concatenated word.
    fn cylinder_measure(&self, c: &Cylinder) -> Result<f64> {
        Ok(self.word_measure(c.word().symbols()))
    }

    fn alphabet(&self) -> u8 {
        self.potential.d
    }
}

/// Entropy of the stationary chain and the integral of the potential.
pub fn entropy_and_integral(m: &MarkovEquilibrium) -> (f64, f64) {
    let r = m.range();
    let d = m.alphabet();
    let mut entropy = 0.0;
    let mut integral = 0.0;
    for word in Word::all(r, d) {
        let mu = m.word_measure(word.symbols());
        let code = word.encode(d);
        entropy -= mu * m.normalized.value_code(code);
        integral += mu * m.potential.value_code(code);
    }
    (entropy, integral)
}

/// Birkhoff sum of `u` along `steps` shifts of the word.
pub fn birkhoff_sum(u: &FiniteRangePotential, word: &[Symbol], steps: usize) -> Result<f64> {
    if word.len() + 1 < steps + u.r {
        return Err(Error::WordTooShort {
            len: word.len(),
            steps,
            range: u.r,
        });
    }
    Ok((0..steps).map(|k| u.value_at(word, k)).sum())
}

/// The finite-volume reweighting of the maximal-entropy measure by the
/// Birkhoff sum of `b_pot` over shift powers `a..b`. Converges to the
/// equilibrium of `b_pot` as the span grows.
#[derive(Debug, Clone)]
pub struct FiniteVolume {
    potential: FiniteRangePotential,
    a: i64,
    b: i64,
    z: f64,
}

impl FiniteVolume {
    pub fn new(
        potential: FiniteRangePotential,
        a: i64,
        b: i64,
        span_cap: i64,
    ) -> Result<FiniteVolume> {
        if a >= 0 || b <= 0 {
            return Err(Error::PotentialFile(format!(
                "finite-volume span needs a < 0 < b, got [{a},{b}]"
            )));
        }
        if b - a > span_cap {
            return Err(Error::SpanCap {
                a,
                b,
                cap: span_cap,
            });
        }
        let mut fv = FiniteVolume {
            potential,
            a,
            b,
            z: 1.0,
        };
        fv.z = fv.restricted_sum(&Cylinder::full())?;
        Ok(fv)
    }

    pub fn span(&self) -> (i64, i64) {
        (self.a, self.b)
    }

    fn slot_lo(&self) -> i64 {
        self.a
    }

    fn slot_hi(&self) -> i64 {
        self.b + self.potential.r as i64 - 2
    }

    /// Exact sum of `exp(Birkhoff)` over all words on the span matching
    /// the cylinder constraints.
    fn restricted_sum(&self, c: &Cylinder) -> Result<f64> {
        let lo = self.slot_lo();
        let hi = self.slot_hi();
        if let Some((wlo, whi)) = c.window().bounds() {
            if wlo < lo || whi > hi {
                return Err(Error::OutsideSpan {
                    a: self.a,
                    b: self.b,
                });
            }
        }
        let d = self.potential.d as usize;
        let len = (hi - lo + 1) as usize;
        let steps = (self.b - self.a) as usize;
        let mut word: Vec<Symbol> = vec![Symbol::from_index(0); len];
        // Positions constrained by the cylinder, fixed once.
        let mut fixed = vec![false; len];
        for i in c.window().iter() {
            word[(i - lo) as usize] = c.symbol_at(i).expect("constrained slot");
            fixed[(i - lo) as usize] = true;
        }
        let free: Vec<usize> = (0..len).filter(|&p| !fixed[p]).collect();
        let total = d.pow(free.len() as u32);
        let mut sum = 0.0;
        for mut code in 0..total {
            for &p in free.iter().rev() {
                word[p] = Symbol::from_index(code % d);
                code /= d;
            }
            let mut s = 0.0;
            for k in 0..steps {
                s += self.potential.value_at(&word, k);
            }
            sum += s.exp();
        }
        Ok(sum)
    }
}

impl CylinderMeasure for FiniteVolume {
    fn cylinder_measure(&self, c: &Cylinder) -> Result<f64> {
        Ok(self.restricted_sum(c)? / self.z)
    }

    fn alphabet(&self) -> u8 {
        self.potential.d
    }
}
