use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cylinder notation parse error: {0}")]
    Parse(String),

    #[error("symbol {value} outside alphabet 1..={d}")]
    SymbolOutOfRange { value: u8, d: u8 },

    #[error("window/word length mismatch: window {window} vs word {word}")]
    LengthMismatch { window: usize, word: usize },

    #[error("intersection hull has unconstrained gap slots; refine first")]
    Gap,

    #[error("refinement target does not contain the cylinder window")]
    BadRefineTarget,

    #[error("degenerate pair: source equals target, metric distance is zero")]
    DegeneratePair,

    #[error("context too short: need {needed} symbols on the {side} side, have {have}")]
    ContextTooShort {
        side: &'static str,
        needed: usize,
        have: usize,
    },

    #[error("bar move distance {r} exceeds left word length {left}")]
    BarMoveTooFar { r: usize, left: usize },

    #[error("power iteration did not reach tolerance {tol:e} in {cap} iterations")]
    Convergence { tol: f64, cap: usize },

    #[error("word of length {len} too short for {steps} Birkhoff steps at range {range}")]
    WordTooShort {
        len: usize,
        steps: usize,
        range: usize,
    },

    #[error("span [{a},{b}] exceeds configured cap {cap}")]
    SpanCap { a: i64, b: i64, cap: i64 },

    #[error("cylinder window not covered by span [{a},{b}]")]
    OutsideSpan { a: i64, b: i64 },

    #[error("hull window length {len} exceeds configured cap {cap}")]
    HullCap { len: usize, cap: usize },

    #[error("test cylinder is not contained in the image of the piece")]
    NotInImage,

    #[error("gibbs constraint system inconsistent: residual {residual:e}")]
    Inconsistent { residual: f64 },

    #[error("system size {size} exceeds configured cap {cap}")]
    SystemCap { size: usize, cap: usize },

    #[error("depth {depth} is below the potential range {range}")]
    DepthBelowRange { depth: usize, range: usize },

    #[error("potential file: {0}")]
    PotentialFile(String),

    #[error("algebra element file: {0}")]
    ElementFile(String),

    #[error("alphabet size {0} not representable in digit notation (need 1..=9)")]
    AlphabetTooLarge(u8),
}

pub type Result<T> = std::result::Result<T, Error>;
