//! The interpretable sequence-feature language.
//!
//! A feature is a small expression tree mapping a fixed-length DNA sequence
//! to a real number: composition windows (`count`, `prop`), position checks
//! (`pos_in`), motifs (`motif_count`, `motif_present`), adjacency structure
//! (`transitions`, `stack_energy`), raw one-hot coordinates (`raw`), and a
//! few arithmetic/boolean combinators. The grammar has no division and no
//! recursion, so evaluation is total on any validated expression.
//!
//! Expressions are immutable; parsing, validation, evaluation, rendering,
//! and complexity scoring are pure and thread-safe.

mod energy;
mod eval;
mod halstead;
mod parser;

pub use energy::{stacking_energy, stacking_energy_table_text};
pub use eval::eval_expr;
pub use halstead::{complexity, median, HalsteadMetrics};
pub use parser::parse;

use std::fmt;

use thiserror::Error;

/// The grammar, as shipped in `assets/grammar.bnf`. Embedded verbatim in
/// code-generation prompts.
pub const GRAMMAR_BNF: &str = include_str!("../../assets/grammar.bnf");

/// Errors from parsing or validating feature expressions.
#[derive(Debug, Error, PartialEq)]
pub enum DslError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown function `{name}` at byte {pos}")]
    UnknownFunction { name: String, pos: usize },
    #[error("`{name}` expects {expected} arguments, found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid motif character `{ch}` at byte {pos} (alphabet is A,C,G,T)")]
    BadMotifChar { ch: char, pos: usize },
    #[error("malformed set literal at byte {pos}: {message}")]
    BadSetLiteral { pos: usize, message: String },
    #[error("window [{a},{b}] out of range for sequence length {seq_len}")]
    WindowOutOfRange { a: u32, b: u32, seq_len: usize },
    #[error("position {pos} out of range for sequence length {seq_len}")]
    PositionOutOfRange { pos: u32, seq_len: usize },
    #[error("raw index {index} out of range (must be < {max})")]
    RawIndexOutOfRange { index: u32, max: usize },
    #[error("`{combinator}` requires indicator-valued operands; `{operand}` is numeric")]
    NonIndicatorOperand {
        combinator: &'static str,
        operand: String,
    },
    #[error("expression depth {depth} exceeds cap {cap}")]
    DepthExceeded { depth: usize, cap: usize },
    #[error("expression uses {count} windows, exceeding cap {cap}")]
    WindowCountExceeded { count: usize, cap: usize },
}

/// A non-empty subset of {A,C,G,T}, stored as a 4-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NucSet(u8);

impl NucSet {
    pub const A: NucSet = NucSet(0b0001);
    pub const C: NucSet = NucSet(0b0010);
    pub const G: NucSet = NucSet(0b0100);
    pub const T: NucSet = NucSet(0b1000);
    /// Strong (G/C pairing).
    pub const S: NucSet = NucSet(0b0110);
    /// Weak (A/T pairing).
    pub const W: NucSet = NucSet(0b1001);
    /// Purine (A/G).
    pub const R: NucSet = NucSet(0b0101);
    /// Pyrimidine (C/T).
    pub const Y: NucSet = NucSet(0b1010);
    /// Any base.
    pub const N: NucSet = NucSet(0b1111);

    /// Build from base characters; returns `None` if any character is not
    /// in A,C,G,T or the resulting set would be empty.
    pub fn from_bases(bases: &[u8]) -> Option<NucSet> {
        let mut mask = 0u8;
        for &b in bases {
            mask |= match b {
                b'A' => 0b0001,
                b'C' => 0b0010,
                b'G' => 0b0100,
                b'T' => 0b1000,
                _ => return None,
            };
        }
        (mask != 0).then_some(NucSet(mask))
    }

    pub fn contains(self, base: u8) -> bool {
        let bit = match base {
            b'A' => 0b0001,
            b'C' => 0b0010,
            b'G' => 0b0100,
            b'T' => 0b1000,
            _ => 0,
        };
        self.0 & bit != 0
    }

    fn class_name(self) -> Option<&'static str> {
        match self {
            NucSet::S => Some("S"),
            NucSet::W => Some("W"),
            NucSet::R => Some("R"),
            NucSet::Y => Some("Y"),
            NucSet::N => Some("N"),
            _ => None,
        }
    }

    pub fn from_class_name(name: &str) -> Option<NucSet> {
        match name {
            "S" => Some(NucSet::S),
            "W" => Some(NucSet::W),
            "R" => Some(NucSet::R),
            "Y" => Some(NucSet::Y),
            "N" => Some(NucSet::N),
            _ => None,
        }
    }
}

impl fmt::Display for NucSet {
    /// Canonical spelling: the named class when one matches exactly,
    /// otherwise braces with bases in A,C,G,T order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = self.class_name() {
            return f.write_str(name);
        }
        f.write_str("{")?;
        let mut first = true;
        for (bit, ch) in [(1u8, 'A'), (2, 'C'), (4, 'G'), (8, 'T')] {
            if self.0 & bit != 0 {
                if !first {
                    f.write_str(",")?;
                }
                write!(f, "{ch}")?;
                first = false;
            }
        }
        f.write_str("}")
    }
}

/// An inclusive position window `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub a: u32,
    pub b: u32,
}

impl Window {
    pub fn new(a: u32, b: u32) -> Window {
        Window { a, b }
    }

    #[allow(clippy::len_without_is_empty)] // validated windows are never empty
    pub fn len(self) -> u32 {
        self.b - self.a + 1
    }
}

/// A validated ACGT motif pattern, non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Motif(String);

impl Motif {
    pub fn new(pat: &str) -> Option<Motif> {
        (!pat.is_empty() && pat.bytes().all(|b| matches!(b, b'A' | b'C' | b'G' | b'T')))
            .then(|| Motif(pat.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A reduced rational constant with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Option<Rational> {
        if den == 0 {
            return None;
        }
        let sign = if (num < 0) != (den < 0) { -1 } else { 1 };
        let (num, den) = (num.unsigned_abs(), den.unsigned_abs());
        let g = gcd(num, den).max(1);
        Some(Rational {
            num: sign * (num / g) as i64,
            den: (den / g) as i64,
        })
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// A sequence-feature expression.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureExpr {
    /// Number of positions in `[a,b]` whose base is in `set`.
    Count { set: NucSet, window: Window },
    /// `Count` divided by the window length; always in [0,1].
    Prop { set: NucSet, window: Window },
    /// Indicator: base at `pos` is in `set`.
    PosIn { pos: u32, set: NucSet },
    /// Overlapping occurrences of `pat` lying fully inside `[a,b]`.
    MotifCount { pat: Motif, window: Window },
    /// Indicator: at least one occurrence of `pat` inside `[a,b]`.
    MotifPresent { pat: Motif, window: Window },
    /// Adjacent pairs `(p, p+1)` with `a <= p < b`, `base(p) in from`,
    /// `base(p+1) in to`.
    Transitions {
        from: NucSet,
        to: NucSet,
        window: Window,
    },
    /// Sum of dinucleotide stacking energies over adjacent pairs in `[a,b]`.
    StackEnergy { window: Window },
    /// The one-hot coordinate `index` (position-major, base order A,C,G,T).
    Raw { index: u32 },
    Add(Box<FeatureExpr>, Box<FeatureExpr>),
    Sub(Box<FeatureExpr>, Box<FeatureExpr>),
    Scale(Rational, Box<FeatureExpr>),
    And(Box<FeatureExpr>, Box<FeatureExpr>),
    Or(Box<FeatureExpr>, Box<FeatureExpr>),
    Not(Box<FeatureExpr>),
}

impl FeatureExpr {
    /// The raw one-hot coordinate for (position, base-index in A,C,G,T).
    pub fn raw_coord(pos: u32, base_idx: u32) -> FeatureExpr {
        FeatureExpr::Raw {
            index: pos * 4 + base_idx,
        }
    }

    /// True when the expression is statically known to evaluate to 0 or 1.
    pub fn is_indicator(&self) -> bool {
        matches!(
            self,
            FeatureExpr::PosIn { .. }
                | FeatureExpr::MotifPresent { .. }
                | FeatureExpr::And(..)
                | FeatureExpr::Or(..)
                | FeatureExpr::Not(..)
        )
    }

    /// Grammar name of this node kind.
    pub fn kind_name(&self) -> &'static str {
        match self {
            FeatureExpr::Count { .. } => "count",
            FeatureExpr::Prop { .. } => "prop",
            FeatureExpr::PosIn { .. } => "pos_in",
            FeatureExpr::MotifCount { .. } => "motif_count",
            FeatureExpr::MotifPresent { .. } => "motif_present",
            FeatureExpr::Transitions { .. } => "transitions",
            FeatureExpr::StackEnergy { .. } => "stack_energy",
            FeatureExpr::Raw { .. } => "raw",
            FeatureExpr::Add(..) => "add",
            FeatureExpr::Sub(..) => "sub",
            FeatureExpr::Scale(..) => "scale",
            FeatureExpr::And(..) => "and",
            FeatureExpr::Or(..) => "or",
            FeatureExpr::Not(..) => "not",
        }
    }

    pub fn depth(&self) -> usize {
        1 + match self {
            FeatureExpr::Add(l, r)
            | FeatureExpr::Sub(l, r)
            | FeatureExpr::And(l, r)
            | FeatureExpr::Or(l, r) => l.depth().max(r.depth()),
            FeatureExpr::Scale(_, e) | FeatureExpr::Not(e) => e.depth(),
            _ => 0,
        }
    }

    fn window_count(&self) -> usize {
        let own = usize::from(matches!(
            self,
            FeatureExpr::Count { .. }
                | FeatureExpr::Prop { .. }
                | FeatureExpr::MotifCount { .. }
                | FeatureExpr::MotifPresent { .. }
                | FeatureExpr::Transitions { .. }
                | FeatureExpr::StackEnergy { .. }
        ));
        own + match self {
            FeatureExpr::Add(l, r)
            | FeatureExpr::Sub(l, r)
            | FeatureExpr::And(l, r)
            | FeatureExpr::Or(l, r) => l.window_count() + r.window_count(),
            FeatureExpr::Scale(_, e) | FeatureExpr::Not(e) => e.window_count(),
            _ => 0,
        }
    }
}

impl fmt::Display for FeatureExpr {
    /// Canonical rendering: one spelling per AST, no whitespace.
    /// `parse(render(e))` is structurally identical to `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureExpr::Count { set, window } => {
                write!(f, "count({set},{},{})", window.a, window.b)
            }
            FeatureExpr::Prop { set, window } => {
                write!(f, "prop({set},{},{})", window.a, window.b)
            }
            FeatureExpr::PosIn { pos, set } => write!(f, "pos_in({pos},{set})"),
            FeatureExpr::MotifCount { pat, window } => {
                write!(f, "motif_count(\"{}\",{},{})", pat.as_str(), window.a, window.b)
            }
            FeatureExpr::MotifPresent { pat, window } => write!(
                f,
                "motif_present(\"{}\",{},{})",
                pat.as_str(),
                window.a,
                window.b
            ),
            FeatureExpr::Transitions { from, to, window } => {
                write!(f, "transitions({from},{to},{},{})", window.a, window.b)
            }
            FeatureExpr::StackEnergy { window } => {
                write!(f, "stack_energy({},{})", window.a, window.b)
            }
            FeatureExpr::Raw { index } => write!(f, "raw({index})"),
            FeatureExpr::Add(l, r) => write!(f, "add({l},{r})"),
            FeatureExpr::Sub(l, r) => write!(f, "sub({l},{r})"),
            FeatureExpr::Scale(c, e) => write!(f, "scale({c},{e})"),
            FeatureExpr::And(l, r) => write!(f, "and({l},{r})"),
            FeatureExpr::Or(l, r) => write!(f, "or({l},{r})"),
            FeatureExpr::Not(e) => write!(f, "not({e})"),
        }
    }
}

/// Canonical text for an expression. Inverse of [`parse`] up to structural
/// equality.
pub fn render(e: &FeatureExpr) -> String {
    e.to_string()
}

// Documents embed expressions as their canonical DSL text.
impl serde::Serialize for FeatureExpr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for FeatureExpr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Structural caps enforced at validation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DslLimits {
    pub max_depth: usize,
    pub max_windows: usize,
}

impl DslLimits {
    /// Default interpretability regime.
    pub fn standard() -> DslLimits {
        DslLimits {
            max_depth: 8,
            max_windows: 6,
        }
    }

    /// Relaxed caps for the performance-oriented mode; raised, not removed.
    pub fn perf() -> DslLimits {
        DslLimits {
            max_depth: 16,
            max_windows: 12,
        }
    }
}

impl Default for DslLimits {
    fn default() -> Self {
        DslLimits::standard()
    }
}

/// Validate an expression against a sequence length using standard limits.
pub fn validate(e: &FeatureExpr, seq_len: usize) -> Result<(), DslError> {
    validate_with(e, seq_len, DslLimits::standard())
}

/// Validate window bounds, raw indices, boolean operand typing, depth, and
/// window-count caps. A validated expression evaluates without error on any
/// sequence of length `seq_len`.
pub fn validate_with(e: &FeatureExpr, seq_len: usize, limits: DslLimits) -> Result<(), DslError> {
    let depth = e.depth();
    if depth > limits.max_depth {
        return Err(DslError::DepthExceeded {
            depth,
            cap: limits.max_depth,
        });
    }
    let windows = e.window_count();
    if windows > limits.max_windows {
        return Err(DslError::WindowCountExceeded {
            count: windows,
            cap: limits.max_windows,
        });
    }
    validate_node(e, seq_len)
}

fn check_window(w: Window, seq_len: usize) -> Result<(), DslError> {
    if w.a > w.b || (w.b as usize) >= seq_len {
        return Err(DslError::WindowOutOfRange {
            a: w.a,
            b: w.b,
            seq_len,
        });
    }
    Ok(())
}

fn validate_node(e: &FeatureExpr, seq_len: usize) -> Result<(), DslError> {
    match e {
        FeatureExpr::Count { window, .. }
        | FeatureExpr::Prop { window, .. }
        | FeatureExpr::MotifCount { window, .. }
        | FeatureExpr::MotifPresent { window, .. }
        | FeatureExpr::Transitions { window, .. }
        | FeatureExpr::StackEnergy { window } => check_window(*window, seq_len),
        FeatureExpr::PosIn { pos, .. } => {
            if (*pos as usize) >= seq_len {
                Err(DslError::PositionOutOfRange {
                    pos: *pos,
                    seq_len,
                })
            } else {
                Ok(())
            }
        }
        FeatureExpr::Raw { index } => {
            if (*index as usize) >= 4 * seq_len {
                Err(DslError::RawIndexOutOfRange {
                    index: *index,
                    max: 4 * seq_len,
                })
            } else {
                Ok(())
            }
        }
        FeatureExpr::Add(l, r) | FeatureExpr::Sub(l, r) => {
            validate_node(l, seq_len)?;
            validate_node(r, seq_len)
        }
        FeatureExpr::Scale(_, inner) => validate_node(inner, seq_len),
        FeatureExpr::And(l, r) | FeatureExpr::Or(l, r) => {
            let combinator = e.kind_name();
            for operand in [l, r] {
                if !operand.is_indicator() {
                    return Err(DslError::NonIndicatorOperand {
                        combinator,
                        operand: operand.to_string(),
                    });
                }
            }
            validate_node(l, seq_len)?;
            validate_node(r, seq_len)
        }
        FeatureExpr::Not(inner) => {
            if !inner.is_indicator() {
                return Err(DslError::NonIndicatorOperand {
                    combinator: "not",
                    operand: inner.to_string(),
                });
            }
            validate_node(inner, seq_len)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> FeatureExpr {
        parse(text).unwrap()
    }

    #[test]
    fn nucset_canonical_rendering() {
        assert_eq!(NucSet::from_bases(b"G").unwrap().to_string(), "{G}");
        assert_eq!(NucSet::from_bases(b"GC").unwrap().to_string(), "S");
        assert_eq!(NucSet::from_bases(b"AG").unwrap().to_string(), "R");
        assert_eq!(NucSet::from_bases(b"CT").unwrap().to_string(), "Y");
        assert_eq!(NucSet::from_bases(b"TA").unwrap().to_string(), "W");
        assert_eq!(NucSet::from_bases(b"ACGT").unwrap().to_string(), "N");
        assert_eq!(NucSet::from_bases(b"CA").unwrap().to_string(), "{A,C}");
    }

    #[test]
    fn window_bound_checked_at_validate_not_parse() {
        let e = p("prop({G},49,20)");
        assert!(matches!(
            validate(&e, 101),
            Err(DslError::WindowOutOfRange { a: 49, b: 20, .. })
        ));
    }

    #[test]
    fn position_boundaries() {
        assert!(validate(&p("pos_in(100,{A})"), 101).is_ok());
        assert!(matches!(
            validate(&p("pos_in(101,{A})"), 101),
            Err(DslError::PositionOutOfRange { pos: 101, .. })
        ));
    }

    #[test]
    fn raw_index_bound() {
        assert!(validate(&p("raw(403)"), 101).is_ok());
        assert!(validate(&p("raw(404)"), 101).is_err());
    }

    #[test]
    fn boolean_operands_must_be_indicators() {
        let e = p("and(count({A},0,3),pos_in(0,{A}))");
        assert!(matches!(
            validate(&e, 8),
            Err(DslError::NonIndicatorOperand {
                combinator: "and",
                ..
            })
        ));
        assert!(validate(&p("not(count({A},0,3))"), 8).is_err());
        assert!(validate(&p("and(pos_in(0,{A}),motif_present(\"AC\",0,3))"), 8).is_ok());
    }

    #[test]
    fn depth_cap_enforced() {
        let mut text = "pos_in(0,{A})".to_string();
        for _ in 0..8 {
            text = format!("not({text})");
        }
        let e = p(&text); // depth 9
        assert!(matches!(
            validate(&e, 4),
            Err(DslError::DepthExceeded { depth: 9, cap: 8 })
        ));
        assert!(validate_with(&e, 4, DslLimits::perf()).is_ok());
    }

    #[test]
    fn window_count_cap_enforced() {
        // 7 windowed leaves under a chain of adds.
        let leaf = "count({A},0,1)";
        let mut text = leaf.to_string();
        for _ in 0..6 {
            text = format!("add({text},{leaf})");
        }
        let e = p(&text);
        assert!(matches!(
            validate(&e, 4),
            Err(DslError::WindowCountExceeded { count: 7, cap: 6 })
        ));
    }

    #[test]
    fn rational_normalizes() {
        assert_eq!(Rational::new(2, 4).unwrap().to_string(), "1/2");
        assert_eq!(Rational::new(-2, 4).unwrap().to_string(), "-1/2");
        assert_eq!(Rational::new(3, -6).unwrap().to_string(), "-1/2");
        assert_eq!(Rational::new(4, 2).unwrap().to_string(), "2");
        assert!(Rational::new(1, 0).is_none());
    }
}
