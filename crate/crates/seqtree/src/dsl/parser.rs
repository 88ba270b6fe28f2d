//! Hand-written LL(1) parser for the feature grammar.
//!
//! Whitespace is allowed between tokens; the canonical rendering emits
//! none. Window bounds are range-checked later by `validate`, not here.

use super::{DslError, FeatureExpr, Motif, NucSet, Rational, Window};

/// Parse a feature expression. Errors carry the byte offset of the
/// offending token.
pub fn parse(text: &str) -> Result<FeatureExpr, DslError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(DslError::Syntax {
            pos: p.pos,
            message: format!("unexpected trailing input `{}`", p.rest_preview()),
        });
    }
    Ok(expr)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

/// One parsed argument, before signature checking.
enum Arg {
    Expr(FeatureExpr),
    Set(NucSet),
    Nat(u32),
    Konst(Rational),
    Motif(Motif),
}

impl Arg {
    fn kind(&self) -> &'static str {
        match self {
            Arg::Expr(_) => "expression",
            Arg::Set(_) => "nucleotide set",
            Arg::Nat(_) => "position",
            Arg::Konst(_) => "constant",
            Arg::Motif(_) => "motif string",
        }
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn rest_preview(&self) -> String {
        let rest = &self.bytes[self.pos..];
        let take = rest.len().min(12);
        String::from_utf8_lossy(&rest[..take]).into_owned()
    }

    fn expect(&mut self, ch: u8) -> Result<(), DslError> {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(DslError::Syntax {
                pos: self.pos,
                message: format!("expected `{}`, found `{}`", ch as char, self.rest_preview()),
            })
        }
    }

    fn ident(&mut self) -> Option<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        Some((
            start,
            String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned(),
        ))
    }

    fn integer(&mut self) -> Result<u64, DslError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(DslError::Syntax {
                pos: self.pos,
                message: format!("expected an integer, found `{}`", self.rest_preview()),
            });
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("digits are ASCII");
        text.parse().map_err(|_| DslError::Syntax {
            pos: start,
            message: format!("integer `{text}` out of range"),
        })
    }

    fn expr(&mut self) -> Result<FeatureExpr, DslError> {
        self.skip_ws();
        let Some((start, name)) = self.ident() else {
            return Err(DslError::Syntax {
                pos: self.pos,
                message: format!("expected a function call, found `{}`", self.rest_preview()),
            });
        };
        self.skip_ws();
        if self.peek() != Some(b'(') {
            return Err(DslError::Syntax {
                pos: self.pos,
                message: format!("expected `(` after `{name}`"),
            });
        }
        self.pos += 1;
        let args = self.args()?;
        self.expect(b')')?;
        build_call(&name, start, args)
    }

    fn args(&mut self) -> Result<Vec<Arg>, DslError> {
        let mut out = vec![self.arg()?];
        loop {
            self.skip_ws();
            if self.peek() == Some(b',') {
                self.pos += 1;
                out.push(self.arg()?);
            } else {
                return Ok(out);
            }
        }
    }

    fn arg(&mut self) -> Result<Arg, DslError> {
        self.skip_ws();
        match self.peek() {
            Some(b'{') => self.set_literal().map(Arg::Set),
            Some(b'"') => self.motif_literal().map(Arg::Motif),
            Some(b'-') => {
                self.pos += 1;
                let (num, den) = self.unsigned_rational()?;
                Ok(Arg::Konst(Rational::new(-(num as i64), den as i64).expect(
                    "nonzero denominator enforced by unsigned_rational",
                )))
            }
            Some(b) if b.is_ascii_digit() => {
                let save = self.pos;
                let (num, den) = self.unsigned_rational()?;
                if den == 1 {
                    // A bare integer may be a position or an integer
                    // constant; the signature check resolves which.
                    match u32::try_from(num) {
                        Ok(v) => Ok(Arg::Nat(v)),
                        Err(_) => Err(DslError::Syntax {
                            pos: save,
                            message: format!("integer `{num}` out of range"),
                        }),
                    }
                } else {
                    Ok(Arg::Konst(
                        Rational::new(num as i64, den as i64)
                            .expect("nonzero denominator enforced by unsigned_rational"),
                    ))
                }
            }
            _ => {
                // Identifier: either a class-named set or a nested call.
                let save = self.pos;
                let Some((start, name)) = self.ident() else {
                    return Err(DslError::Syntax {
                        pos: self.pos,
                        message: format!("expected an argument, found `{}`", self.rest_preview()),
                    });
                };
                self.skip_ws();
                if self.peek() == Some(b'(') {
                    self.pos = save;
                    self.expr().map(Arg::Expr)
                } else if let Some(set) = NucSet::from_class_name(&name) {
                    Ok(Arg::Set(set))
                } else {
                    Err(DslError::BadSetLiteral {
                        pos: start,
                        message: format!("`{name}` is not a nucleotide class (S, W, R, Y, N)"),
                    })
                }
            }
        }
    }

    fn unsigned_rational(&mut self) -> Result<(u64, u64), DslError> {
        let num = self.integer()?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let den_pos = self.pos;
            let den = self.integer()?;
            if den == 0 {
                return Err(DslError::Syntax {
                    pos: den_pos,
                    message: "zero denominator".into(),
                });
            }
            Ok((num, den))
        } else {
            Ok((num, 1))
        }
    }

    fn set_literal(&mut self) -> Result<NucSet, DslError> {
        let open = self.pos;
        self.expect(b'{')?;
        let mut bases = Vec::new();
        loop {
            self.skip_ws();
            match self.bump() {
                Some(b @ (b'A' | b'C' | b'G' | b'T')) => bases.push(b),
                other => {
                    return Err(DslError::BadSetLiteral {
                        pos: self.pos.saturating_sub(1),
                        message: match other {
                            Some(b) => format!("`{}` is not a base (A, C, G, T)", b as char),
                            None => "unterminated set literal".into(),
                        },
                    })
                }
            }
            self.skip_ws();
            match self.bump() {
                Some(b',') => continue,
                Some(b'}') => break,
                _ => {
                    return Err(DslError::BadSetLiteral {
                        pos: self.pos.saturating_sub(1),
                        message: "expected `,` or `}` in set literal".into(),
                    })
                }
            }
        }
        NucSet::from_bases(&bases).ok_or(DslError::BadSetLiteral {
            pos: open,
            message: "empty set".into(),
        })
    }

    fn motif_literal(&mut self) -> Result<Motif, DslError> {
        self.expect(b'"')?;
        let start = self.pos;
        loop {
            match self.peek() {
                Some(b'"') => break,
                Some(b @ (b'A' | b'C' | b'G' | b'T')) => {
                    let _ = b;
                    self.pos += 1;
                }
                Some(other) => {
                    return Err(DslError::BadMotifChar {
                        ch: other as char,
                        pos: self.pos,
                    })
                }
                None => {
                    return Err(DslError::Syntax {
                        pos: self.pos,
                        message: "unterminated motif string".into(),
                    })
                }
            }
        }
        let pat = std::str::from_utf8(&self.bytes[start..self.pos]).expect("checked ASCII");
        let motif = Motif::new(pat).ok_or(DslError::Syntax {
            pos: start,
            message: "empty motif string".into(),
        })?;
        self.pos += 1; // closing quote
        Ok(motif)
    }
}

fn build_call(name: &str, name_pos: usize, args: Vec<Arg>) -> Result<FeatureExpr, DslError> {
    let arity = |expected: usize| -> Result<(), DslError> {
        if args.len() == expected {
            Ok(())
        } else {
            Err(DslError::ArityMismatch {
                name: name.to_string(),
                expected,
                found: args.len(),
            })
        }
    };

    fn bad_kind(name: &str, index: usize, expected: &str, found: &Arg) -> DslError {
        DslError::Syntax {
            pos: 0,
            message: format!(
                "`{name}` argument {} must be a {expected}, found a {}",
                index + 1,
                found.kind()
            ),
        }
    }
    let take_set = |i: usize| match &args[i] {
        Arg::Set(s) => Ok(*s),
        other => Err(bad_kind(name, i, "nucleotide set", other)),
    };
    let take_nat = |i: usize| match &args[i] {
        Arg::Nat(v) => Ok(*v),
        other => Err(bad_kind(name, i, "position", other)),
    };
    let take_motif = |i: usize| match &args[i] {
        Arg::Motif(m) => Ok(m.clone()),
        other => Err(bad_kind(name, i, "motif string", other)),
    };
    let take_expr = |i: usize| match &args[i] {
        Arg::Expr(e) => Ok(e.clone()),
        other => Err(bad_kind(name, i, "expression", other)),
    };
    let take_konst = |i: usize| match &args[i] {
        Arg::Konst(c) => Ok(*c),
        Arg::Nat(v) => Ok(Rational::new(*v as i64, 1).expect("unit denominator")),
        other => Err(bad_kind(name, i, "constant", other)),
    };

    match name {
        "count" => {
            arity(3)?;
            Ok(FeatureExpr::Count {
                set: take_set(0)?,
                window: Window::new(take_nat(1)?, take_nat(2)?),
            })
        }
        "prop" => {
            arity(3)?;
            Ok(FeatureExpr::Prop {
                set: take_set(0)?,
                window: Window::new(take_nat(1)?, take_nat(2)?),
            })
        }
        "pos_in" => {
            arity(2)?;
            Ok(FeatureExpr::PosIn {
                pos: take_nat(0)?,
                set: take_set(1)?,
            })
        }
        "motif_count" => {
            arity(3)?;
            Ok(FeatureExpr::MotifCount {
                pat: take_motif(0)?,
                window: Window::new(take_nat(1)?, take_nat(2)?),
            })
        }
        "motif_present" => {
            arity(3)?;
            Ok(FeatureExpr::MotifPresent {
                pat: take_motif(0)?,
                window: Window::new(take_nat(1)?, take_nat(2)?),
            })
        }
        "transitions" => {
            arity(4)?;
            Ok(FeatureExpr::Transitions {
                from: take_set(0)?,
                to: take_set(1)?,
                window: Window::new(take_nat(2)?, take_nat(3)?),
            })
        }
        "stack_energy" => {
            arity(2)?;
            Ok(FeatureExpr::StackEnergy {
                window: Window::new(take_nat(0)?, take_nat(1)?),
            })
        }
        "raw" => {
            arity(1)?;
            Ok(FeatureExpr::Raw {
                index: take_nat(0)?,
            })
        }
        "add" => {
            arity(2)?;
            Ok(FeatureExpr::Add(
                Box::new(take_expr(0)?),
                Box::new(take_expr(1)?),
            ))
        }
        "sub" => {
            arity(2)?;
            Ok(FeatureExpr::Sub(
                Box::new(take_expr(0)?),
                Box::new(take_expr(1)?),
            ))
        }
        "scale" => {
            arity(2)?;
            Ok(FeatureExpr::Scale(take_konst(0)?, Box::new(take_expr(1)?)))
        }
        "and" => {
            arity(2)?;
            Ok(FeatureExpr::And(
                Box::new(take_expr(0)?),
                Box::new(take_expr(1)?),
            ))
        }
        "or" => {
            arity(2)?;
            Ok(FeatureExpr::Or(
                Box::new(take_expr(0)?),
                Box::new(take_expr(1)?),
            ))
        }
        "not" => {
            arity(1)?;
            Ok(FeatureExpr::Not(Box::new(take_expr(0)?)))
        }
        _ => Err(DslError::UnknownFunction {
            name: name.to_string(),
            pos: name_pos,
        }),
    }
}
