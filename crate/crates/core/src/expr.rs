//! Textual set recipes for fixtures and the CLI.
//!
//! Grammar (whitespace between tokens is ignored):
//!
//! ```text
//! expr  := 'all' | 'none'
//!        | 'cyl' '(' int ',' bit ')'          bit-index cylinder
//!        | 'even' '(' int ')'                 block parity at scale 2^i
//!        | 'one' '(' int ')'                  line singleton fixture
//!        | 'img' '(' word ',' expr ')'        image under a group word
//!        | 'and' '(' expr ',' expr ')'
//!        | 'or'  '(' expr ',' expr ')'
//!        | 'not' '(' expr ')'
//!        | 'marker1d' '(' int ')'             chain level at default budgets
//!        | 'rok2d' '(' int ',' int ')'        sweep result at default budgets
//! word  := 'st' '(' int ',' int ')' | 'st3' '(' int ',' int ',' int ')'
//!        | 'r' '(' int ')'
//! ```

use crate::defaults;
use crate::markers1d::{level_handle, vanishing_markers_1d};
use crate::sets::{seed_sweep, Primitive, SetHandle};
use crate::sweep::weak_rokhlin_2d;
use crate::system::SystemSpec;
use crate::word::GroupWord;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("unexpected token at byte {0}")]
    Unexpected(usize),
    #[error("unknown form '{0}'")]
    UnknownForm(String),
    #[error("integer out of range at byte {0}")]
    IntRange(usize),
    #[error("trailing input at byte {0}")]
    Trailing(usize),
    #[error("form '{0}' is not available on this system")]
    Unsupported(String),
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    sys: SystemSpec,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> Result<String, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len()
            && (self.text[self.pos].is_ascii_alphanumeric() || self.text[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ExprError::Unexpected(self.pos));
        }
        Ok(String::from_utf8_lossy(&self.text[start..self.pos]).into_owned())
    }

    fn expect(&mut self, ch: u8) -> Result<(), ExprError> {
        self.skip_ws();
        if self.pos < self.text.len() && self.text[self.pos] == ch {
            self.pos += 1;
            Ok(())
        } else {
            Err(ExprError::Unexpected(self.pos))
        }
    }

    fn int(&mut self) -> Result<i64, ExprError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.text.len()
            && (self.text[self.pos] == b'-' || self.text[self.pos] == b'+')
        {
            self.pos += 1;
        }
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(ExprError::IntRange(start))
    }

    fn word(&mut self) -> Result<GroupWord, ExprError> {
        let name = self.ident()?;
        self.expect(b'(')?;
        let w = match name.as_str() {
            "st" => {
                let p = self.int()?;
                self.expect(b',')?;
                let q = self.int()?;
                GroupWord::st(p, q)
            }
            "st3" => {
                let p = self.int()?;
                self.expect(b',')?;
                let q = self.int()?;
                self.expect(b',')?;
                let u = self.int()?;
                GroupWord::ST3 { p, q, u }
            }
            "r" => {
                let k = self.int()?;
                GroupWord::RPow(k as i128)
            }
            other => return Err(ExprError::UnknownForm(other.to_string())),
        };
        self.expect(b')')?;
        Ok(w)
    }

    fn expr(&mut self) -> Result<SetHandle, ExprError> {
        let name = self.ident()?;
        match name.as_str() {
            "all" => return Ok(SetHandle::all(self.sys)),
            "none" => return Ok(SetHandle::empty(self.sys)),
            _ => {}
        }
        self.expect(b'(')?;
        let handle = match name.as_str() {
            "cyl" => {
                let i = self.int()?;
                self.expect(b',')?;
                let b = self.int()?;
                if !(0..=1).contains(&b) || i < 0 {
                    return Err(ExprError::IntRange(self.pos));
                }
                SetHandle::primitive(
                    self.sys,
                    Primitive::BitCylinder {
                        index: i as u32,
                        bit: b as u8,
                    },
                )
            }
            "even" => {
                let i = self.int()?;
                if !(0..=40).contains(&i) {
                    return Err(ExprError::IntRange(self.pos));
                }
                SetHandle::primitive(
                    self.sys,
                    Primitive::BlockParity {
                        scale_log2: i as u32,
                    },
                )
            }
            "one" => {
                let n = self.int()?;
                SetHandle::primitive(self.sys, Primitive::SingletonLine { n })
            }
            "img" => {
                let w = self.word()?;
                self.expect(b',')?;
                let inner = self.expr()?;
                inner.image(w)
            }
            "and" => {
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                a.and(&b)
            }
            "or" => {
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                a.or(&b)
            }
            "not" => self.expr()?.not(),
            "marker1d" => {
                let depth = self.int()?;
                if !(1..=16).contains(&depth) {
                    return Err(ExprError::IntRange(self.pos));
                }
                let chain = vanishing_markers_1d(self.sys, depth as u32, defaults::WALK_HORIZON_1D)
                    .map_err(|_| ExprError::Unsupported("marker1d".into()))?;
                level_handle(&chain, depth as u32)
            }
            "rok2d" => {
                let n = self.int()?;
                self.expect(b',')?;
                let m = self.int()?;
                // Stage enumeration is quadratic in n*m; keep fixture
                // sweeps small.
                if !(1..=16).contains(&n) || !(1..=16).contains(&m) {
                    return Err(ExprError::IntRange(self.pos));
                }
                let seed = seed_sweep(self.sys).ok_or(ExprError::Unsupported("rok2d".into()))?;
                let mk = weak_rokhlin_2d(
                    self.sys,
                    n as u32,
                    m as u32,
                    seed,
                    defaults::JMAX_NONLATTICE as u64,
                    defaults::WALK_HORIZON_1D,
                )
                .map_err(|_| ExprError::Unsupported("rok2d".into()))?;
                mk.handle()
            }
            other => return Err(ExprError::UnknownForm(other.to_string())),
        };
        self.expect(b')')?;
        Ok(handle)
    }
}

/// Parse a set recipe against a system.
pub fn parse_set_expr(text: &str, sys: SystemSpec) -> Result<SetHandle, ExprError> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        sys,
    };
    let h = p.expr()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return Err(ExprError::Trailing(p.pos));
    }
    Ok(h)
}
