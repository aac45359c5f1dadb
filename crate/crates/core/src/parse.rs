//! Concrete ASCII grammar for formulas.
//!
//! Precedence: binders weakest, then `|`, then `&`, then modal / negation
//! prefixes. `~x` negates a variable; `!` is general negation and is
//! eliminated at parse time via NNF negation. Modalities are `box`/`dia`
//! (Kripke, monotone), `<n>`/`[n]` (graded), `<p/q>`/`[p/q]` (probabilistic)
//! and `[{1,3}]`/`<{1,3}>` (coalition and its dual).

use std::sync::Arc;

use crate::formula::{FixKind, Formula, FormulaKind};
use crate::logic::{AgentSet, Logic, Modality, Rational};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    logic: Logic,
}

pub fn parse(text: &str, logic: Logic) -> Result<Formula, ParseError> {
    let mut p = Parser {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
        logic,
    };
    p.skip_ws();
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    check_nnf_binders(&f).map_err(|var| ParseError {
        pos: text.len(),
        msg: format!("negated occurrence of bound variable {var} under its binder"),
    })?;
    Ok(f)
}

/// The NNF grammar forbids `v̄` inside `mu v`/`nu v`. `!` elimination never
/// produces such occurrences, but literal `~v` under the binder can.
fn check_nnf_binders(f: &Formula) -> Result<(), Arc<str>> {
    fn walk(f: &Formula, bound: &mut Vec<Arc<str>>) -> Result<(), Arc<str>> {
        match f.kind() {
            FormulaKind::Var { name, negated } => {
                if *negated && bound.iter().any(|b| b == name) {
                    return Err(name.clone());
                }
                Ok(())
            }
            FormulaKind::Or(a, b) | FormulaKind::And(a, b) => {
                walk(a, bound)?;
                walk(b, bound)
            }
            FormulaKind::Modal(_, a) => walk(a, bound),
            FormulaKind::Fix { var, body, .. } => {
                bound.push(var.clone());
                walk(body, bound)?;
                bound.pop();
                Ok(())
            }
        }
    }
    walk(f, &mut Vec::new())
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        let start = self.pos;
        if !matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == b'_') {
            return None;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        Some(&self.src[start..self.pos])
    }

    fn number(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| self.err("number out of range"))
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        let save = self.pos;
        if let Some(word) = self.ident() {
            let kind = match word {
                "mu" => Some(FixKind::Mu),
                "nu" => Some(FixKind::Nu),
                _ => None,
            };
            if let Some(kind) = kind {
                self.skip_ws();
                let var = self
                    .ident()
                    .ok_or_else(|| self.err("expected a variable after binder"))?
                    .to_owned();
                self.skip_ws();
                self.expect(b'.')?;
                let body = self.formula()?;
                return Ok(Formula::fix(kind, &var, body));
            }
            self.pos = save;
        }
        self.disjunction()
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        loop {
            self.skip_ws();
            if self.eat(b'|') {
                let rhs = self.conjunction()?;
                acc = Formula::or(acc, rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.prefix()?;
        loop {
            self.skip_ws();
            if self.eat(b'&') {
                let rhs = self.prefix()?;
                acc = Formula::and(acc, rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn prefix(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'~') => {
                self.pos += 1;
                self.skip_ws();
                let name = self
                    .ident()
                    .ok_or_else(|| self.err("'~' applies to a variable"))?;
                if matches!(name, "mu" | "nu" | "box" | "dia") {
                    return Err(self.err("'~' applies to a variable"));
                }
                Ok(Formula::neg_var(name))
            }
            Some(b'!') => {
                self.pos += 1;
                let inner = self.prefix()?;
                Ok(inner.negate())
            }
            Some(b'<') => {
                let op = self.angle_modality()?;
                let arg = self.prefix()?;
                Ok(Formula::modal(op, arg))
            }
            Some(b'[') => {
                let op = self.bracket_modality()?;
                let arg = self.prefix()?;
                Ok(Formula::modal(op, arg))
            }
            Some(b'(') => {
                self.pos += 1;
                let f = self.formula()?;
                self.skip_ws();
                self.expect(b')')?;
                Ok(f)
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let save = self.pos;
                let word = self.ident().unwrap();
                match word {
                    "box" | "dia" => {
                        if !matches!(self.logic, Logic::Kripke | Logic::Monotone) {
                            self.pos = save;
                            return Err(self.err(format!(
                                "modality '{word}' is not part of the {} signature",
                                self.logic
                            )));
                        }
                        let op = if word == "box" { Modality::Box } else { Modality::Dia };
                        let arg = self.prefix()?;
                        Ok(Formula::modal(op, arg))
                    }
                    "mu" | "nu" => {
                        // A binder in prefix position (directly under a
                        // modality or negation) takes a tight, prefix-level
                        // body: `[{1}] nu X.(p & q)` applies the modality to
                        // the whole binder and the conjunction stays outside.
                        let kind = if word == "mu" { FixKind::Mu } else { FixKind::Nu };
                        self.skip_ws();
                        let var = self
                            .ident()
                            .ok_or_else(|| self.err("expected a variable after binder"))?
                            .to_owned();
                        self.skip_ws();
                        self.expect(b'.')?;
                        let body = self.prefix()?;
                        Ok(Formula::fix(kind, &var, body))
                    }
                    name => Ok(Formula::var(name)),
                }
            }
            _ => Err(self.err("expected a formula")),
        }
    }

    /// `<n>`, `<p/q>` or `<{1,3}>` depending on the signature.
    fn angle_modality(&mut self) -> Result<Modality, ParseError> {
        let start = self.pos;
        self.expect(b'<')?;
        self.skip_ws();
        let op = match self.logic {
            Logic::Graded => Modality::GradedDia(self.number()?),
            Logic::Probabilistic => Modality::ProbDia(self.rational()?),
            Logic::Coalition { .. } => Modality::CoalDia(self.agent_set()?),
            _ => {
                self.pos = start;
                return Err(self.err(format!(
                    "indexed modalities are not part of the {} signature",
                    self.logic
                )));
            }
        };
        self.skip_ws();
        self.expect(b'>')?;
        Ok(op)
    }

    /// `[n]`, `[p/q]` or `[{1,3}]` depending on the signature.
    fn bracket_modality(&mut self) -> Result<Modality, ParseError> {
        let start = self.pos;
        self.expect(b'[')?;
        self.skip_ws();
        let op = match self.logic {
            Logic::Graded => Modality::GradedBox(self.number()?),
            Logic::Probabilistic => Modality::ProbBox(self.rational()?),
            Logic::Coalition { .. } => Modality::CoalBox(self.agent_set()?),
            _ => {
                self.pos = start;
                return Err(self.err(format!(
                    "indexed modalities are not part of the {} signature",
                    self.logic
                )));
            }
        };
        self.skip_ws();
        self.expect(b']')?;
        Ok(op)
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let at = self.pos;
        let numer = self.number()?;
        self.skip_ws();
        let denom = if self.eat(b'/') {
            self.skip_ws();
            let d = self.number()?;
            if d == 0 {
                return Err(self.err("denominator must be nonzero"));
            }
            d
        } else {
            1
        };
        if numer > denom {
            self.pos = at;
            return Err(self.err(format!(
                "probabilistic index {numer}/{denom} is outside [0,1]"
            )));
        }
        Ok(Rational::new(numer as i64, denom as i64))
    }

    fn agent_set(&mut self) -> Result<AgentSet, ParseError> {
        let universe = match self.logic {
            Logic::Coalition { agents } => agents,
            _ => unreachable!(),
        };
        self.expect(b'{')?;
        let mut set = AgentSet::empty();
        self.skip_ws();
        if !self.eat(b'}') {
            loop {
                self.skip_ws();
                let at = self.pos;
                let agent = self.number()?;
                if agent == 0 || agent > universe as u64 {
                    self.pos = at;
                    return Err(self.err(format!(
                        "agent {agent} is outside the declared agent set {{1..{universe}}}"
                    )));
                }
                set = AgentSet(set.0 | AgentSet::from_agents([agent as u32]).0);
                self.skip_ws();
                if self.eat(b'}') {
                    break;
                }
                self.expect(b',')?;
            }
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula;

    #[test]
    fn basic_kripke() {
        let f = parse("p | ~p", Logic::Kripke).unwrap();
        assert_eq!(f, Formula::or(Formula::var("p"), Formula::neg_var("p")));
    }

    #[test]
    fn general_negation_is_eliminated() {
        // !(mu X. q | dia X) = nu X. ~q & box X
        let f = parse("!(mu X. q | dia X)", Logic::Kripke).unwrap();
        let expected = parse("nu X. ~q & box X", Logic::Kripke).unwrap();
        assert_eq!(f, expected);
    }

    #[test]
    fn probabilistic_index() {
        let f = parse("<1/2> p", Logic::Probabilistic).unwrap();
        assert_eq!(
            f,
            Formula::modal(Modality::ProbDia(Rational::new(1, 2)), Formula::var("p"))
        );
        assert!(parse("<3/2> p", Logic::Probabilistic).is_err());
    }

    #[test]
    fn coalition_sets() {
        let f = parse("[{1,3}] p & <{2}> q", Logic::Coalition { agents: 3 }).unwrap();
        let expected = Formula::and(
            Formula::modal(
                Modality::CoalBox(AgentSet::from_agents([1, 3])),
                Formula::var("p"),
            ),
            Formula::modal(
                Modality::CoalDia(AgentSet::from_agents([2])),
                Formula::var("q"),
            ),
        );
        assert_eq!(f, expected);
        assert!(parse("[{4}] p", Logic::Coalition { agents: 3 }).is_err());
    }

    #[test]
    fn precedence() {
        let f = parse("mu X. p | q & dia X", Logic::Kripke).unwrap();
        let expected = Formula::mu(
            "X",
            Formula::or(
                Formula::var("p"),
                Formula::and(
                    Formula::var("q"),
                    Formula::modal(Modality::Dia, Formula::var("X")),
                ),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn binder_in_prefix_position_binds_tightly() {
        let logic = Logic::Coalition { agents: 3 };
        let f = parse(
            "[{1}] nu X.(p & <{1,2,3}> X) & [{2}] mu Y.(~p | [{2}] Y)",
            logic,
        )
        .unwrap();
        let explicit = parse(
            "[{1}] (nu X. p & <{1,2,3}> X) & [{2}] (mu Y. ~p | [{2}] Y)",
            logic,
        )
        .unwrap();
        assert_eq!(f, explicit);
    }

    #[test]
    fn unknown_modality_for_signature() {
        assert!(parse("<1> p", Logic::Kripke).is_err());
        assert!(parse("box p", Logic::Graded).is_err());
    }

    #[test]
    fn errors_carry_position() {
        let err = parse("p & (q | ", Logic::Kripke).unwrap_err();
        assert!(err.pos >= 9);
    }

    #[test]
    fn rejects_negated_bound_variable() {
        assert!(parse("mu X. q | ~X", Logic::Kripke).is_err());
        // but ! elimination keeps the bound variable positive
        assert!(parse("mu X. !(q & !X)", Logic::Kripke).is_ok());
    }

    #[test]
    fn display_parse_round_trip() {
        for s in [
            "mu X. p | dia X",
            "nu Y. (p | q) & box Y",
            "!(p & ~q)",
            "box (mu X. dia X)",
        ] {
            let f = parse(s, Logic::Kripke).unwrap();
            let printed = f.to_string();
            let again = parse(&printed, Logic::Kripke).unwrap();
            assert_eq!(f, again, "round-trip failed for {s}");
        }
    }
}
