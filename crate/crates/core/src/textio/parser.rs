use num_bigint::BigInt;
use num_rational::BigRational;

use super::lexer::{tokenize, Tok};
use super::{ParseError, ParseErrorKind, Pos};
use crate::expr::{ElemFn, Expr, JetContext, JetVar, OpaqueApp};
use crate::multiindex::MultiIndex;

/// Parses an expression against `ctx` and returns its canonical form.
///
/// ```
/// use jetvar::{textio, JetContext};
/// let ctx = JetContext::new(["t"], ["y"]).unwrap();
/// let l = textio::parse_expr("1/2*(y_t^2 - y^2)", &ctx).unwrap();
/// assert_eq!(textio::plain(&l, &ctx), "1/2*y_t^2 - 1/2*y^2");
/// ```
pub fn parse_expr(src: &str, ctx: &JetContext) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    p.nesting = 1;
    let e = p.expr(ctx)?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(e)
}

/// Exact value of a decimal literal such as `1.5e-3`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let shift = exp - i32::try_from(frac.len()).ok()?;
    let ten = BigInt::from(10);
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    Some(if shift >= 0 {
        BigRational::from_integer(digits * scale)
    } else {
        BigRational::new(digits, scale)
    })
}

pub(crate) struct Parser {
    toks: Vec<(Tok, Pos)>,
    k: usize,
    /// Open parentheses, brackets and suffix braces; newlines inside them
    /// are insignificant.
    pub(crate) nesting: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(src)?,
            k: 0,
            nesting: 0,
        })
    }

    fn skip_insignificant(&mut self) {
        if self.nesting > 0 {
            while self.toks[self.k].0 == Tok::Newline {
                self.k += 1;
            }
        }
    }

    pub(crate) fn peek(&mut self) -> &Tok {
        self.skip_insignificant();
        &self.toks[self.k].0
    }

    pub(crate) fn pos(&mut self) -> Pos {
        self.skip_insignificant();
        self.toks[self.k].1
    }

    pub(crate) fn bump(&mut self) -> (Tok, Pos) {
        self.skip_insignificant();
        let t = self.toks[self.k].clone();
        if t.0 != Tok::Eof {
            self.k += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn unexpected(&mut self, expected: &str) -> ParseError {
        let pos = self.pos();
        let found = self.peek().describe();
        ParseError::new(
            pos,
            ParseErrorKind::Unexpected {
                expected: expected.to_string(),
                found,
            },
        )
    }

    pub(crate) fn expect(&mut self, t: Tok, expected: &str) -> Result<Pos, ParseError> {
        if self.peek() == &t {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(expected))
        }
    }

    pub(crate) fn ident(&mut self, expected: &str) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().1;
                Ok((s, pos))
            }
            _ => Err(self.unexpected(expected)),
        }
    }

    pub(crate) fn number(&mut self) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let pos = self.bump().1;
                Ok((s, pos))
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    pub(crate) fn open(&mut self, t: Tok, expected: &str) -> Result<Pos, ParseError> {
        let pos = self.expect(t, expected)?;
        self.nesting += 1;
        Ok(pos)
    }

    pub(crate) fn close(&mut self, t: Tok, expected: &str) -> Result<Pos, ParseError> {
        let pos = self.expect(t, expected)?;
        self.nesting -= 1;
        Ok(pos)
    }

    pub(crate) fn expr(&mut self, ctx: &JetContext) -> Result<Expr, ParseError> {
        let mut acc = self.product(ctx)?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.product(ctx)?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.product(ctx)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self, ctx: &JetContext) -> Result<Expr, ParseError> {
        let mut acc = self.unary(ctx)?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary(ctx)?;
                }
                Tok::Slash => {
                    let pos = self.bump().1;
                    let rhs = self.unary(ctx)?;
                    acc = acc.div(&rhs).map_err(|e| ParseError::new(pos, e.into()))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self, ctx: &JetContext) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary(ctx)?)
            }
            Tok::Plus => {
                self.bump();
                self.unary(ctx)
            }
            _ => self.power(ctx),
        }
    }

    fn power(&mut self, ctx: &JetContext) -> Result<Expr, ParseError> {
        let base = self.primary(ctx)?;
        if self.peek() != &Tok::Caret {
            return Ok(base);
        }
        let pos = self.bump().1;
        let k = self.exponent()?;
        base.pow(k).map_err(|e| ParseError::new(pos, e.into()))
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let paren = self.peek() == &Tok::LParen;
        if paren {
            self.open(Tok::LParen, "`(`")?;
        }
        let negative = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let (s, pos) = self
            .number()
            .map_err(|_| self.unexpected("an integer exponent"))?;
        let k: i32 = s
            .parse()
            .map_err(|_| ParseError::new(pos, ParseErrorKind::BadNumber(s.clone())))?;
        if paren {
            self.close(Tok::RParen, "`)`")?;
        }
        Ok(if negative { -k } else { k })
    }

    pub(crate) fn primary(&mut self, ctx: &JetContext) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(s) => {
                self.bump();
                parse_rational(&s)
                    .map(Expr::constant)
                    .ok_or_else(|| ParseError::new(pos, ParseErrorKind::BadNumber(s)))
            }
            Tok::LParen => {
                self.open(Tok::LParen, "`(`")?;
                let e = self.expr(ctx)?;
                self.close(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                self.named(ctx, &name, pos)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn named(&mut self, ctx: &JetContext, name: &str, pos: Pos) -> Result<Expr, ParseError> {
        if name == "pi" {
            return Ok(Expr::pi());
        }
        if let Some(f) = ElemFn::from_name(name) {
            let args = self.arguments(ctx)?;
            if args.len() != 1 {
                return Err(ParseError::new(
                    pos,
                    ParseErrorKind::Arity {
                        name: name.to_string(),
                        expected: 1,
                        got: args.len(),
                    },
                ));
            }
            return Ok(Expr::apply(f, args.into_iter().next().unwrap()));
        }
        if let Some(l) = ctx.base_index(name) {
            if self.peek() == &Tok::Underscore {
                let pos = self.pos();
                return Err(ParseError::new(
                    pos,
                    ParseErrorKind::MalformedSuffix(format!(
                        "base coordinate `{name}` takes no suffix"
                    )),
                ));
            }
            return Ok(Expr::base(l));
        }
        if let Some(i) = ctx.field_index(name) {
            let sigma = if self.eat(&Tok::Underscore) {
                self.derivative_suffix(ctx)?
            } else {
                MultiIndex::zero(ctx.n())
            };
            return Ok(Expr::jet(JetVar::new(i, sigma)));
        }
        if let Some(decl) = ctx.function(name) {
            let arity = decl.args.len();
            let mut partials = vec![0u32; arity];
            if self.eat(&Tok::Underscore) {
                for (k, kpos) in self.argument_positions()? {
                    if k == 0 || k > arity {
                        return Err(ParseError::new(
                            kpos,
                            ParseErrorKind::MalformedSuffix(format!(
                                "`{name}` has no argument {k}"
                            )),
                        ));
                    }
                    partials[k - 1] += 1;
                }
            }
            let args = self.arguments(ctx)?;
            if args.len() != arity {
                return Err(ParseError::new(
                    pos,
                    ParseErrorKind::Arity {
                        name: name.to_string(),
                        expected: arity,
                        got: args.len(),
                    },
                ));
            }
            return Ok(Expr::opaque(OpaqueApp {
                name: name.into(),
                partials,
                args,
            }));
        }
        Err(ParseError::new(
            pos,
            ParseErrorKind::UnknownIdentifier(name.to_string()),
        ))
    }

    fn arguments(&mut self, ctx: &JetContext) -> Result<Vec<Expr>, ParseError> {
        self.open(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                args.push(self.expr(ctx)?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen, "`,` or `)`")?;
        }
        self.nesting -= 1;
        Ok(args)
    }

    // `_{1 2}` or `_1`, 1-based argument positions.
    fn argument_positions(&mut self) -> Result<Vec<(usize, Pos)>, ParseError> {
        let mut out = Vec::new();
        let braced = self.peek() == &Tok::LBrace;
        if braced {
            self.open(Tok::LBrace, "`{`")?;
        }
        loop {
            let (s, pos) = self
                .number()
                .map_err(|_| self.unexpected("an argument position"))?;
            let k = s
                .parse::<usize>()
                .map_err(|_| ParseError::new(pos, ParseErrorKind::BadNumber(s.clone())))?;
            out.push((k, pos));
            if !braced || self.peek() == &Tok::RBrace {
                break;
            }
        }
        if braced {
            self.close(Tok::RBrace, "`}`")?;
        }
        Ok(out)
    }

    /// The part after `_`: `{x1 x1 x2}`, or `tt` when every base name is a
    /// single letter.
    pub(crate) fn derivative_suffix(&mut self, ctx: &JetContext) -> Result<MultiIndex, ParseError> {
        let pos = self.pos();
        let sigma = match self.peek().clone() {
            Tok::LBrace => self.braced_multi_index(ctx)?,
            Tok::Ident(s) => {
                self.bump();
                shorthand(ctx, &s, pos)?
            }
            _ => {
                return Err(ParseError::new(
                    pos,
                    ParseErrorKind::MalformedSuffix("expected base-variable names".into()),
                ))
            }
        };
        if sigma.is_zero() {
            return Err(ParseError::new(
                pos,
                ParseErrorKind::MalformedSuffix("empty derivative list".into()),
            ));
        }
        Ok(sigma)
    }

    /// `{x1 x2 ...}`, possibly empty.
    pub(crate) fn braced_multi_index(
        &mut self,
        ctx: &JetContext,
    ) -> Result<MultiIndex, ParseError> {
        self.open(Tok::LBrace, "`{`")?;
        let mut counts = vec![0u32; ctx.n()];
        loop {
            let pos = self.pos();
            match self.peek().clone() {
                Tok::RBrace => break,
                Tok::Ident(s) => {
                    self.bump();
                    let part = match ctx.base_index(&s) {
                        Some(l) => MultiIndex::unit(ctx.n(), l),
                        None => shorthand(ctx, &s, pos)?,
                    };
                    for (c, d) in counts.iter_mut().zip(part.counts()) {
                        *c += d;
                    }
                }
                _ => return Err(self.unexpected("a base-variable name or `}`")),
            }
            self.eat(&Tok::Comma);
        }
        self.close(Tok::RBrace, "`}`")?;
        Ok(MultiIndex::new(counts))
    }
}

fn shorthand(ctx: &JetContext, s: &str, pos: Pos) -> Result<MultiIndex, ParseError> {
    if !ctx.single_letter_base() {
        return Err(ParseError::new(
            pos,
            ParseErrorKind::MalformedSuffix(format!(
                "`{s}`: use braces such as `_{{x1 x2}}` when base names are longer than one letter"
            )),
        ));
    }
    let mut counts = vec![0u32; ctx.n()];
    for ch in s.chars() {
        let l = ctx.base_index(&ch.to_string()).ok_or_else(|| {
            ParseError::new(
                pos,
                ParseErrorKind::MalformedSuffix(format!("`{ch}` is not a base variable")),
            )
        })?;
        counts[l] += 1;
    }
    Ok(MultiIndex::new(counts))
}
