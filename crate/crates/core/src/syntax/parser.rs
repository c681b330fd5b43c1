use num_traits::{One, Signed};

use super::ast::*;
use super::error::SyntaxError;
use super::lexer::{tokenize, Pos, Spanned, Tok};
use crate::prob::{format_literal, parse_prob, Prob};

const KEYWORDS: &[&str] = &["or", "not", "true", "false", "pred", "const", "sort", "range", "exogenous"];

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Declare unknown predicates (as endogenous) and capitalised constants on first use.
    pub auto_declare: bool,
}

pub fn parse_theory(src: &str) -> Result<CPTheory, SyntaxError> {
    parse_theory_with(src, ParseOptions::default())
}

pub fn parse_theory_with(src: &str, opts: ParseOptions) -> Result<CPTheory, SyntaxError> {
    let mut p = Parser::new(src)?;
    let mut vocab = Vocabulary::default();
    let mut decl_sorts: Vec<(usize, Pos)> = Vec::new();
    let mut laws = Vec::new();
    while p.peek() != &Tok::Eof {
        match p.peek() {
            Tok::Ident(k) if k == "pred" => p.decl_pred(&mut vocab, &mut decl_sorts)?,
            Tok::Ident(k) if k == "const" => p.decl_const(&mut vocab)?,
            Tok::Ident(k) if k == "sort" => p.decl_sort(&mut vocab)?,
            Tok::Ident(k) if k == "range" => p.decl_range(&mut vocab)?,
            _ => {
                let idx = laws.len();
                laws.push(p.law(idx)?);
            }
        }
    }
    for (pi, pos) in decl_sorts {
        for s in vocab.predicates[pi].arg_sorts.iter().flatten() {
            if !vocab.has_sort(s) {
                return Err(decl_err(pos, format!("unknown sort `{s}`")));
            }
        }
    }
    resolve(&p.uses, &mut vocab, opts)?;
    Ok(CPTheory { vocab, laws })
}

/// Parses a closed query formula against an existing vocabulary.
pub fn parse_formula(src: &str, vocab: &Vocabulary) -> Result<Formula, SyntaxError> {
    let mut p = Parser::new(src)?;
    let f = p.formula()?;
    p.expect(Tok::Eof)?;
    let mut v = vocab.clone();
    resolve(&p.uses, &mut v, ParseOptions::default())?;
    Ok(f)
}

/// Parses a single law, extending `vocab` when `opts.auto_declare` is set.
pub fn parse_law(
    src: &str,
    vocab: &mut Vocabulary,
    source_index: usize,
    opts: ParseOptions,
) -> Result<CPLaw, SyntaxError> {
    let mut p = Parser::new(src)?;
    let law = p.law(source_index)?;
    p.expect(Tok::Eof)?;
    resolve(&p.uses, vocab, opts)?;
    Ok(law)
}

fn decl_err(pos: Pos, msg: String) -> SyntaxError {
    SyntaxError::Declaration { line: pos.line, col: pos.col, msg }
}

#[derive(Debug)]
enum ArgVal {
    Sym(String),
    Int(i64),
}

#[derive(Debug)]
enum Use {
    Pred { name: String, arity: usize, in_head: bool, pos: Pos },
    Arg { pred: String, arity: usize, index: usize, value: ArgVal, pos: Pos },
    Ident { name: String, pos: Pos },
}

fn resolve(uses: &[Use], vocab: &mut Vocabulary, opts: ParseOptions) -> Result<(), SyntaxError> {
    for u in uses {
        match u {
            Use::Pred { name, arity, in_head, pos } => {
                let decl = match vocab.predicate(name, *arity) {
                    Some(d) => d,
                    None => {
                        if opts.auto_declare {
                            vocab.predicates.push(PredDecl {
                                name: name.clone(),
                                arity: *arity,
                                exogenous: false,
                                arg_sorts: None,
                            });
                            continue;
                        }
                        let declared = vocab.arities_of(name);
                        if declared.is_empty() {
                            return Err(SyntaxError::UndeclaredSymbol {
                                line: pos.line,
                                col: pos.col,
                                name: format!("{name}/{arity}"),
                            });
                        }
                        let declared = declared.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" or ");
                        return Err(SyntaxError::ArityMismatch {
                            line: pos.line,
                            col: pos.col,
                            name: name.clone(),
                            used: *arity,
                            declared,
                        });
                    }
                };
                if *in_head && decl.exogenous {
                    return Err(SyntaxError::ExogenousInHead { line: pos.line, col: pos.col, name: name.clone() });
                }
            }
            Use::Ident { name, pos } => {
                if vocab.constants.contains(name) {
                    continue;
                }
                if name.starts_with(|c: char| c.is_lowercase()) {
                    return Err(SyntaxError::FreeVariable { line: pos.line, col: pos.col, name: name.clone() });
                }
                if opts.auto_declare {
                    vocab.constants.insert(name.clone());
                } else {
                    return Err(SyntaxError::UndeclaredSymbol { line: pos.line, col: pos.col, name: name.clone() });
                }
            }
            Use::Arg { pred, arity, index, value, pos } => {
                let Some(sorts) = vocab.predicate(pred, *arity).and_then(|d| d.arg_sorts.as_ref()) else {
                    continue;
                };
                let sort = &sorts[*index];
                let ok = match value {
                    ArgVal::Sym(c) => vocab.sorts.get(sort).is_some_and(|m| m.contains(c)),
                    ArgVal::Int(v) => vocab.ranges.get(sort).is_some_and(|&(lo, hi)| lo <= *v && *v <= hi),
                };
                if !ok {
                    let value = match value {
                        ArgVal::Sym(c) => c.clone(),
                        ArgVal::Int(v) => v.to_string(),
                    };
                    return Err(SyntaxError::SortMismatch { line: pos.line, col: pos.col, value, sort: sort.clone() });
                }
            }
        }
    }
    Ok(())
}

struct Parser {
    toks: Vec<Spanned>,
    i: usize,
    uses: Vec<Use>,
    scope: Vec<String>,
}

impl Parser {
    fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Parser { toks: tokenize(src)?, i: 0, uses: Vec::new(), scope: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        let pos = self.pos();
        Err(SyntaxError::Parse { line: pos.line, col: pos.col, msg: msg.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, SyntaxError> {
        let found = self.peek().describe();
        self.err(format!("expected {wanted}, found {found}"))
    }

    fn expect(&mut self, t: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else if t == Tok::Eof {
            self.unexpected("end of input")
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn name(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected(what),
        }
    }

    fn nat(&mut self) -> Result<i64, SyntaxError> {
        match self.peek().clone() {
            Tok::Number(s) if !s.contains('.') => match s.parse::<i64>() {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => self.err(format!("integer `{s}` out of range")),
            },
            _ => self.unexpected("an integer"),
        }
    }

    fn int(&mut self) -> Result<i64, SyntaxError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            Ok(-self.nat()?)
        } else {
            self.nat()
        }
    }

    fn name_list(&mut self, what: &str) -> Result<Vec<String>, SyntaxError> {
        let mut out = vec![self.name(what)?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.name(what)?);
        }
        Ok(out)
    }

    fn decl_pred(&mut self, vocab: &mut Vocabulary, decl_sorts: &mut Vec<(usize, Pos)>) -> Result<(), SyntaxError> {
        self.bump();
        let mut items = Vec::new();
        loop {
            let pos = self.pos();
            let name = self.name("a predicate name")?;
            let (arity, arg_sorts) = match self.peek() {
                Tok::Slash => {
                    self.bump();
                    (self.nat()? as usize, None)
                }
                Tok::LParen => {
                    self.bump();
                    let sorts = self.name_list("a sort name")?;
                    self.expect(Tok::RParen)?;
                    (sorts.len(), Some(sorts))
                }
                _ => (0, None),
            };
            items.push((pos, name, arity, arg_sorts));
            if *self.peek() != Tok::Comma {
                break;
            }
            self.bump();
        }
        let exogenous = if self.is_kw("exogenous") {
            self.bump();
            true
        } else {
            false
        };
        self.expect(Tok::Dot)?;
        for (pos, name, arity, arg_sorts) in items {
            if vocab.predicate(&name, arity).is_some() {
                return Err(decl_err(pos, format!("predicate `{name}/{arity}` declared twice")));
            }
            if arg_sorts.is_some() {
                decl_sorts.push((vocab.predicates.len(), pos));
            }
            vocab.predicates.push(PredDecl { name, arity, exogenous, arg_sorts });
        }
        Ok(())
    }

    fn decl_const(&mut self, vocab: &mut Vocabulary) -> Result<(), SyntaxError> {
        self.bump();
        let names = self.name_list("a constant name")?;
        self.expect(Tok::Dot)?;
        vocab.constants.extend(names);
        Ok(())
    }

    fn decl_sort(&mut self, vocab: &mut Vocabulary) -> Result<(), SyntaxError> {
        self.bump();
        let pos = self.pos();
        let name = self.name("a sort name")?;
        self.expect(Tok::Eq)?;
        let members = self.name_list("a constant name")?;
        self.expect(Tok::Dot)?;
        if vocab.has_sort(&name) {
            return Err(decl_err(pos, format!("sort `{name}` declared twice")));
        }
        vocab.constants.extend(members.iter().cloned());
        vocab.sorts.insert(name, members);
        Ok(())
    }

    fn decl_range(&mut self, vocab: &mut Vocabulary) -> Result<(), SyntaxError> {
        self.bump();
        let pos = self.pos();
        let name = self.name("a range name")?;
        if *self.peek() == Tok::Eq {
            self.bump();
        }
        let lo = self.int()?;
        self.expect(Tok::DotDot)?;
        let hi = self.int()?;
        self.expect(Tok::Dot)?;
        if lo > hi {
            return Err(decl_err(pos, format!("range `{name}` is empty ({lo} > {hi})")));
        }
        if vocab.has_sort(&name) {
            return Err(decl_err(pos, format!("sort `{name}` declared twice")));
        }
        vocab.ranges.insert(name, (lo, hi));
        Ok(())
    }

    fn var_list(&mut self) -> Result<Vec<String>, SyntaxError> {
        let pos = self.pos();
        let vars = self.name_list("a variable name")?;
        for (k, v) in vars.iter().enumerate() {
            if vars[..k].contains(v) {
                return Err(SyntaxError::Parse {
                    line: pos.line,
                    col: pos.col,
                    msg: format!("variable `{v}` quantified twice"),
                });
            }
        }
        Ok(vars)
    }

    fn law(&mut self, source_index: usize) -> Result<CPLaw, SyntaxError> {
        let label = if *self.peek() == Tok::At {
            self.bump();
            Some(self.name("a label")?)
        } else {
            None
        };
        let vars = if *self.peek() == Tok::Bang {
            self.bump();
            self.var_list()?
        } else {
            Vec::new()
        };
        self.scope = vars.clone();
        let head_pos = self.pos();
        let mut head = vec![self.disjunct()?];
        while *self.peek() == Tok::Semi || self.is_kw("or") {
            self.bump();
            head.push(self.disjunct()?);
        }
        let body = if *self.peek() == Tok::Arrow {
            self.bump();
            if *self.peek() == Tok::Dot {
                None
            } else {
                Some(self.formula()?)
            }
        } else {
            None
        };
        self.expect(Tok::Dot)?;
        self.scope.clear();
        let mass: Prob = head.iter().map(|(_, p)| p.clone()).sum();
        if mass > Prob::one() {
            return Err(SyntaxError::HeadMassExceeded {
                line: head_pos.line,
                col: head_pos.col,
                total: format_literal(&mass),
            });
        }
        Ok(CPLaw { label, vars, head, body, source_index })
    }

    fn disjunct(&mut self) -> Result<(Atom, Prob), SyntaxError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let atom = self.atom(true)?;
            self.expect(Tok::Colon)?;
            let pos = self.pos();
            let p = self.prob()?;
            if !p.is_positive() {
                return Err(SyntaxError::NonPositiveProbability {
                    line: pos.line,
                    col: pos.col,
                    value: format_literal(&p),
                });
            }
            self.expect(Tok::RParen)?;
            Ok((atom, p))
        } else {
            Ok((self.atom(true)?, Prob::one()))
        }
    }

    fn prob(&mut self) -> Result<Prob, SyntaxError> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let num = match self.peek().clone() {
            Tok::Number(s) => {
                self.bump();
                s
            }
            _ => return self.unexpected("a probability"),
        };
        let text = if *self.peek() == Tok::Slash {
            self.bump();
            match self.peek().clone() {
                Tok::Number(d) if !d.contains('.') && !num.contains('.') => {
                    self.bump();
                    format!("{num}/{d}")
                }
                _ => return self.unexpected("an integer denominator"),
            }
        } else {
            num
        };
        match parse_prob(&text) {
            Some(p) if neg => Ok(-p),
            Some(p) => Ok(p),
            None => self.err(format!("invalid probability `{text}`")),
        }
    }

    fn atom(&mut self, in_head: bool) -> Result<Atom, SyntaxError> {
        let pos = self.pos();
        let name = self.name("an atom")?;
        if self.scope.contains(&name) {
            return Err(SyntaxError::Parse {
                line: pos.line,
                col: pos.col,
                msg: format!("variable `{name}` used as an atom"),
            });
        }
        let mut args = Vec::new();
        let mut arg_pos = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            loop {
                arg_pos.push(self.pos());
                args.push(self.term()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        let arity = args.len();
        self.uses.push(Use::Pred { name: name.clone(), arity, in_head, pos });
        for (index, (t, p)) in args.iter().zip(arg_pos).enumerate() {
            let value = match t {
                Term::Const(c) => ArgVal::Sym(c.clone()),
                Term::Int(v) => ArgVal::Int(*v),
                _ => continue,
            };
            self.uses.push(Use::Arg { pred: name.clone(), arity, index, value, pos: p });
        }
        Ok(Atom { pred: name, args })
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let mut t = self.simple_term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(t),
            };
            self.bump();
            let r = self.simple_term()?;
            t = Term::Arith(op, Box::new(t), Box::new(r));
        }
    }

    fn simple_term(&mut self) -> Result<Term, SyntaxError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                if self.scope.contains(&s) {
                    Ok(Term::Var(s))
                } else {
                    self.uses.push(Use::Ident { name: s.clone(), pos });
                    Ok(Term::Const(s))
                }
            }
            Tok::Number(_) | Tok::Minus => Ok(Term::Int(self.int()?)),
            _ => self.unexpected("a term"),
        }
    }

    pub fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Bar || self.is_kw("or") {
            self.bump();
            let r = self.conj()?;
            f = Formula::or(f, r);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula, SyntaxError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let r = self.unary()?;
            f = Formula::and(f, r);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(k) if k == "not" => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Bang | Tok::Question => {
                let universal = *self.peek() == Tok::Bang;
                self.bump();
                let vars = self.var_list()?;
                let depth = self.scope.len();
                self.scope.extend(vars.iter().cloned());
                let body = self.formula();
                self.scope.truncate(depth);
                let mut f = body?;
                for v in vars.into_iter().rev() {
                    f = if universal { Formula::forall(v, f) } else { Formula::exists(v, f) };
                }
                Ok(f)
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(k) if k == "true" => {
                self.bump();
                Ok(Formula::Truth(true))
            }
            Tok::Ident(k) if k == "false" => {
                self.bump();
                Ok(Formula::Truth(false))
            }
            Tok::Number(_) | Tok::Minus => self.comparison(),
            Tok::Ident(name) => {
                let next = self.peek_at(1);
                let term_like = matches!(next, Tok::Eq | Tok::Ne | Tok::Lt | Tok::Le | Tok::Plus | Tok::Minus);
                if *next != Tok::LParen && (term_like || self.scope.contains(&name)) {
                    self.comparison()
                } else {
                    Ok(Formula::Atom(self.atom(false)?))
                }
            }
            Tok::Eof => self.err("unexpected end of input"),
            _ => self.unexpected("a formula"),
        }
    }

    fn comparison(&mut self) -> Result<Formula, SyntaxError> {
        let l = self.term()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            _ => return self.unexpected("a comparison operator"),
        };
        self.bump();
        let r = self.term()?;
        Ok(Formula::Compare(op, l, r))
    }
}
