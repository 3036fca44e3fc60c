//! The line-oriented `.cvn` network format.
//!
//! ```text
//! # comments run to the end of the line
//! var A : 0..4                  # integer shorthand for {0,1,2,3,4}
//! var S : {0,1}
//! val phi1 on A,D,T : sum A = D + T prob [0.96,1.00] truth 1.0
//! val phi4 on S,R   : implies S=1 -> R=0 prob [0.88,0.91] truth 0.89
//! val phi5 on L     : assign L=1 prob 0.82
//! val prior on S    : table 0.2,0.3; 0.7,0.8
//! query A
//! ```
//!
//! `prob r` is shorthand for `prob [r,r]`. `truth r` gives the point value used
//! by the precise engine when the interval is not a point. Table rows are
//! `lower,upper` (or a single probability) per configuration in canonical
//! order: variables sorted by name, the last one varying fastest. A statement
//! whose line ends in `;` continues on the next line.

use std::fmt::{self, Write as _};

use crate::algebra::EngineKind;
use crate::domain::{Domain, Variable};
use crate::error::Error;
use crate::network::{NamedValuation, ValuationNetwork};
use crate::rules::{compile_rule, Assignment, Reliability, RuleKind, RuleSpec};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.span.line, self.span.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub states: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValDecl {
    pub name: String,
    pub domain: Vec<String>,
    pub rule: RuleSpec,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkSpec {
    pub variables: Vec<VarDecl>,
    pub valuations: Vec<ValDecl>,
    pub query: Vec<String>,
    pub query_span: Span,
}

type Chars = Vec<(char, Span)>;

struct Cursor<'a> {
    chars: &'a [(char, Span)],
    pos: usize,
    end: Span,
}

impl<'a> Cursor<'a> {
    fn span(&self) -> Span {
        self.chars.get(self.pos).map_or(self.end, |c| c.1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            span: self.span(),
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.0.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.0)
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        let n = s.chars().count();
        let matches = self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n].iter().map(|c| c.0).eq(s.chars());
        if matches {
            self.pos += n;
        }
        matches
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            let found = self.peek().map_or("end of statement".to_string(), |c| format!("`{c}`"));
            self.err(format!("expected `{s}`, found {found}"))
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| f(c.0)) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().map(|c| c.0).collect()
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        self.skip_ws();
        let span = self.span();
        if !self.chars.get(self.pos).is_some_and(|c| c.0.is_alphabetic() || c.0 == '_') {
            return self.err(format!("expected {what}"));
        }
        Ok((self.take_while(|c| c.is_alphanumeric() || c == '_'), span))
    }

    /// A state label: letters, digits, `_` and `-`.
    fn label(&mut self) -> Result<String, ParseError> {
        let s = self.take_while(|c| c.is_alphanumeric() || c == '_' || c == '-');
        if s.is_empty() {
            return self.err("expected a state label");
        }
        Ok(s)
    }

    fn keyword(&mut self) -> String {
        self.take_while(|c| c.is_alphabetic())
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let span = self.span();
        let s = self.take_while(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
        s.parse::<f64>().map_err(|_| ParseError {
            span,
            message: if s.is_empty() {
                "expected a number".into()
            } else {
                format!("`{s}` is not a number")
            },
        })
    }
}

/// Splits the text into logical statements with per-character positions.
fn statements(text: &str) -> Vec<Chars> {
    let mut out = Vec::new();
    let mut current: Chars = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let code = line.split('#').next().unwrap_or("");
        for (col, ch) in code.chars().enumerate() {
            current.push((
                ch,
                Span {
                    line: ln + 1,
                    column: col + 1,
                },
            ));
        }
        let trimmed = code.trim_end();
        if trimmed.ends_with(';') {
            current.push((' ', Span { line: ln + 1, column: code.len() + 1 }));
            continue;
        }
        if current.iter().any(|c| !c.0.is_whitespace()) {
            out.push(std::mem::take(&mut current));
        } else {
            current.clear();
        }
    }
    if current.iter().any(|c| !c.0.is_whitespace()) {
        out.push(current);
    }
    out
}

/// Parses a `.cvn` document, checking declarations but not compiling rules.
pub fn parse_network(text: &str) -> Result<NetworkSpec, ParseError> {
    let mut spec = NetworkSpec::default();
    let mut have_query = false;
    let last_line = text.lines().count().max(1);
    for stmt in statements(text) {
        let end = stmt.last().map_or(Span::default(), |c| Span {
            line: c.1.line,
            column: c.1.column + 1,
        });
        let mut cur = Cursor {
            chars: &stmt,
            pos: 0,
            end,
        };
        cur.skip_ws();
        let start = cur.span();
        match cur.keyword().as_str() {
            "var" => {
                let decl = parse_var(&mut cur, start)?;
                if spec.variables.iter().any(|v| v.name == decl.name) {
                    return Err(ParseError {
                        span: start,
                        message: format!("variable `{}` declared twice", decl.name),
                    });
                }
                spec.variables.push(decl);
            }
            "val" => {
                let decl = parse_val(&mut cur, start, &spec)?;
                if spec.valuations.iter().any(|v| v.name == decl.name) {
                    return Err(ParseError {
                        span: start,
                        message: format!("duplicate valuation name `{}`", decl.name),
                    });
                }
                spec.valuations.push(decl);
            }
            "query" => {
                if have_query {
                    return Err(ParseError {
                        span: start,
                        message: "more than one query statement".into(),
                    });
                }
                loop {
                    let (name, span) = cur.ident("a variable name")?;
                    require_declared(&spec, &name, span)?;
                    if spec.query.contains(&name) {
                        return Err(ParseError {
                            span,
                            message: format!("`{name}` listed twice in the query"),
                        });
                    }
                    spec.query.push(name);
                    if !cur.eat(",") {
                        break;
                    }
                }
                spec.query_span = start;
                have_query = true;
            }
            "" => return cur.err("expected `var`, `val` or `query`"),
            other => {
                return Err(ParseError {
                    span: start,
                    message: format!("unknown statement `{other}` (expected `var`, `val` or `query`)"),
                })
            }
        }
        if !cur.at_end() {
            return cur.err("unexpected trailing input");
        }
    }
    if !have_query {
        return Err(ParseError {
            span: Span {
                line: last_line,
                column: 1,
            },
            message: "no query".into(),
        });
    }
    Ok(spec)
}

fn require_declared(spec: &NetworkSpec, name: &str, span: Span) -> Result<(), ParseError> {
    if spec.variables.iter().any(|v| v.name == name) {
        Ok(())
    } else {
        Err(ParseError {
            span,
            message: format!("undeclared variable `{name}`"),
        })
    }
}

fn parse_var(cur: &mut Cursor<'_>, span: Span) -> Result<VarDecl, ParseError> {
    let (name, _) = cur.ident("a variable name")?;
    cur.expect(":")?;
    let states = if cur.eat("{") {
        let mut states = Vec::new();
        loop {
            let label = cur.label()?;
            if states.contains(&label) {
                return cur.err(format!("duplicate state `{label}`"));
            }
            states.push(label);
            if cur.eat("}") {
                break;
            }
            cur.expect(",")?;
        }
        states
    } else {
        let from = cur.take_while(|c| c.is_ascii_digit());
        cur.expect("..")?;
        let to = cur.take_while(|c| c.is_ascii_digit());
        let (Ok(a), Ok(b)) = (from.parse::<i64>(), to.parse::<i64>()) else {
            return cur.err("expected a frame `{s0,s1,...}` or an integer range `a..b`");
        };
        if b < a {
            return cur.err(format!("empty range {a}..{b}"));
        }
        (a..=b).map(|s| s.to_string()).collect()
    };
    Ok(VarDecl { name, states, span })
}

fn parse_assignment(cur: &mut Cursor<'_>, spec: &NetworkSpec, domain: &[String]) -> Result<Assignment, ParseError> {
    let (variable, span) = cur.ident("a variable name")?;
    require_in_domain(spec, domain, &variable, span)?;
    cur.expect("=")?;
    let state_span = cur.span();
    let state = cur.label()?;
    let decl = spec.variables.iter().find(|v| v.name == variable).expect("checked above");
    if !decl.states.contains(&state) {
        return Err(ParseError {
            span: state_span,
            message: format!("`{state}` is not a state of `{variable}`"),
        });
    }
    Ok(Assignment { variable, state })
}

fn require_in_domain(spec: &NetworkSpec, domain: &[String], name: &str, span: Span) -> Result<(), ParseError> {
    require_declared(spec, name, span)?;
    if !domain.iter().any(|d| d == name) {
        return Err(ParseError {
            span,
            message: format!("`{name}` is not in the valuation's domain"),
        });
    }
    Ok(())
}

fn parse_reliability(cur: &mut Cursor<'_>) -> Result<Reliability, ParseError> {
    cur.expect("prob")?;
    let mut r = if cur.eat("[") {
        let l = cur.number()?;
        cur.expect(",")?;
        let u = cur.number()?;
        cur.expect("]")?;
        Reliability::interval(l, u)
    } else {
        Reliability::point(cur.number()?)
    };
    if cur.eat("truth") {
        r.truth = Some(cur.number()?);
    }
    Ok(r)
}

fn parse_val(cur: &mut Cursor<'_>, span: Span, spec: &NetworkSpec) -> Result<ValDecl, ParseError> {
    let (name, _) = cur.ident("a valuation name")?;
    cur.expect("on")?;
    let mut domain: Vec<String> = Vec::new();
    loop {
        let (v, vspan) = cur.ident("a variable name")?;
        require_declared(spec, &v, vspan)?;
        if domain.contains(&v) {
            return Err(ParseError {
                span: vspan,
                message: format!("`{v}` listed twice in the domain"),
            });
        }
        domain.push(v);
        if !cur.eat(",") {
            break;
        }
    }
    cur.expect(":")?;
    let kind_span = cur.span();
    let rule = match cur.keyword().as_str() {
        "sum" => {
            let (target, tspan) = cur.ident("a variable name")?;
            require_in_domain(spec, &domain, &target, tspan)?;
            cur.expect("=")?;
            let mut addends = Vec::new();
            loop {
                let (a, aspan) = cur.ident("a variable name")?;
                require_in_domain(spec, &domain, &a, aspan)?;
                addends.push(a);
                if !cur.eat("+") {
                    break;
                }
            }
            RuleSpec {
                kind: RuleKind::Sum { target, addends },
                reliability: parse_reliability(cur)?,
            }
        }
        "implies" => {
            let antecedent = parse_assignment(cur, spec, &domain)?;
            cur.expect("->")?;
            let consequent = parse_assignment(cur, spec, &domain)?;
            RuleSpec {
                kind: RuleKind::Implies { antecedent, consequent },
                reliability: parse_reliability(cur)?,
            }
        }
        "assign" => {
            let a = parse_assignment(cur, spec, &domain)?;
            RuleSpec {
                kind: RuleKind::Assign(a),
                reliability: parse_reliability(cur)?,
            }
        }
        "table" => {
            let mut rows = Vec::new();
            loop {
                let l = cur.number()?;
                let u = if cur.eat(",") { cur.number()? } else { l };
                rows.push((l, u));
                if !cur.eat(";") || cur.at_end() {
                    break;
                }
            }
            RuleSpec {
                kind: RuleKind::Table { rows },
                reliability: Reliability::point(1.0),
            }
        }
        other => {
            return Err(ParseError {
                span: kind_span,
                message: format!("unknown rule kind `{other}` (expected sum, implies, assign or table)"),
            })
        }
    };
    Ok(ValDecl {
        name,
        domain,
        rule,
        span,
    })
}

fn fmt_reliability(out: &mut String, r: &Reliability) {
    if r.lower == r.upper {
        let _ = write!(out, " prob {}", r.lower);
    } else {
        let _ = write!(out, " prob [{},{}]", r.lower, r.upper);
    }
    if let Some(t) = r.truth {
        let _ = write!(out, " truth {t}");
    }
}

/// Renders a spec back into `.cvn` text.
pub fn print_network(spec: &NetworkSpec) -> String {
    let mut out = String::new();
    for v in &spec.variables {
        let _ = writeln!(out, "var {} : {{{}}}", v.name, v.states.join(","));
    }
    for v in &spec.valuations {
        let _ = write!(out, "val {} on {} : ", v.name, v.domain.join(","));
        match &v.rule.kind {
            RuleKind::Sum { target, addends } => {
                let _ = write!(out, "sum {target} = {}", addends.join(" + "));
                fmt_reliability(&mut out, &v.rule.reliability);
            }
            RuleKind::Implies { antecedent, consequent } => {
                let _ = write!(
                    out,
                    "implies {}={} -> {}={}",
                    antecedent.variable, antecedent.state, consequent.variable, consequent.state
                );
                fmt_reliability(&mut out, &v.rule.reliability);
            }
            RuleKind::Assign(a) => {
                let _ = write!(out, "assign {}={}", a.variable, a.state);
                fmt_reliability(&mut out, &v.rule.reliability);
            }
            RuleKind::Table { rows } => {
                let cells: Vec<String> = rows.iter().map(|(l, u)| format!("{l},{u}")).collect();
                let _ = write!(out, "table {}", cells.join("; "));
            }
        }
        out.push('\n');
    }
    let _ = writeln!(out, "query {}", spec.query.join(","));
    out
}

impl NetworkSpec {
    /// Copy with every source position reset, for structural comparison.
    pub fn without_spans(&self) -> NetworkSpec {
        let mut s = self.clone();
        s.variables.iter_mut().for_each(|v| v.span = Span::default());
        s.valuations.iter_mut().for_each(|v| v.span = Span::default());
        s.query_span = Span::default();
        s
    }

    pub fn variable(&self, name: &str) -> Option<Variable> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .and_then(|v| Variable::new(&v.name, v.states.clone()).ok())
    }

    pub fn domain_of(&self, decl: &ValDecl) -> Result<Domain, Error> {
        let vars = decl
            .domain
            .iter()
            .map(|n| {
                self.variable(n)
                    .ok_or_else(|| Error::Network(format!("undeclared variable `{n}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Domain::new(vars)
    }

    /// Compiles one valuation, prefixing errors with its name and position.
    pub fn compile_valuation(&self, decl: &ValDecl, engine: EngineKind) -> Result<NamedValuation, Error> {
        let domain = self.domain_of(decl)?;
        let valuation = compile_rule(&decl.rule, &domain, engine)
            .map_err(|e| with_context(e, &format!("valuation `{}` (line {})", decl.name, decl.span.line)))?;
        Ok(NamedValuation::new(decl.name.clone(), valuation))
    }

    /// Builds the valuation network for one engine.
    pub fn compile(&self, engine: EngineKind) -> Result<ValuationNetwork, Error> {
        let vars = self
            .variables
            .iter()
            .map(|v| Variable::new(&v.name, v.states.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let vals = self
            .valuations
            .iter()
            .map(|d| self.compile_valuation(d, engine))
            .collect::<Result<Vec<_>, _>>()?;
        let query: Vec<&str> = self.query.iter().map(String::as_str).collect();
        ValuationNetwork::new(vars, vals, &query)
    }
}

/// Prefixes the message of `e` with `ctx`, keeping its kind.
pub fn with_context(e: Error, ctx: &str) -> Error {
    match e {
        Error::InvalidVariable(m) => Error::InvalidVariable(format!("{ctx}: {m}")),
        Error::Domain(m) => Error::Domain(format!("{ctx}: {m}")),
        Error::InvalidPmf(m) => Error::InvalidPmf(format!("{ctx}: {m}")),
        Error::Incoherent(m) => Error::Incoherent(format!("{ctx}: {m}")),
        Error::EmptyCredalSet(m) => Error::EmptyCredalSet(format!("{ctx}: {m}")),
        Error::TotalConflict(m) => Error::TotalConflict(format!("{ctx}: {m}")),
        Error::KindMismatch(m) => Error::KindMismatch(format!("{ctx}: {m}")),
        Error::Solver(m) => Error::Solver(format!("{ctx}: {m}")),
        Error::InvalidRule(m) => Error::InvalidRule(format!("{ctx}: {m}")),
        Error::UnsatisfiableRule(m) => Error::UnsatisfiableRule(format!("{ctx}: {m}")),
        Error::Network(m) => Error::Network(format!("{ctx}: {m}")),
        Error::InvalidOrder(m) => Error::InvalidOrder(format!("{ctx}: {m}")),
        other => other,
    }
}
