//! Command-line front end: surface syntax for polynomials, formulas and
//! cells, dispatch into the library, and text/JSON rendering.
//!
//! Results go to stdout, diagnostics to stderr. Exit codes: 0 on success,
//! 1 on domain errors, 2 on syntax errors. Identical inputs produce
//! byte-identical output.

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cells::{Cell, CellMeasure};
use crate::constructible::{igusa_zeta, ConstructibleFunction, Integral, Mode};
use crate::error::{Error, Result};
use crate::field::{FieldContext, FieldElement};
use crate::formula::QFFormula;
use crate::hensel::{coset_reps, hensel_lift, is_nth_power, power_index};
use crate::oracle;
use crate::poly::{Poly, SplitPoly};
use crate::prepare::{decompose, prepare, prepare_on, PreparedCell};
use crate::rat::{parse_rat, render_rat, Rat};
use crate::ratfun::RationalFunctionT;
use crate::valuation::Valuation;

// ---------------------------------------------------------------------------
// Surface syntax: polynomials.

/// Outcome of `parse_poly`: factored input becomes a split polynomial,
/// expanded input a dense one (accepted only by `hensel`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedPoly {
    Split(SplitPoly),
    Dense(Poly),
}

struct Cursor<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            text: text.as_bytes(),
            pos: 0,
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::syntax(
                self.column(),
                format!("expected `{}`", c as char),
            ))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(kw.as_bytes()) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn expect_end(&mut self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(Error::syntax(self.column(), "unexpected trailing input"))
        }
    }

    /// Unsigned integer.
    fn parse_uint(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::syntax(self.column(), "expected an integer"));
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::syntax(start + 1, "integer out of range"))
    }

    /// Signed rational a or a/b.
    fn parse_rational(&mut self) -> Result<Rat> {
        self.skip_ws();
        let start = self.pos;
        if self.text.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if digits_start == self.pos {
            return Err(Error::syntax(start + 1, "expected a rational"));
        }
        if self.text.get(self.pos) == Some(&b'/') {
            self.pos += 1;
            let den_start = self.pos;
            while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if den_start == self.pos {
                return Err(Error::syntax(self.column(), "expected a denominator"));
            }
        }
        parse_rat(
            std::str::from_utf8(&self.text[start..self.pos]).unwrap(),
            start + 1,
        )
    }
}

/// One factored atom: a rational constant, `t`, or `(t +- r)`, each with an
/// optional positive exponent.
/// A constant coefficient, a linear factor (root, multiplicity), or both.
type FactoredAtom = (Option<Rat>, Option<(Rat, u32)>);

fn parse_factored_atom(cur: &mut Cursor) -> Result<FactoredAtom> {
    match cur.peek() {
        Some(b't') => {
            cur.pos += 1;
            // shorthand without parentheses: t + r or t - r (no exponent)
            match cur.peek() {
                Some(b'+') => {
                    cur.pos += 1;
                    let r = cur.parse_rational()?;
                    return Ok((None, Some((-r, 1))));
                }
                Some(b'-') => {
                    cur.pos += 1;
                    let r = cur.parse_rational()?;
                    return Ok((None, Some((r, 1))));
                }
                _ => {}
            }
            let e = parse_exponent(cur)?;
            Ok((None, Some((Rat::zero(), e))))
        }
        Some(b'(') => {
            cur.pos += 1;
            cur.expect(b't')?;
            let root = match cur.peek() {
                Some(b'+') => {
                    cur.pos += 1;
                    -cur.parse_rational()?
                }
                Some(b'-') => {
                    cur.pos += 1;
                    cur.parse_rational()?
                }
                _ => Rat::zero(),
            };
            cur.expect(b')')?;
            let e = parse_exponent(cur)?;
            Ok((None, Some((root, e))))
        }
        _ => {
            let c = cur.parse_rational()?;
            Ok((Some(c), None))
        }
    }
}

fn parse_exponent(cur: &mut Cursor) -> Result<u32> {
    if !cur.eat(b'^') {
        return Ok(1);
    }
    let col = cur.column();
    let e = cur.parse_uint()?;
    u32::try_from(e).map_err(|_| Error::syntax(col, "exponent out of range"))
}

/// Factored polynomial at the cursor: product of atoms joined by `*`.
fn parse_split_at(cur: &mut Cursor) -> Result<SplitPoly> {
    let mut unit = Rat::one();
    let mut factors: Vec<(Rat, u32)> = Vec::new();
    let mut saw_constant = false;
    loop {
        let (c, f) = parse_factored_atom(cur)?;
        if let Some(c) = c {
            if c.is_zero() {
                return Err(Error::syntax(cur.column(), "zero coefficient"));
            }
            unit *= c;
            saw_constant = true;
        }
        if let Some(f) = f {
            factors.push(f);
        }
        if !cur.eat(b'*') {
            break;
        }
    }
    if factors.is_empty() && !saw_constant {
        return Err(Error::syntax(cur.column(), "expected a polynomial"));
    }
    SplitPoly::new(unit, factors)
}

/// Expanded polynomial at the cursor: signed sum of monomials c, c*t^k, t^k.
fn parse_dense_at(cur: &mut Cursor, prime: u64) -> Result<Poly> {
    let mut coeffs: Vec<Rat> = Vec::new();
    let add_term = |coeff: Rat, deg: usize, coeffs: &mut Vec<Rat>| {
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, Rat::zero());
        }
        coeffs[deg] += coeff;
    };
    let mut first = true;
    loop {
        let sign = if cur.eat(b'+') {
            Rat::one()
        } else if cur.eat(b'-') {
            -Rat::one()
        } else if first {
            Rat::one()
        } else {
            break;
        };
        first = false;
        // monomial: rational ['*' t-part] | t-part
        let (coeff, deg) = match cur.peek() {
            Some(b't') => {
                cur.pos += 1;
                (Rat::one(), parse_exponent(cur)? as usize)
            }
            _ => {
                let c = cur.parse_rational()?;
                if cur.eat(b'*') {
                    cur.expect(b't')?;
                    (c, parse_exponent(cur)? as usize)
                } else if cur.peek() == Some(b't') {
                    cur.pos += 1;
                    (c, parse_exponent(cur)? as usize)
                } else {
                    (c, 0)
                }
            }
        };
        add_term(sign * coeff, deg, &mut coeffs);
        if cur.at_end() {
            break;
        }
    }
    if coeffs.is_empty() {
        return Err(Error::syntax(cur.column(), "expected a polynomial"));
    }
    Ok(Poly::new(coeffs, prime))
}

/// Parse a polynomial: factored form gives a split polynomial, expanded
/// form a dense one. Whitespace-insensitive; unique parse or error.
pub fn parse_poly(text: &str, prime: u64) -> Result<ParsedPoly> {
    let mut cur = Cursor::new(text);
    let split = parse_split_at(&mut cur).and_then(|s| {
        cur.expect_end()?;
        Ok(s)
    });
    match split {
        Ok(s) => Ok(ParsedPoly::Split(s)),
        Err(e1) => {
            let mut cur = Cursor::new(text);
            let dense = parse_dense_at(&mut cur, prime).and_then(|d| {
                cur.expect_end()?;
                Ok(d)
            });
            match dense {
                Ok(d) => Ok(ParsedPoly::Dense(d)),
                Err(e2) => {
                    // report whichever parse got further
                    let col = |err: &Error| match err {
                        Error::Syntax { column, .. } => *column,
                        _ => 0,
                    };
                    Err(if col(&e2) > col(&e1) { e2 } else { e1 })
                }
            }
        }
    }
}

/// Parse a polynomial that must be in factored form.
pub fn parse_split_poly(text: &str) -> Result<SplitPoly> {
    let mut cur = Cursor::new(text);
    let s = parse_split_at(&mut cur)?;
    cur.expect_end()?;
    Ok(s)
}

// ---------------------------------------------------------------------------
// Surface syntax: formulas. Precedence: ! > & > |.

fn parse_or(cur: &mut Cursor) -> Result<QFFormula> {
    let mut lhs = parse_and(cur)?;
    while cur.eat(b'|') {
        let rhs = parse_and(cur)?;
        lhs = QFFormula::or(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_and(cur: &mut Cursor) -> Result<QFFormula> {
    let mut lhs = parse_not(cur)?;
    while cur.eat(b'&') {
        let rhs = parse_not(cur)?;
        lhs = QFFormula::and(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_not(cur: &mut Cursor) -> Result<QFFormula> {
    if cur.eat(b'!') {
        return Ok(QFFormula::not(parse_not(cur)?));
    }
    parse_formula_atom(cur)
}

fn parse_formula_atom(cur: &mut Cursor) -> Result<QFFormula> {
    cur.skip_ws();
    if cur.eat_keyword("abs") {
        cur.expect(b'(')?;
        let f = parse_split_at(cur)?;
        cur.expect(b')')?;
        let le = if cur.eat(b'<') {
            cur.eat(b'=')
        } else {
            return Err(Error::syntax(cur.column(), "expected `<` or `<=`"));
        };
        if !cur.eat_keyword("abs") {
            return Err(Error::syntax(cur.column(), "expected `abs(`"));
        }
        cur.expect(b'(')?;
        let g = parse_split_at(cur)?;
        cur.expect(b')')?;
        return Ok(if le {
            QFFormula::AbsLe(f, g)
        } else {
            QFFormula::AbsLt(f, g)
        });
    }
    if cur.eat_keyword("pow") {
        cur.expect(b'(')?;
        let col = cur.column();
        let m = cur.parse_uint()?;
        if m < 1 {
            return Err(Error::syntax(col, "power index must be >= 1"));
        }
        cur.expect(b',')?;
        let f = parse_split_at(cur)?;
        cur.expect(b')')?;
        return Ok(QFFormula::Pow(m, f));
    }
    if cur.peek() == Some(b'(') {
        // parenthesized formula, or a polynomial zero-test
        let save = cur.pos;
        cur.pos += 1;
        if let Ok(inner) = parse_or(cur) {
            if cur.eat(b')') {
                return Ok(inner);
            }
        }
        cur.pos = save;
    }
    // polynomial = 0
    let f = parse_split_at(cur)?;
    cur.expect(b'=')?;
    let col = cur.column();
    let zero = cur.parse_rational()?;
    if !zero.is_zero() {
        return Err(Error::syntax(col, "only comparisons with 0 are supported"));
    }
    Ok(QFFormula::EqZero(f))
}

/// Parse a quantifier-free formula: `abs(f) < abs(g)`, `abs(f) <= abs(g)`,
/// `pow(n, f)`, `f = 0`, connectives `&`, `|`, `!`, and parentheses.
pub fn parse_formula(text: &str) -> Result<QFFormula> {
    let mut cur = Cursor::new(text);
    let phi = parse_or(&mut cur)?;
    cur.expect_end()?;
    phi.validate()?;
    Ok(phi)
}

// ---------------------------------------------------------------------------
// Cell JSON: {"center": "rat", "lo": int|null, "hi": int|null,
//             "lambda": "rat", "n": int}

#[derive(Debug, Serialize, Deserialize)]
struct CellJson {
    center: String,
    lo: Option<i64>,
    hi: Option<i64>,
    lambda: String,
    n: u64,
}

pub fn cell_to_json(cell: &Cell) -> serde_json::Value {
    serde_json::json!({
        "center": render_rat(cell.center()),
        "lo": cell.lo(),
        "hi": cell.hi(),
        "lambda": render_rat(cell.lambda()),
        "n": cell.n(),
    })
}

pub fn cell_from_json(text: &str, prime: u64) -> Result<Cell> {
    let parsed: CellJson = serde_json::from_str(text)
        .map_err(|e| Error::syntax(e.column().max(1), format!("invalid cell JSON: {e}")))?;
    let center = parse_rat(&parsed.center, 1)?;
    let lambda = parse_rat(&parsed.lambda, 1)?;
    Cell::new(center, parsed.lo, parsed.hi, lambda, parsed.n, prime)
}

fn ratfun_to_json(z: &RationalFunctionT) -> serde_json::Value {
    let render_coeffs =
        |p: &crate::ratfun::PolyT| -> Vec<String> { p.coeffs().iter().map(render_rat).collect() };
    serde_json::json!({
        "num": render_coeffs(z.num()),
        "den": render_coeffs(z.den()),
    })
}

// ---------------------------------------------------------------------------
// Integrand syntax for `integrate`: product of `v(f)[^d]`, `abs(f)[^e]`
// (e may be negative) and rational constants, joined by `*`.

type IntegrandParts = (Rat, Vec<(IntegrandKind, SplitPoly, i64)>);

fn parse_integrand_parts(text: &str) -> Result<IntegrandParts> {
    let mut cur = Cursor::new(text);
    let mut scalar = Rat::one();
    let mut parts = Vec::new();
    loop {
        cur.skip_ws();
        if cur.eat_keyword("abs") {
            cur.expect(b'(')?;
            let f = parse_split_at(&mut cur)?;
            cur.expect(b')')?;
            let e = parse_signed_exponent(&mut cur)?;
            parts.push((IntegrandKind::Abs, f, e));
        } else if cur.eat_keyword("v") {
            cur.expect(b'(')?;
            let f = parse_split_at(&mut cur)?;
            cur.expect(b')')?;
            let d = parse_signed_exponent(&mut cur)?;
            if d < 0 {
                return Err(Error::syntax(
                    cur.column(),
                    "v(f) does not take negative powers",
                ));
            }
            parts.push((IntegrandKind::V, f, d));
        } else {
            scalar *= cur.parse_rational()?;
        }
        if !cur.eat(b'*') {
            break;
        }
    }
    cur.expect_end()?;
    Ok((scalar, parts))
}

fn parse_signed_exponent(cur: &mut Cursor) -> Result<i64> {
    if !cur.eat(b'^') {
        return Ok(1);
    }
    cur.skip_ws();
    let neg = cur.eat(b'-');
    let e = cur.parse_uint()? as i64;
    Ok(if neg { -e } else { e })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum IntegrandKind {
    V,
    Abs,
}

/// Build the constructible function for an integrand over a domain.
/// Point cells are omitted: integration does not see measure-zero sets.
fn build_integrand(text: &str, prime: u64, domain: &Cell) -> Result<ConstructibleFunction> {
    let (scalar, parts) = parse_integrand_parts(text)?;
    if parts.is_empty() {
        // constant integrand: scalar * |1|
        let one = SplitPoly::constant(Rat::one())?;
        let cells = nonpoint(prepare_on(std::slice::from_ref(&one), prime, 1, domain)?);
        let cf = ConstructibleFunction::from_prepared(&one, &cells, Mode::Abs, prime)?;
        return Ok(cf.scale(&scalar));
    }
    let fs: Vec<SplitPoly> = parts.iter().map(|(_, f, _)| f.clone()).collect();
    let cells = nonpoint(prepare_on(&fs, prime, 1, domain)?);
    let mut acc: Option<ConstructibleFunction> = None;
    for (kind, f, e) in &parts {
        let cf = match kind {
            IntegrandKind::Abs => ConstructibleFunction::abs_power(f, &cells, *e, prime)?,
            IntegrandKind::V => {
                let base = ConstructibleFunction::from_prepared(f, &cells, Mode::V, prime)?;
                let mut out = base.clone();
                for _ in 1..*e {
                    out = out.mul(&base)?;
                }
                out
            }
        };
        acc = Some(match acc {
            None => cf,
            Some(prev) => prev.mul(&cf)?,
        });
    }
    Ok(acc.unwrap().scale(&scalar))
}

fn nonpoint(cells: Vec<PreparedCell>) -> Vec<PreparedCell> {
    cells.into_iter().filter(|pc| !pc.cell.is_point()).collect()
}

fn parse_domain(text: &str, prime: u64) -> Result<Cell> {
    match text {
        "R" => Ok(Cell::unit_ball(prime)),
        "M" => Ok(Cell::maximal_ideal(prime)),
        other => cell_from_json(other, prime),
    }
}

// ---------------------------------------------------------------------------
// Command-line interface.

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldKind {
    /// Q_p with the p-adic valuation
    Qp,
    /// F_p((t)) with the t-adic valuation
    LaurentFp,
    /// Q((t)) with the t-adic valuation
    LaurentQ,
}

impl FieldKind {
    fn context(self, prime: u64) -> FieldContext {
        match self {
            FieldKind::Qp => FieldContext::PAdic(prime),
            FieldKind::LaurentFp => FieldContext::LaurentFp(prime),
            FieldKind::LaurentQ => FieldContext::LaurentQ,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "padicell",
    about = "Exact computation in p-adic and Laurent-series fields",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Valuation of a rational element of the chosen field
    Valuation {
        #[arg(long)]
        prime: u64,
        #[arg(long, value_enum, default_value_t = FieldKind::Qp)]
        field: FieldKind,
        /// Element as a rational a/b, or - for stdin
        value: String,
    },
    /// Residue of an element of the valuation ring
    Residue {
        #[arg(long)]
        prime: u64,
        #[arg(long, value_enum, default_value_t = FieldKind::Qp)]
        field: FieldKind,
        value: String,
    },
    /// Angular component
    Ac {
        #[arg(long)]
        prime: u64,
        #[arg(long, value_enum, default_value_t = FieldKind::Qp)]
        field: FieldKind,
        value: String,
    },
    /// Restricted division x/y (0 when v(x) < v(y) or y = 0)
    Div {
        #[arg(long)]
        prime: u64,
        #[arg(long, value_enum, default_value_t = FieldKind::Qp)]
        field: FieldKind,
        x: String,
        y: String,
    },
    /// Decide whether a rational is an n-th power in Q_p^x
    Power {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        n: u64,
        value: String,
    },
    /// Coset representatives of Q_p^x modulo n-th powers
    Cosets {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        n: u64,
    },
    /// The index [Q_p^x : P_n]
    Index {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        n: u64,
    },
    /// Lift an approximate root by Hensel's lemma
    Hensel {
        #[arg(long)]
        prime: u64,
        /// Starting approximation (a rational)
        #[arg(long)]
        start: String,
        /// Known unit digits of the returned root
        #[arg(long, default_value_t = 20)]
        precision: u32,
        /// Polynomial in expanded form, e.g. "t^2-6"
        poly: String,
    },
    /// Haar measure of a cell (mu(R) = 1)
    Measure {
        #[arg(long)]
        prime: u64,
        /// Cell as JSON
        #[arg(long)]
        cell: String,
    },
    /// Split a cell into sub-cells of coset modulus lcm(n, m)
    Refine {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        modulus: u64,
        #[arg(long)]
        cell: String,
    },
    /// Cell decomposition with preparation of split polynomials
    Prepare {
        #[arg(long)]
        prime: u64,
        #[arg(long, default_value_t = 1)]
        modulus: u64,
        /// Factored polynomials, e.g. "(t)*(t-1)"
        polys: Vec<String>,
    },
    /// Decompose the solution set of a formula into cells
    Decompose {
        #[arg(long)]
        prime: u64,
        /// Formula, e.g. "abs(t) < abs(1) & pow(2, t)"
        formula: String,
    },
    /// Integrate a constructible function over a domain cell
    Integrate {
        #[arg(long)]
        prime: u64,
        /// Integrand: product of v(f)[^d], abs(f)[^e], rationals
        integrand: String,
        /// Domain: R, M, or cell JSON
        #[arg(long, default_value = "R")]
        domain: String,
        /// Render a non-integrable result as 0
        #[arg(long)]
        paper_convention_ilz: bool,
    },
    /// Local zeta function Z(T) of |f|^s over a domain
    Zeta {
        #[arg(long)]
        prime: u64,
        /// Factored polynomial
        poly: String,
        #[arg(long, default_value = "R")]
        domain: String,
    },
    /// Brute-force ground truth
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
}

#[derive(Debug, Subcommand)]
enum OracleCmd {
    /// n-th power unit classes modulo p^depth, by enumeration
    Classes {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        depth: u32,
    },
    /// Measure of a cell by counting residue classes at the given depth
    Measure {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        cell: String,
        #[arg(long)]
        depth: u32,
    },
    /// Truncated Riemann sum of an integrand over a domain
    Integrate {
        #[arg(long)]
        prime: u64,
        integrand: String,
        #[arg(long, default_value = "R")]
        domain: String,
        #[arg(long)]
        depth: u32,
    },
    /// Check that cells partition the sample grid (or exactly cover a
    /// formula's solution set)
    Partition {
        #[arg(long)]
        prime: u64,
        /// JSON array of cells
        #[arg(long)]
        cells: String,
        /// When set, cells must cover exactly the points satisfying it
        #[arg(long)]
        formula: Option<String>,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_from_env() -> i32 {
    let args: Vec<String> = std::env::args().collect();
    run_main(&args)
}

pub fn run_main(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            println!("{out}");
            0
        }
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

/// Run a command line (excluding the program name) and capture stdout text.
pub fn run_for_test(args: &[&str]) -> std::result::Result<String, (i32, String)> {
    let mut full = vec!["padicell".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    let cli = Cli::try_parse_from(&full).map_err(|e| (2, e.to_string()))?;
    execute(&cli).map_err(|e| (e.exit_code(), e.to_string()))
}

fn read_arg(value: &str) -> Result<String> {
    if value == "-" {
        let mut buf = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut buf)
            .map_err(|e| Error::InvalidArgument(format!("cannot read stdin: {e}")))?;
        Ok(buf.trim().to_string())
    } else {
        Ok(value.to_string())
    }
}

fn check_prime(p: u64) -> Result<()> {
    if p < 2 {
        return Err(Error::InvalidArgument("prime must be >= 2".into()));
    }
    for d in 2..p {
        if d * d > p {
            break;
        }
        if p.is_multiple_of(d) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<String> {
    let json = cli.format == Format::Json;
    match &cli.command {
        Command::Valuation {
            prime,
            field,
            value,
        } => {
            check_prime(*prime)?;
            let x = FieldElement::exact(field.context(*prime), parse_rat(&read_arg(value)?, 1)?)?;
            let v = x.valuation()?;
            Ok(if json {
                match v {
                    Valuation::Finite(k) => serde_json::json!({ "valuation": k }).to_string(),
                    Valuation::Infinity => serde_json::json!({ "valuation": "INF" }).to_string(),
                }
            } else {
                v.to_string()
            })
        }
        Command::Residue {
            prime,
            field,
            value,
        } => {
            check_prime(*prime)?;
            let x = FieldElement::exact(field.context(*prime), parse_rat(&read_arg(value)?, 1)?)?;
            let r = x.residue()?;
            Ok(if json {
                serde_json::json!({ "residue": r.to_string() }).to_string()
            } else {
                r.to_string()
            })
        }
        Command::Ac {
            prime,
            field,
            value,
        } => {
            check_prime(*prime)?;
            let x = FieldElement::exact(field.context(*prime), parse_rat(&read_arg(value)?, 1)?)?;
            let r = x.ac()?;
            Ok(if json {
                serde_json::json!({ "ac": r.to_string() }).to_string()
            } else {
                r.to_string()
            })
        }
        Command::Div { prime, field, x, y } => {
            check_prime(*prime)?;
            let ctx = field.context(*prime);
            let a = FieldElement::exact(ctx, parse_rat(&read_arg(x)?, 1)?)?;
            let b = FieldElement::exact(ctx, parse_rat(&read_arg(y)?, 1)?)?;
            let q = a.restricted_div(&b)?;
            Ok(if json {
                serde_json::json!({ "result": q.to_string() }).to_string()
            } else {
                q.to_string()
            })
        }
        Command::Power { prime, n, value } => {
            check_prime(*prime)?;
            let x = parse_rat(&read_arg(value)?, 1)?;
            if x.is_zero() {
                return Err(Error::InvalidArgument(
                    "P_n is a predicate on nonzero elements".into(),
                ));
            }
            let b = is_nth_power(&x, *n, *prime);
            Ok(if json {
                serde_json::json!({ "is_nth_power": b }).to_string()
            } else {
                b.to_string()
            })
        }
        Command::Cosets { prime, n } => {
            check_prime(*prime)?;
            let reps = coset_reps(*prime, *n);
            Ok(if json {
                let list: Vec<String> =
                    reps.iter().map(|r| render_rat(&r.representative)).collect();
                serde_json::json!({ "n": n, "representatives": list }).to_string()
            } else {
                reps.iter()
                    .map(|r| render_rat(&r.representative))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
        }
        Command::Index { prime, n } => {
            check_prime(*prime)?;
            let idx = power_index(*prime, *n);
            Ok(if json {
                serde_json::json!({ "index": idx }).to_string()
            } else {
                idx.to_string()
            })
        }
        Command::Hensel {
            prime,
            start,
            precision,
            poly,
        } => {
            check_prime(*prime)?;
            let a = parse_rat(&read_arg(start)?, 1)?;
            let f = match parse_poly(&read_arg(poly)?, *prime)? {
                ParsedPoly::Dense(f) => f,
                ParsedPoly::Split(s) => {
                    // factored input works too: expand is unnecessary, the
                    // lift only needs evaluation, so rebuild densely
                    let mut coeffs = vec![Rat::one()];
                    for (root, mult) in s.factors() {
                        for _ in 0..*mult {
                            let mut next = vec![Rat::zero(); coeffs.len() + 1];
                            for (i, c) in coeffs.iter().enumerate() {
                                next[i + 1] += c;
                                next[i] -= c * root;
                            }
                            coeffs = next;
                        }
                    }
                    let coeffs = coeffs.iter().map(|c| c * s.unit()).collect();
                    Poly::new(coeffs, *prime)
                }
            };
            let root = hensel_lift(&f, &a, *precision)?;
            let rep = root.representative();
            Ok(if json {
                serde_json::json!({
                    "valuation": root.valuation().finite(),
                    "unit": root.unit().map(|u| u.to_string()),
                    "precision": root.precision(),
                    "representative": render_rat(&rep),
                })
                .to_string()
            } else {
                format!("{root}")
            })
        }
        Command::Measure { prime, cell } => {
            check_prime(*prime)?;
            let c = cell_from_json(&read_arg(cell)?, *prime)?;
            let m = c.measure();
            Ok(if json {
                match m {
                    CellMeasure::Finite(x) => {
                        serde_json::json!({ "measure": render_rat(&x) }).to_string()
                    }
                    CellMeasure::Infinite => {
                        serde_json::json!({ "measure": "INFINITE" }).to_string()
                    }
                }
            } else {
                m.to_string()
            })
        }
        Command::Refine {
            prime,
            modulus,
            cell,
        } => {
            check_prime(*prime)?;
            let c = cell_from_json(&read_arg(cell)?, *prime)?;
            let parts = c.refine_by_coset(*modulus)?;
            Ok(if json {
                let list: Vec<_> = parts.iter().map(cell_to_json).collect();
                serde_json::json!({ "cells": list }).to_string()
            } else {
                parts
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join("\n")
            })
        }
        Command::Prepare {
            prime,
            modulus,
            polys,
        } => {
            check_prime(*prime)?;
            if polys.is_empty() {
                return Err(Error::InvalidArgument(
                    "prepare needs at least one polynomial".into(),
                ));
            }
            let fs: Result<Vec<SplitPoly>> = polys
                .iter()
                .map(|s| parse_split_poly(&read_arg(s)?))
                .collect();
            let fs = fs?;
            let prepared = prepare(&fs, *prime, *modulus)?;
            Ok(render_prepared(&prepared, json))
        }
        Command::Decompose { prime, formula } => {
            check_prime(*prime)?;
            let phi = parse_formula(&read_arg(formula)?)?;
            let cells = decompose(&phi, *prime)?;
            Ok(if json {
                let list: Vec<_> = cells.iter().map(cell_to_json).collect();
                serde_json::json!({ "cells": list }).to_string()
            } else if cells.is_empty() {
                "empty".to_string()
            } else {
                cells
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join("\n")
            })
        }
        Command::Integrate {
            prime,
            integrand,
            domain,
            paper_convention_ilz,
        } => {
            check_prime(*prime)?;
            let dom = parse_domain(&read_arg(domain)?, *prime)?;
            let cf = build_integrand(&read_arg(integrand)?, *prime, &dom)?;
            let result = cf.integrate()?;
            let rendered = match (&result, paper_convention_ilz) {
                (Integral::NonIntegrable, true) => "0".to_string(),
                (r, _) => r.to_string(),
            };
            Ok(if json {
                serde_json::json!({ "integral": rendered }).to_string()
            } else {
                rendered
            })
        }
        Command::Zeta {
            prime,
            poly,
            domain,
        } => {
            check_prime(*prime)?;
            let f = parse_split_poly(&read_arg(poly)?)?;
            let dom = parse_domain(&read_arg(domain)?, *prime)?;
            let z = igusa_zeta(&f, *prime, &dom)?;
            Ok(if json {
                ratfun_to_json(&z).to_string()
            } else {
                format!("Z(T) = {}", z.render())
            })
        }
        Command::Oracle { cmd } => execute_oracle(cmd, json),
    }
}

fn render_prepared(prepared: &[PreparedCell], json: bool) -> String {
    if json {
        let list: Vec<_> = prepared
            .iter()
            .map(|pc| {
                let fns: Vec<_> = pc
                    .functions
                    .iter()
                    .map(|f| {
                        serde_json::json!({
                            "poly": f.poly.to_string(),
                            "h": render_rat(&f.shift),
                            "a": f.power,
                            "unit_class": render_rat(&f.unit_class),
                            "cert_depth": f.cert_depth,
                        })
                    })
                    .collect();
                serde_json::json!({ "cell": cell_to_json(&pc.cell), "functions": fns })
            })
            .collect();
        serde_json::json!({ "cells": list }).to_string()
    } else {
        prepared
            .iter()
            .map(|pc| {
                let mut line = pc.cell.to_string();
                for f in &pc.functions {
                    line.push_str(&format!(
                        "\n    {}: h = {}, a = {}, unit {} (1 + p^{} R)",
                        f.poly,
                        render_rat(&f.shift),
                        f.power,
                        render_rat(&f.unit_class),
                        f.cert_depth
                    ));
                }
                line
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn execute_oracle(cmd: &OracleCmd, json: bool) -> Result<String> {
    match cmd {
        OracleCmd::Classes { prime, n, depth } => {
            check_prime(*prime)?;
            let classes = oracle::oracle_nth_power_classes(*prime, *n, *depth);
            Ok(if json {
                serde_json::json!({ "classes": classes.iter().collect::<Vec<_>>() }).to_string()
            } else {
                classes
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
        }
        OracleCmd::Measure { prime, cell, depth } => {
            check_prime(*prime)?;
            let c = cell_from_json(&read_arg(cell)?, *prime)?;
            let m = oracle::oracle_measure(&c, *depth);
            Ok(if json {
                serde_json::json!({ "measure": render_rat(&m) }).to_string()
            } else {
                render_rat(&m)
            })
        }
        OracleCmd::Integrate {
            prime,
            integrand,
            domain,
            depth,
        } => {
            check_prime(*prime)?;
            let dom = parse_domain(&read_arg(domain)?, *prime)?;
            let (scalar, parts) = parse_integrand_parts(&read_arg(integrand)?)?;
            let p = *prime;
            let value = oracle::oracle_integrate(
                |t| {
                    let mut acc = scalar.clone();
                    for (kind, f, e) in &parts {
                        let v = match f.valuation_at(t, p) {
                            Valuation::Finite(v) => v,
                            Valuation::Infinity => return Rat::zero(),
                        };
                        match kind {
                            IntegrandKind::Abs => acc *= crate::rat::p_pow(p, -v * e),
                            IntegrandKind::V => {
                                acc *= crate::rat::rat_pow(&crate::rat::rat_i64(v), *e)
                            }
                        }
                    }
                    acc
                },
                &dom,
                *depth,
            );
            Ok(if json {
                serde_json::json!({ "integral": render_rat(&value) }).to_string()
            } else {
                render_rat(&value)
            })
        }
        OracleCmd::Partition {
            prime,
            cells,
            formula,
        } => {
            check_prime(*prime)?;
            let list: Vec<serde_json::Value> = serde_json::from_str(&read_arg(cells)?)
                .map_err(|e| Error::syntax(1, format!("invalid cells JSON: {e}")))?;
            let parsed: Result<Vec<Cell>> = list
                .iter()
                .map(|v| cell_from_json(&v.to_string(), *prime))
                .collect();
            let parsed = parsed?;
            let grid = oracle::SampleGrid::default_for(*prime);
            let report = match formula {
                None => oracle::oracle_partition_check(&parsed, &grid),
                Some(text) => {
                    let phi = parse_formula(&read_arg(text)?)?;
                    let p = *prime;
                    oracle::oracle_cover_check(&parsed, &grid, |t| {
                        phi.eval_at_with(t, p, &|x, m| oracle::oracle_is_nth_power(x, m, p))
                    })
                }
            };
            Ok(if json {
                let violations: Vec<_> = report
                    .violations
                    .iter()
                    .map(|(t, c)| serde_json::json!({ "point": render_rat(t), "count": c }))
                    .collect();
                serde_json::json!({
                    "checked": report.checked,
                    "ok": report.ok,
                    "violations": violations,
                })
                .to_string()
            } else if report.ok {
                format!("ok ({} points)", report.checked)
            } else {
                format!(
                    "violations at {} of {} points; first: {} covered {} times",
                    report.violations.len(),
                    report.checked,
                    render_rat(&report.violations[0].0),
                    report.violations[0].1
                )
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i64};

    #[test]
    fn poly_parsing() {
        let p = parse_poly("(t)*(t-1)", 5).unwrap();
        match p {
            ParsedPoly::Split(s) => {
                assert_eq!(s.unit(), &Rat::one());
                assert_eq!(s.factors().len(), 2);
                assert_eq!(s.multiplicity_at(&Rat::zero()), 1);
                assert_eq!(s.multiplicity_at(&rat_i64(1)), 1);
            }
            _ => panic!("expected factored"),
        }
        let p = parse_poly("t^2-6", 5).unwrap();
        match p {
            ParsedPoly::Dense(d) => {
                assert_eq!(d.coeffs(), &[rat_i64(-6), rat_i64(0), rat_i64(1)])
            }
            _ => panic!("expected dense"),
        }
        // negative exponents are rejected
        assert!(matches!(parse_poly("t^-1", 5), Err(Error::Syntax { .. })));
        // rationals and signs
        let p = parse_poly("3/2*(t-1)^2*(t+4)", 5).unwrap();
        match p {
            ParsedPoly::Split(s) => {
                assert_eq!(s.unit(), &rat(3, 2));
                assert_eq!(s.multiplicity_at(&rat_i64(1)), 2);
                assert_eq!(s.multiplicity_at(&rat_i64(-4)), 1);
            }
            _ => panic!("expected factored"),
        }
    }

    #[test]
    fn poly_round_trip() {
        for text in ["(t)*(t-1)", "3/2*(t-1)^2*(t+4)", "t^2", "5"] {
            let s = parse_split_poly(text).unwrap();
            let again = parse_split_poly(&s.to_string()).unwrap();
            assert_eq!(s, again, "{text}");
        }
    }

    #[test]
    fn formula_parsing() {
        let phi = parse_formula("abs(t) < abs(1) & pow(2, t)").unwrap();
        assert!(matches!(phi, QFFormula::And(..)));
        let phi = parse_formula("!pow(2,t)").unwrap();
        assert!(matches!(phi, QFFormula::Not(..)));
        // column-accurate errors
        match parse_formula("abs(t <") {
            Err(Error::Syntax { column, .. }) => assert_eq!(column, 7),
            other => panic!("expected syntax error, got {other:?}"),
        }
        // precedence ! > & > |
        let phi = parse_formula("!t = 0 & pow(2,t) | abs(t) <= abs(1)").unwrap();
        assert!(matches!(phi, QFFormula::Or(..)));
        // round trip
        let again = parse_formula(&phi.to_string()).unwrap();
        assert_eq!(phi, again);
    }

    #[test]
    fn formula_zero_test_and_groups() {
        let phi = parse_formula("(t-1) = 0").unwrap();
        assert!(matches!(phi, QFFormula::EqZero(_)));
        let phi = parse_formula("(pow(2,t) | t = 0) & abs(t) <= abs(1)").unwrap();
        assert!(matches!(phi, QFFormula::And(..)));
    }

    #[test]
    fn cell_json_round_trip() {
        let c = Cell::new(Rat::zero(), None, Some(0), rat_i64(2), 2, 5).unwrap();
        let j = cell_to_json(&c).to_string();
        assert_eq!(j, r#"{"center":"0","hi":0,"lambda":"2","lo":null,"n":2}"#);
        let back = cell_from_json(&j, 5).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn run_zeta_and_index() {
        let out = run_for_test(&["zeta", "--prime", "5", "t"]).unwrap();
        assert_eq!(out, "Z(T) = (4/5)/(1 - T/5)");
        let out = run_for_test(&["index", "--prime", "2", "--n", "2"]).unwrap();
        assert_eq!(out, "8");
    }

    #[test]
    fn run_decompose_canonical_order() {
        let out =
            run_for_test(&["decompose", "--prime", "5", "--format", "json", "!pow(2,t)"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let cells = v["cells"].as_array().unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[0]["lambda"], "0");
        assert_eq!(cells[1]["lambda"], "2");
    }

    #[test]
    fn run_integrate_with_paper_convention() {
        let out =
            run_for_test(&["integrate", "--prime", "5", "abs(t)^-1", "--domain", "M"]).unwrap();
        assert_eq!(out, "NON_INTEGRABLE");
        let out = run_for_test(&[
            "integrate",
            "--prime",
            "5",
            "abs(t)^-1",
            "--domain",
            "M",
            "--paper-convention-ilz",
        ])
        .unwrap();
        assert_eq!(out, "0");
    }

    #[test]
    fn exit_codes() {
        // syntax error: exit 2
        let err = run_for_test(&["decompose", "--prime", "5", "abs(t <"]).unwrap_err();
        assert_eq!(err.0, 2);
        // domain error: exit 1
        let err = run_for_test(&["power", "--prime", "4", "--n", "2", "3"]).unwrap_err();
        assert_eq!(err.0, 1);
    }
}
