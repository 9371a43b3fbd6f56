//! The polynomial nonlinearity DSL.
//!
//! Grammar (whitespace free between any tokens):
//!
//! ```text
//! expr   := ['-'] term (('+'|'-') term)*
//! term   := [coeff ['*']] factor ('*' factor)*
//! coeff  := real | '(' real ',' real ')'          complex literal (re, im)
//! factor := '|lap(u)|^2'                          sugar: lap(u)*conj(lap(u))
//!         | 'conj(' inner ')'
//!         | inner
//! inner  := 'u' | 'lap(u)' | 'd(' idx ')u' | 'd(' idx ',' idx ')u'
//! idx    := 1-based axis digit
//! ```
//!
//! Each factor is one of u, a first or second partial derivative of u, the
//! Laplacian lap(u) (kept atomic so expressions stay dimension-agnostic), or
//! a conjugate of those. Terms must have total degree >= 2: constant and
//! linear terms are rejected at parse time. Axis indices are validated
//! against the grid dimension at evaluation time, not parse time.
//!
//! Parsing is canonical: factors are sorted within each term, terms are
//! sorted by (degree, factor order) and duplicates merged by summing
//! coefficients (a merged-to-zero or explicit zero coefficient keeps its
//! term, so "0*u*u" stays a valid degree-2 polynomial describing the linear
//! problem).
//!
//! Evaluation computes each needed derivative field spectrally, truncates
//! every input to the modes |m| <= N/(h+1) per axis (the 2/3 rule
//! generalized to degree h), multiplies pointwise in physical space, and
//! truncates the result to the same band so no aliased energy survives.

use crate::field::Field;
use crate::{FonlsError, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum FactorKind {
    /// Partial derivative d^alpha u with |alpha| <= 2; the empty list is u
    /// itself. Axis entries are 1-based and sorted.
    Deriv(Vec<u8>),
    /// The Laplacian sum_j d(j,j)u, kept atomic (dimension-agnostic).
    Lap,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Factor {
    pub kind: FactorKind,
    pub conjugated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Term {
    pub coeff_re: f64,
    pub coeff_im: f64,
    pub factors: Vec<Factor>,
}

impl Term {
    pub fn coeff(&self) -> Complex64 {
        Complex64::new(self.coeff_re, self.coeff_im)
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PolynomialNonlinearity {
    terms: Vec<Term>,
    /// Minimum total degree over terms (>= 2).
    l: usize,
    /// Maximum total degree over terms.
    h: usize,
    source: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn err(pos: usize, msg: impl Into<String>) -> FonlsError {
    FonlsError::Parse {
        pos,
        msg: msg.into(),
    }
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Parser<'a> {
        Parser {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8, what: &str) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(err(self.pos, format!("expected '{}' {what}", b as char)))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.src[self.pos..].starts_with(kw.as_bytes()) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn parse_real(&mut self) -> Result<f64> {
        let start = self.pos;
        if self.peek() == Some(b'-') || self.peek() == Some(b'+') {
            self.pos += 1;
        }
        let mut saw_digit = false;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
            saw_digit = true;
        }
        if self.eat(b'.') {
            while self.peek().is_some_and(|b| b.is_ascii_digit()) {
                self.pos += 1;
                saw_digit = true;
            }
        }
        if !saw_digit {
            return Err(err(start, "expected a numeric literal"));
        }
        if self.peek() == Some(b'e') || self.peek() == Some(b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.peek() == Some(b'-') || self.peek() == Some(b'+') {
                self.pos += 1;
            }
            if self.peek().is_some_and(|b| b.is_ascii_digit()) {
                while self.peek().is_some_and(|b| b.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // 'e' belonged to something else
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map_err(|e| err(start, format!("bad numeric literal '{text}': {e}")))
    }

    /// Numeric or complex-pair coefficient, if one starts here.
    fn try_parse_coeff(&mut self) -> Result<Option<Complex64>> {
        match self.peek() {
            Some(b) if b.is_ascii_digit() || b == b'.' => {
                let re = self.parse_real()?;
                Ok(Some(Complex64::new(re, 0.0)))
            }
            Some(b'(') => {
                // disambiguate "(re,im)" from a parenthesized future construct:
                // the grammar has no other '('-led token at term start
                let mark = self.pos;
                self.pos += 1;
                self.skip_ws();
                let re = self.parse_real().map_err(|e| {
                    self.pos = mark;
                    e
                })?;
                self.skip_ws();
                self.expect(b',', "between the real and imaginary parts")?;
                self.skip_ws();
                let im = self.parse_real()?;
                self.skip_ws();
                self.expect(b')', "to close the complex literal")?;
                Ok(Some(Complex64::new(re, im)))
            }
            _ => Ok(None),
        }
    }

    fn parse_axis_digit(&mut self) -> Result<u8> {
        match self.peek() {
            Some(b) if (b'1'..=b'9').contains(&b) => {
                self.pos += 1;
                Ok(b - b'0')
            }
            _ => Err(err(self.pos, "expected a 1-based axis index digit")),
        }
    }

    /// `u`, `lap(u)` or `d(...)u`.
    fn parse_inner(&mut self) -> Result<FactorKind> {
        if self.eat_keyword("lap") {
            self.skip_ws();
            self.expect(b'(', "after 'lap'")?;
            self.skip_ws();
            self.expect(b'u', "inside 'lap(...)'")?;
            self.skip_ws();
            self.expect(b')', "to close 'lap(u)'")?;
            return Ok(FactorKind::Lap);
        }
        if self.eat_keyword("d") {
            self.skip_ws();
            self.expect(b'(', "after 'd'")?;
            self.skip_ws();
            let mut axes = vec![self.parse_axis_digit()?];
            self.skip_ws();
            if self.eat(b',') {
                self.skip_ws();
                axes.push(self.parse_axis_digit()?);
                self.skip_ws();
            }
            self.expect(b')', "to close the derivative index list")?;
            self.skip_ws();
            self.expect(b'u', "after 'd(...)'")?;
            axes.sort_unstable();
            return Ok(FactorKind::Deriv(axes));
        }
        if self.eat(b'u') {
            return Ok(FactorKind::Deriv(Vec::new()));
        }
        Err(err(
            self.pos,
            "expected a factor: 'u', 'conj(...)', 'd(j)u', 'd(j,k)u', 'lap(u)' or '|lap(u)|^2'",
        ))
    }

    /// One factor; `|lap(u)|^2` expands to two factors.
    fn parse_factor(&mut self, out: &mut Vec<Factor>) -> Result<()> {
        if self.eat(b'|') {
            self.skip_ws();
            if !self.eat_keyword("lap") {
                return Err(err(self.pos, "the |...|^2 sugar only supports |lap(u)|^2"));
            }
            self.skip_ws();
            self.expect(b'(', "after 'lap'")?;
            self.skip_ws();
            self.expect(b'u', "inside 'lap(...)'")?;
            self.skip_ws();
            self.expect(b')', "to close 'lap(u)'")?;
            self.skip_ws();
            self.expect(b'|', "to close the modulus")?;
            self.skip_ws();
            self.expect(b'^', "in the |lap(u)|^2 sugar")?;
            self.skip_ws();
            self.expect(b'2', "the modulus sugar must be squared")?;
            out.push(Factor {
                kind: FactorKind::Lap,
                conjugated: false,
            });
            out.push(Factor {
                kind: FactorKind::Lap,
                conjugated: true,
            });
            return Ok(());
        }
        if self.eat_keyword("conj") {
            self.skip_ws();
            self.expect(b'(', "after 'conj'")?;
            self.skip_ws();
            let kind = self.parse_inner()?;
            self.skip_ws();
            self.expect(b')', "to close 'conj(...)'")?;
            out.push(Factor {
                kind,
                conjugated: true,
            });
            return Ok(());
        }
        let kind = self.parse_inner()?;
        out.push(Factor {
            kind,
            conjugated: false,
        });
        Ok(())
    }

    /// One term: optional coefficient then >= 1 factors.
    fn parse_term(&mut self, sign: f64) -> Result<Term> {
        let term_start = self.pos;
        let coeff = self.try_parse_coeff()?.unwrap_or(Complex64::new(1.0, 0.0));
        self.skip_ws();
        let had_star = self.eat(b'*');
        self.skip_ws();
        let mut factors = Vec::new();
        let at_factor = matches!(
            self.peek(),
            Some(b'u') | Some(b'c') | Some(b'd') | Some(b'l') | Some(b'|')
        );
        if at_factor {
            self.parse_factor(&mut factors)?;
            self.skip_ws();
            while self.eat(b'*') {
                self.skip_ws();
                self.parse_factor(&mut factors)?;
                self.skip_ws();
            }
        } else if had_star {
            return Err(err(self.pos, "expected a factor after '*'"));
        }
        if factors.len() < 2 {
            return Err(err(
                term_start,
                format!(
                    "term of degree {} is not allowed: the polynomial must have \
                     total degree >= 2 in every term (no constant or linear terms)",
                    factors.len()
                ),
            ));
        }
        factors.sort();
        let c = coeff * sign;
        Ok(Term {
            coeff_re: c.re,
            coeff_im: c.im,
            factors,
        })
    }

    fn parse_expr(&mut self) -> Result<Vec<Term>> {
        let mut terms = Vec::new();
        self.skip_ws();
        let mut sign = if self.eat(b'-') {
            -1.0
        } else {
            self.eat(b'+');
            1.0
        };
        loop {
            self.skip_ws();
            terms.push(self.parse_term(sign)?);
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1.0;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1.0;
                }
                Some(c) => {
                    return Err(err(
                        self.pos,
                        format!("unexpected character '{}' (expected '+', '-' or end)", c as char),
                    ))
                }
            }
        }
        Ok(terms)
    }
}

impl PolynomialNonlinearity {
    /// Parse a nonlinearity expression into canonical form.
    pub fn parse(source: &str) -> Result<PolynomialNonlinearity> {
        let mut p = Parser::new(source);
        let raw = p.parse_expr()?;
        if raw.is_empty() {
            return Err(err(0, "empty nonlinearity"));
        }
        // merge equal factor multisets; keep zero-coefficient terms so the
        // degree bookkeeping (and the "0*u*u" linear-problem idiom) survives
        let mut merged: BTreeMap<Vec<Factor>, Complex64> = BTreeMap::new();
        for t in raw {
            *merged
                .entry(t.factors.clone())
                .or_insert(Complex64::new(0.0, 0.0)) += t.coeff();
        }
        let mut terms: Vec<Term> = merged
            .into_iter()
            .map(|(factors, c)| Term {
                coeff_re: c.re,
                coeff_im: c.im,
                factors,
            })
            .collect();
        terms.sort_by(|a, b| {
            a.degree()
                .cmp(&b.degree())
                .then_with(|| a.factors.cmp(&b.factors))
        });
        let l = terms.iter().map(Term::degree).min().unwrap();
        let h = terms.iter().map(Term::degree).max().unwrap();
        debug_assert!(l >= 2, "parse_term enforces degree >= 2");
        Ok(PolynomialNonlinearity {
            terms,
            l,
            h,
            source: source.to_string(),
        })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Minimum total degree l >= 2.
    pub fn degree_min(&self) -> usize {
        self.l
    }

    /// Maximum total degree h (the dealiasing degree).
    pub fn degree_max(&self) -> usize {
        self.h
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Canonical JSON dump of the AST (for golden tests).
    pub fn ast_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("AST serializes")
    }

    /// Largest kept mode per axis: |m| <= floor(N/(h+1)).
    pub fn dealias_cutoff(&self, points: usize) -> i64 {
        (points / (self.h + 1)) as i64
    }

    /// Evaluate P on a field. Derivatives are spectral; inputs and output
    /// are truncated to the dealias band.
    pub fn evaluate(&self, u: &Field) -> Result<Field> {
        let grid = u.grid().clone();
        let dim = grid.dim();
        for t in &self.terms {
            for f in &t.factors {
                if let FactorKind::Deriv(axes) = &f.kind {
                    for &a in axes {
                        if a as usize > dim {
                            return Err(FonlsError::AxisOutOfRange {
                                axis: a as usize,
                                dim,
                            });
                        }
                    }
                }
            }
        }

        let n_total = grid.total_points();
        let cutoffs: Vec<i64> = (0..dim).map(|a| self.dealias_cutoff(grid.points(a))).collect();
        let in_band = |flat: usize| -> bool {
            let idx = grid.axis_indices(flat);
            (0..dim).all(|a| grid.mode(a, idx[a]).abs() <= cutoffs[a])
        };

        // dealiased base spectrum
        let mut base = u.spectrum();
        for flat in 0..n_total {
            if !in_band(flat) {
                base[flat] = Complex64::default();
            }
        }

        // one spectral derivative field per distinct factor kind that is
        // numerically needed (zero-coefficient terms are bookkeeping only)
        let mut needed: Vec<FactorKind> = Vec::new();
        for t in &self.terms {
            if t.coeff() == Complex64::new(0.0, 0.0) {
                continue;
            }
            for f in &t.factors {
                if !needed.contains(&f.kind) {
                    needed.push(f.kind.clone());
                }
            }
        }
        needed.sort();

        let mut deriv_fields: BTreeMap<FactorKind, Vec<Complex64>> = BTreeMap::new();
        for kind in needed {
            let mut spec = base.clone();
            match &kind {
                FactorKind::Deriv(axes) => {
                    for (flat, v) in spec.iter_mut().enumerate() {
                        let idx = grid.axis_indices(flat);
                        let mut m = Complex64::new(1.0, 0.0);
                        for &a in axes {
                            m *= Complex64::new(0.0, grid.freq(a as usize - 1, idx[a as usize - 1]));
                        }
                        *v *= m;
                    }
                }
                FactorKind::Lap => {
                    for (flat, v) in spec.iter_mut().enumerate() {
                        *v *= -grid.freq_norm2(flat);
                    }
                }
            }
            let f = Field::from_spectrum(grid.clone(), spec)?;
            deriv_fields.insert(kind, f.samples().to_vec());
        }

        let mut acc = vec![Complex64::default(); n_total];
        for t in &self.terms {
            let c = t.coeff();
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut prod = vec![c; n_total];
            for f in &t.factors {
                let vals = &deriv_fields[&f.kind];
                if f.conjugated {
                    for (p, v) in prod.iter_mut().zip(vals) {
                        *p *= v.conj();
                    }
                } else {
                    for (p, v) in prod.iter_mut().zip(vals) {
                        *p *= v;
                    }
                }
            }
            for (a, p) in acc.iter_mut().zip(&prod) {
                *a += p;
            }
        }

        // strip aliased junk from the product
        let out = Field::from_samples(grid.clone(), acc)?;
        let mut spec = out.spectrum();
        for flat in 0..n_total {
            if !in_band(flat) {
                spec[flat] = Complex64::default();
            }
        }
        Field::from_spectrum(grid, spec)
    }

    /// Convenience: the Duhamel source -i P(u) pushed forward by S(dt), as
    /// spectra (used by the solver's incremental quadrature).
    pub fn source_spectrum(&self, u: &Field) -> Result<Vec<Complex64>> {
        let p = self.evaluate(u)?;
        let mut s = p.spectrum();
        for v in &mut s {
            *v *= Complex64::new(0.0, -1.0);
        }
        Ok(s)
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = match &self.kind {
            FactorKind::Lap => "lap(u)".to_string(),
            FactorKind::Deriv(axes) if axes.is_empty() => "u".to_string(),
            FactorKind::Deriv(axes) => {
                let idx: Vec<String> = axes.iter().map(|a| a.to_string()).collect();
                format!("d({})u", idx.join(","))
            }
        };
        if self.conjugated {
            write!(w, "conj({inner})")
        } else {
            write!(w, "{inner}")
        }
    }
}

impl fmt::Display for PolynomialNonlinearity {
    /// Canonical re-parseable form.
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(w, " + ")?;
            }
            write!(w, "({},{})", t.coeff_re, t.coeff_im)?;
            for f in &t.factors {
                write!(w, "*{f}")?;
            }
        }
        Ok(())
    }
}
