//! Turtle subset: prefixes, base, IRIs, prefixed names, blank nodes
//! (labelled and `[ ... ]`), string literals with language tags or
//! datatypes, and bare numeric and boolean literals. Collections are not
//! supported.
//!
//! Output is canonical: fixed prefix header, subjects sorted, statements
//! sorted by predicate then object, blank nodes relabelled from the subject
//! and predicate that first reach them.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use super::{KnowledgeBase, StoreError};
use crate::model::record::{date_from_epoch_day, epoch_day_of};
use crate::model::schema::{self, is_blank, local_name, property_kind, PropertyKind};
use crate::model::{ObjectValue, Taxonomy, Triple};

const PREFIXES: &[(&str, &str)] = &[
    ("cro", schema::CRO),
    ("crisis", schema::CRISIS),
    ("rdf", schema::RDF),
    ("rdfs", schema::RDFS),
    ("xsd", schema::XSD),
];

const XSD_DATE: &str = "http://www.w3.org/2001/XMLSchema#date";
const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
const XSD_NUMERIC: &[&str] = &[
    "http://www.w3.org/2001/XMLSchema#integer",
    "http://www.w3.org/2001/XMLSchema#decimal",
    "http://www.w3.org/2001/XMLSchema#double",
    "http://www.w3.org/2001/XMLSchema#float",
    "http://www.w3.org/2001/XMLSchema#int",
    "http://www.w3.org/2001/XMLSchema#long",
    "http://www.w3.org/2001/XMLSchema#nonNegativeInteger",
];

// ---------------------------------------------------------------- writing

fn sanitize_label(s: &str) -> String {
    let mut out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect();
    if out.is_empty() || out.starts_with('-') {
        out.insert(0, 'b');
    }
    out
}

/// Relabels blank nodes as `<subject local>_<predicate local>` (with a
/// numeric suffix on collision), walking from named subjects in sorted
/// order. Unreachable blank nodes become `orphan<n>`.
pub(crate) fn canonical_blank_labels(triples: &[Triple]) -> HashMap<String, String> {
    let mut by_subject: BTreeMap<&str, Vec<&Triple>> = BTreeMap::new();
    for t in triples {
        by_subject.entry(t.subject.as_str()).or_default().push(t);
    }
    for list in by_subject.values_mut() {
        list.sort();
    }
    let mut labels: HashMap<String, String> = HashMap::new();
    let mut used: std::collections::HashSet<String> = std::collections::HashSet::new();
    let mut assign = |old: &str, base: String, labels: &mut HashMap<String, String>| {
        let mut candidate = base.clone();
        let mut n = 2;
        while used.contains(&candidate) {
            candidate = format!("{base}_{n}");
            n += 1;
        }
        used.insert(candidate.clone());
        labels.insert(old.to_string(), format!("_:{candidate}"));
    };

    let roots: Vec<&str> = by_subject.keys().copied().filter(|s| !is_blank(s)).collect();
    for root in roots {
        let mut queue = vec![root.to_string()];
        while let Some(node) = queue.pop() {
            let prefix = match labels.get(&node) {
                Some(l) => l.trim_start_matches("_:").to_string(),
                None => sanitize_label(local_name(&node)),
            };
            let mut reached = Vec::new();
            for t in by_subject.get(node.as_str()).into_iter().flatten() {
                if let ObjectValue::Resource(o) = &t.object {
                    if is_blank(o) && !labels.contains_key(o) {
                        let base = format!("{prefix}_{}", sanitize_label(local_name(&t.predicate)));
                        assign(o, base, &mut labels);
                        reached.push(o.clone());
                    }
                }
            }
            // depth-first in statement order
            queue.extend(reached.into_iter().rev());
        }
    }
    let mut orphans: Vec<&str> = triples
        .iter()
        .flat_map(|t| {
            let o = match &t.object {
                ObjectValue::Resource(o) => Some(o.as_str()),
                _ => None,
            };
            std::iter::once(t.subject.as_str()).chain(o)
        })
        .filter(|n| is_blank(n) && !labels.contains_key(*n))
        .collect();
    orphans.sort();
    orphans.dedup();
    for (i, o) in orphans.into_iter().enumerate() {
        assign(o, format!("orphan{}", i + 1), &mut labels);
    }
    labels
}

pub(crate) fn relabel(triples: Vec<Triple>, labels: &HashMap<String, String>) -> Vec<Triple> {
    let map = |n: String| labels.get(&n).cloned().unwrap_or(n);
    triples
        .into_iter()
        .map(|t| Triple {
            subject: map(t.subject),
            predicate: t.predicate,
            object: match t.object {
                ObjectValue::Resource(o) => ObjectValue::Resource(map(o)),
                other => other,
            },
        })
        .collect()
}

fn is_pn_local(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    (first.is_ascii_alphanumeric() || first == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn iri_term(iri: &str) -> String {
    if iri == schema::RDF_TYPE {
        return "a".to_string();
    }
    for (prefix, ns) in PREFIXES {
        if let Some(local) = iri.strip_prefix(ns) {
            if is_pn_local(local) {
                return format!("{prefix}:{local}");
            }
        }
    }
    format!("<{}>", escape_iri(iri))
}

fn node_term(node: &str) -> String {
    if is_blank(node) {
        node.to_string()
    } else {
        iri_term(node)
    }
}

fn escape_iri(iri: &str) -> String {
    let mut out = String::new();
    for c in iri.chars() {
        match c {
            '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' | '\0'..=' ' => {
                out.push_str(&format!("\\u{:04X}", c as u32))
            }
            c => out.push(c),
        }
    }
    out
}

fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn object_term(t: &Triple, taxonomy: &Taxonomy) -> String {
    let kind = property_kind(&t.predicate);
    match &t.object {
        ObjectValue::Resource(o) => node_term(o),
        ObjectValue::Qualitative(label) if kind == Some(PropertyKind::Type) => {
            match taxonomy.by_label(label) {
                Some(n) => iri_term(&schema::class_iri(&n.id)),
                None => escape_string(label),
            }
        }
        ObjectValue::Qualitative(s) => escape_string(s),
        ObjectValue::Quantitative(v) if kind == Some(PropertyKind::Date) && v.len() == 1 => {
            match date_from_epoch_day(v[0] as i64) {
                Some(d) => format!("\"{}\"^^xsd:date", d.format("%Y-%m-%d")),
                None => v[0].to_string(),
            }
        }
        ObjectValue::Quantitative(v) if v.len() == 1 => v[0].to_string(),
        ObjectValue::Quantitative(v) => {
            let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("\"{}\"^^cro:vector", parts.join(" "))
        }
    }
}

/// Writes triples as canonical Turtle. Output depends only on the set of
/// triples, never on their input order.
pub fn write_turtle<'a, W: Write>(
    triples: impl IntoIterator<Item = &'a Triple>,
    taxonomy: &Taxonomy,
    mut out: W,
) -> Result<(), StoreError> {
    let owned: Vec<Triple> = triples.into_iter().cloned().collect();
    let labels = canonical_blank_labels(&owned);
    let mut owned = relabel(owned, &labels);
    owned.sort();
    owned.dedup();

    for (prefix, ns) in PREFIXES {
        writeln!(out, "@prefix {prefix}: <{ns}> .")?;
    }
    let mut i = 0;
    while i < owned.len() {
        let subject = &owned[i].subject;
        let end = owned[i..]
            .iter()
            .position(|t| &t.subject != subject)
            .map_or(owned.len(), |p| i + p);
        writeln!(out)?;
        writeln!(out, "{}", node_term(subject))?;
        for (k, t) in owned[i..end].iter().enumerate() {
            let sep = if i + k + 1 == end { " ." } else { " ;" };
            writeln!(
                out,
                "    {} {}{sep}",
                iri_term(&t.predicate),
                object_term(t, taxonomy)
            )?;
        }
        i = end;
    }
    Ok(())
}

impl KnowledgeBase {
    /// Canonical Turtle of the whole store.
    pub fn write_turtle<W: Write>(&self, out: W) -> Result<(), StoreError> {
        write_turtle(self.iter(), self.taxonomy(), out)
    }

    pub fn to_turtle(&self) -> String {
        let mut buf = Vec::new();
        self.write_turtle(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("Turtle output is UTF-8")
    }
}

// ---------------------------------------------------------------- reading

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Blank(String),
    Str(String),
    LangTag(String),
    Carets,
    Number(String),
    Bool(bool),
    A,
    PrefixKw,
    BaseKw,
    SparqlPrefix,
    SparqlBase,
    Dot,
    Semi,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> StoreError {
    StoreError::TurtleSyntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '%' | '\u{b7}')
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn err(&self, message: impl Into<String>) -> StoreError {
        syntax(self.line, self.column, message)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, StoreError> {
        let mut v = 0u32;
        for _ in 0..digits {
            let c = self.bump().ok_or_else(|| self.err("truncated \\u escape"))?;
            v = v * 16 + c.to_digit(16).ok_or_else(|| self.err("bad hex digit in escape"))?;
        }
        char::from_u32(v).ok_or_else(|| self.err("escape is not a character"))
    }

    fn iri(&mut self) -> Result<String, StoreError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('u') => s.push(self.hex_escape(4)?),
                    Some('U') => s.push(self.hex_escape(8)?),
                    _ => return Err(self.err("bad escape in IRI")),
                },
                Some(c) if c == '\n' || c == ' ' || c == '<' => {
                    return Err(self.err("invalid character in IRI"))
                }
                Some(c) => s.push(c),
                None => return Err(self.err("unterminated IRI")),
            }
        }
    }

    fn string(&mut self, quote: char) -> Result<String, StoreError> {
        let long = {
            let mut probe = self.chars.clone();
            probe.next() == Some(quote) && probe.next() == Some(quote)
        };
        if long {
            self.bump();
            self.bump();
        }
        let mut s = String::new();
        loop {
            let c = self.bump().ok_or_else(|| self.err("unterminated string"))?;
            match c {
                '\\' => {
                    let e = self.bump().ok_or_else(|| self.err("unterminated escape"))?;
                    match e {
                        't' => s.push('\t'),
                        'b' => s.push('\u{8}'),
                        'n' => s.push('\n'),
                        'r' => s.push('\r'),
                        'f' => s.push('\u{c}'),
                        '"' => s.push('"'),
                        '\'' => s.push('\''),
                        '\\' => s.push('\\'),
                        'u' => s.push(self.hex_escape(4)?),
                        'U' => s.push(self.hex_escape(8)?),
                        _ => return Err(self.err(format!("unknown escape \\{e}"))),
                    }
                }
                c if c == quote && !long => return Ok(s),
                c if c == quote => {
                    let mut probe = self.chars.clone();
                    if probe.next() == Some(quote) && probe.next() == Some(quote) {
                        self.bump();
                        self.bump();
                        return Ok(s);
                    }
                    s.push(c);
                }
                '\n' | '\r' if !long => return Err(self.err("newline in string")),
                c => s.push(c),
            }
        }
    }

    fn name(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if is_name_char(c) {
                s.push(c);
                self.bump();
            } else if c == '\\' {
                // local name escapes such as \- or \.
                self.bump();
                if let Some(e) = self.bump() {
                    s.push(e);
                }
            } else {
                break;
            }
        }
        s
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, StoreError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, column) = (self.line, self.column);
            let Some(c) = self.peek() else {
                return Ok(out);
            };
            let tok = match c {
                '<' => {
                    self.bump();
                    Tok::Iri(self.iri()?)
                }
                '"' | '\'' => {
                    self.bump();
                    Tok::Str(self.string(c)?)
                }
                '@' => {
                    self.bump();
                    let word = self.name();
                    match word.as_str() {
                        "prefix" => Tok::PrefixKw,
                        "base" => Tok::BaseKw,
                        "" => return Err(syntax(line, column, "stray '@'")),
                        tag => Tok::LangTag(tag.to_string()),
                    }
                }
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(syntax(line, column, "expected '^^'"));
                    }
                    Tok::Carets
                }
                '.' => {
                    let mut probe = self.chars.clone();
                    probe.next();
                    if probe.next().is_some_and(|d| d.is_ascii_digit()) {
                        Tok::Number(self.number())
                    } else {
                        self.bump();
                        Tok::Dot
                    }
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '[' => {
                    self.bump();
                    Tok::LBracket
                }
                ']' => {
                    self.bump();
                    Tok::RBracket
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                '_' if self.chars.clone().nth(1) == Some(':') => {
                    self.bump();
                    self.bump();
                    let label = self.trimmed_name();
                    if label.is_empty() {
                        return Err(syntax(line, column, "empty blank node label"));
                    }
                    Tok::Blank(label)
                }
                c if c.is_ascii_digit() || c == '+' || c == '-' => Tok::Number(self.number()),
                c if is_name_char(c) => {
                    let word = self.trimmed_name();
                    match word.split_once(':') {
                        Some((p, l)) => Tok::PName(p.to_string(), l.to_string()),
                        None => match word.as_str() {
                            "a" => Tok::A,
                            "true" => Tok::Bool(true),
                            "false" => Tok::Bool(false),
                            w if w.eq_ignore_ascii_case("prefix") => Tok::SparqlPrefix,
                            w if w.eq_ignore_ascii_case("base") => Tok::SparqlBase,
                            w => return Err(syntax(line, column, format!("unexpected word {w:?}"))),
                        },
                    }
                }
                c => return Err(syntax(line, column, format!("unexpected character {c:?}"))),
            };
            out.push(Spanned { tok, line, column });
        }
    }

    /// A name without trailing dots, which terminate statements.
    fn trimmed_name(&mut self) -> String {
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if c == '.' {
                let mut probe = self.chars.clone();
                probe.next();
                if !probe.next().is_some_and(is_name_char) {
                    break;
                }
            }
            if is_name_char(c) {
                word.push(c);
                self.bump();
            } else if c == '\\' {
                self.bump();
                if let Some(e) = self.bump() {
                    word.push(e);
                }
            } else {
                break;
            }
        }
        word
    }

    fn number(&mut self) -> String {
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            s.push(c);
            self.bump();
        }
        let mut seen_exp = false;
        while let Some(c) = self.peek() {
            let take = c.is_ascii_digit()
                || (c == '.' && {
                    let mut probe = self.chars.clone();
                    probe.next();
                    probe.next().is_some_and(|d| d.is_ascii_digit())
                })
                || ((c == 'e' || c == 'E') && !seen_exp)
                || ((c == '+' || c == '-') && s.ends_with(['e', 'E']));
            if !take {
                break;
            }
            if c == 'e' || c == 'E' {
                seen_exp = true;
            }
            s.push(c);
            self.bump();
        }
        s
    }
}

#[derive(Debug, Clone)]
enum Term {
    Node(String),
    Literal {
        lexical: String,
        datatype: Option<String>,
        numeric: bool,
    },
}

struct RawTriple {
    subject: String,
    predicate: String,
    object: Term,
    line: usize,
    column: usize,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: HashMap<String, String>,
    base: Option<String>,
    anon: usize,
    out: Vec<RawTriple>,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.column))
            .unwrap_or(self.eof)
    }

    fn err(&self, message: impl Into<String>) -> StoreError {
        let (l, c) = self.here();
        syntax(l, c, message)
    }

    fn next(&mut self) -> Result<Tok, StoreError> {
        let t = self
            .toks
            .get(self.pos)
            .map(|s| s.tok.clone())
            .ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), StoreError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn resolve(&self, iri: String) -> String {
        match &self.base {
            Some(base) if !iri.contains(':') => format!("{base}{iri}"),
            _ => iri,
        }
    }

    fn pname(&self, prefix: &str, local: &str) -> Result<String, StoreError> {
        let ns = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| self.err(format!("undeclared prefix {prefix:?}")))?;
        Ok(format!("{ns}{local}"))
    }

    fn fresh_blank(&mut self) -> String {
        self.anon += 1;
        // '#' cannot occur in parsed labels, so these never collide
        format!("_:#{}", self.anon)
    }

    fn document(&mut self) -> Result<(), StoreError> {
        while let Some(tok) = self.peek().cloned() {
            match tok {
                Tok::PrefixKw | Tok::SparqlPrefix => {
                    self.pos += 1;
                    let (prefix, local) = match self.next()? {
                        Tok::PName(p, l) => (p, l),
                        _ => {
                            self.pos -= 1;
                            return Err(self.err("expected prefix name like 'ex:'"));
                        }
                    };
                    if !local.is_empty() {
                        return Err(self.err("prefix name must end with ':'"));
                    }
                    let iri = match self.next()? {
                        Tok::Iri(i) => self.resolve(i),
                        _ => {
                            self.pos -= 1;
                            return Err(self.err("expected IRI after prefix name"));
                        }
                    };
                    self.prefixes.insert(prefix, iri);
                    if tok == Tok::PrefixKw {
                        self.expect(Tok::Dot, "'.' after @prefix")?;
                    }
                }
                Tok::BaseKw | Tok::SparqlBase => {
                    self.pos += 1;
                    match self.next()? {
                        Tok::Iri(i) => self.base = Some(i),
                        _ => {
                            self.pos -= 1;
                            return Err(self.err("expected IRI after base"));
                        }
                    }
                    if tok == Tok::BaseKw {
                        self.expect(Tok::Dot, "'.' after @base")?;
                    }
                }
                _ => {
                    self.triples()?;
                    self.expect(Tok::Dot, "'.' at end of statement")?;
                }
            }
        }
        Ok(())
    }

    fn triples(&mut self) -> Result<(), StoreError> {
        if self.peek() == Some(&Tok::LBracket) {
            let subject = self.blank_property_list()?;
            if self.peek() != Some(&Tok::Dot) {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = match self.next()? {
            Tok::Iri(i) => self.resolve(i),
            Tok::PName(p, l) => self.pname(&p, &l)?,
            Tok::Blank(b) => format!("_:{b}"),
            Tok::LParen => {
                self.pos -= 1;
                return Err(self.err("collections are not supported"));
            }
            _ => {
                self.pos -= 1;
                return Err(self.err("expected subject"));
            }
        };
        self.predicate_object_list(&subject)
    }

    fn blank_property_list(&mut self) -> Result<String, StoreError> {
        self.expect(Tok::LBracket, "'['")?;
        let node = self.fresh_blank();
        if self.peek() != Some(&Tok::RBracket) {
            self.predicate_object_list(&node)?;
        }
        self.expect(Tok::RBracket, "']'")?;
        Ok(node)
    }

    fn predicate_object_list(&mut self, subject: &str) -> Result<(), StoreError> {
        loop {
            let predicate = match self.next()? {
                Tok::A => schema::RDF_TYPE.to_string(),
                Tok::Iri(i) => self.resolve(i),
                Tok::PName(p, l) => self.pname(&p, &l)?,
                _ => {
                    self.pos -= 1;
                    return Err(self.err("expected predicate"));
                }
            };
            loop {
                let (line, column) = self.here();
                let object = self.object()?;
                self.out.push(RawTriple {
                    subject: subject.to_string(),
                    predicate: predicate.clone(),
                    object,
                    line,
                    column,
                });
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.peek() != Some(&Tok::Semi) {
                return Ok(());
            }
            while self.peek() == Some(&Tok::Semi) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(Tok::Dot) | Some(Tok::RBracket) | None) {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Term, StoreError> {
        if self.peek() == Some(&Tok::LBracket) {
            return Ok(Term::Node(self.blank_property_list()?));
        }
        match self.next()? {
            Tok::Iri(i) => Ok(Term::Node(self.resolve(i))),
            Tok::PName(p, l) => Ok(Term::Node(self.pname(&p, &l)?)),
            Tok::Blank(b) => Ok(Term::Node(format!("_:{b}"))),
            Tok::Number(n) => Ok(Term::Literal {
                lexical: n,
                datatype: None,
                numeric: true,
            }),
            Tok::Bool(b) => Ok(Term::Literal {
                lexical: b.to_string(),
                datatype: Some(format!("{}boolean", schema::XSD)),
                numeric: false,
            }),
            Tok::Str(s) => {
                let datatype = match self.peek() {
                    Some(Tok::LangTag(_)) => {
                        self.pos += 1;
                        Some(RDF_LANG_STRING.to_string())
                    }
                    Some(Tok::Carets) => {
                        self.pos += 1;
                        Some(match self.next()? {
                            Tok::Iri(i) => self.resolve(i),
                            Tok::PName(p, l) => self.pname(&p, &l)?,
                            _ => {
                                self.pos -= 1;
                                return Err(self.err("expected datatype IRI"));
                            }
                        })
                    }
                    _ => None,
                };
                Ok(Term::Literal {
                    lexical: s,
                    datatype,
                    numeric: false,
                })
            }
            Tok::LParen => {
                self.pos -= 1;
                Err(self.err("collections are not supported"))
            }
            _ => {
                self.pos -= 1;
                Err(self.err("expected object"))
            }
        }
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Maps a parsed object onto the model according to the predicate's kind.
fn to_object(raw: &RawTriple, kind: PropertyKind, taxonomy: &Taxonomy) -> Result<ObjectValue, String> {
    match (&raw.object, kind) {
        (Term::Node(iri), PropertyKind::Type) => schema::class_id_of(iri)
            .and_then(|id| taxonomy.node(id))
            .map(|n| ObjectValue::Qualitative(n.label.clone()))
            .ok_or_else(|| format!("type <{iri}> is not a taxonomy class")),
        (Term::Node(n), PropertyKind::SubClassOf | PropertyKind::Link) => Ok(ObjectValue::Resource(n.clone())),
        (
            Term::Literal {
                lexical,
                datatype,
                numeric: false,
            },
            PropertyKind::Text,
        ) if datatype.is_none()
            || datatype.as_deref() == Some(XSD_STRING)
            || datatype.as_deref() == Some(RDF_LANG_STRING) =>
        {
            Ok(ObjectValue::Qualitative(lexical.clone()))
        }
        (Term::Literal { lexical, datatype, numeric }, PropertyKind::Quantity(dim)) => {
            let values: Option<Vec<f64>> = match datatype.as_deref() {
                _ if *numeric => parse_number(lexical).map(|v| vec![v]),
                Some(schema::CRO_VECTOR) => lexical.split_whitespace().map(parse_number).collect(),
                Some(dt) if XSD_NUMERIC.contains(&dt) => parse_number(lexical).map(|v| vec![v]),
                _ => None,
            };
            match values {
                Some(v) if v.len() == dim => Ok(ObjectValue::Quantitative(v)),
                Some(v) => Err(format!("expected {dim} components, got {}", v.len())),
                None => Err(format!("{lexical:?} is not a numeric value")),
            }
        }
        (Term::Literal { lexical, numeric: true, .. }, PropertyKind::Date) => parse_number(lexical)
            .filter(|v| v.fract() == 0.0)
            .map(|v| ObjectValue::Quantitative(vec![v]))
            .ok_or_else(|| format!("{lexical:?} is not a whole epoch day")),
        (Term::Literal { lexical, datatype, .. }, PropertyKind::Date)
            if datatype.as_deref() == Some(XSD_DATE) =>
        {
            chrono::NaiveDate::parse_from_str(lexical, "%Y-%m-%d")
                .map(|d| ObjectValue::Quantitative(vec![epoch_day_of(d) as f64]))
                .map_err(|_| format!("{lexical:?} is not an xsd:date"))
        }
        _ => Err(format!("object does not fit predicate ({kind:?})")),
    }
}

/// Parses Turtle into a knowledge base. Blank nodes receive canonical
/// labels, so serializing the result reproduces it exactly.
pub fn parse_turtle(source: &str, taxonomy: Taxonomy) -> Result<KnowledgeBase, StoreError> {
    let toks = Lexer::new(source).tokens()?;
    let eof = {
        let lines = source.split('\n').count();
        let last = source.rsplit('\n').next().unwrap_or("");
        (lines, last.chars().count() + 1)
    };
    let mut parser = Parser {
        toks,
        pos: 0,
        prefixes: HashMap::new(),
        base: None,
        anon: 0,
        out: Vec::new(),
        eof,
    };
    parser.document()?;

    let mut triples = Vec::with_capacity(parser.out.len());
    for raw in &parser.out {
        let kind = property_kind(&raw.predicate).ok_or_else(|| {
            StoreError::SchemaViolation(format!(
                "line {}: undeclared predicate <{}>",
                raw.line, raw.predicate
            ))
        })?;
        let object = to_object(raw, kind, &taxonomy).map_err(|m| {
            StoreError::SchemaViolation(format!("line {}, column {}: {m}", raw.line, raw.column))
        })?;
        triples.push(Triple::new(raw.subject.clone(), raw.predicate.clone(), object));
    }
    let labels = canonical_blank_labels(&triples);
    let triples = relabel(triples, &labels);

    let mut kb = KnowledgeBase::new(taxonomy);
    for t in triples {
        kb.insert(t)?;
    }
    Ok(kb)
}
