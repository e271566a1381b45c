//! Method boundary and body extraction from Java source, without a grammar.
//!
//! The extractor tokenizes the source (masking comments and literals), then
//! tracks brace nesting to find `name(params) [throws ...] {` headers in
//! member position. A method is captured when no enclosing brace is another
//! method body, so methods of nested and anonymous classes at member level
//! are included, while anonymous or local classes inside a method body stay
//! part of that method's body.
//!
//! Bodies are normalized to the token stream joined with single spaces:
//! comments vanish, string literals keep their exact text, and any amount of
//! inter-token whitespace compares equal. This is the representation the
//! change classifier relies on.

pub mod lexer;

use crate::error::{Error, Result};
use lexer::{tokenize, Token, TokenKind};

/// One extracted method or constructor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodRecord {
    pub name: String,
    pub param_arity: usize,
    /// Parameter types as written, generics erased to the raw outer name,
    /// array brackets normalized to a `[]` suffix (e.g. `int[]`, `Map.Entry`,
    /// `String...`).
    pub param_types: Vec<String>,
    /// 1-based lines of the body's opening and closing braces.
    pub body_span: (usize, usize),
    /// Canonical token string of the body, braces included.
    pub normalized_body: String,
    pub is_constructor: bool,
    /// Simple names of annotations attached to the declaration (`Test` for
    /// both `@Test` and `@org.junit.Test`).
    pub annotations: Vec<String>,
}

impl MethodRecord {
    /// Matching key used by the change classifier.
    pub fn signature(&self) -> (String, usize, Vec<String>) {
        (self.name.clone(), self.param_arity, self.param_types.clone())
    }

    pub fn signature_string(&self) -> String {
        format!("{}({})", self.name, self.param_types.join(","))
    }

    pub fn has_test_annotation(&self) -> bool {
        self.annotations.iter().any(|a| a == "Test")
    }
}

/// All methods of one source file plus the normalized remainder.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassSnapshot {
    pub path: String,
    pub release: String,
    pub methods: Vec<MethodRecord>,
    /// Canonical token string of everything outside method bodies: package,
    /// imports, fields, annotations, type and method headers.
    pub non_method_normalized: String,
}

impl ClassSnapshot {
    pub fn with_location(mut self, path: &str, release: &str) -> Self {
        self.path = path.to_string();
        self.release = release.to_string();
        self
    }

    /// Methods counted as test methods: non-constructors, optionally
    /// restricted to `@Test`-annotated ones.
    pub fn test_method_count(&self, annotated_only: bool) -> u64 {
        self.methods
            .iter()
            .filter(|m| !m.is_constructor && (!annotated_only || m.has_test_annotation()))
            .count() as u64
    }
}

/// Total-test-method contribution of a snapshot (all non-constructor methods).
pub fn count_test_methods(snapshot: &ClassSnapshot) -> u64 {
    snapshot.test_method_count(false)
}

// Words that can precede `(...)` in statement position; never method names.
const STMT_WORDS: &[&str] = &[
    "if", "for", "while", "switch", "catch", "synchronized", "return", "new", "do", "else",
    "try", "finally", "assert", "throw", "throws", "this", "super", "break", "continue",
    "default", "instanceof", "case",
];

const MODIFIER_WORDS: &[&str] = &[
    "public", "private", "protected", "static", "final", "abstract", "synchronized", "native",
    "strictfp", "default", "transient", "volatile", "sealed",
];

fn is_stmt_word(text: &str) -> bool {
    STMT_WORDS.contains(&text)
}

fn is_modifier_word(text: &str) -> bool {
    MODIFIER_WORDS.contains(&text)
}

#[derive(Debug)]
enum Frame {
    Type {
        name: String,
        is_enum: bool,
        /// True while scanning the constant list of an enum body (before the
        /// first top-level `;`); `Ident(args) {` there opens a constant body,
        /// not a method.
        constants_section: bool,
    },
    Method(PendingMethod),
    Other,
}

#[derive(Debug)]
struct PendingMethod {
    name: String,
    param_types: Vec<String>,
    is_constructor: bool,
    annotations: Vec<String>,
    open_idx: usize,
    open_line: usize,
}

struct Header {
    name: String,
    name_idx: usize,
    param_types: Vec<String>,
}

/// Extract every brace-delimited method and constructor from Java source.
///
/// Fails with [`Error::UnbalancedBraces`] when brace nesting (outside
/// comments and literals) does not close.
pub fn extract(source: &str) -> Result<ClassSnapshot> {
    let toks = tokenize(source);
    let mut frames: Vec<Frame> = Vec::new();
    let mut pending_type: Option<(String, bool)> = None;
    let mut paren_depth: usize = 0;
    let mut method_depth: usize = 0;
    let mut last_boundary: usize = 0;
    let mut methods: Vec<MethodRecord> = Vec::new();
    let mut body_ranges: Vec<(usize, usize)> = Vec::new();

    let mut i = 0;
    while i < toks.len() {
        let tok = toks[i];
        match tok.text {
            "class" | "interface" | "enum"
                if tok.kind == TokenKind::Word
                    && toks.get(i + 1).is_some_and(|t| t.kind == TokenKind::Word) =>
            {
                pending_type = Some((toks[i + 1].text.to_string(), tok.text == "enum"));
            }
            "record"
                if tok.kind == TokenKind::Word
                    && toks.get(i + 1).is_some_and(|t| t.kind == TokenKind::Word)
                    && toks.get(i + 2).is_some_and(|t| {
                        matches!(t.text, "(" | "<" | "{" | "extends" | "implements")
                    }) =>
            {
                pending_type = Some((toks[i + 1].text.to_string(), false));
            }
            ";" => {
                pending_type = None;
                if paren_depth == 0 {
                    if let Some(Frame::Type { constants_section, .. }) = frames.last_mut() {
                        *constants_section = false;
                    }
                }
            }
            "=" => pending_type = None,
            "(" => paren_depth += 1,
            ")" => paren_depth = paren_depth.saturating_sub(1),
            "{" => {
                let frame = if let Some((name, is_enum)) = pending_type.take() {
                    Frame::Type { name, is_enum, constants_section: is_enum }
                } else if paren_depth > 0 {
                    Frame::Other
                } else if method_depth == 0 {
                    match match_header(&toks, i) {
                        Some(header) if !in_enum_constants(&frames) => {
                            let type_name = enclosing_type_name(&frames);
                            let is_constructor = type_name == Some(header.name.as_str())
                                && !has_return_type(&toks, header.name_idx);
                            let annotations =
                                collect_annotations(&toks, last_boundary, header.name_idx);
                            Frame::Method(PendingMethod {
                                name: header.name,
                                param_types: header.param_types,
                                is_constructor,
                                annotations,
                                open_idx: i,
                                open_line: tok.line,
                            })
                        }
                        _ => Frame::Other,
                    }
                } else {
                    Frame::Other
                };
                if matches!(frame, Frame::Method(_)) {
                    method_depth += 1;
                }
                frames.push(frame);
            }
            "}" => {
                match frames.pop() {
                    None => return Err(Error::UnbalancedBraces { line: tok.line }),
                    Some(Frame::Method(pm)) => {
                        method_depth -= 1;
                        let body: Vec<&str> =
                            toks[pm.open_idx..=i].iter().map(|t| t.text).collect();
                        methods.push(MethodRecord {
                            param_arity: pm.param_types.len(),
                            name: pm.name,
                            param_types: pm.param_types,
                            body_span: (pm.open_line, tok.line),
                            normalized_body: body.join(" "),
                            is_constructor: pm.is_constructor,
                            annotations: pm.annotations,
                        });
                        body_ranges.push((pm.open_idx, i));
                    }
                    Some(_) => {}
                }
            }
            _ => {}
        }
        if matches!(tok.text, ";" | "{" | "}") {
            last_boundary = i + 1;
        }
        i += 1;
    }

    if !frames.is_empty() {
        let line = toks.last().map_or(1, |t| t.line);
        return Err(Error::UnbalancedBraces { line });
    }

    body_ranges.sort_unstable();
    methods.sort_by_key(|m| m.body_span);
    let mut outside = Vec::new();
    let mut next_range = 0;
    let mut idx = 0;
    while idx < toks.len() {
        if next_range < body_ranges.len() && idx == body_ranges[next_range].0 {
            idx = body_ranges[next_range].1 + 1;
            next_range += 1;
        } else {
            outside.push(toks[idx].text);
            idx += 1;
        }
    }

    Ok(ClassSnapshot {
        path: String::new(),
        release: String::new(),
        methods,
        non_method_normalized: outside.join(" "),
    })
}

fn in_enum_constants(frames: &[Frame]) -> bool {
    matches!(
        frames.last(),
        Some(Frame::Type { is_enum: true, constants_section: true, .. })
    )
}

fn enclosing_type_name(frames: &[Frame]) -> Option<&str> {
    frames.iter().rev().find_map(|f| match f {
        Frame::Type { name, .. } => Some(name.as_str()),
        _ => None,
    })
}

/// Try to read a method/constructor header ending at the `{` at `open_idx`:
/// `name ( params ) [throws A.B, C] {` with `name` in call-forbidden
/// positions (statement keywords, annotations, `new` chains) rejected.
fn match_header(toks: &[Token], open_idx: usize) -> Option<Header> {
    if open_idx == 0 {
        return None;
    }
    let mut j = open_idx - 1;

    // Optional throws clause: a Word/./,-chain whose first token is `throws`.
    if toks[j].text != ")" {
        let end = j;
        let mut k = j;
        loop {
            let t = &toks[k];
            if !(t.kind == TokenKind::Word || t.text == "." || t.text == ",") {
                break;
            }
            if k == 0 {
                return None;
            }
            k -= 1;
        }
        if toks[k + 1].text != "throws" || end < k + 2 {
            return None;
        }
        j = k;
    }
    if toks[j].text != ")" {
        return None;
    }

    // Matching open paren (annotation argument lists inside params nest fine).
    let mut depth = 0isize;
    let mut k = j;
    let open_paren = loop {
        match toks[k].text {
            ")" => depth += 1,
            "(" => {
                depth -= 1;
                if depth == 0 {
                    break k;
                }
            }
            _ => {}
        }
        if k == 0 {
            return None;
        }
        k -= 1;
    };
    if open_paren == 0 {
        return None;
    }

    let name_idx = open_paren - 1;
    let name_tok = &toks[name_idx];
    if name_tok.kind != TokenKind::Word || is_stmt_word(name_tok.text) {
        return None;
    }

    // Walk a possible qualified chain leftwards; reject `new a.b.C() {` and
    // `@C(...) {` shapes.
    let mut chain_start = name_idx;
    while chain_start >= 2
        && toks[chain_start - 1].text == "."
        && toks[chain_start - 2].kind == TokenKind::Word
    {
        chain_start -= 2;
    }
    if chain_start >= 1 {
        let before = toks[chain_start - 1].text;
        if before == "@" || before == "new" {
            return None;
        }
    }
    if chain_start != name_idx {
        // Qualified names never head a declaration.
        return None;
    }

    Some(Header {
        name: name_tok.text.to_string(),
        name_idx,
        param_types: parse_param_types(&toks[open_paren + 1..j]),
    })
}

/// True when the token before the name is a type (so the declaration has a
/// return type and cannot be a constructor).
fn has_return_type(toks: &[Token], name_idx: usize) -> bool {
    if name_idx == 0 {
        return false;
    }
    let prev = &toks[name_idx - 1];
    match prev.text {
        "]" => true,
        ">" | ">>" | ">>>" => {
            // Scan back over the balanced angle section; a Word before the
            // matching `<` means a generic return type, otherwise these were
            // the type parameters of a generic constructor.
            let mut depth: isize = 0;
            let mut k = name_idx - 1;
            loop {
                depth += match toks[k].text {
                    ">" => 1,
                    ">>" => 2,
                    ">>>" => 3,
                    "<" => -1,
                    _ => 0,
                };
                if depth <= 0 || k == 0 {
                    break;
                }
                k -= 1;
            }
            k > 0
                && toks[k - 1].kind == TokenKind::Word
                && !is_modifier_word(toks[k - 1].text)
        }
        _ => prev.kind == TokenKind::Word && !is_modifier_word(prev.text),
    }
}

/// Simple annotation names between the previous member boundary and the
/// method name.
fn collect_annotations(toks: &[Token], from: usize, to: usize) -> Vec<String> {
    let mut anns = Vec::new();
    let mut j = from;
    while j < to {
        if toks[j].text == "@" {
            let mut last = None;
            let mut k = j + 1;
            while k < toks.len() && toks[k].kind == TokenKind::Word {
                last = Some(toks[k].text);
                if k + 1 < toks.len() && toks[k + 1].text == "." {
                    k += 2;
                } else {
                    k += 1;
                    break;
                }
            }
            if let Some(name) = last {
                anns.push(name.to_string());
            }
            if k < toks.len() && toks[k].text == "(" {
                let mut depth = 0isize;
                while k < toks.len() {
                    match toks[k].text {
                        "(" => depth += 1,
                        ")" => {
                            depth -= 1;
                            if depth == 0 {
                                k += 1;
                                break;
                            }
                        }
                        _ => {}
                    }
                    k += 1;
                }
            }
            j = k;
        } else {
            j += 1;
        }
    }
    anns
}

/// Parameter type names from the token slice between the header parens.
fn parse_param_types(inner: &[Token]) -> Vec<String> {
    let mut segments: Vec<&[Token]> = Vec::new();
    let mut depth = 0isize;
    let mut start = 0;
    for (idx, tok) in inner.iter().enumerate() {
        depth += match tok.text {
            "(" | "[" | "<" => 1,
            ")" | "]" | ">" => -1,
            ">>" => -2,
            ">>>" => -3,
            _ => 0,
        };
        if tok.text == "," && depth == 0 {
            segments.push(&inner[start..idx]);
            start = idx + 1;
        }
    }
    if start < inner.len() {
        segments.push(&inner[start..]);
    }

    let mut types = Vec::new();
    for seg in segments {
        if let Some(ty) = param_type(seg) {
            types.push(ty);
        }
    }
    types
}

fn param_type(seg: &[Token]) -> Option<String> {
    let mut toks: Vec<&Token> = seg.iter().collect();

    // Leading annotations and `final`.
    loop {
        match toks.first() {
            Some(t) if t.text == "@" => {
                toks.remove(0);
                while toks.first().is_some_and(|t| t.kind == TokenKind::Word) {
                    toks.remove(0);
                    if toks.first().is_some_and(|t| t.text == ".") {
                        toks.remove(0);
                    } else {
                        break;
                    }
                }
                if toks.first().is_some_and(|t| t.text == "(") {
                    let mut depth = 0isize;
                    while let Some(t) = toks.first() {
                        depth += match t.text {
                            "(" => 1,
                            ")" => -1,
                            _ => 0,
                        };
                        toks.remove(0);
                        if depth == 0 {
                            break;
                        }
                    }
                }
            }
            Some(t) if t.text == "final" => {
                toks.remove(0);
            }
            _ => break,
        }
    }

    let vararg = toks.iter().any(|t| t.text == "...");
    toks.retain(|t| t.text != "...");

    // The parameter name is the last Word at angle depth zero.
    let name_pos = toks.iter().rposition(|t| t.kind == TokenKind::Word)?;
    if toks[name_pos].text == "this" {
        return None; // receiver parameter
    }

    let mut rendered = String::new();
    let mut angle = 0isize;
    for (idx, t) in toks.iter().enumerate() {
        if idx == name_pos {
            continue;
        }
        match t.text {
            "<" => {
                angle += 1;
                continue;
            }
            ">" => {
                angle -= 1;
                continue;
            }
            ">>" => {
                angle -= 2;
                continue;
            }
            ">>>" => {
                angle -= 3;
                continue;
            }
            _ => {}
        }
        if angle > 0 {
            continue;
        }
        rendered.push_str(t.text);
    }
    if vararg {
        rendered.push_str("...");
    }
    if rendered.is_empty() {
        return None;
    }
    Some(rendered)
}
