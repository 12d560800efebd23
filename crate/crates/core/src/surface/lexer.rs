//! Tokens of the surface language.

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    /// Punctuation, including the multi-character `=>`, `|-`, `:=` and `\/`.
    Sym(&'static str),
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const RESERVED: &[&str] = &[
    "Nat", "Ty", "Pi", "El", "UPi", "CtxPi", "TyPi", "Ctx", "zero", "succ", "elimNat", "fun", "app", "ulam",
    "uapp", "ctxfun", "ctxapp", "tyfun", "tyapp", "box", "boxty", "letbox", "return", "in", "elimTy",
    "elimTm", "wk", "emp", "omega", "def", "global", "level-vars",
];

/// Words that cannot be used as variable names.
pub fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s)
}

const SYMBOLS: &[&str] = &["=>", "|-", ":=", "\\/", "(", ")", "[", "]", "{", "}", ",", ";", ":", ".", "@", "|", "+"];

pub fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            let mut word: String = chars[i..j].iter().collect();
            if word == "level" && chars[j..].starts_with(&['-', 'v', 'a', 'r', 's']) {
                j += 5;
                word = "level-vars".into();
            }
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            out.push(Spanned { tok: Tok::Ident(word), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let n = text
                .parse::<u64>()
                .map_err(|_| ParseError::new(l0, c0, format!("numeral `{text}` is too large")))?;
            let len = j - i;
            advance(&mut i, &mut line, &mut col, len);
            out.push(Spanned { tok: Tok::Num(n), line: l0, col: c0 });
            continue;
        }
        let sym = SYMBOLS.iter().find(|s| {
            let s: Vec<char> = s.chars().collect();
            chars[i..].starts_with(&s)
        });
        match sym {
            Some(s) => {
                advance(&mut i, &mut line, &mut col, s.len());
                out.push(Spanned { tok: Tok::Sym(s), line: l0, col: c0 });
            }
            None => return Err(ParseError::new(l0, c0, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_character_symbols_and_comments() {
        let toks: Vec<Tok> = lex("level-vars l; -- note\nfun(x) => 1+l \\/ x |- y := z")
            .unwrap()
            .into_iter()
            .map(|s| s.tok)
            .collect();
        assert_eq!(toks[0], Tok::Ident("level-vars".into()));
        assert!(toks.contains(&Tok::Sym("=>")));
        assert!(toks.contains(&Tok::Sym("\\/")));
        assert!(toks.contains(&Tok::Sym("|-")));
        assert!(toks.contains(&Tok::Sym(":=")));
        assert!(!toks.contains(&Tok::Ident("note".into())));
    }

    #[test]
    fn positions_are_one_based() {
        let toks = lex("a\n  b").unwrap();
        assert_eq!((toks[1].line, toks[1].col), (2, 3));
    }
}
