use std::fmt;

/// A letter: an opaque symbol, optionally indexed (`a@2`) or checked (`^a`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub symbol: String,
    pub index: Option<u32>,
    pub checked: bool,
}

pub type Word = Vec<Letter>;

impl Letter {
    pub fn new(symbol: impl Into<String>) -> Self {
        Letter { symbol: symbol.into(), index: None, checked: false }
    }

    pub fn indexed(symbol: impl Into<String>, index: u32) -> Self {
        Letter { symbol: symbol.into(), index: Some(index), checked: false }
    }

    pub fn with_index(&self, index: Option<u32>) -> Self {
        Letter { index, ..self.clone() }
    }

    pub fn check(&self) -> Self {
        Letter { checked: true, ..self.clone() }
    }

    pub fn uncheck(&self) -> Self {
        Letter { checked: false, ..self.clone() }
    }

    /// The letter with index and check mark erased.
    pub fn base(&self) -> Self {
        Letter::new(self.symbol.clone())
    }

    /// Parses `a`, `a@3`, `^a`, `^a@3`.
    pub fn parse(tok: &str) -> Option<Letter> {
        let (checked, rest) = match tok.strip_prefix('^') {
            Some(r) => (true, r),
            None => (false, tok),
        };
        if rest.is_empty() || rest.contains(char::is_whitespace) || rest.contains('#') {
            return None;
        }
        let (symbol, index) = match rest.rfind('@') {
            Some(i) if i > 0 && i + 1 < rest.len() && rest[i + 1..].bytes().all(|b| b.is_ascii_digit()) => {
                (&rest[..i], Some(rest[i + 1..].parse().ok()?))
            }
            _ => (rest, None),
        };
        Some(Letter { symbol: symbol.to_string(), index, checked })
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.checked {
            f.write_str("^")?;
        }
        f.write_str(&self.symbol)?;
        if let Some(i) = self.index {
            write!(f, "@{i}")?;
        }
        Ok(())
    }
}

/// Builds a word from single-character symbols, `word("abaa")`.
pub fn word(s: &str) -> Word {
    s.chars().map(|c| Letter::new(c.to_string())).collect()
}

/// Renders a word compactly when every letter is a plain one-character symbol,
/// space separated otherwise. The empty word renders as `ε`.
pub fn render_word(w: &[Letter]) -> String {
    if w.is_empty() {
        return "ε".to_string();
    }
    let compact = w
        .iter()
        .all(|l| l.index.is_none() && !l.checked && l.symbol.chars().count() == 1);
    if compact {
        w.iter().map(|l| l.symbol.as_str()).collect()
    } else {
        w.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
    }
}

/// Inverse of [`render_word`].
pub fn parse_word(s: &str) -> Option<Word> {
    let s = s.trim();
    if s.is_empty() || s == "ε" {
        return Some(Vec::new());
    }
    if s.contains(char::is_whitespace) {
        s.split_whitespace().map(Letter::parse).collect()
    } else if s.chars().count() > 1 && !s.contains('@') && !s.contains('^') {
        Some(word(s))
    } else {
        Letter::parse(s).map(|l| vec![l])
    }
}
