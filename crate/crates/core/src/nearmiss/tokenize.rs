use std::collections::BTreeMap;
use std::fmt;

/// Default separator characters, in addition to Unicode whitespace.
pub const DEFAULT_SEPARATORS: &str = ";.[]()~!-+&*/%<>^|?{}=#,\"\\:$'`@";

/// Comment markers and separators used to turn a snippet into tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub inline_comment: String,
    pub block_open: String,
    pub block_close: String,
    /// Non-whitespace separator characters. Whitespace always separates.
    pub separators: Vec<char>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            inline_comment: "#".into(),
            block_open: "\"\"\"".into(),
            block_close: "\"\"\"".into(),
            separators: DEFAULT_SEPARATORS.chars().collect(),
        }
    }
}

impl TokenizerConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.inline_comment.is_empty()
            || self.block_open.is_empty()
            || self.block_close.is_empty()
        {
            return Err(crate::Error::validation(
                "tokenizer config",
                "comment markers must be non-empty",
            ));
        }
        Ok(())
    }

    fn is_separator(&self, c: char) -> bool {
        c.is_whitespace() || self.separators.contains(&c)
    }
}

/// Source with comments removed. Line feeds inside block comments are kept
/// so that line structure survives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stripped {
    pub text: String,
    /// A block comment was opened and never closed.
    pub unterminated_block: bool,
}

/// Removes inline comments (marker to end of line) and block comments
/// (open marker through close marker). String literals are not tracked, so
/// a marker inside a string still starts a comment.
pub fn strip_comments(source: &str, cfg: &TokenizerConfig) -> Stripped {
    let mut text = String::with_capacity(source.len());
    let mut in_block = false;
    let mut i = 0;
    while i < source.len() {
        let rest = &source[i..];
        if in_block {
            if rest.starts_with(cfg.block_close.as_str()) {
                in_block = false;
                i += cfg.block_close.len();
                continue;
            }
            let c = rest.chars().next().expect("non-empty");
            if c == '\n' {
                text.push('\n');
            }
            i += c.len_utf8();
        } else if rest.starts_with(cfg.block_open.as_str()) {
            in_block = true;
            i += cfg.block_open.len();
        } else if rest.starts_with(cfg.inline_comment.as_str()) {
            i += rest.find('\n').unwrap_or(rest.len());
        } else {
            let c = rest.chars().next().expect("non-empty");
            text.push(c);
            i += c.len_utf8();
        }
    }
    Stripped {
        text,
        unterminated_block: in_block,
    }
}

/// Multiset of tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenBag {
    counts: BTreeMap<String, u32>,
    size: usize,
}

impl TokenBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, token: &str) {
        self.add_n(token, 1);
    }

    pub fn add_n(&mut self, token: &str, n: u32) {
        if n == 0 {
            return;
        }
        *self.counts.entry(token.to_owned()).or_default() += n;
        self.size += n as usize;
    }

    /// Total number of token occurrences.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn count(&self, token: &str) -> u32 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    /// Distinct tokens with their counts, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.counts.iter().map(|(t, c)| (t.as_str(), *c))
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Size of the multiset intersection (per-token minimum of counts).
    pub fn overlap(&self, other: &TokenBag) -> usize {
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .counts
            .iter()
            .map(|(t, &c)| c.min(large.count(t)) as usize)
            .sum()
    }
}

impl<'a> FromIterator<&'a str> for TokenBag {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut bag = TokenBag::new();
        for t in iter {
            bag.add(t);
        }
        bag
    }
}

impl fmt::Display for TokenBag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (t, c)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}:{c}")?;
        }
        f.write_str("}")
    }
}

/// Splits comment-free text on separators; empty fragments are dropped.
pub fn tokenize(code: &str, cfg: &TokenizerConfig) -> TokenBag {
    code.split(|c: char| cfg.is_separator(c))
        .filter(|t| !t.is_empty())
        .collect()
}
