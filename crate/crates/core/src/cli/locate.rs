//! Maps a JSON path back to a line and column in the source text, so that
//! semantic errors can point at the offending value.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seg {
    Key(String),
    Index(usize),
}

impl From<&str> for Seg {
    fn from(s: &str) -> Self {
        Seg::Key(s.to_string())
    }
}

impl From<usize> for Seg {
    fn from(i: usize) -> Self {
        Seg::Index(i)
    }
}

/// A path into a scenario document, e.g. `nodes[1].alpha.g2`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JsonPath(pub Vec<Seg>);

impl JsonPath {
    pub fn root() -> Self {
        JsonPath(Vec::new())
    }

    pub fn key(&self, k: &str) -> Self {
        let mut p = self.clone();
        p.0.push(Seg::Key(k.into()));
        p
    }

    pub fn index(&self, i: usize) -> Self {
        let mut p = self.clone();
        p.0.push(Seg::Index(i));
        p
    }
}

impl fmt::Display for JsonPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("(root)");
        }
        for (n, seg) in self.0.iter().enumerate() {
            match seg {
                Seg::Key(k) if n == 0 => write!(f, "{k}")?,
                Seg::Key(k) => write!(f, ".{k}")?,
                Seg::Index(i) => write!(f, "[{i}]")?,
            }
        }
        Ok(())
    }
}

/// 1-based line and column of the value at `path`, if present.
pub fn locate(text: &str, path: &JsonPath) -> Option<(usize, usize)> {
    let mut s = Scanner {
        b: text.as_bytes(),
        pos: 0,
    };
    let off = s.find(&path.0)?;
    let before = &text[..off];
    let line = before.matches('\n').count() + 1;
    let col = off - before.rfind('\n').map_or(0, |n| n + 1) + 1;
    Some((line, col))
}

struct Scanner<'a> {
    b: &'a [u8],
    pos: usize,
}

impl Scanner<'_> {
    fn ws(&mut self) {
        while self.pos < self.b.len() && self.b[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.b.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn string(&mut self) -> Option<String> {
        self.ws();
        if self.b.get(self.pos) != Some(&b'"') {
            return None;
        }
        let start = self.pos;
        self.pos += 1;
        while self.pos < self.b.len() {
            match self.b[self.pos] {
                b'\\' => self.pos += 2,
                b'"' => {
                    self.pos += 1;
                    return serde_json::from_slice(&self.b[start..self.pos]).ok();
                }
                _ => self.pos += 1,
            }
        }
        None
    }

    fn find(&mut self, target: &[Seg]) -> Option<usize> {
        self.ws();
        let Some((head, rest)) = target.split_first() else {
            return Some(self.pos);
        };
        match (self.b.get(self.pos)?, head) {
            (b'{', Seg::Key(want)) => {
                self.pos += 1;
                if self.eat(b'}') {
                    return None;
                }
                loop {
                    let key = self.string()?;
                    if !self.eat(b':') {
                        return None;
                    }
                    if &key == want {
                        return self.find(rest);
                    }
                    self.skip()?;
                    if !self.eat(b',') {
                        return None;
                    }
                }
            }
            (b'[', Seg::Index(want)) => {
                self.pos += 1;
                if self.eat(b']') {
                    return None;
                }
                let mut k = 0;
                loop {
                    if k == *want {
                        return self.find(rest);
                    }
                    self.skip()?;
                    if !self.eat(b',') {
                        return None;
                    }
                    k += 1;
                }
            }
            _ => None,
        }
    }

    fn skip(&mut self) -> Option<()> {
        self.ws();
        match *self.b.get(self.pos)? {
            b'"' => self.string().map(|_| ()),
            open @ (b'{' | b'[') => {
                let close = if open == b'{' { b'}' } else { b']' };
                self.pos += 1;
                if self.eat(close) {
                    return Some(());
                }
                loop {
                    if open == b'{' {
                        self.string()?;
                        if !self.eat(b':') {
                            return None;
                        }
                    }
                    self.skip()?;
                    if self.eat(close) {
                        return Some(());
                    }
                    if !self.eat(b',') {
                        return None;
                    }
                }
            }
            _ => {
                while self.pos < self.b.len() && !matches!(self.b[self.pos], b',' | b'}' | b']') {
                    self.pos += 1;
                }
                Some(())
            }
        }
    }
}
