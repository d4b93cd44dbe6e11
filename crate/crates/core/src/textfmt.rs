//! Fixed-precision decimal rendering shared by every text artifact.

/// Renders with 9 significant digits in scientific notation, e.g. `5.00000000e-3`.
pub fn num(v: f64) -> String {
    format!("{v:.8e}")
}

/// Whitespace token reader with keyword checks, used by the line-oriented formats.
pub struct Tokens<'a> {
    iter: std::str::SplitWhitespace<'a>,
    what: &'static str,
}

impl<'a> Tokens<'a> {
    pub fn new(line: &'a str, what: &'static str) -> Self {
        Self { iter: line.split_whitespace(), what }
    }

    fn err(&self, detail: String) -> crate::Error {
        crate::Error::Format { what: self.what, detail }
    }

    pub fn word(&mut self) -> crate::Result<&'a str> {
        self.iter.next().ok_or_else(|| self.err("unexpected end of record".into()))
    }

    pub fn expect(&mut self, keyword: &str) -> crate::Result<()> {
        let w = self.word()?;
        if w == keyword {
            Ok(())
        } else {
            Err(self.err(format!("expected `{keyword}`, found `{w}`")))
        }
    }

    pub fn f64(&mut self) -> crate::Result<f64> {
        let w = self.word()?;
        w.parse().map_err(|_| self.err(format!("bad number `{w}`")))
    }

    pub fn usize(&mut self) -> crate::Result<usize> {
        let w = self.word()?;
        w.parse().map_err(|_| self.err(format!("bad count `{w}`")))
    }

    pub fn finish(mut self) -> crate::Result<()> {
        match self.iter.next() {
            None => Ok(()),
            Some(w) => Err(self.err(format!("trailing token `{w}`"))),
        }
    }
}
