use std::fmt;
use std::sync::Arc;

/// Position of one statement-level expression. The ordinal is the node's
/// preorder index inside its function's control-flow graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExprSite {
    pub module: Arc<str>,
    pub line: u32,
    pub col: u32,
    pub ordinal: u32,
}

impl ExprSite {
    pub fn new(module: &Arc<str>, line: u32, col: u32, ordinal: u32) -> Self {
        ExprSite { module: module.clone(), line, col, ordinal }
    }

    /// Location without the ordinal; two sites at the same place in the
    /// source compare equal under this key.
    pub fn location(&self) -> (&str, u32, u32) {
        (&self.module, self.line, self.col)
    }
}

impl fmt::Display for ExprSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.module, self.line, self.col)
    }
}

/// Byte offset to (1-based line, 0-based byte column), matching the
/// interpreter's own `lineno`/`col_offset`.
#[derive(Debug, Clone)]
pub struct LineIndex {
    starts: Vec<u32>,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(
            text.bytes()
                .enumerate()
                .filter(|&(_, b)| b == b'\n')
                .map(|(i, _)| i as u32 + 1),
        );
        LineIndex { starts }
    }

    pub fn locate(&self, offset: u32) -> (u32, u32) {
        let line = match self.starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        (line as u32 + 1, offset - self.starts[line])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locates_lines_and_columns() {
        let idx = LineIndex::new("x = 1\n  y = 2\n");
        assert_eq!(idx.locate(0), (1, 0));
        assert_eq!(idx.locate(4), (1, 4));
        assert_eq!(idx.locate(8), (2, 2));
    }

    #[test]
    fn display_omits_ordinal() {
        let m: Arc<str> = "bpytop".into();
        assert_eq!(ExprSite::new(&m, 10, 4, 3).to_string(), "bpytop:10:4");
    }
}
