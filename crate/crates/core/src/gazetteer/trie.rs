use std::collections::HashMap;

use super::NameMatch;

#[derive(Debug, Clone, Default)]
struct Node {
    children: HashMap<u32, u32>,
    accepts: Vec<NameMatch>,
}

/// Token-level prefix trie. Edges are labelled with interned tokens, so a
/// multi-word name such as `los angeles` is a path of length two.
#[derive(Debug, Clone)]
pub struct TokenTrie {
    vocab: HashMap<String, u32>,
    nodes: Vec<Node>,
    max_len: usize,
}

/// One matched token span.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SpanMatch {
    pub start: usize,
    pub length: usize,
    pub matches: Vec<NameMatch>,
}

impl Default for TokenTrie {
    fn default() -> Self {
        TokenTrie {
            vocab: HashMap::new(),
            nodes: vec![Node::default()],
            max_len: 0,
        }
    }
}

impl TokenTrie {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert<S: AsRef<str>>(&mut self, tokens: &[S], m: NameMatch) {
        if tokens.is_empty() {
            return;
        }
        let mut node = 0usize;
        for tok in tokens {
            let next_sym = self.vocab.len() as u32;
            let sym = *self.vocab.entry(tok.as_ref().to_owned()).or_insert(next_sym);
            node = match self.nodes[node].children.get(&sym) {
                Some(&child) => child as usize,
                None => {
                    let child = self.nodes.len();
                    self.nodes.push(Node::default());
                    self.nodes[node].children.insert(sym, child as u32);
                    child
                }
            };
        }
        let accepts = &mut self.nodes[node].accepts;
        if let Err(at) = accepts.binary_search(&m) {
            accepts.insert(at, m);
        }
        self.max_len = self.max_len.max(tokens.len());
    }

    /// Longest indexed name, in tokens.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn get<S: AsRef<str>>(&self, tokens: &[S]) -> &[NameMatch] {
        let mut node = 0usize;
        for tok in tokens {
            match self
                .vocab
                .get(tok.as_ref())
                .and_then(|sym| self.nodes[node].children.get(sym))
            {
                Some(&child) => node = child as usize,
                None => return &[],
            }
        }
        &self.nodes[node].accepts
    }

    /// Every span, nested and overlapping ones included, whose tokens spell an
    /// indexed name. Sorted by `(start, length)`.
    pub fn lookup_spans<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<SpanMatch> {
        let syms: Vec<Option<u32>> = tokens.iter().map(|t| self.vocab.get(t.as_ref()).copied()).collect();
        let mut out = Vec::new();
        for start in 0..syms.len() {
            let mut node = 0usize;
            for (offset, sym) in syms[start..].iter().enumerate() {
                let Some(child) = sym.and_then(|s| self.nodes[node].children.get(&s)) else {
                    break;
                };
                node = *child as usize;
                let accepts = &self.nodes[node].accepts;
                if !accepts.is_empty() {
                    out.push(SpanMatch {
                        start,
                        length: offset + 1,
                        matches: accepts.clone(),
                    });
                }
            }
        }
        out
    }
}
