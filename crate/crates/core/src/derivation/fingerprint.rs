use std::collections::HashMap;
use std::sync::Arc;

use super::Label;

/// Hash-consed id of an abstract derivation tree. Two nodes of the same table have
/// equal fingerprints iff their unfolded derivation trees are equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Leaf(Arc<str>),
    Node(Arc<str>, Vec<Fingerprint>),
}

#[derive(Clone, Debug, Default)]
pub struct FingerprintTable {
    ids: HashMap<Key, Fingerprint>,
    keys: Vec<Key>,
    constructions: usize,
}

impl FingerprintTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, label: &Label, children: Vec<Fingerprint>) -> Fingerprint {
        self.constructions += 1;
        let key = match label {
            Label::Origin(l) => Key::Leaf(l.clone()),
            Label::Rule(r) => Key::Node(r.clone(), children),
        };
        if let Some(&fp) = self.ids.get(&key) {
            return fp;
        }
        let fp = Fingerprint(self.keys.len() as u32);
        self.keys.push(key.clone());
        self.ids.insert(key, fp);
        fp
    }

    /// Number of distinct trees seen so far.
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Number of canonical-key constructions performed (one per recorded node).
    pub fn constructions(&self) -> usize {
        self.constructions
    }

    pub fn render(&self, fp: Fingerprint) -> String {
        let mut out = String::new();
        self.render_into(fp, &mut out);
        out
    }

    fn render_into(&self, fp: Fingerprint, out: &mut String) {
        match &self.keys[fp.0 as usize] {
            Key::Leaf(l) => out.push_str(l),
            Key::Node(r, children) => {
                out.push_str(r);
                out.push('(');
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    self.render_into(*c, out);
                }
                out.push(')');
            }
        }
    }
}
