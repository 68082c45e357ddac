//! The built-in example corpus: graph files, germ descriptors and the
//! manifest of expected values, embedded at compile time.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Stated in the source text.
    Published,
    /// Computed independently by hand from published data.
    Derived,
    /// Immediate from the definitions.
    Trivial,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Published => "published",
            Origin::Derived => "derived",
            Origin::Trivial => "trivial",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Serialize)]
pub struct Expected<T> {
    pub value: T,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterExpectation {
    pub vertices: Vec<String>,
    pub shape: String,
    pub class: String,
    pub quot: Option<String>,
    pub t_index: Option<u64>,
    pub du_val: Option<usize>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GraphCase {
    pub name: String,
    pub graph: String,
    pub tree: bool,
    pub germ_feasible: bool,
    /// Index of the non-Gorenstein point, needed for splitting degrees.
    pub index: Option<u64>,
    pub note: Option<String>,
    #[serde(default)]
    pub cluster: Vec<ClusterExpectation>,
    #[serde(default)]
    pub delta: BTreeMap<String, Expected<String>>,
    #[serde(default)]
    pub kc: BTreeMap<String, Expected<String>>,
    #[serde(default)]
    pub splitting: BTreeMap<String, Expected<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorCase {
    pub file: String,
    pub row: Option<u8>,
    pub rejection: Option<String>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub case: Vec<GraphCase>,
    #[serde(default)]
    pub descriptor: Vec<DescriptorCase>,
}

/// Manifest plus the text of every file it names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub manifest: Manifest,
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("manifest: {0}")]
    Manifest(#[from] toml::de::Error),
    #[error("corpus file `{name}`: {source}")]
    Io {
        name: String,
        source: std::io::Error,
    },
    #[error("corpus file `{0}` is not available")]
    Missing(String),
}

macro_rules! embed {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../corpus/", $name)))),*]
    };
}

const MANIFEST: &str = include_str!("../corpus/expected.toml");

const FILES: &[(&str, &str)] = embed!(
    "cd3_a.graph",
    "cd3_b.graph",
    "cd3_c.graph",
    "ic.graph",
    "iia.graph",
    "iib.graph",
    "iidual.graph",
    "k1a_a_m3_n2.graph",
    "k1a_c_k2.graph",
    "kad.graph",
    "gor_cb.germ",
    "cd2_cb.germ",
    "cax2_cb.germ",
    "ce2_cb.germ",
    "cd3_a_cb.germ",
    "cd3_b_d.germ",
    "cd3_c_f.germ",
    "iia_cb_n5.germ",
    "iia_d_n4.germ",
    "iia_f_n3.germ",
    "iia_f_n4.germ",
    "iia_f_n5.germ",
    "iidual2_cb.germ",
    "iidual_cb_n5.germ",
    "iidual_d_n4.germ",
    "iidual_d_n3.germ",
    "iidual_f_n2.germ",
    "iib_cb_n3.germ",
    "iib_d_n2.germ",
    "ic_cb_n4.germ",
    "ic_d_n3.germ",
    "ic_f_n2.germ",
    "k1a_a_cb.germ",
    "k1a_c_f.germ",
    "kad_cb_n4.germ",
    "kad_d_n3.germ",
    "kad_f_n2.germ",
    "forbid_ic_k2a.germ",
    "forbid_k2a_kad.germ",
    "forbid_k2a_k3a.germ",
    "forbid_iidual_iib.germ",
);

impl Corpus {
    pub fn builtin() -> Corpus {
        Corpus::from_parts(MANIFEST, |name| {
            FILES
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, text)| text.to_string())
                .ok_or_else(|| CorpusError::Missing(name.to_string()))
        })
        .expect("built-in corpus is well formed")
    }

    /// Loads `expected.toml` and the files it names from a directory.
    pub fn from_dir(dir: &Path) -> Result<Corpus, CorpusError> {
        let read = |name: &str| {
            std::fs::read_to_string(dir.join(name)).map_err(|source| CorpusError::Io {
                name: name.to_string(),
                source,
            })
        };
        let manifest = read("expected.toml")?;
        Corpus::from_parts(&manifest, read)
    }

    pub fn from_parts(
        manifest: &str,
        mut load: impl FnMut(&str) -> Result<String, CorpusError>,
    ) -> Result<Corpus, CorpusError> {
        let manifest: Manifest = toml::from_str(manifest)?;
        let mut files = BTreeMap::new();
        let names = manifest
            .case
            .iter()
            .map(|c| c.graph.clone())
            .chain(manifest.descriptor.iter().map(|d| d.file.clone()));
        for name in names {
            if let std::collections::btree_map::Entry::Vacant(e) = files.entry(name) {
                let text = load(e.key())?;
                e.insert(text);
            }
        }
        Ok(Corpus { manifest, files })
    }

    /// The raw text of an embedded corpus file.
    pub fn builtin_file(name: &str) -> Option<&'static str> {
        FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
    }

    pub fn builtin_file_names() -> impl Iterator<Item = &'static str> {
        FILES.iter().map(|(n, _)| *n)
    }

    pub fn case_mut(&mut self, name: &str) -> Option<&mut GraphCase> {
        self.manifest.case.iter_mut().find(|c| c.name == name)
    }
}

/// Text of the k1A family graph: a curve meeting the first vertex of the
/// chain `[2^(m−2), m+2]` and `n` curves meeting its last vertex.
pub fn k1a_a_graph(m: u64, n: usize) -> String {
    assert!(m >= 3, "the family starts at m = 3");
    let mut out = format!("# k1A family at m = {m} with {n} curves at the chain end\n");
    let len = m as usize - 1;
    for i in 1..=len {
        let a = if i == len { m + 2 } else { 2 };
        out.push_str(&format!("vertex e{i} kind=exc self=-{a}\n"));
    }
    out.push_str("vertex c0 kind=comp self=-1\n");
    for j in 1..=n {
        out.push_str(&format!("vertex c{j} kind=comp self=-1\n"));
    }
    for i in 1..len {
        out.push_str(&format!("edge e{i} e{}\n", i + 1));
    }
    out.push_str("edge c0 e1\n");
    for j in 1..=n {
        out.push_str(&format!("edge c{j} e{len}\n"));
    }
    out
}

/// The chain `[2k−1, 2^(k−1), 5, k+2, 2^(2k−3)]` of the imprimitive k1A
/// example.
pub fn k1a_c_chain(k: u64) -> Vec<u64> {
    assert!(k >= 2, "the example starts at k = 2");
    let mut c = vec![2 * k - 1];
    c.extend(std::iter::repeat_n(2, k as usize - 1));
    c.push(5);
    c.push(k + 2);
    c.extend(std::iter::repeat_n(2, 2 * k as usize - 3));
    c
}

/// Graph text for the imprimitive k1A example: `c1` meets the second chain
/// vertex and `c0` the last one.
pub fn k1a_c_graph(k: u64) -> String {
    let chain = k1a_c_chain(k);
    let mut out = format!("# imprimitive k1A example at k = {k}\n");
    for (i, a) in chain.iter().enumerate() {
        out.push_str(&format!("vertex e{} kind=exc self=-{a}\n", i + 1));
    }
    out.push_str("vertex c1 kind=comp self=-1\nvertex c0 kind=comp self=-1\n");
    for i in 1..chain.len() {
        out.push_str(&format!("edge e{i} e{}\n", i + 1));
    }
    out.push_str(&format!("edge c1 e2\nedge c0 e{}\n", chain.len()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_loads() {
        let c = Corpus::builtin();
        assert_eq!(c.manifest.case.len(), 10);
        assert!(c.files.len() >= 40);
    }

    #[test]
    fn generated_graphs_match_files() {
        assert_eq!(k1a_c_chain(2), vec![3, 2, 5, 4, 2]);
        let gen = crate::dual_graph::parse_graph(&k1a_c_graph(2)).unwrap();
        let file = crate::dual_graph::parse_graph(Corpus::builtin_file("k1a_c_k2.graph").unwrap())
            .unwrap();
        assert_eq!(gen.len(), file.len());
        assert_eq!(gen.edge_count(), file.edge_count());
        let g = crate::dual_graph::parse_graph(&k1a_a_graph(3, 2)).unwrap();
        assert_eq!(g.len(), 5);
    }
}
