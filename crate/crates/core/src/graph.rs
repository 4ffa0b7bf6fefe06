//! The hashtag co-audience network: bipartite user–hashtag interaction sets,
//! projection to a weighted undirected hashtag graph, pruning (maximum
//! spanning forest or flat weight cutoff), rooting, and export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::text::{tokenize, HashtagIndex, StopwordSet};

/// Per-user sets of interacted trendy hashtags (the bipartite graph stored
/// as an adjacency list), plus the per-hashtag audience counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionSets {
    /// user id → sorted distinct trendy hashtag indices.
    sets: BTreeMap<String, Vec<usize>>,
    /// audience[t] = number of users whose set contains t.
    audience: Vec<u64>,
}

impl InteractionSets {
    pub fn from_sets(sets: BTreeMap<String, Vec<usize>>, node_count: usize) -> Self {
        let mut audience = vec![0u64; node_count];
        for set in sets.values() {
            debug_assert!(set.windows(2).all(|w| w[0] < w[1]));
            for &t in set {
                audience[t] += 1;
            }
        }
        InteractionSets { sets, audience }
    }

    pub fn node_count(&self) -> usize {
        self.audience.len()
    }

    pub fn user_count(&self) -> usize {
        self.sets.len()
    }

    /// Users in ascending id order with their sorted hashtag sets.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[usize])> {
        self.sets.iter().map(|(u, s)| (u.as_str(), s.as_slice()))
    }

    pub fn get(&self, user: &str) -> Option<&[usize]> {
        self.sets.get(user).map(Vec::as_slice)
    }

    pub fn audience(&self) -> &[u64] {
        &self.audience
    }
}

/// Build the interaction sets for a corpus. A user interacts with a trendy
/// hashtag when one of their records contains it as a token, with or without
/// the '#' symbol, or when the record retweets/quotes/replies to a corpus
/// tweet whose text contains it. References to tweets outside the corpus
/// contribute nothing.
pub fn build_interactions(
    corpus: &Corpus,
    index: &HashtagIndex,
    stopwords: &StopwordSet,
) -> InteractionSets {
    // Trendy mentions per record, in record order.
    let mentions: Vec<Vec<usize>> = corpus
        .records()
        .par_iter()
        .map(|r| {
            let mut found: BTreeSet<usize> = BTreeSet::new();
            for token in tokenize(&r.text, stopwords) {
                let content = token.strip_prefix('#').unwrap_or(&token);
                if let Some(t) = index.position(content) {
                    found.insert(t);
                }
            }
            found.into_iter().collect()
        })
        .collect();

    let position_of: BTreeMap<&str, usize> = corpus
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| (r.tweet_id.as_str(), i))
        .collect();

    let mut sets: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (i, record) in corpus.records().iter().enumerate() {
        let user_set = sets.entry(record.user_id.clone()).or_default();
        user_set.extend(&mentions[i]);
        if let Some(referenced) = &record.referenced_tweet_id {
            if let Some(&j) = position_of.get(referenced.as_str()) {
                user_set.extend(&mentions[j]);
            }
        }
    }

    let sets = sets
        .into_iter()
        .map(|(u, s)| (u, s.into_iter().collect()))
        .collect();
    InteractionSets::from_sets(sets, index.len())
}

/// One undirected weighted edge, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: u64,
}

/// The weighted undirected graph over trendy hashtags. Edge weights count
/// the users shared by both endpoints' audiences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticNetwork {
    node_count: usize,
    /// Sorted by (i, j).
    edges: Vec<Edge>,
    audience: Vec<u64>,
    root: Option<usize>,
    /// Per-component most-popular node, ascending; includes the root's
    /// component. Empty until [`assign_root`] runs.
    local_roots: Vec<usize>,
}

impl SemanticNetwork {
    pub fn new(node_count: usize, mut edges: Vec<Edge>, audience: Vec<u64>) -> Self {
        assert_eq!(node_count, audience.len());
        edges.sort_by_key(|e| (e.i, e.j));
        for e in &edges {
            assert!(e.i < e.j && e.j < node_count, "bad edge ({}, {})", e.i, e.j);
        }
        SemanticNetwork {
            node_count,
            edges,
            audience,
            root: None,
            local_roots: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn audience(&self) -> &[u64] {
        &self.audience
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn local_roots(&self) -> &[usize] {
        &self.local_roots
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Sum of incident edge weights per node.
    pub fn weighted_degrees(&self) -> Vec<u64> {
        let mut degrees = vec![0u64; self.node_count];
        for e in &self.edges {
            degrees[e.i] += e.weight;
            degrees[e.j] += e.weight;
        }
        degrees
    }

    /// Neighbor lists with weights, ascending neighbor index per node.
    pub fn adjacency(&self) -> Vec<Vec<(usize, u64)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for e in &self.edges {
            adj[e.i].push((e.j, e.weight));
            adj[e.j].push((e.i, e.weight));
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(n, _)| n);
        }
        adj
    }
}

/// Project interaction sets along the hashtags: the weight of edge (i, j) is
/// the number of users whose set contains both i and j. Per-user pair counts
/// are accumulated shard-wise and merged by integer addition, so the result
/// does not depend on worker count.
pub fn project(inter: &InteractionSets) -> SemanticNetwork {
    let pair_counts: BTreeMap<(usize, usize), u64> = inter
        .sets
        .par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<(usize, usize), u64>, (_, set)| {
            for a in 0..set.len() {
                for b in a + 1..set.len() {
                    *acc.entry((set[a], set[b])).or_insert(0) += 1;
                }
            }
            acc
        })
        .reduce(BTreeMap::new, |mut left, right| {
            for (pair, count) in right {
                *left.entry(pair).or_insert(0) += count;
            }
            left
        });

    let edges = pair_counts
        .into_iter()
        .map(|((i, j), weight)| Edge { i, j, weight })
        .collect();
    SemanticNetwork::new(inter.node_count(), edges, inter.audience.clone())
}

/// Edge pruning policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruningPolicy {
    /// Keep every edge.
    None,
    /// Drop edges with weight strictly below the threshold.
    FlatCutoff { threshold: u64 },
    /// Keep a maximum-weight spanning tree per connected component.
    MaxSpanningTree,
}

impl FromStr for PruningPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(PruningPolicy::None),
            "mst" => Ok(PruningPolicy::MaxSpanningTree),
            other => {
                let threshold = other
                    .strip_prefix("cutoff:")
                    .ok_or_else(|| format!("unknown pruning policy {other:?}"))?
                    .parse::<u64>()
                    .map_err(|e| format!("bad cutoff threshold: {e}"))?;
                if threshold < 1 {
                    return Err("cutoff threshold must be at least 1".into());
                }
                Ok(PruningPolicy::FlatCutoff { threshold })
            }
        }
    }
}

impl std::fmt::Display for PruningPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PruningPolicy::None => write!(f, "none"),
            PruningPolicy::FlatCutoff { threshold } => write!(f, "cutoff:{threshold}"),
            PruningPolicy::MaxSpanningTree => write!(f, "mst"),
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Greedy maximum spanning forest: edges considered by weight descending,
/// ties broken by (i, j) ascending, so the result is deterministic.
fn max_spanning_forest(node_count: usize, edges: &[Edge]) -> Vec<Edge> {
    let mut order: Vec<&Edge> = edges.iter().collect();
    order.sort_by(|a, b| {
        b.weight
            .cmp(&a.weight)
            .then_with(|| a.i.cmp(&b.i))
            .then_with(|| a.j.cmp(&b.j))
    });
    let mut forest = UnionFind::new(node_count);
    order
        .into_iter()
        .filter(|e| forest.union(e.i, e.j))
        .copied()
        .collect()
}

/// Apply a pruning policy. `None` is the identity; the other policies return
/// a network with the root assignment cleared, since components may change.
pub fn prune(net: &SemanticNetwork, policy: PruningPolicy) -> SemanticNetwork {
    match policy {
        PruningPolicy::None => net.clone(),
        PruningPolicy::FlatCutoff { threshold } => SemanticNetwork::new(
            net.node_count,
            net.edges
                .iter()
                .filter(|e| e.weight >= threshold)
                .copied()
                .collect(),
            net.audience.clone(),
        ),
        PruningPolicy::MaxSpanningTree => SemanticNetwork::new(
            net.node_count,
            max_spanning_forest(net.node_count, &net.edges),
            net.audience.clone(),
        ),
    }
}

/// Designate the most popular hashtag (maximum audience, ties to the lower
/// index) as the root, and record a local root per connected component.
pub fn assign_root(net: &SemanticNetwork) -> Result<SemanticNetwork> {
    if net.node_count == 0 {
        return Err(Error::EmptyNetwork);
    }
    let global = (0..net.node_count)
        .max_by(|&a, &b| net.audience[a].cmp(&net.audience[b]).then(b.cmp(&a)))
        .expect("nonempty");

    let mut components = UnionFind::new(net.node_count);
    for e in &net.edges {
        components.union(e.i, e.j);
    }
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for node in 0..net.node_count {
        let comp = components.find(node);
        let entry = best.entry(comp).or_insert(node);
        if net.audience[node] > net.audience[*entry] {
            *entry = node;
        }
    }
    let mut local_roots: Vec<usize> = best.into_values().collect();
    local_roots.sort_unstable();

    let mut rooted = net.clone();
    rooted.root = Some(global);
    rooted.local_roots = local_roots;
    Ok(rooted)
}

/// Graph export formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    GraphMl,
    Dot,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "graphml" => Ok(ExportFormat::GraphMl),
            "dot" => Ok(ExportFormat::Dot),
            other => Err(format!("unknown export format {other:?}")),
        }
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            other => out.push(other),
        }
    }
    out
}

/// Render the network in the requested format. Nodes carry the hashtag
/// label, audience count and weighted degree; edges carry their weight.
/// Node and edge order follow the index, so output is deterministic.
pub fn render_graph(net: &SemanticNetwork, index: &HashtagIndex, format: ExportFormat) -> Result<String> {
    if index.len() != net.node_count {
        return Err(Error::MisalignedInputs {
            reason: format!(
                "index has {} hashtags but network has {} nodes",
                index.len(),
                net.node_count
            ),
        });
    }
    let degrees = net.weighted_degrees();
    let mut out = String::new();
    match format {
        ExportFormat::GraphMl => {
            out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
            out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
            out.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
            out.push_str("  <key id=\"audience\" for=\"node\" attr.name=\"audience\" attr.type=\"long\"/>\n");
            out.push_str("  <key id=\"wdegree\" for=\"node\" attr.name=\"wdegree\" attr.type=\"long\"/>\n");
            out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n");
            out.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
            for i in 0..net.node_count {
                let _ = writeln!(
                    out,
                    "    <node id=\"n{i}\"><data key=\"label\">{}</data><data key=\"audience\">{}</data><data key=\"wdegree\">{}</data></node>",
                    xml_escape(index.name(i)),
                    net.audience[i],
                    degrees[i]
                );
            }
            for (k, e) in net.edges.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "    <edge id=\"e{k}\" source=\"n{}\" target=\"n{}\"><data key=\"weight\">{}</data></edge>",
                    e.i, e.j, e.weight
                );
            }
            out.push_str("  </graph>\n</graphml>\n");
        }
        ExportFormat::Dot => {
            out.push_str("graph semantic {\n");
            for i in 0..net.node_count {
                let _ = writeln!(
                    out,
                    "  n{i} [label=\"{}\", audience={}, wdegree={}];",
                    index.name(i).replace('"', "\\\""),
                    net.audience[i],
                    degrees[i]
                );
            }
            for e in &net.edges {
                let _ = writeln!(out, "  n{} -- n{} [weight={}];", e.i, e.j, e.weight);
            }
            out.push_str("}\n");
        }
    }
    Ok(out)
}

/// Write the rendered graph to a file.
pub fn export_graph(
    net: &SemanticNetwork,
    index: &HashtagIndex,
    format: ExportFormat,
    path: &Path,
) -> Result<()> {
    let rendered = render_graph(net, index, format)?;
    std::fs::write(path, rendered).map_err(|e| Error::io(path, e))
}

const NETWORK_MAGIC: &str = "#semnet-network\tv1";
const INTERACTIONS_MAGIC: &str = "#semnet-interactions\tv1";

/// Serialize index labels, audiences, roots and edges into the canonical
/// text form used both for the network artifact file and for content
/// hashing.
pub fn network_to_string(net: &SemanticNetwork, index: &HashtagIndex) -> Result<String> {
    if index.len() != net.node_count {
        return Err(Error::MisalignedInputs {
            reason: "index size does not match network node count".into(),
        });
    }
    let mut out = String::new();
    let _ = writeln!(out, "{NETWORK_MAGIC}");
    let _ = writeln!(out, "#n\t{}", net.node_count);
    match net.root {
        Some(r) => {
            let _ = writeln!(out, "#root\t{r}");
        }
        None => {
            let _ = writeln!(out, "#root\t-");
        }
    }
    if net.local_roots.is_empty() {
        let _ = writeln!(out, "#local_roots\t-");
    } else {
        let list: Vec<String> = net.local_roots.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "#local_roots\t{}", list.join(","));
    }
    for i in 0..net.node_count {
        let _ = writeln!(out, "N\t{i}\t{}\t{}", index.name(i), net.audience[i]);
    }
    for e in &net.edges {
        let _ = writeln!(out, "E\t{}\t{}\t{}", e.i, e.j, e.weight);
    }
    Ok(out)
}

/// Hex SHA-256 of the canonical network serialization; recorded in
/// enrichment headers so downstream stages can detect a stale network.
pub fn network_content_hash(net: &SemanticNetwork, index: &HashtagIndex) -> Result<String> {
    let text = network_to_string(net, index)?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn write_network(net: &SemanticNetwork, index: &HashtagIndex, path: &Path) -> Result<()> {
    let text = network_to_string(net, index)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Read a network file written by [`write_network`].
pub fn read_network(path: &Path) -> Result<(SemanticNetwork, HashtagIndex)> {
    let malformed = |reason: String| Error::MalformedFile {
        what: "network",
        path: path.to_path_buf(),
        reason,
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(NETWORK_MAGIC) {
        return Err(malformed("bad magic line".into()));
    }
    let n: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("#n\t"))
        .ok_or_else(|| malformed("missing #n header".into()))?
        .parse()
        .map_err(|e| malformed(format!("bad node count: {e}")))?;
    let root_field = lines
        .next()
        .and_then(|l| l.strip_prefix("#root\t"))
        .ok_or_else(|| malformed("missing #root header".into()))?;
    let root = match root_field {
        "-" => None,
        v => Some(v.parse::<usize>().map_err(|e| malformed(format!("bad root: {e}")))?),
    };
    let local_field = lines
        .next()
        .and_then(|l| l.strip_prefix("#local_roots\t"))
        .ok_or_else(|| malformed("missing #local_roots header".into()))?;
    let local_roots: Vec<usize> = match local_field {
        "-" => Vec::new(),
        v => v
            .split(',')
            .map(|x| x.parse::<usize>().map_err(|e| malformed(format!("bad local root: {e}"))))
            .collect::<Result<_>>()?,
    };

    let mut labels = vec![String::new(); n];
    let mut audience = vec![0u64; n];
    let mut seen_nodes = 0usize;
    let mut edges = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            ["N", i, label, aud] => {
                let i: usize = i.parse().map_err(|e| malformed(format!("bad node index: {e}")))?;
                if i >= n {
                    return Err(malformed(format!("node index {i} out of range")));
                }
                labels[i] = label.to_string();
                audience[i] = aud
                    .parse()
                    .map_err(|e| malformed(format!("bad audience: {e}")))?;
                seen_nodes += 1;
            }
            ["E", i, j, w] => {
                let i: usize = i.parse().map_err(|e| malformed(format!("bad edge: {e}")))?;
                let j: usize = j.parse().map_err(|e| malformed(format!("bad edge: {e}")))?;
                let weight: u64 = w.parse().map_err(|e| malformed(format!("bad weight: {e}")))?;
                if i >= j || j >= n || weight == 0 {
                    return Err(malformed(format!("invalid edge ({i}, {j}, {weight})")));
                }
                edges.push(Edge { i, j, weight });
            }
            _ => return Err(malformed(format!("unrecognized line {line:?}"))),
        }
    }
    if seen_nodes != n {
        return Err(malformed(format!("expected {n} node rows, found {seen_nodes}")));
    }
    let mut net = SemanticNetwork::new(n, edges, audience);
    net.root = root;
    net.local_roots = local_roots;
    Ok((net, HashtagIndex::from_ordered(labels)))
}

/// Write interaction sets: one `S<TAB>user<TAB>i,j,k` row per user in
/// ascending user order.
pub fn write_interactions(inter: &InteractionSets, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(out, "{INTERACTIONS_MAGIC}")?;
        writeln!(out, "#n\t{}", inter.node_count())?;
        for (user, set) in inter.iter() {
            let list: Vec<String> = set.iter().map(ToString::to_string).collect();
            writeln!(out, "S\t{user}\t{}", list.join(","))?;
        }
        out.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

pub fn read_interactions(path: &Path) -> Result<InteractionSets> {
    let malformed = |reason: String| Error::MalformedFile {
        what: "interactions",
        path: path.to_path_buf(),
        reason,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let magic = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .ok_or_else(|| malformed("empty file".into()))?;
    if magic != INTERACTIONS_MAGIC {
        return Err(malformed("bad magic line".into()));
    }
    let n: usize = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .and_then(|l| l.strip_prefix("#n\t").map(str::to_string))
        .ok_or_else(|| malformed("missing #n header".into()))?
        .parse()
        .map_err(|e| malformed(format!("bad node count: {e}")))?;

    let mut sets: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let ["S", user, list] = fields.as_slice() else {
            return Err(malformed(format!("unrecognized line {line:?}")));
        };
        let set: Vec<usize> = if list.is_empty() {
            Vec::new()
        } else {
            list.split(',')
                .map(|x| x.parse::<usize>().map_err(|e| malformed(format!("bad index: {e}"))))
                .collect::<Result<_>>()?
        };
        if set.iter().any(|&t| t >= n) || set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(malformed(format!("invalid set for user {user}")));
        }
        if sets.insert(user.to_string(), set).is_some() {
            return Err(malformed(format!("duplicate user {user}")));
        }
    }
    Ok(InteractionSets::from_sets(sets, n))
}
