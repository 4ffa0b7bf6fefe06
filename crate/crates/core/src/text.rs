//! Text preprocessing: URL removal, lowercasing, hashtag-preserving
//! tokenization, stopword filtering, hashtag counting and the mean-cutoff
//! selection of trendy hashtags.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Snapshot of the bundled French stopword list (one lowercase word per line).
const BUNDLED_FRENCH: &str = include_str!("../data/stopwords_fr.txt");

/// A set of lowercase stopwords.
#[derive(Debug, Clone, Default)]
pub struct StopwordSet {
    words: HashSet<String>,
}

impl StopwordSet {
    pub fn empty() -> Self {
        StopwordSet::default()
    }

    /// The French stopword snapshot checked into the crate.
    pub fn bundled_french() -> Self {
        Self::from_lines(BUNDLED_FRENCH)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_lines(&text))
    }

    fn from_lines(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .map(str::to_string)
            .collect();
        StopwordSet { words }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopwordSet {
    fn from_iter<T: IntoIterator<Item = S>>(iter: T) -> Self {
        StopwordSet {
            words: iter.into_iter().map(Into::into).collect(),
        }
    }
}

/// A tokenized tweet: lowercase tokens, hashtags keep a single leading '#'.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedTweet {
    pub tweet_id: String,
    pub tokens: Vec<String>,
}

/// Delete URL substrings: anything from `http://`, `https://` or `www.`
/// up to the next whitespace character.
fn strip_urls(text: &str) -> String {
    const MARKERS: [&str; 3] = ["http://", "https://", "www."];
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = MARKERS.iter().filter_map(|m| rest.find(m)).min() {
        out.push_str(&rest[..start]);
        let tail = &rest[start..];
        let end = tail.find(char::is_whitespace).unwrap_or(tail.len());
        rest = &tail[end..];
    }
    out.push_str(rest);
    out
}

/// The word, without a leading '#' if the token is a hashtag.
fn token_content(token: &str) -> &str {
    token.strip_prefix('#').unwrap_or(token)
}

/// Tokenize one text: lowercase, strip URLs, split on punctuation (a '#'
/// always starts a new token and is kept), drop digit-only tokens and
/// stopwords. Accents are preserved. The stopword check ignores a leading
/// '#' so that e.g. "#le" is dropped along with "le".
pub fn tokenize(text: &str, stopwords: &StopwordSet) -> Vec<String> {
    let cleaned = strip_urls(&text.to_lowercase());
    let mut tokens = Vec::new();
    let mut current = String::new();

    fn flush(current: &mut String, tokens: &mut Vec<String>, stopwords: &StopwordSet) {
        if !current.is_empty() {
            let content = token_content(current);
            let keep = !content.is_empty()
                && !content.chars().all(char::is_numeric)
                && !stopwords.contains(content);
            if keep {
                tokens.push(std::mem::take(current));
            } else {
                current.clear();
            }
        }
    }

    for ch in cleaned.chars() {
        if ch == '#' {
            flush(&mut current, &mut tokens, stopwords);
            current.push('#');
        } else if ch.is_alphanumeric() {
            current.push(ch);
        } else {
            flush(&mut current, &mut tokens, stopwords);
        }
    }
    flush(&mut current, &mut tokens, stopwords);
    tokens
}

/// Tokenize every record of a corpus, in record order.
pub fn tokenize_corpus(corpus: &Corpus, stopwords: &StopwordSet) -> Vec<TokenizedTweet> {
    corpus
        .records()
        .par_iter()
        .map(|r| TokenizedTweet {
            tweet_id: r.tweet_id.clone(),
            tokens: tokenize(&r.text, stopwords),
        })
        .collect()
}

/// Per-hashtag occurrence counts. A hashtag occurs in a tweet when the
/// tweet's tokens contain `#name` at least once; repeating it in the same
/// tweet does not increase the count. Keys are stored without the '#'.
#[derive(Debug, Clone, PartialEq)]
pub struct HashtagStats {
    pub counts: BTreeMap<String, u64>,
    pub mean_count: f64,
}

impl HashtagStats {
    fn from_counts(counts: BTreeMap<String, u64>) -> Self {
        let mean_count = if counts.is_empty() {
            0.0
        } else {
            counts.values().sum::<u64>() as f64 / counts.len() as f64
        };
        HashtagStats { counts, mean_count }
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Count per-tweet hashtag occurrences over a whole corpus.
pub fn count_hashtags(corpus: &Corpus, stopwords: &StopwordSet) -> HashtagStats {
    let counts = corpus
        .records()
        .par_iter()
        .map(|r| {
            let mut seen: BTreeSet<String> = BTreeSet::new();
            for token in tokenize(&r.text, stopwords) {
                if let Some(name) = token.strip_prefix('#') {
                    seen.insert(name.to_string());
                }
            }
            let mut local: BTreeMap<String, u64> = BTreeMap::new();
            for name in seen {
                local.insert(name, 1);
            }
            local
        })
        .reduce(BTreeMap::new, |mut acc, local| {
            for (name, c) in local {
                *acc.entry(name).or_insert(0) += c;
            }
            acc
        });
    HashtagStats::from_counts(counts)
}

/// The ordered set of trendy hashtags. Index i maps to `hashtags[i]`;
/// `positions` is the exact inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct HashtagIndex {
    hashtags: Vec<String>,
    positions: HashMap<String, usize>,
}

impl HashtagIndex {
    /// Build from an explicit ordering (callers must supply distinct names).
    pub fn from_ordered(hashtags: Vec<String>) -> Self {
        let positions = hashtags
            .iter()
            .enumerate()
            .map(|(i, h)| (h.clone(), i))
            .collect();
        HashtagIndex { hashtags, positions }
    }

    pub fn len(&self) -> usize {
        self.hashtags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hashtags.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.hashtags[index]
    }

    pub fn names(&self) -> &[String] {
        &self.hashtags
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.positions.get(name).copied()
    }
}

/// Keep hashtags whose count is at least the mean count, ordered by count
/// descending with lexicographic tie-breaking.
pub fn select_trendy(stats: &HashtagStats) -> Result<HashtagIndex> {
    if stats.is_empty() {
        return Err(Error::NoHashtags);
    }
    let mut kept: Vec<(&String, u64)> = stats
        .counts
        .iter()
        .filter(|(_, &c)| c as f64 >= stats.mean_count)
        .map(|(name, &c)| (name, c))
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(HashtagIndex::from_ordered(
        kept.into_iter().map(|(name, _)| name.clone()).collect(),
    ))
}

const STATS_MAGIC: &str = "#semnet-hashtag-stats\tv1";

/// Write a stats file: magic line, mean header, then one `hashtag<TAB>count`
/// row per hashtag ordered by count descending (ties lexicographic), so the
/// leading rows of the file are exactly the trendy index order.
pub fn write_stats(stats: &HashtagStats, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut rows: Vec<(&String, u64)> = stats.counts.iter().map(|(n, &c)| (n, c)).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    (|| -> std::io::Result<()> {
        writeln!(out, "{STATS_MAGIC}")?;
        writeln!(out, "#mean\t{}", stats.mean_count)?;
        for (name, count) in rows {
            writeln!(out, "{name}\t{count}")?;
        }
        out.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

/// Read a stats file written by [`write_stats`]. The mean is recomputed from
/// the rows and checked against the header as a light integrity check.
pub fn read_stats(path: &Path) -> Result<HashtagStats> {
    let malformed = |reason: String| Error::MalformedFile {
        what: "hashtag stats",
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
    if magic != STATS_MAGIC {
        return Err(malformed(format!("bad magic line {magic:?}")));
    }
    let mean_line = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .ok_or_else(|| malformed("missing mean header".into()))?;
    let declared_mean: f64 = mean_line
        .strip_prefix("#mean\t")
        .ok_or_else(|| malformed(format!("bad mean header {mean_line:?}")))?
        .parse()
        .map_err(|e| malformed(format!("bad mean value: {e}")))?;

    let mut counts = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let (name, count) = line
            .split_once('\t')
            .ok_or_else(|| malformed(format!("row {} is not tab-separated", i + 3)))?;
        let count: u64 = count
            .parse()
            .map_err(|e| malformed(format!("row {}: bad count: {e}", i + 3)))?;
        if count == 0 {
            return Err(malformed(format!("row {}: zero count", i + 3)));
        }
        if counts.insert(name.to_string(), count).is_some() {
            return Err(malformed(format!("row {}: duplicate hashtag {name}", i + 3)));
        }
    }
    let stats = HashtagStats::from_counts(counts);
    if (stats.mean_count - declared_mean).abs() > 1e-9 {
        return Err(malformed(format!(
            "declared mean {declared_mean} does not match rows (recomputed {})",
            stats.mean_count
        )));
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, InteractionKind, TweetRecord};
    use proptest::prelude::*;

    fn post(id: &str, user: &str, text: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: id.into(),
            user_id: user.into(),
            text: text.into(),
            interaction_kind: InteractionKind::Post,
            referenced_tweet_id: None,
            emotions: None,
        }
    }

    #[test]
    fn tokenize_reference_example() {
        let tokens = tokenize("Vote! #France2022 https://t.co/xyz 123", &StopwordSet::empty());
        assert_eq!(tokens, vec!["vote", "#france2022"]);
    }

    #[test]
    fn tokenize_empty_input() {
        assert!(tokenize("", &StopwordSet::empty()).is_empty());
    }

    #[test]
    fn tokenize_drops_stopwords() {
        let sw: StopwordSet = ["le"].into_iter().collect();
        assert_eq!(tokenize("le vote", &sw), vec!["vote"]);
        // The check ignores a leading '#'.
        assert_eq!(tokenize("#le vote", &sw), vec!["vote"]);
    }

    #[test]
    fn tokenize_preserves_accents() {
        let tokens = tokenize("Liberté et Nucléaire", &StopwordSet::bundled_french());
        assert_eq!(tokens, vec!["liberté", "nucléaire"]);
    }

    #[test]
    fn tokenize_splits_on_apostrophes_and_mid_word_hashes() {
        let sw = StopwordSet::bundled_french();
        assert_eq!(tokenize("j'aime la france", &sw), vec!["aime", "france"]);
        assert_eq!(
            tokenize("abc#def ##x", &StopwordSet::empty()),
            vec!["abc", "#def", "#x"]
        );
    }

    #[test]
    fn url_markers_are_removed_mid_word() {
        let tokens = tokenize("voir www.site.fr/page puis http://a.b!", &StopwordSet::empty());
        assert_eq!(tokens, vec!["voir", "puis"]);
    }

    #[test]
    fn bundled_french_list_is_loaded() {
        let sw = StopwordSet::bundled_french();
        assert!(sw.contains("le"));
        assert!(sw.contains("être") == false);
        assert!(sw.len() > 100);
    }

    fn tiny_corpus(texts: &[&str]) -> Corpus {
        let records = texts
            .iter()
            .enumerate()
            .map(|(i, t)| post(&format!("t{i}"), &format!("u{i}"), t))
            .collect();
        Corpus::from_records(records).unwrap()
    }

    #[test]
    fn count_hashtags_per_tweet_presence() {
        let corpus = tiny_corpus(&["#a #a", "#a #b", "#b"]);
        let stats = count_hashtags(&corpus, &StopwordSet::empty());
        assert_eq!(stats.counts.get("a"), Some(&2));
        assert_eq!(stats.counts.get("b"), Some(&2));
        assert_eq!(stats.mean_count, 2.0);
    }

    #[test]
    fn count_hashtags_empty() {
        let corpus = tiny_corpus(&["rien ici", "pas de tags"]);
        let stats = count_hashtags(&corpus, &StopwordSet::empty());
        assert!(stats.is_empty());
        assert_eq!(stats.mean_count, 0.0);
    }

    fn stats_of(pairs: &[(&str, u64)]) -> HashtagStats {
        let counts: BTreeMap<String, u64> =
            pairs.iter().map(|(n, c)| (n.to_string(), *c)).collect();
        HashtagStats::from_counts(counts)
    }

    #[test]
    fn select_trendy_mean_cutoff() {
        let stats = stats_of(&[("x", 5), ("y", 1), ("z", 3)]);
        assert_eq!(stats.mean_count, 3.0);
        let index = select_trendy(&stats).unwrap();
        assert_eq!(index.names(), &["x".to_string(), "z".to_string()]);
        assert_eq!(index.position("z"), Some(1));
        assert_eq!(index.position("y"), None);
    }

    #[test]
    fn select_trendy_single_hashtag() {
        let index = select_trendy(&stats_of(&[("x", 7)])).unwrap();
        assert_eq!(index.names(), &["x".to_string()]);
    }

    #[test]
    fn select_trendy_lexicographic_ties() {
        let index = select_trendy(&stats_of(&[("b", 2), ("a", 2)])).unwrap();
        assert_eq!(index.names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn select_trendy_rejects_empty() {
        assert!(matches!(select_trendy(&stats_of(&[])), Err(Error::NoHashtags)));
    }

    #[test]
    fn stats_file_roundtrip() {
        let stats = stats_of(&[("liberté", 5), ("a", 2), ("b", 2)]);
        let mut path = std::env::temp_dir();
        path.push(format!("semnet-stats-{}.tsv", std::process::id()));
        write_stats(&stats, &path).unwrap();
        let read = read_stats(&path).unwrap();
        assert_eq!(read, stats);
        std::fs::remove_file(path).unwrap();
    }

    fn valid_token() -> impl Strategy<Value = String> {
        let word = "[a-zéàç][a-z0-9éàç]{0,7}";
        (proptest::bool::ANY, word.prop_filter("stopword", |w| {
            !StopwordSet::bundled_french().contains(w)
        }))
            .prop_map(|(hash, w)| if hash { format!("#{w}") } else { w })
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(tokens in proptest::collection::vec(valid_token(), 0..12)) {
            let sw = StopwordSet::bundled_french();
            let joined = tokens.join(" ");
            prop_assert_eq!(tokenize(&joined, &sw), tokens);
        }

        #[test]
        fn trendy_selection_respects_prefilter_mean(
            counts in proptest::collection::btree_map("[a-z]{1,4}", 1u64..50, 1..20)
        ) {
            let stats = HashtagStats::from_counts(counts.clone());
            let index = select_trendy(&stats).unwrap();
            prop_assert!(index.len() <= counts.len());
            prop_assert!(!index.is_empty());
            for name in index.names() {
                prop_assert!(counts[name] as f64 >= stats.mean_count);
            }
        }
    }
}
