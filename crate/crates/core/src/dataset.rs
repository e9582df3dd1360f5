//! Interaction-log ingestion, dense id assignment and reproducible splits.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type UserId = usize;
pub type ItemId = usize;
/// A `(user, item)` pair with dense ids.
pub type Pair = (UserId, ItemId);

/// Layout of a raw interaction file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IngestFormat {
    /// `<user> <item> [ignored...]`, whitespace separated.
    TsvPairs,
    /// `<user>,<item>[,ignored...]`.
    CsvPairs,
    /// One user per line: `<count> <item> <item> ...`; the user token is the
    /// zero-based line index among non-empty lines.
    UserLists,
}

impl std::str::FromStr for IngestFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" | "tsv_pairs" => Ok(IngestFormat::TsvPairs),
            "csv" | "csv_pairs" => Ok(IngestFormat::CsvPairs),
            "lists" | "user_lists" => Ok(IngestFormat::UserLists),
            other => Err(Error::config("format", format!("unknown format `{other}`"))),
        }
    }
}

/// Deduplicated raw interactions, still keyed by string tokens.
#[derive(Debug, Clone, Default)]
pub struct InteractionLog {
    pub records: Vec<(String, String)>,
    pub source_path: String,
    pub duplicates_dropped: usize,
}

impl InteractionLog {
    /// Builds a log from in-memory records, collapsing duplicates (first occurrence wins).
    pub fn from_records<I, U, T>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (U, T)>,
        U: Into<String>,
        T: Into<String>,
    {
        let mut log = InteractionLog::default();
        let mut seen = HashSet::new();
        for (line_no, (u, i)) in records.into_iter().enumerate() {
            log.push(u.into(), i.into(), line_no + 1, &mut seen)?;
        }
        Ok(log)
    }

    fn push(
        &mut self,
        user: String,
        item: String,
        line_no: usize,
        seen: &mut HashSet<(String, String)>,
    ) -> Result<()> {
        if user.is_empty() || item.is_empty() {
            return Err(Error::MalformedLine {
                line_no,
                reason: "empty token".into(),
            });
        }
        if seen.insert((user.clone(), item.clone())) {
            self.records.push((user, item));
        } else {
            self.duplicates_dropped += 1;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn distinct_users(&self) -> usize {
        self.records.iter().map(|(u, _)| u).collect::<HashSet<_>>().len()
    }

    pub fn distinct_items(&self) -> usize {
        self.records.iter().map(|(_, i)| i).collect::<HashSet<_>>().len()
    }
}

/// Reads an interaction file.
pub fn ingest(path: impl AsRef<Path>, format: IngestFormat) -> Result<InteractionLog> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = File::open(path)?;
    let mut log = ingest_reader(file, format)?;
    log.source_path = path.display().to_string();
    Ok(log)
}

/// Same as [`ingest`] over any reader.
pub fn ingest_reader<R: Read>(reader: R, format: IngestFormat) -> Result<InteractionLog> {
    let mut log = InteractionLog::default();
    let mut seen = HashSet::new();
    match format {
        IngestFormat::TsvPairs => {
            for (idx, line) in BufReader::new(reader).lines().enumerate() {
                let line = line?;
                let mut fields = line.split_whitespace();
                let Some(user) = fields.next() else { continue };
                let Some(item) = fields.next() else {
                    return Err(Error::MalformedLine {
                        line_no: idx + 1,
                        reason: "expected at least two fields".into(),
                    });
                };
                log.push(user.to_owned(), item.to_owned(), idx + 1, &mut seen)?;
            }
        }
        IngestFormat::CsvPairs => {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .trim(csv::Trim::All)
                .from_reader(reader);
            for record in rdr.records() {
                let record = record?;
                let line_no = record.position().map_or(0, |p| p.line() as usize);
                if record.len() == 1 && record[0].is_empty() {
                    continue;
                }
                if record.len() < 2 {
                    return Err(Error::MalformedLine {
                        line_no,
                        reason: "expected at least two fields".into(),
                    });
                }
                log.push(record[0].to_owned(), record[1].to_owned(), line_no, &mut seen)?;
            }
        }
        IngestFormat::UserLists => {
            let mut user = 0usize;
            for (idx, line) in BufReader::new(reader).lines().enumerate() {
                let line = line?;
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.is_empty() {
                    continue;
                }
                let declared: usize = fields[0].parse().map_err(|_| Error::MalformedLine {
                    line_no: idx + 1,
                    reason: format!("leading count `{}` is not an integer", fields[0]),
                })?;
                if declared != fields.len() - 1 {
                    return Err(Error::MalformedLine {
                        line_no: idx + 1,
                        reason: format!("declared {declared} items, found {}", fields.len() - 1),
                    });
                }
                let token = user.to_string();
                for item in &fields[1..] {
                    log.push(token.clone(), (*item).to_owned(), idx + 1, &mut seen)?;
                }
                user += 1;
            }
        }
    }
    Ok(log)
}

/// Token ↔ dense id bijections. Ids follow first appearance in the log.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMaps {
    pub user_tokens: Vec<String>,
    pub item_tokens: Vec<String>,
    user_index: HashMap<String, UserId>,
    item_index: HashMap<String, ItemId>,
}

impl IdMaps {
    fn intern(tokens: &mut Vec<String>, index: &mut HashMap<String, usize>, tok: &str) -> usize {
        if let Some(&id) = index.get(tok) {
            return id;
        }
        let id = tokens.len();
        tokens.push(tok.to_owned());
        index.insert(tok.to_owned(), id);
        id
    }

    pub fn user_id(&self, token: &str) -> Option<UserId> {
        self.user_index.get(token).copied()
    }

    pub fn item_id(&self, token: &str) -> Option<ItemId> {
        self.item_index.get(token).copied()
    }

    pub fn n_users(&self) -> usize {
        self.user_tokens.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_tokens.len()
    }

    /// Identity maps `"0".."n"` for data generated in memory.
    pub fn identity(n_users: usize, n_items: usize) -> Self {
        let mut maps = IdMaps::default();
        for u in 0..n_users {
            Self::intern(&mut maps.user_tokens, &mut maps.user_index, &u.to_string());
        }
        for i in 0..n_items {
            Self::intern(&mut maps.item_tokens, &mut maps.item_index, &i.to_string());
        }
        maps
    }
}

/// How interactions are distributed over splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Each user's interactions are split with the configured ratios.
    #[default]
    PerUser,
    /// One shuffle over all interactions.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_ratio: f64,
    pub val_ratio: f64,
    pub seed: u64,
    #[serde(default)]
    pub mode: SplitMode,
}

impl SplitConfig {
    pub fn new(train_ratio: f64, val_ratio: f64, seed: u64) -> Result<Self> {
        let cfg = SplitConfig {
            train_ratio,
            val_ratio,
            seed,
            mode: SplitMode::PerUser,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(Error::config("train_ratio", "must lie in (0, 1)"));
        }
        if !(self.val_ratio >= 0.0 && self.val_ratio < 1.0) {
            return Err(Error::config("val_ratio", "must lie in [0, 1)"));
        }
        if self.train_ratio + self.val_ratio >= 1.0 {
            return Err(Error::config("val_ratio", "train + val must be below 1"));
        }
        Ok(())
    }
}

/// Round half up. The small bias absorbs products like `0.05 * 10` that land
/// just below an exact half.
fn round_half_up(v: f64) -> usize {
    (v + 0.5 + 1e-9).floor().max(0.0) as usize
}

/// Immutable train/validation/test partition over dense ids.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionDataset {
    pub train: Vec<Pair>,
    pub val: Vec<Pair>,
    pub test: Vec<Pair>,
    pub id_maps: IdMaps,
    pub n_users: usize,
    pub n_items: usize,
    pub seed: u64,
}

/// JSON layout of a split manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitManifest {
    pub users: usize,
    pub items: usize,
    pub train: Vec<[usize; 2]>,
    pub val: Vec<[usize; 2]>,
    pub test: Vec<[usize; 2]>,
    pub seed: u64,
}

impl InteractionDataset {
    /// Wraps pre-split pairs that already use dense ids.
    pub fn from_splits(
        n_users: usize,
        n_items: usize,
        train: Vec<Pair>,
        val: Vec<Pair>,
        test: Vec<Pair>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(u, i) in train.iter().chain(&val).chain(&test) {
            if u >= n_users || i >= n_items {
                return Err(Error::config("pairs", format!("pair ({u}, {i}) out of range")));
            }
            if !seen.insert((u, i)) {
                return Err(Error::config("pairs", format!("pair ({u}, {i}) appears twice")));
            }
        }
        Ok(InteractionDataset {
            train,
            val,
            test,
            id_maps: IdMaps::identity(n_users, n_items),
            n_users,
            n_items,
            seed: 0,
        })
    }

    /// `(|U|, |I|, |train|)`.
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.n_users, self.n_items, self.train.len())
    }

    /// Per-user sorted item lists for one split.
    pub fn items_by_user(&self, pairs: &[Pair]) -> Vec<Vec<ItemId>> {
        let mut lists = vec![Vec::new(); self.n_users];
        for &(u, i) in pairs {
            lists[u].push(i);
        }
        for l in &mut lists {
            l.sort_unstable();
        }
        lists
    }

    pub fn to_manifest(&self) -> SplitManifest {
        let conv = |v: &[Pair]| v.iter().map(|&(u, i)| [u, i]).collect();
        SplitManifest {
            users: self.n_users,
            items: self.n_items,
            train: conv(&self.train),
            val: conv(&self.val),
            test: conv(&self.test),
            seed: self.seed,
        }
    }

    pub fn from_manifest(m: &SplitManifest) -> Result<Self> {
        let conv = |v: &[[usize; 2]]| v.iter().map(|p| (p[0], p[1])).collect();
        let mut ds = Self::from_splits(m.users, m.items, conv(&m.train), conv(&m.val), conv(&m.test))?;
        ds.seed = m.seed;
        Ok(ds)
    }
}

/// Splits a log into train/validation/test.
pub fn split(log: &InteractionLog, cfg: &SplitConfig) -> Result<InteractionDataset> {
    cfg.validate()?;
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut maps = IdMaps::default();
    let mut pairs = Vec::with_capacity(log.len());
    for (u, i) in &log.records {
        let uid = IdMaps::intern(&mut maps.user_tokens, &mut maps.user_index, u);
        let iid = IdMaps::intern(&mut maps.item_tokens, &mut maps.item_index, i);
        pairs.push((uid, iid));
    }
    let n_users = maps.n_users();
    let n_items = maps.n_items();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());

    match cfg.mode {
        SplitMode::PerUser => {
            let mut by_user: Vec<Vec<ItemId>> = vec![Vec::new(); n_users];
            for &(u, i) in &pairs {
                by_user[u].push(i);
            }
            for (u, mut items) in by_user.into_iter().enumerate() {
                let n = items.len();
                if n == 1 {
                    train.push((u, items[0]));
                    continue;
                }
                items.shuffle(&mut rng);
                let n_train = round_half_up(cfg.train_ratio * n as f64).clamp(1, n);
                let n_val = round_half_up(cfg.val_ratio * n as f64).min(n - n_train);
                train.extend(items[..n_train].iter().map(|&i| (u, i)));
                val.extend(items[n_train..n_train + n_val].iter().map(|&i| (u, i)));
                test.extend(items[n_train + n_val..].iter().map(|&i| (u, i)));
            }
        }
        SplitMode::Global => {
            let n = pairs.len();
            pairs.shuffle(&mut rng);
            let n_train = round_half_up(cfg.train_ratio * n as f64).min(n);
            let n_val = round_half_up(cfg.val_ratio * n as f64).min(n - n_train);
            train.extend_from_slice(&pairs[..n_train]);
            val.extend_from_slice(&pairs[n_train..n_train + n_val]);
            test.extend_from_slice(&pairs[n_train + n_val..]);
        }
    }

    if train.is_empty() {
        return Err(Error::DegenerateSplit("train"));
    }
    if cfg.val_ratio > 0.0 && val.is_empty() {
        return Err(Error::DegenerateSplit("val"));
    }
    if test.is_empty() {
        return Err(Error::DegenerateSplit("test"));
    }
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(InteractionDataset {
        train,
        val,
        test,
        id_maps: maps,
        n_users,
        n_items,
        seed: cfg.seed,
    })
}
