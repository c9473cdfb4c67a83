//! The preprocessed artifact directory a session serves from.
//!
//! Layout (all paths relative to the directory):
//!
//! ```text
//! manifest.json          format version + sha256 of every other file
//! corpus.json            Corpus
//! catalog.json           FeatureCatalog
//! features.lbfm          static FeatureMatrix (binary)
//! cube_{year,month,day}.lbfc
//! sentiment.json         level -> account -> period -> SentimentScore
//! lexicon.tsv
//! profiles/index.json    profile key -> file
//! profiles/pNNN.json     TopicModel
//! labels.jsonl           label audit log (mutable, not in the manifest)
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use labelbench_core::features::{self, io as fio, FeatureCatalog, FeatureMatrix, TemporalFeatureCube};
use labelbench_core::ingest::Corpus;
use labelbench_core::sentiment::{score_account, Lexicon, SentimentScore};
use labelbench_core::time::{Granularity, Level, Period, PeriodRange};
use labelbench_core::topics::{fit_lda, prepare_documents, LdaParams, TopicError, TopicModel};
use labelbench_core::Execution;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";
pub const LABELS_FILE: &str = "labels.jsonl";
const PROFILE_INDEX: &str = "profiles/index.json";

#[derive(Debug, thiserror::Error)]
pub enum ArtifactError {
    #[error("artifact file missing: {0}")]
    Missing(String),
    #[error("hash mismatch for {0}")]
    HashMismatch(String),
    #[error("corrupt artifact {file}: {reason}")]
    Corrupt { file: String, reason: String },
    #[error("{0}")]
    Build(String),
    #[error("i/o on {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(file: &Path) -> impl FnOnce(std::io::Error) -> ArtifactError + '_ {
    move |source| ArtifactError::Io { file: file.display().to_string(), source }
}

fn corrupt(file: &str, reason: impl ToString) -> ArtifactError {
    ArtifactError::Corrupt { file: file.to_string(), reason: reason.to_string() }
}

/// Per-account sentiment keyed by level name, account id, then period label
/// (or `"overall"`).
pub type SentimentTable = BTreeMap<Level, BTreeMap<String, BTreeMap<String, SentimentScore>>>;

/// Which LDA profiles to precompute: `K` values per level. `Year` means one
/// model per calendar year of the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSpec {
    pub levels: Vec<(Level, Vec<usize>)>,
}

impl ProfileSpec {
    pub fn none() -> ProfileSpec {
        ProfileSpec { levels: Vec::new() }
    }
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec { levels: vec![(Level::Overall, vec![10, 20]), (Level::Year, vec![10, 20])] }
    }
}

/// `overall:10,20;year:10,20`, or `none`.
impl FromStr for ProfileSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(ProfileSpec::none());
        }
        let mut levels = Vec::new();
        for part in s.split(';').filter(|p| !p.trim().is_empty()) {
            let (level, ks) = part.split_once(':').ok_or_else(|| format!("expected level:k[,k..] in {part:?}"))?;
            let level = match level.trim() {
                "overall" => Level::Overall,
                "year" => Level::Year,
                other => return Err(format!("profiles are built for overall or year, not {other:?}")),
            };
            let ks = ks
                .split(',')
                .map(|k| k.trim().parse::<usize>().ok().filter(|&k| k > 0).ok_or_else(|| format!("bad K {k:?}")))
                .collect::<Result<Vec<_>, _>>()?;
            levels.push((level, ks));
        }
        Ok(ProfileSpec { levels })
    }
}

/// Cache key of a topic model: `(level, window, K, alpha, beta, iterations,
/// seed)`.
pub fn profile_key(level: Level, window: Option<&PeriodRange>, p: &LdaParams) -> String {
    let w = window.map_or_else(|| "*".to_string(), PeriodRange::key);
    format!("{}|{}|k={}|alpha={}|beta={}|it={}|seed={}", level.name(), w, p.k, p.alpha, p.beta, p.iterations, p.seed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    /// Relative path -> lowercase hex sha256.
    pub files: BTreeMap<String, String>,
}

/// Everything a session needs, loaded into memory.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub corpus: Corpus,
    pub catalog: FeatureCatalog,
    pub matrix: FeatureMatrix,
    pub cubes: BTreeMap<Granularity, TemporalFeatureCube>,
    pub sentiment: SentimentTable,
    pub lexicon: Lexicon,
    pub profiles: BTreeMap<String, TopicModel>,
}

const LEVELS: [Level; 4] = [Level::Overall, Level::Year, Level::Month, Level::Day];

fn cube_file(g: Granularity) -> String {
    format!("cube_{}.lbfc", g.name())
}

impl Artifacts {
    /// Run the whole offline analysis.
    pub fn build(corpus: Corpus, lexicon: Lexicon, profiles: &ProfileSpec, exec: Execution) -> Result<Artifacts, ArtifactError> {
        let build_err = |e: &dyn std::fmt::Display| ArtifactError::Build(e.to_string());
        let matrix = features::extract_static_with(&corpus, &lexicon, exec).map_err(|e| build_err(&e))?;
        let mut cubes = BTreeMap::new();
        for g in Granularity::ALL {
            let cube = features::extract_temporal_with(&corpus, &lexicon, g, exec).map_err(|e| build_err(&e))?;
            cubes.insert(g, cube);
        }

        let ids = corpus.account_ids();
        let mut sentiment = SentimentTable::new();
        for level in LEVELS {
            let rows = exec.map_indexed(ids.len(), |i| score_account(&lexicon, corpus.tweets_of(&ids[i]), level));
            sentiment.insert(level, ids.iter().cloned().zip(rows).collect());
        }

        let mut models = BTreeMap::new();
        for (level, ks) in &profiles.levels {
            let windows: Vec<Option<PeriodRange>> = match level {
                Level::Year => Period::span(Granularity::Year, corpus.time_span.start, corpus.time_span.end)
                    .into_iter()
                    .map(|p| Some(PeriodRange::single(p)))
                    .collect(),
                _ => vec![None],
            };
            for window in windows {
                let docs = match prepare_documents(&corpus, *level, window) {
                    Ok(d) => d,
                    Err(TopicError::EmptyWindow) => continue,
                    Err(e) => return Err(build_err(&e)),
                };
                for &k in ks {
                    let params = LdaParams::with_k(k);
                    let model = fit_lda(&docs, &params).map_err(|e| build_err(&e))?;
                    models.insert(profile_key(*level, window.as_ref(), &params), model);
                }
            }
        }

        Ok(Artifacts { catalog: features::catalog(), corpus, matrix, cubes, sentiment, lexicon, profiles: models })
    }

    /// Write every file plus the manifest. Output bytes depend only on the
    /// artifact contents, so rewriting identical artifacts reproduces the
    /// manifest exactly.
    pub fn write(&self, dir: &Path) -> Result<Manifest, ArtifactError> {
        fs::create_dir_all(dir.join("profiles")).map_err(io_err(dir))?;
        for entry in fs::read_dir(dir.join("profiles")).map_err(io_err(dir))? {
            let path = entry.map_err(io_err(dir))?.path();
            if path.is_file() {
                fs::remove_file(&path).map_err(io_err(&path))?;
            }
        }

        let mut files = BTreeMap::new();
        let mut put = |rel: &str, bytes: Vec<u8>| -> Result<(), ArtifactError> {
            let path = dir.join(rel);
            fs::write(&path, &bytes).map_err(io_err(&path))?;
            files.insert(rel.to_string(), sha256_hex(&bytes));
            Ok(())
        };

        put("corpus.json", self.corpus.to_json())?;
        put("catalog.json", to_json(&self.catalog))?;
        put("features.lbfm", fio::encode_matrix(&self.matrix))?;
        for (g, cube) in &self.cubes {
            put(&cube_file(*g), fio::encode_cube(cube))?;
        }
        put("sentiment.json", to_json(&self.sentiment))?;
        put("lexicon.tsv", lexicon_tsv(&self.lexicon).into_bytes())?;
        let mut index = BTreeMap::new();
        for (i, (key, model)) in self.profiles.iter().enumerate() {
            let rel = format!("profiles/p{i:03}.json");
            put(&rel, to_json(model))?;
            index.insert(key.clone(), rel);
        }
        put(PROFILE_INDEX, to_json(&index))?;

        let manifest = Manifest { format: FORMAT_VERSION, files };
        let path = dir.join(MANIFEST);
        fs::write(&path, serde_json::to_vec_pretty(&manifest).expect("manifest serializes")).map_err(io_err(&path))?;
        Ok(manifest)
    }

    /// Load and verify. Every file named in the manifest must hash to its
    /// recorded digest before it is parsed.
    pub fn load(dir: &Path) -> Result<Artifacts, ArtifactError> {
        let manifest = read_manifest(dir)?;
        if manifest.format != FORMAT_VERSION {
            return Err(corrupt(MANIFEST, format!("unsupported format {}", manifest.format)));
        }
        let read = |rel: &str| -> Result<Vec<u8>, ArtifactError> {
            let expected = manifest.files.get(rel).ok_or_else(|| corrupt(MANIFEST, format!("no entry for {rel}")))?;
            let path = dir.join(rel);
            if !path.exists() {
                return Err(ArtifactError::Missing(rel.to_string()));
            }
            let bytes = fs::read(&path).map_err(io_err(&path))?;
            if &sha256_hex(&bytes) != expected {
                return Err(ArtifactError::HashMismatch(rel.to_string()));
            }
            Ok(bytes)
        };
        fn json<T: serde::de::DeserializeOwned>(rel: &str, bytes: &[u8]) -> Result<T, ArtifactError> {
            serde_json::from_slice(bytes).map_err(|e| corrupt(rel, e))
        }

        // Check every listed file, including ones parsed lazily below.
        for rel in manifest.files.keys() {
            read(rel)?;
        }

        let corpus: Corpus = json("corpus.json", &read("corpus.json")?)?;
        let catalog: FeatureCatalog = json("catalog.json", &read("catalog.json")?)?;
        let matrix = fio::decode_matrix(&read("features.lbfm")?).map_err(|e| corrupt("features.lbfm", e))?;
        let mut cubes = BTreeMap::new();
        for g in Granularity::ALL {
            let rel = cube_file(g);
            cubes.insert(g, fio::decode_cube(&read(&rel)?).map_err(|e| corrupt(&rel, e))?);
        }
        let sentiment: SentimentTable = json("sentiment.json", &read("sentiment.json")?)?;
        let lexicon_text = String::from_utf8(read("lexicon.tsv")?).map_err(|e| corrupt("lexicon.tsv", e))?;
        let lexicon = Lexicon::parse(&lexicon_text).map_err(|e| corrupt("lexicon.tsv", e))?;
        let index: BTreeMap<String, String> = json(PROFILE_INDEX, &read(PROFILE_INDEX)?)?;
        let mut profiles = BTreeMap::new();
        for (key, rel) in index {
            let model: TopicModel = json(&rel, &read(&rel)?)?;
            profiles.insert(key, model);
        }

        if matrix.account_ids() != corpus.account_ids().as_slice() {
            return Err(corrupt("features.lbfm", "rows do not match corpus accounts"));
        }
        Ok(Artifacts { corpus, catalog, matrix, cubes, sentiment, lexicon, profiles })
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, ArtifactError> {
    let path = dir.join(MANIFEST);
    if !path.exists() {
        return Err(ArtifactError::Missing(MANIFEST.to_string()));
    }
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    serde_json::from_slice(&bytes).map_err(|e| corrupt(MANIFEST, e))
}

pub fn labels_path(dir: &Path) -> PathBuf {
    dir.join(LABELS_FILE)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec(v).expect("artifact serializes")
}

fn lexicon_tsv(lexicon: &Lexicon) -> String {
    let mut out = String::new();
    for (token, e) in lexicon.entries() {
        let _ = writeln!(out, "{token}\t{}\t{}", e.polarity, e.subjectivity);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use labelbench_core::synthetic::{generate, SyntheticConfig};

    fn small() -> Artifacts {
        let spec: ProfileSpec = "overall:2".parse().unwrap();
        Artifacts::build(generate(&SyntheticConfig::small(12)), Lexicon::bundled(), &spec, Execution::default()).unwrap()
    }

    #[test]
    fn profile_spec_parsing() {
        assert_eq!("none".parse::<ProfileSpec>().unwrap(), ProfileSpec::none());
        assert_eq!("overall:10,20;year:10,20".parse::<ProfileSpec>().unwrap(), ProfileSpec::default());
        assert!("day:5".parse::<ProfileSpec>().is_err());
        assert!("overall:0".parse::<ProfileSpec>().is_err());
    }

    #[test]
    fn write_load_round_trip() {
        let a = small();
        let dir = tempfile::tempdir().unwrap();
        let m1 = a.write(dir.path()).unwrap();
        let b = Artifacts::load(dir.path()).unwrap();
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.cubes, b.cubes);
        assert_eq!(a.sentiment, b.sentiment);
        assert_eq!(a.lexicon, b.lexicon);
        assert_eq!(a.profiles, b.profiles);
        assert_eq!(b.write(dir.path()).unwrap(), m1);
    }

    #[test]
    fn tampering_is_detected() {
        let a = small();
        let dir = tempfile::tempdir().unwrap();
        let manifest = a.write(dir.path()).unwrap();
        for rel in manifest.files.keys() {
            let path = dir.path().join(rel);
            let original = fs::read(&path).unwrap();
            let mut bytes = original.clone();
            let mid = bytes.len() / 2;
            bytes[mid] ^= 0x01;
            fs::write(&path, &bytes).unwrap();
            assert!(matches!(Artifacts::load(dir.path()), Err(ArtifactError::HashMismatch(f)) if &f == rel));
            fs::write(&path, &original).unwrap();
        }
        Artifacts::load(dir.path()).unwrap();
    }
}
