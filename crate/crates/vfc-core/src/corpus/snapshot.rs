//! File snapshot access for the pre/post versions of changed files.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::Command;

use thiserror::Error;

use super::record::RepoId;
use crate::structdiff::Side;
use crate::syntax::FileContents;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot path {0:?} escapes the store")]
    PathEscape(String),
    #[error("git invocation failed: {0}")]
    Git(String),
    #[error("io error on {path:?}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Content-addressed snapshot storage. Returns byte-exact file content for
/// (repo, sha, side, path) or a definitive miss.
#[derive(Debug)]
pub enum SnapshotStore {
    /// In-memory map keyed by (repo, sha, side, path).
    Memory(HashMap<(String, String, Side, String), String>),
    /// Directory layout `<root>/<host>/<owner>/<name>/<sha>/<pre|post>/<path>`.
    FileCache(PathBuf),
    /// Local clones at `<root>/<host>/<owner>/<name>`; the pre side reads
    /// from the commit's first parent (`<sha>^`).
    LocalGit(PathBuf),
}

impl SnapshotStore {
    pub fn memory() -> Self {
        SnapshotStore::Memory(HashMap::new())
    }

    pub fn file_cache(root: impl Into<PathBuf>) -> Self {
        SnapshotStore::FileCache(root.into())
    }

    pub fn local_git(root: impl Into<PathBuf>) -> Self {
        SnapshotStore::LocalGit(root.into())
    }

    pub fn insert(
        &mut self,
        repo: &RepoId,
        sha: &str,
        side: Side,
        path: &str,
        content: impl Into<String>,
    ) {
        if let SnapshotStore::Memory(map) = self {
            map.insert(
                (repo.to_string(), sha.to_string(), side, path.to_string()),
                content.into(),
            );
        } else {
            panic!("insert is only supported on the memory backend");
        }
    }

    /// Store a snapshot file under the file-cache layout.
    pub fn write_cached(
        &self,
        repo: &RepoId,
        sha: &str,
        side: Side,
        path: &str,
        content: &str,
    ) -> Result<(), SnapshotError> {
        let SnapshotStore::FileCache(root) = self else {
            panic!("write_cached is only supported on the file-cache backend");
        };
        let full = cache_path(root, repo, sha, side, path)?;
        if let Some(parent) = full.parent() {
            std::fs::create_dir_all(parent).map_err(|source| SnapshotError::Io {
                path: parent.display().to_string(),
                source,
            })?;
        }
        std::fs::write(&full, content).map_err(|source| SnapshotError::Io {
            path: full.display().to_string(),
            source,
        })
    }

    /// Fetch one file version. `Ok(None)` is a definitive miss.
    pub fn file(
        &self,
        repo: &RepoId,
        sha: &str,
        side: Side,
        path: &str,
    ) -> Result<Option<String>, SnapshotError> {
        match self {
            SnapshotStore::Memory(map) => Ok(map
                .get(&(repo.to_string(), sha.to_string(), side, path.to_string()))
                .cloned()),
            SnapshotStore::FileCache(root) => {
                let full = cache_path(root, repo, sha, side, path)?;
                match std::fs::read_to_string(&full) {
                    Ok(content) => Ok(Some(content)),
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                    Err(source) => Err(SnapshotError::Io {
                        path: full.display().to_string(),
                        source,
                    }),
                }
            }
            SnapshotStore::LocalGit(root) => {
                let repo_dir = root
                    .join(&repo.host)
                    .join(repo.owner.replace('/', "_"))
                    .join(&repo.name);
                if !repo_dir.exists() {
                    return Ok(None);
                }
                let rev = match side {
                    Side::Pre => format!("{sha}^:{path}"),
                    Side::Post => format!("{sha}:{path}"),
                };
                let output = Command::new("git")
                    .arg("-C")
                    .arg(&repo_dir)
                    .arg("show")
                    .arg(&rev)
                    .output()
                    .map_err(|e| SnapshotError::Git(e.to_string()))?;
                if output.status.success() {
                    Ok(Some(String::from_utf8_lossy(&output.stdout).into_owned()))
                } else {
                    // Unknown object or path not in that commit.
                    Ok(None)
                }
            }
        }
    }

    /// View of one commit's snapshots as pre/post file contents.
    pub fn for_commit<'a>(&'a self, repo: &'a RepoId, sha: &'a str) -> CommitContents<'a> {
        CommitContents {
            store: self,
            repo,
            sha,
        }
    }
}

fn cache_path(
    root: &std::path::Path,
    repo: &RepoId,
    sha: &str,
    side: Side,
    path: &str,
) -> Result<PathBuf, SnapshotError> {
    if path.split('/').any(|c| c == "..") || path.starts_with('/') {
        return Err(SnapshotError::PathEscape(path.to_string()));
    }
    let side_dir = match side {
        Side::Pre => "pre",
        Side::Post => "post",
    };
    Ok(root
        .join(&repo.host)
        .join(repo.owner.replace('/', "_"))
        .join(&repo.name)
        .join(sha)
        .join(side_dir)
        .join(path))
}

/// Adapter binding a single commit's identity to the [`FileContents`]
/// interface used by function discovery. Store errors degrade to misses so
/// enrichment falls back per file instead of failing the commit.
pub struct CommitContents<'a> {
    store: &'a SnapshotStore,
    repo: &'a RepoId,
    sha: &'a str,
}

impl FileContents for CommitContents<'_> {
    fn pre(&self, path: &str) -> Option<String> {
        self.store
            .file(self.repo, self.sha, Side::Pre, path)
            .ok()
            .flatten()
    }

    fn post(&self, path: &str) -> Option<String> {
        self.store
            .file(self.repo, self.sha, Side::Post, path)
            .ok()
            .flatten()
    }
}
