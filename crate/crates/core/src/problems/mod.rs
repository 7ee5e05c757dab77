//! Shipped decoders, their instance models, text formats and exhaustive
//! oracles.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::keys::Decoder;

pub mod ncgpp;
pub mod pmedian;
pub mod setcover;
pub mod thlp;
pub mod tsp;

pub use ncgpp::NcgppInstance;
pub use pmedian::PMedianInstance;
pub use setcover::SetCoverInstance;
pub use thlp::ThlpInstance;
pub use tsp::TspInstance;

/// Exhaustive oracles refuse enumerations larger than this.
pub const MAX_STATES: f64 = 1e8;

pub(crate) fn guard_states(states: f64) -> Result<()> {
    if states > MAX_STATES {
        Err(Error::TooLarge(states))
    } else {
        Ok(())
    }
}

/// Exact optimum with one optimal solution rendered as text.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub objective: f64,
    pub certificate: String,
}

/// Indices `0..keys.len()` ordered by ascending key, ties by index.
pub fn key_order(keys: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    idx
}

pub(crate) fn one_based(items: &[usize]) -> String {
    let parts: Vec<String> = items.iter().map(|i| (i + 1).to_string()).collect();
    parts.join(" ")
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        f(&c);
        let mut i = k;
        while i > 0 && c[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        c[i - 1] += 1;
        for j in i..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Whitespace-token reader that remembers the line each token came from.
pub(crate) struct Tokens {
    path: PathBuf,
    tokens: Vec<(usize, String)>,
    pos: usize,
    last_line: usize,
}

impl Tokens {
    pub fn from_str(path: &Path, text: &str) -> Self {
        let mut tokens = Vec::new();
        let mut last_line = 1;
        for (i, line) in text.lines().enumerate() {
            last_line = i + 1;
            let line = line.split('#').next().unwrap_or("");
            tokens.extend(line.split_whitespace().map(|t| (i + 1, t.to_string())));
        }
        Tokens {
            path: path.to_path_buf(),
            tokens,
            pos: 0,
            last_line,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_str(path, &text))
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        let line = self
            .tokens
            .get(self.pos.saturating_sub(1))
            .map_or(self.last_line, |t| t.0);
        Error::parse(&self.path, line, msg)
    }

    pub fn next<T: FromStr>(&mut self, what: &str) -> Result<T> {
        let Some((line, tok)) = self.tokens.get(self.pos) else {
            return Err(Error::parse(
                &self.path,
                self.last_line,
                format!("unexpected end of file, expected {what}"),
            ));
        };
        self.pos += 1;
        tok.parse()
            .map_err(|_| Error::parse(&self.path, *line, format!("invalid {what}: {tok:?}")))
    }

    pub fn non_negative(&mut self, what: &str) -> Result<f64> {
        let v: f64 = self.next(what)?;
        if !(v >= 0.0) || !v.is_finite() {
            return Err(self.error(format!("{what} must be a finite non-negative number, got {v}")));
        }
        Ok(v)
    }

    pub fn matrix(&mut self, rows: usize, cols: usize, what: &str) -> Result<Vec<f64>> {
        let mut m = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            m.push(self.non_negative(what)?);
        }
        Ok(m)
    }

    pub fn finish(&self) -> Result<()> {
        match self.tokens.get(self.pos) {
            None => Ok(()),
            Some((line, tok)) => Err(Error::parse(
                &self.path,
                *line,
                format!("trailing data: {tok:?}"),
            )),
        }
    }
}

pub(crate) fn write_matrix(out: &mut String, m: &[f64], cols: usize) {
    for row in m.chunks(cols) {
        let parts: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", parts.join(" "));
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Tsp,
    SetCover,
    PMedian,
    Ncgpp,
    Thlp,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::Tsp,
        ProblemKind::SetCover,
        ProblemKind::PMedian,
        ProblemKind::Ncgpp,
        ProblemKind::Thlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Tsp => "tsp",
            ProblemKind::SetCover => "setcover",
            ProblemKind::PMedian => "anpmp",
            ProblemKind::Ncgpp => "ncgpp",
            ProblemKind::Thlp => "thlp",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tsp" => Ok(ProblemKind::Tsp),
            "setcover" | "set-cover" | "scp" => Ok(ProblemKind::SetCover),
            "anpmp" | "pmedian" | "p-median" | "pmed" => Ok(ProblemKind::PMedian),
            "ncgpp" => Ok(ProblemKind::Ncgpp),
            "thlp" => Ok(ProblemKind::Thlp),
            _ => Err(Error::InvalidParameter(format!("unknown problem {s:?}"))),
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A parsed instance of any shipped problem.
#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Tsp(TspInstance),
    SetCover(SetCoverInstance),
    PMedian(PMedianInstance),
    Ncgpp(NcgppInstance),
    Thlp(ThlpInstance),
}

impl Instance {
    /// Reads `path` in the canonical format of `kind`. `alpha` is required
    /// for the p-median family and ignored otherwise.
    pub fn load(kind: ProblemKind, path: &Path, alpha: Option<usize>) -> Result<Self> {
        Ok(match kind {
            ProblemKind::Tsp => Instance::Tsp(TspInstance::parse(path)?),
            ProblemKind::SetCover => Instance::SetCover(SetCoverInstance::parse(path)?),
            ProblemKind::PMedian => {
                let alpha = alpha.ok_or_else(|| {
                    Error::InvalidParameter("the p-median problem needs alpha".into())
                })?;
                Instance::PMedian(PMedianInstance::parse_orlib(path)?.with_alpha(alpha)?)
            }
            ProblemKind::Ncgpp => Instance::Ncgpp(NcgppInstance::parse(path)?),
            ProblemKind::Thlp => Instance::Thlp(ThlpInstance::parse(path)?),
        })
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            Instance::Tsp(_) => ProblemKind::Tsp,
            Instance::SetCover(_) => ProblemKind::SetCover,
            Instance::PMedian(_) => ProblemKind::PMedian,
            Instance::Ncgpp(_) => ProblemKind::Ncgpp,
            Instance::Thlp(_) => ProblemKind::Thlp,
        }
    }

    pub fn decoder(&self) -> &dyn Decoder {
        match self {
            Instance::Tsp(i) => i,
            Instance::SetCover(i) => i,
            Instance::PMedian(i) => i,
            Instance::Ncgpp(i) => i,
            Instance::Thlp(i) => i,
        }
    }

    /// Default time limit in seconds: a tenth of the vertex count for the
    /// p-median family, the station count for NCGPP, the node count for
    /// THLP and the dimension otherwise.
    pub fn default_time_limit(&self) -> f64 {
        let t = match self {
            Instance::PMedian(i) => 0.1 * i.vertices() as f64,
            Instance::Ncgpp(i) => i.stations() as f64,
            Instance::Thlp(i) => i.nodes() as f64,
            Instance::Tsp(i) => i.decoder_dimension() as f64,
            Instance::SetCover(i) => i.columns() as f64,
        };
        t.max(0.1)
    }

    pub fn brute_force(&self) -> Result<Optimum> {
        match self {
            Instance::Tsp(i) => i.brute_force(),
            Instance::SetCover(i) => i.brute_force(),
            Instance::PMedian(i) => i.brute_force(),
            Instance::Ncgpp(i) => i.brute_force(),
            Instance::Thlp(i) => i.brute_force(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        match self {
            Instance::Tsp(i) => i.write(path),
            Instance::SetCover(i) => i.write(path),
            Instance::PMedian(i) => i.write_orlib(path),
            Instance::Ncgpp(i) => i.write(path),
            Instance::Thlp(i) => i.write(path),
        }
    }
}
