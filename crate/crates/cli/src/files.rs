//! Problem, solution, spectrum and cochain files.
//!
//! All files are JSON with stable field order and floats printed at 17
//! significant digits, which round-trips every finite f64 exactly; given the
//! same inputs and seed the emitted bytes are identical run to run.

use std::io;
use std::path::Path;

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use cencon::analysis::{GeometryTag, SpectrumReport};
use cencon::cochain::{pair_count, Configuration, Masses, OneCochain};
use cencon::error::CcError;
use cencon::solvers::{CCSolution, SolveSettings};

/// Solver settings as stored in problem files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SettingsFile {
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    pub method: String,
    pub starts: usize,
}

impl Default for SettingsFile {
    fn default() -> Self {
        let s = SolveSettings::default();
        Self {
            max_iterations: s.max_iterations,
            residual_tolerance: s.residual_tolerance,
            method: s.method.as_str().to_string(),
            starts: 20,
        }
    }
}

impl SettingsFile {
    pub fn to_solve_settings(&self, rng_seed: u64) -> Result<SolveSettings, CcError> {
        Ok(SolveSettings {
            max_iterations: self.max_iterations,
            residual_tolerance: self.residual_tolerance,
            rng_seed,
            method: self.method.parse()?,
            ..SolveSettings::default()
        })
    }
}

/// A problem statement: bodies, dimension, homogeneity, masses and
/// optionally fixed starting positions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    /// Masses as supplied; normalization happens on load and the original
    /// sum is recorded in solution files.
    pub masses: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub settings: SettingsFile,
}

impl ProblemFile {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.n < 2 {
            anyhow::bail!("n must be at least 2, got {}", self.n);
        }
        if self.d < 1 {
            anyhow::bail!("d must be at least 1, got {}", self.d);
        }
        if self.masses.len() != self.n {
            anyhow::bail!("expected {} masses, found {}", self.n, self.masses.len());
        }
        for (j, &m) in self.masses.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                anyhow::bail!("mass {j} is {m}; every mass must be strictly positive");
            }
        }
        if let Some(pos) = &self.positions {
            if pos.len() != self.n {
                anyhow::bail!("expected {} positions, found {}", self.n, pos.len());
            }
            for (j, p) in pos.iter().enumerate() {
                if p.len() != self.d {
                    anyhow::bail!(
                        "position {j} has length {}, expected d = {}",
                        p.len(),
                        self.d
                    );
                }
            }
        }
        Ok(())
    }

    pub fn masses_value(&self) -> anyhow::Result<Masses> {
        Ok(Masses::new(&self.masses)?)
    }

    pub fn configuration(&self) -> anyhow::Result<Option<Configuration>> {
        match &self.positions {
            None => Ok(None),
            Some(points) => Ok(Some(Configuration::from_points(points)?)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TagFile {
    pub tag: String,
    pub deviation: f64,
}

impl From<&GeometryTag> for TagFile {
    fn from(t: &GeometryTag) -> Self {
        Self {
            tag: t.kind.as_str().to_string(),
            deviation: t.deviation,
        }
    }
}

/// A solved central configuration together with the problem it answers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub problem: ProblemFile,
    /// Sum of the masses as supplied, before normalization to 1.
    pub mass_scale: f64,
    /// Centered unit-mass-norm positions, one row per body.
    pub configuration: Vec<Vec<f64>>,
    pub lambda: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub method: String,
    /// Morse index of the sphere-restricted Hessian.
    pub morse_index: usize,
    /// Eigenvalues of the sphere-restricted Hessian, ascending.
    pub spectrum: Vec<f64>,
    pub classification: Vec<TagFile>,
    pub tool_version: String,
    /// Wall-clock milliseconds; null unless requested, because wall time
    /// would break byte-for-byte determinism of the output.
    pub timing_ms: Option<f64>,
}

impl SolutionFile {
    pub fn from_solution(
        problem: &ProblemFile,
        sol: &CCSolution,
        sphere: &SpectrumReport,
        timing_ms: Option<f64>,
    ) -> Self {
        let q = &sol.configuration;
        let configuration = (0..q.n()).map(|j| q.point(j).to_vec()).collect();
        Self {
            problem: problem.clone(),
            mass_scale: problem.masses.iter().sum(),
            configuration,
            lambda: sol.lambda.value(),
            residual_norm: sol.residual_norm,
            iterations: sol.iterations,
            method: sol.method.as_str().to_string(),
            morse_index: sphere.morse_index,
            spectrum: sphere.eigenvalues.clone(),
            classification: sol.classification.iter().map(TagFile::from).collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timing_ms,
        }
    }

    pub fn configuration_value(&self) -> anyhow::Result<Configuration> {
        Ok(Configuration::from_points(&self.configuration)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumSection {
    pub context: String,
    pub eigenvalues: Vec<f64>,
    pub morse_index: usize,
    pub nullity: usize,
    pub zero_threshold: f64,
}

impl From<&SpectrumReport> for SpectrumSection {
    fn from(r: &SpectrumReport) -> Self {
        Self {
            context: r.context.as_str().to_string(),
            eigenvalues: r.eigenvalues.clone(),
            morse_index: r.morse_index,
            nullity: r.nullity,
            zero_threshold: r.zero_threshold,
        }
    }
}

/// Full spectral report for a verified solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub problem: ProblemFile,
    pub sphere_restricted: SpectrumSection,
    /// Hessian of `U - (lambda/2)|.|^2` at the `lambda = -2` scale.
    pub c0_full_lambda2: SpectrumSection,
    /// Hessian of the cocycle-projected pair functional at the same scale.
    pub c1_composed: SpectrumSection,
    pub radial_expected: f64,
    pub radial_measured: f64,
    pub correspondence_pass: bool,
    pub correspondence_max_rel_error: f64,
    pub h_nonzero: Vec<f64>,
    pub htilde_nonzero: Vec<f64>,
}

/// A raw 1-cochain with masses, for the `project` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CochainFile {
    pub n: usize,
    pub d: usize,
    pub masses: Vec<f64>,
    /// One row per pair in lexicographic order (0,1), (0,2), ...
    pub entries: Vec<Vec<f64>>,
}

impl CochainFile {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.masses.len() != self.n {
            anyhow::bail!("expected {} masses, found {}", self.n, self.masses.len());
        }
        if self.entries.len() != pair_count(self.n) {
            anyhow::bail!(
                "expected {} pair entries, found {}",
                pair_count(self.n),
                self.entries.len()
            );
        }
        for (idx, e) in self.entries.iter().enumerate() {
            if e.len() != self.d {
                anyhow::bail!(
                    "entry {idx} has length {}, expected d = {}",
                    e.len(),
                    self.d
                );
            }
        }
        Ok(())
    }

    pub fn cochain_value(&self) -> anyhow::Result<OneCochain> {
        let flat: Vec<f64> = self.entries.iter().flatten().copied().collect();
        Ok(OneCochain::new(self.n, self.d, flat)?)
    }

    pub fn from_cochain(z: &OneCochain, masses: &[f64]) -> Self {
        let (n, d) = (z.n(), z.d());
        let entries = z.as_slice().chunks(d).map(|c| c.to_vec()).collect();
        Self {
            n,
            d,
            masses: masses.to_vec(),
            entries,
        }
    }
}

/// Pretty JSON formatter printing every float at 17 significant digits.
struct SciFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl<'a> SciFormatter<'a> {
    fn new() -> Self {
        Self {
            inner: PrettyFormatter::new(),
        }
    }
}

impl<'a> Formatter for SciFormatter<'a> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        debug_assert!(value.is_finite());
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Serializes to the canonical on-disk form (pretty, 17 significant digits,
/// trailing newline).
pub fn to_canonical_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SciFormatter::new());
    value.serialize(&mut ser).context("serializing to JSON")?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = to_canonical_json(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// CSV of body positions: `body,x0,...,x{d-1}`.
pub fn positions_csv(config: &[Vec<f64>]) -> String {
    let d = config.first().map_or(0, |p| p.len());
    let mut out = String::from("body");
    for c in 0..d {
        out.push_str(&format!(",x{c}"));
    }
    out.push('\n');
    for (j, p) in config.iter().enumerate() {
        out.push_str(&j.to_string());
        for v in p {
            out.push_str(&format!(",{v:.16e}"));
        }
        out.push('\n');
    }
    out
}

/// CSV of eigenvalues: `index,eigenvalue`.
pub fn spectrum_csv(eigenvalues: &[f64]) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (i, e) in eigenvalues.iter().enumerate() {
        out.push_str(&format!("{i},{e:.16e}\n"));
    }
    out
}
