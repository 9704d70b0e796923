//! Prompt construction, response parsing, and generation backends.
//!
//! Three prompt strategies share one frame: a task statement, an optional
//! distributional-information section, and the code example. The
//! `baseline` strategy omits the distributional section entirely, the
//! `taxonomy-informed` strategy lists the catalog descriptions with the
//! frequency percentages removed, and the `frequency-informed` strategy
//! lists them with the reference percentages verbatim.
//!
//! Backends are pluggable behind [`Backend`]: [`MockBackend`] is a pure
//! function of (request, seed) that realizes real injections through the
//! rule engine, while [`HttpBackend`] talks to a generic JSON
//! chat-completion endpoint. Templates ship as editable text files under
//! `prompts/` at the repository root and are embedded as defaults.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::code_model::{find_sites, SourceUnit};
use crate::injector::{changed_region, realize_site, InjectionRecord, MutatedUnit};
use crate::taxonomy::{BugCode, BugDistribution, Study, Taxonomy};

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("frequency-informed requests require a distribution")]
    MissingDistribution,
    #[error("`{strategy}` requests must not carry a distribution")]
    UnexpectedDistribution { strategy: PromptStrategy },
    #[error("prompt template `{name}` could not be read")]
    Template {
        name: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing API key: set the `{var}` environment variable")]
    MissingApiKey { var: String },
    #[error("backend `{backend}` failed after {attempts} attempts: {detail}")]
    Backend { backend: String, attempts: usize, detail: String },
}

/// How much distributional information the prompt discloses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptStrategy {
    Baseline,
    TaxonomyInformed,
    FrequencyInformed,
}

impl PromptStrategy {
    pub const ALL: [PromptStrategy; 3] = [
        PromptStrategy::Baseline,
        PromptStrategy::TaxonomyInformed,
        PromptStrategy::FrequencyInformed,
    ];
}

impl fmt::Display for PromptStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PromptStrategy::Baseline => "baseline",
            PromptStrategy::TaxonomyInformed => "taxonomy-informed",
            PromptStrategy::FrequencyInformed => "frequency-informed",
        })
    }
}

impl FromStr for PromptStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" => Ok(PromptStrategy::Baseline),
            "taxonomy-informed" | "taxonomy" => Ok(PromptStrategy::TaxonomyInformed),
            "frequency-informed" | "frequency" => Ok(PromptStrategy::FrequencyInformed),
            other => Err(format!("unknown prompt strategy `{other}`")),
        }
    }
}

/// One generation request: a unit to mutate plus the disclosure level.
///
/// `bugs_per_request` is the fan-out the harness schedules for this
/// (unit, trial) cell; every completion is an independent backend call
/// that yields one program containing one bug.
#[derive(Debug, Clone)]
pub struct GenerationRequest {
    pub strategy: PromptStrategy,
    pub unit: SourceUnit,
    pub taxonomy: Taxonomy,
    pub distribution: Option<BugDistribution>,
    pub bugs_per_request: usize,
    pub trial: usize,
}

impl GenerationRequest {
    /// Builds a request, enforcing that a distribution is supplied exactly
    /// when the strategy is frequency-informed.
    pub fn new(
        strategy: PromptStrategy,
        unit: SourceUnit,
        taxonomy: Taxonomy,
        distribution: Option<BugDistribution>,
    ) -> Result<GenerationRequest, GatewayError> {
        let req = GenerationRequest {
            strategy,
            unit,
            taxonomy,
            distribution,
            bugs_per_request: 5,
            trial: 0,
        };
        req.check()?;
        Ok(req)
    }

    pub fn with_trial(mut self, trial: usize) -> Self {
        self.trial = trial;
        self
    }

    pub fn with_bugs_per_request(mut self, n: usize) -> Self {
        self.bugs_per_request = n;
        self
    }

    fn check(&self) -> Result<(), GatewayError> {
        match (self.strategy, &self.distribution) {
            (PromptStrategy::FrequencyInformed, None) => Err(GatewayError::MissingDistribution),
            (PromptStrategy::Baseline | PromptStrategy::TaxonomyInformed, Some(_)) => {
                Err(GatewayError::UnexpectedDistribution { strategy: self.strategy })
            }
            _ => Ok(()),
        }
    }
}

/// A backend's reply, parsed.
#[derive(Debug, Clone)]
pub struct GenerationResponse {
    /// The reply exactly as received.
    pub raw: String,
    /// Candidate mutated programs, re-tokenized. Parsed candidates carry a
    /// placeholder record (`bug = X`, seed 0); the mock overwrites it with
    /// the ground-truth injection record.
    pub extracted: Vec<MutatedUnit>,
    /// True when no code could be extracted or everything extracted is
    /// byte-identical to the input (the model "fixed" nothing).
    pub refusal: bool,
    /// Explanatory bug comments stripped out of the candidates.
    pub side_notes: Vec<String>,
    pub backend_id: String,
}

/// The three prompt template files, with slots `{TASK}`,
/// `{DISTRIBUTIONAL_INFORMATION}`, and `{CODE}` in the frame.
#[derive(Debug, Clone)]
pub struct PromptTemplates {
    pub frame: String,
    pub task: String,
    pub distributional_header: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            frame: include_str!("../../../prompts/frame.txt").to_string(),
            task: include_str!("../../../prompts/task.txt").to_string(),
            distributional_header: include_str!("../../../prompts/distributional_header.txt")
                .to_string(),
        }
    }
}

impl PromptTemplates {
    /// Reads `frame.txt`, `task.txt`, and `distributional_header.txt`
    /// from `dir`.
    pub fn load(dir: &Path) -> Result<PromptTemplates, GatewayError> {
        let read = |name: &str| {
            fs::read_to_string(dir.join(name))
                .map_err(|source| GatewayError::Template { name: name.to_string(), source })
        };
        Ok(PromptTemplates {
            frame: read("frame.txt")?,
            task: read("task.txt")?,
            distributional_header: read("distributional_header.txt")?,
        })
    }

    /// Renders the prompt for `req`. Deterministic: identical requests
    /// yield byte-identical prompts.
    pub fn build(&self, req: &GenerationRequest) -> Result<String, GatewayError> {
        req.check()?;
        let section = match req.strategy {
            PromptStrategy::Baseline => String::new(),
            PromptStrategy::TaxonomyInformed => self.distributional_section(&req.taxonomy, None),
            PromptStrategy::FrequencyInformed => {
                let dist =
                    req.distribution.as_ref().ok_or(GatewayError::MissingDistribution)?;
                self.distributional_section(&req.taxonomy, Some(dist))
            }
        };
        Ok(self
            .frame
            .replace("{TASK}", self.task.trim_end())
            .replace("{DISTRIBUTIONAL_INFORMATION}", &section)
            .replace("{CODE}", req.unit.text.trim_end()))
    }

    /// One bullet per catalog entry, in catalog order; with `dist` the raw
    /// reference percentages are echoed, without it no percentage (and no
    /// `%` character) appears.
    fn distributional_section(
        &self,
        taxonomy: &Taxonomy,
        dist: Option<&BugDistribution>,
    ) -> String {
        let mut out = String::from(self.distributional_header.trim_end());
        out.push('\n');
        for spec in &taxonomy.specs {
            match dist {
                Some(d) => {
                    let pct = d.raw_percent(spec.code);
                    out.push_str(&format!("- {}: {}%\n", spec.description, pct));
                }
                None => out.push_str(&format!("- {}\n", spec.description)),
            }
        }
        out.push('\n');
        out
    }
}

/// Renders `req` with the default embedded templates.
pub fn build_prompt(req: &GenerationRequest) -> Result<String, GatewayError> {
    PromptTemplates::default().build(req)
}

/// Parses a backend reply against the unit that was sent.
///
/// Code is taken from fenced blocks when present, otherwise from the most
/// code-shaped run of lines. Whole-line or trailing `//` comments that
/// mention "bug" are moved into `side_notes` (models like to annotate the
/// mistake they made). Total: anything unparseable is a refusal.
pub fn parse_response(raw: &str, original: &SourceUnit) -> GenerationResponse {
    let mut blocks = fenced_blocks(raw);
    if blocks.is_empty() {
        blocks.extend(heuristic_block(raw));
    }
    let mut extracted = Vec::new();
    let mut side_notes = Vec::new();
    for block in blocks {
        let (code, mut notes) = strip_bug_comments(&block);
        side_notes.append(&mut notes);
        if code.trim().is_empty() {
            continue;
        }
        let unit = SourceUnit::parse_lenient(&original.id, original.language, &code);
        let (span, after_span) = changed_region(&original.text, &code);
        let record = InjectionRecord {
            bug: BugCode::X,
            unit_id: original.id.clone(),
            span,
            before: original.text[span.start..span.end].to_string(),
            after: code[after_span.start..after_span.end].to_string(),
            touched: Vec::new(),
            seed: 0,
        };
        extracted.push(MutatedUnit { unit, record });
    }
    let refusal =
        extracted.is_empty() || extracted.iter().all(|m| m.unit.text == original.text);
    GenerationResponse {
        raw: raw.to_string(),
        extracted,
        refusal,
        side_notes,
        backend_id: String::new(),
    }
}

/// Contents of ```-fenced blocks, byte-exact. An unterminated fence keeps
/// everything to the end of the reply.
fn fenced_blocks(raw: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<String> = None;
    for line in raw.split_inclusive('\n') {
        let fence = line.trim_start().starts_with("```");
        match (&mut current, fence) {
            (None, true) => current = Some(String::new()),
            (Some(block), true) => {
                blocks.push(std::mem::take(block));
                current = None;
            }
            (Some(block), false) => block.push_str(line),
            (None, false) => {}
        }
    }
    if let Some(block) = current {
        blocks.push(block);
    }
    blocks
}

/// Fallback extraction for unfenced replies: the run of code-shaped lines
/// (ending in `;`, `{`, `}`, indented, or blank) with the most statement
/// lines, requiring at least two so prose never qualifies.
fn heuristic_block(raw: &str) -> Option<String> {
    fn statement(line: &str) -> bool {
        let t = line.trim_end();
        t.ends_with(';') || t.ends_with('{') || t.ends_with('}')
    }
    fn code_shaped(line: &str) -> bool {
        line.trim().is_empty()
            || statement(line)
            || line.starts_with(' ')
            || line.starts_with('\t')
    }
    let mut runs: Vec<(usize, String)> = Vec::new();
    let mut cur = String::new();
    let mut statements = 0usize;
    for line in raw.split_inclusive('\n') {
        if code_shaped(line) {
            cur.push_str(line);
            statements += statement(line) as usize;
        } else if !cur.is_empty() {
            runs.push((statements, std::mem::take(&mut cur)));
            statements = 0;
        }
    }
    if !cur.is_empty() {
        runs.push((statements, cur));
    }
    runs.into_iter()
        .filter(|(s, _)| *s >= 2)
        .max_by_key(|(s, _)| *s)
        .map(|(_, text)| text.trim_start_matches('\n').to_string())
}

/// Removes `//` comments that mention "bug", returning them separately.
/// Lines that were only a comment disappear entirely, so a candidate that
/// differs from its original by an annotation alone compares byte-equal
/// after stripping.
fn strip_bug_comments(code: &str) -> (String, Vec<String>) {
    let mut kept = String::new();
    let mut notes = Vec::new();
    for line in code.split_inclusive('\n') {
        let Some(idx) = line.find("//") else {
            kept.push_str(line);
            continue;
        };
        let comment = line[idx + 2..].trim();
        if !comment.to_ascii_lowercase().contains("bug") {
            kept.push_str(line);
            continue;
        }
        notes.push(comment.to_string());
        let code_part = line[..idx].trim_end();
        if !code_part.is_empty() {
            kept.push_str(code_part);
            if line.ends_with('\n') {
                kept.push('\n');
            }
        }
    }
    (kept, notes)
}

/// A generation backend. Implementations must be safe to call from
/// parallel workers; responses are tied to requests by the caller.
pub trait Backend: Send + Sync {
    fn id(&self) -> &str;
    fn generate(
        &self,
        req: &GenerationRequest,
        seed: u64,
    ) -> Result<GenerationResponse, GatewayError>;
}

/// Theme codes the baseline ("wild") profile mixes in as
/// out-of-distribution injections. Off-by-one shapes are in-distribution
/// for study 2, so its pool leaves them out.
fn wild_pool(study: Study) -> &'static [BugCode] {
    match study {
        Study::Study1 => &[BugCode::S, BugCode::U, BugCode::W, BugCode::T],
        Study::Study2 => &[BugCode::U, BugCode::W, BugCode::T],
    }
}

const DECLINE_TEXT: &str =
    "I'm sorry, but I can't help with deliberately introducing bugs into this program.";

/// Deterministic offline stand-in for a live model.
///
/// Every non-refusal reply embeds a real rule-engine injection, so its
/// ground-truth record is exact and the classifier can close the loop.
/// Refusals are emitted at per-strategy rates and take one of two shapes:
/// a plain decline, or the original program echoed back unchanged.
#[derive(Debug, Clone)]
pub struct MockBackend {
    /// Probability that a baseline draw is an out-of-distribution theme.
    pub ood_rate: f64,
    pub refusal_baseline: f64,
    pub refusal_taxonomy: f64,
    pub refusal_frequency: f64,
    /// Share of non-refusals that annotate the bug with a `//` comment.
    pub comment_rate: f64,
}

impl Default for MockBackend {
    fn default() -> Self {
        MockBackend {
            ood_rate: 0.5,
            refusal_baseline: 0.032,
            refusal_taxonomy: 0.056,
            refusal_frequency: 0.016,
            comment_rate: 0.5,
        }
    }
}

impl MockBackend {
    fn refusal_rate(&self, strategy: PromptStrategy) -> f64 {
        match strategy {
            PromptStrategy::Baseline => self.refusal_baseline,
            PromptStrategy::TaxonomyInformed => self.refusal_taxonomy,
            PromptStrategy::FrequencyInformed => self.refusal_frequency,
        }
    }

    /// One bug-code draw under the request's strategy.
    fn draw_bug(&self, req: &GenerationRequest, rng: &mut ChaCha8Rng) -> BugCode {
        match req.strategy {
            PromptStrategy::FrequencyInformed => match &req.distribution {
                Some(dist) => dist.draw(rng),
                None => uniform_code(&req.taxonomy, rng),
            },
            PromptStrategy::TaxonomyInformed => uniform_code(&req.taxonomy, rng),
            PromptStrategy::Baseline => {
                if rng.random::<f64>() < self.ood_rate {
                    let pool = wild_pool(req.taxonomy.study);
                    pool[rng.random_range(0..pool.len())]
                } else {
                    uniform_code(&req.taxonomy, rng)
                }
            }
        }
    }

    /// Realizes a drawn bug, redrawing when the unit has no site for it;
    /// `None` only when the unit supports no catalog bug at all.
    fn realize_bug(&self, req: &GenerationRequest, rng: &mut ChaCha8Rng) -> Option<MutatedUnit> {
        let mut bug = self.draw_bug(req, rng);
        for _ in 0..16 {
            let sites = find_sites(&req.unit, bug).unwrap_or_default();
            if !sites.is_empty() {
                let site = &sites[rng.random_range(0..sites.len())];
                return Some(realize_site(&req.unit, site, rng.random::<u64>()));
            }
            bug = self.draw_bug(req, rng);
        }
        for code in req.taxonomy.codes() {
            let sites = find_sites(&req.unit, code).unwrap_or_default();
            if let Some(site) = sites.first() {
                return Some(realize_site(&req.unit, site, rng.random::<u64>()));
            }
        }
        None
    }

    /// The pure response function: same `(req, seed)` in, same bytes out.
    pub fn respond(&self, req: &GenerationRequest, seed: u64) -> GenerationResponse {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if rng.random::<f64>() < self.refusal_rate(req.strategy) {
            let echo = rng.random::<bool>() && req.unit.text.ends_with('\n');
            let raw = if echo {
                format!(
                    "The program already looks correct; here it is unchanged.\n\n```\n{}```\n",
                    req.unit.text
                )
            } else {
                DECLINE_TEXT.to_string()
            };
            let mut resp = parse_response(&raw, &req.unit);
            resp.backend_id = "mock".to_string();
            debug_assert!(resp.refusal);
            return resp;
        }
        let Some(mutated) = self.realize_bug(req, &mut rng) else {
            let mut resp = parse_response(
                "I could not find a natural place for a mistake in this program.",
                &req.unit,
            );
            resp.backend_id = "mock".to_string();
            return resp;
        };
        let mut code = mutated.unit.text.clone();
        if !code.ends_with('\n') {
            code.push('\n');
        }
        if rng.random::<f64>() < self.comment_rate {
            code.push_str(&format!("// Bug: {}\n", describe(&req.taxonomy, mutated.record.bug)));
        }
        let raw = format!("Here is the modified program with one mistake added.\n\n```\n{code}```\n");
        let mut resp = parse_response(&raw, &req.unit);
        resp.backend_id = "mock".to_string();
        debug_assert_eq!(resp.extracted.len(), 1);
        debug_assert!(!resp.refusal);
        // Ground truth replaces the parser's placeholder record.
        resp.extracted[0].record = mutated.record;
        resp
    }
}

fn uniform_code(taxonomy: &Taxonomy, rng: &mut ChaCha8Rng) -> BugCode {
    taxonomy.specs[rng.random_range(0..taxonomy.specs.len())].code
}

/// A one-line description for the mock's annotation comment.
fn describe(taxonomy: &Taxonomy, bug: BugCode) -> String {
    if let Some(spec) = taxonomy.spec(bug) {
        return spec.description.clone();
    }
    match bug {
        BugCode::S
        | BugCode::HighBounds
        | BugCode::LowBounds
        | BugCode::LowMiss
        | BugCode::HighMiss => "loop bounds off by one".to_string(),
        BugCode::U => "confused one operator with another".to_string(),
        BugCode::W => "used a variable that was never declared".to_string(),
        BugCode::T => "gave a value the wrong type".to_string(),
        BugCode::Y => "inverted the logic of a return".to_string(),
        _ => "a small mistake".to_string(),
    }
}

impl Backend for MockBackend {
    fn id(&self) -> &str {
        "mock"
    }

    fn generate(
        &self,
        req: &GenerationRequest,
        seed: u64,
    ) -> Result<GenerationResponse, GatewayError> {
        Ok(self.respond(req, seed))
    }
}

/// Convenience wrapper over [`MockBackend::respond`] with defaults.
pub fn mock_generate(req: &GenerationRequest, seed: u64) -> GenerationResponse {
    MockBackend::default().respond(req, seed)
}

/// Connection settings for a JSON chat-completion endpoint.
///
/// The paper-replication pipeline never needs this (acceptance runs on
/// the mock); it exists so the same harness can drive a live model.
#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout: Duration,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    /// Total attempts per request (exponential backoff between them).
    pub retries: usize,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            base_url: "http://localhost:8080/v1".to_string(),
            model: "gpt-4".to_string(),
            temperature: 1.0,
            max_tokens: 2048,
            timeout: Duration::from_secs(60),
            api_key_env: "BUGFORGE_API_KEY".to_string(),
            retries: 3,
        }
    }
}

/// Blocking HTTP backend for `POST {base_url}/chat/completions`.
pub struct HttpBackend {
    config: HttpConfig,
    templates: PromptTemplates,
    client: reqwest::blocking::Client,
    id: String,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<HttpBackend, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| GatewayError::Backend {
                backend: "http".to_string(),
                attempts: 0,
                detail: e.to_string(),
            })?;
        let id = format!("http:{}", config.model);
        Ok(HttpBackend { config, templates: PromptTemplates::default(), client, id })
    }

    pub fn with_templates(mut self, templates: PromptTemplates) -> Self {
        self.templates = templates;
        self
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn generate(
        &self,
        req: &GenerationRequest,
        seed: u64,
    ) -> Result<GenerationResponse, GatewayError> {
        let key = std::env::var(&self.config.api_key_env)
            .map_err(|_| GatewayError::MissingApiKey { var: self.config.api_key_env.clone() })?;
        let prompt = self.templates.build(req)?;
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": [{ "role": "user", "content": prompt }],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
            "seed": seed,
        });
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let mut detail = String::new();
        for attempt in 0..self.config.retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(250 << attempt));
            }
            match self.client.post(&url).bearer_auth(&key).json(&body).send() {
                Ok(resp) if resp.status().is_success() => {
                    let value: serde_json::Value =
                        resp.json().map_err(|e| GatewayError::Backend {
                            backend: self.id.clone(),
                            attempts: attempt + 1,
                            detail: format!("malformed response body: {e}"),
                        })?;
                    let content = value["choices"][0]["message"]["content"]
                        .as_str()
                        .unwrap_or_default();
                    let mut parsed = parse_response(content, &req.unit);
                    parsed.backend_id = self.id.clone();
                    return Ok(parsed);
                }
                Ok(resp) => detail = format!("HTTP {}", resp.status()),
                Err(e) => detail = e.to_string(),
            }
        }
        Err(GatewayError::Backend {
            backend: self.id.clone(),
            attempts: self.config.retries,
            detail,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::builtin_units;
    use crate::classifier::classify_pair;
    use crate::stats::{chi_square_gof, Binning};
    use crate::taxonomy::{builtin_distribution, builtin_taxonomy, make_distribution, SubThresholdPolicy};
    use std::collections::BTreeMap;

    fn study1_request(strategy: PromptStrategy) -> GenerationRequest {
        let unit = builtin_units(Study::Study1).remove(0);
        let taxonomy = builtin_taxonomy(Study::Study1);
        let dist = matches!(strategy, PromptStrategy::FrequencyInformed)
            .then(|| builtin_distribution(Study::Study1, SubThresholdPolicy::Half));
        GenerationRequest::new(strategy, unit, taxonomy, dist).unwrap()
    }

    #[test]
    fn request_invariant_is_enforced() {
        let unit = builtin_units(Study::Study1).remove(0);
        let taxonomy = builtin_taxonomy(Study::Study1);
        let dist = builtin_distribution(Study::Study1, SubThresholdPolicy::Half);
        let missing = GenerationRequest::new(
            PromptStrategy::FrequencyInformed,
            unit.clone(),
            taxonomy.clone(),
            None,
        );
        assert!(matches!(missing, Err(GatewayError::MissingDistribution)));
        let extra = GenerationRequest::new(
            PromptStrategy::Baseline,
            unit,
            taxonomy,
            Some(dist),
        );
        assert!(matches!(extra, Err(GatewayError::UnexpectedDistribution { .. })));
    }

    #[test]
    fn baseline_prompt_is_task_and_code_only() {
        let req = study1_request(PromptStrategy::Baseline);
        let prompt = build_prompt(&req).unwrap();
        assert!(prompt.contains("Task:"));
        assert!(prompt.contains(req.unit.text.trim_end()));
        assert!(!prompt.contains("Distributional Information"));
        for spec in &req.taxonomy.specs {
            assert!(
                !prompt.contains(&spec.description),
                "baseline prompt leaked description `{}`",
                spec.description
            );
        }
        assert_eq!(prompt, build_prompt(&req).unwrap(), "prompts must be deterministic");
    }

    #[test]
    fn taxonomy_prompt_lists_descriptions_without_percentages() {
        let req = study1_request(PromptStrategy::TaxonomyInformed);
        let prompt = build_prompt(&req).unwrap();
        for spec in &req.taxonomy.specs {
            assert!(prompt.contains(&spec.description), "missing `{}`", spec.description);
        }
        let start = prompt.find("Distributional Information").unwrap();
        let end = prompt.find("Code Example:").unwrap();
        assert!(start < end);
        assert!(
            !prompt[start..end].contains('%'),
            "taxonomy-informed distributional section must not carry percentages"
        );
    }

    #[test]
    fn frequency_prompt_echoes_reference_percentages() {
        let req = study1_request(PromptStrategy::FrequencyInformed);
        let prompt = build_prompt(&req).unwrap();
        assert!(
            prompt.contains("Mismatched parentheses: 33.1%"),
            "expected the reference percentage next to its description:\n{prompt}"
        );
    }

    #[test]
    fn templates_load_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        for (name, text) in [
            ("frame.txt", "{TASK}|{DISTRIBUTIONAL_INFORMATION}|{CODE}"),
            ("task.txt", "do the thing"),
            ("distributional_header.txt", "mistakes:"),
        ] {
            fs::write(dir.path().join(name), text).unwrap();
        }
        let templates = PromptTemplates::load(dir.path()).unwrap();
        let req = study1_request(PromptStrategy::Baseline);
        let prompt = templates.build(&req).unwrap();
        assert!(prompt.starts_with("do the thing|"));
        assert!(PromptTemplates::load(&dir.path().join("missing")).is_err());
    }

    #[test]
    fn parse_extracts_a_fenced_block() {
        let original = builtin_units(Study::Study1).remove(0);
        let raw = "Sure — one mistake added.\n\n```java\nint x = 1;\nint y = x;\n```\nEnjoy.";
        let resp = parse_response(raw, &original);
        assert!(!resp.refusal);
        assert_eq!(resp.extracted.len(), 1);
        assert_eq!(resp.extracted[0].unit.text, "int x = 1;\nint y = x;\n");
    }

    #[test]
    fn parse_flags_prose_only_replies_as_refusals() {
        let original = builtin_units(Study::Study1).remove(0);
        let resp = parse_response("I can't add bugs to this code.", &original);
        assert!(resp.refusal);
        assert!(resp.extracted.is_empty());
    }

    #[test]
    fn parse_flags_verbatim_echo_as_refusal() {
        let original = builtin_units(Study::Study1).remove(0);
        let raw = format!("Here you go.\n\n```\n{}```\n", original.text);
        let resp = parse_response(&raw, &original);
        assert!(resp.refusal, "echoed input is a refusal");
        assert_eq!(resp.extracted.len(), 1);
    }

    #[test]
    fn parse_strips_bug_comments_into_side_notes() {
        let original = builtin_units(Study::Study1).remove(0);
        let raw = "```\nint x = 1;\n// Bug: off by one\nint y = x;  // bug lives here\n```\n";
        let resp = parse_response(raw, &original);
        assert_eq!(resp.extracted[0].unit.text, "int x = 1;\nint y = x;\n");
        assert_eq!(resp.side_notes, vec!["Bug: off by one", "bug lives here"]);
    }

    #[test]
    fn parse_recovers_unfenced_code() {
        let original = builtin_units(Study::Study1).remove(0);
        let raw = "Here is the modified program:\n\npublic class T {\n    int f() { return 1; }\n}\nThe mistake is subtle.\n";
        let resp = parse_response(raw, &original);
        assert!(!resp.refusal);
        assert_eq!(
            resp.extracted[0].unit.text,
            "public class T {\n    int f() { return 1; }\n}\n"
        );
    }

    #[test]
    fn mock_nonrefusals_carry_true_records_that_classify_back() {
        let taxonomy = builtin_taxonomy(Study::Study1);
        for unit in builtin_units(Study::Study1) {
            for strategy in PromptStrategy::ALL {
                let dist = matches!(strategy, PromptStrategy::FrequencyInformed)
                    .then(|| builtin_distribution(Study::Study1, SubThresholdPolicy::Half));
                let req = GenerationRequest::new(strategy, unit.clone(), taxonomy.clone(), dist)
                    .unwrap();
                for seed in 0..20 {
                    let resp = mock_generate(&req, seed);
                    assert_eq!(resp.raw, mock_generate(&req, seed).raw, "mock must be pure");
                    if resp.refusal {
                        continue;
                    }
                    let candidate = &resp.extracted[0];
                    let label = classify_pair(&unit, &candidate.unit);
                    assert_eq!(
                        label.primary, candidate.record.bug,
                        "unit {} strategy {strategy} seed {seed}: classifier read {} for injected {}",
                        unit.id, label.primary, candidate.record.bug
                    );
                    assert_eq!(label.combination, None);
                }
            }
        }
    }

    #[test]
    fn mock_degenerate_distribution_is_honored() {
        let unit = builtin_units(Study::Study1).remove(0);
        let taxonomy = builtin_taxonomy(Study::Study1);
        let dist = make_distribution(&[(BugCode::C, 1.0)]).unwrap();
        let req = GenerationRequest::new(
            PromptStrategy::FrequencyInformed,
            unit,
            taxonomy,
            Some(dist),
        )
        .unwrap();
        let mut saw_injection = false;
        for seed in 0..60 {
            let resp = mock_generate(&req, seed);
            if resp.refusal {
                continue;
            }
            saw_injection = true;
            assert_eq!(resp.extracted[0].record.bug, BugCode::C);
        }
        assert!(saw_injection);
    }

    #[test]
    fn mock_taxonomy_arm_draws_uniformly() {
        let units = builtin_units(Study::Study1);
        let taxonomy = builtin_taxonomy(Study::Study1);
        let mut observed: BTreeMap<BugCode, u64> = BTreeMap::new();
        for seed in 0..1800u64 {
            let unit = units[(seed % units.len() as u64) as usize].clone();
            let req = GenerationRequest::new(
                PromptStrategy::TaxonomyInformed,
                unit,
                taxonomy.clone(),
                None,
            )
            .unwrap();
            let resp = mock_generate(&req, seed);
            if let Some(m) = resp.extracted.first().filter(|_| !resp.refusal) {
                *observed.entry(m.record.bug).or_insert(0) += 1;
            }
        }
        assert_eq!(observed.len(), 18, "all catalog codes should appear");
        let uniform = make_distribution(
            &taxonomy.codes().iter().map(|&c| (c, 1.0)).collect::<Vec<_>>(),
        )
        .unwrap();
        let gof = chi_square_gof(&observed, &uniform, Binning::Strict).unwrap();
        assert!(gof.p > 0.01, "uniform arm should fit uniform: {gof:?}");
    }

    #[test]
    fn mock_refusal_rate_tracks_taxonomy_default() {
        let unit = builtin_units(Study::Study1).remove(0);
        let taxonomy = builtin_taxonomy(Study::Study1);
        let req =
            GenerationRequest::new(PromptStrategy::TaxonomyInformed, unit, taxonomy, None)
                .unwrap();
        let refused = (0..10_000u64)
            .filter(|&seed| mock_generate(&req, seed).refusal)
            .count() as f64;
        let rate = refused / 10_000.0;
        assert!(
            (rate - 0.056).abs() <= 0.007,
            "taxonomy refusal rate {rate} should sit within 5.6% ± 0.7"
        );
    }

    #[test]
    fn mock_study2_wild_pool_skips_off_by_one_themes() {
        let units = builtin_units(Study::Study2);
        let taxonomy = builtin_taxonomy(Study::Study2);
        let mut ood = 0usize;
        let mut total = 0usize;
        for seed in 0..400u64 {
            let unit = units[(seed % units.len() as u64) as usize].clone();
            let req =
                GenerationRequest::new(PromptStrategy::Baseline, unit, taxonomy.clone(), None)
                    .unwrap();
            let resp = mock_generate(&req, seed);
            if resp.refusal {
                continue;
            }
            total += 1;
            let bug = resp.extracted[0].record.bug;
            if bug.is_out_of_distribution() {
                ood += 1;
                assert!(
                    matches!(bug, BugCode::U | BugCode::W | BugCode::T),
                    "study-2 wild draws must avoid off-by-one themes, got {bug}"
                );
            }
        }
        let rate = ood as f64 / total as f64;
        assert!((rate - 0.5).abs() < 0.1, "wild OOD rate {rate} should track 0.5");
    }

    #[test]
    fn http_backend_requires_an_api_key() {
        let config = HttpConfig {
            api_key_env: "BUGFORGE_TEST_KEY_THAT_IS_NOT_SET".to_string(),
            ..HttpConfig::default()
        };
        let backend = HttpBackend::new(config).unwrap();
        let req = study1_request(PromptStrategy::Baseline);
        match backend.generate(&req, 0) {
            Err(GatewayError::MissingApiKey { var }) => {
                assert_eq!(var, "BUGFORGE_TEST_KEY_THAT_IS_NOT_SET")
            }
            other => panic!("expected MissingApiKey, got {other:?}"),
        }
    }
}
