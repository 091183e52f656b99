//! Declarative study procedure and the state machine that runs it.
//!
//! A workflow file is TOML. Paths are relative to the file's directory.
//!
//! ```toml
//! id = "study"
//! participant_seed = 7
//! corpus = "corpus"
//!
//! [[steps]]
//! type = "questionnaire"          # or relaxation_video, baseline, task_block
//! id = "pre"
//! questionnaire = "pre"
//!
//! [[steps]]
//! type = "task_block"
//! id = "tasks"
//! tasks = ["coding", "email"]
//! randomize = true
//! interleave = "nasa-tlx"
//!
//! [[tasks]]
//! id = "coding"
//! kind = "coding"                 # coding, debugging, documentation, email_writing
//! instructions = "tasks/coding.md"
//! files = ["org/example/Main.java"]
//! time_limit_s = 600
//!
//! [[questionnaires]]
//! id = "pre"
//! items = [{ id = "age", prompt = "Age", scale = { type = "slider", min = 18, max = 99, step = 1 } }]
//! ```
//!
//! The `nasa-tlx` questionnaire is built in.

mod machine;
mod questionnaire;

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use machine::{advance, baseline_interval, StepStatus, WorkflowEvent, WorkflowState, MARKER_START, MARKER_STOP};
pub use questionnaire::{
    nasa_tlx, score_nasa_tlx, Answer, Answers, Item, NasaTlxResponse, QuestionnaireSpec, Scale, NASA_TLX_ID,
    NASA_TLX_ITEMS,
};

#[derive(Debug, thiserror::Error)]
pub enum WorkflowError {
    #[error("invalid workflow:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{event} is not allowed while {state}")]
    IllegalTransition { event: String, state: String },
    #[error("invalid payload: {0}")]
    InvalidPayload(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Coding,
    Debugging,
    Documentation,
    EmailWriting,
}

impl TaskKind {
    pub fn needs_corpus(self) -> bool {
        self != TaskKind::EmailWriting
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "coding" => Ok(TaskKind::Coding),
            "debugging" => Ok(TaskKind::Debugging),
            "documentation" => Ok(TaskKind::Documentation),
            "email_writing" => Ok(TaskKind::EmailWriting),
            _ => Err(format!("unknown task kind {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub kind: TaskKind,
    /// Instruction file path, relative to the workflow file.
    pub instructions: String,
    /// Loaded instruction text.
    #[serde(default)]
    pub instructions_text: String,
    /// Corpus-relative source files shown during the task.
    pub files: Vec<String>,
    pub time_limit_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Step {
    Questionnaire {
        id: String,
        questionnaire: String,
    },
    RelaxationVideo {
        id: String,
        duration_s: f64,
        media: String,
    },
    Baseline {
        id: String,
        duration_s: f64,
    },
    TaskBlock {
        id: String,
        tasks: Vec<String>,
        #[serde(default)]
        randomize: bool,
        /// Questionnaire shown after every task.
        #[serde(default)]
        interleave: Option<String>,
    },
}

impl Step {
    pub fn id(&self) -> &str {
        match self {
            Step::Questionnaire { id, .. }
            | Step::RelaxationVideo { id, .. }
            | Step::Baseline { id, .. }
            | Step::TaskBlock { id, .. } => id,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    id: String,
    kind: String,
    #[serde(default)]
    instructions: String,
    #[serde(default)]
    files: Vec<String>,
    time_limit_s: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorkflow {
    id: String,
    #[serde(default)]
    participant_seed: u64,
    corpus: Option<String>,
    #[serde(default)]
    steps: Vec<Step>,
    #[serde(default)]
    tasks: Vec<RawTask>,
    #[serde(default)]
    questionnaires: Vec<QuestionnaireSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Workflow {
    pub id: String,
    pub participant_seed: u64,
    pub base_dir: PathBuf,
    pub corpus_dir: Option<PathBuf>,
    pub steps: Vec<Step>,
    pub tasks: IndexMap<String, TaskSpec>,
    /// Includes the built-in NASA-TLX.
    pub questionnaires: IndexMap<String, QuestionnaireSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PhaseKind {
    Questionnaire { questionnaire: String },
    RelaxationVideo { duration_s: f64, media: String },
    Baseline { duration_s: f64 },
    Task { task: String, time_limit_s: Option<f64> },
}

/// One unit of the expanded procedure. Tasks of a block and their interleaved
/// questionnaires each become a phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub id: String,
    pub step_id: String,
    #[serde(flatten)]
    pub kind: PhaseKind,
}

impl Phase {
    /// Marker label, `<kind>:<id>`.
    pub fn label(&self) -> String {
        let prefix = match self.kind {
            PhaseKind::Questionnaire { .. } => "questionnaire",
            PhaseKind::RelaxationVideo { .. } => "video",
            PhaseKind::Baseline { .. } => "baseline",
            PhaseKind::Task { .. } => "task",
        };
        format!("{prefix}:{}", self.id)
    }

    /// Seconds after activation at which the phase ends on its own.
    pub fn timer_s(&self) -> Option<f64> {
        match self.kind {
            PhaseKind::RelaxationVideo { duration_s, .. } | PhaseKind::Baseline { duration_s } => Some(duration_s),
            PhaseKind::Task { time_limit_s, .. } => time_limit_s,
            PhaseKind::Questionnaire { .. } => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Fisher-Yates shuffle keyed by `(seed, block_id)`; identity when
/// `randomize` is unset.
pub fn randomize_tasks(tasks: &[String], randomize: bool, seed: u64, block_id: &str) -> Vec<String> {
    let mut out = tasks.to_vec();
    if randomize {
        out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ fnv1a(block_id)));
    }
    out
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl Workflow {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, WorkflowError> {
        let raw: RawWorkflow = toml::from_str(text).map_err(|e| WorkflowError::Invalid(vec![e.to_string()]))?;
        let mut problems = Vec::new();
        let corpus_dir = raw.corpus.as_ref().map(|c| base_dir.join(c));
        if let Some(dir) = &corpus_dir {
            if !dir.is_dir() {
                problems.push(format!("corpus directory {} does not exist", dir.display()));
            }
        }

        let mut questionnaires = IndexMap::new();
        questionnaires.insert(NASA_TLX_ID.to_string(), nasa_tlx());
        for q in raw.questionnaires {
            problems.extend(q.problems());
            if questionnaires.contains_key(&q.id) {
                problems.push(format!("duplicate questionnaire id {:?}", q.id));
            } else {
                questionnaires.insert(q.id.clone(), q);
            }
        }

        let mut tasks = IndexMap::new();
        for t in raw.tasks {
            let kind = match t.kind.parse::<TaskKind>() {
                Ok(k) => k,
                Err(e) => {
                    problems.push(format!("task {}: {e}", t.id));
                    continue;
                }
            };
            if kind.needs_corpus() && t.files.is_empty() {
                problems.push(format!("task {}: {} tasks need at least one corpus file", t.id, t.kind));
            }
            if !t.files.is_empty() {
                match &corpus_dir {
                    None => problems.push(format!("task {}: lists files but the workflow has no corpus", t.id)),
                    Some(dir) => {
                        for f in &t.files {
                            if !dir.join(f).is_file() {
                                problems.push(format!("task {}: corpus file {f} does not exist", t.id));
                            }
                        }
                    }
                }
            }
            if t.time_limit_s.is_some_and(|v| !positive(v)) {
                problems.push(format!("task {}: time_limit_s must be positive", t.id));
            }
            let mut instructions_text = String::new();
            if t.instructions.is_empty() {
                problems.push(format!("task {}: no instructions file", t.id));
            } else {
                match std::fs::read_to_string(base_dir.join(&t.instructions)) {
                    Ok(s) => instructions_text = s,
                    Err(_) => problems.push(format!("task {}: instructions file {} does not exist", t.id, t.instructions)),
                }
            }
            let spec = TaskSpec {
                id: t.id.clone(),
                kind,
                instructions: t.instructions,
                instructions_text,
                files: t.files,
                time_limit_s: t.time_limit_s,
            };
            if tasks.insert(t.id.clone(), spec).is_some() {
                problems.push(format!("duplicate task id {:?}", t.id));
            }
        }

        if raw.steps.is_empty() {
            problems.push("workflow has no steps".to_string());
        }
        let blocks = raw.steps.iter().filter(|s| matches!(s, Step::TaskBlock { .. })).count();
        if !raw.steps.is_empty() && blocks != 1 {
            problems.push(format!("expected exactly one task_block, found {blocks}"));
        }
        let mut ids = HashSet::new();
        let known_q = |q: &str, problems: &mut Vec<String>, step: &str| {
            if !questionnaires.contains_key(q) {
                problems.push(format!("step {step}: unknown questionnaire {q:?}"));
            }
        };
        for s in &raw.steps {
            if !ids.insert(s.id().to_string()) {
                problems.push(format!("duplicate step id {:?}", s.id()));
            }
            match s {
                Step::Questionnaire { id, questionnaire } => known_q(questionnaire, &mut problems, id),
                Step::RelaxationVideo { id, duration_s, media } => {
                    if !positive(*duration_s) {
                        problems.push(format!("step {id}: duration_s must be positive"));
                    }
                    if !base_dir.join(media).is_file() {
                        problems.push(format!("step {id}: media file {media} does not exist"));
                    }
                }
                Step::Baseline { id, duration_s } => {
                    if !positive(*duration_s) {
                        problems.push(format!("step {id}: duration_s must be positive"));
                    }
                }
                Step::TaskBlock { id, tasks: list, interleave, .. } => {
                    if list.is_empty() {
                        problems.push(format!("step {id}: task block is empty"));
                    }
                    let mut seen = HashSet::new();
                    for t in list {
                        if !tasks.contains_key(t) {
                            problems.push(format!("step {id}: unknown task {t:?}"));
                        }
                        if !seen.insert(t) {
                            problems.push(format!("step {id}: task {t:?} listed twice"));
                        }
                    }
                    if let Some(q) = interleave {
                        known_q(q, &mut problems, id);
                    }
                }
            }
        }

        if !problems.is_empty() {
            return Err(WorkflowError::Invalid(problems));
        }
        Ok(Workflow {
            id: raw.id,
            participant_seed: raw.participant_seed,
            base_dir: base_dir.to_path_buf(),
            corpus_dir,
            steps: raw.steps,
            tasks,
            questionnaires,
        })
    }

    /// Phases in presentation order for a participant seed.
    pub fn plan(&self, seed: u64) -> Vec<Phase> {
        let mut out = Vec::new();
        for s in &self.steps {
            let step_id = s.id().to_string();
            let phase = |id: String, kind| Phase { id, step_id: step_id.clone(), kind };
            match s {
                Step::Questionnaire { id, questionnaire } => out.push(phase(
                    id.clone(),
                    PhaseKind::Questionnaire { questionnaire: questionnaire.clone() },
                )),
                Step::RelaxationVideo { id, duration_s, media } => out.push(phase(
                    id.clone(),
                    PhaseKind::RelaxationVideo { duration_s: *duration_s, media: media.clone() },
                )),
                Step::Baseline { id, duration_s } => {
                    out.push(phase(id.clone(), PhaseKind::Baseline { duration_s: *duration_s }))
                }
                Step::TaskBlock { id, tasks, randomize, interleave } => {
                    for t in randomize_tasks(tasks, *randomize, seed, id) {
                        let time_limit_s = self.tasks[&t].time_limit_s;
                        out.push(phase(t.clone(), PhaseKind::Task { task: t.clone(), time_limit_s }));
                        if let Some(q) = interleave {
                            out.push(phase(
                                format!("{t}/{q}"),
                                PhaseKind::Questionnaire { questionnaire: q.clone() },
                            ));
                        }
                    }
                }
            }
        }
        out
    }

    /// Stages of the procedure as a participant experiences them: one per
    /// step, plus one for a task block's interleaved questionnaire.
    pub fn phase_count(&self) -> usize {
        self.steps
            .iter()
            .map(|s| match s {
                Step::TaskBlock { interleave: Some(_), .. } => 2,
                _ => 1,
            })
            .sum()
    }

    pub fn task_block(&self) -> Option<&Step> {
        self.steps.iter().find(|s| matches!(s, Step::TaskBlock { .. }))
    }
}

pub fn load_workflow(path: &Path) -> Result<Workflow, WorkflowError> {
    let text = std::fs::read_to_string(path).map_err(|source| WorkflowError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Workflow::parse(&text, path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tasks(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    #[test]
    fn unrandomized_block_keeps_order() {
        assert_eq!(randomize_tasks(&tasks(4), false, 99, "b"), tasks(4));
    }

    #[test]
    fn shuffles_are_permutations_and_reproducible() {
        for seed in [1, 2, 3, 1000] {
            let mut out = randomize_tasks(&tasks(4), true, seed, "b");
            assert_eq!(out, randomize_tasks(&tasks(4), true, seed, "b"));
            out.sort();
            assert_eq!(out, tasks(4));
        }
        let differs = (0..20).any(|s| randomize_tasks(&tasks(4), true, s, "a") != randomize_tasks(&tasks(4), true, s, "b"));
        assert!(differs);
    }

    #[test]
    fn rejects_empty_and_reports_every_problem() {
        let dir = std::env::temp_dir();
        let Err(WorkflowError::Invalid(p)) = Workflow::parse("id = \"x\"\n", &dir) else { panic!() };
        assert_eq!(p, ["workflow has no steps"]);
        let text = r#"
            id = "x"
            [[steps]]
            type = "baseline"
            id = "b"
            duration_s = 0
            [[steps]]
            type = "questionnaire"
            id = "b"
            questionnaire = "nope"
            [[tasks]]
            id = "t"
            kind = "juggling"
        "#;
        let Err(WorkflowError::Invalid(p)) = Workflow::parse(text, &dir) else { panic!() };
        assert_eq!(p.len(), 5, "{p:?}");
    }
}
