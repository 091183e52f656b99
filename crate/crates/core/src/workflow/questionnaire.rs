use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::WorkflowError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Scale {
    /// Integer answers `1..=points`.
    Likert { points: u32 },
    Slider { min: f64, max: f64, step: f64 },
    FreeText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub prompt: String,
    pub scale: Scale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireSpec {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Answer {
    Number(f64),
    Text(String),
}

impl Answer {
    pub fn render(&self) -> String {
        match self {
            Answer::Number(v) => v.to_string(),
            Answer::Text(s) => s.clone(),
        }
    }
}

pub type Answers = BTreeMap<String, Answer>;

fn on_grid(v: f64, min: f64, step: f64) -> bool {
    let k = (v - min) / step;
    (k - k.round()).abs() < 1e-9
}

impl Scale {
    fn problems(&self) -> Option<String> {
        match *self {
            Scale::Likert { points } if points < 2 => Some(format!("likert scale needs at least 2 points, got {points}")),
            Scale::Slider { min, max, .. } if !(min.is_finite() && max.is_finite() && min < max) => {
                Some(format!("slider bounds {min}..{max} are not increasing"))
            }
            Scale::Slider { min, max, step } if !(step > 0.0 && on_grid(max, min, step)) => {
                Some(format!("slider step {step} does not divide {min}..{max}"))
            }
            _ => None,
        }
    }

    fn accepts(&self, a: &Answer) -> bool {
        match (self, a) {
            (Scale::Likert { points }, Answer::Number(v)) => v.fract() == 0.0 && *v >= 1.0 && *v <= *points as f64,
            (Scale::Slider { min, max, step }, Answer::Number(v)) => *v >= *min && *v <= *max && on_grid(*v, *min, *step),
            (Scale::FreeText, Answer::Text(_)) => true,
            _ => false,
        }
    }
}

impl QuestionnaireSpec {
    /// Every violation, prefixed with the questionnaire id.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.items.is_empty() {
            out.push(format!("questionnaire {}: no items", self.id));
        }
        let mut seen = HashSet::new();
        for item in &self.items {
            if !seen.insert(item.id.as_str()) {
                out.push(format!("questionnaire {}: duplicate item id {:?}", self.id, item.id));
            }
            if let Some(p) = item.scale.problems() {
                out.push(format!("questionnaire {} item {}: {p}", self.id, item.id));
            }
        }
        out
    }

    /// All items answered on-scale and nothing else.
    pub fn check(&self, answers: &Answers) -> Result<(), WorkflowError> {
        let mut problems = Vec::new();
        for item in &self.items {
            match answers.get(&item.id) {
                None => problems.push(format!("{}: missing", item.id)),
                Some(a) if !item.scale.accepts(a) => {
                    problems.push(format!("{}: {} is not valid for {:?}", item.id, a.render(), item.scale))
                }
                _ => {}
            }
        }
        for k in answers.keys() {
            if !self.items.iter().any(|i| &i.id == k) {
                problems.push(format!("{k}: not an item of {}", self.id));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(WorkflowError::InvalidPayload(problems.join("; ")))
        }
    }
}

pub const NASA_TLX_ID: &str = "nasa-tlx";

pub const NASA_TLX_ITEMS: [(&str, &str); 6] = [
    ("mental_demand", "How mentally demanding was the task?"),
    ("physical_demand", "How physically demanding was the task?"),
    ("temporal_demand", "How hurried or rushed was the pace of the task?"),
    ("performance", "How successful were you in accomplishing what you were asked to do?"),
    ("effort", "How hard did you have to work to accomplish your level of performance?"),
    ("frustration", "How insecure, discouraged, irritated, stressed, and annoyed were you?"),
];

pub fn nasa_tlx() -> QuestionnaireSpec {
    QuestionnaireSpec {
        id: NASA_TLX_ID.to_string(),
        title: "NASA Task Load Index".to_string(),
        items: NASA_TLX_ITEMS
            .iter()
            .map(|(id, prompt)| Item {
                id: id.to_string(),
                prompt: prompt.to_string(),
                scale: Scale::Slider { min: 0.0, max: 100.0, step: 5.0 },
            })
            .collect(),
    }
}

/// Six subscales, each in `0..=100` on a grid of 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NasaTlxResponse {
    pub mental_demand: u32,
    pub physical_demand: u32,
    pub temporal_demand: u32,
    pub performance: u32,
    pub effort: u32,
    pub frustration: u32,
}

impl NasaTlxResponse {
    pub fn values(&self) -> [u32; 6] {
        [
            self.mental_demand,
            self.physical_demand,
            self.temporal_demand,
            self.performance,
            self.effort,
            self.frustration,
        ]
    }

    pub fn from_answers(answers: &Answers) -> Result<Self, WorkflowError> {
        let get = |k: &str| match answers.get(k) {
            Some(Answer::Number(v)) if v.fract() == 0.0 && *v >= 0.0 && *v <= u32::MAX as f64 => Ok(*v as u32),
            _ => Err(WorkflowError::InvalidPayload(format!("{k}: expected an integer"))),
        };
        Ok(NasaTlxResponse {
            mental_demand: get("mental_demand")?,
            physical_demand: get("physical_demand")?,
            temporal_demand: get("temporal_demand")?,
            performance: get("performance")?,
            effort: get("effort")?,
            frustration: get("frustration")?,
        })
    }
}

/// Raw (unweighted) TLX: the mean of the six subscales.
pub fn score_nasa_tlx(r: &NasaTlxResponse) -> Result<f64, WorkflowError> {
    for (v, (name, _)) in r.values().iter().zip(NASA_TLX_ITEMS) {
        if *v > 100 || v % 5 != 0 {
            return Err(WorkflowError::InvalidPayload(format!("{name}: {v} is not in 0..=100 by 5")));
        }
    }
    Ok(r.values().iter().sum::<u32>() as f64 / 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tlx(v: [u32; 6]) -> NasaTlxResponse {
        NasaTlxResponse {
            mental_demand: v[0],
            physical_demand: v[1],
            temporal_demand: v[2],
            performance: v[3],
            effort: v[4],
            frustration: v[5],
        }
    }

    #[test]
    fn tlx_examples() {
        assert_eq!(score_nasa_tlx(&tlx([50; 6])).unwrap(), 50.0);
        assert_eq!(score_nasa_tlx(&tlx([80, 20, 60, 40, 70, 90])).unwrap(), 60.0);
        assert!(score_nasa_tlx(&tlx([52, 50, 50, 50, 50, 50])).is_err());
        assert!(score_nasa_tlx(&tlx([105, 50, 50, 50, 50, 50])).is_err());
    }

    #[test]
    fn answers_are_checked_against_scales() {
        let q = QuestionnaireSpec {
            id: "q".into(),
            title: String::new(),
            items: vec![
                Item { id: "l".into(), prompt: "p".into(), scale: Scale::Likert { points: 5 } },
                Item { id: "s".into(), prompt: "p".into(), scale: Scale::Slider { min: 0.0, max: 1.0, step: 0.25 } },
                Item { id: "t".into(), prompt: "p".into(), scale: Scale::FreeText },
            ],
        };
        assert!(q.problems().is_empty());
        let mut a = Answers::new();
        a.insert("l".into(), Answer::Number(3.0));
        a.insert("s".into(), Answer::Number(0.75));
        a.insert("t".into(), Answer::Text("ok".into()));
        assert!(q.check(&a).is_ok());
        a.insert("s".into(), Answer::Number(0.7));
        assert!(q.check(&a).is_err());
        a.insert("s".into(), Answer::Number(0.5));
        a.insert("extra".into(), Answer::Number(1.0));
        assert!(q.check(&a).is_err());
        a.remove("extra");
        a.remove("t");
        assert!(q.check(&a).is_err());
    }

    #[test]
    fn spec_validation() {
        let q = QuestionnaireSpec {
            id: "q".into(),
            title: String::new(),
            items: vec![
                Item { id: "a".into(), prompt: "p".into(), scale: Scale::Likert { points: 1 } },
                Item { id: "a".into(), prompt: "p".into(), scale: Scale::Slider { min: 0.0, max: 1.0, step: 0.3 } },
            ],
        };
        assert_eq!(q.problems().len(), 3);
        assert!(nasa_tlx().problems().is_empty());
    }
}
