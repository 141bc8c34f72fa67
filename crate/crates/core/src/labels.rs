use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

/// Recognition task; fixes the number of states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    FreeActive,
    Gesture,
    ObjectCategory,
    /// Any other label count (at least 2), e.g. synthetic benchmarks.
    Custom(usize),
}

impl Task {
    /// Number of states including the free-hand state.
    pub fn label_count(self) -> usize {
        match self {
            Task::FreeActive => 2,
            Task::Gesture => 13,
            Task::ObjectCategory => 24,
            Task::Custom(k) => k,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::FreeActive => "free_active",
            Task::Gesture => "gesture",
            Task::ObjectCategory => "object_category",
            Task::Custom(_) => "custom",
        }
    }

    /// Parses a task name; `custom` takes its label count from `labels`.
    pub fn from_name(name: &str, labels: usize) -> Option<Task> {
        match name {
            "free_active" => Some(Task::FreeActive),
            "gesture" => Some(Task::Gesture),
            "object_category" => Some(Task::ObjectCategory),
            "custom" => Some(Task::Custom(labels)),
            _ => None,
        }
    }
}

/// Ordered set of state names for one task.
///
/// Label order is the declaration order; label indices are positions in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSpace {
    task: Task,
    labels: Vec<String>,
    free_label_index: usize,
}

impl LabelSpace {
    pub fn new(task: Task, labels: Vec<String>, free_label_index: usize) -> Result<Self> {
        if task.label_count() < 2 {
            return Err(Error::InvalidLabelSpace(
                "at least two labels are required".into(),
            ));
        }
        if labels.len() != task.label_count() {
            return Err(Error::InvalidLabelSpace(format!(
                "task {} needs {} labels, got {}",
                task.name(),
                task.label_count(),
                labels.len()
            )));
        }
        for (i, name) in labels.iter().enumerate() {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(Error::InvalidLabelSpace(format!(
                    "label {name:?} is empty or contains whitespace"
                )));
            }
            if labels[..i].contains(name) {
                return Err(Error::InvalidLabelSpace(format!(
                    "duplicate label {name:?}"
                )));
            }
        }
        if free_label_index >= labels.len() {
            return Err(Error::InvalidLabelSpace(format!(
                "free label index {free_label_index} out of range"
            )));
        }
        Ok(LabelSpace {
            task,
            labels,
            free_label_index,
        })
    }

    /// Built-in label space with the free state first and numbered placeholders for the rest.
    pub fn standard(task: Task) -> Self {
        let labels = match task {
            Task::Custom(k) => (0..k).map(|i| format!("state{i}")).collect(),
            Task::FreeActive => alloc::vec!["free".to_string(), "active".to_string()],
            Task::Gesture => core::iter::once("free".to_string())
                .chain((1..=12).map(|i| format!("gesture{i:02}")))
                .collect(),
            Task::ObjectCategory => core::iter::once("free".to_string())
                .chain((1..=23).map(|i| format!("object{i:02}")))
                .collect(),
        };
        LabelSpace {
            task,
            labels,
            free_label_index: 0,
        }
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn free_label_index(&self) -> usize {
        self.free_label_index
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }
}

/// Per-frame states `S = [s_1..s_N]` over a label space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSequence {
    label_space: LabelSpace,
    states: Vec<usize>,
}

impl StateSequence {
    pub fn new(label_space: LabelSpace, states: Vec<usize>) -> Result<Self> {
        let count = label_space.len();
        if let Some(&index) = states.iter().find(|&&s| s >= count) {
            return Err(Error::InvalidLabel { index, count });
        }
        Ok(StateSequence {
            label_space,
            states,
        })
    }

    pub fn from_names<S: AsRef<str>>(label_space: LabelSpace, names: &[S]) -> Result<Self> {
        let states = names
            .iter()
            .map(|n| label_space.index_of(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(StateSequence {
            label_space,
            states,
        })
    }

    pub fn label_space(&self) -> &LabelSpace {
        &self.label_space
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Frame indices where a new state begins (the first frame of the new state).
    pub fn transitions(&self) -> Vec<usize> {
        (1..self.states.len())
            .filter(|&i| self.states[i] != self.states[i - 1])
            .collect()
    }

    /// Maximal constant runs as `(start, end, state)` with `end` exclusive.
    pub fn runs(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.states.len() {
            if i == self.states.len() || self.states[i] != self.states[start] {
                out.push((start, i, self.states[start]));
                start = i;
            }
        }
        out
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.states
            .iter()
            .map(move |&s| self.label_space.labels[s].as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn standard_spaces_have_expected_sizes() {
        assert_eq!(LabelSpace::standard(Task::FreeActive).len(), 2);
        assert_eq!(LabelSpace::standard(Task::Gesture).len(), 13);
        assert_eq!(LabelSpace::standard(Task::ObjectCategory).len(), 24);
        for task in [Task::FreeActive, Task::Gesture, Task::ObjectCategory] {
            let s = LabelSpace::standard(task);
            LabelSpace::new(task, s.labels().to_vec(), 0).unwrap();
        }
    }

    #[test]
    fn rejects_bad_spaces() {
        let two = |a: &str, b: &str| vec![a.to_string(), b.to_string()];
        assert!(LabelSpace::new(Task::FreeActive, two("free", "free"), 0).is_err());
        assert!(LabelSpace::new(Task::FreeActive, two("free", "active"), 2).is_err());
        assert!(LabelSpace::new(Task::Gesture, two("free", "active"), 0).is_err());
        assert!(LabelSpace::new(Task::FreeActive, two("free", "in hand"), 0).is_err());
        assert!(LabelSpace::new(Task::Custom(1), vec!["x".into()], 0).is_err());
        assert_eq!(LabelSpace::standard(Task::Custom(3)).len(), 3);
    }

    #[test]
    fn sequence_validation_and_runs() {
        let space = LabelSpace::standard(Task::FreeActive);
        assert!(StateSequence::new(space.clone(), vec![0, 2]).is_err());
        let seq = StateSequence::from_names(space, &["free", "active", "active", "free", "active"])
            .unwrap();
        assert_eq!(seq.transitions(), vec![1, 3, 4]);
        assert_eq!(seq.runs(), vec![(0, 1, 0), (1, 3, 1), (3, 4, 0), (4, 5, 1)]);
    }
}
