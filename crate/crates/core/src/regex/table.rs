//! ε-free tabular automaton: one row per `(from_state, to_state, label)`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::nfa::{Nfa, StateId};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionRow {
    pub from_state: StateId,
    pub to_state: StateId,
    pub label: String,
}

impl TransitionRow {
    pub fn new(from_state: StateId, to_state: StateId, label: &str) -> Self {
        TransitionRow {
            from_state,
            to_state,
            label: label.to_string(),
        }
    }
}

/// Transition relation of an ε-free NFA. States are numbered densely from 1
/// and the start state is always 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionTable {
    rows: Vec<TransitionRow>,
    q0: StateId,
    accepting: BTreeSet<StateId>,
    accepts_empty: bool,
    state_count: u32,
}

impl TransitionTable {
    pub fn rows(&self) -> &[TransitionRow] {
        &self.rows
    }

    pub fn q0(&self) -> StateId {
        self.q0
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.accepting
    }

    pub fn accepts_empty(&self) -> bool {
        self.accepts_empty
    }

    pub fn state_count(&self) -> u32 {
        self.state_count
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting.contains(&q)
    }

    /// Distinct `(from, to)` pairs, in row order.
    pub fn transitions(&self) -> Vec<(StateId, StateId)> {
        let mut seen = BTreeSet::new();
        self.rows
            .iter()
            .map(|r| (r.from_state, r.to_state))
            .filter(|t| seen.insert(*t))
            .collect()
    }

    pub fn labels(&self) -> BTreeSet<&str> {
        self.rows.iter().map(|r| r.label.as_str()).collect()
    }

    /// Membership test by subset simulation.
    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> bool {
        if word.is_empty() {
            return self.accepts_empty;
        }
        let mut current = BTreeSet::from([self.q0]);
        for symbol in word {
            let symbol = symbol.as_ref();
            current = self
                .rows
                .iter()
                .filter(|r| r.label == symbol && current.contains(&r.from_state))
                .map(|r| r.to_state)
                .collect();
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|q| self.accepting.contains(q))
    }

    /// CSV rendering with header `from_state,to_state,label`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("from_state,to_state,label\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.from_state, r.to_state, r.label));
        }
        out
    }
}

impl fmt::Display for TransitionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let acc: Vec<String> = self.accepting.iter().map(|q| q.to_string()).collect();
        write!(
            f,
            "q0={}; accepting={{{}}}; accepts_empty={}",
            self.q0,
            acc.join(","),
            self.accepts_empty
        )
    }
}

/// `table_accepts` from the public surface.
pub fn table_accepts<S: AsRef<str>>(t: &TransitionTable, word: &[S]) -> bool {
    t.accepts(word)
}

fn epsilon_closure(nfa: &Nfa, eps: &BTreeMap<StateId, Vec<StateId>>, from: StateId) -> Vec<StateId> {
    let mut seen = vec![false; nfa.state_count as usize];
    let mut stack = vec![from];
    let mut out = Vec::new();
    seen[from as usize] = true;
    while let Some(s) = stack.pop() {
        out.push(s);
        for &t in eps.get(&s).into_iter().flatten() {
            if !seen[t as usize] {
                seen[t as usize] = true;
                stack.push(t);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Removes ε-moves. Only the start state and states entered by a labelled
/// move survive; states not reachable from the start or unable to reach an
/// accepting state are pruned, and survivors are renumbered from 1 in
/// breadth-first order.
pub fn eliminate_epsilon(nfa: &Nfa) -> TransitionTable {
    let mut eps: BTreeMap<StateId, Vec<StateId>> = BTreeMap::new();
    let mut labelled: BTreeMap<StateId, Vec<(&str, StateId)>> = BTreeMap::new();
    for t in &nfa.transitions {
        match &t.label {
            None => eps.entry(t.from).or_default().push(t.to),
            Some(l) => labelled.entry(t.from).or_default().push((l.as_str(), t.to)),
        }
    }

    let mut essential: BTreeSet<StateId> = labelled
        .values()
        .flatten()
        .map(|&(_, to)| to)
        .collect();
    essential.insert(nfa.q0);

    let mut edges: BTreeMap<StateId, Vec<(StateId, &str)>> = BTreeMap::new();
    let mut accepting = BTreeSet::new();
    for &p in &essential {
        let closure = epsilon_closure(nfa, &eps, p);
        if closure.iter().any(|s| nfa.accepting.contains(s)) {
            accepting.insert(p);
        }
        let mut out: Vec<(StateId, &str)> = closure
            .iter()
            .flat_map(|s| labelled.get(s).into_iter().flatten())
            .map(|&(l, to)| (to, l))
            .collect();
        out.sort_unstable();
        out.dedup();
        edges.insert(p, out);
    }

    // Co-reachability: states from which an accepting state is reachable.
    let mut live: BTreeSet<StateId> = accepting.clone();
    loop {
        let before = live.len();
        for (&p, outs) in &edges {
            if outs.iter().any(|(to, _)| live.contains(to)) {
                live.insert(p);
            }
        }
        if live.len() == before {
            break;
        }
    }

    let mut number: BTreeMap<StateId, StateId> = BTreeMap::new();
    let mut queue = VecDeque::from([nfa.q0]);
    number.insert(nfa.q0, 1);
    let mut rows = Vec::new();
    while let Some(p) = queue.pop_front() {
        let from = number[&p];
        for &(to, label) in &edges[&p] {
            if !live.contains(&to) {
                continue;
            }
            let next = number.len() as StateId + 1;
            let to_num = *number.entry(to).or_insert_with(|| {
                queue.push_back(to);
                next
            });
            rows.push(TransitionRow::new(from, to_num, label));
        }
    }
    rows.sort();
    rows.dedup();

    let accepting: BTreeSet<StateId> = accepting
        .iter()
        .filter_map(|s| number.get(s).copied())
        .collect();
    TransitionTable {
        rows,
        q0: 1,
        accepts_empty: accepting.contains(&1),
        accepting,
        state_count: number.len() as u32,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::{build_nfa, compile_regex, parse_regex};

    #[test]
    fn domestic_plus_foreign_is_three_rows() {
        let t = compile_regex("Domestic+ Foreign").unwrap();
        assert_eq!(
            t.rows(),
            &[
                TransitionRow::new(1, 2, "Domestic"),
                TransitionRow::new(2, 2, "Domestic"),
                TransitionRow::new(2, 3, "Foreign"),
            ]
        );
        assert_eq!(t.accepting(), &BTreeSet::from([3]));
        assert!(!t.accepts_empty());
        assert_eq!(t.q0(), 1);
    }

    #[test]
    fn empty_word_table() {
        let t = eliminate_epsilon(&build_nfa(&parse_regex("()").unwrap()));
        assert_eq!(t.state_count(), 1);
        assert!(t.rows().is_empty());
        assert_eq!(t.accepting(), &BTreeSet::from([1]));
        assert!(t.accepts_empty());
    }

    #[test]
    fn alternation_shares_one_source() {
        let t = compile_regex("a|b").unwrap();
        assert_eq!(t.rows().len(), 2);
        assert!(t.rows().iter().all(|r| r.from_state == 1));
        for r in t.rows() {
            assert!(t.is_accepting(r.to_state));
        }
        let labels: Vec<&str> = t.rows().iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["a", "b"]);
    }

    #[test]
    fn never_prunes_everything() {
        let t = compile_regex("a !").unwrap();
        assert!(t.rows().is_empty());
        assert!(t.accepting().is_empty());
        assert!(!t.accepts_empty());
        assert!(!t.accepts(&["a"]));
    }

    #[test]
    fn membership_examples() {
        let t = compile_regex("Domestic+ Foreign").unwrap();
        assert!(t.accepts(&["Domestic", "Foreign"]));
        assert!(t.accepts(&["Domestic", "Domestic", "Foreign"]));
        assert!(!t.accepts::<&str>(&[]));
        assert!(!t.accepts(&["Foreign"]));
        assert!(!t.accepts(&["Domestic"]));
    }

    #[test]
    fn star_accepts_empty() {
        let t = compile_regex("Domestic*").unwrap();
        assert!(t.accepts_empty());
        assert!(t.is_accepting(t.q0()));
    }

    #[test]
    fn csv_and_summary() {
        let t = compile_regex("Domestic+ Foreign").unwrap();
        assert_eq!(
            t.to_csv(),
            "from_state,to_state,label\n1,2,Domestic\n2,2,Domestic\n2,3,Foreign\n"
        );
        assert_eq!(t.to_string(), "q0=1; accepting={3}; accepts_empty=false");
    }
}
