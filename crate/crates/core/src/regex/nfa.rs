//! Thompson construction.

use std::collections::BTreeSet;

use super::parse::RegexAst;

pub type StateId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NfaTransition {
    pub from: StateId,
    /// `None` is an ε-move.
    pub label: Option<String>,
    pub to: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    pub state_count: u32,
    pub q0: StateId,
    pub accepting: BTreeSet<StateId>,
    pub transitions: Vec<NfaTransition>,
}

#[derive(Default)]
struct Builder {
    states: u32,
    transitions: Vec<NfaTransition>,
}

impl Builder {
    fn fresh(&mut self) -> StateId {
        self.states += 1;
        self.states - 1
    }

    fn eps(&mut self, from: StateId, to: StateId) {
        self.transitions.push(NfaTransition { from, label: None, to });
    }

    /// Returns (entry, exit) of the fragment.
    fn fragment(&mut self, ast: &RegexAst) -> (StateId, StateId) {
        match ast {
            RegexAst::Empty => {
                let s = self.fresh();
                (s, s)
            }
            RegexAst::Never => (self.fresh(), self.fresh()),
            RegexAst::Label(l) => {
                let s = self.fresh();
                let f = self.fresh();
                self.transitions.push(NfaTransition {
                    from: s,
                    label: Some(l.clone()),
                    to: f,
                });
                (s, f)
            }
            RegexAst::Concat(a, b) => {
                let (a_in, a_out) = self.fragment(a);
                let (b_in, b_out) = self.fragment(b);
                self.eps(a_out, b_in);
                (a_in, b_out)
            }
            RegexAst::Alt(a, b) => {
                let s = self.fresh();
                let (a_in, a_out) = self.fragment(a);
                let (b_in, b_out) = self.fragment(b);
                let f = self.fresh();
                self.eps(s, a_in);
                self.eps(s, b_in);
                self.eps(a_out, f);
                self.eps(b_out, f);
                (s, f)
            }
            RegexAst::Star(a) | RegexAst::Plus(a) | RegexAst::Opt(a) => {
                let s = self.fresh();
                let (a_in, a_out) = self.fragment(a);
                let f = self.fresh();
                self.eps(s, a_in);
                self.eps(a_out, f);
                if !matches!(ast, RegexAst::Opt(_)) {
                    self.eps(a_out, a_in);
                }
                if !matches!(ast, RegexAst::Plus(_)) {
                    self.eps(s, f);
                }
                (s, f)
            }
        }
    }
}

/// Builds an NFA with ε-moves recognizing exactly `L(ast)`.
pub fn build_nfa(ast: &RegexAst) -> Nfa {
    let mut b = Builder::default();
    let (entry, exit) = b.fragment(ast);
    Nfa {
        state_count: b.states,
        q0: entry,
        accepting: BTreeSet::from([exit]),
        transitions: b.transitions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::parse_regex;

    #[test]
    fn single_label() {
        let n = build_nfa(&RegexAst::label("a"));
        assert_eq!(n.state_count, 2);
        assert_eq!(n.transitions.len(), 1);
        assert!(!n.accepting.contains(&n.q0));
    }

    #[test]
    fn empty_is_one_accepting_state() {
        let n = build_nfa(&RegexAst::Empty);
        assert_eq!(n.state_count, 1);
        assert!(n.accepting.contains(&n.q0));
        assert!(n.transitions.is_empty());
    }

    #[test]
    fn state_bound_holds() {
        for src in ["a", "a b", "(a|b)*c", "(a|b)+ (c|d)+", "a**", "((a?)|b)+ c*"] {
            let ast = parse_regex(src).unwrap();
            let n = build_nfa(&ast);
            assert!(n.state_count as usize <= 2 * ast.node_count(), "{src}");
            assert!(n.q0 < n.state_count);
            assert!(n
                .transitions
                .iter()
                .all(|t| t.from < n.state_count && t.to < n.state_count));
        }
    }
}
