//! Exact language inclusion between templates.
//!
//! Each template denotes a regular language: literal blocks interleaved with
//! "one or more of anything". Inclusion is decided on the product of the
//! left template's NFA with the lazily determinized NFA of the right template.
//! The alphabet is reduced to the characters occurring in either template plus
//! one symbol standing for every other character; the right automaton cannot
//! tell such characters apart, so the reduction is exact.

use std::collections::{HashMap, HashSet, VecDeque};

use super::{Template, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Sym {
    Char(char),
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Item {
    Char(char),
    /// One mandatory character of anything; the following state loops on any.
    Plus,
}

/// Position automaton of a template: states `0..=items.len()`, accepting only
/// at the end.
struct Nfa {
    items: Vec<Item>,
}

impl Nfa {
    fn new(t: &Template) -> Nfa {
        let mut items = Vec::new();
        for tok in t.tokens() {
            match tok {
                Token::Literal(s) => items.extend(s.chars().map(Item::Char)),
                Token::Wildcard => items.push(Item::Plus),
            }
        }
        Nfa { items }
    }

    fn accepting(&self, state: usize) -> bool {
        state == self.items.len()
    }

    fn step(&self, state: usize, sym: Sym, out: &mut Vec<usize>) {
        if let Some(item) = self.items.get(state) {
            let advance = match (item, sym) {
                (Item::Plus, _) => true,
                (Item::Char(c), Sym::Char(d)) => *c == d,
                (Item::Char(_), Sym::Other) => false,
            };
            if advance {
                out.push(state + 1);
            }
        }
        if state > 0 && self.items[state - 1] == Item::Plus {
            out.push(state);
        }
    }
}

/// Subset construction over an [`Nfa`], built on demand.
struct LazyDfa<'a> {
    nfa: &'a Nfa,
    states: Vec<Vec<usize>>,
    ids: HashMap<Vec<usize>, usize>,
    delta: HashMap<(usize, usize), usize>,
}

impl<'a> LazyDfa<'a> {
    fn new(nfa: &'a Nfa) -> LazyDfa<'a> {
        let mut dfa = LazyDfa {
            nfa,
            states: Vec::new(),
            ids: HashMap::new(),
            delta: HashMap::new(),
        };
        dfa.intern(vec![0]);
        dfa
    }

    fn intern(&mut self, set: Vec<usize>) -> usize {
        if let Some(&id) = self.ids.get(&set) {
            return id;
        }
        let id = self.states.len();
        self.states.push(set.clone());
        self.ids.insert(set, id);
        id
    }

    fn accepting(&self, id: usize) -> bool {
        self.states[id].iter().any(|&s| self.nfa.accepting(s))
    }

    fn step(&mut self, id: usize, sym_idx: usize, sym: Sym) -> usize {
        if let Some(&next) = self.delta.get(&(id, sym_idx)) {
            return next;
        }
        let mut next = Vec::new();
        for &s in &self.states[id] {
            self.nfa.step(s, sym, &mut next);
        }
        next.sort_unstable();
        next.dedup();
        let next_id = self.intern(next);
        self.delta.insert((id, sym_idx), next_id);
        next_id
    }
}

fn alphabet(a: &Template, b: &Template) -> Vec<Sym> {
    let mut chars: Vec<char> = a
        .tokens()
        .iter()
        .chain(b.tokens())
        .filter_map(Token::literal)
        .flat_map(str::chars)
        .collect();
    chars.sort_unstable();
    chars.dedup();
    let mut syms: Vec<Sym> = chars.into_iter().map(Sym::Char).collect();
    syms.push(Sym::Other);
    syms
}

/// True iff every string matched by `t1` is matched by `t2`.
pub fn language_subset(t1: &Template, t2: &Template) -> bool {
    if t1 == t2 {
        return true;
    }
    let left = Nfa::new(t1);
    let right = Nfa::new(t2);
    let syms = alphabet(t1, t2);
    let mut dfa = LazyDfa::new(&right);

    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert((0, 0));
    queue.push_back((0usize, 0usize));
    let mut next = Vec::new();

    while let Some((l, r)) = queue.pop_front() {
        if left.accepting(l) && !dfa.accepting(r) {
            return false;
        }
        for (k, &sym) in syms.iter().enumerate() {
            next.clear();
            left.step(l, sym, &mut next);
            if next.is_empty() {
                continue;
            }
            let r2 = dfa.step(r, k, sym);
            for &l2 in &next {
                if seen.insert((l2, r2)) {
                    queue.push_back((l2, r2));
                }
            }
        }
    }
    true
}

/// Proper inclusion: `t1` matches a strict subset of what `t2` matches.
pub fn strict_subset(t1: &Template, t2: &Template) -> bool {
    language_subset(t1, t2) && !language_subset(t2, t1)
}
