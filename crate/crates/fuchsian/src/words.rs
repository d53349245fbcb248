use crate::group::FuchsianGroup;
use hqe_core::geometry::GroupElement;
use serde::{Deserialize, Serialize};

/// Shortest translation length found among reduced words up to `max_len` letters.
/// This is an upper bound for the systole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystoleEstimate {
    pub value: f64,
    pub max_word_length: usize,
    pub word: Vec<i32>,
}

pub const DEFAULT_SYSTOLE_WORD_LENGTH: usize = 8;

/// Translation length 2 acosh(|tr|/2) of a hyperbolic element; None otherwise.
pub fn translation_length(g: &GroupElement) -> Option<f64> {
    let half = g.alpha.re.abs();
    (half > 1.0 + 1e-9).then(|| 2.0 * half.acosh())
}

/// Depth-first walk over all reduced words of length 1..=max_len. The callback sees the
/// word and its value; `extra` is threaded along the word (e.g. a permutation image).
pub fn walk_reduced_words<S: Clone>(
    group: &FuchsianGroup,
    max_len: usize,
    root: S,
    step: &impl Fn(&S, i32) -> S,
    visit: &mut impl FnMut(&[i32], &GroupElement, &S),
) {
    let letters: Vec<i32> = (1..=group.rank() as i32).flat_map(|a| [a, -a]).collect();
    let gens: Vec<GroupElement> = letters.iter().map(|&a| group.letter(a)).collect();
    let mut word = Vec::with_capacity(max_len);
    fn rec<S: Clone>(
        letters: &[i32],
        gens: &[GroupElement],
        max_len: usize,
        word: &mut Vec<i32>,
        g: GroupElement,
        s: S,
        step: &impl Fn(&S, i32) -> S,
        visit: &mut impl FnMut(&[i32], &GroupElement, &S),
    ) {
        if word.len() == max_len {
            return;
        }
        for (i, &a) in letters.iter().enumerate() {
            if word.last() == Some(&-a) {
                continue;
            }
            let h = g.compose(&gens[i]);
            let t = step(&s, a);
            word.push(a);
            visit(word, &h, &t);
            rec(letters, gens, max_len, word, h, t, step, visit);
            word.pop();
        }
    }
    rec(&letters, &gens, max_len, &mut word, GroupElement::identity(), root, step, visit);
}

/// Strictly shorter, or equal within 1e−9 with a shorter word.
pub(crate) fn improves(l: f64, len: usize, best: &SystoleEstimate) -> bool {
    l < best.value - 1e-9 || (l <= best.value + 1e-9 && len < best.word.len())
}

pub fn systole(group: &FuchsianGroup, max_len: usize) -> Option<SystoleEstimate> {
    let mut best: Option<SystoleEstimate> = None;
    walk_reduced_words(group, max_len, (), &|_, _| (), &mut |w, g, _| {
        if let Some(l) = translation_length(g) {
            if best.as_ref().map_or(true, |b| improves(l, w.len(), b)) {
                best = Some(SystoleEstimate { value: l, max_word_length: max_len, word: w.to_vec() });
            }
        }
    });
    best
}
