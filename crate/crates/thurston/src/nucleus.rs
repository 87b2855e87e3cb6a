//! Nucleus of a contracting wreath recursion and the contraction exponent.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::words::{free_ball, FreeWord};
use crate::wreath::WreathBiset;

/// Default cap on materialized balls `N^k`.
pub const DEFAULT_BALL_BUDGET: usize = 1_000_000;
/// Default cap on nucleus size and on state graphs explored while computing it.
pub const DEFAULT_NUCLEUS_BUDGET: usize = 2_000;
/// Deepest basis level tried by [`find_t`].
pub const MAX_LEVEL: usize = 8;

/// Finite state-closed symmetric set with its closure table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NucleusRaw", into = "NucleusRaw")]
pub struct Nucleus {
    elements: Vec<FreeWord>,
    index: HashMap<FreeWord, usize>,
    /// `closure[n][x-1]` is the index of `n@x`.
    closure: Vec<Vec<usize>>,
    degree: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NucleusRaw {
    pub elements: Vec<FreeWord>,
    pub closure: Vec<Vec<usize>>,
}

impl TryFrom<NucleusRaw> for Nucleus {
    type Error = Error;
    fn try_from(r: NucleusRaw) -> Result<Self> {
        let degree = r.closure.first().map_or(0, |c| c.len());
        let index: HashMap<FreeWord, usize> = r
            .elements
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        if index.len() != r.elements.len() || r.closure.len() != r.elements.len() {
            return invalid("nucleus elements and closure table disagree");
        }
        if r.closure
            .iter()
            .any(|c| c.len() != degree || c.iter().any(|&k| k >= r.elements.len()))
        {
            return invalid("nucleus closure table is malformed");
        }
        Ok(Nucleus {
            elements: r.elements,
            index,
            closure: r.closure,
            degree,
        })
    }
}

impl From<Nucleus> for NucleusRaw {
    fn from(n: Nucleus) -> Self {
        NucleusRaw {
            elements: n.elements,
            closure: n.closure,
        }
    }
}

/// States reachable from `g`, failing past `cap` vertices.
fn state_graph(
    w: &WreathBiset,
    g: &FreeWord,
    cap: usize,
) -> Result<HashMap<FreeWord, Vec<FreeWord>>> {
    let mut edges = HashMap::new();
    let mut queue = VecDeque::from([g.clone()]);
    let mut seen = HashSet::from([g.clone()]);
    while let Some(h) = queue.pop_front() {
        let sts: Vec<FreeWord> = (1..=w.degree()).map(|x| w.state(&h, x)).collect();
        for s in &sts {
            if seen.insert(s.clone()) {
                if seen.len() > cap {
                    return Err(Error::Budget(
                        "not contracting within budget (state graph)".into(),
                    ));
                }
                queue.push_back(s.clone());
            }
        }
        edges.insert(h, sts);
    }
    Ok(edges)
}

fn reachable(edges: &HashMap<FreeWord, Vec<FreeWord>>, from: &FreeWord) -> HashSet<FreeWord> {
    let mut seen = HashSet::new();
    let mut stack: Vec<FreeWord> = edges[from].clone();
    while let Some(h) = stack.pop() {
        if seen.insert(h.clone()) {
            stack.extend(edges[&h].iter().cloned());
        }
    }
    seen
}

/// Elements occurring as states at every depth below `g`: the vertices on
/// cycles of the state graph and everything reachable from them.
fn deep_states(w: &WreathBiset, g: &FreeWord, cap: usize) -> Result<HashSet<FreeWord>> {
    let edges = state_graph(w, g, cap)?;
    let mut out = HashSet::new();
    for h in edges.keys() {
        if out.contains(h) {
            continue;
        }
        let r = reachable(&edges, h);
        if r.contains(h) {
            out.extend(r);
        }
    }
    Ok(out)
}

/// Computes the nucleus: the deep-state core closed under pairwise products,
/// together with the generators, their inverses and their states.
pub fn nucleus_compute(w: &WreathBiset, budget: usize) -> Result<Nucleus> {
    let gens: Vec<FreeWord> = (1..=w.rank() as i32)
        .flat_map(|i| [FreeWord::new([i]), FreeWord::new([-i])])
        .collect();
    let mut core: HashSet<FreeWord> = HashSet::from([FreeWord::identity()]);
    for g in &gens {
        core.extend(deep_states(w, g, budget)?);
    }
    // semi-naive closure: only products involving new elements are formed
    let invs: Vec<FreeWord> = core.iter().map(|n| n.inverse()).collect();
    core.extend(invs);
    let mut elems: Vec<FreeWord> = core.iter().cloned().collect();
    let mut fresh = elems.clone();
    while !fresh.is_empty() {
        let mut added = Vec::new();
        let push = |g: FreeWord, core: &mut HashSet<FreeWord>, added: &mut Vec<FreeWord>| {
            if core.insert(g.clone()) {
                added.push(g);
            }
        };
        for p in &fresh {
            for q in &elems {
                for prod in [p.mul(q), q.mul(p)] {
                    for s in deep_states(w, &prod, budget)? {
                        let inv = s.inverse();
                        push(s, &mut core, &mut added);
                        push(inv, &mut core, &mut added);
                    }
                }
                if core.len() > budget {
                    return Err(Error::Budget("not contracting within budget".into()));
                }
            }
        }
        elems.extend(added.iter().cloned());
        fresh = added;
    }
    let mut all = core;
    let mut queue: VecDeque<FreeWord> = gens.into_iter().collect();
    while let Some(g) = queue.pop_front() {
        if all.contains(&g) {
            continue;
        }
        all.insert(g.clone());
        if all.len() > budget {
            return Err(Error::Budget("not contracting within budget".into()));
        }
        queue.push_back(g.inverse());
        for x in 1..=w.degree() {
            queue.push_back(w.state(&g, x));
        }
    }
    Nucleus::from_set(w, all)
}

impl Nucleus {
    fn from_set(w: &WreathBiset, set: HashSet<FreeWord>) -> Result<Nucleus> {
        let mut elements: Vec<FreeWord> = set.into_iter().collect();
        elements.sort();
        let index: HashMap<FreeWord, usize> = elements
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        let mut closure = Vec::with_capacity(elements.len());
        for e in &elements {
            let mut row = Vec::with_capacity(w.degree());
            for x in 1..=w.degree() {
                let s = w.state(e, x);
                match index.get(&s) {
                    Some(&k) => row.push(k),
                    None => return invalid(format!("state {s} of nucleus element {e} escapes")),
                }
            }
            closure.push(row);
        }
        Ok(Nucleus {
            elements,
            index,
            closure,
            degree: w.degree(),
        })
    }

    /// Elements in shortlex order.
    pub fn elements(&self) -> &[FreeWord] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &FreeWord) -> bool {
        self.index.contains_key(g)
    }

    /// Closure table: `closure()[n][x-1]` indexes `elements()[n]@x`.
    pub fn closure(&self) -> &[Vec<usize>] {
        &self.closure
    }

    /// Re-checks identity, inversion closure and the closure table against `w`.
    pub fn validate(&self, w: &WreathBiset) -> bool {
        self.degree == w.degree()
            && self.contains(&FreeWord::identity())
            && self.elements.iter().all(|e| self.contains(&e.inverse()))
            && self.elements.iter().zip(&self.closure).all(|(e, row)| {
                (1..=w.degree()).all(|x| self.elements[row[x - 1]] == w.state(e, x))
            })
    }

    /// Checks that every word of length at most `radius` has all its states
    /// at some depth `<= max_depth` inside the nucleus. Contraction is only
    /// ever certified on such a ball.
    pub fn verify_on_ball(&self, w: &WreathBiset, radius: usize, max_depth: usize) -> bool {
        free_ball(w.rank(), radius).iter().all(|g| {
            let mut level = vec![g.clone()];
            for _ in 0..=max_depth {
                if level.iter().all(|h| self.contains(h)) {
                    return true;
                }
                let next: HashSet<FreeWord> = level
                    .iter()
                    .flat_map(|h| (1..=w.degree()).map(move |x| (h, x)))
                    .map(|(h, x)| w.state(h, x))
                    .collect();
                level = next.into_iter().collect();
            }
            false
        })
    }
}

/// The balls `N^0 ⊆ N^1 ⊆ ... ⊆ N^k` with the `N`-length of each element.
#[derive(Clone, Debug)]
pub struct NBall {
    length: HashMap<FreeWord, usize>,
    layers: Vec<Vec<FreeWord>>,
}

impl NBall {
    pub fn new(n: &Nucleus, k: usize, budget: usize) -> Result<NBall> {
        let mut ball = NBall {
            length: HashMap::from([(FreeWord::identity(), 0)]),
            layers: vec![vec![FreeWord::identity()]],
        };
        ball.extend_to(n, k, budget)?;
        Ok(ball)
    }

    /// Grows the ball to radius `k`.
    pub fn extend_to(&mut self, n: &Nucleus, k: usize, budget: usize) -> Result<()> {
        while self.radius() < k {
            let mut layer = Vec::new();
            let r = self.radius() + 1;
            for g in &self.layers[r - 1] {
                for e in n.elements() {
                    let h = g.mul(e);
                    if !self.length.contains_key(&h) {
                        self.length.insert(h.clone(), r);
                        layer.push(h);
                        if self.length.len() > budget {
                            return Err(Error::Budget(format!(
                                "ball N^{r} exceeds {budget} elements"
                            )));
                        }
                    }
                }
            }
            layer.sort();
            self.layers.push(layer);
        }
        Ok(())
    }

    pub fn radius(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn size(&self) -> usize {
        self.length.len()
    }

    /// Least `k` with `g` in `N^k`, if within the radius.
    pub fn n_length(&self, g: &FreeWord) -> Option<usize> {
        self.length.get(g).copied()
    }

    /// Elements of `N^k` ordered by `N`-length, then shortlex.
    pub fn elements_up_to(&self, k: usize) -> impl Iterator<Item = &FreeWord> {
        self.layers.iter().take(k + 1).flatten()
    }
}

/// Nucleus with an exponent `t` such that `N^{t-slack} X^level ⊇ X^level N^t`.
#[derive(Clone, Debug)]
pub struct ContractionData {
    pub nucleus: Nucleus,
    pub level: usize,
    pub t: usize,
    pub slack: usize,
    pub ball: NBall,
}

/// Summary of contraction data for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionSummary {
    pub nucleus: Vec<FreeWord>,
    pub level: usize,
    pub t: usize,
    pub slack: usize,
}

/// For each level `m` in `1..=max_level`, the largest `N`-length of a
/// level-`m` state of an element of `N^t`. States of `N^t` stay in `N^t`, so
/// this is a dynamic program over a state table of the ball.
fn level_lengths(w: &WreathBiset, ball: &NBall, t: usize, max_level: usize) -> Vec<usize> {
    let elems: Vec<&FreeWord> = ball.elements_up_to(t).collect();
    let index: HashMap<&FreeWord, usize> = elems.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let table: Vec<Vec<usize>> = elems
        .iter()
        .map(|g| {
            (1..=w.degree())
                .map(|x| {
                    let s = w.state(g, x);
                    *index.get(&s).expect("states of N^t lie in N^t")
                })
                .collect()
        })
        .collect();
    let mut cur: Vec<usize> = elems
        .iter()
        .map(|g| ball.n_length(g).expect("in ball"))
        .collect();
    let mut out = Vec::with_capacity(max_level);
    for _ in 0..max_level {
        cur = table
            .iter()
            .map(|row| row.iter().map(|&k| cur[k]).max().unwrap_or(0))
            .collect();
        out.push(cur.iter().copied().max().unwrap_or(0));
    }
    out
}

/// Least `t >= 4` with `N^{t-3} X^m ⊇ X^m N^t` for some basis level `m`.
pub fn find_t(w: &WreathBiset, n: &Nucleus, budget: usize) -> Result<ContractionData> {
    find_t_with_slack(w, n, 3, budget)
}

/// Least `t > slack` with `N^{t-slack} X^m ⊇ X^m N^t` for some level
/// `m <= MAX_LEVEL`, least `m` among those; verified exhaustively on the ball.
pub fn find_t_with_slack(
    w: &WreathBiset,
    n: &Nucleus,
    slack: usize,
    budget: usize,
) -> Result<ContractionData> {
    find_t_with(w, n, &|_, _| Some(slack), budget)
}

/// Least `t` admitting a level `m` with `N^{t-s} X^m ⊇ X^m N^t`, where
/// `s = slack(m, ball)` may depend on the level and on the current ball
/// (`None` skips the level at this radius).
pub fn find_t_with(
    w: &WreathBiset,
    n: &Nucleus,
    slack: &dyn Fn(usize, &NBall) -> Option<usize>,
    budget: usize,
) -> Result<ContractionData> {
    let mut ball = NBall::new(n, 4, budget)?;
    let mut t = 4;
    loop {
        let lens = level_lengths(w, &ball, t, MAX_LEVEL);
        for level in 1..=MAX_LEVEL {
            if let Some(s) = slack(level, &ball) {
                if s < t && lens[level - 1] <= t - s {
                    return Ok(ContractionData {
                        nucleus: n.clone(),
                        level,
                        t,
                        slack: s,
                        ball,
                    });
                }
            }
        }
        t += 1;
        ball.extend_to(n, t, budget)?;
    }
}

impl ContractionData {
    /// Re-verifies the containment at exponent `t` (any `t' >= t` also holds).
    pub fn verify_at(&mut self, w: &WreathBiset, t: usize, budget: usize) -> Result<bool> {
        self.ball.extend_to(&self.nucleus, t, budget)?;
        Ok(t > self.slack
            && level_lengths(w, &self.ball, t, self.level)[self.level - 1] <= t - self.slack)
    }

    /// Re-verifies the containment by computing every level-`m` state of
    /// every element of `N^t` directly.
    pub fn verify_exhaustive(&self, w: &WreathBiset) -> bool {
        let words = w.level_words(self.level);
        self.ball.elements_up_to(self.t).all(|g| {
            words.iter().all(|xs| {
                let (s, _) = w.state_and_perm_level(g, xs);
                matches!(self.ball.n_length(&s), Some(k) if k <= self.t - self.slack)
            })
        })
    }

    pub fn summary(&self) -> ContractionSummary {
        ContractionSummary {
            nucleus: self.nucleus.elements().to_vec(),
            level: self.level,
            t: self.t,
            slack: self.slack,
        }
    }
}
