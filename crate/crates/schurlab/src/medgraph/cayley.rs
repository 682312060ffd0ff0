use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{check_budget, FiniteGraph};

/// A letter g_i^p of the free product, factor i ∈ {0,1,2}, p ∈ {1,2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub factor: u8,
    pub power: u8,
}

impl Letter {
    /// "a", "A" (= a²), "b", "B", "c", "C".
    pub fn symbol(self) -> char {
        let base = [b'a', b'b', b'c'][self.factor as usize];
        if self.power == 1 {
            base as char
        } else {
            base.to_ascii_uppercase() as char
        }
    }
}

const GENERATORS: [Letter; 6] = [
    Letter { factor: 0, power: 1 },
    Letter { factor: 0, power: 2 },
    Letter { factor: 1, power: 1 },
    Letter { factor: 1, power: 2 },
    Letter { factor: 2, power: 1 },
    Letter { factor: 2, power: 2 },
];

/// Reduced form of w·g.
pub fn right_multiply(w: &[Letter], g: Letter) -> Vec<Letter> {
    let mut out = w.to_vec();
    match out.last_mut() {
        Some(last) if last.factor == g.factor => {
            let p = (last.power + g.power) % 3;
            if p == 0 {
                out.pop();
            } else {
                last.power = p;
            }
        }
        _ => out.push(g),
    }
    out
}

pub fn word_label(w: &[Letter]) -> String {
    if w.is_empty() {
        "e".into()
    } else {
        w.iter().map(|l| l.symbol()).collect()
    }
}

/// Ball of radius R around e in the Cayley graph of ℤ₃∗ℤ₃∗ℤ₃ for the
/// six generators; vertex i holds the reduced word `words[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleyBall {
    pub graph: FiniteGraph,
    pub words: Vec<Vec<Letter>>,
    pub radius: usize,
}

pub fn cayley_ball(radius: usize) -> Result<CayleyBall> {
    if radius == 0 {
        return Err(Error::InvalidInput("Cayley ball needs R ≥ 1".into()));
    }
    let count = 1 + 6 * (4usize.saturating_pow(radius as u32) - 1) / 3;
    check_budget(count)?;
    let mut words: Vec<Vec<Letter>> = vec![Vec::new()];
    let mut index: HashMap<Vec<Letter>, usize> = HashMap::from([(Vec::new(), 0)]);
    let mut head = 0;
    while head < words.len() {
        if words[head].len() < radius {
            for g in GENERATORS {
                let w = right_multiply(&words[head], g);
                if w.len() > words[head].len() && !index.contains_key(&w) {
                    index.insert(w.clone(), words.len());
                    words.push(w);
                }
            }
        }
        head += 1;
    }
    let mut edges = Vec::new();
    for (i, w) in words.iter().enumerate() {
        for g in GENERATORS {
            if let Some(&j) = index.get(&right_multiply(w, g)) {
                if i < j {
                    edges.push([i, j]);
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let labels = words.iter().map(|w| word_label(w)).collect();
    Ok(CayleyBall { graph: FiniteGraph::new(labels, &edges)?, words, radius })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SerreVertex {
    /// A group element, by its index in the Cayley ball.
    Word(usize),
    /// The coset p·G_i with p not ending in a letter of G_i.
    Coset { prefix: usize, factor: u8 },
}

/// Finite ball of the Serre tree Γ(G) around e together with a labelling
/// of its vertices by reduced words over t, t⁻¹, s (Γ is the Cayley graph
/// of ⟨t, s | s²⟩, the 3-regular tree). At e the cosets G₁, G₂, G₃ get
/// t⁻¹, t, s.
#[derive(Debug, Clone, PartialEq)]
pub struct SerreTree {
    pub graph: FiniteGraph,
    pub kinds: Vec<SerreVertex>,
    /// Ψ: Cayley index ↦ Γ index.
    pub psi: Vec<usize>,
    pub root: usize,
    pub radius: usize,
    /// Letters 0 = t, 1 = t⁻¹, 2 = s.
    pub ts_words: Vec<Vec<u8>>,
    ts_index: HashMap<Vec<u8>, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerreCheck {
    pub word_vertices: usize,
    pub coset_vertices: usize,
    pub pairs_checked: usize,
    pub distance_doubling: bool,
    pub interior_degree_three: bool,
    pub injective: bool,
}

impl SerreCheck {
    pub fn passed(&self) -> bool {
        self.distance_doubling && self.interior_degree_three && self.injective
    }
}

fn ts_inverse(l: u8) -> u8 {
    match l {
        0 => 1,
        1 => 0,
        _ => 2,
    }
}

/// Builds the Γ(G) ball of the given radius (2R or 2R + 1 for a Cayley
/// ball of radius R) and checks d_Γ(Ψx, Ψy) = 2 d(x, y) on all pairs.
pub fn serre_embedding(ball: &CayleyBall, target_radius: usize) -> Result<(SerreTree, SerreCheck)> {
    let r = ball.radius;
    if target_radius < 2 * r || target_radius > 2 * r + 1 {
        return Err(Error::RadiusMismatch { radius: r, target: target_radius });
    }
    let index: HashMap<&[Letter], usize> = ball.words.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    let mut kinds: Vec<SerreVertex> = (0..ball.words.len()).map(SerreVertex::Word).collect();
    let mut coset_index: HashMap<(usize, u8), usize> = HashMap::new();
    let mut edges = Vec::new();
    for (wi, w) in ball.words.iter().enumerate() {
        for factor in 0..3u8 {
            let prefix = match w.last() {
                Some(l) if l.factor == factor => index[&w[..w.len() - 1]],
                _ => wi,
            };
            // cosets at distance 2|p| + 1 from e
            if 2 * ball.words[prefix].len() + 1 > target_radius {
                continue;
            }
            let c = *coset_index.entry((prefix, factor)).or_insert_with(|| {
                kinds.push(SerreVertex::Coset { prefix, factor });
                kinds.len() - 1
            });
            edges.push([wi, c]);
        }
    }
    let labels = kinds
        .iter()
        .map(|k| match *k {
            SerreVertex::Word(i) => ball.graph.labels[i].clone(),
            SerreVertex::Coset { prefix, factor } => {
                let p = if prefix == 0 { String::new() } else { ball.graph.labels[prefix].clone() };
                format!("{p}G{}", factor + 1)
            }
        })
        .collect();
    let graph = FiniteGraph::new(labels, &edges)?;
    let root = 0;

    // ⟨t, s⟩ labels by BFS
    let mut ts_words: Vec<Option<Vec<u8>>> = vec![None; graph.len()];
    ts_words[root] = Some(Vec::new());
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let word = ts_words[u].clone().unwrap();
        let mut available: Vec<u8> = if u == root {
            Vec::new()
        } else {
            let back = ts_inverse(*word.last().unwrap());
            [0u8, 1, 2].into_iter().filter(|&l| l != back).collect()
        };
        let children: Vec<usize> = graph.neighbors(u).iter().copied().filter(|&v| ts_words[v].is_none()).collect();
        if u == root {
            // G₁ ↦ t⁻¹, G₂ ↦ t, G₃ ↦ s
            for &v in &children {
                let SerreVertex::Coset { factor, .. } = kinds[v] else { unreachable!() };
                let mut w = word.clone();
                w.push([1u8, 0, 2][factor as usize]);
                ts_words[v] = Some(w);
                queue.push_back(v);
            }
            continue;
        }
        for v in children {
            let l = available.remove(0);
            let mut w = word.clone();
            w.push(l);
            ts_words[v] = Some(w);
            queue.push_back(v);
        }
    }
    let ts_words: Vec<Vec<u8>> = ts_words.into_iter().map(|w| w.expect("Γ ball is connected")).collect();
    let ts_index = ts_words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    let psi: Vec<usize> = (0..ball.words.len()).collect();

    let n = ball.graph.len();
    let mut doubling = true;
    for x in 0..n {
        for y in 0..n {
            if graph.d(psi[x], psi[y]) != 2 * ball.graph.d(x, y) {
                doubling = false;
            }
        }
    }
    let interior_degree_three =
        (0..graph.len()).filter(|&v| graph.d(root, v) < target_radius).all(|v| graph.neighbors(v).len() == 3);
    let mut seen = psi.clone();
    seen.sort_unstable();
    seen.dedup();
    let check = SerreCheck {
        word_vertices: n,
        coset_vertices: graph.len() - n,
        pairs_checked: n * n,
        distance_doubling: doubling,
        interior_degree_three,
        injective: seen.len() == n,
    };
    Ok((SerreTree { graph, kinds, psi, root, radius: target_radius, ts_words, ts_index }, check))
}

impl SerreTree {
    /// f(v) = t·v on the ⟨t, s⟩ labels, when the image lies in the ball.
    pub fn shift(&self, v: usize) -> Option<usize> {
        let w = &self.ts_words[v];
        let image: Vec<u8> = if w.first() == Some(&1) { w[1..].to_vec() } else { std::iter::once(0).chain(w.iter().copied()).collect() };
        self.ts_index.get(&image).copied()
    }

    pub fn is_word(&self, v: usize) -> bool {
        matches!(self.kinds[v], SerreVertex::Word(_))
    }

    pub fn index_of_coset(&self, prefix: usize, factor: u8) -> Option<usize> {
        self.kinds.iter().position(|k| *k == SerreVertex::Coset { prefix, factor })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerreShift {
    pub image: Vec<Option<usize>>,
    /// Vertices whose image stays in the ball.
    pub overlap: usize,
    pub swaps_classes: bool,
    pub root_distance_changes_by_one: bool,
    /// Ψ(X) ∩ f(Ψ(X)) = ∅ and every vertex with a preimage lies in Ψ(X) ∪ f(Ψ(X)).
    pub partition: bool,
    pub parity_separates_classes: bool,
    pub f_of_root: Option<usize>,
    /// The vertex sent to the root (G₁).
    pub preimage_of_root: Option<usize>,
}

impl SerreShift {
    pub fn passed(&self) -> bool {
        self.swaps_classes && self.root_distance_changes_by_one && self.partition && self.parity_separates_classes
    }
}

pub fn serre_shift(tree: &SerreTree) -> SerreShift {
    let g = &tree.graph;
    let image: Vec<Option<usize>> = (0..g.len()).map(|v| tree.shift(v)).collect();
    let mut swaps = true;
    let mut shift_one = true;
    let mut pre: Vec<Option<usize>> = vec![None; g.len()];
    for (v, fv) in image.iter().enumerate() {
        if let Some(fv) = *fv {
            pre[fv] = Some(v);
            swaps &= tree.is_word(v) != tree.is_word(fv);
            shift_one &= g.d(tree.root, v).abs_diff(g.d(tree.root, fv)) == 1;
        }
    }
    let in_f_image = |v: usize| pre[v].is_some_and(|p| tree.is_word(p));
    let partition = (0..g.len()).filter(|&v| pre[v].is_some()).all(|v| tree.is_word(v) != in_f_image(v));
    let parity = (0..g.len()).all(|v| tree.is_word(v) == (g.d(tree.root, v) % 2 == 0));
    SerreShift {
        overlap: image.iter().filter(|v| v.is_some()).count(),
        swaps_classes: swaps,
        root_distance_changes_by_one: shift_one,
        partition,
        parity_separates_classes: parity,
        f_of_root: image[tree.root],
        preimage_of_root: pre[tree.root],
        image,
    }
}
