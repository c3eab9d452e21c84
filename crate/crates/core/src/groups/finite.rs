//! Finite groups given by generators: closure, conjugacy classes, subgroups.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use super::matrix::Mat;
use crate::{Error, Result};

pub trait GroupElem: Copy + Eq + Hash + Ord + Debug + Send + Sync {
    fn op(&self, other: &Self) -> Self;
    fn inv(&self) -> Self;
}

impl<const N: usize> GroupElem for Mat<N> {
    fn op(&self, other: &Self) -> Self {
        self.mul(other)
    }

    fn inv(&self) -> Self {
        self.inverse().expect("group elements are invertible")
    }
}

/// Image of a matrix in the quotient by `±1`; stored as the smaller of `±M`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ModSign<const N: usize>(Mat<N>);

impl<const N: usize> ModSign<N> {
    pub fn new(m: Mat<N>) -> Self {
        ModSign(m.min(m.neg()))
    }

    pub fn rep(&self) -> &Mat<N> {
        &self.0
    }
}

impl<const N: usize> GroupElem for ModSign<N> {
    fn op(&self, other: &Self) -> Self {
        ModSign::new(self.0.mul(&other.0))
    }

    fn inv(&self) -> Self {
        ModSign::new(self.0.inverse().expect("invertible"))
    }
}

/// Element `k` of the cyclic group `Z/n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Cyclic {
    pub n: u32,
    pub k: u32,
}

impl GroupElem for Cyclic {
    fn op(&self, other: &Self) -> Self {
        Cyclic {
            n: self.n,
            k: (self.k + other.k) % self.n,
        }
    }

    fn inv(&self) -> Self {
        Cyclic {
            n: self.n,
            k: (self.n - self.k) % self.n,
        }
    }
}

/// Subset of a group's elements, as a bitset over element indices.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subset(Vec<u64>);

impl Subset {
    fn empty(n: usize) -> Self {
        Subset(vec![0; n.div_ceil(64)])
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn insert(&mut self, i: usize) -> bool {
        let fresh = !self.contains(i);
        self.0[i / 64] |= 1 << (i % 64);
        fresh
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.0.len() * 64).filter(|&i| self.contains(i))
    }
}

/// Largest group on which subgroups are enumerated.
pub const SUBGROUP_CAP: usize = 10_000;

/// A finite group as an indexed, sorted element list.
#[derive(Clone, Debug)]
pub struct FiniteGroup<E: GroupElem> {
    elems: Vec<E>,
    index: HashMap<E, u32>,
    gens: Vec<u32>,
    identity: u32,
}

impl<E: GroupElem> FiniteGroup<E> {
    /// Closure of `gens`; fails once more than `cap` elements appear.
    pub fn generate(identity: E, gens: &[E], cap: usize) -> Result<Self> {
        let mut seen: HashSet<E> = HashSet::from([identity]);
        let mut queue = VecDeque::from([identity]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = x.op(g);
                if seen.insert(y) {
                    if seen.len() > cap {
                        return Err(Error::Infeasible(format!(
                            "group closure exceeds {cap} elements"
                        )));
                    }
                    queue.push_back(y);
                }
            }
        }
        let mut elems: Vec<E> = seen.into_iter().collect();
        elems.sort();
        Ok(Self::index_elements(elems, identity, gens))
    }

    fn index_elements(elems: Vec<E>, identity: E, gens: &[E]) -> Self {
        let index: HashMap<E, u32> = elems.iter().enumerate().map(|(i, &e)| (e, i as u32)).collect();
        let gens = gens.iter().map(|g| index[g]).collect();
        let identity = index[&identity];
        FiniteGroup {
            elems,
            index,
            gens,
            identity,
        }
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn elements(&self) -> &[E] {
        &self.elems
    }

    pub fn element(&self, i: usize) -> E {
        self.elems[i]
    }

    pub fn index_of(&self, e: &E) -> Option<usize> {
        self.index.get(e).map(|&i| i as usize)
    }

    pub fn identity(&self) -> usize {
        self.identity as usize
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        self.index[&self.elems[a].op(&self.elems[b])] as usize
    }

    /// Class index of every element; classes are numbered by smallest member.
    pub fn conjugacy_classes(&self) -> Vec<u32> {
        let n = self.order();
        let gens: Vec<(E, E)> = self
            .gens
            .iter()
            .map(|&g| (self.elems[g as usize], self.elems[g as usize].inv()))
            .collect();
        let mut class = vec![u32::MAX; n];
        let mut next = 0u32;
        for start in 0..n {
            if class[start] != u32::MAX {
                continue;
            }
            class[start] = next;
            let mut stack = vec![self.elems[start]];
            while let Some(x) = stack.pop() {
                for (g, gi) in &gens {
                    let y = g.op(&x).op(gi);
                    let j = self.index[&y] as usize;
                    if class[j] == u32::MAX {
                        class[j] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        class
    }

    /// Subgroup generated by the given element indices.
    pub fn closure(&self, gens: &[usize]) -> Subset {
        let mut set = Subset::empty(self.order());
        set.insert(self.identity());
        let mut queue = VecDeque::from([self.identity()]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        set
    }

    /// Every subgroup, as joins of cyclic subgroups.
    pub fn subgroups(&self) -> Result<Vec<Subset>> {
        let n = self.order();
        if n > SUBGROUP_CAP {
            return Err(Error::Infeasible(format!(
                "subgroup enumeration on {n} elements exceeds {SUBGROUP_CAP}"
            )));
        }
        let mut cyclic: Vec<(usize, Subset)> = Vec::new();
        let mut cyclic_seen = HashSet::new();
        for g in 0..n {
            let c = self.closure(&[g]);
            if cyclic_seen.insert(c.clone()) {
                cyclic.push((g, c));
            }
        }
        let mut found: HashSet<Subset> = HashSet::new();
        let mut out = Vec::new();
        let mut queue: VecDeque<(Vec<usize>, Subset)> = VecDeque::new();
        for (g, c) in &cyclic {
            if found.insert(c.clone()) {
                out.push(c.clone());
                queue.push_back((vec![*g], c.clone()));
            }
        }
        while let Some((gens, h)) = queue.pop_front() {
            for (g, _) in &cyclic {
                if h.contains(*g) {
                    continue;
                }
                let mut more = gens.clone();
                more.push(*g);
                let k = self.closure(&more);
                if found.insert(k.clone()) {
                    out.push(k.clone());
                    queue.push_back((more, k));
                }
            }
        }
        out.sort_by_key(|s| s.len());
        Ok(out)
    }

    /// True iff every proper subgroup misses some conjugacy class.
    pub fn jordan_holds(&self) -> Result<bool> {
        let class = self.conjugacy_classes();
        let nclasses = class.iter().copied().max().map_or(0, |m| m as usize + 1);
        for h in self.subgroups()? {
            if h.len() == self.order() {
                continue;
            }
            let hit: HashSet<u32> = h.iter().map(|i| class[i]).collect();
            if hit.len() == nclasses {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic(n: u32) -> FiniteGroup<Cyclic> {
        FiniteGroup::generate(Cyclic { n, k: 0 }, &[Cyclic { n, k: 1 }], 100).unwrap()
    }

    #[test]
    fn cyclic_subgroups_match_divisors() {
        // subgroups of Z/12 correspond to the 6 divisors of 12
        assert_eq!(cyclic(12).subgroups().unwrap().len(), 6);
        assert!(cyclic(6).jordan_holds().unwrap());
    }

    #[test]
    fn closure_cap_enforced() {
        let r = FiniteGroup::generate(Cyclic { n: 50, k: 0 }, &[Cyclic { n: 50, k: 1 }], 10);
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }

    #[test]
    fn abelian_classes_are_singletons() {
        let g = cyclic(7);
        let classes = g.conjugacy_classes();
        let mut sorted = classes.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 7);
    }
}
