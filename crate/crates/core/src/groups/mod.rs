//! Orders, conjugacy-class statistics and brute-force checks for
//! `GL_2`, `SL_2`, `GSp_4`, `Sp_4` over `F_l` and their quotients by `±1`.

pub mod finite;
pub mod matrix;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, primitive_root};
use crate::curves::CharPolyClass;
use crate::{Error, Result};
use finite::{FiniteGroup, GroupElem, ModSign};
use matrix::{similitude, symplectic_form, Mat, Mat2, Mat4};

/// Cap on orbit computations in brute mode.
pub const BRUTE_CAP: usize = 1_000_000;
/// Largest `l` for brute-force `g = 1` work.
pub const MAX_BRUTE_L_GENUS1: u64 = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// `GSp_{2g}`; for `g = 1` this is `GL_2`.
    Similitude,
    /// `Sp_{2g}`; for `g = 1` this is `SL_2`.
    Symplectic,
    SimilitudeModSign,
    SymplecticModSign,
}

impl Flavor {
    fn is_quotient(self) -> bool {
        matches!(self, Flavor::SimilitudeModSign | Flavor::SymplecticModSign)
    }

    fn is_similitude(self) -> bool {
        matches!(self, Flavor::Similitude | Flavor::SimilitudeModSign)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub g: u8,
    pub l: u64,
    pub flavor: Flavor,
}

impl GroupSpec {
    pub fn new(g: u8, l: u64, flavor: Flavor) -> Result<Self> {
        if !(1..=2).contains(&g) {
            return Err(Error::Unsupported(format!("genus {g}")));
        }
        if l == 2 {
            return Err(Error::Unsupported("l = 2".into()));
        }
        if !is_prime(l) || l > 251 {
            return Err(Error::Invalid(format!("l = {l} is not a supported odd prime")));
        }
        Ok(GroupSpec { g, l, flavor })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassMode {
    Brute,
    CharPoly,
}

/// Class key → number of elements in that class.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassTable {
    pub entries: BTreeMap<String, u64>,
}

impl ClassTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }
}

/// `|Sp_{2g}(F_l)| = l^{g²} Π (l^{2i} - 1)`, times `l - 1` for similitudes,
/// halved for quotients.
pub fn group_order(spec: &GroupSpec) -> Result<u128> {
    let l = spec.l as u128;
    let g = spec.g as u32;
    let mut n = l.pow(g * g);
    for i in 1..=g {
        n *= l.pow(2 * i) - 1;
    }
    if spec.flavor.is_similitude() {
        n *= l - 1;
    }
    if spec.flavor.is_quotient() {
        n /= 2;
    }
    Ok(n)
}

fn sl2_generators(l: u64) -> Vec<Mat2> {
    vec![Mat2::new(l, [[1, 1], [0, 1]]), Mat2::new(l, [[1, 0], [1, 1]])]
}

fn gl2_generators(l: u64) -> Vec<Mat2> {
    let mut gens = sl2_generators(l);
    gens.push(Mat2::new(l, [[primitive_root(l) as i64, 0], [0, 1]]));
    gens
}

fn block(l: u64, a: [[i64; 2]; 2], b: [[i64; 2]; 2], c: [[i64; 2]; 2], d: [[i64; 2]; 2]) -> Mat4 {
    let mut rows = [[0i64; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            rows[i][j] = a[i][j];
            rows[i][j + 2] = b[i][j];
            rows[i + 2][j] = c[i][j];
            rows[i + 2][j + 2] = d[i][j];
        }
    }
    Mat4::new(l, rows)
}

fn sp4_generators(l: u64) -> Vec<Mat4> {
    const I: [[i64; 2]; 2] = [[1, 0], [0, 1]];
    const Z: [[i64; 2]; 2] = [[0, 0], [0, 0]];
    const E11: [[i64; 2]; 2] = [[1, 0], [0, 0]];
    let mut gens = vec![block(l, I, E11, Z, I), block(l, I, Z, E11, I)];
    for a in gl2_generators(l) {
        // diag(A, A^{-T})
        let ait = a.inverse().expect("unit").transpose();
        let m = |x: &Mat2| [[x.get(0, 0) as i64, x.get(0, 1) as i64], [x.get(1, 0) as i64, x.get(1, 1) as i64]];
        gens.push(block(l, m(&a), Z, Z, m(&ait)));
    }
    gens
}

fn gsp4_generators(l: u64) -> Vec<Mat4> {
    let mut gens = sp4_generators(l);
    let g = primitive_root(l) as i64;
    gens.push(Mat4::new(l, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, g, 0], [0, 0, 0, g]]));
    gens
}

fn generators2(spec: &GroupSpec) -> Vec<Mat2> {
    if spec.flavor.is_similitude() {
        gl2_generators(spec.l)
    } else {
        sl2_generators(spec.l)
    }
}

fn generators4(spec: &GroupSpec) -> Vec<Mat4> {
    if spec.flavor.is_similitude() {
        gsp4_generators(spec.l)
    } else {
        sp4_generators(spec.l)
    }
}

fn quotient<const N: usize>(gens: &[Mat<N>]) -> Vec<ModSign<N>> {
    gens.iter().map(|&m| ModSign::new(m)).collect()
}

/// Element count by a route independent of the order formula: a full
/// `l⁴` scan for `g = 1`, and for `g = 2` the generated closure with every
/// element checked against the symplectic form.
pub fn brute_force_order(spec: &GroupSpec) -> Result<u128> {
    let l = spec.l;
    let count = if spec.g == 1 {
        if l > MAX_BRUTE_L_GENUS1 {
            return Err(Error::Infeasible(format!("scan of GL_2(F_{l})")));
        }
        (0..l.pow(4))
            .map(|c| Mat2::from_code(l, c))
            .filter(|m| {
                let d = m.det();
                if spec.flavor.is_similitude() {
                    d != 0
                } else {
                    d == 1
                }
            })
            .count() as u128
    } else {
        let group = FiniteGroup::generate(Mat4::identity(l), &generators4(spec), BRUTE_CAP)?;
        let members = group
            .elements()
            .iter()
            .filter(|m| match similitude(m) {
                Some(mu) => spec.flavor.is_similitude() || mu == 1,
                None => false,
            })
            .count();
        if members != group.order() {
            return Err(Error::Internal("closure left the symplectic group".into()));
        }
        members as u128
    };
    Ok(if spec.flavor.is_quotient() { count / 2 } else { count })
}

fn table_by_class<E: GroupElem>(group: &FiniteGroup<E>, key: impl Fn(&E) -> String) -> ClassTable {
    let class = group.conjugacy_classes();
    let mut reps: BTreeMap<u32, (E, u64)> = BTreeMap::new();
    for (i, &c) in class.iter().enumerate() {
        let e = group.element(i);
        let entry = reps.entry(c).or_insert((e, 0));
        entry.0 = entry.0.min(e);
        entry.1 += 1;
    }
    ClassTable {
        entries: reps.values().map(|(e, n)| (key(e), *n)).collect(),
    }
}

fn charpoly_key<const N: usize>(m: &Mat<N>) -> CharPolyClass {
    let l = m.l();
    if N == 2 {
        CharPolyClass::Genus1 {
            l,
            trace: m.trace(),
            det: m.det(),
        }
    } else {
        let c = m.charpoly();
        CharPolyClass::Genus2 {
            l,
            a1: c[1],
            a2: c[2],
            mult: similitude(m).unwrap_or(0),
        }
    }
}

fn charpoly_table<const N: usize>(elems: &[Mat<N>]) -> ClassTable {
    let mut entries = BTreeMap::new();
    for m in elems {
        *entries.entry(charpoly_key(m).to_string()).or_insert(0) += 1;
    }
    ClassTable { entries }
}

fn gsp4_f3() -> &'static FiniteGroup<Mat4> {
    static GROUP: OnceLock<FiniteGroup<Mat4>> = OnceLock::new();
    GROUP.get_or_init(|| {
        FiniteGroup::generate(Mat4::identity(3), &gsp4_generators(3), BRUTE_CAP)
            .expect("GSp_4(F_3) has 103680 elements")
    })
}

fn check_brute_feasible(spec: &GroupSpec) -> Result<()> {
    let order = group_order(spec)?;
    let feasible = match spec.g {
        1 => spec.l <= MAX_BRUTE_L_GENUS1,
        _ => spec.l == 3,
    };
    if !feasible || order > BRUTE_CAP as u128 {
        return Err(Error::Infeasible(format!("group of order {order}")));
    }
    Ok(())
}

pub fn class_table(spec: &GroupSpec, mode: ClassMode) -> Result<ClassTable> {
    check_brute_feasible(spec)?;
    let l = spec.l;
    match (spec.g, mode) {
        (1, ClassMode::CharPoly) | (2, ClassMode::CharPoly) if spec.flavor.is_quotient() => Err(
            Error::Unsupported("char-poly keys are not defined on the quotient by ±1".into()),
        ),
        (1, ClassMode::Brute) => {
            let gens = generators2(spec);
            if spec.flavor.is_quotient() {
                let g = FiniteGroup::generate(ModSign::new(Mat2::identity(l)), &quotient(&gens), BRUTE_CAP)?;
                Ok(table_by_class(&g, |e| e.rep().to_string()))
            } else {
                let g = FiniteGroup::generate(Mat2::identity(l), &gens, BRUTE_CAP)?;
                Ok(table_by_class(&g, |e| e.to_string()))
            }
        }
        (1, ClassMode::CharPoly) => {
            let g = FiniteGroup::generate(Mat2::identity(l), &generators2(spec), BRUTE_CAP)?;
            Ok(charpoly_table(g.elements()))
        }
        (_, ClassMode::Brute) => {
            let gens = generators4(spec);
            if spec.flavor.is_quotient() {
                let g = FiniteGroup::generate(ModSign::new(Mat4::identity(l)), &quotient(&gens), BRUTE_CAP)?;
                Ok(table_by_class(&g, |e| e.rep().to_string()))
            } else {
                let g = FiniteGroup::generate(Mat4::identity(l), &gens, BRUTE_CAP)?;
                Ok(table_by_class(&g, |e| e.to_string()))
            }
        }
        (_, ClassMode::CharPoly) => {
            let elems: Vec<Mat4> = gsp4_f3()
                .elements()
                .iter()
                .filter(|m| spec.flavor.is_similitude() || similitude(*m) == Some(1))
                .copied()
                .collect();
            Ok(charpoly_table(&elems))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Property1Row {
    pub l: u64,
    pub order: u128,
    pub order_ratio: f64,
    pub classes: usize,
    pub class_ratio: f64,
}

/// `|G_l| / l^{β₁}` and `|G_l^#| / l^{β₂}` for `G_l = GSp_{2g}(F_l)/±1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Property1Report {
    pub g: u8,
    pub order_exponent: u32,
    pub class_exponent: u32,
    pub rows: Vec<Property1Row>,
    /// Smallest constants that work over the tested range.
    pub order_constant: f64,
    pub class_constant: f64,
}

impl Property1Report {
    pub fn passes(&self, bound: f64) -> bool {
        self.order_constant <= bound && self.class_constant <= bound
    }
}

pub fn property1_check(g: u8, ls: &[u64]) -> Result<Property1Report> {
    let order_exponent = 2 * (g as u32) * (g as u32) + g as u32 + 1;
    let class_exponent = g as u32 + 1;
    let mut rows = Vec::new();
    for &l in ls {
        let spec = GroupSpec::new(g, l, Flavor::SimilitudeModSign)?;
        let order = group_order(&spec)?;
        let classes = class_table(&spec, ClassMode::Brute)?.len();
        let lf = l as f64;
        rows.push(Property1Row {
            l,
            order,
            order_ratio: order as f64 / lf.powi(order_exponent as i32),
            classes,
            class_ratio: classes as f64 / lf.powi(class_exponent as i32),
        });
    }
    let max = |f: fn(&Property1Row) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    Ok(Property1Report {
        g,
        order_exponent,
        class_exponent,
        order_constant: max(|r| r.order_ratio),
        class_constant: max(|r| r.class_ratio),
        rows,
    })
}

/// Every proper subgroup misses some conjugacy class.
pub fn jordan_check(spec: &GroupSpec) -> Result<bool> {
    let order = group_order(spec)?;
    if order > finite::SUBGROUP_CAP as u128 {
        return Err(Error::Infeasible(format!("subgroups of a group of order {order}")));
    }
    let l = spec.l;
    match (spec.g, spec.flavor.is_quotient()) {
        (1, false) => FiniteGroup::generate(Mat2::identity(l), &generators2(spec), BRUTE_CAP)?.jordan_holds(),
        (1, true) => FiniteGroup::generate(
            ModSign::new(Mat2::identity(l)),
            &quotient(&generators2(spec)),
            BRUTE_CAP,
        )?
        .jordan_holds(),
        _ => Err(Error::Infeasible("genus 2 groups exceed the subgroup cap".into())),
    }
}

/// A subgroup whose image mod `±1` is everything is the whole group.
///
/// For `g = 1, l = 3` every subgroup of `GL_2(F_3)` is checked. Otherwise
/// the constructive witness is verified: both lifts `±J` of the form lie in
/// `Sp_4` and square to `-1`, so any subgroup surjecting mod `±1` contains
/// one of them and hence `-1`.
pub fn pm1_lifting_check(g: u8, l: u64) -> Result<bool> {
    let spec = GroupSpec::new(g, l, Flavor::Similitude)?;
    if g == 1 && l == 3 {
        let group = FiniteGroup::generate(Mat2::identity(l), &gl2_generators(l), BRUTE_CAP)?;
        let n = group.order();
        for h in group.subgroups()? {
            let mut image = BTreeSet::new();
            for i in h.iter() {
                image.insert(ModSign::new(group.element(i)));
            }
            if image.len() == n / 2 && h.len() != n {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    if g == 1 {
        let j = symplectic_form::<2>(spec.l);
        return Ok([j, j.neg()].iter().all(|m| m.det() == 1 && m.mul(m) == Mat2::scalar(l, -1)));
    }
    let j = symplectic_form::<4>(spec.l);
    Ok([j, j.neg()]
        .iter()
        .all(|m| similitude(m) == Some(1) && m.mul(m) == Mat4::scalar(l, -1)))
}

/// Char-poly densities on the coset of elements with multiplier `δ`,
/// normalized by the coset size `|Sp_{2g}(F_l)|`.
pub fn charpoly_class_density(g: u8, l: u64, delta: u64) -> Result<BTreeMap<CharPolyClass, BigRational>> {
    let spec = GroupSpec::new(g, l, Flavor::Symplectic)?;
    let delta = delta % l;
    if delta == 0 {
        return Err(Error::Invalid("multiplier must be a unit".into()));
    }
    let mut counts: BTreeMap<CharPolyClass, u64> = BTreeMap::new();
    match g {
        1 => {
            if l > MAX_BRUTE_L_GENUS1 {
                return Err(Error::PredictionUnavailable(format!("g = 1, l = {l}")));
            }
            for c in 0..l.pow(4) {
                let m = Mat2::from_code(l, c);
                if m.det() == delta {
                    *counts.entry(charpoly_key(&m)).or_insert(0) += 1;
                }
            }
        }
        _ => {
            if l != 3 {
                return Err(Error::PredictionUnavailable(format!("g = 2, l = {l}")));
            }
            for m in gsp4_f3().elements() {
                if similitude(m) == Some(delta) {
                    *counts.entry(charpoly_key(m)).or_insert(0) += 1;
                }
            }
        }
    }
    let coset = BigInt::from(group_order(&spec)?);
    Ok(counts
        .into_iter()
        .map(|(k, n)| (k, BigRational::new(BigInt::from(n), coset.clone())))
        .collect())
}

/// Char-poly sets of the maximal proper subgroups of `GL_2(F_l)`; a set of
/// observed classes not contained in any of them forces the full group.
pub fn gl2_proper_charpoly_sets(l: u64) -> Result<Vec<BTreeSet<CharPolyClass>>> {
    let spec = GroupSpec::new(1, l, Flavor::Similitude)?;
    if group_order(&spec)? > finite::SUBGROUP_CAP as u128 {
        return Err(Error::Infeasible(format!("subgroups of GL_2(F_{l})")));
    }
    let group = FiniteGroup::generate(Mat2::identity(l), &gl2_generators(l), BRUTE_CAP)?;
    let mut sets: Vec<BTreeSet<CharPolyClass>> = group
        .subgroups()?
        .into_iter()
        .filter(|h| h.len() < group.order())
        .map(|h| h.iter().map(|i| charpoly_key(&group.element(i))).collect())
        .collect();
    sets.sort_by_key(|s| std::cmp::Reverse(s.len()));
    let mut maximal: Vec<BTreeSet<CharPolyClass>> = Vec::new();
    for s in sets {
        if !maximal.iter().any(|m| s.is_subset(m)) {
            maximal.push(s);
        }
    }
    Ok(maximal)
}

/// Cached result of [`gl2_proper_charpoly_sets`] at `l = 3`.
pub fn gl2_f3_proper_charpoly_sets() -> &'static [BTreeSet<CharPolyClass>] {
    static SETS: OnceLock<Vec<BTreeSet<CharPolyClass>>> = OnceLock::new();
    SETS.get_or_init(|| gl2_proper_charpoly_sets(3).expect("GL_2(F_3) is small"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(g: u8, l: u64, flavor: Flavor) -> GroupSpec {
        GroupSpec::new(g, l, flavor).unwrap()
    }

    #[test]
    fn order_examples() {
        assert_eq!(group_order(&spec(1, 5, Flavor::Symplectic)).unwrap(), 120);
        assert_eq!(group_order(&spec(2, 3, Flavor::Symplectic)).unwrap(), 51840);
        assert_eq!(group_order(&spec(1, 3, Flavor::Similitude)).unwrap(), 48);
        assert_eq!(group_order(&spec(2, 3, Flavor::SimilitudeModSign)).unwrap(), 51840);
        assert!(matches!(GroupSpec::new(1, 2, Flavor::Similitude), Err(Error::Unsupported(_))));
    }

    #[test]
    fn orders_match_scan() {
        for l in [3, 5, 7] {
            for f in [Flavor::Similitude, Flavor::Symplectic] {
                let s = spec(1, l, f);
                assert_eq!(brute_force_order(&s).unwrap(), group_order(&s).unwrap());
            }
        }
    }

    #[test]
    fn gl2_class_counts() {
        for l in [3, 5, 7] {
            let t = class_table(&spec(1, l, Flavor::Similitude), ClassMode::Brute).unwrap();
            assert_eq!(t.len() as u64, l * l - 1);
            assert_eq!(t.total() as u128, group_order(&spec(1, l, Flavor::Similitude)).unwrap());
        }
    }

    #[test]
    fn sl2_f3_trace_zero() {
        let t = class_table(&spec(1, 3, Flavor::Symplectic), ClassMode::CharPoly).unwrap();
        assert_eq!(t.entries["(0,1)"], 6);
        assert_eq!(t.total(), 24);
    }

    #[test]
    fn density_examples() {
        let d = charpoly_class_density(1, 3, 1).unwrap();
        let tr0 = CharPolyClass::Genus1 { l: 3, trace: 0, det: 1 };
        assert_eq!(d[&tr0], BigRational::new(1.into(), 4.into()));
        let total: BigRational = d.values().sum();
        assert_eq!(total, BigRational::from_integer(1.into()));
        // identity plus the 8 nontrivial unipotents
        let tr2 = CharPolyClass::Genus1 { l: 3, trace: 2, det: 1 };
        assert_eq!(d[&tr2], BigRational::new(9.into(), 24.into()));
        assert!(matches!(charpoly_class_density(2, 5, 1), Err(Error::PredictionUnavailable(_))));
    }

    #[test]
    fn jordan_on_small_groups() {
        assert!(jordan_check(&spec(1, 3, Flavor::Similitude)).unwrap());
        assert!(jordan_check(&spec(1, 3, Flavor::Symplectic)).unwrap());
    }

    #[test]
    fn pm1_lifting() {
        assert!(pm1_lifting_check(1, 3).unwrap());
        assert!(pm1_lifting_check(2, 3).unwrap());
    }

    #[test]
    fn sl2_f3_is_not_onto_mod_sign() {
        // the image of SL_2(F_3) in GL_2(F_3)/±1 has index 2
        let g = FiniteGroup::generate(Mat2::identity(3), &sl2_generators(3), 100).unwrap();
        let image: BTreeSet<_> = g.elements().iter().map(|&m| ModSign::new(m)).collect();
        assert_eq!(image.len(), 12);
    }

    #[test]
    fn property1_genus1() {
        let r = property1_check(1, &[3, 5, 7]).unwrap();
        assert!(r.passes(2.0));
        for row in &r.rows {
            assert!(row.order_ratio <= 1.0);
        }
    }
}
