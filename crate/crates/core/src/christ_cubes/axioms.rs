//! Exhaustive audit of the five dyadic-cube properties on a finite space.

use serde::{Deserialize, Serialize};

use super::tree::DyadicCubeTree;
use crate::discrete_space::FiniteMetricMeasureSpace;

const MAX_WITNESSES: usize = 10;
const RELATIVE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub statement: String,
    pub passed: bool,
    pub checked: usize,
    pub witnesses: Vec<String>,
}

impl AxiomCheck {
    fn new(axiom: &str, statement: &str) -> Self {
        AxiomCheck {
            axiom: axiom.into(),
            statement: statement.into(),
            passed: true,
            checked: 0,
            witnesses: vec![],
        }
    }

    fn fail(&mut self, witness: String) {
        self.passed = false;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(witness);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeAxiomReport {
    pub checks: Vec<AxiomCheck>,
    pub a0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    pub levels: usize,
}

impl CubeAxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

/// Checks (i) each level partitions the space, (ii) finer cubes are inside
/// or disjoint from coarser ones, (iii) each cube sits inside its recorded
/// parent, (iv) `diam(Q) <= C1 delta^k`, (v) `B(z, a0 delta^k) ⊆ Q`.
/// Membership is read from the member lists only.
pub fn verify_cube_axioms(
    space: &FiniteMetricMeasureSpace,
    tree: &DyadicCubeTree,
) -> CubeAxiomReport {
    let n = space.len();
    let mut partition = AxiomCheck::new("i", "each level is a partition of the points");
    let mut nesting = AxiomCheck::new("ii", "for l >= k, Q^l is inside Q^k or disjoint from it");
    let mut parent = AxiomCheck::new("iii", "each cube lies inside its unique parent");
    let mut diameter = AxiomCheck::new("iv", "diam(Q^k) <= C1 delta^k");
    let mut ball = AxiomCheck::new("v", "B(z^k, a0 delta^k) is contained in Q^k");

    let owners: Vec<Vec<usize>> = tree.levels.iter().map(|l| tree.owners(l.k, n)).collect();

    for (j, level) in tree.levels.iter().enumerate() {
        let mut count = vec![0usize; n];
        for q in &level.cubes {
            for &x in &q.members {
                count[x] += 1;
            }
        }
        for (x, &c) in count.iter().enumerate() {
            partition.checked += 1;
            if c != 1 {
                partition.fail(format!("level {}: point {x} lies in {c} cubes", level.k));
            }
        }
        let r = tree.radius(level.k);
        for (i, q) in level.cubes.iter().enumerate() {
            // (ii): every coarser level sees a single owner for all members
            for (jj, coarse) in owners.iter().enumerate().take(j) {
                nesting.checked += 1;
                let first = q.members.first().map(|&x| coarse[x]);
                if let Some(&x) = q.members.iter().find(|&&x| Some(coarse[x]) != first) {
                    let a = first.unwrap();
                    nesting.fail(format!(
                        "cube {i} of level {} meets cube {a} of level {} without lying inside it (point {x} is outside)",
                        level.k, tree.levels[jj].k
                    ));
                }
            }
            if j > 0 {
                parent.checked += 1;
                match q.parent {
                    None => parent.fail(format!("cube {i} of level {} has no parent", level.k)),
                    Some(p) => {
                        let up = &owners[j - 1];
                        if let Some(&x) = q.members.iter().find(|&&x| up[x] != p) {
                            parent.fail(format!(
                                "cube {i} of level {}: member {x} is not in parent {p}",
                                level.k
                            ));
                        }
                        if !tree.levels[j - 1].cubes[p].children.contains(&i) {
                            parent.fail(format!(
                                "cube {i} of level {} missing from its parent's children",
                                level.k
                            ));
                        }
                    }
                }
            }
            diameter.checked += 1;
            let mut diam = 0.0f64;
            for (a, &x) in q.members.iter().enumerate() {
                for &y in &q.members[..a] {
                    diam = diam.max(space.dist(x, y));
                }
            }
            if diam > tree.c1 * r * (1.0 + RELATIVE_SLACK) {
                diameter.fail(format!(
                    "cube {i} of level {}: diameter {diam} exceeds C1 delta^k = {}",
                    level.k,
                    tree.c1 * r
                ));
            }
            ball.checked += 1;
            let own = &owners[j];
            let rad = tree.a0 * r;
            if let Some(y) = (0..n).find(|&y| space.dist(q.center, y) <= rad && own[y] != i) {
                ball.fail(format!(
                    "cube {i} of level {}: point {y} of B(z, a0 delta^k) lies outside",
                    level.k
                ));
            }
        }
    }
    CubeAxiomReport {
        checks: vec![partition, nesting, parent, diameter, ball],
        a0: tree.a0,
        c1: tree.c1,
        levels: tree.levels.len(),
    }
}
