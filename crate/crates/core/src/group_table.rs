//! Multiplication tables of finite groups, the classical input to the
//! function-algebra and group-algebra builders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cayley table `table[a][b] = a·b` on elements `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTable {
    name: String,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl GroupTable {
    /// Validates closure, associativity, identity and inverses.
    pub fn new(name: impl Into<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        let fail = |axiom: &str| Error::InvalidGroupTable {
            axiom: axiom.to_string(),
        };
        if n == 0 {
            return Err(fail("non-empty carrier"));
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(fail("closure"));
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(fail("associativity"));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| fail("identity"))?;
        let mut inverse = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| fail("inverses"))?;
            inverse.push(inv);
        }
        Ok(Self {
            name: name.into(),
            table,
            identity,
            inverse,
        })
    }

    /// Cyclic group `Z_n` with generator 1.
    pub fn cyclic(n: usize) -> Result<Self> {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::new(format!("z{n}"), table)
    }

    /// Symmetric group `S_3` as permutations of {0,1,2} in lexicographic order;
    /// element 0 is the identity, composition is `(a·b)(i) = a(b(i))`.
    pub fn symmetric3() -> Self {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let table = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| index([a[b[0]], a[b[1]], a[b[2]]]))
                    .collect()
            })
            .collect();
        Self::new("s3", table).expect("S3 table is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Subgroup generated by `gens` (as a sorted element list).
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut members = vec![false; self.order()];
        members[self.identity] = true;
        let mut frontier = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if !members[y] {
                    members[y] = true;
                    frontier.push(y);
                }
            }
        }
        (0..self.order()).filter(|&i| members[i]).collect()
    }

    /// All subgroups, found by testing every subset for closure. Exponential in
    /// the order; meant for groups of order at most ~16.
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        assert!(n <= 20, "brute-force subgroup enumeration is limited to order 20");
        let mut out = Vec::new();
        for mask in 1u32..(1u32 << n) {
            if mask & (1 << self.identity) == 0 {
                continue;
            }
            let set: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let closed = set.iter().all(|&a| {
                mask & (1 << self.inv(a)) != 0
                    && set.iter().all(|&b| mask & (1 << self.mul(a, b)) != 0)
            });
            if closed {
                out.push(set);
            }
        }
        out
    }
}
