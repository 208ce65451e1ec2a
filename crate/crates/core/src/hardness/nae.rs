use crate::error::{Error, Result};

/// Monotone NAE-3-SAT instance; variables are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NAEFormula {
    num_vars: usize,
    clauses: Vec<[usize; 3]>,
}

impl NAEFormula {
    pub fn new(num_vars: usize, clauses: Vec<[usize; 3]>) -> Result<Self> {
        for c in &clauses {
            if c.iter().any(|&x| x >= num_vars) {
                return Err(Error::invalid(format!("clause {c:?} mentions a variable beyond {num_vars}")));
            }
            if c[0] == c[1] || c[0] == c[2] || c[1] == c[2] {
                return Err(Error::invalid(format!("clause {c:?} repeats a variable")));
            }
        }
        Ok(NAEFormula { num_vars, clauses })
    }

    /// DIMACS-style text: `c` comment lines, a header `p nae3 <vars> <clauses>`
    /// and one clause per line of three 1-based variables, optionally ending in `0`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |what: &str| Error::Parse(format!("line {}: {what}: {line:?}", i + 1));
            if fields[0] == "p" {
                if header.is_some() || fields.len() != 4 || fields[1] != "nae3" {
                    return Err(bad("expected a single header `p nae3 <vars> <clauses>`"));
                }
                let n = fields[2].parse().map_err(|_| bad("bad variable count"))?;
                let m = fields[3].parse().map_err(|_| bad("bad clause count"))?;
                header = Some((n, m));
                continue;
            }
            if header.is_none() {
                return Err(bad("clause before the header"));
            }
            let mut lits = fields
                .iter()
                .map(|f| f.parse::<i64>().map_err(|_| bad("not an integer")))
                .collect::<Result<Vec<_>>>()?;
            if lits.last() == Some(&0) {
                lits.pop();
            }
            if lits.len() != 3 || lits.iter().any(|&l| l <= 0) {
                return Err(bad("a clause is three positive variables"));
            }
            clauses.push([lits[0] as usize - 1, lits[1] as usize - 1, lits[2] as usize - 1]);
        }
        let (n, m) = header.ok_or_else(|| Error::Parse("missing `p nae3` header".into()))?;
        if clauses.len() != m {
            return Err(Error::Parse(format!("header announces {m} clauses, found {}", clauses.len())));
        }
        NAEFormula::new(n, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p nae3 {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            s.push_str(&format!("{} {} {} 0\n", c[0] + 1, c[1] + 1, c[2] + 1));
        }
        s
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[[usize; 3]] {
        &self.clauses
    }

    /// Every clause has a true and a false variable.
    pub fn nae_satisfied(&self, assignment: &[bool]) -> Result<bool> {
        if assignment.len() != self.num_vars {
            return Err(Error::invalid(format!(
                "assignment has {} values for {} variables",
                assignment.len(),
                self.num_vars
            )));
        }
        Ok(self.clauses.iter().all(|c| {
            let ones = c.iter().filter(|&&x| assignment[x]).count();
            ones == 1 || ones == 2
        }))
    }

    /// First satisfying assignment in binary counting order (variable 1 is
    /// the most significant), by exhaustive search over at most 2^20 candidates.
    pub fn solve_bruteforce(&self) -> Result<Option<Vec<bool>>> {
        if self.num_vars > 20 {
            return Err(Error::resource("NAE assignments", 1u128 << self.num_vars.min(127), 1 << 20));
        }
        for code in 0..1u64 << self.num_vars {
            let a: Vec<bool> = (0..self.num_vars).map(|i| code >> (self.num_vars - 1 - i) & 1 == 1).collect();
            if self.nae_satisfied(&a)? {
                return Ok(Some(a));
            }
        }
        Ok(None)
    }
}
