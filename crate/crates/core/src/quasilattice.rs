//! Fibonacci quasicrystal words and the vertex chains they generate.
//!
//! Words are two-sided: a left half and a right half separated by a dot. The
//! substitution `S -> L`, `L -> LS` is applied to both halves independently,
//! starting from the stage-1 seed `L.LS`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Golden ratio.
pub fn golden_ratio() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    S,
    L,
}

impl Letter {
    /// Link length in units where the mean vertex spacing tends to one.
    pub fn length(self) -> f64 {
        let phi = golden_ratio();
        match self {
            Letter::S => phi / 5f64.sqrt(),
            Letter::L => phi * phi / 5f64.sqrt(),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::S => 'S',
            Letter::L => 'L',
        }
    }

    fn image(self) -> &'static [Letter] {
        match self {
            Letter::S => &[Letter::L],
            Letter::L => &[Letter::L, Letter::S],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiWord {
    pub left: Vec<Letter>,
    pub right: Vec<Letter>,
    pub stage: u32,
}

impl QuasiWord {
    pub fn empty() -> Self {
        Self {
            left: Vec::new(),
            right: Vec::new(),
            stage: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Letters left to right, ignoring the dot.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.left.iter().chain(self.right.iter()).copied()
    }

    pub fn count(&self, letter: Letter) -> usize {
        self.letters().filter(|&l| l == letter).count()
    }

    /// Whether `self` sits inside `outer` with the dots aligned.
    pub fn is_centered_factor_of(&self, outer: &QuasiWord) -> bool {
        outer.left.ends_with(&self.left) && outer.right.starts_with(&self.right)
    }

    /// `true` if `pattern` occurs as a contiguous factor (across the dot).
    pub fn contains_factor(&self, pattern: &[Letter]) -> bool {
        let all: Vec<Letter> = self.letters().collect();
        !pattern.is_empty() && all.windows(pattern.len()).any(|w| w == pattern)
    }
}

impl fmt::Display for QuasiWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.left {
            write!(f, "{}", l.as_char())?;
        }
        f.write_str(".")?;
        for l in &self.right {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for QuasiWord {
    type Err = Error;

    /// Parses `"LSL.LSLLS"`; the stage is set to 0 (unknown).
    fn from_str(s: &str) -> Result<Self> {
        let (l, r) = s
            .split_once(['.', '·'])
            .ok_or_else(|| Error::InvalidParameter(format!("word `{s}` has no dot")))?;
        let parse = |half: &str| {
            half.chars()
                .map(|c| match c {
                    'S' => Ok(Letter::S),
                    'L' => Ok(Letter::L),
                    other => Err(Error::InvalidParameter(format!("bad letter `{other}`"))),
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self {
            left: parse(l)?,
            right: parse(r)?,
            stage: 0,
        })
    }
}

/// One application of `S -> L`, `L -> LS` to both halves.
pub fn substitute(word: &QuasiWord) -> QuasiWord {
    let image = |half: &[Letter]| half.iter().flat_map(|l| l.image().iter().copied()).collect();
    QuasiWord {
        left: image(&word.left),
        right: image(&word.right),
        stage: word.stage + 1,
    }
}

/// Stage-`stage` word grown from the seed `L.LS`.
pub fn fibonacci_word(stage: u32) -> Result<QuasiWord> {
    if stage == 0 {
        return Err(Error::InvalidParameter("stage must be >= 1".into()));
    }
    let mut w = QuasiWord {
        left: vec![Letter::L],
        right: vec![Letter::L, Letter::S],
        stage: 1,
    };
    for _ in 1..stage {
        w = substitute(&w);
    }
    Ok(w)
}

/// Ordered vertex coordinates with the dot vertex at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexChain {
    pub positions: Vec<f64>,
    /// `links[i]` joins vertex `i` to vertex `i + 1`.
    pub links: Vec<Letter>,
    /// Index of the vertex at the dot.
    pub origin: usize,
}

impl VertexChain {
    pub fn mean_gap(&self) -> f64 {
        match self.positions.len() {
            0 | 1 => 0.0,
            n => (self.positions[n - 1] - self.positions[0]) / (n - 1) as f64,
        }
    }

    /// CSV rows `index,coordinate,left_link`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,coordinate,left_link\n");
        for (i, x) in self.positions.iter().enumerate() {
            let link = if i == 0 {
                String::new()
            } else {
                self.links[i - 1].as_char().to_string()
            };
            out.push_str(&format!("{i},{x:?},{link}\n"));
        }
        out
    }
}

pub fn vertex_chain(word: &QuasiWord) -> VertexChain {
    let origin = word.left.len();
    let mut positions = vec![0.0; word.len() + 1];
    for (k, l) in word.left.iter().enumerate().rev() {
        positions[k] = positions[k + 1] - l.length();
    }
    for (k, l) in word.right.iter().enumerate() {
        positions[origin + k + 1] = positions[origin + k] + l.length();
    }
    VertexChain {
        positions,
        links: word.letters().collect(),
        origin,
    }
}

/// Smallest stage whose chain reaches at least `extent` on both sides of
/// the origin.
pub fn stage_covering(extent: f64) -> u32 {
    let mut stage = 1;
    loop {
        let chain = vertex_chain(&fibonacci_word(stage).expect("stage >= 1"));
        let lo = chain.positions[0];
        let hi = *chain.positions.last().unwrap();
        if -lo >= extent && hi >= extent {
            return stage;
        }
        stage += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib(n: u32) -> usize {
        let (mut a, mut b) = (1usize, 1usize);
        for _ in 1..n {
            (a, b) = (b, a + b);
        }
        a
    }

    #[test]
    fn substitution_examples() {
        let w: QuasiWord = "L.LS".parse().unwrap();
        assert_eq!(substitute(&w).to_string(), "LS.LSL");
        let w: QuasiWord = "LSL.LSLLS".parse().unwrap();
        assert_eq!(substitute(&w).to_string(), "LSLLS.LSLLSLSL");
        let e = substitute(&QuasiWord::empty());
        assert!(e.is_empty());
        assert_eq!(e.stage, 1);
    }

    #[test]
    fn fibonacci_word_examples() {
        assert_eq!(fibonacci_word(1).unwrap().to_string(), "L.LS");
        assert_eq!(fibonacci_word(5).unwrap().to_string(), "LSLLSLSL.LSLLSLSLLSLLS");
        let w3 = fibonacci_word(3).unwrap();
        assert_eq!((w3.count(Letter::S), w3.count(Letter::L)), (3, 5));
        assert!(fibonacci_word(0).is_err());
    }

    #[test]
    fn letter_counts_and_forbidden_factors() {
        use Letter::*;
        let mut w = fibonacci_word(1).unwrap();
        for n in 1..=25u32 {
            assert_eq!(w.count(S), fib(n + 1), "S count at stage {n}");
            assert_eq!(w.count(L), fib(n + 2), "L count at stage {n}");
            assert!(!w.contains_factor(&[S, S]));
            assert!(!w.contains_factor(&[L, L, L]));
            w = substitute(&w);
        }
    }

    #[test]
    fn odd_stage_nesting() {
        for n in (1..=21).step_by(2) {
            let inner = fibonacci_word(n).unwrap();
            let outer = fibonacci_word(n + 2).unwrap();
            assert!(inner.is_centered_factor_of(&outer), "stage {n}");
        }
    }

    #[test]
    fn link_lengths() {
        assert!((Letter::S.length() - 0.7236).abs() < 1e-4);
        assert!((Letter::L.length() - 1.1708).abs() < 1e-4);
    }

    #[test]
    fn vertex_chain_examples() {
        let c = vertex_chain(&"L.LS".parse().unwrap());
        let (s, l) = (Letter::S.length(), Letter::L.length());
        assert_eq!(c.positions, vec![-l, 0.0, l, l + s]);
        assert_eq!(c.origin, 1);
        assert!((c.positions[3] - 1.8944).abs() < 1e-4);

        let c = vertex_chain(&QuasiWord::empty());
        assert_eq!(c.positions, vec![0.0]);
    }

    #[test]
    fn mean_gap_converges() {
        let mut prev = f64::INFINITY;
        for n in 5..=20 {
            let dev = (vertex_chain(&fibonacci_word(n).unwrap()).mean_gap() - 1.0).abs();
            assert!(dev < prev, "stage {n}: {dev} !< {prev}");
            prev = dev;
            if n == 15 {
                assert!(dev <= 0.01);
            }
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn positions_strictly_increasing() {
        let c = vertex_chain(&fibonacci_word(12).unwrap());
        assert!(c.positions.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn csv_export() {
        let csv = vertex_chain(&"L.LS".parse().unwrap()).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,coordinate,left_link");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].ends_with(','));
        assert!(lines[4].ends_with(",S"));
    }

    #[test]
    fn covering_stage() {
        let s = stage_covering(80.0);
        let c = vertex_chain(&fibonacci_word(s).unwrap());
        assert!(c.positions[0] <= -80.0 && *c.positions.last().unwrap() >= 80.0);
    }
}
