//! Built-in ℒ-algorithms and exhaustive enumeration of small ones.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{fmt_ratio, parse_ratio, ratio, Color, LightGraph, Ratio};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AlgorithmId {
    Ss3,
    NonQss3,
    Qss4,
    Ss5,
    AlgA,
    AlgB,
    Alg1(Ratio),
    Alg2(Ratio),
    Alg3(Ratio),
    Alg4(Ratio),
    Alg5(Ratio),
    Alg6(Ratio),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AlgorithmError {
    #[error("bad parameter λ={0}: requires {1}")]
    BadParameter(String, &'static str),
    #[error("unknown algorithm {0:?}")]
    Unknown(String),
}

impl AlgorithmId {
    /// Accepts `ss3`, `alg_a`, and `alg3:1/2` (λ after a colon).
    pub fn parse(s: &str) -> Result<AlgorithmId, AlgorithmError> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let lambda = || -> Result<Ratio, AlgorithmError> {
            let p = param.ok_or_else(|| AlgorithmError::Unknown(format!("{s} (missing :λ)")))?;
            parse_ratio(p).map_err(|_| AlgorithmError::Unknown(s.to_string()))
        };
        let id = match name {
            "ss3" | "alg_1" => AlgorithmId::Ss3,
            "nonqss3" => AlgorithmId::NonQss3,
            "qss4" => AlgorithmId::Qss4,
            "ss5" => AlgorithmId::Ss5,
            "alg_a" => AlgorithmId::AlgA,
            "alg_b" => AlgorithmId::AlgB,
            "alg1" => AlgorithmId::Alg1(lambda()?),
            "alg2" => AlgorithmId::Alg2(lambda()?),
            "alg3" => AlgorithmId::Alg3(lambda()?),
            "alg4" => AlgorithmId::Alg4(lambda()?),
            "alg5" => AlgorithmId::Alg5(lambda()?),
            "alg6" => AlgorithmId::Alg6(lambda()?),
            _ => return Err(AlgorithmError::Unknown(s.to_string())),
        };
        if param.is_some() && id.lambda().is_none() {
            return Err(AlgorithmError::Unknown(s.to_string()));
        }
        Ok(id)
    }

    pub fn lambda(&self) -> Option<&Ratio> {
        match self {
            AlgorithmId::Alg1(l)
            | AlgorithmId::Alg2(l)
            | AlgorithmId::Alg3(l)
            | AlgorithmId::Alg4(l)
            | AlgorithmId::Alg5(l)
            | AlgorithmId::Alg6(l) => Some(l),
            _ => None,
        }
    }

    /// The family member `n` (1..=6) of the four-color cycle family.
    pub fn family(n: u8, lambda: Ratio) -> Option<AlgorithmId> {
        Some(match n {
            1 => AlgorithmId::Alg1(lambda),
            2 => AlgorithmId::Alg2(lambda),
            3 => AlgorithmId::Alg3(lambda),
            4 => AlgorithmId::Alg4(lambda),
            5 => AlgorithmId::Alg5(lambda),
            6 => AlgorithmId::Alg6(lambda),
            _ => return None,
        })
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AlgorithmId::Ss3 => "ss3",
            AlgorithmId::NonQss3 => "nonqss3",
            AlgorithmId::Qss4 => "qss4",
            AlgorithmId::Ss5 => "ss5",
            AlgorithmId::AlgA => "alg_a",
            AlgorithmId::AlgB => "alg_b",
            AlgorithmId::Alg1(_) => "alg1",
            AlgorithmId::Alg2(_) => "alg2",
            AlgorithmId::Alg3(_) => "alg3",
            AlgorithmId::Alg4(_) => "alg4",
            AlgorithmId::Alg5(_) => "alg5",
            AlgorithmId::Alg6(_) => "alg6",
        };
        match self.lambda() {
            Some(l) => write!(f, "{name}:{}", fmt_ratio(l)),
            None => write!(f, "{name}"),
        }
    }
}

/// A cycle A→B→…→A with the given labels, in order.
fn cycle(labels: &[Ratio]) -> LightGraph {
    let k = labels.len();
    LightGraph::from_edges(
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| (Color(((i + 1) % k) as u8), l.clone()))
            .collect(),
    )
}

pub fn builtin(id: &AlgorithmId) -> Result<LightGraph, AlgorithmError> {
    let half = ratio(1, 2);
    let zero = Ratio::zero();
    let one = Ratio::one();
    let require = |l: &Ratio, bad: Ratio, cond: &'static str| {
        if *l == bad {
            Err(AlgorithmError::BadParameter(fmt_ratio(l), cond))
        } else {
            Ok(())
        }
    };
    Ok(match id {
        AlgorithmId::Ss3 | AlgorithmId::AlgA => cycle(&[half, zero, one]),
        AlgorithmId::NonQss3 => LightGraph::from_edges(vec![(Color(1), half), (Color(2), zero), (Color(1), one)]),
        AlgorithmId::Qss4 => cycle(&[half, zero.clone(), one, zero]),
        AlgorithmId::Ss5 => cycle(&[half, zero.clone(), one, zero.clone(), zero]),
        AlgorithmId::AlgB => cycle(&[half, one, zero]),
        AlgorithmId::Alg1(l) => cycle(&[half, zero, one, l.clone()]),
        AlgorithmId::Alg2(l) => cycle(&[half, one, zero, l.clone()]),
        AlgorithmId::Alg3(l) => {
            require(l, one.clone(), "λ≠1")?;
            cycle(&[half, zero, l.clone(), one])
        }
        AlgorithmId::Alg4(l) => {
            require(l, zero.clone(), "λ≠0")?;
            cycle(&[half, one, l.clone(), zero])
        }
        AlgorithmId::Alg5(l) => {
            require(l, one.clone(), "λ≠1")?;
            cycle(&[half, l.clone(), zero, one])
        }
        AlgorithmId::Alg6(l) => {
            require(l, zero.clone(), "λ≠0")?;
            cycle(&[half, l.clone(), one, zero])
        }
    })
}

/// λ samples for the four-color family, filtered by each member's side condition.
pub fn family_samples(n: u8) -> Vec<Ratio> {
    [ratio(0, 1), ratio(1, 3), ratio(1, 2), ratio(2, 3), ratio(1, 1)]
        .into_iter()
        .filter(|l| AlgorithmId::family(n, l.clone()).is_some_and(|id| builtin(&id).is_ok()))
        .collect()
}

/// All k-color ℒ-algorithms over `labels`, addressable by index.
#[derive(Clone, Debug)]
pub struct Enumeration {
    k: usize,
    labels: Vec<Ratio>,
    label_space: u64,
    len: u64,
    next: u64,
}

pub fn enumerate(k: usize, labels: &[Ratio]) -> Enumeration {
    assert!(k >= 1 && !labels.is_empty(), "need k ≥ 1 and at least one label");
    let mut labels = labels.to_vec();
    labels.sort();
    labels.dedup();
    let label_space = (labels.len() as u64).pow(k as u32);
    Enumeration {
        len: (k as u64).pow(k as u32) * label_space,
        k,
        labels,
        label_space,
        next: 0,
    }
}

fn digits(mut n: u64, base: u64, width: usize) -> Vec<u64> {
    let mut out = vec![0; width];
    for d in out.iter_mut().rev() {
        *d = n % base;
        n /= base;
    }
    out
}

impl Enumeration {
    pub fn total(&self) -> u64 {
        self.len
    }

    /// Target vector first, then labels; color 0 is the most significant digit.
    pub fn get(&self, index: u64) -> LightGraph {
        assert!(index < self.len);
        let targets = digits(index / self.label_space, self.k as u64, self.k);
        let labels = digits(index % self.label_space, self.labels.len() as u64, self.k);
        LightGraph::from_edges(
            targets
                .iter()
                .zip(&labels)
                .map(|(t, l)| (Color(*t as u8), self.labels[*l as usize].clone()))
                .collect(),
        )
    }
}

impl Iterator for Enumeration {
    type Item = LightGraph;

    fn next(&mut self) -> Option<LightGraph> {
        if self.next >= self.len {
            return None;
        }
        let g = self.get(self.next);
        self.next += 1;
        Some(g)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.len - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Enumeration {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    pub self_loops: Vec<Color>,
    pub two_cycles: Vec<(Color, Color)>,
    /// Lengths of the directed cycles, ascending.
    pub cycle_lengths: Vec<usize>,
    pub scc_count: usize,
    /// Colors not on any cycle.
    pub transient: Vec<Color>,
}

pub fn classify_shape(g: &LightGraph) -> Shape {
    let k = g.num_colors();
    let mut on_cycle = vec![false; k];
    let mut cycle_lengths = Vec::new();
    let mut seen = vec![false; k];
    for start in 0..k {
        if seen[start] {
            continue;
        }
        // walk until a repeat; anything first repeated inside this walk is a new cycle
        let mut path = Vec::new();
        let mut c = start;
        while !seen[c] {
            seen[c] = true;
            path.push(c);
            c = g.edge(Color(c as u8)).next.index();
        }
        if let Some(pos) = path.iter().position(|&p| p == c) {
            for &p in &path[pos..] {
                on_cycle[p] = true;
            }
            cycle_lengths.push(path.len() - pos);
        }
    }
    cycle_lengths.sort();
    let self_loops: Vec<Color> = g.colors().filter(|c| g.edge(*c).next == *c).collect();
    let two_cycles = g
        .colors()
        .filter_map(|c| {
            let n = g.edge(c).next;
            (n != c && c < n && g.edge(n).next == c).then_some((c, n))
        })
        .collect();
    let transient: Vec<Color> = g.colors().filter(|c| !on_cycle[c.index()]).collect();
    Shape {
        scc_count: cycle_lengths.len() + transient.len(),
        self_loops,
        two_cycles,
        cycle_lengths,
        transient,
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lens: Vec<String> = self.cycle_lengths.iter().map(|l| l.to_string()).collect();
        write!(
            f,
            "cycles={} sccs={} self_loops={} two_cycles={} transient={}",
            lens.join("+"),
            self.scc_count,
            self.self_loops.len(),
            self.two_cycles.len(),
            self.transient.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_graph, Edge};
    use std::collections::HashSet;

    fn labels3() -> Vec<Ratio> {
        vec![ratio(0, 1), ratio(1, 2), ratio(1, 1)]
    }

    #[test]
    fn builtin_graphs() {
        assert_eq!(builtin(&AlgorithmId::Ss3).unwrap().describe(), "A>B:1/2 B>C:0 C>A:1");
        assert_eq!(
            builtin(&AlgorithmId::NonQss3).unwrap().describe(),
            "A>B:1/2 B>C:0 C>B:1"
        );
        assert_eq!(
            builtin(&AlgorithmId::Qss4).unwrap().describe(),
            "A>B:1/2 B>C:0 C>D:1 D>A:0"
        );
        assert_eq!(
            builtin(&AlgorithmId::Ss5).unwrap().describe(),
            "A>B:1/2 B>C:0 C>D:1 D>E:0 E>A:0"
        );
        assert_eq!(builtin(&AlgorithmId::AlgB).unwrap().describe(), "A>B:1/2 B>C:1 C>A:0");
        assert_eq!(
            builtin(&AlgorithmId::Alg1(ratio(0, 1))).unwrap(),
            builtin(&AlgorithmId::Qss4).unwrap()
        );
        assert_eq!(
            builtin(&AlgorithmId::Alg5(ratio(1, 3))).unwrap().describe(),
            "A>B:1/2 B>C:1/3 C>D:0 D>A:1"
        );
    }

    #[test]
    fn side_conditions() {
        assert!(matches!(
            builtin(&AlgorithmId::Alg3(ratio(1, 1))),
            Err(AlgorithmError::BadParameter(_, "λ≠1"))
        ));
        assert!(builtin(&AlgorithmId::Alg4(ratio(0, 1))).is_err());
        assert!(builtin(&AlgorithmId::Alg5(ratio(1, 1))).is_err());
        assert!(builtin(&AlgorithmId::Alg6(ratio(0, 1))).is_err());
        assert!(builtin(&AlgorithmId::Alg6(ratio(1, 1))).is_ok());
        assert_eq!(family_samples(3).len(), 4);
        assert_eq!(family_samples(1).len(), 5);
    }

    #[test]
    fn builtins_validate() {
        for id in [
            AlgorithmId::Ss3,
            AlgorithmId::NonQss3,
            AlgorithmId::Qss4,
            AlgorithmId::Ss5,
            AlgorithmId::AlgB,
            AlgorithmId::Alg2(ratio(1, 3)),
        ] {
            let g = builtin(&id).unwrap();
            assert_eq!(validate_graph(&g.to_spec()).unwrap(), g);
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!(AlgorithmId::parse("alg_a").unwrap(), AlgorithmId::AlgA);
        assert_eq!(AlgorithmId::parse("alg4:2/3").unwrap(), AlgorithmId::Alg4(ratio(2, 3)));
        assert_eq!(AlgorithmId::parse("alg4:2/3").unwrap().to_string(), "alg4:2/3");
        assert!(AlgorithmId::parse("alg4").is_err());
        assert!(AlgorithmId::parse("ss3:1").is_err());
        assert!(AlgorithmId::parse("nope").is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate(1, &labels3()).count(), 3);
        assert_eq!(enumerate(2, &labels3()).count(), 36);
        assert_eq!(enumerate(3, &labels3()).count(), 729);
    }

    // independent nested loops in the documented order
    #[test]
    fn enumeration_matches_nested_loops() {
        let l = labels3();
        let mut expected = Vec::new();
        for t0 in 0..3u8 {
            for t1 in 0..3u8 {
                for t2 in 0..3u8 {
                    for l0 in &l {
                        for l1 in &l {
                            for l2 in &l {
                                expected.push(vec![
                                    Edge {
                                        next: Color(t0),
                                        lambda: l0.clone(),
                                    },
                                    Edge {
                                        next: Color(t1),
                                        lambda: l1.clone(),
                                    },
                                    Edge {
                                        next: Color(t2),
                                        lambda: l2.clone(),
                                    },
                                ]);
                            }
                        }
                    }
                }
            }
        }
        let got: Vec<Vec<Edge>> = enumerate(3, &l)
            .map(|g| g.colors().map(|c| g.edge(c).clone()).collect())
            .collect();
        assert_eq!(got, expected);
        let distinct: HashSet<_> = got.into_iter().collect();
        assert_eq!(distinct.len(), 729);
    }

    #[test]
    fn shapes() {
        let s = classify_shape(&builtin(&AlgorithmId::Ss3).unwrap());
        assert_eq!(s.cycle_lengths, vec![3]);
        assert_eq!(s.scc_count, 1);
        let s = classify_shape(&builtin(&AlgorithmId::NonQss3).unwrap());
        assert_eq!(s.two_cycles, vec![(Color(1), Color(2))]);
        assert_eq!(s.transient, vec![Color(0)]);
        assert_eq!(s.scc_count, 2);
        let s = classify_shape(&builtin(&AlgorithmId::Ss5).unwrap());
        assert_eq!(s.cycle_lengths, vec![5]);
        let g = LightGraph::from_edges(vec![(Color(0), ratio(0, 1)), (Color(0), ratio(1, 2))]);
        let s = classify_shape(&g);
        assert_eq!(s.self_loops, vec![Color(0)]);
        assert_eq!(s.scc_count, 2);
    }
}
