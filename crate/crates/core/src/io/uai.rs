//! UAI model format (MARKOV / BAYES preamble, scopes, then tables).

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::GraphicalModel;

/// Cost assigned to a zero probability.
pub const ZERO_PROBABILITY_COST: f64 = 1e9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ValueKind {
    /// Table entries are energies.
    #[default]
    Cost,
    /// Table entries are probabilities, converted with `-ln p`.
    Probability,
}

impl FromStr for ValueKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cost" => Ok(ValueKind::Cost),
            "probability" => Ok(ValueKind::Probability),
            _ => Err(Error::Domain(format!("unknown value kind '{s}'"))),
        }
    }
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
            .collect();
        Tokens {
            items,
            pos: 0,
            last_line: text.lines().count().max(1),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let t = self
            .items
            .get(self.pos)
            .copied()
            .ok_or_else(|| Error::Parse {
                line: self.last_line,
                msg: format!("unexpected end of input, expected {what}"),
            })?;
        self.pos += 1;
        Ok(t)
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let (line, t) = self.next(what)?;
        t.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("expected {what}, found '{t}'"),
        })
    }
}

pub fn parse_uai(text: &str, values: ValueKind) -> Result<GraphicalModel> {
    let mut tok = Tokens::new(text);
    let (line, kind) = tok.next("preamble")?;
    if kind != "MARKOV" && kind != "BAYES" {
        return Err(Error::Parse {
            line,
            msg: format!("expected MARKOV or BAYES, found '{kind}'"),
        });
    }
    let n = tok.usize("variable count")?;
    let cards = (0..n)
        .map(|_| tok.usize("cardinality"))
        .collect::<Result<Vec<_>>>()?;
    let num_factors = tok.usize("factor count")?;
    let mut scopes = Vec::with_capacity(num_factors);
    for _ in 0..num_factors {
        let k = tok.usize("scope size")?;
        let mut scope = Vec::with_capacity(k);
        for _ in 0..k {
            let (line, t) = tok.next("scope variable")?;
            let v: usize = t.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("expected scope variable, found '{t}'"),
            })?;
            if v >= n {
                return Err(Error::Parse {
                    line,
                    msg: format!("scope variable {v} out of range (n = {n})"),
                });
            }
            scope.push(v);
        }
        scopes.push(scope);
    }
    let mut factors = Vec::with_capacity(num_factors);
    for (f, scope) in scopes.into_iter().enumerate() {
        let expected: usize = scope.iter().map(|&v| cards[v]).product();
        let (line, t) = tok.next(&format!("table size of factor {f}"))?;
        let len: usize = t.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("expected table size of factor {f}, found '{t}'"),
        })?;
        if len != expected {
            return Err(Error::Parse {
                line,
                msg: format!("factor {f} declares {len} entries, scope needs {expected}"),
            });
        }
        let mut table = Vec::with_capacity(len);
        for _ in 0..len {
            let (line, t) = tok
                .next(&format!("entry of factor {f}"))
                .map_err(|e| match e {
                    Error::Parse { line, .. } => Error::Parse {
                        line,
                        msg: format!("table of factor {f} is truncated"),
                    },
                    e => e,
                })?;
            let x: f64 = t.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad number '{t}' in factor {f}"),
            })?;
            table.push(match values {
                ValueKind::Cost => x,
                ValueKind::Probability if x < 0.0 => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("negative probability in factor {f}"),
                    })
                }
                ValueKind::Probability if x == 0.0 => ZERO_PROBABILITY_COST,
                ValueKind::Probability => -x.ln(),
            });
        }
        factors.push((scope, table));
    }
    if let Ok((line, t)) = tok.next("end of input") {
        return Err(Error::Parse {
            line,
            msg: format!("trailing token '{t}'"),
        });
    }
    GraphicalModel::new(cards, factors)
}

/// Serializes as MARKOV with costs. Numbers use the shortest representation
/// that parses back to the same `f64`.
pub fn write_uai(model: &GraphicalModel) -> String {
    let mut s = String::from("MARKOV\n");
    let _ = writeln!(s, "{}", model.num_nodes());
    let cards: Vec<String> = model.label_counts().iter().map(|k| k.to_string()).collect();
    let _ = writeln!(s, "{}", cards.join(" "));
    let _ = writeln!(s, "{}", model.num_factors());
    for f in model.factors() {
        let scope: Vec<String> = f.scope().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{} {}", f.arity(), scope.join(" "));
    }
    for f in model.factors() {
        let _ = writeln!(s, "\n{}", f.table().len());
        let vals: Vec<String> = f.table().iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, " {}", vals.join(" "));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let m = parse_uai("MARKOV\n1\n2\n1\n1 0\n\n2\n 3 1\n", ValueKind::Cost).unwrap();
        assert_eq!(m.num_nodes(), 1);
        assert_eq!(m.label_count(0), 2);
        assert_eq!(m.factor(0).table(), &[3.0, 1.0]);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = GraphicalModel::new(
            vec![2, 3],
            vec![
                (vec![0], vec![0.1, 1.0 / 3.0]),
                (vec![0, 1], vec![1e-300, -2.5, 7.0, f64::MAX, 0.3, -0.0]),
            ],
        )
        .unwrap();
        let back = parse_uai(&write_uai(&m), ValueKind::Cost).unwrap();
        for (a, b) in m.factors().iter().zip(back.factors()) {
            let bits = |t: &[f64]| t.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a.table()), bits(b.table()));
        }
    }

    #[test]
    fn unsorted_scope_is_permuted() {
        let m = parse_uai("MARKOV\n2\n2 2\n1\n2 1 0\n4\n0 1 2 3\n", ValueKind::Cost).unwrap();
        // entry (x1, x0) stored at (x0, x1)
        assert_eq!(m.factor(0).table(), &[0.0, 2.0, 1.0, 3.0]);
    }

    #[test]
    fn probabilities() {
        let m = parse_uai("BAYES\n1\n2\n1\n1 0\n2\n1 0\n", ValueKind::Probability).unwrap();
        assert_eq!(m.factor(0).table(), &[0.0, ZERO_PROBABILITY_COST]);
    }

    #[test]
    fn errors_carry_locations() {
        let err = parse_uai("MARKOV\n1\n2\n1\n1 0\n2\n 3\n", ValueKind::Cost).unwrap_err();
        assert!(err.to_string().contains("factor 0"), "{err}");
        let err = parse_uai("MARKOV\n1\n2\n1\n1 5\n2\n 3 1\n", ValueKind::Cost).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }), "{err}");
        let err = parse_uai("MARKOV\n1\n2\n1\n1 0\n3\n 3 1 0\n", ValueKind::Cost).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err}");
        let err = parse_uai("MARKOV\nx\n", ValueKind::Cost).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(parse_uai("FOO\n", ValueKind::Cost).is_err());
    }
}
