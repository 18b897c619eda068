//! Coordinate charts and their domain constraints.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, ParseError, Result};
use crate::expr::{parse_expression, Expr, Func};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Greater,
    Less,
}

/// Strict inequality `lhs > rhs` or `lhs < rhs` over chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainConstraint {
    pub lhs: Expr,
    pub relation: Relation,
    pub rhs: Expr,
}

impl DomainConstraint {
    pub fn parse<S: AsRef<str>>(src: &str, names: &[S]) -> Result<Self> {
        let (pos, relation) = match (src.find('>'), src.find('<')) {
            (Some(p), None) => (p, Relation::Greater),
            (None, Some(p)) => (p, Relation::Less),
            _ => {
                return Err(ParseError::Syntax {
                    position: 0,
                    expected: "exactly one of `>` or `<`",
                    found: src.to_string(),
                }
                .into())
            }
        };
        let shift = |e: ParseError, by: usize| match e {
            ParseError::Syntax {
                position,
                expected,
                found,
            } => ParseError::Syntax {
                position: position + by,
                expected,
                found,
            },
            ParseError::UnknownIdentifier { position, name } => ParseError::UnknownIdentifier {
                position: position + by,
                name,
            },
            ParseError::NonConstantExponent { position } => ParseError::NonConstantExponent {
                position: position + by,
            },
            ParseError::TooDeep { position } => ParseError::TooDeep {
                position: position + by,
            },
        };
        let lhs = parse_expression(&src[..pos], names)?;
        let rhs = parse_expression(&src[pos + 1..], names).map_err(|e| shift(e, pos + 1))?;
        Ok(DomainConstraint { lhs, relation, rhs })
    }

    /// Whether `point` lies strictly inside; evaluation failures count as outside.
    pub fn contains(&self, point: &[f64]) -> bool {
        match (self.lhs.eval(point), self.rhs.eval(point)) {
            (Ok(a), Ok(b)) => match self.relation {
                Relation::Greater => a > b,
                Relation::Less => a < b,
            },
            _ => false,
        }
    }

    /// `(coordinate, bound, relation)` when the constraint bounds a single
    /// coordinate by a constant, normalised so the coordinate is on the left.
    pub fn coordinate_bound(&self) -> Option<(usize, f64, Relation)> {
        let constant = |e: &Expr| match e.max_var() {
            None => e.eval(&[]).ok(),
            Some(_) => None,
        };
        match (&self.lhs, &self.rhs) {
            (Expr::Var(i), rhs) => constant(rhs).map(|c| (*i, c, self.relation)),
            (lhs, Expr::Var(i)) => constant(lhs).map(|c| {
                let flipped = match self.relation {
                    Relation::Greater => Relation::Less,
                    Relation::Less => Relation::Greater,
                };
                (*i, c, flipped)
            }),
            _ => None,
        }
    }

    pub fn map_vars(&self, f: &dyn Fn(usize) -> Expr) -> Self {
        DomainConstraint {
            lhs: self.lhs.map_vars(f),
            relation: self.relation,
            rhs: self.rhs.map_vars(f),
        }
    }

    pub fn to_source<S: AsRef<str>>(&self, names: &[S]) -> String {
        let op = match self.relation {
            Relation::Greater => ">",
            Relation::Less => "<",
        };
        alloc::format!(
            "{} {} {}",
            self.lhs.display(names),
            op,
            self.rhs.display(names)
        )
    }
}

/// Ordered coordinate names, domain constraints and the optional adapted
/// coordinate `t` whose level sets are the leaves of `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    names: Vec<String>,
    constraints: Vec<DomainConstraint>,
    adapted: Option<usize>,
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Chart {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Chart("a chart needs at least one coordinate".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if !is_identifier(name) || Func::from_name(name).is_some() {
                return Err(Error::Chart(alloc::format!(
                    "`{}` is not a valid coordinate name",
                    name
                )));
            }
            if names[..i].contains(name) {
                return Err(Error::Chart(alloc::format!(
                    "duplicate coordinate `{}`",
                    name
                )));
            }
        }
        Ok(Chart {
            names,
            constraints: Vec::new(),
            adapted: None,
        })
    }

    pub fn with_adapted(mut self, name: &str) -> Result<Self> {
        let index = self
            .index_of(name)
            .ok_or_else(|| Error::Chart(alloc::format!("unknown adapted coordinate `{}`", name)))?;
        self.adapted = Some(index);
        Ok(self)
    }

    pub fn with_adapted_index(mut self, index: Option<usize>) -> Result<Self> {
        if let Some(i) = index {
            if i >= self.dim() {
                return Err(Error::Chart(alloc::format!(
                    "adapted index {} out of range",
                    i
                )));
            }
        }
        self.adapted = index;
        Ok(self)
    }

    pub fn with_constraint(mut self, src: &str) -> Result<Self> {
        let c = DomainConstraint::parse(src, &self.names)?;
        self.constraints.push(c);
        Ok(self)
    }

    pub fn with_constraints(mut self, constraints: Vec<DomainConstraint>) -> Result<Self> {
        for c in &constraints {
            let max = c.lhs.max_var().max(c.rhs.max_var());
            if matches!(max, Some(m) if m >= self.dim()) {
                return Err(Error::Chart("constraint references a missing coordinate".into()));
            }
            if !self.constraints.contains(c) {
                self.constraints.push(c.clone());
            }
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn adapted(&self) -> Option<usize> {
        self.adapted
    }

    pub fn constraints(&self) -> &[DomainConstraint] {
        &self.constraints
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim() && self.constraints.iter().all(|c| c.contains(point))
    }

    pub fn parse(&self, src: &str) -> Result<Expr, ParseError> {
        parse_expression(src, &self.names)
    }

    pub fn render(&self, expr: &Expr) -> String {
        expr.to_source(&self.names)
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.names.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_and_reserved_names() {
        assert!(Chart::new(["x", "x"]).is_err());
        assert!(Chart::new(["x", "exp"]).is_err());
        assert!(Chart::new(["1x"]).is_err());
        assert!(Chart::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn constraint_bound_detection() {
        let chart = Chart::new(["x", "y", "z"]).unwrap();
        let c = DomainConstraint::parse("z > 0", chart.names()).unwrap();
        assert_eq!(c.coordinate_bound(), Some((2, 0.0, Relation::Greater)));
        let c = DomainConstraint::parse("1 > x", chart.names()).unwrap();
        assert_eq!(c.coordinate_bound(), Some((0, 1.0, Relation::Less)));
        let c = DomainConstraint::parse("x + y < 1", chart.names()).unwrap();
        assert_eq!(c.coordinate_bound(), None);
        assert!(c.contains(&[0.2, 0.3, 9.0]));
        assert!(!c.contains(&[0.7, 0.3, 9.0]));
    }

    #[test]
    fn constraint_errors_are_positioned_in_the_full_string() {
        let chart = Chart::new(["x"]).unwrap();
        let err = DomainConstraint::parse("x > w", chart.names()).unwrap_err();
        assert_eq!(
            err,
            Error::Parse(ParseError::UnknownIdentifier {
                position: 4,
                name: "w".into()
            })
        );
        assert!(DomainConstraint::parse("x", chart.names()).is_err());
    }

    #[test]
    fn adapted_index_must_exist() {
        let chart = Chart::new(["t", "x", "y"]).unwrap();
        assert!(chart.clone().with_adapted("s").is_err());
        assert_eq!(chart.with_adapted("t").unwrap().adapted(), Some(0));
    }
}
