//! Text forms used on the command line and in manifests: `k=v` parameter
//! lists, symbol descriptions, and graph expressions such as
//! `product(T3ball(3),T3ball(3))`.

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::medgraph::{
    cayley_ball, cube, grid, product_graph, staircase, tree_ball, tree_ball_with_ray, FiniteGraph, MedianComplex,
    TreeBall, TreeProduct,
};
use crate::symbolkit::RadialSymbol;

/// Parses `α=2.5,r=0.5` (also `;` or whitespace separated) into a JSON map.
/// Numeric values become numbers, everything else strings.
pub fn parse_params(text: &str) -> Result<Map<String, Value>> {
    let mut out = Map::new();
    for item in text.split([',', ';', ' ']).map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("parameter `{item}` is not of the form key=value")))?;
        let key = match k.trim() {
            "α" | "a" => "alpha",
            other => other,
        };
        let value = match v.trim().parse::<f64>() {
            Ok(x) => Value::from(x),
            Err(_) => Value::from(v.trim()),
        };
        out.insert(key.to_string(), value);
    }
    Ok(out)
}

/// A catalog symbol from its id plus `k=v` parameters, or a JSON object.
pub fn parse_symbol(kind: &str, params: &str) -> Result<RadialSymbol> {
    let kind = kind.trim();
    if kind.starts_with('{') {
        return RadialSymbol::from_json(kind);
    }
    if kind.eq_ignore_ascii_case("CONSTANT") || kind.eq_ignore_ascii_case("ONE") {
        let p = parse_params(params)?;
        let c = p.get("c").and_then(Value::as_f64).unwrap_or(1.0);
        return Ok(RadialSymbol::constant(c));
    }
    RadialSymbol::from_id(kind, &parse_params(params)?)
}

/// Symbol from a manifest value: a JSON object, a bare id, or the label
/// form `KIND(key=value, ...)`.
pub fn symbol_from_value(v: &Value) -> Result<RadialSymbol> {
    match v {
        Value::String(s) => match s.trim().strip_suffix(')').and_then(|t| t.split_once('(')) {
            Some((kind, params)) => parse_symbol(kind, params),
            None => parse_symbol(s, ""),
        },
        Value::Object(_) => RadialSymbol::from_json(&v.to_string()),
        other => Err(Error::InvalidInput(format!("cannot read a symbol from {other}"))),
    }
}

/// Parsed graph expression.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// `T{d}ball(R)` or `T{d}ball(R,ext)`: ball in the d-regular tree.
    TreeBall { degree: usize, radius: usize, extension: usize },
    Product(Vec<GraphSpec>),
    Grid(usize, usize),
    Cube(usize),
    Staircase(usize),
    /// `cayley(R)`: ball in the Cayley graph of ℤ₃∗ℤ₃∗ℤ₃.
    Cayley(usize),
}

impl GraphSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (head, args) = split_call(&t)?;
        let nums = || -> Result<Vec<usize>> {
            split_args(args)
                .iter()
                .map(|a| a.parse::<usize>().map_err(|_| Error::InvalidInput(format!("`{a}` is not a natural number"))))
                .collect()
        };
        let lower = head.to_ascii_lowercase();
        if lower == "product" {
            let parts = split_args(args).iter().map(|a| GraphSpec::parse(a)).collect::<Result<Vec<_>>>()?;
            if parts.is_empty() {
                return Err(Error::InvalidInput("product() needs factors".into()));
            }
            return Ok(GraphSpec::Product(parts));
        }
        let n = nums()?;
        let arity = |k: usize| -> Result<()> {
            if n.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{head} takes {k} argument(s)")))
            }
        };
        match lower.as_str() {
            "grid" => arity(2).map(|_| GraphSpec::Grid(n[0], n[1])),
            "cube" => arity(1).map(|_| GraphSpec::Cube(n[0])),
            "staircase" => arity(1).map(|_| GraphSpec::Staircase(n[0])),
            "cayley" => arity(1).map(|_| GraphSpec::Cayley(n[0])),
            _ if lower.starts_with('t') && lower.ends_with("ball") => {
                let degree: usize = lower[1..lower.len() - 4]
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad tree degree in `{head}`")))?;
                if degree < 2 {
                    return Err(Error::InvalidInput("tree degree must be ≥ 2".into()));
                }
                match n.len() {
                    1 => Ok(GraphSpec::TreeBall { degree, radius: n[0], extension: 0 }),
                    2 => Ok(GraphSpec::TreeBall { degree, radius: n[0], extension: n[1] }),
                    _ => Err(Error::InvalidInput(format!("{head} takes (R) or (R, extension)"))),
                }
            }
            _ => Err(Error::InvalidInput(format!("unknown graph `{head}`"))),
        }
    }

    fn tree(&self) -> Option<Result<TreeBall>> {
        match *self {
            GraphSpec::TreeBall { degree, radius, extension } => Some(tree_ball_with_ray(degree - 1, radius, extension)),
            _ => None,
        }
    }

    /// The graph itself.
    pub fn build(&self) -> Result<FiniteGraph> {
        Ok(match self {
            GraphSpec::TreeBall { degree, radius, extension } => {
                if *extension == 0 {
                    tree_ball(degree - 1, *radius)?.graph
                } else {
                    tree_ball_with_ray(degree - 1, *radius, *extension)?.graph
                }
            }
            GraphSpec::Product(parts) => {
                let graphs = parts.iter().map(|p| p.build()).collect::<Result<Vec<_>>>()?;
                let refs: Vec<&FiniteGraph> = graphs.iter().collect();
                product_graph(&refs)?.graph
            }
            GraphSpec::Grid(..) | GraphSpec::Cube(_) | GraphSpec::Staircase(_) => self.complex()?.graph,
            GraphSpec::Cayley(r) => cayley_ball(*r)?.graph,
        })
    }

    /// Tree product when every factor is a tree ball.
    pub fn tree_product(&self) -> Option<Result<TreeProduct>> {
        let parts: Vec<GraphSpec> = match self {
            GraphSpec::TreeBall { .. } => vec![self.clone()],
            GraphSpec::Product(p) => p.clone(),
            _ => return None,
        };
        let mut balls = Vec::with_capacity(parts.len());
        for p in &parts {
            match p.tree()? {
                Ok(b) => balls.push(b),
                Err(e) => return Some(Err(e)),
            }
        }
        Some(TreeProduct::new(balls))
    }

    /// Median complex with base ray, when the expression describes one.
    pub fn complex(&self) -> Result<MedianComplex> {
        match self {
            GraphSpec::Grid(a, b) => grid(*a, *b),
            GraphSpec::Cube(n) => cube(*n),
            GraphSpec::Staircase(l) => staircase(*l),
            GraphSpec::Cayley(_) => Err(Error::InvalidInput("Cayley balls are not median graphs".into())),
            _ => match self.tree_product() {
                Some(p) => p?.complex(),
                None => Err(Error::InvalidInput("not a median complex".into())),
            },
        }
    }
}

fn split_call(t: &str) -> Result<(&str, &str)> {
    let open = t.find('(').ok_or_else(|| Error::InvalidInput(format!("expected `name(args)`, got `{t}`")))?;
    if !t.ends_with(')') {
        return Err(Error::InvalidInput(format!("unbalanced parentheses in `{t}`")));
    }
    Ok((&t[..open], &t[open + 1..t.len() - 1]))
}

/// Splits on top-level commas.
fn split_args(args: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in args.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_accept_greek_alpha() {
        let p = parse_params("α=2.5, r=0.5").unwrap();
        assert_eq!(p["alpha"], Value::from(2.5));
        assert_eq!(p["r"], Value::from(0.5));
        assert!(parse_params("alpha").is_err());
    }

    #[test]
    fn symbol_from_cli_form() {
        let s = parse_symbol("ALT_POWER", "α=2.5").unwrap();
        assert_eq!(s, RadialSymbol::alt_power(2.5));
        assert_eq!(parse_symbol("constant", "").unwrap(), RadialSymbol::constant(1.0));
    }

    #[test]
    fn symbol_from_label_string() {
        for s in [RadialSymbol::geom(0.5), RadialSymbol::i_power(1.25), RadialSymbol::partial_sum(2)] {
            assert_eq!(symbol_from_value(&Value::from(s.label())).unwrap(), s);
        }
        assert_eq!(symbol_from_value(&Value::from("PARITY")).unwrap(), RadialSymbol::parity());
    }

    #[test]
    fn graph_expressions() {
        let g = GraphSpec::parse("product(T3ball(3), T3ball(3))").unwrap();
        assert_eq!(g.build().unwrap().len(), 22 * 22);
        assert!(g.tree_product().unwrap().is_ok());
        assert_eq!(GraphSpec::parse("grid(3,4)").unwrap(), GraphSpec::Grid(3, 4));
        assert_eq!(GraphSpec::parse("cayley(2)").unwrap().build().unwrap().len(), 1 + 6 + 24);
        assert!(GraphSpec::parse("T3ball(1,2,3)").is_err());
        assert!(GraphSpec::parse("sphere(2)").is_err());
    }
}
