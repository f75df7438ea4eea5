use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnyModel, GridFunction, MinModel, ProductModel};
use crate::error::{GsiError, Result};

/// A scalar is broadcast to every coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Numbers {
    One(f64),
    Many(Vec<f64>),
}

impl Numbers {
    fn len(&self) -> Option<usize> {
        match self {
            Numbers::One(_) => None,
            Numbers::Many(v) => Some(v.len()),
        }
    }

    fn expand(&self, d: usize) -> Result<Vec<f64>> {
        match self {
            Numbers::One(x) => Ok(vec![*x; d]),
            Numbers::Many(v) if v.len() == d => Ok(v.clone()),
            Numbers::Many(v) => Err(GsiError::DimensionMismatch { left: d, right: v.len() }),
        }
    }
}

/// JSON model configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelDoc {
    Product {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        #[serde(default = "unit")]
        mu: Numbers,
        tau: Numbers,
    },
    Min {
        d: usize,
    },
    Grid {
        d: usize,
        m: usize,
        values: Vec<f64>,
    },
}

fn unit() -> Numbers {
    Numbers::One(1.0)
}

impl ModelDoc {
    pub fn build(&self) -> Result<AnyModel> {
        match self {
            ModelDoc::Product { d, mu, tau } => {
                let d = d.or(tau.len()).or(mu.len()).ok_or_else(|| {
                    GsiError::InvalidParameter("product model needs d or a vector of mu/tau".into())
                })?;
                Ok(AnyModel::Product(ProductModel::new(mu.expand(d)?, tau.expand(d)?)?))
            }
            ModelDoc::Min { d } => Ok(AnyModel::Min(MinModel::new(*d)?)),
            ModelDoc::Grid { d, m, values } => Ok(AnyModel::Grid(GridFunction::new(*d, *m, values.clone())?)),
        }
    }
}

impl AnyModel {
    /// Parses a model argument: inline JSON, shorthand such as `min:d=5` or
    /// `product:mu=1,tau=1,1,0.5`, or a path to a JSON or CSV file.
    pub fn parse(arg: &str) -> Result<AnyModel> {
        let arg = arg.trim();
        if arg.starts_with('{') {
            return serde_json::from_str::<ModelDoc>(arg)?.build();
        }
        if let Some((kind, rest)) = arg.split_once(':') {
            if matches!(kind, "min" | "product") {
                return parse_shorthand(kind, rest);
            }
        }
        Self::load(Path::new(arg))
    }

    pub fn load(path: &Path) -> Result<AnyModel> {
        let text = std::fs::read_to_string(path).map_err(|e| GsiError::Io(format!("{}: {e}", path.display())))?;
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if is_csv {
            Ok(AnyModel::Grid(parse_grid_csv(&text)?))
        } else {
            serde_json::from_str::<ModelDoc>(&text)?.build()
        }
    }

    pub fn to_doc(&self) -> ModelDoc {
        match self {
            AnyModel::Product(p) => ModelDoc::Product {
                d: None,
                mu: Numbers::Many(p.mu().to_vec()),
                tau: Numbers::Many(p.tau().to_vec()),
            },
            AnyModel::Min(m) => ModelDoc::Min { d: super::Model::dim(m) },
            AnyModel::Grid(g) => ModelDoc::Grid { d: g.dim(), m: g.levels(), values: g.values().to_vec() },
        }
    }
}

/// `key=v1,v2,...` lists; a token containing `=` starts a new key.
fn parse_shorthand(kind: &str, rest: &str) -> Result<AnyModel> {
    let mut keys: Vec<(String, Vec<f64>)> = Vec::new();
    for tok in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let value = match tok.split_once('=') {
            Some((k, v)) => {
                keys.push((k.trim().to_string(), Vec::new()));
                v
            }
            None => tok,
        };
        let (key, list) = keys
            .last_mut()
            .ok_or_else(|| GsiError::Parse(format!("model shorthand `{rest}` must start with key=")))?;
        let x: f64 = value
            .trim()
            .parse()
            .map_err(|_| GsiError::Parse(format!("bad number `{value}` for `{key}`")))?;
        list.push(x);
    }
    let get = |name: &str| keys.iter().find(|(k, _)| k == name).map(|(_, v)| v.clone());
    for (k, _) in &keys {
        let allowed: &[&str] = if kind == "min" { &["d"] } else { &["d", "mu", "tau"] };
        if !allowed.contains(&k.as_str()) {
            return Err(GsiError::Parse(format!("unknown key `{k}` for {kind} model")));
        }
    }
    let as_dim = |v: Vec<f64>| -> Result<usize> {
        match v.as_slice() {
            [x] if *x >= 1.0 && x.fract() == 0.0 => Ok(*x as usize),
            _ => Err(GsiError::Parse("d must be a single positive integer".into())),
        }
    };
    let numbers = |v: Vec<f64>| if v.len() == 1 { Numbers::One(v[0]) } else { Numbers::Many(v) };
    let doc = match kind {
        "min" => ModelDoc::Min {
            d: as_dim(get("d").ok_or_else(|| GsiError::Parse("min model needs d=".into()))?)?,
        },
        _ => ModelDoc::Product {
            d: get("d").map(as_dim).transpose()?,
            mu: get("mu").map(numbers).unwrap_or(Numbers::One(1.0)),
            tau: numbers(get("tau").ok_or_else(|| GsiError::Parse("product model needs tau=".into()))?),
        },
    };
    doc.build()
}

/// CSV grid: a `d,m` record (optionally preceded by a non-numeric header row),
/// then `m^d` values in any row layout.
pub fn parse_grid_csv(text: &str) -> Result<GridFunction> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut fields: Vec<String> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| GsiError::Parse(e.to_string()))?;
        fields.extend(rec.iter().filter(|f| !f.is_empty()).map(str::to_string));
    }
    let mut it = fields.into_iter().peekable();
    if it.peek().is_some_and(|f| f.parse::<f64>().is_err()) {
        // header names such as "d,m"
        it.next();
        it.next();
    }
    let mut int = |what: &str| -> Result<usize> {
        it.next()
            .and_then(|f| f.parse::<usize>().ok())
            .ok_or_else(|| GsiError::Parse(format!("grid csv needs integer {what}")))
    };
    let d = int("d")?;
    let m = int("m")?;
    let values = it
        .map(|f| f.parse::<f64>().map_err(|_| GsiError::Parse(format!("bad grid value `{f}`"))))
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(d, m, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Model;

    #[test]
    fn shorthand_forms() {
        let m = AnyModel::parse("min:d=5").unwrap();
        assert!(matches!(m, AnyModel::Min(_)));
        assert_eq!(m.dim(), 5);
        let p = AnyModel::parse("product:mu=1,tau=1,1,0.5,0.5,0.25,0.25").unwrap();
        let AnyModel::Product(p) = p else { panic!() };
        assert_eq!(p.mu(), &[1.0; 6]);
        assert_eq!(p.tau()[5], 0.25);
        let q = AnyModel::parse("product:d=3,tau=0.5").unwrap();
        assert_eq!(q.dim(), 3);
        assert!(AnyModel::parse("min:d=2.5").is_err());
        assert!(AnyModel::parse("min:k=2").is_err());
        assert!(AnyModel::parse("product:mu=1").is_err());
        assert!(AnyModel::parse("product:mu=1,1,tau=1,1,1").is_err());
    }

    #[test]
    fn json_forms() {
        let m = AnyModel::parse(r#"{"kind":"product","mu":[1,1],"tau":[1,0.5]}"#).unwrap();
        assert_eq!(m.dim(), 2);
        let g = AnyModel::parse(r#"{"kind":"grid","d":2,"m":2,"values":[0,1,2,3]}"#).unwrap();
        assert_eq!(g.eval(&[0.7, 0.1]).unwrap(), 2.0);
        assert!(AnyModel::parse(r#"{"kind":"min","d":0}"#).is_err());
        assert!(AnyModel::parse(r#"{"kind":"min","d":3,"extra":1}"#).is_err());
    }

    #[test]
    fn doc_roundtrip() {
        for arg in ["min:d=4", "product:mu=1,2,tau=0.5,0.25"] {
            let m = AnyModel::parse(arg).unwrap();
            let text = serde_json::to_string(&m.to_doc()).unwrap();
            let back = AnyModel::parse(&text).unwrap();
            assert_eq!(back.to_doc(), m.to_doc());
        }
    }

    #[test]
    fn grid_csv() {
        let g = parse_grid_csv("d,m\n2,2\n0,1\n2,3\n").unwrap();
        assert_eq!(g.values(), &[0.0, 1.0, 2.0, 3.0]);
        let h = parse_grid_csv("2,2\n0\n1\n2\n3\n").unwrap();
        assert_eq!(g, h);
        assert!(parse_grid_csv("2,2\n0,1,2\n").is_err());
        assert!(parse_grid_csv("2,2\n0,1,x,3\n").is_err());
    }

    #[test]
    fn files() {
        let dir = tempfile::tempdir().unwrap();
        let json = dir.path().join("m.json");
        std::fs::write(&json, r#"{"kind":"min","d":3}"#).unwrap();
        assert_eq!(AnyModel::parse(json.to_str().unwrap()).unwrap().dim(), 3);
        let csv = dir.path().join("g.csv");
        std::fs::write(&csv, "1,3\n5,6,7\n").unwrap();
        assert_eq!(AnyModel::parse(csv.to_str().unwrap()).unwrap().eval(&[0.9]).unwrap(), 7.0);
        assert!(matches!(AnyModel::parse("/no/such/file.json"), Err(GsiError::Io(_))));
    }
}
