//! Text and JSON renderings of Steinitz numbers.
//!
//! Text: `2^3 · 3 · 5^inf · {p>=7 mod 4 = 1 except 13}^(1,inf)`.
//! JSON: an array of `{"prime","exponent"}` objects followed by
//! `{"tail": rule-name, "params": {...}}` objects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use super::{Exponent, PrimeStream, SteinitzNumber, TailRule};
use crate::error::{Error, Result};

pub(super) fn render_tail_set(t: &TailRule) -> String {
    let s = t.stream();
    let mut out = format!("{{p>={}", s.start());
    if s.modulus() > 1 {
        out.push_str(&format!(" mod {} = {}", s.modulus(), s.residue()));
    }
    if !t.exclude().is_empty() {
        let ex: Vec<String> = t.exclude().iter().map(|p| p.to_string()).collect();
        out.push_str(&format!(" except {}", ex.join(",")));
    }
    out.push('}');
    out
}

fn render_tail(t: &TailRule) -> String {
    let mut out = render_tail_set(t);
    match t {
        TailRule::ConstantExponent { exponent, .. } => {
            if *exponent != Exponent::Finite(1) {
                out.push_str(&format!("^{exponent}"));
            }
        }
        TailRule::IndexedExponent { pattern, .. } => {
            let ps: Vec<String> = pattern.iter().map(|e| e.to_string()).collect();
            out.push_str(&format!("^({})", ps.join(",")));
        }
    }
    out
}

impl fmt::Display for SteinitzNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .explicit
            .iter()
            .map(|(p, e)| match e {
                Exponent::Finite(1) => p.to_string(),
                _ => format!("{p}^{e}"),
            })
            .collect();
        parts.extend(self.tails.iter().map(render_tail));
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" · "))
        }
    }
}

fn parse_u64(s: &str, what: &str) -> Result<u64> {
    s.trim().parse::<u64>().map_err(|_| Error::invalid(format!("bad {what}: {s:?}")))
}

fn parse_exponent(s: &str) -> Result<Exponent> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") || s == "∞" {
        Ok(Exponent::Infinity)
    } else {
        Ok(Exponent::Finite(parse_u64(s, "exponent")?))
    }
}

fn parse_tail(tok: &str) -> Result<TailRule> {
    let close = tok.find('}').ok_or_else(|| Error::invalid(format!("unclosed tail {tok:?}")))?;
    let body = &tok[1..close];
    let rest = tok[close + 1..].trim();
    let (head, except) = match body.find("except") {
        Some(i) => (&body[..i], Some(&body[i + "except".len()..])),
        None => (body, None),
    };
    let head = head.trim();
    let head = head.strip_prefix("p>=").ok_or_else(|| Error::invalid(format!("tail must start with p>=: {tok:?}")))?;
    let (start, modulus, residue) = match head.find("mod") {
        Some(i) => {
            let start = parse_u64(&head[..i], "tail start")?;
            let (m, r) = head[i + 3..]
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("tail residue needs '=': {tok:?}")))?;
            (start, parse_u64(m, "modulus")?, parse_u64(r, "residue")?)
        }
        None => (parse_u64(head, "tail start")?, 1, 0),
    };
    let stream = PrimeStream::new(start, modulus, residue)?;
    let exclude: BTreeSet<u64> = match except {
        Some(list) => list.split(',').map(|p| parse_u64(p, "excluded prime")).collect::<Result<_>>()?,
        None => BTreeSet::new(),
    };
    let pattern = if rest.is_empty() {
        vec![Exponent::Finite(1)]
    } else {
        let e = rest.strip_prefix('^').ok_or_else(|| Error::invalid(format!("junk after tail: {rest:?}")))?.trim();
        if let Some(inner) = e.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
            inner.split(',').map(parse_exponent).collect::<Result<Vec<_>>>()?
        } else {
            vec![parse_exponent(e)?]
        }
    };
    if pattern.is_empty() {
        return Err(Error::invalid("empty tail pattern"));
    }
    check_exclusions(&stream, &exclude)?;
    Ok(TailRule::from_parts(stream, exclude, pattern))
}

fn check_exclusions(stream: &PrimeStream, exclude: &BTreeSet<u64>) -> Result<()> {
    match exclude.iter().find(|&&p| !stream.contains(p)) {
        Some(p) => Err(Error::invalid(format!("excluded {p} is not a prime of the stream"))),
        None => Ok(()),
    }
}

impl FromStr for SteinitzNumber {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::invalid("empty Steinitz number"));
        }
        if s == "1" {
            return Ok(SteinitzNumber::one());
        }
        let mut pairs = Vec::new();
        let mut tails = Vec::new();
        for tok in s.split(['·', '*']) {
            let tok = tok.trim();
            if tok.starts_with('{') {
                tails.push(parse_tail(tok)?);
                continue;
            }
            let (p, e) = match tok.split_once('^') {
                Some((p, e)) => (parse_u64(p, "prime")?, parse_exponent(e)?),
                None => (parse_u64(tok, "prime")?, Exponent::Finite(1)),
            };
            if e.is_zero() {
                return Err(Error::invalid(format!("explicit factor {tok:?} has exponent 0")));
            }
            pairs.push((p, e));
        }
        let mut n = SteinitzNumber::from_pairs(pairs)?;
        for t in tails {
            n = n.with_tail(t)?;
        }
        Ok(n)
    }
}

fn exponent_json(e: Exponent) -> Value {
    match e {
        Exponent::Finite(n) => json!(n),
        Exponent::Infinity => json!("inf"),
    }
}

fn exponent_from_json(v: &Value) -> Result<Exponent> {
    match v {
        Value::Number(n) => n.as_u64().map(Exponent::Finite).ok_or_else(|| Error::invalid(format!("bad exponent {n}"))),
        Value::String(s) => parse_exponent(s),
        other => Err(Error::invalid(format!("bad exponent {other}"))),
    }
}

impl SteinitzNumber {
    pub fn to_json(&self) -> Value {
        let mut items: Vec<Value> =
            self.explicit.iter().map(|(&p, &e)| json!({ "prime": p, "exponent": exponent_json(e) })).collect();
        for t in &self.tails {
            let s = t.stream();
            let mut params = json!({
                "start": s.start(),
                "modulus": s.modulus(),
                "residue": s.residue(),
                "exclude": t.exclude().iter().collect::<Vec<_>>(),
            });
            match t {
                TailRule::ConstantExponent { exponent, .. } => params["exponent"] = exponent_json(*exponent),
                TailRule::IndexedExponent { pattern, .. } => {
                    params["pattern"] = Value::Array(pattern.iter().map(|&e| exponent_json(e)).collect())
                }
            }
            items.push(json!({ "tail": t.name(), "params": params }));
        }
        Value::Array(items)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let items = v.as_array().ok_or_else(|| Error::invalid("Steinitz JSON must be an array"))?;
        let mut explicit = BTreeMap::new();
        let mut tails = Vec::new();
        for item in items {
            if let Some(name) = item.get("tail") {
                let name = name.as_str().ok_or_else(|| Error::invalid("tail name must be a string"))?;
                let params = item.get("params").ok_or_else(|| Error::invalid("tail without params"))?;
                let field = |k: &str| params.get(k).and_then(Value::as_u64);
                let stream = PrimeStream::new(field("start").unwrap_or(2), field("modulus").unwrap_or(1), field("residue").unwrap_or(0))?;
                let exclude: BTreeSet<u64> = match params.get("exclude") {
                    Some(Value::Array(xs)) => xs
                        .iter()
                        .map(|x| x.as_u64().ok_or_else(|| Error::invalid("excluded primes must be integers")))
                        .collect::<Result<_>>()?,
                    _ => BTreeSet::new(),
                };
                check_exclusions(&stream, &exclude)?;
                let pattern = match name {
                    "constant-exponent" => {
                        vec![exponent_from_json(params.get("exponent").ok_or_else(|| Error::invalid("missing exponent"))?)?]
                    }
                    "indexed-exponent" => params
                        .get("pattern")
                        .and_then(Value::as_array)
                        .ok_or_else(|| Error::invalid("missing pattern"))?
                        .iter()
                        .map(exponent_from_json)
                        .collect::<Result<Vec<_>>>()?,
                    other => return Err(Error::invalid(format!("unknown tail rule {other:?}"))),
                };
                if pattern.is_empty() {
                    return Err(Error::invalid("empty tail pattern"));
                }
                tails.push(TailRule::from_parts(stream, exclude, pattern));
            } else {
                let p = item
                    .get("prime")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::invalid(format!("factor without prime: {item}")))?;
                let e = exponent_from_json(item.get("exponent").unwrap_or(&json!(1)))?;
                if explicit.insert(p, e).is_some() {
                    return Err(Error::invalid(format!("prime {p} listed twice")));
                }
            }
        }
        let mut n = SteinitzNumber::from_pairs(explicit)?;
        for t in tails {
            n = n.with_tail(t)?;
        }
        Ok(n)
    }
}

impl Serialize for SteinitzNumber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SteinitzNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        SteinitzNumber::from_json(&v).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod format_tests {
    use super::*;

    #[test]
    fn canonical_text() {
        let n: SteinitzNumber = "5^inf · 2^3 · 3".parse().unwrap();
        assert_eq!(n.to_string(), "2^3 · 3 · 5^inf");
        assert_eq!(SteinitzNumber::one().to_string(), "1");
        assert!("2^0".parse::<SteinitzNumber>().is_err());
        assert!("4^2".parse::<SteinitzNumber>().is_err());
    }

    #[test]
    fn tail_text_roundtrip() {
        for s in ["2^2 · {p>=3}^inf", "{p>=2 mod 4 = 1 except 5,13}^(1,inf)", "3 · {p>=5}"] {
            let n: SteinitzNumber = s.parse().unwrap();
            assert_eq!(n.to_string(), s);
            assert_eq!(n.to_string().parse::<SteinitzNumber>().unwrap(), n);
        }
    }

    #[test]
    fn json_roundtrip() {
        for s in ["1", "2^3 · 3 · 5^inf", "7 · {p>=11 except 13}^2", "{p>=3 mod 4 = 3}^(2,inf,1)"] {
            let n: SteinitzNumber = s.parse().unwrap();
            let v = n.to_json();
            assert_eq!(SteinitzNumber::from_json(&v).unwrap(), n);
            let text = serde_json::to_string(&n).unwrap();
            assert_eq!(serde_json::from_str::<SteinitzNumber>(&text).unwrap(), n);
        }
        let v: Value = serde_json::from_str(r#"[{"prime":2,"exponent":3},{"prime":5,"exponent":"inf"}]"#).unwrap();
        assert_eq!(SteinitzNumber::from_json(&v).unwrap().to_string(), "2^3 · 5^inf");
    }
}
