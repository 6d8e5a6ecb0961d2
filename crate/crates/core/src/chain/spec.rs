use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::families::FamilyDescriptor;
use crate::finite_nilpotent::{is_subgroup, GroupDescriptor, GroupElement, HeisElem, SubgroupDescriptor};
use crate::supernatural::SteinitzNumber;

/// Symbolic Steinitz orders of the whole chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedOrders {
    pub group: SteinitzNumber,
    pub discriminant: SteinitzNumber,
    pub relative: SteinitzNumber,
}

/// How `Γ_ℓ` is produced for `ℓ ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelRule {
    Family(FamilyDescriptor),
    /// `Γ_ℓ` is entry `ℓ - 1`.
    Explicit(Vec<SubgroupDescriptor>),
    /// `Γ_ℓ` is level `stride · ℓ` of the base chain.
    Subsequence { base: Box<LevelRule>, stride: usize },
    /// `Γ_ℓ` is `g Γ'_ℓ g⁻¹` for the base chain `Γ'`.
    Conjugated { base: Box<LevelRule>, by: GroupElement },
}

impl LevelRule {
    /// Levels this rule can produce, `None` when unbounded.
    pub fn available_depth(&self) -> Option<usize> {
        match self {
            LevelRule::Family(f) => f.depth_limit(),
            LevelRule::Explicit(v) => Some(v.len()),
            LevelRule::Subsequence { base, stride } => base.available_depth().map(|d| d / stride),
            LevelRule::Conjugated { base, .. } => base.available_depth(),
        }
    }

    /// Whether the last available level ends the chain, so its image in the
    /// inverse limit is the whole level.
    pub fn is_terminal(&self) -> bool {
        match self {
            LevelRule::Family(f) => f.depth_limit().is_some(),
            LevelRule::Subsequence { base, stride } => base.is_terminal() && *stride == 1,
            LevelRule::Conjugated { base, .. } => base.is_terminal(),
            LevelRule::Explicit(_) => false,
        }
    }

    pub fn subgroup(&self, group: &GroupDescriptor, level: usize, limit: u128) -> Result<SubgroupDescriptor> {
        if level == 0 {
            return SubgroupDescriptor::whole(group);
        }
        if let Some(d) = self.available_depth() {
            if level > d {
                return Err(Error::invalid(format!("the chain only defines {d} levels; level {level} was requested")));
            }
        }
        match self {
            LevelRule::Family(f) => f.level_subgroup(level),
            LevelRule::Explicit(v) => Ok(v[level - 1].clone()),
            LevelRule::Subsequence { base, stride } => base.subgroup(group, level * stride, limit),
            LevelRule::Conjugated { base, by } => base.subgroup(group, level, limit)?.conjugate(by, limit),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            LevelRule::Family(f) => json!({ "family-rule": f.to_json() }),
            LevelRule::Explicit(v) => json!({ "explicit": v.iter().map(|s| s.to_json()).collect::<Vec<_>>() }),
            LevelRule::Subsequence { base, stride } => json!({ "subsequence": { "stride": stride, "base": base.to_json() } }),
            LevelRule::Conjugated { base, by } => json!({ "conjugated": { "by": by, "base": base.to_json() } }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        if let Some(f) = v.get("family-rule") {
            return Ok(LevelRule::Family(FamilyDescriptor::from_json(f)?));
        }
        if let Some(list) = v.get("explicit") {
            let list = list.as_array().ok_or_else(|| Error::invalid("\"explicit\" must be an array"))?;
            return Ok(LevelRule::Explicit(list.iter().map(SubgroupDescriptor::from_json).collect::<Result<_>>()?));
        }
        if let Some(s) = v.get("subsequence") {
            let stride = s.get("stride").and_then(Value::as_u64).filter(|&k| k >= 1);
            let stride = stride.ok_or_else(|| Error::invalid("subsequence stride must be a positive integer"))?;
            let base = s.get("base").ok_or_else(|| Error::invalid("subsequence needs a base rule"))?;
            return Ok(LevelRule::Subsequence { base: Box::new(Self::from_json(base)?), stride: stride as usize });
        }
        if let Some(c) = v.get("conjugated") {
            let by: GroupElement = serde_json::from_value(c.get("by").cloned().unwrap_or(Value::Null))
                .map_err(|e| Error::invalid(format!("bad conjugating element: {e}")))?;
            let base = c.get("base").ok_or_else(|| Error::invalid("conjugated rule needs a base rule"))?;
            return Ok(LevelRule::Conjugated { base: Box::new(Self::from_json(base)?), by });
        }
        Err(Error::invalid("chain needs one of \"family-rule\", \"explicit\", \"subsequence\", \"conjugated\""))
    }
}

/// A group chain `Γ = Γ_0 ⊃ Γ_1 ⊃ ...` truncated at `max_depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub group: GroupDescriptor,
    pub levels: LevelRule,
    pub max_depth: usize,
    pub predicted: Option<PredictedOrders>,
    pub citation: Option<String>,
}

impl ChainSpec {
    pub fn new(group: GroupDescriptor, levels: LevelRule, max_depth: usize) -> Result<Self> {
        let spec = ChainSpec { group, levels, max_depth, predicted: None, citation: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.group.validate()?;
        if self.max_depth == 0 {
            return Err(Error::invalid("max_depth must be at least 1"));
        }
        if let Some(d) = self.levels.available_depth() {
            if self.max_depth > d {
                return Err(Error::invalid(format!("max_depth {} exceeds the {d} levels the chain defines", self.max_depth)));
            }
        }
        Ok(())
    }

    /// Deepest level the rule can produce, used for look-ahead past `max_depth`.
    pub fn lookahead_limit(&self) -> usize {
        self.levels.available_depth().unwrap_or(usize::MAX)
    }

    pub fn subgroup(&self, level: usize, limit: u128) -> Result<SubgroupDescriptor> {
        let s = self.levels.subgroup(&self.group, level, limit)?;
        s.check_group(&self.group)?;
        Ok(s)
    }

    /// `Γ_0, ..., Γ_depth`, checking proper nesting at every step.
    pub fn subgroups(&self, depth: usize, limit: u128) -> Result<Vec<SubgroupDescriptor>> {
        let mut out = vec![self.subgroup(0, limit)?];
        for level in 1..=depth {
            let s = self.subgroup(level, limit)?;
            let prev = &out[level - 1];
            let proper = is_subgroup(&s, prev)? && crate::finite_nilpotent::index(&self.group, &s)?
                > crate::finite_nilpotent::index(&self.group, prev)?;
            if !proper {
                return Err(Error::NestingViolation { level });
            }
            out.push(s);
        }
        Ok(out)
    }

    /// Same chain with every level conjugated by `g`.
    pub fn conjugated(&self, g: GroupElement) -> ChainSpec {
        ChainSpec {
            levels: LevelRule::Conjugated { base: Box::new(self.levels.clone()), by: g },
            predicted: self.predicted.clone(),
            citation: self.citation.clone(),
            ..self.clone()
        }
    }

    /// Levels `stride, 2·stride, ...` of this chain.
    pub fn subsequence(&self, stride: usize, max_depth: usize) -> Result<ChainSpec> {
        if stride == 0 {
            return Err(Error::invalid("stride must be positive"));
        }
        let spec = ChainSpec {
            levels: LevelRule::Subsequence { base: Box::new(self.levels.clone()), stride },
            max_depth,
            ..self.clone()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.levels.to_json();
        v["group"] = serde_json::to_value(self.group).expect("group descriptor serializes");
        v["max_depth"] = json!(self.max_depth);
        if let Some(p) = &self.predicted {
            v["predicted"] = serde_json::to_value(p).expect("predicted orders serialize");
        }
        if let Some(c) = &self.citation {
            v["citation"] = json!(c);
        }
        v
    }

    /// Parse a chain file. Family rules fill in predictions and citations.
    pub fn from_json(v: &Value) -> Result<Self> {
        let levels = LevelRule::from_json(v)?;
        let max_depth = v
            .get("max_depth")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::invalid("chain needs a positive integer \"max_depth\""))? as usize;
        if let LevelRule::Family(f) = &levels {
            return crate::families::build_chain(f, max_depth);
        }
        let group = match v.get("group") {
            Some(g) => serde_json::from_value(g.clone()).map_err(|e| Error::invalid(format!("bad group: {e}")))?,
            None => infer_group(&levels)?,
        };
        let mut spec = ChainSpec::new(group, levels, max_depth)?;
        if let Some(p) = v.get("predicted") {
            spec.predicted = Some(serde_json::from_value(p.clone()).map_err(|e| Error::invalid(format!("bad prediction: {e}")))?);
        }
        spec.citation = v.get("citation").and_then(Value::as_str).map(str::to_owned);
        Ok(spec)
    }
}

fn infer_group(rule: &LevelRule) -> Result<GroupDescriptor> {
    match rule {
        LevelRule::Family(f) => Ok(f.group()),
        LevelRule::Explicit(v) => match v.first() {
            Some(SubgroupDescriptor::AbelianLattice(l)) => Ok(GroupDescriptor::FreeAbelian { rank: l.rank() }),
            Some(_) => Ok(GroupDescriptor::Heisenberg),
            None => Err(Error::invalid("explicit chain has no levels")),
        },
        LevelRule::Subsequence { base, .. } | LevelRule::Conjugated { base, .. } => infer_group(base),
    }
}

/// Convenience for Heisenberg conjugators.
pub fn heis(a: i128, b: i128, c: i128) -> GroupElement {
    GroupElement::Heisenberg(HeisElem::new(a, b, c))
}
