//! JSON formats. Objects are referred to by name in every file; the engine
//! itself only sees indices, with the null-object moved to index 0.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{AgentId, Domain, Instance, Matching, ObjectId};
use crate::preferences::{Preference, Profile};
use crate::rules::{AgentOrder, Lottery, RuleDescriptor, RuleTable, Weight};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectSpec {
    name: String,
    capacity: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceSpec {
    n: usize,
    objects: Vec<ObjectSpec>,
    #[serde(default)]
    null_object: Option<String>,
    #[serde(default = "general")]
    domain: Domain,
}

fn general() -> Domain {
    Domain::General
}

/// Parses text as JSON, keeping line and column for syntax errors.
pub fn parse_json(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_json(path: &Path) -> Result<Value> {
    parse_json(&std::fs::read_to_string(path)?)
}

/// `value[key]` when `value` is an object holding `key`, else `value`.
fn unwrap_key<'a>(value: &'a Value, key: &str) -> &'a Value {
    value.get(key).unwrap_or(value)
}

/// An instance together with its object names (index order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedInstance {
    pub instance: Instance,
    pub names: Vec<String>,
    lookup: HashMap<String, ObjectId>,
}

impl NamedInstance {
    pub fn new(instance: Instance, names: Vec<String>) -> Result<Self> {
        if names.len() != instance.k() {
            return Err(Error::Format(format!(
                "{} names for {} objects",
                names.len(),
                instance.k()
            )));
        }
        let mut lookup = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if lookup.insert(name.clone(), ObjectId(i)).is_some() {
                return Err(Error::Format(format!("object name {name:?} used twice")));
            }
        }
        Ok(NamedInstance {
            instance,
            names,
            lookup,
        })
    }

    /// Names `o0, o1, ...`, with `null` for a null-object at index 0.
    pub fn with_default_names(instance: Instance) -> Self {
        let names = instance
            .objects()
            .map(|o| {
                if instance.is_null(o) {
                    "null".to_string()
                } else {
                    format!("o{}", o.0)
                }
            })
            .collect();
        NamedInstance::new(instance, names).expect("distinct generated names")
    }

    /// Accepts the instance object itself or any object with an `instance` key.
    pub fn from_value(value: &Value) -> Result<Self> {
        let spec: InstanceSpec = serde_json::from_value(unwrap_key(value, "instance").clone())
            .map_err(|e| Error::Format(format!("instance: {e}")))?;
        let mut order: Vec<&ObjectSpec> = spec.objects.iter().collect();
        let null_object = match &spec.null_object {
            Some(name) => {
                let pos = order
                    .iter()
                    .position(|o| &o.name == name)
                    .ok_or_else(|| Error::Format(format!("null-object {name:?} is not listed")))?;
                let null = order.remove(pos);
                order.insert(0, null);
                Some(ObjectId(0))
            }
            None => None,
        };
        let instance = Instance::new(
            spec.n,
            order.iter().map(|o| o.capacity).collect(),
            null_object,
            spec.domain,
        )?;
        NamedInstance::new(instance, order.iter().map(|o| o.name.clone()).collect())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        NamedInstance::from_value(&parse_json(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        NamedInstance::from_value(&read_json(path)?)
    }

    pub fn to_value(&self) -> Value {
        let inst = &self.instance;
        json!({
            "n": inst.n(),
            "objects": inst.objects().map(|o| json!({
                "name": self.names[o.0],
                "capacity": inst.capacity(o),
            })).collect::<Vec<_>>(),
            "null_object": inst.null_object().map(|o| self.names[o.0].clone()),
            "domain": inst.domain(),
        })
    }

    pub fn object(&self, name: &str) -> Result<ObjectId> {
        self.lookup
            .get(name)
            .copied()
            .ok_or_else(|| Error::Format(format!("unknown object {name:?}")))
    }

    pub fn name(&self, o: ObjectId) -> &str {
        &self.names[o.0]
    }

    fn names_of(&self, value: &Value, what: &str) -> Result<Vec<ObjectId>> {
        let list = value
            .as_array()
            .ok_or_else(|| Error::Format(format!("{what} must be a list of object names")))?;
        list.iter()
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| Error::Format(format!("{what} must contain object names")))
                    .and_then(|s| self.object(s))
            })
            .collect()
    }

    /// A list of per-agent rankings, or an object with a `profile` key.
    pub fn profile_from_value(&self, value: &Value) -> Result<Profile> {
        let rows = unwrap_key(value, "profile")
            .as_array()
            .ok_or_else(|| Error::Format("profile must be a list of rankings".into()))?;
        if rows.len() != self.instance.n() {
            return Err(Error::Format(format!(
                "profile has {} rankings for {} agents",
                rows.len(),
                self.instance.n()
            )));
        }
        let prefs = rows
            .iter()
            .map(|row| Preference::new(self.instance.k(), self.names_of(row, "ranking")?))
            .collect::<Result<Vec<_>>>()?;
        Profile::new(&self.instance, prefs)
    }

    pub fn profile_to_value(&self, p: &Profile) -> Value {
        Value::from(
            p.prefs()
                .iter()
                .map(|q| self.objects_to_value(q.ranking()))
                .collect::<Vec<_>>(),
        )
    }

    fn objects_to_value(&self, objects: &[ObjectId]) -> Value {
        Value::from(objects.iter().map(|&o| self.name(o)).collect::<Vec<_>>())
    }

    /// A list of object names per agent, or an object with a `matching` key.
    pub fn matching_from_value(&self, value: &Value) -> Result<Matching> {
        Matching::new(&self.instance, self.names_of(unwrap_key(value, "matching"), "matching")?)
    }

    pub fn matching_to_value(&self, m: &Matching) -> Value {
        self.objects_to_value(m.as_slice())
    }

    pub fn lottery_to_value(&self, l: &Lottery) -> Value {
        Value::from(
            l.entries()
                .map(|(m, w)| json!({"matching": self.matching_to_value(m), "weight": w.to_string()}))
                .collect::<Vec<_>>(),
        )
    }

    pub fn lottery_from_value(&self, value: &Value) -> Result<Lottery> {
        let entries = value
            .as_array()
            .ok_or_else(|| Error::Format("lottery must be a list of entries".into()))?;
        let parsed = entries
            .iter()
            .map(|e| {
                let m = self.matching_from_value(
                    e.get("matching")
                        .ok_or_else(|| Error::Format("lottery entry without matching".into()))?,
                )?;
                let w = e
                    .get("weight")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::Format("lottery weight must be a \"p/q\" string".into()))?;
                Ok((m, Weight::parse(w)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Lottery::new(parsed)
    }

    /// Serializes a tabulated rule, one record per profile.
    pub fn rule_table_to_value(&self, rule: &RuleDescriptor) -> Result<Value> {
        let (kind, records): (&str, Vec<Value>) = match rule {
            RuleDescriptor::TabulatedDeterministic(t) => (
                "deterministic",
                t.iter()
                    .map(|(r, m)| json!({"profile": self.profile_to_value(r), "matching": self.matching_to_value(m)}))
                    .collect(),
            ),
            RuleDescriptor::TabulatedLottery(t) => (
                "lottery",
                t.iter()
                    .map(|(r, l)| json!({"profile": self.profile_to_value(r), "lottery": self.lottery_to_value(l)}))
                    .collect(),
            ),
            _ => {
                return Err(Error::Format(
                    "only tabulated rules have a table representation".into(),
                ))
            }
        };
        Ok(json!({"kind": kind, "instance": self.to_value(), "records": records}))
    }

    pub fn rule_table_from_value(&self, value: &Value) -> Result<RuleDescriptor> {
        if let Some(embedded) = value.get("instance") {
            let other = NamedInstance::from_value(embedded)?;
            if other.instance != self.instance || other.names != self.names {
                return Err(Error::Format(
                    "rule table was written for a different instance".into(),
                ));
            }
        }
        let kind = value
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Format("rule table needs a \"kind\"".into()))?;
        let records = value
            .get("records")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format("rule table needs \"records\"".into()))?;
        let field = |rec: &'_ Value, key: &str| -> Result<Value> {
            rec.get(key)
                .cloned()
                .ok_or_else(|| Error::Format(format!("record without {key:?}")))
        };
        match kind {
            "deterministic" => {
                let mut entries = BTreeMap::new();
                for rec in records {
                    let r = self.profile_from_value(&field(rec, "profile")?)?;
                    let m = self.matching_from_value(&field(rec, "matching")?)?;
                    if entries.insert(r, m).is_some() {
                        return Err(Error::Format("profile listed twice in rule table".into()));
                    }
                }
                Ok(RuleDescriptor::TabulatedDeterministic(RuleTable::new(entries)))
            }
            "lottery" => {
                let mut entries = BTreeMap::new();
                for rec in records {
                    let r = self.profile_from_value(&field(rec, "profile")?)?;
                    let l = self.lottery_from_value(&field(rec, "lottery")?)?;
                    if entries.insert(r, l).is_some() {
                        return Err(Error::Format("profile listed twice in rule table".into()));
                    }
                }
                Ok(RuleDescriptor::TabulatedLottery(RuleTable::new(entries)))
            }
            other => Err(Error::Format(format!("unknown rule table kind {other:?}"))),
        }
    }

    pub fn write_rule_table(&self, rule: &RuleDescriptor, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.rule_table_to_value(rule)?).expect("serializable");
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read_rule_table(&self, path: &Path) -> Result<RuleDescriptor> {
        self.rule_table_from_value(&read_json(path)?)
    }

    /// `rsd`, `sd`, `sd:2,0,1` (agent order), `ttc`, `ttc:b,a,c` (endowment
    /// by object name) or the path of a rule table.
    pub fn parse_rule_spec(&self, spec: &str) -> Result<RuleDescriptor> {
        let n = self.instance.n();
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) if matches!(h, "sd" | "ttc") => (h, Some(a)),
            _ => (spec, None),
        };
        match (head, arg) {
            ("rsd", None) => Ok(RuleDescriptor::RandomSerialDictatorship),
            ("sd", None) => Ok(RuleDescriptor::SerialDictatorship(AgentOrder::identity(n))),
            ("sd", Some(a)) => {
                let order = a
                    .split(',')
                    .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Format(format!("bad agent index {x:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(RuleDescriptor::SerialDictatorship(AgentOrder::from_indices(n, &order)?))
            }
            ("ttc", None) => {
                let v: Vec<usize> = (0..n).collect();
                Ok(RuleDescriptor::TopTradingCycles {
                    endowment: Matching::from_indices(&self.instance, &v)?,
                })
            }
            ("ttc", Some(a)) => {
                let objects = a
                    .split(',')
                    .map(|x| self.object(x.trim()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(RuleDescriptor::TopTradingCycles {
                    endowment: Matching::new(&self.instance, objects)?,
                })
            }
            _ => self.read_rule_table(Path::new(spec)),
        }
    }

    /// Object-name legend for reports that use indices.
    pub fn legend(&self) -> Value {
        json!({"agents": self.instance.n(), "objects": self.names})
    }

    pub fn agent_list(agents: &[AgentId]) -> Value {
        Value::from(agents.iter().map(|a| a.0).collect::<Vec<_>>())
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Limits;
    use crate::theorems::bossy_rule;

    const NB: &str = r#"{"n": 3, "objects": [{"name": "a", "capacity": 1}, {"name": "none", "capacity": 3},
        {"name": "b", "capacity": 1}], "null_object": "none", "domain": "null_bottom"}"#;

    #[test]
    fn null_object_moves_to_index_zero() {
        let ni = NamedInstance::from_json(NB).unwrap();
        assert_eq!(ni.names, vec!["none", "a", "b"]);
        assert_eq!(ni.instance.capacities(), &[3, 1, 1]);
        assert_eq!(ni.instance.null_object(), Some(ObjectId(0)));
        let back = NamedInstance::from_value(&ni.to_value()).unwrap();
        assert_eq!(back, ni);
    }

    #[test]
    fn profile_and_matching_round_trip() {
        let ni = NamedInstance::from_json(NB).unwrap();
        let p = ni
            .profile_from_value(&parse_json(r#"[["a","b","none"],["b","a","none"],["a","b","none"]]"#).unwrap())
            .unwrap();
        assert_eq!(ni.profile_from_value(&ni.profile_to_value(&p)).unwrap(), p);
        let bad = parse_json(r#"[["none","a","b"],["b","a","none"],["a","b","none"]]"#).unwrap();
        assert!(matches!(ni.profile_from_value(&bad), Err(Error::DomainViolation { agent: 0 })));
        let m = ni.matching_from_value(&parse_json(r#"["a","b","none"]"#).unwrap()).unwrap();
        assert_eq!(ni.matching_to_value(&m), parse_json(r#"["a","b","none"]"#).unwrap());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match NamedInstance::from_json("{\n  \"n\": 2,\n  oops\n}") {
            Err(Error::Json { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rule_tables_round_trip() {
        let ni = NamedInstance::with_default_names(Instance::unit(3, 3).unwrap());
        let rule = RuleDescriptor::TabulatedDeterministic(bossy_rule(&ni.instance, &Limits::default()).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bossy.json");
        ni.write_rule_table(&rule, &path).unwrap();
        assert_eq!(ni.read_rule_table(&path).unwrap(), rule);
        assert_eq!(ni.parse_rule_spec(path.to_str().unwrap()).unwrap(), rule);
    }

    #[test]
    fn rule_specs() {
        let ni = NamedInstance::with_default_names(Instance::unit(3, 3).unwrap());
        assert_eq!(ni.parse_rule_spec("rsd").unwrap(), RuleDescriptor::RandomSerialDictatorship);
        assert_eq!(ni.parse_rule_spec("sd:2,0,1").unwrap().label(), "sd:2,0,1");
        assert_eq!(ni.parse_rule_spec("ttc:o1,o0,o2").unwrap().label(), "ttc:1,0,2");
        assert!(ni.parse_rule_spec("sd:0,0,1").is_err());
        assert!(ni.parse_rule_spec("/nonexistent/rule.json").is_err());
    }
}
