//! JSON instance files.
//!
//! ```json
//! {"ground_size": 2,
//!  "items": [{"cost": "1", "dist": [{"state": [0, 1], "prob": "1/2"},
//!                                   {"state": [0], "prob": "1/2"}]}]}
//! ```
//!
//! Rationals are `"num/den"` strings or bare integers and element lists are
//! strictly ascending. Item ids are positions in `items`. Supports are put
//! into canonical order on load. Every rejected file yields a message ending
//! in `at line L column C`.

use std::fmt;

use serde::de::{self, DeserializeSeed, IgnoredAny, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::instance::{item_violations, Instance, Item, StateDistribution};
use crate::rational::Rational;
use crate::subset::ElementSubset;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct FormatError(#[from] serde_json::Error);

impl FormatError {
    pub fn line(&self) -> usize {
        self.0.line()
    }

    pub fn column(&self) -> usize {
        self.0.column()
    }
}

#[derive(Deserialize)]
struct Probe {
    ground_size: usize,
    #[allow(dead_code)]
    items: IgnoredAny,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryRepr {
    state: ElementSubset,
    prob: Rational,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemRepr {
    cost: Rational,
    dist: Vec<EntryRepr>,
}

struct ItemSeed {
    id: usize,
    ground_size: usize,
}

impl<'de> DeserializeSeed<'de> for ItemSeed {
    type Value = Item;

    fn deserialize<D: Deserializer<'de>>(self, deserializer: D) -> Result<Item, D::Error> {
        let repr = ItemRepr::deserialize(deserializer)?;
        let item = Item {
            id: self.id,
            cost: repr.cost,
            dist: StateDistribution::new(repr.dist.into_iter().map(|e| (e.state, e.prob)).collect()),
        };
        let violations = item_violations(&item, Some(self.ground_size));
        if let Some(v) = violations.first() {
            return Err(de::Error::custom(v));
        }
        Ok(item)
    }
}

struct ItemsSeed {
    ground_size: usize,
}

impl<'de> DeserializeSeed<'de> for ItemsSeed {
    type Value = Vec<Item>;

    fn deserialize<D: Deserializer<'de>>(self, deserializer: D) -> Result<Vec<Item>, D::Error> {
        deserializer.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for ItemsSeed {
    type Value = Vec<Item>;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a list of items")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vec<Item>, A::Error> {
        let mut items = Vec::new();
        while let Some(item) = seq.next_element_seed(ItemSeed { id: items.len(), ground_size: self.ground_size })? {
            items.push(item);
        }
        Ok(items)
    }
}

struct FileSeed {
    ground_size: usize,
}

impl<'de> Visitor<'de> for FileSeed {
    type Value = Instance;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an instance object with `ground_size` and `items`")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Instance, A::Error> {
        let mut items = None;
        let mut seen_ground = false;
        while let Some(key) = map.next_key::<String>()? {
            match key.as_str() {
                "ground_size" if !seen_ground => {
                    map.next_value::<usize>()?;
                    seen_ground = true;
                }
                "items" if items.is_none() => {
                    items = Some(map.next_value_seed(ItemsSeed { ground_size: self.ground_size })?);
                }
                "ground_size" | "items" => return Err(de::Error::custom(format!("duplicate field `{key}`"))),
                other => return Err(de::Error::unknown_field(other, &["ground_size", "items"])),
            }
        }
        Ok(Instance {
            ground_size: self.ground_size,
            items: items.ok_or_else(|| de::Error::missing_field("items"))?,
        })
    }
}

impl<'de> DeserializeSeed<'de> for FileSeed {
    type Value = Instance;

    fn deserialize<D: Deserializer<'de>>(self, deserializer: D) -> Result<Instance, D::Error> {
        deserializer.deserialize_map(self)
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let probe: Probe = serde_json::from_str(text)?;
    let mut de = serde_json::Deserializer::from_str(text);
    let inst = FileSeed { ground_size: probe.ground_size }.deserialize(&mut de)?;
    de.end()?;
    Ok(inst)
}

#[derive(Serialize)]
struct EntryOut<'a> {
    state: &'a ElementSubset,
    prob: &'a Rational,
}

#[derive(Serialize)]
struct ItemOut<'a> {
    cost: &'a Rational,
    dist: Vec<EntryOut<'a>>,
}

#[derive(Serialize)]
struct FileOut<'a> {
    ground_size: usize,
    items: Vec<ItemOut<'a>>,
}

pub fn instance_to_json(inst: &Instance) -> String {
    let out = FileOut {
        ground_size: inst.ground_size,
        items: inst
            .items
            .iter()
            .map(|it| ItemOut {
                cost: &it.cost,
                dist: it.dist.support().iter().map(|(state, prob)| EntryOut { state, prob }).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&out).expect("instance serialization cannot fail")
}
