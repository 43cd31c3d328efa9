//! JSON formats for markets, standalone valuations and price files.
//!
//! Item values are keyed by item label. Table valuations key bundles by
//! comma-separated labels, with `""` for the empty bundle. Rationals are
//! strings such as `"7/6"` or `"2"`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Buyer, Bundle, Market, Price, PriceVector, Valuation};
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValuationSpec {
    MultiDemand {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        k: usize,
        values: BTreeMap<String, Rat>,
    },
    UnitDemand {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        values: BTreeMap<String, Rat>,
    },
    Table {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        values: BTreeMap<String, Rat>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub items: Vec<String>,
    pub buyers: Vec<ValuationSpec>,
}

/// A single valuation together with the items it is defined over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationFile {
    pub items: Vec<String>,
    pub valuation: ValuationSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceFile {
    pub prices: BTreeMap<String, Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Rat>,
    #[serde(default)]
    pub unpurchasable: Vec<String>,
}

fn index_of(items: &[String], label: &str) -> Result<usize> {
    items
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::UnknownItem(label.to_string()))
}

fn item_values(items: &[String], values: &BTreeMap<String, Rat>) -> Result<Vec<Rat>> {
    let mut out = vec![Rat::zero(); items.len()];
    for (label, v) in values {
        out[index_of(items, label)?] = v.clone();
    }
    Ok(out)
}

fn parse_bundle_key(items: &[String], key: &str) -> Result<Bundle> {
    let mut b = Bundle::new();
    for part in key.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if !b.insert(index_of(items, part)?) {
            return Err(Error::DuplicateItem(part.to_string()));
        }
    }
    Ok(b)
}

fn bundle_key(items: &[String], s: &Bundle) -> String {
    crate::model::bundle_label(s, items)
}

impl ValuationSpec {
    fn name(&self) -> Option<&String> {
        match self {
            ValuationSpec::MultiDemand { name, .. }
            | ValuationSpec::UnitDemand { name, .. }
            | ValuationSpec::Table { name, .. } => name.as_ref(),
        }
    }

    /// Resolves labels against `items`. Table entries must cover every bundle.
    pub fn to_valuation(&self, buyer: usize, items: &[String]) -> Result<Valuation> {
        match self {
            ValuationSpec::MultiDemand { k, values, .. } => Ok(Valuation::MultiDemand {
                k: *k,
                values: item_values(items, values)?,
            }),
            ValuationSpec::UnitDemand { values, .. } => Ok(Valuation::UnitDemand {
                values: item_values(items, values)?,
            }),
            ValuationSpec::Table { values, .. } => {
                let m = items.len();
                if m > crate::model::MAX_EXHAUSTIVE_ITEMS {
                    return Err(Error::TooManyItems {
                        what: "table valuation",
                        max: crate::model::MAX_EXHAUSTIVE_ITEMS,
                        got: m,
                    });
                }
                let mut table: Vec<Option<Rat>> = vec![None; 1 << m];
                for (key, v) in values {
                    let mask = parse_bundle_key(items, key)?.mask() as usize;
                    if table[mask].is_some() {
                        return Err(Error::Invalid(format!(
                            "buyer {buyer}: bundle {{{key}}} listed twice"
                        )));
                    }
                    table[mask] = Some(v.clone());
                }
                let values = table
                    .into_iter()
                    .enumerate()
                    .map(|(mask, v)| {
                        v.ok_or_else(|| Error::MissingBundle {
                            buyer,
                            bundle: bundle_key(items, &Bundle::from_mask(mask as u64)),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Valuation::Table { values })
            }
        }
    }

    pub fn from_valuation(v: &Valuation, items: &[String], name: Option<String>) -> Self {
        let map = |values: &[Rat]| -> BTreeMap<String, Rat> {
            items.iter().cloned().zip(values.iter().cloned()).collect()
        };
        match v {
            Valuation::MultiDemand { k, values } => ValuationSpec::MultiDemand {
                name,
                k: *k,
                values: map(values),
            },
            Valuation::UnitDemand { values } => ValuationSpec::UnitDemand {
                name,
                values: map(values),
            },
            Valuation::Table { values } => ValuationSpec::Table {
                name,
                values: values
                    .iter()
                    .enumerate()
                    .map(|(mask, v)| (bundle_key(items, &Bundle::from_mask(mask as u64)), v.clone()))
                    .collect(),
            },
        }
    }
}

impl MarketFile {
    pub fn to_market(&self) -> Result<Market> {
        if self.items.is_empty() {
            return Err(Error::EmptyMarket("items"));
        }
        if self.buyers.is_empty() {
            return Err(Error::EmptyMarket("buyers"));
        }
        let buyers = self
            .buyers
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                Ok(Buyer {
                    name: spec.name().cloned().unwrap_or_else(|| (i + 1).to_string()),
                    valuation: spec.to_valuation(i, &self.items)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Market::new(self.items.clone(), buyers)
    }

    pub fn from_market(m: &Market) -> Self {
        MarketFile {
            items: m.items().to_vec(),
            buyers: m
                .buyers()
                .iter()
                .map(|b| ValuationSpec::from_valuation(&b.valuation, m.items(), Some(b.name.clone())))
                .collect(),
        }
    }
}

impl ValuationFile {
    pub fn to_valuation(&self) -> Result<Valuation> {
        let v = self.valuation.to_valuation(0, &self.items)?;
        // Reuse the market validation for a single buyer.
        Market::from_valuations(self.items.clone(), vec![v.clone()])?;
        Ok(v)
    }
}

pub fn parse_market(text: &str) -> Result<Market> {
    let file: MarketFile =
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("market file: {e}")))?;
    file.to_market()
}

pub fn market_to_json(m: &Market) -> String {
    serde_json::to_string_pretty(&MarketFile::from_market(m)).expect("market serializes")
}

pub fn parse_valuation(text: &str) -> Result<(Vec<String>, Valuation)> {
    let file: ValuationFile =
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("valuation file: {e}")))?;
    let v = file.to_valuation()?;
    Ok((file.items, v))
}

pub fn valuation_to_json(items: &[String], v: &Valuation) -> String {
    let file = ValuationFile {
        items: items.to_vec(),
        valuation: ValuationSpec::from_valuation(v, items, None),
    };
    serde_json::to_string_pretty(&file).expect("valuation serializes")
}

impl PriceFile {
    pub fn from_prices(items: &[String], p: &PriceVector, epsilon: Option<Rat>) -> Self {
        let mut prices = BTreeMap::new();
        let mut unpurchasable = Vec::new();
        for (label, price) in items.iter().zip(p.iter()) {
            match price {
                Price::Finite(r) => {
                    prices.insert(label.clone(), r.clone());
                }
                Price::Unpurchasable => unpurchasable.push(label.clone()),
            }
        }
        PriceFile {
            prices,
            epsilon,
            unpurchasable,
        }
    }

    /// Every item must be either priced or listed as unpurchasable.
    pub fn to_prices(&self, items: &[String]) -> Result<PriceVector> {
        let mut out: Vec<Option<Price>> = vec![None; items.len()];
        for (label, r) in &self.prices {
            out[index_of(items, label)?] = Some(Price::Finite(r.clone()));
        }
        for label in &self.unpurchasable {
            let x = index_of(items, label)?;
            if out[x].is_some() {
                return Err(Error::Invalid(format!("item {label:?} both priced and unpurchasable")));
            }
            out[x] = Some(Price::Unpurchasable);
        }
        let prices = out
            .into_iter()
            .enumerate()
            .map(|(x, p)| p.ok_or_else(|| Error::Invalid(format!("no price for item {:?}", items[x]))))
            .collect::<Result<Vec<_>>>()?;
        PriceVector::new(prices)
    }
}

pub fn parse_prices(text: &str, items: &[String]) -> Result<PriceVector> {
    let file: PriceFile =
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("price file: {e}")))?;
    file.to_prices(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RUNNING: &str = r#"{
      "items": ["a","b","c","d","e"],
      "buyers": [
        {"kind":"multi_demand","k":2,"values":{"a":"1","b":"1","c":"1","d":"1","e":"0"}},
        {"kind":"multi_demand","k":2,"values":{"c":"1","d":"1","e":"1"}},
        {"kind":"unit_demand","values":{"a":"1","b":"1","e":"1"}}
      ]
    }"#;

    #[test]
    fn parses_running_example() {
        let m = parse_market(RUNNING).unwrap();
        assert_eq!(m.num_buyers(), 3);
        assert_eq!(m.num_items(), 5);
        assert_eq!(m.valuation(1).item_values().unwrap()[0], Rat::zero());
    }

    #[test]
    fn round_trips() {
        let m = parse_market(RUNNING).unwrap();
        let back = parse_market(&market_to_json(&m)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn rejects_bad_tables_and_rationals() {
        let unnormalized = r#"{"items":["x"],"buyers":[{"kind":"table","values":{"":"1","x":"2"}}]}"#;
        assert!(matches!(parse_market(unnormalized), Err(Error::NotNormalized { .. })));
        let zero_den = r#"{"items":["x"],"buyers":[{"kind":"unit_demand","values":{"x":"3/0"}}]}"#;
        assert!(parse_market(zero_den).is_err());
        let missing = r#"{"items":["x","y"],"buyers":[{"kind":"table","values":{"":"0","x":"1","y":"1"}}]}"#;
        match parse_market(missing) {
            Err(Error::MissingBundle { bundle, .. }) => assert_eq!(bundle, "x,y"),
            other => panic!("unexpected {other:?}"),
        }
        let negative = r#"{"items":["x"],"buyers":[{"kind":"unit_demand","values":{"x":"-1"}}]}"#;
        assert!(matches!(parse_market(negative), Err(Error::NegativeValue { .. })));
        let unknown = r#"{"items":["x"],"buyers":[{"kind":"unit_demand","values":{"q":"1"}}]}"#;
        assert_eq!(parse_market(unknown), Err(Error::UnknownItem("q".into())));
    }

    #[test]
    fn price_file_round_trip() {
        let items: Vec<String> = ["a", "b", "z"].map(String::from).to_vec();
        let text = r#"{"prices":{"a":"7/6","b":"1/3"},"epsilon":"1/6","unpurchasable":["z"]}"#;
        let p = parse_prices(text, &items).unwrap();
        assert_eq!(p.get(0), &Price::Finite(Rat::new(7, 6)));
        assert_eq!(p.get(2), &Price::Unpurchasable);
        let back = PriceFile::from_prices(&items, &p, Some(Rat::new(1, 6)));
        assert_eq!(back.to_prices(&items).unwrap(), p);
    }
}
