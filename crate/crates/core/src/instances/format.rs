//! JSON instance documents.
//!
//! One document per instance:
//!
//! ```json
//! {"kind": "flpm",
//!  "facilities": [{"id": 0, "f": 2.0}],
//!  "clients": [{"id": 0, "p": "inf", "m": 1.0}],
//!  "dist": [[1.0]]}
//! ```
//!
//! `dist` is row-major with one row per client and one column per facility.
//! NCC clients carry `"g"` (a breakpoint list `[[x, y], ...]` starting at
//! `x = 0`). SIRPFL clients carry `"demands"` (`T` numbers, day 1 first) and
//! `"holding"` (ragged rows: row `s` lists `h_{s,s} .. h_{s,T}`); the document
//! also has `"T"`, `"U"` (number or `"inf"`) and `"splittable"`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{
    ConcaveFn, Facility, FlpmClient, FlpmInstance, Instance, InstanceError, Kind, NccClient,
    NccInstance, SirpflClient, SirpflInstance,
};

/// A number that may also be the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Extended(f64);

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Extended(x)),
            Raw::Str(s) if s == "inf" => Ok(Extended(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FacilityDoc {
    id: u32,
    f: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClientDoc {
    id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Extended>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    demands: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    holding: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    kind: Kind,
    facilities: Vec<FacilityDoc>,
    clients: Vec<ClientDoc>,
    dist: Vec<Vec<f64>>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    horizon: Option<usize>,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    capacity: Option<Extended>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    splittable: Option<bool>,
}

/// Parses and validates a JSON instance document of the requested kind.
pub fn parse_instance(text: &[u8], kind: Kind) -> Result<Instance, InstanceError> {
    let doc: Document = serde_json::from_slice(text)?;
    if doc.kind != kind {
        return Err(InstanceError::KindMismatch {
            expected: kind,
            found: doc.kind,
        });
    }
    let facilities: Vec<Facility> = doc
        .facilities
        .iter()
        .map(|f| Facility {
            id: f.id,
            opening_cost: f.f,
        })
        .collect();
    let instance = match kind {
        Kind::Flpm => Instance::Flpm(FlpmInstance {
            facilities,
            clients: doc
                .clients
                .iter()
                .map(|c| FlpmClient {
                    id: c.id,
                    penalty: c.p.map_or(f64::INFINITY, |p| p.0),
                    multiplicity: c.m.unwrap_or(1.0),
                })
                .collect(),
            dist: doc.dist,
        }),
        Kind::Ncc => {
            let mut clients = Vec::with_capacity(doc.clients.len());
            for (j, c) in doc.clients.into_iter().enumerate() {
                let points = c.g.ok_or_else(|| {
                    InstanceError::invalid(format!("clients[{j}].g"), "missing breakpoint list")
                })?;
                let g = ConcaveFn::new(points).map_err(|e| match e {
                    InstanceError::Invalid { reason, .. } => {
                        InstanceError::invalid(format!("clients[{j}].g"), reason)
                    }
                    other => other,
                })?;
                clients.push(NccClient { id: c.id, g });
            }
            Instance::Ncc(NccInstance {
                facilities,
                clients,
                dist: doc.dist,
            })
        }
        Kind::Sirpfl => {
            let horizon = doc
                .horizon
                .ok_or_else(|| InstanceError::invalid("T", "missing time horizon"))?;
            let mut clients = Vec::with_capacity(doc.clients.len());
            for (j, c) in doc.clients.into_iter().enumerate() {
                let demands = c.demands.ok_or_else(|| {
                    InstanceError::invalid(format!("clients[{j}].demands"), "missing demands")
                })?;
                let ragged = c.holding.ok_or_else(|| {
                    InstanceError::invalid(format!("clients[{j}].holding"), "missing holding costs")
                })?;
                if ragged.len() != horizon
                    || ragged.iter().enumerate().any(|(s, row)| row.len() != horizon - s)
                {
                    return Err(InstanceError::invalid(
                        format!("clients[{j}].holding"),
                        format!("expected {horizon} rows with row s holding T - s entries"),
                    ));
                }
                let mut holding = vec![vec![0.0; horizon]; horizon];
                for (s, row) in ragged.into_iter().enumerate() {
                    for (k, h) in row.into_iter().enumerate() {
                        holding[s][s + k] = h;
                    }
                }
                clients.push(SirpflClient {
                    id: c.id,
                    demands,
                    holding,
                });
            }
            Instance::Sirpfl(SirpflInstance {
                facilities,
                clients,
                dist: doc.dist,
                horizon,
                capacity: doc.capacity.map_or(f64::INFINITY, |u| u.0),
                splittable: doc.splittable.unwrap_or(true),
            })
        }
    };
    instance.validate()?;
    Ok(instance)
}

/// Writes the normalized document: every optional field is spelled out.
pub fn serialize_instance(instance: &Instance) -> String {
    fn facility_docs(facilities: &[Facility]) -> Vec<FacilityDoc> {
        facilities
            .iter()
            .map(|f| FacilityDoc {
                id: f.id,
                f: f.opening_cost,
            })
            .collect()
    }
    fn bare(id: u32) -> ClientDoc {
        ClientDoc {
            id,
            p: None,
            m: None,
            g: None,
            demands: None,
            holding: None,
        }
    }
    let doc = match instance {
        Instance::Flpm(inst) => Document {
            kind: Kind::Flpm,
            facilities: facility_docs(&inst.facilities),
            clients: inst
                .clients
                .iter()
                .map(|c| ClientDoc {
                    p: Some(Extended(c.penalty)),
                    m: Some(c.multiplicity),
                    ..bare(c.id)
                })
                .collect(),
            dist: inst.dist.clone(),
            horizon: None,
            capacity: None,
            splittable: None,
        },
        Instance::Ncc(inst) => Document {
            kind: Kind::Ncc,
            facilities: facility_docs(&inst.facilities),
            clients: inst
                .clients
                .iter()
                .map(|c| ClientDoc {
                    g: Some(c.g.breakpoints().to_vec()),
                    ..bare(c.id)
                })
                .collect(),
            dist: inst.dist.clone(),
            horizon: None,
            capacity: None,
            splittable: None,
        },
        Instance::Sirpfl(inst) => Document {
            kind: Kind::Sirpfl,
            facilities: facility_docs(&inst.facilities),
            clients: inst
                .clients
                .iter()
                .map(|c| ClientDoc {
                    demands: Some(c.demands.clone()),
                    holding: Some(
                        c.holding
                            .iter()
                            .enumerate()
                            .map(|(s, row)| row[s..].to_vec())
                            .collect(),
                    ),
                    ..bare(c.id)
                })
                .collect(),
            dist: inst.dist.clone(),
            horizon: Some(inst.horizon),
            capacity: Some(Extended(inst.capacity)),
            splittable: Some(inst.splittable),
        },
    };
    serde_json::to_string(&doc).expect("instance documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"kind":"flpm","facilities":[{"id":0,"f":1.5}],
        "clients":[{"id":7}],"dist":[[2.0]]}"#;

    #[test]
    fn parses_minimal_flpm() {
        let inst = parse_instance(MINIMAL.as_bytes(), Kind::Flpm).unwrap();
        let Instance::Flpm(inst) = inst else { panic!() };
        assert_eq!(inst.facilities[0].opening_cost, 1.5);
        assert_eq!(inst.clients[0].penalty, f64::INFINITY);
        assert_eq!(inst.clients[0].multiplicity, 1.0);
    }

    #[test]
    fn negative_opening_cost_names_field() {
        let text = MINIMAL.replace("1.5", "-1.0");
        let err = parse_instance(text.as_bytes(), Kind::Flpm).unwrap_err();
        assert!(err.to_string().contains("opening_cost"), "{err}");
    }

    #[test]
    fn inf_sentinel_round_trips() {
        let text = r#"{"kind":"flpm","facilities":[{"id":0,"f":1}],
            "clients":[{"id":0,"p":"inf","m":2},{"id":1,"p":0.5}],"dist":[[1],[2]]}"#;
        let inst = parse_instance(text.as_bytes(), Kind::Flpm).unwrap();
        let out = serialize_instance(&inst);
        assert!(out.contains(r#""p":"inf""#));
        assert_eq!(parse_instance(out.as_bytes(), Kind::Flpm).unwrap(), inst);
    }

    #[test]
    fn rejects_bad_sentinel_and_kind_mismatch() {
        let text = MINIMAL.replace(r#"{"id":7}"#, r#"{"id":7,"p":"infinity"}"#);
        assert!(matches!(
            parse_instance(text.as_bytes(), Kind::Flpm),
            Err(InstanceError::Syntax(_))
        ));
        assert!(matches!(
            parse_instance(MINIMAL.as_bytes(), Kind::Ncc),
            Err(InstanceError::KindMismatch { .. })
        ));
        assert!(matches!(
            parse_instance(b"{not json", Kind::Flpm),
            Err(InstanceError::Syntax(_))
        ));
    }

    #[test]
    fn sirpfl_ragged_holding() {
        let text = r#"{"kind":"sirpfl","facilities":[{"id":0,"f":1}],
            "clients":[{"id":0,"demands":[1,0,2],"holding":[[0,1,2],[0,1],[0]]}],
            "dist":[[1.0]],"T":3,"U":"inf","splittable":false}"#;
        let Instance::Sirpfl(inst) = parse_instance(text.as_bytes(), Kind::Sirpfl).unwrap() else {
            panic!()
        };
        assert_eq!(inst.clients[0].holding[0][2], 2.0);
        assert_eq!(inst.clients[0].holding[1][2], 1.0);
        assert!(inst.capacity.is_infinite());

        let short = text.replace("[[0,1,2],[0,1],[0]]", "[[0,1,2],[0,1]]");
        let err = parse_instance(short.as_bytes(), Kind::Sirpfl).unwrap_err();
        assert!(err.to_string().contains("holding"));
    }

    #[test]
    fn ncc_requires_concave_g() {
        let text = r#"{"kind":"ncc","facilities":[{"id":0,"f":1}],
            "clients":[{"id":0,"g":[[0,0],[1,1],[2,3]]}],"dist":[[1.0]]}"#;
        let err = parse_instance(text.as_bytes(), Kind::Ncc).unwrap_err();
        assert!(err.to_string().contains("clients[0].g"), "{err}");
    }
}
