//! Control-electrode co-wiring: signal budget against package I/O and
//! simultaneous-use conflicts between regions that share a signal.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Electrode {
    pub id: String,
    pub region: String,
}

/// One voltage signal and the electrodes tied to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalGroup {
    pub signal: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WiringMap {
    pub electrodes: Vec<Electrode>,
    pub groups: Vec<SignalGroup>,
    pub io_budget: usize,
}

impl WiringMap {
    pub fn new(electrodes: Vec<Electrode>, groups: Vec<SignalGroup>, io_budget: usize) -> Result<Self> {
        let map = Self {
            electrodes,
            groups,
            io_budget,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        if self.io_budget == 0 {
            return Err(Error::validation("io_budget", "must be > 0"));
        }
        let mut owner: HashMap<&str, Option<&str>> = HashMap::new();
        for e in &self.electrodes {
            if owner.insert(e.id.as_str(), None).is_some() {
                return Err(Error::validation(
                    "electrodes",
                    format!("duplicate electrode id `{}`", e.id),
                ));
            }
        }
        let mut signals = BTreeSet::new();
        for g in &self.groups {
            if !signals.insert(g.signal.as_str()) {
                return Err(Error::validation(
                    "groups",
                    format!("duplicate signal id `{}`", g.signal),
                ));
            }
            for m in &g.members {
                match owner.get_mut(m.as_str()) {
                    None => {
                        return Err(Error::validation(
                            format!("groups.{}", g.signal),
                            format!("unknown electrode `{m}`"),
                        ))
                    }
                    Some(Some(other)) => {
                        return Err(Error::validation(
                            format!("groups.{}", g.signal),
                            format!("electrode `{m}` is already wired to `{other}`"),
                        ))
                    }
                    Some(slot) => *slot = Some(g.signal.as_str()),
                }
            }
        }
        if let Some(e) = self
            .electrodes
            .iter()
            .find(|e| owner[e.id.as_str()].is_none())
        {
            return Err(Error::validation(
                "electrodes",
                format!("electrode `{}` belongs to no signal group", e.id),
            ));
        }
        Ok(())
    }

    pub fn regions(&self) -> BTreeSet<&str> {
        self.electrodes.iter().map(|e| e.region.as_str()).collect()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: WiringFile = toml::from_str(text).map_err(|e| Error::parse("wiring config", e))?;
        file.into_map()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

pub fn signal_count(map: &WiringMap) -> usize {
    map.groups.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BudgetCheck {
    pub pass: bool,
    pub signals: usize,
    pub io_budget: usize,
    /// io_budget − signals; negative when over budget.
    pub margin: i64,
}

pub fn check_budget(map: &WiringMap) -> BudgetCheck {
    let signals = signal_count(map);
    BudgetCheck {
        pass: signals <= map.io_budget,
        signals,
        io_budget: map.io_budget,
        margin: map.io_budget as i64 - signals as i64,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Conflict {
    pub signal: String,
    /// Active regions the signal reaches, sorted.
    pub regions: Vec<String>,
}

/// Every group whose members span two or more of the active regions, in
/// group order.
pub fn conflict_regions<S: AsRef<str>>(map: &WiringMap, active_regions: &[S]) -> Result<Vec<Conflict>> {
    let known = map.regions();
    let mut active = BTreeSet::new();
    for r in active_regions {
        let r = r.as_ref();
        if !known.contains(r) {
            return Err(Error::validation(
                "active_regions",
                format!("unknown region tag `{r}`"),
            ));
        }
        active.insert(r);
    }
    let region_of: HashMap<&str, &str> = map
        .electrodes
        .iter()
        .map(|e| (e.id.as_str(), e.region.as_str()))
        .collect();
    Ok(map
        .groups
        .iter()
        .filter_map(|g| {
            let hit: BTreeSet<&str> = g
                .members
                .iter()
                .map(|m| region_of[m.as_str()])
                .filter(|r| active.contains(r))
                .collect();
            (hit.len() >= 2).then(|| Conflict {
                signal: g.signal.clone(),
                regions: hit.into_iter().map(str::to_string).collect(),
            })
        })
        .collect())
}

pub const BUNDLED_WIRING: &[(&str, &str)] = &[(
    "enchilada_wiring",
    include_str!("../configs/enchilada_wiring.toml"),
)];

pub fn bundled_wiring(name: &str) -> Option<WiringMap> {
    BUNDLED_WIRING
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| WiringMap::from_toml_str(t).expect("bundled wiring is valid"))
}

// ---- file schema ----

/// A bank is a set of `signals` signals, each driving `members_per_region`
/// electrodes in every listed region.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BankFile {
    name: String,
    signals: usize,
    regions: Vec<String>,
    #[serde(default = "one")]
    members_per_region: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    signal: String,
    members: Vec<Electrode>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WiringFile {
    #[allow(dead_code)]
    name: String,
    io_budget: usize,
    #[serde(default)]
    banks: Vec<BankFile>,
    #[serde(default)]
    groups: Vec<GroupFile>,
}

impl WiringFile {
    fn into_map(self) -> Result<WiringMap> {
        let mut electrodes = Vec::new();
        let mut groups = Vec::new();
        for bank in self.banks {
            if bank.regions.is_empty() || bank.members_per_region == 0 {
                return Err(Error::validation(
                    format!("banks.{}", bank.name),
                    "needs at least one region and one member per region",
                ));
            }
            let width = bank.signals.to_string().len();
            for s in 1..=bank.signals {
                let signal = format!("{}_{:0width$}", bank.name, s);
                let mut members = Vec::new();
                for region in &bank.regions {
                    for k in 1..=bank.members_per_region {
                        let id = if bank.members_per_region == 1 {
                            format!("{signal}@{region}")
                        } else {
                            format!("{signal}@{region}#{k}")
                        };
                        electrodes.push(Electrode {
                            id: id.clone(),
                            region: region.clone(),
                        });
                        members.push(id);
                    }
                }
                groups.push(SignalGroup { signal, members });
            }
        }
        for g in self.groups {
            let members = g.members.iter().map(|e| e.id.clone()).collect();
            electrodes.extend(g.members);
            groups.push(SignalGroup {
                signal: g.signal,
                members,
            });
        }
        WiringMap::new(electrodes, groups, self.io_budget)
    }
}
