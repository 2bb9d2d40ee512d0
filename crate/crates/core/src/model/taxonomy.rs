//! CRED-style crisis type hierarchy.
//!
//! The tree is rooted at `Crisis`, splits into `Natural` and `ManMade`, then
//! into the disaster subgroups, disaster types and subtypes. Node ids are
//! PascalCase and double as IRI local names; labels are the human spelling.
//!
//! The leaf inventory is a superset of every type named in the source
//! classification plus the EM-DAT types needed by the France corpus. It is
//! illustrative, not exhaustive: unknown subtypes truncate to their type.

use std::collections::HashMap;

use super::ModelError;

/// One class in the crisis type hierarchy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonomyNode {
    pub id: String,
    pub label: String,
    pub parent: Option<String>,
    pub depth: usize,
    /// Marks the EM-DAT "disaster type" level used for per-type counts.
    pub disaster_type: bool,
    /// Extra spellings accepted by [`Taxonomy::classify`].
    pub aliases: Vec<String>,
}

/// Result of mapping ingestion labels onto the taxonomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    /// Root-to-node path of node ids.
    pub path: Vec<String>,
    /// Set when the subtype label was unknown and the path was truncated.
    pub warning: Option<String>,
}

// (id, label, parent, disaster_type, aliases)
type Row = (&'static str, &'static str, Option<&'static str>, bool, &'static [&'static str]);

const NODES: &[Row] = &[
    ("Crisis", "Crisis", None, false, &["Disaster"]),
    ("Natural", "Natural", Some("Crisis"), false, &[]),
    ("ManMade", "Man-made", Some("Crisis"), false, &["Technological"]),
    // natural subgroups
    ("Extraterrestrial", "Extraterrestrial", Some("Natural"), false, &[]),
    ("Climatological", "Climatological", Some("Natural"), false, &[]),
    ("Biological", "Biological", Some("Natural"), false, &[]),
    ("Geographical", "Geographical", Some("Natural"), false, &["Geophysical"]),
    ("Hydrological", "Hydrological", Some("Natural"), false, &[]),
    ("Meteorological", "Meteorological", Some("Natural"), false, &[]),
    // man-made subgroups (also EM-DAT disaster types)
    ("IndustrialAccident", "Industrial Accident", Some("ManMade"), true, &[]),
    ("MiscellaneousAccident", "Miscellaneous Accident", Some("ManMade"), true, &[]),
    ("TransportAccident", "Transport Accident", Some("ManMade"), true, &[]),
    // extraterrestrial
    ("Impact", "Impact", Some("Extraterrestrial"), true, &[]),
    ("SpaceWeather", "Space Weather", Some("Extraterrestrial"), true, &[]),
    // climatological
    ("Drought", "Drought", Some("Climatological"), true, &[]),
    ("Wildfire", "Wildfire", Some("Climatological"), true, &[]),
    ("ForestFire", "Forest Fire", Some("Wildfire"), false, &[]),
    ("LandFire", "Land Fire", Some("Wildfire"), false, &["Land fire (Brush, Bush, Pasture)"]),
    ("GlacialLakeOutburst", "Glacial Lake Outburst", Some("Climatological"), true, &[]),
    // biological
    ("Epidemic", "Epidemic", Some("Biological"), true, &[]),
    ("BacterialDisease", "Bacterial Disease", Some("Epidemic"), false, &[]),
    ("ViralDisease", "Viral Disease", Some("Epidemic"), false, &[]),
    ("ParasiticDisease", "Parasitic Disease", Some("Epidemic"), false, &[]),
    ("InsectInfestation", "Insect Infestation", Some("Biological"), true, &[]),
    ("AnimalIncident", "Animal Incident", Some("Biological"), true, &["Animal accident"]),
    // geographical
    ("Earthquake", "Earthquake", Some("Geographical"), true, &[]),
    ("GroundMovement", "Ground Movement", Some("Earthquake"), false, &[]),
    ("Tsunami", "Tsunami", Some("Earthquake"), false, &[]),
    ("MassMovement", "Mass Movement", Some("Geographical"), true, &["Mass movement (dry)"]),
    ("Rockfall", "Rockfall", Some("MassMovement"), false, &[]),
    ("Subsidence", "Subsidence", Some("MassMovement"), false, &[]),
    ("Landslide", "Landslide", Some("Geographical"), true, &["Mass movement (wet)"]),
    ("Mudslide", "Mudslide", Some("Landslide"), false, &[]),
    ("Avalanche", "Avalanche", Some("Landslide"), false, &[]),
    ("VolcanicActivity", "Volcanic Activity", Some("Geographical"), true, &["Volcanic eruption"]),
    ("AshFall", "Ash Fall", Some("VolcanicActivity"), false, &[]),
    ("LavaFlow", "Lava Flow", Some("VolcanicActivity"), false, &[]),
    // hydrological
    ("Flood", "Flood", Some("Hydrological"), true, &[]),
    ("RiverineFlood", "Riverine Flood", Some("Flood"), false, &[]),
    ("FlashFlood", "Flash Flood", Some("Flood"), false, &[]),
    ("CoastalFlood", "Coastal Flood", Some("Flood"), false, &[]),
    ("WaveAction", "Wave Action", Some("Hydrological"), true, &[]),
    ("RogueWave", "Rogue Wave", Some("WaveAction"), false, &[]),
    ("Seiche", "Seiche", Some("WaveAction"), false, &[]),
    // meteorological
    ("ExtremeTemperature", "Extreme Temperature", Some("Meteorological"), true, &[]),
    ("HeatWave", "Heat Wave", Some("ExtremeTemperature"), false, &[]),
    ("ColdWave", "Cold Wave", Some("ExtremeTemperature"), false, &[]),
    (
        "SevereWinterConditions",
        "Severe Winter Conditions",
        Some("ExtremeTemperature"),
        false,
        &[],
    ),
    ("Fog", "Fog", Some("Meteorological"), true, &[]),
    ("Storm", "Storm", Some("Meteorological"), true, &[]),
    ("ConvectiveStorm", "Convective Storm", Some("Storm"), false, &[]),
    ("ExtratropicalStorm", "Extratropical Storm", Some("Storm"), false, &[]),
    ("TropicalCyclone", "Tropical Cyclone", Some("Storm"), false, &[]),
    // industrial accident
    ("Explosion", "Explosion", Some("IndustrialAccident"), false, &[]),
    ("GasLeak", "Gas Leak", Some("IndustrialAccident"), false, &[]),
    ("Collapse", "Collapse", Some("IndustrialAccident"), false, &[]),
    ("OilSpill", "Oil Spill", Some("IndustrialAccident"), false, &[]),
    ("ChemicalSpill", "Chemical Spill", Some("IndustrialAccident"), false, &[]),
    ("IndustrialFire", "Industrial Fire", Some("IndustrialAccident"), false, &["Fire"]),
    ("Poisoning", "Poisoning", Some("IndustrialAccident"), false, &[]),
    ("Radiation", "Radiation", Some("IndustrialAccident"), false, &[]),
    // miscellaneous accident
    ("BuildingCollapse", "Building Collapse", Some("MiscellaneousAccident"), false, &["Collapse"]),
    (
        "MiscellaneousExplosion",
        "Miscellaneous Explosion",
        Some("MiscellaneousAccident"),
        false,
        &["Explosion"],
    ),
    ("MiscellaneousFire", "Miscellaneous Fire", Some("MiscellaneousAccident"), false, &["Fire"]),
    ("CrowdCrush", "Crowd Crush", Some("MiscellaneousAccident"), false, &[]),
    // transport accident
    ("AirAccident", "Air Accident", Some("TransportAccident"), false, &["Air"]),
    ("RoadAccident", "Road Accident", Some("TransportAccident"), false, &["Road"]),
    ("RailAccident", "Rail Accident", Some("TransportAccident"), false, &["Rail"]),
    ("WaterAccident", "Water Accident", Some("TransportAccident"), false, &["Water"]),
];

/// Lowercased alphanumeric characters only; the matching key for labels.
pub(crate) fn match_key(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// The crisis type tree. Immutable once built.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    nodes: Vec<TaxonomyNode>,
    by_id: HashMap<String, usize>,
    by_label: HashMap<String, usize>,
    children: Vec<Vec<usize>>,
}

impl Taxonomy {
    /// Builds the full CRED-derived hierarchy.
    pub fn build() -> Self {
        let mut nodes: Vec<TaxonomyNode> = Vec::with_capacity(NODES.len());
        let mut by_id: HashMap<String, usize> = HashMap::new();
        let mut children = vec![Vec::<usize>::new(); NODES.len()];
        for (idx, &(id, label, parent, disaster_type, aliases)) in NODES.iter().enumerate() {
            let depth = match parent {
                None => 0,
                Some(p) => {
                    let pidx = by_id[p];
                    children[pidx].push(idx);
                    nodes[pidx].depth + 1
                }
            };
            by_id.insert(id.to_string(), idx);
            nodes.push(TaxonomyNode {
                id: id.to_string(),
                label: label.to_string(),
                parent: parent.map(str::to_string),
                depth,
                disaster_type,
                aliases: aliases.iter().map(|a| a.to_string()).collect(),
            });
        }
        let by_label = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.label.clone(), i))
            .collect();
        Taxonomy {
            nodes,
            by_id,
            by_label,
            children,
        }
    }

    pub fn root(&self) -> &TaxonomyNode {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in declaration order (parents always precede children).
    pub fn iter(&self) -> impl Iterator<Item = &TaxonomyNode> {
        self.nodes.iter()
    }

    pub fn node(&self, id: &str) -> Option<&TaxonomyNode> {
        self.by_id.get(id).map(|&i| &self.nodes[i])
    }

    /// Exact label lookup, as used for type-triple objects.
    pub fn by_label(&self, label: &str) -> Option<&TaxonomyNode> {
        self.by_label.get(label).map(|&i| &self.nodes[i])
    }

    pub fn children(&self, id: &str) -> Vec<&TaxonomyNode> {
        match self.by_id.get(id) {
            Some(&i) => self.children[i].iter().map(|&c| &self.nodes[c]).collect(),
            None => Vec::new(),
        }
    }

    pub fn depth(&self, id: &str) -> Option<usize> {
        self.node(id).map(|n| n.depth)
    }

    /// Root-to-node path of ids.
    pub fn path(&self, id: &str) -> Option<Vec<String>> {
        let mut cur = self.node(id)?;
        let mut path = vec![cur.id.clone()];
        while let Some(p) = &cur.parent {
            cur = self.node(p)?;
            path.push(cur.id.clone());
        }
        path.reverse();
        Some(path)
    }

    /// True when `path` is exactly the root-to-node path of its last element.
    pub fn is_valid_path(&self, path: &[String]) -> bool {
        match path.last() {
            Some(last) => self.path(last).as_deref() == Some(path),
            None => false,
        }
    }

    pub fn is_ancestor_or_self(&self, ancestor: &str, id: &str) -> bool {
        let mut cur = self.node(id);
        while let Some(n) = cur {
            if n.id == ancestor {
                return true;
            }
            cur = n.parent.as_deref().and_then(|p| self.node(p));
        }
        false
    }

    /// The EM-DAT disaster type on a path, falling back to its deepest node.
    pub fn type_node_of<'a>(&'a self, path: &[String]) -> Option<&'a TaxonomyNode> {
        path.iter()
            .filter_map(|id| self.node(id))
            .find(|n| n.disaster_type)
            .or_else(|| path.last().and_then(|id| self.node(id)))
    }

    fn subtree(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![idx];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.children[out[i]].iter().copied());
            i += 1;
        }
        out
    }

    /// Finds the node in `candidates` matching `label`. Id and label matches
    /// win over alias matches; a tie inside either tier is ambiguous.
    fn find(&self, candidates: &[usize], label: &str) -> Result<Option<usize>, ModelError> {
        let key = match_key(label);
        if key.is_empty() {
            return Ok(None);
        }
        let primary: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&i| match_key(&self.nodes[i].id) == key || match_key(&self.nodes[i].label) == key)
            .collect();
        let hits = if primary.is_empty() {
            candidates
                .iter()
                .copied()
                .filter(|&i| self.nodes[i].aliases.iter().any(|a| match_key(a) == key))
                .collect()
        } else {
            primary
        };
        match hits.len() {
            0 => Ok(None),
            1 => Ok(Some(hits[0])),
            _ => Err(ModelError::AmbiguousType(label.to_string())),
        }
    }

    /// Maps an ingestion type label (and optional subtype label) to the
    /// path of the deepest matching node. Matching ignores case and
    /// punctuation. An unknown subtype truncates to the type node.
    pub fn classify(
        &self,
        type_label: &str,
        subtype_label: Option<&str>,
    ) -> Result<Classification, ModelError> {
        let all: Vec<usize> = (0..self.nodes.len()).collect();
        let type_idx = self
            .find(&all, type_label)?
            .ok_or_else(|| ModelError::UnknownType(type_label.to_string()))?;
        let mut target = type_idx;
        let mut warning = None;
        if let Some(sub) = subtype_label.filter(|s| !match_key(s).is_empty()) {
            let below = self.subtree(type_idx);
            match self.find(&below, sub)? {
                Some(i) => target = i,
                None => {
                    warning = Some(format!(
                        "unknown subtype {sub:?} under {}; classified as the type",
                        self.nodes[type_idx].id
                    ))
                }
            }
        }
        let path = self
            .path(&self.nodes[target].id)
            .expect("taxonomy nodes always have a path");
        Ok(Classification { path, warning })
    }
}

impl Default for Taxonomy {
    fn default() -> Self {
        Taxonomy::build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn ids(nodes: Vec<&TaxonomyNode>) -> HashSet<&str> {
        nodes.into_iter().map(|n| n.id.as_str()).collect()
    }

    #[test]
    fn branching_matches_cred() {
        let t = Taxonomy::build();
        assert_eq!(ids(t.children("Crisis")), HashSet::from(["Natural", "ManMade"]));
        assert_eq!(
            ids(t.children("Natural")),
            HashSet::from([
                "Extraterrestrial",
                "Climatological",
                "Biological",
                "Geographical",
                "Hydrological",
                "Meteorological"
            ])
        );
        assert_eq!(
            ids(t.children("ManMade")),
            HashSet::from(["IndustrialAccident", "MiscellaneousAccident", "TransportAccident"])
        );
        assert_eq!(t.depth("Crisis"), Some(0));
    }

    #[test]
    fn rooted_tree_invariants() {
        let t = Taxonomy::build();
        let roots: Vec<_> = t.iter().filter(|n| n.parent.is_none()).collect();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].id, "Crisis");
        let mut seen_ids = HashSet::new();
        let mut seen_labels = HashSet::new();
        for n in t.iter() {
            assert!(seen_ids.insert(n.id.clone()), "duplicate id {}", n.id);
            assert!(seen_labels.insert(n.label.clone()), "duplicate label {}", n.label);
            if let Some(p) = &n.parent {
                assert_eq!(n.depth, t.node(p).unwrap().depth + 1);
            }
            // acyclic: walking up terminates at the root within len steps
            let path = t.path(&n.id).unwrap();
            assert_eq!(path.len(), n.depth + 1);
            assert_eq!(path[0], "Crisis");
        }
    }

    #[test]
    fn named_leaves_present() {
        let t = Taxonomy::build();
        for (leaf, parent) in [
            ("ExtremeTemperature", "Meteorological"),
            ("Fog", "Meteorological"),
            ("Storm", "Meteorological"),
            ("Earthquake", "Geographical"),
            ("MassMovement", "Geographical"),
            ("VolcanicActivity", "Geographical"),
            ("Explosion", "IndustrialAccident"),
            ("GasLeak", "IndustrialAccident"),
            ("Collapse", "IndustrialAccident"),
            ("OilSpill", "IndustrialAccident"),
            ("Flood", "Hydrological"),
            ("RiverineFlood", "Flood"),
        ] {
            assert_eq!(t.node(leaf).unwrap().parent.as_deref(), Some(parent), "{leaf}");
        }
    }

    #[test]
    fn classify_examples() {
        let t = Taxonomy::build();
        let c = t.classify("Flood", Some("Riverine flood")).unwrap();
        assert_eq!(
            c.path,
            ["Crisis", "Natural", "Hydrological", "Flood", "RiverineFlood"]
        );
        assert!(c.warning.is_none());
        let c = t.classify("Storm", None).unwrap();
        assert_eq!(c.path, ["Crisis", "Natural", "Meteorological", "Storm"]);
        assert!(matches!(
            t.classify("Plague of frogs", None),
            Err(ModelError::UnknownType(_))
        ));
    }

    #[test]
    fn classify_is_case_and_punctuation_insensitive() {
        let t = Taxonomy::build();
        let a = t.classify("EXTREME-temperature", Some("heat wave")).unwrap();
        assert_eq!(a.path.last().unwrap(), "HeatWave");
        let b = t.classify("Mass movement (dry)", None).unwrap();
        assert_eq!(b.path.last().unwrap(), "MassMovement");
    }

    #[test]
    fn unknown_subtype_truncates_with_warning() {
        let t = Taxonomy::build();
        let c = t.classify("Flood", Some("Ice jam flood")).unwrap();
        assert_eq!(c.path.last().unwrap(), "Flood");
        assert!(c.warning.is_some());
    }

    #[test]
    fn subtype_aliases_resolve_within_type() {
        let t = Taxonomy::build();
        let c = t.classify("Miscellaneous accident", Some("Fire")).unwrap();
        assert_eq!(c.path.last().unwrap(), "MiscellaneousFire");
        let c = t.classify("Industrial accident", Some("Fire")).unwrap();
        assert_eq!(c.path.last().unwrap(), "IndustrialFire");
        // globally, "Fire" is ambiguous between the two alias holders
        assert!(matches!(t.classify("Fire", None), Err(ModelError::AmbiguousType(_))));
    }

    #[test]
    fn classify_is_idempotent_on_labels_and_ids() {
        let t = Taxonomy::build();
        for n in t.iter() {
            assert_eq!(t.classify(&n.label, None).unwrap().path.last(), Some(&n.id));
            assert_eq!(t.classify(&n.id, None).unwrap().path.last(), Some(&n.id));
        }
    }

    #[test]
    fn type_node_lookup() {
        let t = Taxonomy::build();
        let p = t.path("RiverineFlood").unwrap();
        assert_eq!(t.type_node_of(&p).unwrap().id, "Flood");
        let p = t.path("GasLeak").unwrap();
        assert_eq!(t.type_node_of(&p).unwrap().id, "IndustrialAccident");
        let p = t.path("Hydrological").unwrap();
        assert_eq!(t.type_node_of(&p).unwrap().id, "Hydrological");
    }
}
