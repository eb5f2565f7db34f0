//! The closed set of media-bias types the classifier searches for.
//!
//! Every bias type has a title-case canonical name used in the UI, a
//! lowercase slug used on the wire, and a short prose definition that is
//! embedded verbatim in the classification prompt. The table is frozen per
//! [`TAXONOMY_VERSION`]; changing any name or definition requires a bump.

use std::fmt;
use std::str::FromStr;

use std::sync::LazyLock;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Version tag embedded in every report and cache key.
pub const TAXONOMY_VERSION: &str = "bias-taxonomy/26-v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown bias type: {0:?}")]
pub struct UnknownBiasType(pub String);

struct Entry {
    name: &'static str,
    definition: &'static str,
}

const ENTRIES: [Entry; 26] = [
    Entry {
        name: "Ad Hominem Bias",
        definition: "The sentence attacks the character, motives or personal traits of a person instead of addressing the substance of their argument or actions.",
    },
    Entry {
        name: "Ambiguous Attribution Bias",
        definition: "The sentence attributes a claim to vague or unnamed sources such as \"experts say\" or \"critics argue\", so the reader cannot judge who is actually behind the claim.",
    },
    Entry {
        name: "Anecdotal Evidence Bias",
        definition: "The sentence relies on an isolated personal story or single example as if it were representative evidence for a general conclusion.",
    },
    Entry {
        name: "Causal Misunderstanding Bias",
        definition: "The sentence presents a correlation, a sequence of events or a coincidence as a cause-and-effect relationship without support.",
    },
    Entry {
        name: "Cherry Picking Bias",
        definition: "The sentence selectively presents facts, figures or quotes that favor one side while omitting readily available information that would change the picture.",
    },
    Entry {
        name: "Circular Reasoning Bias",
        definition: "The sentence uses its own conclusion as a premise, so the argument assumes what it claims to prove.",
    },
    Entry {
        name: "Discriminatory Bias",
        definition: "The sentence portrays people negatively or unequally on the basis of group characteristics such as ethnicity, religion, gender, sexual orientation, age or disability.",
    },
    Entry {
        name: "Emotional Sensationalism Bias",
        definition: "The sentence uses dramatic, exaggerated or emotionally charged language to provoke fear, outrage or excitement rather than to inform.",
    },
    Entry {
        name: "External Validation Bias",
        definition: "The sentence leans on the status, popularity or authority of a person or institution to make a claim appear true instead of presenting evidence for it.",
    },
    Entry {
        name: "False Balance Bias",
        definition: "The sentence presents two positions as equally credible or supported when the evidence clearly favors one of them.",
    },
    Entry {
        name: "False Dichotomy Bias",
        definition: "The sentence frames an issue as having only two possible options or outcomes when more alternatives exist.",
    },
    Entry {
        name: "Faulty Analogy Bias",
        definition: "The sentence compares two things that differ in relevant ways and draws a conclusion from the comparison as if they were alike.",
    },
    Entry {
        name: "Generalization Bias",
        definition: "The sentence draws a broad conclusion about a whole group, place or phenomenon from limited or unrepresentative cases.",
    },
    Entry {
        name: "Insinuative Questioning Bias",
        definition: "The sentence uses a leading or rhetorical question to imply an accusation or conclusion without stating or supporting it.",
    },
    Entry {
        name: "Intergroup Bias",
        definition: "The sentence favors one group as \"us\" and frames another group as \"them\", portraying the in-group positively and the out-group negatively.",
    },
    Entry {
        name: "Mud Praise Bias",
        definition: "The sentence attaches unrelated negative or positive associations to a person or idea so that the connotation, not the facts, shapes the reader's judgement.",
    },
    Entry {
        name: "Opinionated Bias",
        definition: "The sentence states the writer's personal opinion or value judgement as if it were reported fact.",
    },
    Entry {
        name: "Political Bias",
        definition: "The sentence favors or disfavors a political party, ideology or politician through framing, selection or tone rather than neutral description.",
    },
    Entry {
        name: "Projection Bias",
        definition: "The sentence attributes thoughts, feelings or intentions to people or groups without evidence that they actually hold them.",
    },
    Entry {
        name: "Shifting Benchmark Bias",
        definition: "The sentence changes the standard or point of comparison so that an outcome looks better or worse than a consistent benchmark would show.",
    },
    Entry {
        name: "Source Selection Bias",
        definition: "The sentence relies only on sources that support one perspective, excluding credible sources with differing views.",
    },
    Entry {
        name: "Speculation Bias",
        definition: "The sentence presents guesses about possible events, motives or consequences as if they were likely or established.",
    },
    Entry {
        name: "Straw Man Bias",
        definition: "The sentence misrepresents or oversimplifies an opposing position so that it is easier to attack or dismiss.",
    },
    Entry {
        name: "Unsubstantiated Claims Bias",
        definition: "The sentence makes a factual assertion without providing evidence, data or a verifiable source for it.",
    },
    Entry {
        name: "Whataboutism Bias",
        definition: "The sentence deflects criticism by pointing to a different wrongdoing instead of addressing the issue at hand.",
    },
    Entry {
        name: "Word Choice Bias",
        definition: "The sentence uses loaded, pejorative or euphemistic words where neutral wording exists, shaping the reader's perception of the subject.",
    },
];

/// One member of the bias taxonomy. Cheap to copy; identity is the
/// position in the frozen table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BiasType(u8);

impl BiasType {
    pub fn canonical_name(self) -> &'static str {
        ENTRIES[self.0 as usize].name
    }

    pub fn slug(self) -> &'static str {
        SLUGS[self.0 as usize].as_str()
    }

    pub fn definition(self) -> &'static str {
        ENTRIES[self.0 as usize].definition
    }

    /// Position in the taxonomy listing; lower means listed earlier.
    pub fn ordinal(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for BiasType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiasType({})", self.slug())
    }
}

impl fmt::Display for BiasType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.canonical_name())
    }
}

impl FromStr for BiasType {
    type Err = UnknownBiasType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        bias_type_from_name(s)
    }
}

impl Serialize for BiasType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.slug())
    }
}

impl<'de> Deserialize<'de> for BiasType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        bias_type_from_name(&s).map_err(serde::de::Error::custom)
    }
}

impl schemars::JsonSchema for BiasType {
    fn schema_name() -> std::borrow::Cow<'static, str> {
        "BiasType".into()
    }

    fn json_schema(_: &mut schemars::SchemaGenerator) -> schemars::Schema {
        let slugs: Vec<&str> = all_types().iter().map(|t| t.slug()).collect();
        schemars::json_schema!({ "type": "string", "enum": slugs })
    }
}

static SLUGS: LazyLock<Vec<String>> = LazyLock::new(|| {
    ENTRIES
        .iter()
        .map(|e| e.name.to_lowercase().replace(' ', "_"))
        .collect()
});

static ALL: LazyLock<Vec<BiasType>> = LazyLock::new(|| (0..ENTRIES.len() as u8).map(BiasType).collect());

/// Lowercase, fold `_`/`-`/whitespace runs into one space, and drop a
/// trailing "bias" token.
fn match_key(name: &str) -> String {
    let lowered = name.trim().to_lowercase();
    let mut words: Vec<&str> = lowered
        .split(|c: char| c == '_' || c == '-' || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .collect();
    if words.len() > 1 && words.last() == Some(&"bias") {
        words.pop();
    }
    words.join(" ")
}

static KEYS: LazyLock<Vec<String>> = LazyLock::new(|| ENTRIES.iter().map(|e| match_key(e.name)).collect());

/// Resolve a model- or user-supplied name to a taxonomy member.
///
/// Matching ignores case, treats `_`, `-` and spaces alike and accepts the
/// name with or without its trailing "Bias".
pub fn bias_type_from_name(name: &str) -> Result<BiasType, UnknownBiasType> {
    let key = match_key(name);
    KEYS.iter()
        .position(|k| *k == key)
        .map(|i| BiasType(i as u8))
        .ok_or_else(|| UnknownBiasType(name.to_string()))
}

/// The full taxonomy in listing order.
pub fn all_types() -> &'static [BiasType] {
    &ALL
}

pub fn definition_of(t: BiasType) -> &'static str {
    t.definition()
}

/// Serializable view of one taxonomy entry, as published by the service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyEntry {
    pub slug: String,
    pub canonical_name: String,
    pub definition: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyDocument {
    pub taxonomy_version: String,
    pub entries: Vec<TaxonomyEntry>,
}

pub fn taxonomy_document() -> TaxonomyDocument {
    TaxonomyDocument {
        taxonomy_version: TAXONOMY_VERSION.to_string(),
        entries: all_types()
            .iter()
            .map(|t| TaxonomyEntry {
                slug: t.slug().to_string(),
                canonical_name: t.canonical_name().to_string(),
                definition: t.definition().to_string(),
            })
            .collect(),
    }
}
