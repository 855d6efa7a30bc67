use serde::{Deserialize, Serialize};

use super::{Space, TreeParams};
use crate::error::Result;

fn unit() -> f64 {
    1.0
}

/// JSON description of a space, tagged by `kind`.
///
/// ```json
/// {"kind": "open_book", "pages": 3}
/// {"kind": "tree", "vertices": [0, 1, 2], "edges": [[0, 1, 1.0], [0, 2, 0.5]], "root": 0}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceDescriptor {
    Euclidean {
        dim: usize,
    },
    Tree {
        vertices: Vec<u64>,
        edges: Vec<(u64, u64, f64)>,
        root: u64,
    },
    OpenBook {
        pages: usize,
    },
    /// `legs` legs of equal length.
    Star {
        legs: usize,
        #[serde(default = "unit")]
        length: f64,
    },
    Comb {
        depth: usize,
        grid: usize,
    },
}

impl SpaceDescriptor {
    pub fn build(&self) -> Result<Space> {
        match self {
            SpaceDescriptor::Euclidean { dim } => Space::euclidean(*dim),
            SpaceDescriptor::Tree { vertices, edges, root } => Space::tree(TreeParams {
                vertices: vertices.clone(),
                edges: edges.clone(),
                root: *root,
            }),
            SpaceDescriptor::OpenBook { pages } => Space::open_book(*pages),
            SpaceDescriptor::Star { legs, length } => Space::star(&vec![*length; *legs]),
            SpaceDescriptor::Comb { depth, grid } => Space::comb(*depth, *grid),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        let cases = [
            r#"{"kind":"euclidean","dim":2}"#,
            r#"{"kind":"open_book","pages":3}"#,
            r#"{"kind":"star","legs":3}"#,
            r#"{"kind":"comb","depth":1,"grid":4}"#,
            r#"{"kind":"tree","vertices":[0,1,2],"edges":[[0,1,1.0],[0,2,0.5]],"root":0}"#,
        ];
        for text in cases {
            let d: SpaceDescriptor = serde_json::from_str(text).unwrap();
            d.build().unwrap();
        }
    }

    #[test]
    fn round_trips_through_space() {
        let space = Space::comb(1, 2).unwrap();
        let text = serde_json::to_string(&space.descriptor()).unwrap();
        let back: SpaceDescriptor = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build().unwrap(), space);
    }

    #[test]
    fn rejects_malformed() {
        assert!(serde_json::from_str::<SpaceDescriptor>(r#"{"kind":"sphere"}"#).is_err());
        assert!(serde_json::from_str::<SpaceDescriptor>(r#"{"kind":"euclidean","dim":2,"pages":3}"#).is_err());
        let d: SpaceDescriptor = serde_json::from_str(r#"{"kind":"open_book","pages":1}"#).unwrap();
        assert!(d.build().is_err());
    }
}
