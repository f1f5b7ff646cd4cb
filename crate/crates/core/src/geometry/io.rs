use serde::{Deserialize, Serialize};

use super::contour::Contour;
use super::patch::{Patch, DEFAULT_CELL};
use super::point::StripPoint;
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContourFile {
    pub winding: i32,
    pub orientation: i32,
    pub nodes: Vec<StripPoint>,
}

/// On-disk patch description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchFile {
    pub contours: Vec<ContourFile>,
    pub bounding_x: f64,
}

impl PatchFile {
    pub fn into_patch(self, h: Option<f64>) -> Result<Patch> {
        let contours = self
            .contours
            .into_iter()
            .map(|c| Contour::new(c.nodes, c.winding, c.orientation))
            .collect::<Result<Vec<_>>>()?;
        Patch::with_cell(contours, self.bounding_x, h.unwrap_or(DEFAULT_CELL))
    }

    pub fn from_patch(p: &Patch) -> Self {
        Self {
            contours: p
                .contours()
                .iter()
                .map(|c| ContourFile {
                    winding: c.winding(),
                    orientation: c.orientation(),
                    nodes: c.nodes().to_vec(),
                })
                .collect(),
            bounding_x: p.bounding_x(),
        }
    }
}

impl Patch {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: PatchFile = serde_json::from_str(s)?;
        f.into_patch(None)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PatchFile::from_patch(self))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let p = Patch::sinusoidal(2.0, 0.1, 40).unwrap();
        let s = p.to_json_string().unwrap();
        let q = Patch::from_json_str(&s).unwrap();
        assert_eq!(p.contours(), q.contours());
        assert_eq!(p.bounding_x(), q.bounding_x());
    }

    #[test]
    fn bad_json_is_error() {
        assert!(Patch::from_json_str("{\"contours\": 3}").is_err());
        let s = r#"{"contours":[{"winding":0,"orientation":1,"nodes":[[0,0],[1,0]]}],"bounding_x":2}"#;
        assert!(Patch::from_json_str(s).is_err());
    }
}
