//! Constant-region generalised binary search.
//!
//! Every `C(n,2)`-face of the simplex is learned with CD-GBS and the per-label points are
//! combined into global hulls.

use serde::Serialize;

use crate::cdgbs::{cd_gbs, cd_gbs_adversarial, conflict_depth, GbsConfig, GbsStats};
use crate::error::{Error, Result};
use crate::geometry::{binomial, enumerate_k_faces, AffineMap, Face, Point};
use crate::labelling::EmpiricalLabelling;
use crate::partition::{MappedOracle, MembershipOracle};

/// Faces enumerated before giving up.
pub const FACE_CAP: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrConfig {
    pub m: usize,
    pub n: usize,
    pub eps: f64,
    pub adversarial: bool,
    pub seed: u64,
}

impl CrConfig {
    pub fn new(m: usize, n: usize, eps: f64) -> Self {
        CrConfig { m, n, eps, adversarial: false, seed: 0 }
    }

    pub fn adversarial(mut self, on: bool) -> Self {
        self.adversarial = on;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Face dimension `C(n, 2)`.
    pub fn k(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    /// `3ε / (100 n² √(k+1) (m+1)^{5/2})`.
    pub fn sub_eps(&self) -> f64 {
        let (n, k, m) = (self.n as f64, self.k() as f64, self.m as f64);
        3.0 * self.eps / (100.0 * n * n * (k + 1.0).sqrt() * (m + 1.0).powf(2.5))
    }

    pub fn face_count(&self) -> u64 {
        binomial(self.m as u64 + 1, self.k() as u64 + 1)
    }

    /// Whether the run delegates to CD-GBS on the whole simplex.
    pub fn falls_back(&self) -> bool {
        self.m <= self.k()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceQueries {
    pub face: Vec<usize>,
    pub queries: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CrStats {
    pub queries: u64,
    pub faces: Vec<FaceQueries>,
    pub merges: usize,
    /// Conflicts after assembly on a non-adversarial run; expected to stay zero.
    pub lex_conflicts: usize,
    pub fallback: bool,
    /// Stats of the delegated run when `fallback` is set.
    pub gbs: Option<GbsStats>,
}

#[derive(Clone, Debug)]
pub struct CrRun {
    pub labelling: EmpiricalLabelling,
    pub stats: CrStats,
}

/// A face labelling in face coordinates, with the map `φ_F` whose inverse pulls points back.
#[derive(Clone, Debug)]
pub struct FaceLabelling {
    pub face: Face,
    pub map: AffineMap,
    pub labelling: EmpiricalLabelling,
}

pub fn cr_gbs(cfg: &CrConfig, oracle: &mut dyn MembershipOracle) -> Result<CrRun> {
    if !(cfg.eps > 0.0) || cfg.n == 0 {
        return Err(Error::InvalidInput("need eps > 0 and at least one label".into()));
    }
    if oracle.dim() != cfg.m || oracle.label_count() != cfg.n {
        return Err(Error::InvalidInput("oracle shape does not match the configuration".into()));
    }
    let before = oracle.queries();
    if cfg.falls_back() {
        let gcfg = GbsConfig::new(cfg.m, cfg.n, cfg.eps).seed(cfg.seed);
        let run = if cfg.adversarial { cd_gbs_adversarial(&gcfg, oracle)? } else { cd_gbs(&gcfg, oracle)? };
        let stats = CrStats {
            queries: oracle.queries() - before,
            merges: run.stats.merges,
            lex_conflicts: run.stats.lex_conflicts,
            fallback: true,
            gbs: Some(run.stats),
            ..CrStats::default()
        };
        return Ok(CrRun { labelling: run.labelling, stats });
    }
    if cfg.face_count() > FACE_CAP {
        return Err(Error::CapExceeded(format!("{} faces", cfg.face_count())));
    }
    let k = cfg.k();
    let mut stats = CrStats::default();
    let mut faces = Vec::new();
    let mut vertex_hits: Vec<(Point, usize)> = Vec::new();
    for (face, map) in enumerate_k_faces(cfg.m, k)? {
        let start = oracle.queries();
        for v in face.vertices(cfg.m) {
            let label = oracle.query(&v)?;
            vertex_hits.push((v, label));
        }
        let inv = map.inverse().cloned().ok_or_else(|| Error::InvalidInput("face map without inverse".into()))?;
        let gcfg = GbsConfig::new(k, cfg.n, cfg.sub_eps()).seed(cfg.seed ^ face_tag(&face));
        let mut mo = MappedOracle::new(oracle, inv)?;
        let run = if cfg.adversarial { cd_gbs_adversarial(&gcfg, &mut mo)? } else { cd_gbs(&gcfg, &mut mo)? };
        stats.merges += run.stats.merges;
        stats.faces.push(FaceQueries { face: face.vertex_subset.clone(), queries: oracle.queries() - start });
        faces.push(FaceLabelling { face, map, labelling: run.labelling });
    }
    let mut lab = assemble_from_faces(cfg.m, cfg.n, &faces)?;
    lab.extend(vertex_hits)?;
    while let Some((i, j, _)) = lab.interior_conflict(conflict_depth(cfg.eps)) {
        if !cfg.adversarial {
            stats.lex_conflicts += 1;
            break;
        }
        lab.merge_labels(i, j)?;
        stats.merges += 1;
    }
    lab.compact();
    stats.queries = oracle.queries() - before;
    Ok(CrRun { labelling: lab, stats })
}

fn face_tag(face: &Face) -> u64 {
    face.vertex_subset.iter().fold(0u64, |h, &v| h.wrapping_mul(0x100_0000_01b3).wrapping_add(v as u64 + 1))
}

/// Per-label union of the pulled-back face points, with hulls in ambient dimension.
/// Merges made inside a face run are not carried over.
pub fn assemble_from_faces(m: usize, n: usize, faces: &[FaceLabelling]) -> Result<EmpiricalLabelling> {
    let mut out = EmpiricalLabelling::new(m, n);
    for f in faces {
        if f.labelling.label_count() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.labelling.label_count() });
        }
        if f.map.in_dim() != m || f.labelling.dim() != f.map.out_dim() {
            return Err(Error::DimensionMismatch { expected: m, got: f.map.in_dim() });
        }
        let inv = f.map.inverse().ok_or_else(|| Error::InvalidInput("face map without inverse".into()))?;
        let batch: Vec<(Point, usize)> =
            (0..n).flat_map(|l| f.labelling.points(l).iter().map(move |w| (inv.apply(w), l))).collect();
        out.extend(batch)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::VPolytope;
    use crate::partition::{make_oracle, random_uepp, LabelSource, OracleKind, UeppOptions};
    use std::sync::Arc;

    #[test]
    fn sub_eps_matches_formula() {
        let c = CrConfig::new(3, 2, 0.15);
        assert_eq!(c.k(), 1);
        let want = 0.45 / (100.0 * 4.0 * 2f64.sqrt() * 32.0);
        assert!((c.sub_eps() - want).abs() < 1e-15);
        assert_eq!(c.face_count(), 6);
    }

    #[test]
    fn single_label_needs_one_query_per_vertex() {
        let u = crate::partition::Uepp::new(3, vec![vec![0.0; 3]], vec![0.0]).unwrap();
        let src: Arc<dyn LabelSource> = Arc::new(u);
        let mut o = make_oracle(src, OracleKind::Lexicographic, 0);
        // k = 0: faces are the vertices
        let run = cr_gbs(&CrConfig::new(3, 1, 0.1), &mut o).unwrap();
        assert_eq!(run.stats.faces.len(), 4);
        assert!(run.stats.faces.iter().all(|f| f.queries == 2));
        assert!(run.labelling.is_eps_close(&VPolytope::simplex(3), 0.1).is_close);
    }

    #[test]
    fn two_labels_in_three_dimensions() {
        let u = random_uepp(3, 2, 4, UeppOptions::default()).unwrap();
        let src: Arc<dyn LabelSource> = Arc::new(u);
        let mut o = make_oracle(src, OracleKind::Lexicographic, 0);
        let run = cr_gbs(&CrConfig::new(3, 2, 0.15), &mut o).unwrap();
        assert_eq!(run.stats.faces.len(), 6);
        assert_eq!(run.stats.lex_conflicts, 0);
        assert!(run.labelling.is_eps_close(&VPolytope::simplex(3), 0.15).is_close);
    }

    #[test]
    fn identity_face_assembles_to_itself() {
        let mut l = EmpiricalLabelling::new(2, 2);
        l.add_query(&[0.0, 0.0], 0).unwrap();
        l.add_query(&[1.0, 0.0], 1).unwrap();
        let f = FaceLabelling {
            face: Face { vertex_subset: vec![0, 1, 2], dim: 2 },
            map: AffineMap::identity(2),
            labelling: l.clone(),
        };
        let out = assemble_from_faces(2, 2, &[f]).unwrap();
        assert_eq!(out.points(0), l.points(0));
        assert_eq!(out.points(1), l.points(1));
    }
}
