use std::path::PathBuf;

use flatland::curves::{j_from_pattern, Ambient, CurvePattern};
use flatland::patterns::{encode, j_of_word, reduce, AnnulusWord, WordError};
use flatland::polyfam::{delta_curves, j_invariant, PolyLoop, DEFAULT_RESOLUTION};

fn fixtures(dir: &str) -> Vec<(String, String)> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(dir);
    let mut out: Vec<(String, String)> = std::fs::read_dir(path)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read_to_string(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn loop_j_agrees_across_modules() {
    for (name, body) in fixtures("loops") {
        let l = PolyLoop::from_json(&body).unwrap();
        let j = j_invariant(&l).unwrap().value();
        let p = delta_curves(&l, DEFAULT_RESOLUTION).unwrap();
        assert_eq!(j_from_pattern(&p).unwrap().j, j, "{name}");
        let w = encode(&p).unwrap();
        assert_eq!(j_of_word(&w), j, "{name}");
        assert_eq!(reduce(&w).unwrap().n, j, "{name}");
    }
}

/// Symmetric plane fixtures have tangencies sharing a fiber; a small rotation separates them.
fn rotated(p: &CurvePattern, angle: f64) -> CurvePattern {
    let (s, c) = angle.sin_cos();
    let loops = p.loops.iter().map(|l| l.map(|[x, y]| [c * x - s * y, s * x + c * y], l.winding())).collect();
    CurvePattern::new(p.ambient, loops)
}

#[test]
fn curve_j_agrees_with_word_reduction() {
    for (name, body) in fixtures("curves") {
        let p = CurvePattern::from_json(&body).unwrap();
        let j = j_from_pattern(&p).unwrap().j;
        let w = match encode(&p) {
            Ok(w) => w,
            Err(WordError::CoincidentEvents(..)) => {
                assert_eq!(p.ambient, Ambient::Plane, "{name}");
                let q = rotated(&p, 0.05);
                assert_eq!(j_from_pattern(&q).unwrap().j, j, "{name}");
                encode(&q).unwrap()
            }
            Err(e) => panic!("{name}: {e}"),
        };
        assert_eq!(reduce(&w).unwrap().n, j, "{name}");
    }
}

#[test]
fn empty_patterns_encode_to_empty_words() {
    for ambient in [Ambient::Plane, Ambient::Annulus] {
        let w = encode(&CurvePattern::new(ambient, Vec::new())).unwrap();
        assert_eq!(w, AnnulusWord::empty());
    }
}
