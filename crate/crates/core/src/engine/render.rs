use std::collections::{BTreeMap, BTreeSet};

use super::backend::Backend;
use super::dims::{Dim, Owner};
use super::env::{AbstractEnv, Visible};
use crate::frontend::Ty;
use crate::strings::Strings;

/// Report lines describing `env` restricted to `visible`: string facts
/// first, then the numeric block.
pub fn render_state(env: &AbstractEnv, visible: &[Visible], strings: Strings) -> Vec<String> {
    if env.is_bottom() {
        return vec!["⊥".to_string()];
    }
    let mut sorted: Vec<&Visible> = visible.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let mut out = Vec::new();
    for v in sorted.iter().filter(|v| v.ty == Ty::Str) {
        out.extend(strings.render(env, v.owner, &v.name));
    }
    let names: BTreeMap<Owner, &str> = sorted.iter().map(|v| (v.owner, v.name.as_str())).collect();
    match &env.num {
        Backend::NonRel(e) => {
            let cfg = e.config();
            for v in sorted.iter().filter(|v| v.ty == Ty::Int) {
                let val = e.get(&Dim::Var(v.owner));
                if cfg.intervals {
                    out.push(format!("{} ∈ {}", v.name, val.itv));
                }
                let shown_by_itv = cfg.intervals && val.itv.singleton().is_some();
                if cfg.congruences && !shown_by_itv && (!cfg.intervals || !val.congr.is_top()) {
                    out.push(format!("{} {}", v.name, val.congr));
                }
            }
        }
        Backend::Poly(p) => {
            let mut keep = BTreeSet::new();
            for v in &sorted {
                match v.ty {
                    Ty::Int => {
                        keep.insert(Dim::Var(v.owner));
                    }
                    Ty::Str => keep.extend(strings.ghosts(v.owner)),
                    Ty::Void => {}
                }
            }
            let q = p.project(&keep);
            out.extend(q.render_lines(|d| {
                let n = names.get(&d.owner()).copied().unwrap_or("?");
                match d {
                    Dim::Var(_) => n.to_string(),
                    Dim::Len(_) => format!("len({n})"),
                    Dim::Ord(_) => format!("ord({n})"),
                }
            }));
        }
    }
    out
}
