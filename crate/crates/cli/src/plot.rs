//! SVG strip of index-finger silhouettes from a run table.
//!
//! Points are the sagittal chain in mm with the screen y axis pointing
//! toward flexion. Each step is a `polyline.finger` carrying `data-step`
//! and `data-class`; the fingertip path is `polyline.trace`.

use std::fmt::Write;

use catch_core::hand_model::{Finger, HandModel};
use catch_core::statics::finger_chain;

use crate::run::RunRow;

/// Three decimals without a negative zero.
fn num(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0 + 0.0
}

fn pt(p: (f64, f64)) -> String {
    // Screen y grows downward, toward flexion.
    format!("{:.3},{:.3}", num(p.0), num(-p.1))
}

pub fn plot_svg(model: &HandModel, rows: &[RunRow]) -> String {
    let reach: f64 = model.phalanx_lengths(Finger::Index).iter().sum();
    let pad = 20.0;
    let (x0, y0, w, h) = (-reach - pad, -reach - pad, 2.0 * (reach + pad), 2.0 * (reach + pad));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.3} {y0:.3} {w:.3} {h:.3}" width="{:.0}" height="{:.0}">"#,
        w * 2.0,
        h * 2.0
    );
    let _ = writeln!(
        s,
        "<style>.finger{{fill:none;stroke:#345;stroke-width:1.5;stroke-linejoin:round}}.trace{{fill:none;stroke:#c33;stroke-width:0.8;stroke-dasharray:2 2}}.label{{font:5px sans-serif;fill:#333}}</style>"
    );
    let n = rows.len().max(1);
    let mut tips = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter().enumerate() {
        let chain = finger_chain(model, Finger::Index, &r.q);
        let points: Vec<String> = chain.iter().copied().map(pt).collect();
        let opacity = 0.25 + 0.75 * (k + 1) as f64 / n as f64;
        let _ = writeln!(
            s,
            r#"<polyline class="finger" data-step="{}" data-class="{}" stroke-opacity="{opacity:.3}" points="{}"/>"#,
            r.step,
            r.class,
            points.join(" ")
        );
        let tip = *chain.last().expect("chain has points");
        tips.push(pt(tip));
        let _ = writeln!(s, r#"<text class="label" x="{:.3}" y="{:.3}">{} {}</text>"#, num(tip.0 + 2.0), num(-tip.1), r.step, r.class);
    }
    let _ = writeln!(s, r#"<polyline class="trace" points="{}"/>"#, tips.join(" "));
    s.push_str("</svg>\n");
    s
}
