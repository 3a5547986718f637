//! Text, JSON, and SVG rendering of computation results.
//!
//! SVG documents use the fixed viewBox "-120 -120 240 240": rays are drawn
//! to radius 100 with exact integer/rational coordinate arithmetic, incoming
//! walls solid and outgoing walls dashed.

use num_bigint::BigInt;
use serde_json::json;

use cluster_scatter::fan::GFan;
use cluster_scatter::pattern::PatternPoint;
use cluster_scatter::scattering::{ScatteringDiagram, Support};
use cluster_scatter::separation;
use cluster_scatter::theta::ThetaResult;

use crate::CliError;

pub fn walk_text(p: &PatternPoint, reduced: bool) -> Result<String, CliError> {
    let mut out = String::new();
    if reduced {
        out.push_str("note: walk reduced (adjacent equal directions cancel)\n");
    }
    out.push_str(&format!(
        "walk (1-based) = {:?}\n",
        p.walk().directions().iter().map(|k| k + 1).collect::<Vec<_>>()
    ));
    out.push_str(&format!("B_t = {}\n", p.b_t().matrix()));
    out.push_str(&format!("C_t = {}\n", p.c_t()));
    out.push_str(&format!("G_t = {}\n", p.g_t()));
    let mut signs = String::new();
    for i in 0..p.n() {
        let s = p.tropical_sign(i).map_err(CliError::internal)?;
        signs.push(if s > 0 { '+' } else { '-' });
    }
    out.push_str(&format!("tropical signs = {signs}\n"));
    for i in 0..p.n() {
        out.push_str(&format!("F[{}] = {}\n", i + 1, p.f(i)));
    }
    for i in 0..p.n() {
        let x = separation::x_variable(p, i).map_err(CliError::internal)?;
        out.push_str(&format!("x[{}] = {}\n", i + 1, x));
    }
    Ok(out)
}

pub fn walk_json(p: &PatternPoint, reduced: bool) -> Result<String, CliError> {
    let matrix = |m: &cluster_scatter::IntMatrix| -> Vec<Vec<String>> {
        (0..m.n())
            .map(|i| (0..m.n()).map(|j| m.get(i, j).to_string()).collect())
            .collect()
    };
    let mut signs = Vec::new();
    for i in 0..p.n() {
        signs.push(i64::from(p.tropical_sign(i).map_err(CliError::internal)?));
    }
    let mut xs = Vec::new();
    for i in 0..p.n() {
        xs.push(separation::x_variable(p, i).map_err(CliError::internal)?.to_string());
    }
    let doc = json!({
        "walk": p.walk().directions().iter().map(|k| k + 1).collect::<Vec<_>>(),
        "reduced": reduced,
        "b_t": matrix(p.b_t().matrix()),
        "c_t": matrix(p.c_t()),
        "g_t": matrix(p.g_t()),
        "tropical_signs": signs,
        "f_polynomials": p.f_all().iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        "x_variables": xs,
    });
    Ok(format!("{:#}\n", doc))
}

pub fn fan_text(fan: &GFan) -> String {
    let mut out = String::new();
    out.push_str(&format!("depth = {}\n", fan.depth()));
    out.push_str(&format!("distinct G-matrices = {}\n", fan.g_matrices().len()));
    out.push_str(&format!("maximal cones = {}\n", fan.max_cones().len()));
    out.push_str(&format!("complete = {}\n", fan.is_complete()));
    let rays = fan.rays();
    out.push_str(&format!("rays ({}):\n", rays.len()));
    for r in &rays {
        out.push_str(&format!("  ({})\n", join_big(r)));
    }
    out
}

pub fn fan_json(fan: &GFan) -> String {
    let doc = json!({
        "depth": fan.depth(),
        "g_matrices": fan.g_matrices().len(),
        "max_cones": fan.max_cones().len(),
        "complete": fan.is_complete(),
        "rays": fan.rays().iter().map(|r| {
            r.iter().map(|x| x.to_string()).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
    });
    format!("{:#}\n", doc)
}

pub fn scatter_text(d: &ScatteringDiagram) -> String {
    let mut out = String::new();
    out.push_str(&format!("truncation = {}\n", d.truncation()));
    out.push_str(&format!("walls = {}\n", d.walls().len()));
    for w in d.walls() {
        let kind = if w.incoming { "incoming" } else { "outgoing" };
        match &w.support {
            Support::Hyperplane(n0) => {
                out.push_str(&format!(
                    "  hyperplane n0=({}) [{kind}]: {}\n",
                    join_i64(n0),
                    w.function
                ));
            }
            Support::Cone(gens) => {
                let rays: Vec<String> = gens.iter().map(|g| format!("({})", join_i64(g))).collect();
                out.push_str(&format!(
                    "  ray {} [{kind}]: {}\n",
                    rays.join(" "),
                    w.function
                ));
            }
        }
    }
    out
}

pub fn scatter_json(d: &ScatteringDiagram) -> String {
    let walls: Vec<_> = d
        .walls()
        .iter()
        .map(|w| {
            let support = match &w.support {
                Support::Hyperplane(n0) => json!({"hyperplane": n0}),
                Support::Cone(gens) => json!({"rays": gens}),
            };
            json!({
                "support": support,
                "incoming": w.incoming,
                "function": w.function.to_string(),
            })
        })
        .collect();
    let doc = json!({
        "truncation": d.truncation(),
        "walls": walls,
    });
    format!("{:#}\n", doc)
}

pub fn theta_text(r: &ThetaResult) -> String {
    let mut out = String::new();
    out.push_str(&format!("broken lines = {}\n", r.lines.len()));
    for (i, line) in r.lines.iter().enumerate() {
        let bends: Vec<String> = line
            .bends
            .iter()
            .map(|b| format!("wall#{} step {}", b.wall_index, b.step))
            .collect();
        out.push_str(&format!(
            "  line {}: mono = {}*x^({}), bends = [{}]\n",
            i,
            line.mono().coeff,
            join_i64(&line.mono().exponent),
            bends.join(", ")
        ));
    }
    out.push_str(&format!("theta = {}\n", r.series));
    out
}

pub fn theta_json(r: &ThetaResult) -> String {
    let doc = json!({
        "lines": r.lines.len(),
        "theta": r.series.to_string(),
    });
    format!("{:#}\n", doc)
}

fn join_big(v: &[BigInt]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn join_i64(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

// --------------------------------------------------------------------------
// SVG
// --------------------------------------------------------------------------

const VIEWBOX: &str = "-120 -120 240 240";
const RAY_RADIUS: i64 = 100;

/// Fixed-point coordinate `v * RAY_RADIUS / len` with two decimals, exact
/// integer arithmetic (round half away from zero).
fn coord(v: i64, len_num: i64, len_den: i64) -> String {
    // value = v * RAY_RADIUS * len_den / len_num, rendered at 1/100 precision
    let num = v as i128 * RAY_RADIUS as i128 * len_den as i128 * 100;
    let den = len_num as i128;
    debug_assert!(den > 0);
    let mut q = num / den;
    let r = num % den;
    if 2 * r.abs() >= den {
        q += if num >= 0 { 1 } else { -1 };
    }
    let sign = if q < 0 { "-" } else { "" };
    let q = q.abs();
    format!("{}{}.{:02}", sign, q / 100, q % 100)
}

/// Endpoint of a ray scaled to the drawing radius; the y-axis is flipped so
/// mathematical coordinates appear the usual way up.
fn ray_endpoint(r: &[BigInt]) -> (String, String) {
    let x = i64::try_from(r[0].clone()).unwrap_or(0);
    let y = i64::try_from(r[1].clone()).unwrap_or(0);
    let len = x.abs().max(y.abs()).max(1);
    (coord(x, len, 1), coord(-y, len, 1))
}

fn ray_endpoint_i64(r: &[i64]) -> (String, String) {
    let len = r[0].abs().max(r[1].abs()).max(1);
    (coord(r[0], len, 1), coord(-r[1], len, 1))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_header(title: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{VIEWBOX}\">\n\
         <title>{}</title>\n\
         <rect x=\"-120\" y=\"-120\" width=\"240\" height=\"240\" fill=\"white\"/>\n",
        xml_escape(title)
    )
}

pub fn fan_svg(fan: &GFan) -> Result<String, CliError> {
    if fan.b0().n() != 2 {
        return Err(CliError::usage("SVG rendering requires rank 2"));
    }
    let mut svg = svg_header("G-fan");
    // wedge fill per maximal cone, then rays, then labels
    for c in fan.max_cones() {
        let (x1, y1) = ray_endpoint(&c.column(0));
        let (x2, y2) = ray_endpoint(&c.column(1));
        svg.push_str(&format!(
            "<path d=\"M 0 0 L {x1} {y1} L {x2} {y2} Z\" fill=\"#eef\" stroke=\"none\"/>\n"
        ));
    }
    for r in fan.rays() {
        let (x, y) = ray_endpoint(&r);
        svg.push_str(&format!(
            "<line x1=\"0\" y1=\"0\" x2=\"{x}\" y2=\"{y}\" stroke=\"black\" stroke-width=\"1\"/>\n"
        ));
    }
    for c in fan.max_cones() {
        // label at the midpoint direction of the two generators
        let g1 = c.column(0);
        let g2 = c.column(1);
        let mx = i64::try_from(&g1[0] + &g2[0]).unwrap_or(0);
        let my = i64::try_from(&g1[1] + &g2[1]).unwrap_or(0);
        let len = mx.abs().max(my.abs()).max(1);
        let (x, y) = (coord(mx * 3, len * 5, 1), coord(-my * 3, len * 5, 1));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-size=\"6\" text-anchor=\"middle\">G={}</text>\n",
            xml_escape(&format!("{}", c))
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn scatter_svg(d: &ScatteringDiagram) -> Result<String, CliError> {
    if d.b0().n() != 2 {
        return Err(CliError::usage("SVG rendering requires rank 2"));
    }
    let mut svg = svg_header("scattering diagram");
    let mut labels = String::new();
    for w in d.walls() {
        let dash = if w.incoming { "" } else { " stroke-dasharray=\"4,2\"" };
        let rays: Vec<Vec<i64>> = match &w.support {
            Support::Hyperplane(n0) => {
                // the two rays of the D-orthogonal line
                let skew = d.b0().skew();
                let d1 = i64::try_from(skew.d_i(0).clone()).unwrap();
                let d2 = i64::try_from(skew.d_i(1).clone()).unwrap();
                let r = vec![d1 * n0[1], -d2 * n0[0]];
                vec![r.clone(), vec![-r[0], -r[1]]]
            }
            Support::Cone(gens) => gens.clone(),
        };
        for r in &rays {
            let (x, y) = ray_endpoint_i64(r);
            svg.push_str(&format!(
                "<line x1=\"0\" y1=\"0\" x2=\"{x}\" y2=\"{y}\" stroke=\"black\" stroke-width=\"1\"{dash}/>\n"
            ));
        }
        if let Some(r) = rays.first() {
            let len = r[0].abs().max(r[1].abs()).max(1);
            let (x, y) = (coord(r[0] * 11, len * 10, 1), coord(-r[1] * 11, len * 10, 1));
            labels.push_str(&format!(
                "<text x=\"{x}\" y=\"{y}\" font-size=\"5\" text-anchor=\"middle\">{}</text>\n",
                xml_escape(&w.function.to_string())
            ));
        }
    }
    svg.push_str(&labels);
    svg.push_str("</svg>\n");
    Ok(svg)
}
