//! Geometry documents and SVG rendering.

mod common;

use common::*;
use proptest::prelude::*;
use std::f64::consts::PI;
use stokes_core::io::{to_json_string, GeometryDocument};
use stokes_core::symbol::{airy_symbol, bnr_symbol};
use stokes_core::{
    build_geometry, parse_geometry, render_svg, serialize_geometry, BuildOptions, GeometryConfig, Region,
    RenderStyle, StokesGeometry,
};

fn svg_nodes<'a>(doc: &'a roxmltree::Document<'a>, tag: &str, class_prefix: &str) -> Vec<roxmltree::Node<'a, 'a>> {
    doc.descendants()
        .filter(|n| n.has_tag_name(tag) && n.attribute("class").is_some_and(|c| c.starts_with(class_prefix)))
        .collect()
}

fn airy_geometry() -> StokesGeometry {
    build_geometry(&airy_symbol(), &GeometryConfig::new(0.0, Region::square(2.0)), &BuildOptions::default()).unwrap()
}

#[test]
fn empty_region_gives_an_empty_document() {
    let g = build_geometry(&bnr_symbol(), &GeometryConfig::new(0.0, Region::new(4.0, 4.0, 5.0, 5.0)), &BuildOptions::default())
        .unwrap();
    let text = serialize_geometry(&g);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], 1);
    for key in ["turning_points", "curves", "crossings", "degeneracies"] {
        assert_eq!(v[key].as_array().map(Vec::len), Some(0), "{key}");
    }
    assert_eq!(parse_geometry(&text).unwrap(), g);
}

#[test]
fn bnr_document_at_theta_zero() {
    let g = bnr_geometry_at_zero();
    let v: serde_json::Value = serde_json::from_str(&serialize_geometry(g)).unwrap();
    assert_eq!(v["degeneracies"].as_array().unwrap().len(), 0);
    let tps = v["turning_points"].as_array().unwrap();
    assert_eq!(tps.len(), 3);
    let kinds: Vec<&str> = tps.iter().map(|t| t["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["ordinary", "virtual", "ordinary"]);
    // turning points ordered by (re, im), curves by (source, direction)
    let locs: Vec<f64> = tps.iter().map(|t| t["loc"][0].as_f64().unwrap()).collect();
    assert!(locs.windows(2).all(|w| w[0] <= w[1]));
    let curves = v["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 7);
    let keys: Vec<(u64, u64)> =
        curves.iter().map(|c| (c["source"].as_u64().unwrap(), c["direction"].as_u64().unwrap())).collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
    for c in curves {
        assert!(c["activity"].as_array().unwrap().iter().all(|s| s["from"].is_number() && s["active"].is_boolean()));
    }
}

#[test]
fn documents_round_trip() {
    for g in [bnr_geometry_at_zero().clone(), bnr_geometry(PI / 2.0), airy_geometry()] {
        let text = serialize_geometry(&g);
        let back = parse_geometry(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(serialize_geometry(&back), text);
        let doc = GeometryDocument::from_json(&text).unwrap();
        assert_eq!(doc.to_json(), text);
    }
}

#[test]
fn serialization_is_deterministic() {
    let a = serialize_geometry(&bnr_geometry(0.3));
    let b = serialize_geometry(&bnr_geometry(0.3));
    assert_eq!(a, b);
}

#[test]
fn bnr_svg_has_two_black_and_one_red_dot() {
    let g = bnr_geometry_at_zero();
    let svg = render_svg(g, &RenderStyle::default());
    let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
    let dots = svg_nodes(&doc, "circle", "tp");
    assert_eq!(dots.len(), 3);
    assert_eq!(dots.iter().filter(|d| d.attribute("fill") == Some("black")).count(), 2);
    assert_eq!(dots.iter().filter(|d| d.attribute("fill") == Some("red")).count(), 1);
    assert_eq!(svg_nodes(&doc, "g", "curve").len(), g.curves.len());
    // the new curve has a dotted (inactive) middle portion
    let inactive = svg_nodes(&doc, "polyline", "virtual inactive");
    assert!(!inactive.is_empty());
    assert!(inactive.iter().all(|p| p.attribute("stroke-dasharray") == Some("1.5 3")));
    assert!(svg.contains("arg η = 0"));
}

#[test]
fn airy_svg_has_one_dot_and_three_solid_curves() {
    let svg = render_svg(&airy_geometry(), &RenderStyle::default());
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let dots = svg_nodes(&doc, "circle", "tp");
    assert_eq!(dots.len(), 1);
    assert_eq!(dots[0].attribute("fill"), Some("black"));
    let lines = svg_nodes(&doc, "polyline", "ordinary");
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|l| l.attribute("stroke") == Some("black") && l.attribute("stroke-dasharray").is_none()));
}

#[test]
fn bnr_connection_is_drawn_doubled() {
    let g = bnr_geometry(PI / 2.0);
    let svg = render_svg(&g, &RenderStyle::default());
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let overlap: Vec<_> = doc
        .descendants()
        .filter(|n| n.has_tag_name("polyline") && n.attribute("class").is_some_and(|c| c.contains("overlap")))
        .collect();
    assert!(!overlap.is_empty());
    assert!(overlap.iter().any(|p| p.attribute("stroke") == Some("red")));
    assert!(svg.contains("arg η = π/2"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn floats_survive_serialization(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let text = to_json_string(&vec![x, -x]);
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back[0].to_bits(), x.to_bits());
        prop_assert_eq!(back[1].to_bits(), (-x).to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn airy_documents_round_trip(theta in 0.0f64..(2.0 * PI)) {
        let g = build_geometry(&airy_symbol(), &GeometryConfig::new(theta, Region::square(2.0)), &BuildOptions::default()).unwrap();
        let text = serialize_geometry(&g);
        prop_assert_eq!(parse_geometry(&text).unwrap(), g);
    }
}
