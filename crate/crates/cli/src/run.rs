use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use coarsecoh::cochains::full_complex_cohomology;
use coarsecoh::cohomology::CohomologyGroup;
use coarsecoh::control::{ControlFunction, ControlFunctions};
use coarsecoh::engine::{
    check_acyclicity_at_infinity, coarse_cohomology, coarse_cohomology_of_complement, consistency_check_da,
    CoarseParams, CoarseProfile, SampleSpec,
};
use coarsecoh::fillings::{
    adapted_cover, cone_homotopy_d, cover_filling_s, face_closure, fill_domain, random_controlled_map, operator_t,
    tuples_of_width, FarSubcomplexSpec, FillingOptions, FillingResult,
};
use coarsecoh::io::{parse_cochain_file, read_space, read_text, space_from_json, CochainFile, LoadOptions, SpaceFile};
use coarsecoh::metric::{generate_annulus, generate_circle_pack, generate_grid, FiniteMetricSpace, PointId, Selection};
use coarsecoh::simplicial::{default_scale, rips_complex};
use coarsecoh::towers::{build_complement_tower, colimit_analysis, complex_cohomology, default_r_grid, geometric_grid, TowerParams};
use coarsecoh::{Coeff, Field, Gf2, Ring};

use crate::args::{CoarseArgs, Command, SpaceArgs, SpaceKind};
use crate::CliError;

/// Result of one subcommand before it is wrapped in the envelope.
pub struct Outcome {
    pub result: Value,
    pub tsv: Option<String>,
    /// Canonical bytes of everything the computation read.
    pub inputs: Vec<u8>,
}

/// A space plus the layout data of generated families.
pub struct Loaded {
    pub space: FiniteMetricSpace,
    pub ray: Option<Vec<PointId>>,
    pub circles: Option<Value>,
    pub inner: Option<(f64, f64)>,
    /// Rips scale used when `--scale` is absent: 1.5 times the sample
    /// spacing of a generated family (the ray spacing for circle packs).
    pub default_scale: Option<f64>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

pub fn load_space(a: &SpaceArgs) -> Result<Loaded, CliError> {
    match (&a.input, a.space) {
        (Some(path), None) => {
            let opts = LoadOptions { strict_metric: a.strict, basepoint: a.basepoint, truncation_radius: a.truncation };
            let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
            let space = if is_json {
                // accept the output of `gen`, which nests the space
                let text = read_text(path)?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) if m.get("space").is_some_and(Value::is_object) => {
                        space_from_json(&m["space"].to_string(), &opts)?
                    }
                    _ => space_from_json(&text, &opts)?,
                }
            } else {
                read_space(path, &opts)?
            };
            Ok(Loaded { space, ray: None, circles: None, inner: None, default_scale: None })
        }
        (None, Some(kind)) => {
            if a.basepoint.is_some() || a.truncation.is_some() {
                return Err(usage("--basepoint and --truncation only apply to --input"));
            }
            match kind {
                SpaceKind::Grid => {
                    if !(1..=3).contains(&a.dim) {
                        return Err(usage(format!("--dim must be 1, 2 or 3, got {}", a.dim)));
                    }
                    let space = generate_grid(a.dim, a.half_extent, a.spacing)?;
                    Ok(Loaded { space, ray: None, circles: None, inner: None, default_scale: Some(default_scale(a.spacing)) })
                }
                SpaceKind::CirclePack => {
                    let p = generate_circle_pack(a.circles, a.points_per_circle)?;
                    let circles = json!(p
                        .circles
                        .iter()
                        .map(|c| json!({"index": c.index, "radius": c.radius, "center": c.center, "members": c.members}))
                        .collect::<Vec<_>>());
                    Ok(Loaded {
                        space: p.space,
                        ray: Some(p.ray),
                        circles: Some(circles),
                        inner: None,
                        default_scale: Some(default_scale(1.0)),
                    })
                }
                SpaceKind::Annulus => {
                    let space = generate_annulus(a.inner, a.outer, a.spacing)?;
                    Ok(Loaded {
                        space,
                        ray: None,
                        circles: None,
                        inner: Some((a.inner, a.spacing)),
                        default_scale: Some(default_scale(a.spacing)),
                    })
                }
            }
        }
        (None, None) => Err(usage("give either --input or --space")),
        (Some(_), Some(_)) => Err(usage("--input and --space are exclusive")),
    }
}

fn norm(c: &[f64]) -> f64 {
    c.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Named subsets: `basepoint`, `ray`, `left-half`, `inner-ring`, `ids:i,j,...`.
pub fn parse_subset(spec: &str, l: &Loaded) -> Result<Selection, CliError> {
    let x = &l.space;
    let coords = |what: &str| x.all_coords().ok_or_else(|| usage(format!("subset `{what}` needs coordinates")));
    let members: Vec<PointId> = match spec {
        "basepoint" => vec![x.require_basepoint()?],
        "ray" => l.ray.clone().ok_or_else(|| usage("subset `ray` needs --space circle-pack"))?,
        "left-half" => {
            let c = coords(spec)?;
            (0..x.len()).filter(|&p| c[p][0] <= coarsecoh::DIST_TOL).collect()
        }
        "inner-ring" => {
            let c = coords(spec)?;
            let (inner, spacing) = l.inner.unwrap_or_else(|| {
                let lo = c.iter().map(|p| norm(p)).fold(f64::INFINITY, f64::min);
                (lo, x.min_positive_distance().unwrap_or(0.0))
            });
            (0..x.len()).filter(|&p| norm(&c[p]) <= inner + spacing + coarsecoh::DIST_TOL).collect()
        }
        other => match other.strip_prefix("ids:") {
            Some(list) => parse_list::<PointId>(list)?,
            None => return Err(usage(format!("unknown subset `{other}`"))),
        },
    };
    Ok(Selection::new(x.len(), members)?)
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<T>().map_err(|_| usage(format!("cannot parse `{p}` in `{s}`"))))
        .collect()
}

/// `a,b` stands for `r -> a r + b`.
fn parse_affine(s: &str) -> Result<ControlFunction, CliError> {
    match parse_list::<f64>(s)?.as_slice() {
        [slope, offset] => Ok(ControlFunction::affine(*offset, *slope)?),
        _ => Err(usage(format!("expected `a,b`, got `{s}`"))),
    }
}

/// `r1,r2,...` or `geom:lo:hi:count`.
fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    if let Some(rest) = s.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(usage(format!("expected geom:lo:hi:count, got `{s}`")));
        }
        let lo = parts[0].parse::<f64>().map_err(|_| usage(format!("bad lower radius in `{s}`")))?;
        let hi = parts[1].parse::<f64>().map_err(|_| usage(format!("bad upper radius in `{s}`")))?;
        let n = parts[2].parse::<usize>().map_err(|_| usage(format!("bad count in `{s}`")))?;
        return Ok(geometric_grid(lo, hi, n)?);
    }
    parse_list(s)
}

fn coarse_params(c: &CoarseArgs, l: &Loaded) -> Result<CoarseParams, CliError> {
    Ok(CoarseParams {
        scale: c.scale.or(l.default_scale),
        r_grid: c.r_grid.as_deref().map(parse_grid).transpose()?,
        max_degree: c.max_degree,
        ring: c.ring,
        window: c.window,
        stability: c.stability,
    })
}

fn scale_of(l: &Loaded, scale: Option<f64>) -> Result<f64, CliError> {
    Ok(CoarseParams { scale: scale.or(l.default_scale), ..CoarseParams::default() }.resolve_scale(&l.space)?)
}

fn groups_tsv(groups: &[CohomologyGroup]) -> String {
    let mut out = String::from("degree\tfree_rank\ttorsion\n");
    for g in groups {
        let t: Vec<String> = g.torsion.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "{}\t{}\t{}", g.degree, g.free_rank, t.join(","));
    }
    out
}

fn profile_tsv(p: &CoarseProfile) -> String {
    match &p.tower {
        Some(t) => t.to_tsv(),
        None => {
            let mut out = String::from("degree\trank\n");
            for d in &p.degrees {
                let r = d.rank().map_or("NA".to_string(), |r| r.to_string());
                let _ = writeln!(out, "{}\t{}", d.degree, r);
            }
            out
        }
    }
}

fn space_bytes(space: &FiniteMetricSpace) -> Vec<u8> {
    serde_json::to_vec(&SpaceFile::from_space(space)).expect("space serializes")
}

pub fn run(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Gen { space } => {
            let l = load_space(space)?;
            let file = SpaceFile::from_space(&l.space);
            let mut tsv = String::from("id\tlabel\tcoords\n");
            for p in 0..l.space.len() {
                let c = l.space.coords(p).map_or(String::new(), |c| {
                    c.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
                });
                let _ = writeln!(tsv, "{p}\t{}\t{c}", l.space.label(p));
            }
            let result = json!({"space": file, "circles": l.circles, "ray": l.ray, "points": l.space.len()});
            Ok(Outcome { result, tsv: Some(tsv), inputs: space_bytes(&l.space) })
        }
        Command::Rips { space, scale, max_dim, subset, simplices } => {
            let l = load_space(space)?;
            let sel = match subset {
                Some(s) => parse_subset(s, &l)?,
                None => l.space.all_points(),
            };
            let eps = scale_of(&l, *scale)?;
            let k = rips_complex(&l.space, &sel, eps, *max_dim)?;
            let counts = k.counts();
            let mut tsv = String::from("dim\tcount\n");
            for (d, c) in counts.iter().enumerate() {
                let _ = writeln!(tsv, "{d}\t{c}");
            }
            let mut result = json!({"scale": eps, "max_dim": max_dim, "points": sel.len(), "counts": counts});
            if *simplices {
                result["simplices"] = to_value(&k.to_record().simplices);
            }
            Ok(Outcome { result, tsv: Some(tsv), inputs: space_bytes(&l.space) })
        }
        Command::Betti { space, scale, max_dim, ring, reduced } => {
            let l = load_space(space)?;
            let eps = scale_of(&l, *scale)?;
            let k = rips_complex(&l.space, &l.space.all_points(), eps, max_dim + 1)?;
            let groups = complex_cohomology(&k, *ring, *max_dim, *reduced)?;
            let betti: Vec<usize> = groups.iter().map(|g| g.free_rank).collect();
            let result = json!({"scale": eps, "ring": ring, "reduced": reduced, "betti": betti, "groups": groups});
            Ok(Outcome { result, tsv: Some(groups_tsv(&groups)), inputs: space_bytes(&l.space) })
        }
        Command::Tower { space, coarse, subset } => {
            let l = load_space(space)?;
            let base = parse_subset(subset.as_deref().unwrap_or("basepoint"), &l)?;
            let params = coarse_params(coarse, &l)?;
            let eps = params.resolve_scale(&l.space)?;
            let r_grid = match params.r_grid {
                Some(g) => g,
                None => default_r_grid(&l.space, &base, eps)?,
            };
            let tp = TowerParams { r_grid, scale: eps, max_degree: coarse.max_degree, ring: coarse.ring };
            let tower = build_complement_tower(&l.space, &base, &tp)?;
            let colimit = colimit_analysis(&tower, coarse.window, coarse.stability).ok();
            let tsv = tower.to_tsv();
            let result = json!({"tower": tower, "colimit": colimit});
            Ok(Outcome { result, tsv: Some(tsv), inputs: space_bytes(&l.space) })
        }
        Command::Coarse { space, coarse } => {
            let l = load_space(space)?;
            let p = coarse_cohomology(&l.space, &coarse_params(coarse, &l)?)?;
            Ok(Outcome { tsv: Some(profile_tsv(&p)), result: json!({"profile": p}), inputs: space_bytes(&l.space) })
        }
        Command::Complement { space, coarse, subset } => {
            let l = load_space(space)?;
            let a = parse_subset(subset, &l)?;
            let p = coarse_cohomology_of_complement(&l.space, &a, &coarse_params(coarse, &l)?)?;
            Ok(Outcome { tsv: Some(profile_tsv(&p)), result: json!({"profile": p}), inputs: space_bytes(&l.space) })
        }
        Command::CheckDa { space, coarse, subset } => {
            let l = load_space(space)?;
            let a = parse_subset(subset, &l)?;
            let rep = consistency_check_da(&l.space, &a, &coarse_params(coarse, &l)?)?;
            let mut tsv = String::from("r\tdegree\tbetti_original\tbetti_quotient\tcomplexes_identical\tcompared\n");
            for st in &rep.stages {
                for (d, (b0, b1)) in st.betti_original.iter().zip(&st.betti_quotient).enumerate() {
                    let _ = writeln!(
                        tsv,
                        "{}\t{d}\t{b0}\t{b1}\t{}\t{}",
                        st.radius, st.complexes_identical, st.compared
                    );
                }
            }
            let verdict = if rep.pass { "PASS" } else { "FAIL" };
            Ok(Outcome { result: json!({"verdict": verdict, "report": rep}), tsv: Some(tsv), inputs: space_bytes(&l.space) })
        }
        Command::CheckAcyclic { space, seed, scale, mu, rho, rho_cap, radii, centers, max_dim, ring } => {
            let l = load_space(space)?;
            let base = Selection::single(l.space.len(), l.space.require_basepoint()?)?;
            let mut rho_f = parse_affine(rho)?;
            if let Some(c) = rho_cap {
                rho_f = rho_f.with_cap(*c)?;
            }
            let controls = ControlFunctions::new(parse_affine(mu)?, rho_f);
            let sample = SampleSpec {
                radii: radii.as_deref().map(parse_list::<f64>).transpose()?,
                centers_per_radius: *centers,
                seed: *seed,
            };
            let eps = scale_of(&l, *scale)?;
            let rep = check_acyclicity_at_infinity(&l.space, &base, &controls, &sample, eps, *max_dim, *ring)?;
            let mut tsv = String::from("center\tball_radius\tdiameter\tneighborhood_radius\tdegree\n");
            for v in &rep.violations {
                let _ = writeln!(
                    tsv,
                    "{}\t{}\t{}\t{}\t{}",
                    v.center, v.ball_radius, v.diameter, v.neighborhood_radius, v.degree
                );
            }
            let verdict = if rep.pass { "PASS" } else { "FAIL" };
            Ok(Outcome { result: json!({"verdict": verdict, "report": rep}), tsv: Some(tsv), inputs: space_bytes(&l.space) })
        }
        Command::Fill { space, scale, mu, width, max_dim, cap, audit, simplices, cochain, margin, ball_cap, ring } => {
            let l = load_space(space)?;
            let eps = scale_of(&l, *scale)?;
            let opts = FillingOptions { scale: eps, cap: *cap, audit: *audit };
            let mu = parse_affine(mu)?;
            let width = width.unwrap_or(eps);
            let mut inputs = space_bytes(&l.space);
            if let Some(path) = cochain {
                if !simplices.is_empty() {
                    return Err(usage("--cochain and --simplex are exclusive"));
                }
                let text = read_text(path)?;
                inputs.extend_from_slice(text.as_bytes());
                let file = parse_cochain_file(&text)?;
                let spec = FarSubcomplexSpec::at_basepoint(&l.space, mu, width, file.degree)?;
                let f = OperatorArgs { file: &file, spec: &spec, opts: &opts, margin: *margin, ball_cap: *ball_cap };
                let (result, tsv) = match file.ring {
                    Ring::Gf2 => operator_audit::<Gf2>(&l.space, &f)?,
                    Ring::Rational => operator_audit::<BigRational>(&l.space, &f)?,
                    Ring::Integer => return Err(usage("the operator audit needs a field (gf2 or q)")),
                };
                return Ok(Outcome { result, tsv: Some(tsv), inputs });
            }
            let domain = if simplices.is_empty() {
                FarSubcomplexSpec::at_basepoint(&l.space, mu, width, *max_dim)?.domain(&l.space)
            } else {
                let seeds = simplices.iter().map(|s| parse_list::<PointId>(s)).collect::<Result<Vec<_>, _>>()?;
                if let Some(bad) = seeds.iter().flatten().find(|&&p| p >= l.space.len()) {
                    return Err(CliError::Compute(coarsecoh::Error::PointOutOfRange(*bad)));
                }
                if seeds.iter().any(Vec::is_empty) {
                    return Err(usage("--simplex needs at least one point"));
                }
                face_closure(&seeds)
            };
            let (result, tsv) = match ring {
                Ring::Gf2 => fill_report(fill_domain::<Gf2>(&l.space, domain, None, &opts)?),
                Ring::Rational => fill_report(fill_domain::<BigRational>(&l.space, domain, None, &opts)?),
                Ring::Integer => return Err(usage("fillings need a field (gf2 or q)")),
            };
            Ok(Outcome { result, tsv: Some(tsv), inputs })
        }
        Command::VerifyHomotopy { space, seed, count, scale, shift, max_dim, ring } => {
            let l = load_space(space)?;
            let eps = scale_of(&l, *scale)?;
            let shift = shift.unwrap_or(2.0 * eps);
            let (result, tsv) = match ring {
                Ring::Gf2 => homotopy_suite::<Gf2>(&l.space, eps, shift, *max_dim, *count, *seed)?,
                Ring::Rational => homotopy_suite::<BigRational>(&l.space, eps, shift, *max_dim, *count, *seed)?,
                Ring::Integer => homotopy_suite::<BigInt>(&l.space, eps, shift, *max_dim, *count, *seed)?,
            };
            Ok(Outcome { result, tsv: Some(tsv), inputs: space_bytes(&l.space) })
        }
        Command::FullCochain { space, max_degree, ring } => {
            let l = load_space(space)?;
            let groups = full_complex_cohomology(&l.space, *max_degree, *ring)?;
            let betti: Vec<usize> = groups.iter().map(|g| g.free_rank).collect();
            let result = json!({"ring": ring, "betti": betti, "groups": groups});
            Ok(Outcome { result, tsv: Some(groups_tsv(&groups)), inputs: space_bytes(&l.space) })
        }
        Command::Replay { .. } => Err(usage("replay is handled by the driver")),
    }
}

fn fill_report<F: Field>(r: FillingResult<F>) -> (Value, String) {
    let mut tsv = String::from("degree\tgenerators\trealized_radius\tcertificate_at_0\n");
    for n in 0..=r.map.max_dim() {
        let _ = writeln!(
            tsv,
            "{n}\t{}\t{}\t{}",
            r.map.domain_len(n),
            r.realized_radius.get(n).copied().unwrap_or(0.0),
            r.map.certificate(n).eval(0.0)
        );
    }
    let result = json!({
        "failures": r.failures,
        "realized_radius": r.realized_radius,
        "map": r.map.to_record(),
    });
    (result, tsv)
}

struct OperatorArgs<'a> {
    file: &'a CochainFile,
    spec: &'a FarSubcomplexSpec,
    opts: &'a FillingOptions,
    margin: f64,
    ball_cap: f64,
}

fn operator_audit<F: Field>(space: &FiniteMetricSpace, a: &OperatorArgs) -> Result<(Value, String), CliError> {
    let phi = a.file.to_cochain::<F>(space.len())?;
    let cover = adapted_cover(space, &phi, &a.spec.base, a.margin, a.ball_cap)?;
    let s = cover_filling_s::<F>(space, a.spec, &cover, a.opts)?.map;
    let g = cone_homotopy_d(&s, phi.degree())?;
    let out = operator_t(space, &phi, &g, &s, &cover, a.spec)?;
    let mut tsv = String::from("claim\tpass\tchecked\tbound\tviolations\n");
    for c in [&out.audit.claim_a, &out.audit.claim_b, &out.audit.claim_c] {
        let _ = writeln!(tsv, "{}\t{}\t{}\t{}\t{}", c.claim, c.pass, c.checked, c.bound, c.violations.len());
    }
    let verdict = if out.audit.pass { "PASS" } else { "FAIL" };
    let result = json!({
        "verdict": verdict,
        "audit": out.audit,
        "t_phi": CochainFile::from_cochain(&out.t_phi),
        "d_phi": CochainFile::from_cochain(&out.d_phi),
        "d_dphi": CochainFile::from_cochain(&out.d_dphi),
    });
    Ok((result, tsv))
}

fn homotopy_suite<F: Coeff>(
    space: &FiniteMetricSpace,
    width: f64,
    shift: f64,
    max_dim: usize,
    count: usize,
    seed: u64,
) -> Result<(Value, String), CliError> {
    let domain: Vec<_> = (0..=max_dim).map(|n| tuples_of_width(space, None, width, n)).collect();
    let mut rows = Vec::with_capacity(count);
    let mut tsv = String::from("map\tseed\tidentity_failures\tsupport_failures\n");
    let mut failures = 0;
    for i in 0..count {
        let s = seed.wrapping_add(i as u64);
        let f = random_controlled_map::<F>(space, &domain, shift, s)?;
        let h = cone_homotopy_d(&f, max_dim)?;
        let id = h.identity_failures(&f);
        let sup = h.support_failures(space, &f);
        failures += id.len() + sup.len();
        let _ = writeln!(tsv, "{i}\t{s}\t{}\t{}", id.len(), sup.len());
        rows.push(json!({"seed": s, "identity_failures": id, "support_failures": sup}));
    }
    let generators: Vec<usize> = domain.iter().map(Vec::len).collect();
    let verdict = if failures == 0 { "PASS" } else { "FAIL" };
    let result = json!({
        "verdict": verdict,
        "ring": F::RING,
        "width": width,
        "shift": shift,
        "generators": generators,
        "failures": failures,
        "maps": rows,
    });
    Ok((result, tsv))
}
