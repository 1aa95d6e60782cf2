//! Pipelines behind each subcommand. Nothing here touches the disk.

use qglab_core::coset::{coset_suite, summarize, IdentityCheck};
use qglab_core::graph::{BondLengths, Graph};
use qglab_core::linalg::Csr;
use qglab_core::massive::{
    b_magnitude_stats, chain_product_check, diag_w_average, higher_order_values, offdiag_w_stats, source_term_value,
    HigherOrderCase, ScalingSeries,
};
use qglab_core::perron::{spectral_gap, GapMethod, PfOperator, PfResolvent};
use qglab_core::rng::derive_seed;
use qglab_core::scattering::{BondScatteringMatrix, MagneticPhases, QuantumMap};
use qglab_core::spectral::{cue_reference, deviation, first_order_average, form_factor};
use qglab_core::wick::{
    enumerate_contractions, evaluate_brute_force, evaluate_network, evaluate_term, ContractionTerm, Factor,
    SymbolicForm, TracePattern, WSet,
};
use qglab_core::{BondScatteringMatrix64, PropagationMatrix64};
use serde_json::json;

use crate::config::{Config, Family};
use crate::output::{float, Series, Table};
use crate::report::{Criterion, CriterionId, Outcome, RunReport, TaskFailure};
use crate::{CliError, Command};

/// Wavenumber at which unitarity of the quantum map is checked.
const CHECK_WAVENUMBER: f64 = 1.0;
/// Stream tags separating the seeds of different consumers.
const GRAPH_STREAM: u64 = 1;
const LENGTH_STREAM: u64 = 2;
const PHASE_STREAM: u64 = 3;
const CHAIN_STREAM: u64 = 4;
const FORM_FACTOR_STREAM: u64 = 5;
const COSET_STREAM: u64 = 6;

/// Term counts of the three source patterns.
pub const EXPECTED_COUNTS: [(&str, usize); 3] = [("m0", 1), ("m1n2", 2), ("m2n22", 6)];

type CoreResult<T> = qglab_core::Result<T>;

fn stream(seed: u64, tag: u64, index: u64) -> u64 {
    derive_seed(derive_seed(seed, tag), index)
}

/// One graph of the configured family and its scattering data.
pub struct Member {
    pub vertices: usize,
    pub graph: Graph,
    pub sigma: BondScatteringMatrix64,
    pub bcal: PropagationMatrix64,
}

pub fn member(cfg: &Config, family: Family, vertices: usize) -> CoreResult<Member> {
    let seed = cfg.seed.unwrap_or_default();
    let graph = match family {
        Family::Complete => Graph::complete(vertices)?,
        Family::Regular => Graph::random_regular(vertices, cfg.graph.degree, stream(seed, GRAPH_STREAM, vertices as u64))?,
    };
    let sigma = BondScatteringMatrix::uniform(&graph, cfg.graph.vertex)?;
    let bcal = PropagationMatrix64::from_bond_scattering(&sigma);
    Ok(Member { vertices, graph, sigma, bcal })
}

fn lengths(cfg: &Config, bonds: usize, index: u64) -> CoreResult<BondLengths<f64>> {
    let [lo, hi] = cfg.graph.lengths;
    BondLengths::sample(bonds, lo, hi, stream(cfg.seed.unwrap_or_default(), LENGTH_STREAM, index))
}

/// `max` that keeps a NaN, so a broken value can never pass a threshold.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn run(command: Command, cfg: &Config) -> Result<Outcome, CliError> {
    cfg.validate()?;
    match command {
        Command::GapSweep => gap_sweep(cfg),
        Command::WStats => w_stats(cfg),
        Command::SourceScaling => source_scaling(cfg),
        Command::ContractionCheck => contraction_check(cfg),
        Command::CosetVerify => coset_verify(cfg),
        Command::FormFactor => form_factor_run(cfg),
    }
}

struct GapRow {
    vertices: usize,
    bonds: usize,
    gap: f64,
    lambda_sub: f64,
    method: GapMethod,
    sigma_defect: f64,
    bcal_defect: f64,
    u_defect: f64,
    bistochastic_defect: f64,
    perron_residual: f64,
}

fn gap_row(cfg: &Config, v: usize) -> CoreResult<GapRow> {
    let m = member(cfg, cfg.graph.family, v)?;
    let bonds = m.graph.bond_count();
    let seed = cfg.seed.unwrap_or_default();
    let l = lengths(cfg, bonds, v as u64)?;
    let phases = MagneticPhases::sample(2 * bonds, stream(seed, PHASE_STREAM, v as u64));
    let u = QuantumMap::new(&m.bcal, &l, &phases, CHECK_WAVENUMBER)?;
    let f = PfOperator::from_propagation(&m.bcal)?;
    let g = spectral_gap(&f, cfg.gap.method)?;
    Ok(GapRow {
        vertices: v,
        bonds,
        gap: g.gap,
        lambda_sub: g.lambda_sub,
        method: g.method,
        sigma_defect: Csr::from_dense(m.sigma.matrix()).unitarity_defect(),
        bcal_defect: Csr::from_dense(m.bcal.matrix()).unitarity_defect(),
        u_defect: u.to_csr().unitarity_defect(),
        bistochastic_defect: f.bistochastic_defect(),
        perron_residual: f.perron_residual(),
    })
}

fn gap_sweep(cfg: &Config) -> Result<Outcome, CliError> {
    let tol = &cfg.tolerances;
    let mut main = Table::new("", &["V", "B", "twoB", "gap_a", "lambda_sub", "method"]);
    let mut structure = Table::new(
        "structure",
        &["V", "twoB", "sigma_unitarity", "bcal_unitarity", "u_unitarity", "bistochastic", "perron_residual"],
    );
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for &v in cfg.gap_sizes() {
        match gap_row(cfg, v) {
            Ok(r) => rows.push(r),
            Err(e) => failures.push(TaskFailure { task: format!("V={v}"), error: e.to_string() }),
        }
    }
    for r in &rows {
        main.push(vec![
            r.vertices.to_string(),
            r.bonds.to_string(),
            (2 * r.bonds).to_string(),
            float(r.gap),
            float(r.lambda_sub),
            r.method.tag().into(),
        ]);
        structure.push(vec![
            r.vertices.to_string(),
            (2 * r.bonds).to_string(),
            float(r.sigma_defect),
            float(r.bcal_defect),
            float(r.u_defect),
            float(r.bistochastic_defect),
            float(r.perron_residual),
        ]);
    }
    let worst = |f: fn(&GapRow) -> f64| rows.iter().map(f).fold(0.0, nan_max);
    let unitarity = worst(|r| nan_max(nan_max(r.sigma_defect, r.bcal_defect), r.u_defect));
    let bistochastic = worst(|r| r.bistochastic_defect);
    let perron = worst(|r| r.perron_residual);
    let min_gap = rows.iter().map(|r| r.gap).fold(f64::INFINITY, nan_min);
    let complete = failures.is_empty() && !rows.is_empty();
    let criteria = vec![
        Criterion::new(
            CriterionId::StructuralExactness,
            complete && unitarity <= tol.structural && bistochastic <= tol.structural && perron < tol.perron,
            format!("unitarity {} bistochastic {} perron {}", sci(unitarity), sci(bistochastic), sci(perron)),
        ),
        Criterion::new(
            CriterionId::GapPersistence,
            complete && min_gap >= tol.gap_threshold,
            format!("min gap {} threshold {}", sci(min_gap), sci(tol.gap_threshold)),
        ),
    ];
    let summary = json!({
        "min_gap": min_gap,
        "max_unitarity_defect": unitarity,
        "max_bistochastic_defect": bistochastic,
        "max_perron_residual": perron,
    });
    let series = Series::new("", "twoB", "gap_a", rows.iter().map(|r| ((2 * r.bonds) as f64, r.gap)).collect());
    Ok(Outcome {
        report: RunReport::new("gap-sweep", cfg, criteria, failures, summary),
        tables: vec![main, structure],
        series: vec![series],
    })
}

struct WRow {
    vertices: usize,
    bonds: usize,
    gap: f64,
    trace_w: f64,
    trace_w_spectral: f64,
    trace_w2: f64,
    trace_w2_spectral: f64,
    diag: f64,
    offdiag_ratio: f64,
    offdiag_checks: bool,
    chain_ratio: f64,
    row_sum_defect: f64,
    flatness: f64,
}

fn w_row(cfg: &Config, v: usize) -> CoreResult<WRow> {
    let m = member(cfg, cfg.graph.family, v)?;
    let f = PfOperator::from_propagation(&m.bcal)?;
    let g = spectral_gap(&f, GapMethod::Dense)?;
    let res = PfResolvent::with_floor(&f, &g, cfg.tolerances.gap_floor)?;
    let ws = res.w_series(2)?;
    let spectral = |p| {
        g.resolvent_power_sum(p)
            .map(|s| s.re)
            .ok_or_else(|| qglab_core::Error::InternalConsistency("dense gap without spectrum".into()))
    };
    let diag = diag_w_average(&ws[0], &g)?;
    let off = offdiag_w_stats(&ws[0], g.gap);
    let seed = stream(cfg.seed.unwrap_or_default(), CHAIN_STREAM, v as u64);
    let chain = chain_product_check(&res, cfg.w_stats.chain_order, cfg.w_stats.chain_samples, seed)?;
    Ok(WRow {
        vertices: v,
        bonds: m.graph.bond_count(),
        gap: g.gap,
        trace_w: ws[0].matrix().trace(),
        trace_w_spectral: spectral(1)?,
        trace_w2: ws[1].matrix().trace(),
        trace_w2_spectral: spectral(2)?,
        diag: diag.values[0],
        offdiag_ratio: off.ratio,
        offdiag_checks: off.all_passed(),
        chain_ratio: chain.median_abs_ratio,
        row_sum_defect: ws[0].row_sum_defect(),
        flatness: b_magnitude_stats(&m.bcal).flatness_exponent,
    })
}

fn w_stats(cfg: &Config) -> Result<Outcome, CliError> {
    let mut table = Table::new(
        "",
        &[
            "V",
            "B",
            "twoB",
            "gap_a",
            "trace_w",
            "trace_w_spectral",
            "trace_w2",
            "trace_w2_spectral",
            "diag",
            "offdiag_ratio",
            "chain_ratio",
            "row_sum_defect",
            "flatness",
        ],
    );
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for &v in &cfg.w_stats.sizes {
        match w_row(cfg, v) {
            Ok(r) => rows.push(r),
            Err(e) => failures.push(TaskFailure { task: format!("V={v}"), error: e.to_string() }),
        }
    }
    for r in &rows {
        table.push(vec![
            r.vertices.to_string(),
            r.bonds.to_string(),
            (2 * r.bonds).to_string(),
            float(r.gap),
            float(r.trace_w),
            float(r.trace_w_spectral),
            float(r.trace_w2),
            float(r.trace_w2_spectral),
            float(r.diag),
            float(r.offdiag_ratio),
            float(r.chain_ratio),
            float(r.row_sum_defect),
            float(r.flatness),
        ]);
    }
    let worst = rows
        .iter()
        .map(|r| (r.trace_w - r.trace_w_spectral).abs().max((r.trace_w2 - r.trace_w2_spectral).abs()))
        .fold(0.0, nan_max);
    let passed = failures.is_empty() && !rows.is_empty() && worst <= cfg.tolerances.resolvent;
    let criteria = vec![Criterion::new(
        CriterionId::ResolventConsistency,
        passed,
        format!("max trace deviation {} tolerance {}", sci(worst), sci(cfg.tolerances.resolvent)),
    )];
    let summary = json!({
        "max_trace_deviation": worst,
        "offdiag_checks_passed": rows.iter().all(|r| r.offdiag_checks),
    });
    let series = Series::new("", "twoB", "diag", rows.iter().map(|r| ((2 * r.bonds) as f64, r.diag)).collect());
    Ok(Outcome {
        report: RunReport::new("w-stats", cfg, criteria, failures, summary),
        tables: vec![table],
        series: vec![series],
    })
}

struct SourceRow {
    vertices: usize,
    bonds: usize,
    gap: f64,
    value: f64,
    bound: f64,
    m1n2: Vec<f64>,
    m2n22: Vec<f64>,
}

fn source_row(cfg: &Config, v: usize) -> CoreResult<SourceRow> {
    let m = member(cfg, cfg.graph.family, v)?;
    let f = PfOperator::from_propagation(&m.bcal)?;
    let g = spectral_gap(&f, cfg.gap.method)?;
    let res = PfResolvent::with_floor(&f, &g, cfg.tolerances.gap_floor)?;
    let ws = res.w_series(3)?;
    let st = source_term_value(&ws[0], &ws[1], &g)?;
    Ok(SourceRow {
        vertices: v,
        bonds: st.bonds,
        gap: g.gap,
        value: st.value,
        bound: st.bound,
        m1n2: higher_order_values(&ws, HigherOrderCase::M1n2)?,
        m2n22: higher_order_values(&ws, HigherOrderCase::M2n22)?,
    })
}

/// Indices (zero-based) of the higher-order sums expected to dominate.
pub const DOMINANT_TERMS: [usize; 4] = [0, 2, 4, 5];

/// True when every dominant sum exceeds every other sum in magnitude.
pub fn dominance(values: &[f64]) -> bool {
    let (dom, rest): (Vec<_>, Vec<_>) = values.iter().enumerate().partition(|(i, _)| DOMINANT_TERMS.contains(i));
    let low = dom.iter().map(|(_, v)| v.abs()).fold(f64::INFINITY, nan_min);
    let high = rest.iter().map(|(_, v)| v.abs()).fold(0.0, nan_max);
    low > high
}

fn source_scaling(cfg: &Config) -> Result<Outcome, CliError> {
    let tol = &cfg.tolerances;
    let mut main = Table::new("", &["B", "T_value", "bound", "slope_running"]);
    let mut terms = Table::new(
        "terms",
        &[
            "V", "B", "twoB", "gap_a", "m1n2_1", "m1n2_2", "m2n22_1", "m2n22_2", "m2n22_3", "m2n22_4", "m2n22_5",
            "m2n22_6",
        ],
    );
    let mut failures = Vec::new();
    let mut rows: Vec<SourceRow> = Vec::new();
    for &v in cfg.source_sizes() {
        match source_row(cfg, v) {
            Ok(r) => rows.push(r),
            Err(e) => failures.push(TaskFailure { task: format!("V={v}"), error: e.to_string() }),
        }
    }
    for (i, r) in rows.iter().enumerate() {
        let running = if i == 0 {
            String::new()
        } else {
            let p = &rows[i - 1];
            float((r.value / p.value).ln() / (r.bonds as f64 / p.bonds as f64).ln())
        };
        main.push(vec![r.bonds.to_string(), float(r.value), float(r.bound), running]);
        let mut row = vec![r.vertices.to_string(), r.bonds.to_string(), (2 * r.bonds).to_string(), float(r.gap)];
        row.extend(r.m1n2.iter().chain(&r.m2n22).map(|&x| float(x)));
        terms.push(row);
    }
    let t_fit = ScalingSeries::fit(rows.iter().map(|r| (r.bonds, r.value)).collect());
    let term_fit = ScalingSeries::fit(rows.iter().map(|r| (2 * r.bonds, r.m1n2[0])).collect());
    let largest = rows.iter().max_by_key(|r| r.bonds);
    let dominant = largest.is_some_and(|r| dominance(&r.m2n22));
    let slope_ok = |fit: &qglab_core::Result<ScalingSeries<f64>>, tol: f64| {
        fit.as_ref().is_ok_and(|s| (s.slope + 1.0).abs() <= tol && s.sign_consistent)
    };
    let t_ok = slope_ok(&t_fit, tol.slope);
    let term_ok = slope_ok(&term_fit, tol.term_slope);
    let slope_of = |fit: &qglab_core::Result<ScalingSeries<f64>>| fit.as_ref().map(|s| s.slope).ok();
    let detail = format!(
        "T slope {} term slope {} dominance at largest size {}",
        slope_of(&t_fit).map_or("n/a".into(), sci),
        slope_of(&term_fit).map_or("n/a".into(), sci),
        dominant
    );
    let criteria = vec![Criterion::new(
        CriterionId::DecaySlopes,
        failures.is_empty() && t_ok && term_ok && dominant,
        detail,
    )];
    let summary = json!({
        "t_slope": slope_of(&t_fit),
        "t_slope_passed": t_ok,
        "term_slope": slope_of(&term_fit),
        "term_slope_passed": term_ok,
        "dominant_terms": DOMINANT_TERMS.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "dominance_passed": dominant,
        "largest_size_terms": largest.map(|r| r.m2n22.clone()),
    });
    let series = Series::new("", "B", "T_value", rows.iter().map(|r| (r.bonds as f64, r.value)).collect());
    Ok(Outcome {
        report: RunReport::new("source-scaling", cfg, criteria, failures, summary),
        tables: vec![main, terms],
        series: vec![series],
    })
}

/// Direct-formula forms, in the order returned by `higher_order_values`.
pub fn direct_forms(case: HigherOrderCase) -> Vec<SymbolicForm> {
    use Factor::W;
    let w1 = W(1);
    let w2 = W(2);
    let w3 = W(3);
    let lists: Vec<Vec<(Factor, usize, usize)>> = match case {
        HigherOrderCase::M1n2 => vec![vec![(w3, 0, 0), (w1, 0, 0)], vec![(w2, 0, 0), (w2, 0, 0)]],
        HigherOrderCase::M2n22 => vec![
            vec![(w3, 0, 0), (w1, 0, 1), (w1, 1, 0), (w1, 1, 1)],
            vec![(w3, 0, 1), (w1, 1, 0), (w1, 1, 0), (w1, 0, 1)],
            vec![(w1, 0, 0), (w3, 0, 1), (w1, 1, 0), (w1, 1, 1)],
            vec![(w2, 0, 1), (w2, 1, 0), (w1, 0, 1), (w1, 1, 0)],
            vec![(w2, 0, 0), (w1, 0, 1), (w1, 1, 0), (w2, 1, 1)],
            vec![(w1, 0, 0), (w2, 0, 1), (w2, 1, 0), (w1, 1, 1)],
        ],
    };
    let vars = |l: &[(Factor, usize, usize)]| l.iter().map(|e| e.1.max(e.2) + 1).max().unwrap_or(1);
    lists.iter().map(|l| SymbolicForm::from_edges(vars(l), l)).collect()
}

fn patterns() -> CoreResult<Vec<(&'static str, TracePattern)>> {
    Ok(vec![
        ("m0", TracePattern::standard(&[], &[])?),
        ("m1n2", TracePattern::standard(&[2], &[])?),
        ("m2n22", TracePattern::standard(&[2, 2], &[])?),
    ])
}

struct Comparison {
    pattern: &'static str,
    direct_index: usize,
    direct: f64,
    matched: Option<(usize, f64)>,
}

fn contraction_check(cfg: &Config) -> Result<Outcome, CliError> {
    let tol = cfg.tolerances.evaluator;
    let pats = patterns()?;
    let mut enumerated: Vec<(&str, Vec<ContractionTerm>)> = Vec::new();
    for (name, p) in &pats {
        enumerated.push((name, enumerate_contractions(p)?));
    }
    let counts: Vec<(&str, usize)> = enumerated.iter().map(|(n, t)| (*n, t.len())).collect();
    let counts_ok = counts.iter().zip(EXPECTED_COUNTS).all(|(a, b)| a.1 == b.1);

    let m = member(cfg, Family::Complete, cfg.contraction.vertices)?;
    let f = PfOperator::from_propagation(&m.bcal)?;
    let g = spectral_gap(&f, cfg.gap.method)?;
    let ws = PfResolvent::with_floor(&f, &g, cfg.tolerances.gap_floor)?.w_series(3)?;
    let set = WSet::new(&ws, Some(&m.bcal));
    let bonds = m.graph.bond_count() as f64;
    let pre = 1.0 / (bonds * bonds);

    let w = ws[0].matrix();
    let mut direct: Vec<(&'static str, Vec<SymbolicForm>, Vec<f64>)> = vec![(
        "m0",
        vec![SymbolicForm::from_edges(2, &[(Factor::W(1), 0, 1), (Factor::W(1), 1, 0)])],
        vec![w.matmul(w).trace() * pre],
    )];
    direct.push(("m1n2", direct_forms(HigherOrderCase::M1n2), higher_order_values(&ws, HigherOrderCase::M1n2)?));
    direct.push(("m2n22", direct_forms(HigherOrderCase::M2n22), higher_order_values(&ws, HigherOrderCase::M2n22)?));

    let mut comparisons = Vec::new();
    for (name, forms, values) in &direct {
        let terms = &enumerated.iter().find(|(n, _)| n == name).expect("pattern present").1;
        for (k, (form, &value)) in forms.iter().zip(values).enumerate() {
            let matched = match terms.iter().find(|t| &t.form == form) {
                Some(t) => Some((t.id, evaluate_term(t, set, pre)?.class_value.re)),
                None => None,
            };
            comparisons.push(Comparison { pattern: name, direct_index: k + 1, direct: value, matched });
        }
    }
    let direct_dev = comparisons
        .iter()
        .map(|c| c.matched.map_or(f64::INFINITY, |(_, v)| (v - c.direct).abs()))
        .fold(0.0, nan_max);
    let unmatched: Vec<String> = comparisons
        .iter()
        .filter(|c| c.matched.is_none())
        .map(|c| format!("{}#{}", c.pattern, c.direct_index))
        .collect();

    let small = member(cfg, Family::Complete, cfg.contraction.brute_force_vertices)?;
    let fs = PfOperator::from_propagation(&small.bcal)?;
    let gs = spectral_gap(&fs, GapMethod::Dense)?;
    let ws_small = PfResolvent::with_floor(&fs, &gs, cfg.tolerances.gap_floor)?.w_series(3)?;
    let set_small = WSet::new(&ws_small, Some(&small.bcal));

    let mut table = Table::new(
        "",
        &["pattern", "term_id", "multiplicity", "form", "value", "brute_force_diff", "direct_index", "direct_value", "direct_diff"],
    );
    let mut brute_dev: f64 = 0.0;
    let mut terms_json = Vec::new();
    for (name, terms) in &enumerated {
        for t in terms {
            let value = evaluate_term(t, set, pre)?;
            let net = t.form.network();
            let bf = (evaluate_brute_force(net, set_small)? - evaluate_network(net, set_small)?).norm();
            brute_dev = brute_dev.max(bf);
            let cmp = comparisons.iter().find(|c| c.pattern == *name && c.matched.map(|m| m.0) == Some(t.id));
            let (idx, dv, dd) = match cmp {
                Some(c) => (c.direct_index.to_string(), float(c.direct), float((value.class_value.re - c.direct).abs())),
                None => (String::new(), String::new(), String::new()),
            };
            table.push(vec![
                name.to_string(),
                t.id.to_string(),
                t.multiplicity.to_string(),
                value.form.clone(),
                float(value.class_value.re),
                float(bf),
                idx,
                dv,
                dd,
            ]);
            terms_json.push(json!({
                "pattern": name,
                "term_id": t.id,
                "multiplicity": t.multiplicity,
                "form": value.form,
                "value": value.class_value.re,
                "imag": value.class_value.im,
            }));
        }
    }
    let count_map: serde_json::Map<String, serde_json::Value> =
        counts.iter().map(|(n, c)| (n.to_string(), json!(c))).collect();
    let expected_map: serde_json::Map<String, serde_json::Value> =
        EXPECTED_COUNTS.iter().map(|(n, c)| (n.to_string(), json!(c))).collect();
    let criteria = vec![
        Criterion::new(
            CriterionId::ContractionCounts,
            counts_ok,
            counts.iter().zip(EXPECTED_COUNTS).map(|(a, b)| format!("{} {} (expected {})", a.0, a.1, b.1)).collect::<Vec<_>>().join(", "),
        ),
        Criterion::new(
            CriterionId::EvaluatorEquivalence,
            unmatched.is_empty() && direct_dev <= tol && brute_dev <= tol,
            format!(
                "direct {} brute force {} unmatched [{}]",
                sci(direct_dev),
                sci(brute_dev),
                unmatched.join(" ")
            ),
        ),
    ];
    let summary = json!({
        "counts": count_map,
        "expected": expected_map,
        "direct_max_deviation": direct_dev,
        "brute_force_max_deviation": brute_dev,
        "unmatched_direct_terms": unmatched,
        "twoB": 2 * m.graph.bond_count(),
        "terms": terms_json,
    });
    Ok(Outcome {
        report: RunReport::new("contraction-check", cfg, criteria, Vec::new(), summary),
        tables: vec![table],
        series: Vec::new(),
    })
}

fn coset_verify(cfg: &Config) -> Result<Outcome, CliError> {
    let tol = cfg.tolerances.identity;
    let seed = cfg.seed()?;
    let mut table = Table::new("", &["generators", "identity", "max_deviation", "tolerance", "passed", "seed"]);
    let mut failures = Vec::new();
    let mut per_gens = Vec::new();
    let mut all: Vec<IdentityCheck> = Vec::new();
    for &gens in &cfg.coset.generators {
        match coset_suite::<f64>(gens, cfg.coset.profile, cfg.coset.points, stream(seed, COSET_STREAM, gens as u64)) {
            Ok(checks) => {
                for c in &checks {
                    table.push(vec![
                        gens.to_string(),
                        c.identity.into(),
                        float(c.max_deviation),
                        float(tol),
                        (c.max_deviation <= tol).to_string(),
                        c.seed.to_string(),
                    ]);
                }
                let worst: Vec<_> = summarize(&checks)
                    .into_iter()
                    .map(|c| json!({ "identity": c.identity, "max_deviation": c.max_deviation, "seed": c.seed }))
                    .collect();
                per_gens.push(json!({ "generators": gens, "worst": worst }));
                all.extend(checks);
            }
            Err(e) => failures.push(TaskFailure { task: format!("G={gens}"), error: e.to_string() }),
        }
    }
    let worst = all.iter().map(|c| c.max_deviation).fold(0.0, nan_max);
    let failing: Vec<&str> = summarize(&all).into_iter().filter(|c| !(c.max_deviation <= tol)).map(|c| c.identity).collect();
    let criteria = vec![Criterion::new(
        CriterionId::CosetIdentities,
        failures.is_empty() && !all.is_empty() && failing.is_empty(),
        format!("{} checks, worst {} tolerance {} failing [{}]", all.len(), sci(worst), sci(tol), failing.join(" ")),
    )];
    let summary = json!({ "checks": all.len(), "max_deviation": worst, "per_generators": per_gens });
    let series = Series::new(
        "",
        "check",
        "max_deviation",
        all.iter().enumerate().map(|(i, c)| (i as f64, c.max_deviation)).collect(),
    );
    Ok(Outcome {
        report: RunReport::new("coset-verify", cfg, criteria, failures, summary),
        tables: vec![table],
        series: vec![series],
    })
}

fn form_factor_run(cfg: &Config) -> Result<Outcome, CliError> {
    let ff = &cfg.form_factor;
    let tol = &cfg.tolerances;
    let m = member(cfg, Family::Complete, ff.vertices)?;
    let two_b = m.bcal.dim();
    let n_max = if ff.n_max == 0 { 2 * two_b } else { ff.n_max };
    let l = lengths(cfg, m.graph.bond_count(), ff.vertices as u64)?;
    let seed = stream(cfg.seed()?, FORM_FACTOR_STREAM, ff.vertices as u64);
    let curve = form_factor(&m.bcal, &l, n_max, ff.samples, seed)?;
    let [lo, hi] = ff.window;
    let hi = if hi == 0 { n_max } else { hi };
    let dev = deviation(&curve, |n| cue_reference(n, two_b), lo, hi)?;
    let first_exact = first_order_average(&m.bcal);
    let (k1, se1) = (curve.k[0], curve.stderr[0]);
    let first_ok = (k1 - first_exact).abs() <= tol.first_point_sigmas * se1;

    let mut table = Table::new("", &["n", "K", "stderr", "cue"]);
    for i in 0..curve.len() {
        let n = curve.n[i];
        table.push(vec![n.to_string(), float(curve.k[i]), float(curve.stderr[i]), float(cue_reference(n, two_b))]);
    }
    let criteria = vec![Criterion::new(
        CriterionId::Universality,
        dev < tol.universality && first_ok,
        format!(
            "deviation {} tolerance {} K(1) {} exact {} stderr {}",
            sci(dev),
            sci(tol.universality),
            sci(k1),
            sci(first_exact),
            sci(se1)
        ),
    )];
    let summary = json!({
        "twoB": two_b,
        "n_max": n_max,
        "window": [lo, hi],
        "samples": ff.samples,
        "deviation": dev,
        "first_point": { "k": k1, "exact": first_exact, "stderr": se1, "passed": first_ok },
    });
    let series = Series::new("", "n", "K", curve.n.iter().zip(&curve.k).map(|(&n, &k)| (n as f64, k)).collect());
    Ok(Outcome {
        report: RunReport::new("form-factor", cfg, criteria, Vec::new(), summary),
        tables: vec![table],
        series: vec![series],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_never_passes() {
        let worst = [1e-16, f64::NAN, 1e-15].into_iter().fold(0.0, nan_max);
        assert!(worst.is_nan());
    }

    #[test]
    fn dominance_rule() {
        assert!(dominance(&[3.0, 1.0, 3.0, 1.0, 3.0, 3.0]));
        assert!(!dominance(&[3.0, 4.0, 3.0, 1.0, 3.0, 3.0]));
        assert!(dominance(&[-3.0, 1.0, 3.0, -1.0, 3.0, 3.0]));
    }

    #[test]
    fn direct_forms_are_distinct() {
        let forms = direct_forms(HigherOrderCase::M2n22);
        for i in 0..forms.len() {
            for j in 0..i {
                assert_ne!(forms[i], forms[j], "{i} {j}");
            }
        }
        assert_eq!(direct_forms(HigherOrderCase::M1n2).len(), 2);
    }

    #[test]
    fn member_seeds_ignore_sweep_position() {
        let cfg = Config::from_toml("seed = 9\n[graph]\nfamily = \"regular\"\ndegree = 3\nsizes = [8, 10]").unwrap();
        let a = member(&cfg, Family::Regular, 10).unwrap();
        let b = member(&cfg, Family::Regular, 10).unwrap();
        assert_eq!(a.graph.edges(), b.graph.edges());
        assert_eq!(a.bcal.dim(), 30);
    }
}
