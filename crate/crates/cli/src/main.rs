use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use random_facet::exact::linext::MAX_ENUM_UNIVERSE;
use random_facet::exact::{
    comptree_shaped, count_linear_extensions_bounded, expected_pivots_rf_star_with, expected_pivots_rf_with,
    ConstraintSet, ExactConfig, Shape, DEFAULT_MAX_STAR_FACETS,
};
use random_facet::instances::errata::{rational, TARGET_VALUES};
use random_facet::instances::{load_instance, orientation_view, CubeEncoding};
use random_facet::montecarlo::estimate_expected_pivots;
use random_facet::{
    derive_errata_instance, fraction, optimal_tree, tree_distances, EdgeSubset, Instance, Rational, Rule,
    TreePolicy,
};

const MAX_STAR_FACETS_VAR: &str = "RFACET_MAX_STAR_FACETS";
const MAX_UNIVERSE_VAR: &str = "RFACET_MAX_UNIVERSE";

#[derive(Parser)]
#[command(
    name = "rfacet",
    version,
    about = "Random-Facet and Random-Facet* on shortest-path instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the optimal tree and its distances
    Solve {
        file: PathBuf,
        /// Comma-separated edge ids or names; default all edges
        #[arg(long)]
        facets: Option<String>,
    },
    /// Print the exact expected number of pivots as p/q
    Exact {
        file: PathBuf,
        #[arg(long, value_enum)]
        rule: RuleArg,
        /// Edge list, or a bit string such as 001 on cube-shaped instances
        #[arg(long)]
        tree: String,
        #[arg(long)]
        facets: Option<String>,
    },
    /// Estimate the expected number of pivots by seeded simulation
    Simulate {
        file: PathBuf,
        #[arg(long, value_enum)]
        rule: RuleArg,
        #[arg(long)]
        tree: String,
        #[arg(long)]
        facets: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the probability-annotated computation tree
    Comptree {
        file: PathBuf,
        #[arg(long, value_enum)]
        rule: RuleArg,
        #[arg(long)]
        tree: String,
        #[arg(long)]
        facets: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Show every choice instead of collapsing single-sequence calls
        #[arg(long)]
        full: bool,
        /// Keep the displaced edge in each second recursive call; by default
        /// it is removed, which never changes a pivot sequence
        #[arg(long)]
        keep_leaving_edge: bool,
    },
    /// Count or condition permutations under precedence constraints
    Perms {
        #[arg(value_enum)]
        mode: PermsMode,
        #[arg(long)]
        elements: usize,
        /// Constraints such as "2<3,1<2" or "z0<x1"
        #[arg(long, default_value = "")]
        given: String,
        #[arg(long, default_value = "")]
        query: String,
    },
    /// Recompute every published number on the fixture instance
    VerifyErrata {
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Rf,
    Rfstar,
}

impl From<RuleArg> for Rule {
    fn from(r: RuleArg) -> Rule {
        match r {
            RuleArg::Rf => Rule::Rf,
            RuleArg::Rfstar => Rule::RfStar,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PermsMode {
    Count,
    Cond,
}

/// Failure of a command: exit 1 for failed checks, 2 for bad input.
enum Failure {
    Check,
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { file, facets } => solve(&file, facets.as_deref()),
        Command::Exact {
            file,
            rule,
            tree,
            facets,
        } => exact(&file, rule.into(), &tree, facets.as_deref()),
        Command::Simulate {
            file,
            rule,
            tree,
            facets,
            trials,
            seed,
        } => simulate(&file, rule.into(), &tree, facets.as_deref(), trials, seed),
        Command::Comptree {
            file,
            rule,
            tree,
            facets,
            format,
            full,
            keep_leaving_edge,
        } => print_comptree(
            &file,
            rule.into(),
            &tree,
            facets.as_deref(),
            format,
            full,
            !keep_leaving_edge,
        ),
        Command::Perms {
            mode,
            elements,
            given,
            query,
        } => perms(mode, elements, &given, &query),
        Command::VerifyErrata { fixture } => verify_errata(fixture),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn env_bound(var: &str, default: usize) -> Result<usize, Failure> {
    match std::env::var(var) {
        Ok(v) => v
            .parse()
            .map_err(|_| Failure::Input(format!("{var} must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(default),
    }
}

fn exact_config(drop_leaving_edge: bool) -> Result<ExactConfig, Failure> {
    Ok(ExactConfig {
        max_star_facets: env_bound(MAX_STAR_FACETS_VAR, DEFAULT_MAX_STAR_FACETS)?,
        drop_leaving_edge,
    })
}

fn parse_facets(inst: &Instance, facets: Option<&str>) -> Result<EdgeSubset, Failure> {
    match facets {
        None => Ok(inst.full_subset()),
        Some(list) => Ok(EdgeSubset::from_ids(inst.m(), inst.parse_edge_list(list)?)),
    }
}

fn parse_tree(inst: &Instance, tree: &str) -> Result<TreePolicy, Failure> {
    let is_bits = !tree.is_empty() && tree.len() == inst.n() && tree.chars().all(|c| c == '0' || c == '1');
    if is_bits {
        if let Ok(enc) = CubeEncoding::new(inst) {
            return Ok(enc.decode(inst, tree).expect("length checked"));
        }
    }
    Ok(TreePolicy::from_edges(inst, inst.parse_edge_list(tree)?)?)
}

fn load(file: &Path) -> Result<Instance, Failure> {
    load_instance(file).map_err(|e| Failure::Input(format!("{}: {e}", file.display())))
}

fn solve(file: &Path, facets: Option<&str>) -> Outcome {
    let inst = load(file)?;
    let facets = parse_facets(&inst, facets)?;
    let tree = optimal_tree(&inst, &facets)?;
    let dist = tree_distances(&inst, &tree);
    print!("tree {}", inst.format_edges(tree.edges()));
    if let Some(bits) = CubeEncoding::new(&inst).ok().and_then(|enc| enc.encode(&tree)) {
        print!(" = {bits}");
    }
    println!();
    let mut rows: Vec<(String, String, i64)> = inst
        .non_target_vertices()
        .map(|v| {
            let e = tree.choice(v).expect("every non-target vertex has an edge");
            (inst.vertex_name(v).to_owned(), inst.edge_name(e), dist.get(v))
        })
        .collect();
    rows.sort();
    for (v, e, d) in rows {
        println!("{v} {e} {d}");
    }
    Ok(())
}

fn exact(file: &Path, rule: Rule, tree: &str, facets: Option<&str>) -> Outcome {
    let inst = load(file)?;
    let facets = parse_facets(&inst, facets)?;
    let start = parse_tree(&inst, tree)?;
    let config = exact_config(false)?;
    let value = match rule {
        Rule::Rf => expected_pivots_rf_with(&inst, &facets, &start, config)?,
        Rule::RfStar => expected_pivots_rf_star_with(&inst, &facets, &start, config)?,
    };
    println!("{}", fraction(&value));
    Ok(())
}

fn simulate(file: &Path, rule: Rule, tree: &str, facets: Option<&str>, trials: u64, seed: u64) -> Outcome {
    let inst = load(file)?;
    let facets = parse_facets(&inst, facets)?;
    let start = parse_tree(&inst, tree)?;
    let est = estimate_expected_pivots(&inst, &facets, &start, rule, trials, seed)?;
    println!("{est}");
    Ok(())
}

fn print_comptree(
    file: &Path,
    rule: Rule,
    tree: &str,
    facets: Option<&str>,
    format: Format,
    full: bool,
    drop_leaving_edge: bool,
) -> Outcome {
    let inst = load(file)?;
    let facets = parse_facets(&inst, facets)?;
    let start = parse_tree(&inst, tree)?;
    let shape = if full { Shape::Full } else { Shape::Collapsed };
    let t = comptree_shaped(
        &inst,
        &facets,
        &start,
        rule,
        exact_config(drop_leaving_edge)?,
        shape,
    )?;
    match format {
        Format::Text => print!("{}", t.to_text(&inst)),
        Format::Dot => print!("{}", t.to_dot(&inst)),
    }
    Ok(())
}

/// Element names map to indices: `1..=n` are taken literally, any other
/// name gets the next free index in order of first appearance.
struct Elements {
    n: usize,
    names: HashMap<String, usize>,
    next: usize,
}

impl Elements {
    fn index(&mut self, name: &str) -> Result<usize, Failure> {
        if let Ok(k) = name.parse::<usize>() {
            if (1..=self.n).contains(&k) {
                return Ok(k - 1);
            }
            return Err(Failure::Input(format!("element {k} is outside 1..={}", self.n)));
        }
        if let Some(&i) = self.names.get(name) {
            return Ok(i);
        }
        if self.next >= self.n {
            return Err(Failure::Input(format!(
                "more than {} distinct elements named",
                self.n
            )));
        }
        self.names.insert(name.to_owned(), self.next);
        self.next += 1;
        Ok(self.next - 1)
    }

    fn constraints(&mut self, list: &str) -> Result<ConstraintSet, Failure> {
        let mut set = ConstraintSet::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (a, b) = item
                .split_once('<')
                .ok_or_else(|| Failure::Input(format!("constraint `{item}` is not of the form a<b")))?;
            set.push(self.index(a.trim())?, self.index(b.trim())?);
        }
        Ok(set)
    }
}

fn perms(mode: PermsMode, n: usize, given: &str, query: &str) -> Outcome {
    let mut elements = Elements {
        n,
        names: HashMap::new(),
        next: 0,
    };
    let given = elements.constraints(given)?;
    let query = elements.constraints(query)?;
    let bound = env_bound(MAX_UNIVERSE_VAR, MAX_ENUM_UNIVERSE)?;
    let total = count_linear_extensions_bounded(n, &given, bound)?;
    match mode {
        PermsMode::Count => println!("{total}"),
        PermsMode::Cond => {
            if total == 0 {
                return Err(Failure::Input("the given constraints admit no order".into()));
            }
            let hits = count_linear_extensions_bounded(n, &given.union(&query), bound)?;
            println!("{}", fraction(&Rational::new(hits.into(), total.into())));
        }
    }
    Ok(())
}

fn default_fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/errata-cube.instance")
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, name: &str, expected: &str, got: Result<String, String>) {
        let got = got.unwrap_or_else(|e| format!("error({e})"));
        let pass = got == expected;
        self.failed += usize::from(!pass);
        println!(
            "CHECK {name} expected={expected} got={got} {}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
}

fn verify_errata(fixture: Option<PathBuf>) -> Outcome {
    let path = fixture.unwrap_or_else(default_fixture);
    let inst = if path.exists() {
        load(&path)?
    } else {
        eprintln!("fixture {} not found; deriving the instance", path.display());
        derive_errata_instance()?
    };
    let mut report = Report { failed: 0 };
    run_checks(&inst, &mut report);
    if report.failed > 0 {
        eprintln!("{} check(s) failed", report.failed);
        return Err(Failure::Check);
    }
    Ok(())
}

fn run_checks(inst: &Instance, report: &mut Report) {
    let enc = match CubeEncoding::new(inst) {
        Ok(enc) => enc,
        Err(e) => return report.line("cube_shape", "ok", Err(e.to_string())),
    };
    let enc = &enc;
    let full = inst.full_subset();
    let plain = ExactConfig::default();
    let dropped = ExactConfig {
        drop_leaving_edge: true,
        ..plain
    };
    let start = |bits: &str| {
        enc.decode(inst, bits)
            .ok_or_else(|| format!("no cube vertex {bits}"))
    };
    let f = |bits: &str, rule: Rule, config: ExactConfig| -> Result<Rational, String> {
        let b = start(bits)?;
        match rule {
            Rule::Rf => expected_pivots_rf_with(inst, &full, &b, config),
            Rule::RfStar => expected_pivots_rf_star_with(inst, &full, &b, config),
        }
        .map_err(|e| e.to_string())
    };
    let show = |r: Result<Rational, String>| r.map(|v| fraction(&v));

    let sink = optimal_tree(inst, &full)
        .map_err(|e| e.to_string())
        .map(|t| enc.encode(&t).unwrap_or_default());
    report.line("optimum", "000", sink);
    let view = orientation_view(inst).map_err(|e| e.to_string());
    for bits in ["001", "111"] {
        let paths = view
            .clone()
            .map(|v| v.paths(enc.parse(bits).unwrap(), 0).len().to_string());
        report.line(&format!("paths_{bits}"), "3", paths);
    }
    for (bits, rf, star) in TARGET_VALUES {
        report.line(
            &format!("f_{bits}"),
            &fraction(&rational(rf)),
            show(f(bits, Rule::Rf, plain)),
        );
        report.line(
            &format!("fstar_{bits}"),
            &fraction(&rational(star)),
            show(f(bits, Rule::RfStar, plain)),
        );
    }
    let order = |bits: &str| -> Result<String, String> {
        let (a, b) = (f(bits, Rule::Rf, plain)?, f(bits, Rule::RfStar, plain)?);
        Ok(format!("{:?}", b.cmp(&a)))
    };
    report.line("fstar_vs_f_001", "Greater", order("001"));
    report.line("fstar_vs_f_111", "Less", order("111"));

    let edge = |name: &str| inst.parse_edge_ref(name).map(|e| e.0).map_err(|e| e.to_string());
    let count = |pairs: [(&str, &str); 3]| -> Result<String, String> {
        let mut set = ConstraintSet::new();
        for (a, b) in pairs {
            set.push(edge(a)?, edge(b)?);
        }
        count_linear_extensions_bounded(inst.m(), &set, MAX_ENUM_UNIVERSE)
            .map(|c| c.to_string())
            .map_err(|e| e.to_string())
    };
    report.line(
        "linext_001",
        "150",
        count([("z0", "x1"), ("z0", "y1"), ("y0", "x1")]),
    );
    report.line(
        "linext_111",
        "150",
        count([("z0", "x0"), ("z0", "y0"), ("x1", "y0")]),
    );

    // branch probabilities at the second call after the root pivots z0
    let branch = |bits: &str, rule: Rule, pick: &str, path: bool| -> Result<String, String> {
        let b = start(bits)?;
        let t =
            comptree_shaped(inst, &full, &b, rule, dropped, Shape::Collapsed).map_err(|e| e.to_string())?;
        let z0 = inst.parse_edge_ref("z0").map_err(|e| e.to_string())?;
        let pick = inst.parse_edge_ref(pick).map_err(|e| e.to_string())?;
        let node = t
            .child_via(t.root(), z0)
            .and_then(|c| t.choice_after_pivot(c, z0))
            .ok_or("no choice after the z0 pivot")?;
        let p = if path {
            t.child_via(node, pick)
                .map_or_else(Rational::default, |c| t.path_probability(c))
        } else {
            t.branch_probability(node, pick)
        };
        Ok(fraction(&p))
    };
    report.line("path_001_z0_y0", "5/24", branch("001", Rule::RfStar, "y0", true));
    report.line(
        "pick_001_y0_rfstar",
        "5/8",
        branch("001", Rule::RfStar, "y0", false),
    );
    report.line(
        "pick_001_x1_rfstar",
        "3/8",
        branch("001", Rule::RfStar, "x1", false),
    );
    report.line("pick_001_y0_rf", "1/2", branch("001", Rule::Rf, "y0", false));
    report.line("path_111_z0_x1", "5/24", branch("111", Rule::RfStar, "x1", true));
    report.line(
        "pick_111_x1_rfstar",
        "5/8",
        branch("111", Rule::RfStar, "x1", false),
    );

    let posterior =
        count_linear_extensions_bounded(3, &ConstraintSet::from_pairs([(1, 2)]), MAX_ENUM_UNIVERSE)
            .and_then(|total| {
                let hits = count_linear_extensions_bounded(
                    3,
                    &ConstraintSet::from_pairs([(1, 2), (0, 2)]),
                    MAX_ENUM_UNIVERSE,
                )?;
                Ok(fraction(&Rational::new(hits.into(), total.into())))
            })
            .map_err(|e| e.to_string());
    report.line("posterior_1_before_3", "2/3", posterior);

    let unchanged = || -> Result<String, String> {
        for bits in ["001", "111"] {
            for rule in [Rule::Rf, Rule::RfStar] {
                if f(bits, rule, plain)? != f(bits, rule, dropped)? {
                    return Ok("false".into());
                }
            }
        }
        Ok("true".into())
    };
    report.line("leaving_edge_removal_unchanged", "true", unchanged());
}
