//! Builds the space and its shared structures once, then runs the selected
//! checks on them in parallel.

use std::borrow::Cow;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::anchors::Check;
use super::config::{CheckOptions, CubeConfig, ExperimentConfig};
use super::report::{emit_report, emit_timings, to_json_bytes, Report, ReportFormat, Summary};
use crate::christ_cubes::{
    audit_chain, build_chain, build_cubes, build_nets, verify_cube_axioms, ChainParams,
    DyadicCubeTree, NetHierarchy,
};
use crate::discrete_space::{
    discretize, estimate_doubling, io, truncation_box, verify_approximate_midpoint,
    FiniteMetricMeasureSpace, GeometryParams, StoragePolicy,
};
use crate::error::{Error, Result};
use crate::function_spaces::{
    atom_image_check, atomic_decompose, bmo_norm_on, conjugate, default_s_grid, duality_check,
    fefferman_stein_check, glue_representatives, hormander_constants, john_nirenberg_profile,
    l2_operator_norm, random_atom, rdi_check, sharp_function_on, suite, verify_scale_independence,
    BallFamily, KernelMatrix, LocalRepresentative, RdiParams,
};
use crate::isoperimetry::{
    annuli, connectivity_scale, default_b0, estimate_isoperimetric, random_cube_unions,
    resolved_kappa_grid, slabs, verify_complement_decay, verify_layer_growth, Ball, FamilyKind,
    GrowthMode, IsoperimetryReport, TestSet,
};
use crate::region::BoxRegion;
use crate::weight_spaces::{
    check_admissible, check_tame, Sign, WeightSpec, GROWTH_LIMIT, HESSIAN_RATIO_THRESHOLD,
    RADIAL_RATIO_THRESHOLD,
};

/// Largest error of a glued function, up to a constant, that still passes.
pub const GLUE_ERROR_LIMIT: f64 = 1e-9;
/// Largest decomposition residual, relative to `||f||_1`, that still passes.
pub const RESIDUAL_LIMIT: f64 = 1e-10;
/// Complement decay must reach this fraction of the isoperimetric constant.
pub const DECAY_FRACTION: f64 = 0.9;

/// Everything a check reads: the space, the parameters and, when given, the
/// weight and explicit test functions.
pub struct Context {
    pub space: FiniteMetricMeasureSpace,
    pub weight: Option<(WeightSpec, BoxRegion)>,
    pub geometry: GeometryParams,
    pub cubes: CubeConfig,
    pub seed: u64,
    pub options: CheckOptions,
    pub functions: Option<Vec<Vec<f64>>>,
    inputs_hash: String,
}

#[derive(Serialize)]
struct HashedParams<'a> {
    weight: Option<&'a (WeightSpec, BoxRegion)>,
    geometry: &'a GeometryParams,
    cubes: &'a CubeConfig,
    seed: u64,
    options: &'a CheckOptions,
    functions: Option<usize>,
}

struct Isoperimetry {
    b0: Ball,
    family: Vec<TestSet>,
    report: IsoperimetryReport,
}

/// Structures shared between checks, built once before they run. A failed
/// build is kept as its message and reported by every check that needs it.
#[derive(Default)]
struct Shared {
    cubes: Option<std::result::Result<(NetHierarchy, DyadicCubeTree), String>>,
    iso: Option<std::result::Result<Isoperimetry, String>>,
}

fn prerequisite<'a, T>(
    slot: &'a Option<std::result::Result<T, String>>,
    what: &str,
) -> Result<&'a T> {
    match slot {
        Some(Ok(v)) => Ok(v),
        Some(Err(e)) => Err(Error::Input(format!("{what} unavailable: {e}"))),
        None => Err(Error::Input(format!("{what} was not built"))),
    }
}

/// Coarsest net level with spacing below `b / 8`, so that `b > 4 delta^nu`.
fn fine_level(nets: &NetHierarchy, b: f64) -> Result<i32> {
    (nets.k_min..=nets.k_max())
        .find(|&k| nets.radius(k) < b / 8.0)
        .ok_or_else(|| {
            Error::Resolution(format!(
                "finest net spacing {} is not below b / 8 = {}",
                nets.radius(nets.k_max()),
                b / 8.0
            ))
        })
}

/// Largest `beta` over pairs farther apart than `b / 2`, the only pairs a
/// chain with links shorter than `b / 2` splits.
fn chain_beta(space: &FiniteMetricMeasureSpace, b: f64) -> Result<f64> {
    Ok(verify_approximate_midpoint(space, 0.5 * b * (1.0 - 1e-12), 0.99)?.measured_beta)
}

fn count(n: usize) -> f64 {
    n as f64
}

impl Context {
    pub fn new(
        space: FiniteMetricMeasureSpace,
        geometry: GeometryParams,
        cubes: CubeConfig,
        seed: u64,
        options: CheckOptions,
    ) -> Result<Self> {
        geometry.require_admissible_scale()?;
        options.validate()?;
        let mut ctx = Context {
            space,
            weight: None,
            geometry,
            cubes,
            seed,
            options,
            functions: None,
            inputs_hash: String::new(),
        };
        ctx.rehash()?;
        Ok(ctx)
    }

    /// Discretizes the configured weight.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let spec = cfg.weight_spec()?;
        let (space, domain) = discretize_config(cfg)?;
        Context::new(
            space,
            cfg.geometry,
            cfg.cubes.clone(),
            cfg.seed,
            cfg.options.clone(),
        )?
        .with_weight(spec, domain)
    }

    pub fn with_weight(mut self, spec: WeightSpec, domain: BoxRegion) -> Result<Self> {
        self.weight = Some((spec, domain));
        self.rehash()?;
        Ok(self)
    }

    /// Runs the function checks on `functions` instead of a random suite.
    pub fn with_functions(mut self, functions: Vec<Vec<f64>>) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::Input("no test functions given".into()));
        }
        for (i, f) in functions.iter().enumerate() {
            if f.len() != self.space.len() {
                return Err(Error::Input(format!(
                    "function {i} has {} values for {} points",
                    f.len(),
                    self.space.len()
                )));
            }
            if let Some(x) = f.iter().position(|v| !v.is_finite()) {
                return Err(Error::Input(format!(
                    "function {i} is not finite at point {x}"
                )));
            }
        }
        self.functions = Some(functions);
        self.rehash()?;
        Ok(self)
    }

    pub fn inputs_hash(&self) -> &str {
        &self.inputs_hash
    }

    fn rehash(&mut self) -> Result<()> {
        let mut h = Sha256::new();
        h.update(io::to_bytes(&self.space)?);
        let params = HashedParams {
            weight: self.weight.as_ref(),
            geometry: &self.geometry,
            cubes: &self.cubes,
            seed: self.seed,
            options: &self.options,
            functions: self.functions.as_ref().map(|f| f.len()),
        };
        h.update(serde_json::to_vec(&params)?);
        for f in self.functions.iter().flatten() {
            for v in f {
                h.update(v.to_le_bytes());
            }
        }
        self.inputs_hash = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Ok(())
    }

    fn rng(&self, check: Check) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ check.salt().wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    fn suite(&self, check: Check) -> Cow<'_, [Vec<f64>]> {
        match &self.functions {
            Some(f) => Cow::Borrowed(f),
            None => Cow::Owned(suite::mixed_suite(
                &self.space,
                self.options.suite_size,
                &mut self.rng(check),
            )),
        }
    }

    fn b0(&self) -> Result<Ball> {
        match self.options.b0 {
            Some(b) if b.center >= self.space.len() => Err(Error::Input(format!(
                "b0 center {} out of range for {} points",
                b.center,
                self.space.len()
            ))),
            Some(b) => Ok(b),
            None => Ok(default_b0(&self.space)),
        }
    }

    fn build_cubes(&self) -> Result<(NetHierarchy, DyadicCubeTree)> {
        let nets = build_nets(&self.space, self.cubes.delta, self.cubes.levels)?;
        let tree = build_cubes(&self.space, &nets)?;
        Ok((nets, tree))
    }

    fn build_isoperimetry(&self, tree: Option<&DyadicCubeTree>) -> Result<Isoperimetry> {
        let b0 = self.b0()?;
        let steps = self.options.family_steps;
        let mut family = vec![];
        for kind in &self.options.families {
            match kind {
                FamilyKind::Annuli => family.extend(annuli(&self.space, &b0, steps)),
                FamilyKind::Slabs => family.extend(slabs(&self.space, &b0, steps)?),
                FamilyKind::Cubes => {
                    let tree =
                        tree.ok_or_else(|| Error::Input("cube family needs the tree".into()))?;
                    let k = (tree.k_min() + 2).min(tree.k_max());
                    let levels = [k, (k + 2).min(tree.k_max())];
                    family.extend(random_cube_unions(
                        &self.space,
                        tree,
                        &b0,
                        levels,
                        steps,
                        self.seed,
                    )?);
                }
            }
        }
        let kappa = match &self.options.kappa_grid {
            Some(g) => g.clone(),
            None => resolved_kappa_grid(
                &self.space,
                self.options.kappa_points,
                self.options.kappa_step,
            ),
        };
        let report = estimate_isoperimetric(&self.space, &b0, &family, &kappa)?;
        Ok(Isoperimetry { b0, family, report })
    }

    fn prepare(&self, checks: &[Check]) -> Shared {
        let iso_needed = checks.iter().any(|c| c.needs_isoperimetry());
        let cube_family = iso_needed && self.options.families.contains(&FamilyKind::Cubes);
        let mut shared = Shared::default();
        if cube_family || checks.iter().any(|c| c.needs_cubes()) {
            shared.cubes = Some(self.build_cubes().map_err(|e| e.to_string()));
        }
        if iso_needed {
            let tree = match &shared.cubes {
                Some(Ok((_, t))) => Some(t),
                _ => None,
            };
            shared.iso = Some(self.build_isoperimetry(tree).map_err(|e| e.to_string()));
        }
        shared
    }

    /// Runs `checks` in the given order (duplicates dropped); prerequisites
    /// are built first, then the checks run concurrently.
    pub fn run(&self, checks: &[Check]) -> Vec<Report> {
        let mut order: Vec<Check> = vec![];
        for &c in checks {
            if !order.contains(&c) {
                order.push(c);
            }
        }
        let shared = self.prepare(&order);
        order
            .par_iter()
            .map(|&c| {
                let start = Instant::now();
                let mut r = self
                    .run_one(c, &shared)
                    .unwrap_or_else(|e| Report::failed(c, &self.inputs_hash, &e));
                r.runtime = start.elapsed();
                r
            })
            .collect()
    }

    fn run_one(&self, check: Check, shared: &Shared) -> Result<Report> {
        let mut r = Report::new(check, &self.inputs_hash);
        match check {
            Check::Tame => self.tame(&mut r)?,
            Check::Admissible => self.admissible(&mut r)?,
            Check::Doubling => self.doubling(&mut r)?,
            Check::Midpoint => self.midpoint(&mut r)?,
            Check::Cubes => self.cubes(&mut r, prerequisite(&shared.cubes, "cube tree")?)?,
            Check::Chains => self.chains(&mut r, prerequisite(&shared.cubes, "cube tree")?)?,
            Check::Isoperimetry => {
                self.isoperimetry(&mut r, prerequisite(&shared.iso, "isoperimetric estimate")?)?
            }
            Check::Bmo => self.bmo(&mut r)?,
            Check::Sharp => self.sharp(&mut r)?,
            Check::Jn => self.jn(&mut r)?,
            Check::H1 => self.h1(&mut r, prerequisite(&shared.cubes, "cube tree")?)?,
            Check::Glue => self.glue(&mut r, prerequisite(&shared.cubes, "cube tree")?)?,
            Check::Rdi => self.rdi(
                &mut r,
                prerequisite(&shared.cubes, "cube tree")?,
                prerequisite(&shared.iso, "isoperimetric estimate")?,
            )?,
            Check::Fs => self.fs(&mut r, prerequisite(&shared.cubes, "cube tree")?)?,
            Check::Kernel => self.kernel(&mut r)?,
        }
        Ok(r)
    }

    fn weight(&self, check: Check) -> Result<&(WeightSpec, BoxRegion)> {
        self.weight.as_ref().ok_or_else(|| {
            Error::Configuration(format!(
                "the {check} check reads the weight itself; run it from an experiment config"
            ))
        })
    }

    fn tame(&self, r: &mut Report) -> Result<()> {
        let (spec, domain) = self.weight(Check::Tame)?;
        let t = check_tame(spec, 1.0, domain, self.options.tame_samples)?;
        r.constant("constant", t.constant)
            .constant("constant_inner", t.constant_inner)
            .constant("log_gradient_sup", t.log_gradient_sup)
            .constant("log_gradient_sup_inner", t.log_gradient_sup_inner)
            .constant("samples", count(t.samples));
        r.margin("ratio_growth", GROWTH_LIMIT * t.constant_inner - t.constant)
            .margin(
                "gradient_growth",
                GROWTH_LIMIT * t.log_gradient_sup_inner + 1e-9 - t.log_gradient_sup,
            );
        r.pass = t.verdict;
        Ok(())
    }

    fn admissible(&self, r: &mut Report) -> Result<()> {
        let (spec, domain) = self.weight(Check::Admissible)?;
        let shell = self
            .options
            .shell_radius
            .unwrap_or_else(|| (2.0 * spec.tau0()).max(4.0));
        let a = check_admissible(spec, domain, shell)?;
        r.constant("tame_constant", a.tame.constant)
            .constant("divergence_growth", a.divergence_growth)
            .constant("hessian_ratio_tail", a.hessian_ratio_tail)
            .constant("radial_ratio_floor", a.radial_ratio_floor)
            .constant("shell_radius", a.shell_radius);
        r.margin(
            "hessian_ratio",
            HESSIAN_RATIO_THRESHOLD - a.hessian_ratio_tail,
        )
        .margin(
            "radial_ratio",
            a.radial_ratio_floor - RADIAL_RATIO_THRESHOLD,
        );
        r.pass = a.verdict;
        Ok(())
    }

    fn doubling(&self, r: &mut Report) -> Result<()> {
        let n = self.space.len();
        let stride = n.div_ceil(2000).max(1);
        let centers: Vec<usize> = (0..n).step_by(stride).collect();
        let d = estimate_doubling(&self.space, self.geometry.b, 2.0, &centers)?;
        r.constant("D", d.constant)
            .constant("worst_radius", d.worst_radius)
            .constant("centers", count(d.centers));
        r.pass = d.constant.is_finite() && d.constant >= 1.0;
        Ok(())
    }

    fn midpoint(&self, r: &mut Report) -> Result<()> {
        let m = verify_approximate_midpoint(&self.space, self.geometry.r0, self.geometry.beta)?;
        r.constant("measured_beta", m.measured_beta)
            .constant("relaxation", m.relaxation)
            .constant("pairs_checked", count(m.pairs_checked));
        r.margin("beta", m.beta - m.measured_beta);
        r.pass = m.verdict;
        Ok(())
    }

    fn cubes(&self, r: &mut Report, (_, tree): &(NetHierarchy, DyadicCubeTree)) -> Result<()> {
        let a = verify_cube_axioms(&self.space, tree);
        r.constant("a0", a.a0)
            .constant("C1", a.c1)
            .constant("levels", count(a.levels))
            .constant("k_min", tree.k_min() as f64)
            .constant("k_max", tree.k_max() as f64)
            .constant(
                "axioms_passed",
                count(a.checks.iter().filter(|c| c.passed).count()),
            );
        r.pass = a.all_passed() && a.a0 > 0.0 && a.c1.is_finite();
        Ok(())
    }

    fn chains(&self, r: &mut Report, (nets, tree): &(NetHierarchy, DyadicCubeTree)) -> Result<()> {
        use rand::Rng;
        let b = self.geometry.b;
        let beta = chain_beta(&self.space, b)?;
        let nu = fine_level(nets, b)?;
        let params = ChainParams {
            nu,
            b,
            beta,
            relaxation: self.space.metadata.max_edge_length,
            r0: self.geometry.r0,
            a0: tree.a0,
        };
        let centers = nets.level(nu).unwrap();
        let small = tree.a0 * nets.radius(nu);
        let mut rng = self.rng(Check::Chains);
        let pairs = self.options.pairs;
        let (mut good, mut longest, mut slack) = (0, 0, f64::INFINITY);
        for _ in 0..pairs {
            let o = centers[rng.gen_range(0..centers.len())];
            let z = centers[rng.gen_range(0..centers.len())];
            let ch = build_chain(&self.space, nets, o, z, &params)?;
            let audit = audit_chain(&self.space, &ch, small);
            good += (audit.within_bound && audit.links_short && audit.certificates) as usize;
            longest = longest.max(ch.len());
            slack = slack.min(ch.bound.max(2.0) - ch.len() as f64);
        }
        r.constant("measured_beta", beta)
            .constant("level", nu as f64)
            .constant("centers", count(centers.len()))
            .constant("pairs", count(pairs))
            .constant("longest_chain", count(longest));
        r.margin("length", slack);
        r.pass = good == pairs;
        Ok(())
    }

    fn isoperimetry(&self, r: &mut Report, iso: &Isoperimetry) -> Result<()> {
        let s = &self.space;
        let i_hat = iso.report.i_hat;
        let c = iso.b0.center;
        let ecc = (0..s.len()).map(|y| s.dist(c, y)).fold(0.0, f64::max);
        let t0 = 2.0 * connectivity_scale(s);
        let t_grid: Vec<f64> = (0..30).map(|i| t0 + ecc * i as f64 / 30.0).collect();
        let (mut tested, mut growth) = (0, true);
        for set in &iso.family {
            let g =
                verify_layer_growth(s, &iso.b0, &set.members, i_hat, &t_grid, GrowthMode::Full)?;
            tested += g.rows.iter().filter(|row| row.skipped.is_none()).count();
            growth &= g.all_pass;
        }
        let r_grid: Vec<f64> = (1..=16).map(|i| ecc * i as f64 / 17.0).collect();
        let decay = verify_complement_decay(s, c, &r_grid)?;
        let rate = decay.rate.unwrap_or(f64::NAN);
        r.constant("I_hat", i_hat)
            .constant("resolution", iso.report.resolution)
            .constant("b0_radius", iso.b0.radius)
            .constant("sets", count(iso.report.sets))
            .constant("growth_pairs", count(tested))
            .constant("decay_rate", rate)
            .constant(
                "decay_r2",
                decay.fit.map(|f| f.r_squared).unwrap_or(f64::NAN),
            );
        if let Some(k) = iso.report.kappa0 {
            r.constant("kappa0", k);
        }
        r.margin("I_hat", i_hat)
            .margin("decay", rate - DECAY_FRACTION * i_hat);
        r.pass = i_hat > 0.0 && growth && tested > 0 && rate >= DECAY_FRACTION * i_hat;
        Ok(())
    }

    fn bmo(&self, r: &mut Report) -> Result<()> {
        let fs = self.suite(Check::Bmo);
        let fam = BallFamily::new(&self.space, self.geometry.b)?;
        let mut largest = 0.0f64;
        for f in fs.iter() {
            largest = largest.max(bmo_norm_on(&self.space, &fam, f, self.options.q)?.n);
        }
        let c = 0.5 * self.geometry.b;
        let rep = verify_scale_independence(&self.space, &fs, &self.geometry, c, self.options.q)?;
        r.constant("max_norm", largest)
            .constant("functions", count(rep.functions))
            .constant("skipped", count(rep.skipped));
        if let (Some(lo), Some(hi)) = (rep.min_ratio, rep.max_ratio) {
            r.constant("min_ratio", lo).constant("max_ratio", hi);
            r.margin("monotone", lo - 1.0);
        }
        r.pass = rep.monotone;
        Ok(())
    }

    fn sharp(&self, r: &mut Report) -> Result<()> {
        let fs = self.suite(Check::Sharp);
        let fam = BallFamily::new(&self.space, self.geometry.b)?;
        let (mut largest, mut gap) = (0.0f64, 0.0f64);
        for f in fs.iter() {
            let n = bmo_norm_on(&self.space, &fam, f, 1.0)?.n;
            let top = sharp_function_on(&self.space, &fam, f)?
                .into_iter()
                .fold(0.0, f64::max);
            largest = largest.max(n);
            gap = gap.max((top - n).abs());
        }
        r.constant("max_norm", largest)
            .constant("functions", count(fs.len()))
            .constant("max_gap", gap);
        r.pass = gap == 0.0;
        Ok(())
    }

    fn jn(&self, r: &mut Report) -> Result<()> {
        let s = &self.space;
        let fam = BallFamily::new(s, self.geometry.b)?;
        let center = self.b0()?.center;
        let f = match &self.functions {
            Some(fs) => Cow::Borrowed(&fs[0]),
            None => Cow::Owned(suite::log_distance(s, center, 0.5 * s.min_separation())),
        };
        let ball = fam
            .ball_covering(center, self.geometry.b)
            .or_else(|| fam.balls_at(center).last())
            .ok_or_else(|| Error::Input("no ball at the center".into()))?;
        let grid = default_s_grid(s, &fam, &ball, &f, 60);
        let p = john_nirenberg_profile(s, &fam, &f, &ball, &grid)?;
        let c = p.c.unwrap_or(f64::NAN);
        r.constant("c", c)
            .constant("C", p.big_c.unwrap_or(f64::NAN))
            .constant("r2", p.fit.map(|f| f.r_squared).unwrap_or(f64::NAN))
            .constant("n1", p.n1)
            .constant("ball_radius", ball.radius);
        r.pass = c > 0.0 && p.nonincreasing;
        Ok(())
    }

    fn h1(&self, r: &mut Report, (nets, _): &(NetHierarchy, DyadicCubeTree)) -> Result<()> {
        let s = &self.space;
        let fs = self.suite(Check::H1);
        let nu = fine_level(nets, self.geometry.b)?;
        let rr = self.options.r;
        let fam = BallFamily::new(s, self.geometry.b)?;
        let (mut residual, mut atoms, mut terms, mut bound) = (0.0f64, true, 0, 0.0f64);
        let mut gs = vec![];
        for f in fs.iter() {
            let g = atomic_decompose(s, f, &self.geometry, nets, nu, rr)?;
            let l1 = s.lp_norm(f, 1.0);
            if l1 > 0.0 {
                residual = residual.max(g.residual_l1(s) / l1);
            }
            atoms &= g.all_atoms_pass(s);
            terms += g.terms.len();
            bound = bound.max(g.h1_bound);
            if gs.len() < 10 {
                gs.push(g);
            }
        }
        let small = s.total_mass() < 1.0;
        let (mut pairs, mut holds, mut slack) = (0, 0, f64::INFINITY);
        for f in fs.iter() {
            let bmo = bmo_norm_on(s, &fam, f, conjugate(rr))?;
            for g in &gs {
                let d = duality_check(s, f, &bmo, g)?;
                pairs += 1;
                holds += (d.holds || (small && d.holds_general)) as usize;
                slack = slack.min(d.slack);
            }
        }
        r.constant("level", nu as f64)
            .constant("terms", count(terms))
            .constant("max_residual", residual)
            .constant("max_h1_bound", bound)
            .constant("pairings", count(pairs));
        r.margin("residual", RESIDUAL_LIMIT - residual)
            .margin("duality", slack);
        r.pass = residual <= RESIDUAL_LIMIT && atoms && holds == pairs;
        Ok(())
    }

    fn glue(&self, r: &mut Report, (nets, tree): &(NetHierarchy, DyadicCubeTree)) -> Result<()> {
        let s = &self.space;
        let b = self.geometry.b;
        let fs = self.suite(Check::Glue);
        let beta = chain_beta(s, b)?;
        let nu = fine_level(nets, b)?;
        let centers = nets.level(nu).unwrap();
        let o = centers[centers.len() / 2];
        let (mut worst, mut bounded, mut d_measured) = (0.0f64, 0, 0.0f64);
        for f in fs.iter() {
            let locals: Vec<LocalRepresentative> = centers
                .iter()
                .map(|&z| LocalRepresentative::from_function(s, f, z, b))
                .collect();
            let g = glue_representatives(s, nets, nu, b, beta, tree.a0, &locals, o)?;
            let shift = f[0] - g.values[0];
            let err = f
                .iter()
                .zip(&g.values)
                .map(|(a, v)| (a - v - shift).abs())
                .fold(0.0, f64::max);
            worst = worst.max(err);
            bounded += g.all_within_bound as usize;
            d_measured = d_measured.max(g.d_measured);
        }
        r.constant("measured_beta", beta)
            .constant("level", nu as f64)
            .constant("balls", count(centers.len()))
            .constant("max_error", worst)
            .constant("max_D", d_measured);
        r.margin("error", GLUE_ERROR_LIMIT - worst);
        r.pass = worst <= GLUE_ERROR_LIMIT && bounded == fs.len();
        Ok(())
    }

    fn rdi(
        &self,
        r: &mut Report,
        (_, tree): &(NetHierarchy, DyadicCubeTree),
        iso: &Isoperimetry,
    ) -> Result<()> {
        let s = &self.space;
        let o = &self.options;
        let p = RdiParams::measure(s, tree, &iso.b0, iso.report.i_hat, o.c0, o.eta_prime, None)?;
        let fam = BallFamily::new(s, p.b_prime)?;
        // alternate random functions with light spikes, which are the ones
        // whose maximal function clears the smallest admissible level
        let fs: Cow<'_, [Vec<f64>]> = match &self.functions {
            Some(f) => Cow::Borrowed(f),
            None => {
                let mut rng = self.rng(Check::Rdi);
                let mut out = suite::mixed_suite(s, o.suite_size.div_ceil(2), &mut rng);
                let spikes: Vec<Vec<f64>> = (0..o.suite_size / 2)
                    .map(|_| suite::light_spike(s, &mut rng))
                    .collect();
                out.extend(spikes);
                Cow::Owned(out)
            }
        };
        let (mut rows, mut live, mut holding, mut slack) = (0, 0, 0, f64::INFINITY);
        let mut all = true;
        for f in fs.iter() {
            let rep = rdi_check(s, tree, f, &p, &fam, None)?;
            rows += rep.rows.len();
            live += rep.rows.iter().filter(|row| row.rhs > 0.0).count();
            holding += rep.rows.iter().filter(|row| row.holds).count();
            for row in &rep.rows {
                slack = slack.min(row.rhs - row.lhs);
            }
            all &= rep.all_hold;
        }
        r.constant("I_hat", p.i_hat)
            .constant("sigma", p.sigma)
            .constant("D", p.d)
            .constant("omega", p.omega)
            .constant("M", p.big_m)
            .constant("epsilon", p.epsilon)
            .constant("eta", p.eta)
            .constant("b_prime", p.b_prime)
            .constant("rows", count(rows))
            .constant("live_rows", count(live))
            .constant("holding_rows", count(holding));
        if rows > 0 {
            r.margin("inequality", slack);
        }
        r.pass = all;
        Ok(())
    }

    fn fs(&self, r: &mut Report, (_, tree): &(NetHierarchy, DyadicCubeTree)) -> Result<()> {
        let s = &self.space;
        let unit = tree.delta.powi(tree.k_min());
        let b_prime = 2.0 * tree.c1 * unit + self.options.c0;
        let fam = BallFamily::new(s, b_prime)?;
        let fs = self.suite(Check::Fs);
        let rep = fefferman_stein_check(s, &fam, &fs, self.options.p)?;
        r.constant("b_prime", b_prime)
            .constant("functions", count(rep.functions))
            .constant("skipped", count(rep.skipped));
        if let Some(m) = rep.min_ratio {
            r.constant("min_ratio", m);
        }
        r.pass = rep.min_ratio.is_some_and(|m| m > 0.0);
        Ok(())
    }

    fn kernel(&self, r: &mut Report) -> Result<()> {
        let s = &self.space;
        if s.len() > self.options.kernel_limit {
            return Err(Error::Configuration(format!(
                "{} points exceed the dense kernel limit of {}",
                s.len(),
                self.options.kernel_limit
            )));
        }
        let fam = BallFamily::new(s, self.geometry.b)?;
        let k = KernelMatrix::toy(s)?;
        let kc = hormander_constants(s, &fam, &k, None, None)?;
        let op = l2_operator_norm(s, &k, 1e-10, 10_000);
        let mut rng = self.rng(Check::Kernel);
        let atoms = (0..self.options.suite_size)
            .map(|_| random_atom(s, &fam, self.options.r, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let img = atom_image_check(s, &k, &atoms, kc.nu, op.norm);
        // on explicit functions, ||T f||_2 / ||f||_2 can never beat the norm
        let mut gain = 0.0f64;
        for f in self.functions.iter().flatten() {
            let norm = s.lp_norm(f, 2.0);
            if norm > 0.0 {
                gain = gain.max(s.lp_norm(&k.apply(s, f), 2.0) / norm);
            }
        }
        r.constant("upsilon", kc.upsilon)
            .constant("nu", kc.nu)
            .constant("operator_norm", op.norm)
            .constant("iterations", count(op.iterations))
            .constant("atom_constant", img.constant)
            .constant("atoms", count(atoms.len()));
        if self.functions.is_some() {
            r.constant("max_gain", gain);
            r.margin("gain", op.norm * (1.0 + 1e-6) - gain);
        }
        r.pass = kc.upsilon.is_finite()
            && kc.nu.is_finite()
            && op.converged
            && img.constant.is_finite()
            && gain <= op.norm * (1.0 + 1e-6);
        Ok(())
    }
}

/// The reports of one run, their summary and the files written.
#[derive(Debug)]
pub struct Experiment {
    pub reports: Vec<Report>,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

impl Experiment {
    /// 0 when every selected check passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.all_pass {
            0
        } else {
            1
        }
    }
}

/// `summary.json`, and for a nonempty run `reports/<check>.json`,
/// `reports.csv` and `timings.json`, under `dir`.
pub fn write_outputs(reports: &[Report], summary: &Summary, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = emit_report(reports, summary, ReportFormat::Json, dir)?;
    if !reports.is_empty() {
        files.extend(emit_report(reports, summary, ReportFormat::Csv, dir)?);
        files.push(emit_timings(reports, dir)?);
    }
    Ok(files)
}

/// Discretize, build cubes and the isoperimetric constant as needed, run the
/// selected checks and write everything under the configured output
/// directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    let ctx = Context::from_config(cfg)?;
    let reports = ctx.run(&cfg.checks);
    let summary = Summary::of(&reports, ctx.inputs_hash(), ctx.space.len());
    let mut files = vec![];
    if let Some(dir) = cfg.output_dir() {
        files = write_outputs(&reports, &summary, &dir)?;
        let p = dir.join("config.json");
        std::fs::write(&p, to_json_bytes(cfg)?)?;
        files.push(p);
    }
    Ok(Experiment {
        reports,
        summary,
        files,
    })
}

/// The configured space and the box it was cut from.
pub fn discretize_config(cfg: &ExperimentConfig) -> Result<(FiniteMetricMeasureSpace, BoxRegion)> {
    let spec = cfg.weight_spec()?;
    let domain = match &cfg.domain {
        Some(bx) => bx.clone(),
        None if cfg.sign == Sign::Minus => truncation_box(&spec, cfg.tail_mass, 0.5)?,
        None => return Err(Error::Configuration("the plus sign needs a domain".into())),
    };
    let space = discretize(&spec, cfg.sign, &domain, cfg.h, StoragePolicy::Auto)?;
    Ok((space, domain))
}
