"""Scenario orchestration, metrics and report persistence.

Two scenarios mirror the experiments the package was built for:

``sensor``
    heat source following a random walk on a random geometric graph; the
    evolution is the graph translation to the current source vertex and the
    true signal is renormalized to unit energy every step.
``social``
    Krause-Hegselmann opinions on a community graph whose edges are
    resampled (RES) each step; the filter uses a random-walk model.

A third kind, ``custom``, is a linear-Gaussian heat-diffusion scenario in
which the filter model is exact; it is mainly useful for checks.

Every policy in a run sees the same truth and the same observation noise
(common random numbers). Each random stream is derived from the master seed
and a fixed label.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import (
    EvolutionModel,
    ObservationNoise,
    SignalPrior,
    heat_source_trajectory,
    kh_step,
    normalize_energy,
    observe,
    translation_operator,
)
from .graph_core import (
    SpectralBasis,
    WeightedGraph,
    community_graph,
    graph_basis,
    random_geometric_graph,
    res_realize,
)
from .policies import (
    POLICY_LABELS,
    POLICY_NAMES,
    policy_greedy_instant,
    policy_info_gain,
    policy_proposed,
    policy_random,
    top_k,
)
from .sampling_optimizer import BudgetParams, SolverOptions, solve_relaxed
from .spectral_kalman import FilterState, instant_mse, predict, update

SCHEMA_VERSION = 1
SEED_ENV_VAR = "GS_TRACK_SEED"
TRACE_COLUMNS = (
    "t",
    "policy",
    "nmse",
    "trace_p_post",
    "budget",
    "vertices",
    "solver_iters",
    "solver_gradnorm",
)
SCENARIO_KINDS = ("sensor", "social", "custom")


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    scenario: str = "sensor"
    seed: int = 0
    horizon: int = 1000
    policies: list[str] = field(default_factory=lambda: list(POLICY_NAMES))
    # graph
    n_vertices: int = 100
    radius: float = 0.6
    community_sizes: list[int] = field(default_factory=lambda: [10] * 7)
    p_intra: float = 0.8
    p_inter: float = 0.02
    graph: str = "geometric"
    # dynamics
    process_noise_var: float = 1e-4
    obs_noise_var: float = 1e-3
    translation_scale: float | None = None
    res_prob: float = 0.5
    kh_eps: float = 0.3
    diffusion_tau: float = 0.1
    normalize: bool = True
    prior_mean: float = 1.0
    prior_var: float = 1.0
    # sampling
    avg_budget: int = 10
    step_cap: int = 20
    discount: float = 0.8
    receding_horizon: bool = False
    solver: dict = field(default_factory=dict)
    # output
    output_dir: str = "runs"
    run_name: str | None = None

    def __post_init__(self):
        self.validate()

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in dataclasses.fields(cls)}

    def validate(self) -> None:
        if self.scenario not in SCENARIO_KINDS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIO_KINDS}")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        unknown = [p for p in self.policies if p not in POLICY_NAMES]
        if unknown or not self.policies:
            raise ConfigError(f"unknown or empty policy list {self.policies}; choose from {POLICY_NAMES}")
        if self.process_noise_var <= 0:
            raise ConfigError("process_noise_var must be > 0")
        if self.obs_noise_var <= 0:
            raise ConfigError("obs_noise_var must be > 0")
        if self.prior_var <= 0:
            raise ConfigError("prior_var must be > 0")
        if self.graph not in ("geometric", "community"):
            raise ConfigError(f"unknown graph family {self.graph!r}")
        for name in ("p_intra", "p_inter", "res_prob"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in [0, 1]")
        bad = set(self.solver) - {f.name for f in dataclasses.fields(SolverOptions)}
        if bad:
            raise ConfigError(f"unknown solver options {sorted(bad)}")
        try:
            budget = self.budget()
            budget.check_size(self.size())
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def size(self) -> int:
        if self.scenario == "social" or (self.scenario == "custom" and self.graph == "community"):
            return int(sum(self.community_sizes))
        return self.n_vertices

    def budget(self) -> BudgetParams:
        return BudgetParams(self.avg_budget, self.step_cap, self.discount)

    def solver_options(self) -> SolverOptions:
        return SolverOptions(**self.solver)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


SCENARIO_DEFAULTS = {
    "sensor": dict(
        horizon=1000, n_vertices=100, radius=0.6, graph="geometric",
        process_noise_var=1e-4, obs_noise_var=1e-3, prior_mean=1.0, prior_var=1.0,
        normalize=True,
    ),
    "social": dict(
        horizon=100, community_sizes=[10] * 7, p_intra=0.8, p_inter=0.02, graph="community",
        res_prob=0.5, kh_eps=0.3, process_noise_var=1e-4, obs_noise_var=1e-4, prior_var=0.1,
        normalize=True,
    ),
    "custom": dict(
        horizon=100, n_vertices=30, radius=0.4, graph="geometric",
        process_noise_var=1e-3, obs_noise_var=1e-2, prior_mean=0.0, prior_var=1.0,
        normalize=False, diffusion_tau=0.1,
    ),
}


def make_config(scenario: str = "sensor", **overrides) -> ScenarioConfig:
    """Scenario defaults with ``overrides`` applied; unknown keys are errors."""
    unknown = set(overrides) - ScenarioConfig.field_names()
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    if scenario not in SCENARIO_DEFAULTS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {SCENARIO_KINDS}")
    params = dict(SCENARIO_DEFAULTS[scenario])
    params.update(overrides)
    params["scenario"] = scenario
    return ScenarioConfig(**params)


def load_config(path, overrides: dict | None = None, env=None) -> ScenarioConfig:
    """Read a JSON config file.

    Precedence: ``overrides`` (command-line flags), then the
    ``GS_TRACK_SEED`` environment variable, then the file.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    env = os.environ if env is None else env
    if SEED_ENV_VAR in env:
        data["seed"] = _parse_seed(env[SEED_ENV_VAR])
    data.update(overrides or {})
    scenario = data.pop("scenario", "sensor")
    return make_config(scenario, **data)


def _parse_seed(text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {text!r}") from exc


def stream(seed: int, label: str) -> np.random.Generator:
    """Independent generator for one labelled use of the master seed."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(label.encode())]))


# -- metrics ---------------------------------------------------------------


def nmse(estimate: np.ndarray, truth: np.ndarray) -> float:
    """Normalized squared error ``||estimate - truth||^2 / ||truth||^2``."""
    truth = np.asarray(truth, dtype=float)
    denom = float(truth @ truth)
    if denom == 0:
        raise ValueError("NMSE undefined for a zero truth signal")
    diff = np.asarray(estimate, dtype=float) - truth
    return float(diff @ diff) / denom


@dataclass(frozen=True)
class StepRecord:
    t: int
    nmse: float
    trace_p_post: float
    budget: int
    vertices: tuple[int, ...]
    solver_iters: int = 0
    solver_gradnorm: float = 0.0


@dataclass
class TraceReport:
    policy: str
    records: list[StepRecord] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return POLICY_LABELS[self.policy]

    @property
    def nmse_trace(self) -> np.ndarray:
        return np.array([r.nmse for r in self.records])

    @property
    def accumulated_trace(self) -> float:
        return float(sum(r.trace_p_post for r in self.records))

    def solver_summary(self) -> dict:
        iters = [r.solver_iters for r in self.records if r.solver_iters]
        return {
            "solves": len(iters),
            "mean_iterations": float(np.mean(iters)) if iters else 0.0,
            "max_iterations": int(max(iters)) if iters else 0,
        }


def accumulated_error(report: TraceReport) -> float:
    """Sum of the per-step NMSE over the horizon."""
    return float(sum(r.nmse for r in report.records))


# -- scenario construction -------------------------------------------------


@dataclass
class Scenario:
    """Everything a tracking run needs: truth, model and filter prior."""

    config: ScenarioConfig
    graph: WeightedGraph
    basis: SpectralBasis
    model: EvolutionModel
    noise: ObservationNoise
    prior: SignalPrior
    truth: np.ndarray  # (horizon + 1, n) spectral coefficients, row 0 is t = 0
    info: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.basis.n


def _prior(cfg: ScenarioConfig, n: int, mean: np.ndarray | None = None) -> SignalPrior:
    mean = np.full(n, cfg.prior_mean) if mean is None else mean
    return SignalPrior(mean, np.full(n, cfg.prior_var))


def _base_graph(cfg: ScenarioConfig, rng: np.random.Generator) -> WeightedGraph:
    if cfg.graph == "community" or cfg.scenario == "social":
        return community_graph(cfg.community_sizes, cfg.p_intra, cfg.p_inter, rng)
    return random_geometric_graph(cfg.n_vertices, cfg.radius, rng, require_connected=True)


def build_sensor_scenario(cfg: ScenarioConfig) -> Scenario:
    g = _base_graph(cfg, stream(cfg.seed, "graph"))
    basis = graph_basis(g)
    n = basis.n
    traj_rng = stream(cfg.seed, "trajectory")
    start = int(traj_rng.integers(n))
    # one step past the horizon so the two-step look-ahead at t = T has H_{T+1}
    path = heat_source_trajectory(g, start, cfg.horizon + 1, traj_rng)
    scale = np.sqrt(n) if cfg.translation_scale is None else cfg.translation_scale
    diags = scale * basis.eigenvectors[path, :]

    def operator(t):
        return np.diag(diags[t])

    model = EvolutionModel(n, operator, cfg.process_noise_var)
    prior = _prior(cfg, n)
    rng = stream(cfg.seed, "truth")
    truth = np.empty((cfg.horizon + 1, n))
    truth[0] = prior.sample(rng)
    if cfg.normalize:
        truth[0] = normalize_energy(truth[0])
    sd = np.sqrt(cfg.process_noise_var)
    for t in range(1, cfg.horizon + 1):
        f = diags[t] * truth[t - 1] + sd * rng.standard_normal(n)
        truth[t] = normalize_energy(f) if cfg.normalize else f
    info = {"trajectory": path[: cfg.horizon + 1].tolist(), "translation_scale": float(scale), "num_edges": g.num_edges}
    return Scenario(cfg, g, basis, model, ObservationNoise(cfg.obs_noise_var), prior, truth, info)


def build_social_scenario(cfg: ScenarioConfig) -> Scenario:
    g = _base_graph(cfg, stream(cfg.seed, "graph"))
    basis = graph_basis(g)
    n = basis.n
    res_rng = stream(cfg.seed, "res")
    res_edges = [res_realize(g, cfg.res_prob, res_rng).num_edges for _ in range(cfg.horizon + 1)]
    model = EvolutionModel.identity(n, cfg.process_noise_var)
    rng = stream(cfg.seed, "truth")
    opinions = rng.uniform(0.0, 1.0, size=n)
    truth = np.empty((cfg.horizon + 1, n))
    sd = np.sqrt(cfg.process_noise_var)

    def to_spectral(x):
        return basis.eigenvectors.T @ (normalize_energy(x) if cfg.normalize else x)

    truth[0] = to_spectral(opinions)
    # the filter starts from the initial opinion profile with covariance prior_var * I
    prior = _prior(cfg, n, truth[0].copy())
    for t in range(1, cfg.horizon + 1):
        opinions = kh_step(opinions, cfg.kh_eps) + sd * rng.standard_normal(n)
        truth[t] = to_spectral(opinions)
    info = {"res_edge_counts": res_edges, "num_edges": g.num_edges}
    return Scenario(cfg, g, basis, model, ObservationNoise(cfg.obs_noise_var), prior, truth, info)


def build_custom_scenario(cfg: ScenarioConfig) -> Scenario:
    g = _base_graph(cfg, stream(cfg.seed, "graph"))
    basis = graph_basis(g)
    n = basis.n
    H = np.diag(np.exp(-cfg.diffusion_tau * basis.eigenvalues))
    model = EvolutionModel.constant(H, cfg.process_noise_var)
    prior = _prior(cfg, n)
    rng = stream(cfg.seed, "truth")
    truth = np.empty((cfg.horizon + 1, n))
    truth[0] = prior.sample(rng)
    sd = np.sqrt(cfg.process_noise_var)
    for t in range(1, cfg.horizon + 1):
        f = H @ truth[t - 1] + sd * rng.standard_normal(n)
        truth[t] = normalize_energy(f) if cfg.normalize else f
    return Scenario(cfg, g, basis, model, ObservationNoise(cfg.obs_noise_var), prior, truth, {"num_edges": g.num_edges})


BUILDERS = {
    "sensor": build_sensor_scenario,
    "social": build_social_scenario,
    "custom": build_custom_scenario,
}


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    return BUILDERS[cfg.scenario](cfg)


# -- tracking --------------------------------------------------------------


def track(sc: Scenario, policy: str) -> TraceReport:
    """Run the filter over the horizon with one sampling policy."""
    cfg = sc.config
    budget = cfg.budget()
    options = cfg.solver_options()
    noise_rng = stream(cfg.seed, "noise")
    policy_rng = stream(cfg.seed, "policy:" + policy)
    V = sc.basis.eigenvectors
    fixed = int(cfg.avg_budget)
    info_gain_set = None

    state = FilterState.from_prior(sc.prior.mean, sc.prior.covariance)
    report = TraceReport(policy, config=cfg.to_dict())
    pending = None  # second half of a two-step plan
    for t in range(1, cfg.horizon + 1):
        pred = predict(state, sc.model, t)
        iters, gradnorm = 0, 0.0
        if policy == "proposed":
            if pending is None:
                plan = policy_proposed(state, sc.basis, sc.model, sc.noise, budget, t, options)
                vertices = plan.vertex_sets[0]
                pending = plan.step_budgets[1], plan.vertex_sets[1]
                iters, gradnorm = plan.diagnostics.iterations, plan.diagnostics.grad_norm
            else:
                m_next, vertices = pending
                pending = None
                if cfg.receding_horizon:
                    dec, diag = solve_relaxed(pred.information, sc.basis, sc.model, sc.noise, budget, t, options)
                    vertices = top_k(dec.d_now, m_next)
                    iters, gradnorm = diag.iterations, diag.grad_norm
        elif policy == "greedy-instant":
            vertices = policy_greedy_instant(pred, sc.basis, sc.noise, fixed)
        elif policy == "info-gain":
            if info_gain_set is None:
                info_gain_set = policy_info_gain(sc.basis, sc.prior, sc.noise, fixed)
            vertices = info_gain_set
        elif policy == "random":
            vertices = policy_random(sc.n, fixed, policy_rng)
        else:
            raise ConfigError(f"unknown policy {policy!r}")

        y = observe(V @ sc.truth[t], vertices, sc.noise, noise_rng)
        state = update(pred, y, vertices, sc.basis, sc.noise)
        report.records.append(
            StepRecord(t, nmse(state.posterior_mean, sc.truth[t]), instant_mse(state),
                       len(vertices), tuple(vertices), iters, gradnorm)
        )
    return report


def run_scenario(cfg: ScenarioConfig) -> dict[str, TraceReport]:
    sc = build_scenario(cfg)
    reports = {p: track(sc, p) for p in cfg.policies}
    for r in reports.values():
        r.config["scenario_info"] = sc.info
    return reports


def run_sensor_scenario(cfg: ScenarioConfig | None = None, **overrides) -> dict[str, TraceReport]:
    cfg = cfg.replace(**overrides) if cfg is not None else make_config("sensor", **overrides)
    if cfg.scenario != "sensor":
        raise ConfigError("run_sensor_scenario needs a sensor config")
    return run_scenario(cfg)


def run_social_scenario(cfg: ScenarioConfig | None = None, **overrides) -> dict[str, TraceReport]:
    cfg = cfg.replace(**overrides) if cfg is not None else make_config("social", **overrides)
    if cfg.scenario != "social":
        raise ConfigError("run_social_scenario needs a social config")
    return run_scenario(cfg)


# -- persistence -----------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def trace_rows(reports: dict[str, TraceReport]):
    for name, rep in reports.items():
        for r in rep.records:
            yield [
                r.t, name, _fmt(r.nmse), _fmt(r.trace_p_post), r.budget,
                ";".join(str(v) for v in r.vertices), r.solver_iters, _fmt(r.solver_gradnorm),
            ]


def trace_csv(reports: dict[str, TraceReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    w.writerows(trace_rows(reports))
    return buf.getvalue()


def summary(reports: dict[str, TraceReport]) -> dict:
    first = next(iter(reports.values()))
    cfg = {k: v for k, v in first.config.items() if k != "scenario_info"}
    return {
        "schema_version": SCHEMA_VERSION,
        "config": cfg,
        "scenario_info": first.config.get("scenario_info", {}),
        "common_random_numbers": True,
        "policies": {
            name: {
                "label": rep.label,
                "accumulated_nmse": accumulated_error(rep),
                "accumulated_trace_p_post": rep.accumulated_trace,
                "steps": len(rep.records),
                "solver": rep.solver_summary(),
            }
            for name, rep in reports.items()
        },
    }


def write_reports(reports: dict[str, TraceReport], out_dir, run_name: str) -> tuple[Path, Path]:
    """Write ``<run_name>_trace.csv`` and ``<run_name>_summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{run_name}_trace.csv"
    json_path = out / f"{run_name}_summary.json"
    csv_path.write_text(trace_csv(reports))
    json_path.write_text(json.dumps(summary(reports), indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def default_run_name(cfg: ScenarioConfig) -> str:
    return cfg.run_name or f"{cfg.scenario}_seed{cfg.seed}"


def read_trace_csv(path) -> list[dict]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"report not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        return list(reader)


def plot_data(rows: list[dict]) -> tuple[list[str], list[list]]:
    """Pivot trace rows into one NMSE column per policy, one row per step."""
    policies = list(dict.fromkeys(r["policy"] for r in rows))
    by_t: dict[int, dict[str, str]] = {}
    for r in rows:
        by_t.setdefault(int(r["t"]), {})[r["policy"]] = r["nmse"]
    header = ["t"] + [f"nmse_{p}" for p in policies]
    body = [[t] + [by_t[t].get(p, "") for p in policies] for t in sorted(by_t)]
    return header, body


def sweep(cfg: ScenarioConfig, seeds: list[int], out_dir) -> Path:
    """Run ``cfg`` for each seed and tabulate accumulated NMSE per policy."""
    out = Path(out_dir)
    table: dict[str, dict[int, float]] = {}
    for s in seeds:
        run_cfg = cfg.replace(seed=s)
        reports = run_scenario(run_cfg)
        write_reports(reports, out, f"{cfg.scenario}_seed{s}")
        for name, rep in reports.items():
            table.setdefault(name, {})[s] = accumulated_error(rep)
    path = out / f"{cfg.scenario}_sweep.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["policy"] + [f"seed_{s}" for s in seeds] + ["mean"])
        for name, vals in table.items():
            row = [vals[s] for s in seeds]
            w.writerow([name] + [_fmt(v) for v in row] + [_fmt(np.mean(row))])
    return path
