"""Scenario files and simulation campaigns producing delay / false-alarm CSV rows.

A scenario file is line-oriented ``key = value`` text; ``#`` starts a
comment. ``A`` and ``beta`` take comma-separated lists (exactly one of the
two must be given). Example::

    id = reference
    n = 10
    p = 100
    k = 5
    dof = 5
    epsilon = 1.5
    A = 4, 5, 6, 7
    delay_paths = 500
    mtfa_paths = 1500
    seed = 32
"""

import math
from dataclasses import dataclass, field, fields

from corrqcd.errors import CorrQcdError
from corrqcd.qcd import GlrConfig, calibrate_threshold
from corrqcd.simgen import (
    DEFAULT_HORIZON,
    FastPathSource,
    PipelineSource,
    conditional_delay_trial,
    estimate_post_change_j,
    reference_scenario,
    run_mtfa_trial,
)
from corrqcd.vdensity import ModelParams

CSV_COLUMNS = ("scenario", "A", "mean_delay", "se_delay", "mtfa", "se_mtfa", "j_hat", "censored_count")


class ScenarioError(CorrQcdError):
    pass


@dataclass
class Scenario:
    id: str = "scenario"
    n: int = 10
    p: int = 100
    k: int = 5
    dof: int = None
    delta: int = 1
    gamma: int = 1
    epsilon: float = 1.5
    A: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    paths: int = None
    delay_paths: int = 500
    mtfa_paths: int = 1500
    seed: int = None
    horizon: int = DEFAULT_HORIZON
    window: object = "auto"
    sidedness: str = "increase"
    j: float = None
    jhat_samples: int = 5000
    var_min: float = 0.5
    var_max: float = 2.0

    def thresholds(self):
        if bool(self.A) == bool(self.beta):
            raise ScenarioError("scenario must give exactly one of 'A' or 'beta'")
        if self.A:
            return list(self.A)
        return [calibrate_threshold(b) for b in self.beta]

    @property
    def wishart_dof(self):
        return self.k + 2 if self.dof is None else self.dof


_INT = {"n", "p", "k", "dof", "delta", "gamma", "paths", "delay_paths", "mtfa_paths", "seed", "horizon", "jhat_samples"}
_FLOAT = {"epsilon", "j", "var_min", "var_max"}
_LIST = {"A", "beta"}


def _parse_window(value):
    if value in ("auto", "none"):
        return None if value == "none" else "auto"
    return int(value)


def parse_scenario(text):
    known = {f.name for f in fields(Scenario)}
    values = {}
    unknown = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            unknown.append(key)
            continue
        try:
            if key in _INT:
                values[key] = int(value)
            elif key in _FLOAT:
                values[key] = float(value)
            elif key in _LIST:
                values[key] = [float(v) for v in value.split(",") if v.strip()]
            elif key == "window":
                values[key] = _parse_window(value)
            else:
                values[key] = value
        except ValueError:
            raise ScenarioError(f"line {lineno}: bad value for {key!r}: {value!r}") from None
    if unknown:
        raise ScenarioError("unknown scenario keys: " + ", ".join(unknown))
    sc = Scenario(**values)
    if sc.paths is not None:
        sc.delay_paths = sc.mtfa_paths = sc.paths
    sc.thresholds()
    return sc


def metadata(sc, fast_path):
    """Settings not visible in the CSV rows, emitted as '# key=value' lines."""
    meta = {
        "scenario": sc.id,
        "n": sc.n,
        "p": sc.p,
        "delta": sc.delta,
        "epsilon": sc.epsilon,
        "sidedness": sc.sidedness,
        "window": sc.window,
        "seed": sc.seed,
        "horizon": sc.horizon,
        "delay_paths": sc.delay_paths,
        "mtfa_paths": sc.mtfa_paths,
        "gamma": sc.gamma,
        "source": "fast-path" if fast_path else "gaussian-pipeline",
    }
    if fast_path and sc.j is not None:
        meta["j_post"] = sc.j
    else:
        meta.update(
            {
                "block_size": sc.k,
                "wishart_dof": sc.wishart_dof,
                "wishart_scale": "identity",
                "wishart_normalization": "divide-by-dof",
                "post_cov_draws": "one-per-scenario",
                "pre_variances": f"uniform[{sc.var_min},{sc.var_max}]",
            }
        )
    return meta


def build_sources(sc, fast_path):
    """Return (params, change_source, j_hat) for a scenario."""
    params = ModelParams(sc.n, sc.p, sc.delta)
    if fast_path and sc.j is not None:
        src = FastPathSource(params, sc.j, gamma=sc.gamma)
        return params, src, estimate_post_change_j(src, params, sc.jhat_samples, sc.seed)
    model = reference_scenario(sc.n, sc.p, sc.k, sc.wishart_dof, sc.seed, sc.gamma, (sc.var_min, sc.var_max))
    pipeline = PipelineSource(model, sc.delta)
    j_hat = estimate_post_change_j(pipeline, params, sc.jhat_samples, sc.seed)
    if fast_path:
        return params, FastPathSource(params, j_hat, gamma=sc.gamma), j_hat
    return params, pipeline, j_hat


def run_scenario(sc, fast_path=False, workers=1):
    """One CSV row (as a dict) per threshold."""
    params, src, j_hat = build_sources(sc, fast_path)
    rows = []
    for i, a in enumerate(sc.thresholds()):
        config = GlrConfig(a, sc.epsilon, sc.window, sc.sidedness)
        delay = conditional_delay_trial(src, config, params, sc.delay_paths, sc.seed + 2 * i, sc.horizon, workers)
        mtfa = run_mtfa_trial(
            src.with_gamma(math.inf), config, params, sc.mtfa_paths, sc.seed + 2 * i + 1, sc.horizon, workers
        )
        rows.append(
            {
                "scenario": sc.id,
                "A": a,
                "mean_delay": delay.estimate,
                "se_delay": delay.std_error,
                "mtfa": mtfa.estimate,
                "se_mtfa": mtfa.std_error,
                "j_hat": j_hat,
                "censored_count": delay.censored + mtfa.censored,
            }
        )
    return rows


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.10g}"


def format_csv(rows, meta=None):
    lines = [f"# {k}={v}" for k, v in (meta or {}).items()]
    lines.append(",".join(CSV_COLUMNS))
    for r in rows:
        lines.append(",".join(_fmt(r[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"
