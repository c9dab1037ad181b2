"""Config-driven queries and experiment sweeps producing CSV rows.

Each runner takes a parsed JSON config (a dict) and returns
``(columns, rows, invalid)``.  All randomness derives from the config's
``estimator.seed``, so a config fully determines its output.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .baselines import KnnEntropyConfig, knn_entropy, runtime_profile
from .errors import ConfigError, InvalidSelection
from .estimators.bounds import EstimatorConfig, entropy_interval
from .logspace import substream
from .measures import (
    CompositionPlan,
    MeasureEstimate,
    PlanTerm,
    TermEstimate,
    cmi_interval,
    conditional_entropy_interval,
    dual_correlation_interval,
    exact_measure,
    interaction_information_interval,
    rank_by_conditional_entropy,
    total_correlation_interval,
)
from .model import as_address, select
from .models import bayesnet, gaussian, statespace
from .proposals.factory import build_proposal, make_factory, proposal_id
from .proposals.sir import SIRProposal

PROVENANCE = ["seed", "n", "m", "mcmc_steps", "P", "proposal"]

QUERY_KINDS = ("entropy", "conditional-entropy", "cmi", "total-correlation",
               "interaction", "dual", "rank", "pair-grid")


# --- config helpers ---------------------------------------------------------


def _get(doc, key, field, kind=None, default=...):
    if not isinstance(doc, dict):
        raise ConfigError(f"{field}: expected an object")
    if key not in doc:
        if default is ...:
            raise ConfigError(f"{field}.{key}: missing")
        return default
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"{field}.{key}: expected {getattr(kind, '__name__', kind)}")
    return value


def estimator_config(doc: dict, seed_override=None) -> tuple[EstimatorConfig, bool]:
    est = _get(doc, "estimator", "config", dict, default={})
    allowed = {"n", "m", "mcmc_steps", "seed", "workers", "shared_outer"}
    extra = set(est) - allowed
    if extra:
        raise ConfigError(f"estimator.{sorted(extra)[0]}: unknown field")
    try:
        cfg = EstimatorConfig(
            n=int(est.get("n", 100)),
            m=int(est.get("m", 1)),
            mcmc_steps=int(est.get("mcmc_steps", 0)),
            seed=int(est.get("seed", 0) if seed_override is None else seed_override),
            workers=int(est.get("workers", 1)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"estimator: {exc}") from None
    return cfg, bool(est.get("shared_outer", True))


BUILTIN_MODELS = {
    "two-node": lambda p: bayesnet.two_node_network(**p),
    "xor": lambda p: bayesnet.xor_network(**p),
    "independent": lambda p: bayesnet.independent_network(**p),
    "copy": lambda p: bayesnet.copy_network(**p),
    "disease": lambda p: bayesnet.disease_network(**p),
    "pinned-disease": lambda p: bayesnet.pinned_disease_network(**p),
    "mvn": lambda p: gaussian.benchmark_mvn(**p),
    "bivariate-normal": lambda p: gaussian.bivariate_normal(**p),
    "ssm": lambda p: statespace.LinearGaussianSSM(statespace.SSMParams.from_dict(p)),
    "gain-ssm": lambda p: statespace.default_gain_model(**p),
}


def load_model(spec: Any, base_dir: Path | None = None):
    """Model from ``{"builtin": name, ...params}`` or ``{"path": file}``."""
    if not isinstance(spec, dict):
        raise ConfigError("model: expected an object")
    if "path" in spec:
        path = Path(spec["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return bayesnet.DiscreteBayesNet.load(path)
    name = _get(spec, "builtin", "model", str)
    if name not in BUILTIN_MODELS:
        raise ConfigError(f"model.builtin: unknown model {name!r}")
    params = {k: v for k, v in spec.items() if k != "builtin"}
    try:
        return BUILTIN_MODELS[name](params)
    except TypeError as exc:
        raise ConfigError(f"model: bad parameters for {name!r}: {exc}") from None


def _addresses(model, value, field):
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list):
        raise ConfigError(f"{field}: expected a list of addresses")
    try:
        out = [as_address(v) for v in value]
    except (ValueError, TypeError):
        raise ConfigError(f"{field}: malformed address in {value!r}") from None
    known = set(model.addresses)
    for a in out:
        if a not in known:
            raise ConfigError(f"{field}: unknown address {str(a)!r}")
    return out


def _spec_particles(spec) -> int:
    if isinstance(spec, dict):
        return int(spec.get("P", 1))
    return 1


# --- rows -------------------------------------------------------------------

RUN_COLUMNS = ["query_id", "row", "name", "coef", "kind", "point", "stderr",
               "lower", "upper", "midpoint", "width", "invalid", "exact"] + PROVENANCE


def _provenance(cfg, spec):
    return {"seed": cfg.seed, "n": cfg.n, "m": cfg.m, "mcmc_steps": cfg.mcmc_steps,
            "P": _spec_particles(spec), "proposal": proposal_id(spec)}


def measure_rows(query_id, est: MeasureEstimate, cfg, spec, exact=None, timing=False):
    prov = _provenance(cfg, spec)
    rows = []
    for te in est.term_estimates:
        for b in (te.lower, te.upper):
            row = {"query_id": query_id, "row": "term", "name": te.term.name, "coef": te.term.coef,
                   "kind": b.kind, "point": b.point, "stderr": b.stderr, "invalid": b.invalid}
            row.update(prov)
            row["P"] = b.n_particles
            if timing:
                row["wall_time_ms"] = b.wall_time_ms
            rows.append(row)
    row = {"query_id": query_id, "row": "measure", "name": est.plan.kind,
           "lower": est.lower.point, "upper": est.upper.point, "midpoint": est.midpoint,
           "width": est.width, "invalid": est.invalid, "exact": exact}
    row.update(prov)
    rows.append(row)
    return rows


def _exact_entropy_fn(model):
    if isinstance(model, bayesnet.DiscreteBayesNet):
        try:
            model.joint_table
        except Exception:
            return None
        return model.entropy
    if isinstance(model, gaussian.MVNModel):
        return model.exact_entropy
    return None


def run_query(doc: dict, seed=None, base_dir=None):
    """Execute the single query of a ``run`` config."""
    model = load_model(_get(doc, "model", "config"), base_dir)
    query = _get(doc, "query", "config", dict)
    kind = _get(query, "kind", "query", str)
    if kind not in QUERY_KINDS:
        raise ConfigError(f"query.kind: unknown query {kind!r}")
    spec = doc.get("proposal", "prior")
    cfg, shared = estimator_config(doc, seed)
    timing = bool(doc.get("record_timing", False))
    factory = make_factory(spec, cfg.seed)
    qid = str(doc.get("query_id", kind))
    exact_h = _exact_entropy_fn(model)
    columns = RUN_COLUMNS + (["wall_time_ms"] if timing else [])

    def sets_arg(key):
        raw = _get(query, key, "query", list)
        if len(raw) < 2:
            raise ConfigError(f"query.{key}: need at least two argument sets")
        return [_addresses(model, s, f"query.{key}[{i}]") for i, s in enumerate(raw)]

    def a0_arg():
        return _addresses(model, query.get("a0", []), "query.a0")

    try:
        if kind == "entropy":
            targets = _addresses(model, _get(query, "targets", "query"), "query.targets")
            sel = select(model, targets, allow_full=True)
            prop = None if sel.is_full else factory(model, sel)
            iv = entropy_interval(model, sel, prop, cfg=cfg, shared_outer=shared)
            plan = CompositionPlan("entropy", [PlanTerm(frozenset(sel.targets), 1.0)], shared)
            est = MeasureEstimate(iv.lower, iv.upper, plan=plan,
                                  term_estimates=[TermEstimate(plan.terms[0], iv.lower, iv.upper)])
        elif kind == "conditional-entropy":
            est = conditional_entropy_interval(
                model, _addresses(model, _get(query, "a1", "query"), "query.a1"),
                _addresses(model, _get(query, "a2", "query"), "query.a2"), factory, cfg, shared)
        elif kind == "cmi":
            est = cmi_interval(
                model, _addresses(model, _get(query, "a1", "query"), "query.a1"),
                _addresses(model, _get(query, "a2", "query"), "query.a2"), a0_arg(), factory, cfg, shared)
        elif kind == "total-correlation":
            est = total_correlation_interval(model, sets_arg("sets"), a0_arg(), factory, cfg, shared)
        elif kind == "interaction":
            est = interaction_information_interval(model, sets_arg("sets"), a0_arg(), factory, cfg, shared)
        elif kind == "dual":
            est = dual_correlation_interval(model, sets_arg("sets"), a0_arg(), factory, cfg, shared)
        elif kind == "rank":
            return experiment_rank(doc, seed, base_dir, model=model)
        else:
            return experiment_pair_grid(doc, seed, model=model)
    except InvalidSelection as exc:
        raise ConfigError(f"query: {exc}") from None
    exact = exact_measure(est.plan, exact_h) if exact_h is not None else None
    rows = measure_rows(qid, est, cfg, spec, exact, timing)
    return columns, rows, est.invalid


# --- experiment sweeps ------------------------------------------------------

MVN_COLUMNS = ["proposal", "P", "lower", "upper", "width", "lower_stderr", "upper_stderr",
               "width_stderr", "truth", "seed", "n", "m", "d"]


@dataclass
class SweepCell:
    proposal: str
    P: int
    interval: Any


def mvn_sweep(d=10, rho=0.8, proposals=("prior", "regression"), P_grid=(4, 16, 64, 256, 1024),
              cfg: EstimatorConfig | None = None, n_train=5000, split=None):
    """Bounds on the entropy of the last ``d/2`` coordinates across SIR sizes.

    The same outer draws feed every cell, so widths are paired across cells.
    """
    if d % 2 or d < 2 or d > 100:
        raise ConfigError("d: must be even and between 2 and 100")
    model = gaussian.benchmark_mvn(d, rho=rho)
    k = d // 2 if split is None else int(split)
    sel = select(model, [f"z{i}" for i in range(d - k, d)])
    truth = gaussian.mvn_subset_entropy(model, sel)
    cells = []
    for name in proposals:
        base = build_proposal({"kind": name, "n_train": n_train} if name == "regression" else name,
                              model, sel, cfg.seed)
        for P in P_grid:
            iv = entropy_interval(model, sel, SIRProposal(base, int(P)), cfg=cfg)
            cells.append(SweepCell(name, int(P), iv))
    return model, sel, truth, cells


def width_stderr(iv) -> float:
    w = iv.upper.replicate_means - iv.lower.replicate_means
    return float(w.std(ddof=1) / np.sqrt(len(w))) if len(w) > 1 else 0.0


def experiment_mvn(doc: dict, seed=None, base_dir=None):
    cfg, _ = estimator_config(doc, seed)
    d = int(doc.get("d", 10))
    proposals = doc.get("proposals", ["prior", "regression"])
    for p in proposals:
        if p not in ("prior", "regression", "exact"):
            raise ConfigError(f"proposals: unknown proposal {p!r}")
    grid = [int(p) for p in doc.get("P_grid", [4, 16, 64, 256, 1024])]
    if not grid or any(p < 1 for p in grid):
        raise ConfigError("P_grid: must be a nonempty list of positive integers")
    _, _, truth, cells = mvn_sweep(d, float(doc.get("rho", 0.8)), proposals, grid, cfg,
                                   int(doc.get("n_train", 5000)))
    rows = []
    for c in cells:
        iv = c.interval
        rows.append({"proposal": c.proposal, "P": c.P, "lower": iv.lower.point, "upper": iv.upper.point,
                     "width": iv.width, "lower_stderr": iv.lower.stderr, "upper_stderr": iv.upper.stderr,
                     "width_stderr": width_stderr(iv), "truth": truth, "seed": cfg.seed,
                     "n": cfg.n, "m": cfg.m, "d": d})
    invalid = any(c.interval.invalid for c in cells)
    return MVN_COLUMNS, rows, invalid


RANK_COLUMNS = ["rank", "candidate", "midpoint", "lower", "upper", "width", "exact"] + PROVENANCE


def experiment_rank(doc: dict, seed=None, base_dir=None, model=None):
    if model is None:
        model = load_model(doc.get("model", {"builtin": "pinned-disease"}), base_dir)
    query = doc.get("query", doc)
    cfg, shared = estimator_config(doc, seed)
    spec = doc.get("proposal", {"kind": "sir", "P": 64})
    raw = query.get("candidates")
    if not raw:
        raise ConfigError("candidates: empty candidate list")
    if isinstance(raw, dict):
        cands = {str(k): _addresses(model, v, f"candidates.{k}") for k, v in raw.items()}
    elif isinstance(raw, list):
        cands = {str(c): _addresses(model, c, "candidates") for c in raw}
    else:
        raise ConfigError("candidates: expected a list or an object")
    target = _addresses(model, _get(query, "target", "query"), "target")
    cond = _addresses(model, query.get("conditioning", []), "conditioning")
    try:
        ranked = rank_by_conditional_entropy(model, cands, target, cond, make_factory(spec, cfg.seed),
                                             cfg, shared)
    except InvalidSelection as exc:
        raise ConfigError(f"candidates: {exc}") from None
    exact_h = _exact_entropy_fn(model)
    rows = []
    for r, item in enumerate(ranked, start=1):
        exact = exact_measure(item.estimate.plan, exact_h) if exact_h else None
        row = {"rank": r, "candidate": item.name, "midpoint": item.midpoint,
               "lower": item.estimate.lower.point, "upper": item.estimate.upper.point,
               "width": item.estimate.width, "exact": exact}
        row.update(_provenance(cfg, spec))
        rows.append(row)
    return RANK_COLUMNS, rows, any(i.estimate.invalid for i in ranked)


GRID_COLUMNS = ["t1", "t2", "lower", "upper", "midpoint", "width", "exact", "argmax"] + PROVENANCE


def experiment_pair_grid(doc: dict, seed=None, base_dir=None, model=None):
    if model is None:
        ssm_doc = dict(doc.get("ssm", {}))
        horizon = int(ssm_doc.get("horizon", 6))
        if horizon < 2:
            raise ConfigError("ssm.horizon: need at least two observation times for a pair")
        if "gain_grid" not in ssm_doc:
            ssm_doc.setdefault("gain_grid", [0.5, 1.0, 1.5, 2.0])
        if "inputs" not in ssm_doc:
            inputs = [0.0] * horizon
            inputs[1] = 2.0
            ssm_doc["inputs"] = inputs
            ssm_doc.setdefault("r", 0.2)
        try:
            model = statespace.LinearGaussianSSM(statespace.SSMParams.from_dict(ssm_doc))
        except TypeError as exc:
            raise ConfigError(f"ssm: {exc}") from None
    if not isinstance(model, statespace.LinearGaussianSSM):
        raise ConfigError("model: pair grids need a state-space model")
    if model.horizon < 2:
        raise ConfigError("ssm.horizon: need at least two observation times for a pair")
    cfg, shared = estimator_config(doc, seed)
    spec = doc.get("proposal", {"kind": "smc", "P": 64, "schedule": "trajectory"})
    target = doc.get("target", ["theta"])
    target = _addresses(model, target, "target")
    grid = statespace.ssm_measurement_pair_grid(model, target, make_factory(spec, cfg.seed), cfg,
                                                shared_outer=shared)
    best = grid.argmax
    exact_ok = model.has_gain and target == [statespace.THETA]
    rows = []
    for (t1, t2), est in sorted(grid.cells.items()):
        row = {"t1": t1, "t2": t2, "lower": est.lower.point, "upper": est.upper.point,
               "midpoint": est.midpoint, "width": est.width,
               "exact": statespace.ssm_gain_cmi(model, [t1, t2]) if exact_ok else None,
               "argmax": (t1, t2) == best}
        row.update(_provenance(cfg, spec))
        rows.append(row)
    return GRID_COLUMNS, rows, any(e.invalid for e in grid.cells.values())


BASELINE_COLUMNS = ["estimator", "parameter", "replicate", "estimate", "lower", "upper", "truth",
                    "seed", "n", "m", "P", "proposal"]


def baseline_compare(doc: dict, seed=None, base_dir=None):
    """Entropy intervals across ``P_grid`` against kNN estimates across ``N_grid``.

    ``replicates`` independent repetitions per grid value; the kNN baseline
    only sees simulated target values.
    """
    model = load_model(doc.get("model", {"builtin": "mvn", "d": 2, "rho": 0.5}), base_dir)
    cfg, shared = estimator_config(doc, seed)
    targets = _addresses(model, _get(doc, "targets", "config"), "targets")
    try:
        sel = select(model, targets, allow_full=True)
    except InvalidSelection as exc:
        raise ConfigError(f"targets: {exc}") from None
    base = doc.get("base", "prior")
    P_grid = [int(p) for p in doc.get("P_grid", [4, 16, 64, 256])]
    N_grid = [int(p) for p in doc.get("N_grid", [1000, 10000])]
    reps = int(doc.get("replicates", 5))
    k = int(doc.get("k", 4))
    timing = bool(doc.get("record_timing", False))
    exact_h = _exact_entropy_fn(model)
    truth = exact_h(sel.targets) if exact_h else None
    rows = []

    def interval(P):
        out = []
        for r in range(reps):
            factory = make_factory({"kind": "sir", "P": P, "base": base}, cfg.seed)
            iv = entropy_interval(model, sel, factory(model, sel), cfg=cfg, shared_outer=shared, key=(r,))
            out += [iv.lower.point, iv.upper.point]
        return out

    def knn(N):
        out = []
        for r in range(reps):
            sims = model.simulate(substream(cfg.seed, 11, N, r), size=N)
            data = np.stack([np.asarray(sims[a], dtype=float) for a in sel.targets], axis=1)
            out.append(knn_entropy(data, KnnEntropyConfig(k=k, jitter_seed=r)))
        return out

    tasks = [(name, fn, grid) for name, fn, grid in (("interval", interval, P_grid), ("knn", knn, N_grid)) if grid]
    if not tasks:
        raise ConfigError("P_grid, N_grid: both grids are empty")
    records = runtime_profile(tasks)
    for rec in records:
        vals = rec.estimates
        if rec.estimator == "interval":
            for r in range(reps):
                lo, hi = vals[2 * r], vals[2 * r + 1]
                rows.append({"estimator": "interval", "parameter": rec.parameter, "replicate": r,
                             "estimate": 0.5 * (lo + hi), "lower": lo, "upper": hi, "truth": truth,
                             "seed": cfg.seed, "n": cfg.n, "m": cfg.m, "P": int(rec.parameter),
                             "proposal": proposal_id({"kind": "sir", "P": int(rec.parameter), "base": base}),
                             "wall_time_ms": rec.wall_time_ms})
        else:
            for r, v in enumerate(vals):
                rows.append({"estimator": "knn", "parameter": rec.parameter, "replicate": r,
                             "estimate": v, "truth": truth, "seed": cfg.seed, "n": int(rec.parameter),
                             "proposal": f"knn-k{k}", "wall_time_ms": rec.wall_time_ms})
    columns = BASELINE_COLUMNS + (["wall_time_ms"] if timing else [])
    return columns, rows, False
