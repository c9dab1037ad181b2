"""Discrete Bayesian networks with exact enumeration.

JSON schema::

    {
      "variables": [{"name": "A", "cardinality": 2}, ...],
      "edges": [["A", "B"], ...],
      "cpts": {"A": [[0.7, 0.3]], "B": [[0.8, 0.2], [0.1, 0.9]]}
    }

A node's parents are ordered by their appearance in ``edges``.  Each CPT is a
list of rows, one per parent configuration in row-major order (first parent
varies slowest), each row a distribution over the node's states.
"""

from __future__ import annotations

import itertools
import json
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..errors import ModelLoadError, TooLargeToEnumerate
from ..logspace import sample_rows
from ..model import Address, Discrete, JointModel, as_address
from ..proposals.base import BasicProposal

MAX_ENUMERATION = 2**20
ROW_TOL = 1e-9


class DiscreteBayesNet(JointModel):
    """Categorical variables on a DAG with tabular conditionals.

    Parameters
    ----------
    cardinalities : mapping of name to int
        Declared variables, in declaration order.
    parents : mapping of name to list of names
        Ordered parent list per node (roots may be omitted).
    cpts : mapping of name to array_like
        Array of shape ``(*parent_cardinalities, cardinality)``.
    """

    can_simulate_latents = True
    can_resimulate_sites = True

    def __init__(self, cardinalities: Mapping[str, int], parents: Mapping[str, Sequence[str]], cpts):
        self.names = list(cardinalities)
        self.cardinality = {n: int(c) for n, c in cardinalities.items()}
        self.parents = {n: list(parents.get(n, ())) for n in self.names}
        for n, ps in self.parents.items():
            for p in ps:
                if p not in self.cardinality:
                    raise ModelLoadError(f"node {n!r}: unknown parent {p!r}")
        self.order = _topological_order(self.names, self.parents)
        self.cpts = {}
        for n in self.names:
            if n not in cpts:
                raise ModelLoadError(f"node {n!r}: missing CPT")
            shape = tuple(self.cardinality[p] for p in self.parents[n]) + (self.cardinality[n],)
            try:
                table = np.asarray(cpts[n], dtype=float)
            except (ValueError, TypeError):
                raise ModelLoadError(f"node {n!r}: CPT is ragged or non-numeric") from None
            try:
                table = table.reshape(shape)
            except ValueError:
                raise ModelLoadError(
                    f"node {n!r}: CPT has {table.size} entries, expected shape {shape}"
                ) from None
            if np.any(table < 0) or not np.all(np.isfinite(table)):
                raise ModelLoadError(f"node {n!r}: CPT has negative or non-finite entries")
            sums = table.sum(axis=-1)
            bad = np.abs(sums - 1.0) > ROW_TOL
            if np.any(bad):
                row = int(np.flatnonzero(bad.ravel())[0])
                raise ModelLoadError(
                    f"node {n!r}: CPT row {row} sums to {sums.ravel()[row]:.12g}, not 1"
                )
            self.cpts[n] = table
        with np.errstate(divide="ignore"):
            self._logcpt = {n: np.log(t) for n, t in self.cpts.items()}
        self.addresses = tuple(Address(n) for n in self.order)
        self.supports = {Address(n): Discrete(self.cardinality[n]) for n in self.order}

    # --- construction -------------------------------------------------------

    @classmethod
    def from_dict(cls, doc: Mapping) -> DiscreteBayesNet:
        try:
            variables = doc["variables"]
            cards = {v["name"]: int(v["cardinality"]) for v in variables}
            edges = doc.get("edges", [])
            cpts = doc["cpts"]
        except (KeyError, TypeError) as exc:
            raise ModelLoadError(f"malformed network document: {exc}") from None
        if len(cards) != len(variables):
            raise ModelLoadError("duplicate variable names")
        for n, c in cards.items():
            if c < 1:
                raise ModelLoadError(f"node {n!r}: cardinality must be >= 1")
        parents: dict[str, list[str]] = {n: [] for n in cards}
        for edge in edges:
            if len(edge) != 2:
                raise ModelLoadError(f"malformed edge {edge!r}")
            parent, child = edge
            if child not in cards or parent not in cards:
                raise ModelLoadError(f"edge {edge!r} references an unknown node")
            parents[child].append(parent)
        return cls(cards, parents, cpts)

    @classmethod
    def from_json(cls, text: str) -> DiscreteBayesNet:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelLoadError(f"invalid JSON: {exc}") from None
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path) -> DiscreteBayesNet:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ModelLoadError(f"cannot read {path}: {exc}") from None
        return cls.from_json(text)

    def to_dict(self) -> dict:
        return {
            "variables": [{"name": n, "cardinality": self.cardinality[n]} for n in self.names],
            "edges": [[p, n] for n in self.names for p in self.parents[n]],
            "cpts": {
                n: self.cpts[n].reshape(-1, self.cardinality[n]).tolist() for n in self.names
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def save(self, path):
        Path(path).write_text(self.to_json())

    # --- densities ----------------------------------------------------------

    def _log_joint(self, a):
        total = 0.0
        for n in self.order:
            total = total + self._site_log_prob(n, a[Address(n)], a)
        return np.asarray(total, dtype=float)

    def _site_log_prob(self, n, value, a):
        vals = [np.asarray(a[Address(p)]) for p in self.parents[n]] + [np.asarray(value)]
        vals = np.broadcast_arrays(*vals)
        names = self.parents[n] + [n]
        ok = np.ones(vals[0].shape, dtype=bool)
        idx = []
        for name, v in zip(names, vals):
            card = self.cardinality[name]
            ok &= Discrete(card).contains(v)
            idx.append(np.clip(np.where(np.isfinite(v), v, 0).astype(np.int64), 0, card - 1))
        lp = self._logcpt[n][tuple(idx)]
        return np.where(ok, lp, -np.inf)

    def _sample_site(self, rng, n, a, shape):
        pvals = tuple(
            np.broadcast_to(np.asarray(a[Address(p)], dtype=np.int64), shape)
            for p in self.parents[n]
        )
        probs = self.cpts[n][pvals] if pvals else np.broadcast_to(self.cpts[n], shape + (self.cardinality[n],))
        value = sample_rows(rng, probs)
        return value, np.log(np.take_along_axis(probs, value[..., None], axis=-1)[..., 0])

    def simulate(self, rng, size=None):
        shape = () if size is None else (int(size),)
        a = {}
        for n in self.order:
            a[Address(n)], _ = self._sample_site(rng, n, a, shape)
        return a

    def simulate_latents_given(self, rng, y, latents, size=None):
        shape = () if size is None else (int(size),)
        latent_set = set(latents)
        a = dict(y)
        x = {}
        log_q = np.zeros(shape)
        for n in self.order:
            addr = Address(n)
            if addr in latent_set:
                value, lq = self._sample_site(rng, n, a, shape)
                a[addr] = x[addr] = value
                log_q = log_q + lq
        return x, log_q

    def site_propose(self, rng, address, a):
        shape = np.shape(a[address])
        return self._sample_site(rng, address.name, a, shape)

    def site_logpdf(self, address, value, a):
        return self._site_log_prob(address.name, value, a)

    # --- exact enumeration --------------------------------------------------

    @property
    def table_size(self) -> int:
        return int(np.prod([self.cardinality[n] for n in self.order], dtype=float))

    @cached_property
    def joint_table(self) -> np.ndarray:
        """Full joint probability table with axes in :attr:`addresses` order."""
        if self.table_size > MAX_ENUMERATION:
            raise TooLargeToEnumerate(
                f"joint table has {self.table_size} cells (limit {MAX_ENUMERATION})"
            )
        axis = {n: i for i, n in enumerate(self.order)}
        shape = [self.cardinality[n] for n in self.order]
        joint = np.ones(shape)
        for n in self.order:
            names = self.parents[n] + [n]
            perm = np.argsort([axis[m] for m in names])
            factor = np.transpose(self.cpts[n], perm)
            sorted_axes = sorted(axis[m] for m in names)
            view = [1] * len(shape)
            for ax in sorted_axes:
                view[ax] = shape[ax]
            joint = joint * factor.reshape(view)
        return joint

    def marginal(self, targets) -> np.ndarray:
        """Exact marginal table over ``targets`` (axes in model order)."""
        wanted = {as_address(t) for t in targets}
        keep = [i for i, a in enumerate(self.addresses) if a in wanted]
        drop = tuple(i for i in range(len(self.addresses)) if i not in keep)
        return self.joint_table.sum(axis=drop)

    def entropy(self, targets) -> float:
        """Exact Shannon entropy of ``targets`` in nats."""
        return table_entropy(self.marginal(targets))


def table_entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def table_kl(p, q) -> float:
    """KL(p || q) between two distributions over the same finite set."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    nz = p > 0
    if np.any(q[nz] == 0):
        return float("inf")
    return float(np.sum(p[nz] * (np.log(p[nz]) - np.log(q[nz]))))


def _topological_order(names, parents):
    order, state = [], {}

    def visit(n, stack):
        s = state.get(n)
        if s == 1:
            cycle = " -> ".join(stack[stack.index(n):] + [n])
            raise ModelLoadError(f"graph is cyclic: {cycle}")
        if s == 2:
            return
        state[n] = 1
        for p in parents[n]:
            visit(p, stack + [n])
        state[n] = 2
        order.append(n)

    for n in names:
        visit(n, [])
    return order


# --- builtin networks -------------------------------------------------------


def two_node_network(p_a=0.3, p_b_given_a1=0.9, p_b_given_a0=0.2) -> DiscreteBayesNet:
    """``A -> B`` with binary nodes."""
    return DiscreteBayesNet(
        {"A": 2, "B": 2},
        {"B": ["A"]},
        {
            "A": [1 - p_a, p_a],
            "B": [[1 - p_b_given_a0, p_b_given_a0], [1 - p_b_given_a1, p_b_given_a1]],
        },
    )


def xor_network() -> DiscreteBayesNet:
    """Two fair bits and their exclusive or."""
    xor = np.zeros((2, 2, 2))
    for i, j in itertools.product(range(2), repeat=2):
        xor[i, j, i ^ j] = 1.0
    return DiscreteBayesNet(
        {"A1": 2, "A2": 2, "A3": 2},
        {"A3": ["A1", "A2"]},
        {"A1": [0.5, 0.5], "A2": [0.5, 0.5], "A3": xor},
    )


def independent_network(cardinalities=(2, 2, 3), seed=0) -> DiscreteBayesNet:
    """Mutually independent root variables ``V0, V1, ...`` with random marginals."""
    rng = np.random.default_rng(seed)
    cards = {f"V{i}": int(k) for i, k in enumerate(cardinalities)}
    cpts = {n: rng.dirichlet(np.full(k, 2.0)) for n, k in cards.items()}
    return DiscreteBayesNet(cards, {}, cpts)


def copy_network(k=3, extra=True) -> DiscreteBayesNet:
    """Uniform ``S`` with an exact copy ``C``; optionally an unrelated ``N``."""
    cards = {"S": k, "C": k}
    cpts = {"S": np.full(k, 1.0 / k), "C": np.eye(k)}
    parents = {"C": ["S"]}
    if extra:
        cards["N"] = 2
        cpts["N"] = [0.35, 0.65]
    return DiscreteBayesNet(cards, parents, cpts)


def disease_network(n_attributes=3, n_diseases=3, n_symptoms=6, seed=0,
                    concentration=0.6, max_parents=2) -> DiscreteBayesNet:
    """Layered synthetic diagnosis network (attributes -> diseases -> symptoms).

    Attributes are roots; each disease depends on up to ``max_parents``
    attributes; each symptom depends on up to ``max_parents`` diseases.
    CPT rows are Dirichlet(``concentration``) draws, so relationships are
    fairly sharp. Cardinalities alternate between 2 and 3.
    """
    rng = np.random.default_rng(seed)
    cards, parents, cpts = {}, {}, {}

    def add(name, card, pars):
        cards[name] = card
        parents[name] = pars
        shape = tuple(cards[p] for p in pars)
        rows = rng.dirichlet(np.full(card, concentration), size=int(np.prod(shape, dtype=int)))
        # keep the tables away from exact zeros
        rows = 0.98 * rows + 0.02 / card
        cpts[name] = rows.reshape(shape + (card,))

    attrs = [f"attr{i}" for i in range(n_attributes)]
    dis = [f"disease{i}" for i in range(n_diseases)]
    sym = [f"symptom{i}" for i in range(n_symptoms)]
    for i, a in enumerate(attrs):
        add(a, 2 + (i % 2), [])
    for d in dis:
        k = int(rng.integers(1, max_parents + 1))
        add(d, 2, sorted(rng.choice(attrs, size=k, replace=False).tolist()))
    for i, s in enumerate(sym):
        k = int(rng.integers(1, max_parents + 1))
        add(s, 2 + (i % 3 == 2), sorted(rng.choice(dis, size=k, replace=False).tolist()))
    return DiscreteBayesNet(cards, parents, cpts)


PINNED_NETWORK_PATH = Path(__file__).resolve().parent.parent / "data" / "disease12.json"


def pinned_disease_network() -> DiscreteBayesNet:
    """The shipped 12-node diagnosis network used by the acceptance suite."""
    return DiscreteBayesNet.load(PINNED_NETWORK_PATH)



class BNPosteriorProposal(BasicProposal):
    """Exact ``p(x | y)`` of an enumerable network, read off the joint table."""

    label = "exact"

    def __init__(self, model: DiscreteBayesNet, selection):
        super().__init__(model, selection)
        table = model.joint_table
        addrs = list(model.addresses)
        t_axes = [addrs.index(a) for a in selection.targets]
        l_axes = [addrs.index(a) for a in selection.latents]
        t_shape = tuple(table.shape[i] for i in t_axes)
        self._l_shape = tuple(table.shape[i] for i in l_axes)
        joint = np.transpose(table, t_axes + l_axes).reshape(t_shape + (-1,))
        with np.errstate(invalid="ignore", divide="ignore"):
            self._cond = joint / joint.sum(axis=-1, keepdims=True)
            self._log_cond = np.log(self._cond)

    def _row(self, y):
        idx = tuple(int(y[a]) for a in self.selection.targets)
        return self._cond[idx], self._log_cond[idx]

    def propose(self, rng, y, size=None):
        probs, logs = self._row(y)
        shape = () if size is None else (int(size),)
        flat = sample_rows(rng, np.broadcast_to(probs, shape + probs.shape))
        parts = np.unravel_index(flat, self._l_shape)
        x = {a: np.asarray(v) for a, v in zip(self.selection.latents, parts)}
        return x, logs[flat]

    def assess(self, x, y):
        _, logs = self._row(y)
        vals = [np.asarray(x[a], dtype=np.int64) for a in self.selection.latents]
        flat = np.ravel_multi_index(vals, self._l_shape, mode="clip")
        return logs[flat]
