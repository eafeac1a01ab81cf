"""Multiclass linear SVM trained by dual coordinate descent.

Each binary subproblem is the L2-regularized L1-hinge SVM solved in the dual
with box constraints [0, C], liblinear-style: one dual variable per training
row, exact coordinate minimization, seeded shuffling each epoch, convergence
when the largest projected-gradient violation falls below tol. The bias is an
augmented constant feature inside the solver, so w and b converge together.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .errors import ConfigError, DataError, NumericError
from .tfidf import SparseMatrix

SVM_SCHEMES = ("one-vs-one", "one-vs-rest")
MODEL_FORMAT = "banglastylo.linear-svm"
MODEL_VERSION = 1


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    tol: float = 1e-3
    max_iter: int = 10000  # epoch cap per binary machine
    scheme: str = "one-vs-one"
    seed: int = 0

    def __post_init__(self):
        if self.C <= 0:
            raise ConfigError(f"C must be positive, got {self.C}")
        if self.tol <= 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.scheme not in SVM_SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SVM_SCHEMES}")

    def to_dict(self) -> dict:
        return {"C": self.C, "tol": self.tol, "max_iter": self.max_iter,
                "scheme": self.scheme, "seed": self.seed}

    @classmethod
    def from_dict(cls, payload: dict) -> "SvmConfig":
        base = cls()
        return cls(
            C=float(payload.get("C", base.C)),
            tol=float(payload.get("tol", base.tol)),
            max_iter=int(payload.get("max_iter", base.max_iter)),
            scheme=payload.get("scheme", base.scheme),
            seed=int(payload.get("seed", base.seed)),
        )


@dataclass(eq=False)
class BinaryMachine:
    """One hyperplane. pos/neg are class indices; neg = -1 means 'rest'."""

    pos: int
    neg: int
    weights: np.ndarray
    bias: float
    epochs: int
    converged: bool
    final_violation: float
    objective_trace: np.ndarray | None = None  # dual objective per epoch
    alphas: np.ndarray | None = None           # dual variables at the last epoch


@dataclass(eq=False)
class SvmModel:
    scheme: str
    classes: tuple[str, ...]
    n_features: int
    machines: tuple[BinaryMachine, ...]
    config: SvmConfig

    def stacked(self):
        """(V, M) weight matrix and (M,) bias vector, cached."""
        cached = getattr(self, "_stacked", None)
        if cached is None:
            wt = np.empty((self.n_features, len(self.machines)), dtype=np.float64)
            for m, mach in enumerate(self.machines):
                wt[:, m] = mach.weights
            bias = np.array([m.bias for m in self.machines], dtype=np.float64)
            cached = (np.ascontiguousarray(wt), bias)
            self._stacked = cached
        return cached


@njit(cache=True)
def _dcd_solve(data, indices, indptr, yb, qii, n_features, C, tol, max_epochs, seed):
    # Dual minimization of 0.5*a'Qa - e'a over [0, C]^n, tracked in the
    # maximization form sum(a) - 0.5*||w_aug||^2 for the monotonicity log.
    n = yb.shape[0]
    w = np.zeros(n_features + 1)
    alpha = np.zeros(n)
    trace = np.empty(max_epochs)
    np.random.seed(seed)
    bias_slot = n_features
    epochs = 0
    final_pg = np.inf
    for ep in range(max_epochs):
        order = np.random.permutation(n)
        max_pg = 0.0
        for t in range(n):
            i = order[t]
            lo = indptr[i]
            hi = indptr[i + 1]
            s = w[bias_slot]
            for k in range(lo, hi):
                s += w[indices[k]] * data[k]
            g = yb[i] * s - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = g if g < 0.0 else 0.0
            elif a >= C:
                pg = g if g > 0.0 else 0.0
            else:
                pg = g
            apg = -pg if pg < 0.0 else pg
            if apg > max_pg:
                max_pg = apg
            if apg > 0.0:
                na = a - g / qii[i]
                if na < 0.0:
                    na = 0.0
                elif na > C:
                    na = C
                d = (na - a) * yb[i]
                if d != 0.0:
                    alpha[i] = na
                    for k in range(lo, hi):
                        w[indices[k]] += d * data[k]
                    w[bias_slot] += d
        obj = 0.0
        for i in range(n):
            obj += alpha[i]
        wsq = 0.0
        for j in range(w.shape[0]):
            wsq += w[j] * w[j]
        trace[ep] = obj - 0.5 * wsq
        epochs = ep + 1
        final_pg = max_pg
        if max_pg < tol:
            break
    return w, alpha, epochs, final_pg, trace


def _machine_seed(base: int, index: int) -> int:
    return ((base & 0x7FFFFFFF) * 1000003 + index * 10007 + 1) % 2147483647


def _row_squared_norms(x: SparseMatrix) -> np.ndarray:
    sq = x.data * x.data
    cs = np.concatenate((np.zeros(1), np.cumsum(sq)))
    return cs[x.indptr[1:]] - cs[x.indptr[:-1]]


def _subproblem(x: SparseMatrix, rows: np.ndarray):
    lens = x.indptr[rows + 1] - x.indptr[rows]
    indptr = np.zeros(rows.shape[0] + 1, dtype=np.int64)
    np.cumsum(lens, out=indptr[1:])
    total = int(indptr[-1])
    indices = np.empty(total, dtype=np.int32)
    data = np.empty(total, dtype=np.float64)
    for k in range(rows.shape[0]):
        r = rows[k]
        lo, hi = x.indptr[r], x.indptr[r + 1]
        indices[indptr[k]:indptr[k + 1]] = x.indices[lo:hi]
        data[indptr[k]:indptr[k + 1]] = x.data[lo:hi]
    return data, indices, indptr


def train_svm(X: SparseMatrix, y, config: SvmConfig | None = None,
              class_labels=None) -> SvmModel:
    """Train one machine per class pair (one-vs-one) or per class
    (one-vs-rest). Deterministic given config.seed."""
    cfg = config or SvmConfig()
    y = np.asarray(y, dtype=np.int64)
    if y.shape[0] != X.rows:
        raise DataError(f"label count {y.shape[0]} does not match row count {X.rows}")
    if y.size == 0:
        raise DataError("cannot train on an empty matrix")
    if X.nnz and not np.all(np.isfinite(X.data)):
        raise NumericError("non-finite feature values in training matrix")
    if int(y.min()) < 0:
        raise DataError(f"labels must be non-negative, got {int(y.min())}")
    k = int(y.max()) + 1
    if k < 2:
        raise DataError("need at least two classes to train")
    counts = np.bincount(y, minlength=k)
    missing = np.nonzero(counts == 0)[0]
    if missing.size:
        raise DataError(f"class {int(missing[0])} absent from training labels")
    if class_labels is None:
        class_labels = tuple(str(i) for i in range(k))
    else:
        class_labels = tuple(class_labels)
        if len(class_labels) != k:
            raise DataError(f"{len(class_labels)} class labels for {k} classes")

    if cfg.scheme == "one-vs-one":
        pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    else:
        pairs = [(c, -1) for c in range(k)]

    row_sq = _row_squared_norms(X)
    machines = []
    for m_idx, (pos, neg) in enumerate(pairs):
        if neg >= 0:
            rows = np.nonzero((y == pos) | (y == neg))[0]
            yb = np.where(y[rows] == pos, 1.0, -1.0)
        else:
            rows = np.arange(X.rows, dtype=np.int64)
            yb = np.where(y == pos, 1.0, -1.0)
        data, indices, indptr = _subproblem(X, rows)
        qii = row_sq[rows] + 1.0  # augmented bias feature contributes 1
        w, alpha, epochs, pg, trace = _dcd_solve(
            data, indices, indptr, yb, qii, X.cols,
            cfg.C, cfg.tol, cfg.max_iter, _machine_seed(cfg.seed, m_idx),
        )
        machines.append(BinaryMachine(
            pos=pos, neg=neg,
            weights=w[:-1].copy(), bias=float(w[-1]),
            epochs=int(epochs), converged=bool(pg < cfg.tol),
            final_violation=float(pg),
            objective_trace=trace[:epochs].copy(),
            alphas=alpha,
        ))
    return SvmModel(scheme=cfg.scheme, classes=class_labels, n_features=X.cols,
                    machines=tuple(machines), config=cfg)


def decision_values(model: SvmModel, X: SparseMatrix) -> np.ndarray:
    """Row-by-machine margins <w, x> + b via exact sparse dot products."""
    if X.cols != model.n_features:
        raise DataError(f"matrix has {X.cols} columns, model expects {model.n_features}")
    wt, bias = model.stacked()
    out = np.empty((X.rows, len(model.machines)), dtype=np.float64)
    for i in range(X.rows):
        idx, vals = X.row(i)
        if idx.shape[0]:
            out[i] = vals @ wt[idx] + bias
        else:
            out[i] = bias
    return out


def labels_from_margins(model: SvmModel, margins: np.ndarray) -> np.ndarray:
    """Turn a (rows, machines) margin block into class indices.

    one-vs-one: majority vote, ties by the largest sum of signed margins over
    the tied classes, then lowest class index. one-vs-rest: argmax margin.
    A zero pairwise margin votes for the pair's second class. Row-wise pure,
    so any row subset yields the same labels as the full block.
    """
    if model.scheme == "one-vs-rest":
        return np.argmax(margins, axis=1).astype(np.int64)

    n_rows = margins.shape[0]
    k = len(model.classes)
    n_machines = len(model.machines)
    pos = np.array([m.pos for m in model.machines], dtype=np.int64)
    neg = np.array([m.neg for m in model.machines], dtype=np.int64)
    winners = np.where(margins > 0.0, pos[None, :], neg[None, :])
    votes = np.zeros((n_rows, k), dtype=np.int64)
    np.add.at(votes, (np.repeat(np.arange(n_rows), n_machines), winners.ravel()), 1)
    labels = np.argmax(votes, axis=1).astype(np.int64)
    best = votes[np.arange(n_rows), labels]
    tied = (votes == best[:, None]).sum(axis=1) > 1
    if np.any(tied):
        sums = np.zeros((n_rows, k), dtype=np.float64)
        for m, mach in enumerate(model.machines):
            sums[:, mach.pos] += margins[:, m]
            sums[:, mach.neg] -= margins[:, m]
        for i in np.nonzero(tied)[0]:
            candidates = votes[i] == best[i]
            labels[i] = int(np.argmax(np.where(candidates, sums[i], -np.inf)))
    return labels


def predict(model: SvmModel, X: SparseMatrix) -> np.ndarray:
    return labels_from_margins(model, decision_values(model, X))


# -------------------------------------------------------------- persistence

def save_model(model: SvmModel, path: str | Path) -> None:
    machines = []
    for m in model.machines:
        nz = np.nonzero(m.weights)[0]
        machines.append({
            "pos": m.pos,
            "neg": m.neg,
            "bias": m.bias,
            "weight_indices": nz.tolist(),
            "weight_values": m.weights[nz].tolist(),
            "epochs": m.epochs,
            "converged": m.converged,
            "final_violation": m.final_violation,
        })
    payload = {
        "format": MODEL_FORMAT,
        "format_version": MODEL_VERSION,
        "scheme": model.scheme,
        "classes": list(model.classes),
        "n_features": model.n_features,
        "config": model.config.to_dict(),
        "machines": machines,
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def load_model(path: str | Path) -> SvmModel:
    p = Path(path)
    try:
        payload = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read model file {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt model file {p}: {exc.msg}") from exc
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise DataError(f"{p} is not a model file")
    if payload.get("format_version") != MODEL_VERSION:
        raise DataError(
            f"unsupported model format_version {payload.get('format_version')} in {p}; "
            f"expected {MODEL_VERSION}"
        )
    try:
        n_features = int(payload["n_features"])
        machines = []
        for m in payload["machines"]:
            weights = np.zeros(n_features, dtype=np.float64)
            idx = np.array(m["weight_indices"], dtype=np.int64)
            if idx.size:
                weights[idx] = np.array(m["weight_values"], dtype=np.float64)
            machines.append(BinaryMachine(
                pos=int(m["pos"]), neg=int(m["neg"]),
                weights=weights, bias=float(m["bias"]),
                epochs=int(m["epochs"]), converged=bool(m["converged"]),
                final_violation=float(m["final_violation"]),
            ))
        return SvmModel(
            scheme=payload["scheme"],
            classes=tuple(payload["classes"]),
            n_features=n_features,
            machines=tuple(machines),
            config=SvmConfig.from_dict(payload.get("config", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed model payload in {p}: {exc}") from exc
