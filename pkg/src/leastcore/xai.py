"""Model-quality games for feature attribution and data valuation.

Two small in-repo models back the games: ordinary least squares scored by
R^2 and L2-regularized logistic regression scored by accuracy.  Both are
fitted in batches, one fit per coalition, where a coalition selects either
feature columns or training rows through a 0/1 mask.

R^2 is measured against the training-mean predictor, so the empty model
scores exactly 0.
"""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .core import CharacteristicOracle, matrix_to_masks
from .errors import ConfigError, MissingTargetColumn, NonNumericCell, ParseError

log = logging.getLogger(__name__)

REGRESSION, CLASSIFICATION = "regression", "classification"

RIDGE = 1e-8
LOGISTIC_STEP = 0.1
LOGISTIC_L2 = 1e-4
LOGISTIC_ITERS = 1000


class DegenerateDesign(UserWarning):
    pass


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    task: str

    def __post_init__(self):
        if self.task not in (REGRESSION, CLASSIFICATION):
            raise ConfigError(f"unknown task {self.task!r}")
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise ConfigError("feature matrix and target disagree in length")
        if self.task == CLASSIFICATION and not np.isin(self.y, (0.0, 1.0)).all():
            raise ConfigError("classification targets must be 0 or 1")

    def __len__(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    def subset(self, rows) -> "Dataset":
        return replace(self, X=self.X[rows], y=self.y[rows])


def load_csv(path, target: str, task: str) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1)
        header = [h.strip() for h in header]
        if target not in header:
            raise MissingTargetColumn(f"no column named {target!r} in header {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
            vals = []
            for col, cell in enumerate(row, start=1):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise NonNumericCell(f"non-numeric cell {cell!r}", line=lineno, column=col)
            rows.append(vals)
    if len(rows) < 2:
        raise ConfigError("a dataset needs at least two instances")
    data = np.array(rows)
    t = header.index(target)
    keep = [j for j in range(len(header)) if j != t]
    if not keep:
        raise ConfigError("no feature columns besides the target")
    return Dataset(data[:, keep], data[:, t], tuple(header[j] for j in keep), task)


def split_train_test(ds: Dataset, fraction: float = 0.8, seed: int = 0):
    if len(ds) < 2:
        raise ConfigError("need at least two instances to split")
    order = np.random.default_rng(seed).permutation(len(ds))
    cut = int(round(fraction * len(ds)))
    if cut >= len(ds):
        warnings.warn("train fraction leaves an empty test set", stacklevel=2)
    return ds.subset(order[:cut]), ds.subset(order[cut:])


# batched models

def ols_fit_batch(X, y, row_mask=None, col_mask=None, ridge=RIDGE):
    """Least squares with intercept, one fit per mask row.

    Returns ``(B, p + 1)`` coefficients with the intercept last; excluded
    columns get coefficient 0.
    """
    m, p = X.shape
    B = (row_mask if row_mask is not None else col_mask).shape[0]
    R = np.ones((B, m)) if row_mask is None else row_mask.astype(float)
    Cm = np.ones((B, p)) if col_mask is None else col_mask.astype(float)
    Z = np.hstack([X, np.ones((m, 1))])
    Cz = np.hstack([Cm, np.ones((B, 1))])
    G = np.einsum("br,ri,rj->bij", R, Z, Z)
    h = (R * y) @ Z
    G = G * Cz[:, :, None] * Cz[:, None, :]
    eye = np.eye(p + 1)
    G += ridge * eye + (1.0 - Cz)[:, :, None] * eye
    return np.linalg.solve(G, (h * Cz)[:, :, None])[:, :, 0]


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def logistic_fit_batch(X, y, row_mask=None, col_mask=None, step=LOGISTIC_STEP, l2=LOGISTIC_L2,
                       iters=LOGISTIC_ITERS):
    """Full-batch gradient descent on the mean log loss plus ``l2/2 |w|^2``.

    ``X`` should already be standardized.  Returns ``(B, p + 1)`` with the
    unpenalized intercept last.
    """
    m, p = X.shape
    B = (row_mask if row_mask is not None else col_mask).shape[0]
    R = np.ones((B, m)) if row_mask is None else row_mask.astype(float)
    Cm = np.ones((B, p)) if col_mask is None else col_mask.astype(float)
    count = np.maximum(R.sum(axis=1), 1.0)
    W = np.zeros((B, p))
    b = np.zeros(B)
    for _ in range(iters):
        err = (_sigmoid(W @ X.T + b[:, None]) - y) * R
        W -= step * ((err @ X) / count[:, None] + l2 * W) * Cm
        b -= step * err.sum(axis=1) / count
    return np.hstack([W, b[:, None]])


@dataclass
class FittedModel:
    task: str
    coef: np.ndarray  # (p + 1,) intercept last
    mean: np.ndarray
    scale: np.ndarray

    def predict(self, X) -> np.ndarray:
        """Regression output or class-1 probability."""
        Z = (np.atleast_2d(X) - self.mean) / self.scale
        out = Z @ self.coef[:-1] + self.coef[-1]
        return _sigmoid(out) if self.task == CLASSIFICATION else out


def _standardizer(X, task):
    if task == REGRESSION:
        return np.zeros(X.shape[1]), np.ones(X.shape[1])
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    return mean, np.where(sd > 0, sd, 1.0)


def fit_model(train: Dataset) -> FittedModel:
    mean, scale = _standardizer(train.X, train.task)
    Z = (train.X - mean) / scale
    ones = np.ones((1, train.n_features), dtype=bool)
    fit = ols_fit_batch if train.task == REGRESSION else logistic_fit_batch
    return FittedModel(train.task, fit(Z, train.y, col_mask=ones)[0], mean, scale)


def _baseline_prediction(train: Dataset):
    if train.task == REGRESSION:
        return float(train.y.mean())
    return float(train.y.mean() >= 0.5)


def _scores(task, coefs, Ztest, ytest, ytrain_mean):
    """Test score for every coefficient row."""
    out = Ztest @ coefs[:, :-1].T + coefs[:, -1]
    if task == REGRESSION:
        ss_tot = np.sum((ytest - ytrain_mean) ** 2)
        ss_res = np.sum((out - ytest[:, None]) ** 2, axis=0)
        return 1.0 - ss_res / ss_tot
    return np.mean((out >= 0) == (ytest[:, None] == 1), axis=0)


def _baseline_score(train: Dataset, test: Dataset) -> float:
    if train.task == REGRESSION:
        return 0.0
    return float(np.mean(test.y == _baseline_prediction(train)))


class _ModelScorer:
    """Shared state for scoring fits of one train/test pair."""

    def __init__(self, train: Dataset, test: Dataset):
        if len(test) == 0:
            raise ConfigError("scoring needs a nonempty test set")
        self.train, self.test = train, test
        self.task = train.task
        self.mean, self.scale = _standardizer(train.X, train.task)
        self.Ztrain = (train.X - self.mean) / self.scale
        self.Ztest = (test.X - self.mean) / self.scale
        self.ymean = float(train.y.mean())
        self.baseline = _baseline_score(train, test)
        self.constant = np.ptp(train.X, axis=0) == 0

    def fit(self, row_mask=None, col_mask=None):
        fit = ols_fit_batch if self.task == REGRESSION else logistic_fit_batch
        return fit(self.Ztrain, self.train.y, row_mask, col_mask)

    def score_columns(self, col_mask) -> np.ndarray:
        col_mask = np.asarray(col_mask, dtype=bool) & ~self.constant
        out = np.full(col_mask.shape[0], self.baseline)
        live = col_mask.any(axis=1)
        if live.any():
            out[live] = _scores(self.task, self.fit(col_mask=col_mask[live]), self.Ztest, self.test.y, self.ymean)
        return out

    def score_rows(self, row_mask) -> np.ndarray:
        row_mask = np.asarray(row_mask, dtype=bool)
        if self.task == REGRESSION:
            ok = row_mask.sum(axis=1) >= 2
        else:
            y1 = self.train.y == 1
            ok = (row_mask & y1).any(axis=1) & (row_mask & ~y1).any(axis=1)
        out = np.full(row_mask.shape[0], self.baseline)
        if ok.any():
            out[ok] = _scores(self.task, self.fit(row_mask=row_mask[ok]), self.Ztest, self.test.y, self.ymean)
        return out


def fit_score(train: Dataset, test: Dataset, features=None) -> float:
    """Test score of the model trained on the selected feature columns.

    ``features`` is a boolean mask or a :class:`Coalition`; ``None`` means all.
    Columns constant on the training set are dropped with a warning.
    """
    scorer = _ModelScorer(train, test)
    if features is None:
        mask = np.ones(train.n_features, dtype=bool)
    elif hasattr(features, "to_array"):
        mask = features.to_array()
    else:
        mask = np.asarray(features, dtype=bool)
    if (mask & scorer.constant).any():
        warnings.warn(f"dropping constant columns {np.flatnonzero(mask & scorer.constant).tolist()}",
                      DegenerateDesign, stacklevel=2)
    return float(scorer.score_columns(mask[None, :])[0])


class GlobalFeatureGame(CharacteristicOracle):
    """Players are features; ``v(C)`` is the score of a model trained on ``C``."""

    def __init__(self, train: Dataset, test: Dataset, shift: bool = True, budget=None):
        super().__init__(train.n_features, budget)
        self.scorer = _ModelScorer(train, test)
        if self.scorer.constant.any():
            warnings.warn(f"constant training columns {np.flatnonzero(self.scorer.constant).tolist()} are ignored",
                          DegenerateDesign, stacklevel=2)
        self.offset = self.scorer.baseline if shift else 0.0

    def _evaluate(self, X):
        return self.scorer.score_columns(X) - self.offset


def global_feature_game(train: Dataset, test: Dataset, shift: bool = True) -> GlobalFeatureGame:
    return GlobalFeatureGame(train, test, shift)


class DataValuationGame(CharacteristicOracle):
    """Players are training rows; ``v(C)`` is the score of a model trained on ``C``.

    Coalitions too small to fit (fewer than two rows, or a missing class)
    score as the constant predictor.
    """

    def __init__(self, train: Dataset, test: Dataset, shift: bool = True, budget=None, chunk: int = 256):
        super().__init__(len(train), budget)
        self.scorer = _ModelScorer(train, test)
        self.offset = self.scorer.baseline if shift else 0.0
        self.chunk = chunk

    def _evaluate(self, X):
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], self.chunk):
            out[s:s + self.chunk] = self.scorer.score_rows(X[s:s + self.chunk])
        return out - self.offset


def data_valuation_game(train: Dataset, test: Dataset, shift: bool = True, budget=None) -> DataValuationGame:
    return DataValuationGame(train, test, shift, budget)


UNIFORM, BOTTOM_DECILE = "uniform", "bottom-decile"


class LocalFeatureGame(CharacteristicOracle):
    """Players are features of one instance.

    ``v(C)`` is the model output on a hybrid that takes features in ``C``
    from the instance and the rest from a baseline instance, minus the output
    on the baseline itself.  Baselines come from ``policy``: ``"uniform"``
    (any instance), ``"bottom-decile"`` (the tenth of instances with the
    lowest prediction) or an integer index for one fixed baseline.  Draws are
    seeded by the coalition bitmask so repeated queries agree.
    """

    def __init__(self, model: FittedModel, data: Dataset, index: int, policy="uniform", seed: int = 0,
                 draws: int = 1, budget=None):
        super().__init__(data.n_features, budget)
        if not 0 <= index < len(data):
            raise ConfigError(f"instance {index} outside dataset of {len(data)}")
        self.model, self.x = model, data.X[index]
        self.X = data.X
        self.seed, self.draws = seed, draws
        if isinstance(policy, (int, np.integer)):
            self.pool = np.array([int(policy)])
        elif policy == UNIFORM:
            self.pool = np.arange(len(data))
        elif policy == BOTTOM_DECILE:
            pred = model.predict(data.X)
            k = max(1, int(np.ceil(0.1 * len(data))))
            self.pool = np.argsort(pred, kind="stable")[:k]
        else:
            raise ConfigError(f"unknown baseline policy {policy!r}")

    def hybrid(self, mask, baseline) -> np.ndarray:
        return np.where(mask, self.x, baseline)

    def _baselines(self, mask: int) -> np.ndarray:
        if self.pool.size == 1:
            return np.repeat(self.pool, self.draws)
        rng = np.random.default_rng([self.seed, mask])
        return self.pool[rng.integers(self.pool.size, size=self.draws)]

    def _evaluate(self, X):
        masks = matrix_to_masks(X) if self.n <= 62 else np.zeros(X.shape[0], dtype=np.int64)
        out = np.empty(X.shape[0])
        for r in range(X.shape[0]):
            base = self.X[self._baselines(int(masks[r]))]
            out[r] = np.mean(self.model.predict(np.where(X[r], self.x, base)) - self.model.predict(base))
        return out


def local_feature_game(model: FittedModel, data: Dataset, index: int, policy="uniform", seed: int = 0,
                       draws: int = 1) -> LocalFeatureGame:
    return LocalFeatureGame(model, data, index, policy, seed, draws)


def removal_curve(train: Dataset, test: Dataset, importances, step: float = 0.05, max_fraction: float = 0.5):
    """Remove training rows from most to least important in blocks of ``step``
    and refit; returns ``[(fraction_removed, test_score), ...]``."""
    importances = np.asarray(importances, dtype=float)
    if importances.shape != (len(train),):
        raise ConfigError("need one importance per training row")
    order = np.lexsort((np.arange(len(train)), -importances))
    blocks = int(round(max_fraction / step))
    fractions = [round(k * step, 12) for k in range(blocks + 1)]
    masks = np.ones((len(fractions), len(train)), dtype=bool)
    for k, f in enumerate(fractions):
        masks[k, order[: int(round(f * len(train)))]] = False
    scores = _ModelScorer(train, test).score_rows(masks)
    return list(zip(fractions, scores.tolist()))


def planted_noise_regression(n_train: int = 200, n_test: int = 200, n_features: int = 5,
                             corrupt: float = 0.1, noise: float = 0.1, seed: int = 0):
    """Linear data whose training labels are corrupted on a known subset.

    Returns ``(train, test, corrupted)`` where ``corrupted`` is a boolean mask
    over training rows.  Corrupted labels are replaced by zero-mean draws with
    three times the spread of the clean targets and no relation to the features.
    """
    rng = np.random.default_rng(seed)
    beta = rng.normal(size=n_features)
    X = rng.normal(size=(n_train + n_test, n_features))
    y = X @ beta + noise * rng.normal(size=n_train + n_test)
    bad = np.zeros(n_train, dtype=bool)
    bad[rng.choice(n_train, size=int(round(corrupt * n_train)), replace=False)] = True
    y_train = y[:n_train].copy()
    y_train[bad] = rng.normal(0.0, 3.0 * y.std(), size=bad.sum())
    names = tuple(f"x{i}" for i in range(n_features))
    return (Dataset(X[:n_train], y_train, names, REGRESSION),
            Dataset(X[n_train:], y[n_train:], names, REGRESSION), bad)
