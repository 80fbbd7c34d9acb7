"""scikit-learn style wrapper around the build -> optimize pipeline.

``X`` is a sequence of dropout configurations; ``fit`` schedules each of
them and keeps the diagrams, ``predict`` returns diagrams for new
configurations and ``score`` is the mean negated objective (higher is
better), so the usual model-selection tools can tune the weights.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator

from .heuristic import DiagramError, Instance, default_diagram
from .ilpmodel import Objective, build_model, diagram_objective, hint_from_diagram
from .lattice import DropoutConfig
from .solver import SolveParams, solve


def _as_configs(X) -> list:
    if isinstance(X, DropoutConfig):
        return [X]
    out = []
    for c in X:
        if isinstance(c, DropoutConfig):
            out.append(c)
        elif isinstance(c, dict):
            out.append(DropoutConfig.from_dict(c))
        elif isinstance(c, int):
            out.append(DropoutConfig(c))
        else:
            raise TypeError(f"cannot read a dropout configuration from {type(c).__name__}")
    return out


class LuciScheduler(BaseEstimator):
    def __init__(self, rounds: int = 4, alpha: float = 6, beta: float = 5, gamma: float = 12,
                 delta: float = 2, mode: str = "full", time_limit: float = 300.0,
                 work_limit: float | None = None, seed: int = 0, backend: str = "auto",
                 legacy_gauges: bool = False):
        self.rounds = rounds
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.delta = delta
        self.mode = mode
        self.time_limit = time_limit
        self.work_limit = work_limit
        self.seed = seed
        self.backend = backend
        self.legacy_gauges = legacy_gauges

    def _objective(self) -> Objective:
        return Objective(self.alpha, self.beta, self.gamma, self.delta, self.mode)

    def _schedule(self, cfg: DropoutConfig):
        inst = Instance.from_config(cfg.d, cfg, legacy=self.legacy_gauges)
        model = build_model(inst, self.rounds, self._objective())
        hint = None
        try:
            hint = hint_from_diagram(model, default_diagram(inst, T=self.rounds))
        except DiagramError:
            pass
        if hint is not None and not model.is_feasible(hint):
            hint = None
        sol = solve(model, SolveParams(self.time_limit, self.seed, hint, False,
                                       self.work_limit, self.backend))
        if sol.assignment is None:
            return None, sol
        return model.decode(sol.assignment), sol

    def fit(self, X, y=None):
        del y  # unsupervised
        self.diagrams_, self.solutions_ = [], []
        for cfg in _as_configs(X):
            diag, sol = self._schedule(cfg)
            self.diagrams_.append(diag)
            self.solutions_.append(sol)
        self.n_infeasible_ = sum(d is None for d in self.diagrams_)
        return self

    def predict(self, X) -> list:
        return [self._schedule(cfg)[0] for cfg in _as_configs(X)]

    def score(self, X, y=None) -> float:
        """Mean of minus the objective; infeasible instances score -inf."""
        del y
        obj = self._objective()
        vals = []
        for diag in self.predict(X):
            vals.append(float("-inf") if diag is None else -float(diagram_objective(diag, obj)))
        return sum(vals) / len(vals)
