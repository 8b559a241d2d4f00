"""Echo-state network engine with conceptor-managed pattern memory.

One model learns several temporal patterns in a single reservoir.  Each loaded
pattern gets a conceptor: a symmetric PSD matrix M = R (R + aperture^-2 I)^-1
built from the correlation R of the reservoir states the pattern visits.  The
conceptor does two jobs:

* During incremental loading, the complement of the OR of all existing
  conceptors (the reservoir's *free memory*) masks the state directions a new
  pattern is allowed to write into, so earlier patterns are not disturbed.
* During recall, the pattern's conceptor filters the autonomous state update,
  which replays that pattern without external input: an input-simulation
  matrix D, trained at load time, reproduces the input drive from the state.

The linear readout is ridge-regressed jointly over every loaded pattern's
states, so one output matrix serves all patterns.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from . import linalg
from .config import EsnConfig, RandomSource

# Free-memory fraction below which further loading must grow the reservoir.
QUOTA_MIN = 0.01

MODEL_FORMAT_VERSION = 1


class MemoryExhausted(RuntimeError):
    """Reservoir memory is fully allocated; retrain with a larger reservoir."""


class UntrainedModel(RuntimeError):
    pass


def validate_esn(cfg: EsnConfig) -> None:
    if cfg.input_dim is None or cfg.output_dim is None:
        raise ValueError("input_dim and output_dim must be set to build a model")
    if not (0.0 < cfg.spectral_radius < 1.0):
        raise ValueError(f"spectral radius must lie in (0, 1), got {cfg.spectral_radius}")
    if cfg.aperture <= 0.0:
        raise ValueError(f"aperture must be positive, got {cfg.aperture}")
    if cfg.ridge < 0.0:
        raise ValueError(f"ridge must be nonnegative, got {cfg.ridge}")
    if cfg.washout >= cfg.training_length:
        raise ValueError("washout must be shorter than the training length")


# -- conceptor algebra --------------------------------------------------------


@dataclass(frozen=True)
class Conceptor:
    """State-subspace filter of one pattern.

    ``m`` has eigenvalues in [0, 1]; ``correlation`` keeps the source state
    correlation so conceptors can be OR-ed by correlation addition.  Derived
    conceptors (negations) carry ``correlation=None`` and cannot be OR-ed.
    """

    m: np.ndarray
    aperture: float
    correlation: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return int(self.m.shape[0])

    def eigenvalues(self) -> np.ndarray:
        vals, _ = linalg.sym_eig(self.m)
        return vals


def _conceptor_from_correlation(r: np.ndarray, aperture: float) -> Conceptor:
    a = aperture ** -2
    m = linalg.solve_spd(r + a * np.eye(r.shape[0]), r)
    m = 0.5 * (m + m.T)
    return Conceptor(m=m, aperture=aperture, correlation=r)


def compute_conceptor(states: np.ndarray, aperture: float) -> Conceptor:
    """Conceptor of a state sequence given as columns (dim, n_steps)."""
    states = np.asarray(states, dtype=float)
    if states.ndim != 2 or states.shape[1] < 1:
        raise ValueError("need at least one state column")
    r = states @ states.T / states.shape[1]
    return _conceptor_from_correlation(0.5 * (r + r.T), aperture)


def conceptor_not(c: Conceptor) -> Conceptor:
    return Conceptor(m=np.eye(c.dim) - c.m, aperture=c.aperture, correlation=None)


def conceptor_or(a: Conceptor, b: Conceptor) -> Conceptor:
    if a.aperture != b.aperture:
        raise ValueError(f"aperture mismatch: {a.aperture} vs {b.aperture}")
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.correlation is None or b.correlation is None:
        raise ValueError("OR needs source correlations on both operands")
    return _conceptor_from_correlation(a.correlation + b.correlation, a.aperture)


def free_memory(conceptors: list[Conceptor], dim: int, aperture: float) -> tuple[Conceptor, float]:
    """NOT of the OR of all stored conceptors, plus the free-memory fraction."""
    if not conceptors:
        f = Conceptor(m=np.eye(dim), aperture=aperture, correlation=None)
        return f, 1.0
    total = conceptors[0]
    for c in conceptors[1:]:
        total = conceptor_or(total, c)
    f = conceptor_not(total)
    return f, float(np.trace(f.m) / dim)


# -- model --------------------------------------------------------------------


class EsnModel:
    """A reservoir with conceptor memory and a jointly trained readout."""

    def __init__(self, cfg: EsnConfig, rs: RandomSource):
        validate_esn(cfg)
        self.cfg = cfg
        n = cfg.reservoir_size
        self.w = linalg.random_reservoir(n, cfg.density, cfg.spectral_radius,
                                         rs.derive("reservoir"))
        rng = rs.derive("input").generator()
        self.w_in = cfg.input_scale * rng.uniform(-1.0, 1.0, (n, cfg.input_dim))
        self.d = np.zeros((n, n))
        self.w_out: np.ndarray | None = None
        self.conceptors: list[Conceptor] = []
        self.pattern_states: list[np.ndarray] = []
        self.quota_history: list[float] = [1.0]
        self._train_states: list[np.ndarray] = []
        self._train_targets: list[np.ndarray] = []

    @property
    def n_patterns(self) -> int:
        return len(self.conceptors)

    def drive(self, inputs: np.ndarray, state: np.ndarray | None = None) -> np.ndarray:
        """Run the input-driven update; returns states as columns (N_w, T)."""
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
        if inputs.shape[1] != self.cfg.input_dim:
            raise ValueError(f"input dim {inputs.shape[1]} != model dim {self.cfg.input_dim}")
        n = self.cfg.reservoir_size
        v = np.zeros(n) if state is None else np.asarray(state, dtype=float).copy()
        out = np.empty((n, inputs.shape[0]))
        drive_terms = inputs @ self.w_in.T
        for t in range(inputs.shape[0]):
            v = np.tanh(self.w @ v + drive_terms[t])
            out[:, t] = v
        return out

    def free_memory(self) -> tuple[Conceptor, float]:
        return free_memory(self.conceptors, self.cfg.reservoir_size, self.cfg.aperture)

    def load_pattern(self, inputs: np.ndarray, targets: np.ndarray) -> dict:
        """Store one pattern: update D inside the free memory, add its conceptor.

        Returns a small report with the free-memory quota before/after and the
        relative change of D, useful for redundancy diagnostics.
        """
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        if inputs.shape[0] != targets.shape[0]:
            raise ValueError("inputs and targets must have equal length")
        if targets.shape[1] != self.cfg.output_dim:
            raise ValueError(f"target dim {targets.shape[1]} != model dim {self.cfg.output_dim}")

        f, quota_before = self.free_memory()
        if quota_before <= QUOTA_MIN:
            raise MemoryExhausted(
                f"free memory {quota_before:.4f} <= {QUOTA_MIN}; retrain with a larger reservoir"
            )

        states = self.drive(inputs)
        n_steps = states.shape[1]
        v_old = np.concatenate([np.zeros((states.shape[0], 1)), states[:, :-1]], axis=1)
        keep = slice(self.cfg.washout, n_steps)

        s = f.m @ v_old[:, keep]
        t_mat = self.w_in @ inputs[keep].T - self.d @ v_old[:, keep]
        n_eff = s.shape[1]
        a = self.cfg.aperture ** -2
        gram = s @ s.T / n_eff + a * np.eye(s.shape[0])
        d_inc = (linalg.pinv(gram) @ (s @ t_mat.T / n_eff)).T
        d_norm = np.linalg.norm(self.d)
        self.d = self.d + d_inc

        self.conceptors.append(compute_conceptor(states[:, keep], self.cfg.aperture))
        self.pattern_states.append(states[:, -1].copy())
        self._train_states.append(states[:, keep])
        self._train_targets.append(targets[keep].T)

        _, quota_after = self.free_memory()
        self.quota_history.append(quota_after)
        return {
            "pattern": self.n_patterns - 1,
            "quota_before": quota_before,
            "quota_after": quota_after,
            "quota_used": quota_before - quota_after,
            "d_change_rel": float(np.linalg.norm(d_inc) / d_norm) if d_norm > 0 else float("inf"),
        }

    def train_readout(self, ridge: float | None = None) -> np.ndarray:
        """Ridge-regress the readout over the states of every loaded pattern."""
        if not self._train_states:
            raise UntrainedModel("no patterns loaded")
        lam = self.cfg.ridge if ridge is None else ridge
        v = np.concatenate(self._train_states, axis=1)
        y = np.concatenate(self._train_targets, axis=1)
        gram = v @ v.T + lam ** 2 * np.eye(v.shape[0])
        if lam > 0.0:
            self.w_out = linalg.solve_spd(gram, v @ y.T).T
        else:
            self.w_out = (linalg.pinv(gram) @ (v @ y.T)).T
        return self.w_out

    def training_nrmse(self, pattern: int) -> float:
        """Readout fit quality on one pattern's buffered training states."""
        if self.w_out is None:
            raise UntrainedModel("readout not trained")
        if not (0 <= pattern < len(self._train_states)):
            raise IndexError(f"pattern {pattern} has no buffered training data")
        v = self._train_states[pattern]
        y = self._train_targets[pattern]
        return nrmse(self.w_out @ v, y)

    def recall(self, pattern: int, steps: int,
               state: np.ndarray | None = None,
               return_states: bool = False):
        """Autonomous conceptor-filtered replay of one stored pattern.

        The run starts (by default) from the pattern's final training state, so
        the replay continues the training sequence in phase.
        """
        if not (0 <= pattern < self.n_patterns):
            raise IndexError(f"pattern {pattern} not loaded (have {self.n_patterns})")
        if self.w_out is None:
            raise UntrainedModel("readout not trained")
        c = self.conceptors[pattern].m
        v = self.pattern_states[pattern].copy() if state is None else np.asarray(state, dtype=float).copy()
        outputs = np.empty((steps, self.cfg.output_dim))
        states = np.empty((steps, v.shape[0])) if return_states else None
        wd = self.w + self.d
        for t in range(steps):
            v = c @ np.tanh(wd @ v)
            outputs[t] = self.w_out @ v
            if states is not None:
                states[t] = v
        return (outputs, states) if return_states else outputs


def predict_request_distribution(model: EsnModel, pattern: int, steps: int = 20,
                                 warmup: int = 0) -> np.ndarray:
    """Recall a request pattern and post-process the readout to a distribution.

    ``warmup`` autonomous steps are discarded before averaging, letting the
    replay settle onto the pattern's attractor.
    """
    raw = model.recall(pattern, warmup + steps)[warmup:].mean(axis=0)
    clipped = np.clip(raw, 0.0, None)
    total = clipped.sum()
    if total <= 0.0:
        return np.full(raw.shape, 1.0 / raw.size)
    return clipped / total


def predict_locations(model: EsnModel, pattern: int, steps: int,
                      area_radius_m: float) -> np.ndarray:
    """Recall a mobility pattern; returns (steps, horizon, 2) positions in meters.

    Outputs are decoded from the stacked normalized (x, y) readout and clamped
    to the service disk.
    """
    raw = model.recall(pattern, steps)
    horizon = raw.shape[1] // 2
    pos = raw.reshape(steps, horizon, 2) * area_radius_m
    norms = np.linalg.norm(pos, axis=2, keepdims=True)
    scale = np.where(norms > area_radius_m, area_radius_m / np.where(norms > 0, norms, 1.0), 1.0)
    return pos * scale


def nrmse(predicted, truth) -> float:
    """Root-mean-square error normalized by the truth's variance.

    For a nonzero constant truth (zero variance) the mean square of the truth
    is used as the normalizer, which makes the score a relative RMS error; an
    identically zero truth is rejected.
    """
    predicted = np.asarray(predicted, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if predicted.shape != truth.shape:
        raise ValueError(f"shape mismatch: {predicted.shape} vs {truth.shape}")
    mse = float(np.mean((predicted - truth) ** 2))
    var = float(truth.var())
    power = float(np.mean(truth ** 2))
    # Rounding makes the variance of a constant signal tiny but nonzero, so
    # treat anything below a relative floor as constant.
    if var > 1e-12 * power:
        return float(np.sqrt(mse / var))
    if power > 0.0:
        return float(np.sqrt(mse / power))
    raise ValueError("truth signal is identically zero; NRMSE undefined")


def echo_state_gap(w: np.ndarray, w_in: np.ndarray, inputs: np.ndarray,
                   rs: RandomSource) -> float:
    """Final distance between two state trajectories driven by the same input.

    A reservoir with the echo-state property forgets initial conditions, so
    the gap should vanish; spectral radii >= 1 typically leave it large.
    """
    rng = rs.generator()
    v1 = rng.uniform(-1.0, 1.0, w.shape[0])
    v2 = rng.uniform(-1.0, 1.0, w.shape[0])
    drive_terms = np.atleast_2d(inputs) @ w_in.T
    for t in range(drive_terms.shape[0]):
        v1 = np.tanh(w @ v1 + drive_terms[t])
        v2 = np.tanh(w @ v2 + drive_terms[t])
    return float(np.max(np.abs(v1 - v2)))


# -- serialization -------------------------------------------------------------


def _write_npz_deterministic(path, arrays: dict) -> None:
    """npz writer with pinned zip metadata so equal arrays give equal bytes."""
    import io
    import zipfile

    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name, array in arrays.items():
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.asarray(array))
            info = zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, buf.getvalue())


def save_model(model: EsnModel, path) -> None:
    cfg_doc = json.dumps(dataclasses.asdict(model.cfg))
    _write_npz_deterministic(path, {
        "format_version": np.int64(MODEL_FORMAT_VERSION),
        "cfg": np.frombuffer(cfg_doc.encode("utf-8"), dtype=np.uint8),
        "w": model.w,
        "w_in": model.w_in,
        "d": model.d,
        "w_out": model.w_out if model.w_out is not None else np.zeros((0, 0)),
        "conceptor_ms": np.stack([c.m for c in model.conceptors]) if model.conceptors
        else np.zeros((0, model.cfg.reservoir_size, model.cfg.reservoir_size)),
        "pattern_states": np.stack(model.pattern_states) if model.pattern_states
        else np.zeros((0, model.cfg.reservoir_size)),
        "quota_history": np.asarray(model.quota_history),
    })


def load_model(path) -> EsnModel:
    """Restore a trained model for recall; loaded models cannot accept new patterns."""
    with np.load(path) as data:
        version = int(data["format_version"])
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version}")
        cfg = EsnConfig(**json.loads(bytes(data["cfg"]).decode("utf-8")))
        model = EsnModel.__new__(EsnModel)
        model.cfg = cfg
        model.w = data["w"]
        model.w_in = data["w_in"]
        model.d = data["d"]
        w_out = data["w_out"]
        model.w_out = w_out if w_out.size else None
        model.conceptors = [Conceptor(m=m, aperture=cfg.aperture, correlation=None)
                            for m in data["conceptor_ms"]]
        model.pattern_states = [s for s in data["pattern_states"]]
        model.quota_history = [float(q) for q in data["quota_history"]]
        model._train_states = []
        model._train_targets = []
    return model
