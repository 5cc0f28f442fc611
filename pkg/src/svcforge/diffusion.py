"""DDPM machinery for mel-frame generation at desk scale.

Covers the full contract surface of the production acoustic model without
its bulk: noise schedules, forward noising, guided ancestral sampling,
conditional layer normalization, a closed-form Gaussian denoiser used as a
correctness oracle, and a two-layer trainable denoiser exercising the
training and CLN-only fine-tuning loops. Everything here runs in float64;
the gradient and moment tests depend on it.

Steps are 1-based: t runs from 1 to T, matching the forward-process
indexing x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) eps.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from . import defaults
from .contrastive import FeaturePairBatch, contrastive_loss, ramp_weight
from .errors import (
    InvalidParameterError,
    ManifestFormatError,
    MissingFileError,
    ShapeMismatchError,
    ZeroNormError,
)
from .svcf import atomic_write_bytes, read_tensor, write_tensor

_LN_EPS = 1e-5  # layer-norm variance epsilon


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step beta with the derived alpha and cumulative-product tables."""

    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=np.float64)
        if beta.ndim != 1 or beta.size < 1:
            raise InvalidParameterError("beta must be a nonempty 1-D array")
        if np.any(beta <= 0) or np.any(beta >= 1):
            raise InvalidParameterError("need 0 < beta[t] < 1")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=np.float64))
        object.__setattr__(self, "alpha_bar", np.asarray(self.alpha_bar, dtype=np.float64))

    @property
    def num_steps(self) -> int:
        return self.beta.size

    def _check_step(self, t: int) -> int:
        if not 1 <= t <= self.num_steps:
            raise InvalidParameterError(
                f"step {t} outside [1, {self.num_steps}]"
            )
        return int(t)

    def beta_at(self, t: int) -> float:
        return float(self.beta[self._check_step(t) - 1])

    def alpha_at(self, t: int) -> float:
        return float(self.alpha[self._check_step(t) - 1])

    def alpha_bar_at(self, t: int) -> float:
        return float(self.alpha_bar[self._check_step(t) - 1])


def linear_schedule(num_steps: int = defaults.DIFFUSION_STEPS,
                    beta_start: float = defaults.BETA_START,
                    beta_end: float = defaults.BETA_END) -> NoiseSchedule:
    """Beta linear in t; alpha_bar by cumulative product."""
    if num_steps < 1:
        raise InvalidParameterError("num_steps must be >= 1")
    if not 0 < beta_start <= beta_end < 1:
        raise InvalidParameterError("need 0 < beta_start <= beta_end < 1")
    beta = np.linspace(beta_start, beta_end, num_steps)
    alpha = 1.0 - beta
    return NoiseSchedule(beta=beta, alpha=alpha, alpha_bar=np.cumprod(alpha))


def q_sample(x0: np.ndarray, t: int, eps: np.ndarray,
             sched: NoiseSchedule) -> np.ndarray:
    """Forward noising: sqrt(abar_t) x0 + sqrt(1 - abar_t) eps."""
    x0 = np.asarray(x0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x0.shape != eps.shape:
        raise ShapeMismatchError(f"x0 {x0.shape} vs eps {eps.shape}")
    ab = sched.alpha_bar_at(t)
    return math.sqrt(ab) * x0 + math.sqrt(1.0 - ab) * eps


@dataclass(frozen=True)
class ConditionSet:
    """Frame-level conditioning plus an optional unit-norm speaker embedding.

    linguistic: [T, d_ling]; log_f0_vuv: [T, 2]; loudness: [T].
    """

    linguistic: np.ndarray
    log_f0_vuv: np.ndarray
    loudness: np.ndarray
    speaker_embedding: np.ndarray | None = None

    def __post_init__(self):
        ling = np.asarray(self.linguistic, dtype=np.float64)
        lfv = np.asarray(self.log_f0_vuv, dtype=np.float64)
        loud = np.asarray(self.loudness, dtype=np.float64)
        if ling.ndim != 2 or lfv.ndim != 2 or lfv.shape[1] != 2 or loud.ndim != 1:
            raise ShapeMismatchError(
                "want linguistic [T, d], log_f0_vuv [T, 2], loudness [T]"
            )
        if not ling.shape[0] == lfv.shape[0] == loud.shape[0]:
            raise ShapeMismatchError("condition tracks disagree on frame count")
        object.__setattr__(self, "linguistic", ling)
        object.__setattr__(self, "log_f0_vuv", lfv)
        object.__setattr__(self, "loudness", loud)
        if self.speaker_embedding is not None:
            emb = np.asarray(self.speaker_embedding, dtype=np.float64)
            if emb.ndim != 1:
                raise ShapeMismatchError("speaker embedding must be 1-D")
            if abs(np.linalg.norm(emb) - 1.0) > 1e-6:
                raise InvalidParameterError("speaker embedding must have unit norm")
            object.__setattr__(self, "speaker_embedding", emb)

    def summary(self) -> np.ndarray:
        """Fixed-size condition summary: per-track means, concatenated."""
        return np.concatenate([
            self.linguistic.mean(axis=0),
            self.log_f0_vuv.mean(axis=0),
            [self.loudness.mean()],
        ])


class DenoiserInterface(Protocol):
    """Epsilon-prediction contract shared by the oracle and the toy model."""

    def predict_eps(self, x_t: np.ndarray, t: int, cond: ConditionSet,
                    unconditional: bool = False) -> np.ndarray:
        ...


def guided_eps(denoiser: DenoiserInterface, x_t: np.ndarray, t: int,
               cond: ConditionSet, w: float = defaults.GUIDANCE_SCALE) -> np.ndarray:
    """Classifier-free guidance: eps_u + w (eps_c - eps_u).

    w == 1 and w == 0 return the conditional / unconditional predictions
    verbatim (bit-equal, no arithmetic detour).
    """
    if w == 1.0:
        return denoiser.predict_eps(x_t, t, cond, unconditional=False)
    if w == 0.0:
        return denoiser.predict_eps(x_t, t, cond, unconditional=True)
    eps_c = denoiser.predict_eps(x_t, t, cond, unconditional=False)
    eps_u = denoiser.predict_eps(x_t, t, cond, unconditional=True)
    return eps_u + w * (eps_c - eps_u)


def reverse_step(x_t: np.ndarray, t: int, eps_hat: np.ndarray,
                 sched: NoiseSchedule, z: np.ndarray) -> np.ndarray:
    """One ancestral step:
    x_{t-1} = (x_t - beta_t/sqrt(1-abar_t) eps_hat)/sqrt(alpha_t) + sqrt(beta_t) z.
    """
    x_t = np.asarray(x_t, dtype=np.float64)
    eps_hat = np.asarray(eps_hat, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x_t.shape != eps_hat.shape or x_t.shape != z.shape:
        raise ShapeMismatchError(
            f"x_t {x_t.shape}, eps_hat {eps_hat.shape}, z {z.shape} must agree"
        )
    if t == 1 and np.any(z != 0):
        raise InvalidParameterError("z must be the zero vector at t == 1")
    beta = sched.beta_at(t)
    mean = (x_t - beta / math.sqrt(1.0 - sched.alpha_bar_at(t)) * eps_hat) \
        / math.sqrt(sched.alpha_at(t))
    return mean + math.sqrt(beta) * z


def sample(denoiser: DenoiserInterface, sched: NoiseSchedule, cond: ConditionSet,
           w: float = defaults.GUIDANCE_SCALE, dim: int | tuple = 8,
           seed: int = 0) -> np.ndarray:
    """Full reverse chain from seeded x_T ~ N(0, I) down to x_0.

    `dim` may be an int (one vector) or a shape tuple such as (n, d) to draw
    n independent samples in one pass; every operation in the chain is
    elementwise or scalar-weighted, so the rows do not interact.
    """
    shape = (dim,) if isinstance(dim, int) else tuple(dim)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(shape)
    for t in range(sched.num_steps, 0, -1):
        eps_hat = guided_eps(denoiser, x, t, cond, w)
        z = rng.standard_normal(shape) if t > 1 else np.zeros(shape)
        x = reverse_step(x, t, eps_hat, sched, z)
    return x


class AnalyticGaussianDenoiser:
    """Closed-form optimal denoiser for x0 ~ N(mu0, sigma0^2 I).

    Under the forward process, (x0, x_t) are jointly Gaussian, so the
    conditional expectation of x0 given x_t is linear:

        E[x_t] = sqrt(abar) mu0,  Var(x_t) = abar sigma0^2 + 1 - abar,
        Cov(x0, x_t) = sqrt(abar) sigma0^2,

        x0_hat = mu0 + Cov/Var (x_t - E[x_t])
               = (sigma0^2 sqrt(abar) x_t + (1 - abar) mu0)
                 / (abar sigma0^2 + 1 - abar)

    and predict_eps returns (x_t - sqrt(abar) x0_hat) / sqrt(1 - abar).
    Conditioning is ignored: conditional and unconditional predictions
    coincide, as befits an oracle for the sampling machinery itself.
    """

    def __init__(self, mu0: np.ndarray, sigma0: float, sched: NoiseSchedule):
        if sigma0 < 0:
            raise InvalidParameterError("sigma0 must be >= 0")
        self.mu0 = np.asarray(mu0, dtype=np.float64)
        self.sigma0 = float(sigma0)
        self.sched = sched

    def predict_eps(self, x_t: np.ndarray, t: int, cond: ConditionSet,
                    unconditional: bool = False) -> np.ndarray:
        ab = self.sched.alpha_bar_at(t)
        var0 = self.sigma0 ** 2
        denom = ab * var0 + 1.0 - ab
        x0_hat = (var0 * math.sqrt(ab) * x_t + (1.0 - ab) * self.mu0) / denom
        return (x_t - math.sqrt(ab) * x0_hat) / math.sqrt(1.0 - ab)


def analytic_gaussian_denoiser(mu0: np.ndarray, sigma0: float,
                               sched: NoiseSchedule) -> AnalyticGaussianDenoiser:
    return AnalyticGaussianDenoiser(mu0, sigma0, sched)


@dataclass(frozen=True)
class CLNParams:
    """Affine maps from a speaker embedding to layer-norm scale and bias."""

    w_gamma: np.ndarray
    b_gamma: np.ndarray
    w_beta: np.ndarray
    b_beta: np.ndarray

    def __post_init__(self):
        for name in ("w_gamma", "b_gamma", "w_beta", "b_beta"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise InvalidParameterError(f"{name} must be finite")
            object.__setattr__(self, name, arr)
        d = self.b_gamma.size
        if not (self.w_gamma.shape[0] == self.w_beta.shape[0]
                == self.b_beta.size == d):
            raise ShapeMismatchError("CLN parameter dimensions disagree")


def conditional_layer_norm(h: np.ndarray, e: np.ndarray, p: CLNParams) -> np.ndarray:
    """gamma(e) * (h - mean) / sqrt(var + 1e-5) + beta(e), stats over the
    last axis. gamma(e) = W_g e + b_g, beta(e) = W_b e + b_b."""
    h = np.asarray(h, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    if h.shape[-1] != p.b_gamma.size or e.shape[-1] != p.w_gamma.shape[1]:
        raise ShapeMismatchError("h or e dimension does not match CLN params")
    gamma = p.w_gamma @ e + p.b_gamma
    beta = p.w_beta @ e + p.b_beta
    mean = h.mean(axis=-1, keepdims=True)
    var = h.var(axis=-1, keepdims=True)
    return gamma * (h - mean) / np.sqrt(var + _LN_EPS) + beta


CLN_PARAM_NAMES = ("cln_w_gamma", "cln_b_gamma", "cln_w_beta", "cln_b_beta")


class ToyDenoiser:
    """Two dense layers with tanh between, one CLN site after the first.

    Input is concat(x_t, sinusoidal time embedding, condition summary); the
    speaker embedding enters only through the CLN affines. Unconditional
    mode feeds the zero embedding, so the CLN biases act as learned null
    parameters. Instances count unconditional calls in `uncond_calls` for
    test instrumentation.
    """

    def __init__(self, dim: int, cond_dim: int, speaker_dim: int,
                 num_steps: int = defaults.DIFFUSION_STEPS,
                 hidden: int = 32, time_freqs: int = 4, seed: int = 0):
        if min(dim, cond_dim, speaker_dim, hidden, time_freqs) < 1:
            raise InvalidParameterError("all model dimensions must be >= 1")
        self.dim = dim
        self.cond_dim = cond_dim
        self.speaker_dim = speaker_dim
        self.num_steps = num_steps
        self.hidden = hidden
        self.time_freqs = time_freqs
        in_dim = dim + 2 * time_freqs + cond_dim
        rng = np.random.default_rng(seed)
        self.params = {
            "w1": rng.standard_normal((hidden, in_dim)) / math.sqrt(in_dim),
            "b1": np.zeros(hidden),
            "cln_w_gamma": rng.standard_normal((hidden, speaker_dim)) * 0.1,
            "cln_b_gamma": np.ones(hidden),
            "cln_w_beta": rng.standard_normal((hidden, speaker_dim)) * 0.1,
            "cln_b_beta": np.zeros(hidden),
            "w2": rng.standard_normal((dim, hidden)) / math.sqrt(hidden),
            "b2": np.zeros(dim),
        }
        self.uncond_calls = 0

    # -- plumbing ---------------------------------------------------------

    def cln_params(self) -> CLNParams:
        p = self.params
        return CLNParams(p["cln_w_gamma"], p["cln_b_gamma"],
                         p["cln_w_beta"], p["cln_b_beta"])

    def clone(self) -> "ToyDenoiser":
        other = ToyDenoiser(self.dim, self.cond_dim, self.speaker_dim,
                            self.num_steps, self.hidden, self.time_freqs)
        other.params = {k: v.copy() for k, v in self.params.items()}
        return other

    def param_hash(self, names=None) -> str:
        """SHA-256 over the raw bytes of the named parameters (all if None)."""
        digest = hashlib.sha256()
        for name in sorted(names if names is not None else self.params):
            digest.update(name.encode())
            digest.update(np.ascontiguousarray(self.params[name]).tobytes())
        return digest.hexdigest()

    def time_embedding(self, t: int) -> np.ndarray:
        phase = 2.0 * np.pi * t / self.num_steps \
            * np.arange(1, self.time_freqs + 1)
        return np.concatenate([np.sin(phase), np.cos(phase)])

    def _embedding(self, cond: ConditionSet, unconditional: bool) -> np.ndarray:
        if unconditional:
            self.uncond_calls += 1
            return np.zeros(self.speaker_dim)
        if cond.speaker_embedding is None:
            raise InvalidParameterError(
                "conditional call needs a speaker embedding in the condition set"
            )
        return cond.speaker_embedding

    # -- forward / backward -------------------------------------------------

    def predict_eps(self, x_t: np.ndarray, t: int, cond: ConditionSet,
                    unconditional: bool = False) -> np.ndarray:
        """Deterministic epsilon prediction; accepts (..., dim) batches."""
        x_t = np.asarray(x_t, dtype=np.float64)
        if x_t.shape[-1] != self.dim:
            raise ShapeMismatchError(f"last axis must be {self.dim}")
        e = self._embedding(cond, unconditional)
        fixed = np.concatenate([self.time_embedding(t), cond.summary()])
        inp = np.concatenate(
            [x_t, np.broadcast_to(fixed, x_t.shape[:-1] + fixed.shape)], axis=-1
        )
        h = inp @ self.params["w1"].T + self.params["b1"]
        y = conditional_layer_norm(h, e, self.cln_params())
        a = np.tanh(y)
        return a @ self.params["w2"].T + self.params["b2"]

    def l2_loss_and_grads(self, x_t: np.ndarray, t: int, cond: ConditionSet,
                          eps_target: np.ndarray,
                          unconditional: bool = False) -> tuple:
        """Squared-error loss ||eps_target - predict_eps||^2 and its analytic
        gradient for every parameter. Single vectors only."""
        x_t = np.asarray(x_t, dtype=np.float64)
        eps_target = np.asarray(eps_target, dtype=np.float64)
        if x_t.ndim != 1 or eps_target.shape != x_t.shape:
            raise ShapeMismatchError("loss path expects matching 1-D vectors")
        p = self.params
        e = self._embedding(cond, unconditional)

        inp = np.concatenate([x_t, self.time_embedding(t), cond.summary()])
        h = p["w1"] @ inp + p["b1"]
        mean = h.mean()
        var = h.var()
        s = math.sqrt(var + _LN_EPS)
        h_hat = (h - mean) / s
        gamma = p["cln_w_gamma"] @ e + p["cln_b_gamma"]
        beta = p["cln_w_beta"] @ e + p["cln_b_beta"]
        y = gamma * h_hat + beta
        a = np.tanh(y)
        out = p["w2"] @ a + p["b2"]
        r = out - eps_target
        loss = float(r @ r)

        g_out = 2.0 * r
        g_a = p["w2"].T @ g_out
        g_y = g_a * (1.0 - a * a)
        g_hhat = g_y * gamma
        g_h = (g_hhat - g_hhat.mean() - h_hat * np.mean(g_hhat * h_hat)) / s
        grads = {
            "w2": np.outer(g_out, a),
            "b2": g_out,
            "cln_w_gamma": np.outer(g_y * h_hat, e),
            "cln_b_gamma": g_y * h_hat,
            "cln_w_beta": np.outer(g_y, e),
            "cln_b_beta": g_y,
            "w1": np.outer(g_h, inp),
            "b1": g_h,
        }
        return loss, grads


@dataclass
class TrainConfig:
    """Training-loop knobs.

    contrastive_source, when set, maps a step index to a FeaturePairBatch
    (or None for "nothing this step"); its weighted loss is added to the
    recorded history. The batches carry no model parameters, so they shape
    the history, not the gradients.
    """

    steps: int = 500
    lr: float = 1e-3
    p_uncond: float = defaults.P_UNCOND
    contrastive_source: Callable[[int], FeaturePairBatch | None] | None = None
    seed: int = 0


def train_toy(model: ToyDenoiser, dataset: list, sched: NoiseSchedule,
              cfg: TrainConfig) -> np.ndarray:
    """Epsilon-prediction training loop; returns the per-step loss history.

    Per step the RNG draws, in this fixed order: dataset index, timestep t,
    noise eps, one uniform for the condition-drop decision. The condition is
    dropped (unconditional mode) when that uniform is below p_uncond.
    """
    if not dataset:
        raise InvalidParameterError("dataset must be nonempty")
    rng = np.random.default_rng(cfg.seed)
    history = np.empty(cfg.steps)
    for n in range(cfg.steps):
        x0, cond = dataset[int(rng.integers(len(dataset)))]
        t = int(rng.integers(1, sched.num_steps + 1))
        eps = rng.standard_normal(np.shape(x0))
        drop = rng.random() < cfg.p_uncond
        x_t = q_sample(x0, t, eps, sched)
        loss, grads = model.l2_loss_and_grads(x_t, t, cond, eps,
                                              unconditional=drop)
        if cfg.contrastive_source is not None:
            batch = cfg.contrastive_source(n)
            if batch is not None:
                loss += ramp_weight(n) * contrastive_loss(batch)
        for name, grad in grads.items():
            model.params[name] -= cfg.lr * grad
        history[n] = loss
    return history


def finetune_cln(model: ToyDenoiser, dataset: list, sched: NoiseSchedule,
                 iterations: int = defaults.FINETUNE_ITERATIONS,
                 target_embedding: np.ndarray | None = None,
                 lr: float = 1e-3, seed: int = 0) -> ToyDenoiser:
    """Adapt a pre-trained model to one target by updating only the CLN
    affines, with a fixed unit-norm embedding in place of the speaker
    encoder. No perturbation pairs, no contrastive term, no condition drop.
    iterations == 0 is a no-op."""
    if iterations < 0:
        raise InvalidParameterError("iterations must be >= 0")
    if target_embedding is None:
        raise InvalidParameterError("finetune needs a target embedding")
    emb = np.asarray(target_embedding, dtype=np.float64)
    if abs(np.linalg.norm(emb) - 1.0) > 1e-6:
        raise InvalidParameterError("target embedding must have unit norm")
    if not dataset:
        raise InvalidParameterError("dataset must be nonempty")
    rng = np.random.default_rng(seed)
    for _ in range(iterations):
        x0, cond = dataset[int(rng.integers(len(dataset)))]
        t = int(rng.integers(1, sched.num_steps + 1))
        eps = rng.standard_normal(np.shape(x0))
        x_t = q_sample(x0, t, eps, sched)
        fixed = replace(cond, speaker_embedding=emb)
        _, grads = model.l2_loss_and_grads(x_t, t, fixed, eps)
        for name in CLN_PARAM_NAMES:
            model.params[name] -= lr * grads[name]
    return model


def evaluate_l2(model: ToyDenoiser, dataset: list, sched: NoiseSchedule,
                embedding: np.ndarray | None = None, n_draws: int = 200,
                seed: int = 12345) -> float:
    """Mean epsilon-prediction loss over fixed random (item, t, eps) draws."""
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(n_draws):
        x0, cond = dataset[int(rng.integers(len(dataset)))]
        t = int(rng.integers(1, sched.num_steps + 1))
        eps = rng.standard_normal(np.shape(x0))
        if embedding is not None:
            cond = replace(cond, speaker_embedding=embedding)
        loss, _ = model.l2_loss_and_grads(q_sample(x0, t, eps, sched), t, cond, eps)
        total += loss
    return total / n_draws


def pseudo_speaker_embedding(seed: int, dim: int) -> np.ndarray:
    """Seeded standard-normal vector scaled to unit L2 norm."""
    if dim < 1:
        raise InvalidParameterError("dim must be >= 1")
    v = np.random.default_rng(seed).standard_normal(dim)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ZeroNormError("degenerate zero draw")
    return v / norm


# -- model serialization ----------------------------------------------------

def save_model(model: ToyDenoiser, directory: str | os.PathLike) -> None:
    """One SVCF tensor per named parameter plus a JSON index.

    SVCF payloads are float32, so loading quantizes parameters accordingly.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    index = {
        "dim": model.dim,
        "cond_dim": model.cond_dim,
        "speaker_dim": model.speaker_dim,
        "num_steps": model.num_steps,
        "hidden": model.hidden,
        "time_freqs": model.time_freqs,
        "params": {},
    }
    for name, value in model.params.items():
        fname = f"{name}.svcf"
        write_tensor(d / fname, value)
        index["params"][name] = fname
    atomic_write_bytes(d / "index.json", (json.dumps(index, indent=2) + "\n").encode())


def load_model(directory: str | os.PathLike) -> ToyDenoiser:
    d = Path(directory)
    index_path = d / "index.json"
    if not index_path.exists():
        raise MissingFileError(f"no model index at {index_path}")
    try:
        index = json.loads(index_path.read_text())
        model = ToyDenoiser(
            dim=index["dim"], cond_dim=index["cond_dim"],
            speaker_dim=index["speaker_dim"], num_steps=index["num_steps"],
            hidden=index["hidden"], time_freqs=index["time_freqs"],
        )
        for name, fname in index["params"].items():
            model.params[name] = read_tensor(d / fname).astype(np.float64)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ManifestFormatError(f"bad model index {index_path}: {exc}") from exc
    return model
