"""
Tiny probabilistic network with hand-written backpropagation.

    x -> tanh(x W1 + b1) -> [mu | pre_sigma] -> phi = mu + softplus(pre_sigma) * eps -> softmax(phi W3 + b3)

The representation layer phi is the Gaussian bottleneck whose per-client
batch statistics (mu, sigma) feed topology learning.
"""

from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import expit, logsumexp

from .models.learning import ClientModel, Dataset, ModelLayout


class ForwardPass(NamedTuple):
    """Intermediate activations of one forward pass."""
    hidden: np.ndarray  # (B, h)
    mu: np.ndarray  # (B, m)
    pre_sigma: np.ndarray  # (B, m)
    sigma: np.ndarray  # (B, m)
    noise: np.ndarray  # (B, m)
    phi: np.ndarray  # (B, m)
    log_probs: np.ndarray  # (B, C)


def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def init_model(layout: ModelLayout, rng: np.random.Generator) -> ClientModel:
    """Scaled normal weights, zero biases."""
    n, h, m, c = layout.input_dim, layout.hidden_dim, layout.rep_dim, layout.class_count
    parts = [
        rng.normal(0.0, 1.0 / np.sqrt(n), size=n * h),
        np.zeros(h),
        rng.normal(0.0, 1.0 / np.sqrt(h), size=h * 2 * m),
        np.zeros(2 * m),
        rng.normal(0.0, 1.0 / np.sqrt(m), size=m * c),
        np.zeros(c),
    ]
    return ClientModel(w=np.concatenate(parts), layout=layout)


def forward(model: ClientModel, features: np.ndarray, noise: Optional[np.ndarray] = None) -> ForwardPass:
    """Forward pass; noise=None uses phi = mu (deterministic evaluation)."""
    params = model.unpack()
    m = model.layout.rep_dim
    hidden = np.tanh(features @ params.w1 + params.b1)
    out = hidden @ params.w2 + params.b2
    mu, pre_sigma = out[:, :m], out[:, m:]
    sigma = softplus(pre_sigma)
    if noise is None:
        noise = np.zeros_like(mu)
    phi = mu + sigma * noise
    logits = phi @ params.w3 + params.b3
    log_probs = logits - logsumexp(logits, axis=1, keepdims=True)
    return ForwardPass(hidden, mu, pre_sigma, sigma, noise, phi, log_probs)


def batch_loss(model: ClientModel, batch: Dataset, noise: np.ndarray) -> float:
    """Mean cross-entropy of a batch for fixed reparameterization noise."""
    fp = forward(model, batch.features, noise)
    return float(-fp.log_probs[np.arange(len(batch)), batch.labels].mean())


def local_gradient(
    model: ClientModel,
    batch: Dataset,
    rng: Optional[np.random.Generator] = None,
    noise: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, Tuple[np.ndarray, np.ndarray], float]:
    """
    Backpropagated gradient of the mean cross-entropy over a minibatch.

    One reparameterization draw per example, taken from rng unless noise is
    given explicitly.

    Returns:
        (flat gradient of length d, (batch-mean mu, batch-mean sigma), loss)
    """
    size = len(batch)
    if size == 0:
        raise ValueError("batch must be nonempty")
    m = model.layout.rep_dim
    if noise is None:
        if rng is None:
            raise ValueError("either rng or noise is required")
        noise = rng.standard_normal((size, m))

    params = model.unpack()
    x = batch.features
    fp = forward(model, x, noise)
    rows = np.arange(size)
    loss = float(-fp.log_probs[rows, batch.labels].mean())

    d_logits = np.exp(fp.log_probs)
    d_logits[rows, batch.labels] -= 1.0
    d_logits /= size

    d_w3 = fp.phi.T @ d_logits
    d_b3 = d_logits.sum(axis=0)
    d_phi = d_logits @ params.w3.T
    d_pre = d_phi * fp.noise * expit(fp.pre_sigma)
    d_out = np.concatenate([d_phi, d_pre], axis=1)

    d_w2 = fp.hidden.T @ d_out
    d_b2 = d_out.sum(axis=0)
    d_hidden = (d_out @ params.w2.T) * (1.0 - fp.hidden ** 2)
    d_w1 = x.T @ d_hidden
    d_b1 = d_hidden.sum(axis=0)

    grad = np.concatenate([g.ravel() for g in (d_w1, d_b1, d_w2, d_b2, d_w3, d_b3)])
    stats_row = (fp.mu.mean(axis=0), fp.sigma.mean(axis=0))
    return grad, stats_row, loss


def predict(model: ClientModel, features: np.ndarray) -> np.ndarray:
    """Class predictions with phi = mu."""
    return np.argmax(forward(model, features).log_probs, axis=1)


def evaluate(model: ClientModel, dataset: Dataset) -> float:
    """Accuracy on a dataset (no sampling)."""
    if len(dataset) == 0:
        return 0.0
    return float(np.mean(predict(model, dataset.features) == dataset.labels))
