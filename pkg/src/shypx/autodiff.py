"""Minimal reverse-mode differentiation over a fixed operation set.

Values are dense float64 numpy arrays. Operations record onto a Tape in
topological order (every node's inputs precede it), so the backward sweep
is a single reversed pass with no sorting. Every op doubles as a plain
numpy function: if no argument is a Tensor, nothing is recorded and the
raw ndarray result is returned, which gives evaluation-only code paths the
same implementation as differentiable ones.

Shapes must match exactly; the only implicit broadcast is the bias-add in
`add` ((N, D) + (D,)). Row-wise scaling is the explicit op `scale_rows`.

Grouped (segment) operations take a SegmentMap, a precomputed grouping of
positions by integer id that provides scatter-add, gather, grouped max,
and grouped softmax. Gather (segment_take) is the adjoint of scatter-add.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse


class AutodiffError(Exception):
    pass


class ShapeMismatch(AutodiffError):
    pass


class NonScalarLoss(AutodiffError):
    """Gradients were requested for a non-scalar output."""


class Tape:
    """Recorded operations for one forward pass."""

    __slots__ = ("nodes",)

    def __init__(self):
        self.nodes: list[Tensor] = []

    def input(self, value) -> "Tensor":
        """A leaf that gradients can be requested for."""
        return Tensor(self, np.asarray(value, dtype=np.float64), (), None, True)

    def constant(self, value) -> "Tensor":
        """A leaf excluded from gradient computation."""
        return Tensor(self, np.asarray(value, dtype=np.float64), (), None, False)


class Tensor:
    __slots__ = ("tape", "index", "value", "parents", "vjp", "needs_grad")

    def __init__(self, tape, value, parents, vjp, needs_grad):
        self.tape = tape
        self.value = value
        self.parents = parents
        self.vjp = vjp
        self.needs_grad = needs_grad
        self.index = len(tape.nodes)
        tape.nodes.append(self)

    @property
    def shape(self):
        return self.value.shape


def value_of(x) -> np.ndarray:
    return x.value if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def _tape_of(*xs) -> Tape | None:
    for x in xs:
        if isinstance(x, Tensor):
            return x.tape
    return None


def _record(tape, value, inputs, vjp) -> Tensor:
    """Record an op; vjp returns one gradient per input, in input order.

    Non-Tensor inputs are kept as None placeholders so vjp outputs stay
    aligned with their positions.
    """
    parents = tuple(x if isinstance(x, Tensor) else None for x in inputs)
    needs = any(p.needs_grad for p in parents if p is not None)
    return Tensor(tape, value, parents, vjp if needs else None, needs)


def backward(output: Tensor, targets) -> list[np.ndarray]:
    """Gradients of a scalar output with respect to each target tensor."""
    if output.value.shape != ():
        raise NonScalarLoss(f"output has shape {output.value.shape}, expected scalar")
    tape = output.tape
    adjoint: list[np.ndarray | None] = [None] * len(tape.nodes)
    adjoint[output.index] = np.ones(())
    for node in reversed(tape.nodes[: output.index + 1]):
        g = adjoint[node.index]
        if g is None or node.vjp is None or not node.parents:
            continue
        grads = node.vjp(g)
        for parent, pg in zip(node.parents, grads):
            if parent is None or pg is None or not parent.needs_grad:
                continue
            if adjoint[parent.index] is None:
                adjoint[parent.index] = pg.copy() if pg.base is not None else pg
            else:
                adjoint[parent.index] = adjoint[parent.index] + pg
    out = []
    for t in targets:
        if t.tape is not tape:
            raise AutodiffError("gradient target is not on the output's tape")
        g = adjoint[t.index]
        out.append(np.zeros_like(t.value) if g is None else np.asarray(g))
    return out


# ---------------------------------------------------------------- op library


def matmul(a, b):
    av, bv = value_of(a), value_of(b)
    if av.ndim != 2 or bv.ndim not in (1, 2) or av.shape[1] != bv.shape[0]:
        raise ShapeMismatch(f"matmul {av.shape} @ {bv.shape}")
    out = av @ bv
    tape = _tape_of(a, b)
    if tape is None:
        return out

    def vjp(g):
        if bv.ndim == 1:
            return (np.outer(g, bv), av.T @ g)
        return (g @ bv.T, av.T @ g)

    return _record(tape, out, (a, b), vjp)


def add(a, b):
    av, bv = value_of(a), value_of(b)
    bias = av.ndim == 2 and bv.ndim == 1 and av.shape[1] == bv.shape[0]
    if not bias and av.shape != bv.shape:
        raise ShapeMismatch(f"add {av.shape} + {bv.shape}")
    out = av + bv
    tape = _tape_of(a, b)
    if tape is None:
        return out

    def vjp(g):
        return (g, g.sum(axis=0) if bias else g)

    return _record(tape, out, (a, b), vjp)


def mul(a, b):
    av, bv = value_of(a), value_of(b)
    if av.shape != bv.shape:
        raise ShapeMismatch(f"mul {av.shape} * {bv.shape}")
    out = av * bv
    tape = _tape_of(a, b)
    if tape is None:
        return out
    return _record(tape, out, (a, b), lambda g: (g * bv, g * av))


def scale(a, c: float):
    """Multiply by a python scalar constant."""
    av = value_of(a)
    out = av * c
    tape = _tape_of(a)
    if tape is None:
        return out
    return _record(tape, out, (a,), lambda g: (g * c,))


def add_scalar(a, c: float):
    av = value_of(a)
    out = av + c
    tape = _tape_of(a)
    if tape is None:
        return out
    return _record(tape, out, (a,), lambda g: (g,))


def relu(a):
    av = value_of(a)
    out = np.maximum(av, 0.0)
    tape = _tape_of(a)
    if tape is None:
        return out
    return _record(tape, out, (a,), lambda g: (g * (av > 0),))


def sigmoid(a):
    av = value_of(a)
    with np.errstate(over="ignore"):
        out = np.where(av >= 0, 1.0 / (1.0 + np.exp(-av)), np.exp(av) / (1.0 + np.exp(av)))
    tape = _tape_of(a)
    if tape is None:
        return out
    return _record(tape, out, (a,), lambda g: (g * out * (1.0 - out),))


def exp(a):
    av = value_of(a)
    out = np.exp(av)
    tape = _tape_of(a)
    if tape is None:
        return out
    return _record(tape, out, (a,), lambda g: (g * out,))


def log(a):
    av = value_of(a)
    out = np.log(av)
    tape = _tape_of(a)
    if tape is None:
        return out
    return _record(tape, out, (a,), lambda g: (g / av,))


def clamp(a, lo: float, hi: float):
    """Clip to [lo, hi]; gradient passes where lo <= value <= hi."""
    av = value_of(a)
    out = np.clip(av, lo, hi)
    tape = _tape_of(a)
    if tape is None:
        return out
    inside = (av >= lo) & (av <= hi)
    return _record(tape, out, (a,), lambda g: (g * inside,))


def sum_all(a):
    av = value_of(a)
    out = np.asarray(av.sum())
    tape = _tape_of(a)
    if tape is None:
        return out
    return _record(tape, out, (a,), lambda g: (np.broadcast_to(g, av.shape),))


def mean_all(a):
    av = value_of(a)
    return scale(sum_all(a), 1.0 / av.size)


def scale_rows(a, s):
    """Row-wise scaling: out[i] = a[i] * s[i] for a (L, D) or (L,), s (L,)."""
    av, sv = value_of(a), value_of(s)
    if sv.ndim != 1 or av.shape[0] != sv.shape[0]:
        raise ShapeMismatch(f"scale_rows {av.shape} by {sv.shape}")
    col = sv if av.ndim == 1 else sv[:, None]
    out = av * col
    tape = _tape_of(a, s)
    if tape is None:
        return out

    def vjp(g):
        gs = g * av if av.ndim == 1 else (g * av).sum(axis=1)
        return (g * col, gs)

    return _record(tape, out, (a, s), vjp)


def gather_rows(a, idx):
    """out = a[idx]; adjoint scatter-adds gradients back by index."""
    av = value_of(a)
    idx = np.asarray(idx, dtype=np.int64)
    out = av[idx]
    tape = _tape_of(a)
    if tape is None:
        return out

    def vjp(g):
        ga = np.zeros_like(av)
        np.add.at(ga, idx, g)
        return (ga,)

    return _record(tape, out, (a,), vjp)


def row(a, i: int):
    """Select row i of a matrix as a vector."""
    av = value_of(a)
    if av.ndim != 2:
        raise ShapeMismatch(f"row() expects a matrix, got {av.shape}")
    out = av[i]
    tape = _tape_of(a)
    if tape is None:
        return out

    def vjp(g):
        ga = np.zeros_like(av)
        ga[i] = g
        return (ga,)

    return _record(tape, out, (a,), vjp)


def hard_threshold(a, thresh: float = 0.5):
    """Straight-through binarization: forward in {0,1}, backward identity."""
    av = value_of(a)
    out = (av > thresh).astype(np.float64)
    tape = _tape_of(a)
    if tape is None:
        return out
    return _record(tape, out, (a,), lambda g: (g,))


# --------------------------------------------------------------- segment ops


class SegmentMap:
    """Grouping of L positions into num_segments groups by integer id.

    Precomputes a CSR indicator matrix for scatter-add and a stable sorted
    order for grouped max. Built once per hypergraph side (links grouped by
    hyperedge, links grouped by node) and reused across forward passes.
    """

    def __init__(self, ids, num_segments: int):
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= num_segments):
            raise ShapeMismatch("segment id out of range")
        self.ids = ids
        self.length = int(ids.size)
        self.num_segments = int(num_segments)
        data = np.ones(ids.size)
        self.mat = sparse.csr_matrix(
            (data, (ids, np.arange(ids.size))), shape=(num_segments, ids.size)
        )
        self.order = np.argsort(ids, kind="stable")
        sorted_ids = ids[self.order]
        present, starts = np.unique(sorted_ids, return_index=True)
        self.present = present
        self.starts = starts

    def sum(self, x: np.ndarray) -> np.ndarray:
        out = self.mat @ x
        return np.asarray(out)

    def take(self, x: np.ndarray) -> np.ndarray:
        return x[self.ids]

    def max(self, x: np.ndarray, fill: float = -np.inf) -> np.ndarray:
        """Per-segment max of a vector; empty segments get `fill`."""
        out = np.full(self.num_segments, fill)
        if self.length:
            out[self.present] = np.maximum.reduceat(x[self.order], self.starts)
        return out


def segment_sum(x, seg: SegmentMap):
    """Scatter-add rows of x grouped by segment id."""
    xv = value_of(x)
    if xv.shape[0] != seg.length:
        raise ShapeMismatch(f"segment_sum over {seg.length} ids, got {xv.shape}")
    out = seg.sum(xv)
    tape = _tape_of(x)
    if tape is None:
        return out
    return _record(tape, out, (x,), lambda g: (seg.take(np.asarray(g)),))


def segment_take(x, seg: SegmentMap):
    """Gather per-segment rows out to positions: out[i] = x[ids[i]]."""
    xv = value_of(x)
    if xv.shape[0] != seg.num_segments:
        raise ShapeMismatch(f"segment_take from {seg.num_segments} segments, got {xv.shape}")
    out = seg.take(xv)
    tape = _tape_of(x)
    if tape is None:
        return out
    return _record(tape, out, (x,), lambda g: (seg.sum(np.asarray(g)),))


def segment_softmax(scores, seg: SegmentMap, weights=None):
    """Softmax within segments, optionally weighted inside the normalization.

    out_i = w_i * exp(s_i - m) / sum_{j in seg(i)} w_j * exp(s_j - m), with m
    the per-segment max over positions with w > 0. Positions with w = 0 get
    exactly 0, and a fully zero-weighted segment yields all zeros, so masked
    softmax matches the softmax of the physically reduced segment bit for
    bit. Differentiable in both scores and weights.
    """
    sv = value_of(scores)
    wv = None if weights is None else value_of(weights)
    if sv.ndim != 1 or sv.shape[0] != seg.length:
        raise ShapeMismatch(f"segment_softmax over {seg.length} ids, got {sv.shape}")
    if wv is not None and wv.shape != sv.shape:
        raise ShapeMismatch("weights shape must match scores")

    masked_scores = sv if wv is None else np.where(wv > 0, sv, -np.inf)
    m = seg.max(masked_scores)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    expo = sv - m_safe[seg.ids]
    if wv is None:
        u = np.exp(expo)
        n = u
    else:
        # cap the exponent so zero-weighted positions with scores above the
        # kept max stay finite (u then only feeds the weight gradient)
        u = np.exp(np.minimum(expo, 50.0))
        n = np.where(wv > 0, wv * u, 0.0)
    denom = seg.sum(n)
    safe = np.where(denom > 0, denom, 1.0)
    out = n / safe[seg.ids]

    tape = _tape_of(scores, weights) if weights is not None else _tape_of(scores)
    if tape is None:
        return out

    inv_denom = np.where(denom > 0, 1.0 / safe, 0.0)

    def vjp(g):
        t = seg.take(seg.sum(g * out))
        gs = out * (g - t)
        if wv is None:
            return (gs,)
        gw = u * seg.take(inv_denom) * (g - t)
        return (gs, gw)

    inputs = (scores,) if weights is None else (scores, weights)
    return _record(tape, out, inputs, vjp)


# ------------------------------------------------- softmax-based loss kernels


def _log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(z: np.ndarray) -> np.ndarray:
    """Plain (non-recorded) row softmax for evaluation paths."""
    return np.exp(_log_softmax(np.asarray(z, dtype=np.float64)))


def kl_from_logits(logits, ref, clamp_at: float = 1e-12):
    """KL(softmax(logits) || ref) for a single class-logit vector.

    ref is a fixed probability vector; its entries are clamped at
    `clamp_at` inside the log.
    """
    zv = value_of(logits)
    refv = np.asarray(value_of(ref))
    if zv.ndim != 1 or zv.shape != refv.shape:
        raise ShapeMismatch(f"kl_from_logits {zv.shape} vs {refv.shape}")
    ls = _log_softmax(zv)
    p = np.exp(ls)
    diff = ls - np.log(np.maximum(refv, clamp_at))
    out = np.asarray((p * diff).sum())
    tape = _tape_of(logits)
    if tape is None:
        return out
    return _record(tape, out, (logits,), lambda g: (g * p * (diff - out),))


def cross_entropy_from_logits(logits, targets):
    """Mean over rows of -sum targets * log_softmax(logits).

    targets is a fixed matrix of row distributions (one-hot for hard
    labels); equals mean KL(targets || softmax(logits)) up to the targets'
    entropy.
    """
    zv = value_of(logits)
    tv = np.asarray(value_of(targets))
    if zv.shape != tv.shape or zv.ndim != 2:
        raise ShapeMismatch(f"cross_entropy_from_logits {zv.shape} vs {tv.shape}")
    ls = _log_softmax(zv)
    out = np.asarray(-(tv * ls).sum(axis=1).mean())
    tape = _tape_of(logits)
    if tape is None:
        return out
    p = np.exp(ls)
    n = zv.shape[0]
    return _record(tape, out, (logits,), lambda g: (g * (p - tv) / n,))


# ------------------------------------------------------------ program drivers


def forward_backward(program, inputs, grad_targets=None):
    """Trace a program and differentiate its scalar output.

    program is a callable taking one Tensor per entry of `inputs` and
    returning a Tensor. Returns (output value, [gradient per target]);
    grad_targets are indices into `inputs` (default: all of them).
    """
    tape = Tape()
    xs = [tape.input(v) for v in inputs]
    out = program(*xs)
    if not isinstance(out, Tensor):
        out = tape.constant(out)
    if grad_targets is None:
        grad_targets = range(len(xs))
    grads = backward(out, [xs[i] for i in grad_targets])
    return out.value, grads


def finite_difference_check(program, inputs, epsilon: float = 1e-5) -> float:
    """Max relative error between reverse-mode and central-difference grads.

    Coordinates where the two one-sided differences disagree (kinks of
    relu/clamp/threshold at the sample point) are excluded.
    """
    inputs = [np.asarray(x, dtype=np.float64) for x in inputs]
    f0, grads = forward_backward(program, inputs)

    def run(xs):
        tape = Tape()
        ts = [tape.input(v) for v in xs]
        return float(value_of(program(*ts)))

    worst = 0.0
    for i, x in enumerate(inputs):
        flat = x.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            perturbed = [v.copy() for v in inputs]
            perturbed[i].reshape(-1)[j] = orig + epsilon
            f_plus = run(perturbed)
            perturbed[i].reshape(-1)[j] = orig - epsilon
            f_minus = run(perturbed)
            d_plus = (f_plus - float(f0)) / epsilon
            d_minus = (float(f0) - f_minus) / epsilon
            if abs(d_plus - d_minus) > 1e-3 * (1.0 + max(abs(d_plus), abs(d_minus))):
                continue  # nondifferentiable point
            g_fd = (f_plus - f_minus) / (2 * epsilon)
            g_ad = grads[i].reshape(-1)[j]
            err = abs(g_ad - g_fd) / max(1.0, abs(g_fd))
            worst = max(worst, err)
    return worst
