"""Weighted-sum-rate utility ``h`` and its corner-point rate assignment.

``h(U)`` is the largest weighted sum rate inside the (queue-capped)
polymatroid of ``U``. It is attained at the corner point that serves elements
in non-increasing weight order, so

    h(U) = sum_k (a_k - a_{k+1}) * rank(first k elements),  a_{|U|+1} = 0.

The same code serves the Gaussian and the finite-alphabet regions; the
region is whatever capped rank function is passed in.
"""

from __future__ import annotations

import numpy as np

from .ground_set import as_indices

_GAIN_BLOCK = 4096


def weighted_ordering(subset, weights) -> tuple[int, ...]:
    """Elements by non-increasing weight, ties by ascending index."""
    return tuple(sorted(as_indices(subset), key=lambda e: (-weights[e], e)))


def weighted_sum_rate_h(subset, weights, capped_rank) -> float:
    order = weighted_ordering(subset, weights)
    total = 0.0
    for k, e in enumerate(order):
        nxt = weights[order[k + 1]] if k + 1 < len(order) else 0.0
        coef = weights[e] - nxt
        if coef != 0.0:
            total += coef * capped_rank(order[: k + 1])
    return total


def corner_point_rates(subset, weights, capped_rank) -> dict[int, float]:
    """Rates of the weight-ordered corner point, keyed by element index."""
    order = weighted_ordering(subset, weights)
    rates = {}
    prev = 0.0
    for k, e in enumerate(order):
        cur = capped_rank(order[: k + 1])
        rates[e] = max(cur - prev, 0.0)
        prev = cur
    return dict(sorted(rates.items()))


class MarginalEvaluator:
    """Evaluates ``h`` and batches of marginals ``h(S + e) - h(S)``.

    With a Gaussian rank and no binding queue the marginals come from the
    matrix determinant lemma: for every prefix ``P_k`` of the weight-ordered
    ``S`` and every (user, precoder, RB) the eigenvalues of
    ``G^H (I + sum_{P_k} p G G^H)^{-1} G`` are computed once, after which each
    candidate costs a handful of array operations. Otherwise every marginal is
    two calls to :func:`weighted_sum_rate_h`.
    """

    def __init__(self, weights, capped_rank):
        self.weights = np.asarray(weights, dtype=float)
        self.rank = capped_rank
        self.ground = capped_rank.ground
        if self.weights.shape != (len(self.ground),):
            raise ValueError(f"expected {len(self.ground)} element weights, got shape {self.weights.shape}")
        self.fast = capped_rank.kind == "gaussian" and capped_rank.all_uncapped()
        self._state_key = None
        self._state = None

    def value(self, subset) -> float:
        return weighted_sum_rate_h(subset, self.weights, self.rank)

    def gains(self, selected, candidates) -> np.ndarray:
        cand = np.asarray(candidates, dtype=np.intp).reshape(-1)
        if cand.size == 0:
            return np.zeros(0)
        if self.fast:
            out = np.empty(cand.size)
            for lo in range(0, cand.size, _GAIN_BLOCK):
                out[lo:lo + _GAIN_BLOCK] = self._fast_gains(selected, cand[lo:lo + _GAIN_BLOCK])
        else:
            sel = as_indices(selected)
            base = self.value(sel)
            out = np.array([self.value(sel + (int(e),)) - base for e in cand])
        in_sel = np.isin(cand, as_indices(selected))
        out[in_sel] = 0.0
        return out

    def _prefix_state(self, selected):
        order = weighted_ordering(selected, self.weights)
        if order == self._state_key:
            return self._state
        rank = self.rank.gaussian
        eff = rank.effective  # (K, W, N, N_r, L)
        n_pre = len(order) + 1
        k_u, k_w, n_rb, _, n_l = eff.shape
        lam = np.empty((n_pre, k_u, k_w, n_rb, n_l))
        for k in range(n_pre):
            for rb in range(n_rb):
                active = self.ground.active_on(sorted(order[:k]), rb)
                chol = np.linalg.cholesky(rank.rb_matrix(rb, tuple(active)))
                g = eff[:, :, rb].reshape(k_u * k_w, -1, n_l)
                b = np.linalg.solve(chol, g)
                a = b.conj().transpose(0, 2, 1) @ b
                lam[k, :, :, rb] = np.clip(np.linalg.eigvalsh(a), 0.0, None).reshape(k_u, k_w, n_l)
        a_sorted = self.weights[list(order)] if order else np.zeros(0)
        self._state_key = order
        self._state = (order, lam, a_sorted)
        return self._state

    def _fast_gains(self, selected, cand):
        order, lam, a_sorted = self._prefix_state(selected)
        g = self.ground
        m = len(order)
        w_c = self.weights[cand]
        # insertion position of each candidate among the weight-ordered selection
        pos = np.zeros(cand.size, dtype=np.intp)
        for s in order:
            before = (self.weights[s] > w_c) | ((self.weights[s] == w_c) & (s < cand))
            pos += before
        a_next = np.append(a_sorted, 0.0)
        lam_c = lam[:, g.user[cand], g.precoder[cand]]  # (m+1, C, N, L)
        psd = g.psd[cand][None, :, None]
        mask = g.alloc_mask[g.alloc[cand]]  # (C, N)
        gain = np.zeros(cand.size)
        for k in range(m + 1):
            per_rb = np.zeros((cand.size, lam.shape[3]))
            for li in range(lam.shape[4]):
                per_rb += np.log2(1.0 + psd[0] * lam_c[k, :, :, li])
            d_k = np.where(mask, per_rb, 0.0).sum(axis=1)
            coef = np.where(pos == k, w_c - a_next[k], 0.0)
            if k >= 1:
                coef = np.where(pos < k, a_sorted[k - 1] - a_next[k], coef)
            gain += coef * d_k
        return gain
