"""Shot-level simulation of the hybrid measurement protocol.

Each run draws one of 16 measurement-choice pairs: each side either
skips, measures its early observable, its late observable, or both in
sequence.  Only some choices yield usable correlator data; those are
pooled into the hybrid combination with propagated standard errors.

Randomness is a counter-based stream: draw d of shot s hashes
(seed, salt, 2s + d) through a 64-bit mixer, so any shot can be
generated independently and results never depend on chunking.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .dsl import VariableId
from .polynomials import format_varset
from .quantum import projectors, validate_density

X1 = VariableId("X", 1)
X2 = VariableId("X", 2)
Y1 = VariableId("Y", 1)
Y2 = VariableId("Y", 2)

DRAWS_PER_SHOT = 2  # one joint draw at each of the two time slots

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix64(z):
    with np.errstate(over="ignore"):  # wraparound mod 2^64 is the point
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


class CounterRng:
    """Stateless uniform stream: value = f(seed, salt, counter).

    uniforms(shots, draw) returns one float64 in [0, 1) per shot index,
    from the top 53 bits of the mixed counter word.
    """

    def __init__(self, seed: int, salt: int = 0):
        # 0-d arrays, not scalars: unsigned array arithmetic wraps silently
        base = _mix64(np.array(seed & 0xFFFFFFFFFFFFFFFF, dtype=np.uint64))
        salted = _mix64(np.array(salt & 0xFFFFFFFFFFFFFFFF, dtype=np.uint64))
        self.key = _mix64(base ^ salted)

    def uniforms(self, shot_indices, draw: int) -> np.ndarray:
        idx = np.asarray(shot_indices, dtype=np.uint64)
        with np.errstate(over="ignore"):
            counters = idx * np.uint64(DRAWS_PER_SHOT) + np.uint64(draw)
            words = _mix64(self.key + counters * _GOLDEN)
        return (words >> np.uint64(11)).astype(np.float64) / float(1 << 53)

    def uniform(self, shot_index: int, draw: int) -> float:
        return float(self.uniforms(np.array([shot_index], dtype=np.uint64), draw)[0])


@dataclass(frozen=True)
class MeasurementChoice:
    """What each side measures this shot, in time order."""

    alice: tuple[VariableId, ...]
    bob: tuple[VariableId, ...]

    def label(self) -> str:
        left = "".join(str(v) for v in self.alice) or "-"
        right = "".join(str(v) for v in self.bob) or "-"
        return f"({left},{right})"


ALICE_OPTIONS = ((), (X1,), (X2,), (X1, X2))
BOB_OPTIONS = ((), (Y1,), (Y2,), (Y1, Y2))

ALL_CHOICES = tuple(
    MeasurementChoice(a, b) for a in ALICE_OPTIONS for b in BOB_OPTIONS
)

_ADMISSIBLE = {
    ((), (Y1, Y2)): ({Y1, Y2},),
    ((X1, X2), ()): ({X1, X2},),
    ((X1,), (Y2,)): ({X1, Y2},),
    ((X2,), (Y1,)): ({X2, Y1},),
    ((X1,), (Y1, Y2)): ({X1, Y1}, {Y1, Y2}),
    ((X1, X2), (Y1,)): ({X1, X2},),
    ((X2,), (Y1, Y2)): ({X2, Y1}, {Y1, Y2}),
    ((X1, X2), (Y2,)): ({X1, X2}, {X1, Y2}),
    ((X1, X2), (Y1, Y2)): ({X1, X2}, {Y1, Y2}),
}


def admissible_data(choice: MeasurementChoice) -> frozenset:
    """Correlator pairs this choice legitimately estimates.

    Sequential measurement disturbs what follows on the same side, so a
    pair is admissible only when nothing incompatible intervened; 9 of
    the 16 choices yield data, and several yield two pairs at once.
    """
    pairs = _ADMISSIBLE.get((choice.alice, choice.bob), ())
    return frozenset(frozenset(p) for p in pairs)


DATA_CHOICES = tuple(c for c in ALL_CHOICES if admissible_data(c))


@dataclass(frozen=True)
class ShotRecord:
    choice: MeasurementChoice
    outcomes: dict[VariableId, int]
    stream_id: int

    def product(self, pair) -> int:
        a, b = pair
        return self.outcomes[a] * self.outcomes[b]


def _stage_projector_sets(choice, settings):
    """Per time slot, the measured variables and their ±1 projectors.

    Slot 1 holds the index-1 variables of the choice, slot 2 the
    index-2 ones; cross-party operators in a slot commute, so the slot
    is sampled jointly.
    """
    slots = []
    for time_index in (1, 2):
        measured = [v for v in choice.alice + choice.bob if v.index == time_index]
        ops = []
        for var in measured:
            plus, minus = projectors(settings[var])
            if var.letter == "X":
                plus, minus = np.kron(plus, np.eye(2)), np.kron(minus, np.eye(2))
            else:
                plus, minus = np.kron(np.eye(2), plus), np.kron(np.eye(2), minus)
            ops.append((var, plus, minus))
        slots.append(ops)
    return slots


def _slot_outcomes(ops):
    """All outcome tuples of a slot with their projection operators."""
    if not ops:
        return [((), np.eye(4, dtype=complex))]
    out = []
    for signs in iproduct((1, -1), repeat=len(ops)):
        proj = np.eye(4, dtype=complex)
        for sign, (_, plus, minus) in zip(signs, ops):
            proj = proj @ (plus if sign == 1 else minus)
        out.append((signs, proj))
    return out


def _choice_tables(rho, choice, settings):
    """Exact two-stage outcome distribution for one choice.

    Returns (slot variable lists, p1 over slot-1 outcomes, conditional
    p2[o1] over slot-2 outcomes), each probability from the Born rule
    with collapse between slots.
    """
    slot_ops = _stage_projector_sets(choice, settings)
    vars1 = [var for var, _, _ in slot_ops[0]]
    vars2 = [var for var, _, _ in slot_ops[1]]
    outs1 = _slot_outcomes(slot_ops[0])
    outs2 = _slot_outcomes(slot_ops[1])
    p1 = np.zeros(len(outs1))
    p2 = np.zeros((len(outs1), len(outs2)))
    for i, (_, proj1) in enumerate(outs1):
        collapsed = proj1 @ rho @ proj1.conj().T
        weight = float(np.trace(collapsed).real)
        p1[i] = weight
        if weight <= 0.0:
            p2[i] = 1.0 / len(outs2)  # never sampled; keep the row valid
            continue
        for j, (_, proj2) in enumerate(outs2):
            p2[i, j] = float(np.trace(proj2 @ collapsed @ proj2.conj().T).real) / weight
    outcomes1 = [signs for signs, _ in outs1]
    outcomes2 = [signs for signs, _ in outs2]
    return vars1, vars2, outcomes1, outcomes2, p1, p2


def _cumulative(p):
    cum = np.cumsum(p, axis=-1)
    if abs(float(np.take(cum, -1, axis=-1).min()) - 1.0) > 1e-9 or abs(
        float(np.take(cum, -1, axis=-1).max()) - 1.0
    ) > 1e-9:
        raise ArithmeticError("outcome probabilities do not sum to 1")
    cum[..., -1] = 1.0
    return cum


def simulate_shot(rho, choice, settings, seed, shot_index=0, salt=0) -> ShotRecord:
    """One protocol shot with explicit Born sampling and collapse.

    Draw 0 picks the joint outcome of the early slot, draw 1 of the late
    slot from the collapsed state; outcomes are recorded per variable.
    """
    rho = validate_density(np.asarray(rho, dtype=complex))
    if rho.shape != (4, 4):
        raise ValueError("the protocol simulates a two-qubit state")
    rng = CounterRng(seed, salt)
    slot_ops = _stage_projector_sets(choice, settings)
    outcomes: dict[VariableId, int] = {}
    state = rho
    for draw, ops in enumerate(slot_ops):
        if not ops:
            continue  # empty slot: nothing measured, no draw consumed
        options = _slot_outcomes(ops)
        probs = np.array(
            [float(np.trace(proj @ state @ proj.conj().T).real) for _, proj in options]
        )
        cum = _cumulative(probs)
        u = rng.uniform(shot_index, draw)
        pick = int(np.searchsorted(cum, u, side="right"))
        signs, proj = options[pick]
        weight = probs[pick]
        state = (proj @ state @ proj.conj().T) / weight
        for sign, (var, _, _) in zip(signs, ops):
            outcomes[var] = int(sign)
    return ShotRecord(choice, outcomes, shot_index)


def simulate_choice_block(rho, choice, settings, seed, shot_indices, salt=0):
    """Vectorized outcomes for many shots of one choice.

    Consumes the same stream positions as simulate_shot, so a block is
    bit-identical to looping shot by shot.
    """
    rho = validate_density(np.asarray(rho, dtype=complex))
    rng = CounterRng(seed, salt)
    vars1, vars2, outcomes1, outcomes2, p1, p2 = _choice_tables(rho, choice, settings)
    idx = np.asarray(shot_indices, dtype=np.uint64)
    picks1 = np.zeros(len(idx), dtype=np.intp)
    if vars1:
        cum1 = _cumulative(p1)
        picks1 = np.searchsorted(cum1, rng.uniforms(idx, 0), side="right")
    picks2 = np.zeros(len(idx), dtype=np.intp)
    if vars2:
        cum2 = _cumulative(p2)
        rows = cum2[picks1]
        u2 = rng.uniforms(idx, 1)
        picks2 = (u2[:, None] < rows).argmax(axis=1)
    values = {}
    for k, var in enumerate(vars1):
        table = np.array([o[k] for o in outcomes1], dtype=np.int8)
        values[var] = table[picks1]
    for k, var in enumerate(vars2):
        table = np.array([o[k] for o in outcomes2], dtype=np.int8)
        values[var] = table[picks2]
    return values


@dataclass(frozen=True)
class CorrelatorEstimate:
    label: str
    mean: float
    stderr: float
    count: int


@dataclass(frozen=True)
class ProtocolEstimate:
    """Pooled correlator estimates and the combined hybrid value."""

    terms: dict[str, CorrelatorEstimate]
    f_value: float
    f_stderr: float
    shots: int
    seed: int
    choice_counts: dict[str, int]


F_COEFFICIENTS = {
    frozenset({X1, X2}): 1.0,
    frozenset({X1, Y2}): 1.0,
    frozenset({X2, Y1}): -1.0,
    frozenset({Y1, Y2}): 1.0,
}


def estimate_f(rho, settings, shots: int, seed: int) -> ProtocolEstimate:
    """Monte Carlo estimate of the hybrid combination.

    Shots are split as evenly as possible over the 9 data-yielding
    choices (global shot ids stay consecutive per block, so estimates
    are reproducible and chunk-free).  Standard errors propagate the
    covariances between pools that share shots.
    """
    if shots < 1:
        raise ValueError("need at least one shot")
    counts = [shots // len(DATA_CHOICES)] * len(DATA_CHOICES)
    for i in range(shots % len(DATA_CHOICES)):
        counts[i] += 1

    pools: dict[frozenset, list[np.ndarray]] = {}
    block_products: list[dict[frozenset, np.ndarray]] = []
    next_id = 0
    choice_counts = {}
    for choice, count in zip(DATA_CHOICES, counts):
        choice_counts[choice.label()] = count
        ids = np.arange(next_id, next_id + count, dtype=np.uint64)
        next_id += count
        if count == 0:
            block_products.append({})
            continue
        values = simulate_choice_block(rho, choice, settings, seed, ids)
        per_pair = {}
        for pair in admissible_data(choice):
            a, b = sorted(pair, key=VariableId.sort_key)
            prods = values[a].astype(np.float64) * values[b].astype(np.float64)
            per_pair[pair] = prods
            pools.setdefault(pair, []).append(prods)
        block_products.append(per_pair)

    estimates = {}
    means, variances, counts_by_pair = {}, {}, {}
    for pair, chunks in pools.items():
        data = np.concatenate(chunks)
        n = data.size
        mean = float(data.mean())
        var = float(data.var(ddof=1)) if n > 1 else 0.0
        means[pair], variances[pair], counts_by_pair[pair] = mean, var, n
        estimates[format_varset(pair)] = CorrelatorEstimate(
            format_varset(pair), mean, float(np.sqrt(var / n)) if n else float("nan"), n
        )

    f_value = sum(
        coeff * means[pair] for pair, coeff in F_COEFFICIENTS.items() if pair in means
    )
    f_var = sum(
        coeff**2 * variances[pair] / counts_by_pair[pair]
        for pair, coeff in F_COEFFICIENTS.items()
        if pair in means
    )
    # blocks feeding two pools at once correlate those pool means
    for per_pair in block_products:
        shared = [p for p in per_pair if p in F_COEFFICIENTS]
        for i in range(len(shared)):
            for j in range(i + 1, len(shared)):
                pi, pj = shared[i], shared[j]
                a, b = per_pair[pi], per_pair[pj]
                if a.size > 1:
                    cov = float(np.cov(a, b, ddof=1)[0, 1])
                    f_var += (
                        2.0
                        * F_COEFFICIENTS[pi]
                        * F_COEFFICIENTS[pj]
                        * cov
                        * a.size
                        / (counts_by_pair[pi] * counts_by_pair[pj])
                    )
    return ProtocolEstimate(
        estimates, float(f_value), float(np.sqrt(max(f_var, 0.0))), shots, seed, choice_counts
    )


@dataclass(frozen=True)
class SignalingReport:
    """P(Y2 = +1) with and without a preceding Y1 measurement.

    A nonzero difference is the formal signaling carried by temporal
    correlations on one side; it says nothing about communication
    between the separated parties.
    """

    p_alone: float
    se_alone: float
    p_after_y1: float
    se_after: float
    shots_per_arm: tuple[int, int]

    @property
    def difference(self) -> float:
        return self.p_alone - self.p_after_y1

    @property
    def z_score(self) -> float:
        spread = np.hypot(self.se_alone, self.se_after)
        if spread == 0.0:
            return float("inf") if self.difference != 0.0 else 0.0
        return float(self.difference / spread)


def signaling_test(rho, settings, shots: int, seed: int) -> SignalingReport:
    """Compare the late-time marginal across the two Bob-only choices."""
    n_alone = shots // 2
    n_after = shots - n_alone
    alone = MeasurementChoice((), (Y2,))
    after = MeasurementChoice((), (Y1, Y2))
    ids_a = np.arange(0, n_alone, dtype=np.uint64)
    ids_b = np.arange(n_alone, shots, dtype=np.uint64)
    va = simulate_choice_block(rho, alone, settings, seed, ids_a, salt=1)
    vb = simulate_choice_block(rho, after, settings, seed, ids_b, salt=1)
    hits_a = (va[Y2] == 1).astype(np.float64)
    hits_b = (vb[Y2] == 1).astype(np.float64)
    p_a, p_b = float(hits_a.mean()), float(hits_b.mean())
    se_a = float(np.sqrt(p_a * (1 - p_a) / n_alone))
    se_b = float(np.sqrt(p_b * (1 - p_b) / n_after))
    return SignalingReport(p_a, se_a, p_b, se_b, (n_alone, n_after))
