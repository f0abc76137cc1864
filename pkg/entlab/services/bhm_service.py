"""Boolean Hidden Matching: sampling, moments, matching combinatorics and protocols."""
import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from entlab.core.config import settings
from entlab.core.exceptions import BudgetExceededError, InvalidStateError
from entlab.core.logger import get_logger, log_execution_time
from entlab.core.seeding import make_rng
from entlab.models.instances import (
    BhmInstance,
    DistributionKind,
    HardDistributionSpec,
    LevelSets,
    Matching,
    as_signs,
)
from entlab.models.schemas import (
    GoldenRational,
    MatchProbabilityResult,
    MomentCounterexample,
    MomentReport,
    OracleResult,
    RationalAudit,
)
from entlab.models.spectra import members, points
from entlab.services.fourier_service import butterfly

logger = get_logger(__name__)

MAX_MOMENT_VARIABLES = 8
MAX_COPIES = 4
MAX_DELTA_BITS = 12
MAX_LABELINGS = 1 << 17


def all_pairings(items: Sequence[int]) -> Iterable[List[Tuple[int, int]]]:
    """Every partition of ``items`` into pairs, first item paired first."""
    items = list(items)
    if not items:
        yield []
        return
    first = items.pop(0)
    for i, item in enumerate(items):
        for rest in all_pairings(items[:i] + items[i + 1:]):
            yield [(first, item)] + rest


@lru_cache(maxsize=None)
def enumerate_matchings(n: int, m: int) -> Tuple[Matching, ...]:
    """
    All m-edge matchings on n vertices.

    There are C(n, 2m) (2m - 1)!! of them; edges are listed by their
    smaller endpoint.
    """
    if m < 0 or 2 * m > n:
        raise InvalidStateError(f"No {m}-edge matchings on {n} vertices")
    result = []
    for vertices in combinations(range(n), 2 * m):
        for pairing in all_pairings(vertices):
            result.append(Matching(n, tuple(pairing)))
    return tuple(result)


@lru_cache(maxsize=None)
def _single_copy_moments(n: int, m: int) -> Dict[Tuple[int, int], Fraction]:
    grid = points(n)
    matchings = enumerate_matchings(n, m)
    total = len(matchings) << n
    counts: Dict[Tuple[int, int], int] = {}
    for matching in matchings:
        edge_values = np.stack([grid[:, i] * grid[:, j] for i, j in matching.edges], axis=1)
        for sx in range(1 << n):
            chi_x = np.prod(grid[:, members(sx)], axis=1) if sx else np.ones(1 << n, dtype=np.int64)
            for sy in range(1 << m):
                chi_y = np.prod(edge_values[:, members(sy)], axis=1) if sy else 1
                value = int(np.sum(chi_x * chi_y))
                if value:
                    counts[(sx, sy)] = counts.get((sx, sy), 0) + value
    return {key: Fraction(value, total) for key, value in counts.items() if value}


def parity_bit(value: int) -> int:
    return bin(value).count("1") & 1


def sign_bit(v: int) -> int:
    """0 for +1, 1 for -1."""
    return 1 if v == -1 else 0


class RoundResult(NamedTuple):
    """One run of the matching-basis protocol."""
    edge_in_matching: bool
    i: int
    j: int
    a: int
    b: int


class BhmService:
    """Hard distributions, exact moment checks, and the one-way protocols for BHM."""

    @property
    def alpha(self) -> float:
        return settings.bhm_alpha

    def edges_for(self, n: int) -> int:
        """m = floor(alpha n), validated against 2m <= n."""
        m = int(math.floor(self.alpha * n))
        if m < 1 or 2 * m > n:
            raise InvalidStateError(f"alpha={self.alpha} gives m={m} at n={n}")
        return m

    # ------------------------------------------------------------------
    # Instances
    # ------------------------------------------------------------------
    def apply_matching(self, matching: Matching, x: Sequence[int]) -> Tuple[int, ...]:
        """(Mx)_k = x_i x_j for the k-th edge (i, j)."""
        x = as_signs(x, "x")
        if len(x) != matching.n:
            raise InvalidStateError(f"x has length {len(x)}, expected {matching.n}")
        return tuple(x[i] * x[j] for i, j in matching.edges)

    def random_matching(self, n: int, m: int, rng: np.random.Generator) -> Matching:
        """Uniform m-edge matching."""
        chosen = rng.permutation(n)[: 2 * m]
        edges = sorted(tuple(sorted((int(chosen[2 * e]), int(chosen[2 * e + 1])))) for e in range(m))
        return Matching(n, tuple(edges))

    def _instance(self, n: int, m: int, flip: bool, rng: np.random.Generator) -> BhmInstance:
        x = tuple(int(v) for v in rng.choice((1, -1), size=n))
        matching = self.random_matching(n, m, rng)
        y = self.apply_matching(matching, x)
        if flip:
            y = tuple(-v for v in y)
        return BhmInstance(x, matching, y)

    def sample(self, dist: HardDistributionSpec, seed=None) -> Tuple[BhmInstance, ...]:
        """
        Draw one sample of a hard distribution.

        Args:
            dist: Distribution description
            seed: Seed or generator

        Returns:
            k instances; for the mixtures copy i is a Y copy exactly when i is in K
        """
        rng = make_rng(seed)
        if dist.kind in (DistributionKind.NO, DistributionKind.YES):
            return (self._instance(dist.n, dist.m, dist.kind == DistributionKind.YES, rng),)
        in_k = [bool(b) for b in rng.integers(0, 2, size=dist.k - 1)]
        odd = sum(in_k) % 2
        in_k.append(odd != (dist.parity == -1))
        return tuple(self._instance(dist.n, dist.m, flip, rng) for flip in in_k)

    # ------------------------------------------------------------------
    # Moments
    # ------------------------------------------------------------------
    def _check_moment_budget(self, n: int, k: int) -> None:
        if n > MAX_MOMENT_VARIABLES or k > MAX_COPIES:
            raise BudgetExceededError(f"Moments limited to n <= {MAX_MOMENT_VARIABLES}, k <= {MAX_COPIES}")

    def single_copy_moments(self, n: int, m: int) -> Dict[Tuple[int, int], Fraction]:
        """
        E[chi_Sx(x) chi_Sy(Mx)] under N for every (Sx, Sy) mask pair.

        Summed exhaustively over x and every matching; only nonzero entries
        are kept.
        """
        self._check_moment_budget(n, 1)
        return _single_copy_moments(n, m)

    def _copy_moment(self, n: int, m: int, sx: int, sy: int, yes: bool) -> Fraction:
        value = self.single_copy_moments(n, m).get((sx, sy), Fraction(0))
        if yes and parity_bit(sy):
            return -value
        return value

    def moment(self, dist: HardDistributionSpec, sx: Sequence[int], sy: Sequence[int]) -> Fraction:
        """
        E[prod_i chi_{Sx_i}(x^(i)) chi_{Sy_i}(y^(i))] exactly.

        Args:
            dist: Distribution
            sx: k masks over [n]
            sy: k masks over [m]

        Returns:
            Exact rational moment
        """
        self._check_moment_budget(dist.n, dist.k)
        if len(sx) != dist.k or len(sy) != dist.k:
            raise InvalidStateError(f"Moment needs {dist.k} index sets per side")
        if dist.kind in (DistributionKind.NO, DistributionKind.YES):
            return self._copy_moment(dist.n, dist.m, sx[0], sy[0], dist.kind == DistributionKind.YES)
        total = Fraction(0)
        subsets = 0
        for in_k in product((False, True), repeat=dist.k):
            if (-1) ** sum(in_k) != dist.parity:
                continue
            subsets += 1
            term = Fraction(1)
            for i, yes in enumerate(in_k):
                term *= self._copy_moment(dist.n, dist.m, sx[i], sy[i], yes)
                if not term:
                    break
            total += term
        return total / subsets

    @log_execution_time(logger)
    def verify_moment_agreement(self, n: int, m: int, k: int, max_size: int) -> MomentReport:
        """
        Compare mu(+1, k) and mu(-1, k) on every moment of total size <= max_size.

        Size counts every coordinate: sum_i |Sx_i| + |Sy_i|. Tuples are
        visited by size, so the reported counterexample has minimal size.
        """
        self._check_moment_budget(n, k)
        plus = HardDistributionSpec(DistributionKind.MU_PLUS, n, m, k)
        minus = HardDistributionSpec(DistributionKind.MU_MINUS, n, m, k)
        per_copy = [(sx, sy) for sx in range(1 << n) for sy in range(1 << m)]
        sized = []
        for combo in product(per_copy, repeat=k):
            size = sum(bin(sx).count("1") + bin(sy).count("1") for sx, sy in combo)
            if size <= max_size:
                sized.append((size, combo))
        sized.sort()
        checked = 0
        for size, combo in sized:
            sx = [c[0] for c in combo]
            sy = [c[1] for c in combo]
            checked += 1
            a, b = self.moment(plus, sx, sy), self.moment(minus, sx, sy)
            if a != b:
                return MomentReport(
                    n=n,
                    m=m,
                    k=k,
                    max_size=max_size,
                    agree=False,
                    checked=checked,
                    counterexample=MomentCounterexample(
                        sx=[members(s) for s in sx],
                        sy=[members(s) for s in sy],
                        size=size,
                        plus_value=str(a),
                        minus_value=str(b),
                    ),
                )
        return MomentReport(n=n, m=m, k=k, max_size=max_size, agree=True, checked=checked)

    def minimal_disagreement_size(self, n: int, m: int, k: int) -> MomentReport:
        """Smallest total size on which the two mixtures differ."""
        return self.verify_moment_agreement(n, m, k, (n + m) * k)

    # ------------------------------------------------------------------
    # Matching combinatorics
    # ------------------------------------------------------------------
    def matches(self, matchings: Sequence[Matching], s_blocks: Sequence[int]) -> Optional[Tuple[int, ...]]:
        """
        Edge masks T = M(S) when every M_i restricted to S_i is a perfect matching of S_i.

        Returns:
            k edge masks, or None when some block is not matched
        """
        if len(matchings) != len(s_blocks):
            raise InvalidStateError("One subset mask per matching is required")
        result = []
        for matching, s in zip(matchings, s_blocks):
            t = 0
            covered = 0
            for e, (i, j) in enumerate(matching.edges):
                if (s >> i) & 1 and (s >> j) & 1:
                    t |= 1 << e
                    covered |= (1 << i) | (1 << j)
            if covered != s:
                return None
            result.append(t)
        return tuple(result)

    def correlation_identity_audit(self, matching: Matching, s: int, w: Sequence[int]) -> RationalAudit:
        """
        E_x[1[Mx = w] chi_S(x)] against 2^-m chi_{M(S)}(w), or 0 when M does not match S.
        """
        n, m = matching.n, matching.m
        if n > MAX_MOMENT_VARIABLES:
            raise BudgetExceededError(f"Identity audit limited to n <= {MAX_MOMENT_VARIABLES}")
        w = as_signs(w, "w")
        grid = points(n)
        hit = np.ones(1 << n, dtype=bool)
        for k, (i, j) in enumerate(matching.edges):
            hit &= grid[:, i] * grid[:, j] == w[k]
        chi = np.prod(grid[:, members(s)], axis=1) if s else np.ones(1 << n, dtype=np.int64)
        lhs = Fraction(int(np.sum(chi[hit])), 1 << n)
        t = self.matches([matching], [s])
        if t is None:
            rhs = Fraction(0)
        else:
            rhs = Fraction(int(np.prod([w[e] for e in members(t[0])])) if t[0] else 1, 1 << m)
        return RationalAudit(check="matching_correlation_identity", lhs=lhs, rhs=rhs, holds=lhs == rhs)

    def match_probability(
        self,
        n: int,
        m: int,
        block_sizes: Sequence[int],
        samples: int = 0,
        seed=None,
        enumerate_all: bool = True,
    ) -> MatchProbabilityResult:
        """
        Probability that independent uniform matchings match a fixed S with |S_i| = 2 l_i.

        Args:
            n: Vertices per block
            m: Edges per matching
            block_sizes: l_1..l_k
            samples: Monte-Carlo samples (0 skips sampling)
            seed: Seed or generator
            enumerate_all: Also count over every matching tuple

        Returns:
            Exact value prod C(m, l_i) / C(n, 2 l_i) with its checks
        """
        if any(2 * ell > n or ell < 0 for ell in block_sizes):
            raise InvalidStateError("Block sizes must satisfy 0 <= 2l <= n")
        exact = Fraction(1)
        for ell in block_sizes:
            exact *= Fraction(math.comb(m, ell), math.comb(n, 2 * ell))
        s_blocks = [(1 << (2 * ell)) - 1 for ell in block_sizes]

        enumerated = None
        if enumerate_all:
            if n > MAX_MOMENT_VARIABLES:
                raise BudgetExceededError(f"Matching enumeration limited to n <= {MAX_MOMENT_VARIABLES}")
            matchings = enumerate_matchings(n, m)
            enumerated = Fraction(1)
            for s in s_blocks:
                hits = sum(1 for mt in matchings if self.matches([mt], [s]) is not None)
                enumerated *= Fraction(hits, len(matchings))

        estimate, error = float(exact), 0.0
        if samples > 0:
            rng = make_rng(seed)
            hits = 0
            for _ in range(samples):
                tuple_ = [self.random_matching(n, m, rng) for _ in s_blocks]
                hits += self.matches(tuple_, s_blocks) is not None
            estimate = hits / samples
            error = math.sqrt(max(estimate * (1 - estimate), 1.0 / samples) / samples)
        return MatchProbabilityResult(
            n=n,
            m=m,
            block_sizes=list(block_sizes),
            exact=exact,
            enumerated=enumerated,
            estimate=estimate,
            standard_error=error,
            samples=samples,
        )

    # ------------------------------------------------------------------
    # Quantum protocol
    # ------------------------------------------------------------------
    def complete_matching(self, matching: Matching) -> List[Tuple[int, int]]:
        """Matching edges followed by greedy pairs of the lowest free vertices."""
        free = [v for v in range(matching.n) if v not in matching.vertices]
        return list(matching.edges) + [(free[t], free[t + 1]) for t in range(0, len(free), 2)]

    def round_distribution(self, x: Sequence[int], matching: Matching) -> Dict[Tuple[int, int, int], float]:
        """
        Exact joint law of (Bob's completed edge index, a, b).

        The shared state (1/sqrt n) sum_i |i>|i> gets Alice's phase x_i,
        Bob projects onto {|i>, |j>} for each completed edge, then both
        registers are Hadamarded and measured.
        """
        x = as_signs(x, "x")
        n = len(x)
        if n < 2 or n & (n - 1):
            raise InvalidStateError(f"The matching protocol needs n a power of two, got {n}")
        if n != matching.n:
            raise InvalidStateError("Input length and matching size differ")
        psi = np.diag(np.asarray(x, dtype=np.float64)) / math.sqrt(n)
        h = butterfly(np.eye(n)) / math.sqrt(n)
        law = {}
        for e, (i, j) in enumerate(self.complete_matching(matching)):
            projected = np.zeros_like(psi)
            projected[:, [i, j]] = psi[:, [i, j]]
            amplitudes = h @ projected @ h.T
            probabilities = amplitudes**2
            for a, b in zip(*np.nonzero(probabilities > 1e-15)):
                law[(e, int(a), int(b))] = float(probabilities[a, b])
        return law

    def quantum_round(self, x: Sequence[int], matching: Matching, seed=None) -> RoundResult:
        """
        One shot of the matching-basis protocol.

        Whenever the measured edge lies in M, (i xor j) . (a xor b) equals
        bit(x_i) xor bit(x_j) over GF(2).
        """
        rng = make_rng(seed)
        law = self.round_distribution(x, matching)
        keys = list(law)
        weights = np.array([law[key] for key in keys])
        e, a, b = keys[int(rng.choice(len(keys), p=weights / weights.sum()))]
        i, j = self.complete_matching(matching)[e]
        return RoundResult(e < matching.m, i, j, a, b)

    def relation_holds(self, x: Sequence[int], result: RoundResult) -> bool:
        recovered = parity_bit((result.i ^ result.j) & (result.a ^ result.b))
        return recovered == sign_bit(x[result.i]) ^ sign_bit(x[result.j])

    def default_reps(self, n: int, m: int, k: int) -> int:
        """ceil(log2(10 k) / (2 alpha)) with alpha = m / n."""
        return math.ceil(math.log2(10 * k) / (2 * m / n))

    def referee_decide(
        self,
        rounds: Sequence[Sequence[RoundResult]],
        instances: Sequence[BhmInstance],
        reps_per_copy: int,
        seed=None,
    ) -> int:
        """
        Product of per-copy answers.

        Each copy is decided by its first round whose edge belongs to M;
        a copy with no such round among the first reps_per_copy answers a
        uniformly random sign.
        """
        if reps_per_copy < 1:
            raise InvalidStateError("reps_per_copy must be positive")
        rng = make_rng(seed)
        output = 1
        for copy_rounds, inst in zip(rounds, instances):
            index = inst.matching.edge_index()
            answer = None
            for result in copy_rounds[:reps_per_copy]:
                if result.edge_in_matching:
                    recovered = parity_bit((result.i ^ result.j) & (result.a ^ result.b))
                    answer = 1 if sign_bit(inst.y[index[(result.i, result.j)]]) == recovered else -1
                    break
            if answer is None:
                answer = int(rng.choice((1, -1)))
            output *= answer
        return output

    def run_protocol(self, instances: Sequence[BhmInstance], reps_per_copy: Optional[int] = None, seed=None) -> int:
        """Quantum rounds on every copy followed by the referee."""
        rng = make_rng(seed)
        inst0 = instances[0]
        if reps_per_copy is None:
            reps_per_copy = self.default_reps(inst0.n, inst0.matching.m, len(instances))
        rounds = [[self.quantum_round(inst.x, inst.matching, rng) for _ in range(reps_per_copy)] for inst in instances]
        return self.referee_decide(rounds, instances, reps_per_copy, rng)

    # ------------------------------------------------------------------
    # Classical side
    # ------------------------------------------------------------------
    def _message_codes(self, message_set: np.ndarray, n: int, m: int, k: int) -> List[List[np.ndarray]]:
        """Per copy, per matching: Mx packed into m bits for every x in the set."""
        codes = []
        for copy in range(k):
            block = (message_set >> (copy * n)) & ((1 << n) - 1)
            per_matching = []
            for matching in enumerate_matchings(n, m):
                code = np.zeros(len(block), dtype=np.int64)
                for e, (i, j) in enumerate(matching.edges):
                    code |= (((block >> i) ^ (block >> j)) & 1) << e
                per_matching.append(code)
            codes.append(per_matching)
        return codes

    def _signed_distance(self, histogram: np.ndarray, m: int, k: int) -> int:
        """sum_w |sum_K (-1)^|K| h[w xor flip(K)]|."""
        size = 1 << (m * k)
        w = np.arange(size)
        signed = np.zeros(size, dtype=np.int64)
        for in_k in product((0, 1), repeat=k):
            flip = sum(((1 << m) - 1) << (m * i) for i, bit in enumerate(in_k) if bit)
            signed += (-1) ** sum(in_k) * histogram[w ^ flip]
        return int(np.sum(np.abs(signed)))

    def _delta_parts(self, message_set: Sequence[int], n: int, m: int, k: int) -> Tuple[int, int]:
        if n * k > MAX_DELTA_BITS or k > MAX_COPIES:
            raise BudgetExceededError(f"Delta enumeration limited to nk <= {MAX_DELTA_BITS}")
        masks = np.unique(np.asarray(list(message_set), dtype=np.int64))
        if masks.size == 0:
            raise InvalidStateError("Message set must be nonempty")
        if masks[0] < 0 or masks[-1] >= 1 << (n * k):
            raise InvalidStateError("Message set entries must be bitmasks over nk coordinates")
        codes = self._message_codes(masks, n, m, k)
        total = 0
        for choice in product(*[range(len(c)) for c in codes]):
            packed = sum(codes[i][idx] << (m * i) for i, idx in enumerate(choice))
            histogram = np.bincount(packed, minlength=1 << (m * k))
            total += self._signed_distance(histogram, m, k)
        return total, masks.size

    def delta_az(self, message_set: Sequence[int], n: int, m: int, k: int = 1) -> Fraction:
        """
        E_M || mu_1 - mu_-1 ||_1 for x uniform on the message set.

        mu_b is the law of Bob's y when x is uniform on the set and the
        copies in K are negated, K uniform with (-1)^|K| = b.

        Args:
            message_set: Alice inputs as bitmasks over nk coordinates
            n: Vertices per copy
            m: Edges per matching
            k: Copies

        Returns:
            Exact value in [0, 2]
        """
        total, size = self._delta_parts(message_set, n, m, k)
        tuples = len(enumerate_matchings(n, m)) ** k
        return Fraction(total, tuples * size * (1 << (k - 1)))

    def delta_fourier_bound(self, message_set: Sequence[int], n: int, m: int, k: int = 1) -> float:
        """
        2 sqrt(sum over S in the parity family of f_hat(S)^2 P[M matches S]),
        with f the normalized indicator of the message set; never below delta_az.
        """
        if n * k > MAX_DELTA_BITS:
            raise BudgetExceededError(f"Fourier bound limited to nk <= {MAX_DELTA_BITS}")
        indicator = np.zeros(1 << (n * k))
        indicator[np.asarray(list(message_set), dtype=np.int64)] = 1.0
        f_hat = butterfly(indicator) / indicator.sum()
        levels = LevelSets(n, m, k)
        total = 0.0
        for s in range(1 << (n * k)):
            blocks = [(s >> (i * n)) & ((1 << n) - 1) for i in range(k)]
            if not levels.in_s(blocks):
                continue
            probability = 1.0
            for block in blocks:
                ell = bin(block).count("1") // 2
                probability *= math.comb(m, ell) / math.comb(n, 2 * ell)
            total += f_hat[s] ** 2 * probability
        return 2.0 * math.sqrt(total)

    def _view_counts(self, labels: np.ndarray, n: int, m: int) -> int:
        """sum over M, z, w of |#{x: L(x)=z, Mx=w} - #{x: L(x)=z, Mx=-w}| for one labeling."""
        xs = np.arange(1 << n)
        total = 0
        for code in self._message_codes(xs, n, m, 1)[0]:
            for z in np.unique(labels):
                histogram = np.bincount(code[labels == z], minlength=1 << m)
                total += int(np.sum(np.abs(histogram - histogram[::-1])))
        return total

    def advantage_of_partition(self, labels: Sequence[int], n: int, m: int) -> Fraction:
        """
        Best one-way advantage when Alice sends the label of her input.

        Bob answers optimally from (M, y, z), so the advantage is half the
        L1 distance between his views under N and Y.
        """
        labels = np.asarray(labels, dtype=np.int64)
        if labels.size != 1 << n:
            raise InvalidStateError(f"Partition must label all {1 << n} inputs")
        tuples = len(enumerate_matchings(n, m))
        return Fraction(self._view_counts(labels, n, m), 2 * tuples * (1 << n))

    def weighted_delta(self, labels: Sequence[int], n: int, m: int) -> Fraction:
        """sum_z mu(A_z) Delta_{A_z}; twice the advantage of the partition."""
        labels = np.asarray(labels, dtype=np.int64)
        total = Fraction(0)
        for z in np.unique(labels):
            part = np.flatnonzero(labels == z)
            total += Fraction(part.size, 1 << n) * self.delta_az(part, n, m, 1)
        return total

    @log_execution_time(logger)
    def brute_force_one_way(self, n: int, m: int, c: int) -> OracleResult:
        """
        Optimal advantage of deterministic c-bit one-way protocols for N versus Y.

        Every labeling of Alice's 2^n inputs by 2^c messages is scored at
        once: for each matching and y the signed indicator of {Mx = y} minus
        {Mx = -y} is multiplied against the one-hot labelings.

        Args:
            n: Input length, at most 4 for c >= 1
            m: Matching size
            c: Message bits

        Returns:
            Exact optimum with a maximizing partition

        Raises:
            BudgetExceededError: More than 2^17 labelings
        """
        size = 1 << n
        tuples = len(enumerate_matchings(n, m))
        if c >= n:
            return OracleResult(
                n=n,
                m=m,
                c=c,
                advantage=GoldenRational.from_fraction(Fraction(1)),
                best_partition=list(range(size)),
                partitions_searched=0,
            )
        messages = 1 << c
        count = messages**size
        if count > MAX_LABELINGS:
            raise BudgetExceededError(f"{count} labelings exceed the limit of {MAX_LABELINGS}")
        index = np.arange(count, dtype=np.int64)
        labelings = np.stack([(index // messages**x) % messages for x in range(size)], axis=1)
        onehot = [(labelings == z).astype(np.int64) for z in range(messages)]
        scores = np.zeros(count, dtype=np.int64)
        xs = np.arange(size)
        for code in self._message_codes(xs, n, m, 1)[0]:
            for w in range(1 << m):
                signed = (code == w).astype(np.int64) - (code == (w ^ ((1 << m) - 1))).astype(np.int64)
                for z in range(messages):
                    scores += np.abs(onehot[z] @ signed)
        best = int(np.argmax(scores))
        advantage = Fraction(int(scores[best]), 2 * tuples * size)
        logger.info(
            "Classical oracle finished",
            extra={"extra": {"n": n, "m": m, "c": c, "advantage": str(advantage), "labelings": count}},
        )
        return OracleResult(
            n=n,
            m=m,
            c=c,
            advantage=GoldenRational.from_fraction(advantage),
            best_partition=[int(v) for v in labelings[best]],
            partitions_searched=count,
        )


# Global instance
bhm_service = BhmService()
