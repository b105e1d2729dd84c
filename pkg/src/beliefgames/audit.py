"""Informational-assumption audit.

Decides whether a game satisfies the structural conditions the belief
machinery relies on: stage-one conditional independence, existence of a
strategy-independent belief-update kernel, measurability of the opponent's
second-order belief, signal inclusion, and independence of the
belief-times-signal pushforward from the uninformed player's action.

All decisions are exact.  Conditions quantified over the whole belief
simplex are tested as polynomial identities on homogeneous forms (sound and
complete for identities that hold on the simplex); when a global identity
fails, a deterministic set of sample points separates genuine failure from
"holds on the sampled points only".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .game import (
    ZERO,
    BeliefAtomLaw,
    BeliefPoint,
    GameSpec,
    InitialLaw,
    Label,
    label_text,
)

PASS = "pass"
FAIL = "fail"
SAMPLES = "holds-on-samples"


class AuditError(RuntimeError):
    pass


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    witness: str | None = None
    detail: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == PASS


Matrix = tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class FirstOrderKernel:
    """Strategy-independent Bayes update of the informed player's belief.

    For each (own action i, new signal c) the kernel holds one candidate
    update matrix per opponent pair (j, d) whose signal column is not
    identically zero, in a fixed scan order.  When the consistency check
    passed, all candidates agree wherever they are defined.
    """

    states: tuple[str, ...]
    candidates: Mapping[tuple[str, str], tuple[tuple[tuple[str, str], Matrix], ...]]

    def update(self, x: BeliefPoint, i: str, c: str) -> BeliefPoint:
        """Posterior after playing i and observing c; uniform when no
        candidate normalizer is positive at x."""
        for _, matrix in self.candidates.get((i, c), ()):
            weights = [ZERO] * len(self.states)
            norm = ZERO
            for a, xa in enumerate(x.probs):
                if xa == 0:
                    continue
                row = matrix[a]
                for b in range(len(self.states)):
                    weights[b] += xa * row[b]
            norm = sum(weights, ZERO)
            if norm > 0:
                return BeliefPoint(self.states, tuple(w / norm for w in weights))
        return BeliefPoint.uniform(self.states)


@dataclass(frozen=True)
class AuditReport:
    initial_independence: CheckResult
    belief_kernel: CheckResult
    initial_second_order: CheckResult
    signal_inclusion: CheckResult
    pushforward_independence: CheckResult
    kernel: FirstOrderKernel | None
    f1_table: Mapping[Label, BeliefAtomLaw] | None
    h_table: Mapping[str, str] | None

    @property
    def checks(self) -> tuple[CheckResult, ...]:
        return (
            self.initial_independence,
            self.belief_kernel,
            self.initial_second_order,
            self.signal_inclusion,
            self.pushforward_independence,
        )

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        lines = []
        for check in self.checks:
            lines.append(f"[{check.name}]")
            lines.append(f"verdict: {check.status}")
            if check.witness:
                lines.append(f"witness: {check.witness}")
            if check.detail:
                lines.append(f"certificate: {check.detail}")
            lines.append("")
        lines.append(f"overall: {'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------

def check_initial_independence(law: InitialLaw) -> CheckResult:
    """Stage-one requirement: the state and the uninformed player's signal
    are conditionally independent given the informed player's signal,
    expressed as the cross-product identity over all support triples."""
    name = "initial-independence"
    cs = law.signals1
    ds = law.signals2
    for k in law.states:
        for c in cs:
            for d in ds:
                lhs = law.mass_c(c) * law.mass_kcd(k, c, d)
                rhs = law.mass_kc(k, c) * law.mass_cd(c, d)
                if lhs != rhs:
                    witness = f"(k={k}, c={label_text(c)}, d={label_text(d)}): {lhs} != {rhs}"
                    return CheckResult(name, FAIL, witness=witness)
    return CheckResult(name, PASS)


def _column_matrix(spec: GameSpec, i: str, j: str, c: str, d: str) -> Matrix:
    """Update matrix M[a][b] = q(k_a, i, j)[k_b, c, d]."""
    rows = []
    for ka in spec.states:
        row = spec.q(ka, i, j)
        rows.append(tuple(row.get((kb, c, d), ZERO) for kb in spec.states))
    return tuple(rows)


def _row_sums(matrix: Matrix) -> tuple[Fraction, ...]:
    return tuple(sum(row, ZERO) for row in matrix)


def _sym_outer_equal(u: tuple[Fraction, ...], v: tuple[Fraction, ...],
                     u2: tuple[Fraction, ...], v2: tuple[Fraction, ...]) -> bool:
    """Whether (u.p)(v.p) == (u2.p)(v2.p) as polynomials: both sides are
    homogeneous quadratics, so equality on the simplex is equivalent to
    equality of the symmetrized coefficient matrices."""
    n = len(u)
    for a in range(n):
        for b in range(a, n):
            if u[a] * v[b] + u[b] * v[a] != u2[a] * v2[b] + u2[b] * v2[a]:
                return False
    return True


def sample_beliefs(states: tuple[str, ...]) -> list[BeliefPoint]:
    """Deterministic probe set: vertices, barycenter, vertex-pair midpoints."""
    pts = [BeliefPoint.dirac(states, k) for k in states]
    pts.append(BeliefPoint.uniform(states))
    n = len(states)
    for a in range(n):
        for b in range(a + 1, n):
            probs = [ZERO] * n
            probs[a] = Fraction(1, 2)
            probs[b] = Fraction(1, 2)
            pts.append(BeliefPoint(states, tuple(probs)))
    return pts


def derive_first_order_kernel(spec: GameSpec) -> tuple[FirstOrderKernel, CheckResult]:
    """Derive the belief-update kernel and certify its (j, d)-independence.

    For every (i, c), any two candidate columns must induce the same
    normalized posterior wherever both are defined; the cross-multiplied
    form of that requirement is a quadratic polynomial identity in the
    belief, checked coefficient-wise.
    """
    name = "belief-update-kernel"
    candidates: dict[tuple[str, str], tuple[tuple[tuple[str, str], Matrix], ...]] = {}
    for i in spec.actions1:
        for c in spec.signals1:
            cands = []
            for j in spec.actions2:
                for d in spec.signals2:
                    m = _column_matrix(spec, i, j, c, d)
                    if any(any(v != 0 for v in row) for row in m):
                        cands.append(((j, d), m))
            candidates[(i, c)] = tuple(cands)
    kernel = FirstOrderKernel(states=spec.states, candidates=candidates)

    failure = None
    for i in spec.actions1:
        for c in spec.signals1:
            cands = candidates[(i, c)]
            for a in range(len(cands)):
                (jd1, m1) = cands[a]
                s1 = _row_sums(m1)
                for b in range(a + 1, len(cands)):
                    (jd2, m2) = cands[b]
                    s2 = _row_sums(m2)
                    for kidx in range(len(spec.states)):
                        u1 = tuple(m1[x][kidx] for x in range(len(spec.states)))
                        u2 = tuple(m2[x][kidx] for x in range(len(spec.states)))
                        if not _sym_outer_equal(u1, s2, u2, s1):
                            failure = (i, c, spec.states[kidx], jd1, jd2)
                            break
                    if failure:
                        break
                if failure:
                    break
            if failure:
                break
        if failure:
            break

    if failure is None:
        return kernel, CheckResult(name, PASS)

    # Global identity failed: decide between pointwise agreement on the
    # sample set and a genuine counterexample.
    for x in sample_beliefs(spec.states):
        for i in spec.actions1:
            for c in spec.signals1:
                posterior = None
                first = None
                for jd, m in candidates[(i, c)]:
                    weights = [ZERO] * len(spec.states)
                    for a, xa in enumerate(x.probs):
                        if xa == 0:
                            continue
                        for b in range(len(spec.states)):
                            weights[b] += xa * m[a][b]
                    norm = sum(weights, ZERO)
                    if norm == 0:
                        continue
                    post = tuple(w / norm for w in weights)
                    if posterior is None:
                        posterior, first = post, jd
                    elif post != posterior:
                        witness = (
                            f"(i={i}, c={c}): candidates {first} and {jd} disagree at "
                            f"x={x.text()}: {BeliefPoint(spec.states, posterior).text()} vs "
                            f"{BeliefPoint(spec.states, post).text()}"
                        )
                        return kernel, CheckResult(name, FAIL, witness=witness)
    i, c, k, jd1, jd2 = failure
    detail = f"identity fails off-sample at (i={i}, c={c}, k={k}) between {jd1} and {jd2}"
    return kernel, CheckResult(name, SAMPLES, detail=detail)


def initial_beliefs(law: InitialLaw) -> dict[Label, BeliefPoint]:
    """First-order belief of the informed player per stage-one signal."""
    return {c: law.state_given_c(c) for c in law.signals1}


def second_order_beliefs(law: InitialLaw) -> dict[Label, BeliefAtomLaw]:
    """Second-order belief of the uninformed player per stage-one signal."""
    x1 = initial_beliefs(law)
    out: dict[Label, BeliefAtomLaw] = {}
    for d in law.signals2:
        mass_d = law.mass_d(d)
        pairs = [(x1[c], law.mass_cd(c, d) / mass_d) for c in law.signals1]
        out[d] = BeliefAtomLaw.from_pairs(pairs)
    return out


def check_initial_second_order(law: InitialLaw, independence: CheckResult | None) -> tuple[dict[Label, BeliefAtomLaw] | None, CheckResult]:
    """The informed player must be able to read the opponent's second-order
    belief off his own stage-one signal: all d co-occurring with a given c
    must induce the same conditional law of the first-order belief."""
    name = "initial-second-order"
    if independence is None:
        raise AuditError("initial-independence must be checked before initial-second-order")
    y1 = second_order_beliefs(law)
    table: dict[Label, BeliefAtomLaw] = {}
    for c in law.signals1:
        value = None
        first_d = None
        for d in law.signals2:
            if law.mass_cd(c, d) == 0:
                continue
            if value is None:
                value, first_d = y1[d], d
            elif y1[d] != value:
                witness = (
                    f"c={label_text(c)} co-occurs with d={label_text(first_d)} and "
                    f"d={label_text(d)} giving distinct laws {value.text()} vs {y1[d].text()}"
                )
                return None, CheckResult(name, FAIL, witness=witness)
        if value is not None:
            table[c] = value
    return table, CheckResult(name, PASS)


def check_signal_inclusion(spec: GameSpec) -> tuple[dict[str, str] | None, CheckResult]:
    """The informed player can name the opponent's stage signal: each own
    signal c must co-occur with exactly one opposing signal d across every
    transition row."""
    name = "signal-inclusion"
    seen: dict[str, set[str]] = {}
    for key, row in spec.transition.items():
        for (_, c, d), mass in row.items():
            if mass > 0:
                seen.setdefault(c, set()).add(d)
    h: dict[str, str] = {}
    for c in spec.signals1:
        ds = sorted(seen.get(c, ()))
        if len(ds) > 1:
            witness = f"c={c} co-occurs with {{{', '.join(ds)}}}"
            return None, CheckResult(name, FAIL, witness=witness)
        h[c] = ds[0] if ds else spec.signals2[0]
    return h, CheckResult(name, PASS)


def _projectively_equal(spec: GameSpec, m1: Matrix, m2: Matrix) -> bool:
    """Whether two update matrices induce the same normalized posterior as a
    function of the belief (cross-multiplied polynomial identity)."""
    s1 = _row_sums(m1)
    s2 = _row_sums(m2)
    n = len(spec.states)
    for kidx in range(n):
        u1 = tuple(m1[a][kidx] for a in range(n))
        u2 = tuple(m2[a][kidx] for a in range(n))
        if not _sym_outer_equal(u1, s2, u2, s1):
            return False
    return True


def check_pushforward_independence(spec: GameSpec, kernel: FirstOrderKernel) -> CheckResult:
    """The joint law of (updated belief, opposing signal) must not depend on
    the uninformed player's action.

    Global route: group signal pairs by (d, posterior-as-a-function) and
    compare the per-action group masses as linear forms in the belief.
    Fallback route: exact pointwise comparison at the deterministic sample
    set, merging atoms with equal posterior values.
    """
    name = "pushforward-independence"
    global_ok = True
    for i in spec.actions1:
        # atom (c, d) -> per-action linear mass form over source states
        forms: dict[tuple[str, str], dict[str, list[Fraction]]] = {}
        for j in spec.actions2:
            for ka_idx, ka in enumerate(spec.states):
                for (kb, c, d), mass in spec.q(ka, i, j).items():
                    form = forms.setdefault((c, d), {}).setdefault(j, [ZERO] * len(spec.states))
                    form[ka_idx] += mass
        # group atoms sharing d whose posterior maps agree as functions
        keys = sorted(forms.keys())
        groups: list[tuple[str, list[tuple[str, str]]]] = []
        reps: list[Matrix | None] = []
        for (c, d) in keys:
            cands = kernel.candidates.get((i, c), ())
            rep = cands[0][1] if cands else None
            placed = False
            for gidx, (gd, members) in enumerate(groups):
                if gd != d:
                    continue
                other = reps[gidx]
                if rep is None and other is None:
                    same = True
                elif rep is None or other is None:
                    same = False
                else:
                    same = _projectively_equal(spec, rep, other)
                if same:
                    members.append((c, d))
                    placed = True
                    break
            if not placed:
                groups.append((d, [(c, d)]))
                reps.append(rep)
        for gd, members in groups:
            base = None
            for j in spec.actions2:
                total = [ZERO] * len(spec.states)
                for atom in members:
                    form = forms.get(atom, {}).get(j)
                    if form:
                        for a in range(len(spec.states)):
                            total[a] += form[a]
                if base is None:
                    base = total
                elif total != base:
                    global_ok = False
        if not global_ok:
            break
    if global_ok:
        return CheckResult(name, PASS)

    # pointwise comparison at the sample set
    for x in sample_beliefs(spec.states):
        for i in spec.actions1:
            images: list[tuple[str, dict[tuple[tuple[Fraction, ...], str], Fraction]]] = []
            for j in spec.actions2:
                merged: dict[tuple[tuple[Fraction, ...], str], Fraction] = {}
                for ka_idx, ka in enumerate(spec.states):
                    w = x.probs[ka_idx]
                    if w == 0:
                        continue
                    for (kb, c, d), mass in spec.q(ka, i, j).items():
                        post = kernel.update(x, i, c)
                        key = (post.probs, d)
                        merged[key] = merged.get(key, ZERO) + w * mass
                images.append((j, merged))
            for jdx in range(1, len(images)):
                if images[jdx][1] != images[0][1]:
                    witness = (
                        f"(i={i}, j={images[0][0]}, j'={images[jdx][0]}) pushforwards "
                        f"differ at x={x.text()}"
                    )
                    return CheckResult(name, FAIL, witness=witness)
    return CheckResult(name, SAMPLES, detail="per-action group masses differ off-sample")


def run_audit(spec: GameSpec, law: InitialLaw) -> AuditReport:
    """Run the checks in dependency order and aggregate the verdicts."""
    independence = check_initial_independence(law)
    kernel, kernel_check = derive_first_order_kernel(spec)
    f1_table, second_order = check_initial_second_order(law, independence)
    h_table, inclusion = check_signal_inclusion(spec)
    pushforward = check_pushforward_independence(spec, kernel)
    return AuditReport(
        initial_independence=independence,
        belief_kernel=kernel_check,
        initial_second_order=second_order,
        signal_inclusion=inclusion,
        pushforward_independence=pushforward,
        kernel=kernel,
        f1_table=f1_table,
        h_table=h_table,
    )
